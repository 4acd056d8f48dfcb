//! Finite-difference solvers on grid domains.
//!
//! * [`solve_dirichlet`]: bounded Dirichlet data, damped Newton on the convex
//!   discrete energy with the staircase five-point Laplacian.
//! * [`solve_blowup`], [`solve_signed_blowup`]: boundary-level continuation
//!   `B → ∞` in the bounded coordinate of [`crate::BlowupChart`], with
//!   truncation-radius exhaustion on exterior domains.
//! * [`decay_check`], [`signed_bounds_check`], [`comparison_check`]: a-priori
//!   bounds and the discrete comparison principle.

mod blowup;
mod checks;
mod dirichlet;
mod field;

pub use blowup::{solve_blowup, solve_signed_blowup, BlowupConfig, BoundaryMode};
pub use checks::{
    comparison_check, comparison_check_with, decay_check, default_slack, signed_bounds_check, BoundCheck, BoundReport,
    ComparisonReport, ComparisonTolerances,
};
pub use dirichlet::{solve_dirichlet, solve_dirichlet_with, DirichletConfig, DirichletStats};
pub use field::Field;

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{build_domain, PartitionSpec, ShapeSpec};
    use crate::ode_phase::{invert_halflength, make_orbit, OrbitSpec, Sign};
    use crate::potential::Potential;

    fn quartic() -> Potential {
        Potential::power(4.0).unwrap()
    }

    fn interval(h: f64) -> crate::geometry::GridDomain {
        build_domain(ShapeSpec::Interval { a: -1.0, b: 1.0 }, h, PartitionSpec::AllPlus).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let dom =
            build_domain(ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, 0.1, PartitionSpec::AllPlus).unwrap();
        let f = solve_dirichlet(&quartic(), &dom, &vec![0.0; dom.len()], 1e-12).unwrap();
        assert!(dom.interior().iter().all(|&k| f.values()[k] == 0.0));
    }

    #[test]
    fn alpha_orbit_data_recovers_minimum() {
        let p = quartic();
        let orbit = make_orbit(&p, OrbitSpec::Alpha { lambda: 0.5 }, 1e-12).unwrap();
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let dom = interval(h);
            let g: Vec<f64> = (0..dom.len()).map(|k| orbit.eval(dom.point(k)[0]).unwrap()).collect();
            let (f, stats) = solve_dirichlet_with(&p, &dom, &g, &DirichletConfig::default(), None).unwrap();
            assert!(stats.energy.windows(2).all(|w| w[1] <= w[0]));
            errs.push((f.value_at([0.0, 0.0]).unwrap() - 0.5).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "{errs:?}");
    }

    #[test]
    fn interval_blowup_matches_length_inversion() {
        let p = quartic();
        let lambda = invert_halflength(&p, 1.0, Sign::Plus, 1e-12).unwrap();
        let dom = interval(0.01);
        let (f, report) = solve_blowup(&p, &dom, Sign::Plus, &BlowupConfig::default()).unwrap();
        assert_eq!(report.stop_reason, crate::continuation::StopReason::Stabilized);
        let err = (f.value_at([0.0, 0.0]).unwrap() - lambda).abs();
        assert!(err < 1e-3, "{err}");
        // Field is certified only on the band.
        assert!(f.get(dom.node_at([-0.99, 0.0]).unwrap()).is_none());
    }

    #[test]
    fn comparison_is_reflexive_and_detects_bad_preconditions() {
        let p = quartic();
        let dom = build_domain(ShapeSpec::LShape { half_width: 1.0 }, 0.1, PartitionSpec::AllPlus).unwrap();
        let lo = solve_dirichlet(&p, &dom, &vec![0.0; dom.len()], 1e-11).unwrap();
        let hi = solve_dirichlet(&p, &dom, &vec![1.0; dom.len()], 1e-11).unwrap();
        assert!(comparison_check(&p, &dom, &hi, &hi).unwrap());
        assert!(comparison_check(&p, &dom, &lo, &hi).unwrap());
        assert!(matches!(comparison_check(&p, &dom, &hi, &lo), Err(crate::Error::PreconditionViolation(_))));
        let bumped = Field::from_fn(Arc::new(dom.clone()), |x| 1.0 + x[0] * x[0]).unwrap();
        assert!(comparison_check(&p, &dom, &bumped, &hi).is_err());
    }

    #[test]
    fn signed_blowup_needs_both_labels() {
        let dom = interval(0.05);
        let r = solve_signed_blowup(&quartic(), &dom, &BlowupConfig::default());
        assert!(matches!(r, Err(crate::Error::LabelError(_))));
    }

    #[test]
    fn decay_check_vacuous_on_small_domain() {
        let p = quartic();
        let dom = interval(0.05);
        let (f, _) = solve_blowup(&p, &dom, Sign::Plus, &BlowupConfig::default()).unwrap();
        let r = decay_check(&f, &p, &[0.1], None).unwrap();
        assert_eq!(r.checks[0].applicable_nodes, 0);
        assert_eq!(r.checks[0].note.as_deref(), Some("no applicable nodes"));
        let r = decay_check(&f, &p, &[1e6], None).unwrap();
        assert!(r.passed() && r.checks[0].applicable_nodes > 0);
    }
}
