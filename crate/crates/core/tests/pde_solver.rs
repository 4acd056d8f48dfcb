use std::sync::Arc;

use blowup_core::*;

fn quartic() -> Potential {
    Potential::power(4.0).unwrap()
}

fn disk(h: f64) -> GridDomain {
    build_domain(ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, h, PartitionSpec::AllPlus).unwrap()
}

fn lshape(h: f64) -> GridDomain {
    build_domain(ShapeSpec::LShape { half_width: 1.0 }, h, PartitionSpec::AllPlus).unwrap()
}

fn signed_annulus(h: f64, labels: [Sign; 2]) -> GridDomain {
    let shape = ShapeSpec::Annulus { center: [0.0, 0.0], inner: 1.0, outer: 2.0 };
    build_domain(shape, h, PartitionSpec::Components(labels.to_vec())).unwrap()
}

fn constant(dom: &GridDomain, c: f64) -> Vec<f64> {
    vec![c; dom.len()]
}

#[test]
fn constant_data_obeys_the_maximum_principle() {
    let p = quartic();
    let dom = lshape(0.05);
    for c in [0.5, 3.0] {
        let (f, stats) = solve_dirichlet_with(&p, &dom, &constant(&dom, c), &DirichletConfig::default(), None).unwrap();
        assert!(stats.residual <= 1e-9);
        assert!(stats.energy.windows(2).all(|w| w[1] <= w[0]));
        for &k in dom.interior() {
            let u = f.values()[k];
            assert!(u > 0.0 && u < c, "node {k}: {u}");
        }
    }
}

#[test]
fn dirichlet_solutions_are_ordered_and_odd() {
    let p = quartic();
    let dom = disk(0.05);
    let g = |k: usize| 2.0 + dom.point(k)[0];
    let lo = solve_dirichlet(&p, &dom, &(0..dom.len()).map(g).collect::<Vec<_>>(), 1e-11).unwrap();
    let hi = solve_dirichlet(&p, &dom, &(0..dom.len()).map(|k| 2.0 * g(k)).collect::<Vec<_>>(), 1e-11).unwrap();
    let report = comparison_check_with(&p, &dom, &lo, &hi, ComparisonTolerances::default()).unwrap();
    assert!(report.ordered && report.violations == 0 && report.worst_gap < 0.0);
    let neg = solve_dirichlet(&p, &dom, &(0..dom.len()).map(|k| -g(k)).collect::<Vec<_>>(), 1e-11).unwrap();
    for &k in dom.interior() {
        assert!((neg.values()[k] + lo.values()[k]).abs() < 1e-10);
    }
}

#[test]
fn dirichlet_rejects_bad_input() {
    let p = quartic();
    let dom = disk(0.1);
    assert!(solve_dirichlet(&p, &dom, &[0.0; 3], 1e-9).is_err());
    assert!(solve_dirichlet(&p, &dom, &constant(&dom, 0.0), 0.0).is_err());
    let mut g = constant(&dom, 1.0);
    g[dom.boundary_nodes()[0]] = f64::NAN;
    assert!(matches!(solve_dirichlet(&p, &dom, &g, 1e-9), Err(Error::NonFiniteData(_))));
}

#[test]
fn negative_sign_negates_the_blowup_solution() {
    let p = quartic();
    let dom = disk(0.1);
    let cfg = BlowupConfig::default();
    let (plus, _) = solve_blowup(&p, &dom, Sign::Plus, &cfg).unwrap();
    let (minus, _) = solve_blowup(&p, &dom, Sign::Minus, &cfg).unwrap();
    assert_eq!(plus.certified_interior(), minus.certified_interior());
    for k in plus.certified_interior() {
        assert!((plus.values()[k] + minus.values()[k]).abs() < 1e-9 * (1.0 + plus.values()[k]));
    }
}

#[test]
fn disk_solution_is_symmetric_and_above_the_strip_solution() {
    let p = quartic();
    let dom = disk(1.0 / 32.0);
    let (f, report) = solve_blowup(&p, &dom, Sign::Plus, &BlowupConfig::default()).unwrap();
    assert_eq!(report.stop_reason, StopReason::Stabilized);
    // The disk lies in the strip |x| < 1, whose solution is the α-orbit blowing up at ±1.
    let lambda = invert_halflength(&p, 1.0, Sign::Plus, 1e-13).unwrap();
    let strip = make_orbit(&p, OrbitSpec::Alpha { lambda }, 1e-13).unwrap();
    for k in f.certified_interior() {
        let [x, y] = dom.point(k);
        let u = f.values()[k];
        for mirror in [[y, x], [-x, y], [x, -y]] {
            let v = f.value_at(mirror).unwrap();
            assert!((u - v).abs() < 1e-9 * (1.0 + u), "({x}, {y}): {u} vs {v}");
        }
        assert!(u >= strip.eval(x).unwrap() - 1e-2, "({x}, {y}): {u}");
    }
}

#[test]
fn larger_domains_give_smaller_blowup_solutions() {
    let p = quartic();
    let h = 0.05;
    let big = build_domain(ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.5 }, h, PartitionSpec::AllPlus).unwrap();
    let (outer, _) = solve_blowup(&p, &big, Sign::Plus, &BlowupConfig::default()).unwrap();
    let small = disk(h);
    let (inner, _) = solve_blowup(&p, &small, Sign::Plus, &BlowupConfig::default()).unwrap();
    let mut compared = 0;
    for k in inner.certified_interior() {
        if let Some(v) = outer.value_at(small.point(k)) {
            assert!(v <= inner.values()[k] + 1e-9, "{:?}: {v} > {}", small.point(k), inner.values()[k]);
            compared += 1;
        }
    }
    assert!(compared > 100);
    // Moderate Dirichlet levels stay below the blow-up solution. (At fixed h the
    // plain scheme has no finite limit as B → ∞, so large B are not comparable.)
    for b in [1.0, 5.0] {
        let f = solve_dirichlet(&p, &small, &constant(&small, b), 1e-10).unwrap();
        for k in inner.certified_interior() {
            assert!(f.values()[k] <= inner.values()[k], "B {b} node {k}");
        }
    }
}

#[test]
fn staircase_mode_agrees_with_cut_cells_to_first_order() {
    let p = quartic();
    let mut diffs = Vec::new();
    for h in [0.1, 0.05] {
        let dom = disk(h);
        let cut = solve_blowup(&p, &dom, Sign::Plus, &BlowupConfig::default()).unwrap().0;
        let cfg = BlowupConfig { boundary: BoundaryMode::Staircase, ..Default::default() };
        let stair = solve_blowup(&p, &dom, Sign::Plus, &cfg).unwrap().0;
        diffs.push(cut.value_at([0.0, 0.0]).unwrap() - stair.value_at([0.0, 0.0]).unwrap());
    }
    assert!(diffs[1].abs() < diffs[0].abs(), "{diffs:?}");
    assert!(diffs[1].abs() < 0.05, "{diffs:?}");
}

#[test]
fn swapping_labels_negates_the_signed_solution() {
    let p = quartic();
    let cfg = BlowupConfig::default();
    let (a, _) = solve_signed_blowup(&p, &signed_annulus(0.1, [Sign::Minus, Sign::Plus]), &cfg).unwrap();
    let (b, _) = solve_signed_blowup(&p, &signed_annulus(0.1, [Sign::Plus, Sign::Minus]), &cfg).unwrap();
    let ks = a.certified_interior();
    assert!(!ks.is_empty());
    for k in ks {
        let (u, v) = (a.values()[k], b.values()[k]);
        assert!((u + v).abs() < 1e-8 * (1.0 + u.abs()), "node {k}: {u} vs {v}");
    }
}

#[test]
fn signed_annulus_solution_increases_outward_and_meets_its_bounds() {
    let p = quartic();
    let dom = signed_annulus(0.05, [Sign::Minus, Sign::Plus]);
    let (f, _) = solve_signed_blowup(&p, &dom, &BlowupConfig::default()).unwrap();
    // Along the positive x-axis.
    let ray: Vec<f64> = f
        .certified_interior()
        .into_iter()
        .filter(|&k| dom.point(k)[1] == 0.0 && dom.point(k)[0] > 0.0)
        .map(|k| f.values()[k])
        .collect();
    assert!(ray.len() > 5);
    assert!(ray.windows(2).all(|w| w[1] > w[0]), "{ray:?}");
    assert!(ray[0] < 0.0 && ray[ray.len() - 1] > 0.0);
    let report = signed_bounds_check(&f, &p, &[-5.0, -2.0, 2.0, 5.0], None).unwrap();
    assert!(report.passed() && report.applicable(), "{report:?}");
}

#[test]
fn bound_checks_reject_bad_levels() {
    let p = quartic();
    let dom = disk(0.1);
    let f = solve_dirichlet(&p, &dom, &constant(&dom, 1.0), 1e-10).unwrap();
    assert!(decay_check(&f, &p, &[0.0], None).is_err());
    assert!(decay_check(&f, &p, &[-1.0], None).is_err());
    assert!(signed_bounds_check(&f, &p, &[0.0], None).is_err());
    let r = decay_check(&f, &p, &[1.0], Some(0.0)).unwrap();
    assert_eq!(r.slack, 0.0);
    assert!(r.passed());
}

#[test]
fn comparison_rejects_mismatched_grids() {
    let p = quartic();
    let (coarse, fine) = (disk(0.1), disk(0.05));
    let a = solve_dirichlet(&p, &coarse, &constant(&coarse, 1.0), 1e-10).unwrap();
    let b = solve_dirichlet(&p, &fine, &constant(&fine, 1.0), 1e-10).unwrap();
    assert!(comparison_check(&p, &coarse, &a, &b).is_err());
    assert!(comparison_check(&p, &fine, &a, &b).is_err());
}

#[test]
fn fields_validate_their_values() {
    let dom = Arc::new(disk(0.1));
    assert!(Field::from_values(dom.clone(), vec![0.0; 2]).is_err());
    let mut values = vec![1.0; dom.len()];
    values[dom.interior()[0]] = f64::INFINITY;
    assert!(matches!(Field::from_values(dom.clone(), values), Err(Error::NonFiniteData(_))));
    let f = Field::from_fn(dom.clone(), |x| x[0]).unwrap();
    assert_eq!(f.rows().len(), dom.interior().len());
    let outside = (0..dom.len()).find(|&k| dom.class(k) == NodeClass::Exterior).unwrap();
    assert!(f.values()[outside].is_nan() && f.get(outside).is_none());
    assert_eq!(f.max_difference(&f), Some(0.0));
}

#[test]
fn alpha_orbit_lies_above_the_planar_barrier_and_is_not_a_comparison_pair() {
    // α(|x|) is a subsolution and ζ a supersolution; they touch at the center, so
    // the boundary ordering needed for comparison fails.
    let p = quartic();
    let lambda = 1.0;
    let zeta = whole_space_barrier(&p, 2, lambda).unwrap();
    let alpha = make_orbit(&p, OrbitSpec::Alpha { lambda }, 1e-12).unwrap();
    let radius = 0.4 * zeta.r_domain().1.min(alpha.domain().1);
    let shape = ShapeSpec::Disk { center: [0.0, 0.0], radius };
    let dom = Arc::new(build_domain(shape, radius / 20.0, PartitionSpec::AllPlus).unwrap());
    let r = |x: Point| x[0].hypot(x[1]);
    let a = Field::from_fn(dom.clone(), |x| alpha.eval(r(x)).unwrap()).unwrap();
    let z = Field::from_fn(dom.clone(), |x| zeta.eval(r(x)).unwrap()).unwrap();
    for k in dom.interior() {
        assert!(a.get(*k).unwrap() >= z.get(*k).unwrap() - 1e-12);
    }
    let res = comparison_check(&p, &dom, &a, &z);
    assert!(matches!(res, Err(Error::PreconditionViolation(_))), "{res:?}");
}
