use blowup_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn quartic() -> Potential {
    Potential::power(4.0).unwrap()
}

/// Complete elliptic integral `K(1/√2) = Γ(1/4)²/(4√π)`.
fn k_lemniscate() -> f64 {
    let gamma_quarter = 3.625_609_908_221_908;
    gamma_quarter * gamma_quarter / (4.0 * std::f64::consts::PI.sqrt())
}

/// `∫₀^∞ ds/√(2((1+s)⁴ − 1))` by composite Simpson in `s = t²` on `[0, 1]`
/// plus the tail in `s = 1/σ²`, both integrands smooth after substitution.
fn c4_by_simpson() -> f64 {
    let head = |t: f64| {
        if t == 0.0 {
            // 2t/√(2(4t² + …)) → 1/√2.
            return 1.0 / 2f64.sqrt();
        }
        let s = t * t;
        2.0 * t / (2.0 * ((1.0 + s).powi(4) - 1.0)).sqrt()
    };
    let tail = |sigma: f64| {
        if sigma == 0.0 {
            return 0.0;
        }
        // s = σ^{-2}, ds = 2σ^{-3} dσ.
        let s = sigma.powi(-2);
        2.0 * sigma.powi(-3) / (2.0 * ((1.0 + s).powi(4) - 1.0)).sqrt()
    };
    simpson(head, 0.0, 1.0, 4000) + simpson(tail, 0.0, 1.0, 4000)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn quartic_halflength_matches_independent_oracles() {
    let c4 = blowup_halflength(&quartic(), 1.0, TOL).unwrap();
    assert!((c4 - k_lemniscate() / 2.0).abs() < 1e-12, "{c4}");
    assert!((c4 - c4_by_simpson()).abs() < 1e-9, "{c4} vs {}", c4_by_simpson());
    let c4_2 = blowup_halflength(&quartic(), 2.0, TOL).unwrap();
    assert!((c4_2 - c4 / 2.0).abs() < 1e-12);
    assert!(blowup_halflength(&quartic(), 10.0, TOL).unwrap() < c4);
    // Negative levels of an even potential have the same length.
    assert!((blowup_halflength(&quartic(), -1.0, TOL).unwrap() - c4).abs() < 1e-13);
}

#[test]
fn quartic_beta_lengths() {
    let (m1, p1) = beta_halflengths(&quartic(), 1.0, TOL).unwrap();
    assert_eq!(m1, p1);
    // l⁺(1) = ∫₀^∞ ds/√(2(s⁴ + 1)) = K(1/√2)/√2.
    assert!((p1 - k_lemniscate() / 2f64.sqrt()).abs() < 1e-12, "{p1}");
    let (_, p4) = beta_halflengths(&quartic(), 4.0, TOL).unwrap();
    assert!(p4 < p1);
    // l±(h) = h^{-1/4} l±(1) for the quartic.
    assert!((p4 - p1 / 4f64.powf(0.25)).abs() < 1e-12);
}

#[test]
fn inversion_of_halflength() {
    let p = quartic();
    let c4 = k_lemniscate() / 2.0;
    assert!((invert_halflength(&p, c4, Sign::Plus, TOL).unwrap() - 1.0).abs() < 1e-10);
    assert!((invert_halflength(&p, c4 / 2.0, Sign::Plus, TOL).unwrap() - 2.0).abs() < 1e-10);
    for p in [quartic(), Potential::power(3.0).unwrap(), Potential::cosh()] {
        for l0 in [0.5, 1.0, 3.0, -0.5, -3.0] {
            let l = blowup_halflength(&p, l0, TOL).unwrap();
            let back = invert_halflength(&p, l, Sign::of(l0).unwrap(), TOL).unwrap();
            assert!((back - l0).abs() < 1e-9 * l0.abs(), "{} {l0} -> {back}", p.id());
        }
    }
}

#[test]
fn gamma_orbits_match_closed_forms() {
    // Powers: γ = A x^{-q}, q = 2/(α−2), A^{α−2} = q(q+1)/α.
    for alpha in [3.0, 4.0, 6.0] {
        let p = Potential::power(alpha).unwrap();
        let q = 2.0 / (alpha - 2.0);
        let a = (q * (q + 1.0) / alpha).powf(1.0 / (alpha - 2.0));
        let orbit = make_orbit(&p, OrbitSpec::Gamma { sign: Sign::Plus }, TOL).unwrap();
        let mirror = make_orbit(&p, OrbitSpec::Gamma { sign: Sign::Minus }, TOL).unwrap();
        for x in [0.1f64, 0.5, 1.0, 3.0, 20.0] {
            let exact = a * x.powf(-q);
            let u = orbit.eval(x).unwrap();
            assert!((u - exact).abs() <= 1e-10 * exact, "alpha {alpha} x {x}: {u} vs {exact}");
            assert!((orbit.eval_deriv(x).unwrap() + q * exact / x).abs() <= 1e-9 * q * exact / x);
            assert_eq!(mirror.eval(x).unwrap(), -u);
        }
    }
    // cosh u − 1 = 2 sinh²(u/2) gives tanh(u/4) = e^{-x}.
    let orbit = make_orbit(&Potential::cosh(), OrbitSpec::Gamma { sign: Sign::Plus }, TOL).unwrap();
    for x in [0.05f64, 0.5, 1.0, 5.0, 30.0] {
        let exact = 4.0 * (-x).exp().atanh();
        let u = orbit.eval(x).unwrap();
        assert!((u - exact).abs() <= 1e-10 * exact, "x {x}: {u} vs {exact}");
    }
    assert_eq!(orbit.domain(), (0.0, f64::INFINITY));
    assert!(orbit.eval(1e-6).unwrap() > 10.0);
    assert!(orbit.eval(40.0).unwrap() < 1e-15);
}

#[test]
fn alpha_and_beta_initial_conditions() {
    for p in [quartic(), Potential::cosh(), Potential::power(3.0).unwrap()] {
        for lambda in [0.3, 2.0, -1.5] {
            let o = make_orbit(&p, OrbitSpec::Alpha { lambda }, TOL).unwrap();
            assert_eq!(o.eval(0.0).unwrap(), lambda);
            assert_eq!(o.eval_deriv(0.0).unwrap(), 0.0);
            let l = blowup_halflength(&p, lambda, TOL).unwrap();
            assert_eq!(o.domain(), (-l, l));
            let x = 0.3 * l;
            assert!((o.eval(x).unwrap() - o.eval(-x).unwrap()).abs() < 1e-13 * lambda.abs().max(1.0));
            assert!((o.hamiltonian() + p.w(lambda)).abs() < 1e-15 * p.w(lambda).max(1.0));
        }
        let o = make_orbit(&p, OrbitSpec::Beta { h: 0.7 }, TOL).unwrap();
        assert_eq!(o.eval(0.0).unwrap(), 0.0);
        assert!((o.eval_deriv(0.0).unwrap() - 1.4f64.sqrt()).abs() < 1e-14);
        assert_eq!(o.hamiltonian(), 0.7);
        let (lo, hi) = o.domain();
        let xs: Vec<f64> = (1..100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
        let us: Vec<f64> = xs.iter().map(|&x| o.eval(x).unwrap()).collect();
        assert!(us.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn evaluation_outside_domain_is_rejected() {
    let o = make_orbit(&quartic(), OrbitSpec::Alpha { lambda: 1.0 }, TOL).unwrap();
    let (_, hi) = o.domain();
    assert!(matches!(o.eval(hi), Err(Error::DomainError { .. })));
    assert!(matches!(o.eval(f64::NAN), Err(Error::DomainError { .. })));
    let g = make_orbit(&quartic(), OrbitSpec::Gamma { sign: Sign::Plus }, TOL).unwrap();
    assert!(matches!(g.eval(0.0), Err(Error::DomainError { .. })));
    assert!(make_orbit(&quartic(), OrbitSpec::Alpha { lambda: 0.0 }, TOL).is_err());
    assert!(make_orbit(&quartic(), OrbitSpec::Beta { h: -1.0 }, TOL).is_err());
}

#[test]
fn second_differences_match_the_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [quartic(), Potential::cosh()] {
        for spec in
            [OrbitSpec::Alpha { lambda: 0.8 }, OrbitSpec::Beta { h: 1.5 }, OrbitSpec::Gamma { sign: Sign::Minus }]
        {
            let o = make_orbit(&p, spec, 1e-13).unwrap();
            let (lo, hi) = o.domain();
            let (lo, hi) = (lo.max(0.05), hi.min(5.0));
            for _ in 0..10 {
                let x = lo + (hi - lo) * rng.gen_range(0.2..0.8);
                let residual = |h: f64| {
                    let d2 = (o.eval(x + h).unwrap() - 2.0 * o.eval(x).unwrap() + o.eval(x - h).unwrap()) / (h * h);
                    (d2 - p.dw(o.eval(x).unwrap())).abs()
                };
                let (r1, r2) = (residual(1e-2), residual(5e-3));
                let scale = 1.0 + p.dw(o.eval(x).unwrap()).abs();
                assert!(r1 < 1e-2 * scale, "{} {spec:?} x {x}: {r1}", p.id());
                assert!(r2 < 0.3 * r1 || r2 < 1e-6 * scale, "{} {spec:?} x {x}: {r1} -> {r2}", p.id());
            }
        }
    }
}
