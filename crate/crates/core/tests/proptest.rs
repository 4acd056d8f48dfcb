use blowup_core::*;
use proptest::prelude::*;

fn potential(idx: usize) -> Potential {
    match idx {
        0 => Potential::power(3.0).unwrap(),
        1 => Potential::power(4.0).unwrap(),
        2 => Potential::power(6.0).unwrap(),
        _ => Potential::cosh(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potentials_are_even_convex_and_nonnegative(idx in 0usize..4, t in -30.0f64..30.0, s in -30.0f64..30.0) {
        let p = potential(idx);
        prop_assert!(p.w(t) >= 0.0);
        prop_assert_eq!(p.w(t), p.w(-t));
        prop_assert_eq!(p.dw(t), -p.dw(-t));
        // Convexity: W lies above its tangent.
        prop_assert!(p.w(s) >= p.w(t) + p.dw(t) * (s - t) - 1e-12 * (1.0 + p.w(s).abs()));
    }

    #[test]
    fn increments_match_differences(idx in 0usize..4, x in -5.0f64..5.0, d in -1.0f64..1.0) {
        let p = potential(idx);
        let exact = p.w(x + d) - p.w(x);
        prop_assert!((p.increment(x, d) - exact).abs() <= 1e-12 * (1.0 + p.w(x).max(p.w(x + d))));
    }

    #[test]
    fn halflength_is_decreasing_in_the_level(idx in 0usize..4, a in 0.05f64..20.0, b in 0.05f64..20.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let p = potential(idx);
        let (lo, hi) = (a.min(b), a.max(b));
        let (l_lo, l_hi) = (blowup_halflength(&p, lo, 1e-12).unwrap(), blowup_halflength(&p, hi, 1e-12).unwrap());
        prop_assert!(l_hi < l_lo, "{} l({lo}) = {l_lo}, l({hi}) = {l_hi}", p.id());
    }

    #[test]
    fn quartic_halflength_scales_inversely(lambda in 0.01f64..1000.0) {
        let p = potential(1);
        let base = blowup_halflength(&p, 1.0, 1e-13).unwrap();
        let l = blowup_halflength(&p, lambda, 1e-13).unwrap();
        prop_assert!((l * lambda - base).abs() < 1e-11 * base);
    }

    #[test]
    fn inversion_round_trips(idx in 0usize..4, l in 0.05f64..5.0, negative in any::<bool>()) {
        let p = potential(idx);
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        let lambda = invert_halflength(&p, l, sign, 1e-13).unwrap();
        prop_assert_eq!(lambda.signum(), sign.value());
        let back = blowup_halflength(&p, lambda, 1e-13).unwrap();
        prop_assert!((back - l).abs() < 1e-9 * l, "{} l {l} -> λ {lambda} -> {back}", p.id());
    }

    #[test]
    fn alpha_orbits_conserve_energy(idx in 0usize..4, lambda in 0.1f64..5.0, frac in -0.95f64..0.95) {
        let p = potential(idx);
        let o = make_orbit(&p, OrbitSpec::Alpha { lambda }, 1e-12).unwrap();
        let x = frac * o.domain().1;
        let (u, du) = o.eval_with_deriv(x).unwrap();
        prop_assert!(u >= lambda);
        let h = 0.5 * du * du - p.w(u);
        prop_assert!((h - o.hamiltonian()).abs() < 1e-8 * (1.0 + p.w(u)), "{} x {x}: {h}", p.id());
    }

    #[test]
    fn disk_distances_are_lipschitz(r in 0.5f64..2.0, cx in -1.0f64..1.0, h in 0.05f64..0.2) {
        let dom = build_domain(ShapeSpec::Disk { center: [cx, 0.0], radius: r }, h, PartitionSpec::AllPlus).unwrap();
        let d = dom.dist_boundary();
        for &k in dom.interior() {
            let [x, y] = dom.point(k);
            // Boundary nodes lie within one cell of the circle.
            let exact = r - (x - cx).hypot(y);
            prop_assert!((d[k] - exact).abs() <= h + 1e-12);
            for dx in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
                let j = dom.node_at([x + dx[0], y + dx[1]]).unwrap();
                prop_assert!((d[k] - d[j]).abs() <= h + 1e-12);
            }
        }
    }
}
