use std::collections::VecDeque;

use blowup_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk(h: f64) -> GridDomain {
    build_domain(ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, h, PartitionSpec::AllPlus).unwrap()
}

fn annulus(h: f64) -> GridDomain {
    let shape = ShapeSpec::Annulus { center: [0.0, 0.0], inner: 1.0, outer: 2.0 };
    build_domain(shape, h, PartitionSpec::Components(vec![Sign::Minus, Sign::Plus])).unwrap()
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Grid (4-)neighbors of node `k`.
fn neighbors(dom: &GridDomain, k: usize) -> Vec<usize> {
    let (nx, ny) = dom.extent();
    let (i, j) = (k % nx, k / nx);
    let mut out = Vec::new();
    if i > 0 {
        out.push(k - 1);
    }
    if i + 1 < nx {
        out.push(k + 1);
    }
    if j > 0 {
        out.push(k - nx);
    }
    if j + 1 < ny {
        out.push(k + nx);
    }
    out
}

#[test]
fn interval_counts() {
    let dom = build_domain(ShapeSpec::Interval { a: -1.0, b: 1.0 }, 0.01, PartitionSpec::AllPlus).unwrap();
    assert_eq!(dom.interior().len(), 199);
    assert_eq!(dom.boundary_nodes().len(), 2);
    assert_eq!(dom.dim(), 1);
}

#[test]
fn annulus_rings_carry_disjoint_labels() {
    let dom = annulus(0.05);
    for k in dom.boundary_nodes() {
        let r = dom.point(k)[0].hypot(dom.point(k)[1]);
        match dom.class(k) {
            NodeClass::BoundaryMinus => assert!(r < 1.0 + 1e-12, "{r}"),
            NodeClass::BoundaryPlus => assert!(r > 2.0 - 1e-12, "{r}"),
            c => panic!("{c:?}"),
        }
    }
    assert!(dom.has_label(Sign::Plus) && dom.has_label(Sign::Minus));
    for k in 0..dom.len() {
        if dom.class(k) != NodeClass::Exterior {
            assert_eq!(dom.dist_boundary()[k], dom.dist_plus()[k].min(dom.dist_minus()[k]));
        }
    }
}

#[test]
fn boundary_nodes_touch_the_interior_and_every_interior_node_reaches_one() {
    for dom in [
        disk(0.05),
        annulus(0.07),
        build_domain(ShapeSpec::LShape { half_width: 1.0 }, 0.05, PartitionSpec::AllPlus).unwrap(),
    ] {
        for k in dom.boundary_nodes() {
            assert!(neighbors(&dom, k).iter().any(|&j| dom.class(j) == NodeClass::Interior));
        }
        for &k in dom.interior() {
            assert!(neighbors(&dom, k).iter().all(|&j| dom.class(j) != NodeClass::Exterior));
        }
        // Breadth-first search from the boundary reaches every interior node.
        let mut seen = vec![false; dom.len()];
        let mut queue: VecDeque<usize> = dom.boundary_nodes().into();
        for &k in &queue {
            seen[k] = true;
        }
        while let Some(k) = queue.pop_front() {
            for j in neighbors(&dom, k) {
                if !seen[j] && dom.class(j) == NodeClass::Interior {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        assert!(dom.interior().iter().all(|&k| seen[k]));
    }
}

#[test]
fn disk_center_distance() {
    let dom = disk(0.05);
    let c = dom.node_at([0.0, 0.0]).unwrap();
    assert!((dom.dist_boundary()[c] - 1.0).abs() <= 0.05);
    // Brute force over the boundary nodes.
    let brute = dom.boundary_nodes().iter().map(|&k| dist(dom.point(k), [0.0, 0.0])).fold(f64::INFINITY, f64::min);
    let field = distance_field(&dom, Target::Boundary).unwrap();
    assert!((field[c] - brute).abs() < 1e-12);
    assert!((field[c] - 1.0).abs() <= 0.05);
}

#[test]
fn distance_field_basics() {
    let dom = disk(0.1);
    let field = distance_field(&dom, Target::Boundary).unwrap();
    for k in dom.boundary_nodes() {
        assert_eq!(field[k], 0.0);
        for j in neighbors(&dom, k) {
            if dom.class(j) == NodeClass::Interior {
                assert!(field[j] <= 0.1 + 1e-12);
            }
        }
    }
    let all_plus = disk(0.1);
    assert!(matches!(distance_field(&all_plus, Target::Minus), Err(Error::EmptyTarget)));
}

#[test]
fn distances_are_one_lipschitz() {
    let dom = annulus(0.05);
    let nodes: Vec<usize> = (0..dom.len()).filter(|&k| dom.class(k) != NodeClass::Exterior).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (a, b) = (nodes[rng.gen_range(0..nodes.len())], nodes[rng.gen_range(0..nodes.len())]);
        let d = dist(dom.point(a), dom.point(b));
        for f in [dom.dist_boundary(), dom.dist_plus(), dom.dist_minus()] {
            assert!((f[a] - f[b]).abs() <= d + 1e-12);
        }
    }
}

#[test]
fn refinement_consistency() {
    let (coarse, fine) = (disk(0.1), disk(0.05));
    for &k in coarse.interior() {
        let x = coarse.point(k);
        let j = fine.node_at(x).unwrap();
        assert!(dist(fine.point(j), x) < 1e-9);
        assert!((coarse.dist_boundary()[k] - fine.dist_boundary()[j]).abs() <= 0.1 + 1e-12);
    }
}

#[test]
fn label_and_degeneracy_errors() {
    let shape = ShapeSpec::Annulus { center: [0.0, 0.0], inner: 1.0, outer: 2.0 };
    let labels = PartitionSpec::Components(vec![Sign::Minus]);
    assert!(matches!(build_domain(shape, 0.1, labels), Err(Error::LabelError(_))));
    let tiny = ShapeSpec::Annulus { center: [0.0, 0.0], inner: 0.01, outer: 0.02 };
    assert!(matches!(build_domain(tiny, 0.5, PartitionSpec::AllPlus), Err(Error::DegenerateDomain(_))));
    assert!(build_domain(ShapeSpec::Interval { a: 1.0, b: -1.0 }, 0.1, PartitionSpec::AllPlus).is_err());
    assert!(build_domain(ShapeSpec::Interval { a: -1.0, b: 1.0 }, 0.0, PartitionSpec::AllPlus).is_err());
}

#[test]
fn exterior_disk_records_truncation() {
    let shape = ShapeSpec::ExteriorDisk { center: [0.0, 0.0], radius: 1.0, half_width: 3.0 };
    let dom = build_domain(shape, 0.1, PartitionSpec::AllPlus).unwrap();
    assert_eq!(dom.truncation_radius(), Some(3.0));
    let truncated: Vec<usize> = (0..dom.len()).filter(|&k| dom.is_truncation(k)).collect();
    assert!(!truncated.is_empty());
    for k in truncated {
        assert!(dom.point(k)[0].hypot(dom.point(k)[1]) >= 3.0 - 1e-12);
    }
    let wider = dom.with_truncation(4.5).unwrap();
    assert_eq!(wider.truncation_radius(), Some(4.5));
    let mask = wider.mask();
    assert_eq!(mask.rows.len(), mask.ny);
    assert!(mask.rows.iter().any(|r| r.contains('t')) && mask.rows.iter().any(|r| r.contains('+')));
    let json = serde_json::to_string(&mask).unwrap();
    let back: DomainMask = serde_json::from_str(&json).unwrap();
    assert_eq!(back, mask);
}

#[test]
fn shape_specs_round_trip_through_json() {
    let shape = ShapeSpec::Annulus { center: [0.5, -0.5], inner: 1.0, outer: 2.0 };
    let json = serde_json::to_string(&shape).unwrap();
    assert!(json.contains("\"shape\":\"annulus\""));
    let back: ShapeSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), json);
    let labels: PartitionSpec = serde_json::from_str(r#"{"kind":"components","labels":["minus","plus"]}"#).unwrap();
    assert!(matches!(labels, PartitionSpec::Components(ref v) if v == &[Sign::Minus, Sign::Plus]));
}

#[test]
fn custom_shape_from_signed_distance() {
    let sdf = |x: Point| x[0].abs().max(x[1].abs()) - 0.5;
    let shape = ShapeSpec::Custom(CustomShape {
        name: "square".into(),
        sdf: std::sync::Arc::new(sdf),
        bbox: [-1.0, 1.0, -1.0, 1.0],
    });
    let dom = build_domain(shape, 0.1, PartitionSpec::AllPlus).unwrap();
    // Nodes strictly inside |x|, |y| < 0.5 on a grid through the origin: 9 × 9.
    assert_eq!(dom.interior().len(), 81);
}
