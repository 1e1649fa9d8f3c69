mod common;

use proptest::prelude::*;
use sbv_rigidity::engine::{EngineConfig, Rigid};
use sbv_rigidity::grid::{measure_hausdorff, measure_infty, measure_star, Edge, StarMeasureConfig};
use sbv_rigidity::harness::{gen_piecewise_rigid, Ambient};
use sbv_rigidity::local::fit_points;
use sbv_rigidity::partition::decompose;
use sbv_rigidity::{tree_sum, Mat2, RigidMotion, Vec2};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_invariants(seed in 0u64..10_000, pieces in 1usize..5) {
        let n = 64;
        let pw = gen_piecewise_rigid(seed, pieces, Ambient::UNIT, 1.0 / n as f64).unwrap();
        let d = decompose(&Rigid, &pw.field, &EngineConfig::default()).unwrap();
        let labels = &d.partition.labels;

        // Labels partition Ω_ρ into pieces 1..=m.
        for c in 0..n * n {
            let l = labels.labels[c];
            prop_assert_eq!(l == 0, !labels.omega_rho[c]);
            prop_assert!(l as usize <= labels.pieces);
        }
        for id in 1..=labels.pieces as u32 {
            prop_assert!(!labels.cells_of(id).is_empty());
        }

        // ŷ = u + M bit for bit on Ω_ρ.
        for c in (0..n * n).filter(|&c| labels.omega_rho[c]) {
            let m = &d.partition.motions[labels.labels[c] as usize - 1];
            let xs = d.u.corner_positions(c);
            for s in 0..4 {
                prop_assert_eq!(d.yhat.corners[c][s], d.u.corners[c][s] + m.apply(xs[s]));
            }
        }

        // Σ full perimeters = 2·H¹(S) + interface with the excluded set.
        let h = pw.field.h();
        let full: f64 = d.partition.pieces.iter().map(|p| p.perimeter_full).sum();
        let s_len = d.separator.edges.len() as f64 * h;
        let om = &labels.omega_rho;
        let outside = (0..Edge::count(n, n))
            .filter(|&e| {
                let (a, b) = Edge::from_id(e, n, n).cells(n, n);
                a.map_or(false, |a| om[a]) != b.map_or(false, |b| om[b])
            })
            .count() as f64 * h;
        prop_assert!((full - 2.0 * s_len - outside).abs() < 1e-9);
        prop_assert!(d.report.all_pass(), "{:?}", d.report.budget_flags);
    }

    #[test]
    fn procrustes_recovers_and_is_optimal(
        theta in -3.1f64..3.1,
        cx in -2.0f64..2.0,
        cy in -2.0f64..2.0,
        noise in 0.0f64..0.05,
        seed in 0u64..1000,
    ) {
        let mut r = common::rng(seed);
        let m0 = RigidMotion::from_angle(theta, Vec2::new(cx, cy));
        let pts: Vec<(Vec2, Vec2)> = (0..40)
            .map(|_| {
                let x = Vec2::new(rand::Rng::gen_range(&mut r, -1.0..1.0), rand::Rng::gen_range(&mut r, -1.0..1.0));
                let e = Vec2::new(rand::Rng::gen_range(&mut r, -noise..=noise), rand::Rng::gen_range(&mut r, -noise..=noise));
                (x, m0.apply(x) + e)
            })
            .collect();
        let m = fit_points(&pts).unwrap();
        prop_assert!(m.r.is_rotation(1e-12));
        let cost = |m: &RigidMotion| pts.iter().map(|(x, y)| (*y - m.apply(*x)).norm_sq()).sum::<f64>();
        let best = cost(&m);
        prop_assert!(best <= cost(&m0) + 1e-12);
        for d in [-1e-3, 1e-3] {
            let rot = Mat2::rotation(m.r.rotation_angle() + d);
            let xbar = pts.iter().fold(Vec2::zero(), |a, p| a + p.0).scale(1.0 / 40.0);
            let ybar = pts.iter().fold(Vec2::zero(), |a, p| a + p.1).scale(1.0 / 40.0);
            let other = RigidMotion { r: rot, c: ybar - rot * xbar };
            prop_assert!(best <= cost(&other));
        }
        if noise == 0.0 {
            prop_assert!(best < 1e-20);
        }
    }

    #[test]
    fn star_measure_is_a_convex_combination(holes in 1usize..12, seed in 0u64..1000, hs in 0.01f64..0.99) {
        let mut r = common::rng(seed);
        let w = common::random_set(&mut r, 20, holes);
        let cfg = StarMeasureConfig::new(hs).unwrap();
        for c in w.boundary_components() {
            let hd = measure_hausdorff(&w.lattice, &c.theta);
            let inf = measure_infty(&w.lattice, &c.gamma);
            let star = measure_star(&w.lattice, &c, cfg);
            prop_assert!(star <= hd.max(inf) + 1e-12 && star >= hd.min(inf) - 1e-12);
            prop_assert!(c.theta.iter().all(|e| c.gamma.contains(e)));
        }
    }

    #[test]
    fn edge_ids_round_trip(nx in 1usize..40, ny in 1usize..40) {
        for id in 0..Edge::count(nx, ny) {
            let e = Edge::from_id(id, nx, ny);
            prop_assert_eq!(e.id(nx, ny), id);
            let (a, b) = e.cells(nx, ny);
            prop_assert!(a.is_some() || b.is_some());
        }
    }

    #[test]
    fn tree_sum_is_close_to_the_naive_sum(v in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((tree_sum(&v) - naive).abs() <= 1e-12 * scale);
    }
}
