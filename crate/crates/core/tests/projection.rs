mod common;

use rand::Rng;
use sbv_rigidity::local::{evaluate, inner, project_infinitesimal_rigid, projection_residual, InfinitesimalRigidMotion};
use sbv_rigidity::{DeformationField, Vec2};

const REL: f64 = 1e-10;

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= REL * scale.max(1.0)
}

fn same_motion(p: &InfinitesimalRigidMotion<f64>, q: &InfinitesimalRigidMotion<f64>, scale: f64) -> bool {
    close(p.a, q.a, scale) && close(p.c.x, q.c.x, scale) && close(p.c.y, q.c.y, scale)
}

fn combine(u: &DeformationField, v: &DeformationField, alpha: f64, beta: f64) -> DeformationField {
    let corners = u
        .corners
        .iter()
        .zip(&v.corners)
        .map(|(a, b)| std::array::from_fn(|s| a[s].scale(alpha) + b[s].scale(beta)))
        .collect();
    DeformationField::new(u.lattice, corners, u.active.clone())
}

fn instances() -> Vec<(DeformationField, DeformationField, Vec<bool>)> {
    let mut r = common::rng(11);
    (0..50)
        .map(|_| {
            let n = [8, 16, 32][r.gen_range(0..3)];
            let u = common::random_field(&mut r, n);
            let v = common::random_field(&mut r, n);
            let v = DeformationField::new(v.lattice, v.corners, u.active.clone());
            let fill = r.gen_range(0.05..1.0);
            let region = common::random_region(&mut r, n * n, fill);
            (u, v, region)
        })
        .collect()
}

#[test]
fn projection_is_idempotent() {
    for (u, _, region) in instances() {
        let p = project_infinitesimal_rigid(&u, &region);
        let pp = project_infinitesimal_rigid(&evaluate(&u, &p), &region);
        assert!(same_motion(&p, &pp, p.c.norm() + p.a.abs()), "{p:?} vs {pp:?}");
    }
}

#[test]
fn projection_is_linear() {
    let mut r = common::rng(12);
    for (u, v, region) in instances() {
        let (alpha, beta) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let pu = project_infinitesimal_rigid(&u, &region);
        let pv = project_infinitesimal_rigid(&v, &region);
        let pw = project_infinitesimal_rigid(&combine(&u, &v, alpha, beta), &region);
        let expect = InfinitesimalRigidMotion { a: alpha * pu.a + beta * pv.a, c: pu.c.scale(alpha) + pv.c.scale(beta) };
        let scale = 3.0 * (pu.c.norm() + pv.c.norm() + pu.a.abs() + pv.a.abs());
        assert!(same_motion(&pw, &expect, scale), "{pw:?} vs {expect:?}");
    }
}

#[test]
fn pythagoras_splits_the_norm() {
    for (u, _, region) in instances() {
        let p = project_infinitesimal_rigid(&u, &region);
        let pu = evaluate(&u, &p);
        let total = inner(&u, &u, &region);
        let split = inner(&pu, &pu, &region) + projection_residual(&u, &region, &p);
        assert!((total - split).abs() <= REL * total, "{total} vs {split}");
        let cross = inner(&pu, &u.difference(&pu), &region);
        assert!(cross.abs() <= REL * total, "cross term {cross}");
    }
}

#[test]
fn kernel_is_reproduced() {
    let mut r = common::rng(13);
    for (u, _, region) in instances() {
        let p0 = InfinitesimalRigidMotion { a: r.gen_range(-2.0..2.0), c: Vec2::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)) };
        let k = evaluate(&u, &p0);
        let p = project_infinitesimal_rigid(&k, &region);
        assert!(projection_residual(&k, &region, &p) <= 1e-12);
        assert!((p.a - p0.a).abs() < 1e-10 && (p.c - p0.c).norm() < 1e-10);
    }
}
