mod common;

use rand::Rng;
use sbv_rigidity::fields::{griffith_energy, relaxed_density, relaxed_energy};

#[test]
fn relaxed_energy_is_below_griffith() {
    let mut r = common::rng(31);
    let mut cut = 0;
    for _ in 0..100 {
        let n = [16, 32, 64][r.gen_range(0..3)];
        let f = common::random_field(&mut r, n);
        let eps = 10f64.powf(r.gen_range(-6.0..-1.0));
        let rho = r.gen_range(0.01..0.5);
        let sharp = griffith_energy(&f, eps).unwrap();
        let relaxed = relaxed_energy(&f, eps, rho, None).unwrap();
        assert_eq!(relaxed.bulk, sharp.bulk);
        assert_eq!(relaxed.surface, sharp.surface);
        assert!(relaxed.relaxed_total() <= sharp.total());
        if relaxed.relaxed_total() < sharp.total() {
            cut += 1;
        }
        let region = common::random_region(&mut r, n * n, 0.6);
        let part = relaxed_energy(&f, eps, rho, Some(&region)).unwrap();
        assert!(part.relaxed_surface.unwrap() <= part.surface);
    }
    assert!(cut > 0, "no instance had a sub-threshold opening");
}

#[test]
fn relaxed_density_caps_at_one() {
    let (eps, rho): (f64, f64) = (1e-4, 0.1);
    assert_eq!(relaxed_density(1.0, eps, rho), 1.0);
    assert_eq!(relaxed_density(0.0, eps, rho), 0.0);
    let knee = eps.sqrt() * rho;
    assert!((relaxed_density(0.5 * knee, eps, rho) - 0.5).abs() < 1e-15);
}
