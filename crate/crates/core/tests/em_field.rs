use approx::assert_abs_diff_eq;
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use surfspin::checks::random_surface_gauge;
use surfspin::em_field::presets::{cylinder_mixed, sphere_uniform, torus_mixed};
use surfspin::em_field::{
    from_cartesian, gauge_phase, gauge_transform, lorentz_gauge_residual, magnetic_field_at, magnetic_field_cartesian,
    thin_layer_gauge,
};
use surfspin::geometry::{Cylinder, Sphere, Torus};
use surfspin::*;

fn diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    (Vector3::from(a) - Vector3::from(b)).norm()
}

#[test]
fn constant_gauge_is_a_global_phase() {
    let f = cylinder_mixed(1.0, 0.7, 0.3);
    let g = gauge_transform(&f, &GaugeFunction::constant(2.5));
    let p1 = gauge_phase(&GaugeFunction::constant(2.5), [0.1, 0.2, 0.0], 1.0, 1.0);
    for q in [[0.1, 0.2, 0.0], [2.0, -1.0, 0.05], [5.0, 0.4, -0.02]] {
        assert_eq!(diff(f.vector_potential(q), g.vector_potential(q)), 0.0);
        let p = gauge_phase(&GaugeFunction::constant(2.5), q, 1.0, 1.0);
        assert_abs_diff_eq!((p - p1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-15);
    }
    assert_abs_diff_eq!((p1 - Complex64::from_polar(1.0, -2.5)).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn cylinder_azimuthal_potential_can_be_removed() {
    let (r, b0) = (1.3, 0.8);
    let f = cylinder_mixed(r, b0, 0.4);
    let gamma = GaugeFunction::new("theta", move |q| -q[0] * 0.5 * r * r * b0);
    let g = gauge_transform(&f, &gamma);
    for q in [[0.3, 0.1, 0.0], [4.0, 1.2, 0.0]] {
        assert_abs_diff_eq!(g.vector_potential(q)[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.vector_potential(q)[1], f.vector_potential(q)[1], epsilon = 1e-12);
    }
}

#[test]
fn gauge_round_trip() {
    let f = torus_mixed(3.0, 1.0, 0.5, 0.2);
    let gamma = GaugeFunction::from_expr("sin(q1) * cos(2 * q2) + q3 * q1").unwrap();
    let back = gauge_transform(&gauge_transform(&f, &gamma), &gamma.negated());
    for q in [[0.3, 0.1, 0.0], [4.0, 1.2, 0.01], [1.0, 5.5, -0.02]] {
        assert!(diff(back.vector_potential(q), f.vector_potential(q)) < 1e-12);
        assert!(back.total_gauge(q).abs() < 1e-15);
    }
}

#[test]
fn thin_layer_gauge_examples() {
    let flat = EMField::from_expressions(["q2", "-q1", "0"], "0").unwrap();
    let g = thin_layer_gauge(&flat).unwrap();
    for q in [[0.2, 0.3, 0.1], [1.0, -0.5, -0.2]] {
        assert!(diff(g.vector_potential(q), flat.vector_potential(q)) < 1e-9);
    }

    let constant = EMField::from_expressions(["0", "0", "1.5"], "0").unwrap();
    let g = thin_layer_gauge(&constant).unwrap();
    for q in [[0.2, 0.3, 0.1], [1.0, -0.5, -0.2]] {
        assert_abs_diff_eq!(g.total_gauge(q), -1.5 * q[2], epsilon = 1e-12);
        assert_abs_diff_eq!(g.vector_potential(q)[2], 0.0, epsilon = 1e-12);
    }

    let linear = EMField::from_expressions(["cos(q2)", "q1", "q3"], "0").unwrap();
    let g = thin_layer_gauge(&linear).unwrap();
    for q in [[0.2, 0.3, 0.1], [1.0, -0.5, -0.2]] {
        assert_abs_diff_eq!(g.total_gauge(q), -0.5 * q[2] * q[2], epsilon = 1e-12);
        assert_abs_diff_eq!(g.vector_potential(q)[2], 0.0, epsilon = 1e-12);
        let surface = [q[0], q[1], 0.0];
        assert!(diff(g.vector_potential(surface), linear.vector_potential(surface)) < 1e-9);
    }
}

#[test]
fn sphere_preset_is_a_uniform_polar_field() {
    let b = 0.9;
    let s = Sphere::new(1.0).unwrap();
    let f = sphere_uniform(1.0, b);
    for q in [[0.7, 0.2, 0.0], [2.0, 4.0, 0.05], [1.4, 2.2, -0.03]] {
        let bc = magnetic_field_cartesian(&f, &s, q).unwrap();
        assert!((bc - Vector3::new(0.0, 0.0, b)).norm() < 1e-7, "{bc:?}");
    }
}

#[test]
fn zero_potential_has_zero_curl() {
    let s = Torus::new(3.0, 1.0).unwrap();
    let xi = magnetic_field_at(&EMField::zero(), &s, [1.0, 2.0, 0.0]).unwrap();
    assert_eq!(xi.norm(), 0.0);
}

#[test]
fn cylinder_preset_field_components() {
    let (b0, b1) = (0.6, -0.4);
    let c = Cylinder::new(1.0, 2.0, true).unwrap();
    let f = cylinder_mixed(1.0, b0, b1);
    for q in [[0.0, 0.2, 0.0], [2.5, 1.0, 0.04], [5.0, -0.6, -0.03]] {
        let bc = magnetic_field_cartesian(&f, &c, q).unwrap();
        // The chart axis is y; the B1 part points along the theta = 0 direction.
        assert!((bc - Vector3::new(0.0, b0, b1)).norm() < 1e-7, "{bc:?}");
    }
}

#[test]
fn cartesian_potentials_reproduce_their_curl() {
    let t: Arc<dyn SurfaceChart> = Arc::new(Torus::new(3.0, 1.0).unwrap());
    let b = Vector3::new(0.3, -0.2, 0.5);
    let f = from_cartesian(t.clone(), "uniform", move |x| 0.5 * b.cross(&x));
    for q in [[0.4, 1.0, 0.0], [3.0, 5.0, 0.05]] {
        assert!((magnetic_field_cartesian(&f, t.as_ref(), q).unwrap() - b).norm() < 1e-7);
    }
}

#[test]
fn lorentz_gauge_examples() {
    let s = Sphere::new(1.0).unwrap();
    for q in [[0.5, 0.1], [2.0, 3.0]] {
        assert!(lorentz_gauge_residual(&sphere_uniform(1.0, 1.3), &s, q[0], q[1]).unwrap().abs() < 1e-8);
        assert_eq!(lorentz_gauge_residual(&EMField::zero(), &s, q[0], q[1]).unwrap(), 0.0);
    }
    let r = 1.5;
    let c = Cylinder::new(r, 2.0, true).unwrap();
    let f = EMField::from_expressions(["sin(q1)", "0", "0"], "0").unwrap();
    for th in [0.3, 1.9, 4.4] {
        let v = lorentz_gauge_residual(&f, &c, th, 0.5).unwrap();
        assert_abs_diff_eq!(v, th.cos() / (r * r), epsilon = 1e-8);
    }
}

#[test]
fn expression_errors_are_reported() {
    assert!(EMField::from_expressions(["q4", "0", "0"], "0").is_err());
    assert!(GaugeFunction::from_expr("sin q1").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn curl_is_gauge_invariant(seed in any::<u64>(), x in 0.05f64..0.95, y in 0.0f64..1.0, q3 in -0.05f64..0.05) {
        let t = Torus::new(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_surface_gauge(&t, &mut rng);
        let f = torus_mixed(3.0, 1.0, 0.7, 0.3);
        let g = gauge_transform(&f, &gamma);
        let q = [2.0 * PI * x, 2.0 * PI * y, q3];
        let a = magnetic_field_at(&f, &t, q).unwrap();
        let b = magnetic_field_at(&g, &t, q).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{a:?} {b:?}");
    }
}
