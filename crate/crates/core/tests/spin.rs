use approx::assert_abs_diff_eq;
use nalgebra::{Matrix2, Matrix3, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use surfspin::geometry::{Cylinder, Plane, Sphere, Torus};
use surfspin::spin::{
    adjoint_rotation, anticommutator, check_spin_identities, frame_rotation_at, induced_pauli_at, pauli,
    pauli_coefficients, pauli_product_deviation, spin_frame_at, spinor_lift,
};
use surfspin::*;

type CMat2 = Matrix2<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: &CMat2, b: &CMat2) -> f64 {
    (a - b).norm()
}

fn scaled(m: &CMat2, s: f64) -> CMat2 {
    m * c(s, 0.0)
}

#[test]
fn induced_pauli_examples() {
    let s = pauli();
    let sphere = Sphere::new(1.0).unwrap();
    let g = geometry_at(&sphere, PI / 2.0, 0.0).unwrap();
    let ind = induced_pauli_at(&g);
    let expect = CMat2::new(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
    assert!(close(&ind.tangential[0], &expect) < 1e-14);

    // Close to the north pole the normal tends to the z axis.
    let g = geometry_at(&sphere, 1e-5, 0.7).unwrap();
    assert!(close(&induced_pauli_at(&g).normal, &s[2]) < 2e-5);

    let cyl = Cylinder::new(1.0, 2.0, true).unwrap();
    let g = geometry_at(&cyl, 0.0, 0.3).unwrap();
    assert!(close(&induced_pauli_at(&g).tangential[0], &s[0]) < 1e-14);
}

#[test]
fn frame_rotation_examples() {
    let p = Plane::new(1.0, 1.0, 0.0, false).unwrap();
    let g = geometry_at(&p, 0.4, 0.6).unwrap();
    assert_abs_diff_eq!((frame_rotation_at(&g) - Matrix3::identity()).norm(), 0.0, epsilon = 1e-15);

    let sphere = Sphere::new(1.0).unwrap();
    let g = geometry_at(&sphere, PI / 2.0, 0.0).unwrap();
    let r = frame_rotation_at(&g);
    let theta_hat = Vector3::new(0.0, 0.0, -1.0);
    let phi_hat = Vector3::new(0.0, 1.0, 0.0);
    let rho_hat = Vector3::new(1.0, 0.0, 0.0);
    assert_abs_diff_eq!((r * theta_hat - Vector3::x()).norm(), 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!((r * phi_hat - Vector3::y()).norm(), 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!((r * rho_hat - Vector3::z()).norm(), 0.0, epsilon = 1e-14);
}

#[test]
fn identity_lifts_to_identity() {
    assert!(close(&spinor_lift(&Matrix3::identity(), None), &CMat2::identity()) < 1e-15);
    let minus = -CMat2::identity();
    assert!(close(&spinor_lift(&Matrix3::identity(), Some(&minus)), &minus) < 1e-15);
}

#[test]
fn closed_form_spinors() {
    let sphere = Sphere::new(1.0).unwrap();
    let (theta, phi) = (1.1, 2.3);
    let g = geometry_at(&sphere, theta, phi).unwrap();
    let u = spin_frame_at(&sphere, &g, None).u;
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ep = Complex64::from_polar(1.0, phi / 2.0);
    let expect = CMat2::new(ep * ct, ep.conj() * st, -ep * st, ep.conj() * ct);
    assert!(close(&u, &expect) < 1e-14);

    let cyl = Cylinder::new(1.0, 2.0, true).unwrap();
    let g = geometry_at(&cyl, 0.8, 0.3).unwrap();
    let u = spin_frame_at(&cyl, &g, None).u;
    let expect = CMat2::new(c(0.4f64.cos(), 0.0), c(0.4f64.sin(), 0.0), c(-0.4f64.sin(), 0.0), c(0.4f64.cos(), 0.0));
    assert!(close(&u, &expect) < 1e-14);
}

#[test]
fn transformed_tangential_matrices() {
    let s = pauli();
    let r = 1.7;
    let sphere = Sphere::new(r).unwrap();
    let theta = 0.9;
    let g = geometry_at(&sphere, theta, 0.4).unwrap();
    let f = spin_frame_at(&sphere, &g, None);
    assert!(close(&f.transformed.tangential[0], &scaled(&s[0], 1.0 / r)) < 1e-13);
    assert!(close(&f.transformed.tangential[1], &scaled(&s[1], 1.0 / (r * theta.sin()))) < 1e-13);

    let cyl = Cylinder::new(r, 2.0, true).unwrap();
    let g = geometry_at(&cyl, 2.5, 0.4).unwrap();
    let f = spin_frame_at(&cyl, &g, None);
    assert!(close(&f.transformed.tangential[0], &scaled(&s[0], 1.0 / r)) < 1e-13);
    assert!(close(&f.transformed.tangential[1], &s[1]) < 1e-13);

    let torus = Torus::new(3.0, 1.0).unwrap();
    let theta = 2.2;
    let g = geometry_at(&torus, theta, 1.0).unwrap();
    let f = spin_frame_at(&torus, &g, None);
    let big = 3.0 + theta.sin();
    assert!(close(&f.transformed.tangential[1], &scaled(&s[1], 1.0 / big)) < 1e-13);
}

#[test]
fn pauli_square_and_torus_anticommutator() {
    assert_eq!(pauli_product_deviation(&Vector3::z(), &Vector3::z()), 0.0);
    let torus = Torus::new(3.0, 1.0).unwrap();
    let g = geometry_at(&torus, 0.7, 4.0).unwrap();
    let ind = induced_pauli_at(&g);
    assert!(anticommutator(&ind.tangential[0], &ind.tangential[1]).norm() < 1e-14);
}

#[test]
fn identity_report_on_sphere() {
    let sphere = Sphere::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<[f64; 2]> = (0..100).map(|k| [0.05 + 3.0 * (k as f64 + 0.5) / 100.0, 0.0628 * k as f64]).collect();
    let rep = check_spin_identities(&sphere, &pts, &mut rng).unwrap();
    assert_eq!(rep.points, 100);
    assert!(rep.induced_anticommutator <= 1e-12);
    assert!(rep.max_deviation() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_realize_the_frame_rotation(
        x in 0.02f64..0.98,
        y in 0.0f64..1.0,
        name in prop::sample::select(vec!["sphere", "cylinder", "torus", "plane"]),
    ) {
        let ch = build_chart(name, &ChartParams::default()).unwrap();
        let d = ch.domain();
        let q = [d.q1.0 + x * (d.q1.1 - d.q1.0), d.q2.0 + y * (d.q2.1 - d.q2.0)];
        let g = geometry_at(ch.as_ref(), q[0], q[1]).unwrap();
        let f = spin_frame_at(ch.as_ref(), &g, None);
        let u = f.u;
        prop_assert!((u * u.adjoint() - CMat2::identity()).norm() < 1e-13);
        prop_assert!((u.determinant() - c(1.0, 0.0)).norm() < 1e-13);
        prop_assert!(close(&f.transformed.normal, &pauli()[2]) < 1e-12);
        let rot = f.rotation;
        prop_assert!((rot.transpose() * rot - Matrix3::identity()).norm() < 1e-13);
        prop_assert!((rot.determinant() - 1.0).abs() < 1e-13);
        prop_assert!((adjoint_rotation(&u) - rot).norm() < 1e-12);
        // The generic lift agrees with the closed form up to the sign of the branch.
        let lift = spinor_lift(&rot, Some(&u));
        prop_assert!(close(&lift, &u) < 1e-12);
        for t in f.transformed.tangential.iter() {
            let (_, coeff) = pauli_coefficients(t);
            prop_assert!(coeff[2].norm() < 1e-12);
        }
    }
}
