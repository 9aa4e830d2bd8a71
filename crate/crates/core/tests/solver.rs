use approx::assert_abs_diff_eq;
use std::f64::consts::PI;
use std::sync::Arc;
use surfspin::em_field::presets::{cylinder_mixed, sphere_uniform};
use surfspin::solver::io::{read_matrix_triplets, write_eigenfield_csv, write_matrix_triplets, SpectrumDocument};
use surfspin::solver::{expectation, Observable};
use surfspin::*;

fn chart(name: &str) -> Arc<dyn SurfaceChart> {
    build_chart(name, &ChartParams::default()).unwrap()
}

fn operator(ch: &Arc<dyn SurfaceChart>, field: &EMField, n: [usize; 2], opts: &AssemblyOptions) -> SurfacePauliOperator {
    let grid = GridSpec::natural(ch.as_ref(), n, opts).unwrap();
    assemble_surface_operator(ch.clone(), field, &grid, Units::default(), opts).unwrap()
}

fn spectrum(op: &SurfacePauliOperator, k: usize) -> SpectrumResult {
    eigensolve(&discretize(op).unwrap(), &EigenOptions::new(k).with_tol(1e-9)).unwrap()
}

/// Lowest `count` values of `f(n, k)` over integer pairs.
fn lattice_levels(count: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut v: Vec<f64> = (-6..=6).flat_map(|n| (-6..=6).map(move |k| (n as f64, k as f64))).map(|(n, k)| f(n, k)).collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

fn assert_levels(got: &[f64], want: &[f64], tol: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "got {got:?}\nwant {want:?}");
    }
}

#[test]
fn ring_sector_of_the_spinless_cylinder() {
    let ch = chart("cylinder");
    let op = operator(&ch, &EMField::zero(), [32, 32], &AssemblyOptions::spinless());
    let res = spectrum(&op, 13);
    let want = lattice_levels(13, |n, k| 0.5 * (n * n + k * k) - 0.125);
    assert_levels(&res.eigenvalues, &want, 1e-3);
    assert_eq!(res.multiplets[0].degeneracy, 1);
    assert_eq!(res.multiplets[1].degeneracy, 4);
}

#[test]
fn spinful_cylinder_is_doubly_degenerate() {
    let ch = chart("cylinder");
    let op = operator(&ch, &EMField::zero(), [32, 32], &AssemblyOptions::default());
    let res = spectrum(&op, 10);
    let single = lattice_levels(5, |n, k| 0.5 * (n * n + k * k) - 0.125);
    let want: Vec<f64> = single.iter().flat_map(|e| [*e, *e]).collect();
    assert_levels(&res.eigenvalues, &want, 1e-4);
    assert_eq!(res.multiplets[0].degeneracy, 2);
}

#[test]
fn axial_flux_shifts_the_azimuthal_momenta() {
    let ch = chart("cylinder");
    let b0 = 0.3;
    let op = operator(&ch, &cylinder_mixed(1.0, b0, 0.0), [32, 32], &AssemblyOptions::spinless());
    let res = spectrum(&op, 8);
    let want = lattice_levels(8, |n, k| 0.5 * ((n + 0.5 * b0) * (n + 0.5 * b0) + k * k) - 0.125);
    assert_levels(&res.eigenvalues, &want, 1e-4);
}

#[test]
fn plane_box_converges_to_the_continuum() {
    let mut p = ChartParams::default();
    p = p.with("periodic", 0.0);
    let ch = build_chart("plane", &p).unwrap();
    let exact = PI * PI;
    let mut errors = Vec::new();
    for n in [15, 31] {
        let op = operator(&ch, &EMField::zero(), [n, n], &AssemblyOptions::spinless());
        let e0 = spectrum(&op, 1).eigenvalues[0];
        errors.push((e0 - exact).abs());
    }
    assert!(errors[1] < 1e-3, "{errors:?}");
    assert!(errors[0] / errors[1] > 3.5, "{errors:?}");
}

#[test]
fn minimal_plane_is_positive() {
    let ch = chart("plane");
    let op = operator(&ch, &EMField::zero(), [8, 8], &AssemblyOptions::default());
    let res = spectrum(&op, 4);
    assert!(res.eigenvalues[0] >= -1e-10);
}

#[test]
fn infinite_mass_with_no_field_gives_the_zero_matrix() {
    let ch = chart("torus");
    let opts = AssemblyOptions::default();
    let grid = GridSpec::natural(ch.as_ref(), [8, 8], &opts).unwrap();
    let op = assemble_surface_operator(ch, &EMField::zero(), &grid, Units { hbar: 1.0, mass: f64::INFINITY }, &opts).unwrap();
    let disc = discretize(&op).unwrap();
    assert!(disc.matrix.triplets().all(|(_, _, v)| v.norm() == 0.0));
}

#[test]
fn nonphysical_units_are_rejected() {
    let ch = chart("torus");
    let opts = AssemblyOptions::default();
    let grid = GridSpec::natural(ch.as_ref(), [8, 8], &opts).unwrap();
    for units in [Units { hbar: 0.0, mass: 1.0 }, Units { hbar: 1.0, mass: -1.0 }, Units { hbar: f64::NAN, mass: 1.0 }] {
        let err = assemble_surface_operator(ch.clone(), &EMField::zero(), &grid, units, &opts).unwrap_err();
        assert!(matches!(err, Error::Units(_)));
    }
}

#[test]
fn weak_field_lowers_the_sphere_ground_state() {
    // l = 0 doublet: <cos(theta) n.sigma> = sigma_z / 3, so E0 moves by -e hbar B / 6m.
    let ch = chart("sphere");
    let opts = AssemblyOptions::default();
    let e0 = |b: f64| spectrum(&operator(&ch, &sphere_uniform(1.0, b), [24, 48], &opts), 4).eigenvalues[0];
    let b = 0.01;
    let slope = (e0(b) - e0(0.0)) / b;
    assert!((slope + 1.0 / 6.0).abs() < 0.01, "slope {slope}");
}

fn constant_field(op: &SurfacePauliOperator, disc: &DiscreteOperator, s: [f64; 2]) -> SpinorField {
    let values = (0..op.node_count()).flat_map(|_| [Complex64::new(s[0], 0.0), Complex64::new(s[1], 0.0)]).collect();
    SpinorField {
        n: op.grid.n,
        components: 2,
        representation: Representation::Primed,
        values,
        weights: disc.weights.clone(),
        coords: disc.coords.clone(),
    }
}

#[test]
fn spin_expectations() {
    let ch = chart("sphere");
    let op = operator(&ch, &EMField::zero(), [8, 16], &AssemblyOptions::default());
    let disc = discretize(&op).unwrap();
    let up = constant_field(&op, &disc, [1.0, 0.0]).normalized();
    assert_abs_diff_eq!(expectation(&op, &up, Observable::SigmaRho).unwrap(), 1.0, epsilon = 1e-12);
    let h = 0.5f64.sqrt();
    let mix = constant_field(&op, &disc, [h, h]).normalized();
    assert_abs_diff_eq!(expectation(&op, &mix, Observable::SigmaRho).unwrap(), 0.0, epsilon = 1e-12);
    let raw = constant_field(&op, &disc, [1.0, 0.0]);
    assert!(matches!(expectation(&op, &raw, Observable::SigmaRho), Err(Error::NotNormalized(_))));
}

#[test]
fn inconsistent_boundaries_are_rejected() {
    let opts = AssemblyOptions::default();
    let sphere = chart("sphere");
    let bad = GridSpec::new(8, 16, Boundary::Periodic, Boundary::Periodic);
    assert!(assemble_surface_operator(sphere.clone(), &EMField::zero(), &bad, Units::default(), &opts).is_err());
    let odd = GridSpec::new(8, 15, Boundary::PoleRegular, Boundary::Antiperiodic);
    assert!(assemble_surface_operator(sphere, &EMField::zero(), &odd, Units::default(), &opts).is_err());
    let plane = chart("plane");
    let small = GridSpec::new(4, 8, Boundary::Box, Boundary::Box);
    assert!(assemble_surface_operator(plane, &EMField::zero(), &small, Units::default(), &opts).is_err());
}

#[test]
fn eigensolver_contract() {
    let ch = chart("cylinder");
    let op = operator(&ch, &cylinder_mixed(1.0, 0.4, 0.2), [24, 24], &AssemblyOptions::default());
    let disc = discretize(&op).unwrap();
    assert!(disc.dimension() > EigenOptions::default().dense_threshold);
    assert!(eigensolve(&disc, &EigenOptions::new(disc.dimension() / 4 + 1)).is_err());

    let opts = EigenOptions::new(6).with_tol(1e-7).with_seed(42);
    let a = eigensolve(&disc, &opts).unwrap();
    let b = eigensolve(&disc, &opts).unwrap();
    assert!(a.converged);
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert!(a.max_residual() <= 1e-7);
    assert!(a.orthonormality_defect() <= 1e-8);
    assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn documents_round_trip() {
    let ch = chart("torus");
    let op = operator(&ch, &EMField::zero(), [8, 16], &AssemblyOptions::default());
    let disc = discretize(&op).unwrap();
    let res = eigensolve(&disc, &EigenOptions::new(4)).unwrap();

    let doc = SpectrumDocument::new(&res, serde_json::json!({"chart": "torus"}));
    let back = SpectrumDocument::from_json(&doc.to_json().unwrap()).unwrap();
    assert_eq!(back.eigenvalues, res.eigenvalues);
    assert_eq!(back.params["chart"], "torus");
    assert!(SpectrumDocument::from_json(&doc.to_json().unwrap().replace("surfspin-spectrum", "other")).is_err());

    let mut buf = Vec::new();
    write_matrix_triplets(&mut buf, &disc.matrix).unwrap();
    let m = read_matrix_triplets(buf.as_slice()).unwrap();
    assert_eq!(m.n, disc.matrix.n);
    assert!(m.triplets().zip(disc.matrix.triplets()).all(|(x, y)| x == y));

    let mut csv_out = Vec::new();
    write_eigenfield_csv(&mut csv_out, &op, &res.fields[0]).unwrap();
    let text = String::from_utf8(csv_out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "q1,q2,abs_chi_up_sq,abs_chi_down_sq,sigma_rho");
    assert_eq!(lines.count(), op.node_count());
}
