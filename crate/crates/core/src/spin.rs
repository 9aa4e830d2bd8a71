//! Induced Pauli matrices, frame rotations and their SU(2) lifts.

use crate::error::{Error, Result};
use crate::geometry::{geometry_at, GeometryPoint, SurfaceChart};
use nalgebra::{Matrix2, Matrix3, Rotation3, UnitQuaternion, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

pub type CMat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The constant Pauli matrices `sigma_1, sigma_2, sigma_3`.
pub fn pauli() -> [CMat2; 3] {
    let z = c(0.0);
    let one = c(1.0);
    [
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, -I, I, z),
        Matrix2::new(one, z, z, -one),
    ]
}

pub fn identity2() -> CMat2 {
    Matrix2::identity()
}

/// Levi-Civita symbol on indices `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `sigma . v` for a real vector.
pub fn sigma_dot(v: &Vector3<f64>) -> CMat2 {
    Matrix2::new(c(v.z), Complex64::new(v.x, -v.y), Complex64::new(v.x, v.y), c(-v.z))
}

/// Coefficients `(c0, [c1, c2, c3])` with `m = c0 I + sum_k c_k sigma_k`.
pub fn pauli_coefficients(m: &CMat2) -> (Complex64, [Complex64; 3]) {
    let s = pauli();
    let c0 = m.trace() * 0.5;
    let ck = [(m * s[0]).trace() * 0.5, (m * s[1]).trace() * 0.5, (m * s[2]).trace() * 0.5];
    (c0, ck)
}

pub fn dagger(m: &CMat2) -> CMat2 {
    m.adjoint()
}

pub fn anticommutator(a: &CMat2, b: &CMat2) -> CMat2 {
    a * b + b * a
}

pub fn commutator(a: &CMat2, b: &CMat2) -> CMat2 {
    a * b - b * a
}

/// Tangential induced matrices `Sigma^a` and the normal one `Sigma^rho = n . sigma`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducedPauli {
    pub tangential: [CMat2; 2],
    pub normal: CMat2,
}

pub fn induced_pauli_at(geom: &GeometryPoint) -> InducedPauli {
    InducedPauli {
        tangential: [
            sigma_dot(&geom.coordinate_gradient(0)),
            sigma_dot(&geom.coordinate_gradient(1)),
        ],
        normal: sigma_dot(&geom.normal),
    }
}

/// Rotation with rows `n1, n2, n3`, so that it maps `n_i` onto `e_i`.
pub fn frame_rotation_at(geom: &GeometryPoint) -> Matrix3<f64> {
    geom.frame.transpose()
}

/// SU(2) element `U` with `U (sigma . v) U^dagger = sigma . (R v)`.
///
/// Of the two lifts `+-U` the one closer to `hint` is returned; without a hint
/// the lift with non-negative real trace.
pub fn spinor_lift(rotation: &Matrix3<f64>, hint: Option<&CMat2>) -> CMat2 {
    let rot = Rotation3::from_matrix_unchecked(*rotation);
    let q = UnitQuaternion::from_rotation_matrix(&rot);
    let (w, v) = (q.w, q.imag());
    let s = pauli();
    let u = identity2() * c(w) - (s[0] * c(v.x) + s[1] * c(v.y) + s[2] * c(v.z)) * I;
    match hint {
        Some(h) => {
            if (u - h).norm() <= (u + h).norm() {
                u
            } else {
                -u
            }
        }
        None => {
            if u.trace().re >= 0.0 {
                u
            } else {
                -u
            }
        }
    }
}

/// `sigma^a = U Sigma^a U^-1` and `U Sigma^rho U^-1`.
pub fn transform_induced(u: &CMat2, induced: &InducedPauli) -> InducedPauli {
    let ud = u.adjoint();
    InducedPauli {
        tangential: [u * induced.tangential[0] * ud, u * induced.tangential[1] * ud],
        normal: u * induced.normal * ud,
    }
}

/// The 3x3 rotation `R` realized by `U`, i.e. `U sigma_k U^dagger = sum_j R_jk sigma_j`.
pub fn adjoint_rotation(u: &CMat2) -> Matrix3<f64> {
    let s = pauli();
    let ud = u.adjoint();
    let mut r = Matrix3::zeros();
    for k in 0..3 {
        let (_, coeff) = pauli_coefficients(&(u * s[k] * ud));
        for j in 0..3 {
            r[(j, k)] = coeff[j].re;
        }
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BranchTag {
    /// Taken from the chart's closed form.
    ClosedForm,
    /// Generic lift; `flipped` records that `-U` of the raw quaternion was chosen.
    Lift { flipped: bool },
}

/// Spin data at one surface point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinFrame {
    pub induced: InducedPauli,
    pub rotation: Matrix3<f64>,
    pub u: CMat2,
    pub branch: BranchTag,
    pub transformed: InducedPauli,
}

pub fn spin_frame_at(chart: &dyn SurfaceChart, geom: &GeometryPoint, hint: Option<&CMat2>) -> SpinFrame {
    let induced = induced_pauli_at(geom);
    let rotation = frame_rotation_at(geom);
    let (u, branch) = match chart.closed_form_spinor(geom.q) {
        Some(u) => (u, BranchTag::ClosedForm),
        None => {
            let raw = spinor_lift(&rotation, None);
            let u = spinor_lift(&rotation, hint);
            (u, BranchTag::Lift { flipped: (u + raw).norm() < 1e-12 })
        }
    };
    let transformed = transform_induced(&u, &induced);
    SpinFrame { induced, rotation, u, branch, transformed }
}

/// Result of sweeping the generic lift over a tensor grid.
#[derive(Clone, Debug)]
pub struct BranchSweep {
    pub n: [usize; 2],
    /// Row-major `u[i * n2 + j]`.
    pub u: Vec<CMat2>,
    /// Largest Frobenius jump between consecutive sweep points.
    pub max_step: f64,
    /// Per periodic axis, the sign picked up by continuing each grid line once around.
    pub holonomy: [Option<Vec<f64>>; 2],
}

/// Continuous generic lift over the grid `coords[0] x coords[1]`, swept row-major from the
/// first corner. `periods[a]` enables the holonomy report for that axis.
pub fn propagate_branch(
    chart: &dyn SurfaceChart,
    coords: [&[f64]; 2],
    periods: [Option<f64>; 2],
) -> Result<BranchSweep> {
    let (n1, n2) = (coords[0].len(), coords[1].len());
    let rot_at = |q1: f64, q2: f64| -> Result<Matrix3<f64>> { Ok(frame_rotation_at(&geometry_at(chart, q1, q2)?)) };
    let mut u = Vec::with_capacity(n1 * n2);
    let mut max_step: f64 = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let hint = if j > 0 {
                Some(u[i * n2 + j - 1])
            } else if i > 0 {
                Some(u[(i - 1) * n2])
            } else {
                None
            };
            let next = spinor_lift(&rot_at(coords[0][i], coords[1][j])?, hint.as_ref());
            if let Some(h) = hint {
                max_step = max_step.max((next - h).norm());
            }
            u.push(next);
        }
    }
    if max_step >= 0.5 {
        return Err(Error::Branch(format!("lift jumps by {max_step:.3} between neighbours; refine the grid")));
    }
    let mut holonomy: [Option<Vec<f64>>; 2] = [None, None];
    if let Some(p) = periods[0] {
        let mut signs = Vec::with_capacity(n2);
        for j in 0..n2 {
            let last = u[(n1 - 1) * n2 + j];
            let cont = spinor_lift(&rot_at(coords[0][0] + p, coords[1][j])?, Some(&last));
            signs.push(if (cont - u[j]).norm() < (cont + u[j]).norm() { 1.0 } else { -1.0 });
        }
        holonomy[0] = Some(signs);
    }
    if let Some(p) = periods[1] {
        let mut signs = Vec::with_capacity(n1);
        for i in 0..n1 {
            let last = u[i * n2 + n2 - 1];
            let cont = spinor_lift(&rot_at(coords[0][i], coords[1][0] + p)?, Some(&last));
            let first = u[i * n2];
            signs.push(if (cont - first).norm() < (cont + first).norm() { 1.0 } else { -1.0 });
        }
        holonomy[1] = Some(signs);
    }
    Ok(BranchSweep { n: [n1, n2], u, max_step, holonomy })
}

/// Worst-case deviations of the spin-algebra identities over a point sample.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SpinIdentityReport {
    pub points: usize,
    pub induced_anticommutator: f64,
    pub induced_commutator: f64,
    pub transformed_anticommutator: f64,
    pub transformed_commutator: f64,
    pub transformed_sigma3_coefficient: f64,
    pub transformed_normal: f64,
    pub unitarity: f64,
    pub determinant: f64,
    pub rotation_maps_frame: f64,
    pub adjoint_consistency: f64,
    pub pauli_product_identity: f64,
    pub pauli_algebra: f64,
}

impl SpinIdentityReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.induced_anticommutator,
            self.induced_commutator,
            self.transformed_anticommutator,
            self.transformed_commutator,
            self.transformed_sigma3_coefficient,
            self.transformed_normal,
            self.unitarity,
            self.determinant,
            self.rotation_maps_frame,
            self.adjoint_consistency,
            self.pauli_product_identity,
            self.pauli_algebra,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Max deviation of `sigma^i sigma^j = delta^ij I + i eps^ijk sigma^k`.
pub fn pauli_algebra_deviation() -> f64 {
    let s = pauli();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut rhs = if i == j { identity2() } else { Matrix2::zeros() };
            for k in 0..3 {
                rhs += s[k] * (I * levi_civita(i, j, k));
            }
            worst = worst.max((s[i] * s[j] - rhs).norm());
        }
    }
    worst
}

/// Max deviation of `(sigma.a)(sigma.b) = (a.b) I + i sigma.(a x b)`.
pub fn pauli_product_deviation(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let lhs = sigma_dot(a) * sigma_dot(b);
    let rhs = identity2() * c(a.dot(b)) + sigma_dot(&a.cross(b)) * I;
    (lhs - rhs).norm() / (1.0 + a.norm() * b.norm())
}

pub fn check_spin_identities<R: Rng>(chart: &dyn SurfaceChart, points: &[[f64; 2]], rng: &mut R) -> Result<SpinIdentityReport> {
    let mut rep = SpinIdentityReport { points: points.len(), pauli_algebra: pauli_algebra_deviation(), ..Default::default() };
    let max = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for q in points {
        let geom = geometry_at(chart, q[0], q[1])?;
        let frame = spin_frame_at(chart, &geom, None);
        let grads = [geom.coordinate_gradient(0), geom.coordinate_gradient(1)];
        let scale = 1.0 + geom.g_inv.norm();
        for a in 0..2 {
            for b in 0..2 {
                let target = identity2() * c(2.0 * geom.g_inv[(a, b)]);
                let ind = &frame.induced.tangential;
                let tr = &frame.transformed.tangential;
                max(&mut rep.induced_anticommutator, (anticommutator(&ind[a], &ind[b]) - target).norm() / scale);
                max(&mut rep.transformed_anticommutator, (anticommutator(&tr[a], &tr[b]) - target).norm() / scale);
                let comm_rhs = sigma_dot(&grads[a].cross(&grads[b])) * (2.0 * I);
                max(&mut rep.induced_commutator, (commutator(&ind[a], &ind[b]) - comm_rhs).norm() / scale);
                // In the rotated representation the commutator points along the constant sigma_3.
                let rotated = frame.rotation * grads[a].cross(&grads[b]);
                let comm_rhs_t = sigma_dot(&rotated) * (2.0 * I);
                max(&mut rep.transformed_commutator, (commutator(&tr[a], &tr[b]) - comm_rhs_t).norm() / scale);
            }
            let (_, coeff) = pauli_coefficients(&frame.transformed.tangential[a]);
            max(&mut rep.transformed_sigma3_coefficient, coeff[2].norm() / scale.sqrt());
        }
        max(&mut rep.transformed_normal, (frame.transformed.normal - pauli()[2]).norm());
        max(&mut rep.unitarity, (frame.u * frame.u.adjoint() - identity2()).norm());
        max(&mut rep.determinant, (frame.u.determinant() - c(1.0)).norm());
        let mapped = frame.rotation * geom.frame;
        max(&mut rep.rotation_maps_frame, (mapped - Matrix3::identity()).norm());
        max(&mut rep.adjoint_consistency, (adjoint_rotation(&frame.u) - frame.rotation).norm());
        let a = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        max(&mut rep.pauli_product_identity, pauli_product_deviation(&a, &b));
    }
    Ok(rep)
}
