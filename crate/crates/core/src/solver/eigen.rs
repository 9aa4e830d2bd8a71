//! Lowest eigenpairs of a discretized operator.

use super::discretize::DiscreteOperator;
use crate::error::{Error, Result};
use crate::hamiltonian::SpinorField;
use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenOptions {
    pub k: usize,
    /// Residual bound `||H psi - E psi||`; defaults to `1e-8 ||H||`.
    pub tol: Option<f64>,
    pub seed: u64,
    pub max_iterations: usize,
    /// Extra block vectors beyond `k`.
    pub guard_vectors: usize,
    /// Inverse powers of the block added per restart.
    pub krylov_depth: usize,
    /// Dimension at or below which a dense solve is used.
    pub dense_threshold: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { k: 16, tol: None, seed: 0, max_iterations: 100, guard_vectors: 8, krylov_depth: 4, dense_threshold: 1024 }
    }
}

impl EigenOptions {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Eigenvalues within `1e-6` of each other, reported together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplet {
    pub value: f64,
    pub degeneracy: usize,
}

pub const MULTIPLET_TOL: f64 = 1e-6;

pub fn multiplets(values: &[f64]) -> Vec<Multiplet> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((sum, count, last)) if (v - *last).abs() <= MULTIPLET_TOL * 1f64.max(v.abs()) => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, c, _)| Multiplet { value: s / c as f64, degeneracy: c }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub multiplets: Vec<Multiplet>,
    /// Eigenfields normalized in the weighted inner product.
    #[serde(skip)]
    pub fields: Vec<SpinorField>,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
    pub shift: Option<f64>,
    pub method: String,
    pub metadata: serde_json::Value,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest deviation of the eigenfields' Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.fields.iter().enumerate() {
            for (j, b) in self.fields.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - expect).norm());
            }
        }
        worst
    }
}

type Col = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalize the columns of `w` against the first `used` columns of `v`
/// (block Gram-Schmidt, twice) and among themselves, then store the survivors
/// after them. Returns how many were kept.
fn append_orthonormal(v: &mut Mat<Complex64>, used: usize, mut w: Mat<Complex64>) -> usize {
    let start: Vec<f64> = (0..w.ncols()).map(|j| w.col(j).norm_l2()).collect();
    if used > 0 {
        for _ in 0..2 {
            let basis = v.as_ref().subcols(0, used);
            let c = basis.adjoint() * &w;
            w -= basis * &c;
        }
    }
    let mut kept: Vec<Col> = Vec::new();
    for (j, &s0) in start.iter().enumerate() {
        let mut col: Col = w.col(j).iter().copied().collect();
        if s0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &kept {
                let c = dot(b, &col);
                for (x, y) in col.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&col);
        if n > 1e-10 * s0 {
            col.iter_mut().for_each(|x| *x /= n);
            kept.push(col);
        }
    }
    let room = v.ncols() - used;
    kept.truncate(room);
    for (j, col) in kept.iter().enumerate() {
        v.col_mut(used + j).iter_mut().zip(col).for_each(|(d, s)| *d = *s);
    }
    kept.len()
}

fn fields_from(op: &DiscreteOperator, vectors: &[Col]) -> Vec<SpinorField> {
    vectors
        .iter()
        .map(|y| SpinorField {
            n: op.n,
            components: op.components,
            representation: op.representation,
            values: op.to_field_values(y),
            weights: op.weights.clone(),
            coords: op.coords.clone(),
        })
        .collect()
}

fn residual_norms(op: &DiscreteOperator, values: &[f64], vectors: &[Col]) -> Vec<f64> {
    vectors
        .par_iter()
        .zip(values)
        .map(|(y, l)| {
            let hy = op.matrix.matvec(y);
            hy.iter().zip(y).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt()
        })
        .collect()
}

fn dense_solve(op: &DiscreteOperator, k: usize, tol: f64) -> Result<SpectrumResult> {
    let dense = op.matrix.to_dense();
    let eig = dense
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("dense eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let values: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let vectors: Vec<Col> = (0..k).map(|j| (0..op.dimension()).map(|i| u[(i, j)]).collect()).collect();
    let residuals = residual_norms(op, &values, &vectors);
    let converged = residuals.iter().all(|r| *r <= tol);
    Ok(SpectrumResult {
        multiplets: multiplets(&values),
        fields: fields_from(op, &vectors),
        eigenvalues: values,
        residuals,
        converged,
        iterations: 1,
        tolerance: tol,
        shift: None,
        method: "dense".into(),
        metadata: serde_json::Value::Null,
    })
}

/// The `k` lowest eigenpairs of `op`.
///
/// Large problems use block Krylov iteration on `(H - sigma)^-1` with `sigma`
/// below the spectrum, followed by Rayleigh-Ritz with `H` itself. The result is
/// deterministic for a fixed seed. If the iteration cap is reached the partial
/// result is returned with `converged = false`.
pub fn eigensolve(op: &DiscreteOperator, opts: &EigenOptions) -> Result<SpectrumResult> {
    let dim = op.dimension();
    let k = opts.k;
    if k == 0 || 4 * k > dim {
        return Err(Error::Eigensolver(format!("k = {k} must satisfy 1 <= k <= dim/4 = {}", dim / 4)));
    }
    let tol = opts.tol.unwrap_or_else(|| 1e-8 * op.matrix.norm_inf());
    if dim <= opts.dense_threshold {
        return dense_solve(op, k, tol);
    }

    // Face energies are positive semidefinite, so the on-site floor bounds the
    // spectrum from below; the margin only grows if a factorization fails.
    let mut margin = 0.01 * (1.0 + op.potential_floor.abs());
    let mut sigma = op.potential_floor - margin;
    let mut llt = None;
    for _ in 0..8 {
        let shifted = op.matrix.shifted(sigma).ok_or_else(|| Error::Eigensolver("invalid sparse structure".into()))?;
        if let Ok(f) = shifted.sp_cholesky(Side::Lower) {
            llt = Some(f);
            break;
        }
        margin *= 10.0;
        sigma = op.potential_floor - margin;
    }
    let llt = llt.ok_or_else(|| Error::Eigensolver("no positive definite shift found below the spectrum".into()))?;

    let p = (k + opts.guard_vectors).min(dim / 3);
    let depth = opts.krylov_depth.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = Mat::<Complex64>::from_fn(dim, p, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut v = Mat::<Complex64>::zeros(dim, (depth + 1) * p);
    let mut x = start;
    let mut values = Vec::new();
    let mut vectors: Vec<Col> = Vec::new();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut used = append_orthonormal(&mut v, 0, x);
        let mut block = used;
        for _ in 0..depth {
            if block == 0 {
                break;
            }
            let mut next = v.as_ref().subcols(used - block, block).to_owned();
            llt.solve_in_place(next.as_mut());
            let added = append_orthonormal(&mut v, used, next);
            used += added;
            block = added;
        }
        let basis = v.as_ref().subcols(0, used);
        let mut sv = Mat::<Complex64>::zeros(dim, used);
        for j in 0..used {
            let col: Col = basis.col(j).iter().copied().collect();
            let y = op.matrix.matvec(&col);
            sv.col_mut(j).iter_mut().zip(y).for_each(|(d, s)| *d = s);
        }
        let projected = basis.adjoint() * &sv;
        let h = Mat::<Complex64>::from_fn(used, used, |i, j| {
            let a = 0.5 * (projected[(i, j)] + projected[(j, i)].conj());
            if i == j {
                Complex64::new(a.re, 0.0)
            } else {
                a
            }
        });
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("projected eigenproblem failed: {e:?}")))?;
        let theta = eig.S().column_vector();
        let keep = p.min(used);
        let coeffs = eig.U().subcols(0, keep);
        let ritz = basis * coeffs;
        let sritz = &sv * coeffs;
        values = (0..k).map(|i| theta[i].re).collect();
        residuals = (0..k)
            .map(|i| {
                sritz.col(i).iter().zip(ritz.col(i).iter()).map(|(a, b)| (a - b * values[i]).norm_sqr()).sum::<f64>().sqrt()
            })
            .collect();
        vectors = (0..k).map(|j| ritz.col(j).iter().copied().collect()).collect();
        if residuals.iter().all(|r| *r <= tol) {
            converged = true;
            break;
        }
        x = ritz;
    }
    Ok(SpectrumResult {
        multiplets: multiplets(&values),
        fields: fields_from(op, &vectors),
        eigenvalues: values,
        residuals,
        converged,
        iterations,
        tolerance: tol,
        shift: Some(sigma),
        method: "shift_invert_block_krylov".into(),
        metadata: serde_json::Value::Null,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplet_grouping() {
        let m = multiplets(&[0.0, 1.0, 1.0 + 1e-8, 1.0 + 2e-8, 3.0]);
        assert_eq!(m.iter().map(|x| x.degeneracy).collect::<Vec<_>>(), vec![1, 3, 1]);
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let cols = [[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]];
        let w = Mat::<Complex64>::from_fn(3, 3, |i, j| Complex64::new(cols[j][i], 0.0));
        let mut v = Mat::<Complex64>::zeros(3, 3);
        assert_eq!(append_orthonormal(&mut v, 0, w), 2);
        let gram = v.as_ref().subcols(0, 2).adjoint() * v.as_ref().subcols(0, 2);
        assert!((gram[(0, 1)]).norm() < 1e-14);
        assert!((gram[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
