//! Spectrum documents, eigenfield tables and matrix triplet files.

use super::eigen::{Multiplet, SpectrumResult};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::{Representation, SpinorField, SurfacePauliOperator};
use crate::spin::pauli;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const SPECTRUM_FORMAT: &str = "surfspin-spectrum";
pub const SPECTRUM_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub format: String,
    pub version: u32,
    pub params: serde_json::Value,
    pub eigenvalues: Vec<f64>,
    pub degeneracies: Vec<Multiplet>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub method: String,
    pub tolerance: f64,
}

impl SpectrumDocument {
    pub fn new(result: &SpectrumResult, params: serde_json::Value) -> Self {
        Self {
            format: SPECTRUM_FORMAT.into(),
            version: SPECTRUM_VERSION,
            params,
            eigenvalues: result.eigenvalues.clone(),
            degeneracies: result.multiplets.clone(),
            residuals: result.residuals.clone(),
            converged: result.converged,
            method: result.method.clone(),
            tolerance: result.tolerance,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        if doc.format != SPECTRUM_FORMAT || doc.version != SPECTRUM_VERSION {
            return Err(Error::Expression(format!("unsupported document {} v{}", doc.format, doc.version)));
        }
        Ok(doc)
    }
}

#[derive(Serialize)]
struct FieldRow {
    q1: f64,
    q2: f64,
    abs_chi_up_sq: f64,
    abs_chi_down_sq: f64,
    sigma_rho: f64,
}

/// Rows `q1, q2, |chi+|^2, |chi-|^2, chi^+ sigma_rho chi`.
pub fn write_eigenfield_csv<W: Write>(out: W, op: &SurfacePauliOperator, field: &SpinorField) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (k, q) in field.coords.iter().enumerate() {
        let v = field.spinor(k);
        let s = if field.components == 1 { 0.0 } else { (v.adjoint() * normal_matrix(op, field.representation, k) * v)[(0, 0)].re };
        w.serialize(FieldRow {
            q1: q[0],
            q2: q[1],
            abs_chi_up_sq: v[0].norm_sqr(),
            abs_chi_down_sq: v[1].norm_sqr(),
            sigma_rho: s,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Normal Pauli matrix at node `k` in representation `r`.
pub fn normal_matrix(op: &SurfacePauliOperator, r: Representation, k: usize) -> crate::spin::CMat2 {
    let node = &op.nodes[k];
    match r {
        Representation::Primed => pauli()[2],
        Representation::Lab if op.options.rotates() => node.u.adjoint() * pauli()[2] * node.u,
        Representation::Lab => node.sigma_normal,
    }
}

/// One `row col re im` line per stored entry, zero-based.
pub fn write_matrix_triplets<W: Write>(mut out: W, m: &CsrMatrix) -> Result<()> {
    writeln!(out, "# {} {} {}", m.n, m.n, m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(out, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_matrix_triplets<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let mut n = None;
    let mut t = Vec::new();
    for line in input.lines() {
        let line = line?;
        let fields: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
        if line.starts_with('#') {
            // Other comment lines carry metadata.
            if let Some(v) = fields.first().and_then(|s| s.parse().ok()) {
                n = Some(v);
            }
            continue;
        }
        if fields.len() != 4 {
            continue;
        }
        let bad = || Error::Expression(format!("bad triplet line '{line}'"));
        let r: usize = fields[0].parse().map_err(|_| bad())?;
        let c: usize = fields[1].parse().map_err(|_| bad())?;
        let re: f64 = fields[2].parse().map_err(|_| bad())?;
        let im: f64 = fields[3].parse().map_err(|_| bad())?;
        t.push((r, c, Complex64::new(re, im)));
    }
    let n = n.ok_or_else(|| Error::Expression("missing size header".into()))?;
    Ok(CsrMatrix::from_triplets(n, &t))
}
