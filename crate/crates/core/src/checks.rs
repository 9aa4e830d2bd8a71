//! Invariant suite for the built-in charts with their field presets.

use crate::em_field::{gauge_transform, presets, EMField, GaugeFunction};
use crate::error::{Error, Result};
use crate::geometry::{build_chart, limit_relations_check, ChartParams, SurfaceChart};
use crate::hamiltonian::compare::{compare_operators, TrialSet, DEFAULT_TOLERANCE};
use crate::hamiltonian::oracle::{closed_form_oracle, OracleParams};
use crate::hamiltonian::{assemble_surface_operator, AssemblyOptions, Representation, SpinorField, TermGroup};
use crate::solver::{discretize, eigensolve, EigenOptions, GridSpec};
use crate::spin::check_spin_identities;
use crate::Units;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use crate::hamiltonian::compare::Verdict;

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub verdict: Verdict,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) {
        let verdict = if value <= threshold { Verdict::Pass } else { Verdict::Fail };
        self.lines.push(CheckLine { name: name.into(), verdict, value, threshold, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> Vec<&CheckLine> {
        self.lines.iter().filter(|l| l.verdict == Verdict::Fail).collect()
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.lines.extend(other.lines);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            write!(f, "{} {} value={:.3e} threshold={:.1e}", l.verdict, l.name, l.value, l.threshold)?;
            if !l.detail.is_empty() {
                write!(f, " ({})", l.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    pub n: [usize; 2],
    pub gauges: usize,
    pub k: usize,
    pub seed: u64,
    pub units: Units,
    pub b0: f64,
    pub b1: f64,
    pub oracle_points: usize,
    pub corrupt_sign: Option<TermGroup>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            n: [12, 24],
            gauges: 3,
            k: 6,
            seed: 7,
            units: Units::default(),
            b0: 0.7,
            b1: 0.4,
            oracle_points: 6,
            corrupt_sign: None,
        }
    }
}

/// A built-in chart with its preset field and matching closed-form parameters.
pub struct BuiltinCase {
    pub chart: Arc<dyn SurfaceChart>,
    pub field: EMField,
    pub oracle: OracleParams,
}

pub fn builtin_case(name: &str, b0: f64, b1: f64, units: Units) -> Result<BuiltinCase> {
    let params = ChartParams::default();
    let chart = build_chart(name, &params)?;
    let p = |k: &str| chart.parameters().into_iter().find(|(n, _)| n == k).map(|(_, v)| v).unwrap_or(0.0);
    let (r, big_r) = match name {
        "torus" => (p("r"), p("R0")),
        _ => (p("r"), 0.0),
    };
    let field = match name {
        "sphere" => presets::sphere_uniform(r, b0),
        "cylinder" => presets::cylinder_mixed(r, b0, b1),
        "torus" => presets::torus_mixed(big_r, r, b0, b1),
        other => return Err(Error::UnknownChart(other.to_string())),
    };
    let oracle = OracleParams { units, e_charge: field.e_charge, r, big_r, b0, b1, phi_e: None };
    Ok(BuiltinCase { chart, field, oracle })
}

/// Smooth random gauge function, single valued on wrapping axes.
pub fn random_surface_gauge<R: Rng>(chart: &dyn SurfaceChart, rng: &mut R) -> GaugeFunction {
    let d = chart.domain();
    let per = chart.periodic();
    let mut k = [0.0; 2];
    for a in 0..2 {
        k[a] = if per[a] {
            2.0 * PI * rng.random_range(1..=3) as f64 / d.extent(a)
        } else {
            rng.random_range(0.5..2.0)
        };
    }
    let amp: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let ph: [f64; 2] = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
    GaugeFunction::new("random", move |q| {
        amp[0] * (k[0] * q[0] + ph[0]).sin() + amp[1] * (k[1] * q[1] + ph[1]).cos() + amp[2] * (k[0] * q[0]).sin() * (k[1] * q[1]).cos()
    })
}

fn interior_points<R: Rng>(chart: &dyn SurfaceChart, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    let d = chart.domain();
    let per = chart.periodic();
    (0..n)
        .map(|_| {
            let mut q = [0.0; 2];
            for a in 0..2 {
                let (lo, hi) = d.axis(a);
                let m = if per[a] { 0.0 } else { 0.05 * (hi - lo) };
                q[a] = rng.random_range(lo + m..hi - m);
            }
            q
        })
        .collect()
}

fn relative_spectrum_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(1.0)).fold(0.0, f64::max)
}

/// Every invariant for one built-in chart.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<CheckReport> {
    let case = builtin_case(name, opts.b0, opts.b1, opts.units)?;
    let chart = case.chart.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = CheckReport::default();

    let pts = interior_points(chart.as_ref(), 200, &mut rng);
    let spin = check_spin_identities(chart.as_ref(), &pts, &mut rng)?;
    report.push(format!("{name}/spin_identities"), spin.max_deviation(), 1e-10, "induced and rotated Pauli algebra");

    let mut limit_err: f64 = 0.0;
    for q in interior_points(chart.as_ref(), 3, &mut rng) {
        let lr = limit_relations_check(chart.as_ref(), q[0], q[1], &[0.08, 0.04, 0.02, 0.01, 0.005])?;
        limit_err = limit_err.max(if lr.converged { lr.max_error } else { f64::INFINITY });
    }
    report.push(format!("{name}/limit_relations"), limit_err, 1e-6, "thin-shell Christoffel contractions");

    let options = AssemblyOptions { corrupt_sign: opts.corrupt_sign, ..AssemblyOptions::default() };
    let grid = GridSpec::natural(chart.as_ref(), opts.n, &options)?;
    let op = assemble_surface_operator(chart.clone(), &case.field, &grid, opts.units, &options)?;
    let disc = discretize(&op)?;
    report.push(format!("{name}/hermiticity_matrix"), disc.hermiticity_residual, 1e-12, "||H - H^+|| / ||H||");
    let dim = disc.dimension();
    let random = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    };
    let (x, y) = (random(&mut rng), random(&mut rng));
    let lhs = disc.weighted_form(&x, &y);
    let rhs = disc.weighted_form(&y, &x).conj();
    report.push(format!("{name}/hermiticity_weighted"), (lhs - rhs).norm() / lhs.norm().max(1e-300), 1e-10, "<x,Hy> vs <Hx,y>");

    report.push(format!("{name}/only_sigma_rho"), op.zeeman_tangential_coefficients(), 1e-12, "sigma_1, sigma_2 coefficients of the Zeeman slots");

    let field = SpinorField {
        n: grid.n,
        components: 2,
        representation: Representation::Lab,
        values: random(&mut rng),
        weights: disc.weights.clone(),
        coords: disc.coords.clone(),
    };
    let back = field.to_representation(&op, Representation::Primed).to_representation(&op, Representation::Lab);
    let round = field.values.iter().zip(&back.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    report.push(format!("{name}/representation_round_trip"), round, 1e-14, "lab -> primed -> lab");

    let eig = EigenOptions::new(opts.k).with_seed(opts.seed).with_tol(1e-9);
    let reference = eigensolve(&disc, &eig)?;
    let mut gauge_gap: f64 = 0.0;
    for _ in 0..opts.gauges {
        let gamma = random_surface_gauge(chart.as_ref(), &mut rng);
        let moved = gauge_transform(&case.field, &gamma);
        let op2 = assemble_surface_operator(chart.clone(), &moved, &grid, opts.units, &options)?;
        let spec = eigensolve(&discretize(&op2)?, &eig)?;
        gauge_gap = gauge_gap.max(relative_spectrum_gap(&reference.eigenvalues, &spec.eigenvalues));
    }
    report.push(format!("{name}/gauge_invariance"), gauge_gap, 1e-8, format!("{} random surface gauges", opts.gauges));

    let oracle = closed_form_oracle(name, &case.oracle)?;
    let trials = TrialSet::standard(chart.as_ref(), opts.oracle_points, opts.seed);
    let cmp = compare_operators(&op.continuum(), &oracle, &trials, DEFAULT_TOLERANCE)?;
    for e in cmp.entries {
        let value = e.alternative_residual.unwrap_or(e.residual);
        let mut detail = e.note.clone();
        if e.verdict == Verdict::Info {
            detail = format!("printed residual {:.3e}; {}", e.residual, e.note);
        }
        report.lines.push(CheckLine {
            name: format!("{name}/oracle/{}", e.tag),
            verdict: e.verdict,
            value,
            threshold: DEFAULT_TOLERANCE,
            detail,
        });
    }
    Ok(report)
}
