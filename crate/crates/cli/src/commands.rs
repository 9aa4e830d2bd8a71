//! One function per subcommand. Each returns the files it wrote.

use crate::config::{chart_param, FieldPreset, Prepared, RunConfig};
use crate::output::{seal_json, seal_text, write};
use crate::CliError;
use serde_json::json;
use std::path::PathBuf;
use surfspin::checks::{builtin_case, run_suite, SuiteOptions};
use surfspin::hamiltonian::compare::{TrialSet, DEFAULT_TOLERANCE};
use surfspin::hamiltonian::{closed_form_oracle, compare_operators, ContinuumOperator, OracleParams};
use surfspin::solver::io::{write_eigenfield_csv, write_matrix_triplets, SpectrumDocument};
use std::result::Result;
use surfspin::*;

/// What a command produced and whether it counts as a pass.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub passed: bool,
}

#[derive(serde::Serialize)]
struct GeometryRow {
    q1: f64,
    q2: f64,
    x: f64,
    y: f64,
    z: f64,
    mean_curvature: f64,
    gaussian_curvature: f64,
    v_g: f64,
}

fn range(v: &[f64]) -> serde_json::Value {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "min": lo, "max": hi })
}

pub fn geometry(config: RunConfig) -> Result<Outcome, CliError> {
    let p = Prepared::new(config)?;
    let domain = p.grid.validate(p.chart.as_ref(), &p.options)?;
    let mut rows = Vec::new();
    for q in p.grid.node_coordinates(&domain) {
        let g = geometry_at(p.chart.as_ref(), q[0], q[1])?;
        rows.push(GeometryRow {
            q1: q[0],
            q2: q[1],
            x: g.position.x,
            y: g.position.y,
            z: g.position.z,
            mean_curvature: g.mean_curvature,
            gaussian_curvature: g.gaussian_curvature,
            v_g: geometric_potential_at(p.chart.as_ref(), q[0], q[1], p.units.hbar, p.units.mass)?,
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("utf8");
    let out = p.config.out.clone();
    let csv_path = write(&out, "geometry.csv", &seal_text("geometry", &body, &p.config))?;

    let col = |f: fn(&GeometryRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let summary = json!({
        "kind": "geometry",
        "chart": p.chart.name(),
        "nodes": rows.len(),
        "mean_curvature": range(&col(|r| r.mean_curvature)),
        "gaussian_curvature": range(&col(|r| r.gaussian_curvature)),
        "v_g": range(&col(|r| r.v_g)),
    });
    let text = format!(
        "{}: {} nodes, V_g in [{:.6e}, {:.6e}]",
        p.chart.name(),
        rows.len(),
        summary["v_g"]["min"].as_f64().unwrap_or(f64::NAN),
        summary["v_g"]["max"].as_f64().unwrap_or(f64::NAN)
    );
    let json_path = write(&out, "geometry.json", &seal_json(summary, &p.config))?;
    Ok(Outcome { files: vec![csv_path, json_path], summary: text, passed: true })
}

fn eigen_options(config: &RunConfig) -> EigenOptions {
    let mut o = EigenOptions::new(config.solver.k).with_seed(config.solver.seed);
    if let Some(t) = config.solver.tol {
        o = o.with_tol(t);
    }
    o
}

/// Azimuthal momenta `n + e B0 r^2 / 2 hbar` of the cylinder, reported alongside the spectrum.
fn flux_notes(p: &Prepared) -> serde_json::Value {
    let fc = &p.config.field;
    let preset = matches!(fc.preset, FieldPreset::Auto | FieldPreset::CylinderMixed);
    if p.chart.name() != "cylinder" || !preset || fc.b0 == 0.0 {
        return serde_json::Value::Null;
    }
    let r = p.chart_param("r");
    let shift = p.config.units.e * fc.b0 * r * r / (2.0 * p.units.hbar);
    let mut levels: Vec<f64> = (-4..=4)
        .map(|n| {
            let m = n as f64 + shift;
            p.units.kinetic() * m * m / (r * r)
        })
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.truncate(5);
    json!({ "flux_shift": shift, "azimuthal_levels": levels })
}

pub fn spectrum(config: RunConfig) -> Result<Outcome, CliError> {
    let p = Prepared::new(config)?;
    let op = assemble_surface_operator(p.chart.clone(), &p.field, &p.grid, p.units, &p.options)?;
    let disc = discretize(&op)?;
    let res = eigensolve(&disc, &eigen_options(&p.config))?;
    let params = json!({
        "chart": p.chart.name(),
        "field": p.field.label,
        "grid": p.grid,
        "dimension": disc.dimension(),
        "iterations": res.iterations,
        "flux": flux_notes(&p),
    });
    let doc = serde_json::to_value(SpectrumDocument::new(&res, params))?;
    let out = p.config.out.clone();
    let mut files = vec![write(&out, "spectrum.json", &seal_json(doc, &p.config))?];
    for (i, field) in res.fields.iter().take(p.config.solver.export_fields).enumerate() {
        let mut buf = Vec::new();
        write_eigenfield_csv(&mut buf, &op, field)?;
        let body = String::from_utf8(buf).expect("utf8");
        files.push(write(&out, &format!("eigenfield_{i:03}.csv"), &seal_text("eigenfield", &body, &p.config))?);
    }
    let shown: Vec<String> = res.eigenvalues.iter().map(|e| format!("{e:.8}")).collect();
    let summary = format!("{} eigenvalues ({}): {}", res.eigenvalues.len(), res.method, shown.join(" "));
    if !res.converged {
        log::warn!("eigensolver stopped before convergence; residuals {:?}", res.residuals);
        return Err(CliError::NotConverged { files, max_residual: res.max_residual() });
    }
    Ok(Outcome { files, summary, passed: true })
}

pub fn check(config: RunConfig) -> Result<Outcome, CliError> {
    config.validate_common()?;
    let c = &config.check;
    let mut lines = Vec::new();
    let mut report_text = String::new();
    let mut passed = true;
    for name in &c.charts {
        let opts = SuiteOptions {
            n: c.n,
            gauges: c.gauges,
            k: c.k,
            seed: config.solver.seed,
            units: config.units(),
            b0: config.field.b0,
            b1: config.field.b1,
            oracle_points: c.oracle_points,
            corrupt_sign: c.corrupt_sign,
        };
        let rep = run_suite(name, &opts)?;
        passed &= rep.passed();
        report_text.push_str(&rep.to_string());
        lines.extend(rep.lines);
    }
    let doc = json!({ "kind": "check", "passed": passed, "lines": lines });
    let out = config.out.clone();
    let files = vec![
        write(&out, "check.json", &seal_json(doc, &config))?,
        write(&out, "check.txt", &seal_text("check", &report_text, &config))?,
    ];
    Ok(Outcome { files, summary: report_text.trim_end().to_string(), passed })
}

pub fn oracle_compare(config: RunConfig) -> Result<Outcome, CliError> {
    let p = Prepared::new(config)?;
    let name = p.chart.name().to_string();
    if !matches!(name.as_str(), "sphere" | "cylinder" | "torus") {
        return Err(CliError::Config(format!("no closed form for the {name}")));
    }
    if !matches!(p.config.field.preset, FieldPreset::Auto) || p.config.field.thin_layer_gauge {
        return Err(CliError::Config("oracle comparison needs the chart's own field preset (preset = \"auto\")".into()));
    }
    let oracle_params = OracleParams {
        units: p.units,
        e_charge: p.config.units.e,
        r: chart_param(p.chart.as_ref(), "r"),
        big_r: chart_param(p.chart.as_ref(), "R0"),
        b0: p.config.field.b0,
        b1: p.config.field.b1,
        phi_e: None,
    };
    // The built-in case fixes which preset the closed form was printed for.
    builtin_case(&name, p.config.field.b0, p.config.field.b1, p.units)?;
    let oracle = closed_form_oracle(&name, &oracle_params)?;
    let op = ContinuumOperator::new(p.chart.as_ref(), &p.field, p.units, p.options.clone());
    let trials = TrialSet::standard(p.chart.as_ref(), p.config.check.oracle_points, p.config.solver.seed);
    let rep = compare_operators(&op, &oracle, &trials, DEFAULT_TOLERANCE)?;
    let mut text = String::new();
    for e in &rep.entries {
        text.push_str(&format!("{} {} residual={:.3e}", e.verdict, e.tag, e.residual));
        if let Some(a) = e.alternative_residual {
            text.push_str(&format!(" alternative={a:.3e}"));
        }
        if !e.note.is_empty() {
            text.push_str(&format!(" ({})", e.note));
        }
        text.push('\n');
    }
    let passed = rep.passed();
    let mut doc = serde_json::to_value(&rep)?;
    doc.as_object_mut().unwrap().insert("kind".into(), json!("oracle-compare"));
    doc.as_object_mut().unwrap().insert("passed".into(), json!(passed));
    let out = p.config.out.clone();
    let files = vec![write(&out, "oracle.json", &seal_json(doc, &p.config))?];
    Ok(Outcome { files, summary: text.trim_end().to_string(), passed })
}

pub fn export_matrix(config: RunConfig) -> Result<Outcome, CliError> {
    let p = Prepared::new(config)?;
    let op = assemble_surface_operator(p.chart.clone(), &p.field, &p.grid, p.units, &p.options)?;
    let disc = discretize(&op)?;
    let mut buf = Vec::new();
    write_matrix_triplets(&mut buf, &disc.matrix)?;
    let body = String::from_utf8(buf).expect("utf8");
    let out = p.config.out.clone();
    let mut weights = String::from("node,q1,q2,weight\n");
    for (k, (q, w)) in disc.coords.iter().zip(&disc.weights).enumerate() {
        weights.push_str(&format!("{k},{:?},{:?},{:?}\n", q[0], q[1], w));
    }
    let files = vec![
        write(&out, "matrix.txt", &seal_text("matrix", &body, &p.config))?,
        write(&out, "weights.csv", &seal_text("weights", &weights, &p.config))?,
    ];
    let summary = format!(
        "dimension {} with {} stored entries, hermiticity residual {:.2e}",
        disc.dimension(),
        disc.matrix.nnz(),
        disc.hermiticity_residual
    );
    Ok(Outcome { files, summary, passed: true })
}
