//! Term-by-term comparison of the assembled operator against a closed form.

use super::continuum::{ContinuumOperator, SpinorJet};
use super::oracle::{ClosedFormOperator, TermFn};
use super::{CVec2, TermGroup};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        })
    }
}

/// Result for one term group, or for a text note.
#[derive(Clone, Debug, Serialize)]
pub struct TermStatus {
    pub tag: String,
    pub group: Option<TermGroup>,
    pub printed_tags: Vec<&'static str>,
    /// Max residual of assembled minus printed.
    pub residual: f64,
    /// Max residual of assembled minus the allowance replacement.
    pub alternative_residual: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub chart: String,
    pub tolerance: f64,
    pub trials: usize,
    pub entries: Vec<TermStatus>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> Vec<&TermStatus> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Fail).collect()
    }

    pub fn entry(&self, tag: &str) -> Option<&TermStatus> {
        self.entries.iter().find(|e| e.tag == tag)
    }

    pub fn max_unexplained_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.verdict != Verdict::Info && e.group.is_some())
            .map(|e| e.residual)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            write!(f, "{} {}/{} residual={:.3e}", e.verdict, self.chart, e.tag, e.residual)?;
            if let Some(a) = e.alternative_residual {
                write!(f, " alternative={a:.3e}")?;
            }
            if !e.note.is_empty() {
                write!(f, " ({})", e.note)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Sample points with trial spinor jets.
#[derive(Clone, Debug)]
pub struct TrialSet {
    pub samples: Vec<([f64; 2], Vec<SpinorJet>)>,
}

impl TrialSet {
    /// Plane waves and localized Gaussians at `n` random interior points.
    pub fn standard(chart: &dyn crate::geometry::SurfaceChart, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = chart.domain();
        let per = chart.periodic();
        let spinors = [
            CVec2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            CVec2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            CVec2::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)),
        ];
        let waves = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, -1.0], [-1.5, 3.0]];
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let mut q = [0.0; 2];
            for a in 0..2 {
                let (lo, hi) = d.axis(a);
                let margin = if per[a] { 0.0 } else { 0.1 * (hi - lo) };
                q[a] = rng.random_range(lo + margin..hi - margin);
            }
            let mut jets = Vec::new();
            for s in &spinors {
                for k in &waves {
                    jets.push(SpinorJet::plane_wave(q, *k, *s));
                }
                let center = [q[0] + rng.random_range(-0.2..0.2), q[1] + rng.random_range(-0.2..0.2)];
                jets.push(SpinorJet::gaussian(q, center, 0.35, [1.0, -2.0], *s));
            }
            samples.push((q, jets));
        }
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.iter().map(|s| s.1.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn residual(a: &CVec2, b: &CVec2) -> f64 {
    (a - b).norm() / (1.0f64).max(a.norm() + b.norm())
}

/// Compare every term group of `assembled` against `oracle` on the trial set.
///
/// Groups the printed form does not mention must vanish unless allowed.
/// The sum of groups is also checked against differentiating through the rotation.
pub fn compare_operators(
    assembled: &ContinuumOperator<'_>,
    oracle: &ClosedFormOperator,
    trials: &TrialSet,
    tolerance: f64,
) -> Result<ComparisonReport> {
    if assembled.chart.name() != oracle.chart {
        return Err(Error::GridMismatch(format!(
            "assembled operator is on '{}', closed form on '{}'",
            assembled.chart.name(),
            oracle.chart
        )));
    }
    let groups = TermGroup::ALL;
    let mut printed = vec![0.0f64; groups.len()];
    let mut alternative = vec![0.0f64; groups.len()];
    let mut prose = vec![0.0f64; oracle.prose.len()];
    let mut mechanism: f64 = 0.0;
    for (q, jets) in &trials.samples {
        let cf = assembled.coefficients(*q)?;
        for jet in jets {
            let mut total = CVec2::zeros();
            for (gi, g) in groups.iter().enumerate() {
                let mine = assembled.apply_group_with(&cf, *g, jet);
                total += mine;
                printed[gi] = printed[gi].max(residual(&mine, &oracle.apply_group(*g, *q, jet)));
                if let Some(al) = oracle.allowance(*g) {
                    alternative[gi] = alternative[gi].max(residual(&mine, &(al.alternative)(*q, jet)));
                }
            }
            for (pi, note) in oracle.prose.iter().enumerate() {
                let mine = assembled.apply_group_with(&cf, note.group, jet);
                prose[pi] = prose[pi].max(residual(&mine, &(note.term)(*q, jet)));
            }
            let through = assembled.apply_through_rotation(*q, jet)?;
            mechanism = mechanism.max(residual(&total, &through));
        }
    }

    let mut entries = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let tags: Vec<&'static str> = oracle.terms_for(*g).iter().map(|t| t.tag).collect();
        let (verdict, alt, note) = match oracle.allowance(*g) {
            Some(al) => {
                let ok = alternative[gi] <= tolerance;
                let verdict = if ok { Verdict::Info } else { Verdict::Fail };
                let note = if ok {
                    al.note.to_string()
                } else {
                    format!("{}; replacement does not match either", al.note)
                };
                (verdict, Some(alternative[gi]), note)
            }
            None => {
                let ok = printed[gi] <= tolerance;
                let note = if tags.is_empty() { "absent from the printed form, must vanish".to_string() } else { String::new() };
                (if ok { Verdict::Pass } else { Verdict::Fail }, None, note)
            }
        };
        entries.push(TermStatus {
            tag: g.tag().to_string(),
            group: Some(*g),
            printed_tags: tags,
            residual: printed[gi],
            alternative_residual: alt,
            verdict,
            note,
        });
    }
    for (pi, note) in oracle.prose.iter().enumerate() {
        entries.push(TermStatus {
            tag: note.tag.to_string(),
            group: None,
            printed_tags: Vec::new(),
            residual: prose[pi],
            alternative_residual: None,
            verdict: Verdict::Info,
            note: note.note.to_string(),
        });
    }
    entries.push(TermStatus {
        tag: "through_rotation".to_string(),
        group: None,
        printed_tags: Vec::new(),
        residual: mechanism,
        alternative_residual: None,
        verdict: if mechanism <= tolerance { Verdict::Pass } else { Verdict::Fail },
        note: "sum of groups vs U H_lab U^-1".to_string(),
    });
    Ok(ComparisonReport { chart: oracle.chart.to_string(), tolerance, trials: trials.len(), entries })
}

/// Max residual between two arbitrary term functions on a trial set.
pub fn term_residual(a: &TermFn, b: &TermFn, trials: &TrialSet) -> f64 {
    let mut worst: f64 = 0.0;
    for (q, jets) in &trials.samples {
        for j in jets {
            worst = worst.max(residual(&a(*q, j), &b(*q, j)));
        }
    }
    worst
}
