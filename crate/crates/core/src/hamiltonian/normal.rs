//! Text report on the normal (q3) part of the confined problem.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NormalModel {
    None,
    /// Infinite square well of the given width across the layer.
    HardWall { width: f64, hbar: f64, mass: f64, levels: usize },
}

/// `n^2 pi^2 hbar^2 / (2 m w^2)` for `n = 1..=levels`.
pub fn hard_wall_levels(width: f64, hbar: f64, mass: f64, levels: usize) -> Vec<f64> {
    (1..=levels).map(|n| (n * n) as f64 * PI * PI * hbar * hbar / (2.0 * mass * width * width)).collect()
}

pub fn normal_mode_report(model: NormalModel) -> String {
    let mut out = String::from(
        "normal motion: one-dimensional problem in q3 with the confining potential, \
         separated from the surface equation in the thin-layer gauge; it only shifts \
         surface energies by a constant and is not part of the surface solve\n",
    );
    if let NormalModel::HardWall { width, hbar, mass, levels } = model {
        let _ = writeln!(out, "hard wall, width {width}:");
        for (n, e) in hard_wall_levels(width, hbar, mass, levels).iter().enumerate() {
            let _ = writeln!(out, "  n={} E={e:.6e}", n + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_width_quadruples_levels() {
        let a = hard_wall_levels(1.0, 1.0, 1.0, 3);
        let b = hard_wall_levels(0.5, 1.0, 1.0, 3);
        for (x, y) in a.iter().zip(&b) {
            assert!((y / x - 4.0).abs() < 1e-12);
        }
        assert!((a[1] / a[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn plain_report_has_no_levels() {
        let r = normal_mode_report(NormalModel::None);
        assert!(!r.contains("E="));
        let r = normal_mode_report(NormalModel::HardWall { width: 1.0, hbar: 1.0, mass: 1.0, levels: 2 });
        assert_eq!(r.matches("E=").count(), 2);
    }
}
