use thiserror::Error;

/// Errors raised by the geometry, field, assembly and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate metric at ({q1}, {q2}): det g = {det:e} (coordinate singularity)")]
    DegenerateMetric { q1: f64, q2: f64, det: f64 },

    #[error("normal fan collapses at q3 = {q3}: f = {f:e}")]
    FanCollapse { q3: f64, f: f64 },

    #[error("point ({q1}, {q2}) lies outside the chart domain")]
    OutsideDomain { q1: f64, q2: f64 },

    #[error("unknown chart `{0}`")]
    UnknownChart(String),

    #[error("invalid chart parameter: {0}")]
    ChartParameter(String),

    #[error("tabulated chart: {0}")]
    Tabulated(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("integration of A3 failed at ({q1}, {q2}, {q3})")]
    IntegrationFailure { q1: f64, q2: f64, q3: f64 },

    #[error(
        "vector potential has a normal component A3 = {a3:e} on the surface at ({q1}, {q2}); \
         apply thin_layer_gauge before assembly"
    )]
    GaugePrecondition { q1: f64, q2: f64, a3: f64 },

    #[error("unsupported closed form: {0}")]
    UnsupportedOracle(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("inconsistent boundary specification: {0}")]
    Boundary(String),

    #[error("invalid units: {0}")]
    Units(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("spinor branch propagation failed: {0}")]
    Branch(String),

    #[error("eigensolver: {0}")]
    Eigensolver(String),

    #[error("field is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("observable: {0}")]
    Observable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
