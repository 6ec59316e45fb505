use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// The CLI maps variants onto its documented exit codes; the groupings
/// matter there (geometry problems, degenerate critical points, a
/// non-positive bifurcation coefficient and integration blow-up each get
/// their own code).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("radius {r} lies outside the annulus [{r1}, {r2}]")]
    OutOfAnnulus { r: f64, r1: f64, r2: f64 },

    #[error(
        "degenerate critical point: lambda_{m_a} and lambda_{m_b} tie at {lambda:.9} \
         (relative gap {gap:.3e})"
    )]
    DegenerateCritical {
        m_a: u32,
        m_b: u32,
        lambda: f64,
        gap: f64,
    },

    #[error("critical scan reached m = {m_max} with lambda_m still decreasing; increase m_max")]
    ScanExhausted { m_max: u32 },

    #[error("quadrature grid too coarse: exact up to wavenumber {supported}, need {needed}")]
    GridTooCoarse { supported: u32, needed: u32 },

    #[error("truncation ({max_m}, {max_n}) too small; need at least (1, 1)")]
    TruncationTooSmall { max_m: u32, max_n: u32 },

    #[error("reduction contradicts gamma > 0: computed gamma = {gamma:.6e}")]
    NonPositiveGamma { gamma: f64 },

    #[error("slaved mode {0} has zero growth rate at the critical parameter")]
    SlavedModeDegenerate(String),

    #[error("control parameter {lambda:.6} is below critical {lambda0:.6}; no bifurcated state")]
    Subcritical { lambda: f64, lambda0: f64 },

    #[error("integration blow-up at t = {t:.6}: |u| = {norm:.3e} (reduce dt or enlarge truncation)")]
    BlowUp { t: f64, norm: f64 },

    #[error("streamfunction vanishes everywhere: no flow to count cells in")]
    NoFlow,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
