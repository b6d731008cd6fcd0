use std::fmt;

use crate::net::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter failed its invariant; `name` is the offending field.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    Domain {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("equilibrium solver failed: {0}")]
    SolverFailure(String),

    #[error("solving {point}: {source}")]
    GridPoint {
        point: GridPoint,
        #[source]
        source: Box<Error>,
    },

    #[error("hinge {hinge}: {source}")]
    Hinge {
        hinge: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown polyhedron `{0}`")]
    UnknownPolyhedron(String),

    #[error("design query has no candidates")]
    EmptyCandidates,

    #[error("invalid net:{}", ViolationList(.0))]
    InvalidNet(Vec<Violation>),

    #[error("no fold angle given for hinge {hinge}")]
    MissingAngle { hinge: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::SolverFailure(_) | Error::Degenerate(_) => true,
            Error::GridPoint { source, .. } | Error::Hinge { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// True for read/write failures of files or streams.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            Error::GridPoint { source, .. } | Error::Hinge { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

/// Identifies one point of a design sweep in error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub band: String,
    pub layers: Option<u32>,
    pub hook_spacing: f64,
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "band {}", self.band)?;
        if let Some(layers) = self.layers {
            write!(f, ", {layers} layers")?;
        }
        write!(f, ", hook spacing {:.4} mm", self.hook_spacing * 1e3)
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}
