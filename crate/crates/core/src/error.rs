use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("order-{0} tile cannot be split")]
    CannotSplit(u32),

    #[error("aperture {rows}x{cols} is not tileable with order-{order} tiles ({reason:?}); choose another order")]
    NotTileable {
        rows: usize,
        cols: usize,
        order: u32,
        reason: crate::geometry::TileabilityReason,
    },

    #[error("no tile of order >= 2 is left to split")]
    NoSplittableTile,

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("pattern is identically zero; cannot normalize")]
    ZeroPattern,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("format error in {source_name}: {message}")]
    Format { source_name: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            message: message.into(),
        }
    }
}
