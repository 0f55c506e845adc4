use thiserror::Error;

/// Failure modes across ingestion, fusion, evaluation and export.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("box for image `{image_id}` is degenerate after clamping to {width}x{height}")]
    DegenerateBox {
        image_id: String,
        width: u32,
        height: u32,
    },

    #[error("unknown distress class `{code}`{at}")]
    UnknownClass { code: String, at: String },

    #[error("confidence {value} outside [0, 1]{at}")]
    ConfidenceOutOfRange { value: f64, at: String },

    #[error("view `{view_id}` is not declared in the run manifest{at}")]
    UnknownView { view_id: String, at: String },

    #[error("parse error in {file} ({context}): {msg}")]
    Parse {
        file: String,
        context: String,
        msg: String,
    },

    #[error("no metadata entry for image `{image_id}`")]
    MissingMeta { image_id: String },

    #[error("image `{image_id}` carries no country tag")]
    MissingCountry { image_id: String },

    #[error("malformed EXIF metadata: {0}")]
    MalformedExif(String),

    #[error("coordinate ({lat}, {lon}) outside valid latitude/longitude ranges")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid cell (conf={conf}, nms={nms}) failed: {msg}")]
    GridCell { conf: f64, nms: f64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Location suffix for record-level errors, e.g. ` (dets.txt, line 14)`.
pub(crate) fn at(file: &str, context: &str) -> String {
    format!(" ({file}, {context})")
}
