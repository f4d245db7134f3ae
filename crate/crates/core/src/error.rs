use thiserror::Error;

/// Errors surfaced by configuration, parsing, and run assembly.
///
/// Every variant names the offending field or input so callers can emit a
/// usable diagnostic without string matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("width must be in 1..=64, got {0}")]
    WidthOutOfRange(u8),

    #[error("trigger bit index {index} out of range for width {width}")]
    TriggerIndexOutOfRange { index: u8, width: u8 },

    #[error("unknown design id `{0}` (expected edge8, lfsr32, mouse_ps2 or uart_rx)")]
    UnknownDesign(String),

    #[error("unknown table preset `{0}` (expected table1, table2, table4 or table5)")]
    UnknownPreset(String),

    #[error("invalid trojan descriptor `{descriptor}`: {reason}")]
    Descriptor { descriptor: String, reason: String },

    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("trace line {line}: {reason}")]
    TraceParse { line: usize, reason: String },

    #[error("trace is for design `{trace}` but the run targets `{run}`")]
    DesignMismatch { trace: String, run: String },

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("grid cell {index}: {source}")]
    GridCell {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn field(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}
