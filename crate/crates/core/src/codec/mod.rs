//! The OMB container: a presentation stored as a flat list of size + fourcc
//! boxes. The byte layout is documented in `docs/format.md`.

mod boxes;
mod fields;
mod presentation;
mod quantize;

pub use boxes::{
    box_size, decode_box_tree, encode_box_tree, is_container, BoxPayload, FourCc, OmbBox, CONTAINERS, MAX_PAYLOAD,
};
pub use presentation::{decode_presentation, encode_presentation, FORMAT_VERSION};
pub use quantize::{quantize, quantize_angle, quantize_range, quantize_wrapped, ANGLE_UNITS_PER_DEGREE};

/// Box codes of the top-level structures.
pub mod fourcc {
    pub use super::boxes::{OMHD, OVLY, SMPL, TGHD, TGMB, TILG, TMHD, TMTD, TRKD, VLOP, VPHD, VSWR, VWPT, VWSP};
}

use crate::model::ValidationReport;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("box at offset {offset} declares {declared} bytes but only {available} remain")]
    Truncated {
        offset: usize,
        declared: u64,
        available: usize,
    },
    #[error("box at offset {offset} has size {size}, below the 8-byte header")]
    SizeTooSmall { offset: usize, size: u32 },
    #[error("box at offset {offset} nests too deeply")]
    TooDeep { offset: usize },
    #[error("{fourcc} payload of {payload_len} bytes does not fit a 32-bit box size")]
    Capacity { fourcc: FourCc, payload_len: u64 },
    #[error("{fourcc} payload ends before field `{field}`")]
    ShortPayload { fourcc: FourCc, field: &'static str },
    #[error("{fourcc} field `{field}` has invalid value {value}")]
    InvalidValue {
        fourcc: FourCc,
        field: &'static str,
        value: u64,
    },
    #[error("{fourcc} field `{field}` is not valid UTF-8")]
    InvalidUtf8 { fourcc: FourCc, field: &'static str },
    #[error("{fourcc} payload has {count} unexpected trailing bytes")]
    TrailingBytes { fourcc: FourCc, count: usize },
    #[error("{fourcc} box is missing its '{child}' child")]
    MissingChild { fourcc: FourCc, child: FourCc },
    #[error("{fourcc} box appears more than once")]
    DuplicateBox { fourcc: FourCc },
    #[error("input does not start with an 'omhd' header box")]
    MissingHeader,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("angle {0} does not fit the fixed-point range")]
    AngleOutOfRange(f64),
    #[error("presentation fails validation with {} error(s)", .0.error_count())]
    Invalid(ValidationReport),
}
