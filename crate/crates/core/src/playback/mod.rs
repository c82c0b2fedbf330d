//! Playback state engines.
//!
//! Every transition is a pure function from an old state to a new one; the
//! engines hold no interior mutability and can be moved across threads.

mod metadata;
mod overlay;
mod raster;
mod viewpoint;

pub use metadata::{sample_timed_metadata, SampleLookup};
pub use overlay::{cull_by_priority, overlay_displayed, resolve_draw_order, OverlayFlags, OverlayState};
pub use raster::{compose, read_pgm, read_ppm, write_pgm, write_ppm, Layer, Raster};
pub use viewpoint::{
    haversine_m, select_viewpoint_by_gps, PlaybackEvent, PlaybackState, SwitchCause, ViewpointEngine, EARTH_RADIUS_M,
};

use crate::geometry::GeometryError;
use crate::model::OverlayControl;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlaybackError {
    #[error("unknown overlay {0}")]
    UnknownOverlay(u32),
    #[error("unknown viewpoint {0:?}")]
    UnknownViewpoint(String),
    #[error("usage error: rule does not belong to viewpoint {0:?}")]
    ForeignRule(String),
    #[error("usage error: viewpoint {viewpoint:?} has no switch rule {index}")]
    UnknownRule { viewpoint: String, index: usize },
    #[error("ESSENTIAL_OVERFLOW: {essential} essential overlays exceed capacity {capacity} by {}", essential - capacity)]
    EssentialOverflow { essential: usize, capacity: usize },
    #[error("NO_CANDIDATE: no viewpoint carries a GPS position")]
    NoCandidate,
    #[error("usage error: timed metadata track {0} has no samples")]
    EmptyTrack(u32),
    #[error("overlay {overlay} does not allow the {control:?} control")]
    ControlNotAllowed { overlay: u32, control: OverlayControl },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("raster buffer holds {actual} bytes, expected {expected}")]
    RasterSize { expected: usize, actual: usize },
    #[error("malformed PNM image: {0}")]
    Pnm(String),
}

impl PlaybackError {
    pub fn code(&self) -> &'static str {
        match self {
            PlaybackError::UnknownOverlay(_) => "UNKNOWN_OVERLAY",
            PlaybackError::UnknownViewpoint(_) => "UNKNOWN_VIEWPOINT",
            PlaybackError::ForeignRule(_) | PlaybackError::UnknownRule { .. } | PlaybackError::EmptyTrack(_) => "USAGE",
            PlaybackError::EssentialOverflow { .. } => "ESSENTIAL_OVERFLOW",
            PlaybackError::NoCandidate => "NO_CANDIDATE",
            PlaybackError::ControlNotAllowed { .. } => "CONTROL_NOT_ALLOWED",
            PlaybackError::Geometry(_) => "GEOMETRY",
            PlaybackError::RasterSize { .. } | PlaybackError::Pnm(_) => "RASTER",
        }
    }
}
