//! Toolkit for omnidirectional (360°) media presentations.
//!
//! * [`geometry`]: ERP/CMP projections, viewport regions, solid angles.
//! * [`model`]: presentation document model and validation.
//! * [`codec`]: the OMB box container.
//! * [`conformance`]: media profile and operation point tables.
//! * [`dash`]: MPD generation and parsing for viewpoint and overlay descriptors.
//! * [`playback`]: overlay and viewpoint state engines, compositing.
//! * [`strategy`]: viewport-dependent tile selection and session simulation.

pub mod codec;
pub mod conformance;
pub mod dash;
pub mod geometry;
pub mod model;
pub mod playback;
pub mod strategy;
