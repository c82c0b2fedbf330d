//! Fixed-point angle quantization.
//!
//! Angles are stored as signed 32-bit integers in units of 2^-16 degree,
//! rounded to nearest (ties away from zero), so the stored value is within
//! 2^-17 degree of the input. Azimuth-like angles (`[-180, 180)`) that round up
//! to exactly +180 are stored as -180. Range extents never quantize below one
//! unit.

use super::CodecError;
use crate::geometry::{SphereRegion, ViewingOrientation};
use crate::model::{MetadataPayload, Presentation, RankedRegion, Rotation};

pub const ANGLE_UNITS_PER_DEGREE: f64 = 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AngleKind {
    /// Half-open `[-180, 180)` angles: azimuth, tilt, yaw, roll, north offset.
    Wrapped,
    /// Elevation and pitch.
    Plain,
    /// Strictly positive extents.
    Range,
}

pub(crate) fn to_fixed(deg: f64, kind: AngleKind) -> Result<i32, CodecError> {
    let units = (deg * ANGLE_UNITS_PER_DEGREE).round();
    if !units.is_finite() || units < f64::from(i32::MIN) || units > f64::from(i32::MAX) {
        return Err(CodecError::AngleOutOfRange(deg));
    }
    let mut q = units as i32;
    match kind {
        AngleKind::Wrapped if q == 180 * 65536 => q = -180 * 65536,
        AngleKind::Range => q = q.max(1),
        _ => {}
    }
    Ok(q)
}

/// Value of a plain angle after a store/load cycle.
pub fn quantize_angle(deg: f64) -> f64 {
    (deg * ANGLE_UNITS_PER_DEGREE).round() / ANGLE_UNITS_PER_DEGREE
}

/// Like [`quantize_angle`] but folds +180 onto -180.
pub fn quantize_wrapped(deg: f64) -> f64 {
    let q = quantize_angle(deg);
    if q == 180.0 {
        -180.0
    } else {
        q
    }
}

/// Like [`quantize_angle`] but never below one unit.
pub fn quantize_range(deg: f64) -> f64 {
    quantize_angle(deg).max(1.0 / ANGLE_UNITS_PER_DEGREE)
}

fn q_orientation(o: &mut ViewingOrientation) {
    o.azimuth = quantize_wrapped(o.azimuth);
    o.elevation = quantize_angle(o.elevation);
    o.tilt = quantize_wrapped(o.tilt);
}

fn q_region(r: &mut SphereRegion) {
    q_orientation(&mut r.center);
    r.azimuth_range = quantize_range(r.azimuth_range);
    r.elevation_range = quantize_range(r.elevation_range);
}

fn q_rotation(r: &mut Rotation) {
    r.yaw = quantize_wrapped(r.yaw);
    r.pitch = quantize_angle(r.pitch);
    r.roll = quantize_wrapped(r.roll);
}

/// The presentation as it reads back from an OMB file: every angle field
/// quantized, everything else untouched.
pub fn quantize(p: &Presentation) -> Presentation {
    let mut p = p.clone();
    for t in &mut p.tracks {
        if let Some(c) = t.coverage.as_mut() {
            q_region(c);
        }
    }
    for v in &mut p.viewpoints {
        q_rotation(&mut v.orientation);
        if let Some(n) = v.north_offset.as_mut() {
            *n = quantize_wrapped(*n);
        }
        for r in &mut v.switch_rules {
            if let Some(a) = r.activation_region.as_mut() {
                q_region(a);
            }
        }
    }
    for o in &mut p.overlays {
        if let Some(s) = o.rendering.sphere_position.as_mut() {
            q_region(s);
        }
        if let Some(pl) = o.rendering.plane_position.as_mut() {
            q_orientation(&mut pl.center);
        }
        if let Some(t) = o.interaction.toggle_region.as_mut() {
            q_region(t);
        }
    }
    for t in &mut p.timed_metadata {
        for s in &mut t.samples {
            match &mut s.payload {
                MetadataPayload::InitialViewingOrientation { orientation } => q_orientation(orientation),
                MetadataPayload::RecommendedViewport { region } => q_region(region),
                MetadataPayload::Rwqr(rw) => {
                    for e in &mut rw.entries {
                        if let RankedRegion::Sphere(r) = &mut e.region {
                            q_region(r);
                        }
                    }
                }
                MetadataPayload::ErpRegion(_)
                | MetadataPayload::DynamicViewpoint(_)
                | MetadataPayload::OverlayControls(_) => {}
            }
        }
    }
    p
}
