//! Spherical and projection math.
//!
//! Conventions used everywhere in this crate:
//!
//! * Angles are `f64` degrees.
//! * Azimuth grows counter-clockwise seen from above: positive azimuth is to
//!   the *left* of the forward direction. Elevation is positive upward.
//! * The unit direction for (azimuth, elevation) is
//!   `x = cos(el)·cos(az)`, `y = sin(el)`, `z = -cos(el)·sin(az)`, i.e. `+X`
//!   is forward, `+Y` is up and `+Z` is to the right (right-handed).
//! * Sphere regions are bounded by two azimuth circles and two elevation
//!   circles (a rectangle in azimuth/elevation space).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("pixel ({u}, {v}) outside picture {width}x{height}")]
    PixelOutOfBounds { u: f64, v: f64, width: u32, height: u32 },
    #[error("field of view {hfov}x{vfov} outside (0, 360] x (0, 180]")]
    FovOutOfRange { hfov: f64, vfov: f64 },
    #[error("sphere region ranges {azimuth_range}x{elevation_range} outside (0, 360] x (0, 180]")]
    RegionRange { azimuth_range: f64, elevation_range: f64 },
    #[error("picture dimensions must be non-zero, got {width}x{height}")]
    ZeroDims { width: u32, height: u32 },
    #[error("rectangle {w}x{h}+{x}+{y} outside picture {width}x{height}", x = rect.x, y = rect.y, w = rect.width, h = rect.height)]
    RectOutOfBounds { rect: Rect2D, width: u32, height: u32 },
}

/// Wraps any finite angle into `[-180, 180)`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut r = deg - 360.0 * ((deg + 180.0) / 360.0).floor();
    if r >= 180.0 {
        r -= 360.0;
    }
    if r < -180.0 {
        r += 360.0;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewingOrientation {
    pub azimuth: f64,
    pub elevation: f64,
    pub tilt: f64,
}

impl ViewingOrientation {
    pub const fn new(azimuth: f64, elevation: f64, tilt: f64) -> Self {
        Self {
            azimuth,
            elevation,
            tilt,
        }
    }

    pub const fn az_el(azimuth: f64, elevation: f64) -> Self {
        Self::new(azimuth, elevation, 0.0)
    }

    /// Maps arbitrary angles onto the canonical ranges. Elevations past a pole
    /// are reflected back over it, which turns the azimuth (and tilt) around
    /// by 180 degrees.
    pub fn normalized(self) -> Self {
        let mut az = self.azimuth;
        let mut tilt = self.tilt;
        let mut el = wrap_degrees(self.elevation);
        if el > 90.0 {
            el = 180.0 - el;
            az += 180.0;
            tilt += 180.0;
        } else if el < -90.0 {
            el = -180.0 - el;
            az += 180.0;
            tilt += 180.0;
        }
        Self {
            azimuth: wrap_degrees(az),
            elevation: el,
            tilt: wrap_degrees(tilt),
        }
    }

    pub fn is_normalized(&self) -> bool {
        (-180.0..180.0).contains(&self.azimuth)
            && (-90.0..=90.0).contains(&self.elevation)
            && (-180.0..180.0).contains(&self.tilt)
    }

    pub fn is_finite(&self) -> bool {
        self.azimuth.is_finite() && self.elevation.is_finite() && self.tilt.is_finite()
    }

    /// Unit direction vector (tilt does not affect the direction).
    pub fn direction(&self) -> [f64; 3] {
        let (az, el) = (self.azimuth.to_radians(), self.elevation.to_radians());
        [el.cos() * az.cos(), el.sin(), -el.cos() * az.sin()]
    }

    /// Inverse of [`direction`](Self::direction); `d` need not be unit length.
    pub fn from_direction(d: [f64; 3]) -> Self {
        let horiz = (d[0] * d[0] + d[2] * d[2]).sqrt();
        let el = d[1].atan2(horiz).to_degrees();
        let az = if horiz == 0.0 {
            0.0
        } else {
            (-d[2]).atan2(d[0]).to_degrees()
        };
        Self::az_el(wrap_degrees(az), el)
    }
}

/// Picture size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PictureDims {
    pub width: u32,
    pub height: u32,
}

impl PictureDims {
    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::ZeroDims { width, height });
        }
        Ok(Self { width, height })
    }

    /// ERP pictures are conventionally twice as wide as they are tall.
    pub fn is_erp_aspect(&self) -> bool {
        u64::from(self.width) == 2 * u64::from(self.height)
    }
}

/// Pixel rectangle with a top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect2D {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect2D {
    pub const fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self { x, y, width, height }
    }

    pub fn right(&self) -> u64 {
        u64::from(self.x) + u64::from(self.width)
    }

    pub fn bottom(&self) -> u64 {
        u64::from(self.y) + u64::from(self.height)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn fits_within(&self, dims: PictureDims) -> bool {
        self.width > 0
            && self.height > 0
            && self.right() <= u64::from(dims.width)
            && self.bottom() <= u64::from(dims.height)
    }

    pub fn intersects(&self, other: &Rect2D) -> bool {
        u64::from(self.x) < other.right()
            && u64::from(other.x) < self.right()
            && u64::from(self.y) < other.bottom()
            && u64::from(other.y) < self.bottom()
    }
}

/// A sphere region bounded by two azimuth and two elevation circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereRegion {
    pub center: ViewingOrientation,
    pub azimuth_range: f64,
    pub elevation_range: f64,
}

impl SphereRegion {
    pub fn new(center: ViewingOrientation, azimuth_range: f64, elevation_range: f64) -> Result<Self, GeometryError> {
        let r = Self {
            center,
            azimuth_range,
            elevation_range,
        };
        if !r.has_valid_ranges() {
            return Err(GeometryError::RegionRange {
                azimuth_range,
                elevation_range,
            });
        }
        Ok(r)
    }

    pub fn full_sphere() -> Self {
        Self {
            center: ViewingOrientation::default(),
            azimuth_range: 360.0,
            elevation_range: 180.0,
        }
    }

    pub fn has_valid_ranges(&self) -> bool {
        self.azimuth_range > 0.0
            && self.azimuth_range <= 360.0
            && self.elevation_range > 0.0
            && self.elevation_range <= 180.0
    }

    /// Elevation bounds, clamped to the poles.
    pub fn elevation_bounds(&self) -> (f64, f64) {
        let half = self.elevation_range / 2.0;
        (
            (self.center.elevation - half).max(-90.0),
            (self.center.elevation + half).min(90.0),
        )
    }

    pub fn covers_full_sphere(&self) -> bool {
        let (lo, hi) = self.elevation_bounds();
        self.azimuth_range >= 360.0 && lo <= -90.0 && hi >= 90.0
    }

    /// Whether the direction at (`azimuth`, `elevation`) lies inside the
    /// region, boundaries included. Handles the ±180 seam.
    pub fn contains(&self, azimuth: f64, elevation: f64) -> bool {
        let (lo, hi) = self.elevation_bounds();
        if elevation < lo || elevation > hi {
            return false;
        }
        self.contains_azimuth_offset(wrap_degrees(azimuth - self.center.azimuth))
    }

    fn contains_azimuth_offset(&self, offset: f64) -> bool {
        self.azimuth_range >= 360.0 || offset.abs() <= self.azimuth_range / 2.0
    }
}

impl fmt::Display for SphereRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "center ({}, {}) range {}x{}",
            self.center.azimuth, self.center.elevation, self.azimuth_range, self.elevation_range
        )
    }
}

/// Continuous ERP pixel coordinate of an orientation.
pub fn erp_sphere_to_pixel(o: ViewingOrientation, dims: PictureDims) -> (f64, f64) {
    let u = (0.5 - o.azimuth / 360.0) * f64::from(dims.width);
    let v = (0.5 - o.elevation / 180.0) * f64::from(dims.height);
    (u, v)
}

/// Inverse of [`erp_sphere_to_pixel`]; tilt of the result is 0.
pub fn erp_pixel_to_sphere(u: f64, v: f64, dims: PictureDims) -> Result<ViewingOrientation, GeometryError> {
    let (w, h) = (f64::from(dims.width), f64::from(dims.height));
    if !(0.0..=w).contains(&u) || !(0.0..=h).contains(&v) {
        return Err(GeometryError::PixelOutOfBounds {
            u,
            v,
            width: dims.width,
            height: dims.height,
        });
    }
    let azimuth = wrap_degrees((0.5 - u / w) * 360.0);
    let elevation = (0.5 - v / h) * 180.0;
    Ok(ViewingOrientation::az_el(azimuth, elevation))
}

/// Cube faces, listed in tie-break priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CubeFace {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [
        CubeFace::PosX,
        CubeFace::NegX,
        CubeFace::PosY,
        CubeFace::NegY,
        CubeFace::PosZ,
        CubeFace::NegZ,
    ];

    pub fn normal(self) -> [f64; 3] {
        match self {
            CubeFace::PosX => [1.0, 0.0, 0.0],
            CubeFace::NegX => [-1.0, 0.0, 0.0],
            CubeFace::PosY => [0.0, 1.0, 0.0],
            CubeFace::NegY => [0.0, -1.0, 0.0],
            CubeFace::PosZ => [0.0, 0.0, 1.0],
            CubeFace::NegZ => [0.0, 0.0, -1.0],
        }
    }

    /// Direction that points to the top row of the face image, seen from the
    /// cube centre. Side faces use `+Y`; the top face has forward (`+X`) at its
    /// bottom edge and the bottom face has forward at its top edge.
    pub fn up(self) -> [f64; 3] {
        match self {
            CubeFace::PosY => [-1.0, 0.0, 0.0],
            CubeFace::NegY => [1.0, 0.0, 0.0],
            _ => [0.0, 1.0, 0.0],
        }
    }

    /// Direction of increasing `u` on the face: `normal × up`.
    pub fn right(self) -> [f64; 3] {
        cross(self.normal(), self.up())
    }

    /// Position of the face in the packed 3x2 layout, as (column, row):
    /// `+X -X +Y` on the first row, `-Y +Z -Z` on the second.
    pub fn packed_cell(self) -> (u32, u32) {
        let i = self as u32;
        (i % 3, i / 3)
    }

    pub fn label(self) -> &'static str {
        match self {
            CubeFace::PosX => "+X",
            CubeFace::NegX => "-X",
            CubeFace::PosY => "+Y",
            CubeFace::NegY => "-Y",
            CubeFace::PosZ => "+Z",
            CubeFace::NegZ => "-Z",
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Gnomonic cube-map projection. The face is picked by the dominant axis of
/// the direction; exact ties go to the earlier face in [`CubeFace::ALL`].
pub fn cmp_sphere_to_face_pixel(o: ViewingOrientation, face_size: u32) -> (CubeFace, f64, f64) {
    let d = o.direction();
    let mut best = CubeFace::PosX;
    let mut best_val = f64::NEG_INFINITY;
    for face in CubeFace::ALL {
        let v = dot(d, face.normal());
        if v > best_val {
            best = face;
            best_val = v;
        }
    }
    let p = [d[0] / best_val, d[1] / best_val, d[2] / best_val];
    let a = dot(p, best.right()).clamp(-1.0, 1.0);
    let b = dot(p, best.up()).clamp(-1.0, 1.0);
    let s = f64::from(face_size);
    (best, (a + 1.0) / 2.0 * s, (1.0 - b) / 2.0 * s)
}

/// Inverse of [`cmp_sphere_to_face_pixel`] for a point on a face.
pub fn cmp_face_pixel_to_sphere(face: CubeFace, u: f64, v: f64, face_size: u32) -> ViewingOrientation {
    let s = f64::from(face_size);
    let a = 2.0 * u / s - 1.0;
    let b = 1.0 - 2.0 * v / s;
    let (n, r, w) = (face.normal(), face.right(), face.up());
    let d = [
        n[0] + a * r[0] + b * w[0],
        n[1] + a * r[1] + b * w[1],
        n[2] + a * r[2] + b * w[2],
    ];
    ViewingOrientation::from_direction(d)
}

/// Sphere region seen through a viewport of the given field of view.
pub fn viewport_region(o: ViewingOrientation, hfov: f64, vfov: f64) -> Result<SphereRegion, GeometryError> {
    if !(hfov > 0.0 && hfov <= 360.0 && vfov > 0.0 && vfov <= 180.0) {
        return Err(GeometryError::FovOutOfRange { hfov, vfov });
    }
    SphereRegion::new(o.normalized(), hfov, vfov)
}

/// Solid angle in steradians: `Δaz · (sin el_max − sin el_min)`.
pub fn region_solid_angle(r: &SphereRegion) -> f64 {
    let (lo, hi) = r.elevation_bounds();
    r.azimuth_range.to_radians() * (hi.to_radians().sin() - lo.to_radians().sin())
}

/// Sampling grid used by [`region_overlap_fraction`]: `azimuth × elevation`
/// strata over the first region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapSampling {
    pub azimuth_steps: u32,
    pub elevation_steps: u32,
}

impl Default for OverlapSampling {
    fn default() -> Self {
        Self {
            azimuth_steps: 64,
            elevation_steps: 64,
        }
    }
}

impl OverlapSampling {
    pub fn square(n: u32) -> Self {
        Self {
            azimuth_steps: n.max(1),
            elevation_steps: n.max(1),
        }
    }
}

/// Fraction of `a`'s solid angle covered by `b`, using the default 64x64 grid.
pub fn region_overlap_fraction(a: &SphereRegion, b: &SphereRegion) -> f64 {
    region_overlap_fraction_with(a, b, OverlapSampling::default())
}

/// Fraction of `a`'s solid angle covered by `b`.
///
/// Samples the midpoints of an equal-area grid over `a` (uniform in azimuth
/// and in `sin(elevation)`), so each sample carries the same solid angle.
/// Azimuths are handled relative to the two region centres, which makes the
/// result independent of a shared azimuth rotation.
pub fn region_overlap_fraction_with(a: &SphereRegion, b: &SphereRegion, sampling: OverlapSampling) -> f64 {
    let n_az = sampling.azimuth_steps.max(1);
    let n_el = sampling.elevation_steps.max(1);
    let (lo, hi) = a.elevation_bounds();
    let (b_lo, b_hi) = b.elevation_bounds();
    let (s_lo, s_hi) = (lo.to_radians().sin(), hi.to_radians().sin());

    // Rows of `a` that fall inside b's elevation band.
    let rows_in = (0..n_el)
        .filter(|&j| {
            let s = s_lo + (s_hi - s_lo) * (f64::from(j) + 0.5) / f64::from(n_el);
            let el = s.clamp(-1.0, 1.0).asin().to_degrees();
            el >= b_lo && el <= b_hi
        })
        .count();
    if rows_in == 0 {
        return 0.0;
    }

    // Columns of `a` that fall inside b's azimuth span.
    let center_delta = wrap_degrees(a.center.azimuth - b.center.azimuth);
    let cols_in = (0..n_az)
        .filter(|&i| {
            let off = a.azimuth_range * ((f64::from(i) + 0.5) / f64::from(n_az) - 0.5);
            b.contains_azimuth_offset(wrap_degrees(center_delta + off))
        })
        .count();

    (rows_in * cols_in) as f64 / (f64::from(n_az) * f64::from(n_el))
}

/// Total solid angle of the unit sphere.
pub const FULL_SPHERE_SR: f64 = 4.0 * PI;
