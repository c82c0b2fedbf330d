//! Presentation document model.
//!
//! The serde representation of these types is the JSON manifest format: field
//! names match the Rust field names, enums use their snake_case (or codec)
//! spellings. See `docs/manifest.md`.

mod builder;
mod validate;

pub use builder::PresentationBuilder;
pub(crate) use validate::union_area;
pub use validate::{validate_presentation, Severity, ValidationEntry, ValidationReport};

use crate::geometry::{PictureDims, Rect2D, SphereRegion, ViewingOrientation};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Video,
    Audio,
    Image,
    TimedText,
    TimedMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Codec {
    #[serde(rename = "HEVC_Main10")]
    HevcMain10,
    #[serde(rename = "AVC_ProgressiveHigh")]
    AvcProgressiveHigh,
    /// AVC High, needed for the 3GPP operation point table.
    #[serde(rename = "AVC_High")]
    AvcHigh,
    #[serde(rename = "JPEG")]
    Jpeg,
    #[serde(rename = "MPEGH_LC")]
    MpeghLc,
    #[serde(rename = "AAC_HEv2")]
    AacHeV2,
    #[serde(rename = "IMSC1_Text")]
    Imsc1Text,
    #[serde(rename = "IMSC1_Image")]
    Imsc1Image,
    #[serde(rename = "WebVTT")]
    WebVtt,
    #[serde(rename = "metadata")]
    Metadata,
}

impl Codec {
    pub const ALL: [Codec; 10] = [
        Codec::HevcMain10,
        Codec::AvcProgressiveHigh,
        Codec::AvcHigh,
        Codec::Jpeg,
        Codec::MpeghLc,
        Codec::AacHeV2,
        Codec::Imsc1Text,
        Codec::Imsc1Image,
        Codec::WebVtt,
        Codec::Metadata,
    ];

    /// Whether the codec defines levels (and so a track must carry one).
    pub fn has_levels(self) -> bool {
        matches!(
            self,
            Codec::HevcMain10 | Codec::AvcProgressiveHigh | Codec::AvcHigh | Codec::MpeghLc | Codec::AacHeV2
        )
    }

    /// Media kinds the codec can carry.
    pub fn media_kinds(self) -> &'static [MediaKind] {
        match self {
            Codec::HevcMain10 => &[MediaKind::Video, MediaKind::Image],
            Codec::AvcProgressiveHigh | Codec::AvcHigh => &[MediaKind::Video],
            Codec::Jpeg => &[MediaKind::Image],
            Codec::MpeghLc | Codec::AacHeV2 => &[MediaKind::Audio],
            Codec::Imsc1Text | Codec::Imsc1Image | Codec::WebVtt => &[MediaKind::TimedText],
            Codec::Metadata => &[MediaKind::TimedMetadata],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Codec::HevcMain10 => "HEVC_Main10",
            Codec::AvcProgressiveHigh => "AVC_ProgressiveHigh",
            Codec::AvcHigh => "AVC_High",
            Codec::Jpeg => "JPEG",
            Codec::MpeghLc => "MPEGH_LC",
            Codec::AacHeV2 => "AAC_HEv2",
            Codec::Imsc1Text => "IMSC1_Text",
            Codec::Imsc1Image => "IMSC1_Image",
            Codec::WebVtt => "WebVTT",
            Codec::Metadata => "metadata",
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Codec level as a `(major, minor)` pair, so `5.1` and `5.10` never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub major: u8,
    pub minor: u8,
}

impl Level {
    pub const fn new(major: u8, minor: u8) -> Self {
        Self { major, minor }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.major, self.minor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid level {0:?}, expected MAJOR or MAJOR.MINOR")]
pub struct LevelParseError(String);

impl FromStr for Level {
    type Err = LevelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LevelParseError(s.to_string());
        let (major, minor) = match s.split_once('.') {
            Some((a, b)) => (a, b),
            None => (s, "0"),
        };
        let major = major.parse().map_err(|_| err())?;
        let minor = minor.parse().map_err(|_| err())?;
        Ok(Level { major, minor })
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Level;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a level such as \"5.1\" or 3")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Level, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Level, E> {
                u8::try_from(v)
                    .map(|m| Level::new(m, 0))
                    .map_err(|_| E::custom("level out of range"))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Level, E> {
                // `5.1` written as a JSON number: go through its shortest
                // decimal form.
                format!("{v}").parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Projection {
    #[serde(rename = "ERP")]
    Erp,
    #[serde(rename = "CMP")]
    Cmp,
    #[serde(rename = "fisheye")]
    Fisheye,
    #[serde(rename = "mesh")]
    Mesh,
    #[serde(rename = "none")]
    None,
}

impl Projection {
    pub fn name(self) -> &'static str {
        match self {
            Projection::Erp => "ERP",
            Projection::Cmp => "CMP",
            Projection::Fisheye => "fisheye",
            Projection::Mesh => "mesh",
            Projection::None => "none",
        }
    }

    pub fn is_omnidirectional(self) -> bool {
        !matches!(self, Projection::None)
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackDescriptor {
    pub track_id: u32,
    pub media_kind: MediaKind,
    pub codec: Codec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Projection>,
    #[serde(default)]
    pub stereo: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<PictureDims>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<SphereRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<u32>,
}

impl TrackDescriptor {
    /// Video track with the given coding parameters and no coverage limit.
    pub fn video(track_id: u32, codec: Codec, level: Level, projection: Projection, dims: PictureDims) -> Self {
        Self {
            track_id,
            media_kind: MediaKind::Video,
            codec,
            level: Some(level),
            projection: Some(projection),
            stereo: false,
            dims: Some(dims),
            coverage: None,
            sample_rate_hz: None,
        }
    }

    pub fn image(track_id: u32, codec: Codec, projection: Projection, dims: PictureDims) -> Self {
        Self {
            track_id,
            media_kind: MediaKind::Image,
            codec,
            level: codec.has_levels().then_some(Level::new(5, 1)),
            projection: Some(projection),
            stereo: false,
            dims: Some(dims),
            coverage: None,
            sample_rate_hz: None,
        }
    }

    pub fn audio(track_id: u32, codec: Codec, level: Level, sample_rate_hz: u32) -> Self {
        Self {
            track_id,
            media_kind: MediaKind::Audio,
            codec,
            level: Some(level),
            projection: None,
            stereo: false,
            dims: None,
            coverage: None,
            sample_rate_hz: Some(sample_rate_hz),
        }
    }

    pub fn timed_text(track_id: u32, codec: Codec) -> Self {
        Self {
            track_id,
            media_kind: MediaKind::TimedText,
            codec,
            level: None,
            projection: None,
            stereo: false,
            dims: None,
            coverage: None,
            sample_rate_hz: None,
        }
    }

    pub fn with_stereo(mut self, stereo: bool) -> Self {
        self.stereo = stereo;
        self
    }

    pub fn with_coverage(mut self, coverage: SphereRegion) -> Self {
        self.coverage = Some(coverage);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsPosition {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude: Option<f64>,
}

impl GpsPosition {
    pub const fn new(latitude: f64, longitude: f64) -> Self {
        Self {
            latitude,
            longitude,
            altitude: None,
        }
    }
}

/// Yaw/pitch/roll in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rotation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimelineMode {
    ContinueTime,
    ResetToZero,
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRule {
    pub target_viewpoint_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_region: Option<SphereRegion>,
    pub timeline_mode: TimelineMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_ms: Option<u64>,
    #[serde(default)]
    pub is_default: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_window_ms: Option<u64>,
}

impl SwitchRule {
    pub fn new(target: impl Into<String>, timeline_mode: TimelineMode) -> Self {
        Self {
            target_viewpoint_id: target.into(),
            activation_region: None,
            timeline_mode,
            offset_ms: None,
            is_default: false,
            selection_window_ms: None,
        }
    }

    pub fn offset(target: impl Into<String>, offset_ms: u64) -> Self {
        Self {
            offset_ms: Some(offset_ms),
            ..Self::new(target, TimelineMode::Offset)
        }
    }

    pub fn as_default(mut self, selection_window_ms: Option<u64>) -> Self {
        self.is_default = true;
        self.selection_window_ms = selection_window_ms;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopInfo {
    pub loop_start_ms: u64,
    pub loop_end_ms: u64,
    /// 0 means unbounded.
    pub max_loops: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub viewpoint_id: String,
    #[serde(default)]
    pub label: String,
    /// Millimetres in the common reference coordinate system.
    #[serde(default)]
    pub position_xyz: [i32; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gps: Option<GpsPosition>,
    #[serde(default)]
    pub orientation: Rotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub north_offset: Option<f64>,
    #[serde(default)]
    pub group_id: u32,
    #[serde(default)]
    pub switch_rules: Vec<SwitchRule>,
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub looping: Option<LoopInfo>,
    #[serde(default)]
    pub dynamic: bool,
}

impl Viewpoint {
    pub fn new(viewpoint_id: impl Into<String>) -> Self {
        let viewpoint_id = viewpoint_id.into();
        Self {
            label: viewpoint_id.clone(),
            viewpoint_id,
            position_xyz: [0; 3],
            gps: None,
            orientation: Rotation::default(),
            north_offset: None,
            group_id: 0,
            switch_rules: Vec::new(),
            looping: None,
            dynamic: false,
        }
    }

    pub fn at(mut self, position_xyz: [i32; 3]) -> Self {
        self.position_xyz = position_xyz;
        self
    }

    pub fn with_gps(mut self, gps: GpsPosition) -> Self {
        self.gps = Some(gps);
        self
    }

    pub fn with_rule(mut self, rule: SwitchRule) -> Self {
        self.switch_rules.push(rule);
        self
    }

    pub fn with_loop(mut self, looping: LoopInfo) -> Self {
        self.looping = Some(looping);
        self
    }

    pub fn default_rule(&self) -> Option<&SwitchRule> {
        self.switch_rules.iter().find(|r| r.is_default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlaySourceKind {
    VideoTrack,
    ImageItem,
    RegionOfTrack,
    RegionOfImage,
    RecommendedViewport,
    External,
}

impl OverlaySourceKind {
    pub fn needs_region(self) -> bool {
        matches!(self, Self::RegionOfTrack | Self::RegionOfImage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlaySource {
    pub kind: OverlaySourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Rect2D>,
}

/// Rectangle in fractions of the viewport width and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl NormalizedRect {
    pub fn is_valid(&self) -> bool {
        let in01 = |v: f64| (0.0..=1.0).contains(&v);
        in01(self.x)
            && in01(self.y)
            && self.width > 0.0
            && self.height > 0.0
            && self.x + self.width <= 1.0
            && self.y + self.height <= 1.0
    }
}

/// A plane inside the unit sphere, facing its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePosition {
    pub center: ViewingOrientation,
    /// Distance from the sphere centre, as a fraction of the unit radius.
    pub distance: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderingKind {
    ViewportRelative,
    SphereRelativeOmni,
    SphereRelative2d,
    Mesh3d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRendering {
    pub kind: RenderingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewport_rect: Option<NormalizedRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_position: Option<SphereRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_position: Option<PlanePosition>,
}

impl OverlayRendering {
    pub fn viewport_relative(rect: NormalizedRect) -> Self {
        Self {
            kind: RenderingKind::ViewportRelative,
            viewport_rect: Some(rect),
            sphere_position: None,
            plane_position: None,
        }
    }

    pub fn sphere_omni(region: SphereRegion) -> Self {
        Self {
            kind: RenderingKind::SphereRelativeOmni,
            viewport_rect: None,
            sphere_position: Some(region),
            plane_position: None,
        }
    }

    pub fn sphere_plane(plane: PlanePosition) -> Self {
        Self {
            kind: RenderingKind::SphereRelative2d,
            viewport_rect: None,
            sphere_position: None,
            plane_position: Some(plane),
        }
    }

    pub fn mesh() -> Self {
        Self {
            kind: RenderingKind::Mesh3d,
            viewport_rect: None,
            sphere_position: None,
            plane_position: None,
        }
    }

    /// Distance of the rendering surface from the sphere centre, for
    /// sphere-relative kinds. Projected omnidirectional overlays and mesh
    /// overlays sit on the unit sphere.
    pub fn sphere_distance(&self) -> Option<f64> {
        match self.kind {
            RenderingKind::ViewportRelative => None,
            RenderingKind::SphereRelativeOmni | RenderingKind::Mesh3d => Some(1.0),
            RenderingKind::SphereRelative2d => Some(self.plane_position.map_or(1.0, |p| p.distance)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayProperties {
    pub layering_order: i32,
    pub opacity: f64,
    /// 0 marks an essential overlay.
    pub priority: u32,
    #[serde(default)]
    pub has_alpha_plane: bool,
}

impl Default for OverlayProperties {
    fn default() -> Self {
        Self {
            layering_order: 0,
            opacity: 1.0,
            priority: 0,
            has_alpha_plane: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayControl {
    Move,
    Resize,
    Rotate,
    SwitchOnOff,
    ChangeOpacity,
}

impl OverlayControl {
    pub const ALL: [OverlayControl; 5] = [
        OverlayControl::Move,
        OverlayControl::Resize,
        OverlayControl::Rotate,
        OverlayControl::SwitchOnOff,
        OverlayControl::ChangeOpacity,
    ];

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OverlayInteraction {
    #[serde(default)]
    pub allowed_controls: BTreeSet<OverlayControl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toggle_region: Option<SphereRegion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlsTiming {
    #[default]
    Static,
    Timed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub overlay_id: u32,
    pub source: OverlaySource,
    pub rendering: OverlayRendering,
    #[serde(default)]
    pub properties: OverlayProperties,
    #[serde(default)]
    pub interaction: OverlayInteraction,
    #[serde(default)]
    pub controls_timing: ControlsTiming,
}

impl Overlay {
    /// Overlay showing a whole video track.
    pub fn from_track(overlay_id: u32, track_id: u32, rendering: OverlayRendering) -> Self {
        Self {
            overlay_id,
            source: OverlaySource {
                kind: OverlaySourceKind::VideoTrack,
                ref_id: Some(track_id),
                region: None,
            },
            rendering,
            properties: OverlayProperties::default(),
            interaction: OverlayInteraction::default(),
            controls_timing: ControlsTiming::Static,
        }
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.properties.priority = priority;
        self
    }

    pub fn with_layering(mut self, layering_order: i32) -> Self {
        self.properties.layering_order = layering_order;
        self
    }

    pub fn with_opacity(mut self, opacity: f64) -> Self {
        self.properties.opacity = opacity;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimedMetadataKind {
    InitialViewingOrientation,
    RecommendedViewport,
    Rwqr,
    ErpRegion,
    DynamicViewpoint,
    OverlayControls,
}

/// Region referenced by a quality ranking entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankedRegion {
    Sphere(SphereRegion),
    Rect(Rect2D),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwqrEntry {
    pub region: RankedRegion,
    /// Lower is better.
    pub quality_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwqrPayload {
    pub entries: Vec<RwqrEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErpValueKind {
    QualityRank,
    Priority,
    Heatmap,
}

/// Per-cell values over a regular grid laid on the ERP picture, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErpRegionPayload {
    pub grid_cols: u32,
    pub grid_rows: u32,
    pub cell_values: Vec<f64>,
    pub value_kind: ErpValueKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicViewpointPayload {
    pub viewpoint_id: String,
    pub position_xyz: [i32; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gps: Option<GpsPosition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayControlsPayload {
    pub overlay_id: u32,
    pub active: bool,
}

/// Sample payload; its tag must match the owning track's kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetadataPayload {
    InitialViewingOrientation { orientation: ViewingOrientation },
    RecommendedViewport { region: SphereRegion },
    Rwqr(RwqrPayload),
    ErpRegion(ErpRegionPayload),
    DynamicViewpoint(DynamicViewpointPayload),
    OverlayControls(OverlayControlsPayload),
}

impl MetadataPayload {
    pub fn kind(&self) -> TimedMetadataKind {
        match self {
            MetadataPayload::InitialViewingOrientation { .. } => TimedMetadataKind::InitialViewingOrientation,
            MetadataPayload::RecommendedViewport { .. } => TimedMetadataKind::RecommendedViewport,
            MetadataPayload::Rwqr(_) => TimedMetadataKind::Rwqr,
            MetadataPayload::ErpRegion(_) => TimedMetadataKind::ErpRegion,
            MetadataPayload::DynamicViewpoint(_) => TimedMetadataKind::DynamicViewpoint,
            MetadataPayload::OverlayControls(_) => TimedMetadataKind::OverlayControls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedSample {
    pub time_ms: u64,
    pub payload: MetadataPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedMetadataTrack {
    pub track_id: u32,
    pub kind: TimedMetadataKind,
    #[serde(default)]
    pub samples: Vec<TimedSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileMember {
    pub track_id: u32,
    /// (column, row)
    pub grid_position: (u32, u32),
    pub source_rect: Rect2D,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGroup {
    pub group_id: u32,
    pub members: Vec<TileMember>,
}

impl TileGroup {
    /// Regular `cols × rows` grid over a picture; member track ids start at
    /// `first_track_id` and run row-major.
    pub fn uniform_grid(group_id: u32, dims: PictureDims, cols: u32, rows: u32, first_track_id: u32) -> Self {
        let mut members = Vec::with_capacity((cols * rows) as usize);
        for row in 0..rows {
            for col in 0..cols {
                let x0 = (u64::from(dims.width) * u64::from(col) / u64::from(cols)) as u32;
                let x1 = (u64::from(dims.width) * u64::from(col + 1) / u64::from(cols)) as u32;
                let y0 = (u64::from(dims.height) * u64::from(row) / u64::from(rows)) as u32;
                let y1 = (u64::from(dims.height) * u64::from(row + 1) / u64::from(rows)) as u32;
                members.push(TileMember {
                    track_id: first_track_id + row * cols + col,
                    grid_position: (col, row),
                    source_rect: Rect2D::new(x0, y0, x1 - x0, y1 - y0),
                });
            }
        }
        Self { group_id, members }
    }

    /// Number of columns and rows spanned by the members' grid positions.
    pub fn grid_size(&self) -> (u32, u32) {
        let cols = self.members.iter().map(|m| m.grid_position.0 + 1).max().unwrap_or(0);
        let rows = self.members.iter().map(|m| m.grid_position.1 + 1).max().unwrap_or(0);
        (cols, rows)
    }

    /// Bounding box of the member rectangles, i.e. the full picture.
    pub fn bounds(&self) -> Option<Rect2D> {
        let x0 = self.members.iter().map(|m| m.source_rect.x).min()?;
        let y0 = self.members.iter().map(|m| m.source_rect.y).min()?;
        let x1 = self.members.iter().map(|m| m.source_rect.right()).max()?;
        let y1 = self.members.iter().map(|m| m.source_rect.bottom()).max()?;
        Some(Rect2D::new(
            x0,
            y0,
            (x1 - u64::from(x0)) as u32,
            (y1 - u64::from(y0)) as u32,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewingSpaceShape {
    Sphere,
    Cuboid,
}

/// Region of viewing positions. For a sphere only `extent_mm[0]` (the
/// radius) is used; a cuboid uses all three as x/y/z edge lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewingSpace {
    pub shape: ViewingSpaceShape,
    pub extent_mm: [u32; 3],
}

/// Top-level box the codec did not recognise, kept so it can be written back
/// at the same position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpaqueBox {
    /// Index among the top-level boxes of the container it was read from.
    pub position: u32,
    pub fourcc: [u8; 4],
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Presentation {
    #[serde(default)]
    pub brands: BTreeSet<String>,
    #[serde(default)]
    pub tracks: Vec<TrackDescriptor>,
    #[serde(default)]
    pub viewpoints: Vec<Viewpoint>,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
    #[serde(default)]
    pub timed_metadata: Vec<TimedMetadataTrack>,
    #[serde(default)]
    pub tile_groups: Vec<TileGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewing_space: Option<ViewingSpace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<OpaqueBox>,
}

impl Presentation {
    pub fn builder() -> PresentationBuilder {
        PresentationBuilder::default()
    }

    pub fn track(&self, track_id: u32) -> Option<&TrackDescriptor> {
        self.tracks.iter().find(|t| t.track_id == track_id)
    }

    pub fn metadata_track(&self, track_id: u32) -> Option<&TimedMetadataTrack> {
        self.timed_metadata.iter().find(|t| t.track_id == track_id)
    }

    pub fn viewpoint(&self, id: &str) -> Option<&Viewpoint> {
        self.viewpoints.iter().find(|v| v.viewpoint_id == id)
    }

    pub fn overlay(&self, id: u32) -> Option<&Overlay> {
        self.overlays.iter().find(|o| o.overlay_id == id)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("presentation serializes")
    }

    /// Copy with every orientation wrapped into its canonical range.
    /// Validation never does this implicitly.
    pub fn normalized(&self) -> Self {
        let mut p = self.clone();
        let fix_region = |r: &mut SphereRegion| r.center = r.center.normalized();
        let fix_rot = |r: &mut Rotation| {
            let o = ViewingOrientation::new(r.yaw, r.pitch, r.roll).normalized();
            *r = Rotation {
                yaw: o.azimuth,
                pitch: o.elevation,
                roll: o.tilt,
            };
        };
        for t in &mut p.tracks {
            t.coverage.as_mut().map(fix_region);
        }
        for v in &mut p.viewpoints {
            fix_rot(&mut v.orientation);
            if let Some(n) = v.north_offset.as_mut() {
                *n = crate::geometry::wrap_degrees(*n);
            }
            for r in &mut v.switch_rules {
                r.activation_region.as_mut().map(fix_region);
            }
        }
        for o in &mut p.overlays {
            o.rendering.sphere_position.as_mut().map(fix_region);
            if let Some(pl) = o.rendering.plane_position.as_mut() {
                pl.center = pl.center.normalized();
            }
            o.interaction.toggle_region.as_mut().map(fix_region);
        }
        for t in &mut p.timed_metadata {
            for s in &mut t.samples {
                match &mut s.payload {
                    MetadataPayload::InitialViewingOrientation { orientation } => {
                        *orientation = orientation.normalized()
                    }
                    MetadataPayload::RecommendedViewport { region } => fix_region(region),
                    MetadataPayload::Rwqr(rw) => {
                        for e in &mut rw.entries {
                            if let RankedRegion::Sphere(r) = &mut e.region {
                                fix_region(r);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        p
    }
}
