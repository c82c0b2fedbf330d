//! Media profile and operation point matching.
//!
//! Every table row is a [`ProfileRule`]. A track matches a row when it passes
//! all of the row's constraints; otherwise the first failing constraint is
//! reported, checked in the order codec, level, projection, stereo, sample
//! rate.

use crate::model::{Codec, Level, MediaKind, Presentation, Projection, TrackDescriptor};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleTable {
    Video,
    Image,
    Audio,
    TimedText,
    OperationPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProfileRule {
    pub profile_name: &'static str,
    pub table: RuleTable,
    pub media_kind: MediaKind,
    /// Any of these codecs satisfies the row.
    pub codecs: &'static [Codec],
    /// `None` for "any" and "not applicable".
    pub max_level: Option<Level>,
    /// Empty when the row has no projection column.
    pub allowed_projections: &'static [Projection],
    /// `None` when the row has no stereo column.
    pub stereo_allowed: Option<bool>,
    pub max_sample_rate_hz: Option<u32>,
}

const HEVC: &[Codec] = &[Codec::HevcMain10];
const ERP: &[Projection] = &[Projection::Erp];
const ERP_CMP: &[Projection] = &[Projection::Erp, Projection::Cmp];
const L51: Option<Level> = Some(Level::new(5, 1));

const fn video(
    name: &'static str,
    codecs: &'static [Codec],
    max_level: Option<Level>,
    proj: &'static [Projection],
) -> ProfileRule {
    ProfileRule {
        profile_name: name,
        table: RuleTable::Video,
        media_kind: MediaKind::Video,
        codecs,
        max_level,
        allowed_projections: proj,
        stereo_allowed: None,
        max_sample_rate_hz: None,
    }
}

const fn other(
    table: RuleTable,
    kind: MediaKind,
    name: &'static str,
    codecs: &'static [Codec],
    max_level: Option<Level>,
    rate: Option<u32>,
) -> ProfileRule {
    ProfileRule {
        profile_name: name,
        table,
        media_kind: kind,
        codecs,
        max_level,
        allowed_projections: &[],
        stereo_allowed: None,
        max_sample_rate_hz: rate,
    }
}

const fn op(
    name: &'static str,
    codecs: &'static [Codec],
    level: Level,
    proj: &'static [Projection],
    stereo: bool,
) -> ProfileRule {
    ProfileRule {
        profile_name: name,
        table: RuleTable::OperationPoint,
        media_kind: MediaKind::Video,
        codecs,
        max_level: Some(level),
        allowed_projections: proj,
        stereo_allowed: Some(stereo),
        max_sample_rate_hz: None,
    }
}

pub const HEVC_VI: &str = "HEVC-based viewport-independent OMAF video profile";
pub const UNCONSTRAINED_HEVC_VI: &str = "Unconstrained HEVC-based viewport-independent OMAF video profile";
pub const HEVC_VD: &str = "HEVC-based viewport-dependent OMAF video profile";
pub const AVC_VD: &str = "AVC-based viewport-dependent OMAF video profile";
pub const SIMPLE_TILING: &str = "Simple tiling OMAF video profile";
pub const ADVANCED_TILING: &str = "Advanced tiling OMAF video profile";
pub const AUDIO_3D_BASELINE: &str = "OMAF 3D audio baseline profile";
pub const FOV_ENHANCED: &str = "HEVC-based FOV enhanced video profile";

pub const VIDEO_PROFILES: [ProfileRule; 6] = [
    video(HEVC_VI, HEVC, L51, ERP),
    video(UNCONSTRAINED_HEVC_VI, HEVC, None, ERP),
    video(HEVC_VD, HEVC, L51, ERP_CMP),
    video(AVC_VD, &[Codec::AvcProgressiveHigh], L51, ERP_CMP),
    video(SIMPLE_TILING, HEVC, None, ERP_CMP),
    video(ADVANCED_TILING, HEVC, None, &[Projection::Mesh]),
];

pub const IMAGE_PROFILES: [ProfileRule; 2] = [
    other(
        RuleTable::Image,
        MediaKind::Image,
        "OMAF HEVC image profile",
        HEVC,
        L51,
        None,
    ),
    other(
        RuleTable::Image,
        MediaKind::Image,
        "OMAF legacy image profile",
        &[Codec::Jpeg],
        None,
        None,
    ),
];

pub const AUDIO_PROFILES: [ProfileRule; 2] = [
    other(
        RuleTable::Audio,
        MediaKind::Audio,
        AUDIO_3D_BASELINE,
        &[Codec::MpeghLc],
        Some(Level::new(3, 0)),
        Some(48_000),
    ),
    other(
        RuleTable::Audio,
        MediaKind::Audio,
        "OMAF 2D audio legacy profile",
        &[Codec::AacHeV2],
        Some(Level::new(4, 0)),
        Some(48_000),
    ),
];

pub const TIMED_TEXT_PROFILES: [ProfileRule; 2] = [
    other(
        RuleTable::TimedText,
        MediaKind::TimedText,
        "OMAF IMSC1 timed text profile",
        &[Codec::Imsc1Text, Codec::Imsc1Image],
        None,
        None,
    ),
    other(
        RuleTable::TimedText,
        MediaKind::TimedText,
        "OMAF WebVTT timed text profile",
        &[Codec::WebVtt],
        None,
        None,
    ),
];

/// "ERP w/o padding" is modelled as plain ERP.
pub const OPERATION_POINTS: [ProfileRule; 4] = [
    op("Basic H.264/AVC", &[Codec::AvcHigh], Level::new(5, 1), ERP, false),
    op("Main H.265/HEVC", HEVC, Level::new(5, 1), ERP, true),
    op("Main 8K H.265/HEVC", HEVC, Level::new(6, 1), ERP, true),
    op("Flexible H.265/HEVC", HEVC, Level::new(5, 1), ERP_CMP, true),
];

/// Every rule of every table, in table order.
pub fn all_rules() -> impl Iterator<Item = &'static ProfileRule> {
    VIDEO_PROFILES
        .iter()
        .chain(&IMAGE_PROFILES)
        .chain(&AUDIO_PROFILES)
        .chain(&TIMED_TEXT_PROFILES)
        .chain(&OPERATION_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedConstraint {
    Codec,
    Level,
    Projection,
    Stereo,
    MaxSamplingRate,
}

impl fmt::Display for FailedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailedConstraint::Codec => "codec",
            FailedConstraint::Level => "level",
            FailedConstraint::Projection => "projection",
            FailedConstraint::Stereo => "stereo",
            FailedConstraint::MaxSamplingRate => "max sampling rate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformanceError {
    #[error("usage error: expected a {expected} track, got {found:?}")]
    WrongMediaKind { expected: &'static str, found: MediaKind },
}

impl ProfileRule {
    /// First failing constraint, or `None` when the track satisfies the row.
    pub fn check(&self, t: &TrackDescriptor) -> Option<FailedConstraint> {
        if !self.codecs.contains(&t.codec) {
            return Some(FailedConstraint::Codec);
        }
        if let Some(max) = self.max_level {
            if t.level.is_none_or(|l| l > max) {
                return Some(FailedConstraint::Level);
            }
        }
        if !self.allowed_projections.is_empty() && !t.projection.is_some_and(|p| self.allowed_projections.contains(&p))
        {
            return Some(FailedConstraint::Projection);
        }
        if self.stereo_allowed == Some(false) && t.stereo {
            return Some(FailedConstraint::Stereo);
        }
        if let Some(max) = self.max_sample_rate_hz {
            if t.sample_rate_hz.is_none_or(|r| r > max) {
                return Some(FailedConstraint::MaxSamplingRate);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unmatched {
    pub profile: &'static str,
    pub reason: FailedConstraint,
}

/// Outcome of evaluating one track against one table. Each row lands in
/// exactly one of the two lists.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ProfileMatch {
    pub matched: Vec<&'static str>,
    pub unmatched: Vec<Unmatched>,
}

impl ProfileMatch {
    pub fn is_match(&self, profile: &str) -> bool {
        self.matched.contains(&profile)
    }

    pub fn reason(&self, profile: &str) -> Option<FailedConstraint> {
        self.unmatched.iter().find(|u| u.profile == profile).map(|u| u.reason)
    }
}

fn evaluate(rules: &[ProfileRule], t: &TrackDescriptor) -> ProfileMatch {
    let mut out = ProfileMatch::default();
    for r in rules {
        match r.check(t) {
            None => out.matched.push(r.profile_name),
            Some(reason) => out.unmatched.push(Unmatched {
                profile: r.profile_name,
                reason,
            }),
        }
    }
    out
}

pub fn match_video_profiles(t: &TrackDescriptor) -> Result<ProfileMatch, ConformanceError> {
    if t.media_kind != MediaKind::Video {
        return Err(ConformanceError::WrongMediaKind {
            expected: "video",
            found: t.media_kind,
        });
    }
    Ok(evaluate(&VIDEO_PROFILES, t))
}

pub fn match_image_audio_text_profiles(t: &TrackDescriptor) -> Result<ProfileMatch, ConformanceError> {
    let rules: &[ProfileRule] = match t.media_kind {
        MediaKind::Image => &IMAGE_PROFILES,
        MediaKind::Audio => &AUDIO_PROFILES,
        MediaKind::TimedText => &TIMED_TEXT_PROFILES,
        found => {
            return Err(ConformanceError::WrongMediaKind {
                expected: "image, audio or timed text",
                found,
            })
        }
    };
    Ok(evaluate(rules, t))
}

pub fn match_3gpp_operation_points(t: &TrackDescriptor) -> Result<ProfileMatch, ConformanceError> {
    if t.media_kind != MediaKind::Video {
        return Err(ConformanceError::WrongMediaKind {
            expected: "video",
            found: t.media_kind,
        });
    }
    Ok(evaluate(&OPERATION_POINTS, t))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackConformance {
    pub track_id: u32,
    pub media_kind: MediaKind,
    pub profiles: ProfileMatch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation_points: Option<ProfileMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ConformanceReport {
    pub tracks: Vec<TrackConformance>,
}

impl ConformanceReport {
    /// Tracks that match no profile of their table.
    pub fn unmatched_tracks(&self) -> impl Iterator<Item = &TrackConformance> {
        self.tracks.iter().filter(|t| t.profiles.matched.is_empty())
    }
}

/// Evaluates every track against its media kind's table, and video tracks
/// against the operation points too when `with_3gpp` is set. Timed metadata
/// tracks have no table and are skipped.
pub fn conformance_report(tracks: &[TrackDescriptor], with_3gpp: bool) -> ConformanceReport {
    let mut out = ConformanceReport::default();
    for t in tracks {
        let profiles = match t.media_kind {
            MediaKind::Video => evaluate(&VIDEO_PROFILES, t),
            MediaKind::TimedMetadata => continue,
            _ => match_image_audio_text_profiles(t).expect("kind checked above"),
        };
        let operation_points = (with_3gpp && t.media_kind == MediaKind::Video).then(|| evaluate(&OPERATION_POINTS, t));
        out.tracks.push(TrackConformance {
            track_id: t.track_id,
            media_kind: t.media_kind,
            profiles,
            operation_points,
        });
    }
    out
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rows(f: &mut fmt::Formatter<'_>, m: &ProfileMatch) -> fmt::Result {
            for p in &m.matched {
                writeln!(f, "    {:<68} ok", p)?;
            }
            for u in &m.unmatched {
                writeln!(f, "    {:<68} fails {}", u.profile, u.reason)?;
            }
            Ok(())
        }
        for t in &self.tracks {
            writeln!(f, "track {} ({:?})", t.track_id, t.media_kind)?;
            rows(f, &t.profiles)?;
            if let Some(ops) = &t.operation_points {
                writeln!(f, "  3GPP operation points")?;
                rows(f, ops)?;
            }
        }
        Ok(())
    }
}

/// Placeholder toolset brand for overlays.
pub const OVERLAY_TOOLSET_BRAND: &str = "xovl";
/// Placeholder toolset brand for multiple viewpoints.
pub const VIEWPOINT_TOOLSET_BRAND: &str = "xvwp";

/// Recommended profiles a presentation uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileUsage {
    pub profile: &'static str,
    pub track_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrandSuggestion {
    pub brand: &'static str,
    pub reason: &'static str,
    pub declared: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VrifReport {
    pub profiles_used: Vec<ProfileUsage>,
    /// Profiles recommended for 8K content, filled when a video track is at
    /// least 8192 pixels wide.
    pub recommended_for_8k: Vec<&'static str>,
    pub suggested_brands: Vec<BrandSuggestion>,
    pub notes: Vec<String>,
}

impl VrifReport {
    pub fn is_empty(&self) -> bool {
        self.profiles_used.is_empty()
            && self.recommended_for_8k.is_empty()
            && self.suggested_brands.is_empty()
            && self.notes.is_empty()
    }
}

const VRIF_VIDEO: [&str; 4] = [HEVC_VI, UNCONSTRAINED_HEVC_VI, HEVC_VD, SIMPLE_TILING];

pub fn vrif_recommendation_report(p: &Presentation) -> VrifReport {
    let mut r = VrifReport::default();
    let videos: Vec<&TrackDescriptor> = p.tracks.iter().filter(|t| t.media_kind == MediaKind::Video).collect();

    for name in VRIF_VIDEO {
        let rule = VIDEO_PROFILES.iter().find(|r| r.profile_name == name).unwrap();
        let ids: Vec<u32> = videos
            .iter()
            .filter(|t| rule.check(t).is_none())
            .map(|t| t.track_id)
            .collect();
        if !ids.is_empty() {
            r.profiles_used.push(ProfileUsage {
                profile: name,
                track_ids: ids,
            });
        }
    }
    let baseline = &AUDIO_PROFILES[0];
    let ids: Vec<u32> = p
        .tracks
        .iter()
        .filter(|t| t.media_kind == MediaKind::Audio && baseline.check(t).is_none())
        .map(|t| t.track_id)
        .collect();
    if !ids.is_empty() {
        r.profiles_used.push(ProfileUsage {
            profile: AUDIO_3D_BASELINE,
            track_ids: ids,
        });
    }

    if let Some(t) = videos.iter().find(|t| t.dims.is_some_and(|d| d.width >= 8192)) {
        r.recommended_for_8k = vec![UNCONSTRAINED_HEVC_VI, SIMPLE_TILING];
        r.notes.push(format!(
            "track {} is 8K; the unconstrained viewport-independent and simple tiling profiles are recommended",
            t.track_id
        ));
    }

    if !p.overlays.is_empty() {
        r.suggested_brands.push(BrandSuggestion {
            brand: OVERLAY_TOOLSET_BRAND,
            reason: "presentation uses overlays",
            declared: p.brands.contains(OVERLAY_TOOLSET_BRAND),
        });
    }
    if !p.viewpoints.is_empty() {
        r.suggested_brands.push(BrandSuggestion {
            brand: VIEWPOINT_TOOLSET_BRAND,
            reason: "presentation uses viewpoints",
            declared: p.brands.contains(VIEWPOINT_TOOLSET_BRAND),
        });
    }

    if let Some(note) = fov_enhanced_note(&videos) {
        r.notes.push(note);
    }
    r
}

/// One full-coverage HEVC track plus at least two partial-coverage HEVC
/// tracks looks like the FOV enhanced arrangement.
fn fov_enhanced_note(videos: &[&TrackDescriptor]) -> Option<String> {
    let hevc = videos.iter().filter(|t| t.codec == Codec::HevcMain10);
    let (full, partial): (Vec<&&TrackDescriptor>, Vec<_>) =
        hevc.partition(|t: &&&TrackDescriptor| t.coverage.as_ref().is_none_or(|c| c.covers_full_sphere()));
    if full.len() == 1 && partial.len() >= 2 {
        Some(format!(
            "{FOV_ENHANCED}: track {} with full coverage plus {} partial-coverage tracks",
            full[0].track_id,
            partial.len()
        ))
    } else {
        None
    }
}
