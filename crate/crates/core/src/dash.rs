//! Minimal MPD generation and parsing for viewpoint (VWPT) and overlay
//! (OVLY) descriptors. The accepted element grammar is in
//! `docs/mpd-subset.md`.

use crate::model::{validate_presentation, GpsPosition, MediaKind, Presentation, ValidationReport};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_VWPT_SCHEME: &str = "urn:example:omaf:vwpt";
pub const DEFAULT_OVLY_SCHEME: &str = "urn:example:omaf:ovly";
const MPD_NS: &str = "urn:mpeg:dash:schema:mpd:2011";

/// Scheme URIs used to recognise the two descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DashConfig {
    pub vwpt_scheme: String,
    pub ovly_scheme: String,
}

impl Default for DashConfig {
    fn default() -> Self {
        Self {
            vwpt_scheme: DEFAULT_VWPT_SCHEME.into(),
            ovly_scheme: DEFAULT_OVLY_SCHEME.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DashError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("PRIORITY_LEN_MISMATCH: {ids} overlay ids but {priorities} priorities")]
    PriorityLenMismatch { ids: usize, priorities: usize },
    #[error("invalid {attribute} value {value:?}")]
    InvalidValue { attribute: &'static str, value: String },
    #[error("presentation fails validation with {} error(s)", .0.error_count())]
    Validation(ValidationReport),
}

impl DashError {
    pub fn code(&self) -> &'static str {
        match self {
            DashError::Xml(_) => "XML_PARSE",
            DashError::PriorityLenMismatch { .. } => "PRIORITY_LEN_MISMATCH",
            DashError::InvalidValue { .. } => "INVALID_VALUE",
            DashError::Validation(_) => "VALIDATION",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationKind {
    Background,
    Overlay,
    Audio,
    Metadata,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VwptDescriptor {
    pub viewpoint_id: String,
    pub position_xyz: [i32; 3],
    pub group_id: u32,
    pub gps: Option<GpsPosition>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct OvlyDescriptor {
    pub overlay_ids: Vec<u32>,
    pub priorities: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AdaptationSet {
    pub id: u32,
    pub kind: AdaptationKind,
    pub representation_ids: Vec<String>,
    pub vwpt: Option<VwptDescriptor>,
    pub ovly: Option<OvlyDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct MpdDocument {
    pub adaptation_sets: Vec<AdaptationSet>,
}

impl MpdDocument {
    pub fn vwpt_descriptors(&self) -> Vec<&VwptDescriptor> {
        self.adaptation_sets.iter().filter_map(|a| a.vwpt.as_ref()).collect()
    }

    pub fn ovly_descriptors(&self) -> Vec<&OvlyDescriptor> {
        self.adaptation_sets.iter().filter_map(|a| a.ovly.as_ref()).collect()
    }

    pub fn to_xml(&self, cfg: &DashConfig) -> String {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(s, "<MPD xmlns=\"{MPD_NS}\" type=\"static\">");
        s.push_str("  <Period id=\"0\">\n");
        for a in &self.adaptation_sets {
            let content_type = match a.kind {
                AdaptationKind::Background | AdaptationKind::Overlay => "video",
                AdaptationKind::Audio => "audio",
                AdaptationKind::Metadata => "application",
            };
            let _ = writeln!(s, "    <AdaptationSet id=\"{}\" contentType=\"{content_type}\">", a.id);
            if let Some(v) = &a.vwpt {
                let _ = writeln!(
                    s,
                    "      <Viewpoint schemeIdUri=\"{}\" value=\"{}\"/>",
                    escape(&cfg.vwpt_scheme),
                    escape(&vwpt_value(v))
                );
            }
            if let Some(o) = &a.ovly {
                let _ = write!(
                    s,
                    "      <SupplementalProperty schemeIdUri=\"{}\" value=\"{}\"",
                    escape(&cfg.ovly_scheme),
                    join(&o.overlay_ids)
                );
                if let Some(p) = &o.priorities {
                    let _ = write!(s, " priorities=\"{}\"", join(p));
                }
                s.push_str("/>\n");
            }
            for r in &a.representation_ids {
                let _ = writeln!(s, "      <Representation id=\"{}\"/>", escape(r));
            }
            s.push_str("    </AdaptationSet>\n");
        }
        s.push_str("  </Period>\n</MPD>\n");
        s
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// `id,x,y,z,group[,lat,lon[,alt]]`. Floats use the shortest text that
/// reads back to the same value.
fn vwpt_value(v: &VwptDescriptor) -> String {
    let [x, y, z] = v.position_xyz;
    let mut s = format!("{},{x},{y},{z},{}", v.viewpoint_id, v.group_id);
    if let Some(g) = &v.gps {
        let _ = write!(s, ",{:?},{:?}", g.latitude, g.longitude);
        if let Some(a) = g.altitude {
            let _ = write!(s, ",{a:?}");
        }
    }
    s
}

fn parse_vwpt(value: &str) -> Result<VwptDescriptor, DashError> {
    let bad = || DashError::InvalidValue {
        attribute: "VWPT value",
        value: value.to_string(),
    };
    let parts: Vec<&str> = value.split(',').collect();
    if !matches!(parts.len(), 5 | 7 | 8) || parts[0].is_empty() {
        return Err(bad());
    }
    let int = |s: &str| s.trim().parse::<i32>().map_err(|_| bad());
    let float = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let gps = if parts.len() >= 7 {
        Some(GpsPosition {
            latitude: float(parts[5])?,
            longitude: float(parts[6])?,
            altitude: parts.get(7).map(|a| float(a)).transpose()?,
        })
    } else {
        None
    };
    Ok(VwptDescriptor {
        viewpoint_id: parts[0].to_string(),
        position_xyz: [int(parts[1])?, int(parts[2])?, int(parts[3])?],
        group_id: parts[4].trim().parse().map_err(|_| bad())?,
        gps,
    })
}

fn parse_id_list(attribute: &'static str, value: &str) -> Result<Vec<u32>, DashError> {
    let bad = || DashError::InvalidValue {
        attribute,
        value: value.to_string(),
    };
    if value.trim().is_empty() {
        return Err(bad());
    }
    value.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

/// Builds the adaptation set list for a valid presentation.
///
/// * one background set per viewpoint (representation `vp-{id}`), or, with
///   no viewpoints, one per omnidirectional visual track that is not an
///   overlay source (representation `track-{id}`);
/// * one overlay set per overlay source track, listing the overlays it feeds
///   in the order they appear;
/// * one set per audio track and per timed metadata track not used as an
///   overlay source.
///
/// Set ids run from 1 in that order.
pub fn build_mpd(p: &Presentation) -> Result<MpdDocument, DashError> {
    let report = validate_presentation(p);
    if !report.is_valid() {
        return Err(DashError::Validation(report));
    }
    let mut sets = Vec::new();
    let mut next = 1;
    let mut push = |kind, reps: Vec<String>, vwpt, ovly| {
        sets.push(AdaptationSet {
            id: next,
            kind,
            representation_ids: reps,
            vwpt,
            ovly,
        });
        next += 1;
    };

    let mut by_source: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut source_order = Vec::new();
    for (i, o) in p.overlays.iter().enumerate() {
        if let Some(r) = o.source.ref_id {
            let e = by_source.entry(r).or_default();
            if e.is_empty() {
                source_order.push(r);
            }
            e.push(i);
        }
    }
    let sources: BTreeSet<u32> = source_order.iter().copied().collect();

    if p.viewpoints.is_empty() {
        for t in &p.tracks {
            let visual = matches!(t.media_kind, MediaKind::Video | MediaKind::Image);
            if visual && t.projection.is_some_and(|pr| pr.is_omnidirectional()) && !sources.contains(&t.track_id) {
                push(
                    AdaptationKind::Background,
                    vec![format!("track-{}", t.track_id)],
                    None,
                    None,
                );
            }
        }
    } else {
        for v in &p.viewpoints {
            let d = VwptDescriptor {
                viewpoint_id: v.viewpoint_id.clone(),
                position_xyz: v.position_xyz,
                group_id: v.group_id,
                gps: v.gps,
            };
            push(
                AdaptationKind::Background,
                vec![format!("vp-{}", v.viewpoint_id)],
                Some(d),
                None,
            );
        }
    }

    for r in &source_order {
        let idx = &by_source[r];
        let d = OvlyDescriptor {
            overlay_ids: idx.iter().map(|&i| p.overlays[i].overlay_id).collect(),
            priorities: Some(idx.iter().map(|&i| p.overlays[i].properties.priority).collect()),
        };
        push(AdaptationKind::Overlay, vec![format!("track-{r}")], None, Some(d));
    }

    for t in p.tracks.iter().filter(|t| t.media_kind == MediaKind::Audio) {
        push(AdaptationKind::Audio, vec![format!("track-{}", t.track_id)], None, None);
    }
    for t in p.timed_metadata.iter().filter(|t| !sources.contains(&t.track_id)) {
        push(
            AdaptationKind::Metadata,
            vec![format!("track-{}", t.track_id)],
            None,
            None,
        );
    }
    Ok(MpdDocument { adaptation_sets: sets })
}

pub fn generate_mpd(p: &Presentation, cfg: &DashConfig) -> Result<String, DashError> {
    Ok(build_mpd(p)?.to_xml(cfg))
}

/// Reads every `AdaptationSet` in the document. Descriptors are recognised by
/// scheme URI on any child element; other elements and attributes are
/// ignored.
pub fn parse_mpd(xml: &str, cfg: &DashConfig) -> Result<MpdDocument, DashError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| DashError::Xml(e.to_string()))?;
    let mut out = MpdDocument::default();
    let mut seen = BTreeSet::new();
    for (n, node) in doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "AdaptationSet")
        .enumerate()
    {
        let id = match node.attribute("id") {
            Some(v) => v.trim().parse().map_err(|_| DashError::InvalidValue {
                attribute: "AdaptationSet@id",
                value: v.to_string(),
            })?,
            None => n as u32 + 1,
        };
        if !seen.insert(id) {
            return Err(DashError::InvalidValue {
                attribute: "AdaptationSet@id",
                value: id.to_string(),
            });
        }
        let mut set = AdaptationSet {
            id,
            kind: AdaptationKind::Background,
            representation_ids: Vec::new(),
            vwpt: None,
            ovly: None,
        };
        for c in node.children().filter(|c| c.is_element()) {
            if c.tag_name().name() == "Representation" {
                if let Some(r) = c.attribute("id") {
                    set.representation_ids.push(r.to_string());
                }
                continue;
            }
            let Some(scheme) = c.attribute("schemeIdUri") else {
                continue;
            };
            let value = c.attribute("value").unwrap_or("");
            if scheme == cfg.vwpt_scheme && set.vwpt.is_none() {
                set.vwpt = Some(parse_vwpt(value)?);
            } else if scheme == cfg.ovly_scheme && set.ovly.is_none() {
                let ids = parse_id_list("OVLY value", value)?;
                let priorities = c
                    .attribute("priorities")
                    .map(|p| parse_id_list("OVLY priorities", p))
                    .transpose()?;
                if let Some(p) = &priorities {
                    if p.len() != ids.len() {
                        return Err(DashError::PriorityLenMismatch {
                            ids: ids.len(),
                            priorities: p.len(),
                        });
                    }
                }
                set.ovly = Some(OvlyDescriptor {
                    overlay_ids: ids,
                    priorities,
                });
            }
        }
        set.kind = match node.attribute("contentType") {
            Some("audio") => AdaptationKind::Audio,
            Some("application") | Some("text") => AdaptationKind::Metadata,
            _ if set.ovly.is_some() => AdaptationKind::Overlay,
            _ => AdaptationKind::Background,
        };
        out.adaptation_sets.push(set);
    }
    Ok(out)
}
