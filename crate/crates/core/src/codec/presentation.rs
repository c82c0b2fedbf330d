//! Presentation <-> OMB bytes.

use super::boxes::*;
use super::fields::{Reader, Writer};
use super::quantize::AngleKind;
use super::CodecError;
use crate::model::*;
use std::collections::BTreeSet;

pub const FORMAT_VERSION: u8 = 1;

const MEDIA_KINDS: [MediaKind; 5] = [
    MediaKind::Video,
    MediaKind::Audio,
    MediaKind::Image,
    MediaKind::TimedText,
    MediaKind::TimedMetadata,
];
const PROJECTIONS: [Projection; 5] = [
    Projection::Erp,
    Projection::Cmp,
    Projection::Fisheye,
    Projection::Mesh,
    Projection::None,
];
const TIMELINE_MODES: [TimelineMode; 3] = [
    TimelineMode::ContinueTime,
    TimelineMode::ResetToZero,
    TimelineMode::Offset,
];
const SOURCE_KINDS: [OverlaySourceKind; 6] = [
    OverlaySourceKind::VideoTrack,
    OverlaySourceKind::ImageItem,
    OverlaySourceKind::RegionOfTrack,
    OverlaySourceKind::RegionOfImage,
    OverlaySourceKind::RecommendedViewport,
    OverlaySourceKind::External,
];
const RENDERING_KINDS: [RenderingKind; 4] = [
    RenderingKind::ViewportRelative,
    RenderingKind::SphereRelativeOmni,
    RenderingKind::SphereRelative2d,
    RenderingKind::Mesh3d,
];
const TIMINGS: [ControlsTiming; 2] = [ControlsTiming::Static, ControlsTiming::Timed];
const METADATA_KINDS: [TimedMetadataKind; 6] = [
    TimedMetadataKind::InitialViewingOrientation,
    TimedMetadataKind::RecommendedViewport,
    TimedMetadataKind::Rwqr,
    TimedMetadataKind::ErpRegion,
    TimedMetadataKind::DynamicViewpoint,
    TimedMetadataKind::OverlayControls,
];
const VALUE_KINDS: [ErpValueKind; 3] = [ErpValueKind::QualityRank, ErpValueKind::Priority, ErpValueKind::Heatmap];
const SHAPES: [ViewingSpaceShape; 2] = [ViewingSpaceShape::Sphere, ViewingSpaceShape::Cuboid];

fn index_of<T: PartialEq>(all: &[T], v: &T) -> u8 {
    all.iter().position(|x| x == v).expect("enum table is complete") as u8
}

fn from_index<T: Copy>(r: &mut Reader, all: &[T], field: &'static str) -> Result<T, CodecError> {
    let i = r.u8(field)?;
    all.get(usize::from(i))
        .copied()
        .ok_or_else(|| r.invalid(field, u64::from(i)))
}

/// Serializes a valid presentation. Angles are quantized on the way out; see
/// [`super::quantize`].
pub fn encode_presentation(p: &Presentation) -> Result<Vec<u8>, CodecError> {
    let report = validate_presentation(p);
    if !report.is_valid() {
        return Err(CodecError::Invalid(report));
    }
    let mut boxes = vec![omhd(p)];
    for t in &p.tracks {
        boxes.push(trkd(t)?);
    }
    for v in &p.viewpoints {
        boxes.push(vwpt(v)?);
    }
    for o in &p.overlays {
        boxes.push(ovly(o)?);
    }
    for t in &p.timed_metadata {
        boxes.push(tmtd(t)?);
    }
    for g in &p.tile_groups {
        boxes.push(tilg(g));
    }
    if let Some(vs) = &p.viewing_space {
        boxes.push(vwsp(vs));
    }
    let mut extras: Vec<&OpaqueBox> = p.extras.iter().collect();
    extras.sort_by_key(|e| e.position);
    for e in extras {
        let at = (e.position as usize).min(boxes.len());
        boxes.insert(at, OmbBox::raw(FourCc(e.fourcc), e.payload.clone()));
    }
    encode_box_tree(&boxes)
}

fn omhd(p: &Presentation) -> OmbBox {
    let mut w = Writer::default();
    w.u8(FORMAT_VERSION);
    w.u8(0);
    w.u16(p.brands.len() as u16);
    for b in &p.brands {
        w.bytes(b.as_bytes());
    }
    OmbBox::raw(OMHD, w.buf)
}

fn trkd(t: &TrackDescriptor) -> Result<OmbBox, CodecError> {
    let mut w = Writer::default();
    w.u32(t.track_id);
    w.u8(index_of(&MEDIA_KINDS, &t.media_kind));
    w.u8(index_of(&Codec::ALL, &t.codec));
    w.opt(t.level, |w, l| {
        w.u8(l.major);
        w.u8(l.minor);
    });
    w.opt(t.projection, |w, pr| w.u8(index_of(&PROJECTIONS, &pr)));
    w.bool(t.stereo);
    w.opt(t.dims, |w, d| {
        w.u32(d.width);
        w.u32(d.height);
    });
    w.opt_region(t.coverage.as_ref())?;
    w.opt(t.sample_rate_hz, Writer::u32);
    Ok(OmbBox::raw(TRKD, w.buf))
}

fn gps(w: &mut Writer, g: &GpsPosition) {
    w.f64(g.latitude);
    w.f64(g.longitude);
    w.opt(g.altitude, Writer::f64);
}

fn vwpt(v: &Viewpoint) -> Result<OmbBox, CodecError> {
    let mut w = Writer::default();
    w.str(&v.viewpoint_id);
    w.str(&v.label);
    for c in v.position_xyz {
        w.i32(c);
    }
    w.opt(v.gps.as_ref(), gps);
    w.angle(v.orientation.yaw, AngleKind::Wrapped)?;
    w.angle(v.orientation.pitch, AngleKind::Plain)?;
    w.angle(v.orientation.roll, AngleKind::Wrapped)?;
    w.bool(v.north_offset.is_some());
    if let Some(n) = v.north_offset {
        w.angle(n, AngleKind::Wrapped)?;
    }
    w.u32(v.group_id);
    w.bool(v.dynamic);
    let mut children = vec![OmbBox::raw(VPHD, w.buf)];

    for r in &v.switch_rules {
        let mut w = Writer::default();
        w.str(&r.target_viewpoint_id);
        w.opt_region(r.activation_region.as_ref())?;
        w.u8(index_of(&TIMELINE_MODES, &r.timeline_mode));
        w.opt(r.offset_ms, Writer::u64);
        w.bool(r.is_default);
        w.opt(r.selection_window_ms, Writer::u64);
        children.push(OmbBox::raw(VSWR, w.buf));
    }
    if let Some(l) = &v.looping {
        let mut w = Writer::default();
        w.u64(l.loop_start_ms);
        w.u64(l.loop_end_ms);
        w.u32(l.max_loops);
        children.push(OmbBox::raw(VLOP, w.buf));
    }
    Ok(OmbBox::container(VWPT, children))
}

fn ovly(o: &Overlay) -> Result<OmbBox, CodecError> {
    let mut w = Writer::default();
    w.u32(o.overlay_id);

    w.u8(index_of(&SOURCE_KINDS, &o.source.kind));
    w.opt(o.source.ref_id, Writer::u32);
    w.opt(o.source.region.as_ref(), |w, r| w.rect(r));

    let rd = &o.rendering;
    w.u8(index_of(&RENDERING_KINDS, &rd.kind));
    w.opt(rd.viewport_rect, |w, r| {
        w.f64(r.x);
        w.f64(r.y);
        w.f64(r.width);
        w.f64(r.height);
    });
    w.opt_region(rd.sphere_position.as_ref())?;
    w.bool(rd.plane_position.is_some());
    if let Some(pl) = &rd.plane_position {
        w.orientation(&pl.center)?;
        w.f64(pl.distance);
        w.f64(pl.width);
        w.f64(pl.height);
    }

    let pr = &o.properties;
    w.i32(pr.layering_order);
    w.f64(pr.opacity);
    w.u32(pr.priority);
    w.bool(pr.has_alpha_plane);

    let it = &o.interaction;
    w.u8(it.allowed_controls.iter().fold(0, |m, c| m | c.bit()));
    w.opt(it.label.as_deref(), Writer::str);
    w.opt_region(it.toggle_region.as_ref())?;
    w.u8(index_of(&TIMINGS, &o.controls_timing));
    Ok(OmbBox::raw(OVLY, w.buf))
}

fn tmtd(t: &TimedMetadataTrack) -> Result<OmbBox, CodecError> {
    let mut w = Writer::default();
    w.u32(t.track_id);
    w.u8(index_of(&METADATA_KINDS, &t.kind));
    let mut children = vec![OmbBox::raw(TMHD, w.buf)];
    for s in &t.samples {
        let mut w = Writer::default();
        w.u64(s.time_ms);
        match &s.payload {
            MetadataPayload::InitialViewingOrientation { orientation } => w.orientation(orientation)?,
            MetadataPayload::RecommendedViewport { region } => w.region(region)?,
            MetadataPayload::Rwqr(rw) => {
                w.u32(rw.entries.len() as u32);
                for e in &rw.entries {
                    match &e.region {
                        RankedRegion::Sphere(r) => {
                            w.u8(0);
                            w.region(r)?;
                        }
                        RankedRegion::Rect(r) => {
                            w.u8(1);
                            w.rect(r);
                        }
                    }
                    w.u32(e.quality_rank);
                }
            }
            MetadataPayload::ErpRegion(er) => {
                w.u32(er.grid_cols);
                w.u32(er.grid_rows);
                w.u8(index_of(&VALUE_KINDS, &er.value_kind));
                w.u32(er.cell_values.len() as u32);
                for &v in &er.cell_values {
                    w.f64(v);
                }
            }
            MetadataPayload::DynamicViewpoint(d) => {
                w.str(&d.viewpoint_id);
                for c in d.position_xyz {
                    w.i32(c);
                }
                w.opt(d.gps.as_ref(), gps);
            }
            MetadataPayload::OverlayControls(c) => {
                w.u32(c.overlay_id);
                w.bool(c.active);
            }
        }
        children.push(OmbBox::raw(SMPL, w.buf));
    }
    Ok(OmbBox::container(TMTD, children))
}

fn tilg(g: &TileGroup) -> OmbBox {
    let mut w = Writer::default();
    w.u32(g.group_id);
    let mut children = vec![OmbBox::raw(TGHD, w.buf)];
    for m in &g.members {
        let mut w = Writer::default();
        w.u32(m.track_id);
        w.u32(m.grid_position.0);
        w.u32(m.grid_position.1);
        w.rect(&m.source_rect);
        children.push(OmbBox::raw(TGMB, w.buf));
    }
    OmbBox::container(TILG, children)
}

fn vwsp(vs: &ViewingSpace) -> OmbBox {
    let mut w = Writer::default();
    w.u8(index_of(&SHAPES, &vs.shape));
    for e in vs.extent_mm {
        w.u32(e);
    }
    OmbBox::raw(VWSP, w.buf)
}

/// Parses an OMB file. The first box must be `omhd`; unrecognised top-level
/// boxes land in [`Presentation::extras`] and unrecognised children of known
/// containers are skipped.
pub fn decode_presentation(bytes: &[u8]) -> Result<Presentation, CodecError> {
    let boxes = decode_box_tree(bytes)?;
    let mut p = Presentation::default();
    let Some(first) = boxes.first().filter(|b| b.fourcc == OMHD) else {
        return Err(CodecError::MissingHeader);
    };
    p.brands = read_omhd(raw(first))?;

    for (i, b) in boxes.iter().enumerate().skip(1) {
        match b.fourcc {
            OMHD => return Err(CodecError::DuplicateBox { fourcc: OMHD }),
            TRKD => p.tracks.push(read_trkd(raw(b))?),
            VWPT => p.viewpoints.push(read_vwpt(b)?),
            OVLY => p.overlays.push(read_ovly(raw(b))?),
            TMTD => p.timed_metadata.push(read_tmtd(b)?),
            TILG => p.tile_groups.push(read_tilg(b)?),
            VWSP => {
                if p.viewing_space.is_some() {
                    return Err(CodecError::DuplicateBox { fourcc: VWSP });
                }
                p.viewing_space = Some(read_vwsp(raw(b))?);
            }
            other => p.extras.push(OpaqueBox {
                position: i as u32,
                fourcc: other.0,
                payload: raw(b).to_vec(),
            }),
        }
    }
    Ok(p)
}

fn raw(b: &OmbBox) -> &[u8] {
    match &b.payload {
        BoxPayload::Raw(bytes) => bytes,
        BoxPayload::Children(_) => &[],
    }
}

fn read_omhd(buf: &[u8]) -> Result<BTreeSet<String>, CodecError> {
    let mut r = Reader::new(OMHD, buf);
    let version = r.u8("version")?;
    if version != FORMAT_VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    r.u8("flags")?;
    let n = r.u16("brand_count")?;
    let mut brands = BTreeSet::new();
    for _ in 0..n {
        let b = r.array4("brand")?;
        let s = String::from_utf8(b.to_vec()).map_err(|_| CodecError::InvalidUtf8 {
            fourcc: OMHD,
            field: "brand",
        })?;
        brands.insert(s);
    }
    r.finish()?;
    Ok(brands)
}

fn read_trkd(buf: &[u8]) -> Result<TrackDescriptor, CodecError> {
    let mut r = Reader::new(TRKD, buf);
    let t = TrackDescriptor {
        track_id: r.u32("track_id")?,
        media_kind: from_index(&mut r, &MEDIA_KINDS, "media_kind")?,
        codec: from_index(&mut r, &Codec::ALL, "codec")?,
        level: r.opt("level", |r| Ok(Level::new(r.u8("level")?, r.u8("level")?)))?,
        projection: r.opt("projection", |r| from_index(r, &PROJECTIONS, "projection"))?,
        stereo: r.bool("stereo")?,
        dims: r.opt("dims", |r| {
            Ok(crate::geometry::PictureDims {
                width: r.u32("dims")?,
                height: r.u32("dims")?,
            })
        })?,
        coverage: r.opt("coverage", |r| r.region("coverage"))?,
        sample_rate_hz: r.opt("sample_rate_hz", |r| r.u32("sample_rate_hz"))?,
    };
    r.finish()?;
    Ok(t)
}

fn read_gps(r: &mut Reader) -> Result<GpsPosition, CodecError> {
    Ok(GpsPosition {
        latitude: r.f64("gps")?,
        longitude: r.f64("gps")?,
        altitude: r.opt("gps", |r| r.f64("gps"))?,
    })
}

fn read_vwpt(b: &OmbBox) -> Result<Viewpoint, CodecError> {
    let children = b.children();
    let header = children
        .iter()
        .find(|c| c.fourcc == VPHD)
        .ok_or(CodecError::MissingChild {
            fourcc: VWPT,
            child: VPHD,
        })?;
    let mut r = Reader::new(VPHD, raw(header));
    let mut v = Viewpoint {
        viewpoint_id: r.str("viewpoint_id")?,
        label: r.str("label")?,
        position_xyz: [r.i32("position")?, r.i32("position")?, r.i32("position")?],
        gps: r.opt("gps", read_gps)?,
        orientation: Rotation {
            yaw: r.angle("orientation")?,
            pitch: r.angle("orientation")?,
            roll: r.angle("orientation")?,
        },
        north_offset: r.opt("north_offset", |r| r.angle("north_offset"))?,
        group_id: r.u32("group_id")?,
        switch_rules: Vec::new(),
        looping: None,
        dynamic: r.bool("dynamic")?,
    };
    r.finish()?;

    for c in children {
        match c.fourcc {
            VPHD if !std::ptr::eq(c, header) => return Err(CodecError::DuplicateBox { fourcc: VPHD }),
            VSWR => {
                let mut r = Reader::new(VSWR, raw(c));
                v.switch_rules.push(SwitchRule {
                    target_viewpoint_id: r.str("target_viewpoint_id")?,
                    activation_region: r.opt("activation_region", |r| r.region("activation_region"))?,
                    timeline_mode: from_index(&mut r, &TIMELINE_MODES, "timeline_mode")?,
                    offset_ms: r.opt("offset_ms", |r| r.u64("offset_ms"))?,
                    is_default: r.bool("is_default")?,
                    selection_window_ms: r.opt("selection_window_ms", |r| r.u64("selection_window_ms"))?,
                });
                r.finish()?;
            }
            VLOP => {
                if v.looping.is_some() {
                    return Err(CodecError::DuplicateBox { fourcc: VLOP });
                }
                let mut r = Reader::new(VLOP, raw(c));
                v.looping = Some(LoopInfo {
                    loop_start_ms: r.u64("loop_start_ms")?,
                    loop_end_ms: r.u64("loop_end_ms")?,
                    max_loops: r.u32("max_loops")?,
                });
                r.finish()?;
            }
            _ => {}
        }
    }
    Ok(v)
}

fn read_ovly(buf: &[u8]) -> Result<Overlay, CodecError> {
    let mut r = Reader::new(OVLY, buf);
    let overlay_id = r.u32("overlay_id")?;
    let source = OverlaySource {
        kind: from_index(&mut r, &SOURCE_KINDS, "source_kind")?,
        ref_id: r.opt("ref_id", |r| r.u32("ref_id"))?,
        region: r.opt("source_region", |r| r.rect("source_region"))?,
    };
    let rendering = OverlayRendering {
        kind: from_index(&mut r, &RENDERING_KINDS, "rendering_kind")?,
        viewport_rect: r.opt("viewport_rect", |r| {
            Ok(NormalizedRect {
                x: r.f64("viewport_rect")?,
                y: r.f64("viewport_rect")?,
                width: r.f64("viewport_rect")?,
                height: r.f64("viewport_rect")?,
            })
        })?,
        sphere_position: r.opt("sphere_position", |r| r.region("sphere_position"))?,
        plane_position: r.opt("plane_position", |r| {
            Ok(PlanePosition {
                center: r.orientation("plane_position")?,
                distance: r.f64("plane_position")?,
                width: r.f64("plane_position")?,
                height: r.f64("plane_position")?,
            })
        })?,
    };
    let properties = OverlayProperties {
        layering_order: r.i32("layering_order")?,
        opacity: r.f64("opacity")?,
        priority: r.u32("priority")?,
        has_alpha_plane: r.bool("has_alpha_plane")?,
    };
    let mask = r.u8("allowed_controls")?;
    let all_bits = OverlayControl::ALL.iter().fold(0, |m, c| m | c.bit());
    if mask & !all_bits != 0 {
        return Err(r.invalid("allowed_controls", u64::from(mask)));
    }
    let interaction = OverlayInteraction {
        allowed_controls: OverlayControl::ALL
            .into_iter()
            .filter(|c| mask & c.bit() != 0)
            .collect(),
        label: r.opt("label", |r| r.str("label"))?,
        toggle_region: r.opt("toggle_region", |r| r.region("toggle_region"))?,
    };
    let controls_timing = from_index(&mut r, &TIMINGS, "controls_timing")?;
    r.finish()?;
    Ok(Overlay {
        overlay_id,
        source,
        rendering,
        properties,
        interaction,
        controls_timing,
    })
}

fn read_tmtd(b: &OmbBox) -> Result<TimedMetadataTrack, CodecError> {
    let children = b.children();
    let header = children
        .iter()
        .find(|c| c.fourcc == TMHD)
        .ok_or(CodecError::MissingChild {
            fourcc: TMTD,
            child: TMHD,
        })?;
    let mut r = Reader::new(TMHD, raw(header));
    let track_id = r.u32("track_id")?;
    let kind = from_index(&mut r, &METADATA_KINDS, "kind")?;
    r.finish()?;

    let mut samples = Vec::new();
    for c in children {
        match c.fourcc {
            TMHD if !std::ptr::eq(c, header) => return Err(CodecError::DuplicateBox { fourcc: TMHD }),
            SMPL => {
                let mut r = Reader::new(SMPL, raw(c));
                let time_ms = r.u64("time_ms")?;
                let payload = read_payload(&mut r, kind)?;
                r.finish()?;
                samples.push(TimedSample { time_ms, payload });
            }
            _ => {}
        }
    }
    Ok(TimedMetadataTrack {
        track_id,
        kind,
        samples,
    })
}

fn read_payload(r: &mut Reader, kind: TimedMetadataKind) -> Result<MetadataPayload, CodecError> {
    Ok(match kind {
        TimedMetadataKind::InitialViewingOrientation => MetadataPayload::InitialViewingOrientation {
            orientation: r.orientation("orientation")?,
        },
        TimedMetadataKind::RecommendedViewport => MetadataPayload::RecommendedViewport {
            region: r.region("region")?,
        },
        TimedMetadataKind::Rwqr => {
            let n = r.u32("entry_count")?;
            let mut entries = Vec::new();
            for _ in 0..n {
                let region = match r.u8("region_type")? {
                    0 => RankedRegion::Sphere(r.region("region")?),
                    1 => RankedRegion::Rect(r.rect("region")?),
                    t => return Err(r.invalid("region_type", u64::from(t))),
                };
                entries.push(RwqrEntry {
                    region,
                    quality_rank: r.u32("quality_rank")?,
                });
            }
            MetadataPayload::Rwqr(RwqrPayload { entries })
        }
        TimedMetadataKind::ErpRegion => {
            let grid_cols = r.u32("grid_cols")?;
            let grid_rows = r.u32("grid_rows")?;
            let value_kind = from_index(r, &VALUE_KINDS, "value_kind")?;
            let n = r.u32("value_count")?;
            let mut cell_values = Vec::new();
            for _ in 0..n {
                cell_values.push(r.f64("cell_values")?);
            }
            MetadataPayload::ErpRegion(ErpRegionPayload {
                grid_cols,
                grid_rows,
                cell_values,
                value_kind,
            })
        }
        TimedMetadataKind::DynamicViewpoint => MetadataPayload::DynamicViewpoint(DynamicViewpointPayload {
            viewpoint_id: r.str("viewpoint_id")?,
            position_xyz: [r.i32("position")?, r.i32("position")?, r.i32("position")?],
            gps: r.opt("gps", read_gps)?,
        }),
        TimedMetadataKind::OverlayControls => MetadataPayload::OverlayControls(OverlayControlsPayload {
            overlay_id: r.u32("overlay_id")?,
            active: r.bool("active")?,
        }),
    })
}

fn read_tilg(b: &OmbBox) -> Result<TileGroup, CodecError> {
    let children = b.children();
    let header = children
        .iter()
        .find(|c| c.fourcc == TGHD)
        .ok_or(CodecError::MissingChild {
            fourcc: TILG,
            child: TGHD,
        })?;
    let mut r = Reader::new(TGHD, raw(header));
    let group_id = r.u32("group_id")?;
    r.finish()?;
    let mut members = Vec::new();
    for c in children {
        match c.fourcc {
            TGHD if !std::ptr::eq(c, header) => return Err(CodecError::DuplicateBox { fourcc: TGHD }),
            TGMB => {
                let mut r = Reader::new(TGMB, raw(c));
                members.push(TileMember {
                    track_id: r.u32("track_id")?,
                    grid_position: (r.u32("grid_col")?, r.u32("grid_row")?),
                    source_rect: r.rect("source_rect")?,
                });
                r.finish()?;
            }
            _ => {}
        }
    }
    Ok(TileGroup { group_id, members })
}

fn read_vwsp(buf: &[u8]) -> Result<ViewingSpace, CodecError> {
    let mut r = Reader::new(VWSP, buf);
    let vs = ViewingSpace {
        shape: from_index(&mut r, &SHAPES, "shape")?,
        extent_mm: [r.u32("extent_mm")?, r.u32("extent_mm")?, r.u32("extent_mm")?],
    };
    r.finish()?;
    Ok(vs)
}
