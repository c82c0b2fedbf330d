//! Random valid presentations for round-trip tests.
#![allow(dead_code)]

use omaf_core::geometry::{PictureDims, Rect2D, SphereRegion, ViewingOrientation};
use omaf_core::model::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn orientation<R: Rng>(r: &mut R) -> ViewingOrientation {
    ViewingOrientation::new(
        r.gen_range(-180.0..180.0),
        r.gen_range(-90.0..=90.0),
        r.gen_range(-180.0..180.0),
    )
}

pub fn region<R: Rng>(r: &mut R) -> SphereRegion {
    SphereRegion {
        center: orientation(r),
        azimuth_range: r.gen_range(0.5..=360.0),
        elevation_range: r.gen_range(0.5..=180.0),
    }
}

pub fn gps<R: Rng>(r: &mut R) -> GpsPosition {
    GpsPosition {
        latitude: r.gen_range(-90.0..=90.0),
        longitude: r.gen_range(-180.0..180.0),
        altitude: r.gen_bool(0.5).then(|| r.gen_range(-100.0..5000.0)),
    }
}

fn dims<R: Rng>(r: &mut R) -> PictureDims {
    let w = 64 * r.gen_range(1..=128u32);
    PictureDims::new(w, w / 2).unwrap()
}

fn level<R: Rng>(r: &mut R) -> Level {
    *[Level::new(4, 1), Level::new(5, 1), Level::new(5, 2), Level::new(6, 1)]
        .choose(r)
        .unwrap()
}

fn track<R: Rng>(r: &mut R, id: u32) -> TrackDescriptor {
    match r.gen_range(0..4) {
        0 => {
            let codec = *[Codec::HevcMain10, Codec::AvcProgressiveHigh, Codec::AvcHigh]
                .choose(r)
                .unwrap();
            let proj = *[
                Projection::Erp,
                Projection::Cmp,
                Projection::Fisheye,
                Projection::Mesh,
                Projection::None,
            ]
            .choose(r)
            .unwrap();
            let mut t = TrackDescriptor::video(id, codec, level(r), proj, dims(r)).with_stereo(r.gen_bool(0.3));
            if matches!(proj, Projection::Erp | Projection::Cmp) && r.gen_bool(0.5) {
                t = t.with_coverage(region(r));
            }
            t
        }
        1 => {
            let codec = *[Codec::HevcMain10, Codec::Jpeg].choose(r).unwrap();
            TrackDescriptor::image(id, codec, Projection::Erp, dims(r))
        }
        2 => {
            let codec = *[Codec::MpeghLc, Codec::AacHeV2].choose(r).unwrap();
            let rate = *[32_000, 44_100, 48_000, 96_000].choose(r).unwrap();
            TrackDescriptor::audio(id, codec, Level::new(r.gen_range(1..=5), 0), rate)
        }
        _ => {
            let codec = *[Codec::Imsc1Text, Codec::Imsc1Image, Codec::WebVtt].choose(r).unwrap();
            TrackDescriptor::timed_text(id, codec)
        }
    }
}

fn norm_rect<R: Rng>(r: &mut R) -> NormalizedRect {
    let x = r.gen_range(0.0..0.9);
    let y = r.gen_range(0.0..0.9);
    NormalizedRect {
        x,
        y,
        width: r.gen_range(0.01..=(1.0 - x)),
        height: r.gen_range(0.01..=(1.0 - y)),
    }
}

fn rendering<R: Rng>(r: &mut R) -> OverlayRendering {
    match r.gen_range(0..4) {
        0 => OverlayRendering::viewport_relative(norm_rect(r)),
        1 => OverlayRendering::sphere_omni(region(r)),
        2 => OverlayRendering::sphere_plane(PlanePosition {
            center: orientation(r),
            distance: r.gen_range(0.01..=1.0),
            width: r.gen_range(0.01..2.0),
            height: r.gen_range(0.01..2.0),
        }),
        _ => OverlayRendering::mesh(),
    }
}

/// A presentation that passes validation. Angles are arbitrary doubles, so
/// a codec round trip only returns the quantized form.
pub fn presentation<R: Rng>(r: &mut R) -> Presentation {
    let mut p = Presentation::default();
    for b in ["omaf", "ovly", "vwpt", "abcd"] {
        if r.gen_bool(0.5) {
            p.brands.insert(b.to_string());
        }
    }

    let n_tracks = r.gen_range(0..6);
    for id in 1..=n_tracks {
        p.tracks.push(track(r, id));
    }
    let mut next_id = n_tracks + 1;

    let n_vp = r.gen_range(0..5);
    let ids: Vec<String> = (0..n_vp).map(|i| format!("vp{i}")).collect();
    for id in &ids {
        let mut v = Viewpoint::new(id.clone()).at([
            r.gen_range(-100_000..100_000),
            r.gen_range(-100_000..100_000),
            r.gen_range(-1000..1000),
        ]);
        v.label = if r.gen_bool(0.5) {
            format!("Camera {id}")
        } else {
            String::new()
        };
        v.group_id = r.gen_range(0..4);
        if r.gen_bool(0.6) {
            v = v.with_gps(gps(r));
        }
        let o = orientation(r);
        v.orientation = Rotation {
            yaw: o.azimuth,
            pitch: o.elevation,
            roll: o.tilt,
        };
        if r.gen_bool(0.3) {
            v.north_offset = Some(r.gen_range(-180.0..180.0));
        }
        let mut has_default = false;
        for _ in 0..r.gen_range(0..3) {
            let target = ids.choose(r).unwrap().clone();
            let mut rule = match r.gen_range(0..3) {
                0 => SwitchRule::new(target, TimelineMode::ContinueTime),
                1 => SwitchRule::new(target, TimelineMode::ResetToZero),
                _ => SwitchRule::offset(target, r.gen_range(0..60_000)),
            };
            if r.gen_bool(0.3) {
                rule.activation_region = Some(region(r));
            }
            if !has_default && r.gen_bool(0.3) {
                has_default = true;
                rule = rule.as_default(r.gen_bool(0.5).then(|| r.gen_range(1..10_000)));
            }
            v = v.with_rule(rule);
        }
        if r.gen_bool(0.3) {
            let start = r.gen_range(0..10_000);
            v = v.with_loop(LoopInfo {
                loop_start_ms: start,
                loop_end_ms: start + r.gen_range(1..10_000),
                max_loops: r.gen_range(0..4),
            });
        }
        p.viewpoints.push(v);
    }

    let videos: Vec<&TrackDescriptor> = p.tracks.iter().filter(|t| t.media_kind == MediaKind::Video).collect();
    let images: Vec<&TrackDescriptor> = p.tracks.iter().filter(|t| t.media_kind == MediaKind::Image).collect();
    let mut overlays = Vec::new();
    for oid in 1..=r.gen_range(0..5u32) {
        let source = match r.gen_range(0..4) {
            0 if !videos.is_empty() => {
                let t = videos.choose(r).unwrap();
                OverlaySource {
                    kind: OverlaySourceKind::VideoTrack,
                    ref_id: Some(t.track_id),
                    region: None,
                }
            }
            1 if !videos.is_empty() => {
                let t = videos.choose(r).unwrap();
                let d = t.dims.unwrap();
                let x = r.gen_range(0..d.width - 1);
                let y = r.gen_range(0..d.height - 1);
                OverlaySource {
                    kind: OverlaySourceKind::RegionOfTrack,
                    ref_id: Some(t.track_id),
                    region: Some(Rect2D::new(
                        x,
                        y,
                        r.gen_range(1..=d.width - x),
                        r.gen_range(1..=d.height - y),
                    )),
                }
            }
            2 if !images.is_empty() => OverlaySource {
                kind: OverlaySourceKind::ImageItem,
                ref_id: Some(images.choose(r).unwrap().track_id),
                region: None,
            },
            _ => OverlaySource {
                kind: OverlaySourceKind::External,
                ref_id: None,
                region: None,
            },
        };
        let mut controls = std::collections::BTreeSet::new();
        for c in OverlayControl::ALL {
            if r.gen_bool(0.4) {
                controls.insert(c);
            }
        }
        let toggle = (controls.contains(&OverlayControl::SwitchOnOff) && r.gen_bool(0.5)).then(|| region(r));
        overlays.push(Overlay {
            overlay_id: oid,
            source,
            rendering: rendering(r),
            properties: OverlayProperties {
                layering_order: r.gen_range(-5..5),
                opacity: r.gen_range(0.0..=1.0),
                priority: r.gen_range(0..4),
                has_alpha_plane: r.gen_bool(0.3),
            },
            interaction: OverlayInteraction {
                allowed_controls: controls,
                label: r.gen_bool(0.3).then(|| format!("overlay {oid}")),
                toggle_region: toggle,
            },
            controls_timing: if r.gen_bool(0.25) {
                ControlsTiming::Timed
            } else {
                ControlsTiming::Static
            },
        });
    }
    p.overlays = overlays;

    let samples = |r: &mut R, make: &mut dyn FnMut(&mut R) -> MetadataPayload| -> Vec<TimedSample> {
        let mut t = 0;
        (0..r.gen_range(1..5))
            .map(|_| {
                t += r.gen_range(1..5000);
                TimedSample {
                    time_ms: t,
                    payload: make(r),
                }
            })
            .collect()
    };
    let mut meta = Vec::new();
    if r.gen_bool(0.4) {
        meta.push((
            TimedMetadataKind::InitialViewingOrientation,
            samples(r, &mut |r| MetadataPayload::InitialViewingOrientation {
                orientation: orientation(r),
            }),
        ));
    }
    if r.gen_bool(0.4) {
        meta.push((
            TimedMetadataKind::RecommendedViewport,
            samples(r, &mut |r| MetadataPayload::RecommendedViewport { region: region(r) }),
        ));
    }
    if r.gen_bool(0.4) {
        meta.push((
            TimedMetadataKind::Rwqr,
            samples(r, &mut |r| {
                let entries = (0..r.gen_range(1..4))
                    .map(|_| RwqrEntry {
                        region: if r.gen_bool(0.5) {
                            RankedRegion::Sphere(region(r))
                        } else {
                            RankedRegion::Rect(Rect2D::new(
                                r.gen_range(0..1000),
                                r.gen_range(0..1000),
                                r.gen_range(1..500),
                                r.gen_range(1..500),
                            ))
                        },
                        quality_rank: r.gen_range(1..10),
                    })
                    .collect();
                MetadataPayload::Rwqr(RwqrPayload { entries })
            }),
        ));
    }
    if r.gen_bool(0.4) {
        meta.push((
            TimedMetadataKind::ErpRegion,
            samples(r, &mut |r| {
                let (c, rows) = (r.gen_range(1..5), r.gen_range(1..4));
                MetadataPayload::ErpRegion(ErpRegionPayload {
                    grid_cols: c,
                    grid_rows: rows,
                    cell_values: (0..c * rows).map(|_| r.gen_range(0.0..10.0)).collect(),
                    value_kind: *[ErpValueKind::QualityRank, ErpValueKind::Priority, ErpValueKind::Heatmap]
                        .choose(r)
                        .unwrap(),
                })
            }),
        ));
    }
    if !ids.is_empty() && r.gen_bool(0.4) {
        let track = samples(r, &mut |r| {
            MetadataPayload::DynamicViewpoint(DynamicViewpointPayload {
                viewpoint_id: ids.choose(r).unwrap().clone(),
                position_xyz: [r.gen_range(-1000..1000), 0, r.gen_range(-1000..1000)],
                gps: r.gen_bool(0.5).then(|| gps(r)),
            })
        });
        for s in &track {
            if let MetadataPayload::DynamicViewpoint(d) = &s.payload {
                let v = p
                    .viewpoints
                    .iter_mut()
                    .find(|v| v.viewpoint_id == d.viewpoint_id)
                    .unwrap();
                v.dynamic = true;
            }
        }
        meta.push((TimedMetadataKind::DynamicViewpoint, track));
    }
    let timed: Vec<u32> = p
        .overlays
        .iter()
        .filter(|o| o.controls_timing == ControlsTiming::Timed)
        .map(|o| o.overlay_id)
        .collect();
    if !timed.is_empty() {
        let all: Vec<u32> = p.overlays.iter().map(|o| o.overlay_id).collect();
        let samples = timed
            .iter()
            .chain(all.iter().take(r.gen_range(0..=all.len())))
            .enumerate()
            .map(|(i, &id)| TimedSample {
                time_ms: 100 * i as u64,
                payload: MetadataPayload::OverlayControls(OverlayControlsPayload {
                    overlay_id: id,
                    active: r.gen_bool(0.5),
                }),
            })
            .collect();
        meta.push((TimedMetadataKind::OverlayControls, samples));
    }
    for (kind, samples) in meta {
        p.timed_metadata.push(TimedMetadataTrack {
            track_id: next_id,
            kind,
            samples,
        });
        next_id += 1;
    }

    if r.gen_bool(0.3) {
        let (cols, rows) = (r.gen_range(1..5), r.gen_range(1..3));
        let d = PictureDims::new(cols * 512, rows * 512).unwrap();
        let group = TileGroup::uniform_grid(r.gen_range(1..100), d, cols, rows, next_id);
        for m in &group.members {
            p.tracks.push(TrackDescriptor::video(
                m.track_id,
                Codec::HevcMain10,
                Level::new(5, 1),
                Projection::Erp,
                PictureDims::new(m.source_rect.width, m.source_rect.height).unwrap(),
            ));
        }
        p.tile_groups.push(group);
    }

    if r.gen_bool(0.3) {
        p.viewing_space = Some(ViewingSpace {
            shape: if r.gen_bool(0.5) {
                ViewingSpaceShape::Sphere
            } else {
                ViewingSpaceShape::Cuboid
            },
            extent_mm: [r.gen_range(1..5000), r.gen_range(1..5000), r.gen_range(1..5000)],
        });
    }

    if r.gen_bool(0.2) {
        p.extras.push(OpaqueBox {
            position: 1,
            fourcc: *b"zzzz",
            payload: (0..r.gen_range(0..16)).map(|_| r.gen()).collect(),
        });
    }
    p
}
