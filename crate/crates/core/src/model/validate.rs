use super::*;
use crate::geometry::{PictureDims, Rect2D, SphereRegion, ViewingOrientation};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub path: String,
}

impl fmt::Display for ValidationEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {} at {}: {}", self.code, self.path, self.message)
    }
}

/// Validation findings in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| e.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| e.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn is_valid(&self) -> bool {
        self.error_count() == 0
    }

    pub fn codes(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.code.as_str()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        write!(f, "{} errors, {} warnings", self.error_count(), self.warning_count())
    }
}

struct Checker<'a> {
    p: &'a Presentation,
    entries: Vec<ValidationEntry>,
    track_ids: BTreeMap<u32, usize>,
    meta_ids: BTreeMap<u32, usize>,
    viewpoint_ids: HashSet<&'a str>,
}

impl<'a> Checker<'a> {
    fn err(&mut self, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, code, path, message)
    }

    fn warn(&mut self, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, code, path, message)
    }

    fn push(&mut self, severity: Severity, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.entries.push(ValidationEntry {
            severity,
            code: code.to_string(),
            message: message.into(),
            path: path.into(),
        });
    }

    fn finite(&mut self, path: &str, field: &str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.err("NON_FINITE", format!("{path}.{field}"), format!("{field} is {v}"));
            false
        }
    }

    fn orientation(&mut self, path: &str, o: &ViewingOrientation) {
        let ok = self.finite(path, "azimuth", o.azimuth)
            & self.finite(path, "elevation", o.elevation)
            & self.finite(path, "tilt", o.tilt);
        if ok && !o.is_normalized() {
            self.err(
                "ANGLE_RANGE",
                path,
                format!(
                    "orientation ({}, {}, {}) outside [-180,180) x [-90,90] x [-180,180)",
                    o.azimuth, o.elevation, o.tilt
                ),
            );
        }
    }

    fn region(&mut self, path: &str, r: &SphereRegion) {
        self.orientation(&format!("{path}.center"), &r.center);
        let ok = self.finite(path, "azimuth_range", r.azimuth_range)
            & self.finite(path, "elevation_range", r.elevation_range);
        if ok && !r.has_valid_ranges() {
            self.err(
                "REGION_RANGE",
                path,
                format!(
                    "ranges {}x{} outside (0,360] x (0,180]",
                    r.azimuth_range, r.elevation_range
                ),
            );
        }
    }

    fn rect(&mut self, path: &str, r: &Rect2D, host: Option<PictureDims>) {
        if r.width == 0 || r.height == 0 {
            self.err("RECT_EMPTY", path, "rectangle has zero width or height");
        } else if let Some(d) = host {
            if !r.fits_within(d) {
                self.err(
                    "REGION_OUT_OF_BOUNDS",
                    path,
                    format!("rect {:?} exceeds picture {}x{}", r, d.width, d.height),
                );
            }
        }
    }

    fn brands(&mut self) {
        for b in &self.p.brands {
            if b.len() != 4 || !b.bytes().all(|c| c.is_ascii_graphic() || c == b' ') {
                self.err(
                    "BRAND_FORMAT",
                    "brands",
                    format!("brand {b:?} is not four ASCII characters"),
                );
            }
        }
    }

    fn tracks(&mut self) {
        let mut seen = HashSet::new();
        for (i, t) in self.p.tracks.iter().enumerate() {
            let path = format!("tracks[{i}]");
            if t.track_id == 0 {
                self.err("INVALID_ID", format!("{path}.track_id"), "track_id must be positive");
            }
            if !seen.insert(t.track_id) {
                self.err(
                    "DUPLICATE_ID",
                    format!("{path}.track_id"),
                    format!("track_id {} reused", t.track_id),
                );
            }
            if !t.codec.media_kinds().contains(&t.media_kind) {
                self.err(
                    "CODEC_KIND_MISMATCH",
                    format!("{path}.codec"),
                    format!("codec {} cannot carry {:?}", t.codec, t.media_kind),
                );
            }
            if t.level.is_some() != t.codec.has_levels() {
                let msg = if t.codec.has_levels() {
                    format!("codec {} requires a level", t.codec)
                } else {
                    format!("codec {} has no levels", t.codec)
                };
                self.err("LEVEL_PRESENCE", format!("{path}.level"), msg);
            }
            let visual = matches!(t.media_kind, MediaKind::Video | MediaKind::Image);
            if t.projection.is_some() != visual {
                let msg = if visual {
                    "video and image tracks need a projection"
                } else {
                    "only video and image tracks carry a projection"
                };
                self.err("PROJECTION_PRESENCE", format!("{path}.projection"), msg);
            }
            if let Some(d) = t.dims {
                if d.width == 0 || d.height == 0 {
                    self.err(
                        "DIMS_INVALID",
                        format!("{path}.dims"),
                        "picture dimensions must be non-zero",
                    );
                } else if t.projection == Some(Projection::Erp) && !d.is_erp_aspect() {
                    self.warn(
                        "ERP_ASPECT",
                        format!("{path}.dims"),
                        format!("ERP picture {}x{} is not 2:1", d.width, d.height),
                    );
                }
            }
            if let Some(c) = &t.coverage {
                if !matches!(t.projection, Some(Projection::Erp | Projection::Cmp)) {
                    self.err(
                        "COVERAGE_PROJECTION",
                        format!("{path}.coverage"),
                        "coverage is only defined for ERP and CMP tracks",
                    );
                }
                self.region(&format!("{path}.coverage"), c);
            }
            if t.sample_rate_hz == Some(0) {
                self.err(
                    "SAMPLE_RATE",
                    format!("{path}.sample_rate_hz"),
                    "sample rate must be positive",
                );
            }
        }
    }

    fn gps(&mut self, path: &str, g: &GpsPosition) {
        let ok = self.finite(path, "latitude", g.latitude) & self.finite(path, "longitude", g.longitude);
        if let Some(a) = g.altitude {
            self.finite(path, "altitude", a);
        }
        if ok && !((-90.0..=90.0).contains(&g.latitude) && (-180.0..180.0).contains(&g.longitude)) {
            self.err(
                "GPS_RANGE",
                path,
                format!("({}, {}) outside [-90,90] x [-180,180)", g.latitude, g.longitude),
            );
        }
    }

    fn viewpoints(&mut self) {
        let dynamic_refs: BTreeSet<&str> = self
            .p
            .timed_metadata
            .iter()
            .filter(|t| t.kind == TimedMetadataKind::DynamicViewpoint)
            .flat_map(|t| t.samples.iter())
            .filter_map(|s| match &s.payload {
                MetadataPayload::DynamicViewpoint(d) => Some(d.viewpoint_id.as_str()),
                _ => None,
            })
            .collect();

        let mut seen = HashSet::new();
        for (i, v) in self.p.viewpoints.iter().enumerate() {
            let path = format!("viewpoints[{i}]");
            let id = v.viewpoint_id.as_str();
            if id.is_empty() || id.chars().any(|c| c == ',' || c.is_whitespace() || c.is_control()) {
                self.err(
                    "VIEWPOINT_ID_FORMAT",
                    format!("{path}.viewpoint_id"),
                    format!("viewpoint_id {id:?} must be non-empty without commas or whitespace"),
                );
            }
            if !seen.insert(id) {
                self.err(
                    "DUPLICATE_ID",
                    format!("{path}.viewpoint_id"),
                    format!("viewpoint_id {id:?} reused"),
                );
            }
            if let Some(g) = &v.gps {
                self.gps(&format!("{path}.gps"), g);
            }
            let o = &v.orientation;
            self.orientation(
                &format!("{path}.orientation"),
                &ViewingOrientation::new(o.yaw, o.pitch, o.roll),
            );
            if let Some(n) = v.north_offset {
                if self.finite(&path, "north_offset", n) && !(-180.0..180.0).contains(&n) {
                    self.err(
                        "ANGLE_RANGE",
                        format!("{path}.north_offset"),
                        format!("{n} outside [-180,180)"),
                    );
                }
            }
            let mut defaults = 0;
            for (j, r) in v.switch_rules.iter().enumerate() {
                let rp = format!("{path}.switch_rules[{j}]");
                if !self.viewpoint_ids.contains(r.target_viewpoint_id.as_str()) {
                    self.err(
                        "DANGLING_REF",
                        format!("{rp}.target_viewpoint_id"),
                        format!("no viewpoint {:?}", r.target_viewpoint_id),
                    );
                }
                if let Some(reg) = &r.activation_region {
                    self.region(&format!("{rp}.activation_region"), reg);
                }
                if (r.timeline_mode == TimelineMode::Offset) != r.offset_ms.is_some() {
                    self.err(
                        "OFFSET_MODE",
                        format!("{rp}.offset_ms"),
                        "offset_ms is required exactly when timeline_mode is offset",
                    );
                }
                if r.selection_window_ms == Some(0) {
                    self.err(
                        "SELECTION_WINDOW",
                        format!("{rp}.selection_window_ms"),
                        "selection window must be positive",
                    );
                }
                if r.is_default {
                    defaults += 1;
                    if defaults > 1 {
                        self.err(
                            "DEFAULT_RULE_COUNT",
                            format!("{rp}.is_default"),
                            "more than one default switch rule",
                        );
                    }
                }
            }
            if let Some(l) = &v.looping {
                if l.loop_start_ms >= l.loop_end_ms {
                    self.err(
                        "LOOP_RANGE",
                        format!("{path}.loop"),
                        format!("loop [{}, {}) is empty", l.loop_start_ms, l.loop_end_ms),
                    );
                }
            }
            if v.dynamic && !dynamic_refs.contains(id) {
                self.err(
                    "DYNAMIC_NO_TRACK",
                    format!("{path}.dynamic"),
                    format!("dynamic viewpoint {id:?} has no dynamic_viewpoint timed metadata track"),
                );
            }
        }
    }

    fn overlay_source(&mut self, path: &str, s: &OverlaySource) {
        use OverlaySourceKind as K;
        let path = format!("{path}.source");
        let mut host = None;
        match (s.kind, s.ref_id) {
            (K::External, Some(_)) => self.err(
                "SOURCE_REF_PRESENCE",
                format!("{path}.ref_id"),
                "external sources take no ref_id",
            ),
            (K::External, None) => {}
            (_, None) => self.err("SOURCE_REF_PRESENCE", format!("{path}.ref_id"), "source needs a ref_id"),
            (kind, Some(id)) => {
                let wanted = match kind {
                    K::VideoTrack | K::RegionOfTrack => Some(MediaKind::Video),
                    K::ImageItem | K::RegionOfImage => Some(MediaKind::Image),
                    _ => None,
                };
                if let Some(&ti) = self.track_ids.get(&id) {
                    let t = &self.p.tracks[ti];
                    if wanted != Some(t.media_kind) {
                        self.err(
                            "SOURCE_KIND_MISMATCH",
                            format!("{path}.ref_id"),
                            format!("{kind:?} source cannot reference {:?} track {id}", t.media_kind),
                        );
                    }
                    host = t.dims;
                } else if let Some(&mi) = self.meta_ids.get(&id) {
                    let m = &self.p.timed_metadata[mi];
                    if kind != K::RecommendedViewport || m.kind != TimedMetadataKind::RecommendedViewport {
                        self.err(
                            "SOURCE_KIND_MISMATCH",
                            format!("{path}.ref_id"),
                            format!("{kind:?} source cannot reference {:?} metadata track {id}", m.kind),
                        );
                    }
                } else {
                    self.err("DANGLING_REF", format!("{path}.ref_id"), format!("no track {id}"));
                }
            }
        }
        if s.kind.needs_region() != s.region.is_some() {
            self.err(
                "SOURCE_REGION",
                format!("{path}.region"),
                "region is required exactly for region_of_track and region_of_image sources",
            );
        } else if let (true, Some(r)) = (s.kind.needs_region(), &s.region) {
            self.rect(&format!("{path}.region"), r, host);
        }
    }

    fn overlay_rendering(&mut self, path: &str, r: &OverlayRendering) {
        let path = format!("{path}.rendering");
        let expect = (
            r.kind == RenderingKind::ViewportRelative,
            r.kind == RenderingKind::SphereRelativeOmni,
            r.kind == RenderingKind::SphereRelative2d,
        );
        let have = (
            r.viewport_rect.is_some(),
            r.sphere_position.is_some(),
            r.plane_position.is_some(),
        );
        if expect != have {
            self.err(
                "RENDERING_FIELDS",
                path.clone(),
                format!("{:?} rendering has mismatched position fields", r.kind),
            );
        }
        if let Some(v) = &r.viewport_rect {
            let ok = self.finite(&path, "viewport_rect.x", v.x)
                & self.finite(&path, "viewport_rect.y", v.y)
                & self.finite(&path, "viewport_rect.width", v.width)
                & self.finite(&path, "viewport_rect.height", v.height);
            if ok && !v.is_valid() {
                self.err(
                    "NORM_RECT_RANGE",
                    format!("{path}.viewport_rect"),
                    "rectangle must lie inside [0,1]x[0,1]",
                );
            }
        }
        if let Some(s) = &r.sphere_position {
            self.region(&format!("{path}.sphere_position"), s);
        }
        if let Some(pl) = &r.plane_position {
            let pp = format!("{path}.plane_position");
            self.orientation(&format!("{pp}.center"), &pl.center);
            let ok = self.finite(&pp, "distance", pl.distance)
                & self.finite(&pp, "width", pl.width)
                & self.finite(&pp, "height", pl.height);
            if ok && !(pl.distance > 0.0 && pl.distance <= 1.0) {
                self.err(
                    "PLANE_DISTANCE",
                    format!("{pp}.distance"),
                    format!("distance {} outside (0, 1]", pl.distance),
                );
            }
            if ok && !(pl.width > 0.0 && pl.height > 0.0) {
                self.err("PLANE_SIZE", pp, "plane width and height must be positive");
            }
        }
    }

    fn overlays(&mut self) {
        let timed_controls: BTreeSet<u32> = self
            .p
            .timed_metadata
            .iter()
            .filter(|t| t.kind == TimedMetadataKind::OverlayControls)
            .flat_map(|t| t.samples.iter())
            .filter_map(|s| match &s.payload {
                MetadataPayload::OverlayControls(c) => Some(c.overlay_id),
                _ => None,
            })
            .collect();

        let mut seen = HashSet::new();
        for (i, o) in self.p.overlays.iter().enumerate() {
            let path = format!("overlays[{i}]");
            if o.overlay_id == 0 {
                self.err(
                    "INVALID_ID",
                    format!("{path}.overlay_id"),
                    "overlay_id must be positive",
                );
            }
            if !seen.insert(o.overlay_id) {
                self.err(
                    "DUPLICATE_ID",
                    format!("{path}.overlay_id"),
                    format!("overlay_id {} reused", o.overlay_id),
                );
            }
            self.overlay_source(&path, &o.source);
            self.overlay_rendering(&path, &o.rendering);
            let op = o.properties.opacity;
            if self.finite(&format!("{path}.properties"), "opacity", op) && !(0.0..=1.0).contains(&op) {
                self.err(
                    "OPACITY_RANGE",
                    format!("{path}.properties.opacity"),
                    format!("opacity {op} outside [0, 1]"),
                );
            }
            if let Some(t) = &o.interaction.toggle_region {
                if !o.interaction.allowed_controls.contains(&OverlayControl::SwitchOnOff) {
                    self.err(
                        "TOGGLE_WITHOUT_CONTROL",
                        format!("{path}.interaction.toggle_region"),
                        "toggle_region requires the switch_on_off control",
                    );
                }
                self.region(&format!("{path}.interaction.toggle_region"), t);
            }
            if o.controls_timing == ControlsTiming::Timed && !timed_controls.contains(&o.overlay_id) {
                self.err(
                    "TIMED_NO_TRACK",
                    format!("{path}.controls_timing"),
                    format!(
                        "overlay {} has timed controls but no overlay_controls track",
                        o.overlay_id
                    ),
                );
            }
        }
    }

    fn payload(&mut self, path: &str, p: &MetadataPayload) {
        match p {
            MetadataPayload::InitialViewingOrientation { orientation } => {
                self.orientation(&format!("{path}.orientation"), orientation)
            }
            MetadataPayload::RecommendedViewport { region } => self.region(&format!("{path}.region"), region),
            MetadataPayload::Rwqr(rw) => {
                if rw.entries.is_empty() {
                    self.err(
                        "RWQR_EMPTY",
                        path,
                        "region-wise quality ranking needs at least one entry",
                    );
                }
                for (k, e) in rw.entries.iter().enumerate() {
                    let ep = format!("{path}.entries[{k}]");
                    match &e.region {
                        RankedRegion::Sphere(r) => self.region(&format!("{ep}.region"), r),
                        RankedRegion::Rect(r) => self.rect(&format!("{ep}.region"), r, None),
                    }
                    if e.quality_rank == 0 {
                        self.err(
                            "RWQR_RANK",
                            format!("{ep}.quality_rank"),
                            "quality_rank must be positive",
                        );
                    }
                }
            }
            MetadataPayload::ErpRegion(er) => {
                if er.grid_cols == 0 || er.grid_rows == 0 {
                    self.err("ERP_GRID_DIMS", path, "grid dimensions must be positive");
                }
                let want = u64::from(er.grid_cols) * u64::from(er.grid_rows);
                if er.cell_values.len() as u64 != want {
                    self.err(
                        "ERP_GRID_SIZE",
                        format!("{path}.cell_values"),
                        format!(
                            "{} values for a {}x{} grid",
                            er.cell_values.len(),
                            er.grid_cols,
                            er.grid_rows
                        ),
                    );
                }
                for (k, v) in er.cell_values.iter().enumerate() {
                    self.finite(path, &format!("cell_values[{k}]"), *v);
                }
            }
            MetadataPayload::DynamicViewpoint(d) => {
                if !self.viewpoint_ids.contains(d.viewpoint_id.as_str()) {
                    self.err(
                        "DANGLING_REF",
                        format!("{path}.viewpoint_id"),
                        format!("no viewpoint {:?}", d.viewpoint_id),
                    );
                }
                if let Some(g) = &d.gps {
                    self.gps(&format!("{path}.gps"), g);
                }
            }
            MetadataPayload::OverlayControls(c) => {
                if self.p.overlay(c.overlay_id).is_none() {
                    self.err(
                        "DANGLING_REF",
                        format!("{path}.overlay_id"),
                        format!("no overlay {}", c.overlay_id),
                    );
                }
            }
        }
    }

    fn timed_metadata(&mut self) {
        for (i, t) in self.p.timed_metadata.iter().enumerate() {
            let path = format!("timed_metadata[{i}]");
            if t.track_id == 0 {
                self.err("INVALID_ID", format!("{path}.track_id"), "track_id must be positive");
            }
            if self.track_ids.contains_key(&t.track_id) || self.meta_ids.get(&t.track_id) != Some(&i) {
                self.err(
                    "DUPLICATE_ID",
                    format!("{path}.track_id"),
                    format!("track_id {} reused", t.track_id),
                );
            }
            let mut prev: Option<u64> = None;
            for (j, s) in t.samples.iter().enumerate() {
                let sp = format!("{path}.samples[{j}]");
                if prev.is_some_and(|p| s.time_ms <= p) {
                    self.err(
                        "SAMPLE_ORDER",
                        format!("{sp}.time_ms"),
                        "sample times must strictly increase",
                    );
                }
                prev = Some(s.time_ms);
                if s.payload.kind() != t.kind {
                    self.err(
                        "PAYLOAD_KIND_MISMATCH",
                        format!("{sp}.payload"),
                        format!("{:?} payload in {:?} track", s.payload.kind(), t.kind),
                    );
                } else {
                    self.payload(&format!("{sp}.payload"), &s.payload);
                }
            }
        }
    }

    fn tile_groups(&mut self) {
        let mut seen = HashSet::new();
        for (i, g) in self.p.tile_groups.iter().enumerate() {
            let path = format!("tile_groups[{i}]");
            if !seen.insert(g.group_id) {
                self.err(
                    "DUPLICATE_ID",
                    format!("{path}.group_id"),
                    format!("group_id {} reused", g.group_id),
                );
            }
            if g.members.is_empty() {
                self.err("TILE_EMPTY", path, "tile group has no members");
                continue;
            }
            let mut cells = HashSet::new();
            for (j, m) in g.members.iter().enumerate() {
                let mp = format!("{path}.members[{j}]");
                if !self.track_ids.contains_key(&m.track_id) {
                    self.err(
                        "DANGLING_REF",
                        format!("{mp}.track_id"),
                        format!("no track {}", m.track_id),
                    );
                }
                if !cells.insert(m.grid_position) {
                    self.err(
                        "TILE_GRID_DUP",
                        format!("{mp}.grid_position"),
                        format!("grid position {:?} used twice", m.grid_position),
                    );
                }
                if m.source_rect.area() == 0 {
                    self.err(
                        "RECT_EMPTY",
                        format!("{mp}.source_rect"),
                        "rectangle has zero width or height",
                    );
                }
                for (k, other) in g.members.iter().enumerate().take(j) {
                    if m.source_rect.intersects(&other.source_rect) {
                        self.err(
                            "TILE_OVERLAP",
                            format!("{mp}.source_rect"),
                            format!("overlaps members[{k}]"),
                        );
                    }
                }
            }
            let (cols, rows) = g.grid_size();
            let rects: Vec<Rect2D> = g.members.iter().map(|m| m.source_rect).collect();
            if cells.len() as u64 != u64::from(cols) * u64::from(rows) {
                self.err(
                    "TILE_GAP",
                    format!("{path}.members"),
                    format!("grid positions do not fill a {cols}x{rows} grid"),
                );
            } else if g.bounds().is_some_and(|b| union_area(&rects) < b.area()) {
                self.err(
                    "TILE_GAP",
                    format!("{path}.members"),
                    "member rectangles leave gaps in their bounding box",
                );
            }
        }
    }

    fn viewing_space(&mut self) {
        if let Some(vs) = &self.p.viewing_space {
            let used = match vs.shape {
                ViewingSpaceShape::Sphere => &vs.extent_mm[..1],
                ViewingSpaceShape::Cuboid => &vs.extent_mm[..],
            };
            if used.contains(&0) {
                self.err(
                    "VIEWING_SPACE_EXTENT",
                    "viewing_space.extent_mm",
                    "extents must be positive",
                );
            }
        }
    }
}

/// Area covered by the union of `rects`, by coordinate compression.
pub(crate) fn union_area(rects: &[Rect2D]) -> u64 {
    let mut xs: Vec<u64> = rects.iter().flat_map(|r| [u64::from(r.x), r.right()]).collect();
    let mut ys: Vec<u64> = rects.iter().flat_map(|r| [u64::from(r.y), r.bottom()]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let covered = rects.iter().any(|r| {
                u64::from(r.x) <= xw[0] && xw[1] <= r.right() && u64::from(r.y) <= yw[0] && yw[1] <= r.bottom()
            });
            if covered {
                area += (xw[1] - xw[0]) * (yw[1] - yw[0]);
            }
        }
    }
    area
}

/// Checks every structural invariant of the model. Never mutates or
/// normalizes its input; entries come out in document order.
pub fn validate_presentation(p: &Presentation) -> ValidationReport {
    let mut track_ids = BTreeMap::new();
    for (i, t) in p.tracks.iter().enumerate() {
        track_ids.entry(t.track_id).or_insert(i);
    }
    let mut meta_ids = BTreeMap::new();
    for (i, t) in p.timed_metadata.iter().enumerate() {
        meta_ids.entry(t.track_id).or_insert(i);
    }
    let mut c = Checker {
        p,
        entries: Vec::new(),
        track_ids,
        meta_ids,
        viewpoint_ids: p.viewpoints.iter().map(|v| v.viewpoint_id.as_str()).collect(),
    };
    c.brands();
    c.tracks();
    c.viewpoints();
    c.overlays();
    c.timed_metadata();
    c.tile_groups();
    c.viewing_space();
    ValidationReport { entries: c.entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hevc_track(id: u32) -> TrackDescriptor {
        TrackDescriptor::video(
            id,
            Codec::HevcMain10,
            Level::new(5, 1),
            Projection::Erp,
            PictureDims::new(4096, 2048).unwrap(),
        )
    }

    fn flat_track(id: u32) -> TrackDescriptor {
        TrackDescriptor {
            projection: Some(Projection::None),
            dims: Some(PictureDims::new(640, 360).unwrap()),
            ..hevc_track(id)
        }
    }

    fn vp_overlay(id: u32, track: u32) -> Overlay {
        Overlay::from_track(
            id,
            track,
            OverlayRendering::viewport_relative(NormalizedRect {
                x: 0.1,
                y: 0.1,
                width: 0.3,
                height: 0.2,
            }),
        )
    }

    fn codes(p: &Presentation) -> Vec<String> {
        validate_presentation(p).errors().map(|e| e.code.clone()).collect()
    }

    #[test]
    fn empty_is_valid() {
        let r = validate_presentation(&Presentation::default());
        assert!(r.entries.is_empty());
        assert_eq!(r.to_string(), "0 errors, 0 warnings");
    }

    #[test]
    fn dangling_overlay_ref() {
        let mut p = Presentation::default();
        p.overlays.push(vp_overlay(1, 9));
        let r = validate_presentation(&p);
        assert_eq!(r.error_count(), 1);
        assert_eq!(r.entries[0].code, "DANGLING_REF");
        assert_eq!(r.entries[0].path, "overlays[0].source.ref_id");
    }

    #[test]
    fn dynamic_viewpoint_needs_track() {
        let mut p = Presentation::default();
        let mut vp = Viewpoint::new("vp1");
        vp.dynamic = true;
        p.viewpoints.push(vp);
        assert_eq!(codes(&p), vec!["DYNAMIC_NO_TRACK"]);

        p.timed_metadata.push(TimedMetadataTrack {
            track_id: 5,
            kind: TimedMetadataKind::DynamicViewpoint,
            samples: vec![TimedSample {
                time_ms: 0,
                payload: MetadataPayload::DynamicViewpoint(DynamicViewpointPayload {
                    viewpoint_id: "vp1".into(),
                    position_xyz: [1, 2, 3],
                    gps: None,
                }),
            }],
        });
        assert!(codes(&p).is_empty());
    }

    #[test]
    fn track_invariants() {
        let mut p = Presentation::default();
        let mut t = hevc_track(1);
        t.level = None;
        p.tracks.push(t);
        let mut a = TrackDescriptor::audio(2, Codec::MpeghLc, Level::new(3, 0), 48_000);
        a.projection = Some(Projection::Erp);
        p.tracks.push(a);
        let mut c = hevc_track(1);
        c.projection = Some(Projection::Fisheye);
        c.coverage = Some(SphereRegion::full_sphere());
        p.tracks.push(c);
        let mut j = TrackDescriptor::image(4, Codec::Jpeg, Projection::Erp, PictureDims::new(100, 50).unwrap());
        j.level = Some(Level::new(1, 0));
        j.media_kind = MediaKind::Video;
        p.tracks.push(j);
        assert_eq!(
            codes(&p),
            vec![
                "LEVEL_PRESENCE",
                "PROJECTION_PRESENCE",
                "DUPLICATE_ID",
                "COVERAGE_PROJECTION",
                "CODEC_KIND_MISMATCH",
                "LEVEL_PRESENCE"
            ]
        );
    }

    #[test]
    fn erp_aspect_is_a_warning() {
        let mut p = Presentation::default();
        let mut t = hevc_track(1);
        t.dims = Some(PictureDims {
            width: 4000,
            height: 2048,
        });
        p.tracks.push(t);
        let r = validate_presentation(&p);
        assert!(r.is_valid());
        assert_eq!(r.warning_count(), 1);
        assert_eq!(r.entries[0].code, "ERP_ASPECT");
    }

    #[test]
    fn switch_rule_invariants() {
        let mut p = Presentation::default();
        let mut a = Viewpoint::new("a");
        a.switch_rules.push(SwitchRule::new("b", TimelineMode::Offset));
        a.switch_rules
            .push(SwitchRule::new("zz", TimelineMode::ContinueTime).as_default(Some(0)));
        a.switch_rules
            .push(SwitchRule::new("b", TimelineMode::ResetToZero).as_default(None));
        a.looping = Some(LoopInfo {
            loop_start_ms: 10,
            loop_end_ms: 10,
            max_loops: 0,
        });
        p.viewpoints.push(a);
        p.viewpoints.push(Viewpoint::new("b"));
        p.viewpoints.push(Viewpoint::new("b"));
        p.viewpoints.push(Viewpoint::new("bad id"));
        assert_eq!(
            codes(&p),
            vec![
                "OFFSET_MODE",
                "DANGLING_REF",
                "SELECTION_WINDOW",
                "DEFAULT_RULE_COUNT",
                "LOOP_RANGE",
                "DUPLICATE_ID",
                "VIEWPOINT_ID_FORMAT"
            ]
        );
    }

    #[test]
    fn gps_and_angles() {
        let mut p = Presentation::default();
        let mut v = Viewpoint::new("a").with_gps(GpsPosition::new(91.0, 0.0));
        v.orientation.yaw = 180.0;
        v.north_offset = Some(f64::NAN);
        p.viewpoints.push(v);
        assert_eq!(codes(&p), vec!["GPS_RANGE", "ANGLE_RANGE", "NON_FINITE"]);
    }

    #[test]
    fn overlay_invariants() {
        let mut p = Presentation::default();
        p.tracks.push(flat_track(1));
        p.tracks
            .push(TrackDescriptor::audio(2, Codec::AacHeV2, Level::new(4, 0), 48_000));

        let mut o1 = vp_overlay(1, 2); // audio source
        o1.properties.opacity = 1.5;
        p.overlays.push(o1);

        let mut o2 = vp_overlay(1, 1); // duplicate id
        o2.rendering.sphere_position = Some(SphereRegion::full_sphere());
        o2.interaction.toggle_region = Some(SphereRegion::full_sphere());
        o2.controls_timing = ControlsTiming::Timed;
        p.overlays.push(o2);

        let mut o3 = vp_overlay(3, 1);
        o3.source.kind = OverlaySourceKind::RegionOfTrack;
        o3.source.region = Some(Rect2D::new(600, 0, 100, 100));
        o3.rendering = OverlayRendering::sphere_plane(PlanePosition {
            center: ViewingOrientation::default(),
            distance: 1.5,
            width: 0.2,
            height: 0.1,
        });
        p.overlays.push(o3);

        let mut o4 = vp_overlay(4, 1);
        o4.source.kind = OverlaySourceKind::External;
        p.overlays.push(o4);

        let mut o5 = vp_overlay(5, 1);
        o5.source.kind = OverlaySourceKind::RegionOfTrack;
        o5.rendering.viewport_rect = Some(NormalizedRect {
            x: 0.9,
            y: 0.0,
            width: 0.2,
            height: 0.1,
        });
        p.overlays.push(o5);

        assert_eq!(
            codes(&p),
            vec![
                "SOURCE_KIND_MISMATCH",
                "OPACITY_RANGE",
                "DUPLICATE_ID",
                "RENDERING_FIELDS",
                "TOGGLE_WITHOUT_CONTROL",
                "TIMED_NO_TRACK",
                "REGION_OUT_OF_BOUNDS",
                "PLANE_DISTANCE",
                "SOURCE_REF_PRESENCE",
                "SOURCE_REGION",
                "NORM_RECT_RANGE",
            ]
        );
    }

    #[test]
    fn recommended_viewport_source_resolves_to_metadata() {
        let mut p = Presentation::default();
        p.timed_metadata.push(TimedMetadataTrack {
            track_id: 7,
            kind: TimedMetadataKind::RecommendedViewport,
            samples: vec![TimedSample {
                time_ms: 0,
                payload: MetadataPayload::RecommendedViewport {
                    region: SphereRegion::new(ViewingOrientation::default(), 90.0, 60.0).unwrap(),
                },
            }],
        });
        let mut o = vp_overlay(1, 7);
        o.source.kind = OverlaySourceKind::RecommendedViewport;
        p.overlays.push(o);
        assert!(codes(&p).is_empty());
        p.overlays[0].source.kind = OverlaySourceKind::VideoTrack;
        assert_eq!(codes(&p), vec!["SOURCE_KIND_MISMATCH"]);
    }

    #[test]
    fn timed_metadata_invariants() {
        let mut p = Presentation::default();
        p.tracks.push(flat_track(1));
        p.timed_metadata.push(TimedMetadataTrack {
            track_id: 1,
            kind: TimedMetadataKind::Rwqr,
            samples: vec![
                TimedSample {
                    time_ms: 10,
                    payload: MetadataPayload::Rwqr(RwqrPayload { entries: vec![] }),
                },
                TimedSample {
                    time_ms: 10,
                    payload: MetadataPayload::Rwqr(RwqrPayload {
                        entries: vec![RwqrEntry {
                            region: RankedRegion::Rect(Rect2D::new(0, 0, 10, 10)),
                            quality_rank: 0,
                        }],
                    }),
                },
                TimedSample {
                    time_ms: 20,
                    payload: MetadataPayload::ErpRegion(ErpRegionPayload {
                        grid_cols: 2,
                        grid_rows: 2,
                        cell_values: vec![1.0],
                        value_kind: ErpValueKind::Heatmap,
                    }),
                },
            ],
        });
        p.timed_metadata.push(TimedMetadataTrack {
            track_id: 3,
            kind: TimedMetadataKind::ErpRegion,
            samples: vec![TimedSample {
                time_ms: 0,
                payload: MetadataPayload::ErpRegion(ErpRegionPayload {
                    grid_cols: 2,
                    grid_rows: 1,
                    cell_values: vec![1.0],
                    value_kind: ErpValueKind::Heatmap,
                }),
            }],
        });
        assert_eq!(
            codes(&p),
            vec![
                "DUPLICATE_ID",
                "RWQR_EMPTY",
                "SAMPLE_ORDER",
                "RWQR_RANK",
                "PAYLOAD_KIND_MISMATCH",
                "ERP_GRID_SIZE"
            ]
        );
    }

    #[test]
    fn tile_group_invariants() {
        let dims = PictureDims::new(400, 200).unwrap();
        let mut p = Presentation::default();
        for id in 1..=4 {
            p.tracks.push(flat_track(id));
        }
        p.tile_groups.push(TileGroup::uniform_grid(1, dims, 2, 2, 1));
        assert!(codes(&p).is_empty());

        let mut g = TileGroup::uniform_grid(2, dims, 2, 2, 1);
        g.members[1].source_rect.x -= 10;
        p.tile_groups.push(g);
        let mut g = TileGroup::uniform_grid(3, dims, 2, 2, 1);
        g.members.pop();
        p.tile_groups.push(g);
        let mut g = TileGroup::uniform_grid(1, dims, 2, 1, 1);
        g.members[1].grid_position = (0, 0);
        g.members[1].track_id = 99;
        p.tile_groups.push(g);
        assert_eq!(
            codes(&p),
            vec![
                "TILE_OVERLAP",
                "TILE_GAP",
                "TILE_GAP",
                "DUPLICATE_ID",
                "DANGLING_REF",
                "TILE_GRID_DUP",
            ]
        );
    }

    #[test]
    fn union_area_counts_overlap_once() {
        let rects = [
            Rect2D::new(0, 0, 10, 10),
            Rect2D::new(5, 5, 10, 10),
            Rect2D::new(100, 100, 1, 1),
        ];
        assert_eq!(union_area(&rects), 100 + 100 - 25 + 1);
        assert_eq!(union_area(&[]), 0);
    }

    #[test]
    fn brand_and_viewing_space() {
        let mut p = Presentation::default();
        p.brands.insert("omaf".into());
        p.brands.insert("toolong".into());
        p.viewing_space = Some(ViewingSpace {
            shape: ViewingSpaceShape::Cuboid,
            extent_mm: [100, 0, 100],
        });
        assert_eq!(codes(&p), vec!["BRAND_FORMAT", "VIEWING_SPACE_EXTENT"]);
        p.viewing_space = Some(ViewingSpace {
            shape: ViewingSpaceShape::Sphere,
            extent_mm: [100, 0, 0],
        });
        assert_eq!(codes(&p), vec!["BRAND_FORMAT"]);
    }

    #[test]
    fn validation_does_not_normalize() {
        let mut p = Presentation::default();
        let mut v = Viewpoint::new("a");
        v.orientation.yaw = 200.0;
        p.viewpoints.push(v);
        let before = p.clone();
        assert_eq!(codes(&p), vec!["ANGLE_RANGE"]);
        assert_eq!(p, before);
        assert!(codes(&p.normalized()).is_empty());
    }
}
