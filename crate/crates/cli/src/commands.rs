use crate::args::{Command, Format, MpdCommand};
use crate::config::Config;
use crate::error::{CliError, ExitStatus};
use omaf_core::codec::{decode_box_tree, decode_presentation, encode_presentation, OmbBox};
use omaf_core::conformance::{conformance_report, vrif_recommendation_report, ConformanceReport};
use omaf_core::dash::{generate_mpd, parse_mpd, DashError, MpdDocument};
use omaf_core::geometry::Rect2D;
use omaf_core::model::*;
use omaf_core::playback::{
    compose, haversine_m, read_ppm, select_viewpoint_by_gps, write_pgm, write_ppm, Layer, PlaybackError,
};
use omaf_core::strategy::{
    apply_heatmap_bias, simulate_session, BudgetModel, OrientationTrace, QualityVariant, SessionConfig, StrategyError,
    TileGrid,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub struct Context {
    pub json: bool,
    pub timestamps: bool,
    pub config: Config,
}

impl Context {
    /// Writes a diagnostic line to standard error.
    pub fn note(&self, msg: impl std::fmt::Display) {
        if self.timestamps {
            let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
            eprintln!("[{}.{:03}] {msg}", t.as_secs(), t.subsec_millis());
        } else {
            eprintln!("{msg}");
        }
    }
}

pub fn run(ctx: &Context, command: &Command) -> Result<ExitStatus, CliError> {
    match command {
        Command::Inspect { file } => inspect(ctx, file),
        Command::Validate { file } => validate(ctx, file),
        Command::Convert { input, output, to } => convert(ctx, input, output.as_deref(), *to),
        Command::Conformance {
            manifest,
            three_gpp,
            vrif,
        } => conformance(ctx, manifest, *three_gpp, *vrif),
        Command::Mpd { action } => match action {
            MpdCommand::Gen { presentation, output } => mpd_gen(ctx, presentation, output.as_deref()),
            MpdCommand::Parse { mpd } => mpd_parse(ctx, mpd),
        },
        Command::Compose {
            background,
            background_alpha,
            layers,
            output,
            alpha_output,
        } => compose_cmd(
            ctx,
            background,
            background_alpha.as_deref(),
            layers,
            output.as_deref(),
            alpha_output.as_deref(),
        ),
        Command::Simulate {
            trace,
            grid,
            variants,
            budget,
            segment_ms,
            group_id,
            heatmap,
            hfov,
            vfov,
            sampling,
            output,
        } => {
            let cfg = SessionConfig {
                segment_ms: *segment_ms,
                viewport: ctx.config.viewport(*hfov, *vfov, *sampling),
                weights: None,
            };
            let inputs = SimulateInputs {
                trace,
                grid,
                variants,
                budget,
                group_id: *group_id,
                heatmap: heatmap.as_deref(),
            };
            simulate(ctx, &inputs, cfg, output.as_deref())
        }
        Command::GpsSelect { presentation, lat, lon } => gps_select(ctx, presentation, *lat, *lon),
    }
}

// ---------------------------------------------------------------- input/output

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// JSON by extension, or by a leading `{` / `[` when the extension says
/// nothing.
fn looks_like_json(path: &Path, bytes: &[u8]) -> bool {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => true,
        Some(e) if e.eq_ignore_ascii_case("omb") => false,
        _ => matches!(bytes.iter().find(|b| !b.is_ascii_whitespace()), Some(b'{' | b'[')),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::parse(path, e))
}

fn load_presentation(path: &Path) -> Result<Presentation, CliError> {
    let bytes = read(path)?;
    if looks_like_json(path, &bytes) {
        parse_json(path, &bytes)
    } else {
        decode_presentation(&bytes).map_err(|e| CliError::codec(path, e))
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn emit_json(value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable output");
    text.push('\n');
    emit(None, text.as_bytes())
}

/// Serde name of a unit enum variant, for text output.
fn name(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => "?".into(),
    }
}

// ---------------------------------------------------------------- inspect

fn box_json(boxes: &[OmbBox], mut offset: u64) -> serde_json::Value {
    let mut out = Vec::new();
    for b in boxes {
        let mut entry = json!({
            "fourcc": b.fourcc.to_string(),
            "offset": offset,
            "size": b.encoded_len(),
        });
        if !b.children().is_empty() {
            entry["children"] = box_json(b.children(), offset + 8);
        }
        out.push(entry);
        offset += b.encoded_len();
    }
    serde_json::Value::Array(out)
}

fn box_lines(out: &mut String, boxes: &[OmbBox], mut offset: u64, depth: usize) {
    for b in boxes {
        let _ = writeln!(
            out,
            "{:indent$}{}  offset {offset}  size {}",
            "",
            b.fourcc,
            b.encoded_len(),
            indent = 2 + 2 * depth
        );
        box_lines(out, b.children(), offset + 8, depth + 1);
        offset += b.encoded_len();
    }
}

fn describe(p: &Presentation) -> String {
    let mut s = String::new();
    let brands: Vec<&str> = p.brands.iter().map(String::as_str).collect();
    let _ = writeln!(
        s,
        "brands: {}",
        if brands.is_empty() {
            "(none)".into()
        } else {
            brands.join(" ")
        }
    );

    let _ = writeln!(s, "tracks: {}", p.tracks.len());
    for t in &p.tracks {
        let _ = write!(s, "  track {}: {} {}", t.track_id, name(&t.media_kind), t.codec);
        if let Some(l) = t.level {
            let _ = write!(s, " level {l}");
        }
        if let Some(pr) = t.projection {
            let _ = write!(s, " {pr}");
        }
        if let Some(d) = t.dims {
            let _ = write!(s, " {}x{}", d.width, d.height);
        }
        if t.stereo {
            s.push_str(" stereo");
        }
        if let Some(r) = t.sample_rate_hz {
            let _ = write!(s, " {r} Hz");
        }
        s.push('\n');
    }

    let _ = writeln!(s, "viewpoints: {}", p.viewpoints.len());
    for v in &p.viewpoints {
        let [x, y, z] = v.position_xyz;
        let _ = write!(
            s,
            "  {} {:?} at {x},{y},{z} group {}",
            v.viewpoint_id, v.label, v.group_id
        );
        if let Some(g) = v.gps {
            let _ = write!(s, " gps {},{}", g.latitude, g.longitude);
        }
        if !v.switch_rules.is_empty() {
            let targets: Vec<&str> = v.switch_rules.iter().map(|r| r.target_viewpoint_id.as_str()).collect();
            let _ = write!(s, " switches to {}", targets.join(","));
        }
        if let Some(l) = v.looping {
            let _ = write!(s, " loops {}..{} ms", l.loop_start_ms, l.loop_end_ms);
        }
        if v.dynamic {
            s.push_str(" dynamic");
        }
        s.push('\n');
    }

    let _ = writeln!(s, "overlays: {}", p.overlays.len());
    for o in &p.overlays {
        let _ = write!(s, "  overlay {}: {} source", o.overlay_id, name(&o.source.kind));
        if let Some(r) = o.source.ref_id {
            let _ = write!(s, " {r}");
        }
        let _ = writeln!(
            s,
            ", {} rendering, priority {}, layer {}, opacity {}",
            name(&o.rendering.kind),
            o.properties.priority,
            o.properties.layering_order,
            o.properties.opacity
        );
    }

    let _ = writeln!(s, "timed metadata: {}", p.timed_metadata.len());
    for t in &p.timed_metadata {
        let _ = writeln!(
            s,
            "  track {}: {}, {} samples",
            t.track_id,
            name(&t.kind),
            t.samples.len()
        );
    }

    let _ = writeln!(s, "tile groups: {}", p.tile_groups.len());
    for g in &p.tile_groups {
        let (c, r) = g.grid_size();
        let _ = writeln!(s, "  group {}: {c}x{r} grid, {} members", g.group_id, g.members.len());
    }
    if let Some(vs) = p.viewing_space {
        let [a, b, c] = vs.extent_mm;
        let _ = writeln!(s, "viewing space: {} {a}x{b}x{c} mm", name(&vs.shape));
    }
    for e in &p.extras {
        let _ = writeln!(
            s,
            "unknown box {} at position {}, {} bytes",
            omaf_core::codec::FourCc(e.fourcc),
            e.position,
            e.payload.len()
        );
    }
    s
}

fn inspect(ctx: &Context, file: &Path) -> Result<ExitStatus, CliError> {
    let bytes = read(file)?;
    let tree = decode_box_tree(&bytes).map_err(|e| CliError::parse(file, e))?;
    let p = decode_presentation(&bytes).map_err(|e| CliError::codec(file, e))?;
    if ctx.json {
        emit_json(&json!({ "boxes": box_json(&tree, 0), "presentation": p }))?;
    } else {
        let mut s = format!("{}: {} bytes\nboxes:\n", file.display(), bytes.len());
        box_lines(&mut s, &tree, 0, 0);
        s.push_str(&describe(&p));
        emit(None, s.as_bytes())?;
    }
    Ok(ExitStatus::OK)
}

// ---------------------------------------------------------------- validate / convert

fn validate(ctx: &Context, file: &Path) -> Result<ExitStatus, CliError> {
    let p = load_presentation(file)?;
    let report = validate_presentation(&p);
    if ctx.json {
        emit_json(&json!({
            "errors": report.error_count(),
            "warnings": report.warning_count(),
            "entries": report.entries,
        }))?;
    } else {
        emit(None, format!("{report}\n").as_bytes())?;
    }
    Ok(if report.is_valid() {
        ExitStatus::OK
    } else {
        ExitStatus::FAILURES
    })
}

fn convert(ctx: &Context, input: &Path, output: Option<&Path>, to: Option<Format>) -> Result<ExitStatus, CliError> {
    let bytes = read(input)?;
    let from_json = looks_like_json(input, &bytes);
    let p: Presentation = if from_json {
        parse_json(input, &bytes)?
    } else {
        decode_presentation(&bytes).map_err(|e| CliError::codec(input, e))?
    };
    let target = to.unwrap_or(if from_json { Format::Omb } else { Format::Json });
    let out = match target {
        Format::Omb => encode_presentation(&p).map_err(|e| CliError::codec(input, e))?,
        Format::Json => {
            let report = validate_presentation(&p);
            if !report.is_valid() {
                return Err(CliError::Failed(format!("{}: {report}", input.display())));
            }
            let mut s = p.to_json();
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(output, &out)?;
    if let Some(path) = output {
        ctx.note(format_args!("wrote {} bytes to {}", out.len(), path.display()));
    }
    Ok(ExitStatus::OK)
}

// ---------------------------------------------------------------- conformance

fn conformance(ctx: &Context, manifest: &Path, three_gpp: bool, vrif: bool) -> Result<ExitStatus, CliError> {
    let bytes = read(manifest)?;
    let p = if looks_like_json(manifest, &bytes) && bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'[') {
        Presentation {
            tracks: parse_json(manifest, &bytes)?,
            ..Default::default()
        }
    } else {
        load_presentation(manifest)?
    };
    let report = conformance_report(&p.tracks, three_gpp);
    let vrif_report = vrif.then(|| vrif_recommendation_report(&p));
    let failures = failing_tracks(&report);

    if ctx.json {
        let mut v = json!({ "tracks": report.tracks, "failing_tracks": failures });
        if let Some(r) = &vrif_report {
            v["vrif"] = serde_json::to_value(r).expect("serialisable report");
        }
        emit_json(&v)?;
    } else {
        let mut s = report.to_string();
        if let Some(r) = &vrif_report {
            s.push_str("VRIF recommendations\n");
            for u in &r.profiles_used {
                let ids: Vec<String> = u.track_ids.iter().map(u32::to_string).collect();
                let _ = writeln!(s, "  uses {} (tracks {})", u.profile, ids.join(", "));
            }
            for name in &r.recommended_for_8k {
                let _ = writeln!(s, "  recommended for 8K: {name}");
            }
            for b in &r.suggested_brands {
                let state = if b.declared { "declared" } else { "not declared" };
                let _ = writeln!(s, "  brand {} ({}): {state}", b.brand, b.reason);
            }
            for n in &r.notes {
                let _ = writeln!(s, "  note: {n}");
            }
        }
        let _ = writeln!(
            s,
            "{} tracks, {} without a matching profile",
            report.tracks.len(),
            failures.len()
        );
        emit(None, s.as_bytes())?;
    }
    Ok(if failures.is_empty() {
        ExitStatus::OK
    } else {
        ExitStatus::FAILURES
    })
}

/// Tracks matching no profile, or (when checked) no operation point.
fn failing_tracks(report: &ConformanceReport) -> Vec<u32> {
    report
        .tracks
        .iter()
        .filter(|t| t.profiles.matched.is_empty() || t.operation_points.as_ref().is_some_and(|m| m.matched.is_empty()))
        .map(|t| t.track_id)
        .collect()
}

// ---------------------------------------------------------------- mpd

fn dash_error(path: &Path, e: DashError) -> CliError {
    match e {
        DashError::Validation(report) => CliError::Failed(format!("{}: {report}", path.display())),
        other => CliError::parse(path, other),
    }
}

fn mpd_gen(ctx: &Context, presentation: &Path, output: Option<&Path>) -> Result<ExitStatus, CliError> {
    let p = load_presentation(presentation)?;
    let xml = generate_mpd(&p, &ctx.config.dash()).map_err(|e| dash_error(presentation, e))?;
    emit(output, xml.as_bytes())?;
    Ok(ExitStatus::OK)
}

fn describe_mpd(doc: &MpdDocument) -> String {
    let mut s = String::new();
    for a in &doc.adaptation_sets {
        let _ = writeln!(
            s,
            "adaptation set {} ({}): {}",
            a.id,
            name(&a.kind),
            a.representation_ids.join(", ")
        );
        if let Some(v) = &a.vwpt {
            let [x, y, z] = v.position_xyz;
            let _ = write!(s, "  VWPT {} at {x},{y},{z} group {}", v.viewpoint_id, v.group_id);
            if let Some(g) = v.gps {
                let _ = write!(s, " gps {},{}", g.latitude, g.longitude);
            }
            s.push('\n');
        }
        if let Some(o) = &a.ovly {
            let ids: Vec<String> = o.overlay_ids.iter().map(u32::to_string).collect();
            let _ = write!(s, "  OVLY overlays {}", ids.join(","));
            if let Some(p) = &o.priorities {
                let ps: Vec<String> = p.iter().map(u32::to_string).collect();
                let _ = write!(s, " priorities {}", ps.join(","));
            }
            s.push('\n');
        }
    }
    let _ = writeln!(
        s,
        "{} adaptation sets, {} VWPT, {} OVLY",
        doc.adaptation_sets.len(),
        doc.vwpt_descriptors().len(),
        doc.ovly_descriptors().len()
    );
    s
}

fn mpd_parse(ctx: &Context, mpd: &Path) -> Result<ExitStatus, CliError> {
    let xml = read_text(mpd)?;
    let doc = parse_mpd(&xml, &ctx.config.dash()).map_err(|e| CliError::parse(mpd, format!("{}: {e}", e.code())))?;
    if ctx.json {
        emit_json(&doc)?;
    } else {
        emit(None, describe_mpd(&doc).as_bytes())?;
    }
    Ok(ExitStatus::OK)
}

// ---------------------------------------------------------------- compose

#[derive(Debug, Clone, PartialEq)]
struct LayerSpec {
    image: String,
    alpha: Option<String>,
    at: Option<Rect2D>,
    opacity: f64,
}

fn parse_layer_spec(spec: &str) -> Result<LayerSpec, CliError> {
    let bad = |m: String| CliError::Usage(format!("layer {spec:?}: {m}"));
    let mut parts = spec.split(',');
    let image = parts
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| bad("missing image path".into()))?;
    let mut out = LayerSpec {
        image: image.to_string(),
        alpha: None,
        at: None,
        opacity: 1.0,
    };
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        match key {
            "alpha" => out.alpha = Some(value.to_string()),
            "opacity" => {
                out.opacity = value
                    .parse()
                    .ok()
                    .filter(|o: &f64| (0.0..=1.0).contains(o))
                    .ok_or_else(|| bad(format!("opacity {value:?} is not in [0, 1]")))?;
            }
            "at" => {
                let n: Vec<u32> = value
                    .split(':')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad(format!("placement {value:?} is not X:Y:W:H")))?;
                let [x, y, w, h] = n[..] else {
                    return Err(bad(format!("placement {value:?} is not X:Y:W:H")));
                };
                out.at = Some(Rect2D::new(x, y, w, h));
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(out)
}

fn load_raster(image: &Path, alpha: Option<&Path>) -> Result<omaf_core::playback::Raster, CliError> {
    let rgb = read(image)?;
    let a = alpha.map(read).transpose()?;
    read_ppm(&rgb, a.as_deref()).map_err(|e| CliError::parse(image, e))
}

fn compose_cmd(
    ctx: &Context,
    background: &Path,
    background_alpha: Option<&Path>,
    layers: &[String],
    output: Option<&Path>,
    alpha_output: Option<&Path>,
) -> Result<ExitStatus, CliError> {
    let specs: Vec<LayerSpec> = layers.iter().map(|s| parse_layer_spec(s)).collect::<Result<_, _>>()?;
    let bg = load_raster(background, background_alpha)?;
    let mut built = Vec::with_capacity(specs.len());
    for spec in &specs {
        let raster = load_raster(Path::new(&spec.image), spec.alpha.as_deref().map(Path::new))?;
        built.push(Layer {
            placement: spec.at.unwrap_or(Rect2D::new(0, 0, raster.width, raster.height)),
            raster,
            opacity: spec.opacity,
            use_alpha: spec.alpha.is_some(),
        });
    }
    let out = compose(&bg, &built).map_err(|e| match e {
        PlaybackError::Geometry(g) => CliError::Usage(format!("layer placement: {g}")),
        other => CliError::Usage(other.to_string()),
    })?;
    emit(output, &write_ppm(&out))?;
    if let Some(path) = alpha_output {
        emit(Some(path), &write_pgm(&out))?;
    }
    ctx.note(format_args!(
        "composed {} layers over {}x{}",
        built.len(),
        out.width,
        out.height
    ));
    Ok(ExitStatus::OK)
}

// ---------------------------------------------------------------- simulate

struct SimulateInputs<'a> {
    trace: &'a Path,
    grid: &'a Path,
    variants: &'a Path,
    budget: &'a str,
    group_id: Option<u32>,
    heatmap: Option<&'a Path>,
}

#[derive(Debug, Deserialize)]
struct VariantRow {
    track_id: u32,
    quality_rank: u32,
    bitrate_bps: u64,
    col: u32,
    row: u32,
}

fn parse_variants(path: &Path, text: &str) -> Result<Vec<QualityVariant>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    rdr.deserialize::<VariantRow>()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| CliError::parse(path, format!("row {}: {e}", i + 1)))?;
            Ok(QualityVariant {
                track_id: r.track_id,
                quality_rank: r.quality_rank,
                bitrate_bps: r.bitrate_bps,
                grid_position: (r.col, r.row),
            })
        })
        .collect()
}

fn parse_budget(text: &str) -> Result<BudgetModel, CliError> {
    let values: Vec<u64> = text
        .split(',')
        .map(|v| v.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("budget {text:?} is not a bit rate or comma-separated list")))?;
    Ok(match values[..] {
        [one] => BudgetModel::Constant(one),
        _ => BudgetModel::PerSegment(values),
    })
}

fn load_tile_group(path: &Path, group_id: Option<u32>) -> Result<TileGroup, CliError> {
    let bytes = read(path)?;
    if looks_like_json(path, &bytes) {
        if let Ok(g) = serde_json::from_slice::<TileGroup>(&bytes) {
            return Ok(g);
        }
    }
    let p = load_presentation(path)?;
    let group = match group_id {
        Some(id) => p.tile_groups.iter().find(|g| g.group_id == id),
        None => p.tile_groups.first(),
    };
    group
        .cloned()
        .ok_or_else(|| CliError::parse(path, "no matching tile group"))
}

fn strategy_error(path: &Path, e: StrategyError) -> CliError {
    match e {
        StrategyError::BudgetInfeasible { .. } => CliError::Failed(e.to_string()),
        StrategyError::ZeroSegment => CliError::Usage(e.to_string()),
        other => CliError::parse(path, format!("{}: {other}", other.code())),
    }
}

fn simulate(
    ctx: &Context,
    inputs: &SimulateInputs,
    mut cfg: SessionConfig,
    output: Option<&Path>,
) -> Result<ExitStatus, CliError> {
    let budget = parse_budget(inputs.budget)?;
    let trace = OrientationTrace::from_csv(&read_text(inputs.trace)?).map_err(|e| strategy_error(inputs.trace, e))?;
    let group = load_tile_group(inputs.grid, inputs.group_id)?;
    let variants = parse_variants(inputs.variants, &read_text(inputs.variants)?)?;
    let grid = TileGrid::new(&group, &variants).map_err(|e| strategy_error(inputs.variants, e))?;
    if let Some(path) = inputs.heatmap {
        let payload: ErpRegionPayload = parse_json(path, &read(path)?)?;
        cfg.weights = Some(apply_heatmap_bias(&grid, &payload).map_err(|e| strategy_error(path, e))?);
    }
    let metrics = simulate_session(&trace, &grid, &budget, &cfg).map_err(|e| strategy_error(inputs.trace, e))?;
    let text = if ctx.json {
        let mut s = metrics.to_json();
        s.push('\n');
        s
    } else {
        metrics.to_csv()
    };
    emit(output, text.as_bytes())?;
    ctx.note(format_args!(
        "{} segments, {} bytes, mean best-rank coverage {:.4}",
        metrics.segments.len(),
        metrics.total_bytes(),
        metrics.mean_coverage()
    ));
    Ok(ExitStatus::OK)
}

// ---------------------------------------------------------------- gps-select

fn gps_select(ctx: &Context, presentation: &Path, lat: f64, lon: f64) -> Result<ExitStatus, CliError> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(CliError::Usage(format!("position {lat},{lon} is out of range")));
    }
    let p = load_presentation(presentation)?;
    let device = GpsPosition {
        latitude: lat,
        longitude: lon,
        altitude: None,
    };
    let id = match select_viewpoint_by_gps(&p.viewpoints, &device) {
        Ok(id) => id,
        Err(e @ PlaybackError::NoCandidate) => return Err(CliError::Failed(e.to_string())),
        Err(e) => return Err(CliError::parse(presentation, e)),
    };
    let gps = p
        .viewpoint(&id)
        .and_then(|v| v.gps)
        .expect("selected viewpoints carry GPS");
    let distance = haversine_m(&gps, &device);
    if ctx.json {
        emit_json(&json!({ "viewpoint_id": id, "distance_m": distance }))?;
    } else {
        emit(None, format!("{id}\t{distance:.1} m\n").as_bytes())?;
    }
    Ok(ExitStatus::OK)
}
