//! Segment-by-segment streaming sessions driven by an orientation trace.

use super::{select_with_overlaps, viewport_quality, StrategyError, TileGrid, ViewportParams};
use crate::geometry::ViewingOrientation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Head orientation samples with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationTrace {
    samples: Vec<(u64, ViewingOrientation)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    time_ms: u64,
    azimuth: f64,
    elevation: f64,
    tilt: f64,
}

impl OrientationTrace {
    pub fn new(samples: Vec<(u64, ViewingOrientation)>) -> Result<Self, StrategyError> {
        if samples.is_empty() {
            return Err(StrategyError::Trace("trace is empty".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(StrategyError::Trace(format!(
                "times must strictly increase ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Self { samples })
    }

    pub fn constant(o: ViewingOrientation) -> Self {
        Self { samples: vec![(0, o)] }
    }

    pub fn samples(&self) -> &[(u64, ViewingOrientation)] {
        &self.samples
    }

    pub fn start_ms(&self) -> u64 {
        self.samples[0].0
    }

    pub fn end_ms(&self) -> u64 {
        self.samples[self.samples.len() - 1].0
    }

    /// Orientation of the last sample at or before `t`; the first sample
    /// before the trace starts.
    pub fn orientation_at(&self, t: u64) -> ViewingOrientation {
        let n = self.samples.partition_point(|s| s.0 <= t);
        self.samples[n.saturating_sub(1)].1
    }

    /// Reads `time_ms,azimuth,elevation,tilt` CSV with a header row.
    pub fn from_csv(text: &str) -> Result<Self, StrategyError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut samples = Vec::new();
        for (i, row) in rdr.deserialize::<TraceRow>().enumerate() {
            let r = row.map_err(|e| StrategyError::Trace(format!("row {}: {e}", i + 1)))?;
            let o = ViewingOrientation::new(r.azimuth, r.elevation, r.tilt);
            if !o.is_finite() || !(-90.0..=90.0).contains(&o.elevation) {
                return Err(StrategyError::Trace(format!("row {}: orientation out of range", i + 1)));
            }
            samples.push((r.time_ms, o.normalized()));
        }
        Self::new(samples)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for &(time_ms, o) in &self.samples {
            w.serialize(TraceRow {
                time_ms,
                azimuth: o.azimuth,
                elevation: o.elevation,
                tilt: o.tilt,
            })
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is UTF-8")
    }
}

/// Available bandwidth per segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetModel {
    Constant(u64),
    /// One value per segment; the last value holds for later segments.
    PerSegment(Vec<u64>),
}

impl BudgetModel {
    pub fn budget_for(&self, segment: usize) -> Option<u64> {
        match self {
            BudgetModel::Constant(b) => Some(*b),
            BudgetModel::PerSegment(v) => v.get(segment).or(v.last()).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub segment_ms: u64,
    pub viewport: ViewportParams,
    /// Optional per-cell weights, e.g. from a heatmap.
    pub weights: Option<Vec<f64>>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            segment_ms: 1000,
            viewport: ViewportParams::default(),
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentMetrics {
    pub index: usize,
    pub start_ms: u64,
    pub budget_bps: u64,
    /// Selected track per cell, row-major.
    pub track_ids: Vec<u32>,
    pub ranks: Vec<u32>,
    pub bitrate_bps: u64,
    pub bytes: u64,
    /// Time-averaged over the segment, using the orientation actually seen.
    pub weighted_mean_rank: f64,
    /// Time-averaged fraction of the viewport shown at best rank.
    pub best_rank_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub segments: Vec<SegmentMetrics>,
}

impl SessionMetrics {
    pub fn total_bytes(&self) -> u64 {
        self.segments.iter().map(|s| s.bytes).sum()
    }

    pub fn mean_coverage(&self) -> f64 {
        if self.segments.is_empty() {
            return 0.0;
        }
        self.segments.iter().map(|s| s.best_rank_coverage).sum::<f64>() / self.segments.len() as f64
    }

    /// One row per segment; track ids and ranks are `;`-joined.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "segment",
            "start_ms",
            "budget_bps",
            "bitrate_bps",
            "bytes",
            "weighted_mean_rank",
            "best_rank_coverage",
            "track_ids",
            "ranks",
        ])
        .expect("in-memory write");
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
        for s in &self.segments {
            w.write_record([
                s.index.to_string(),
                s.start_ms.to_string(),
                s.budget_bps.to_string(),
                s.bitrate_bps.to_string(),
                s.bytes.to_string(),
                format!("{:.6}", s.weighted_mean_rank),
                format!("{:.6}", s.best_rank_coverage),
                join(&s.track_ids),
                join(&s.ranks),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Runs one selection per segment.
///
/// Segments start at the first trace time and cover the trace span; a
/// single-sample trace yields one segment. The orientation at a segment's
/// start drives its selection. Quality metrics are averaged over the
/// segment using the orientation in effect at each moment, so head motion
/// inside a segment shows up in the metrics but not in the selection.
pub fn simulate_session(
    trace: &OrientationTrace,
    grid: &TileGrid,
    budget: &BudgetModel,
    cfg: &SessionConfig,
) -> Result<SessionMetrics, StrategyError> {
    if cfg.segment_ms == 0 {
        return Err(StrategyError::ZeroSegment);
    }
    if let Some(w) = &cfg.weights {
        if w.len() != grid.cells.len() {
            return Err(StrategyError::InvalidValues(format!(
                "{} weights for {} cells",
                w.len(),
                grid.cells.len()
            )));
        }
    }
    let span = trace.end_ms() - trace.start_ms();
    let count = span.div_ceil(cfg.segment_ms).max(1) as usize;

    let segments = (0..count)
        .into_par_iter()
        .map(|k| run_segment(k, trace, grid, budget, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SessionMetrics { segments })
}

fn run_segment(
    k: usize,
    trace: &OrientationTrace,
    grid: &TileGrid,
    budget: &BudgetModel,
    cfg: &SessionConfig,
) -> Result<SegmentMetrics, StrategyError> {
    let start = trace.start_ms() + k as u64 * cfg.segment_ms;
    let end = start + cfg.segment_ms;
    let budget_bps = budget
        .budget_for(k)
        .ok_or_else(|| StrategyError::InvalidValues("per-segment budget list is empty".into()))?;

    let overlaps = grid.viewport_overlaps(trace.orientation_at(start), &cfg.viewport)?;
    let sel = select_with_overlaps(grid, &overlaps, budget_bps, cfg.weights.as_deref())?;
    let ranks = sel.ranks();

    // piece boundaries: segment start plus every sample time inside it
    let mut cuts = vec![start];
    let first = trace.samples().partition_point(|s| s.0 <= start);
    cuts.extend(trace.samples()[first..].iter().map(|s| s.0).take_while(|&t| t < end));
    cuts.push(end);

    let (mut mean, mut cover) = viewport_quality(grid, &overlaps, &ranks);
    if cuts.len() > 2 {
        (mean, cover) = (0.0, 0.0);
        for w in cuts.windows(2) {
            let frac = (w[1] - w[0]) as f64 / cfg.segment_ms as f64;
            let ov = if w[0] == start {
                overlaps.clone()
            } else {
                grid.viewport_overlaps(trace.orientation_at(w[0]), &cfg.viewport)?
            };
            let (m, c) = viewport_quality(grid, &ov, &ranks);
            mean += frac * m;
            cover += frac * c;
        }
    }

    Ok(SegmentMetrics {
        index: k,
        start_ms: start,
        budget_bps,
        track_ids: sel.track_ids(),
        ranks,
        bitrate_bps: sel.total_bitrate_bps,
        bytes: sel.total_bitrate_bps * cfg.segment_ms / 8000,
        weighted_mean_rank: mean,
        best_rank_coverage: cover.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests;
    use super::*;

    fn grid_4x2() -> TileGrid {
        let (g, vs) = tests::grid_4x2();
        TileGrid::new(&g, &vs).unwrap()
    }

    fn o(az: f64) -> ViewingOrientation {
        ViewingOrientation::new(az, 0.0, 0.0)
    }

    #[test]
    fn trace_rules_and_csv() {
        assert!(OrientationTrace::new(vec![]).is_err());
        assert!(OrientationTrace::new(vec![(5, o(0.0)), (5, o(1.0))]).is_err());
        let t = OrientationTrace::new(vec![(0, o(0.0)), (100, o(45.0))]).unwrap();
        assert_eq!(t.orientation_at(99).azimuth, 0.0);
        assert_eq!(t.orientation_at(100).azimuth, 45.0);
        let csv = t.to_csv();
        assert!(csv.starts_with("time_ms,azimuth,elevation,tilt\n"));
        assert_eq!(OrientationTrace::from_csv(&csv).unwrap(), t);
        assert!(OrientationTrace::from_csv("time_ms,azimuth,elevation,tilt\n0,0,95,0\n").is_err());
    }

    #[test]
    fn static_trace_repeats_selection() {
        let g = grid_4x2();
        let trace = OrientationTrace::new((0..10).map(|i| (i * 500, o(10.0))).collect()).unwrap();
        let m = simulate_session(
            &trace,
            &g,
            &BudgetModel::Constant(12_000_000),
            &SessionConfig::default(),
        )
        .unwrap();
        assert_eq!(m.segments.len(), 5);
        assert!(m.segments.windows(2).all(|w| w[0].track_ids == w[1].track_ids));
        assert_eq!(m.segments[0].bytes, 12_000_000 / 8);
    }

    #[test]
    fn step_dips_until_next_boundary() {
        // look at the front, turn around at 2500 ms, segments of 1000 ms
        let g = grid_4x2();
        let trace = OrientationTrace::new(vec![(0, o(0.0)), (2500, o(180.0)), (6000, o(180.0))]).unwrap();
        let m = simulate_session(
            &trace,
            &g,
            &BudgetModel::Constant(12_000_000),
            &SessionConfig::default(),
        )
        .unwrap();
        let cov: Vec<f64> = m.segments.iter().map(|s| s.best_rank_coverage).collect();
        assert_eq!(cov.len(), 6);
        // front cells 1 and 2 upgraded: half the viewport at best rank
        assert!((cov[0] - 0.5).abs() < 1e-9);
        assert!((cov[1] - 0.5).abs() < 1e-9);
        // half of segment 2 looks backwards at base-quality tiles
        assert!((cov[2] - 0.25).abs() < 1e-9);
        for &c in &cov[3..] {
            assert!((c - 0.5).abs() < 1e-9);
        }
        assert!(m.segments[2].weighted_mean_rank > m.segments[1].weighted_mean_rank);
        assert_ne!(m.segments[2].track_ids, m.segments[3].track_ids);
    }

    #[test]
    fn unlimited_budget_full_coverage() {
        let g = grid_4x2();
        let trace = OrientationTrace::new((0..20).map(|i| (i * 250, o(i as f64 * 17.0 - 170.0))).collect()).unwrap();
        let m = simulate_session(
            &trace,
            &g,
            &BudgetModel::Constant(u64::MAX / 2),
            &SessionConfig::default(),
        )
        .unwrap();
        for s in &m.segments {
            assert_eq!(s.best_rank_coverage, 1.0);
            assert_eq!(s.weighted_mean_rank, 1.0);
        }
    }

    #[test]
    fn budget_models_and_outputs() {
        let g = grid_4x2();
        let trace = OrientationTrace::new(vec![(0, o(0.0)), (2999, o(0.0))]).unwrap();
        let b = BudgetModel::PerSegment(vec![8_000_000, 24_000_000]);
        let m = simulate_session(&trace, &g, &b, &SessionConfig::default()).unwrap();
        assert_eq!(
            m.segments.iter().map(|s| s.budget_bps).collect::<Vec<_>>(),
            [8_000_000, 24_000_000, 24_000_000]
        );
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().ends_with(",3;3;3;3;3;3;3;3"));
        assert!(m.to_json().contains("\"best_rank_coverage\""));
        let err = simulate_session(&trace, &g, &BudgetModel::Constant(1), &SessionConfig::default()).unwrap_err();
        assert_eq!(err.code(), "BUDGET_INFEASIBLE");
        let zero = SessionConfig {
            segment_ms: 0,
            ..Default::default()
        };
        assert_eq!(
            simulate_session(&trace, &g, &b, &zero).unwrap_err(),
            StrategyError::ZeroSegment
        );
    }
}
