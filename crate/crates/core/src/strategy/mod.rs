//! Viewport-dependent tile selection over an ERP tile grid.
//!
//! Every grid cell always receives a variant (mixed-quality tiling), so the
//! whole sphere stays decodable. Spare budget then goes to cells in
//! decreasing order of viewport overlap.

mod session;

pub use session::{simulate_session, BudgetModel, OrientationTrace, SegmentMetrics, SessionConfig, SessionMetrics};

use crate::geometry::{
    region_overlap_fraction_with, viewport_region, wrap_degrees, GeometryError, OverlapSampling, Rect2D, SphereRegion,
    ViewingOrientation,
};
use crate::model::{union_area, ErpRegionPayload, ErpValueKind, TileGroup};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("BUDGET_INFEASIBLE: full coverage needs {required_bps} bps, budget is {budget_bps} bps")]
    BudgetInfeasible { required_bps: u64, budget_bps: u64 },
    #[error("grid cell {0:?} has no variant")]
    MissingVariant((u32, u32)),
    #[error("grid cell {cell:?} has two variants with rank {rank}")]
    DuplicateRank { cell: (u32, u32), rank: u32 },
    #[error("variant for track {track_id} names cell {cell:?}, which is not in the tile group")]
    UnknownCell { track_id: u32, cell: (u32, u32) },
    #[error("variant for track {0} has quality rank 0; ranks start at 1")]
    ZeroRank(u32),
    #[error("GRID_MISMATCH: {payload_cols}x{payload_rows} value grid does not tile a {cols}x{rows} tile grid")]
    GridMismatch {
        payload_cols: u32,
        payload_rows: u32,
        cols: u32,
        rows: u32,
    },
    #[error("value grid: {0}")]
    InvalidValues(String),
    #[error("tile layout: {0}")]
    Layout(String),
    #[error("trace: {0}")]
    Trace(String),
    #[error("segment duration must be positive")]
    ZeroSegment,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl StrategyError {
    pub fn code(&self) -> &'static str {
        match self {
            StrategyError::BudgetInfeasible { .. } => "BUDGET_INFEASIBLE",
            StrategyError::GridMismatch { .. } => "GRID_MISMATCH",
            StrategyError::Layout(_) => "LAYOUT",
            StrategyError::Trace(_) => "TRACE",
            StrategyError::Geometry(_) => "GEOMETRY",
            _ => "INVALID_INPUT",
        }
    }
}

/// One encoded version of a tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityVariant {
    pub track_id: u32,
    /// Lower is better; starts at 1.
    pub quality_rank: u32,
    pub bitrate_bps: u64,
    /// (column, row)
    pub grid_position: (u32, u32),
}

/// Viewport parameters for selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewportParams {
    pub hfov: f64,
    pub vfov: f64,
    pub sampling: OverlapSampling,
}

impl Default for ViewportParams {
    fn default() -> Self {
        Self {
            hfov: 90.0,
            vfov: 90.0,
            sampling: OverlapSampling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub grid_position: (u32, u32),
    pub source_rect: Rect2D,
    pub region: SphereRegion,
    /// Sorted by ascending rank.
    pub variants: Vec<QualityVariant>,
}

impl GridCell {
    fn cheapest(&self) -> &QualityVariant {
        self.variants
            .iter()
            .min_by(|a, b| {
                a.bitrate_bps
                    .cmp(&b.bitrate_bps)
                    .then(a.quality_rank.cmp(&b.quality_rank))
            })
            .expect("cells have variants")
    }

    fn best(&self) -> &QualityVariant {
        &self.variants[0]
    }

    /// Best rank among variants costing at most `max_bps`.
    fn best_within(&self, max_bps: u64) -> Option<&QualityVariant> {
        self.variants.iter().find(|v| v.bitrate_bps <= max_bps)
    }
}

/// A tile group over a full ERP picture with its variants attached. Cells are
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    pub cols: u32,
    pub rows: u32,
    pub picture: Rect2D,
    pub cells: Vec<GridCell>,
}

/// Sphere region of an ERP pixel rectangle, from its corners.
pub fn erp_rect_region(rect: &Rect2D, picture_width: u32, picture_height: u32) -> SphereRegion {
    let (w, h) = (f64::from(picture_width), f64::from(picture_height));
    let az_left = (0.5 - f64::from(rect.x) / w) * 360.0;
    let az_right = (0.5 - rect.right() as f64 / w) * 360.0;
    let el_top = (0.5 - f64::from(rect.y) / h) * 180.0;
    let el_bottom = (0.5 - rect.bottom() as f64 / h) * 180.0;
    SphereRegion {
        center: ViewingOrientation::new(
            wrap_degrees((az_left + az_right) / 2.0),
            (el_top + el_bottom) / 2.0,
            0.0,
        ),
        azimuth_range: az_left - az_right,
        elevation_range: el_top - el_bottom,
    }
}

impl TileGrid {
    pub fn new(group: &TileGroup, variants: &[QualityVariant]) -> Result<Self, StrategyError> {
        let picture = group
            .bounds()
            .ok_or_else(|| StrategyError::Layout("tile group has no members".into()))?;
        check_partition(group, picture)?;
        let (cols, rows) = group.grid_size();
        let mut members: Vec<_> = group.members.iter().collect();
        members.sort_by_key(|m| (m.grid_position.1, m.grid_position.0));
        if members.len() != (cols * rows) as usize {
            return Err(StrategyError::Layout(format!(
                "{} members for a {cols}x{rows} grid",
                members.len()
            )));
        }

        let mut by_cell: BTreeMap<(u32, u32), Vec<QualityVariant>> = BTreeMap::new();
        for v in variants {
            if !members.iter().any(|m| m.grid_position == v.grid_position) {
                return Err(StrategyError::UnknownCell {
                    track_id: v.track_id,
                    cell: v.grid_position,
                });
            }
            if v.quality_rank == 0 {
                return Err(StrategyError::ZeroRank(v.track_id));
            }
            by_cell.entry(v.grid_position).or_default().push(*v);
        }

        let mut cells = Vec::with_capacity(members.len());
        for m in members {
            let mut vs = by_cell
                .remove(&m.grid_position)
                .ok_or(StrategyError::MissingVariant(m.grid_position))?;
            vs.sort_by_key(|v| v.quality_rank);
            if let Some(w) = vs.windows(2).find(|w| w[0].quality_rank == w[1].quality_rank) {
                return Err(StrategyError::DuplicateRank {
                    cell: m.grid_position,
                    rank: w[0].quality_rank,
                });
            }
            let rect = Rect2D::new(
                m.source_rect.x - picture.x,
                m.source_rect.y - picture.y,
                m.source_rect.width,
                m.source_rect.height,
            );
            cells.push(GridCell {
                grid_position: m.grid_position,
                source_rect: m.source_rect,
                region: erp_rect_region(&rect, picture.width, picture.height),
                variants: vs,
            });
        }
        Ok(Self {
            cols,
            rows,
            picture,
            cells,
        })
    }

    /// Fraction of the viewport falling in each cell, row-major.
    pub fn viewport_overlaps(&self, o: ViewingOrientation, vp: &ViewportParams) -> Result<Vec<f64>, StrategyError> {
        let view = viewport_region(o, vp.hfov, vp.vfov)?;
        Ok(self
            .cells
            .iter()
            .map(|c| region_overlap_fraction_with(&view, &c.region, vp.sampling))
            .collect())
    }

    /// Sum of the cheapest variants' bitrates: the smallest feasible budget.
    pub fn min_budget_bps(&self) -> u64 {
        self.cells.iter().map(|c| c.cheapest().bitrate_bps).sum()
    }

    pub fn max_budget_bps(&self) -> u64 {
        self.cells.iter().map(|c| c.best().bitrate_bps).sum()
    }
}

fn check_partition(group: &TileGroup, picture: Rect2D) -> Result<(), StrategyError> {
    let rects: Vec<Rect2D> = group.members.iter().map(|m| m.source_rect).collect();
    let sum: u64 = rects.iter().map(Rect2D::area).sum();
    if sum != union_area(&rects) {
        return Err(StrategyError::Layout("source rects overlap".into()));
    }
    if sum != picture.area() {
        return Err(StrategyError::Layout("source rects leave a gap".into()));
    }
    Ok(())
}

/// Chosen variant for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellChoice {
    pub grid_position: (u32, u32),
    pub variant: QualityVariant,
    /// Viewport overlap fraction of the cell at selection time.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Row-major, one per cell.
    pub cells: Vec<CellChoice>,
    pub total_bitrate_bps: u64,
}

impl Selection {
    pub fn ranks(&self) -> Vec<u32> {
        self.cells.iter().map(|c| c.variant.quality_rank).collect()
    }

    pub fn track_ids(&self) -> Vec<u32> {
        self.cells.iter().map(|c| c.variant.track_id).collect()
    }
}

/// Per-cell weights that scale the overlap key. `None` means all 1.
pub type CellWeights = Vec<f64>;

pub fn select_tiles(
    orientation: ViewingOrientation,
    grid: &TileGrid,
    budget_bps: u64,
    vp: &ViewportParams,
) -> Result<Selection, StrategyError> {
    select_tiles_weighted(orientation, grid, budget_bps, vp, None)
}

/// Greedy selection.
///
/// 1. every cell gets its cheapest variant, or `BUDGET_INFEASIBLE`;
/// 2. cells are visited by `overlap * weight` descending, then weight
///    descending, then row-major;
/// 3. each visited cell is raised to its best rank if that fits; the first
///    cell that does not fit gets the best variant that still fits and the
///    pass stops.
///
/// Stopping at the first miss keeps every cell's rank monotone in the budget.
pub fn select_tiles_weighted(
    orientation: ViewingOrientation,
    grid: &TileGrid,
    budget_bps: u64,
    vp: &ViewportParams,
    weights: Option<&[f64]>,
) -> Result<Selection, StrategyError> {
    let overlaps = grid.viewport_overlaps(orientation, vp)?;
    select_with_overlaps(grid, &overlaps, budget_bps, weights)
}

/// [`select_tiles_weighted`] with precomputed overlaps.
pub fn select_with_overlaps(
    grid: &TileGrid,
    overlaps: &[f64],
    budget_bps: u64,
    weights: Option<&[f64]>,
) -> Result<Selection, StrategyError> {
    let mut chosen: Vec<QualityVariant> = grid.cells.iter().map(|c| *c.cheapest()).collect();
    let mut total: u64 = chosen.iter().map(|v| v.bitrate_bps).sum();
    if total > budget_bps {
        return Err(StrategyError::BudgetInfeasible {
            required_bps: total,
            budget_bps,
        });
    }

    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut order: Vec<usize> = (0..grid.cells.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = overlaps[a] * weight(a);
        let kb = overlaps[b] * weight(b);
        kb.total_cmp(&ka).then(weight(b).total_cmp(&weight(a))).then(a.cmp(&b))
    });

    for i in order {
        let cell = &grid.cells[i];
        let current = chosen[i].bitrate_bps;
        let room = budget_bps - total + current;
        let best = cell.best();
        if best.bitrate_bps <= room {
            total = total - current + best.bitrate_bps;
            chosen[i] = *best;
        } else {
            if let Some(v) = cell.best_within(room) {
                if v.quality_rank < chosen[i].quality_rank {
                    total = total - current + v.bitrate_bps;
                    chosen[i] = *v;
                }
            }
            break;
        }
    }

    Ok(Selection {
        cells: grid
            .cells
            .iter()
            .zip(chosen)
            .zip(overlaps)
            .map(|((c, v), &o)| CellChoice {
                grid_position: c.grid_position,
                variant: v,
                overlap: o,
            })
            .collect(),
        total_bitrate_bps: total,
    })
}

/// Viewport-weighted mean quality rank (lower is better) and the viewport
/// fraction shown at each cell's best rank.
pub fn viewport_quality(grid: &TileGrid, overlaps: &[f64], ranks: &[u32]) -> (f64, f64) {
    let sum: f64 = overlaps.iter().sum();
    let (w, sum): (Vec<f64>, f64) = if sum > 0.0 {
        (overlaps.to_vec(), sum)
    } else {
        (vec![1.0; overlaps.len()], overlaps.len() as f64)
    };
    let mean = w.iter().zip(ranks).map(|(w, &r)| w * f64::from(r)).sum::<f64>() / sum;
    let covered = grid
        .cells
        .iter()
        .zip(&w)
        .zip(ranks)
        .filter(|((c, _), &r)| r == c.best().quality_rank)
        .map(|((_, w), _)| w)
        .sum::<f64>()
        / sum;
    (mean, covered.clamp(0.0, 1.0))
}

/// Per-cell weights from an ERP region payload, normalized to mean 1.
///
/// Along each axis the value grid must divide the tile grid or the tile grid
/// must divide the value grid. A tile takes the mean of the values it covers.
/// Heatmap values are used as-is; quality ranks and priorities are inverted
/// (`1 / value`) since lower means more important.
pub fn apply_heatmap_bias(grid: &TileGrid, payload: &ErpRegionPayload) -> Result<CellWeights, StrategyError> {
    let (gc, gr) = (payload.grid_cols, payload.grid_rows);
    let mismatch = StrategyError::GridMismatch {
        payload_cols: gc,
        payload_rows: gr,
        cols: grid.cols,
        rows: grid.rows,
    };
    let fits = |g: u32, t: u32| g > 0 && t > 0 && (t.is_multiple_of(g) || g.is_multiple_of(t));
    if !fits(gc, grid.cols) || !fits(gr, grid.rows) {
        return Err(mismatch);
    }
    if payload.cell_values.len() != (gc as usize) * (gr as usize) {
        return Err(StrategyError::InvalidValues(format!(
            "{} values for a {gc}x{gr} grid",
            payload.cell_values.len()
        )));
    }
    let mut values = Vec::with_capacity(payload.cell_values.len());
    for &v in &payload.cell_values {
        let w = match payload.value_kind {
            ErpValueKind::Heatmap if v.is_finite() && v >= 0.0 => v,
            ErpValueKind::QualityRank | ErpValueKind::Priority if v.is_finite() && v > 0.0 => 1.0 / v,
            _ => {
                return Err(StrategyError::InvalidValues(format!(
                    "value {v} not allowed for {:?}",
                    payload.value_kind
                )))
            }
        };
        values.push(w);
    }

    // index ranges of value cells covered by tile index `t` of `n` tiles
    let span = |t: u32, n: u32, g: u32| -> (u32, u32) {
        if n >= g {
            let k = t / (n / g);
            (k, k + 1)
        } else {
            let per = g / n;
            (t * per, (t + 1) * per)
        }
    };
    let mut weights = Vec::with_capacity(grid.cells.len());
    for c in &grid.cells {
        let (col, row) = c.grid_position;
        let (c0, c1) = span(col, grid.cols, gc);
        let (r0, r1) = span(row, grid.rows, gr);
        let mut s = 0.0;
        for r in r0..r1 {
            for k in c0..c1 {
                s += values[(r * gc + k) as usize];
            }
        }
        weights.push(s / f64::from((c1 - c0) * (r1 - r0)));
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    if mean > 0.0 {
        weights.iter_mut().for_each(|w| *w /= mean);
    } else {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    Ok(weights)
}

/// Placement of one selected tile in the merged picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundTile {
    pub grid_position: (u32, u32),
    pub track_id: u32,
    pub source_rect: Rect2D,
    pub dest_rect: Rect2D,
}

/// Layout of the merged picture: each tile keeps its position and is read
/// from the selected variant's track.
pub fn bind_tiles(selection: &Selection, group: &TileGroup) -> Result<Vec<BoundTile>, StrategyError> {
    let picture = group
        .bounds()
        .ok_or_else(|| StrategyError::Layout("tile group has no members".into()))?;
    check_partition(group, picture)?;
    let mut out = Vec::with_capacity(group.members.len());
    let mut members: Vec<_> = group.members.iter().collect();
    members.sort_by_key(|m| (m.grid_position.1, m.grid_position.0));
    for m in members {
        let choice = selection
            .cells
            .iter()
            .find(|c| c.grid_position == m.grid_position)
            .ok_or(StrategyError::MissingVariant(m.grid_position))?;
        out.push(BoundTile {
            grid_position: m.grid_position,
            track_id: choice.variant.track_id,
            source_rect: m.source_rect,
            dest_rect: m.source_rect,
        });
    }
    if out.len() != selection.cells.len() {
        return Err(StrategyError::Layout(
            "selection has cells outside the tile group".into(),
        ));
    }
    Ok(out)
}
