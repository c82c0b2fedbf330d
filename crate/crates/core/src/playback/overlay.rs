use super::PlaybackError;
use crate::model::{
    ControlsTiming, MetadataPayload, Overlay, OverlayControl, Presentation, RenderingKind, TimedMetadataTrack,
};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlayFlags {
    /// Set by the content author or timed controls.
    pub active: bool,
    /// Set by the user; starts on.
    pub switched_on: bool,
}

impl OverlayFlags {
    pub fn displayed(self) -> bool {
        self.active && self.switched_on
    }
}

/// Visibility flags per overlay id. Kept apart from [`super::PlaybackState`],
/// so viewpoint switches leave it untouched.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OverlayState {
    flags: BTreeMap<u32, OverlayFlags>,
}

impl OverlayState {
    /// Every overlay starts switched on. Statically controlled overlays start
    /// active; timed ones start inactive until a control sample says so.
    pub fn new(p: &Presentation) -> Self {
        let flags = p
            .overlays
            .iter()
            .map(|o| {
                let f = OverlayFlags {
                    active: o.controls_timing == ControlsTiming::Static,
                    switched_on: true,
                };
                (o.overlay_id, f)
            })
            .collect();
        Self { flags }
    }

    pub fn with(mut self, overlay_id: u32, flags: OverlayFlags) -> Self {
        self.flags.insert(overlay_id, flags);
        self
    }

    pub fn get(&self, overlay_id: u32) -> Option<OverlayFlags> {
        self.flags.get(&overlay_id).copied()
    }

    pub fn set_active(&self, overlay_id: u32, active: bool) -> Result<Self, PlaybackError> {
        let mut s = self.clone();
        s.flags
            .get_mut(&overlay_id)
            .ok_or(PlaybackError::UnknownOverlay(overlay_id))?
            .active = active;
        Ok(s)
    }

    /// User toggle; refused unless the overlay allows the on/off control.
    pub fn switch(&self, overlay: &Overlay, on: bool) -> Result<Self, PlaybackError> {
        if !overlay
            .interaction
            .allowed_controls
            .contains(&OverlayControl::SwitchOnOff)
        {
            return Err(PlaybackError::ControlNotAllowed {
                overlay: overlay.overlay_id,
                control: OverlayControl::SwitchOnOff,
            });
        }
        let mut s = self.clone();
        s.flags
            .get_mut(&overlay.overlay_id)
            .ok_or(PlaybackError::UnknownOverlay(overlay.overlay_id))?
            .switched_on = on;
        Ok(s)
    }

    /// Applies every overlay control sample with `time_ms <= t`, in order.
    /// Samples for unknown overlays are skipped.
    pub fn apply_controls(&self, track: &TimedMetadataTrack, t: u64) -> Self {
        let mut s = self.clone();
        for sample in track.samples.iter().take_while(|x| x.time_ms <= t) {
            if let MetadataPayload::OverlayControls(c) = &sample.payload {
                if let Some(f) = s.flags.get_mut(&c.overlay_id) {
                    f.active = c.active;
                }
            }
        }
        s
    }
}

pub fn overlay_displayed(o: &Overlay, s: &OverlayState) -> Result<bool, PlaybackError> {
    s.get(o.overlay_id)
        .map(OverlayFlags::displayed)
        .ok_or(PlaybackError::UnknownOverlay(o.overlay_id))
}

/// Draw list, back to front. Sphere-relative and mesh overlays come first,
/// farthest from the sphere centre first, then by layering order; viewport
/// overlays follow by layering order. Ties go to the smaller id. Overlays
/// without a state entry count as not displayed.
pub fn resolve_draw_order(overlays: &[Overlay], s: &OverlayState) -> Vec<u32> {
    let mut sphere: Vec<&Overlay> = Vec::new();
    let mut viewport: Vec<&Overlay> = Vec::new();
    for o in overlays {
        if !s.get(o.overlay_id).is_some_and(OverlayFlags::displayed) {
            continue;
        }
        match o.rendering.kind {
            RenderingKind::ViewportRelative => viewport.push(o),
            _ => sphere.push(o),
        }
    }
    let dist = |o: &Overlay| o.rendering.sphere_distance().unwrap_or(1.0);
    sphere.sort_by(|a, b| {
        dist(b)
            .total_cmp(&dist(a))
            .then(a.properties.layering_order.cmp(&b.properties.layering_order))
            .then(a.overlay_id.cmp(&b.overlay_id))
    });
    viewport.sort_by(|a, b| by_layer(a, b));
    sphere.into_iter().chain(viewport).map(|o| o.overlay_id).collect()
}

fn by_layer(a: &Overlay, b: &Overlay) -> Ordering {
    a.properties
        .layering_order
        .cmp(&b.properties.layering_order)
        .then(a.overlay_id.cmp(&b.overlay_id))
}

/// Keeps every essential (priority 0) overlay and fills the remaining slots
/// by ascending priority, then id. Returns the kept ids in ascending order.
pub fn cull_by_priority(displayed: &[Overlay], capacity: usize) -> Result<Vec<u32>, PlaybackError> {
    let essential = displayed.iter().filter(|o| o.properties.priority == 0).count();
    if essential > capacity {
        return Err(PlaybackError::EssentialOverflow { essential, capacity });
    }
    let mut keys: Vec<(u32, u32)> = displayed
        .iter()
        .map(|o| (o.properties.priority, o.overlay_id))
        .collect();
    keys.sort_unstable();
    let mut kept: Vec<u32> = keys.into_iter().take(capacity).map(|(_, id)| id).collect();
    kept.sort_unstable();
    Ok(kept)
}
