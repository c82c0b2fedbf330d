use super::*;

/// Assembles a [`Presentation`] and refuses to hand out one that fails
/// validation.
#[derive(Debug, Default, Clone)]
pub struct PresentationBuilder {
    p: Presentation,
}

impl PresentationBuilder {
    pub fn brand(mut self, brand: impl Into<String>) -> Self {
        self.p.brands.insert(brand.into());
        self
    }

    pub fn track(mut self, track: TrackDescriptor) -> Self {
        self.p.tracks.push(track);
        self
    }

    pub fn viewpoint(mut self, viewpoint: Viewpoint) -> Self {
        self.p.viewpoints.push(viewpoint);
        self
    }

    pub fn overlay(mut self, overlay: Overlay) -> Self {
        self.p.overlays.push(overlay);
        self
    }

    pub fn timed_metadata(mut self, track: TimedMetadataTrack) -> Self {
        self.p.timed_metadata.push(track);
        self
    }

    pub fn tile_group(mut self, group: TileGroup) -> Self {
        self.p.tile_groups.push(group);
        self
    }

    pub fn viewing_space(mut self, space: ViewingSpace) -> Self {
        self.p.viewing_space = Some(space);
        self
    }

    /// Smallest track id not yet used by a track or timed metadata track.
    pub fn next_track_id(&self) -> u32 {
        self.p
            .tracks
            .iter()
            .map(|t| t.track_id)
            .chain(self.p.timed_metadata.iter().map(|t| t.track_id))
            .max()
            .unwrap_or(0)
            + 1
    }

    /// Normalizes angles, then validates.
    pub fn build(self) -> Result<Presentation, ValidationReport> {
        let p = self.p.normalized();
        let report = validate_presentation(&p);
        if report.is_valid() {
            Ok(p)
        } else {
            Err(report)
        }
    }
}
