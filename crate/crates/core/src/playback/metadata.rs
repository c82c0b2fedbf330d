use super::PlaybackError;
use crate::model::{MetadataPayload, TimedMetadataTrack};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleLookup<'a> {
    /// `t` precedes the first sample; the caller falls back to defaults.
    BeforeFirstSample,
    Sample(&'a MetadataPayload),
}

/// Piecewise-constant lookup: the last sample with `time_ms <= t`.
/// Samples must be in non-decreasing time order; among equal times the last
/// one wins.
pub fn sample_timed_metadata(track: &TimedMetadataTrack, t: i64) -> Result<SampleLookup<'_>, PlaybackError> {
    if track.samples.is_empty() {
        return Err(PlaybackError::EmptyTrack(track.track_id));
    }
    if t < 0 {
        return Ok(SampleLookup::BeforeFirstSample);
    }
    let t = t as u64;
    let n = track.samples.partition_point(|s| s.time_ms <= t);
    Ok(match n {
        0 => SampleLookup::BeforeFirstSample,
        n => SampleLookup::Sample(&track.samples[n - 1].payload),
    })
}
