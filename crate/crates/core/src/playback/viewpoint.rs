use super::PlaybackError;
use crate::geometry::ViewingOrientation;
use crate::model::{GpsPosition, Presentation, SwitchRule, TimelineMode, Viewpoint};
use serde::Serialize;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaybackState {
    pub current_viewpoint_id: String,
    pub media_time_ms: u64,
    pub loop_count: u32,
    pub orientation: ViewingOrientation,
    /// Wall-clock time since playback started.
    pub elapsed_ms: u64,
    /// When set, the current viewpoint's default rule fires once
    /// `elapsed_ms` reaches this value.
    pub selection_deadline_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchCause {
    User,
    Default,
}

/// Trace entry produced by [`ViewpointEngine::tick_traced`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum PlaybackEvent {
    Switched {
        elapsed_ms: u64,
        from: String,
        to: String,
        cause: SwitchCause,
        media_time_ms: u64,
    },
    Looped {
        elapsed_ms: u64,
        loop_count: u32,
        media_time_ms: u64,
    },
}

/// Viewpoint switching and looping over a presentation.
#[derive(Debug, Clone, Copy)]
pub struct ViewpointEngine<'a> {
    p: &'a Presentation,
}

impl<'a> ViewpointEngine<'a> {
    pub fn new(p: &'a Presentation) -> Self {
        Self { p }
    }

    fn viewpoint(&self, id: &str) -> Result<&'a Viewpoint, PlaybackError> {
        self.p
            .viewpoint(id)
            .ok_or_else(|| PlaybackError::UnknownViewpoint(id.to_string()))
    }

    fn deadline(&self, vp: &Viewpoint, elapsed_ms: u64) -> Option<u64> {
        vp.default_rule()
            .and_then(|r| r.selection_window_ms)
            .map(|w| elapsed_ms.saturating_add(w))
    }

    /// State at time zero in `viewpoint_id`, with its selection window armed
    /// when its default rule has one.
    pub fn start(&self, viewpoint_id: &str) -> Result<PlaybackState, PlaybackError> {
        let vp = self.viewpoint(viewpoint_id)?;
        Ok(PlaybackState {
            current_viewpoint_id: vp.viewpoint_id.clone(),
            media_time_ms: 0,
            loop_count: 0,
            orientation: ViewingOrientation::default(),
            elapsed_ms: 0,
            selection_deadline_ms: self.deadline(vp, 0),
        })
    }

    /// Applies `rule`, which must be one of the current viewpoint's rules.
    /// The pending selection window is cleared.
    pub fn switch_viewpoint(&self, s: &PlaybackState, rule: &SwitchRule) -> Result<PlaybackState, PlaybackError> {
        let current = self.viewpoint(&s.current_viewpoint_id)?;
        if !current.switch_rules.contains(rule) {
            return Err(PlaybackError::ForeignRule(s.current_viewpoint_id.clone()));
        }
        let target = self.viewpoint(&rule.target_viewpoint_id)?;
        let media_time_ms = match rule.timeline_mode {
            TimelineMode::ContinueTime => s.media_time_ms,
            TimelineMode::ResetToZero => 0,
            TimelineMode::Offset => rule.offset_ms.unwrap_or(0),
        };
        Ok(PlaybackState {
            current_viewpoint_id: target.viewpoint_id.clone(),
            media_time_ms,
            loop_count: 0,
            orientation: s.orientation,
            elapsed_ms: s.elapsed_ms,
            selection_deadline_ms: None,
        })
    }

    pub fn tick(
        &self,
        s: &PlaybackState,
        dt_ms: u64,
        user_choice: Option<usize>,
    ) -> Result<PlaybackState, PlaybackError> {
        self.tick_traced(s, dt_ms, user_choice).map(|(s, _)| s)
    }

    /// One step:
    ///
    /// 1. `user_choice` (an index into the current viewpoint's rules) is
    ///    applied first and arms the target's selection window;
    /// 2. time advances by `dt_ms`, wrapping at the loop end while loops
    ///    remain;
    /// 3. if no choice was made and the selection deadline has been reached,
    ///    the default rule is applied and the target's window armed.
    pub fn tick_traced(
        &self,
        s: &PlaybackState,
        dt_ms: u64,
        user_choice: Option<usize>,
    ) -> Result<(PlaybackState, Vec<PlaybackEvent>), PlaybackError> {
        let mut events = Vec::new();
        let mut s = s.clone();

        if let Some(index) = user_choice {
            let vp = self.viewpoint(&s.current_viewpoint_id)?;
            let rule = vp.switch_rules.get(index).ok_or_else(|| PlaybackError::UnknownRule {
                viewpoint: vp.viewpoint_id.clone(),
                index,
            })?;
            s = self.switch_and_arm(&s, rule, SwitchCause::User, &mut events)?;
        }

        if dt_ms > 0 {
            s.elapsed_ms = s.elapsed_ms.saturating_add(dt_ms);
            let vp = self.viewpoint(&s.current_viewpoint_id)?;
            let before = s.loop_count;
            advance(&mut s, vp, dt_ms);
            if s.loop_count != before {
                events.push(PlaybackEvent::Looped {
                    elapsed_ms: s.elapsed_ms,
                    loop_count: s.loop_count,
                    media_time_ms: s.media_time_ms,
                });
            }
        }

        if user_choice.is_none() && s.selection_deadline_ms.is_some_and(|d| s.elapsed_ms >= d) {
            let vp = self.viewpoint(&s.current_viewpoint_id)?;
            match vp.default_rule() {
                Some(rule) => s = self.switch_and_arm(&s, rule, SwitchCause::Default, &mut events)?,
                None => s.selection_deadline_ms = None,
            }
        }
        Ok((s, events))
    }

    fn switch_and_arm(
        &self,
        s: &PlaybackState,
        rule: &SwitchRule,
        cause: SwitchCause,
        events: &mut Vec<PlaybackEvent>,
    ) -> Result<PlaybackState, PlaybackError> {
        let mut next = self.switch_viewpoint(s, rule)?;
        next.selection_deadline_ms = self.deadline(self.viewpoint(&next.current_viewpoint_id)?, next.elapsed_ms);
        events.push(PlaybackEvent::Switched {
            elapsed_ms: next.elapsed_ms,
            from: s.current_viewpoint_id.clone(),
            to: next.current_viewpoint_id.clone(),
            cause,
            media_time_ms: next.media_time_ms,
        });
        Ok(next)
    }
}

/// Adds `dt` to the media time. Crossing `loop_end_ms` from below wraps back
/// by whole loop lengths, at most as many times as loops remain.
fn advance(s: &mut PlaybackState, vp: &Viewpoint, dt: u64) {
    let old = s.media_time_ms;
    let new = old.saturating_add(dt);
    s.media_time_ms = new;
    let Some(l) = vp.looping else { return };
    if l.loop_end_ms <= l.loop_start_ms || old >= l.loop_end_ms || new < l.loop_end_ms {
        return;
    }
    let len = l.loop_end_ms - l.loop_start_ms;
    let needed = 1 + (new - l.loop_end_ms) / len;
    let wraps = if l.max_loops == 0 {
        needed
    } else {
        needed.min(u64::from(l.max_loops.saturating_sub(s.loop_count)))
    };
    s.media_time_ms = new - wraps * len;
    s.loop_count = s.loop_count.saturating_add(wraps.min(u64::from(u32::MAX)) as u32);
}

/// Great-circle distance in metres.
pub fn haversine_m(a: &GpsPosition, b: &GpsPosition) -> f64 {
    let (p1, p2) = (a.latitude.to_radians(), b.latitude.to_radians());
    let dp = p2 - p1;
    let dl = (b.longitude - a.longitude).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Nearest viewpoint to `device` among those with a GPS position; equal
/// distances go to the smaller id.
pub fn select_viewpoint_by_gps(viewpoints: &[Viewpoint], device: &GpsPosition) -> Result<String, PlaybackError> {
    viewpoints
        .iter()
        .filter_map(|v| v.gps.map(|g| (haversine_m(&g, device), v.viewpoint_id.as_str())))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)))
        .map(|(_, id)| id.to_string())
        .ok_or(PlaybackError::NoCandidate)
}
