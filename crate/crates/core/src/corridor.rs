//! Road, signal, and preview-horizon domain model.
//!
//! A route is a piecewise-constant speed-limit profile with fixed-time
//! signals along it and an optional terminal stop line. From a route, an
//! ego state, and a V2I range this module derives the boundary structure
//! the long-term planner operates on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A stretch of road with one constant speed limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubSegment {
    /// Length in meters.
    pub length: f64,
    /// Speed limit in m/s.
    pub speed_limit: f64,
}

/// Fixed-time signal schedule for one intersection.
///
/// The cycle is anchored at `first_green_start`; phases repeat every
/// `cycle` seconds as green, then amber, then red.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    /// Stop-line position along the route, meters.
    pub position: f64,
    /// Full cycle duration, seconds.
    pub cycle: f64,
    /// Green phase duration, seconds.
    pub green: f64,
    /// Amber phase duration, seconds. Treated as non-green for planning.
    #[serde(default = "default_amber")]
    pub amber: f64,
    /// Time of an initial green-phase start, seconds.
    #[serde(default)]
    pub first_green_start: f64,
}

fn default_amber() -> f64 {
    3.0
}

/// Signal display state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Green,
    Amber,
    Red,
}

impl Phase {
    pub fn is_green(self) -> bool {
        self == Phase::Green
    }

    /// Single-letter code used in step tables.
    pub fn code(self) -> char {
        match self {
            Phase::Green => 'G',
            Phase::Amber => 'A',
            Phase::Red => 'R',
        }
    }

    pub fn from_code(c: char) -> Option<Phase> {
        match c {
            'G' => Some(Phase::Green),
            'A' => Some(Phase::Amber),
            'R' => Some(Phase::Red),
            _ => None,
        }
    }
}

/// Phase displayed by `signal` at time `t`.
///
/// The schedule is periodic in both directions, so `t` earlier than the
/// anchor is mapped into the cycle as well.
pub fn signal_phase_at(signal: &SignalSpec, t: f64) -> Phase {
    let r = (t - signal.first_green_start).rem_euclid(signal.cycle);
    if r < signal.green {
        Phase::Green
    } else if r < signal.green + signal.amber {
        Phase::Amber
    } else {
        Phase::Red
    }
}

/// Start time of the next green phase at or after `t`.
pub fn next_green_start(signal: &SignalSpec, t: f64) -> f64 {
    let k = ((t - signal.first_green_start) / signal.cycle).ceil();
    signal.first_green_start + k * signal.cycle
}

/// Start time of the green phase containing or most recently preceding `t`.
pub fn current_green_start(signal: &SignalSpec, t: f64) -> f64 {
    let k = ((t - signal.first_green_start) / signal.cycle).floor();
    signal.first_green_start + k * signal.cycle
}

/// Seconds until the signal next displays red, measured from `t`.
/// Returns 0 if it is already red.
pub fn time_until_red(signal: &SignalSpec, t: f64) -> f64 {
    match signal_phase_at(signal, t) {
        Phase::Red => 0.0,
        _ => {
            let g = current_green_start(signal, t);
            g + signal.green + signal.amber - t
        }
    }
}

/// Route geometry: speed-limit profile, signals, optional end stop line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    /// Total paved length, meters. Must equal the sub-segment sum.
    pub total_length: f64,
    /// Ordered speed-limit profile covering `[0, total_length]`.
    pub sub_segments: Vec<SubSegment>,
    /// Signals ordered by strictly increasing position.
    #[serde(default)]
    pub signals: Vec<SignalSpec>,
    /// Terminal stop-line position, if the corridor ends in a stop sign.
    #[serde(default)]
    pub end_stop: Option<f64>,
}

impl RouteSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sub_segments.is_empty() {
            return Err(Error::InvalidRoute("route has no sub-segments".into()));
        }
        for (i, seg) in self.sub_segments.iter().enumerate() {
            if !(seg.length > 0.0) || !seg.length.is_finite() {
                return Err(Error::InvalidRoute(format!(
                    "sub-segment {i} has non-positive length {}",
                    seg.length
                )));
            }
            if !(seg.speed_limit > 0.0) || !seg.speed_limit.is_finite() {
                return Err(Error::InvalidRoute(format!(
                    "sub-segment {i} has non-positive speed limit {}",
                    seg.speed_limit
                )));
            }
        }
        let sum: f64 = self.sub_segments.iter().map(|s| s.length).sum();
        if (sum - self.total_length).abs() > 1e-6 {
            return Err(Error::InvalidRoute(format!(
                "sub-segment lengths sum to {sum} m but total_length is {} m",
                self.total_length
            )));
        }
        let mut prev = 0.0;
        for (i, sig) in self.signals.iter().enumerate() {
            if sig.position <= prev && i > 0 {
                return Err(Error::InvalidRoute(format!(
                    "signal {i} position {} not strictly increasing",
                    sig.position
                )));
            }
            if sig.position <= 0.0 || sig.position >= self.total_length {
                return Err(Error::InvalidRoute(format!(
                    "signal {i} position {} outside route (0, {})",
                    sig.position, self.total_length
                )));
            }
            if !(sig.green > 0.0) || !(sig.green < sig.cycle) {
                return Err(Error::InvalidRoute(format!(
                    "signal {i}: need 0 < green ({}) < cycle ({})",
                    sig.green, sig.cycle
                )));
            }
            if sig.amber < 0.0 || sig.green + sig.amber > sig.cycle {
                return Err(Error::InvalidRoute(format!(
                    "signal {i}: amber {} does not fit in cycle",
                    sig.amber
                )));
            }
            prev = sig.position;
        }
        if let Some(stop) = self.end_stop {
            if stop > self.total_length {
                return Err(Error::InvalidRoute(format!(
                    "end stop {stop} beyond route length {}",
                    self.total_length
                )));
            }
            if let Some(last) = self.signals.last() {
                if stop <= last.position {
                    return Err(Error::InvalidRoute(format!(
                        "end stop {stop} not beyond last signal at {}",
                        last.position
                    )));
                }
            }
        }
        Ok(())
    }

    /// Speed limit at position `s`, clamped to the profile ends.
    pub fn speed_limit_at(&self, s: f64) -> f64 {
        let mut start = 0.0;
        for seg in &self.sub_segments {
            if s < start + seg.length {
                return seg.speed_limit;
            }
            start += seg.length;
        }
        self.sub_segments.last().map(|s| s.speed_limit).unwrap_or(0.0)
    }

    /// Minimum travel time between positions `a < b`: the integral of
    /// `1 / v_max(s)` over the interval. Positions beyond the profile use
    /// the last sub-segment's limit.
    pub fn min_travel_time_between(&self, a: f64, b: f64) -> Result<f64> {
        if b < a {
            return Err(Error::InvalidArgument(format!(
                "min_travel_time_between: b ({b}) < a ({a})"
            )));
        }
        let mut t = 0.0;
        let mut start = 0.0;
        for seg in &self.sub_segments {
            let end = start + seg.length;
            let lo = a.max(start);
            let hi = b.min(end);
            if hi > lo {
                t += (hi - lo) / seg.speed_limit;
            }
            start = end;
        }
        // Overhang past the profile end, at the last limit.
        if b > start {
            let lo = a.max(start);
            let limit = self
                .sub_segments
                .last()
                .map(|s| s.speed_limit)
                .ok_or_else(|| Error::InvalidRoute("route has no sub-segments".into()))?;
            t += (b - lo) / limit;
        }
        Ok(t)
    }

    /// End of the drivable corridor: the stop line if present, else the
    /// paved length.
    pub fn corridor_end(&self) -> f64 {
        self.end_stop.unwrap_or(self.total_length)
    }
}

/// Minimum travel time over a list of sub-segments: `sum(l / v_max)`.
pub fn segment_min_travel_time(sub_segments: &[SubSegment]) -> Result<f64> {
    let mut t = 0.0;
    for (i, seg) in sub_segments.iter().enumerate() {
        if !(seg.speed_limit > 0.0) {
            return Err(Error::InvalidRoute(format!(
                "sub-segment {i} has non-positive speed limit {}",
                seg.speed_limit
            )));
        }
        t += seg.length / seg.speed_limit;
    }
    Ok(t)
}

/// What the planner must satisfy at the horizon end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalKind {
    /// Terminal position is a stop line: final speed fixed at zero.
    FixedSpeedZero,
    /// Terminal position is a virtual point: final speed free.
    FreeSpeed,
}

/// Boundary structure for one long-term plan: ego state, in-range signal
/// positions, per-segment minimum travel times, and the terminal rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PreviewHorizon {
    pub t0: f64,
    pub s0: f64,
    pub v0: f64,
    /// Segment boundaries `s_1 .. s_{N+1}`; the first `N` are in-range
    /// signal positions, the last is the terminal point.
    pub boundaries: Vec<f64>,
    /// Indices into `RouteSpec::signals` for the `N` in-range signals.
    pub signal_indices: Vec<usize>,
    /// Minimum travel time of each of the `N + 1` segments.
    pub min_travel_times: Vec<f64>,
    pub terminal: TerminalKind,
}

impl PreviewHorizon {
    /// Number of in-range signals `N`.
    pub fn signal_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Horizon length `s_{N+1} - s0`.
    pub fn length(&self) -> f64 {
        self.boundaries.last().unwrap() - self.s0
    }

    /// Segment lengths `l_1 .. l_{N+1}`.
    pub fn segment_lengths(&self) -> Vec<f64> {
        let mut lengths = Vec::with_capacity(self.boundaries.len());
        let mut prev = self.s0;
        for &b in &self.boundaries {
            lengths.push(b - prev);
            prev = b;
        }
        lengths
    }
}

/// Build the preview horizon for an ego at `(s0, v0, t0)` with the given
/// V2I range.
///
/// Signals strictly ahead of the ego and within range are included. The
/// terminal is the end stop line when one exists and every remaining
/// downstream signal is in range (so nothing unknown lies between the
/// horizon and the stop); otherwise a virtual point `ds_vp` past the last
/// included boundary, with free terminal speed. With no in-range signals
/// the horizon is a single free-speed segment of length `ds_vp`.
pub fn build_preview_horizon(
    route: &RouteSpec,
    ego: (f64, f64, f64),
    v2i_range: f64,
    ds_vp: f64,
) -> Result<PreviewHorizon> {
    route.validate()?;
    let (s0, v0, t0) = ego;
    let route_end = route.corridor_end();
    if s0 >= route_end {
        return Err(Error::HorizonExhausted {
            position: s0,
            route_end,
        });
    }
    if v2i_range < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "v2i_range must be non-negative, got {v2i_range}"
        )));
    }

    let mut boundaries = Vec::new();
    let mut signal_indices = Vec::new();
    let mut downstream_out_of_range = false;
    for (idx, sig) in route.signals.iter().enumerate() {
        if sig.position > s0 {
            if sig.position - s0 <= v2i_range {
                boundaries.push(sig.position);
                signal_indices.push(idx);
            } else {
                downstream_out_of_range = true;
            }
        }
    }

    let last_boundary = boundaries.last().copied().unwrap_or(s0);
    let terminal = if !boundaries.is_empty() && !downstream_out_of_range && route.end_stop.is_some()
    {
        boundaries.push(route.end_stop.unwrap());
        TerminalKind::FixedSpeedZero
    } else {
        boundaries.push(last_boundary + ds_vp);
        TerminalKind::FreeSpeed
    };

    let mut min_travel_times = Vec::with_capacity(boundaries.len());
    let mut prev = s0;
    for &b in &boundaries {
        min_travel_times.push(route.min_travel_time_between(prev, b)?);
        prev = b;
    }

    Ok(PreviewHorizon {
        t0,
        s0,
        v0,
        boundaries,
        signal_indices,
        min_travel_times,
        terminal,
    })
}
