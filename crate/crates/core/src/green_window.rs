//! Green window selection: desired entering times, feasible windows, and
//! narrowed windows for each in-horizon intersection.
//!
//! The selector runs a forward recursion of desired entering times that
//! snaps into green phases, brackets them with minimum-travel-time
//! recursions, and narrows the result with the traffic calibration
//! parameters. The final window set is clipped to its green phase so the
//! downstream optimizer can only schedule green crossings.

use serde::{Deserialize, Serialize};

use crate::corridor::{current_green_start, next_green_start, PreviewHorizon, SignalSpec};
use crate::error::{Error, Result};

/// Planner calibration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    /// Desired-speed ratio applied to the horizon's constant-limit speed.
    pub r_des: f64,
    /// Early-entry allowance below the desired entering time, seconds.
    pub delta_t_des: f64,
    /// Maximum window width above the narrowed lower bound, seconds.
    pub delta_t_fea: f64,
    /// Safety margin after a green phase starts, seconds.
    pub delta_t_grn0: f64,
    /// Safety margin before a green phase ends, seconds.
    pub delta_t_grnf: f64,
    /// Virtual-point extension for receding horizons, meters.
    pub delta_s_vp: f64,
    /// Short-term (car-following) preview horizon, seconds.
    pub t_st_prv: f64,
    /// Desired time gap to the preceding vehicle, seconds.
    pub tau_des: f64,
    /// Standstill safety distance, meters.
    pub standstill_gap: f64,
    /// Scenario speed cap, m/s. Caps the desired speed and bounds the
    /// preceding-vehicle prediction.
    pub speed_cap: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            r_des: 0.9,
            delta_t_des: 5.0,
            delta_t_fea: 20.0,
            delta_t_grn0: 2.0,
            delta_t_grnf: 2.0,
            delta_s_vp: 100.0,
            t_st_prv: 3.0,
            tau_des: 1.5,
            standstill_gap: 5.0,
            speed_cap: 17.8,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_des > 0.0 && self.r_des <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "r_des must be in (0, 1], got {}",
                self.r_des
            )));
        }
        if self.t_st_prv <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "t_st_prv must be positive, got {}",
                self.t_st_prv
            )));
        }
        for (name, v) in [
            ("delta_t_des", self.delta_t_des),
            ("delta_t_fea", self.delta_t_fea),
            ("delta_t_grn0", self.delta_t_grn0),
            ("delta_t_grnf", self.delta_t_grnf),
            ("delta_s_vp", self.delta_s_vp),
            ("tau_des", self.tau_des),
            ("standstill_gap", self.standstill_gap),
            ("speed_cap", self.speed_cap),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Desired constant speed over a horizon: `r_des` times the horizon's
    /// equivalent constant speed limit, capped by the scenario cap.
    pub fn desired_speed(&self, horizon: &PreviewHorizon) -> f64 {
        let total_min: f64 = horizon.min_travel_times.iter().sum();
        let v_max_c = if total_min > 0.0 {
            horizon.length() / total_min
        } else {
            self.speed_cap
        };
        (self.r_des * v_max_c).min(self.speed_cap)
    }
}

/// Entering-time windows for the in-horizon intersections.
///
/// For each of the `N` intersections this holds the desired entering time,
/// the feasible window, and the narrowed window (already clipped into the
/// margin-shrunk green phase it targets), plus the terminal desired time
/// that fixes the horizon's final time.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenWindowSet {
    /// `t_des,1 .. t_des,N`.
    pub t_des: Vec<f64>,
    /// Terminal desired time `t_des,N+1`.
    pub t_des_terminal: f64,
    pub t_min: Vec<f64>,
    pub t_max: Vec<f64>,
    pub t_min_n: Vec<f64>,
    pub t_max_n: Vec<f64>,
    /// Margin-shrunk green interval targeted at each intersection.
    pub green_bounds: Vec<(f64, f64)>,
    /// Desired per-segment travel times used by the recursion.
    pub xi_des: Vec<f64>,
}

/// Desired entering times for the `N` signals and the terminal point.
///
/// Returns `(t_des_1..t_des_{N+1}, green_bounds_1..N)` where each green
/// bound is the margin-shrunk green interval the desired time falls in.
pub fn desired_entering_times(
    horizon: &PreviewHorizon,
    signals: &[&SignalSpec],
    params: &PlannerParams,
    t0: f64,
) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let n = horizon.signal_count();
    assert_eq!(signals.len(), n, "one signal per interior boundary");
    let v_des = params.desired_speed(horizon);
    if !(v_des > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "non-positive desired speed {v_des}"
        )));
    }
    let lengths = horizon.segment_lengths();
    let mut t_des = Vec::with_capacity(n + 1);
    let mut bounds = Vec::with_capacity(n);
    let mut prev = t0;
    for i in 0..=n {
        let arrival = prev + lengths[i] / v_des;
        if i == n {
            // Terminal point has no signal to snap to.
            t_des.push(arrival);
            break;
        }
        let sig = signals[i];
        let usable = sig.green - params.delta_t_grn0 - params.delta_t_grnf;
        if usable < 0.0 {
            return Err(Error::InfeasibleSpat {
                signal: horizon.signal_indices[i],
                reason: format!(
                    "green phase {}s shorter than safety margins {}s",
                    sig.green,
                    params.delta_t_grn0 + params.delta_t_grnf
                ),
            });
        }
        let g = current_green_start(sig, arrival);
        let chosen = if arrival >= g + params.delta_t_grn0
            && arrival <= g + sig.green - params.delta_t_grnf
        {
            t_des.push(arrival);
            g
        } else if arrival >= g && arrival < g + params.delta_t_grn0 {
            // Inside the leading safety margin of the current green: the
            // enclosing phase is still the next usable one, so snap to its
            // start plus the margin rather than waiting a whole cycle.
            t_des.push(g + params.delta_t_grn0);
            g
        } else {
            // Snap to the smallest initial green time with
            // `arrival` in `[x - cycle, x]`, then add the start margin.
            let x = next_green_start(sig, arrival);
            if arrival < x - sig.cycle - 1e-9 {
                return Err(Error::InfeasibleSpat {
                    signal: horizon.signal_indices[i],
                    reason: format!("no green start within one cycle after t = {arrival}"),
                });
            }
            t_des.push(x + params.delta_t_grn0);
            x
        };
        bounds.push((
            chosen + params.delta_t_grn0,
            chosen + sig.green - params.delta_t_grnf,
        ));
        prev = t_des[i];
    }
    Ok((t_des, bounds))
}

/// Feasible green windows: forward pass from `t0` with minimum travel
/// times, backward pass from the terminal desired time.
pub fn feasible_green_windows(
    t_des: &[f64],
    t_des_terminal: f64,
    xi_min: &[f64],
    t0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t_des.len();
    assert_eq!(xi_min.len(), n + 1, "one travel time per segment");
    let mut t_min = vec![0.0; n];
    let mut t_max = vec![0.0; n];
    let mut prev = t0;
    for i in 0..n {
        t_min[i] = (prev + xi_min[i]).max(t_des[i]);
        prev = t_min[i];
    }
    let mut next = t_des_terminal;
    for i in (0..n).rev() {
        t_max[i] = (next - xi_min[i + 1]).min(t_des[i]);
        next = t_max[i];
    }
    for i in 0..n {
        if t_min[i] > t_max[i] {
            return Err(Error::InfeasibleWindow {
                index: i + 1,
                t_min: t_min[i],
                t_max: t_max[i],
            });
        }
    }
    Ok((t_min, t_max))
}

/// Narrow feasible windows with the traffic calibration parameters.
pub fn narrowed_windows(
    t_des: &[f64],
    t_min: &[f64],
    t_max: &[f64],
    delta_t_des: f64,
    delta_t_fea: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t_des.len();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..n {
        lo[i] = (t_des[i] - delta_t_des).max(t_min[i]);
        hi[i] = (lo[i] + delta_t_fea).min(t_max[i]);
        if hi[i] < lo[i] {
            return Err(Error::InfeasibleWindow {
                index: i + 1,
                t_min: lo[i],
                t_max: hi[i],
            });
        }
    }
    Ok((lo, hi))
}

/// Full window pipeline: desired entering times, feasible windows bounded
/// by each intersection's margin-shrunk green phase, then narrowing.
///
/// The feasible recursion here brackets each entering time with the
/// selected green interval rather than the desired time itself: the
/// forward pass takes `max(prev + xi_min, green_open)` and the backward
/// pass `min(next - xi_min, green_close)`. Clamping both passes at the
/// desired time instead would collapse every window to a point and leave
/// the travel-time optimizer nothing to decide, so desired times enter
/// only through the narrowing step. Every admissible time is therefore a
/// margin-respecting green crossing by construction.
pub fn compute_green_windows(
    horizon: &PreviewHorizon,
    signals: &[&SignalSpec],
    params: &PlannerParams,
) -> Result<GreenWindowSet> {
    params.validate()?;
    let t0 = horizon.t0;
    let (t_des_all, green_bounds) = desired_entering_times(horizon, signals, params, t0)?;
    let n = horizon.signal_count();
    let t_des = t_des_all[..n].to_vec();
    let t_des_terminal = t_des_all[n];
    let xi_min = &horizon.min_travel_times;

    let mut t_min = vec![0.0; n];
    let mut t_max = vec![0.0; n];
    let mut prev = t0;
    for i in 0..n {
        t_min[i] = (prev + xi_min[i]).max(green_bounds[i].0);
        prev = t_min[i];
    }
    let mut next = t_des_terminal;
    for i in (0..n).rev() {
        t_max[i] = (next - xi_min[i + 1]).min(green_bounds[i].1);
        next = t_max[i];
    }
    for i in 0..n {
        if t_min[i] > t_max[i] {
            return Err(Error::InfeasibleWindow {
                index: i + 1,
                t_min: t_min[i],
                t_max: t_max[i],
            });
        }
    }

    let (t_min_n, t_max_n) =
        narrowed_windows(&t_des, &t_min, &t_max, params.delta_t_des, params.delta_t_fea)?;
    let v_des = params.desired_speed(horizon);
    let xi_des = horizon
        .segment_lengths()
        .iter()
        .map(|l| l / v_des)
        .collect();
    Ok(GreenWindowSet {
        t_des,
        t_des_terminal,
        t_min,
        t_max,
        t_min_n,
        t_max_n,
        green_bounds,
        xi_des,
    })
}
