//! Free-flow speed planner: analytic inner solution over each road
//! segment, outer numerical optimization of the segment travel times, and
//! piecewise-linear acceleration trajectory assembly.

pub mod outer;
pub mod segment;
pub mod tridiag;
pub mod trajectory;

pub use outer::{FeasibleTimes, SpgOptions};
pub use segment::{
    segment_cost, segment_cost_d_xi, segment_cost_midterm_squared, segment_costates,
    SegmentCostates, TrajectoryPiece,
};
pub use tridiag::{assemble_tridiagonal, solve_entering_speeds, TerminalSpeed, TridiagonalSystem};
pub use trajectory::{ff_next_acceleration, PwLinearAccelTrajectory};

use crate::corridor::PreviewHorizon;
use crate::error::{Error, Result};
use crate::green_window::GreenWindowSet;
use outer::spg_minimize;

/// Conditions the planner noticed but does not treat as failures.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanDiagnostic {
    /// The unconstrained solution dips below zero speed.
    NegativeSpeed { min_speed: f64 },
    /// The planned speed exceeds a cap the caller supplied.
    OverSpeedCap { max_speed: f64, cap: f64 },
}

/// A solved free-flow plan over the preview horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FfSolution {
    /// Entering times `t_ent,0 .. t_ent,N+1` (first is the plan start,
    /// last the fixed final time).
    pub entry_times: Vec<f64>,
    /// Optimal segment durations `xi_1 .. xi_{N+1}`.
    pub durations: Vec<f64>,
    /// Boundary speeds `v_0 .. v_{N+1}`.
    pub speeds: Vec<f64>,
    /// Segment lengths `l_1 .. l_{N+1}`.
    pub lengths: Vec<f64>,
    /// Positions of the segment boundaries, starting with the plan start.
    pub positions: Vec<f64>,
    /// Costate boundary values per segment.
    pub costates: Vec<SegmentCostates>,
    /// Position-costate jumps at the interior points.
    pub jumps: Vec<f64>,
    /// Per-segment efforts.
    pub segment_costs: Vec<f64>,
    /// Total effort.
    pub cost: f64,
    pub terminal: TerminalSpeed,
}

/// Boundary speeds, total cost, and per-segment costs for fixed segment
/// durations. Interior speeds come from the tridiagonal solve; a free
/// terminal speed comes from the transversality condition.
pub fn solve_boundary_speeds(
    xi: &[f64],
    lengths: &[f64],
    v0: f64,
    terminal: TerminalSpeed,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = xi.len() - 1;
    let mut speeds = Vec::with_capacity(n + 2);
    speeds.push(v0);
    if n == 0 {
        if !(xi[0] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "segment duration must be positive, got {}",
                xi[0]
            )));
        }
    } else {
        let system = assemble_tridiagonal(xi, lengths, v0, terminal)?;
        speeds.extend(solve_entering_speeds(&system)?);
    }
    let v_before = *speeds.last().unwrap();
    speeds.push(tridiag::terminal_speed(xi, lengths, v_before, terminal));
    let mut seg_costs = Vec::with_capacity(n + 1);
    let mut total = 0.0;
    for i in 0..=n {
        let c = segment_cost(speeds[i], speeds[i + 1], lengths[i], xi[i])?;
        seg_costs.push(c);
        total += c;
    }
    Ok((speeds, seg_costs, total))
}

fn build_solution(
    horizon: &PreviewHorizon,
    entry_times: Vec<f64>,
    terminal: TerminalSpeed,
) -> Result<FfSolution> {
    let lengths = horizon.segment_lengths();
    let mut durations = Vec::with_capacity(lengths.len());
    for w in entry_times.windows(2) {
        durations.push(w[1] - w[0]);
    }
    let (speeds, segment_costs, cost) =
        solve_boundary_speeds(&durations, &lengths, horizon.v0, terminal)?;
    let mut costates = Vec::with_capacity(lengths.len());
    for i in 0..lengths.len() {
        costates.push(segment_costates(
            speeds[i],
            speeds[i + 1],
            lengths[i],
            durations[i],
        ));
    }
    let jumps = (0..lengths.len().saturating_sub(1))
        .map(|i| costates[i].lambda1 - costates[i + 1].lambda1)
        .collect();
    let mut positions = Vec::with_capacity(lengths.len() + 1);
    positions.push(horizon.s0);
    positions.extend_from_slice(&horizon.boundaries);
    Ok(FfSolution {
        entry_times,
        durations,
        speeds,
        lengths,
        positions,
        costates,
        jumps,
        segment_costs,
        cost,
        terminal,
    })
}

/// Solve the outer travel-time optimization over the narrowed windows and
/// return the full plan at the optimum.
///
/// The final time is fixed at the terminal desired time. With no in-range
/// signals the single-segment analytic solution is returned directly.
pub fn outer_optimize(horizon: &PreviewHorizon, windows: &GreenWindowSet) -> Result<FfSolution> {
    outer_optimize_with_terminal(
        horizon,
        windows,
        TerminalSpeed::from_terminal(horizon.terminal),
    )
}

/// [`outer_optimize`] with an explicit terminal speed condition.
pub fn outer_optimize_with_terminal(
    horizon: &PreviewHorizon,
    windows: &GreenWindowSet,
    terminal: TerminalSpeed,
) -> Result<FfSolution> {
    let n = horizon.signal_count();
    let t0 = horizon.t0;
    let t_f = windows.t_des_terminal;
    if !(t_f > t0) {
        return Err(Error::InfeasiblePlan(format!(
            "final time {t_f} not after start {t0}"
        )));
    }
    if n == 0 {
        return build_solution(horizon, vec![t0, t_f], terminal);
    }

    let feasible = FeasibleTimes::new(
        t0,
        t_f,
        &windows.t_min_n,
        &windows.t_max_n,
        &horizon.min_travel_times,
    )?;
    let lengths = horizon.segment_lengths();
    let v0 = horizon.v0;
    let objective = |t: &[f64]| -> Result<(f64, Vec<f64>)> {
        let mut xi = Vec::with_capacity(n + 1);
        let mut prev = t0;
        for &ti in t {
            xi.push(ti - prev);
            prev = ti;
        }
        xi.push(t_f - prev);
        let (speeds, _, cost) = solve_boundary_speeds(&xi, &lengths, v0, terminal)?;
        // The interior speeds are stationary points of the total cost, so
        // the gradient reduces to the direct duration sensitivities.
        let mut d = Vec::with_capacity(n + 1);
        for i in 0..=n {
            d.push(segment_cost_d_xi(speeds[i], speeds[i + 1], lengths[i], xi[i]));
        }
        let grad = (0..n).map(|k| d[k] - d[k + 1]).collect();
        Ok((cost, grad))
    };

    // Multi-start: minimum-time-proportional, desired schedule, window
    // midpoints.
    let total_min: f64 = horizon.min_travel_times.iter().sum();
    let scale = (t_f - t0) / total_min;
    let mut start_a = Vec::with_capacity(n);
    let mut acc = t0;
    for i in 0..n {
        acc += horizon.min_travel_times[i] * scale;
        start_a.push(acc);
    }
    let start_b = windows.t_des.clone();
    let start_c: Vec<f64> = (0..n)
        .map(|i| 0.5 * (feasible.lo[i] + feasible.hi[i]))
        .collect();

    let opts = SpgOptions::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in [start_a, start_b, start_c] {
        let (t, cost) = spg_minimize(&objective, &feasible, &start, &opts)?;
        if best.as_ref().map_or(true, |(_, c)| cost < *c) {
            best = Some((t, cost));
        }
    }
    let (t_opt, _) = best.unwrap();
    let mut entry_times = Vec::with_capacity(n + 2);
    entry_times.push(t0);
    entry_times.extend_from_slice(&t_opt);
    entry_times.push(t_f);
    build_solution(horizon, entry_times, terminal)
}

/// Stitch the solved plan into a piecewise-linear acceleration trajectory.
pub fn build_ff_trajectory(solution: &FfSolution) -> PwLinearAccelTrajectory {
    let mut pieces = Vec::with_capacity(solution.durations.len());
    for i in 0..solution.durations.len() {
        pieces.push(TrajectoryPiece::from_boundary(
            solution.entry_times[i],
            solution.entry_times[i + 1],
            solution.positions[i],
            solution.speeds[i],
            solution.speeds[i + 1],
            solution.lengths[i],
        ));
    }
    PwLinearAccelTrajectory { pieces }
}

/// Inspect a plan for out-of-model conditions worth surfacing.
pub fn plan_diagnostics(
    traj: &PwLinearAccelTrajectory,
    speed_cap: Option<f64>,
) -> Vec<PlanDiagnostic> {
    let mut out = Vec::new();
    let vmin = traj.min_speed();
    if vmin < -1e-9 {
        out.push(PlanDiagnostic::NegativeSpeed { min_speed: vmin });
    }
    if let Some(cap) = speed_cap {
        let vmax = traj.max_speed();
        if vmax > cap + 1e-9 {
            out.push(PlanDiagnostic::OverSpeedCap {
                max_speed: vmax,
                cap,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corridor::{build_preview_horizon, RouteSpec, SignalSpec, SubSegment, TerminalKind};
    use crate::green_window::{compute_green_windows, PlannerParams};

    fn constant_speed_horizon() -> PreviewHorizon {
        PreviewHorizon {
            t0: 0.0,
            s0: 0.0,
            v0: 10.0,
            boundaries: vec![100.0, 200.0],
            signal_indices: vec![0],
            min_travel_times: vec![5.0, 5.0],
            terminal: TerminalKind::FixedSpeedZero,
        }
    }

    fn wide_windows(t_f: f64) -> GreenWindowSet {
        GreenWindowSet {
            t_des: vec![10.0],
            t_des_terminal: t_f,
            t_min: vec![5.0],
            t_max: vec![15.0],
            t_min_n: vec![5.0],
            t_max_n: vec![15.0],
            green_bounds: vec![(5.0, 15.0)],
            xi_des: vec![10.0, 10.0],
        }
    }

    #[test]
    fn constant_speed_corridor_is_optimal() {
        let h = constant_speed_horizon();
        let windows = wide_windows(20.0);
        let sol =
            outer_optimize_with_terminal(&h, &windows, TerminalSpeed::Fixed(10.0)).unwrap();
        assert!((sol.durations[0] - 10.0).abs() < 1e-6, "{:?}", sol.durations);
        assert!((sol.durations[1] - 10.0).abs() < 1e-6);
        assert!((sol.speeds[1] - 10.0).abs() < 1e-6);
        assert!(sol.cost.abs() < 1e-9, "cost {}", sol.cost);
    }

    #[test]
    fn point_window_pins_first_entry() {
        let h = constant_speed_horizon();
        let mut windows = wide_windows(20.0);
        windows.t_min_n = vec![12.0];
        windows.t_max_n = vec![12.0];
        let sol = outer_optimize(&h, &windows).unwrap();
        assert!((sol.entry_times[1] - 12.0).abs() < 1e-9);
        assert!((sol.durations[0] - 12.0).abs() < 1e-9);
    }

    #[test]
    fn costate_continuity_and_interior_points() {
        let route = RouteSpec {
            total_length: 1500.0,
            sub_segments: vec![SubSegment {
                length: 1500.0,
                speed_limit: 17.8,
            }],
            signals: vec![
                SignalSpec {
                    position: 400.0,
                    cycle: 80.0,
                    green: 40.0,
                    amber: 4.0,
                    first_green_start: 10.0,
                },
                SignalSpec {
                    position: 900.0,
                    cycle: 70.0,
                    green: 35.0,
                    amber: 3.0,
                    first_green_start: 25.0,
                },
            ],
            end_stop: Some(1400.0),
        };
        let h = build_preview_horizon(&route, (0.0, 12.0, 0.0), 2000.0, 100.0).unwrap();
        let signals: Vec<&SignalSpec> = h
            .signal_indices
            .iter()
            .map(|&i| &route.signals[i])
            .collect();
        let params = PlannerParams::default();
        let w = compute_green_windows(&h, &signals, &params).unwrap();
        let sol = outer_optimize(&h, &w).unwrap();
        let traj = build_ff_trajectory(&sol);

        for i in 0..sol.costates.len() - 1 {
            let gap = (sol.costates[i].lambda2_end - sol.costates[i + 1].lambda2_start).abs();
            assert!(gap < 1e-8, "lambda2 jump {gap} at interior point {i}");
        }
        for (i, &t_ent) in sol.entry_times[1..sol.entry_times.len()].iter().enumerate() {
            let s_expect = sol.positions[i + 1];
            assert!(
                (traj.position_at(t_ent) - s_expect).abs() < 1e-6,
                "interior point {i} missed"
            );
        }
        // Entering times inside narrowed windows.
        for i in 0..h.signal_count() {
            let t = sol.entry_times[i + 1];
            assert!(t >= w.t_min_n[i] - 1e-9 && t <= w.t_max_n[i] + 1e-9);
        }
        // Fixed-speed-zero terminal.
        assert!((sol.speeds.last().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn free_terminal_transversality() {
        let (speeds, _, _) =
            solve_boundary_speeds(&[10.0, 8.0], &[120.0, 90.0], 9.0, TerminalSpeed::Free).unwrap();
        let n = speeds.len();
        let cs = segment_costates(speeds[n - 2], speeds[n - 1], 90.0, 8.0);
        assert!(cs.lambda2_end.abs() < 1e-9, "lambda2(tf) = {}", cs.lambda2_end);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = PreviewHorizon {
            t0: 0.0,
            s0: 0.0,
            v0: 8.0,
            boundaries: vec![150.0, 320.0, 480.0],
            signal_indices: vec![0, 1],
            min_travel_times: vec![6.0, 7.0, 6.5],
            terminal: TerminalKind::FreeSpeed,
        };
        let lengths = h.segment_lengths();
        let t_f = 40.0;
        let terminal = TerminalSpeed::Free;
        let eval = |t: &[f64]| {
            let xi = [t[0], t[1] - t[0], t_f - t[1]];
            let (speeds, _, cost) = solve_boundary_speeds(&xi, &lengths, h.v0, terminal).unwrap();
            let d: Vec<f64> = (0..3)
                .map(|i| segment_cost_d_xi(speeds[i], speeds[i + 1], lengths[i], xi[i]))
                .collect();
            (cost, vec![d[0] - d[1], d[1] - d[2]])
        };
        let t = [12.0, 26.0];
        let (_, grad) = eval(&t);
        let eps = 1e-6;
        for k in 0..2 {
            let mut tp = t;
            tp[k] += eps;
            let (cp, _) = eval(&tp);
            let mut tm = t;
            tm[k] -= eps;
            let (cm, _) = eval(&tm);
            let fd = (cp - cm) / (2.0 * eps);
            assert!(
                (fd - grad[k]).abs() < 1e-4 * (1.0 + fd.abs()),
                "grad[{k}] = {} vs fd {}",
                grad[k],
                fd
            );
        }
    }
}
