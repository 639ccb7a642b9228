//! Piecewise-linear acceleration trajectory assembled from a solved plan.

use crate::ff::segment::TrajectoryPiece;

/// Planned trajectory: cubic position pieces with acceleration linear in
/// time on each piece, continuous position and speed at every knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PwLinearAccelTrajectory {
    pub pieces: Vec<TrajectoryPiece>,
}

impl PwLinearAccelTrajectory {
    pub fn start_time(&self) -> f64 {
        self.pieces.first().map(|p| p.t_start).unwrap_or(0.0)
    }

    pub fn end_time(&self) -> f64 {
        self.pieces.last().map(|p| p.t_end).unwrap_or(0.0)
    }

    fn piece_for(&self, t: f64) -> &TrajectoryPiece {
        for p in &self.pieces {
            if t <= p.t_end {
                return p;
            }
        }
        self.pieces.last().unwrap()
    }

    /// Acceleration command at time `t`. Before the start the first value
    /// holds; past the end the command is zero.
    pub fn accel_at(&self, t: f64) -> f64 {
        if self.pieces.is_empty() || t >= self.end_time() {
            return 0.0;
        }
        let t = t.max(self.start_time());
        self.piece_for(t).accel_at(t)
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        if t >= self.end_time() {
            let last = self.pieces.last().unwrap();
            return last.speed_at(last.t_end);
        }
        let t = t.max(self.start_time());
        self.piece_for(t).speed_at(t)
    }

    pub fn position_at(&self, t: f64) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        if t >= self.end_time() {
            let last = self.pieces.last().unwrap();
            let v_end = last.speed_at(last.t_end);
            return last.position_at(last.t_end) + v_end * (t - last.t_end);
        }
        let t = t.max(self.start_time());
        self.piece_for(t).position_at(t)
    }

    /// Largest planned speed, sampled at knots and each piece's interior
    /// extremum (speed is quadratic per piece).
    pub fn max_speed(&self) -> f64 {
        let mut vmax = f64::NEG_INFINITY;
        for p in &self.pieces {
            vmax = vmax.max(p.v_start).max(p.speed_at(p.t_end));
            if p.jerk.abs() > 1e-12 {
                let t_ext = p.t_start - p.u_start / p.jerk;
                if t_ext > p.t_start && t_ext < p.t_end {
                    vmax = vmax.max(p.speed_at(t_ext));
                }
            }
        }
        vmax
    }

    /// Smallest planned speed; negative values indicate the unconstrained
    /// solution dips below zero.
    pub fn min_speed(&self) -> f64 {
        let mut vmin = f64::INFINITY;
        for p in &self.pieces {
            vmin = vmin.min(p.v_start).min(p.speed_at(p.t_end));
            if p.jerk.abs() > 1e-12 {
                let t_ext = p.t_start - p.u_start / p.jerk;
                if t_ext > p.t_start && t_ext < p.t_end {
                    vmin = vmin.min(p.speed_at(t_ext));
                }
            }
        }
        vmin
    }
}

/// Evaluate the next-step acceleration command from a trajectory.
pub fn ff_next_acceleration(traj: &PwLinearAccelTrajectory, t: f64) -> f64 {
    traj.accel_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_piece() -> PwLinearAccelTrajectory {
        let p1 = TrajectoryPiece::from_boundary(0.0, 10.0, 0.0, 0.0, 20.0, 100.0);
        let p2 = TrajectoryPiece::from_boundary(10.0, 20.0, 100.0, 20.0, 20.0, 200.0);
        PwLinearAccelTrajectory {
            pieces: vec![p1, p2],
        }
    }

    #[test]
    fn constant_accel_then_cruise() {
        let traj = two_piece();
        assert!((traj.accel_at(5.0) - 2.0).abs() < 1e-12);
        assert!(traj.accel_at(15.0).abs() < 1e-9);
        assert_eq!(traj.accel_at(25.0), 0.0);
    }

    #[test]
    fn holds_state_past_end() {
        let traj = two_piece();
        assert!((traj.speed_at(30.0) - 20.0).abs() < 1e-9);
        assert!((traj.position_at(30.0) - 500.0).abs() < 1e-6);
    }

    #[test]
    fn continuity_at_knots() {
        let traj = two_piece();
        assert!((traj.position_at(10.0 - 1e-9) - traj.position_at(10.0)).abs() < 1e-6);
        assert!((traj.speed_at(10.0 - 1e-9) - traj.speed_at(10.0)).abs() < 1e-6);
    }
}
