//! Per-segment algebra of the minimum-effort double-integrator problem:
//! cost, costate boundary values, and the cubic state trajectory.

use crate::error::{Error, Result};

/// Minimum acceleration effort to drive a double integrator from speed
/// `v_prev` to speed `v_next` over length `l` in time `xi`:
/// `2(v_prev^2 + v_prev v_next + v_next^2)/xi - 6 l (v_prev + v_next)/xi^2
///  + 6 l^2 / xi^3`.
pub fn segment_cost(v_prev: f64, v_next: f64, l: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "segment duration must be positive, got {xi}"
        )));
    }
    let inv = 1.0 / xi;
    Ok(2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) * inv
        - 6.0 * l * (v_prev + v_next) * inv * inv
        + 6.0 * l * l * inv * inv * inv)
}

/// Variant of [`segment_cost`] with the middle-term velocities squared,
/// `- 6 l (v_prev^2 + v_next^2) / xi^2`. The term is dimensionally
/// inconsistent and the expression is nonzero for constant-speed motion,
/// so it is never used in planning; it is retained only so the
/// discrepancy against the consistent form can be demonstrated.
pub fn segment_cost_midterm_squared(v_prev: f64, v_next: f64, l: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "segment duration must be positive, got {xi}"
        )));
    }
    let inv = 1.0 / xi;
    Ok(2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) * inv
        - 6.0 * l * (v_prev * v_prev + v_next * v_next) * inv * inv
        + 6.0 * l * l * inv * inv * inv)
}

/// Partial derivative of [`segment_cost`] with respect to the duration,
/// holding the boundary speeds fixed.
pub fn segment_cost_d_xi(v_prev: f64, v_next: f64, l: f64, xi: f64) -> f64 {
    let inv = 1.0 / xi;
    -2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) * inv * inv
        + 12.0 * l * (v_prev + v_next) * inv * inv * inv
        - 18.0 * l * l * inv * inv * inv * inv
}

/// Costate boundary values of one segment.
///
/// The position costate is constant within a segment; the speed costate is
/// linear in time between its entry and exit values, and the control is
/// its negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCostates {
    /// Position costate (constant over the segment).
    pub lambda1: f64,
    /// Speed costate just after the segment start.
    pub lambda2_start: f64,
    /// Speed costate just before the segment end.
    pub lambda2_end: f64,
}

/// Costates of the segment `(v_prev, v_next, l, xi)`:
/// `lambda1 = -12 l xi^-3 + 6 (v_prev + v_next) xi^-2`,
/// `lambda2(start) = -6 l xi^-2 + 2 (2 v_prev + v_next) xi^-1`,
/// `lambda2(end)   =  6 l xi^-2 - 2 (v_prev + 2 v_next) xi^-1`.
pub fn segment_costates(v_prev: f64, v_next: f64, l: f64, xi: f64) -> SegmentCostates {
    let inv = 1.0 / xi;
    SegmentCostates {
        lambda1: -12.0 * l * inv * inv * inv + 6.0 * (v_prev + v_next) * inv * inv,
        lambda2_start: -6.0 * l * inv * inv + 2.0 * (2.0 * v_prev + v_next) * inv,
        lambda2_end: 6.0 * l * inv * inv - 2.0 * (v_prev + 2.0 * v_next) * inv,
    }
}

/// One cubic-position piece of a planned trajectory. Acceleration is
/// linear in time over the piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPiece {
    pub t_start: f64,
    pub t_end: f64,
    pub s_start: f64,
    pub v_start: f64,
    /// Acceleration at `t_start`.
    pub u_start: f64,
    /// Acceleration at `t_end`.
    pub u_end: f64,
    /// Constant jerk `(u_end - u_start) / (t_end - t_start)`.
    pub jerk: f64,
}

impl TrajectoryPiece {
    /// Build the minimum-effort piece joining `(s_prev, v_prev)` at
    /// `t_start` to `(s_prev + l, v_next)` at `t_end`.
    pub fn from_boundary(
        t_start: f64,
        t_end: f64,
        s_prev: f64,
        v_prev: f64,
        v_next: f64,
        l: f64,
    ) -> TrajectoryPiece {
        let xi = t_end - t_start;
        let cs = segment_costates(v_prev, v_next, l, xi);
        let u_start = -cs.lambda2_start;
        let u_end = -cs.lambda2_end;
        TrajectoryPiece {
            t_start,
            t_end,
            s_start: s_prev,
            v_start: v_prev,
            u_start,
            u_end,
            jerk: (u_end - u_start) / xi,
        }
    }

    pub fn accel_at(&self, t: f64) -> f64 {
        let dt = t - self.t_start;
        self.u_start + self.jerk * dt
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let dt = t - self.t_start;
        self.v_start + self.u_start * dt + 0.5 * self.jerk * dt * dt
    }

    pub fn position_at(&self, t: f64) -> f64 {
        let dt = t - self.t_start;
        self.s_start
            + self.v_start * dt
            + 0.5 * self.u_start * dt * dt
            + self.jerk * dt * dt * dt / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_speed_costs_nothing() {
        let j = segment_cost(12.0, 12.0, 120.0, 10.0).unwrap();
        assert!(j.abs() < 1e-12, "constant speed cost was {j}");
    }

    #[test]
    fn constant_acceleration_cost() {
        // 0 -> 20 m/s over 100 m in 10 s is constant u = 2; effort 20.
        let j = segment_cost(0.0, 20.0, 100.0, 10.0).unwrap();
        assert!((j - 20.0).abs() < 1e-12);
    }

    #[test]
    fn midterm_squared_variant_breaks_zero_check() {
        let j = segment_cost_midterm_squared(12.0, 12.0, 120.0, 10.0).unwrap();
        assert!(j.abs() > 1.0, "squared-velocity variant should be nonzero");
    }

    #[test]
    fn cost_rejects_nonpositive_duration() {
        assert!(segment_cost(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn piece_hits_boundary_conditions() {
        let p = TrajectoryPiece::from_boundary(5.0, 13.0, 40.0, 7.0, 15.0, 95.0);
        assert!((p.position_at(5.0) - 40.0).abs() < 1e-12);
        assert!((p.speed_at(5.0) - 7.0).abs() < 1e-12);
        assert!((p.position_at(13.0) - 135.0).abs() < 1e-9);
        assert!((p.speed_at(13.0) - 15.0).abs() < 1e-9);
    }

    #[test]
    fn constant_acceleration_piece() {
        let p = TrajectoryPiece::from_boundary(0.0, 10.0, 0.0, 0.0, 20.0, 100.0);
        assert!((p.accel_at(0.0) - 2.0).abs() < 1e-12);
        assert!((p.accel_at(5.0) - 2.0).abs() < 1e-12);
        assert!((p.accel_at(10.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_quadrature_matches_cost() {
        // Effort along the cubic piece integrates exactly with Simpson's
        // rule because the integrand is quadratic in time.
        let (v0, v1, l, xi) = (4.0, 16.0, 130.0, 11.0);
        let p = TrajectoryPiece::from_boundary(0.0, xi, 0.0, v0, v1, l);
        let f = |t: f64| 0.5 * p.accel_at(t) * p.accel_at(t);
        let quad = xi / 6.0 * (f(0.0) + 4.0 * f(xi / 2.0) + f(xi));
        let j = segment_cost(v0, v1, l, xi).unwrap();
        assert!((quad - j).abs() <= 1e-8 * j.abs().max(1.0));
    }
}
