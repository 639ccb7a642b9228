//! Short-term car-following layer: preceding-vehicle prediction, the
//! closed-form optimal terminal state on the gap constraint, the next-step
//! collision-avoidance acceleration, and the min-ensemble.

use crate::error::{Error, Result};

/// Below this magnitude the preceding vehicle's acceleration is treated as
/// zero and the prediction falls back to constant speed.
const ACCEL_EPS: f64 = 1e-6;

/// Predicted preceding-vehicle motion over the short-term horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvPrediction {
    pub s_p0: f64,
    pub v_p0: f64,
    pub a_p0: f64,
    /// Speed bound the prediction saturates at.
    pub v_m: f64,
    /// Time at which the speed bound is reached.
    pub t_m: f64,
    /// Predicted position at the end of the horizon.
    pub s_p_final: f64,
}

/// Predict where the preceding vehicle will be after `t_st_prv` seconds,
/// assuming it holds its current acceleration until its speed saturates at
/// `v_des` (accelerating) or zero (braking).
pub fn predict_preceding_position(
    pv: (f64, f64, f64),
    v_des: f64,
    t_st_prv: f64,
) -> PvPrediction {
    let (s_p0, v_p0, a_p0) = pv;
    debug_assert!(t_st_prv > 0.0);
    if a_p0.abs() < ACCEL_EPS {
        return PvPrediction {
            s_p0,
            v_p0,
            a_p0,
            v_m: v_p0,
            t_m: t_st_prv,
            s_p_final: s_p0 + v_p0 * t_st_prv,
        };
    }
    let v_m = if a_p0 >= 0.0 { v_des } else { 0.0 };
    let t_m = ((v_m - v_p0) / a_p0).max(0.0).min(t_st_prv);
    let s_p_final = s_p0 + v_p0 * t_m + 0.5 * a_p0 * t_m * t_m + v_m * (t_st_prv - t_m);
    PvPrediction {
        s_p0,
        v_p0,
        a_p0,
        v_m,
        t_m,
        s_p_final,
    }
}

/// Quadratic cost coefficients of the terminal state `(s_f, v_f)` for the
/// short-term horizon starting at `(s_0, v_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl CfCoefficients {
    /// Evaluate the quadratic at a terminal state.
    pub fn cost(&self, s_f: f64, v_f: f64) -> f64 {
        self.c0
            + self.c1 * s_f * s_f
            + self.c2 * s_f
            + self.c3 * s_f * v_f
            + self.c4 * v_f
            + self.c5 * v_f * v_f
    }
}

/// Effort cost of the short-term segment as a quadratic in the terminal
/// state, with `T = t_st_prv`:
/// `c0 = 2 v0^2/T + 6 v0 s0/T^2 + 6 s0^2/T^3`, `c1 = 6/T^3`,
/// `c2 = -12 s0/T^3 - 6 v0/T^2`, `c3 = -6/T^2`,
/// `c4 = 6 s0/T^2 + 2 v0/T`, `c5 = 2/T`.
pub fn cf_cost_coefficients(s_0: f64, v_0: f64, t_st_prv: f64) -> Result<CfCoefficients> {
    if !(t_st_prv > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_st_prv must be positive, got {t_st_prv}"
        )));
    }
    let t = t_st_prv;
    let t2 = t * t;
    let t3 = t2 * t;
    Ok(CfCoefficients {
        c0: 2.0 * v_0 * v_0 / t + 6.0 * v_0 * s_0 / t2 + 6.0 * s_0 * s_0 / t3,
        c1: 6.0 / t3,
        c2: -12.0 * s_0 / t3 - 6.0 * v_0 / t2,
        c3: -6.0 / t2,
        c4: 6.0 * s_0 / t2 + 2.0 * v_0 / t,
        c5: 2.0 / t,
    })
}

/// Minimize the terminal-state quadratic on the gap constraint line
/// `s_f + b_1 v_f = b_0`:
/// `v_f* = -((2 c1 b1 - c3) b0 + (c2 b1 - c4)) / (2 (c3 b1 - c5 - c1 b1^2))`
/// and `s_f* = b0 - b1 v_f*`.
pub fn solve_cf_terminal(coeffs: &CfCoefficients, b_0: f64, b_1: f64) -> Result<(f64, f64)> {
    let denom = 2.0 * (coeffs.c3 * b_1 - coeffs.c5 - coeffs.c1 * b_1 * b_1);
    if denom.abs() < 1e-12 {
        return Err(Error::Solver(format!(
            "degenerate constraint-line denominator {denom}"
        )));
    }
    let v_f = -((2.0 * coeffs.c1 * b_1 - coeffs.c3) * b_0 + (coeffs.c2 * b_1 - coeffs.c4)) / denom;
    let s_f = b_0 - b_1 * v_f;
    Ok((s_f, v_f))
}

/// Boundary conditions of the short-term segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfBoundary {
    pub s_0: f64,
    pub v_0: f64,
    pub t_0: f64,
    pub s_f: f64,
    pub v_f: f64,
    /// Horizon length `t_st_prv` (the segment ends at `t_0 + t_st_prv`).
    pub t_st_prv: f64,
}

/// Initial acceleration of the minimum-effort segment through the solved
/// boundary: `6 (s_f - s_0)/T^2 - 2 (2 v_0 + v_f)/T`.
pub fn cf_next_acceleration(bc: &CfBoundary) -> f64 {
    let t = bc.t_st_prv;
    6.0 * (bc.s_f - bc.s_0) / (t * t) - 2.0 * (2.0 * bc.v_0 + bc.v_f) / t
}

/// Full car-following solution for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfSolution {
    pub coeffs: CfCoefficients,
    pub b_0: f64,
    pub b_1: f64,
    pub s_f: f64,
    pub v_f: f64,
    pub boundary: CfBoundary,
    pub accel: f64,
}

/// Solve the car-following layer for an ego at `(s_0, v_0, t_0)` against a
/// preceding vehicle (rear-bumper state `(s_p0, v_p0, a_p0)`).
pub fn solve_car_following(
    ego: (f64, f64, f64),
    pv: (f64, f64, f64),
    v_des: f64,
    t_st_prv: f64,
    tau_des: f64,
    standstill_gap: f64,
) -> Result<CfSolution> {
    let (s_0, v_0, t_0) = ego;
    let pred = predict_preceding_position(pv, v_des, t_st_prv);
    let coeffs = cf_cost_coefficients(s_0, v_0, t_st_prv)?;
    let b_0 = pred.s_p_final - standstill_gap;
    let b_1 = tau_des;
    let (s_f, v_f) = solve_cf_terminal(&coeffs, b_0, b_1)?;
    let boundary = CfBoundary {
        s_0,
        v_0,
        t_0,
        s_f,
        v_f,
        t_st_prv,
    };
    Ok(CfSolution {
        coeffs,
        b_0,
        b_1,
        s_f,
        v_f,
        boundary,
        accel: cf_next_acceleration(&boundary),
    })
}

/// Min-combination of the free-flow and car-following accelerations.
pub fn ensemble(a_ff: f64, a_cf: f64) -> f64 {
    a_ff.min(a_cf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pv_prediction_accelerating() {
        let p = predict_preceding_position((100.0, 10.0, 1.0), 17.8, 3.0);
        assert_eq!(p.t_m, 3.0);
        assert!((p.s_p_final - 134.5).abs() < 1e-12);
    }

    #[test]
    fn pv_prediction_zero_accel_is_constant_speed() {
        let p = predict_preceding_position((50.0, 8.0, 0.0), 17.8, 3.0);
        assert!((p.s_p_final - 74.0).abs() < 1e-12);
        assert_eq!(p.t_m, 3.0);
    }

    #[test]
    fn pv_prediction_saturates_immediately() {
        let p = predict_preceding_position((10.0, 17.8, 2.0), 17.8, 3.0);
        assert_eq!(p.t_m, 0.0);
        assert!((p.s_p_final - (10.0 + 17.8 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn pv_prediction_braking_to_stop() {
        let p = predict_preceding_position((0.0, 6.0, -2.0), 17.8, 5.0);
        assert_eq!(p.v_m, 0.0);
        assert!((p.t_m - 3.0).abs() < 1e-12);
        assert!((p.s_p_final - 9.0).abs() < 1e-12);
    }

    #[test]
    fn coefficients_hand_case() {
        let c = cf_cost_coefficients(0.0, 10.0, 3.0).unwrap();
        assert!((c.c1 - 6.0 / 27.0).abs() < 1e-12);
        assert!((c.c2 + 60.0 / 9.0).abs() < 1e-12);
        assert!((c.c3 + 6.0 / 9.0).abs() < 1e-12);
        assert!((c.c4 - 20.0 / 3.0).abs() < 1e-12);
        assert!((c.c5 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coefficients_zero_state() {
        let c = cf_cost_coefficients(0.0, 0.0, 3.0).unwrap();
        assert_eq!(c.c0, 0.0);
        assert_eq!(c.c2, 0.0);
        assert_eq!(c.c4, 0.0);
    }

    #[test]
    fn quadratic_matches_segment_cost() {
        use crate::ff::segment_cost;
        let cases = [
            (0.0, 10.0, 3.0, 25.0, 12.0),
            (40.0, 3.0, 2.0, 55.0, 7.5),
            (-10.0, 0.0, 4.0, 12.0, 0.0),
        ];
        for (s0, v0, t, sf, vf) in cases {
            let c = cf_cost_coefficients(s0, v0, t).unwrap();
            let quad = c.cost(sf, vf);
            let direct = segment_cost(v0, vf, sf - s0, t).unwrap();
            assert!(
                (quad - direct).abs() < 1e-9 * (1.0 + direct.abs()),
                "mismatch at {s0},{v0},{t},{sf},{vf}: {quad} vs {direct}"
            );
        }
    }

    #[test]
    fn steady_following_is_a_fixed_point() {
        // Gap exactly tau * v + s_s, matched speeds, zero PV acceleration.
        let sol = solve_car_following(
            (0.0, 10.0, 0.0),
            (20.0, 10.0, 0.0),
            17.8,
            3.0,
            1.5,
            5.0,
        )
        .unwrap();
        assert!((sol.v_f - 10.0).abs() < 1e-12);
        assert!((sol.s_f - 30.0).abs() < 1e-12);
        assert_eq!(sol.accel, 0.0);
    }

    #[test]
    fn far_preceding_vehicle_hand_case() {
        let c = cf_cost_coefficients(0.0, 10.0, 3.0).unwrap();
        let (s_f, v_f) = solve_cf_terminal(&c, 95.0, 1.5).unwrap();
        assert!((v_f - 25.384615384615383).abs() < 1e-9);
        assert!((s_f - (95.0 - 1.5 * v_f)).abs() < 1e-12);
        let bc = CfBoundary {
            s_0: 0.0,
            v_0: 10.0,
            t_0: 0.0,
            s_f,
            v_f,
            t_st_prv: 3.0,
        };
        let a = cf_next_acceleration(&bc);
        assert!((a - 7.692307692307692).abs() < 1e-9);
    }

    #[test]
    fn stopped_vehicle_just_ahead_brakes() {
        let sol = solve_car_following(
            (0.0, 12.0, 0.0),
            (8.0, 0.0, 0.0),
            17.8,
            3.0,
            1.5,
            5.0,
        )
        .unwrap();
        assert!(sol.accel < 0.0, "accel {}", sol.accel);
    }

    #[test]
    fn constraint_is_exactly_active() {
        let sol = solve_car_following(
            (12.0, 7.0, 1.0),
            (60.0, 4.0, 0.5),
            17.8,
            3.0,
            1.5,
            5.0,
        )
        .unwrap();
        let pred = predict_preceding_position((60.0, 4.0, 0.5), 17.8, 3.0);
        let residual = sol.s_f + 1.5 * sol.v_f + 5.0 - pred.s_p_final;
        assert!(residual.abs() < 1e-9);
    }

    #[test]
    fn ensemble_is_min() {
        assert_eq!(ensemble(1.2, 0.5), 0.5);
        assert_eq!(ensemble(-0.5, 2.0), -0.5);
        assert_eq!(ensemble(0.7, 0.7), 0.7);
    }
}
