//! Outer travel-time optimization: spectral projected gradient descent
//! over intersection entering times, with an exact pool-adjacent-violators
//! projection onto the window-and-separation polytope.

use crate::error::{Error, Result};

/// Feasible set for the entering times `T_1 .. T_N`:
/// `lo_i <= T_i <= hi_i` and `T_i - T_{i-1} >= gap_i` with `T_0 = t0`
/// anchored and `T_{N+1} = t_f` fixed (folded into `hi_N`).
#[derive(Debug, Clone)]
pub struct FeasibleTimes {
    pub t0: f64,
    /// Forward-tightened lower bounds.
    pub lo: Vec<f64>,
    /// Backward-tightened upper bounds.
    pub hi: Vec<f64>,
    /// Minimum separations `gap_1 .. gap_N`.
    pub gaps: Vec<f64>,
    /// Cumulative separations from the anchor: `t0 + sum(gap_1..gap_i)`.
    cum: Vec<f64>,
}

impl FeasibleTimes {
    /// Tighten raw window bounds against the separation chain and the
    /// fixed final time, and fail if the set is empty.
    ///
    /// `xi_min` has `N + 1` entries; the last one reserves time for the
    /// terminal segment ending at `t_f`.
    pub fn new(t0: f64, t_f: f64, lo: &[f64], hi: &[f64], xi_min: &[f64]) -> Result<FeasibleTimes> {
        let n = lo.len();
        assert_eq!(hi.len(), n);
        assert_eq!(xi_min.len(), n + 1);
        let gaps = xi_min[..n].to_vec();
        let mut lo_t = lo.to_vec();
        let mut hi_t = hi.to_vec();
        let mut prev = t0;
        for i in 0..n {
            lo_t[i] = lo_t[i].max(prev + gaps[i]);
            prev = lo_t[i];
        }
        let mut next = t_f;
        for i in (0..n).rev() {
            hi_t[i] = hi_t[i].min(next - xi_min[i + 1]);
            next = hi_t[i];
        }
        for i in 0..n {
            if lo_t[i] > hi_t[i] + 1e-12 {
                return Err(Error::InfeasiblePlan(format!(
                    "entering-time window {} empty after tightening: [{:.3}, {:.3}]",
                    i + 1,
                    lo_t[i],
                    hi_t[i]
                )));
            }
            hi_t[i] = hi_t[i].max(lo_t[i]);
        }
        let mut cum = Vec::with_capacity(n);
        let mut c = t0;
        for g in &gaps {
            c += g;
            cum.push(c);
        }
        Ok(FeasibleTimes {
            t0,
            lo: lo_t,
            hi: hi_t,
            gaps,
            cum,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, t: &[f64], tol: f64) -> bool {
        let mut prev = self.t0;
        for i in 0..t.len() {
            if t[i] < self.lo[i] - tol || t[i] > self.hi[i] + tol {
                return false;
            }
            if t[i] - prev < self.gaps[i] - tol {
                return false;
            }
            prev = t[i];
        }
        true
    }

    /// Euclidean projection onto the feasible set.
    ///
    /// Shifting by the cumulative separations turns the chain constraints
    /// into plain monotonicity; the set is then the intersection of the
    /// monotone cone and a box with monotone bounds. Dykstra's alternating
    /// projections between the two (pool-adjacent-violators and a clamp)
    /// converge to the exact projection; a final monotone fix keeps the
    /// result feasible to machine precision.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let lo: Vec<f64> = (0..n).map(|i| self.lo[i] - self.cum[i]).collect();
        let hi: Vec<f64> = (0..n).map(|i| self.hi[i] - self.cum[i]).collect();
        let mut x: Vec<f64> = (0..n).map(|i| z[i] - self.cum[i]).collect();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut work = vec![0.0; n];
        for _ in 0..4000 {
            for i in 0..n {
                work[i] = x[i] + p[i];
            }
            let y = isotonic_regression(&work);
            // Converged only when the two per-set projections agree and the
            // iterate has stopped moving; x alone can stall while the
            // correction vectors still evolve.
            let mut delta = 0.0f64;
            for i in 0..n {
                p[i] = work[i] - y[i];
                let xi_new = (y[i] + q[i]).clamp(lo[i], hi[i]);
                q[i] = y[i] + q[i] - xi_new;
                delta = delta.max((xi_new - x[i]).abs()).max((y[i] - xi_new).abs());
                x[i] = xi_new;
            }
            if delta < 1e-12 {
                break;
            }
        }
        // Box-feasible already; restore monotonicity exactly. Upper bounds
        // are monotone, so the forward max cannot leave the box.
        for i in 1..n {
            if x[i] < x[i - 1] {
                x[i] = x[i - 1].min(hi[i]);
            }
        }
        (0..n).map(|i| x[i] + self.cum[i]).collect()
    }
}

/// Unweighted nondecreasing isotonic regression by pool-adjacent-violators.
fn isotonic_regression(y: &[f64]) -> Vec<f64> {
    // (mean, count) blocks.
    let mut means: Vec<f64> = Vec::with_capacity(y.len());
    let mut counts: Vec<usize> = Vec::with_capacity(y.len());
    for &v in y {
        means.push(v);
        counts.push(1);
        while means.len() > 1 && means[means.len() - 2] > means[means.len() - 1] {
            let (m2, c2) = (means.pop().unwrap(), counts.pop().unwrap());
            let k = means.len() - 1;
            let c1 = counts[k];
            means[k] = (means[k] * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64;
            counts[k] = c1 + c2;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, c) in means.iter().zip(&counts) {
        for _ in 0..*c {
            out.push(*m);
        }
    }
    out
}

/// Options for the projected-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct SpgOptions {
    pub max_iters: usize,
    /// Stop when the projected-gradient step is smaller than this.
    pub step_tol: f64,
    /// Stop when the cost decrease falls below this (relative).
    pub cost_tol: f64,
}

impl Default for SpgOptions {
    fn default() -> Self {
        SpgOptions {
            max_iters: 400,
            step_tol: 1e-10,
            cost_tol: 1e-8,
        }
    }
}

/// Spectral projected gradient descent from one start point. Returns the
/// final iterate and its cost.
pub fn spg_minimize<F>(
    objective: &F,
    feasible: &FeasibleTimes,
    start: &[f64],
    opts: &SpgOptions,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut t = feasible.project(start);
    let (mut cost, mut grad) = objective(&t)?;
    let mut alpha = 1.0;
    for _ in 0..opts.max_iters {
        let trial: Vec<f64> = t.iter().zip(&grad).map(|(x, g)| x - alpha * g).collect();
        let proj = feasible.project(&trial);
        let dir: Vec<f64> = proj.iter().zip(&t).map(|(p, x)| p - x).collect();
        let dir_norm = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if dir_norm < opts.step_tol || slope >= 0.0 {
            break;
        }
        // Backtracking line search along the projection arc endpoint.
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = t
                .iter()
                .zip(&dir)
                .map(|(x, d)| x + lambda * d)
                .collect();
            let (c_cost, c_grad) = objective(&cand)?;
            if c_cost <= cost + 1e-4 * lambda * slope {
                accepted = Some((cand, c_cost, c_grad));
                break;
            }
            lambda *= 0.5;
        }
        let Some((new_t, new_cost, new_grad)) = accepted else {
            break;
        };
        // Barzilai-Borwein step for the next iteration.
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..t.len() {
            let s = new_t[i] - t[i];
            let y = new_grad[i] - grad[i];
            ss += s * s;
            sy += s * y;
        }
        alpha = if sy > 1e-14 {
            (ss / sy).clamp(1e-6, 1e6)
        } else {
            1.0
        };
        let decrease = cost - new_cost;
        t = new_t;
        cost = new_cost;
        grad = new_grad;
        if decrease < opts.cost_tol * (1.0 + cost.abs()) && dir_norm < 1e-6 {
            break;
        }
    }
    Ok((t, cost))
}
