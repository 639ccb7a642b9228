//! Symmetric tridiagonal system whose solution is the vector of optimal
//! intersection entering speeds.

use crate::corridor::TerminalKind;
use crate::error::{Error, Result};

/// Terminal speed condition of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalSpeed {
    Fixed(f64),
    Free,
}

impl TerminalSpeed {
    pub fn from_terminal(kind: TerminalKind) -> TerminalSpeed {
        match kind {
            TerminalKind::FixedSpeedZero => TerminalSpeed::Fixed(0.0),
            TerminalKind::FreeSpeed => TerminalSpeed::Free,
        }
    }
}

/// Symmetric tridiagonal system `A v = y` for the interior entering
/// speeds, with the boundary conditions folded into the right-hand side
/// and the last diagonal entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    /// Main diagonal `a_1 .. a_N` (terminal correction already applied).
    pub diagonal: Vec<f64>,
    /// Off-diagonal `b_1 .. b_{N-1}`.
    pub off_diagonal: Vec<f64>,
    /// Right-hand side (initial/terminal adjustments already applied).
    pub rhs: Vec<f64>,
    /// Terminal coefficients `(k_0, k_1)`.
    pub terminal_coeffs: (f64, f64),
}

/// Assemble the continuity system for `N + 1` segments with durations
/// `xi` and lengths `lengths`.
///
/// `a_i = 4(xi_i^-1 + xi_{i+1}^-1)`, `b_i = 2 xi_{i+1}^-1`,
/// `y_i = 6 l_i xi_i^-2 + 6 l_{i+1} xi_{i+1}^-2`, with
/// `y_1 -= 2 v0 / xi_1` and `y_N -= k_0`; a fixed terminal speed uses
/// `(k_0, k_1) = (2 v_f / xi_{N+1}, 0)` and a free one
/// `(3 l_{N+1} / xi_{N+1}^2, 1 / xi_{N+1})` with `a_N -= k_1`.
pub fn assemble_tridiagonal(
    xi: &[f64],
    lengths: &[f64],
    v0: f64,
    terminal: TerminalSpeed,
) -> Result<TridiagonalSystem> {
    let n = xi.len() - 1;
    if n < 1 {
        return Err(Error::InvalidArgument(
            "assemble_tridiagonal needs at least two segments".into(),
        ));
    }
    if lengths.len() != xi.len() {
        return Err(Error::InvalidArgument(format!(
            "lengths ({}) and durations ({}) disagree",
            lengths.len(),
            xi.len()
        )));
    }
    for (i, (&x, &l)) in xi.iter().zip(lengths).enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "segment {i} duration must be positive, got {x}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "segment {i} length must be positive, got {l}"
            )));
        }
    }

    let mut diagonal = Vec::with_capacity(n);
    let mut off_diagonal = Vec::with_capacity(n.saturating_sub(1));
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        diagonal.push(4.0 * (1.0 / xi[i] + 1.0 / xi[i + 1]));
        rhs.push(6.0 * lengths[i] / (xi[i] * xi[i]) + 6.0 * lengths[i + 1] / (xi[i + 1] * xi[i + 1]));
        if i + 1 < n {
            off_diagonal.push(2.0 / xi[i + 1]);
        }
    }
    rhs[0] -= 2.0 * v0 / xi[0];

    let xi_last = xi[n];
    let l_last = lengths[n];
    let (k0, k1) = match terminal {
        TerminalSpeed::Fixed(vf) => (2.0 * vf / xi_last, 0.0),
        TerminalSpeed::Free => (3.0 * l_last / (xi_last * xi_last), 1.0 / xi_last),
    };
    rhs[n - 1] -= k0;
    diagonal[n - 1] -= k1;

    Ok(TridiagonalSystem {
        diagonal,
        off_diagonal,
        rhs,
        terminal_coeffs: (k0, k1),
    })
}

/// Solve the system with the Thomas forward-elimination / back-substitution
/// recurrence. The assembled matrix is strictly diagonally dominant, so no
/// pivoting is needed.
pub fn solve_entering_speeds(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = system.diagonal.len();
    let mut diag = system.diagonal.clone();
    let mut rhs = system.rhs.clone();
    for i in 1..n {
        let b = system.off_diagonal[i - 1];
        if diag[i - 1].abs() < 1e-300 {
            return Err(Error::Solver(format!("zero pivot at row {}", i - 1)));
        }
        let m = b / diag[i - 1];
        diag[i] -= m * b;
        rhs[i] -= m * rhs[i - 1];
    }
    if diag[n - 1].abs() < 1e-300 {
        return Err(Error::Solver(format!("zero pivot at row {}", n - 1)));
    }
    let mut v = vec![0.0; n];
    v[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        v[i] = (rhs[i] - system.off_diagonal[i] * v[i + 1]) / diag[i];
    }
    Ok(v)
}

/// Terminal speed implied by the solved interior speeds: the fixed value,
/// or the transversality value `(3 l / xi - v_N) / 2` for a free end.
pub fn terminal_speed(xi: &[f64], lengths: &[f64], v_before: f64, terminal: TerminalSpeed) -> f64 {
    match terminal {
        TerminalSpeed::Fixed(vf) => vf,
        TerminalSpeed::Free => {
            let xi_last = *xi.last().unwrap();
            let l_last = *lengths.last().unwrap();
            1.5 * l_last / xi_last - 0.5 * v_before
        }
    }
}
