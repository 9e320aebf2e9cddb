//! Single-qubit game played on a two-observable pseudo-probability scheme
//! under Larmor precession.
//!
//! Schemes here are 4-vectors in the order `(++, --, +-, -+)` for the pair
//! `(sigma.m, sigma.n)` with `m = (cos th, sin th, 0)`, `n = (-sin th, cos th, 0)`.
//! A player wins by making some three entries sum to more than one, which
//! requires the fourth to be negative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{bloch_state, sigma_dot, BlochVector, UnitVector3};
use crate::operator::{ComplexMatrix, DensityMatrix, C64};
use crate::scheme::{build_scheme, ObservableSpec};
use crate::pseudo::Prescription;

pub type Scheme4 = [f64; 4];

const NORM_TOL: f64 = 1e-10;

/// Transition matrix for Larmor precession by angle `t` (`omega_L t`).
pub fn transition_matrix(t: f64) -> [[f64; 4]; 4] {
    let (s, c) = t.sin_cos();
    let (cp, cm, sp, sm) = (1.0 + 2.0 * c, 1.0 - 2.0 * c, 1.0 + 2.0 * s, 1.0 - 2.0 * s);
    let m = [
        [cp, cm, sm, sp],
        [cm, cp, sp, sm],
        [sp, sm, cp, cm],
        [sm, sp, cm, cp],
    ];
    m.map(|row| row.map(|x| 0.25 * x))
}

pub fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

fn check_normalized(s: &Scheme4) -> Result<()> {
    let total: f64 = s.iter().sum();
    if s.iter().any(|x| !x.is_finite()) || (total - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid(format!("scheme entries sum to {total}, expected 1")));
    }
    Ok(())
}

/// `T(t) s0`.
pub fn evolve_scheme(s0: &Scheme4, t: f64) -> Result<Scheme4> {
    check_normalized(s0)?;
    let m = transition_matrix(t);
    Ok([0, 1, 2, 3].map(|r| (0..4).map(|k| m[r][k] * s0[k]).sum()))
}

/// Largest sum of three entries, `1 - min(s)`.
pub fn game_score(s: &Scheme4) -> Result<f64> {
    check_normalized(s)?;
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(1.0 - min)
}

/// The game's observable pair at angle `theta`.
pub fn game_observables(theta: f64) -> [ObservableSpec; 2] {
    let m = UnitVector3::in_xy_plane(theta);
    let n = UnitVector3::in_xy_plane(theta + std::f64::consts::FRAC_PI_2);
    [ObservableSpec::axis(0, "m", m), ObservableSpec::axis(0, "n", n)]
}

/// The `(++, --, +-, -+)` scheme of a qubit state.
pub fn game_scheme(rho: &DensityMatrix, theta: f64) -> Result<Scheme4> {
    let s = build_scheme(rho, &[2], &game_observables(theta), &Prescription::Unit)?;
    Ok([s.get("++")?, s.get("--")?, s.get("+-")?, s.get("-+")?])
}

/// `exp(-i H t)` for `H = -omega sigma.n / 2`.
pub fn larmor_unitary(axis: UnitVector3, omega: f64, t: f64) -> ComplexMatrix {
    let (s, c) = (omega * t / 2.0).sin_cos();
    &ComplexMatrix::identity(2).scale_real(c) + &sigma_dot(axis.to_array()).scale(C64::new(0.0, s))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub scheme: Scheme4,
    pub score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Strategy {
    pub bloch: BlochVector,
    pub hamiltonian_axis: UnitVector3,
    pub omega: f64,
    pub theta: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub best_time: f64,
    pub best_score: f64,
    /// Whether any point beats the classical bound of one.
    pub wins: bool,
}

/// Evolves `(1 + sigma.p)/2` under `H = -omega sigma.n / 2` and scores the
/// game scheme at each time.
pub fn evaluate_strategy(
    bloch: BlochVector,
    hamiltonian_axis: UnitVector3,
    omega: f64,
    theta: f64,
    t_grid: &[f64],
) -> Result<Strategy> {
    if t_grid.is_empty() {
        return Err(Error::invalid("strategy needs at least one time point"));
    }
    if !omega.is_finite() || !theta.is_finite() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("non-finite strategy parameter"));
    }
    let rho0 = bloch_state(bloch);
    let mut trajectory = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let rho = rho0.evolve(&larmor_unitary(hamiltonian_axis, omega, t))?;
        let scheme = game_scheme(&rho, theta)?;
        trajectory.push(TrajectoryPoint {
            t,
            scheme,
            score: game_score(&scheme)?,
        });
    }
    let best = trajectory
        .iter()
        .max_by(|a, b| a.score.total_cmp(&b.score))
        .expect("non-empty trajectory");
    let (best_time, best_score) = (best.t, best.score);
    Ok(Strategy {
        bloch,
        hamiltonian_axis,
        omega,
        theta,
        wins: best_score > 1.0 + NORM_TOL,
        trajectory,
        best_time,
        best_score,
    })
}

/// `n` evenly spaced points from `t0` to `t1` inclusive.
pub fn time_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default play window.
pub const DEFAULT_WINDOW: (f64, f64) = (0.0, 2.0 * std::f64::consts::PI);

#[derive(Clone, Debug, Serialize)]
pub struct ScanEntry {
    pub bloch: BlochVector,
    pub hamiltonian_axis: UnitVector3,
    pub best_time: f64,
    pub best_score: f64,
}

/// Brute-force scan over pure initial states and Hamiltonian axes on
/// `(polar, azimuth)` grids; returns all entries sorted by score, best first.
pub fn scan_strategies(polar_steps: usize, azimuth_steps: usize, omega: f64, theta: f64, t_grid: &[f64]) -> Result<Vec<ScanEntry>> {
    if polar_steps < 2 || azimuth_steps < 1 {
        return Err(Error::invalid("scan grids need at least 2 polar and 1 azimuth steps"));
    }
    let pi = std::f64::consts::PI;
    let dirs: Vec<UnitVector3> = (0..polar_steps)
        .flat_map(|i| {
            (0..azimuth_steps).map(move |j| {
                UnitVector3::from_spherical(
                    pi * i as f64 / (polar_steps - 1) as f64,
                    2.0 * pi * j as f64 / azimuth_steps as f64,
                )
            })
        })
        .collect();
    let mut out = Vec::new();
    for p in &dirs {
        let a = p.to_array();
        let bloch = BlochVector::new(a[0], a[1], a[2]).unwrap_or(BlochVector::ORIGIN);
        for n in &dirs {
            let s = evaluate_strategy(bloch, *n, omega, theta, t_grid)?;
            out.push(ScanEntry {
                bloch,
                hamiltonian_axis: *n,
                best_time: s.best_time,
                best_score: s.best_score,
            });
        }
    }
    out.sort_by(|a, b| b.best_score.total_cmp(&a.best_score));
    Ok(out)
}
