//! Weak-measurement pointer models: a qubit coupled to `N <= 3` Gaussian
//! pointers through `H = g sum_i pi_i (x) P_i`, post-selected, with the
//! pointer-position correlation `<x_1 ... x_N>` read out.
//!
//! The interaction is diagonal in the pointer momenta, so the evolution is a
//! 2x2 unitary per momentum grid point and is exact; position statistics come
//! from an inverse FFT along each pointer axis.

use std::collections::HashMap;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{hermitian_eigen, ComplexMatrix, DensityMatrix, Projector, C64};
use crate::pseudo::symmetrized_pp;
use crate::weak::MIN_OVERLAP;

/// Largest joint system-pointer state (complex amplitudes).
pub const MAX_AMPLITUDES: usize = 1 << 24;
pub const MAX_POINTERS: usize = 3;
/// Pointer count accepted by [`perturbative_prediction`].
pub const MAX_PERTURBATIVE_POINTERS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    /// Pointer width: each pointer starts in `exp(-x^2 / 2 sigma^2)`.
    pub sigma: f64,
    pub g: f64,
    pub t: f64,
    /// Grid points per pointer axis; a power of two, at least 32.
    pub grid_points: usize,
    /// Half-width of the position grid in units of `sigma`; at least 6.
    pub grid_halfwidth: f64,
}

impl Default for PointerConfig {
    fn default() -> Self {
        PointerConfig {
            sigma: 1.0,
            g: 0.05,
            t: 1.0,
            grid_points: 64,
            grid_halfwidth: 8.0,
        }
    }
}

impl PointerConfig {
    /// Coupling strength `g t`.
    pub fn tau(&self) -> f64 {
        self.g * self.t
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !self.g.is_finite() || !self.t.is_finite() {
            return Err(Error::invalid("coupling and duration must be finite"));
        }
        if self.grid_points < 32 || !self.grid_points.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid_points must be a power of two >= 32, got {}",
                self.grid_points
            )));
        }
        if !(self.grid_halfwidth >= 6.0) || !self.grid_halfwidth.is_finite() {
            return Err(Error::invalid(format!(
                "grid_halfwidth must be >= 6 sigma, got {}",
                self.grid_halfwidth
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointerResult {
    /// Post-selected `<x_1 ... x_N>`.
    pub correlation: f64,
    /// `Re Tr(post Pi rho) / Tr(post rho)` with `Pi` symmetrized over all orderings.
    pub pseudo_probability: f64,
    /// `correlation / ((g t)^N pseudo_probability)`; `None` when the
    /// pseudo-probability vanishes.
    pub ratio: Option<f64>,
    /// Relative change of the correlation when the grid spacing is halved.
    pub convergence_estimate: f64,
    /// Joint norm after evolution, before post-selection.
    pub norm: f64,
    pub pointers: usize,
}

fn check_inputs(state: &DensityMatrix, projectors: &[Projector], post: &DensityMatrix, max: usize) -> Result<()> {
    if projectors.is_empty() || projectors.len() > max {
        return Err(Error::invalid(format!("need 1..={max} projectors, got {}", projectors.len())));
    }
    let d = state.dim();
    if post.dim() != d || projectors.iter().any(|p| p.dim() != d) {
        return Err(Error::invalid("state, post-selection and projectors must share a dimension"));
    }
    let ov = crate::operator::expectation_real(state, post.matrix())?;
    if ov <= MIN_OVERLAP {
        return Err(Error::PostSelectionImpossible(ov));
    }
    Ok(())
}

/// `Re Tr(post Pi_sym rho) / Tr(post rho)`.
pub fn symmetrized_weak_pp(state: &DensityMatrix, projectors: &[Projector], post: &DensityMatrix) -> Result<f64> {
    let pi = if projectors.len() == 1 {
        projectors[0].matrix().clone()
    } else {
        symmetrized_pp(projectors)?.matrix().clone()
    };
    let num = (&(post.matrix() * &pi) * state.matrix()).trace();
    let den = (post.matrix() * state.matrix()).trace().re;
    Ok(num.re / den)
}

/// Spectral decomposition restricted to the positive-weight eigenvectors.
fn weighted_vectors(rho: &DensityMatrix) -> Result<Vec<(f64, Vec<C64>)>> {
    let e = hermitian_eigen(rho.matrix())?;
    Ok((0..rho.dim())
        .filter(|&k| e.values[k] > 1e-14)
        .map(|k| (e.values[k], e.vector(k)))
        .collect())
}

/// `exp(-i tau A)` for a Hermitian 2x2 `A`.
fn exp_2x2(a: [[C64; 2]; 2], tau: f64) -> [[C64; 2]; 2] {
    let a0 = 0.5 * (a[0][0].re + a[1][1].re);
    let (ax, ay, az) = (a[1][0].re, a[1][0].im, 0.5 * (a[0][0].re - a[1][1].re));
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let phase = C64::from_polar(1.0, -tau * a0);
    let (s, c) = (tau * r).sin_cos();
    let (nx, ny, nz) = if r > 0.0 { (ax / r, ay / r, az / r) } else { (0.0, 0.0, 0.0) };
    let mi = C64::new(0.0, -s);
    // c I - i s (n . sigma)
    [
        [phase * (C64::new(c, 0.0) + mi * nz), phase * mi * C64::new(nx, -ny)],
        [phase * mi * C64::new(nx, ny), phase * (C64::new(c, 0.0) - mi * nz)],
    ]
}

struct Grid {
    m: usize,
    n: usize,
    p: Vec<f64>,
    x: Vec<f64>,
}

impl Grid {
    fn new(cfg: &PointerConfig, n: usize) -> Self {
        let m = cfg.grid_points;
        let l = cfg.grid_halfwidth * cfg.sigma;
        let dx = 2.0 * l / m as f64;
        let dp = 2.0 * std::f64::consts::PI / (m as f64 * dx);
        let centred = |k: usize| k as f64 - (m / 2) as f64;
        Grid {
            m,
            n,
            p: (0..m).map(|k| centred(k) * dp).collect(),
            x: (0..m).map(|k| centred(k) * dx).collect(),
        }
    }

    fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Per-axis indices of flat index `idx` (axis 0 slowest).
    fn axes(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.n).rev() {
            out[a] = idx % self.m;
            idx /= self.m;
        }
    }
}

fn inverse_fft_all_axes(buf: &mut [Complex64], grid: &Grid, planner: &mut FftPlanner<f64>) {
    let m = grid.m;
    let fft = planner.plan_fft_inverse(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..grid.n {
        let stride = m.pow((grid.n - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..buf.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = buf[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    buf[base + k * stride] = *v;
                }
            }
        }
    }
}

struct RawSimulation {
    correlation: f64,
    norm: f64,
}

fn simulate_raw(state: &DensityMatrix, projectors: &[Projector], post: &DensityMatrix, cfg: &PointerConfig) -> Result<RawSimulation> {
    let n = projectors.len();
    let grid = Grid::new(cfg, n);
    let total = grid.len();
    if total.saturating_mul(2) > MAX_AMPLITUDES {
        return Err(Error::Resource(format!(
            "{} grid points on {n} pointers need {} amplitudes (limit {MAX_AMPLITUDES})",
            cfg.grid_points,
            total.saturating_mul(2)
        )));
    }
    let tau = cfg.tau();
    let pre = weighted_vectors(state)?;
    let post_e = hermitian_eigen(post.matrix())?;
    let pis: Vec<[[C64; 2]; 2]> = projectors
        .iter()
        .map(|p| {
            let m = p.matrix();
            [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
        })
        .collect();

    // U(p) and the Gaussian amplitude on the momentum grid, with the (-1)^k
    // factors that centre the FFT output on x = 0.
    let mut idx = vec![0usize; n];
    let mut unitaries = Vec::with_capacity(total);
    let mut phi = Vec::with_capacity(total);
    let mut phi_norm = 0.0;
    for flat in 0..total {
        grid.axes(flat, &mut idx);
        let mut a = [[C64::new(0.0, 0.0); 2]; 2];
        let mut p2 = 0.0;
        let mut sign = 1.0;
        for (axis, &k) in idx.iter().enumerate() {
            let p = grid.p[k];
            p2 += p * p;
            if k % 2 == 1 {
                sign = -sign;
            }
            for r in 0..2 {
                for c in 0..2 {
                    a[r][c] += pis[axis][r][c] * p;
                }
            }
        }
        let amp = (-0.5 * cfg.sigma * cfg.sigma * p2).exp();
        phi_norm += amp * amp;
        phi.push(amp * sign);
        unitaries.push(exp_2x2(a, tau));
    }

    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    let (mut num, mut den, mut norm) = (0.0, 0.0, 0.0);
    for (lambda, psi) in &pre {
        for j in 0..2 {
            let mu = post_e.values[j];
            let f = post_e.vector(j);
            // <f| U(p) |psi> Phi(p)
            let mut weight = 0.0;
            for (flat, (u, &amp)) in unitaries.iter().zip(&phi).enumerate() {
                let up0 = u[0][0] * psi[0] + u[0][1] * psi[1];
                let up1 = u[1][0] * psi[0] + u[1][1] * psi[1];
                let v = (f[0].conj() * up0 + f[1].conj() * up1) * amp;
                weight += v.norm_sqr();
                buf[flat] = Complex64::new(v.re, v.im);
            }
            norm += lambda * weight / phi_norm;
            if mu <= 1e-14 {
                continue;
            }
            inverse_fft_all_axes(&mut buf, &grid, &mut planner);
            let (mut s, mut s0) = (0.0, 0.0);
            for (flat, v) in buf.iter().enumerate() {
                grid.axes(flat, &mut idx);
                let w = v.norm_sqr();
                s0 += w;
                s += w * idx.iter().map(|&k| grid.x[k]).product::<f64>();
            }
            num += mu * lambda * s;
            den += mu * lambda * s0;
        }
    }
    if den <= 0.0 {
        return Err(Error::PostSelectionImpossible(den));
    }
    Ok(RawSimulation {
        correlation: num / den,
        norm,
    })
}

/// Exact pointer evolution, post-selection on `post`, and `<x_1 ... x_N>`.
pub fn simulate_pointers(
    state: &DensityMatrix,
    projectors: &[Projector],
    post: &DensityMatrix,
    cfg: &PointerConfig,
) -> Result<PointerResult> {
    cfg.validate()?;
    check_inputs(state, projectors, post, MAX_POINTERS)?;
    if state.dim() != 2 {
        return Err(Error::invalid("pointer simulation supports a single qubit"));
    }
    let n = projectors.len();
    let main = simulate_raw(state, projectors, post, cfg)?;
    // Halve the spacing; if that would exceed the memory bound, compare
    // against the coarser grid instead.
    let mut finer = *cfg;
    finer.grid_points *= 2;
    if finer.grid_points.pow(n as u32) * 2 > MAX_AMPLITUDES {
        finer.grid_points = cfg.grid_points / 2;
    }
    let other = if finer.validate().is_ok() {
        simulate_raw(state, projectors, post, &finer)?.correlation
    } else {
        main.correlation
    };
    let scale = main.correlation.abs().max(f64::MIN_POSITIVE);
    let pp = symmetrized_weak_pp(state, projectors, post)?;
    let denom = cfg.tau().powi(n as i32) * pp;
    Ok(PointerResult {
        correlation: main.correlation,
        pseudo_probability: pp,
        ratio: (denom.abs() > 1e-300 && pp.abs() > 1e-12).then(|| main.correlation / denom),
        convergence_estimate: (other - main.correlation).abs() / scale,
        norm: main.norm,
        pointers: n,
    })
}

// ---------------------------------------------------------------------------
// perturbation theory

/// Polynomial in commuting momenta with matrix coefficients.
#[derive(Clone, Debug)]
struct MatPoly {
    terms: HashMap<Vec<u32>, ComplexMatrix>,
    dim: usize,
    vars: usize,
}

impl MatPoly {
    fn constant(m: ComplexMatrix, vars: usize) -> Self {
        let dim = m.rows();
        let mut terms = HashMap::new();
        terms.insert(vec![0; vars], m);
        MatPoly { terms, dim, vars }
    }

    fn add_term(&mut self, exp: Vec<u32>, m: ComplexMatrix) {
        match self.terms.get_mut(&exp) {
            Some(existing) => *existing = &*existing + &m,
            None => {
                self.terms.insert(exp, m);
            }
        }
    }

    /// Left-multiply by `p . pi`.
    fn times_p_pi(&self, pis: &[ComplexMatrix], left: bool) -> Self {
        let mut out = MatPoly { terms: HashMap::new(), dim: self.dim, vars: self.vars };
        for (exp, m) in &self.terms {
            for (j, pi) in pis.iter().enumerate() {
                let mut e = exp.clone();
                e[j] += 1;
                out.add_term(e, if left { pi * m } else { m * pi });
            }
        }
        out
    }

    fn scale(&self, z: C64) -> Self {
        MatPoly {
            terms: self.terms.iter().map(|(e, m)| (e.clone(), m.scale(z))).collect(),
            dim: self.dim,
            vars: self.vars,
        }
    }

    /// `i d/dp_j (poly * Phi) / Phi = i (d_j poly - sigma^2 p_j poly)`.
    fn apply_i_d(&self, j: usize, sigma: f64) -> Self {
        let mut out = MatPoly { terms: HashMap::new(), dim: self.dim, vars: self.vars };
        let i = C64::new(0.0, 1.0);
        for (exp, m) in &self.terms {
            if exp[j] > 0 {
                let mut e = exp.clone();
                e[j] -= 1;
                out.add_term(e, m.scale(i * exp[j] as f64));
            }
            let mut e = exp.clone();
            e[j] += 1;
            out.add_term(e, m.scale(-i * sigma * sigma));
        }
        out
    }
}

/// `(-i)^k (p . pi)^k / k!` (or its adjoint with `+i` for the bra side).
fn power_term(pis: &[ComplexMatrix], k: usize, ket: bool) -> MatPoly {
    let dim = pis[0].rows();
    let mut poly = MatPoly::constant(ComplexMatrix::identity(dim), pis.len());
    for _ in 0..k {
        poly = poly.times_p_pi(pis, ket);
    }
    let unit = if ket { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    poly.scale(unit.powu(k as u32) / fact)
}

fn double_factorial_odd(m: u32) -> f64 {
    // (2m - 1)!!
    (1..=m).map(|i| (2 * i - 1) as f64).product()
}

/// `E[p^e]` under `|Phi|^2 ∝ exp(-sigma^2 p^2)`.
fn gaussian_moment(e: u32, sigma: f64) -> f64 {
    if e % 2 == 1 {
        return 0.0;
    }
    let m = e / 2;
    double_factorial_odd(m) / (2.0 * sigma * sigma).powi(m as i32)
}

/// Leading-order (`(g t)^N`) prediction for the post-selected
/// `<x_1 ... x_N>`, including every contribution at that order. For a
/// post-selection proportional to the identity it reduces to
/// `(g t)^N Re <Pi_sym>`.
pub fn perturbative_prediction(
    state: &DensityMatrix,
    projectors: &[Projector],
    post: &DensityMatrix,
    cfg: &PointerConfig,
) -> Result<f64> {
    if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) || !cfg.g.is_finite() || !cfg.t.is_finite() {
        return Err(Error::invalid("pointer parameters must be finite with sigma > 0"));
    }
    check_inputs(state, projectors, post, MAX_PERTURBATIVE_POINTERS)?;
    Ok(leading_coefficient(state, projectors, post, cfg.sigma)? * cfg.tau().powi(projectors.len() as i32))
}

/// Coefficient of `(g t)^N` in the post-selected correlation.
pub fn leading_coefficient(state: &DensityMatrix, projectors: &[Projector], post: &DensityMatrix, sigma: f64) -> Result<f64> {
    check_inputs(state, projectors, post, MAX_PERTURBATIVE_POINTERS)?;
    let n = projectors.len();
    let pis: Vec<ComplexMatrix> = projectors.iter().map(|p| p.matrix().clone()).collect();
    let (e, rho) = (post.matrix(), state.matrix());
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=n {
        let mut ket = power_term(&pis, k, true);
        for j in 0..n {
            ket = ket.apply_i_d(j, sigma);
        }
        let bra = power_term(&pis, n - k, false);
        for (ek, mk) in &ket.terms {
            let left = &(e * mk) * rho;
            for (eb, mb) in &bra.terms {
                let moment: f64 = (0..n).map(|j| gaussian_moment(ek[j] + eb[j], sigma)).product();
                if moment != 0.0 {
                    acc += (&left * mb).trace() * moment;
                }
            }
        }
    }
    let den = (e * rho).trace().re;
    Ok(acc.re / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityPoint {
    pub g: f64,
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityReport {
    pub points: Vec<ProportionalityPoint>,
    /// Least-squares slope of correlation against `g^N` through the origin.
    pub slope: f64,
    /// `slope / t^N`: the fitted coefficient of `(g t)^N`.
    pub normalized_slope: f64,
    pub pseudo_probability: f64,
    /// Perturbative coefficient of `(g t)^N`.
    pub leading_coefficient: f64,
    /// `|normalized_slope - leading_coefficient| / |leading_coefficient|`.
    pub relative_deviation: f64,
    pub sign_agreement: bool,
}

/// Simulates at each coupling and fits the correlation against `g^N`.
pub fn proportionality_check(
    state: &DensityMatrix,
    projectors: &[Projector],
    post: &DensityMatrix,
    cfg: &PointerConfig,
    couplings: &[f64],
) -> Result<ProportionalityReport> {
    if couplings.len() < 3 {
        return Err(Error::invalid("proportionality check needs at least 3 couplings"));
    }
    let n = projectors.len() as i32;
    let mut points = Vec::with_capacity(couplings.len());
    for &g in couplings {
        let c = PointerConfig { g, ..*cfg };
        c.validate()?;
        check_inputs(state, projectors, post, MAX_POINTERS)?;
        points.push(ProportionalityPoint {
            g,
            correlation: simulate_raw(state, projectors, post, &c)?.correlation,
        });
    }
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), p| {
        let x = p.g.powi(n);
        (sxy + x * p.correlation, sxx + x * x)
    });
    if sxx == 0.0 {
        return Err(Error::invalid("all couplings are zero"));
    }
    let slope = sxy / sxx;
    let normalized_slope = slope / cfg.t.powi(n);
    let pp = symmetrized_weak_pp(state, projectors, post)?;
    let lead = leading_coefficient(state, projectors, post, cfg.sigma)?;
    Ok(ProportionalityReport {
        points,
        slope,
        normalized_slope,
        pseudo_probability: pp,
        leading_coefficient: lead,
        relative_deviation: (normalized_slope - lead).abs() / lead.abs(),
        sign_agreement: slope.signum() == pp.signum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bloch_state, qubit_projector, BlochVector, Outcome, UnitVector3};

    fn mixed() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    #[test]
    fn single_pointer_shift() {
        let pz = qubit_projector(UnitVector3::Z, Outcome::Plus);
        let pre = bloch_state(BlochVector::new(0.0, 0.0, 0.4).unwrap());
        let cfg = PointerConfig { g: 0.05, ..Default::default() };
        let r = simulate_pointers(&pre, &[pz.clone()], &mixed(), &cfg).unwrap();
        assert!((r.correlation / (0.05 * 0.7) - 1.0).abs() < 0.02);
        assert!((r.norm - 1.0).abs() < 1e-10);
        let lead = perturbative_prediction(&pre, &[pz], &mixed(), &cfg).unwrap();
        assert!((lead - 0.05 * 0.7).abs() < 1e-14);
    }

    #[test]
    fn two_pointers_match_perturbation() {
        let fs = [
            qubit_projector(UnitVector3::Z, Outcome::Plus),
            qubit_projector(UnitVector3::X, Outcome::Plus),
        ];
        let cfg = PointerConfig::default();
        let r = simulate_pointers(&mixed(), &fs, &mixed(), &cfg).unwrap();
        let p = perturbative_prediction(&mixed(), &fs, &mixed(), &cfg).unwrap();
        assert!((p - 0.25 * 0.05f64.powi(2)).abs() < 1e-15);
        assert!((r.correlation - p).abs() / p.abs() < 0.05, "{} vs {p}", r.correlation);
        assert!(r.convergence_estimate < 0.01);
    }

    #[test]
    fn zero_coupling() {
        let fs = [qubit_projector(UnitVector3::Z, Outcome::Plus)];
        let cfg = PointerConfig { g: 0.0, ..Default::default() };
        assert_eq!(perturbative_prediction(&mixed(), &fs, &mixed(), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let fs = [qubit_projector(UnitVector3::Z, Outcome::Plus)];
        let bad = PointerConfig { grid_points: 48, ..Default::default() };
        assert!(simulate_pointers(&mixed(), &fs, &mixed(), &bad).is_err());
        let bad = PointerConfig { grid_halfwidth: 4.0, ..Default::default() };
        assert!(simulate_pointers(&mixed(), &fs, &mixed(), &bad).is_err());
        let big = PointerConfig { grid_points: 512, ..Default::default() };
        let three = [fs[0].clone(), fs[0].clone(), fs[0].clone()];
        assert!(matches!(simulate_pointers(&mixed(), &three, &mixed(), &big), Err(Error::Resource(_))));
    }

    #[test]
    fn orthogonal_post_selection() {
        let fs = [qubit_projector(UnitVector3::Z, Outcome::Plus)];
        let up = bloch_state(BlochVector::new(0.0, 0.0, 1.0).unwrap());
        let down = bloch_state(BlochVector::new(0.0, 0.0, -1.0).unwrap());
        assert!(matches!(
            simulate_pointers(&up, &fs, &down, &PointerConfig::default()),
            Err(Error::PostSelectionImpossible(_))
        ));
    }
}
