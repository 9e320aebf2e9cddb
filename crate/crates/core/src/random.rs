//! Random states, projectors and directions for property tests and scans.
//! All samplers take the generator explicitly so callers control seeding.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{bloch_state, qubit_projector, BlochVector, Outcome, UnitVector3};
use crate::operator::{ComplexMatrix, DensityMatrix, Projector, C64};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(normal(rng), normal(rng))
}

/// Uniform on the sphere.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    loop {
        let v = [normal(rng), normal(rng), normal(rng)];
        if let Ok(u) = UnitVector3::normalize(v) {
            return u;
        }
    }
}

/// Uniform in the unit ball.
pub fn bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let u = unit_vector(rng).to_array();
    let r = rng.random::<f64>().cbrt();
    BlochVector::new(r * u[0], r * u[1], r * u[2]).expect("inside the unit ball")
}

pub fn qubit_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    bloch_state(bloch_vector(rng))
}

/// Hilbert-Schmidt (Ginibre) random mixed state.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    DensityMatrix::from_unnormalized(&(&g * &g.adjoint())).expect("G G^dagger is positive")
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    DensityMatrix::pure(&v).expect("non-zero vector")
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    g.hermitian_part()
}

/// Haar-random rank-`rank` projector in dimension `dim`.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<Projector> {
    if rank == 0 || rank > dim {
        return Err(Error::invalid(format!("rank {rank} impossible in dimension {dim}")));
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let ov: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= ov * bi;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    Projector::onto(&basis)
}

pub fn qubit_projector_random<R: Rng + ?Sized>(rng: &mut R) -> Projector {
    qubit_projector(unit_vector(rng), Outcome::Plus)
}

fn weights<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// `sum_k p_k rho_k^1 (x) rho_k^2` with `k` product terms, `1 <= k <= 4`.
pub fn separable_two_qubit<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&k) {
        return Err(Error::invalid("separable sampler supports 1..=4 terms"));
    }
    let parts: Vec<(f64, DensityMatrix)> = weights(rng, k)
        .into_iter()
        .map(|p| {
            let r = qubit_state(rng).tensor(&qubit_state(rng)).expect("2x2 factors");
            (p, r)
        })
        .collect();
    DensityMatrix::mixture(&parts)
}

/// `sum_k p_k |phi_k><phi_k| (x) rho_k^2` with `{phi_k}` orthonormal on the
/// first qubit, `1 <= k <= 2`: a state with zero discord from qubit 1.
pub fn zero_discord_two_qubit<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<DensityMatrix> {
    if !(1..=2).contains(&k) {
        return Err(Error::invalid("zero-discord sampler supports 1..=2 terms"));
    }
    let n = unit_vector(rng);
    let basis = [qubit_projector(n, Outcome::Plus), qubit_projector(n, Outcome::Minus)];
    let parts: Vec<(f64, DensityMatrix)> = weights(rng, k)
        .into_iter()
        .zip(&basis)
        .map(|(p, phi)| (p, phi.as_state().tensor(&qubit_state(rng)).expect("2x2 factors")))
        .collect();
    DensityMatrix::mixture(&parts)
}
