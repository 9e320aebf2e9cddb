//! Weak values under (possibly mixed) pre- and post-selection, and their
//! relation to pseudo-probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{expectation, hermitian_eigen, ComplexMatrix, DensityMatrix, Projector, C64, SPECTRAL_TOL};
use crate::pseudo::unit_pp;

/// Post-selection overlaps at or below this are treated as impossible.
pub const MIN_OVERLAP: f64 = 1e-12;

/// A complex number on the wire: `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ReIm {
    fn from(z: C64) -> Self {
        ReIm { re: z.re, im: z.im }
    }
}

impl From<ReIm> for C64 {
    fn from(z: ReIm) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakValueReport {
    pub value: ReIm,
    pub operator: String,
    pub pre_state: DensityMatrix,
    pub post_state: DensityMatrix,
    /// Smallest and largest eigenvalue of the operator.
    pub spectrum_bounds: (f64, f64),
    pub anomalous: bool,
    /// `Tr(post * pre)`.
    pub overlap: f64,
}

fn check_dims(a: &ComplexMatrix, pre: &DensityMatrix, post: &DensityMatrix) -> Result<()> {
    let d = pre.dim();
    if post.dim() != d || a.rows() != d || a.cols() != d {
        return Err(Error::invalid(format!(
            "dimension mismatch: operator {}x{}, pre {d}, post {}",
            a.rows(),
            a.cols(),
            post.dim()
        )));
    }
    Ok(())
}

fn overlap(pre: &DensityMatrix, post: &DensityMatrix) -> Result<f64> {
    let ov = expectation(pre, post.matrix())?.re;
    if ov <= MIN_OVERLAP {
        return Err(Error::PostSelectionImpossible(ov));
    }
    Ok(ov)
}

/// `Tr(post A pre) / Tr(post pre)` for any square `A`.
pub fn complex_weak_value(a: &ComplexMatrix, pre: &DensityMatrix, post: &DensityMatrix) -> Result<C64> {
    check_dims(a, pre, post)?;
    let ov = overlap(pre, post)?;
    Ok(sandwich(post.matrix(), a, pre.matrix()) / ov)
}

/// `Tr(x a y)` without forming the full triple product.
fn sandwich(x: &ComplexMatrix, a: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    let ay = a * y;
    let n = x.rows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for k in 0..n {
            acc += x[(r, k)] * ay[(k, r)];
        }
    }
    acc
}

/// Weak value of a Hermitian observable, with its anomaly classification.
pub fn weak_value(a: &ComplexMatrix, pre: &DensityMatrix, post: &DensityMatrix) -> Result<WeakValueReport> {
    check_dims(a, pre, post)?;
    let eig = hermitian_eigen(a)?;
    let ov = overlap(pre, post)?;
    let value = sandwich(post.matrix(), a, pre.matrix()) / ov;
    let (lo, hi) = (eig.min(), eig.max());
    let anomalous = value.im.abs() > SPECTRAL_TOL
        || value.re < lo - SPECTRAL_TOL
        || value.re > hi + SPECTRAL_TOL;
    Ok(WeakValueReport {
        value: value.into(),
        operator: "A".into(),
        pre_state: pre.clone(),
        post_state: post.clone(),
        spectrum_bounds: (lo, hi),
        anomalous,
        overlap: ov,
    })
}

fn ordered_product(factors: &[Projector], dim: usize) -> Result<ComplexMatrix> {
    if let Some(p) = factors.iter().find(|p| p.dim() != dim) {
        return Err(Error::invalid(format!(
            "factor dimension {} does not match state dimension {dim}",
            p.dim()
        )));
    }
    Ok(ComplexMatrix::product(factors.iter().map(|p| p.matrix()))
        .unwrap_or_else(|| ComplexMatrix::identity(dim)))
}

/// `Re[Tr(post pi_1 ... pi_k pre) / Tr(post pre)]`. An empty list is the identity.
pub fn real_weak_product(factors: &[Projector], pre: &DensityMatrix, post: &DensityMatrix) -> Result<f64> {
    let p = ordered_product(factors, pre.dim())?;
    Ok(complex_weak_value(&p, pre, post)?.re)
}

/// Hermitian and anti-Hermitian parts of `P = H - iJ`.
#[derive(Clone, Debug)]
pub struct HjDecomposition {
    pub h: ComplexMatrix,
    pub j: ComplexMatrix,
}

/// `H = (P + P^dagger)/2`, `J = i(P - P^dagger)/2`, so that `P = H - iJ`.
pub fn hj_decompose(p: &ComplexMatrix) -> Result<HjDecomposition> {
    if !p.is_square() {
        return Err(Error::invalid("H - iJ decomposition needs a square matrix"));
    }
    let adj = p.adjoint();
    Ok(HjDecomposition {
        h: (p + &adj).scale_real(0.5),
        j: (p - &adj).scale(C64::new(0.0, 0.5)),
    })
}

/// The chain `Re P_w = Re H_w + Im J_w` for an ordered projector product.
#[derive(Clone, Debug, Serialize)]
pub struct WeakDecomposition {
    pub product_weak_value: ReIm,
    pub h_weak_value: ReIm,
    pub j_weak_value: ReIm,
    /// `Re H_w + Im J_w`; equals `product_weak_value.re`.
    pub recombined: f64,
}

pub fn weak_decomposition(factors: &[Projector], pre: &DensityMatrix, post: &DensityMatrix) -> Result<WeakDecomposition> {
    let p = ordered_product(factors, pre.dim())?;
    let HjDecomposition { h, j } = hj_decompose(&p)?;
    let pw = complex_weak_value(&p, pre, post)?;
    let hw = complex_weak_value(&h, pre, post)?;
    let jw = complex_weak_value(&j, pre, post)?;
    Ok(WeakDecomposition {
        product_weak_value: pw.into(),
        h_weak_value: hw.into(),
        j_weak_value: jw.into(),
        recombined: hw.re + jw.im,
    })
}

/// A pseudo-probability written as Born factor times real weak value.
#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    /// `<unit_pp(factors)>`.
    pub pseudo_probability: f64,
    /// `Tr(rho pi_1)`.
    pub born_factor: f64,
    /// Real weak value of `pi_2 ... pi_N`, pre-selected on `rho` and
    /// post-selected on `pi_1 / rank(pi_1)`.
    pub weak_factor: f64,
    pub identity_residual: f64,
}

/// Splits `<unit_pp(pi_1, ..., pi_N)>` into `Tr(rho pi_1)` and a weak value.
pub fn pp_weak_factorization(state: &DensityMatrix, factors: &[Projector]) -> Result<Factorization> {
    let pp = unit_pp(factors)?;
    if pp.dim() != state.dim() {
        return Err(Error::invalid(format!(
            "pseudo-projection dimension {} does not match state dimension {}",
            pp.dim(),
            state.dim()
        )));
    }
    let pseudo_probability = expectation(state, pp.matrix())?.re;
    let first = &factors[0];
    let born = expectation(state, first.matrix())?.re;
    if born <= MIN_OVERLAP {
        return Err(Error::FactorizationUndefined(born));
    }
    let post = first.as_state();
    let rest = ordered_product(&factors[1..], state.dim())?;
    // The quotient's overlap is born/rank, which is positive here.
    let ov = expectation(state, post.matrix())?.re;
    let weak = (sandwich(post.matrix(), &rest, state.matrix()) / ov).re;
    Ok(Factorization {
        pseudo_probability,
        born_factor: born,
        weak_factor: weak,
        identity_residual: (pseudo_probability - born * weak).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bloch_state, pauli_y, pauli_z, qubit_projector, BlochVector, Outcome, UnitVector3};
    use std::f64::consts::PI;

    fn pure(v: [f64; 2]) -> DensityMatrix {
        DensityMatrix::pure(&[C64::new(v[0], 0.0), C64::new(v[1], 0.0)]).unwrap()
    }

    #[test]
    fn ordinary_weak_values() {
        let plus = bloch_state(BlochVector::new(1.0, 0.0, 0.0).unwrap());
        let zero = pure([1.0, 0.0]);
        let r = weak_value(&pauli_z(), &plus, &zero).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-14 && r.value.im.abs() < 1e-14);
        assert!(!r.anomalous);
        let r = weak_value(&pauli_z(), &zero, &zero).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anomalous_weak_value() {
        let plus = bloch_state(BlochVector::new(1.0, 0.0, 0.0).unwrap());
        let t = 3.0 * PI / 8.0;
        let post = pure([t.cos(), -t.sin()]);
        let r = weak_value(&pauli_z(), &plus, &post).unwrap();
        assert!((r.value.re + 1.0 + 2f64.sqrt()).abs() < 1e-12);
        assert!(r.anomalous);
    }

    #[test]
    fn orthogonal_post_selection_is_an_error() {
        let e = weak_value(&pauli_z(), &pure([1.0, 0.0]), &pure([0.0, 1.0])).unwrap_err();
        assert!(matches!(e, Error::PostSelectionImpossible(_)));
        assert!(e.is_numerical());
    }

    #[test]
    fn conditional_probability() {
        let px = qubit_projector(UnitVector3::X, Outcome::Plus);
        let post = bloch_state(BlochVector::new(0.0, 0.0, 1.0).unwrap());
        let v = real_weak_product(&[px], &DensityMatrix::maximally_mixed(2), &post).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hj_of_zx_product() {
        let pz = qubit_projector(UnitVector3::Z, Outcome::Plus);
        let px = qubit_projector(UnitVector3::X, Outcome::Plus);
        let prod = pz.matrix() * px.matrix();
        let HjDecomposition { h, j } = hj_decompose(&prod).unwrap();
        assert!(j.max_abs_diff(&pauli_y().scale_real(-0.25)) < 1e-15);
        assert!(h.is_hermitian(1e-15) && j.is_hermitian(1e-15));
        let back = &h - &j.scale(C64::new(0.0, 1.0));
        assert!(back.max_abs_diff(&prod) < 1e-15);
    }

    #[test]
    fn factorization_of_commuting_pair() {
        let pz = qubit_projector(UnitVector3::Z, Outcome::Plus);
        let rho = bloch_state(BlochVector::new(0.3, 0.1, 0.5).unwrap());
        let f = pp_weak_factorization(&rho, &[pz.clone(), pz]).unwrap();
        assert!(f.identity_residual < 1e-15);
        assert!(f.weak_factor >= 0.0 && f.born_factor >= 0.0);
        let zero = pure([0.0, 1.0]);
        let pz = qubit_projector(UnitVector3::Z, Outcome::Plus);
        let px = qubit_projector(UnitVector3::X, Outcome::Plus);
        assert!(matches!(
            pp_weak_factorization(&zero, &[pz, px]),
            Err(Error::FactorizationUndefined(_))
        ));
    }
}
