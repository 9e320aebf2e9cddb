//! Pseudo-projections: Hermitian operators standing in for indicator
//! functions of joint events over non-commuting observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{anticommutator, hermitian_eigen, ComplexMatrix, Projector, C64, STRUCTURAL_TOL};

/// How the orderings of a projector product are combined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prescription {
    /// One ordering, the given one.
    Unit,
    /// Equal-weight average over all distinct orderings.
    Symmetrized,
    /// Weighted average over the canonical orderings, in the order returned
    /// by [`canonical_orderings`].
    Convex(Vec<f64>),
}

impl Prescription {
    pub fn label(&self) -> &'static str {
        match self {
            Prescription::Unit => "unit",
            Prescription::Symmetrized => "symmetrized",
            Prescription::Convex(_) => "convex",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PseudoProjection {
    matrix: ComplexMatrix,
    factors: Vec<Projector>,
    prescription: Prescription,
}

impl PseudoProjection {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn factors(&self) -> &[Projector] {
        &self.factors
    }

    pub fn prescription(&self) -> &Prescription {
        &self.prescription
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// True when every pair of factors commutes (elementwise within 1e-12).
    pub fn factors_commute(&self) -> bool {
        self.factors
            .iter()
            .enumerate()
            .all(|(i, p)| self.factors[i + 1..].iter().all(|q| p.commutes_with(q)))
    }

    /// A single projector viewed as a (trivial) pseudo-projection.
    pub fn from_projector(p: &Projector) -> Self {
        PseudoProjection {
            matrix: p.matrix().clone(),
            factors: vec![p.clone()],
            prescription: Prescription::Unit,
        }
    }
}

fn check_factors(factors: &[Projector]) -> Result<usize> {
    if factors.len() < 2 {
        return Err(Error::invalid(format!(
            "a pseudo-projection needs at least 2 factors, got {}",
            factors.len()
        )));
    }
    let dim = factors[0].dim();
    if let Some(p) = factors.iter().find(|p| p.dim() != dim) {
        return Err(Error::invalid(format!(
            "factor dimensions differ: {dim} vs {}",
            p.dim()
        )));
    }
    Ok(dim)
}

/// `(pi_1 ... pi_N + h.c.) / 2` for the ordering given.
fn ordered_hermitian_product(factors: &[Projector], order: &[usize]) -> ComplexMatrix {
    let p = ComplexMatrix::product(order.iter().map(|&i| factors[i].matrix()))
        .expect("non-empty ordering");
    p.hermitian_part()
}

/// `(pi_1 pi_2 ... pi_N + h.c.) / 2`, factor order preserved.
pub fn unit_pp(factors: &[Projector]) -> Result<PseudoProjection> {
    check_factors(factors)?;
    let order: Vec<usize> = (0..factors.len()).collect();
    Ok(PseudoProjection {
        matrix: ordered_hermitian_product(factors, &order),
        factors: factors.to_vec(),
        prescription: Prescription::Unit,
    })
}

/// Permutations of `0..n` with one representative per reversal pair: those
/// whose first index is smaller than their last. Lexicographic order.
pub fn canonical_orderings(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            if n < 2 || cur[0] < cur[n - 1] {
                out.push(cur.clone());
            }
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Equal-weight average of unit pseudo-projections over the `N!/2`
/// distinct orderings (an ordering and its reverse give the same operator).
pub fn symmetrized_pp(factors: &[Projector]) -> Result<PseudoProjection> {
    check_factors(factors)?;
    let orders = canonical_orderings(factors.len());
    let w = 1.0 / orders.len() as f64;
    let weights = vec![w; orders.len()];
    Ok(PseudoProjection {
        matrix: weighted_sum(factors, &orders, &weights),
        factors: factors.to_vec(),
        prescription: Prescription::Symmetrized,
    })
}

/// Convex combination over the canonical orderings with explicit weights.
/// An empty weight list means equal weights.
pub fn convex_pp(factors: &[Projector], weights: &[f64]) -> Result<PseudoProjection> {
    check_factors(factors)?;
    let orders = canonical_orderings(factors.len());
    let weights: Vec<f64> = if weights.is_empty() {
        vec![1.0 / orders.len() as f64; orders.len()]
    } else {
        weights.to_vec()
    };
    if weights.len() != orders.len() {
        return Err(Error::invalid(format!(
            "{} factors have {} canonical orderings, got {} weights",
            factors.len(),
            orders.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("convex weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("convex weights sum to {total}, expected 1")));
    }
    Ok(PseudoProjection {
        matrix: weighted_sum(factors, &orders, &weights),
        factors: factors.to_vec(),
        prescription: Prescription::Convex(weights),
    })
}

fn weighted_sum(factors: &[Projector], orders: &[Vec<usize>], weights: &[f64]) -> ComplexMatrix {
    let dim = factors[0].dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (order, &w) in orders.iter().zip(weights) {
        if w != 0.0 {
            acc = &acc + &ordered_hermitian_product(factors, order).scale_real(w);
        }
    }
    acc
}

/// Builds the pseudo-projection for `factors` under `prescription`.
/// A single factor is returned as itself.
pub fn build_pp(factors: &[Projector], prescription: &Prescription) -> Result<PseudoProjection> {
    if factors.len() == 1 {
        return Ok(PseudoProjection::from_projector(&factors[0]));
    }
    match prescription {
        Prescription::Unit => unit_pp(factors),
        Prescription::Symmetrized => symmetrized_pp(factors),
        Prescription::Convex(w) => convex_pp(factors, w),
    }
}

/// Representative of the union of two events, `pi_a + pi_b - {pi_a, pi_b} / 2`.
pub fn disjunction_pp(pa: &Projector, pb: &Projector) -> Result<PseudoProjection> {
    let sum = pa.matrix() + pb.matrix();
    let ac = anticommutator(pa.matrix(), pb.matrix())?;
    Ok(PseudoProjection {
        matrix: &sum - &ac.scale_real(0.5),
        factors: vec![pa.clone(), pb.clone()],
        prescription: Prescription::Unit,
    })
}

/// Smallest eigenvalue of a pseudo-projection and a unit eigenvector for it.
#[derive(Clone, Debug, Serialize)]
pub struct EigenCertificate {
    pub min_eigenvalue: f64,
    #[serde(serialize_with = "serialize_vector")]
    pub witness: Vec<C64>,
    /// `<w|Pi|w>` recomputed from the witness.
    pub witness_expectation: f64,
}

fn serialize_vector<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("vector", 2)?;
    st.serialize_field("re", &v.iter().map(|z| z.re).collect::<Vec<_>>())?;
    st.serialize_field("im", &v.iter().map(|z| z.im).collect::<Vec<_>>())?;
    st.end()
}

pub fn min_eigen_certificate(pp: &PseudoProjection) -> Result<EigenCertificate> {
    let eig = hermitian_eigen(pp.matrix())?;
    let witness = eig.vector(0);
    let pw = pp.matrix().mul_vec(&witness);
    let witness_expectation = witness
        .iter()
        .zip(&pw)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .re;
    Ok(EigenCertificate {
        min_eigenvalue: eig.min(),
        witness,
        witness_expectation,
    })
}

/// Checks the structural invariants: Hermitian, and idempotent when the
/// factors commute.
pub fn validate(pp: &PseudoProjection) -> Result<()> {
    let h = pp.matrix().hermiticity_error();
    if h > STRUCTURAL_TOL {
        return Err(Error::Invariant {
            invariant: "Hermitian",
            detail: format!("max |Pi - Pi^dagger| = {h:e}"),
        });
    }
    if pp.factors_commute() {
        let m = pp.matrix();
        let e = (m * m).max_abs_diff(m);
        if e > 1e-10 {
            return Err(Error::Invariant {
                invariant: "idempotent for commuting factors",
                detail: format!("max |Pi^2 - Pi| = {e:e}"),
            });
        }
    }
    Ok(())
}
