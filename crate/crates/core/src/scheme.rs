//! Joint pseudo-probability tables ("schemes") over dichotomic observables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{qubit_projector, Outcome, UnitVector3};
use crate::operator::{
    expectation_real, hermitian_eigen, tensor_all, ComplexMatrix, DensityMatrix, Projector, SPECTRAL_TOL,
};
use crate::pseudo::{build_pp, Prescription};

/// Most observables a scheme may span (2^8 entries).
pub const MAX_OBSERVABLES: usize = 8;

/// Verdict tolerance for negative entries.
pub const NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// `sigma . n` on a qubit.
    Axis(UnitVector3),
    /// Hermitian matrix with spectrum in `{-1, +1}`.
    Matrix(ComplexMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub subsystem: usize,
    pub label: String,
    pub kind: ObservableKind,
}

impl ObservableSpec {
    pub fn axis(subsystem: usize, label: impl Into<String>, n: UnitVector3) -> Self {
        ObservableSpec {
            subsystem,
            label: label.into(),
            kind: ObservableKind::Axis(n),
        }
    }

    /// A general dichotomic observable; its spectrum is checked here.
    pub fn matrix(subsystem: usize, label: impl Into<String>, m: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eigen(&m)?;
        if let Some(bad) = eig.values.iter().find(|v| (v.abs() - 1.0).abs() > SPECTRAL_TOL) {
            return Err(Error::invalid(format!(
                "observable spectrum must lie in {{-1, +1}}, found eigenvalue {bad}"
            )));
        }
        if eig.min() > 0.0 || eig.max() < 0.0 {
            return Err(Error::invalid("observable must have both eigenvalues +1 and -1"));
        }
        Ok(ObservableSpec {
            subsystem,
            label: label.into(),
            kind: ObservableKind::Matrix(m),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ObservableKind::Axis(_) => 2,
            ObservableKind::Matrix(m) => m.rows(),
        }
    }

    /// Eigenprojector `(1 +- A) / 2`.
    pub fn projector(&self, outcome: Outcome) -> Result<Projector> {
        match &self.kind {
            ObservableKind::Axis(n) => Ok(qubit_projector(*n, outcome)),
            ObservableKind::Matrix(m) => {
                let id = ComplexMatrix::identity(m.rows());
                Projector::new((&id + &m.scale_real(outcome.sign())).scale_real(0.5))
            }
        }
    }
}

/// Places `op` on subsystem `s` of a product space, identities elsewhere.
pub fn embed(op: &ComplexMatrix, s: usize, dims: &[usize]) -> Result<ComplexMatrix> {
    if s >= dims.len() || op.rows() != dims[s] {
        return Err(Error::invalid(format!(
            "operator of dimension {} cannot act on subsystem {s} of {dims:?}",
            op.rows()
        )));
    }
    let parts: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == s { op.clone() } else { ComplexMatrix::identity(d) })
        .collect();
    tensor_all(&parts)
}

/// Born probability of one outcome of one observable.
pub fn born_probability(state: &DensityMatrix, dims: &[usize], obs: &ObservableSpec, outcome: Outcome) -> Result<f64> {
    let p = obs.projector(outcome)?;
    expectation_real(state, &embed(p.matrix(), obs.subsystem, dims)?)
}

/// `+` / `-` string for an entry index (observable 0 is the leading symbol).
pub fn outcome_string(index: usize, n: usize) -> String {
    outcomes_of(index, n).iter().map(|o| o.symbol()).collect()
}

pub fn outcomes_of(index: usize, n: usize) -> Vec<Outcome> {
    (0..n)
        .map(|i| {
            if (index >> (n - 1 - i)) & 1 == 0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        })
        .collect()
}

pub fn index_of(outcomes: &[Outcome]) -> usize {
    outcomes
        .iter()
        .fold(0, |acc, o| (acc << 1) | usize::from(*o == Outcome::Minus))
}

fn parse_outcomes(s: &str) -> Result<Vec<Outcome>> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(Outcome::Plus),
            '-' | '\u{2212}' => Ok(Outcome::Minus),
            other => Err(Error::invalid(format!("bad outcome symbol {other:?}"))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    observables: Vec<ObservableSpec>,
    dims: Vec<usize>,
    prescription: Prescription,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SchemeWire {
    observables: Vec<ObservableSpec>,
    dims: Vec<usize>,
    prescription: Prescription,
    entries: BTreeMap<String, f64>,
}

impl Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.observables.len();
        SchemeWire {
            observables: self.observables.clone(),
            dims: self.dims.clone(),
            prescription: self.prescription.clone(),
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(i, &v)| (outcome_string(i, n), v))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = SchemeWire::deserialize(d)?;
        let n = w.observables.len();
        if n == 0 || n > MAX_OBSERVABLES || w.entries.len() != 1 << n {
            return Err(D::Error::custom("scheme entry count does not match observables"));
        }
        let mut entries = vec![f64::NAN; 1 << n];
        for (k, v) in &w.entries {
            let o = parse_outcomes(k).map_err(D::Error::custom)?;
            if o.len() != n {
                return Err(D::Error::custom(format!("outcome {k:?} has wrong length")));
            }
            entries[index_of(&o)] = *v;
        }
        if entries.iter().any(|v| v.is_nan()) {
            return Err(D::Error::custom("duplicate or missing scheme entries"));
        }
        Ok(Scheme {
            observables: w.observables,
            dims: w.dims,
            prescription: w.prescription,
            entries,
        })
    }
}

impl Scheme {
    pub fn observables(&self) -> &[ObservableSpec] {
        &self.observables
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn prescription(&self) -> &Prescription {
        &self.prescription
    }

    /// Entries indexed by outcome bits (`+` = 0, observable 0 most significant).
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn entry(&self, outcomes: &[Outcome]) -> Result<f64> {
        if outcomes.len() != self.len() {
            return Err(Error::invalid("outcome tuple length does not match the scheme"));
        }
        Ok(self.entries[index_of(outcomes)])
    }

    /// Entry by `+`/`-` string, e.g. `"+-"`.
    pub fn get(&self, key: &str) -> Result<f64> {
        self.entry(&parse_outcomes(key)?)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Checks normalization and that every single-observable marginal
    /// equals its Born probability.
    pub fn check_invariants(&self, state: &DensityMatrix) -> Result<()> {
        let total = self.total();
        if (total - 1.0).abs() > SPECTRAL_TOL {
            return Err(Error::Invariant {
                invariant: "normalization",
                detail: format!("entries sum to {total}"),
            });
        }
        for (i, obs) in self.observables.iter().enumerate() {
            let plus = self.single_marginal(i)?;
            let born = born_probability(state, &self.dims, obs, Outcome::Plus)?;
            if !(-1e-12..=1.0 + 1e-12).contains(&plus) || (plus - born).abs() > SPECTRAL_TOL {
                return Err(Error::Invariant {
                    invariant: "marginal equals Born probability",
                    detail: format!("observable {i}: marginal {plus}, Born {born}"),
                });
            }
        }
        Ok(())
    }

    /// Marginal probability of outcome `+` for observable `i`.
    pub fn single_marginal(&self, i: usize) -> Result<f64> {
        let n = self.len();
        if i >= n {
            return Err(Error::invalid(format!("observable index {i} out of range")));
        }
        Ok(self
            .entries
            .iter()
            .enumerate()
            .filter(|(k, _)| (k >> (n - 1 - i)) & 1 == 0)
            .map(|(_, v)| v)
            .sum())
    }
}

/// Tabulates `<PP>` for every joint outcome of `observables`.
///
/// Projectors of observables on the same subsystem are combined into one
/// pseudo-projection (in list order, under `prescription`); the per-subsystem
/// operators are then tensored.
pub fn build_scheme(
    state: &DensityMatrix,
    dims: &[usize],
    observables: &[ObservableSpec],
    prescription: &Prescription,
) -> Result<Scheme> {
    let n = observables.len();
    if n == 0 || n > MAX_OBSERVABLES {
        return Err(Error::invalid(format!(
            "a scheme needs 1..={MAX_OBSERVABLES} observables, got {n}"
        )));
    }
    if dims.is_empty() || dims.iter().product::<usize>() != state.dim() {
        return Err(Error::invalid(format!(
            "subsystem dimensions {dims:?} do not match state dimension {}",
            state.dim()
        )));
    }
    for (i, obs) in observables.iter().enumerate() {
        if obs.subsystem >= dims.len() {
            return Err(Error::invalid(format!(
                "observable {i} refers to subsystem {} but the state has {}",
                obs.subsystem,
                dims.len()
            )));
        }
        if obs.dim() != dims[obs.subsystem] {
            return Err(Error::invalid(format!(
                "observable {i} has dimension {} but subsystem {} has {}",
                obs.dim(),
                obs.subsystem,
                dims[obs.subsystem]
            )));
        }
    }
    let projectors: Vec<[Projector; 2]> = observables
        .iter()
        .map(|o| Ok([o.projector(Outcome::Plus)?, o.projector(Outcome::Minus)?]))
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(1 << n);
    for index in 0..1usize << n {
        let outcomes = outcomes_of(index, n);
        let mut parts = Vec::with_capacity(dims.len());
        for (s, &d) in dims.iter().enumerate() {
            let factors: Vec<Projector> = observables
                .iter()
                .enumerate()
                .filter(|(_, o)| o.subsystem == s)
                .map(|(i, _)| projectors[i][usize::from(outcomes[i] == Outcome::Minus)].clone())
                .collect();
            parts.push(if factors.is_empty() {
                ComplexMatrix::identity(d)
            } else {
                build_pp(&factors, prescription)?.matrix().clone()
            });
        }
        entries.push(expectation_real(state, &tensor_all(&parts)?)?);
    }
    Ok(Scheme {
        observables: observables.to_vec(),
        dims: dims.to_vec(),
        prescription: prescription.clone(),
        entries,
    })
}

/// Sums out observable `drop_index`.
pub fn marginalize(s: &Scheme, drop_index: usize) -> Result<Scheme> {
    let n = s.len();
    if n < 2 {
        return Err(Error::invalid("cannot marginalize a single-observable scheme"));
    }
    if drop_index >= n {
        return Err(Error::invalid(format!(
            "observable index {drop_index} out of range for {n} observables"
        )));
    }
    let mut entries = vec![0.0; 1 << (n - 1)];
    for (k, v) in s.entries.iter().enumerate() {
        let low = k & ((1 << (n - 1 - drop_index)) - 1);
        let high = k >> (n - drop_index);
        entries[(high << (n - 1 - drop_index)) | low] += v;
    }
    let mut observables = s.observables.clone();
    observables.remove(drop_index);
    Ok(Scheme {
        observables,
        dims: s.dims.clone(),
        prescription: s.prescription.clone(),
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativityReport {
    /// Entries below `-tolerance`, keyed by outcome string.
    pub negative_entries: Vec<(String, f64)>,
    pub min_entry: f64,
    pub min_outcome: String,
    pub tolerance: f64,
    pub nonclassical: bool,
}

pub fn negativity_report(s: &Scheme) -> NegativityReport {
    negativity_report_with_tol(s, NEGATIVITY_TOL)
}

pub fn negativity_report_with_tol(s: &Scheme, tolerance: f64) -> NegativityReport {
    let n = s.len();
    let (imin, &min_entry) = s
        .entries
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("schemes are non-empty");
    let negative_entries: Vec<(String, f64)> = s
        .entries
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < -tolerance)
        .map(|(k, &v)| (outcome_string(k, n), v))
        .collect();
    NegativityReport {
        nonclassical: !negative_entries.is_empty(),
        negative_entries,
        min_entry,
        min_outcome: outcome_string(imin, n),
        tolerance,
    }
}

/// One term of an equality pattern: observable `index`, optionally negated
/// (so `A = B-bar` is `[(a, false), (b, true)]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub index: usize,
    pub negated: bool,
}

impl Literal {
    pub fn plain(index: usize) -> Self {
        Literal { index, negated: false }
    }

    pub fn negated(index: usize) -> Self {
        Literal { index, negated: true }
    }
}

/// `P(L_1 = L_2 = ... )`: total weight of outcomes where all literals take
/// a common value; observables not mentioned are summed over.
pub fn equality_sum(s: &Scheme, pattern: &[Literal]) -> Result<f64> {
    let n = s.len();
    if pattern.is_empty() {
        return Err(Error::invalid("empty equality pattern"));
    }
    let mut seen = vec![false; n];
    for l in pattern {
        if l.index >= n {
            return Err(Error::invalid(format!("pattern refers to observable {}", l.index)));
        }
        if std::mem::replace(&mut seen[l.index], true) {
            return Err(Error::invalid(format!("observable {} repeated in pattern", l.index)));
        }
    }
    let holds = |k: usize, common: Outcome| {
        pattern.iter().all(|l| {
            let bit = (k >> (n - 1 - l.index)) & 1 == 1;
            let o = if bit { Outcome::Minus } else { Outcome::Plus };
            let want = if l.negated { common.flip() } else { common };
            o == want
        })
    };
    Ok(s
        .entries
        .iter()
        .enumerate()
        .filter(|(k, _)| holds(*k, Outcome::Plus) || holds(*k, Outcome::Minus))
        .map(|(_, v)| v)
        .sum())
}
