//! Nonclassicality tests built from pseudo-probabilities.
//!
//! Every test assembles a list of labelled pseudo-probabilities (and Born
//! probabilities where a test needs them), combines them with an explicit
//! polynomial rule into a statistic, and compares that against a threshold.
//! Each pseudo-probability that comes from a unit pseudo-projection is also
//! written as a Born factor times a real weak value, so the statistic can be
//! rebuilt from weak measurements alone.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    make_doublet, mub_partner, qubit_projector, AzimuthRule, BlochVector, Doublet, EntanglementGeometry, Outcome,
    UnitVector3, Vec3,
};
use crate::operator::{expectation_real, tensor_product, ComplexMatrix, DensityMatrix, Projector};
use crate::pseudo::{canonical_orderings, symmetrized_pp, unit_pp, PseudoProjection};
use crate::scheme::ObservableSpec;
use crate::weak::pp_weak_factorization;

/// Default margin for verdicts: a statistic must clear its threshold by this much.
pub const VERDICT_TOL: f64 = 1e-10;

/// Agreement required between a statistic and its recomputations.
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// Expectation of a pseudo-projection.
    PseudoProbability,
    /// Ordinary single-observable probability.
    Born,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    pub value: f64,
    pub kind: EntryKind,
}

/// `coef * prod(values[i] for i in factors)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub factors: Vec<usize>,
}

/// How a statistic is formed from the entry values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    Polynomial(Vec<Term>),
    /// Largest of several polynomials.
    Max(Vec<Vec<Term>>),
}

fn eval_poly(terms: &[Term], values: &[f64]) -> Option<f64> {
    terms.iter().try_fold(0.0, |acc, t| {
        let prod = t
            .factors
            .iter()
            .try_fold(1.0, |p, &i| values.get(i).map(|v| p * v))?;
        Some(acc + t.coef * prod)
    })
}

impl Combination {
    pub fn evaluate(&self, values: &[f64]) -> Option<f64> {
        match self {
            Combination::Polynomial(t) => eval_poly(t, values),
            Combination::Max(polys) => polys
                .iter()
                .map(|p| eval_poly(p, values))
                .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRule {
    /// Nonclassical iff `statistic < threshold - tolerance`.
    Below,
    /// Nonclassical iff `|statistic - threshold| > tolerance`.
    NonZero,
}

impl VerdictRule {
    pub fn apply(self, statistic: f64, threshold: f64, tolerance: f64) -> bool {
        match self {
            VerdictRule::Below => statistic < threshold - tolerance,
            VerdictRule::NonZero => (statistic - threshold).abs() > tolerance,
        }
    }
}

/// One pseudo-probability written as `born_factor * weak_value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakTerm {
    pub label: String,
    /// Index into `pseudo_probabilities`.
    pub entry: usize,
    /// Probability of the post-selection projector in the state.
    pub born_factor: f64,
    /// `None` when the post-selection has vanishing probability; the entry
    /// is then zero to within the square root of the Born factor.
    pub weak_value: Option<f64>,
    /// Label of the projector used for post-selection.
    pub post_selection: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub state_digest: Option<String>,
    pub state_dim: Option<usize>,
    pub alpha: Option<f64>,
    pub variant: Option<String>,
    pub directions: BTreeMap<String, Vec3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub inputs: InputEcho,
    pub pseudo_probabilities: Vec<Entry>,
    pub combination: Combination,
    pub weak_terms: Vec<WeakTerm>,
    /// The statistic rebuilt from `born_factor * weak_value`; `None` when
    /// some weak value is undefined.
    pub weak_statistic: Option<f64>,
    pub statistic: f64,
    pub threshold: f64,
    pub tolerance: f64,
    pub verdict_rule: VerdictRule,
    pub verdict: bool,
    /// Independent evaluation of the statistic in terms of Pauli expectations.
    pub closed_form: Option<f64>,
    pub alpha_valid_range: Option<(f64, f64)>,
    pub alpha_out_of_range: bool,
    pub extras: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl TestReport {
    fn values(&self) -> Vec<f64> {
        self.pseudo_probabilities.iter().map(|e| e.value).collect()
    }

    /// The statistic recomputed from the serialized entries.
    pub fn recompute_statistic(&self) -> Option<f64> {
        self.combination.evaluate(&self.values())
    }

    /// The statistic recomputed with every weak-decomposed entry replaced by
    /// `born_factor * weak_value`.
    pub fn recompute_weak_statistic(&self) -> Option<f64> {
        let mut values = self.values();
        for t in &self.weak_terms {
            *values.get_mut(t.entry)? = t.born_factor * t.weak_value?;
        }
        self.combination.evaluate(&values)
    }

    /// Re-evaluates the verdict under a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.verdict = self.verdict_rule.apply(self.statistic, self.threshold, tolerance);
        self
    }

    /// Checks that the report agrees with itself: statistic, weak statistic,
    /// closed form and verdict.
    pub fn self_check(&self) -> Result<()> {
        let fail = |what: &str, detail: String| {
            Err(Error::Invariant {
                invariant: "report self-consistency",
                detail: format!("{what}: {detail}"),
            })
        };
        match self.recompute_statistic() {
            Some(s) if (s - self.statistic).abs() <= CONSISTENCY_TOL => {}
            other => return fail("statistic", format!("stored {}, recomputed {other:?}", self.statistic)),
        }
        if let Some(w) = self.weak_statistic {
            if (w - self.statistic).abs() > CONSISTENCY_TOL {
                return fail("weak statistic", format!("{w} vs {}", self.statistic));
            }
        }
        if let Some(c) = self.closed_form {
            if (c - self.statistic).abs() > CONSISTENCY_TOL {
                return fail("closed form", format!("{c} vs {}", self.statistic));
            }
        }
        if self.verdict != self.verdict_rule.apply(self.statistic, self.threshold, self.tolerance) {
            return fail("verdict", "does not follow from the statistic".into());
        }
        Ok(())
    }
}

/// Collects entries and weak decompositions for one report.
struct Builder<'a> {
    state: &'a DensityMatrix,
    entries: Vec<Entry>,
    weak_terms: Vec<WeakTerm>,
    notes: Vec<String>,
}

impl<'a> Builder<'a> {
    fn new(state: &'a DensityMatrix) -> Self {
        Builder {
            state,
            entries: Vec::new(),
            weak_terms: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, label: String, value: f64, kind: EntryKind) -> usize {
        self.entries.push(Entry { label, value, kind });
        self.entries.len() - 1
    }

    /// `<unit_pp(factors)>` with its weak decomposition. The decomposition
    /// post-selects on the first factor; if that has zero probability the
    /// reversed ordering (same operator) is tried.
    fn unit(&mut self, label: impl Into<String>, factors: &[(String, Projector)]) -> Result<usize> {
        let label = label.into();
        let projs: Vec<Projector> = factors.iter().map(|(_, p)| p.clone()).collect();
        let value = expectation_real(self.state, unit_pp(&projs)?.matrix())?;
        let idx = self.push(label.clone(), value, EntryKind::PseudoProbability);
        let mut reversed = projs.clone();
        reversed.reverse();
        let attempts = [(&projs, &factors[0].0), (&reversed, &factors[factors.len() - 1].0)];
        let mut term = None;
        for (fs, post) in attempts {
            match pp_weak_factorization(self.state, fs) {
                Ok(f) => {
                    term = Some(WeakTerm {
                        label: label.clone(),
                        entry: idx,
                        born_factor: f.born_factor,
                        weak_value: Some(f.weak_factor),
                        post_selection: post.clone(),
                    });
                    break;
                }
                Err(Error::FactorizationUndefined(b)) if term.is_none() => {
                    term = Some(WeakTerm {
                        label: label.clone(),
                        entry: idx,
                        born_factor: b,
                        weak_value: None,
                        post_selection: post.clone(),
                    });
                }
                Err(Error::FactorizationUndefined(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let term = term.expect("at least one attempt recorded");
        if term.weak_value.is_none() {
            self.notes.push(format!(
                "{label}: both end projectors have zero probability; weak value undefined"
            ));
        }
        self.weak_terms.push(term);
        Ok(idx)
    }

    fn born(&mut self, label: impl Into<String>, p: &Projector) -> Result<usize> {
        let v = expectation_real(self.state, p.matrix())?;
        Ok(self.push(label.into(), v, EntryKind::Born))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        name: &str,
        inputs: InputEcho,
        combination: Combination,
        rule: VerdictRule,
        closed_form: Option<f64>,
        alpha_range: Option<(f64, f64)>,
        extras: BTreeMap<String, f64>,
    ) -> TestReport {
        let values: Vec<f64> = self.entries.iter().map(|e| e.value).collect();
        let statistic = combination.evaluate(&values).expect("combination indices are in range");
        let alpha_out_of_range = match (alpha_range, inputs.alpha) {
            (Some((lo, hi)), Some(a)) => !(a > lo && a <= hi + 1e-12),
            _ => false,
        };
        let mut notes = self.notes;
        if alpha_out_of_range {
            notes.push("alpha outside the range where separable states are guaranteed to pass".into());
        }
        let mut report = TestReport {
            name: name.into(),
            inputs,
            pseudo_probabilities: self.entries,
            combination,
            weak_terms: self.weak_terms,
            weak_statistic: None,
            statistic,
            threshold: 0.0,
            tolerance: VERDICT_TOL,
            verdict_rule: rule,
            verdict: rule.apply(statistic, 0.0, VERDICT_TOL),
            closed_form,
            alpha_valid_range: alpha_range,
            alpha_out_of_range,
            extras,
            notes,
        };
        report.weak_statistic = report.recompute_weak_statistic();
        report
    }
}

fn sum_of(indices: &[usize]) -> Vec<Term> {
    indices.iter().map(|&i| Term { coef: 1.0, factors: vec![i] }).collect()
}

fn term(coef: f64, factors: &[usize]) -> Term {
    Term { coef, factors: factors.to_vec() }
}

fn require_qubit(state: &DensityMatrix) -> Result<()> {
    if state.dim() != 2 {
        return Err(Error::invalid(format!("expected a qubit state, got dimension {}", state.dim())));
    }
    Ok(())
}

fn require_two_qubit(state: &DensityMatrix) -> Result<()> {
    if state.dim() != 4 {
        return Err(Error::invalid(format!("expected a two-qubit state, got dimension {}", state.dim())));
    }
    Ok(())
}

fn echo(state: Option<&DensityMatrix>, alpha: Option<f64>, dirs: &[(&str, UnitVector3)]) -> InputEcho {
    InputEcho {
        state_digest: state.map(|s| s.digest()),
        state_dim: state.map(|s| s.dim()),
        alpha,
        variant: None,
        directions: dirs.iter().map(|(k, v)| (k.to_string(), v.to_array())).collect(),
    }
}

fn bloch(state: &DensityMatrix) -> Vec3 {
    BlochVector::of_state(state).map(|b| b.to_array()).unwrap_or([0.0; 3])
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn named(label: &str, p: Projector) -> (String, Projector) {
    (label.to_string(), p)
}

fn p1(n: UnitVector3, o: Outcome) -> Projector {
    qubit_projector(n, o)
}

/// `pi (x) 1` on two qubits.
fn on_first(p: &Projector) -> Projector {
    p.tensor(&Projector::identity(2)).expect("2x2 factors")
}

/// `1 (x) pi` on two qubits.
fn on_second(p: &Projector) -> Projector {
    Projector::identity(2).tensor(p).expect("2x2 factors")
}

fn both(a: &Projector, b: &Projector) -> Projector {
    a.tensor(b).expect("compatible factors")
}

fn sym(o: Outcome) -> &'static str {
    match o {
        Outcome::Plus => "",
        Outcome::Minus => "~",
    }
}

// ---------------------------------------------------------------------------
// single qubit

/// `<unit_pp(pi_a1, pi_a2)>`: negative only if the state has coherence in a
/// basis where `a1 + a2` lies off the equatorial plane.
pub fn coherence_test(state: &DensityMatrix, a1: UnitVector3, a2: UnitVector3) -> Result<TestReport> {
    require_qubit(state)?;
    let mut b = Builder::new(state);
    let e = b.unit(
        "P(a1 a2)",
        &[named("a1", p1(a1, Outcome::Plus)), named("a2", p1(a2, Outcome::Plus))],
    )?;
    let p = bloch(state);
    let s = [a1.to_array(), a2.to_array()];
    let closed = 0.25 * (1.0 + a1.dot(a2) + dot3(p, [s[0][0] + s[1][0], s[0][1] + s[1][1], s[0][2] + s[1][2]]));
    let m = state.matrix();
    let mut extras = BTreeMap::new();
    extras.insert("coherence_l1".into(), 2.0 * m[(0, 1)].norm());
    Ok(b.finish(
        "coherence",
        echo(Some(state), None, &[("a1", a1), ("a2", a2)]),
        Combination::Polynomial(sum_of(&[e])),
        VerdictRule::Below,
        Some(closed),
        None,
        extras,
    ))
}

/// Pseudo-probability of the absurd event `a1 AND a2 AND NOT a1`.
pub fn boolean_state_dep_test(state: &DensityMatrix, a1: UnitVector3, a2: UnitVector3) -> Result<TestReport> {
    require_qubit(state)?;
    let mut b = Builder::new(state);
    let e = b.unit(
        "P(a1 a2 ~a1)",
        &[
            named("a1", p1(a1, Outcome::Plus)),
            named("a2", p1(a2, Outcome::Plus)),
            named("~a1", p1(a1, Outcome::Minus)),
        ],
    )?;
    let p = bloch(state);
    let c = a1.dot(a2);
    let (u1, u2) = (a1.to_array(), a2.to_array());
    let perp = [u2[0] - c * u1[0], u2[1] - c * u1[1], u2[2] - c * u1[2]];
    // pi_a1 pi_a2 pi_~a1 = (1/4) (sigma.perp)-type off-diagonal block; the
    // Hermitian part is sigma.perp / 4.
    let closed = 0.25 * dot3(p, perp);
    let mut extras = BTreeMap::new();
    extras.insert("eighth_prefactor_form".into(), 0.125 * dot3(p, perp));
    let mut report = b.finish(
        "boolean-dep",
        echo(Some(state), None, &[("a1", a1), ("a2", a2)]),
        Combination::Polynomial(sum_of(&[e])),
        VerdictRule::NonZero,
        Some(closed),
        None,
        extras,
    );
    report.notes.push(
        "the operator equals sigma.(a2 - a1 (a1.a2)) / 4; a one-eighth prefactor form is kept in extras for comparison"
            .into(),
    );
    Ok(report)
}

/// The four projectors of `a1 AND a2 AND NOT a1 AND NOT a2`, in that order.
pub fn absurd_four_factors(a1: UnitVector3, a2: UnitVector3) -> [Projector; 4] {
    [
        p1(a1, Outcome::Plus),
        p1(a2, Outcome::Plus),
        p1(a1, Outcome::Minus),
        p1(a2, Outcome::Minus),
    ]
}

/// Symmetrized pseudo-projection of the four-fold absurd event. It is a
/// multiple of the identity: `-(1 - (a1.a2)^2) / 24`.
pub fn absurd_four_pp(a1: UnitVector3, a2: UnitVector3) -> Result<PseudoProjection> {
    symmetrized_pp(&absurd_four_factors(a1, a2))
}

/// `-(1 - (a1.a2)^2) / 24`.
pub fn absurd_four_closed_form(a1: UnitVector3, a2: UnitVector3) -> f64 {
    -(1.0 - a1.dot(a2).powi(2)) / 24.0
}

/// `((a1.a2)^2 - 1/3) / 8`, an alternative closed form that agrees with the
/// operator only for orthogonal directions.
pub fn absurd_four_eighth_form(a1: UnitVector3, a2: UnitVector3) -> f64 {
    (a1.dot(a2).powi(2) - 1.0 / 3.0) / 8.0
}

/// State-independent Boolean-logic test. The statistic is evaluated on
/// three fixed states (`1/2`, `|0>`, `|+>`); all three coincide.
pub fn boolean_state_indep_test(a1: UnitVector3, a2: UnitVector3) -> Result<TestReport> {
    let pp = absurd_four_pp(a1, a2)?;
    let states = [
        ("1/2", BlochVector::ORIGIN),
        ("z+", BlochVector::new(0.0, 0.0, 1.0)?),
        ("x+", BlochVector::new(1.0, 0.0, 0.0)?),
    ];
    let mixed = DensityMatrix::maximally_mixed(2);
    let mut b = Builder::new(&mixed);
    let mut idx = Vec::new();
    let mut values = Vec::new();
    for (name, p) in states {
        let rho = crate::geometry::bloch_state(p);
        let v = expectation_real(&rho, pp.matrix())?;
        values.push(v);
        idx.push(b.push(format!("P(a1 a2 ~a1 ~a2) in {name}"), v, EntryKind::PseudoProbability));
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);

    // The single ordering a1 a2 ~a1 ~a2 is not state-independent; record by how much.
    let fs = absurd_four_factors(a1, a2);
    let single = unit_pp(&fs)?;
    let single_vals: Vec<f64> = states
        .iter()
        .map(|(_, p)| expectation_real(&crate::geometry::bloch_state(*p), single.matrix()))
        .collect::<Result<_>>()?;
    let single_spread = single_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - single_vals.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut extras = BTreeMap::new();
    extras.insert("state_spread".into(), spread);
    extras.insert("eighth_prefactor_form".into(), absurd_four_eighth_form(a1, a2));
    extras.insert("single_ordering_state_spread".into(), single_spread);
    extras.insert("orderings".into(), canonical_orderings(4).len() as f64);
    let mut report = b.finish(
        "boolean-indep",
        echo(None, None, &[("a1", a1), ("a2", a2)]),
        Combination::Polynomial(sum_of(&[idx[0]])),
        VerdictRule::NonZero,
        Some(absurd_four_closed_form(a1, a2)),
        None,
        extras,
    );
    report.notes.push(
        "symmetrized over all 12 distinct orderings; the single ordering a1 a2 ~a1 ~a2 depends on the state".into(),
    );
    Ok(report)
}

/// Gap between `a1 AND (a2 OR a3)` and `(a1 AND a2) OR (a1 AND a3)`:
/// `<Pi_{a1a2a1a3}> - <{pi_a1, Pi_{a2a3}}> / 2`.
pub fn distributivity_test(state: &DensityMatrix, a1: UnitVector3, a2: UnitVector3, a3: UnitVector3) -> Result<TestReport> {
    require_qubit(state)?;
    let (q1, q2, q3) = (
        named("a1", p1(a1, Outcome::Plus)),
        named("a2", p1(a2, Outcome::Plus)),
        named("a3", p1(a3, Outcome::Plus)),
    );
    let mut b = Builder::new(state);
    let first = b.unit(
        "P(a1 a2 a1 a3)",
        &[q2.clone(), q1.clone(), q1.clone(), q3.clone()],
    )?;
    let u123 = b.unit("P(a1 a2 a3)", &[q1.clone(), q2.clone(), q3.clone()])?;
    let u132 = b.unit("P(a1 a3 a2)", &[q1, q3, q2])?;
    let comb = Combination::Polynomial(vec![
        term(1.0, &[first]),
        term(-0.5, &[u123]),
        term(-0.5, &[u132]),
    ]);
    // Direct operator evaluation of the anticommutator term.
    let pa1 = p1(a1, Outcome::Plus);
    let pair = unit_pp(&[p1(a2, Outcome::Plus), p1(a3, Outcome::Plus)])?;
    let ac = crate::operator::anticommutator(pa1.matrix(), pair.matrix())?.scale_real(0.5);
    let second = expectation_real(state, &ac)?;
    let mut extras = BTreeMap::new();
    extras.insert("first_term".into(), b.entries[first].value);
    extras.insert("second_term".into(), second);
    let closed = b.entries[first].value - second;
    Ok(b.finish(
        "distributivity",
        echo(Some(state), None, &[("a1", a1), ("a2", a2), ("a3", a3)]),
        comb,
        VerdictRule::NonZero,
        Some(closed),
        None,
        extras,
    ))
}

// ---------------------------------------------------------------------------
// bipartite

fn obs_projectors(o: &ObservableSpec) -> Result<[Projector; 2]> {
    Ok([o.projector(Outcome::Plus)?, o.projector(Outcome::Minus)?])
}

fn idx(o: Outcome) -> usize {
    usize::from(o == Outcome::Minus)
}

/// CHSH through `P_NL = P(A1 = B1 = B2) + P(A2 = B1 = ~B2)`, which equals
/// `(2 + <A1(B1 + B2) + A2(B1 - B2)>) / 4`.
pub fn chsh_test(
    state: &DensityMatrix,
    a1: &ObservableSpec,
    a2: &ObservableSpec,
    b1: &ObservableSpec,
    b2: &ObservableSpec,
) -> Result<TestReport> {
    if a1.subsystem != 0 || a2.subsystem != 0 || b1.subsystem != 1 || b2.subsystem != 1 {
        return Err(Error::invalid("A observables must act on subsystem 0 and B observables on subsystem 1"));
    }
    let (da, db) = (a1.dim(), b1.dim());
    if a2.dim() != da || b2.dim() != db || da * db != state.dim() {
        return Err(Error::invalid(format!(
            "observable dimensions {da}x{db} do not match state dimension {}",
            state.dim()
        )));
    }
    let (pa1, pa2, pb1, pb2) = (obs_projectors(a1)?, obs_projectors(a2)?, obs_projectors(b1)?, obs_projectors(b2)?);
    let id_a = Projector::identity(da);
    let mut b = Builder::new(state);
    let mut entries = Vec::new();
    // (A, sA, sB1, sB2)
    let specs = [
        (&pa1, "A1", Outcome::Plus, Outcome::Plus, Outcome::Plus),
        (&pa1, "A1", Outcome::Minus, Outcome::Minus, Outcome::Minus),
        (&pa2, "A2", Outcome::Plus, Outcome::Plus, Outcome::Minus),
        (&pa2, "A2", Outcome::Minus, Outcome::Minus, Outcome::Plus),
    ];
    for (pa, name, sa, s1, s2) in specs {
        let lab_a = format!("{}{name}", sym(sa));
        let lab_b1 = format!("{}B1", sym(s1));
        let lab_b2 = format!("{}B2", sym(s2));
        let first = both(&pa[idx(sa)], &pb1[idx(s1)]);
        let second = id_a.tensor(&pb2[idx(s2)])?;
        entries.push(b.unit(
            format!("P({lab_a} {lab_b1} {lab_b2})"),
            &[(format!("{lab_a} {lab_b1}"), first), (lab_b2, second)],
        )?);
    }
    let obs = |o: &ObservableSpec| -> ComplexMatrix {
        match &o.kind {
            crate::scheme::ObservableKind::Axis(n) => crate::geometry::sigma_dot(n.to_array()),
            crate::scheme::ObservableKind::Matrix(m) => m.clone(),
        }
    };
    let (ma1, ma2, mb1, mb2) = (obs(a1), obs(a2), obs(b1), obs(b2));
    let chsh_op = &(&tensor_product(&ma1, &(&mb1 + &mb2))? + &tensor_product(&ma2, &(&mb1 - &mb2))?);
    let chsh = expectation_real(state, chsh_op)?;
    let mut extras = BTreeMap::new();
    extras.insert("chsh_value".into(), chsh);
    let mut inputs = echo(Some(state), None, &[]);
    for (k, o) in [("A1", a1), ("A2", a2), ("B1", b1), ("B2", b2)] {
        if let crate::scheme::ObservableKind::Axis(n) = o.kind {
            inputs.directions.insert(k.into(), n.to_array());
        }
    }
    Ok(b.finish(
        "chsh",
        inputs,
        Combination::Polynomial(sum_of(&entries)),
        VerdictRule::Below,
        Some(0.25 * (2.0 + chsh)),
        None,
        extras,
    ))
}

/// The standard CHSH settings for qubits: `A1 = x`, `A2 = y`,
/// `B1 = (x + y)/sqrt 2`, `B2 = (x - y)/sqrt 2`.
pub fn standard_chsh_observables() -> [ObservableSpec; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        ObservableSpec::axis(0, "A1", UnitVector3::X),
        ObservableSpec::axis(0, "A2", UnitVector3::Y),
        ObservableSpec::axis(1, "B1", UnitVector3::normalize([r, r, 0.0]).expect("non-zero")),
        ObservableSpec::axis(1, "B2", UnitVector3::normalize([r, -r, 0.0]).expect("non-zero")),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearVariant {
    I,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonlinearVariant {
    I,
    II,
    III,
}

impl LinearVariant {
    pub fn axes(self) -> usize {
        match self {
            LinearVariant::I => 2,
            LinearVariant::II => 3,
        }
    }

    /// Angles for which every separable state passes.
    pub fn alpha_range(self) -> (f64, f64) {
        match self {
            LinearVariant::I => (0.0, 2.0 * PI / 3.0),
            LinearVariant::II => (0.0, (-7.0f64 / 9.0).acos()),
        }
    }
}

impl NonlinearVariant {
    pub fn axes(self) -> usize {
        match self {
            NonlinearVariant::I => 2,
            _ => 3,
        }
    }

    pub fn alpha_range(self) -> (f64, f64) {
        match self {
            NonlinearVariant::I => (0.0, PI / 2.0),
            NonlinearVariant::II => (0.0, (-1.0f64 / 3.0).acos()),
            NonlinearVariant::III => (0.0, (-79.0f64 / 81.0).acos()),
        }
    }
}

fn pauli_corr(state: &DensityMatrix, a: UnitVector3, b: UnitVector3) -> Result<f64> {
    let op = tensor_product(
        &crate::geometry::sigma_dot(a.to_array()),
        &crate::geometry::sigma_dot(b.to_array()),
    )?;
    expectation_real(state, &op)
}

fn local_mean(state: &DensityMatrix, n: UnitVector3, second: bool) -> Result<f64> {
    let s = crate::geometry::sigma_dot(n.to_array());
    let id = ComplexMatrix::identity(2);
    let op = if second { tensor_product(&id, &s)? } else { tensor_product(&s, &id)? };
    expectation_real(state, &op)
}

/// `P(a sa, b1 s1, b2 s2)` with `a` on qubit 1 and the doublet on qubit 2,
/// decomposed as `<pi_a pi_b2> <<pi_b1>>`.
fn triple(b: &mut Builder, i: usize, a: UnitVector3, d: &Doublet, sa: Outcome, sb: Outcome) -> Result<usize> {
    let la = format!("{}a{i}", sym(sa));
    let lb1 = format!("{}b{i}_1", sym(sb));
    let lb2 = format!("{}b{i}_2", sym(sb));
    let first = both(&p1(a, sa), &p1(d.n2, sb));
    let second = on_second(&p1(d.n1, sb));
    b.unit(
        format!("P({la} {lb1} {lb2})"),
        &[(format!("{la} {lb2}"), first), (lb1, second)],
    )
}

fn geometry_echo(state: &DensityMatrix, geom: &EntanglementGeometry, k: usize, variant: &str) -> InputEcho {
    let mut dirs = Vec::new();
    let names = ["1", "2", "3"];
    for i in 0..k {
        dirs.push((format!("a{}", names[i]), geom.a_axes[i]));
        dirs.push((format!("b{}", names[i]), geom.b_axes[i]));
        dirs.push((format!("b{}_1", names[i]), geom.b_doublets[i].n1));
        dirs.push((format!("b{}_2", names[i]), geom.b_doublets[i].n2));
    }
    let borrowed: Vec<(&str, UnitVector3)> = dirs.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let mut e = echo(Some(state), Some(geom.alpha), &borrowed);
    e.variant = Some(variant.into());
    e
}

/// `P_E = sum_i P(a_i = b_1^(i) = b_2^(i))` over two (I) or three (II) axes.
pub fn linear_ent_test(state: &DensityMatrix, geom: &EntanglementGeometry, variant: LinearVariant) -> Result<TestReport> {
    require_two_qubit(state)?;
    let k = variant.axes();
    let c = (geom.alpha / 2.0).cos();
    let mut b = Builder::new(state);
    let mut entries = Vec::new();
    let mut corr_sum = 0.0;
    for i in 0..k {
        let (a, d) = (geom.a_axes[i], &geom.b_doublets[i]);
        entries.push(triple(&mut b, i + 1, a, d, Outcome::Plus, Outcome::Plus)?);
        entries.push(triple(&mut b, i + 1, a, d, Outcome::Minus, Outcome::Minus)?);
        corr_sum += pauli_corr(state, a, geom.b_axes[i])?;
    }
    let criterion = k as f64 * c + corr_sum;
    let mut extras = BTreeMap::new();
    extras.insert("criterion_expression".into(), criterion);
    let name = match variant {
        LinearVariant::I => "ent-linear-1",
        LinearVariant::II => "ent-linear-2",
    };
    Ok(b.finish(
        name,
        geometry_echo(state, geom, k, name),
        Combination::Polynomial(sum_of(&entries)),
        VerdictRule::Below,
        Some(0.5 * c * criterion),
        Some(variant.alpha_range()),
        extras,
    ))
}

/// Bilinear tests: `S_1`, `S_2` (products of complementary pseudo-probability
/// sums) and `S_3` (which adds products with local Born probabilities).
pub fn nonlinear_ent_test(state: &DensityMatrix, geom: &EntanglementGeometry, variant: NonlinearVariant) -> Result<TestReport> {
    require_two_qubit(state)?;
    let k = variant.axes();
    let c = (geom.alpha / 2.0).cos();
    let mut b = Builder::new(state);
    let mut terms = Vec::new();
    let mut closed_sum = 0.0;
    for i in 0..k {
        let (a, d) = (geom.a_axes[i], &geom.b_doublets[i]);
        let n = i + 1;
        let corr = pauli_corr(state, a, geom.b_axes[i])?;
        let e_pp = triple(&mut b, n, a, d, Outcome::Plus, Outcome::Plus)?;
        let e_mm = triple(&mut b, n, a, d, Outcome::Minus, Outcome::Minus)?;
        match variant {
            NonlinearVariant::I | NonlinearVariant::II => {
                let f_pp = triple(&mut b, n, a, d, Outcome::Minus, Outcome::Plus)?;
                let f_mm = triple(&mut b, n, a, d, Outcome::Plus, Outcome::Minus)?;
                for x in [e_pp, e_mm] {
                    for y in [f_pp, f_mm] {
                        terms.push(term(1.0, &[x, y]));
                    }
                }
                closed_sum += c * c - corr * corr;
            }
            NonlinearVariant::III => {
                let da = &geom.a_doublets[i];
                let bax = geom.b_axes[i];
                let pa = b.born(format!("P(a{n})"), &on_first(&p1(a, Outcome::Plus)))?;
                let pna = b.born(format!("P(~a{n})"), &on_first(&p1(a, Outcome::Minus)))?;
                let pb = b.born(format!("P(b{n})"), &on_second(&p1(bax, Outcome::Plus)))?;
                let pnb = b.born(format!("P(~b{n})"), &on_second(&p1(bax, Outcome::Minus)))?;
                let local = |b: &mut Builder, side: &str, d: &Doublet, s: Outcome, second: bool| {
                    let l1 = format!("{}{side}{n}_1", sym(s));
                    let l2 = format!("{}{side}{n}_2", sym(s));
                    let wrap = |p: Projector| if second { on_second(&p) } else { on_first(&p) };
                    b.unit(
                        format!("P({l1} {l2})"),
                        &[(l1, wrap(p1(d.n1, s))), (l2, wrap(p1(d.n2, s)))],
                    )
                };
                let a_mm = local(&mut b, "a", da, Outcome::Minus, false)?;
                let a_pp = local(&mut b, "a", da, Outcome::Plus, false)?;
                let b_mm = local(&mut b, "b", d, Outcome::Minus, true)?;
                let b_pp = local(&mut b, "b", d, Outcome::Plus, true)?;
                terms.push(term(1.0, &[e_pp]));
                terms.push(term(1.0, &[e_mm]));
                for pair in [
                    [pa, a_mm],
                    [pna, a_pp],
                    [pb, b_mm],
                    [pnb, b_pp],
                    [pa, b_mm],
                    [pna, b_pp],
                    [a_mm, pb],
                    [a_pp, pnb],
                ] {
                    terms.push(term(0.5, &pair));
                }
                let ma = local_mean(state, a, false)?;
                let mb = local_mean(state, bax, true)?;
                closed_sum += corr - 0.5 * (ma + mb).powi(2);
            }
        }
    }
    let (name, closed, criterion) = match variant {
        NonlinearVariant::I | NonlinearVariant::II => {
            let crit = k as f64 * c * c - (k as f64 * c * c - closed_sum);
            // closed_sum = sum (c^2 - C_i^2) = k c^2 - sum C_i^2
            let name = if variant == NonlinearVariant::I { "ent-nl-1" } else { "ent-nl-2" };
            (name, 0.25 * c * c * closed_sum, crit)
        }
        NonlinearVariant::III => {
            let crit = 9.0 * c + closed_sum;
            ("ent-nl-3", 0.5 * c * crit, crit)
        }
    };
    let mut extras = BTreeMap::new();
    extras.insert("criterion_expression".into(), criterion);
    Ok(b.finish(
        name,
        geometry_echo(state, geom, k, name),
        Combination::Polynomial(terms),
        VerdictRule::Below,
        Some(closed),
        Some(variant.alpha_range()),
        extras,
    ))
}

/// Options for [`discord_test`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DiscordOptions {
    /// Qubit-2 doublet axes; default: the same as the qubit-1 axes.
    pub b_axes: Option<[UnitVector3; 2]>,
}

/// Two pseudo-probabilities `P_D^i = P(a_i = b1 = b2) + P(a_i) P(~b1 ~b2) +
/// P(~a_i) P(b1 b2)`, with `a_1` along the Bloch vector of the first
/// qubit's reduced state and `a_2` orthogonal to it. The statistic is the
/// larger of the two, so the verdict holds iff both are negative.
pub fn discord_test(state: &DensityMatrix, alpha: f64, opts: DiscordOptions) -> Result<TestReport> {
    require_two_qubit(state)?;
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, pi)")));
    }
    let reduced = state.partial_trace(2, 2, true)?;
    let r = bloch(&reduced);
    let rn = crate::geometry::norm(r);
    let degenerate = rn < 1e-10;
    let a1 = if degenerate { UnitVector3::Z } else { UnitVector3::normalize(r)? };
    let a_axes = [a1, mub_partner(a1)];
    let b_axes = opts.b_axes.unwrap_or(a_axes);
    let c = (alpha / 2.0).cos();
    let lambda = c / 4.0;

    let mut b = Builder::new(state);
    let mut polys = Vec::new();
    let mut extras = BTreeMap::new();
    let mut closed = Vec::new();
    for i in 0..2 {
        let n = i + 1;
        let (a, bax) = (a_axes[i], b_axes[i]);
        let d = make_doublet(bax, alpha, AzimuthRule::Standard)?;
        let e_pp = triple(&mut b, n, a, &d, Outcome::Plus, Outcome::Plus)?;
        let e_mm = triple(&mut b, n, a, &d, Outcome::Minus, Outcome::Minus)?;
        let pa = b.born(format!("P(a{n})"), &on_first(&p1(a, Outcome::Plus)))?;
        let pna = b.born(format!("P(~a{n})"), &on_first(&p1(a, Outcome::Minus)))?;
        let mut local = |s: Outcome| {
            let l1 = format!("{}b{n}_1", sym(s));
            let l2 = format!("{}b{n}_2", sym(s));
            b.unit(
                format!("P({l1} {l2})"),
                &[(l2, on_second(&p1(d.n2, s))), (l1, on_second(&p1(d.n1, s)))],
            )
        };
        let b_mm = local(Outcome::Minus)?;
        let b_pp = local(Outcome::Plus)?;
        polys.push(vec![
            term(1.0, &[e_pp]),
            term(1.0, &[e_mm]),
            term(1.0, &[pa, b_mm]),
            term(1.0, &[pna, b_pp]),
        ]);
        let corr = pauli_corr(state, a, bax)?;
        let ma = local_mean(state, a, false)?;
        let mb = local_mean(state, bax, true)?;
        let cf = 2.0 * lambda * (8.0 * lambda + corr - ma * mb);
        closed.push(cf);
        extras.insert(format!("closed_form_{n}"), cf);
    }
    let comb = Combination::Max(polys.clone());
    let values: Vec<f64> = b.entries.iter().map(|e| e.value).collect();
    for (i, p) in polys.iter().enumerate() {
        extras.insert(format!("p_d{}", i + 1), eval_poly(p, &values).expect("indices in range"));
    }
    extras.insert("reduced_bloch_norm".into(), rn);
    extras.insert("degenerate_reduced_state".into(), if degenerate { 1.0 } else { 0.0 });
    let dirs = [("a1", a_axes[0]), ("a2", a_axes[1]), ("b1", b_axes[0]), ("b2", b_axes[1])];
    let mut report = b.finish(
        "discord",
        echo(Some(state), Some(alpha), &dirs),
        comb,
        VerdictRule::Below,
        Some(closed[0].max(closed[1])),
        Some((0.0, PI)),
        extras,
    );
    if degenerate {
        report
            .notes
            .push("reduced state of qubit 1 is maximally mixed; a1 defaults to z".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bloch_state, werner_state};
    use std::f64::consts::SQRT_2;

    fn x_pure() -> DensityMatrix {
        bloch_state(BlochVector::new(1.0, 0.0, 0.0).unwrap())
    }

    #[test]
    fn coherence_examples() {
        let rho = bloch_state(BlochVector::new(0.8, 0.0, 0.0).unwrap());
        let d = make_doublet(UnitVector3::X.neg(), PI / 2.0, AzimuthRule::Standard).unwrap();
        let r = coherence_test(&rho, d.n1, d.n2).unwrap();
        let c = (PI / 4.0).cos();
        assert!((r.statistic - 0.5 * c * (c - 0.8)).abs() < 1e-12);
        assert!(r.verdict);
        r.self_check().unwrap();
        let diag = bloch_state(BlochVector::new(0.0, 0.0, 0.6).unwrap());
        let r = coherence_test(&diag, UnitVector3::X, UnitVector3::Y).unwrap();
        assert!(r.statistic >= 0.0 && !r.verdict);
    }

    #[test]
    fn boolean_dep() {
        let r = boolean_state_dep_test(&DensityMatrix::maximally_mixed(2), UnitVector3::Z, UnitVector3::X).unwrap();
        assert!(r.statistic.abs() < 1e-15 && !r.verdict);
        let r = boolean_state_dep_test(&x_pure(), UnitVector3::Z, UnitVector3::X).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
        r.self_check().unwrap();
        let r = boolean_state_dep_test(&x_pure(), UnitVector3::Y, UnitVector3::Y).unwrap();
        assert!(r.statistic.abs() < 1e-15);
    }

    #[test]
    fn boolean_indep() {
        let r = boolean_state_indep_test(UnitVector3::Z, UnitVector3::X).unwrap();
        assert!((r.statistic + 1.0 / 24.0).abs() < 1e-15);
        assert!(r.extras["state_spread"] < 1e-15);
        assert!(r.extras["single_ordering_state_spread"] > 0.1);
        r.self_check().unwrap();
    }

    #[test]
    fn distributivity_example() {
        let rho = bloch_state(BlochVector::new(0.0, 0.0, -1.0).unwrap());
        let r = distributivity_test(&rho, UnitVector3::Z, UnitVector3::X, UnitVector3::X).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
        assert!(r.extras["second_term"].abs() < 1e-15);
        r.self_check().unwrap();
        let r = distributivity_test(&x_pure(), UnitVector3::Y, UnitVector3::Y, UnitVector3::Y).unwrap();
        assert!(r.statistic.abs() < 1e-15);
    }

    #[test]
    fn chsh_werner() {
        let [a1, a2, b1, b2] = standard_chsh_observables();
        let r = chsh_test(&werner_state(1.0).unwrap(), &a1, &a2, &b1, &b2).unwrap();
        for e in &r.pseudo_probabilities {
            assert!((e.value - (1.0 - SQRT_2) / 8.0).abs() < 1e-12, "{}", e.label);
        }
        assert!((r.extras["chsh_value"] + 2.0 * SQRT_2).abs() < 1e-12);
        assert!(r.verdict);
        r.self_check().unwrap();
        for t in &r.weak_terms {
            assert!(t.weak_value.unwrap() < 0.0);
        }
    }

    #[test]
    fn chsh_product_state() {
        let s = bloch_state(BlochVector::new(0.0, 0.0, 1.0).unwrap());
        let s = s.tensor(&s).unwrap();
        let [a1, a2, b1, b2] = standard_chsh_observables();
        let r = chsh_test(&s, &a1, &a2, &b1, &b2).unwrap();
        assert!(r.statistic >= 0.0 && !r.verdict);
        r.self_check().unwrap();
        assert!(chsh_test(&s, &a1, &b1, &b1, &b2).is_err());
    }

    #[test]
    fn linear_werner() {
        let g = EntanglementGeometry::standard(2.0 * PI / 3.0).unwrap();
        for eta in [0.3, 0.5, 0.8] {
            let r = linear_ent_test(&werner_state(eta).unwrap(), &g, LinearVariant::I).unwrap();
            assert_eq!(r.pseudo_probabilities.len(), 4);
            for e in &r.pseudo_probabilities {
                assert!((e.value - (0.5 - eta) / 8.0).abs() < 1e-12);
            }
            r.self_check().unwrap();
        }
    }

    #[test]
    fn nonlinear_singlet() {
        let g = EntanglementGeometry::standard(PI / 2.0).unwrap();
        let r = nonlinear_ent_test(&werner_state(1.0).unwrap(), &g, NonlinearVariant::I).unwrap();
        assert!((r.statistic + 0.125).abs() < 1e-12);
        r.self_check().unwrap();
        let g3 = EntanglementGeometry::standard((-79.0f64 / 81.0).acos()).unwrap();
        let r = nonlinear_ent_test(&werner_state(1.0).unwrap(), &g3, NonlinearVariant::III).unwrap();
        assert!(r.verdict);
        r.self_check().unwrap();
    }

    #[test]
    fn discord_werner() {
        let r = discord_test(&werner_state(1.0).unwrap(), 3.0 * PI / 4.0, DiscordOptions::default()).unwrap();
        let c = (3.0 * PI / 8.0).cos();
        let want = 0.5 * c * (2.0 * c - 1.0);
        assert!((r.extras["p_d1"] - want).abs() < 1e-12);
        assert!((r.extras["p_d2"] - want).abs() < 1e-12);
        assert!(r.verdict);
        assert_eq!(r.extras["degenerate_reduced_state"], 1.0);
        r.self_check().unwrap();
        let r = discord_test(&werner_state(1.0).unwrap(), PI / 3.0, DiscordOptions::default()).unwrap();
        assert!(!r.verdict && r.extras["p_d1"] > 0.0);
    }

    #[test]
    fn tolerance_override() {
        let r = boolean_state_dep_test(&x_pure(), UnitVector3::Z, UnitVector3::X).unwrap();
        assert!(r.clone().with_tolerance(1.0).self_check().is_ok());
        assert!(!r.with_tolerance(1.0).verdict);
    }
}
