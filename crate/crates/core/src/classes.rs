//! Line classes of parameter (q²+1)/2 built from the elliptic quadric
//! `E : X1² − ωX2² + X3X4 = 0` and the pencil through U3.
//!
//! Lines split by their position to `E`: tangent lines whose other `q` points are
//! all square points (`l0`) or all non-square points (`l1`), secant lines (`l2`) and
//! external lines (`l3`). The Bruen–Drudge class is `l0 ∪ l3`. For a nonzero square
//! λ1 and a non-square λ2 the sets
//!
//! ```text
//! T10 = secant to E,   tangent to E_λ1, meets π in π0      T11 = external, tangent to E_λ1, meets π in π1
//! T20 = external,      tangent to E_λ2, meets π in π0      T21 = secant,   tangent to E_λ2, meets π in π1
//! ```
//!
//! give `A = T11 ∪ T20` (external) and `B = T10 ∪ T21` (secant), and a class
//! containing `A` and missing `B` stays a Cameron–Liebler class when `A` is
//! swapped for `B`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field, QuadraticCharacter};
use crate::geometry::{Geometry, LineId, LineProfile, PencilTangency, PointId};
use crate::idset::IdSet;
use crate::klein::{KleinTable, MAX_WITNESSES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("invalid derivation pair: {0}")]
    InvalidPair(String),
    #[error("invalid derivation sequence: {0}")]
    InvalidSequence(String),
    #[error(
        "derivation preconditions violated{}: {missing_from_a} lines of A missing, {colliding_in_b} lines of B already present",
        step.map(|s| format!(" at step {s}")).unwrap_or_default()
    )]
    PreconditionViolated {
        step: Option<usize>,
        missing_from_a: usize,
        colliding_in_b: usize,
        missing_witnesses: Vec<LineId>,
        colliding_witnesses: Vec<LineId>,
    },
    #[error("class parameter {found} does not match the required {expected}")]
    ParameterMismatch { expected: u32, found: u32 },
    #[error("class of {size} lines is not a multiple of q²+q+1 = {divisor}")]
    SizeMismatch { size: usize, divisor: usize },
}

/// Orbit decomposition of points and lines with respect to `E`, plus the pieces
/// of it near U3 and π used by the constructions.
#[derive(Debug, Clone)]
pub struct OrbitDecomposition {
    pub q: u32,
    pub l0: IdSet,
    pub l1: IdSet,
    pub l2: IdSet,
    pub l3: IdSet,
    pub e_points: IdSet,
    pub os: IdSet,
    pub on: IdSet,
    pub pi0: IdSet,
    pub pi1: IdSet,
    pub t0: IdSet,
    pub t1: IdSet,
    /// External lines contained in π.
    pub l3_in_pi: IdSet,
    /// Secant lines through U3.
    pub l2_through_u3: IdSet,
}

fn violation(msg: impl Into<String>) -> ClassError {
    ClassError::StructureViolation(msg.into())
}

fn expect_len(what: &str, set: &IdSet, want: u64) -> Result<(), ClassError> {
    if set.len() as u64 == want {
        Ok(())
    } else {
        Err(violation(format!(
            "|{what}| = {}, expected {want}",
            set.len()
        )))
    }
}

pub fn decompose(g: &Geometry) -> Result<OrbitDecomposition, ClassError> {
    let q = g.q();
    let qq = q as u64;
    let (np, nl) = (g.num_points(), g.num_lines());
    let mut e_points = IdSet::new(np);
    let mut os = IdSet::new(np);
    let mut on = IdSet::new(np);
    for p in 0..np as PointId {
        match g.eval_pencil(Fe::ZERO, p) {
            QuadraticCharacter::Zero => e_points.insert(p),
            QuadraticCharacter::Square => os.insert(p),
            QuadraticCharacter::NonSquare => on.insert(p),
        };
    }

    let [mut l0, mut l1, mut l2, mut l3] = std::array::from_fn(|_| IdSet::new(nl));
    for l in 0..nl as LineId {
        let pts = g.line_points(l);
        let n_square = pts.iter().filter(|&&p| os.contains(p)).count() as u64;
        let n_nonsquare = pts.iter().filter(|&&p| on.contains(p)).count() as u64;
        match g.line_quadric_profile(l, Fe::ZERO) {
            LineProfile::Tangent(_) if n_square == qq => l0.insert(l),
            LineProfile::Tangent(_) if n_nonsquare == qq => l1.insert(l),
            LineProfile::Tangent(_) => {
                return Err(violation(format!(
                    "tangent line {l} has {n_square} square and {n_nonsquare} non-square points"
                )))
            }
            LineProfile::Secant(..) if n_square == (qq - 1) / 2 => l2.insert(l),
            LineProfile::External if n_square == (qq + 1) / 2 => l3.insert(l),
            _ => {
                return Err(violation(format!(
                    "line {l} has {n_square} square points, off the tactical decomposition"
                )))
            }
        };
    }

    let pi_points = IdSet::from_ids(np, (0..np as PointId).filter(|&p| g.in_pi(p)));
    let pi0 = os.intersection(&pi_points);
    let pi1 = on.intersection(&pi_points);
    let count_in =
        |l: LineId, s: &IdSet| g.line_points(l).iter().filter(|&&p| s.contains(p)).count() as u64;
    let t0 = IdSet::from_ids(nl, l0.iter().filter(|&l| count_in(l, &pi0) == qq));
    let t1 = IdSet::from_ids(nl, l1.iter().filter(|&l| count_in(l, &pi1) == qq));
    let pi_lines_through_u3 = IdSet::from_ids(
        nl,
        g.lines_through(g.u3())
            .iter()
            .copied()
            .filter(|&l| g.line_in_pi(l)),
    );
    let l3_in_pi = IdSet::from_ids(nl, l3.iter().filter(|&l| g.line_in_pi(l)));
    let l2_through_u3 = IdSet::from_ids(
        nl,
        g.lines_through(g.u3())
            .iter()
            .copied()
            .filter(|&l| l2.contains(l)),
    );

    let tangent = (qq + 1) * (qq * qq + 1) / 2;
    let non_tangent = qq * qq * (qq * qq + 1) / 2;
    expect_len("E", &e_points, qq * qq + 1)?;
    expect_len("Os", &os, qq * (qq * qq + 1) / 2)?;
    expect_len("On", &on, qq * (qq * qq + 1) / 2)?;
    expect_len("L0", &l0, tangent)?;
    expect_len("L1", &l1, tangent)?;
    expect_len("L2", &l2, non_tangent)?;
    expect_len("L3", &l3, non_tangent)?;
    expect_len("pi0", &pi0, qq * (qq + 1) / 2)?;
    expect_len("pi1", &pi1, qq * (qq + 1) / 2)?;
    expect_len("t0", &t0, (qq + 1) / 2)?;
    expect_len("t1", &t1, (qq + 1) / 2)?;
    expect_len("L3'", &l3_in_pi, qq * qq)?;
    expect_len("L2'", &l2_through_u3, qq * qq)?;
    if t0.union(&t1) != pi_lines_through_u3 {
        return Err(violation("t0 ∪ t1 is not the pencil of π-lines through U3"));
    }
    Ok(OrbitDecomposition {
        q,
        l0,
        l1,
        l2,
        l3,
        e_points,
        os,
        on,
        pi0,
        pi1,
        t0,
        t1,
        l3_in_pi,
        l2_through_u3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BruenDrudge,
    PerturbedBd,
    Imported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum ProvenanceStep {
    Start { family: Family },
    Derive { lambda1: u32, lambda2: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineClass {
    pub q: u32,
    pub lines: IdSet,
    pub parameter: u32,
    pub provenance: Vec<ProvenanceStep>,
}

impl LineClass {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn contains(&self, l: LineId) -> bool {
        self.lines.contains(l)
    }
}

/// (q²+1)/2.
pub fn half_parameter(q: u32) -> u32 {
    (q * q + 1) / 2
}

/// L′ = L0 ∪ L3.
pub fn bruen_drudge(dec: &OrbitDecomposition) -> LineClass {
    LineClass {
        q: dec.q,
        lines: dec.l0.union(&dec.l3),
        parameter: half_parameter(dec.q),
        provenance: vec![ProvenanceStep::Start {
            family: Family::BruenDrudge,
        }],
    }
}

/// L″ = (L′ ∖ L3′) ∪ L2′.
pub fn cp_gmp(dec: &OrbitDecomposition) -> LineClass {
    let bd = bruen_drudge(dec);
    LineClass {
        q: dec.q,
        lines: bd.lines.difference(&dec.l3_in_pi).union(&dec.l2_through_u3),
        parameter: bd.parameter,
        provenance: vec![ProvenanceStep::Start {
            family: Family::PerturbedBd,
        }],
    }
}

/// A nonzero square λ1 and a non-square λ2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivationPair {
    lambda1: Fe,
    lambda2: Fe,
}

impl DerivationPair {
    pub fn new(f: &Field, lambda1: Fe, lambda2: Fe) -> Result<DerivationPair, ClassError> {
        if !f.is_nonzero_square(lambda1) {
            return Err(ClassError::InvalidPair(format!(
                "lambda1 = {} is not a nonzero square",
                lambda1.code()
            )));
        }
        if !f.is_nonsquare(lambda2) {
            return Err(ClassError::InvalidPair(format!(
                "lambda2 = {} is not a non-square",
                lambda2.code()
            )));
        }
        Ok(DerivationPair { lambda1, lambda2 })
    }

    pub fn from_codes(f: &Field, lambda1: u32, lambda2: u32) -> Result<DerivationPair, ClassError> {
        let el = |c| {
            f.element(c)
                .map_err(|e| ClassError::InvalidPair(e.to_string()))
        };
        DerivationPair::new(f, el(lambda1)?, el(lambda2)?)
    }

    /// Smallest-code nonzero square and smallest-code non-square.
    pub fn canonical(f: &Field) -> DerivationPair {
        DerivationPair {
            lambda1: Fe::ONE,
            lambda2: f.canonical_nonsquare(),
        }
    }

    pub fn lambda1(&self) -> Fe {
        self.lambda1
    }

    pub fn lambda2(&self) -> Fe {
        self.lambda2
    }

    fn step(&self) -> ProvenanceStep {
        ProvenanceStep::Derive {
            lambda1: self.lambda1.code(),
            lambda2: self.lambda2.code(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DerivationSets {
    pub pair: DerivationPair,
    pub t10: IdSet,
    pub t11: IdSet,
    pub t20: IdSet,
    pub t21: IdSet,
    /// T11 ∪ T20, external to E.
    pub a: IdSet,
    /// T10 ∪ T21, secant to E.
    pub b: IdSet,
}

pub fn derivation_sets(
    g: &Geometry,
    dec: &OrbitDecomposition,
    pair: DerivationPair,
) -> Result<DerivationSets, ClassError> {
    let nl = g.num_lines();
    let [mut t10, mut t11, mut t20, mut t21] = std::array::from_fn(|_| IdSet::new(nl));
    for l in 0..nl as LineId {
        let PencilTangency::UniqueMember { lambda, .. } = g.pencil_tangency(l) else {
            continue;
        };
        let first = lambda == pair.lambda1;
        if !first && lambda != pair.lambda2 {
            continue;
        }
        let trace = g
            .pi_trace(l)
            .ok_or_else(|| violation(format!("tangent line {l} has no single π-point")))?;
        let in_pi0 = dec.pi0.contains(trace);
        if !in_pi0 && !dec.pi1.contains(trace) {
            return Err(violation(format!("tangent line {l} meets π at U3")));
        }
        // A tangent at R ≠ U3 to E_λ meets E twice when λ and Q(trace) agree in square class.
        let (secant_set, external_set) = match (first, in_pi0) {
            (true, true) => (Some(&mut t10), None),
            (true, false) => (None, Some(&mut t11)),
            (false, true) => (None, Some(&mut t20)),
            (false, false) => (Some(&mut t21), None),
        };
        if let Some(s) = secant_set {
            if !dec.l2.contains(l) {
                return Err(violation(format!("line {l} should be secant to E")));
            }
            s.insert(l);
        }
        if let Some(s) = external_set {
            if !dec.l3.contains(l) {
                return Err(violation(format!("line {l} should be external to E")));
            }
            s.insert(l);
        }
    }

    let q = g.q() as u64;
    let size = q * q * (q + 1) / 2;
    expect_len("T10", &t10, size)?;
    expect_len("T11", &t11, size)?;
    expect_len("T20", &t20, size)?;
    expect_len("T21", &t21, size)?;
    let a = t11.union(&t20);
    let b = t10.union(&t21);
    expect_len("A", &a, 2 * size)?;
    expect_len("B", &b, 2 * size)?;
    if !a.is_subset(&dec.l3) || !b.is_subset(&dec.l2) || !a.is_disjoint(&b) {
        return Err(violation("A must be external, B secant, and A ∩ B empty"));
    }
    let base = dec.t0.union(&dec.t1);
    if !a.is_disjoint(&base) || !b.is_disjoint(&base) {
        return Err(violation("A or B meets t0 ∪ t1"));
    }
    if a.iter().chain(b.iter()).any(|l| g.line_in_pi(l)) {
        return Err(violation("A or B contains a line of π"));
    }
    Ok(DerivationSets {
        pair,
        t10,
        t11,
        t20,
        t21,
        a,
        b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeetMode {
    /// Lines `r ≠ ℓ` with `|r ∩ ℓ| = 1`.
    Proper,
    /// As `Proper`, plus `ℓ` itself when it belongs to the set.
    SelfInclusive,
}

/// Members of `set` meeting `line`, by the Klein form.
pub fn count_meeting(table: &KleinTable, set: &IdSet, line: LineId, mode: MeetMode) -> u32 {
    set.iter()
        .filter(|&r| (r != line || mode == MeetMode::SelfInclusive) && table.meets(line, r))
        .count() as u32
}

fn witnesses(set: &IdSet) -> Vec<LineId> {
    set.iter().take(MAX_WITNESSES).collect()
}

/// `(L ∖ A) ∪ B` with precomputed sets.
pub fn derive_with(class: &LineClass, sets: &DerivationSets) -> Result<LineClass, ClassError> {
    let expected = half_parameter(class.q);
    if class.parameter != expected {
        return Err(ClassError::ParameterMismatch {
            expected,
            found: class.parameter,
        });
    }
    let missing = sets.a.difference(&class.lines);
    let colliding = sets.b.intersection(&class.lines);
    if !missing.is_empty() || !colliding.is_empty() {
        return Err(ClassError::PreconditionViolated {
            step: None,
            missing_from_a: missing.len(),
            colliding_in_b: colliding.len(),
            missing_witnesses: witnesses(&missing),
            colliding_witnesses: witnesses(&colliding),
        });
    }
    let mut provenance = class.provenance.clone();
    provenance.push(sets.pair.step());
    Ok(LineClass {
        q: class.q,
        lines: class.lines.difference(&sets.a).union(&sets.b),
        parameter: class.parameter,
        provenance,
    })
}

pub fn derive(
    g: &Geometry,
    dec: &OrbitDecomposition,
    class: &LineClass,
    pair: DerivationPair,
) -> Result<LineClass, ClassError> {
    derive_with(class, &derivation_sets(g, dec, pair)?)
}

/// Rejects sequences reusing a λ1 or a λ2.
pub fn check_sequence(pairs: &[DerivationPair]) -> Result<(), ClassError> {
    let mut seen1 = BTreeSet::new();
    let mut seen2 = BTreeSet::new();
    for p in pairs {
        if !seen1.insert(p.lambda1) {
            return Err(ClassError::InvalidSequence(format!(
                "lambda1 = {} used twice",
                p.lambda1.code()
            )));
        }
        if !seen2.insert(p.lambda2) {
            return Err(ClassError::InvalidSequence(format!(
                "lambda2 = {} used twice",
                p.lambda2.code()
            )));
        }
    }
    Ok(())
}

pub fn derive_sequence(
    g: &Geometry,
    dec: &OrbitDecomposition,
    class: &LineClass,
    pairs: &[DerivationPair],
) -> Result<LineClass, ClassError> {
    check_sequence(pairs)?;
    pairs
        .iter()
        .enumerate()
        .try_fold(class.clone(), |acc, (i, &pair)| {
            derive(g, dec, &acc, pair).map_err(|e| match e {
                ClassError::PreconditionViolated {
                    missing_from_a,
                    colliding_in_b,
                    missing_witnesses,
                    colliding_witnesses,
                    ..
                } => ClassError::PreconditionViolated {
                    step: Some(i),
                    missing_from_a,
                    colliding_in_b,
                    missing_witnesses,
                    colliding_witnesses,
                },
                other => other,
            })
        })
}

/// Self-inclusive meet count of every line with `lines`, through point stars:
/// `Σ_{P ∈ ℓ} |star(P) ∩ L| − q·[ℓ ∈ L]`.
pub fn meet_counts_incidence(g: &Geometry, lines: &IdSet) -> Vec<u32> {
    let mut star = vec![0u32; g.num_points()];
    for l in lines.iter() {
        for &p in g.line_points(l) {
            star[p as usize] += 1;
        }
    }
    let q = g.q();
    (0..g.num_lines() as LineId)
        .into_par_iter()
        .map(|l| {
            let s: u32 = g.line_points(l).iter().map(|&p| star[p as usize]).sum();
            if lines.contains(l) {
                s - q
            } else {
                s
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClReport {
    /// Parameter inferred from the class size.
    pub parameter: u32,
    pub declared_parameter: u32,
    pub pass: bool,
    pub expected_in: u64,
    pub expected_out: u64,
    pub histogram_in: BTreeMap<u32, u32>,
    pub histogram_out: BTreeMap<u32, u32>,
    pub witnesses: Vec<LineId>,
}

/// Every line of L must meet `x(q+1) + q²` lines of L (itself included), every
/// other line `x(q+1)`.
pub fn verify_cl(g: &Geometry, class: &LineClass) -> Result<ClReport, ClassError> {
    let q = g.q() as u64;
    let divisor = (q * q + q + 1) as usize;
    let size = class.lines.len();
    if size % divisor != 0 {
        return Err(ClassError::SizeMismatch { size, divisor });
    }
    let x = (size / divisor) as u64;
    let (expected_in, expected_out) = (x * (q + 1) + q * q, x * (q + 1));
    let counts = meet_counts_incidence(g, &class.lines);
    let mut histogram_in = BTreeMap::new();
    let mut histogram_out = BTreeMap::new();
    let mut bad = Vec::new();
    for (l, &c) in counts.iter().enumerate() {
        let member = class.lines.contains(l as LineId);
        let (h, want) = if member {
            (&mut histogram_in, expected_in)
        } else {
            (&mut histogram_out, expected_out)
        };
        *h.entry(c).or_insert(0) += 1;
        if c as u64 != want && bad.len() < MAX_WITNESSES {
            bad.push(l as LineId);
        }
    }
    Ok(ClReport {
        parameter: x as u32,
        declared_parameter: class.parameter,
        pass: bad.is_empty(),
        expected_in,
        expected_out,
        histogram_in,
        histogram_out,
        witnesses: bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(q: u32) -> (Geometry, OrbitDecomposition) {
        let g = Geometry::build(Field::with_order(q).unwrap()).unwrap();
        let dec = decompose(&g).unwrap();
        (g, dec)
    }

    #[test]
    fn decomposition_counts_q3() {
        let (g, dec) = setup(3);
        assert_eq!(dec.l0.len(), 20);
        assert_eq!(dec.l2.len(), 45);
        let all = dec.l0.union(&dec.l1).union(&dec.l2).union(&dec.l3);
        assert_eq!(all.len(), g.num_lines());
        assert_eq!(
            dec.l0.len() + dec.l1.len() + dec.l2.len() + dec.l3.len(),
            g.num_lines()
        );
    }

    #[test]
    fn decomposition_counts_q7() {
        let (_, dec) = setup(7);
        assert_eq!(dec.pi0.len(), 28);
        assert_eq!(dec.t0.len(), 4);
    }

    #[test]
    fn bruen_drudge_sizes() {
        for (q, size) in [(3, 65), (5, 403), (7, 1425)] {
            let (_, dec) = setup(q);
            let bd = bruen_drudge(&dec);
            assert_eq!(bd.len(), size);
            assert_eq!(bd.parameter, half_parameter(q));
        }
    }

    #[test]
    fn perturbed_class_swaps_2q2_lines() {
        let (_, dec) = setup(5);
        assert_eq!(dec.l3_in_pi.len(), 25);
        assert_eq!(dec.l2_through_u3.len(), 25);
        let (bd, cp) = (bruen_drudge(&dec), cp_gmp(&dec));
        assert_eq!(cp.len(), 403);
        assert_eq!(bd.lines.symmetric_difference(&cp.lines).len(), 50);
    }

    #[test]
    fn derivation_pair_validation() {
        let f = Field::with_order(7).unwrap();
        assert!(DerivationPair::from_codes(&f, 2, 3).is_ok());
        assert!(DerivationPair::from_codes(&f, 0, 3).is_err());
        assert!(DerivationPair::from_codes(&f, 3, 3).is_err());
        assert!(DerivationPair::from_codes(&f, 1, 2).is_err());
        assert!(DerivationPair::from_codes(&f, 1, 9).is_err());
        let c = DerivationPair::canonical(&f);
        assert_eq!((c.lambda1().code(), c.lambda2().code()), (1, 3));
    }

    #[test]
    fn derivation_set_sizes_q7() {
        let (g, dec) = setup(7);
        for l1 in [1, 2, 4] {
            for l2 in [3, 5, 6] {
                let pair = DerivationPair::from_codes(g.field(), l1, l2).unwrap();
                let s = derivation_sets(&g, &dec, pair).unwrap();
                assert_eq!(s.a.len(), 392);
                assert_eq!(s.b.len(), 392);
                assert!(s.t11.is_subset(&dec.l3) && s.t20.is_subset(&dec.l3));
                assert!(s.t10.is_subset(&dec.l2) && s.t21.is_subset(&dec.l2));
            }
        }
    }

    #[test]
    fn count_meeting_modes() {
        let (g, dec) = setup(5);
        let t = KleinTable::new(&g);
        let empty = IdSet::new(g.num_lines());
        assert_eq!(count_meeting(&t, &empty, 0, MeetMode::Proper), 0);
        let l = dec.l0.iter().next().unwrap();
        let proper = count_meeting(&t, &dec.l0, l, MeetMode::Proper);
        let incl = count_meeting(&t, &dec.l0, l, MeetMode::SelfInclusive);
        assert_eq!(incl, proper + 1);
    }

    #[test]
    fn verify_known_counts_q5() {
        let (g, dec) = setup(5);
        let bd = bruen_drudge(&dec);
        let r = verify_cl(&g, &bd).unwrap();
        assert!(r.pass);
        assert_eq!((r.expected_in, r.expected_out), (103, 78));
        assert_eq!(r.histogram_in, BTreeMap::from([(103, 403)]));
        assert_eq!(r.histogram_out, BTreeMap::from([(78, 403)]));
    }

    #[test]
    fn single_swap_breaks_the_class() {
        let (g, dec) = setup(5);
        let mut bd = bruen_drudge(&dec);
        let out = dec.l1.iter().next().unwrap();
        let inside = bd.lines.iter().next().unwrap();
        bd.lines.remove(inside);
        bd.lines.insert(out);
        let r = verify_cl(&g, &bd).unwrap();
        assert!(!r.pass);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let (g, dec) = setup(3);
        let mut bd = bruen_drudge(&dec);
        let l = bd.lines.iter().next().unwrap();
        bd.lines.remove(l);
        assert_eq!(
            verify_cl(&g, &bd).unwrap_err(),
            ClassError::SizeMismatch {
                size: 64,
                divisor: 13
            }
        );
    }

    #[test]
    fn derive_preconditions() {
        let (g, dec) = setup(7);
        let pair = DerivationPair::canonical(g.field());
        let bd = bruen_drudge(&dec);
        let derived = derive(&g, &dec, &bd, pair).unwrap();
        assert_eq!(derived.len(), 1425);
        assert_eq!(derived.provenance.len(), 2);
        let again = derive(&g, &dec, &derived, pair).unwrap_err();
        assert!(matches!(
            again,
            ClassError::PreconditionViolated {
                missing_from_a: 392,
                colliding_in_b: 392,
                ..
            }
        ));
        let wrong = LineClass {
            parameter: 3,
            ..bd.clone()
        };
        assert!(matches!(
            derive(&g, &dec, &wrong, pair),
            Err(ClassError::ParameterMismatch {
                expected: 25,
                found: 3
            })
        ));
    }

    #[test]
    fn sequence_rules() {
        let (g, dec) = setup(7);
        let f = g.field();
        let bd = bruen_drudge(&dec);
        assert_eq!(derive_sequence(&g, &dec, &bd, &[]).unwrap(), bd);
        let p = |a, b| DerivationPair::from_codes(f, a, b).unwrap();
        let repeated = [p(1, 3), p(1, 5)];
        assert!(matches!(
            derive_sequence(&g, &dec, &bd, &repeated),
            Err(ClassError::InvalidSequence(_))
        ));
        let full = derive_sequence(&g, &dec, &bd, &[p(1, 3), p(2, 5), p(4, 6)]).unwrap();
        assert_eq!(full.len(), 1425);
        assert_eq!(full.provenance.len(), 4);
        assert!(verify_cl(&g, &full).unwrap().pass);
    }
}
