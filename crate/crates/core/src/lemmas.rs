//! Counting statements about the quadric pencil and the derivation sets, checked
//! over a caller-chosen domain of lines (all of them, or a sample).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::classes::{count_meeting, DerivationSets, MeetMode, OrbitDecomposition};
use crate::field::{Fe, QuadraticCharacter};
use crate::geometry::{Geometry, LineId, LineProfile, PencilTangency, PointId};
use crate::idset::IdSet;
use crate::klein::{KleinTable, MAX_WITNESSES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// Ids (lines, points or field codes, per check) where the statement failed.
    pub witnesses: Vec<u32>,
    /// Histogram of the main observed quantity.
    pub observed: BTreeMap<u32, u32>,
}

impl LemmaReport {
    fn new(name: &'static str) -> LemmaReport {
        LemmaReport {
            name,
            checked: 0,
            failures: 0,
            witnesses: Vec::new(),
            observed: BTreeMap::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, id: u32, value: u32, ok: bool) {
        self.checked += 1;
        *self.observed.entry(value).or_insert(0) += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(id);
            }
        }
    }

    fn from_results(name: &'static str, results: Vec<(u32, u32, bool)>) -> LemmaReport {
        let mut r = LemmaReport::new(name);
        for (id, v, ok) in results {
            r.record(id, v, ok);
        }
        r
    }
}

fn par_check<F>(name: &'static str, domain: &[LineId], f: F) -> LemmaReport
where
    F: Fn(LineId) -> Option<(u32, bool)> + Sync,
{
    let results = domain
        .par_iter()
        .filter_map(|&l| f(l).map(|(v, ok)| (l, v, ok)))
        .collect();
    LemmaReport::from_results(name, results)
}

/// A secant or external line meets `(q+1)²/2` lines of L0 and of L1.
pub fn secant_external_meets(
    table: &KleinTable,
    dec: &OrbitDecomposition,
    domain: &[LineId],
) -> LemmaReport {
    let q = dec.q;
    let want = (q + 1) * (q + 1) / 2;
    par_check(
        "secant/external lines meet (q+1)²/2 of L0 and L1",
        domain,
        |l| {
            if !dec.l2.contains(l) && !dec.l3.contains(l) {
                return None;
            }
            let a = count_meeting(table, &dec.l0, l, MeetMode::Proper);
            let b = count_meeting(table, &dec.l1, l, MeetMode::Proper);
            Some((a, a == want && b == want))
        },
    )
}

/// A line of L0 meets `q²+(q−1)/2` other lines of L0 and `(q+1)/2` of L1; the
/// same with L0, L1 exchanged.
pub fn tangent_meets(
    table: &KleinTable,
    dec: &OrbitDecomposition,
    domain: &[LineId],
) -> LemmaReport {
    let q = dec.q;
    let (same, other) = (q * q + (q - 1) / 2, (q + 1) / 2);
    par_check(
        "tangent lines meet q²+(q−1)/2 of their orbit, (q+1)/2 of the other",
        domain,
        |l| {
            let (own, opp) = if dec.l0.contains(l) {
                (&dec.l0, &dec.l1)
            } else if dec.l1.contains(l) {
                (&dec.l1, &dec.l0)
            } else {
                return None;
            };
            let a = count_meeting(table, own, l, MeetMode::Proper);
            let b = count_meeting(table, opp, l, MeetMode::Proper);
            Some((a, a == same && b == other))
        },
    )
}

/// The polar of an L0 line lies in L0 when q ≡ 3 (mod 4) and in L1 when q ≡ 1;
/// symmetrically for L1.
pub fn polar_of_tangent(g: &Geometry, dec: &OrbitDecomposition, domain: &[LineId]) -> LemmaReport {
    let swap = dec.q % 4 == 1;
    par_check(
        "polar of a tangent line keeps or swaps its orbit by q mod 4",
        domain,
        |l| {
            let in_l0 = dec.l0.contains(l);
            if !in_l0 && !dec.l1.contains(l) {
                return None;
            }
            let image = g.polar_line(Fe::ZERO, l);
            let image_in_l0 = dec.l0.contains(image);
            let image_in_l1 = dec.l1.contains(image);
            let ok = if in_l0 != swap {
                image_in_l0
            } else {
                image_in_l1
            };
            Some((image_in_l0 as u32, ok))
        },
    )
}

/// `|P^⊥ ∩ L0|` and `|P^⊥ ∩ L1|` are `q+1` and `0` in the pattern fixed by the
/// type of `P` and q mod 4. The observed histogram records `|P^⊥ ∩ L0|`.
pub fn polar_plane_tangent_counts(g: &Geometry, dec: &OrbitDecomposition) -> LemmaReport {
    let q = dec.q;
    let q3 = q % 4 == 3;
    let points: Vec<PointId> = dec.os.iter().chain(dec.on.iter()).collect();
    let results = points
        .par_iter()
        .map(|&p| {
            let plane = g.polar_plane(Fe::ZERO, p);
            let lines = g.lines_in(plane);
            let c0 = lines.iter().filter(|&&l| dec.l0.contains(l)).count() as u32;
            let c1 = lines.iter().filter(|&&l| dec.l1.contains(l)).count() as u32;
            let l0_full = dec.os.contains(p) == q3;
            let ok = if l0_full {
                (c0, c1) == (q + 1, 0)
            } else {
                (c0, c1) == (0, q + 1)
            };
            (p, c0, ok)
        })
        .collect();
    LemmaReport::from_results(
        "polar planes of Os/On points hold q+1 lines of one tangent orbit",
        results,
    )
}

/// Every line not in π is tangent to exactly one member of the pencil, tested
/// by scanning all members. The observed histogram counts tangent members.
pub fn unique_tangency_off_pi(g: &Geometry, domain: &[LineId]) -> LemmaReport {
    par_check(
        "every line off π is tangent to exactly one member",
        domain,
        |l| {
            if g.line_in_pi(l) {
                return None;
            }
            let n = tangent_member_count(g, l);
            Some((n, n == 1))
        },
    )
}

/// As [`unique_tangency_off_pi`] but restricted to lines missing U3, and
/// requiring the fast classification to agree with the scan.
pub fn unique_tangency_off_pi_avoiding_u3(g: &Geometry, domain: &[LineId]) -> LemmaReport {
    let u3 = g.u3();
    par_check(
        "every line off π and not through U3 is tangent to exactly one member",
        domain,
        |l| {
            if g.line_in_pi(l) || g.point_on_line(u3, l) {
                return None;
            }
            let n = tangent_member_count(g, l);
            let agree = g.pencil_tangency(l) == g.tangent_pencil_member(l);
            Some((n, n == 1 && agree))
        },
    )
}

/// Lines through U3 off π: the observed histogram counts tangent members (the
/// statement checked is that each is secant to every member).
pub fn u3_lines_secant_to_all(g: &Geometry) -> LemmaReport {
    let lines: Vec<LineId> = g
        .lines_through(g.u3())
        .iter()
        .copied()
        .filter(|&l| !g.line_in_pi(l))
        .collect();
    par_check(
        "lines through U3 off π are secant to every member",
        &lines,
        |l| {
            let all_secant = g
                .field()
                .elements()
                .all(|lambda| matches!(g.line_quadric_profile(l, lambda), LineProfile::Secant(..)));
            Some((tangent_member_count(g, l), all_secant))
        },
    )
}

fn tangent_member_count(g: &Geometry, l: LineId) -> u32 {
    g.field()
        .elements()
        .filter(|&lambda| matches!(g.line_quadric_profile(l, lambda), LineProfile::Tangent(_)))
        .count() as u32
}

/// For λ ≠ 0, the points of `E_λ ∖ {U3}` are square points of `Q` exactly when −λ
/// is a nonzero square. Witnesses are λ codes.
pub fn member_point_types(g: &Geometry) -> LemmaReport {
    let f = g.field();
    let mut r = LemmaReport::new("E_λ ∖ {U3} ⊆ Os iff −λ is a nonzero square");
    for lambda in f.elements().filter(|l| !l.is_zero()) {
        let all_square = g
            .quadric_points(lambda)
            .into_iter()
            .filter(|&p| p != g.u3())
            .all(|p| g.eval_pencil(Fe::ZERO, p) == QuadraticCharacter::Square);
        r.record(
            lambda.code(),
            all_square as u32,
            all_square == f.is_nonzero_square(f.neg(lambda)),
        );
    }
    r
}

/// Points of π evaluate to the same quadratic character under every `Q_λ`.
pub fn pi_points_member_independent(g: &Geometry) -> LemmaReport {
    let f = g.field();
    let mut r = LemmaReport::new("points of π have the same character under every Q_λ");
    for p in (0..g.num_points() as PointId).filter(|&p| g.in_pi(p)) {
        let base = g.eval_pencil(Fe::ZERO, p);
        let ok = f.elements().all(|lambda| g.eval_pencil(lambda, p) == base);
        r.record(p, 0, ok);
    }
    r
}

/// A tangent line to `E_λ` (λ ≠ 0) at `R ≠ U3` with π-point `P` meets `E` in 2
/// points when λ and `Q(P)` have the same square class, and in 0 points
/// otherwise. The observed histogram counts `|ℓ ∩ E|`.
pub fn tangent_trace_trichotomy(
    g: &Geometry,
    dec: &OrbitDecomposition,
    domain: &[LineId],
) -> LemmaReport {
    let f = g.field();
    let u3 = g.u3();
    let results: Vec<Vec<(u32, u32, bool)>> = domain
        .par_iter()
        .map(|&l| {
            let mut out = Vec::new();
            for lambda in f.elements().filter(|l| !l.is_zero()) {
                let LineProfile::Tangent(r) = g.line_quadric_profile(l, lambda) else {
                    continue;
                };
                if r == u3 {
                    continue;
                }
                let Some(p) = g.pi_trace(l) else { continue };
                let on_e = g.line_quadric_profile(l, Fe::ZERO).meets() as u32;
                let want = match (dec.pi0.contains(p), f.is_nonzero_square(lambda)) {
                    (true, true) | (false, false) => 2,
                    _ => 0,
                };
                let ok = (dec.pi0.contains(p) || dec.pi1.contains(p)) && on_e == want;
                out.push((l, on_e, ok));
            }
            out
        })
        .collect();
    LemmaReport::from_results(
        "tangents to E_λ meet E twice or not at all by the square class of λ and their π-point",
        results.into_iter().flatten().collect(),
    )
}

/// Value of `|A_ℓ| = |B_ℓ|` for a line outside `A ∪ B`.
pub fn expected_outside_count(g: &Geometry, dec: &OrbitDecomposition, l: LineId) -> u32 {
    let q = dec.q;
    if dec.t0.contains(l) || dec.t1.contains(l) {
        q * q
    } else if g.line_in_pi(l) || g.point_on_line(g.u3(), l) {
        q * (q + 1)
    } else {
        q * (q + 2)
    }
}

/// Lines outside `A ∪ B` meet equally many lines of `A` and `B`, with the value
/// given by [`expected_outside_count`]. The observed histogram records `|A_ℓ|`.
pub fn outside_balance(
    g: &Geometry,
    table: &KleinTable,
    dec: &OrbitDecomposition,
    sets: &DerivationSets,
    domain: &[LineId],
) -> LemmaReport {
    let ab = sets.a.union(&sets.b);
    par_check(
        "lines outside A ∪ B meet A and B equally, with the case value",
        domain,
        |l| {
            if ab.contains(l) {
                return None;
            }
            let a = count_meeting(table, &sets.a, l, MeetMode::Proper);
            let b = count_meeting(table, &sets.b, l, MeetMode::Proper);
            Some((a, a == b && a == expected_outside_count(g, dec, l)))
        },
    )
}

/// Lines of `A` meet `(3q²+3q−2)/2` other lines of `A` and `(q²+3q)/2` of `B`;
/// lines of `B` the other way round. The observed histogram records the count
/// in the line's own set.
pub fn inside_counts(
    table: &KleinTable,
    q: u32,
    sets: &DerivationSets,
    domain: &[LineId],
) -> LemmaReport {
    let (own, other) = ((3 * q * q + 3 * q - 2) / 2, (q * q + 3 * q) / 2);
    par_check(
        "lines of A or B meet (3q²+3q−2)/2 of their own set, (q²+3q)/2 of the other",
        domain,
        |l| {
            let (mine, theirs) = if sets.a.contains(l) {
                (&sets.a, &sets.b)
            } else if sets.b.contains(l) {
                (&sets.b, &sets.a)
            } else {
                return None;
            };
            let x = count_meeting(table, mine, l, MeetMode::Proper);
            let y = count_meeting(table, theirs, l, MeetMode::Proper);
            Some((x, x == own && y == other))
        },
    )
}

/// The q² lines through U3 off π as one set, for orbit and lemma reporting.
pub fn u3_lines_off_pi(g: &Geometry) -> IdSet {
    IdSet::from_ids(
        g.num_lines(),
        g.lines_through(g.u3())
            .iter()
            .copied()
            .filter(|&l| !g.line_in_pi(l)),
    )
}

/// Whether the pencil classification marks `l` as tangent to no single member.
pub fn is_irregular(g: &Geometry, l: LineId) -> bool {
    matches!(g.pencil_tangency(l), PencilTangency::Irregular(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{decompose, derivation_sets, DerivationPair};
    use crate::field::Field;

    fn all_lines(g: &Geometry) -> Vec<LineId> {
        (0..g.num_lines() as LineId).collect()
    }

    #[test]
    fn section_two_counts_hold_exhaustively() {
        for q in [3, 5, 7] {
            let g = Geometry::build(Field::with_order(q).unwrap()).unwrap();
            let dec = decompose(&g).unwrap();
            let t = KleinTable::new(&g);
            let dom = all_lines(&g);
            let r = secant_external_meets(&t, &dec, &dom);
            assert!(r.pass(), "{r:?}");
            assert_eq!(r.checked, dec.l2.len() + dec.l3.len());
            assert!(tangent_meets(&t, &dec, &dom).pass());
            assert!(polar_of_tangent(&g, &dec, &dom).pass());
            assert!(polar_plane_tangent_counts(&g, &dec).pass());
        }
    }

    #[test]
    fn pencil_statements_q5() {
        let g = Geometry::build(Field::with_order(5).unwrap()).unwrap();
        let dec = decompose(&g).unwrap();
        let dom = all_lines(&g);
        assert!(member_point_types(&g).pass());
        assert!(pi_points_member_independent(&g).pass());
        assert!(tangent_trace_trichotomy(&g, &dec, &dom).pass());
        assert!(unique_tangency_off_pi_avoiding_u3(&g, &dom).pass());
        let u3 = u3_lines_secant_to_all(&g);
        assert!(u3.pass());
        assert_eq!(u3.observed, BTreeMap::from([(0, 25)]));
        let literal = unique_tangency_off_pi(&g, &dom);
        assert_eq!(literal.failures, 25);
        assert_eq!(literal.checked, 125 * 6 + 25);
        assert!(u3_lines_off_pi(&g).iter().all(|l| is_irregular(&g, l)));
    }

    #[test]
    fn derivation_counts_q7() {
        let g = Geometry::build(Field::with_order(7).unwrap()).unwrap();
        let dec = decompose(&g).unwrap();
        let t = KleinTable::new(&g);
        let sets = derivation_sets(&g, &dec, DerivationPair::canonical(g.field())).unwrap();
        let dom = all_lines(&g);
        let inside = inside_counts(&t, 7, &sets, &dom);
        assert!(inside.pass());
        assert_eq!(inside.observed, BTreeMap::from([(83, 784)]));
        let outside = outside_balance(&g, &t, &dec, &sets, &dom);
        assert!(outside.pass(), "{outside:?}");
        let values: Vec<u32> = outside.observed.keys().copied().collect();
        assert_eq!(values, vec![49, 56, 63]);
    }
}
