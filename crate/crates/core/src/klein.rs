//! Klein correspondence: lines of PG(3,q) as points of the hyperbolic quadric
//! Q+(5,q), with concurrence read off the polarized Klein form.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::geometry::{Geometry, LineId, Plucker};
use crate::idset::IdSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KleinError {
    #[error("tight-set check on an empty set")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KleinPoint {
    pub coords: Plucker,
    pub line: LineId,
}

pub fn klein_image(geometry: &Geometry, line: LineId) -> KleinPoint {
    KleinPoint {
        coords: *geometry.plucker(line),
        line,
    }
}

/// `B(p, p') = p01p'23 + p23p'01 − p02p'13 − p13p'02 + p03p'12 + p12p'03`.
pub fn klein_form(f: &Field, a: &Plucker, b: &Plucker) -> Fe {
    functional(f, a)
        .iter()
        .zip(b)
        .fold(Fe::ZERO, |acc, (&c, &x)| f.add(acc, f.mul(c, x)))
}

/// Coefficients of `B(a, ·)`.
fn functional(f: &Field, a: &Plucker) -> Plucker {
    [a[5], f.neg(a[4]), a[3], a[2], f.neg(a[1]), a[0]]
}

/// True iff the lines share a point; a line meets itself.
pub fn lines_meet(geometry: &Geometry, a: LineId, b: LineId) -> bool {
    klein_form(geometry.field(), geometry.plucker(a), geometry.plucker(b)).is_zero()
}

/// Precomputed Klein functionals for fast bulk meet tests.
#[derive(Debug, Clone)]
pub struct KleinTable {
    /// Set for prime fields, where the form is an integer dot product mod p.
    prime: Option<u64>,
    funcs: Vec<[u16; 6]>,
    coords: Vec<[u16; 6]>,
    field: Field,
}

impl KleinTable {
    pub fn new(geometry: &Geometry) -> KleinTable {
        let f = geometry.field();
        let to_codes = |p: &Plucker| p.map(|c| c.code() as u16);
        let lines = 0..geometry.num_lines() as LineId;
        KleinTable {
            prime: (f.degree() == 1).then_some(f.order() as u64),
            funcs: lines
                .clone()
                .map(|l| to_codes(&functional(f, geometry.plucker(l))))
                .collect(),
            coords: lines.map(|l| to_codes(geometry.plucker(l))).collect(),
            field: f.clone(),
        }
    }

    pub fn num_lines(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn meets(&self, a: LineId, b: LineId) -> bool {
        let (c, x) = (&self.funcs[a as usize], &self.coords[b as usize]);
        match self.prime {
            Some(p) => {
                let s: u64 = (0..6).map(|i| c[i] as u64 * x[i] as u64).sum();
                s % p == 0
            }
            None => {
                let f = &self.field;
                (0..6)
                    .fold(Fe::ZERO, |acc, i| {
                        f.add(
                            acc,
                            f.mul(Fe::from_code(c[i] as u32), Fe::from_code(x[i] as u32)),
                        )
                    })
                    .is_zero()
            }
        }
    }

    /// `|ℓ^⊥ ∩ set|`: members of `set` meeting `line`, the line itself included.
    pub fn perp_count(&self, line: LineId, set: &[LineId]) -> u32 {
        set.iter().filter(|&&m| self.meets(line, m)).count() as u32
    }

    /// [`KleinTable::perp_count`] for every line, in parallel.
    pub fn perp_counts(&self, set: &IdSet) -> Vec<u32> {
        let members = set.to_vec();
        (0..self.num_lines() as LineId)
            .into_par_iter()
            .map(|l| self.perp_count(l, &members))
            .collect()
    }
}

/// A tightness parameter as a fraction, so that size-mismatched sets can be
/// reported instead of rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational { num, den }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn as_positive_integer(&self) -> Option<u64> {
        (self.num % self.den == 0 && self.num / self.den > 0).then(|| (self.num / self.den) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightSetReport {
    pub i: Rational,
    pub pass: bool,
    /// False when `i` is not a positive integer or `|T| ≠ i(q²+q+1)`.
    pub structural_ok: bool,
    pub expected_in: Option<u64>,
    pub expected_out: Option<u64>,
    pub histogram_in: BTreeMap<u32, u32>,
    pub histogram_out: BTreeMap<u32, u32>,
    /// Up to ten Klein points (line ids) whose count is off target.
    pub witnesses: Vec<LineId>,
}

pub const MAX_WITNESSES: usize = 10;

/// Checks that the Klein image of `lines` is `i`-tight:
/// `|P^⊥ ∩ T| = i(q+1) + q²` for `P ∈ T` and `i(q+1)` otherwise.
pub fn tight_set_check(
    geometry: &Geometry,
    table: &KleinTable,
    lines: &IdSet,
    i: Rational,
) -> Result<TightSetReport, KleinError> {
    if lines.is_empty() {
        return Err(KleinError::EmptySet);
    }
    let q = geometry.q() as u64;
    let counts = table.perp_counts(lines);
    let mut histogram_in = BTreeMap::new();
    let mut histogram_out = BTreeMap::new();
    for (l, &c) in counts.iter().enumerate() {
        let h = if lines.contains(l as LineId) {
            &mut histogram_in
        } else {
            &mut histogram_out
        };
        *h.entry(c).or_insert(0) += 1;
    }

    let target = i
        .as_positive_integer()
        .filter(|&x| x * (q * q + q + 1) == lines.len() as u64);
    let (expected_in, expected_out) = match target {
        Some(x) => (Some(x * (q + 1) + q * q), Some(x * (q + 1))),
        None => (None, None),
    };
    let witnesses: Vec<LineId> = match (expected_in, expected_out) {
        (Some(ein), Some(eout)) => counts
            .iter()
            .enumerate()
            .filter(|&(l, &c)| {
                let want = if lines.contains(l as LineId) {
                    ein
                } else {
                    eout
                };
                c as u64 != want
            })
            .map(|(l, _)| l as LineId)
            .take(MAX_WITNESSES)
            .collect(),
        _ => Vec::new(),
    };
    let structural_ok = target.is_some();
    Ok(TightSetReport {
        i,
        pass: structural_ok && witnesses.is_empty(),
        structural_ok,
        expected_in,
        expected_out,
        histogram_in,
        histogram_out,
        witnesses,
    })
}
