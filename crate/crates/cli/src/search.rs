//! Exhaustive search over derivation sequences, collecting the distinct
//! (plane, star) spectrum pairs reached.
//!
//! Sequences use λ1 in ascending order. A state is the current class, the
//! smallest λ1 still allowed and the set of λ2 already spent; a state already
//! expanded is not expanded again. This loses no class, unlike pruning by
//! spectrum, which could merge distinct classes with different descendants.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use clines_core::classes::{
    derivation_sets, derive_with, verify_cl, ClassError, DerivationPair, DerivationSets, LineClass,
    OrbitDecomposition, ProvenanceStep,
};
use clines_core::spectra::{classify, plane_spectrum, star_spectrum, ClassLabel};
use clines_core::{Fe, Geometry, IdSet};

#[derive(Debug, Clone, Serialize)]
pub struct FingerprintEntry {
    pub planes: String,
    pub stars: String,
    pub label: ClassLabel,
    /// Number of distinct classes with this spectrum pair.
    pub classes: usize,
    /// Provenance of the first class found, in canonical order.
    pub representative: Vec<ProvenanceStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub q: u32,
    pub max_depth: usize,
    /// Derivation steps attempted.
    pub sequences_explored: usize,
    /// Attempts rejected by the precondition `A ⊆ L`, `B ∩ L = ∅`.
    pub inadmissible: usize,
    pub distinct_classes: usize,
    /// False if a reached class failed verification.
    pub all_verified: bool,
    /// True when the step budget ran out before the search finished.
    pub partial: bool,
    pub fingerprints: Vec<FingerprintEntry>,
}

impl SearchResult {
    pub fn contains(&self, planes: &str, stars: &str) -> bool {
        self.fingerprints
            .iter()
            .any(|f| f.planes == planes && f.stars == stars)
    }
}

struct Search<'a> {
    g: &'a Geometry,
    squares: Vec<Fe>,
    nonsquares: Vec<Fe>,
    sets: HashMap<(Fe, Fe), DerivationSets>,
    expanded: HashSet<(IdSet, usize, u64)>,
    classes: HashSet<IdSet>,
    found: BTreeMap<(String, String), FingerprintEntry>,
    explored: usize,
    inadmissible: usize,
    all_verified: bool,
    budget: usize,
    partial: bool,
}

impl Search<'_> {
    fn record(&mut self, class: &LineClass) {
        if !self.classes.insert(class.lines.clone()) {
            return;
        }
        let ok = verify_cl(self.g, class).map(|r| r.pass).unwrap_or(false);
        self.all_verified &= ok;
        let planes = plane_spectrum(self.g, &class.lines);
        let stars = star_spectrum(self.g, &class.lines);
        let label = classify(self.g.q(), &planes, &stars);
        let key = (planes.to_text(), stars.to_text());
        self.found
            .entry(key.clone())
            .and_modify(|e| e.classes += 1)
            .or_insert(FingerprintEntry {
                planes: key.0,
                stars: key.1,
                label,
                classes: 1,
                representative: class.provenance.clone(),
            });
    }

    fn expand(
        &mut self,
        class: &LineClass,
        next1: usize,
        used2: u64,
        depth: usize,
    ) -> Result<(), ClassError> {
        self.record(class);
        if depth == 0 {
            return Ok(());
        }
        if !self.expanded.insert((class.lines.clone(), next1, used2)) {
            return Ok(());
        }
        for i in next1..self.squares.len() {
            for j in 0..self.nonsquares.len() {
                if used2 & (1 << j) != 0 {
                    continue;
                }
                if self.explored >= self.budget {
                    self.partial = true;
                    return Ok(());
                }
                self.explored += 1;
                let (l1, l2) = (self.squares[i], self.nonsquares[j]);
                let derived = derive_with(class, &self.sets[&(l1, l2)]);
                match derived {
                    Ok(next) => self.expand(&next, i + 1, used2 | (1 << j), depth - 1)?,
                    Err(ClassError::PreconditionViolated { .. }) => self.inadmissible += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    }
}

/// Runs the search from `start` with at most `max_depth` derivation steps and at
/// most `budget` attempted steps.
pub fn search(
    g: &Geometry,
    dec: &OrbitDecomposition,
    start: &LineClass,
    max_depth: usize,
    budget: usize,
) -> Result<SearchResult, ClassError> {
    let f = g.field();
    let squares = f.nonzero_squares();
    let nonsquares = f.nonsquares();
    let mut sets = HashMap::new();
    if max_depth > 0 {
        for &l1 in &squares {
            for &l2 in &nonsquares {
                let pair = DerivationPair::new(f, l1, l2)?;
                sets.insert((l1, l2), derivation_sets(g, dec, pair)?);
            }
        }
    }
    let mut s = Search {
        g,
        squares,
        nonsquares,
        sets,
        expanded: HashSet::new(),
        classes: HashSet::new(),
        found: BTreeMap::new(),
        explored: 0,
        inadmissible: 0,
        all_verified: true,
        budget,
        partial: false,
    };
    s.expand(start, 0, 0, max_depth)?;
    Ok(SearchResult {
        q: g.q(),
        max_depth,
        sequences_explored: s.explored,
        inadmissible: s.inadmissible,
        distinct_classes: s.classes.len(),
        all_verified: s.all_verified,
        partial: s.partial,
        fingerprints: s.found.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clines_core::classes::{bruen_drudge, decompose, derive_sequence};
    use clines_core::Field;

    fn setup(q: u32) -> (Geometry, OrbitDecomposition) {
        let g = Geometry::build(Field::with_order(q).unwrap()).unwrap();
        let dec = decompose(&g).unwrap();
        (g, dec)
    }

    #[test]
    fn depth_zero_is_the_start_class() {
        let (g, dec) = setup(5);
        let bd = bruen_drudge(&dec);
        let r = search(&g, &dec, &bd, 0, 1000).unwrap();
        assert_eq!(r.fingerprints.len(), 1);
        assert_eq!(r.distinct_classes, 1);
        assert_eq!(r.fingerprints[0].label, ClassLabel::BruenDrudge);
    }

    #[test]
    fn budget_marks_partial() {
        let (g, dec) = setup(7);
        let r = search(&g, &dec, &bruen_drudge(&dec), 3, 5).unwrap();
        assert!(r.partial);
        assert_eq!(r.sequences_explored, 5);
    }

    /// Every ordering of every admissible sequence at q = 7 lands on a class the
    /// canonical search reaches.
    #[test]
    fn canonical_order_loses_nothing_q7() {
        let (g, dec) = setup(7);
        let f = g.field();
        let bd = bruen_drudge(&dec);
        let squares = f.nonzero_squares();
        let nonsquares = f.nonsquares();
        let mut canonical = HashSet::new();
        let mut all = HashSet::new();
        let perms = |xs: &[Fe]| -> Vec<Vec<Fe>> {
            let mut out = Vec::new();
            let n = xs.len();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if a != b && b != c && a != c {
                            out.push(vec![xs[a], xs[b], xs[c]]);
                        }
                    }
                }
            }
            out
        };
        for p1 in perms(&squares) {
            for p2 in perms(&nonsquares) {
                for k in 0..=3 {
                    let pairs: Vec<DerivationPair> = (0..k)
                        .map(|i| DerivationPair::new(f, p1[i], p2[i]).unwrap())
                        .collect();
                    if let Ok(c) = derive_sequence(&g, &dec, &bd, &pairs) {
                        all.insert(c.lines.clone());
                        let sorted = pairs.windows(2).all(|w| w[0].lambda1() < w[1].lambda1());
                        if sorted {
                            canonical.insert(c.lines);
                        }
                    }
                }
            }
        }
        assert_eq!(all, canonical);
        let r = search(&g, &dec, &bd, 3, usize::MAX).unwrap();
        assert_eq!(r.distinct_classes, canonical.len());
        assert!(r.all_verified);
    }
}
