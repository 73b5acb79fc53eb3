//! Plane and star characters of line sets, their `α^i` text form, and
//! spectrum fingerprints of the known families.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::Field;
use crate::geometry::Geometry;
use crate::idset::IdSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Planes,
    Stars,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterSpectrum {
    pub kind: SpectrumKind,
    /// Character value to the number of planes (or points) attaining it.
    pub entries: BTreeMap<u32, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumParseError {
    #[error("malformed spectrum term {0:?}")]
    BadTerm(String),
    #[error("value {0} listed twice")]
    Duplicate(u32),
}

impl CharacterSpectrum {
    pub fn from_counts(kind: SpectrumKind, counts: &[u32]) -> CharacterSpectrum {
        let mut entries = BTreeMap::new();
        for &c in counts {
            *entries.entry(c).or_insert(0) += 1;
        }
        CharacterSpectrum { kind, entries }
    }

    pub fn support(&self) -> BTreeSet<u32> {
        self.entries.keys().copied().collect()
    }

    /// Number of planes or points.
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.values().map(|&m| m as u64).sum()
    }

    /// `Σ value·multiplicity`, which is `|L|(q+1)` for a line set `L`.
    pub fn weighted_sum(&self) -> u64 {
        self.entries
            .iter()
            .map(|(&v, &m)| v as u64 * m as u64)
            .sum()
    }

    /// Spectrum of the complementary line set: `value ↦ q²+q+1 − value`.
    pub fn complement(&self, q: u32) -> CharacterSpectrum {
        let n = q * q + q + 1;
        CharacterSpectrum {
            kind: self.kind,
            entries: self.entries.iter().map(|(&v, &m)| (n - v, m)).collect(),
        }
    }

    /// Ascending `value^multiplicity` terms joined by `", "`; multiplicity 1 bare.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(v, m)| {
                if *m == 1 {
                    v.to_string()
                } else {
                    format!("{v}^{m}")
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn parse(kind: SpectrumKind, text: &str) -> Result<CharacterSpectrum, SpectrumParseError> {
        let mut entries = BTreeMap::new();
        for term in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || SpectrumParseError::BadTerm(term.to_string());
            let (v, m) = match term.split_once('^') {
                Some((v, m)) => (v.trim(), m.trim()),
                None => (term, "1"),
            };
            let v: u32 = v.parse().map_err(|_| bad())?;
            let m: u32 = m.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            if entries.insert(v, m).is_some() {
                return Err(SpectrumParseError::Duplicate(v));
            }
        }
        Ok(CharacterSpectrum { kind, entries })
    }
}

impl fmt::Display for CharacterSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn spectrum_string(s: &CharacterSpectrum) -> String {
    s.to_text()
}

/// `|L ∩ plane|` for every plane, by plane id.
pub fn plane_characters(g: &Geometry, lines: &IdSet) -> Vec<u32> {
    let mut counts = vec![0u32; g.num_planes()];
    for l in lines.iter() {
        for &p in g.line_planes(l) {
            counts[p as usize] += 1;
        }
    }
    counts
}

/// `|L ∩ star(P)|` for every point, by point id.
pub fn star_characters(g: &Geometry, lines: &IdSet) -> Vec<u32> {
    let mut counts = vec![0u32; g.num_points()];
    for l in lines.iter() {
        for &p in g.line_points(l) {
            counts[p as usize] += 1;
        }
    }
    counts
}

pub fn plane_spectrum(g: &Geometry, lines: &IdSet) -> CharacterSpectrum {
    CharacterSpectrum::from_counts(SpectrumKind::Planes, &plane_characters(g, lines))
}

pub fn star_spectrum(g: &Geometry, lines: &IdSet) -> CharacterSpectrum {
    CharacterSpectrum::from_counts(SpectrumKind::Stars, &star_characters(g, lines))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassLabel {
    BruenDrudge,
    PerturbedBd,
    DerivedNew,
    Unknown,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::BruenDrudge => "bruen-drudge",
            ClassLabel::PerturbedBd => "perturbed-bd",
            ClassLabel::DerivedNew => "derived-new",
            ClassLabel::Unknown => "unknown",
        })
    }
}

/// Closed-form character values of a family, evaluated at one q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyFingerprint {
    pub label: ClassLabel,
    pub planes: BTreeSet<u32>,
    pub stars: BTreeSet<u32>,
}

fn values(xs: &[i64]) -> BTreeSet<u32> {
    xs.iter().filter(|&&x| x >= 0).map(|&x| x as u32).collect()
}

pub fn bruen_drudge_fingerprint(q: u32) -> FamilyFingerprint {
    let q = q as i64;
    FamilyFingerprint {
        label: ClassLabel::BruenDrudge,
        planes: values(&[q * q + (q + 1) / 2, q * (q - 1) / 2, q * (q + 1) / 2 + 1]),
        stars: values(&[(q + 1) / 2, q * (q + 1) / 2, q * (q + 1) / 2 + q + 1]),
    }
}

pub fn perturbed_fingerprint(q: u32) -> FamilyFingerprint {
    let q = q as i64;
    FamilyFingerprint {
        label: ClassLabel::PerturbedBd,
        planes: values(&[
            (q + 1) / 2,
            q * (q - 1) / 2 - 1,
            q * (q + 1) / 2,
            q * (q + 1) / 2 + q + 1,
            q * q + (q - 1) / 2,
        ]),
        stars: values(&[
            (q + 3) / 2,
            q * (q - 1) / 2,
            q * (q + 1) / 2 + 1,
            q * (q + 1) / 2 + q + 2,
            q * q + (q + 1) / 2,
        ]),
    }
}

/// Plane values of a once-derived class; the last term is `q(q−1)/2 − 2(q+1)`.
pub fn derived_plane_values(q: u32) -> BTreeSet<u32> {
    let qi = q as i64;
    derived_plane_terms(q, qi * (qi - 1) / 2 - 2 * (qi + 1))
}

/// The plane value list as printed in the source statement, whose last term
/// reads `q(q+1)/2 − 2(q+1)`.
pub fn derived_plane_values_as_printed(q: u32) -> BTreeSet<u32> {
    let qi = q as i64;
    derived_plane_terms(q, qi * (qi + 1) / 2 - 2 * (qi + 1))
}

fn derived_plane_terms(q: u32, last: i64) -> BTreeSet<u32> {
    let q = q as i64;
    let h = q * (q - 1) / 2;
    values(&[
        q * q + (q + 1) / 2,
        q * q - 3 * (q + 1) / 2,
        h + 3 * (q + 1),
        h + 2 * (q + 1),
        h + q + 1,
        h,
        h - (q + 1),
        last,
    ])
}

pub fn derived_star_values(q: u32) -> BTreeSet<u32> {
    let q = q as i64;
    let h = q * (q + 1) / 2;
    values(&[
        (q + 1) / 2,
        5 * (q + 1) / 2,
        h - 2 * (q + 1),
        h - (q + 1),
        h,
        h + q + 1,
        h + 2 * (q + 1),
        h + 3 * (q + 1),
    ])
}

pub fn derived_fingerprint(q: u32) -> FamilyFingerprint {
    FamilyFingerprint {
        label: ClassLabel::DerivedNew,
        planes: derived_plane_values(q),
        stars: derived_star_values(q),
    }
}

/// Star value of a point of `E ∖ {U3}` in a derived class.
pub fn derived_marker(q: u32) -> u32 {
    5 * (q + 1) / 2
}

/// Separates the derived family from the classes of parameter (q²−1)/2 built
/// from X ∪ Y or X ∪ Z, which attain `q²+q+1`.
pub fn full_star_marker(q: u32) -> u32 {
    q * q + q + 1
}

/// Necessary-condition classification by character supports. Equal labels say
/// nothing about projective equivalence; different labels rule it out.
pub fn classify(q: u32, planes: &CharacterSpectrum, stars: &CharacterSpectrum) -> ClassLabel {
    let (ps, ss) = (planes.support(), stars.support());
    let fits = |fp: &FamilyFingerprint| ps.is_subset(&fp.planes) && ss.is_subset(&fp.stars);
    if fits(&bruen_drudge_fingerprint(q)) {
        return ClassLabel::BruenDrudge;
    }
    if fits(&perturbed_fingerprint(q)) {
        return ClassLabel::PerturbedBd;
    }
    let full = full_star_marker(q);
    if q >= 7
        && fits(&derived_fingerprint(q))
        && ss.contains(&derived_marker(q))
        && !ps.contains(&full)
        && !ss.contains(&full)
    {
        return ClassLabel::DerivedNew;
    }
    ClassLabel::Unknown
}

/// Whether nonzero squares `a1..a4` and non-squares `b1..b4`, all different from
/// λ1 and λ2, realize all four square/non-square patterns of `(x − λ1, x − λ2)`.
/// When they do, a once-derived class has exactly eight plane and eight star values.
pub fn eight_character_conditions(f: &Field, lambda1: crate::Fe, lambda2: crate::Fe) -> bool {
    let pattern = |x| {
        (
            f.is_nonzero_square(f.sub(x, lambda1)),
            f.is_nonzero_square(f.sub(x, lambda2)),
        )
    };
    let covers = |pool: Vec<crate::Fe>| {
        let seen: BTreeSet<(bool, bool)> = pool
            .into_iter()
            .filter(|&x| x != lambda1 && x != lambda2)
            .map(pattern)
            .collect();
        seen.len() == 4
    };
    covers(f.nonzero_squares()) && covers(f.nonsquares())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_form() {
        let s = CharacterSpectrum {
            kind: SpectrumKind::Planes,
            entries: BTreeMap::from([(53, 1), (13, 49), (21, 126)]),
        };
        assert_eq!(s.to_text(), "13^49, 21^126, 53");
        assert_eq!(
            CharacterSpectrum::parse(SpectrumKind::Planes, &s.to_text()).unwrap(),
            s
        );
        let empty = CharacterSpectrum::from_counts(SpectrumKind::Planes, &[0; 40]);
        assert_eq!(spectrum_string(&empty), "0^40");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(CharacterSpectrum::parse(SpectrumKind::Stars, "4, x^2").is_err());
        assert!(CharacterSpectrum::parse(SpectrumKind::Stars, "4^0").is_err());
        assert_eq!(
            CharacterSpectrum::parse(SpectrumKind::Stars, "4, 4^2"),
            Err(SpectrumParseError::Duplicate(4))
        );
    }

    #[test]
    fn fingerprints_at_q5_and_q7() {
        assert_eq!(
            bruen_drudge_fingerprint(5).planes,
            BTreeSet::from([28, 10, 16])
        );
        assert_eq!(
            perturbed_fingerprint(7).stars,
            BTreeSet::from([5, 21, 29, 37, 53])
        );
        assert_eq!(derived_plane_values(11).len(), 8);
        assert!(derived_plane_values(9).contains(&16));
        assert!(!derived_plane_values_as_printed(9).contains(&16));
        assert_eq!(derived_marker(7), 20);
    }

    #[test]
    fn star_of_a_point() {
        let g = Geometry::build(Field::with_order(3).unwrap()).unwrap();
        let star = IdSet::from_ids(g.num_lines(), g.lines_through(0).iter().copied());
        let s = star_spectrum(&g, &star);
        assert_eq!(s.entries, BTreeMap::from([(1, 39), (13, 1)]));
        let p = plane_spectrum(&g, &star);
        assert_eq!(p.weighted_sum(), 13 * 4);
        assert_eq!(p.entries, BTreeMap::from([(0, 27), (4, 13)]));
    }

    proptest! {
        #[test]
        fn complement_is_an_involution(values in proptest::collection::vec(0u32..=57, 1..60)) {
            let s = CharacterSpectrum::from_counts(SpectrumKind::Stars, &values);
            prop_assert_eq!(s.complement(7).complement(7), s.clone());
            prop_assert_eq!(s.complement(7).total_multiplicity(), s.total_multiplicity());
        }
    }
}
