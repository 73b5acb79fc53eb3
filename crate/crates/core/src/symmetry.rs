//! The collineation group Γ = Ψ × Φ fixing U3 and π and preserving every
//! member of the pencil, with orbit and invariance computations.
//!
//! Points are column vectors and matrices act on the left.

use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::geometry::{normalize, Geometry, LineId, PointId, Vec4};
use crate::idset::IdSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("group closure exceeded {budget} elements")]
    ClosureBudgetExceeded { budget: usize },
    #[error("domain is not closed under the action: {element} maps outside")]
    DomainNotClosed { element: u32 },
    #[error("singular matrix")]
    Singular,
    #[error("no generators given")]
    NoGenerators,
}

/// A projectivity, scaled so its first nonzero entry (row-major) is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjMatrix {
    rows: [[Fe; 4]; 4],
}

impl ProjMatrix {
    pub fn new(f: &Field, rows: [[Fe; 4]; 4]) -> Result<ProjMatrix, SymmetryError> {
        if determinant(f, &rows).is_zero() {
            return Err(SymmetryError::Singular);
        }
        let lead = rows
            .iter()
            .flatten()
            .copied()
            .find(|c| !c.is_zero())
            .expect("nonzero");
        let inv = f.inv(lead).expect("nonzero");
        Ok(ProjMatrix {
            rows: rows.map(|r| r.map(|c| f.mul(c, inv))),
        })
    }

    pub fn identity() -> ProjMatrix {
        let mut rows = [[Fe::ZERO; 4]; 4];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = Fe::ONE;
        }
        ProjMatrix { rows }
    }

    pub fn rows(&self) -> &[[Fe; 4]; 4] {
        &self.rows
    }

    /// Sixteen element codes, row-major.
    pub fn codes(&self) -> [u32; 16] {
        let mut out = [0; 16];
        for (o, c) in out.iter_mut().zip(self.rows.iter().flatten()) {
            *o = c.code();
        }
        out
    }

    pub fn mul(&self, f: &Field, other: &ProjMatrix) -> ProjMatrix {
        let rows = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4).fold(Fe::ZERO, |acc, k| {
                    f.add(acc, f.mul(self.rows[i][k], other.rows[k][j]))
                })
            })
        });
        ProjMatrix::new(f, rows).expect("product of invertible matrices")
    }

    pub fn apply(&self, f: &Field, x: &Vec4) -> Vec4 {
        std::array::from_fn(|i| {
            (0..4).fold(Fe::ZERO, |acc, k| f.add(acc, f.mul(self.rows[i][k], x[k])))
        })
    }
}

impl Serialize for ProjMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.codes().serialize(s)
    }
}

fn determinant(f: &Field, m: &[[Fe; 4]; 4]) -> Fe {
    let mut a = *m;
    let mut det = Fe::ONE;
    for col in 0..4 {
        let Some(piv) = (col..4).find(|&r| !a[r][col].is_zero()) else {
            return Fe::ZERO;
        };
        if piv != col {
            a.swap(piv, col);
            det = f.neg(det);
        }
        det = f.mul(det, a[col][col]);
        let inv = f.inv(a[col][col]).expect("pivot");
        for r in col + 1..4 {
            let factor = f.mul(a[r][col], inv);
            for c in col..4 {
                a[r][c] = f.sub(a[r][c], f.mul(factor, a[col][c]));
            }
        }
    }
    det
}

/// The element of Ψ with parameters `(x, y)`.
pub fn psi(f: &Field, omega: Fe, x: Fe, y: Fe) -> ProjMatrix {
    let (z, o) = (Fe::ZERO, Fe::ONE);
    let two = f.from_int(2);
    let corner = f.sub(f.mul(omega, f.square(y)), f.square(x));
    let rows = [
        [o, z, z, f.neg(x)],
        [z, o, z, f.neg(y)],
        [f.mul(two, x), f.neg(f.mul(two, f.mul(omega, y))), o, corner],
        [z, z, z, o],
    ];
    ProjMatrix::new(f, rows).expect("unipotent")
}

/// The element of Φ with parameters `(z, t, u)`, `z² − ωt² = u² ≠ 0`.
pub fn phi(f: &Field, omega: Fe, z: Fe, t: Fe, u: Fe) -> Option<ProjMatrix> {
    if f.sub(f.square(z), f.mul(omega, f.square(t))) != f.square(u) || u.is_zero() {
        return None;
    }
    let o = Fe::ZERO;
    let rows = [
        [z, f.mul(omega, t), o, o],
        [t, z, o, o],
        [o, o, u, o],
        [o, o, o, u],
    ];
    ProjMatrix::new(f, rows).ok()
}

/// All q² elements of Ψ, by `(x, y)` in code order.
pub fn psi_elements(f: &Field, omega: Fe) -> Vec<ProjMatrix> {
    f.elements()
        .flat_map(|x| f.elements().map(move |y| (x, y)))
        .map(|(x, y)| psi(f, omega, x, y))
        .collect()
}

/// The q+1 elements of Φ, one per projective class (scaled to `u = 1`).
pub fn phi_elements(f: &Field, omega: Fe) -> Vec<ProjMatrix> {
    let mut out: Vec<ProjMatrix> = f
        .elements()
        .flat_map(|z| f.elements().map(move |t| (z, t)))
        .filter_map(|(z, t)| phi(f, omega, z, t, Fe::ONE))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Generators of Γ: Ψ at `(b, 0)` and `(0, b)` for an additive basis `b` of
/// GF(q), and every element of Φ.
pub fn gamma_generators(f: &Field, omega: Fe) -> Vec<ProjMatrix> {
    let basis: Vec<Fe> = (0..f.degree())
        .map(|i| f.element(f.characteristic().pow(i)).expect("monomial code"))
        .collect();
    let mut gens: Vec<ProjMatrix> = basis
        .iter()
        .flat_map(|&b| [psi(f, omega, b, Fe::ZERO), psi(f, omega, Fe::ZERO, b)])
        .collect();
    gens.extend(phi_elements(f, omega));
    gens
}

#[derive(Debug, Clone)]
pub struct GroupClosure {
    pub elements: Vec<ProjMatrix>,
}

impl GroupClosure {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Breadth-first closure under right multiplication by the generators.
pub fn close(
    f: &Field,
    generators: &[ProjMatrix],
    budget: usize,
) -> Result<GroupClosure, SymmetryError> {
    if generators.is_empty() {
        return Err(SymmetryError::NoGenerators);
    }
    let id = ProjMatrix::identity();
    let mut seen = HashSet::from([id]);
    let mut elements = vec![id];
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for gen in generators {
            let next = m.mul(f, gen);
            if seen.insert(next) {
                if seen.len() > budget {
                    return Err(SymmetryError::ClosureBudgetExceeded { budget });
                }
                elements.push(next);
                queue.push_back(next);
            }
        }
    }
    Ok(GroupClosure { elements })
}

pub fn act_on_point(g: &Geometry, m: &ProjMatrix, p: PointId) -> PointId {
    g.point_id(&m.apply(g.field(), g.point(p)))
}

pub fn act_on_line(g: &Geometry, m: &ProjMatrix, l: LineId) -> LineId {
    let pts = g.line_points(l);
    let (a, b) = (act_on_point(g, m, pts[0]), act_on_point(g, m, pts[1]));
    g.line_through(a, b)
        .expect("collineations map lines to lines")
}

/// Whether `m` maps the vector to a multiple of itself.
pub fn fixes_vector(f: &Field, m: &ProjMatrix, v: &Vec4) -> bool {
    let (mut a, mut b) = (m.apply(f, v), *v);
    normalize(f, &mut a) && normalize(f, &mut b) && a == b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Points,
    Lines,
}

fn image(g: &Geometry, m: &ProjMatrix, kind: Domain, x: u32) -> u32 {
    match kind {
        Domain::Points => act_on_point(g, m, x),
        Domain::Lines => act_on_line(g, m, x),
    }
}

/// Orbits of the group generated by `generators` on `domain`, each sorted,
/// ordered by smallest element.
pub fn orbits(
    g: &Geometry,
    generators: &[ProjMatrix],
    kind: Domain,
    domain: &IdSet,
) -> Result<Vec<Vec<u32>>, SymmetryError> {
    let members = domain.to_vec();
    let images: Vec<Vec<u32>> = generators
        .par_iter()
        .map(|m| members.iter().map(|&x| image(g, m, kind, x)).collect())
        .collect();
    let index = |x: u32| members.binary_search(&x).ok();
    for perm in &images {
        if let Some((i, _)) = perm.iter().enumerate().find(|(_, &y)| index(y).is_none()) {
            return Err(SymmetryError::DomainNotClosed {
                element: members[i],
            });
        }
    }
    let mut visited = vec![false; members.len()];
    let mut out = Vec::new();
    for start in 0..members.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut orbit = vec![members[start]];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for perm in &images {
                let j = index(perm[i]).expect("closed");
                if !visited[j] {
                    visited[j] = true;
                    orbit.push(members[j]);
                    stack.push(j);
                }
            }
        }
        orbit.sort();
        out.push(orbit);
    }
    Ok(out)
}

/// Whether every element of `generators` maps `lines` onto itself.
pub fn is_invariant(g: &Geometry, generators: &[ProjMatrix], lines: &IdSet) -> bool {
    generators
        .par_iter()
        .all(|m| lines.iter().all(|l| lines.contains(act_on_line(g, m, l))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(q: u32) -> Geometry {
        Geometry::build(Field::with_order(q).unwrap()).unwrap()
    }

    #[test]
    fn psi_is_elementary_abelian() {
        let g = geo(5);
        let (f, w) = (g.field(), g.omega());
        assert_eq!(psi(f, w, Fe::ZERO, Fe::ZERO), ProjMatrix::identity());
        for x1 in f.elements() {
            for y1 in f.elements() {
                for (x2, y2) in [(Fe::ONE, f.from_int(3)), (f.from_int(2), Fe::ZERO)] {
                    let prod = psi(f, w, x1, y1).mul(f, &psi(f, w, x2, y2));
                    assert_eq!(prod, psi(f, w, f.add(x1, x2), f.add(y1, y2)));
                }
            }
        }
        let all: HashSet<ProjMatrix> = psi_elements(f, w).into_iter().collect();
        assert_eq!(all.len(), 25);
    }

    #[test]
    fn phi_has_q_plus_one_classes() {
        for q in [3, 5, 7, 9] {
            let g = geo(q);
            let phis = phi_elements(g.field(), g.omega());
            assert_eq!(phis.len(), q as usize + 1);
            assert!(phis.contains(&ProjMatrix::identity()));
        }
    }

    #[test]
    fn gamma_fixes_u3_and_pi_and_preserves_members() {
        let g = geo(5);
        let f = g.field();
        let gens = gamma_generators(f, g.omega());
        for m in &gens {
            assert!(fixes_vector(f, m, g.point(g.u3())));
            for p in 0..g.num_points() as PointId {
                let image = act_on_point(&g, m, p);
                assert_eq!(g.in_pi(p), g.in_pi(image));
                for lambda in f.elements() {
                    assert_eq!(g.on_quadric(lambda, p), g.on_quadric(lambda, image));
                }
            }
        }
    }

    #[test]
    fn psi_preserves_every_member_value() {
        let g = geo(7);
        let f = g.field();
        for m in psi_elements(f, g.omega()) {
            for p in (0..g.num_points() as PointId).filter(|&p| !g.in_pi(p)) {
                let image = act_on_point(&g, &m, p);
                for lambda in f.elements() {
                    assert_eq!(g.eval_pencil(lambda, p), g.eval_pencil(lambda, image));
                }
            }
        }
    }

    #[test]
    fn closures() {
        let g = geo(7);
        let f = g.field();
        let gamma = close(f, &gamma_generators(f, g.omega()), 10_000).unwrap();
        assert_eq!(gamma.order(), 392);
        assert_eq!(close(f, &[ProjMatrix::identity()], 10).unwrap().order(), 1);
        assert_eq!(
            close(f, &gamma_generators(f, g.omega()), 100).unwrap_err(),
            SymmetryError::ClosureBudgetExceeded { budget: 100 }
        );
        let g9 = geo(9);
        let psi9 = close(g9.field(), &psi_elements(g9.field(), g9.omega()), 1000).unwrap();
        assert_eq!(psi9.order(), 81);
    }

    #[test]
    fn orbits_on_pi() {
        let g = geo(7);
        let gens = gamma_generators(g.field(), g.omega());
        let pi = IdSet::from_ids(
            g.num_points(),
            (0..g.num_points() as PointId).filter(|&p| g.in_pi(p)),
        );
        let mut sizes: Vec<usize> = orbits(&g, &gens, Domain::Points, &pi)
            .unwrap()
            .iter()
            .map(Vec::len)
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 28, 28]);
        let partial = IdSet::from_ids(g.num_points(), pi.iter().take(5));
        assert!(matches!(
            orbits(&g, &gens, Domain::Points, &partial),
            Err(SymmetryError::DomainNotClosed { .. })
        ));
    }

    #[test]
    fn identity_acts_trivially() {
        let g = geo(3);
        let id = ProjMatrix::identity();
        for l in 0..g.num_lines() as LineId {
            assert_eq!(act_on_line(&g, &id, l), l);
        }
    }
}
