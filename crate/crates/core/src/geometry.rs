//! Indexed model of PG(3,q) together with the pencil of elliptic quadrics
//!
//! ```text
//! Q_λ(X) = X1² − ω X2² + λ X4² + X3 X4,   λ ∈ GF(q)
//! ```
//!
//! whose members pairwise meet only in the base point `U3 = (0,0,1,0)`, and whose
//! common tangent plane there is `π : X4 = 0`.
//!
//! Points and planes are normalized 4-tuples (first nonzero coordinate 1) numbered in
//! lexicographic order of their codes; the same tuple has the same id as a point and
//! as a plane. Lines are numbered in lexicographic order of their normalized Plücker
//! tuples `(p01, p02, p03, p12, p13, p23)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field, QuadraticCharacter};

pub type PointId = u32;
pub type PlaneId = u32;
pub type LineId = u32;

pub type Vec4 = [Fe; 4];
pub type Plucker = [Fe; 6];

/// Default largest q accepted by [`Geometry::build`].
pub const DEFAULT_MAX_Q: u32 = 13;

/// Index pairs behind the Plücker coordinates, in storage order.
pub const PLUCKER_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("q = {q} exceeds the configured capacity bound {max_q}")]
    CapacityExceeded { q: u32, max_q: u32 },
    #[error("omega must be a non-square of GF({q})")]
    OmegaNotNonSquare { q: u32 },
    #[error("points {0} and {1} do not span a line")]
    NotALine(PointId, PointId),
}

/// The pencil `Q_λ` for a fixed non-square ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadricPencil {
    omega: Fe,
    half: Fe,
}

impl QuadricPencil {
    pub fn omega(&self) -> Fe {
        self.omega
    }

    #[inline]
    pub fn eval(&self, f: &Field, lambda: Fe, x: &Vec4) -> Fe {
        let a = f.sub(f.square(x[0]), f.mul(self.omega, f.square(x[1])));
        let b = f.add(f.mul(lambda, f.square(x[3])), f.mul(x[2], x[3]));
        f.add(a, b)
    }

    /// Coefficients of the polar plane of `x`: `B_λ(x, ·)` with
    /// `B(X, Y) = (Q(X+Y) − Q(X) − Q(Y)) / 2`.
    pub fn polar(&self, f: &Field, lambda: Fe, x: &Vec4) -> Vec4 {
        [
            x[0],
            f.neg(f.mul(self.omega, x[1])),
            f.mul(self.half, x[3]),
            f.add(f.mul(self.half, x[2]), f.mul(lambda, x[3])),
        ]
    }

    /// Gram matrix of the polar form of `Q_λ`.
    pub fn gram(&self, f: &Field, lambda: Fe) -> [[Fe; 4]; 4] {
        let z = Fe::ZERO;
        [
            [Fe::ONE, z, z, z],
            [z, f.neg(self.omega), z, z],
            [z, z, z, self.half],
            [z, z, self.half, lambda],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineProfile {
    External,
    Tangent(PointId),
    Secant(PointId, PointId),
}

impl LineProfile {
    pub fn meets(&self) -> usize {
        match self {
            LineProfile::External => 0,
            LineProfile::Tangent(_) => 1,
            LineProfile::Secant(..) => 2,
        }
    }
}

/// Position of a line relative to the tangency structure of the pencil.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PencilTangency {
    /// Tangent to exactly one member, at `point`.
    UniqueMember { lambda: Fe, point: PointId },
    /// In π and through U3: tangent to every member at U3.
    PiThroughU3,
    /// In π, missing U3: external to every member.
    PiAvoidingU3,
    /// Off π, tangent to a number of members other than one (the listed ones).
    /// This is the situation of the lines through U3 not in π, which meet every
    /// member in U3 and one further point and so are tangent to none.
    Irregular(Vec<Fe>),
}

/// PG(3,q) with full incidence and the quadric pencil.
#[derive(Debug, Clone)]
pub struct Geometry {
    field: Field,
    pencil: QuadricPencil,
    q: u32,
    coords: Vec<Vec4>,
    plucker: Vec<Plucker>,
    line_points: Vec<PointId>,
    line_planes: Vec<PlaneId>,
    point_lines: Vec<LineId>,
    plane_lines: Vec<LineId>,
    point_index: Vec<u32>,
    line_index: HashMap<Plucker, LineId>,
    /// For each point off π, the unique λ with the point on `E_λ`.
    point_member: Vec<Option<Fe>>,
    u3: PointId,
}

impl Geometry {
    /// Builds the geometry with ω = the canonical non-square and the default capacity.
    pub fn build(field: Field) -> Result<Geometry, GeometryError> {
        let omega = field.canonical_nonsquare();
        Geometry::build_with(field, omega, DEFAULT_MAX_Q)
    }

    pub fn build_with(field: Field, omega: Fe, max_q: u32) -> Result<Geometry, GeometryError> {
        let q = field.order();
        if q > max_q {
            return Err(GeometryError::CapacityExceeded { q, max_q });
        }
        if !field.is_nonsquare(omega) {
            return Err(GeometryError::OmegaNotNonSquare { q });
        }
        let pencil = QuadricPencil {
            omega,
            half: field.half(),
        };

        let qs = q as usize;
        let mut coords = Vec::with_capacity((qs * qs + 1) * (qs + 1));
        let mut point_index = vec![u32::MAX; qs.pow(4)];
        for key in 0..qs.pow(4) {
            let v = decode_key(key, q);
            if v.iter().find(|c| !c.is_zero()) == Some(&Fe::ONE) {
                point_index[key] = coords.len() as u32;
                coords.push(v);
            }
        }

        let mut spans: Vec<(Plucker, [Vec4; 2])> = rref_2x4(&field)
            .into_iter()
            .map(|rows| {
                let mut p = plucker_of(&field, &rows[0], &rows[1]);
                normalize(&field, &mut p);
                (p, rows)
            })
            .collect();
        spans.sort_by_key(|a| a.0);

        let n_lines = spans.len();
        let per_line = qs + 1;
        let mut geometry = Geometry {
            field,
            pencil,
            q,
            coords,
            plucker: Vec::with_capacity(n_lines),
            line_points: Vec::with_capacity(n_lines * per_line),
            line_planes: Vec::with_capacity(n_lines * per_line),
            point_lines: Vec::new(),
            plane_lines: Vec::new(),
            point_index,
            line_index: HashMap::with_capacity(n_lines),
            point_member: Vec::new(),
            u3: 0,
        };
        geometry.u3 = geometry.point_id(&[Fe::ZERO, Fe::ZERO, Fe::ONE, Fe::ZERO]);

        for (id, (p, rows)) in spans.iter().enumerate() {
            geometry.plucker.push(*p);
            geometry.line_index.insert(*p, id as LineId);
            let mut pts = geometry.span_points(&rows[0], &rows[1]);
            pts.sort_unstable();
            geometry.line_points.extend(pts);
            let ker = kernel(&geometry.field, rows);
            debug_assert_eq!(ker.len(), 2);
            let mut pls = geometry.span_points(&ker[0], &ker[1]);
            pls.sort_unstable();
            geometry.line_planes.extend(pls);
        }

        geometry.point_lines = invert(&geometry.line_points, per_line, geometry.coords.len());
        geometry.plane_lines = invert(&geometry.line_planes, per_line, geometry.coords.len());

        let f = &geometry.field;
        let point_member = geometry
            .coords
            .iter()
            .map(|x| {
                if x[3].is_zero() {
                    return None;
                }
                // Q_0(x) + λ x4² = 0.
                let q0 = geometry.pencil.eval(f, Fe::ZERO, x);
                Some(f.neg(f.div(q0, f.square(x[3])).expect("x4 is nonzero")))
            })
            .collect();
        geometry.point_member = point_member;
        Ok(geometry)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn pencil(&self) -> &QuadricPencil {
        &self.pencil
    }

    pub fn omega(&self) -> Fe {
        self.pencil.omega
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.coords.len()
    }

    pub fn num_planes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_lines(&self) -> usize {
        self.plucker.len()
    }

    pub fn point(&self, id: PointId) -> &Vec4 {
        &self.coords[id as usize]
    }

    /// Dual coordinates of a plane.
    pub fn plane(&self, id: PlaneId) -> &Vec4 {
        &self.coords[id as usize]
    }

    pub fn plucker(&self, id: LineId) -> &Plucker {
        &self.plucker[id as usize]
    }

    pub fn line_points(&self, id: LineId) -> &[PointId] {
        let k = self.q as usize + 1;
        &self.line_points[id as usize * k..(id as usize + 1) * k]
    }

    pub fn line_planes(&self, id: LineId) -> &[PlaneId] {
        let k = self.q as usize + 1;
        &self.line_planes[id as usize * k..(id as usize + 1) * k]
    }

    /// The star of a point.
    pub fn lines_through(&self, p: PointId) -> &[LineId] {
        let k = self.star_size();
        &self.point_lines[p as usize * k..(p as usize + 1) * k]
    }

    pub fn lines_in(&self, plane: PlaneId) -> &[LineId] {
        let k = self.star_size();
        &self.plane_lines[plane as usize * k..(plane as usize + 1) * k]
    }

    fn star_size(&self) -> usize {
        let q = self.q as usize;
        q * q + q + 1
    }

    /// Id of an arbitrary nonzero vector's projective point.
    pub fn point_id(&self, v: &Vec4) -> PointId {
        let mut v = *v;
        assert!(normalize(&self.field, &mut v), "zero vector has no point");
        self.point_index[encode_key(&v, self.q)]
    }

    pub fn plane_id(&self, v: &Vec4) -> PlaneId {
        self.point_id(v)
    }

    pub fn line_id(&self, plucker: &Plucker) -> Option<LineId> {
        let mut p = *plucker;
        if !normalize(&self.field, &mut p) {
            return None;
        }
        self.line_index.get(&p).copied()
    }

    pub fn line_through(&self, a: PointId, b: PointId) -> Result<LineId, GeometryError> {
        let p = plucker_of(&self.field, self.point(a), self.point(b));
        self.line_id(&p).ok_or(GeometryError::NotALine(a, b))
    }

    pub fn line_through_vectors(&self, x: &Vec4, y: &Vec4) -> Option<LineId> {
        self.line_id(&plucker_of(&self.field, x, y))
    }

    pub fn incident(&self, p: PointId, plane: PlaneId) -> bool {
        dot(&self.field, self.point(p), self.plane(plane)).is_zero()
    }

    pub fn point_on_line(&self, p: PointId, l: LineId) -> bool {
        self.line_points(l).binary_search(&p).is_ok()
    }

    pub fn line_in_plane(&self, l: LineId, plane: PlaneId) -> bool {
        self.line_planes(l).binary_search(&plane).is_ok()
    }

    /// U3 = (0,0,1,0), the base point of the pencil.
    pub fn u3(&self) -> PointId {
        self.u3
    }

    /// π : X4 = 0, the common tangent plane at U3.
    pub fn pi(&self) -> PlaneId {
        self.plane_id(&[Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ONE])
    }

    pub fn in_pi(&self, p: PointId) -> bool {
        self.point(p)[3].is_zero()
    }

    pub fn line_in_pi(&self, l: LineId) -> bool {
        self.line_points(l).iter().all(|&p| self.in_pi(p))
    }

    /// The point where a line not contained in π meets π.
    pub fn pi_trace(&self, l: LineId) -> Option<PointId> {
        let mut hits = self.line_points(l).iter().filter(|&&p| self.in_pi(p));
        match (hits.next(), hits.next()) {
            (Some(&p), None) => Some(p),
            _ => None,
        }
    }

    /// The λ with `p ∈ E_λ`, for points off π.
    pub fn pencil_member_of(&self, p: PointId) -> Option<Fe> {
        self.point_member[p as usize]
    }

    pub fn eval_pencil(&self, lambda: Fe, p: PointId) -> QuadraticCharacter {
        let v = self.pencil.eval(&self.field, lambda, self.point(p));
        self.field.quadratic_character(v)
    }

    pub fn on_quadric(&self, lambda: Fe, p: PointId) -> bool {
        self.pencil
            .eval(&self.field, lambda, self.point(p))
            .is_zero()
    }

    /// Points of `E_λ`, ascending.
    pub fn quadric_points(&self, lambda: Fe) -> Vec<PointId> {
        (0..self.num_points() as PointId)
            .filter(|&p| self.on_quadric(lambda, p))
            .collect()
    }

    /// Polar plane of a point under ⊥_λ.
    pub fn polar_plane(&self, lambda: Fe, p: PointId) -> PlaneId {
        self.plane_id(&self.pencil.polar(&self.field, lambda, self.point(p)))
    }

    /// Polar line of a line under ⊥_λ: the points conjugate to every point of it.
    pub fn polar_line(&self, lambda: Fe, l: LineId) -> LineId {
        let pts = self.line_points(l);
        let rows = [
            self.pencil.polar(&self.field, lambda, self.point(pts[0])),
            self.pencil.polar(&self.field, lambda, self.point(pts[1])),
        ];
        let ker = kernel(&self.field, &rows);
        self.line_through_vectors(&ker[0], &ker[1])
            .expect("nondegenerate polarity maps lines to lines")
    }

    /// External, tangent or secant to `E_λ`, by counting zeros of `Q_λ` on the line.
    pub fn line_quadric_profile(&self, l: LineId, lambda: Fe) -> LineProfile {
        let mut zeros = self
            .line_points(l)
            .iter()
            .copied()
            .filter(|&p| self.on_quadric(lambda, p));
        match (zeros.next(), zeros.next(), zeros.next()) {
            (None, _, _) => LineProfile::External,
            (Some(a), None, _) => LineProfile::Tangent(a),
            (Some(a), Some(b), None) => LineProfile::Secant(a, b),
            _ => unreachable!("an elliptic quadric contains no line"),
        }
    }

    /// Pencil tangency by scanning every member with [`Geometry::line_quadric_profile`].
    pub fn tangent_pencil_member(&self, l: LineId) -> PencilTangency {
        if self.line_in_pi(l) {
            return if self.point_on_line(self.u3, l) {
                PencilTangency::PiThroughU3
            } else {
                PencilTangency::PiAvoidingU3
            };
        }
        let tangents: Vec<(Fe, PointId)> = self
            .field
            .elements()
            .filter_map(|lambda| match self.line_quadric_profile(l, lambda) {
                LineProfile::Tangent(p) => Some((lambda, p)),
                _ => None,
            })
            .collect();
        match tangents.as_slice() {
            [(lambda, point)] => PencilTangency::UniqueMember {
                lambda: *lambda,
                point: *point,
            },
            _ => PencilTangency::Irregular(tangents.into_iter().map(|(l, _)| l).collect()),
        }
    }

    /// Same classification as [`Geometry::tangent_pencil_member`], computed from the
    /// member of each point: a line off π not through U3 is tangent to `E_λ` iff
    /// exactly one of its affine points lies on `E_λ`.
    pub fn pencil_tangency(&self, l: LineId) -> PencilTangency {
        let pts = self.line_points(l);
        let through_u3 = pts.binary_search(&self.u3).is_ok();
        if self.line_in_pi(l) {
            return if through_u3 {
                PencilTangency::PiThroughU3
            } else {
                PencilTangency::PiAvoidingU3
            };
        }
        if through_u3 {
            return PencilTangency::Irregular(Vec::new());
        }
        let mut counts: Vec<(Fe, PointId, u32)> = Vec::with_capacity(pts.len());
        for &p in pts {
            if let Some(lambda) = self.point_member[p as usize] {
                match counts.iter_mut().find(|(l, _, _)| *l == lambda) {
                    Some(entry) => entry.2 += 1,
                    None => counts.push((lambda, p, 1)),
                }
            }
        }
        let mut singles = counts.iter().filter(|c| c.2 == 1);
        match (singles.next(), singles.next()) {
            (Some(&(lambda, point, _)), None) => PencilTangency::UniqueMember { lambda, point },
            _ => {
                let mut lambdas: Vec<Fe> =
                    counts.iter().filter(|c| c.2 == 1).map(|c| c.0).collect();
                lambdas.sort();
                PencilTangency::Irregular(lambdas)
            }
        }
    }

    fn span_points(&self, a: &Vec4, b: &Vec4) -> Vec<PointId> {
        let f = &self.field;
        let mut out = Vec::with_capacity(self.q as usize + 1);
        out.push(self.point_id(b));
        for t in f.elements() {
            let v: Vec4 = std::array::from_fn(|i| f.add(a[i], f.mul(t, b[i])));
            out.push(self.point_id(&v));
        }
        out
    }
}

fn decode_key(mut key: usize, q: u32) -> Vec4 {
    let mut v = [Fe::ZERO; 4];
    for slot in v.iter_mut().rev() {
        *slot = Fe::from_code((key % q as usize) as u32);
        key /= q as usize;
    }
    v
}

fn encode_key(v: &Vec4, q: u32) -> usize {
    v.iter()
        .fold(0, |acc, c| acc * q as usize + c.code() as usize)
}

/// Scales so the first nonzero entry is 1. Returns false for the zero vector.
pub fn normalize<const N: usize>(f: &Field, v: &mut [Fe; N]) -> bool {
    let Some(lead) = v.iter().copied().find(|c| !c.is_zero()) else {
        return false;
    };
    if lead != Fe::ONE {
        let s = f.inv(lead).expect("lead is nonzero");
        for c in v.iter_mut() {
            *c = f.mul(*c, s);
        }
    }
    true
}

pub fn dot(f: &Field, a: &Vec4, b: &Vec4) -> Fe {
    a.iter()
        .zip(b)
        .fold(Fe::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// Unnormalized Plücker coordinates of the line spanned by `x` and `y`.
pub fn plucker_of(f: &Field, x: &Vec4, y: &Vec4) -> Plucker {
    PLUCKER_PAIRS.map(|(i, j)| f.sub(f.mul(x[i], y[j]), f.mul(x[j], y[i])))
}

/// `p01 p23 − p02 p13 + p03 p12`.
pub fn klein_relation(f: &Field, p: &Plucker) -> Fe {
    let a = f.mul(p[0], p[5]);
    let b = f.mul(p[1], p[4]);
    let c = f.mul(p[2], p[3]);
    f.add(f.sub(a, b), c)
}

/// Every 2x4 matrix in reduced row echelon form of rank 2.
fn rref_2x4(f: &Field) -> Vec<[Vec4; 2]> {
    let elems: Vec<Fe> = f.elements().collect();
    let mut out = Vec::new();
    for c1 in 0..4 {
        for c2 in c1 + 1..4 {
            let free1: Vec<usize> = (c1 + 1..4).filter(|&c| c != c2).collect();
            let free2: Vec<usize> = (c2 + 1..4).collect();
            let n_free = free1.len() + free2.len();
            let combos = elems.len().pow(n_free as u32);
            for mut k in 0..combos {
                let mut r1 = [Fe::ZERO; 4];
                let mut r2 = [Fe::ZERO; 4];
                r1[c1] = Fe::ONE;
                r2[c2] = Fe::ONE;
                for &c in &free1 {
                    r1[c] = elems[k % elems.len()];
                    k /= elems.len();
                }
                for &c in &free2 {
                    r2[c] = elems[k % elems.len()];
                    k /= elems.len();
                }
                out.push([r1, r2]);
            }
        }
    }
    out
}

/// Basis of the solution space of `rows · y = 0`.
pub fn kernel(f: &Field, rows: &[Vec4]) -> Vec<Vec4> {
    let mut m: Vec<Vec4> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..4 {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let s = f.inv(m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = f.mul(*x, s);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c];
                for j in 0..4 {
                    m[i][j] = f.sub(m[i][j], f.mul(factor, m[r][j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (0..4)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = [Fe::ZERO; 4];
            v[free] = Fe::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m[row][free]);
            }
            v
        })
        .collect()
}

fn invert(lists: &[u32], stride: usize, n: usize) -> Vec<u32> {
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (line, chunk) in lists.chunks(stride).enumerate() {
        for &x in chunk {
            buckets[x as usize].push(line as u32);
        }
    }
    buckets.into_iter().flatten().collect()
}
