//! Finite fields GF(p^e) for odd p.
//!
//! Elements are small integer codes: the polynomial `c0 + c1 x + ... + c_{e-1} x^{e-1}`
//! is stored as `c0 + c1 p + ... + c_{e-1} p^{e-1}`. Multiplication goes through
//! log/antilog tables over a primitive element; for small fields full addition
//! and multiplication tables are kept as well, since the geometry loops are
//! dominated by field arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order supported by the element encoding.
pub const MAX_ORDER: u32 = 1 << 16;

/// Fields up to this order also carry dense `q x q` add/mul tables.
const DENSE_TABLE_LIMIT: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("extension degree must be at least 1, got {0}")]
    InvalidDegree(u32),
    #[error("field order {p}^{e} exceeds the supported bound {MAX_ORDER}")]
    OrderTooLarge { p: u32, e: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("code {code} is not an element of GF({q})")]
    InvalidCode { code: u32, q: u32 },
}

/// A field element, identified by its code in `[0, q)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fe(u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps a raw code without range checking. Use [`Field::element`] for untrusted input.
    #[inline]
    pub(crate) fn from_code(code: u32) -> Fe {
        Fe(code as u16)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadraticCharacter {
    Zero,
    Square,
    NonSquare,
}

/// GF(p^e) with a fixed modulus and primitive element.
#[derive(Debug, Clone)]
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, ascending coefficients, length `e + 1`.
    modulus: Vec<u32>,
    generator: Fe,
    /// `exp[k] = generator^k` for `k in 0..2(q-1)`, doubled to skip a reduction.
    exp: Vec<u16>,
    /// Discrete log; entry 0 is unused.
    log: Vec<u32>,
    neg: Vec<u16>,
    add_table: Option<Vec<u16>>,
    mul_table: Option<Vec<u16>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(p^e) with the lexicographically smallest irreducible monic modulus
    /// (ascending coefficient tuple) and the smallest-code primitive element.
    pub fn new(p: u32, e: u32) -> Result<Field, FieldError> {
        if p % 2 == 0 || !is_prime(p) {
            return Err(FieldError::NotOddPrime(p));
        }
        if e < 1 {
            return Err(FieldError::InvalidDegree(e));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER as u64)
            .ok_or(FieldError::OrderTooLarge { p, e })? as u32;

        let modulus = smallest_irreducible(p, e);
        let reduction = modulus.clone();
        let poly = PolyRing {
            p,
            modulus: &reduction,
        };
        let generator = (1..q)
            .find(|&c| poly.is_primitive(c, q))
            .expect("every finite field has a primitive element");

        let n = (q - 1) as usize;
        let mut exp = vec![0u16; 2 * n];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for k in 0..n {
            exp[k] = cur as u16;
            exp[k + n] = cur as u16;
            log[cur as usize] = k as u32;
            cur = poly.mul(cur, generator);
        }
        debug_assert_eq!(cur, 1);

        let neg = (0..q).map(|c| poly.neg(c) as u16).collect();

        let mut field = Field {
            p,
            e,
            q,
            modulus,
            generator: Fe::from_code(generator),
            exp,
            log,
            neg,
            add_table: None,
            mul_table: None,
        };
        if q <= DENSE_TABLE_LIMIT {
            let qs = q as usize;
            let mut add = vec![0u16; qs * qs];
            let mut mul = vec![0u16; qs * qs];
            for a in 0..q {
                for b in 0..q {
                    let idx = a as usize * qs + b as usize;
                    add[idx] = poly.add(a, b) as u16;
                    mul[idx] = field.mul_log(Fe::from_code(a), Fe::from_code(b)).0;
                }
            }
            field.add_table = Some(add);
            field.mul_table = Some(mul);
        }
        Ok(field)
    }

    /// Convenience constructor from the field order.
    pub fn with_order(q: u32) -> Result<Field, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotOddPrime(q))?;
        Field::new(p, e)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn element(&self, code: u32) -> Result<Fe, FieldError> {
        if code < self.q {
            Ok(Fe::from_code(code))
        } else {
            Err(FieldError::InvalidCode { code, q: self.q })
        }
    }

    /// All elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(Fe::from_code)
    }

    /// Image of an integer under the prime-field embedding.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe::from_code(n.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.add_table {
            Some(t) => Fe(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => Fe::from_code(
                PolyRing {
                    p: self.p,
                    modulus: &self.modulus,
                }
                .add(a.code(), b.code()),
            ),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.mul_table {
            Some(t) => Fe(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => self.mul_log(a, b),
        }
    }

    #[inline]
    fn mul_log(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let k = self.log[a.0 as usize] + self.log[b.0 as usize];
        Fe(self.exp[k as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.q - 1;
        let k = (n - self.log[a.0 as usize]) % n;
        Ok(Fe(self.exp[k as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n`, with `0^0 = 1`.
    pub fn pow(&self, a: Fe, n: u64) -> Fe {
        if n == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let ord = (self.q - 1) as u64;
        let k = (self.log[a.0 as usize] as u64 * (n % ord)) % ord;
        Fe(self.exp[k as usize])
    }

    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    /// Discrete log to the base of [`Field::generator`].
    pub fn log(&self, a: Fe) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.0 as usize])
    }

    pub fn quadratic_character(&self, a: Fe) -> QuadraticCharacter {
        if a.is_zero() {
            QuadraticCharacter::Zero
        } else if self.log[a.0 as usize] % 2 == 0 {
            QuadraticCharacter::Square
        } else {
            QuadraticCharacter::NonSquare
        }
    }

    pub fn is_nonzero_square(&self, a: Fe) -> bool {
        self.quadratic_character(a) == QuadraticCharacter::Square
    }

    pub fn is_nonsquare(&self, a: Fe) -> bool {
        self.quadratic_character(a) == QuadraticCharacter::NonSquare
    }

    /// The smallest-code non-square; the default choice of omega.
    pub fn canonical_nonsquare(&self) -> Fe {
        self.elements()
            .find(|&a| self.is_nonsquare(a))
            .expect("odd order fields have non-squares")
    }

    /// Nonzero squares in code order.
    pub fn nonzero_squares(&self) -> Vec<Fe> {
        self.elements()
            .filter(|&a| self.is_nonzero_square(a))
            .collect()
    }

    pub fn nonsquares(&self) -> Vec<Fe> {
        self.elements().filter(|&a| self.is_nonsquare(a)).collect()
    }

    /// Inverse of 2, always defined since p is odd.
    pub fn half(&self) -> Fe {
        self.inv(self.from_int(2))
            .expect("2 is a unit in odd characteristic")
    }
}

/// Polynomial arithmetic over GF(p) on base-p codes, modulo a monic modulus.
struct PolyRing<'a> {
    p: u32,
    modulus: &'a [u32],
}

impl PolyRing<'_> {
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn digits(&self, mut code: u32) -> Vec<u32> {
        let mut d = vec![0; self.degree()];
        for slot in d.iter_mut() {
            *slot = code % self.p;
            code /= self.p;
        }
        d
    }

    fn encode(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    fn neg(&self, a: u32) -> u32 {
        let d: Vec<u32> = self
            .digits(a)
            .into_iter()
            .map(|c| (self.p - c) % self.p)
            .collect();
        self.encode(&d)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let (da, db) = (self.digits(a), self.digits(b));
        let e = self.degree();
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in self.modulus[..e].iter().enumerate() {
                let idx = k - e + i;
                prod[idx] = (prod[idx] + p - (c * m as u64) % p) % p;
            }
        }
        let low: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.encode(&low)
    }

    fn pow(&self, a: u32, mut n: u64) -> u32 {
        let (mut base, mut acc) = (a, 1);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    fn is_primitive(&self, a: u32, q: u32) -> bool {
        let n = (q - 1) as u64;
        if a == 0 {
            return false;
        }
        if n == 1 {
            return a == 1;
        }
        prime_factors(n)
            .into_iter()
            .all(|r| self.pow(a, n / r) != 1)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Decomposes `q = p^e` with `p` an odd prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 3 || q % 2 == 0 {
        return None;
    }
    let p = (3..=q).find(|d| q % d == 0)?;
    let (mut r, mut e) = (q, 0);
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

/// Remainder of `f` modulo monic `g`, coefficients ascending over GF(p).
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &c) in g.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// All monic polynomials of degree `d`, ascending-coefficient lexicographic order.
fn monic_polys(p: u32, d: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = p.pow(d);
    (0..count).map(move |mut n| {
        // Lexicographic on (c0, c1, ..) means c0 varies slowest.
        let mut coeffs = vec![0; d as usize + 1];
        for k in (0..d as usize).rev() {
            coeffs[k] = n % p;
            n /= p;
        }
        coeffs[d as usize] = 1;
        coeffs
    })
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let e = (f.len() - 1) as u32;
    (1..=e / 2).all(|d| monic_polys(p, d).all(|g| poly_rem(f, &g, p).iter().any(|&c| c != 0)))
}

fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    if e == 1 {
        return vec![0, 1];
    }
    monic_polys(p, e)
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}
