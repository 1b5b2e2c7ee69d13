//! Arithmetic in GF(q) for small prime powers and the projective-space
//! primitives built on top of it.
//!
//! Elements are encoded as a single byte: the coefficient vector
//! `(c_0, ..., c_{k-1})` over GF(p) is stored as `sum c_i p^i`. All four
//! operations are table lookups after construction.

use std::fmt;

use crate::error::{Error, Result};

/// Largest field order supported.
pub const MAX_FIELD_ORDER: usize = 16;
/// Largest projective dimension supported.
pub const MAX_PROJECTIVE_DIM: usize = 7;

/// Description of GF(p^k) by its characteristic, degree and defining polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u8,
    pub k: u8,
    /// Monic modulus, low coefficient first, length `k + 1`. Unused when `k == 1`.
    pub modulus: Vec<u8>,
}

impl FieldSpec {
    /// The field of order `q` with the shipped modulus.
    pub fn standard(q: usize) -> Result<FieldSpec> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::Config(format!("{q} is not a prime power")))?;
        let modulus = match (p, k) {
            (_, 1) => vec![0, 1],
            (2, 2) => vec![1, 1, 1],
            (2, 3) => vec![1, 1, 0, 1],
            (2, 4) => vec![1, 1, 0, 0, 1],
            (3, 2) => vec![1, 0, 1],
            _ => return Err(Error::Config(format!("no shipped modulus for GF({q})"))),
        };
        Ok(FieldSpec { p, k, modulus })
    }

    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.k as u32)
    }
}

/// Returns `(p, k)` with `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: usize) -> Option<(u8, u8)> {
    if q < 2 || q > 255 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut k = 0u8;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p as u8, k))
}

fn is_prime(n: u8) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

// Polynomials over GF(p), low coefficient first, trailing zeros trimmed.
fn poly_trim(mut a: Vec<u8>) -> Vec<u8> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u8], m: &[u8], p: u8) -> Vec<u8> {
    let p = p as u32;
    let mut r: Vec<u8> = poly_trim(a.to_vec());
    let m = poly_trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = (1..p).find(|x| (x * m[dm] as u32) % p == 1).unwrap();
    while r.len() > dm {
        let dr = r.len() - 1;
        let factor = (r[dr] as u32 * lead_inv) % p;
        for i in 0..=dm {
            let idx = dr - dm + i;
            let sub = (factor * m[i] as u32) % p;
            r[idx] = ((r[idx] as u32 + p - sub) % p) as u8;
        }
        r = poly_trim(r);
    }
    r
}

/// Trial factorization: no monic factor of degree `1..=k/2` divides `m`.
fn is_irreducible(m: &[u8], p: u8) -> bool {
    let k = m.len() - 1;
    for d in 1..=k / 2 {
        let count = (p as usize).pow(d as u32);
        for code in 0..count {
            let mut f = vec![0u8; d + 1];
            let mut c = code;
            for slot in f.iter_mut().take(d) {
                *slot = (c % p as usize) as u8;
                c /= p as usize;
            }
            f[d] = 1;
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Identifies the field an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldId(u32);

/// An element of a particular [`Field`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: FieldId,
    code: u8,
}

impl FieldElement {
    pub fn code(self) -> u8 {
        self.code
    }
    pub fn field_id(self) -> FieldId {
        self.field
    }
}

/// GF(q) with precomputed operation tables.
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    spec: FieldSpec,
    id: FieldId,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    conj: Option<Vec<u8>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Field> {
        if !is_prime(spec.p) || spec.k == 0 {
            return Err(Error::Config(format!(
                "invalid characteristic/degree p={} k={}",
                spec.p, spec.k
            )));
        }
        let q = spec.order();
        if q > MAX_FIELD_ORDER {
            return Err(Error::Config(format!(
                "field order {q} exceeds the supported bound {MAX_FIELD_ORDER}"
            )));
        }
        let k = spec.k as usize;
        let p = spec.p as usize;
        let modulus = if k == 1 { vec![0, 1] } else { spec.modulus.clone() };
        if k > 1 {
            if modulus.len() != k + 1 || modulus[k] != 1 || modulus.iter().any(|&c| c as usize >= p) {
                return Err(Error::Config(format!(
                    "modulus {:?} is not a monic degree-{k} polynomial over GF({p})",
                    spec.modulus
                )));
            }
            if !is_irreducible(&modulus, spec.p) {
                return Err(Error::Config(format!(
                    "modulus {:?} is reducible over GF({p})",
                    spec.modulus
                )));
            }
        }

        let to_vec = |code: usize| -> Vec<u8> {
            let mut c = code;
            (0..k)
                .map(|_| {
                    let d = (c % p) as u8;
                    c /= p;
                    d
                })
                .collect()
        };
        let to_code = |v: &[u8]| -> u8 {
            v.iter().rev().fold(0usize, |acc, &d| acc * p + d as usize) as u8
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let va = to_vec(a);
            for b in 0..q {
                let vb = to_vec(b);
                let sum: Vec<u8> = va
                    .iter()
                    .zip(&vb)
                    .map(|(x, y)| ((*x as usize + *y as usize) % p) as u8)
                    .collect();
                add[a * q + b] = to_code(&sum);

                let mut prod = vec![0u8; 2 * k - 1];
                for (i, x) in va.iter().enumerate() {
                    for (j, y) in vb.iter().enumerate() {
                        prod[i + j] = ((prod[i + j] as usize + *x as usize * *y as usize) % p) as u8;
                    }
                }
                let mut r = if k == 1 { poly_trim(prod) } else { poly_rem(&prod, &modulus, spec.p) };
                r.resize(k, 0);
                mul[a * q + b] = to_code(&r);
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u8;
            }
        }
        let conj = (k % 2 == 0).then(|| {
            let e = p.pow((k / 2) as u32);
            (0..q)
                .map(|a| (0..e).fold(1u8, |acc, _| mul[acc as usize * q + a]))
                .collect()
        });

        let modcode = modulus.iter().rev().fold(0u32, |acc, &d| acc * p as u32 + d as u32);
        let id = FieldId(((spec.p as u32) << 24) | ((spec.k as u32) << 16) | modcode);
        Ok(Field { spec, id, q, add, mul, neg, inv, conj })
    }

    pub fn standard(q: usize) -> Result<Field> {
        Field::new(FieldSpec::standard(q)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn order(&self) -> usize {
        self.q
    }
    pub fn characteristic(&self) -> u8 {
        self.spec.p
    }
    pub fn has_conjugation(&self) -> bool {
        self.conj.is_some()
    }

    /// Element from its byte code.
    pub fn element(&self, code: u8) -> Result<FieldElement> {
        if (code as usize) < self.q {
            Ok(FieldElement { field: self.id, code })
        } else {
            Err(Error::Usage(format!("code {code} out of range for GF({})", self.q)))
        }
    }

    /// Element from its coefficient vector over GF(p), low coefficient first.
    pub fn from_coeffs(&self, coeffs: &[u8]) -> Result<FieldElement> {
        let p = self.spec.p as usize;
        if coeffs.len() > self.spec.k as usize || coeffs.iter().any(|&c| c as usize >= p) {
            return Err(Error::Usage(format!("{coeffs:?} is not a GF({}) element", self.q)));
        }
        let code = coeffs.iter().rev().fold(0usize, |acc, &d| acc * p + d as usize);
        self.element(code as u8)
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u8> {
        let p = self.spec.p as usize;
        let mut c = a.code as usize;
        (0..self.spec.k)
            .map(|_| {
                let d = (c % p) as u8;
                c /= p;
                d
            })
            .collect()
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: self.id, code: 0 }
    }
    pub fn one(&self) -> FieldElement {
        FieldElement { field: self.id, code: 1 }
    }
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q as u8).map(|code| FieldElement { field: self.id, code })
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if a.field == self.id {
            Ok(())
        } else {
            Err(Error::Usage(format!("element does not belong to GF({})", self.q)))
        }
    }

    fn wrap(&self, code: u8) -> FieldElement {
        FieldElement { field: self.id, code }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.add_raw(a.code, b.code)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.sub_raw(a.code, b.code)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap(self.mul_raw(a.code, b.code)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        Ok(self.wrap(self.neg_raw(a.code)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.code == 0 {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(self.wrap(self.inv_raw(a.code)))
    }

    /// The involution `x -> x^(p^(k/2))`, defined for even degree only.
    pub fn conj(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        match &self.conj {
            Some(t) => Ok(self.wrap(t[a.code as usize])),
            None => Err(Error::Usage(format!(
                "GF({}) has odd degree, no conjugation",
                self.q
            ))),
        }
    }

    #[inline]
    pub fn add_raw(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn sub_raw(&self, a: u8, b: u8) -> u8 {
        self.add_raw(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn neg_raw(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    /// Caller guarantees `a != 0`.
    #[inline]
    pub fn inv_raw(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }
    /// Identity on odd-degree fields.
    #[inline]
    pub fn conj_raw(&self, a: u8) -> u8 {
        match &self.conj {
            Some(t) => t[a as usize],
            None => a,
        }
    }

    /// Basis of the right kernel `{x : M x = 0}` of a row-major matrix.
    pub fn kernel(&self, rows: &[Vec<u8>], ncols: usize) -> Vec<Vec<u8>> {
        let mut m: Vec<Vec<u8>> = rows.to_vec();
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, pr);
            let inv = self.inv_raw(m[r][c]);
            for x in m[r].iter_mut() {
                *x = self.mul_raw(*x, inv);
            }
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    for j in 0..ncols {
                        let t = self.mul_raw(f, m[r][j]);
                        m[i][j] = self.sub_raw(m[i][j], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.len() {
                break;
            }
        }
        (0..ncols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![0u8; ncols];
                v[free] = 1;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = self.neg_raw(m[row][free]);
                }
                v
            })
            .collect()
    }
}

/// A point of PG(n, q) in normalized coordinates (first nonzero entry is 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    coords: Vec<u8>,
}

impl ProjectivePoint {
    /// Normalizes a nonzero vector of element codes.
    pub fn new(field: &Field, coords: &[u8]) -> Result<ProjectivePoint> {
        if coords.iter().any(|&c| c as usize >= field.order()) {
            return Err(Error::Usage(format!("{coords:?} has entries outside GF({})", field.order())));
        }
        normalize(field, coords)
            .map(|coords| ProjectivePoint { coords })
            .ok_or_else(|| Error::Domain("the zero vector is not a projective point".into()))
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    /// Projective dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Scales a vector so its first nonzero entry is 1; `None` for the zero vector.
pub fn normalize(field: &Field, v: &[u8]) -> Option<Vec<u8>> {
    let lead = *v.iter().find(|&&c| c != 0)?;
    let s = field.inv_raw(lead);
    Some(v.iter().map(|&c| field.mul_raw(c, s)).collect())
}

/// All points of PG(n, q), in lexicographic order of normalized coordinates.
pub fn pg_points(n: usize, field: &Field) -> Result<Vec<ProjectivePoint>> {
    if n == 0 || n > MAX_PROJECTIVE_DIM {
        return Err(Error::Config(format!(
            "projective dimension {n} outside 1..={MAX_PROJECTIVE_DIM}"
        )));
    }
    let q = field.order();
    let mut out = Vec::new();
    // A vector whose leading 1 sits further right is lexicographically smaller.
    for lead in (0..=n).rev() {
        let tail = n - lead;
        let count = q.pow(tail as u32);
        for code in 0..count {
            let mut coords = vec![0u8; n + 1];
            coords[lead] = 1;
            let mut c = code;
            for pos in (lead + 1..=n).rev() {
                coords[pos] = (c % q) as u8;
                c /= q;
            }
            out.push(ProjectivePoint { coords });
        }
    }
    Ok(out)
}

/// The q+1 points of the line through `a` and `b`, sorted.
pub fn pg_line(field: &Field, a: &ProjectivePoint, b: &ProjectivePoint) -> Result<Vec<ProjectivePoint>> {
    if a.coords.len() != b.coords.len() {
        return Err(Error::Usage("points from different projective spaces".into()));
    }
    if a == b {
        return Err(Error::Domain("a line needs two distinct points".into()));
    }
    let mut pts = vec![a.clone(), b.clone()];
    for lambda in 1..field.order() as u8 {
        let v: Vec<u8> = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(&x, &y)| field.add_raw(x, field.mul_raw(lambda, y)))
            .collect();
        pts.push(ProjectivePoint { coords: normalize(field, &v).expect("distinct points are independent") });
    }
    pts.sort();
    pts.dedup();
    Ok(pts)
}
