//! Classical polar spaces from alternating, quadratic and hermitian forms.
//!
//! Descriptor convention: `sp:<n>:<q>` names the vector dimension `n`
//! (so `sp:6:2` lives in PG(5,2)); the quadric and hermitian kinds name the
//! projective dimension (`q+:5:2` is the Klein quadric in PG(5,2)).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{pg_line, pg_points, Field, FieldSpec, ProjectivePoint};
use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, PointSet};

/// Ambient projective spaces larger than this are refused.
pub const MAX_AMBIENT_POINTS: usize = 20_000;
/// Polar spaces with more points than this are refused.
pub const MAX_POLAR_POINTS: usize = 4_096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    Symplectic,
    QuadraticParabolic,
    QuadraticHyperbolic,
    QuadraticElliptic,
    Hermitian,
}

impl FormKind {
    pub fn is_quadratic(self) -> bool {
        matches!(
            self,
            FormKind::QuadraticParabolic | FormKind::QuadraticHyperbolic | FormKind::QuadraticElliptic
        )
    }

    fn prefix(self) -> &'static str {
        match self {
            FormKind::Symplectic => "sp",
            FormKind::QuadraticParabolic => "q",
            FormKind::QuadraticHyperbolic => "q+",
            FormKind::QuadraticElliptic => "q-",
            FormKind::Hermitian => "herm",
        }
    }
}

/// A form on GF(q)^dim. `gram` is the (sesqui)bilinear part; for quadratic
/// kinds it is the polarization of the upper-triangular `quadratic` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSpec {
    pub kind: FormKind,
    pub dim: usize,
    pub field: FieldSpec,
    pub gram: Vec<Vec<u8>>,
    pub quadratic: Option<Vec<Vec<u8>>>,
}

impl FormSpec {
    /// Block-diagonal pairs `x_{2i} y_{2i+1} - x_{2i+1} y_{2i}` on GF(q)^dim.
    pub fn symplectic(dim: usize, q: usize) -> Result<FormSpec> {
        if dim % 2 != 0 || dim < 2 {
            return Err(Error::Config(format!("symplectic forms need even dimension, got {dim}")));
        }
        let field = Field::standard(q)?;
        let mut gram = vec![vec![0u8; dim]; dim];
        for i in (0..dim).step_by(2) {
            gram[i][i + 1] = 1;
            gram[i + 1][i] = field.neg_raw(1);
        }
        Ok(FormSpec { kind: FormKind::Symplectic, dim, field: field.spec().clone(), gram, quadratic: None })
    }

    /// `x0 x1 + x2 x3 + ...` on GF(q)^dim, dim even.
    pub fn hyperbolic(dim: usize, q: usize) -> Result<FormSpec> {
        if dim % 2 != 0 || dim < 2 {
            return Err(Error::Config(format!("hyperbolic quadrics need even vector dimension, got {dim}")));
        }
        let mut c = vec![vec![0u8; dim]; dim];
        for i in (0..dim).step_by(2) {
            c[i][i + 1] = 1;
        }
        FormSpec::quadratic(FormKind::QuadraticHyperbolic, dim, q, c)
    }

    /// `x0^2 + x1 x2 + x3 x4 + ...` on GF(q)^dim, dim odd.
    pub fn parabolic(dim: usize, q: usize) -> Result<FormSpec> {
        if dim % 2 == 0 || dim < 3 {
            return Err(Error::Config(format!("parabolic quadrics need odd vector dimension, got {dim}")));
        }
        let mut c = vec![vec![0u8; dim]; dim];
        c[0][0] = 1;
        for i in (1..dim).step_by(2) {
            c[i][i + 1] = 1;
        }
        FormSpec::quadratic(FormKind::QuadraticParabolic, dim, q, c)
    }

    /// Hyperbolic pairs plus an anisotropic block `x^2 + x y + d y^2` in the last
    /// two coordinates, `t^2 + t + d` irreducible.
    pub fn elliptic(dim: usize, q: usize) -> Result<FormSpec> {
        if dim % 2 != 0 || dim < 2 {
            return Err(Error::Config(format!("elliptic quadrics need even vector dimension, got {dim}")));
        }
        let field = Field::standard(q)?;
        let d = (0..q as u8)
            .find(|&d| {
                (0..q as u8).all(|t| {
                    let v = field.add_raw(field.add_raw(field.mul_raw(t, t), t), d);
                    v != 0
                })
            })
            .expect("every finite field has an irreducible t^2 + t + d");
        let mut c = vec![vec![0u8; dim]; dim];
        for i in (0..dim - 2).step_by(2) {
            c[i][i + 1] = 1;
        }
        c[dim - 2][dim - 2] = 1;
        c[dim - 2][dim - 1] = 1;
        c[dim - 1][dim - 1] = d;
        FormSpec::quadratic(FormKind::QuadraticElliptic, dim, q, c)
    }

    /// Identity Gram matrix with conjugation, over GF(q) with q a square.
    pub fn hermitian(dim: usize, q: usize) -> Result<FormSpec> {
        let field = Field::standard(q)?;
        if !field.has_conjugation() {
            return Err(Error::Config(format!("hermitian forms need a square field order, got {q}")));
        }
        let gram = (0..dim).map(|i| (0..dim).map(|j| (i == j) as u8).collect()).collect();
        Ok(FormSpec { kind: FormKind::Hermitian, dim, field: field.spec().clone(), gram, quadratic: None })
    }

    fn quadratic(kind: FormKind, dim: usize, q: usize, coeffs: Vec<Vec<u8>>) -> Result<FormSpec> {
        let field = Field::standard(q)?;
        let mut gram = vec![vec![0u8; dim]; dim];
        for i in 0..dim {
            gram[i][i] = field.add_raw(coeffs[i][i], coeffs[i][i]);
            for j in i + 1..dim {
                gram[i][j] = coeffs[i][j];
                gram[j][i] = coeffs[i][j];
            }
        }
        Ok(FormSpec { kind, dim, field: field.spec().clone(), gram, quadratic: Some(coeffs) })
    }

    /// Parses `sp:<n>:<q>`, `q+:<n>:<q>`, `q:<n>:<q>`, `q-:<n>:<q>` or `herm:<n>:<q>`.
    pub fn from_descriptor(desc: &str) -> Result<FormSpec> {
        let parts: Vec<&str> = desc.trim().split(':').collect();
        let bad = || Error::Config(format!("cannot parse form descriptor {desc:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        let q: usize = parts[2].parse().map_err(|_| bad())?;
        match parts[0] {
            "sp" => FormSpec::symplectic(n, q),
            "q+" => FormSpec::hyperbolic(n + 1, q),
            "q" => FormSpec::parabolic(n + 1, q),
            "q-" => FormSpec::elliptic(n + 1, q),
            "herm" => FormSpec::hermitian(n + 1, q),
            _ => Err(bad()),
        }
    }

    /// Inverse of [`Self::from_descriptor`] for the standard forms.
    pub fn descriptor(&self) -> String {
        let n = match self.kind {
            FormKind::Symplectic => self.dim,
            _ => self.dim - 1,
        };
        format!("{}:{}:{}", self.kind.prefix(), n, self.field.order())
    }

    pub fn projective_dim(&self) -> usize {
        self.dim - 1
    }
}

impl FromStr for FormSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<FormSpec> {
        FormSpec::from_descriptor(s)
    }
}

impl fmt::Display for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Evaluates a [`FormSpec`] on coordinate vectors.
#[derive(Clone, Debug)]
struct FormEval {
    kind: FormKind,
    field: Field,
    gram: Vec<Vec<u8>>,
    quadratic: Option<Vec<Vec<u8>>>,
}

impl FormEval {
    fn sesq(&self, x: &[u8], y: &[u8]) -> u8 {
        let f = &self.field;
        let herm = self.kind == FormKind::Hermitian;
        let mut acc = 0u8;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                let g = self.gram[i][j];
                if g == 0 || yj == 0 {
                    continue;
                }
                let yj = if herm { f.conj_raw(yj) } else { yj };
                acc = f.add_raw(acc, f.mul_raw(f.mul_raw(xi, g), yj));
            }
        }
        acc
    }

    fn quad(&self, x: &[u8]) -> u8 {
        let f = &self.field;
        let c = self.quadratic.as_ref().expect("quadratic kind");
        let mut acc = 0u8;
        for i in 0..x.len() {
            for j in i..x.len() {
                if c[i][j] != 0 {
                    acc = f.add_raw(acc, f.mul_raw(c[i][j], f.mul_raw(x[i], x[j])));
                }
            }
        }
        acc
    }

    fn is_point(&self, x: &[u8]) -> bool {
        if self.kind.is_quadratic() {
            self.quad(x) == 0
        } else {
            self.sesq(x, x) == 0
        }
    }
}

/// Checks that the form defines a nondegenerate polar space.
fn check_nondegenerate(eval: &FormEval, spec: &FormSpec) -> Result<()> {
    let f = &eval.field;
    let n = spec.dim;
    if spec.gram.len() != n || spec.gram.iter().any(|r| r.len() != n) {
        return Err(Error::Config("Gram matrix has the wrong shape".into()));
    }
    match spec.kind {
        FormKind::Symplectic => {
            for i in 0..n {
                if spec.gram[i][i] != 0 || (0..n).any(|j| spec.gram[j][i] != f.neg_raw(spec.gram[i][j])) {
                    return Err(Error::Config("symplectic Gram matrix is not alternating".into()));
                }
            }
        }
        FormKind::Hermitian => {
            if !f.has_conjugation() {
                return Err(Error::Config("hermitian form over a field without conjugation".into()));
            }
            for i in 0..n {
                if (0..n).any(|j| spec.gram[j][i] != f.conj_raw(spec.gram[i][j])) {
                    return Err(Error::Config("hermitian Gram matrix is not conjugate-symmetric".into()));
                }
            }
        }
        _ => {}
    }
    let kernel = f.kernel(&spec.gram, n);
    if kernel.is_empty() {
        return Ok(());
    }
    if !spec.kind.is_quadratic() || kernel.len() > 3 {
        return Err(Error::Config(format!("degenerate form: radical of dimension {}", kernel.len())));
    }
    // Quadratic: only a singular radical vector makes the quadric degenerate.
    let q = f.order();
    let combos = q.pow(kernel.len() as u32);
    for code in 1..combos {
        let mut v = vec![0u8; n];
        let mut c = code;
        for basis in &kernel {
            let s = (c % q) as u8;
            c /= q;
            for (x, &b) in v.iter_mut().zip(basis) {
                *x = f.add_raw(*x, f.mul_raw(s, b));
            }
        }
        if eval.quad(&v) == 0 {
            return Err(Error::Config("degenerate quadric: singular radical vector".into()));
        }
    }
    Ok(())
}

/// Singular subspaces grouped by projective dimension, each level sorted.
/// Assumes a polar space: the span of a singular subspace `S` and a point
/// `c` in its perp is `S` together with the lines joining `c` to `S`.
pub fn singular_levels(s: &IncidenceStructure) -> Vec<Vec<PointSet>> {
    let n = s.n_points();
    let mut levels: Vec<Vec<PointSet>> = Vec::new();
    let mut current: Vec<PointSet> = (0..n).map(|p| PointSet::from_points(n, [p])).collect();
    while !current.is_empty() {
        let mut next: HashSet<PointSet> = HashSet::new();
        for sub in &current {
            let mut cands = s.set_perp(sub);
            cands.difference_with(sub);
            for c in cands.iter() {
                let mut span = sub.clone();
                span.insert(c);
                for x in sub.iter() {
                    if let Some(id) = s.line_through(c, x) {
                        for &p in s.line(id) {
                            span.insert(p);
                        }
                    }
                }
                next.insert(span);
            }
        }
        levels.push(current);
        let mut next: Vec<PointSet> = next.into_iter().collect();
        next.sort_by_cached_key(|p| p.to_vec());
        current = next;
    }
    levels
}

/// Outcome of one structural check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl AxiomCheck {
    fn from_witness(w: Option<String>) -> AxiomCheck {
        AxiomCheck { holds: w.is_none(), witness: w }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub partial_linear: AxiomCheck,
    pub thick: AxiomCheck,
    pub nondegenerate: AxiomCheck,
    pub one_or_all: AxiomCheck,
    pub rank: usize,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.partial_linear.holds && self.thick.holds && self.nondegenerate.holds && self.one_or_all.holds
    }
}

/// Exhaustive check of the polar-space axioms on an incidence structure.
pub fn check_polar_axioms(s: &IncidenceStructure) -> AxiomReport {
    let partial_linear = AxiomCheck::from_witness(s.partial_linear_witness().map(|(a, b)| {
        if a == b {
            format!("line {a} has fewer than 2 points")
        } else {
            format!("lines {a} and {b} share two or more points")
        }
    }));
    let thick = AxiomCheck::from_witness(
        s.lines().iter().position(|l| l.len() < 3).map(|id| format!("line {id} has {} points", s.line(id).len())),
    );
    let nondegenerate = AxiomCheck::from_witness(
        (0..s.n_points())
            .find(|&a| s.perp_of(a).len() == s.n_points())
            .map(|a| format!("point {a} is collinear with all points")),
    );
    let mut one_or_all = None;
    'outer: for (id, line) in s.lines().iter().enumerate() {
        for a in 0..s.n_points() {
            if line.contains(&a) {
                continue;
            }
            let k = s.perp_of(a).count_in(line);
            if k != 1 && k != line.len() {
                one_or_all = Some(format!("point {a} is collinear with {k} points of line {id}"));
                break 'outer;
            }
        }
    }
    let rank = if partial_linear.holds { singular_levels(s).len() } else { 0 };
    AxiomReport { partial_linear, thick, nondegenerate, one_or_all: AxiomCheck::from_witness(one_or_all), rank }
}

/// A classical polar space together with its form model.
#[derive(Clone, Debug)]
pub struct PolarSpace {
    structure: IncidenceStructure,
    form: FormSpec,
    eval: FormEval,
    coords: Vec<ProjectivePoint>,
    index: HashMap<ProjectivePoint, usize>,
    rank: usize,
    levels: Vec<Vec<PointSet>>,
}

impl PolarSpace {
    /// Builds the space and insists on rank at least 3.
    pub fn build(form: FormSpec) -> Result<PolarSpace> {
        let ps = PolarSpace::build_any_rank(form)?;
        if ps.rank < 3 {
            return Err(Error::Config(format!("rank {} < 3", ps.rank)));
        }
        Ok(ps)
    }

    /// Builds the space regardless of rank (used for rank-2 diagnostics).
    pub fn build_any_rank(form: FormSpec) -> Result<PolarSpace> {
        let field = Field::new(form.field.clone())?;
        let eval = FormEval {
            kind: form.kind,
            field: field.clone(),
            gram: form.gram.clone(),
            quadratic: form.quadratic.clone(),
        };
        if form.kind.is_quadratic() && form.quadratic.is_none() {
            return Err(Error::Config("quadratic kind without quadratic coefficients".into()));
        }
        check_nondegenerate(&eval, &form)?;
        let n = form.projective_dim();
        let q = field.order();
        let ambient: usize = (0..=n).map(|i| q.pow(i as u32)).sum();
        if ambient > MAX_AMBIENT_POINTS {
            return Err(Error::Config(format!("PG({n},{q}) has {ambient} points, above {MAX_AMBIENT_POINTS}")));
        }
        let coords: Vec<ProjectivePoint> = pg_points(n, &field)?
            .into_iter()
            .filter(|p| eval.is_point(p.coords()))
            .collect();
        if coords.len() > MAX_POLAR_POINTS {
            return Err(Error::Config(format!("{} points, above {MAX_POLAR_POINTS}", coords.len())));
        }
        let index: HashMap<ProjectivePoint, usize> =
            coords.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let np = coords.len();

        let mut seen = vec![false; np * np];
        let mut lines = Vec::new();
        for a in 0..np {
            for b in a + 1..np {
                if seen[a * np + b] || eval.sesq(coords[a].coords(), coords[b].coords()) != 0 {
                    continue;
                }
                let pts = pg_line(&field, &coords[a], &coords[b])?;
                let ids: Vec<usize> = pts
                    .iter()
                    .map(|p| {
                        index.get(p).copied().ok_or_else(|| {
                            Error::Integrity(format!("{p:?} on a totally isotropic line is not a point"))
                        })
                    })
                    .collect::<Result<_>>()?;
                for &x in &ids {
                    for &y in &ids {
                        seen[x * np + y] = true;
                    }
                }
                lines.push(ids);
            }
        }
        let structure = IncidenceStructure::new(np, lines)?;
        let levels = singular_levels(&structure);
        let rank = levels.len();
        Ok(PolarSpace { structure, form, eval, coords, index, rank, levels })
    }

    pub fn from_descriptor(desc: &str) -> Result<PolarSpace> {
        PolarSpace::build(FormSpec::from_descriptor(desc)?)
    }

    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }
    pub fn form(&self) -> &FormSpec {
        &self.form
    }
    pub fn field(&self) -> &Field {
        &self.eval.field
    }
    pub fn ambient_dim(&self) -> usize {
        self.form.projective_dim()
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn n_points(&self) -> usize {
        self.structure.n_points()
    }
    pub fn point(&self, id: usize) -> &ProjectivePoint {
        &self.coords[id]
    }
    pub fn point_id(&self, p: &ProjectivePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// The form vanishes on the two representatives.
    pub fn form_perp(&self, a: usize, b: usize) -> bool {
        self.eval.sesq(self.coords[a].coords(), self.coords[b].coords()) == 0
    }

    /// Totally singular planes, each sorted, in deterministic order.
    pub fn singular_planes(&self) -> &[PointSet] {
        self.levels.get(2).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Counts of singular subspaces per projective dimension.
    pub fn singular_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    /// Sections of the point set by the hyperplanes `u . x = 0` of the ambient
    /// projective space, in order of `u`.
    pub fn ambient_sections(&self) -> Vec<PointSet> {
        let f = self.field();
        let n = self.n_points();
        pg_points(self.ambient_dim(), f)
            .expect("ambient dimension already validated")
            .iter()
            .map(|u| {
                PointSet::from_points(
                    n,
                    (0..n).filter(|&p| {
                        let dot = u
                            .coords()
                            .iter()
                            .zip(self.coords[p].coords())
                            .fold(0u8, |acc, (&a, &b)| f.add_raw(acc, f.mul_raw(a, b)));
                        dot == 0
                    }),
                )
            })
            .collect()
    }

    /// Point perps followed by the remaining distinct proper ambient sections.
    pub fn candidate_hyperplanes(&self) -> Vec<PointSet> {
        let n = self.n_points();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let perps = (0..n).map(|a| self.structure.perp_of(a).clone());
        for h in perps.chain(self.ambient_sections()) {
            if h.len() < n && seen.insert(h.clone()) {
                out.push(h);
            }
        }
        out
    }
}
