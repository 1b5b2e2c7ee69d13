//! Recovery of the ambient polar space from the complement alone.
//!
//! Parallelism is rebuilt from Veblen configurations of proper lines, its
//! classes become the new points, and the anti-euclidean relation finds the
//! horizon lines that no plane of the complement reaches. Nothing in this
//! module consults the horizon or the ambient coordinates except
//! [`canonical_map`], which exists to check the result.

use std::collections::{BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::complement::Complement;
use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, PointSet};
use crate::verify::PointMap;

fn meet(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter().copied().find(|p| b.contains(p))
}

/// The Veblen relation between two proper lines, on local ids: the lines are
/// disjoint and two transversals with distinct feet on both meet in a point
/// lying on neither of them.
pub fn star_parallel(s: &IncidenceStructure, k1: usize, k2: usize) -> bool {
    let (a, b) = (s.line(k1), s.line(k2));
    if meet(a, b).is_some() {
        return false;
    }
    let mut transversals = Vec::new();
    for &x in a {
        for &y in b {
            if let Some(t) = s.line_through(x, y) {
                transversals.push((t, x, y));
            }
        }
    }
    transversals.iter().enumerate().any(|(i, &(t1, x1, y1))| {
        transversals[i + 1..]
            .iter()
            .any(|&(t2, x2, y2)| x1 != x2 && y1 != y2 && meet(s.line(t1), s.line(t2)).is_some())
    })
}

/// All Veblen-related pairs, as adjacency lists over proper line ids.
fn star_adjacency(s: &IncidenceStructure) -> Vec<Vec<usize>> {
    let n = s.n_lines();
    let mut adj = vec![Vec::new(); n];
    let mut touched: Vec<usize> = Vec::new();
    let mut feet: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for k1 in 0..n {
        for &x in s.line(k1) {
            for &t in s.lines_through(x) {
                if t == k1 {
                    continue;
                }
                for &y in s.line(t) {
                    if y == x {
                        continue;
                    }
                    for &k2 in s.lines_through(y) {
                        if k2 <= k1 || k2 == t {
                            continue;
                        }
                        if feet[k2].is_empty() {
                            touched.push(k2);
                        }
                        feet[k2].push((t, x, y));
                    }
                }
            }
        }
        touched.sort_unstable();
        for &k2 in &touched {
            let tr = &feet[k2];
            if tr.len() >= 2 && meet(s.line(k1), s.line(k2)).is_none() {
                let hit = tr.iter().enumerate().any(|(i, &(t1, x1, y1))| {
                    tr[i + 1..]
                        .iter()
                        .any(|&(t2, x2, y2)| x1 != x2 && y1 != y2 && meet(s.line(t1), s.line(t2)).is_some())
                });
                if hit {
                    adj[k1].push(k2);
                    adj[k2].push(k1);
                }
            }
            feet[k2].clear();
        }
        touched.clear();
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    adj
}

/// Partition of the self-parallel lines into parallel classes.
#[derive(Clone, Debug, Serialize)]
pub struct ParallelClasses {
    /// Class index per proper line, `None` for lines not parallel to themselves.
    pub class_of: Vec<Option<usize>>,
    /// Member lines per class, sorted; classes ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
}

impl ParallelClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Intrinsic geometry of a complement: the Veblen relation, its transitive
/// closure, the classes, and the anti-euclidean relations between classes.
#[derive(Clone, Debug)]
pub struct IntrinsicGeometry<'a> {
    complement: &'a Complement,
    star: Vec<Vec<usize>>,
    classes: ParallelClasses,
    class_points: Vec<PointSet>,
    equiv: Vec<Vec<bool>>,
}

impl<'a> IntrinsicGeometry<'a> {
    pub fn new(complement: &'a Complement) -> IntrinsicGeometry<'a> {
        let s = complement.structure();
        let star = star_adjacency(s);
        let n = star.len();
        let mut uf = UnionFind::new(n);
        for (k, adj) in star.iter().enumerate() {
            for &l in adj {
                uf.union(k, l);
            }
        }
        let labels = uf.into_labeling();
        let mut class_of = vec![None; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        for k in (0..n).filter(|&k| !star[k].is_empty()) {
            let c = *by_root.entry(labels[k]).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            class_of[k] = Some(c);
            classes[c].push(k);
        }
        let class_points: Vec<PointSet> = classes
            .iter()
            .map(|members| {
                PointSet::from_points(s.n_points(), members.iter().flat_map(|&l| s.line(l).iter().copied()))
            })
            .collect();
        let m = classes.len();
        let equiv = (0..m)
            .map(|i| (0..m).map(|j| class_points[i].is_disjoint(&class_points[j])).collect())
            .collect();
        IntrinsicGeometry { complement, star, classes: ParallelClasses { class_of, classes }, class_points, equiv }
    }

    pub fn complement(&self) -> &Complement {
        self.complement
    }

    pub fn classes(&self) -> &ParallelClasses {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Lines Veblen-related to `k`.
    pub fn star_partners(&self, k: usize) -> &[usize] {
        &self.star[k]
    }

    pub fn star_parallel(&self, k: usize, l: usize) -> bool {
        self.star[k].binary_search(&l).is_ok()
    }

    /// The transitive closure of the Veblen relation.
    pub fn parallel(&self, k: usize, l: usize) -> bool {
        match (self.classes.class_of[k], self.classes.class_of[l]) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Lines parallel to themselves.
    pub fn intrinsic_affine_lines(&self) -> Vec<usize> {
        (0..self.star.len()).filter(|&k| self.classes.class_of[k].is_some()).collect()
    }

    pub fn class_of(&self, k: usize) -> Option<usize> {
        self.classes.class_of[k]
    }

    /// No affine line through a point of `k1` is parallel to `k2`.
    pub fn anti_euclidean(&self, k1: usize, k2: usize) -> Result<bool> {
        if self.class_of(k1).is_none() || self.class_of(k2).is_none() {
            return Err(Error::Domain(format!("lines {k1}, {k2} must both be affine")));
        }
        let s = self.complement.structure();
        Ok(s.line(k1).iter().all(|&a| {
            s.lines_through(a)
                .iter()
                .all(|&m| self.class_of(m).is_none() || !self.parallel(m, k2))
        }))
    }

    /// Anti-euclidean in both directions for all representatives. Equivalent
    /// to the two classes covering disjoint point sets.
    pub fn equiv_classes(&self, c1: usize, c2: usize) -> bool {
        self.equiv[c1][c2]
    }

    /// Proper points covered by the lines of a class.
    pub fn class_points(&self, c: usize) -> &PointSet {
        &self.class_points[c]
    }

    /// Some representatives of the three classes form a triangle.
    pub fn has_triangle(&self, c1: usize, c2: usize, c3: usize) -> bool {
        let s = self.complement.structure();
        for &m1 in &self.classes.classes[c1] {
            for &m2 in &self.classes.classes[c2] {
                let Some(p12) = meet(s.line(m1), s.line(m2)) else { continue };
                for &x in s.line(m1).iter().filter(|&&x| x != p12) {
                    for &y in s.line(m2).iter().filter(|&&y| y != p12) {
                        if let Some(t) = s.line_through(x, y) {
                            if self.class_of(t) == Some(c3) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Collinearity of the three directions: a triangle of representatives,
    /// or pairwise anti-euclidean classes.
    pub fn ternary_collinear(&self, c1: usize, c2: usize, c3: usize) -> Result<bool> {
        if c1 == c2 || c2 == c3 || c1 == c3 {
            return Err(Error::Usage("ternary collinearity needs three distinct classes".into()));
        }
        let pairwise = self.equiv_classes(c1, c2) && self.equiv_classes(c2, c3) && self.equiv_classes(c3, c1);
        Ok(pairwise || self.has_triangle(c1, c2, c3))
    }

    fn prime_set(&self, c1: usize, c2: usize) -> Vec<usize> {
        let mut set: Vec<usize> = (0..self.n_classes())
            .filter(|&c| c == c1 || c == c2 || (self.equiv[c][c1] && self.equiv[c][c2]))
            .collect();
        set.sort_unstable();
        set
    }

    /// New lines from anti-euclidean class pairs: each pair together with every
    /// class anti-euclidean to both. Sorted, deduplicated.
    pub fn lines_prime(&self) -> Vec<Vec<usize>> {
        let m = self.n_classes();
        let mut out = BTreeSet::new();
        for c1 in 0..m {
            for c2 in c1 + 1..m {
                if self.equiv[c1][c2] {
                    out.insert(self.prime_set(c1, c2));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Pairs of generating pairs that produce different line sets although the
    /// second pair lies inside the first pair's set.
    pub fn prime_line_violations(&self) -> Vec<((usize, usize), (usize, usize))> {
        let m = self.n_classes();
        let mut bad = Vec::new();
        for c1 in 0..m {
            for c2 in c1 + 1..m {
                if !self.equiv[c1][c2] {
                    continue;
                }
                let set = self.prime_set(c1, c2);
                for (i, &x) in set.iter().enumerate() {
                    for &y in &set[i + 1..] {
                        if !self.equiv[x][y] || self.prime_set(x, y) != set {
                            bad.push(((c1, c2), (x, y)));
                        }
                    }
                }
            }
        }
        bad
    }

    /// Classes of the affine lines of each plane of the complement, keeping
    /// sets of at least two classes. Sorted, deduplicated.
    pub fn lines_second(&self) -> Vec<Vec<usize>> {
        let mut out = BTreeSet::new();
        for plane in self.complement.complement_planes() {
            let set: BTreeSet<usize> = plane.lines.iter().filter_map(|&l| self.class_of(l)).collect();
            if set.len() >= 2 {
                out.insert(set.into_iter().collect::<Vec<_>>());
            }
        }
        out.into_iter().collect()
    }
}

/// The structure assembled from the complement: proper points followed by
/// parallel classes, and three families of lines.
#[derive(Clone, Debug, Serialize)]
pub struct ReconstructedStructure {
    pub n_proper: usize,
    pub n_classes: usize,
    /// Each proper line, plus its class when it is affine.
    pub extended: Vec<Vec<usize>>,
    /// Lines through classes only, found by the anti-euclidean relation.
    pub prime: Vec<Vec<usize>>,
    /// Plane horizons of at least two classes.
    pub second: Vec<Vec<usize>>,
    #[serde(skip)]
    structure: IncidenceStructure,
}

impl ReconstructedStructure {
    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }
    pub fn n_points(&self) -> usize {
        self.n_proper + self.n_classes
    }
    /// Point id of class `c`.
    pub fn class_point(&self, c: usize) -> usize {
        self.n_proper + c
    }
    /// Point sets present in both class-line families.
    pub fn family_overlap(&self) -> Vec<Vec<usize>> {
        let prime: BTreeSet<&Vec<usize>> = self.prime.iter().collect();
        self.second.iter().filter(|l| prime.contains(l)).cloned().collect()
    }
}

/// Assembles the reconstruction. Refused when the horizon is a hyperplane.
pub fn reconstruct(geom: &IntrinsicGeometry<'_>) -> Result<ReconstructedStructure> {
    let c = geom.complement();
    if c.horizon_is_hyperplane() {
        return Err(Error::Refusal("hyperplane horizon: delegated case".into()));
    }
    let s = c.structure();
    let n_proper = s.n_points();
    let n_classes = geom.n_classes();
    let extended: Vec<Vec<usize>> = (0..s.n_lines())
        .map(|l| {
            let mut pts = s.line(l).to_vec();
            if let Some(cl) = geom.class_of(l) {
                pts.push(n_proper + cl);
            }
            pts
        })
        .collect();
    let offset = |sets: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        sets.into_iter().map(|set| set.into_iter().map(|cl| n_proper + cl).collect()).collect()
    };
    let prime = offset(geom.lines_prime());
    let second = offset(geom.lines_second());
    let all: Vec<Vec<usize>> = extended.iter().chain(&prime).chain(&second).cloned().collect();
    let structure = IncidenceStructure::new(n_proper + n_classes, all)?;
    Ok(ReconstructedStructure { n_proper, n_classes, extended, prime, second, structure })
}

/// Ambient point of each class: the common point at infinity of its lines.
pub fn class_infinity_points(geom: &IntrinsicGeometry<'_>) -> Result<Vec<usize>> {
    let c = geom.complement();
    geom.classes()
        .classes
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let pts: BTreeSet<Option<usize>> =
                members.iter().map(|&l| c.point_at_infinity(l).ok()).collect();
            match pts.iter().collect::<Vec<_>>().as_slice() {
                [Some(p)] => Ok(*p),
                _ => Err(Error::Integrity(format!("class {i} has points at infinity {pts:?}"))),
            }
        })
        .collect()
}

/// Bijection from ambient points to reconstructed points: proper points to
/// themselves, horizon points to the class of lines through them.
pub fn canonical_map(geom: &IntrinsicGeometry<'_>, recon: &ReconstructedStructure) -> Result<PointMap> {
    let c = geom.complement();
    let n = c.base().n_points();
    let mut images = vec![usize::MAX; n];
    for local in 0..recon.n_proper {
        images[c.ambient_id(local)] = local;
    }
    for (cl, p) in class_infinity_points(geom)?.into_iter().enumerate() {
        if images[p] != usize::MAX {
            return Err(Error::Integrity(format!("point {p} is the image of two classes")));
        }
        images[p] = recon.class_point(cl);
    }
    if let Some(p) = images.iter().position(|&x| x == usize::MAX) {
        return Err(Error::Integrity(format!("horizon point {p} corresponds to no class")));
    }
    PointMap::new(images, recon.n_points())
}
