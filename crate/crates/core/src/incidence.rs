//! Point-line structures and the subspace calculus on them: closure,
//! perps, radicals, hyperplanes and the spiky/scaly predicates.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NO_LINE: u32 = u32::MAX;

/// A subset of the point indices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet(FixedBitSet);

impl PointSet {
    pub fn empty(n: usize) -> PointSet {
        PointSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> PointSet {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        PointSet(b)
    }

    pub fn from_points(n: usize, points: impl IntoIterator<Item = usize>) -> PointSet {
        let mut s = PointSet::empty(n);
        for p in points {
            s.insert(p);
        }
        s
    }

    /// Size of the ambient index range.
    pub fn universe(&self) -> usize {
        self.0.len()
    }
    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }
    pub fn contains(&self, p: usize) -> bool {
        self.0.contains(p)
    }
    pub fn insert(&mut self, p: usize) {
        self.0.insert(p)
    }
    pub fn remove(&mut self, p: usize) {
        self.0.set(p, false)
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }
    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.is_subset(&other.0)
    }
    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
    pub fn intersect_with(&mut self, other: &PointSet) {
        self.0.intersect_with(&other.0)
    }
    pub fn union_with(&mut self, other: &PointSet) {
        self.0.union_with(&other.0)
    }
    pub fn difference_with(&mut self, other: &PointSet) {
        self.0.difference_with(&other.0)
    }
    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }
    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }
    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }
    pub fn complement(&self) -> PointSet {
        let mut s = self.clone();
        s.0.toggle_range(..);
        s
    }
    pub fn first(&self) -> Option<usize> {
        self.0.ones().next()
    }
    pub fn count_in(&self, points: &[usize]) -> usize {
        points.iter().filter(|&&p| self.contains(p)).count()
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Result of [`IncidenceStructure::singular_dim`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularDim {
    /// Projective dimension; `-1` for the empty set.
    Dim(i32),
    NotSingular,
}

/// Points `0..n_points` and lines given as sorted point lists.
#[derive(Clone)]
pub struct IncidenceStructure {
    n_points: usize,
    lines: Vec<Vec<usize>>,
    point_lines: Vec<Vec<usize>>,
    collinear: Vec<PointSet>,
    pair_line: Vec<u32>,
    line_index: HashMap<Vec<usize>, usize>,
}

impl fmt::Debug for IncidenceStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IncidenceStructure({} points, {} lines)", self.n_points, self.lines.len())
    }
}

/// The serialized `{n_points, lines}` core of the JSON incidence format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceData {
    pub n_points: usize,
    pub lines: Vec<Vec<usize>>,
}

impl IncidenceStructure {
    /// Builds the structure. Lines are sorted internally; the line order is kept.
    /// Partial linearity is *not* enforced here, see [`Self::partial_linear_witness`].
    pub fn new(n_points: usize, lines: Vec<Vec<usize>>) -> Result<IncidenceStructure> {
        let mut lines = lines;
        let mut point_lines = vec![Vec::new(); n_points];
        let mut collinear: Vec<PointSet> = (0..n_points)
            .map(|p| PointSet::from_points(n_points, [p]))
            .collect();
        let mut pair_line = vec![NO_LINE; n_points * n_points];
        let mut line_index = HashMap::with_capacity(lines.len());
        for (id, line) in lines.iter_mut().enumerate() {
            line.sort_unstable();
            if let Some(&bad) = line.iter().find(|&&p| p >= n_points) {
                return Err(Error::Usage(format!("line {id} references point {bad} >= {n_points}")));
            }
            for (i, &a) in line.iter().enumerate() {
                point_lines[a].push(id);
                for &b in &line[i + 1..] {
                    collinear[a].insert(b);
                    collinear[b].insert(a);
                    for (x, y) in [(a, b), (b, a)] {
                        let slot = &mut pair_line[x * n_points + y];
                        if *slot == NO_LINE {
                            *slot = id as u32;
                        }
                    }
                }
            }
            line_index.entry(line.clone()).or_insert(id);
        }
        Ok(IncidenceStructure { n_points, lines, point_lines, collinear, pair_line, line_index })
    }

    pub fn from_data(data: IncidenceData) -> Result<IncidenceStructure> {
        IncidenceStructure::new(data.n_points, data.lines)
    }

    /// Canonical serialized form: points sorted within lines, lines sorted.
    pub fn to_data(&self) -> IncidenceData {
        let mut lines = self.lines.clone();
        lines.sort();
        IncidenceData { n_points: self.n_points, lines }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }
    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }
    pub fn line(&self, id: usize) -> &[usize] {
        &self.lines[id]
    }
    pub fn lines_through(&self, p: usize) -> &[usize] {
        &self.point_lines[p]
    }
    pub fn line_set(&self, id: usize) -> PointSet {
        PointSet::from_points(self.n_points, self.lines[id].iter().copied())
    }
    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.n_points)
    }

    /// Id of the line with exactly these points.
    pub fn find_line(&self, points: &[usize]) -> Option<usize> {
        let mut key = points.to_vec();
        key.sort_unstable();
        self.line_index.get(&key).copied()
    }

    /// The line through two distinct points, if any.
    pub fn line_through(&self, a: usize, b: usize) -> Option<usize> {
        match self.pair_line[a * self.n_points + b] {
            NO_LINE => None,
            id => Some(id as usize),
        }
    }

    /// `a == b` or some line carries both.
    pub fn collinear(&self, a: usize, b: usize) -> bool {
        self.collinear[a].contains(b)
    }

    /// Points collinear with `a`, `a` included.
    pub fn perp_of(&self, a: usize) -> &PointSet {
        &self.collinear[a]
    }

    /// Intersection of the perps of the points of `xs`; all points for empty `xs`.
    pub fn set_perp(&self, xs: &PointSet) -> PointSet {
        let mut out = self.all_points();
        for a in xs.iter() {
            out.intersect_with(&self.collinear[a]);
        }
        out
    }

    pub fn radical_of(&self, xs: &PointSet) -> PointSet {
        xs.intersection(&self.set_perp(xs))
    }

    /// Least subspace containing `xs`.
    pub fn closure_of(&self, xs: &PointSet) -> PointSet {
        let mut cur = xs.clone();
        loop {
            let mut grew = false;
            for line in &self.lines {
                if cur.count_in(line) >= 2 && cur.count_in(line) < line.len() {
                    for &p in line {
                        cur.insert(p);
                    }
                    grew = true;
                }
            }
            if !grew {
                return cur;
            }
        }
    }

    pub fn is_subspace(&self, xs: &PointSet) -> bool {
        self.lines.iter().all(|line| {
            let k = xs.count_in(line);
            k < 2 || k == line.len()
        })
    }

    /// A proper subspace meeting every line.
    pub fn is_hyperplane(&self, xs: &PointSet) -> bool {
        xs.len() < self.n_points
            && self.is_subspace(xs)
            && self.lines.iter().all(|line| line.iter().any(|&p| xs.contains(p)))
    }

    /// Every point of `xs` is collinear with some point outside `xs`.
    pub fn is_spiky(&self, xs: &PointSet) -> bool {
        xs.iter().all(|a| !self.collinear[a].is_subset(xs))
    }

    /// Every line inside `xs` lies in the perp of some point outside `xs`.
    pub fn is_scaly(&self, xs: &PointSet) -> bool {
        self.lines_within(xs).into_iter().all(|id| {
            let perp = self.set_perp(&self.line_set(id));
            !perp.is_subset(xs)
        })
    }

    /// Ids of lines entirely contained in `xs`.
    pub fn lines_within(&self, xs: &PointSet) -> Vec<usize> {
        (0..self.lines.len())
            .filter(|&id| self.lines[id].iter().all(|&p| xs.contains(p)))
            .collect()
    }

    /// Projective dimension of a singular subspace, read off from its size and
    /// the (uniform) line size of the structure.
    pub fn singular_dim(&self, xs: &PointSet) -> Result<SingularDim> {
        if !self.is_subspace(xs) {
            return Err(Error::Usage("singular_dim needs a subspace".into()));
        }
        if xs.iter().any(|a| !xs.is_subset(&self.collinear[a])) {
            return Ok(SingularDim::NotSingular);
        }
        let n = xs.len();
        if n <= 1 {
            return Ok(SingularDim::Dim(n as i32 - 1));
        }
        let a = xs.first().unwrap();
        let b = xs.iter().nth(1).unwrap();
        let order = self.lines[self.line_through(a, b).expect("singular")].len() - 1;
        // n = 1 + order + ... + order^d
        let mut total = 1usize;
        let mut term = 1usize;
        let mut d = 0;
        while total < n {
            term *= order;
            total += term;
            d += 1;
        }
        if total != n {
            return Err(Error::Integrity(format!(
                "singular subspace of {n} points is not a projective space of order {order}"
            )));
        }
        Ok(SingularDim::Dim(d))
    }

    /// Two distinct lines sharing two or more points, if any.
    pub fn partial_linear_witness(&self) -> Option<(usize, usize)> {
        if let Some(id) = self.lines.iter().position(|l| l.len() < 2) {
            return Some((id, id));
        }
        for (id, line) in self.lines.iter().enumerate() {
            for (i, &a) in line.iter().enumerate() {
                for &b in &line[i + 1..] {
                    let first = self.pair_line[a * self.n_points + b] as usize;
                    if first != id {
                        return Some((first, id));
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// PG(2,2): the Fano plane.
    fn fano() -> IncidenceStructure {
        let lines = vec![
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![0, 5, 6],
            vec![1, 3, 5],
            vec![1, 4, 6],
            vec![2, 3, 6],
            vec![2, 4, 5],
        ];
        IncidenceStructure::new(7, lines).unwrap()
    }

    #[test]
    fn collinearity_and_lines() {
        let f = fano();
        assert!(f.collinear(3, 3));
        assert!(f.collinear(0, 6));
        assert_eq!(f.line_through(0, 6), Some(2));
        assert_eq!(f.find_line(&[6, 5, 0]), Some(2));
        assert_eq!(f.partial_linear_witness(), None);
    }

    #[test]
    fn closure_and_subspaces() {
        let f = fano();
        let two = PointSet::from_points(7, [0, 1]);
        assert_eq!(f.closure_of(&two).to_vec(), vec![0, 1, 2]);
        assert!(!f.is_subspace(&two));
        assert!(f.is_subspace(&PointSet::empty(7)));
        assert!(f.is_subspace(&PointSet::from_points(7, [4])));
        let tri = PointSet::from_points(7, [0, 1, 3]);
        assert_eq!(f.closure_of(&tri).len(), 7);
        let line = PointSet::from_points(7, [0, 1, 2]);
        assert_eq!(f.closure_of(&line), line);
        // in a projective plane every line is a hyperplane
        assert!(f.is_hyperplane(&line));
        assert!(!f.is_hyperplane(&f.all_points()));
        assert!(!f.is_hyperplane(&PointSet::from_points(7, [0])));
    }

    #[test]
    fn repeated_line_breaks_partial_linearity() {
        let s = IncidenceStructure::new(3, vec![vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        assert_eq!(s.partial_linear_witness(), Some((0, 1)));
        let s = IncidenceStructure::new(3, vec![vec![0]]).unwrap();
        assert!(s.partial_linear_witness().is_some());
        assert!(IncidenceStructure::new(2, vec![vec![0, 5]]).is_err());
    }

    #[test]
    fn perp_and_radical_in_fano() {
        let f = fano();
        assert_eq!(f.perp_of(0).len(), 7);
        assert_eq!(f.set_perp(&PointSet::empty(7)).len(), 7);
        let xs = PointSet::from_points(7, [0, 1]);
        assert_eq!(f.radical_of(&xs), xs);
        assert_eq!(f.singular_dim(&f.all_points()).unwrap(), SingularDim::Dim(2));
        assert_eq!(f.singular_dim(&PointSet::from_points(7, [0, 1, 2])).unwrap(), SingularDim::Dim(1));
        assert_eq!(f.singular_dim(&PointSet::empty(7)).unwrap(), SingularDim::Dim(-1));
        assert!(f.singular_dim(&xs).is_err());
    }

    #[test]
    fn point_set_ops() {
        let a = PointSet::from_points(10, [1, 3, 5]);
        let b = PointSet::from_points(10, [3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 3, 4, 5]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 5]);
        assert_eq!(a.complement().len(), 7);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1,3,5]");
    }
}
