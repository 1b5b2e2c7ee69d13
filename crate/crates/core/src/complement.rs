//! The complement of a subspace `W` (the horizon) in a polar space, and the
//! horizon notions computed from the ambient space: parallelism through `W`,
//! affine lines, points at infinity, deep points, planes and deep lines.
//!
//! Everything here may look at the ambient space. The intrinsic side lives in
//! [`crate::reconstruct`], which only reads [`Complement::structure`] and the
//! plane records.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, PointSet};
use crate::polar::PolarSpace;

/// A plane of the complement, recorded by its closure in the ambient space.
#[derive(Clone, Debug, Serialize)]
pub struct PlaneRecord {
    /// Ambient point ids of the closure.
    pub closure: PointSet,
    /// Closure minus the horizon.
    pub proper: PointSet,
    /// Closure meet the horizon.
    pub improper: PointSet,
    /// Proper lines contained in the plane.
    pub lines: Vec<usize>,
}

/// The complement of a horizon `W` in a polar space.
///
/// Proper points keep their ambient ids in [`Self::proper_lines`]; the
/// intrinsic [`Self::structure`] renumbers them `0..|S \ W|` in increasing
/// ambient order.
#[derive(Clone, Debug)]
pub struct Complement {
    base: Arc<PolarSpace>,
    horizon: PointSet,
    proper_points: PointSet,
    proper_lines: Vec<Vec<usize>>,
    closure_map: Vec<usize>,
    at_infinity: Vec<Option<usize>>,
    structure: IncidenceStructure,
    local_of: Vec<Option<usize>>,
    global_of: Vec<usize>,
    planes: Vec<PlaneRecord>,
    candidates: Vec<PointSet>,
    horizon_is_hyperplane: bool,
}

impl Complement {
    /// Builds the complement of `w`. The horizon must be a proper subspace
    /// contained in some hyperplane of the candidate family.
    pub fn build(base: Arc<PolarSpace>, w: PointSet) -> Result<Complement> {
        let s = base.structure();
        let n = s.n_points();
        if w.universe() != n {
            return Err(Error::Usage(format!("horizon over {} points, space has {n}", w.universe())));
        }
        if !s.is_subspace(&w) {
            return Err(Error::Usage("horizon is not a subspace".into()));
        }
        if w.len() == n {
            return Err(Error::Refusal("horizon is the whole point set".into()));
        }
        let candidates = base.candidate_hyperplanes();
        if !candidates.iter().any(|h| w.is_subset(h)) {
            return Err(Error::Refusal(
                "horizon is not contained in any candidate hyperplane (open case, logged)".into(),
            ));
        }
        let mut proper_lines = Vec::new();
        let mut closure_map = Vec::new();
        for (id, line) in s.lines().iter().enumerate() {
            if line.iter().all(|&p| w.contains(p)) {
                continue;
            }
            proper_lines.push(line.iter().copied().filter(|&p| !w.contains(p)).collect());
            closure_map.push(id);
        }
        let horizon_is_hyperplane = s.is_hyperplane(&w);
        Complement::assemble(base, w, proper_lines, closure_map, candidates, horizon_is_hyperplane)
    }

    fn assemble(
        base: Arc<PolarSpace>,
        horizon: PointSet,
        proper_lines: Vec<Vec<usize>>,
        closure_map: Vec<usize>,
        candidates: Vec<PointSet>,
        horizon_is_hyperplane: bool,
    ) -> Result<Complement> {
        let s = base.structure();
        let n = s.n_points();
        let proper_points = horizon.complement();
        let global_of: Vec<usize> = proper_points.to_vec();
        let mut local_of = vec![None; n];
        for (i, &g) in global_of.iter().enumerate() {
            local_of[g] = Some(i);
        }
        let at_infinity: Vec<Option<usize>> = closure_map
            .iter()
            .map(|&k| s.line(k).iter().copied().find(|&p| horizon.contains(p)))
            .collect();
        let local_lines: Vec<Vec<usize>> = proper_lines
            .iter()
            .map(|l: &Vec<usize>| l.iter().map(|&p| local_of[p].expect("proper point")).collect())
            .collect();
        let structure = IncidenceStructure::new(global_of.len(), local_lines)?;

        let mut line_of_base = vec![None; s.n_lines()];
        for (i, &k) in closure_map.iter().enumerate() {
            line_of_base[k] = Some(i);
        }
        let planes = base
            .singular_planes()
            .iter()
            .filter(|pl| !pl.is_subset(&horizon))
            .map(|pl| {
                let lines = s
                    .lines_within(pl)
                    .into_iter()
                    .filter_map(|k| line_of_base[k])
                    .collect();
                PlaneRecord {
                    closure: pl.clone(),
                    proper: pl.difference(&horizon),
                    improper: pl.intersection(&horizon),
                    lines,
                }
            })
            .collect();
        Ok(Complement {
            base,
            horizon,
            proper_points,
            proper_lines,
            closure_map,
            at_infinity,
            structure,
            local_of,
            global_of,
            planes,
            candidates,
            horizon_is_hyperplane,
        })
    }

    /// A copy with proper line `id` deleted. Used to check that the
    /// verification battery notices tampering.
    pub fn with_line_removed(&self, id: usize) -> Result<Complement> {
        if id >= self.proper_lines.len() {
            return Err(Error::Usage(format!("no proper line {id}")));
        }
        let mut lines = self.proper_lines.clone();
        let mut map = self.closure_map.clone();
        lines.remove(id);
        map.remove(id);
        Complement::assemble(
            self.base.clone(),
            self.horizon.clone(),
            lines,
            map,
            self.candidates.clone(),
            self.horizon_is_hyperplane,
        )
    }

    pub fn base(&self) -> &Arc<PolarSpace> {
        &self.base
    }
    pub fn horizon(&self) -> &PointSet {
        &self.horizon
    }
    pub fn proper_points(&self) -> &PointSet {
        &self.proper_points
    }
    /// Proper lines as sorted ambient point ids.
    pub fn proper_lines(&self) -> &[Vec<usize>] {
        &self.proper_lines
    }
    pub fn n_lines(&self) -> usize {
        self.proper_lines.len()
    }
    /// Ambient line id of the closure of proper line `id`.
    pub fn closure(&self, id: usize) -> usize {
        self.closure_map[id]
    }
    /// The complement as a point-line structure in its own right, on local ids.
    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }
    pub fn local_id(&self, ambient: usize) -> Option<usize> {
        self.local_of[ambient]
    }
    pub fn ambient_id(&self, local: usize) -> usize {
        self.global_of[local]
    }
    pub fn horizon_is_hyperplane(&self) -> bool {
        self.horizon_is_hyperplane
    }
    pub fn candidate_hyperplanes(&self) -> &[PointSet] {
        &self.candidates
    }

    /// Closures of `k` and `l` meet inside the horizon.
    pub fn horizon_parallel(&self, k: usize, l: usize) -> bool {
        match (self.at_infinity[k], self.at_infinity[l]) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub fn is_affine(&self, id: usize) -> bool {
        self.at_infinity[id].is_some()
    }

    pub fn affine_lines(&self) -> Vec<usize> {
        (0..self.n_lines()).filter(|&l| self.is_affine(l)).collect()
    }

    pub fn point_at_infinity(&self, id: usize) -> Result<usize> {
        self.at_infinity
            .get(id)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Domain(format!("proper line {id} is not affine")))
    }

    /// Horizon points that are the point at infinity of no proper line.
    pub fn deep_points(&self) -> PointSet {
        let mut out = self.horizon.clone();
        for p in self.at_infinity.iter().flatten() {
            out.remove(*p);
        }
        out
    }

    pub fn complement_planes(&self) -> &[PlaneRecord] {
        &self.planes
    }

    pub fn semiaffine_planes(&self) -> Vec<usize> {
        (0..self.planes.len())
            .filter(|&i| self.planes[i].lines.iter().any(|&l| self.is_affine(l)))
            .collect()
    }

    /// Points at infinity of the affine lines inside a semiaffine plane.
    pub fn plane_horizon(&self, plane: usize) -> Result<PointSet> {
        let rec = self
            .planes
            .get(plane)
            .ok_or_else(|| Error::Usage(format!("no plane {plane}")))?;
        let mut out = PointSet::empty(self.horizon.universe());
        for p in rec.lines.iter().filter_map(|&l| self.at_infinity[l]) {
            out.insert(p);
        }
        if out.is_empty() {
            return Err(Error::Domain(format!("plane {plane} is not semiaffine")));
        }
        Ok(out)
    }

    /// Ambient lines inside the horizon that are the horizon of no plane.
    pub fn deep_lines(&self) -> Vec<usize> {
        let s = self.base.structure();
        let horizons: HashSet<PointSet> = self
            .semiaffine_planes()
            .into_iter()
            .map(|pl| self.plane_horizon(pl).expect("semiaffine"))
            .collect();
        s.lines_within(&self.horizon)
            .into_iter()
            .filter(|&k| !horizons.contains(&s.line_set(k)))
            .collect()
    }

    fn check_parallel_pair(&self, k: usize, l: usize) -> Result<()> {
        if k >= self.n_lines() || l >= self.n_lines() {
            return Err(Error::Usage("line id out of range".into()));
        }
        if k == l || !self.horizon_parallel(k, l) {
            return Err(Error::Domain(format!("lines {k} and {l} are not a distinct parallel pair")));
        }
        Ok(())
    }

    /// A hyperplane containing the horizon and neither closure of `k`, `l`.
    /// The first one in candidate order is returned.
    pub fn extend_to_avoiding_hyperplane(&self, k: usize, l: usize) -> Result<PointSet> {
        self.check_parallel_pair(k, l)?;
        if self.horizon_is_hyperplane {
            return Ok(self.horizon.clone());
        }
        let s = self.base.structure();
        let kbar = s.line_set(self.closure_map[k]);
        let lbar = s.line_set(self.closure_map[l]);
        self.candidates
            .iter()
            .find(|h| self.horizon.is_subset(h) && !kbar.is_subset(h) && !lbar.is_subset(h))
            .cloned()
            .ok_or_else(|| {
                Error::Integrity(format!(
                    "no candidate hyperplane contains the horizon and avoids lines {k}, {l}"
                ))
            })
    }

    /// Shortest chain of planes through the common point at infinity, from one
    /// containing `k` to one containing `l`, consecutive planes sharing a
    /// proper line.
    pub fn plane_path(&self, k: usize, l: usize) -> Result<Vec<usize>> {
        self.check_parallel_pair(k, l)?;
        let apex = self.at_infinity[k].expect("parallel lines are affine");
        let nodes: Vec<usize> = (0..self.planes.len())
            .filter(|&i| self.planes[i].closure.contains(apex))
            .collect();
        let mut by_line: Vec<Vec<usize>> = vec![Vec::new(); self.n_lines()];
        for &pl in &nodes {
            for &ln in &self.planes[pl].lines {
                by_line[ln].push(pl);
            }
        }
        let mut parent = vec![usize::MAX; self.planes.len()];
        let mut queue = VecDeque::new();
        for &pl in &by_line[k] {
            parent[pl] = pl;
            queue.push_back(pl);
        }
        while let Some(pl) = queue.pop_front() {
            if self.planes[pl].lines.contains(&l) {
                let mut path = vec![pl];
                let mut cur = pl;
                while parent[cur] != cur {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Ok(path);
            }
            for &ln in &self.planes[pl].lines {
                for &next in &by_line[ln] {
                    if parent[next] == usize::MAX {
                        parent[next] = pl;
                        queue.push_back(next);
                    }
                }
            }
        }
        Err(Error::Integrity(format!("no chain of planes joins lines {k} and {l}")))
    }
}

/// Horizon selection mini-language:
/// `point <id>` | `line <id>` | `plane <id>` | `perp <id>` |
/// `meet <spec> <spec>` | `span <id,...>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HorizonSpec {
    Point(usize),
    Line(usize),
    Plane(usize),
    Perp(usize),
    Meet(Box<HorizonSpec>, Box<HorizonSpec>),
    Span(Vec<usize>),
}

impl HorizonSpec {
    fn parse_tokens<'a>(tokens: &mut impl Iterator<Item = &'a str>, src: &str) -> Result<HorizonSpec> {
        let bad = |why: &str| Error::Usage(format!("horizon {src:?}: {why}"));
        let head = tokens.next().ok_or_else(|| bad("unexpected end"))?;
        let mut id = || -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| bad("missing id"))?
                .parse()
                .map_err(|_| bad("bad id"))
        };
        Ok(match head {
            "point" => HorizonSpec::Point(id()?),
            "line" => HorizonSpec::Line(id()?),
            "plane" => HorizonSpec::Plane(id()?),
            "perp" => HorizonSpec::Perp(id()?),
            "meet" => {
                let a = HorizonSpec::parse_tokens(tokens, src)?;
                let b = HorizonSpec::parse_tokens(tokens, src)?;
                HorizonSpec::Meet(Box::new(a), Box::new(b))
            }
            "span" => {
                let list = tokens.next().ok_or_else(|| bad("missing point list"))?;
                let ids = list
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().map_err(|_| bad("bad id in span")))
                    .collect::<Result<Vec<usize>>>()?;
                HorizonSpec::Span(ids)
            }
            other => return Err(bad(&format!("unknown keyword {other:?}"))),
        })
    }

    /// Resolves to a point set of `ps` and checks it is a subspace.
    pub fn resolve(&self, ps: &PolarSpace) -> Result<PointSet> {
        let s = ps.structure();
        let n = s.n_points();
        let point = |id: usize| -> Result<usize> {
            (id < n).then_some(id).ok_or_else(|| Error::Usage(format!("no point {id}")))
        };
        let set = match self {
            HorizonSpec::Point(id) => PointSet::from_points(n, [point(*id)?]),
            HorizonSpec::Line(id) => {
                if *id >= s.n_lines() {
                    return Err(Error::Usage(format!("no line {id}")));
                }
                s.line_set(*id)
            }
            HorizonSpec::Plane(id) => ps
                .singular_planes()
                .get(*id)
                .cloned()
                .ok_or_else(|| Error::Usage(format!("no plane {id}")))?,
            HorizonSpec::Perp(id) => s.perp_of(point(*id)?).clone(),
            HorizonSpec::Meet(a, b) => a.resolve(ps)?.intersection(&b.resolve(ps)?),
            HorizonSpec::Span(ids) => {
                let pts = ids.iter().map(|&i| point(i)).collect::<Result<Vec<_>>>()?;
                s.closure_of(&PointSet::from_points(n, pts))
            }
        };
        if !s.is_subspace(&set) {
            return Err(Error::Refusal(format!("horizon {self} is not a subspace")));
        }
        Ok(set)
    }
}

impl FromStr for HorizonSpec {
    type Err = Error;
    fn from_str(src: &str) -> Result<HorizonSpec> {
        let mut tokens = src.split_whitespace();
        let spec = HorizonSpec::parse_tokens(&mut tokens, src)?;
        if tokens.next().is_some() {
            return Err(Error::Usage(format!("horizon {src:?}: trailing tokens")));
        }
        Ok(spec)
    }
}

impl fmt::Display for HorizonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonSpec::Point(i) => write!(f, "point {i}"),
            HorizonSpec::Line(i) => write!(f, "line {i}"),
            HorizonSpec::Plane(i) => write!(f, "plane {i}"),
            HorizonSpec::Perp(i) => write!(f, "perp {i}"),
            HorizonSpec::Meet(a, b) => write!(f, "meet {a} {b}"),
            HorizonSpec::Span(ids) => {
                let list: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                write!(f, "span {}", list.join(","))
            }
        }
    }
}
