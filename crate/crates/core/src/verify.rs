//! Isomorphism checking between incidence structures, and the battery of
//! executable properties run against a complement.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complement::Complement;
use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, PointSet};
use crate::polar::check_polar_axioms;
use crate::reconstruct::{canonical_map, class_infinity_points, reconstruct, IntrinsicGeometry};

/// A bijection between the point sets of two structures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PointMap(Vec<usize>);

impl PointMap {
    pub fn new(images: Vec<usize>, target_points: usize) -> Result<PointMap> {
        if images.len() != target_points {
            return Err(Error::Usage(format!(
                "map has {} points, target has {target_points}",
                images.len()
            )));
        }
        let mut hit = vec![false; target_points];
        for &x in &images {
            if x >= target_points || std::mem::replace(&mut hit[x], true) {
                return Err(Error::Usage(format!("point map is not a bijection at image {x}")));
            }
        }
        Ok(PointMap(images))
    }

    pub fn identity(n: usize) -> PointMap {
        PointMap((0..n).collect())
    }
    pub fn image(&self, p: usize) -> usize {
        self.0[p]
    }
    pub fn images(&self) -> &[usize] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    /// `self` followed by `next`.
    pub fn then(&self, next: &PointMap) -> PointMap {
        PointMap(self.0.iter().map(|&p| next.0[p]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoCertificate {
    pub holds: bool,
    /// Line of `b` matched to each line of `a` (when it holds).
    pub line_map: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

/// Checks that `m` carries the lines of `a` bijectively onto the lines of `b`.
pub fn is_isomorphism(a: &IncidenceStructure, b: &IncidenceStructure, m: &PointMap) -> Result<IsoCertificate> {
    if a.n_points() != b.n_points() || m.len() != a.n_points() {
        return Err(Error::Usage(format!(
            "point map of size {} between structures of {} and {} points",
            m.len(),
            a.n_points(),
            b.n_points()
        )));
    }
    let fail = |why: String| Ok(IsoCertificate { holds: false, line_map: Vec::new(), violation: Some(why) });
    let mut line_map = Vec::with_capacity(a.n_lines());
    let mut used = vec![false; b.n_lines()];
    for (id, line) in a.lines().iter().enumerate() {
        let image: Vec<usize> = line.iter().map(|&p| m.image(p)).collect();
        match b.find_line(&image) {
            Some(t) if !used[t] => {
                used[t] = true;
                line_map.push(t);
            }
            Some(t) => return fail(format!("lines of a map twice onto line {t} of b")),
            None => return fail(format!("line {id} {line:?} of a maps to {image:?}, not a line of b")),
        }
    }
    if let Some(t) = used.iter().position(|u| !u) {
        return fail(format!("line {t} of b is not an image"));
    }
    Ok(IsoCertificate { holds: true, line_map, violation: None })
}

/// Incidence graph of two structures side by side: `a`'s points, `a`'s lines,
/// then `b`'s points and lines.
struct JointGraph {
    adj: Vec<Vec<usize>>,
    split: usize,
    a_points: usize,
    b_points: usize,
}

impl JointGraph {
    fn new(a: &IncidenceStructure, b: &IncidenceStructure) -> JointGraph {
        let mut adj = Vec::new();
        let add = |s: &IncidenceStructure, base: usize, adj: &mut Vec<Vec<usize>>| {
            let np = s.n_points();
            adj.extend((0..np).map(|p| s.lines_through(p).iter().map(|&l| base + np + l).collect::<Vec<_>>()));
            adj.extend(s.lines().iter().map(|l| l.iter().map(|&p| base + p).collect::<Vec<_>>()));
        };
        add(a, 0, &mut adj);
        let split = adj.len();
        add(b, split, &mut adj);
        JointGraph { adj, split, a_points: a.n_points(), b_points: b.n_points() }
    }

    fn is_point(&self, v: usize) -> bool {
        if v < self.split {
            v < self.a_points
        } else {
            v - self.split < self.b_points
        }
    }

    /// Colour refinement to the coarsest equitable partition; colours are
    /// numbered canonically so both halves stay comparable.
    fn refine(&self, colors: &mut Vec<u32>) {
        let mut count = colors.iter().collect::<std::collections::HashSet<_>>().len();
        loop {
            let sigs: Vec<(u32, Vec<u32>)> = (0..colors.len())
                .map(|v| {
                    let mut nb: Vec<u32> = self.adj[v].iter().map(|&w| colors[w]).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let mut ids: BTreeMap<&(u32, Vec<u32>), u32> = sigs.iter().map(|s| (s, 0)).collect();
            for (i, v) in ids.values_mut().enumerate() {
                *v = i as u32;
            }
            let next: Vec<u32> = sigs.iter().map(|s| ids[s]).collect();
            let new_count = ids.len();
            *colors = next;
            if new_count == count {
                return;
            }
            count = new_count;
        }
    }

    fn balanced(&self, colors: &[u32]) -> bool {
        let mut diff: HashMap<u32, i64> = HashMap::new();
        for (v, &c) in colors.iter().enumerate() {
            *diff.entry(c).or_default() += if v < self.split { 1 } else { -1 };
        }
        diff.values().all(|&d| d == 0)
    }

    fn search(&self, a: &IncidenceStructure, b: &IncidenceStructure, mut colors: Vec<u32>) -> Option<PointMap> {
        self.refine(&mut colors);
        if !self.balanced(&colors) {
            return None;
        }
        let mut cells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for v in 0..self.split {
            cells.entry(colors[v]).or_default().push(v);
        }
        let target = cells
            .iter()
            .filter(|(_, vs)| vs.len() > 1)
            .min_by_key(|(_, vs)| (!self.is_point(vs[0]), vs.len()));
        let Some((&color, vs)) = target else {
            let mut by_color: HashMap<u32, usize> = HashMap::new();
            for v in self.split..self.split + self.b_points {
                by_color.insert(colors[v], v - self.split);
            }
            let images: Vec<usize> = (0..self.a_points).map(|v| by_color[&colors[v]]).collect();
            let m = PointMap::new(images, self.b_points).ok()?;
            return is_isomorphism(a, b, &m).ok()?.holds.then_some(m);
        };
        let v = vs[0];
        let fresh = colors.iter().max().unwrap() + 1;
        for w in (self.split..colors.len()).filter(|&w| colors[w] == color) {
            let mut next = colors.clone();
            next[v] = fresh;
            next[w] = fresh;
            if let Some(m) = self.search(a, b, next) {
                return Some(m);
            }
        }
        None
    }
}

/// Backtracking search for an isomorphism, with colour refinement on the
/// incidence graphs. Complete: `None` means no isomorphism exists.
pub fn find_isomorphism(a: &IncidenceStructure, b: &IncidenceStructure) -> Option<PointMap> {
    if a.n_points() != b.n_points() || a.n_lines() != b.n_lines() {
        return None;
    }
    let g = JointGraph::new(a, b);
    let colors: Vec<u32> = (0..g.adj.len()).map(|v| if g.is_point(v) { 0 } else { 1 }).collect();
    g.search(a, b, colors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub status: Status,
    /// Number of cases examined.
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Knobs for the sampled checks.
#[derive(Clone, Debug)]
pub struct BatteryOptions {
    pub seed: u64,
    /// Parallel pairs examined for the extension and plane-chain checks.
    pub pair_sample: usize,
    /// Class triples examined when there are too many classes to enumerate.
    pub triple_sample: usize,
    /// Enumerate all class triples up to this many classes.
    pub exhaustive_class_limit: usize,
    /// Ignore the sample sizes and enumerate everything.
    pub exhaustive: bool,
    /// Also run the independent isomorphism search.
    pub search_isomorphism: bool,
    /// Record wall-clock time per check (breaks byte-identical output).
    pub timings: bool,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            seed: 0,
            pair_sample: 500,
            triple_sample: 2000,
            exhaustive_class_limit: 40,
            exhaustive: false,
            search_isomorphism: false,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BatteryReport {
    pub checks: Vec<CheckResult>,
}

impl BatteryReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check_id == id)
    }
}

struct Recorder {
    timings: bool,
    checks: Vec<CheckResult>,
}

impl Recorder {
    /// Runs `f`, which returns the number of cases or a witness of failure.
    fn run(&mut self, id: &str, f: impl FnOnce() -> std::result::Result<usize, String>) {
        let t = Instant::now();
        let out = f();
        let elapsed_ms = self.timings.then(|| t.elapsed().as_millis() as u64);
        let (status, cases, witness) = match out {
            Ok(n) => (Status::Pass, n, None),
            Err(w) => (Status::Fail, 0, Some(w)),
        };
        self.checks.push(CheckResult { check_id: id.into(), status, cases, witness, elapsed_ms });
    }

    fn skip(&mut self, id: &str, why: &str) {
        self.checks.push(CheckResult {
            check_id: id.into(),
            status: Status::Skip,
            cases: 0,
            witness: Some(why.into()),
            elapsed_ms: None,
        });
    }
}

/// Distinct parallel pairs `(k, l)`, `k < l`, all or a seeded sample.
pub fn parallel_pairs(c: &Complement, opts: &BatteryOptions) -> Vec<(usize, usize)> {
    let affine = c.affine_lines();
    let mut pairs = Vec::new();
    for (i, &k) in affine.iter().enumerate() {
        for &l in &affine[i + 1..] {
            if c.horizon_parallel(k, l) {
                pairs.push((k, l));
            }
        }
    }
    if opts.exhaustive || pairs.len() <= opts.pair_sample {
        return pairs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut idx = sample(&mut rng, pairs.len(), opts.pair_sample).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pairs[i]).collect()
}

/// Class triples `a < b < c`, all or a seeded sample.
pub fn class_triples(n: usize, opts: &BatteryOptions) -> Vec<(usize, usize, usize)> {
    if opts.exhaustive || n <= opts.exhaustive_class_limit {
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    out.push((a, b, c));
                }
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < opts.triple_sample {
        let mut t = sample(&mut rng, n, 3).into_vec();
        t.sort_unstable();
        seen.insert((t[0], t[1], t[2]));
    }
    seen.into_iter().collect()
}

/// Runs every property check against a complement. Never fails itself;
/// failures are reported per check with a witness.
pub fn run_lemma_battery(c: &Complement, opts: &BatteryOptions) -> BatteryReport {
    let mut rec = Recorder { timings: opts.timings, checks: Vec::new() };
    let base = c.base().structure();
    let w = c.horizon();
    let n_lines = c.n_lines();

    rec.run("complement_partial_linear", || match c.structure().partial_linear_witness() {
        None => Ok(n_lines),
        Some((a, b)) => Err(format!("proper lines {a} and {b}")),
    });

    rec.run("horizon_parallel_equivalence", || {
        let rows: Vec<PointSet> = (0..n_lines)
            .map(|k| PointSet::from_points(n_lines, (0..n_lines).filter(|&l| c.horizon_parallel(k, l))))
            .collect();
        for k in c.affine_lines() {
            if !rows[k].contains(k) {
                return Err(format!("affine line {k} not parallel to itself"));
            }
        }
        for k in 0..n_lines {
            for l in rows[k].iter() {
                if !rows[l].contains(k) {
                    return Err(format!("{k} parallel to {l} but not conversely"));
                }
                if rows[k] != rows[l] {
                    return Err(format!("transitivity fails through {k} and {l}"));
                }
            }
        }
        Ok(n_lines * n_lines)
    });

    rec.run("deep_points", || {
        let deep = c.deep_points();
        if c.horizon_is_hyperplane() {
            if deep.len() > 1 {
                return Err(format!("hyperplane horizon with deep points {deep:?}"));
            }
            let rad = base.radical_of(w);
            if !deep.is_subset(&rad) {
                return Err(format!("deep points {deep:?} outside the radical {rad:?}"));
            }
        } else {
            if !deep.is_empty() {
                return Err(format!("non-hyperplane horizon with deep points {deep:?}"));
            }
            if !base.is_spiky(w) {
                return Err("non-hyperplane horizon is not spiky".into());
            }
        }
        Ok(w.len())
    });

    let pairs = parallel_pairs(c, opts);
    rec.run("hyperplane_extension", || {
        for &(k, l) in &pairs {
            let h = c.extend_to_avoiding_hyperplane(k, l).map_err(|e| format!("({k},{l}): {e}"))?;
            let kbar = base.line_set(c.closure(k));
            let lbar = base.line_set(c.closure(l));
            if !base.is_hyperplane(&h) || !w.is_subset(&h) || kbar.is_subset(&h) || lbar.is_subset(&h) {
                return Err(format!("({k},{l}): returned set fails the contract"));
            }
        }
        Ok(pairs.len())
    });

    rec.run("plane_path", || {
        let planes = c.complement_planes();
        for &(k, l) in &pairs {
            let path = c.plane_path(k, l).map_err(|e| format!("({k},{l}): {e}"))?;
            let apex = c.point_at_infinity(k).map_err(|e| e.to_string())?;
            let ok = !path.is_empty()
                && planes[path[0]].lines.contains(&k)
                && planes[*path.last().unwrap()].lines.contains(&l)
                && path.iter().all(|&p| planes[p].closure.contains(apex))
                && path.windows(2).all(|ws| planes[ws[0]].lines.iter().any(|x| planes[ws[1]].lines.contains(x)));
            if !ok {
                return Err(format!("({k},{l}): path {path:?} violates the chain conditions"));
            }
        }
        Ok(pairs.len())
    });

    let geom = IntrinsicGeometry::new(c);

    rec.run("parallel_coincidence", || {
        for k in 0..n_lines {
            for l in 0..n_lines {
                if geom.parallel(k, l) != c.horizon_parallel(k, l) {
                    return Err(format!(
                        "lines {k}, {l}: intrinsic {} vs horizon {}",
                        geom.parallel(k, l),
                        c.horizon_parallel(k, l)
                    ));
                }
            }
        }
        Ok(n_lines * n_lines)
    });

    rec.run("parallel_reflexive", || {
        let affine = c.affine_lines();
        for &k in &affine {
            if geom.star_partners(k).is_empty() {
                return Err(format!("affine line {k} has no Veblen partner"));
            }
        }
        Ok(affine.len())
    });

    rec.run("affine_distinguished", || {
        let a = c.affine_lines();
        let b = geom.intrinsic_affine_lines();
        if a == b {
            Ok(a.len())
        } else {
            let diff: Vec<_> = a.iter().filter(|x| !b.contains(x)).chain(b.iter().filter(|x| !a.contains(x))).collect();
            Err(format!("affine line sets differ at {diff:?}"))
        }
    });

    let infinity = class_infinity_points(&geom);
    rec.run("class_bijection", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        let expect = w.difference(&c.deep_points());
        let got = PointSet::from_points(w.universe(), pts.iter().copied());
        if got.len() != pts.len() {
            let dup = pts.iter().enumerate().find_map(|(i, p)| {
                pts[i + 1..].iter().position(|q| q == p).map(|j| (i, i + 1 + j, *p))
            });
            if let Some((a, b, p)) = dup {
                return Err(format!("classes {a} and {b} both reach horizon point {p}"));
            }
        }
        if got != expect {
            return Err(format!("classes reach {got:?}, expected {expect:?}"));
        }
        Ok(pts.len())
    });

    if c.horizon_is_hyperplane() {
        for id in [
            "equiv_deep_line",
            "pairwise_equiv_collinear",
            "ternary_collinearity",
            "prime_lines",
            "second_lines",
            "reconstruction_axioms",
            "canonical_isomorphism",
        ] {
            rec.skip(id, "hyperplane horizon: delegated case");
        }
        return BatteryReport { checks: rec.checks };
    }

    let deep_lines: Vec<usize> = c.deep_lines();
    let nc = geom.n_classes();
    let collinear3 = |x: usize, y: usize, z: usize| {
        base.line_through(x, y).is_some_and(|t| base.line(t).contains(&z))
    };

    rec.run("equiv_deep_line", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        let mut cases = 0;
        for a in 0..nc {
            for b in a + 1..nc {
                cases += 1;
                let truth = base
                    .line_through(pts[a], pts[b])
                    .is_some_and(|t| deep_lines.contains(&t));
                if geom.equiv_classes(a, b) != truth {
                    return Err(format!(
                        "classes {a}, {b} (points {}, {}): anti-euclidean {} vs deep line {truth}",
                        pts[a],
                        pts[b],
                        geom.equiv_classes(a, b)
                    ));
                }
            }
        }
        Ok(cases)
    });

    let triples = class_triples(nc, opts);
    rec.run("pairwise_equiv_collinear", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        let mut cases = 0;
        for &(a, b, d) in &triples {
            if geom.equiv_classes(a, b) && geom.equiv_classes(b, d) && geom.equiv_classes(d, a) {
                cases += 1;
                if !collinear3(pts[a], pts[b], pts[d]) {
                    return Err(format!("classes {a}, {b}, {d} pairwise anti-euclidean, points not collinear"));
                }
            }
        }
        Ok(cases)
    });

    rec.run("ternary_collinearity", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        for &(a, b, d) in &triples {
            let got = geom.ternary_collinear(a, b, d).map_err(|e| e.to_string())?;
            let truth = collinear3(pts[a], pts[b], pts[d]);
            if got != truth {
                return Err(format!("classes {a}, {b}, {d}: intrinsic {got} vs ambient {truth}"));
            }
        }
        Ok(triples.len())
    });

    let to_points = |sets: Vec<Vec<usize>>, pts: &[usize]| -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().map(|cl| pts[cl]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        out.sort();
        out
    };

    rec.run("prime_lines", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        if let Some((g, h)) = geom.prime_line_violations().first() {
            return Err(format!("generating pairs {g:?} and {h:?} give different lines"));
        }
        let got = to_points(geom.lines_prime(), pts);
        let mut expect: Vec<Vec<usize>> = deep_lines.iter().map(|&t| base.line(t).to_vec()).collect();
        expect.sort();
        if got != expect {
            return Err(format!("anti-euclidean lines {got:?} vs deep lines {expect:?}"));
        }
        Ok(got.len())
    });

    rec.run("second_lines", || {
        let pts = infinity.as_ref().map_err(|e| e.to_string())?;
        let got = to_points(geom.lines_second(), pts);
        let mut expect: Vec<Vec<usize>> = c
            .semiaffine_planes()
            .into_iter()
            .map(|pl| c.plane_horizon(pl).expect("semiaffine").to_vec())
            .filter(|h| h.len() >= 2)
            .collect();
        expect.sort();
        expect.dedup();
        if got != expect {
            return Err(format!("plane horizons {got:?} vs {expect:?}"));
        }
        if let Some(t) = got.iter().find(|l| deep_lines.iter().any(|&d| base.line(d) == l.as_slice())) {
            return Err(format!("{t:?} is both a deep line and a plane horizon"));
        }
        Ok(got.len())
    });

    let recon = reconstruct(&geom);
    rec.run("reconstruction_axioms", || {
        let r = recon.as_ref().map_err(|e| e.to_string())?;
        if let Some(l) = r.family_overlap().first() {
            return Err(format!("{l:?} occurs in both class-line families"));
        }
        let rep = check_polar_axioms(r.structure());
        if !rep.all_hold() {
            let w = [&rep.partial_linear, &rep.thick, &rep.nondegenerate, &rep.one_or_all]
                .iter()
                .find_map(|c| c.witness.clone());
            return Err(w.unwrap_or_default());
        }
        if rep.rank != c.base().rank() {
            return Err(format!("rank {} vs ambient rank {}", rep.rank, c.base().rank()));
        }
        Ok(r.structure().n_lines())
    });

    rec.run("canonical_isomorphism", || {
        let r = recon.as_ref().map_err(|e| e.to_string())?;
        let m = canonical_map(&geom, r).map_err(|e| e.to_string())?;
        let cert = is_isomorphism(base, r.structure(), &m).map_err(|e| e.to_string())?;
        match cert.violation {
            None => Ok(cert.line_map.len()),
            Some(v) => Err(v),
        }
    });

    if opts.search_isomorphism {
        rec.run("search_isomorphism", || {
            let r = recon.as_ref().map_err(|e| e.to_string())?;
            match find_isomorphism(base, r.structure()) {
                Some(m) if is_isomorphism(base, r.structure(), &m).map(|c| c.holds).unwrap_or(false) => {
                    Ok(base.n_points())
                }
                Some(_) => Err("search returned a map that is not an isomorphism".into()),
                None => Err("no isomorphism found".into()),
            }
        });
    }

    BatteryReport { checks: rec.checks }
}
