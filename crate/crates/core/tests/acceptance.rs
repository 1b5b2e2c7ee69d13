//! Acceptance suite: one line per criterion, then the same recovery criteria
//! over GF(3) as a supplementary block. Exits non-zero when any numbered
//! criterion fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use polar_recover::cli::{run_job, suite_horizons, JobSpec, DEFAULT_FORMS, ORDER_THREE_FORMS};
use polar_recover::complement::{Complement, HorizonSpec};
use polar_recover::polar::{check_polar_axioms, PolarSpace};
use polar_recover::reconstruct::{canonical_map, class_infinity_points, reconstruct, IntrinsicGeometry};
use polar_recover::verify::{
    class_triples, find_isomorphism, is_isomorphism, parallel_pairs, run_lemma_battery, BatteryOptions, Status,
};

// Pinned limits.
const AXIOMS_LIMIT: Duration = Duration::from_secs(10);
const PERP_LIMIT: Duration = Duration::from_secs(5);
const DEEP_POINT_LIMIT: Duration = Duration::from_secs(30);
const PARALLEL_TABLE_LIMIT: Duration = Duration::from_secs(60);
const RECOVERY_LIMIT: Duration = Duration::from_secs(120);
const PAIR_SAMPLE: usize = 500;
const TRIPLE_SAMPLE: usize = 2000;
const EXHAUSTIVE_CLASSES: usize = 40;
const MIN_NON_HYPERPLANE_HORIZONS: usize = 20;

struct Config {
    form: &'static str,
    horizon: HorizonSpec,
    complement: Complement,
}

impl Config {
    fn label(&self) -> String {
        format!("{} [{}]", self.form, self.horizon)
    }
}

fn configs(forms: &[&'static str]) -> Vec<Config> {
    let mut out = Vec::new();
    for &form in forms {
        let ps = Arc::new(PolarSpace::from_descriptor(form).unwrap());
        for horizon in suite_horizons(&ps) {
            let w = horizon.resolve(&ps).unwrap();
            let complement = Complement::build(ps.clone(), w).unwrap();
            out.push(Config { form, horizon, complement });
        }
    }
    out
}

fn options() -> BatteryOptions {
    BatteryOptions {
        seed: 0,
        pair_sample: PAIR_SAMPLE,
        triple_sample: TRIPLE_SAMPLE,
        exhaustive_class_limit: EXHAUSTIVE_CLASSES,
        ..BatteryOptions::default()
    }
}

/// Outcome of one criterion: per-configuration failures, plus a summary.
struct Outcome {
    failures: Vec<String>,
    summary: String,
}

impl Outcome {
    fn new(summary: impl Into<String>) -> Outcome {
        Outcome { failures: Vec::new(), summary: summary.into() }
    }
    fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
    }
    fn check_time(&mut self, what: &str, t: Instant, limit: Duration) {
        if t.elapsed() > limit {
            self.fail(format!("{what} took {:?} (limit {limit:?})", t.elapsed()));
        }
    }
}

fn polar_axioms() -> Outcome {
    let mut o = Outcome::new("partial-linear, thick, nondegenerate, one-or-all, rank 3");
    for form in DEFAULT_FORMS {
        let t = Instant::now();
        let ps = PolarSpace::from_descriptor(form).unwrap();
        let rep = check_polar_axioms(ps.structure());
        if !rep.all_hold() || rep.rank != 3 {
            o.fail(format!("{form}: {rep:?}"));
        }
        o.check_time(form, t, AXIOMS_LIMIT);
    }
    o
}

fn perps_are_hyperplanes() -> Outcome {
    let mut o = Outcome::new("63 perps of sp:6:2");
    let ps = PolarSpace::from_descriptor("sp:6:2").unwrap();
    let t = Instant::now();
    let s = ps.structure();
    for a in 0..s.n_points() {
        if !s.is_hyperplane(s.perp_of(a)) {
            o.fail(format!("perp of {a}"));
        }
    }
    o.check_time("perps", t, PERP_LIMIT);
    o
}

fn deep_points() -> Outcome {
    let ps = Arc::new(PolarSpace::from_descriptor("sp:6:2").unwrap());
    let s = ps.structure();
    let t = Instant::now();
    let mut o = Outcome::new("");
    for a in 0..s.n_points() {
        let w = s.perp_of(a).clone();
        let c = Complement::build(ps.clone(), w.clone()).unwrap();
        let deep = c.deep_points();
        if deep.to_vec() != vec![a] || !deep.is_subset(&s.radical_of(&w)) {
            o.fail(format!("perp {a}: deep points {deep:?}"));
        }
    }
    let mut horizons: Vec<String> = Vec::new();
    for i in (0..s.n_points()).step_by(8) {
        horizons.push(format!("point {i}"));
    }
    for i in (0..s.n_lines()).step_by(40) {
        horizons.push(format!("line {i}"));
    }
    for b in (1..s.n_points()).step_by(7) {
        horizons.push(format!("meet perp 0 perp {b}"));
    }
    for src in &horizons {
        let w = src.parse::<HorizonSpec>().unwrap().resolve(&ps).unwrap();
        let c = Complement::build(ps.clone(), w.clone()).unwrap();
        if c.horizon_is_hyperplane() {
            o.fail(format!("{src} is a hyperplane"));
        }
        if !c.deep_points().is_empty() || !s.is_spiky(&w) {
            o.fail(format!("{src}: deep points {:?}, spiky {}", c.deep_points(), s.is_spiky(&w)));
        }
    }
    if horizons.len() < MIN_NON_HYPERPLANE_HORIZONS {
        o.fail(format!("only {} non-hyperplane horizons", horizons.len()));
    }
    o.check_time("deep points", t, DEEP_POINT_LIMIT);
    o.summary = format!("63 hyperplanes, {} non-hyperplane horizons", horizons.len());
    o
}

fn hyperplane_extension(cfgs: &[Config]) -> Outcome {
    let mut total = 0;
    let mut o = Outcome::new("");
    for cfg in cfgs {
        let c = &cfg.complement;
        let base = c.base().structure();
        for (k, l) in parallel_pairs(c, &options()) {
            total += 1;
            match c.extend_to_avoiding_hyperplane(k, l) {
                Ok(h) => {
                    let ok = base.is_hyperplane(&h)
                        && c.horizon().is_subset(&h)
                        && !base.line_set(c.closure(k)).is_subset(&h)
                        && !base.line_set(c.closure(l)).is_subset(&h);
                    if !ok {
                        o.fail(format!("{}: ({k},{l}) bad hyperplane", cfg.label()));
                    }
                }
                Err(e) => o.fail(format!("{}: ({k},{l}) {e}", cfg.label())),
            }
        }
    }
    o.summary = format!("{total} parallel pairs over {} configurations", cfgs.len());
    o
}

fn plane_paths(cfgs: &[Config]) -> Outcome {
    let mut total = 0;
    let mut o = Outcome::new("");
    for cfg in cfgs {
        let c = &cfg.complement;
        let planes = c.complement_planes();
        for (k, l) in parallel_pairs(c, &options()) {
            total += 1;
            let apex = c.point_at_infinity(k).unwrap();
            match c.plane_path(k, l) {
                Ok(path) => {
                    let ok = !path.is_empty()
                        && planes[path[0]].lines.contains(&k)
                        && planes[*path.last().unwrap()].lines.contains(&l)
                        && path.iter().all(|&p| planes[p].closure.contains(apex))
                        && path.windows(2).all(|w| planes[w[0]].lines.iter().any(|x| planes[w[1]].lines.contains(x)));
                    if !ok {
                        o.fail(format!("{}: ({k},{l}) path {path:?}", cfg.label()));
                    }
                }
                Err(e) => o.fail(format!("{}: ({k},{l}) {e}", cfg.label())),
            }
        }
    }
    o.summary = format!("{total} parallel pairs over {} configurations", cfgs.len());
    o
}

fn parallel_coincidence(cfgs: &[Config]) -> Outcome {
    let mut o = Outcome::new("");
    let mut entries = 0;
    for cfg in cfgs {
        let t = Instant::now();
        let c = &cfg.complement;
        let g = IntrinsicGeometry::new(c);
        let n = c.n_lines();
        let mut bad = 0;
        let mut first = None;
        for k in 0..n {
            for l in 0..n {
                if g.parallel(k, l) != c.horizon_parallel(k, l) {
                    bad += 1;
                    first.get_or_insert((k, l));
                }
            }
        }
        entries += n * n;
        if let Some((k, l)) = first {
            o.fail(format!("{}: {bad} of {} entries differ, first ({k},{l})", cfg.label(), n * n));
        }
        o.check_time(&cfg.label(), t, PARALLEL_TABLE_LIMIT);
    }
    o.summary = format!("{entries} table entries over {} configurations", cfgs.len());
    o
}

fn affine_distinguished(cfgs: &[Config]) -> Outcome {
    let mut o = Outcome::new(format!("{} configurations", cfgs.len()));
    for cfg in cfgs {
        let c = &cfg.complement;
        let truth = c.affine_lines();
        let got = IntrinsicGeometry::new(c).intrinsic_affine_lines();
        if truth != got {
            o.fail(format!("{}: {} intrinsic vs {} affine", cfg.label(), got.len(), truth.len()));
        }
    }
    o
}

/// Horizon point of each class, read from the ambient space.
fn infinity_points(g: &IntrinsicGeometry<'_>) -> Result<Vec<usize>, String> {
    let pts = class_infinity_points(g).map_err(|e| e.to_string())?;
    if pts.iter().collect::<BTreeSet<_>>().len() != pts.len() {
        return Err("two classes share a horizon point".into());
    }
    Ok(pts)
}

fn deep_line_detection(cfgs: &[Config]) -> Outcome {
    let mut o = Outcome::new("");
    let mut pairs = 0;
    let mut with_lines = 0;
    let mut deep_total = 0;
    for cfg in cfgs {
        let c = &cfg.complement;
        let base = c.base().structure();
        if c.horizon_is_hyperplane() || base.lines_within(c.horizon()).is_empty() {
            continue;
        }
        with_lines += 1;
        let deep = c.deep_lines();
        deep_total += deep.len();
        let g = IntrinsicGeometry::new(c);
        let pts = match infinity_points(&g) {
            Ok(p) => p,
            Err(e) => {
                o.fail(format!("{}: {e}", cfg.label()));
                continue;
            }
        };
        let mut bad = 0;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                pairs += 1;
                let truth = base.line_through(pts[a], pts[b]).is_some_and(|t| deep.contains(&t));
                if g.equiv_classes(a, b) != truth {
                    bad += 1;
                }
            }
        }
        if bad > 0 {
            o.fail(format!("{}: {bad} class pairs disagree", cfg.label()));
        }
    }
    o.summary = format!("{pairs} class pairs in {with_lines} configurations with lines in W, {deep_total} deep lines");
    o
}

fn ternary_collinearity(cfgs: &[Config]) -> Outcome {
    let mut o = Outcome::new("");
    let mut total = 0;
    for cfg in cfgs {
        let c = &cfg.complement;
        if c.horizon_is_hyperplane() {
            continue;
        }
        let base = c.base().structure();
        let g = IntrinsicGeometry::new(c);
        let pts = match infinity_points(&g) {
            Ok(p) => p,
            Err(e) => {
                o.fail(format!("{}: {e}", cfg.label()));
                continue;
            }
        };
        let mut bad = 0;
        let triples = class_triples(pts.len(), &options());
        let expected = if pts.len() <= EXHAUSTIVE_CLASSES {
            pts.len() * pts.len().saturating_sub(1) * pts.len().saturating_sub(2) / 6
        } else {
            TRIPLE_SAMPLE
        };
        if triples.len() != expected {
            o.fail(format!("{}: {} triples examined, expected {expected}", cfg.label(), triples.len()));
        }
        for (a, b, d) in triples {
            total += 1;
            let truth = base.line_through(pts[a], pts[b]).is_some_and(|t| base.line(t).contains(&pts[d]));
            if g.ternary_collinear(a, b, d).ok() != Some(truth) {
                bad += 1;
            }
        }
        if bad > 0 {
            o.fail(format!("{}: {bad} triples disagree", cfg.label()));
        }
    }
    o.summary = format!("{total} class triples");
    o
}

fn recovery(cfgs: &[Config]) -> Outcome {
    let mut o = Outcome::new("");
    let mut checked = 0;
    let mut searched: Vec<&str> = Vec::new();
    for cfg in cfgs {
        let c = &cfg.complement;
        if c.horizon_is_hyperplane() {
            continue;
        }
        checked += 1;
        let t = Instant::now();
        let base = c.base().structure();
        let g = IntrinsicGeometry::new(c);
        let r = match reconstruct(&g) {
            Ok(r) => r,
            Err(e) => {
                o.fail(format!("{}: {e}", cfg.label()));
                continue;
            }
        };
        match canonical_map(&g, &r).and_then(|m| is_isomorphism(base, r.structure(), &m)) {
            Ok(cert) if cert.holds => {}
            Ok(cert) => o.fail(format!("{}: {}", cfg.label(), cert.violation.unwrap_or_default())),
            Err(e) => o.fail(format!("{}: {e}", cfg.label())),
        }
        if !searched.contains(&cfg.form) {
            if let Some(m) = find_isomorphism(base, r.structure()) {
                if is_isomorphism(base, r.structure(), &m).is_ok_and(|c| c.holds) {
                    searched.push(cfg.form);
                }
            }
        }
        o.check_time(&cfg.label(), t, RECOVERY_LIMIT);
    }
    let forms: BTreeSet<&str> = cfgs.iter().map(|c| c.form).collect();
    for form in &forms {
        if !searched.contains(form) {
            o.fail(format!("{form}: search found no isomorphism for any configuration"));
        }
    }
    o.summary = format!("{checked} reconstructions, search witnesses for {}/{} spaces", searched.len(), forms.len());
    o
}

fn mutation() -> Outcome {
    let ps = Arc::new(PolarSpace::from_descriptor("sp:6:2").unwrap());
    let mut o = Outcome::new("");
    let mut caught = 0;
    let mut tried = 0;
    for src in ["point 5", "line 0"] {
        let w = src.parse::<HorizonSpec>().unwrap().resolve(&ps).unwrap();
        let c = Complement::build(ps.clone(), w).unwrap();
        let clean = run_lemma_battery(&c, &options());
        if clean.failed() != 0 {
            o.fail(format!("{src}: unmodified complement already fails"));
            continue;
        }
        for id in [0, c.affine_lines()[0], c.n_lines() / 2] {
            tried += 1;
            let rep = run_lemma_battery(&c.with_line_removed(id).unwrap(), &options());
            let failing: Vec<_> = rep.checks.iter().filter(|ch| ch.status == Status::Fail).collect();
            if !failing.is_empty() && failing.iter().all(|ch| ch.witness.as_deref().is_some_and(|w| !w.is_empty())) {
                caught += 1;
            } else {
                o.fail(format!("{src}: removing line {id} went unnoticed"));
            }
        }
    }
    o.summary = format!("{caught}/{tried} deletions caught with a witness");
    o
}

fn determinism() -> Outcome {
    let mut o = Outcome::new("");
    let jobs = [("sp:6:2", "point 5"), ("q:6:2", "line 0"), ("q+:5:2", "meet perp 0 perp 1")];
    let mut files = 0;
    for (form, horizon) in jobs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let outputs: Vec<Vec<(String, Vec<u8>)>> = dirs
            .iter()
            .map(|d| {
                let job = JobSpec::new(form, horizon, "all", d.path()).unwrap();
                let out = run_job(&job).unwrap();
                let mut v: Vec<(String, Vec<u8>)> = out
                    .files
                    .iter()
                    .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
                    .collect();
                v.sort();
                v
            })
            .collect();
        files += outputs[0].len();
        if outputs[0] != outputs[1] {
            o.fail(format!("{form} [{horizon}]: outputs differ"));
        }
    }
    o.summary = format!("{} jobs, {files} files compared byte for byte", jobs.len());
    o
}

fn report(label: &str, o: &Outcome) -> bool {
    let ok = o.failures.is_empty();
    println!("{label:<44} {} ({})", if ok { "PASS" } else { "FAIL" }, o.summary);
    for f in &o.failures {
        println!("    - {f}");
    }
    ok
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let default = configs(&DEFAULT_FORMS);
    let mut all_ok = true;
    println!("acceptance suite: {} default configurations", default.len());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("criterion 1: polar axioms", Box::new(polar_axioms)),
        ("criterion 2: perps are hyperplanes", Box::new(perps_are_hyperplanes)),
        ("criterion 3: deep points", Box::new(deep_points)),
        ("criterion 4: hyperplane extension", Box::new(|| hyperplane_extension(&default))),
        ("criterion 5: plane paths", Box::new(|| plane_paths(&default))),
        ("criterion 6: parallel relations coincide", Box::new(|| parallel_coincidence(&default))),
        ("criterion 7: affine lines distinguished", Box::new(|| affine_distinguished(&default))),
        ("criterion 8: anti-euclidean detects deep lines", Box::new(|| deep_line_detection(&default))),
        ("criterion 9: ternary collinearity", Box::new(|| ternary_collinearity(&default))),
        ("criterion 10: space recovered", Box::new(|| recovery(&default))),
        ("criterion 11: mutation sensitivity", Box::new(mutation)),
        ("criterion 12: determinism", Box::new(determinism)),
    ];
    for (label, f) in &criteria {
        all_ok &= report(label, &f());
    }

    let order_three = configs(&ORDER_THREE_FORMS);
    println!("supplementary: {} configurations over GF(3)", order_three.len());
    let extra: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("  GF(3) criterion 4: hyperplane extension", Box::new(|| hyperplane_extension(&order_three))),
        ("  GF(3) criterion 5: plane paths", Box::new(|| plane_paths(&order_three))),
        ("  GF(3) criterion 6: parallel relations", Box::new(|| parallel_coincidence(&order_three))),
        ("  GF(3) criterion 7: affine lines", Box::new(|| affine_distinguished(&order_three))),
        ("  GF(3) criterion 8: deep lines", Box::new(|| deep_line_detection(&order_three))),
        ("  GF(3) criterion 9: ternary collinearity", Box::new(|| ternary_collinearity(&order_three))),
        ("  GF(3) criterion 10: space recovered", Box::new(|| recovery(&order_three))),
    ];
    for (label, f) in &extra {
        report(label, &f());
    }

    if !all_ok {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
    println!("acceptance: ok");
}
