//! Command-line front end: `build`, `run` and `horizons`.
//!
//! Every JSON artifact is written in one canonical form (struct field order,
//! sorted point and line lists, two-space indentation, LF, trailing newline)
//! so that repeated runs of the same job are byte-identical.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::complement::{Complement, HorizonSpec};
use crate::incidence::IncidenceStructure;
use crate::polar::{check_polar_axioms, AxiomReport, FormKind, FormSpec, PolarSpace};
use crate::reconstruct::{canonical_map, reconstruct, IntrinsicGeometry};
use crate::verify::{find_isomorphism, is_isomorphism, run_lemma_battery, BatteryOptions, CheckResult, Status};
use crate::{Error, Result};

/// Spaces of the default configuration suite.
pub const DEFAULT_FORMS: [&str; 3] = ["sp:6:2", "q+:5:2", "q:6:2"];

/// Spaces over GF(3) run alongside the default suite, where every plane of a
/// complement is an affine plane of order at least 3.
pub const ORDER_THREE_FORMS: [&str; 2] = ["q+:5:3", "sp:6:3"];

const FORMAT: &str = "polar-recover/incidence-v1";

#[derive(Parser, Debug)]
#[command(name = "polar-recover", version, about = "Polar spaces, their complements, and recovery of the space from a complement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a polar space and write its incidence structure as JSON.
    Build {
        /// Form descriptor, e.g. sp:6:2, q+:5:2, q:6:2, q-:7:2, herm:4:4.
        #[arg(long)]
        form: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run tasks on one horizon of one space, or on a whole suite.
    Run(RunArgs),
    /// List candidate horizons of a space with their sizes.
    Horizons {
        #[arg(long)]
        form: String,
        #[arg(long, value_enum)]
        kind: HorizonKind,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, required_unless_present = "suite")]
    pub form: Option<String>,
    /// Horizon in the selection language: `point 5`, `meet perp 0 perp 7`, ...
    #[arg(long, required_unless_present = "suite")]
    pub horizon: Option<String>,
    /// Comma-separated subset of axioms,complement,lemmas,reconstruct,verify, or `all`.
    #[arg(long, default_value = "all")]
    pub tasks: String,
    /// Output directory for the reports.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumerate every pair and triple instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    /// Skip the search-based isomorphism check in the verify task.
    #[arg(long)]
    pub no_search: bool,
    /// Record wall-clock times in the reports (output is then not reproducible).
    #[arg(long)]
    pub timings: bool,
    /// Run a configuration suite instead of a single job.
    #[arg(long, value_enum, conflicts_with_all = ["form", "horizon"])]
    pub suite: Option<Suite>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// sp:6:2, q+:5:2, q:6:2 with the standard horizons.
    Default,
    /// q+:5:3, sp:6:3 with the same horizon kinds.
    OrderThree,
}

impl Suite {
    pub fn forms(self) -> &'static [&'static str] {
        match self {
            Suite::Default => &DEFAULT_FORMS,
            Suite::OrderThree => &ORDER_THREE_FORMS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HorizonKind {
    Points,
    Lines,
    Planes,
    Perps,
    PerpIntersections,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Axioms,
    Complement,
    Lemmas,
    Reconstruct,
    Verify,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Axioms, Task::Complement, Task::Lemmas, Task::Reconstruct, Task::Verify];

    fn needs_reconstruction(self) -> bool {
        matches!(self, Task::Reconstruct | Task::Verify)
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Task> {
        Ok(match s {
            "axioms" => Task::Axioms,
            "complement" => Task::Complement,
            "lemmas" => Task::Lemmas,
            "reconstruct" => Task::Reconstruct,
            "verify" => Task::Verify,
            other => return Err(Error::Config(format!("unknown task {other:?}"))),
        })
    }
}

/// Parses a task list; the result is in dependency order.
pub fn parse_tasks(src: &str) -> Result<Vec<Task>> {
    let mut set = BTreeSet::new();
    for tok in src.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if tok == "all" {
            set.extend(Task::ALL);
        } else {
            set.insert(tok.parse()?);
        }
    }
    if set.is_empty() {
        return Err(Error::Config("empty task list".into()));
    }
    Ok(set.into_iter().collect())
}

/// One validated unit of work.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub form: FormSpec,
    pub horizon: HorizonSpec,
    pub tasks: Vec<Task>,
    pub out: PathBuf,
    pub options: BatteryOptions,
    /// Run the search-based isomorphism check in the verify task.
    pub search: bool,
}

impl JobSpec {
    pub fn new(form: &str, horizon: &str, tasks: &str, out: impl Into<PathBuf>) -> Result<JobSpec> {
        let form = FormSpec::from_descriptor(form).map_err(config)?;
        let horizon = horizon.parse().map_err(config)?;
        Ok(JobSpec {
            form,
            horizon,
            tasks: parse_tasks(tasks)?,
            out: out.into(),
            options: BatteryOptions::default(),
            search: true,
        })
    }
}

/// Descriptor and horizon syntax errors are configuration errors at this level.
fn config(e: Error) -> Error {
    match e {
        Error::Usage(m) | Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Serialize)]
struct Meta {
    format: &'static str,
    version: &'static str,
}

const META: Meta = Meta { format: FORMAT, version: env!("CARGO_PKG_VERSION") };

#[derive(Serialize)]
struct FormInfo {
    descriptor: String,
    kind: FormKind,
    vector_dim: usize,
    projective_dim: usize,
    q: usize,
    rank: usize,
}

impl FormInfo {
    fn of(ps: &PolarSpace) -> FormInfo {
        FormInfo {
            descriptor: ps.form().descriptor(),
            kind: ps.form().kind,
            vector_dim: ps.form().dim,
            projective_dim: ps.form().projective_dim(),
            q: ps.field().order(),
            rank: ps.rank(),
        }
    }
}

#[derive(Serialize)]
struct BuildFile<'a> {
    meta: Meta,
    n_points: usize,
    lines: &'a [Vec<usize>],
    form: FormInfo,
}

/// Canonical JSON text of a built space.
pub fn build_json(ps: &PolarSpace) -> Result<String> {
    let data = ps.structure().to_data();
    to_canonical_json(&BuildFile { meta: META, n_points: data.n_points, lines: &data.lines, form: FormInfo::of(ps) })
}

/// Reads the incidence part of a file written by `build`.
pub fn load_structure(path: &Path) -> Result<IncidenceStructure> {
    let text = fs::read_to_string(path)?;
    let data = serde_json::from_str(&text)?;
    IncidenceStructure::from_data(data)
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct AxiomsFile {
    form: String,
    report: AxiomReport,
}

#[derive(Serialize)]
struct ComplementFile {
    form: String,
    horizon: String,
    horizon_points: Vec<usize>,
    horizon_is_hyperplane: bool,
    proper_points: usize,
    proper_lines: usize,
    affine_lines: usize,
    deep_points: Vec<usize>,
    /// Deep lines as ambient point lists.
    deep_lines: Vec<Vec<usize>>,
    complement_planes: usize,
    semiaffine_planes: usize,
}

#[derive(Serialize)]
struct ChecksFile<'a> {
    form: String,
    horizon: String,
    checks: &'a [CheckResult],
}

#[derive(Serialize)]
struct ReconstructionFile<'a> {
    form: String,
    horizon: String,
    n_proper: usize,
    n_classes: usize,
    n_points: usize,
    lines: &'a [Vec<usize>],
}

#[derive(Serialize)]
struct RunFile<'a> {
    meta: Meta,
    form: String,
    horizon: String,
    tasks: &'a [Task],
    seed: u64,
    exhaustive: bool,
    failed: usize,
    checks: &'a [CheckResult],
}

/// What a finished job produced.
#[derive(Clone, Debug)]
pub struct JobOutcome {
    pub checks: Vec<CheckResult>,
    pub files: Vec<PathBuf>,
}

impl JobOutcome {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
}

fn check(id: &str, cases: usize, witness: Option<String>) -> CheckResult {
    let status = if witness.is_some() { Status::Fail } else { Status::Pass };
    CheckResult { check_id: id.into(), status, cases, witness, elapsed_ms: None }
}

/// Runs a job and writes its reports into `job.out`. Refusals and
/// configuration problems surface before anything is written.
pub fn run_job(job: &JobSpec) -> Result<JobOutcome> {
    let ps = Arc::new(PolarSpace::build(job.form.clone())?);
    run_job_on(job, ps)
}

/// As [`run_job`], reusing an already built space.
pub fn run_job_on(job: &JobSpec, ps: Arc<PolarSpace>) -> Result<JobOutcome> {
    let form = ps.form().descriptor();
    let horizon = job.horizon.to_string();
    let w = job.horizon.resolve(&ps)?;
    let c = Complement::build(ps.clone(), w)?;
    if c.horizon_is_hyperplane() && job.tasks.iter().any(|t| t.needs_reconstruction()) {
        return Err(Error::Refusal("hyperplane horizon: delegated case".into()));
    }
    fs::create_dir_all(&job.out)?;
    let mut out = JobOutcome { checks: Vec::new(), files: Vec::new() };
    let emit = |name: &str, text: String, out: &mut JobOutcome| -> Result<()> {
        let path = job.out.join(name);
        fs::write(&path, text)?;
        out.files.push(path);
        Ok(())
    };

    let base = ps.structure();
    let geom = job.tasks.iter().any(|t| t.needs_reconstruction()).then(|| IntrinsicGeometry::new(&c));
    let recon = geom.as_ref().map(reconstruct).transpose()?;

    for &task in &job.tasks {
        match task {
            Task::Axioms => {
                let report = check_polar_axioms(base);
                for (id, ax) in [
                    ("axiom_partial_linear", &report.partial_linear),
                    ("axiom_thick", &report.thick),
                    ("axiom_nondegenerate", &report.nondegenerate),
                    ("axiom_one_or_all", &report.one_or_all),
                ] {
                    out.checks.push(check(id, base.n_lines(), ax.witness.clone()));
                }
                let rank_ok = (report.rank >= 3).then_some(()).ok_or(format!("rank {} < 3", report.rank));
                out.checks.push(check("axiom_rank", report.rank, rank_ok.err()));
                emit("axioms.json", to_canonical_json(&AxiomsFile { form: form.clone(), report })?, &mut out)?;
            }
            Task::Complement => {
                let mut deep_lines: Vec<Vec<usize>> =
                    c.deep_lines().into_iter().map(|t| base.line(t).to_vec()).collect();
                deep_lines.sort();
                let file = ComplementFile {
                    form: form.clone(),
                    horizon: horizon.clone(),
                    horizon_points: c.horizon().to_vec(),
                    horizon_is_hyperplane: c.horizon_is_hyperplane(),
                    proper_points: c.structure().n_points(),
                    proper_lines: c.n_lines(),
                    affine_lines: c.affine_lines().len(),
                    deep_points: c.deep_points().to_vec(),
                    deep_lines,
                    complement_planes: c.complement_planes().len(),
                    semiaffine_planes: c.semiaffine_planes().len(),
                };
                emit("complement.json", to_canonical_json(&file)?, &mut out)?;
            }
            Task::Lemmas => {
                let report = run_lemma_battery(&c, &job.options);
                let file = ChecksFile { form: form.clone(), horizon: horizon.clone(), checks: &report.checks };
                emit("lemmas.json", to_canonical_json(&file)?, &mut out)?;
                out.checks.extend(report.checks);
            }
            Task::Reconstruct => {
                let r = recon.as_ref().expect("computed above");
                let data = r.structure().to_data();
                let file = ReconstructionFile {
                    form: form.clone(),
                    horizon: horizon.clone(),
                    n_proper: r.n_proper,
                    n_classes: r.n_classes,
                    n_points: data.n_points,
                    lines: &data.lines,
                };
                emit("reconstruction.json", to_canonical_json(&file)?, &mut out)?;
            }
            Task::Verify => {
                let (g, r) = (geom.as_ref().expect("computed above"), recon.as_ref().expect("computed above"));
                let mut checks = Vec::new();
                let canonical = canonical_map(g, r).and_then(|m| is_isomorphism(base, r.structure(), &m));
                checks.push(match canonical {
                    Ok(cert) => check("verify_canonical_map", cert.line_map.len(), cert.violation),
                    Err(e) => check("verify_canonical_map", 0, Some(e.to_string())),
                });
                if job.search {
                    let found = find_isomorphism(base, r.structure());
                    let witness = match found {
                        None => Some("no isomorphism found".to_string()),
                        Some(m) => is_isomorphism(base, r.structure(), &m)?.violation,
                    };
                    checks.push(check("verify_search", base.n_points(), witness));
                }
                let file = ChecksFile { form: form.clone(), horizon: horizon.clone(), checks: &checks };
                emit("verify.json", to_canonical_json(&file)?, &mut out)?;
                out.checks.extend(checks);
            }
        }
    }

    let run = RunFile {
        meta: META,
        form,
        horizon,
        tasks: &job.tasks,
        seed: job.options.seed,
        exhaustive: job.options.exhaustive,
        failed: out.failed(),
        checks: &out.checks,
    };
    let text = to_canonical_json(&run)?;
    emit("run.json", text, &mut out)?;
    Ok(out)
}

/// The standard horizons of a suite space: a point, a line through it, and
/// the meet of its perp with the perp of a non-collinear and of a collinear
/// point. The last one contains a line.
pub fn suite_horizons(ps: &PolarSpace) -> Vec<HorizonSpec> {
    let s = ps.structure();
    let line = s.lines_through(0)[0];
    let non = (1..s.n_points()).find(|&b| !s.collinear(0, b)).expect("nondegenerate space");
    let col = (1..s.n_points()).find(|&b| s.collinear(0, b)).expect("thick space");
    let meet = |b| HorizonSpec::Meet(Box::new(HorizonSpec::Perp(0)), Box::new(HorizonSpec::Perp(b)));
    vec![HorizonSpec::Point(0), HorizonSpec::Line(line), meet(non), meet(col)]
}

/// Directory name for one configuration.
pub fn config_slug(form: &str, horizon: &HorizonSpec) -> String {
    let h: String = horizon.to_string().chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '-' }).collect();
    format!("{}__{}", form.replace(':', "-"), h)
}

/// Candidate horizons of one kind as `(spec, size)`.
pub fn list_horizons(ps: &PolarSpace, kind: HorizonKind) -> Vec<(HorizonSpec, usize)> {
    let s = ps.structure();
    let n = s.n_points();
    match kind {
        HorizonKind::Points => (0..n).map(|i| (HorizonSpec::Point(i), 1)).collect(),
        HorizonKind::Lines => (0..s.n_lines()).map(|i| (HorizonSpec::Line(i), s.line(i).len())).collect(),
        HorizonKind::Planes => {
            ps.singular_planes().iter().enumerate().map(|(i, p)| (HorizonSpec::Plane(i), p.len())).collect()
        }
        HorizonKind::Perps => (0..n).map(|i| (HorizonSpec::Perp(i), s.perp_of(i).len())).collect(),
        HorizonKind::PerpIntersections => {
            let mut out = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let size = s.perp_of(a).intersection(s.perp_of(b)).len();
                    out.push((HorizonSpec::Meet(Box::new(HorizonSpec::Perp(a)), Box::new(HorizonSpec::Perp(b))), size));
                }
            }
            out
        }
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn exit_for(failed: usize) -> i32 {
    if failed == 0 {
        0
    } else {
        10 + failed as i32
    }
}

fn dispatch(cmd: Command, stdout: &mut impl Write) -> Result<i32> {
    match cmd {
        Command::Build { form, out } => {
            let ps = PolarSpace::build(FormSpec::from_descriptor(&form).map_err(config)?)?;
            let text = build_json(&ps)?;
            match out {
                Some(path) => fs::write(path, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Horizons { form, kind } => {
            let ps = PolarSpace::build(FormSpec::from_descriptor(&form).map_err(config)?)?;
            for (i, (spec, size)) in list_horizons(&ps, kind).into_iter().enumerate() {
                writeln!(stdout, "{i}\t{size}\t{spec}")?;
            }
            Ok(0)
        }
        Command::Run(args) => run_command(args, stdout),
    }
}

fn run_command(args: RunArgs, stdout: &mut impl Write) -> Result<i32> {
    let options = BatteryOptions {
        seed: args.seed,
        exhaustive: args.exhaustive,
        timings: args.timings,
        ..BatteryOptions::default()
    };
    let report = |stdout: &mut dyn Write, label: &str, o: &JobOutcome| -> Result<()> {
        for ch in &o.checks {
            let status = match ch.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skip => "skip",
            };
            write!(stdout, "{label}\t{}\t{status}", ch.check_id)?;
            if ch.status == Status::Fail {
                write!(stdout, "\t{}", ch.witness.as_deref().unwrap_or(""))?;
            }
            writeln!(stdout)?;
        }
        Ok(())
    };

    let Some(suite) = args.suite else {
        let mut job = JobSpec::new(
            args.form.as_deref().unwrap_or_default(),
            args.horizon.as_deref().unwrap_or_default(),
            &args.tasks,
            &args.out,
        )?;
        job.options = options;
        job.search = !args.no_search;
        let o = run_job(&job)?;
        report(stdout, &job.horizon.to_string(), &o)?;
        return Ok(exit_for(o.failed()));
    };

    let tasks = parse_tasks(&args.tasks)?;
    let mut failed = 0;
    for desc in suite.forms() {
        let ps = Arc::new(PolarSpace::build(FormSpec::from_descriptor(desc)?)?);
        for horizon in suite_horizons(&ps) {
            let label = format!("{desc} [{horizon}]");
            let job = JobSpec {
                form: ps.form().clone(),
                out: args.out.join(config_slug(desc, &horizon)),
                horizon,
                tasks: tasks.clone(),
                options: options.clone(),
                search: !args.no_search,
            };
            let o = run_job_on(&job, ps.clone())?;
            report(stdout, &label, &o)?;
            failed += o.failed();
        }
    }
    writeln!(stdout, "failed checks: {failed}")?;
    Ok(exit_for(failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_lists_come_out_in_dependency_order() {
        assert_eq!(parse_tasks("verify,axioms").unwrap(), vec![Task::Axioms, Task::Verify]);
        assert_eq!(parse_tasks("all").unwrap(), Task::ALL.to_vec());
        assert!(parse_tasks("").is_err());
        assert!(parse_tasks("lemmas,plot").is_err());
    }

    #[test]
    fn slugs_are_path_safe() {
        let h: HorizonSpec = "meet perp 0 perp 7".parse().unwrap();
        assert_eq!(config_slug("q+:5:2", &h), "q+-5-2__meet-perp-0-perp-7");
    }

    #[test]
    fn exit_codes_follow_the_failure_count() {
        assert_eq!(exit_for(0), 0);
        assert_eq!(exit_for(3), 13);
    }
}
