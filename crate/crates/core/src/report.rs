//! Config-driven runs that write CSV, JSON and SVG artifacts.
//!
//! A run reads one TOML file. Example:
//!
//! ```toml
//! command = "verify"
//! ladder = [0.03125, 0.015625]
//! k_max = 4
//!
//! [[domain]]
//! label = "theta"
//! shape = { kind = "union", parts = [
//!     { kind = "ball", center = [-1.5, 0.0], radius = 1.0 },
//!     { kind = "ball", center = [1.5, 0.0], radius = 1.0 },
//! ] }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asymmetry::{fraenkel1, fraenkel2, AsymmetryResult};
use crate::dirichlet::{solve_domains_with, LadderSolve};
use crate::error::{Error, Result};
use crate::geometry::{Family, Shape};
use crate::harness::{
    default_corpus, evaluate, load_corpus, records_for, sweep, DomainSpec, DomainSummary, HarnessOptions, InequalityId,
    InequalityRecord, SweepReport, Verdict,
};
use crate::plot::{Chart, Series};
use crate::reference::Reference;
use crate::sharpness::{
    default_t_grid, doubling_probe, probe_family, DeltaMode, DoublingProbe, FamilyProbe, SharpnessOptions,
    SLOPE_FLOOR,
};
use crate::sparse::EigenOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eig,
    Torsion,
    Asym,
    Verify,
    Sweep,
    Sharpness,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Torsion => "torsion",
            Command::Asym => "asym",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Sharpness => "sharpness",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::Eig,
            Command::Torsion,
            Command::Asym,
            Command::Verify,
            Command::Sweep,
            Command::Sharpness,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::Argument(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the eigensolver.
    #[serde(default = "default_eigen_tol")]
    pub eigen: f64,
    /// Smallest exponent slope reported as consistent.
    #[serde(default = "default_slope_floor")]
    pub slope_floor: f64,
}

fn default_eigen_tol() -> f64 {
    1e-8
}

fn default_slope_floor() -> f64 {
    SLOPE_FLOOR
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen: default_eigen_tol(),
            slope_floor: default_slope_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    #[serde(default = "all_families")]
    pub families: Vec<Family>,
    /// Shared parameter grid; each family's default when absent.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "positive_part")]
    pub mode: DeltaMode,
    #[serde(default = "yes")]
    pub doubling: bool,
    #[serde(default = "doubling_domains")]
    pub doubling_domains: Vec<DomainSpec>,
    #[serde(default = "doubling_ladder")]
    pub doubling_ladder: Vec<f64>,
    #[serde(default = "one")]
    pub doubling_k: usize,
}

fn all_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn positive_part() -> DeltaMode {
    DeltaMode::PositivePart
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

/// Smooth test sets whose rasterizations extrapolate cleanly.
pub fn doubling_domains() -> Vec<DomainSpec> {
    [1.5, 2.0, 3.0, 4.0]
        .into_iter()
        .map(|a: f64| {
            DomainSpec::from_shape(
                format!("ellipse-{a}"),
                2,
                Shape::Ellipsoid {
                    center: [0.0; 3],
                    semi_axes: [a.sqrt(), 1.0 / a.sqrt(), 0.0],
                    angle: 0.0,
                },
            )
        })
        .collect()
}

pub fn doubling_ladder() -> Vec<f64> {
    vec![1.0 / 64.0, 1.0 / 128.0]
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig {
            families: all_families(),
            t_grid: None,
            mode: positive_part(),
            doubling: true,
            doubling_domains: doubling_domains(),
            doubling_ladder: doubling_ladder(),
            doubling_k: 1,
        }
    }
}

fn default_ladder() -> Vec<f64> {
    vec![1.0 / 32.0, 1.0 / 64.0]
}

fn default_k_max() -> usize {
    6
}

fn default_seed() -> u64 {
    EigenOptions::default().seed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Explicit domains, `[[domain]]` tables.
    #[serde(default, rename = "domain")]
    pub domains: Vec<DomainSpec>,
    /// `"default"` or a path to a corpus TOML file, for `sweep`.
    #[serde(default)]
    pub corpus: Option<String>,
    /// Grid spacings, strictly decreasing; the two finest are solved.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Inequalities to check; all when empty.
    #[serde(default)]
    pub checks: Vec<InequalityId>,
    /// Write the finest rasterization of each domain as PGM.
    #[serde(default)]
    pub pgm: bool,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub sharpness: SharpnessConfig,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned, if any.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Nearest `key =` at or above a byte offset, with its enclosing table.
fn key_before(text: &str, offset: usize) -> Option<String> {
    let head = &text[..offset.min(text.len())];
    let mut key = None;
    for line in head.lines().rev() {
        let l = line.trim();
        if key.is_none() {
            if let Some((k, _)) = l.split_once('=') {
                let k = k.trim();
                if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    key = Some(k.to_string());
                }
            }
        }
        if let Some(table) = l.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let table = table.trim_matches(|c| c == '[' || c == ']');
            return key.map(|k| format!("{table}.{k}"));
        }
    }
    key
}

impl RunConfig {
    /// Parse and validate. Errors name the offending field and its line.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            let message = e.message().trim().to_string();
            let field = message
                .split('`')
                .nth(1)
                .filter(|_| message.contains("field"))
                .map(str::to_string)
                .or_else(|| e.span().and_then(|s| key_before(text, s.start)))
                .unwrap_or_else(|| "config".to_string());
            let at = line.map(|l| format!("{origin}:{l}")).unwrap_or_else(|| origin.to_string());
            Error::config(field, format!("{message} ({at})"))
        })?;
        cfg.validate().map_err(|e| match e {
            Error::Config { field, message } => {
                let top = field.split('.').next_back().unwrap_or(&field).to_string();
                let at = key_line(text, &top)
                    .map(|l| format!("{origin}:{l}"))
                    .unwrap_or_else(|| origin.to_string());
                Error::Config {
                    field,
                    message: format!("{message} ({at})"),
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ladder_ok = |field: &str, l: &[f64]| -> Result<()> {
            if l.is_empty() {
                return Err(Error::config(field, "at least one spacing is required"));
            }
            if l.iter().any(|h| !(*h > 0.0)) {
                return Err(Error::config(field, "spacings must be positive"));
            }
            if l.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::config(field, "spacings must be strictly decreasing"));
            }
            Ok(())
        };
        ladder_ok("ladder", &self.ladder)?;
        if self.k_max < 1 {
            return Err(Error::config("k_max", "must be at least 1"));
        }
        if !(self.tolerances.eigen > 0.0) {
            return Err(Error::config("tolerances.eigen", "must be positive"));
        }
        if self.jobs == Some(0) {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        for d in &self.domains {
            d.resolve()?;
        }
        let needs_domains = matches!(
            self.command,
            Command::Eig | Command::Torsion | Command::Asym | Command::Verify
        );
        if needs_domains && self.domains.is_empty() {
            return Err(Error::config(
                "domain",
                format!("`{}` needs at least one [[domain]]", self.command.name()),
            ));
        }
        if self.command == Command::Sharpness {
            let s = &self.sharpness;
            if let Some(g) = &s.t_grid {
                if g.iter().any(|t| !(*t > 0.0)) {
                    return Err(Error::config("sharpness.t_grid", "parameters must be positive"));
                }
            }
            ladder_ok("sharpness.doubling_ladder", &s.doubling_ladder)?;
            if s.doubling_k < 1 {
                return Err(Error::config("sharpness.doubling_k", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn eigen(&self) -> EigenOptions {
        EigenOptions {
            tol: self.tolerances.eigen,
            seed: self.seed,
            ..EigenOptions::default()
        }
    }

    pub fn harness_options(&self) -> HarnessOptions {
        HarnessOptions {
            ladder: self.ladder.clone(),
            k_max: self.k_max,
            checks: self.checks.clone(),
            eigen: self.eigen(),
        }
    }

    fn corpus_domains(&self) -> Result<Vec<DomainSpec>> {
        let mut out = match self.corpus.as_deref() {
            None if !self.domains.is_empty() => Vec::new(),
            None | Some("default") => default_corpus(),
            Some(p) => {
                let path = Path::new(p);
                let path = match (&self.base_dir, path.is_relative()) {
                    (Some(b), true) => b.join(path),
                    _ => path.to_path_buf(),
                };
                load_corpus(&path)?
            }
        };
        out.extend(self.domains.iter().cloned());
        Ok(out)
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub command: Command,
    /// 0 on success, 1 on a violated known-constant inequality or a failed solve.
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    target: String,
    command: &'static str,
    seed: u64,
    jobs: usize,
    elapsed_seconds: f64,
    exit_code: i32,
    files: Vec<String>,
    config: &'a RunConfig,
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir.join("plots"))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, bytes)?;
        self.files.push(p);
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, rel: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::Argument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Argument(e.to_string()))?;
        self.write(rel, &bytes)
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(value)?;
        self.write(rel, s.as_bytes())
    }
}

/// Run a config, writing into `config.out` (or `out` when given).
pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    config.validate()?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("speclab-out"));
    let jobs = config
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(e.to_string()))?;
    let start = Instant::now();
    let mut w = Writer::new(&dir)?;
    let (exit_code, summary) = pool.install(|| dispatch(config, &mut w))?;
    let files = w.files.clone();
    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        command: config.command.name(),
        seed: config.seed,
        jobs,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        exit_code,
        files: files
            .iter()
            .map(|p| p.strip_prefix(&dir).unwrap_or(p).display().to_string())
            .collect(),
        config,
    };
    w.json("run-manifest.json", &manifest)?;
    Ok(RunOutcome {
        command: config.command,
        exit_code,
        files: w.files,
        summary,
    })
}

fn dispatch(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    if config.pgm {
        let h = *config.ladder.last().expect("validated ladder");
        let domains = match config.command {
            Command::Sweep => config.corpus_domains()?,
            _ => config.domains.clone(),
        };
        for d in &domains {
            w.write(&format!("masks/{}.pgm", file_stem(&d.label)), &d.rasterize(h)?.to_pgm())?;
        }
    }
    match config.command {
        Command::Eig => run_eig(config, w),
        Command::Torsion => run_torsion(config, w),
        Command::Asym => run_asym(config, w),
        Command::Verify => run_verify(config, w),
        Command::Sweep => run_sweep(config, w),
        Command::Sharpness => run_sharpness(config, w),
    }
}

fn used(ladder: &[f64]) -> &[f64] {
    &ladder[ladder.len().saturating_sub(2)..]
}

fn solve_spec(config: &RunConfig, d: &DomainSpec, torsion: bool) -> Result<LadderSolve> {
    let domains = used(&config.ladder)
        .iter()
        .map(|&h| d.rasterize(h))
        .collect::<Result<Vec<_>>>()?;
    solve_domains_with(&domains, config.k_max, torsion, &config.eigen())
}

#[derive(Serialize)]
struct EigRow<'a> {
    domain: &'a str,
    k: usize,
    h: f64,
    lambda: f64,
    error_estimate: f64,
    multiplicity: usize,
    extrapolated: bool,
    ball_lambda: f64,
}

fn ladder_chart(title: &str, y: &str, raw: &[(f64, Vec<f64>)], extrapolated: &[f64]) -> Chart {
    let mut chart = Chart::new(title, "h", y);
    for (j, &v) in extrapolated.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = raw.iter().map(|(h, vals)| (*h, vals[j])).collect();
        pts.push((0.0, v));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        chart = chart.with(Series::line(format!("{} {}", y, j + 1), pts));
    }
    chart
}

fn run_eig(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let mut rows_json = Vec::new();
    let mut summary = Vec::new();
    let mut failed = 0;
    let mut table: Vec<(String, LadderSolve, Reference)> = Vec::new();
    for d in &config.domains {
        match solve_spec(config, d, false) {
            Ok(s) => {
                let r = Reference::with_volume(d.dim, d.volume()?, config.k_max)?;
                table.push((d.label.clone(), s, r));
            }
            Err(e) => {
                failed += 1;
                summary.push(format!("{}: {e}", d.label));
            }
        }
    }
    let mut rows = Vec::new();
    for (label, s, r) in &table {
        let sp = &s.spectrum;
        for k in 1..=sp.k() {
            rows.push(EigRow {
                domain: label,
                k,
                h: sp.h,
                lambda: sp.lambda(k),
                error_estimate: sp.error_estimate[k - 1],
                multiplicity: sp.multiplicity(k),
                extrapolated: sp.extrapolated,
                ball_lambda: r.ball(k),
            });
        }
        let raw: Vec<(f64, Vec<f64>)> = s.raw.iter().map(|(x, _)| (x.h, x.eigenvalues.clone())).collect();
        let chart = ladder_chart(&format!("{label}: eigenvalues"), "λ", &raw, &sp.eigenvalues);
        w.write(&format!("plots/eig-{}.svg", file_stem(label)), chart.to_svg().as_bytes())?;
        rows_json.push(serde_json::json!({
            "domain": label,
            "spectrum": sp,
            "raw": s.raw.iter().map(|(x, _)| x).collect::<Vec<_>>(),
        }));
        summary.push(format!("{label}: λ = {:.6?}", sp.eigenvalues));
    }
    w.csv("records.csv", &rows)?;
    w.json("records.json", &rows_json)?;
    Ok((i32::from(failed > 0), summary))
}

#[derive(Serialize)]
struct TorsionRow<'a> {
    domain: &'a str,
    h: f64,
    #[serde(rename = "T")]
    torsion: f64,
    torsion_error: f64,
    sup_w: f64,
    sup_w_error: f64,
    boundary_grad_max: f64,
    ball_torsion: f64,
    ball_sup_w: f64,
}

fn run_torsion(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let mut rows = Vec::new();
    let mut json = Vec::new();
    let mut summary = Vec::new();
    let mut failed = 0;
    let mut solved = Vec::new();
    for d in &config.domains {
        let res = (|| {
            let domains = used(&config.ladder)
                .iter()
                .map(|&h| d.rasterize(h))
                .collect::<Result<Vec<_>>>()?;
            let s = solve_domains_with(&domains, 1, true, &config.eigen())?;
            Ok::<_, Error>((s, Reference::with_volume(d.dim, d.volume()?, 1)?))
        })();
        match res {
            Ok(x) => solved.push((d.label.clone(), x)),
            Err(e) => {
                failed += 1;
                summary.push(format!("{}: {e}", d.label));
            }
        }
    }
    for (label, (s, r)) in &solved {
        let t = s.torsion.as_ref().expect("torsion requested");
        rows.push(TorsionRow {
            domain: label,
            h: t.h,
            torsion: t.torsion,
            torsion_error: t.torsion_error,
            sup_w: t.sup_w,
            sup_w_error: t.sup_w_error,
            boundary_grad_max: t.boundary_grad_max,
            ball_torsion: r.ball_torsion,
            ball_sup_w: r.ball_sup_w,
        });
        let raw: Vec<(f64, Vec<f64>)> = s
            .raw
            .iter()
            .filter_map(|(_, t)| t.as_ref().map(|t| (t.h, vec![t.torsion, t.sup_w])))
            .collect();
        let chart = ladder_chart(&format!("{label}: T and sup w"), "value", &raw, &[t.torsion, t.sup_w]);
        w.write(&format!("plots/torsion-{}.svg", file_stem(label)), chart.to_svg().as_bytes())?;
        json.push(serde_json::json!({ "domain": label, "torsion": t }));
        summary.push(format!("{label}: T = {:.6}, sup w = {:.6}", t.torsion, t.sup_w));
    }
    w.csv("records.csv", &rows)?;
    w.json("records.json", &json)?;
    Ok((i32::from(failed > 0), summary))
}

#[derive(Serialize)]
struct AsymRow<'a> {
    domain: &'a str,
    h: f64,
    measure: f64,
    fraenkel1: f64,
    fraenkel2: f64,
    fraenkel1_hit_bounds: bool,
    fraenkel2_hit_bounds: bool,
}

fn trace_chart(label: &str, name: &str, r: &AsymmetryResult) -> Chart {
    let pts = r.trace.iter().enumerate().map(|(i, t)| (i as f64, t.value)).collect();
    Chart::new(format!("{label}: {name} search"), "accepted step", name).with(Series::line(name, pts))
}

fn run_asym(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let h = *config.ladder.last().expect("validated ladder");
    let mut rows_owned = Vec::new();
    let mut json = Vec::new();
    let mut summary = Vec::new();
    let mut failed = 0;
    for d in &config.domains {
        let res = d.rasterize(h).and_then(|g| Ok((g.measure(), fraenkel1(&g)?, fraenkel2(&g)?)));
        match res {
            Ok((m, f1, f2)) => {
                w.write(
                    &format!("plots/asym1-{}.svg", file_stem(&d.label)),
                    trace_chart(&d.label, "F1", &f1).to_svg().as_bytes(),
                )?;
                w.write(
                    &format!("plots/asym2-{}.svg", file_stem(&d.label)),
                    trace_chart(&d.label, "F2", &f2).to_svg().as_bytes(),
                )?;
                summary.push(format!("{}: F1 = {:.5}, F2 = {:.5}", d.label, f1.value, f2.value));
                json.push(serde_json::json!({
                    "domain": d.label, "h": h, "measure": m,
                    "fraenkel1": f1, "fraenkel2": f2,
                }));
                rows_owned.push((d.label.clone(), m, f1, f2));
            }
            Err(e) => {
                failed += 1;
                summary.push(format!("{}: {e}", d.label));
            }
        }
    }
    let rows: Vec<AsymRow> = rows_owned
        .iter()
        .map(|(l, m, f1, f2)| AsymRow {
            domain: l,
            h,
            measure: *m,
            fraenkel1: f1.value,
            fraenkel2: f2.value,
            fraenkel1_hit_bounds: f1.hit_bounds,
            fraenkel2_hit_bounds: f2.hit_bounds,
        })
        .collect();
    w.csv("records.csv", &rows)?;
    w.json("records.json", &json)?;
    Ok((i32::from(failed > 0), summary))
}

fn write_records(w: &mut Writer, report: &SweepReport) -> Result<()> {
    w.write("records.csv", report.to_csv()?.as_bytes())?;
    w.write("records.json", report.to_json()?.as_bytes())?;
    for id in [
        InequalityId::Theorem1,
        InequalityId::Theorem2,
        InequalityId::Theorem2bis,
        InequalityId::Lambda1Stability,
        InequalityId::QuantitativeFaberKrahn,
        InequalityId::QuantitativeKrahnSzego,
    ] {
        let pts: Vec<(f64, f64)> = report
            .records
            .iter()
            .filter(|r| r.inequality_id == id && r.verdict != Verdict::NotApplicable)
            .map(|r| (r.rhs_constant_free, r.lhs))
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .collect();
        if pts.is_empty() {
            continue;
        }
        let chart = Chart::new(format!("{id}: lhs against constant-free rhs"), "rhs", "lhs")
            .log_log()
            .with(Series::points(id.name(), pts));
        w.write(&format!("plots/{}.svg", id.name()), chart.to_svg().as_bytes())?;
    }
    Ok(())
}

fn report_summary(report: &SweepReport) -> (i32, Vec<String>) {
    let mut summary = vec![format!(
        "{} records over {} domains, {} domain failures",
        report.records.len(),
        report.domains.len(),
        report.failures.len()
    )];
    for a in &report.aggregates {
        summary.push(format!(
            "{:<26} rows {:>4}  max ratio {:>10}  violated {}  flagged {}",
            a.inequality_id.name(),
            a.rows,
            a.max_ratio.map_or("-".to_string(), |r| format!("{r:.4}")),
            a.violations,
            a.flagged
        ));
    }
    for f in &report.failures {
        summary.push(format!("failed: {}: {}", f.domain, f.error));
    }
    for r in report.records.iter().filter(|r| r.verdict.is_failure()) {
        summary.push(format!(
            "{}: {} k={:?} lhs {:.6} rhs {:.6} ({})",
            r.inequality_id, r.domain, r.k, r.lhs, r.rhs_constant_free, r.verdict
        ));
    }
    (i32::from(report.has_failures()), summary)
}

fn run_verify(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let opts = config.harness_options();
    let mut records: Vec<InequalityRecord> = Vec::new();
    let mut failures = Vec::new();
    let mut domains = Vec::new();
    for d in &config.domains {
        match evaluate(d, &opts) {
            Ok(e) => {
                records.extend(records_for(&e, &opts));
                domains.push(DomainSummary::from_eval(&e));
            }
            Err(e) => failures.push(crate::harness::DomainFailure {
                domain: d.label.clone(),
                error: e.to_string(),
            }),
        }
    }
    let report = SweepReport::from_records(opts.ladder.clone(), opts.k_max, records, domains, failures);
    write_records(w, &report)?;
    Ok(report_summary(&report))
}

fn run_sweep(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let corpus = config.corpus_domains()?;
    let report = sweep(&corpus, &config.harness_options())?;
    write_records(w, &report)?;
    Ok(report_summary(&report))
}

#[derive(Serialize)]
struct FitRow {
    family: &'static str,
    k: usize,
    mode: DeltaMode,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    n_points: usize,
    consistent: Option<bool>,
    note: Option<String>,
}

#[derive(Serialize)]
struct SharpnessReport<'a> {
    slope_floor: f64,
    families: &'a [FamilyProbe],
    doubling: Option<&'a DoublingProbe>,
}

fn run_sharpness(config: &RunConfig, w: &mut Writer) -> Result<(i32, Vec<String>)> {
    let s = &config.sharpness;
    let opts = SharpnessOptions {
        ladder: config.ladder.clone(),
        k_max: config.k_max,
        dim: 2,
        mode: s.mode,
        eigen: config.eigen(),
    };
    let floor = config.tolerances.slope_floor;
    let mut probes = Vec::new();
    let mut summary = Vec::new();
    let mut failed = 0;
    for &f in &s.families {
        let grid = s.t_grid.clone().unwrap_or_else(|| default_t_grid(f));
        match probe_family(f, &grid, &opts) {
            Ok(p) => probes.push(p),
            Err(e) => {
                failed += 1;
                summary.push(format!("{}: {e}", f.name()));
            }
        }
    }
    let mut rows = Vec::new();
    for p in &probes {
        for o in &p.fits {
            rows.push(FitRow {
                family: p.family.name(),
                k: o.k,
                mode: p.mode,
                slope: o.fit.as_ref().map(|f| f.slope),
                intercept: o.fit.as_ref().map(|f| f.intercept),
                r_squared: o.fit.as_ref().map(|f| f.r_squared),
                n_points: o.fit.as_ref().map_or(0, |f| f.n_points()),
                consistent: o.fit.as_ref().map(|f| f.slope >= floor),
                note: o.error.clone(),
            });
            if let Some(fit) = &o.fit {
                let pts: Vec<(f64, f64)> = fit.samples.iter().map(|s| (s.delta2, s.delta_k)).collect();
                let (x0, x1) = (pts[0].0, pts[pts.len() - 1].0);
                let line = [x0, x1]
                    .iter()
                    .map(|&x| (x, (fit.intercept + fit.slope * x.ln()).exp()))
                    .collect();
                let chart = Chart::new(
                    format!("{} k={}: slope {:.3}, r² {:.3}", p.family.name(), o.k, fit.slope, fit.r_squared),
                    "Δλ₂",
                    format!("Δλ_{}", o.k),
                )
                .log_log()
                .with(Series::points("samples", pts))
                .with(Series::line("fit", line));
                w.write(
                    &format!("plots/sharpness-{}-k{}.svg", p.family.name(), o.k),
                    chart.to_svg().as_bytes(),
                )?;
                summary.push(format!(
                    "{} k={}: slope {:.4} (r² {:.4}, {} points){}",
                    p.family.name(),
                    o.k,
                    fit.slope,
                    fit.r_squared,
                    fit.n_points(),
                    if fit.slope >= floor { "" } else { " below floor" }
                ));
            }
        }
    }
    let doubling = if s.doubling {
        match doubling_probe(&s.doubling_domains, s.doubling_k, &s.doubling_ladder, &config.eigen()) {
            Ok(d) => {
                let pts: Vec<(f64, f64)> = d.samples.iter().map(|x| (x.rhs, x.lhs)).collect();
                let (lo, hi) = pts
                    .iter()
                    .fold((f64::INFINITY, 0f64), |(a, b), p| (a.min(p.0), b.max(p.0)));
                let line = [lo, hi].iter().map(|&x| (x, x * 2f64.powf(d.power))).collect();
                let chart = Chart::new(
                    format!("doubling: power {:.3}, r² {:.4}", d.power, d.r_squared),
                    "|λ_2k(doubled) − λ_2k(Θ)|",
                    "|λ_k(Ω) − λ_k(B)|",
                )
                .log_log()
                .with(Series::points("domains", pts))
                .with(Series::line("2^power", line));
                w.write("plots/doubling.svg", chart.to_svg().as_bytes())?;
                summary.push(format!(
                    "doubling: measured power {:.4} (printed {:.3}, scaling {:.3}; matches {}), r² {:.5}",
                    d.power, d.printed_power, d.scaling_power, d.matches, d.r_squared
                ));
                Some(d)
            }
            Err(e) => {
                failed += 1;
                summary.push(format!("doubling: {e}"));
                None
            }
        }
    } else {
        None
    };
    w.csv("records.csv", &rows)?;
    w.json(
        "records.json",
        &SharpnessReport {
            slope_floor: floor,
            families: &probes,
            doubling: doubling.as_ref(),
        },
    )?;
    Ok((i32::from(failed > 0), summary))
}
