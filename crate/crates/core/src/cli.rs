//! Command-line orchestration: run configuration, the commands, and report output.
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::character::{howe_factorize, is_generic, AddChar, CharData, HoweSummary, MulChar};
use crate::epsilon::{moy_epsilon, moy_oracle_consistency, oracle_sum, DEFAULT_TERM_BUDGET};
use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{make_tower, Step, TowerElement};
use crate::sharpness::construct::build_phi;
use crate::sharpness::{
    build_phi_pair, build_phi_pair_on, case_scan, search_distinguisher, verify_equ6_family, verify_r1_gamma, Ambient, ExactValue, PairChecks,
    PhiPair, SharpnessConfig, VerificationReport, BASE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Epsilon,
    Factorize,
    Construct,
    Verify,
    Search,
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    R1,
    Equ6,
    All,
}

/// Command-line arguments. Flags override keys of the `--config` file.
#[derive(Clone, Debug, Parser)]
#[command(name = "tamecheck", version, about = "Exact checks for twin tame characters and their epsilon factors")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long = "N")]
    pub n: Option<u32>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long)]
    pub conductor_bound: Option<u32>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub level: Option<Level>,
    /// Any other configuration key, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// A character `w, t, gamma` on a tower given by its steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterSpec {
    pub steps: Option<Vec<Step>>,
    pub precision: Option<u32>,
    /// Value on the uniformizer, as `a/b` for `exp(2 pi i a / b)`.
    pub w: (i128, u64),
    pub t: u64,
    /// `gamma = sum zeta^a pi^v` over the listed `(a, v)`.
    pub gamma: Vec<(u64, i64)>,
}

/// Everything a command needs; validated before any computation and echoed into its report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub sharpness: SharpnessConfig,
    pub level: Level,
    /// Degree of the twisting extensions; defaults per command.
    pub r: Option<u32>,
    pub ambient_precision: Option<u32>,
    pub oracle_budget: u64,
    pub jobs: Option<usize>,
    pub out: Option<String>,
    /// Residue indices of perturbations on `1 + P_E^2` applied to `phi2`.
    pub mutate: Vec<u64>,
    pub scan_conductors: bool,
    pub character: CharacterSpec,
}

const KEYS: &[&str] = &[
    "p",
    "N",
    "ell",
    "selector",
    "precision",
    "conductor_bound",
    "seed",
    "level",
    "r",
    "ambient_precision",
    "oracle_budget",
    "jobs",
    "out",
    "mutate",
    "scan_conductors",
    "field",
    "char_precision",
    "char_w",
    "char_t",
    "gamma",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigInvalid(format!("line {}: expected key = value", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) if v.is_empty() || v == "none" => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| Error::ConfigInvalid(format!("{} = {} is not a decimal number", key, v))),
    }
}

/// `U2,R5:0` for an unramified step of degree 2 then `pi^5 = zeta^0 pi_old`.
pub fn parse_steps(s: &str) -> Result<Vec<Step>> {
    let bad = || Error::ConfigInvalid(format!("field = {} is not a step list like U2,R5:0", s));
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.split_at(1) {
            ("U", d) => d.parse().map(Step::Unramified).map_err(|_| bad()),
            ("R", rest) => {
                let (d, u) = rest.split_once(':').unwrap_or((rest, "0"));
                Ok(Step::TameRamified { degree: d.parse().map_err(|_| bad())?, unit_exp: u.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        })
        .collect()
}

/// `a@v,b@w` for `zeta^a pi^v + zeta^b pi^w`.
pub fn parse_gamma(s: &str) -> Result<Vec<(u64, i64)>> {
    let bad = || Error::ConfigInvalid(format!("gamma = {} is not a list like 1@-3,0@-2", s));
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, v) = t.split_once('@').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn parse_fraction(s: &str) -> Result<(i128, u64)> {
    let bad = || Error::ConfigInvalid(format!("char_w = {} is not a fraction a/b", s));
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if b == 0 {
        return Err(bad());
    }
    Ok((a.trim().parse().map_err(|_| bad())?, b))
}

impl RunConfig {
    /// Builds and validates a configuration from flat keys.
    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> Result<RunConfig> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::ConfigInvalid(format!("unknown key {}", k)));
        }
        let p = num(map, "p")?.unwrap_or(7);
        let n = num(map, "N")?.unwrap_or(5);
        let mut sharpness = SharpnessConfig::new(p, n);
        if map.contains_key("ell") {
            sharpness.ell = num(map, "ell")?;
        }
        sharpness.selector = num(map, "selector")?;
        if let Some(v) = num(map, "precision")? {
            sharpness.precision = v;
        }
        if let Some(v) = num(map, "conductor_bound")? {
            sharpness.conductor_bound = v;
        }
        if let Some(v) = num(map, "seed")? {
            sharpness.seed = v;
        }
        let level = match map.get("level").map(String::as_str) {
            None | Some("all") => Level::All,
            Some("r1") => Level::R1,
            Some("equ6") => Level::Equ6,
            Some(other) => return Err(Error::ConfigInvalid(format!("level = {} is not r1, equ6 or all", other))),
        };
        let mutate = match map.get("mutate") {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::ConfigInvalid(format!("mutate entry {} is not a number", t))))
                .collect::<Result<Vec<u64>>>()?,
        };
        let scan_conductors = match map.get("scan_conductors").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(Error::ConfigInvalid(format!("scan_conductors = {} is not true or false", other))),
        };
        let character = CharacterSpec {
            steps: map.get("field").map(|s| parse_steps(s)).transpose()?,
            precision: num(map, "char_precision")?,
            w: map.get("char_w").map(|s| parse_fraction(s)).transpose()?.unwrap_or((0, 1)),
            t: num(map, "char_t")?.unwrap_or(0),
            gamma: map.get("gamma").map(|s| parse_gamma(s)).transpose()?.unwrap_or_default(),
        };
        let cfg = RunConfig {
            command,
            sharpness,
            level,
            r: num(map, "r")?,
            ambient_precision: num(map, "ambient_precision")?,
            oracle_budget: num(map, "oracle_budget")?.unwrap_or(DEFAULT_TERM_BUDGET),
            jobs: num(map, "jobs")?,
            out: map.get("out").cloned(),
            mutate,
            scan_conductors,
            character,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `--config` and applies the flag overrides.
    pub fn from_cli(cli: &Cli) -> Result<RunConfig> {
        let mut map = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {}", path.display(), e)))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        put("p", cli.p.map(|v| v.to_string()));
        put("N", cli.n.map(|v| v.to_string()));
        put("ell", cli.ell.map(|v| v.to_string()));
        put("precision", cli.precision.map(|v| v.to_string()));
        put("conductor_bound", cli.conductor_bound.map(|v| v.to_string()));
        put("jobs", cli.jobs.map(|v| v.to_string()));
        put("seed", cli.seed.map(|v| v.to_string()));
        put("out", cli.out.as_ref().map(|v| v.display().to_string()));
        put(
            "level",
            cli.level.map(|l| match l {
                Level::R1 => "r1".to_string(),
                Level::Equ6 => "equ6".to_string(),
                Level::All => "all".to_string(),
            }),
        );
        for kv in &cli.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::ConfigInvalid(format!("--set {} is not key=value", kv)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        RunConfig::from_map(cli.command, &map)
    }

    pub fn validate(&self) -> Result<()> {
        let uses_pair = matches!(self.command, Command::Construct | Command::Verify | Command::Search)
            || (self.command == Command::Factorize && self.character.gamma.is_empty());
        if uses_pair {
            self.sharpness.validate()?;
        }
        if let Some(a) = self.mutate.iter().find(|a| **a >= self.sharpness.p - 1) {
            return Err(Error::ConfigInvalid(format!("mutate entry {} must be below p - 1", a)));
        }
        if self.jobs == Some(0) {
            return Err(Error::ConfigInvalid("jobs must be positive".into()));
        }
        if self.r == Some(0) {
            return Err(Error::ConfigInvalid("r must be positive".into()));
        }
        Ok(())
    }

    /// Largest `r < (N - 1)/2`, the range of the coset identity.
    pub fn equ6_degree(&self) -> u32 {
        self.r.unwrap_or((self.sharpness.n.saturating_sub(2) / 2).max(1))
    }

    /// `floor(N/2)`, where a distinguisher must exist.
    pub fn search_degree(&self) -> u32 {
        self.r.unwrap_or(self.sharpness.n / 2)
    }
}

/// Exit status for an error: 2 for configuration problems, 3 for capacity or precision limits,
/// 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigInvalid(_)
        | Error::UnsupportedShape(_)
        | Error::RangeViolation(_)
        | Error::WildRamification { .. }
        | Error::NotAdmissible
        | Error::EvenConductor(_)
        | Error::ConductorTooSmall(_)
        | Error::FieldMismatch(_)
        | Error::RamifiedConductorOne => 2,
        Error::PrecisionLoss(_) | Error::CapacityExceeded(_) | Error::AmbientTooSmall(_) | Error::ExpLogRadius { .. } => 3,
        _ => 1,
    }
}

/// Result of one command: exit status, JSON report and a human-readable table.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub code: i32,
    pub report: Value,
    pub table: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<CommandOutput> {
    if let Some(j) = cfg.jobs {
        // the global pool can be configured once per process; later calls keep the first size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let mut out = match cfg.command {
        Command::Epsilon => cmd_epsilon(cfg)?,
        Command::Factorize => cmd_factorize(cfg)?,
        Command::Construct => cmd_construct(cfg)?,
        Command::Verify => cmd_verify(cfg)?,
        Command::Search => cmd_search(cfg)?,
        Command::Selftest => cmd_selftest(cfg)?,
    };
    if let Value::Object(map) = &mut out.report {
        map.insert("run".into(), to_value(cfg));
    }
    Ok(out)
}

fn spec_character(cfg: &RunConfig) -> Result<MulChar> {
    let s = &cfg.sharpness;
    let spec = &cfg.character;
    let steps = spec.steps.clone().unwrap_or_else(|| vec![Step::TameRamified { degree: s.n, unit_exp: 0 }]);
    let field = make_tower(s.p, &steps, spec.precision.unwrap_or(s.precision))?;
    let psi = Arc::new(AddChar::new(&field)?);
    let m = field.m() as i128;
    let mut gamma = TowerElement::zero(&field);
    for (a, v) in &spec.gamma {
        gamma = gamma.add(&TowerElement::monomial(&field, *a as i128 * m, *v));
    }
    MulChar::new(&psi, Root::new(spec.w.0, spec.w.1), spec.t, &gamma)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    let line = |cells: Vec<&str>| cells.iter().zip(&widths).map(|(c, w)| format!("{:<w$}", c, w = *w)).collect::<Vec<_>>().join("  ");
    let _ = writeln!(s, "{}", line(header.to_vec()).trim_end());
    let _ = writeln!(s, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        let _ = writeln!(s, "{}", line(r.iter().map(String::as_str).collect()).trim_end());
    }
    s
}

/// Moy's closed form and the brute-force oracle for one character, with their ratio.
pub fn cmd_epsilon(cfg: &RunConfig) -> Result<CommandOutput> {
    let theta = spec_character(cfg)?;
    let moy = moy_epsilon(&theta)?;
    let c = theta.conductor();
    let delta = TowerElement::pi_pow(theta.field(), 1 - c as i64);
    let oracle = oracle_sum(&theta, &delta, cfg.oracle_budget)?;
    let ratio = moy.value.div(&oracle)?.normalize();
    let vals = [("moy", ExactValue::scaled(&moy.value)), ("oracle", ExactValue::scaled(&oracle)), ("ratio", ExactValue::scaled(&ratio))];
    let rows: Vec<Vec<String>> = vals.iter().map(|(k, v)| vec![k.to_string(), v.exact.clone(), v.approx.clone()]).collect();
    let report = json!({
        "character": to_value(&theta.data()),
        "parity": to_value(&moy.parity),
        "moy": to_value(&vals[0].1),
        "oracle": to_value(&vals[1].1),
        "ratio": to_value(&vals[2].1),
    });
    Ok(CommandOutput { code: 0, report, table: table(&["quantity", "exact", "approx"], &rows) })
}

/// Howe factorization of the configured character (or of the constructed `phi` when no `gamma`
/// is given), with the round trip through the product of the factors.
pub fn cmd_factorize(cfg: &RunConfig) -> Result<CommandOutput> {
    let theta = if cfg.character.gamma.is_empty() {
        let s = &cfg.sharpness;
        let e = make_tower(s.p, &[Step::TameRamified { degree: s.n, unit_exp: 0 }], s.precision)?;
        build_phi(&Arc::new(AddChar::new(&e)?), s.ell)?
    } else {
        spec_character(cfg)?
    };
    let h = howe_factorize(&theta, &BASE)?;
    let round_trip = h.reconstruct(theta.psi())?.same(&theta);
    let generic = is_generic(&theta, &BASE)?;
    let summary: HoweSummary = h.summary();
    let rows: Vec<Vec<String>> = summary
        .tower
        .iter()
        .zip(summary.conductors.iter().zip(&summary.inflated_conductors))
        .map(|((f, e), (c, ic))| vec![format!("(f={}, e={})", f, e), c.to_string(), ic.to_string()])
        .collect();
    let decreasing = summary.inflated_conductors.windows(2).all(|w| w[0] > w[1]);
    let report = json!({
        "character": to_value(&theta.data()),
        "generic": generic,
        "howe": to_value(&summary),
        "round_trip": round_trip,
        "strictly_decreasing": decreasing,
    });
    let code = if round_trip && decreasing { 0 } else { 1 };
    Ok(CommandOutput { code, report, table: table(&["field", "conductor", "inflated"], &rows) })
}

#[derive(Serialize)]
struct ConstructReport {
    config: SharpnessConfig,
    selector: u64,
    mutations: Vec<u64>,
    beta: crate::local::element::ElementData,
    phi1: CharData,
    phi2: CharData,
    checks: PairChecks,
    howe: HoweSummary,
    holds: bool,
}

fn mutate(pair: PhiPair, cfg: &RunConfig) -> Result<PhiPair> {
    cfg.mutate.iter().try_fold(pair, |p, a| p.mutated(*a))
}

/// Builds the pair and reports its construction checks.
pub fn cmd_construct(cfg: &RunConfig) -> Result<CommandOutput> {
    let pair = mutate(build_phi_pair(&cfg.sharpness)?, cfg)?;
    let holds = pair.checks.all_hold(pair.n);
    let r = ConstructReport {
        config: pair.config.clone(),
        selector: pair.selector,
        mutations: pair.mutations.clone(),
        beta: pair.beta.data(),
        phi1: pair.phi1.data(),
        phi2: pair.phi2.data(),
        checks: pair.checks.clone(),
        howe: pair.howe.clone(),
        holds,
    };
    let c = &pair.checks;
    let rows = vec![
        vec!["agree on pi_E".into(), c.agree_uniformizer.to_string()],
        vec!["agree on Teichmuller units".into(), c.agree_teichmuller.to_string()],
        vec!["agree on 1 + P_E^2".into(), c.agree_layer_two.to_string()],
        vec!["differ on 1 + P_E".into(), c.differ_layer_one.to_string()],
        vec!["admissible".into(), format!("{:?}", c.admissible)],
        vec!["conductors".into(), format!("{:?}", c.conductors)],
        vec!["conjugate".into(), c.conjugate.to_string()],
    ];
    Ok(CommandOutput { code: if holds { 0 } else { 1 }, report: json!({ "construct": to_value(&r) }), table: table(&["check", "value"], &rows) })
}

/// Summary rows: one per report for small families, otherwise one per (level, extension,
/// conductor) group plus every failing report.
fn report_rows(reports: &[VerificationReport]) -> Vec<Vec<String>> {
    let row = |r: &VerificationReport| {
        vec![
            r.pair_id.clone(),
            r.case.as_ref().map(|c| format!("{:?}", c.label)).unwrap_or_else(|| "-".into()),
            format!("{:?}", r.verdict).to_lowercase(),
            format!("{:.1}", r.elapsed.as_secs_f64() * 1e3),
        ]
    };
    if reports.len() <= 40 {
        return reports.iter().map(row).collect();
    }
    let mut groups: BTreeMap<(String, String), (usize, usize, f64)> = BTreeMap::new();
    for r in reports {
        let key = r.pair.as_ref().map(|p| format!("{}:m{}", p.shape.label(), p.m)).unwrap_or_else(|| "chi".into());
        let g = groups.entry((r.level.clone(), key)).or_default();
        g.0 += 1;
        g.1 += usize::from(!r.passed());
        g.2 += r.elapsed.as_secs_f64() * 1e3;
    }
    let mut rows: Vec<Vec<String>> = groups
        .into_iter()
        .map(|((level, key), (n, fails, ms))| vec![format!("{}:{} ({} pairs)", level, key, n), "-".into(), if fails == 0 { "pass".into() } else { format!("fail x{}", fails) }, format!("{:.1}", ms)])
        .collect();
    rows.extend(reports.iter().filter(|r| !r.passed()).take(20).map(row));
    rows
}

/// The pair on `E` inside the ambient field used for degree-`r` twists.
pub fn ambient_pair(cfg: &RunConfig, r: u32) -> Result<(Ambient, PhiPair)> {
    let s = &cfg.sharpness;
    let prec = cfg.ambient_precision.unwrap_or_else(|| Ambient::default_precision(s.p, s.n, r));
    let amb = Ambient::new(s.p, s.n, r, prec)?;
    let psi = Arc::new(AddChar::new(&amb.e.field)?);
    let mut pair = build_phi_pair_on(&psi, s.ell, s.selector, s.seed)?;
    pair.config.conductor_bound = s.conductor_bound;
    Ok((amb, mutate(pair, cfg)?))
}

/// `verify_r1_gamma` and/or `verify_equ6` over the enumerated twists.
pub fn cmd_verify(cfg: &RunConfig) -> Result<CommandOutput> {
    let s = &cfg.sharpness;
    let mut reports = Vec::new();
    if matches!(cfg.level, Level::R1 | Level::All) {
        let pair = mutate(build_phi_pair(s)?, cfg)?;
        reports.extend(verify_r1_gamma(&pair, s.conductor_bound)?);
    }
    if matches!(cfg.level, Level::Equ6 | Level::All) {
        let r = cfg.equ6_degree();
        let (amb, pair) = ambient_pair(cfg, r)?;
        reports.extend(verify_equ6_family(&pair, &amb, r, s.conductor_bound, cfg.scan_conductors)?);
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let report = json!({
        "total": reports.len(),
        "failed": failed,
        "reports": to_value(&reports),
    });
    let mut t = table(&["pair", "case", "verdict", "ms"], &report_rows(&reports));
    let _ = writeln!(t, "{} reports, {} failed", reports.len(), failed);
    Ok(CommandOutput { code: if failed == 0 { 0 } else { 1 }, report, table: t })
}

/// Distinguisher search at `r = floor(N/2)`; reported, and failing only when a hit does not
/// re-verify through the direct coset product.
pub fn cmd_search(cfg: &RunConfig) -> Result<CommandOutput> {
    let r = cfg.search_degree();
    let (amb, pair) = ambient_pair(cfg, r)?;
    let outcome = search_distinguisher(&pair, &amb, r, cfg.sharpness.conductor_bound, amb.ctx.digits())?;
    let rows = match &outcome.found {
        Some(d) => vec![vec![d.pair.id.clone(), d.epsilon_ratio.exact.clone(), d.route_a_quotient.exact.clone(), d.confirmed.to_string()]],
        None => vec![vec!["none".into(), "-".into(), "-".into(), "-".into()]],
    };
    let mut t = table(&["pair", "epsilon ratio", "route A quotient", "confirmed"], &rows);
    let _ = writeln!(t, "{} pairs examined, {} skipped, {} ms", outcome.examined, outcome.skipped.len(), outcome.elapsed_ms);
    let code = match &outcome.found {
        Some(d) if !d.confirmed => 1,
        _ => 0,
    };
    Ok(CommandOutput { code, report: json!({ "search": to_value(&outcome) }), table: t })
}

/// One self-test line.
#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub ms: u128,
}

fn self_check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfCheck {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
    SelfCheck { name: name.into(), passed, detail, ms: start.elapsed().as_millis() }
}

/// Small-parameter invariants of every layer.
pub fn selftest_checks(seed: u64) -> Vec<SelfCheck> {
    let mut out = Vec::new();
    out.push(self_check("construction p=7 N=5", || {
        let pair = build_phi_pair(&SharpnessConfig::new(7, 5))?;
        let bad = pair.mutated(1)?;
        let ok = pair.checks.all_hold(5) && !bad.checks.agree_layer_two && bad.restored()?.checks.all_hold(5);
        Ok((ok, format!("selector {}", pair.selector)))
    }));
    out.push(self_check("construction p=11 N=6", || {
        let pair = build_phi_pair(&SharpnessConfig::new(11, 6))?;
        let h = &pair.howe;
        let ok = pair.checks.all_hold(6) && h.tower.len() == 2 && h.inflated_conductors.windows(2).all(|w| w[0] > w[1]);
        Ok((ok, format!("tower {:?}, inflated conductors {:?}", h.tower, h.inflated_conductors)))
    }));
    out.push(self_check("valuation cases N=5..7", || {
        let mut rows = 0;
        let mut bad = 0;
        for n in 5..=7 {
            let s = case_scan(n, 11, 8)?;
            rows += s.rows.len();
            bad += s.equal_valuations + s.congruence_failures + s.rows.iter().filter(|r| r.n_divides_2e_l).count();
        }
        Ok((bad == 0, format!("{} rows, {} violations", rows, bad)))
    }));
    out.push(self_check("Moy vs oracle p=7, two seeds", || {
        let f = make_tower(7, &[], 8)?;
        let psi = Arc::new(AddChar::new(&f)?);
        let mut reports = Vec::new();
        for s in [seed, seed + 1] {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut thetas = Vec::new();
            for c in 2..=4 {
                for _ in 0..6 {
                    thetas.push(MulChar::random(&psi, c, 6, &mut rng)?);
                }
            }
            reports.push(moy_oracle_consistency(&thetas, DEFAULT_TERM_BUDGET)?);
        }
        let mut stable = true;
        for c in &reports[0].classes {
            match reports[1].constant(c.conductor) {
                Some(k) => stable &= k.eq_exact(&c.constant)?,
                None => stable = false,
            }
        }
        let ok = reports.iter().all(|r| r.all_consistent) && stable;
        Ok((ok, format!("{} classes", reports[0].classes.len())))
    }));
    out.push(self_check("r = 1 twists p=7 N=5 bound 3", || {
        let pair = build_phi_pair(&SharpnessConfig::new(7, 5))?;
        let good = verify_r1_gamma(&pair, 3)?;
        let bad = verify_r1_gamma(&pair.mutated(1)?, 3)?;
        let ok = good.iter().all(|r| r.passed()) && bad.iter().any(|r| !r.passed());
        Ok((ok, format!("{} twists", good.len())))
    }));
    out.push(self_check("coset identity p=11 N=7 r=2 bound 2", || {
        let mut cfg = RunConfig::from_map(Command::Verify, &BTreeMap::from([("p".to_string(), "11".to_string()), ("N".to_string(), "7".to_string())]))?;
        cfg.sharpness.conductor_bound = 2;
        let (amb, pair) = ambient_pair(&cfg, 2)?;
        let reps = verify_equ6_family(&pair, &amb, 2, 2, true)?;
        let ok = !reps.is_empty() && reps.iter().all(|r| r.passed());
        Ok((ok, format!("{} pairs", reps.len())))
    }));
    out.push(self_check("precision guard", || {
        let mut cfg = SharpnessConfig::new(7, 5);
        cfg.precision = 9;
        let r = cfg.validate();
        Ok((matches!(r, Err(Error::PrecisionLoss(_))), format!("{:?}", r.err())))
    }));
    out
}

pub fn cmd_selftest(cfg: &RunConfig) -> Result<CommandOutput> {
    let checks = selftest_checks(cfg.sharpness.seed);
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.clone(), if c.passed { "pass".into() } else { "fail".into() }, c.detail.clone(), c.ms.to_string()])
        .collect();
    let ok = checks.iter().all(|c| c.passed);
    Ok(CommandOutput { code: if ok { 0 } else { 1 }, report: json!({ "selftest": to_value(&checks) }), table: table(&["check", "verdict", "detail", "ms"], &rows) })
}

/// Parses arguments, runs the command, writes the report and prints the table. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return exit_code(&e);
        }
    };
    match execute(&cfg) {
        Ok(out) => {
            if let Some(path) = &cfg.out {
                let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: cannot write {}: {}", path, e);
                    return 2;
                }
            }
            print!("{}", out.table);
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}
