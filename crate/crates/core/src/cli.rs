//! Command-line front end: configuration (TOML file plus flags), dispatch to the
//! library, and persistence of every run through [`crate::io`].

use crate::analysis::{self, classify_dichotomy, fit_decay, DecayKind};
use crate::diffusion::DiffusionWave;
use crate::error::{Error, Result};
use crate::fsi::{self, Scheme, SimConfig};
use crate::greens::{self, GreensGrid};
use crate::interdiffusion::{self, SpectralConfig};
use crate::io::{self, fmt_f64, CsvTable, RunArtifacts};
use crate::lemmas::{self, Lemma, LemmaParams, ProductGrid, ProductParams, SampleGrid};
use crate::model::{compute_masses, eigen_structure, FluidParams, MassPair};
use crate::scenario;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "pmlab", version, about = "Point mass in a viscous compressible fluid: simulations and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Cmd {
    /// Run the coupled fluid/point-mass solver on a named scenario.
    Simulate,
    /// Diffusion (`theta`) or inter-diffusion (`xi`, `zeta`) wave snapshots.
    Waves { kind: String },
    /// Fundamental-solution kernels and their bound ratios.
    Greens,
    /// Check a convolution inequality (C.2 .. C.11), a product row (`table2`) or `indicator`.
    VerifyLemma { id: String },
    /// Fit a power-law decay to a CSV series.
    Fit,
    /// Simulate and classify the decay of the point-mass velocity.
    Dichotomy,
    /// Quick cross-module report.
    Report,
}

impl Cmd {
    pub fn name(&self) -> &'static str {
        match self {
            Cmd::Simulate => "simulate",
            Cmd::Waves { .. } => "waves",
            Cmd::Greens => "greens",
            Cmd::VerifyLemma { .. } => "verify-lemma",
            Cmd::Fit => "fit",
            Cmd::Dichotomy => "dichotomy",
            Cmd::Report => "report",
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"))).collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}

/// Flags shared by all commands; any flag overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    #[arg(long, global = true)]
    pub amplitude: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub m1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub m2: Option<f64>,
    #[arg(long, global = true)]
    pub family: Option<usize>,
    #[arg(long = "t-final", global = true)]
    pub t_final: Option<f64>,
    #[arg(long = "length", visible_alias = "l", global = true)]
    pub l: Option<f64>,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-p", global = true, allow_hyphen_values = true)]
    pub lambda_p: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub row: Option<usize>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub column: Option<String>,
    #[arg(long, global = true, value_parser = parse_pair)]
    pub window: Option<(f64, f64)>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "output-dir", global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Effective configuration after defaults, file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub target: Option<String>,
    pub gamma: f64,
    pub nu: f64,
    pub scenario: String,
    pub amplitude: f64,
    pub m1: f64,
    pub m2: f64,
    pub family: usize,
    pub t_final: f64,
    pub l: Option<f64>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub n: Option<usize>,
    pub scheme: String,
    pub snapshots: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_p: Option<f64>,
    pub mu: Option<f64>,
    pub k: Option<f64>,
    pub row: Option<usize>,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub window: Option<(f64, f64)>,
    pub samples: usize,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: "report".into(),
            target: None,
            gamma: 1.0,
            nu: 1.0,
            scenario: "generic".into(),
            amplitude: 0.05,
            m1: 1.0,
            m2: 1.0,
            family: 1,
            t_final: 200.0,
            l: None,
            h: None,
            dt: None,
            n: None,
            scheme: "imex".into(),
            snapshots: None,
            times: None,
            alpha: None,
            beta: None,
            lambda: None,
            lambda_p: None,
            mu: None,
            k: None,
            row: None,
            input: None,
            column: None,
            window: None,
            samples: 100,
            output_dir: None,
            seed: 0,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "output_dir",
    "seed",
    "params.gamma",
    "params.nu",
    "scenario.name",
    "scenario.amplitude",
    "scenario.m1",
    "scenario.m2",
    "scenario.family",
    "numeric.t_final",
    "numeric.l",
    "numeric.h",
    "numeric.dt",
    "numeric.n",
    "numeric.scheme",
    "numeric.snapshots",
    "numeric.times",
    "numeric.samples",
    "lemma.alpha",
    "lemma.beta",
    "lemma.lambda",
    "lemma.lambda_p",
    "lemma.mu",
    "lemma.k",
    "lemma.row",
    "fit.input",
    "fit.column",
    "fit.window",
];

fn flatten(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, toml::Value>) {
    match v {
        toml::Value::Table(t) => {
            for (k, x) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                if x.is_table() && prefix.is_empty() {
                    flatten(&key, x, out);
                } else {
                    out.insert(key, x.clone());
                }
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("{key}: expected a number"))),
    }
}

fn as_list(key: &str, v: &toml::Value) -> Result<Vec<f64>> {
    match v {
        toml::Value::Array(a) => a.iter().map(|x| as_f64(key, x)).collect(),
        toml::Value::String(s) => parse_list(s).map_err(|e| Error::Config(format!("{key}: {e}"))),
        _ => Err(Error::Config(format!("{key}: expected a list of numbers"))),
    }
}

fn as_usize(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::Config(format!("{key}: expected a non-negative integer"))),
    }
}

fn as_str(key: &str, v: &toml::Value) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| Error::Config(format!("{key}: expected a string")))
}

/// Apply a TOML document to `cfg`. Unknown keys are reported all at once.
pub fn apply_file(cfg: &mut RunConfig, text: &str) -> Result<()> {
    let doc: toml::Value = text.parse::<toml::Table>().map(toml::Value::Table).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
    let mut flat = BTreeMap::new();
    flatten("", &doc, &mut flat);
    let unknown: Vec<&str> = flat.keys().map(String::as_str).filter(|k| !KNOWN_KEYS.contains(k)).collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown config keys: {}", unknown.join(", "))));
    }
    for (k, v) in &flat {
        let k = k.as_str();
        match k {
            "output_dir" => cfg.output_dir = Some(PathBuf::from(as_str(k, v)?)),
            "seed" => cfg.seed = as_usize(k, v)? as u64,
            "params.gamma" => cfg.gamma = as_f64(k, v)?,
            "params.nu" => cfg.nu = as_f64(k, v)?,
            "scenario.name" => cfg.scenario = as_str(k, v)?,
            "scenario.amplitude" => cfg.amplitude = as_f64(k, v)?,
            "scenario.m1" => cfg.m1 = as_f64(k, v)?,
            "scenario.m2" => cfg.m2 = as_f64(k, v)?,
            "scenario.family" => cfg.family = as_usize(k, v)?,
            "numeric.t_final" => cfg.t_final = as_f64(k, v)?,
            "numeric.l" => cfg.l = Some(as_f64(k, v)?),
            "numeric.h" => cfg.h = Some(as_f64(k, v)?),
            "numeric.dt" => cfg.dt = Some(as_f64(k, v)?),
            "numeric.n" => cfg.n = Some(as_usize(k, v)?),
            "numeric.scheme" => cfg.scheme = as_str(k, v)?,
            "numeric.snapshots" => cfg.snapshots = Some(as_list(k, v)?),
            "numeric.times" => cfg.times = Some(as_list(k, v)?),
            "numeric.samples" => cfg.samples = as_usize(k, v)?,
            "lemma.alpha" => cfg.alpha = Some(as_f64(k, v)?),
            "lemma.beta" => cfg.beta = Some(as_f64(k, v)?),
            "lemma.lambda" => cfg.lambda = Some(as_f64(k, v)?),
            "lemma.lambda_p" => cfg.lambda_p = Some(as_f64(k, v)?),
            "lemma.mu" => cfg.mu = Some(as_f64(k, v)?),
            "lemma.k" => cfg.k = Some(as_f64(k, v)?),
            "lemma.row" => cfg.row = Some(as_usize(k, v)?),
            "fit.input" => cfg.input = Some(PathBuf::from(as_str(k, v)?)),
            "fit.column" => cfg.column = Some(as_str(k, v)?),
            "fit.window" => {
                cfg.window = match as_list(k, v)?.as_slice() {
                    [a, b] => Some((*a, *b)),
                    _ => return Err(Error::Config("fit.window: expected two numbers".into())),
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, f: &Flags) {
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = &f.$field {
                cfg.$field = v.clone();
            }
        };
        (opt $field:ident) => {
            if let Some(v) = &f.$field {
                cfg.$field = Some(v.clone());
            }
        };
    }
    set!(gamma);
    set!(nu);
    set!(scenario);
    set!(amplitude);
    set!(m1);
    set!(m2);
    set!(family);
    set!(t_final);
    set!(opt l);
    set!(opt h);
    set!(opt dt);
    set!(opt n);
    set!(scheme);
    set!(opt snapshots);
    set!(opt times);
    set!(opt alpha);
    set!(opt beta);
    set!(opt lambda);
    set!(opt lambda_p);
    set!(opt mu);
    set!(opt k);
    set!(opt row);
    set!(opt input);
    set!(opt column);
    set!(opt window);
    set!(samples);
    set!(opt output_dir);
    set!(seed);
}

/// Defaults, then the config file (if any), then flags.
pub fn parse_config(cmd: &Cmd, flags: &Flags) -> Result<RunConfig> {
    let mut cfg = RunConfig { command: cmd.name().to_string(), ..RunConfig::default() };
    cfg.target = match cmd {
        Cmd::Waves { kind } => Some(kind.clone()),
        Cmd::VerifyLemma { id } => Some(id.clone()),
        _ => None,
    };
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        apply_file(&mut cfg, &text)?;
    }
    apply_flags(&mut cfg, flags);
    if !(cfg.family == 1 || cfg.family == 2) {
        return Err(Error::Config(format!("family must be 1 or 2, got {}", cfg.family)));
    }
    cfg.scheme.parse::<Scheme>()?;
    FluidParams::new(cfg.gamma, cfg.nu)?;
    Ok(cfg)
}

fn toml_f64(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn toml_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| toml_f64(x)).collect::<Vec<_>>().join(", "))
}

impl RunConfig {
    /// Canonical TOML echo (fixed key order) that round-trips through [`apply_file`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# command = {:?}\n", self.command));
        if let Some(t) = &self.target {
            s.push_str(&format!("# target = {t:?}\n"));
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str("\n[params]\n");
        s.push_str(&format!("gamma = {}\nnu = {}\n", toml_f64(self.gamma), toml_f64(self.nu)));
        s.push_str("\n[scenario]\n");
        s.push_str(&format!(
            "name = {:?}\namplitude = {}\nm1 = {}\nm2 = {}\nfamily = {}\n",
            self.scenario,
            toml_f64(self.amplitude),
            toml_f64(self.m1),
            toml_f64(self.m2),
            self.family
        ));
        s.push_str("\n[numeric]\n");
        s.push_str(&format!("t_final = {}\n", toml_f64(self.t_final)));
        for (k, v) in [("l", self.l), ("h", self.h), ("dt", self.dt)] {
            if let Some(v) = v {
                s.push_str(&format!("{k} = {}\n", toml_f64(v)));
            }
        }
        if let Some(n) = self.n {
            s.push_str(&format!("n = {n}\n"));
        }
        s.push_str(&format!("scheme = {:?}\n", self.scheme));
        if let Some(v) = &self.snapshots {
            s.push_str(&format!("snapshots = {}\n", toml_list(v)));
        }
        if let Some(v) = &self.times {
            s.push_str(&format!("times = {}\n", toml_list(v)));
        }
        s.push_str(&format!("samples = {}\n", self.samples));
        s.push_str("\n[lemma]\n");
        for (k, v) in [("alpha", self.alpha), ("beta", self.beta), ("lambda", self.lambda), ("lambda_p", self.lambda_p), ("mu", self.mu), ("k", self.k)] {
            if let Some(v) = v {
                s.push_str(&format!("{k} = {}\n", toml_f64(v)));
            }
        }
        if let Some(r) = self.row {
            s.push_str(&format!("row = {r}\n"));
        }
        s.push_str("\n[fit]\n");
        if let Some(p) = &self.input {
            s.push_str(&format!("input = {:?}\n", p.display().to_string()));
        }
        if let Some(c) = &self.column {
            s.push_str(&format!("column = {c:?}\n"));
        }
        if let Some((a, b)) = self.window {
            s.push_str(&format!("window = {}\n", toml_list(&[a, b])));
        }
        s
    }

    pub fn params(&self) -> Result<FluidParams> {
        FluidParams::new(self.gamma, self.nu)
    }

    /// `--output-dir`, else `<root>/<command>[-target]-<hash prefix>`.
    pub fn run_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        let hash = io::config_hash(&self.echo());
        let mut name = self.command.clone();
        if let Some(t) = &self.target {
            name.push('-');
            name.push_str(&t.replace(['/', '.', ' '], "_"));
        }
        io::output_root().join(format!("{name}-{}", &hash[..12]))
    }
}

/// Outcome of a command: pass/fail plus what to write.
pub struct Outcome {
    pub pass: bool,
    pub artifacts: RunArtifacts,
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn finish(cfg: &RunConfig, mut art: RunArtifacts, pass: bool) -> Outcome {
    art.config_echo = cfg.echo();
    art.note("status", status(pass));
    Outcome { pass, artifacts: art }
}

fn sim_config(cfg: &RunConfig, p: &FluidParams, radius: f64) -> Result<SimConfig> {
    let mut sc = SimConfig::for_horizon(p, cfg.t_final, radius);
    if let Some(l) = cfg.l {
        sc.l = l;
    }
    if let Some(h) = cfg.h {
        sc.h = h;
    }
    if let Some(dt) = cfg.dt {
        sc.dt = dt;
    }
    sc.scheme = cfg.scheme.parse()?;
    sc.snapshot_times = cfg.snapshots.clone().unwrap_or_default();
    sc.validate(p)?;
    Ok(sc)
}

fn default_window(cfg: &RunConfig) -> (f64, f64) {
    cfg.window.unwrap_or((50.0, 0.9 * cfg.t_final))
}

fn simulate_core(cfg: &RunConfig, art: &mut RunArtifacts) -> Result<(MassPair, fsi::Trajectory, bool)> {
    let p = cfg.params()?;
    let init = scenario::build(&cfg.scenario, cfg.amplitude)?;
    let masses = compute_masses(&init, &eigen_structure(&p))?;
    let sc = sim_config(cfg, &p, scenario::radius(&cfg.scenario))?;
    let traj = fsi::run(&init, &sc, &p)?;
    let mut series = CsvTable::new("trajectory.csv", &["t", "V"]);
    for &(t, v) in &traj.v_series {
        series.push_f64(&[t, v]);
    }
    let mut drift = CsvTable::new("drift.csv", &["t", "momentum_drift", "mass_drift"]);
    for &(t, a, b) in &traj.drift {
        drift.push_f64(&[t, a, b]);
    }
    art.tables.push(series);
    art.tables.push(drift);
    for st in &traj.snapshots {
        let mut tv = CsvTable::new(&format!("snapshot_t{}.csv", fmt_f64(st.t)), &["x", "v", "u"]);
        let uc = st.u_cells();
        for k in 0..st.v.len() {
            tv.push_f64(&[st.cell_x(k), st.v[k], uc[k]]);
        }
        art.tables.push(tv);
    }
    let (dm, dmass) = traj.max_drift();
    let max_v = traj.v_series.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    art.note("scenario", &cfg.scenario);
    art.note("M1", fmt_f64(masses.m1));
    art.note("M2", fmt_f64(masses.m2));
    art.note("M1^2-M2^2", fmt_f64(masses.discriminant()));
    art.note("L", fmt_f64(sc.l));
    art.note("h", fmt_f64(sc.h));
    art.note("dt", fmt_f64(sc.dt));
    art.note("max_abs_V", fmt_f64(max_v));
    if max_v < analysis::ZERO_SERIES {
        art.note("note", "max|V| below 1e-10 (V vanishes by symmetry)");
    }
    art.note("max_momentum_drift", fmt_f64(dm));
    art.note("max_mass_drift", fmt_f64(dmass));
    art.note("boundary_max", fmt_f64(traj.boundary_max));
    let conserved = dm < 1e-8 && dmass < 1e-8;
    art.note("conservation", status(conserved));
    Ok((masses, traj, conserved))
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let mut art = RunArtifacts::default();
    let (_, _, ok) = simulate_core(cfg, &mut art)?;
    Ok(finish(cfg, art, ok))
}

fn cmd_dichotomy(cfg: &RunConfig) -> Result<Outcome> {
    let mut art = RunArtifacts::default();
    let (masses, traj, ok) = simulate_core(cfg, &mut art)?;
    let window = default_window(cfg);
    let v = classify_dichotomy(&masses, &traj.v_series, window);
    art.note("window", format!("{},{}", fmt_f64(window.0), fmt_f64(window.1)));
    art.note("m_condition", v.m_condition);
    art.note("predicted", v.predicted.name());
    art.note("observed_exponent", v.observed_exponent.map_or("n/a".into(), fmt_f64));
    art.note("eventual_sign", v.eventual_sign.map_or("n/a".into(), |(t, s)| format!("{s} from t={}", fmt_f64(t))));
    art.note("consistent", v.consistent);
    let mut t = CsvTable::new("verdict.csv", &["m_condition", "predicted", "observed_exponent", "max_abs_V", "consistent"]);
    t.push(vec![
        v.m_condition.to_string(),
        v.predicted.name().into(),
        v.observed_exponent.map_or("nan".into(), fmt_f64),
        fmt_f64(v.max_abs),
        v.consistent.to_string(),
    ]);
    art.tables.push(t);
    Ok(finish(cfg, art, ok && v.consistent))
}

fn cmd_waves(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let kind = cfg.target.clone().unwrap_or_else(|| "xi".into());
    let masses = MassPair::new(cfg.m1, cfg.m2);
    let snaps = cfg.snapshots.clone().unwrap_or_else(|| vec![cfg.t_final]);
    let horizon = snaps.iter().copied().fold(f64::NAN, f64::max);
    if !(horizon > 0.0) {
        return Err(Error::Config("snapshot times must be positive".into()));
    }
    let mut sc = SpectralConfig::for_horizon(&p, horizon, cfg.h.unwrap_or(0.166));
    if let Some(l) = cfg.l {
        sc.l = l;
    }
    if let Some(n) = cfg.n {
        sc.n = n;
    }
    if let Some(dt) = cfg.dt {
        sc.dt = dt;
    }
    sc.snapshot_times = snaps.clone();
    sc.validate(&p)?;
    let i = cfg.family;
    let mut art = RunArtifacts::default();
    art.note("kind", &kind);
    art.note("family", i);
    art.note("M1", fmt_f64(masses.m1));
    art.note("M2", fmt_f64(masses.m2));
    art.note("L", fmt_f64(sc.l));
    art.note("N", sc.n);
    let mut pass = true;
    match kind.as_str() {
        "xi" | "zeta" => {
            let f = if kind == "xi" { interdiffusion::solve_xi(i, &masses, &p, &sc)? } else { interdiffusion::solve_zeta(i, &masses, &p, &sc)? };
            let mut integrals = CsvTable::new("integrals.csv", &["t", "integral"]);
            for (s, &t) in f.times.iter().enumerate() {
                let mut tab = CsvTable::new(&format!("{kind}{i}_t{}.csv", fmt_f64(t)), &["x", "value"]);
                for (j, &x) in f.x.iter().enumerate() {
                    tab.push_f64(&[x, f.values[s][j]]);
                }
                art.tables.push(tab);
                let m = f.integral(s);
                integrals.push_f64(&[t, m]);
                pass &= m.abs() < 1e-8;
            }
            art.tables.push(integrals);
            art.note("zero_integral", status(pass));
        }
        "theta" => {
            let w = DiffusionWave::family(i, &masses, &eigen_structure(&p), &p)?;
            let x = sc.grid();
            for &t in &snaps {
                let mut tab = CsvTable::new(&format!("theta{i}_t{}.csv", fmt_f64(t)), &["x", "value"]);
                for &xv in &x {
                    tab.push_f64(&[xv, w.theta(xv, t)]);
                }
                art.tables.push(tab);
            }
        }
        other => return Err(Error::Config(format!("unknown wave kind '{other}' (expected xi, zeta or theta)"))),
    }
    Ok(finish(cfg, art, pass))
}

fn cmd_greens(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let grid = GreensGrid { l: cfg.l.unwrap_or(51.2), n: cfg.n.unwrap_or(2048) };
    let times = cfg.times.clone().unwrap_or_else(|| vec![1.0, 2.0, 5.0, 10.0]);
    let mut art = RunArtifacts::default();
    let mut kernels = CsvTable::new("kernels.csv", &["t", "x", "m11", "m12", "m21", "m22", "kernel_name"]);
    let mut ratios = CsvTable::new(
        "ratios.csv",
        &["t", "unrefined_k0", "unrefined_k1", "projected_plain", "projected_refined", "transmissive"],
    );
    let mut ids = CsvTable::new("identities.csv", &["t", "gt_derivative", "gr_first_form", "gr_second_form", "gr_forms"]);
    let (mut sup_plain, mut sup_refined) = (0.0f64, 0.0f64);
    let mut finite = true;
    for &t in &times {
        let g = greens::g_numeric(grid, t, &p)?;
        let gs = greens::gstar_grid(grid, t, &p)?;
        let gt = greens::g_transmissive(&g)?;
        let gr = greens::g_reflective(&g, &gt)?;
        for (name, k) in [("G", &g), ("Gstar", &gs), ("G_T", &gt), ("G_R", &gr)] {
            for (j, &x) in k.x.iter().enumerate() {
                let m = k.m[j];
                let mut row: Vec<String> = [t, x, m[0][0], m[0][1], m[1][0], m[1][1]].iter().map(|&v| fmt_f64(v)).collect();
                row.push(name.into());
                kernels.push(row);
            }
        }
        let r = greens::bound_ratios(grid, t, &p, 0.5)?;
        let tr = greens::transmissive_bound_ratio(&gt, &p, 0.5);
        ratios.push_f64(&[t, r.unrefined_k0, r.unrefined_k1, r.projected_plain, r.projected_refined, tr]);
        sup_plain = sup_plain.max(r.projected_plain);
        sup_refined = sup_refined.max(r.projected_refined);
        finite &= [r.unrefined_k0, r.unrefined_k1, r.projected_refined, tr].iter().all(|v| v.is_finite());
        let id = greens::identity_residuals(&g, &gt, &gr, 0.5, 0.8 * grid.l);
        ids.push_f64(&[t, id.gt_derivative, id.gr_first_form, id.gr_second_form, id.gr_forms]);
    }
    art.tables.extend([kernels, ratios, ids]);
    art.note("sup_projected_plain", fmt_f64(sup_plain));
    art.note("sup_projected_refined", fmt_f64(sup_refined));
    let pass = finite && sup_refined < sup_plain;
    art.note("refined_below_plain", sup_refined < sup_plain);
    Ok(finish(cfg, art, pass))
}

fn lemma_params(cfg: &RunConfig, l: Lemma) -> LemmaParams {
    let d = l.default_params();
    LemmaParams {
        alpha: cfg.alpha.unwrap_or(d.alpha),
        beta: cfg.beta.unwrap_or(d.beta),
        lambda: cfg.lambda.unwrap_or(d.lambda),
        lambda_p: cfg.lambda_p.unwrap_or(d.lambda_p),
        mu: cfg.mu.unwrap_or(d.mu),
        k: cfg.k.or(d.k),
    }
}

fn params_text(p: &LemmaParams) -> String {
    let mut s = format!("alpha={};beta={};lambda={};lambda_p={};mu={}", p.alpha, p.beta, p.lambda, p.lambda_p, p.mu);
    if let Some(k) = p.k {
        s.push_str(&format!(";K={k}"));
    }
    s
}

fn cmd_verify_lemma(cfg: &RunConfig) -> Result<Outcome> {
    let id = cfg.target.clone().unwrap_or_default();
    let mut art = RunArtifacts::default();
    let mut table = CsvTable::new("ratios.csv", &["lemma_id", "params", "part", "t", "sup_ratio", "argmax_x"]);
    let key = id.to_ascii_lowercase();
    let pass = if key == "table2" || key == "indicator" || key == "d" {
        let d = ProductParams::default();
        let pp = ProductParams {
            alpha: cfg.alpha.unwrap_or(d.alpha),
            beta: cfg.beta.unwrap_or(d.beta),
            lambda: cfg.lambda.unwrap_or(d.lambda),
            lambda_p: cfg.lambda_p.unwrap_or(d.lambda_p),
            mu: cfg.mu.unwrap_or(d.mu),
            m_power: d.m_power,
        };
        let mut grid = ProductGrid::default();
        if let Some(t) = &cfg.times {
            grid.times = t.clone();
        }
        let ptxt = format!("alpha={};beta={};lambda={};lambda_p={};mu={};M={}", pp.alpha, pp.beta, pp.lambda, pp.lambda_p, pp.mu, pp.m_power);
        let rows: Vec<usize> = if key == "indicator" {
            vec![0]
        } else {
            match cfg.row {
                Some(r) => vec![r],
                None => (1..=lemmas::PRODUCT_ROWS).collect(),
            }
        };
        let mut all = true;
        for r in rows {
            let rep = if r == 0 { lemmas::check_indicator(&pp, cfg.k.unwrap_or(1.0), &grid)? } else { lemmas::check_product_table(r, &pp, &grid)? };
            let name = if r == 0 { "indicator".to_string() } else { format!("row{r}") };
            for &(t, v, x) in &rep.rows {
                table.push(vec!["table2".into(), ptxt.clone(), name.clone(), fmt_f64(t), fmt_f64(v), fmt_f64(x)]);
            }
            art.note(&name, format!("{} constant={}", status(rep.bounded.pass), fmt_f64(rep.constant())));
            all &= rep.bounded.pass;
        }
        all
    } else {
        let lemma: Lemma = id.parse()?;
        let lp = lemma_params(cfg, lemma);
        let mut grid = SampleGrid::default();
        if let Some(t) = &cfg.times {
            grid.times = t.clone();
        }
        let rep = lemmas::check_lemma(lemma, &lp, &grid)?;
        let ptxt = params_text(&lp);
        for pr in rep.parts.iter().chain(rep.log_free.iter()) {
            for &(t, v, x) in &pr.rows {
                table.push(vec![lemma.id().into(), ptxt.clone(), pr.part.clone(), fmt_f64(t), fmt_f64(v), fmt_f64(x)]);
            }
            let verdict = if pr.bounded.pass { "bounded" } else { "growing" };
            art.note(&pr.part, format!("{verdict} constant={}", fmt_f64(pr.constant())));
        }
        if let Some(k) = rep.chosen_k {
            art.note("chosen_K", fmt_f64(k));
        }
        art.note("lemma", lemma.id());
        rep.pass
    };
    art.tables.push(table);
    Ok(finish(cfg, art, pass))
}

fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.input.clone().ok_or_else(|| Error::Config("fit needs --input <csv>".into()))?;
    let series = io::read_series(&path, cfg.column.as_deref())?;
    let tmax = series.iter().map(|p| p.0).fold(f64::NAN, f64::max);
    let window = cfg.window.unwrap_or((50.0, 0.9 * tmax));
    let f = fit_decay(&series, window)?;
    let mut art = RunArtifacts::default();
    let mut t = CsvTable::new("fit.csv", &["exponent", "amplitude", "r2", "r2_linear", "rate", "n", "kind"]);
    let kind = match f.kind {
        DecayKind::Algebraic => "algebraic",
        DecayKind::Exponential => "exponential",
        DecayKind::IdenticallyZero => "identically_zero",
    };
    t.push(vec![fmt_f64(f.exponent), fmt_f64(f.amplitude), fmt_f64(f.r2), fmt_f64(f.r2_linear), fmt_f64(f.rate), f.n.to_string(), kind.into()]);
    art.tables.push(t);
    art.note("input", path.display());
    art.note("window", format!("{},{}", fmt_f64(window.0), fmt_f64(window.1)));
    art.note("exponent", fmt_f64(f.exponent));
    art.note("kind", kind);
    Ok(finish(cfg, art, true))
}

fn cmd_report(cfg: &RunConfig) -> Result<Outcome> {
    let mut art = RunArtifacts::default();
    let mut t = CsvTable::new("report.csv", &["check", "value", "threshold", "pass"]);
    let mut all = true;
    let mut add = |t: &mut CsvTable, name: &str, v: f64, thr: f64, ok: bool| {
        t.push(vec![name.into(), fmt_f64(v), fmt_f64(thr), ok.to_string()]);
        all &= ok;
    };
    // eigenstructure on random parameter sets
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.samples {
        let p = FluidParams::new(rng.gen_range(1.0..3.0), rng.gen_range(0.1..5.0))?;
        worst = worst.max(eigen_structure(&p).residual(&p));
    }
    add(&mut t, "eigen_residual", worst, 1e-12, worst < 1e-12);
    let p = cfg.params()?;
    let eig = eigen_structure(&p);
    let masses = MassPair::new(cfg.m1, cfg.m2);
    for i in 1..=2 {
        let w = DiffusionWave::family(i, &masses, &eig, &p)?;
        for t_ in [1.0, 10.0, 100.0] {
            let e = (crate::diffusion::theta_mass(&w, t_) - masses.get(i)).abs();
            add(&mut t, &format!("theta{i}_mass_t{t_}"), e, 1e-8, e < 1e-8);
        }
    }
    let opp = MassPair::new(cfg.m1, -cfg.m1);
    for t_ in [4.0, 16.0, 64.0] {
        let v = interdiffusion::v_functional(t_, &opp, &p)?.abs();
        add(&mut t, &format!("V_functional_opposite_t{t_}"), v, 1e-8, v < 1e-8);
    }
    let r = greens::bound_ratios(GreensGrid::default(), 10.0, &p, 0.5)?;
    add(&mut t, "greens_refined_t10", r.projected_refined, r.projected_plain, r.projected_refined < r.projected_plain);
    for row in 1..=lemmas::PRODUCT_ROWS {
        let rep = lemmas::check_product_table(row, &ProductParams::default(), &ProductGrid::default())?;
        add(&mut t, &format!("product_row{row}"), rep.constant(), f64::INFINITY, rep.bounded.pass);
    }
    art.tables.push(t);
    Ok(finish(cfg, art, all))
}

pub fn run_command(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "simulate" => cmd_simulate(cfg),
        "waves" => cmd_waves(cfg),
        "greens" => cmd_greens(cfg),
        "verify-lemma" => cmd_verify_lemma(cfg),
        "fit" => cmd_fit(cfg),
        "dichotomy" => cmd_dichotomy(cfg),
        "report" => cmd_report(cfg),
        other => Err(Error::Config(format!("unknown command '{other}'"))),
    }
}

/// Parse, run, persist. Returns the process exit code: 0 pass, 1 check failure,
/// 2 usage/config error, 3 numerical failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    main_with_output(args, &mut std::io::stdout().lock())
}

/// As [`main_with_args`], with the summary written to `out`.
pub fn main_with_output<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
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
    let report_err = |e: &Error| {
        let rec = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
        eprintln!("{rec}");
        e.exit_code()
    };
    let cfg = match parse_config(&cli.command, &cli.flags) {
        Ok(c) => c,
        Err(e) => return report_err(&e),
    };
    let res = match run_command(&cfg) {
        Ok(o) => o,
        Err(e) => return report_err(&e),
    };
    let dir = cfg.run_dir();
    match io::write_run(&dir, &res.artifacts) {
        Ok(d) => {
            let _ = write!(out, "{}output = {}\n", res.artifacts.summary_text(), d.display());
        }
        Err(e) => return report_err(&e),
    }
    if res.pass {
        0
    } else {
        1
    }
}
