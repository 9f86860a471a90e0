//! Flat `key=value` experiment configuration.
//!
//! A configuration is assembled from an optional file and command-line
//! arguments (later entries win), then resolved into an [`ExperimentConfig`]
//! with every field validated and defaults filled in. The resolved form
//! serializes back to the same text format; parsing that text reproduces it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    DedekindCauchy,
    Moments,
    Clt,
    Estermann,
    Modsym,
    S0VsI,
    OscintTable,
    Spectrum,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::DedekindCauchy,
        Experiment::Moments,
        Experiment::Clt,
        Experiment::Estermann,
        Experiment::Modsym,
        Experiment::S0VsI,
        Experiment::OscintTable,
        Experiment::Spectrum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DedekindCauchy => "dedekind_cauchy",
            Experiment::Moments => "moments",
            Experiment::Clt => "clt",
            Experiment::Estermann => "estermann",
            Experiment::Modsym => "modsym",
            Experiment::S0VsI => "s0_vs_I",
            Experiment::OscintTable => "oscint_table",
            Experiment::Spectrum => "spectrum",
        }
    }

    pub fn from_name(s: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a configuration entry came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: String, line: usize },
    Argument(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Argument(i) => write!(f, "argument {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.origin, &self.field) {
            (Some(o), Some(k)) => write!(f, "{o}: field `{k}`: {}", self.message),
            (Some(o), None) => write!(f, "{o}: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(origin: Option<&Origin>, field: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        origin: origin.cloned(),
        field: field.map(str::to_string),
        message: message.into(),
    }
}

const KEYS: &[&str] = &[
    "experiment", "Q", "lambda", "kind", "alpha", "t", "t_min", "t_max", "points", "tau", "n",
    "bins", "lo", "hi", "reservoir", "seed", "workers", "method", "checks", "ks_max", "out",
];

/// Unresolved entries in the order they were supplied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: Vec<(String, String, Origin)>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse file text. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(&mut self, text: &str, path: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = Origin::File { path: path.to_string(), line: i + 1 };
            self.push_entry(line, origin)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(None, Some("config"), format!("cannot read {shown}: {e}")))?;
        self.parse_text(&text, &shown)
    }

    /// Add one `key=value` command-line argument (`index` counts from 1).
    pub fn push_arg(&mut self, arg: &str, index: usize) -> Result<(), ConfigError> {
        self.push_entry(arg.trim(), Origin::Argument(index))
    }

    /// Append `other`'s entries after this one's.
    pub fn extend(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    pub fn set(&mut self, key: &str, value: &str, origin: Origin) {
        self.entries.push((key.to_string(), value.to_string(), origin));
    }

    fn push_entry(&mut self, s: &str, origin: Origin) -> Result<(), ConfigError> {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| err(Some(&origin), None, format!("expected key=value, got `{s}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(err(Some(&origin), None, "empty key"));
        }
        if !KEYS.contains(&k) {
            return Err(err(Some(&origin), Some(k), "unknown field"));
        }
        self.set(k, v, origin);
        Ok(())
    }

    fn last(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries.iter().rev().find(|e| e.0 == key).map(|e| (e.1.as_str(), &e.2))
    }
}

/// Fully validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Denominator bounds, strictly increasing.
    pub q: Vec<u64>,
    pub lambda: Option<f64>,
    pub kind: Option<String>,
    /// Taylor order of the `taylor` expansion.
    pub alpha: Option<f64>,
    /// Explicit frequency list.
    pub t: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Imaginary offsets for off-axis eigenvalues.
    pub tau: Vec<f64>,
    /// Transfer-operator degree.
    pub n: usize,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub reservoir: usize,
    pub seed: u64,
    pub workers: usize,
    pub method: Option<String>,
    pub checks: usize,
    pub ks_max: Option<f64>,
    pub out: PathBuf,
}

fn parse_f64(v: &str, k: &str, o: &Origin) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| err(Some(o), Some(k), format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(err(Some(o), Some(k), format!("must be finite, got `{v}`")));
    }
    Ok(x)
}

fn parse_u64(v: &str, k: &str, o: &Origin) -> Result<u64, ConfigError> {
    v.parse()
        .map_err(|_| err(Some(o), Some(k), format!("expected a non-negative integer, got `{v}`")))
}

fn parse_list<T>(
    v: &str,
    k: &str,
    o: &Origin,
    f: fn(&str, &str, &Origin) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    if v.is_empty() {
        return Err(err(Some(o), Some(k), "empty list"));
    }
    v.split(',').map(|s| f(s.trim(), k, o)).collect()
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Typed access to the last value of each key.
struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn get(&self, k: &str) -> Option<(&str, &Origin)> {
        self.raw.last(k)
    }

    fn f64(&self, k: &str) -> Result<Option<(f64, &Origin)>, ConfigError> {
        self.get(k).map(|(v, o)| parse_f64(v, k, o).map(|x| (x, o))).transpose()
    }

    fn u64(&self, k: &str) -> Result<Option<(u64, &Origin)>, ConfigError> {
        self.get(k).map(|(v, o)| parse_u64(v, k, o).map(|x| (x, o))).transpose()
    }

    fn usize_in(&self, k: &str, lo: u64, hi: u64, default: usize) -> Result<usize, ConfigError> {
        match self.u64(k)? {
            None => Ok(default),
            Some((x, o)) if x < lo || x > hi => {
                Err(err(Some(o), Some(k), format!("must lie in [{lo}, {hi}], got {x}")))
            }
            Some((x, _)) => Ok(x as usize),
        }
    }

    fn f64_list(&self, k: &str) -> Result<Option<(Vec<f64>, &Origin)>, ConfigError> {
        self.get(k).map(|(v, o)| parse_list(v, k, o, parse_f64).map(|x| (x, o))).transpose()
    }
}

impl ExperimentConfig {
    /// Validate `raw` and fill in per-experiment defaults.
    pub fn resolve(raw: &RawConfig) -> Result<Self, ConfigError> {
        let r = Reader { raw };
        let experiment = match r.get("experiment") {
            None => return Err(err(None, Some("experiment"), "no experiment given")),
            Some((v, o)) => Experiment::from_name(v).ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                err(Some(o), Some("experiment"), format!("unknown experiment `{v}` (expected one of {})", names.join(", ")))
            })?,
        };
        use Experiment as E;

        let q = match r.get("Q") {
            Some((v, o)) => {
                let q = parse_list(v, "Q", o, parse_u64)?;
                if q.iter().any(|&x| x < 3) {
                    return Err(err(Some(o), Some("Q"), "every Q must be at least 3"));
                }
                if q.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err(Some(o), Some("Q"), "Q values must be strictly increasing"));
                }
                let cap = match experiment {
                    E::Estermann => gblab::arithfun::estermann::ESTERMANN_MAX_Q,
                    E::Modsym => 100_000,
                    _ => 10_000_000,
                };
                if let Some(x) = q.iter().find(|&&x| x > cap) {
                    return Err(err(Some(o), Some("Q"), format!("{x} exceeds the limit {cap} for {experiment}")));
                }
                q
            }
            None => match experiment {
                E::DedekindCauchy | E::Clt => vec![10_000],
                E::Moments => vec![1_000, 10_000],
                E::Estermann => vec![50, 100, 200, 400],
                E::Modsym => vec![2_000],
                E::S0VsI | E::OscintTable | E::Spectrum => Vec::new(),
            },
        };

        let lambda = match r.f64("lambda")? {
            Some((x, o)) if x <= 0.0 => return Err(err(Some(o), Some("lambda"), "must be positive")),
            Some((x, _)) => Some(x),
            None => None,
        };

        let kind_entry = r.get("kind");
        let (kinds, default_kind): (&[&str], Option<&str>) = match experiment {
            E::Clt => (&["x", "floor_power"], Some("x")),
            E::OscintTable => (&["floor1x", "dedekind", "largemom", "estermann", "taylor"], Some("floor1x")),
            _ => (&[], None),
        };
        let kind = match kind_entry {
            Some((v, o)) => {
                if kinds.is_empty() {
                    return Err(err(Some(o), Some("kind"), format!("not used by {experiment}")));
                }
                if !kinds.contains(&v) {
                    return Err(err(Some(o), Some("kind"), format!("`{v}` is not one of {}", kinds.join(", "))));
                }
                Some(v.to_string())
            }
            None => default_kind.map(str::to_string),
        };

        let lambda = match (experiment, kind.as_deref(), lambda) {
            (E::Moments, _, None) => Some(1.0),
            (E::Clt, Some("floor_power"), None) => Some(0.25),
            (E::OscintTable, Some("largemom"), None) => Some(0.5),
            (_, _, l) => l,
        };
        if let (E::Clt, Some("floor_power"), Some(l)) = (experiment, kind.as_deref(), lambda) {
            if l >= 0.5 {
                let o = r.get("lambda").map(|e| e.1);
                return Err(err(o, Some("lambda"), "the CLT needs lambda < 1/2"));
            }
        }
        if let (E::OscintTable, Some("largemom"), Some(l)) = (experiment, kind.as_deref(), lambda) {
            if l < 0.5 || l == 1.0 {
                let o = r.get("lambda").map(|e| e.1);
                return Err(err(o, Some("lambda"), "largemom needs lambda >= 1/2 and lambda != 1"));
            }
        }

        let alpha = match (r.f64("alpha")?, kind.as_deref()) {
            (Some((x, o)), _) if !(x > 0.0 && x <= 3.0) => {
                return Err(err(Some(o), Some("alpha"), "must lie in (0, 3]"))
            }
            (Some((x, _)), _) => Some(x),
            (None, Some("taylor")) => Some(3.0),
            (None, _) => None,
        };

        let t = match r.f64_list("t")? {
            Some((v, o)) => {
                if v.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                    return Err(err(Some(o), Some("t"), "frequencies must lie in (0, 1)"));
                }
                v
            }
            None if experiment == E::S0VsI => vec![0.01, 0.02, 0.04, 0.08],
            None => Vec::new(),
        };
        let t_min = r.f64("t_min")?.map(|e| e.0).unwrap_or(1e-4);
        let t_max = r.f64("t_max")?.map(|e| e.0).unwrap_or(1e-1);
        if !(t_min > 0.0 && t_min < t_max && t_max < 1.0) {
            let o = r.get("t_min").or(r.get("t_max")).map(|e| e.1);
            return Err(err(o, Some("t_min"), "need 0 < t_min < t_max < 1"));
        }
        let points = r.usize_in("points", 3, 1000, 13)?;

        let tau = match r.f64_list("tau")? {
            Some((v, _)) => v,
            None if experiment == E::Spectrum => vec![0.5, 1.0, 5.0],
            None => Vec::new(),
        };
        let n = r.usize_in("n", 8, 256, 32)?;

        let bins = r.usize_in("bins", 1, 1_000_000, 80)?;
        let (dlo, dhi) = match (experiment, lambda) {
            (E::DedekindCauchy, _) => (-10.0, 10.0),
            (E::Moments, Some(l)) if l == 1.0 => (-5.0, 15.0),
            (E::Moments, Some(l)) if l > 0.5 => (-2.0, 20.0),
            (E::Modsym, _) => (0.0, 4.0),
            _ => (-4.0, 4.0),
        };
        let lo = r.f64("lo")?.map(|e| e.0).unwrap_or(dlo);
        let hi = r.f64("hi")?.map(|e| e.0).unwrap_or(dhi);
        if !(lo < hi) {
            let o = r.get("lo").or(r.get("hi")).map(|e| e.1);
            return Err(err(o, Some("lo"), format!("need lo < hi, got {lo} and {hi}")));
        }
        let reservoir = r.usize_in("reservoir", 0, 100_000_000, 200_000)?;
        let seed = r.u64("seed")?.map(|e| e.0).unwrap_or(0x5eed);
        let workers = r.usize_in("workers", 1, 1024, 1)?;

        let method = match (r.get("method"), experiment) {
            (Some((v, o)), E::Modsym) => {
                if v != "unfolding" && v != "birkhoff" {
                    return Err(err(Some(o), Some("method"), format!("`{v}` is not one of unfolding, birkhoff")));
                }
                Some(v.to_string())
            }
            (Some((_, o)), _) => return Err(err(Some(o), Some("method"), format!("not used by {experiment}"))),
            (None, E::Modsym) => Some("unfolding".to_string()),
            (None, _) => None,
        };
        let checks = r.usize_in("checks", 0, 10_000, 20)?;
        let ks_max = match r.f64("ks_max")? {
            Some((x, o)) if !(x > 0.0 && x <= 1.0) => {
                return Err(err(Some(o), Some("ks_max"), "must lie in (0, 1]"))
            }
            Some((x, _)) => Some(x),
            None => None,
        };
        let out = match r.get("out") {
            Some(("", o)) => return Err(err(Some(o), Some("out"), "empty path")),
            Some((v, _)) => PathBuf::from(v),
            None => PathBuf::from(format!("gblab-out/{experiment}")),
        };

        if reservoir == 0 && matches!(experiment, E::DedekindCauchy | E::Moments | E::Clt | E::Modsym) {
            let o = r.get("reservoir").map(|e| e.1);
            return Err(err(o, Some("reservoir"), "KS distances need a positive reservoir"));
        }

        Ok(ExperimentConfig {
            experiment,
            q,
            lambda,
            kind,
            alpha,
            t,
            t_min,
            t_max,
            points,
            tau,
            n,
            bins,
            lo,
            hi,
            reservoir,
            seed,
            workers,
            method,
            checks,
            ks_max,
            out,
        })
    }

    /// Resolve a configuration for `experiment` from `key=value` pairs.
    pub fn from_pairs(experiment: Experiment, pairs: &[(&str, &str)]) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::new();
        raw.set("experiment", experiment.name(), Origin::Argument(0));
        for (i, (k, v)) in pairs.iter().enumerate() {
            raw.push_arg(&format!("{k}={v}"), i + 1)?;
        }
        Self::resolve(&raw)
    }

    /// Every field as ordered `key → value` text.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.name().into());
        if !self.q.is_empty() {
            put("Q", join(&self.q));
        }
        if let Some(l) = self.lambda {
            put("lambda", l.to_string());
        }
        if let Some(k) = &self.kind {
            put("kind", k.clone());
        }
        if let Some(a) = self.alpha {
            put("alpha", a.to_string());
        }
        if !self.t.is_empty() {
            put("t", join(&self.t));
        }
        put("t_min", self.t_min.to_string());
        put("t_max", self.t_max.to_string());
        put("points", self.points.to_string());
        if !self.tau.is_empty() {
            put("tau", join(&self.tau));
        }
        put("n", self.n.to_string());
        put("bins", self.bins.to_string());
        put("lo", self.lo.to_string());
        put("hi", self.hi.to_string());
        put("reservoir", self.reservoir.to_string());
        put("seed", self.seed.to_string());
        put("workers", self.workers.to_string());
        if let Some(m) = &self.method {
            put("method", m.clone());
        }
        put("checks", self.checks.to_string());
        if let Some(k) = self.ks_max {
            put("ks_max", k.to_string());
        }
        put("out", self.out.display().to_string());
        m
    }

    /// File form, one `key=value` per line.
    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Histogram edges over `[lo, hi]`.
    pub fn bin_edges(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.bins as f64;
        (0..=self.bins).map(|i| self.lo + w * i as f64).collect()
    }
}

/// Split `moments(0.5)` / `clt(log)` into the experiment name and the
/// implied `lambda` or `kind` entry.
pub fn split_experiment_spec(spec: &str) -> (String, Option<(&'static str, String)>) {
    if let Some((name, rest)) = spec.split_once('(') {
        if let Some(arg) = rest.strip_suffix(')') {
            let key = if name == "moments" { "lambda" } else { "kind" };
            return (name.to_string(), Some((key, arg.trim().to_string())));
        }
    }
    (spec.to_string(), None)
}
