//! Flat `key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment; lists are comma separated.
//! Unknown keys are rejected. [`ExperimentConfig::to_text`] emits every key
//! with its current value in the same format.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Mean,
    Ridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mechanism {
    ConfAtom,
    RandomAtom,
    RuntimePrivate,
    Mcmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProposalKind {
    /// Uniform for the mean family, L1-ball uniform for ridge.
    Auto,
    Uniform,
    Laplace,
    L1Ball,
}

macro_rules! keyword_enum {
    ($ty:ty { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(Error::config(format!(
                        "unknown value {s:?}; expected one of: {}",
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
        impl Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Family { "mean" => Family::Mean, "ridge" => Family::Ridge });
keyword_enum!(Mechanism {
    "conf-atom" => Mechanism::ConfAtom,
    "random-atom" => Mechanism::RandomAtom,
    "runtime-private" => Mechanism::RuntimePrivate,
    "mcmc" => Mechanism::Mcmc,
});
keyword_enum!(ProposalKind {
    "auto" => ProposalKind::Auto,
    "uniform" => ProposalKind::Uniform,
    "laplace" => ProposalKind::Laplace,
    "l1ball" => ProposalKind::L1Ball,
});

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,

    // fig1 / fig2 / audit grids
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub d: usize,
    /// Laplace proposal rates for fig1 and audit.
    pub alpha: Vec<f64>,
    pub m_max: u64,
    pub m_points: usize,
    pub replications: usize,

    // fig3
    pub fig3_epsilon: Vec<f64>,
    pub ell: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub n_exp: usize,
    pub ridge_n: usize,
    pub ridge_beta: Vec<f64>,
    pub ridge_lambda: f64,
    pub ridge_radius: f64,

    // sample
    pub family: Family,
    pub dataset: Option<PathBuf>,
    pub xbar: Vec<f64>,
    pub sample_n: usize,
    pub sample_epsilon: f64,
    pub mechanism: Mechanism,
    /// MCMC chain length; `None` picks the shortest chain with `δ ≤ 1/n`.
    pub steps: Option<u64>,
    pub proposal: ProposalKind,
    pub rate: f64,
    pub test_points: usize,
    pub w_a: f64,
    pub w_prop: f64,
    pub factory: bool,
    pub pad: bool,
    pub stats: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("."),
            n: vec![30, 100, 300],
            epsilon: vec![0.01, 0.1, 1.0],
            d: 1,
            alpha: vec![1.0],
            m_max: 10_000,
            m_points: 60,
            replications: 500,
            fig3_epsilon: vec![0.1, 1.0, 10.0],
            ell: vec![4, 16, 64, 256],
            thresholds: vec![20.0, 40.0, 60.0, 80.0, 100.0, 120.0],
            n_exp: 1000,
            ridge_n: 100,
            ridge_beta: vec![0.1, 0.2, -0.3, 0.0, 0.0],
            ridge_lambda: 1.0,
            ridge_radius: 1.0,
            family: Family::Mean,
            dataset: None,
            xbar: vec![0.5],
            sample_n: 100,
            sample_epsilon: 1.0,
            mechanism: Mechanism::ConfAtom,
            steps: None,
            proposal: ProposalKind::Auto,
            rate: 1.0,
            test_points: 16,
            w_a: 1.0,
            w_prop: 0.5,
            factory: false,
            pad: false,
            stats: false,
        }
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {assignment:?} is not key=value")))?;
        self.set(k.trim(), v.trim())?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_one(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "n" => self.n = parse_list(key, v)?,
            "epsilon" => self.epsilon = parse_list(key, v)?,
            "d" => self.d = parse_one(key, v)?,
            "alpha" => self.alpha = parse_list(key, v)?,
            "m_max" => self.m_max = parse_one(key, v)?,
            "m_points" => self.m_points = parse_one(key, v)?,
            "replications" => self.replications = parse_one(key, v)?,
            "fig3_epsilon" => self.fig3_epsilon = parse_list(key, v)?,
            "ell" => self.ell = parse_list(key, v)?,
            "thresholds" => self.thresholds = parse_list(key, v)?,
            "n_exp" => self.n_exp = parse_one(key, v)?,
            "ridge_n" => self.ridge_n = parse_one(key, v)?,
            "ridge_beta" => self.ridge_beta = parse_list(key, v)?,
            "ridge_lambda" => self.ridge_lambda = parse_one(key, v)?,
            "ridge_radius" => self.ridge_radius = parse_one(key, v)?,
            "family" => self.family = v.parse()?,
            "dataset" => self.dataset = (!v.is_empty()).then(|| PathBuf::from(v)),
            "xbar" => self.xbar = parse_list(key, v)?,
            "sample_n" => self.sample_n = parse_one(key, v)?,
            "sample_epsilon" => self.sample_epsilon = parse_one(key, v)?,
            "mechanism" => self.mechanism = v.parse()?,
            "steps" => {
                self.steps = match v {
                    "" | "auto" => None,
                    _ => Some(parse_one(key, v)?),
                }
            }
            "proposal" => self.proposal = v.parse()?,
            "rate" => self.rate = parse_one(key, v)?,
            "test_points" => self.test_points = parse_one(key, v)?,
            "w_a" => self.w_a = parse_one(key, v)?,
            "w_prop" => self.w_prop = parse_one(key, v)?,
            "factory" => self.factory = parse_bool(key, v)?,
            "pad" => self.pad = parse_bool(key, v)?,
            "stats" => self.stats = parse_bool(key, v)?,
            _ => return Err(Error::config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be non-empty with positive entries")))
            }
        };
        positive("n", !self.n.is_empty() && self.n.iter().all(|v| *v > 0))?;
        positive(
            "epsilon",
            !self.epsilon.is_empty() && self.epsilon.iter().all(|v| *v > 0.0),
        )?;
        positive("alpha", !self.alpha.is_empty() && self.alpha.iter().all(|v| *v > 0.0))?;
        positive(
            "fig3_epsilon",
            !self.fig3_epsilon.is_empty() && self.fig3_epsilon.iter().all(|v| *v > 0.0),
        )?;
        positive("ell", !self.ell.is_empty() && self.ell.iter().all(|v| *v > 0))?;
        positive(
            "thresholds",
            !self.thresholds.is_empty() && self.thresholds.iter().all(|v| *v >= 0.0),
        )?;
        positive("xbar", !self.xbar.is_empty())?;
        positive("ridge_beta", !self.ridge_beta.is_empty())?;
        for (name, v) in [
            ("d", self.d),
            ("m_points", self.m_points),
            ("replications", self.replications),
            ("n_exp", self.n_exp),
            ("ridge_n", self.ridge_n),
            ("sample_n", self.sample_n),
            ("test_points", self.test_points),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be >= 1")));
            }
        }
        if self.m_max == 0 {
            return Err(Error::config("m_max must be >= 1"));
        }
        if !(self.sample_epsilon > 0.0) || !(self.rate > 0.0) {
            return Err(Error::config("sample_epsilon and rate must be positive"));
        }
        if !(self.ridge_lambda >= 0.0) || !(self.ridge_radius > 0.0) {
            return Err(Error::config("ridge_lambda must be >= 0 and ridge_radius > 0"));
        }
        if !(self.w_a >= 1.0) || !(self.w_prop > 0.0 && self.w_prop < 1.0) {
            return Err(Error::config("w_a must be >= 1 and w_prop must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Every key with its value, one `key = value` line each.
    pub fn to_text(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let lines: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
            ("n", join(&self.n)),
            ("epsilon", join(&self.epsilon)),
            ("d", self.d.to_string()),
            ("alpha", join(&self.alpha)),
            ("m_max", self.m_max.to_string()),
            ("m_points", self.m_points.to_string()),
            ("replications", self.replications.to_string()),
            ("fig3_epsilon", join(&self.fig3_epsilon)),
            ("ell", join(&self.ell)),
            ("thresholds", join(&self.thresholds)),
            ("n_exp", self.n_exp.to_string()),
            ("ridge_n", self.ridge_n.to_string()),
            ("ridge_beta", join(&self.ridge_beta)),
            ("ridge_lambda", self.ridge_lambda.to_string()),
            ("ridge_radius", self.ridge_radius.to_string()),
            ("family", self.family.to_string()),
            ("dataset", opt(&self.dataset)),
            ("xbar", join(&self.xbar)),
            ("sample_n", self.sample_n.to_string()),
            ("sample_epsilon", self.sample_epsilon.to_string()),
            ("mechanism", self.mechanism.to_string()),
            (
                "steps",
                self.steps.map(|s| s.to_string()).unwrap_or_else(|| "auto".into()),
            ),
            ("proposal", self.proposal.to_string()),
            ("rate", self.rate.to_string()),
            ("test_points", self.test_points.to_string()),
            ("w_a", self.w_a.to_string()),
            ("w_prop", self.w_prop.to_string()),
            ("factory", self.factory.to_string()),
            ("pad", self.pad.to_string()),
            ("stats", self.stats.to_string()),
        ];
        lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
