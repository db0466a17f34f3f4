//! The `sample` and `audit` commands.

use std::io::Write;

use serde::Serialize;

use super::config::{ExperimentConfig, Family, Mechanism, ProposalKind};
use crate::accounting::{beta_mcmc_lap, beta_mcmc_unif, mcmc_beta, steps_for_delta, BoundKind, PrivacyReport};
use crate::domain::{Dataset, LossSpec, RidgeData};
use crate::error::{Error, Result};
use crate::kernels::{mh_step, AtomKernel, Proposal};
use crate::rng::RandomStream;
use crate::samplers::{
    conf_atom_perfect_with, random_atom_perfect_with, DiscreteMechanism, PaddingSpec, RunStats, SamplerOptions,
};

/// Loss specification for the `sample` command.
pub fn sample_spec(cfg: &ExperimentConfig) -> Result<LossSpec> {
    let spec = match cfg.family {
        Family::Mean => {
            let xbar = match &cfg.dataset {
                Some(path) => match Dataset::mean_from_csv(path, cfg.sample_n)? {
                    Dataset::Mean { xbar, .. } => xbar,
                    Dataset::Ridge(_) => unreachable!(),
                },
                None => cfg.xbar.clone(),
            };
            LossSpec::mean(xbar, cfg.sample_n, cfg.sample_epsilon)
        }
        Family::Ridge => {
            let path = cfg
                .dataset
                .as_ref()
                .ok_or_else(|| Error::config("family = ridge needs dataset = <csv>"))?;
            let data = RidgeData::from_csv(path, cfg.ridge_lambda, cfg.ridge_radius)?;
            LossSpec::ridge(data, cfg.sample_epsilon)
        }
    };
    spec.and_then(|s| s.with_atom_weight(cfg.w_a)).map_err(|e| match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    })
}

pub fn sample_proposal(cfg: &ExperimentConfig) -> Proposal {
    match (cfg.proposal, cfg.family) {
        (ProposalKind::Auto, Family::Mean) | (ProposalKind::Uniform, _) => Proposal::UniformIndependent,
        (ProposalKind::Auto, Family::Ridge) | (ProposalKind::L1Ball, _) => Proposal::UniformL1Ball,
        (ProposalKind::Laplace, _) => Proposal::LaplaceWalk { rate: cfg.rate },
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

fn format_point(y: &[f64]) -> String {
    y.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Releases one value. Prints the value, then a `RunStats` JSON line with
/// `--stats`, then a `PrivacyReport` JSON line in MCMC mode.
pub fn run_sample(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let spec = sample_spec(cfg)?;
    let proposal = sample_proposal(cfg);
    let mut rng = RandomStream::new(cfg.seed, 0);
    let mut stats = RunStats::default();

    if cfg.mechanism == Mechanism::Mcmc {
        let (beta, kind) = mcmc_beta(&spec, &proposal)?;
        let steps = match cfg.steps {
            Some(m) => m,
            None => steps_for_delta(beta, spec.epsilon, 1.0 / cfg.sample_n as f64).map_err(as_config)?,
        };
        proposal.validate(&spec.space).map_err(as_config)?;
        let mut y = spec.space.center();
        for _ in 0..steps {
            y = mh_step(&spec, &proposal, &y, &mut rng);
        }
        stats.n_outer = steps;
        stats.n_prop = steps;
        writeln!(out, "{}", format_point(&y))?;
        if cfg.stats {
            writeln!(out, "{}", serde_json::to_string(&stats)?)?;
        }
        writeln!(
            out,
            "{}",
            serde_json::to_string(&PrivacyReport::new(spec.epsilon, steps, beta, kind))?
        )?;
        return Ok(());
    }

    let d = spec.dim();
    let kernel = AtomKernel::new(spec, proposal.clone())
        .and_then(|k| k.with_atom_prob(cfg.w_prop))
        .map_err(as_config)?;
    let mut opts = if cfg.factory {
        SamplerOptions::factory()
    } else {
        SamplerOptions::default()
    };
    if cfg.pad || cfg.mechanism == Mechanism::RuntimePrivate {
        let n = match &kernel.spec().dataset {
            Dataset::Mean { n, .. } => *n,
            Dataset::Ridge(_) => return Err(Error::config("padding is certified only for the mean family")),
        };
        let pad = PaddingSpec::certified_mean(n, kernel.spec().epsilon, d, &proposal, cfg.w_a, cfg.w_prop)
            .map_err(as_config)?;
        opts.padding = Some(pad);
    }
    let y = match cfg.mechanism {
        Mechanism::ConfAtom | Mechanism::RuntimePrivate => {
            conf_atom_perfect_with(&kernel, &opts, &mut rng, &mut stats)?
        }
        Mechanism::RandomAtom => {
            let mech = DiscreteMechanism::random(kernel.spec(), cfg.test_points, &mut rng)?;
            random_atom_perfect_with(&kernel, &mech, &opts, &mut rng, &mut stats)?
        }
        Mechanism::Mcmc => unreachable!(),
    };
    writeln!(out, "{}", format_point(&y))?;
    if cfg.stats {
        writeln!(out, "{}", serde_json::to_string(&stats)?)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditLine {
    pub n: usize,
    pub d: usize,
    pub proposal: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub delta_target: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub report: Option<PrivacyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One `PrivacyReport` per grid cell and proposal; the chain length is
/// `steps` when set, else the shortest chain with `δ ≤ 1/n`.
pub fn audit_lines(cfg: &ExperimentConfig) -> Vec<AuditLine> {
    let mut lines = Vec::new();
    let mut proposals: Vec<(&'static str, Option<f64>)> = vec![("uniform", None)];
    proposals.extend(cfg.alpha.iter().map(|a| ("laplace", Some(*a))));
    for (name, rate) in proposals {
        for &n in &cfg.n {
            for &eps in &cfg.epsilon {
                let (beta, kind) = match rate {
                    None => (beta_mcmc_unif(n, eps, cfg.d), BoundKind::UniformProposal),
                    Some(a) => (beta_mcmc_lap(n, eps, cfg.d, a), BoundKind::LaplaceProposal),
                };
                let delta_target = 1.0 / n as f64;
                let steps = match cfg.steps {
                    Some(m) => Ok(m),
                    None => steps_for_delta(beta, eps, delta_target),
                };
                let (report, note) = match steps {
                    Ok(m) => (Some(PrivacyReport::new(eps, m, beta, kind)), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                lines.push(AuditLine {
                    n,
                    d: cfg.d,
                    proposal: name,
                    rate,
                    delta_target,
                    report,
                    note,
                });
            }
        }
    }
    lines
}

pub fn run_audit(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    for line in audit_lines(cfg) {
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(cfg: &ExperimentConfig) -> Result<String> {
        let mut buf = Vec::new();
        run_sample(cfg, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn same_seed_same_bytes() {
        for mechanism in [
            Mechanism::ConfAtom,
            Mechanism::RandomAtom,
            Mechanism::RuntimePrivate,
            Mechanism::Mcmc,
        ] {
            let cfg = ExperimentConfig {
                mechanism,
                stats: true,
                ..ExperimentConfig::default()
            };
            assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        }
    }

    #[test]
    fn default_output_is_value_only() {
        let cfg = ExperimentConfig::default();
        let text = run(&cfg).unwrap();
        assert_eq!(text.lines().count(), 1);
        let v: f64 = text.trim().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn mcmc_reports_delta_below_one_over_n() {
        let cfg = ExperimentConfig {
            mechanism: Mechanism::Mcmc,
            ..ExperimentConfig::default()
        };
        let text = run(&cfg).unwrap();
        let report: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert!(report["delta"].as_f64().unwrap() <= 1.0 / cfg.sample_n as f64);
        assert!(report["chain_length"].as_u64().unwrap() >= 1);
    }

    #[test]
    fn ridge_without_dataset_is_config_error() {
        let cfg = ExperimentConfig {
            family: Family::Ridge,
            ..ExperimentConfig::default()
        };
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn audit_covers_grid() {
        let cfg = ExperimentConfig::default();
        let lines = audit_lines(&cfg);
        assert_eq!(lines.len(), 2 * 3 * 3);
        for l in &lines {
            if let Some(r) = &l.report {
                assert!(r.delta <= l.delta_target);
            }
        }
    }
}
