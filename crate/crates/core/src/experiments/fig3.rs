//! Utility of the `ℓ`-point discrete exponential mechanism for ridge
//! regression: lower 5% quantile over synthetic datasets of the exact
//! exceedance probability `P(L_X(Y) ≥ ε̃)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::svg::{Plot, Series};
use super::{par_map, quantile};
use crate::domain::{LossSpec, RidgeData};
use crate::error::{Error, Result};
use crate::kernels::{AtomKernel, Proposal};
use crate::rng::RandomStream;
use crate::samplers::{conf_atom_perfect, DiscreteMechanism, RunStats};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    pub epsilon: f64,
    pub ell: usize,
    pub eps_threshold: f64,
    pub err_q05: f64,
}

/// Synthetic ridge data: `X_ij ~ Beta(5,5)`, `e_i ~ Beta(20,20)`,
/// `Z_i = X_i·coef + 2e_i − 1`, clamped to `[−1, 1]`.
pub fn generate_ridge<R: Rng + ?Sized>(
    n: usize,
    coef: &[f64],
    lambda: f64,
    radius: f64,
    rng: &mut R,
) -> Result<RidgeData> {
    let p = coef.len();
    let bx = Beta::new(5.0, 5.0).map_err(|e| Error::config(e.to_string()))?;
    let be = Beta::new(20.0, 20.0).map_err(|e| Error::config(e.to_string()))?;
    let x = DMatrix::from_fn(n, p, |_, _| bx.sample(rng));
    let z = DVector::from_fn(n, |i, _| {
        let signal: f64 = (0..p).map(|j| x[(i, j)] * coef[j]).sum();
        (signal + 2.0 * be.sample(rng) - 1.0).clamp(-1.0, 1.0)
    });
    RidgeData::new(x, z, lambda, radius)
}

/// `P(L ≥ t)` under the discrete mechanism, for each threshold.
pub fn discrete_exceedance(spec: &LossSpec, mech: &DiscreteMechanism, thresholds: &[f64]) -> Result<Vec<f64>> {
    let losses = mech
        .points()
        .iter()
        .map(|y| spec.loss_eval(y))
        .collect::<Result<Vec<_>>>()?;
    Ok(thresholds
        .iter()
        .map(|t| {
            losses
                .iter()
                .zip(mech.probabilities())
                .filter(|(l, _)| **l >= *t)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0)
        })
        .collect())
}

/// Fraction of `draws` exact continuous-mechanism samples with `L ≥ t`.
pub fn continuous_exceedance(
    spec: &LossSpec,
    thresholds: &[f64],
    draws: usize,
    rng: &mut RandomStream,
) -> Result<Vec<f64>> {
    let kernel = AtomKernel::new(spec.clone(), Proposal::UniformL1Ball)?;
    let mut stats = RunStats::default();
    let mut hits = vec![0usize; thresholds.len()];
    for _ in 0..draws {
        let y = conf_atom_perfect(&kernel, rng, &mut stats)?;
        let l = spec.loss_eval(&y)?;
        for (h, t) in hits.iter_mut().zip(thresholds) {
            if l >= *t {
                *h += 1;
            }
        }
    }
    Ok(hits.into_iter().map(|h| h as f64 / draws as f64).collect())
}

fn ridge_spec(cfg: &ExperimentConfig, epsilon: f64, rng: &mut RandomStream) -> Result<LossSpec> {
    let data = generate_ridge(cfg.ridge_n, &cfg.ridge_beta, cfg.ridge_lambda, cfg.ridge_radius, rng)?;
    LossSpec::ridge(data, epsilon).map_err(|e| Error::config(format!("ridge setup failed: {e}")))
}

/// Rows in (ε, ℓ, ε̃) order. Replicate `r` draws its dataset from stream
/// `r` and the test points for the `j`-th `ℓ` from stream
/// `n_exp·(j + 1) + r`, so all `ℓ` and `ε` share datasets.
pub fn fig3_rows(cfg: &ExperimentConfig) -> Result<Vec<Fig3Row>> {
    let n_exp = cfg.n_exp;
    // per replicate: [ε][ℓ][threshold]
    let per_rep = par_map(n_exp, |r| -> Result<Vec<Vec<Vec<f64>>>> {
        let mut data_rng = RandomStream::new(cfg.seed, r as u64);
        let base = ridge_spec(cfg, cfg.fig3_epsilon[0], &mut data_rng)?;
        let points: Vec<Vec<Vec<f64>>> = cfg
            .ell
            .iter()
            .enumerate()
            .map(|(j, &ell)| {
                let mut prng = RandomStream::new(cfg.seed, (n_exp * (j + 1) + r) as u64);
                (0..ell).map(|_| base.space.sample_uniform(&mut prng)).collect()
            })
            .collect();
        cfg.fig3_epsilon
            .iter()
            .map(|&eps| {
                let spec = LossSpec {
                    epsilon: eps,
                    ..base.clone()
                };
                points
                    .iter()
                    .map(|pts| {
                        let mech = DiscreteMechanism::new(&spec, pts.clone())?;
                        discrete_exceedance(&spec, &mech, &cfg.thresholds)
                    })
                    .collect()
            })
            .collect()
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (ei, &epsilon) in cfg.fig3_epsilon.iter().enumerate() {
        for (li, &ell) in cfg.ell.iter().enumerate() {
            for (ti, &t) in cfg.thresholds.iter().enumerate() {
                let mut v: Vec<f64> = per_rep.iter().map(|rep| rep[ei][li][ti]).collect();
                rows.push(Fig3Row {
                    epsilon,
                    ell,
                    eps_threshold: t,
                    err_q05: quantile(&mut v, 0.05),
                });
            }
        }
    }
    Ok(rows)
}

pub fn fig3_plot(rows: &[Fig3Row]) -> Plot {
    let mut eps_seen: Vec<u64> = Vec::new();
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        if !eps_seen.contains(&r.epsilon.to_bits()) {
            eps_seen.push(r.epsilon.to_bits());
        }
        let label = format!("eps={} t={}", r.epsilon, r.eps_threshold);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((r.ell as f64, r.err_q05)),
            None => series.push(Series {
                label,
                points: vec![(r.ell as f64, r.err_q05)],
                color: series.len(),
                dashed: eps_seen.len().is_multiple_of(2),
            }),
        }
    }
    Plot {
        title: "5% quantile of P(L >= threshold), discrete mechanism".into(),
        x_label: "number of test points".into(),
        y_label: "err_q05".into(),
        x_log: true,
        series,
        ..Plot::default()
    }
}
