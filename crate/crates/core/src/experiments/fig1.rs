//! δ cost of an `m`-step MCMC release as a function of `m`.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::svg::{HLine, Plot, Series};
use crate::accounting::{beta_mcmc_lap, beta_mcmc_unif, delta_cost, tv_bound};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Row {
    pub proposal: String,
    pub n: usize,
    pub epsilon: f64,
    pub m: u64,
    pub beta: f64,
    pub delta: f64,
}

/// About `points` log-spaced integers in `[1, m_max]`, always including both ends.
pub fn m_grid(m_max: u64, points: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..points.max(2))
        .map(|i| {
            let t = i as f64 / (points.max(2) - 1) as f64;
            (m_max as f64).powf(t).round() as u64
        })
        .collect();
    out.push(1);
    out.push(m_max);
    out.sort_unstable();
    out.dedup();
    out
}

fn proposals(cfg: &ExperimentConfig) -> Vec<(String, Option<f64>)> {
    let mut v = vec![("unif".to_string(), None)];
    for a in &cfg.alpha {
        let label = if cfg.alpha.len() == 1 {
            "laplace".to_string()
        } else {
            format!("laplace-a{a}")
        };
        v.push((label, Some(*a)));
    }
    v
}

pub fn fig1_rows(cfg: &ExperimentConfig) -> Vec<Fig1Row> {
    let ms = m_grid(cfg.m_max, cfg.m_points);
    let mut rows = Vec::new();
    for (label, alpha) in proposals(cfg) {
        for &n in &cfg.n {
            for &epsilon in &cfg.epsilon {
                let beta = match alpha {
                    None => beta_mcmc_unif(n, epsilon, cfg.d),
                    Some(a) => beta_mcmc_lap(n, epsilon, cfg.d, a),
                };
                for &m in &ms {
                    rows.push(Fig1Row {
                        proposal: label.clone(),
                        n,
                        epsilon,
                        m,
                        beta,
                        delta: delta_cost(tv_bound(beta, m), epsilon),
                    });
                }
            }
        }
    }
    rows
}

pub fn fig1_plot(rows: &[Fig1Row]) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    let mut keys: Vec<(String, usize, u64)> = Vec::new();
    for r in rows {
        let key = (r.proposal.clone(), r.n, r.epsilon.to_bits());
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                series.push(Series {
                    label: format!("{} n={} eps={}", r.proposal, r.n, r.epsilon),
                    points: Vec::new(),
                    color: 0,
                    dashed: r.proposal != "unif",
                });
                series.len() - 1
            }
        };
        series[idx].points.push((r.m as f64, r.delta));
    }
    for (i, s) in series.iter_mut().enumerate() {
        s.color = i;
    }
    Plot {
        title: "delta cost of m-step MCMC".into(),
        x_label: "chain length m".into(),
        y_label: "delta".into(),
        x_log: true,
        y_log: true,
        series,
        hlines: vec![HLine {
            y: f64::MIN_POSITIVE,
            label: "smallest normal double".into(),
        }],
        ..Plot::default()
    }
}
