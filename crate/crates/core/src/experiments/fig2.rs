//! Distribution of realised proposal counts of the exact sampler for the
//! one-dimensional mean with Laplace proposals of rate `α = nε/2`.

use rand_distr::{Beta, Distribution};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::svg::{BoxGlyph, Plot};
use super::{par_map, quantile};
use crate::domain::LossSpec;
use crate::error::{Error, Result};
use crate::kernels::{AtomKernel, Proposal};
use crate::rng::RandomStream;
use crate::samplers::{conf_atom_perfect, RunStats};

/// `(label, a, b)` of the `Beta(a, b)` laws for `x̄`.
pub const BETA_CASES: [(&str, f64, f64); 3] = [
    ("beta(1,1)", 1.0, 1.0),
    ("beta(10,10)", 10.0, 10.0),
    ("beta(0.1,0.1)", 0.1, 0.1),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Row {
    pub beta_case: String,
    pub n: usize,
    pub epsilon: f64,
    pub replicate: usize,
    pub n_prop: u64,
    pub n_inner: u64,
    pub n_outer: u64,
    pub n_nonatomic: u64,
}

struct Task {
    case: usize,
    n: usize,
    epsilon: f64,
    replicate: usize,
}

/// One replicate: `x̄ ~ Beta(a, b)`, then one exact draw.
pub fn fig2_replicate(n: usize, epsilon: f64, a: f64, b: f64, rng: &mut RandomStream) -> Result<RunStats> {
    let xbar = Beta::new(a, b).map_err(|e| Error::config(e.to_string()))?.sample(rng);
    let spec = LossSpec::mean(vec![xbar], n, epsilon)?;
    let kernel = AtomKernel::new(
        spec,
        Proposal::LaplaceWalk {
            rate: n as f64 * epsilon / 2.0,
        },
    )?;
    let mut stats = RunStats::default();
    conf_atom_perfect(&kernel, rng, &mut stats)?;
    Ok(stats)
}

/// Rows in (case, n, ε, replicate) order; replicate `i` of the flattened grid
/// uses stream `i` of the configured seed.
pub fn fig2_rows(cfg: &ExperimentConfig) -> Result<Vec<Fig2Row>> {
    let mut tasks = Vec::new();
    for case in 0..BETA_CASES.len() {
        for &n in &cfg.n {
            for &epsilon in &cfg.epsilon {
                for replicate in 0..cfg.replications {
                    tasks.push(Task {
                        case,
                        n,
                        epsilon,
                        replicate,
                    });
                }
            }
        }
    }
    let results = par_map(tasks.len(), |i| {
        let t = &tasks[i];
        let (_, a, b) = BETA_CASES[t.case];
        let mut rng = RandomStream::new(cfg.seed, i as u64);
        fig2_replicate(t.n, t.epsilon, a, b, &mut rng)
    });
    tasks
        .iter()
        .zip(results)
        .map(|(t, res)| {
            let stats = res.map_err(|e| match e {
                Error::Abort { stage, reason } => Error::Abort {
                    stage,
                    reason: format!(
                        "{reason} (fig2 replicate {} of case {})",
                        t.replicate, BETA_CASES[t.case].0
                    ),
                },
                other => other,
            })?;
            Ok(Fig2Row {
                beta_case: BETA_CASES[t.case].0.to_string(),
                n: t.n,
                epsilon: t.epsilon,
                replicate: t.replicate,
                n_prop: stats.n_prop,
                n_inner: stats.n_inner,
                n_outer: stats.n_outer,
                n_nonatomic: stats.n_nonatomic,
            })
        })
        .collect()
}

/// Median `n_prop` per (case, n, ε) cell, in row order.
pub fn fig2_medians(rows: &[Fig2Row]) -> Vec<(String, usize, f64, f64)> {
    let mut cells: Vec<(String, usize, f64, Vec<f64>)> = Vec::new();
    for r in rows {
        match cells
            .iter_mut()
            .find(|c| c.0 == r.beta_case && c.1 == r.n && c.2 == r.epsilon)
        {
            Some(c) => c.3.push(r.n_prop as f64),
            None => cells.push((r.beta_case.clone(), r.n, r.epsilon, vec![r.n_prop as f64])),
        }
    }
    cells
        .into_iter()
        .map(|(case, n, eps, mut v)| (case, n, eps, quantile(&mut v, 0.5)))
        .collect()
}

pub fn fig2_plot(rows: &[Fig2Row]) -> Plot {
    let mut cells: Vec<(usize, f64)> = Vec::new();
    let mut groups: Vec<(String, usize, f64, Vec<f64>)> = Vec::new();
    for r in rows {
        if !cells.iter().any(|c| c.0 == r.n && c.1 == r.epsilon) {
            cells.push((r.n, r.epsilon));
        }
        match groups
            .iter_mut()
            .find(|g| g.0 == r.beta_case && g.1 == r.n && g.2 == r.epsilon)
        {
            Some(g) => g.3.push(r.n_prop as f64),
            None => groups.push((r.beta_case.clone(), r.n, r.epsilon, vec![r.n_prop as f64])),
        }
    }
    let cases: Vec<&str> = BETA_CASES.iter().map(|c| c.0).collect();
    let boxes = groups
        .into_iter()
        .map(|(case, n, eps, mut v)| {
            let ci = cases.iter().position(|c| *c == case).unwrap_or(0);
            let cell = cells.iter().position(|c| c.0 == n && c.1 == eps).unwrap_or(0);
            BoxGlyph {
                x: cell as f64 + (ci as f64 - 1.0) * 0.25,
                lo: quantile(&mut v, 0.1),
                q1: quantile(&mut v, 0.25),
                median: quantile(&mut v, 0.5),
                q3: quantile(&mut v, 0.75),
                hi: quantile(&mut v, 0.9),
                color: ci,
            }
        })
        .collect();
    let n_cells = cells.len().max(1) as f64;
    Plot {
        title: "realised N_prop (10-25-50-75-90% quantiles)".into(),
        x_label: "(n, epsilon)".into(),
        y_label: "N_prop".into(),
        y_log: true,
        boxes,
        box_half_width: (220.0 / n_cells).min(12.0),
        legend: cases.iter().enumerate().map(|(i, c)| (c.to_string(), i)).collect(),
        x_categories: cells
            .iter()
            .enumerate()
            .map(|(i, (n, e))| (i as f64, format!("{n},{e}")))
            .collect(),
        ..Plot::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_is_reproducible_and_consistent() {
        let cfg = ExperimentConfig {
            n: vec![30],
            epsilon: vec![0.1],
            replications: 20,
            ..ExperimentConfig::default()
        };
        let rows = fig2_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 20);
        assert_eq!(rows, fig2_rows(&cfg).unwrap());
        for r in &rows {
            assert!(r.n_prop >= r.n_outer && r.n_nonatomic >= 1);
        }
        assert_eq!(fig2_medians(&rows).len(), 3);
        assert!(fig2_plot(&rows).render().contains("<rect"));
    }
}
