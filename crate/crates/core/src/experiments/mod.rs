//! Figure experiments, the release command and the audit report.
//!
//! Each `run_figK` writes `figK.csv` and `figK.svg` into the configured
//! output directory. CSV columns:
//!
//! * `fig1.csv`: `proposal,n,epsilon,m,beta,delta`
//! * `fig2.csv`: `beta_case,n,epsilon,replicate,n_prop,n_inner,n_outer,n_nonatomic`
//! * `fig3.csv`: `epsilon,ell,eps_threshold,err_q05`

pub mod config;
pub mod fig1;
pub mod fig2;
pub mod fig3;
pub mod sample;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub use config::{ExperimentConfig, Family, Mechanism, ProposalKind};
pub use fig1::{fig1_plot, fig1_rows, Fig1Row};
pub use fig2::{fig2_medians, fig2_plot, fig2_rows, Fig2Row};
pub use fig3::{continuous_exceedance, discrete_exceedance, fig3_plot, fig3_rows, generate_ridge, Fig3Row};
pub use sample::{audit_lines, run_audit, run_sample, AuditLine};

/// `f(0), …, f(len − 1)` in index order, in parallel when the `parallel`
/// feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send>(len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send>(len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..len).map(f).collect()
}

/// Linear-interpolation sample quantile (sorts `v` in place).
pub fn quantile(v: &mut [f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn outputs(cfg: &ExperimentConfig, stem: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(&cfg.out)?;
    Ok((cfg.out.join(format!("{stem}.csv")), cfg.out.join(format!("{stem}.svg"))))
}

/// Writes `fig1.csv` and `fig1.svg`; returns their paths.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, svg_path) = outputs(cfg, "fig1")?;
    let rows = fig1_rows(cfg);
    write_csv(&csv_path, &rows)?;
    fs::write(&svg_path, fig1_plot(&rows).render())?;
    Ok((csv_path, svg_path))
}

pub fn run_fig2(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, svg_path) = outputs(cfg, "fig2")?;
    let rows = fig2_rows(cfg)?;
    write_csv(&csv_path, &rows)?;
    fs::write(&svg_path, fig2_plot(&rows).render())?;
    Ok((csv_path, svg_path))
}

pub fn run_fig3(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, svg_path) = outputs(cfg, "fig3")?;
    let rows = fig3_rows(cfg)?;
    write_csv(&csv_path, &rows)?;
    fs::write(&svg_path, fig3_plot(&rows).render())?;
    Ok((csv_path, svg_path))
}
