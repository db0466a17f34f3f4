//! Browser bindings for the exact samplers.
//!
//! Build with `wasm-pack build crates/demo --target web --out-dir www/pkg`
//! and serve `crates/demo/www/`.

use atomexact::accounting::{beta_mcmc_lap, beta_mcmc_unif, delta_cost, tv_bound};
use atomexact::experiments::fig2::fig2_replicate;
use atomexact::{conf_atom_perfect, AtomKernel, LossSpec, Proposal, RandomStream, RunStats};
use wasm_bindgen::prelude::*;

fn js_err(e: atomexact::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Density of the one-dimensional mean mechanism on `[0,1]`:
/// `b e^{−b|y−x̄|} / (2 − e^{−b x̄} − e^{−b(1−x̄)})`, `b = εn/2`.
pub fn mean_density(y: f64, xbar: f64, n: usize, epsilon: f64) -> f64 {
    let b = epsilon * n as f64 / 2.0;
    if b < 1e-12 {
        return 1.0;
    }
    let z = 2.0 - (-b * xbar).exp() - (-b * (1.0 - xbar)).exp();
    b * (-b * (y - xbar).abs()).exp() / z
}

/// Histogram of `draws` exact samples for the one-dimensional mean.
///
/// Returns `3·bins` numbers: bin centres, empirical densities, and the
/// analytic density at each centre.
#[wasm_bindgen]
pub fn exact_histogram(
    xbar: f64,
    n: usize,
    epsilon: f64,
    draws: usize,
    bins: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    let bins = bins.max(1);
    let spec = LossSpec::mean(vec![xbar], n, epsilon).map_err(js_err)?;
    let kernel = AtomKernel::new(spec, Proposal::UniformIndependent).map_err(js_err)?;
    let mut rng = RandomStream::new(seed, 0);
    let mut stats = RunStats::default();
    let mut counts = vec![0usize; bins];
    for _ in 0..draws {
        let y = conf_atom_perfect(&kernel, &mut rng, &mut stats).map_err(js_err)?[0];
        counts[((y * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let width = 1.0 / bins as f64;
    let centres: Vec<f64> = (0..bins).map(|i| (i as f64 + 0.5) * width).collect();
    let mut out = centres.clone();
    out.extend(counts.iter().map(|c| *c as f64 / (draws.max(1) as f64 * width)));
    out.extend(centres.iter().map(|y| mean_density(*y, xbar, n, epsilon)));
    Ok(out)
}

/// δ cost of `m`-step MCMC for uniform and Laplace(`alpha`) proposals.
///
/// Returns `3·points` numbers: `m` values, uniform-proposal δ, Laplace δ.
#[wasm_bindgen]
pub fn delta_curves(n: usize, epsilon: f64, d: usize, alpha: f64, m_max: u64, points: usize) -> Vec<f64> {
    let ms = atomexact::experiments::fig1::m_grid(m_max.max(1), points);
    let bu = beta_mcmc_unif(n, epsilon, d.max(1));
    let bl = beta_mcmc_lap(n, epsilon, d.max(1), alpha);
    let mut out: Vec<f64> = ms.iter().map(|m| *m as f64).collect();
    out.extend(ms.iter().map(|m| delta_cost(tv_bound(bu, *m), epsilon)));
    out.extend(ms.iter().map(|m| delta_cost(tv_bound(bl, *m), epsilon)));
    out
}

/// Realised `N_prop` of `reps` exact draws with `x̄ ~ Beta(a, b)` and Laplace
/// proposals of rate `nε/2`.
#[wasm_bindgen]
pub fn nprop_samples(n: usize, epsilon: f64, a: f64, b: f64, reps: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    (0..reps)
        .map(|i| {
            let mut rng = RandomStream::new(seed, i as u64);
            fig2_replicate(n, epsilon, a, b, &mut rng)
                .map(|s| s.n_prop as f64)
                .map_err(js_err)
        })
        .collect()
}
