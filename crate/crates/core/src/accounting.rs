//! Closed-form privacy, runtime and utility bounds.
//!
//! Everything here is a pure function of its arguments.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::domain::{Dataset, LossSpec};
use crate::error::{Error, Result};
use crate::kernels::{mh_step, Proposal};

/// `−expm1(−x)/x`, i.e. `(1 − e^{−x})/x`, continuous at 0.
fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Worst-case minorization constant of the independent uniform-proposal
/// chain for the `d`-dimensional mean: `((1 − e^{−b})/b)^d`, `b = εn/(2d)`.
pub fn beta_mcmc_unif(n: usize, epsilon: f64, d: usize) -> f64 {
    let b = epsilon * n as f64 / (2.0 * d as f64);
    one_minus_exp_over(b).powi(d as i32)
}

/// Minorization constant for Laplace random-walk proposals with rate `alpha`:
/// `(2α)^d · exp(−(αd + εn/2)) · ((1 − e^{−α})/α)^d`.
pub fn beta_mcmc_lap(n: usize, epsilon: f64, d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    let log = d * (2.0 * alpha).ln() - (alpha * d + epsilon * n as f64 / 2.0) + d * one_minus_exp_over(alpha).ln();
    log.exp()
}

/// `(1 − β)^m`, the total-variation bound after `m` steps.
pub fn tv_bound(beta: f64, m: u64) -> f64 {
    (m as f64 * (-beta).ln_1p()).exp()
}

/// `α(1 + e^ε)`.
pub fn delta_cost(alpha_tv: f64, epsilon: f64) -> f64 {
    alpha_tv * (1.0 + epsilon.exp())
}

/// Smallest `m` with `(1 − β)^m (1 + e^ε) ≤ δ`.
pub fn steps_for_delta(beta: f64, epsilon: f64, delta_target: f64) -> Result<u64> {
    if !(beta > 0.0) {
        return Err(Error::domain(
            "minorization constant is zero: no chain length reaches the target",
        ));
    }
    if !(delta_target > 0.0) {
        return Err(Error::domain("delta target must be positive"));
    }
    let scale = 1.0 + epsilon.exp();
    if beta >= 1.0 || delta_target >= scale {
        return Ok(if delta_target >= scale { 0 } else { 1 });
    }
    let reached = |m: u64| delta_cost(tv_bound(beta, m), epsilon) <= delta_target;
    let guess = ((delta_target / scale).ln() / (-beta).ln_1p()).ceil().max(0.0);
    if !(guess < 1e18) {
        return Err(Error::domain(format!(
            "minorization constant {beta:e} needs more than 1e18 steps to reach delta = {delta_target:e}"
        )));
    }
    let guess = guess as u64;
    let mut m = guess;
    while m > 0 && reached(m - 1) {
        m -= 1;
    }
    while !reached(m) {
        m += 1;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    UniformProposal,
    LaplaceProposal,
}

/// `(ε, δ)` guarantee of an `m`-step MCMC release.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub epsilon: f64,
    pub delta: f64,
    pub chain_length: u64,
    pub beta: f64,
    pub bound_kind: BoundKind,
    pub worst_case: bool,
}

impl PrivacyReport {
    pub fn new(epsilon: f64, chain_length: u64, beta: f64, bound_kind: BoundKind) -> Self {
        Self {
            epsilon,
            delta: delta_cost(tv_bound(beta, chain_length), epsilon),
            chain_length,
            beta,
            bound_kind,
            worst_case: true,
        }
    }
}

/// Worst-case-over-datasets minorization constant of plain MCMC for a mean
/// loss specification.
pub fn mcmc_beta(spec: &LossSpec, proposal: &Proposal) -> Result<(f64, BoundKind)> {
    let n = match &spec.dataset {
        Dataset::Mean { n, .. } => *n,
        Dataset::Ridge(_) => {
            return Err(Error::config(
                "no closed-form MCMC minorization constant for the ridge family",
            ))
        }
    };
    let d = spec.dim();
    match proposal {
        Proposal::UniformIndependent => Ok((beta_mcmc_unif(n, spec.epsilon, d), BoundKind::UniformProposal)),
        Proposal::LaplaceWalk { rate } => Ok((beta_mcmc_lap(n, spec.epsilon, d, *rate), BoundKind::LaplaceProposal)),
        Proposal::UniformL1Ball => Err(Error::config("L1-ball proposal does not apply to the mean family")),
    }
}

/// Per-dataset lower bound on `inf_y p_Accept(y)` for the mean loss on the
/// unit box, obtained from `min{1, f(y')/f(y)} ≥ h(y')`:
///
/// * uniform: `∏_j (2 − e^{−b x̄_j} − e^{−b(1−x̄_j)})/b`
/// * Laplace(α): `∏_j (α/2)(2 − e^{−c x̄_j} − e^{−c(1−x̄_j)})/c`, `c = b + α`
///
/// with `b = εn/(2d)`.
pub fn p_accept_lower_example1(xbar: &[f64], n: usize, epsilon: f64, proposal: &Proposal) -> Result<f64> {
    let d = xbar.len();
    if d == 0 || xbar.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::domain("xbar must be a non-empty point of [0,1]^d"));
    }
    let b = epsilon * n as f64 / (2.0 * d as f64);
    let side = |c: f64, x: f64| x * one_minus_exp_over(c * x) + (1.0 - x) * one_minus_exp_over(c * (1.0 - x));
    match proposal {
        Proposal::UniformIndependent => Ok(xbar.iter().map(|x| side(b, *x)).product()),
        Proposal::LaplaceWalk { rate } => Ok(xbar.iter().map(|x| 0.5 * rate * side(b + rate, *x)).product()),
        Proposal::UniformL1Ball => Err(Error::domain("L1-ball proposal does not apply to the mean family")),
    }
}

/// `½ · inf_{x̄} p_accept_lower_example1`. Each factor is minimised at a
/// corner `x̄_j ∈ {0, 1}`, so the origin attains the infimum.
pub fn p_accept_worst_case(n: usize, epsilon: f64, d: usize, proposal: &Proposal) -> Result<f64> {
    Ok(0.5 * p_accept_lower_example1(&vec![0.0; d], n, epsilon, proposal)?)
}

/// `48 / (k²(1−k)² · inf p_Accept)`.
pub fn expected_nprop_bound(k: f64, inf_p_accept: f64) -> f64 {
    48.0 / (k * k * (1.0 - k) * (1.0 - k) * inf_p_accept)
}

/// `48 / (k²(1−k) · inf p_Accept)`, the bound without the non-atomic retries.
pub fn expected_nprop_bound_random_atom(k: f64, inf_p_accept: f64) -> f64 {
    48.0 / (k * k * (1.0 - k) * inf_p_accept)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UtilityBound {
    pub threshold: f64,
    pub continuous: f64,
    pub discrete: f64,
    pub bound: f64,
}

/// Upper bound on `P(L_X(Y) ≥ threshold)` for the mixture of the continuous
/// and `ell`-point discrete mechanisms:
///
/// `(1−k)/set_measure · e^{−ε·t/(4Δ_L)} + k · e^{−(ε/(2Δ_L))(t − (2Δ_L/ε) ln ℓ)}`.
///
/// `set_measure` is the normalised base measure of the level set at `t/2`;
/// pass [`mean_bad_set_measure`] for `{L ≥ t/2}` or [`mean_good_set_measure`]
/// for `{L ≤ t/2}` (the classical single-mechanism form). A zero measure
/// yields an infinite continuous term.
pub fn utility_bound_mixture(
    epsilon: f64,
    delta_l: f64,
    k: f64,
    ell: f64,
    threshold: f64,
    set_measure: f64,
) -> UtilityBound {
    let continuous = if k >= 1.0 {
        0.0
    } else if set_measure <= 0.0 {
        f64::INFINITY
    } else {
        (1.0 - k) / set_measure * (-epsilon * threshold / (4.0 * delta_l)).exp()
    };
    let discrete = if k <= 0.0 {
        0.0
    } else {
        k * (-(epsilon / (2.0 * delta_l)) * (threshold - (2.0 * delta_l / epsilon) * ell.ln())).exp()
    };
    UtilityBound {
        threshold,
        continuous,
        discrete,
        bound: continuous + discrete,
    }
}

/// Volume of `{y ∈ [0,1]^d : ‖y − c‖₁ ≤ t}`, exact by orthant decomposition
/// and inclusion–exclusion over the box faces.
pub fn l1_ball_box_volume(center: &[f64], t: f64) -> f64 {
    let d = center.len();
    if t <= 0.0 {
        return 0.0;
    }
    let fact: f64 = (1..=d).map(|j| j as f64).product();
    let mut total = 0.0;
    for orthant in 0..(1u64 << d) {
        let extents: Vec<f64> = center
            .iter()
            .enumerate()
            .map(|(j, c)| if orthant >> j & 1 == 1 { 1.0 - c } else { *c })
            .collect();
        if extents.iter().any(|e| *e <= 0.0) {
            continue;
        }
        let mut vol = 0.0;
        for subset in 0..(1u64 << d) {
            let cut: f64 = (0..d).filter(|j| subset >> j & 1 == 1).map(|j| extents[j]).sum();
            let r = t - cut;
            if r > 0.0 {
                let sign = if subset.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                vol += sign * r.powi(d as i32);
            }
        }
        total += vol / fact;
    }
    total.clamp(0.0, 1.0)
}

/// `ν{y : ‖y − x̄‖₁ ≥ t}` under the uniform probability on `[0,1]^d`.
pub fn mean_bad_set_measure(xbar: &[f64], t: f64) -> f64 {
    1.0 - l1_ball_box_volume(xbar, t)
}

/// `ν{y : ‖y − x̄‖₁ ≤ t}` under the uniform probability on `[0,1]^d`.
pub fn mean_good_set_measure(xbar: &[f64], t: f64) -> f64 {
    l1_ball_box_volume(xbar, t)
}

/// Monte Carlo estimate of the normalised measure of `{L ≥ t}` (or `{L ≤ t}`
/// when `above` is false) for any loss family.
pub fn mc_set_measure<R: Rng + ?Sized>(spec: &LossSpec, t: f64, above: bool, samples: usize, rng: &mut R) -> f64 {
    let hits = (0..samples)
        .filter(|_| {
            let y = spec.space.sample_uniform(rng);
            let l = spec.loss_unchecked(&y);
            if above {
                l >= t
            } else {
                l <= t
            }
        })
        .count();
    hits as f64 / samples as f64
}

/// Monte Carlo acceptance estimate. This is an estimate, not a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcceptEstimate {
    pub trials: u64,
    pub accepted: u64,
    pub estimate: f64,
    /// One-sided 99% Clopper–Pearson lower confidence bound.
    pub lower_99: f64,
}

/// Estimates `p_Accept(y)` of plain MH from state `y` by simulation.
pub fn p_accept_estimate<R: Rng + ?Sized>(
    spec: &LossSpec,
    proposal: &Proposal,
    y: &[f64],
    trials: u64,
    rng: &mut R,
) -> Result<AcceptEstimate> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let accepted = (0..trials).filter(|_| mh_step(spec, proposal, y, rng) != y).count() as u64;
    Ok(AcceptEstimate {
        trials,
        accepted,
        estimate: accepted as f64 / trials as f64,
        lower_99: clopper_pearson_lower(accepted, trials, 0.01),
    })
}

fn clopper_pearson_lower(successes: u64, trials: u64, alpha: f64) -> f64 {
    if successes == 0 {
        return 0.0;
    }
    Beta::new(successes as f64, (trials - successes + 1) as f64)
        .map(|b| b.inverse_cdf(alpha))
        .unwrap_or(0.0)
}
