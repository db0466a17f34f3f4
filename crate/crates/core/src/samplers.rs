//! Exact samplers built on the atom-augmented kernel.
//!
//! [`atom_mixture_sample`] draws from the stationary law of the augmented
//! chain by regeneration: a `Geometric(β)` number of steps started at the
//! atom, where each step either regenerates (returns to the atom) or moves by
//! the remainder kernel. The other samplers are thin wrappers around it.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::accounting::p_accept_worst_case;
use crate::domain::{LossSpec, State};
use crate::error::{Error, Result};
use crate::factory::{inverted_coin, linear_factory, slack_for};
use crate::kernels::{AtomHitProb, AtomKernel, Proposal};

/// Default cap on outer runs in [`conf_atom_perfect`].
pub const DEFAULT_OUTER_CAP: u64 = 1_000_000;

/// Work counters for one or more sampler runs.
///
/// `n_prop` counts every unit of proposal work and always equals
/// `n_outer + n_inner + n_bern`: one per outer step, one per remainder
/// attempt (padding dummies included), one per coin flip or auxiliary
/// proposal used to select the regeneration indicator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub n_outer: u64,
    pub n_inner: u64,
    pub n_bern: u64,
    pub n_nonatomic: u64,
    pub n_prop: u64,
    /// Padding dummies (already included in `n_inner`).
    pub n_pad: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_notes: Option<String>,
    /// Per-invocation remainder counts (padded when padding is on), recorded
    /// only when enabled with [`RunStats::with_inner_log`].
    #[serde(skip)]
    pub inner_log: Option<Vec<u64>>,
}

impl RunStats {
    pub fn with_inner_log() -> Self {
        Self {
            inner_log: Some(Vec::new()),
            ..Self::default()
        }
    }

    /// Sums counters of independent runs (logs are concatenated).
    pub fn merge(&mut self, other: &RunStats) {
        self.n_outer += other.n_outer;
        self.n_inner += other.n_inner;
        self.n_bern += other.n_bern;
        self.n_nonatomic += other.n_nonatomic;
        self.n_prop += other.n_prop;
        self.n_pad += other.n_pad;
        if let (Some(a), Some(b)) = (self.inner_log.as_mut(), other.inner_log.as_ref()) {
            a.extend_from_slice(b);
        }
    }

    pub fn accounting_holds(&self) -> bool {
        self.n_prop == self.n_outer + self.n_inner + self.n_bern
    }
}

/// How the regeneration indicator `Z_m` is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionPath {
    /// Closed-form `p(y)` off the atom; at the atom, `Bernoulli((1−w)/(1−β))`
    /// times a single leave-the-atom acceptance trial.
    Direct,
    /// Linear Bernoulli factory fed by the simulable atom-hit coin.
    Factory,
}

/// Runtime padding of the remainder loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaddingSpec {
    /// Data-independent lower bound on the per-attempt success probability.
    pub p_pad: f64,
    pub enabled: bool,
}

impl PaddingSpec {
    pub fn new(p_pad: f64) -> Result<Self> {
        if !(p_pad > 0.0 && p_pad <= 1.0) {
            return Err(Error::domain("padding probability must lie in (0, 1]"));
        }
        Ok(Self { p_pad, enabled: true })
    }

    /// Data-independent padding for the mean family on `[0,1]^d`.
    ///
    /// Off the atom the remainder succeeds with probability at least `1 − w`.
    /// From the atom it succeeds with probability `(1 − w)·∫ min{q, h/c}`,
    /// `c = w_a(1 − w)/w`, which is at least `(1 − w)·∫ q·h / (max{1, c}·max{1, sup q})`;
    /// the last integral is bounded below over all `x̄` by its value at a corner.
    pub fn certified_mean(
        n: usize,
        epsilon: f64,
        d: usize,
        proposal: &Proposal,
        atom_weight: f64,
        atom_prob: f64,
    ) -> Result<Self> {
        let c = atom_weight * (1.0 - atom_prob) / atom_prob;
        let q_max = match proposal {
            Proposal::LaplaceWalk { rate } => (rate / 2.0).powi(d as i32),
            _ => 1.0,
        };
        let corner = 2.0 * p_accept_worst_case(n, epsilon, d, proposal)?;
        Self::new((1.0 - atom_prob) * corner / (c.max(1.0) * q_max.max(1.0)))
    }

    pub fn disabled() -> Self {
        Self {
            p_pad: 1.0,
            enabled: false,
        }
    }
}

/// Tuning knobs shared by the samplers.
#[derive(Clone, Copy, Debug)]
pub struct SamplerOptions {
    pub path: SelectionPath,
    /// `β_alg / β_cert`; must be `< 1` on the factory path.
    pub beta_fraction: f64,
    pub outer_cap: u64,
    pub padding: Option<PaddingSpec>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            path: SelectionPath::Direct,
            beta_fraction: 1.0,
            outer_cap: DEFAULT_OUTER_CAP,
            padding: None,
        }
    }
}

impl SamplerOptions {
    pub fn factory() -> Self {
        Self {
            path: SelectionPath::Factory,
            beta_fraction: 0.95,
            ..Self::default()
        }
    }

    pub fn beta_alg(&self, kernel: &AtomKernel) -> f64 {
        kernel.beta() * self.beta_fraction
    }
}

/// One draw from the augmented stationary law: either the atom or a point
/// whose conditional law is `f_X`.
pub fn atom_mixture_sample<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    beta_alg: f64,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<State> {
    let opts = SamplerOptions {
        beta_fraction: beta_alg / kernel.beta(),
        ..SamplerOptions::default()
    };
    mixture_run(kernel, &opts, rng, stats)
}

/// As [`atom_mixture_sample`] with explicit options.
pub fn atom_mixture_sample_with<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    opts: &SamplerOptions,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<State> {
    mixture_run(kernel, opts, rng, stats)
}

fn mixture_run<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    opts: &SamplerOptions,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<State> {
    let beta_cert = kernel.beta();
    let beta = opts.beta_alg(kernel);
    if !(beta > 0.0 && beta <= beta_cert) {
        return Err(Error::domain(format!(
            "beta_alg = {beta} must lie in (0, beta_cert = {beta_cert}]"
        )));
    }
    let slack = match opts.path {
        SelectionPath::Factory => Some(slack_for(beta_cert, beta)?),
        SelectionPath::Direct => None,
    };
    // support {1, 2, ...}
    let steps = if beta >= 1.0 {
        1
    } else {
        Geometric::new(beta)
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(rng)
            .saturating_add(1)
    };
    stats.n_outer += steps;
    stats.n_prop += steps;

    let mut state = State::Atom;
    for _ in 1..steps {
        let leave = match slack {
            Some(slack) => {
                let mut coin = inverted_coin(kernel.hit_coin(&state));
                linear_factory(&mut coin, 1.0 / (1.0 - beta), slack, rng, stats)?
            }
            None => direct_selection(kernel, &state, beta, rng, stats),
        };
        state = if leave {
            State::Point(remainder(kernel, &state, opts.padding.as_ref(), rng, stats)?)
        } else {
            State::Atom
        };
    }
    Ok(state)
}

/// `Bernoulli((1 − p(state))/(1 − β))` without a factory.
fn direct_selection<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    state: &State,
    beta: f64,
    rng: &mut R,
    stats: &mut RunStats,
) -> bool {
    match kernel.atom_transition_prob(state) {
        AtomHitProb::Exact(p) => {
            let target = ((1.0 - p) / (1.0 - beta)).min(1.0);
            rng.random::<f64>() < target
        }
        AtomHitProb::AtLeast(_) => {
            // at the atom 1 − p = (1 − w)·A and β ≤ w, so the target factors
            // into a known probability times one acceptance trial
            let w = kernel.atom_prob();
            if rng.random::<f64>() >= (1.0 - w) / (1.0 - beta) {
                return false;
            }
            stats.n_bern += 1;
            stats.n_prop += 1;
            kernel.leave_atom_trial(rng)
        }
    }
}

fn remainder<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    state: &State,
    padding: Option<&PaddingSpec>,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<Vec<f64>> {
    let padding = padding.filter(|p| p.enabled);
    let success = match padding {
        Some(pad) => {
            let s = kernel.remainder_success_prob(state).ok_or_else(|| {
                Error::Certification(
                    "remainder success probability has no closed form for this kernel; padding cannot be certified"
                        .into(),
                )
            })?;
            if pad.p_pad > s * (1.0 + 1e-12) {
                return Err(Error::Certification(format!(
                    "p_pad = {} exceeds the per-attempt success probability {s}",
                    pad.p_pad
                )));
            }
            Some((pad.p_pad, s))
        }
        None => None,
    };
    let (y, attempts) = kernel.remainder_attempts(state, rng)?;
    let mut count = attempts;
    if let Some((p_pad, s)) = success {
        // thinning: T = N + (1 − Z)·W is Geometric(p_pad) when
        // N ~ Geometric(s), Z ~ Bernoulli(p_pad/s), W ~ Geometric(p_pad)
        if rng.random::<f64>() >= (p_pad / s).min(1.0) {
            let wait = Geometric::new(p_pad)
                .map_err(|e| Error::domain(e.to_string()))?
                .sample(rng)
                .saturating_add(1);
            for _ in 0..wait {
                kernel.dummy_proposal(rng);
            }
            stats.n_pad += wait;
            count += wait;
        }
    }
    stats.n_inner += count;
    stats.n_prop += count;
    if let Some(log) = stats.inner_log.as_mut() {
        log.push(count);
    }
    Ok(y)
}

/// Exact draw from `f_X`: repeat the mixture sampler until it leaves the atom.
pub fn conf_atom_perfect<R: Rng + ?Sized>(kernel: &AtomKernel, rng: &mut R, stats: &mut RunStats) -> Result<Vec<f64>> {
    conf_atom_perfect_with(kernel, &SamplerOptions::default(), rng, stats)
}

pub fn conf_atom_perfect_with<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    opts: &SamplerOptions,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<Vec<f64>> {
    for _ in 0..opts.outer_cap {
        stats.n_nonatomic += 1;
        if let State::Point(y) = mixture_run(kernel, opts, rng, stats)? {
            return Ok(y);
        }
    }
    Err(Error::abort(
        "conf_atom_perfect",
        format!("{} outer runs all returned the atom", opts.outer_cap),
    ))
}

/// Exponential mechanism restricted to finitely many test points.
#[derive(Clone, Debug)]
pub struct DiscreteMechanism {
    points: Vec<Vec<f64>>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteMechanism {
    pub fn new(spec: &LossSpec, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("discrete mechanism needs at least one test point"));
        }
        let logw = points
            .iter()
            .map(|y| spec.loss_eval(y).map(|l| -spec.rate() * l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_log_weights(points, &logw))
    }

    /// Uniformly random test points from the output space.
    pub fn random<R: Rng + ?Sized>(spec: &LossSpec, ell: usize, rng: &mut R) -> Result<Self> {
        let points = (0..ell).map(|_| spec.space.sample_uniform(rng)).collect();
        Self::new(spec, points)
    }

    fn from_log_weights(points: Vec<Vec<f64>>, logw: &[f64]) -> Self {
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|v| v / total).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            points,
            probs,
            cumulative,
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        self.cumulative.partition_point(|c| *c <= u).min(self.points.len() - 1)
    }
}

pub fn discrete_mechanism_sample<R: Rng + ?Sized>(mech: &DiscreteMechanism, rng: &mut R) -> Vec<f64> {
    mech.points[mech.sample_index(rng)].clone()
}

/// One mixture draw; an atom outcome is replaced by a discrete-mechanism draw.
pub fn random_atom_perfect<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    mech: &DiscreteMechanism,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<Vec<f64>> {
    random_atom_perfect_with(kernel, mech, &SamplerOptions::default(), rng, stats)
}

pub fn random_atom_perfect_with<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    mech: &DiscreteMechanism,
    opts: &SamplerOptions,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<Vec<f64>> {
    match mixture_run(kernel, opts, rng, stats)? {
        State::Point(y) => Ok(y),
        State::Atom => Ok(discrete_mechanism_sample(mech, rng)),
    }
}

/// [`conf_atom_perfect`] with every remainder loop padded to a
/// `Geometric(p_pad)` number of attempts.
pub fn runtime_private_sample<R: Rng + ?Sized>(
    kernel: &AtomKernel,
    padding: PaddingSpec,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<Vec<f64>> {
    let opts = SamplerOptions {
        padding: Some(padding),
        ..SamplerOptions::default()
    };
    conf_atom_perfect_with(kernel, &opts, rng, stats)
}
