//! Symmetric proposals, the plain Metropolis–Hastings baseline and the
//! atom-augmented kernel.
//!
//! The augmented chain lives on the output space plus one extra state, the
//! atom, located at `spec.atom`. Its unnormalised target is `h(y) =
//! exp(log_target(y))` on the space (w.r.t. Lebesgue measure) and `w_a` on
//! the atom (w.r.t. counting measure). Each step proposes the atom with
//! probability `w_prop` and otherwise draws from the continuous proposal
//! centred at the current location, so the Metropolis–Hastings ratios are:
//!
//! | move            | acceptance                                   |
//! |-----------------|----------------------------------------------|
//! | `y → y'`        | `min{1, h(y')/h(y)}`                         |
//! | `y → atom`      | `min{1, w_a·ρ·q(a,y)/h(y)}`                  |
//! | `atom → y'`     | `min{1, h(y')/(w_a·ρ·q(a,y'))}`              |
//! | `atom → atom`   | `1`                                          |
//!
//! with `ρ = (1 − w_prop)/w_prop` (`ρ = 1` at the default `w_prop = 1/2`).

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::domain::{l1_distance, Dataset, LossSpec, OutputSpace, State};
use crate::error::{Error, Result};
use crate::factory::Coin;
use crate::samplers::RunStats;

/// Default cap on rejection attempts in one remainder draw.
pub const DEFAULT_INNER_CAP: u64 = 1_000_000_000;

/// Symmetric proposal distributions.
#[derive(Clone, Debug, PartialEq)]
pub enum Proposal {
    /// Independent uniform draws over the whole (box or ball) space.
    UniformIndependent,
    /// Random walk with product-Laplace increments, density
    /// `(rate/2)^d · exp(−rate·‖y − y'‖₁)`.
    LaplaceWalk { rate: f64 },
    /// Independent uniform draws over an L1-ball space.
    UniformL1Ball,
}

impl Proposal {
    pub fn validate(&self, space: &OutputSpace) -> Result<()> {
        match (self, space) {
            (Proposal::LaplaceWalk { rate }, _) if !(*rate > 0.0) || !rate.is_finite() => {
                Err(Error::domain("Laplace proposal rate must be finite and > 0"))
            }
            (Proposal::UniformL1Ball, OutputSpace::Box { .. }) => {
                Err(Error::domain("UniformL1Ball proposal requires an L1-ball space"))
            }
            _ => Ok(()),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, space: &OutputSpace, from: &[f64], rng: &mut R) -> Vec<f64> {
        match self {
            Proposal::UniformIndependent | Proposal::UniformL1Ball => space.sample_uniform(rng),
            Proposal::LaplaceWalk { rate } => {
                let exp = Exp::new(*rate).expect("validated rate");
                from.iter()
                    .map(|x| {
                        let e: f64 = exp.sample(rng);
                        if rng.random::<bool>() {
                            x + e
                        } else {
                            x - e
                        }
                    })
                    .collect()
            }
        }
    }

    /// `log q(from, to)` for `to` inside the space.
    pub fn log_density(&self, space: &OutputSpace, from: &[f64], to: &[f64]) -> f64 {
        match self {
            Proposal::UniformIndependent | Proposal::UniformL1Ball => -space.volume().ln(),
            Proposal::LaplaceWalk { rate } => from.len() as f64 * (rate / 2.0).ln() - rate * l1_distance(from, to),
        }
    }
}

/// One plain Metropolis–Hastings transition targeting `exp(log_target)`.
/// Out-of-space proposals are rejections.
pub fn mh_step<R: Rng + ?Sized>(spec: &LossSpec, proposal: &Proposal, y: &[f64], rng: &mut R) -> Vec<f64> {
    let cand = proposal.draw(&spec.space, y, rng);
    let log_ratio = spec.log_target(&cand) - spec.log_target(y);
    if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
        cand
    } else {
        y.to_vec()
    }
}

/// Atom-hit probability `p(y)`, exact off the atom and a certified lower
/// bound at the atom (where it involves an acceptance integral).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomHitProb {
    Exact(f64),
    AtLeast(f64),
}

impl AtomHitProb {
    pub fn value(self) -> f64 {
        match self {
            AtomHitProb::Exact(p) | AtomHitProb::AtLeast(p) => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelStep {
    pub next: State,
    pub proposed_atom: bool,
    pub accepted: bool,
}

/// Endpoint of a move, described by the quantities the acceptance needs.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Site {
    Atom,
    /// `log_h` is the log target, `log_q_atom` is `log q(a, y)`.
    Point {
        log_h: f64,
        log_q_atom: f64,
    },
}

/// Acceptance probability of the augmented chain; `log_wa_rho = ln(w_a·ρ)`.
pub(crate) fn accept_prob(from: Site, to: Site, log_wa_rho: f64) -> f64 {
    let log_r = match (from, to) {
        (Site::Atom, Site::Atom) => return 1.0,
        (_, Site::Point { log_h, .. }) if log_h == f64::NEG_INFINITY => return 0.0,
        (Site::Point { log_h: a, .. }, Site::Point { log_h: b, .. }) => b - a,
        (Site::Point { log_h, log_q_atom }, Site::Atom) => log_wa_rho + log_q_atom - log_h,
        (Site::Atom, Site::Point { log_h, log_q_atom }) => log_h - log_wa_rho - log_q_atom,
    };
    if log_r >= 0.0 {
        1.0
    } else {
        log_r.exp()
    }
}

/// The atom-augmented Metropolis–Hastings kernel with a certified
/// minorization constant `beta ≤ inf_y p(y)`.
#[derive(Clone, Debug)]
pub struct AtomKernel {
    spec: LossSpec,
    proposal: Proposal,
    atom_prob: f64,
    beta: f64,
    inner_cap: u64,
}

impl AtomKernel {
    pub fn new(spec: LossSpec, proposal: Proposal) -> Result<Self> {
        proposal.validate(&spec.space)?;
        if !spec.space.contains(&spec.atom) {
            return Err(Error::domain("atom must lie inside the output space"));
        }
        let mut kernel = Self {
            spec,
            proposal,
            atom_prob: 0.5,
            beta: 0.0,
            inner_cap: DEFAULT_INNER_CAP,
        };
        kernel.beta = kernel.certify_beta();
        Ok(kernel)
    }

    pub fn with_atom_prob(mut self, w_prop: f64) -> Result<Self> {
        if !(w_prop > 0.0 && w_prop < 1.0) {
            return Err(Error::domain("atom proposal probability must lie in (0, 1)"));
        }
        self.atom_prob = w_prop;
        self.beta = self.certify_beta();
        Ok(self)
    }

    pub fn with_inner_cap(mut self, cap: u64) -> Self {
        self.inner_cap = cap;
        self
    }

    pub fn spec(&self) -> &LossSpec {
        &self.spec
    }

    pub fn proposal(&self) -> &Proposal {
        &self.proposal
    }

    pub fn atom_prob(&self) -> f64 {
        self.atom_prob
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn log_wa_rho(&self) -> f64 {
        self.spec.atom_weight.ln() + ((1.0 - self.atom_prob) / self.atom_prob).ln()
    }

    fn point_site(&self, y: &[f64]) -> Site {
        let log_h = self.spec.log_target(y);
        let log_q_atom = if log_h == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.proposal.log_density(&self.spec.space, &self.spec.atom, y)
        };
        Site::Point { log_h, log_q_atom }
    }

    /// Closed-form lower bound on `inf_y q(a,y)/h(y)`.
    fn inf_atom_ratio(&self) -> f64 {
        let space = &self.spec.space;
        match &self.proposal {
            // h ≤ 1 because the loss is non-negative
            Proposal::UniformIndependent | Proposal::UniformL1Ball => 1.0 / space.volume(),
            Proposal::LaplaceWalk { rate } => {
                let d = space.dim() as f64;
                let base = (rate / 2.0).powf(d);
                match (&self.spec.dataset, space) {
                    // q(a,y)/h(y) = (α/2)^d exp((b − α)‖y − a‖₁) when the loss is ‖y − a‖₁
                    (Dataset::Mean { xbar, .. }, OutputSpace::Box { lo, hi }) if *xbar == self.spec.atom => {
                        let reach: f64 = xbar
                            .iter()
                            .zip(lo.iter().zip(hi))
                            .map(|(a, (l, h))| (a - l).max(h - a))
                            .sum();
                        base * ((self.spec.rate() - rate) * reach).exp().min(1.0)
                    }
                    _ => base * (-rate * space.l1_diameter()).exp(),
                }
            }
        }
    }

    fn certify_beta(&self) -> f64 {
        let w = self.atom_prob;
        let rho = (1.0 - w) / w;
        w * (self.spec.atom_weight * rho * self.inf_atom_ratio()).min(1.0)
    }

    /// Probability that one step from `state` lands on the atom.
    pub fn atom_transition_prob(&self, state: &State) -> AtomHitProb {
        match state {
            State::Atom => AtomHitProb::AtLeast(self.atom_prob),
            State::Point(y) => {
                let a = accept_prob(self.point_site(y), Site::Atom, self.log_wa_rho());
                AtomHitProb::Exact(self.atom_prob * a)
            }
        }
    }

    /// One transition of the augmented chain.
    pub fn atom_step<R: Rng + ?Sized>(&self, state: &State, rng: &mut R) -> KernelStep {
        let from_site = match state {
            State::Atom => Site::Atom,
            State::Point(y) => self.point_site(y),
        };
        if rng.random::<f64>() < self.atom_prob {
            let a = accept_prob(from_site, Site::Atom, self.log_wa_rho());
            let accepted = a >= 1.0 || rng.random::<f64>() < a;
            let next = if accepted { State::Atom } else { state.clone() };
            return KernelStep {
                next,
                proposed_atom: true,
                accepted,
            };
        }
        let from_loc = match state {
            State::Atom => &self.spec.atom,
            State::Point(y) => y,
        };
        let cand = self.proposal.draw(&self.spec.space, from_loc, rng);
        let a = accept_prob(from_site, self.point_site(&cand), self.log_wa_rho());
        let accepted = a >= 1.0 || (a > 0.0 && rng.random::<f64>() < a);
        let next = if accepted { State::Point(cand) } else { state.clone() };
        KernelStep {
            next,
            proposed_atom: false,
            accepted,
        }
    }

    /// Draws a continuous proposal from the atom and flips its acceptance:
    /// a `Bernoulli(A)` coin where `A` is the continuous acceptance
    /// probability from the atom. Used for exact selection at the atom.
    pub(crate) fn leave_atom_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let cand = self.proposal.draw(&self.spec.space, &self.spec.atom, rng);
        let a = accept_prob(Site::Atom, self.point_site(&cand), self.log_wa_rho());
        a >= 1.0 || (a > 0.0 && rng.random::<f64>() < a)
    }

    /// Consumes the randomness of one proposal without using it.
    pub(crate) fn dummy_proposal<R: Rng + ?Sized>(&self, rng: &mut R) {
        let _ = self.proposal.draw(&self.spec.space, &self.spec.atom, rng);
        let _ = rng.random::<f64>();
    }

    /// Per-attempt success probability `1 − p(state)` of the remainder
    /// rejection loop, when it is available in closed form.
    pub fn remainder_success_prob(&self, state: &State) -> Option<f64> {
        match state {
            State::Point(_) => Some(1.0 - self.atom_transition_prob(state).value()),
            State::Atom => self.leave_atom_prob().map(|a| (1.0 - self.atom_prob) * a),
        }
    }

    /// Continuous acceptance probability from the atom, in closed form for
    /// the mean family (any `d` when the acceptance never saturates under
    /// the uniform proposal, and `d = 1` otherwise).
    pub fn leave_atom_prob(&self) -> Option<f64> {
        let (xbar, lo, hi) = match (&self.spec.dataset, &self.spec.space) {
            (Dataset::Mean { xbar, .. }, OutputSpace::Box { lo, hi }) if *xbar == self.spec.atom => (xbar, lo, hi),
            _ => return None,
        };
        let b = self.spec.rate();
        let inv_wa_rho = (-self.log_wa_rho()).exp();
        match &self.proposal {
            Proposal::UniformIndependent => {
                let vol = self.spec.space.volume();
                // q·min{1, h/(w_a ρ q)} = min{1/vol, h/(w_a ρ)}
                if vol * inv_wa_rho <= 1.0 {
                    let mass: f64 = xbar
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(a, (l, h))| int_exp(1.0, b, 0.0, a - l) + int_exp(1.0, b, 0.0, h - a))
                        .product();
                    Some(inv_wa_rho * mass)
                } else if xbar.len() == 1 {
                    let (a, l, h) = (xbar[0], lo[0], hi[0]);
                    let u = 1.0 / vol;
                    Some(int_min_exp(u, 0.0, inv_wa_rho, b, a - l) + int_min_exp(u, 0.0, inv_wa_rho, b, h - a))
                } else {
                    None
                }
            }
            Proposal::LaplaceWalk { rate } if xbar.len() == 1 => {
                let (a, l, h) = (xbar[0], lo[0], hi[0]);
                let u = rate / 2.0;
                Some(int_min_exp(u, *rate, inv_wa_rho, b, a - l) + int_min_exp(u, *rate, inv_wa_rho, b, h - a))
            }
            _ => None,
        }
    }

    /// Rejection sampler for the remainder kernel; returns the draw and the
    /// number of attempts.
    pub(crate) fn remainder_attempts<R: Rng + ?Sized>(&self, state: &State, rng: &mut R) -> Result<(Vec<f64>, u64)> {
        let mut attempts = 0u64;
        loop {
            if attempts >= self.inner_cap {
                return Err(Error::abort(
                    "remainder_step",
                    format!("{attempts} rejections without leaving the atom; beta or kernel is degenerate"),
                ));
            }
            attempts += 1;
            if let State::Point(y) = self.atom_step(state, rng).next {
                return Ok((y, attempts));
            }
        }
    }

    /// Exact draw from the one-step law conditioned on not hitting the atom.
    pub fn remainder_step<R: Rng + ?Sized>(
        &self,
        state: &State,
        rng: &mut R,
        stats: &mut RunStats,
    ) -> Result<Vec<f64>> {
        let (y, attempts) = self.remainder_attempts(state, rng)?;
        stats.n_inner += attempts;
        stats.n_prop += attempts;
        Ok(y)
    }

    /// The simulable `p(state)`-coin: one kernel step, success when it
    /// lands on the atom.
    pub fn hit_coin<'a>(&'a self, state: &'a State) -> AtomHitCoin<'a> {
        AtomHitCoin { kernel: self, state }
    }
}

pub struct AtomHitCoin<'a> {
    kernel: &'a AtomKernel,
    state: &'a State,
}

impl Coin for AtomHitCoin<'_> {
    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.kernel.atom_step(self.state, rng).next.is_atom()
    }
}

/// `∫_s^e coef·exp(−rate·t) dt`.
fn int_exp(coef: f64, rate: f64, s: f64, e: f64) -> f64 {
    if e <= s {
        return 0.0;
    }
    if rate.abs() < 1e-300 {
        return coef * (e - s);
    }
    // e^{−rs}(1 − e^{−r(e−s)})/r, stable for small r
    coef * (-rate * s).exp() * -(-rate * (e - s)).exp_m1() / rate
}

/// `∫_0^len min{u·e^{−α t}, v·e^{−b t}} dt` for `u, v > 0`.
fn int_min_exp(u: f64, alpha: f64, v: f64, b: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    // g(t) = ln(u/v) + (b − α)t is positive where the v-branch is smaller
    let g0 = (u / v).ln();
    let slope = b - alpha;
    let cross = if slope != 0.0 { -g0 / slope } else { f64::INFINITY };
    let first_is_u = if g0 != 0.0 { g0 < 0.0 } else { slope < 0.0 };
    let piece = |use_u: bool, s: f64, e: f64| {
        if use_u {
            int_exp(u, alpha, s, e)
        } else {
            int_exp(v, b, s, e)
        }
    };
    if cross > 0.0 && cross < len {
        piece(first_is_u, 0.0, cross) + piece(!first_is_u, cross, len)
    } else {
        piece(first_is_u, 0.0, len)
    }
}
