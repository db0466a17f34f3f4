//! Linear Bernoulli factory.
//!
//! Given flips of a coin with unknown success probability `q`, produce an
//! exact `Bernoulli(C·q)` draw for a known scale `C ≥ 1`, provided the caller
//! guarantees `C·q ≤ 1 − slack`.
//!
//! Construction. Let `r = C·q` and `ℓ = r/(1 + r)`. A `Bernoulli(ℓ)` draw is
//! cheap: with probability `C/(1+C)` flip the coin and stop on heads,
//! otherwise stop with tails; repeat while the coin came up tails. A walk on
//! the integers that steps down with probability `ℓ` and up otherwise hits 0
//! from `i` with probability `(ℓ/(1−ℓ))^i = r^i`, so running it from 1 yields
//! `Bernoulli(r)`. The walk is stopped at a ceiling `k`; from there the
//! remaining success probability `r^k` is split as `γ^k · (r/γ)^k` with
//! `γ = 1 − θ·slack`, the first factor drawn directly and the second by
//! recursing with the larger scale `C/γ` and slack `(1 − θ)·slack/γ`.
//! With `k = ⌈5/slack⌉` and `θ = 0.15` the flip count has finite variance.

use rand::Rng;

use crate::error::{Error, Result};
use crate::samplers::RunStats;

/// Default flip budget of a single factory call.
pub const DEFAULT_FLIP_CAP: u64 = 100_000_000;

/// A coin with unknown success probability.
pub trait Coin {
    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool;
}

/// A coin with known success probability, for testing and plumbing.
#[derive(Clone, Copy, Debug)]
pub struct FixedCoin(pub f64);

impl Coin for FixedCoin {
    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.0
    }
}

/// The complement coin: success probability `1 − p`.
pub struct Inverted<C>(pub C);

impl<C: Coin> Coin for Inverted<C> {
    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        !self.0.flip(rng)
    }
}

pub fn inverted_coin<C: Coin>(coin: C) -> Inverted<C> {
    Inverted(coin)
}

/// Slack available when the regeneration indicator is selected with `beta_alg` below the
/// certified constant `beta_cert`: the factory target `(1−p)/(1−beta_alg)` is
/// then at most `(1−beta_cert)/(1−beta_alg) = 1 − slack`.
pub fn slack_for(beta_cert: f64, beta_alg: f64) -> Result<f64> {
    if !(beta_alg > 0.0 && beta_alg < beta_cert && beta_cert <= 1.0) {
        return Err(Error::domain(format!(
            "factory needs 0 < beta_alg < beta_cert (got beta_alg = {beta_alg}, beta_cert = {beta_cert})"
        )));
    }
    Ok(1.0 - (1.0 - beta_cert) / (1.0 - beta_alg))
}

/// Ceiling multiplier: the walk stops at `ceil(CEILING / slack)`.
const CEILING: f64 = 5.0;
/// Fraction of the slack spent on each rescaling.
const SPLIT: f64 = 0.15;

struct FlipCounter<'a, C> {
    coin: &'a mut C,
    flips: u64,
    cap: u64,
}

impl<C: Coin> FlipCounter<'_, C> {
    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        if self.flips >= self.cap {
            return Err(Error::abort(
                "linear_factory",
                format!("flip budget of {} exhausted; slack is likely violated", self.cap),
            ));
        }
        self.flips += 1;
        Ok(self.coin.flip(rng))
    }

    /// `Bernoulli(Cq/(1 + Cq))`.
    fn logistic<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) -> Result<bool> {
        let go = scale / (1.0 + scale);
        loop {
            if !rng.random_bool(go) {
                return Ok(false);
            }
            if self.flip(rng)? {
                return Ok(true);
            }
        }
    }

    /// `Bernoulli((Cq)^start)`.
    fn power<R: Rng + ?Sized>(&mut self, mut scale: f64, mut slack: f64, start: u64, rng: &mut R) -> Result<bool> {
        let mut i = start;
        loop {
            let ceiling = ((CEILING / slack).ceil() as u64).max(i + 1);
            while i > 0 && i < ceiling {
                if self.logistic(scale, rng)? {
                    i -= 1;
                } else {
                    i += 1;
                }
            }
            if i == 0 {
                return Ok(true);
            }
            let shrink = 1.0 - SPLIT * slack;
            if rng.random::<f64>() >= shrink.powf(i as f64) {
                return Ok(false);
            }
            scale /= shrink;
            slack = (1.0 - SPLIT) * slack / shrink;
        }
    }
}

/// Exact `Bernoulli(scale · q)` from a `q`-coin, given `scale·q ≤ 1 − slack`.
/// Coin flips are added to `stats.n_bern` and `stats.n_prop`.
pub fn linear_factory<C: Coin, R: Rng + ?Sized>(
    coin: &mut C,
    scale: f64,
    slack: f64,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<bool> {
    linear_factory_capped(coin, scale, slack, DEFAULT_FLIP_CAP, rng, stats)
}

pub fn linear_factory_capped<C: Coin, R: Rng + ?Sized>(
    coin: &mut C,
    scale: f64,
    slack: f64,
    cap: u64,
    rng: &mut R,
    stats: &mut RunStats,
) -> Result<bool> {
    if !(scale >= 1.0) || !scale.is_finite() {
        return Err(Error::domain("factory scale must be finite and >= 1"));
    }
    if !(slack > 0.0 && slack < 1.0) {
        return Err(Error::domain("factory slack must lie in (0, 1)"));
    }
    let mut counter = FlipCounter { coin, flips: 0, cap };
    let out = counter.power(scale, slack, 1, rng);
    stats.n_bern += counter.flips;
    stats.n_prop += counter.flips;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn certain_coin_never_fires() {
        let mut rng = RandomStream::new(1, 0);
        let mut stats = RunStats::default();
        let mut coin = inverted_coin(FixedCoin(1.0));
        for _ in 0..1000 {
            assert!(!linear_factory(&mut coin, 2.0, 0.5, &mut rng, &mut stats).unwrap());
        }
    }

    #[test]
    fn inverted_coin_examples() {
        let mut rng = RandomStream::new(2, 0);
        let mut one = inverted_coin(FixedCoin(1.0));
        let mut zero = inverted_coin(FixedCoin(0.0));
        assert!((0..100).all(|_| !one.flip(&mut rng)));
        assert!((0..100).all(|_| zero.flip(&mut rng)));
        let mut c = inverted_coin(FixedCoin(0.3));
        let n = 100_000;
        let k = (0..n).filter(|_| c.flip(&mut rng)).count() as f64 / n as f64;
        assert!((k - 0.7).abs() < 3.0 * (0.21f64 / n as f64).sqrt());
    }

    #[test]
    fn boundary_configuration_rejected() {
        assert!(slack_for(0.5, 0.5).is_err());
        assert!(slack_for(0.5, 0.6).is_err());
        let s = slack_for(0.5, 0.475).unwrap();
        assert!((s - (1.0 - 0.5 / 0.525)).abs() < 1e-15);
        let mut rng = RandomStream::new(3, 0);
        let mut stats = RunStats::default();
        assert!(linear_factory(&mut FixedCoin(0.1), 0.5, 0.1, &mut rng, &mut stats).is_err());
        assert!(linear_factory(&mut FixedCoin(0.1), 2.0, 0.0, &mut rng, &mut stats).is_err());
    }

    #[test]
    fn mean_matches_target() {
        // p = 0.75, beta_alg = 0.5: target (1 − p)/(1 − beta) = 0.5
        let mut rng = RandomStream::new(4, 0);
        let mut stats = RunStats::default();
        let mut coin = inverted_coin(FixedCoin(0.75));
        let n = 100_000;
        let slack = 0.5;
        let ones = (0..n)
            .filter(|_| linear_factory(&mut coin, 2.0, slack, &mut rng, &mut stats).unwrap())
            .count();
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * (0.25f64 / n as f64).sqrt(), "mean {mean}");
        let flips = stats.n_bern as f64 / n as f64;
        assert!(flips <= 12.0 / slack, "flips {flips}");
        assert!(flips <= 24.0);
    }

    #[test]
    fn budget_exhaustion_aborts() {
        let mut rng = RandomStream::new(5, 0);
        let mut stats = RunStats::default();
        let mut coin = FixedCoin(0.45);
        let mut aborted = false;
        for _ in 0..100 {
            if linear_factory_capped(&mut coin, 2.0, 0.1, 1, &mut rng, &mut stats).is_err() {
                aborted = true;
                break;
            }
        }
        assert!(aborted);
    }

    #[test]
    fn reproducible_under_fixed_seed() {
        let run = || {
            let mut rng = RandomStream::new(6, 2);
            let mut stats = RunStats::default();
            let mut coin = FixedCoin(0.3);
            let bits: Vec<bool> = (0..500)
                .map(|_| linear_factory(&mut coin, 2.0, 0.3, &mut rng, &mut stats).unwrap())
                .collect();
            (bits, stats.n_bern)
        };
        assert_eq!(run(), run());
    }
}
