//! Exact sampling for the exponential mechanism via artificial atoms.
//!
//! The exponential mechanism releases `y` with density proportional to
//! `exp(−ε L_X(y) / (2Δ_L))`. Approximate MCMC implementations pay an extra
//! `δ` for their finite run length; the samplers here instead augment the
//! target with a point mass at a minimiser of the loss, run a regenerative
//! perfect sampler on the augmented chain, and release exact draws.
//!
//! * [`domain`]: output spaces, datasets, losses.
//! * [`kernels`]: proposals, plain Metropolis–Hastings, the atom-augmented kernel.
//! * [`factory`]: a linear Bernoulli factory for the regeneration indicator.
//! * [`samplers`]: mixture, confidential-atom, random-atom and runtime-padded samplers.
//! * [`accounting`]: minorization constants, `δ` costs, runtime and utility bounds.
//! * [`experiments`]: figure-style experiments, config, CSV and SVG output.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod factory;
pub mod kernels;
pub mod rng;
pub mod samplers;

pub use domain::{Dataset, LossSpec, OutputSpace, RidgeData, State};
pub use error::{Error, Result};
pub use kernels::{AtomKernel, Proposal};
pub use rng::RandomStream;
pub use samplers::{
    atom_mixture_sample, conf_atom_perfect, discrete_mechanism_sample, random_atom_perfect, runtime_private_sample,
    DiscreteMechanism, PaddingSpec, RunStats, SamplerOptions, SelectionPath,
};
