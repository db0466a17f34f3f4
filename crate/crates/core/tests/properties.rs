mod common;

use atomexact::accounting::{beta_mcmc_lap, beta_mcmc_unif, delta_cost, p_accept_lower_example1, tv_bound};
use atomexact::factory::{linear_factory, FixedCoin};
use atomexact::kernels::mh_step;
use atomexact::{AtomKernel, LossSpec, OutputSpace, Proposal, RandomStream, RidgeData, RunStats, State};
use common::{binom_sigma, chi_square_gof, mh_matrix, stationarity_gap};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_log_target_is_translation_covariant(
        xbar in prop::collection::vec(0.2f64..0.8, 1..4),
        frac in prop::collection::vec(0.0f64..1.0, 4),
        shift in -0.2f64..0.2,
        n in 1usize..500,
        eps in 0.01f64..5.0,
    ) {
        let y: Vec<f64> = xbar.iter().zip(&frac).map(|(_, f)| 0.2 + 0.6 * f).collect();
        let moved_x: Vec<f64> = xbar.iter().map(|v| v + shift).collect();
        let moved_y: Vec<f64> = y.iter().map(|v| v + shift).collect();
        prop_assume!(moved_y.iter().all(|v| (0.0..=1.0).contains(v)));
        let a = LossSpec::mean(xbar, n, eps).unwrap().log_target(&y);
        let b = LossSpec::mean(moved_x, n, eps).unwrap().log_target(&moved_y);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn atom_is_a_mode(
        xbar in prop::collection::vec(0.0f64..=1.0, 1..4),
        y in prop::collection::vec(0.0f64..=1.0, 4),
        n in 1usize..500,
        eps in 0.01f64..5.0,
    ) {
        let d = xbar.len();
        let spec = LossSpec::mean(xbar, n, eps).unwrap();
        prop_assert_eq!(spec.log_target(&spec.atom), 0.0);
        prop_assert!(spec.log_target(&spec.atom) >= spec.log_target(&y[..d]));
    }

    #[test]
    fn out_of_space_scores_minus_infinity(v in 1.0001f64..3.0, n in 1usize..50) {
        let spec = LossSpec::mean(vec![0.5], n, 1.0).unwrap();
        prop_assert_eq!(spec.log_target(&[v]), f64::NEG_INFINITY);
        prop_assert!(spec.loss_eval(&[-v]).is_err());
    }

    #[test]
    fn tv_delta_monotone(beta in 1e-6f64..1.0, eps in 0.01f64..5.0, m in 0u64..100_000, dm in 1u64..1000) {
        let here = delta_cost(tv_bound(beta, m), eps);
        prop_assert!(delta_cost(tv_bound(beta, m + dm), eps) <= here);
        let larger = (beta * 1.5).min(1.0);
        prop_assert!(delta_cost(tv_bound(larger, m), eps) <= here);
    }

    #[test]
    fn bounds_are_pure(n in 1usize..1000, eps in 0.001f64..3.0, d in 1usize..4, alpha in 0.1f64..10.0) {
        prop_assert_eq!(beta_mcmc_unif(n, eps, d).to_bits(), beta_mcmc_unif(n, eps, d).to_bits());
        prop_assert_eq!(beta_mcmc_lap(n, eps, d, alpha).to_bits(), beta_mcmc_lap(n, eps, d, alpha).to_bits());
        let b = beta_mcmc_unif(n, eps, d);
        prop_assert_eq!(tv_bound(b, 77).to_bits(), tv_bound(b, 77).to_bits());
    }

    #[test]
    fn factory_replays_under_fixed_seed(seed in any::<u64>(), p in 0.6f64..0.95) {
        let run = || {
            let mut rng = RandomStream::new(seed, 3);
            let mut stats = RunStats::default();
            let mut coin = FixedCoin(1.0 - p);
            let out: Vec<bool> = (0..50)
                .map(|_| linear_factory(&mut coin, 2.0, p - 0.5, &mut rng, &mut stats).unwrap())
                .collect();
            (out, stats.n_bern)
        };
        prop_assert_eq!(run(), run());
    }
}

/// Loss differences between all adjacent datasets over an enumerable record
/// space never exceed the declared sensitivity.
#[test]
fn mean_sensitivity_enumerated() {
    let records = [0.0, 0.25, 0.5, 1.0];
    let n = 3;
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let mut worst: f64 = 0.0;
    let mut delta_l = 0.0;
    for a in 0..records.len().pow(n as u32) {
        let ds: Vec<f64> = (0..n)
            .map(|i| records[a / records.len().pow(i as u32) % records.len()])
            .collect();
        for pos in 0..n {
            for r in records {
                let mut other = ds.clone();
                other[pos] = r;
                let sx = LossSpec::mean(vec![ds.iter().sum::<f64>() / n as f64], n, 1.0).unwrap();
                let so = LossSpec::mean(vec![other.iter().sum::<f64>() / n as f64], n, 1.0).unwrap();
                delta_l = sx.delta_l;
                for y in &grid {
                    let diff = (sx.loss_eval(&[*y]).unwrap() - so.loss_eval(&[*y]).unwrap()).abs();
                    worst = worst.max(diff);
                }
            }
        }
    }
    assert!(worst <= delta_l + 1e-12, "{worst} > {delta_l}");
    // the bound is attained by moving one record across the whole interval
    assert!((worst - delta_l).abs() < 1e-12);
}

#[test]
fn ridge_sensitivity_enumerated() {
    let vals = [-1.0, 0.0, 1.0];
    let mut records = Vec::new();
    for a in vals {
        for b in vals {
            for z in vals {
                records.push((a, b, z));
            }
        }
    }
    let space = OutputSpace::l1_ball(2, 1.0).unwrap();
    let ball: Vec<Vec<f64>> = (0..=20)
        .flat_map(|i| (0..=20).map(move |j| vec![i as f64 / 10.0 - 1.0, j as f64 / 10.0 - 1.0]))
        .filter(|y| space.contains(y))
        .collect();
    let spec_of = |rows: &[(f64, f64, f64)]| {
        let x = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
        let z = DVector::from_fn(rows.len(), |i, _| rows[i].2);
        LossSpec::ridge(RidgeData::new(x, z, 1.0, 1.0).unwrap(), 1.0).unwrap()
    };
    let mut worst: f64 = 0.0;
    let mut delta_l = 0.0;
    // datasets of two records; adjacency replaces the second one
    for first in &records {
        for second in &records {
            let base = spec_of(&[*first, *second]);
            delta_l = base.delta_l;
            let base_loss: Vec<f64> = ball.iter().map(|y| base.loss_eval(y).unwrap()).collect();
            for other in &records {
                let alt = spec_of(&[*first, *other]);
                for (y, l) in ball.iter().zip(&base_loss) {
                    worst = worst.max((l - alt.loss_eval(y).unwrap()).abs());
                }
            }
        }
    }
    assert_eq!(delta_l, 8.0);
    assert!(worst <= delta_l + 1e-12, "{worst} > {delta_l}");
}

#[test]
fn box_uniform_passes_chi_square() {
    let space = OutputSpace::new_box(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 2.5]).unwrap();
    let mut rng = RandomStream::new(11, 0);
    let draws = 100_000;
    let mut counts = vec![vec![0u64; 10]; 3];
    let (lo, width) = ([0.0, -1.0, 2.0], [1.0, 2.0, 0.5]);
    for _ in 0..draws {
        let y = space.sample_uniform(&mut rng);
        for j in 0..3 {
            let bin = (((y[j] - lo[j]) / width[j]) * 10.0) as usize;
            counts[j][bin.min(9)] += 1;
        }
    }
    for c in &counts {
        let p = chi_square_gof(c, &[0.1; 10]);
        assert!(p > 0.001, "p = {p}");
    }
}

#[test]
fn l1_ball_inner_ball_fraction() {
    let space = OutputSpace::l1_ball(2, 1.0).unwrap();
    let mut rng = RandomStream::new(12, 0);
    let draws = 100_000;
    let mut inside = 0usize;
    for _ in 0..draws {
        let y = space.sample_uniform(&mut rng);
        let norm = y[0].abs() + y[1].abs();
        assert!(norm <= 1.0 + 1e-12);
        inside += (norm <= 0.5) as usize;
    }
    let freq = inside as f64 / draws as f64;
    assert!((freq - 0.25).abs() < 3.0 * binom_sigma(0.25, draws), "{freq}");
}

/// Grid discretisation of the augmented kernel: point masses `h(y_i)·Δ`
/// at 16 grid points plus an atom of mass `w_a`. Proposals: the atom with
/// probability `w`, otherwise grid point `j` with mass `(1 − w) q(y, y_j) Δ`.
fn augmented_grid(kernel: &AtomKernel) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let k = 16;
    let dy = 1.0 / k as f64;
    let grid: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) * dy).collect();
    let spec = kernel.spec();
    let w = kernel.atom_prob();
    let mut target: Vec<f64> = grid.iter().map(|y| spec.log_target(&[*y]).exp() * dy).collect();
    target.push(spec.atom_weight);
    let q = |from: &[f64], to: f64| kernel.proposal().log_density(&spec.space, from, &[to]).exp() * dy;
    let mut prop = vec![vec![0.0; k + 1]; k + 1];
    for i in 0..=k {
        let from: Vec<f64> = if i == k { spec.atom.clone() } else { vec![grid[i]] };
        for j in 0..k {
            if i != j {
                prop[i][j] = (1.0 - w) * q(&from, grid[j]);
            }
        }
        if i != k {
            prop[i][k] = w;
        }
    }
    (grid, prop, target)
}

#[test]
fn augmented_kernel_discretised_stationarity() {
    let cases = [
        (0.5, 100, 0.1, Proposal::UniformIndependent, 0.5, 1.0),
        (0.3, 40, 0.5, Proposal::UniformIndependent, 0.3, 2.0),
        (0.8, 100, 0.1, Proposal::LaplaceWalk { rate: 5.0 }, 0.5, 1.0),
        (0.1, 30, 1.0, Proposal::LaplaceWalk { rate: 2.0 }, 0.7, 3.0),
    ];
    for (xbar, n, eps, proposal, w, w_a) in cases {
        let spec = LossSpec::mean(vec![xbar], n, eps)
            .unwrap()
            .with_atom_weight(w_a)
            .unwrap();
        let kernel = AtomKernel::new(spec, proposal).unwrap().with_atom_prob(w).unwrap();
        let (grid, prop, target) = augmented_grid(&kernel);
        let p = mh_matrix(&prop, &target);
        let total: f64 = target.iter().sum();
        let pi: Vec<f64> = target.iter().map(|t| t / total).collect();
        assert!(stationarity_gap(&p, &pi) < 1e-10);
        // the library's closed-form atom-hit probability is the matrix entry
        for (i, y) in grid.iter().enumerate() {
            let lib = kernel.atom_transition_prob(&State::Point(vec![*y])).value();
            assert!((lib - p[i][grid.len()]).abs() < 1e-12, "{lib} vs {}", p[i][grid.len()]);
        }
    }
}

#[test]
fn plain_mh_discretised_stationarity() {
    let k = 16;
    let dy = 1.0 / k as f64;
    let grid: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) * dy).collect();
    for (xbar, proposal) in [
        (0.5, Proposal::UniformIndependent),
        (0.2, Proposal::LaplaceWalk { rate: 3.0 }),
    ] {
        let spec = LossSpec::mean(vec![xbar], 100, 0.1).unwrap();
        let target: Vec<f64> = grid.iter().map(|y| spec.log_target(&[*y]).exp()).collect();
        let prop: Vec<Vec<f64>> = grid
            .iter()
            .map(|a| {
                grid.iter()
                    .map(|b| proposal.log_density(&spec.space, &[*a], &[*b]).exp() * dy)
                    .collect()
            })
            .collect();
        let p = mh_matrix(&prop, &target);
        let total: f64 = target.iter().sum();
        let pi: Vec<f64> = target.iter().map(|t| t / total).collect();
        assert!(stationarity_gap(&p, &pi) < 1e-10);
    }
}

#[test]
fn atom_step_hit_frequency_matches_closed_form() {
    let spec = LossSpec::mean(vec![0.4], 100, 0.1).unwrap();
    for proposal in [Proposal::UniformIndependent, Proposal::LaplaceWalk { rate: 5.0 }] {
        let kernel = AtomKernel::new(spec.clone(), proposal).unwrap();
        let mut rng = RandomStream::new(21, 0);
        let trials = 100_000;
        for y in [0.0, 0.2, 0.4, 0.7, 1.0] {
            let state = State::Point(vec![y]);
            let p = kernel.atom_transition_prob(&state).value();
            let hits = (0..trials)
                .filter(|_| kernel.atom_step(&state, &mut rng).next.is_atom())
                .count();
            let freq = hits as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= 4.0 * binom_sigma(p, trials),
                "y = {y}: {freq} vs {p}"
            );
        }
    }
}

#[test]
fn certified_beta_below_grid_minimum() {
    let cases = [
        (vec![0.5], Proposal::UniformIndependent),
        (vec![0.05], Proposal::UniformIndependent),
        (vec![0.5], Proposal::LaplaceWalk { rate: 5.0 }),
        (vec![0.9], Proposal::LaplaceWalk { rate: 1.0 }),
    ];
    for (xbar, proposal) in cases {
        let kernel = AtomKernel::new(LossSpec::mean(xbar, 100, 0.1).unwrap(), proposal).unwrap();
        let min = (0..100)
            .map(|i| {
                kernel
                    .atom_transition_prob(&State::Point(vec![i as f64 / 99.0]))
                    .value()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(
            kernel.beta() > 0.0 && kernel.beta() <= min + 1e-15,
            "{} > {min}",
            kernel.beta()
        );
    }
}

#[test]
fn acceptance_lower_bound_holds_at_mode() {
    // min{1, h(y')/h(y)} is smallest from the mode, so start there
    let xbar = [0.3];
    for proposal in [Proposal::UniformIndependent, Proposal::LaplaceWalk { rate: 5.0 }] {
        let spec = LossSpec::mean(xbar.to_vec(), 100, 0.1).unwrap();
        let lower = p_accept_lower_example1(&xbar, 100, 0.1, &proposal).unwrap();
        let mut rng = RandomStream::new(31, 0);
        let trials = 100_000;
        let moved = (0..trials)
            .filter(|_| mh_step(&spec, &proposal, &xbar, &mut rng) != xbar)
            .count();
        let rate = moved as f64 / trials as f64;
        assert!(lower <= rate + 4.0 * binom_sigma(rate, trials), "{lower} > {rate}");
    }
}
