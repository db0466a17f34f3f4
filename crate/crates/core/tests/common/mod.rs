//! Test-only oracles, written independently of the library code paths.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// CDF of the density `∝ e^{−b|y−m|}` on `[0,1]`, integrated by hand.
pub fn trunc_laplace_cdf(y: f64, m: f64, b: f64) -> f64 {
    let y = y.clamp(0.0, 1.0);
    let left = (1.0 - (-b * m).exp()) / b;
    let right = (1.0 - (-b * (1.0 - m)).exp()) / b;
    let below = if y <= m {
        ((-b * (m - y)).exp() - (-b * m).exp()) / b
    } else {
        left + (1.0 - (-b * (y - m)).exp()) / b
    };
    below / (left + right)
}

/// Composite Simpson rule with `2k` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Stationary atom mass `w_a / (w_a + ∫ h)` for the one-dimensional mean,
/// `h(y) = e^{−b|y−m|}`, by quadrature on both sides of the kink.
pub fn atom_mass_1d(m: f64, b: f64, w_a: f64) -> f64 {
    let h = |y: f64| (-b * (y - m).abs()).exp();
    let mass = simpson(h, 0.0, m, 2000) + simpson(h, m, 1.0, 2000);
    w_a / (w_a + mass)
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// One-sample KS statistic against a law with atoms: `cdf` is right
/// continuous, `cdf_left` its left limit.
pub fn ks_statistic_atoms(samples: &mut [f64], cdf: impl Fn(f64) -> f64, cdf_left: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = samples[i];
        let mut j = i;
        while j < n && samples[j] == x {
            j += 1;
        }
        d = d.max((cdf_left(x) - i as f64 / n as f64).abs());
        d = d.max((cdf(x) - j as f64 / n as f64).abs());
        i = j;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS critical value at level `alpha` (asymptotic).
pub fn ks_two_sample_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Pearson chi-squared homogeneity test of two count samples over positive
/// integers. Adjacent values are pooled left to right until every pooled
/// cell has expected count at least 5 in both samples. Returns
/// `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    for v in a {
        ca[*v as usize] += 1.0;
    }
    for v in b {
        cb[*v as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pa, mut pb) = (0.0, 0.0);
    for k in 0..=max {
        pa += ca[k];
        pb += cb[k];
        let pooled = pa + pb;
        if pooled * na.min(nb) / total >= 5.0 {
            cells.push((pa, pb));
            pa = 0.0;
            pb = 0.0;
        }
    }
    if pa + pb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pa;
                last.1 += pb;
            }
            None => cells.push((pa, pb)),
        }
    }
    if cells.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let mut stat = 0.0;
    for (oa, ob) in &cells {
        let col = oa + ob;
        let ea = col * na / total;
        let eb = col * nb / total;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = cells.len() - 1;
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    (stat, df, p)
}

/// Pearson goodness-of-fit p-value of `counts` against probabilities `probs`.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(o, p)| {
            let e = n as f64 * p;
            (*o as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

/// Binomial standard error of a frequency estimate.
pub fn binom_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Worst-start total variation distance of a row-stochastic matrix power
/// from `pi`, for powers `1..=m_max`.
pub fn tv_curve(p: &[Vec<f64>], pi: &[f64], m_max: usize) -> Vec<f64> {
    let k = pi.len();
    let mut q: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut out = Vec::with_capacity(m_max);
    for _ in 0..m_max {
        q = matmul(&q, p);
        let worst = q
            .iter()
            .map(|row| 0.5 * row.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        out.push(worst);
    }
    out
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, r) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; r]; n];
    for i in 0..n {
        for t in 0..m {
            let x = a[i][t];
            if x != 0.0 {
                for j in 0..r {
                    c[i][j] += x * b[t][j];
                }
            }
        }
    }
    c
}

/// `max_j |(πP)_j − π_j|`.
pub fn stationarity_gap(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    (0..pi.len())
        .map(|j| {
            let flow: f64 = (0..pi.len()).map(|i| pi[i] * p[i][j]).sum();
            (flow - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Metropolis–Hastings matrix on a finite state space from a possibly
/// sub-stochastic proposal matrix; missing proposal mass stays put.
pub fn mh_matrix(q: &[Vec<f64>], target: &[f64]) -> Vec<Vec<f64>> {
    let k = target.len();
    let mut p = vec![vec![0.0; k]; k];
    for i in 0..k {
        let mut out = 0.0;
        for j in 0..k {
            if i != j && q[i][j] > 0.0 {
                let ratio = target[j] * q[j][i] / (target[i] * q[i][j]);
                p[i][j] = q[i][j] * ratio.min(1.0);
                out += p[i][j];
            }
        }
        p[i][i] = 1.0 - out;
    }
    p
}
