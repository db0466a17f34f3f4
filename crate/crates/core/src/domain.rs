//! Output spaces, datasets and exponential-mechanism losses.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Compact support of a mechanism.
#[derive(Clone, Debug, PartialEq)]
pub enum OutputSpace {
    /// Axis-aligned box `∏ [lo_j, hi_j]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{ y ∈ R^dim : ‖y‖₁ ≤ radius }`.
    L1Ball { dim: usize, radius: f64 },
}

impl OutputSpace {
    pub fn unit_box(dim: usize) -> Result<Self> {
        Self::new_box(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::domain("box bounds must be non-empty and of equal length"));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite())
        {
            return Err(Error::domain("box requires finite lo < hi in every coordinate"));
        }
        Ok(OutputSpace::Box { lo, hi })
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain("L1 ball requires dim >= 1 and finite radius > 0"));
        }
        Ok(OutputSpace::L1Ball { dim, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            OutputSpace::Box { lo, .. } => lo.len(),
            OutputSpace::L1Ball { dim, .. } => *dim,
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            OutputSpace::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            OutputSpace::L1Ball { dim, radius } => {
                // (2B)^p / p!, accumulated as a product to avoid overflow
                (1..=*dim).map(|j| 2.0 * radius / j as f64).product()
            }
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        if y.len() != self.dim() {
            return false;
        }
        match self {
            OutputSpace::Box { lo, hi } => y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h),
            OutputSpace::L1Ball { radius, .. } => l1_norm(y) <= *radius,
        }
    }

    /// Largest L1 distance between two points of the space.
    pub fn l1_diameter(&self) -> f64 {
        match self {
            OutputSpace::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).sum(),
            OutputSpace::L1Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// A data-independent interior point (box midpoint, ball origin).
    pub fn center(&self) -> Vec<f64> {
        match self {
            OutputSpace::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            OutputSpace::L1Ball { dim, .. } => vec![0.0; *dim],
        }
    }

    /// Exact uniform draw.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            OutputSpace::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
            OutputSpace::L1Ball { dim, radius } => {
                // uniform direction on the simplex surface, random orthant,
                // radial scale U^{1/p}
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                let scale = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                e.into_iter()
                    .map(|v| {
                        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        s * scale * v / total
                    })
                    .collect()
            }
        }
    }
}

pub fn l1_norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v.abs()).sum()
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Euclidean projection onto `{ ‖y‖₁ ≤ radius }` (sort-and-threshold).
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    if l1_norm(v) <= radius {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (j + 1) as f64;
        if *m > t {
            theta = t;
        }
    }
    v.iter().map(|x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

/// Ridge regression data with cached normal equations.
#[derive(Clone, Debug)]
pub struct RidgeData {
    x: DMatrix<f64>,
    z: DVector<f64>,
    lambda: f64,
    radius: f64,
    gram: DMatrix<f64>,
    xtz: DVector<f64>,
}

impl RidgeData {
    pub fn new(x: DMatrix<f64>, z: DVector<f64>, lambda: f64, radius: f64) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 || x.nrows() != z.len() {
            return Err(Error::domain(
                "ridge data needs n >= 1 rows matching the response length",
            ));
        }
        if x.iter().chain(z.iter()).any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::domain("ridge entries must lie in [-1, 1]"));
        }
        if !(lambda >= 0.0) || !(radius > 0.0) {
            return Err(Error::domain("ridge needs lambda >= 0 and radius > 0"));
        }
        let p = x.ncols();
        let gram = x.transpose() * &x + DMatrix::identity(p, p) * lambda;
        let xtz = x.transpose() * &z;
        Ok(Self {
            x,
            z,
            lambda,
            radius,
            gram,
            xtz,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.z
    }

    /// `‖Xᵀ(Xy − Z) + λy‖₁ = ‖(XᵀX + λI)y − XᵀZ‖₁`.
    pub fn gradient_l1(&self, y: &[f64]) -> f64 {
        let p = self.p();
        let mut total = 0.0;
        for i in 0..p {
            let mut g = -self.xtz[i];
            for (j, yj) in y.iter().enumerate() {
                g += self.gram[(i, j)] * yj;
            }
            total += g.abs();
        }
        total
    }

    /// Unconstrained ridge solution `(XᵀX + λI)⁻¹XᵀZ`.
    pub fn ridge_solution(&self) -> Result<Vec<f64>> {
        let sol = self
            .gram
            .clone()
            .cholesky()
            .map(|c| c.solve(&self.xtz))
            .or_else(|| self.gram.clone().lu().solve(&self.xtz))
            .ok_or_else(|| Error::config("ridge normal equations are singular"))?;
        Ok(sol.iter().copied().collect())
    }

    /// Reads a CSV with header `x1,..,xp,z`.
    pub fn from_csv(path: impl AsRef<Path>, lambda: f64, radius: f64) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let p = headers
            .len()
            .checked_sub(1)
            .filter(|p| *p >= 1)
            .ok_or_else(|| Error::config("ridge CSV needs at least one x column and a z column"))?;
        for (j, h) in headers.iter().enumerate() {
            let want = if j < p { format!("x{}", j + 1) } else { "z".to_string() };
            if h.trim() != want {
                return Err(Error::config(format!(
                    "ridge CSV header column {} is {h:?}, expected {want:?}",
                    j + 1
                )));
            }
        }
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != p + 1 {
                return Err(Error::config(format!(
                    "ridge CSV row {} has {} fields",
                    row + 1,
                    rec.len()
                )));
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("ridge CSV row {}: bad number {field:?}", row + 1)))?;
                if j < p {
                    xs.push(v);
                } else {
                    zs.push(v);
                }
            }
        }
        let n = zs.len();
        let x = DMatrix::from_row_slice(n, p, &xs);
        Self::new(x, DVector::from_vec(zs), lambda, radius)
    }
}

/// Confidential data for the two supported loss families.
#[derive(Clone, Debug)]
pub enum Dataset {
    /// Mean of `n` records in `[0,1]^d`.
    Mean {
        xbar: Vec<f64>,
        n: usize,
    },
    Ridge(RidgeData),
}

impl Dataset {
    pub fn mean(xbar: Vec<f64>, n: usize) -> Result<Self> {
        if xbar.is_empty() || n == 0 {
            return Err(Error::domain("mean dataset needs d >= 1 and n >= 1"));
        }
        if xbar.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain("every coordinate of xbar must lie in [0, 1]"));
        }
        Ok(Dataset::Mean { xbar, n })
    }

    /// Reads a single-row CSV of mean coordinates (an optional header row is
    /// skipped when it does not parse as numbers).
    pub fn mean_from_csv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push(v),
                Err(_) if rows.is_empty() => continue,
                Err(_) => return Err(Error::config("mean CSV contains a non-numeric row")),
            }
        }
        match rows.as_slice() {
            [row] => Self::mean(row.clone(), n),
            _ => Err(Error::config(format!(
                "mean CSV must contain exactly one numeric row, found {}",
                rows.len()
            ))),
        }
    }
}

/// Loss, sensitivity and atom for one exponential-mechanism instance.
#[derive(Clone, Debug)]
pub struct LossSpec {
    pub dataset: Dataset,
    pub space: OutputSpace,
    pub epsilon: f64,
    pub delta_l: f64,
    pub atom: Vec<f64>,
    pub atom_weight: f64,
}

impl LossSpec {
    /// `L_X(y) = ‖y − x̄‖₁` on `[0,1]^d` with sensitivity `d/n`; the atom sits at `x̄`.
    pub fn mean(xbar: Vec<f64>, n: usize, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let d = xbar.len();
        let dataset = Dataset::mean(xbar.clone(), n)?;
        Ok(Self {
            dataset,
            space: OutputSpace::unit_box(d)?,
            epsilon,
            delta_l: d as f64 / n as f64,
            atom: xbar,
            atom_weight: 1.0,
        })
    }

    /// K-norm gradient loss for ridge regression on the L1 ball, with
    /// sensitivity `2(1+B)p`. The atom is the ridge solution, projected onto
    /// the ball when it falls outside.
    pub fn ridge(data: RidgeData, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let p = data.p();
        let radius = data.radius();
        let atom = project_l1_ball(&data.ridge_solution()?, radius);
        Ok(Self {
            space: OutputSpace::l1_ball(p, radius)?,
            epsilon,
            delta_l: 2.0 * (1.0 + radius) * p as f64,
            atom,
            atom_weight: 1.0,
            dataset: Dataset::Ridge(data),
        })
    }

    pub fn with_atom_weight(mut self, w: f64) -> Result<Self> {
        if !(w >= 1.0) || !w.is_finite() {
            return Err(Error::domain("atom weight must be a finite value >= 1"));
        }
        self.atom_weight = w;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Rate `ε/(2Δ_L)` multiplying the loss in the exponent.
    pub fn rate(&self) -> f64 {
        self.epsilon / (2.0 * self.delta_l)
    }

    pub fn loss_eval(&self, y: &[f64]) -> Result<f64> {
        if !self.space.contains(y) {
            return Err(Error::domain("point lies outside the output space"));
        }
        Ok(self.loss_unchecked(y))
    }

    pub(crate) fn loss_unchecked(&self, y: &[f64]) -> f64 {
        match &self.dataset {
            Dataset::Mean { xbar, .. } => l1_distance(y, xbar),
            Dataset::Ridge(data) => data.gradient_l1(y),
        }
    }

    /// Unnormalised log-density `−ε L_X(y) / (2Δ_L)`; `−∞` outside the space.
    pub fn log_target(&self, y: &[f64]) -> f64 {
        if !self.space.contains(y) {
            return f64::NEG_INFINITY;
        }
        -self.rate() * self.loss_unchecked(y)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain("epsilon must be finite and > 0"));
    }
    Ok(())
}

/// Chain state on the atom-augmented space.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Atom,
    Point(Vec<f64>),
}

impl State {
    pub fn is_atom(&self) -> bool {
        matches!(self, State::Atom)
    }

    pub fn into_point(self) -> Option<Vec<f64>> {
        match self {
            State::Atom => None,
            State::Point(y) => Some(y),
        }
    }
}
