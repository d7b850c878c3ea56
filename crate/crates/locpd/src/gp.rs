//! Monte-Carlo paths for Brownian motion, the pinned bridge and the
//! Ornstein–Uhlenbeck process, with batch-means covariance checks.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mercer::{discretize, FnKernel};
use crate::quadrature::Rule;

pub const BATCHES: usize = 20;
pub const SIGMA_BAND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactIncrement,
    EulerMaruyama,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_increment" => Ok(Scheme::ExactIncrement),
            "em" | "euler" | "euler_maruyama" => Ok(Scheme::EulerMaruyama),
            _ => Err(Error::Invalid(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    Brownian,
    Bridge,
    OrnsteinUhlenbeck { gamma: f64, beta: f64, v0: f64 },
}

impl Process {
    pub fn mean(&self, t: f64) -> f64 {
        match *self {
            Process::Brownian => 0.0,
            Process::Bridge => t,
            Process::OrnsteinUhlenbeck { gamma, v0, .. } => v0 * (-gamma * t).exp(),
        }
    }

    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        match *self {
            Process::Brownian => s.min(t),
            Process::Bridge => s.min(t) - s * t,
            Process::OrnsteinUhlenbeck { gamma, beta, .. } => {
                beta * beta / (2.0 * gamma) * ((-gamma * (t - s).abs()).exp() - (-gamma * (t + s)).exp())
            }
        }
    }
}

/// n + 1 equispaced times on [0, t_end].
pub fn uniform_grid(t_end: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|i| t_end * i as f64 / n_steps as f64).collect()
}

/// A family of sample paths on a shared time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSet {
    pub process: Process,
    pub scheme: Scheme,
    pub seed: u64,
    pub times: Vec<f64>,
    pub paths: Vec<Vec<f64>>,
}

/// One path with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct SamplePath<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub seed: u64,
    pub index: usize,
    pub scheme: Scheme,
}

impl PathSet {
    pub fn path(&self, i: usize) -> SamplePath<'_> {
        SamplePath { times: &self.times, values: &self.paths[i], seed: self.seed, index: i, scheme: self.scheme }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let scale = self.times.last().copied().unwrap_or(1.0).abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * scale)
            .ok_or_else(|| Error::Invalid(format!("time {t} is not on the grid")))
    }

    /// CSV with a header row `t,path_0,...`, at most `max_cols` paths.
    pub fn to_csv(&self, max_cols: usize) -> String {
        let k = self.paths.len().min(max_cols);
        let mut s = String::from("t");
        for i in 0..k {
            let _ = write!(s, ",path_{i}");
        }
        s.push('\n');
        for (j, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{t:.16e}");
            for p in &self.paths[..k] {
                let _ = write!(s, ",{:.16e}", p[j]);
            }
            s.push('\n');
        }
        s
    }
}

fn check_grid(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(Error::Invalid("grid must start at 0 and have at least two points".into()));
    }
    let dt = grid[1] - grid[0];
    if !(dt > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::Invalid("grid must be uniform and increasing".into()));
    }
    Ok(dt)
}

/// Generator for one path: the stream index is the path index.
fn path_rng(seed: u64, index: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn normal(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn simulate(
    process: Process,
    scheme: Scheme,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    step: impl Fn(&mut ChaCha12Rng, &mut Vec<f64>) + Sync,
) -> Result<PathSet> {
    if n_paths == 0 {
        return Err(Error::Invalid("need at least one path".into()));
    }
    let paths = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut v = Vec::with_capacity(grid.len());
            step(&mut rng, &mut v);
            v
        })
        .collect();
    Ok(PathSet { process, scheme, seed, times: grid.to_vec(), paths })
}

pub fn simulate_bm(grid: &[f64], n_paths: usize, seed: u64) -> Result<PathSet> {
    let dt = check_grid(grid)?;
    let sd = dt.sqrt();
    let n = grid.len();
    simulate(Process::Brownian, Scheme::ExactIncrement, grid, n_paths, seed, |rng, v| {
        let mut b = 0.0;
        v.push(b);
        for _ in 1..n {
            b += sd * normal(rng);
            v.push(b);
        }
    })
}

/// Bridge pinned at (0, 0) and (1, 1). The exact scheme uses
/// X_t = t + (1 - t) ∫_0^t dB/(1 - s) with the stochastic integral sampled by
/// its exact per-step variance 1/(1 - t_{k+1}) - 1/(1 - t_k).
pub fn simulate_bridge(grid: &[f64], n_paths: usize, seed: u64, scheme: Scheme) -> Result<PathSet> {
    let dt = check_grid(grid)?;
    let last = *grid.last().unwrap();
    if last > 1.0 + 1e-12 {
        return Err(Error::Invalid("bridge grid must lie in [0, 1]".into()));
    }
    let n = grid.len();
    let pinned_end = (last - 1.0).abs() <= 1e-12;
    simulate(Process::Bridge, scheme, grid, n_paths, seed, |rng, v| {
        v.push(0.0);
        match scheme {
            Scheme::ExactIncrement => {
                let mut integral = 0.0;
                for k in 1..n {
                    let t = grid[k];
                    if pinned_end && k == n - 1 {
                        v.push(1.0);
                        break;
                    }
                    let var = 1.0 / (1.0 - t) - 1.0 / (1.0 - grid[k - 1]);
                    integral += var.sqrt() * normal(rng);
                    v.push(t + (1.0 - t) * integral);
                }
            }
            Scheme::EulerMaruyama => {
                let sd = dt.sqrt();
                let mut x = 0.0;
                for k in 1..n {
                    let s = grid[k - 1];
                    x += (x - 1.0) / (s - 1.0) * dt + sd * normal(rng);
                    if pinned_end && k == n - 1 {
                        x = 1.0;
                    }
                    v.push(x);
                }
            }
        }
    })
}

/// dv = -γ v dt + β dB, v(0) = v0.
pub fn simulate_ou(
    gamma: f64,
    beta: f64,
    v0: f64,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<PathSet> {
    if !(gamma > 0.0 && beta > 0.0) {
        return Err(Error::Invalid(format!("need γ, β > 0, got {gamma}, {beta}")));
    }
    let dt = check_grid(grid)?;
    let n = grid.len();
    let decay = (-gamma * dt).exp();
    let sd_exact = (beta * beta * (1.0 - (-2.0 * gamma * dt).exp()) / (2.0 * gamma)).sqrt();
    let sd_em = beta * dt.sqrt();
    let process = Process::OrnsteinUhlenbeck { gamma, beta, v0 };
    simulate(process, scheme, grid, n_paths, seed, |rng, v| {
        let mut x = v0;
        v.push(x);
        for _ in 1..n {
            x = match scheme {
                Scheme::ExactIncrement => x * decay + sd_exact * normal(rng),
                Scheme::EulerMaruyama => x - gamma * x * dt + sd_em * normal(rng),
            };
            v.push(x);
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub pairs: Vec<(f64, f64)>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_paths: usize,
}

impl CovarianceReport {
    /// Every pair within `SIGMA_BAND` standard errors.
    pub fn passes(&self) -> bool {
        band_ok(&self.empirical, &self.theoretical, &self.std_error)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanReport {
    pub times: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_paths: usize,
}

impl MeanReport {
    pub fn passes(&self) -> bool {
        band_ok(&self.empirical, &self.theoretical, &self.std_error)
    }
}

fn band_ok(e: &[f64], t: &[f64], se: &[f64]) -> bool {
    e.iter().zip(t).zip(se).all(|((e, t), s)| (e - t).abs() <= SIGMA_BAND * s)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

/// Standard error of a statistic from its values on `BATCHES` equal batches.
fn batch_se(batch_values: &[f64]) -> f64 {
    let m = mean(batch_values);
    let var = batch_values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batch_values.len() as f64 - 1.0);
    (var / batch_values.len() as f64).sqrt()
}

fn batches(n: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if n < BATCHES * 2 {
        return Err(Error::Invalid(format!("need at least {} paths for batch means, got {n}", 2 * BATCHES)));
    }
    let size = n / BATCHES;
    Ok((0..BATCHES).map(|b| b * size..(b + 1) * size).collect())
}

fn column(set: &PathSet, idx: usize) -> Vec<f64> {
    set.paths.iter().map(|p| p[idx]).collect()
}

/// Sample covariance with mean subtraction; standard errors by batch means.
pub fn empirical_cov(set: &PathSet, pairs: &[(f64, f64)]) -> Result<CovarianceReport> {
    let ranges = batches(set.len())?;
    let mut empirical = Vec::new();
    let mut theoretical = Vec::new();
    let mut std_error = Vec::new();
    for &(s, t) in pairs {
        let a = column(set, set.index_of(s)?);
        let b = column(set, set.index_of(t)?);
        empirical.push(sample_cov(&a, &b));
        theoretical.push(set.process.covariance(s, t));
        let per: Vec<f64> = ranges.iter().map(|r| sample_cov(&a[r.clone()], &b[r.clone()])).collect();
        std_error.push(batch_se(&per));
    }
    Ok(CovarianceReport { pairs: pairs.to_vec(), empirical, theoretical, std_error, n_paths: set.len() })
}

pub fn empirical_mean(set: &PathSet, times: &[f64]) -> Result<MeanReport> {
    let ranges = batches(set.len())?;
    let mut empirical = Vec::new();
    let mut theoretical = Vec::new();
    let mut std_error = Vec::new();
    for &t in times {
        let a = column(set, set.index_of(t)?);
        empirical.push(mean(&a));
        theoretical.push(set.process.mean(t));
        let per: Vec<f64> = ranges.iter().map(|r| mean(&a[r.clone()])).collect();
        std_error.push(batch_se(&per));
    }
    Ok(MeanReport { times: times.to_vec(), empirical, theoretical, std_error, n_paths: set.len() })
}

/// Sample skewness of the values at time t with its large-sample standard error √(6/n).
pub fn skewness(set: &PathSet, t: f64) -> Result<(f64, f64)> {
    let a = column(set, set.index_of(t)?);
    let n = a.len() as f64;
    let m = mean(&a);
    let m2 = a.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = a.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    Ok((m3 / m2.powf(1.5), (6.0 / n).sqrt()))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FbmDecomposition {
    pub f_h: f64,
    pub l_h: f64,
    pub k_h: f64,
    pub residual: f64,
}

fn fbm_parts(h: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let p = 2.0 * h;
    let (ax, ay, d) = (x.abs().powf(p), y.abs().powf(p), (x - y).abs().powf(p));
    (1.0 - d, 1.0 - ax - ay, 0.5 * (ax + ay - d))
}

/// F_H(x - y) = 1 - |x - y|^{2H} split as L_H(x, y) + 2 K_H(x, y).
pub fn fbm_kernel_decompose(h: f64, x: f64, y: f64) -> Result<FbmDecomposition> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Invalid(format!("Hurst index must lie in (0, 1), got {h}")));
    }
    let (f_h, l_h, k_h) = fbm_parts(h, x, y);
    Ok(FbmDecomposition { f_h, l_h, k_h, residual: (f_h - l_h - 2.0 * k_h).abs() })
}

pub fn fbm_covariance_kernel(h: f64) -> FnKernel {
    FnKernel::real(format!("K_{h}"), f64::INFINITY, move |x, y| fbm_parts(h, x, y).2)
}

/// max |T_F - T_L - 2 T_K| over the entries of the discretized operators on (0, 1).
pub fn fbm_operator_residual(h: f64, n: usize) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Invalid(format!("Hurst index must lie in (0, 1), got {h}")));
    }
    let f = FnKernel::real("F_H", f64::INFINITY, move |x, y| fbm_parts(h, x, y).0);
    let l = FnKernel::real("L_H", f64::INFINITY, move |x, y| fbm_parts(h, x, y).1);
    let tf = discretize(&f, 1.0, n, Rule::Gauss)?;
    let tl = discretize(&l, 1.0, n, Rule::Gauss)?;
    let tk = discretize(&fbm_covariance_kernel(h), 1.0, n, Rule::Gauss)?;
    let r = &tf.matrix - &tl.matrix - tk.matrix * num_complex::Complex64::new(2.0, 0.0);
    Ok(r.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
