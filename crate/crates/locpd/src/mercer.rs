//! Nyström discretization of the Mercer operator (T φ)(x) = ∫₀ᵃ φ(y) K(x, y) dy,
//! its spectrum, Mercer reconstruction, the rank-one decomposition of the
//! triangle kernel and the lattice form of T for kernels with a spectral density.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Group, PdFunction};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, herm_eigen, CMatrix};
use crate::pl::PiecewiseLinear;
use crate::quadrature::{nodes, Rule};

pub const EIGEN_FLOOR: f64 = 1e-12;

pub trait Kernel: Sync {
    fn name(&self) -> String;
    fn k(&self, x: f64, y: f64) -> Complex64;
    /// Largest a such that K is defined on (0, a) × (0, a).
    fn max_interval(&self) -> f64;
}

impl Kernel for PdFunction {
    fn name(&self) -> String {
        self.id.clone()
    }
    fn k(&self, x: f64, y: f64) -> Complex64 {
        let d = x - y;
        if self.group == Group::RealLine {
            self.value(d.clamp(-self.half_width, self.half_width))
        } else {
            self.value(d)
        }
    }
    fn max_interval(&self) -> f64 {
        match self.group {
            Group::RealLine => self.half_width,
            Group::Circle => 1.0,
        }
    }
}

/// E(x, y) = x ∧ y
#[derive(Debug, Clone, Copy)]
pub struct MinKernel;

impl Kernel for MinKernel {
    fn name(&self) -> String {
        "E".into()
    }
    fn k(&self, x: f64, y: f64) -> Complex64 {
        Complex64::new(x.min(y), 0.0)
    }
    fn max_interval(&self) -> f64 {
        f64::INFINITY
    }
}

pub type KernelFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct FnKernel {
    pub name: String,
    pub f: KernelFn,
    pub max: f64,
}

impl FnKernel {
    pub fn new(name: impl Into<String>, max: f64, f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        FnKernel { name: name.into(), f: Arc::new(f), max }
    }

    pub fn real(name: impl Into<String>, max: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, max, move |x, y| Complex64::new(f(x, y), 0.0))
    }
}

impl Kernel for FnKernel {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn k(&self, x: f64, y: f64) -> Complex64 {
        (self.f)(x, y)
    }
    fn max_interval(&self) -> f64 {
        self.max
    }
}

/// 1 - x - y, the rank-two part of the triangle kernel on (0, 1/2).
pub fn l_kernel() -> FnKernel {
    FnKernel::real("L", f64::INFINITY, |x, y| 1.0 - x - y)
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kernel: String,
    pub a: f64,
    pub rule: Rule,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// √w_i K(x_i, x_j) √w_j
    pub matrix: CMatrix,
}

pub fn discretize(kernel: &dyn Kernel, a: f64, n: usize, rule: Rule) -> Result<OperatorMatrix> {
    if n < 8 {
        return Err(Error::Invalid(format!("need at least 8 nodes, got {n}")));
    }
    let max = kernel.max_interval();
    if !(a > 0.0) || a > max * (1.0 + 1e-12) {
        return Err(Error::Invalid(format!(
            "interval length {a} exceeds the domain ({max}) of kernel {}",
            kernel.name()
        )));
    }
    let (xs, ws) = nodes(rule, 0.0, a, n);
    let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| kernel.k(xs[i], xs[j]) * (sw[i] * sw[j])).collect())
        .collect();
    let matrix = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(OperatorMatrix { kernel: kernel.name(), a, rule, nodes: xs, weights: ws, matrix })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MercerSpectrum {
    pub interval_length: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// ξ_n sampled at the nodes; orthonormal in Σ w_i conj(ξ_n(x_i)) ξ_m(x_i).
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub trace: f64,
    /// Number of eigenpairs dropped below the floor.
    pub discarded: usize,
}

pub fn spectrum(op: &OperatorMatrix) -> Result<MercerSpectrum> {
    let (vals, vecs) = herm_eigen(&op.matrix)?;
    let top = vals.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::Eigen("operator has no positive eigenvalue".into()));
    }
    let keep = vals.iter().take_while(|&&v| v > EIGEN_FLOOR * top).count();
    let eigenvectors = (0..keep)
        .map(|k| {
            vecs.column(k)
                .iter()
                .zip(&op.weights)
                .map(|(v, w)| v / w.sqrt())
                .collect()
        })
        .collect();
    let eigenvalues: Vec<f64> = vals[..keep].to_vec();
    Ok(MercerSpectrum {
        interval_length: op.a,
        nodes: op.nodes.clone(),
        weights: op.weights.clone(),
        trace: eigenvalues.iter().sum(),
        eigenvalues,
        eigenvectors,
        discarded: vals.len() - keep,
    })
}

impl MercerSpectrum {
    /// ξ_n(x) by linear interpolation between nodes.
    pub fn eigenfunction(&self, n: usize, x: f64) -> Complex64 {
        let xs = &self.nodes;
        let v = &self.eigenvectors[n];
        let m = xs.len();
        let k = xs.partition_point(|&s| s <= x).clamp(1, m - 1);
        let (x0, x1) = (xs[k - 1], xs[k]);
        v[k - 1] + (v[k] - v[k - 1]) * ((x - x0) / (x1 - x0))
    }

    /// Weighted inner product of two node-sampled functions.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a.conj() * b * w).sum()
    }

    /// max |⟨ξ_n, ξ_m⟩ - δ_nm| over the first `k` eigenvectors.
    pub fn orthonormality_defect(&self, k: usize) -> f64 {
        let k = k.min(self.eigenvectors.len());
        let mut worst = 0.0f64;
        for n in 0..k {
            for m in 0..k {
                let ip = self.inner(&self.eigenvectors[n], &self.eigenvectors[m]);
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Σ_{n<K} λ_n conj(ξ_n(x)) ξ_n(y)
pub fn mercer_reconstruct(s: &MercerSpectrum, x: f64, y: f64, k: usize) -> Complex64 {
    (0..k.min(s.len()))
        .map(|n| s.eigenfunction(n, x).conj() * s.eigenfunction(n, y) * s.eigenvalues[n])
        .sum()
}

/// Cosine similarity |⟨u, v⟩_w| / (‖u‖_w ‖v‖_w) between node samples.
pub fn cosine_similarity(s: &MercerSpectrum, u: &[Complex64], v: &[Complex64]) -> f64 {
    let uv = s.inner(u, v).norm();
    let uu = s.inner(u, u).re.sqrt();
    let vv = s.inner(v, v).re.sqrt();
    uv / (uu * vv)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankOneReport {
    /// ‖T_{F₂} - 2 T_E - T_L‖ (spectral norm of the Nyström matrices)
    pub residual: f64,
    /// Largest-modulus eigenvalue of the discretized L.
    pub l_eigenvalue: f64,
    /// Both eigenvalues of L on span{1, x}, exact.
    pub l_affine_eigenvalues: [f64; 2],
    pub l_rank: usize,
}

/// The triangle kernel 1 - |x - y| on (0, 1/2) equals (1 - x - y) + 2 (x ∧ y).
pub fn rank_one_identity(n: usize) -> Result<RankOneReport> {
    if n < 64 {
        return Err(Error::Invalid(format!("need N >= 64, got {n}")));
    }
    let a = 0.5;
    let tri = FnKernel::real("F2", 0.5, |x, y| 1.0 - (x - y).abs());
    let f = discretize(&tri, a, n, Rule::Gauss)?;
    let e = discretize(&MinKernel, a, n, Rule::Gauss)?;
    let l = discretize(&l_kernel(), a, n, Rule::Gauss)?;
    let diff = &f.matrix - &e.matrix * Complex64::new(2.0, 0.0) - &l.matrix;
    let residual = eigenvalues(&diff)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lev = eigenvalues(&l.matrix)?;
    let top = lev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l_eigenvalue = lev.iter().copied().max_by(|p, q| p.abs().total_cmp(&q.abs())).unwrap_or(0.0);
    let l_rank = lev.iter().filter(|v| v.abs() > 1e-8 * top).count();
    Ok(RankOneReport { residual, l_eigenvalue, l_affine_eigenvalues: affine_l_eigenvalues(a), l_rank })
}

/// L maps a + b x to (p a + q b) + (r a + s b) x; eigenvalues of that 2×2 map.
pub fn affine_l_eigenvalues(a: f64) -> [f64; 2] {
    // ∫₀ᵃ (1 - x - y)(α + β y) dy
    let p = a - a * a / 2.0;
    let q = a * a / 2.0 - a * a * a / 3.0;
    let r = -a;
    let s = -a * a / 2.0;
    let tr = p + s;
    let det = p * s - q * r;
    let disc = (tr * tr / 4.0 - det).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeReport {
    pub values: Vec<Complex64>,
    /// Size of the next K lattice terms, an estimate of the truncation error.
    pub tail_estimate: f64,
}

/// x ↦ Σ_{|k|≤K} (2π/P) M(l_k) φ̂(l_k) e^{i l_k x} with l_k = 2πk/P.
///
/// This is T_F φ for the P-periodization of F; it agrees with T_F φ on (0,1)
/// once F(z - mP) is negligible for |z| < 1 and m ≠ 0. With P = 1 and unit
/// weights the sum is the plain lattice series over 2πℤ.
pub fn lattice_mercer(
    density: &(dyn Fn(f64) -> f64 + Sync),
    phi: &PiecewiseLinear,
    xs: &[f64],
    k_cut: usize,
    period: f64,
    tol: f64,
) -> Result<LatticeReport> {
    let (lo, hi) = phi.support();
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::Invalid("φ must be supported in [0, 1]".into()));
    }
    let step = 2.0 * PI / period;
    let coef = |k: i64| {
        let l = step * k as f64;
        (l, step * density(l) * phi.fourier(l))
    };
    let k = k_cut as i64;
    let terms: Vec<(f64, Complex64)> = (-k..=k).map(coef).collect();
    let tail_estimate: f64 = (k + 1..=2 * k + 1)
        .flat_map(|j| [coef(j).1.norm(), coef(-j).1.norm()])
        .sum();
    if tail_estimate > tol {
        return Err(Error::Convergence(format!(
            "lattice cutoff {k_cut} leaves tail ≈ {tail_estimate:e} > {tol:e}"
        )));
    }
    let values = xs
        .par_iter()
        .map(|&x| terms.iter().rev().map(|&(l, c)| c * Complex64::new(0.0, l * x).exp()).sum())
        .collect();
    Ok(LatticeReport { values, tail_estimate })
}
