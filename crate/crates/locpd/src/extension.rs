//! Polya spline extensions, their spectral densities, Shannon sampling checks
//! and the frame functions of the exponential kernel.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Eval, Group, PdFunction};
use crate::error::{Error, Result};
use crate::measures::{sinc, CustomDensity, Density, DensityKind, QuadSpec, SpectralMeasure};
use crate::mercer::{Kernel, MercerSpectrum};
use crate::pl::segment_fourier;
use crate::quadrature::{gl, Adaptive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineMode {
    /// One line of slope F'(a) down to its zero.
    SingleSegment,
    /// The line from (a, F(a)) to (c, 0).
    ToZero,
}

impl FromStr for SplineMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_segment" | "single" => Ok(SplineMode::SingleSegment),
            "to_zero" => Ok(SplineMode::ToZero),
            _ => Err(Error::Invalid(format!("unknown spline mode {s:?}"))),
        }
    }
}

/// How the transform of the core F|[0,a] is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreKind {
    /// F is affine on [0, a].
    Linear,
    /// F(x) = e^{-x} on [0, a].
    Exponential,
    /// Composite Gauss–Legendre.
    Quadrature,
}

/// Even extension of a real p.d. function: F on (-a, a), then line segments
/// through `knots`/`values`, and 0 beyond `c`.
#[derive(Clone, Serialize)]
pub struct SplineExtension {
    pub base: String,
    pub a: f64,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub c: f64,
    pub core_kind: CoreKind,
    #[serde(skip)]
    core: Eval,
    /// F'(0+) and F'(a-)
    #[serde(skip)]
    core_slopes: (f64, f64),
    /// Total variation of F' on (0, a).
    #[serde(skip)]
    core_slope_variation: f64,
}

impl std::fmt::Debug for SplineExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplineExtension")
            .field("base", &self.base)
            .field("a", &self.a)
            .field("knots", &self.knots)
            .field("values", &self.values)
            .field("c", &self.c)
            .field("core_kind", &self.core_kind)
            .finish()
    }
}

fn detect_core(f: &PdFunction) -> CoreKind {
    let a = f.half_width;
    let probes = [0.0, 0.3 * a, 0.71 * a, a];
    let close = |g: &dyn Fn(f64) -> f64| probes.iter().all(|&x| (f.value(x).re - g(x)).abs() < 1e-14);
    let f0 = f.value(0.0).re;
    let fa = f.value(a).re;
    if close(&|x| f0 + (fa - f0) * x / a) {
        CoreKind::Linear
    } else if close(&|x: f64| (-x).exp()) {
        CoreKind::Exponential
    } else {
        CoreKind::Quadrature
    }
}

pub fn polya_spline(f: &PdFunction, c: f64, mode: SplineMode) -> Result<SplineExtension> {
    if !f.is_real || f.group != Group::RealLine || !f.half_width.is_finite() {
        return Err(Error::Construction(format!("{} is not a real even function on a bounded interval", f.id)));
    }
    let a = f.half_width;
    if !(c > a) {
        return Err(Error::Construction(format!("cutoff c = {c} must exceed a = {a}")));
    }
    let fa = f.value(a).re;
    let sa = f
        .slope(a)
        .ok_or_else(|| Error::Construction(format!("{} has no one-sided derivative at a", f.id)))?;
    let (knots, values) = match mode {
        SplineMode::SingleSegment => {
            if !(sa < 0.0) || !(fa > 0.0) {
                return Err(Error::Construction(format!(
                    "line of slope {sa} from F(a) = {fa} never reaches zero"
                )));
            }
            let z = a - fa / sa;
            if z > c * (1.0 + 1e-12) {
                return Err(Error::Construction(format!("zero crossing {z} lies beyond c = {c}")));
            }
            if z < c * (1.0 - 1e-12) {
                (vec![a, z, c], vec![fa, 0.0, 0.0])
            } else {
                (vec![a, c], vec![fa, 0.0])
            }
        }
        SplineMode::ToZero => (vec![a, c], vec![fa, 0.0]),
    };
    let h = 1e-9 * a;
    let s0 = f.slope(h).unwrap_or(sa);
    let n = 4000;
    let mut tv = 0.0;
    let mut prev = s0;
    for i in 1..=n {
        let s = f.slope(a * i as f64 / n as f64).unwrap_or(sa);
        tv += (s - prev).abs();
        prev = s;
    }
    Ok(SplineExtension {
        base: f.id.clone(),
        a,
        knots,
        values,
        c,
        core_kind: detect_core(f),
        core: f.evaluator(),
        core_slopes: (s0, sa),
        core_slope_variation: tv,
    })
}

impl SplineExtension {
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x.abs();
        if t < self.a {
            return (self.core)(t).re;
        }
        if t >= self.c {
            return 0.0;
        }
        let k = self.knots.partition_point(|&s| s <= t).clamp(1, self.knots.len() - 1);
        let (x0, x1) = (self.knots[k - 1], self.knots[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// ∫_0^a F(y) e^{-iλy} dy
    fn core_transform(&self, lam: f64) -> Complex64 {
        let a = self.a;
        match self.core_kind {
            CoreKind::Linear => segment_fourier(0.0, a, (self.core)(0.0), (self.core)(a), lam),
            CoreKind::Exponential => {
                let z = Complex64::new(1.0, lam);
                (1.0 - (-z * a).exp()) / z
            }
            CoreKind::Quadrature => {
                // at most 16 radians of phase per 32-point panel
                let k = (a * (lam.abs() + 1.0) / 16.0).ceil().max(2.0) as usize;
                let h = a / k as f64;
                let rule = gl(32);
                (0..k)
                    .map(|i| {
                        rule.integrate(h * i as f64, h * (i + 1) as f64, |y| {
                            (self.core)(y) * Complex64::new(0.0, -lam * y).exp()
                        })
                    })
                    .sum()
            }
        }
    }

    /// Φ(λ) = (1/2π) ∫_{-c}^{c} e^{-iλy} F_ex(y) dy
    pub fn density(&self, lam: f64) -> f64 {
        let mut s = self.core_transform(lam);
        for (k, v) in self.knots.windows(2).zip(self.values.windows(2)) {
            s += segment_fourier(k[0], k[1], Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0), lam);
        }
        s.re / PI
    }

    /// Points p and weights w_p with Φ(λ) ≈ -(1/πλ²) Σ w_p cos(λp) for large
    /// λ: F'(0+) at 0, the slope jumps at the knots, -F'(c-) at c.
    fn asymptotic_terms(&self) -> Vec<(f64, f64)> {
        let slopes = self.slopes();
        let mut v = vec![(0.0, self.core_slopes.0)];
        let mut left = self.core_slopes.1;
        for (i, s) in slopes.iter().enumerate() {
            v.push((self.knots[i], s - left));
            left = *s;
        }
        let last = *self.knots.last().unwrap();
        if last < self.c {
            v.push((last, -left));
            left = 0.0;
        }
        v.push((self.c, -left));
        v
    }

    /// C with |Φ(λ)| ≤ C/λ².
    pub fn tail_constant(&self) -> f64 {
        let jumps: f64 = self.asymptotic_terms().iter().skip(1).map(|t| t.1.abs()).sum();
        (self.core_slopes.0.abs() + jumps + self.core_slope_variation) / PI
    }

    /// ∫ e^{iλx} Φ(λ) dλ: quadrature on [-Λ, Λ] plus the tail of the leading
    /// asymptotic term. Returns the value and the O(Λ^{-2}) remainder bound.
    pub fn inverse_transform(&self, x: f64, lambda_max: f64) -> (f64, f64) {
        let width = PI / (self.c + x.abs() + 1.0);
        let k = (lambda_max / width).ceil() as usize;
        let h = lambda_max / k as f64;
        let rule = gl(16);
        let body: f64 = (0..k)
            .map(|i| rule.integrate(h * i as f64, h * (i + 1) as f64, |l| 2.0 * (l * x).cos() * self.density(l)))
            .sum();
        let tail: f64 = self
            .asymptotic_terms()
            .iter()
            .map(|&(p, w)| -w / PI * (cos_tail(x - p, lambda_max) + cos_tail(x + p, lambda_max)))
            .sum();
        let rem = 4.0 * self.tail_constant() * (self.c + x.abs() + 1.0) / (lambda_max * lambda_max);
        (body + tail, rem)
    }

    /// The extension as a measure Φ(λ) dλ.
    pub fn measure(&self) -> SpectralMeasure {
        let e = self.clone();
        let env = self.tail_constant();
        SpectralMeasure::density(Density {
            kind: DensityKind::Custom(CustomDensity {
                name: format!("{}_ext", self.base),
                f: Arc::new(move |l| e.density(l)),
                support: (f64::NEG_INFINITY, f64::INFINITY),
                breaks: vec![],
                envelope: Arc::new(move |l| env / (l * l)),
                oscillation: self.c,
                monotone_tail: false,
                mass: Some(self.eval(0.0)),
            }),
            weight: 1.0,
            tail: Some(2.0),
        })
    }
}

impl Kernel for SplineExtension {
    fn name(&self) -> String {
        format!("{}_ext", self.base)
    }
    fn k(&self, x: f64, y: f64) -> Complex64 {
        Complex64::new(self.eval(x - y), 0.0)
    }
    fn max_interval(&self) -> f64 {
        f64::INFINITY
    }
}

/// ∫_L^∞ cos(λu)/λ² dλ
fn cos_tail(u: f64, l: f64) -> f64 {
    let t = u.abs();
    (l * t).cos() / l - t * (FRAC_PI_2 - sine_integral(l * t))
}

/// Si(x) = ∫_0^x sin t / t dt
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    let v = if t == 0.0 {
        0.0
    } else if t <= 2.0 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        let mut pow = t;
        let mut k = 0u32;
        loop {
            let n = (2 * k + 1) as f64;
            let term = pow / (n * fact);
            sum += if k % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum.abs() {
                break;
            }
            k += 1;
            pow *= t * t;
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
        }
        sum
    } else {
        // continued fraction for E1(it)
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = 1.0 / (d * a + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    };
    v.copysign(x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub convex_on_positive: bool,
    /// (x, y, excess) for the first violating pairs.
    pub violations: Vec<(f64, f64, f64)>,
    pub violation_count: usize,
}

/// Midpoint convexity over all grid pairs.
pub fn convexity_check(e: &SplineExtension, grid: &[f64]) -> ConvexityReport {
    let vals: Vec<f64> = grid.iter().map(|&x| e.eval(x)).collect();
    let mut violations = Vec::new();
    let mut count = 0usize;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let mid = e.eval(0.5 * (grid[i] + grid[j]));
            let excess = mid - 0.5 * (vals[i] + vals[j]);
            if excess > 1e-12 {
                count += 1;
                if violations.len() < 20 {
                    violations.push((grid[i], grid[j], excess));
                }
            }
        }
    }
    ConvexityReport { convex_on_positive: count == 0, violations, violation_count: count }
}

/// n + 1 equispaced points on [0, c].
pub fn convexity_grid(e: &SplineExtension, n: usize) -> Vec<f64> {
    (0..=n).map(|i| e.c * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionDensity {
    pub extension: SplineExtension,
    pub lambda: Vec<f64>,
    pub values: Vec<f64>,
    pub min_value: f64,
    pub argmin: f64,
    pub analytic: bool,
    /// C with |Φ(λ)| ≤ C/λ²
    pub tail_constant: f64,
    /// C/Λ² at the edge of the grid.
    pub tail_bound: f64,
}

impl ExtensionDensity {
    pub fn eval(&self, lam: f64) -> f64 {
        self.extension.density(lam)
    }
}

/// Spacing π/(4c) out to Λ = 200/c.
pub fn default_lambda_grid(c: f64) -> Vec<f64> {
    let h = PI / (4.0 * c);
    let k = (200.0 / c / h).ceil() as i64;
    (-k..=k).map(|i| i as f64 * h).collect()
}

pub fn extension_density(e: &SplineExtension, lambda_grid: &[f64]) -> ExtensionDensity {
    let values: Vec<f64> = lambda_grid.par_iter().map(|&l| e.density(l)).collect();
    let (mut min_value, mut argmin) = (f64::INFINITY, f64::NAN);
    for (&l, &v) in lambda_grid.iter().zip(&values) {
        if v < min_value {
            min_value = v;
            argmin = l;
        }
    }
    let big = lambda_grid.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tail_constant = e.tail_constant();
    ExtensionDensity {
        extension: e.clone(),
        lambda: lambda_grid.to_vec(),
        values,
        min_value,
        argmin,
        analytic: e.core_kind != CoreKind::Quadrature,
        tail_constant,
        tail_bound: if big > 0.0 { tail_constant / (big * big) } else { f64::INFINITY },
    }
}

pub fn pd_verify(d: &ExtensionDensity, tol: f64) -> bool {
    d.min_value >= -tol
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShannonReport {
    pub n_cut: usize,
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub in_ext: bool,
    /// ∫ |1 - S_N| dμ, which bounds the effect of dropping |n| > N.
    pub n_tail_bound: f64,
    /// Bound on the part of μ outside the quadrature window.
    pub window_tail: f64,
    pub truncation_dominated: bool,
}

/// Sha(ξ) = e^{iξ/2} sin ξ / ξ
pub fn sha(xi: f64) -> Complex64 {
    Complex64::new(0.0, 0.5 * xi).exp() * sinc(xi)
}

fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// S_N(λ) = Σ_{|n|≤N} Sha(π(λ - n)) = e^{iπλ/2} sin(πλ)/π Σ iⁿ/(λ - n)
pub fn shannon_partial_sum(lam: f64, n_cut: usize) -> Complex64 {
    let n_cut = n_cut as i64;
    let m = lam.round() as i64;
    let r = lam - m as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for n in -n_cut..=n_cut {
        if n != m {
            s += i_pow(n) / (lam - n as f64);
        }
    }
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let pre = i_pow(m) * Complex64::new(0.0, 0.5 * PI * r).exp() * (sign * (PI * r).sin() / PI);
    let mut total = pre * s;
    if m.abs() <= n_cut {
        total += sha(PI * r);
    }
    total
}

/// Tests whether the integer samples of μ reconstruct F on `xs` ⊂ (-1, 1).
pub fn shannon_ext_check(
    mu: &SpectralMeasure,
    f: &PdFunction,
    xs: &[f64],
    n_cut: usize,
    tol: f64,
) -> Result<ShannonReport> {
    mu.validate()?;
    if xs.iter().any(|x| !(x.abs() < 1.0)) {
        return Err(Error::Invalid("sampling points must lie in (-1, 1)".into()));
    }
    let targets: Vec<Complex64> = xs.iter().map(|&x| f.eval(x)).collect::<Result<_>>()?;
    let nn = n_cut as f64;
    let w_edge = 2.0 * nn + 16.0;
    // (λ, weight) with weight = M(λ) dλ or an atom mass
    let mut nodes: Vec<(f64, f64)> = mu.atoms.iter().map(|a| (a.loc, a.w)).collect();
    let mut outside = 0.0;
    if let Some(d) = &mu.density {
        let (slo, shi) = d.support();
        let lo = slo.max(-w_edge);
        let hi = shi.min(w_edge);
        let mut br: Vec<f64> = ((lo.ceil() as i64)..=(hi.floor() as i64)).map(|k| k as f64).collect();
        br.extend(d.breaks().into_iter().filter(|&b| b > lo && b < hi));
        br.push(lo);
        br.push(hi);
        br.sort_by(f64::total_cmp);
        br.dedup();
        let rule = gl(16);
        for p in br.windows(2) {
            let (ls, ws) = rule.on(p[0], p[1]);
            nodes.extend(ls.into_iter().zip(ws).map(|(l, w)| (l, w * d.value(l))));
        }
        if d.heavy() {
            let tau = d.tail_power();
            if !shi.is_finite() {
                outside += d.envelope(w_edge) * w_edge / (tau - 1.0);
            }
            if !slo.is_finite() {
                outside += d.envelope(-w_edge) * w_edge / (tau - 1.0);
            }
        }
    }
    let sums: Vec<Complex64> = nodes.par_iter().map(|&(l, _)| shannon_partial_sum(l, n_cut)).collect();
    let mut n_tail: f64 = nodes.iter().zip(&sums).map(|(&(_, w), s)| w * (1.0 - s).norm()).sum();
    let cantor = mu.cantor.map(|c| {
        let g = |l: f64| shannon_partial_sum(l, n_cut);
        let lam: Vec<f64> = cantor_points();
        let s: Vec<Complex64> = lam.par_iter().map(|&l| g(l)).collect();
        (c.weight, lam, s)
    });
    if let Some((w, _, s)) = &cantor {
        n_tail += w * s.iter().map(|v| (1.0 - v).norm()).sum::<f64>() / s.len() as f64;
    }
    let far = 2.0 * SQRT_2 / (PI * (w_edge - nn));
    n_tail += outside * (1.0 + far);
    let window_tail = outside * far;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&targets)
        .map(|(&x, t)| {
            let mut v: Complex64 = nodes
                .iter()
                .zip(&sums)
                .map(|(&(l, w), s)| Complex64::new(0.0, l * x).exp() * s * w)
                .sum();
            if let Some((w, lam, s)) = &cantor {
                let c: Complex64 = lam.iter().zip(s).map(|(&l, s)| Complex64::new(0.0, l * x).exp() * s).sum();
                v += c * (*w / lam.len() as f64);
            }
            (v - t).norm()
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ShannonReport {
        n_cut,
        x: xs.to_vec(),
        residuals,
        max_residual,
        in_ext: max_residual < tol,
        n_tail_bound: n_tail,
        window_tail,
        truncation_dominated: n_tail > tol,
    })
}

/// Centres of the 2^14 level-14 Cantor cylinders, matching `cantor_expectation`.
fn cantor_points() -> Vec<f64> {
    let depth = 14u32;
    (0..1usize << depth)
        .map(|bits| {
            let mut x = 0.0;
            let mut scale = 1.0;
            for k in 0..depth {
                scale /= 3.0;
                x += if bits >> k & 1 == 1 { scale } else { -scale };
            }
            x
        })
        .collect()
}

/// f_n = T_F e_n with e_n(y) = e^{i2πny} on (0, 1), through the measure:
/// f_n(x) = ∫ e^{iλx} (1 - e^{-iω})/(iω) dμ(λ), ω = λ - 2πn.
pub fn shannon_frame(n: i64, x: f64, mu: &SpectralMeasure, quad: &QuadSpec) -> Result<Complex64> {
    let c = 2.0 * PI * n as f64;
    let k = |l: f64| {
        let om = l - c;
        Complex64::new(0.0, -0.5 * om).exp() * sinc(0.5 * om)
    };
    frame_integral(mu, x, c, &k, quad)
}

/// The sinc form f_n(x) = ∫ e^{iλx} sin π(λ-n) / (π(λ-n)) dμ(λ).
pub fn shannon_frame_sinc(n: i64, x: f64, mu: &SpectralMeasure, quad: &QuadSpec) -> Result<Complex64> {
    let c = n as f64;
    let k = |l: f64| Complex64::new(sinc(PI * (l - c)), 0.0);
    frame_integral(mu, x, c, &k, quad)
}

const FRAME_WINDOW: f64 = 4000.0;

fn frame_integral(
    mu: &SpectralMeasure,
    x: f64,
    centre: f64,
    k: &(dyn Fn(f64) -> Complex64 + Sync),
    quad: &QuadSpec,
) -> Result<Complex64> {
    let g = |l: f64| Complex64::new(0.0, l * x).exp() * k(l);
    let w = FRAME_WINDOW + centre.abs();
    let (v, outside) = mu.integrate_window(&g, (-w, w), 0.5 * PI, &[centre, 0.0], quad)?;
    if outside * 2.0 / FRAME_WINDOW > 1e-6 {
        return Err(Error::Resolution(format!("frame integral tail {outside:.2e} too heavy")));
    }
    Ok(v)
}

/// Printed closed forms of Re f_n and Im f_n for e^{-|x|} on (0, 1).
pub fn f3_frame_closed_form(n: i64, x: f64) -> Complex64 {
    let w = 2.0 * PI * n as f64;
    let den = 1.0 + w * w;
    let re = ((x - 1.0).exp() + (-x).exp() - 2.0 * (w * x).cos()) / den;
    let im = (((x - 1.0).exp() - (-x).exp()) * w - 2.0 * (w * x).sin()) / den;
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesselReport {
    pub frame_sum: f64,
    pub rkhs_norm_sq: f64,
    pub lambda1: f64,
    pub bound: f64,
    pub holds: bool,
    pub n_max: usize,
}

/// Σ_{|n|≤N} |⟨f_n, ξ⟩_H|² ≤ λ₁ ‖ξ‖²_H for ξ sampled at the spectrum nodes.
/// Uses ⟨T_F e_n, ξ⟩_H = ⟨e_n, ξ⟩_{L²} and ‖ξ‖²_H = Σ |⟨ξ_k, ξ⟩|² / λ_k.
pub fn bessel_frame_check(s: &MercerSpectrum, xi: &[Complex64], n_max: usize) -> Result<BesselReport> {
    if xi.len() != s.nodes.len() {
        return Err(Error::Invalid("ξ must be sampled at the spectrum nodes".into()));
    }
    let len = s.interval_length;
    let norm = 1.0 / len.sqrt();
    let n_max_i = n_max as i64;
    let frame_sum: f64 = (-n_max_i..=n_max_i)
        .map(|n| {
            let w = 2.0 * PI * n as f64 / len;
            let e: Vec<Complex64> = s.nodes.iter().map(|&x| Complex64::new(0.0, w * x).exp() * norm).collect();
            s.inner(&e, xi).norm_sqr()
        })
        .sum();
    let rkhs_norm_sq: f64 = s
        .eigenvectors
        .iter()
        .zip(&s.eigenvalues)
        .map(|(v, l)| s.inner(v, xi).norm_sqr() / l)
        .sum();
    let lambda1 = s.eigenvalues[0];
    let bound = lambda1 * rkhs_norm_sq;
    Ok(BesselReport {
        frame_sum,
        rkhs_norm_sq,
        lambda1,
        bound,
        holds: frame_sum <= bound * (1.0 + 1e-9) + 1e-300,
        n_max,
    })
}

/// ∫_{-a}^{a} e^{-iyx} F(x) dx for a real even F.
pub fn restricted_transform(f: &PdFunction, y: f64) -> Result<f64> {
    let a = f.half_width;
    if !a.is_finite() {
        return Err(Error::Invalid("restricted transform needs a bounded interval".into()));
    }
    let ad = Adaptive { rel_tol: 1e-13, ..Adaptive::default() };
    let v: f64 = ad.integrate(&[0.0, a], PI / (y.abs() + 1.0), |x| 2.0 * (y * x).cos() * f.value(x).re)?;
    Ok(v)
}

/// (2 - 2e^{-a}(cos ay - y sin ay)) / (1 + y²)
pub fn f3_restricted_transform(a: f64, y: f64) -> f64 {
    (2.0 - 2.0 * (-a).exp() * ((a * y).cos() - y * (a * y).sin())) / (1.0 + y * y)
}

/// |∫_0^a e^{x} e^{-iλx} dx|² by quadrature.
pub fn exp_indicator_transform_sq(a: f64, lam: f64) -> Result<f64> {
    let ad = Adaptive { rel_tol: 1e-13, ..Adaptive::default() };
    let v: Complex64 = ad.integrate(&[0.0, a], PI / (lam.abs() + 1.0), |x| {
        Complex64::new(x, -lam * x).exp()
    })?;
    Ok(v.norm_sqr())
}
