//! Finite positive measures on the line: atoms, an absolutely continuous
//! density and an optional middle-third Cantor component. Bochner transforms,
//! second-moment classification and the three-component splitting example.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gl, Adaptive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub loc: f64,
    pub w: f64,
}

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density families. Each is normalized to unit mass before `weight` is applied,
/// except `Indicator` (mass `hi - lo`), `Table` and `Custom`.
#[derive(Clone)]
pub enum DensityKind {
    /// s / (π (s² + λ²)), transform e^{-s|x|}
    Cauchy { scale: f64 },
    /// N(0, σ²), transform e^{-σ² x² / 2}
    Gaussian { sigma: f64 },
    /// (w / 2π) (sin(wλ/2) / (wλ/2))², transform (1 - |x|/w)⁺
    Fejer { width: f64 },
    /// e^{-|λ|/b} / (2b), transform 1 / (1 + b² x²)
    Laplace { scale: f64 },
    /// (1 - |λ|/h)⁺ / h, transform (sin(hx/2) / (hx/2))²
    Triangle { half_width: f64 },
    Indicator { lo: f64, hi: f64 },
    /// Linear interpolation through (λ, M) pairs, zero outside.
    Table { points: Vec<(f64, f64)> },
    Custom(CustomDensity),
}

/// A density given by a closure. `envelope(λ)` bounds M for |λ| ≥ `core_radius`
/// and must decay like |λ|^{-tail}; `oscillation` is the largest angular
/// frequency of M itself (0 for monotone tails).
#[derive(Clone)]
pub struct CustomDensity {
    pub name: String,
    pub f: DensityFn,
    pub support: (f64, f64),
    pub breaks: Vec<f64>,
    pub envelope: DensityFn,
    pub oscillation: f64,
    pub monotone_tail: bool,
    pub mass: Option<f64>,
}

impl std::fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityKind::Cauchy { scale } => write!(f, "Cauchy({scale})"),
            DensityKind::Gaussian { sigma } => write!(f, "Gaussian({sigma})"),
            DensityKind::Fejer { width } => write!(f, "Fejer({width})"),
            DensityKind::Laplace { scale } => write!(f, "Laplace({scale})"),
            DensityKind::Triangle { half_width } => write!(f, "Triangle({half_width})"),
            DensityKind::Indicator { lo, hi } => write!(f, "Indicator({lo}, {hi})"),
            DensityKind::Table { points } => write!(f, "Table({} points)", points.len()),
            DensityKind::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Density {
    pub kind: DensityKind,
    pub weight: f64,
    /// Power τ with M(λ) = O(|λ|^{-τ}); infinite for compact support or
    /// faster-than-power decay; `None` when undeclared.
    pub tail: Option<f64>,
}

impl Density {
    pub fn new(kind: DensityKind) -> Self {
        let tail = kind.natural_tail();
        Density { kind, weight: 1.0, tail }
    }

    pub fn weighted(mut self, w: f64) -> Self {
        self.weight = w;
        self
    }

    pub fn without_tail(mut self) -> Self {
        self.tail = None;
        self
    }

    pub fn value(&self, lam: f64) -> f64 {
        self.weight * self.kind.base(lam)
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            DensityKind::Triangle { half_width } => (-half_width, *half_width),
            DensityKind::Indicator { lo, hi } => (*lo, *hi),
            DensityKind::Table { points } => (points[0].0, points[points.len() - 1].0),
            DensityKind::Custom(c) => c.support,
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Interval outside of which the density is negligible (light tails) or
    /// handled by tail marching (heavy tails).
    pub(crate) fn core(&self, core_radius: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        match &self.kind {
            DensityKind::Gaussian { sigma } => (-9.5 * sigma, 9.5 * sigma),
            DensityKind::Laplace { scale } => (-40.0 * scale, 40.0 * scale),
            _ => (lo.max(-core_radius), hi.min(core_radius)),
        }
    }

    pub(crate) fn heavy(&self) -> bool {
        let (lo, hi) = self.support();
        let infinite = !lo.is_finite() || !hi.is_finite();
        infinite && !matches!(self.kind, DensityKind::Gaussian { .. } | DensityKind::Laplace { .. })
    }

    pub(crate) fn breaks(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::Laplace { .. } => vec![0.0],
            DensityKind::Triangle { .. } => vec![0.0],
            DensityKind::Table { points } => points.iter().map(|p| p.0).collect(),
            DensityKind::Custom(c) => c.breaks.clone(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn oscillation(&self) -> f64 {
        match &self.kind {
            DensityKind::Fejer { width } => *width,
            DensityKind::Custom(c) => c.oscillation,
            _ => 0.0,
        }
    }

    fn monotone_tail(&self) -> bool {
        match &self.kind {
            DensityKind::Fejer { .. } => false,
            DensityKind::Custom(c) => c.monotone_tail,
            _ => true,
        }
    }

    pub(crate) fn envelope(&self, lam: f64) -> f64 {
        let l = lam.abs();
        self.weight
            * match &self.kind {
                DensityKind::Fejer { width } => 2.0 / (PI * width * l * l),
                DensityKind::Custom(c) => (c.envelope)(lam),
                _ => self.kind.base(lam),
            }
    }

    pub(crate) fn tail_power(&self) -> f64 {
        match &self.kind {
            DensityKind::Cauchy { .. } | DensityKind::Fejer { .. } => 2.0,
            _ => self.tail.filter(|t| t.is_finite()).unwrap_or(2.0),
        }
    }

    /// Closed-form mass where known.
    pub fn analytic_mass(&self) -> Option<f64> {
        let m = match &self.kind {
            DensityKind::Indicator { lo, hi } => hi - lo,
            DensityKind::Table { points } => points
                .windows(2)
                .map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1))
                .sum(),
            DensityKind::Custom(c) => c.mass?,
            _ => 1.0,
        };
        Some(self.weight * m)
    }

    /// ∫ g(λ) M(λ) dλ over the core, for smooth weights g.
    fn integrate_core<F>(&self, lo: f64, hi: f64, freq: f64, quad: &QuadSpec, g: F) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        if hi <= lo {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut br = vec![lo];
        br.extend(self.breaks().into_iter().filter(|&b| b > lo && b < hi));
        br.push(hi);
        br.sort_by(f64::total_cmp);
        br.dedup();
        let width = (2.0 * PI / (freq + self.oscillation() + 1.0)).min(8.0);
        quad.adaptive.integrate(&br, width, |l| g(l) * self.value(l))
    }

    /// ∫_{L}^{∞} e^{iλx} M(λ) dλ (sign = +1) or ∫_{-∞}^{-L} (sign = -1).
    fn tail_integral(&self, x: f64, start: f64, sign: f64, quad: &QuadSpec) -> Result<Complex64> {
        let rule = gl(16);
        let tau = self.tail_power();
        let om = self.oscillation();
        let xs = x.abs();
        let mut lam = start;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut panels = 0usize;
        let phase = |l: f64| Complex64::new(0.0, sign * l * x).exp();
        loop {
            let env = self.envelope(sign * lam);
            if env * lam / (tau - 1.0) < quad.tail_tol {
                return Ok(acc);
            }
            if self.monotone_tail() && xs > 0.0 && 2.0 * env / (lam * xs * xs) < quad.tail_tol {
                // one integration by parts: ∫_L^∞ e^{iωλ} M ≈ i e^{iωL} M(L) / ω
                let m = self.value(sign * lam);
                let corr = Complex64::new(0.0, 1.0) * phase(lam) * m / (sign * x);
                return Ok(acc + corr);
            }
            let w = if xs + om > 0.0 { (2.0 * PI / (xs + om)).min(0.5 * lam) } else { lam };
            let a = lam;
            let b = lam + w;
            acc += rule.integrate(a, b, |l| phase(l) * self.value(sign * l));
            lam = b;
            panels += 1;
            if lam > quad.max_lambda || panels > quad.max_panels {
                return Err(Error::Resolution(format!(
                    "density tail not resolved by λ = {lam:.3e} at x = {x}"
                )));
            }
        }
    }

    /// ∫ e^{iλx} M(λ) dλ
    pub fn fourier(&self, x: f64, quad: &QuadSpec) -> Result<Complex64> {
        if let Some(v) = self.closed_fourier(x) {
            if quad.prefer_closed_forms {
                return Ok(v);
            }
        }
        let (lo, hi) = self.core(quad.core_radius);
        let mut s = self.integrate_core(lo, hi, x.abs(), quad, |l| Complex64::new(0.0, l * x).exp())?;
        if self.heavy() {
            let (slo, shi) = self.support();
            if !shi.is_finite() {
                s += self.tail_integral(x, hi, 1.0, quad)?;
            }
            if !slo.is_finite() {
                s += self.tail_integral(x, -lo, -1.0, quad)?;
            }
        }
        Ok(s)
    }

    /// Known transform of the density family (used only when requested).
    pub fn closed_fourier(&self, x: f64) -> Option<Complex64> {
        let v = match &self.kind {
            DensityKind::Cauchy { scale } => Complex64::new((-scale * x.abs()).exp(), 0.0),
            DensityKind::Gaussian { sigma } => Complex64::new((-0.5 * sigma * sigma * x * x).exp(), 0.0),
            DensityKind::Fejer { width } => Complex64::new((1.0 - x.abs() / width).max(0.0), 0.0),
            DensityKind::Laplace { scale } => Complex64::new(1.0 / (1.0 + scale * scale * x * x), 0.0),
            DensityKind::Triangle { half_width } => {
                let s = sinc(0.5 * half_width * x);
                Complex64::new(s * s, 0.0)
            }
            DensityKind::Indicator { lo, hi } => {
                if x == 0.0 {
                    Complex64::new(hi - lo, 0.0)
                } else {
                    let i = Complex64::new(0.0, 1.0);
                    ((i * hi * x).exp() - (i * lo * x).exp()) / (i * x)
                }
            }
            _ => return None,
        };
        Some(v * self.weight)
    }

    /// ∫_{-R}^{R} λ² M(λ) dλ
    pub fn truncated_second_moment(&self, r: f64, quad: &QuadSpec) -> Result<f64> {
        let (lo, hi) = self.support();
        let lo = lo.max(-r);
        let hi = hi.min(r);
        if hi <= lo {
            return Ok(0.0);
        }
        let mut br = vec![lo];
        br.extend(self.breaks().into_iter().filter(|&b| b > lo && b < hi));
        br.push(hi);
        br.sort_by(f64::total_cmp);
        br.dedup();
        let width = (2.0 * PI / (self.oscillation() + 1.0)).min(4.0);
        quad.adaptive.integrate(&br, width, |l| l * l * self.value(l))
    }

    fn quadrature_mass(&self, quad: &QuadSpec) -> Result<f64> {
        Ok(self.fourier(0.0, &QuadSpec { prefer_closed_forms: false, ..*quad })?.re)
    }
}

impl DensityKind {
    fn base(&self, l: f64) -> f64 {
        match self {
            DensityKind::Cauchy { scale } => scale / (PI * (scale * scale + l * l)),
            DensityKind::Gaussian { sigma } => {
                (-0.5 * l * l / (sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            DensityKind::Fejer { width } => {
                let s = sinc(0.5 * width * l);
                width / (2.0 * PI) * s * s
            }
            DensityKind::Laplace { scale } => (-l.abs() / scale).exp() / (2.0 * scale),
            DensityKind::Triangle { half_width } => (1.0 - l.abs() / half_width).max(0.0) / half_width,
            DensityKind::Indicator { lo, hi } => {
                if l >= *lo && l <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKind::Table { points } => interp(points, l),
            DensityKind::Custom(c) => (c.f)(l),
        }
    }

    fn natural_tail(&self) -> Option<f64> {
        match self {
            DensityKind::Cauchy { .. } | DensityKind::Fejer { .. } => Some(2.0),
            DensityKind::Custom(_) => None,
            _ => Some(f64::INFINITY),
        }
    }
}

fn interp(points: &[(f64, f64)], l: f64) -> f64 {
    if points.is_empty() || l < points[0].0 || l > points[points.len() - 1].0 {
        return 0.0;
    }
    let k = points.partition_point(|p| p.0 <= l);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[k - 1].1;
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (l - x0) / (x1 - x0)
}

pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// Middle-third Cantor measure: the law of Σ ε_n / 3ⁿ with fair signs ε_n = ±1,
/// the invariant measure of λ ↦ (λ ± 1)/3. Supported in [-1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorPart {
    pub weight: f64,
}

impl CantorPart {
    pub const SUPPORT: (f64, f64) = (-0.5, 0.5);
    pub const VARIANCE: f64 = 0.125;

    /// Angular characteristic function Π cos(x / 3ⁿ).
    pub fn transform(&self, x: f64, n_terms: usize) -> f64 {
        self.weight * cantor_char(x / (2.0 * PI), n_terms)
    }
}

/// Π_{n=1}^{n_terms} cos(2π x / 3ⁿ)
pub fn cantor_char(x: f64, n_terms: usize) -> f64 {
    let mut p = 1.0;
    let mut s = 2.0 * PI * x;
    for _ in 0..n_terms {
        s /= 3.0;
        p *= s.cos();
    }
    p
}

/// E g(X) for X distributed by the Cantor measure, approximated over the
/// 2^14 cylinders of depth 14 (each of width 3^{-14}).
pub fn cantor_expectation(g: &(dyn Fn(f64) -> Complex64 + Sync)) -> Complex64 {
    let depth = 14u32;
    let n = 1usize << depth;
    let total: Complex64 = (0..n)
        .map(|bits| {
            let mut x = 0.0;
            let mut scale = 1.0;
            for k in 0..depth {
                scale /= 3.0;
                x += if bits >> k & 1 == 1 { scale } else { -scale };
            }
            g(x)
        })
        .sum();
    total / n as f64
}

/// Tuning for Bochner integrals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadSpec {
    pub adaptive: Adaptive,
    /// Heavy-tailed densities are integrated adaptively on [-R, R] and by
    /// panel marching beyond.
    pub core_radius: f64,
    pub tail_tol: f64,
    pub max_lambda: f64,
    pub max_panels: usize,
    pub cantor_terms: usize,
    /// Use the known transform of a density family instead of quadrature.
    pub prefer_closed_forms: bool,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            adaptive: Adaptive::default(),
            core_radius: 64.0,
            tail_tol: 1e-10,
            max_lambda: 1e13,
            max_panels: 50_000_000,
            cantor_terms: 40,
            prefer_closed_forms: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<Density>,
    pub cantor: Option<CantorPart>,
}

impl SpectralMeasure {
    pub fn atoms(atoms: Vec<Atom>) -> Self {
        SpectralMeasure { atoms, ..Default::default() }
    }

    pub fn density(d: Density) -> Self {
        SpectralMeasure { density: Some(d), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.w > 0.0) || !a.loc.is_finite() {
                return Err(Error::Invalid(format!("atom weight must be positive: {a:?}")));
            }
        }
        if let Some(d) = &self.density {
            if !(d.weight > 0.0) {
                return Err(Error::Invalid("density weight must be positive".into()));
            }
            let ok = match &d.kind {
                DensityKind::Cauchy { scale } | DensityKind::Laplace { scale } => *scale > 0.0,
                DensityKind::Gaussian { sigma } => *sigma > 0.0,
                DensityKind::Fejer { width } => *width > 0.0,
                DensityKind::Triangle { half_width } => *half_width > 0.0,
                DensityKind::Indicator { lo, hi } => hi > lo,
                DensityKind::Table { points } => {
                    points.len() >= 2
                        && points.windows(2).all(|p| p[1].0 > p[0].0)
                        && points.iter().all(|p| p.1 >= 0.0)
                }
                DensityKind::Custom(_) => true,
            };
            if !ok {
                return Err(Error::Invalid(format!("bad density parameters: {:?}", d.kind)));
            }
        }
        if let Some(c) = &self.cantor {
            if !(c.weight > 0.0) {
                return Err(Error::Invalid("cantor weight must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>()
            + self.density.as_ref().and_then(|d| d.analytic_mass()).unwrap_or(0.0)
            + self.cantor.map(|c| c.weight).unwrap_or(0.0)
    }

    /// Total mass with the density integrated numerically.
    pub fn quadrature_mass(&self, quad: &QuadSpec) -> Result<f64> {
        let d = match &self.density {
            Some(d) => d.quadrature_mass(quad)?,
            None => 0.0,
        };
        Ok(self.atoms.iter().map(|a| a.w).sum::<f64>() + d + self.cantor.map(|c| c.weight).unwrap_or(0.0))
    }

    /// Supports of the three kinds of components, as closed intervals.
    pub fn component_supports(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.loc, a.loc)).collect();
        if let Some(c) = &self.cantor {
            let _ = c;
            v.push(CantorPart::SUPPORT);
        }
        if let Some(d) = &self.density {
            v.push(d.support());
        }
        v
    }

    /// Smallest gap between the component supports (negative if two overlap).
    pub fn support_separation(&self) -> f64 {
        let mut s = self.component_supports();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s.windows(2).map(|p| p[1].0 - p[0].1).fold(f64::INFINITY, f64::min)
    }

    /// F(x) = ∫ e^{iλx} dμ(λ)
    pub fn bochner(&self, x: f64, quad: &QuadSpec) -> Result<Complex64> {
        let mut s: Complex64 = self
            .atoms
            .iter()
            .map(|a| Complex64::new(0.0, a.loc * x).exp() * a.w)
            .sum();
        if let Some(d) = &self.density {
            s += d.fourier(x, quad)?;
        }
        if let Some(c) = &self.cantor {
            s += c.transform(x, quad.cantor_terms);
        }
        Ok(s)
    }

    /// Bochner samples evaluated in parallel.
    pub fn bochner_many(&self, xs: &[f64], quad: &QuadSpec) -> Result<Vec<Complex64>> {
        xs.par_iter().map(|&x| self.bochner(x, quad)).collect()
    }

    /// ∫ g dμ for a bounded weight g, where `g_bound(R)` bounds |g| on |λ| ≥ R.
    /// Returns the value and a bound on the part of a heavy-tailed density
    /// left outside the quadrature window.
    pub fn integrate(
        &self,
        g: &(dyn Fn(f64) -> f64 + Sync),
        g_bound: &dyn Fn(f64) -> f64,
        quad: &QuadSpec,
    ) -> Result<(f64, f64)> {
        let (lo, hi) = match &self.density {
            Some(d) => d.core(quad.core_radius),
            None => (0.0, 0.0),
        };
        let width = 2.0 * PI / (self.density.as_ref().map(|d| d.oscillation()).unwrap_or(0.0) + 1.0);
        let (v, _) = self.integrate_window(&|l| Complex64::new(g(l), 0.0), (lo, hi), width.min(8.0), &[], quad)?;
        let mut err = 0.0;
        if let Some(d) = &self.density {
            if d.heavy() {
                let tau = d.tail_power();
                let (slo, shi) = d.support();
                if !shi.is_finite() {
                    err += g_bound(hi) * d.envelope(hi) * hi / (tau - 1.0);
                }
                if !slo.is_finite() {
                    err += g_bound(-lo) * d.envelope(lo) * lo.abs() / (tau - 1.0);
                }
            }
        }
        Ok((v.re, err))
    }

    /// ∫ g dμ with the density restricted to `window` (intersected with its
    /// support) and integrated adaptively on panels no wider than `width`,
    /// aligned with the density's breakpoints and the extra `breaks`. The
    /// Cantor part is integrated over its 2^14 level-14 cylinders, each
    /// represented by its centre. Returns the value and the density mass
    /// outside the window.
    pub fn integrate_window(
        &self,
        g: &(dyn Fn(f64) -> Complex64 + Sync),
        window: (f64, f64),
        width: f64,
        breaks: &[f64],
        quad: &QuadSpec,
    ) -> Result<(Complex64, f64)> {
        let mut s: Complex64 = self.atoms.iter().map(|a| g(a.loc) * a.w).sum();
        let mut outside = 0.0;
        if let Some(d) = &self.density {
            let (slo, shi) = d.support();
            let lo = slo.max(window.0);
            let hi = shi.min(window.1);
            if hi > lo {
                let mut br = vec![lo];
                br.extend(d.breaks().into_iter().chain(breaks.iter().copied()).filter(|&b| b > lo && b < hi));
                br.push(hi);
                br.sort_by(f64::total_cmp);
                br.dedup();
                s += quad.adaptive.integrate(&br, width, |l| g(l) * d.value(l))?;
            }
            if d.heavy() {
                let tau = d.tail_power();
                if !shi.is_finite() && window.1 > 0.0 {
                    outside += d.envelope(window.1) * window.1 / (tau - 1.0);
                }
                if !slo.is_finite() && window.0 < 0.0 {
                    outside += d.envelope(window.0) * window.0.abs() / (tau - 1.0);
                }
            }
        }
        if let Some(c) = &self.cantor {
            s += cantor_expectation(g) * c.weight;
        }
        Ok((s, outside))
    }

    /// ∫_{|λ|≤R} λ² dμ. The Cantor part enters in full once R covers its support.
    pub fn truncated_second_moment(&self, r: f64, quad: &QuadSpec) -> Result<f64> {
        let a: f64 = self.atoms.iter().filter(|a| a.loc.abs() <= r).map(|a| a.w * a.loc * a.loc).sum();
        let c = match &self.cantor {
            Some(c) if r >= 0.5 => c.weight * CantorPart::VARIANCE,
            _ => 0.0,
        };
        let d = match &self.density {
            Some(d) => d.truncated_second_moment(r, quad)?,
            None => 0.0,
        };
        Ok(a + c + d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentBasis {
    DeclaredTail,
    SlopeHeuristic,
}

pub type Indices = (u8, u8);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub second_moment_finite: Finiteness,
    pub ladder: Vec<(f64, f64)>,
    /// `None` when the classification is inconclusive.
    pub predicted_indices: Option<Indices>,
    pub basis: MomentBasis,
    pub slope: Option<f64>,
}

pub const SLOPE_MARGIN: f64 = 0.2;

/// Decide whether ∫ λ² dμ is finite. A declared tail exponent τ decides it
/// (finite iff τ > 3); otherwise the log-log slope of the per-unit-radius
/// ladder increments is used, with an inconclusive band around -1.
pub fn second_moment_classify(mu: &SpectralMeasure, radii: &[f64], quad: &QuadSpec) -> Result<MomentReport> {
    if radii.len() < 4 || radii.windows(2).any(|p| p[1] <= p[0]) || radii[0] <= 0.0 {
        return Err(Error::Invalid("ladder needs at least 4 strictly increasing positive radii".into()));
    }
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&r| mu.truncated_second_moment(r, quad))
        .collect::<Result<_>>()?;
    let mut ladder: Vec<(f64, f64)> = radii.iter().copied().zip(values).collect();
    for k in 1..ladder.len() {
        // rungs are independent quadratures; clamp round-off so the ladder is monotone
        if ladder[k].1 < ladder[k - 1].1 {
            ladder[k].1 = ladder[k - 1].1;
        }
    }
    let (finiteness, basis, slope) = match mu.density.as_ref().map(|d| d.tail) {
        None => (Finiteness::Finite, MomentBasis::DeclaredTail, None),
        Some(Some(tau)) => (
            if tau > 3.0 { Finiteness::Finite } else { Finiteness::Divergent },
            MomentBasis::DeclaredTail,
            None,
        ),
        Some(None) => {
            let (f, s) = slope_verdict(&ladder);
            (f, MomentBasis::SlopeHeuristic, s)
        }
    };
    let predicted_indices = match finiteness {
        Finiteness::Finite => Some((0, 0)),
        Finiteness::Divergent => Some((1, 1)),
        Finiteness::Inconclusive => None,
    };
    Ok(MomentReport { second_moment_finite: finiteness, ladder, predicted_indices, basis, slope })
}

fn slope_verdict(ladder: &[(f64, f64)]) -> (Finiteness, Option<f64>) {
    let top = ladder.last().map(|p| p.1).unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = ladder
        .windows(2)
        .filter_map(|p| {
            let d = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
            (d > 1e-13 * top.max(f64::MIN_POSITIVE)).then(|| ((0.5 * (p[0].0 + p[1].0)).ln(), d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return (Finiteness::Finite, None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let f = if slope <= -1.0 - SLOPE_MARGIN {
        Finiteness::Finite
    } else if slope >= -1.0 + SLOPE_MARGIN {
        Finiteness::Divergent
    } else {
        Finiteness::Inconclusive
    };
    (f, Some(slope))
}

/// The measure (δ₋₁ + μ_Cantor + χ_{[1,2]} dλ) / 3.
pub fn splitting_measure() -> SpectralMeasure {
    SpectralMeasure {
        atoms: vec![Atom { loc: -1.0, w: 1.0 / 3.0 }],
        density: Some(Density::new(DensityKind::Indicator { lo: 1.0, hi: 2.0 }).weighted(1.0 / 3.0)),
        cantor: Some(CantorPart { weight: 1.0 / 3.0 }),
    }
}

/// (e^{-ix} + Π cos(x/3ⁿ) + e^{3ix/2} sin(x/2)/(x/2)) / 3. The Cantor factor
/// is `cantor_char(x / 2π, n)`: with the 2π inside the cosine taken literally
/// the product would belong to a Cantor set on [-π, π], not [-1/2, 1/2].
pub fn splitting_f(x: f64, n_terms: usize) -> Complex64 {
    let e = Complex64::new(0.0, -x).exp();
    let c = cantor_char(x / (2.0 * PI), n_terms);
    let s = Complex64::new(0.0, 1.5 * x).exp() * sinc(0.5 * x);
    (e + c + s) / 3.0
}

/// The six reference measures used to illustrate the second-moment criterion.
pub mod table {
    use super::*;

    /// ½ e^{-|λ|}
    pub fn mu1() -> SpectralMeasure {
        SpectralMeasure::density(Density::new(DensityKind::Laplace { scale: 1.0 }))
    }
    /// (sin πλ / πλ)²
    pub fn mu2() -> SpectralMeasure {
        SpectralMeasure::density(Density::new(DensityKind::Fejer { width: 2.0 * PI }))
    }
    /// dλ / (π(1 + λ²))
    pub fn mu3() -> SpectralMeasure {
        SpectralMeasure::density(Density::new(DensityKind::Cauchy { scale: 1.0 }))
    }
    /// (1 - |λ|) on [-1, 1]
    pub fn mu4() -> SpectralMeasure {
        SpectralMeasure::density(Density::new(DensityKind::Triangle { half_width: 1.0 }))
    }
    /// standard Gaussian
    pub fn mu5() -> SpectralMeasure {
        SpectralMeasure::density(Density::new(DensityKind::Gaussian { sigma: 1.0 }))
    }
    /// ½(δ₁ + δ₋₁)
    pub fn mu6() -> SpectralMeasure {
        SpectralMeasure::atoms(vec![Atom { loc: 1.0, w: 0.5 }, Atom { loc: -1.0, w: 0.5 }])
    }
}

// ---------------------------------------------------------------- JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub cantor: Option<CantorPart>,
    #[serde(default)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensitySpec {
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    /// Number, or the strings "inf" / "none".
    #[serde(default)]
    pub tail: Option<serde_json::Value>,
}

fn param(p: &serde_json::Map<String, serde_json::Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match p.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| Error::Invalid(format!("param `{key}` must be a number"))),
        None => default.ok_or_else(|| Error::Invalid(format!("missing param `{key}`"))),
    }
}

impl MeasureSpec {
    pub fn build(&self) -> Result<SpectralMeasure> {
        let density = match &self.density {
            None => None,
            Some(ds) => {
                let p = &ds.params;
                let kind = match ds.kind.as_str() {
                    "cauchy" => DensityKind::Cauchy { scale: param(p, "scale", Some(1.0))? },
                    "gaussian" => DensityKind::Gaussian { sigma: param(p, "sigma", Some(1.0))? },
                    "fejer" => DensityKind::Fejer { width: param(p, "width", Some(1.0))? },
                    "laplace" => DensityKind::Laplace { scale: param(p, "scale", Some(1.0))? },
                    "triangle" => DensityKind::Triangle { half_width: param(p, "half_width", Some(1.0))? },
                    "indicator" => DensityKind::Indicator { lo: param(p, "lo", None)?, hi: param(p, "hi", None)? },
                    "table" => {
                        let pts = p
                            .get("points")
                            .and_then(|v| v.as_array())
                            .ok_or_else(|| Error::Invalid("table density needs `points`".into()))?;
                        let mut points = Vec::with_capacity(pts.len());
                        for q in pts {
                            let pair = q.as_array().filter(|a| a.len() == 2);
                            let pair = pair.ok_or_else(|| Error::Invalid("table points are [λ, M] pairs".into()))?;
                            let l = pair[0].as_f64();
                            let m = pair[1].as_f64();
                            match (l, m) {
                                (Some(l), Some(m)) => points.push((l, m)),
                                _ => return Err(Error::Invalid("table points must be numbers".into())),
                            }
                        }
                        DensityKind::Table { points }
                    }
                    other => return Err(Error::Invalid(format!("unknown density kind `{other}`"))),
                };
                let mut d = Density::new(kind).weighted(param(p, "weight", Some(1.0))?);
                match &ds.tail {
                    None => {}
                    Some(serde_json::Value::String(s)) if s == "inf" => d.tail = Some(f64::INFINITY),
                    Some(serde_json::Value::String(s)) if s == "none" => d.tail = None,
                    Some(serde_json::Value::Null) => d.tail = None,
                    Some(v) => {
                        d.tail = Some(v.as_f64().ok_or_else(|| Error::Invalid("tail must be a number".into()))?)
                    }
                }
                Some(d)
            }
        };
        let mu = SpectralMeasure { atoms: self.atoms.clone(), density, cantor: self.cantor };
        mu.validate()?;
        if let Some(m) = self.mass {
            let t = mu.total_mass();
            if (m - t).abs() > 1e-6 * t.abs().max(1.0) {
                return Err(Error::Invalid(format!("declared mass {m} differs from computed {t}")));
            }
        }
        Ok(mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_transform_matches_exponential() {
        let q = QuadSpec::default();
        let mu = table::mu3();
        for x in [0.0, 0.3, 1.0, -2.5] {
            let v = mu.bochner(x, &q).unwrap();
            assert!((v.re - (-f64::abs(x)).exp()).abs() < 1e-8, "x={x} v={v}");
            assert!(v.im.abs() < 1e-8);
        }
    }

    #[test]
    fn light_and_compact_families_match_their_transforms() {
        let q = QuadSpec::default();
        for mu in [table::mu1(), table::mu4(), table::mu5()] {
            let d = mu.density.as_ref().unwrap();
            for x in [0.0, 0.7, 3.0] {
                let num = mu.bochner(x, &q).unwrap();
                let exact = d.closed_fourier(x).unwrap();
                assert!((num - exact).norm() < 1e-10, "{:?} x={x}", d.kind);
            }
        }
    }

    #[test]
    fn two_atoms_give_cosine() {
        let q = QuadSpec::default();
        for x in [0.0, 0.4, 2.0] {
            let v = table::mu6().bochner(x, &q).unwrap();
            assert!((v.re - x.cos()).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn fejer_tail_marching_converges() {
        let q = QuadSpec { tail_tol: 1e-7, ..QuadSpec::default() };
        let mu = SpectralMeasure::density(Density::new(DensityKind::Fejer { width: 1.0 }));
        for x in [0.0, 0.25, 0.6] {
            let v = mu.bochner(x, &q).unwrap();
            assert!((v.re - (1.0 - x)).abs() < 1e-6, "x={x} v={v}");
        }
    }

    #[test]
    fn cantor_product_factorizes() {
        for x in [0.3, 1.7, -4.0] {
            for n in 1..12 {
                let lhs = cantor_char(x, n + 1);
                let rhs = (2.0 * PI * x / 3.0).cos() * cantor_char(x / 3.0, n);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
        assert_eq!(cantor_char(0.0, 30), 1.0);
    }

    #[test]
    fn splitting_matches_its_measure() {
        let q = QuadSpec { cantor_terms: 20, ..QuadSpec::default() };
        let mu = splitting_measure();
        assert!((mu.total_mass() - 1.0).abs() < 1e-15);
        for x in [0.5, 1.0, -3.0] {
            let a = splitting_f(x, 20);
            let b = mu.bochner(x, &q).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
        assert!((splitting_f(0.0, 20) - 1.0).norm() < 1e-15);
        assert!(mu.support_separation() > 0.0);
    }

    #[test]
    fn table_measures_classify_as_expected() {
        let q = QuadSpec::default();
        let radii = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let expect = [(table::mu1(), (0, 0)), (table::mu2(), (1, 1)), (table::mu3(), (1, 1)), (table::mu4(), (0, 0)), (table::mu5(), (0, 0))];
        for (mu, idx) in expect {
            let r = second_moment_classify(&mu, &radii, &q).unwrap();
            assert_eq!(r.predicted_indices, Some(idx));
            assert!(r.ladder.windows(2).all(|p| p[1].1 >= p[0].1));
        }
    }

    #[test]
    fn slope_heuristic_agrees_with_declared_tails() {
        let q = QuadSpec::default();
        let radii = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let cases = [(table::mu1(), Finiteness::Finite), (table::mu2(), Finiteness::Divergent), (table::mu3(), Finiteness::Divergent), (table::mu4(), Finiteness::Finite), (table::mu5(), Finiteness::Finite)];
        for (mut mu, want) in cases {
            mu.density = mu.density.map(|d| d.without_tail());
            let r = second_moment_classify(&mu, &radii, &q).unwrap();
            assert_eq!(r.basis, MomentBasis::SlopeHeuristic);
            assert_eq!(r.second_moment_finite, want, "slope {:?}", r.slope);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"atoms":[{"loc":1.0,"w":0.25}],"density":{"kind":"cauchy","params":{"scale":1.0,"weight":0.75}},"mass":1.0}"#;
        let spec: MeasureSpec = serde_json::from_str(s).unwrap();
        let mu = spec.build().unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-15);
        let bad = r#"{"density":{"kind":"cauchy"},"mass":2.0}"#;
        let spec: MeasureSpec = serde_json::from_str(bad).unwrap();
        assert!(spec.build().is_err());
    }
}
