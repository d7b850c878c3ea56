//! Locally defined positive definite functions: the named catalog, Gram
//! matrices, the PSD test and the algebraic constructors (products, real and
//! imaginary parts, periodization).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, eigenvalues, CMatrix};
use crate::measures::{
    splitting_f, splitting_measure, sinc, Atom, CustomDensity, Density, DensityKind, SpectralMeasure,
};

pub const PSD_TOL: f64 = 1e-9;
pub const RANK_TOL: f64 = 1e-8;
/// Slack allowed when evaluating on the closed interval [-a, a].
const CLOSURE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    RealLine,
    /// ℝ/ℤ, represented on [-1/2, 1/2)
    Circle,
}

pub type Eval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct PdFunction {
    pub id: String,
    pub half_width: f64,
    pub is_real: bool,
    pub group: Group,
    /// F(0)
    pub normalization: f64,
    pub known_measure: Option<Arc<SpectralMeasure>>,
    eval: Eval,
    /// F'(x) for 0 < x < a, for real even F
    slope: Option<RealFn>,
}

impl std::fmt::Debug for PdFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdFunction")
            .field("id", &self.id)
            .field("half_width", &self.half_width)
            .field("is_real", &self.is_real)
            .field("group", &self.group)
            .finish()
    }
}

impl PdFunction {
    pub fn new(id: impl Into<String>, half_width: f64, group: Group, is_real: bool, eval: Eval) -> Self {
        let normalization = eval(0.0).re;
        PdFunction {
            id: id.into(),
            half_width,
            is_real,
            group,
            normalization,
            known_measure: None,
            eval,
            slope: None,
        }
    }

    pub fn with_measure(mut self, mu: SpectralMeasure) -> Self {
        self.known_measure = Some(Arc::new(mu));
        self
    }

    pub fn with_slope(mut self, slope: RealFn) -> Self {
        self.slope = Some(slope);
        self
    }

    fn reduce(&self, x: f64) -> f64 {
        match self.group {
            Group::RealLine => x,
            Group::Circle => x - (x + 0.5).floor(),
        }
    }

    /// F(x) on the open domain.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let x = self.reduce(x);
        if self.group == Group::RealLine && !(x.abs() < self.half_width) {
            return Err(Error::Domain { id: self.id.clone(), x, half_width: self.half_width });
        }
        Ok((self.eval)(x))
    }

    /// F(x) on the closed interval [-a, a], using the continuous extension at ±a.
    pub fn eval_closed(&self, x: f64) -> Result<Complex64> {
        let x = self.reduce(x);
        if self.group == Group::RealLine && x.abs() > self.half_width * (1.0 + CLOSURE_SLACK) {
            return Err(Error::Domain { id: self.id.clone(), x, half_width: self.half_width });
        }
        Ok((self.eval)(x.clamp(-self.half_width, self.half_width)))
    }

    /// Unchecked evaluation; the caller guarantees |x| ≤ a.
    pub fn value(&self, x: f64) -> Complex64 {
        (self.eval)(self.reduce(x))
    }

    pub fn evaluator(&self) -> Eval {
        self.eval.clone()
    }

    /// One-sided derivative F'(x) for 0 < x ≤ a (real even functions only).
    pub fn slope(&self, x: f64) -> Option<f64> {
        self.slope.as_ref().map(|s| s(x))
    }
}

/// Parameters for the parametrized catalog entries.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CatalogParams {
    /// exponent of F_p, 0 < p ≤ 1
    pub p: f64,
    /// half-width of the domain of e₁
    pub eps: f64,
}

impl Default for CatalogParams {
    fn default() -> Self {
        CatalogParams { p: 0.5, eps: 0.25 }
    }
}

pub const CATALOG_IDS: [&str; 10] = ["F1", "F2", "F3", "F4", "F5", "F6", "Fp", "e1", "im14", "splitting"];

fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Eval {
    Arc::new(move |x| Complex64::new(f(x), 0.0))
}

fn slope(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

pub fn catalog(id: &str) -> Result<PdFunction> {
    catalog_with(id, CatalogParams::default())
}

pub fn catalog_with(id: &str, params: CatalogParams) -> Result<PdFunction> {
    let f = match id {
        "F1" => PdFunction::new(id, 1.0, Group::RealLine, true, real(|x| 1.0 / (1.0 + x * x)))
            .with_slope(slope(|x| -2.0 * x / (1.0 + x * x).powi(2)))
            .with_measure(SpectralMeasure::density(Density::new(DensityKind::Laplace { scale: 1.0 }))),
        "F2" => PdFunction::new(id, 0.5, Group::RealLine, true, real(|x| 1.0 - x.abs()))
            .with_slope(slope(|_| -1.0))
            .with_measure(SpectralMeasure::density(Density::new(DensityKind::Fejer { width: 1.0 }))),
        "F3" => PdFunction::new(id, 1.0, Group::RealLine, true, real(|x| (-x.abs()).exp()))
            .with_slope(slope(|x| -(-x).exp()))
            .with_measure(SpectralMeasure::density(Density::new(DensityKind::Cauchy { scale: 1.0 }))),
        "F4" => PdFunction::new(id, 0.5, Group::RealLine, true, real(|x| sinc(PI * x).powi(2)))
            .with_slope(slope(|x| {
                let t = PI * x;
                let ds = if t.abs() < 1e-4 { -t / 3.0 } else { (t * t.cos() - t.sin()) / (t * t) };
                2.0 * sinc(t) * ds * PI
            }))
            .with_measure(SpectralMeasure::density(Density::new(DensityKind::Triangle { half_width: 2.0 * PI }))),
        "F5" => PdFunction::new(id, 1.0, Group::RealLine, true, real(|x| (-0.5 * x * x).exp()))
            .with_slope(slope(|x| -x * (-0.5 * x * x).exp()))
            .with_measure(SpectralMeasure::density(Density::new(DensityKind::Gaussian { sigma: 1.0 }))),
        "F6" => PdFunction::new(id, PI / 4.0, Group::RealLine, true, real(f64::cos))
            .with_slope(slope(|x| -x.sin()))
            .with_measure(SpectralMeasure::atoms(vec![Atom { loc: 1.0, w: 0.5 }, Atom { loc: -1.0, w: 0.5 }])),
        "Fp" => {
            let p = params.p;
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Invalid(format!("F_p needs 0 < p <= 1, got {p}")));
            }
            PdFunction::new(id, 0.5, Group::RealLine, true, real(move |x| 1.0 - x.abs().powf(p)))
                .with_slope(slope(move |x| -p * x.powf(p - 1.0)))
        }
        "e1" => {
            let eps = params.eps;
            if !(eps > 0.0) {
                return Err(Error::Invalid(format!("e1 needs eps > 0, got {eps}")));
            }
            PdFunction::new(id, eps, Group::RealLine, false, Arc::new(|x| Complex64::new(0.0, 2.0 * PI * x).exp()))
                .with_measure(SpectralMeasure::atoms(vec![Atom { loc: 2.0 * PI, w: 1.0 }]))
        }
        "im14" => PdFunction::new(
            id,
            1.0,
            Group::RealLine,
            false,
            Arc::new(|x| Complex64::new(0.0, -x).exp() + 1.0 / Complex64::new(1.0, -x)),
        )
        .with_measure(SpectralMeasure {
            atoms: vec![Atom { loc: -1.0, w: 1.0 }],
            density: Some(one_sided_exponential()),
            cantor: None,
        }),
        "im5" => PdFunction::new(
            id,
            f64::INFINITY,
            Group::RealLine,
            false,
            Arc::new(|x| 0.5 * (Complex64::new(0.0, -x).exp() + Complex64::new(0.0, 2.0 * x).exp())),
        )
        .with_measure(SpectralMeasure::atoms(vec![Atom { loc: -1.0, w: 0.5 }, Atom { loc: 2.0, w: 0.5 }])),
        "splitting" => PdFunction::new(id, f64::INFINITY, Group::RealLine, false, Arc::new(|x| splitting_f(x, 40)))
            .with_measure(splitting_measure()),
        other => return Err(Error::UnknownId(other.to_string())),
    };
    Ok(f)
}

/// e^{-λ} on λ > 0; its transform is 1/(1 - ix).
fn one_sided_exponential() -> Density {
    Density::new(DensityKind::Custom(CustomDensity {
        name: "one_sided_exp".into(),
        f: Arc::new(|l| if l >= 0.0 { (-l).exp() } else { 0.0 }),
        support: (0.0, 40.0),
        breaks: vec![],
        envelope: Arc::new(|l| (-l.abs()).exp()),
        oscillation: 0.0,
        monotone_tail: true,
        mass: Some(1.0 - (-40f64).exp()),
    }))
}

pub fn catalog_eval(id: &str, x: f64) -> Result<Complex64> {
    catalog(id)?.eval(x)
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub points: Vec<f64>,
    pub entries: CMatrix,
    pub source: String,
}

fn check_points(points: &[f64], lo: f64, hi: f64) -> Result<()> {
    for (i, &p) in points.iter().enumerate() {
        if !(p >= lo && p < hi) {
            return Err(Error::PointOutside(p));
        }
        if i > 0 && points[i - 1] >= p {
            return Err(Error::PointOrder(i));
        }
    }
    Ok(())
}

/// (F(x_i - x_j)) for sorted distinct points in [0, a).
pub fn gram(f: &PdFunction, points: &[f64]) -> Result<GramMatrix> {
    let hi = match f.group {
        Group::RealLine => f.half_width,
        Group::Circle => 1.0,
    };
    check_points(points, 0.0, hi)?;
    let n = points.len();
    let rows: Vec<Vec<Complex64>> = points
        .par_iter()
        .map(|&xi| points.iter().map(|&xj| f.value(xi - xj)).collect())
        .collect();
    let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(GramMatrix { points: points.to_vec(), entries, source: f.id.clone() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub numerical_rank: usize,
    pub spectral_radius: f64,
    pub eigenvalues: Vec<f64>,
}

/// PSD test with a relative tolerance: min eigenvalue ≥ -tol · spectral radius.
pub fn psd_check(g: &GramMatrix, tol: f64) -> Result<PsdReport> {
    psd_check_matrix(&g.entries, tol, RANK_TOL)
}

pub fn psd_check_matrix(m: &CMatrix, tol: f64, rank_tol: f64) -> Result<PsdReport> {
    let asym = asymmetry(m);
    if asym > 1e-12 {
        return Err(Error::NotHermitian(asym));
    }
    let ev = eigenvalues(m)?;
    let radius = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let top = ev.first().copied().unwrap_or(0.0);
    let min = ev.last().copied().unwrap_or(0.0);
    Ok(PsdReport {
        is_psd: min >= -tol * radius,
        min_eigenvalue: min,
        numerical_rank: ev.iter().filter(|&&v| v > rank_tol * top).count(),
        spectral_radius: radius,
        eigenvalues: ev,
    })
}

/// x ↦ F(x) G(x) on the intersection of the domains.
pub fn pointwise_product(f: &PdFunction, g: &PdFunction) -> Result<PdFunction> {
    if f.group != g.group {
        return Err(Error::GroupMismatch);
    }
    let (ef, eg) = (f.evaluator(), g.evaluator());
    let mut h = PdFunction::new(
        format!("{}*{}", f.id, g.id),
        f.half_width.min(g.half_width),
        f.group,
        f.is_real && g.is_real,
        Arc::new(move |x| ef(x) * eg(x)),
    );
    if let (Some(sf), Some(sg)) = (&f.slope, &g.slope) {
        let (ef, eg) = (f.evaluator(), g.evaluator());
        let (sf, sg) = (sf.clone(), sg.clone());
        h.slope = Some(Arc::new(move |x| sf(x) * eg(x).re + ef(x).re * sg(x)));
    }
    Ok(h)
}

/// Odd real function x ↦ Im F(x).
#[derive(Clone)]
pub struct ImagPart {
    f: Eval,
}

impl ImagPart {
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x).im
    }
}

pub struct Split {
    pub re: PdFunction,
    pub im: ImagPart,
}

pub fn real_imag_split(f: &PdFunction) -> Split {
    let e = f.evaluator();
    let mut re = PdFunction::new(
        format!("Re({})", f.id),
        f.half_width,
        f.group,
        true,
        Arc::new(move |x| Complex64::new(e(x).re, 0.0)),
    );
    re.slope = f.slope.clone();
    Split { re, im: ImagPart { f: f.evaluator() } }
}

/// F_m = Re F + i m Im F. Positive definite for |m| ≤ 1; larger |m| may fail.
pub fn scale_imag(f: &PdFunction, m: f64) -> PdFunction {
    let e = f.evaluator();
    let mut h = PdFunction::new(
        format!("{}[m={m}]", f.id),
        f.half_width,
        f.group,
        f.is_real || m == 0.0,
        Arc::new(move |x| {
            let v = e(x);
            Complex64::new(v.re, m * v.im)
        }),
    );
    h.slope = f.slope.clone();
    h
}

/// Decay bound |f(t)| ≤ A e^{-r|t|} or |f(t)| ≤ A |t|^{-p}, valid for |t| ≥ 1/2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    Exponential { amplitude: f64, rate: f64 },
    Power { amplitude: f64, exponent: f64 },
}

impl Decay {
    /// Bound on Σ_{|n|>N} |f(t - n)| uniformly for |t| ≤ 1/2.
    pub fn tail_bound(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            Decay::Exponential { amplitude, rate } => {
                2.0 * amplitude * (-rate * (nf + 0.5)).exp() / (1.0 - (-rate).exp())
            }
            Decay::Power { amplitude, exponent } => {
                if exponent <= 1.0 || n == 0 {
                    f64::INFINITY
                } else {
                    2.0 * amplitude * (nf - 0.5).powf(1.0 - exponent) / (exponent - 1.0)
                }
            }
        }
    }
}

/// t ↦ Σ_{|n|≤N} f(t - n), a function on ℝ/ℤ.
pub fn periodize(
    id: impl Into<String>,
    f: RealFn,
    decay: Decay,
    n_terms: usize,
    tol: f64,
) -> Result<PdFunction> {
    let bound = decay.tail_bound(n_terms);
    if !(bound <= tol) {
        return Err(Error::Convergence(format!(
            "{n_terms} translates leave a tail bound of {bound:e} > {tol:e}"
        )));
    }
    let n = n_terms as i64;
    let eval: Eval = Arc::new(move |t| {
        // sum small terms first
        let mut s = 0.0;
        for k in (1..=n).rev() {
            s += f(t - k as f64) + f(t + k as f64);
        }
        Complex64::new(s + f(t), 0.0)
    });
    Ok(PdFunction::new(id, 0.5, Group::Circle, true, eval))
}

// ---------------------------------------------------------------- JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    ClosedForm,
    Samples,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: String,
    #[serde(default)]
    pub half_width: Option<f64>,
    pub kind: FunctionKind,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<PdFunction> {
        match self.kind {
            FunctionKind::ClosedForm => {
                let mut cp = CatalogParams::default();
                if let Some(p) = self.params.get("p").and_then(|v| v.as_f64()) {
                    cp.p = p;
                }
                if let Some(e) = self.params.get("eps").and_then(|v| v.as_f64()) {
                    cp.eps = e;
                }
                let mut f = catalog_with(&self.id, cp)?;
                if let Some(a) = self.half_width {
                    if !(a > 0.0 && a <= f.half_width) {
                        return Err(Error::Invalid(format!(
                            "half_width {a} must lie in (0, {}] for {}",
                            f.half_width, self.id
                        )));
                    }
                    f.half_width = a;
                }
                Ok(f)
            }
            FunctionKind::Samples => {
                let raw = self
                    .params
                    .get("samples")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::Invalid("sampled function needs `samples`".into()))?;
                let mut pts = Vec::with_capacity(raw.len());
                for r in raw {
                    let t: Option<Vec<f64>> = r.as_array().map(|a| a.iter().filter_map(|v| v.as_f64()).collect());
                    match t {
                        Some(v) if v.len() == 3 => pts.push((v[0], Complex64::new(v[1], v[2]))),
                        _ => return Err(Error::Invalid("samples are [x, re, im] triples".into())),
                    }
                }
                sampled(&self.id, &pts, self.half_width)
            }
        }
    }
}

/// Linear interpolation through samples at 0 = x₀ < x₁ < …, extended to
/// negative arguments by F(-x) = conj F(x).
pub fn sampled(id: &str, pts: &[(f64, Complex64)], half_width: Option<f64>) -> Result<PdFunction> {
    if pts.len() < 2 || pts[0].0 != 0.0 || pts.windows(2).any(|p| p[1].0 <= p[0].0) {
        return Err(Error::Invalid("samples must start at x = 0 and increase strictly".into()));
    }
    if pts[0].1.im != 0.0 {
        return Err(Error::Invalid("F(0) must be real".into()));
    }
    let last = pts[pts.len() - 1].0;
    let a = half_width.unwrap_or(last);
    if !(a > 0.0 && a <= last) {
        return Err(Error::Invalid(format!("half_width {a} exceeds sampled range {last}")));
    }
    let is_real = pts.iter().all(|p| p.1.im == 0.0);
    let table: Arc<Vec<(f64, Complex64)>> = Arc::new(pts.to_vec());
    let eval: Eval = Arc::new(move |x| {
        let ax = x.abs();
        let k = table.partition_point(|p| p.0 <= ax).clamp(1, table.len() - 1);
        let (x0, y0) = table[k - 1];
        let (x1, y1) = table[k];
        let v = y0 + (y1 - y0) * ((ax - x0) / (x1 - x0));
        if x < 0.0 {
            v.conj()
        } else {
            v
        }
    });
    Ok(PdFunction::new(id, a, Group::RealLine, is_real, eval))
}
