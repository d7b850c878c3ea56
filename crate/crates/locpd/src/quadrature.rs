//! Quadrature rules: Gauss–Legendre nodes, uniform trapezoid, and an adaptive
//! composite Gauss–Legendre integrator that works on breakpoint-aligned panels.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Gauss,
    Trapezoid,
}

impl std::str::FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" => Ok(Rule::Gauss),
            "trapezoid" => Ok(Rule::Trapezoid),
            other => Err(Error::Invalid(format!("unknown quadrature rule `{other}`"))),
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        GaussRule { x, w }
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn on(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let xs = self.x.iter().map(|t| c + h * t).collect();
        let ws = self.w.iter().map(|w| h * w).collect();
        (xs, ws)
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        T: Accum,
        F: Fn(f64) -> T,
    {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = T::default();
        for (t, w) in self.x.iter().zip(&self.w) {
            s = s + f(c + h * t) * (h * w);
        }
        s
    }
}

/// Legendre polynomial P_n(z) and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

pub fn gl(n: usize) -> &'static GaussRule {
    static G16: OnceLock<GaussRule> = OnceLock::new();
    static G32: OnceLock<GaussRule> = OnceLock::new();
    static G64: OnceLock<GaussRule> = OnceLock::new();
    match n {
        16 => G16.get_or_init(|| GaussRule::new(16)),
        32 => G32.get_or_init(|| GaussRule::new(32)),
        64 => G64.get_or_init(|| GaussRule::new(64)),
        _ => panic!("no cached Gauss rule of order {n}"),
    }
}

/// `n` nodes on [a, b] under the given rule. The trapezoid rule includes both endpoints.
pub fn nodes(rule: Rule, a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        Rule::Gauss => GaussRule::new(n).on(a, b),
        Rule::Trapezoid => {
            let h = (b - a) / (n - 1) as f64;
            let xs = (0..n).map(|i| a + h * i as f64).collect();
            let ws = (0..n)
                .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect();
            (xs, ws)
        }
    }
}

pub trait Accum: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn mag(&self) -> f64;
}

impl Accum for f64 {
    fn mag(&self) -> f64 {
        self.abs()
    }
}

impl Accum for Complex64 {
    fn mag(&self) -> f64 {
        self.norm()
    }
}

/// Adaptive composite Gauss–Legendre: every panel is halved until two
/// successive totals agree to `rel_tol` (relative) or `abs_tol`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Adaptive {
    pub nodes_per_panel: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_halvings: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive { nodes_per_panel: 64, rel_tol: 1e-8, abs_tol: 1e-15, max_halvings: 10 }
    }
}

impl Adaptive {
    /// Integrate over `[breaks[0], breaks.last()]`. Panels never straddle a
    /// breakpoint, and start no wider than `max_width`.
    pub fn integrate<T, F>(&self, breaks: &[f64], max_width: f64, f: F) -> Result<T>
    where
        T: Accum,
        F: Fn(f64) -> T,
    {
        let rule = gl(self.nodes_per_panel);
        let mut panels: Vec<(f64, f64)> = Vec::new();
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b <= a {
                continue;
            }
            let k = ((b - a) / max_width).ceil().max(1.0) as usize;
            let h = (b - a) / k as f64;
            for i in 0..k {
                panels.push((a + h * i as f64, if i + 1 == k { b } else { a + h * (i + 1) as f64 }));
            }
        }
        let total = |ps: &[(f64, f64)]| {
            ps.iter().fold(T::default(), |acc, &(a, b)| acc + rule.integrate(a, b, &f))
        };
        let mut prev = total(&panels);
        for _ in 0..self.max_halvings {
            panels = panels
                .iter()
                .flat_map(|&(a, b)| {
                    let m = 0.5 * (a + b);
                    [(a, m), (m, b)]
                })
                .collect();
            let cur = total(&panels);
            let diff = (cur + prev * -1.0).mag();
            if diff <= self.rel_tol * cur.mag() + self.abs_tol {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::Resolution(format!(
            "no convergence after {} halvings over [{}, {}]",
            self.max_halvings,
            breaks.first().copied().unwrap_or(0.0),
            breaks.last().copied().unwrap_or(0.0)
        )))
    }
}
