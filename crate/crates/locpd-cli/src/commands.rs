use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use locpd::catalog::{catalog, gram, psd_check_matrix, real_imag_split, FunctionSpec, PdFunction};
use locpd::extension::{
    convexity_check, convexity_grid, default_lambda_grid, extension_density, pd_verify, polya_spline,
    shannon_ext_check, SplineExtension, SplineMode,
};
use locpd::gp::{empirical_cov, empirical_mean, simulate_bm, simulate_bridge, simulate_ou, uniform_grid, PathSet, Scheme};
use locpd::linalg::CMatrix;
use locpd::measures::{table, MeasureSpec, QuadSpec, SpectralMeasure};
use locpd::mercer::{discretize, spectrum, Kernel, MinKernel};
use locpd::quadrature::Rule;
use locpd::rkhs::{deficiency_classify, midpoint_grids, ordering_constant, Verdict};

use crate::output::{float, float_row, Series};
use crate::CliError;

/// What a command hands back for writing.
pub struct Report {
    pub result: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Plot,
    /// false when the verdict could not be decided
    pub conclusive: bool,
    pub summary: String,
}

pub struct Plot {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
}

fn headers(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

// ------------------------------------------------------------ kernel specs

enum Resolved {
    Function(PdFunction),
    Min,
    Extension(SplineExtension),
}

impl Resolved {
    fn kernel(&self) -> &dyn Kernel {
        match self {
            Resolved::Function(f) => f,
            Resolved::Min => &MinKernel,
            Resolved::Extension(e) => e,
        }
    }

    /// Natural interval length: the domain of F, the extension support, or 1 for E.
    fn interval(&self) -> f64 {
        match self {
            Resolved::Function(f) => f.half_width,
            Resolved::Min => 1.0,
            Resolved::Extension(e) => e.c,
        }
    }

    fn name(&self) -> String {
        match self {
            Resolved::Function(f) => f.id.clone(),
            Resolved::Min => "E".into(),
            Resolved::Extension(e) => format!("{}ext", e.base),
        }
    }
}

fn load_function(spec: &str) -> Result<PdFunction, CliError> {
    if spec.ends_with(".json") || Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
        let fs: FunctionSpec =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
        return Ok(fs.build()?);
    }
    Ok(catalog(spec)?)
}

/// `E`, `<id>ext` (Polya extension of a catalog entry), a catalog id or a JSON function file.
fn resolve(spec: &str, c: f64, mode: &str) -> Result<Resolved, CliError> {
    if spec == "E" {
        return Ok(Resolved::Min);
    }
    if let Some(base) = spec.strip_suffix("ext") {
        if !base.is_empty() && !Path::new(spec).is_file() {
            let mode: SplineMode = mode.parse()?;
            return Ok(Resolved::Extension(polya_spline(&load_function(base)?, c, mode)?));
        }
    }
    Ok(Resolved::Function(load_function(spec)?))
}

fn load_measure(spec: &str) -> Result<SpectralMeasure, CliError> {
    let named = match spec {
        "mu1" => Some(table::mu1()),
        "mu2" => Some(table::mu2()),
        "mu3" => Some(table::mu3()),
        "mu4" => Some(table::mu4()),
        "mu5" => Some(table::mu5()),
        "mu6" => Some(table::mu6()),
        _ => None,
    };
    if let Some(m) = named {
        return Ok(m);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
    let ms: MeasureSpec = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
    Ok(ms.build()?)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

/// `0,0.39,0.65` or `n@uniform` (n points i·a/n on [0, a)).
fn parse_points(s: &str, a: f64) -> Result<Vec<f64>, CliError> {
    if let Some(n) = s.strip_suffix("@uniform") {
        let n: usize = n.trim().parse().map_err(|_| CliError::Config(format!("bad point count in {s:?}")))?;
        if n == 0 || !a.is_finite() {
            return Err(CliError::Config(format!("cannot place {n} uniform points on an interval of length {a}")));
        }
        return Ok((0..n).map(|i| a * i as f64 / n as f64).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad point {t:?}"))))
        .collect()
}

// ------------------------------------------------------------------ analyze

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeArgs {
    /// Catalog id, `E`, `<id>ext` or a JSON function file
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    /// Comma list or `n@uniform`
    #[arg(long, default_value = "16@uniform")]
    pub points: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Support end of a Polya extension
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value = "single_segment")]
    pub mode: String,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Report, CliError> {
    positive("tol", a.tol)?;
    positive("rank_tol", a.rank_tol)?;
    let r = resolve(&a.function, a.c, &a.mode)?;
    let pts = parse_points(&a.points, r.interval())?;
    let (report, real_part) = match &r {
        Resolved::Function(f) => {
            let g = gram(f, &pts)?;
            let rep = psd_check_matrix(&g.entries, a.tol, a.rank_tol)?;
            let re = if f.is_real {
                None
            } else {
                let s = real_imag_split(f);
                Some(psd_check_matrix(&gram(&s.re, &pts)?.entries, a.tol, a.rank_tol)?)
            };
            (rep, re)
        }
        _ => {
            let k = r.kernel();
            let n = pts.len();
            let m = CMatrix::from_fn(n, n, |i, j| k.k(pts[i], pts[j]));
            (psd_check_matrix(&m, a.tol, a.rank_tol)?, None)
        }
    };
    let rows = report.eigenvalues.iter().enumerate().map(|(i, &v)| vec![(i + 1).to_string(), float(v)]).collect();
    let series = vec![Series {
        label: "eigenvalue".into(),
        points: report.eigenvalues.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect(),
    }];
    Ok(Report {
        summary: format!("{}: is_psd {} rank {}", r.name(), report.is_psd, report.numerical_rank),
        result: json!({
            "function": r.name(),
            "points": pts,
            "is_psd": report.is_psd,
            "rank": report.numerical_rank,
            "min_eigenvalue": report.min_eigenvalue,
            "spectral_radius": report.spectral_radius,
            "eigenvalues": report.eigenvalues,
            "real_part": real_part,
        }),
        header: headers(&["index", "eigenvalue"]),
        rows,
        plot: Plot {
            title: format!("Gram eigenvalues of {}", r.name()),
            xlabel: "index".into(),
            ylabel: "eigenvalue".into(),
            series,
        },
        conclusive: true,
    })
}

// ----------------------------------------------------------------- spectrum

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    /// Interval length; defaults to the natural interval of the kernel
    #[arg(long)]
    pub a: Option<f64>,
    /// Number of quadrature nodes
    #[arg(long, visible_alias = "N", default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value = "gauss")]
    pub rule: String,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value = "single_segment")]
    pub mode: String,
}

pub fn spectrum_cmd(a: &SpectrumArgs) -> Result<Report, CliError> {
    let r = resolve(&a.function, a.c, &a.mode)?;
    let len = a.a.unwrap_or(r.interval());
    positive("a", len)?;
    let rule: Rule = a.rule.parse()?;
    let s = spectrum(&discretize(r.kernel(), len, a.n, rule)?)?;
    let top: Vec<f64> = s.eigenvalues.iter().take(a.top).copied().collect();
    let sum: f64 = s.eigenvalues.iter().sum();
    let rows = s.eigenvalues.iter().enumerate().map(|(i, &v)| vec![(i + 1).to_string(), float(v)]).collect();
    let xs: Vec<f64> = (0..=200).map(|i| len * i as f64 / 200.0).collect();
    let series = (0..s.len().min(3))
        .map(|k| Series {
            label: format!("φ{} (λ = {:.6})", k + 1, s.eigenvalues[k]),
            points: xs.iter().map(|&x| (x, s.eigenfunction(k, x).re)).collect(),
        })
        .collect();
    Ok(Report {
        summary: format!("{} on (0, {len}): λ1 {:.12} trace {:.12}", r.name(), top.first().copied().unwrap_or(0.0), s.trace),
        result: json!({
            "kernel": r.name(),
            "a": len,
            "n": a.n,
            "rule": rule,
            "trace": s.trace,
            "eigenvalue_sum": sum,
            "top_eigenvalues": top,
            "retained": s.len(),
            "discarded": s.discarded,
        }),
        header: headers(&["index", "eigenvalue"]),
        rows,
        plot: Plot {
            title: format!("Leading eigenfunctions of T_{} on (0, {len})", r.name()),
            xlabel: "x".into(),
            ylabel: "Re φ".into(),
            series,
        },
        conclusive: true,
    })
}

// ------------------------------------------------------------------- extend

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value = "single_segment")]
    pub mode: String,
    /// Points per unit piece in the convexity scan
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

pub fn extend(a: &ExtendArgs) -> Result<Report, CliError> {
    positive("tol", a.tol)?;
    let mode: SplineMode = a.mode.parse()?;
    let e = polya_spline(&load_function(&a.function)?, a.c, mode)?;
    let conv = convexity_check(&e, &convexity_grid(&e, a.grid));
    let d = extension_density(&e, &default_lambda_grid(e.c));
    let ok = pd_verify(&d, a.tol);
    let rows = d.lambda.iter().zip(&d.values).map(|(&l, &v)| float_row(&[l, v])).collect();
    let series = vec![Series {
        label: "Φ(λ)".into(),
        points: d.lambda.iter().copied().zip(d.values.iter().copied()).collect(),
    }];
    Ok(Report {
        summary: format!(
            "{}ext on [-{}, {}]: convex {} min Φ {:.6e} pd_verified {ok}",
            e.base, e.c, e.c, conv.convex_on_positive, d.min_value
        ),
        result: json!({
            "extension": &e,
            "slopes": e.slopes(),
            "convexity": conv,
            "density": {
                "min_value": d.min_value,
                "argmin": d.argmin,
                "analytic": d.analytic,
                "tail_constant": d.tail_constant,
                "tail_bound": d.tail_bound,
                "lambda_max": d.lambda.last(),
                "at_zero": e.density(0.0),
            },
            "pd_verified": ok,
        }),
        header: headers(&["lambda", "phi"]),
        rows,
        plot: Plot {
            title: format!("Spectral density of the extension of {}", e.base),
            xlabel: "λ".into(),
            ylabel: "Φ(λ)".into(),
            series,
        },
        conclusive: true,
    })
}

// ---------------------------------------------------------------- check-ext

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckExtArgs {
    /// mu1 … mu6 or a JSON measure file
    #[arg(long)]
    pub measure: String,
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    /// Sample points in (-1, 1)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_value = "0,0.25,-0.25,0.5,-0.5,0.9,-0.9")]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 2048)]
    pub n_cut: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

pub fn check_ext(a: &CheckExtArgs) -> Result<Report, CliError> {
    positive("tol", a.tol)?;
    let mu = load_measure(&a.measure)?;
    let f = load_function(&a.function)?;
    let r = shannon_ext_check(&mu, &f, &a.x, a.n_cut, a.tol)?;
    // a miss that the truncation bound could explain is not a rejection
    let verdict = if r.in_ext {
        "in_ext"
    } else if r.truncation_dominated && r.max_residual <= r.n_tail_bound {
        "inconclusive"
    } else {
        "rejected"
    };
    let rows = r.x.iter().zip(&r.residuals).map(|(&x, &v)| float_row(&[x, v])).collect();
    let mut pts: Vec<(f64, f64)> = r.x.iter().copied().zip(r.residuals.iter().copied()).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Report {
        summary: format!("{} vs {}: {verdict} (max residual {:.3e})", a.measure, f.id, r.max_residual),
        conclusive: verdict != "inconclusive",
        result: json!({ "measure": a.measure, "function": f.id, "verdict": verdict, "report": r }),
        header: headers(&["x", "residual"]),
        rows,
        plot: Plot {
            title: format!("Shannon residuals, {} against {}", a.measure, f.id),
            xlabel: "x".into(),
            ylabel: "residual".into(),
            series: vec![Series { label: format!("N = {}", a.n_cut), points: pts }],
        },
    })
}

// --------------------------------------------------------------- deficiency

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficiencyArgs {
    /// Comma list of ids; `F1..F6` expands to the range
    #[arg(long = "fn", default_value = "F1..F6")]
    #[serde(rename = "fn")]
    pub function: String,
    /// Hat-function grid sizes of the membership ladder
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub hats: Vec<usize>,
}

fn expand_ids(s: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let split = |t: &str| {
                let i = t.find(|c: char| c.is_ascii_digit()).unwrap_or(t.len());
                (t[..i].to_string(), t[i..].parse::<u32>().ok())
            };
            match (split(lo), split(hi)) {
                ((p, Some(a)), (q, Some(b))) if p == q && a <= b => out.extend((a..=b).map(|k| format!("{p}{k}"))),
                _ => return Err(CliError::Config(format!("bad id range {part:?}"))),
            }
        } else {
            out.push(part.to_string());
        }
    }
    Ok(out)
}

pub fn deficiency(a: &DeficiencyArgs) -> Result<Report, CliError> {
    let quad = QuadSpec::default();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut conclusive = true;
    for id in expand_ids(&a.function)? {
        let f = load_function(&id)?;
        let r = deficiency_classify(&f, &a.hats, &quad)?;
        let (p, m) = match r.indices {
            Some((p, m)) => (p.to_string(), m.to_string()),
            None => {
                conclusive = false;
                ("?".into(), "?".into())
            }
        };
        let basis = serde_json::to_value(r.basis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        rows.push(vec![f.id.clone(), p, m, basis]);
        reports.push(r);
    }
    let summary = rows.iter().map(|r| format!("{} ({},{})", r[0], r[1], r[2])).collect::<Vec<_>>().join(" ");
    let series = reports
        .iter()
        .map(|r| Series {
            label: format!("{} e^(-x)", r.f_id),
            points: r.evidence_plus.ladder.iter().map(|g| ((g.grid_size as f64).log2(), g.a0.log10())).collect(),
        })
        .collect();
    Ok(Report {
        summary,
        conclusive,
        result: json!({ "rows": reports }),
        header: headers(&["F_id", "n_plus", "n_minus", "basis"]),
        rows,
        plot: Plot {
            title: "Membership ladders of e^(-x)".into(),
            xlabel: "log2 grid size".into(),
            ylabel: "log10 A0".into(),
            series,
        },
    })
}

// -------------------------------------------------------------------- order

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderArgs {
    /// The kernel to be dominated
    #[arg(long)]
    pub k: String,
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    /// Interval length; defaults to the smaller natural interval
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value = "single_segment")]
    pub mode: String,
}

pub fn order(a: &OrderArgs) -> Result<Report, CliError> {
    let k = resolve(&a.k, a.c, &a.mode)?;
    let f = resolve(&a.function, a.c, &a.mode)?;
    let len = a.a.unwrap_or(k.interval().min(f.interval()));
    positive("a", len)?;
    if a.sizes.len() < 3 {
        return Err(CliError::Config("the ordering ladder needs at least 3 grid sizes".into()));
    }
    let r = ordering_constant(k.kernel(), f.kernel(), &midpoint_grids(len, &a.sizes))?;
    let rows = r.ladder.iter().map(|&(n, v)| vec![n.to_string(), float(v)]).collect();
    let series = vec![Series {
        label: format!("A({}, {})", k.name(), f.name()),
        points: r.ladder.iter().map(|&(n, v)| (n as f64, v)).collect(),
    }];
    Ok(Report {
        summary: format!("{} ≪ {}: {:?} (A = {:.9})", k.name(), f.name(), r.dominated, r.a_min),
        conclusive: r.dominated != Verdict::Inconclusive,
        result: json!({ "k": k.name(), "fn": f.name(), "a": len, "report": r }),
        header: headers(&["grid_size", "A"]),
        rows,
        plot: Plot {
            title: format!("Ordering constants for {} against {}", k.name(), f.name()),
            xlabel: "grid size".into(),
            ylabel: "A".into(),
            series,
        },
    })
}

// ----------------------------------------------------------------- simulate

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// bm, bridge or ou
    pub process: String,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Time steps; defaults to 20 (50 for ou)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Horizon; defaults to 1 (5 for ou)
    #[arg(long)]
    pub t_end: Option<f64>,
    /// exact or em
    #[arg(long, default_value = "exact")]
    pub scheme: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v0: f64,
    /// Covariance pairs as s:t
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    /// Times for the mean check
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Paths written to the CSV
    #[arg(long, default_value_t = 16)]
    pub csv_paths: usize,
}

fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("bad pair {s:?}, expected s:t"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn simulate(a: &SimulateArgs, seed: u64) -> Result<Report, CliError> {
    let scheme: Scheme = a.scheme.parse()?;
    let is_ou = a.process == "ou";
    let t_end = a.t_end.unwrap_or(if is_ou { 5.0 } else { 1.0 });
    positive("t_end", t_end)?;
    let steps = a.steps.unwrap_or(if is_ou { 50 } else { 20 });
    if steps == 0 {
        return Err(CliError::Config("steps must be positive".into()));
    }
    let grid = uniform_grid(t_end, steps);
    let (set, pairs, times): (PathSet, Vec<(f64, f64)>, Vec<f64>) = match a.process.as_str() {
        "bm" => (simulate_bm(&grid, a.paths, seed)?, vec![(0.2, 0.4), (0.5, 1.0), (1.0, 1.0)], vec![0.5, 1.0]),
        "bridge" => (
            simulate_bridge(&grid, a.paths, seed, scheme)?,
            vec![(0.25, 0.5), (0.3, 0.7), (0.5, 0.5)],
            vec![0.3, 0.7],
        ),
        "ou" => (
            simulate_ou(a.gamma, a.beta, a.v0, &grid, a.paths, seed, scheme)?,
            vec![(5.0, 5.0), (4.0, 5.0), (1.0, 1.0)],
            vec![1.0, 5.0],
        ),
        other => return Err(CliError::Config(format!("unknown process {other:?}; use bm, bridge or ou"))),
    };
    let pairs = match &a.pairs {
        Some(p) => p.iter().map(|s| parse_pair(s)).collect::<Result<_, _>>()?,
        None => pairs,
    };
    let times = a.times.clone().unwrap_or(times);
    let cov = empirical_cov(&set, &pairs)?;
    let mean = empirical_mean(&set, &times)?;
    let passes = cov.passes() && mean.passes();

    let k = set.len().min(a.csv_paths);
    let mut header = vec!["t".to_string()];
    header.extend((0..k).map(|i| format!("path_{i}")));
    let rows = set
        .times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut r = vec![float(t)];
            r.extend(set.paths[..k].iter().map(|p| float(p[j])));
            r
        })
        .collect();
    let series = (0..k.min(8))
        .map(|i| Series {
            label: format!("path {i}"),
            points: set.times.iter().copied().zip(set.paths[i].iter().copied()).collect(),
        })
        .collect();
    Ok(Report {
        summary: format!("{} with {} paths, seed {seed}: within {}σ bands {passes}", a.process, set.len(), locpd::gp::SIGMA_BAND),
        conclusive: passes,
        result: json!({
            "process": set.process,
            "scheme": set.scheme,
            "seed": seed,
            "n_paths": set.len(),
            "covariance": cov,
            "mean": mean,
            "passes": passes,
        }),
        header,
        rows,
        plot: Plot {
            title: format!("Sample paths ({})", a.process),
            xlabel: "t".into(),
            ylabel: "X_t".into(),
            series,
        },
    })
}
