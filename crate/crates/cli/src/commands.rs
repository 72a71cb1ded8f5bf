//! Subcommand implementations.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde_json::{json, Value};

use saddle_core::asymptotics::{estimate_sinf, expand_raw, expand_rescaled, TAIL_MODEL};
use saddle_core::borel::{
    borel_pade_laplace, deconvolve_singularity, default_pade_order, inequality_samplers, residual_yeqn,
    DEFAULT_CUTOFF_RATIO, DEFAULT_RAY_PANELS,
};
use saddle_core::contour::zero_contours;
use saddle_core::quadrature::half_line_integral;
use saddle_core::riccati;
use saddle_core::special::{
    beta_check, digamma, empirical_constant, gamma_ratio, log_gamma, EULER_GAMMA,
};
use saddle_core::system::{normalize as normal_form, normalized_to_json, parse_document};
use saddle_core::{
    DiscFunction, Expansion, InequalityKind, RawSystem, SamplerKind, SamplerParams, SinfMethod, System,
    TransformRecord,
};

use crate::meta::{emit, Meta};
use crate::{BorelArgs, ExpandArgs, Format, MethodArg, NormalizeArgs, ScanArgs, SinfArgs, VerifyArgs};

fn load(path: &Path) -> Result<(System, Option<TransformRecord>)> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_document(&text).with_context(|| format!("invalid system file {}", path.display()))
}

fn describe(meta: &mut Meta, path: &Path, sys: &System, order: usize) {
    let kind = match sys {
        System::Raw(_) => "raw",
        System::Normalized(_) => "normalized",
    };
    meta.set("input", path.display().to_string())
        .set("kind", kind)
        .set("a", sys.a())
        .set("order", order);
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, Value::from)
}

pub fn expand(args: &ExpandArgs) -> Result<()> {
    let (sys, _) = load(&args.input)?;
    if args.order < 2 {
        bail!("N must be at least 2, got {}", args.order);
    }
    let mut meta = Meta::new("expand");
    describe(&mut meta, &args.input, &sys, args.order);
    let exp = match &sys {
        System::Raw(raw) => {
            meta.set("recursion", "direct");
            expand_raw(raw, args.order)
        }
        System::Normalized(norm) => {
            meta.set("recursion", "rescaled");
            expand_rescaled(norm, args.order)?
        }
    };
    meta.set("cancellations", exp.cancellations())
        .set("noise_floor", exp.noise_floor());
    let text = match args.format {
        Format::Csv => meta.comment_lines() + &exp.to_csv(),
        Format::Json => {
            let rows: Vec<Value> = (1..=exp.n_max())
                .map(|n| {
                    let p = exp.phi(n);
                    json!({
                        "n": n,
                        "sign": p.sign(),
                        "log_abs_phi": if p.is_zero() { Value::Null } else { p.logmag().into() },
                        "s": opt(exp.s(n)),
                        "ds": opt(exp.ds(n)),
                    })
                })
                .collect();
            pretty(&json!({ "meta": meta.to_value(), "rows": rows }))
        }
    };
    emit(args.output.as_deref(), &text)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

pub fn sinf(args: &SinfArgs) -> Result<()> {
    if args.order < 10 {
        bail!("N too small: S∞ estimation needs N ≥ 10, got {}", args.order);
    }
    let (sys, _) = load(&args.input)?;
    let method = match args.method {
        MethodArg::Last => SinfMethod::LastTerm,
        MethodArg::Aitken => SinfMethod::Aitken,
    };
    let mut meta = Meta::new("sinf");
    describe(&mut meta, &args.input, &sys, args.order);
    let (exp, sign): (Expansion, f64) = match &sys {
        System::Raw(raw) => {
            let (exp, rec) = saddle_core::asymptotics::expand_via_normal_form(raw, args.order)?;
            meta.set("blow_up_exponent", rec.m)
                .set("a_normalized", rec.a_normalized);
            (exp, rec.limit_sign())
        }
        System::Normalized(norm) => (expand_rescaled(norm, args.order)?, 1.0),
    };
    let est = estimate_sinf(&exp, method)?;
    meta.set("tail_model", TAIL_MODEL);
    let out = json!({
        "value": sign * est.value,
        "error_estimate": est.error_estimate,
        "method": est.method.name(),
        "N": est.n_used,
        "meta": meta.to_value(),
    });
    emit(args.output.as_deref(), &pretty(&out))
}

pub fn scan(args: &ScanArgs) -> Result<()> {
    let workers = match args.workers {
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let (na, nb) = args.grid;
    let map = riccati::scan(args.a_range, args.b_range, na, nb, args.order, workers)?;
    let contours = zero_contours(&map);

    let mut meta = Meta::new("scan");
    meta.set("a_range", format!("{}:{}", args.a_range.0, args.a_range.1))
        .set("b_range", format!("{}:{}", args.b_range.0, args.b_range.1))
        .set("grid", format!("{na}x{nb}"))
        .set("order", args.order)
        .set("evaluation", "S_N through the normal form");
    let header = meta.comment_lines();

    let csv_path = with_suffix(&args.output, ".csv");
    let pgm_path = with_suffix(&args.output, ".pgm");
    let contour_path = with_suffix(&args.output, ".contours.csv");
    emit(Some(&csv_path), &(header.clone() + &map.to_csv()))?;
    let pgm = map.to_pgm();
    let (magic, body) = pgm.split_once('\n').expect("PGM starts with its magic line");
    emit(Some(&pgm_path), &format!("{magic}\n{header}{body}"))?;
    emit(Some(&contour_path), &(header + &contours.to_csv()))?;
    println!(
        "{na}x{nb} grid, {} contours: {}, {}, {}",
        contours.lines.len(),
        csv_path.display(),
        pgm_path.display(),
        contour_path.display()
    );
    Ok(())
}

pub fn normalize(args: &NormalizeArgs) -> Result<()> {
    let (sys, _) = load(&args.input)?;
    let System::Raw(raw) = sys else {
        bail!("{} already holds a normalized system", args.input.display());
    };
    let (norm, rec) = normal_form(&raw, args.order)?;
    let mut meta = Meta::new("normalize");
    meta.set("input", args.input.display().to_string())
        .set("order", args.order)
        .set("a_original", rec.a_original)
        .set("a_normalized", rec.a_normalized)
        .set("blow_up_exponent", rec.m);
    let mut doc: Value = serde_json::from_str(&normalized_to_json(&norm, Some(&rec)))?;
    doc.as_object_mut()
        .expect("documents are objects")
        .insert("meta".into(), meta.to_value());
    emit(args.output.as_deref(), &pretty(&doc))
}

/// Evaluation points for Borel-plane residuals: five on each of the circles
/// `|w| = 0.25` and `|w| = 0.5`.
fn residual_points() -> Vec<Complex64> {
    (0..10)
        .map(|k| {
            let r = if k < 5 { 0.25 } else { 0.5 };
            Complex64::from_polar(r, (2 * k + 1) as f64 * std::f64::consts::PI / 5.0)
        })
        .collect()
}

pub fn borel(args: &BorelArgs) -> Result<()> {
    let (sys, _) = load(&args.input)?;
    let mut meta = Meta::new("borel");
    describe(&mut meta, &args.input, &sys, args.order);
    let (exp, equation): (Expansion, RawSystem) = match &sys {
        System::Raw(raw) if args.normal_form => {
            let (norm, rec) = normal_form(raw, args.order.max(raw.blow_up_exponent() + 4))?;
            meta.set("normal_form", true)
                .set("a_normalized", rec.a_normalized)
                .set("blow_up_exponent", rec.m);
            (expand_rescaled(&norm, args.order)?, norm.to_raw())
        }
        System::Raw(raw) => (expand_raw(raw, args.order), raw.clone()),
        System::Normalized(norm) => (expand_rescaled(norm, args.order)?, norm.to_raw()),
    };
    let a = exp.a();
    let profile = deconvolve_singularity(&exp, a)?;
    let points = residual_points();
    let phi = DiscFunction::borel_of(&exp)?;
    let l_max = equation.f().max_y_degree();
    let residual = residual_yeqn(&equation, &phi, &points, args.panels, l_max)?;
    meta.set("panels", args.panels)
        .set("deconvolution_a", a)
        .set("sup_z", profile.sup_z)
        .set("max_residual", residual.max_residual)
        .set("residual_truncated", residual.truncated);
    let residuals: Vec<Value> = points
        .iter()
        .zip(&residual.per_point)
        .map(|(w, r)| json!({ "re": w.re, "im": w.im, "residual": r }))
        .collect();
    meta.set("residuals", residuals.clone());
    if let Some(x) = args.x {
        let order = args.pade_order.unwrap_or_else(|| default_pade_order(args.order));
        let sum = borel_pade_laplace(&exp, x, order, DEFAULT_RAY_PANELS, DEFAULT_CUTOFF_RATIO * x)?;
        meta.set("x", x).set("pade_order", order).set("borel_sum", sum);
    }
    let text = match args.format {
        Format::Csv => meta.comment_lines() + &profile.to_csv(),
        Format::Json => pretty(&json!({
            "meta": meta.to_value(),
            "phi": profile.phi,
            "z": profile.z,
            "sup_z": profile.sup_z,
            "residuals": residuals,
        })),
    };
    emit(args.output.as_deref(), &text)
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Deterministic low-discrepancy points in `[0.2, 5]²`.
fn beta_points(count: usize) -> Vec<(f64, f64)> {
    let (g1, g2) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);
    (1..=count)
        .map(|k| {
            let u = (k as f64 * g1).fract();
            let v = (k as f64 * g2).fract();
            (0.2 + 4.8 * u, 0.2 + 4.8 * v)
        })
        .collect()
}

fn run_checks(args: &VerifyArgs) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let params = SamplerParams {
        seed: args.seed,
        ..SamplerParams::default()
    };

    let lb = inequality_samplers(SamplerKind::LowerBound1, args.trials, &params)?;
    checks.push(Check {
        name: "lowerbound1",
        pass: lb.violations == 0,
        detail: format!("{} violations / {}", lb.violations, args.trials),
    });

    let emb = inequality_samplers(SamplerKind::Embedding, 1_000_000, &params)?;
    checks.push(Check {
        name: "embedding",
        pass: (7.5..=7.66).contains(&emb.extreme),
        detail: format!("grid max {:.5} in [7.5, 7.66]", emb.extreme),
    });

    let quarter = half_line_integral(|s| s / (1.0 + s.powi(4)), 256);
    let err = (quarter - std::f64::consts::FRAC_PI_4).abs();
    checks.push(Check {
        name: "quarter_pi",
        pass: err <= 1e-10,
        detail: format!("|∫₀^∞ s/(1+s⁴) ds − π/4| = {err:.2e} ≤ 1e-10"),
    });

    let mut worst = 0.0f64;
    for (x, y) in beta_points(20) {
        let (lhs, rhs) = beta_check(x, y, args.panels)?;
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    checks.push(Check {
        name: "beta",
        pass: worst <= 1e-8,
        detail: format!("20 points, max relative gap {worst:.2e} ≤ 1e-8"),
    });

    let mut worst = 0.0f64;
    for k in 0..=2990 {
        let x = 0.1 + 0.1 * k as f64;
        worst = worst.max((log_gamma(x + 1.0)? - log_gamma(x)? - x.ln()).abs());
    }
    checks.push(Check {
        name: "gamma_recurrence",
        pass: worst <= 1e-12,
        detail: format!("max |lnΓ(x+1) − lnΓ(x) − ln x| on [0.1, 300] = {worst:.2e} ≤ 1e-12"),
    });

    let mut increasing = true;
    let mut prev = digamma(0.05)?;
    for k in 1..=2000 {
        let next = digamma(0.05 + 0.05 * k as f64)?;
        increasing &= next > prev;
        prev = next;
    }
    let psi1 = (digamma(1.0)? + EULER_GAMMA).abs();
    checks.push(Check {
        name: "digamma",
        pass: increasing && psi1 <= 1e-10,
        detail: format!("increasing on [0.05, 100]: {increasing}, |ψ(1) + γ| = {psi1:.2e}"),
    });

    let stirling = (gamma_ratio(1e8, 2.5)? / 1e20 - 1.0).abs();
    checks.push(Check {
        name: "stirling",
        pass: stirling <= 1e-6,
        detail: format!("|Γ(x+2.5)/(Γ(x) x^2.5) − 1| at x = 1e8: {stirling:.2e} ≤ 1e-6"),
    });

    let mut stable = true;
    let mut parts = Vec::new();
    for b in [-1.5, 0.0, 2.0] {
        let c200 = empirical_constant(InequalityKind::Conv, b, 0.0, 200)?;
        let c400 = empirical_constant(InequalityKind::Conv, b, 0.0, 400)?;
        stable &= c200 == c400;
        parts.push(format!("b={b}: {c400:.6}"));
    }
    checks.push(Check {
        name: "convolution_constant",
        pass: stable,
        detail: format!("sup over n ≤ 200 equals sup over n ≤ 400 ({})", parts.join(", ")),
    });
    Ok(checks)
}

pub fn verify(args: &VerifyArgs) -> Result<bool> {
    if args.trials == 0 {
        bail!("at least one trial is required");
    }
    let checks = run_checks(args)?;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(failed == 0)
}
