//! Subcommand implementations. Each returns `Ok(true)` when every embedded
//! verification passed and `Ok(false)` when a dominance or soundness check
//! failed (exit code 1).

use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use normnet_core::activations::{ActivationEntry, Registry};
use normnet_core::complexity::{
    bound_lower_general, bound_lower_relu, bound_upper, build_rad_witness_general,
    build_rad_witness_relu, estimate_second_derivative_bound, rademacher_exact, rademacher_mc,
    random_lipschitz_family, FunctionFamily, SamplePanel,
};
use normnet_core::constructors::{
    build_product2, build_product_d, build_square_auto, loglog_slope,
};
use normnet_core::grid::{sup_error, EvalBox, EvalGrid};
use normnet_core::lipr::{build_lipr, Lip1Target, LiprParams};
use normnet_core::network::Network;
use normnet_core::randomized::{
    build_random_lipr, build_random_product2, build_random_product_d, build_random_square,
    success_frequencies, success_lower_bound, success_lower_bound_tree, RngSpec, SuccessRecord,
};
use normnet_core::Error as CoreError;

use crate::csvfmt::{f17, parse_spec, Csv};
use crate::plot::{render, Curve, PlotFormat, PlotSpec, PALETTE};
use crate::table;

pub fn resolve_activation(tag: &str) -> anyhow::Result<Arc<ActivationEntry>> {
    Ok(Registry::global().resolve(tag)?)
}

fn write_out(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, contents).with_context(|| format!("writing {}", p.display()))?;
        }
        None => print!("{contents}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// table-c
// ---------------------------------------------------------------------------

pub fn cmd_table_c(
    alpha: f64,
    k_list: &[u64],
    cases: &[String],
    grid: usize,
    out: Option<&Path>,
    latex: bool,
) -> anyhow::Result<bool> {
    let rows = table::table_rows(alpha, k_list, cases, grid)?;
    print!("{}", table::to_text(&rows));
    if latex {
        print!("{}", table::to_latex(&rows));
    }
    if out.is_some() {
        write_out(out, &table::to_csv(&rows))?;
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// plots
// ---------------------------------------------------------------------------

/// Curve data for one case: per k the raw block `Φ_k` and its clipped
/// version over x ∈ [0,1], plus the absolute errors against x².
pub fn case_plot_data(
    case: &str,
    k_list: &[u64],
    samples: usize,
) -> anyhow::Result<(Vec<Curve>, Vec<Curve>)> {
    let entry = table::case_entry(case)?;
    let spec = entry.weak().cloned().context("case entry has weak data")?;
    let xs: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
    let mut approx_curves = Vec::new();
    let mut err_curves = Vec::new();
    for (ci, &k) in k_list.iter().enumerate() {
        let w_k = normnet_core::constructors::weak_weight(&spec, k, 1.0);
        let a = normnet_core::constructors::build_square_weak(&entry, k, 1.0, w_k)?;
        let raw: Vec<f64> = xs
            .iter()
            .map(|&x| a.unclipped_value(&[x]))
            .collect::<Result<_, _>>()?;
        let clipped: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let color = PALETTE[ci % PALETTE.len()];
        approx_curves.push(Curve {
            label: format!("k={k}"),
            xs: xs.clone(),
            ys: raw.clone(),
            dashed: false,
            color,
        });
        approx_curves.push(Curve {
            label: format!("k={k} clipped"),
            xs: xs.clone(),
            ys: clipped.clone(),
            dashed: true,
            color,
        });
        err_curves.push(Curve {
            label: format!("k={k}"),
            xs: xs.clone(),
            ys: raw.iter().zip(&xs).map(|(v, x)| (v - x * x).abs()).collect(),
            dashed: false,
            color,
        });
        err_curves.push(Curve {
            label: format!("k={k} clipped"),
            xs: xs.clone(),
            ys: clipped
                .iter()
                .zip(&xs)
                .map(|(v, x)| (v - x * x).abs())
                .collect(),
            dashed: true,
            color,
        });
    }
    Ok((approx_curves, err_curves))
}

pub fn cmd_plots(
    case: &str,
    k_list: &[u64],
    out_dir: &Path,
    format: PlotFormat,
) -> anyhow::Result<bool> {
    let case_up = case.to_uppercase();
    if !["A", "B", "C"].contains(&case_up.as_str()) {
        anyhow::bail!("plots cover cases A, B and C (case D is flat zero error)");
    }
    std::fs::create_dir_all(out_dir)?;
    let (approx_curves, err_curves) = case_plot_data(&case_up, k_list, 600)?;
    let ext = match format {
        PlotFormat::Svg => "svg",
        PlotFormat::Png => "png",
    };
    let approx = PlotSpec {
        title: format!("case {case_up} approximation (solid: raw, dashed: clipped)"),
        x_label: "x".into(),
        y_label: "value".into(),
        curves: approx_curves,
    };
    render(
        &approx,
        &out_dir.join(format!("case{case_up}_approx.{ext}")),
        format,
    )?;
    let err = PlotSpec {
        title: format!("case {case_up} absolute error"),
        x_label: "x".into(),
        y_label: "abs error".into(),
        curves: err_curves,
    };
    render(
        &err,
        &out_dir.join(format!("case{case_up}_abserr.{ext}")),
        format,
    )?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// rate-sweep
// ---------------------------------------------------------------------------

pub enum SweepTarget {
    Square,
    Product2,
    ProductD(usize),
    Lipr { d: usize },
}

impl std::str::FromStr for SweepTarget {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "square" {
            return Ok(SweepTarget::Square);
        }
        if s == "product2" {
            return Ok(SweepTarget::Product2);
        }
        if let Some(d) = s.strip_prefix("product-d:") {
            return Ok(SweepTarget::ProductD(d.parse()?));
        }
        if let Some(d) = s.strip_prefix("lipr:") {
            return Ok(SweepTarget::Lipr { d: d.parse()? });
        }
        anyhow::bail!("unknown target `{s}` (square | product2 | product-d:<d> | lipr:<d>)")
    }
}

fn measured_error(target: &SweepTarget, entry: &Arc<ActivationEntry>, k: u64, alpha: f64)
    -> anyhow::Result<Option<(f64, f64)>> {
    let build = match target {
        SweepTarget::Square => build_square_auto(entry, k, alpha),
        SweepTarget::Product2 => build_product2(entry, k, alpha),
        SweepTarget::ProductD(d) => build_product_d(entry, *d, k, alpha),
        SweepTarget::Lipr { d } => {
            let params = LiprParams {
                d: *d,
                m: 0,
                beta: 1.0,
                alpha,
                gamma: None,
                k,
            };
            let tent = Lip1Target(|x: &[f64]| {
                x.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min)
            });
            match build_lipr(entry, &params, &tent) {
                Ok(a) => {
                    let mut worst: f64 = 0.0;
                    for p in EvalBox::unit(*d).sample(4000, 1234) {
                        let f = p.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min);
                        worst = worst.max((a.eval(&p)? - f).abs());
                    }
                    if *d == 1 {
                        for i in 0..=20_000 {
                            let x = [i as f64 / 20_000.0];
                            let f = x[0].min(1.0 - x[0]);
                            worst = worst.max((a.eval(&x)? - f).abs());
                        }
                    }
                    return Ok(Some((worst, a.predicted_bound)));
                }
                Err(CoreError::KTooSmall { .. }) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
        }
    };
    let approx = match build {
        Ok(a) => a,
        Err(CoreError::KTooSmall { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let dim = approx.network.input_dim;
    let grid = EvalGrid::default_for(approx.domain.clone());
    let err = match target {
        SweepTarget::Square => sup_error(|x| x[0] * x[0], &approx.network, &grid)?,
        SweepTarget::Product2 => sup_error(|x| x[0] * x[1], &approx.network, &grid)?,
        SweepTarget::ProductD(_) => {
            let mut e = sup_error(|x| x.iter().product(), &approx.network, &grid)?;
            if dim >= 3 {
                for p in EvalBox::symmetric(dim).sample(10_000, 99) {
                    let f: f64 = p.iter().product();
                    e = e.max((approx.network.eval_scalar(&p)? - f).abs());
                }
            }
            e
        }
        SweepTarget::Lipr { .. } => unreachable!(),
    };
    Ok(Some((err, approx.predicted_bound)))
}

pub fn cmd_rate_sweep(
    target: &SweepTarget,
    activation: &str,
    alpha: f64,
    k_list: &[u64],
    out: Option<&Path>,
) -> anyhow::Result<bool> {
    let entry = resolve_activation(activation)?;
    let mut csv = Csv::new(&["target", "activation", "alpha", "k", "measured", "predicted"]);
    let target_name = match target {
        SweepTarget::Square => "square".to_string(),
        SweepTarget::Product2 => "product2".to_string(),
        SweepTarget::ProductD(d) => format!("product-d:{d}"),
        SweepTarget::Lipr { d } => format!("lipr:{d}"),
    };
    let mut ks = Vec::new();
    let mut errs = Vec::new();
    let mut ok = true;
    for &k in k_list {
        match measured_error(target, &entry, k, alpha)? {
            None => {
                eprintln!("note: k = {k} below the admissible threshold; row skipped");
                csv.comment(&format!("k={k} skipped: below admissible threshold"));
            }
            Some((measured, predicted)) => {
                if measured > predicted * (1.0 + 1e-6) + 1e-12 {
                    eprintln!(
                        "BOUND VIOLATION at k={k}: measured {measured:.6e} > predicted {predicted:.6e}"
                    );
                    ok = false;
                }
                csv.row(&[
                    target_name.clone(),
                    activation.to_string(),
                    f17(alpha),
                    k.to_string(),
                    f17(measured),
                    f17(predicted),
                ]);
                if measured > 0.0 {
                    ks.push(k as f64);
                    errs.push(measured);
                }
            }
        }
    }
    if ks.len() >= 2 {
        let fit = loglog_slope(&ks, &errs)?;
        println!(
            "{target_name} {activation} alpha={alpha}: fitted slope {:.4} (residual {:.3e})",
            fit.slope, fit.residual
        );
        csv.comment(&format!("fitted slope {}", f17(fit.slope)));
    }
    write_out(out, &csv.finish())?;
    Ok(ok)
}

// ---------------------------------------------------------------------------
// rand-verify
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_rand_verify(
    lemma: u32,
    k: u64,
    alpha: f64,
    d: usize,
    eps_spec: &str,
    trials: u64,
    seed: u64,
    points_spec: Option<&str>,
    activation: &str,
    out: Option<&Path>,
) -> anyhow::Result<bool> {
    let entry = resolve_activation(activation)?;
    let base = RngSpec::new(seed);

    let records: Vec<SuccessRecord> = match lemma {
        6 => {
            let proto = build_random_square(&entry, k, alpha, &base)?;
            let consts = proto.constants;
            let eps_list = parse_eps_list(eps_spec, consts.eps0)?;
            let points = parse_points_or(points_spec, 1, "0,0.3,0.7,1")?;
            success_frequencies(
                "square",
                k,
                alpha,
                &eps_list,
                &points,
                trials,
                &base.substream(1_000_000),
                |eps| eps,
                |spec| {
                    let net = build_random_square(&entry, k, alpha, &spec)?.network;
                    Ok(move |x: &[f64]| net.eval_scalar(x))
                },
                |x| x[0] * x[0],
                |eps| success_lower_bound(k, eps, &consts),
            )?
        }
        7 => {
            let proto = build_random_product2(&entry, k, alpha, &base)?;
            let consts = proto.constants;
            let eps_list = parse_eps_list(eps_spec, consts.eps0)?;
            let points = parse_points_or(points_spec, 2, "0.5:0.5,0.5:-0.5,-0.5:0.5,-0.5:-0.5")?;
            success_frequencies(
                "product2",
                k,
                alpha,
                &eps_list,
                &points,
                trials,
                &base.substream(1_000_000),
                |eps| eps,
                |spec| {
                    let net = build_random_product2(&entry, k, alpha, &spec)?.network;
                    Ok(move |x: &[f64]| net.eval_scalar(x))
                },
                |x| x[0] * x[1],
                |eps| success_lower_bound(k, eps, &consts),
            )?
        }
        8 => {
            let proto = build_random_product_d(&entry, d, k, alpha, &base)?;
            let consts = proto.constants;
            let levels = normnet_core::constructors::ceil_log2(d) as i32;
            let eps0_total = consts.eps0 * (2f64.powi(levels) - 1.0).max(1.0);
            let eps_list = parse_eps_list(eps_spec, eps0_total)?;
            let default_pts = vec!["0.5".to_string(); d].join(":");
            let points = parse_points_or(points_spec, d, &default_pts)?;
            success_frequencies(
                &format!("product-d:{d}"),
                k,
                alpha,
                &eps_list,
                &points,
                trials,
                &base.substream(1_000_000),
                |eps| eps,
                |spec| {
                    let net = build_random_product_d(&entry, d, k, alpha, &spec)?.network;
                    Ok(move |x: &[f64]| net.eval_scalar(x))
                },
                |x| x.iter().product(),
                |eps| success_lower_bound_tree(k, eps, d, &consts),
            )?
        }
        9 => {
            let params = LiprParams {
                d,
                m: 0,
                beta: 1.0,
                alpha,
                gamma: None,
                k,
            };
            let tent = Lip1Target(|x: &[f64]| {
                x.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min)
            });
            let proto = build_random_lipr(&entry, &params, &tent, &base)?;
            let eps_list = parse_eps_list(eps_spec, proto.constants.eps0)?;
            let default_pts = (1..=5)
                .map(|i| vec![format!("{}", i as f64 / 6.0); d].join(":"))
                .collect::<Vec<_>>()
                .join(",");
            let points = parse_points_or(points_spec, d, &default_pts)?;
            let thresholds = {
                let f = proto.constants.random_scale.unwrap_or(0.0);
                let g = proto.constants.deterministic_scale.unwrap_or(0.0);
                let det = g * (k as f64).powf(-alpha);
                move |eps: f64| f * eps + det
            };
            let predictor = {
                let proto = build_random_lipr(&entry, &params, &tent, &base)?;
                move |eps: f64| proto.success_lower_bound(eps)
            };
            success_frequencies(
                &format!("lipr:{d}"),
                k,
                alpha,
                &eps_list,
                &points,
                trials,
                &base.substream(1_000_000),
                thresholds,
                |spec| {
                    let comp = build_random_lipr(&entry, &params, &tent, &spec)?.approximator;
                    Ok(move |x: &[f64]| comp.eval(x))
                },
                move |x| x.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min),
                predictor,
            )?
        }
        other => anyhow::bail!("unknown guarantee family `{other}` (expected 6, 7, 8 or 9)"),
    };

    let mut csv = Csv::new(&[
        "case", "k", "alpha", "point", "eps", "trials", "freq", "predicted", "margin", "vacuous",
    ]);
    let mut ok = true;
    for r in &records {
        if !r.vacuous && !r.dominance_ok() {
            eprintln!(
                "DOMINANCE VIOLATION at point {:?}, eps {}: freq {} < bound {} - 3σ",
                r.point, r.eps, r.empirical_freq, r.predicted_lower
            );
            ok = false;
        }
        csv.row(&[
            r.case.clone(),
            r.k.to_string(),
            f17(r.alpha),
            r.point
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(":"),
            f17(r.eps),
            r.trials.to_string(),
            f17(r.empirical_freq),
            f17(r.predicted_lower),
            f17(r.margin),
            r.vacuous.to_string(),
        ]);
    }
    write_out(out, &csv.finish())?;
    Ok(ok)
}

/// Epsilon lists accept absolute values and `Nx` tokens meaning `N · ε₀`.
fn parse_eps_list(spec: &str, eps0: f64) -> anyhow::Result<Vec<f64>> {
    spec.split(',')
        .map(|t| {
            let t = t.trim();
            if let Some(mult) = t.strip_suffix('x') {
                Ok(mult.parse::<f64>()? * eps0)
            } else {
                Ok(t.parse::<f64>()?)
            }
        })
        .collect()
}

fn parse_points_or(
    spec: Option<&str>,
    dim: usize,
    default: &str,
) -> anyhow::Result<Vec<Vec<f64>>> {
    crate::csvfmt::parse_points(spec.unwrap_or(default), dim)
}

// ---------------------------------------------------------------------------
// rademacher
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_rademacher(
    panel_spec: &str,
    family_spec: &str,
    n: usize,
    d: usize,
    trials: Option<u64>,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<bool> {
    if family_spec.trim().is_empty() {
        anyhow::bail!("empty family spec");
    }
    let (panel_head, panel_args) = parse_spec(panel_spec);
    let get = |pairs: &[(String, String)], key: &str| -> Option<String> {
        pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    };
    let b: f64 = get(&panel_args, "b").map(|v| v.parse()).transpose()?.unwrap_or(1.0);
    let panel_seed: u64 = get(&panel_args, "seed")
        .map(|v| v.parse())
        .transpose()?
        .unwrap_or(seed);
    let panel = match panel_head.as_str() {
        "random" => SamplePanel::random(n, d, b, panel_seed)?,
        other => anyhow::bail!("unknown panel spec `{other}` (expected random:seed=N[,b=F])"),
    };

    let (family_head, family_args) = parse_spec(family_spec);
    let k: f64 = get(&family_args, "k").map(|v| v.parse()).transpose()?.unwrap_or(2.0);
    struct FamilyBounds {
        lower_relu: Option<f64>,
        lower_general: Option<f64>,
        upper_k: f64,
        depth: usize,
    }
    let (family, bounds): (FunctionFamily, FamilyBounds) = match family_head.as_str() {
        "relu-witness" => {
            let alpha: f64 = get(&family_args, "alpha")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(0.0);
            let fam = build_rad_witness_relu(k, d, alpha)?;
            let lower = bound_lower_relu(k, alpha, panel.s_stat, panel.n());
            (
                fam,
                FamilyBounds {
                    lower_relu: Some(lower),
                    lower_general: None,
                    upper_k: k.max(1.0),
                    depth: 1,
                },
            )
        }
        "general-witness" => {
            let tag = get(&family_args, "activation").unwrap_or_else(|| "silu".into());
            let entry = resolve_activation(&tag)?;
            let spec = entry
                .taylor()
                .context("general witness needs a Taylor activation")?;
            let m2 = estimate_second_derivative_bound(&entry, spec.rho);
            let g = bound_lower_general(spec.a1, m2, b, k, panel.s_stat, panel.n())?;
            let eps: f64 = get(&family_args, "eps")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(g.eps_star);
            let fam = build_rad_witness_general(k, d, eps, &entry, b)?;
            let alpha1 = panel.s_stat / (2.0 * panel.n() as f64).sqrt();
            let alpha2 = m2 * b * b / spec.a1;
            let lower = k * (alpha1 * eps - alpha2 * eps * eps);
            (
                fam,
                FamilyBounds {
                    lower_relu: None,
                    lower_general: Some(lower),
                    upper_k: (k / spec.a1).max(1.0),
                    depth: 1,
                },
            )
        }
        "random-lipschitz" => {
            let count: usize = get(&family_args, "count")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(4);
            let width: usize = get(&family_args, "width")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(6);
            let depth: usize = get(&family_args, "depth")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(2);
            let fam_seed: u64 = get(&family_args, "seed")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(seed + 1);
            let fam = random_lipschitz_family(count, d, width, depth, k.max(1.0), fam_seed)?;
            (
                fam,
                FamilyBounds {
                    lower_relu: None,
                    lower_general: None,
                    upper_k: k.max(1.0),
                    depth,
                },
            )
        }
        other => anyhow::bail!(
            "unknown family spec `{other}` (relu-witness | general-witness | random-lipschitz)"
        ),
    };

    let (mode, estimate, stderr) = match trials {
        Some(t) => {
            let mc = rademacher_mc(&family, &panel, t, seed)?;
            ("mc", mc.estimate, mc.stderr)
        }
        None => {
            anyhow::ensure!(
                n <= 20,
                "exact enumeration needs n <= 20; pass --trials for Monte Carlo"
            );
            ("exact", rademacher_exact(&family, &panel)?, 0.0)
        }
    };

    let upper = bound_upper(b, bounds.upper_k, panel.n(), bounds.depth, d);
    let mut ok = true;
    let mut verdicts = Vec::new();
    if estimate > upper * (1.0 + 1e-9) {
        ok = false;
        verdicts.push("upper-violated");
    }
    if let Some(lower) = bounds.lower_relu {
        if mode == "exact" && estimate < lower - 1e-12 {
            ok = false;
            verdicts.push("lower-relu-violated");
        }
    }
    if let Some(lower) = bounds.lower_general {
        if mode == "exact" && estimate < lower - 1e-12 {
            ok = false;
            verdicts.push("lower-general-violated");
        }
    }
    let verdict = if verdicts.is_empty() {
        "ok".to_string()
    } else {
        verdicts.join("+")
    };

    let mut csv = Csv::new(&[
        "panel",
        "n",
        "d",
        "family",
        "mode",
        "estimate",
        "stderr",
        "upper",
        "lower_relu",
        "lower_general",
        "verdict",
    ]);
    csv.row(&[
        panel_spec.to_string(),
        n.to_string(),
        d.to_string(),
        family_spec.to_string(),
        mode.to_string(),
        f17(estimate),
        f17(stderr),
        f17(upper),
        bounds.lower_relu.map(f17).unwrap_or_default(),
        bounds.lower_general.map(f17).unwrap_or_default(),
        verdict.clone(),
    ]);
    println!(
        "{mode} estimate {estimate:.6} (stderr {stderr:.2e}), upper {upper:.6}, verdict {verdict}"
    );
    write_out(out, &csv.finish())?;
    Ok(ok)
}

// ---------------------------------------------------------------------------
// build / eval
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_build(
    target: &str,
    activation: &str,
    k: u64,
    alpha: f64,
    d: usize,
    w_k: Option<f64>,
    seed: Option<u64>,
    out: &Path,
) -> anyhow::Result<bool> {
    let entry = resolve_activation(activation)?;
    let network: Network = match target {
        "square" => build_square_auto(&entry, k, alpha)?.network,
        "square-weak" => {
            let spec = entry
                .weak()
                .cloned()
                .context("square-weak needs a weak-spec activation")?;
            let w = w_k.unwrap_or_else(|| normnet_core::constructors::weak_weight(&spec, k, alpha));
            normnet_core::constructors::build_square_weak(&entry, k, alpha, w)?.network
        }
        "product2" => build_product2(&entry, k, alpha)?.network,
        "product-d" => build_product_d(&entry, d, k, alpha)?.network,
        "random-square" => {
            build_random_square(&entry, k, alpha, &RngSpec::new(seed.unwrap_or(0)))?.network
        }
        "random-product2" => {
            build_random_product2(&entry, k, alpha, &RngSpec::new(seed.unwrap_or(0)))?.network
        }
        "random-product-d" => {
            build_random_product_d(&entry, d, k, alpha, &RngSpec::new(seed.unwrap_or(0)))?.network
        }
        other => anyhow::bail!(
            "unknown build target `{other}` (square | square-weak | product2 | product-d | random-square | random-product2 | random-product-d)"
        ),
    };
    write_out(Some(out), &network.to_json())?;
    eprintln!(
        "wrote {} (W={}, L={}, K={:.6e})",
        out.display(),
        network.cert.width,
        network.cert.depth,
        network.cert.norm_budget
    );
    Ok(true)
}

pub fn cmd_eval(net_path: &Path, x_spec: &str) -> anyhow::Result<bool> {
    let json = std::fs::read_to_string(net_path)
        .with_context(|| format!("reading {}", net_path.display()))?;
    let net = Network::from_json_builtin(&json)?;
    let x = crate::csvfmt::parse_f64_list(x_spec)?;
    let out = net.eval(&x)?;
    println!(
        "{}",
        out.iter().map(|v| f17(*v)).collect::<Vec<_>>().join(",")
    );
    Ok(true)
}
