//! The weak-regularity validation table: one row per (activation case, k)
//! with the mesh weight, scale, unclipped/clipped sup errors, predicted
//! bound and output range.

use std::sync::Arc;

use anyhow::Context;
use normnet_core::activations::{ActivationEntry, Registry};
use normnet_core::constructors::{build_square_weak, weak_weight};

use crate::csvfmt::{f17, Csv};

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub case: String,
    pub k: u64,
    pub alpha: f64,
    pub w_k: f64,
    pub d_k: f64,
    pub err_unclipped: f64,
    pub err_clipped: f64,
    pub predicted: f64,
    pub min_phi: f64,
    pub max_phi: f64,
}

pub fn case_entry(case: &str) -> anyhow::Result<Arc<ActivationEntry>> {
    let tag = match case {
        "A" | "a" => "caseA",
        "B" | "b" => "caseB",
        "C" | "c" => "caseC",
        "D" | "d" => "caseD",
        other => anyhow::bail!("unknown case `{other}` (expected A, B, C or D)"),
    };
    Ok(Registry::global().resolve(tag)?)
}

/// Compute one table row on a uniform grid of `grid_n + 1` points on [0,1].
pub fn table_row(case: &str, k: u64, alpha: f64, grid_n: usize) -> anyhow::Result<ExperimentRow> {
    let entry = case_entry(case)?;
    let spec = entry.weak().cloned().context("case entry has weak data")?;
    let w_k = weak_weight(&spec, k, alpha);
    let approx = build_square_weak(&entry, k, alpha, w_k)?;

    let mut err_u: f64 = 0.0;
    let mut err_c: f64 = 0.0;
    let mut min_phi = f64::INFINITY;
    let mut max_phi = f64::NEG_INFINITY;
    for i in 0..=grid_n {
        let x = i as f64 / grid_n as f64;
        let target = x * x;
        let phi = approx.unclipped_value(&[x])?;
        let clipped = phi.clamp(0.0, 1.0);
        err_u = err_u.max((phi - target).abs());
        err_c = err_c.max((clipped - target).abs());
        min_phi = min_phi.min(phi);
        max_phi = max_phi.max(phi);
    }
    let row = ExperimentRow {
        case: case.to_uppercase(),
        k,
        alpha,
        w_k,
        d_k: approx.info.d_k,
        err_unclipped: err_u,
        err_clipped: err_c,
        predicted: approx.predicted_bound,
        min_phi,
        max_phi,
    };
    // Row invariants: clipping never worsens the error, and the measured
    // error respects the bound (1e-12 absolute slack covers the exact-
    // cancellation case, whose predicted bound is 0).
    anyhow::ensure!(
        row.err_clipped <= row.err_unclipped + 1e-12,
        "clipped error above unclipped in row {row:?}"
    );
    anyhow::ensure!(
        row.err_unclipped <= row.predicted * (1.0 + 1e-6) + 1e-12,
        "bound violated in row {row:?}"
    );
    Ok(row)
}

pub fn table_rows(
    alpha: f64,
    k_list: &[u64],
    cases: &[String],
    grid_n: usize,
) -> anyhow::Result<Vec<ExperimentRow>> {
    if grid_n < 1000 {
        eprintln!("warning: grid of {grid_n} intervals is below 10^3; errors will be coarse");
    }
    let mut rows = Vec::new();
    for case in cases {
        for &k in k_list {
            rows.push(table_row(case, k, alpha, grid_n)?);
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut csv = Csv::new(&[
        "case",
        "k",
        "alpha",
        "w_k",
        "d_k",
        "err_unclipped",
        "err_clipped",
        "predicted",
        "min_phi",
        "max_phi",
    ]);
    for r in rows {
        csv.row(&[
            r.case.clone(),
            r.k.to_string(),
            f17(r.alpha),
            f17(r.w_k),
            f17(r.d_k),
            f17(r.err_unclipped),
            f17(r.err_clipped),
            f17(r.predicted),
            f17(r.min_phi),
            f17(r.max_phi),
        ]);
    }
    csv.finish()
}

fn sig4(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    let a = v.abs();
    if (1e-3..1e6).contains(&a) {
        let digits = (4 - (a.log10().floor() as i32 + 1)).max(0) as usize;
        format!("{v:.digits$}")
    } else {
        format!("{v:.3e}")
    }
}

pub fn to_text(rows: &[ExperimentRow]) -> String {
    let mut out = String::new();
    out.push_str(
        "case     k  alpha      w_k          d_k          err          clipped      pred         range\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:<5} {:>4}  {:<5} {:<12} {:<12} {:<12} {:<12} {:<12} [{}, {}]\n",
            r.case,
            r.k,
            r.alpha,
            sig4(r.w_k),
            sig4(r.d_k),
            sig4(r.err_unclipped),
            sig4(r.err_clipped),
            sig4(r.predicted),
            sig4(r.min_phi),
            sig4(r.max_phi),
        ));
    }
    out
}

pub fn to_latex(rows: &[ExperimentRow]) -> String {
    let mut out = String::new();
    out.push_str("case & $k$ & $\\alpha$ & $w_k$ & $d_k$ & err & clipped & pred. & $\\min\\Phi_k$ & $\\max\\Phi_k$ \\\\\n");
    for r in rows {
        out.push_str(&format!(
            "{} & {} & {} & {} & {} & {} & {} & {} & {} & {} \\\\\n",
            r.case,
            r.k,
            r.alpha,
            sig4(r.w_k),
            sig4(r.d_k),
            sig4(r.err_unclipped),
            sig4(r.err_clipped),
            sig4(r.predicted),
            sig4(r.min_phi),
            sig4(r.max_phi),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn case_a_k8_row_matches_reference() {
        let r = table_row("A", 8, 1.0, 100_000).unwrap();
        assert_relative_eq!(r.w_k, 0.125);
        assert_relative_eq!(r.d_k, 32.0);
        assert!((r.err_unclipped - 0.1250).abs() < 2e-3);
        assert!((r.err_clipped - 0.1056).abs() < 2e-3);
        assert_relative_eq!(r.predicted, 0.125);
        assert!(r.min_phi.abs() < 1e-4);
        assert!((r.max_phi - 1.125).abs() < 1e-4);
    }

    #[test]
    fn case_b_k8_errors() {
        let r = table_row("B", 8, 1.0, 100_000).unwrap();
        assert!((r.w_k - 0.0513).abs() < 5e-5);
        assert!((r.err_unclipped - 0.1250).abs() < 2e-3);
    }

    #[test]
    fn case_d_is_exact_for_all_k() {
        for k in [8u64, 16, 32, 64] {
            let r = table_row("D", k, 1.0, 10_000).unwrap();
            assert!(r.err_unclipped <= 1e-12, "k={k}: {}", r.err_unclipped);
            assert!(r.err_clipped <= 1e-12);
            assert_eq!(r.predicted, 0.0);
        }
    }

    #[test]
    fn unknown_case_is_rejected() {
        assert!(table_row("E", 8, 1.0, 1000).is_err());
    }
}
