//! Deterministic constructive approximators.
//!
//! The basic block is the symmetric pair `S(t) = d_k(σ(wt) + σ(-wt))`: with
//! `w = k^{-α/2}` and `d_k = 1/(2a₂w²)` the even part of the expansion
//! isolates the quadratic term, so `S` approximates `t²` with error
//! `O(k^{-α})`. Polarization `xy = ½((x+y)² - x² - y²)` turns that into a
//! bilinear block, and a balanced binary tree of bilinear blocks computes
//! `x₁⋯x_d`. Range containment comes from clip neurons (`clip01`/`clip11`
//! activation tags), which are 1-Lipschitz and exact on the target range, so
//! they never worsen the error.
//!
//! Every builder returns a [`CertifiedApproximator`]: the clipped network,
//! its unclipped core, the declared architecture certificate and a predicted
//! sup-norm error bound that the measured grid error must not exceed.

use std::sync::Arc;

use crate::activations::{ActivationEntry, ActivationMeta, Modulus, Registry, TaylorSpec, WeakSpec};
use crate::algebra::{compose_affine, concat};
use crate::error::{Error, Result};
use crate::grid::EvalBox;
use crate::linalg;
use crate::network::{check_norm_constraint, ArchitectureCert, Layer, Network};

/// `⌈log₂ d⌉` (0 for d = 1).
pub fn ceil_log2(d: usize) -> u32 {
    assert!(d >= 1);
    usize::BITS - (d - 1).leading_zeros()
}

/// Binomial coefficient as f64 (sizes here stay far below 2⁵³).
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * ((n - i) as f64) / ((i + 1) as f64);
    }
    acc.round()
}

/// Parameters shared by the square builders.
#[derive(Debug, Clone)]
pub struct BuildInfo {
    pub tag: String,
    pub k: u64,
    pub alpha: f64,
    /// Input weight w (or w_k on the weak path).
    pub w: f64,
    /// Output scale d_k.
    pub d_k: f64,
}

/// Closed-form evaluation of the symmetric block via the registered even
/// part, `Φ(x) = d_k · (σ(x₀+wx) + σ(x₀-wx) - 2σ(x₀))`.
#[derive(Clone)]
pub struct EvenForm {
    pub entry: Arc<ActivationEntry>,
    pub w: f64,
    pub d_k: f64,
}

impl EvenForm {
    pub fn eval(&self, x: f64) -> f64 {
        self.d_k * self.entry.even_second_difference(self.w * x)
    }
}

/// A constructed approximator with its certificate and predicted bound.
pub struct CertifiedApproximator {
    /// The range-clipped network (the deliverable).
    pub network: Network,
    /// The same construction without the final clip, where meaningful.
    pub unclipped: Option<Network>,
    /// Declared sup-norm error bound over `domain`.
    pub predicted_bound: f64,
    pub target: String,
    pub domain: EvalBox,
    pub info: BuildInfo,
    /// Closed-form even-part evaluator (1D square builders only), preferred
    /// over the network when the scales are extreme.
    pub even_form: Option<EvenForm>,
}

impl CertifiedApproximator {
    /// Unclipped value, preferring the closed-form even part when present.
    pub fn unclipped_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(ef) = &self.even_form {
            return Ok(ef.eval(x[0]));
        }
        match &self.unclipped {
            Some(n) => n.eval_scalar(x),
            None => self.network.eval_scalar(x),
        }
    }

    /// Clipped value (clip01 for the square builders on `[0,1]`).
    pub fn clipped_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(ef) = &self.even_form {
            return Ok(ef.eval(x[0]).clamp(0.0, 1.0));
        }
        self.network.eval_scalar(x)
    }
}

fn builtin(tag: &str) -> Arc<ActivationEntry> {
    Registry::global().resolve(tag).expect("builtin entry")
}

fn taylor_of(entry: &ActivationEntry) -> Result<TaylorSpec> {
    entry.taylor().copied().ok_or_else(|| {
        Error::AssumptionViolated(format!(
            "`{}` carries no Taylor data (a₂ ≠ 0 expansion required)",
            entry.tag
        ))
    })
}

fn weak_of(entry: &ActivationEntry) -> Result<WeakSpec> {
    entry.weak().cloned().ok_or_else(|| {
        Error::AssumptionViolated(format!("`{}` carries no weak even-part data", entry.tag))
    })
}

fn check_k(k: u64, k0: f64) -> Result<()> {
    if (k as f64) < k0 - 1e-9 {
        return Err(Error::KTooSmall { k, k0 });
    }
    Ok(())
}

/// Admissible threshold for the square builder: `k₀ = max(1, ρ^{-2/α})`.
pub fn square_k0(rho: f64, alpha: f64) -> f64 {
    (rho.powf(-2.0 / alpha)).max(1.0)
}

/// Admissible threshold for the product builders: `k₀ = max(1, (2/ρ)^{2/α})`.
pub fn product_k0(rho: f64, alpha: f64) -> f64 {
    ((2.0 / rho).powf(2.0 / alpha)).max(1.0)
}

/// Assemble the width-2 square network: σ-pair, scale-and-clip neuron,
/// identity output. `x0`/`sigma_x0` carry the weak path's expansion point.
fn square_network(
    entry: &Arc<ActivationEntry>,
    w: f64,
    d_k: f64,
    x0: f64,
    sigma_x0: f64,
    budget: f64,
) -> Result<(Network, Network)> {
    let id = builtin("identity");
    let clip = builtin("clip01");
    let l0 = Layer::uniform(vec![vec![w], vec![-w]], vec![x0, x0], entry);
    let scale_bias = -2.0 * d_k * sigma_x0;
    let l1c = Layer::new(vec![vec![d_k, d_k]], vec![scale_bias], vec![clip]);
    let l1u = Layer::new(vec![vec![d_k, d_k]], vec![scale_bias], vec![id.clone()]);
    let l2 = Layer::uniform(vec![vec![1.0]], vec![0.0], &id);
    let cert = ArchitectureCert::new(2, 2, budget.max(1.0), [1], 1)?;
    let clipped = Network::new(1, vec![l0.clone(), l1c, l2.clone()], cert.clone())?;
    let unclipped = Network::new(1, vec![l0, l1u, l2], cert)?;
    Ok((clipped, unclipped))
}

/// Approximate `x²` on `[0,1]` with a width-2 network built from a Taylor
/// activation: error at most `(M/|a₂|)k^{-α}`, budget `K = k^α/|a₂|`.
pub fn build_square(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
) -> Result<CertifiedApproximator> {
    let spec = taylor_of(entry)?;
    check_k(k, square_k0(spec.rho, alpha))?;
    let ka = (k as f64).powf(alpha);
    let w = (k as f64).powf(-alpha / 2.0);
    let d_k = ka / (2.0 * spec.a2);
    let budget = ka / spec.a2.abs();
    let (network, unclipped) = square_network(entry, w, d_k, 0.0, 0.0, budget)?;
    debug_assert!(check_norm_constraint(&network).ok);
    Ok(CertifiedApproximator {
        network,
        unclipped: Some(unclipped),
        predicted_bound: spec.m / spec.a2.abs() * ka.recip(),
        target: "x^2 on [0,1]".into(),
        domain: EvalBox::unit(1),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w,
            d_k,
        },
        even_form: None,
    })
}

/// Reference weight schedule for the weak path, chosen to match the modulus:
/// `k^{-α/β}` for power moduli, `e^{1-k^α}` for the logarithmic modulus and
/// `k^{-α/2}` when the even part is exact.
pub fn weak_weight(spec: &WeakSpec, k: u64, alpha: f64) -> f64 {
    let kf = k as f64;
    match spec.omega {
        Modulus::Power { beta, .. } => kf.powf(-alpha / beta),
        Modulus::Log { .. } => (1.0 - kf.powf(alpha)).exp(),
        Modulus::Zero => kf.powf(-alpha / 2.0),
    }
}

/// Approximate `x²` on `[0,1]` from weak even-part regularity only:
/// `Φ(x) = d_k(σ(x₀+w_k x) + σ(x₀-w_k x) - 2σ(x₀))` with `d_k = 1/(γw_k²)`,
/// predicted bound `ω(w_k)/|γ|` and budget `K = 2/(|γ|w_k²)`.
pub fn build_square_weak(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
    w_k: f64,
) -> Result<CertifiedApproximator> {
    let spec = weak_of(entry)?;
    if !(w_k > 0.0) || w_k > spec.rho {
        return Err(Error::Precondition(format!(
            "weight w_k = {w_k:.3e} outside (0, ρ = {}]",
            spec.rho
        )));
    }
    let d_k = 1.0 / (spec.gamma * w_k * w_k);
    if !d_k.is_finite() {
        return Err(Error::Precondition(format!(
            "scale 1/(γ w_k²) overflows for w_k = {w_k:.3e}"
        )));
    }
    let budget = 2.0 / (spec.gamma.abs() * w_k * w_k);
    let sigma_x0 = entry.eval(spec.x0);
    let (network, unclipped) = square_network(entry, w_k, d_k, spec.x0, sigma_x0, budget)?;
    debug_assert!(check_norm_constraint(&network).ok);
    Ok(CertifiedApproximator {
        network,
        unclipped: Some(unclipped),
        predicted_bound: spec.omega.eval(w_k) / spec.gamma.abs(),
        target: "x^2 on [0,1]".into(),
        domain: EvalBox::unit(1),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w: w_k,
            d_k,
        },
        even_form: Some(EvenForm {
            entry: entry.clone(),
            w: w_k,
            d_k,
        }),
    })
}

/// Square builder dispatching on the entry's metadata: Taylor data when
/// available, otherwise the weak path with the reference weight schedule.
pub fn build_square_auto(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
) -> Result<CertifiedApproximator> {
    match &entry.meta {
        ActivationMeta::Taylor(_) => build_square(entry, k, alpha),
        ActivationMeta::Weak(spec) => {
            let w = weak_weight(spec, k, alpha);
            build_square_weak(entry, k, alpha, w)
        }
        ActivationMeta::PiecewiseLinear(_) => Err(Error::AssumptionViolated(format!(
            "`{}` is piecewise linear; the square builders need curvature",
            entry.tag
        ))),
    }
}

/// Approximate `xy` on `[-1,1]²` by polarization: six σ-neurons with input
/// rows `±(w,w), ±(w,0), ±(0,w)`, one clip11 scale neuron, identity output.
/// Error at most `9(M/|a₂|)k^{-α}`, budget `K = (3/2)k^α/|a₂|`.
pub fn build_product2(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
) -> Result<CertifiedApproximator> {
    let spec = taylor_of(entry)?;
    check_k(k, product_k0(spec.rho, alpha))?;
    let ka = (k as f64).powf(alpha);
    let w = (k as f64).powf(-alpha / 2.0);
    let d_k = ka / (2.0 * spec.a2);
    let half = d_k / 2.0;

    let id = builtin("identity");
    let clip = builtin("clip11");
    let l0 = Layer::uniform(
        vec![
            vec![w, w],
            vec![-w, -w],
            vec![w, 0.0],
            vec![-w, 0.0],
            vec![0.0, w],
            vec![0.0, -w],
        ],
        vec![0.0; 6],
        entry,
    );
    let out_row = vec![half, half, -half, -half, -half, -half];
    let l1c = Layer::new(vec![out_row.clone()], vec![0.0], vec![clip]);
    let l1u = Layer::new(vec![out_row], vec![0.0], vec![id.clone()]);
    let l2 = Layer::uniform(vec![vec![1.0]], vec![0.0], &id);

    let budget = 1.5 * ka / spec.a2.abs();
    let cert = ArchitectureCert::new(6, 2, budget, [1], 1)?;
    let network = Network::new(2, vec![l0.clone(), l1c, l2.clone()], cert.clone())?;
    let unclipped = Network::new(2, vec![l0, l1u, l2], cert)?;
    debug_assert!(check_norm_constraint(&network).ok);

    Ok(CertifiedApproximator {
        network,
        unclipped: Some(unclipped),
        predicted_bound: 9.0 * spec.m / spec.a2.abs() * ka.recip(),
        target: "x*y on [-1,1]^2".into(),
        domain: EvalBox::symmetric(2),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w,
            d_k,
        },
        even_form: None,
    })
}

/// Depth-0 network selecting one coordinate.
fn selector_net(dim: usize, index: usize) -> Network {
    let id = builtin("identity");
    let mut row = vec![0.0; dim];
    row[index] = 1.0;
    let l = Layer::uniform(vec![row], vec![0.0], &id);
    Network::new(
        dim,
        vec![l],
        ArchitectureCert::new(1, 0, 1.0, [], 1).expect("selector certificate"),
    )
    .expect("selector network")
}

/// Approximate `x₁⋯x_d` on `[-1,1]^d` by a balanced binary tree of bilinear
/// blocks; odd channels pass through identity-tagged neurons. Certificate
/// `(6⌈d/2⌉, 2⌈log₂ d⌉, [(3/2)k^α/|a₂|]^{⌈log₂ d⌉})`, error at most
/// `(2^{⌈log₂ d⌉} - 1) · 9(M/|a₂|) · k^{-α}`.
pub fn build_product_d(
    entry: &Arc<ActivationEntry>,
    d: usize,
    k: u64,
    alpha: f64,
) -> Result<CertifiedApproximator> {
    if d == 0 {
        return Err(Error::Precondition(
            "product dimension d must be >= 1".into(),
        ));
    }
    let spec = taylor_of(entry)?;
    check_k(k, product_k0(spec.rho, alpha))?;

    let levels = ceil_log2(d);
    let ka = (k as f64).powf(alpha);
    let block_budget = 1.5 * ka / spec.a2.abs();
    let declared_budget = block_budget.powi(levels as i32).max(1.0);
    let declared_width = 6 * d.div_ceil(2);
    let declared_depth = 2 * levels as usize;

    let tree = if d == 1 {
        selector_net(1, 0)
    } else {
        let p2 = build_product2(entry, k, alpha)?.network;
        let mut current: Option<Network> = None;
        let mut m = d;
        while m > 1 {
            let pairs = m / 2;
            let mut level: Option<Network> = None;
            for j in 0..pairs {
                let mut proj = linalg::zeros(2, m);
                proj[0][2 * j] = 1.0;
                proj[1][2 * j + 1] = 1.0;
                let block = compose_affine(&p2, &proj, &[0.0, 0.0])?;
                level = Some(match level {
                    None => block,
                    Some(l) => concat(&l, &block)?,
                });
            }
            if m % 2 == 1 {
                let passthrough = selector_net(m, m - 1);
                level = Some(match level {
                    None => passthrough,
                    Some(l) => concat(&l, &passthrough)?,
                });
            }
            let level = level.expect("at least one block per level");
            current = Some(match current {
                None => level,
                Some(c) => crate::algebra::compose(&level, &c)?,
            });
            m = m.div_ceil(2);
        }
        current.expect("d >= 2 has at least one level")
    };

    // The algebra-propagated certificate is dominated by the closed forms;
    // re-certify with the declared values.
    debug_assert!(d == 1 || tree.cert.width <= declared_width);
    debug_assert_eq!(tree.depth(), declared_depth);
    debug_assert!(tree.cert.norm_budget <= declared_budget * (1.0 + 1e-9));
    let cert = ArchitectureCert::new(
        declared_width.max(1),
        declared_depth,
        declared_budget,
        tree.cert.constrained.clone(),
        1,
    )?;
    let input_dim = tree.input_dim;
    let network = Network::new(input_dim, tree.layers, cert)?;
    debug_assert!(check_norm_constraint(&network).ok);

    let error_factor = 2f64.powi(levels as i32) - 1.0;
    let w = (k as f64).powf(-alpha / 2.0);
    Ok(CertifiedApproximator {
        network,
        unclipped: None,
        predicted_bound: error_factor * 9.0 * spec.m / spec.a2.abs() * ka.recip(),
        target: format!("prod(x_1..x_{d}) on [-1,1]^{d}"),
        domain: EvalBox::symmetric(d),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w,
            d_k: ka / (2.0 * spec.a2),
        },
        even_form: None,
    })
}

/// Per-level worst deviations of the product tree from the exact partial
/// products, evaluated at `points` (instrumentation for the error recursion
/// `ε_ℓ ≤ 2ε_{ℓ-1} + ε_k`).
pub fn product_tree_level_errors(
    entry: &Arc<ActivationEntry>,
    d: usize,
    k: u64,
    alpha: f64,
    points: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(Error::Precondition("instrumentation needs d >= 2".into()));
    }
    let p2 = build_product2(entry, k, alpha)?.network;
    let levels = ceil_log2(d) as usize;
    let mut maxima = vec![0.0f64; levels];
    for x in points {
        let mut approx = x.clone();
        let mut exact = x.clone();
        let mut level = 0;
        while approx.len() > 1 {
            let m = approx.len();
            let mut next_a = Vec::with_capacity(m.div_ceil(2));
            let mut next_e = Vec::with_capacity(m.div_ceil(2));
            for j in 0..m / 2 {
                next_a.push(p2.eval_scalar(&[approx[2 * j], approx[2 * j + 1]])?);
                next_e.push(exact[2 * j] * exact[2 * j + 1]);
            }
            if m % 2 == 1 {
                next_a.push(approx[m - 1]);
                next_e.push(exact[m - 1]);
            }
            approx = next_a;
            exact = next_e;
            let dev = approx
                .iter()
                .zip(&exact)
                .map(|(a, e)| (a - e).abs())
                .fold(0.0, f64::max);
            maxima[level] = maxima[level].max(dev);
            level += 1;
        }
    }
    Ok(maxima)
}

/// Result of fitting `log y` against `log x`.
#[derive(Debug, Clone)]
pub struct SweepFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SweepFit> {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = linalg::linear_fit(&lx, &ly)?;
    Ok(SweepFit {
        slope,
        intercept,
        residual,
        points: lx.into_iter().zip(ly).collect(),
    })
}

/// Fit the growth exponent of the square builder's norm budget `K_k`
/// against `k`: the budget is `k^α/|a₂|`, so the slope recovers α.
pub fn scaling_sweep(entry: &Arc<ActivationEntry>, alpha: f64, k_list: &[u64]) -> Result<SweepFit> {
    if k_list.len() < 2 {
        return Err(Error::Precondition(format!(
            "scaling sweep needs at least 2 values of k, got {}",
            k_list.len()
        )));
    }
    let mut ks = Vec::with_capacity(k_list.len());
    let mut budgets = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let approx = build_square_auto(entry, k, alpha)?;
        ks.push(k as f64);
        budgets.push(approx.network.cert.norm_budget);
    }
    loglog_slope(&ks, &budgets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sup_error, EvalGrid};
    use approx::assert_relative_eq;

    fn entry(tag: &str) -> Arc<ActivationEntry> {
        Registry::global().resolve(tag).unwrap()
    }

    #[test]
    fn silu_square_parameters() {
        let a = build_square(&entry("silu"), 16, 1.0).unwrap();
        assert_relative_eq!(a.info.w, 0.25);
        assert_relative_eq!(a.info.d_k, 32.0);
        assert_relative_eq!(a.network.cert.norm_budget, 64.0);
        assert!(check_norm_constraint(&a.network).ok);
    }

    #[test]
    fn square_rejects_small_k() {
        // rho = 0.5 gives k0 = 4 for alpha = 1.
        let silu = entry("silu");
        let tight = Arc::new(ActivationEntry::new(
            "silu-tight",
            silu.f.clone(),
            ActivationMeta::Taylor(TaylorSpec {
                rho: 0.5,
                ..*silu.taylor().unwrap()
            }),
        ));
        assert!(matches!(
            build_square(&tight, 3, 1.0),
            Err(Error::KTooSmall { .. })
        ));
        assert!(build_square(&tight, 4, 1.0).is_ok());
    }

    #[test]
    fn square_error_within_bound_and_range() {
        let a = build_square(&entry("silu"), 16, 1.0).unwrap();
        let grid = EvalGrid::new(EvalBox::unit(1), 10_001).unwrap();
        let err = sup_error(|x| x[0] * x[0], &a.network, &grid).unwrap();
        assert!(
            err <= a.predicted_bound * (1.0 + 1e-6),
            "{err} vs {}",
            a.predicted_bound
        );
        grid.for_each_point(|x| {
            let y = a.network.eval_scalar(x).unwrap();
            assert!((0.0..=1.0).contains(&y));
        });
    }

    #[test]
    fn weak_square_case_a_row() {
        let a = build_square_weak(&entry("caseA"), 8, 1.0, 0.125).unwrap();
        assert_relative_eq!(a.info.d_k, 32.0);
        assert_relative_eq!(a.network.cert.norm_budget, 64.0);
        assert_relative_eq!(a.predicted_bound, 0.125);
        let grid = EvalGrid::new(EvalBox::unit(1), 100_001).unwrap();
        let err = sup_error(|x| x[0] * x[0], a.unclipped.as_ref().unwrap(), &grid).unwrap();
        assert!((err - 0.125).abs() < 2e-3, "unclipped err {err}");
        let clipped = sup_error(|x| x[0] * x[0], &a.network, &grid).unwrap();
        assert!((clipped - 0.1056).abs() < 2e-3, "clipped err {clipped}");
    }

    #[test]
    fn weak_square_case_d_is_exact() {
        let e = entry("caseD");
        let spec = e.weak().cloned().unwrap();
        for k in [8u64, 16, 32, 64] {
            let w = weak_weight(&spec, k, 1.0);
            let a = build_square_weak(&e, k, 1.0, w).unwrap();
            let grid = EvalGrid::new(EvalBox::unit(1), 10_001).unwrap();
            let err = sup_error(|x| x[0] * x[0], &a.network, &grid).unwrap();
            assert!(err <= 1e-12, "k={k}: err {err}");
        }
    }

    #[test]
    fn weak_square_rejects_bad_weight() {
        assert!(build_square_weak(&entry("caseA"), 8, 1.0, 1.5).is_err());
        assert!(build_square_weak(&entry("caseA"), 8, 1.0, 0.0).is_err());
    }

    #[test]
    fn even_form_matches_network() {
        let e = entry("caseC");
        let w = weak_weight(&e.weak().cloned().unwrap(), 8, 1.0);
        let a = build_square_weak(&e, 8, 1.0, w).unwrap();
        let net = a.unclipped.as_ref().unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let via_net = net.eval_scalar(&[x]).unwrap();
            let via_form = a.unclipped_value(&[x]).unwrap();
            assert!((via_net - via_form).abs() <= 1e-12 * via_net.abs().max(1.0));
        }
    }

    #[test]
    fn product2_zero_input_collapses() {
        let a = build_product2(&entry("silu"), 64, 1.0).unwrap();
        for y in [-1.0, -0.3, 0.2, 0.9] {
            let v = a.network.eval_scalar(&[0.0, y]).unwrap();
            assert!(v.abs() <= 1e-14, "phi(0, {y}) = {v}");
        }
    }

    #[test]
    fn product2_certificate() {
        let a = build_product2(&entry("silu"), 16, 1.0).unwrap();
        assert_relative_eq!(a.network.cert.norm_budget, 96.0);
        let report = check_norm_constraint(&a.network);
        assert!(report.ok, "{report:?}");
        // Hand recomputation: the scale row sums to 3|d_k|, input rows to 2w.
        assert_relative_eq!(
            report.layer_norms[1],
            3.0 * a.info.d_k.abs(),
            epsilon = 1e-12
        );
        assert!(report.layer_norms[0] <= 1.0);
    }

    #[test]
    fn product2_error_at_corner() {
        let a = build_product2(&entry("silu"), 64, 1.0).unwrap();
        let v = a.network.eval_scalar(&[1.0, 1.0]).unwrap();
        assert!((v - 1.0).abs() <= 9.0 * 0.022 / 0.25 / 64.0);
    }

    #[test]
    fn product_d_one_is_exact_passthrough() {
        let a = build_product_d(&entry("silu"), 1, 16, 1.0).unwrap();
        assert_eq!(a.network.depth(), 0);
        assert_relative_eq!(a.network.cert.norm_budget, 1.0);
        assert_eq!(a.network.eval_scalar(&[0.37]).unwrap(), 0.37);
        assert_eq!(a.predicted_bound, 0.0);
    }

    #[test]
    fn product_d_two_matches_product2() {
        let t = build_product_d(&entry("silu"), 2, 16, 1.0).unwrap();
        let p = build_product2(&entry("silu"), 16, 1.0).unwrap();
        assert!(t.network.structurally_equal(&p.network));
    }

    #[test]
    fn product_d_certificate_formulas() {
        let a = build_product_d(&entry("silu"), 5, 16, 1.0).unwrap();
        assert_eq!(a.network.cert.width, 18); // 6 * ceil(5/2)
        assert_eq!(a.network.cert.depth, 6); // 2 * ceil(log2 5)
        assert_relative_eq!(
            a.network.cert.norm_budget,
            96.0f64.powi(3),
            max_relative = 1e-12
        );
        assert!(check_norm_constraint(&a.network).ok);
    }

    #[test]
    fn product_d_four_error_within_bound() {
        let a = build_product_d(&entry("silu"), 4, 256, 1.0).unwrap();
        let grid = EvalGrid::new(EvalBox::symmetric(4), 21).unwrap();
        let err = sup_error(|x| x.iter().product::<f64>(), &a.network, &grid).unwrap();
        assert!(
            err <= a.predicted_bound * (1.0 + 1e-6),
            "{err} vs {}",
            a.predicted_bound
        );
    }

    #[test]
    fn product_d_zero_rejected() {
        assert!(build_product_d(&entry("silu"), 0, 16, 1.0).is_err());
    }

    #[test]
    fn tree_level_errors_satisfy_recursion() {
        let e = entry("silu");
        let pts = EvalBox::symmetric(4).sample(2000, 17);
        let levels = product_tree_level_errors(&e, 4, 64, 1.0, &pts).unwrap();
        let spec = e.taylor().unwrap();
        let eps_k = 9.0 * spec.m / spec.a2.abs() / 64.0;
        assert!(levels[0] <= eps_k);
        for l in 1..levels.len() {
            assert!(
                levels[l] <= 2.0 * levels[l - 1] + eps_k + 1e-12,
                "level {l}: {} vs {}",
                levels[l],
                2.0 * levels[l - 1] + eps_k
            );
        }
    }

    #[test]
    fn scaling_sweep_recovers_alpha() {
        let fit = scaling_sweep(&entry("silu"), 1.0, &[8, 16, 32, 64]).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01, "slope {}", fit.slope);
        let fit2 = scaling_sweep(&entry("silu"), 2.0, &[8, 16, 32, 64]).unwrap();
        assert!((fit2.slope - 2.0).abs() < 0.01, "slope {}", fit2.slope);
    }

    #[test]
    fn constant_sequence_has_zero_slope() {
        let fit = loglog_slope(&[8.0, 16.0, 32.0, 64.0], &[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_single_point() {
        assert!(scaling_sweep(&entry("silu"), 1.0, &[8]).is_err());
    }
}
