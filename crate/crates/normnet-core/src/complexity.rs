//! Rademacher complexity of network evaluations: exact enumeration,
//! Monte-Carlo estimation, closed-form upper/lower bounds, and the witness
//! families attaining the lower bounds.
//!
//! The complexity of an evaluation set is
//! `R_n(S) = E_ξ [ sup_{s∈S} (1/n) |Σᵢ ξᵢ sᵢ| ]` over i.i.d. sign variables
//! ξᵢ. The supremum over an infinite network class is not computable; all
//! estimators here operate on finite [`FunctionFamily`] witnesses, so upper
//! bounds are verified as one-sided dominance over witnesses, never as
//! tightness.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activations::ActivationEntry;
use crate::error::{Error, Result};
use crate::network::{check_norm_constraint, ArchitectureCert, Layer, Network};

/// Evaluation points `x₁, …, x_n ∈ [-B, B]^d` with the per-coordinate
/// root-mean-square statistic `s = max_j (n⁻¹ Σᵢ x_{i,j}²)^{1/2}`.
#[derive(Debug, Clone)]
pub struct SamplePanel {
    pub points: Vec<Vec<f64>>,
    pub bound: f64,
    pub s_stat: f64,
}

impl SamplePanel {
    pub fn new(points: Vec<Vec<f64>>, bound: f64) -> Result<Self> {
        if points.is_empty() || points[0].is_empty() {
            return Err(Error::Precondition("panel needs at least one point".into()));
        }
        if bound < 1.0 {
            return Err(Error::Precondition("panel bound B must be >= 1".into()));
        }
        let d = points[0].len();
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch(
                    "panel points have mixed dimensions".into(),
                ));
            }
            if p.iter().any(|v| v.abs() > bound * (1.0 + 1e-12)) {
                return Err(Error::Precondition(format!(
                    "panel point {p:?} outside [-{bound}, {bound}]^d"
                )));
            }
        }
        let s_stat = Self::s_statistic(&points);
        Ok(Self {
            points,
            bound,
            s_stat,
        })
    }

    /// Recompute `s` from the points.
    pub fn s_statistic(points: &[Vec<f64>]) -> f64 {
        let n = points.len() as f64;
        let d = points[0].len();
        (0..d)
            .map(|j| (points.iter().map(|p| p[j] * p[j]).sum::<f64>() / n).sqrt())
            .fold(0.0, f64::max)
    }

    /// Uniform random panel in `[-B, B]^d`.
    pub fn random(n: usize, d: usize, bound: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| (0..d).map(|_| bound * (2.0 * rng.gen::<f64>() - 1.0)).collect())
            .collect();
        Self::new(points, bound)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One member of a finite witness family.
#[derive(Clone)]
pub struct FamilyMember {
    pub label: String,
    pub network: Option<Network>,
    eval: EvalFn,
}

impl FamilyMember {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// A nonempty finite list of scalar evaluators over a common input space.
#[derive(Clone)]
pub struct FunctionFamily {
    pub input_dim: usize,
    members: Vec<FamilyMember>,
}

impl FunctionFamily {
    pub fn from_networks(nets: Vec<Network>) -> Result<Self> {
        if nets.is_empty() {
            return Err(Error::Precondition("family must be nonempty".into()));
        }
        let input_dim = nets[0].input_dim;
        let mut members = Vec::with_capacity(nets.len());
        for (i, net) in nets.into_iter().enumerate() {
            if net.input_dim != input_dim {
                return Err(Error::DimensionMismatch(
                    "family networks have mixed input dimensions".into(),
                ));
            }
            let shared = Arc::new(net);
            let eval_net = shared.clone();
            members.push(FamilyMember {
                label: format!("net{i}"),
                network: Some((*shared).clone()),
                eval: Arc::new(move |x: &[f64]| eval_net.eval_scalar(x).unwrap_or(f64::NAN)),
            });
        }
        Ok(Self { input_dim, members })
    }

    pub fn from_functions(input_dim: usize, fns: Vec<(String, EvalFn)>) -> Result<Self> {
        if fns.is_empty() {
            return Err(Error::Precondition("family must be nonempty".into()));
        }
        Ok(Self {
            input_dim,
            members: fns
                .into_iter()
                .map(|(label, eval)| FamilyMember {
                    label,
                    network: None,
                    eval,
                })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// Evaluation vectors, one row per member.
    pub fn evaluation_matrix(&self, panel: &SamplePanel) -> Result<Vec<Vec<f64>>> {
        if panel.dim() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "panel dimension {} vs family input {}",
                panel.dim(),
                self.input_dim
            )));
        }
        Ok(self
            .members
            .iter()
            .map(|m| panel.points.iter().map(|p| m.eval(p)).collect())
            .collect())
    }
}

/// Exact Rademacher complexity of explicit evaluation vectors by
/// enumerating all 2ⁿ sign patterns.
pub fn rademacher_exact_vectors(vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.is_empty() || vectors[0].is_empty() {
        return Err(Error::Precondition("need at least one vector".into()));
    }
    let n = vectors[0].len();
    if n > 20 {
        return Err(Error::Precondition(format!(
            "exact enumeration capped at n = 20 (got {n}); use the Monte-Carlo estimator"
        )));
    }
    let total = 1u64 << n;
    let mut acc = 0.0;
    for mask in 0..total {
        let mut sup = 0.0f64;
        for v in vectors {
            let mut sum = 0.0;
            for (i, vi) in v.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum += vi;
                } else {
                    sum -= vi;
                }
            }
            sup = sup.max(sum.abs());
        }
        acc += sup;
    }
    Ok(acc / (total as f64) / (n as f64))
}

/// Exact Rademacher complexity of a family's evaluations on a panel
/// (`n ≤ 20`; the expectation is enumerated, the sup runs over the family).
pub fn rademacher_exact(family: &FunctionFamily, panel: &SamplePanel) -> Result<f64> {
    rademacher_exact_vectors(&family.evaluation_matrix(panel)?)
}

/// Monte-Carlo estimate of the same expectation with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Unbiased Monte-Carlo estimator of the Rademacher complexity: draws sign
/// vectors, averages the per-draw suprema. Reproducible by seed.
pub fn rademacher_mc(
    family: &FunctionFamily,
    panel: &SamplePanel,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 100 {
        return Err(Error::Precondition(format!(
            "Monte-Carlo estimator needs >= 100 trials, got {trials}"
        )));
    }
    let matrix = family.evaluation_matrix(panel)?;
    let n = panel.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(trials as usize);
    let mut signs = vec![1.0f64; n];
    for _ in 0..trials {
        for s in signs.iter_mut() {
            *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        let mut sup = 0.0f64;
        for v in &matrix {
            let sum: f64 = v.iter().zip(&signs).map(|(a, s)| a * s).sum();
            sup = sup.max(sum.abs());
        }
        values.push(sup / n as f64);
    }
    let mean = values.iter().sum::<f64>() / trials as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials as f64 - 1.0);
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / trials as f64).sqrt(),
        trials,
    })
}

/// Complexity upper bound for 1-Lipschitz activations:
/// `(BK/√n)·√(2(L + 1 + log d))` (natural log).
pub fn bound_upper(b: f64, k: f64, n: usize, l: usize, d: usize) -> f64 {
    b * k / (n as f64).sqrt() * (2.0 * (l as f64 + 1.0 + (d as f64).ln())).sqrt()
}

/// Complexity lower bound attained by the ReLU/leaky witness family:
/// `(1/(2√2))·(1-α)·K·s/√n`.
pub fn bound_lower_relu(k: f64, alpha_leak: f64, s: f64, n: usize) -> f64 {
    (1.0 - alpha_leak) * k * s / (2.0 * 2f64.sqrt() * (n as f64).sqrt())
}

/// Lower bound for a general curved activation, with the witness scaling.
#[derive(Debug, Clone, Copy)]
pub struct GeneralLowerBound {
    /// `c⋆·K·s²/n` with `c⋆ = σ'(0)/(8MB²)`.
    pub value: f64,
    pub c_star: f64,
    /// The optimizing witness scale `ε⋆ = σ'(0)·s/(2√2·MB²·√n)`.
    pub eps_star: f64,
}

/// Complexity lower bound for an activation with `σ(0) = 0`, `σ'(0) > 0`
/// and `|σ''| ≤ M` near 0.
pub fn bound_lower_general(
    sigma_prime0: f64,
    m: f64,
    b: f64,
    k: f64,
    s: f64,
    n: usize,
) -> Result<GeneralLowerBound> {
    if sigma_prime0 <= 0.0 || m <= 0.0 {
        return Err(Error::Precondition(
            "need σ'(0) > 0 and curvature bound M > 0".into(),
        ));
    }
    let c_star = sigma_prime0 / (8.0 * m * b * b);
    Ok(GeneralLowerBound {
        value: c_star * k * s * s / n as f64,
        c_star,
        eps_star: sigma_prime0 * s / (2.0 * 2f64.sqrt() * m * b * b * (n as f64).sqrt()),
    })
}

/// Grid estimate of `max_{|z| ≤ delta} |σ''(z)|` by central second
/// differences (curvature constant for [`bound_lower_general`]).
pub fn estimate_second_derivative_bound(entry: &ActivationEntry, delta: f64) -> f64 {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let z = -delta + 2.0 * delta * (i as f64) / 2000.0;
        let dd = (entry.eval(z + h) - 2.0 * entry.eval(z) + entry.eval(z - h)) / (h * h);
        worst = worst.max(dd.abs());
    }
    worst
}

fn builtin(tag: &str) -> Arc<ActivationEntry> {
    crate::activations::Registry::global()
        .resolve(tag)
        .expect("builtin entry")
}

/// Witness family for the ReLU/leaky lower bound: for each coordinate j the
/// bias-free width-2 network `(K/2)(σ(x_j) - σ(-x_j)) = (K/2)(1-α)x_j`.
pub fn build_rad_witness_relu(k: f64, d: usize, alpha_leak: f64) -> Result<FunctionFamily> {
    if d == 0 || k <= 0.0 || !(0.0..1.0).contains(&alpha_leak) {
        return Err(Error::Precondition(
            "need d >= 1, K > 0 and α ∈ [0,1)".into(),
        ));
    }
    let act = if alpha_leak == 0.0 {
        builtin("relu")
    } else {
        crate::activations::Registry::global().resolve(&format!("leaky:{alpha_leak}"))?
    };
    let id = builtin("identity");
    let mut nets = Vec::with_capacity(d);
    for j in 0..d {
        let mut row = vec![0.0; d];
        row[j] = 1.0;
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        let l0 = Layer::uniform(vec![row, neg], vec![0.0, 0.0], &act);
        let l1 = Layer::uniform(vec![vec![k / 2.0, -k / 2.0]], vec![0.0], &id);
        let constrained: Vec<usize> = if k > 1.0 { vec![1] } else { vec![] };
        let cert = ArchitectureCert::new(2, 1, k.max(1.0), constrained, 1)?;
        let net = Network::new(d, vec![l0, l1], cert)?;
        debug_assert!(check_norm_constraint(&net).ok);
        nets.push(net);
    }
    FunctionFamily::from_networks(nets)
}

/// Witness family for the general lower bound: `(K/σ'(0))·σ(ε·x_j)`,
/// linear up to a curvature remainder. `ε` must satisfy the validity range
/// `ε ≤ min(σ'(0), ρ/B)`; the recorded certificate carries the realized
/// budget `max(K/σ'(0), 1)`.
pub fn build_rad_witness_general(
    k: f64,
    d: usize,
    eps: f64,
    entry: &Arc<ActivationEntry>,
    b: f64,
) -> Result<FunctionFamily> {
    let spec = entry.taylor().ok_or_else(|| {
        Error::AssumptionViolated(format!("`{}` carries no Taylor data", entry.tag))
    })?;
    let sigma_prime0 = spec.a1;
    if sigma_prime0 <= 0.0 {
        return Err(Error::AssumptionViolated(format!(
            "`{}` has σ'(0) = {sigma_prime0} <= 0",
            entry.tag
        )));
    }
    if !(eps > 0.0) || eps > sigma_prime0 || eps > spec.rho / b {
        return Err(Error::Precondition(format!(
            "ε = {eps} outside the validity range (0, min(σ'(0) = {sigma_prime0}, ρ/B = {})]",
            spec.rho / b
        )));
    }
    let id = builtin("identity");
    let out = k / sigma_prime0;
    let mut nets = Vec::with_capacity(d);
    for j in 0..d {
        let mut row = vec![0.0; d];
        row[j] = eps;
        let l0 = Layer::uniform(vec![row, vec![0.0; d]], vec![0.0, 0.0], entry);
        let l1 = Layer::uniform(vec![vec![out, 0.0]], vec![0.0], &id);
        let constrained: Vec<usize> = if out > 1.0 { vec![1] } else { vec![] };
        let cert = ArchitectureCert::new(2, 1, out.max(1.0), constrained, 1)?;
        let net = Network::new(d, vec![l0, l1], cert)?;
        debug_assert!(check_norm_constraint(&net).ok);
        nets.push(net);
    }
    FunctionFamily::from_networks(nets)
}

/// Random bias-free networks with 1-Lipschitz activations and normalized
/// layer norms (hidden ≤ 1, output = `k_budget`): a generic witness family
/// for the upper-bound dominance checks.
pub fn random_lipschitz_family(
    count: usize,
    d: usize,
    width: usize,
    depth: usize,
    k_budget: f64,
    seed: u64,
) -> Result<FunctionFamily> {
    if count == 0 || width == 0 {
        return Err(Error::Precondition("need count >= 1 and width >= 1".into()));
    }
    let relu = builtin("relu");
    let id = builtin("identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nets = Vec::with_capacity(count);
    for _ in 0..count {
        let mut layers = Vec::with_capacity(depth + 1);
        let mut in_dim = d;
        for _ in 0..depth {
            let mut rows = Vec::with_capacity(width);
            for _ in 0..width {
                let mut row: Vec<f64> =
                    (0..in_dim).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                let sum: f64 = row.iter().map(|v| v.abs()).sum();
                if sum > 1.0 {
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                }
                rows.push(row);
            }
            layers.push(Layer::uniform(rows, vec![0.0; width], &relu));
            in_dim = width;
        }
        let mut out_row: Vec<f64> = (0..in_dim).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let sum: f64 = out_row.iter().map(|v| v.abs()).sum();
        for v in out_row.iter_mut() {
            *v *= k_budget / sum;
        }
        layers.push(Layer::uniform(vec![out_row], vec![0.0], &id));
        let constrained: Vec<usize> = if k_budget > 1.0 { vec![depth] } else { vec![] };
        let cert = ArchitectureCert::new(
            width.max(d).max(1),
            depth,
            k_budget.max(1.0),
            constrained,
            1,
        )?;
        let net = Network::new(d, layers, cert)?;
        debug_assert!(check_norm_constraint(&net).ok, "{:?}", check_norm_constraint(&net));
        nets.push(net);
    }
    FunctionFamily::from_networks(nets)
}

/// Approximation-error lower-bound rate `(K²L)^{-r/(d-2r)}`, valid for
/// `d > 2r` (rate only; the hidden constant is not reproduced).
pub fn lower_bound_rate(k: f64, l: usize, d: usize, r: f64) -> Result<f64> {
    if (d as f64) <= 2.0 * r {
        return Err(Error::Precondition(format!(
            "rate needs d > 2r (d = {d}, r = {r})"
        )));
    }
    if k < 1.0 || l < 1 {
        return Err(Error::Precondition("need K >= 1 and L >= 1".into()));
    }
    Ok((k * k * l as f64).powf(-r / (d as f64 - 2.0 * r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_family_has_zero_complexity() {
        let fam = FunctionFamily::from_functions(1, vec![("zero".into(), Arc::new(|_: &[f64]| 0.0) as EvalFn)])
            .unwrap();
        let panel = SamplePanel::random(6, 1, 1.0, 3).unwrap();
        assert_eq!(rademacher_exact(&fam, &panel).unwrap(), 0.0);
        let mc = rademacher_mc(&fam, &panel, 200, 1).unwrap();
        assert_eq!(mc.estimate, 0.0);
        assert_eq!(mc.stderr, 0.0);
    }

    #[test]
    fn two_vector_enumeration_oracle() {
        // Evaluation set {(1,1), (-1,1)} at n = 2: every sign pattern leaves
        // one vector at |±2|/2 = 1, so the expectation is exactly 1.
        let r = rademacher_exact_vectors(&[vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap();
        assert_relative_eq!(r, 1.0);
    }

    #[test]
    fn singleton_axis_vector() {
        for n in [3usize, 6, 9] {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            let r = rademacher_exact_vectors(&[v]).unwrap();
            assert_relative_eq!(r, 1.0 / n as f64);
        }
    }

    #[test]
    fn enumeration_rejects_large_n() {
        let v = vec![vec![1.0; 21]];
        assert!(rademacher_exact_vectors(&v).is_err());
    }

    #[test]
    fn mc_matches_exact_within_three_stderr() {
        let fam = build_rad_witness_relu(2.0, 3, 0.0).unwrap();
        let panel = SamplePanel::random(10, 3, 1.0, 17).unwrap();
        let exact = rademacher_exact(&fam, &panel).unwrap();
        let mc = rademacher_mc(&fam, &panel, 4000, 5).unwrap();
        assert!(
            (mc.estimate - exact).abs() <= 3.0 * mc.stderr,
            "exact {exact}, mc {} ± {}",
            mc.estimate,
            mc.stderr
        );
    }

    #[test]
    fn doubling_trials_shrinks_stderr() {
        let fam = build_rad_witness_relu(2.0, 2, 0.0).unwrap();
        let panel = SamplePanel::random(12, 2, 1.0, 29).unwrap();
        let a = rademacher_mc(&fam, &panel, 4000, 7).unwrap();
        let b = rademacher_mc(&fam, &panel, 8000, 7).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!(
            (ratio - 2f64.sqrt()).abs() <= 0.2 * 2f64.sqrt(),
            "stderr ratio {ratio}"
        );
    }

    #[test]
    fn upper_bound_closed_form() {
        let v = bound_upper(1.0, 2.0, 100, 3, 2);
        assert!((v - 0.61274).abs() < 1e-5, "{v}");
        // d = 1 drops the log term.
        let v1 = bound_upper(1.0, 1.0, 4, 1, 1);
        assert_relative_eq!(v1, 0.5 * (4.0f64).sqrt());
        // Linear in K.
        assert_relative_eq!(bound_upper(1.0, 4.0, 100, 3, 2), 2.0 * v);
    }

    #[test]
    fn relu_lower_bound_closed_form() {
        let v = bound_lower_relu(2.0, 0.0, 1.0, 4);
        assert!((v - 0.35355).abs() < 1e-5, "{v}");
        assert_eq!(bound_lower_relu(2.0, 0.0, 0.0, 4), 0.0);
    }

    #[test]
    fn general_lower_bound_closed_form() {
        let g = bound_lower_general(1.0, 1.0, 1.0, 1.0, 1.0, 4).unwrap();
        assert_relative_eq!(g.c_star, 0.125);
        assert_relative_eq!(g.value, 0.125 / 4.0);
        // Homogeneity: s²/n scaling.
        let g2 = bound_lower_general(1.0, 1.0, 1.0, 1.0, 2.0, 8).unwrap();
        assert_relative_eq!(g2.value, 0.125 * 4.0 / 8.0);
    }

    #[test]
    fn relu_witness_computes_scaled_coordinate() {
        let fam = build_rad_witness_relu(3.0, 3, 0.0).unwrap();
        let e1 = vec![1.0, 0.0, 0.0];
        assert_relative_eq!(fam.members()[0].eval(&e1), 1.5);
        assert_relative_eq!(fam.members()[1].eval(&e1), 0.0);
        for m in fam.members() {
            let net = m.network.as_ref().unwrap();
            assert!(net.layers.iter().all(|l| l.bias.iter().all(|b| *b == 0.0)));
            assert!(check_norm_constraint(net).ok);
        }
    }

    #[test]
    fn relu_witness_attains_lower_bound() {
        for seed in [1u64, 2, 3, 4, 5] {
            let panel = SamplePanel::random(8, 3, 1.0, seed).unwrap();
            let k = 2.0;
            let fam = build_rad_witness_relu(k, 3, 0.0).unwrap();
            let exact = rademacher_exact(&fam, &panel).unwrap();
            let lower = bound_lower_relu(k, 0.0, panel.s_stat, panel.n());
            assert!(exact >= lower - 1e-12, "seed {seed}: {exact} < {lower}");
        }
    }

    #[test]
    fn leaky_witness_attains_lower_bound() {
        let panel = SamplePanel::random(8, 2, 1.0, 11).unwrap();
        let fam = build_rad_witness_relu(2.0, 2, 0.3).unwrap();
        let exact = rademacher_exact(&fam, &panel).unwrap();
        let lower = bound_lower_relu(2.0, 0.3, panel.s_stat, panel.n());
        assert!(exact >= lower - 1e-12);
    }

    #[test]
    fn general_witness_linearization() {
        let silu = builtin("silu");
        let k = 2.0;
        let eps = 0.1;
        let fam = build_rad_witness_general(k, 2, eps, &silu, 1.0).unwrap();
        let m = estimate_second_derivative_bound(&silu, 1.0);
        let sigma_prime0 = 0.5;
        let remainder_cap = k / sigma_prime0 * m * eps * eps;
        for i in 0..=100 {
            let x = -1.0 + 2.0 * (i as f64) / 100.0;
            let v = fam.members()[0].eval(&[x, 0.3]);
            assert!(
                (v - k * eps * x).abs() <= remainder_cap,
                "x={x}: {v} vs linear {}",
                k * eps * x
            );
        }
    }

    #[test]
    fn general_witness_rejects_out_of_range_eps() {
        let silu = builtin("silu");
        assert!(build_rad_witness_general(2.0, 2, 0.75, &silu, 1.0).is_err());
        assert!(build_rad_witness_general(2.0, 2, 0.4, &silu, 4.0).is_err());
        assert!(build_rad_witness_general(2.0, 2, 0.2, &silu, 1.0).is_ok());
    }

    #[test]
    fn general_witness_meets_quadratic_lower_bound() {
        let silu = builtin("silu");
        let m = estimate_second_derivative_bound(&silu, 1.0);
        let sigma_prime0 = 0.5;
        let k = 2.0;
        for seed in [3u64, 9, 27] {
            let panel = SamplePanel::random(10, 2, 1.0, seed).unwrap();
            let g = bound_lower_general(sigma_prime0, m, 1.0, k, panel.s_stat, panel.n()).unwrap();
            if g.eps_star > sigma_prime0 || g.eps_star > 1.0 {
                continue; // outside the witness validity range for this panel
            }
            let fam = build_rad_witness_general(k, 2, g.eps_star, &silu, 1.0).unwrap();
            let exact = rademacher_exact(&fam, &panel).unwrap();
            let alpha1 = panel.s_stat / (2.0 * panel.n() as f64).sqrt();
            let alpha2 = m / sigma_prime0;
            let rhs = k * (alpha1 * g.eps_star - alpha2 * g.eps_star * g.eps_star);
            assert!(exact >= rhs - 1e-12, "seed {seed}: {exact} < {rhs}");
        }
    }

    #[test]
    fn lipschitz_family_respects_upper_bound() {
        for seed in [5u64, 6, 7] {
            let fam = random_lipschitz_family(4, 3, 5, 2, 3.0, seed).unwrap();
            let panel = SamplePanel::random(10, 3, 1.0, seed + 100).unwrap();
            let exact = rademacher_exact(&fam, &panel).unwrap();
            let upper = bound_upper(1.0, 3.0, panel.n(), 2, 3);
            assert!(exact <= upper, "seed {seed}: {exact} > {upper}");
        }
    }

    #[test]
    fn scaling_family_scales_estimates() {
        let panel = SamplePanel::random(9, 2, 1.0, 13).unwrap();
        let base = build_rad_witness_relu(1.0, 2, 0.0).unwrap();
        let scaled = build_rad_witness_relu(2.5, 2, 0.0).unwrap();
        let a = rademacher_exact(&base, &panel).unwrap();
        let b = rademacher_exact(&scaled, &panel).unwrap();
        assert_relative_eq!(b, 2.5 * a, max_relative = 1e-12);
        let mc_a = rademacher_mc(&base, &panel, 500, 3).unwrap();
        let mc_b = rademacher_mc(&scaled, &panel, 500, 3).unwrap();
        assert_relative_eq!(mc_b.estimate, 2.5 * mc_a.estimate, max_relative = 1e-12);
    }

    #[test]
    fn rate_formula() {
        let v = lower_bound_rate(2.0, 2, 4, 1.0).unwrap();
        assert!((v - 0.35355).abs() < 1e-5);
        assert_relative_eq!(lower_bound_rate(1.0, 1, 4, 1.0).unwrap(), 1.0);
        assert!(lower_bound_rate(2.0, 2, 2, 1.0).is_err());
    }
}
