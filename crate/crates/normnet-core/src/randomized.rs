//! Randomized approximators: the deterministic constructions with sampled
//! weights and Bernstein-type success-probability guarantees.
//!
//! Weights are drawn as `w_i = k^{-α/2}·√U_i` with `U_i ~ Unif[0,1)`. The
//! sample-mean structure keeps the expected output within a bias threshold
//! `ε₀` of the target, and Bernstein's inequality turns the bounded,
//! bounded-variance per-neuron terms into an exponential tail:
//!
//! `P(|Φ(x) - target| ≤ ε) ≥ 1 - 2·exp(-k(ε-ε₀)²/C)` for `ε > ε₀`.
//!
//! Guarantees are pointwise in `x` (probability over the weight draw at a
//! fixed point); the Monte-Carlo harness reports per-point frequencies and
//! never claims uniform-in-x verification. Bound predictors never fail:
//! below the validity threshold they return the (vacuous, ≤ 0) formula
//! value with a flag, since experiments sweep ε across the threshold.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activations::ActivationEntry;
use crate::algebra::{compose, compose_affine, concat};
use crate::constructors::{binom, ceil_log2, product_k0, square_k0, BuildInfo};
use crate::error::{Error, Result};
use crate::grid::EvalBox;
use crate::linalg;
use crate::lipr::{
    assemble_cube_network, declared_lipr_cert, lipr_scaffold, multi_factorial, CompositeApproximator,
    LiprParams, LiprTarget,
};
use crate::network::{check_norm_constraint, ArchitectureCert, Layer, Network};

/// Reproducible weight-draw source: a counter-based generator where
/// `stream_id` selects an independent substream (one per trial or block).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn substream(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(offset),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Constants of a randomized builder's probabilistic guarantee.
#[derive(Debug, Clone, Copy)]
pub struct BernsteinConstants {
    /// Bias threshold ε₀; the tail bound is meaningful only for ε > ε₀.
    pub eps0: f64,
    /// Denominator of the exponential rate (the constant `C` or `B`).
    pub rate: f64,
    /// Error amplification of the glued builder (`F`), when applicable.
    pub random_scale: Option<f64>,
    /// Deterministic error scale of the glued builder (`G`), when applicable.
    pub deterministic_scale: Option<f64>,
}

/// A lower bound value with its validity flag.
#[derive(Debug, Clone, Copy)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

/// `1 - 2·exp(-k(ε-ε₀)²/rate)`, flagged vacuous at or below the threshold.
pub fn success_lower_bound(k: u64, eps: f64, c: &BernsteinConstants) -> BoundValue {
    let delta = eps - c.eps0;
    let value = if delta > 0.0 {
        1.0 - 2.0 * (-(k as f64) * delta * delta / c.rate).exp()
    } else {
        -1.0
    };
    BoundValue {
        value,
        vacuous: delta <= 0.0 || value <= 0.0,
    }
}

/// Tree version: `(1 - 2·exp(-k(ε_d-ε₀)²/B))^D` with `ε_d = ε/(2^D-1)`.
pub fn success_lower_bound_tree(k: u64, eps: f64, d: usize, c: &BernsteinConstants) -> BoundValue {
    let levels = ceil_log2(d) as i32;
    if levels == 0 {
        return BoundValue {
            value: 1.0,
            vacuous: false,
        };
    }
    let eps_d = eps / (2f64.powi(levels) - 1.0);
    let per_level = success_lower_bound(k, eps_d, c);
    if per_level.vacuous {
        return BoundValue {
            value: per_level.value,
            vacuous: true,
        };
    }
    BoundValue {
        value: per_level.value.powi(levels),
        vacuous: false,
    }
}

/// A randomized approximator: the sampled network plus its guarantee.
pub struct RandomApproximator {
    pub network: Network,
    pub constants: BernsteinConstants,
    pub info: BuildInfo,
    pub domain: EvalBox,
    pub target: String,
}

pub(crate) fn draw_square_weights(k: u64, alpha: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = (k as f64).powf(-alpha / 2.0);
    (0..k).map(|_| scale * rng.gen::<f64>().sqrt()).collect()
}

fn taylor_of(entry: &ActivationEntry) -> Result<crate::activations::TaylorSpec> {
    entry.taylor().copied().ok_or_else(|| {
        Error::AssumptionViolated(format!("`{}` carries no Taylor data", entry.tag))
    })
}

fn builtin(tag: &str) -> Arc<ActivationEntry> {
    crate::activations::Registry::global()
        .resolve(tag)
        .expect("builtin entry")
}

/// Randomized `x²` approximator on `[0,1]`: `2k` σ-neurons in symmetric
/// pairs with weights `k^{-α/2}√U_i`, averaged by `1/(a₂k^{1-α})`, then
/// clipped. Budget `K = 2k^α/|a₂|`; `ε₀ = 2Mk^{-α}/|a₂|`.
pub fn build_random_square(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
    rng_spec: &RngSpec,
) -> Result<RandomApproximator> {
    let spec = taylor_of(entry)?;
    let k0 = square_k0(spec.rho, alpha);
    if (k as f64) < k0 - 1e-9 {
        return Err(Error::KTooSmall { k, k0 });
    }
    let mut rng = rng_spec.rng();
    let weights = draw_square_weights(k, alpha, &mut rng);

    let mut rows = Vec::with_capacity(2 * k as usize);
    for w in &weights {
        rows.push(vec![*w]);
        rows.push(vec![-*w]);
    }
    let l0 = Layer::uniform(rows, vec![0.0; 2 * k as usize], entry);
    let c = 1.0 / (spec.a2 * (k as f64).powf(1.0 - alpha));
    let l1 = Layer::new(
        vec![vec![c; 2 * k as usize]],
        vec![0.0],
        vec![builtin("clip01")],
    );
    let l2 = Layer::uniform(vec![vec![1.0]], vec![0.0], &builtin("identity"));

    let ka = (k as f64).powf(alpha);
    let budget = 2.0 * ka / spec.a2.abs();
    let cert = ArchitectureCert::new(2 * k as usize, 2, budget, [1], 1)?;
    let network = Network::new(1, vec![l0, l1, l2], cert)?;
    debug_assert!(check_norm_constraint(&network).ok);

    let m = spec.m;
    let a2 = spec.a2.abs();
    let eps0 = 2.0 * m / a2 * ka.recip();
    let c2 = 1.0 / 3.0 + (2.0 * m).powi(2) * ka.powi(-2) / (spec.a2 * spec.a2);
    let rate = 2.0 * c2 + (2.0 / 3.0) * (1.0 + 6.0 * m / a2 * ka.recip()).powi(2);

    Ok(RandomApproximator {
        network,
        constants: BernsteinConstants {
            eps0,
            rate,
            random_scale: None,
            deterministic_scale: None,
        },
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w: (k as f64).powf(-alpha / 2.0),
            d_k: c,
        },
        domain: EvalBox::unit(1),
        target: "x^2 on [0,1]".into(),
    })
}

/// Bernstein variance bound `C₂ = 1/3 + (2M)²k^{-2α}/a₂²` for the centered
/// per-neuron terms of the randomized square builder.
pub fn square_variance_bound(entry: &ActivationEntry, k: u64, alpha: f64) -> Result<f64> {
    let spec = taylor_of(entry)?;
    let ka = (k as f64).powf(alpha);
    Ok(1.0 / 3.0 + (2.0 * spec.m).powi(2) * ka.powi(-2) / (spec.a2 * spec.a2))
}

/// Randomized `xy` approximator on `[-1,1]²`: `4k` neurons in symmetric
/// bilinear blocks `Σ ε₂σ(ε₁wx + ε₁ε₂wy)`, averaged by `1/(4a₂k^{1-α})`,
/// then clipped. Budget `K = k^α/|a₂|`; `ε₀ = 16Mk^{-α}/|a₂|`.
pub fn build_random_product2(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
    rng_spec: &RngSpec,
) -> Result<RandomApproximator> {
    let spec = taylor_of(entry)?;
    let k0 = product_k0(spec.rho, alpha);
    if (k as f64) < k0 - 1e-9 {
        return Err(Error::KTooSmall { k, k0 });
    }
    let mut rng = rng_spec.rng();
    let weights = draw_square_weights(k, alpha, &mut rng);

    let mut rows = Vec::with_capacity(4 * k as usize);
    let c = 1.0 / (4.0 * spec.a2 * (k as f64).powf(1.0 - alpha));
    let mut out_row = Vec::with_capacity(4 * k as usize);
    for w in &weights {
        // S_bil(w; x, y) = σ(w(x+y)) + σ(-w(x+y)) - σ(w(x-y)) - σ(-w(x-y))
        rows.push(vec![*w, *w]);
        out_row.push(c);
        rows.push(vec![-*w, -*w]);
        out_row.push(c);
        rows.push(vec![*w, -*w]);
        out_row.push(-c);
        rows.push(vec![-*w, *w]);
        out_row.push(-c);
    }
    let l0 = Layer::uniform(rows, vec![0.0; 4 * k as usize], entry);
    let l1 = Layer::new(vec![out_row], vec![0.0], vec![builtin("clip11")]);
    let l2 = Layer::uniform(vec![vec![1.0]], vec![0.0], &builtin("identity"));

    let ka = (k as f64).powf(alpha);
    let budget = ka / spec.a2.abs();
    let cert = ArchitectureCert::new(4 * k as usize, 2, budget, [1], 1)?;
    let network = Network::new(2, vec![l0, l1, l2], cert)?;
    debug_assert!(check_norm_constraint(&network).ok);

    Ok(RandomApproximator {
        network,
        constants: bilinear_constants(&spec, k, alpha),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w: (k as f64).powf(-alpha / 2.0),
            d_k: c,
        },
        domain: EvalBox::symmetric(2),
        target: "x*y on [-1,1]^2".into(),
    })
}

fn bilinear_constants(spec: &crate::activations::TaylorSpec, k: u64, alpha: f64) -> BernsteinConstants {
    let ka = (k as f64).powf(alpha);
    let m = spec.m;
    let a2 = spec.a2.abs();
    let eps0 = 16.0 * m / a2 * ka.recip();
    let c2 = 1.0 / 3.0 + 256.0 * m * m * ka.powi(-2) / (spec.a2 * spec.a2);
    let rate = 2.0 * c2 + (2.0 / 3.0) * (1.0 + 48.0 * m / a2 * ka.recip()).powi(2);
    BernsteinConstants {
        eps0,
        rate,
        random_scale: None,
        deterministic_scale: None,
    }
}

/// Randomized product tree on `[-1,1]^d`: independent random bilinear
/// blocks per level and position. Budget `(4k⌈d/2⌉, 2⌈log₂ d⌉,
/// (k^α/|a₂|)^{⌈log₂ d⌉})`; the success predictor is
/// [`success_lower_bound_tree`].
pub fn build_random_product_d(
    entry: &Arc<ActivationEntry>,
    d: usize,
    k: u64,
    alpha: f64,
    rng_spec: &RngSpec,
) -> Result<RandomApproximator> {
    if d == 0 {
        return Err(Error::Precondition(
            "product dimension d must be >= 1".into(),
        ));
    }
    let spec = taylor_of(entry)?;
    let k0 = product_k0(spec.rho, alpha);
    if (k as f64) < k0 - 1e-9 {
        return Err(Error::KTooSmall { k, k0 });
    }

    let levels = ceil_log2(d);
    let ka = (k as f64).powf(alpha);
    let declared_budget = (ka / spec.a2.abs()).powi(levels as i32).max(1.0);
    let declared_width = (4 * k as usize) * d.div_ceil(2);

    let tree = if d == 1 {
        selector_net(1, 0)
    } else {
        let mut current: Option<Network> = None;
        let mut m = d;
        let mut level_idx = 0u64;
        while m > 1 {
            let pairs = m / 2;
            let mut level: Option<Network> = None;
            for j in 0..pairs {
                // Independent substream per (level, block).
                let block_spec = rng_spec.substream(1 + level_idx * 4096 + j as u64);
                let p2 = build_random_product2(entry, k, alpha, &block_spec)?.network;
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
                Some(c) => compose(&level, &c)?,
            });
            m = m.div_ceil(2);
            level_idx += 1;
        }
        current.expect("d >= 2 has at least one level")
    };

    debug_assert!(d == 1 || tree.cert.width <= declared_width);
    let cert = ArchitectureCert::new(
        declared_width.max(1),
        2 * levels as usize,
        declared_budget,
        tree.cert.constrained.clone(),
        1,
    )?;
    let input_dim = tree.input_dim;
    let network = Network::new(input_dim, tree.layers, cert)?;
    debug_assert!(check_norm_constraint(&network).ok);

    Ok(RandomApproximator {
        network,
        constants: bilinear_constants(&spec, k, alpha),
        info: BuildInfo {
            tag: entry.tag.clone(),
            k,
            alpha,
            w: (k as f64).powf(-alpha / 2.0),
            d_k: 1.0 / (4.0 * spec.a2 * (k as f64).powf(1.0 - alpha)),
        },
        domain: EvalBox::symmetric(d),
        target: format!("prod(x_1..x_{d}) on [-1,1]^{d}"),
    })
}

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

/// A randomized glued approximator with its guarantee constants.
pub struct RandomComposite {
    pub approximator: CompositeApproximator,
    pub constants: BernsteinConstants,
    /// Exponent of the success probability:
    /// `⌈log₂ d⌉ · C(m+d, d)` shared monomial networks.
    pub probability_exponent: f64,
}

impl RandomComposite {
    /// `P(|f - φ| ≤ F·ε + G·k^{-α}) ≥ (1 - 2exp(-kε²/B))^exponent`.
    pub fn success_lower_bound(&self, eps: f64) -> BoundValue {
        if self.probability_exponent == 0.0 {
            // No random monomial networks at all: the error is deterministic.
            return BoundValue {
                value: 1.0,
                vacuous: false,
            };
        }
        if eps <= 0.0 {
            return BoundValue {
                value: -1.0,
                vacuous: true,
            };
        }
        let k = self.approximator.params.k;
        let inner = 1.0 - 2.0 * (-(k as f64) * eps * eps / self.constants.rate).exp();
        if inner <= 0.0 {
            return BoundValue {
                value: inner,
                vacuous: true,
            };
        }
        BoundValue {
            value: inner.powf(self.probability_exponent),
            vacuous: false,
        }
    }

    /// Total error threshold `F·ε + G·k^{-α}` for the guarantee at ε.
    pub fn error_threshold(&self, eps: f64) -> f64 {
        let f = self.constants.random_scale.unwrap_or(0.0);
        let g = self.constants.deterministic_scale.unwrap_or(0.0);
        f * eps + g * (self.approximator.params.k as f64).powf(-self.approximator.params.alpha)
    }
}

/// Randomized Lipschitz-regular approximator: one random monomial network
/// per multi-index, shared across all cubes, glued exactly as the
/// deterministic builder. `F = (2^{⌈log₂ d⌉}-1)e^d`,
/// `G = e^d(1 + 16M(2^{⌈log₂ d⌉}-1)/|a₂|)`.
pub fn build_random_lipr(
    entry: &Arc<ActivationEntry>,
    params: &LiprParams,
    target: &dyn LiprTarget,
    rng_spec: &RngSpec,
) -> Result<RandomComposite> {
    let scaffold = lipr_scaffold(params)?;
    let spec = taylor_of(entry)?;

    // One random tree per multi-index with degree >= 1, shared across cubes.
    let mut trees: BTreeMap<Vec<usize>, Network> = BTreeMap::new();
    for (idx, s) in scaffold.monomials.iter().enumerate() {
        if s.iter().sum::<usize>() >= 1 {
            let tree_spec = rng_spec.substream(1 + idx as u64 * (1 << 20));
            let tree =
                build_random_product_d(entry, scaffold.n_slots, params.k, params.alpha, &tree_spec)?;
            trees.insert(s.clone(), tree.network);
        }
    }

    let n_cubes = scaffold.partition.n_cubes();
    let mut cube_networks = Vec::with_capacity(n_cubes);
    let mut materialized_depth = 0usize;
    for j in 0..n_cubes {
        let center = scaffold.partition.center(j);
        let coeffs: Vec<f64> = scaffold
            .monomials
            .iter()
            .map(|s| target.partial(s, &center) / multi_factorial(s))
            .collect();
        let placeholder = selector_net(params.d.max(1), 0);
        let net = assemble_cube_network(
            &center,
            &scaffold.monomials,
            &coeffs,
            |s| trees.get(s).cloned().unwrap_or_else(|| placeholder.clone()),
            scaffold.n_slots,
        )?;
        materialized_depth = materialized_depth.max(net.depth());
        cube_networks.push(net);
    }

    let declared_cert = declared_lipr_cert(
        params.d,
        params.m,
        spec.a2,
        params.k,
        params.alpha,
        n_cubes,
    )?;
    let levels = ceil_log2(params.d) as i32;
    let tree_factor = 2f64.powi(levels) - 1.0;
    let e_d = (params.d as f64).exp();
    let f_scale = tree_factor * e_d;
    let g_scale = e_d * (1.0 + 16.0 * spec.m * tree_factor / spec.a2.abs());
    let constants = BernsteinConstants {
        random_scale: Some(f_scale),
        deterministic_scale: Some(g_scale),
        ..bilinear_constants(&spec, params.k, params.alpha)
    };

    let h = scaffold.partition.h;
    let approximator = CompositeApproximator {
        partition: scaffold.partition,
        cube_networks,
        declared_cert,
        materialized: false,
        materialized_depth,
        predicted_bound: f64::NAN, // probabilistic; see `error_threshold`
        info: BuildInfo {
            tag: entry.tag.clone(),
            k: params.k,
            alpha: params.alpha,
            w: (params.k as f64).powf(-params.alpha / 2.0),
            d_k: h,
        },
        params: params.clone(),
    };
    Ok(RandomComposite {
        approximator,
        constants,
        probability_exponent: levels as f64 * binom(params.m + params.d, params.d),
    })
}

/// Feasibility constants and success bound of the glued randomized builder
/// under a width/budget pair, `P ≥ 1 - C₂·exp(-C₃·K·ε²)`.
#[derive(Debug, Clone)]
pub struct ProbabilityBound {
    /// Lower bound clamped to `[0, 1]`.
    pub lower_bound: f64,
    /// Unclamped `1 - C₂·exp(-kε²/B)`.
    pub raw_value: f64,
    pub vacuous: bool,
    pub c2: f64,
    /// Assembled so that `C₃·K = k/B` for the selected k.
    pub c3: f64,
    pub k_used: u64,
    pub rate: f64,
}

/// Success-probability calculator for a `(W, K)` budget: selects the
/// largest admissible `k`, then evaluates
/// `1 - 2⌈log₂ d⌉C(m+d,d)·exp(-kε²/B)` clamped to `[0, 1]`.
pub fn approx_success_bound(
    entry: &Arc<ActivationEntry>,
    width: usize,
    budget: f64,
    d: usize,
    m: usize,
    beta: f64,
    alpha: f64,
    eps: f64,
) -> Result<ProbabilityBound> {
    let spec = taylor_of(entry)?;
    if d == 0 || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Precondition("need d >= 1 and beta in (0,1]".into()));
    }
    let r = m as f64 + beta;
    let gamma = alpha / r;
    let levels = ceil_log2(d) as i32;
    let k0 = product_k0(spec.rho, alpha).max(1.0);
    let nmono = binom(m + d, d);

    let c1 = 4.0 * (d.div_ceil(2) as f64) * nmono * k0.powf(1.0 + d as f64 * gamma);
    let c2_slope =
        k0.powf(alpha * levels as f64) / (4.0 * (d.div_ceil(2) as f64) * spec.a2.abs().powi(levels));
    let w = width as f64;
    if w < c1 * (1.0 - 1e-12) || budget < c2_slope * w * (1.0 - 1e-12) {
        return Err(Error::Infeasible {
            c1,
            c2: c2_slope,
            min_k: c2_slope * w,
        });
    }

    // Largest k whose randomized glued certificate fits (W, K).
    let fits = |k: u64| -> Result<bool> {
        let kf = k as f64;
        let n_axis = (kf.powf(gamma) - 1e-9).ceil();
        let n_cubes = n_axis.powi(d as i32);
        let w_k = 4.0 * kf * (d.div_ceil(2) as f64) * nmono * n_cubes;
        let k_k = nmono / spec.a2.abs().powi(levels) * kf.powf(alpha * levels as f64) * n_cubes;
        Ok(w_k <= w * (1.0 + 1e-12) && k_k <= budget * (1.0 + 1e-12))
    };
    // Analytic start: W grows at least linearly in k.
    let mut k = (w / (4.0 * (d.div_ceil(2) as f64) * nmono)).floor() as u64;
    while k as f64 >= k0 - 1e-9 && !fits(k)? {
        k -= 1;
    }
    if (k as f64) < k0 - 1e-9 {
        return Err(Error::Infeasible {
            c1,
            c2: c2_slope,
            min_k: c2_slope * w,
        });
    }

    let consts = bilinear_constants(&spec, k, alpha);
    let c2 = 2.0 * levels as f64 * nmono;
    let raw = 1.0 - c2 * (-(k as f64) * eps * eps / consts.rate).exp();
    Ok(ProbabilityBound {
        lower_bound: raw.clamp(0.0, 1.0),
        raw_value: raw,
        vacuous: raw <= 0.0,
        c2,
        c3: (k as f64) / (budget * consts.rate),
        k_used: k,
        rate: consts.rate,
    })
}

/// One verification row: empirical success frequency against the predicted
/// lower bound for a fixed `(ε, point)` pair.
#[derive(Debug, Clone)]
pub struct SuccessRecord {
    pub case: String,
    pub k: u64,
    pub alpha: f64,
    pub point: Vec<f64>,
    pub eps: f64,
    pub trials: u64,
    pub successes: u64,
    pub empirical_freq: f64,
    pub predicted_lower: f64,
    pub vacuous: bool,
    /// `freq - predicted + 3σ_binomial`; dominance is violated when < 0.
    pub margin: f64,
}

impl SuccessRecord {
    pub fn dominance_ok(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Run `trials` independent builds and tabulate per-(ε, point) success
/// frequencies against a predicted lower bound. `make_eval` receives the
/// per-trial substream; `predict` maps ε to its closed-form lower bound.
pub fn success_frequencies<E>(
    case: &str,
    k: u64,
    alpha: f64,
    eps_list: &[f64],
    points: &[Vec<f64>],
    trials: u64,
    base: &RngSpec,
    thresholds: impl Fn(f64) -> f64,
    mut make_eval: impl FnMut(RngSpec) -> Result<E>,
    target: impl Fn(&[f64]) -> f64,
    predict: impl Fn(f64) -> BoundValue,
) -> Result<Vec<SuccessRecord>>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    if trials == 0 {
        return Err(Error::Precondition("at least one trial required".into()));
    }
    let mut successes = vec![vec![0u64; eps_list.len()]; points.len()];
    for t in 0..trials {
        let eval = make_eval(base.substream(t))?;
        for (pi, x) in points.iter().enumerate() {
            let dev = (eval(x)? - target(x)).abs();
            for (ei, &eps) in eps_list.iter().enumerate() {
                if dev <= thresholds(eps) {
                    successes[pi][ei] += 1;
                }
            }
        }
    }
    let mut records = Vec::with_capacity(points.len() * eps_list.len());
    for (pi, x) in points.iter().enumerate() {
        for (ei, &eps) in eps_list.iter().enumerate() {
            let s = successes[pi][ei];
            let freq = s as f64 / trials as f64;
            let bound = predict(eps);
            let p0 = bound.value.clamp(0.0, 1.0);
            let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
            records.push(SuccessRecord {
                case: case.to_string(),
                k,
                alpha,
                point: x.clone(),
                eps,
                trials,
                successes: s,
                empirical_freq: freq,
                predicted_lower: bound.value,
                vacuous: bound.vacuous,
                margin: freq - bound.value + 3.0 * sigma,
            });
        }
    }
    Ok(records)
}

/// Sample mean and standard error of a statistic over independent draws.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
    pub n: u64,
}

fn moments(values: &[f64]) -> MomentEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    MomentEstimate {
        mean,
        stderr: (variance / n).sqrt(),
        variance,
        n: values.len() as u64,
    }
}

/// Sample moments of the unclipped randomized square output `Φ(x)` over
/// independent weight draws (bias study for the mean bound `ε₀`).
pub fn square_output_moments(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
    x: f64,
    n_builds: u64,
    base: &RngSpec,
) -> Result<MomentEstimate> {
    let spec = taylor_of(entry)?;
    let c = 1.0 / (spec.a2 * (k as f64).powf(1.0 - alpha));
    let mut values = Vec::with_capacity(n_builds as usize);
    for t in 0..n_builds {
        let mut rng = base.substream(t).rng();
        let weights = draw_square_weights(k, alpha, &mut rng);
        let sum: f64 = weights
            .iter()
            .map(|w| entry.eval(w * x) + entry.eval(-w * x))
            .sum();
        values.push(c * sum);
    }
    Ok(moments(&values))
}

/// Sample variance of the centered per-neuron terms
/// `Y_i(x) = (S_sym(w_i;x) - E[S_sym])/(a₂k^{-α})` over `n` weight draws,
/// centered with the sample mean.
pub fn square_term_variance(
    entry: &Arc<ActivationEntry>,
    k: u64,
    alpha: f64,
    x: f64,
    n: u64,
    base: &RngSpec,
) -> Result<MomentEstimate> {
    let spec = taylor_of(entry)?;
    let scale = 1.0 / (spec.a2 * (k as f64).powf(-alpha));
    let mut rng = base.rng();
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let w = (k as f64).powf(-alpha / 2.0) * rng.gen::<f64>().sqrt();
            entry.eval(w * x) + entry.eval(-w * x)
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let terms: Vec<f64> = draws.iter().map(|s| scale * (s - mean)).collect();
    Ok(moments(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::Registry;
    use approx::assert_relative_eq;

    fn entry(tag: &str) -> Arc<ActivationEntry> {
        Registry::global().resolve(tag).unwrap()
    }

    #[test]
    fn eps0_formula_plugin() {
        // M = 1, |a2| = 1, k = 100, alpha = 1 gives eps0 = 0.02.
        let e = Arc::new(ActivationEntry::new(
            "unit-quad",
            Arc::new(|t: f64| t * t),
            crate::activations::ActivationMeta::Taylor(crate::activations::TaylorSpec {
                a1: 0.0,
                a2: 1.0,
                a3: 0.0,
                m: 1.0,
                rho: 1.0,
            }),
        ));
        let r = build_random_square(&e, 100, 1.0, &RngSpec::new(1)).unwrap();
        assert_relative_eq!(r.constants.eps0, 0.02);
    }

    #[test]
    fn fixed_seed_reproduces_network() {
        let e = entry("silu");
        let spec = RngSpec::new(42);
        let a = build_random_square(&e, 50, 1.0, &spec).unwrap();
        let b = build_random_square(&e, 50, 1.0, &spec).unwrap();
        assert_eq!(a.network.to_json(), b.network.to_json());
        let c = build_random_square(&e, 50, 1.0, &spec.substream(1)).unwrap();
        assert_ne!(a.network.to_json(), c.network.to_json());
    }

    #[test]
    fn random_square_certificate_and_range() {
        let e = entry("silu");
        let r = build_random_square(&e, 64, 1.0, &RngSpec::new(3)).unwrap();
        assert_relative_eq!(r.network.cert.norm_budget, 2.0 * 64.0 / 0.25);
        assert!(check_norm_constraint(&r.network).ok);
        for x in EvalBox::unit(1).sample(500, 7) {
            let y = r.network.eval_scalar(&x).unwrap();
            assert!((0.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn random_product2_zero_at_origin() {
        let e = entry("silu");
        let r = build_random_product2(&e, 32, 1.0, &RngSpec::new(5)).unwrap();
        assert_eq!(r.network.eval_scalar(&[0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(r.network.cert.norm_budget, 32.0 / 0.25);
        assert!(check_norm_constraint(&r.network).ok);
    }

    #[test]
    fn random_square_mean_is_nearly_unbiased() {
        let e = entry("silu");
        let k = 200;
        let r = build_random_square(&e, k, 1.0, &RngSpec::new(1)).unwrap();
        for x in [0.0, 0.3, 0.7, 1.0] {
            let m = square_output_moments(&e, k, 1.0, x, 20_000, &RngSpec::new(11)).unwrap();
            let bias = (m.mean - x * x).abs();
            assert!(
                bias <= r.constants.eps0 + 3.0 * m.stderr,
                "x={x}: bias {bias} vs {} + {}",
                r.constants.eps0,
                3.0 * m.stderr
            );
        }
    }

    #[test]
    fn per_term_variance_within_bernstein_bound() {
        let e = entry("silu");
        let k = 200;
        let c2 = square_variance_bound(&e, k, 1.0).unwrap();
        for x in [0.0, 0.3, 0.7, 1.0] {
            let m = square_term_variance(&e, k, 1.0, x, 50_000, &RngSpec::new(23)).unwrap();
            let slack = 3.0 * m.variance * (2.0 / (m.n as f64 - 1.0)).sqrt();
            assert!(
                m.variance <= c2 + slack + 1e-12,
                "x={x}: var {} vs bound {c2}",
                m.variance
            );
        }
    }

    #[test]
    fn tree_d1_has_certain_success() {
        let e = entry("silu");
        let r = build_random_product_d(&e, 1, 16, 1.0, &RngSpec::new(2)).unwrap();
        assert_eq!(r.network.eval_scalar(&[0.4]).unwrap(), 0.4);
        let b = success_lower_bound_tree(16, 0.1, 1, &r.constants);
        assert_eq!(b.value, 1.0);
        assert!(!b.vacuous);
    }

    #[test]
    fn tree_d2_bound_matches_bilinear() {
        let e = entry("silu");
        let r = build_random_product_d(&e, 2, 100, 1.0, &RngSpec::new(2)).unwrap();
        let eps = 3.0 * r.constants.eps0;
        let via_tree = success_lower_bound_tree(100, eps, 2, &r.constants);
        let direct = success_lower_bound(100, eps, &r.constants);
        assert_relative_eq!(via_tree.value, direct.value);
    }

    #[test]
    fn bound_is_vacuous_below_threshold() {
        let e = entry("silu");
        let r = build_random_square(&e, 100, 1.0, &RngSpec::new(9)).unwrap();
        let below = success_lower_bound(100, r.constants.eps0 * 0.5, &r.constants);
        assert!(below.vacuous);
        let above = success_lower_bound(100, 1.0, &r.constants);
        assert!(!above.vacuous);
        assert!(above.value > 0.9);
    }

    #[test]
    fn success_frequency_dominates_bound() {
        let e = entry("silu");
        let k = 200;
        let proto = build_random_square(&e, k, 1.0, &RngSpec::new(0)).unwrap();
        let consts = proto.constants;
        let records = success_frequencies(
            "square",
            k,
            1.0,
            &[2.0 * consts.eps0, 0.05, 0.2],
            &[vec![0.7]],
            2_000,
            &RngSpec::new(31),
            |eps| eps,
            |spec| {
                let net = build_random_square(&e, k, 1.0, &spec)?.network;
                Ok(move |x: &[f64]| net.eval_scalar(x))
            },
            |x| x[0] * x[0],
            |eps| success_lower_bound(k, eps, &consts),
        )
        .unwrap();
        for r in &records {
            assert!(r.dominance_ok(), "{r:?}");
        }
        // The wide tolerance must be informative, not vacuous.
        assert!(records.iter().any(|r| !r.vacuous && r.predicted_lower > 0.5));
    }

    #[test]
    fn random_lipr_zero_target_is_exact() {
        let e = entry("silu");
        let params = LiprParams {
            d: 1,
            m: 0,
            beta: 1.0,
            alpha: 1.0,
            gamma: None,
            k: 16,
        };
        let rc = build_random_lipr(&e, &params, &crate::lipr::ZeroTarget, &RngSpec::new(4)).unwrap();
        for x in EvalBox::unit(1).sample(100, 13) {
            assert_eq!(rc.approximator.eval(&x).unwrap(), 0.0);
        }
        assert_eq!(rc.probability_exponent, 0.0);
        let b = rc.success_lower_bound(0.1);
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn random_lipr_f_g_constants() {
        let e = entry("silu");
        let params = LiprParams {
            d: 2,
            m: 2,
            beta: 1.0,
            alpha: 1.0,
            gamma: Some(0.4),
            k: 16,
        };
        let rc =
            build_random_lipr(&e, &params, &crate::lipr::ZeroTarget, &RngSpec::new(4)).unwrap();
        let e2 = 2f64.exp();
        assert_relative_eq!(rc.constants.random_scale.unwrap(), e2, max_relative = 1e-12);
        let spec = e.taylor().unwrap();
        let g = e2 * (1.0 + 16.0 * spec.m / spec.a2.abs());
        assert_relative_eq!(
            rc.constants.deterministic_scale.unwrap(),
            g,
            max_relative = 1e-12
        );
        assert_eq!(rc.probability_exponent, 6.0); // 1 level * C(4,2)
    }

    #[test]
    fn probability_bound_limits() {
        let e = entry("silu");
        // Large ε ⇒ bound → 1; ε = 0 ⇒ vacuous, clamped to 0.
        let b = approx_success_bound(&e, 4000, 1e9, 2, 0, 1.0, 1.0, 50.0).unwrap();
        assert!(b.lower_bound > 0.999);
        assert!(!b.vacuous);
        let z = approx_success_bound(&e, 4000, 1e9, 2, 0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(z.lower_bound, 0.0);
        assert!(z.vacuous);
        assert_relative_eq!(z.c2, 2.0); // 2·⌈log₂ 2⌉·C(2,2)
    }

    #[test]
    fn probability_bound_rejects_infeasible() {
        let e = entry("silu");
        assert!(matches!(
            approx_success_bound(&e, 3, 1e9, 2, 0, 1.0, 1.0, 0.1),
            Err(Error::Infeasible { .. })
        ));
    }
}
