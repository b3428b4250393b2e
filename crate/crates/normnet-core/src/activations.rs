//! Activation registry: scalar activations together with the analytic
//! metadata the constructive approximators rely on.
//!
//! An activation is usable by the quadratic builders in one of three ways:
//!
//! * a [`TaylorSpec`]: `σ(t) = a₁t + a₂t² + a₃t³ + r(t)` with `|r(t)| ≤ M t⁴`
//!   on `[-ρ, ρ]` and `a₂ ≠ 0`;
//! * a [`WeakSpec`]: only the even second difference at a point `x₀` is
//!   controlled, `|σ(x₀+h) + σ(x₀-h) - 2σ(x₀) - γh²| ≤ ω(|h|)h²`;
//! * a [`PiecewiseLinear`] tag (ReLU family, identity, clipping units) used
//!   for exact plumbing: pass-through channels and range clipping.
//!
//! Both spec kinds are *declared* and then numerically re-verified with
//! [`verify_taylor_spec`] / [`verify_weak_spec`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// Shared scalar function handle.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Third-order Taylor data at the origin with a quartic remainder bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorSpec {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Remainder constant: `|σ(t) - a₁t - a₂t² - a₃t³| ≤ M t⁴` on `[-ρ, ρ]`.
    pub m: f64,
    /// Validity radius, in `(0, 1]`.
    pub rho: f64,
}

/// Modulus of continuity used by weak (even-second-difference) specs.
///
/// Kept as structured data rather than a closure so builders can invert it
/// when choosing weights `w_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    /// `ω(t) = coeff · t^beta`
    Power { coeff: f64, beta: f64 },
    /// `ω(t) = coeff / log(e / t)`
    Log { coeff: f64 },
    /// `ω ≡ 0` (exact cancellation)
    Zero,
}

impl Modulus {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Modulus::Power { coeff, beta } => coeff * t.abs().powf(beta),
            Modulus::Log { coeff } => {
                if t == 0.0 {
                    0.0
                } else {
                    coeff / (std::f64::consts::E / t.abs()).ln()
                }
            }
            Modulus::Zero => 0.0,
        }
    }
}

/// Weak regularity data: quadratic behaviour of the even part at `x0`.
#[derive(Clone)]
pub struct WeakSpec {
    pub x0: f64,
    /// Quadratic coefficient γ of the even second difference (nonzero).
    pub gamma: f64,
    pub omega: Modulus,
    pub rho: f64,
    /// Optional closed form of `σ(x0+h) + σ(x0-h) - 2σ(x0)`, used by builders
    /// to dodge cancellation at extreme scales.
    pub even_part: Option<ScalarFn>,
}

impl fmt::Debug for WeakSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakSpec")
            .field("x0", &self.x0)
            .field("gamma", &self.gamma)
            .field("omega", &self.omega)
            .field("rho", &self.rho)
            .field("even_part", &self.even_part.is_some())
            .finish()
    }
}

/// Exactly representable piecewise-linear activations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PiecewiseLinear {
    Relu,
    /// `σ(z) = max(z,0) + α·max(-z,0)` with `α ∈ [0,1)`; satisfies the exact
    /// cancellation identity `σ(z) - σ(-z) = (1-α)z`.
    Leaky(f64),
    Identity,
    /// `ψ(z) = ReLU(z) - ReLU(z-1)`, the identity on `[0,1]`.
    Clip01,
    /// `ψ(z) = ReLU(z+1) - ReLU(z-1) - 1`, the identity on `[-1,1]`.
    Clip11,
}

/// Which kind of analytic metadata an entry carries.
#[derive(Debug, Clone)]
pub enum ActivationMeta {
    Taylor(TaylorSpec),
    Weak(WeakSpec),
    PiecewiseLinear(PiecewiseLinear),
}

/// A registered activation: tag, evaluator and metadata.
#[derive(Clone)]
pub struct ActivationEntry {
    pub tag: String,
    pub f: ScalarFn,
    pub meta: ActivationMeta,
}

impl fmt::Debug for ActivationEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActivationEntry")
            .field("tag", &self.tag)
            .field("meta", &self.meta)
            .finish()
    }
}

impl ActivationEntry {
    pub fn new(tag: impl Into<String>, f: ScalarFn, meta: ActivationMeta) -> Self {
        Self {
            tag: tag.into(),
            f,
            meta,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn taylor(&self) -> Option<&TaylorSpec> {
        match &self.meta {
            ActivationMeta::Taylor(s) => Some(s),
            _ => None,
        }
    }

    pub fn weak(&self) -> Option<&WeakSpec> {
        match &self.meta {
            ActivationMeta::Weak(s) => Some(s),
            _ => None,
        }
    }

    /// Even second difference `σ(x0+h) + σ(x0-h) - 2σ(x0)` around the weak
    /// expansion point (or 0 for the other metadata kinds), preferring the
    /// registered closed form.
    pub fn even_second_difference(&self, h: f64) -> f64 {
        let x0 = self.weak().map(|w| w.x0).unwrap_or(0.0);
        if let Some(w) = self.weak() {
            if let Some(ep) = &w.even_part {
                return ep(h);
            }
        }
        self.eval(x0 + h) + self.eval(x0 - h) - 2.0 * self.eval(x0)
    }

    /// `σ(1)`, the normalization value used by bias augmentation.
    pub fn at_one(&self) -> f64 {
        self.eval(1.0)
    }
}

fn arc(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// Registry of activation entries keyed by tag.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<ActivationEntry>>,
}

static GLOBAL: Lazy<Registry> = Lazy::new(Registry::builtin);

impl Registry {
    /// The process-wide builtin registry (immutable after startup).
    pub fn global() -> &'static Registry {
        &GLOBAL
    }

    /// Registry with every builtin activation.
    pub fn builtin() -> Self {
        let mut r = Registry::default();

        r.insert(ActivationEntry::new(
            "relu",
            arc(relu),
            ActivationMeta::PiecewiseLinear(PiecewiseLinear::Relu),
        ))
        .unwrap();
        r.insert(leaky_entry(0.01)).unwrap();
        r.insert(ActivationEntry::new(
            "identity",
            arc(|z| z),
            ActivationMeta::PiecewiseLinear(PiecewiseLinear::Identity),
        ))
        .unwrap();
        r.insert(ActivationEntry::new(
            "clip01",
            arc(|z| relu(z) - relu(z - 1.0)),
            ActivationMeta::PiecewiseLinear(PiecewiseLinear::Clip01),
        ))
        .unwrap();
        r.insert(ActivationEntry::new(
            "clip11",
            arc(|z| relu(z + 1.0) - relu(z - 1.0) - 1.0),
            ActivationMeta::PiecewiseLinear(PiecewiseLinear::Clip11),
        ))
        .unwrap();

        // Weak-regularity family: quadratics plus perturbations that defeat
        // a quartic Taylor remainder but keep an even second difference.
        r.insert(ActivationEntry::new(
            "caseA",
            arc(|x: f64| x * x + x.abs().powi(3)),
            ActivationMeta::Weak(WeakSpec {
                x0: 0.0,
                gamma: 2.0,
                omega: Modulus::Power {
                    coeff: 2.0,
                    beta: 1.0,
                },
                rho: 1.0,
                even_part: Some(arc(|h: f64| {
                    2.0 * (h * h) + 2.0 * h.abs().powi(3)
                })),
            }),
        ))
        .unwrap();

        r.insert(ActivationEntry::new(
            "caseB",
            arc(|x: f64| x * x + x.abs().powf(2.7)),
            ActivationMeta::Weak(WeakSpec {
                x0: 0.0,
                gamma: 2.0,
                omega: Modulus::Power {
                    coeff: 2.0,
                    beta: 0.7,
                },
                rho: 1.0,
                even_part: Some(arc(|h: f64| {
                    2.0 * (h * h) + 2.0 * h.abs().powf(2.7)
                })),
            }),
        ))
        .unwrap();

        // The logarithmic-modulus cusp is singular at |x| = e; beyond the
        // validity radius the evaluator continues as 2x², which keeps it
        // finite everywhere without touching any in-radius behaviour.
        r.insert(ActivationEntry::new(
            "caseC",
            arc(case_c),
            ActivationMeta::Weak(WeakSpec {
                x0: 0.0,
                gamma: 2.0,
                omega: Modulus::Log { coeff: 2.0 },
                rho: 1.0,
                even_part: Some(arc(|h: f64| 2.0 * case_c(h))),
            }),
        ))
        .unwrap();

        r.insert(ActivationEntry::new(
            "caseD",
            arc(|x: f64| x * x + x * x.abs()),
            ActivationMeta::Weak(WeakSpec {
                x0: 0.0,
                gamma: 2.0,
                omega: Modulus::Zero,
                rho: 1.0,
                even_part: Some(arc(|h: f64| 2.0 * (h * h))),
            }),
        ))
        .unwrap();

        // Smooth activations with a genuine quartic remainder bound. The
        // remainder constants M are deliberately slightly above the measured
        // suprema so the numeric verification passes with margin.
        r.insert(ActivationEntry::new(
            "silu",
            arc(|t: f64| t / (1.0 + (-t).exp())),
            ActivationMeta::Taylor(TaylorSpec {
                a1: 0.5,
                a2: 0.25,
                a3: 0.0,
                m: 0.022,
                rho: 1.0,
            }),
        ))
        .unwrap();

        r.insert(ActivationEntry::new(
            "gelu",
            arc(gelu_tanh),
            ActivationMeta::Taylor(TaylorSpec {
                a1: 0.5,
                a2: 0.398_942_280_401_432_7,
                a3: 0.0,
                m: 0.070,
                rho: 1.0,
            }),
        ))
        .unwrap();

        r
    }

    pub fn insert(&mut self, entry: ActivationEntry) -> Result<()> {
        if self.entries.contains_key(&entry.tag) {
            return Err(Error::Precondition(format!(
                "duplicate activation tag `{}`",
                entry.tag
            )));
        }
        self.entries.insert(entry.tag.clone(), Arc::new(entry));
        Ok(())
    }

    /// Resolve a tag. `leaky:<alpha>` is parsed on demand so serialized
    /// networks can carry arbitrary leak slopes.
    pub fn resolve(&self, tag: &str) -> Result<Arc<ActivationEntry>> {
        if let Some(e) = self.entries.get(tag) {
            return Ok(e.clone());
        }
        if let Some(alpha) = tag.strip_prefix("leaky:") {
            let alpha: f64 = alpha
                .parse()
                .map_err(|_| Error::UnknownActivation(tag.to_string()))?;
            if !(0.0..1.0).contains(&alpha) {
                return Err(Error::UnknownActivation(tag.to_string()));
            }
            return Ok(Arc::new(leaky_entry(alpha)));
        }
        Err(Error::UnknownActivation(tag.to_string()))
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = &Arc<ActivationEntry>> {
        self.entries.values()
    }
}

fn leaky_entry(alpha: f64) -> ActivationEntry {
    let tag = if alpha == 0.01 {
        "leaky".to_string()
    } else {
        format!("leaky:{alpha}")
    };
    ActivationEntry::new(
        tag,
        arc(move |z: f64| relu(z) + alpha * relu(-z)),
        ActivationMeta::PiecewiseLinear(PiecewiseLinear::Leaky(alpha)),
    )
}

fn case_c(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else if a <= 1.0 {
        x * x * (1.0 + 1.0 / (1.0 - a.ln()))
    } else {
        2.0 * x * x
    }
}

fn gelu_tanh(t: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    0.5 * t * (1.0 + (C * (t + 0.044715 * t * t * t)).tanh())
}

/// Outcome of re-fitting a Taylor spec by finite differences.
#[derive(Debug, Clone)]
pub struct TaylorReport {
    pub fitted_a1: f64,
    pub fitted_a2: f64,
    pub fitted_a3: f64,
    /// Grid estimate of `sup |r(t)| / t⁴` over `[-ρ, ρ] \ (-1e-4, 1e-4)`.
    pub m_hat: f64,
    pub pass: bool,
}

/// Outcome of checking a weak spec's modulus inequality.
#[derive(Debug, Clone)]
pub struct WeakReport {
    /// Worst ratio `|dev(h)| / (ω(h)h²)` observed (0 when ω ≡ 0).
    pub worst_ratio: f64,
    pub worst_h: f64,
    /// Worst absolute deviation, relevant for ω ≡ 0 entries.
    pub worst_abs_dev: f64,
    pub pass: bool,
}

fn richardson(f: impl Fn(f64) -> f64, h: f64, order: i32) -> f64 {
    let c = 2.0_f64.powi(order);
    (c * f(h / 2.0) - f(h)) / (c - 1.0)
}

/// Fit `a₁, a₂, a₃` at the origin by five-point central differences with one
/// Richardson refinement, and estimate the remainder constant on a grid.
///
/// Fails with [`Error::AssumptionViolated`] when the fitted `a₂` is ≈ 0
/// (odd activations such as tanh).
pub fn verify_taylor_spec(entry: &ActivationEntry, grid_points: usize) -> Result<TaylorReport> {
    let spec = entry
        .taylor()
        .ok_or_else(|| Error::Precondition(format!("`{}` has no Taylor spec", entry.tag)))?;
    let f = |t: f64| entry.eval(t);
    let h = 1e-3;

    let d1 = |h: f64| (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
    let d2 = |h: f64| {
        (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
    };
    let d3 = |h: f64| (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);

    let fitted_a1 = richardson(d1, h, 4);
    let fitted_a2 = richardson(d2, h, 4) / 2.0;
    let fitted_a3 = richardson(d3, h, 2) / 6.0;

    if fitted_a2.abs() < 1e-10 {
        return Err(Error::AssumptionViolated(format!(
            "`{}`: fitted a2 = {fitted_a2:.3e} vanishes; a nonzero quadratic coefficient is required",
            entry.tag
        )));
    }

    // |r(t)|/t⁴ with the evaluation round-off subtracted; without the
    // correction the estimator diverges as t → 0 for near-zero remainders.
    let remainder_ratio = |t: f64| {
        let terms = [f(t), spec.a1 * t, spec.a2 * t * t, spec.a3 * t * t * t];
        let r = terms[0] - terms[1] - terms[2] - terms[3];
        let noise = 4.0 * f64::EPSILON * terms.iter().map(|v| v.abs()).sum::<f64>();
        (r.abs() - noise).max(0.0) / t.powi(4)
    };
    let n = grid_points.max(16);
    let mut m_hat: f64 = 0.0;
    for i in 0..=n {
        let t = -spec.rho + 2.0 * spec.rho * (i as f64) / (n as f64);
        if t.abs() < 1e-4 {
            continue;
        }
        m_hat = m_hat.max(remainder_ratio(t));
    }
    // Log-spaced supplement toward the cutoff, where |r|/t⁴ often peaks.
    let mut t = spec.rho;
    while t > 1e-4 {
        m_hat = m_hat.max(remainder_ratio(t)).max(remainder_ratio(-t));
        t *= 0.8;
    }

    let coeffs_ok = (fitted_a1 - spec.a1).abs() <= 1e-6
        && (fitted_a2 - spec.a2).abs() <= 1e-6
        && (fitted_a3 - spec.a3).abs() <= 1e-6;
    let m_ok = m_hat <= spec.m * (1.0 + 1e-6);

    Ok(TaylorReport {
        fitted_a1,
        fitted_a2,
        fitted_a3,
        m_hat,
        pass: coeffs_ok && m_ok,
    })
}

/// Check the declared even-second-difference modulus inequality of a weak
/// spec on a log-spaced grid of `h ∈ (0, ρ]`, with relative slack `1e-9`.
pub fn verify_weak_spec(entry: &ActivationEntry, grid_points: usize) -> Result<WeakReport> {
    let spec = entry
        .weak()
        .ok_or_else(|| Error::Precondition(format!("`{}` has no weak spec", entry.tag)))?;
    let f = |t: f64| entry.eval(t);

    let n = grid_points.max(16);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_h = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut pass = true;

    for i in 0..n {
        // log-spaced from rho down to rho * 1e-6; below that the deviation
        // sits under the round-off floor of the four-term sum
        let h = spec.rho * 10f64.powf(-6.0 * (i as f64) / ((n - 1) as f64));
        let terms = [
            f(spec.x0 + h),
            f(spec.x0 - h),
            2.0 * f(spec.x0),
            spec.gamma * h * h,
        ];
        let dev = (terms[0] + terms[1] - terms[2] - terms[3]).abs();
        let noise = 32.0 * f64::EPSILON * terms.iter().map(|v| v.abs()).sum::<f64>();
        let allowed = spec.omega.eval(h) * h * h;
        if dev > worst_abs {
            worst_abs = dev;
        }
        if allowed == 0.0 {
            // exact-cancellation spec: deviation must vanish to round-off
            if dev > noise + 1e-12 * h * h.max(1.0) {
                pass = false;
                worst_h = h;
            }
            continue;
        }
        if dev > allowed * (1.0 + 1e-9) + noise {
            pass = false;
        }
        // Only report ratios where the deviation clears the noise floor.
        if allowed > 1e6 * noise {
            let ratio = dev / allowed;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_h = h;
            }
        }
    }

    Ok(WeakReport {
        worst_ratio,
        worst_h,
        worst_abs_dev: worst_abs,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_tags_present() {
        let r = Registry::builtin();
        for tag in [
            "relu", "leaky", "identity", "clip01", "clip11", "caseA", "caseB", "caseC", "caseD",
            "silu", "gelu",
        ] {
            assert!(r.resolve(tag).is_ok(), "missing builtin `{tag}`");
        }
        assert!(r.resolve("does-not-exist").is_err());
    }

    #[test]
    fn parameterized_leaky_resolves() {
        let r = Registry::builtin();
        let e = r.resolve("leaky:0.25").unwrap();
        assert_relative_eq!(e.eval(-2.0), 0.5);
        assert!(r.resolve("leaky:1.5").is_err());
    }

    #[test]
    fn case_a_even_part_arithmetic() {
        let r = Registry::builtin();
        let e = r.resolve("caseA").unwrap();
        let h = 0.1;
        let sum = e.eval(h) + e.eval(-h);
        assert_relative_eq!(sum, 0.022, epsilon = 1e-15);
        assert_relative_eq!(e.even_second_difference(h), 0.022, epsilon = 1e-15);
    }

    #[test]
    fn case_d_even_part_is_exact_quadratic() {
        let r = Registry::builtin();
        let e = r.resolve("caseD").unwrap();
        for h in [0.35355339059327373, 0.25, 1e-3, 0.9] {
            let sum = e.eval(h) + e.eval(-h);
            assert_eq!(sum, 2.0 * (h * h));
        }
    }

    #[test]
    fn silu_taylor_fit_matches_declared() {
        let r = Registry::builtin();
        let e = r.resolve("silu").unwrap();
        let rep = verify_taylor_spec(&e, 2001).unwrap();
        assert!((rep.fitted_a1 - 0.5).abs() < 1e-8);
        assert!((rep.fitted_a2 - 0.25).abs() < 1e-8);
        assert!(rep.fitted_a3.abs() < 1e-8);
        assert!(rep.pass, "m_hat = {}", rep.m_hat);
    }

    #[test]
    fn all_taylor_builtins_verify() {
        let r = Registry::builtin();
        for e in r.entries() {
            if e.taylor().is_some() {
                let rep = verify_taylor_spec(e, 2001).unwrap();
                assert!(rep.pass, "`{}` failed: {rep:?}", e.tag);
            }
        }
    }

    #[test]
    fn all_weak_builtins_verify() {
        let r = Registry::builtin();
        for e in r.entries() {
            if e.weak().is_some() {
                let rep = verify_weak_spec(e, 400).unwrap();
                assert!(rep.pass, "`{}` failed: {rep:?}", e.tag);
            }
        }
    }

    #[test]
    fn case_a_worst_ratio_is_one() {
        let r = Registry::builtin();
        let e = r.resolve("caseA").unwrap();
        let rep = verify_weak_spec(&e, 400).unwrap();
        assert!((rep.worst_ratio - 1.0).abs() <= 1e-9, "{}", rep.worst_ratio);
    }

    #[test]
    fn halved_modulus_fails() {
        let builtin = Registry::builtin();
        let a = builtin.resolve("caseA").unwrap();
        let violated = ActivationEntry::new(
            "caseA-halved",
            a.f.clone(),
            ActivationMeta::Weak(WeakSpec {
                x0: 0.0,
                gamma: 2.0,
                omega: Modulus::Power {
                    coeff: 1.0,
                    beta: 1.0,
                },
                rho: 1.0,
                even_part: None,
            }),
        );
        let rep = verify_weak_spec(&violated, 400).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_ratio > 1.5);
        assert!(rep.worst_h > 0.0);
    }

    #[test]
    fn zero_remainder_quadratic_fits_exactly() {
        let e = ActivationEntry::new(
            "t-plus-t2",
            Arc::new(|t: f64| t + t * t),
            ActivationMeta::Taylor(TaylorSpec {
                a1: 1.0,
                a2: 1.0,
                a3: 0.0,
                m: 1e-6,
                rho: 1.0,
            }),
        );
        let rep = verify_taylor_spec(&e, 1001).unwrap();
        assert!(rep.pass);
        assert!(rep.m_hat < 1e-7, "m_hat = {}", rep.m_hat);
    }

    #[test]
    fn tanh_is_rejected() {
        let e = ActivationEntry::new(
            "tanh",
            Arc::new(f64::tanh),
            ActivationMeta::Taylor(TaylorSpec {
                a1: 1.0,
                a2: 0.1, // placeholder; the fit must expose a2 ≈ 0
                a3: -1.0 / 3.0,
                m: 1.0,
                rho: 1.0,
            }),
        );
        match verify_taylor_spec(&e, 1001) {
            Err(Error::AssumptionViolated(_)) => {}
            other => panic!("expected assumption violation, got {other:?}"),
        }
    }

    #[test]
    fn clips_are_idempotent_on_targets() {
        let r = Registry::builtin();
        let c01 = r.resolve("clip01").unwrap();
        let c11 = r.resolve("clip11").unwrap();
        for i in 0..=100 {
            let z = i as f64 / 100.0;
            assert_eq!(c01.eval(z), z);
            let z2 = 2.0 * z - 1.0;
            assert_eq!(c11.eval(z2), z2);
        }
        assert_eq!(c01.eval(3.0), 1.0);
        assert_eq!(c01.eval(-2.0), 0.0);
        assert_eq!(c11.eval(3.0), 1.0);
        assert_eq!(c11.eval(-3.0), -1.0);
    }

    #[test]
    fn leaky_cancellation_identity() {
        let r = Registry::builtin();
        let e = r.resolve("leaky:0.3").unwrap();
        for z in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            assert_relative_eq!(e.eval(z) - e.eval(-z), 0.7 * z, epsilon = 1e-15);
        }
    }

    #[test]
    fn evaluators_finite_on_operating_range() {
        let r = Registry::builtin();
        for e in r.entries() {
            for i in 0..=800 {
                let x = -4.0 + 8.0 * (i as f64) / 800.0;
                assert!(e.eval(x).is_finite(), "`{}` not finite at {x}", e.tag);
            }
        }
    }
}
