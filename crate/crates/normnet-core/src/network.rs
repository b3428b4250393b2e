//! Layered networks with per-neuron activations and norm-constraint
//! certificates.
//!
//! A network is `ℓ_L ∘ σ_{L-1} ∘ ℓ_{L-1} ∘ … ∘ σ_0 ∘ ℓ_0` where each `ℓ_i`
//! is affine and the activations are applied entrywise. Neurons of the same
//! layer may carry different activations; builders use that to mix analytic
//! neurons with ReLU clipping units and identity pass-through channels. The
//! final layer is affine (builders tag it `identity`).
//!
//! The attached [`ArchitectureCert`] declares the width/depth/norm budget
//! `(W, L, K)` together with the constrained index set `I`:
//! `‖(A_ℓ, b_ℓ)‖ ≤ 1` off `I`, `‖(A_ℓ, b_ℓ)‖ ≥ 1` on `I`, and the product of
//! the constrained norms stays within `K`. [`check_norm_constraint`] audits
//! a network against its own certificate.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationEntry, Registry};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Structural comparison tolerance for certificate checks.
pub const CERT_TOL: f64 = 1e-12;

/// One affine layer plus the activation applied to each output neuron.
#[derive(Clone)]
pub struct Layer {
    /// `n_out × n_in` weight matrix, row major.
    pub weights: Matrix,
    /// `n_out` bias vector.
    pub bias: Vec<f64>,
    /// One activation per output neuron.
    pub activations: Vec<Arc<ActivationEntry>>,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activations: Vec<Arc<ActivationEntry>>) -> Self {
        Self {
            weights,
            bias,
            activations,
        }
    }

    /// Affine layer with every neuron tagged by the same activation.
    pub fn uniform(weights: Matrix, bias: Vec<f64>, act: &Arc<ActivationEntry>) -> Self {
        let n = weights.len();
        Self::new(weights, bias, vec![act.clone(); n])
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map(|r| r.len()).unwrap_or(0)
    }

    /// `‖(A, b)‖`: ∞-operator norm of the bias-augmented matrix.
    pub fn norm(&self) -> f64 {
        linalg::op_norm_inf_augmented(&self.weights, &self.bias).unwrap_or(0.0)
    }

    fn validate(&self, index: usize, in_dim: usize) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::EmptyMatrix("layer weight matrix"));
        }
        if self.bias.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "layer {index}: {} weight rows vs {} bias entries",
                self.weights.len(),
                self.bias.len()
            )));
        }
        if self.activations.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "layer {index}: {} weight rows vs {} activation tags",
                self.weights.len(),
                self.activations.len()
            )));
        }
        for (r, row) in self.weights.iter().enumerate() {
            if row.len() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "layer {index}, row {r}: expected {in_dim} columns, found {}",
                    row.len()
                )));
            }
        }
        Ok(())
    }
}

/// Declared width/depth/norm budget with the constrained layer set.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureCert {
    /// Width budget W (max layer output dimension).
    pub width: usize,
    /// Depth budget L (number of hidden layers).
    pub depth: usize,
    /// Norm budget K for the product over constrained layers.
    pub norm_budget: f64,
    /// Constrained layer indices I.
    pub constrained: BTreeSet<usize>,
    pub output_dim: usize,
}

impl ArchitectureCert {
    pub fn new(
        width: usize,
        depth: usize,
        norm_budget: f64,
        constrained: impl IntoIterator<Item = usize>,
        output_dim: usize,
    ) -> Result<Self> {
        // The empty product over I is 1, so any valid budget satisfies K ≥ 1.
        if norm_budget < 1.0 {
            return Err(Error::Precondition(format!(
                "norm budget K = {norm_budget} < 1"
            )));
        }
        if width == 0 || output_dim == 0 {
            return Err(Error::Precondition(
                "width and output_dim must be positive".into(),
            ));
        }
        Ok(Self {
            width,
            depth,
            norm_budget,
            constrained: constrained.into_iter().collect(),
            output_dim,
        })
    }
}

/// A layered network with its architecture certificate.
#[derive(Clone)]
pub struct Network {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    pub cert: ArchitectureCert,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("input_dim", &self.input_dim)
            .field("layer_dims", &self.layers.iter().map(Layer::out_dim).collect::<Vec<_>>())
            .field("cert", &self.cert)
            .finish()
    }
}

impl Network {
    /// Build a network, validating the structural invariants: consecutive
    /// layer dimensions chain, the final dimension matches the certificate,
    /// no layer is wider than W, and there are at most L hidden layers.
    pub fn new(input_dim: usize, layers: Vec<Layer>, cert: ArchitectureCert) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Precondition("a network needs at least one layer".into()));
        }
        let mut dim = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i, dim)?;
            dim = layer.out_dim();
        }
        if dim != cert.output_dim {
            return Err(Error::DimensionMismatch(format!(
                "final layer dimension {dim} vs certificate output_dim {}",
                cert.output_dim
            )));
        }
        let max_width = layers.iter().map(Layer::out_dim).max().unwrap_or(0);
        if max_width > cert.width {
            return Err(Error::Precondition(format!(
                "layer width {max_width} exceeds certificate width {}",
                cert.width
            )));
        }
        if layers.len() - 1 > cert.depth {
            return Err(Error::Precondition(format!(
                "{} hidden layers exceed certificate depth {}",
                layers.len() - 1,
                cert.depth
            )));
        }
        Ok(Self {
            input_dim,
            layers,
            cert,
        })
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.cert.output_dim
    }

    /// Forward pass. Pure: identical inputs give bit-identical outputs.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Precondition("non-finite input value".into()));
        }
        let mut v = x.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.out_dim());
            for (row, (b, act)) in layer
                .weights
                .iter()
                .zip(layer.bias.iter().zip(&layer.activations))
            {
                let mut acc = *b;
                for (w, xi) in row.iter().zip(&v) {
                    acc += w * xi;
                }
                out.push(act.eval(acc));
            }
            if !out.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { layer: idx });
            }
            v = out;
        }
        Ok(v)
    }

    /// Scalar forward pass for `output_dim == 1` networks.
    pub fn eval_scalar(&self, x: &[f64]) -> Result<f64> {
        let out = self.eval(x)?;
        if out.len() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected scalar output, network has output_dim {}",
                out.len()
            )));
        }
        Ok(out[0])
    }

    /// Per-layer norms `‖(A_ℓ, b_ℓ)‖`.
    pub fn layer_norms(&self) -> Vec<f64> {
        self.layers.iter().map(Layer::norm).collect()
    }

    /// Structural equality on every serialized field (weights, biases,
    /// activation tags and certificate), bit-exact on floats.
    pub fn structurally_equal(&self, other: &Network) -> bool {
        self.input_dim == other.input_dim
            && self.cert == other.cert
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.weights == b.weights
                    && a.bias == b.bias
                    && a.activations.len() == b.activations.len()
                    && a.activations
                        .iter()
                        .zip(&b.activations)
                        .all(|(x, y)| x.tag == y.tag)
            })
    }
}

/// Verdict of auditing a network against its certificate.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub layer_norms: Vec<f64>,
    /// Product of `‖(A_ℓ, b_ℓ)‖` over the constrained set I.
    pub constrained_product: f64,
    pub budget: f64,
    /// Layers violating their side of the constraint.
    pub offending: Vec<usize>,
    pub ok: bool,
}

/// Check the norm constraint of a network against its own certificate:
/// unconstrained layers must have norm ≤ 1, constrained layers norm ≥ 1,
/// and the constrained norms must multiply to at most K. Always returns a
/// verdict; `offending` lists the failing layer indices.
pub fn check_norm_constraint(net: &Network) -> NormReport {
    let norms = net.layer_norms();
    let mut product = 1.0;
    let mut offending = Vec::new();
    for (idx, norm) in norms.iter().enumerate() {
        if net.cert.constrained.contains(&idx) {
            if *norm < 1.0 - CERT_TOL {
                offending.push(idx);
            }
            product *= norm;
        } else if *norm > 1.0 + CERT_TOL {
            offending.push(idx);
        }
    }
    let budget_ok = product <= net.cert.norm_budget * (1.0 + CERT_TOL);
    let ok = offending.is_empty() && budget_ok;
    if !budget_ok {
        offending.extend(net.cert.constrained.iter().copied());
        offending.sort_unstable();
        offending.dedup();
    }
    NormReport {
        layer_norms: norms,
        constrained_product: product,
        budget: net.cert.norm_budget,
        offending,
        ok,
    }
}

/// Rewrite a network without biases by adding a constant channel.
///
/// The result takes the augmented input `(x, 1)` (input dimension `d + 1`)
/// and satisfies `augment(net).eval(&[x, 1]) == net.eval(x)` up to round-off.
/// The first layer gains the row `(0, …, 0, 1)`; deeper layers rescale the
/// carried constant by `1/σ(1)` of the channel activation (the first
/// neuron's activation of the previous layer), so any `σ(1) ≠ 0` works.
///
/// The certificate widens to `W + 1`; the constrained set and budget are
/// recomputed from the augmented layer norms (never below the original K).
pub fn augment(net: &Network) -> Result<Network> {
    let l_hidden = net.depth();
    // Channel activations: one per hidden layer.
    let mut channel_acts: Vec<Arc<ActivationEntry>> = Vec::with_capacity(l_hidden);
    for layer in &net.layers[..l_hidden] {
        let act = layer.activations[0].clone();
        let s1 = act.at_one();
        if s1.abs() <= 1e-12 {
            return Err(Error::UnsupportedNormalization {
                tag: act.tag.clone(),
                sigma_one: s1,
            });
        }
        channel_acts.push(act);
    }

    let mut layers = Vec::with_capacity(net.layers.len());
    for (idx, layer) in net.layers.iter().enumerate() {
        let is_final = idx == net.layers.len() - 1;
        // Scale applied to the bias column: 1/σ_{idx-1}(1), with σ_{-1} the
        // identity on the appended constant input.
        let scale = if idx == 0 {
            1.0
        } else {
            1.0 / channel_acts[idx - 1].at_one()
        };
        let mut weights: Matrix = layer
            .weights
            .iter()
            .zip(&layer.bias)
            .map(|(row, b)| {
                let mut r = row.clone();
                r.push(b * scale);
                r
            })
            .collect();
        let mut acts = layer.activations.clone();
        if !is_final {
            let mut channel_row = vec![0.0; layer.in_dim()];
            channel_row.push(scale);
            weights.push(channel_row);
            acts.push(channel_acts[idx].clone());
        }
        let n = weights.len();
        layers.push(Layer::new(weights, vec![0.0; n], acts));
    }

    let norms: Vec<f64> = layers.iter().map(Layer::norm).collect();
    let constrained: BTreeSet<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 1.0)
        .map(|(i, _)| i)
        .collect();
    let product: f64 = constrained.iter().map(|i| norms[*i]).product();
    let cert = ArchitectureCert::new(
        net.cert.width + 1,
        net.cert.depth,
        net.cert.norm_budget.max(product).max(1.0),
        constrained,
        net.cert.output_dim,
    )?;
    Network::new(net.input_dim + 1, layers, cert)
}

// ---------------------------------------------------------------------------
// Serialization: the network document format.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activations: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct CertDoc {
    W: usize,
    L: usize,
    K: f64,
    I: Vec<usize>,
    output_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    input_dim: usize,
    layers: Vec<LayerDoc>,
    cert: CertDoc,
}

impl Network {
    /// Serialize to the JSON document format.
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| LayerDoc {
                    weights: l.weights.clone(),
                    bias: l.bias.clone(),
                    activations: l.activations.iter().map(|a| a.tag.clone()).collect(),
                })
                .collect(),
            cert: CertDoc {
                W: self.cert.width,
                L: self.cert.depth,
                K: self.cert.norm_budget,
                I: self.cert.constrained.iter().copied().collect(),
                output_dim: self.cert.output_dim,
            },
        };
        serde_json::to_string(&doc).expect("network document serialization cannot fail")
    }

    /// Parse a JSON document, resolving activation tags against `registry`
    /// and re-validating every structural invariant.
    pub fn from_json(s: &str, registry: &Registry) -> Result<Network> {
        let doc: NetworkDoc = serde_json::from_str(s)?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (li, l) in doc.layers.into_iter().enumerate() {
            let mut acts = Vec::with_capacity(l.activations.len());
            for tag in &l.activations {
                let entry = registry.resolve(tag).map_err(|_| Error::InvalidDocument {
                    path: format!("layers[{li}].activations"),
                    reason: format!("unknown activation tag `{tag}`"),
                })?;
                acts.push(entry);
            }
            layers.push(Layer::new(l.weights, l.bias, acts));
        }
        let cert = ArchitectureCert::new(
            doc.cert.W,
            doc.cert.L,
            doc.cert.K,
            doc.cert.I,
            doc.cert.output_dim,
        )?;
        Network::new(doc.input_dim, layers, cert)
    }

    /// Parse with the builtin registry.
    pub fn from_json_builtin(s: &str) -> Result<Network> {
        Self::from_json(s, Registry::global())
    }
}
