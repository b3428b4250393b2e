//! Certificate-preserving operations on networks: padding, composition,
//! concatenation and linear combination.
//!
//! Certificates are propagated symbolically (never re-measured):
//!
//! * `pad`           keeps `K`
//! * `compose`       multiplies, `K₁·K₂`
//! * `compose_affine` scales, `‖(A,b)‖·K`
//! * `concat`        takes the max, `max(K₁, K₂)`
//! * `lincomb`       combines, `|c₁|K₁ + |c₂|K₂`
//!
//! The constrained set of a merged boundary layer is resolved from its
//! actual norm (in `I` iff the norm exceeds 1); all other indices carry
//! over. Composition stores the fused boundary layer
//! `(A₀⁽²⁾A_L⁽¹⁾, A₀⁽²⁾b_L⁽¹⁾ + b₀⁽²⁾)`, so depths add as `L₁ + L₂`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::activations::{ActivationEntry, Registry};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::network::{ArchitectureCert, Layer, Network};

fn identity_entry() -> Arc<ActivationEntry> {
    Registry::global()
        .resolve("identity")
        .expect("builtin identity activation")
}

/// Pad a network to width `w2` and depth `l2` without changing its function
/// or norm budget. Added channels are zero-weighted, added layers identity.
pub fn pad(net: &Network, w2: usize, l2: usize) -> Result<Network> {
    if w2 < net.cert.width || l2 < net.cert.depth {
        return Err(Error::Precondition(format!(
            "pad target ({w2}, {l2}) smaller than certificate ({}, {})",
            net.cert.width, net.cert.depth
        )));
    }
    let id = identity_entry();
    let n_layers = net.layers.len();
    let mut layers: Vec<Layer> = Vec::with_capacity(n_layers + (l2 - net.depth()));

    // Zero-pad every hidden layer to w2 outputs; downstream layers gain
    // zero columns for the new channels.
    let mut extra_cols = 0usize;
    for (idx, layer) in net.layers.iter().enumerate() {
        let is_final = idx == n_layers - 1;
        let mut weights: Matrix = layer
            .weights
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.extend(std::iter::repeat(0.0).take(extra_cols));
                r
            })
            .collect();
        let mut bias = layer.bias.clone();
        let mut acts = layer.activations.clone();
        if !is_final {
            let target = w2;
            let in_dim = weights[0].len();
            while weights.len() < target {
                weights.push(vec![0.0; in_dim]);
                bias.push(0.0);
                acts.push(id.clone());
            }
            extra_cols = target - layer.out_dim();
        }
        layers.push(Layer::new(weights, bias, acts));
    }

    // Append identity layers sized to the output dimension; the old final
    // layer keeps its index so the constrained set carries over unchanged.
    let m = net.cert.output_dim;
    for _ in net.depth()..l2 {
        layers.push(Layer::uniform(linalg::identity(m), vec![0.0; m], &id));
    }

    let cert = ArchitectureCert::new(
        w2,
        l2,
        net.cert.norm_budget,
        net.cert.constrained.clone(),
        net.cert.output_dim,
    )?;
    Network::new(net.input_dim, layers, cert)
}

fn fused_membership(layer: &Layer) -> bool {
    layer.norm() > 1.0
}

/// Compose two networks: `compose(outer, inner)(x) = outer(inner(x))`.
/// Certificate `(max(W₁,W₂), L₁+L₂, K₁K₂)`.
pub fn compose(outer: &Network, inner: &Network) -> Result<Network> {
    if inner.output_dim() != outer.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "inner output {} vs outer input {}",
            inner.output_dim(),
            outer.input_dim
        )));
    }
    let inner_last = inner.layers.last().unwrap();
    let outer_first = &outer.layers[0];
    let fused_w = linalg::mat_mul(&outer_first.weights, &inner_last.weights);
    let fused_b: Vec<f64> = linalg::mat_vec(&outer_first.weights, &inner_last.bias)
        .iter()
        .zip(&outer_first.bias)
        .map(|(a, b)| a + b)
        .collect();
    let fused = Layer::new(fused_w, fused_b, outer_first.activations.clone());

    let boundary = inner.layers.len() - 1;
    let mut layers: Vec<Layer> = inner.layers[..boundary].to_vec();
    let fused_in_i = fused_membership(&fused);
    layers.push(fused);
    layers.extend_from_slice(&outer.layers[1..]);

    let mut constrained: BTreeSet<usize> = inner
        .cert
        .constrained
        .iter()
        .copied()
        .filter(|&i| i < boundary)
        .collect();
    if fused_in_i {
        constrained.insert(boundary);
    }
    for &i in &outer.cert.constrained {
        if i > 0 {
            constrained.insert(boundary + i);
        }
    }

    let cert = ArchitectureCert::new(
        outer.cert.width.max(inner.cert.width),
        outer.cert.depth + inner.cert.depth,
        inner.cert.norm_budget * outer.cert.norm_budget,
        constrained,
        outer.cert.output_dim,
    )?;
    Network::new(inner.input_dim, layers, cert)
}

/// Precompose with an affine map: `result(x) = net(Ax + b)`.
/// Width and depth are unchanged; the budget scales by `‖(A, b)‖`
/// (clamped below at 1 so the certificate stays valid).
pub fn compose_affine(net: &Network, a: &[Vec<f64>], b: &[f64]) -> Result<Network> {
    if a.len() != net.input_dim || a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "affine map has {} rows / {} bias entries, network expects {}",
            a.len(),
            b.len(),
            net.input_dim
        )));
    }
    let first = &net.layers[0];
    let fused_w = linalg::mat_mul(&first.weights, a);
    let fused_b: Vec<f64> = linalg::mat_vec(&first.weights, b)
        .iter()
        .zip(&first.bias)
        .map(|(u, v)| u + v)
        .collect();
    let fused = Layer::new(fused_w, fused_b, first.activations.clone());
    let fused_in_i = fused_membership(&fused);

    let mut layers = vec![fused];
    layers.extend_from_slice(&net.layers[1..]);

    let mut constrained: BTreeSet<usize> = net
        .cert
        .constrained
        .iter()
        .copied()
        .filter(|&i| i > 0)
        .collect();
    if fused_in_i {
        constrained.insert(0);
    }

    // A contraction (norm < 1) cannot be pulled through the nonlinear layers
    // of `net`, so the realized constrained product never shrinks with it;
    // clamping the factor at 1 keeps the budget valid.
    let affine_norm = linalg::op_norm_inf_augmented(a, b)?.max(1.0);
    let cert = ArchitectureCert::new(
        net.cert.width,
        net.cert.depth,
        affine_norm * net.cert.norm_budget,
        constrained,
        net.cert.output_dim,
    )?;
    Network::new(a[0].len(), layers, cert)
}

/// Realized product of `‖(A_ℓ, b_ℓ)‖` over a constrained set. Stacked
/// budgets (`max` for concat, `Σ|cᵢ|Kᵢ` for lincomb) can undercut this when
/// the operands' constrained layers sit at different depths or the scaling
/// coefficients are small, so the final budget takes the max of both.
fn constrained_product(layers: &[Layer], constrained: &BTreeSet<usize>) -> f64 {
    constrained.iter().map(|&i| layers[i].norm()).product()
}

/// Stack the hidden part of depth-aligned networks block-diagonally.
/// Returns the stacked hidden layers and the union of the constrained sets.
fn stack_hidden(nets: &[&Network]) -> (Vec<Layer>, BTreeSet<usize>) {
    let depth = nets[0].depth();
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        if l == 0 {
            let mut weights = Vec::new();
            let mut bias = Vec::new();
            let mut acts = Vec::new();
            for n in nets {
                weights.extend(n.layers[0].weights.iter().cloned());
                bias.extend(n.layers[0].bias.iter().cloned());
                acts.extend(n.layers[0].activations.iter().cloned());
            }
            layers.push(Layer::new(weights, bias, acts));
        } else {
            let total_in: usize = nets.iter().map(|n| n.layers[l].in_dim()).sum();
            let mut weights = Vec::new();
            let mut bias = Vec::new();
            let mut acts = Vec::new();
            let mut offset = 0usize;
            for n in nets {
                let block = &n.layers[l];
                for (row, (bi, act)) in block
                    .weights
                    .iter()
                    .zip(block.bias.iter().zip(&block.activations))
                {
                    let mut r = vec![0.0; total_in];
                    r[offset..offset + row.len()].copy_from_slice(row);
                    weights.push(r);
                    bias.push(*bi);
                    acts.push(act.clone());
                }
                offset += block.in_dim();
            }
            layers.push(Layer::new(weights, bias, acts));
        }
    }
    let mut constrained = BTreeSet::new();
    for n in nets {
        for &i in &n.cert.constrained {
            if i < depth {
                constrained.insert(i);
            }
        }
    }
    (layers, constrained)
}

/// Concatenate outputs: `concat(a, b)(x) = (a(x), b(x))`.
/// Certificate `(W₁+W₂, max(L₁,L₂), max(K₁,K₂))`.
pub fn concat(a: &Network, b: &Network) -> Result<Network> {
    if a.input_dim != b.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "concat inputs {} vs {}",
            a.input_dim, b.input_dim
        )));
    }
    let depth = a.depth().max(b.depth());
    let pa = pad(a, a.cert.width, depth)?;
    let pb = pad(b, b.cert.width, depth)?;

    let (mut layers, mut constrained) = stack_hidden(&[&pa, &pb]);

    // Block-diagonal final layer: outputs stack.
    let fa = pa.layers.last().unwrap();
    let fb = pb.layers.last().unwrap();
    let total_in = fa.in_dim() + fb.in_dim();
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut acts = Vec::new();
    for (row, (bi, act)) in fa.weights.iter().zip(fa.bias.iter().zip(&fa.activations)) {
        let mut r = vec![0.0; total_in];
        r[..row.len()].copy_from_slice(row);
        weights.push(r);
        bias.push(*bi);
        acts.push(act.clone());
    }
    for (row, (bi, act)) in fb.weights.iter().zip(fb.bias.iter().zip(&fb.activations)) {
        let mut r = vec![0.0; total_in];
        r[fa.in_dim()..].copy_from_slice(row);
        weights.push(r);
        bias.push(*bi);
        acts.push(act.clone());
    }
    let final_layer = Layer::new(weights, bias, acts);
    if fused_membership(&final_layer)
        || pa.cert.constrained.contains(&depth)
        || pb.cert.constrained.contains(&depth)
    {
        constrained.insert(depth);
    }
    layers.push(final_layer);

    let budget = pa
        .cert
        .norm_budget
        .max(pb.cert.norm_budget)
        .max(constrained_product(&layers, &constrained));
    let cert = ArchitectureCert::new(
        pa.cert.width + pb.cert.width,
        depth,
        budget,
        constrained,
        pa.cert.output_dim + pb.cert.output_dim,
    )?;
    Network::new(a.input_dim, layers, cert)
}

/// n-ary linear combination `Σ cᵢ · netᵢ(x)` with certificate
/// `(Σ Wᵢ, max Lᵢ, Σ |cᵢ| Kᵢ)`. All networks must share input and output
/// dimensions. Summand finals merge into a single scaled output layer.
pub fn lincomb_many(terms: &[(f64, &Network)]) -> Result<Network> {
    if terms.is_empty() {
        return Err(Error::Precondition("lincomb of zero terms".into()));
    }
    let d = terms[0].1.input_dim;
    let k = terms[0].1.output_dim();
    for (_, n) in terms {
        if n.input_dim != d || n.output_dim() != k {
            return Err(Error::DimensionMismatch(format!(
                "lincomb operand with dims ({}, {}) vs ({d}, {k})",
                n.input_dim,
                n.output_dim()
            )));
        }
    }
    let depth = terms.iter().map(|(_, n)| n.depth()).max().unwrap();
    let padded: Vec<(f64, Network)> = terms
        .iter()
        .map(|(c, n)| Ok((*c, pad(n, n.cert.width, depth)?)))
        .collect::<Result<_>>()?;
    let refs: Vec<&Network> = padded.iter().map(|(_, n)| n).collect();
    let (mut layers, mut constrained) = stack_hidden(&refs);

    // Merged output layer: horizontally concatenated cᵢ-scaled blocks.
    let total_in: usize = refs.iter().map(|n| n.layers.last().unwrap().in_dim()).sum();
    let mut weights = vec![vec![0.0; total_in]; k];
    let mut bias = vec![0.0; k];
    let mut offset = 0usize;
    for (c, n) in &padded {
        let f = n.layers.last().unwrap();
        for (i, (row, bi)) in f.weights.iter().zip(&f.bias).enumerate() {
            for (j, w) in row.iter().enumerate() {
                weights[i][offset + j] = c * w;
            }
            bias[i] += c * bi;
        }
        offset += f.in_dim();
    }
    let acts = padded[0].1.layers.last().unwrap().activations.clone();
    let final_layer = Layer::new(weights, bias, acts);
    if fused_membership(&final_layer) {
        constrained.insert(depth);
    }
    layers.push(final_layer);

    let width: usize = refs.iter().map(|n| n.cert.width).sum();
    let budget: f64 = padded
        .iter()
        .map(|(c, n)| c.abs() * n.cert.norm_budget)
        .sum();
    let budget = budget
        .max(constrained_product(&layers, &constrained))
        .max(1.0);
    let cert = ArchitectureCert::new(width, depth, budget, constrained, k)?;
    Network::new(d, layers, cert)
}

/// Binary linear combination `c₁·a + c₂·b`.
pub fn lincomb(c1: f64, a: &Network, c2: f64, b: &Network) -> Result<Network> {
    lincomb_many(&[(c1, a), (c2, b)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{EvalBox, EvalGrid};
    use crate::network::check_norm_constraint;
    use approx::assert_relative_eq;

    fn act(tag: &str) -> Arc<ActivationEntry> {
        Registry::global().resolve(tag).unwrap()
    }

    fn relu_net(scale: f64) -> Network {
        // x ↦ scale * ReLU(x)
        let l0 = Layer::uniform(vec![vec![1.0]], vec![0.0], &act("relu"));
        let l1 = Layer::uniform(vec![vec![scale]], vec![0.0], &act("identity"));
        let k = scale.abs().max(1.0);
        let i: Vec<usize> = if scale.abs() > 1.0 { vec![1] } else { vec![] };
        Network::new(1, vec![l0, l1], ArchitectureCert::new(1, 1, k, i, 1).unwrap()).unwrap()
    }

    fn identity_net(dim: usize) -> Network {
        let l = Layer::uniform(linalg::identity(dim), vec![0.0; dim], &act("identity"));
        Network::new(
            dim,
            vec![l],
            ArchitectureCert::new(dim, 0, 1.0, [], dim).unwrap(),
        )
        .unwrap()
    }

    fn assert_fn_equal(a: &Network, b: impl Fn(&[f64]) -> f64, lo: f64, hi: f64) {
        let grid = EvalGrid::new(EvalBox::new(vec![lo], vec![hi]).unwrap(), 1001).unwrap();
        grid.for_each_point(|x| {
            let got = a.eval_scalar(x).unwrap();
            let want = b(x);
            assert!(
                (got - want).abs() <= 1e-12,
                "mismatch at {x:?}: {got} vs {want}"
            );
        });
    }

    #[test]
    fn pad_to_same_dims_is_identity() {
        let n = relu_net(2.0);
        let p = pad(&n, n.cert.width, n.cert.depth).unwrap();
        assert!(n.structurally_equal(&p));
    }

    #[test]
    fn pad_preserves_function_and_budget() {
        let n = relu_net(2.0);
        let p = pad(&n, 4, 3).unwrap();
        assert_eq!(p.cert.width, 4);
        assert_eq!(p.cert.depth, 3);
        assert_relative_eq!(p.cert.norm_budget, 2.0);
        assert_fn_equal(&p, |x| 2.0 * x[0].max(0.0), -2.0, 2.0);
        assert!(check_norm_constraint(&p).ok);
    }

    #[test]
    fn pad_rejects_shrinking() {
        let n = relu_net(2.0);
        assert!(pad(&n, 0, 5).is_err());
        assert!(pad(&n, 5, 0).is_err());
    }

    #[test]
    fn compose_with_identity_is_function_equal() {
        let n = relu_net(2.0);
        let c = compose(&n, &identity_net(1)).unwrap();
        assert_fn_equal(&c, |x| 2.0 * x[0].max(0.0), -1.5, 1.5);
        let c2 = compose(&identity_net(1), &n).unwrap();
        assert_fn_equal(&c2, |x| 2.0 * x[0].max(0.0), -1.5, 1.5);
    }

    #[test]
    fn compose_multiplies_budgets() {
        let a = relu_net(2.0);
        let b = relu_net(3.0);
        let c = compose(&a, &b).unwrap();
        assert_relative_eq!(c.cert.norm_budget, 6.0);
        assert_eq!(c.cert.depth, 2);
        assert!(check_norm_constraint(&c).ok);
    }

    #[test]
    fn compose_matches_two_step_eval() {
        let a = relu_net(2.0);
        let b = relu_net(0.5);
        let c = compose(&a, &b).unwrap();
        for x in EvalBox::symmetric(1).sample(1000, 5) {
            let two_step = a.eval_scalar(&b.eval(&x).unwrap()).unwrap();
            let fused = c.eval_scalar(&x).unwrap();
            assert!((two_step - fused).abs() <= 1e-12);
        }
    }

    #[test]
    fn compose_affine_identity_keeps_cert() {
        let n = relu_net(2.0);
        let c = compose_affine(&n, &linalg::identity(1), &[0.0]).unwrap();
        assert_relative_eq!(c.cert.norm_budget, 2.0);
        assert_eq!(c.cert.width, n.cert.width);
        assert_eq!(c.cert.depth, n.cert.depth);
    }

    #[test]
    fn compose_affine_scales_budget() {
        let n = relu_net(5.0);
        let c = compose_affine(&n, &[vec![2.0]], &[0.0]).unwrap();
        assert_relative_eq!(c.cert.norm_budget, 10.0);
        assert_fn_equal(&c, |x| 5.0 * (2.0 * x[0]).max(0.0), -1.0, 1.0);
    }

    #[test]
    fn concat_stacks_outputs() {
        let n = relu_net(2.0);
        let c = concat(&n, &n).unwrap();
        assert_eq!(c.output_dim(), 2);
        assert_relative_eq!(c.cert.norm_budget, 2.0);
        for x in EvalBox::symmetric(1).sample(1000, 9) {
            let out = c.eval(&x).unwrap();
            let single = n.eval_scalar(&x).unwrap();
            assert!((out[0] - single).abs() <= 1e-12);
            assert!((out[1] - single).abs() <= 1e-12);
        }
    }

    #[test]
    fn concat_budget_is_max() {
        let a = relu_net(1.0);
        let b = relu_net(4.0);
        let c = concat(&a, &b).unwrap();
        assert_relative_eq!(c.cert.norm_budget, 4.0);
        assert!(check_norm_constraint(&c).ok);
    }

    #[test]
    fn concat_aligns_depths() {
        let a = relu_net(2.0);
        let b = identity_net(1);
        let c = concat(&a, &b).unwrap();
        assert_eq!(c.cert.depth, 1);
        for x in EvalBox::symmetric(1).sample(500, 13) {
            let out = c.eval(&x).unwrap();
            assert!((out[0] - a.eval_scalar(&x).unwrap()).abs() <= 1e-12);
            assert!((out[1] - x[0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn lincomb_degenerate_coefficients() {
        let a = relu_net(2.0);
        let b = relu_net(3.0);
        let c = lincomb(1.0, &a, 0.0, &b).unwrap();
        assert_fn_equal(&c, |x| 2.0 * x[0].max(0.0), -1.0, 1.0);
    }

    #[test]
    fn lincomb_budget_adds() {
        let a = relu_net(2.0);
        let c = lincomb(1.0, &a, 1.0, &a).unwrap();
        assert_relative_eq!(c.cert.norm_budget, 4.0);
        assert!(check_norm_constraint(&c).ok);
    }

    #[test]
    fn lincomb_builds_exact_identity() {
        // ReLU(x) - ReLU(-x) = x on [-1, 1].
        let pos = relu_net(1.0);
        let l0 = Layer::uniform(vec![vec![-1.0]], vec![0.0], &act("relu"));
        let l1 = Layer::uniform(vec![vec![1.0]], vec![0.0], &act("identity"));
        let neg = Network::new(
            1,
            vec![l0, l1],
            ArchitectureCert::new(1, 1, 1.0, [], 1).unwrap(),
        )
        .unwrap();
        let c = lincomb(1.0, &pos, -1.0, &neg).unwrap();
        assert_fn_equal(&c, |x| x[0], -1.0, 1.0);
    }

    #[test]
    fn pad_then_compose_equals_compose_then_pad() {
        let a = relu_net(2.0);
        let b = relu_net(0.5);
        let left = compose(&pad(&a, 3, 2).unwrap(), &b).unwrap();
        let right = pad(&compose(&a, &b).unwrap(), 3, 3).unwrap();
        for x in EvalBox::symmetric(1).sample(500, 21) {
            let l = left.eval_scalar(&x).unwrap();
            let r = right.eval_scalar(&x).unwrap();
            assert!((l - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let a = relu_net(1.0);
        let two = identity_net(2);
        assert!(compose(&a, &two).is_err());
        assert!(concat(&a, &two).is_err());
        assert!(lincomb(1.0, &a, 1.0, &two).is_err());
        assert!(compose_affine(&a, &linalg::identity(2), &[0.0, 0.0]).is_err());
    }
}
