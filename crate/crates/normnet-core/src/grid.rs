//! Evaluation grids, sup-norm error estimation and empirical Lipschitz
//! measurement.
//!
//! Grid maxima are under-estimates of the true sup; defaults keep the total
//! point count near 10⁵ in 1D and at most 10⁶ in higher dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::Network;

/// Axis-aligned box with per-axis bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl EvalBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds: {} lower vs {} upper",
                lo.len(),
                hi.len()
            )));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l < h) {
                return Err(Error::Precondition(format!(
                    "box requires lower < upper on each axis, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    /// The symmetric cube `[-1,1]^d`.
    pub fn symmetric(dim: usize) -> Self {
        Self {
            lo: vec![-1.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Draw `n` uniform points; reproducible for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.lo
                    .iter()
                    .zip(&self.hi)
                    .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                    .collect()
            })
            .collect()
    }
}

/// Uniform tensor grid over a box: `points_per_axis` points on each axis,
/// endpoints included, `points_per_axis^dim` points in total.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    pub domain: EvalBox,
    pub points_per_axis: usize,
}

impl EvalGrid {
    pub fn new(domain: EvalBox, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::Precondition(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(Self {
            domain,
            points_per_axis,
        })
    }

    /// Default grid resolution: 10⁵+1 points in 1D, and per-axis counts
    /// keeping the total at or below 10⁶ in higher dimensions.
    pub fn default_for(domain: EvalBox) -> Self {
        let ppa = match domain.dim() {
            1 => 100_001,
            2 => 1_000,
            3 => 100,
            4 => 31,
            5 => 15,
            _ => 7,
        };
        Self {
            domain,
            points_per_axis: ppa,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.dim() as u32)
    }

    fn point_at(&self, mut index: usize, out: &mut [f64]) {
        let n = self.points_per_axis;
        for axis in 0..self.dim() {
            let i = index % n;
            index /= n;
            let l = self.domain.lo[axis];
            let h = self.domain.hi[axis];
            out[axis] = l + (h - l) * (i as f64) / ((n - 1) as f64);
        }
    }

    /// Visit every grid point in a fixed order.
    pub fn for_each_point(&self, mut f: impl FnMut(&[f64])) {
        let mut buf = vec![0.0; self.dim()];
        for idx in 0..self.total_points() {
            self.point_at(idx, &mut buf);
            f(&buf);
        }
    }
}

/// Grid estimate of `max_x |f(x) - net(x)|` for a scalar network.
/// Deterministic for a fixed grid; propagates evaluation errors.
pub fn sup_error(
    f: impl Fn(&[f64]) -> f64,
    net: &Network,
    grid: &EvalGrid,
) -> Result<f64> {
    if grid.dim() != net.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "grid dimension {} vs network input {}",
            grid.dim(),
            net.input_dim
        )));
    }
    let mut worst: f64 = 0.0;
    let mut err: Option<Error> = None;
    grid.for_each_point(|x| {
        if err.is_some() {
            return;
        }
        match net.eval_scalar(x) {
            Ok(y) => worst = worst.max((f(x) - y).abs()),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

/// Grid estimate of `max_x |f(x) - g(x)|` for two scalar functions.
pub fn sup_deviation(
    f: impl Fn(&[f64]) -> f64,
    g: impl Fn(&[f64]) -> f64,
    grid: &EvalGrid,
) -> f64 {
    let mut worst: f64 = 0.0;
    grid.for_each_point(|x| worst = worst.max((f(x) - g(x)).abs()));
    worst
}

/// Empirical Lipschitz constant of a network over a box:
/// `max ‖net(x) - net(y)‖_∞ / ‖x - y‖_∞` over `n_pairs` sampled pairs.
/// Degenerate pairs (x ≈ y) are resampled. Reproducible for a fixed seed.
pub fn measure_lipschitz_empirical(
    net: &Network,
    domain: &EvalBox,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::Precondition("n_pairs must be >= 1".into()));
    }
    if domain.dim() != net.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "domain dimension {} vs network input {}",
            domain.dim(),
            net.input_dim
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
            .collect()
    };
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n_pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let dist = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Near-coincident pairs are resampled: dividing by a tiny distance
        // amplifies evaluation round-off into spurious ratio spikes.
        if dist < 1e-6 {
            continue;
        }
        let fx = net.eval(&x)?;
        let fy = net.eval(&y)?;
        let dev = fx
            .iter()
            .zip(&fy)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev / dist);
        done += 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::Registry;
    use crate::network::{ArchitectureCert, Layer, Network};
    use approx::assert_relative_eq;

    fn scale_net(c: f64) -> Network {
        let act = Registry::global().resolve("identity").unwrap();
        let l = Layer::uniform(vec![vec![c]], vec![0.0], &act);
        Network::new(
            1,
            vec![l],
            ArchitectureCert::new(1, 0, c.abs().max(1.0), if c.abs() > 1.0 { vec![0] } else { vec![] }, 1)
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn grid_counts_and_endpoints() {
        let g = EvalGrid::new(EvalBox::unit(2), 3).unwrap();
        assert_eq!(g.total_points(), 9);
        let mut pts = Vec::new();
        g.for_each_point(|p| pts.push(p.to_vec()));
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[8], vec![1.0, 1.0]);
    }

    #[test]
    fn box_rejects_degenerate_axis() {
        assert!(EvalBox::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn sup_error_of_self_is_zero() {
        let net = scale_net(3.0);
        let g = EvalGrid::new(EvalBox::symmetric(1), 101).unwrap();
        let e = sup_error(|x| net.eval_scalar(x).unwrap(), &net, &g).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn lipschitz_of_constant_network_is_zero() {
        let act = Registry::global().resolve("identity").unwrap();
        let l = Layer::uniform(vec![vec![0.0]], vec![0.7], &act);
        let net = Network::new(1, vec![l], ArchitectureCert::new(1, 0, 1.0, [], 1).unwrap())
            .unwrap();
        let lip =
            measure_lipschitz_empirical(&net, &EvalBox::unit(1), 1000, 7).unwrap();
        assert_eq!(lip, 0.0);
    }

    #[test]
    fn lipschitz_of_linear_map_is_exact() {
        let net = scale_net(3.0);
        let lip =
            measure_lipschitz_empirical(&net, &EvalBox::unit(1), 2000, 11).unwrap();
        assert_relative_eq!(lip, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn lipschitz_reproducible_for_fixed_seed() {
        let net = scale_net(-2.0);
        let a = measure_lipschitz_empirical(&net, &EvalBox::unit(1), 500, 3).unwrap();
        let b = measure_lipschitz_empirical(&net, &EvalBox::unit(1), 500, 3).unwrap();
        assert_eq!(a, b);
    }
}
