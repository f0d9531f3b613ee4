use crate::error::{check_dim, Error, Result};
use crate::funcrep::ConvexPolyhedralFunction;
use crate::linalg::{dot, sub};

/// A selection of `∂f`.
pub trait SubgradientOracle: Sync {
    fn dim(&self) -> usize;

    fn subgradient(&self, x: &[f64]) -> Vec<f64>;

    /// `f(x)` when the oracle knows it; enables the subgradient-inequality
    /// check during integration.
    fn value(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Smallest-index active piece of a polyhedral function.
pub struct PolyhedralOracle<'a> {
    pub f: &'a ConvexPolyhedralFunction,
}

impl SubgradientOracle for PolyhedralOracle<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let pieces = self.f.pieces();
        let mut best = 0;
        let mut best_val = pieces[0].eval(x);
        for (i, p) in pieces.iter().enumerate().skip(1) {
            let v = p.eval(x);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        pieces[best].slope.clone()
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        self.f.eval(x).ok().and_then(|v| v.as_finite())
    }
}

/// Oracle from a closure, without values.
pub struct FnOracle<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> SubgradientOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// Reconstructs `f(target)` from `f(x0)` by a midpoint Riemann sum of
/// `⟨g(x_k), Δ⟩` along the segment, `Δ = (target − x0)/steps`.
///
/// Consecutive samples are checked for monotonicity of the directional
/// derivative and, when the oracle reports values, for the subgradient
/// inequality in both directions.
pub fn integrate_subdiff(
    oracle: &dyn SubgradientOracle,
    x0: &[f64],
    f_x0: f64,
    target: &[f64],
    steps: usize,
) -> Result<f64> {
    let d = oracle.dim();
    check_dim(d, x0.len())?;
    check_dim(d, target.len())?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let delta: Vec<f64> = sub(target, x0).iter().map(|v| v / steps as f64).collect();
    let at = |k: f64| -> Vec<f64> { x0.iter().zip(&delta).map(|(a, b)| a + k * b).collect() };
    let mut total = f_x0;
    let mut prev: Option<(Vec<f64>, Vec<f64>, Option<f64>)> = None;
    for k in 0..steps {
        let x = at(k as f64 + 0.5);
        let g = oracle.subgradient(&x);
        check_dim(d, g.len())?;
        let slope = dot(&g, &delta);
        let value = oracle.value(&x);
        if let Some((px, pg, pv)) = &prev {
            let drop = slope - dot(pg, &delta);
            let scale = 1.0 + slope.abs();
            if drop < -1e-9 * scale {
                return Err(Error::InvalidOracle(format!(
                    "directional derivative decreases between {px:?} and {x:?}"
                )));
            }
            if let (Some(a), Some(b)) = (*pv, value) {
                let tol = 1e-9 * (1.0 + a.abs() + b.abs());
                let step = sub(&x, px);
                if b < a + dot(pg, &step) - tol || a < b - dot(&g, &step) - tol {
                    return Err(Error::InvalidOracle(format!(
                        "subgradient inequality violated between {px:?} and {x:?}"
                    )));
                }
            }
        }
        total += slope;
        prev = Some((x, g, value));
    }
    Ok(total)
}
