use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;

use super::polyhedral::AffinePiece;

/// Uniform box grid in `R^d`, `d ≤ 3`, nodes stored row-major (last axis
/// fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<Grid> {
        let g = Grid { lower, upper, nodes };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Grid> {
        Grid::new(vec![lo; dim], vec![hi; dim], vec![n; dim])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} outside 1..=3")));
        }
        check_dim(d, self.upper.len())?;
        check_dim(d, self.nodes.len())?;
        for i in 0..d {
            if !(self.lower[i].is_finite() && self.upper[i].is_finite())
                || self.lower[i] >= self.upper[i]
            {
                return Err(Error::InvalidGrid(format!("axis {i}: need finite lower < upper")));
            }
            if self.nodes[i] < 2 {
                return Err(Error::InvalidGrid(format!("axis {i}: need at least 2 nodes")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.nodes[axis] - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.nodes[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + k as f64 * self.spacing(axis)
        }
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.nodes[axis]).map(|k| self.coord(axis, k)).collect()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.nodes).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.nodes[axis];
            flat /= self.nodes[axis];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi(flat)
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.coord(axis, k))
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12;
        x.iter().enumerate().all(|(i, &v)| {
            let slack = tol * (1.0 + self.upper[i].abs().max(self.lower[i].abs()));
            v >= self.lower[i] - slack && v <= self.upper[i] + slack
        })
    }
}

/// Emitted when the dual grid does not contain every slope of the lower
/// hull along some axis; values outside the declared slope box are lost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRangeWarning {
    pub axis: usize,
    pub needed_lower: f64,
    pub needed_upper: f64,
    pub dual_lower: f64,
    pub dual_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridTransform {
    pub function: GridFunction,
    pub warnings: Vec<SlopeRangeWarning>,
}

/// Extended-real samples on a [`Grid`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<ExtReal>,
}

/// One-dimensional discrete Legendre transform of the finite samples
/// `(x_i, y_i)` at the sorted slopes `s`, by a lower convex hull and a
/// monotone pointer sweep. Collinear hull points are kept and the pointer
/// only advances on a strictly larger value, so ties resolve to the
/// smallest node index. Returns the values and the hull's extreme slopes.
pub fn legendre_1d(x: &[f64], y: &[ExtReal], s: &[f64]) -> (Vec<ExtReal>, Option<(f64, f64)>) {
    let mut hull: Vec<usize> = Vec::new();
    for i in (0..x.len()).filter(|&i| y[i].is_finite()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x[b] - x[a]) * (y[i].value() - y[a].value())
                - (y[b].value() - y[a].value()) * (x[i] - x[a]);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        return (vec![ExtReal::NEG_INFINITY; s.len()], None);
    }
    let slope = |a: usize, b: usize| (y[b].value() - y[a].value()) / (x[b] - x[a]);
    let range = (hull.len() >= 2).then(|| {
        let n = hull.len();
        (slope(hull[0], hull[1]), slope(hull[n - 2], hull[n - 1]))
    });
    let val = |k: usize, sj: f64| sj * x[hull[k]] - y[hull[k]].value();
    let mut out = Vec::with_capacity(s.len());
    let mut ptr = 0;
    for &sj in s {
        while ptr + 1 < hull.len() && val(ptr + 1, sj) > val(ptr, sj) {
            ptr += 1;
        }
        out.push(ExtReal::finite(val(ptr, sj)));
    }
    (out, range)
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<ExtReal>) -> Result<GridFunction> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> ExtReal) -> Result<GridFunction> {
        grid.validate()?;
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn is_proper(&self) -> bool {
        self.values.iter().any(|v| v.is_finite()) && !self.values.iter().any(|v| v.is_neg_inf())
    }

    fn require_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperFunction(
                "grid function must have a finite value and no -inf".into(),
            ))
        }
    }

    /// Multilinear interpolation. Only stencil nodes with nonzero weight
    /// participate; if any of them is `+∞` the result is `+∞`. Points
    /// outside the box evaluate to `+∞`.
    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim(), x.len())?;
        if !self.grid.contains(x) {
            return Ok(ExtReal::INFINITY);
        }
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for i in 0..d {
            let t = ((x[i] - self.grid.lower[i]) / self.grid.spacing(i))
                .clamp(0.0, (self.grid.nodes[i] - 1) as f64);
            let k = (t.floor() as usize).min(self.grid.nodes[i] - 2);
            base[i] = k;
            frac[i] = t - k as f64;
        }
        let mut acc = 0.0;
        let mut idx = vec![0usize; d];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            for i in 0..d {
                let up = (corner >> i) & 1 == 1;
                idx[i] = base[i] + up as usize;
                w *= if up { frac[i] } else { 1.0 - frac[i] };
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[self.grid.flat(&idx)];
            if !v.is_finite() {
                return Ok(v);
            }
            acc += w * v.value();
        }
        Ok(ExtReal::finite(acc))
    }

    /// Discrete conjugate on `dual`, applying the one-dimensional transform
    /// axis by axis (last axis first): `f*(s) = max_{x_1} s_1 x_1 −
    /// (−max_{x_2} (s_2 x_2 − f(x_1, x_2)))` and so on.
    pub fn conjugate(&self, dual: &Grid) -> Result<GridTransform> {
        self.require_proper()?;
        dual.validate()?;
        check_dim(self.dim(), dual.dim())?;
        self.transform_with(dual, legendre_1d)
    }

    pub(crate) fn transform_with(
        &self,
        dual: &Grid,
        line: impl Fn(&[f64], &[ExtReal], &[f64]) -> (Vec<ExtReal>, Option<(f64, f64)>),
    ) -> Result<GridTransform> {
        let d = self.dim();
        let mut shape = self.grid.nodes.clone();
        let mut data = self.values.clone();
        let mut warnings = Vec::new();
        for axis in (0..d).rev() {
            if axis + 1 < d {
                for v in data.iter_mut() {
                    *v = -*v;
                }
            }
            let xs = self.grid.axis_coords(axis);
            let ss = dual.axis_coords(axis);
            let (next, range) = transform_axis(&data, &shape, axis, &xs, &ss, &line);
            if let Some((lo, hi)) = range {
                let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
                if lo < dual.lower[axis] - tol || hi > dual.upper[axis] + tol {
                    warnings.push(SlopeRangeWarning {
                        axis,
                        needed_lower: lo,
                        needed_upper: hi,
                        dual_lower: dual.lower[axis],
                        dual_upper: dual.upper[axis],
                    });
                }
            }
            data = next;
            shape[axis] = dual.nodes[axis];
        }
        warnings.sort_by_key(|w| w.axis);
        Ok(GridTransform { function: GridFunction { grid: dual.clone(), values: data }, warnings })
    }

    /// Closed convex hull on the primal grid by conjugating twice through
    /// `dual`. Exact at the nodes when `dual` contains the needed slopes.
    pub fn envelope(&self, dual: &Grid) -> Result<GridTransform> {
        let first = self.conjugate(dual)?;
        let second = first.function.transform_with(&self.grid, legendre_1d)?;
        Ok(GridTransform { function: second.function, warnings: first.warnings })
    }

    /// Lower semicontinuous hull on the grid.
    ///
    /// A `+∞` node whose existing axis neighbors are all finite (a hole, or
    /// an open box endpoint) drops to the smallest neighbor. A finite node
    /// drops only when it is interior on every axis and sits strictly above
    /// both each neighbor and the linear extrapolation from each side, so
    /// sampled continuous functions (including concave peaks and the box
    /// edges of steep functions) stay untouched. Sweeps repeat until
    /// nothing changes.
    pub fn lsc_hull(&self) -> Result<GridFunction> {
        self.require_proper()?;
        let d = self.dim();
        let mut cur = self.values.clone();
        // Bounded by the number of distinct values a node can drop to.
        for _ in 0..=cur.len() {
            let mut next = cur.clone();
            let mut changed = false;
            for flat in 0..cur.len() {
                if let Some(v) = self.lsc_drop(&cur, flat, d) {
                    next[flat] = v;
                    changed = true;
                }
            }
            cur = next;
            if !changed {
                break;
            }
        }
        Ok(GridFunction { grid: self.grid.clone(), values: cur })
    }

    fn lsc_drop(&self, cur: &[ExtReal], flat: usize, d: usize) -> Option<ExtReal> {
        let idx = self.grid.multi(flat);
        let v = cur[flat];
        let at = |axis: usize, step: isize| -> Option<ExtReal> {
            let k = idx[axis] as isize + step;
            if k < 0 || k >= self.grid.nodes[axis] as isize {
                return None;
            }
            let mut j = idx.clone();
            j[axis] = k as usize;
            Some(cur[self.grid.flat(&j)])
        };
        let mut lowest = ExtReal::INFINITY;
        for axis in 0..d {
            let sides = [(at(axis, -1), at(axis, -2)), (at(axis, 1), at(axis, 2))];
            for (near, far) in sides {
                let Some(n1) = near else {
                    if v.is_finite() {
                        return None;
                    }
                    continue;
                };
                if n1.value() >= v.value() {
                    return None;
                }
                if v.is_finite() {
                    if let Some(n2) = far.and_then(|n| n.as_finite()) {
                        if 2.0 * n1.value() - n2 >= v.value() {
                            return None;
                        }
                    }
                }
                lowest = lowest.min(n1);
            }
        }
        if lowest.is_pos_inf() {
            return None;
        }
        Some(lowest)
    }

    pub fn min_value(&self) -> ExtReal {
        self.values.iter().copied().fold(ExtReal::INFINITY, ExtReal::min)
    }

    /// Constant minorant `(0, min f)`; present for every proper grid
    /// function because the box is bounded.
    pub fn affine_minorant(&self) -> Option<AffinePiece> {
        let m = self.min_value();
        m.as_finite().map(|b| AffinePiece::new(vec![0.0; self.dim()], b))
    }

    /// `(f□g)(z) = min_{x node of f} f(x) + g(z − x)` at every node `z` of
    /// `result`, with `g` evaluated by interpolation.
    pub fn inf_convolution(&self, g: &GridFunction, result: &Grid) -> Result<GridFunction> {
        self.require_proper()?;
        g.require_proper()?;
        check_dim(self.dim(), g.dim())?;
        result.validate()?;
        check_dim(self.dim(), result.dim())?;
        let finite: Vec<(Vec<f64>, f64)> = (0..self.values.len())
            .filter_map(|i| self.values[i].as_finite().map(|v| (self.grid.point(i), v)))
            .collect();
        let mut values = Vec::with_capacity(result.len());
        for k in 0..result.len() {
            let z = result.point(k);
            let mut best = ExtReal::INFINITY;
            for (x, fx) in &finite {
                let diff: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
                best = best.min(g.eval(&diff)? + *fx);
            }
            values.push(best);
        }
        let out = GridFunction { grid: result.clone(), values };
        if !out.values.iter().any(|v| v.is_finite()) {
            return Err(Error::ImproperFunction("inf-convolution is +inf on the result grid".into()));
        }
        Ok(out)
    }

    /// CSV: one row per node with coordinates then value (`inf` literal).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        let _ = writeln!(out, "{},value", cols.join(","));
        for (i, v) in self.values.iter().enumerate() {
            let p: Vec<String> = self.grid.point(i).iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{},{}", p.join(","), v);
        }
        out
    }
}

type LineFn<'a> = dyn Fn(&[f64], &[ExtReal], &[f64]) -> (Vec<ExtReal>, Option<(f64, f64)>) + 'a;

fn transform_axis(
    data: &[ExtReal],
    shape: &[usize],
    axis: usize,
    xs: &[f64],
    ss: &[f64],
    line: &LineFn<'_>,
) -> (Vec<ExtReal>, Option<(f64, f64)>) {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let n = shape[axis];
    let m = ss.len();
    let mut out = vec![ExtReal::NEG_INFINITY; outer * m * inner];
    let mut range: Option<(f64, f64)> = None;
    let mut column = vec![ExtReal::ZERO; n];
    for o in 0..outer {
        for i in 0..inner {
            for k in 0..n {
                column[k] = data[(o * n + k) * inner + i];
            }
            let (vals, r) = line(xs, &column, ss);
            for (k, v) in vals.into_iter().enumerate() {
                out[(o * m + k) * inner + i] = v;
            }
            if let Some((lo, hi)) = r {
                range = Some(match range {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
    }
    (out, range)
}
