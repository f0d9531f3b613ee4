//! Random instance generators and brute-force oracles shared by the
//! integration tests. Nothing here calls the LP or vertex-enumeration code
//! of the library: vertices come from Gaussian elimination over every
//! subset of tight constraints, hulls from scanning simplices.

#![allow(dead_code)]

use fenchel_lab::funcrep::{AffinePiece, ConvexPolyhedralFunction, PiecewiseMinFunction};
use fenchel_lab::{Halfspace, Polyhedron};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multiple of `step` in `[lo, hi]`.
pub fn snapped(rng: &mut Rng, lo: f64, hi: f64, step: f64) -> f64 {
    let k = rng.random_range((lo / step).ceil() as i64..=(hi / step).floor() as i64);
    k as f64 * step
}

pub fn random_box(rng: &mut Rng, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for _ in 0..d {
        let a = snapped(rng, -3.0, 1.5, 0.25);
        let b = snapped(rng, a + 0.5, 3.0, 0.25);
        lo.push(a);
        hi.push(b);
    }
    (lo, hi)
}

pub fn random_pieces(rng: &mut Rng, d: usize, n: usize, slope: f64) -> Vec<AffinePiece> {
    (0..n)
        .map(|_| {
            let a = (0..d).map(|_| rng.random_range(-slope..slope)).collect();
            AffinePiece::new(a, rng.random_range(-1.0..1.0))
        })
        .collect()
}

/// Max of 1–4 pieces with slopes in `[−1, 1]^d` on a random box.
pub fn random_cpf_box(rng: &mut Rng, d: usize) -> ConvexPolyhedralFunction {
    let (lo, hi) = random_box(rng, d);
    let n = rng.random_range(1..=4);
    ConvexPolyhedralFunction::new(random_pieces(rng, d, n, 1.0), Polyhedron::from_box(&lo, &hi)).unwrap()
}

pub fn random_cpf_whole(rng: &mut Rng, d: usize) -> ConvexPolyhedralFunction {
    let n = rng.random_range(1..=5);
    ConvexPolyhedralFunction::new(random_pieces(rng, d, n, 1.0), Polyhedron::whole_space(d)).unwrap()
}

/// Box, whole space, or a box cut by a random halfspace through an
/// interior point.
pub fn random_cpf_any(rng: &mut Rng, d: usize) -> ConvexPolyhedralFunction {
    match rng.random_range(0..3) {
        0 => random_cpf_box(rng, d),
        1 => random_cpf_whole(rng, d),
        _ => {
            let (lo, hi) = random_box(rng, d);
            let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let n: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let off = n.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() + 0.1;
            let mut hs = Polyhedron::from_box(&lo, &hi).halfspaces().to_vec();
            hs.push(Halfspace::new(n, off));
            let k = rng.random_range(1..=4);
            ConvexPolyhedralFunction::new(random_pieces(rng, d, k, 1.0), Polyhedron::new(d, hs).unwrap())
                .unwrap()
        }
    }
}

/// 1–3 box branches; with `shared` they all live on one box.
pub fn random_pwmin(rng: &mut Rng, d: usize, shared: bool) -> PiecewiseMinFunction {
    let k = rng.random_range(1..=3);
    let (lo, hi) = random_box(rng, d);
    let branches = (0..k)
        .map(|_| {
            if shared {
                let n = rng.random_range(1..=3);
                ConvexPolyhedralFunction::new(random_pieces(rng, d, n, 1.0), Polyhedron::from_box(&lo, &hi))
                    .unwrap()
            } else {
                random_cpf_box(rng, d)
            }
        })
        .collect();
    PiecewiseMinFunction::new(branches).unwrap()
}

pub fn random_point(rng: &mut Rng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-r..r)).collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= m * a[col][c];
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vertices `(x, f(x))` of the epigraph of a convex polyhedral function
/// with a bounded domain, by solving every `(d+1)`-subset of the
/// equations `t = a_i·x + b_i` and `n_j·x = c_j`.
pub fn epi_vertices(f: &ConvexPolyhedralFunction) -> Vec<(Vec<f64>, f64)> {
    let d = f.dim();
    let pieces = f.pieces();
    let hs = f.domain().halfspaces();
    let m = pieces.len() + hs.len();
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for combo in combinations(m, d + 1) {
        if combo[0] >= pieces.len() {
            continue;
        }
        let mut a = Vec::with_capacity(d + 1);
        let mut b = Vec::with_capacity(d + 1);
        for &k in &combo {
            if k < pieces.len() {
                let mut row: Vec<f64> = pieces[k].slope.iter().map(|v| -v).collect();
                row.push(1.0);
                a.push(row);
                b.push(pieces[k].intercept);
            } else {
                let h = &hs[k - pieces.len()];
                let mut row = h.normal.clone();
                row.push(0.0);
                a.push(row);
                b.push(h.offset);
            }
        }
        let Some(sol) = solve(a, b) else { continue };
        let x = sol[..d].to_vec();
        let t = sol[d];
        let scale = 1.0 + t.abs();
        let in_dom = hs.iter().all(|h| dot(&h.normal, &x) <= h.offset + 1e-9 * (1.0 + h.offset.abs()));
        let on_top = pieces.iter().all(|p| p.eval(&x) <= t + 1e-9 * scale);
        if in_dom && on_top && !out.iter().any(|(y, s)| dist(y, &x) < 1e-9 && (s - t).abs() < 1e-9 * scale) {
            out.push((x, t));
        }
    }
    out
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Epigraph vertices of every branch.
pub fn pw_vertices(f: &PiecewiseMinFunction) -> Vec<(Vec<f64>, f64)> {
    f.branches().iter().flat_map(epi_vertices).collect()
}

/// Lower convex hull of the lifted points at `x` (`None` outside their
/// convex hull), by scanning every simplex of at most `d + 1` points.
pub fn hull_value(pts: &[(Vec<f64>, f64)], x: &[f64]) -> Option<f64> {
    let d = x.len();
    let mut best: Option<f64> = None;
    let mut take = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    for (p, t) in pts {
        if dist(p, x) <= 1e-12 {
            take(*t);
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (p, q) = (&pts[i].0, &pts[j].0);
            let pq: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
            let len2 = dot(&pq, &pq);
            if len2 < 1e-20 {
                continue;
            }
            let px: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            let lam = dot(&px, &pq) / len2;
            if !(-1e-12..=1.0 + 1e-12).contains(&lam) {
                continue;
            }
            let proj: Vec<f64> = p.iter().zip(&pq).map(|(a, b)| a + lam * b).collect();
            if dist(&proj, x) <= 1e-10 {
                take((1.0 - lam) * pts[i].1 + lam * pts[j].1);
            }
        }
    }
    if d == 2 {
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    let (p, q, r) = (&pts[i].0, &pts[j].0, &pts[k].0);
                    let a = vec![vec![q[0] - p[0], r[0] - p[0]], vec![q[1] - p[1], r[1] - p[1]]];
                    let Some(l) = solve(a, vec![x[0] - p[0], x[1] - p[1]]) else { continue };
                    let l0 = 1.0 - l[0] - l[1];
                    if l[0] >= -1e-12 && l[1] >= -1e-12 && l0 >= -1e-12 {
                        take(l0 * pts[i].1 + l[0] * pts[j].1 + l[1] * pts[k].1);
                    }
                }
            }
        }
    }
    best
}

/// `f*(s) = max_v ⟨s, v⟩ − t_v` over epigraph vertices (bounded domains).
pub fn conj_from_vertices(pts: &[(Vec<f64>, f64)], s: &[f64]) -> f64 {
    pts.iter().map(|(v, t)| dot(s, v) - t).fold(f64::NEG_INFINITY, f64::max)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
