//! Double-description vertex enumeration for `{x : Ax ≤ b}`.
//!
//! The polyhedron is homogenized into the cone `{(λ, x) : Ax − bλ ≤ 0, λ ≥ 0}`.
//! Its lineality space is split off with explicit equality rows so the
//! remaining cone is pointed; extreme rays are then built incrementally from
//! a simplicial starting cone, one constraint at a time, combining adjacent
//! ray pairs across each new hyperplane. Rays with `λ > 0` dehomogenize to
//! points, rays with `λ = 0` to recession directions.

use crate::linalg::{dot, inverse, norm_inf, null_space, rank};
use crate::polyhedron::{Halfspace, VRep};

const EPS: f64 = 1e-9;

struct Generator {
    y: Vec<f64>,
    tight: Vec<usize>,
}

fn normalize_inf(v: &mut [f64]) {
    let n = norm_inf(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn push_unique(list: &mut Vec<Vec<f64>>, v: Vec<f64>, tol: f64) {
    if !list
        .iter()
        .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol))
    {
        list.push(v);
    }
}

/// Vertices (or minimal-face points, when a lineality space exists) and
/// rays of the closed polyhedron described by `rows`. Strict flags are
/// ignored. Returns an empty [`VRep`] when the polyhedron is empty.
pub fn enumerate(dim: usize, rows: &[Halfspace]) -> VRep {
    let n = dim + 1;
    // Homogenized constraint rows over (λ, x).
    let mut m: Vec<Vec<f64>> = Vec::new();
    for h in rows {
        let mut r = Vec::with_capacity(n);
        r.push(-h.offset);
        r.extend_from_slice(&h.normal);
        if norm_inf(&r) <= 1e-14 {
            continue;
        }
        normalize_inf(&mut r);
        m.push(r);
    }
    let mut lam = vec![0.0; n];
    lam[0] = -1.0;
    m.push(lam);

    let lineality = null_space(&m, n, 1e-10);
    for l in &lineality {
        let mut l = l.clone();
        normalize_inf(&mut l);
        m.push(l.clone());
        m.push(l.iter().map(|v| -v).collect());
    }

    // Simplicial start: n independent rows B, rays are the columns of −B⁻¹.
    let mut basis_rows: Vec<usize> = Vec::new();
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for (i, r) in m.iter().enumerate() {
        let mut trial = chosen.clone();
        trial.push(r.clone());
        if rank(&trial, 1e-10) == trial.len() {
            chosen = trial;
            basis_rows.push(i);
            if chosen.len() == n {
                break;
            }
        }
    }
    debug_assert_eq!(chosen.len(), n, "homogenized system must have full rank");
    let inv = match inverse(&chosen, 1e-12) {
        Some(inv) => inv,
        None => return VRep::default(),
    };

    let tight_set = |y: &[f64], processed: &[usize], m: &[Vec<f64>]| -> Vec<usize> {
        processed
            .iter()
            .copied()
            .filter(|&i| dot(&m[i], y).abs() <= EPS)
            .collect()
    };

    let mut processed: Vec<usize> = basis_rows.clone();
    let mut gens: Vec<Generator> = (0..n)
        .map(|j| {
            let mut y: Vec<f64> = (0..n).map(|i| -inv[i][j]).collect();
            normalize_inf(&mut y);
            let tight = tight_set(&y, &processed, &m);
            Generator { y, tight }
        })
        .collect();

    for (i, row) in m.iter().enumerate() {
        if basis_rows.contains(&i) {
            continue;
        }
        let vals: Vec<f64> = gens.iter().map(|g| dot(row, &g.y)).collect();
        let pos: Vec<usize> = (0..gens.len()).filter(|&k| vals[k] > EPS).collect();
        let neg: Vec<usize> = (0..gens.len()).filter(|&k| vals[k] < -EPS).collect();
        processed.push(i);
        if pos.is_empty() {
            for (k, g) in gens.iter_mut().enumerate() {
                if vals[k].abs() <= EPS {
                    g.tight.push(i);
                }
            }
            continue;
        }

        let mut created: Vec<Generator> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common: Vec<usize> = gens[p]
                    .tight
                    .iter()
                    .copied()
                    .filter(|t| gens[q].tight.contains(t))
                    .collect();
                if common.len() + 2 < n {
                    continue;
                }
                let face: Vec<Vec<f64>> = common.iter().map(|&t| m[t].clone()).collect();
                if rank(&face, 1e-10) + 2 != n {
                    continue;
                }
                let mut y: Vec<f64> = gens[q]
                    .y
                    .iter()
                    .zip(&gens[p].y)
                    .map(|(a, b)| vals[p] * a - vals[q] * b)
                    .collect();
                normalize_inf(&mut y);
                let mut tight = common;
                tight.push(i);
                created.push(Generator { y, tight });
            }
        }

        let mut next: Vec<Generator> = Vec::with_capacity(gens.len() + created.len());
        for (k, mut g) in gens.into_iter().enumerate() {
            if vals[k] > EPS {
                continue;
            }
            if vals[k] >= -EPS {
                g.tight.push(i);
            }
            next.push(g);
        }
        next.extend(created);
        gens = next;
    }

    let mut out = VRep::default();
    for g in &gens {
        if g.y[0] > EPS {
            let p: Vec<f64> = g.y[1..].iter().map(|v| v / g.y[0]).collect();
            push_unique(&mut out.vertices, p, 1e-8);
        }
    }
    if out.vertices.is_empty() {
        return VRep::default();
    }
    for g in &gens {
        if g.y[0] <= EPS {
            let mut r = g.y[1..].to_vec();
            if norm_inf(&r) <= EPS {
                continue;
            }
            normalize_inf(&mut r);
            push_unique(&mut out.rays, r, 1e-8);
        }
    }
    for l in &lineality {
        let mut r = l[1..].to_vec();
        normalize_inf(&mut r);
        push_unique(&mut out.rays, r.clone(), 1e-8);
        push_unique(&mut out.rays, r.iter().map(|v| -v).collect(), 1e-8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(normal: &[f64], offset: f64) -> Halfspace {
        Halfspace::new(normal.to_vec(), offset)
    }

    fn has(list: &[Vec<f64>], v: &[f64]) -> bool {
        list.iter()
            .any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-9))
    }

    #[test]
    fn unit_square() {
        let rows = vec![
            hs(&[1.0, 0.0], 1.0),
            hs(&[-1.0, 0.0], 0.0),
            hs(&[0.0, 1.0], 1.0),
            hs(&[0.0, -1.0], 0.0),
        ];
        let v = enumerate(2, &rows);
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
        for p in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            assert!(has(&v.vertices, &p));
        }
    }

    #[test]
    fn quadrant_and_halfplane() {
        let quadrant = enumerate(2, &[hs(&[-1.0, 0.0], 0.0), hs(&[0.0, -1.0], 0.0)]);
        assert_eq!(quadrant.vertices, vec![vec![0.0, 0.0]]);
        assert!(has(&quadrant.rays, &[1.0, 0.0]) && has(&quadrant.rays, &[0.0, 1.0]));

        let half = enumerate(2, &[hs(&[0.0, 1.0], 2.0)]);
        assert_eq!(half.vertices.len(), 1);
        assert!((half.vertices[0][1] - 2.0).abs() < 1e-12);
        assert!(has(&half.rays, &[0.0, -1.0]));
        assert!(has(&half.rays, &[1.0, 0.0]) && has(&half.rays, &[-1.0, 0.0]));
    }

    #[test]
    fn empty_and_whole_space() {
        let empty = enumerate(1, &[hs(&[1.0], 0.0), hs(&[-1.0], -1.0)]);
        assert!(empty.vertices.is_empty());
        let whole = enumerate(2, &[]);
        assert_eq!(whole.vertices, vec![vec![0.0, 0.0]]);
        assert_eq!(whole.rays.len(), 4);
    }

    #[test]
    fn degenerate_pyramid_apex() {
        // Square pyramid: apex has four tight facets in R³.
        let rows = vec![
            hs(&[0.0, 0.0, -1.0], 0.0),
            hs(&[1.0, 0.0, 1.0], 1.0),
            hs(&[-1.0, 0.0, 1.0], 1.0),
            hs(&[0.0, 1.0, 1.0], 1.0),
            hs(&[0.0, -1.0, 1.0], 1.0),
        ];
        let v = enumerate(3, &rows);
        assert_eq!(v.vertices.len(), 5);
        assert!(has(&v.vertices, &[0.0, 0.0, 1.0]));
        assert!(v.rays.is_empty());
    }
}
