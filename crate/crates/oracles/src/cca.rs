//! Canonical correlations by direct search over unit directions.
//!
//! For each component the X direction is swept over a hyperspherical
//! angular grid (coarse pass, then repeated local zooms) inside the
//! subspace uncorrelated with earlier components. For a fixed X direction
//! the best Y direction follows from Cauchy–Schwarz in a Cyy-orthonormal
//! basis, so no eigen-solver is involved.

fn covariance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let (da, db) = (a[0].len(), b[0].len());
    let mean = |m: &[Vec<f64>], j: usize| m.iter().map(|r| r[j]).sum::<f64>() / n as f64;
    let ma: Vec<f64> = (0..da).map(|j| mean(a, j)).collect();
    let mb: Vec<f64> = (0..db).map(|j| mean(b, j)).collect();
    let mut c = vec![vec![0.0; db]; da];
    for i in 0..da {
        for j in 0..db {
            c[i][j] = (0..n).map(|r| (a[r][i] - ma[i]) * (b[r][j] - mb[j])).sum::<f64>()
                / (n - 1) as f64;
        }
    }
    c
}

fn inner(c: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += u[i] * c[i][j] * v[j];
        }
    }
    s
}

/// Basis of `{v : v' C p = 0 for p in prev}`, orthonormal under `C`.
fn constrained_basis(c: &[Vec<f64>], prev: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = c.len();
    let mut basis: Vec<Vec<f64>> = prev.to_vec();
    let mut out = Vec::new();
    for e in 0..d {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        for b in &basis {
            let coef = inner(c, &v, b) / inner(c, b, b);
            for k in 0..d {
                v[k] -= coef * b[k];
            }
        }
        let norm = inner(c, &v, &v);
        if norm > 1e-10 {
            let scale = 1.0 / norm.sqrt();
            v.iter_mut().for_each(|x| *x *= scale);
            basis.push(v.clone());
            out.push(v);
        }
    }
    out
}

fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(angles.len() + 1);
    let mut sin_prod = 1.0;
    for &a in angles {
        p.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    p.push(sin_prod);
    p
}

fn grid_search(dim: usize, f: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    if dim <= 1 {
        return vec![1.0];
    }
    let m = dim - 1;
    const COARSE: usize = 48;
    let mut best = (f64::MIN, vec![0.0; m]);
    let mut idx = vec![0usize; m];
    loop {
        let angles: Vec<f64> = idx
            .iter()
            .map(|&i| std::f64::consts::PI * i as f64 / COARSE as f64)
            .collect();
        let v = f(&sphere_point(&angles));
        if v > best.0 {
            best = (v, angles);
        }
        let mut k = 0;
        loop {
            if k == m {
                return zoom(best, f);
            }
            idx[k] += 1;
            let limit = if k == m - 1 { 2 * COARSE } else { COARSE + 1 };
            if idx[k] < limit {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn zoom(mut best: (f64, Vec<f64>), f: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let m = best.1.len();
    let mut width = std::f64::consts::PI / 48.0;
    const STEPS: i32 = 4;
    for _ in 0..60 {
        let center = best.1.clone();
        let total = (2 * STEPS + 1).pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let angles: Vec<f64> = (0..m)
                .map(|k| {
                    let off = (c % (2 * STEPS + 1)) - STEPS;
                    c /= 2 * STEPS + 1;
                    center[k] + width * off as f64 / STEPS as f64
                })
                .collect();
            let v = f(&sphere_point(&angles));
            if v > best.0 {
                best = (v, angles);
            }
        }
        width *= 0.6;
    }
    sphere_point(&best.1)
}

/// The first `k` canonical correlations of the row-aligned views.
pub fn grid_canonical_correlations(x: &[Vec<f64>], y: &[Vec<f64>], k: usize) -> Vec<f64> {
    let cxx = covariance(x, x);
    let cyy = covariance(y, y);
    let cxy = covariance(x, y);
    let (dx, dy) = (cxx.len(), cyy.len());
    let mut prev_a: Vec<Vec<f64>> = Vec::new();
    let mut prev_b: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let ex = constrained_basis(&cxx, &prev_a);
        let fy = constrained_basis(&cyy, &prev_b);
        // q_i = F_i' Cyx a
        let qvec = |a: &[f64]| -> Vec<f64> {
            fy.iter()
                .map(|fi| (0..dx).map(|i| a[i] * (0..dy).map(|j| cxy[i][j] * fi[j]).sum::<f64>()).sum())
                .collect()
        };
        let a_of = |coef: &[f64]| -> Vec<f64> {
            (0..dx).map(|r| ex.iter().zip(coef).map(|(e, c)| e[r] * c).sum()).collect()
        };
        let objective = |coef: &[f64]| -> f64 {
            qvec(&a_of(coef)).iter().map(|q| q * q).sum::<f64>().sqrt()
        };
        let coef = grid_search(ex.len(), &objective);
        let a = a_of(&coef);
        let q = qvec(&a);
        let rho = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let b: Vec<f64> = (0..dy)
            .map(|r| fy.iter().zip(&q).map(|(f, qi)| f[r] * qi / rho.max(1e-300)).sum())
            .collect();
        out.push(rho);
        prev_a.push(a);
        prev_b.push(b);
    }
    out
}
