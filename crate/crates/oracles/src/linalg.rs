/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, from the roots of
/// its characteristic polynomial `λ³ - tr λ² + c λ - det` found by
/// bisection between the Cauchy bounds.
pub fn symmetric3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let c = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[1][0]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let p = |x: f64| ((x - tr) * x + c) * x - det;
    // the derivative's roots split the cubic into monotone pieces
    let disc = (tr * tr - 3.0 * c).max(0.0).sqrt();
    let (lo_crit, hi_crit) = ((tr - disc) / 3.0, (tr + disc) / 3.0);
    let bound = 1.0 + tr.abs().max(c.abs()).max(det.abs());
    let bisect = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (p(a) <= 0.0) == (p(mid) <= 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    [
        bisect(hi_crit, bound),
        bisect(lo_crit, hi_crit),
        bisect(-bound, lo_crit),
    ]
}

/// Per-column least squares `min ‖F_t - Σ_{l≠t} s_l F_l‖²` on item-major
/// rows, with a tiny ridge for rank-deficient Grams. Returns `S[l][t]`.
pub fn zero_diagonal_least_squares(f: &[Vec<f64>], ridge: f64) -> Vec<Vec<f64>> {
    let n = f.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut s = vec![vec![0.0; n]; n];
    for t in 0..n {
        let others: Vec<usize> = (0..n).filter(|&l| l != t).collect();
        let a: Vec<Vec<f64>> = others
            .iter()
            .map(|&i| {
                others
                    .iter()
                    .map(|&j| dot(&f[i], &f[j]) + if i == j { ridge } else { 0.0 })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = others.iter().map(|&i| dot(&f[i], &f[t])).collect();
        for (coef, &l) in solve(a, b).into_iter().zip(&others) {
            s[l][t] = coef;
        }
    }
    s
}

/// `Σ_t ‖F_t - Σ_l S[l][t] F_l‖²`.
pub fn reconstruction_error(f: &[Vec<f64>], s: &[Vec<f64>]) -> f64 {
    let n = f.len();
    let d = f[0].len();
    let mut total = 0.0;
    for t in 0..n {
        for k in 0..d {
            let approx: f64 = (0..n).map(|l| s[l][t] * f[l][k]).sum();
            total += (f[t][k] - approx).powi(2);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_eigenvalues() {
        let e = symmetric3_eigenvalues([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        for (a, b) in e.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_small_system() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }
}
