//! Small dense symmetric linear algebra for the information matrix.

pub(crate) type Matrix = Vec<Vec<f64>>;

/// Inverse of a symmetric positive-definite matrix by Cholesky, or `None`
/// when a pivot is not positive.
pub(crate) fn cholesky_inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Invert L by forward substitution, then form L^{-T} L^{-1}.
    let mut li = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in c..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (c..i).map(|k| l[i][k] * li[k][c]).sum();
            li[i][c] = (rhs - s) / l[i][i];
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (i..n).map(|k| li[k][i] * li[k][j]).sum();
            inv[i][j] = v;
            inv[j][i] = v;
        }
    }
    Some(inv)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations:
/// eigenvalues and the matrix whose columns are the eigenvectors.
pub(crate) fn symmetric_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.len();
    let mut a = m.clone();
    let mut v = identity(n);
    for _ in 0..100 {
        let (mut off, mut diag) = (0.0, 0.0);
        for (i, row) in a.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i == j {
                    diag += x * x;
                } else {
                    off += x * x;
                }
            }
        }
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Ratio of the largest to the smallest absolute eigenvalue.
pub(crate) fn condition_number(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let min = eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, e| m.min(e.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Moore–Penrose inverse from an eigen-decomposition, dropping eigenvalues
/// below `rel_cut` times the largest.
pub(crate) fn pseudo_inverse(eigenvalues: &[f64], vectors: &Matrix, rel_cut: f64) -> Matrix {
    let n = eigenvalues.len();
    let max = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let mut out = vec![vec![0.0; n]; n];
    for (k, &e) in eigenvalues.iter().enumerate() {
        if e.abs() <= rel_cut * max {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[i][j] += vectors[i][k] * vectors[j][k] / e;
            }
        }
    }
    out
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn spd() -> Matrix {
        vec![
            vec![4.0, 1.0, 0.5, 0.0],
            vec![1.0, 3.0, 0.2, 0.1],
            vec![0.5, 0.2, 2.0, 0.3],
            vec![0.0, 0.1, 0.3, 1.0],
        ]
    }

    #[test]
    fn cholesky_inverts() {
        let m = spd();
        let p = product(&m, &cholesky_inverse(&m).unwrap());
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert!(cholesky_inverse(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }

    #[test]
    fn eigen_reconstructs() {
        let m = spd();
        let (e, v) = symmetric_eigen(&m);
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = (0..4).map(|k| v[i][k] * e[k] * v[j][k]).sum();
                assert!((r - m[i][j]).abs() < 1e-12);
            }
        }
        let pinv = pseudo_inverse(&e, &v, 0.0);
        let chol = cholesky_inverse(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((pinv[i][j] - chol[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_has_infinite_condition() {
        let m = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let (e, v) = symmetric_eigen(&m);
        assert!(condition_number(&e) > 1e15);
        let pinv = pseudo_inverse(&e, &v, 1e-12);
        assert!((pinv[0][0] - 0.25).abs() < 1e-12 && (pinv[0][1] - 0.25).abs() < 1e-12);
    }
}
