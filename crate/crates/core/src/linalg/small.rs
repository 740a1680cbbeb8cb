//! Tiny dense kernels for element-local systems (at most a few dozen unknowns).
//! Matrices are row-major slices.

/// Inverse of the `n x n` matrix `a` by Gauss-Jordan elimination with partial pivoting.
pub fn invert(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i * n + col];
            if f != 0.0 {
                for k in 0..n {
                    m[i * n + k] -= f * m[col * n + k];
                    inv[i * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Some(inv)
}

pub fn mat_vec(n_rows: usize, n_cols: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n_rows)
        .map(|i| a[i * n_cols..(i + 1) * n_cols].iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// Kronecker product `a ⊗ b` of two square matrices.
pub fn kron(na: usize, a: &[f64], nb: usize, b: &[f64]) -> Vec<f64> {
    let n = na * nb;
    let mut out = vec![0.0; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a[i * na + j];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + (j * nb + l)] = aij * b[k * nb + l];
                }
            }
        }
    }
    out
}
