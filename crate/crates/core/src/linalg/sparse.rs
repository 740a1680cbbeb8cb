//! Compressed sparse row matrices.

use crate::error::{Error, Result};
use std::io::Write;

/// CSR matrix with strictly increasing column indices per row and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CoeffMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    /// Duplicates are summed in input order, so equal inputs give bit-identical matrices.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 >= nrows || t.1 >= ncols) {
            return Err(Error::Dimension(format!("entry ({i}, {j}) outside a {nrows} x {ncols} matrix")));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut k = 0;
        while k < order.len() {
            let (i, j, _) = triplets[order[k]];
            let mut sum = 0.0;
            while k < order.len() && triplets[order[k]].0 == i && triplets[order[k]].1 == j {
                sum += triplets[order[k]].2;
                k += 1;
            }
            if sum != 0.0 {
                col_idx.push(j);
                values.push(sum);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    /// From a row-major dense array.
    pub fn from_dense(nrows: usize, ncols: usize, a: &[f64]) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let v = a[i * ncols + j];
                if v != 0.0 {
                    m.col_idx.push(j);
                    m.values.push(v);
                }
            }
            m.row_ptr[i + 1] = m.col_idx.len();
        }
        m
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[i * self.ncols + j] = v;
            }
        }
        a
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Dimension(format!("{} columns times a vector of length {}", self.ncols, x.len())));
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// `A^T x`
    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::Dimension(format!("{} rows against a vector of length {}", self.nrows, x.len())));
        }
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// `self * other`
    pub fn matmul(&self, other: &CoeffMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "cannot multiply {} x {} by {} x {}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut acc = vec![0.0; other.ncols];
        let mut seen = vec![false; other.ncols];
        let mut pattern: Vec<usize> = Vec::new();
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            pattern.clear();
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&j, &b) in ocols.iter().zip(ovals) {
                    if !seen[j] {
                        seen[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j] != 0.0 {
                    out.col_idx.push(j);
                    out.values.push(acc[j]);
                }
                acc[j] = 0.0;
                seen[j] = false;
            }
            out.row_ptr[i + 1] = out.col_idx.len();
        }
        Ok(out)
    }

    /// `E^T A E`
    pub fn triple_product(e: &CoeffMatrix, a: &CoeffMatrix) -> Result<Self> {
        if a.nrows != a.ncols || a.ncols != e.nrows {
            return Err(Error::Dimension(format!(
                "triple product needs square A matching E's rows, got A {} x {} and E {} x {}",
                a.nrows, a.ncols, e.nrows, e.ncols
            )));
        }
        e.transpose().matmul(&a.matmul(e)?)
    }

    /// Keeps the listed columns, renumbered in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            if old >= self.ncols {
                return Err(Error::IndexOutOfRange { index: old, len: self.ncols });
            }
            map[old] = new;
        }
        let mut trips = Vec::new();
        for (i, j, v) in self.triplets() {
            if map[j] != usize::MAX {
                trips.push((i, map[j], v));
            }
        }
        Self::from_triplets(self.nrows, cols.len(), &trips)
    }

    /// Keeps the listed rows, renumbered in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(rows.len(), self.ncols);
        for (new, &old) in rows.iter().enumerate() {
            if old >= self.nrows {
                return Err(Error::IndexOutOfRange { index: old, len: self.nrows });
            }
            let (cols, vals) = self.row(old);
            out.col_idx.extend_from_slice(cols);
            out.values.extend_from_slice(vals);
            out.row_ptr[new + 1] = out.col_idx.len();
        }
        Ok(out)
    }

    /// `diag(d) A diag(d)`
    pub fn scale_symmetric(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] *= d[i] * d[self.col_idx[k]];
            }
        }
        out
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.triplets().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max) / scale
    }

    /// MatrixMarket coordinate format, general real.
    pub fn write_matrix_market(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
        let mut c = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                c[i * m + j] = (0..k).map(|l| a[i * k + l] * b[l * m + j]).sum();
            }
        }
        c
    }

    fn sparse_dense(n: usize, m: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => -1.0..1.0f64], n * m)
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = CoeffMatrix::from_triplets(2, 3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 1, -1.0), (1, 0, 3.0), (1, 2, 0.5)])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 2.5);
        assert_eq!(m.row(1).0, &[0, 2]);
        assert!(CoeffMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn triple_product_with_identity() {
        let a = CoeffMatrix::from_dense(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(CoeffMatrix::triple_product(&CoeffMatrix::identity(3), &a).unwrap(), a);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        CoeffMatrix::identity(2).write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1e0\n"));
    }

    proptest! {
        #[test]
        fn triple_product_matches_dense(e in sparse_dense(6, 4), a in sparse_dense(6, 6)) {
            let mut sym = a.clone();
            for i in 0..6 { for j in 0..6 { sym[i * 6 + j] = a[i * 6 + j] + a[j * 6 + i]; } }
            let em = CoeffMatrix::from_dense(6, 4, &e);
            let am = CoeffMatrix::from_dense(6, 6, &sym);
            let r = CoeffMatrix::triple_product(&em, &am).unwrap();
            let mut et = vec![0.0; 24];
            for i in 0..6 { for j in 0..4 { et[j * 6 + i] = e[i * 4 + j]; } }
            let oracle = dense_mul(&et, &dense_mul(&sym, &e, 6, 6, 4), 4, 6, 4);
            let got = r.to_dense();
            for k in 0..16 {
                prop_assert!((got[k] - oracle[k]).abs() < 1e-13);
            }
            prop_assert!(r.asymmetry() < 1e-13);
        }

        #[test]
        fn product_is_associative_on_vectors(a in sparse_dense(5, 7), b in sparse_dense(7, 3), x in prop::collection::vec(-1.0..1.0f64, 3)) {
            let am = CoeffMatrix::from_dense(5, 7, &a);
            let bm = CoeffMatrix::from_dense(7, 3, &b);
            let lhs = am.matmul(&bm).unwrap().matvec(&x).unwrap();
            let rhs = am.matvec(&bm.matvec(&x).unwrap()).unwrap();
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }

        #[test]
        fn transpose_identities(a in sparse_dense(4, 6), x in prop::collection::vec(-1.0..1.0f64, 4)) {
            let am = CoeffMatrix::from_dense(4, 6, &a);
            prop_assert_eq!(am.transpose().transpose(), am.clone());
            let t1 = am.transpose().matvec(&x).unwrap();
            let t2 = am.transpose_matvec(&x).unwrap();
            for (l, r) in t1.iter().zip(&t2) {
                prop_assert!((l - r).abs() < 1e-14);
            }
        }

        #[test]
        fn triple_product_transpose(e in sparse_dense(5, 3), a in sparse_dense(5, 5)) {
            // (E^T A E)^T = E^T A^T E
            let em = CoeffMatrix::from_dense(5, 3, &e);
            let am = CoeffMatrix::from_dense(5, 5, &a);
            let lhs = CoeffMatrix::triple_product(&em, &am).unwrap().transpose().to_dense();
            let rhs = CoeffMatrix::triple_product(&em, &am.transpose()).unwrap().to_dense();
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() < 1e-13);
            }
        }
    }
}
