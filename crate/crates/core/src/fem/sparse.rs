//! Compressed sparse column storage for complex square matrices.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CscMatrix {
    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are summed in
    /// input order, so the result depends only on the triplet sequence.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: equal keys keep their input order
        order.sort_by_key(|&t| (triplets[t].1, triplets[t].0));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::new();
        let mut values: Vec<Complex64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (i, j, v) = triplets[t];
            debug_assert!(i < n && j < n);
            if last == Some((j, i)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(i);
                values.push(v);
                col_ptr[j + 1] += 1;
                last = Some((j, i));
            }
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        CscMatrix { n, col_ptr, row_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let rows = &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]];
        match rows.binary_search(&i) {
            Ok(k) => self.values[self.col_ptr[j] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[Complex64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for (j, &xj) in x.iter().enumerate() {
            let (rows, vals) = self.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                y[i] += a * xj;
            }
        }
        y
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn transpose_defect(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                worst = worst.max((a - self.get(j, i)).norm());
            }
        }
        if scale > 0.0 { worst / scale } else { 0.0 }
    }

    /// `‖A x - b‖₂ / ‖b‖₂`, or `‖A x‖₂` when `b = 0`.
    pub fn relative_residual(&self, x: &[Complex64], b: &[Complex64]) -> f64 {
        let ax = self.mul_vec(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let nb = norm(b);
        if nb > 0.0 { r / nb } else { r }
    }
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
