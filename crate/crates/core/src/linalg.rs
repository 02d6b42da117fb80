//! Small banded solvers.

use alloc::vec::Vec;

/// Factorized tridiagonal system `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`
/// (Thomas algorithm without pivoting; callers supply diagonally dominant
/// matrices).
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            let ip = 1.0 / pivot;
            prev = if i + 1 < n { upper[i] * ip } else { 0.0 };
            inv_pivot.push(ip);
            upper_scaled.push(prev);
        }
        Self { lower: lower.to_vec(), inv_pivot, upper_scaled }
    }

    /// Solve in place.
    pub(crate) fn solve(&self, d: &mut [f64]) {
        let n = d.len();
        let mut prev = 0.0;
        for i in 0..n {
            let v = (d[i] - if i > 0 { self.lower[i] * prev } else { 0.0 }) * self.inv_pivot[i];
            d[i] = v;
            prev = v;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= self.upper_scaled[i] * d[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_known_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3, 5, 3] → x = [1, 1, 1]
        let t = Tridiagonal::new(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0]);
        let mut d = [3.0, 5.0, 3.0];
        t.solve(&mut d);
        for v in d {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
