//! Minimal symmetric tridiagonal system support (Thomas algorithm).

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n-1
/// connecting neighbours.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    #[cfg(test)]
    pub fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        let n = self.len();
        out.clear();
        out.resize(n, 0.0);
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                acc += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        acc
    }

    /// Solve `A x = b` by the Thomas algorithm. Requires a (numerically)
    /// positive definite matrix; the factorization pivots are not checked.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        debug_assert_eq!(b.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.off.first().copied().unwrap_or(0.0) / self.diag[0];
        d[0] = b[0] / self.diag[0];
        for i in 1..n {
            let denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = self.off[i] / denom;
            }
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        let a = SymTridiag {
            diag: vec![4.0, 4.0, 4.0, 4.0],
            off: vec![-1.0, -1.0, -1.0],
        };
        let x_true = [1.0, -2.0, 3.0, 0.5];
        let mut b = Vec::new();
        a.apply(&x_true, &mut b);
        let x = a.solve(&b);
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).abs() < 1e-12);
        }
        let q = a.quadratic_form(&x_true);
        let dot: f64 = b.iter().zip(x_true.iter()).map(|(a, b)| a * b).sum();
        assert!((q - dot).abs() < 1e-12);
    }
}
