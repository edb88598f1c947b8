//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm
//! bisection followed by inverse iteration.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

const MAX_INVERSE_ITERS: usize = 12;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Contract(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of the
    /// LDL^T factorisation of `T - sigma I`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * 1e4;
        let mut count = 0;
        let mut d = self.diag[0] - sigma;
        for i in 0.. {
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
            if i + 1 == self.len() {
                break;
            }
            d = (self.diag[i + 1] - sigma) - self.off[i] * self.off[i] / d;
        }
        count
    }

    /// The `k` smallest eigenvalues in ascending order with orthonormal
    /// eigenvectors (Euclidean inner product).
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::Contract(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
        }
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(f64::MIN_POSITIVE);
        let (glo, ghi) = (glo - 1e-12 * span - 1e-300, ghi + 1e-12 * span + 1e-300);

        let values: Vec<f64> = (0..k).map(|j| self.bisect(j, glo, ghi)).collect();

        let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        for j in 0..k {
            let lam = values[j];
            let scale = lam.abs().max(1.0);
            // Vectors whose eigenvalues are close enough that inverse iteration
            // alone does not separate them.
            let cluster: Vec<usize> = (0..j).filter(|&i| (values[i] - lam).abs() < 1e-3 * scale).collect();
            let v = self.inverse_iteration(lam, j, &cluster, &pairs)?;
            pairs.push((lam, v));
        }
        Ok(pairs)
    }

    /// j-th (0-based) smallest eigenvalue, searched in `[lo, hi]`.
    fn bisect(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn inverse_iteration(
        &self,
        lam: f64,
        index: usize,
        cluster: &[usize],
        previous: &[(f64, Vec<f64>)],
    ) -> Result<Vec<f64>> {
        let n = self.len();
        let norm =
            self.diag.iter().map(|d| d.abs()).chain(self.off.iter().map(|o| 2.0 * o.abs())).fold(0.0f64, f64::max);
        // Shift just off the eigenvalue so the factorisation stays regular.
        let shift = lam - 4.0 * f64::EPSILON * lam.abs().max(f64::EPSILON * norm);
        let lu = TridiagLu::factor(self, shift);

        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i * (index + 3)) as f64 * 0.618_034).sin()).collect();
        normalize(&mut x);
        let tol = 1e-12 * norm.max(lam.abs()) + 1e-300;
        let mut last_res = f64::INFINITY;
        for it in 0..MAX_INVERSE_ITERS {
            let mut y = lu.solve(&x);
            for &c in cluster {
                let v = &previous[c].1;
                let dot: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
            }
            if !normalize(&mut y) {
                return Err(Error::Eigensolver(format!(
                    "inverse iteration collapsed for eigenvalue {index} ({lam:.6e})"
                )));
            }
            x = y;
            let ax = self.matvec(&x);
            last_res = ax.iter().zip(&x).map(|(a, v)| (a - lam * v).powi(2)).sum::<f64>().sqrt();
            if it >= 1 && last_res <= tol {
                break;
            }
        }
        if !(last_res <= 1e-8 * norm.max(1.0)) {
            return Err(Error::Eigensolver(format!(
                "eigenvector {index} (value {lam:.6e}) did not converge: residual {last_res:.3e} \
                 after {MAX_INVERSE_ITERS} inverse iterations"
            )));
        }
        // Deterministic sign: first significant component positive.
        let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-3 * big) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(x)
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    true
}

/// LU factorisation of `T - shift I` with partial pivoting (LAPACK `gttrf`
/// layout: `u2` is the second superdiagonal created by row swaps).
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i] == 0.0 { f64::EPSILON * (1.0 + dl[i].abs()) } else { d[i] };
                d[i] = piv;
                let fact = dl[i] / piv;
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * f64::EPSILON;
        }
        Self { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}
