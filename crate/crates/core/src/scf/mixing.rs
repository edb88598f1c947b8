use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mixing {
    Simple {
        beta: f64,
    },
    /// Pulay/Anderson extrapolation over the last `depth` iterates.
    Anderson {
        beta: f64,
        depth: usize,
    },
}

impl Default for Mixing {
    fn default() -> Self {
        Mixing::Simple { beta: 0.3 }
    }
}

impl Mixing {
    pub fn beta(&self) -> f64 {
        match *self {
            Mixing::Simple { beta } | Mixing::Anderson { beta, .. } => beta,
        }
    }
}

/// Stateful density mixer. Inner products use the supplied quadrature weights.
pub(crate) struct Mixer {
    mode: Mixing,
    weights: Vec<f64>,
    inputs: Vec<Vec<f64>>,
    residuals: Vec<Vec<f64>>,
    last_norm: f64,
}

impl Mixer {
    pub(crate) fn new(mode: Mixing, weights: &[f64]) -> Self {
        Self { mode, weights: weights.to_vec(), inputs: Vec::new(), residuals: Vec::new(), last_norm: f64::INFINITY }
    }

    pub(crate) fn next(&mut self, input: &[f64], output: &[f64]) -> Vec<f64> {
        let beta = self.mode.beta();
        let residual: Vec<f64> = output.iter().zip(input).map(|(o, i)| o - i).collect();
        let depth = match self.mode {
            Mixing::Simple { .. } => {
                return input.iter().zip(&residual).map(|(i, r)| i + beta * r).collect();
            }
            Mixing::Anderson { depth, .. } => depth.max(1),
        };
        // Restart from a plain linear step whenever the residual grows.
        let norm = self.dot(&residual, &residual).sqrt();
        let grew = norm > self.last_norm;
        self.last_norm = norm;
        if grew {
            self.inputs.clear();
            self.residuals.clear();
        }
        self.inputs.push(input.to_vec());
        self.residuals.push(residual);
        if self.inputs.len() > depth {
            self.inputs.remove(0);
            self.residuals.remove(0);
        }
        let m = self.inputs.len();
        let coeffs = self.pulay_coefficients().unwrap_or_else(|| {
            let mut c = vec![0.0; m];
            c[m - 1] = 1.0;
            c
        });
        let n = input.len();
        let mut out = vec![0.0; n];
        for (c, (x, f)) in coeffs.iter().zip(self.inputs.iter().zip(&self.residuals)) {
            for k in 0..n {
                out[k] += c * (x[k] + beta * f[k]);
            }
        }
        out.iter_mut().for_each(|v| *v = v.max(0.0));
        out
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    /// Solves `[B 1; 1^T 0] [c; mu] = [0; 1]`.
    fn pulay_coefficients(&self) -> Option<Vec<f64>> {
        let m = self.residuals.len();
        let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = self.dot(&self.residuals[i], &self.residuals[j]);
            }
        }
        let scale = (0..m).map(|i| a[(i, i)]).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return None;
        }
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] /= scale;
            }
            a[(i, m)] = 1.0;
            a[(m, i)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m + 1);
        rhs[m] = 1.0;
        let x = a.lu().solve(&rhs)?;
        let c: Vec<f64> = x.iter().take(m).copied().collect();
        c.iter().all(|v| v.is_finite()).then_some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_mixing_is_linear() {
        let mut m = Mixer::new(Mixing::Simple { beta: 0.25 }, &[1.0, 1.0]);
        assert_eq!(m.next(&[1.0, 2.0], &[3.0, 2.0]), vec![1.5, 2.0]);
    }

    #[test]
    fn anderson_solves_a_linear_fixed_point() {
        // x = A x + b with a contraction A; Anderson should converge quickly.
        let a = [[0.6, 0.2], [0.1, 0.7]];
        let b = [1.0, 0.5];
        let g = |x: &[f64]| vec![a[0][0] * x[0] + a[0][1] * x[1] + b[0], a[1][0] * x[0] + a[1][1] * x[1] + b[1]];
        let mut mixer = Mixer::new(Mixing::Anderson { beta: 0.5, depth: 4 }, &[1.0, 1.0]);
        let mut x = vec![0.0, 0.0];
        for _ in 0..25 {
            let out = g(&x);
            x = mixer.next(&x, &out);
        }
        let fx = g(&x);
        assert!((fx[0] - x[0]).abs() < 1e-10 && (fx[1] - x[1]).abs() < 1e-10);
    }
}
