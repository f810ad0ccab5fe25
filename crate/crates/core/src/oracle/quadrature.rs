use crate::error::{Error, Result};

/// Decay orders below this are treated as non-integrable.
const MIN_DECAY: f64 = 1.5;

/// Log-spaced frequency grid with trapezoid weights in `ln w`.
///
/// Weights already include the `1/(2 pi)` normalization and the negative-frequency
/// half, so `sum_k weight_k g(w_k)` approximates `(1/2pi) int_R g(w) dw` for even `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    frequencies: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Head plus tail correction included in `value`.
    pub truncation: f64,
    pub infinite: bool,
}

impl QuadratureGrid {
    pub fn log(points: usize, w_min: f64, w_max: f64) -> Result<Self> {
        if points < 3 || !(w_min > 0.0) || !(w_max > w_min) {
            return Err(Error::InvalidInput("grid needs >= 3 points over 0 < w_min < w_max".into()));
        }
        let (u0, u1) = (w_min.ln(), w_max.ln());
        let h = (u1 - u0) / (points - 1) as f64;
        let frequencies: Vec<f64> = (0..points).map(|k| (u0 + h * k as f64).exp()).collect();
        let weights = frequencies
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let end = if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
                end * h * w / std::f64::consts::PI
            })
            .collect();
        Ok(QuadratureGrid { frequencies, weights })
    }

    /// 2000 points over `[1e-4, 1e4]` rad/s.
    pub fn standard() -> Self {
        Self::log(2000, 1e-4, 1e4).expect("valid defaults")
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Integrates sampled values `g(w_k)` of a nonnegative even integrand.
    pub fn integrate_samples(&self, g: &[f64]) -> Integral {
        let n = self.len();
        debug_assert_eq!(g.len(), n);
        let body: f64 = self.weights.iter().zip(g).map(|(w, v)| w * v).sum();
        let pi = std::f64::consts::PI;
        let head = g[0] * self.frequencies[0] / pi;
        let (wa, wb) = (self.frequencies[n - 2], self.frequencies[n - 1]);
        let (ga, gb) = (g[n - 2], g[n - 1]);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let (tail, infinite) = if gb.abs() <= 1e-300 || gb.abs() <= 1e-15 * scale && ga.abs() <= 1e-15 * scale {
            (0.0, false)
        } else {
            let k = -(gb / ga).ln() / (wb / wa).ln();
            if !(k >= MIN_DECAY) {
                (f64::INFINITY, true)
            } else {
                (gb * wb / (k - 1.0) / pi, false)
            }
        };
        let truncation = head + tail;
        Integral { value: body + truncation, truncation, infinite }
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> Integral {
        let samples: Vec<f64> = self.frequencies.iter().map(|w| g(*w)).collect();
        self.integrate_samples(&samples)
    }
}
