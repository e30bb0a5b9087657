use crate::error::{Error, Result};

/// The three smoothing parameters of problem (P); all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub gamma: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl SmoothingParams {
    pub fn new(gamma: f64, tau: f64, epsilon: f64) -> Result<Self> {
        let prm = Self {
            gamma,
            tau,
            epsilon,
        };
        prm.validate()?;
        Ok(prm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("tau", self.tau),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `psi(y, tau) = (y + sqrt(y^2 + tau^2)) / 2`, a smooth upper bound of
/// `max(0, y)` that exceeds it by at most `tau / 2`.
#[inline]
pub fn psi(y: f64, tau: f64) -> f64 {
    let r = (y * y + tau * tau).sqrt();
    if y >= 0.0 {
        0.5 * (y + r)
    } else {
        // rationalised to avoid cancellation for large negative y
        0.5 * tau * tau / (r - y)
    }
}

/// `d psi / dy = (1 + y / sqrt(y^2 + tau^2)) / 2`, in `(0, 1)` for `tau > 0`.
#[inline]
pub fn psi_prime(y: f64, tau: f64) -> f64 {
    let r = (y * y + tau * tau).sqrt();
    if y >= 0.0 {
        0.5 * (1.0 + y / r)
    } else {
        0.5 * tau * tau / (r * (r - y))
    }
}

/// Squared smoothed distance `||x - g||^2 + gamma^2`.
#[inline]
pub fn theta_sq(x: &[f64], g: &[f64], gamma: f64) -> f64 {
    crate::data::squared_distance(x, g) + gamma * gamma
}

/// Smoothed Euclidean distance `sqrt(||x - g||^2 + gamma^2)`.
pub fn theta(x: &[f64], g: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch {
            pair: "theta arguments",
            left: x.len(),
            right: g.len(),
        });
    }
    Ok(theta_sq(x, g, gamma).sqrt())
}
