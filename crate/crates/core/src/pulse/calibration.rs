use std::f64::consts::PI;

/// Truncated Gaussian `A(t) = Ω0·exp(−(t − T/2)² / (2σ²))` on `[0, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnvelope {
    pub duration: f64,
    pub sigma: f64,
    pub peak: f64,
}

impl GaussianEnvelope {
    /// Envelope with `σ = T/4` whose area is exactly `π/2`.
    pub fn pi_half(duration: f64) -> Self {
        Self { duration, sigma: duration / 4.0, peak: calibrate_pi2_amplitude(duration) }
    }

    /// Value at `t` measured from the pulse start; zero outside the window.
    pub fn value(&self, t: f64) -> f64 {
        if !(0.0..self.duration).contains(&t) {
            return 0.0;
        }
        let x = t - self.duration / 2.0;
        self.peak * (-x * x / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Closed-form area over the window.
    pub fn area(&self) -> f64 {
        self.peak * self.sigma * (2.0 * PI).sqrt() * libm::erf(self.duration / (2.0 * self.sigma * std::f64::consts::SQRT_2))
    }
}

/// Peak amplitude of a `σ = T/4` truncated Gaussian with rotation area π/2:
/// `Ω0 = (π/2) / (σ·√(2π)·erf(T / (2σ√2)))`.
pub fn calibrate_pi2_amplitude(duration: f64) -> f64 {
    assert!(duration > 0.0, "pulse duration must be positive");
    let sigma = duration / 4.0;
    (PI / 2.0) / (sigma * (2.0 * PI).sqrt() * libm::erf(duration / (2.0 * sigma * std::f64::consts::SQRT_2)))
}
