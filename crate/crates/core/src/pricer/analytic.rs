use statrs::distribution::{ContinuousCDF, Normal};

/// Closed-form European value under constant rate `r`, drift `μ` (carry,
/// so the dividend yield is `r − μ`) and volatility `σ`.
pub fn black_scholes(is_call: bool, spot: f64, strike: f64, rate: f64, drift: f64, vol: f64, maturity: f64) -> f64 {
    let discount = (-rate * maturity).exp();
    let forward = spot * (drift * maturity).exp();
    let stddev = vol * maturity.sqrt();
    if stddev <= 0.0 {
        let intrinsic = if is_call { forward - strike } else { strike - forward };
        return discount * intrinsic.max(0.0);
    }
    let n = Normal::standard();
    let d1 = ((forward / strike).ln() + 0.5 * stddev * stddev) / stddev;
    let d2 = d1 - stddev;
    if is_call {
        discount * (forward * n.cdf(d1) - strike * n.cdf(d2))
    } else {
        discount * (strike * n.cdf(-d2) - forward * n.cdf(-d1))
    }
}
