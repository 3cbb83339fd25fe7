//! Standard normal helpers.
//!
//! `cdf` goes through `libm::erfc` (a port of the musl implementation), accurate
//! to about 1e-16 relative over the whole line, so lower tails keep full precision until
//! the result underflows near `z = -38`. `log_cdf` switches to the asymptotic
//! Mills-ratio series below `z = -30`.

use libm::erfc;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn log_cdf(z: f64) -> f64 {
    if z >= -30.0 {
        return cdf(z).ln();
    }
    log_cdf_tail(z)
}

fn log_cdf_tail(z: f64) -> f64 {
    // Phi(z) = phi(z) / |z| * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 ...)
    let r = 1.0 / (z * z);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * z * z - LN_SQRT_2PI - (-z).ln() + series.ln()
}
