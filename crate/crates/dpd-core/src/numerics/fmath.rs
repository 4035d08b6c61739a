//! Floating-point primitives for `no_std` builds.
//!
//! `core` does not provide the transcendental `f64` methods, so every module
//! routes through these thin [`libm`] wrappers. Keeping them in one place
//! also pins the exact implementations, which matters for bit-reproducible
//! simulation output.

/// Natural exponential `e^x`.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// `ln(1 + x)` accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `e^x − 1` accurate near zero.
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

/// `x^y` for real exponents.
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Absolute value.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Largest integer ≤ x.
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Smallest integer ≥ x.
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Sine.
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// Cosine.
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Natural log of |Γ(x)|.
#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Gamma function Γ(x).
#[inline]
pub fn tgamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Euclidean norm of a slice.
#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in v {
        s += x * x;
    }
    sqrt(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrappers_match_known_values() {
        assert_relative_eq!(exp(1.0), core::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(ln(core::f64::consts::E), 1.0, max_relative = 1e-15);
        assert_relative_eq!(sqrt(2.0), core::f64::consts::SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(powf(2.0, 10.0), 1024.0, max_relative = 1e-15);
        assert_relative_eq!(tgamma(4.0), 6.0, max_relative = 1e-14);
        assert_relative_eq!(lgamma(5.0), ln(24.0), max_relative = 1e-14);
        assert_relative_eq!(erf(0.0), 0.0, epsilon = 1e-300);
        assert_relative_eq!(erfc(0.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn norm2_of_pythagorean_triple() {
        assert_relative_eq!(norm2(&[3.0, 4.0]), 5.0, max_relative = 1e-15);
    }
}
