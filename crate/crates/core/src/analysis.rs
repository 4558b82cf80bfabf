//! Achievable rates of two-user power-domain NOMA with successive decoding.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodingOrder {
    User1First,
    User2First,
}

/// Rates summed over subcarriers, in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport {
    pub r1: f64,
    pub r2: f64,
    pub order: DecodingOrder,
}

impl CapacityReport {
    pub fn sum_rate(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// User 1 decoded first, treating user 2 as Gaussian interference; user 2
/// decoded after perfect cancellation:
///
/// `R1 = Σ log2(1 + p1|h1|² / (σ² + p2|h2|²))`, `R2 = Σ log2(1 + p2|h2|² / σ²)`.
///
/// Swap the arguments for the other order.
pub fn capacity_user1_first(p1: f64, p2: f64, h1: &[Complex64], h2: &[Complex64], noise_variance: f64) -> Result<CapacityReport> {
    check_len("user 2 channel", h1.len(), h2.len())?;
    if !(noise_variance > 0.0) {
        return Err(Error::Config(format!("noise variance must be positive, got {noise_variance}")));
    }
    if !(p1 >= 0.0 && p2 >= 0.0) {
        return Err(Error::Config("powers must be non-negative".into()));
    }
    let (mut r1, mut r2) = (0.0, 0.0);
    for (a, b) in h1.iter().zip(h2) {
        let s1 = p1 * a.norm_sqr();
        let s2 = p2 * b.norm_sqr();
        r1 += (s1 / (noise_variance + s2)).ln_1p() / std::f64::consts::LN_2;
        r2 += (s2 / noise_variance).ln_1p() / std::f64::consts::LN_2;
    }
    Ok(CapacityReport {
        r1,
        r2,
        order: DecodingOrder::User1First,
    })
}

/// `Σ log2(1 + (p1|h1|² + p2|h2|²)/σ²)`, the order-independent sum rate.
pub fn sum_capacity(p1: f64, p2: f64, h1: &[Complex64], h2: &[Complex64], noise_variance: f64) -> f64 {
    h1.iter()
        .zip(h2)
        .map(|(a, b)| ((p1 * a.norm_sqr() + p2 * b.norm_sqr()) / noise_variance).ln_1p() / std::f64::consts::LN_2)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(x: f64) -> Vec<Complex64> {
        vec![Complex64::new(x, 0.0)]
    }

    #[test]
    fn closed_form_points() {
        let r = capacity_user1_first(1.0, 0.0, &one(1.0), &one(1.0), 1.0).unwrap();
        assert!((r.r1 - 1.0).abs() < 1e-15);
        let r = capacity_user1_first(1.0, 1.0, &one(1.0), &one(1.0), 1.0).unwrap();
        assert!((r.r1 - 1.5f64.log2()).abs() < 1e-15);
        assert!((r.r1 - 0.58496).abs() < 1e-5);
        assert!((r.r2 - 1.0).abs() < 1e-15);
        let r = capacity_user1_first(0.0, 3.0, &one(1.0), &one(1.0), 1.0).unwrap();
        assert_eq!(r.r1, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(capacity_user1_first(1.0, 1.0, &one(1.0), &one(1.0), 0.0).is_err());
        assert!(capacity_user1_first(1.0, 1.0, &one(1.0), &[], 1.0).is_err());
    }
}
