//! Complete elliptic integrals by the arithmetic-geometric mean.
//!
//! Both functions take the *parameter* `m = k²`.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

// c can stall at one ulp; a tighter test would run all 64 rounds and let 2^n c² grow.
const AGM_TOL: f64 = 4.0 * f64::EPSILON;

fn check(m: f64, allow_one: bool) -> Result<()> {
    let ok = m.is_finite() && m >= 0.0 && if allow_one { m <= 1.0 } else { m < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("elliptic parameter m = {m} out of range")))
    }
}

/// Runs the AGM from (1, √(1−m)). Returns the mean and Σ 2^{n−1} c_n², c_0² = m.
fn agm(m: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() <= AGM_TOL * a {
            break;
        }
    }
    (a, sum)
}

/// K(m) = ∫₀^{π/2} (1 − m sin²t)^{−1/2} dt for m in [0, 1).
pub fn elliptic_k(m: f64) -> Result<f64> {
    check(m, false)?;
    Ok(FRAC_PI_2 / agm(m).0)
}

/// E(m) = ∫₀^{π/2} (1 − m sin²t)^{1/2} dt for m in [0, 1].
pub fn elliptic_e(m: f64) -> Result<f64> {
    check(m, true)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    let (a, sum) = agm(m);
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_values() {
        assert_eq!(elliptic_k(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_e(-0.1).is_err());
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K − K K' = π/2
        for &m in &[0.1, 0.3, 0.5, 0.8] {
            let (k, e) = (elliptic_k(m).unwrap(), elliptic_e(m).unwrap());
            let (kp, ep) = (elliptic_k(1.0 - m).unwrap(), elliptic_e(1.0 - m).unwrap());
            assert!((e * kp + ep * k - k * kp - FRAC_PI_2).abs() < 1e-14);
        }
    }
}
