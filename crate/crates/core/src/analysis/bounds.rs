//! Closed-form competitive-ratio bounds, exact where the inputs are integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn check_costs(r: u64, w: u64) -> Result<()> {
    if r == 0 || r >= w {
        return Err(Error::InvalidParams(format!(
            "need 0 < r < w, got r = {r}, w = {w}"
        )));
    }
    Ok(())
}

/// `w / r`: no deterministic algorithm with little memory beats this.
pub fn bound_c1(r: u64, w: u64) -> Result<BigRational> {
    check_costs(r, w)?;
    Ok(BigRational::new(BigInt::from(w), BigInt::from(r)))
}

/// `2^-z + (1 - 2^-z) w / r`: the guessing bound.
pub fn bound_c2(z: usize, r: u64, w: u64) -> Result<BigRational> {
    check_costs(r, w)?;
    if z == 0 {
        return Err(Error::InvalidParams("z must be at least 1".into()));
    }
    let half_z = BigRational::new(BigInt::one(), BigInt::one() << z);
    Ok(half_z.clone() + (BigRational::one() - half_z) * bound_c1(r, w)?)
}

/// `(0.5 (1 - ε)^(z-1) (r - w) + w) / r` for an exact rational `ε`.
pub fn bound_quantum_exact(eps: &BigRational, z: usize, r: u64, w: u64) -> Result<BigRational> {
    check_costs(r, w)?;
    if z == 0 {
        return Err(Error::InvalidParams("z must be at least 1".into()));
    }
    if eps < &BigRational::zero() || eps >= &BigRational::new(BigInt::one(), BigInt::from(2)) {
        return Err(Error::InvalidParams(format!(
            "error rate {eps} must lie in [0, 1/2)"
        )));
    }
    let keep = num_traits::pow(BigRational::one() - eps, z - 1);
    let diff = int(r) - int(w);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok((half * keep * diff + int(w)) / int(r))
}

/// Floating-point form of [`bound_quantum_exact`].
pub fn bound_quantum(eps: f64, z: usize, r: u64, w: u64) -> Result<f64> {
    let exact = BigRational::from_float(eps)
        .ok_or_else(|| Error::InvalidParams(format!("error rate {eps} is not finite")))?;
    bound_quantum_exact(&exact, z, r, w).map(|b| to_f64(&b))
}

/// `(⌊(t+1)/2⌋ w + (t - ⌊(t+1)/2⌋) r) / (t r)`: deterministic algorithms with
/// unlimited memory.
pub fn bound_det_unbounded(t: usize, r: u64, w: u64) -> Result<BigRational> {
    check_costs(r, w)?;
    if t == 0 {
        return Err(Error::InvalidParams("t must be at least 1".into()));
    }
    let bad = (t as u64).div_ceil(2);
    let good = t as u64 - bad;
    Ok((int(bad) * int(w) + int(good) * int(r)) / (int(t as u64) * int(r)))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// All four bounds for one parameter set, as floats.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BoundSet {
    pub c1: f64,
    pub c2: f64,
    pub cq: f64,
    pub c_det_unbounded: f64,
}

impl BoundSet {
    pub fn evaluate(z: usize, t: usize, r: u64, w: u64, eps: f64) -> Result<Self> {
        Ok(BoundSet {
            c1: to_f64(&bound_c1(r, w)?),
            c2: to_f64(&bound_c2(z, r, w)?),
            cq: bound_quantum(eps, z, r, w)?,
            c_det_unbounded: to_f64(&bound_det_unbounded(t, r, w)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn c1_values() {
        assert_eq!(bound_c1(1, 3).unwrap(), ratio(3, 1));
        assert!(bound_c1(1, 5).unwrap() > bound_c1(1, 4).unwrap());
        assert!(bound_c1(2, 2).is_err());
    }

    #[test]
    fn c2_values() {
        assert_eq!(bound_c2(1, 1, 3).unwrap(), ratio(2, 1));
        assert_eq!(bound_c2(4, 1, 3).unwrap(), ratio(23, 8));
        assert_eq!(to_f64(&bound_c2(4, 1, 3).unwrap()), 2.875);
        // Approaches w / r.
        assert!((to_f64(&bound_c2(60, 1, 3).unwrap()) - 3.0).abs() < 1e-15);
        assert!(bound_c2(0, 1, 3).is_err());
    }

    #[test]
    fn quantum_values() {
        for z in 1..6 {
            assert_eq!(
                bound_quantum_exact(&BigRational::zero(), z, 1, 3).unwrap(),
                ratio(2, 1)
            );
        }
        assert_eq!(
            bound_quantum_exact(&ratio(1, 4), 2, 1, 3).unwrap(),
            ratio(9, 4)
        );
        assert!((bound_quantum(0.25, 2, 1, 3).unwrap() - 2.25).abs() < 1e-15);
        assert!(bound_quantum(0.5, 2, 1, 3).is_err());
        // Separation chain at z = 3.
        let cq = bound_quantum_exact(&BigRational::zero(), 3, 1, 3).unwrap();
        assert!(cq < bound_c2(3, 1, 3).unwrap());
        assert_eq!(bound_c2(3, 1, 3).unwrap(), ratio(11, 4));
        assert!(bound_c2(3, 1, 3).unwrap() < bound_c1(1, 3).unwrap());
    }

    #[test]
    fn det_unbounded_values() {
        assert_eq!(bound_det_unbounded(1, 1, 3).unwrap(), ratio(3, 1));
        assert_eq!(bound_det_unbounded(2, 1, 3).unwrap(), ratio(2, 1));
        // t = 3: two bad blocks; t = 4: two bad blocks.
        assert_eq!(bound_det_unbounded(3, 1, 3).unwrap(), ratio(7, 3));
        assert_eq!(bound_det_unbounded(4, 1, 3).unwrap(), ratio(8, 4));
        assert_eq!(bound_det_unbounded(5, 1, 3).unwrap(), ratio(11, 5));
    }

    proptest! {
        #[test]
        fn separation_for_exact_algorithms(z in 2usize..20, r in 1u64..10, extra in 1u64..10) {
            let w = r + extra;
            let cq = bound_quantum_exact(&BigRational::zero(), z, r, w).unwrap();
            let c2 = bound_c2(z, r, w).unwrap();
            let c1 = bound_c1(r, w).unwrap();
            prop_assert!(cq < c2 && c2 < c1);
        }

        #[test]
        fn quantum_bound_stays_in_range(eps in 0.0f64..0.5, z in 1usize..12) {
            let c = bound_quantum(eps, z, 1, 3).unwrap();
            prop_assert!((2.0 - 1e-12..=3.0).contains(&c));
        }
    }
}
