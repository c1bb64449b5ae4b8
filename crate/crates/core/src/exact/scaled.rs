use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::cyclotomic::CycNumber;
use super::embed::certified_real_sign;
use super::root::Root;
use crate::error::{Error, Result};

/// Precision used to settle the sign when two values differ by an odd power of `q^(1/2)`.
const SIGN_BITS: u32 = 192;

/// `num * q^(qhalf/2)` with `num` a cyclotomic integer.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct ScaledCyc {
    num: CycNumber,
    qhalf: i64,
    q: u64,
}

impl ScaledCyc {
    pub fn new(num: CycNumber, qhalf: i64, q: u64) -> ScaledCyc {
        assert!(q >= 1);
        ScaledCyc { num, qhalf, q }
    }

    pub fn one(q: u64) -> ScaledCyc {
        ScaledCyc::new(CycNumber::one(), 0, q)
    }

    pub fn from_root(r: &Root, q: u64) -> ScaledCyc {
        ScaledCyc::new(CycNumber::from_root(r), 0, q)
    }

    pub fn num(&self) -> &CycNumber {
        &self.num
    }

    pub fn qhalf(&self) -> i64 {
        self.qhalf
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn check_q(&self, other: &ScaledCyc) -> Result<u64> {
        if self.q == other.q || other.qhalf == 0 || other.q == 1 {
            Ok(self.q)
        } else if self.qhalf == 0 || self.q == 1 {
            Ok(other.q)
        } else {
            Err(Error::FieldMismatch(format!("scaled values over q = {} and q = {}", self.q, other.q)))
        }
    }

    /// Moves even powers of `q^(1/2)` into `num` so that `qhalf` becomes 0 or 1
    /// when it is non-negative, and removes factors of `q` from `num` while `qhalf` is negative.
    pub fn normalize(&self) -> ScaledCyc {
        let mut num = self.num.normalize();
        let mut qhalf = self.qhalf;
        if self.q == 1 || num.is_zero() {
            return ScaledCyc { num, qhalf: 0, q: self.q };
        }
        let q = BigInt::from(self.q);
        while qhalf >= 2 {
            num = num.scale(&q);
            qhalf -= 2;
        }
        while qhalf < 0 {
            match num.div_exact(&q) {
                Some(n) => {
                    num = n;
                    qhalf += 2;
                }
                None => break,
            }
        }
        ScaledCyc { num, qhalf, q: self.q }
    }

    pub fn mul(&self, other: &ScaledCyc) -> Result<ScaledCyc> {
        let q = self.check_q(other)?;
        Ok(ScaledCyc { num: self.num.mul(&other.num)?, qhalf: self.qhalf + other.qhalf, q })
    }

    pub fn mul_root(&self, r: &Root) -> Result<ScaledCyc> {
        Ok(ScaledCyc { num: self.num.mul_root(r)?, qhalf: self.qhalf, q: self.q })
    }

    pub fn conj(&self) -> ScaledCyc {
        ScaledCyc { num: self.num.conj(), qhalf: self.qhalf, q: self.q }
    }

    pub fn pow(&self, k: u32) -> Result<ScaledCyc> {
        let mut acc = ScaledCyc::one(self.q);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Exact quotient. Requires `other * conj(other)` to be `±q^j` times a rational integer dividing `self * conj(other)`.
    pub fn div(&self, other: &ScaledCyc) -> Result<ScaledCyc> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let q = self.check_q(other)?;
        let norm = other.num.mul(&other.num.conj())?.as_integer().ok_or(Error::NotInvertible)?;
        let mut numer = self.num.mul(&other.num.conj())?;
        let mut qhalf = self.qhalf - other.qhalf;
        let mut rest = norm;
        let qb = BigInt::from(q);
        if q > 1 {
            while (&rest % &qb).is_zero() && !rest.is_zero() {
                rest /= &qb;
                qhalf -= 2;
            }
        }
        if !rest.abs().is_one() {
            numer = numer.div_exact(&rest).ok_or(Error::NotInvertible)?;
        } else if rest.is_negative() {
            numer = numer.neg();
        }
        Ok(ScaledCyc { num: numer, qhalf, q }.normalize())
    }

    pub fn inv(&self) -> Result<ScaledCyc> {
        ScaledCyc::one(self.q).div(self)
    }

    /// Exact equality; for differing `qhalf` parity, squares are compared and the sign is settled numerically.
    pub fn eq_exact(&self, other: &ScaledCyc) -> Result<bool> {
        let q = self.check_q(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.is_zero() && other.is_zero());
        }
        let qb = BigInt::from(q);
        let d = self.qhalf - other.qhalf;
        if q == 1 || d.rem_euclid(2) == 0 {
            let (mut a, mut b) = (self.num.clone(), other.num.clone());
            let k = (d.unsigned_abs() / 2) as u32;
            if q > 1 {
                if d > 0 {
                    a = a.scale(&qb.pow(k));
                } else {
                    b = b.scale(&qb.pow(k));
                }
            }
            return a.eq_exact(&b);
        }
        let sa = self.mul(self)?;
        let sb = other.mul(other)?;
        if !sa.eq_exact(&sb)? {
            return Ok(false);
        }
        // self = ±other; the sign of self * conj(other) decides
        let prod = self.num.mul(&other.num.conj())?;
        match certified_real_sign(&prod, SIGN_BITS) {
            Some(s) => Ok(s > 0),
            None => Err(Error::PrecisionLoss("sign of a scaled cyclotomic value".into())),
        }
    }

    /// The value as a root of unity, if it is one.
    pub fn as_root(&self) -> Option<Root> {
        let n = self.normalize();
        if n.qhalf != 0 {
            return None;
        }
        let m = n.num.modulus() * if n.num.modulus() % 2 == 0 { 1 } else { 2 };
        for k in 0..m {
            let r = Root::new(k as i128, m);
            if CycNumber::from_root(&r).eq_exact(&n.num).ok()? {
                return Some(r);
            }
        }
        None
    }

    pub fn zero(q: u64) -> ScaledCyc {
        ScaledCyc::new(CycNumber::zero(1), 0, q)
    }

    /// Largest absolute coefficient of the numerator, a crude size indicator.
    pub fn height(&self) -> BigInt {
        let h = self.num.max_abs_coeff();
        if h.is_zero() {
            BigInt::zero()
        } else {
            h
        }
    }
}

impl fmt::Debug for ScaledCyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) * {}^({}/2)", self.num, self.q, self.qhalf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_by_gauss_sum() {
        let counts: Vec<i64> = (0..7i64)
            .map(|a| match a {
                0 => 0,
                1 | 2 | 4 => 1,
                _ => -1,
            })
            .collect();
        let g = ScaledCyc::new(CycNumber::from_counts(7, &counts), -1, 7);
        let one = g.div(&g).unwrap();
        assert!(one.eq_exact(&ScaledCyc::one(7)).unwrap());
        let inv = g.inv().unwrap();
        assert!(inv.mul(&g).unwrap().eq_exact(&ScaledCyc::one(7)).unwrap());
    }

    #[test]
    fn parity_mismatch() {
        // sqrt(7)^2 * i^2 = -7: the normalized Gauss sum squared
        let counts: Vec<i64> = (0..7i64)
            .map(|a| match a {
                0 => 0,
                1 | 2 | 4 => 1,
                _ => -1,
            })
            .collect();
        let g = ScaledCyc::new(CycNumber::from_counts(7, &counts), 0, 7);
        let i_sqrt7 = ScaledCyc::new(CycNumber::root(4, 1), 1, 7);
        assert!(g.eq_exact(&i_sqrt7).unwrap());
        assert!(!g.eq_exact(&i_sqrt7.mul(&ScaledCyc::new(CycNumber::from_int(-1), 0, 7)).unwrap()).unwrap());
    }

    #[test]
    fn normalize_absorbs_q() {
        let a = ScaledCyc::new(CycNumber::from_int(49), -3, 7).normalize();
        assert_eq!(a.qhalf(), 1);
        assert_eq!(a.num().as_integer(), Some(BigInt::from(1)));
    }
}
