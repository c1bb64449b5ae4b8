use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::cyclotomic::CycNumber;
use super::scaled::ScaledCyc;

/// A complex approximation with an absolute error bound on each coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexApprox {
    pub re: f64,
    pub im: f64,
    pub err: f64,
}

impl ComplexApprox {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn render(&self, digits: usize) -> String {
        format!("({:.*}, {:.*})", digits, self.re, digits, self.im)
    }
}

/// Fixed-point numbers with `bits` fractional bits.
struct Fixed {
    bits: u32,
}

impl Fixed {
    fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    fn atan_inv(&self, x: u64) -> BigInt {
        // atan(1/x) = sum (-1)^k / ((2k+1) x^(2k+1))
        let x2 = BigInt::from(x * x);
        let mut power = self.one() / BigInt::from(x);
        let mut sum = BigInt::zero();
        let mut k = 0u64;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &x2;
            k += 1;
        }
        sum
    }

    fn pi(&self) -> BigInt {
        self.atan_inv(5) * 16 - self.atan_inv(239) * 4
    }

    fn cos_sin(&self, theta: &BigInt) -> (BigInt, BigInt) {
        let mut cos = BigInt::zero();
        let mut sin = BigInt::zero();
        let mut term = self.one();
        let mut n = 0u64;
        while !term.is_zero() {
            match n % 4 {
                0 => cos += &term,
                1 => sin += &term,
                2 => cos -= &term,
                _ => sin -= &term,
            }
            n += 1;
            term = self.mul(&term, theta) / BigInt::from(n);
        }
        (cos, sin)
    }

    fn sqrt(&self, q: u64) -> BigInt {
        (BigInt::from(q) << (2 * self.bits)).sqrt()
    }
}

fn to_f64(x: &BigInt, bits: u32) -> f64 {
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi(shift as i32 - bits as i32)
}

/// Evaluates `num` at `exp(2 pi i / M)` and scales by `q^(qhalf/2)`.
pub fn embed_complex(a: &ScaledCyc, precision_bits: u32) -> ComplexApprox {
    assert!(precision_bits >= 64, "embedding precision below 64 bits");
    let num: &CycNumber = a.num();
    let m = num.modulus();
    let coeffs = num.coeffs();
    let guard = 32 + (coeffs.len().max(2) as f64).log2().ceil() as u32;
    let fx = Fixed { bits: precision_bits + guard };
    let theta = fx.pi() * 2 / BigInt::from(m);
    let (c, s) = fx.cos_sin(&theta);

    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let mut pr = fx.one();
    let mut pi = BigInt::zero();
    // each step of the running power adds a few units in the last place
    let mut ulps = 0f64;
    let mut total_ulps = 0f64;
    for (j, coeff) in coeffs.iter().enumerate() {
        if !coeff.is_zero() {
            re += coeff * &pr;
            im += coeff * &pi;
            total_ulps += coeff.abs().to_f64().unwrap_or(f64::INFINITY) * (ulps + 8.0);
        }
        let nr = fx.mul(&pr, &c) - fx.mul(&pi, &s);
        let ni = fx.mul(&pr, &s) + fx.mul(&pi, &c);
        pr = nr;
        pi = ni;
        ulps += 8.0 + 4.0 * j as f64;
    }

    let half = a.qhalf();
    let q = a.q();
    let mut scale = fx.one();
    let mut scale_ulps = 0f64;
    if half != 0 && q > 1 {
        let whole = BigInt::from(q).pow((half.unsigned_abs() / 2) as u32);
        if half > 0 {
            scale *= &whole;
        } else {
            scale = scale / &whole;
            scale_ulps += 1.0;
        }
        if half.rem_euclid(2) == 1 {
            let r = fx.sqrt(q);
            scale = if half > 0 { fx.mul(&scale, &r) } else { (&scale << fx.bits) / r };
            scale_ulps += 4.0;
        }
    }
    let re_s = fx.mul(&re, &scale);
    let im_s = fx.mul(&im, &scale);
    let scale_f = to_f64(&scale, fx.bits).abs();
    let re_f = to_f64(&re_s, fx.bits);
    let im_f = to_f64(&im_s, fx.bits);
    let ulp = 2f64.powi(-(fx.bits as i32));
    let bound_abs = num.l1_norm();
    let err = ulp * (total_ulps * (scale_f + 1.0) + bound_abs * scale_ulps + 2.0)
        + f64::EPSILON * (re_f.abs().max(im_f.abs()));
    ComplexApprox { re: re_f, im: im_f, err }
}

/// Sign of the real part of `num`, or `None` if it cannot be certified at the given precision.
pub fn certified_real_sign(num: &CycNumber, precision_bits: u32) -> Option<i32> {
    let z = embed_complex(&ScaledCyc::new(num.clone(), 0, 1), precision_bits);
    if z.re > z.err {
        Some(1)
    } else if z.re < -z.err {
        Some(-1)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(num: CycNumber, qhalf: i64, q: u64) -> ScaledCyc {
        ScaledCyc::new(num, qhalf, q)
    }

    #[test]
    fn i_is_zeta4() {
        let z = embed_complex(&sc(CycNumber::root(4, 1), 0, 1), 128);
        assert!(z.re.abs() < 1e-15 && (z.im - 1.0).abs() < 1e-15);
        assert!(z.err < 1e-15);
    }

    #[test]
    fn seven() {
        let z = embed_complex(&sc(CycNumber::one(), 2, 7), 64);
        assert!((z.re - 7.0).abs() < 1e-12 && z.im.abs() < 1e-12);
        let z = embed_complex(&sc(CycNumber::one(), -1, 7), 64);
        assert!((z.re - 1.0 / 7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_gauss_sum_modulus() {
        let counts: Vec<i64> = (0..7i64)
            .map(|a| match a {
                0 => 0,
                1 | 2 | 4 => 1,
                _ => -1,
            })
            .collect();
        let g = CycNumber::from_counts(7, &counts);
        let z = embed_complex(&sc(g, 0, 7), 128);
        assert!((z.abs() - 7f64.sqrt()).abs() < 1e-9);
        // 7 = 3 mod 4, so the Gauss sum is i sqrt 7
        assert!((z.im - 7f64.sqrt()).abs() < 1e-9);
    }
}
