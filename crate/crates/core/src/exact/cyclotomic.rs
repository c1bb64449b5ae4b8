use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::root::Root;
use crate::error::{Error, Result};

/// Largest root-of-unity order a [`CycNumber`] may be lifted to.
pub const MAX_MODULUS: u64 = 1 << 22;

/// An element of `Z[zeta_M]` in the power basis `1, zeta, ..., zeta^(phi(M)-1)`,
/// reduced modulo the `M`-th cyclotomic polynomial.
#[derive(Clone, PartialEq, Eq)]
pub struct CycNumber {
    modulus: u64,
    coeffs: Vec<BigInt>,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn modinv(a: u64, m: u64) -> u64 {
    if m <= 1 {
        return 0;
    }
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, m as i128, a as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(m as i128) as u64
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n).iter().fold(n, |acc, p| acc / p * (p - 1))
}

/// Exact division of `num` by the monic polynomial `den` (coefficients lowest first).
fn div_monic(num: &[i128], den: &[i128]) -> Vec<i128> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i128; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (k, d) in den.iter().enumerate() {
                rem[i + k] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| *c == 0), "inexact cyclotomic division");
    q
}

/// Dense coefficients of the `n`-th cyclotomic polynomial for squarefree `n`.
fn cyclotomic_squarefree(n: u64) -> Vec<i128> {
    let mut poly = vec![-1i128, 1];
    let mut m = 1u64;
    for p in prime_factors(n) {
        // Phi_{mp}(x) = Phi_m(x^p) / Phi_m(x) for p not dividing m
        let mut stretched = vec![0i128; (poly.len() - 1) * p as usize + 1];
        for (i, c) in poly.iter().enumerate() {
            stretched[i * p as usize] = *c;
        }
        poly = div_monic(&stretched, &poly);
        m *= p;
    }
    debug_assert_eq!(m, n);
    poly
}

/// Nonzero terms `(degree, coefficient)` of the `m`-th cyclotomic polynomial.
pub fn cyclotomic_terms(m: u64) -> Vec<(usize, i64)> {
    let rad: u64 = prime_factors(m).iter().product();
    let stretch = (m / rad) as usize;
    cyclotomic_squarefree(rad)
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(i, c)| (i * stretch, *c as i64))
        .collect()
}

/// Reduces a dense exponent vector of length `m` (coefficient of `zeta^j` at index `j`)
/// to the canonical power-basis representation.
fn reduce_dense(m: u64, mut dense: Vec<BigInt>) -> Vec<BigInt> {
    let terms = cyclotomic_terms(m);
    let deg = terms.last().map(|t| t.0).unwrap_or(0);
    for top in (deg..dense.len()).rev() {
        if dense[top].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut dense[top]);
        for &(k, a) in &terms[..terms.len() - 1] {
            dense[top - deg + k] -= &c * a;
        }
    }
    dense.truncate(deg);
    dense.resize(deg, BigInt::zero());
    dense
}

fn checked_lcm(a: u64, b: u64) -> Result<u64> {
    let l = a.lcm(&b);
    if l > MAX_MODULUS {
        return Err(Error::CapacityExceeded(format!("cyclotomic modulus {} exceeds {}", l, MAX_MODULUS)));
    }
    Ok(l)
}

impl CycNumber {
    pub fn zero(modulus: u64) -> CycNumber {
        assert!(modulus >= 1);
        CycNumber { modulus, coeffs: vec![BigInt::zero(); euler_phi(modulus) as usize] }
    }

    pub fn one() -> CycNumber {
        CycNumber::from_int(1)
    }

    pub fn from_int(n: i64) -> CycNumber {
        CycNumber { modulus: 1, coeffs: vec![BigInt::from(n)] }
    }

    /// `zeta_M^k` in canonical form.
    pub fn root(modulus: u64, k: i64) -> CycNumber {
        assert!(modulus >= 1);
        let mut counts = vec![0i64; modulus as usize];
        counts[k.rem_euclid(modulus as i64) as usize] = 1;
        CycNumber::from_counts(modulus, &counts)
    }

    pub fn from_root(r: &Root) -> CycNumber {
        CycNumber::root(r.order(), r.num() as i64)
    }

    /// Builds `sum_j counts[j] zeta_M^j` from an exponent histogram of length `M`.
    pub fn from_counts(modulus: u64, counts: &[i64]) -> CycNumber {
        assert_eq!(counts.len() as u64, modulus);
        let dense = counts.iter().map(|c| BigInt::from(*c)).collect();
        CycNumber { modulus, coeffs: reduce_dense(modulus, dense) }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational integer this number equals, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs.first().cloned().unwrap_or_default())
        } else {
            None
        }
    }

    /// Re-expresses this number in `Z[zeta_target]`; `target` must be a multiple of the modulus.
    pub fn lift(&self, target: u64) -> Result<CycNumber> {
        if target % self.modulus != 0 {
            return Err(Error::CapacityExceeded(format!("{} does not divide {}", self.modulus, target)));
        }
        if target > MAX_MODULUS {
            return Err(Error::CapacityExceeded(format!("cyclotomic modulus {} exceeds {}", target, MAX_MODULUS)));
        }
        if target == self.modulus {
            return Ok(self.clone());
        }
        let step = (target / self.modulus) as usize;
        let mut dense = vec![BigInt::zero(); target as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            dense[j * step] = c.clone();
        }
        Ok(CycNumber { modulus: target, coeffs: reduce_dense(target, dense) })
    }

    fn common(&self, other: &CycNumber) -> Result<(CycNumber, CycNumber)> {
        let l = checked_lcm(self.modulus, other.modulus)?;
        Ok((self.lift(l)?, other.lift(l)?))
    }

    pub fn add(&self, other: &CycNumber) -> Result<CycNumber> {
        let (mut a, b) = self.common(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        Ok(a)
    }

    pub fn neg(&self) -> CycNumber {
        CycNumber { modulus: self.modulus, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &CycNumber) -> Result<CycNumber> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &CycNumber) -> Result<CycNumber> {
        let (a, b) = self.common(other)?;
        let m = a.modulus as usize;
        let mut dense = vec![BigInt::zero(); m];
        let bnz: Vec<(usize, &BigInt)> = b.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(j, y) in &bnz {
                dense[(i + j) % m] += x * y;
            }
        }
        Ok(CycNumber { modulus: a.modulus, coeffs: reduce_dense(a.modulus, dense) })
    }

    pub fn scale(&self, k: &BigInt) -> CycNumber {
        CycNumber { modulus: self.modulus, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division by a rational integer; `None` if some coefficient is not divisible.
    pub fn div_exact(&self, k: &BigInt) -> Option<CycNumber> {
        if k.is_zero() {
            return None;
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            coeffs.push(q);
        }
        Some(CycNumber { modulus: self.modulus, coeffs })
    }

    /// Multiplies by a root of unity.
    pub fn mul_root(&self, r: &Root) -> Result<CycNumber> {
        let l = checked_lcm(self.modulus, r.order())?;
        let a = self.lift(l)?;
        let shift = r.exponent_in(l) as usize;
        let m = l as usize;
        let mut dense = vec![BigInt::zero(); m];
        for (j, c) in a.coeffs.into_iter().enumerate() {
            dense[(j + shift) % m] = c;
        }
        Ok(CycNumber { modulus: l, coeffs: reduce_dense(l, dense) })
    }

    /// Complex conjugation, `zeta -> zeta^-1`.
    pub fn conj(&self) -> CycNumber {
        let m = self.modulus as usize;
        let mut dense = vec![BigInt::zero(); m];
        for (j, c) in self.coeffs.iter().enumerate() {
            dense[(m - j) % m] = c.clone();
        }
        CycNumber { modulus: self.modulus, coeffs: reduce_dense(self.modulus, dense) }
    }

    pub fn eq_exact(&self, other: &CycNumber) -> Result<bool> {
        let (a, b) = self.common(other)?;
        Ok(a.coeffs == b.coeffs)
    }

    /// Smallest modulus representing the same number.
    pub fn normalize(&self) -> CycNumber {
        let mut cur = self.clone();
        'outer: loop {
            for l in prime_factors(cur.modulus) {
                if let Some(c) = cur.descend_prime(l) {
                    cur = c;
                    continue 'outer;
                }
            }
            return cur;
        }
    }

    /// Expresses the number in `Z[zeta_(M/l)]` if it lies there.
    fn descend_prime(&self, l: u64) -> Option<CycNumber> {
        let m = self.modulus;
        let d = m / l;
        let du = d as usize;
        // components over Z[zeta_d] along the basis zeta_m^i (l | d) or zeta_l^i (l coprime to d)
        let mut parts = vec![vec![BigInt::zero(); du]; l as usize];
        if d % l == 0 {
            for (k, c) in self.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    parts[k % l as usize][k / l as usize] += c;
                }
            }
        } else {
            let u = modinv(l % d.max(1), d);
            let v = modinv(d % l, l);
            for (k, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let k = k as u64;
                let a = ((k % d.max(1)) * u % d.max(1)) as usize;
                let b = ((k % l) * v % l) as usize;
                if b as u64 == l - 1 {
                    for part in parts.iter_mut().take(l as usize - 1) {
                        part[a] -= c;
                    }
                } else {
                    parts[b][a] += c;
                }
            }
            parts.truncate(l as usize - 1);
        }
        let mut it = parts.into_iter();
        let first = reduce_dense(d, it.next()?);
        for rest in it {
            if reduce_dense(d, rest).iter().any(|c| !c.is_zero()) {
                return None;
            }
        }
        Some(CycNumber { modulus: d, coeffs: first })
    }

    /// Number of nonzero coordinates.
    pub fn support(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Sum of absolute values of coefficients, as f64 (for error bounds).
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
    }

    pub fn is_one(&self) -> bool {
        self.as_integer().map(|c| c.is_one()).unwrap_or(false)
    }
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("{}*z{}^{}", c, self.modulus, j))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Serialize for CycNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycNumber", 2)?;
        st.serialize_field("modulus", &self.modulus)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_terms(1), vec![(0, -1), (1, 1)]);
        assert_eq!(cyclotomic_terms(4), vec![(0, 1), (2, 1)]);
        assert_eq!(cyclotomic_terms(6), vec![(0, 1), (1, -1), (2, 1)]);
        assert_eq!(cyclotomic_terms(9), vec![(0, 1), (3, 1), (6, 1)]);
        assert_eq!(cyclotomic_terms(42).last().unwrap().0, 12);
        assert_eq!(euler_phi(2058), 588);
    }

    #[test]
    fn make_root_examples() {
        assert_eq!(CycNumber::root(4, 2), CycNumber::from_int(-1).lift(4).unwrap());
        assert!(CycNumber::root(1, 0).is_one());
        let s = CycNumber::root(3, 0).add(&CycNumber::root(3, 1)).unwrap().add(&CycNumber::root(3, 2)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn ring_examples() {
        let z8 = CycNumber::root(8, 1);
        assert!(z8.mul(&z8).unwrap().eq_exact(&CycNumber::root(4, 1)).unwrap());
        assert_eq!(CycNumber::root(5, 1).conj(), CycNumber::root(5, 4));
        let lhs = CycNumber::root(6, 1);
        let rhs = CycNumber::root(3, 2).neg();
        assert!(lhs.eq_exact(&rhs).unwrap());
    }

    #[test]
    fn quadratic_gauss_sum_squares_to_minus_seven() {
        let mut counts = vec![0i64; 7];
        for a in 1..7u64 {
            let sq = (1..7u64).any(|x| x * x % 7 == a);
            counts[a as usize] += if sq { 1 } else { -1 };
        }
        let g = CycNumber::from_counts(7, &counts);
        let sq = g.mul(&g).unwrap();
        assert_eq!(sq.as_integer(), Some(BigInt::from(-7)));
    }

    #[test]
    fn normalize_descends() {
        let x = CycNumber::root(3, 1).lift(12).unwrap();
        assert_eq!(x.normalize().modulus(), 3);
        assert_eq!(x.normalize(), CycNumber::root(3, 1));
    }
}
