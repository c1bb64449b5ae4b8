use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::context::mod_inv;
use super::field::TowerField;
use crate::error::{Error, Result};

/// Valuation used for the exact zero.
pub const INFINITE_VAL: i64 = i64::MAX / 4;

/// `pi^val * unit`, with the unit known modulo `pi^prec`.
///
/// An empty unit means the element is zero modulo `pi^val`; with `val == INFINITE_VAL` it is
/// the exact zero.
#[derive(Clone)]
pub struct TowerElement {
    field: Arc<TowerField>,
    val: i64,
    unit: Vec<u64>,
    prec: u32,
}

/// Serializable form: valuation, relative precision and unit coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementData {
    pub valuation: Option<i64>,
    pub precision: u32,
    pub coeffs: Vec<u64>,
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            write!(f, "0")
        } else if self.unit.is_empty() {
            write!(f, "O(pi^{})", self.val)
        } else {
            write!(f, "pi^{} * {:?} + O(pi^{})", self.val, self.unit, self.val + self.prec as i64)
        }
    }
}

fn floor_log(n: u64, p: u64) -> u32 {
    let mut k = 0;
    let mut x = n;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

impl TowerElement {
    pub fn field(&self) -> &Arc<TowerField> {
        &self.field
    }

    pub fn zero(field: &Arc<TowerField>) -> TowerElement {
        TowerElement { field: field.clone(), val: INFINITE_VAL, unit: Vec::new(), prec: 0 }
    }

    /// Zero known only modulo `pi^abs`.
    pub fn approx_zero(field: &Arc<TowerField>, abs: i64) -> TowerElement {
        TowerElement { field: field.clone(), val: abs.min(INFINITE_VAL), unit: Vec::new(), prec: 0 }
    }

    pub fn one(field: &Arc<TowerField>) -> TowerElement {
        TowerElement { field: field.clone(), val: 0, unit: field.raw_one(), prec: field.prec() }.canonical()
    }

    pub fn from_int(field: &Arc<TowerField>, n: i64) -> TowerElement {
        if n == 0 {
            return TowerElement::zero(field);
        }
        let raw = field.raw_from_w(&field.ctx().w_scalar(n));
        TowerElement::from_raw(field, raw, 0, field.prec() as i64 + field.e() as i64 * 24)
    }

    /// `pi^v`.
    pub fn pi_pow(field: &Arc<TowerField>, v: i64) -> TowerElement {
        TowerElement { field: field.clone(), val: v, unit: field.raw_one(), prec: field.prec() }.canonical()
    }

    /// `zeta^a pi^v` with `zeta` the global Teichmüller generator. `zeta^a` must lie in the field.
    pub fn monomial(field: &Arc<TowerField>, a: i128, v: i64) -> TowerElement {
        debug_assert!(a.rem_euclid(field.ctx().order() as i128) % field.m() as i128 == 0, "root of unity outside the field");
        let unit = field.raw_from_w(&field.ctx().w_zeta(a));
        TowerElement { field: field.clone(), val: v, unit, prec: field.prec() }.canonical()
    }

    /// `w * pi^v` for an element `w` of the unramified ring.
    pub fn from_w(field: &Arc<TowerField>, w: &[u64], v: i64) -> TowerElement {
        let raw = field.raw_from_w(w);
        TowerElement::from_raw(field, raw, v, field.prec() as i64)
    }

    /// Teichmüller lift of a residue element given by its packed index.
    pub fn teichmuller(field: &Arc<TowerField>, residue: u32) -> Result<TowerElement> {
        if residue == 0 {
            return Ok(TowerElement::zero(field));
        }
        let a = field.ctx().residue_dlog(residue).ok_or_else(|| Error::RangeViolation("residue index out of range".into()))?;
        if a % field.m() != 0 {
            return Err(Error::FieldMismatch("residue element outside the residue field".into()));
        }
        Ok(TowerElement::monomial(field, a as i128, 0))
    }

    /// Builds `pi^offset * raw` where `raw` is an integral vector known modulo `pi^rel`.
    pub fn from_raw(field: &Arc<TowerField>, mut raw: Vec<u64>, offset: i64, rel: i64) -> TowerElement {
        if rel <= 0 {
            return TowerElement::approx_zero(field, offset + rel.max(0));
        }
        let rel_u = rel as u64;
        field.raw_truncate(&mut raw, rel_u);
        let w = field.raw_val(&raw, rel_u);
        if w >= rel_u {
            return TowerElement::approx_zero(field, offset + rel);
        }
        let e = field.e() as u64;
        let t = w.div_ceil(e);
        let reliable = e * (field.ctx().digits() as u64 - t.min(field.ctx().digits() as u64));
        let mut unit = field.raw_unshift(&raw, w);
        let prec = (rel_u - w).min(reliable);
        field.raw_truncate(&mut unit, prec);
        TowerElement { field: field.clone(), val: offset + w as i64, unit, prec: prec as u32 }
    }

    fn canonical(mut self) -> TowerElement {
        if !self.unit.is_empty() {
            self.field.raw_truncate(&mut self.unit, self.prec as u64);
        }
        self
    }

    pub fn is_exact_zero(&self) -> bool {
        self.unit.is_empty() && self.val >= INFINITE_VAL
    }

    /// True for the exact zero and for zeros known only to finite precision.
    pub fn is_zero(&self) -> bool {
        self.unit.is_empty()
    }

    /// Valuation; for a zero known modulo `pi^a` this is `a` (a lower bound).
    pub fn val(&self) -> i64 {
        self.val
    }

    /// Relative precision of the unit part.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Absolute precision: the element is known modulo `pi^abs_prec`.
    pub fn abs_prec(&self) -> i64 {
        if self.unit.is_empty() {
            self.val
        } else {
            self.val + self.prec as i64
        }
    }

    pub fn unit_raw(&self) -> &[u64] {
        &self.unit
    }

    pub fn data(&self) -> ElementData {
        ElementData {
            valuation: if self.is_exact_zero() { None } else { Some(self.val) },
            precision: self.prec,
            coeffs: self.unit.clone(),
        }
    }

    fn check_field(&self, other: &TowerElement) {
        assert!(self.field.same_as(&other.field), "elements of different fields: {:?} vs {:?}", self.field, other.field);
    }

    /// Lowers the absolute precision to at most `abs`.
    pub fn truncate_abs(&self, abs: i64) -> TowerElement {
        if self.unit.is_empty() {
            return TowerElement::approx_zero(&self.field, self.val.min(abs));
        }
        if abs <= self.val {
            return TowerElement::approx_zero(&self.field, abs);
        }
        let prec = ((abs - self.val) as u64).min(self.prec as u64) as u32;
        TowerElement { field: self.field.clone(), val: self.val, unit: self.unit.clone(), prec }.canonical()
    }

    /// Treats the canonical representative as known to relative precision `rel` (capped by the
    /// field), i.e. fixes the unknown digits to zero.
    pub fn extend_prec(&self, rel: u32) -> TowerElement {
        if self.unit.is_empty() {
            return self.clone();
        }
        let prec = rel.max(self.prec).min(self.field.prec());
        TowerElement { field: self.field.clone(), val: self.val, unit: self.unit.clone(), prec }
    }

    /// Lowers the relative precision to at most `rel`.
    pub fn truncate_rel(&self, rel: u32) -> TowerElement {
        if self.unit.is_empty() {
            return self.clone();
        }
        self.truncate_abs(self.val + rel as i64)
    }

    pub fn neg(&self) -> TowerElement {
        if self.unit.is_empty() {
            return self.clone();
        }
        let unit = self.field.raw_neg(&self.unit);
        TowerElement { field: self.field.clone(), val: self.val, unit, prec: self.prec }.canonical()
    }

    pub fn add(&self, other: &TowerElement) -> TowerElement {
        self.check_field(other);
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let abs = self.abs_prec().min(other.abs_prec());
        let (lo, hi) = if self.val <= other.val { (self, other) } else { (other, self) };
        if lo.unit.is_empty() {
            return TowerElement::approx_zero(&self.field, abs);
        }
        if hi.unit.is_empty() || hi.val >= abs {
            return lo.truncate_abs(abs);
        }
        let shift = (hi.val - lo.val) as u64;
        let shifted = self.field.raw_shift(&hi.unit, shift);
        let sum = self.field.raw_add(&lo.unit, &shifted);
        TowerElement::from_raw(&self.field, sum, lo.val, abs - lo.val)
    }

    pub fn sub(&self, other: &TowerElement) -> TowerElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TowerElement) -> TowerElement {
        self.check_field(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            return TowerElement::zero(&self.field);
        }
        match (self.unit.is_empty(), other.unit.is_empty()) {
            (true, true) => TowerElement::approx_zero(&self.field, self.val + other.val),
            (true, false) => TowerElement::approx_zero(&self.field, self.val + other.val),
            (false, true) => TowerElement::approx_zero(&self.field, self.val + other.val),
            (false, false) => {
                let unit = self.field.raw_mul(&self.unit, &other.unit);
                let prec = self.prec.min(other.prec);
                TowerElement { field: self.field.clone(), val: self.val + other.val, unit, prec }.canonical()
            }
        }
    }

    /// Multiplies by a rational integer.
    pub fn mul_int(&self, n: i64) -> TowerElement {
        self.mul(&TowerElement::from_int(&self.field, n))
    }

    /// Multiplies by the root of unity `zeta^a`.
    pub fn mul_zeta(&self, a: i128) -> TowerElement {
        if self.unit.is_empty() {
            return self.clone();
        }
        let z = self.field.ctx().w_zeta(a);
        let unit = self.field.raw_scale_w(&self.unit, &z);
        TowerElement { field: self.field.clone(), val: self.val, unit, prec: self.prec }.canonical()
    }

    /// Multiplies by `pi^s`.
    pub fn shift(&self, s: i64) -> TowerElement {
        if self.is_exact_zero() {
            return self.clone();
        }
        TowerElement { field: self.field.clone(), val: self.val + s, unit: self.unit.clone(), prec: self.prec }
    }

    pub fn inv(&self) -> Result<TowerElement> {
        if self.unit.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let f = &self.field;
        let ctx = f.ctx();
        let a0 = f.coeff(&self.unit, 0);
        let mut y = f.raw_from_w(&ctx.w_inv(a0)?);
        let two = f.raw_from_w(&ctx.w_scalar(2));
        let mut known = 1u64;
        let target = self.prec as u64;
        while known < target {
            let uy = f.raw_mul(&self.unit, &y);
            y = f.raw_mul(&y, &f.raw_sub(&two, &uy));
            known *= 2;
        }
        Ok(TowerElement { field: f.clone(), val: -self.val, unit: y, prec: self.prec }.canonical())
    }

    pub fn div(&self, other: &TowerElement) -> Result<TowerElement> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<TowerElement> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut r = TowerElement::one(&self.field);
        let mut b = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Ok(r)
    }

    /// Equality modulo the common absolute precision.
    pub fn equals(&self, other: &TowerElement) -> bool {
        self.sub(other).is_zero()
    }

    /// Exponent `a` with `unit == zeta^a (mod pi)`.
    pub fn leading_root(&self) -> Option<u64> {
        if self.unit.is_empty() {
            return None;
        }
        self.field.ctx().w_dlog(self.field.coeff(&self.unit, 0))
    }

    /// Residue class of a unit as packed index; `None` for non-units.
    pub fn residue(&self) -> Option<u32> {
        if self.val != 0 || self.unit.is_empty() {
            return None;
        }
        Some(self.field.ctx().w_residue_index(self.field.coeff(&self.unit, 0)))
    }

    /// Writes a nonzero `x` as `pi^v zeta^a (1 + y)` and returns `(v, a, 1 + y)`.
    pub fn decompose(&self) -> Result<(i64, u64, TowerElement)> {
        let a = self.leading_root().ok_or(Error::DivisionByZero)?;
        let unit = TowerElement { field: self.field.clone(), val: 0, unit: self.unit.clone(), prec: self.prec };
        Ok((self.val, a, unit.mul_zeta(-(a as i128))))
    }

    /// Multiplies by `p^-s` (`s` may be negative).
    pub fn div_p_pow(&self, s: i64) -> TowerElement {
        // p = pi^e zeta^-u
        let e = self.field.e() as i64;
        let u = self.field.unit_exp() as i128;
        self.mul_zeta(u * s as i128).shift(-e * s)
    }

    fn require_log(&self) -> Result<()> {
        if !self.field.has_log() {
            return Err(Error::ExpLogRadius { p: self.field.p(), e: self.field.e() });
        }
        Ok(())
    }

    /// `log(x)` for a principal unit `x` in `1 + P`.
    pub fn log_principal(&self) -> Result<TowerElement> {
        self.require_log()?;
        let one = TowerElement::one(&self.field);
        let y = self.sub(&one);
        if y.val() < 1 {
            return Err(Error::RangeViolation("log needs an argument in 1 + P".into()));
        }
        if y.is_zero() {
            return Ok(TowerElement::approx_zero(&self.field, y.abs_prec()));
        }
        let target = y.abs_prec();
        let p = self.field.p();
        let e = self.field.e() as i64;
        let v = y.val();
        let modulus = self.field.ctx().modulus();
        let mut sum = TowerElement::zero(&self.field);
        let mut power = y.clone();
        let mut n = 1u64;
        loop {
            let s = floor_log(n, p) as i64;
            let s_exact = {
                let mut k = 0i64;
                let mut m = n;
                while m % p == 0 {
                    m /= p;
                    k += 1;
                }
                (k, m)
            };
            if n as i64 * v - e * s >= target && n > e as u64 {
                break;
            }
            let (k, rest) = s_exact;
            let inv_rest = mod_inv(rest as i128, modulus as i128).expect("unit") as i64;
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let term = power.mul_int(sign * inv_rest).div_p_pow(k);
            sum = sum.add(&term);
            power = power.mul(&y);
            n += 1;
        }
        Ok(sum.truncate_abs(target))
    }

    /// `exp(x)` for `x` in `P`.
    pub fn exp_principal(&self) -> Result<TowerElement> {
        self.require_log()?;
        if self.val() < 1 {
            return Err(Error::RangeViolation("exp needs an argument in P".into()));
        }
        let one = TowerElement::one(&self.field);
        let target = self.abs_prec().min(self.field.prec() as i64);
        if self.is_zero() {
            return Ok(one.truncate_abs(target));
        }
        let mut y = one.add(self).truncate_abs(target);
        for _ in 0..64 {
            let next = y.mul(&one.add(self).sub(&y.log_principal()?)).truncate_abs(target);
            if next.equals(&y) && next.abs_prec() >= y.abs_prec() {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::PrecisionLoss("exp iteration did not stabilize".into()))
    }

    /// Applies `Frob^j` to all coefficients (an automorphism only when it fixes the uniformizer relation).
    pub fn frob_coeffs(&self, j: u32) -> TowerElement {
        if self.unit.is_empty() {
            return self.clone();
        }
        let unit = self.field.raw_frob(&self.unit, j);
        TowerElement { field: self.field.clone(), val: self.val, unit, prec: self.prec }
    }

    /// Coefficient of `pi^j` in the unit part, as an element of the unramified ring.
    pub fn unit_coeff(&self, j: usize) -> Vec<u64> {
        if self.unit.is_empty() {
            return self.field.ctx().w_zero();
        }
        self.field.coeff(&self.unit, j).to_vec()
    }

    /// Reinterprets the element in another field with the same normalized model.
    pub fn rehome(&self, field: &Arc<TowerField>) -> TowerElement {
        assert!(self.field.same_as(field));
        TowerElement { field: field.clone(), val: self.val, unit: self.unit.clone(), prec: self.prec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::field::{make_tower, Step};

    #[test]
    fn basics() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 12).unwrap();
        let pi = TowerElement::pi_pow(&e, 1);
        let beta = pi.pow(-8).unwrap();
        assert_eq!(beta.val(), -8);
        let x = TowerElement::one(&e).add(&pi.mul_int(3)).add(&pi.pow(4).unwrap());
        let xi = x.inv().unwrap();
        assert!(x.mul(&xi).equals(&TowerElement::one(&e)));
        // pi^5 = p
        assert!(pi.pow(5).unwrap().equals(&TowerElement::from_int(&e, 7)));
    }

    #[test]
    fn exp_log_roundtrip() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 12).unwrap();
        let pi = TowerElement::pi_pow(&e, 1);
        let x = pi.mul_int(2).add(&pi.pow(3).unwrap().mul_zeta(2));
        let u = x.exp_principal().unwrap();
        let back = u.log_principal().unwrap();
        assert!(back.equals(&x), "{:?} vs {:?}", back, x);
        assert!(back.abs_prec() >= 12);
    }

    #[test]
    fn cancellation_tracks_precision() {
        let f = make_tower(7, &[], 6).unwrap();
        let a = TowerElement::from_int(&f, 1 + 7 * 3);
        let b = TowerElement::from_int(&f, 1);
        let d = a.sub(&b);
        assert_eq!(d.val(), 1);
        assert!(d.equals(&TowerElement::from_int(&f, 21)));
    }
}
