use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::addchar::AddChar;
use super::Character;
use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{Embedding, Relative, TowerElement, TowerField};

/// A multiplicative character of `T^x` given by
/// `theta(pi^v zeta^a (1 + y)) = w^v * e(t (a / m_T) / (q_T - 1)) * psi_T(gamma log(1 + y))`.
///
/// `gamma` is determined modulo `O_T`; the exact zero means `theta` is trivial on `1 + P_T`.
#[derive(Clone)]
pub struct MulChar {
    psi: Arc<AddChar>,
    w: Root,
    t: u64,
    gamma: TowerElement,
}

/// Serializable description of a character.
#[derive(Clone, Debug, Serialize)]
pub struct CharData {
    pub uniformizer_value: String,
    pub tame_exponent: u64,
    pub tame_modulus: u64,
    pub gamma_valuation: Option<i64>,
    pub gamma_coeffs: Vec<u64>,
    pub conductor: u32,
}

impl fmt::Debug for MulChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theta(w={:?}, t={}/{}, gamma={:?})", self.w, self.t, self.field().q() - 1, self.gamma)
    }
}

fn normalize_gamma(g: &TowerElement) -> TowerElement {
    if g.is_zero() || g.val() >= 0 {
        TowerElement::zero(g.field())
    } else {
        g.truncate_abs(0)
    }
}

impl MulChar {
    pub fn new(psi: &Arc<AddChar>, w: Root, t: u64, gamma: &TowerElement) -> Result<MulChar> {
        if !gamma.field().same_as(psi.field()) {
            return Err(Error::FieldMismatch("gamma lies in a different field".into()));
        }
        if !gamma.is_exact_zero() && gamma.abs_prec() < 0 {
            return Err(Error::PrecisionLoss("gamma is not known modulo O_T".into()));
        }
        let q1 = psi.field().q() - 1;
        Ok(MulChar { psi: psi.clone(), w, t: t % q1, gamma: normalize_gamma(gamma) })
    }

    pub fn trivial(psi: &Arc<AddChar>) -> MulChar {
        MulChar { psi: psi.clone(), w: Root::ONE, t: 0, gamma: TowerElement::zero(psi.field()) }
    }

    /// Character trivial on `pi` and on roots of unity, with the given `gamma`.
    pub fn from_gamma(psi: &Arc<AddChar>, gamma: &TowerElement) -> Result<MulChar> {
        MulChar::new(psi, Root::ONE, 0, gamma)
    }

    pub fn field(&self) -> &Arc<TowerField> {
        self.psi.field()
    }

    pub fn psi(&self) -> &Arc<AddChar> {
        &self.psi
    }

    /// `theta(pi_T)`.
    pub fn uniformizer_value(&self) -> Root {
        self.w
    }

    /// Exponent `t` with `theta(zeta_T) = e(t / (q_T - 1))`, `zeta_T = zeta^(m_T)`.
    pub fn tame_exponent(&self) -> u64 {
        self.t
    }

    pub fn gamma(&self) -> &TowerElement {
        &self.gamma
    }

    /// Smallest `n` with `theta` trivial on `1 + P^n` (`U^0 = O^x`).
    pub fn conductor(&self) -> u32 {
        if !self.gamma.is_zero() {
            (1 - self.gamma.val()) as u32
        } else if self.t != 0 {
            1
        } else {
            0
        }
    }

    pub fn data(&self) -> CharData {
        let (gv, gc) = if self.gamma.is_exact_zero() {
            (None, Vec::new())
        } else {
            (Some(self.gamma.val()), self.gamma.unit_raw().to_vec())
        };
        CharData {
            uniformizer_value: format!("{:?}", self.w),
            tame_exponent: self.t,
            tame_modulus: self.field().q() - 1,
            gamma_valuation: gv,
            gamma_coeffs: gc,
            conductor: self.conductor(),
        }
    }

    /// Value at the root of unity `zeta^a` (global exponent, must lie in the field).
    pub fn eval_root(&self, a: u64) -> Root {
        let f = self.field();
        let idx = (a % f.ctx().order()) / f.m();
        Root::new(self.t as i128 * idx as i128, f.q() - 1)
    }

    /// `theta` on a principal unit.
    pub fn eval_principal(&self, u: &TowerElement) -> Result<Root> {
        if self.gamma.is_zero() {
            return Ok(Root::ONE);
        }
        let c = self.conductor() as i64;
        if u.abs_prec() < c {
            return Err(Error::PrecisionLoss(format!("principal unit known modulo pi^{}, conductor {}", u.abs_prec(), c)));
        }
        let l = u.log_principal()?;
        self.psi.eval(&self.gamma.mul(&l))
    }

    pub fn eval(&self, x: &TowerElement) -> Result<Root> {
        if !x.field().same_as(self.field()) {
            return Err(Error::FieldMismatch("argument lies in a different field".into()));
        }
        let (v, a, u) = x.decompose()?;
        let r = self.w.pow(v as i128).mul(&self.eval_root(a));
        Ok(r.mul(&self.eval_principal(&u)?))
    }

    pub fn mul(&self, other: &MulChar) -> Result<MulChar> {
        if !self.field().same_as(other.field()) {
            return Err(Error::FieldMismatch("characters of different fields".into()));
        }
        let q1 = self.field().q() - 1;
        Ok(MulChar {
            psi: self.psi.clone(),
            w: self.w.mul(&other.w),
            t: (self.t + other.t) % q1,
            gamma: normalize_gamma(&self.gamma.add(&other.gamma)),
        })
    }

    pub fn inv(&self) -> MulChar {
        let q1 = self.field().q() - 1;
        MulChar { psi: self.psi.clone(), w: self.w.inv(), t: (q1 - self.t) % q1, gamma: self.gamma.neg() }
    }

    pub fn div(&self, other: &MulChar) -> Result<MulChar> {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> MulChar {
        let q1 = (self.field().q() - 1) as i128;
        MulChar {
            psi: self.psi.clone(),
            w: self.w.pow(n as i128),
            t: (self.t as i128 * n as i128).rem_euclid(q1) as u64,
            gamma: normalize_gamma(&self.gamma.mul_int(n)),
        }
    }

    /// Equality of characters.
    pub fn same(&self, other: &MulChar) -> bool {
        self.field().same_as(other.field()) && self.w == other.w && self.t == other.t && {
            let d = self.gamma.sub(&other.gamma);
            d.is_zero() || d.val() >= 0
        }
    }

    /// Monomial representative `zeta^a pi^(1-c)` of the leading term of `gamma` (conductor >= 2).
    pub fn standard_rep(&self) -> Result<TowerElement> {
        if self.conductor() < 2 {
            return Err(Error::ConductorTooSmall(self.conductor()));
        }
        let a = self.gamma.leading_root().ok_or(Error::DivisionByZero)?;
        Ok(TowerElement::monomial(self.field(), a as i128, self.gamma.val()))
    }

    /// `theta o N_{K/T}` for an embedding `T -> K`, with `psi_K` the additive character of `K`.
    pub fn inflate(&self, emb: &Embedding, psi_k: &Arc<AddChar>) -> Result<MulChar> {
        if !emb.source().same_as(self.field()) || !emb.target().same_as(psi_k.field()) {
            return Err(Error::FieldMismatch("inflation along a mismatched embedding".into()));
        }
        let k = emb.target();
        let rel = Relative::new(emb)?;
        let w = self.eval(&rel.norm(&TowerElement::pi_pow(k, 1))?)?;
        let tz = self.eval(&rel.norm(&TowerElement::monomial(k, k.m() as i128, 0))?)?;
        let t = tz.exponent_in(k.q() - 1);
        let gamma = emb.apply(&self.gamma);
        MulChar::new(psi_k, w, t, &gamma)
    }

    /// Restriction to a subfield `S` along its inclusion `S -> T`.
    pub fn restrict(&self, inclusion: &Embedding, psi_s: &Arc<AddChar>) -> Result<MulChar> {
        if !inclusion.target().same_as(self.field()) || !inclusion.source().same_as(psi_s.field()) {
            return Err(Error::FieldMismatch("restriction along a mismatched embedding".into()));
        }
        let s = inclusion.source();
        let w = self.eval(&inclusion.apply(&TowerElement::pi_pow(s, 1)))?;
        let tz = self.eval(&inclusion.apply(&TowerElement::monomial(s, s.m() as i128, 0)))?;
        let t = tz.exponent_in(s.q() - 1);
        let gamma = Relative::new(inclusion)?.trace(&self.gamma);
        MulChar::new(psi_s, w, t, &gamma)
    }

    /// `theta o sigma` for an automorphism `sigma` of `T`.
    pub fn conjugate(&self, sigma: &Embedding) -> Result<MulChar> {
        let f = self.field();
        if !sigma.source().same_as(f) || !sigma.target().same_as(f) {
            return Err(Error::FieldMismatch("conjugation by a non-automorphism".into()));
        }
        let w = self.eval(&sigma.apply(&TowerElement::pi_pow(f, 1)))?;
        let tz = self.eval(&sigma.apply(&TowerElement::monomial(f, f.m() as i128, 0)))?;
        let t = tz.exponent_in(f.q() - 1);
        let gamma = if self.gamma.is_exact_zero() {
            self.gamma.clone()
        } else {
            sigma
                .preimage(&self.gamma)
                .ok_or_else(|| Error::InternalContradiction("automorphism is not surjective".into()))?
        };
        MulChar::new(&self.psi, w, t, &gamma)
    }

    /// Random character with the given conductor; `w` is a root of unity of order dividing `w_order`.
    pub fn random<R: Rng>(psi: &Arc<AddChar>, conductor: u32, w_order: u64, rng: &mut R) -> Result<MulChar> {
        let f = psi.field().clone();
        let q1 = f.q() - 1;
        let w = Root::new(rng.gen_range(0..w_order.max(1)) as i128, w_order.max(1));
        match conductor {
            0 => MulChar::new(psi, w, 0, &TowerElement::zero(&f)),
            1 => {
                if q1 == 1 {
                    return Err(Error::ConfigInvalid("no tamely ramified characters of conductor 1 over F_2".into()));
                }
                MulChar::new(psi, w, rng.gen_range(1..q1), &TowerElement::zero(&f))
            }
            c => {
                let t = rng.gen_range(0..q1);
                let gamma = random_gamma(&f, c, rng);
                MulChar::new(psi, w, t, &gamma)
            }
        }
    }
}

/// Random `gamma` with valuation exactly `1 - c`, known modulo `O_T`.
pub fn random_gamma<R: Rng>(field: &Arc<TowerField>, c: u32, rng: &mut R) -> TowerElement {
    let q1 = field.q() - 1;
    let m = field.m() as i128;
    let lead = rng.gen_range(0..q1) as i128;
    let mut g = TowerElement::monomial(field, lead * m, 1 - c as i64);
    for j in (2 - c as i64)..0 {
        if rng.gen_bool(0.8) {
            let a = rng.gen_range(0..q1) as i128;
            g = g.add(&TowerElement::monomial(field, a * m, j));
        }
    }
    g.truncate_abs(0)
}

/// Smallest `n` such that the character given by `eval` is trivial on `1 + P^n`, found by
/// testing the generators `1 + [b] pi^j` for `n <= j < bound`. Returns `None` if it is
/// nontrivial on `1 + P^(bound - 1)`.
pub fn conductor_by_scan(field: &Arc<TowerField>, bound: u32, eval: &dyn Fn(&TowerElement) -> Result<Root>) -> Result<Option<u32>> {
    let one = TowerElement::one(field);
    let m = field.m() as i128;
    let mut cond = 0u32;
    for j in (1..bound).rev() {
        for i in 0..field.f() as i128 {
            let g = one.add(&TowerElement::monomial(field, i * m, j as i64));
            if !eval(&g)?.is_one() {
                cond = j + 1;
                break;
            }
        }
        if cond > 0 {
            break;
        }
    }
    if cond == bound {
        return Ok(None);
    }
    if cond > 0 {
        return Ok(Some(cond));
    }
    let q1 = field.q() - 1;
    if q1 > 1 && !eval(&TowerElement::monomial(field, m, 0))?.is_one() {
        return Ok(Some(1));
    }
    Ok(Some(0))
}

impl Character for MulChar {
    fn field(&self) -> &Arc<TowerField> {
        MulChar::field(self)
    }

    fn psi(&self) -> &Arc<AddChar> {
        MulChar::psi(self)
    }

    fn eval(&self, x: &TowerElement) -> Result<Root> {
        MulChar::eval(self, x)
    }

    fn gamma(&self) -> &TowerElement {
        MulChar::gamma(self)
    }

    fn conductor(&self) -> u32 {
        MulChar::conductor(self)
    }

    fn tame_exponent(&self) -> Result<u64> {
        Ok(self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{make_tower, Step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramified5() -> Arc<TowerField> {
        make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap()
    }

    #[test]
    fn eval_is_multiplicative() {
        let e = ramified5();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let th = MulChar::random(&psi, 9, 10, &mut rng).unwrap();
        assert_eq!(th.conductor(), 9);
        let pi = TowerElement::pi_pow(&e, 1);
        let one = TowerElement::one(&e);
        let x = one.add(&pi.mul_zeta(6)).add(&pi.pow(3).unwrap().mul_int(4)).mul_zeta(12).shift(2);
        let y = one.add(&pi.pow(2).unwrap().mul_int(5)).mul_zeta(18).shift(-1);
        let lhs = th.eval(&x.mul(&y)).unwrap();
        let rhs = th.eval(&x).unwrap().mul(&th.eval(&y).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conductor_matches_scan() {
        let e = ramified5();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for c in 0..8 {
            let th = MulChar::random(&psi, c, 4, &mut rng).unwrap();
            let scanned = conductor_by_scan(&e, 12, &|x| th.eval(x)).unwrap();
            assert_eq!(scanned, Some(c));
        }
    }

    #[test]
    fn inflation_and_restriction() {
        let e = ramified5();
        let psi_e = Arc::new(AddChar::new(&e).unwrap());
        let sub = e.subfield(crate::local::SubfieldSpec { f: 1, e: 1, c: 0 }).unwrap();
        let psi_f = Arc::new(AddChar::new(&sub.field).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let chi = MulChar::random(&psi_f, 2, 6, &mut rng).unwrap();
        let infl = chi.inflate(&sub.inclusion, &psi_e).unwrap();
        assert_eq!(infl.conductor(), 6);
        let rel = Relative::new(&sub.inclusion).unwrap();
        let x = TowerElement::one(&e).add(&TowerElement::pi_pow(&e, 1).mul_zeta(6)).shift(3);
        assert_eq!(infl.eval(&x).unwrap(), chi.eval(&rel.norm(&x).unwrap()).unwrap());
        // restricting an inflation gives the fifth power
        let back = infl.restrict(&sub.inclusion, &psi_f).unwrap();
        assert!(back.same(&chi.pow(5)));
    }
}
