use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use super::context::mod_inv;
use super::element::TowerElement;
use super::field::TowerField;
use crate::error::{Error, Result};

/// Field embedding `S -> T` over `Q_p`: `pi_S -> zeta^c pi_T^(e_T/e_S)`, and `Frob^frob` on the
/// unramified coefficients.
#[derive(Clone)]
pub struct Embedding {
    source: Arc<TowerField>,
    target: Arc<TowerField>,
    frob: u32,
    c: u64,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Emb({:?} -> {:?}, frob={}, c={})", self.source, self.target, self.frob, self.c)
    }
}

/// A subfield of `T` given by residue degree `f`, ramification `e` and uniformizer twist `c`:
/// the subfield is `W_f[zeta^c pi_T^(e_T/e)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfieldSpec {
    pub f: u32,
    pub e: u32,
    pub c: u64,
}

impl SubfieldSpec {
    pub fn degree(&self) -> u32 {
        self.f * self.e
    }
}

/// A subfield together with its standalone model and inclusion.
#[derive(Clone, Debug)]
pub struct Subfield {
    pub spec: SubfieldSpec,
    pub field: Arc<TowerField>,
    pub inclusion: Embedding,
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

impl Embedding {
    /// Checks the compatibility `c e_S + u_T = u_S p^frob (mod p^fmax - 1)` and builds the map.
    pub fn new(source: &Arc<TowerField>, target: &Arc<TowerField>, frob: u32, c: u64) -> Result<Embedding> {
        if !Arc::ptr_eq(source.ctx(), target.ctx()) {
            return Err(Error::FieldMismatch("embedding between different contexts".into()));
        }
        if target.f() % source.f() != 0 || target.e() % source.e() != 0 {
            return Err(Error::AmbientTooSmall(format!("{:?} does not fit in {:?}", source, target)));
        }
        let ctx = source.ctx();
        let n = ctx.order() as u128;
        let c = (c as u128 % n) as u64;
        if c % target.m() != 0 {
            return Err(Error::FieldMismatch("twist is not a root of unity of the target".into()));
        }
        let frob = frob % source.f();
        let lhs = (c as u128 * source.e() as u128 + target.unit_exp() as u128) % n;
        let rhs = source.unit_exp() as u128 * ctx.p().pow(frob) as u128 % n;
        if lhs != rhs {
            return Err(Error::FieldMismatch("embedding does not respect the uniformizer relation".into()));
        }
        Ok(Embedding { source: source.clone(), target: target.clone(), frob, c })
    }

    pub fn identity(field: &Arc<TowerField>) -> Embedding {
        Embedding { source: field.clone(), target: field.clone(), frob: 0, c: 0 }
    }

    pub fn source(&self) -> &Arc<TowerField> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TowerField> {
        &self.target
    }

    pub fn frob(&self) -> u32 {
        self.frob
    }

    pub fn twist(&self) -> u64 {
        self.c
    }

    /// `e_T / e_S`.
    pub fn ram_ratio(&self) -> u32 {
        self.target.e() / self.source.e()
    }

    /// The image as a subfield of the target.
    pub fn image_spec(&self) -> SubfieldSpec {
        let m = self.source.ctx().m_of(self.source.f());
        SubfieldSpec { f: self.source.f(), e: self.source.e(), c: self.c % m }
    }

    pub fn apply(&self, x: &TowerElement) -> TowerElement {
        let t = &self.target;
        let s = &self.source;
        if x.is_zero() {
            if x.is_exact_zero() {
                return TowerElement::zero(t);
            }
            return TowerElement::approx_zero(t, x.val() * self.ram_ratio() as i64);
        }
        let ctx = t.ctx();
        let d = self.ram_ratio() as usize;
        let w = t.width();
        let mut raw = t.raw_zero();
        for k in 0..s.e() as usize {
            let a = x.unit_coeff(k);
            if ctx.w_is_zero(&a) {
                continue;
            }
            let img = ctx.w_mul(&ctx.w_frob(&a, self.frob), &ctx.w_zeta(self.c as i128 * k as i128));
            raw[d * k * w..(d * k + 1) * w].copy_from_slice(&img);
        }
        let v = x.val();
        let raw = t.raw_scale_w(&raw, &ctx.w_zeta(self.c as i128 * v as i128));
        TowerElement::from_raw(t, raw, v * d as i64, x.prec() as i64 * d as i64)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Embedding) -> Result<Embedding> {
        if !self.target.same_as(&next.source) {
            return Err(Error::FieldMismatch("embeddings do not compose".into()));
        }
        let n = self.source.ctx().order() as u128;
        let p = self.source.ctx().p();
        let c = (self.c as u128 * p.pow(next.frob) as u128 % n + next.c as u128 * self.ram_ratio() as u128) % n;
        Embedding::new(&self.source, &next.target, self.frob + next.frob, c as u64)
    }

    /// Restriction to a subfield `B` of the source given by its inclusion.
    pub fn restrict(&self, inclusion: &Embedding) -> Result<Embedding> {
        inclusion.then(self)
    }

    /// Preimage of an element of the target lying in the image. Returns `None` if it does not lie there.
    pub fn preimage(&self, y: &TowerElement) -> Option<TowerElement> {
        let s = &self.source;
        if y.is_zero() {
            if y.is_exact_zero() {
                return Some(TowerElement::zero(s));
            }
            return Some(TowerElement::approx_zero(s, y.val().div_euclid(self.ram_ratio() as i64)));
        }
        let d = self.ram_ratio() as i64;
        let ctx = s.ctx();
        let v = y.val();
        if v.rem_euclid(d) != 0 {
            return None;
        }
        let vs = v / d;
        // strip zeta^(c vs) then read coefficients at multiples of d
        let y0 = y.mul_zeta(-(self.c as i128) * vs as i128);
        let w = s.width();
        let mut raw = s.raw_zero();
        let t = &self.target;
        let inv_frob = (s.f() - self.frob % s.f()) % s.f();
        let prec_s = (y.prec() as i64).div_euclid(d).max(0);
        let mut trial = t.raw_zero();
        for k in 0..t.e() as usize {
            let a = y0.unit_coeff(k);
            if k % d as usize != 0 {
                if !ctx.w_is_zero(&a) {
                    trial[k * w..(k + 1) * w].copy_from_slice(&a);
                }
                continue;
            }
            let kk = k / d as usize;
            let b = ctx.w_mul(&a, &ctx.w_zeta(-(self.c as i128) * kk as i128));
            raw[kk * w..(kk + 1) * w].copy_from_slice(&ctx.w_frob(&b, inv_frob));
        }
        let rest = TowerElement::from_raw(t, trial, 0, y.prec() as i64);
        if !rest.is_zero() {
            return None;
        }
        let x = TowerElement::from_raw(s, raw, vs, prec_s);
        if !self.apply(&x).equals(&y.truncate_abs(y.val() + prec_s * d)) {
            return None;
        }
        Some(x)
    }
}

/// All embeddings of `source` into `target` over `Q_p`. There are `[source : Q_p]` of them when
/// the target is large enough; otherwise `AmbientTooSmall`.
pub fn embeddings(source: &Arc<TowerField>, target: &Arc<TowerField>) -> Result<Vec<Embedding>> {
    let out = embeddings_found(source, target)?;
    if out.len() as u32 != source.degree() {
        return Err(Error::AmbientTooSmall(format!(
            "{} embeddings of a degree {} field into {:?}",
            out.len(),
            source.degree(),
            target
        )));
    }
    Ok(out)
}

/// Automorphisms of `field` over `Q_p` (all of them, Galois or not).
pub fn automorphisms(field: &Arc<TowerField>) -> Result<Vec<Embedding>> {
    embeddings_found(field, field)
}

/// The embeddings of `source` into `target` that exist, without requiring all of them.
pub fn embeddings_found(source: &Arc<TowerField>, target: &Arc<TowerField>) -> Result<Vec<Embedding>> {
    let ctx = source.ctx();
    if target.f() % source.f() != 0 || target.e() % source.e() != 0 {
        return Err(Error::AmbientTooSmall(format!("{:?} does not fit in {:?}", source, target)));
    }
    let n = ctx.order() as i128;
    let mt = target.m() as i128;
    let qt1 = target.q() as i128 - 1;
    let mut out = Vec::new();
    for j in 0..source.f() {
        let rhs_full = (source.unit_exp() as i128 * ctx.p().pow(j) as i128 - target.unit_exp() as i128).rem_euclid(n);
        if rhs_full % mt != 0 {
            continue;
        }
        let rhs = rhs_full / mt;
        let es = source.e() as i128;
        let g = es.gcd(&qt1);
        if rhs % g != 0 {
            continue;
        }
        let modulus = qt1 / g;
        let base = if modulus == 1 { 0 } else { (rhs / g) * mod_inv(es / g, modulus).unwrap() % modulus };
        for k in 0..g {
            let cp = base + k * modulus;
            out.push(Embedding::new(source, target, j, (cp * mt) as u64)?);
        }
    }
    Ok(out)
}

/// Whether the subfield `a` is contained in `b` (both subfields of the same field).
pub fn spec_contains(ctx_order: u64, m_of: impl Fn(u32) -> u64, b: &SubfieldSpec, a: &SubfieldSpec) -> bool {
    if b.f % a.f != 0 || b.e % a.e != 0 {
        return false;
    }
    let k = (b.e / a.e) as i128;
    let diff = (a.c as i128 - k * b.c as i128).rem_euclid(ctx_order as i128);
    diff % m_of(b.f) as i128 == 0
}

impl TowerField {
    /// Standalone model of a subfield, with its inclusion.
    pub fn subfield(self: &Arc<Self>, spec: SubfieldSpec) -> Result<Subfield> {
        let ctx = self.ctx();
        if self.f() % spec.f != 0 || self.e() % spec.e != 0 {
            return Err(Error::FieldMismatch(format!("{:?} is not a subfield shape of {:?}", spec, self)));
        }
        let n = ctx.order() as u128;
        let u = ((spec.c as u128 * spec.e as u128 + self.unit_exp() as u128) % n) as u64;
        if u % ctx.m_of(spec.f) != 0 || spec.c % self.m() != 0 {
            return Err(Error::FieldMismatch(format!("{:?} does not define a subfield of {:?}", spec, self)));
        }
        let d = self.e() / spec.e;
        let cap = spec.e * ctx.digits().saturating_sub(2);
        let prec = self.prec().div_ceil(d).max(1).min(cap.max(1));
        let field = if spec == self.self_spec() {
            self.clone()
        } else {
            TowerField::from_model(ctx, spec.f, spec.e, u, prec, Vec::new(), false)?
        };
        let inclusion = Embedding::new(&field, self, 0, spec.c)?;
        Ok(Subfield { spec, field, inclusion })
    }

    /// The spec describing the whole field.
    pub fn self_spec(&self) -> SubfieldSpec {
        SubfieldSpec { f: self.f(), e: self.e(), c: 0 }
    }

    /// Canonical representative of a spec (smallest admissible twist in its class).
    pub fn normalize_spec(&self, spec: SubfieldSpec) -> SubfieldSpec {
        let mf = self.ctx().m_of(spec.f);
        SubfieldSpec { c: spec.c % mf, ..spec }
    }

    /// All subfield specs `Q_p <= S <= T`.
    pub fn subfield_specs(&self) -> Vec<SubfieldSpec> {
        let ctx = self.ctx();
        let n = ctx.order() as u128;
        let mt = self.m();
        let mut out = Vec::new();
        for fs in divisors(self.f()) {
            let mf = ctx.m_of(fs);
            for es in divisors(self.e()) {
                // c ranges over multiples of m_T modulo m_(f_S)
                let mut c = 0u64;
                while c < mf {
                    let u = (c as u128 * es as u128 + self.unit_exp() as u128) % n;
                    if u % mf as u128 == 0 {
                        out.push(SubfieldSpec { f: fs, e: es, c });
                    }
                    c += mt;
                }
            }
        }
        out
    }

    pub fn enumerate_subfields(self: &Arc<Self>) -> Result<Vec<Subfield>> {
        self.subfield_specs().into_iter().map(|s| self.subfield(s)).collect()
    }

    /// Whether subfield `a` lies in subfield `b`.
    pub fn spec_le(&self, a: &SubfieldSpec, b: &SubfieldSpec) -> bool {
        let ctx = self.ctx().clone();
        spec_contains(ctx.order(), |f| ctx.m_of(f), b, a)
    }

    /// Whether the monomial `zeta^a pi^v` lies in the subfield.
    pub fn spec_contains_monomial(&self, s: &SubfieldSpec, a: u64, v: i64) -> bool {
        let d = (self.e() / s.e) as i64;
        if v.rem_euclid(d) != 0 {
            return false;
        }
        let k = v / d;
        let n = self.ctx().order() as i128;
        let diff = (a as i128 - s.c as i128 * k as i128).rem_euclid(n);
        diff % self.ctx().m_of(s.f) as i128 == 0
    }

    /// Smallest subfield containing `base` and the given monomials `zeta^a pi^v`.
    pub fn generated_spec(&self, base: &SubfieldSpec, monomials: &[(u64, i64)]) -> Result<SubfieldSpec> {
        let cands: Vec<SubfieldSpec> = self
            .subfield_specs()
            .into_iter()
            .filter(|s| self.spec_le(base, s) && monomials.iter().all(|(a, v)| self.spec_contains_monomial(s, *a, *v)))
            .collect();
        let best = cands
            .iter()
            .min_by_key(|s| s.degree())
            .copied()
            .ok_or_else(|| Error::InternalContradiction("no subfield contains the generators".into()))?;
        if !cands.iter().all(|s| self.spec_le(&best, s)) {
            return Err(Error::InternalContradiction("generated subfield is not unique".into()));
        }
        Ok(best)
    }

    /// Smallest subfield containing two given subfields.
    pub fn compositum_spec(&self, a: &SubfieldSpec, b: &SubfieldSpec) -> Result<SubfieldSpec> {
        let cands: Vec<SubfieldSpec> =
            self.subfield_specs().into_iter().filter(|s| self.spec_le(a, s) && self.spec_le(b, s)).collect();
        let best = cands
            .iter()
            .min_by_key(|s| s.degree())
            .copied()
            .ok_or_else(|| Error::InternalContradiction("no common overfield".into()))?;
        if !cands.iter().all(|s| self.spec_le(&best, s)) {
            return Err(Error::InternalContradiction("compositum is not unique".into()));
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::context::PadicContext;
    use crate::local::field::{make_ambient_in, make_tower, make_tower_in, Step};

    #[test]
    fn prime_degree_subfields() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 12).unwrap();
        let subs = e.subfield_specs();
        assert_eq!(subs.len(), 2);
    }

    #[test]
    fn degree_six_lattice() {
        let ctx = Arc::new(PadicContext::new(7, 2, 6).unwrap());
        let t = make_ambient_in(&ctx, &[Step::Unramified(2), Step::TameRamified { degree: 3, unit_exp: 0 }], 8).unwrap();
        assert_eq!(t.subfield_specs().len(), 4);
    }

    #[test]
    fn kummer_embeddings() {
        // M = W_4[pi], pi^5 = p contains the fifth roots of unity for p = 11 (11 = 1 mod 5)
        let ctx = Arc::new(PadicContext::new(11, 1, 6).unwrap());
        let s = make_tower_in(&ctx, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 10).unwrap();
        let embs = embeddings(&s, &s).unwrap();
        assert_eq!(embs.len(), 5);
        let pi = TowerElement::pi_pow(&s, 1);
        for emb in &embs {
            let img = emb.apply(&pi);
            assert!(img.pow(5).unwrap().equals(&TowerElement::from_int(&s, 11)));
        }
    }

    #[test]
    fn unramified_quadratic_automorphisms() {
        let ctx = Arc::new(PadicContext::new(11, 2, 6).unwrap());
        let l = make_tower_in(&ctx, &[Step::Unramified(2)], 4).unwrap();
        let embs = embeddings(&l, &l).unwrap();
        assert_eq!(embs.len(), 2);
        assert!(embs.iter().any(|e| e.frob() == 1));
    }

    #[test]
    fn apply_is_multiplicative_and_preimage_inverts() {
        let ctx = Arc::new(PadicContext::new(7, 2, 6).unwrap());
        let t = make_tower_in(&ctx, &[Step::Unramified(2), Step::TameRamified { degree: 3, unit_exp: 0 }], 9).unwrap();
        for sub in t.enumerate_subfields().unwrap() {
            let s = &sub.field;
            let x = TowerElement::pi_pow(s, -2).add(&TowerElement::monomial(s, s.m() as i128 * 3, 1));
            let y = TowerElement::one(s).add(&TowerElement::pi_pow(s, 1).mul_int(5));
            let lhs = sub.inclusion.apply(&x.mul(&y));
            let rhs = sub.inclusion.apply(&x).mul(&sub.inclusion.apply(&y));
            assert!(lhs.equals(&rhs));
            let back = sub.inclusion.preimage(&sub.inclusion.apply(&x)).unwrap();
            assert!(back.equals(&x));
        }
    }
}
