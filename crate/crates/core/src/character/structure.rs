use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use super::addchar::AddChar;
use super::mulchar::MulChar;
use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{automorphisms, Embedding, Relative, SubfieldSpec, TowerElement, TowerField};

/// Intermediate fields `base <= S < T`, as standalone subfields.
fn proper_intermediates(t: &Arc<TowerField>, base: &SubfieldSpec) -> Vec<SubfieldSpec> {
    let top = t.self_spec();
    let base = t.normalize_spec(*base);
    t.subfield_specs()
        .into_iter()
        .map(|s| t.normalize_spec(s))
        .filter(|s| t.spec_le(&base, s) && *s != top)
        .collect()
}

/// Whether `theta` restricted to `1 + P_T` factors through `N_{T/S}`.
fn wild_part_from(theta: &MulChar, rel: &Relative) -> Result<bool> {
    let g = theta.gamma();
    if g.is_zero() {
        return Ok(true);
    }
    let proj = rel.project(g)?;
    let back = rel.embedding().apply(&proj);
    let d = g.sub(&back);
    Ok(d.is_zero() || d.val() >= 0)
}

/// Whether `theta` restricted to the roots of unity of `T` factors through `N_{T/S}`.
fn tame_part_from(theta: &MulChar, rel: &Relative) -> Result<bool> {
    let t = theta.field();
    let s = rel.embedding().source();
    let zt = TowerElement::monomial(t, t.m() as i128, 0);
    let nz = rel.norm(&zt)?;
    let a = nz.leading_root().ok_or(Error::DivisionByZero)?;
    let qs1 = s.q() - 1;
    let k = (a % s.ctx().order()) / s.m();
    let image_order = qs1 / k.gcd(&qs1).max(1);
    let r = Root::new(theta.tame_exponent() as i128, t.q() - 1);
    Ok(image_order % r.order() == 0)
}

/// Whether `theta` factors through `N_{T/S}`.
pub fn factors_through(theta: &MulChar, inclusion: &Embedding) -> Result<bool> {
    let rel = Relative::new(inclusion)?;
    Ok(wild_part_from(theta, &rel)? && tame_part_from(theta, &rel)?)
}

/// Admissibility over the subfield `base`: `theta` does not factor through the norm from any
/// proper intermediate field, and if its restriction to `1 + P_T` factors through `N_{T/S}`
/// then `T/S` is unramified.
pub fn is_admissible(theta: &MulChar, base: &SubfieldSpec) -> Result<bool> {
    let t = theta.field();
    check_tame(t, base)?;
    for spec in proper_intermediates(t, base) {
        let sub = t.subfield(spec)?;
        let rel = Relative::new(&sub.inclusion)?;
        if wild_part_from(theta, &rel)? && (spec.e != t.e() || tame_part_from(theta, &rel)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Genericity over `base`: for conductor at least 2, the leading monomial of `gamma` generates
/// `T` over `base`; for conductor 1 (requires `T/base` unramified), the tame part does not come
/// from a proper intermediate field.
pub fn is_generic(theta: &MulChar, base: &SubfieldSpec) -> Result<bool> {
    let t = theta.field();
    let c = theta.conductor();
    if c >= 2 {
        let a = theta.gamma().leading_root().ok_or(Error::DivisionByZero)?;
        let spec = t.generated_spec(base, &[(a, theta.gamma().val())])?;
        return Ok(t.normalize_spec(spec) == t.self_spec());
    }
    if t.e() != base.e {
        return Err(Error::RamifiedConductorOne);
    }
    if c == 0 {
        return Ok(proper_intermediates(t, base).is_empty());
    }
    for spec in proper_intermediates(t, base) {
        let sub = t.subfield(spec)?;
        if tame_part_from(theta, &Relative::new(&sub.inclusion)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_tame(t: &Arc<TowerField>, base: &SubfieldSpec) -> Result<()> {
    let degree = t.degree() / base.degree();
    if degree % t.p() as u32 == 0 {
        return Err(Error::WildRamification { p: t.p(), degree });
    }
    Ok(())
}

/// One factor `phi_i`, a character of the intermediate field `F_i`.
#[derive(Clone, Debug)]
pub struct HoweFactor {
    pub spec: SubfieldSpec,
    pub psi: Arc<AddChar>,
    pub inclusion: Embedding,
    pub chi: MulChar,
    /// Conductor of `phi_i o N_{T/F_i}`.
    pub inflated_conductor: u32,
}

/// `theta = (chi o N_{T/F}) * prod (phi_i o N_{T/F_i})` with `F = F_0 < F_1 < ... < F_s = T`,
/// each `phi_i` generic over `F_(i-1)` and the inflated conductors strictly decreasing.
#[derive(Clone, Debug)]
pub struct HoweFactorization {
    pub base: Option<HoweFactor>,
    pub factors: Vec<HoweFactor>,
}

/// Serializable summary of a factorization.
#[derive(Clone, Debug, Serialize)]
pub struct HoweSummary {
    pub tower: Vec<(u32, u32)>,
    pub conductors: Vec<u32>,
    pub inflated_conductors: Vec<u32>,
    pub base_conductor: Option<u32>,
}

impl HoweFactorization {
    /// Product of the inflated factors, a character of `T`.
    pub fn reconstruct(&self, psi_t: &Arc<AddChar>) -> Result<MulChar> {
        let mut out = MulChar::trivial(psi_t);
        for f in self.base.iter().chain(self.factors.iter()) {
            out = out.mul(&f.chi.inflate(&f.inclusion, psi_t)?)?;
        }
        Ok(out)
    }

    pub fn summary(&self) -> HoweSummary {
        HoweSummary {
            tower: self.factors.iter().map(|f| (f.spec.f, f.spec.e)).collect(),
            conductors: self.factors.iter().map(|f| f.chi.conductor()).collect(),
            inflated_conductors: self.factors.iter().map(|f| f.inflated_conductor).collect(),
            base_conductor: self.base.as_ref().map(|b| b.chi.conductor()),
        }
    }
}

fn wild_factor(theta: &MulChar, t: &Arc<TowerField>, spec: SubfieldSpec) -> Result<(HoweFactor, MulChar)> {
    let sub = t.subfield(spec)?;
    let rel = Relative::new(&sub.inclusion)?;
    let psi = Arc::new(AddChar::new(&sub.field)?);
    let chi = MulChar::from_gamma(&psi, &rel.project(theta.gamma())?)?;
    let infl = chi.inflate(&sub.inclusion, theta.psi())?;
    let factor = HoweFactor { spec, psi, inclusion: sub.inclusion, chi, inflated_conductor: infl.conductor() };
    Ok((factor, theta.div(&infl)?))
}

/// Howe factorization of an admissible `theta` over the subfield `base`.
pub fn howe_factorize(theta: &MulChar, base: &SubfieldSpec) -> Result<HoweFactorization> {
    if !is_admissible(theta, base)? {
        return Err(Error::NotAdmissible);
    }
    let t = theta.field().clone();
    let top = t.self_spec();
    let mut cur = t.normalize_spec(*base);
    let mut current = theta.clone();
    let mut base_factor = None;
    let mut factors = Vec::new();
    loop {
        if current.conductor() < 2 {
            break;
        }
        let a = current.gamma().leading_root().ok_or(Error::DivisionByZero)?;
        let spec = t.normalize_spec(t.generated_spec(&cur, &[(a, current.gamma().val())])?);
        if spec == top {
            break;
        }
        let (factor, rest) = wild_factor(&current, &t, spec)?;
        if rest.conductor() >= current.conductor() {
            return Err(Error::InternalContradiction("Howe step did not lower the conductor".into()));
        }
        current = rest;
        if spec == cur {
            if base_factor.is_some() || !factors.is_empty() {
                return Err(Error::InternalContradiction("leading term stayed in the current base".into()));
            }
            base_factor = Some(factor);
        } else {
            factors.push(factor);
            cur = spec;
        }
    }
    let psi = theta.psi().clone();
    let last = HoweFactor {
        spec: top,
        psi,
        inclusion: Embedding::identity(&t),
        inflated_conductor: current.conductor(),
        chi: current,
    };
    factors.push(last);
    Ok(HoweFactorization { base: base_factor, factors })
}

/// Automorphisms of `T` fixing the subfield `base` pointwise.
pub fn automorphisms_over(t: &Arc<TowerField>, base: &SubfieldSpec) -> Result<Vec<Embedding>> {
    let sub = t.subfield(*base)?;
    let s = &sub.field;
    let gens = [TowerElement::pi_pow(s, 1), TowerElement::monomial(s, s.m() as i128, 0)];
    let mut out = Vec::new();
    for sigma in automorphisms(t)? {
        let fixes = gens.iter().all(|g| {
            let x = sub.inclusion.apply(g);
            sigma.apply(&x).equals(&x)
        });
        if fixes {
            out.push(sigma);
        }
    }
    Ok(out)
}

/// Whether `theta2 = theta1 o sigma` for some automorphism `sigma` of `T` over `base`.
pub fn is_conjugate(theta1: &MulChar, theta2: &MulChar, base: &SubfieldSpec) -> Result<bool> {
    for sigma in automorphisms_over(theta1.field(), base)? {
        if theta1.conjugate(&sigma)?.same(theta2) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{make_tower, Step};

    #[test]
    fn generic_characters_are_admissible() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        let base = SubfieldSpec { f: 1, e: 1, c: 0 };
        let gamma = TowerElement::pi_pow(&e, -8);
        let th = MulChar::from_gamma(&psi, &gamma).unwrap();
        assert!(is_generic(&th, &base).unwrap());
        assert!(is_admissible(&th, &base).unwrap());
        let h = howe_factorize(&th, &base).unwrap();
        assert_eq!(h.factors.len(), 1);
        assert!(h.reconstruct(&psi).unwrap().same(&th));
    }

    #[test]
    fn inflated_characters_are_not_admissible() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        let base = SubfieldSpec { f: 1, e: 1, c: 0 };
        let th = MulChar::from_gamma(&psi, &TowerElement::pi_pow(&e, -10)).unwrap();
        assert!(!is_admissible(&th, &base).unwrap());
        assert!(matches!(howe_factorize(&th, &base), Err(Error::NotAdmissible)));
    }

    #[test]
    fn two_step_factorization() {
        // T = Q_11(pi), pi^6 = 11, intermediate E_1 of ramification 3
        let t = make_tower(11, &[Step::TameRamified { degree: 6, unit_exp: 0 }], 24).unwrap();
        let psi = Arc::new(AddChar::new(&t).unwrap());
        let base = SubfieldSpec { f: 1, e: 1, c: 0 };
        let gamma = TowerElement::pi_pow(&t, -9).add(&TowerElement::pi_pow(&t, -7));
        let th = MulChar::from_gamma(&psi, &gamma).unwrap();
        assert!(is_admissible(&th, &base).unwrap());
        let h = howe_factorize(&th, &base).unwrap();
        assert!(h.base.is_none());
        assert_eq!(h.factors.len(), 2);
        assert_eq!(h.factors[0].spec.e, 2);
        assert_eq!(h.factors[0].inflated_conductor, 10);
        assert_eq!(h.factors[1].inflated_conductor, 8);
        assert!(h.reconstruct(&psi).unwrap().same(&th));
    }

    #[test]
    fn conjugation_by_galois() {
        let t = make_tower(11, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap();
        let psi = Arc::new(AddChar::new(&t).unwrap());
        let base = SubfieldSpec { f: 1, e: 1, c: 0 };
        let auts = automorphisms_over(&t, &base).unwrap();
        assert_eq!(auts.len(), 5);
        let th = MulChar::from_gamma(&psi, &TowerElement::pi_pow(&t, -3)).unwrap();
        let conj = th.conjugate(&auts[1]).unwrap();
        assert!(is_conjugate(&th, &conj, &base).unwrap());
        let other = MulChar::from_gamma(&psi, &TowerElement::pi_pow(&t, -3).mul_int(2)).unwrap();
        assert!(!is_conjugate(&th, &other, &base).unwrap());
    }
}
