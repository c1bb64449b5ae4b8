use std::fmt;
use std::sync::Arc;

use super::addchar::AddChar;
use super::mulchar::MulChar;
use super::Character;
use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{Embedding, Relative, TowerElement, TowerField};

/// `prod_i theta_i o N_{K/S_i}` for characters `theta_i` of subfields `S_i` of `K`, evaluated
/// through norms so that `K` itself needs no logarithm.
pub struct CompositeChar {
    psi: Arc<AddChar>,
    parts: Vec<(MulChar, Arc<Relative>)>,
    gamma: TowerElement,
}

impl fmt::Debug for CompositeChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "composite[{} parts, gamma={:?}]", self.parts.len(), self.gamma)
    }
}

impl CompositeChar {
    pub fn new(psi: &Arc<AddChar>, parts: Vec<(MulChar, Embedding)>) -> Result<CompositeChar> {
        let mut rels = Vec::new();
        for (chi, emb) in parts {
            rels.push((chi, Arc::new(Relative::new(&emb)?)));
        }
        CompositeChar::from_relatives(psi, rels)
    }

    /// Same as [`CompositeChar::new`] with the relative structures already built.
    pub fn from_relatives(psi: &Arc<AddChar>, parts: Vec<(MulChar, Arc<Relative>)>) -> Result<CompositeChar> {
        let k = psi.field().clone();
        let mut gamma = TowerElement::zero(&k);
        for (chi, rel) in &parts {
            let emb = rel.embedding();
            if !emb.target().same_as(&k) || !emb.source().same_as(chi.field()) {
                return Err(Error::FieldMismatch("composite part along a mismatched embedding".into()));
            }
            gamma = gamma.add(&emb.apply(chi.gamma()));
        }
        let gamma = if gamma.is_zero() || gamma.val() >= 0 { TowerElement::zero(&k) } else { gamma.truncate_abs(0) };
        Ok(CompositeChar { psi: psi.clone(), parts, gamma })
    }

    /// Replaces one part's character (same field) and keeps the rest.
    pub fn with_part(&self, index: usize, chi: MulChar) -> Result<CompositeChar> {
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, (c, r))| (if i == index { chi.clone() } else { c.clone() }, r.clone()))
            .collect();
        CompositeChar::from_relatives(&self.psi, parts)
    }
}

impl Character for CompositeChar {
    fn field(&self) -> &Arc<TowerField> {
        self.psi.field()
    }

    fn psi(&self) -> &Arc<AddChar> {
        &self.psi
    }

    fn eval(&self, x: &TowerElement) -> Result<Root> {
        let mut r = Root::ONE;
        for (chi, rel) in &self.parts {
            r = r.mul(&chi.eval(&rel.norm(x)?)?);
        }
        Ok(r)
    }

    fn gamma(&self) -> &TowerElement {
        &self.gamma
    }

    fn conductor(&self) -> u32 {
        if !self.gamma.is_zero() {
            return (1 - self.gamma.val()) as u32;
        }
        match self.tame_exponent() {
            Ok(0) => 0,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{make_tower, Step, SubfieldSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_inflation() {
        let e = make_tower(11, &[Step::TameRamified { degree: 6, unit_exp: 0 }], 24).unwrap();
        let psi_e = Arc::new(AddChar::new(&e).unwrap());
        let sub = e.subfield(SubfieldSpec { f: 1, e: 2, c: 0 }).unwrap();
        let psi_s = Arc::new(AddChar::new(&sub.field).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let chi = MulChar::random(&psi_s, 4, 10, &mut rng).unwrap();
        let comp = CompositeChar::new(&psi_e, vec![(chi.clone(), sub.inclusion.clone())]).unwrap();
        let infl = chi.inflate(&sub.inclusion, &psi_e).unwrap();
        assert_eq!(Character::conductor(&comp), infl.conductor());
        let one = TowerElement::one(&e);
        for j in 1..8 {
            let x = one.add(&TowerElement::monomial(&e, 3, j)).shift(j - 3);
            assert_eq!(comp.eval(&x).unwrap(), infl.eval(&x).unwrap());
        }
    }
}
