use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{Relative, SubfieldSpec, TowerElement, TowerField};

/// The level-one additive character `psi_T = psi_F o tr_{T/F}`, where
/// `psi_F(x) = exp(2 pi i {x/p})` on `Q_p`: trivial on `pZ_p`, nontrivial on `Z_p`.
pub struct AddChar {
    field: Arc<TowerField>,
    to_base: Option<Relative>,
}

impl std::fmt::Debug for AddChar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "psi[{:?}]", self.field)
    }
}

/// `psi_F` on an element of `Q_p` (a field with `e = f = 1`).
pub fn psi_base(z: &TowerElement) -> Result<Root> {
    let f = z.field();
    debug_assert!(f.e() == 1 && f.f() == 1);
    if z.is_zero() {
        if z.abs_prec() >= 1 {
            return Ok(Root::ONE);
        }
        return Err(Error::PrecisionLoss(format!("additive character argument known only modulo p^{}", z.abs_prec())));
    }
    let v = z.val();
    if v >= 1 {
        return Ok(Root::ONE);
    }
    if z.abs_prec() < 1 {
        return Err(Error::PrecisionLoss(format!("additive character argument known only modulo p^{}", z.abs_prec())));
    }
    let m = (-v) as u32;
    let den = f.p().pow(m + 1);
    let c = z.unit_coeff(0)[0] % den;
    Ok(Root::new(c as i128, den))
}

impl AddChar {
    pub fn new(field: &Arc<TowerField>) -> Result<AddChar> {
        let to_base = if field.e() == 1 && field.f() == 1 {
            None
        } else {
            let base = field.subfield(SubfieldSpec { f: 1, e: 1, c: 0 })?;
            Some(Relative::new(&base.inclusion)?)
        };
        Ok(AddChar { field: field.clone(), to_base })
    }

    pub fn field(&self) -> &Arc<TowerField> {
        &self.field
    }

    /// `tr_{T/Q_p}`.
    pub fn trace_to_base(&self, x: &TowerElement) -> TowerElement {
        match &self.to_base {
            None => x.clone(),
            Some(rel) => rel.trace(x),
        }
    }

    pub fn eval(&self, x: &TowerElement) -> Result<Root> {
        if x.is_exact_zero() || (x.val() >= 1 && !x.is_zero()) {
            return Ok(Root::ONE);
        }
        if x.is_zero() && x.abs_prec() >= 1 {
            return Ok(Root::ONE);
        }
        psi_base(&self.trace_to_base(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{make_tower, Step};

    #[test]
    fn level_one() {
        let f = make_tower(7, &[], 6).unwrap();
        let psi = AddChar::new(&f).unwrap();
        assert!(psi.eval(&TowerElement::from_int(&f, 7)).unwrap().is_one());
        assert!(psi.eval(&TowerElement::from_int(&f, 0)).unwrap().is_one());
        assert_eq!(psi.eval(&TowerElement::from_int(&f, 1)).unwrap(), Root::new(1, 7));
        let x = TowerElement::pi_pow(&f, -1).mul_int(3);
        assert_eq!(psi.eval(&x).unwrap(), Root::new(3, 49));
    }

    #[test]
    fn extension_orders() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 12).unwrap();
        let psi = AddChar::new(&e).unwrap();
        for c in 2..10i64 {
            let x = TowerElement::pi_pow(&e, 1 - c).mul_zeta(2);
            let r = psi.eval(&x).unwrap();
            let bound = 7u64.pow(((c - 1) as u32).div_ceil(5) + 1);
            assert_eq!(bound % r.order(), 0);
        }
    }
}
