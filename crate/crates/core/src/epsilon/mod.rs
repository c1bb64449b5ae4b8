//! Epsilon factors of characters: Moy's closed form, Gauss sums, and a brute-force oracle.
pub mod consistency;
pub mod oracle;

use serde::Serialize;

use crate::character::Character;
use crate::error::{Error, Result};
use crate::exact::{Root, ScaledCyc};
use crate::local::TowerElement;

pub use consistency::{moy_oracle_consistency, ClassConstant, ConsistencyReport};
pub use oracle::{oracle_sum, DEFAULT_TERM_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Moy,
    Oracle,
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(c: u32) -> Parity {
        if c % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// An epsilon factor at `s = 0` together with how it was obtained.
#[derive(Clone, Serialize)]
pub struct EpsilonValue {
    pub value: ScaledCyc,
    pub conductor: u32,
    pub parity: Parity,
    pub provenance: Provenance,
}

impl std::fmt::Debug for EpsilonValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "eps[{:?}, c={}]={:?}", self.provenance, self.conductor, self.value)
    }
}

/// `q^(-1/2) sum_{x in U^n / U^(n+1)} theta^-1(x) psi(c (x - 1))` for odd conductor `2n + 1`,
/// over the representatives `x = 1 + [b] pi^n`.
pub fn gauss_sum_with(theta: &dyn Character, c_theta: &TowerElement) -> Result<ScaledCyc> {
    let cond = theta.conductor();
    if cond % 2 == 0 || cond < 3 {
        return Err(Error::EvenConductor(cond));
    }
    let n = ((cond - 1) / 2) as i64;
    let f = theta.field();
    let q = f.q();
    let one = TowerElement::one(f);
    let mut roots = vec![Root::ONE];
    for k in 0..q - 1 {
        let d = TowerElement::monomial(f, (k * f.m()) as i128, n);
        let x = one.add(&d);
        roots.push(theta.eval(&x)?.inv().mul(&theta.psi().eval(&c_theta.mul(&d))?));
    }
    Ok(ScaledCyc::new(sum_roots(&roots)?, -1, q))
}

/// Gauss sum with the canonical `c_theta`.
pub fn gauss_sum(theta: &dyn Character) -> Result<ScaledCyc> {
    gauss_sum_with(theta, &theta.c_theta()?)
}

/// Exact sum of roots of unity.
pub fn sum_roots(roots: &[Root]) -> Result<crate::exact::CycNumber> {
    let mut m = 1u64;
    for r in roots {
        m = num_integer::lcm(m, r.order());
    }
    let mut counts = vec![0i64; m as usize];
    for r in roots {
        counts[r.exponent_in(m) as usize] += 1;
    }
    Ok(crate::exact::CycNumber::from_counts(m, &counts))
}

/// Moy's formula evaluated with a given representative `c` of `c_theta`:
/// `theta^-1(c) psi(c) |c|^(1/2)`, times the Gauss sum when the conductor is odd.
pub fn moy_epsilon_with(theta: &dyn Character, c: &TowerElement) -> Result<EpsilonValue> {
    let cond = theta.conductor();
    if cond < 2 {
        return Err(Error::ConductorTooSmall(cond));
    }
    let q = theta.field().q();
    let lead = theta.eval(c)?.inv().mul(&theta.psi().eval(c)?);
    let mut value = ScaledCyc::new(crate::exact::CycNumber::from_root(&lead), cond as i64 - 1, q);
    if cond % 2 == 1 {
        value = value.mul(&gauss_sum_with(theta, c)?)?;
    }
    Ok(EpsilonValue { value, conductor: cond, parity: Parity::of(cond), provenance: Provenance::Moy })
}

/// Moy's formula with the canonical representative, checked against a second representative
/// `c_theta + zeta_T pi^(1 - r)`; a mismatch is reported as `InternalContradiction`.
pub fn moy_epsilon(theta: &dyn Character) -> Result<EpsilonValue> {
    let c = theta.c_theta()?;
    let eps = moy_epsilon_with(theta, &c)?;
    let r = ((theta.conductor() + 1) / 2) as i64;
    let f = theta.field();
    let alt = c.add(&TowerElement::monomial(f, f.m() as i128, 1 - r));
    let eps2 = moy_epsilon_with(theta, &alt)?;
    if !eps.value.eq_exact(&eps2.value)? {
        return Err(Error::InternalContradiction(format!(
            "Moy's formula depends on the representative of c_theta at conductor {}",
            theta.conductor()
        )));
    }
    Ok(eps)
}

/// `eps(theta1) / eps(theta2)` from Moy's formula. Requires equal conductors and equal `c_theta`.
pub fn epsilon_ratio(theta1: &dyn Character, theta2: &dyn Character) -> Result<EpsilonValue> {
    let c1 = theta1.conductor();
    if c1 != theta2.conductor() {
        return Err(Error::ConductorMismatch(format!("{} vs {}", c1, theta2.conductor())));
    }
    let a = theta1.c_theta()?;
    let b = theta2.c_theta()?;
    if !a.equals(&b) {
        return Err(Error::ConductorMismatch("c_theta differs".into()));
    }
    let value = moy_epsilon(theta1)?.value.div(&moy_epsilon(theta2)?.value)?;
    Ok(EpsilonValue { value, conductor: c1, parity: Parity::of(c1), provenance: Provenance::Ratio })
}

/// The character-value quotient `theta1(c) / theta2(c)` at the shared `c_theta`, the simplified
/// form of the epsilon ratio when the Gauss sums agree.
pub fn character_quotient(theta1: &dyn Character, theta2: &dyn Character) -> Result<Root> {
    let c = theta1.c_theta()?;
    Ok(theta1.eval(&c)?.div(&theta2.eval(&c)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::{AddChar, MulChar};
    use crate::exact::embed_complex;
    use crate::local::{make_tower, Step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn gauss_sums_have_modulus_one() {
        let e = make_tower(7, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for c in [3u32, 5, 7, 9] {
            let th = MulChar::random(&psi, c, 6, &mut rng).unwrap();
            let g = gauss_sum(&th).unwrap();
            let z = embed_complex(&g, 96);
            assert!((z.abs() - 1.0).abs() < 1e-9, "c={} |G|={}", c, z.abs());
        }
    }

    #[test]
    fn ratio_of_equal_characters_is_one() {
        let f = make_tower(7, &[], 10).unwrap();
        let psi = Arc::new(AddChar::new(&f).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let th = MulChar::random(&psi, 4, 6, &mut rng).unwrap();
        let r = epsilon_ratio(&th, &th).unwrap();
        assert!(r.value.eq_exact(&ScaledCyc::one(7)).unwrap());
    }
}
