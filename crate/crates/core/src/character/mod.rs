//! Additive and multiplicative characters of tame extensions.
pub mod addchar;
pub mod composite;
pub mod mulchar;
pub mod structure;

use std::sync::Arc;

use crate::error::Result;
use crate::exact::Root;
use crate::local::{TowerElement, TowerField};

pub use addchar::AddChar;
pub use composite::CompositeChar;
pub use mulchar::{conductor_by_scan, random_gamma, CharData, MulChar};
pub use structure::{
    automorphisms_over, factors_through, howe_factorize, is_admissible, is_conjugate, is_generic, HoweFactor,
    HoweFactorization, HoweSummary,
};

/// A quasi-character of `T^x` with a level-one additive character and a representative
/// `gamma` (modulo `O_T`) of its restriction to the principal units.
pub trait Character: Send + Sync {
    fn field(&self) -> &Arc<TowerField>;
    fn psi(&self) -> &Arc<AddChar>;
    fn eval(&self, x: &TowerElement) -> Result<Root>;
    fn gamma(&self) -> &TowerElement;
    fn conductor(&self) -> u32;

    /// Canonical representative of `c_theta` modulo `P^(1 - floor((c + 1) / 2))`, at full field
    /// precision.
    fn c_theta(&self) -> Result<TowerElement> {
        let c = self.conductor();
        if c < 2 {
            return Err(crate::error::Error::ConductorTooSmall(c));
        }
        let r = ((c + 1) / 2) as i64;
        Ok(self.gamma().truncate_abs(1 - r).extend_prec(self.field().prec()))
    }

    /// Exponent `t` with `theta(zeta_T) = e(t / (q_T - 1))`.
    fn tame_exponent(&self) -> Result<u64> {
        let f = self.field();
        let z = TowerElement::monomial(f, f.m() as i128, 0);
        Ok(self.eval(&z)?.exponent_in(f.q() - 1))
    }
}
