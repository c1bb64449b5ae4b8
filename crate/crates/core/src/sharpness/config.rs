use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::context::is_prime;

/// Parameters of the twin-character construction and of the checks run on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub p: u64,
    pub n: u32,
    /// Exponent of the second Howe factor; required iff `n` is even.
    pub ell: Option<u32>,
    /// Residue index `a` of the conductor-2 character `1 + x -> psi(zeta^a pi^-1 x)` separating
    /// the two characters. `None` searches for one.
    pub selector: Option<u64>,
    /// Largest conductor of the twisting characters.
    pub conductor_bound: u32,
    /// Relative precision of `E`.
    pub precision: u32,
    pub seed: u64,
}

impl SharpnessConfig {
    pub fn new(p: u64, n: u32) -> SharpnessConfig {
        SharpnessConfig {
            p,
            n,
            ell: if n % 2 == 0 { Some(default_ell(n)) } else { None },
            selector: None,
            conductor_bound: 3,
            precision: 2 * n + 2,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::ConfigInvalid(format!("p = {} is not prime", self.p)));
        }
        if self.n < 5 {
            return Err(Error::ConfigInvalid(format!("N = {} must be at least 5", self.n)));
        }
        if self.p - 1 <= self.n as u64 {
            return Err(Error::ConfigInvalid(format!("need p - 1 > N, got p = {}, N = {}", self.p, self.n)));
        }
        match (self.n % 2, self.ell) {
            (0, None) => return Err(Error::ConfigInvalid("even N needs ell".into())),
            (0, Some(l)) => {
                if l < 2 || l >= self.n || num_integer::gcd(l, self.n) != 1 {
                    return Err(Error::ConfigInvalid(format!("ell = {} must lie in [2, N - 1] and be coprime to N = {}", l, self.n)));
                }
            }
            (_, Some(_)) => return Err(Error::ConfigInvalid("ell is only used for even N".into())),
            _ => {}
        }
        if let Some(a) = self.selector {
            if a >= self.p - 1 {
                return Err(Error::ConfigInvalid(format!("selector {} must be below q - 1 = {}", a, self.p - 1)));
            }
        }
        if self.precision < 2 * self.n {
            return Err(Error::PrecisionLoss(format!("precision {} is below 2N = {}", self.precision, 2 * self.n)));
        }
        Ok(())
    }
}

/// Largest `ell < N` coprime to `N`.
pub fn default_ell(n: u32) -> u32 {
    (2..n).rev().find(|l| num_integer::gcd(*l, n) == 1).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SharpnessConfig::new(7, 5).validate().is_ok());
        assert!(SharpnessConfig::new(11, 6).validate().is_ok());
        assert_eq!(SharpnessConfig::new(11, 6).ell, Some(5));
        assert!(SharpnessConfig::new(7, 4).validate().is_err());
        assert!(SharpnessConfig::new(7, 6).validate().is_err());
        let mut c = SharpnessConfig::new(11, 6);
        c.ell = Some(3);
        assert!(c.validate().is_err());
        let mut c = SharpnessConfig::new(7, 5);
        c.precision = 4;
        assert!(matches!(c.validate(), Err(Error::PrecisionLoss(_))));
    }
}
