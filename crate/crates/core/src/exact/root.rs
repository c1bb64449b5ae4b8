use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// A root of unity `exp(2 pi i num / den)`, stored as a reduced fraction in `[0, 1)`.
///
/// Character values are always roots of unity, so products and quotients of
/// character values stay in this type and compare exactly without touching the
/// cyclotomic ring.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    num: u64,
    den: u64,
}

impl Root {
    pub const ONE: Root = Root { num: 0, den: 1 };

    pub fn new(num: i128, den: u64) -> Root {
        assert!(den > 0, "root of unity with zero order");
        let d = den as i128;
        let n = num.rem_euclid(d) as u64;
        let g = n.gcd(&den);
        Root { num: n / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    /// Order of the root.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn mul(&self, other: &Root) -> Root {
        let l = self.den.lcm(&other.den);
        let a = self.num as i128 * (l / self.den) as i128 + other.num as i128 * (l / other.den) as i128;
        Root::new(a, l)
    }

    pub fn inv(&self) -> Root {
        Root::new(-(self.num as i128), self.den)
    }

    pub fn div(&self, other: &Root) -> Root {
        self.mul(&other.inv())
    }

    pub fn pow(&self, k: i128) -> Root {
        let n = (self.num as i128 * k.rem_euclid(self.den as i128)) % self.den as i128;
        Root::new(n, self.den)
    }

    /// Exponent of this root with respect to a primitive `m`-th root; `m` must be a multiple of the order.
    pub fn exponent_in(&self, m: u64) -> u64 {
        assert!(m % self.den == 0, "order {} does not divide {}", self.den, m);
        self.num * (m / self.den)
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let t = std::f64::consts::TAU * self.num as f64 / self.den as f64;
        (t.cos(), t.sin())
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({}/{})", self.num, self.den)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Root::new(1, 8);
        assert_eq!(a.mul(&a), Root::new(1, 4));
        assert_eq!(a.pow(8), Root::ONE);
        assert_eq!(a.mul(&a.inv()), Root::ONE);
        assert_eq!(Root::new(-1, 6).num(), 5);
        assert_eq!(Root::new(3, 6), Root::new(1, 2));
        assert_eq!(Root::new(1, 3).exponent_in(12), 4);
    }
}
