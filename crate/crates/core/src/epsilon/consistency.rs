use std::collections::BTreeMap;

use serde::Serialize;

use super::oracle::oracle_sum;
use super::{moy_epsilon, Parity};
use crate::character::MulChar;
use crate::error::{Error, Result};
use crate::exact::{embed_complex, ScaledCyc};
use crate::local::TowerElement;

/// The ratio `moy / oracle` observed for one conductor class.
#[derive(Clone, Debug, Serialize)]
pub struct ClassConstant {
    pub conductor: u32,
    pub parity: Parity,
    pub constant: ScaledCyc,
    pub approx: String,
    pub samples: usize,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub classes: Vec<ClassConstant>,
    /// Conductors where Moy's formula depended on the representative of `c_theta`.
    pub excluded: Vec<u32>,
    pub all_consistent: bool,
}

impl ConsistencyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("conductor,parity,constant,samples,consistent\n");
        for c in &self.classes {
            out.push_str(&format!("{},{:?},{},{},{}\n", c.conductor, c.parity, c.approx, c.samples, c.consistent));
        }
        out
    }

    pub fn constant(&self, conductor: u32) -> Option<&ScaledCyc> {
        self.classes.iter().find(|c| c.conductor == conductor).map(|c| &c.constant)
    }
}

/// For each character computes `moy_epsilon / oracle_sum(theta, pi^(1-c))` and checks that the
/// ratio depends only on the conductor class.
pub fn moy_oracle_consistency(thetas: &[MulChar], budget: u64) -> Result<ConsistencyReport> {
    let mut by_class: BTreeMap<u32, (ScaledCyc, usize, bool)> = BTreeMap::new();
    let mut excluded = Vec::new();
    for th in thetas {
        let c = th.conductor();
        if excluded.contains(&c) {
            continue;
        }
        let moy = match moy_epsilon(th) {
            Ok(m) => m,
            Err(Error::InternalContradiction(_)) => {
                excluded.push(c);
                by_class.remove(&c);
                continue;
            }
            Err(e) => return Err(e),
        };
        let delta = TowerElement::pi_pow(th.field(), 1 - c as i64);
        let oracle = oracle_sum(th, &delta, budget)?;
        let ratio = moy.value.div(&oracle)?.normalize();
        match by_class.get_mut(&c) {
            None => {
                by_class.insert(c, (ratio, 1, true));
            }
            Some(entry) => {
                entry.1 += 1;
                if !entry.0.eq_exact(&ratio)? {
                    entry.2 = false;
                }
            }
        }
    }
    let classes: Vec<ClassConstant> = by_class
        .into_iter()
        .map(|(c, (k, n, ok))| {
            let z = embed_complex(&k, 96);
            ClassConstant { conductor: c, parity: Parity::of(c), approx: z.render(6), constant: k, samples: n, consistent: ok }
        })
        .collect();
    let all_consistent = classes.iter().all(|c| c.consistent);
    Ok(ConsistencyReport { classes, excluded, all_consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::AddChar;
    use crate::local::make_tower;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn base_field_constants() {
        let f = make_tower(7, &[], 10).unwrap();
        let psi = Arc::new(AddChar::new(&f).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let thetas: Vec<MulChar> = (0..24).map(|i| MulChar::random(&psi, 2 + i % 3, 6, &mut rng).unwrap()).collect();
        let rep = moy_oracle_consistency(&thetas, 1 << 22).unwrap();
        assert!(rep.excluded.is_empty(), "{:?}", rep);
        assert!(rep.all_consistent, "{:?}", rep);
    }
}
