use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::SharpnessConfig;
use crate::character::structure::{howe_factorize, is_admissible, is_conjugate, HoweSummary};
use crate::character::{AddChar, MulChar};
use crate::error::{Error, Result};
use crate::exact::Root;
use crate::local::{make_tower, Step, SubfieldSpec, TowerElement, TowerField};

/// The base field `F` as a subfield spec of `E`.
pub const BASE: SubfieldSpec = SubfieldSpec { f: 1, e: 1, c: 0 };

/// Mechanically checked properties of a constructed pair.
#[derive(Clone, Debug, Serialize)]
pub struct PairChecks {
    pub agree_uniformizer: bool,
    pub agree_teichmuller: bool,
    pub agree_layer_two: bool,
    pub differ_layer_one: bool,
    pub admissible: [bool; 2],
    pub conductors: [u32; 2],
    pub difference_conductor: u32,
    pub conjugate: bool,
}

impl PairChecks {
    /// All construction postconditions for a pair of conductor `2N - 1`.
    pub fn all_hold(&self, n: u32) -> bool {
        self.agree_uniformizer
            && self.agree_teichmuller
            && self.agree_layer_two
            && self.differ_layer_one
            && self.admissible == [true, true]
            && self.conductors == [2 * n - 1, 2 * n - 1]
            && self.difference_conductor == 2
            && !self.conjugate
    }
}

/// Two characters of a totally ramified `E / F` of degree `N` that agree on `pi_E`, on the
/// Teichmüller units and on `1 + P_E^2`, and differ on `1 + P_E`.
#[derive(Clone, Debug)]
pub struct PhiPair {
    /// Parameters the pair was built from, with the selector that was used.
    pub config: SharpnessConfig,
    pub field: Arc<TowerField>,
    pub psi: Arc<AddChar>,
    pub n: u32,
    pub ell: Option<u32>,
    /// `beta`, the standard representative shared by both characters.
    pub beta: TowerElement,
    pub phi1: MulChar,
    pub phi2: MulChar,
    pub selector: u64,
    /// Residue indices of the perturbations on `1 + P_E^2` applied to `phi2`, if any.
    pub mutations: Vec<u64>,
    pub checks: PairChecks,
    pub howe: HoweSummary,
}

/// `1 + x -> psi(zeta^a pi^v x)` with trivial tame part and `pi -> 1`.
pub fn layer_character(psi: &Arc<AddChar>, a: u64, v: i64) -> Result<MulChar> {
    let e = psi.field();
    MulChar::new(psi, Root::ONE, 0, &TowerElement::monomial(e, (a * e.m()) as i128, v))
}

/// The character `phi` of conductor `2N - 1`: for odd `N` the one with standard representative
/// `pi_E^(2 - 2N)`; for even `N` the product `(phi_1 o N_{E/E_1}) phi_2` over
/// `E_1 = F[pi_E^2]` with representatives `pi_(E_1)^(1 - N)` and `pi_E^(-ell)`.
pub fn build_phi(psi: &Arc<AddChar>, ell: Option<u32>) -> Result<MulChar> {
    let e = psi.field().clone();
    let n = e.e();
    if e.f() != 1 {
        return Err(Error::ConfigInvalid("E must be totally ramified over F".into()));
    }
    if n % 2 == 1 {
        return MulChar::new(psi, Root::ONE, 0, &TowerElement::pi_pow(&e, 2 - 2 * n as i64));
    }
    let ell = ell.ok_or_else(|| Error::ConfigInvalid("even N needs ell".into()))?;
    let e1 = e.subfield(SubfieldSpec { f: 1, e: n / 2, c: 0 })?;
    let psi1 = Arc::new(AddChar::new(&e1.field)?);
    let phi_1 = MulChar::new(&psi1, Root::ONE, 0, &TowerElement::pi_pow(&e1.field, 1 - n as i64))?;
    let phi_2 = MulChar::new(psi, Root::ONE, 0, &TowerElement::pi_pow(&e, -(ell as i64)))?;
    phi_1.inflate(&e1.inclusion, psi)?.mul(&phi_2)
}

/// Builds `E = F[pi^(1/N)]` at the configured precision and the pair on it.
pub fn build_phi_pair(config: &SharpnessConfig) -> Result<PhiPair> {
    config.validate()?;
    let e = make_tower(config.p, &[Step::TameRamified { degree: config.n, unit_exp: 0 }], config.precision)?;
    let psi = Arc::new(AddChar::new(&e)?);
    let mut pair = build_phi_pair_on(&psi, config.ell, config.selector, config.seed)?;
    pair.config.conductor_bound = config.conductor_bound;
    Ok(pair)
}

/// Builds the pair on a given totally ramified `E`. Without a selector the `q - 1` conductor-2
/// twists are tried in seeded order until one gives an admissible, non-conjugate partner.
pub fn build_phi_pair_on(psi: &Arc<AddChar>, ell: Option<u32>, selector: Option<u64>, seed: u64) -> Result<PhiPair> {
    let e = psi.field().clone();
    let n = e.e();
    let phi = build_phi(psi, ell)?;
    let candidates: Vec<u64> = match selector {
        Some(a) => vec![a],
        None => {
            let mut all: Vec<u64> = (0..e.q() - 1).collect();
            all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            all
        }
    };
    let howe = howe_factorize(&phi, &BASE)?.summary();
    for a in candidates {
        let phi2 = phi.mul(&layer_character(psi, a, -1)?)?;
        let checks = pair_checks(&phi, &phi2)?;
        if checks.all_hold(n) {
            let config = SharpnessConfig {
                p: e.p(),
                n,
                ell,
                selector: Some(a),
                conductor_bound: 0,
                precision: e.prec(),
                seed,
            };
            return Ok(PhiPair {
                config,
                field: e.clone(),
                psi: psi.clone(),
                n,
                ell,
                beta: phi.gamma().extend_prec(e.prec()),
                phi1: phi.clone(),
                phi2,
                selector: a,
                mutations: Vec::new(),
                checks,
                howe,
            });
        }
    }
    Err(Error::ConfigInvalid("no selector yields an admissible non-conjugate pair".into()))
}

/// Value comparisons, admissibility, conductors and conjugacy for a candidate pair.
pub fn pair_checks(phi1: &MulChar, phi2: &MulChar) -> Result<PairChecks> {
    let e = phi1.field();
    let q1 = e.q() - 1;
    let m = e.m() as i128;
    let pi = TowerElement::pi_pow(e, 1);
    let agree_uniformizer = phi1.eval(&pi)? == phi2.eval(&pi)?;
    let zeta = TowerElement::monomial(e, m, 0);
    let agree_teichmuller = phi1.eval(&zeta)? == phi2.eval(&zeta)?;
    let one = TowerElement::one(e);
    let top = phi1.conductor().max(phi2.conductor()).max(3);
    let mut agree_layer_two = true;
    let mut differ_layer_one = false;
    for j in 1..top as i64 {
        for k in 0..q1 as i128 {
            let x = one.add(&TowerElement::monomial(e, k * m, j));
            let same = phi1.eval(&x)? == phi2.eval(&x)?;
            if j == 1 {
                differ_layer_one |= !same;
            } else {
                agree_layer_two &= same;
            }
        }
    }
    Ok(PairChecks {
        agree_uniformizer,
        agree_teichmuller,
        agree_layer_two,
        differ_layer_one,
        admissible: [is_admissible(phi1, &BASE)?, is_admissible(phi2, &BASE)?],
        conductors: [phi1.conductor(), phi2.conductor()],
        difference_conductor: phi1.div(phi2)?.conductor(),
        conjugate: is_conjugate(phi1, phi2, &BASE)?,
    })
}

impl PhiPair {
    /// The pair with `phi2` multiplied by `1 + x -> psi(zeta^a pi^-2 x)`, which changes it on
    /// `1 + P_E^2`. Construction checks are recomputed and will report the disagreement.
    pub fn mutated(&self, a: u64) -> Result<PhiPair> {
        let phi2 = self.phi2.mul(&layer_character(&self.psi, a, -2)?)?;
        let checks = pair_checks(&self.phi1, &phi2)?;
        let mut mutations = self.mutations.clone();
        mutations.push(a);
        Ok(PhiPair { phi2, checks, mutations, ..self.clone() })
    }

    /// Undoes all mutations.
    pub fn restored(&self) -> Result<PhiPair> {
        let mut phi2 = self.phi2.clone();
        for a in &self.mutations {
            phi2 = phi2.div(&layer_character(&self.psi, *a, -2)?)?;
        }
        let checks = pair_checks(&self.phi1, &phi2)?;
        Ok(PhiPair { phi2, checks, mutations: Vec::new(), ..self.clone() })
    }

    pub fn is_mutated(&self) -> bool {
        !self.mutations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_pair() {
        let pair = build_phi_pair(&SharpnessConfig::new(7, 5)).unwrap();
        assert!(pair.checks.all_hold(5), "{:?}", pair.checks);
        assert_eq!(pair.howe.tower.len(), 1);
        let bad = pair.mutated(1).unwrap();
        assert!(!bad.checks.agree_layer_two);
        assert!(bad.restored().unwrap().checks.all_hold(5));
    }
}
