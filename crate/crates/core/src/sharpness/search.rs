use std::time::Instant;

use serde::Serialize;

use super::construct::PhiPair;
use super::cosets::{double_cosets, Ambient};
use super::pairs::{pairs_at, tame_extensions, AdmissiblePair, PairSummary};
use super::verify::{route_a, Equ6Context, ExactValue};
use crate::epsilon::epsilon_ratio;
use crate::error::{Error, Result};
use crate::exact::Root;

/// A twisting pair whose coset product of epsilon ratios is not 1.
#[derive(Clone, Debug, Serialize)]
pub struct Distinguisher {
    pub pair: PairSummary,
    /// `prod_g eps(theta_g^(1)) / eps(theta_g^(2))`.
    pub epsilon_ratio: ExactValue,
    /// `prod_g phi_1(N(beta + alpha)) / phi_2(N(beta + alpha))`, the direct route.
    pub route_a_quotient: ExactValue,
    /// The ratio equals the route-A quotient or its inverse, and both differ from 1.
    pub confirmed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub r: u32,
    pub conductor_bound: u32,
    pub examined: usize,
    pub found: Option<Distinguisher>,
    /// Pairs skipped because an epsilon ratio was not a root of unity or the coset
    /// characters had different `c`-data.
    pub skipped: Vec<String>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// `prod_g eps(theta_g^(1)) / eps(theta_g^(2))` over the double cosets, from Moy's formula on
/// each compositum; every factor must be a root of unity.
pub fn coset_ratio(ctx: &Equ6Context, ap: &AdmissiblePair) -> Result<Root> {
    let mut prod = Root::ONE;
    for idx in 0..ctx.cosets.len() {
        let t1 = ctx.composite(idx, &ctx.pair.phi1, &ap.lambda)?;
        let t2 = ctx.composite(idx, &ctx.pair.phi2, &ap.lambda)?;
        let r = epsilon_ratio(&t1, &t2)?;
        let root = r
            .value
            .normalize()
            .as_root()
            .ok_or_else(|| Error::InternalContradiction(format!("epsilon ratio {:?} is not a root of unity", r.value)))?;
        prod = prod.mul(&root);
    }
    Ok(prod)
}

/// Scans the degree-`r` pairs in order of conductor (then extension) up to `conductor_bound`
/// and returns the first one whose epsilon-ratio product differs from 1, re-checked against
/// the direct coset product.
pub fn search_distinguisher(pair: &PhiPair, ambient: &Ambient, r: u32, conductor_bound: u32, digits_l: u32) -> Result<SearchOutcome> {
    let start = Instant::now();
    if !ambient.e.field.same_as(&pair.field) {
        return Err(Error::FieldMismatch("pair is not built on the ambient's E".into()));
    }
    let ls: Vec<_> = tame_extensions(&ambient.ctx, r, digits_l)?.into_iter().filter(|l| l.shape.supported(pair.n)).collect();
    let mut cosets = Vec::new();
    for l in &ls {
        cosets.push(double_cosets(ambient, &l.field)?);
    }
    let mut examined = 0;
    let mut skipped = Vec::new();
    for m in 0..conductor_bound {
        for (l, cs) in ls.iter().zip(&cosets) {
            let ctx = Equ6Context::new(pair, cs, &l.field, false)?;
            for ap in pairs_at(l, m)? {
                examined += 1;
                let ratio = match coset_ratio(&ctx, &ap) {
                    Ok(r) => r,
                    Err(Error::InternalContradiction(_)) | Err(Error::ConductorMismatch(_)) => {
                        skipped.push(ap.id.clone());
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if ratio.is_one() {
                    continue;
                }
                let direct = route_a(&ctx, &ap)?;
                let quotient = direct[0].div(&direct[1]);
                let confirmed = !quotient.is_one() && (quotient == ratio || quotient == ratio.inv());
                return Ok(SearchOutcome {
                    r,
                    conductor_bound,
                    examined,
                    found: Some(Distinguisher {
                        pair: ap.summary(),
                        epsilon_ratio: ExactValue::root(&ratio),
                        route_a_quotient: ExactValue::root(&quotient),
                        confirmed,
                    }),
                    skipped,
                    elapsed_ms: start.elapsed().as_millis(),
                });
            }
        }
    }
    Ok(SearchOutcome { r, conductor_bound, examined, found: None, skipped, elapsed_ms: start.elapsed().as_millis() })
}
