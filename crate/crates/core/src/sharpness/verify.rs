use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::cases::{classify_case, CaseInfo, CaseLabel};
use super::config::SharpnessConfig;
use super::construct::{PhiPair, BASE};
use super::cosets::{double_cosets, mackey_dimension, Ambient, CosetDatum, CosetSummary};
use super::pairs::{pairs_at, tame_extensions, AdmissiblePair, PairSummary};
use crate::character::{conductor_by_scan, AddChar, Character, CompositeChar, MulChar};
use crate::epsilon::{character_quotient, epsilon_ratio, moy_epsilon};
use crate::error::{Error, Result};
use crate::exact::{embed_complex, Root, ScaledCyc};
use crate::local::{embeddings, Embedding, Relative, TowerElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// An exact value with a 15-digit complex rendering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub approx: String,
}

impl ExactValue {
    pub fn root(r: &Root) -> ExactValue {
        let (re, im) = r.to_complex();
        ExactValue { exact: format!("{:?}", r), approx: format!("{:.15} {:+.15}i", re, im) }
    }

    pub fn scaled(s: &ScaledCyc) -> ExactValue {
        ExactValue { exact: format!("{:?}", s), approx: embed_complex(s, 128).render(15) }
    }
}

/// Per-coset record of an equ6 check.
#[derive(Clone, Debug, Serialize)]
pub struct CosetValues {
    pub coset: CosetSummary,
    /// `phi_i(N_{K/E}(beta + alpha))` for `i = 1, 2`.
    pub values: [ExactValue; 2],
    pub expected_conductor: u32,
    pub conductors: [u32; 2],
    pub scanned_conductor: Option<u32>,
    pub c_data_agree: bool,
    pub layer_criterion: bool,
}

/// Machine-readable record of one sharpness check.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config: SharpnessConfig,
    pub mutations: Vec<u64>,
    pub level: String,
    pub pair_id: String,
    pub pair: Option<PairSummary>,
    pub case: Option<CaseInfo>,
    pub cosets: Vec<CosetValues>,
    pub route_a: Vec<ExactValue>,
    pub route_b: Vec<ExactValue>,
    /// Route-A products as roots of unity, for callers that compare them.
    #[serde(skip)]
    pub route_a_roots: Vec<Root>,
    pub checks: BTreeMap<String, bool>,
    pub verdict: Verdict,
    /// Wall time; kept out of the JSON so that reports are byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    fn finish(mut self, start: Instant) -> VerificationReport {
        self.verdict = if self.checks.values().all(|v| *v) { Verdict::Pass } else { Verdict::Fail };
        self.elapsed = start.elapsed();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, v)| !**v).map(|(k, _)| k.as_str()).collect()
    }
}

fn blank(pair: &PhiPair, level: &str, id: String) -> VerificationReport {
    VerificationReport {
        config: pair.config.clone(),
        mutations: pair.mutations.clone(),
        level: level.into(),
        pair_id: id,
        pair: None,
        case: None,
        cosets: Vec::new(),
        route_a: Vec::new(),
        route_b: Vec::new(),
        route_a_roots: Vec::new(),
        checks: BTreeMap::new(),
        verdict: Verdict::Fail,
        elapsed: Duration::ZERO,
    }
}

/// All characters of `F^x` with conductor at most `bound`: `chi(p) in mu_(p-1)`, every tame part,
/// and every `gamma in P^(1-bound) / O`.
pub fn base_characters(psi_f: &Arc<AddChar>, bound: u32) -> Result<Vec<MulChar>> {
    let f = psi_f.field();
    let p = f.p();
    let depth = bound.saturating_sub(1);
    let mut gammas = Vec::new();
    for idx in 0..p.pow(depth) {
        let mut g = TowerElement::zero(f);
        let mut rest = idx;
        for v in 1..=depth as i64 {
            let d = rest % p;
            rest /= p;
            if d > 0 {
                g = g.add(&TowerElement::pi_pow(f, -v).mul_int(d as i64));
            }
        }
        gammas.push(g);
    }
    let mut out = Vec::new();
    for g in &gammas {
        for t in 0..p - 1 {
            if bound == 0 && t > 0 {
                continue;
            }
            for w in 0..p - 1 {
                out.push(MulChar::new(psi_f, Root::new(w as i128, p - 1), t, g)?);
            }
        }
    }
    Ok(out)
}

/// `eps(phi_1 chi_E) = eps(phi_2 chi_E)` for every `chi` of `F^x` with conductor at most `bound`,
/// by Moy's formula, by the epsilon ratio, and by the character quotient at `c_theta`. All twists
/// must be ramified so that the gamma factors reduce to epsilon factors.
pub fn verify_r1_gamma(pair: &PhiPair, bound: u32) -> Result<Vec<VerificationReport>> {
    let e = &pair.field;
    let f = e.subfield(BASE)?;
    let psi_f = Arc::new(AddChar::new(&f.field)?);
    let chis = base_characters(&psi_f, bound)?;
    chis.par_iter()
        .enumerate()
        .map(|(i, chi)| {
            let start = Instant::now();
            let mut rep = blank(pair, "r1", format!("r1:chi{}", i));
            let chi_e = chi.inflate(&f.inclusion, &pair.psi)?;
            let th1 = pair.phi1.mul(&chi_e)?;
            let th2 = pair.phi2.mul(&chi_e)?;
            let e1 = moy_epsilon(&th1)?;
            let e2 = moy_epsilon(&th2)?;
            let one = ScaledCyc::one(e.q());
            let eq = e1.value.eq_exact(&e2.value)?;
            let (ratio_one, ratio) = match epsilon_ratio(&th1, &th2) {
                Ok(r) => (r.value.eq_exact(&one)?, Some(r.value)),
                Err(Error::ConductorMismatch(_)) => (false, None),
                Err(err) => return Err(err),
            };
            let quotient = character_quotient(&th1, &th2)?;
            rep.route_a = vec![ExactValue::scaled(&e1.value), ExactValue::scaled(&e2.value)];
            rep.route_b = ratio.iter().map(ExactValue::scaled).chain([ExactValue::root(&quotient)]).collect();
            rep.checks.insert("epsilon_equal".into(), eq);
            rep.checks.insert("ratio_one".into(), ratio_one);
            rep.checks.insert("quotient_one".into(), quotient.is_one());
            rep.checks.insert("ramified".into(), th1.conductor() >= 1 && th2.conductor() >= 1);
            rep.checks.insert("conductors_equal".into(), th1.conductor() == th2.conductor());
            Ok(rep.finish(start))
        })
        .collect()
}

/// Everything about a twisting pair that does not depend on the two characters.
pub struct Equ6Context<'a> {
    pub pair: &'a PhiPair,
    pub cosets: &'a [CosetDatum],
    pub psi_k: Vec<Arc<AddChar>>,
    /// `F -> E` from the model of `F` inside `L`, for mapping symmetric functions of `alpha`.
    pub f_in_e: Embedding,
    /// `F -> L` as a relative structure.
    pub l_over_f: Relative,
    /// Whether to confirm each coset conductor by scanning the unit filtration.
    pub scan_conductors: bool,
}

impl<'a> Equ6Context<'a> {
    pub fn new(pair: &'a PhiPair, cosets: &'a [CosetDatum], l: &Arc<crate::local::TowerField>, scan_conductors: bool) -> Result<Equ6Context<'a>> {
        let psi_k = cosets.iter().map(|c| AddChar::new(&c.k.field).map(Arc::new)).collect::<Result<Vec<_>>>()?;
        let f_in_l = l.subfield(BASE)?;
        let base_e = pair.field.subfield(BASE)?;
        let f_in_e = embeddings(&f_in_l.field, &base_e.field)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::InternalContradiction("no map between models of the base field".into()))?
            .then(&base_e.inclusion)?;
        let l_over_f = Relative::new(&f_in_l.inclusion)?;
        Ok(Equ6Context { pair, cosets, psi_k, f_in_e, l_over_f, scan_conductors })
    }

    fn to_e(&self, z: &TowerElement) -> TowerElement {
        self.f_in_e.apply(z)
    }

    /// `theta_g^(i) = (phi_i o N_{K/E}) (lambda o N_{K/L})` on the coset field.
    pub fn composite(&self, idx: usize, phi: &MulChar, lambda: &MulChar) -> Result<CompositeChar> {
        let c = &self.cosets[idx];
        CompositeChar::from_relatives(&self.psi_k[idx], vec![(phi.clone(), c.rel_e.clone()), (lambda.clone(), c.rel_l.clone())])
    }
}

/// Checks the coset-product identity
/// `prod_g phi_1(N_{K_g/E}(beta + alpha)) = prod_g phi_2(N_{K_g/E}(beta + alpha))`
/// directly (route A) and through the symmetric-function reduction (route B), together with
/// the conductor formula, the `c`-data agreement and the norm-layer criterion on every coset.
pub fn verify_equ6(ctx: &Equ6Context, ap: &AdmissiblePair) -> Result<VerificationReport> {
    let start = Instant::now();
    let pair = ctx.pair;
    let n = pair.n;
    let l = &ap.l.field;
    let r = l.degree();
    let mut rep = blank(pair, "equ6", ap.id.clone());
    rep.pair = Some(ap.summary());
    if !ap.l.shape.supported(n) {
        return Err(Error::UnsupportedShape(format!("gcd(e_L, N) > 1 for {}", ap.l.shape.label())));
    }
    let info = classify_case(n, ap.l.shape.e, ap.m, r)?;
    if info.label == CaseLabel::EqualVal {
        return Err(Error::UnsupportedShape("equal valuations".into()));
    }
    rep.case = Some(info);
    let phis = [&pair.phi1, &pair.phi2];
    let beta = &pair.beta;
    let expected = (info.e as i64 * (2 * n as i64 - 2)).max(ap.m as i64 * info.n_prime as i64) as u32 + 1;

    // route A
    let mut route_a = [Root::ONE; 2];
    let mut c_data = true;
    let mut formula = true;
    let mut scanned = true;
    let mut layers = true;
    for (idx, c) in ctx.cosets.iter().enumerate() {
        let x = c.e_to_k.apply(beta).add(&c.l_to_k.apply(&ap.alpha));
        let y = c.rel_e.norm(&x)?;
        let vals = [phis[0].eval(&y)?, phis[1].eval(&y)?];
        route_a[0] = route_a[0].mul(&vals[0]);
        route_a[1] = route_a[1].mul(&vals[1]);

        let th = [ctx.composite(idx, phis[0], &ap.lambda)?, ctx.composite(idx, phis[1], &ap.lambda)?];
        let conductors = [th[0].conductor(), th[1].conductor()];
        formula &= conductors == [expected, expected];
        let scan = if ctx.scan_conductors {
            let s = conductor_by_scan(&c.k.field, expected + 2, &|z| th[0].eval(z))?;
            scanned &= s == Some(expected);
            s
        } else {
            None
        };
        let r_th = (expected as i64 + 1) / 2;
        let c1 = th[0].c_theta()?;
        let c2 = th[1].c_theta()?;
        let agree = c1.equals(&c2) && c1.equals(&x.truncate_abs(1 - r_th));
        c_data &= agree;
        let layer = layer_criterion(c, phis[0], phis[1], expected / 2, expected)?;
        layers &= layer;
        rep.cosets.push(CosetValues {
            coset: c.summary(),
            values: [ExactValue::root(&vals[0]), ExactValue::root(&vals[1])],
            expected_conductor: expected,
            conductors,
            scanned_conductor: scan,
            c_data_agree: agree,
            layer_criterion: layer,
        });
    }

    // route B
    let (route_b, membership) = route_b(ctx, ap, &info, r)?;
    rep.route_a = route_a.iter().map(ExactValue::root).collect();
    rep.route_a_roots = route_a.to_vec();
    rep.route_b = route_b.iter().map(ExactValue::root).collect();
    rep.checks.insert("route_a_equal".into(), route_a[0] == route_a[1]);
    rep.checks.insert("route_b_equal".into(), route_b[0] == route_b[1]);
    rep.checks.insert("routes_agree".into(), route_a == route_b);
    rep.checks.insert("membership".into(), membership);
    rep.checks.insert("conductor_formula".into(), formula);
    if ctx.scan_conductors {
        rep.checks.insert("conductor_scan".into(), scanned);
    }
    rep.checks.insert("c_data".into(), c_data);
    rep.checks.insert("layer_criterion".into(), layers);
    rep.checks.insert("stabilizers".into(), ctx.cosets.iter().all(|c| c.stabilizer_matches));
    rep.checks.insert("mackey_count".into(), mackey_dimension(ctx.cosets) == n * r);
    rep.checks.insert(
        "diamond".into(),
        ctx.cosets.iter().all(|c| c.diamond.e_2 * c.diamond.e_2p == n && c.diamond.e_1 * c.diamond.e_2p == ap.l.shape.e),
    );
    Ok(rep.finish(start))
}

/// `prod_g phi_i(N_{K_g/E}(beta + alpha))` for `i = 1, 2`, computed directly.
pub fn route_a(ctx: &Equ6Context, ap: &AdmissiblePair) -> Result<[Root; 2]> {
    let mut out = [Root::ONE; 2];
    for c in ctx.cosets {
        let x = c.e_to_k.apply(&ctx.pair.beta).add(&c.l_to_k.apply(&ap.alpha));
        let y = c.rel_e.norm(&x)?;
        out[0] = out[0].mul(&ctx.pair.phi1.eval(&y)?);
        out[1] = out[1].mul(&ctx.pair.phi2.eval(&y)?);
    }
    Ok(out)
}

/// `phi_1 o N_{K/E} = phi_2 o N_{K/E}` on `1 + P_K^lo`, tested on the generators
/// `1 + [b] pi_K^j`, `lo <= j <= hi`, whose norms must also lie in `1 + P_E^2`.
fn layer_criterion(c: &CosetDatum, phi1: &MulChar, phi2: &MulChar, lo: u32, hi: u32) -> Result<bool> {
    let k = &c.k.field;
    let one = TowerElement::one(k);
    let m = k.m() as i128;
    for j in lo.max(1)..=hi {
        for i in 0..k.f() as i128 {
            let g = one.add(&TowerElement::monomial(k, i * m, j as i64));
            let z = c.rel_e.norm(&g)?;
            let d = z.sub(&TowerElement::one(z.field()));
            if !(d.is_zero() || d.val() >= 2) || phi1.eval(&z)? != phi2.eval(&z)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The symmetric-function reduction. With `e_i` the elementary symmetric functions of the
/// conjugates of `alpha` (or `alpha^-1`) over `F`:
/// `beta` dominating: `phi(beta)^r phi(1 + sum beta^-i e_i(alpha))`;
/// `alpha` dominating: `phi(N_{L/F} alpha) phi(1 + sum beta^i e_i(alpha^-1))`.
/// Also returns whether the second argument lies in `1 + P_E^2`.
fn route_b(ctx: &Equ6Context, ap: &AdmissiblePair, info: &CaseInfo, r: u32) -> Result<([Root; 2], bool)> {
    let pair = ctx.pair;
    let beta = &pair.beta;
    let one = TowerElement::one(&pair.field);
    let phis = [&pair.phi1, &pair.phi2];
    let (lead, arg) = match info.label {
        CaseLabel::Tame => (beta.pow(r as i64)?, one.clone()),
        CaseLabel::BetaDominates | CaseLabel::AlphaDominates => {
            let beta_dom = info.label == CaseLabel::BetaDominates;
            let z = if beta_dom { ap.alpha.clone() } else { ap.alpha.inv()? };
            let cp = ctx.l_over_f.charpoly(&z);
            let step = if beta_dom { beta.inv()? } else { beta.clone() };
            let mut acc = one.clone();
            let mut pw = one.clone();
            for (i, coeff) in cp.iter().enumerate().skip(1) {
                pw = pw.mul(&step);
                let ei = if i % 2 == 0 { coeff.clone() } else { coeff.neg() };
                acc = acc.add(&pw.mul(&ctx.to_e(&ei)));
            }
            let lead = if beta_dom { beta.pow(r as i64)? } else { ctx.to_e(&ctx.l_over_f.norm(&ap.alpha)?) };
            (lead, acc)
        }
        CaseLabel::EqualVal => return Err(Error::UnsupportedShape("equal valuations".into())),
    };
    let d = arg.sub(&one);
    let membership = d.is_zero() || d.val() >= 2;
    let mut out = [Root::ONE; 2];
    for (i, phi) in phis.iter().enumerate() {
        out[i] = phi.eval(&lead)?.mul(&phi.eval(&arg)?);
    }
    Ok((out, membership))
}

/// Runs [`verify_equ6`] over every supported degree-`r` extension and every admissible
/// `lambda` with conductor at most `conductor_bound`, ordered by extension and conductor.
pub fn verify_equ6_family(pair: &PhiPair, ambient: &Ambient, r: u32, conductor_bound: u32, scan_conductors: bool) -> Result<Vec<VerificationReport>> {
    if !ambient.e.field.same_as(&pair.field) {
        return Err(Error::FieldMismatch("pair is not built on the ambient's E".into()));
    }
    let mut out = Vec::new();
    for l in tame_extensions(&ambient.ctx, r, ambient.ctx.digits())? {
        if !l.shape.supported(pair.n) {
            continue;
        }
        let cosets = double_cosets(ambient, &l.field)?;
        let ctx = Equ6Context::new(pair, &cosets, &l.field, scan_conductors)?;
        for m in 0..conductor_bound {
            let aps = pairs_at(&l, m)?;
            let reps = aps.par_iter().map(|ap| verify_equ6(&ctx, ap)).collect::<Result<Vec<_>>>()?;
            out.extend(reps);
        }
    }
    Ok(out)
}
