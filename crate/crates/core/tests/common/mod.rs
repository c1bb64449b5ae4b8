//! Randomized invariant checks shared by the property suites and the acceptance run.
#![allow(dead_code)]
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamecheck::character::{howe_factorize, is_admissible, AddChar, Character, CompositeChar, MulChar};
use tamecheck::epsilon::{epsilon_ratio, gauss_sum};
use tamecheck::exact::embed_complex;
use tamecheck::local::relative::{norm, trace};
use tamecheck::local::{embeddings_found, make_tower_in, Embedding, PadicContext, Relative, Step, SubfieldSpec, TowerElement, TowerField};
use tamecheck::sharpness::BASE;

struct Fields {
    /// `E = Q_11[pi^(1/3)]`.
    e: Arc<TowerField>,
    psi_e: Arc<AddChar>,
    /// `U2 R3`, an unramified quadratic over `E`.
    k_unr: Arc<TowerField>,
    /// `R6`, a ramified quadratic over `E`.
    k_ram: Arc<TowerField>,
    /// `E6 = Q_11[pi^(1/6)]` for Howe factorizations.
    e6: Arc<TowerField>,
    psi_e6: Arc<AddChar>,
}

fn fields() -> &'static Fields {
    static F: OnceLock<Fields> = OnceLock::new();
    F.get_or_init(|| {
        let ctx = Arc::new(PadicContext::new(11, 2, 9).unwrap());
        let e = make_tower_in(&ctx, &[Step::TameRamified { degree: 3, unit_exp: 0 }], 18).unwrap();
        let k_unr = make_tower_in(&ctx, &[Step::Unramified(2), Step::TameRamified { degree: 3, unit_exp: 0 }], 18).unwrap();
        let k_ram = make_tower_in(&ctx, &[Step::TameRamified { degree: 6, unit_exp: 0 }], 36).unwrap();
        let e6 = make_tower_in(&ctx, &[Step::TameRamified { degree: 6, unit_exp: 0 }], 24).unwrap();
        Fields {
            psi_e: Arc::new(AddChar::new(&e).unwrap()),
            psi_e6: Arc::new(AddChar::new(&e6).unwrap()),
            e,
            k_unr,
            k_ram,
            e6,
        }
    })
}

/// A Moy-sized field `Q_7[pi^(1/5)]` for Gauss sums and epsilon ratios.
fn e5() -> &'static (Arc<TowerField>, Arc<AddChar>) {
    static F: OnceLock<(Arc<TowerField>, Arc<AddChar>)> = OnceLock::new();
    F.get_or_init(|| {
        let ctx = Arc::new(PadicContext::new(7, 1, 8).unwrap());
        let e = make_tower_in(&ctx, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 20).unwrap();
        let psi = Arc::new(AddChar::new(&e).unwrap());
        (e, psi)
    })
}

fn inclusion(src: &Arc<TowerField>, dst: &Arc<TowerField>) -> Embedding {
    embeddings_found(src, dst).unwrap().into_iter().next().unwrap()
}

/// `sum zeta^a_j pi^j` over `lo <= j < hi` with random Teichmüller digits.
fn random_element(field: &Arc<TowerField>, lo: i64, hi: i64, rng: &mut ChaCha8Rng) -> TowerElement {
    let q1 = field.q() - 1;
    let m = field.m() as i128;
    let mut x = TowerElement::monomial(field, rng.gen_range(0..q1) as i128 * m, lo);
    for j in lo + 1..hi {
        if rng.gen_bool(0.7) {
            x = x.add(&TowerElement::monomial(field, rng.gen_range(0..q1) as i128 * m, j));
        }
    }
    x.extend_prec(field.prec())
}

/// A random unit times a random power of the uniformizer.
fn random_nonzero(field: &Arc<TowerField>, rng: &mut ChaCha8Rng) -> TowerElement {
    let v = rng.gen_range(-3..4);
    random_element(field, 0, field.prec() as i64, rng).mul(&TowerElement::pi_pow(field, v))
}

/// `Ok(true)` when the invariant held, `Ok(false)` when the random instance was outside the
/// property's domain, `Err` with a description otherwise.
pub type Check = Result<bool, String>;

/// Tolerance on `|G| - 1` for embedded Gauss sums.
pub const GAUSS_TOLERANCE: f64 = 1e-9;

fn fail(e: tamecheck::Error) -> String {
    e.to_string()
}

macro_rules! assume {
    ($cond:expr) => {
        if !$cond {
            return Ok(false);
        }
    };
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn check_exp_inverts_log(seed: u64) -> Check {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = rng.gen_range(1..6);
    let x = random_element(&f.e, v, f.e.prec() as i64 + v, &mut rng);
    let u = TowerElement::one(&f.e).add(&x);
    let back = u.log_principal().map_err(fail)?.exp_principal().map_err(fail)?;
    ensure!(back.equals(&u), "{:?} vs {:?}", back, u);
    let again = x.exp_principal().map_err(fail)?.log_principal().map_err(fail)?;
    ensure!(again.equals(&x), "{:?} vs {:?}", again, x);
    Ok(true)
}

pub fn check_norm_and_trace_are_transitive(seed: u64) -> Check {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = if rng.gen_bool(0.5) { &f.k_unr } else { &f.k_ram };
    let x = random_nonzero(t, &mut rng);
    let base = t.subfield(BASE).map_err(fail)?;
    let direct = norm(&x, &base.inclusion).map_err(fail)?;
    let direct_tr = trace(&x, &base.inclusion).map_err(fail)?;
    for s in t.subfield_specs() {
        let sub = t.subfield(s).map_err(fail)?;
        let lower = sub.field.subfield(SubfieldSpec { f: 1, e: 1, c: 0 }).map_err(fail)?;
        // the two models of Q_p may use different uniformizers
        let iso = inclusion(&lower.field, &base.field);
        let two_step = iso.apply(&norm(&norm(&x, &sub.inclusion).map_err(fail)?, &lower.inclusion).map_err(fail)?);
        ensure!(two_step.equals(&direct), "norm through {:?}", s);
        let two_tr = iso.apply(&trace(&trace(&x, &sub.inclusion).map_err(fail)?, &lower.inclusion).map_err(fail)?);
        ensure!(two_tr.equals(&direct_tr), "trace through {:?}", s);
    }
    Ok(true)
}

pub fn check_inflated_gamma_represents_the_composite(seed: u64) -> Check {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if rng.gen_bool(0.5) { &f.k_unr } else { &f.k_ram };
    let emb = inclusion(&f.e, k);
    let psi_k = Arc::new(AddChar::new(k).map_err(fail)?);
    let chi = MulChar::random(&f.psi_e, rng.gen_range(0..7), 10, &mut rng).map_err(fail)?;
    let inflated = chi.inflate(&emb, &psi_k).map_err(fail)?;
    ensure!(inflated.gamma().equals(&emb.apply(chi.gamma())), "inflated_gamma_represents_the_composite");
    let rel = Relative::new(&emb).map_err(fail)?;
    for _ in 0..4 {
        let x = random_nonzero(k, &mut rng);
        ensure!({ let (a, b) = (inflated.eval(&x).map_err(fail)?, chi.eval(&rel.norm(&x).map_err(fail)?).map_err(fail)?); a == b }, "inflated_gamma_represents_the_composite");
    }
    let composite = CompositeChar::new(&psi_k, vec![(chi.clone(), emb.clone())]).map_err(fail)?;
    ensure!({ let (a, b) = (composite.conductor(), inflated.conductor()); a == b }, "inflated_gamma_represents_the_composite");
    Ok(true)
}

pub fn check_c_theta_is_inflation_invariant(seed: u64) -> Check {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if rng.gen_bool(0.5) { &f.k_unr } else { &f.k_ram };
    let emb = inclusion(&f.e, k);
    let psi_k = Arc::new(AddChar::new(k).map_err(fail)?);
    let chi = MulChar::random(&f.psi_e, rng.gen_range(2..7), 10, &mut rng).map_err(fail)?;
    let inflated = chi.inflate(&emb, &psi_k).map_err(fail)?;
    let r_k = ((inflated.conductor() + 1) / 2) as i64;
    let lhs = inflated.c_theta().map_err(fail)?.truncate_abs(1 - r_k);
    let rhs = emb.apply(&chi.c_theta().map_err(fail)?).truncate_abs(1 - r_k);
    ensure!(lhs.equals(&rhs), "{:?} vs {:?}", lhs, rhs);
    let composite = CompositeChar::new(&psi_k, vec![(chi, emb)]).map_err(fail)?;
    ensure!(composite.c_theta().map_err(fail)?.equals(&inflated.c_theta().map_err(fail)?), "c_theta_is_inflation_invariant");
    Ok(true)
}

pub fn check_howe_factorization_round_trips(seed: u64) -> Check {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = MulChar::random(&f.psi_e6, rng.gen_range(2..12), 10, &mut rng).map_err(fail)?;
    assume!(is_admissible(&theta, &BASE).map_err(fail)?);
    let h = howe_factorize(&theta, &BASE).map_err(fail)?;
    ensure!(h.reconstruct(&f.psi_e6).map_err(fail)?.same(&theta), "howe_factorization_round_trips");
    let s = h.summary();
    ensure!(s.inflated_conductors.windows(2).all(|w| w[0] > w[1]), "{:?}", s);
    ensure!({ let (a, b) = (s.tower.last().copied(), Some((f.e6.f(), f.e6.e()))); a == b }, "howe_factorization_round_trips");
    Ok(true)
}

pub fn check_gauss_sums_have_unit_modulus(seed: u64) -> Check {
    let (_, psi) = e5();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = 2 * rng.gen_range(1..5) + 1;
    let theta = MulChar::random(psi, c, 6, &mut rng).map_err(fail)?;
    let g = embed_complex(&gauss_sum(&theta).map_err(fail)?, 128);
    ensure!((g.abs() - 1.0).abs() < GAUSS_TOLERANCE, "|G| = {}", g.abs());
    Ok(true)
}

pub fn check_epsilon_ratios_form_a_cocycle(seed: u64) -> Check {
    let (_, psi) = e5();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.gen_range(2..10);
    let base = MulChar::random(psi, c, 6, &mut rng).map_err(fail)?;
    // twists by characters of conductor below (c + 1)/2 keep the conductor and c_theta
    let depth = ((c + 1) / 2 - 1).max(1);
    let mut chars = Vec::new();
    for _ in 0..3 {
        let eta = MulChar::random(psi, rng.gen_range(0..depth.min(c - 1) + 1), 6, &mut rng).map_err(fail)?;
        chars.push(base.mul(&eta).map_err(fail)?);
    }
    assume!(chars.iter().all(|t| t.conductor() == c));
    let c0 = base.c_theta().map_err(fail)?;
    assume!(chars.iter().all(|t| t.c_theta().is_ok_and(|ct| ct.equals(&c0))));
    let r01 = epsilon_ratio(&chars[0], &chars[1]).map_err(fail)?.value;
    let r12 = epsilon_ratio(&chars[1], &chars[2]).map_err(fail)?.value;
    let r02 = epsilon_ratio(&chars[0], &chars[2]).map_err(fail)?.value;
    ensure!(r01.mul(&r12).map_err(fail)?.eq_exact(&r02).map_err(fail)?, "epsilon_ratios_form_a_cocycle");
    Ok(true)
}

/// Runs `check` on consecutive seeds from `start` until `cases` instances were in the domain.
/// Returns the number of seeds tried, or the first failure.
pub fn run_property(check: fn(u64) -> Check, start: u64, cases: usize) -> Result<usize, String> {
    let mut held = 0;
    let mut tried = 0;
    while held < cases {
        let seed = start.wrapping_add(tried as u64);
        tried += 1;
        if check(seed).map_err(|e| format!("seed {}: {}", seed, e))? {
            held += 1;
        }
        if tried > 50 * cases {
            return Err(format!("only {} of {} seeds were in the domain", held, tried));
        }
    }
    Ok(tried)
}

/// The property checks by name.
pub const PROPERTIES: &[(&str, fn(u64) -> Check)] = &[
    ("exp/log inversion", check_exp_inverts_log),
    ("norm/trace transitivity", check_norm_and_trace_are_transitive),
    ("gamma preserved under inflation", check_inflated_gamma_represents_the_composite),
    ("c_theta inflation invariance", check_c_theta_is_inflation_invariant),
    ("Howe round trip", check_howe_factorization_round_trips),
    ("Gauss sum modulus", check_gauss_sums_have_unit_modulus),
    ("epsilon ratio cocycle", check_epsilon_ratios_form_a_cocycle),
];
