use std::sync::Arc;

use serde::Serialize;

use super::construct::BASE;
use crate::character::structure::automorphisms_over;
use crate::error::{Error, Result};
use crate::local::context::mod_pow;
use crate::local::{embeddings, embeddings_found, make_ambient_in, Embedding, PadicContext, Relative, Step, Subfield, SubfieldSpec, TowerElement, TowerField};

/// A Galois ambient field `M` over `F` containing `E = F[pi^(1/N)]` and every supported
/// extension of degree at most `r`: an unramified step adjoining the needed roots of unity,
/// then one Kummer step of degree `lcm(N, e_L)`.
#[derive(Clone, Debug)]
pub struct Ambient {
    pub ctx: Arc<PadicContext>,
    pub field: Arc<TowerField>,
    pub e: Subfield,
    pub n: u32,
    pub r: u32,
}

/// Multiplicative order of `p` modulo `n`.
fn order_mod(p: u64, n: u64) -> u32 {
    if n <= 1 {
        return 1;
    }
    (1..).find(|k| mod_pow(p, *k as u64, n) == 1).unwrap()
}

/// `(e_M, f_M)`: `e_M = lcm(N, supported e_L <= r)`, `f_M = lcm(ord_(e_M) p, 1..=r)`.
pub fn ambient_shape(p: u64, n: u32, r: u32) -> (u32, u32) {
    let mut e_m = n;
    let mut f_m = 1u32;
    for d in 1..=r {
        if d as u64 % p != 0 && num_integer::gcd(d, n) == 1 {
            e_m = num_integer::lcm(e_m, d);
        }
        f_m = num_integer::lcm(f_m, d);
    }
    (e_m, num_integer::lcm(f_m, order_mod(p, e_m as u64)))
}

impl Ambient {
    /// Builds `M` of shape [`ambient_shape`] with relative precision `prec` in a context of
    /// matching size.
    pub fn new(p: u64, n: u32, r: u32, prec: u32) -> Result<Ambient> {
        let (e_m, f_m) = ambient_shape(p, n, r);
        let digits = prec.div_ceil(e_m) + 3;
        let ctx = Arc::new(PadicContext::new(p, f_m, digits)?);
        let mut steps = Vec::new();
        if f_m > 1 {
            steps.push(Step::Unramified(f_m));
        }
        steps.push(Step::TameRamified { degree: e_m, unit_exp: 0 });
        let field = make_ambient_in(&ctx, &steps, prec)?;
        let e = field.subfield(SubfieldSpec { f: 1, e: n, c: 0 })?;
        Ok(Ambient { ctx, field, e, n, r })
    }

    /// Precision `4 e_M`, which gives `E` relative precision `4N`: enough for `beta + alpha`
    /// to determine `lambda(N_{K/L}(beta + alpha))` whenever `alpha` dominates.
    pub fn default_precision(p: u64, n: u32, r: u32) -> u32 {
        4 * ambient_shape(p, n, r).0
    }

    pub fn e_spec(&self) -> SubfieldSpec {
        self.e.spec
    }
}

/// Ramification data of the diamond `F < E cap L < E, L < K = EL`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Diamond {
    /// `e(K/E)`.
    pub e: u32,
    /// `e(K/L)`.
    pub n_prime: u32,
    /// `e(L / E cap L)`.
    pub e_1: u32,
    /// `e(E / E cap L)`.
    pub e_2: u32,
    /// `e(E cap L / F)`.
    pub e_2p: u32,
}

/// One double coset `W_L g W_E`, realized as an orbit of `Gal(M/E)` on the embeddings `L -> M`.
#[derive(Clone, Debug)]
pub struct CosetDatum {
    pub representative: Embedding,
    pub orbit_size: usize,
    pub k_spec: SubfieldSpec,
    pub k: Subfield,
    pub e_to_k: Embedding,
    pub l_to_k: Embedding,
    pub rel_e: Arc<Relative>,
    pub rel_l: Arc<Relative>,
    pub diamond: Diamond,
    pub stabilizer_size: usize,
    /// `|Stab(g)| = |Gal(M/K_g)|`.
    pub stabilizer_matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetSummary {
    pub orbit_size: usize,
    pub k_spec: (u32, u32, u64),
    pub degree_over_e: u32,
    pub diamond: Diamond,
    pub stabilizer_size: usize,
    pub stabilizer_matches: bool,
}

impl CosetDatum {
    pub fn summary(&self) -> CosetSummary {
        CosetSummary {
            orbit_size: self.orbit_size,
            k_spec: (self.k_spec.f, self.k_spec.e, self.k_spec.c),
            degree_over_e: self.rel_e.degree(),
            diamond: self.diamond,
            stabilizer_size: self.stabilizer_size,
            stabilizer_matches: self.stabilizer_matches,
        }
    }
}

/// Whether two embeddings with the same source and target agree on `pi` and `zeta`.
pub fn same_map(a: &Embedding, b: &Embedding) -> bool {
    let s = a.source();
    let gens = [TowerElement::pi_pow(s, 1), TowerElement::monomial(s, s.m() as i128, 0)];
    gens.iter().all(|g| a.apply(g).equals(&b.apply(g)))
}

/// The embedding `S -> K` through which `into_m: S -> M` factors along `K -> M`.
fn factor_through(into_m: &Embedding, k: &Subfield) -> Result<Embedding> {
    for cand in embeddings_found(into_m.source(), &k.field)? {
        if same_map(&cand.then(&k.inclusion)?, into_m) {
            return Ok(cand);
        }
    }
    Err(Error::InternalContradiction("embedding does not factor through the compositum".into()))
}

/// Double cosets `W_L \ W_F / W_E` as orbits of `Gal(M/E)` on `Hom_F(L, M)` under
/// post-composition. Each orbit has size `[K_g : E]`; the sizes sum to `[L : F]`.
pub fn double_cosets(ambient: &Ambient, l: &Arc<TowerField>) -> Result<Vec<CosetDatum>> {
    let m = &ambient.field;
    let homs = embeddings(l, m)?;
    let gal_e = automorphisms_over(m, &ambient.e_spec())?;
    if gal_e.len() as u32 != m.degree() / ambient.n {
        return Err(Error::AmbientTooSmall(format!("{} automorphisms of M over E, expected {}", gal_e.len(), m.degree() / ambient.n)));
    }
    let mut orbit_of = vec![usize::MAX; homs.len()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..homs.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = Vec::new();
        for sigma in &gal_e {
            let img = homs[i].then(sigma)?;
            let j = homs
                .iter()
                .position(|h| same_map(h, &img))
                .ok_or_else(|| Error::InternalContradiction("Galois image of an embedding is missing".into()))?;
            if orbit_of[j] == usize::MAX {
                orbit_of[j] = id;
                members.push(j);
            }
        }
        orbits.push(members);
    }
    let specs = m.subfield_specs();
    let e_spec = ambient.e_spec();
    let mut out = Vec::new();
    for members in orbits {
        let rep = homs[members[0]].clone();
        let img = m.normalize_spec(rep.image_spec());
        let k_spec = m.compositum_spec(&e_spec, &img)?;
        let k = m.subfield(k_spec)?;
        let e_to_k = factor_through(&ambient.e.inclusion, &k)?;
        let l_to_k = factor_through(&rep, &k)?;
        let meet = specs
            .iter()
            .filter(|s| m.spec_le(s, &e_spec) && m.spec_le(s, &img))
            .max_by_key(|s| s.degree())
            .copied()
            .ok_or_else(|| Error::InternalContradiction("no common subfield".into()))?;
        let diamond = Diamond {
            e: k_spec.e / ambient.n,
            n_prime: k_spec.e / l.e(),
            e_1: l.e() / meet.e,
            e_2: ambient.n / meet.e,
            e_2p: meet.e,
        };
        let stabilizer_size = gal_e.iter().filter(|s| same_map(&rep.then(s).unwrap(), &rep)).count();
        let gal_k = automorphisms_over(m, &k_spec)?.len();
        let rel_e = Arc::new(Relative::new(&e_to_k)?);
        let rel_l = Arc::new(Relative::new(&l_to_k)?);
        if members.len() as u32 != rel_e.degree() {
            return Err(Error::InternalContradiction(format!("orbit of size {} for [K:E] = {}", members.len(), rel_e.degree())));
        }
        out.push(CosetDatum {
            representative: rep,
            orbit_size: members.len(),
            k_spec,
            k,
            e_to_k,
            l_to_k,
            rel_e,
            rel_l,
            diamond,
            stabilizer_size,
            stabilizer_matches: stabilizer_size == gal_k,
        });
    }
    let total: usize = out.iter().map(|c| c.orbit_size).sum();
    if total as u32 != l.degree() {
        return Err(Error::InternalContradiction(format!("orbit sizes sum to {} for [L:F] = {}", total, l.degree())));
    }
    Ok(out)
}

/// `sum_g [K_g : F]`, which equals `N [L : F]`.
pub fn mackey_dimension(cosets: &[CosetDatum]) -> u32 {
    cosets.iter().map(|c| c.k.field.degree()).sum()
}

/// `F` inside `E`, for mapping symmetric functions computed over `F`.
pub fn base_inclusion(field: &Arc<TowerField>) -> Result<Subfield> {
    field.subfield(BASE)
}
