use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use super::construct::BASE;
use crate::character::structure::{automorphisms_over, is_admissible};
use crate::character::{AddChar, MulChar};
use crate::error::Result;
use crate::exact::Root;
use crate::local::{embeddings_found, make_tower_in, PadicContext, Step, TowerElement, TowerField};

/// Isomorphism class of a tame extension `L / F`: residue degree `f`, ramification `e`, and
/// `pi_L^e = zeta_f^k p` with `zeta_f` the Teichmüller generator of the degree-`f` unramified field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LShape {
    pub e: u32,
    pub f: u32,
    pub k: u64,
}

impl LShape {
    pub fn degree(&self) -> u32 {
        self.e * self.f
    }

    pub fn steps(&self, ctx: &PadicContext) -> Vec<Step> {
        let mut s = Vec::new();
        if self.f > 1 {
            s.push(Step::Unramified(self.f));
        }
        if self.e > 1 {
            s.push(Step::TameRamified { degree: self.e, unit_exp: self.k * ctx.m_of(self.f) });
        }
        s
    }

    /// Supported next to a totally ramified `E` of degree `n`: `gcd(e_L, N) = 1`.
    pub fn supported(&self, n: u32) -> bool {
        num_integer::gcd(self.e, n) == 1
    }

    pub fn label(&self) -> String {
        match (self.e, self.f) {
            (1, 1) => "F".into(),
            (1, f) => format!("unr{}", f),
            (e, 1) => format!("ram{}u{}", e, self.k),
            (e, f) => format!("mix{}x{}u{}", f, e, self.k),
        }
    }
}

/// A tame extension `L / F` built in a shared context.
#[derive(Clone, Debug)]
pub struct LField {
    pub shape: LShape,
    pub field: Arc<TowerField>,
    pub psi: Arc<AddChar>,
}

/// Tame extensions of `F = Q_p` of degree `r` up to isomorphism, each with `digits` p-adic
/// digits of relative precision (capped by the context). Totally ramified parts run over
/// `pi^e = zeta^k p` for `k` modulo `gcd(e, q_f - 1)`; isomorphic models are dropped.
pub fn tame_extensions(ctx: &Arc<PadicContext>, r: u32, digits: u32) -> Result<Vec<LField>> {
    let digits = digits.min(ctx.digits().saturating_sub(2)).max(1);
    let p = ctx.p();
    let mut out: Vec<LField> = Vec::new();
    for e in (1..=r).filter(|d| r % d == 0) {
        let f = r / e;
        if e as u64 % p == 0 || ctx.fmax() % f != 0 {
            continue;
        }
        let classes = if e == 1 { 1 } else { num_integer::gcd(e as u64, p.pow(f) - 1) };
        for k in 0..classes {
            let shape = LShape { e, f, k };
            let field = make_tower_in(ctx, &shape.steps(ctx), e * digits)?;
            let mut duplicate = false;
            for other in &out {
                if other.shape.e == e && other.shape.f == f && !embeddings_found(&field, &other.field)?.is_empty() {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                let psi = Arc::new(AddChar::new(&field)?);
                out.push(LField { shape, field, psi });
            }
        }
    }
    Ok(out)
}

/// A twisting datum `(L / F, lambda)` with `lambda(1 + x) = psi_L(alpha x)` on the upper half of
/// the principal units, `alpha` in `P_L^-m / P_L^-[m/2]`.
#[derive(Clone, Debug)]
pub struct AdmissiblePair {
    pub id: String,
    pub l: LField,
    pub lambda: MulChar,
    /// `m = f(lambda) - 1`, with `m = 0` for tamely ramified `lambda`.
    pub m: u32,
    pub alpha: TowerElement,
}

/// Serializable description of a pair.
#[derive(Clone, Debug, Serialize)]
pub struct PairSummary {
    pub id: String,
    pub shape: LShape,
    pub m: u32,
    pub conductor: u32,
    pub lambda: crate::character::CharData,
}

impl AdmissiblePair {
    pub fn summary(&self) -> PairSummary {
        PairSummary {
            id: self.id.clone(),
            shape: self.l.shape,
            m: self.m,
            conductor: self.lambda.conductor(),
            lambda: self.lambda.data(),
        }
    }
}

fn alpha_key(alpha: &TowerElement, m: u32) -> String {
    let d = alpha.truncate_abs(-((m / 2) as i64)).data();
    format!("{:?}:{:?}", d.valuation, d.coeffs)
}

/// The admissible pairs on `l` with `f(lambda) - 1 = m`: every `alpha` with nonzero leading
/// digit at `pi_L^-m` and digits down to `pi_L^(-[m/2]-1)`, up to `Aut(L/F)`, each with the
/// first tame exponent that makes `lambda` admissible. `m = 0` gives the tamely ramified
/// characters, which are admissible only for unramified `L` (or `L = F`).
pub fn pairs_at(l: &LField, m: u32) -> Result<Vec<AdmissiblePair>> {
    let field = &l.field;
    let q = field.q();
    let mm = field.m() as i128;
    let auts = automorphisms_over(field, &BASE)?;
    let mut out = Vec::new();
    if m == 0 {
        let zero = TowerElement::zero(field);
        for t in 0..q - 1 {
            let lambda = MulChar::new(&l.psi, Root::ONE, t, &zero)?;
            if is_admissible(&lambda, &BASE)? {
                out.push(AdmissiblePair { id: format!("{}:m0:t{}", l.shape.label(), t), l: l.clone(), lambda, m: 0, alpha: zero });
                break;
            }
        }
        return Ok(out);
    }
    let low = -((m / 2) as i64) - 1;
    let digits_count = (low + m as i64 + 1) as usize;
    let mut seen: HashSet<String> = HashSet::new();
    // digit 0 is zero, digit d >= 1 is zeta_L^(d-1); the leading digit is nonzero
    let mut digits = vec![0u64; digits_count];
    digits[0] = 1;
    let mut index = 0usize;
    loop {
        let mut alpha = TowerElement::zero(field);
        for (j, d) in digits.iter().enumerate() {
            if *d > 0 {
                alpha = alpha.add(&TowerElement::monomial(field, (*d as i128 - 1) * mm, -(m as i64) + j as i64));
            }
        }
        let key = alpha_key(&alpha, m);
        let fresh = !seen.contains(&key) && auts.iter().all(|s| !seen.contains(&alpha_key(&s.apply(&alpha), m)));
        if fresh {
            seen.insert(key);
            for t in 0..q - 1 {
                let lambda = MulChar::new(&l.psi, Root::ONE, t, &alpha)?;
                if is_admissible(&lambda, &BASE)? {
                    out.push(AdmissiblePair {
                        id: format!("{}:m{}:{}", l.shape.label(), m, index),
                        l: l.clone(),
                        lambda,
                        m,
                        alpha: alpha.clone(),
                    });
                    index += 1;
                    break;
                }
            }
        }
        let mut pos = digits_count;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if digits[pos] < q - 1 {
                digits[pos] += 1;
                break;
            }
            digits[pos] = if pos == 0 { 1 } else { 0 };
        }
    }
}

/// All admissible pairs of degree `r` with `f(lambda) <= conductor_bound`, ordered by
/// conductor and then by extension.
pub fn enumerate_tame_pairs(ctx: &Arc<PadicContext>, r: u32, conductor_bound: u32, digits: u32, n: u32) -> Result<Vec<AdmissiblePair>> {
    let ls: Vec<LField> = tame_extensions(ctx, r, digits)?.into_iter().filter(|l| l.shape.supported(n)).collect();
    let mut out = Vec::new();
    for m in 0..conductor_bound.max(1) {
        for l in &ls {
            out.extend(pairs_at(l, m)?);
        }
    }
    Ok(out)
}
