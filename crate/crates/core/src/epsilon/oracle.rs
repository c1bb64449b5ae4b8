use rayon::prelude::*;

use crate::character::Character;
use crate::error::{Error, Result};
use crate::exact::{CycNumber, Root, ScaledCyc};
use crate::local::TowerElement;

/// Default cap on the number of terms in a brute-force sum.
pub const DEFAULT_TERM_BUDGET: u64 = 60_000_000;

fn p_exponent(r: &Root, p: u64, s: u32) -> Result<u64> {
    let m = p.pow(s);
    if m % r.order() != 0 {
        return Err(Error::InternalContradiction(format!("value {:?} is not a p^{}-th root of unity", r, s)));
    }
    Ok(r.exponent_in(m))
}

struct Layout {
    /// For each generator `1 + [b_i] pi^j`: the matrix of multiplication by it on raw
    /// coordinates modulo `p^s` (row-major), and the exponent of `theta^-1` at it.
    gens: Vec<(Vec<u64>, u64)>,
    /// For each tame index `k`: the functional `x -> psi(zeta_T^k delta x)` on raw coordinates.
    functionals: Vec<Vec<u64>>,
    len: usize,
    ps: u64,
    p: u64,
    q1: u64,
    t: u64,
    big: u64,
}

/// `q^(-n/2) sum_{u in (O/P^n)^x} theta^-1(u delta) psi(u delta)` with `n = max(c, 1 - val delta)`,
/// by full enumeration of `q^(n-1)(q-1)` terms.
///
/// Units are enumerated as `zeta_T^k prod (1 + [b_i] pi^j)^(a_ij)`; `theta^-1` is tracked
/// multiplicatively along the enumeration and `psi(u delta)` is read off a precomputed linear
/// functional on the coordinates of `u`, all modulo `p^s` where the values live.
pub fn oracle_sum(theta: &dyn Character, delta: &TowerElement, budget: u64) -> Result<ScaledCyc> {
    let f = theta.field().clone();
    if delta.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let c = theta.conductor().max(1);
    let n = (c as i64).max(1 - delta.val()) as u32;
    let q = f.q();
    let p = f.p();
    let e = f.e() as i64;
    let terms = (q as u128).pow(n - 1) * (q as u128 - 1);
    if terms > budget as u128 {
        return Err(Error::CapacityExceeded(format!("{} terms exceed the budget {}", terms, budget)));
    }
    if f.prec() < n || (f.ctx().digits() as i64) * e < n as i64 {
        return Err(Error::PrecisionLoss(format!("field precision {} below the sum depth {}", f.prec(), n)));
    }
    let s = (n - 1).div_ceil(f.e()) + 1;
    let ps = p.pow(s);
    let len = f.raw_len();
    let width = f.width();
    let basis: Vec<Vec<u64>> = (0..len)
        .map(|idx| {
            let mut b = f.raw_zero();
            b[idx] = 1;
            b
        })
        .collect();
    let one = TowerElement::one(&f);
    let m = f.m() as i128;
    let mut gens = Vec::new();
    for j in 1..n as i64 {
        for i in 0..f.f() as i128 {
            let g = one.add(&TowerElement::monomial(&f, i * m, j));
            let graw = g.unit_raw().to_vec();
            let mut mat = vec![0u64; len * len];
            for (col, b) in basis.iter().enumerate() {
                let prod = f.raw_mul(b, &graw);
                for (row, v) in prod.iter().enumerate() {
                    mat[row * len + col] = v % ps;
                }
            }
            gens.push((mat, p_exponent(&theta.eval(&g)?.inv(), p, s)?));
        }
    }
    let mut functionals = Vec::new();
    for k in 0..q - 1 {
        let shifted = delta.mul_zeta(k as i128 * m).extend_prec(f.prec());
        let mut lam = vec![0u64; len];
        for (idx, slot) in lam.iter_mut().enumerate() {
            let (j, i) = (idx / width, idx % width);
            let mut w = f.ctx().w_zero();
            w[i] = 1;
            let b = TowerElement::from_w(&f, &w, j as i64).extend_prec(f.prec());
            *slot = p_exponent(&theta.psi().eval(&shifted.mul(&b))?, p, s)?;
        }
        functionals.push(lam);
    }
    let q1 = q - 1;
    let big = num_integer::lcm(ps, q1);
    let layout = Layout { gens, functionals, len, ps, p, q1, t: theta.tame_exponent()?, big };
    let start: Vec<u64> = f.raw_one().iter().map(|v| v % ps).collect();

    // split the powers of the first generator across workers
    let mut prefixes = vec![(start.clone(), 0u64)];
    if let Some((mat, ge)) = layout.gens.first() {
        prefixes.clear();
        let mut x = start;
        let mut ex = 0u64;
        for _ in 0..p {
            prefixes.push((x.clone(), ex));
            x = layout.apply(mat, &x);
            ex = (ex + ge) % ps;
        }
    }
    let skip = if layout.gens.is_empty() { 0 } else { 1 };
    let hist = prefixes
        .into_par_iter()
        .map(|(x, ex)| {
            let mut h = vec![0i64; big as usize];
            layout.walk(skip, &x, ex, &mut h);
            h
        })
        .reduce(
            || vec![0i64; big as usize],
            |mut a, b| {
                for (u, v) in a.iter_mut().zip(b) {
                    *u += v;
                }
                a
            },
        );
    let num = CycNumber::from_counts(big, &hist);
    let scale = theta.eval(delta)?.inv();
    ScaledCyc::new(num, -(n as i64), q).mul_root(&scale)
}

impl Layout {
    fn apply(&self, mat: &[u64], x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.len];
        self.apply_into(mat, x, &mut out);
        out
    }

    fn apply_into(&self, mat: &[u64], x: &[u64], out: &mut [u64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let r = &mat[row * self.len..(row + 1) * self.len];
            let mut acc = 0u64;
            for (a, b) in r.iter().zip(x) {
                acc += a * b;
            }
            *o = acc % self.ps;
        }
    }

    fn walk(&self, level: usize, x: &[u64], ex: u64, h: &mut [i64]) {
        if level == self.gens.len() {
            self.accumulate(x, ex, h);
            return;
        }
        let (mat, ge) = &self.gens[level];
        let mut cur = x.to_vec();
        let mut next = vec![0u64; self.len];
        let mut ce = ex;
        for a in 0..self.p {
            self.walk(level + 1, &cur, ce, h);
            if a + 1 < self.p {
                self.apply_into(mat, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                ce = (ce + ge) % self.ps;
            }
        }
    }

    fn accumulate(&self, x: &[u64], ex: u64, h: &mut [i64]) {
        let to_big_p = self.big / self.ps;
        let to_big_t = self.big / self.q1;
        for (k, lam) in self.functionals.iter().enumerate() {
            let mut acc = ex;
            for (xi, li) in x.iter().zip(lam) {
                acc += xi * li;
            }
            let acc = acc % self.ps;
            let tame = (self.q1 - (self.t * k as u64) % self.q1) % self.q1;
            let idx = (acc * to_big_p + tame * to_big_t) % self.big;
            h[idx as usize] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::{AddChar, MulChar};
    use crate::exact::embed_complex;
    use crate::local::make_tower;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn wrong_valuation_gives_zero() {
        let f = make_tower(7, &[], 10).unwrap();
        let psi = Arc::new(AddChar::new(&f).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let th = MulChar::random(&psi, 3, 6, &mut rng).unwrap();
        let s = oracle_sum(&th, &TowerElement::pi_pow(&f, -1), 1 << 20).unwrap();
        assert!(s.is_zero());
        let s = oracle_sum(&th, &TowerElement::pi_pow(&f, -2), 1 << 20).unwrap();
        assert!(!s.is_zero());
        let z = embed_complex(&s, 96);
        assert!((z.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_is_enforced() {
        let f = make_tower(7, &[], 10).unwrap();
        let psi = Arc::new(AddChar::new(&f).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let th = MulChar::random(&psi, 5, 6, &mut rng).unwrap();
        assert!(matches!(oracle_sum(&th, &TowerElement::pi_pow(&f, -4), 100), Err(Error::CapacityExceeded(_))));
    }
}
