use crate::error::{Error, Result};

/// Largest residue field `F_{p^fmax}` whose discrete-log table is built.
pub const MAX_RESIDUE_FIELD: u64 = 1 << 22;
/// Largest `p^digits` so that products of two residues fit comfortably in `u128` sums.
pub const MAX_MODULUS: u64 = 1 << 42;

/// Shared arithmetic context: the Galois ring `W = W(F_{p^fmax}) / p^digits`, presented as
/// `(Z/p^digits)[y] / H(y)` where `y` is the Teichmüller lift of a primitive element of the
/// residue field. Every unramified ring of degree dividing `fmax` sits inside `W` as the
/// fixed ring of a power of Frobenius, and every root of unity of order prime to `p`
/// (inside `W`) is a power of `y`.
pub struct PadicContext {
    p: u64,
    fmax: u32,
    digits: u32,
    modulus: u64,
    qmax: u64,
    residue_poly: Vec<u64>,
    // y^k for k < 2 fmax - 1
    ypow: Vec<Vec<u64>>,
    // frob[j][i] = y^(p^j * i)
    frob: Vec<Vec<Vec<u64>>>,
    res_exp: Vec<u32>,
    res_log: Vec<u32>,
}

impl std::fmt::Debug for PadicContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PadicContext(p={}, fmax={}, digits={})", self.p, self.fmax, self.digits)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, m, a.rem_euclid(m));
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m))
}

/// Polynomials over `Z/m` modulo a monic `h` (coefficients lowest first, `h` without its leading 1).
struct PolyRing<'a> {
    m: u64,
    h: &'a [u64],
}

impl PolyRing<'_> {
    fn deg(&self) -> usize {
        self.h.len()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.deg();
        let m = self.m as u128;
        let mut acc = vec![0u128; 2 * n];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                acc[i + j] = (acc[i + j] + *x as u128 * *y as u128) % m;
            }
        }
        for k in (n..2 * n).rev() {
            let c = acc[k] % m;
            if c == 0 {
                continue;
            }
            acc[k] = 0;
            // x^n = -sum h_i x^i
            for i in 0..n {
                acc[k - n + i] = (acc[k - n + i] + (m - self.h[i] as u128 % m) * c) % m;
            }
        }
        acc[..n].iter().map(|c| (*c % m) as u64).collect()
    }

    fn pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut r = vec![0u64; self.deg()];
        r[0] = 1 % self.m;
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    fn x(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.deg()];
        if self.deg() == 1 {
            v[0] = (self.m - self.h[0] % self.m) % self.m;
        } else {
            v[1] = 1;
        }
        v
    }
}

/// Smallest monic polynomial of degree `f` over `F_p` (in lexicographic order of coefficient
/// vectors) whose root generates the multiplicative group of `F_{p^f}`.
fn primitive_polynomial(p: u64, f: u32) -> Vec<u64> {
    let q = p.pow(f);
    let order = q - 1;
    let factors = prime_factors(order);
    let mut h = vec![0u64; f as usize];
    loop {
        let ring = PolyRing { m: p, h: &h };
        let x = ring.x();
        let mut one = vec![0u64; f as usize];
        one[0] = 1;
        let ok = ring.pow(&x, order as u128) == one
            && factors.iter().all(|l| ring.pow(&x, (order / l) as u128) != one);
        if ok {
            return h;
        }
        // next candidate
        let mut i = 0;
        loop {
            h[i] += 1;
            if h[i] < p {
                break;
            }
            h[i] = 0;
            i += 1;
        }
    }
}

impl PadicContext {
    /// Builds the Galois ring of residue degree `fmax` modulo `p^digits`.
    pub fn new(p: u64, fmax: u32, digits: u32) -> Result<PadicContext> {
        if !is_prime(p) || p == 2 {
            return Err(Error::ConfigInvalid(format!("p = {} must be an odd prime", p)));
        }
        if fmax == 0 || digits == 0 {
            return Err(Error::ConfigInvalid("residue degree and digits must be positive".into()));
        }
        let qmax = p.checked_pow(fmax).filter(|q| *q <= MAX_RESIDUE_FIELD).ok_or_else(|| {
            Error::CapacityExceeded(format!("residue field of size {}^{} is too large", p, fmax))
        })?;
        let modulus = p.checked_pow(digits).filter(|m| *m <= MAX_MODULUS).ok_or_else(|| {
            Error::CapacityExceeded(format!("{}^{} exceeds the coefficient modulus bound", p, digits))
        })?;
        let f = fmax as usize;
        let hbar = primitive_polynomial(p, fmax);

        // Teichmüller lift t of the root x of hbar in (Z/p^D)[x]/hbar, then H = prod (X - t^(p^i)).
        let ring = PolyRing { m: modulus, h: &hbar };
        let mut t = ring.x();
        for _ in 0..digits {
            t = ring.pow(&t, qmax as u128);
        }
        let mut conj = Vec::with_capacity(f);
        let mut c = t.clone();
        for _ in 0..f {
            conj.push(c.clone());
            c = ring.pow(&c, p as u128);
        }
        // poly in X with coefficients in the ring, lowest first
        let mut hpoly: Vec<Vec<u64>> = vec![{
            let mut one = vec![0u64; f];
            one[0] = 1;
            one
        }];
        for r in &conj {
            let mut next = vec![vec![0u64; f]; hpoly.len() + 1];
            for (k, coeff) in hpoly.iter().enumerate() {
                for i in 0..f {
                    next[k + 1][i] = (next[k + 1][i] + coeff[i]) % modulus;
                }
                let prod = ring.mul(coeff, r);
                for i in 0..f {
                    next[k][i] = (next[k][i] + modulus - prod[i]) % modulus;
                }
            }
            hpoly = next;
        }
        let mut hcoef = Vec::with_capacity(f);
        for coeff in &hpoly[..f] {
            if coeff[1..].iter().any(|c| *c != 0) {
                return Err(Error::InternalContradiction("Teichmüller polynomial is not defined over Z_p".into()));
            }
            hcoef.push(coeff[0]);
        }

        let mut ctx = PadicContext {
            p,
            fmax,
            digits,
            modulus,
            qmax,
            residue_poly: hbar.clone(),
            ypow: Vec::new(),
            frob: Vec::new(),
            res_exp: Vec::new(),
            res_log: Vec::new(),
        };
        // y^k tables for the reduction y^f = -sum H_i y^i
        let mut ypow = Vec::with_capacity(2 * f);
        let mut cur = vec![0u64; f];
        cur[0] = 1;
        for _ in 0..(2 * f).max(2) {
            ypow.push(cur.clone());
            let mut next = vec![0u64; f];
            let top = cur[f - 1];
            for i in (1..f).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..f {
                next[i] = ((next[i] as u128 + (modulus - hcoef[i]) as u128 % modulus as u128 * top as u128) % modulus as u128) as u64;
            }
            cur = next;
        }
        ctx.ypow = ypow;

        let y = ctx.w_y();
        let mut frob = Vec::with_capacity(f);
        let mut base = y.clone();
        for _ in 0..f {
            let mut row = Vec::with_capacity(f);
            let mut acc = ctx.w_one();
            for _ in 0..f {
                row.push(acc.clone());
                acc = ctx.w_mul(&acc, &base);
            }
            frob.push(row);
            base = ctx.w_pow(&base, p as u128);
        }
        ctx.frob = frob;

        let mut res_exp = vec![0u32; (qmax - 1) as usize];
        let mut res_log = vec![u32::MAX; qmax as usize];
        let rp = PolyRing { m: p, h: &hbar };
        let xb = rp.x();
        let mut cur = vec![0u64; f];
        cur[0] = 1;
        for a in 0..(qmax - 1) {
            let idx = pack(&cur, p);
            res_exp[a as usize] = idx;
            res_log[idx as usize] = a as u32;
            cur = rp.mul(&cur, &xb);
        }
        ctx.res_exp = res_exp;
        ctx.res_log = res_log;
        debug_assert_eq!(ctx.w_pow(&y, (qmax - 1) as u128), ctx.w_one());
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn fmax(&self) -> u32 {
        self.fmax
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// `p^digits`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Size of the largest residue field, `p^fmax`.
    pub fn qmax(&self) -> u64 {
        self.qmax
    }

    /// Order of the global Teichmüller generator, `p^fmax - 1`.
    pub fn order(&self) -> u64 {
        self.qmax - 1
    }

    /// Index of the roots of unity of `W_f` in those of `W`: `(p^fmax - 1)/(p^f - 1)`.
    pub fn m_of(&self, f: u32) -> u64 {
        (self.qmax - 1) / (self.p.pow(f) - 1)
    }

    pub fn residue_poly(&self) -> &[u64] {
        &self.residue_poly
    }

    pub fn w_zero(&self) -> Vec<u64> {
        vec![0u64; self.fmax as usize]
    }

    pub fn w_one(&self) -> Vec<u64> {
        self.w_scalar(1)
    }

    pub fn w_scalar(&self, c: i64) -> Vec<u64> {
        let mut v = self.w_zero();
        v[0] = c.rem_euclid(self.modulus as i64) as u64;
        v
    }

    pub fn w_y(&self) -> Vec<u64> {
        if self.fmax == 1 {
            self.ypow[1].clone()
        } else {
            let mut v = self.w_zero();
            v[1] = 1;
            v
        }
    }

    pub fn w_is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|c| *c == 0)
    }

    pub fn w_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    pub fn w_sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + self.modulus - y) % self.modulus).collect()
    }

    pub fn w_neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|x| (self.modulus - x) % self.modulus).collect()
    }

    pub fn w_scale(&self, a: &[u64], c: u64) -> Vec<u64> {
        let m = self.modulus as u128;
        a.iter().map(|x| (*x as u128 * (c % self.modulus) as u128 % m) as u64).collect()
    }

    /// Reduces an unreduced product of length up to `2 fmax - 1` (entries already below the modulus).
    pub(crate) fn w_reduce_wide(&self, acc: &[u128], out: &mut [u64]) {
        let f = self.fmax as usize;
        let m = self.modulus as u128;
        let mut low: Vec<u128> = acc[..f.min(acc.len())].iter().map(|c| c % m).collect();
        low.resize(f, 0);
        for (k, c) in acc.iter().enumerate().skip(f) {
            let c = c % m;
            if c == 0 {
                continue;
            }
            for (i, l) in low.iter_mut().enumerate() {
                *l += c * self.ypow[k][i] as u128;
            }
        }
        for (o, l) in out.iter_mut().zip(low) {
            *o = (l % m) as u64;
        }
    }

    pub fn w_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.fmax as usize;
        if f == 1 {
            return vec![(a[0] as u128 * b[0] as u128 % self.modulus as u128) as u64];
        }
        let mut acc = vec![0u128; 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                acc[i + j] += *x as u128 * *y as u128;
            }
        }
        let mut out = vec![0u64; f];
        self.w_reduce_wide(&acc, &mut out);
        out
    }

    pub fn w_pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut r = self.w_one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.w_mul(&r, &b);
            }
            b = self.w_mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// The Teichmüller root of unity `y^a`.
    pub fn w_zeta(&self, a: i128) -> Vec<u64> {
        let n = self.order() as i128;
        let a = a.rem_euclid(n) as u128;
        if (a as usize) < self.ypow.len() {
            return self.ypow[a as usize].clone();
        }
        self.w_pow(&self.w_y(), a)
    }

    /// Applies the `j`-th power of Frobenius (`y -> y^(p^j)`).
    pub fn w_frob(&self, a: &[u64], j: u32) -> Vec<u64> {
        let f = self.fmax as usize;
        let j = (j % self.fmax) as usize;
        if j == 0 {
            return a.to_vec();
        }
        let m = self.modulus as u128;
        let mut acc = vec![0u128; f];
        for (i, c) in a.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            for (k, v) in self.frob[j][i].iter().enumerate() {
                acc[k] = (acc[k] + *c as u128 * *v as u128) % m;
            }
        }
        acc.into_iter().map(|c| c as u64).collect()
    }

    /// Packed index of the residue of `a` in `F_{qmax}`.
    pub fn w_residue_index(&self, a: &[u64]) -> u32 {
        pack(&a.iter().map(|c| c % self.p).collect::<Vec<_>>(), self.p)
    }

    /// Discrete logarithm of the residue of `a` with respect to the residue of `y`; `None` if `a` is not a unit.
    pub fn w_dlog(&self, a: &[u64]) -> Option<u64> {
        let idx = self.w_residue_index(a);
        let l = self.res_log[idx as usize];
        if l == u32::MAX {
            None
        } else {
            Some(l as u64)
        }
    }

    /// Residue element `y^a mod p` as packed index.
    pub fn residue_of_zeta(&self, a: u64) -> u32 {
        self.res_exp[(a % self.order()) as usize]
    }

    /// Residue element from its packed index, as coefficient vector over `F_p`.
    pub fn unpack_residue(&self, idx: u32) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.fmax as usize);
        let mut x = idx as u64;
        for _ in 0..self.fmax {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    /// Discrete logarithm of a packed residue element.
    pub fn residue_dlog(&self, idx: u32) -> Option<u64> {
        let l = self.res_log[idx as usize];
        if l == u32::MAX {
            None
        } else {
            Some(l as u64)
        }
    }

    /// Inverse of a unit of `W`.
    pub fn w_inv(&self, a: &[u64]) -> Result<Vec<u64>> {
        let k = self.w_dlog(a).ok_or(Error::DivisionByZero)?;
        let mut y = self.w_zeta(-(k as i128));
        let two = self.w_scalar(2);
        let mut prec = 1u32;
        while prec < self.digits {
            let ay = self.w_mul(a, &y);
            y = self.w_mul(&y, &self.w_sub(&two, &ay));
            prec *= 2;
        }
        Ok(y)
    }

    /// `p`-adic valuation of an element of `W` (`digits` for zero).
    pub fn w_val(&self, a: &[u64]) -> u32 {
        a.iter().map(|c| vp(*c, self.p, self.digits)).min().unwrap_or(self.digits)
    }

    /// Reduces every component modulo `p^k`.
    pub fn w_truncate(&self, a: &mut [u64], k: u32) {
        if k >= self.digits {
            return;
        }
        let m = self.p.pow(k);
        for c in a.iter_mut() {
            *c %= m;
        }
    }
}

pub(crate) fn vp(mut c: u64, p: u64, cap: u32) -> u32 {
    if c == 0 {
        return cap;
    }
    let mut v = 0;
    while c % p == 0 && v < cap {
        c /= p;
        v += 1;
    }
    v
}

fn pack(v: &[u64], p: u64) -> u32 {
    let mut idx = 0u64;
    for c in v.iter().rev() {
        idx = idx * p + c % p;
    }
    idx as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn galois_ring_basics() {
        let ctx = PadicContext::new(7, 2, 5).unwrap();
        let y = ctx.w_y();
        assert_eq!(ctx.w_pow(&y, 48), ctx.w_one());
        assert_ne!(ctx.w_pow(&y, 24), ctx.w_one());
        // Frobenius is a ring map fixing Z_p and of order fmax
        let a = vec![3, 11];
        let b = vec![5, 2];
        assert_eq!(ctx.w_frob(&ctx.w_mul(&a, &b), 1), ctx.w_mul(&ctx.w_frob(&a, 1), &ctx.w_frob(&b, 1)));
        assert_eq!(ctx.w_frob(&ctx.w_frob(&a, 1), 1), a);
        assert_eq!(ctx.w_frob(&y, 1), ctx.w_zeta(7));
        let inv = ctx.w_inv(&a).unwrap();
        assert_eq!(ctx.w_mul(&a, &inv), ctx.w_one());
        assert_eq!(ctx.w_dlog(&ctx.w_zeta(17)), Some(17));
    }

    #[test]
    fn degree_one_context() {
        let ctx = PadicContext::new(7, 1, 6).unwrap();
        let z = ctx.w_y();
        assert_eq!(ctx.w_pow(&z, 6), ctx.w_one());
        assert_ne!(ctx.w_pow(&z, 3), ctx.w_one());
        assert_ne!(ctx.w_pow(&z, 2), ctx.w_one());
    }
}
