use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::context::{vp, PadicContext};
use crate::error::{Error, Result};

/// One step of a tame tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// Unramified extension of the given degree.
    Unramified(u32),
    /// `pi_new^degree = zeta^unit_exp * pi_old`, with `zeta` the global Teichmüller generator;
    /// `unit_exp` must name a root of unity of the field built so far.
    TameRamified { degree: u32, unit_exp: u64 },
}

/// A tame extension of `Q_p` in normalized form `W_f[pi]`, `pi^e = zeta^u * p`.
///
/// Elements are stored modulo `pi^k` relative to their valuation.
pub struct TowerField {
    ctx: Arc<PadicContext>,
    f: u32,
    e: u32,
    u: u64,
    prec: u32,
    steps: Vec<Step>,
    has_log: bool,
    // zeta^u as a W element
    wrap: Vec<u64>,
}

impl fmt::Debug for TowerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T(p={}, f={}, e={}, u={}, k={})", self.ctx.p(), self.f, self.e, self.u, self.prec)
    }
}

/// Serializable description of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub unit_exp: u64,
    pub precision: u32,
    pub steps: Vec<Step>,
}

impl TowerField {
    /// Builds a field from its normalized data; `u` must be a multiple of `m_f`.
    pub(crate) fn from_model(ctx: &Arc<PadicContext>, f: u32, e: u32, u: u64, prec: u32, steps: Vec<Step>, require_log: bool) -> Result<Arc<TowerField>> {
        let p = ctx.p();
        if e % p as u32 == 0 {
            return Err(Error::WildRamification { p, degree: e });
        }
        let has_log = (p - 1) > e as u64;
        if require_log && !has_log {
            return Err(Error::ExpLogRadius { p, e });
        }
        if ctx.fmax() % f != 0 {
            return Err(Error::CapacityExceeded(format!("residue degree {} does not divide the context degree {}", f, ctx.fmax())));
        }
        let u = u % ctx.order();
        if u % ctx.m_of(f) != 0 {
            return Err(Error::InternalContradiction(format!("unit exponent {} does not lie in the residue degree {} ring", u, f)));
        }
        let needed = prec.div_ceil(e) + 2;
        if needed > ctx.digits() {
            return Err(Error::CapacityExceeded(format!(
                "precision {} at ramification {} needs {} p-adic digits, context has {}",
                prec,
                e,
                needed,
                ctx.digits()
            )));
        }
        let wrap = ctx.w_zeta(u as i128);
        Ok(Arc::new(TowerField { ctx: ctx.clone(), f, e, u, prec, steps, has_log, wrap }))
    }

    pub fn ctx(&self) -> &Arc<PadicContext> {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// Residue degree over `Q_p`.
    pub fn f(&self) -> u32 {
        self.f
    }

    /// Ramification index over `Q_p`.
    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn degree(&self) -> u32 {
        self.e * self.f
    }

    /// Exponent `u` in `pi^e = zeta^u p`.
    pub fn unit_exp(&self) -> u64 {
        self.u
    }

    /// Residue field size.
    pub fn q(&self) -> u64 {
        self.p().pow(self.f)
    }

    /// Default relative precision `k`.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Whether truncated exp/log are available (`p - 1 > e`).
    pub fn has_log(&self) -> bool {
        self.has_log
    }

    /// `(p^fmax - 1)/(q - 1)`: the global exponent of this field's Teichmüller generator.
    pub fn m(&self) -> u64 {
        self.ctx.m_of(self.f)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.p(), f: self.f, e: self.e, unit_exp: self.u, precision: self.prec, steps: self.steps.clone() }
    }

    /// Same normalized model and context.
    pub fn same_as(&self, other: &TowerField) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.f == other.f && self.e == other.e && self.u == other.u
    }

    pub fn with_precision(&self, prec: u32) -> Result<Arc<TowerField>> {
        TowerField::from_model(&self.ctx, self.f, self.e, self.u, prec, self.steps.clone(), false)
    }

    // ---- raw arithmetic on integral coefficient vectors ----
    // A raw vector has length e * fmax; the W coefficient of pi^j occupies [j*fmax, (j+1)*fmax).

    pub(crate) fn width(&self) -> usize {
        self.ctx.fmax() as usize
    }

    pub(crate) fn raw_len(&self) -> usize {
        self.e as usize * self.width()
    }

    pub(crate) fn raw_zero(&self) -> Vec<u64> {
        vec![0u64; self.raw_len()]
    }

    pub(crate) fn raw_from_w(&self, w: &[u64]) -> Vec<u64> {
        let mut r = self.raw_zero();
        r[..self.width()].copy_from_slice(w);
        r
    }

    pub(crate) fn raw_one(&self) -> Vec<u64> {
        self.raw_from_w(&self.ctx.w_one())
    }

    pub(crate) fn raw_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.ctx.w_add(a, b)
    }

    pub(crate) fn raw_sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.ctx.w_sub(a, b)
    }

    pub(crate) fn raw_neg(&self, a: &[u64]) -> Vec<u64> {
        self.ctx.w_neg(a)
    }

    pub(crate) fn coeff<'a>(&self, a: &'a [u64], j: usize) -> &'a [u64] {
        let w = self.width();
        &a[j * w..(j + 1) * w]
    }

    pub fn raw_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let w = self.width();
        let e = self.e as usize;
        let m = self.ctx.modulus() as u128;
        if w == 1 && e == 1 {
            return vec![(a[0] as u128 * b[0] as u128 % m) as u64];
        }
        let wide = 2 * w - 1;
        let mut acc = vec![0u128; (2 * e - 1) * wide];
        for j1 in 0..e {
            for i1 in 0..w {
                let x = a[j1 * w + i1];
                if x == 0 {
                    continue;
                }
                for j2 in 0..e {
                    let base = (j1 + j2) * wide + i1;
                    let row = &b[j2 * w..(j2 + 1) * w];
                    for (i2, y) in row.iter().enumerate() {
                        acc[base + i2] += x as u128 * *y as u128;
                    }
                }
            }
        }
        let mut red = vec![0u64; (2 * e - 1) * w];
        for j in 0..(2 * e - 1) {
            self.ctx.w_reduce_wide(&acc[j * wide..(j + 1) * wide], &mut red[j * w..(j + 1) * w]);
        }
        // pi^(e+j) = zeta^u p pi^j
        for j in (e..2 * e - 1).rev() {
            let hi = red[j * w..(j + 1) * w].to_vec();
            if hi.iter().all(|c| *c == 0) {
                continue;
            }
            let t = self.ctx.w_scale(&self.ctx.w_mul(&hi, &self.wrap), self.p());
            for i in 0..w {
                red[(j - e) * w + i] = (red[(j - e) * w + i] + t[i]) % self.ctx.modulus();
            }
        }
        red.truncate(e * w);
        red
    }

    /// Multiplies a raw vector by a W element.
    pub(crate) fn raw_scale_w(&self, a: &[u64], c: &[u64]) -> Vec<u64> {
        let w = self.width();
        let mut out = Vec::with_capacity(a.len());
        for j in 0..self.e as usize {
            out.extend(self.ctx.w_mul(&a[j * w..(j + 1) * w], c));
        }
        out
    }

    /// Multiplies by `pi^s` for `s >= 0`.
    pub(crate) fn raw_shift(&self, a: &[u64], s: u64) -> Vec<u64> {
        let w = self.width();
        let e = self.e as usize;
        let whole = s / e as u64;
        let rest = (s % e as u64) as usize;
        let mut out = if whole > 0 {
            if whole >= self.ctx.digits() as u64 {
                return self.raw_zero();
            }
            // (zeta^u p)^whole
            let factor = self.ctx.w_scale(&self.ctx.w_zeta((self.u as i128) * whole as i128), self.p().pow(whole as u32));
            self.raw_scale_w(a, &factor)
        } else {
            a.to_vec()
        };
        if rest > 0 {
            let mut shifted = self.raw_zero();
            for j in 0..e {
                let src = &out[j * w..(j + 1) * w];
                if j + rest < e {
                    shifted[(j + rest) * w..(j + rest + 1) * w].copy_from_slice(src);
                } else {
                    let t = self.ctx.w_scale(&self.ctx.w_mul(src, &self.wrap), self.p());
                    shifted[(j + rest - e) * w..(j + rest - e + 1) * w].copy_from_slice(&t);
                }
            }
            out = shifted;
        }
        out
    }

    /// Valuation of a raw vector, capped at `cap`.
    pub(crate) fn raw_val(&self, a: &[u64], cap: u64) -> u64 {
        let e = self.e as u64;
        let mut best = cap;
        for j in 0..self.e as usize {
            let v = self.coeff(a, j).iter().map(|c| vp(*c, self.p(), self.ctx.digits())).min().unwrap();
            if v >= self.ctx.digits() {
                continue;
            }
            best = best.min(j as u64 + e * v as u64);
        }
        best
    }

    /// Exact division by `pi^s` of a raw vector of valuation at least `s`.
    /// The result is reliable modulo `p^(digits - ceil(s/e))`.
    pub(crate) fn raw_unshift(&self, a: &[u64], s: u64) -> Vec<u64> {
        if s == 0 {
            return a.to_vec();
        }
        let e = self.e as u64;
        let t = s.div_ceil(e);
        let b = self.raw_shift(a, e * t - s);
        let b = self.raw_scale_w(&b, &self.ctx.w_zeta(-(self.u as i128) * t as i128));
        let d = self.p().pow(t as u32);
        debug_assert!(b.iter().all(|c| c % d == 0), "raw_unshift: not divisible");
        b.iter().map(|c| c / d).collect()
    }

    /// Canonical truncation modulo `pi^k`: the coefficient of `pi^j` is kept modulo `p^ceil((k-j)/e)`.
    pub(crate) fn raw_truncate(&self, a: &mut [u64], k: u64) {
        let w = self.width();
        let e = self.e as u64;
        for j in 0..self.e as usize {
            let digits = if k > j as u64 { (k - j as u64).div_ceil(e) } else { 0 };
            let slice = &mut a[j * w..(j + 1) * w];
            if digits == 0 {
                slice.iter_mut().for_each(|c| *c = 0);
            } else {
                self.ctx.w_truncate(slice, digits.min(u32::MAX as u64) as u32);
            }
        }
    }

    /// Applies `Frob^j` to each coefficient.
    pub(crate) fn raw_frob(&self, a: &[u64], j: u32) -> Vec<u64> {
        let w = self.width();
        let mut out = Vec::with_capacity(a.len());
        for k in 0..self.e as usize {
            out.extend(self.ctx.w_frob(&a[k * w..(k + 1) * w], j));
        }
        out
    }
}

/// Builds a tower over `Q_p` inside the given context. Requires `p - 1 > e` so that
/// exp and log converge on the principal units.
pub fn make_tower_in(ctx: &Arc<PadicContext>, steps: &[Step], k: u32) -> Result<Arc<TowerField>> {
    build(ctx, steps, k, true)
}

/// Like [`make_tower_in`] but allows `e >= p - 1`; exp and log are unavailable on the result.
/// Used for composita and ambient fields that only need ring arithmetic and norms.
pub fn make_ambient_in(ctx: &Arc<PadicContext>, steps: &[Step], k: u32) -> Result<Arc<TowerField>> {
    build(ctx, steps, k, false)
}

fn build(ctx: &Arc<PadicContext>, steps: &[Step], k: u32, require_log: bool) -> Result<Arc<TowerField>> {
    let p = ctx.p();
    let mut f = 1u32;
    let mut e = 1u32;
    let mut u = 0u64;
    let n = ctx.order();
    for s in steps {
        match *s {
            Step::Unramified(d) => {
                if d == 0 {
                    return Err(Error::ConfigInvalid("unramified step of degree 0".into()));
                }
                f *= d;
            }
            Step::TameRamified { degree, unit_exp } => {
                if degree == 0 {
                    return Err(Error::ConfigInvalid("ramified step of degree 0".into()));
                }
                if degree as u64 % p == 0 {
                    return Err(Error::WildRamification { p, degree });
                }
                if ctx.fmax() % f == 0 && unit_exp % ctx.m_of(f) != 0 {
                    return Err(Error::ConfigInvalid(format!("unit exponent {} is not a root of unity of the current field", unit_exp)));
                }
                u = ((unit_exp as u128 * e as u128 + u as u128) % n as u128) as u64;
                e *= degree;
            }
        }
    }
    if e as u64 % p == 0 {
        return Err(Error::WildRamification { p, degree: e });
    }
    if require_log && p - 1 <= e as u64 {
        return Err(Error::ExpLogRadius { p, e });
    }
    TowerField::from_model(ctx, f, e, u, k, steps.to_vec(), require_log)
}

/// Builds a tower in a fresh context sized for it alone.
pub fn make_tower(p: u64, steps: &[Step], k: u32) -> Result<Arc<TowerField>> {
    let mut f = 1;
    let mut e = 1;
    for s in steps {
        match *s {
            Step::Unramified(d) => f *= d.max(1),
            Step::TameRamified { degree, .. } => {
                if degree as u64 % p == 0 {
                    return Err(Error::WildRamification { p, degree });
                }
                e *= degree.max(1)
            }
        }
    }
    if p >= 2 && p - 1 <= e as u64 {
        return Err(Error::ExpLogRadius { p, e });
    }
    let ctx = Arc::new(PadicContext::new(p, f, k.div_ceil(e) + 3)?);
    make_tower_in(&ctx, steps, k)
}

/// The base field `Q_p` of a context.
pub fn base_field(ctx: &Arc<PadicContext>, k: u32) -> Result<Arc<TowerField>> {
    make_tower_in(ctx, &[], k)
}
