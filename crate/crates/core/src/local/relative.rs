use std::sync::Arc;

use super::element::TowerElement;
use super::embedding::Embedding;
use super::field::TowerField;
use crate::error::{Error, Result};

/// Characteristic polynomial `det(X - A)` of a square matrix by Berkowitz's division-free
/// algorithm. Returns coefficients from the leading 1 downwards.
pub fn berkowitz(a: &[Vec<TowerElement>], field: &Arc<TowerField>) -> Vec<TowerElement> {
    let n = a.len();
    let zero = TowerElement::zero(field);
    let one = TowerElement::one(field);
    if n == 0 {
        return vec![one];
    }
    let mut vect = vec![one.clone(), a[0][0].neg()];
    for r in 1..n {
        // t = [1, -a_rr, -R C, -R A C, ..., -R A^(r-2) C]
        let row: Vec<TowerElement> = a[r][..r].to_vec();
        let mut col: Vec<TowerElement> = (0..r).map(|i| a[i][r].clone()).collect();
        let mut t = Vec::with_capacity(r + 2);
        t.push(one.clone());
        t.push(a[r][r].neg());
        for k in 0..r {
            let dot = row.iter().zip(&col).fold(zero.clone(), |acc, (x, y)| acc.add(&x.mul(y)));
            t.push(dot.neg());
            if k + 1 < r {
                col = (0..r).map(|i| (0..r).fold(zero.clone(), |acc, j| acc.add(&a[i][j].mul(&col[j])))).collect();
            }
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = zero.clone();
            for (j, v) in vect.iter().enumerate() {
                if j <= i && i - j < t.len() {
                    acc = acc.add(&t[i - j].mul(v));
                }
            }
            next.push(acc);
        }
        vect = next;
    }
    vect
}

/// Determinant via [`berkowitz`].
pub fn determinant(a: &[Vec<TowerElement>], field: &Arc<TowerField>) -> TowerElement {
    let n = a.len();
    let cp = berkowitz(a, field);
    if n % 2 == 0 {
        cp[n].clone()
    } else {
        cp[n].neg()
    }
}

/// The relative situation `S -> T`, factored as `T / S' / S` with `S' = W_(f_T) * S` unramified over
/// `S` and `T / S'` totally ramified of degree `d`.
pub struct Relative {
    emb: Embedding,
    mid: Arc<TowerField>,
    d: u32,
    unram: u32,
}

impl std::fmt::Debug for Relative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Relative({:?}, degree {})", self.emb, self.degree())
    }
}

impl Relative {
    pub fn new(emb: &Embedding) -> Result<Relative> {
        let t = emb.target();
        let s = emb.source();
        let ctx = t.ctx();
        let d = emb.ram_ratio();
        let n = ctx.order() as u128;
        let u_mid = ((emb.twist() as u128 * s.e() as u128 + t.unit_exp() as u128) % n) as u64;
        let cap = s.e() * ctx.digits().saturating_sub(2);
        let prec = (t.prec().div_ceil(d) + 1).min(cap.max(1));
        let mid = TowerField::from_model(ctx, t.f(), s.e(), u_mid, prec, Vec::new(), false)?;
        Ok(Relative { emb: emb.clone(), mid, d, unram: t.f() / s.f() })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.emb
    }

    /// The intermediate field `S'`.
    pub fn mid(&self) -> &Arc<TowerField> {
        &self.mid
    }

    /// Ramification degree of `T / S'`.
    pub fn ram_degree(&self) -> u32 {
        self.d
    }

    /// Degree `[T : S]`.
    pub fn degree(&self) -> u32 {
        self.d * self.unram
    }

    /// `rho = zeta^c pi_T^d` as an element of `S'`, i.e. the generator `pi_(S')`; `pi_T^d = zeta^-c rho`.
    fn pi_d_in_mid(&self) -> TowerElement {
        TowerElement::monomial(&self.mid, -(self.emb.twist() as i128), 1)
    }

    /// Coordinates of `x` over `S'` in the basis `1, pi_T, ..., pi_T^(d-1)`.
    pub fn coordinates(&self, x: &TowerElement) -> Vec<TowerElement> {
        let t = self.emb.target();
        let d = self.d as i64;
        let mid = &self.mid;
        if x.is_zero() {
            let abs = x.val();
            return (0..d)
                .map(|r| {
                    if x.is_exact_zero() {
                        TowerElement::zero(mid)
                    } else {
                        TowerElement::approx_zero(mid, (abs - r).div_euclid(d) + if (abs - r).rem_euclid(d) > 0 { 1 } else { 0 })
                    }
                })
                .collect();
        }
        // x = pi^v u, v = d k + r0: x = rho^k zeta^(-c k) pi^r0 u
        let v = x.val();
        let k = v.div_euclid(d);
        let r0 = v.rem_euclid(d);
        let ctx = t.ctx();
        let c = self.emb.twist() as i128;
        let y = TowerElement::from_raw(t, x.unit_raw().to_vec(), 0, x.prec() as i64).mul_zeta(-c * k as i128);
        let raw_y = t.raw_shift(y.unit_raw(), r0 as u64);
        let abs_y = r0 + x.prec() as i64;
        let w = t.width();
        let e_t = t.e() as usize;
        let mut out = Vec::with_capacity(d as usize);
        for r in 0..d as usize {
            let mut raw = mid.raw_zero();
            let mut i = 0usize;
            while i * (d as usize) + r < e_t {
                let j = i * d as usize + r;
                let a = &raw_y[j * w..(j + 1) * w];
                if a.iter().any(|c| *c != 0) {
                    let b = ctx.w_mul(a, &ctx.w_zeta(-c * i as i128));
                    raw[i * w..(i + 1) * w].copy_from_slice(&b);
                }
                i += 1;
            }
            let rel = (abs_y - r as i64 + d - 1).div_euclid(d);
            out.push(TowerElement::from_raw(mid, raw, k, rel));
        }
        out
    }

    /// Matrix of multiplication by `x` over `S'`, columns indexed by the basis `pi_T^col`.
    pub fn mult_matrix(&self, x: &TowerElement) -> Vec<Vec<TowerElement>> {
        let d = self.d as usize;
        let coords = self.coordinates(x);
        let wrap = self.pi_d_in_mid();
        let mut m = vec![vec![TowerElement::zero(&self.mid); d]; d];
        for (r, xr) in coords.iter().enumerate() {
            for col in 0..d {
                if r + col < d {
                    m[r + col][col] = xr.clone();
                } else {
                    m[r + col - d][col] = xr.mul(&wrap);
                }
            }
        }
        m
    }

    /// Frobenius generator of `Gal(S'/S)` applied to an element of `S'`.
    fn sigma(&self, z: &TowerElement, i: u32) -> TowerElement {
        z.frob_coeffs(self.emb.source().f() * i)
    }

    /// Maps an element of `S'` lying in the image of `S` back to `S`.
    fn down(&self, z: &TowerElement) -> TowerElement {
        let s = self.emb.source();
        if z.is_zero() {
            if z.is_exact_zero() {
                return TowerElement::zero(s);
            }
            return TowerElement::approx_zero(s, z.val());
        }
        let inv = (s.f() - self.emb.frob() % s.f()) % s.f();
        TowerElement::from_raw(s, z.frob_coeffs(inv).unit_raw().to_vec(), z.val(), z.prec() as i64)
    }

    fn norm_mid(&self, z: &TowerElement) -> TowerElement {
        let mut acc = z.clone();
        for i in 1..self.unram {
            acc = acc.mul(&self.sigma(z, i));
        }
        acc
    }

    fn trace_mid(&self, z: &TowerElement) -> TowerElement {
        let mut acc = z.clone();
        for i in 1..self.unram {
            acc = acc.add(&self.sigma(z, i));
        }
        acc
    }

    pub fn norm(&self, x: &TowerElement) -> Result<TowerElement> {
        if x.is_zero() {
            return Err(Error::PrecisionLoss("norm of an element not known to be nonzero".into()));
        }
        let t = self.emb.target();
        // N(pi^v u) = N(pi)^v N(u)
        let unit = TowerElement::from_raw(t, x.unit_raw().to_vec(), 0, x.prec() as i64);
        let nu = determinant(&self.mult_matrix(&unit), &self.mid);
        let npi = determinant(&self.mult_matrix(&TowerElement::pi_pow(t, 1)), &self.mid);
        let z = nu.mul(&npi.pow(x.val())?);
        Ok(self.down(&self.norm_mid(&z)))
    }

    pub fn trace(&self, x: &TowerElement) -> TowerElement {
        let t = self.emb.target();
        if x.is_exact_zero() {
            return TowerElement::zero(self.emb.source());
        }
        let coords = self.coordinates(x);
        let _ = t;
        let z = coords[0].mul_int(self.d as i64);
        self.down(&self.trace_mid(&z))
    }

    /// Characteristic polynomial of `x` over `S`, highest coefficient first.
    pub fn charpoly(&self, x: &TowerElement) -> Vec<TowerElement> {
        let base = berkowitz(&self.mult_matrix(x), &self.mid);
        let mut acc = base.clone();
        for i in 1..self.unram {
            let conj: Vec<TowerElement> = base.iter().map(|c| self.sigma(c, i)).collect();
            acc = poly_mul(&acc, &conj, &self.mid);
        }
        acc.iter().map(|c| self.down(c)).collect()
    }

    /// `tr(x) / [T:S]`, the projection onto `S` (as an element of `S`).
    pub fn project(&self, x: &TowerElement) -> Result<TowerElement> {
        let tr = self.trace(x);
        let n = self.degree() as i64;
        Ok(tr.mul(&TowerElement::from_int(self.emb.source(), n).inv()?))
    }
}

/// Product of polynomials given highest coefficient first.
pub fn poly_mul(a: &[TowerElement], b: &[TowerElement], field: &Arc<TowerField>) -> Vec<TowerElement> {
    let mut out = vec![TowerElement::zero(field); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// `N_{T/S}` for the inclusion `emb: S -> T`.
pub fn norm(x: &TowerElement, emb: &Embedding) -> Result<TowerElement> {
    Relative::new(emb)?.norm(x)
}

pub fn trace(x: &TowerElement, emb: &Embedding) -> Result<TowerElement> {
    Ok(Relative::new(emb)?.trace(x))
}

pub fn charpoly(x: &TowerElement, emb: &Embedding) -> Result<Vec<TowerElement>> {
    Ok(Relative::new(emb)?.charpoly(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::context::PadicContext;
    use crate::local::embedding::SubfieldSpec;
    use crate::local::field::{make_tower_in, Step};

    fn kummer5() -> (Arc<TowerField>, Embedding) {
        let ctx = Arc::new(PadicContext::new(7, 1, 6).unwrap());
        let e = make_tower_in(&ctx, &[Step::TameRamified { degree: 5, unit_exp: 0 }], 12).unwrap();
        let sub = e.subfield(SubfieldSpec { f: 1, e: 1, c: 0 }).unwrap();
        (e, sub.inclusion)
    }

    #[test]
    fn norm_of_uniformizer() {
        let (e, inc) = kummer5();
        let rel = Relative::new(&inc).unwrap();
        let pi = TowerElement::pi_pow(&e, 1);
        let n = rel.norm(&pi).unwrap();
        assert!(n.equals(&TowerElement::from_int(inc.source(), 7)));
        assert!(rel.trace(&pi).is_zero());
        let cp = rel.charpoly(&pi);
        assert_eq!(cp.len(), 6);
        assert!(cp[5].equals(&TowerElement::from_int(inc.source(), -7)));
        for c in &cp[1..5] {
            assert!(c.is_zero());
        }
    }

    #[test]
    fn scalar_matrix_for_subfield_elements() {
        let (e, inc) = kummer5();
        let rel = Relative::new(&inc).unwrap();
        let x = inc.apply(&TowerElement::from_int(inc.source(), 3));
        let m = rel.mult_matrix(&x);
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i == j {
                    assert!(v.equals(&TowerElement::from_int(rel.mid(), 3)));
                } else {
                    assert!(v.is_zero());
                }
            }
        }
        let _ = e;
    }

    #[test]
    fn mixed_tower_transitivity() {
        let ctx = Arc::new(PadicContext::new(7, 2, 8).unwrap());
        let t = make_tower_in(&ctx, &[Step::Unramified(2), Step::TameRamified { degree: 3, unit_exp: 0 }], 12).unwrap();
        let specs = t.subfield_specs();
        let base = t.subfield(SubfieldSpec { f: 1, e: 1, c: 0 }).unwrap();
        let x = TowerElement::monomial(&t, t.m() as i128 * 5, -1)
            .add(&TowerElement::one(&t))
            .add(&TowerElement::monomial(&t, t.m() as i128, 2));
        let direct = norm(&x, &base.inclusion).unwrap();
        let dtr = trace(&x, &base.inclusion).unwrap();
        for s in specs {
            let sub = t.subfield(s).unwrap();
            let to_s = norm(&x, &sub.inclusion).unwrap();
            let tr_s = trace(&x, &sub.inclusion).unwrap();
            let lower = sub.field.subfield(SubfieldSpec { f: 1, e: 1, c: 0 }).unwrap();
            let two_step = norm(&to_s, &lower.inclusion).unwrap();
            assert!(two_step.equals(&direct), "{:?}: {:?} vs {:?}", s, two_step, direct);
            assert!(trace(&tr_s, &lower.inclusion).unwrap().equals(&dtr));
        }
    }
}
