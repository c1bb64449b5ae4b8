use serde::Serialize;

use crate::error::{Error, Result};

/// Which term of `beta + alpha` has the smaller valuation in the compositum `K = EL`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseLabel {
    /// `val_K(beta) < val_K(alpha)`.
    BetaDominates,
    /// `val_K(beta) > val_K(alpha)`.
    AlphaDominates,
    /// `val_K(beta) = val_K(alpha)`, which forces `N | 2 e_L`.
    EqualVal,
    /// `alpha = 0`: the twist is tamely ramified and `beta + alpha = beta`.
    Tame,
}

/// Valuation data of one `(N, L, m)` configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseInfo {
    pub label: CaseLabel,
    /// `e = e(K/E)`.
    pub e: u32,
    /// `N' = e(K/L)`.
    pub n_prime: u32,
    pub val_beta: i64,
    pub val_alpha: i64,
}

/// `val_K(beta) = -e(2N - 2)` against `val_K(alpha) = -m N'`, with `e(K/F) = lcm(N, e_L)`.
/// Equal valuations are checked against `N | 2 e_L`; inside `r < (N - 1)/2` they are an
/// `InternalContradiction`.
pub fn classify_case(n: u32, e_l: u32, m: u32, r: u32) -> Result<CaseInfo> {
    let ek = num_integer::lcm(n, e_l);
    let e = ek / n;
    let n_prime = ek / e_l;
    let val_beta = -(e as i64) * (2 * n as i64 - 2);
    let val_alpha = -(m as i64) * n_prime as i64;
    let label = if m == 0 {
        CaseLabel::Tame
    } else if val_beta < val_alpha {
        CaseLabel::BetaDominates
    } else if val_beta > val_alpha {
        CaseLabel::AlphaDominates
    } else {
        if (2 * e_l) % n != 0 {
            return Err(Error::InternalContradiction(format!("equal valuations with N = {} not dividing 2 e_L = {}", n, 2 * e_l)));
        }
        if 2 * r + 1 < n {
            return Err(Error::InternalContradiction(format!("equal valuations at r = {} < (N - 1)/2 = {}/2", r, n - 1)));
        }
        CaseLabel::EqualVal
    };
    Ok(CaseInfo { label, e, n_prime, val_beta, val_alpha })
}

/// `A = i(2N - 2) + N ceil(-i m / (e_1 e_2'))`, the valuation bound in `E` of the `i`-th
/// symmetric term, without range checks.
pub fn a_value(i: u32, n: u32, m: u32, e_1: u32, e_2p: u32) -> i64 {
    let num = -(i as i64) * m as i64;
    let den = (e_1 * e_2p) as i64;
    i as i64 * (2 * n as i64 - 2) + n as i64 * num.div_euclid(den) + if num.rem_euclid(den) != 0 { n as i64 } else { 0 }
}

/// `A` for `1 <= i <= s`, checked: `A = -2i (mod N)` and `A >= 2` when `beta` dominates,
/// `-A = 2i (mod N)` and `-A >= 2` when `alpha` dominates. Returns the exponent of the term,
/// `A` or `-A` respectively. Outside `2s < N - 1` the chain of inequalities behind `A >= 2`
/// does not apply and `RangeViolation` is returned.
pub fn a_exponent(i: u32, s: u32, n: u32, m: u32, e_1: u32, e_2p: u32, case: CaseLabel) -> Result<i64> {
    if i == 0 || i > s {
        return Err(Error::RangeViolation(format!("i = {} outside [1, {}]", i, s)));
    }
    if 2 * s + 1 >= n {
        return Err(Error::RangeViolation(format!("2s = {} is not below N - 1 = {}", 2 * s, n - 1)));
    }
    let a = a_value(i, n, m, e_1, e_2p);
    let (exp, target) = match case {
        CaseLabel::BetaDominates => (a, -2 * i as i64),
        CaseLabel::AlphaDominates => (-a, 2 * i as i64),
        other => return Err(Error::RangeViolation(format!("no exponent for case {:?}", other))),
    };
    if (exp - target).rem_euclid(n as i64) != 0 {
        return Err(Error::InternalContradiction(format!("A = {} is not {} mod {}", exp, target, n)));
    }
    if exp < 2 {
        return Err(Error::InternalContradiction(format!("A = {} is below 2 at i = {}", exp, i)));
    }
    Ok(exp)
}

/// One row of the valuation scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub r: u32,
    pub e_l: u32,
    pub f_l: u32,
    pub m: u32,
    pub case: CaseInfo,
    /// `A` (or `-A`) for `i = 1..=r`.
    pub exponents: Vec<i64>,
    pub n_divides_2e_l: bool,
}

/// Outcome of scanning all supported `(r, L, m)` for one `N`.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub n: u32,
    pub rows: Vec<ScanRow>,
    /// `(r, e_L, f_L)` shapes skipped because `gcd(e_L, N) > 1`.
    pub unsupported: Vec<(u32, u32, u32)>,
    pub equal_valuations: usize,
    pub congruence_failures: usize,
}

/// Scans `1 <= r < (N - 1)/2`, every shape `e_L f_L = r` with `gcd(e_L, N) = 1` and
/// `p` coprime to `e_L`, and `0 <= m <= m_max`, classifying each and checking every `A`.
pub fn case_scan(n: u32, p: u64, m_max: u32) -> Result<ScanReport> {
    let mut rows = Vec::new();
    let mut unsupported = Vec::new();
    let mut equal_valuations = 0;
    let mut congruence_failures = 0;
    for r in (1..).take_while(|r| 2 * r + 1 < n) {
        for e_l in (1..=r).filter(|d| r % d == 0) {
            let f_l = r / e_l;
            if e_l as u64 % p == 0 {
                continue;
            }
            if num_integer::gcd(e_l, n) > 1 {
                unsupported.push((r, e_l, f_l));
                continue;
            }
            for m in 0..=m_max {
                let case = classify_case(n, e_l, m, r)?;
                if case.label == CaseLabel::EqualVal {
                    equal_valuations += 1;
                }
                let mut exponents = Vec::new();
                if matches!(case.label, CaseLabel::BetaDominates | CaseLabel::AlphaDominates) {
                    for i in 1..=r {
                        match a_exponent(i, r, n, m, e_l, 1, case.label) {
                            Ok(a) => exponents.push(a),
                            Err(Error::InternalContradiction(_)) => {
                                congruence_failures += 1;
                                exponents.push(a_value(i, n, m, e_l, 1));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                rows.push(ScanRow { n, r, e_l, f_l, m, case, exponents, n_divides_2e_l: (2 * e_l) % n == 0 });
            }
        }
    }
    Ok(ScanReport { n, rows, unsupported, equal_valuations, congruence_failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert_eq!(a_value(1, 5, 1, 1, 1), 3);
        assert_eq!(a_exponent(1, 1, 5, 1, 1, 1, CaseLabel::BetaDominates).unwrap(), 3);
        let c = classify_case(5, 1, 1, 1).unwrap();
        assert_eq!(c.label, CaseLabel::BetaDominates);
        assert_eq!((c.val_beta, c.val_alpha), (-8, -5));
        assert!(matches!(a_exponent(1, 2, 5, 3, 2, 1, CaseLabel::BetaDominates), Err(Error::RangeViolation(_))));
        assert_eq!(a_value(2, 5, 3, 2, 1), 1);
    }

    #[test]
    fn scans_are_clean() {
        for n in [5, 6, 7] {
            let s = case_scan(n, 11, 4 * n).unwrap();
            assert_eq!(s.equal_valuations, 0);
            assert_eq!(s.congruence_failures, 0);
            assert!(s.rows.iter().all(|r| !r.n_divides_2e_l));
        }
    }
}
