//! Arithmetic progressions of twin firsts and constructive existence
//! checks built on the primorial.
//!
//! An AP here is maximal: it cannot be extended by one more twin first on
//! either side within the scanned range. APs whose next term would fall
//! past the scan limit are flagged, since their true length is unknown.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::arith::ArithTables;
use crate::sieve::PrimeStore;
use crate::{Error, Result};

const COPRIME_SEARCH_MAX_N: u64 = 1_000_000;
const UPPER_BOUND_MAX: u64 = 1_000_000;

/// Maximal arithmetic progression a, a+b, ..., a+(l-1)b of twin first
/// members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwinAp {
    pub a: u64,
    pub b: u64,
    pub l: u64,
    /// the term after the last one would exceed the scan limit, so the
    /// progression might continue beyond what was searched
    pub capped_by_limit: bool,
}

/// All maximal APs of twin firsts with length ≥ min_len and every term
/// ≤ limit, sorted by (a, b). Candidate differences are differences of
/// twin firsts (any valid AP's first two terms force this), checked
/// against the store's twin bitmap.
pub fn find_twin_aps(store: &PrimeStore, min_len: u64, limit: u64) -> Result<Vec<TwinAp>> {
    if min_len < 3 {
        return Err(Error::InvalidArgument(format!(
            "progression length {min_len} below the minimum 3"
        )));
    }
    if limit > store.limit() {
        return Err(Error::OutOfRange {
            what: "progression scan limit (store too small)",
            value: limit,
            bound: store.limit(),
        });
    }
    let twins: Vec<u64> = store
        .twin_firsts()
        .firsts()
        .iter()
        .copied()
        .take_while(|&p| p <= limit)
        .collect();

    let mut aps: Vec<TwinAp> = (0..twins.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = twins[i];
            let mut found = Vec::new();
            for &next in &twins[i + 1..] {
                let b = next - a;
                if a as u128 + (min_len - 1) as u128 * b as u128 > limit as u128 {
                    break;
                }
                // a - b would start a longer AP containing this one
                if a >= b && store.is_twin_first(a - b) {
                    continue;
                }
                let mut l = 2u64;
                while a + l * b <= limit && store.is_twin_first(a + l * b) {
                    l += 1;
                }
                if l < min_len {
                    continue;
                }
                found.push(TwinAp {
                    a,
                    b,
                    l,
                    capped_by_limit: a + l * b > limit,
                });
            }
            found.into_iter()
        })
        .collect();
    aps.sort_unstable_by_key(|ap| (ap.a, ap.b));
    Ok(aps)
}

fn small_primes(n: u64) -> Vec<u64> {
    let mut composite = vec![false; n as usize + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p as usize] {
            primes.push(p);
            let mut m = p * p;
            while m <= n {
                composite[m as usize] = true;
                m += p;
            }
        }
    }
    primes
}

/// Product of all primes ≤ n.
pub fn primorial(n: u64) -> BigUint {
    small_primes(n)
        .into_iter()
        .fold(BigUint::from(1u32), |acc, p| acc * p)
}

/// φ₂ of the primorial of n: the prime 2 contributes 1 and each odd prime
/// p contributes p−2, so the product is positive; that positivity is the
/// existence certificate behind [`smallest_twin_coprime_above`].
pub fn phi2_primorial(n: u64) -> BigUint {
    small_primes(n)
        .into_iter()
        .filter(|&p| p > 2)
        .fold(BigUint::from(1u32), |acc, p| acc * (p - 2))
}

/// Least m > n with m(m+2) coprime to every prime ≤ n. Tests candidates
/// prime by prime without ever forming the primorial.
pub fn smallest_twin_coprime_above(n: u64) -> Result<u64> {
    if n <= 2 {
        return Err(Error::OutOfRange {
            what: "twin coprime search start",
            value: n,
            bound: 3,
        });
    }
    if n > COPRIME_SEARCH_MAX_N {
        return Err(Error::OutOfRange {
            what: "twin coprime search start",
            value: n,
            bound: COPRIME_SEARCH_MAX_N,
        });
    }
    let primes = small_primes(n);
    let mut m = n + 1;
    loop {
        if primes.iter().all(|&p| m % p != 0 && (m + 2) % p != 0) {
            return Ok(m);
        }
        m += 1;
    }
}

/// Outcome of the exhaustive two-bound sweep: both inequalities held for
/// every n, with the tightest margins observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpperBoundReport {
    pub n_limit: u64,
    pub checked: u64,
    /// min over n of φ₂(n) + ω(n) − π₂(n)
    pub min_totient_slack: u64,
    pub min_totient_slack_at: u64,
    /// min over n of π(n) + 2 − 2π₂(n)
    pub min_half_slack: u64,
    pub min_half_slack_at: u64,
}

/// Asserts π₂(n) ≤ φ₂(n) + ω(n) and 2π₂(n) ≤ π(n) + 2 for every
/// 2 < n ≤ n_limit. Any violation is an error, not a report entry.
pub fn upper_bound_check(store: &PrimeStore, n_limit: u64) -> Result<UpperBoundReport> {
    if !(3..=UPPER_BOUND_MAX).contains(&n_limit) {
        return Err(Error::OutOfRange {
            what: "upper bound sweep limit",
            value: n_limit,
            bound: UPPER_BOUND_MAX,
        });
    }
    if n_limit > store.limit() {
        return Err(Error::OutOfRange {
            what: "upper bound sweep limit (store too small)",
            value: n_limit,
            bound: store.limit(),
        });
    }
    let tables = ArithTables::new(n_limit);
    let mut pi = 1u64; // the prime 2
    let mut pi2 = 0u64;
    let mut report = UpperBoundReport {
        n_limit,
        checked: 0,
        min_totient_slack: u64::MAX,
        min_totient_slack_at: 0,
        min_half_slack: u64::MAX,
        min_half_slack_at: 0,
    };
    for n in 3..=n_limit {
        if store.is_prime(n) {
            pi += 1;
        }
        if store.is_twin_first(n) {
            pi2 += 1;
        }
        let totient_bound = tables.phi2(n) + tables.omega(n) as u64;
        if pi2 > totient_bound {
            return Err(Error::BoundViolation {
                n,
                detail: format!("pi2 = {pi2} exceeds phi2 + omega = {totient_bound}"),
            });
        }
        if 2 * pi2 > pi + 2 {
            return Err(Error::BoundViolation {
                n,
                detail: format!("2·pi2 = {} exceeds pi + 2 = {}", 2 * pi2, pi + 2),
            });
        }
        report.checked += 1;
        let totient_slack = totient_bound - pi2;
        if totient_slack < report.min_totient_slack {
            report.min_totient_slack = totient_slack;
            report.min_totient_slack_at = n;
        }
        let half_slack = pi + 2 - 2 * pi2;
        if half_slack < report.min_half_slack {
            report.min_half_slack = half_slack;
            report.min_half_slack_at = n;
        }
    }
    Ok(report)
}
