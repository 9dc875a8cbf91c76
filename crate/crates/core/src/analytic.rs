//! Constants, products and series around the twin prime constant.
//!
//! C₂ = Π_{p>2} p(p-2)/(p-1)² is reachable three ways: the Euler product
//! itself, the signed series Σ μ(n)/φ(n)² over odd squarefree n, and the
//! reciprocal series Σ 1/(n·φ₂(n)) over the same n. All three are exposed
//! as truncations that report how far they went; γ is a pinned literal but
//! C₂ is always computed, never hard-coded.
//!
//! Also here: the primorial ratio P·φ₂(P)/φ(P)² (which telescopes to
//! exactly twice the Euler product), Mertens-type products with their
//! asymptotic main terms, the weighted summatory identity
//! Σ μ₂(n)⌊x/n⌋ = L(x) + L(x/2) + 2L(x/4) + 4L(x/8) + ...,
//! and partial Dirichlet sums for μ₂, φ₂ and ζ₂.

use crate::arith::ArithTables;
use crate::sieve::{for_each_prime, DEFAULT_SEGMENT_SIZE};
use crate::{Error, KahanSum, Result};

pub const EULER_GAMMA: f64 = 0.5772156649015329;

/// The 10^6-th prime: products with more factors than this accumulate in
/// log space to keep rounding error from compounding multiplicatively.
const LOG_SPACE_THRESHOLD: u64 = 15_485_863;
/// Dirichlet partial sums walk a factor table of this size at most.
const DIRICHLET_N_MAX: u64 = 10_000_000;
/// Summatory identity evaluations stay exact and fast below this.
const SUMMATORY_X_MAX: u64 = 1_000_000;

/// Which route produced a truncated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EulerProduct,
    SeriesMuPhi2,
    SeriesReciprocal,
    PrimorialRatio,
    Dirichlet,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::EulerProduct => "euler_product",
            Method::SeriesMuPhi2 => "series_mu_phi2",
            Method::SeriesReciprocal => "series_reciprocal",
            Method::PrimorialRatio => "primorial_ratio",
            Method::Dirichlet => "dirichlet",
        }
    }
}

/// A truncated product or series value together with its depth: the prime
/// limit for products, the summation limit for series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub method: Method,
    pub terms_or_plimit: u64,
    pub value: f64,
}

/// Exact Mertens-type partial product next to its asymptotic main term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensReport {
    pub x: u64,
    pub lhs: f64,
    pub main_term: f64,
    pub ratio: f64,
}

fn prime_product(limit: u64, include_two: bool, factor: impl Fn(f64) -> f64) -> Result<f64> {
    if limit > LOG_SPACE_THRESHOLD {
        let mut logs = KahanSum::new();
        for_each_prime(limit, DEFAULT_SEGMENT_SIZE, |p| {
            if include_two || p > 2 {
                logs.add(factor(p as f64).ln());
            }
        })?;
        Ok(logs.value().exp())
    } else {
        let mut prod = 1.0f64;
        for_each_prime(limit, DEFAULT_SEGMENT_SIZE, |p| {
            if include_two || p > 2 {
                prod *= factor(p as f64);
            }
        })?;
        Ok(prod)
    }
}

/// Π over odd primes p ≤ p_limit of p(p-2)/(p-1)².
pub fn twin_constant_product(p_limit: u64) -> Result<TruncationReport> {
    if p_limit < 3 {
        return Err(Error::OutOfRange {
            what: "twin constant product prime limit",
            value: p_limit,
            bound: 3,
        });
    }
    let value = prime_product(p_limit, false, |p| p * (p - 2.0) / ((p - 1.0) * (p - 1.0)))?;
    Ok(TruncationReport {
        method: Method::EulerProduct,
        terms_or_plimit: p_limit,
        value,
    })
}

/// Σ over odd squarefree n ≤ n_limit of μ(n)/φ(n)².
pub fn twin_constant_series(n_limit: u64) -> Result<TruncationReport> {
    if n_limit == 0 {
        return Err(Error::ZeroInput);
    }
    let tables = ArithTables::new(n_limit);
    let mut sum = KahanSum::new();
    let mut n = 1u64;
    while n <= n_limit {
        let mu = tables.mobius(n);
        if mu != 0 {
            let phi = tables.euler_phi(n);
            sum.add(mu as f64 / (phi * phi) as f64);
        }
        n += 2;
    }
    Ok(TruncationReport {
        method: Method::SeriesMuPhi2,
        terms_or_plimit: n_limit,
        value: sum.value(),
    })
}

/// Reciprocal of Σ over odd squarefree n ≤ n_limit of 1/(n·φ₂(n)), so the
/// reported value estimates C₂ directly like the other two routes.
pub fn twin_constant_reciprocal_series(n_limit: u64) -> Result<TruncationReport> {
    if n_limit == 0 {
        return Err(Error::ZeroInput);
    }
    let tables = ArithTables::new(n_limit);
    let mut sum = KahanSum::new();
    let mut n = 1u64;
    while n <= n_limit {
        if tables.mobius(n) != 0 {
            let phi2 = tables.phi2(n);
            debug_assert!(phi2 > 0);
            sum.add(1.0 / (n * phi2) as f64);
        }
        n += 2;
    }
    Ok(TruncationReport {
        method: Method::SeriesReciprocal,
        terms_or_plimit: n_limit,
        value: 1.0 / sum.value(),
    })
}

/// P·φ₂(P)/φ(P)² for P the primorial of x, evaluated factor by factor
/// without forming P: the prime 2 contributes exactly 2 and each odd prime
/// contributes p(p-2)/(p-1)², so this is twice the Euler product and the
/// doubling is exact in floating point.
pub fn primorial_ratio(x: u64) -> Result<TruncationReport> {
    if x < 2 {
        return Err(Error::OutOfRange {
            what: "primorial ratio prime limit",
            value: x,
            bound: 2,
        });
    }
    let value = if x < 3 {
        2.0
    } else {
        2.0 * twin_constant_product(x)?.value
    };
    Ok(TruncationReport {
        method: Method::PrimorialRatio,
        terms_or_plimit: x,
        value,
    })
}

/// Π_{p ≤ x} (1 - 1/p) next to e^{-γ}/ln x.
pub fn mertens_product(x: u64) -> Result<MertensReport> {
    if x < 3 {
        return Err(Error::OutOfRange {
            what: "mertens product limit",
            value: x,
            bound: 3,
        });
    }
    let lhs = prime_product(x, true, |p| 1.0 - 1.0 / p)?;
    let main_term = (-EULER_GAMMA).exp() / (x as f64).ln();
    Ok(MertensReport {
        x,
        lhs,
        main_term,
        ratio: lhs / main_term,
    })
}

/// (1 - 1/2) · Π_{2 < p ≤ x} (1 - 2/p) next to 2C₂e^{-2γ}/ln²x, with C₂
/// taken from the product route at the same limit.
pub fn twin_mertens_product(x: u64) -> Result<MertensReport> {
    if x < 3 {
        return Err(Error::OutOfRange {
            what: "twin mertens product limit",
            value: x,
            bound: 3,
        });
    }
    let lhs = 0.5 * prime_product(x, false, |p| 1.0 - 2.0 / p)?;
    let c2 = twin_constant_product(x)?.value;
    let ln_x = (x as f64).ln();
    let main_term = 2.0 * c2 * (-2.0 * EULER_GAMMA).exp() / (ln_x * ln_x);
    Ok(MertensReport {
        x,
        lhs,
        main_term,
        ratio: lhs / main_term,
    })
}

fn check_summatory_arg(x: u64) -> Result<()> {
    if x > SUMMATORY_X_MAX {
        return Err(Error::OutOfRange {
            what: "summatory identity argument",
            value: x,
            bound: SUMMATORY_X_MAX,
        });
    }
    Ok(())
}

/// L(x) = Σ_{n ≤ x} (-1)^{ω(n)}, with L = 0 below 1.
pub fn l_summatory(x: u64) -> Result<i64> {
    check_summatory_arg(x)?;
    Ok(l_summatory_with(&ArithTables::new(x.max(1)), x))
}

pub fn l_summatory_with(tables: &ArithTables, x: u64) -> i64 {
    (1..=x).map(|n| tables.parity_omega(n)).sum()
}

/// Σ_{n ≤ x} μ₂(n)·⌊x/n⌋, the weighted summatory of μ₂.
pub fn k_weighted(x: u64) -> Result<i64> {
    check_summatory_arg(x)?;
    Ok(k_weighted_with(&ArithTables::new(x.max(1)), x))
}

pub fn k_weighted_with(tables: &ArithTables, x: u64) -> i64 {
    (1..=x).map(|n| tables.mu2(n) * (x / n) as i64).sum()
}

/// The same sum through the identity
/// K(x) = L(x) + L(x/2) + 2L(x/4) + 4L(x/8) + ...; the series is finite
/// because L vanishes once x/2^k drops below 1.
pub fn k_via_l(x: u64) -> Result<i64> {
    check_summatory_arg(x)?;
    Ok(k_via_l_with(&ArithTables::new(x.max(1)), x))
}

pub fn k_via_l_with(tables: &ArithTables, x: u64) -> i64 {
    let mut total = l_summatory_with(tables, x);
    let mut coeff = 1i64;
    let mut y = x / 2;
    while y > 0 {
        total += coeff * l_summatory_with(tables, y);
        coeff *= 2;
        y /= 2;
    }
    total
}

fn check_dirichlet_args(s: f64, s_min: f64, n_limit: u64) -> Result<()> {
    if s < s_min || s.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "s = {s} is below the safe half-plane margin {s_min}"
        )));
    }
    if n_limit == 0 {
        return Err(Error::ZeroInput);
    }
    if n_limit > DIRICHLET_N_MAX {
        return Err(Error::OutOfRange {
            what: "dirichlet truncation depth",
            value: n_limit,
            bound: DIRICHLET_N_MAX,
        });
    }
    Ok(())
}

/// Partial sum Σ_{n ≤ N} μ₂(n)/n^s for s ≥ 1.5.
pub fn dirichlet_mu2(s: f64, n_limit: u64) -> Result<f64> {
    check_dirichlet_args(s, 1.5, n_limit)?;
    let tables = ArithTables::new(n_limit);
    let mut sum = KahanSum::new();
    for n in 1..=n_limit {
        let mu2 = tables.mu2(n);
        if mu2 != 0 {
            sum.add(mu2 as f64 / (n as f64).powf(s));
        }
    }
    Ok(sum.value())
}

/// Partial sum ζ₂(s) = Σ_{n ≤ N} 2^{Ω_o(n)}/n^s for s ≥ 1.5, where Ω_o
/// counts odd prime factors with multiplicity.
pub fn zeta2(s: f64, n_limit: u64) -> Result<f64> {
    check_dirichlet_args(s, 1.5, n_limit)?;
    let tables = ArithTables::new(n_limit);
    let mut sum = KahanSum::new();
    for n in 1..=n_limit {
        sum.add(tables.two_pow_big_omega_odd(n) as f64 / (n as f64).powf(s));
    }
    Ok(sum.value())
}

/// Partial sum Σ_{n ≤ N} φ₂(n)/n^s for s ≥ 2.5.
pub fn dirichlet_phi2(s: f64, n_limit: u64) -> Result<f64> {
    check_dirichlet_args(s, 2.5, n_limit)?;
    let tables = ArithTables::new(n_limit);
    let mut sum = KahanSum::new();
    for n in 1..=n_limit {
        sum.add(tables.phi2(n) as f64 / (n as f64).powf(s));
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEPTH: u64 = 1_000_000;

    #[test]
    fn product_small_limits_are_exact() {
        assert_eq!(twin_constant_product(3).unwrap().value, 0.75);
        assert_eq!(twin_constant_product(4).unwrap().value, 0.75);
        assert_eq!(twin_constant_product(5).unwrap().value, 0.703125);
        assert!(twin_constant_product(2).is_err());
    }

    #[test]
    fn product_at_depth_matches_reference() {
        let r = twin_constant_product(DEPTH).unwrap();
        assert_eq!(r.terms_or_plimit, DEPTH);
        assert!((r.value - 0.660161860589838).abs() < 1e-12);
        // true constant is 0.6601618158...; the tail is O(sum 1/p^2)
        assert!((r.value - 0.6601618158).abs() < 1e-7);
    }

    #[test]
    fn series_small_limits() {
        assert_eq!(twin_constant_series(1).unwrap().value, 1.0);
        assert_eq!(twin_constant_series(2).unwrap().value, 1.0);
        assert_eq!(twin_constant_series(3).unwrap().value, 0.75);
        assert!(twin_constant_series(0).is_err());
    }

    #[test]
    fn reciprocal_series_small_limits() {
        assert_eq!(twin_constant_reciprocal_series(1).unwrap().value, 1.0);
        let r = twin_constant_reciprocal_series(3).unwrap();
        assert!((1.0 / r.value - (1.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn three_routes_agree_at_depth() {
        let product = twin_constant_product(DEPTH).unwrap().value;
        let series = twin_constant_series(DEPTH).unwrap().value;
        let reciprocal = twin_constant_reciprocal_series(DEPTH).unwrap().value;
        assert!((product - series).abs() < 1e-6, "{product} vs {series}");
        assert!((product - reciprocal).abs() < 1e-5);
        assert!((series - reciprocal).abs() < 1e-5);
    }

    #[test]
    fn primorial_ratio_examples_and_identity() {
        assert_eq!(primorial_ratio(2).unwrap().value, 2.0);
        assert_eq!(primorial_ratio(3).unwrap().value, 1.5);
        assert!(primorial_ratio(1).is_err());
        for x in [3u64, 10, 100, 541, 10_000] {
            let ratio = primorial_ratio(x).unwrap().value;
            let product = twin_constant_product(x).unwrap().value;
            assert_eq!(ratio / product, 2.0, "x = {x}");
        }
    }

    #[test]
    fn mertens_products() {
        let m = mertens_product(3).unwrap();
        assert!((m.lhs - 1.0 / 3.0).abs() < 1e-15);
        let t = twin_mertens_product(3).unwrap();
        assert!((t.lhs - 1.0 / 6.0).abs() < 1e-15);

        let m = mertens_product(DEPTH).unwrap();
        assert!((m.ratio - 1.0).abs() < 0.05, "ratio {}", m.ratio);
        let t = twin_mertens_product(DEPTH).unwrap();
        assert!((t.ratio - 1.0).abs() < 0.05, "ratio {}", t.ratio);
    }

    #[test]
    fn mertens_lhs_monotone_decreasing() {
        let xs = [10u64, 100, 1000, 10_000, 100_000];
        for w in xs.windows(2) {
            assert!(mertens_product(w[1]).unwrap().lhs < mertens_product(w[0]).unwrap().lhs);
            assert!(
                twin_mertens_product(w[1]).unwrap().lhs < twin_mertens_product(w[0]).unwrap().lhs
            );
        }
    }

    #[test]
    fn summatory_identity_hand_values() {
        assert_eq!(l_summatory(1).unwrap(), 1);
        assert_eq!(k_weighted(1).unwrap(), 1);
        assert_eq!(k_via_l(1).unwrap(), 1);
        assert_eq!(k_weighted(2).unwrap(), 1);
        assert_eq!(k_via_l(2).unwrap(), 1);
        assert_eq!(k_weighted(4).unwrap(), 0);
        assert_eq!(k_via_l(4).unwrap(), 0);
        assert_eq!(l_summatory(0).unwrap(), 0);
        assert!(k_weighted(SUMMATORY_X_MAX + 1).is_err());
    }

    #[test]
    fn summatory_identity_exact_sweep() {
        let tables = ArithTables::new(10_000);
        for x in 1..=10_000u64 {
            assert_eq!(
                k_weighted_with(&tables, x),
                k_via_l_with(&tables, x),
                "x = {x}"
            );
        }
    }

    #[test]
    fn dirichlet_identities() {
        assert_eq!(dirichlet_mu2(2.0, 1).unwrap(), 1.0);
        let product = dirichlet_mu2(2.0, DEPTH).unwrap() * zeta2(2.0, DEPTH).unwrap();
        assert!((product - 1.0).abs() < 1e-3, "got {product}");

        let zeta_2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let lhs = dirichlet_phi2(3.0, DEPTH).unwrap();
        let rhs = zeta_2 * dirichlet_mu2(3.0, DEPTH).unwrap();
        assert!((lhs - rhs).abs() < 1e-3, "{lhs} vs {rhs}");
    }

    #[test]
    fn dirichlet_truncation_error_shrinks() {
        let err = |n: u64| (dirichlet_mu2(2.0, n).unwrap() * zeta2(2.0, n).unwrap() - 1.0).abs();
        let (e3, e4, e5) = (err(1_000), err(10_000), err(100_000));
        assert!(e3 > e4 && e4 > e5, "{e3} {e4} {e5}");
    }

    #[test]
    fn dirichlet_argument_validation() {
        assert!(dirichlet_mu2(1.2, 100).is_err());
        assert!(zeta2(1.2, 100).is_err());
        assert!(dirichlet_phi2(2.2, 100).is_err());
        assert!(dirichlet_mu2(2.0, DIRICHLET_N_MAX + 1).is_err());
        assert!(dirichlet_mu2(f64::NAN, 100).is_err());
    }
}
