//! Exact Legendre-style counting by inclusion-exclusion.
//!
//! For primes, with P(z) the product of all primes up to z = floor(sqrt(x)):
//!
//!   pi(x) - pi(sqrt(x)) + 1 = sum over squarefree d | P(z) of mu(d) * floor(x/d)
//!
//! For twin pairs the sieve must knock out both members, so divisors split
//! into coprime parts (a, b) with a | p-side and b | (p+2)-side, a odd,
//! ab squarefree:
//!
//!   pi2(x) - pi2(z) = sum over (a,b) of mu(ab) * floor((x - l) / (ab))
//!
//! where l = l(a,b) is the least positive solution of l = 0 (mod a),
//! l + 2 = 0 (mod b), and the floor rounds toward minus infinity (a term
//! with l > x contributes -1, encoding an empty congruence class). The
//! sieving bound is z = floor(sqrt(x + 2)), not floor(sqrt(x)): the second
//! member of a pair near x can reach x + 2, and for x = q^2 - 2 with q and
//! q^2 - 2 both prime (x = 23 is the smallest case) the smaller bound
//! misses the composite q^2 = x + 2 and overcounts by one.
//!
//! Enumeration order is a counter: the flag assigning 2 to b is the fastest
//! digit, then one ternary digit per odd prime ascending (skip, to a, to b).

use crate::arith::{gcd, isqrt};
use crate::{Error, Result};

/// Exact-enumeration cap for the twin formula: odd primes up to z.
const MAX_ODD_PRIMES: u32 = 14;
/// Cap for the prime formula by x; the zero-term-pruned walk visits no more
/// nodes than there are squarefree numbers below x.
const MAX_PI_X: u64 = 100_000_000;

/// Solution of a*t + 2 = 0 (mod b): the canonical t, and l = a*t, the least
/// positive number divisible by a whose successor-plus-one is divisible by b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruenceSolution {
    pub t: u64,
    pub l: u64,
}

/// One inclusion-exclusion term of the twin formula: a odd, gcd(a, b) = 1,
/// ab squarefree. `l` is the least positive common solution and `mu` the
/// Möbius sign of ab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorPair {
    pub a: u64,
    pub b: u64,
    pub l: u64,
    pub mu: i8,
}

fn inv_mod(a: u64, m: u64) -> u64 {
    // extended Euclid; m is prime here and a not divisible by m
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m as i128) as u64
}

/// Least positive t with a*t + 2 = 0 (mod b), for odd a coprime to b.
/// For b > 2 the solution is unique in (0, b); b = 1 gives t = 1 and b = 2
/// has no odd-t solution, so the canonical answer is t = 2 (l = 2a, the
/// least positive l that works).
pub fn solve_t(a: u64, b: u64) -> Result<CongruenceSolution> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroInput);
    }
    if a % 2 == 0 {
        return Err(Error::InvalidArgument(format!("a = {a} must be odd")));
    }
    if gcd(a, b) != 1 {
        return Err(Error::NotCoprime { a, b });
    }
    let t = match b {
        1 => 1,
        2 => 2,
        _ => {
            let t = (b - 2 % b) % b; // -2 mod b
            let t = mul_mod_small(t, inv_mod(a, b), b);
            debug_assert!(t > 0 && t < b);
            t
        }
    };
    Ok(CongruenceSolution { t, l: a * t })
}

fn mul_mod_small(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Odd primes up to z, stopping once `cap` of them have been found; the
/// bool reports whether the scan stopped early.
fn odd_primes_capped(z: u64, cap: usize) -> (Vec<u64>, bool) {
    let mut ps = Vec::new();
    let mut n = 3u64;
    while n <= z {
        if (3..)
            .step_by(2)
            .take_while(|d| d * d <= n)
            .all(|d| n % d != 0)
        {
            if ps.len() == cap {
                return (ps, true);
            }
            ps.push(n);
        }
        n += 2;
    }
    (ps, false)
}

/// All divisor pairs (a, b) with ab | P(z), ab squarefree, a odd, in counter
/// order, each carrying its congruence solution and Möbius sign. The count
/// is 2 * 3^k for k odd primes up to z.
pub fn enumerate_pairs(z: u64) -> Result<Vec<DivisorPair>> {
    let (odd, truncated) = odd_primes_capped(z, MAX_ODD_PRIMES as usize);
    if truncated {
        // 2 * 3^(pi(z) - 1) with pi(z) ~ z / ln z, saturated; only feeds
        // the error message
        let k = (z as f64 / (z as f64).ln()) - 1.0;
        let estimated = 2.0 * 3f64.powf(k.max((MAX_ODD_PRIMES + 1) as f64));
        let estimated = if estimated < u128::MAX as f64 {
            estimated as u128
        } else {
            u128::MAX
        };
        return Err(Error::TermBudget {
            x: z,
            estimated_terms: estimated,
            cap: 2 * 3u128.pow(MAX_ODD_PRIMES),
        });
    }
    let include_two = z >= 2;
    let mut out = Vec::with_capacity(2usize.pow(include_two as u32) * 3usize.pow(odd.len() as u32));
    // descend from the largest odd prime so its ternary digit varies slowest
    walk(&odd, odd.len(), 1, 1, 1, 1, include_two, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    odd: &[u64],
    depth: usize,
    a: u64,
    b: u64,
    l: u64,
    mu: i64,
    include_two: bool,
    out: &mut Vec<DivisorPair>,
) {
    if depth == 0 {
        out.push(DivisorPair {
            a,
            b,
            l,
            mu: mu as i8,
        });
        if include_two {
            // fold 2 into b: new constraint l' even, step a*b stays odd
            let m = a * b;
            let l2 = l + m * (l % 2);
            out.push(DivisorPair {
                a,
                b: 2 * b,
                l: l2,
                mu: -mu as i8,
            });
        }
        return;
    }
    let p = odd[depth - 1];
    let m = a * b;
    // skip p
    walk(odd, depth - 1, a, b, l, mu, include_two, out);
    // p joins a: extend l to the multiple of p in its class mod m
    let k = if l % p == 0 {
        0
    } else {
        mul_mod_small(p - l % p, inv_mod(m, p), p)
    };
    walk(odd, depth - 1, a * p, b, l + m * k, -mu, include_two, out);
    // p joins b: extend l so p divides l + 2
    let r = (l + 2) % p;
    let k = if r == 0 {
        0
    } else {
        mul_mod_small(p - r, inv_mod(m, p), p)
    };
    walk(odd, depth - 1, a, b * p, l + m * k, -mu, include_two, out);
}

/// Sieving bound used by the twin formula (see module docs).
pub fn twin_sieve_bound(x: u64) -> u64 {
    isqrt(x + 2)
}

/// Evaluate the twin formula terms at x. Floors round toward minus
/// infinity so empty congruence classes contribute correctly: since
/// 1 ≤ l ≤ ab, a term with l > x is exactly −mu, and only terms with
/// l ≤ x need a division.
pub fn eval_pairs(x: u64, pairs: &[DivisorPair]) -> i64 {
    let mut sum = 0i64;
    let mut mu_total = 0i64;
    for p in pairs {
        mu_total += p.mu as i64;
        if p.l <= x {
            sum += p.mu as i64 * (((x - p.l) / (p.a * p.b)) as i64 + 1);
        }
    }
    sum - mu_total
}

/// pi2(x) - pi2(z) with z = floor(sqrt(x + 2)), by exact inclusion-exclusion
/// over 2 * 3^k terms. Refuses x where the term count is impractical.
pub fn legendre_pi2(x: u64) -> Result<i64> {
    if x < 9 {
        return Err(Error::OutOfRange {
            what: "legendre twin count argument",
            value: x,
            bound: 9,
        });
    }
    let pairs = enumerate_pairs(twin_sieve_bound(x)).map_err(|e| match e {
        Error::TermBudget {
            estimated_terms,
            cap,
            ..
        } => Error::TermBudget {
            x,
            estimated_terms,
            cap,
        },
        other => other,
    })?;
    Ok(eval_pairs(x, &pairs))
}

/// pi(x) - pi(sqrt(x)) + 1 as the signed divisor sum over P(sqrt(x)).
/// Subsets whose product exceeds x are pruned; they contribute zero terms,
/// so the sum is unchanged. Visited nodes are bounded by the number of
/// squarefree integers up to x, hence the cap on x itself.
pub fn legendre_pi(x: u64) -> Result<i64> {
    if x < 4 {
        return Err(Error::OutOfRange {
            what: "legendre prime count argument",
            value: x,
            bound: 4,
        });
    }
    if x > MAX_PI_X {
        return Err(Error::TermBudget {
            x,
            estimated_terms: (x as u128) * 6 / 10,
            cap: MAX_PI_X as u128,
        });
    }
    let z = isqrt(x);
    let mut primes = vec![2u64];
    primes.extend(odd_primes_capped(z, usize::MAX).0);
    fn dfs(x: u64, primes: &[u64], from: usize, d: u64, sign: i64, acc: &mut i64) {
        *acc += sign * (x / d) as i64;
        for i in from..primes.len() {
            let p = primes[i];
            match d.checked_mul(p) {
                Some(dp) if dp <= x => dfs(x, primes, i + 1, dp, -sign, acc),
                _ => break,
            }
        }
    }
    let mut acc = 0i64;
    dfs(x, &primes, 0, 1, 1, &mut acc);
    Ok(acc)
}
