//! Exact integer arithmetic: factorization and the classical and modified
//! multiplicative functions.
//!
//! The modified totient `phi2(n)` counts residues a in [1, n] with both a and
//! a+2 coprime to n. The modified Möbius function `mu2(n)` is mu(n) * 2^k
//! where k is the number of distinct odd prime divisors of n. Both are
//! multiplicative; `phi2` satisfies phi2(n) = n * sum over d|n of mu2(d)/d.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Largest prime kept in the shared trial-division table.
const TRIAL_TABLE_LIMIT: u64 = 1_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor of the square root, exact for all u64.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64. The witness set below is proven
/// sufficient for every n < 3.3 * 10^24, so no probabilistic answer is
/// ever returned.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn trial_primes() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let lim = TRIAL_TABLE_LIMIT as usize;
        let mut composite = vec![false; lim + 1];
        let mut primes = Vec::new();
        for i in 2..=lim {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= lim {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Brent-cycle Pollard rho. Only called on odd composites with no prime
/// factor below the trial table limit; the constants are fixed so results
/// are reproducible.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut saved = (x, y);
        let mut count = 0u32;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
            count += 1;
            if count == 1 << 20 {
                // periodic restart guard; in practice never reached for u64
                saved = (x, y);
                count = 0;
            }
        }
        let _ = saved;
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn split_factor(out: &mut Vec<u64>, n: u64) {
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_factor(out, d);
    split_factor(out, n / d);
}

/// An integer together with its prime factorization, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Trial division by a sieved prime table, with deterministic
    /// Miller-Rabin plus Pollard rho for cofactors beyond the table.
    pub fn factorize(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroInput);
        }
        let mut rem = n;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for &p in trial_primes() {
            let p = p as u64;
            if p * p > rem {
                break;
            }
            if rem % p == 0 {
                let mut a = 0;
                while rem % p == 0 {
                    rem /= p;
                    a += 1;
                }
                factors.push((p, a));
            }
        }
        if rem > 1 {
            if is_prime_u64(rem) {
                factors.push((rem, 1));
            } else {
                // composite cofactor with every prime factor above the
                // trial table; rho splits it deterministically
                let mut large = Vec::new();
                split_factor(&mut large, rem);
                large.sort_unstable();
                for p in large {
                    match factors.last_mut() {
                        Some(last) if last.0 == p => last.1 += 1,
                        _ => factors.push((p, 1)),
                    }
                }
            }
        }
        Ok(Self { n, factors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// (prime, exponent) pairs, primes ascending.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Number of distinct odd prime divisors.
    pub fn omega_odd(&self) -> u32 {
        self.factors.iter().filter(|&&(p, _)| p > 2).count() as u32
    }

    /// Number of odd prime divisors counted with multiplicity.
    pub fn big_omega_odd(&self) -> u32 {
        self.factors
            .iter()
            .filter(|&&(p, _)| p > 2)
            .map(|&(_, a)| a)
            .sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == 1)
    }

    pub fn mobius(&self) -> i64 {
        if !self.is_squarefree() {
            return 0;
        }
        if self.omega() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn euler_phi(&self) -> u64 {
        let mut v = self.n as u128;
        for &(p, _) in &self.factors {
            v = v / p as u128 * (p as u128 - 1);
        }
        v as u64
    }

    /// mu2(n) = mu(n) * 2^{omega_odd(n)}.
    pub fn mu2(&self) -> i64 {
        let mu = self.mobius();
        if mu == 0 {
            0
        } else {
            mu << self.omega_odd()
        }
    }

    /// phi2(n) = #{a <= n : gcd(a, n) = gcd(a+2, n) = 1}
    ///         = n * (1 - theta/2) * prod over odd p|n of (1 - 2/p),
    /// theta = 1 for even n. Each step multiplies before dividing and the
    /// division is exact, so the result is exact in integers.
    pub fn phi2(&self) -> u64 {
        let mut v = self.n as u128;
        for &(p, _) in &self.factors {
            if p == 2 {
                v /= 2;
            } else {
                v = v * (p as u128 - 2) / p as u128;
            }
        }
        v as u64
    }

    /// All divisors, in the mixed-radix order generated by the factorization
    /// (not sorted).
    pub fn divisors(&self) -> Divisors<'_> {
        Divisors {
            factors: &self.factors,
            exps: vec![0; self.factors.len()],
            done: false,
        }
    }

    /// Sum of mu2 over all divisors: 0 for even n, (-1)^omega(n) for odd n.
    /// Computed here by direct enumeration; the closed form lives in tests.
    pub fn divisor_sum_mu2(&self) -> i64 {
        let mut total = 0i64;
        self.for_each_divisor_factored(|_, exps| {
            if exps.iter().any(|&a| a > 1) {
                return;
            }
            let r = exps.iter().filter(|&&a| a == 1).count() as u32;
            let r_odd = exps
                .iter()
                .zip(&self.factors)
                .filter(|(&a, &(p, _))| a == 1 && p > 2)
                .count() as u32;
            let sign = if r % 2 == 0 { 1i64 } else { -1 };
            total += sign << r_odd;
        });
        total
    }

    /// Sum of phi2 over all divisors, by direct enumeration.
    pub fn divisor_sum_phi2(&self) -> u64 {
        let mut total = 0u64;
        self.for_each_divisor_factored(|d, exps| {
            let mut v = d as u128;
            for (&a, &(p, _)) in exps.iter().zip(&self.factors) {
                if a == 0 {
                    continue;
                }
                if p == 2 {
                    v /= 2;
                } else {
                    v = v * (p as u128 - 2) / p as u128;
                }
            }
            total += v as u64;
        });
        total
    }

    fn for_each_divisor_factored(&self, mut f: impl FnMut(u64, &[u32])) {
        let r = self.factors.len();
        let mut exps = vec![0u32; r];
        loop {
            let mut d = 1u64;
            for (&(p, _), &a) in self.factors.iter().zip(&exps) {
                for _ in 0..a {
                    d *= p;
                }
            }
            f(d, &exps);
            let mut i = 0;
            loop {
                if i == r {
                    return;
                }
                if exps[i] < self.factors[i].1 {
                    exps[i] += 1;
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }
}

pub struct Divisors<'a> {
    factors: &'a [(u64, u32)],
    exps: Vec<u32>,
    done: bool,
}

impl Iterator for Divisors<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let mut d = 1u64;
        for (&(p, _), &a) in self.factors.iter().zip(&self.exps) {
            for _ in 0..a {
                d *= p;
            }
        }
        let mut i = 0;
        loop {
            if i == self.factors.len() {
                self.done = true;
                break;
            }
            if self.exps[i] < self.factors[i].1 {
                self.exps[i] += 1;
                break;
            }
            self.exps[i] = 0;
            i += 1;
        }
        Some(d)
    }
}

/// Counting definition of phi2, O(n log n). Oracle for the product form;
/// intended for n up to about 10^6.
pub fn phi2_bruteforce(n: u64) -> u64 {
    (1..=n)
        .filter(|&a| gcd(a, n) == 1 && gcd(a + 2, n) == 1)
        .count() as u64
}

/// A residue class a (mod q) can hold more than one twin pair first member
/// only if both a and a+2 are coprime to q.
pub fn is_admissible(a: u64, q: u64) -> bool {
    debug_assert!(q >= 1);
    gcd(a % q, q) == 1 && gcd((a + 2) % q, q) == 1
}

/// Smallest-prime-factor table for bulk evaluation of the multiplicative
/// functions over a range. Built with a linear sieve.
pub struct ArithTables {
    limit: u64,
    spf: Vec<u32>,
}

impl ArithTables {
    pub fn new(limit: u64) -> Self {
        assert!(limit >= 1, "table limit must be positive");
        assert!(limit <= u32::MAX as u64, "spf table entries are u32");
        let lim = limit as usize;
        let mut spf = vec![0u32; lim + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=lim {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let p = p as usize;
                if p > spf[i] as usize || i * p > lim {
                    break;
                }
                spf[i * p] = p as u32;
            }
        }
        Self { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn walk(&self, mut n: u64, mut f: impl FnMut(u64, u32)) {
        debug_assert!(n >= 1 && n <= self.limit);
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            f(p, a);
        }
    }

    pub fn omega(&self, n: u64) -> u32 {
        let mut w = 0;
        self.walk(n, |_, _| w += 1);
        w
    }

    /// (-1)^omega(n), the summand of the L summatory function.
    pub fn parity_omega(&self, n: u64) -> i64 {
        if self.omega(n) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn mobius(&self, n: u64) -> i64 {
        let mut squarefree = true;
        let mut w = 0u32;
        self.walk(n, |_, a| {
            if a > 1 {
                squarefree = false;
            }
            w += 1;
        });
        if !squarefree {
            0
        } else if w % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn mu2(&self, n: u64) -> i64 {
        let mut squarefree = true;
        let mut w = 0u32;
        let mut w_odd = 0u32;
        self.walk(n, |p, a| {
            if a > 1 {
                squarefree = false;
            }
            w += 1;
            if p > 2 {
                w_odd += 1;
            }
        });
        if !squarefree {
            0
        } else {
            let sign = if w % 2 == 0 { 1i64 } else { -1 };
            sign << w_odd
        }
    }

    pub fn euler_phi(&self, n: u64) -> u64 {
        let mut v = n as u128;
        self.walk(n, |p, _| v = v / p as u128 * (p as u128 - 1));
        v as u64
    }

    pub fn phi2(&self, n: u64) -> u64 {
        let mut v = n as u128;
        self.walk(n, |p, _| {
            if p == 2 {
                v /= 2;
            } else {
                v = v * (p as u128 - 2) / p as u128;
            }
        });
        v as u64
    }

    /// 2^{Omega_odd(n)}, the summand of the zeta2 Dirichlet series.
    pub fn two_pow_big_omega_odd(&self, n: u64) -> u64 {
        let mut e = 0u32;
        self.walk(n, |p, a| {
            if p > 2 {
                e += a;
            }
        });
        1u64 << e
    }
}
