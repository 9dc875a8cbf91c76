//! Streaming bias statistics over primes and twin pairs.
//!
//! Three families of statistics, all computed in one ascending pass:
//!
//! * type 1: residue-class counts mod q with the running difference
//!   Δ = π(x;q;a_i) − π(x;q;a_j) and its scaled form Δ̄;
//! * type 2: class transitions between consecutive elements, with
//!   δ(x;q;a_i|a_j) = (transitions a_i→a_j) / (transitions out of a_i);
//! * type 3: for each gap D between consecutive elements, whether D−1 and
//!   D+1 are prime, with δ± the fraction of elements whose gap qualifies.
//!
//! A twin pair is classified by its first member. The n-th element counts
//! toward a snapshot at x when the element itself is ≤ x; its successor
//! only has to exist below the sieve ceiling, so scans need a store built
//! with some headroom past the largest snapshot point (see
//! [`Subject::recommended_margin`]). A final element with no successor in
//! the store is dropped from transition and gap counts.
//!
//! Also here: Brun partial sums split by residue class, the one-pair check
//! for non-admissible classes, and the equidistribution ratio report.

use std::collections::BTreeMap;

use crate::arith::{is_admissible, FactoredInteger};
use crate::sieve::PrimeStore;
use crate::{Error, KahanSum, Result};

/// What the scan runs over: primes themselves, or first members of twin
/// pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Primes,
    Twins,
}

impl Subject {
    pub fn tag(self) -> &'static str {
        match self {
            Subject::Primes => "primes",
            Subject::Twins => "twins",
        }
    }

    /// Default sampling stride: a data point after every 50 primes or
    /// every 25 twin pairs.
    pub fn default_sample_every(self) -> u64 {
        match self {
            Subject::Primes => 50,
            Subject::Twins => 25,
        }
    }

    /// Default exponent k in Δ̄ = Δ·ln^k(x)/(scale·√x).
    pub fn default_log_power(self) -> u32 {
        match self {
            Subject::Primes => 1,
            Subject::Twins => 2,
        }
    }

    fn delta_bar_scale(self) -> f64 {
        match self {
            Subject::Primes => 1.0,
            Subject::Twins => 10.0,
        }
    }

    /// How far past the largest snapshot point the backing store should
    /// extend so every element still finds its successor. Sized from the
    /// largest known gaps well beyond 10¹⁰, with a wide cushion.
    pub fn recommended_margin(self) -> u64 {
        match self {
            Subject::Primes => 10_000,
            Subject::Twins => 200_000,
        }
    }
}

/// Δ̄ = Δ·ln^k(x)/(scale·√x); the scale is 10 for twins and 1 for primes.
/// The multiplier is positive, so the sign of Δ is preserved.
pub fn delta_bar(delta: i64, x: u64, subject: Subject, log_power: u32) -> f64 {
    let xf = x as f64;
    delta as f64 * xf.ln().powi(log_power as i32) / (subject.delta_bar_scale() * xf.sqrt())
}

/// Counts per residue class mod q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTally {
    q: u64,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl ResidueTally {
    pub fn new(q: u64) -> Self {
        Self {
            q,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn add(&mut self, element: u64) {
        *self.counts.entry(element % self.q).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn count(&self, class: u64) -> u64 {
        self.counts.get(&(class % self.q)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }
}

/// Counts of consecutive-element class transitions mod q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTally {
    q: u64,
    counts: BTreeMap<(u64, u64), u64>,
    from_totals: BTreeMap<u64, u64>,
}

impl TransitionTally {
    pub fn new(q: u64) -> Self {
        Self {
            q,
            counts: BTreeMap::new(),
            from_totals: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, from_element: u64, to_element: u64) {
        let key = (from_element % self.q, to_element % self.q);
        *self.counts.entry(key).or_insert(0) += 1;
        *self.from_totals.entry(key.0).or_insert(0) += 1;
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn count(&self, a_i: u64, a_j: u64) -> u64 {
        self.counts
            .get(&(a_i % self.q, a_j % self.q))
            .copied()
            .unwrap_or(0)
    }

    pub fn from_total(&self, a_i: u64) -> u64 {
        self.from_totals.get(&(a_i % self.q)).copied().unwrap_or(0)
    }

    /// δ(x;q;a_i|a_j): fraction of transitions out of class a_i that land
    /// in class a_j. Zero when a_i has no outgoing transitions yet.
    pub fn delta(&self, a_i: u64, a_j: u64) -> f64 {
        match self.from_total(a_i) {
            0 => 0.0,
            n => self.count(a_i, a_j) as f64 / n as f64,
        }
    }

    pub fn counts(&self) -> &BTreeMap<(u64, u64), u64> {
        &self.counts
    }
}

/// Counts of gaps D with D+1 (plus) or D−1 (minus) prime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GapTally {
    pub plus: u64,
    pub minus: u64,
    pub gaps: u64,
}

/// One type-1 snapshot: class counts at x for the requested pair, with the
/// derived statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSample {
    pub x: u64,
    pub count_i: u64,
    pub count_j: u64,
    pub total: u64,
    /// δ(x;q;a_i) = count_i / total
    pub delta_i: f64,
    pub delta_j: f64,
    /// Δ = count_i − count_j
    pub delta: i64,
    pub delta_bar: f64,
}

/// One type-2 snapshot: the full transition tally as of x.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSample {
    pub x: u64,
    pub tally: TransitionTally,
}

/// One type-3 snapshot at x: gap counts over `elements` stream members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub x: u64,
    pub plus: u64,
    pub minus: u64,
    pub elements: u64,
    pub delta_plus: f64,
    pub delta_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type1Run {
    /// every sample_every-th element
    pub samples: Vec<BiasSample>,
    /// requested exact-x snapshot points
    pub table_rows: Vec<BiasSample>,
    pub final_tally: ResidueTally,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type2Run {
    pub samples: Vec<TransitionSample>,
    pub table_rows: Vec<TransitionSample>,
    pub final_tally: TransitionTally,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type3Run {
    pub samples: Vec<GapSample>,
    pub table_rows: Vec<GapSample>,
    pub final_tally: GapTally,
}

/// Brun partial sums Σ (1/p + 1/(p+2)) over twin firsts p ≤ limit, split
/// by the class of p mod q. The total is accumulated independently of the
/// per-class sums.
#[derive(Debug, Clone, PartialEq)]
pub struct BrunReport {
    pub q: u64,
    pub limit: u64,
    pub class_sums: BTreeMap<u64, f64>,
    pub total: f64,
    pub pairs: u64,
}

/// Per-class outcome of the non-admissible one-pair check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonAdmissibleClass {
    pub class: u64,
    /// first member of the single pair the class holds, if any
    pub pair_first: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem31Report {
    pub q: u64,
    pub limit: u64,
    pub classes: Vec<NonAdmissibleClass>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistributionRow {
    pub class: u64,
    pub count: u64,
    /// π₂(limit) / π₂(limit;q;class)
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub q: u64,
    pub limit: u64,
    pub phi2_q: u64,
    pub pi2_total: u64,
    pub rows: Vec<EquidistributionRow>,
}

fn check_scan_args(store: &PrimeStore, limit: u64, sample_every: u64) -> Result<()> {
    if limit > store.limit() {
        return Err(Error::OutOfRange {
            what: "bias scan limit (store too small)",
            value: limit,
            bound: store.limit(),
        });
    }
    if sample_every == 0 {
        return Err(Error::ZeroInput);
    }
    Ok(())
}

fn check_modulus(q: u64, residues: &[u64]) -> Result<()> {
    if q < 3 {
        return Err(Error::InvalidArgument(format!(
            "modulus q = {q} must be at least 3"
        )));
    }
    for &a in residues {
        if a >= q {
            return Err(Error::InvalidArgument(format!(
                "residue {a} is not reduced mod {q}"
            )));
        }
    }
    Ok(())
}

/// Sorted, deduplicated snapshot points ≤ limit.
fn normalize_thresholds(thresholds: &[u64], limit: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = thresholds.iter().copied().filter(|&t| t <= limit).collect();
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn stream_elements(store: &PrimeStore, subject: Subject, mut f: impl FnMut(u64) -> bool) {
    match subject {
        Subject::Twins => {
            let twins = store.twin_firsts();
            for &p in twins.firsts() {
                if !f(p) {
                    return;
                }
            }
        }
        Subject::Primes => {
            for p in store.primes() {
                if !f(p) {
                    return;
                }
            }
        }
    }
}

/// Residue-class bias scan. Tallies every element ≤ limit by class mod q,
/// emits a sample after every `sample_every`-th element (subject default if
/// None), a table row at each requested threshold, and Δ̄ with exponent
/// `log_power` (subject default if None).
#[allow(clippy::too_many_arguments)]
pub fn type1_series(
    store: &PrimeStore,
    limit: u64,
    q: u64,
    a_i: u64,
    a_j: u64,
    sample_every: Option<u64>,
    log_power: Option<u32>,
    subject: Subject,
    thresholds: &[u64],
) -> Result<Type1Run> {
    let stride = sample_every.unwrap_or(subject.default_sample_every());
    let k = log_power.unwrap_or(subject.default_log_power());
    check_modulus(q, &[a_i, a_j])?;
    check_scan_args(store, limit, stride)?;
    let thresholds = normalize_thresholds(thresholds, limit);

    let mut tally = ResidueTally::new(q);
    let mut elements = 0u64;
    let mut thr_idx = 0usize;
    let mut run = Type1Run {
        samples: Vec::new(),
        table_rows: Vec::new(),
        final_tally: ResidueTally::new(q),
    };
    let snapshot = |x: u64, tally: &ResidueTally| {
        let count_i = tally.count(a_i);
        let count_j = tally.count(a_j);
        let total = tally.total();
        let delta = count_i as i64 - count_j as i64;
        BiasSample {
            x,
            count_i,
            count_j,
            total,
            delta_i: if total == 0 {
                0.0
            } else {
                count_i as f64 / total as f64
            },
            delta_j: if total == 0 {
                0.0
            } else {
                count_j as f64 / total as f64
            },
            delta,
            delta_bar: delta_bar(delta, x, subject, k),
        }
    };

    stream_elements(store, subject, |e| {
        while thr_idx < thresholds.len() && thresholds[thr_idx] < e {
            run.table_rows.push(snapshot(thresholds[thr_idx], &tally));
            thr_idx += 1;
        }
        if e > limit {
            return false;
        }
        tally.add(e);
        elements += 1;
        if elements % stride == 0 {
            run.samples.push(snapshot(e, &tally));
        }
        true
    });
    while thr_idx < thresholds.len() {
        run.table_rows.push(snapshot(thresholds[thr_idx], &tally));
        thr_idx += 1;
    }
    run.final_tally = tally;
    Ok(run)
}

/// Consecutive-element class transition scan. A transition (p, p') counts
/// toward snapshots at x whenever p ≤ x; the successor p' merely has to
/// exist in the store, so it may exceed x and even `limit`. Samples are
/// taken at every `sample_every`-th element and emitted once that
/// element's own transition is known.
pub fn type2_series(
    store: &PrimeStore,
    limit: u64,
    q: u64,
    sample_every: Option<u64>,
    subject: Subject,
    thresholds: &[u64],
) -> Result<Type2Run> {
    let stride = sample_every.unwrap_or(subject.default_sample_every());
    check_modulus(q, &[])?;
    check_scan_args(store, limit, stride)?;
    let thresholds = normalize_thresholds(thresholds, limit);

    let mut tally = TransitionTally::new(q);
    let mut prev: Option<u64> = None;
    let mut pending_sample: Option<u64> = None;
    let mut elements = 0u64;
    let mut thr_idx = 0usize;
    let mut samples = Vec::new();
    let mut table_rows = Vec::new();

    stream_elements(store, subject, |e| {
        if let Some(p) = prev {
            if p <= limit {
                tally.add(p, e);
            }
        }
        if let Some(x) = pending_sample.take() {
            samples.push(TransitionSample {
                x,
                tally: tally.clone(),
            });
        }
        while thr_idx < thresholds.len() && thresholds[thr_idx] < e {
            table_rows.push(TransitionSample {
                x: thresholds[thr_idx],
                tally: tally.clone(),
            });
            thr_idx += 1;
        }
        if e > limit {
            return false;
        }
        elements += 1;
        if elements % stride == 0 {
            pending_sample = Some(e);
        }
        prev = Some(e);
        true
    });
    while thr_idx < thresholds.len() {
        table_rows.push(TransitionSample {
            x: thresholds[thr_idx],
            tally: tally.clone(),
        });
        thr_idx += 1;
    }
    Ok(Type2Run {
        samples,
        table_rows,
        final_tally: tally,
    })
}

/// Gap neighbor scan. For consecutive elements p < p' with p ≤ limit,
/// D = p' − p is tested for D+1 and D−1 prime against the same store.
pub fn type3_series(
    store: &PrimeStore,
    limit: u64,
    sample_every: Option<u64>,
    subject: Subject,
    thresholds: &[u64],
) -> Result<Type3Run> {
    let stride = sample_every.unwrap_or(subject.default_sample_every());
    check_scan_args(store, limit, stride)?;
    let thresholds = normalize_thresholds(thresholds, limit);

    let mut tally = GapTally::default();
    let mut prev: Option<u64> = None;
    let mut pending_sample: Option<u64> = None;
    let mut elements = 0u64;
    let mut thr_idx = 0usize;
    let mut samples = Vec::new();
    let mut table_rows = Vec::new();
    let snapshot = |x: u64, tally: &GapTally, elements: u64| GapSample {
        x,
        plus: tally.plus,
        minus: tally.minus,
        elements,
        delta_plus: if elements == 0 {
            0.0
        } else {
            tally.plus as f64 / elements as f64
        },
        delta_minus: if elements == 0 {
            0.0
        } else {
            tally.minus as f64 / elements as f64
        },
    };

    stream_elements(store, subject, |e| {
        if let Some(p) = prev {
            if p <= limit {
                let d = e - p;
                tally.gaps += 1;
                if store.is_prime(d + 1) {
                    tally.plus += 1;
                }
                if d >= 2 && store.is_prime(d - 1) {
                    tally.minus += 1;
                }
            }
        }
        if let Some(x) = pending_sample.take() {
            samples.push(snapshot(x, &tally, elements));
        }
        while thr_idx < thresholds.len() && thresholds[thr_idx] < e {
            table_rows.push(snapshot(thresholds[thr_idx], &tally, elements));
            thr_idx += 1;
        }
        if e > limit {
            return false;
        }
        elements += 1;
        if elements % stride == 0 {
            pending_sample = Some(e);
        }
        prev = Some(e);
        true
    });
    while thr_idx < thresholds.len() {
        table_rows.push(snapshot(thresholds[thr_idx], &tally, elements));
        thr_idx += 1;
    }
    Ok(Type3Run {
        samples,
        table_rows,
        final_tally: tally,
    })
}

/// Brun partial sums over twin firsts ≤ limit, split by class mod q.
pub fn brun_partial(store: &PrimeStore, limit: u64, q: u64) -> Result<BrunReport> {
    check_modulus(q, &[])?;
    check_scan_args(store, limit, 1)?;
    let mut class_sums: BTreeMap<u64, KahanSum> = BTreeMap::new();
    let mut total = KahanSum::new();
    let mut pairs = 0u64;
    let twins = store.twin_firsts();
    for &p in twins.firsts() {
        if p > limit {
            break;
        }
        let term = 1.0 / p as f64 + 1.0 / (p + 2) as f64;
        class_sums.entry(p % q).or_default().add(term);
        total.add(term);
        pairs += 1;
    }
    Ok(BrunReport {
        q,
        limit,
        class_sums: class_sums
            .into_iter()
            .map(|(a, s)| (a, s.value()))
            .collect(),
        total: total.value(),
        pairs,
    })
}

/// Verifies that every non-admissible class mod q holds at most one twin
/// pair below limit, and reports the single pair where one exists. Two
/// pairs in such a class would contradict the underlying theorem, so that
/// is a hard error, not a report entry.
pub fn theorem31_check(store: &PrimeStore, limit: u64, q: u64) -> Result<Theorem31Report> {
    if !(3..=10_000).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "modulus q = {q} outside the checkable range 3..=10000"
        )));
    }
    check_scan_args(store, limit, 1)?;
    let mut seen: BTreeMap<u64, u64> = BTreeMap::new();
    let twins = store.twin_firsts();
    for &p in twins.firsts() {
        if p > limit {
            break;
        }
        let class = p % q;
        if is_admissible(class, q) {
            continue;
        }
        if let Some(&first) = seen.get(&class) {
            return Err(Error::NonAdmissibleClassViolation {
                q,
                class,
                count: 2,
                first,
                second: p,
            });
        }
        seen.insert(class, p);
    }
    let classes = (0..q)
        .filter(|&a| !is_admissible(a, q))
        .map(|a| NonAdmissibleClass {
            class: a,
            pair_first: seen.get(&a).copied(),
        })
        .collect();
    Ok(Theorem31Report { q, limit, classes })
}

/// π₂(limit)/π₂(limit;q;a) for each admissible class a, next to φ₂(q).
/// Observational: no convergence assertion is made.
pub fn equidistribution_check(
    store: &PrimeStore,
    limit: u64,
    q: u64,
) -> Result<EquidistributionReport> {
    if q == 0 {
        return Err(Error::ZeroInput);
    }
    check_scan_args(store, limit, 1)?;
    let mut tally = ResidueTally::new(q);
    let twins = store.twin_firsts();
    for &p in twins.firsts() {
        if p > limit {
            break;
        }
        tally.add(p);
    }
    let pi2_total = tally.total();
    let rows = (0..q)
        .filter(|&a| is_admissible(a, q))
        .map(|a| {
            let count = tally.count(a);
            EquidistributionRow {
                class: a,
                count,
                ratio: pi2_total as f64 / count as f64,
            }
        })
        .collect();
    Ok(EquidistributionReport {
        q,
        limit,
        phi2_q: FactoredInteger::factorize(q)?.phi2(),
        pi2_total,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn store() -> &'static PrimeStore {
        static STORE: OnceLock<PrimeStore> = OnceLock::new();
        STORE.get_or_init(|| PrimeStore::build(300_000).unwrap())
    }

    #[test]
    fn type1_threshold_counts_match_naive() {
        let s = store();
        let thresholds = [10_000u64, 100_000, 200_000];
        for subject in [Subject::Twins, Subject::Primes] {
            let run = type1_series(s, 200_000, 4, 3, 1, None, None, subject, &thresholds).unwrap();
            assert_eq!(run.table_rows.len(), thresholds.len());
            let elements: Vec<u64> = match subject {
                Subject::Twins => s.twin_firsts().firsts().to_vec(),
                Subject::Primes => s.primes().collect(),
            };
            for (row, &t) in run.table_rows.iter().zip(&thresholds) {
                let want_3 = elements.iter().filter(|&&p| p <= t && p % 4 == 3).count() as u64;
                let want_1 = elements.iter().filter(|&&p| p <= t && p % 4 == 1).count() as u64;
                let want_total = elements.iter().filter(|&&p| p <= t).count() as u64;
                assert_eq!(row.x, t);
                assert_eq!(row.count_i, want_3);
                assert_eq!(row.count_j, want_1);
                assert_eq!(row.total, want_total);
                assert_eq!(row.delta, want_3 as i64 - want_1 as i64);
            }
        }
    }

    #[test]
    fn type1_sample_stride_and_split_invariant() {
        let s = store();
        let run = type1_series(s, 250_000, 4, 3, 1, Some(25), None, Subject::Twins, &[]).unwrap();
        let twins: Vec<u64> = s.twin_firsts().firsts().to_vec();
        assert_eq!(
            run.samples.len(),
            twins.iter().filter(|&&p| p <= 250_000).count() / 25
        );
        for (i, sample) in run.samples.iter().enumerate() {
            assert_eq!(sample.x, twins[25 * (i + 1) - 1]);
            assert_eq!(sample.total, 25 * (i + 1) as u64);
            // every twin first is odd, so classes 1 and 3 partition them
            assert_eq!(sample.count_i + sample.count_j, sample.total);
            assert!(sample.delta_i >= 0.0 && sample.delta_i <= 1.0);
            assert!((sample.delta_i + sample.delta_j - 1.0).abs() < 1e-12);
        }
        // δ for primes does not split two ways: class 2 holds the prime 2
        let run = type1_series(s, 1_000, 4, 3, 1, Some(5), None, Subject::Primes, &[]).unwrap();
        assert_eq!(run.final_tally.count(2), 1);
    }

    #[test]
    fn delta_bar_scaling() {
        let v = delta_bar(10, 10_000, Subject::Twins, 2);
        let ln = (10_000f64).ln();
        assert!((v - 10.0 * ln * ln / (10.0 * 100.0)).abs() < 1e-12);
        let v = delta_bar(-7, 10_000, Subject::Primes, 1);
        assert!(v < 0.0);
        assert!((v + 7.0 * ln / 100.0).abs() < 1e-12);
        assert_eq!(delta_bar(0, 100, Subject::Twins, 2), 0.0);
    }

    #[test]
    fn type2_hand_traced_cutoff() {
        // twins up to 30: 3, 5, 11, 17, 29; at limit 12 the transition
        // (11, 17) still counts because 11 <= 12, even though 17 > 12
        let s = PrimeStore::build(30).unwrap();
        let run = type2_series(&s, 12, 4, None, Subject::Twins, &[12]).unwrap();
        assert_eq!(run.table_rows.len(), 1);
        let t = &run.table_rows[0].tally;
        assert_eq!(t.count(3, 1), 2); // 3->5 and 11->17
        assert_eq!(t.count(1, 3), 1); // 5->11
        assert_eq!(t.count(1, 1), 0);
        assert_eq!(t.from_total(3), 2);
        assert_eq!(t.from_total(1), 1);
        assert_eq!(run.final_tally, run.table_rows[0].tally);
        assert_eq!(t.delta(1, 3), 1.0);
    }

    #[test]
    fn type2_matches_naive_and_rows_sum() {
        let s = store();
        let limit = 150_000u64;
        for subject in [Subject::Twins, Subject::Primes] {
            let run = type2_series(s, limit, 4, None, subject, &[50_000, limit]).unwrap();
            let elements: Vec<u64> = match subject {
                Subject::Twins => s.twin_firsts().firsts().to_vec(),
                Subject::Primes => s.primes().collect(),
            };
            for row in &run.table_rows {
                let mut naive = TransitionTally::new(4);
                for w in elements.windows(2) {
                    if w[0] <= row.x {
                        naive.add(w[0], w[1]);
                    }
                }
                assert_eq!(row.tally, naive, "{subject:?} x = {}", row.x);
            }
            // row sums: transitions out of a class equal its from-total,
            // and the delta rows sum to 1
            let t = &run.final_tally;
            for a in 0..4u64 {
                let row_sum: u64 = (0..4).map(|b| t.count(a, b)).sum();
                assert_eq!(row_sum, t.from_total(a));
                if t.from_total(a) > 0 {
                    let delta_sum: f64 = (0..4).map(|b| t.delta(a, b)).sum();
                    assert!((delta_sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn type2_sample_emitted_at_pair_completion() {
        let s = store();
        let run = type2_series(s, 100_000, 4, Some(10), Subject::Twins, &[]).unwrap();
        let twins: Vec<u64> = s.twin_firsts().firsts().to_vec();
        let first = &run.samples[0];
        assert_eq!(first.x, twins[9]);
        // the sample's tally includes the transition out of its own x
        let outgoing: u64 = (0..4).map(|a| first.tally.from_total(a)).sum();
        assert_eq!(outgoing, 10);
    }

    #[test]
    fn type3_first_gap_hand_trace() {
        let s = PrimeStore::build(100).unwrap();
        // only element <= 4 is the twin first 3; its gap to 5 is D = 2,
        // with D+1 = 3 prime and D-1 = 1 not prime
        let run = type3_series(&s, 4, None, Subject::Twins, &[4]).unwrap();
        let row = run.table_rows[0];
        assert_eq!((row.plus, row.minus, row.elements), (1, 0, 1));
        assert_eq!(row.delta_plus, 1.0);
        assert_eq!(row.delta_minus, 0.0);

        let run = type3_series(&s, 10, None, Subject::Twins, &[10]).unwrap();
        let row = run.table_rows[0];
        // gaps from 3 and from 5: D = 2 (plus only) and D = 6 (both)
        assert_eq!((row.plus, row.minus, row.elements), (2, 1, 2));
    }

    #[test]
    fn type3_matches_naive() {
        let s = store();
        let limit = 150_000u64;
        for subject in [Subject::Twins, Subject::Primes] {
            let run = type3_series(s, limit, None, subject, &[70_000, limit]).unwrap();
            let elements: Vec<u64> = match subject {
                Subject::Twins => s.twin_firsts().firsts().to_vec(),
                Subject::Primes => s.primes().collect(),
            };
            for row in &run.table_rows {
                let (mut plus, mut minus, mut n) = (0u64, 0u64, 0u64);
                for w in elements.windows(2) {
                    if w[0] > row.x {
                        break;
                    }
                    let d = w[1] - w[0];
                    if s.is_prime(d + 1) {
                        plus += 1;
                    }
                    if d >= 2 && s.is_prime(d - 1) {
                        minus += 1;
                    }
                    n += 1;
                }
                let total = elements.iter().filter(|&&p| p <= row.x).count() as u64;
                assert_eq!((row.plus, row.minus), (plus, minus), "x = {}", row.x);
                assert_eq!(row.elements, total);
                assert_eq!(n, total, "every element <= x has a successor in range");
            }
        }
    }

    #[test]
    fn brun_hand_values_and_monotonicity() {
        let s = store();
        let r = brun_partial(s, 7, 4).unwrap();
        assert_eq!(r.pairs, 2);
        assert!((r.class_sums[&3] - (1.0 / 3.0 + 1.0 / 5.0)).abs() < 1e-15);
        assert!((r.class_sums[&1] - (1.0 / 5.0 + 1.0 / 7.0)).abs() < 1e-15);

        let mut last = 0.0;
        for limit in [100u64, 10_000, 300_000] {
            let r = brun_partial(s, limit, 4).unwrap();
            assert!(r.total >= last);
            last = r.total;
            let class_total: f64 = r.class_sums.values().sum();
            assert!((class_total - r.total).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem31_reference_classes() {
        let s = store();
        let find = |report: &Theorem31Report, class: u64| {
            report
                .classes
                .iter()
                .find(|c| c.class == class)
                .map(|c| c.pair_first)
                .expect("class should be non-admissible")
        };
        let r = theorem31_check(s, 100_000, 10).unwrap();
        assert_eq!(find(&r, 3), Some(3));
        assert_eq!(find(&r, 5), Some(5));
        assert_eq!(find(&r, 0), None);
        assert!(r.classes.iter().all(|c| ![1, 7, 9].contains(&c.class)));

        let r = theorem31_check(s, 100_000, 6).unwrap();
        assert_eq!(find(&r, 1), None);
        assert_eq!(find(&r, 3), Some(3));

        let r = theorem31_check(s, 100_000, 9).unwrap();
        assert_eq!(find(&r, 3), Some(3));

        assert!(theorem31_check(s, 1000, 10_001).is_err());
    }

    #[test]
    fn equidistribution_reference_moduli() {
        let s = store();
        let r = equidistribution_check(s, 300_000, 4).unwrap();
        assert_eq!(r.phi2_q, 2);
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(
                (row.ratio - 2.0).abs() < 0.1,
                "class {}: {}",
                row.class,
                row.ratio
            );
        }

        let r = equidistribution_check(s, 300_000, 6).unwrap();
        assert_eq!(r.phi2_q, 1);
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].class, 5);
        assert!((r.rows[0].ratio - 1.0).abs() < 0.01);

        let r = equidistribution_check(s, 300_000, 3).unwrap();
        assert_eq!(r.phi2_q, 1);
        assert_eq!(r.rows[0].class, 2);
    }

    #[test]
    fn pi2_class_split_invariant() {
        let s = store();
        let twins = s.twin_firsts();
        let run =
            type1_series(s, 300_000, 4, 3, 1, None, None, Subject::Twins, &[300_000]).unwrap();
        let row = run.table_rows[0];
        assert_eq!(row.count_i + row.count_j, twins.pi2(300_000).unwrap());
    }

    #[test]
    fn segment_size_independence() {
        let coarse = PrimeStore::build_with(250_000, 1 << 20).unwrap();
        let fine = PrimeStore::build_with(250_000, 1 << 16).unwrap();
        let thresholds = [100_000u64, 250_000];
        for subject in [Subject::Twins, Subject::Primes] {
            let a =
                type1_series(&coarse, 250_000, 4, 3, 1, None, None, subject, &thresholds).unwrap();
            let b =
                type1_series(&fine, 250_000, 4, 3, 1, None, None, subject, &thresholds).unwrap();
            assert_eq!(a, b);
            let a = type2_series(&coarse, 250_000, 4, None, subject, &thresholds).unwrap();
            let b = type2_series(&fine, 250_000, 4, None, subject, &thresholds).unwrap();
            assert_eq!(a, b);
            let a = type3_series(&coarse, 250_000, None, subject, &thresholds).unwrap();
            let b = type3_series(&fine, 250_000, None, subject, &thresholds).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(
            brun_partial(&coarse, 250_000, 4).unwrap(),
            brun_partial(&fine, 250_000, 4).unwrap()
        );
    }

    #[test]
    fn argument_validation() {
        let s = store();
        assert!(type1_series(s, 1_000_000, 4, 3, 1, None, None, Subject::Twins, &[]).is_err());
        assert!(type1_series(s, 1000, 2, 1, 0, None, None, Subject::Twins, &[]).is_err());
        assert!(type1_series(s, 1000, 4, 5, 1, None, None, Subject::Twins, &[]).is_err());
        assert!(type1_series(s, 1000, 4, 3, 1, Some(0), None, Subject::Twins, &[]).is_err());
        assert!(type2_series(s, 1000, 1, None, Subject::Twins, &[]).is_err());
        assert!(equidistribution_check(s, 1000, 0).is_err());
    }
}
