//! Segmented sieve of Eratosthenes over a bit-packed odd-only bitmap.
//!
//! Bit i of the bitmap stands for the odd number 2i+1; a set bit means prime.
//! A store built for `limit` always sieves through `limit + 2`, so that for
//! any p <= limit the primality of p+2 is decidable from the same bitmap and
//! twin pair first members can be read off as adjacent set bits. Rank queries
//! (`pi`, and `pi2` on the extracted stream) are valid up to `limit` only.
//!
//! Segments are independent word ranges and are sieved in parallel; the
//! result is bit-identical to single-block sieving for any segment size.
//!
//! Dump format (little endian): magic `TSV1`, u64 limit, u64 segment size in
//! numbers, then the bitmap as u64 words.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::arith::isqrt;
use crate::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;
const DUMP_MAGIC: &[u8; 4] = b"TSV1";

/// Bit-packed set of primes in [2, limit + 2].
pub struct PrimeStore {
    limit: u64,
    segment_size: u64,
    words: Vec<u64>,
    /// cumulative count of odd primes up to the end of each segment
    seg_counts: Vec<u64>,
}

fn bitmap_bits(limit: u64) -> u64 {
    // one bit per odd number in [1, limit + 2]
    (limit + 3) / 2
}

fn odd_small_primes(limit: u64) -> Vec<u64> {
    let lim = limit as usize;
    let mut composite = vec![false; lim + 1];
    let mut primes = Vec::new();
    let mut i = 3usize;
    while i <= lim {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= lim {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    primes
}

/// Clear composite bits in the word range [word_lo, word_lo + out.len()),
/// which covers the odd numbers [128*word_lo + 1, 128*(word_lo + out.len())).
fn sieve_segment(base: &[u64], word_lo: u64, out: &mut [u64]) {
    out.fill(u64::MAX);
    let bit_lo = word_lo * 64;
    let bit_hi = bit_lo + out.len() as u64 * 64;
    let num_lo = 2 * bit_lo + 1;
    let num_hi = 2 * bit_hi + 1; // exclusive
    for &p in base {
        let p2 = p * p;
        if p2 >= num_hi {
            break;
        }
        let mut m = if p2 >= num_lo {
            p2
        } else {
            let mut q = num_lo.div_ceil(p);
            if q % 2 == 0 {
                q += 1;
            }
            q * p
        };
        while m < num_hi {
            let bit = (m - 1) / 2 - bit_lo;
            out[(bit / 64) as usize] &= !(1u64 << (bit % 64));
            m += 2 * p;
        }
    }
}

impl PrimeStore {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with(limit, DEFAULT_SEGMENT_SIZE)
    }

    /// `segment_size` is in numbers and must be a positive multiple of 128
    /// so segments align on word boundaries.
    pub fn build_with(limit: u64, segment_size: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::OutOfRange {
                what: "sieve limit",
                value: limit,
                bound: 2,
            });
        }
        if segment_size == 0 || segment_size % 128 != 0 {
            return Err(Error::InvalidArgument(format!(
                "segment size {segment_size} is not a positive multiple of 128"
            )));
        }
        let nbits = bitmap_bits(limit);
        let nwords = nbits.div_ceil(64) as usize;
        let mut words: Vec<u64> = Vec::new();
        words
            .try_reserve_exact(nwords)
            .map_err(|_| Error::OutOfMemory {
                limit,
                bytes: nwords * 8,
            })?;
        words.resize(nwords, 0);

        let base = odd_small_primes(isqrt(limit + 2));
        let seg_words = (segment_size / 128) as usize;
        words
            .par_chunks_mut(seg_words)
            .enumerate()
            .for_each(|(s, chunk)| sieve_segment(&base, (s * seg_words) as u64, chunk));

        // 1 is not prime
        words[0] &= !1u64;
        // mask bits beyond the bitmap so popcounts and twin scans stay exact
        let tail = nbits % 64;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }

        let mut seg_counts = Vec::with_capacity(words.len().div_ceil(seg_words));
        let mut acc = 0u64;
        for chunk in words.chunks(seg_words) {
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            seg_counts.push(acc);
        }

        Ok(Self {
            limit,
            segment_size,
            words,
            seg_counts,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_size(&self) -> u64 {
        self.segment_size
    }

    /// Largest x for which `is_prime` can answer (always limit + 2).
    pub fn coverage(&self) -> u64 {
        self.limit + 2
    }

    /// Valid for x <= limit + 2.
    pub fn is_prime(&self, x: u64) -> bool {
        assert!(
            x <= self.limit + 2,
            "primality query {x} beyond store coverage {}",
            self.limit + 2
        );
        if x == 2 {
            return true;
        }
        if x < 2 || x % 2 == 0 {
            return false;
        }
        let bit = (x - 1) / 2;
        self.words[(bit / 64) as usize] >> (bit % 64) & 1 == 1
    }

    /// True when (p, p+2) is a twin prime pair, indexed by first member.
    pub fn is_twin_first(&self, p: u64) -> bool {
        p <= self.limit && p % 2 == 1 && self.is_prime(p) && self.is_prime(p + 2)
    }

    fn count_odd_primes_in_bits(&self, nbit: u64) -> u64 {
        let seg_bits = self.segment_size / 2;
        let seg = (nbit / seg_bits) as usize;
        let mut count = if seg > 0 {
            self.seg_counts[(seg - 1).min(self.seg_counts.len() - 1)]
        } else {
            0
        };
        if seg >= self.seg_counts.len() {
            return count;
        }
        let start_word = seg * (seg_bits / 64) as usize;
        let end_word = (nbit / 64) as usize;
        for w in &self.words[start_word..end_word.min(self.words.len())] {
            count += w.count_ones() as u64;
        }
        let rem = nbit % 64;
        if rem > 0 && end_word < self.words.len() {
            count += (self.words[end_word] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        count
    }

    /// Number of primes <= x. Rejects x beyond the build limit: the bitmap
    /// extends two past it only so p+2 queries stay answerable.
    pub fn pi(&self, x: u64) -> Result<u64> {
        if x > self.limit {
            return Err(Error::RankOutOfRange {
                x,
                limit: self.limit,
            });
        }
        if x < 2 {
            return Ok(0);
        }
        Ok(self.count_odd_primes_in_bits(x.div_ceil(2)) + 1)
    }

    /// All primes in [2, limit + 2], ascending.
    pub fn primes(&self) -> Primes<'_> {
        Primes {
            store: self,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
            yielded_two: false,
        }
    }

    /// First members of twin pairs (p, p+2) with p <= limit, via conjunction
    /// of adjacent bitmap bits.
    pub fn twin_firsts(&self) -> TwinStream {
        let mut firsts = Vec::new();
        for (i, &w) in self.words.iter().enumerate() {
            let next = self.words.get(i + 1).copied().unwrap_or(0);
            let mut t = (w & (w >> 1)) | (((w >> 63) & next) << 63);
            while t != 0 {
                let b = t.trailing_zeros() as u64;
                t &= t - 1;
                let p = 2 * (i as u64 * 64 + b) + 1;
                if p <= self.limit {
                    firsts.push(p);
                }
            }
        }
        TwinStream {
            limit: self.limit,
            firsts,
        }
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.limit.to_le_bytes())?;
        w.write_all(&self.segment_size.to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::BadDump(format!(
                "bad magic {magic:02x?}, expected {DUMP_MAGIC:02x?}"
            )));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let limit = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let segment_size = u64::from_le_bytes(buf8);
        if limit < 2 || segment_size == 0 || segment_size % 128 != 0 {
            return Err(Error::BadDump(format!(
                "implausible header: limit {limit}, segment size {segment_size}"
            )));
        }
        let nwords = bitmap_bits(limit).div_ceil(64) as usize;
        let mut words = Vec::new();
        words
            .try_reserve_exact(nwords)
            .map_err(|_| Error::OutOfMemory {
                limit,
                bytes: nwords * 8,
            })?;
        for _ in 0..nwords {
            r.read_exact(&mut buf8)?;
            words.push(u64::from_le_bytes(buf8));
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::BadDump("trailing bytes after bitmap".into()));
        }
        let seg_words = (segment_size / 128) as usize;
        let mut seg_counts = Vec::with_capacity(words.len().div_ceil(seg_words));
        let mut acc = 0u64;
        for chunk in words.chunks(seg_words) {
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            seg_counts.push(acc);
        }
        Ok(Self {
            limit,
            segment_size,
            words,
            seg_counts,
        })
    }

    #[cfg(test)]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

pub struct Primes<'a> {
    store: &'a PrimeStore,
    word_idx: usize,
    current: u64,
    yielded_two: bool,
}

impl Iterator for Primes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.yielded_two {
            self.yielded_two = true;
            return Some(2);
        }
        loop {
            if self.current != 0 {
                let b = self.current.trailing_zeros() as u64;
                self.current &= self.current - 1;
                return Some(2 * (self.word_idx as u64 * 64 + b) + 1);
            }
            self.word_idx += 1;
            if self.word_idx >= self.store.words.len() {
                return None;
            }
            self.current = self.store.words[self.word_idx];
        }
    }
}

/// Sorted first members of twin pairs up to a limit, with rank queries.
pub struct TwinStream {
    limit: u64,
    firsts: Vec<u64>,
}

impl TwinStream {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn firsts(&self) -> &[u64] {
        &self.firsts
    }

    pub fn count(&self) -> u64 {
        self.firsts.len() as u64
    }

    /// Number of twin pairs with first member <= x.
    pub fn pi2(&self, x: u64) -> Result<u64> {
        if x > self.limit {
            return Err(Error::RankOutOfRange {
                x,
                limit: self.limit,
            });
        }
        Ok(self.firsts.partition_point(|&p| p <= x) as u64)
    }
}

/// Stream primes in [2, limit] to a sink, sieving one segment at a time and
/// holding only O(segment) memory. Output is identical to iterating a full
/// store; intended for limits where a resident bitmap is unwelcome.
pub fn for_each_prime(limit: u64, segment_size: u64, mut f: impl FnMut(u64)) -> Result<()> {
    if limit < 2 {
        return Ok(());
    }
    if segment_size == 0 || segment_size % 128 != 0 {
        return Err(Error::InvalidArgument(format!(
            "segment size {segment_size} is not a positive multiple of 128"
        )));
    }
    let base = odd_small_primes(isqrt(limit));
    let nbits = limit.div_ceil(2);
    let nwords = nbits.div_ceil(64);
    let seg_words = segment_size / 128;
    let mut buf = vec![0u64; seg_words as usize];
    f(2);
    let mut word_lo = 0u64;
    while word_lo < nwords {
        let len = seg_words.min(nwords - word_lo) as usize;
        let chunk = &mut buf[..len];
        sieve_segment(&base, word_lo, chunk);
        if word_lo == 0 {
            chunk[0] &= !1u64;
        }
        for (i, &w) in chunk.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                let p = 2 * ((word_lo + i as u64) * 64 + b) + 1;
                if p > limit {
                    return Ok(());
                }
                f(p);
            }
        }
        word_lo += len as u64;
    }
    Ok(())
}

/// The two-step strike-off sieve, kept as an independent oracle for the
/// bitmap path. Working on the list 2..=n+2, each round strikes out the
/// proper multiples of the current pick, then strikes out every number two
/// less than one of those multiples, then circles the lowest untouched
/// number. Picks advance to the next number not struck off as a multiple
/// (struck-off-by-two-less numbers still serve as picks, so every prime
/// sieves). The circled numbers are exactly the twin pair first members.
pub fn literal_twin_sieve(n: u64) -> Vec<u64> {
    let hi = (n + 2) as usize;
    let mut slashed = vec![false; hi + 1]; // struck off as a multiple
    let mut removed = vec![false; hi + 1]; // struck off either way
    let mut circled = Vec::new();
    let mut pick = 2usize;
    let mut cursor = 3usize;
    loop {
        if pick <= hi {
            let mut m = 2 * pick;
            while m <= hi {
                slashed[m] = true;
                removed[m] = true;
                removed[m - 2] = true;
                m += pick;
            }
            pick += 1;
            while pick <= hi && slashed[pick] {
                pick += 1;
            }
        }
        while cursor as u64 <= n && removed[cursor] {
            cursor += 1;
        }
        if cursor as u64 > n {
            break;
        }
        circled.push(cursor as u64);
        cursor += 1;
    }
    circled
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_primes(limit: u64) -> Vec<u64> {
        (2..=limit)
            .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn small_primes_listing() {
        let store = PrimeStore::build(100).unwrap();
        let got: Vec<u64> = store.primes().filter(|&p| p <= 100).collect();
        assert_eq!(got, naive_primes(100));
    }

    #[test]
    fn reference_prime_counts() {
        let store = PrimeStore::build(1_000_000).unwrap();
        assert_eq!(store.pi(30).unwrap(), 10);
        assert_eq!(store.pi(100).unwrap(), 25);
        assert_eq!(store.pi(10_000).unwrap(), 1_229);
        assert_eq!(store.pi(1_000_000).unwrap(), 78_498);
        assert_eq!(store.pi(0).unwrap(), 0);
        assert_eq!(store.pi(1).unwrap(), 0);
        assert_eq!(store.pi(2).unwrap(), 1);
        assert_eq!(store.pi(3).unwrap(), 2);
    }

    #[test]
    fn rank_query_beyond_limit_rejected() {
        let store = PrimeStore::build(1000).unwrap();
        assert!(matches!(
            store.pi(1001),
            Err(Error::RankOutOfRange {
                x: 1001,
                limit: 1000
            })
        ));
        let twins = store.twin_firsts();
        assert!(twins.pi2(1001).is_err());
    }

    #[test]
    fn coverage_answers_two_past_limit() {
        let store = PrimeStore::build(9).unwrap();
        assert!(store.is_prime(11));
        assert!(!store.is_prime(9));
        assert!(store.is_prime(2));
        assert!(!store.is_prime(1));
        assert!(!store.is_prime(0));
    }

    #[test]
    fn twin_firsts_reference() {
        let store = PrimeStore::build(100).unwrap();
        let twins = store.twin_firsts();
        assert_eq!(
            twins.firsts(),
            &[3, 5, 11, 17, 29, 41, 59, 71],
            "twin pair first members to 100"
        );
        assert_eq!(twins.pi2(100).unwrap(), 8);
        assert_eq!(twins.pi2(10).unwrap(), 2);
        assert_eq!(twins.pi2(2).unwrap(), 0);
        // 5 is the first member of (5,7) and the second member of (3,5);
        // it appears exactly once, under its first-member role
        assert_eq!(twins.firsts().iter().filter(|&&p| p == 5).count(), 1);
    }

    #[test]
    fn twin_first_at_limit_boundary() {
        // p = limit needs p+2 from the overhang
        let store = PrimeStore::build(29).unwrap();
        assert!(store.is_twin_first(29));
        let twins = store.twin_firsts();
        assert_eq!(twins.firsts(), &[3, 5, 11, 17, 29]);
    }

    #[test]
    fn segment_size_is_observationally_irrelevant() {
        let limit = 300_000;
        let whole = PrimeStore::build_with(limit, 1 << 20).unwrap();
        for seg in [128u64, 1 << 10, 1 << 16] {
            let segged = PrimeStore::build_with(limit, seg).unwrap();
            assert_eq!(whole.words(), segged.words(), "segment size {seg}");
        }
    }

    #[test]
    fn single_block_matches_segmented_at_ten_million() {
        let limit = 10_000_000;
        let single = PrimeStore::build_with(limit, {
            let nbits = (limit + 3) / 2;
            nbits.div_ceil(64) * 128
        })
        .unwrap();
        let segmented = PrimeStore::build_with(limit, 1 << 20).unwrap();
        assert_eq!(single.words(), segmented.words());
        assert_eq!(segmented.pi(10_000_000).unwrap(), 664_579);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| PrimeStore::build(2_000_000).unwrap());
        let b = pool4.install(|| PrimeStore::build(2_000_000).unwrap());
        assert_eq!(a.words(), b.words());
    }

    #[test]
    fn streaming_matches_resident() {
        let limit = 500_000;
        let store = PrimeStore::build(limit).unwrap();
        let resident: Vec<u64> = store.primes().take_while(|&p| p <= limit).collect();
        for seg in [1 << 10, 1 << 16, 1 << 20] {
            let mut streamed = Vec::new();
            for_each_prime(limit, seg, |p| streamed.push(p)).unwrap();
            assert_eq!(streamed, resident, "segment {seg}");
        }
    }

    #[test]
    fn literal_sieve_worked_example() {
        assert_eq!(literal_twin_sieve(30), vec![3, 5, 11, 17, 29]);
        assert_eq!(literal_twin_sieve(3), vec![3]);
        assert_eq!(literal_twin_sieve(2), Vec::<u64>::new());
        assert_eq!(literal_twin_sieve(1), Vec::<u64>::new());
    }

    #[test]
    fn literal_sieve_matches_bitmap_to_2000() {
        let store = PrimeStore::build(2000).unwrap();
        for n in (3..=2000).step_by(7) {
            let bitmap: Vec<u64> = store
                .twin_firsts()
                .firsts()
                .iter()
                .copied()
                .filter(|&p| p <= n)
                .collect();
            assert_eq!(literal_twin_sieve(n), bitmap, "n = {n}");
        }
    }

    #[test]
    fn dump_roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("primes.tsv1");
        let store = PrimeStore::build_with(123_456, 1 << 16).unwrap();
        store.dump(&path).unwrap();
        let loaded = PrimeStore::load(&path).unwrap();
        assert_eq!(store.limit(), loaded.limit());
        assert_eq!(store.segment_size(), loaded.segment_size());
        assert_eq!(store.words(), loaded.words());
        assert_eq!(store.pi(123_456).unwrap(), loaded.pi(123_456).unwrap());

        let raw = std::fs::read(&path).unwrap();
        assert_eq!(&raw[..4], b"TSV1");
        assert_eq!(u64::from_le_bytes(raw[4..12].try_into().unwrap()), 123_456);
        assert_eq!(u64::from_le_bytes(raw[12..20].try_into().unwrap()), 1 << 16);
    }

    #[test]
    fn load_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv1");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(PrimeStore::load(&path), Err(Error::BadDump(_))));
    }

    #[test]
    fn invalid_segment_sizes_rejected() {
        assert!(PrimeStore::build_with(1000, 100).is_err());
        assert!(PrimeStore::build_with(1000, 0).is_err());
        assert!(PrimeStore::build_with(1, 128).is_err());
    }

    #[test]
    fn twin_count_bounded_by_half_prime_count() {
        let store = PrimeStore::build(100_000).unwrap();
        let twins = store.twin_firsts();
        for n in [5u64, 10, 100, 1_000, 10_000, 100_000] {
            assert!(
                2 * twins.pi2(n).unwrap() <= store.pi(n).unwrap() + 2,
                "n = {n}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pi_matches_naive_count(x in 2u64..3000) {
            let store = PrimeStore::build(3000).unwrap();
            let naive = naive_primes(x).len() as u64;
            prop_assert_eq!(store.pi(x).unwrap(), naive);
        }

        #[test]
        fn twin_firsts_match_definition(limit in 5u64..3000) {
            let store = PrimeStore::build(limit).unwrap();
            let by_def: Vec<u64> = naive_primes(limit)
                .into_iter()
                .filter(|&p| {
                    let q = p + 2;
                    (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
                })
                .collect();
            let twins = store.twin_firsts();
            prop_assert_eq!(twins.firsts(), &by_def[..]);
        }
    }
}
