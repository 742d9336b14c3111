//! Ground-truth checks and exhaustive or sampled verification harnesses.
//!
//! Merging inputs are two sorted sequences interleaved by parity: sequence A
//! occupies the 0-based even registers `0, 2, 4, …` and sequence B the odd
//! registers `1, 3, 5, …`. (Counting registers from 1, A sits in the odd
//! registers.) By the zero-one principle for merging it suffices to check
//! every 0-1 input of this shape, and there are only
//! `(⌈n/2⌉ + 1)(⌊n/2⌋ + 1)` of them.
//!
//! Inputs are evaluated 64 at a time on bit-sliced lanes.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netcore::Network;

pub fn is_sorted<T: Ord>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// Both parity subsequences are sorted.
pub fn is_two_sorted<T: Ord>(v: &[T]) -> bool {
    let sorted = |start: usize| {
        let sub: Vec<&T> = v.iter().skip(start).step_by(2).collect();
        is_sorted(&sub)
    };
    sorted(0) && sorted(1)
}

/// Sorted multiset union of two sorted sequences.
pub fn merge_oracle<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    if !is_sorted(a) {
        return Err(Error::Unsorted("first merge operand".into()));
    }
    if !is_sorted(b) {
        return Err(Error::Unsorted("second merge operand".into()));
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if b[j] < a[i] {
            out.push(b[j].clone());
            j += 1;
        } else {
            out.push(a[i].clone());
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Ok(out)
}

/// Splits a vector into its even-index (A) and odd-index (B) subsequences.
pub fn parity_split<T: Clone>(v: &[T]) -> (Vec<T>, Vec<T>) {
    let a = v.iter().step_by(2).cloned().collect();
    let b = v.iter().skip(1).step_by(2).cloned().collect();
    (a, b)
}

/// Interleaves A into the even and B into the odd positions.
pub fn interleave<T: Clone>(a: &[T], b: &[T]) -> Vec<T> {
    assert!(a.len() == b.len() || a.len() == b.len() + 1);
    let mut out = Vec::with_capacity(a.len() + b.len());
    for (i, x) in a.iter().enumerate() {
        out.push(x.clone());
        if let Some(x) = b.get(i) {
            out.push(x.clone());
        }
    }
    out
}

/// A 2-sorted 0-1 vector of length `n`, identified by the number of ones in
/// each parity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoSortedSpec {
    pub n: usize,
    /// Ones among the even positions, `0..=⌈n/2⌉`.
    pub ones_a: usize,
    /// Ones among the odd positions, `0..=⌊n/2⌋`.
    pub ones_b: usize,
}

impl TwoSortedSpec {
    pub fn new(n: usize, ones_a: usize, ones_b: usize) -> Result<Self> {
        if ones_a > n.div_ceil(2) || ones_b > n / 2 {
            return Err(Error::Parameter(format!(
                "ones counts ({ones_a}, {ones_b}) out of range for length {n}"
            )));
        }
        Ok(TwoSortedSpec { n, ones_a, ones_b })
    }

    #[inline]
    fn bit(&self, r: usize) -> bool {
        if r % 2 == 0 {
            r / 2 >= self.n.div_ceil(2) - self.ones_a
        } else {
            (r - 1) / 2 >= self.n / 2 - self.ones_b
        }
    }

    pub fn vector(&self) -> Vec<u8> {
        (0..self.n).map(|r| self.bit(r) as u8).collect()
    }
}

/// Every 2-sorted 0-1 input of length `n`, ordered by `(ones_a, ones_b)`.
pub fn enumerate_two_sorted(n: usize) -> impl Iterator<Item = TwoSortedSpec> {
    (0..=n.div_ceil(2)).flat_map(move |a| (0..=n / 2).map(move |b| TwoSortedSpec { n, ones_a: a, ones_b: b }))
}

pub fn two_sorted_vectors(n: usize) -> impl Iterator<Item = Vec<u8>> {
    enumerate_two_sorted(n).map(|s| s.vector())
}

/// Random 2-sorted integer vector with entries in `0..range`.
pub fn random_two_sorted<R: Rng>(n: usize, range: i64, rng: &mut R) -> Vec<i64> {
    let mut a: Vec<i64> = (0..n.div_ceil(2)).map(|_| rng.gen_range(0..range)).collect();
    let mut b: Vec<i64> = (0..n / 2).map(|_| rng.gen_range(0..range)).collect();
    a.sort_unstable();
    b.sort_unstable();
    interleave(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFamily {
    TwoSorted,
    All,
}

impl fmt::Display for InputFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFamily::TwoSorted => "two-sorted",
            InputFamily::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum InputSpec {
    TwoSorted(TwoSortedSpec),
    Word(Vec<u8>),
}

impl InputSpec {
    pub fn vector(&self) -> Vec<u8> {
        match self {
            InputSpec::TwoSorted(s) => s.vector(),
            InputSpec::Word(w) => w.clone(),
        }
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::TwoSorted(s) => write!(f, "ones_a={} ones_b={}", s.ones_a, s.ones_b),
            InputSpec::Word(w) => {
                for b in w {
                    write!(f, "{b}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub input: InputSpec,
    pub output: Vec<u8>,
}

/// Outcome of a verification run. Only the first
/// [`VerifyOptions::max_recorded`] failures (in input order) are kept, but
/// `failure_count` counts all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub family: InputFamily,
    pub network: String,
    pub passes: usize,
    pub total_inputs: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    pub min_passes_found: Option<usize>,
}

impl VerificationReport {
    pub fn verified(&self) -> bool {
        self.failure_count == 0
    }

    /// `RESULT family=<..> network=<..> passes=<p> inputs=<n> failures=<f>`
    pub fn result_line(&self) -> String {
        let network = if self.network.is_empty() { "-" } else { &self.network };
        format!(
            "RESULT family={} network={} passes={} inputs={} failures={}",
            self.family, network, self.passes, self.total_inputs, self.failure_count
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.verified() { "verified" } else { "FAILED" };
        writeln!(
            f,
            "{status}: {} inputs ({}), {} passes, {} failures",
            self.total_inputs, self.family, self.passes, self.failure_count
        )?;
        for fl in &self.failures {
            writeln!(f, "  input  {}", fl.input)?;
            let out: String = fl.output.iter().map(|b| char::from(b'0' + b)).collect();
            writeln!(f, "  output {out}")?;
        }
        if let Some(p) = self.min_passes_found {
            writeln!(f, "minimum passes: {p}")?;
        }
        write!(f, "{}", self.result_line())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Largest register count accepted for exhaustive sorting checks.
    pub exhaustive_limit: usize,
    pub max_recorded: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            workers: None,
            exhaustive_limit: 22,
            max_recorded: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortMode {
    Exhaustive,
    Random { samples: u64, seed: u64 },
}

fn with_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Lanes whose output has a 1 directly above a 0.
#[inline]
fn unsorted_lanes(w: &[u64]) -> u64 {
    w.windows(2).fold(0, |acc, p| acc | (p[0] & !p[1]))
}

fn lanes_mask(count: usize) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

fn finish(
    net: &Network,
    family: InputFamily,
    passes: usize,
    total_inputs: u64,
    mut failing: Vec<InputSpec>,
    opts: &VerifyOptions,
) -> VerificationReport {
    failing.sort();
    let failure_count = failing.len() as u64;
    let failures = failing
        .into_iter()
        .take(opts.max_recorded)
        .map(|input| {
            let output = net
                .run_periodic(&input.vector(), passes)
                .expect("input length matches network");
            Failure { input, output }
        })
        .collect();
    VerificationReport {
        family,
        network: String::new(),
        passes,
        total_inputs,
        failure_count,
        failures,
        min_passes_found: None,
    }
}

/// Runs `passes` passes on every 2-sorted 0-1 input and checks the output is
/// sorted.
pub fn verify_merging(net: &Network, passes: usize, opts: &VerifyOptions) -> Result<VerificationReport> {
    let n = net.n_registers();
    let specs: Vec<TwoSortedSpec> = enumerate_two_sorted(n).collect();
    let failing = with_pool(opts.workers, || {
        specs
            .par_chunks(64)
            .flat_map_iter(|chunk| {
                let mut w = vec![0u64; n];
                for (lane, s) in chunk.iter().enumerate() {
                    for (r, word) in w.iter_mut().enumerate() {
                        *word |= (s.bit(r) as u64) << lane;
                    }
                }
                net.run_lanes(&mut w, passes);
                let bad = unsorted_lanes(&w) & lanes_mask(chunk.len());
                chunk
                    .iter()
                    .enumerate()
                    .filter(move |(lane, _)| bad >> lane & 1 == 1)
                    .map(|(_, s)| InputSpec::TwoSorted(*s))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    })?;
    Ok(finish(net, InputFamily::TwoSorted, passes, specs.len() as u64, failing, opts))
}

fn lane_word(w: &[u64], lane: usize) -> Vec<u8> {
    w.iter().map(|x| (x >> lane & 1) as u8).collect()
}

/// Runs `passes` passes on arbitrary 0-1 inputs: all `2^N` of them, or
/// uniformly random samples.
pub fn verify_sorting(
    net: &Network,
    passes: usize,
    mode: SortMode,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let n = net.n_registers();
    let (total, batches, seed) = match mode {
        SortMode::Exhaustive => {
            if n > opts.exhaustive_limit {
                return Err(Error::ExhaustiveTooLarge {
                    n_registers: n,
                    limit: opts.exhaustive_limit,
                });
            }
            let total = 1u64 << n;
            (total, total.div_ceil(64), None)
        }
        SortMode::Random { samples, seed } => (samples, samples.div_ceil(64), Some(seed)),
    };
    // Lane patterns for the low six bits of the enumerated input index.
    const LOW: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let failing = with_pool(opts.workers, || {
        (0..batches)
            .into_par_iter()
            .flat_map_iter(|batch| {
                let base = batch * 64;
                let mut w = vec![0u64; n];
                match seed {
                    None => {
                        for (r, word) in w.iter_mut().enumerate() {
                            *word = if r < 6 {
                                LOW[r]
                            } else if base >> r & 1 == 1 {
                                u64::MAX
                            } else {
                                0
                            };
                        }
                    }
                    Some(seed) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(batch);
                        for word in w.iter_mut() {
                            *word = rng.next_u64();
                        }
                    }
                }
                let inputs = w.clone();
                net.run_lanes(&mut w, passes);
                let bad = unsorted_lanes(&w) & lanes_mask((total - base).min(64) as usize);
                (0..64)
                    .filter(move |lane| bad >> lane & 1 == 1)
                    .map(|lane| InputSpec::Word(lane_word(&inputs, lane)))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    })?;
    Ok(finish(net, InputFamily::All, passes, total, failing, opts))
}

/// Merging check on random 2-sorted integer inputs against [`merge_oracle`].
/// Returns the number of samples whose output differs from the oracle.
pub fn check_integer_merging(net: &Network, passes: usize, samples: usize, seed: u64) -> Result<usize> {
    let n = net.n_registers();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..samples {
        let x = random_two_sorted(n, 4 * n as i64, &mut rng);
        let (a, b) = parity_split(&x);
        let expected = merge_oracle(&a, &b)?;
        if net.run_periodic(&x, passes)? != expected {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// Result of a pass-count search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinPasses {
    /// Smallest pass count with zero failures, if any up to the limit.
    pub found: Option<usize>,
    /// Failure count for `0..=max_passes` passes, each tested independently.
    pub failures_per_pass: Vec<u64>,
    /// Whether failure counts were non-increasing in the pass count.
    pub monotone: bool,
    pub total_inputs: u64,
}

/// Tests every pass count `0..=max_passes` over the given input family.
pub fn min_passes(
    net: &Network,
    family: InputFamily,
    max_passes: usize,
    opts: &VerifyOptions,
) -> Result<MinPasses> {
    let mut failures_per_pass = Vec::with_capacity(max_passes + 1);
    let mut total_inputs = 0;
    let quiet = VerifyOptions { max_recorded: 0, ..*opts };
    for p in 0..=max_passes {
        let report = match family {
            InputFamily::TwoSorted => verify_merging(net, p, &quiet)?,
            InputFamily::All => verify_sorting(net, p, SortMode::Exhaustive, &quiet)?,
        };
        total_inputs = report.total_inputs;
        failures_per_pass.push(report.failure_count);
    }
    let found = failures_per_pass.iter().position(|&f| f == 0);
    let monotone = failures_per_pass.windows(2).all(|w| w[1] <= w[0]);
    Ok(MinPasses {
        found,
        failures_per_pass,
        monotone,
        total_inputs,
    })
}
