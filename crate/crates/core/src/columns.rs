//! Column view of `M_k` and the dynamics of the per-column ones counts.
//!
//! Register `x` of `M_k` lies in column `x mod b_k`, row `x / b_k`, giving an
//! `n_k × b_k` matrix. A column is sorted when its values read `0…01…1` from
//! row 0 downwards. Positions inside a [`ColumnVector`] are 1-based in the
//! function documentation (matching the usual notation `c_1, …, c_b`) and
//! 0-based in the slice.
//!
//! "Application `i`" in this module always means the `i`-th application of a
//! Q-set, three per pass of `M_k`, following the schedule
//! `f_i = Q_{((i-1) mod 3) + 1}`.

use std::fmt;

use rayon::prelude::*;

use crate::builders::{big_h, FamilyParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnVector {
    pub k: u32,
    pub c: Vec<i64>,
}

pub fn is_flat(c: &[i64]) -> bool {
    match (c.first(), c.last()) {
        (Some(&first), Some(&last)) => crate::oracle::is_sorted(c) && last <= first + 1,
        _ => true,
    }
}

pub fn is_two_flat(c: &[i64]) -> bool {
    let odd: Vec<i64> = c.iter().step_by(2).copied().collect();
    let even: Vec<i64> = c.iter().skip(1).step_by(2).copied().collect();
    is_flat(&odd) && is_flat(&even)
}

pub fn is_balanced(c: &[i64]) -> bool {
    let b = c.len();
    b == 0 || (0..b / 2).all(|i| c[i] + c[b - 1 - i] == c[0] + c[b - 1])
}

impl ColumnVector {
    pub fn new(k: u32, c: Vec<i64>) -> Result<Self> {
        let b = FamilyParams::new(k)?.b();
        if c.len() != b {
            return Err(Error::LengthMismatch {
                expected: b,
                got: c.len(),
            });
        }
        Ok(ColumnVector { k, c })
    }

    pub fn b(&self) -> usize {
        self.c.len()
    }

    pub fn is_flat(&self) -> bool {
        is_flat(&self.c)
    }

    pub fn is_two_flat(&self) -> bool {
        is_two_flat(&self.c)
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced(&self.c)
    }

    /// `c_1 + c_b`; meaningful for balanced vectors.
    pub fn height(&self) -> i64 {
        self.c[0] + self.c[self.b() - 1]
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &ColumnVector) -> bool {
        self.c.iter().zip(&other.c).all(|(a, b)| a <= b)
    }

    pub fn translate(&self, t: i64) -> ColumnVector {
        ColumnVector {
            k: self.k,
            c: self.c.iter().map(|x| x + t).collect(),
        }
    }
}

impl fmt::Display for ColumnVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Ones count of every column of a 0-1 word on `M_k`'s registers.
pub fn ones_per_column(x: &[u8], k: u32) -> Result<ColumnVector> {
    let fp = FamilyParams::new(k)?;
    let (n, b) = (fp.n(), fp.b());
    if x.len() != n * b {
        return Err(Error::LengthMismatch {
            expected: n * b,
            got: x.len(),
        });
    }
    let mut c = vec![0i64; b];
    for (j, cj) in c.iter_mut().enumerate() {
        let col: Vec<u8> = (0..n).map(|row| x[row * b + j]).collect();
        if !crate::oracle::is_sorted(&col) {
            return Err(Error::UnsortedColumn { column: j });
        }
        *cj = col.iter().map(|&v| v as i64).sum();
    }
    Ok(ColumnVector { k, c })
}

/// The unique word with sorted columns whose ones counts are `c`.
pub fn word_from_columns(c: &ColumnVector) -> Result<Vec<u8>> {
    let fp = FamilyParams::new(c.k)?;
    let (n, b) = (fp.n(), fp.b());
    if let Some(j) = c.c.iter().position(|&v| v < 0 || v > n as i64) {
        return Err(Error::Parameter(format!("column {j} count {} outside [0, {n}]", c.c[j])));
    }
    Ok((0..n * b)
        .map(|x| ((x / b) as i64 >= n as i64 - c.c[x % b]) as u8)
        .collect())
}

/// One of the column functions `cyc`, `dec_i`, `mov_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QFunction {
    Cyc,
    Dec(usize),
    Mov(usize),
}

impl fmt::Display for QFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QFunction::Cyc => write!(f, "cyc"),
            QFunction::Dec(i) => write!(f, "dec_{i}"),
            QFunction::Mov(i) => write!(f, "mov_{i}"),
        }
    }
}

impl QFunction {
    /// 1-based positions the function may change.
    pub fn args(&self, k: u32) -> Vec<usize> {
        let b = 2 * (k as usize - 2);
        let mut v = match *self {
            QFunction::Cyc => vec![1, b],
            QFunction::Dec(i) => vec![i, b - i + 1],
            QFunction::Mov(i) => vec![i, i + 1, b - i, b - i + 1],
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn apply(&self, c: &ColumnVector) -> Result<ColumnVector> {
        match *self {
            QFunction::Cyc => Ok(cyc(c)),
            QFunction::Dec(i) => dec(i, c),
            QFunction::Mov(i) => mov(i, c),
        }
    }
}

fn check_index(i: usize, c: &ColumnVector) -> Result<()> {
    let half = c.b() / 2;
    if !(1..=half).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..={half}")));
    }
    Ok(())
}

/// `dec_i`: positions `i` and `b-i+1` become
/// `min(c_i, c_{b-i+1} + h_i)` and `max(c_i - h_i, c_{b-i+1})`.
pub fn dec(i: usize, c: &ColumnVector) -> Result<ColumnVector> {
    check_index(i, c)?;
    let h = FamilyParams { k: c.k }.h(i) as i64;
    let (p, q) = (i - 1, c.b() - i);
    let mut out = c.clone();
    out.c[p] = c.c[p].min(c.c[q] + h);
    out.c[q] = (c.c[p] - h).max(c.c[q]);
    Ok(out)
}

/// `mov_i`: sorts the pairs at positions `(i, i+1)` and `(b-i, b-i+1)`.
pub fn mov(i: usize, c: &ColumnVector) -> Result<ColumnVector> {
    check_index(i, c)?;
    let b = c.b();
    let mut out = c.clone();
    for p in [i - 1, b - i - 1] {
        out.c[p] = c.c[p].min(c.c[p + 1]);
        out.c[p + 1] = c.c[p].max(c.c[p + 1]);
    }
    Ok(out)
}

/// `cyc`: positions 1 and `b` become `max(c_1, c_b - 1)` and `min(c_1 + 1, c_b)`.
pub fn cyc(c: &ColumnVector) -> ColumnVector {
    let b = c.b();
    let mut out = c.clone();
    out.c[0] = c.c[0].max(c.c[b - 1] - 1);
    out.c[b - 1] = (c.c[0] + 1).min(c.c[b - 1]);
    out
}

/// The functions making up `Q_phase`, `phase ∈ {1, 2, 3}`.
///
/// # Panics
/// If `phase` is not 1, 2 or 3.
pub fn q_set(k: u32, phase: usize) -> Vec<QFunction> {
    let k = k as usize;
    let mut out = Vec::new();
    match phase {
        1 => {
            out.push(QFunction::Cyc);
            out.extend((1..=(k - 1) / 3).map(|i| QFunction::Dec(3 * i - 1)));
            out.extend((1..=(k - 2) / 3).map(|i| QFunction::Mov(3 * i)));
        }
        2 => {
            out.extend((1..=k / 3).map(|i| QFunction::Dec(3 * i - 2)));
            out.extend((1..=(k - 1) / 3).map(|i| QFunction::Mov(3 * i - 1)));
        }
        3 => {
            out.extend((1..=(k - 2) / 3).map(|i| QFunction::Dec(3 * i)));
            out.extend((1..=k / 3).map(|i| QFunction::Mov(3 * i - 2)));
        }
        _ => panic!("phase must be 1, 2 or 3, got {phase}"),
    }
    out
}

/// Applies every function of `Q_phase`. Their argument sets are disjoint,
/// so the order does not matter.
pub fn q_apply(phase: usize, c: &ColumnVector) -> ColumnVector {
    q_apply_ordered(&q_set(c.k, phase), c)
}

/// Applies the given functions in the given order.
pub fn q_apply_ordered(fs: &[QFunction], c: &ColumnVector) -> ColumnVector {
    fs.iter().fold(c.clone(), |acc, f| {
        f.apply(&acc).expect("Q-set indices are in range")
    })
}

/// Phase of application `i` (1-based): `((i-1) mod 3) + 1`.
pub fn phase_of(i: usize) -> usize {
    (i - 1) % 3 + 1
}

/// States `c_0 = c, c_1, …, c_apps` under the periodic schedule.
pub fn trajectory(c: &ColumnVector, apps: usize) -> Vec<ColumnVector> {
    let mut states = Vec::with_capacity(apps + 1);
    states.push(c.clone());
    for i in 1..=apps {
        let next = q_apply(phase_of(i), &states[i - 1]);
        states.push(next);
    }
    states
}

/// Exact half-integer: `Half(v)` stands for `v / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Half(pub i64);

impl Half {
    pub fn from_int(v: i64) -> Self {
        Half(2 * v)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `(c_1 - s/2, …, c_{k-2} - s/2)` for a balanced `c` of height `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedSequence {
    pub d: Vec<Half>,
}

pub fn reduce(c: &ColumnVector) -> Result<(ReducedSequence, i64)> {
    if !c.is_balanced() {
        return Err(Error::NotBalanced);
    }
    let s = c.height();
    let d = c.c[..c.b() / 2].iter().map(|&x| Half(2 * x - s)).collect();
    Ok((ReducedSequence { d }, s))
}

/// `(d_1 + s/2, …, d_{k-2} + s/2, s/2 - d_{k-2}, …, s/2 - d_1)`, in half units.
pub fn ext(d: &ReducedSequence, s: i64) -> Vec<Half> {
    let left = d.d.iter().map(|x| Half(x.0 + s));
    let right = d.d.iter().rev().map(|x| Half(s - x.0));
    left.chain(right).collect()
}

/// [`ext`] when every entry is an integer.
pub fn ext_int(k: u32, d: &ReducedSequence, s: i64) -> Option<ColumnVector> {
    let e = ext(d, s);
    e.iter().all(|h| h.is_integer()).then(|| ColumnVector {
        k,
        c: e.iter().map(|h| h.0 / 2).collect(),
    })
}

/// Scalar functions acting on reduced sequences. `MinMax` covers two
/// consecutive positions, the others one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatFn {
    /// `max(x, -x-1)`
    Cyc,
    /// `min(x, -x + H_i)`
    Dec(u32),
    /// `min(x, -x)`
    Min,
    /// `(x, y) ↦ (min, max)`
    MinMax,
}

impl HatFn {
    pub fn width(&self) -> usize {
        match self {
            HatFn::MinMax => 2,
            _ => 1,
        }
    }
}

/// The function sequence whose Cartesian product is the reduced form of `Q_phase`.
pub fn hat_q_sequence(k: u32, phase: usize) -> Vec<HatFn> {
    let ki = k as i64;
    let km = (k % 3) as i64;
    let tail = |i: i64| -> Vec<HatFn> {
        if km == (2 * i + 1) % 3 {
            vec![]
        } else if km == (2 * i + 2) % 3 {
            vec![HatFn::Dec(1)]
        } else {
            vec![HatFn::Dec(2), HatFn::Min]
        }
    };
    let mut out = Vec::new();
    match phase {
        1 => {
            out.push(HatFn::Cyc);
            for i in 1..=(ki - 3) / 3 {
                out.extend([HatFn::Dec((ki - 3 * i) as u32), HatFn::MinMax]);
            }
            out.extend(tail(1));
        }
        2 => {
            for i in 1..=(ki - 2) / 3 {
                out.extend([HatFn::Dec((ki - 3 * i + 1) as u32), HatFn::MinMax]);
            }
            out.extend(tail(2));
        }
        3 => {
            for i in 1..=(ki - 2) / 3 {
                out.extend([HatFn::MinMax, HatFn::Dec((ki - 3 * i - 1) as u32)]);
            }
            out.extend(match km {
                2 => vec![],
                0 => vec![HatFn::Min],
                _ => vec![HatFn::MinMax],
            });
        }
        _ => panic!("phase must be 1, 2 or 3, got {phase}"),
    }
    debug_assert_eq!(out.iter().map(HatFn::width).sum::<usize>(), k as usize - 2);
    out
}

/// Applies the reduced form of `Q_phase` to `d`.
pub fn hat_q(k: u32, phase: usize, d: &ReducedSequence) -> ReducedSequence {
    let mut out = d.d.clone();
    let mut pos = 0;
    for f in hat_q_sequence(k, phase) {
        let x = out[pos].0;
        match f {
            HatFn::Cyc => out[pos] = Half(x.max(-x - 2)),
            HatFn::Dec(i) => out[pos] = Half(x.min(-x + 2 * big_h(i))),
            HatFn::Min => out[pos] = Half(x.min(-x)),
            HatFn::MinMax => {
                let y = out[pos + 1].0;
                out[pos] = Half(x.min(y));
                out[pos + 1] = Half(x.max(y));
            }
        }
        pos += f.width();
    }
    ReducedSequence { d: out }
}

/// Interval symbols `0, 1, …, k-1, -k, ±k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalDescriptor {
    Zero,
    /// `i` with `1 ≤ i ≤ k-1`: `[-1/2, H_i/2]`
    Pos(u32),
    /// `[-H_{k-1}/2, 0]`
    NegK,
    /// `[-H_{k-1}/2, H_{k-1}/2]`
    PlusMinusK,
}

impl fmt::Display for IntervalDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalDescriptor::Zero => write!(f, "0"),
            IntervalDescriptor::Pos(i) => write!(f, "{i}"),
            IntervalDescriptor::NegK => write!(f, "-k"),
            IntervalDescriptor::PlusMinusK => write!(f, "±k"),
        }
    }
}

impl IntervalDescriptor {
    /// Closed interval endpoints.
    pub fn interval(&self, k: u32) -> (Half, Half) {
        let hk = big_h(k - 1);
        match *self {
            IntervalDescriptor::Zero => (Half(-1), Half(0)),
            IntervalDescriptor::Pos(i) => (Half(-1), Half(big_h(i))),
            IntervalDescriptor::NegK => (Half(-hk), Half(0)),
            IntervalDescriptor::PlusMinusK => (Half(-hk), Half(hk)),
        }
    }

    pub fn contains(&self, k: u32, x: Half) -> bool {
        let (lo, hi) = self.interval(k);
        lo <= x && x <= hi
    }

    /// Membership of the rational `num / den`, `den > 0`.
    pub fn contains_ratio(&self, k: u32, num: i64, den: i64) -> bool {
        assert!(den > 0);
        let (lo, hi) = self.interval(k);
        // lo.0/2 ≤ num/den ≤ hi.0/2
        lo.0 * den <= 2 * num && 2 * num <= hi.0 * den
    }
}

/// Interval descriptors describing the reduced state after application `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    pub i: usize,
    pub descriptors: Vec<IntervalDescriptor>,
}

impl StateSequence {
    pub fn contains(&self, k: u32, d: &ReducedSequence) -> bool {
        self.descriptors.len() == d.d.len()
            && self.descriptors.iter().zip(&d.d).all(|(w, &x)| w.contains(k, x))
    }
}

impl fmt::Display for StateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.descriptors.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy)]
enum Family {
    Z,
    U,
    V,
    W,
}

/// Element at 1-based position `pos` of `Z`, `U_m`, `V_m` or `W_m`.
fn family_element(k: u32, fam: Family, m: usize, pos: usize) -> IntervalDescriptor {
    use IntervalDescriptor::*;
    let ki = k as i64;
    let block = pos.div_ceil(3) as i64;
    let slot = (pos - 1) % 3;
    let num = |v: i64| match v {
        0 => Zero,
        v if (1..ki).contains(&v) => Pos(v as u32),
        v => panic!("descriptor {v} out of range for k = {k}"),
    };
    // The slot holding -k (V) or 0 (W); U has -k there and ±k elsewhere.
    let special = match m {
        1 => 2,
        2 => 1,
        _ => 0,
    };
    match fam {
        Family::Z => Zero,
        Family::U => {
            if slot == special {
                NegK
            } else {
                PlusMinusK
            }
        }
        Family::V | Family::W => {
            if slot == special {
                return if matches!(fam, Family::V) { NegK } else { Zero };
            }
            let i = block;
            num(match (m, slot) {
                (1, 0) => ki - 3 * i + 2,
                (1, 1) => ki - 3 * i,
                (2, 0) => ki - 3 * i + 1,
                (2, 2) => ki - 3 * i,
                (0, 1) => ki - 3 * i + 1,
                (0, 2) => ki - 3 * i - 1,
                _ => unreachable!(),
            })
        }
    }
}

fn join(k: u32, split: usize, a: (Family, usize), b: (Family, usize)) -> Vec<IntervalDescriptor> {
    (1..=k as usize - 2)
        .map(|pos| {
            let (fam, m) = if pos <= split { a } else { b };
            family_element(k, fam, m, pos)
        })
        .collect()
}

/// `X_i` for `1 ≤ i ≤ 5k-12`.
pub fn state_sequence(k: u32, i: usize) -> Result<StateSequence> {
    FamilyParams::new(k)?;
    let ku = k as usize;
    let last = 5 * ku - 12;
    if !(1..=last).contains(&i) {
        return Err(Error::Parameter(format!("state index {i} outside 1..={last}")));
    }
    let m = i % 3;
    let descriptors = if i <= 2 * ku - 5 {
        join(k, (i + 1).div_ceil(2), (Family::V, m), (Family::U, m))
    } else if i <= 3 * ku - 7 {
        join(k, 3 * ku - 6 - i, (Family::V, m), (Family::W, m))
    } else {
        join(k, (i + 1 - (3 * ku - 6)).div_ceil(2), (Family::Z, m), (Family::W, m))
    };
    Ok(StateSequence { i, descriptors })
}

/// All flat sequences of length `m` with entries in `[0, max]`.
pub fn flat_sequences(m: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for v in 0..=max {
        out.push(vec![v; m]);
        if v < max {
            for r in 1..m {
                let mut s = vec![v; m - r];
                s.extend(std::iter::repeat_n(v + 1, r));
                out.push(s);
            }
        }
    }
    out
}

/// All 2-flat column vectors with entries in `[0, 2^(k-1) - 1]`.
pub fn two_flat_vectors(k: u32) -> Result<Vec<ColumnVector>> {
    let fp = FamilyParams::new(k)?;
    let half = fp.b() / 2;
    let flats = flat_sequences(half, fp.n() as i64);
    let mut out = Vec::with_capacity(flats.len() * flats.len());
    for odd in &flats {
        for even in &flats {
            out.push(ColumnVector {
                k,
                c: crate::oracle::interleave(odd, even),
            });
        }
    }
    Ok(out)
}

fn check_two_flat_input(c: &ColumnVector) -> Result<()> {
    let n = FamilyParams::new(c.k)?.n() as i64;
    if c.b() != 2 * (c.k as usize - 2) {
        return Err(Error::LengthMismatch {
            expected: 2 * (c.k as usize - 2),
            got: c.b(),
        });
    }
    if let Some(&v) = c.c.iter().find(|&&v| v < 0 || v > n) {
        return Err(Error::Parameter(format!("entry {v} outside [0, {n}]")));
    }
    if !c.is_two_flat() {
        return Err(Error::NotTwoFlat);
    }
    Ok(())
}

/// Balanced lower and upper bounds `(č, ĉ)` of an unbalanced 2-flat vector.
pub fn bounds(c: &ColumnVector) -> Result<(ColumnVector, ColumnVector)> {
    check_two_flat_input(c)?;
    if c.is_balanced() {
        return Err(Error::Balanced);
    }
    let b = c.b();
    let half = b / 2;
    let v = |l: usize| c.c[l - 1];
    // At most one ascent exists in each flat parity subsequence.
    let i = (1..half).find(|&i| v(2 * i - 1) < v(2 * i + 1)).unwrap_or(half);
    let j = (1..half).find(|&j| v(b - 2 * j) < v(b - 2 * j + 2)).unwrap_or(half);
    assert_ne!(i, j, "unbalanced 2-flat vector with equal bound indices: {c}");
    let (lower, upper): (Vec<i64>, Vec<i64>) = if i < j {
        (
            (1..=b)
                .map(|l| match (l % 2, l <= 2 * j - 1) {
                    (1, true) => v(1),
                    (1, false) => v(b - 1),
                    _ => v(l),
                })
                .collect(),
            (1..=b).map(|l| if l % 2 == 1 { v(b - 1) } else { v(b) }).collect(),
        )
    } else {
        (
            (1..=b).map(|l| if l % 2 == 1 { v(1) } else { v(2) }).collect(),
            (1..=b)
                .map(|l| match (l % 2, l <= b - 2 * i) {
                    (1, _) => v(l),
                    (_, true) => v(2),
                    _ => v(b),
                })
                .collect(),
        )
    };
    Ok((
        ColumnVector { k: c.k, c: lower },
        ColumnVector { k: c.k, c: upper },
    ))
}

/// Final state of a balanced trajectory of height `s` after `5k-12`
/// applications: `(s/2)^b`, or `((s-1)/2)^{k-2} ((s+1)/2)^{k-2}` for odd `s`.
pub fn balanced_endpoint(k: u32, s: i64) -> ColumnVector {
    let half = k as usize - 2;
    let c = if s % 2 == 0 {
        vec![s / 2; 2 * half]
    } else {
        let mut c = vec![(s - 1) / 2; half];
        c.extend(std::iter::repeat_n((s + 1) / 2, half));
        c
    };
    ColumnVector { k, c }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Reduced state outside `I(X_i)`.
    IntervalState,
    /// Reduced dynamics disagree with the column dynamics.
    Reduction,
    /// Balanced endpoint differs from the closed form.
    Endpoint,
    /// Bounds trajectories fail to enclose the trajectory.
    Sandwich,
    /// A pinned half takes a value outside its allowed set.
    Pinning,
    /// A moving element is not where it should be.
    MovingElement,
    /// Final state not flat.
    NotFlat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub application: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryReport {
    pub k: u32,
    /// `states[i]` is the state after `i` applications, `i = 0..=6k-15`.
    pub states: Vec<ColumnVector>,
    pub balanced: bool,
    /// Height of the input if balanced, otherwise of its lower bound.
    pub base_height: i64,
    /// `interval_ok[i-1]` for `i = 1..=5k-12`, balanced inputs only.
    pub interval_ok: Vec<bool>,
    pub violations: Vec<Violation>,
    /// First application index from which every state is flat.
    pub flat_from: Option<usize>,
}

impl TrajectoryReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn final_state(&self) -> &ColumnVector {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Runs the `6k-15` applications on a 2-flat input and checks every
/// intermediate claim about the trajectory.
pub fn check_trajectory(c: &ColumnVector) -> Result<TrajectoryReport> {
    check_two_flat_input(c)?;
    let k = c.k;
    let ku = k as usize;
    let b = c.b();
    let total = 6 * ku - 15;
    let balanced_end = 5 * ku - 12;
    let states = trajectory(c, total);
    let mut violations = Vec::new();
    let mut flag = |application: usize, kind: ViolationKind, detail: String| {
        violations.push(Violation {
            application,
            kind,
            detail,
        })
    };

    let balanced = c.is_balanced();
    let mut interval_ok = Vec::new();
    let base_height;
    if balanced {
        let (mut d, s) = reduce(c)?;
        base_height = s;
        for i in 1..=balanced_end {
            d = hat_q(k, phase_of(i), &d);
            let (actual, _) = reduce(&states[i]).expect("Q-sets preserve balance");
            if actual != d {
                flag(i, ViolationKind::Reduction, format!("state {} vs reduced dynamics", states[i]));
            }
            let x = state_sequence(k, i)?;
            let ok = x.contains(k, &actual);
            if !ok {
                let shown: Vec<String> = actual.d.iter().map(Half::to_string).collect();
                flag(i, ViolationKind::IntervalState, format!("({}) not in I{x}", shown.join(",")));
            }
            interval_ok.push(ok);
        }
        let expected = balanced_endpoint(k, s);
        if states[balanced_end] != expected {
            flag(
                balanced_end,
                ViolationKind::Endpoint,
                format!("{} != {expected}", states[balanced_end]),
            );
        }
    } else {
        let (lower, upper) = bounds(c)?;
        base_height = lower.height();
        let lo = trajectory(&lower, total);
        let hi = trajectory(&upper, total);
        for i in 0..=total {
            if !(lo[i].le(&states[i]) && states[i].le(&hi[i])) {
                flag(i, ViolationKind::Sandwich, format!("{} ≤ {} ≤ {}", lo[i], states[i], hi[i]));
            }
        }
    }

    // Pinned halves from application 3k-6 onwards.
    let s = base_height;
    let (left_ok, right_ok): (Vec<i64>, Vec<i64>) = if s % 2 == 0 {
        (vec![s / 2], vec![s / 2, s / 2 + 1])
    } else {
        (vec![(s - 1) / 2, (s + 1) / 2], vec![(s + 1) / 2])
    };
    for i in (3 * ku - 6)..=total {
        let width = if i <= balanced_end {
            (i + 1 - (3 * ku - 6)).div_ceil(2)
        } else {
            ku - 2
        };
        for j in 1..=width {
            let (l, r) = (states[i].c[j - 1], states[i].c[b - j]);
            if !left_ok.contains(&l) || !right_ok.contains(&r) {
                flag(i, ViolationKind::Pinning, format!("positions {j},{}: {l},{r}", b - j + 1));
            }
        }
    }

    // Moving elements.
    let odd = s % 2 != 0;
    let s_move = if odd { (s - 1) / 2 } else { s / 2 + 1 };
    let mut n_t = 0;
    for t in 1..=ku - 2 {
        let i_t = 3 * ku + 2 * t - 8;
        let t_pos = if odd { t } else { b - t + 1 };
        let a_t = states[i_t].c[t_pos - 1];
        if a_t != s_move {
            continue;
        }
        n_t += 1;
        for i in 0..=total - i_t {
            let pos = if odd {
                t.saturating_sub(i).max(n_t)
            } else {
                (t_pos + i).min(b - n_t + 1)
            };
            if states[i_t + i].c[pos - 1] != a_t {
                flag(
                    i_t + i,
                    ViolationKind::MovingElement,
                    format!("element {t} expected at position {pos} in {}", states[i_t + i]),
                );
            }
        }
    }

    if !states[total].is_flat() {
        flag(total, ViolationKind::NotFlat, states[total].to_string());
    }
    let flat_from = (0..=total)
        .rev()
        .take_while(|&i| states[i].is_flat())
        .last();

    Ok(TrajectoryReport {
        k,
        states,
        balanced,
        base_height,
        interval_ok,
        violations,
        flat_from,
    })
}

/// Aggregate of [`check_trajectory`] over every 2-flat input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractSimSummary {
    pub k: u32,
    pub inputs: u64,
    pub balanced_inputs: u64,
    pub flat_at_end: u64,
    /// Balanced inputs whose endpoint after `5k-12` applications matches.
    pub endpoint_matches: u64,
    /// Balanced inputs whose reduced states stay inside every `I(X_i)`.
    pub interval_sound: u64,
    pub violating_inputs: u64,
    pub total_violations: u64,
    /// Largest application index at which some trajectory becomes flat for good.
    pub latest_flat: usize,
    /// Same, restricted to balanced inputs.
    pub latest_flat_balanced: usize,
    /// First few offending inputs with one violation each.
    pub examples: Vec<(ColumnVector, Violation)>,
}

impl AbstractSimSummary {
    pub fn ok(&self) -> bool {
        self.violating_inputs == 0
    }
}

pub fn abstract_sim(k: u32) -> Result<AbstractSimSummary> {
    let inputs = two_flat_vectors(k)?;
    let reports: Vec<TrajectoryReport> = inputs
        .par_iter()
        .map(check_trajectory)
        .collect::<Result<_>>()?;
    let count = |f: &dyn Fn(&TrajectoryReport) -> bool| reports.iter().filter(|r| f(r)).count() as u64;
    let has = |r: &TrajectoryReport, kind: ViolationKind| r.violations.iter().any(|v| v.kind == kind);
    let latest = |balanced_only: bool| {
        reports
            .iter()
            .filter(|r| !balanced_only || r.balanced)
            .filter_map(|r| r.flat_from)
            .max()
            .unwrap_or(0)
    };
    Ok(AbstractSimSummary {
        k,
        inputs: reports.len() as u64,
        balanced_inputs: count(&|r| r.balanced),
        flat_at_end: count(&|r| r.final_state().is_flat()),
        endpoint_matches: count(&|r| r.balanced && !has(r, ViolationKind::Endpoint)),
        interval_sound: count(&|r| r.balanced && r.interval_ok.iter().all(|&b| b)),
        violating_inputs: count(&|r| !r.ok()),
        total_violations: reports.iter().map(|r| r.violations.len() as u64).sum(),
        latest_flat: latest(false),
        latest_flat_balanced: latest(true),
        examples: reports
            .iter()
            .filter(|r| !r.ok())
            .take(8)
            .map(|r| (r.states[0].clone(), r.violations[0].clone()))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(k: u32, c: &[i64]) -> ColumnVector {
        ColumnVector::new(k, c.to_vec()).unwrap()
    }

    #[test]
    fn predicates() {
        assert!(is_flat(&[2, 2, 3, 3]));
        assert!(!is_flat(&[2, 3, 4]));
        assert!(!is_flat(&[3, 2]));
        assert!(is_two_flat(&[0, 5, 1, 5, 1, 6]));
        assert!(is_balanced(&[1, 2, 3, 4]));
        assert!(!is_balanced(&[1, 2, 2, 4]));
        assert_eq!(cv(4, &[1, 2, 3, 4]).height(), 5);
    }

    #[test]
    fn column_counts() {
        let zeros = vec![0u8; 90];
        assert_eq!(ones_per_column(&zeros, 5).unwrap().c, vec![0; 6]);
        assert_eq!(ones_per_column(&[1u8; 90], 5).unwrap().c, vec![15; 6]);
        let mut x = vec![0u8; 90];
        for row in 10..15 {
            x[row * 6] = 1;
        }
        assert_eq!(ones_per_column(&x, 5).unwrap().c[0], 5);
        x[0] = 1;
        x[6 * 14] = 0;
        assert_eq!(ones_per_column(&x, 5), Err(Error::UnsortedColumn { column: 0 }));
        let c = cv(5, &[3, 0, 15, 7, 1, 2]);
        assert_eq!(ones_per_column(&word_from_columns(&c).unwrap(), 5).unwrap(), c);
    }

    #[test]
    fn function_examples() {
        assert_eq!(cyc(&cv(5, &[0; 6])).c, vec![0; 6]);
        assert_eq!(dec(1, &cv(5, &[10, 5, 5, 5, 5, 0])).unwrap().c, vec![7, 5, 5, 5, 5, 3]);
        assert_eq!(mov(1, &cv(5, &[3, 9, 5, 5, 5, 5])).unwrap().c, vec![3, 9, 5, 5, 5, 5]);
        assert_eq!(mov(1, &cv(5, &[9, 3, 5, 5, 6, 5])).unwrap().c, vec![3, 9, 5, 5, 5, 6]);
        // middle pair for i = k-2
        assert_eq!(mov(3, &cv(5, &[0, 0, 4, 1, 0, 0])).unwrap().c, vec![0, 0, 1, 4, 0, 0]);
        assert_eq!(cyc(&cv(4, &[0, 1, 1, 3])).c, vec![2, 1, 1, 1]);
        assert!(dec(0, &cv(5, &[0; 6])).is_err());
        assert!(mov(4, &cv(5, &[0; 6])).is_err());
    }

    #[test]
    fn q_sets_cover_each_index_once() {
        for k in 3..=12 {
            let all: Vec<QFunction> = (1..=3).flat_map(|p| q_set(k, p)).collect();
            let half = k as usize - 2;
            for i in 1..=half {
                assert_eq!(all.iter().filter(|f| **f == QFunction::Dec(i)).count(), 1);
                assert_eq!(all.iter().filter(|f| **f == QFunction::Mov(i)).count(), 1);
            }
            assert_eq!(all.iter().filter(|f| **f == QFunction::Cyc).count(), 1);
            for p in 1..=3 {
                let mut seen = std::collections::BTreeSet::new();
                for f in q_set(k, p) {
                    for a in f.args(k) {
                        assert!(seen.insert(a), "k={k} phase={p} position {a} reused");
                    }
                }
            }
        }
    }

    #[test]
    fn hat_sequences_have_length_k_minus_2() {
        for k in 3..=20 {
            for p in 1..=3 {
                let w: usize = hat_q_sequence(k, p).iter().map(HatFn::width).sum();
                assert_eq!(w, k as usize - 2, "k={k} phase={p}");
            }
        }
    }

    #[test]
    fn hat_scalar_examples() {
        let one = |f: HatFn, x: i64| hat_apply_single(f, Half(x));
        assert_eq!(one(HatFn::Cyc, 0), Half(0));
        // Dec_2(3) = min(3, -3 + 3) = 0
        assert_eq!(one(HatFn::Dec(2), 6), Half(0));
        assert_eq!(one(HatFn::Min, 3), Half(-3));
    }

    fn hat_apply_single(f: HatFn, x: Half) -> Half {
        // k = 3 sequences have a single slot; reuse hat_q through a custom sequence
        let x = x.0;
        match f {
            HatFn::Cyc => Half(x.max(-x - 2)),
            HatFn::Dec(i) => Half(x.min(-x + 2 * big_h(i))),
            HatFn::Min => Half(x.min(-x)),
            HatFn::MinMax => unreachable!(),
        }
    }

    #[test]
    fn reduce_ext_round_trip() {
        let c = cv(5, &[2, 2, 2, 2, 2, 2]);
        let (d, s) = reduce(&c).unwrap();
        assert_eq!((d.d.clone(), s), (vec![Half(0); 3], 4));
        assert_eq!(ext_int(5, &d, s).unwrap(), c);
        let e = ext(&d, 5);
        assert!(e.iter().all(|h| *h == Half(5)));
        assert_eq!(ext_int(5, &d, 5), None);
        assert_eq!(reduce(&cv(4, &[0, 1, 2, 2])), Err(Error::NotBalanced));
        let c = cv(5, &[1, 4, 3, 2, 1, 4]);
        let (d, s) = reduce(&c).unwrap();
        assert_eq!(ext_int(5, &d, s).unwrap(), c);
    }

    #[test]
    fn interval_endpoints() {
        let k = 6;
        let pm = IntervalDescriptor::PlusMinusK;
        assert!(pm.contains(k, Half(big_h(5))));
        assert!(pm.contains_ratio(k, big_h(5), 2));
        assert!(!pm.contains_ratio(k, big_h(5) * 1000 + 1, 2000));
        assert!(IntervalDescriptor::Zero.contains(k, Half(-1)));
        assert!(!IntervalDescriptor::Zero.contains(k, Half(1)));
        assert!(IntervalDescriptor::NegK.contains(k, Half(-31)));
        assert!(!IntervalDescriptor::Pos(2).contains(k, Half(4)));
    }

    #[test]
    fn state_sequence_shapes() {
        use IntervalDescriptor::*;
        for k in 3..=12 {
            let x1 = state_sequence(k, 1).unwrap();
            assert_eq!(x1.descriptors[0], Pos(k - 1));
            assert_eq!(x1.descriptors.len(), k as usize - 2);
            let last = state_sequence(k, 5 * k as usize - 12).unwrap();
            assert!(last.descriptors.iter().all(|d| *d == Zero));
            assert!(state_sequence(k, 0).is_err());
            assert!(state_sequence(k, 5 * k as usize - 11).is_err());
        }
        let x1 = state_sequence(8, 1).unwrap();
        assert_eq!(
            x1.descriptors,
            vec![Pos(7), PlusMinusK, NegK, PlusMinusK, PlusMinusK, NegK]
        );
    }

    #[test]
    fn flat_counts() {
        assert_eq!(flat_sequences(4, 31).len(), 125);
        assert_eq!(two_flat_vectors(4).unwrap().len(), 225);
        assert_eq!(two_flat_vectors(5).unwrap().len(), 2116);
        assert_eq!(two_flat_vectors(6).unwrap().len(), 15625);
        assert!(flat_sequences(3, 2).iter().all(|s| is_flat(s)));
    }

    #[test]
    fn bounds_small_case() {
        let c = cv(4, &[0, 1, 1, 1]);
        let (lo, hi) = bounds(&c).unwrap();
        assert!(lo.is_balanced() && hi.is_balanced());
        assert_eq!(lo.height() + 1, hi.height());
        assert!(lo.le(&c) && c.le(&hi));
        assert_eq!(bounds(&cv(4, &[0, 0, 1, 1])), Err(Error::Balanced));
        assert_eq!(bounds(&cv(4, &[0, 0, 2, 0])), Err(Error::NotTwoFlat));
    }

    #[test]
    fn bounds_exhaustive_small_k() {
        for k in 3..=5 {
            for c in two_flat_vectors(k).unwrap() {
                if c.is_balanced() {
                    continue;
                }
                let (lo, hi) = bounds(&c).unwrap();
                assert!(lo.is_balanced() && hi.is_balanced(), "{c}");
                assert_eq!(lo.height() + 1, hi.height(), "{c}");
                assert!(lo.le(&c) && c.le(&hi), "{c}");
            }
        }
    }

    #[test]
    fn zero_trajectory_is_flat_throughout() {
        let r = check_trajectory(&cv(5, &[0; 6])).unwrap();
        assert!(r.ok());
        assert_eq!(r.flat_from, Some(0));
        assert!(r.states.iter().all(ColumnVector::is_flat));
    }

    #[test]
    fn balanced_even_height_endpoint() {
        // s = 14: c_i + c_{7-i} = 14
        let c = cv(5, &[0, 14, 0, 14, 0, 14]);
        assert!(c.is_balanced() && c.is_two_flat());
        let r = check_trajectory(&c).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        assert_eq!(r.states[13], balanced_endpoint(5, 14));
        assert_eq!(balanced_endpoint(5, 14).c, vec![7; 6]);
        assert_eq!(balanced_endpoint(5, 3).c, vec![1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn abstract_sim_k4() {
        let s = abstract_sim(4).unwrap();
        assert_eq!(s.inputs, 225);
        assert!(s.ok(), "{:?}", s.examples);
        assert_eq!(s.flat_at_end, 225);
    }
}
