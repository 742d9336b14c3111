//! Constructions: the periodic sorter `CW_k`, its register-expanded
//! form `P_k`, the 3-periodic merger `M_k`, and the experimental 4-periodic
//! `P'_k` / `M'_k`.
//!
//! All networks use 0-based registers. `M_k` is `P_k` compacted with registers
//! `0` and `N - 1` removed, so register `r` of `M_k` is register `r + 1` of
//! `P_k`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::netcore::{Comparator, DropMode, Network, Stage};

/// Derived sizes of the `P_k` / `M_k` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyParams {
    pub k: u32,
}

impl FamilyParams {
    pub fn new(k: u32) -> Result<Self> {
        if !(3..=24).contains(&k) {
            return Err(Error::Parameter(format!("k must be in 3..=24, got {k}")));
        }
        Ok(FamilyParams { k })
    }

    /// Rows of the register matrix, `2^(k-1) - 1`.
    pub fn n(&self) -> usize {
        (1 << (self.k - 1)) - 1
    }

    /// Columns of the register matrix, `2(k - 2)`.
    pub fn b(&self) -> usize {
        2 * (self.k as usize - 2)
    }

    /// `2^(k-i-1) - 1`, the row displacement of the `i`-th long comparators.
    pub fn h(&self, i: usize) -> usize {
        (1 << (self.k as usize - i - 1)) - 1
    }

    /// `N(M_k) = n·b = (2^k - 2)(k - 2)`.
    pub fn m_registers(&self) -> usize {
        self.n() * self.b()
    }

    pub fn p_registers(&self) -> usize {
        self.m_registers() + 2
    }

    /// `2k - 5`, the number of passes `M_k` needs to merge.
    pub fn merge_passes(&self) -> usize {
        2 * self.k as usize - 5
    }
}

/// `H_i = 2^i - 1`.
pub fn big_h(i: u32) -> i64 {
    (1i64 << i) - 1
}

fn comp(lo: usize, hi: usize) -> Comparator {
    debug_assert!(lo < hi);
    Comparator { lo, hi }
}

fn checked(net: Network) -> Result<Network> {
    assert!(net.all_standard(), "construction produced a non-standard comparator");
    Ok(net)
}

/// `CW_k`: `2^k` registers, `k` stages, declared period `k`.
pub fn build_cw(k: u32) -> Result<Network> {
    if !(1..=24).contains(&k) {
        return Err(Error::Parameter(format!("k must be in 1..=24, got {k}")));
    }
    let k = k as usize;
    let half = 1usize << (k - 1);
    let mut stages = vec![Stage::new((0..half).map(|i| comp(2 * i, 2 * i + 1)))?];
    for j in 1..k {
        let count = half - (1 << (k - j - 1));
        stages.push(Stage::new(
            (0..count).map(|i| comp(2 * i + 1, 2 * i + (1 << (k - j)))),
        )?);
    }
    checked(Network::new(1 << k, stages, Some(k))?)
}

/// The stage `S_{k,1}` augmented with the two boundary comparators, followed
/// by `S_{k,2}, …, S_{k,2k-3}`.
pub fn build_p(k: u32) -> Result<Network> {
    let fp = FamilyParams::new(k)?;
    let (n, b, total) = (fp.n(), fp.b(), fp.p_registers());
    let half = b / 2;

    let mut stages = Vec::with_capacity(2 * half + 1);
    let first = (1..n)
        .map(|i| comp(b * i, b * i + 1))
        .chain([comp(0, 1), comp(total - 2, total - 1)]);
    stages.push(Stage::new(first)?);

    for j in 1..=half {
        let span = 1usize << (k as usize - j - 1);
        stages.push(Stage::new(
            (0..=n - span).map(|i| comp(b * i + j, b * (i + span - 1) + (b - j + 1))),
        )?);

        // For j = b/2 the two families coincide; the set keeps one copy.
        let short: BTreeSet<Comparator> = (0..n)
            .flat_map(|i| [comp(b * i + j, b * i + j + 1), comp(b * i + (b - j), b * i + (b - j + 1))])
            .collect();
        stages.push(Stage::new(short)?);
    }

    let net = checked(Network::new(total, stages, None)?)?;
    debug_assert_eq!(net.depth(), 2 * k as usize - 3);
    Ok(net)
}

/// Compacts a register-expanded network and removes its two boundary
/// registers together with the two boundary comparators of stage 1.
fn compact_and_trim(expanded: &Network, expected_delay: usize) -> Result<Network> {
    let delay = expanded.delay();
    if delay != expected_delay {
        return Err(Error::Parameter(format!(
            "expected delay {expected_delay}, construction has delay {delay}"
        )));
    }
    let total = expanded.n_registers();
    let cf = expanded.compact_form()?;
    let boundary = [comp(0, 1), comp(total - 2, total - 1)];
    for c in &boundary {
        assert_eq!(
            cf.origin_of(1, c),
            Some(1),
            "boundary comparator {c} does not come from stage 1"
        );
    }
    let mut stages = cf.network.stages().to_vec();
    stages[0] = Stage::new(
        stages[0]
            .comparators()
            .iter()
            .copied()
            .filter(|c| !boundary.contains(c)),
    )?;
    let trimmed = Network::new(total, stages, cf.network.period())?;
    let drop: BTreeSet<usize> = [0, total - 1].into_iter().collect();
    checked(trimmed.delete_registers(&drop, DropMode::Strict)?)
}

/// `M_k`: 3 stages on `(2^k - 2)(k - 2)` registers, declared period 3.
pub fn build_m(k: u32) -> Result<Network> {
    let fp = FamilyParams::new(k)?;
    let net = compact_and_trim(&build_p(k)?, 3)?;
    assert_eq!(net.n_registers(), fp.m_registers());
    assert_eq!(net.n_registers(), ((1usize << k) - 2) * (k as usize - 2));
    Ok(net)
}

/// Register expansion of `CW_k` where each interior register becomes
/// `(k - 2) / group` consecutive registers and a short stage follows every
/// `group` long stages.
///
/// Odd register `2i+1` of `CW_k` maps to copies `row·2m + 1 ..= row·2m + m`
/// and even register `2i+2` to `row·2m + m + 1 ..= row·2m + 2m`, with
/// `m = (k-2)/group`. Long comparators of the `p`-th group leave copy `p` of
/// the odd register and land on copy `m - p + 1` of the even one; the short
/// stage after group `p` joins copies `p, p+1` (odd side) and `m-p, m-p+1`
/// (even side). The last `CW_k` stage joins the last odd copy to the first
/// even copy. `group = 1` reproduces `P_k`.
fn expand_cw(k: u32, group: usize) -> Result<Network> {
    let fp = FamilyParams::new(k)?;
    let ku = k as usize;
    if (ku - 2) % group != 0 {
        return Err(Error::Parameter(format!("k - 2 must be divisible by {group}")));
    }
    let m = (ku - 2) / group;
    let rows = fp.n();
    let width = 2 * m;
    let total = rows * width + 2;
    // Row -1 copy m of the even side is register 0.
    let odd = |row: usize, p: usize| row * width + p;
    let even = |row: isize, q: usize| (row * width as isize + (m + q) as isize) as usize;

    let half = 1usize << (ku - 1);
    let mut stages = Vec::new();
    stages.push(Stage::new((0..half).map(|i| comp(even(i as isize - 1, m), odd(i, 1))))?);

    // CW stage j+1 has comparators [2i+1 : 2i + 2^(k-j)], i < 2^(k-1) - 2^(k-j-1).
    let long = |j: usize, p: usize| -> Result<Stage> {
        let span = 1usize << (ku - j - 1);
        Stage::new((0..half - span).map(|i| comp(odd(i, p), even((i + span - 1) as isize, m - p + 1))))
    };
    for p in 1..=m {
        for g in 0..group {
            stages.push(long((p - 1) * group + g + 1, p)?);
        }
        if p < m {
            stages.push(Stage::new((0..rows).flat_map(|i| {
                [comp(odd(i, p), odd(i, p + 1)), comp(even(i as isize, m - p), even(i as isize, m - p + 1))]
            }))?);
        }
    }
    stages.push(Stage::new((0..half - 1).map(|i| comp(odd(i, m), even(i as isize, 1))))?);
    checked(Network::new(total, stages, None)?)
}

/// Experimental `P'_k` for even `k ≥ 4`: each interior register of `CW_k`
/// becomes `(k-2)/2` registers, with a short stage after every pair of long
/// stages. Delay 4.
pub fn build_p4(k: u32) -> Result<Network> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Parameter(format!("k must be even and at least 4, got {k}")));
    }
    expand_cw(k, 2)
}

/// Experimental 4-periodic merger `M'_k`: compact form of `P'_k` with the
/// boundary registers removed.
pub fn build_m4(k: u32) -> Result<Network> {
    compact_and_trim(&build_p4(k)?, 4)
}
