//! Comparator networks: stages, execution, delay, union and compact form.
//!
//! Registers are indexed from 0. Stage indices reported by [`Network::fst`],
//! [`Network::lst`] and the error types are 1-based, matching the usual way
//! stages are numbered when the network is drawn.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A compare-exchange gate: after it fires, `lo` holds the minimum and `hi`
/// the maximum of the two registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparator {
    pub lo: usize,
    pub hi: usize,
}

impl Comparator {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == hi {
            return Err(Error::DegenerateComparator(lo));
        }
        Ok(Comparator { lo, hi })
    }

    /// `[i:j]` is standard iff `i < j`.
    pub fn is_standard(&self) -> bool {
        self.lo < self.hi
    }

    #[inline]
    pub fn apply<T: Ord + Copy>(&self, v: &mut [T]) {
        let (a, b) = (v[self.lo], v[self.hi]);
        if a > b {
            v[self.lo] = b;
            v[self.hi] = a;
        }
    }

    /// Compare-exchange on 64 bit-sliced 0-1 lanes: min is AND, max is OR.
    #[inline]
    pub fn apply_lanes(&self, w: &mut [u64]) {
        let (a, b) = (w[self.lo], w[self.hi]);
        w[self.lo] = a & b;
        w[self.hi] = a | b;
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// A set of comparators on pairwise disjoint registers.
///
/// Comparators are kept in canonical `(lo, hi)` order so that equality is set
/// equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Stage {
    comparators: Vec<Comparator>,
}

impl Stage {
    pub fn new<I: IntoIterator<Item = Comparator>>(comparators: I) -> Result<Self> {
        let mut comparators: Vec<Comparator> = comparators.into_iter().collect();
        comparators.sort_unstable();
        let mut seen = BTreeSet::new();
        for c in &comparators {
            for r in [c.lo, c.hi] {
                if !seen.insert(r) {
                    return Err(Error::RegisterReused { reg: r });
                }
            }
        }
        Ok(Stage { comparators })
    }

    pub fn empty() -> Self {
        Stage::default()
    }

    pub fn comparators(&self) -> &[Comparator] {
        &self.comparators
    }

    pub fn len(&self) -> usize {
        self.comparators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comparators.is_empty()
    }

    pub fn contains(&self, c: &Comparator) -> bool {
        self.comparators.binary_search(c).is_ok()
    }

    /// Registers touched by this stage.
    pub fn regs(&self) -> BTreeSet<usize> {
        self.comparators.iter().flat_map(|c| [c.lo, c.hi]).collect()
    }

    pub fn touches(&self, reg: usize) -> bool {
        self.comparators.iter().any(|c| c.lo == reg || c.hi == reg)
    }

    /// Stage-wise union; fails if the register sets intersect.
    pub fn union(&self, other: &Stage) -> Result<Stage> {
        Stage::new(self.comparators.iter().chain(&other.comparators).copied())
    }

    pub fn apply<T: Ord + Copy>(&self, v: &mut [T]) {
        for c in &self.comparators {
            c.apply(v);
        }
    }

    pub fn apply_lanes(&self, w: &mut [u64]) {
        for c in &self.comparators {
            c.apply_lanes(w);
        }
    }
}

/// An `n_registers`-register comparator network with an optional declared
/// period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n_registers: usize,
    stages: Vec<Stage>,
    period: Option<usize>,
}

impl Network {
    /// Validates register ranges and, when a period is declared, that stage
    /// `i` equals stage `i + p` for every `i` in range.
    pub fn new(n_registers: usize, stages: Vec<Stage>, period: Option<usize>) -> Result<Self> {
        for s in &stages {
            if let Some(c) = s.comparators().iter().find(|c| c.lo.max(c.hi) >= n_registers) {
                return Err(Error::RegisterOutOfRange {
                    reg: c.lo.max(c.hi),
                    n_registers,
                });
            }
        }
        if let Some(p) = period {
            if p == 0 || p > stages.len() {
                return Err(Error::InvalidPeriod {
                    period: p,
                    depth: stages.len(),
                });
            }
            for i in 0..stages.len() - p {
                if stages[i] != stages[i + p] {
                    return Err(Error::PeriodViolated {
                        period: p,
                        stage: i + 1,
                    });
                }
            }
        }
        Ok(Network {
            n_registers,
            stages,
            period,
        })
    }

    pub fn empty(n_registers: usize) -> Self {
        Network {
            n_registers,
            stages: Vec::new(),
            period: None,
        }
    }

    pub fn n_registers(&self) -> usize {
        self.n_registers
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Total number of comparators.
    pub fn size(&self) -> usize {
        self.stages.iter().map(Stage::len).sum()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn with_period(self, period: Option<usize>) -> Result<Self> {
        Network::new(self.n_registers, self.stages, period)
    }

    /// The stages making up one pass: the first `period` stages when a period
    /// is declared, otherwise all of them.
    pub fn pass(&self) -> &[Stage] {
        match self.period {
            Some(p) => &self.stages[..p],
            None => &self.stages,
        }
    }

    pub fn all_standard(&self) -> bool {
        self.comparators().all(|(_, c)| c.is_standard())
    }

    /// Every comparator with its 1-based stage index.
    pub fn comparators(&self) -> impl Iterator<Item = (usize, &Comparator)> + '_ {
        self.stages
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.comparators().iter().map(move |c| (i + 1, c)))
    }

    fn touch_range(&self, reg: usize) -> Option<(usize, usize)> {
        let mut it = self
            .stages
            .iter()
            .enumerate()
            .filter(|(_, s)| s.touches(reg))
            .map(|(i, _)| i + 1);
        let first = it.next()?;
        let last = it.next_back().unwrap_or(first);
        Some((first, last))
    }

    /// First (1-based) stage using register `reg`.
    pub fn fst(&self, reg: usize) -> Result<usize> {
        self.touch_range(reg)
            .map(|(f, _)| f)
            .ok_or(Error::RegisterUnused(reg))
    }

    /// Last (1-based) stage using register `reg`.
    pub fn lst(&self, reg: usize) -> Result<usize> {
        self.touch_range(reg)
            .map(|(_, l)| l)
            .ok_or(Error::RegisterUnused(reg))
    }

    /// `max_j (lst(j) - fst(j) + 1)` over the registers that are used at all;
    /// 0 for a network without comparators.
    pub fn delay(&self) -> usize {
        let mut first = vec![usize::MAX; self.n_registers];
        let mut last = vec![0usize; self.n_registers];
        for (i, s) in self.stages.iter().enumerate() {
            for c in s.comparators() {
                for r in [c.lo, c.hi] {
                    first[r] = first[r].min(i + 1);
                    last[r] = i + 1;
                }
            }
        }
        first
            .iter()
            .zip(&last)
            .filter(|(f, _)| **f != usize::MAX)
            .map(|(f, l)| l - f + 1)
            .max()
            .unwrap_or(0)
    }

    /// Stage-wise union; the shallower network is padded with empty stages.
    /// The result carries no declared period.
    pub fn union(&self, other: &Network) -> Result<Network> {
        if self.n_registers != other.n_registers {
            return Err(Error::RegisterCountMismatch {
                left: self.n_registers,
                right: other.n_registers,
            });
        }
        let depth = self.depth().max(other.depth());
        let empty = Stage::empty();
        let mut stages = Vec::with_capacity(depth);
        for i in 0..depth {
            let a = self.stages.get(i).unwrap_or(&empty);
            let b = other.stages.get(i).unwrap_or(&empty);
            stages.push(a.union(b).map_err(|_| Error::StageConflict { stage: i + 1 })?);
        }
        Network::new(self.n_registers, stages, None)
    }

    /// Packs the network into `D = delay` stages, `T_q = ∪ S_{q + pD}`.
    pub fn compact_form(&self) -> Result<CompactForm> {
        let d = self.delay();
        let mut stages = vec![Stage::empty(); d];
        let mut origin = vec![Vec::new(); d];
        if d > 0 {
            for (i, s) in self.stages.iter().enumerate() {
                let q = i % d;
                stages[q] = stages[q]
                    .union(s)
                    .map_err(|_| Error::StageConflict { stage: q + 1 })?;
                origin[q].extend(s.comparators().iter().map(|c| (*c, i + 1)));
            }
        }
        for o in &mut origin {
            o.sort_unstable();
        }
        let period = if d > 0 { Some(d) } else { None };
        Ok(CompactForm {
            network: Network::new(self.n_registers, stages, period)?,
            origin,
        })
    }

    /// Removes the registers in `drop` and renumbers the survivors
    /// contiguously in their original order.
    ///
    /// In [`DropMode::Strict`] any comparator touching a dropped register is
    /// an error; [`DropMode::Prune`] removes such comparators instead.
    pub fn delete_registers(&self, drop: &BTreeSet<usize>, mode: DropMode) -> Result<Network> {
        if let Some(&r) = drop.iter().find(|&&r| r >= self.n_registers) {
            return Err(Error::RegisterOutOfRange {
                reg: r,
                n_registers: self.n_registers,
            });
        }
        let offending: Vec<Comparator> = self
            .comparators()
            .map(|(_, c)| *c)
            .filter(|c| drop.contains(&c.lo) || drop.contains(&c.hi))
            .collect();
        if mode == DropMode::Strict && !offending.is_empty() {
            return Err(Error::DroppedRegisterInUse(offending));
        }
        let mut renumber = vec![usize::MAX; self.n_registers];
        let mut next = 0;
        for (r, slot) in renumber.iter_mut().enumerate() {
            if !drop.contains(&r) {
                *slot = next;
                next += 1;
            }
        }
        let stages = self
            .stages
            .iter()
            .map(|s| {
                Stage::new(
                    s.comparators()
                        .iter()
                        .filter(|c| !drop.contains(&c.lo) && !drop.contains(&c.hi))
                        .map(|c| Comparator {
                            lo: renumber[c.lo],
                            hi: renumber[c.hi],
                        }),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(next, stages, self.period)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n_registers {
            return Err(Error::LengthMismatch {
                expected: self.n_registers,
                got,
            });
        }
        Ok(())
    }

    /// Applies every stage once, in order.
    pub fn run<T: Ord + Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        let mut out = v.to_vec();
        for s in &self.stages {
            s.apply(&mut out);
        }
        Ok(out)
    }

    /// Applies [`Network::pass`] `passes` times.
    pub fn run_periodic<T: Ord + Copy>(&self, v: &[T], passes: usize) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        let mut out = v.to_vec();
        self.run_periodic_in_place(&mut out, passes);
        Ok(out)
    }

    /// Unchecked in-place variant of [`Network::run_periodic`]; panics on a
    /// length mismatch.
    pub fn run_periodic_in_place<T: Ord + Copy>(&self, v: &mut [T], passes: usize) {
        assert_eq!(v.len(), self.n_registers);
        for _ in 0..passes {
            for s in self.pass() {
                s.apply(v);
            }
        }
    }

    /// Bit-sliced periodic run: `w[r]` holds register `r` of 64 independent
    /// 0-1 inputs.
    pub fn run_lanes(&self, w: &mut [u64], passes: usize) {
        assert_eq!(w.len(), self.n_registers);
        for _ in 0..passes {
            for s in self.pass() {
                s.apply_lanes(w);
            }
        }
    }
}

/// Applies one stage to a value vector.
pub fn run_stage<T: Ord + Copy>(stage: &Stage, v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    stage.apply(&mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropMode {
    Strict,
    Prune,
}

/// A compacted network together with the original (1-based) stage index of
/// each comparator.
#[derive(Debug, Clone)]
pub struct CompactForm {
    pub network: Network,
    origin: Vec<Vec<(Comparator, usize)>>,
}

impl CompactForm {
    /// Original stage of comparator `c` in compacted stage `stage` (1-based).
    pub fn origin_of(&self, stage: usize, c: &Comparator) -> Option<usize> {
        let o = self.origin.get(stage.checked_sub(1)?)?;
        o.binary_search_by(|(x, _)| x.cmp(c))
            .ok()
            .map(|i| o[i].1)
    }

    /// `(comparator, original stage)` pairs of compacted stage `stage`.
    pub fn origins(&self, stage: usize) -> &[(Comparator, usize)] {
        &self.origin[stage - 1]
    }

    pub fn into_network(self) -> Network {
        self.network
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(lo: usize, hi: usize) -> Comparator {
        Comparator::new(lo, hi).unwrap()
    }

    fn stage(cs: &[(usize, usize)]) -> Stage {
        Stage::new(cs.iter().map(|&(a, b)| c(a, b))).unwrap()
    }

    #[test]
    fn regs_of_stages() {
        assert!(Stage::empty().regs().is_empty());
        assert_eq!(
            stage(&[(0, 1), (2, 3)]).regs(),
            [0, 1, 2, 3].into_iter().collect()
        );
    }

    #[test]
    fn comparator_validation() {
        assert_eq!(Comparator::new(3, 3), Err(Error::DegenerateComparator(3)));
        assert!(!c(4, 1).is_standard());
        assert_eq!(
            Stage::new([c(0, 1), c(1, 2)]),
            Err(Error::RegisterReused { reg: 1 })
        );
    }

    #[test]
    fn stage_execution() {
        let s = stage(&[(0, 1)]);
        assert_eq!(run_stage(&s, &[1, 0]), vec![0, 1]);
        assert_eq!(run_stage(&s, &[0, 1]), vec![0, 1]);
        // non-standard comparator routes the minimum to `lo`
        let r = Stage::new([c(1, 0)]).unwrap();
        assert_eq!(run_stage(&r, &[0, 1]), vec![1, 0]);
    }

    #[test]
    fn single_stage_delay() {
        let n = Network::new(4, vec![stage(&[(0, 1), (2, 3)])], None).unwrap();
        assert_eq!(n.fst(2), Ok(1));
        assert_eq!(n.lst(2), Ok(1));
        assert_eq!(n.delay(), 1);
    }

    #[test]
    fn unused_register() {
        let n = Network::new(4, vec![stage(&[(0, 1)])], None).unwrap();
        assert_eq!(n.fst(3), Err(Error::RegisterUnused(3)));
        assert_eq!(n.lst(2), Err(Error::RegisterUnused(2)));
    }

    #[test]
    fn network_validation() {
        assert_eq!(
            Network::new(2, vec![stage(&[(0, 2)])], None),
            Err(Error::RegisterOutOfRange {
                reg: 2,
                n_registers: 2
            })
        );
        let a = stage(&[(0, 1)]);
        let b = stage(&[(1, 2)]);
        assert!(Network::new(3, vec![a.clone(), b.clone(), a.clone()], Some(2)).is_ok());
        assert_eq!(
            Network::new(3, vec![a.clone(), b.clone(), b], Some(2)),
            Err(Error::PeriodViolated {
                period: 2,
                stage: 1
            })
        );
        assert!(matches!(
            Network::new(3, vec![a], Some(2)),
            Err(Error::InvalidPeriod { .. })
        ));
    }

    #[test]
    fn periodic_run_uses_first_period_stages() {
        let a = stage(&[(0, 1)]);
        let b = stage(&[(1, 2)]);
        let n = Network::new(3, vec![a.clone(), b.clone(), a], Some(2)).unwrap();
        assert_eq!(n.pass().len(), 2);
        assert_eq!(n.run_periodic(&[2, 1, 0], 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(
            n.run(&[1, 0]),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn union_rules() {
        let a = Network::new(4, vec![stage(&[(0, 1)])], None).unwrap();
        let b = Network::new(4, vec![stage(&[(2, 3)])], None).unwrap();
        assert_eq!(a.union(&Network::empty(4)).unwrap(), a);
        let u = a.union(&b).unwrap();
        assert_eq!(u.stages()[0], stage(&[(0, 1), (2, 3)]));

        let deep = Network::new(4, vec![stage(&[(0, 1)]), stage(&[(1, 2)])], None).unwrap();
        let u = deep.union(&b).unwrap();
        assert_eq!(u.depth(), 2);
        assert_eq!(u.stages()[1], stage(&[(1, 2)]));

        let clash = Network::new(4, vec![Stage::empty(), stage(&[(2, 3)])], None).unwrap();
        assert_eq!(
            deep.union(&clash),
            Err(Error::StageConflict { stage: 2 })
        );
        assert!(matches!(
            a.union(&Network::empty(5)),
            Err(Error::RegisterCountMismatch { .. })
        ));
    }

    #[test]
    fn compact_delay_one_merges_everything() {
        let n = Network::new(
            6,
            vec![stage(&[(0, 1)]), stage(&[(2, 3)]), stage(&[(4, 5)])],
            None,
        )
        .unwrap();
        assert_eq!(n.delay(), 1);
        let cf = n.compact_form().unwrap();
        assert_eq!(cf.network.depth(), 1);
        assert_eq!(cf.network.period(), Some(1));
        assert_eq!(cf.network.stages()[0], stage(&[(0, 1), (2, 3), (4, 5)]));
        assert_eq!(cf.origin_of(1, &c(2, 3)), Some(2));
        assert_eq!(cf.origin_of(1, &c(1, 2)), None);
    }

    #[test]
    fn delete_registers_modes() {
        let n = Network::new(4, vec![stage(&[(1, 2)]), stage(&[(0, 3)])], None).unwrap();
        assert_eq!(n.delete_registers(&BTreeSet::new(), DropMode::Strict).unwrap(), n);

        let drop: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(
            n.delete_registers(&drop, DropMode::Strict),
            Err(Error::DroppedRegisterInUse(vec![c(0, 3)]))
        );
        let pruned = n.delete_registers(&drop, DropMode::Prune).unwrap();
        assert_eq!(pruned.n_registers(), 3);
        // old register 1 becomes register 0
        assert_eq!(pruned.stages()[0], stage(&[(0, 1)]));
        assert!(pruned.stages()[1].is_empty());
    }

    #[test]
    fn lanes_agree_with_scalar_execution() {
        let n = Network::new(
            4,
            vec![stage(&[(0, 1), (2, 3)]), stage(&[(0, 2), (1, 3)]), stage(&[(1, 2)])],
            None,
        )
        .unwrap();
        let mut w = vec![0u64; 4];
        for x in 0..16u64 {
            for r in 0..4 {
                w[r] |= ((x >> r) & 1) << x;
            }
        }
        n.run_lanes(&mut w, 1);
        for x in 0..16u64 {
            let v: Vec<u8> = (0..4).map(|r| ((x >> r) & 1) as u8).collect();
            let out = n.run(&v).unwrap();
            for r in 0..4 {
                assert_eq!(out[r] as u64, (w[r] >> x) & 1);
            }
        }
    }
}
