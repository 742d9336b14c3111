use std::collections::BTreeSet;

use proptest::prelude::*;

use permerge::builders::{build_cw, build_m, build_p, FamilyParams};
use permerge::columns::{
    hat_q, ones_per_column, q_apply, reduce, trajectory, word_from_columns, ColumnVector,
};
use permerge::oracle::{
    check_integer_merging, interleave, is_sorted, is_two_sorted, merge_oracle, parity_split,
    TwoSortedSpec,
};
use permerge::{Comparator, Stage};

fn comp(lo: usize, hi: usize) -> Comparator {
    Comparator::new(lo, hi).unwrap()
}

fn two_sorted_spec(n: usize) -> impl Strategy<Value = TwoSortedSpec> {
    (0..=n.div_ceil(2), 0..=n / 2).prop_map(move |(a, b)| TwoSortedSpec::new(n, a, b).unwrap())
}

/// `k ∈ 4..=6` with a 2-sorted input for `M_k`.
fn m_input() -> impl Strategy<Value = (u32, TwoSortedSpec)> {
    (4u32..=6).prop_flat_map(|k| (Just(k), two_sorted_spec(FamilyParams::new(k).unwrap().m_registers())))
}

fn balanced(k: u32) -> impl Strategy<Value = ColumnVector> {
    let half = k as usize - 2;
    (prop::collection::vec(-30i64..60, half), -20i64..80).prop_map(move |(left, s)| {
        let mut c = left.clone();
        c.extend(left.iter().rev().map(|x| s - x));
        ColumnVector::new(k, c).unwrap()
    })
}

/// `M_k` stage `q` (1-based) from the column description: the stage with
/// index `1` of `P_k` moves ones from the bottom of column `b` into column
/// `1` one row down, index `2j` joins column `j` to column `b-j+1` with a
/// row offset of `h_j`, and index `2j+1` joins neighbouring columns within
/// each row.
fn m_stage_from_columns(k: u32, q: usize) -> BTreeSet<Comparator> {
    let fp = FamilyParams::new(k).unwrap();
    let (n, b) = (fp.n(), fp.b());
    let reg = |row: usize, col: usize| row * b + col - 1;
    let mut out = BTreeSet::new();
    let mut idx = q;
    while idx <= 2 * k as usize - 3 {
        if idx == 1 {
            out.extend((1..n).map(|r| comp(reg(r - 1, b), reg(r, 1))));
        } else if idx % 2 == 0 {
            let j = idx / 2;
            let h = fp.h(j);
            out.extend((0..n - h).map(|r| comp(reg(r, j), reg(r + h, b - j + 1))));
        } else {
            let j = idx / 2;
            for r in 0..n {
                out.insert(comp(reg(r, j), reg(r, j + 1)));
                out.insert(comp(reg(r, b - j), reg(r, b - j + 1)));
            }
        }
        idx += 3;
    }
    out
}

#[test]
fn m_stages_match_column_description() {
    for k in 3..=9 {
        let m = build_m(k).unwrap();
        for q in 1..=3 {
            let actual: BTreeSet<Comparator> = m.stages()[q - 1].comparators().iter().copied().collect();
            assert_eq!(actual, m_stage_from_columns(k, q), "k={k} stage {q}");
        }
    }
}

#[test]
fn compact_p5_first_stage_has_three_origins() {
    let p5 = build_p(5).unwrap();
    let cf = p5.compact_form().unwrap();
    assert_eq!(cf.network.depth(), 3);
    let origins: BTreeSet<usize> = cf.origins(1).iter().map(|&(_, o)| o).collect();
    assert_eq!(origins, BTreeSet::from([1, 4, 7]));
    let expected = p5.stages()[0]
        .union(&p5.stages()[3])
        .unwrap()
        .union(&p5.stages()[6])
        .unwrap();
    assert_eq!(cf.network.stages()[0], expected);
}

#[test]
fn integer_merging_matches_oracle() {
    for k in 3..=6 {
        let m = build_m(k).unwrap();
        assert_eq!(check_integer_merging(&m, 2 * k as usize - 5, 10_000, 7).unwrap(), 0, "k={k}");
    }
    let cw = build_cw(6).unwrap();
    assert_eq!(check_integer_merging(&cw, 1, 300, 7).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn networks_permute_their_input(x in prop::collection::vec(-20i32..20, 90), passes in 0usize..4) {
        let m5 = build_m(5).unwrap();
        let mut y = m5.run_periodic(&x, passes).unwrap();
        let mut xs = x.clone();
        xs.sort_unstable();
        y.sort_unstable();
        prop_assert_eq!(xs, y);
    }

    #[test]
    fn stages_are_idempotent(x in prop::collection::vec(0u8..2, 90), q in 0usize..3) {
        let m5 = build_m(5).unwrap();
        let mut once = x.clone();
        m5.stages()[q].apply(&mut once);
        let mut twice = once.clone();
        m5.stages()[q].apply(&mut twice);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn merge_oracle_sorts_two_sorted(mut a in prop::collection::vec(0i32..50, 0..20), mut b in prop::collection::vec(0i32..50, 0..20)) {
        a.sort_unstable();
        b.sort_unstable();
        let m = merge_oracle(&a, &b).unwrap();
        let mut all = [a.clone(), b.clone()].concat();
        all.sort_unstable();
        prop_assert_eq!(m, all);
    }

    #[test]
    fn transfer_between_interleaved_sorted_sets(n in 1usize..30, m1 in 0usize..30, m2 in 0usize..30, h in 0usize..30) {
        let (m1, m2, h) = (m1.min(n), m2.min(n), h.min(n));
        // A on even registers, B on odd registers, both sorted
        let a: Vec<u8> = (0..n).map(|i| (i >= n - m1) as u8).collect();
        let b: Vec<u8> = (0..n).map(|i| (i >= n - m2) as u8).collect();
        let mut x = interleave(&a, &b);
        let stage = Stage::new((0..n - h).map(|i| comp(2 * i, 2 * (i + h) + 1))).unwrap();
        stage.apply(&mut x);
        let (ya, yb) = parity_split(&x);
        prop_assert!(is_sorted(&ya) && is_sorted(&yb));
        let ones = |v: &[u8]| v.iter().map(|&t| t as usize).sum::<usize>();
        prop_assert_eq!(ones(&ya), m1.min(m2 + h));
        prop_assert_eq!(ones(&yb), (m1 as i64 - h as i64).max(m2 as i64) as usize);
    }

    #[test]
    fn columns_stay_sorted_and_follow_q((k, spec) in m_input()) {
        let m = build_m(k).unwrap();
        let mut x = spec.vector();
        let mut c = ones_per_column(&x, k).unwrap();
        for i in 1..=3 * (2 * k as usize - 5) {
            let phase = (i - 1) % 3 + 1;
            m.stages()[phase - 1].apply(&mut x);
            c = q_apply(phase, &c);
            prop_assert_eq!(ones_per_column(&x, k).unwrap(), c.clone());
        }
    }

    #[test]
    fn network_and_trajectory_endpoints_agree((k, spec) in m_input()) {
        let m = build_m(k).unwrap();
        let x = spec.vector();
        let c = ones_per_column(&x, k).unwrap();
        let out = m.run_periodic(&x, 2 * k as usize - 5).unwrap();
        let traj = trajectory(&c, 6 * k as usize - 15);
        prop_assert_eq!(&ones_per_column(&out, k).unwrap(), traj.last().unwrap());
        prop_assert!(is_sorted(&out));
    }

    #[test]
    fn reduced_dynamics_match_column_dynamics(c in (3u32..=12).prop_flat_map(balanced), phase in 1usize..=3) {
        let (d, s) = reduce(&c).unwrap();
        let next = q_apply(phase, &c);
        prop_assert!(next.is_balanced());
        let (d2, s2) = reduce(&next).unwrap();
        prop_assert_eq!(s, s2);
        prop_assert_eq!(hat_q(c.k, phase, &d), d2);
    }

    #[test]
    fn sorted_iff_columns_sorted_and_flat(k in 3u32..=6, raw in prop::collection::vec(0i64..64, 8)) {
        let fp = FamilyParams::new(k).unwrap();
        let b = fp.b();
        let c = ColumnVector::new(k, raw[..b].iter().map(|v| v % (fp.n() as i64 + 1)).collect()).unwrap();
        let x = word_from_columns(&c).unwrap();
        prop_assert_eq!(ones_per_column(&x, k).unwrap(), c.clone());
        prop_assert_eq!(is_sorted(&x), c.is_flat());
        prop_assert_eq!(is_two_sorted(&x), c.is_two_flat());
    }
}
