mod common;

use std::collections::HashSet;

use antivdw::progressions::{aps_through, enumerate_aps, interval_ap_count};
use antivdw::solver::{aw, aw_u, aw_with, merge_colors, SolverConfig};
use antivdw::verification::{find_rainbow, for_each_rainbow_free, is_rainbow_free};
use antivdw::{Color, Coloring, GroupInstance, GroupKind};
use proptest::prelude::*;

use common::*;

fn group() -> impl Strategy<Value = GroupInstance> {
    (any::<bool>(), 1usize..=16).prop_map(|(cyc, n)| {
        if cyc {
            GroupInstance::cyclic(n).unwrap()
        } else {
            GroupInstance::interval(n).unwrap()
        }
    })
}

/// A group and labels drawn from 1..=max_label (not necessarily exact).
fn labelled(max_label: Color) -> impl Strategy<Value = (GroupInstance, Vec<Color>)> {
    group().prop_flat_map(move |g| (Just(g), prop::collection::vec(1..=max_label, g.order())))
}

fn surjective() -> impl Strategy<Value = Coloring> {
    labelled(6).prop_map(|(g, labels)| Coloring::from_labels(g, &labels).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn canonicalize_is_idempotent_and_keeps_classes(c in surjective()) {
        prop_assert_eq!(check_canonical(&c), Ok(()));
    }

    #[test]
    fn exact_assignments_accepted((g, labels) in labelled(5)) {
        let r = *labels.iter().max().unwrap();
        let used: HashSet<Color> = labels.iter().copied().collect();
        let exact = used.len() == r as usize;
        prop_assert_eq!(Coloring::new(g, labels).is_ok(), exact);
    }

    #[test]
    fn gap_in_palette_rejected((g, labels) in labelled(4), gap in 1u32..=4) {
        // shift every label ≥ gap up by one so `gap` is never used
        let r = labels.iter().max().copied().unwrap();
        prop_assume!(gap <= r);
        let shifted: Vec<Color> = labels.iter().map(|&c| if c >= gap { c + 1 } else { c }).collect();
        prop_assert!(Coloring::new(g, shifted).is_err());
    }

    #[test]
    fn label_permutation_keeps_verdict(c in surjective(), k in 3usize..=5, seed in any::<u64>()) {
        let r = c.palette();
        let mut perm: Vec<Color> = (1..=r as Color).collect();
        // Fisher–Yates driven by the seed
        let mut s = seed;
        for i in (1..r).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let relabelled: Vec<Color> = c.assignment().iter().map(|&x| perm[x as usize - 1]).collect();
        let p = Coloring::new(c.group(), relabelled).unwrap();
        prop_assert_eq!(is_rainbow_free(&c, k).unwrap(), is_rainbow_free(&p, k).unwrap());
        prop_assert_eq!(find_rainbow(&c, k).unwrap(), find_rainbow(&p, k).unwrap());
    }

    #[test]
    fn rainbow_scan_matches_enumeration(c in surjective(), k in 3usize..=6) {
        prop_assert_eq!(check_rainbow_scan(&c, k), Ok(()));
    }

    #[test]
    fn rainbow_witness_is_valid(c in surjective(), k in 3usize..=5) {
        if let Some(p) = find_rainbow(&c, k).unwrap() {
            let terms = p.as_set();
            prop_assert_eq!(terms.len(), k);
            let colors: HashSet<Color> = terms.iter().map(|&x| c.color_of(x).unwrap()).collect();
            prop_assert_eq!(colors.len(), k);
        }
    }

    #[test]
    fn merges_of_rainbow_free_colorings(
        (g, labels) in labelled(3),
        k in 3usize..=4,
    ) {
        let c = Coloring::from_labels(g, &labels).unwrap();
        prop_assume!(is_rainbow_free(&c, k).unwrap());
        prop_assert_eq!(check_merges(&c, k), Ok(()));
    }
}

#[test]
fn canonicalization_exhaustive() {
    check_canonicalization(8).unwrap();
}

#[test]
fn merge_monotonicity_exhaustive() {
    for k in [3, 4] {
        check_merge_monotonicity(8, k).unwrap();
    }
}

#[test]
fn solver_matches_naive_oracle() {
    check_solver_vs_oracle(10, &[3, 4]).unwrap();
}

#[test]
fn solver_is_deterministic_across_workers() {
    check_determinism(&determinism_instances()).unwrap();
}

fn surjections(n: usize, r: usize) -> u64 {
    // inclusion–exclusion: Σ (-1)^i C(r,i) (r-i)^n
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for i in 0..=r {
        let term = binom * ((r - i) as i128).pow(n as u32);
        total += if i % 2 == 0 { term } else { -term };
        binom = binom * (r - i) as i128 / (i + 1) as i128;
    }
    total as u64
}

#[test]
fn canonical_enumeration_counts() {
    for n in 1..=8usize {
        let g = GroupInstance::interval(n).unwrap();
        let factorial = |r: usize| (1..=r as u64).product::<u64>();
        let expected: u64 = (1..=n).map(|r| surjections(n, r) / factorial(r)).sum();
        // no (n+1)-term progression fits in [n], so nothing is pruned
        let mut seen = 0u64;
        for_each_rainbow_free(g, (n + 1).max(3), |_| {
            seen += 1;
            true
        })
        .unwrap();
        assert_eq!(seen, expected, "n={n}");

        // with 3-APs: canonical survivors × r! = all rainbow-free surjections
        let aps = naive_aps(g, 3);
        let mut by_palette = vec![0u64; n + 1];
        for_each_rainbow_free(g, 3, |c| {
            by_palette[c.palette()] += 1;
            true
        })
        .unwrap();
        for (r, &canonical) in by_palette.iter().enumerate().take(n.min(6) + 1).skip(1) {
            let mut brute = 0u64;
            let mut colors = vec![1 as Color; n];
            for code in 0..(r as u64).pow(n as u32) {
                let mut x = code;
                for slot in colors.iter_mut() {
                    *slot = (x % r as u64) as Color + 1;
                    x /= r as u64;
                }
                let used: HashSet<Color> = colors.iter().copied().collect();
                if used.len() == r && naive_rainbow_free(&colors, &aps) {
                    brute += 1;
                }
            }
            assert_eq!(canonical * factorial(r), brute, "n={n} r={r}");
        }
    }
}

#[test]
fn merge_chains_reach_every_palette() {
    for n in 1..=20 {
        for k in 3..=5 {
            let out = aw(GroupInstance::interval(n).unwrap(), k).unwrap();
            let mut c = out.witness.clone();
            assert_eq!(c.palette() + 1, out.aw_value);
            while c.palette() > 1 {
                let r = c.palette() as Color;
                c = merge_colors(&c, r - 1, r).unwrap();
                assert!(c.is_canonical());
                assert!(
                    is_rainbow_free(&c, k).unwrap(),
                    "[{n}] k={k} r={}",
                    c.palette()
                );
            }
        }
    }
}

#[test]
fn unitary_value_dominates() {
    for g in groups_up_to(18) {
        for k in [3, 4] {
            let a = aw(g, k).unwrap();
            let u = aw_u(g, k).unwrap();
            assert!(u.aw_value >= a.aw_value, "{g} k={k}");
            assert!(u.witness.is_unitary() || u.witness.palette() == 0);
        }
    }
}

#[test]
fn witnesses_verify() {
    for g in groups_up_to(22) {
        for k in 3..=5 {
            for unitary in [false, true] {
                let out = aw_with(g, k, unitary, &SolverConfig::default()).unwrap();
                let w = &out.witness;
                assert_eq!(w.group(), g);
                assert!(w.is_canonical());
                assert_eq!(w.palette() + 1, out.aw_value);
                assert!(is_rainbow_free(w, k).unwrap(), "{g} k={k}");
                if unitary {
                    assert!(w.is_unitary(), "{g} k={k}");
                }
            }
        }
    }
}

#[test]
fn progression_enumeration_invariants() {
    for n in 1..=200usize {
        let g = GroupInstance::interval(n).unwrap();
        let expected: usize = (1..=(n.saturating_sub(1)) / 2).map(|d| n - 2 * d).sum();
        assert_eq!(interval_ap_count(n, 3), expected);
        assert_eq!(enumerate_aps(g, 3).unwrap().len(), expected);
    }
    for n in 1..=30usize {
        for kind in [GroupKind::Interval, GroupKind::Cyclic] {
            let g = GroupInstance::new(kind, n).unwrap();
            for k in 3..=5 {
                let all = enumerate_aps(g, k).unwrap();
                let sets: HashSet<Vec<usize>> = all.iter().map(|p| p.as_set()).collect();
                assert_eq!(sets.len(), all.len(), "{g} k={k} has duplicates");
                let mut naive: Vec<Vec<usize>> = naive_aps(g, k)
                    .into_iter()
                    .map(|t| {
                        let mut s: Vec<usize> = t.iter().map(|&i| g.element_at(i)).collect();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                naive.sort();
                naive.dedup();
                let mut ours: Vec<Vec<usize>> = sets.into_iter().collect();
                ours.sort();
                assert_eq!(ours, naive, "{g} k={k}");
                for x in g.elements() {
                    let through = aps_through(g, k, x).unwrap();
                    let filtered: Vec<_> = all.iter().filter(|p| p.contains(x)).cloned().collect();
                    assert_eq!(through, filtered, "{g} k={k} x={x}");
                }
            }
        }
    }
}

#[test]
fn dichotomy_census_sees_every_qualifying_coloring() {
    use antivdw::verification::dichotomy_census;
    for n in 2..=11usize {
        let g = GroupInstance::interval(n).unwrap();
        let aps = naive_aps(g, 3);
        let mut expected = 0u64;
        each_partition(n, |colors, _| {
            let unique = |c: Color| colors.iter().filter(|&&x| x == c).count() == 1;
            if unique(colors[0]) && unique(colors[n - 1]) && naive_rainbow_free(colors, &aps) {
                expected += 1;
            }
        });
        let census = dichotomy_census(n).unwrap();
        assert_eq!(census.examined, expected, "N={n}");
        assert!(census.failures.is_empty());
    }
}
