//! Oracles and reusable checks shared by the property and acceptance targets.
//! Everything here is deliberately naive and independent of the library's
//! progression index.
#![allow(dead_code)]

use antivdw::progressions::enumerate_aps;
use antivdw::solver::{aw_with, merge_colors, SolverConfig};
use antivdw::verification::{
    find_rainbow, for_each_rainbow_free, is_rainbow_free, is_rainbow_progression,
};
use antivdw::{Color, Coloring, GroupInstance, GroupKind};

/// Every k-term progression of `g` as index lists, straight from the
/// definition (cyclic progressions with a repeated element are dropped).
pub fn naive_aps(g: GroupInstance, k: usize) -> Vec<Vec<usize>> {
    let n = g.order();
    let mut out = Vec::new();
    match g.kind() {
        GroupKind::Interval => {
            for d in 1..n {
                for a in 0..n {
                    if a + (k - 1) * d < n {
                        out.push((0..k).map(|i| a + i * d).collect());
                    }
                }
            }
        }
        GroupKind::Cyclic => {
            for d in 1..n {
                for a in 0..n {
                    let mut terms: Vec<usize> = (0..k).map(|i| (a + i * d) % n).collect();
                    terms.sort_unstable();
                    terms.dedup();
                    if terms.len() == k {
                        out.push(terms);
                    }
                }
            }
        }
    }
    out
}

pub fn naive_rainbow_free(colors: &[Color], aps: &[Vec<usize>]) -> bool {
    !aps.iter().any(|ap| {
        let mut seen: Vec<Color> = ap.iter().map(|&x| colors[x]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == ap.len()
    })
}

/// Calls `visit(colors, palette)` on every restricted-growth string of
/// length n, with no pruning at all.
pub fn each_partition(n: usize, mut visit: impl FnMut(&[Color], usize)) {
    fn go(colors: &mut Vec<Color>, n: usize, max: Color, visit: &mut impl FnMut(&[Color], usize)) {
        if colors.len() == n {
            visit(colors, max as usize);
            return;
        }
        for c in 1..=max + 1 {
            colors.push(c);
            go(colors, n, max.max(c), visit);
            colors.pop();
        }
    }
    go(&mut Vec::with_capacity(n), n, 0, &mut visit);
}

/// `(aw, aw_u)` by exhausting every exact coloring.
pub fn naive_aw(g: GroupInstance, k: usize) -> (usize, usize) {
    let aps = naive_aps(g, k);
    let (mut best, mut best_u) = (0, 0);
    each_partition(g.order(), |colors, r| {
        if r <= best_u && r <= best {
            return;
        }
        if naive_rainbow_free(colors, &aps) {
            best = best.max(r);
            let mut sizes = vec![0usize; r + 1];
            for &c in colors {
                sizes[c as usize] += 1;
            }
            if sizes.contains(&1) {
                best_u = best_u.max(r);
            }
        }
    });
    (best + 1, best_u + 1)
}

pub fn groups_up_to(n_max: usize) -> Vec<GroupInstance> {
    (1..=n_max)
        .flat_map(|n| {
            [
                GroupInstance::interval(n).unwrap(),
                GroupInstance::cyclic(n).unwrap(),
            ]
        })
        .collect()
}

/// Solver against [`naive_aw`] for every group of order ≤ `n_max`.
pub fn check_solver_vs_oracle(n_max: usize, ks: &[usize]) -> Result<usize, String> {
    let cfg = SolverConfig::default();
    let mut cases = 0;
    for g in groups_up_to(n_max) {
        for &k in ks {
            let (want, want_u) = naive_aw(g, k);
            let got = aw_with(g, k, false, &cfg)
                .map_err(|e| e.to_string())?
                .aw_value;
            let got_u = aw_with(g, k, true, &cfg)
                .map_err(|e| e.to_string())?
                .aw_value;
            if (got, got_u) != (want, want_u) {
                return Err(format!(
                    "{g} k={k}: solver ({got}, {got_u}) vs oracle ({want}, {want_u})"
                ));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

pub fn check_canonical(c: &Coloring) -> Result<(), String> {
    let once = c.canonicalize();
    if once.canonicalize() != once || !once.is_canonical() {
        return Err(format!(
            "canonicalize not idempotent on {:?}",
            c.assignment()
        ));
    }
    let parts = |x: &Coloring| {
        let mut v: Vec<Vec<usize>> = x.color_classes().into_values().collect();
        v.sort();
        v
    };
    if parts(&once) != parts(c) {
        return Err(format!(
            "canonicalize changed the partition of {:?}",
            c.assignment()
        ));
    }
    Ok(())
}

/// Canonicalization over every coloring of every group of order ≤ `n_max`
/// with labels drawn from 1..=3 (non-canonical ones included).
pub fn check_canonicalization(n_max: usize) -> Result<usize, String> {
    let mut count = 0;
    for g in groups_up_to(n_max) {
        let n = g.order();
        for code in 0..3usize.pow(n as u32) {
            let labels: Vec<Color> = (0..n)
                .map(|i| (code / 3usize.pow(i as u32) % 3) as Color + 1)
                .collect();
            let c = Coloring::from_labels(g, &labels).map_err(|e| e.to_string())?;
            check_canonical(&c)?;
            count += 1;
        }
    }
    Ok(count)
}

/// Every pairwise merge of a rainbow-free coloring stays rainbow-free.
pub fn check_merges(c: &Coloring, k: usize) -> Result<(), String> {
    let r = c.palette() as Color;
    for i in 1..=r {
        for j in i + 1..=r {
            let m = merge_colors(c, i, j).map_err(|e| e.to_string())?;
            if m.palette() + 1 != c.palette() {
                return Err(format!(
                    "merge {i},{j} of {:?} lost more than one color",
                    c.assignment()
                ));
            }
            if !is_rainbow_free(&m, k).map_err(|e| e.to_string())? {
                return Err(format!(
                    "merging {i},{j} of {:?} created a rainbow",
                    c.assignment()
                ));
            }
        }
    }
    Ok(())
}

/// Exhaustive merge monotonicity over all rainbow-free colorings of small
/// groups.
pub fn check_merge_monotonicity(n_max: usize, k: usize) -> Result<usize, String> {
    let mut count = 0;
    for g in groups_up_to(n_max) {
        let mut failure = None;
        for_each_rainbow_free(g, k, |c| {
            count += 1;
            match check_merges(c, k) {
                Ok(()) => true,
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        })
        .map_err(|e| e.to_string())?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(count)
}

/// Same aw and witness for 1, 2 and 4 workers.
pub fn check_determinism(instances: &[(GroupInstance, usize, bool)]) -> Result<usize, String> {
    for &(g, k, unitary) in instances {
        let runs: Vec<_> = [1, 2, 4]
            .iter()
            .map(|&w| aw_with(g, k, unitary, &SolverConfig::default().with_workers(w)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for r in &runs[1..] {
            if r.aw_value != runs[0].aw_value || r.witness != runs[0].witness {
                return Err(format!(
                    "{g} k={k} unitary={unitary}: worker counts disagree"
                ));
            }
        }
    }
    Ok(instances.len())
}

pub fn determinism_instances() -> Vec<(GroupInstance, usize, bool)> {
    let mut v = Vec::new();
    for n in [7, 12, 16, 20, 26] {
        v.push((GroupInstance::interval(n).unwrap(), 3, false));
        v.push((GroupInstance::interval(n).unwrap(), 3, true));
        v.push((GroupInstance::cyclic(n).unwrap(), 3, false));
    }
    for (n, k) in [(12, 4), (14, 5), (15, 6)] {
        v.push((GroupInstance::interval(n).unwrap(), k, false));
    }
    v
}

/// Library rainbow search agrees with a scan of the enumerated progressions.
pub fn check_rainbow_scan(c: &Coloring, k: usize) -> Result<(), String> {
    let fast = find_rainbow(c, k).map_err(|e| e.to_string())?;
    let slow = enumerate_aps(c.group(), k)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|p| is_rainbow_progression(c, p));
    if fast != slow {
        return Err(format!("{:?} k={k}: {fast:?} vs {slow:?}", c.assignment()));
    }
    let naive = naive_rainbow_free(c.assignment(), &naive_aps(c.group(), k));
    if naive != fast.is_none() {
        return Err(format!("{:?} k={k}: naive scan disagrees", c.assignment()));
    }
    Ok(())
}
