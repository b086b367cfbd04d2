//! Enumeration of k-term arithmetic progressions and the element → AP
//! incidence table used by the solver.
//!
//! Progressions are sets. In `Z_n` one set can arise from several
//! `(start, difference)` pairs; only the first pair in (difference, start)
//! order is reported, and pairs whose terms collide are skipped entirely.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{GroupInstance, GroupKind, Progression};

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        Err(Error::InvalidLength(k))
    } else {
        Ok(())
    }
}

/// Number of k-APs in `[n]`: `sum_{d=1}^{(n-1)/(k-1)} (n - (k-1)d)`.
pub fn interval_ap_count(n: usize, k: usize) -> usize {
    if n < k {
        return 0;
    }
    (1..=(n - 1) / (k - 1)).map(|d| n - (k - 1) * d).sum()
}

/// Calls `visit(start_index, difference, indices)` for every k-AP of `g`
/// in enumeration order, with terms given as zero-based indices in
/// progression order. Stops early when `visit` returns `false`.
pub(crate) fn for_each_ap<F>(g: GroupInstance, k: usize, mut visit: F)
where
    F: FnMut(usize, usize, &[usize]) -> bool,
{
    let n = g.order();
    let mut terms = vec![0usize; k];
    match g.kind() {
        GroupKind::Interval => {
            if n < k {
                return;
            }
            for d in 1..=(n - 1) / (k - 1) {
                for a in 0..n - (k - 1) * d {
                    for (i, t) in terms.iter_mut().enumerate() {
                        *t = a + i * d;
                    }
                    if !visit(a, d, &terms) {
                        return;
                    }
                }
            }
        }
        GroupKind::Cyclic => {
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            let mut sorted = vec![0usize; k];
            for d in 1..=n / 2 {
                for a in 0..n {
                    for (i, t) in terms.iter_mut().enumerate() {
                        *t = (a + i * d) % n;
                    }
                    sorted.copy_from_slice(&terms);
                    sorted.sort_unstable();
                    if sorted.windows(2).any(|w| w[0] == w[1]) {
                        continue;
                    }
                    if !seen.insert(sorted.clone()) {
                        continue;
                    }
                    if !visit(a, d, &terms) {
                        return;
                    }
                }
            }
        }
    }
}

/// Every k-element AP of `g`, each set exactly once, ordered by difference
/// then start.
pub fn enumerate_aps(g: GroupInstance, k: usize) -> Result<Vec<Progression>> {
    check_k(k)?;
    let mut out = Vec::new();
    for_each_ap(g, k, |a, d, terms| {
        out.push(Progression::from_parts(
            g.element_at(a),
            d,
            terms.iter().map(|&t| g.element_at(t)).collect(),
        ));
        true
    });
    Ok(out)
}

/// The APs from [`enumerate_aps`] containing `x`.
pub fn aps_through(g: GroupInstance, k: usize, x: usize) -> Result<Vec<Progression>> {
    g.index_of(x)?;
    Ok(enumerate_aps(g, k)?
        .into_iter()
        .filter(|p| p.contains(x))
        .collect())
}

/// Precomputed incidence table: for every element, the APs through it and
/// the element's position inside each.
#[derive(Debug, Clone)]
pub struct ApIndex {
    group: GroupInstance,
    k: usize,
    aps: Vec<Progression>,
    /// Indexed by zero-based element index; `(ap id, position)`.
    incidence: Vec<Vec<(usize, usize)>>,
}

impl ApIndex {
    pub fn build(g: GroupInstance, k: usize) -> Result<Self> {
        let aps = enumerate_aps(g, k)?;
        let mut incidence = vec![Vec::new(); g.order()];
        for (id, ap) in aps.iter().enumerate() {
            for (pos, &x) in ap.elements().iter().enumerate() {
                incidence[g.index_of(x)?].push((id, pos));
            }
        }
        Ok(ApIndex {
            group: g,
            k,
            aps,
            incidence,
        })
    }

    pub fn group(&self) -> GroupInstance {
        self.group
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn aps(&self) -> &[Progression] {
        &self.aps
    }

    /// `(progression, position of x in it)` for every AP through `x`.
    pub fn entries(&self, x: usize) -> Result<Vec<(&Progression, usize)>> {
        let idx = self.group.index_of(x)?;
        Ok(self.incidence[idx]
            .iter()
            .map(|&(id, pos)| (&self.aps[id], pos))
            .collect())
    }

    pub fn through(&self, x: usize) -> Result<Vec<&Progression>> {
        Ok(self.entries(x)?.into_iter().map(|(p, _)| p).collect())
    }

    pub fn total_incidences(&self) -> usize {
        self.incidence.iter().map(Vec::len).sum()
    }
}
