//! Rainbow checks and structural predicates on colorings.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{Color, Coloring, GroupInstance, Progression, SpecialCertificate};
use crate::progressions::for_each_ap;

fn distinct_colors(c: &Coloring, terms: &[usize]) -> bool {
    for (i, &a) in terms.iter().enumerate() {
        let ca = c.color_at(a);
        if terms[i + 1..].iter().any(|&b| c.color_at(b) == ca) {
            return false;
        }
    }
    true
}

/// First rainbow k-AP in enumeration order, if any.
pub fn find_rainbow(c: &Coloring, k: usize) -> Result<Option<Progression>> {
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    let g = c.group();
    if g.is_interval() {
        return Ok(find_rainbow_interval(c.assignment(), k).map(|(a, d)| {
            Progression::from_parts(a + 1, d, (0..k).map(|i| a + 1 + i * d).collect())
        }));
    }
    let mut found = None;
    for_each_ap(g, k, |a, d, terms| {
        if distinct_colors(c, terms) {
            found = Some(Progression::from_parts(
                g.element_at(a),
                d,
                terms.iter().map(|&t| g.element_at(t)).collect(),
            ));
            false
        } else {
            true
        }
    });
    Ok(found)
}

// Same (difference, start) order as the general enumeration, without
// materializing the progressions; this is the hot loop of full scans.
fn find_rainbow_interval(col: &[Color], k: usize) -> Option<(usize, usize)> {
    let n = col.len();
    if n < k {
        return None;
    }
    for d in 1..=(n - 1) / (k - 1) {
        let span = (k - 1) * d;
        if k == 3 {
            for a in 0..n - span {
                let (x, y, z) = (col[a], col[a + d], col[a + 2 * d]);
                if x != y && y != z && x != z {
                    return Some((a, d));
                }
            }
            continue;
        }
        'starts: for a in 0..n - span {
            for i in 0..k {
                let ci = col[a + i * d];
                for j in i + 1..k {
                    if col[a + j * d] == ci {
                        continue 'starts;
                    }
                }
            }
            return Some((a, d));
        }
    }
    None
}

pub fn is_rainbow_free(c: &Coloring, k: usize) -> Result<bool> {
    Ok(find_rainbow(c, k)?.is_none())
}

/// Independent re-check of a claimed rainbow witness.
pub fn is_rainbow_progression(c: &Coloring, p: &Progression) -> bool {
    let g = c.group();
    let Ok(indices) = p
        .elements()
        .iter()
        .map(|&x| g.index_of(x))
        .collect::<Result<Vec<_>>>()
    else {
        return false;
    };
    let set: HashSet<usize> = indices.iter().copied().collect();
    if set.len() != indices.len() || indices.len() < 3 {
        return false;
    }
    // Consecutive differences must agree (mod n for cyclic groups).
    let n = g.order();
    let step = |x: usize, y: usize| {
        if g.is_interval() {
            y.checked_sub(x)
        } else {
            Some((y + n - x) % n)
        }
    };
    let d = step(indices[0], indices[1]);
    if d.is_none() || d == Some(0) {
        return false;
    }
    if indices.windows(2).any(|w| step(w[0], w[1]) != d) {
        return false;
    }
    distinct_colors(c, &indices)
}

fn require_interval(c: &Coloring) -> Result<()> {
    if c.group().is_interval() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{} is not an integer interval",
            c.group()
        )))
    }
}

/// Tests whether `c` is special: `n = 7q + 1`, the colors of `1` and `n`
/// are each used once, and two colors occupy exactly `{q+1, 2q+1, 4q+1}`
/// and `{3q+1, 5q+1, 6q+1}`. Rainbow-freeness is not part of the predicate.
pub fn is_special(c: &Coloring) -> Result<Option<SpecialCertificate>> {
    require_interval(c)?;
    let n = c.len();
    if n < 8 || !(n - 1).is_multiple_of(7) {
        return Ok(None);
    }
    let q = (n - 1) / 7;
    let sizes = c.class_sizes();
    let first = c.color_at(0);
    let last = c.color_at(n - 1);
    if sizes[first as usize - 1] != 1 || sizes[last as usize - 1] != 1 {
        return Ok(None);
    }
    let alpha_positions = [q + 1, 2 * q + 1, 4 * q + 1];
    let beta_positions = [3 * q + 1, 5 * q + 1, 6 * q + 1];
    let alpha = c.color_at(alpha_positions[0] - 1);
    let beta = c.color_at(beta_positions[0] - 1);
    if alpha == beta || c.class_of(alpha) != alpha_positions || c.class_of(beta) != beta_positions {
        return Ok(None);
    }
    Ok(Some(SpecialCertificate {
        q,
        alpha,
        beta,
        alpha_positions,
        beta_positions,
        endpoint_colors: (first, last),
    }))
}

/// Number of distinct colors on elements congruent to `residue` mod 3.
pub fn residue_color_count(c: &Coloring, residue: usize) -> Result<usize> {
    require_interval(c)?;
    if residue > 2 {
        return Err(Error::Precondition(format!(
            "residue {residue} is not in 0..3"
        )));
    }
    let colors: HashSet<Color> = (1..=c.len())
        .filter(|x| x % 3 == residue)
        .map(|x| c.color_at(x - 1))
        .collect();
    Ok(colors.len())
}

/// Which alternative of the special-or-residue dichotomy a coloring meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DichotomyBranch {
    Special,
    /// At least `r - 1` colors appear on elements `≡ 1 (mod 3)`.
    ResidueOne,
    /// At least `r - 1` colors appear on elements `≡ N (mod 3)`.
    ResidueN,
}

impl DichotomyBranch {
    pub fn label(self) -> &'static str {
        match self {
            DichotomyBranch::Special => "special",
            DichotomyBranch::ResidueOne => "residue-1",
            DichotomyBranch::ResidueN => "residue-N",
        }
    }
}

/// Checks the dichotomy for an exact rainbow-3-AP-free coloring of `[N]`
/// whose endpoints are uniquely colored.
///
/// `Err(Precondition)` means the input is outside the statement's scope;
/// `Ok(None)` means the dichotomy failed for a qualifying coloring.
pub fn dichotomy_holds(c: &Coloring) -> Result<Option<DichotomyBranch>> {
    require_interval(c)?;
    let n = c.len();
    if n < 2 {
        return Err(Error::Precondition("N must be at least 2".into()));
    }
    let sizes = c.class_sizes();
    if sizes[c.color_at(0) as usize - 1] != 1 || sizes[c.color_at(n - 1) as usize - 1] != 1 {
        return Err(Error::Precondition(
            "endpoints are not uniquely colored".into(),
        ));
    }
    if let Some(p) = find_rainbow(c, 3)? {
        return Err(Error::Precondition(format!(
            "coloring has rainbow 3-AP {p}"
        )));
    }
    if is_special(c)?.is_some() {
        return Ok(Some(DichotomyBranch::Special));
    }
    let need = c.palette() - 1;
    if residue_color_count(c, 1)? >= need {
        return Ok(Some(DichotomyBranch::ResidueOne));
    }
    if residue_color_count(c, n % 3)? >= need {
        return Ok(Some(DichotomyBranch::ResidueN));
    }
    Ok(None)
}

/// Tally from an exhaustive dichotomy run over one `N`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DichotomyCensus {
    pub n: usize,
    pub examined: u64,
    pub special: u64,
    pub residue_one: u64,
    pub residue_n: u64,
    pub failures: Vec<Coloring>,
}

/// Enumerates every canonical exact rainbow-3-AP-free coloring of `[N]`
/// with uniquely colored endpoints and checks the dichotomy on each.
pub fn dichotomy_census(n: usize) -> Result<DichotomyCensus> {
    if n < 2 {
        return Err(Error::Precondition("N must be at least 2".into()));
    }
    let group = GroupInstance::interval(n)?;
    let mut census = DichotomyCensus {
        n,
        ..Default::default()
    };
    let mut colors = vec![0 as Color; n];
    colors[0] = 1;
    let mut visit = |assignment: &[Color]| -> Result<()> {
        let c = Coloring::new(group, assignment.to_vec())?;
        census.examined += 1;
        match dichotomy_holds(&c)? {
            Some(DichotomyBranch::Special) => census.special += 1,
            Some(DichotomyBranch::ResidueOne) => census.residue_one += 1,
            Some(DichotomyBranch::ResidueN) => census.residue_n += 1,
            None => census.failures.push(c),
        }
        Ok(())
    };
    extend_unique_endpoints(&mut colors, 1, 1, &mut visit)?;
    Ok(census)
}

// Colors position `t` (0-based) given a prefix using colors 1..=max.
// Color 1 is reserved for position 0; the last position takes a fresh color.
fn extend_unique_endpoints<F>(
    colors: &mut [Color],
    t: usize,
    max: Color,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[Color]) -> Result<()>,
{
    let n = colors.len();
    if t == n {
        return visit(colors);
    }
    let candidates: Vec<Color> = if t == n - 1 {
        vec![max + 1]
    } else {
        (2..=max + 1).collect()
    };
    for color in candidates {
        colors[t] = color;
        let rainbow = (1..=t / 2).any(|d| {
            let (a, b) = (colors[t - 2 * d], colors[t - d]);
            a != b && a != color && b != color
        });
        if !rainbow {
            extend_unique_endpoints(colors, t + 1, max.max(color), visit)?;
        }
    }
    colors[t] = 0;
    Ok(())
}

/// Calls `visit` on every canonical exact rainbow-k-AP-free coloring of `g`,
/// all palette sizes, in lexicographic order; `visit` returns `false` to
/// stop. Exponential: meant for small groups.
pub fn for_each_rainbow_free<F>(g: GroupInstance, k: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&Coloring) -> bool,
{
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    let n = g.order();
    // progressions grouped by their largest index
    let mut closing: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for_each_ap(g, k, |_, _, terms| {
        let mut sorted = terms.to_vec();
        sorted.sort_unstable();
        closing[sorted[k - 1]].push(sorted);
        true
    });

    fn extend<F: FnMut(&Coloring) -> bool>(
        g: GroupInstance,
        closing: &[Vec<Vec<usize>>],
        colors: &mut Vec<Color>,
        max: Color,
        visit: &mut F,
    ) -> Result<bool> {
        let t = colors.len();
        if t == g.order() {
            return Ok(visit(&Coloring::new(g, colors.clone())?));
        }
        for color in 1..=max + 1 {
            colors.push(color);
            let rainbow = closing[t].iter().any(|ap| {
                let mut seen = HashSet::with_capacity(ap.len());
                ap.iter().all(|&x| seen.insert(colors[x]))
            });
            if !rainbow && !extend(g, closing, colors, max.max(color), visit)? {
                colors.pop();
                return Ok(false);
            }
            colors.pop();
        }
        Ok(true)
    }

    extend(g, &closing, &mut Vec::with_capacity(n), 0, &mut visit)?;
    Ok(())
}

/// True iff `members` (a subset of `[n]`) contains no k-term progression.
pub fn is_ap_free(n: usize, members: &[usize], k: usize) -> Result<bool> {
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    let mut present = vec![false; n + 1];
    for &x in members {
        if x == 0 || x > n {
            return Err(Error::ElementOutOfRange {
                element: x,
                group: format!("[{n}]"),
            });
        }
        present[x] = true;
    }
    let mut sorted: Vec<usize> = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            let d = b - a;
            let last = a + (k - 1) * d;
            if last > n {
                break;
            }
            if (2..k).all(|j| present[a + j * d]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progressions::enumerate_aps;

    fn iv(a: &[Color]) -> Coloring {
        Coloring::new(GroupInstance::interval(a.len()).unwrap(), a.to_vec()).unwrap()
    }

    const SPECIAL8: [Color; 8] = [1, 2, 2, 3, 2, 3, 3, 4];

    #[test]
    fn find_rainbow_examples() {
        let p = find_rainbow(&iv(&[1, 2, 3]), 3).unwrap().unwrap();
        assert_eq!(p.elements(), &[1, 2, 3]);
        assert!(find_rainbow(&iv(&[1, 2, 2, 1]), 3).unwrap().is_none());
        assert!(find_rainbow(&iv(&SPECIAL8), 3).unwrap().is_none());
        assert!(find_rainbow(&iv(&[1, 2, 3]), 2).is_err());

        assert!(!is_rainbow_free(&iv(&[1, 2, 3]), 3).unwrap());
        assert!(is_rainbow_free(&iv(&[1, 2, 2, 1]), 3).unwrap());
        assert!(is_rainbow_free(&iv(&SPECIAL8), 3).unwrap());
    }

    #[test]
    fn special_8_by_hand() {
        // every 3-AP of [8] checked directly
        let c = iv(&SPECIAL8);
        for ap in enumerate_aps(c.group(), 3).unwrap() {
            let cols: HashSet<_> = ap
                .elements()
                .iter()
                .map(|&x| c.color_of(x).unwrap())
                .collect();
            assert!(cols.len() < 3, "{ap}");
        }
    }

    #[test]
    fn witness_rechecks() {
        let c =
            Coloring::new(GroupInstance::cyclic(7).unwrap(), vec![1, 2, 3, 1, 1, 1, 1]).unwrap();
        let p = find_rainbow(&c, 3).unwrap().unwrap();
        assert!(is_rainbow_progression(&c, &p));
        let bogus = Progression::from_parts(0, 1, vec![0, 1, 3]);
        assert!(!is_rainbow_progression(&c, &bogus));
    }

    #[test]
    fn is_special_examples() {
        let cert = is_special(&iv(&SPECIAL8)).unwrap().unwrap();
        assert_eq!((cert.q, cert.alpha, cert.beta), (1, 2, 3));
        assert_eq!(cert.endpoint_colors, (1, 4));

        assert!(is_special(&iv(&[1, 2, 2, 3, 2, 3, 3, 4, 4]))
            .unwrap()
            .is_none());

        // [15]: alpha {3,5,9}, beta {7,11,13}, endpoints unique, filler color elsewhere
        let mut a = vec![5 as Color; 15];
        a[0] = 1;
        a[14] = 4;
        for x in [3, 5, 9] {
            a[x - 1] = 2;
        }
        for x in [7, 11, 13] {
            a[x - 1] = 3;
        }
        let cert = is_special(&iv(&a)).unwrap().unwrap();
        assert_eq!(cert.q, 2);
        assert_eq!(cert.alpha_positions, [3, 5, 9]);
        assert_eq!(cert.beta_positions, [7, 11, 13]);

        // endpoint color reused
        assert!(is_special(&iv(&[1, 2, 2, 3, 2, 3, 3, 1]))
            .unwrap()
            .is_none());
        // alpha class too large
        assert!(is_special(&iv(&[1, 2, 2, 3, 2, 2, 3, 4]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn residue_counts() {
        assert_eq!(residue_color_count(&iv(&[1, 2, 2]), 1).unwrap(), 1);
        assert_eq!(residue_color_count(&iv(&[1, 2, 3, 4]), 1).unwrap(), 2);
        // elements 2, 5, 8 carry colors 2, 2, 4
        assert_eq!(residue_color_count(&iv(&SPECIAL8), 2).unwrap(), 2);
    }

    #[test]
    fn dichotomy_examples() {
        assert_eq!(
            dichotomy_holds(&iv(&SPECIAL8)).unwrap(),
            Some(DichotomyBranch::Special)
        );
        assert!(matches!(
            dichotomy_holds(&iv(&[1, 2, 2, 2, 3])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            dichotomy_holds(&iv(&[1, 2, 2, 1])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dichotomy_small_census() {
        for n in [4, 6, 8] {
            let census = dichotomy_census(n).unwrap();
            assert!(census.examined > 0);
            assert!(census.failures.is_empty(), "N={n}");
        }
        assert_eq!(dichotomy_census(8).unwrap().special, 1);
    }

    #[test]
    fn odd_n_has_no_qualifying_colorings() {
        for n in [3, 5, 7, 9, 11, 13] {
            assert_eq!(dichotomy_census(n).unwrap().examined, 0, "N={n}");
        }
    }

    #[test]
    fn ap_free_examples() {
        assert!(is_ap_free(5, &[1, 2, 4, 5], 3).unwrap());
        assert!(!is_ap_free(3, &[1, 2, 3], 3).unwrap());
        assert!(is_ap_free(3, &[], 3).unwrap());
        assert!(!is_ap_free(9, &[1, 3, 5, 7], 4).unwrap());
        assert!(is_ap_free(9, &[1, 3, 5, 8], 4).unwrap());
        assert!(is_ap_free(3, &[4], 3).is_err());
    }
}
