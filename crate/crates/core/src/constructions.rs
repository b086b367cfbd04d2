//! Explicit colorings and progression-free sets: the recursive extremal
//! colorings of `[n]`, unfoldings into special colorings, Behrend-type
//! 3-AP-free sets and the lower-bound colorings built from them.

use std::collections::BTreeMap;

use crate::closed_forms::ceil_log3;
use crate::error::{Error, Result};
use crate::model::{ApFreeSet, Color, Coloring, GroupInstance, GroupKind, SpecialCertificate};
use crate::verification::{for_each_rainbow_free, is_rainbow_free, is_special};

fn require_extendable_base(base: &Coloring, h: usize) -> Result<()> {
    if !base.group().is_interval() || base.len() != h {
        return Err(Error::Precondition(format!(
            "base must be a coloring of [{h}], got {}",
            base.group()
        )));
    }
    if !base.is_unitary() {
        return Err(Error::Precondition("base coloring is not unitary".into()));
    }
    if !is_rainbow_free(base, 3)? {
        return Err(Error::Precondition(
            "base coloring has a rainbow 3-AP".into(),
        ));
    }
    Ok(())
}

/// Writes `n = 3h - s` with `s in {0, 1, 2}`.
fn split(n: usize) -> (usize, usize) {
    let h = n.div_ceil(3);
    (h, 3 * h - n)
}

/// Lifts a coloring of `[h]`, `h = ceil(n/3)`, to `[n]`: `x = 1 (mod 3)`
/// takes the color of `(x+2)/3`, everything else one new color.
pub fn construct_c1(n: usize, base: &Coloring) -> Result<Coloring> {
    if n < 4 {
        return Err(Error::Precondition(format!("c1 needs n >= 4, got {n}")));
    }
    let (h, _) = split(n);
    require_extendable_base(base, h)?;
    let red = base.palette() as Color + 1;
    let colors = (1..=n)
        .map(|x| {
            if x % 3 == 1 {
                base.assignment()[x.div_ceil(3) - 1]
            } else {
                red
            }
        })
        .collect();
    Coloring::new(GroupInstance::interval(n)?, colors)
}

/// Lifts a coloring of `[h-1]` to `[n] = [3h - s]`, `s in {1, 2}`: multiples
/// of 3 take the color of `x/3`, everything else one new color.
///
/// A base on all of `[h]` is accepted too and handled by the shifting rule:
/// if the color of `h` is the only singleton class, multiples of 3 read
/// `x/3 + 1` instead (dropping element 1 rather than the unique one). The
/// dropped element's color may then vanish; labels are compressed so the
/// result stays exact.
pub fn construct_c2(n: usize, base: &Coloring) -> Result<Coloring> {
    let (h, s) = split(n);
    if s == 0 {
        return Err(Error::Precondition(format!(
            "c2 needs n not divisible by 3, got {n}"
        )));
    }
    if h < 2 {
        return Err(Error::Precondition(format!("c2 needs n >= 4, got {n}")));
    }
    let shift = if base.len() == h {
        require_extendable_base(base, h)?;
        let sizes = base.class_sizes();
        let last = base.assignment()[h - 1] as usize;
        let singletons = sizes.iter().filter(|&&z| z == 1).count();
        usize::from(sizes[last - 1] == 1 && singletons == 1)
    } else {
        require_extendable_base(base, h - 1)?;
        0
    };
    let red = base.palette() as Color + 1;
    let labels: Vec<Color> = (1..=n)
        .map(|x| {
            if x % 3 == 0 {
                base.assignment()[x / 3 + shift - 1]
            } else {
                red
            }
        })
        .collect();
    Coloring::from_labels(GroupInstance::interval(n)?, &labels)
}

/// The special coloring of `[8]`; the recursion cannot reach four colors
/// there.
const EIGHT: [Color; 8] = [1, 2, 2, 3, 2, 3, 3, 4];

/// Unitary rainbow-3-AP-free coloring of `[n]` with `f(n) - 1` colors.
pub fn construct_extremal(n: usize) -> Result<Coloring> {
    let g = GroupInstance::interval(n)?;
    match n {
        0 => Err(Error::Precondition("n must be positive".into())),
        1 => Coloring::new(g, vec![1]),
        2 => Coloring::new(g, vec![1, 2]),
        3 => Coloring::new(g, vec![1, 2, 2]),
        8 => Coloring::new(g, EIGHT.to_vec()),
        _ => {
            let m = ceil_log3(n as u64);
            let gap = 3usize.pow(m) - n;
            if m >= 2 && (gap == 1 || gap == 2) {
                let h = 3usize.pow(m - 1);
                construct_c2(n, &construct_extremal(h - 1)?)
            } else {
                construct_c1(n, &construct_extremal(n.div_ceil(3))?)
            }
        }
    }
}

/// A coloring of `[7q+1]` unfolded from a coloring of `Z_2q`.
#[derive(Debug, Clone)]
pub struct SpecialUnfolding {
    pub coloring: Coloring,
    pub certificate: SpecialCertificate,
    /// Not implied by the construction; measured.
    pub rainbow_free: bool,
}

/// Places the 8-AP `1, q+1, ..., 7q+1` (unique endpoints, `alpha` on
/// `{q+1, 2q+1, 4q+1}`, `beta` on `{3q+1, 5q+1, 6q+1}`) and fills the gaps:
/// the first gap takes the filler's colors on residues `1..q`, each later
/// gap is the mirror image of the one before it. Filler colors get labels
/// of their own.
pub fn canonical_special(q: usize, filler: &Coloring) -> Result<SpecialUnfolding> {
    if q == 0 {
        return Err(Error::Precondition("q must be positive".into()));
    }
    let g = filler.group();
    if g.kind() != GroupKind::Cyclic || g.order() != 2 * q {
        return Err(Error::Precondition(format!(
            "filler must color Z_{}, got {g}",
            2 * q
        )));
    }
    if !is_rainbow_free(filler, 3)? {
        return Err(Error::Precondition("filler has a rainbow 3-AP".into()));
    }
    let n = 7 * q + 1;
    const FIRST: Color = 1;
    const ALPHA: Color = 2;
    const BETA: Color = 3;
    const LAST: Color = 4;
    let mut labels = vec![0 as Color; n];
    labels[0] = FIRST;
    labels[n - 1] = LAST;
    for x in [q + 1, 2 * q + 1, 4 * q + 1] {
        labels[x - 1] = ALPHA;
    }
    for x in [3 * q + 1, 5 * q + 1, 6 * q + 1] {
        labels[x - 1] = BETA;
    }
    for gap in 0..7 {
        let anchor = gap * q + 1;
        for i in 1..q {
            // even gaps read the filler forwards, odd gaps backwards
            let residue = if gap % 2 == 0 { i } else { q - i };
            labels[anchor + i - 1] = LAST + filler.assignment()[residue];
        }
    }
    let coloring = Coloring::from_labels(GroupInstance::interval(n)?, &labels)?.canonicalize();
    let certificate = is_special(&coloring)?
        .ok_or_else(|| Error::Integrity("unfolded coloring is not special".into()))?;
    let rainbow_free = is_rainbow_free(&coloring, 3)?;
    Ok(SpecialUnfolding {
        coloring,
        certificate,
        rainbow_free,
    })
}

/// How many rainbow-free fillers of `Z_2q` unfold to rainbow-free colorings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnfoldingCensus {
    pub q: usize,
    pub fillers: u64,
    pub rainbow_free: u64,
}

/// Unfolds every canonical rainbow-free coloring of `Z_2q`.
pub fn special_unfolding_census(q: usize) -> Result<UnfoldingCensus> {
    if q == 0 {
        return Err(Error::Precondition("q must be positive".into()));
    }
    let mut census = UnfoldingCensus {
        q,
        ..Default::default()
    };
    let mut failure = None;
    for_each_rainbow_free(
        GroupInstance::cyclic(2 * q)?,
        3,
        |filler| match canonical_special(q, filler) {
            Ok(u) => {
                census.fillers += 1;
                census.rainbow_free += u64::from(u.rainbow_free);
                true
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(census),
    }
}

/// Which member of the Behrend family produced a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BehrendParams {
    /// Digits are written in this base.
    pub base: usize,
    /// Digits range over `0..digit_bound`; `base >= 2 * digit_bound - 1`
    /// so adding two numbers never carries.
    pub digit_bound: usize,
    pub dimension: u32,
    /// Squared Euclidean norm of the digit vectors kept, or `None` when the
    /// whole digit cube is kept (only for `digit_bound = 2`, where no two
    /// distinct 0/1 vectors have a 0/1 midpoint).
    pub norm: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BehrendSet {
    pub set: ApFreeSet,
    pub params: BehrendParams,
}

const MAX_DIMENSION: u32 = 12;

/// Values `<= limit` whose digits in `base`, `dimension` of them, all lie
/// below `bound`, keyed by the squared norm of the digit vector.
fn digit_vectors(
    base: usize,
    bound: usize,
    dimension: u32,
    limit: usize,
) -> BTreeMap<usize, Vec<usize>> {
    fn go(
        base: usize,
        bound: usize,
        left: u32,
        value: usize,
        norm: usize,
        limit: usize,
        out: &mut BTreeMap<usize, Vec<usize>>,
    ) {
        if left == 0 {
            out.entry(norm).or_default().push(value);
            return;
        }
        let weight = base.pow(left - 1);
        for digit in 0..bound {
            let v = value + digit * weight;
            if v > limit {
                break;
            }
            go(base, bound, left - 1, v, norm + digit * digit, limit, out);
        }
    }
    let mut out = BTreeMap::new();
    go(base, bound, dimension, 0, 0, limit, &mut out);
    out
}

/// Largest 3-AP-free subset of `[n]` found among sphere shells of digit
/// vectors: every base `2d - 1` and `2d + 1`, dimension up to 12, keeping
/// the largest shell (first found on ties), and the full 0/1 cube.
pub fn behrend_search(n: usize) -> Result<BehrendSet> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let limit = n - 1;
    let mut best: Option<(Vec<usize>, BehrendParams)> = None;
    let mut consider = |values: &[usize], params: BehrendParams| {
        if best.as_ref().is_none_or(|(b, _)| values.len() > b.len()) {
            best = Some((values.to_vec(), params));
        }
    };
    for dimension in 1..=MAX_DIMENSION {
        for d in 2usize.. {
            // a one-digit shell is a single point; nothing past d = 2 helps
            if dimension == 1 && d > 2 {
                break;
            }
            // beyond this the digit cube dwarfs [n] and shells only thin out
            if d.checked_pow(dimension).is_none_or(|c| c > 16 * n.max(2)) && d > 2 {
                break;
            }
            for base in [2 * d - 1, 2 * d + 1] {
                // a leading digit that can never be nonzero repeats a
                // smaller dimension
                if dimension > 1 && base.checked_pow(dimension - 1).is_none_or(|w| w > limit) {
                    continue;
                }
                let shells = digit_vectors(base, d, dimension, limit);
                for (&norm, values) in &shells {
                    consider(
                        values,
                        BehrendParams {
                            base,
                            digit_bound: d,
                            dimension,
                            norm: Some(norm),
                        },
                    );
                }
                if d == 2 {
                    let mut cube: Vec<usize> = shells.into_values().flatten().collect();
                    cube.sort_unstable();
                    consider(
                        &cube,
                        BehrendParams {
                            base,
                            digit_bound: d,
                            dimension,
                            norm: None,
                        },
                    );
                }
            }
        }
    }
    let (values, params) = best.expect("dimension 1 always yields a set");
    let set = ApFreeSet::new(n, values.iter().map(|v| v + 1).collect(), 3)?;
    Ok(BehrendSet { set, params })
}

pub fn behrend_set(n: usize) -> Result<ApFreeSet> {
    Ok(behrend_search(n)?.set)
}

/// Greedy baseline: scan `1..=n`, keeping `x` unless it completes a 3-AP
/// with two kept elements.
pub fn greedy_ap_free(n: usize) -> Result<ApFreeSet> {
    let mut kept = vec![false; n + 1];
    let mut members = Vec::new();
    for x in 1..=n {
        // x would be the largest term: a, (a + x)/2, x
        let blocked = members
            .iter()
            .any(|&a: &usize| (a + x) % 2 == 0 && kept[(a + x) / 2]);
        if !blocked {
            kept[x] = true;
            members.push(x);
        }
    }
    ApFreeSet::new(n, members, 3)
}

/// Colors each member of `b` with its own color (in increasing order) and
/// every other element of `[n]` with one shared extra color. Returned only
/// when it has no rainbow k-AP, in which case it certifies
/// `aw([n], k) >= palette + 1`.
pub fn lower_bound_coloring(n: usize, b: &ApFreeSet, k: usize) -> Result<Option<Coloring>> {
    if let Some(&x) = b.members().iter().find(|&&x| x > n) {
        return Err(Error::ElementOutOfRange {
            element: x,
            group: format!("[{n}]"),
        });
    }
    let shared = b.len() as Color + 1;
    let mut colors = vec![shared; n];
    for (i, &x) in b.members().iter().enumerate() {
        colors[x - 1] = i as Color + 1;
    }
    let c = Coloring::from_labels(GroupInstance::interval(n)?, &colors)?;
    Ok(if is_rainbow_free(&c, k)? {
        Some(c)
    } else {
        None
    })
}
