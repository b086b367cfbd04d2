//! Shared domain types: groups, colorings, progressions and the records
//! produced by the solver and the structural predicates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Color identifier. Colors of an exact r-coloring are exactly `1..=r`.
pub type Color = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// The integer interval `[n] = {1, ..., n}`.
    Interval,
    /// The cyclic group `Z_n = {0, ..., n-1}`.
    Cyclic,
}

impl GroupKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::Interval => "interval",
            GroupKind::Cyclic => "cyclic",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(GroupKind::Interval),
            "cyclic" => Ok(GroupKind::Cyclic),
            other => Err(Error::InvalidGroup(format!("unknown group kind `{other}`"))),
        }
    }
}

/// An ambient structure: either `[n]` or `Z_n`.
///
/// Internally every element is addressed by its zero-based index; the
/// interval maps element `x` to index `x - 1`, the cyclic group maps residue
/// `x` to index `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupInstance {
    kind: GroupKind,
    order: usize,
}

impl GroupInstance {
    pub fn new(kind: GroupKind, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGroup("order must be at least 1".into()));
        }
        Ok(GroupInstance { kind, order })
    }

    pub fn interval(n: usize) -> Result<Self> {
        Self::new(GroupKind::Interval, n)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(GroupKind::Cyclic, n)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_interval(&self) -> bool {
        self.kind == GroupKind::Interval
    }

    /// Smallest element label (1 for intervals, 0 for cyclic groups).
    pub fn first_element(&self) -> usize {
        match self.kind {
            GroupKind::Interval => 1,
            GroupKind::Cyclic => 0,
        }
    }

    pub fn contains(&self, element: usize) -> bool {
        let lo = self.first_element();
        element >= lo && element < lo + self.order
    }

    pub fn index_of(&self, element: usize) -> Result<usize> {
        if self.contains(element) {
            Ok(element - self.first_element())
        } else {
            Err(Error::ElementOutOfRange {
                element,
                group: self.to_string(),
            })
        }
    }

    pub fn element_at(&self, index: usize) -> usize {
        debug_assert!(index < self.order);
        index + self.first_element()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        let lo = self.first_element();
        lo..lo + self.order
    }
}

impl fmt::Display for GroupInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Interval => write!(f, "[{}]", self.order),
            GroupKind::Cyclic => write!(f, "Z_{}", self.order),
        }
    }
}

/// An exact coloring: every color in `1..=palette` is used, nothing else is.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    group: GroupInstance,
    assignment: Vec<Color>,
    palette: usize,
}

impl Coloring {
    /// Builds a coloring, rejecting assignments that are not exact.
    pub fn new(group: GroupInstance, assignment: Vec<Color>) -> Result<Self> {
        if assignment.len() != group.order() {
            return Err(Error::LengthMismatch {
                expected: group.order(),
                got: assignment.len(),
            });
        }
        let palette = assignment.iter().copied().max().unwrap_or(0) as usize;
        if assignment.contains(&0) {
            return Err(Error::NotExact("color id 0 is not allowed".into()));
        }
        let mut seen = vec![false; palette + 1];
        for &c in &assignment {
            seen[c as usize] = true;
        }
        if let Some(missing) = (1..=palette).find(|&c| !seen[c]) {
            return Err(Error::NotExact(format!(
                "color {missing} is unused but {palette} is used"
            )));
        }
        Ok(Coloring {
            group,
            assignment,
            palette,
        })
    }

    /// Builds a coloring from arbitrary positive labels by compressing them
    /// to `1..=r` while preserving their relative order.
    pub fn from_labels(group: GroupInstance, labels: &[Color]) -> Result<Self> {
        let mut distinct: Vec<Color> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment = labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap() as Color + 1)
            .collect();
        Coloring::new(group, assignment)
    }

    pub fn group(&self) -> GroupInstance {
        self.group
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Colors in element order.
    pub fn assignment(&self) -> &[Color] {
        &self.assignment
    }

    /// Color of a group element (by label, not index).
    pub fn color_of(&self, element: usize) -> Result<Color> {
        Ok(self.assignment[self.group.index_of(element)?])
    }

    pub(crate) fn color_at(&self, index: usize) -> Color {
        self.assignment[index]
    }

    /// Sizes of the color classes, indexed by `color - 1`.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.palette];
        for &c in &self.assignment {
            sizes[c as usize - 1] += 1;
        }
        sizes
    }

    /// True when some color is used on exactly one element.
    pub fn is_unitary(&self) -> bool {
        self.class_sizes().contains(&1)
    }

    /// Relabels colors so that first occurrences appear in increasing order.
    pub fn canonicalize(&self) -> Coloring {
        let mut relabel = vec![0 as Color; self.palette + 1];
        let mut next = 0;
        let assignment = self
            .assignment
            .iter()
            .map(|&c| {
                let slot = &mut relabel[c as usize];
                if *slot == 0 {
                    next += 1;
                    *slot = next;
                }
                *slot
            })
            .collect();
        Coloring {
            group: self.group,
            assignment,
            palette: self.palette,
        }
    }

    pub fn is_canonical(&self) -> bool {
        let mut max = 0;
        for &c in &self.assignment {
            if c > max + 1 {
                return false;
            }
            max = max.max(c);
        }
        true
    }

    /// Map from color to the sorted list of elements carrying it.
    pub fn color_classes(&self) -> BTreeMap<Color, Vec<usize>> {
        let mut classes: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
        for (i, &c) in self.assignment.iter().enumerate() {
            classes.entry(c).or_default().push(self.group.element_at(i));
        }
        classes
    }

    /// Elements of one color class, sorted.
    pub fn class_of(&self, color: Color) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == color)
            .map(|(i, _)| self.group.element_at(i))
            .collect()
    }

    /// Renders the two-line text format.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.assignment.iter().map(|c| c.to_string()).collect();
        format!(
            "group={} n={}\n{}\n",
            self.group.kind(),
            self.group.order(),
            body.join(" ")
        )
    }

    /// Parses the two-line text format:
    ///
    /// ```text
    /// group=interval n=4
    /// 1 2 2 1
    /// ```
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let group = parse_header(header).map_err(|message| Error::Parse {
            line: hline + 1,
            message,
        })?;
        let (bline, body) = lines.next().ok_or(Error::Parse {
            line: hline + 2,
            message: "missing color line".into(),
        })?;
        if let Some((extra, _)) = lines.next() {
            return Err(Error::Parse {
                line: extra + 1,
                message: "unexpected trailing content".into(),
            });
        }
        let assignment = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Color>().map_err(|_| Error::Parse {
                    line: bline + 1,
                    message: format!("`{tok}` is not a color id"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Coloring::new(group, assignment)
    }
}

fn parse_header(header: &str) -> std::result::Result<GroupInstance, String> {
    let mut kind = None;
    let mut order = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("group", v)) => kind = Some(v.parse::<GroupKind>().map_err(|e| e.to_string())?),
            Some(("n", v)) => {
                order = Some(
                    v.parse::<usize>()
                        .map_err(|_| format!("`{v}` is not a valid order"))?,
                )
            }
            _ => return Err(format!("unrecognized header field `{field}`")),
        }
    }
    let kind = kind.ok_or("header lacks `group=`")?;
    let order = order.ok_or("header lacks `n=`")?;
    GroupInstance::new(kind, order).map_err(|e| e.to_string())
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.assignment.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A k-term arithmetic progression, stored in progression order
/// `start, start + d, ..., start + (k-1)d` (reduced mod n for `Z_n`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Progression {
    start: usize,
    difference: usize,
    elements: Vec<usize>,
}

impl Progression {
    /// Builds a progression and checks it lies in `group` with distinct terms.
    pub fn new(group: GroupInstance, start: usize, difference: usize, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidLength(k));
        }
        group.index_of(start)?;
        if difference == 0 {
            return Err(Error::Precondition("difference must be positive".into()));
        }
        let n = group.order();
        let elements: Vec<usize> = match group.kind() {
            GroupKind::Interval => {
                let last = start + (k - 1) * difference;
                if last > n {
                    return Err(Error::ElementOutOfRange {
                        element: last,
                        group: group.to_string(),
                    });
                }
                (0..k).map(|i| start + i * difference).collect()
            }
            GroupKind::Cyclic => {
                if difference >= n {
                    return Err(Error::Precondition(format!(
                        "difference {difference} must be below {n}"
                    )));
                }
                (0..k).map(|i| (start + i * difference) % n).collect()
            }
        };
        let mut sorted = elements.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::Precondition(format!(
                "progression ({start}, {difference}) repeats an element"
            )));
        }
        Ok(Progression {
            start,
            difference,
            elements,
        })
    }

    pub(crate) fn from_parts(start: usize, difference: usize, elements: Vec<usize>) -> Self {
        Progression {
            start,
            difference,
            elements,
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn difference(&self) -> usize {
        self.difference
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn contains(&self, element: usize) -> bool {
        self.elements.contains(&element)
    }

    /// The progression as a sorted set.
    pub fn as_set(&self) -> Vec<usize> {
        let mut s = self.elements.clone();
        s.sort_unstable();
        s
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Result of an exact solver run.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub group: GroupInstance,
    pub k: usize,
    pub aw_value: usize,
    /// A coloring with `aw_value - 1` colors and no rainbow k-AP.
    pub witness: Coloring,
    pub unitary: bool,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

/// Witness that a coloring of `[7q+1]` is special.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialCertificate {
    pub q: usize,
    pub alpha: Color,
    pub beta: Color,
    pub alpha_positions: [usize; 3],
    pub beta_positions: [usize; 3],
    /// Colors of `1` and `n`.
    pub endpoint_colors: (Color, Color),
}

/// Prime decomposition `n = 2^e0 * prod p_i^e_i`, with each odd prime
/// tagged by `aw(Z_p, 3)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub exponent_of_2: u32,
    /// `(p, e)` pairs with `p` odd prime, ascending.
    pub odd_factors: Vec<(u64, u32)>,
    /// `aw(Z_p, 3)` for each entry of `odd_factors`, in the same order.
    pub classification: Vec<u8>,
}

/// A subset of `[n]` containing no k-term progression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApFreeSet {
    ambient_n: usize,
    members: Vec<usize>,
    forbidden_length: usize,
}

impl ApFreeSet {
    /// Validates membership and AP-freeness.
    pub fn new(ambient_n: usize, mut members: Vec<usize>, forbidden_length: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&x| x == 0 || x > ambient_n) {
            return Err(Error::ElementOutOfRange {
                element: bad,
                group: format!("[{ambient_n}]"),
            });
        }
        if !crate::verification::is_ap_free(ambient_n, &members, forbidden_length)? {
            return Err(Error::Precondition(format!(
                "set contains a {forbidden_length}-term progression"
            )));
        }
        Ok(ApFreeSet {
            ambient_n,
            members,
            forbidden_length,
        })
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn forbidden_length(&self) -> usize {
        self.forbidden_length
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
