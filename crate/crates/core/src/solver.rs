//! Exact computation of `aw(G, k)` and `aw_u(G, k)`.
//!
//! The solver answers "is there an exact rainbow-free r-coloring?" for
//! increasing `r`. Feasibility is downward closed (merging two color classes
//! never creates a rainbow progression), so the first infeasible `r` gives
//! `aw = r`. Each decision is a depth-first search over canonical colorings
//! with elements colored in ascending order and colors tried in ascending
//! order, which makes the first solution found the lexicographically
//! smallest one. Refutations branch on the most constrained element instead
//! and color every element left with a single option immediately.
//!
//! Per node the search keeps, for every uncolored element, the set of colors
//! it may still take without completing a rainbow progression, and a
//! conflict graph between uncolored elements that cannot both receive new
//! colors. A branch is cut when some element has no admissible color, or
//! when the colors used so far plus a clique cover of the "may still be new"
//! elements cannot reach `r`.

use std::marker::PhantomData;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Not};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Color, Coloring, GroupInstance, SolverOutcome};
use crate::progressions::for_each_ap;

/// Largest group order the bitmask representation supports (colors live in
/// bits 1..=127 of a `u128`).
pub const MAX_ORDER: usize = 127;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Worker threads; `1` runs single-threaded, `0` uses all cores.
    pub workers: usize,
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            workers: 1,
            timeout: None,
        }
    }
}

impl SolverConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }
}

/// Maximum palette of an exact rainbow-free coloring and its witness.
#[derive(Debug, Clone)]
pub struct PaletteResult {
    pub r_max: usize,
    /// Lexicographically smallest canonical coloring with `r_max` colors.
    pub witness: Coloring,
    pub nodes_explored: u64,
}

pub fn aw(g: GroupInstance, k: usize) -> Result<SolverOutcome> {
    aw_with(g, k, false, &SolverConfig::default())
}

pub fn aw_u(g: GroupInstance, k: usize) -> Result<SolverOutcome> {
    aw_with(g, k, true, &SolverConfig::default())
}

pub fn aw_with(
    g: GroupInstance,
    k: usize,
    unitary: bool,
    cfg: &SolverConfig,
) -> Result<SolverOutcome> {
    let started = Instant::now();
    let res = max_rainbow_free_palette(g, k, unitary, cfg)?;
    Ok(SolverOutcome {
        group: g,
        k,
        aw_value: res.r_max + 1,
        witness: res.witness,
        unitary,
        nodes_explored: res.nodes_explored,
        elapsed: started.elapsed(),
    })
}

pub fn max_rainbow_free_palette(
    g: GroupInstance,
    k: usize,
    unitary: bool,
    cfg: &SolverConfig,
) -> Result<PaletteResult> {
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    let n = g.order();
    if n > MAX_ORDER {
        return Err(Error::TooLarge(format!(
            "order {n} exceeds the solver limit of {MAX_ORDER}"
        )));
    }
    let problem = Problem::new(g, k);
    let deadline = cfg.timeout.map(|t| Instant::now() + t);
    let pool = match cfg.workers {
        1 => None,
        w => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?,
        ),
    };

    // Three-term progressions constrain so tightly that probing every value
    // pays for itself; longer ones leave too much freedom per node.
    let probing = k == 3;
    let branching = if probing {
        Branching::Narrowest
    } else {
        Branching::Lex
    };
    let cases = symmetry_cases(g, unitary);
    let mut nodes = 0u64;
    let mut run =
        |r: usize, symmetry: Symmetry, branching: Branching| -> Result<Option<Vec<Color>>> {
            let decision = Decision {
                problem: &problem,
                r,
                unitary,
                symmetry,
                branching,
                probing,
                deadline,
                pool: pool.as_ref(),
            };
            let (found, explored, timed_out) = decision.run();
            nodes += explored;
            if timed_out {
                return Err(Error::Timeout { nodes });
            }
            Ok(found)
        };

    let mut r_max = 0;
    // a hit from an unrestricted lexicographic search is the witness itself
    let mut lex_witness = None;
    let first_r = if n == 1 { 1 } else { 2 };
    'levels: for r in first_r..=n {
        for &case in &cases {
            if let Some(a) = run(r, case, branching)? {
                r_max = r;
                lex_witness = (case == Symmetry::None && branching == Branching::Lex).then_some(a);
                continue 'levels;
            }
        }
        break;
    }
    // Otherwise the decisions skipped symmetric colorings or branched out
    // of order; one plain lexicographic pass over the last feasible level
    // gives the smallest witness.
    let assignment = match lex_witness {
        Some(a) => a,
        None => run(r_max, Symmetry::None, Branching::Lex)?
            .expect("a feasible level stays feasible without symmetry breaking"),
    };
    let witness = Coloring::new(g, assignment)?;
    Ok(PaletteResult {
        r_max: witness.palette(),
        witness,
        nodes_explored: nodes,
    })
}

/// Precomputed progression structure of a group, in zero-based indices.
struct Problem {
    n: usize,
    k: usize,
    /// For each element, the other `k - 1` terms of every progression
    /// through it, flattened.
    others: Vec<Vec<u8>>,
    /// The same terms as one bitmask per progression.
    other_masks: Vec<Vec<u128>>,
}

impl Problem {
    fn new(group: GroupInstance, k: usize) -> Self {
        let n = group.order();
        let mut others = vec![Vec::new(); n];
        let mut other_masks = vec![Vec::new(); n];
        for_each_ap(group, k, |_, _, t| {
            for &x in t {
                let rest = t.iter().filter(|&&y| y != x);
                others[x].extend(rest.clone().map(|&y| y as u8));
                other_masks[x].push(rest.fold(0u128, |m, &y| m | 1 << y));
            }
            true
        });
        Problem {
            n,
            k,
            others,
            other_masks,
        }
    }
}

/// Bitmask over elements, and over colors for the per-element domains (bit
/// `c` for color `c`, bit 0 for "a color not used yet"). A group of order
/// `n` needs `n + 1` bits.
trait ElemMask:
    Copy
    + Eq
    + Send
    + Sync
    + BitAnd<Output = Self>
    + BitOr<Output = Self>
    + BitAndAssign
    + BitOrAssign
    + Not<Output = Self>
{
    const ZERO: Self;
    const FRESH: Self;
    fn bit(i: usize) -> Self;
    fn first(n: usize) -> Self;
    fn from_u128(m: u128) -> Self;
    fn count(self) -> u32;
    fn lowest(self) -> usize;
}

macro_rules! elem_mask {
    ($t:ty) => {
        impl ElemMask for $t {
            const ZERO: Self = 0;
            const FRESH: Self = 1;
            #[inline]
            fn bit(i: usize) -> Self {
                1 << i
            }
            #[inline]
            fn first(n: usize) -> Self {
                if n >= <$t>::BITS as usize {
                    <$t>::MAX
                } else {
                    (1 << n) - 1
                }
            }
            #[inline]
            fn from_u128(m: u128) -> Self {
                m as $t
            }
            #[inline]
            fn count(self) -> u32 {
                self.count_ones()
            }
            #[inline]
            fn lowest(self) -> usize {
                self.trailing_zeros() as usize
            }
        }
    };
}

elem_mask!(u32);
elem_mask!(u64);
elem_mask!(u128);

fn bits<M: ElemMask>(mut m: M) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == M::ZERO {
            None
        } else {
            let x = m.lowest();
            m &= !M::bit(x);
            Some(x)
        }
    })
}

/// Restriction placed on a decision search to skip colorings that are
/// translates (or unit multiples) of others in `Z_n`.
///
/// Every exact coloring of `Z_n` can be moved so that `0` lies in a smallest
/// color class. If that class is a singleton we are in `ZeroSingleton`;
/// otherwise, for prime `n`, a multiplication also brings a second member of
/// the class to `1` (`ZeroOneMinimal`), and for composite `n` only the
/// minimality survives (`ZeroMinimal`). The cases jointly cover every
/// coloring up to symmetry, so infeasibility under all of them is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    None,
    ZeroSingleton,
    ZeroOneMinimal,
    ZeroMinimal,
}

fn symmetry_cases(g: GroupInstance, unitary: bool) -> Vec<Symmetry> {
    let n = g.order();
    if g.is_interval() || n < 3 {
        vec![Symmetry::None]
    } else if unitary {
        vec![Symmetry::ZeroSingleton]
    } else if crate::closed_forms::is_prime(n as u64) {
        vec![Symmetry::ZeroSingleton, Symmetry::ZeroOneMinimal]
    } else {
        vec![Symmetry::ZeroSingleton, Symmetry::ZeroMinimal]
    }
}

/// Which uncolored element a node branches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branching {
    /// Smallest uncolored index; solutions come out in lexicographic order.
    Lex,
    /// Fewest admissible colors first. Faster refutations, arbitrary order.
    Narrowest,
}

struct Decision<'a> {
    problem: &'a Problem,
    r: usize,
    unitary: bool,
    symmetry: Symmetry,
    branching: Branching,
    probing: bool,
    deadline: Option<Instant>,
    pool: Option<&'a rayon::ThreadPool>,
}

impl Decision<'_> {
    /// Runs the search with a state sized for the group:
    /// `(solution, nodes, timed_out)`.
    fn run(&self) -> (Option<Vec<Color>>, u64, bool) {
        match self.problem.n {
            0..=31 => self.go::<u32, 32>(),
            32..=63 => self.go::<u64, 64>(),
            _ => self.go::<u128, 128>(),
        }
    }

    fn go<M: ElemMask, const N: usize>(&self) -> (Option<Vec<Color>>, u64, bool) {
        let search = Search::<M, N> {
            d: self,
            nodes: AtomicU64::new(0),
            timed_out: AtomicBool::new(false),
            _mask: PhantomData,
        };
        let found = match self.pool {
            None => search.run_serial(),
            Some(pool) => pool.install(|| search.run_parallel(pool.current_num_threads())),
        };
        (
            found,
            search.nodes.load(Ordering::Relaxed),
            search.timed_out.load(Ordering::Relaxed),
        )
    }
}

#[derive(Clone)]
struct State<M, const N: usize> {
    /// `0` while uncolored.
    colors: [u8; N],
    /// Indexed by `color - 1`.
    class_size: [u8; N],
    /// Admissible colors per element: bit `c` for color `c`, bit 0 for "a
    /// color not used yet".
    domain: [M; N],
    /// `conflict[x]` bit `y`: x and y cannot both take new colors.
    conflict: [M; N],
    uncolored: M,
    used: usize,
}

impl<M: ElemMask, const N: usize> State<M, N> {
    fn assignment(&self, n: usize) -> Vec<Color> {
        self.colors[..n].iter().map(|&c| c as Color).collect()
    }
}

enum Step {
    Found(Vec<Color>),
    Exhausted,
    Aborted,
}

struct Search<'a, M, const N: usize> {
    d: &'a Decision<'a>,
    nodes: AtomicU64,
    timed_out: AtomicBool,
    _mask: PhantomData<M>,
}

impl<M: ElemMask, const N: usize> Search<'_, M, N> {
    fn n(&self) -> usize {
        self.d.problem.n
    }

    fn root(&self) -> Option<State<M, N>> {
        let n = self.n();
        let mut s = State {
            colors: [0; N],
            class_size: [0; N],
            domain: [!M::ZERO; N],
            conflict: [M::ZERO; N],
            uncolored: M::first(n),
            used: 0,
        };
        match self.d.symmetry {
            Symmetry::None => {}
            Symmetry::ZeroSingleton => {
                for d in &mut s.domain[1..n] {
                    *d &= !M::bit(1);
                }
                self.place(&mut s, 0, 1)?;
            }
            Symmetry::ZeroOneMinimal => {
                self.place(&mut s, 0, 1)?;
                self.place(&mut s, 1, 1)?;
            }
            Symmetry::ZeroMinimal => self.place(&mut s, 0, 1)?,
        }
        self.settle(s)
    }

    fn run_serial(&self) -> Option<Vec<Color>> {
        let root = self.root()?;
        let mut local = 0u64;
        let res = self.dfs(&root, &mut local, &|| false);
        self.nodes.fetch_add(local, Ordering::Relaxed);
        match res {
            Step::Found(a) => Some(a),
            _ => None,
        }
    }

    fn run_parallel(&self, workers: usize) -> Option<Vec<Color>> {
        let target = 16 * workers.max(1);
        let mut frontier: Vec<State<M, N>> = self.root().into_iter().collect();
        let mut local = 0u64;
        // Level-by-level expansion keeps the frontier in search order.
        while !frontier.is_empty() && frontier.len() < target {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            let mut expanded = false;
            for s in &frontier {
                if s.uncolored == M::ZERO {
                    next.push(s.clone());
                    continue;
                }
                expanded = true;
                local += 1;
                next.extend(self.children(s));
            }
            frontier = next;
            if !expanded {
                break;
            }
        }
        self.nodes.fetch_add(local, Ordering::Relaxed);

        // Lowest frontier index holding a solution so far. Subtrees before it
        // always run to completion, so the minimum is deterministic.
        let best = AtomicUsize::new(usize::MAX);
        let results: Vec<Option<Vec<Color>>> = frontier
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                if best.load(Ordering::Relaxed) < i {
                    return None;
                }
                let mut local = 0u64;
                let cancel = || best.load(Ordering::Relaxed) < i;
                let res = self.dfs(s, &mut local, &cancel);
                self.nodes.fetch_add(local, Ordering::Relaxed);
                match res {
                    Step::Found(a) => {
                        best.fetch_min(i, Ordering::Relaxed);
                        Some(a)
                    }
                    _ => None,
                }
            })
            .collect();
        results.into_iter().flatten().next()
    }

    fn check_abort(&self, nodes: u64, cancel: &dyn Fn() -> bool) -> bool {
        // probing nodes are expensive enough to check every time
        if !self.d.probing && nodes & 0x3ff != 1 {
            return false;
        }
        if self.timed_out.load(Ordering::Relaxed) || cancel() {
            return true;
        }
        if let Some(deadline) = self.d.deadline {
            if Instant::now() >= deadline {
                self.timed_out.store(true, Ordering::Relaxed);
                return true;
            }
        }
        false
    }

    fn dfs(&self, s: &State<M, N>, nodes: &mut u64, cancel: &dyn Fn() -> bool) -> Step {
        *nodes += 1;
        if self.check_abort(*nodes, cancel) {
            return Step::Aborted;
        }
        if s.uncolored == M::ZERO {
            return Step::Found(s.assignment(self.n()));
        }
        for child in self.children(s) {
            match self.dfs(&child, nodes, cancel) {
                Step::Exhausted => {}
                other => return other,
            }
        }
        Step::Exhausted
    }

    /// Colors still open to an element: used ones, plus FRESH while the
    /// palette is short of `r`.
    fn open(&self, used: usize) -> M {
        let used_mask = M::first(used + 1) & !M::FRESH;
        if used < self.d.r {
            used_mask | M::FRESH
        } else {
            used_mask
        }
    }

    fn pick(&self, s: &State<M, N>) -> usize {
        match self.d.branching {
            Branching::Lex => s.uncolored.lowest(),
            Branching::Narrowest => {
                let open = self.open(s.used);
                bits(s.uncolored)
                    .min_by_key(|&x| (s.domain[x] & open).count())
                    .expect("node has an uncolored element")
            }
        }
    }

    /// Surviving children of `s`, in ascending color order.
    fn children(&self, s: &State<M, N>) -> Vec<State<M, N>> {
        let x = self.pick(s);
        let opts = s.domain[x] & self.open(s.used);
        let mut out = Vec::new();
        for c in 1..=s.used + 1 {
            let admissible = if c <= s.used {
                opts & M::bit(c) != M::ZERO
            } else {
                opts & M::FRESH != M::ZERO
            };
            if !admissible {
                continue;
            }
            let mut child = s.clone();
            if self.place(&mut child, x, c as u8).is_none() {
                continue;
            }
            if let Some(child) = self.settle(child) {
                out.push(child);
            }
        }
        out
    }

    /// Colors `x` with `c` and records what that implies for the remaining
    /// terms of every progression through `x`. `None` on a rainbow.
    fn place(&self, s: &mut State<M, N>, x: usize, c: u8) -> Option<()> {
        let p = self.d.problem;
        s.colors[x] = c;
        s.class_size[c as usize - 1] += 1;
        s.used = s.used.max(c as usize);
        s.uncolored &= !M::bit(x);

        let k1 = p.k - 1;
        let masks = &p.other_masks[x];
        'aps: for (i, other) in p.others[x].chunks_exact(k1).enumerate() {
            // more than two open terms: nothing follows yet
            if k1 > 2 && (M::from_u128(masks[i]) & s.uncolored).count() > 2 {
                continue;
            }
            let mut seen = M::bit(c as usize);
            let mut free = [0usize; 2];
            let mut nfree = 0;
            for &y in other {
                let cy = s.colors[y as usize];
                if cy == 0 {
                    if nfree == 2 {
                        continue 'aps;
                    }
                    free[nfree] = y as usize;
                    nfree += 1;
                } else {
                    let b = M::bit(cy as usize);
                    if seen & b != M::ZERO {
                        continue 'aps;
                    }
                    seen |= b;
                }
            }
            match nfree {
                0 => return None,
                1 => s.domain[free[0]] &= seen,
                _ => {
                    let (a, b) = (free[0], free[1]);
                    s.conflict[a] |= M::bit(b);
                    s.conflict[b] |= M::bit(a);
                }
            }
        }
        Some(())
    }

    /// Colors every element left with a single option, then applies the
    /// pruning rules. In lexicographic mode only already-used colors are
    /// forced, so new colors keep appearing in first-occurrence order.
    fn settle(&self, mut s: State<M, N>) -> Option<State<M, N>> {
        self.propagate(&mut s)?;
        if self.prune(&s) {
            return None;
        }
        if self.d.probing {
            return self.probe(s);
        }
        Some(s)
    }

    fn propagate(&self, s: &mut State<M, N>) -> Option<()> {
        loop {
            let open = self.open(s.used);
            let mut forced = None;
            for x in bits(s.uncolored) {
                let o = s.domain[x] & open;
                if o == M::ZERO {
                    return None;
                }
                if o.count() == 1 {
                    if o != M::FRESH {
                        forced = Some((x, o.lowest() as u8));
                        break;
                    }
                    if self.d.branching == Branching::Narrowest {
                        forced = Some((x, s.used as u8 + 1));
                        break;
                    }
                }
            }
            match forced {
                Some((x, c)) => self.place(s, x, c)?,
                None => return Some(()),
            }
        }
    }

    /// Failed-value probing: tentatively tries every remaining option of
    /// every uncolored element and drops those that die under propagation,
    /// until nothing changes.
    fn probe(&self, mut s: State<M, N>) -> Option<State<M, N>> {
        loop {
            let mut changed = false;
            for x in bits(s.uncolored) {
                if s.colors[x] != 0 {
                    continue;
                }
                let opts = s.domain[x] & self.open(s.used);
                for c in 1..=s.used + 1 {
                    let bit = if c <= s.used { M::bit(c) } else { M::FRESH };
                    if opts & bit == M::ZERO {
                        continue;
                    }
                    let mut t = s.clone();
                    let alive = self.place(&mut t, x, c as u8).is_some()
                        && self.propagate(&mut t).is_some()
                        && !self.prune(&t);
                    if !alive {
                        s.domain[x] &= !bit;
                        changed = true;
                    }
                }
                if s.domain[x] & self.open(s.used) == M::ZERO {
                    return None;
                }
            }
            if !changed {
                return Some(s);
            }
            self.propagate(&mut s)?;
            if self.prune(&s) {
                return None;
            }
        }
    }

    fn prune(&self, s: &State<M, N>) -> bool {
        let used = s.used;
        let needed = self.d.r - used;
        if needed > 0 {
            let mut candidates = M::ZERO;
            for x in bits(s.uncolored) {
                if s.domain[x] & M::FRESH != M::ZERO {
                    candidates |= M::bit(x);
                }
            }
            if (candidates.count() as usize) < needed {
                return true;
            }
            if clique_cover_size(candidates, &s.conflict, needed) < needed {
                return true;
            }
        }
        if self.d.unitary && needed == 0 && !s.class_size[..used].contains(&1) {
            return true;
        }
        if matches!(
            self.d.symmetry,
            Symmetry::ZeroOneMinimal | Symmetry::ZeroMinimal
        ) && !self.first_class_can_stay_smallest(s, needed)
        {
            return true;
        }
        false
    }

    /// Color 1 must end as a smallest class (and, in these cases, not a
    /// singleton). Class sizes only grow, so compare against what every
    /// other color can still reach.
    fn first_class_can_stay_smallest(&self, s: &State<M, N>, needed: usize) -> bool {
        let size1 = s.class_size[0] as usize;
        let remaining = s.uncolored.count() as usize;
        if remaining == 0 {
            return size1 >= 2 && s.class_size[1..s.used].iter().all(|&c| c as usize >= size1);
        }
        let reach = |bit: M| {
            bits(s.uncolored)
                .filter(|&x| s.domain[x] & bit != M::ZERO)
                .count()
        };
        if size1 < 2 && size1 + reach(M::bit(1)) < 2 {
            return false;
        }
        // every color still to be introduced needs size1 elements of its own
        if needed * size1 > remaining {
            return false;
        }
        for c in 2..=s.used {
            let have = s.class_size[c - 1] as usize;
            if have < size1 && have + reach(M::bit(c)) < size1 {
                return false;
            }
        }
        true
    }
}

/// Greedy partition of `nodes` into cliques of the conflict graph; stops
/// counting once `cap` cliques exist. The number of cliques bounds the
/// largest conflict-free subset from above.
fn clique_cover_size<M: ElemMask>(nodes: M, conflict: &[M], cap: usize) -> usize {
    let mut remaining = nodes;
    let mut cliques = 0;
    while remaining != M::ZERO {
        cliques += 1;
        if cliques >= cap {
            return cliques;
        }
        let v = remaining.lowest();
        remaining &= !M::bit(v);
        // candidates adjacent to everything in the clique so far
        let mut common = conflict[v] & remaining;
        while common != M::ZERO {
            let u = common.lowest();
            remaining &= !M::bit(u);
            common &= conflict[u] & !M::bit(u);
        }
    }
    cliques
}

pub fn merge_colors(c: &Coloring, i: Color, j: Color) -> Result<Coloring> {
    let r = c.palette() as Color;
    if i == j {
        return Err(Error::Precondition(
            "cannot merge a color with itself".into(),
        ));
    }
    for x in [i, j] {
        if x == 0 || x > r {
            return Err(Error::Precondition(format!("color {x} is not used")));
        }
    }
    let labels: Vec<Color> = c
        .assignment()
        .iter()
        .map(|&x| if x == j { i } else { x })
        .collect();
    Ok(Coloring::from_labels(c.group(), &labels)?.canonicalize())
}
