//! Closed-form values: `f(n) = aw([n], 3)`, `aw(Z_n, 3)` from the prime
//! decomposition of `n`, and the `ceil(log3 n) + 2` bound.
//!
//! All arithmetic is exact integer arithmetic; powers of three are compared
//! in `u128` so no window bound ever overflows for `u64` inputs.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::model::{Factorization, GroupInstance};
use crate::solver::{self, SolverConfig};

/// Default bound on primes that [`classify_prime`] will classify.
pub const DEFAULT_PRIME_LIMIT: u64 = 100;

/// Odd primes whose classification is fixed without computation.
const KNOWN_THREE_UP_TO: u64 = 13;

fn pow3(e: u32) -> u128 {
    3u128.pow(e)
}

/// `Some(m)` when `n = 3^m`.
pub fn log3_exact(n: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut m = 0;
    let mut x = n;
    while x.is_multiple_of(3) {
        x /= 3;
        m += 1;
    }
    (x == 1).then_some(m)
}

/// Smallest `j` with `3^j >= n` (for `n >= 1`).
pub fn ceil_log3(n: u64) -> u32 {
    let mut j = 0;
    while pow3(j) < n as u128 {
        j += 1;
    }
    j
}

/// The window index `m` with `7·3^(m-2) + 1 <= n <= 21·3^(m-2)`.
///
/// The windows tile every `n >= 2` except `n = 3`, which falls between the
/// real-valued `m = 0` and `m = 1` windows; as `3 = 3^1` it gets `m = 1`.
pub fn m_of(n: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "m is defined for n >= 2, got {n}"
        )));
    }
    if n == 3 {
        return Ok(1);
    }
    // Scale by 9 so the m = 0, 1 windows stay in integers:
    // 7·3^m + 9 <= 9n <= 21·3^m.
    let scaled = 9 * n as u128;
    let mut m = 0;
    loop {
        let p = pow3(m);
        if 7 * p + 9 <= scaled && scaled <= 21 * p {
            return Ok(m);
        }
        if 7 * p + 9 > scaled {
            unreachable!("windows cover every n >= 2 except 3");
        }
        m += 1;
    }
}

/// `f(n)`: `m + 2` when `n = 3^m`, `m + 3` otherwise. `f(1) = 2` since `[1]`
/// has no 3-AP.
pub fn f(n: u64) -> Result<u32> {
    match n {
        0 => Err(Error::Precondition("f is defined for n >= 1".into())),
        1 => Ok(2),
        _ => {
            let m = m_of(n)?;
            Ok(if log3_exact(n).is_some() {
                m + 2
            } else {
                m + 3
            })
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial division into `2^e0` and ascending odd prime powers.
pub fn factor(n: u64) -> Result<(u32, Vec<(u64, u32)>)> {
    if n == 0 {
        return Err(Error::Precondition("cannot factor 0".into()));
    }
    let mut x = n;
    let e0 = x.trailing_zeros();
    x >>= e0;
    let mut odd = Vec::new();
    let mut p = 3;
    while p * p <= x {
        if x.is_multiple_of(p) {
            let mut e = 0;
            while x.is_multiple_of(p) {
                x /= p;
                e += 1;
            }
            odd.push((p, e));
        }
        p += 2;
    }
    if x > 1 {
        odd.push((x, 1));
    }
    Ok((e0, odd))
}

/// Source of `aw(Z_p, 3)` values for odd primes.
pub trait PrimeClassifier {
    fn classify(&self, p: u64) -> Result<u8>;
}

/// Classifies odd primes with the exact solver, memoizing results.
#[derive(Debug)]
pub struct SolverClassifier {
    limit: u64,
    cache: Mutex<BTreeMap<u64, u8>>,
    config: SolverConfig,
}

impl SolverClassifier {
    pub fn new(limit: u64) -> Self {
        SolverClassifier {
            limit,
            cache: Mutex::new(BTreeMap::new()),
            config: SolverConfig::default(),
        }
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Seeds the cache (e.g. from a persistent store).
    pub fn insert(&self, p: u64, value: u8) {
        self.cache.lock().unwrap().insert(p, value);
    }

    pub fn cached(&self) -> BTreeMap<u64, u8> {
        self.cache.lock().unwrap().clone()
    }
}

impl Default for SolverClassifier {
    fn default() -> Self {
        Self::new(DEFAULT_PRIME_LIMIT)
    }
}

impl PrimeClassifier for SolverClassifier {
    fn classify(&self, p: u64) -> Result<u8> {
        classify_prime_with(p, self.limit, |p| {
            if let Some(&v) = self.cache.lock().unwrap().get(&p) {
                return Ok(v);
            }
            let g = GroupInstance::cyclic(p as usize)?;
            let v = solver::aw_with(g, 3, false, &self.config)?.aw_value as u8;
            self.cache.lock().unwrap().insert(p, v);
            Ok(v)
        })
    }
}

/// `aw(Z_p, 3)` for an odd prime `p <= limit`.
pub fn classify_prime(p: u64, limit: u64) -> Result<u8> {
    SolverClassifier::new(limit).classify(p)
}

pub(crate) fn classify_prime_with<F>(p: u64, limit: u64, compute: F) -> Result<u8>
where
    F: FnOnce(u64) -> Result<u8>,
{
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    if p > limit {
        return Err(Error::Unclassified { p, limit });
    }
    if p <= KNOWN_THREE_UP_TO {
        return Ok(3);
    }
    let v = compute(p)?;
    if !(3..=4).contains(&v) {
        return Err(Error::Integrity(format!(
            "aw(Z_{p}, 3) computed as {v}, outside 3..=4"
        )));
    }
    Ok(v)
}

/// Factorization of `n` with each odd prime classified.
pub fn factorize(n: u64, classifier: &dyn PrimeClassifier) -> Result<Factorization> {
    let (exponent_of_2, odd_factors) = factor(n)?;
    let classification = odd_factors
        .iter()
        .map(|&(p, _)| classifier.classify(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Factorization {
        n,
        exponent_of_2,
        odd_factors,
        classification,
    })
}

/// `aw(Z_n, 3)` from the prime decomposition:
/// `2 + sum e_j [class 3] + sum 2 e_j [class 4]`, plus one more when `n` is even.
pub fn aw_zn3_from(fact: &Factorization) -> u32 {
    let base = if fact.exponent_of_2 == 0 { 2 } else { 3 };
    base + fact
        .odd_factors
        .iter()
        .zip(&fact.classification)
        .map(|(&(_, e), &class)| if class == 4 { 2 * e } else { e })
        .sum::<u32>()
}

pub fn aw_zn3(n: u64, classifier: &dyn PrimeClassifier) -> Result<u32> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "aw(Z_n,3) formula needs n >= 2, got {n}"
        )));
    }
    Ok(aw_zn3_from(&factorize(n, classifier)?))
}

/// `ceil(log3 n) + 2` and whether `n` is `3^j` or `2·3^j` with `j >= 1`.
pub fn log3_bound(n: u64) -> Result<(u32, bool)> {
    if n < 3 {
        return Err(Error::Precondition(format!("bound needs n >= 3, got {n}")));
    }
    let tight = matches!(log3_exact(n), Some(j) if j >= 1)
        || (n.is_multiple_of(2) && matches!(log3_exact(n / 2), Some(j) if j >= 1));
    Ok((ceil_log3(n) + 2, tight))
}
