//! Append-only JSON-lines cache of solved instances.
//!
//! One record per line, keyed by `(kind, n, k, unitary)`. Records are
//! re-verified when written and when read back; a line that fails to parse
//! or verify is reported with its line number and skipped, the rest of the
//! file stays usable. Prime classifications are ordinary records with
//! `kind = cyclic, k = 3, unitary = false`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::closed_forms::{classify_prime_with, PrimeClassifier};
use crate::error::{Error, Result};
use crate::model::{Coloring, GroupInstance, GroupKind, SolverOutcome};
use crate::solver::{aw_with, SolverConfig};
use crate::verification::is_rainbow_free;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_ENV: &str = "AW_CACHE";
pub const DEFAULT_CACHE: &str = "aw-cache.jsonl";

/// `--cache` flag, else `$AW_CACHE`, else `./aw-cache.jsonl`.
pub fn cache_path(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordKey {
    pub kind: GroupKind,
    pub n: usize,
    pub k: usize,
    pub unitary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: u32,
    pub kind: GroupKind,
    pub n: usize,
    pub k: usize,
    pub unitary: bool,
    pub aw_value: usize,
    /// Coloring text format.
    pub witness: String,
    pub stats: SolverStats,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl ResultRecord {
    pub fn from_outcome(out: &SolverOutcome) -> Self {
        ResultRecord {
            schema: SCHEMA_VERSION,
            kind: out.group.kind(),
            n: out.group.order(),
            k: out.k,
            unitary: out.unitary,
            aw_value: out.aw_value,
            witness: out.witness.to_text(),
            stats: SolverStats {
                nodes_explored: out.nodes_explored,
                elapsed_ms: out.elapsed.as_millis() as u64,
            },
            version: TOOLKIT_VERSION.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn key(&self) -> RecordKey {
        RecordKey {
            kind: self.kind,
            n: self.n,
            k: self.k,
            unitary: self.unitary,
        }
    }

    pub fn group(&self) -> Result<GroupInstance> {
        GroupInstance::new(self.kind, self.n)
    }

    pub fn witness_coloring(&self) -> Result<Coloring> {
        Coloring::from_text(&self.witness)
    }

    /// The witness colors the right group with `aw_value - 1` colors, has
    /// no rainbow k-AP, and is unitary when the record says so.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Integrity(msg));
        if self.schema != SCHEMA_VERSION {
            return fail(format!("unsupported schema version {}", self.schema));
        }
        let w = self.witness_coloring()?;
        if w.group() != self.group()? {
            return fail(format!(
                "witness colors {} but the key is {}",
                w.group(),
                self.group()?
            ));
        }
        if w.palette() + 1 != self.aw_value {
            return fail(format!(
                "witness has {} colors but aw = {}",
                w.palette(),
                self.aw_value
            ));
        }
        if !is_rainbow_free(&w, self.k)? {
            return fail("witness contains a rainbow progression".into());
        }
        if self.unitary && !w.is_unitary() {
            return fail("witness of a unitary record is not unitary".into());
        }
        Ok(())
    }
}

/// A file-backed store; the whole file is indexed on open.
#[derive(Debug)]
pub struct ResultStore {
    path: PathBuf,
    records: BTreeMap<RecordKey, ResultRecord>,
    problems: Vec<Error>,
}

impl ResultStore {
    /// Opens (or starts) the store at `path`. Unreadable lines are collected
    /// in [`ResultStore::problems`] rather than failing the open.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut store = ResultStore {
            path,
            records: BTreeMap::new(),
            problems: Vec::new(),
        };
        let file = match File::open(&store.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(store),
            Err(e) => return Err(e.into()),
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if let Err(message) = store.load_line(&line) {
                store.problems.push(Error::CorruptRecord {
                    path: store.path.clone(),
                    line: i + 1,
                    message,
                });
            }
        }
        Ok(store)
    }

    fn load_line(&mut self, line: &str) -> std::result::Result<(), String> {
        let rec: ResultRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        rec.verify().map_err(|e| e.to_string())?;
        match self.records.get(&rec.key()) {
            Some(old) if old.aw_value != rec.aw_value => Err(format!(
                "conflicts with an earlier record (aw {} vs {})",
                old.aw_value, rec.aw_value
            )),
            Some(_) => Ok(()),
            None => {
                self.records.insert(rec.key(), rec);
                Ok(())
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Lines skipped while opening, as [`Error::CorruptRecord`]s.
    pub fn problems(&self) -> &[Error] {
        &self.problems
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &ResultRecord> {
        self.records.values()
    }

    pub fn get(&self, kind: GroupKind, n: usize, k: usize, unitary: bool) -> Option<&ResultRecord> {
        self.records.get(&RecordKey {
            kind,
            n,
            k,
            unitary,
        })
    }

    /// Like [`ResultStore::get`], re-verifying the witness first.
    pub fn get_verified(
        &self,
        kind: GroupKind,
        n: usize,
        k: usize,
        unitary: bool,
    ) -> Result<Option<&ResultRecord>> {
        match self.get(kind, n, k, unitary) {
            Some(rec) => {
                rec.verify()?;
                Ok(Some(rec))
            }
            None => Ok(None),
        }
    }

    /// Verifies and appends `rec`. Storing an equal value again is a no-op;
    /// a different value under the same key is an integrity error.
    pub fn put(&mut self, rec: ResultRecord) -> Result<()> {
        rec.verify()?;
        if let Some(old) = self.records.get(&rec.key()) {
            if old.aw_value != rec.aw_value {
                return Err(Error::Integrity(format!(
                    "{} {}, k={}, unitary={}: stored aw {} differs from {}",
                    rec.kind, rec.n, rec.k, rec.unitary, old.aw_value, rec.aw_value
                )));
            }
            return Ok(());
        }
        let mut line = serde_json::to_string(&rec)?;
        line.push('\n');
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        // one write per record keeps lines whole for concurrent readers
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        self.records.insert(rec.key(), rec);
        Ok(())
    }
}

/// A solved instance and whether it came from the store.
#[derive(Debug, Clone)]
pub struct Solved {
    pub record: ResultRecord,
    pub cache_hit: bool,
}

/// Looks the instance up (re-verifying the witness) or runs the solver and
/// stores the result.
pub fn solve_cached(
    store: &mut ResultStore,
    g: GroupInstance,
    k: usize,
    unitary: bool,
    cfg: &SolverConfig,
) -> Result<Solved> {
    if let Some(rec) = store.get_verified(g.kind(), g.order(), k, unitary)? {
        return Ok(Solved {
            record: rec.clone(),
            cache_hit: true,
        });
    }
    let record = ResultRecord::from_outcome(&aw_with(g, k, unitary, cfg)?);
    store.put(record.clone())?;
    Ok(Solved {
        record,
        cache_hit: false,
    })
}

/// Prime classifier that reads and fills a [`ResultStore`].
#[derive(Debug)]
pub struct StoreClassifier {
    store: Mutex<ResultStore>,
    limit: u64,
    config: SolverConfig,
}

impl StoreClassifier {
    pub fn new(store: ResultStore, limit: u64) -> Self {
        StoreClassifier {
            store: Mutex::new(store),
            limit,
            config: SolverConfig::default(),
        }
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }

    pub fn into_store(self) -> ResultStore {
        self.store.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl PrimeClassifier for StoreClassifier {
    fn classify(&self, p: u64) -> Result<u8> {
        classify_prime_with(p, self.limit, |p| {
            let mut store = self.store.lock().unwrap_or_else(|e| e.into_inner());
            let g = GroupInstance::cyclic(p as usize)?;
            Ok(solve_cached(&mut store, g, 3, false, &self.config)?
                .record
                .aw_value as u8)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::aw;

    fn record(n: usize) -> ResultRecord {
        ResultRecord::from_outcome(&aw(GroupInstance::interval(n).unwrap(), 3).unwrap())
    }

    #[test]
    fn put_get_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut store = ResultStore::open(&path).unwrap();
        assert!(store.is_empty());
        let rec = record(9);
        store.put(rec.clone()).unwrap();
        assert_eq!(
            store
                .get(GroupKind::Interval, 9, 3, false)
                .unwrap()
                .aw_value,
            4
        );

        let reopened = ResultStore::open(&path).unwrap();
        assert_eq!(reopened.get(GroupKind::Interval, 9, 3, false), Some(&rec));
        assert!(reopened.problems().is_empty());
    }

    #[test]
    fn conflicting_value_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(dir.path().join("c.jsonl")).unwrap();
        store.put(record(9)).unwrap();
        // an equal value is accepted again without a second line
        store.put(record(9)).unwrap();
        let text = std::fs::read_to_string(store.path()).unwrap();
        assert_eq!(text.lines().count(), 1);

        let mut bad = record(9);
        bad.aw_value = 5;
        assert!(store.put(bad).is_err());
    }

    #[test]
    fn invalid_witness_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(dir.path().join("c.jsonl")).unwrap();
        let mut rec = record(4);
        rec.witness = "group=interval n=4\n1 2 3 3\n".into();
        assert!(store.put(rec).is_err());
        assert!(store.is_empty());
    }

    #[test]
    fn corrupt_lines_are_reported_and_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let good = serde_json::to_string(&record(5)).unwrap();
        let mut tampered = record(6);
        tampered.aw_value = 9;
        let tampered = serde_json::to_string(&tampered).unwrap();
        let other = serde_json::to_string(&record(7)).unwrap();
        std::fs::write(&path, format!("{good}\n{{not json\n{tampered}\n{other}\n")).unwrap();

        let store = ResultStore::open(&path).unwrap();
        assert_eq!(store.len(), 2);
        let lines: Vec<usize> = store
            .problems()
            .iter()
            .map(|e| match e {
                Error::CorruptRecord { line, .. } => *line,
                other => panic!("unexpected {other}"),
            })
            .collect();
        assert_eq!(lines, vec![2, 3]);
        assert!(store.get(GroupKind::Interval, 7, 3, false).is_some());
    }

    #[test]
    fn cached_solve_and_classifier() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let mut store = ResultStore::open(&path).unwrap();
        let g = GroupInstance::interval(10).unwrap();
        let cfg = SolverConfig::default();
        assert!(
            !solve_cached(&mut store, g, 3, true, &cfg)
                .unwrap()
                .cache_hit
        );
        assert!(
            solve_cached(&mut store, g, 3, true, &cfg)
                .unwrap()
                .cache_hit
        );

        let classifier = StoreClassifier::new(store, 100);
        assert_eq!(classifier.classify(17).unwrap(), 4);
        assert_eq!(classifier.classify(13).unwrap(), 3);
        assert!(matches!(
            classifier.classify(101),
            Err(Error::Unclassified { .. })
        ));
        let store = classifier.into_store();
        assert!(store.get(GroupKind::Cyclic, 17, 3, false).is_some());
        // small primes are answered without touching the store
        assert!(store.get(GroupKind::Cyclic, 13, 3, false).is_none());
    }

    #[test]
    fn path_precedence() {
        assert_eq!(
            cache_path(Some(Path::new("x.jsonl"))),
            PathBuf::from("x.jsonl")
        );
    }
}
