mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use antivdw::closed_forms::{
    self, aw_zn3_from, factorize, log3_bound, PrimeClassifier, SolverClassifier,
};
use antivdw::constructions::{
    behrend_search, canonical_special, construct_extremal, greedy_ap_free, lower_bound_coloring,
    special_unfolding_census,
};
use antivdw::reference::{max_k, reference_value};
use antivdw::solver::{aw_with, SolverConfig};
use antivdw::store::{cache_path, solve_cached, ResultRecord, ResultStore, StoreClassifier};
use antivdw::verification::{
    dichotomy_census, find_rainbow, for_each_rainbow_free, is_ap_free, is_rainbow_free,
};
use antivdw::{Coloring, Error, GroupInstance, GroupKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use report::{Format, Report};

#[derive(Parser)]
#[command(
    name = "aw",
    version,
    about = "Anti-van der Waerden numbers of [n] and Z_n"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seconds allowed per solver call.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    /// Result cache (default: $AW_CACHE, then ./aw-cache.jsonl).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Solver threads; 0 uses every core.
    #[arg(long, default_value_t = 1, global = true)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Interval,
    Cyclic,
}

impl From<Kind> for GroupKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Interval => GroupKind::Interval,
            Kind::Cyclic => GroupKind::Cyclic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact aw(G, k) (or aw_u with --unitary) with a witness coloring.
    Solve {
        #[arg(long, value_enum)]
        group: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        unitary: bool,
        /// Write the witness in the coloring text format.
        #[arg(long)]
        emit_witness: Option<PathBuf>,
    },
    /// Look for a rainbow k-AP in a coloring file.
    CheckColoring {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Exhaustive special-or-residue check over colorings of [N].
    Dichotomy {
        #[arg(long = "N")]
        big_n: usize,
    },
    /// Extremal unitary rainbow-3-AP-free coloring of [n].
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// 3-AP-free set in [n] from the Behrend family, against the greedy set.
    Behrend {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Also try the set as a lower-bound coloring for k-APs.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Unfold every rainbow-free coloring of Z_2q into [7q+1].
    Special {
        #[arg(long)]
        q: usize,
        /// Write the first rainbow-free unfolding.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// aw(Z_n, 3) from the prime factorization.
    ZnFormula {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = closed_forms::DEFAULT_PRIME_LIMIT)]
        limit: u64,
    },
    /// aw(Z_p, 3) for an odd prime p.
    ClassifyPrime {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = closed_forms::DEFAULT_PRIME_LIMIT)]
        limit: u64,
    },
    /// The closed form f(n) for aw([n], 3).
    F {
        #[arg(long)]
        n: u64,
    },
    /// aw([n], k) for 3 <= k <= (n+3)/2, diffed against published values.
    Table {
        #[arg(long, default_value_t = 25)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
    },
    /// aw([n],3) = aw_u([n],3) = f(n) over a range.
    VerifyTheorem {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
}

struct Ctx {
    cfg: SolverConfig,
    store: Option<ResultStore>,
}

struct Solution {
    record: ResultRecord,
    source: &'static str,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self, Error> {
        let timeout = match g.timeout {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::Precondition(
                    "--timeout must be a positive number of seconds".into(),
                ))
            }
            t => t.map(Duration::from_secs_f64),
        };
        let cfg = SolverConfig::default()
            .with_workers(g.workers)
            .with_timeout(timeout);
        let store = if g.no_cache {
            None
        } else {
            let store = ResultStore::open(cache_path(g.cache.as_deref()))?;
            for problem in store.problems() {
                eprintln!("warning: {problem}");
            }
            Some(store)
        };
        Ok(Ctx { cfg, store })
    }

    fn solve(&mut self, g: GroupInstance, k: usize, unitary: bool) -> Result<Solution, Error> {
        match &mut self.store {
            Some(store) => {
                let s = solve_cached(store, g, k, unitary, &self.cfg)?;
                Ok(Solution {
                    record: s.record,
                    source: if s.cache_hit { "cache" } else { "solver" },
                })
            }
            None => Ok(Solution {
                record: ResultRecord::from_outcome(&aw_with(g, k, unitary, &self.cfg)?),
                source: "solver",
            }),
        }
    }

    /// `Ok(None)` on timeout.
    fn try_solve(
        &mut self,
        g: GroupInstance,
        k: usize,
        unitary: bool,
    ) -> Result<Option<Solution>, Error> {
        match self.solve(g, k, unitary) {
            Ok(s) => Ok(Some(s)),
            Err(Error::Timeout { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn classify_with<T>(&mut self, limit: u64, run: impl FnOnce(&dyn PrimeClassifier) -> T) -> T {
        match self.store.take() {
            Some(store) => {
                let c = StoreClassifier::new(store, limit).with_config(self.cfg.clone());
                let out = run(&c);
                self.store = Some(c.into_store());
                out
            }
            None => run(&SolverClassifier::new(limit).with_config(self.cfg.clone())),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn run(cli: Cli) -> Result<Report, Error> {
    let mut ctx = Ctx::new(&cli.global)?;
    match cli.command {
        Command::Solve {
            group,
            n,
            k,
            unitary,
            emit_witness,
        } => {
            let g = GroupInstance::new(group.into(), n)?;
            let s = ctx.solve(g, k, unitary)?;
            let r = &s.record;
            if let Some(path) = &emit_witness {
                write_file(path, &r.witness)?;
            }
            let name = if unitary { "aw_u" } else { "aw" };
            let mut rep = Report::new(json!({
                "group": g.kind().as_str(), "n": n, "k": k, "unitary": unitary,
                "aw": r.aw_value, "palette": r.aw_value - 1,
                "nodes": r.stats.nodes_explored, "elapsed_ms": r.stats.elapsed_ms,
                "source": s.source, "witness": r.witness,
            }))
            .line(format!("{name}={}", r.aw_value))
            .line(format!(
                "group={} n={n} k={k} nodes={} elapsed_ms={} source={}",
                g.kind(),
                r.stats.nodes_explored,
                r.stats.elapsed_ms,
                s.source
            ));
            if emit_witness.is_none() {
                rep = rep.line("witness:").line(r.witness.trim_end());
            }
            Ok(rep)
        }

        Command::CheckColoring { file, k } => {
            let c = Coloring::from_text(&std::fs::read_to_string(&file)?)?;
            let rainbow = find_rainbow(&c, k)?;
            let mut rep = Report::new(json!({
                "group": c.group().kind().as_str(), "n": c.len(), "k": k, "palette": c.palette(),
                "unitary": c.is_unitary(),
                "verdict": if rainbow.is_some() { "rainbow" } else { "rainbow-free" },
                "witness": rainbow.as_ref().map(|p| p.as_set()),
            }));
            match &rainbow {
                None => rep = rep.line("VERDICT rainbow-free"),
                Some(p) => {
                    let colors: Vec<String> = p
                        .elements()
                        .iter()
                        .map(|&x| c.color_of(x).map(|col| col.to_string()))
                        .collect::<Result<_, _>>()?;
                    rep = rep
                        .line("VERDICT rainbow")
                        .line(format!("witness {p} colors {}", colors.join(" ")));
                    rep.violated = true;
                }
            }
            Ok(rep.line(format!(
                "palette={} unitary={}",
                c.palette(),
                c.is_unitary()
            )))
        }

        Command::Dichotomy { big_n } => {
            if big_n % 2 != 0 || big_n < 2 {
                return Err(Error::Precondition(format!(
                    "N must be even and at least 2, got {big_n}"
                )));
            }
            let census = dichotomy_census(big_n)?;
            let failures: Vec<String> = census.failures.iter().map(|c| c.to_string()).collect();
            let mut rep = Report::new(json!({
                "N": big_n, "examined": census.examined, "special": census.special,
                "residue_1": census.residue_one, "residue_N": census.residue_n,
                "failures": failures,
            }))
            .line(format!("N={big_n} examined={}", census.examined));
            rep.header = vec!["branch".into(), "count".into()];
            rep.rows = vec![
                vec!["special".into(), census.special.to_string()],
                vec!["residue-1".into(), census.residue_one.to_string()],
                vec!["residue-N".into(), census.residue_n.to_string()],
                vec!["failure".into(), failures.len().to_string()],
            ];
            rep.summary = failures.iter().map(|f| format!("failure {f}")).collect();
            rep.violated = !failures.is_empty();
            Ok(rep)
        }

        Command::Construct { n, emit } => {
            let c = construct_extremal(n)?;
            let f = closed_forms::f(n as u64)?;
            let rainbow_free = is_rainbow_free(&c, 3)?;
            let unitary = c.is_unitary();
            let text = c.to_text();
            if let Some(path) = &emit {
                write_file(path, &text)?;
            }
            let mut rep = Report::new(json!({
                "n": n, "palette": c.palette(), "f": f, "exact": true,
                "unitary": unitary, "rainbow_free": rainbow_free, "coloring": text,
            }));
            if emit.is_none() {
                rep = rep.line(text.trim_end());
            }
            rep.violated = !(rainbow_free && unitary && c.palette() + 1 == f as usize);
            Ok(rep.line(format!(
                "palette={} f={f} exact=true unitary={unitary} rainbow_free={rainbow_free}",
                c.palette()
            )))
        }

        Command::Behrend { n, emit, k } => {
            let b = behrend_search(n)?;
            let greedy = greedy_ap_free(n)?;
            let members: Vec<String> = b.set.members().iter().map(|x| x.to_string()).collect();
            let ap_free = is_ap_free(n, b.set.members(), 3)?;
            if let Some(path) = &emit {
                write_file(path, &format!("set n={n}\n{}\n", members.join(" ")))?;
            }
            let p = b.params;
            let mut json = json!({
                "n": n, "size": b.set.len(), "ap_free": ap_free, "greedy_size": greedy.len(),
                "base": p.base, "digit_bound": p.digit_bound, "dimension": p.dimension,
                "norm": p.norm, "members": b.set.members(),
            });
            let mut rep = Report::default();
            if emit.is_none() {
                rep = rep.line(members.join(" "));
            }
            rep = rep
                .line(format!(
                    "size={} ap_free={ap_free} greedy_size={}",
                    b.set.len(),
                    greedy.len()
                ))
                .line(format!(
                    "base={} digit_bound={} dimension={} norm={}",
                    p.base,
                    p.digit_bound,
                    p.dimension,
                    p.norm.map_or("cube".to_string(), |v| v.to_string())
                ));
            if let Some(k) = k {
                let lb = lower_bound_coloring(n, &b.set, k)?;
                let bound = lb.as_ref().map(|c| c.palette() + 1);
                json["lower_bound_k"] = json!(k);
                json["certified_lower_bound"] = json!(bound);
                rep = rep.line(match bound {
                    Some(v) => format!("lower bound: aw([{n}],{k}) >= {v}"),
                    None => {
                        format!("lower bound: coloring has a rainbow {k}-AP, nothing certified")
                    }
                });
            }
            rep.json = json;
            rep.violated = !ap_free;
            Ok(rep)
        }

        Command::Special { q, emit } => {
            let census = special_unfolding_census(q)?;
            if let Some(path) = &emit {
                let mut first = None;
                let mut failure = None;
                for_each_rainbow_free(GroupInstance::cyclic(2 * q)?, 3, |filler| {
                    match canonical_special(q, filler) {
                        Ok(u) if u.rainbow_free => {
                            first = Some(u.coloring);
                            false
                        }
                        Ok(_) => true,
                        Err(e) => {
                            failure = Some(e);
                            false
                        }
                    }
                })?;
                if let Some(e) = failure {
                    return Err(e);
                }
                match first {
                    Some(c) => write_file(path, &c.to_text())?,
                    None => eprintln!("note: no rainbow-free unfolding for q={q}; nothing written"),
                }
            }
            let rate = census.rainbow_free as f64 / census.fillers.max(1) as f64;
            Ok(Report::new(json!({
                "q": q, "n": 7 * q + 1, "fillers": census.fillers,
                "rainbow_free": census.rainbow_free, "rate": rate,
            }))
            .line(format!(
                "q={q} n={} fillers={} rainbow_free={} rate={rate:.4}",
                7 * q + 1,
                census.fillers,
                census.rainbow_free
            )))
        }

        Command::ZnFormula { n, limit } => {
            let fact = ctx.classify_with(limit, |c| factorize(n, c))?;
            let aw = aw_zn3_from(&fact);
            let mut parts = Vec::new();
            if fact.exponent_of_2 > 0 {
                parts.push(format!("2^{}", fact.exponent_of_2));
            }
            let mut classes = Vec::new();
            for (&(p, e), &class) in fact.odd_factors.iter().zip(&fact.classification) {
                parts.push(format!("{p}^{e}"));
                classes.push(json!({"p": p, "e": e, "aw": class}));
            }
            let mut json = json!({
                "n": n, "exponent_of_2": fact.exponent_of_2, "odd_factors": classes, "aw": aw,
            });
            let mut rep = Report::default()
                .line(format!("aw(Z_{n},3)={aw}"))
                .line(format!(
                    "factorization={}",
                    if parts.is_empty() {
                        "1".into()
                    } else {
                        parts.join(" * ")
                    }
                ));
            for c in &classes {
                rep = rep.line(format!("aw(Z_{},3)={}", c["p"], c["aw"]));
            }
            if n >= 3 {
                let (bound, tight) = log3_bound(n)?;
                json["log3_bound"] = json!(bound);
                json["tight"] = json!(tight);
                rep = rep.line(format!("log3_bound={bound} tight={tight}"));
            }
            rep.json = json;
            Ok(rep)
        }

        Command::ClassifyPrime { p, limit } => {
            let v = ctx.classify_with(limit, |c| c.classify(p))?;
            Ok(Report::new(json!({"p": p, "aw": v})).line(format!("aw(Z_{p},3)={v}")))
        }

        Command::F { n } => {
            let f = closed_forms::f(n)?;
            let mut json = json!({"n": n, "f": f});
            let mut rep = Report::default().line(format!("f={f}"));
            if n >= 2 {
                let m = closed_forms::m_of(n)?;
                json["m"] = json!(m);
                rep = rep.line(format!("m={m}"));
            }
            rep.json = json;
            Ok(rep)
        }

        Command::Table { n_min, n_max } => {
            if n_max < 3 || n_min < 3 || n_min > n_max {
                return Err(Error::Precondition(format!(
                    "need 3 <= n-min <= n-max, got {n_min}..{n_max}"
                )));
            }
            let widest = max_k(n_max);
            let mut rep = Report {
                header: std::iter::once("n".to_string())
                    .chain((3..=widest).map(|k| format!("k={k}")))
                    .collect(),
                ..Default::default()
            };
            let mut cells = Vec::new();
            let (mut compared, mut mismatches, mut timeouts) = (0, 0, 0);
            for n in n_min..=n_max {
                let mut row = vec![n.to_string()];
                for k in 3..=max_k(n) {
                    let value = ctx
                        .try_solve(GroupInstance::interval(n)?, k, false)?
                        .map(|s| s.record.aw_value);
                    let reference = reference_value(n, k);
                    let status = match (value, reference) {
                        (None, _) => {
                            timeouts += 1;
                            "timeout"
                        }
                        (Some(_), None) => "unreferenced",
                        (Some(v), Some(r)) => {
                            compared += 1;
                            if v == r {
                                "match"
                            } else {
                                mismatches += 1;
                                rep.summary
                                    .push(format!("mismatch n={n} k={k} solver={v} reference={r}"));
                                "mismatch"
                            }
                        }
                    };
                    row.push(value.map_or("?".into(), |v| v.to_string()));
                    cells.push(json!({"n": n, "k": k, "aw": value, "reference": reference, "status": status}));
                }
                row.resize(rep.header.len(), String::new());
                rep.rows.push(row);
            }
            rep.summary.push(format!(
                "compared={compared} mismatches={mismatches} timeouts={timeouts}"
            ));
            rep.json = json!({
                "cells": cells, "compared": compared, "mismatches": mismatches, "timeouts": timeouts,
            });
            rep.violated = mismatches > 0;
            Ok(rep)
        }

        Command::VerifyTheorem { from, to } => {
            if from < 1 || from > to {
                return Err(Error::Precondition(format!(
                    "need 1 <= from <= to, got {from}..{to}"
                )));
            }
            let mut rep = Report {
                header: ["n", "aw", "aw_u", "f", "equal"].map(String::from).to_vec(),
                ..Default::default()
            };
            let mut results = Vec::new();
            let (mut mismatches, mut timeouts) = (0, 0);
            for n in from..=to {
                let g = GroupInstance::interval(n)?;
                let a = ctx.try_solve(g, 3, false)?.map(|s| s.record.aw_value);
                let u = ctx.try_solve(g, 3, true)?.map(|s| s.record.aw_value);
                let f = closed_forms::f(n as u64)? as usize;
                let equal = match (a, u) {
                    (Some(a), Some(u)) => Some(a == u && u == f),
                    _ => None,
                };
                match equal {
                    None => timeouts += 1,
                    Some(false) => mismatches += 1,
                    Some(true) => {}
                }
                let show = |v: Option<usize>| v.map_or("?".to_string(), |v| v.to_string());
                rep.rows.push(vec![
                    n.to_string(),
                    show(a),
                    show(u),
                    f.to_string(),
                    equal.map_or(
                        "timeout".into(),
                        |e| if e { "yes".into() } else { "NO".into() },
                    ),
                ]);
                results.push(json!({"n": n, "aw": a, "aw_u": u, "f": f, "equal": equal}));
            }
            rep.summary
                .push(format!("mismatches={mismatches} timeouts={timeouts}"));
            rep.json = json!({"rows": results, "mismatches": mismatches, "timeouts": timeouts});
            rep.violated = mismatches > 0;
            Ok(rep)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Timeout { .. } => 3,
        Error::Integrity(_) => 1,
        _ => 2,
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": e.to_string() });
    match e {
        Error::Unclassified { p, limit } => {
            v["reason"] = json!("unclassified");
            v["p"] = json!(p);
            v["limit"] = json!(limit);
        }
        Error::Timeout { nodes } => {
            v["reason"] = json!("timeout");
            v["nodes"] = json!(nodes);
        }
        _ => {}
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    match run(cli) {
        Ok(rep) => {
            print!("{}", rep.render(format));
            ExitCode::from(if rep.violated { 1 } else { 0 })
        }
        Err(e) => {
            if format == Format::Json {
                println!("{}", error_json(&e));
            }
            match &e {
                Error::Unclassified { p, limit } => {
                    eprintln!("error: unclassified p={p} limit={limit}")
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
