//! Rate formulas, regime classification and the exhaustive converse checks.
//!
//! The exact-rate regimes are decided from `(m, s, g, t)` alone:
//!
//! | regime              | condition                                         | rate                  |
//! |---------------------|---------------------------------------------------|-----------------------|
//! | `Thm34Exact`        | `t > (g-1)(m-s)` and `s+t <= g(m-s)`               | `s + t`               |
//! | `Thm5Exact`         | `s+t > g(m-s)` and `g-1 < t/(m-s) <= g`            | `g(m-s)`              |
//! | `Thm6BroadcastOnly` | otherwise, `(f-1)(m-s) < t < f(m-s)`, `f <= g`     | broadcast codes only  |
//! | `BoundsOnly`        | otherwise (`t` a multiple of `m-s`)                | bracket only          |
//!
//! The converse side is checked numerically: [`min_mais_oracle`] walks every
//! exact-`t` decoding choice and takes the smallest exact MAIS size.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::digraph::{build_digraph, group_presence, GroupPresence};
use crate::error::{Error, Result};
use crate::instance::{
    check_params, combinations, enumerate_choices, DecodingChoice, Instance, ReceiverId,
};
use crate::mais::{mais, mais_size};
use crate::scheme::{coded_rate, emulation_closure};

/// Choice-space ceiling for the oracle unless the caller raises it.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

pub fn achievable_rate(m: usize, s: usize, g: usize, t: usize) -> Result<usize> {
    check_params(m, s, g, t)?;
    Ok(coded_rate(m, s, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Thm34Exact,
    Thm5Exact,
    Thm6BroadcastOnly,
    BoundsOnly,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Thm34Exact => "Thm34Exact",
            Regime::Thm5Exact => "Thm5Exact",
            Regime::Thm6BroadcastOnly => "Thm6BroadcastOnly",
            Regime::BoundsOnly => "BoundsOnly",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub value: usize,
    pub exhaustive: bool,
    pub choices: u64,
    pub witness_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    pub m: usize,
    pub s: usize,
    pub g: usize,
    pub t: usize,
    pub regime: Regime,
    pub exact_rate: Option<usize>,
    pub lower: usize,
    pub upper: usize,
    pub f: Option<usize>,
    /// Optimal rate among broadcast codes, when `f` exists.
    pub broadcast_rate: Option<usize>,
    pub oracle: Option<OracleSummary>,
}

impl RegimeReport {
    /// Raises `lower` with an exhaustive min-MAIS value.
    pub fn refine(&mut self, oracle: &OracleResult) {
        if oracle.exhaustive {
            self.lower = self.lower.max(oracle.value);
        }
        self.oracle = Some(oracle.summary());
    }
}

pub fn classify(m: usize, s: usize, g: usize, t: usize) -> Result<RegimeReport> {
    check_params(m, s, g, t)?;
    let k = m - s;
    let upper = coded_rate(m, s, t);
    let f = (!t.is_multiple_of(k))
        .then(|| t.div_ceil(k))
        .filter(|&f| f <= g);
    let (regime, exact) = if t > (g - 1) * k && s + t <= g * k {
        (Regime::Thm34Exact, Some(s + t))
    } else if s + t > g * k && (g - 1) * k < t && t <= g * k {
        (Regime::Thm5Exact, Some(g * k))
    } else if f.is_some() {
        (Regime::Thm6BroadcastOnly, None)
    } else {
        (Regime::BoundsOnly, None)
    };
    // every receiver pulls t messages independent of its side information
    let lower = exact.unwrap_or(t);
    Ok(RegimeReport {
        m,
        s,
        g,
        t,
        regime,
        exact_rate: exact,
        lower,
        upper,
        f,
        broadcast_rate: f.map(|f| (s + t).min(f * k)),
        oracle: None,
    })
}

/// Optimal rate among broadcast codes for `(f-1)(m-s) < t < f(m-s)`.
pub fn broadcast_rate(m: usize, s: usize, g: usize, t: usize) -> Result<usize> {
    check_params(m, s, g, t)?;
    let k = m - s;
    if t.is_multiple_of(k) {
        return Err(Error::Hypothesis(format!(
            "t = {t} is a multiple of m - s = {k}; no f satisfies the strict inequalities, use classify()"
        )));
    }
    let f = t.div_ceil(k);
    if f > g {
        return Err(Error::Hypothesis(format!("f = {f} exceeds g = {g}")));
    }
    Ok((s + t).min(f * k))
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: usize,
    pub argmin_index: u64,
    pub argmin: DecodingChoice,
    pub exhaustive: bool,
    pub choices: u64,
}

impl OracleResult {
    pub fn summary(&self) -> OracleSummary {
        OracleSummary {
            value: self.value,
            exhaustive: self.exhaustive,
            choices: self.choices,
            witness_index: self.argmin_index,
        }
    }
}

/// MAIS size of every exact-`t` choice, in enumeration order.
///
/// The space is cut into `workers` disjoint contiguous ranges evaluated in
/// parallel; the result does not depend on the worker count.
pub fn mais_profile(inst: &Instance, budget: u64, workers: usize) -> Result<Vec<usize>> {
    let space = enumerate_choices(inst, budget)?;
    let ranges = space.partition(workers.max(1) * 8);
    let run = || -> Result<Vec<usize>> {
        let chunks: Vec<Result<Vec<usize>>> = ranges
            .par_iter()
            .map(|range| {
                space
                    .range(range.clone())
                    .map(|d| Ok(mais_size(build_digraph(inst, &d)?.graph())))
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(space.count() as usize);
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    };
    if workers == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Hypothesis(format!("thread pool: {e}")))?
        .install(run)
}

/// Smallest MAIS size over every exact-`t` decoding choice, with the first
/// choice attaining it.
pub fn min_mais_oracle(inst: &Instance, budget: u64, workers: usize) -> Result<OracleResult> {
    let profile = mais_profile(inst, budget, workers)?;
    let space = enumerate_choices(inst, budget)?;
    let (idx, &value) = profile
        .iter()
        .enumerate()
        .min_by_key(|&(i, &v)| (v, i))
        .expect("choice space is never empty");
    Ok(OracleResult {
        value,
        argmin_index: idx as u64,
        argmin: space.choice_at(idx as u64),
        exhaustive: true,
        choices: space.count(),
    })
}

fn increment_hypothesis(inst: &Instance) -> Result<()> {
    let (m, s, g, t) = (inst.m(), inst.s(), inst.g(), inst.t());
    let k = m - s;
    if t <= (g - 1) * k {
        return Err(Error::Hypothesis(format!(
            "needs t > (g-1)(m-s), got t = {t}, (g-1)(m-s) = {}",
            (g - 1) * k
        )));
    }
    if s + t > g * k {
        return Err(Error::Hypothesis(format!(
            "needs s+t <= g(m-s), got s+t = {}, g(m-s) = {}",
            s + t,
            g * k
        )));
    }
    Ok(())
}

/// All choices differing from `d` in one message of one receiver, in order
/// of receiver, removed message, then added message.
pub fn single_replacements(inst: &Instance, d: &DecodingChoice) -> Vec<DecodingChoice> {
    let mut out = Vec::new();
    for (r, msgs) in d.assignments() {
        for &old in msgs {
            for new in 1..=inst.message_count() {
                if inst.holds(r, new) || msgs.contains(&new) {
                    continue;
                }
                let mut next = d.assignments().clone();
                let set = next.get_mut(r).expect("receiver present");
                set.remove(&old);
                set.insert(new);
                out.push(DecodingChoice::from_assignments(next, d.is_generalized()));
            }
        }
    }
    out
}

/// First single-replacement neighbour whose MAIS is one larger, if any.
/// No hypothesis checks.
pub fn find_increment(inst: &Instance, d: &DecodingChoice) -> Result<Option<DecodingChoice>> {
    let base = mais_size(build_digraph(inst, d)?.graph());
    for next in single_replacements(inst, d) {
        if mais_size(build_digraph(inst, &next)?.graph()) == base + 1 {
            return Ok(Some(next));
        }
    }
    Ok(None)
}

/// Moves a choice whose MAIS is below `s + t` one step up by a single
/// message replacement.
pub fn increment_choice(inst: &Instance, d: &DecodingChoice) -> Result<DecodingChoice> {
    increment_hypothesis(inst)?;
    let target = inst.s() + inst.t();
    let base = mais_size(build_digraph(inst, d)?.graph());
    if base >= target {
        return Err(Error::Hypothesis(format!(
            "MAIS is {base}, not below s+t = {target}"
        )));
    }
    find_increment(inst, d)?.ok_or_else(|| {
        Error::Falsification(format!(
            "no single-replacement neighbour of [{d}] raises MAIS above {base}"
        ))
    })
}

/// `Ok(true)` when `r` reaches `s + t` messages by emulation; in that case the
/// MAIS is confirmed to be at least `s + t`.
pub fn decode_count_check(inst: &Instance, d: &DecodingChoice, r: &ReceiverId) -> Result<bool> {
    let target = inst.s() + inst.t();
    if emulation_closure(inst, d, r).len() < target {
        return Ok(false);
    }
    let size = mais_size(build_digraph(inst, d)?.graph());
    if size < target {
        return Err(Error::Falsification(format!(
            "receiver {r} decodes {target}+ messages under [{d}] but MAIS is {size}"
        )));
    }
    Ok(true)
}

/// When MAIS equals `s + t` (with `t > (g-1)(m-s)`, `s + t = g(m-s)`), some
/// receiver must decode `s + t` messages by emulation. Returns that receiver,
/// or `None` when the MAIS is some other size.
pub fn full_decoder(inst: &Instance, d: &DecodingChoice) -> Result<Option<ReceiverId>> {
    let (m, s, g, t) = (inst.m(), inst.s(), inst.g(), inst.t());
    if t <= (g - 1) * (m - s) || s + t != g * (m - s) {
        return Err(Error::Hypothesis(
            "needs t > (g-1)(m-s) and s+t = g(m-s)".into(),
        ));
    }
    if mais_size(build_digraph(inst, d)?.graph()) != s + t {
        return Ok(None);
    }
    inst.receivers()
        .into_iter()
        .find(|r| emulation_closure(inst, d, r).len() >= s + t)
        .map(Some)
        .ok_or_else(|| {
            Error::Falsification(format!(
                "MAIS is s+t under [{d}] but no receiver decodes s+t messages"
            ))
        })
}

/// Messages gained by emulation: every `(r, j)` with `j` in `r`'s closure
/// but not in its own assignment.
pub fn emulation_gains(inst: &Instance, d: &DecodingChoice) -> Vec<(ReceiverId, usize)> {
    d.assignments()
        .iter()
        .flat_map(|(r, own)| {
            emulation_closure(inst, d, r)
                .into_iter()
                .filter(|j| !own.contains(j))
                .map(move |j| (r.clone(), j))
        })
        .collect()
}

fn append_all(d: &DecodingChoice, extra: &[(ReceiverId, usize)]) -> DecodingChoice {
    let mut map: BTreeMap<ReceiverId, BTreeSet<usize>> = d.assignments().clone();
    for (r, j) in extra {
        map.get_mut(r).expect("receiver present").insert(*j);
    }
    DecodingChoice::from_assignments(map, true)
}

/// MAIS sizes before and after appending emulation gains.
#[derive(Clone, Debug, Serialize)]
pub struct AppendReport {
    pub base: usize,
    pub gains: usize,
    /// One entry per single gain appended alone.
    pub single: Vec<usize>,
    /// All gains appended at once (the closure choice).
    pub closure: usize,
    /// Random subsets of the gains.
    pub subsets: Vec<usize>,
}

impl AppendReport {
    pub fn invariant(&self) -> bool {
        self.single
            .iter()
            .chain(&self.subsets)
            .chain(std::iter::once(&self.closure))
            .all(|&v| v == self.base)
    }
}

pub fn append_invariance<R: Rng>(
    inst: &Instance,
    d: &DecodingChoice,
    subset_samples: usize,
    rng: &mut R,
) -> Result<AppendReport> {
    let size_of =
        |c: &DecodingChoice| -> Result<usize> { Ok(mais_size(build_digraph(inst, c)?.graph())) };
    let base = size_of(d)?;
    let gains = emulation_gains(inst, d);
    let single = gains
        .iter()
        .map(|gain| size_of(&append_all(d, std::slice::from_ref(gain))))
        .collect::<Result<Vec<_>>>()?;
    let closure = size_of(&append_all(d, &gains))?;
    let mut subsets = Vec::with_capacity(subset_samples);
    for _ in 0..subset_samples {
        let mut pick = gains.clone();
        pick.shuffle(rng);
        let keep = rng.gen_range(0..=pick.len());
        pick.truncate(keep);
        subsets.push(size_of(&append_all(d, &pick))?);
    }
    Ok(AppendReport {
        base,
        gains: gains.len(),
        single,
        closure,
        subsets,
    })
}

/// Groups with no message label among the witness nodes of `d`'s MAIS.
pub fn absent_groups(inst: &Instance, d: &DecodingChoice) -> Result<usize> {
    let dg = build_digraph(inst, d)?;
    let w = mais(dg.graph());
    Ok(group_presence(inst, w.labels(dg.graph())).count(GroupPresence::Absent))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma9Result {
    /// Row indices, 1-based.
    pub p: Vec<usize>,
    /// Columns that are all ones on the rows of `p`, 1-based.
    pub j: Vec<usize>,
}

/// For an `(s+1) x s` binary matrix, the first nonempty row set `P` (by size,
/// then lexicographically) whose common-ones column set has `|P| - 1`
/// elements.
pub fn lemma9_subset(b: &[Vec<bool>]) -> Result<Lemma9Result> {
    let rows = b.len();
    if rows < 2 {
        return Err(Error::Hypothesis(format!("need s >= 1, got {rows} rows")));
    }
    let s = rows - 1;
    if let Some(bad) = b.iter().position(|row| row.len() != s) {
        return Err(Error::Hypothesis(format!(
            "row {} has {} columns, expected {s}",
            bad + 1,
            b[bad].len()
        )));
    }
    let all_rows: Vec<usize> = (1..=rows).collect();
    for size in 1..=rows {
        for p in combinations(&all_rows, size) {
            let j: Vec<usize> = (1..=s)
                .filter(|&col| p.iter().all(|&row| b[row - 1][col - 1]))
                .collect();
            if j.len() == size - 1 {
                return Ok(Lemma9Result { p, j });
            }
        }
    }
    Err(Error::Falsification(format!(
        "no row subset works for {b:?}"
    )))
}

/// Every `(s+1) x s` binary matrix, row-major bits of `code`.
pub fn binary_matrix(s: usize, code: u64) -> Vec<Vec<bool>> {
    (0..=s)
        .map(|i| (0..s).map(|j| code >> (i * s + j) & 1 == 1).collect())
        .collect()
}

/// Per-group transmitted-message counts, each in `0..=g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub counts: Vec<usize>,
}

impl Allocation {
    pub fn new(counts: Vec<usize>, g: usize) -> Result<Self> {
        if let Some(&c) = counts.iter().find(|&&c| c > g) {
            return Err(Error::Hypothesis(format!("count {c} exceeds g = {g}")));
        }
        Ok(Allocation { counts })
    }

    pub fn sum(&self) -> usize {
        self.counts.iter().sum()
    }

    fn sorted_desc(&self) -> Vec<usize> {
        let mut v = self.counts.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// Sum of the `k` largest counts.
    pub fn top(&self, k: usize) -> usize {
        self.sorted_desc().iter().take(k).sum()
    }

    /// Sum of the `k` smallest counts.
    pub fn bottom(&self, k: usize) -> usize {
        self.sorted_desc().iter().rev().take(k).sum()
    }
}

/// Each intermediate allocation of the balancing walk, sorted non-increasing,
/// starting from the sorted input.
pub fn balancing_steps(a: &Allocation) -> Vec<Allocation> {
    let mut cur = a.sorted_desc();
    let mut steps = vec![Allocation {
        counts: cur.clone(),
    }];
    while let (Some(&hi), Some(&lo)) = (cur.first(), cur.last()) {
        if hi - lo <= 1 {
            break;
        }
        cur[0] -= 1;
        let last = cur.len() - 1;
        cur[last] += 1;
        cur.sort_unstable_by(|a, b| b.cmp(a));
        steps.push(Allocation {
            counts: cur.clone(),
        });
    }
    steps
}

/// Balances until the largest and smallest counts differ by at most one.
pub fn balance_allocation(a: &Allocation, s: usize) -> Allocation {
    let steps = balancing_steps(a);
    let k = a.counts.len().saturating_sub(s);
    for w in steps.windows(2) {
        assert!(w[1].top(k) <= w[0].top(k), "top-{k} sum grew: {w:?}");
        assert!(
            w[1].bottom(k) >= w[0].bottom(k),
            "bottom-{k} sum shrank: {w:?}"
        );
    }
    steps.into_iter().last().expect("at least the input")
}

fn sum_regime_hypothesis(inst: &Instance) -> Result<()> {
    let (m, s, g, t) = (inst.m(), inst.s(), inst.g(), inst.t());
    if t > (g - 1) * (m - s) && s + t <= g * (m - s) {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "needs t > (g-1)(m-s) = {} and s+t <= g(m-s) = {}, got t = {t}",
            (g - 1) * (m - s),
            g * (m - s)
        )))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RowSubsetSweep {
    pub s: usize,
    pub matrices: u64,
    pub passed: u64,
    pub failures: Vec<String>,
}

/// Runs [`lemma9_subset`] on every `(s+1) x s` binary matrix.
pub fn row_subset_sweep(s: usize) -> Result<RowSubsetSweep> {
    if !(1..=4).contains(&s) {
        return Err(Error::Hypothesis(format!("s must be in 1..=4, got {s}")));
    }
    let matrices = 1u64 << ((s + 1) * s);
    let mut passed = 0;
    let mut failures = Vec::new();
    for code in 0..matrices {
        match lemma9_subset(&binary_matrix(s, code)) {
            Ok(r) if r.j.len() + 1 == r.p.len() => passed += 1,
            Ok(r) => failures.push(format!("matrix {code:#x}: {r:?}")),
            Err(e) => failures.push(format!("matrix {code:#x}: {e}")),
        }
    }
    Ok(RowSubsetSweep {
        s,
        matrices,
        passed,
        failures,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IncrementSweep {
    pub choices: u64,
    /// Choices whose MAIS is below `s + t`.
    pub candidates: u64,
    pub incremented: u64,
    pub falsifications: Vec<String>,
}

/// Applies [`increment_choice`] to every choice below `s + t`.
pub fn increment_sweep(inst: &Instance, budget: u64, workers: usize) -> Result<IncrementSweep> {
    increment_hypothesis(inst)?;
    let target = inst.s() + inst.t();
    let profile = mais_profile(inst, budget, workers)?;
    let space = enumerate_choices(inst, budget)?;
    let mut out = IncrementSweep {
        choices: space.count(),
        candidates: 0,
        incremented: 0,
        falsifications: Vec::new(),
    };
    for (idx, &v) in profile.iter().enumerate() {
        if v >= target {
            continue;
        }
        out.candidates += 1;
        let d = space.choice_at(idx as u64);
        match increment_choice(inst, &d) {
            Ok(_) => out.incremented += 1,
            Err(e @ Error::Falsification(_)) => out.falsifications.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsentGroupSweep {
    pub choices: u64,
    pub min_mais: usize,
    /// Choices attaining the minimum.
    pub minimizers: u64,
    /// Minimizers whose witness leaves exactly `s` groups absent.
    pub minimizers_matching: u64,
    /// All choices whose witness leaves exactly `s` groups absent.
    pub all_matching: u64,
    pub counterexamples: Vec<String>,
}

impl AbsentGroupSweep {
    pub fn passed(&self) -> bool {
        self.minimizers == self.minimizers_matching
    }
}

/// Counts absent groups of the MAIS witness for every choice.
pub fn absent_group_sweep(
    inst: &Instance,
    budget: u64,
    workers: usize,
) -> Result<AbsentGroupSweep> {
    sum_regime_hypothesis(inst)?;
    let profile = mais_profile(inst, budget, workers)?;
    let space = enumerate_choices(inst, budget)?;
    let min = *profile.iter().min().expect("nonempty space");
    let absent: Vec<usize> = (0..space.count())
        .into_par_iter()
        .map(|i| absent_groups(inst, &space.choice_at(i)))
        .collect::<Result<_>>()?;
    let mut out = AbsentGroupSweep {
        choices: space.count(),
        min_mais: min,
        minimizers: 0,
        minimizers_matching: 0,
        all_matching: 0,
        counterexamples: Vec::new(),
    };
    for (idx, (&v, &a)) in profile.iter().zip(&absent).enumerate() {
        let ok = a == inst.s();
        out.all_matching += ok as u64;
        if v == min {
            out.minimizers += 1;
            out.minimizers_matching += ok as u64;
            if !ok && out.counterexamples.len() < 5 {
                out.counterexamples.push(format!(
                    "choice #{idx} [{}]: {a} absent groups",
                    space.choice_at(idx as u64)
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendSweep {
    pub seed: u64,
    pub cases: usize,
    pub cases_with_gains: usize,
    /// Individual MAIS comparisons made (single, closure and subset appends).
    pub comparisons: usize,
    pub failures: Vec<String>,
}

/// Checks MAIS invariance under appending emulation gains on `trials` random
/// choices.
pub fn append_sweep(inst: &Instance, trials: usize, seed: u64) -> Result<AppendSweep> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = AppendSweep {
        seed,
        cases: 0,
        cases_with_gains: 0,
        comparisons: 0,
        failures: Vec::new(),
    };
    for _ in 0..trials {
        let d = crate::instance::random_choice(inst, &mut rng);
        let report = append_invariance(inst, &d, 3, &mut rng)?;
        out.cases += 1;
        if report.gains > 0 {
            out.cases_with_gains += 1;
            out.comparisons += report.single.len() + report.subsets.len() + 1;
        }
        if !report.invariant() {
            out.failures.push(format!(
                "[{d}]: base {} single {:?} closure {} subsets {:?}",
                report.base, report.single, report.closure, report.subsets
            ));
        }
    }
    Ok(out)
}
