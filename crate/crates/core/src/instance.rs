//! The g-group complete-{s} problem: `m` groups of `g` messages, one receiver
//! per `s`-subset of groups holding those groups, each wanting `t` more
//! messages.
//!
//! Messages are numbered `1..=m*g`, group `i` holding `(i-1)g+1 ..= ig`.
//! Groups are numbered `1..=m`. Receivers are ordered lexicographically by
//! their group lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{FieldSpec, DEFAULT_WIDTH};

/// Group masks are `u64`, so instances are limited to 64 groups.
pub const MAX_GROUPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    m: usize,
    s: usize,
    g: usize,
    t: usize,
    field: FieldSpec,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    s: usize,
    g: usize,
    t: usize,
    #[serde(default = "default_width")]
    field_width: u32,
}

fn default_width() -> u32 {
    DEFAULT_WIDTH
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        Instance::with_field_width(f.m, f.s, f.g, f.t, f.field_width)
    }
}

impl From<Instance> for InstanceFile {
    fn from(i: Instance) -> Self {
        InstanceFile {
            m: i.m,
            s: i.s,
            g: i.g,
            t: i.t,
            field_width: i.field.width(),
        }
    }
}

impl Instance {
    pub fn new(m: usize, s: usize, g: usize, t: usize) -> Result<Self> {
        Self::with_field_width(m, s, g, t, DEFAULT_WIDTH)
    }

    pub fn with_field_width(m: usize, s: usize, g: usize, t: usize, width: u32) -> Result<Self> {
        let field = FieldSpec::new(width)?;
        check_params(m, s, g, t)?;
        if field.order() < m {
            return Err(Error::InvalidInstance(format!(
                "field GF(2^{width}) has {} elements, fewer than m = {m}",
                field.order()
            )));
        }
        Ok(Instance { m, s, g, t, field })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn g(&self) -> usize {
        self.g
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn message_count(&self) -> usize {
        self.m * self.g
    }

    pub fn receiver_count(&self) -> u64 {
        binomial(self.m as u64, self.s as u64).expect("small binomial")
    }

    /// Messages outside any one receiver's side information, `g(m - s)`.
    pub fn eligible_count(&self) -> usize {
        self.g * (self.m - self.s)
    }

    pub fn group_messages(&self, group: usize) -> Range<usize> {
        (group - 1) * self.g + 1..group * self.g + 1
    }

    pub fn group_of(&self, message: usize) -> Result<usize> {
        if message == 0 || message > self.message_count() {
            return Err(Error::MessageOutOfRange {
                index: message,
                max: self.message_count(),
            });
        }
        Ok(message.div_ceil(self.g))
    }

    pub fn receivers(&self) -> Vec<ReceiverId> {
        enumerate_receivers(self)
    }

    pub fn side_info(&self, r: &ReceiverId) -> BTreeSet<usize> {
        side_info_messages(self, r)
    }

    /// Does `r` hold message `j`?
    pub fn holds(&self, r: &ReceiverId, message: usize) -> bool {
        let group = message.div_ceil(self.g);
        r.contains_group(group)
    }

    pub fn label(&self) -> String {
        format!("(m={}, s={}, g={}, t={})", self.m, self.s, self.g, self.t)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Validate raw `(m, s, g, t)` without building an `Instance`.
pub fn check_params(m: usize, s: usize, g: usize, t: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidInstance(format!(
            "m = {m} must be at least 2"
        )));
    }
    if m > MAX_GROUPS {
        return Err(Error::InvalidInstance(format!(
            "m = {m} exceeds the supported maximum of {MAX_GROUPS} groups"
        )));
    }
    if g < 1 {
        return Err(Error::InvalidInstance("g must be at least 1".into()));
    }
    if t < 1 {
        return Err(Error::InvalidInstance("t must be at least 1".into()));
    }
    let s_max = (m * g).saturating_sub(t) / g;
    if s < 1 || s > s_max {
        return Err(Error::InvalidInstance(format!(
            "s = {s} must satisfy 1 <= s <= floor((mg - t)/g) = {s_max}"
        )));
    }
    Ok(())
}

pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// A receiver, identified by the strictly increasing list of its groups.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReceiverId(Vec<usize>);

impl ReceiverId {
    pub fn new(inst: &Instance, groups: Vec<usize>) -> Result<Self> {
        if groups.len() != inst.s {
            return Err(Error::InvalidReceiver(format!(
                "{groups:?} has {} groups, expected s = {}",
                groups.len(),
                inst.s
            )));
        }
        if groups.iter().any(|&x| x == 0 || x > inst.m) {
            return Err(Error::InvalidReceiver(format!(
                "{groups:?} has a group outside 1..={}",
                inst.m
            )));
        }
        if groups.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidReceiver(format!(
                "{groups:?} is not strictly increasing"
            )));
        }
        Ok(ReceiverId(groups))
    }

    pub fn groups(&self) -> &[usize] {
        &self.0
    }

    pub fn contains_group(&self, group: usize) -> bool {
        self.0.binary_search(&group).is_ok()
    }

    /// Bit `i - 1` set for each group `i`.
    pub fn group_mask(&self) -> u64 {
        self.0.iter().fold(0, |acc, &x| acc | 1 << (x - 1))
    }
}

impl fmt::Display for ReceiverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// All `s`-subsets of `1..=m` in lexicographic order.
pub fn enumerate_receivers(inst: &Instance) -> Vec<ReceiverId> {
    combinations(&(1..=inst.m).collect::<Vec<_>>(), inst.s)
        .into_iter()
        .map(ReceiverId)
        .collect()
}

pub fn side_info_messages(inst: &Instance, r: &ReceiverId) -> BTreeSet<usize> {
    r.0.iter()
        .flat_map(|&grp| inst.group_messages(grp))
        .collect()
}

pub fn group_of(inst: &Instance, message: usize) -> Result<usize> {
    inst.group_of(message)
}

/// `k`-subsets of `items` in lexicographic order of positions.
pub(crate) fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], start: usize, k: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i].clone());
            go(items, i + 1, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= items.len() {
        go(items, 0, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Which messages each receiver is meant to decode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecodingChoice {
    assignments: BTreeMap<ReceiverId, BTreeSet<usize>>,
    generalized: bool,
}

#[derive(Serialize, Deserialize)]
struct ChoiceEntry {
    receiver: Vec<usize>,
    messages: Vec<usize>,
}

impl DecodingChoice {
    /// Wraps raw assignments; call [`validate_choice`] before trusting it.
    pub fn from_assignments(
        assignments: BTreeMap<ReceiverId, BTreeSet<usize>>,
        generalized: bool,
    ) -> Self {
        DecodingChoice {
            assignments,
            generalized,
        }
    }

    /// Builds and validates in one step.
    pub fn new(
        inst: &Instance,
        assignments: BTreeMap<ReceiverId, BTreeSet<usize>>,
        generalized: bool,
    ) -> Result<Self> {
        let d = DecodingChoice {
            assignments,
            generalized,
        };
        validate_choice(inst, &d).map_err(|v| Error::InvalidChoice(v.to_string()))?;
        Ok(d)
    }

    /// Convenience constructor from `(groups, messages)` pairs.
    pub fn from_pairs(
        inst: &Instance,
        pairs: &[(&[usize], &[usize])],
        generalized: bool,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (groups, msgs) in pairs {
            let r = ReceiverId::new(inst, groups.to_vec())?;
            map.insert(r, msgs.iter().copied().collect());
        }
        Self::new(inst, map, generalized)
    }

    pub fn assignments(&self) -> &BTreeMap<ReceiverId, BTreeSet<usize>> {
        &self.assignments
    }

    pub fn get(&self, r: &ReceiverId) -> Option<&BTreeSet<usize>> {
        self.assignments.get(r)
    }

    pub fn is_generalized(&self) -> bool {
        self.generalized
    }

    pub fn node_count(&self) -> usize {
        self.assignments.values().map(BTreeSet::len).sum()
    }

    /// Same choice with `message` added to `r`'s set, flagged generalized.
    pub fn appended(&self, r: &ReceiverId, message: usize) -> DecodingChoice {
        let mut d = self.clone();
        if let Some(set) = d.assignments.get_mut(r) {
            set.insert(message);
        }
        d.generalized = true;
        d
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<ChoiceEntry> = self
            .assignments
            .iter()
            .map(|(r, msgs)| ChoiceEntry {
                receiver: r.groups().to_vec(),
                messages: msgs.iter().copied().collect(),
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("plain data serializes")
    }

    /// Parse the list-of-entries format; sets the generalized flag when any
    /// receiver has more than `t` messages.
    pub fn from_json(inst: &Instance, text: &str) -> Result<Self> {
        let entries: Vec<ChoiceEntry> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidChoice(format!("malformed choice file: {e}")))?;
        let mut map = BTreeMap::new();
        for e in entries {
            let r = ReceiverId::new(inst, e.receiver)?;
            if map.contains_key(&r) {
                return Err(Error::InvalidChoice(format!("receiver {r} listed twice")));
            }
            map.insert(r, e.messages.into_iter().collect::<BTreeSet<_>>());
        }
        let generalized = map.values().any(|m| m.len() > inst.t);
        Self::new(inst, map, generalized)
    }
}

impl fmt::Display for DecodingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, msgs)) in self.assignments.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}->{msgs:?}")?;
        }
        Ok(())
    }
}

/// First problem found by [`validate_choice`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceViolation {
    pub receiver: Option<ReceiverId>,
    pub reason: String,
}

impl fmt::Display for ChoiceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.receiver {
            Some(r) => write!(f, "receiver {r}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

pub fn validate_choice(
    inst: &Instance,
    d: &DecodingChoice,
) -> std::result::Result<(), ChoiceViolation> {
    let receivers = enumerate_receivers(inst);
    for r in d.assignments.keys() {
        if ReceiverId::new(inst, r.0.clone()).is_err() {
            return Err(ChoiceViolation {
                receiver: Some(r.clone()),
                reason: "not a receiver of this instance".into(),
            });
        }
    }
    for r in &receivers {
        let violation = |reason: String| ChoiceViolation {
            receiver: Some(r.clone()),
            reason,
        };
        let Some(msgs) = d.assignments.get(r) else {
            return Err(violation("missing from the choice".into()));
        };
        if let Some(&j) = msgs.iter().find(|&&j| j == 0 || j > inst.message_count()) {
            return Err(violation(format!(
                "message {j} outside 1..={}",
                inst.message_count()
            )));
        }
        if let Some(&j) = msgs.iter().find(|&&j| inst.holds(r, j)) {
            return Err(violation(format!(
                "message {j} is already side information"
            )));
        }
        let ok = if d.generalized {
            msgs.len() >= inst.t
        } else {
            msgs.len() == inst.t
        };
        if !ok {
            let want = if d.generalized { "at least" } else { "exactly" };
            return Err(violation(format!(
                "{} messages assigned, expected {want} t = {}",
                msgs.len(),
                inst.t
            )));
        }
    }
    Ok(())
}

/// The exact-`t` choice space, indexed in lexicographic order.
///
/// Index `0` is the first choice; the first receiver is the most significant
/// digit and each digit ranks a `t`-subset of that receiver's eligible
/// messages lexicographically. Disjoint index ranges can be walked
/// independently.
#[derive(Clone, Debug)]
pub struct ChoiceSpace {
    inst: Instance,
    receivers: Vec<ReceiverId>,
    /// Per receiver, its `t`-subsets in lexicographic order.
    options: Vec<Vec<Vec<usize>>>,
    count: u64,
}

/// Exact size of the choice space, `C(g(m-s), t)^C(m, s)`, or `None` on
/// overflow of `u128`.
pub fn choice_count(inst: &Instance) -> Option<u128> {
    let per = binomial(inst.eligible_count() as u64, inst.t as u64)? as u128;
    let r = u32::try_from(inst.receiver_count()).ok()?;
    per.checked_pow(r)
}

/// Streams every exact-`t` decoding choice, refusing when the space is larger
/// than `budget`.
pub fn enumerate_choices(inst: &Instance, budget: u64) -> Result<ChoiceSpace> {
    let count = choice_count(inst);
    match count {
        Some(c) if c <= budget as u128 => {}
        other => {
            return Err(Error::BudgetExceeded {
                count: other.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string()),
                budget,
            })
        }
    }
    let receivers = enumerate_receivers(inst);
    let options = receivers
        .iter()
        .map(|r| {
            let eligible: Vec<usize> = (1..=inst.message_count())
                .filter(|&j| !inst.holds(r, j))
                .collect();
            combinations(&eligible, inst.t)
        })
        .collect();
    Ok(ChoiceSpace {
        inst: *inst,
        receivers,
        options,
        count: count.unwrap() as u64,
    })
}

/// Uniformly random exact-`t` choice: an independent `t`-subset of eligible
/// messages per receiver.
pub fn random_choice<R: Rng>(inst: &Instance, rng: &mut R) -> DecodingChoice {
    let assignments = enumerate_receivers(inst)
        .into_iter()
        .map(|r| {
            let eligible: Vec<usize> = (1..=inst.message_count())
                .filter(|&j| !inst.holds(&r, j))
                .collect();
            let picked = sample(rng, eligible.len(), inst.t)
                .into_iter()
                .map(|i| eligible[i])
                .collect();
            (r, picked)
        })
        .collect();
    DecodingChoice {
        assignments,
        generalized: false,
    }
}

impl ChoiceSpace {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn choice_at(&self, index: u64) -> DecodingChoice {
        assert!(index < self.count, "choice index {index} out of range");
        let mut rem = index;
        let mut digits = vec![0usize; self.receivers.len()];
        for (i, opts) in self.options.iter().enumerate().rev() {
            let base = opts.len() as u64;
            digits[i] = (rem % base) as usize;
            rem /= base;
        }
        let assignments = self
            .receivers
            .iter()
            .zip(&digits)
            .zip(&self.options)
            .map(|((r, &d), opts)| (r.clone(), opts[d].iter().copied().collect()))
            .collect();
        DecodingChoice {
            assignments,
            generalized: false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = DecodingChoice> + '_ {
        self.range(0..self.count)
    }

    pub fn range(&self, range: Range<u64>) -> impl Iterator<Item = DecodingChoice> + '_ {
        let end = range.end.min(self.count);
        (range.start..end).map(move |i| self.choice_at(i))
    }

    /// Splits `0..count` into at most `parts` contiguous, disjoint ranges.
    pub fn partition(&self, parts: usize) -> Vec<Range<u64>> {
        let parts = parts.max(1) as u64;
        let chunk = self.count.div_ceil(parts).max(1);
        (0..self.count)
            .step_by(chunk as usize)
            .map(|start| start..(start + chunk).min(self.count))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: usize, s: usize, g: usize, t: usize) -> Instance {
        Instance::new(m, s, g, t).unwrap()
    }

    fn groups(rs: &[ReceiverId]) -> Vec<Vec<usize>> {
        rs.iter().map(|r| r.groups().to_vec()).collect()
    }

    #[test]
    fn validation() {
        assert!(Instance::new(3, 3, 1, 1).is_err());
        assert!(Instance::new(1, 1, 1, 1).is_err());
        assert!(Instance::new(3, 1, 1, 0).is_err());
        assert!(Instance::new(3, 0, 1, 1).is_err());
        assert!(Instance::new(2, 1, 1, 2).is_err());
        assert!(Instance::new(4, 1, 2, 6).is_ok());
        assert!(Instance::new(4, 1, 2, 7).is_err());
        assert!(Instance::with_field_width(5, 1, 1, 1, 2).is_err());
        assert!(Instance::with_field_width(4, 1, 1, 1, 2).is_ok());
    }

    #[test]
    fn receivers_in_lexicographic_order() {
        assert_eq!(
            groups(&inst(3, 1, 1, 1).receivers()),
            vec![vec![1], vec![2], vec![3]]
        );
        assert_eq!(
            groups(&inst(3, 2, 1, 1).receivers()),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        // s = m never validates (t >= 1); the subset enumeration itself still
        // yields the single full set
        assert_eq!(combinations(&[1, 2, 3, 4, 5], 5), vec![vec![1, 2, 3, 4, 5]]);
    }

    #[test]
    fn smallest_receiver_count_is_m() {
        let i = inst(5, 4, 1, 1);
        assert_eq!(i.receiver_count(), 5);
        assert_eq!(enumerate_receivers(&i).len(), 5);
    }

    #[test]
    fn side_information() {
        let i = inst(3, 1, 2, 1);
        let r1 = ReceiverId::new(&i, vec![1]).unwrap();
        assert_eq!(side_info_messages(&i, &r1), BTreeSet::from([1, 2]));
        let i2 = inst(3, 2, 2, 1);
        let r12 = ReceiverId::new(&i2, vec![1, 2]).unwrap();
        assert_eq!(side_info_messages(&i2, &r12), BTreeSet::from([1, 2, 3, 4]));
        let i3 = inst(3, 1, 1, 1);
        let r3 = ReceiverId::new(&i3, vec![3]).unwrap();
        assert_eq!(side_info_messages(&i3, &r3), BTreeSet::from([3]));
        for i in [inst(4, 2, 3, 2), inst(5, 3, 2, 1)] {
            for r in i.receivers() {
                assert_eq!(i.side_info(&r).len(), i.g() * i.s());
            }
        }
    }

    #[test]
    fn message_groups() {
        let i = inst(4, 1, 2, 1);
        assert_eq!(group_of(&i, 1).unwrap(), 1);
        assert_eq!(group_of(&i, 4).unwrap(), 2);
        assert_eq!(inst(3, 1, 3, 1).group_of(7).unwrap(), 3);
        assert!(i.group_of(0).is_err());
        assert!(i.group_of(9).is_err());
    }

    #[test]
    fn receiver_validation() {
        let i = inst(4, 2, 1, 1);
        assert!(ReceiverId::new(&i, vec![2, 1]).is_err());
        assert!(ReceiverId::new(&i, vec![1]).is_err());
        assert!(ReceiverId::new(&i, vec![1, 5]).is_err());
        assert_eq!(
            ReceiverId::new(&i, vec![1, 3]).unwrap().to_string(),
            "{1,3}"
        );
    }

    #[test]
    fn choice_validation() {
        let i = inst(3, 1, 1, 1);
        let ok = DecodingChoice::from_pairs(&i, &[(&[1], &[2]), (&[2], &[3]), (&[3], &[1])], false);
        assert!(ok.is_ok());

        let mut map = ok.unwrap().assignments().clone();
        let r2 = ReceiverId::new(&i, vec![2]).unwrap();
        map.insert(r2.clone(), BTreeSet::from([2]));
        let bad = DecodingChoice::from_assignments(map.clone(), false);
        let v = validate_choice(&i, &bad).unwrap_err();
        assert_eq!(v.receiver, Some(r2.clone()));
        assert!(v.reason.contains("side information"));

        map.insert(r2.clone(), BTreeSet::from([1, 3]));
        assert!(
            validate_choice(&i, &DecodingChoice::from_assignments(map.clone(), false)).is_err()
        );
        assert!(validate_choice(&i, &DecodingChoice::from_assignments(map.clone(), true)).is_ok());

        map.remove(&r2);
        let v = validate_choice(&i, &DecodingChoice::from_assignments(map, true)).unwrap_err();
        assert_eq!(v.receiver, Some(r2));
    }

    #[test]
    fn choice_space_sizes() {
        assert_eq!(
            enumerate_choices(&inst(3, 1, 1, 1), 1000).unwrap().count(),
            8
        );
        assert_eq!(
            enumerate_choices(&inst(2, 1, 1, 1), 1000).unwrap().count(),
            1
        );
        assert_eq!(
            enumerate_choices(&inst(3, 1, 2, 3), 1000).unwrap().count(),
            64
        );
        assert_eq!(choice_count(&inst(4, 1, 2, 4)), Some(50625));
        match enumerate_choices(&inst(4, 1, 2, 4), 1000) {
            Err(Error::BudgetExceeded { count, budget }) => {
                assert_eq!(count, "50625");
                assert_eq!(budget, 1000);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_valid() {
        for i in [
            inst(3, 1, 1, 1),
            inst(3, 1, 2, 3),
            inst(4, 2, 1, 1),
            inst(4, 1, 1, 2),
        ] {
            let space = enumerate_choices(&i, 10_000).unwrap();
            let all: Vec<_> = space.iter().collect();
            assert_eq!(all.len() as u128, choice_count(&i).unwrap());
            for d in &all {
                validate_choice(&i, d).unwrap();
            }
            let keys: Vec<Vec<Vec<usize>>> = all
                .iter()
                .map(|d| {
                    d.assignments()
                        .values()
                        .map(|s| s.iter().copied().collect())
                        .collect()
                })
                .collect();
            assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn partition_covers_space() {
        let space = enumerate_choices(&inst(3, 1, 2, 3), 1000).unwrap();
        for parts in [1, 3, 7, 64, 100] {
            let ranges = space.partition(parts);
            assert!(ranges.len() <= parts);
            assert_eq!(ranges.first().unwrap().start, 0);
            assert_eq!(ranges.last().unwrap().end, 64);
            assert!(ranges.windows(2).all(|w| w[0].end == w[1].start));
        }
    }

    #[test]
    fn json_formats() {
        let i: Instance =
            serde_json::from_str(r#"{"m":4,"s":1,"g":2,"t":3,"field_width":8}"#).unwrap();
        assert_eq!(
            (i.m(), i.s(), i.g(), i.t(), i.field().width()),
            (4, 1, 2, 3, 8)
        );
        assert_eq!(
            serde_json::to_string(&i).unwrap(),
            r#"{"m":4,"s":1,"g":2,"t":3,"field_width":8}"#
        );
        assert!(serde_json::from_str::<Instance>(r#"{"m":3,"s":3,"g":1,"t":1}"#).is_err());

        let d = DecodingChoice::from_json(
            &inst(2, 1, 1, 1),
            r#"[{"receiver":[1],"messages":[2]},{"receiver":[2],"messages":[1]}]"#,
        )
        .unwrap();
        assert!(!d.is_generalized());
        let back = DecodingChoice::from_json(&inst(2, 1, 1, 1), &d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!(DecodingChoice::from_json(
            &inst(2, 1, 1, 1),
            r#"[{"receiver":[1],"messages":[1]}]"#
        )
        .is_err());
    }

    #[test]
    fn random_choices_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (m, s, g, t) in [(3, 1, 1, 1), (4, 1, 2, 4), (5, 2, 3, 5)] {
            let i = inst(m, s, g, t);
            for _ in 0..20 {
                validate_choice(&i, &random_choice(&i, &mut rng)).unwrap();
            }
        }
    }
}
