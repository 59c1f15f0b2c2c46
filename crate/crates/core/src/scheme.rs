//! The multi-round achievability code.
//!
//! `q = floor(t/(m-s))` MDS rounds each send `m - s` combinations of one
//! message slot across all `m` groups; every receiver already holds `s` of
//! those symbols and solves for the other `m - s`. If `t' = t - q(m-s) > 0`,
//! one more round covers slot `q + 1`: uncoded messages from groups
//! `1..=s+t'` when `s + t' < m - s`, otherwise another MDS round.
//!
//! Simulation uses one field symbol per message, so the rate is the number of
//! transmitted symbols.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{FieldElement, GaloisField};
use crate::instance::{DecodingChoice, Instance, ReceiverId};
use crate::mds::MdsMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundKind {
    Mds,
    Uncoded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub kind: RoundKind,
    /// Message position inside each group, `1..=g`.
    pub slot: usize,
    pub message_indices: Vec<usize>,
    pub symbol_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodePlan {
    pub instance: Instance,
    pub rounds: Vec<Round>,
    pub rate: usize,
}

/// `min{s + t, ceil(t/(m-s)) (m-s)}`.
pub fn coded_rate(m: usize, s: usize, t: usize) -> usize {
    let k = m - s;
    (s + t).min(t.div_ceil(k) * k)
}

pub fn build_plan(inst: &Instance) -> CodePlan {
    let (m, s, g, t) = (inst.m(), inst.s(), inst.g(), inst.t());
    let k = m - s;
    let full = t / k;
    let slot_messages = |slot: usize, groups: usize| -> Vec<usize> {
        (0..groups).map(|grp| grp * g + slot).collect()
    };

    let mut rounds: Vec<Round> = (1..=full)
        .map(|slot| Round {
            kind: RoundKind::Mds,
            slot,
            message_indices: slot_messages(slot, m),
            symbol_count: k,
        })
        .collect();

    let rest = t - full * k;
    if rest > 0 {
        let slot = full + 1;
        rounds.push(if s + rest < k {
            Round {
                kind: RoundKind::Uncoded,
                slot,
                message_indices: slot_messages(slot, s + rest),
                symbol_count: s + rest,
            }
        } else {
            Round {
                kind: RoundKind::Mds,
                slot,
                message_indices: slot_messages(slot, m),
                symbol_count: k,
            }
        });
    }

    let rate = rounds.iter().map(|r| r.symbol_count).sum();
    CodePlan {
        instance: *inst,
        rounds,
        rate,
    }
}

impl CodePlan {
    fn field(&self) -> &'static GaloisField {
        GaloisField::get(self.instance.field())
    }

    fn mds(&self) -> Result<MdsMatrix> {
        let inst = &self.instance;
        MdsMatrix::new(inst.m(), inst.m() - inst.s(), self.field())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Every message some round carries.
    pub fn transmitted(&self) -> BTreeSet<usize> {
        self.rounds
            .iter()
            .flat_map(|r| r.message_indices.iter().copied())
            .collect()
    }

    /// Fresh messages `r` ends up with, derived from the round structure.
    pub fn delivered(&self, r: &ReceiverId) -> BTreeSet<usize> {
        self.transmitted()
            .into_iter()
            .filter(|&j| !self.instance.holds(r, j))
            .collect()
    }

    pub fn encode(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let inst = &self.instance;
        if x.len() != inst.message_count() {
            return Err(Error::LengthMismatch {
                expected: inst.message_count(),
                got: x.len(),
            });
        }
        let field = self.field();
        let mds = self.mds()?;
        let mut out = Vec::with_capacity(self.rate);
        for round in &self.rounds {
            let covered: Vec<FieldElement> =
                round.message_indices.iter().map(|&j| x[j - 1]).collect();
            match round.kind {
                RoundKind::Mds => out.extend(mds.encode(field, &covered)?),
                RoundKind::Uncoded => out.extend(covered),
            }
        }
        Ok(out)
    }

    /// Decodes the fresh messages `r` can recover, keyed by message index.
    pub fn decode(
        &self,
        r: &ReceiverId,
        broadcast: &[FieldElement],
        side_values: &BTreeMap<usize, FieldElement>,
    ) -> Result<BTreeMap<usize, FieldElement>> {
        if broadcast.len() != self.rate {
            return Err(Error::LengthMismatch {
                expected: self.rate,
                got: broadcast.len(),
            });
        }
        let inst = &self.instance;
        let field = self.field();
        let mds = self.mds()?;
        let mut out = BTreeMap::new();
        let mut offset = 0;
        for round in &self.rounds {
            let symbols = &broadcast[offset..offset + round.symbol_count];
            offset += round.symbol_count;
            match round.kind {
                RoundKind::Mds => {
                    let mut known = BTreeMap::new();
                    for (pos, &j) in round.message_indices.iter().enumerate() {
                        if inst.holds(r, j) {
                            let v = side_values.get(&j).ok_or(Error::KnownPosition(j))?;
                            known.insert(pos, *v);
                        }
                    }
                    let full = mds.recover(field, symbols, &known)?;
                    for (pos, &j) in round.message_indices.iter().enumerate() {
                        if !inst.holds(r, j) {
                            out.insert(j, full[pos]);
                        }
                    }
                }
                RoundKind::Uncoded => {
                    for (&j, &v) in round.message_indices.iter().zip(symbols) {
                        if !inst.holds(r, j) {
                            out.insert(j, v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Per receiver, the `t` smallest fresh messages the plan delivers.
pub fn implied_choice(plan: &CodePlan, inst: &Instance) -> Result<DecodingChoice> {
    let mut map = BTreeMap::new();
    for r in inst.receivers() {
        let fresh = plan.delivered(&r);
        if fresh.len() < inst.t() {
            return Err(Error::Undelivered {
                receiver: r.to_string(),
                delivered: fresh.len(),
                needed: inst.t(),
            });
        }
        map.insert(r, fresh.into_iter().take(inst.t()).collect());
    }
    DecodingChoice::new(inst, map, false)
}

/// Outcome of running the plan over random message vectors.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub trials: usize,
    pub rate: usize,
    pub broadcast_len: usize,
    /// Smallest fresh-decode count seen per receiver.
    pub fresh_per_receiver: Vec<(ReceiverId, usize)>,
    pub all_correct: bool,
    pub all_satisfied: bool,
    /// Receivers that missed some transmitted message they lack.
    pub broadcast_violations: Vec<(ReceiverId, usize)>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.all_correct && self.all_satisfied && self.broadcast_len == self.rate
    }
}

pub fn simulate(plan: &CodePlan, trials: usize, seed: u64) -> Result<SimulationReport> {
    let inst = &plan.instance;
    let receivers = inst.receivers();
    let order = inst.field().order() as u32;
    let transmitted = plan.transmitted();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fresh_min = vec![usize::MAX; receivers.len()];
    let mut all_correct = true;
    let mut broadcast_len = plan.rate;
    let mut violations = BTreeSet::new();

    for _ in 0..trials {
        let x: Vec<FieldElement> = (0..inst.message_count())
            .map(|_| FieldElement(rng.gen_range(0..order) as u16))
            .collect();
        let y = plan.encode(&x)?;
        broadcast_len = y.len();
        for (idx, r) in receivers.iter().enumerate() {
            let side: BTreeMap<usize, FieldElement> = inst
                .side_info(r)
                .into_iter()
                .map(|j| (j, x[j - 1]))
                .collect();
            let got = plan.decode(r, &y, &side)?;
            fresh_min[idx] = fresh_min[idx].min(got.len());
            if got.iter().any(|(&j, &v)| x[j - 1] != v || inst.holds(r, j)) {
                all_correct = false;
            }
            for &j in &transmitted {
                if !inst.holds(r, j) && got.get(&j) != Some(&x[j - 1]) {
                    violations.insert((r.clone(), j));
                }
            }
        }
    }

    let fresh_per_receiver: Vec<(ReceiverId, usize)> = receivers
        .into_iter()
        .zip(fresh_min)
        .map(|(r, c)| (r, if trials == 0 { 0 } else { c }))
        .collect();
    let all_satisfied = trials == 0 || fresh_per_receiver.iter().all(|(_, c)| *c >= inst.t());
    Ok(SimulationReport {
        seed,
        trials,
        rate: plan.rate,
        broadcast_len,
        fresh_per_receiver,
        all_correct,
        all_satisfied,
        broadcast_violations: violations.into_iter().collect(),
    })
}

/// Messages `r` learns from its own decoding set plus repeated emulation of
/// other receivers, sweeping receivers in lexicographic order until stable.
pub fn emulation_closure(inst: &Instance, d: &DecodingChoice, r: &ReceiverId) -> BTreeSet<usize> {
    let order: Vec<ReceiverId> = d.assignments().keys().cloned().collect();
    emulation_closure_in_order(inst, d, r, &order)
}

/// [`emulation_closure`] with an explicit sweep order over candidate receivers.
pub fn emulation_closure_in_order(
    inst: &Instance,
    d: &DecodingChoice,
    r: &ReceiverId,
    order: &[ReceiverId],
) -> BTreeSet<usize> {
    let mut decoded: BTreeSet<usize> = d.get(r).cloned().unwrap_or_default();
    let mut emulated: BTreeSet<&ReceiverId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for other in order {
            if other == r || emulated.contains(other) {
                continue;
            }
            if can_emulate(inst, r, other, &decoded) {
                emulated.insert(other);
                if let Some(msgs) = d.get(other) {
                    for &j in msgs {
                        if !inst.holds(r, j) && decoded.insert(j) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return decoded;
        }
    }
}

/// `r` can run `other`'s decoder once it knows every message that `other`
/// holds and `r` does not.
pub fn can_emulate(
    inst: &Instance,
    r: &ReceiverId,
    other: &ReceiverId,
    decoded: &BTreeSet<usize>,
) -> bool {
    other
        .groups()
        .iter()
        .filter(|&&grp| !r.contains_group(grp))
        .all(|&grp| inst.group_messages(grp).all(|j| decoded.contains(&j)))
}

/// Every receiver's assignment replaced by its emulation closure.
pub fn closure_choice(inst: &Instance, d: &DecodingChoice) -> DecodingChoice {
    let map = d
        .assignments()
        .keys()
        .map(|r| (r.clone(), emulation_closure(inst, d, r)))
        .collect();
    DecodingChoice::from_assignments(map, true)
}
