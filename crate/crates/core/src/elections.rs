//! Committee elections over article rankings.
//!
//! Users are voters and articles are candidates; each voter ranks every
//! article by its completed score. All rules are deterministic and share
//! one tie-break: the candidate with the smaller id wins (STV eliminates
//! the larger id on a tie).
//!
//! Chamberlin-Courant and Monroe are NP-hard. The default `cc` and
//! `monroe` rules are greedy; `cc-exact` and `monroe-exact` enumerate all
//! committees and are guarded against large instances.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;

/// Largest number of committees the exact solvers will enumerate.
pub const EXACT_MAX_COMMITTEES: u128 = 1_000_000;
/// Largest electorate `monroe_exact` accepts.
pub const MONROE_EXACT_MAX_VOTERS: usize = 12;

const TALLY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Sntv,
    KBorda,
    Bloc,
    Stv,
    Cc,
    Monroe,
    CcExact,
    MonroeExact,
}

impl Rule {
    /// The six rules of the standard results table, in table order.
    pub const DEFAULT: [Rule; 6] = [
        Rule::Sntv,
        Rule::KBorda,
        Rule::Bloc,
        Rule::Stv,
        Rule::Cc,
        Rule::Monroe,
    ];

    pub const ALL: [Rule; 8] = [
        Rule::Sntv,
        Rule::KBorda,
        Rule::Bloc,
        Rule::Stv,
        Rule::Cc,
        Rule::Monroe,
        Rule::CcExact,
        Rule::MonroeExact,
    ];

    /// Stable identifier used in file names and configs.
    pub fn id(self) -> &'static str {
        match self {
            Rule::Sntv => "sntv",
            Rule::KBorda => "k-borda",
            Rule::Bloc => "bloc",
            Rule::Stv => "stv",
            Rule::Cc => "cc",
            Rule::Monroe => "monroe",
            Rule::CcExact => "cc-exact",
            Rule::MonroeExact => "monroe-exact",
        }
    }

    /// Name as printed in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Rule::Sntv => "SNTV",
            Rule::KBorda => "k-Borda",
            Rule::Bloc => "Bloc",
            Rule::Stv => "STV",
            Rule::Cc => "CC",
            Rule::Monroe => "Monroe",
            Rule::CcExact => "CC (exact)",
            Rule::MonroeExact => "Monroe (exact)",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        Ok(match key.as_str() {
            "sntv" => Rule::Sntv,
            "kborda" | "borda" => Rule::KBorda,
            "bloc" => Rule::Bloc,
            "stv" => Rule::Stv,
            "cc" | "chamberlincourant" => Rule::Cc,
            "monroe" => Rule::Monroe,
            "ccexact" => Rule::CcExact,
            "monroeexact" => Rule::MonroeExact,
            _ => {
                return Err(Error::Unknown {
                    what: "voting rule",
                    id: s.to_string(),
                })
            }
        })
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Strict rankings of every candidate, one per voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotProfile {
    candidates: Vec<String>,
    voters: Vec<String>,
    rankings: Vec<Vec<usize>>,
    /// Position of each candidate in ascending id order.
    tie_rank: Vec<usize>,
    /// `positions[v][c]` is where voter `v` ranks candidate `c`.
    positions: Vec<Vec<usize>>,
}

impl BallotProfile {
    /// `rankings[v]` lists candidate indices from most to least preferred.
    pub fn new(
        candidates: Vec<String>,
        voters: Vec<String>,
        rankings: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Empty("candidates"));
        }
        if voters.is_empty() {
            return Err(Error::Empty("voters"));
        }
        if rankings.len() != voters.len() {
            return Err(Error::InvalidConfig(format!(
                "{} voters but {} rankings",
                voters.len(),
                rankings.len()
            )));
        }
        let m = candidates.len();
        if candidates.iter().collect::<BTreeSet<_>>().len() != m {
            return Err(Error::InvalidConfig("candidate ids are not unique".into()));
        }
        let mut positions = Vec::with_capacity(rankings.len());
        for (v, ranking) in rankings.iter().enumerate() {
            let mut pos = vec![usize::MAX; m];
            if ranking.len() != m {
                return Err(Error::InvalidConfig(format!(
                    "ranking of voter `{}` is not a permutation of the candidates",
                    voters[v]
                )));
            }
            for (p, &c) in ranking.iter().enumerate() {
                if c >= m || pos[c] != usize::MAX {
                    return Err(Error::InvalidConfig(format!(
                        "ranking of voter `{}` is not a permutation of the candidates",
                        voters[v]
                    )));
                }
                pos[c] = p;
            }
            positions.push(pos);
        }
        let mut by_id: Vec<usize> = (0..m).collect();
        by_id.sort_by(|&a, &b| candidates[a].cmp(&candidates[b]));
        let mut tie_rank = vec![0; m];
        for (r, &c) in by_id.iter().enumerate() {
            tie_rank[c] = r;
        }
        Ok(Self {
            candidates,
            voters,
            rankings,
            tie_rank,
            positions,
        })
    }

    /// Each user ranks articles by descending `V*` score, ties to the
    /// smaller article id.
    pub fn from_scores(scores: &ScoreMatrix) -> Result<Self> {
        let rankings = (0..scores.n_users())
            .map(|u| scores.preference_order(u))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            scores.articles().to_vec(),
            scores.users().to_vec(),
            rankings,
        )
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn voters(&self) -> &[String] {
        &self.voters
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn n_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn position(&self, voter: usize, candidate: usize) -> usize {
        self.positions[voter][candidate]
    }

    /// Borda score `m − 1 − position` a voter gives a candidate.
    pub fn borda(&self, voter: usize, candidate: usize) -> u64 {
        (self.candidates.len() - 1 - self.positions[voter][candidate]) as u64
    }

    pub fn candidate_index(&self, id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == id)
    }

    /// Orders candidate indices by id, the global tie-break order.
    fn by_id(&self, a: usize, b: usize) -> Ordering {
        self.tie_rank[a].cmp(&self.tie_rank[b])
    }

    /// The `kappa` best candidates by descending score, ties to smaller ids.
    fn top_by_score(&self, scores: &[u64], kappa: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_candidates()).collect();
        order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(self.by_id(a, b)));
        order.truncate(kappa);
        order
    }

    fn check_kappa(&self, kappa: usize) -> Result<()> {
        if kappa == 0 {
            return Err(Error::InvalidConfig("kappa must be at least 1".into()));
        }
        if kappa > self.n_candidates() {
            return Err(Error::KappaTooLarge {
                kappa,
                available: self.n_candidates(),
                what: "candidates",
            });
        }
        Ok(())
    }
}

/// A committee of `kappa` winning candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Committee {
    pub rule: Rule,
    pub kappa: usize,
    /// Winners in the order the rule selected them.
    pub winners: Vec<String>,
    /// Representative of each voter, for the CC and Monroe rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
}

impl Committee {
    fn from_indices(
        profile: &BallotProfile,
        rule: Rule,
        kappa: usize,
        winners: &[usize],
        assignment: Option<&[usize]>,
    ) -> Self {
        Committee {
            rule,
            kappa,
            winners: winners
                .iter()
                .map(|&c| profile.candidates[c].clone())
                .collect(),
            assignment: assignment.map(|a| {
                a.iter()
                    .enumerate()
                    .map(|(v, &c)| (profile.voters[v].clone(), profile.candidates[c].clone()))
                    .collect()
            }),
        }
    }

    pub fn winner_indices(&self, profile: &BallotProfile) -> Result<Vec<usize>> {
        self.winners
            .iter()
            .map(|w| {
                profile.candidate_index(w).ok_or_else(|| Error::Unknown {
                    what: "candidate",
                    id: w.clone(),
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let c: Committee = serde_json::from_reader(reader)?;
        if c.winners.len() != c.kappa {
            return Err(Error::KappaMismatch {
                kappa: c.kappa,
                actual: c.winners.len(),
            });
        }
        Ok(c)
    }
}

pub fn elect(profile: &BallotProfile, rule: Rule, kappa: usize) -> Result<Committee> {
    match rule {
        Rule::Sntv => sntv(profile, kappa),
        Rule::KBorda => k_borda(profile, kappa),
        Rule::Bloc => bloc(profile, kappa),
        Rule::Stv => stv(profile, kappa),
        Rule::Cc => chamberlin_courant_greedy(profile, kappa),
        Rule::Monroe => monroe_greedy(profile, kappa),
        Rule::CcExact => chamberlin_courant_exact(profile, kappa),
        Rule::MonroeExact => monroe_exact(profile, kappa),
    }
}

/// Top `kappa` by number of first places.
pub fn sntv(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    let mut firsts = vec![0u64; profile.n_candidates()];
    for ranking in &profile.rankings {
        firsts[ranking[0]] += 1;
    }
    let winners = profile.top_by_score(&firsts, kappa);
    Ok(Committee::from_indices(
        profile,
        Rule::Sntv,
        kappa,
        &winners,
        None,
    ))
}

/// Every voter approves their top `kappa`; most approvals win.
pub fn bloc(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    let mut approvals = vec![0u64; profile.n_candidates()];
    for ranking in &profile.rankings {
        for &c in &ranking[..kappa] {
            approvals[c] += 1;
        }
    }
    let winners = profile.top_by_score(&approvals, kappa);
    Ok(Committee::from_indices(
        profile,
        Rule::Bloc,
        kappa,
        &winners,
        None,
    ))
}

/// Top `kappa` by summed Borda score.
pub fn k_borda(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    let winners = profile.top_by_score(&borda_totals(profile), kappa);
    Ok(Committee::from_indices(
        profile,
        Rule::KBorda,
        kappa,
        &winners,
        None,
    ))
}

fn borda_totals(profile: &BallotProfile) -> Vec<u64> {
    let mut totals = vec![0u64; profile.n_candidates()];
    for v in 0..profile.n_voters() {
        for (c, total) in totals.iter_mut().enumerate() {
            *total += profile.borda(v, c);
        }
    }
    totals
}

/// Droop quota `⌊n / (kappa + 1)⌋ + 1`.
pub fn droop_quota(voters: usize, kappa: usize) -> usize {
    voters / (kappa + 1) + 1
}

/// Multi-winner STV with the Droop quota and fractional (Gregory) surplus
/// transfers.
///
/// Each round either elects the hopeful with the largest tally at or above
/// quota, forwarding its ballots at `weight × surplus / tally`, or
/// eliminates the lowest tally (larger id on a tie) and forwards its ballots
/// at full weight. Once the hopefuls exactly fill the open seats they are
/// all elected.
pub fn stv(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    let m = profile.n_candidates();
    let quota = droop_quota(profile.n_voters(), kappa) as f64;
    let mut hopeful = vec![true; m];
    let mut n_hopeful = m;
    let mut weights = vec![1.0f64; profile.n_voters()];
    let mut elected: Vec<usize> = Vec::with_capacity(kappa);

    let tally_cmp = |a: f64, b: f64| {
        if (a - b).abs() <= TALLY_EPS {
            Ordering::Equal
        } else {
            a.total_cmp(&b)
        }
    };

    while elected.len() < kappa {
        let top_hopeful = |v: usize| profile.rankings[v].iter().copied().find(|&c| hopeful[c]);
        let mut tallies = vec![0.0f64; m];
        for (v, &w) in weights.iter().enumerate() {
            if let Some(c) = top_hopeful(v) {
                tallies[c] += w;
            }
        }
        let mut remaining: Vec<usize> = (0..m).filter(|&c| hopeful[c]).collect();
        // best tally first, smaller id first among equals
        remaining.sort_by(|&a, &b| tally_cmp(tallies[b], tallies[a]).then(profile.by_id(a, b)));

        if n_hopeful == kappa - elected.len() {
            elected.extend(remaining);
            break;
        }

        let leader = remaining[0];
        if tallies[leader] >= quota - TALLY_EPS {
            let factor = (tallies[leader] - quota).max(0.0) / tallies[leader];
            for (v, w) in weights.iter_mut().enumerate() {
                if top_hopeful(v) == Some(leader) {
                    *w *= factor;
                }
            }
            hopeful[leader] = false;
            n_hopeful -= 1;
            elected.push(leader);
            log::trace!(
                "stv: elected {} with {:.4}",
                profile.candidates[leader],
                tallies[leader]
            );
        } else {
            // lowest tally, larger id among equals
            let loser = *remaining
                .iter()
                .min_by(|&&a, &&b| tally_cmp(tallies[a], tallies[b]).then(profile.by_id(b, a)))
                .expect("hopefuls outnumber open seats");
            hopeful[loser] = false;
            n_hopeful -= 1;
            log::trace!(
                "stv: eliminated {} with {:.4}",
                profile.candidates[loser],
                tallies[loser]
            );
        }
    }
    Ok(Committee::from_indices(
        profile,
        Rule::Stv,
        kappa,
        &elected,
        None,
    ))
}

/// Each voter's best Borda score among `winners` (0 if empty).
fn cc_representation(profile: &BallotProfile, winners: &[usize]) -> Vec<usize> {
    (0..profile.n_voters())
        .map(|v| {
            *winners
                .iter()
                .min_by_key(|&&c| profile.position(v, c))
                .expect("non-empty committee")
        })
        .collect()
}

/// Total Chamberlin-Courant satisfaction: every voter scores the committee
/// by the Borda score of their favourite member.
pub fn cc_satisfaction(profile: &BallotProfile, winners: &[usize]) -> u64 {
    if winners.is_empty() {
        return 0;
    }
    cc_representation(profile, winners)
        .iter()
        .enumerate()
        .map(|(v, &c)| profile.borda(v, c))
        .sum()
}

/// Summed Borda score of each voter for the representative assigned to them.
pub fn assignment_satisfaction(profile: &BallotProfile, assignment: &[usize]) -> u64 {
    assignment
        .iter()
        .enumerate()
        .map(|(v, &c)| profile.borda(v, c))
        .sum()
}

/// Greedy Chamberlin-Courant: repeatedly add the candidate with the largest
/// marginal gain in total satisfaction.
pub fn chamberlin_courant_greedy(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    let (m, n) = (profile.n_candidates(), profile.n_voters());
    let mut best = vec![0u64; n];
    let mut chosen = vec![false; m];
    let mut winners = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let mut pick: Option<(usize, u64)> = None;
        for c in (0..m).filter(|&c| !chosen[c]) {
            let gain: u64 = (0..n)
                .map(|v| profile.borda(v, c).saturating_sub(best[v]))
                .sum();
            let better = match pick {
                None => true,
                Some((pc, pg)) => gain > pg || (gain == pg && profile.by_id(c, pc).is_lt()),
            };
            if better {
                pick = Some((c, gain));
            }
        }
        let (c, _) = pick.expect("kappa <= m leaves a candidate");
        chosen[c] = true;
        winners.push(c);
        for (v, b) in best.iter_mut().enumerate() {
            *b = (*b).max(profile.borda(v, c));
        }
    }
    let assignment = cc_representation(profile, &winners);
    Ok(Committee::from_indices(
        profile,
        Rule::Cc,
        kappa,
        &winners,
        Some(&assignment),
    ))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

fn guard_enumeration(profile: &BallotProfile, kappa: usize) -> Result<()> {
    let count = binomial(profile.n_candidates(), kappa);
    if count > EXACT_MAX_COMMITTEES {
        return Err(Error::InstanceTooLarge {
            reason: format!(
                "C({}, {kappa}) = {count} committees exceeds {EXACT_MAX_COMMITTEES}",
                profile.n_candidates()
            ),
        });
    }
    Ok(())
}

/// Calls `visit` with every `kappa`-subset of `0..m`, in lexicographic order.
fn for_each_subset(m: usize, kappa: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..kappa).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..kappa).rev().find(|&i| idx[i] != i + m - kappa) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..kappa {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Candidate indices sorted by id, so lexicographic subsets over this list
/// are lexicographic in id.
fn candidates_by_id(profile: &BallotProfile) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profile.n_candidates()).collect();
    order.sort_by(|&a, &b| profile.by_id(a, b));
    order
}

/// Optimal Chamberlin-Courant committee by enumeration. Among optimal
/// committees the lexicographically smallest id sequence wins.
pub fn chamberlin_courant_exact(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    profile.check_kappa(kappa)?;
    guard_enumeration(profile, kappa)?;
    let order = candidates_by_id(profile);
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(kappa);
    for_each_subset(order.len(), kappa, |idx| {
        subset.clear();
        subset.extend(idx.iter().map(|&i| order[i]));
        let value = cc_satisfaction(profile, &subset);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, subset.clone()));
        }
    });
    let (_, winners) = best.expect("at least one subset");
    let assignment = cc_representation(profile, &winners);
    Ok(Committee::from_indices(
        profile,
        Rule::CcExact,
        kappa,
        &winners,
        Some(&assignment),
    ))
}

fn check_monroe(profile: &BallotProfile, kappa: usize) -> Result<()> {
    profile.check_kappa(kappa)?;
    if kappa > profile.n_voters() {
        return Err(Error::KappaTooLarge {
            kappa,
            available: profile.n_voters(),
            what: "voters (Monroe needs every winner to represent someone)",
        });
    }
    Ok(())
}

/// Greedy Monroe.
///
/// With `n = q·kappa + r`, the first `r` rounds fill groups of `q + 1`
/// voters and the rest groups of `q`. Each round tries every unchosen
/// candidate with the unassigned voters that rank it highest and keeps the
/// candidate whose group gains the most Borda satisfaction.
pub fn monroe_greedy(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    check_monroe(profile, kappa)?;
    let (m, n) = (profile.n_candidates(), profile.n_voters());
    let (q, r) = (n / kappa, n % kappa);
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut chosen = vec![false; m];
    let mut winners = Vec::with_capacity(kappa);

    for round in 0..kappa {
        let size = if round < r { q + 1 } else { q };
        let mut pick: Option<(usize, u64, Vec<usize>)> = None;
        for c in (0..m).filter(|&c| !chosen[c]) {
            let mut group: Vec<usize> = (0..n).filter(|&v| assigned[v].is_none()).collect();
            group.sort_by_key(|&v| (profile.position(v, c), v));
            group.truncate(size);
            let gain: u64 = group.iter().map(|&v| profile.borda(v, c)).sum();
            let better = match &pick {
                None => true,
                Some((pc, pg, _)) => gain > *pg || (gain == *pg && profile.by_id(c, *pc).is_lt()),
            };
            if better {
                pick = Some((c, gain, group));
            }
        }
        let (c, _, group) = pick.expect("kappa <= m leaves a candidate");
        chosen[c] = true;
        winners.push(c);
        for v in group {
            assigned[v] = Some(c);
        }
    }
    let assignment: Vec<usize> = assigned
        .into_iter()
        .map(|a| a.expect("group sizes cover every voter"))
        .collect();
    Ok(Committee::from_indices(
        profile,
        Rule::Monroe,
        kappa,
        &winners,
        Some(&assignment),
    ))
}

/// Best balanced assignment of all voters to `winners`: every winner gets
/// `⌊n/kappa⌋` or `⌈n/kappa⌉` voters. Returns the total satisfaction and the
/// representative of each voter.
pub fn balanced_assignment(profile: &BallotProfile, winners: &[usize]) -> (u64, Vec<usize>) {
    let n = profile.n_voters();
    let kappa = winners.len();
    let (q, r) = (n / kappa, n % kappa);
    // q mandatory slots per winner, plus one optional slot when n % kappa > 0;
    // the bonus forces every mandatory slot to be filled first
    let mut slots: Vec<(usize, bool)> = Vec::with_capacity(n + kappa);
    for &w in winners {
        slots.extend(std::iter::repeat_n((w, true), q));
        if r > 0 {
            slots.push((w, false));
        }
    }
    let bonus = (n * profile.n_candidates()) as i64 + 1;
    let cols = slots.len();
    let mut cost = Vec::with_capacity(n * cols);
    for v in 0..n {
        for &(w, mandatory) in &slots {
            let gain = profile.borda(v, w) as i64 + if mandatory { bonus } else { 0 };
            cost.push(-gain);
        }
    }
    let (cols_of, _) = min_cost_assignment(&cost, n, cols);
    let assignment: Vec<usize> = cols_of.iter().map(|&j| slots[j].0).collect();
    (assignment_satisfaction(profile, &assignment), assignment)
}

/// Optimal Monroe committee by enumerating committees and solving each
/// balanced assignment exactly.
pub fn monroe_exact(profile: &BallotProfile, kappa: usize) -> Result<Committee> {
    check_monroe(profile, kappa)?;
    if profile.n_voters() > MONROE_EXACT_MAX_VOTERS {
        return Err(Error::InstanceTooLarge {
            reason: format!(
                "{} voters exceeds {MONROE_EXACT_MAX_VOTERS}",
                profile.n_voters()
            ),
        });
    }
    guard_enumeration(profile, kappa)?;
    let order = candidates_by_id(profile);
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(kappa);
    for_each_subset(order.len(), kappa, |idx| {
        subset.clear();
        subset.extend(idx.iter().map(|&i| order[i]));
        let (value, assignment) = balanced_assignment(profile, &subset);
        if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
            best = Some((value, subset.clone(), assignment));
        }
    });
    let (_, winners, assignment) = best.expect("at least one subset");
    Ok(Committee::from_indices(
        profile,
        Rule::MonroeExact,
        kappa,
        &winners,
        Some(&assignment),
    ))
}
