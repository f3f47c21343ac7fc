//! Combining pairwise decisions into one label. Phones are identified by
//! their index in label order; `outcome(i, j)` with `i < j` returns the
//! index of the pair's winner.

use crate::{Error, Result};

/// Votes per phone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTally {
    pub votes: Vec<usize>,
}

impl VoteTally {
    pub fn total(&self) -> usize {
        self.votes.iter().sum()
    }
}

/// How pairwise classifiers are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Voting {
    AllVsAll,
    /// Eliminate down to this many survivors, then all-vs-all.
    Hierarchical(usize),
    OneVsAll,
}

impl std::fmt::Display for Voting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Voting::AllVsAll => f.write_str("ava"),
            Voting::Hierarchical(n) => write!(f, "hier:{n}"),
            Voting::OneVsAll => f.write_str("ova"),
        }
    }
}

impl std::str::FromStr for Voting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ava" => Ok(Voting::AllVsAll),
            "ova" => Ok(Voting::OneVsAll),
            _ => s
                .strip_prefix("hier:")
                .and_then(|n| n.parse().ok())
                .map(Voting::Hierarchical)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("voting must be ava, ova or hier:N, got `{s}`"))
                }),
        }
    }
}

fn check_winner(i: usize, j: usize, w: usize) -> Result<usize> {
    if w == i || w == j {
        Ok(w)
    } else {
        Err(Error::Model(format!("pair ({i}, {j}) reported winner {w}")))
    }
}

/// One vote per pair among `candidates`. Returns the phone with the most
/// votes (ties to the earliest in label order) and the tally over all `n`
/// phones.
pub fn vote_all_vs_all(
    n: usize,
    candidates: &[usize],
    mut outcome: impl FnMut(usize, usize) -> Result<usize>,
) -> Result<(usize, VoteTally)> {
    let mut c = candidates.to_vec();
    c.sort_unstable();
    c.dedup();
    if c.is_empty() || c.iter().any(|&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "candidates must be nonempty phone indices below {n}"
        )));
    }
    let mut votes = vec![0; n];
    for (a, &i) in c.iter().enumerate() {
        for &j in &c[a + 1..] {
            votes[check_winner(i, j, outcome(i, j)?)?] += 1;
        }
    }
    let mut best = c[0];
    for &i in &c[1..] {
        if votes[i] > votes[best] {
            best = i;
        }
    }
    Ok((best, VoteTally { votes }))
}

/// Result of elimination voting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub winner: usize,
    /// Phones in the order they were removed.
    pub eliminated: Vec<usize>,
    /// All-vs-all tally among the final survivors.
    pub tally: VoteTally,
}

/// Repeatedly tallies votes among the surviving phones only and removes the
/// one with the fewest (ties: the latest in label order) until `n1` remain,
/// then runs all-vs-all among them. Each pair is consulted at most once.
pub fn vote_hierarchical(
    n: usize,
    n1: usize,
    mut outcome: impl FnMut(usize, usize) -> Result<usize>,
) -> Result<Elimination> {
    if n1 < 2 || n1 > n {
        return Err(Error::InvalidArgument(format!(
            "hierarchical survivor count must be in 2..={n}, got {n1}"
        )));
    }
    let mut memo: Vec<Option<usize>> = vec![None; n * n];
    let mut cached = |i: usize, j: usize| -> Result<usize> {
        if let Some(w) = memo[i * n + j] {
            return Ok(w);
        }
        let w = check_winner(i, j, outcome(i, j)?)?;
        memo[i * n + j] = Some(w);
        Ok(w)
    };
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut eliminated = Vec::new();
    while survivors.len() > n1 {
        let (_, tally) = vote_all_vs_all(n, &survivors, &mut cached)?;
        let mut worst = 0;
        for (k, &i) in survivors.iter().enumerate() {
            if tally.votes[i] <= tally.votes[survivors[worst]] {
                worst = k;
            }
        }
        eliminated.push(survivors.remove(worst));
    }
    let (winner, tally) = vote_all_vs_all(n, &survivors, &mut cached)?;
    Ok(Elimination {
        winner,
        eliminated,
        tally,
    })
}

/// Index of the largest score; ties go to the earliest.
pub fn vote_one_vs_all(scores: &[f64]) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no one-vs-all scores".into()));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}
