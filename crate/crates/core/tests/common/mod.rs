#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cpda_core::combinatorics::binomial;
use cpda_core::constructions::{lemma1_pda, lemma2_pda, man_pda, GridParams, ManParams};
use cpda_core::pda::{delete_columns, Entry, PdaArray};
use cpda_core::resolvable::{parallel_classes, ParallelClassPartition, UserLabel};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Networks with `r | h` and `h <= max_h`.
pub fn resolvable_networks(max_h: usize) -> Vec<(usize, usize)> {
    (1..=max_h)
        .flat_map(|h| (1..=h).filter(move |r| h % r == 0).map(move |r| (h, r)))
        .collect()
}

/// Independent PDA check straight from the definition.
pub struct OracleReport {
    pub valid: bool,
    pub z: usize,
    pub g: Option<usize>,
}

pub fn oracle_check(a: &PdaArray) -> OracleReport {
    let (f, k) = (a.num_rows(), a.num_cols());
    let stars: Vec<usize> = (0..k)
        .map(|c| (0..f).filter(|&j| a.get(j, c) == Entry::Star).count())
        .collect();
    let mut valid = stars.iter().all(|&z| z == stars[0]);
    let mut cells: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for j in 0..f {
        for c in 0..k {
            if let Entry::Symbol(s) = a.get(j, c) {
                cells.entry(s).or_default().push((j, c));
            }
        }
    }
    valid &= (1..=a.symbol_count()).all(|s| cells.contains_key(&s));
    for list in cells.values() {
        for (x, &(j1, k1)) in list.iter().enumerate() {
            for &(j2, k2) in &list[x + 1..] {
                valid &= j1 != j2
                    && k1 != k2
                    && a.get(j1, k2) == Entry::Star
                    && a.get(j2, k1) == Entry::Star;
            }
        }
    }
    let counts: BTreeSet<usize> = cells.values().map(Vec::len).collect();
    let g = if a.symbol_count() > 0 && counts.len() == 1 && cells.len() == a.symbol_count() as usize
    {
        counts.into_iter().next()
    } else {
        None
    };
    OracleReport {
        valid,
        z: stars[0],
        g,
    }
}

/// Symbols used per relay recomputed from scratch: for each symbol the
/// intersection of the labels of its columns.
pub fn oracle_intersections(a: &PdaArray, labels: &[UserLabel]) -> BTreeMap<u32, BTreeSet<usize>> {
    let mut out: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for j in 0..a.num_rows() {
        for c in 0..a.num_cols() {
            if let Entry::Symbol(s) = a.get(j, c) {
                let label: BTreeSet<usize> = labels[c].elements().iter().copied().collect();
                out.entry(s)
                    .and_modify(|acc| *acc = acc.intersection(&label).copied().collect())
                    .or_insert(label);
            }
        }
    }
    out
}

/// Row, column and symbol relabelling of a PDA.
pub fn permute(a: &PdaArray, rng: &mut ChaCha8Rng) -> PdaArray {
    let mut rows: Vec<usize> = (0..a.num_rows()).collect();
    let mut cols: Vec<usize> = (0..a.num_cols()).collect();
    let mut syms: Vec<u32> = (1..=a.symbol_count()).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    syms.shuffle(rng);
    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    for &j in &rows {
        for &c in &cols {
            entries.push(match a.get(j, c) {
                Entry::Star => Entry::Star,
                Entry::Symbol(s) => Entry::Symbol(syms[s as usize - 1]),
            });
        }
    }
    PdaArray::from_flat(rows.len(), cols.len(), entries, a.symbol_count()).unwrap()
}

/// A valid PDA with exactly `k` columns, drawn from the MAN and grid
/// families, column-deleted down to `k` and randomly relabelled.
pub fn random_base_pda(k: usize, rng: &mut ChaCha8Rng) -> PdaArray {
    let mut candidates: Vec<PdaArray> = Vec::new();
    for extra in 0..3 {
        let big_k = k + extra;
        for t in 0..=big_k {
            if binomial(big_k, t) <= 600 {
                candidates.push(
                    man_pda(ManParams {
                        num_users: big_k,
                        t,
                    })
                    .unwrap(),
                );
            }
        }
    }
    for q in 2..=5usize {
        for m in 1..=6u32 {
            if q * (m as usize + 1) >= k && q.pow(m) <= 128 {
                let p = GridParams { q, m: m as usize };
                candidates.push(lemma1_pda(p).unwrap());
                candidates.push(lemma2_pda(p).unwrap());
            }
        }
    }
    let base = candidates.swap_remove(rng.random_range(0..candidates.len()));
    let mut all: Vec<usize> = (0..base.num_cols()).collect();
    all.shuffle(rng);
    let drop: BTreeSet<usize> = all[..base.num_cols() - k].iter().copied().collect();
    let reduced = delete_columns(&base, &drop).unwrap();
    permute(&reduced, rng)
}

/// The canonical partition with relays renamed by a random permutation of `[h]`.
pub fn random_partition(h: usize, r: usize, rng: &mut ChaCha8Rng) -> ParallelClassPartition {
    let base = parallel_classes(h, r).unwrap();
    let mut pi: Vec<usize> = (1..=h).collect();
    pi.shuffle(rng);
    let mut classes: Vec<Vec<UserLabel>> = base
        .classes()
        .iter()
        .map(|class| {
            class
                .iter()
                .map(|t| {
                    let mut e: Vec<usize> = t.elements().iter().map(|&x| pi[x - 1]).collect();
                    e.sort_unstable();
                    UserLabel::new(e).unwrap()
                })
                .collect()
        })
        .collect();
    classes.shuffle(rng);
    ParallelClassPartition::new(h, r, classes).unwrap()
}

/// Brute-force validity of a parallel-class partition of the `r`-subsets of `[h]`.
pub fn oracle_partition_ok(h: usize, r: usize, classes: &[Vec<UserLabel>]) -> bool {
    let mut seen = BTreeSet::new();
    for class in classes {
        if class.len() != h / r {
            return false;
        }
        let mut covered = BTreeSet::new();
        for t in class {
            if t.len() != r || t.elements().iter().any(|&x| x == 0 || x > h) {
                return false;
            }
            for &x in t.elements() {
                if !covered.insert(x) {
                    return false;
                }
            }
            if !seen.insert(t.clone()) {
                return false;
            }
        }
        if covered.len() != h {
            return false;
        }
    }
    seen.len() as u64 == binomial(h, r) && classes.len() as u64 == binomial(h - 1, r - 1)
}
