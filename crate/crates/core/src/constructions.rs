//! Concrete PDA families.
//!
//! Every constructor runs the PDA (or C-PDA) checker on its output and
//! returns [`Error::Internal`] instead of an array that fails it.

use crate::combinatorics::{binomial, grid_vectors, index_of_vector, rank_subset, subsets};
use crate::pda::{check_cpda, check_pda, CpdaScheme, Entry, PdaArray};
use crate::resolvable::enumerate_users;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManParams {
    pub num_users: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridParams {
    pub q: usize,
    pub m: usize,
}

impl GridParams {
    fn check(self) -> Result<()> {
        if self.q < 2 || self.m < 1 {
            return Err(Error::ParamOutOfRange(format!(
                "grid PDAs need q >= 2 and m >= 1, got q={}, m={}",
                self.q, self.m
            )));
        }
        Ok(())
    }
}

fn validated(array: PdaArray, what: &str) -> Result<PdaArray> {
    let report = check_pda(&array);
    if !report.is_valid {
        return Err(Error::Internal(format!(
            "{what} failed the PDA check: {:?}",
            report.violations.first()
        )));
    }
    Ok(array)
}

/// The MAN PDA: rows are the `t`-subsets of `[K]`, and the cell of row `T'`,
/// column `k ∉ T'` holds the rank of `T' ∪ {k}` among `(t+1)`-subsets.
pub fn man_pda(p: ManParams) -> Result<PdaArray> {
    let ManParams { num_users: k, t } = p;
    if k == 0 || t > k {
        return Err(Error::ParamOutOfRange(format!(
            "need K >= 1 and 0 <= t <= K, got K={k}, t={t}"
        )));
    }
    let rows = subsets(k, t);
    let mut entries = Vec::with_capacity(rows.len() * k);
    for row in &rows {
        for col in 1..=k {
            if row.contains(&col) {
                entries.push(Entry::Star);
            } else {
                let mut joined = row.clone();
                let pos = joined.partition_point(|&x| x < col);
                joined.insert(pos, col);
                entries.push(Entry::Symbol(rank_subset(k, &joined) as u32 + 1));
            }
        }
    }
    let s = binomial(k, t + 1) as u32;
    validated(PdaArray::from_flat(rows.len(), k, entries, s)?, "MAN PDA")
}

/// `(m+1)-(q(m+1), q^m, q^{m-1}, q^{m+1} - q^m)` PDA.
///
/// Rows are `f ∈ Z_q^m`, columns `(i, u)` with `i ∈ 0..=m`, `u ∈ Z_q`.
/// Symbols are pairs `(v, s)` with `s ≠ Σv`. For `i < m` the cell is a star
/// iff `f_i = u`, else `(f with f_i := u, Σf)`; for `i = m` it is a star iff
/// `Σf = u`, else `(f, u)`.
pub fn lemma1_pda(p: GridParams) -> Result<PdaArray> {
    p.check()?;
    let GridParams { q, m } = p;
    let rows = grid_vectors(q, m);
    let cols = q * (m + 1);
    // lexicographic id of (v, s), skipping s = Σv
    let symbol_id = |v: &[usize], s: usize| {
        let sum = v.iter().sum::<usize>() % q;
        debug_assert_ne!(s, sum);
        let pos = if s < sum { s } else { s - 1 };
        (index_of_vector(q, v) * (q - 1) + pos + 1) as u32
    };
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for f in &rows {
        let sum = f.iter().sum::<usize>() % q;
        for i in 0..=m {
            for u in 0..q {
                let entry = if i < m {
                    if f[i] == u {
                        Entry::Star
                    } else {
                        let mut v = f.clone();
                        v[i] = u;
                        Entry::Symbol(symbol_id(&v, sum))
                    }
                } else if sum == u {
                    Entry::Star
                } else {
                    Entry::Symbol(symbol_id(f, u))
                };
                entries.push(entry);
            }
        }
    }
    let s = (rows.len() * (q - 1)) as u32;
    validated(
        PdaArray::from_flat(rows.len(), cols, entries, s)?,
        "grid PDA (1/q)",
    )
}

/// `(q-1)(m+1)-(q(m+1), (q-1)q^m, (q-1)^2 q^{m-1}, q^m)` PDA.
///
/// Rows are `(e, f)` with `e ∈ 1..q`, `f ∈ Z_q^m` (`e` major); columns as in
/// [`lemma1_pda`]; symbols are `v ∈ Z_q^m`. For `i < m` the cell is a star
/// iff `f_i ≠ u`, else `f with f_i := f_i + e`; for `i = m` it is a star iff
/// `Σf + e ≠ u`, else `f`.
pub fn lemma2_pda(p: GridParams) -> Result<PdaArray> {
    p.check()?;
    let GridParams { q, m } = p;
    let vectors = grid_vectors(q, m);
    let cols = q * (m + 1);
    let num_rows = (q - 1) * vectors.len();
    let mut entries = Vec::with_capacity(num_rows * cols);
    for e in 1..q {
        for f in &vectors {
            let sum = f.iter().sum::<usize>() % q;
            for i in 0..=m {
                for u in 0..q {
                    let entry = if i < m {
                        if f[i] != u {
                            Entry::Star
                        } else {
                            let mut v = f.clone();
                            v[i] = (f[i] + e) % q;
                            Entry::Symbol(index_of_vector(q, &v) as u32 + 1)
                        }
                    } else if (sum + e) % q != u {
                        Entry::Star
                    } else {
                        Entry::Symbol(index_of_vector(q, f) as u32 + 1)
                    };
                    entries.push(entry);
                }
            }
        }
    }
    let s = vectors.len() as u32;
    validated(
        PdaArray::from_flat(num_rows, cols, entries, s)?,
        "grid PDA ((q-1)/q)",
    )
}

/// The C-PDA `B`: rows are the `(r-1)`-subsets `S_j` of `[h]`, columns the
/// users `T`; the cell is a star unless `S_j ⊂ T`, in which case it holds the
/// single relay of `T \ S_j`, and that relay forwards the symbol.
pub fn cutset_array_b(h: usize, r: usize) -> Result<CpdaScheme> {
    if r == 0 || r > h {
        return Err(Error::ParamOutOfRange(format!(
            "need 1 <= r <= h, got h={h}, r={r}"
        )));
    }
    let rows = subsets(h, r - 1);
    let users = enumerate_users(h, r)?;
    let mut entries = Vec::with_capacity(rows.len() * users.len());
    for s_j in &rows {
        for t in &users {
            if s_j.iter().all(|x| t.contains(*x)) {
                let rest = t
                    .elements()
                    .iter()
                    .find(|x| !s_j.contains(x))
                    .expect("|T| = |S_j| + 1");
                entries.push(Entry::Symbol(*rest as u32));
            } else {
                entries.push(Entry::Star);
            }
        }
    }
    let array = PdaArray::from_flat(rows.len(), users.len(), entries, h as u32)?;
    let scheme = CpdaScheme::new(array, users, (1..=h).collect())?;
    check_cpda(&scheme, h, r)
        .map_err(|e| Error::Internal(format!("array B failed the C-PDA check: {e}")))?;
    Ok(scheme)
}
