//! Lifting a small PDA to a C-PDA for a resolvable network, the column
//! reduction feeding it, and relay-load balancing by label rotation.

use std::collections::BTreeSet;

use crate::analysis::{lsub_grid_order, LsubVariant, RatePoint};
use crate::combinatorics::binomial;
use crate::constructions::{lemma1_pda, lemma2_pda, GridParams};
use crate::pda::{check_cpda, check_pda, delete_columns, CpdaScheme, Entry, PdaArray};
use crate::resolvable::{delta_shift, ParallelClassPartition};
use crate::{Error, Rational, Result};

/// Input of [`transform_to_cpda`]: a base PDA with `C(h-1, r-1)` columns and
/// a parallel-class partition of the `(h, r)` users.
#[derive(Debug, Clone)]
pub struct TransformSpec {
    base: PdaArray,
    h: usize,
    r: usize,
    partition: ParallelClassPartition,
}

impl TransformSpec {
    pub fn new(
        base: PdaArray,
        h: usize,
        r: usize,
        partition: ParallelClassPartition,
    ) -> Result<Self> {
        if r == 0 || r > h {
            return Err(Error::ParamOutOfRange(format!(
                "need 1 <= r <= h, got h={h}, r={r}"
            )));
        }
        if !h.is_multiple_of(r) {
            return Err(Error::NotResolvable { h, r });
        }
        if (partition.h(), partition.r()) != (h, r) {
            return Err(Error::InvalidPartition(format!(
                "partition is for ({},{}), not ({h},{r})",
                partition.h(),
                partition.r()
            )));
        }
        let expected = binomial(h - 1, r - 1) as usize;
        if base.num_cols() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: base.num_cols(),
            });
        }
        let report = check_pda(&base);
        if !report.is_valid {
            return Err(Error::InvalidPda(format!("{:?}", report.violations[0])));
        }
        Ok(TransformSpec {
            base,
            h,
            r,
            partition,
        })
    }

    pub fn base(&self) -> &PdaArray {
        &self.base
    }

    pub fn partition(&self) -> &ParallelClassPartition {
        &self.partition
    }
}

/// Lifts a `(K~, F~, Z~, S~)` PDA to a `(C(h,r), rF~, rZ~, hS~)` C-PDA.
///
/// Columns are the partition's users class by class. Row `(i, j)` (block
/// `i ∈ [r]` major) of column `T` copies cell `(j, δ(T))` of the base, with
/// ordinary symbols shifted by `(T[i] - 1) S~`, so relay `l` forwards exactly
/// the symbols `(l-1)S~ + 1 ..= l S~`.
pub fn transform_to_cpda(spec: &TransformSpec) -> Result<CpdaScheme> {
    let TransformSpec {
        base,
        h,
        r,
        partition,
    } = spec;
    let (h, r) = (*h, *r);
    let users = partition.users_in_class_order();
    let base_f = base.num_rows();
    let base_s = base.symbol_count();

    let base_cols: Vec<usize> = users
        .iter()
        .map(|t| partition.class_index(t).map(|c| c - 1))
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(r * base_f * users.len());
    for i in 1..=r {
        for j in 0..base_f {
            for (t, &c) in users.iter().zip(&base_cols) {
                entries.push(match base.get(j, c) {
                    Entry::Star => Entry::Star,
                    Entry::Symbol(s) => {
                        let relay = t.element(i)? as u32;
                        Entry::Symbol(s + (relay - 1) * base_s)
                    }
                });
            }
        }
    }
    let total_s = h as u32 * base_s;
    let array = PdaArray::from_flat(r * base_f, users.len(), entries, total_s)?;
    let relays = (1..=total_s).map(|s| s.div_ceil(base_s) as usize).collect();
    let scheme = CpdaScheme::new(array, users, relays)?;
    check_cpda(&scheme, h, r)
        .map_err(|e| Error::Internal(format!("transformed array is not a C-PDA: {e}")))?;
    Ok(scheme)
}

/// Drops trailing columns until `k_target` remain, compacting symbols.
pub fn reduce_columns_to(array: &PdaArray, k_target: usize) -> Result<PdaArray> {
    if k_target == 0 || k_target > array.num_cols() {
        return Err(Error::ParamOutOfRange(format!(
            "cannot reduce {} columns to {k_target}",
            array.num_cols()
        )));
    }
    let drop: BTreeSet<usize> = (k_target..array.num_cols()).collect();
    delete_columns(array, &drop)
}

/// A low-subpacketization C-PDA and its measured performance.
#[derive(Debug, Clone)]
pub struct LsubBuild {
    pub scheme: CpdaScheme,
    /// Memory ratio, achieved rate `S / (F h)` and actual `F`.
    pub point: RatePoint,
    /// `(1/r)(N/M - 1)`.
    pub rate_bound: Rational,
    /// Closed-form `F_LSub`.
    pub subpacketization_bound: u64,
    /// Symbols in the grid PDA before and after column reduction.
    pub base_symbols: u32,
    pub reduced_symbols: u32,
}

/// Grid PDA with `M/N = 1/q`, reduced to `C(h-1, r-1)` columns and lifted.
pub fn build_lsub1(
    h: usize,
    r: usize,
    q: usize,
    partition: &ParallelClassPartition,
) -> Result<LsubBuild> {
    build_lsub(LsubVariant::One, h, r, q, partition)
}

/// Grid PDA with `M/N = (q-1)/q`, reduced to `C(h-1, r-1)` columns and lifted.
pub fn build_lsub2(
    h: usize,
    r: usize,
    q: usize,
    partition: &ParallelClassPartition,
) -> Result<LsubBuild> {
    build_lsub(LsubVariant::Two, h, r, q, partition)
}

fn build_lsub(
    variant: LsubVariant,
    h: usize,
    r: usize,
    q: usize,
    partition: &ParallelClassPartition,
) -> Result<LsubBuild> {
    if r == 0 || r > h {
        return Err(Error::ParamOutOfRange(format!(
            "need 1 <= r <= h, got h={h}, r={r}"
        )));
    }
    if !h.is_multiple_of(r) {
        return Err(Error::NotResolvable { h, r });
    }
    let m = lsub_grid_order(h, r, q)?;
    let grid = GridParams { q, m };
    let base = match variant {
        LsubVariant::One => lemma1_pda(grid)?,
        LsubVariant::Two => lemma2_pda(grid)?,
    };
    let k_tilde = binomial(h - 1, r - 1) as usize;
    let reduced = reduce_columns_to(&base, k_tilde)?;
    if variant == LsubVariant::Two && reduced.symbol_count() != base.symbol_count() {
        return Err(Error::Internal(format!(
            "column reduction removed symbols ({} -> {})",
            base.symbol_count(),
            reduced.symbol_count()
        )));
    }
    let (base_symbols, reduced_symbols) = (base.symbol_count(), reduced.symbol_count());
    let scheme = transform_to_cpda(&TransformSpec::new(reduced, h, r, partition.clone())?)?;

    let f = scheme.array.num_rows();
    let s = scheme.array.symbol_count();
    let mu = variant.memory_ratio(q);
    let qm = (q as u64).pow(m as u32);
    let (name, subpacketization_bound) = match variant {
        LsubVariant::One => ("LSub1", r as u64 * qm),
        LsubVariant::Two => ("LSub2", (r * (q - 1)) as u64 * qm),
    };
    Ok(LsubBuild {
        point: RatePoint {
            scheme: name.into(),
            network: Some((h, r)),
            n_files: None,
            memory_ratio: mu,
            rate: Rational::new(s as i64, (f * h) as i64),
            subpacketization: (f as u64).into(),
        },
        rate_bound: (mu.recip() - 1) / r as i64,
        subpacketization_bound,
        base_symbols,
        reduced_symbols,
        scheme,
    })
}

/// Replicas of a C-PDA applied to the `h` subfiles of every file.
///
/// A single replica means the loads were already equal and no file split is
/// needed; otherwise replica `i` relabels column `T` as `T^(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedScheme {
    pub h: usize,
    pub replicas: Vec<CpdaScheme>,
}

impl BalancedScheme {
    /// Wraps a scheme whose loads are already equal (or that is used as is).
    pub fn single(h: usize, scheme: CpdaScheme) -> Self {
        BalancedScheme {
            h,
            replicas: vec![scheme],
        }
    }

    /// Pieces each file is cut into.
    pub fn subpacketization(&self) -> usize {
        self.replicas.len() * self.replicas.first().map_or(0, |s| s.array.num_rows())
    }

    /// Packets per relay summed over replicas.
    pub fn relay_loads(&self) -> Vec<usize> {
        let mut total = vec![0; self.h];
        for replica in &self.replicas {
            for (t, l) in total.iter_mut().zip(replica.loads(self.h)) {
                *t += l;
            }
        }
        total
    }

    /// Largest per-relay rate: packets times packet size `B / (replicas F)`.
    pub fn rate(&self) -> Rational {
        let max = self.relay_loads().into_iter().max().unwrap_or(0);
        Rational::new(max as i64, self.subpacketization() as i64)
    }
}

/// Equalizes relay loads. Balanced schemes are returned unchanged; others
/// are replicated `h` times with rotated labels, so every relay carries `S`
/// packets of size `B / (h F)`.
pub fn balance_by_replication(scheme: &CpdaScheme, h: usize) -> Result<BalancedScheme> {
    let (_, r) = scheme.network();
    let report = check_cpda(scheme, h, r)?;
    if report.balanced {
        return Ok(BalancedScheme::single(h, scheme.clone()));
    }
    let replicas = (1..=h)
        .map(|i| {
            let labels = scheme
                .labels
                .iter()
                .map(|t| t.shifted(i, h))
                .collect::<Result<Vec<_>>>()?;
            let relays = scheme
                .relay_of_symbol
                .iter()
                .map(|&relay| delta_shift(i, relay, h))
                .collect::<Result<Vec<_>>>()?;
            let replica = CpdaScheme::new(scheme.array.clone(), labels, relays)?;
            check_cpda(&replica, h, r)?;
            Ok(replica)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BalancedScheme { h, replicas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cutset_array_b, man_pda, ManParams};
    use crate::resolvable::{enumerate_users, parallel_classes};

    #[test]
    fn shape_and_resolvability_are_checked() {
        let base: PdaArray = "* 1; 1 *".parse().unwrap();
        let p = parallel_classes(4, 2).unwrap();
        assert!(matches!(
            TransformSpec::new(base, 4, 2, p),
            Err(Error::ShapeMismatch {
                expected: 3,
                found: 2
            })
        ));
        let p = parallel_classes(4, 2).unwrap();
        let base = man_pda(ManParams { num_users: 3, t: 1 }).unwrap();
        assert!(matches!(
            TransformSpec::new(base, 6, 2, p),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn all_star_base_gives_all_star_cpda() {
        let base = PdaArray::new(vec![vec![Entry::Star; 3]; 2], 0).unwrap();
        let spec = TransformSpec::new(base, 4, 2, parallel_classes(4, 2).unwrap()).unwrap();
        let out = transform_to_cpda(&spec).unwrap();
        assert_eq!(out.array.symbol_count(), 0);
        assert_eq!(out.array.num_rows(), 4);
        assert!(out.array.rows().flatten().all(|e| e.is_star()));
    }

    #[test]
    fn reduction_to_same_width_is_identity() {
        let a = lemma1_pda(GridParams { q: 2, m: 2 }).unwrap();
        assert_eq!(reduce_columns_to(&a, 6).unwrap(), a);
        let r = reduce_columns_to(&a, 5).unwrap();
        assert!(check_pda(&r).is_valid);
        assert_eq!(r.num_rows(), 4);
        assert!(reduce_columns_to(&a, 7).is_err());
    }

    #[test]
    fn lsub_degenerate_parameters() {
        let p = parallel_classes(4, 2).unwrap();
        assert!(matches!(
            build_lsub1(4, 2, 3, &p),
            Err(Error::DegenerateParams(_))
        ));
        let p = parallel_classes(4, 4).unwrap();
        assert!(matches!(
            build_lsub2(4, 4, 2, &p),
            Err(Error::DegenerateParams(_))
        ));
    }

    #[test]
    fn lsub_for_6_2() {
        let p = parallel_classes(6, 2).unwrap();
        let b = build_lsub1(6, 2, 2, &p).unwrap();
        assert_eq!(b.scheme.array.num_rows(), 8);
        assert_eq!(check_pda(&b.scheme.array).z, 4);
        assert!(b.point.rate <= b.rate_bound);
        assert_eq!(b.rate_bound, Rational::new(1, 2));
        assert_eq!(b.subpacketization_bound, 8);

        let b = build_lsub2(6, 2, 2, &p).unwrap();
        assert_eq!((b.base_symbols, b.reduced_symbols), (4, 4));
        assert!(b.point.rate <= Rational::new(1, 2));
        assert_eq!(b.subpacketization_bound, 8);
    }

    #[test]
    fn balanced_inputs_are_not_replicated() {
        let b = cutset_array_b(4, 2).unwrap();
        let bal = balance_by_replication(&b, 4).unwrap();
        assert_eq!(bal.replicas.len(), 1);
        assert_eq!(bal.rate(), Rational::new(1, 4));
    }

    #[test]
    fn unbalanced_scheme_is_rotated() {
        // uncoded delivery to the three users of a (3,2) network: relays 1, 1, 2
        let array = man_pda(ManParams { num_users: 3, t: 0 }).unwrap();
        let labels = enumerate_users(3, 2).unwrap();
        let scheme = CpdaScheme::new(array, labels, vec![1, 1, 2]).unwrap();
        assert_eq!(check_cpda(&scheme, 3, 2).unwrap().loads, vec![2, 1, 0]);

        let bal = balance_by_replication(&scheme, 3).unwrap();
        assert_eq!(bal.replicas.len(), 3);
        assert_eq!(bal.relay_loads(), vec![3, 3, 3]);
        assert_eq!(bal.subpacketization(), 3);
        assert_eq!(bal.rate(), Rational::new(3, 3));
    }
}
