//! User labels of a combination network and parallel-class partitions.
//!
//! Users of an `(h, r)` network are labelled by the `r`-subsets of the relay
//! set `[h]`. When `r | h` the labels split into `C(h-1, r-1)` parallel
//! classes, each a perfect partition of `[h]`.

mod baranyai;
mod flow;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::combinatorics::{self, binomial};
use crate::{Error, Result};

/// A user, identified by the sorted set of relays it is connected to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserLabel(Vec<usize>);

impl UserLabel {
    /// Elements must be strictly increasing and at least 1.
    pub fn new(elements: Vec<usize>) -> Result<Self> {
        if elements.first() == Some(&0) || elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::LabelMismatch(format!(
                "{elements:?} is not a strictly increasing set of relays"
            )));
        }
        Ok(UserLabel(elements))
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, relay: usize) -> bool {
        self.0.binary_search(&relay).is_ok()
    }

    /// `T[i]`, the `i`-th smallest relay (1-based `i`).
    pub fn element(&self, i: usize) -> Result<usize> {
        i.checked_sub(1)
            .and_then(|idx| self.0.get(idx).copied())
            .ok_or_else(|| Error::ParamOutOfRange(format!("{self} has no element number {i}")))
    }

    /// `T^{-1}[j]`, the position (1-based) of relay `j` in the label.
    pub fn inverse(&self, relay: usize) -> Result<usize> {
        self.0
            .binary_search(&relay)
            .map(|idx| idx + 1)
            .map_err(|_| Error::NotMember {
                element: relay,
                label: self.to_string(),
            })
    }

    /// `T^(i) = {Δ_i(t) : t ∈ T}`, re-sorted.
    pub fn shifted(&self, i: usize, h: usize) -> Result<UserLabel> {
        let mut out = self
            .0
            .iter()
            .map(|&t| delta_shift(i, t, h))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(UserLabel(out))
    }
}

impl fmt::Display for UserLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn check_network(h: usize, r: usize) -> Result<()> {
    if r == 0 || r > h {
        return Err(Error::ParamOutOfRange(format!(
            "need 1 <= r <= h, got h={h}, r={r}"
        )));
    }
    Ok(())
}

/// All `C(h, r)` user labels in lexicographic order.
pub fn enumerate_users(h: usize, r: usize) -> Result<Vec<UserLabel>> {
    check_network(h, r)?;
    Ok(combinatorics::SubsetIter::new(h, r)
        .map(UserLabel)
        .collect())
}

/// 1-based lexicographic rank of a label among the `r`-subsets of `[h]`.
pub fn rank_user(h: usize, label: &UserLabel) -> Result<usize> {
    if label.is_empty() || label.elements().iter().any(|&x| x > h) {
        return Err(Error::ParamOutOfRange(format!(
            "{label} is not a subset of [{h}]"
        )));
    }
    Ok(combinatorics::rank_subset(h, label.elements()) as usize + 1)
}

/// Inverse of [`rank_user`].
pub fn unrank_user(h: usize, r: usize, rank: usize) -> Result<UserLabel> {
    check_network(h, r)?;
    rank.checked_sub(1)
        .and_then(|r0| combinatorics::unrank_subset(h, r, r0 as u64))
        .map(UserLabel)
        .ok_or_else(|| Error::ParamOutOfRange(format!("rank {rank} outside 1..=C({h},{r})")))
}

/// `Δ_i(t)`: cyclic shift of relay `t` by `i - 1` positions on `[h]`.
pub fn delta_shift(i: usize, t: usize, h: usize) -> Result<usize> {
    if !(1..=h).contains(&i) || !(1..=h).contains(&t) {
        return Err(Error::ParamOutOfRange(format!(
            "Δ_{i}({t}) undefined on [{h}]"
        )));
    }
    let s = t + i - 1;
    Ok(if s <= h { s } else { s - h })
}

/// `Δ_i^{-1}(t)`.
pub fn delta_shift_inverse(i: usize, t: usize, h: usize) -> Result<usize> {
    if !(1..=h).contains(&i) || !(1..=h).contains(&t) {
        return Err(Error::ParamOutOfRange(format!(
            "Δ_{i}^-1({t}) undefined on [{h}]"
        )));
    }
    Ok(if t >= i { t - i + 1 } else { t + h - i + 1 })
}

/// A resolution of the user set of a `(h, r)` network into parallel classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelClassPartition {
    h: usize,
    r: usize,
    classes: Vec<Vec<UserLabel>>,
    class_of: BTreeMap<UserLabel, usize>,
}

impl ParallelClassPartition {
    /// Validates a user-supplied partition; class and member order are kept.
    pub fn new(h: usize, r: usize, classes: Vec<Vec<UserLabel>>) -> Result<Self> {
        check_network(h, r)?;
        if !h.is_multiple_of(r) {
            return Err(Error::NotResolvable { h, r });
        }
        let expected = binomial(h - 1, r - 1) as usize;
        if classes.len() != expected {
            return Err(Error::InvalidPartition(format!(
                "{} classes, a ({h},{r}) network needs {expected}",
                classes.len()
            )));
        }
        let mut class_of = BTreeMap::new();
        for (c, class) in classes.iter().enumerate() {
            let mut covered = BTreeSet::new();
            for label in class {
                if label.len() != r || label.elements().iter().any(|&x| x > h) {
                    return Err(Error::InvalidPartition(format!(
                        "{label} is not an {r}-subset of [{h}]"
                    )));
                }
                for &x in label.elements() {
                    if !covered.insert(x) {
                        return Err(Error::InvalidPartition(format!(
                            "relay {x} appears twice in class {}",
                            c + 1
                        )));
                    }
                }
                if class_of.insert(label.clone(), c + 1).is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "{label} appears in two classes"
                    )));
                }
            }
            if covered.len() != h {
                return Err(Error::InvalidPartition(format!(
                    "class {} does not cover [{h}]",
                    c + 1
                )));
            }
        }
        // |class| = h/r and every label distinct, so C(h-1,r-1) * h/r = C(h,r) labels: all of them
        Ok(ParallelClassPartition {
            h,
            r,
            classes,
            class_of,
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn classes(&self) -> &[Vec<UserLabel>] {
        &self.classes
    }

    /// Sorts members within each class, then classes by their smallest member.
    pub fn canonicalized(&self) -> Self {
        let mut classes = self.classes.clone();
        for class in &mut classes {
            class.sort();
        }
        classes.sort();
        ParallelClassPartition::new(self.h, self.r, classes).expect("reordering keeps validity")
    }

    /// `δ(T)`: 1-based index of the class holding `label`.
    pub fn class_index(&self, label: &UserLabel) -> Result<usize> {
        self.class_of.get(label).copied().ok_or_else(|| {
            Error::ParamOutOfRange(format!("{label} is not a user of the partition"))
        })
    }

    /// Users in class-major order: class 1's members, then class 2's, ...
    pub fn users_in_class_order(&self) -> Vec<UserLabel> {
        self.classes.iter().flatten().cloned().collect()
    }
}

/// Deterministic canonical partition of the `(h, r)` user set into parallel classes.
///
/// Uses the round-robin 1-factorization for `r = 2` and the integral-flow
/// Baranyai construction otherwise.
pub fn parallel_classes(h: usize, r: usize) -> Result<ParallelClassPartition> {
    check_network(h, r)?;
    if !h.is_multiple_of(r) {
        return Err(Error::NotResolvable { h, r });
    }
    let raw = if r == 2 {
        baranyai::round_robin(h)
    } else {
        baranyai::flow_resolution(h, r)?
    };
    let classes = raw
        .into_iter()
        .map(|class| {
            class
                .into_iter()
                .map(|mut b| {
                    b.sort_unstable();
                    UserLabel::new(b)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let partition = ParallelClassPartition::new(h, r, classes)
        .map_err(|e| Error::Internal(format!("constructed partition rejected: {e}")))?;
    Ok(partition.canonicalized())
}
