//! Binomial coefficients and lexicographic ranking of subsets of `[n]`.
//!
//! Subsets are sorted `Vec<usize>` with 1-based elements. Ranks are 0-based
//! positions in lexicographic order.

use num_bigint::BigUint;

/// `C(n, k)`, or 0 when `k > n`. Panics on `u64` overflow.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        assert!(acc <= u64::MAX as u128, "C({n},{k}) overflows u64");
    }
    acc as u64
}

/// `C(n, k)` without overflow.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// All `k`-subsets of `[n]` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    SubsetIter::new(n, k).collect()
}

/// Lexicographic iterator over the `k`-subsets of `[n]`.
#[derive(Debug, Clone)]
pub struct SubsetIter {
    n: usize,
    current: Option<Vec<usize>>,
}

impl SubsetIter {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (1..=k).collect());
        SubsetIter { n, current }
    }
}

impl Iterator for SubsetIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still be incremented
        let mut pos = k;
        while pos > 0 && next[pos - 1] == self.n - (k - pos) {
            pos -= 1;
        }
        if pos > 0 {
            next[pos - 1] += 1;
            for i in pos..k {
                next[i] = next[i - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// 0-based lexicographic rank of a sorted subset of `[n]`.
pub fn rank_subset(n: usize, subset: &[usize]) -> u64 {
    let k = subset.len();
    let mut rank = 0u64;
    let mut prev = 0usize;
    for (i, &a) in subset.iter().enumerate() {
        for x in prev + 1..a {
            rank += binomial(n - x, k - i - 1);
        }
        prev = a;
    }
    rank
}

/// Inverse of [`rank_subset`]. Returns `None` if `rank >= C(n, k)`.
pub fn unrank_subset(n: usize, k: usize, mut rank: u64) -> Option<Vec<usize>> {
    if rank >= binomial(n, k) {
        return None;
    }
    let mut out = Vec::with_capacity(k);
    let mut x = 1usize;
    for i in 0..k {
        loop {
            let block = binomial(n - x, k - i - 1);
            if rank < block {
                break;
            }
            rank -= block;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    Some(out)
}

/// All vectors of `Z_q^m` in lexicographic order (coordinate 0 most significant).
pub fn grid_vectors(q: usize, m: usize) -> Vec<Vec<usize>> {
    let total = q.pow(m as u32);
    (0..total).map(|idx| vector_of_index(q, m, idx)).collect()
}

/// Lexicographic index of a vector of `Z_q^m`.
pub fn index_of_vector(q: usize, v: &[usize]) -> usize {
    v.iter().fold(0, |acc, &x| acc * q + x)
}

pub fn vector_of_index(q: usize, m: usize, mut idx: usize) -> Vec<usize> {
    let mut v = vec![0; m];
    for slot in v.iter_mut().rev() {
        *slot = idx % q;
        idx /= q;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(11, 5), 462);
        assert_eq!(
            binomial_big(126, 63).to_string(),
            "6034934435761406706427864636568328000"
        );
    }

    #[test]
    fn enumerate_small() {
        assert_eq!(
            subsets(4, 2),
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn rank_matches_enumeration() {
        for n in 0..9 {
            for k in 0..=n {
                for (i, s) in subsets(n, k).iter().enumerate() {
                    assert_eq!(rank_subset(n, s), i as u64);
                    assert_eq!(unrank_subset(n, k, i as u64).as_ref(), Some(s));
                }
                assert_eq!(unrank_subset(n, k, binomial(n, k)), None);
            }
        }
    }

    #[test]
    fn grid_roundtrip() {
        let vs = grid_vectors(3, 2);
        assert_eq!(vs.len(), 9);
        assert_eq!(vs[5], vec![1, 2]);
        for (i, v) in vs.iter().enumerate() {
            assert_eq!(index_of_vector(3, v), i);
        }
    }
}
