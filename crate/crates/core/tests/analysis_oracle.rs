mod common;

use common::resolvable_networks;
use cpda_core::analysis::{
    compare_table, corner_memory_ratio, cutset_bound, lsub_grid_order, optimal_rate_large_mem,
    rate_lsub, rate_tr, table_csv, tr_rate_at_corner, LsubVariant, TABLE_HEADER,
};
use cpda_core::combinatorics::binomial;
use cpda_core::constructions::{cutset_array_b, man_pda, ManParams};
use cpda_core::pda::check_pda;
use cpda_core::resolvable::parallel_classes;
use cpda_core::transform::{build_lsub1, build_lsub2, transform_to_cpda, TransformSpec};
use cpda_core::{Error, Rational};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn big(q: Rational) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Cut-set bound recomputed over arbitrary-precision rationals, scanning
/// every `(t, l)` and every way to round `N / l` up.
fn oracle_cutset(h: usize, r: usize, n: usize, m: Rational) -> BigRational {
    let m = big(m);
    let mut best = BigRational::zero();
    for t in r..=h {
        let pairs = binomial(t, r) as usize;
        for l in 1..=pairs.min(n) {
            let rounds = n.div_ceil(l);
            let l_big = BigRational::from_integer(l.into());
            let value = (l_big.clone() - l_big * &m / BigRational::from_integer(rounds.into()))
                / BigRational::from_integer(t.into());
            if value > best {
                best = value;
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn cutset_matches_big_rational_oracle(h in 1usize..=9, r_seed in 0usize..9, n in 1usize..=20, num in 0i64..=40) {
        let r = r_seed % h + 1;
        let m = Rational::new(num * n as i64, 40);
        let b = cutset_bound(h, r, n, m).unwrap();
        prop_assert_eq!(big(b.lower_bound), oracle_cutset(h, r, n, m));
        prop_assert!(b.t >= r && b.t <= h && b.l >= 1);
    }
}

#[test]
fn cutset_rejects_out_of_range_memory() {
    assert!(cutset_bound(4, 2, 3, Rational::from_integer(4)).is_err());
    assert!(cutset_bound(4, 2, 3, Rational::from_integer(-1)).is_err());
    assert!(cutset_bound(4, 5, 3, Rational::zero()).is_err());
    assert_eq!(
        cutset_bound(4, 2, 3, Rational::from_integer(3))
            .unwrap()
            .lower_bound,
        Rational::zero()
    );
}

#[test]
fn tr_rate_matches_constructed_schemes() {
    for (h, r) in resolvable_networks(8) {
        let kt = binomial(h - 1, r - 1) as usize;
        if kt > 10 {
            continue;
        }
        for t in 0..=kt {
            let base = man_pda(ManParams { num_users: kt, t }).unwrap();
            let spec = TransformSpec::new(base, h, r, parallel_classes(h, r).unwrap()).unwrap();
            let s = transform_to_cpda(&spec).unwrap();
            let rep = check_pda(&s.array);
            let n = 4;
            let mu = Rational::new(t as i64, kt as i64);
            let p = rate_tr(h, r, n, mu * n as i64).unwrap();
            // rate = packets per relay over F
            let measured = Rational::new(s.loads(h)[0] as i64, rep.f as i64);
            assert_eq!(p.rate, measured, "({h},{r}) t={t}");
            assert_eq!(p.subpacketization, BigUint::from(rep.f));
            assert_eq!(mu, Rational::new(rep.z as i64, rep.f as i64));
        }
    }
    assert!(matches!(
        rate_tr(6, 2, 5, Rational::new(5, 3)),
        Err(Error::OffGrid(_))
    ));
    assert!(matches!(
        rate_tr(5, 2, 5, Rational::zero()),
        Err(Error::NotResolvable { .. })
    ));
}

#[test]
fn lsub_closed_forms_match_builds() {
    for (h, r) in [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3)] {
        let p = parallel_classes(h, r).unwrap();
        for q in 2..=4 {
            let n = 12;
            if lsub_grid_order(h, r, q).is_ok_and(|m| q.pow(m as u32) > 4096) {
                continue;
            }
            for (variant, build) in [
                (LsubVariant::One, build_lsub1 as fn(_, _, _, &_) -> _),
                (LsubVariant::Two, build_lsub2),
            ] {
                let closed = rate_lsub(variant, h, r, n, variant.memory_ratio(q) * n as i64);
                match build(h, r, q, &p) {
                    Ok(b) => {
                        let closed = closed.unwrap();
                        assert!(b.point.rate <= closed.rate, "({h},{r}) q={q}");
                        assert!(
                            BigUint::from(b.scheme.array.num_rows()) <= closed.subpacketization
                        );
                        assert_eq!(b.point.memory_ratio, variant.memory_ratio(q));
                        if variant == LsubVariant::Two {
                            assert_eq!(b.base_symbols, b.reduced_symbols);
                        }
                    }
                    Err(e) => {
                        assert!(matches!(e, Error::DegenerateParams(_)));
                        assert!(matches!(closed, Err(Error::DegenerateParams(_))));
                    }
                }
            }
        }
    }
}

#[test]
fn corner_point_is_optimal() {
    for (h, r) in [(3, 2), (4, 2), (5, 2), (5, 3), (6, 3), (7, 4)] {
        let k = binomial(h, r) as usize;
        let mu = corner_memory_ratio(h, r);
        let b = cutset_array_b(h, r).unwrap();
        let rep = check_pda(&b.array);
        assert_eq!(mu, Rational::new(rep.z as i64, rep.f as i64));
        let o = optimal_rate_large_mem(h, r, k, mu * k as i64).unwrap();
        assert!(o.meets_cutset);
        assert_eq!(o.point.subpacketization, BigUint::from(binomial(h, r - 1)));
        // every memory above the corner on a fine grid
        for num in 0..=12 {
            let above = mu + (Rational::one() - mu) * Rational::new(num, 12);
            let o = optimal_rate_large_mem(h, r, k, above * k as i64).unwrap();
            assert!(o.meets_cutset, "({h},{r}) mu={above}");
        }
        if !mu.is_zero() {
            let below = (mu - Rational::new(1, 1000)) * k as i64;
            assert!(matches!(
                optimal_rate_large_mem(h, r, k, below),
                Err(Error::OffRegion(_))
            ));
        }
        let r_star = (Rational::one() - mu) / r as i64;
        assert_eq!(o.point.rate, r_star);
        assert!(tr_rate_at_corner(h, r) > r_star, "({h},{r})");
    }
}

#[test]
fn table_is_exact_and_bracketed() {
    for (h, r) in resolvable_networks(10) {
        let rows = compare_table(h, r, 7, &[2, 3, 4, 5, 6]).unwrap();
        for row in &rows {
            if let Some(ratio) = row.ratio {
                assert!(row.ratio_lower <= ratio && ratio <= Rational::one());
            }
        }
        let csv = table_csv(&rows);
        assert!(csv.starts_with(TABLE_HEADER));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }
}
