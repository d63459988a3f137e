//! Closed-form rates, subpacketization levels and the cut-set lower bound,
//! all in exact rational arithmetic.
//!
//! Notation: `K = C(h, r)` users, `K~ = C(h-1, r-1) = K r / h`, and
//! `mu = M / N` is the normalized cache size.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{binomial, binomial_big};
use crate::{Error, Rational, Result};

/// An achievable (memory, rate, subpacketization) point and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatePoint {
    pub scheme: String,
    /// `(h, r)` of the combination network; `None` for a shared link.
    pub network: Option<(usize, usize)>,
    /// Library size, when the point was evaluated for a specific `N`.
    pub n_files: Option<usize>,
    /// `M / N`.
    pub memory_ratio: Rational,
    pub rate: Rational,
    pub subpacketization: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPoint {
    pub h: usize,
    pub r: usize,
    pub n_files: usize,
    pub memory_ratio: Rational,
    pub lower_bound: Rational,
    /// Maximizing `(t, l)`, smallest `t` then smallest `l` on ties.
    pub t: usize,
    pub l: usize,
}

fn check_network(h: usize, r: usize, n_files: usize) -> Result<()> {
    if r == 0 || r > h {
        return Err(Error::ParamOutOfRange(format!(
            "need 1 <= r <= h, got h={h}, r={r}"
        )));
    }
    if n_files == 0 {
        return Err(Error::ParamOutOfRange("need at least one file".into()));
    }
    Ok(())
}

fn memory_ratio(n_files: usize, memory: Rational) -> Result<Rational> {
    let n = Rational::from_integer(n_files as i64);
    if memory < Rational::zero() || memory > n {
        return Err(Error::ParamOutOfRange(format!(
            "need 0 <= M <= N, got M={memory}, N={n_files}"
        )));
    }
    Ok(memory / n)
}

fn k_tilde(h: usize, r: usize) -> i64 {
    binomial(h - 1, r - 1) as i64
}

/// Cut-set lower bound on the link rate of an `(h, r)` network with `N`
/// files and cache size `M`:
/// `max over r <= t <= h, 1 <= l <= min(N, C(t, r)) of (l - l M / ceil(N / l)) / t`,
/// clamped at zero.
pub fn cutset_bound(h: usize, r: usize, n_files: usize, memory: Rational) -> Result<BoundPoint> {
    check_network(h, r, n_files)?;
    let mu = memory_ratio(n_files, memory)?;
    let mut best: Option<(Rational, usize, usize)> = None;
    for t in r..=h {
        let l_max = (binomial(t, r) as usize).min(n_files);
        for l in 1..=l_max {
            let l_r = Rational::from_integer(l as i64);
            let files_per_demand = n_files.div_ceil(l) as i64;
            let value = (l_r - l_r * memory / files_per_demand) / t as i64;
            if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                best = Some((value, t, l));
            }
        }
    }
    let (value, t, l) = best.expect("t = r, l = 1 is always feasible");
    Ok(BoundPoint {
        h,
        r,
        n_files,
        memory_ratio: mu,
        lower_bound: value.max(Rational::zero()),
        t,
        l,
    })
}

/// Rate of the transformed MAN scheme at any `mu`, without the grid check:
/// `K (1 - mu) / (h (1 + K~ mu))`.
pub fn tr_rate_formula(h: usize, r: usize, mu: Rational) -> Rational {
    let k = binomial(h, r) as i64;
    let kt = k_tilde(h, r);
    Rational::from_integer(k) * (Rational::one() - mu)
        / (Rational::from_integer(h as i64) * (Rational::one() + mu * kt))
}

/// Rate and subpacketization of the transformed MAN scheme, defined for
/// `r | h` on the grid `mu ∈ {0, 1/K~, 2/K~, ..., 1}`.
pub fn rate_tr(h: usize, r: usize, n_files: usize, memory: Rational) -> Result<RatePoint> {
    check_network(h, r, n_files)?;
    if !h.is_multiple_of(r) {
        return Err(Error::NotResolvable { h, r });
    }
    let mu = memory_ratio(n_files, memory)?;
    let kt = k_tilde(h, r);
    let t = mu * kt;
    if !t.is_integer() {
        return Err(Error::OffGrid(format!(
            "M/N = {mu} is not a multiple of 1/{kt}"
        )));
    }
    let t = t.to_integer() as usize;
    Ok(RatePoint {
        scheme: "TR".into(),
        network: Some((h, r)),
        n_files: Some(n_files),
        memory_ratio: mu,
        rate: tr_rate_formula(h, r, mu),
        subpacketization: binomial_big(kt as usize, t) * r,
    })
}

/// Memory ratio of the cut-set-achieving corner point: `(K - h + r - 1) / K`.
pub fn corner_memory_ratio(h: usize, r: usize) -> Rational {
    let k = binomial(h, r) as i64;
    Rational::new(k - h as i64 + r as i64 - 1, k)
}

/// Transformed MAN rate at the corner point in closed form:
/// `(1/r)(1 - mu) K r / (K r - (r-1)(h-r))`.
pub fn tr_rate_at_corner(h: usize, r: usize) -> Rational {
    let k = binomial(h, r) as i64;
    let (h, r) = (h as i64, r as i64);
    let mu = corner_memory_ratio(h as usize, r as usize);
    (Rational::one() - mu) / r * Rational::new(k * r, k * r - (r - 1) * (h - r))
}

/// Which low-subpacketization family a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LsubVariant {
    /// `M/N = 1/q`, from the `(m+1)`-regular grid PDA.
    One,
    /// `M/N = (q-1)/q`, from the `(q-1)(m+1)`-regular grid PDA.
    Two,
}

impl LsubVariant {
    pub fn memory_ratio(self, q: usize) -> Rational {
        match self {
            LsubVariant::One => Rational::new(1, q as i64),
            LsubVariant::Two => Rational::new(q as i64 - 1, q as i64),
        }
    }

    /// Recovers `q >= 2` from `mu`, or `OffGrid`.
    pub fn q_of(self, mu: Rational) -> Result<usize> {
        let inv = match self {
            LsubVariant::One if !mu.is_zero() => mu.recip(),
            LsubVariant::Two if mu != Rational::one() => (Rational::one() - mu).recip(),
            _ => return Err(Error::OffGrid(format!("M/N = {mu} has no q"))),
        };
        if inv.is_integer() && inv.to_integer() >= 2 {
            Ok(inv.to_integer() as usize)
        } else {
            let want = match self {
                LsubVariant::One => "1/q",
                LsubVariant::Two => "(q-1)/q",
            };
            Err(Error::OffGrid(format!(
                "M/N = {mu} is not of the form {want}, q >= 2"
            )))
        }
    }
}

/// `m + 1 = ceil(K~ / q)`, required to be at least 2.
pub fn lsub_grid_order(h: usize, r: usize, q: usize) -> Result<usize> {
    if q < 2 {
        return Err(Error::ParamOutOfRange(format!("need q >= 2, got {q}")));
    }
    let kt = binomial(h - 1, r - 1) as usize;
    let m_plus_1 = kt.div_ceil(q);
    if m_plus_1 < 2 {
        return Err(Error::DegenerateParams(format!(
            "ceil(K~/q) = ceil({kt}/{q}) = {m_plus_1} < 2 for the ({h},{r}) network"
        )));
    }
    Ok(m_plus_1 - 1)
}

/// Closed-form rate `(1/r)(N/M - 1)` and subpacketization of the two
/// low-subpacketization families.
pub fn rate_lsub(
    variant: LsubVariant,
    h: usize,
    r: usize,
    n_files: usize,
    memory: Rational,
) -> Result<RatePoint> {
    check_network(h, r, n_files)?;
    let mu = memory_ratio(n_files, memory)?;
    let q = variant.q_of(mu)?;
    if !h.is_multiple_of(r) {
        return Err(Error::NotResolvable { h, r });
    }
    let m = lsub_grid_order(h, r, q)?;
    let qm = BigUint::from(q).pow(m as u32);
    let subpacketization = match variant {
        LsubVariant::One => qm * r,
        LsubVariant::Two => qm * (r * (q - 1)),
    };
    let name = match variant {
        LsubVariant::One => "LSub1",
        LsubVariant::Two => "LSub2",
    };
    Ok(RatePoint {
        scheme: name.into(),
        network: Some((h, r)),
        n_files: Some(n_files),
        memory_ratio: mu,
        rate: (mu.recip() - 1) / r as i64,
        subpacketization,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalPoint {
    pub point: RatePoint,
    pub bound: BoundPoint,
    /// Achieved rate equals the cut-set bound.
    pub meets_cutset: bool,
}

/// Optimal rate `(1/r)(1 - M/N)` for `M/N` at or above the corner point.
///
/// At the corner the scheme is array `B` with `F = C(h, r-1)`. Above it the
/// point is memory-shared with `(M = N, R = 0)`: with the share of `B` equal
/// to `a/b` in lowest terms, each file is cut into `b` parts, `a` of which run
/// array `B` and the rest are cached whole, giving `a C(h, r-1) + (b - a)` pieces.
pub fn optimal_rate_large_mem(
    h: usize,
    r: usize,
    n_files: usize,
    memory: Rational,
) -> Result<OptimalPoint> {
    check_network(h, r, n_files)?;
    let mu = memory_ratio(n_files, memory)?;
    let corner = corner_memory_ratio(h, r);
    if mu < corner {
        return Err(Error::OffRegion(format!(
            "M/N = {mu} is below the corner {corner}"
        )));
    }
    let share = (Rational::one() - mu) / (Rational::one() - corner);
    let (a, b) = (*share.numer() as u64, *share.denom() as u64);
    let f_b = binomial(h, r - 1);
    let bound = cutset_bound(h, r, n_files, memory)?;
    let rate = (Rational::one() - mu) / r as i64;
    Ok(OptimalPoint {
        meets_cutset: rate == bound.lower_bound,
        point: RatePoint {
            scheme: "CutsetB".into(),
            network: Some((h, r)),
            n_files: Some(n_files),
            memory_ratio: mu,
            rate,
            subpacketization: BigUint::from(a * f_b + (b - a)),
        },
        bound,
    })
}

/// One row of the TR vs. LSub comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareRow {
    pub variant: LsubVariant,
    pub q: usize,
    pub memory_ratio: Rational,
    /// `M/N` lies on the TR grid.
    pub on_tr_grid: bool,
    pub r_tr: Option<Rational>,
    pub r_lsub: Option<Rational>,
    pub ratio: Option<Rational>,
    /// `K M r / (K M r + N h)`.
    pub ratio_lower: Rational,
    pub f_tr: Option<BigUint>,
    pub f_lsub: Option<BigUint>,
    pub cutset: Rational,
    pub r_opt: Option<Rational>,
}

/// Compares the transformed MAN scheme with both low-subpacketization
/// families at `M/N = 1/q` and `(q-1)/q` for each `q` in `qs`.
///
/// Cells that are undefined at a point are `None`. Every emitted ratio is
/// checked against `ratio_lower <= R_TR / R_LSub <= 1`.
pub fn compare_table(h: usize, r: usize, n_files: usize, qs: &[usize]) -> Result<Vec<CompareRow>> {
    check_network(h, r, n_files)?;
    let kt = k_tilde(h, r);
    let n = Rational::from_integer(n_files as i64);
    let mut rows = Vec::new();
    for &q in qs {
        if q < 2 {
            return Err(Error::ParamOutOfRange(format!(
                "grid q must be >= 2, got {q}"
            )));
        }
        for variant in [LsubVariant::One, LsubVariant::Two] {
            let mu = variant.memory_ratio(q);
            let memory = mu * n;
            let tr = rate_tr(h, r, n_files, memory).ok();
            let lsub = rate_lsub(variant, h, r, n_files, memory).ok();
            let ratio = match (&tr, &lsub) {
                (Some(a), Some(b)) if !b.rate.is_zero() => Some(a.rate / b.rate),
                _ => None,
            };
            let ratio_lower = mu * kt / (mu * kt + 1);
            if let Some(ratio) = ratio {
                if ratio < ratio_lower || ratio > Rational::one() {
                    return Err(Error::Internal(format!(
                        "R_TR/R_LSub = {ratio} escapes [{ratio_lower}, 1] at M/N = {mu}"
                    )));
                }
            }
            rows.push(CompareRow {
                variant,
                q,
                memory_ratio: mu,
                on_tr_grid: (mu * kt).is_integer(),
                r_tr: tr.as_ref().map(|p| p.rate),
                r_lsub: lsub.as_ref().map(|p| p.rate),
                ratio,
                ratio_lower,
                f_tr: tr.map(|p| p.subpacketization),
                f_lsub: lsub.map(|p| p.subpacketization),
                cutset: cutset_bound(h, r, n_files, memory)?.lower_bound,
                r_opt: optimal_rate_large_mem(h, r, n_files, memory)
                    .ok()
                    .map(|o| o.point.rate),
            });
        }
    }
    Ok(rows)
}

pub const TABLE_HEADER: &str =
    "variant,q,m_over_n,m_over_n_dec,on_tr_grid,r_tr,r_tr_dec,r_lsub,r_lsub_dec,\
ratio,ratio_dec,ratio_lower,f_tr,f_lsub,f_tr_over_f_lsub,cutset,cutset_dec,r_opt,r_opt_dec";

fn frac(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn dec(x: &Rational) -> String {
    format!("{:.6}", *x.numer() as f64 / *x.denom() as f64)
}

/// CSV with exact `num/den` cells and decimal convenience columns; empty
/// cells where a value is undefined.
pub fn table_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    let opt =
        |x: &Option<Rational>, f: fn(&Rational) -> String| x.as_ref().map(f).unwrap_or_default();
    for row in rows {
        let f_ratio = match (&row.f_tr, &row.f_lsub) {
            (Some(a), Some(b)) => {
                let g = a.gcd(b);
                let (a, b) = (a / &g, b / &g);
                format!(
                    "{:.6}",
                    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
                )
            }
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            match row.variant {
                LsubVariant::One => 1,
                LsubVariant::Two => 2,
            },
            row.q,
            frac(&row.memory_ratio),
            dec(&row.memory_ratio),
            row.on_tr_grid,
            opt(&row.r_tr, frac),
            opt(&row.r_tr, dec),
            opt(&row.r_lsub, frac),
            opt(&row.r_lsub, dec),
            opt(&row.ratio, frac),
            opt(&row.ratio, dec),
            frac(&row.ratio_lower),
            row.f_tr.as_ref().map(|f| f.to_string()).unwrap_or_default(),
            row.f_lsub
                .as_ref()
                .map(|f| f.to_string())
                .unwrap_or_default(),
            f_ratio,
            frac(&row.cutset),
            dec(&row.cutset),
            opt(&row.r_opt, frac),
            opt(&row.r_opt, dec),
        );
    }
    out
}
