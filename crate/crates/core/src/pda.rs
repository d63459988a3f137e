//! Placement delivery arrays and their combinational (relay-labelled) form.
//!
//! A PDA is an `F x K` array over `{*} ∪ [S]`. Rows index subpackets, columns
//! index users: a star means the user caches that subpacket, and each ordinary
//! symbol is one XOR-coded transmission serving every user whose column holds it.
//! The three defining conditions are:
//!
//! * C1: every column holds the same number `Z` of stars;
//! * C2: every symbol in `1..=S` occurs at least once;
//! * C3: two cells holding the same symbol lie in distinct rows and columns,
//!   and the two opposite corners of the 2x2 sub-array they span are stars.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::analysis::RatePoint;
use crate::resolvable::UserLabel;
use crate::{combinatorics, Error, Rational, Result};

/// A cell of a PDA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    Star,
    /// Ordinary symbol, numbered from 1.
    Symbol(u32),
}

impl Entry {
    pub fn is_star(self) -> bool {
        matches!(self, Entry::Star)
    }

    pub fn symbol(self) -> Option<u32> {
        match self {
            Entry::Star => None,
            Entry::Symbol(s) => Some(s),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Star => f.write_str("*"),
            Entry::Symbol(s) => write!(f, "{s}"),
        }
    }
}

/// Row-major `F x K` array over stars and symbols `1..=S`.
///
/// Construction only guarantees the array is rectangular and that symbol ids
/// are within `1..=S`; the PDA conditions are checked by [`check_pda`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PdaArray {
    num_rows: usize,
    num_cols: usize,
    symbol_count: u32,
    entries: Vec<Entry>,
}

impl PdaArray {
    pub fn new(rows: Vec<Vec<Entry>>, symbol_count: u32) -> Result<Self> {
        let num_rows = rows.len();
        if num_rows == 0 {
            return Err(Error::MalformedArray("array has no rows".into()));
        }
        let num_cols = rows[0].len();
        if num_cols == 0 {
            return Err(Error::MalformedArray("array has no columns".into()));
        }
        if let Some((j, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != num_cols) {
            return Err(Error::MalformedArray(format!(
                "row {} has {} entries, row 1 has {num_cols}",
                j + 1,
                row.len()
            )));
        }
        let entries: Vec<Entry> = rows.into_iter().flatten().collect();
        Self::from_flat(num_rows, num_cols, entries, symbol_count)
    }

    pub fn from_flat(
        num_rows: usize,
        num_cols: usize,
        entries: Vec<Entry>,
        symbol_count: u32,
    ) -> Result<Self> {
        if num_rows == 0 || num_cols == 0 || entries.len() != num_rows * num_cols {
            return Err(Error::MalformedArray(format!(
                "{} entries do not form a non-empty {num_rows}x{num_cols} array",
                entries.len()
            )));
        }
        for (idx, e) in entries.iter().enumerate() {
            if let Entry::Symbol(s) = *e {
                if s == 0 || s > symbol_count {
                    return Err(Error::MalformedArray(format!(
                        "symbol {s} at row {}, column {} is outside 1..={symbol_count}",
                        idx / num_cols + 1,
                        idx % num_cols + 1
                    )));
                }
            }
        }
        Ok(PdaArray {
            num_rows,
            num_cols,
            symbol_count,
            entries,
        })
    }

    /// Subpacketization level `F`.
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    /// Number of users `K`.
    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    /// Declared number of ordinary symbols `S`.
    pub fn symbol_count(&self) -> u32 {
        self.symbol_count
    }

    pub fn get(&self, row: usize, col: usize) -> Entry {
        self.entries[row * self.num_cols + col]
    }

    pub fn row(&self, row: usize) -> &[Entry] {
        &self.entries[row * self.num_cols..(row + 1) * self.num_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Entry]> {
        self.entries.chunks(self.num_cols)
    }

    pub fn star_count(&self, col: usize) -> usize {
        (0..self.num_rows)
            .filter(|&j| self.get(j, col).is_star())
            .count()
    }

    /// Cells `(row, col)` holding each symbol; index `s - 1` for symbol `s`.
    pub fn occurrences(&self) -> Vec<Vec<(usize, usize)>> {
        let mut occ = vec![Vec::new(); self.symbol_count as usize];
        for (idx, e) in self.entries.iter().enumerate() {
            if let Entry::Symbol(s) = *e {
                occ[s as usize - 1].push((idx / self.num_cols, idx % self.num_cols));
            }
        }
        occ
    }
}

impl fmt::Display for PdaArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.symbol_count.max(1).to_string().len();
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|e| format!("{:>width$}", e.to_string()))
                .collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Parses rows separated by `;` or newlines, entries by whitespace or commas,
/// e.g. `"* 1 2; 1 * 3; 2 3 *"`. `S` is taken as the largest symbol present.
impl FromStr for PdaArray {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in s.split([';', '\n']) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| match t {
                    "*" => Ok(Entry::Star),
                    _ => t
                        .parse::<u32>()
                        .map(Entry::Symbol)
                        .map_err(|_| Error::MalformedArray(format!("bad entry {t:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let max = rows
            .iter()
            .flatten()
            .filter_map(|e| e.symbol())
            .max()
            .unwrap_or(0);
        PdaArray::new(rows, max)
    }
}

/// A cell position, 0-based.
pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// C1: column `col` has `found` stars while column 1 has `expected`.
    StarCount {
        col: usize,
        expected: usize,
        found: usize,
    },
    /// C2: the symbol never occurs.
    MissingSymbol { symbol: u32 },
    /// C3-a: two occurrences share a row.
    SameRow {
        symbol: u32,
        first: Cell,
        second: Cell,
    },
    /// C3-a: two occurrences share a column.
    SameColumn {
        symbol: u32,
        first: Cell,
        second: Cell,
    },
    /// C3-b: an opposite corner of the 2x2 sub-array is not a star.
    CornerNotStar {
        symbol: u32,
        first: Cell,
        second: Cell,
        corner: Cell,
    },
}

impl fmt::Display for Violation {
    /// Cells are printed 1-based as `(row, col)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |(j, k): Cell| format!("({}, {})", j + 1, k + 1);
        match *self {
            Violation::StarCount {
                col,
                expected,
                found,
            } => {
                write!(
                    f,
                    "C1: column {} has {found} stars, expected {expected}",
                    col + 1
                )
            }
            Violation::MissingSymbol { symbol } => write!(f, "C2: symbol {symbol} does not occur"),
            Violation::SameRow {
                symbol,
                first,
                second,
            } => {
                write!(
                    f,
                    "C3: symbol {symbol} repeats in a row at {} and {}",
                    c(first),
                    c(second)
                )
            }
            Violation::SameColumn {
                symbol,
                first,
                second,
            } => {
                write!(
                    f,
                    "C3: symbol {symbol} repeats in a column at {} and {}",
                    c(first),
                    c(second)
                )
            }
            Violation::CornerNotStar {
                symbol,
                first,
                second,
                corner,
            } => write!(
                f,
                "C3: symbol {symbol} at {} and {} but {} is not a star",
                c(first),
                c(second),
                c(corner)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaReport {
    pub is_valid: bool,
    pub k: usize,
    pub f: usize,
    /// Stars per column (taken from column 1 when C1 fails).
    pub z: usize,
    pub s: u32,
    /// `Some(g)` iff every symbol occurs exactly `g` times (and `S >= 1`).
    pub g_regular: Option<usize>,
    pub violations: Vec<Violation>,
}

pub fn check_pda(array: &PdaArray) -> PdaReport {
    let mut violations = Vec::new();

    let z = array.star_count(0);
    for col in 1..array.num_cols() {
        let found = array.star_count(col);
        if found != z {
            violations.push(Violation::StarCount {
                col,
                expected: z,
                found,
            });
        }
    }

    let occurrences = array.occurrences();
    for (idx, occ) in occurrences.iter().enumerate() {
        let symbol = idx as u32 + 1;
        if occ.is_empty() {
            violations.push(Violation::MissingSymbol { symbol });
        }
        for (a, &first) in occ.iter().enumerate() {
            for &second in &occ[a + 1..] {
                let ((j1, k1), (j2, k2)) = (first, second);
                if j1 == j2 {
                    violations.push(Violation::SameRow {
                        symbol,
                        first,
                        second,
                    });
                    continue;
                }
                if k1 == k2 {
                    violations.push(Violation::SameColumn {
                        symbol,
                        first,
                        second,
                    });
                    continue;
                }
                for corner in [(j1, k2), (j2, k1)] {
                    if !array.get(corner.0, corner.1).is_star() {
                        violations.push(Violation::CornerNotStar {
                            symbol,
                            first,
                            second,
                            corner,
                        });
                    }
                }
            }
        }
    }

    let g_regular = match occurrences.first() {
        Some(first) if !first.is_empty() && occurrences.iter().all(|o| o.len() == first.len()) => {
            Some(first.len())
        }
        _ => None,
    };

    PdaReport {
        is_valid: violations.is_empty(),
        k: array.num_cols(),
        f: array.num_rows(),
        z,
        s: array.symbol_count(),
        g_regular,
        violations,
    }
}

/// Removes the given columns (0-based). Symbols left without any occurrence
/// are dropped and the survivors renumbered `1..=S'` in their original order.
pub fn delete_columns(array: &PdaArray, cols: &BTreeSet<usize>) -> Result<PdaArray> {
    if let Some(&bad) = cols.iter().find(|&&c| c >= array.num_cols()) {
        return Err(Error::ParamOutOfRange(format!(
            "column {} does not exist in a {}-column array",
            bad + 1,
            array.num_cols()
        )));
    }
    if cols.len() >= array.num_cols() {
        return Err(Error::ParamOutOfRange(
            "cannot delete every column of an array".into(),
        ));
    }
    let keep: Vec<usize> = (0..array.num_cols())
        .filter(|c| !cols.contains(c))
        .collect();

    let mut survives = vec![false; array.symbol_count() as usize];
    for j in 0..array.num_rows() {
        for &c in &keep {
            if let Entry::Symbol(s) = array.get(j, c) {
                survives[s as usize - 1] = true;
            }
        }
    }
    let mut renumber = vec![0u32; survives.len()];
    let mut next = 0u32;
    for (old, &alive) in survives.iter().enumerate() {
        if alive {
            next += 1;
            renumber[old] = next;
        }
    }

    let mut entries = Vec::with_capacity(array.num_rows() * keep.len());
    for j in 0..array.num_rows() {
        for &c in &keep {
            entries.push(match array.get(j, c) {
                Entry::Star => Entry::Star,
                Entry::Symbol(s) => Entry::Symbol(renumber[s as usize - 1]),
            });
        }
    }
    PdaArray::from_flat(array.num_rows(), keep.len(), entries, next)
}

/// Shared-link performance of a PDA: `M/N = Z/F`, `R = S/F`, subpacketization `F`.
pub fn scheme_params(array: &PdaArray, n_files: usize) -> RatePoint {
    let f = array.num_rows() as i64;
    RatePoint {
        scheme: "PDA".into(),
        network: None,
        n_files: Some(n_files),
        memory_ratio: Rational::new(array.star_count(0) as i64, f),
        rate: Rational::new(array.symbol_count() as i64, f),
        subpacketization: (array.num_rows() as u64).into(),
    }
}

/// A PDA whose columns are labelled by `r`-subsets of `[h]`, with every
/// ordinary symbol designated to a relay shared by all of its columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpdaScheme {
    pub array: PdaArray,
    /// One label per column.
    pub labels: Vec<UserLabel>,
    /// Relay (1-based) that forwards symbol `s`, at index `s - 1`.
    pub relay_of_symbol: Vec<usize>,
}

impl CpdaScheme {
    pub fn new(
        array: PdaArray,
        labels: Vec<UserLabel>,
        relay_of_symbol: Vec<usize>,
    ) -> Result<Self> {
        if labels.len() != array.num_cols() {
            return Err(Error::LabelMismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                array.num_cols()
            )));
        }
        if relay_of_symbol.len() != array.symbol_count() as usize {
            return Err(Error::MalformedArray(format!(
                "{} relay designations for {} symbols",
                relay_of_symbol.len(),
                array.symbol_count()
            )));
        }
        Ok(CpdaScheme {
            array,
            labels,
            relay_of_symbol,
        })
    }

    /// Labels the columns and designates each symbol to the smallest relay
    /// shared by all of its columns.
    pub fn with_designated_relays(array: PdaArray, labels: Vec<UserLabel>) -> Result<Self> {
        if labels.len() != array.num_cols() {
            return Err(Error::LabelMismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                array.num_cols()
            )));
        }
        let relays = shared_relays(&array, &labels)?
            .into_iter()
            .map(|common| common[0])
            .collect();
        CpdaScheme::new(array, labels, relays)
    }

    /// `(h, r)` implied by the labels: `r` is the label size, `h` the largest relay.
    pub fn network(&self) -> (usize, usize) {
        let r = self.labels.first().map_or(0, |l| l.len());
        let h = self
            .labels
            .iter()
            .filter_map(|l| l.elements().last().copied())
            .max()
            .unwrap_or(0);
        (h, r)
    }

    /// Number of symbols designated to each relay, index `i - 1` for relay `i`.
    pub fn loads(&self, h: usize) -> Vec<usize> {
        let mut loads = vec![0; h];
        for &relay in &self.relay_of_symbol {
            if (1..=h).contains(&relay) {
                loads[relay - 1] += 1;
            }
        }
        loads
    }
}

/// For each symbol, the sorted relays common to the labels of all columns
/// containing it. Fails on the first symbol whose intersection is empty.
fn shared_relays(array: &PdaArray, labels: &[UserLabel]) -> Result<Vec<Vec<usize>>> {
    array
        .occurrences()
        .iter()
        .enumerate()
        .map(|(idx, occ)| {
            let mut common: Option<Vec<usize>> = None;
            for &(_, col) in occ {
                let label = labels[col].elements();
                common = Some(match common {
                    None => label.to_vec(),
                    Some(c) => c.into_iter().filter(|x| label.contains(x)).collect(),
                });
            }
            match common {
                Some(c) if !c.is_empty() => Ok(c),
                _ => Err(Error::EmptyIntersection {
                    symbol: idx as u32 + 1,
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpdaReport {
    pub pda: PdaReport,
    /// `|S_i|` for each relay `i`, index `i - 1`.
    pub loads: Vec<usize>,
    pub balanced: bool,
}

/// Validates a labelled PDA as a C-PDA for the `(h, r)` combination network.
pub fn check_cpda(scheme: &CpdaScheme, h: usize, r: usize) -> Result<CpdaReport> {
    if r == 0 || r > h {
        return Err(Error::ParamOutOfRange(format!(
            "need 1 <= r <= h, got h={h}, r={r}"
        )));
    }
    let pda = check_pda(&scheme.array);
    if !pda.is_valid {
        return Err(Error::InvalidPda(format!(
            "{} violation(s), first: {:?}",
            pda.violations.len(),
            pda.violations[0]
        )));
    }

    let expected_k = combinatorics::binomial(h, r) as usize;
    if scheme.labels.len() != expected_k || scheme.array.num_cols() != expected_k {
        return Err(Error::LabelMismatch(format!(
            "a ({h},{r}) network has {expected_k} users, got {} columns and {} labels",
            scheme.array.num_cols(),
            scheme.labels.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for label in &scheme.labels {
        if label.len() != r || label.elements().iter().any(|&x| x > h) {
            return Err(Error::LabelMismatch(format!(
                "{label} is not an {r}-subset of [{h}]"
            )));
        }
        if !seen.insert(label) {
            return Err(Error::LabelMismatch(format!("label {label} is repeated")));
        }
    }

    let common = shared_relays(&scheme.array, &scheme.labels)?;
    if scheme.relay_of_symbol.len() != common.len() {
        return Err(Error::MalformedArray(format!(
            "{} relay designations for {} symbols",
            scheme.relay_of_symbol.len(),
            common.len()
        )));
    }
    for (idx, (relay, shared)) in scheme.relay_of_symbol.iter().zip(&common).enumerate() {
        if !shared.contains(relay) {
            return Err(Error::RelayMismatch {
                symbol: idx as u32 + 1,
                relay: *relay,
            });
        }
    }

    let loads = scheme.loads(h);
    let balanced = loads.windows(2).all(|w| w[0] == w[1]);
    Ok(CpdaReport {
        pda,
        loads,
        balanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2() -> PdaArray {
        "* 1 2; 1 * 3; 2 3 *".parse().unwrap()
    }

    fn labels(sets: &[&[usize]]) -> Vec<UserLabel> {
        sets.iter()
            .map(|s| UserLabel::new(s.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn example2_is_a_2_regular_pda() {
        let report = check_pda(&example2());
        assert!(report.is_valid, "{:?}", report.violations);
        assert_eq!((report.k, report.f, report.z, report.s), (3, 3, 1, 3));
        assert_eq!(report.g_regular, Some(2));
    }

    #[test]
    fn all_star_array_is_valid() {
        let array = PdaArray::new(vec![vec![Entry::Star; 4]; 3], 0).unwrap();
        let report = check_pda(&array);
        assert!(report.is_valid);
        assert_eq!(report.z, 3);
        assert_eq!(report.g_regular, None);
    }

    #[test]
    fn repeated_symbol_in_row_violates_c3a() {
        let report = check_pda(&"1 1; * *".parse().unwrap());
        assert!(!report.is_valid);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SameRow { symbol: 1, .. })));
    }

    #[test]
    fn corner_and_c1_violations() {
        // symbol 1 at (0,0),(1,1) needs (0,1),(1,0) to be stars
        let report = check_pda(&"1 2; 3 1".parse().unwrap());
        assert!(matches!(
            report.violations[..],
            [
                Violation::CornerNotStar { corner: (0, 1), .. },
                Violation::CornerNotStar { corner: (1, 0), .. }
            ]
        ));
        let report = check_pda(&"* 1; 1 2".parse().unwrap());
        assert!(report.violations.contains(&Violation::StarCount {
            col: 1,
            expected: 1,
            found: 0
        }));
    }

    #[test]
    fn missing_symbol_violates_c2() {
        let array = PdaArray::new(vec![vec![Entry::Star, Entry::Symbol(1)]], 2).unwrap();
        let report = check_pda(&array);
        assert!(report
            .violations
            .contains(&Violation::MissingSymbol { symbol: 2 }));
    }

    #[test]
    fn malformed_arrays_are_rejected() {
        let ragged = PdaArray::new(vec![vec![Entry::Star], vec![Entry::Star, Entry::Star]], 0);
        assert!(matches!(ragged, Err(Error::MalformedArray(_))));
        let too_big = PdaArray::new(vec![vec![Entry::Symbol(3)]], 2);
        assert!(matches!(too_big, Err(Error::MalformedArray(_))));
    }

    #[test]
    fn deleting_columns_compacts_symbols() {
        let a = example2();
        let one: BTreeSet<usize> = [2].into();
        let out = delete_columns(&a, &one).unwrap();
        assert_eq!(out, "* 1; 1 *; 2 3".parse().unwrap());
        assert!(check_pda(&out).is_valid);

        let two: BTreeSet<usize> = [1, 2].into();
        let out = delete_columns(&a, &two).unwrap();
        assert_eq!(out, "*; 1; 2".parse().unwrap());
        assert_eq!(out.symbol_count(), 2);

        assert_eq!(delete_columns(&a, &BTreeSet::new()).unwrap(), a);
        assert!(delete_columns(&a, &[0, 1, 2].into()).is_err());
        assert!(delete_columns(&a, &[5].into()).is_err());
    }

    #[test]
    fn shared_link_parameters() {
        let p = scheme_params(&example2(), 3);
        assert_eq!(p.memory_ratio, Rational::new(1, 3));
        assert_eq!(p.rate, Rational::from_integer(1));

        let full = PdaArray::new(vec![vec![Entry::Star; 2]; 2], 0).unwrap();
        let p = scheme_params(&full, 5);
        assert_eq!(p.memory_ratio, Rational::from_integer(1));
        assert_eq!(p.rate, Rational::from_integer(0));
    }

    #[test]
    fn designation_and_label_errors() {
        let array = example2();
        // symbol 3 sits in columns {1,3} and {2,3}; symbol 1 in {1,2} and {1,3}
        let s =
            CpdaScheme::with_designated_relays(array.clone(), labels(&[&[1, 2], &[1, 3], &[2, 3]]))
                .unwrap();
        assert_eq!(s.relay_of_symbol, vec![1, 2, 3]);
        let report = check_cpda(&s, 3, 2).unwrap();
        assert_eq!(report.loads, vec![1, 1, 1]);
        assert!(report.balanced);

        let dup = CpdaScheme::new(
            array.clone(),
            labels(&[&[1, 2], &[1, 2], &[2, 3]]),
            vec![1, 2, 2],
        )
        .unwrap();
        assert!(matches!(
            check_cpda(&dup, 3, 2),
            Err(Error::LabelMismatch(_))
        ));

        let wrong_relay = CpdaScheme::new(
            array.clone(),
            labels(&[&[1, 2], &[1, 3], &[2, 3]]),
            vec![2, 2, 3],
        )
        .unwrap();
        assert!(matches!(
            check_cpda(&wrong_relay, 3, 2),
            Err(Error::RelayMismatch {
                symbol: 1,
                relay: 2
            })
        ));

        assert!(matches!(check_cpda(&s, 4, 2), Err(Error::LabelMismatch(_))));
    }
}
