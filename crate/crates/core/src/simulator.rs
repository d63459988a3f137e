//! Byte-exact execution of the placement and delivery phases.
//!
//! Files are split into `replicas x F` equal pieces; piece `ρF + j` (0-based
//! replica `ρ`, row `j`) is what row `j` of replica `ρ` refers to. Indices
//! in caches and packets are 1-based to match the `W[n, i]` notation.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::pda::{CpdaScheme, Entry};
use crate::resolvable::UserLabel;
use crate::transform::BalancedScheme;
use crate::{Error, Rational, Result};

/// Upper limit on `N^K` for exhaustive demand enumeration.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// The file library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkInstance {
    pub n_files: usize,
    pub file_bits: u64,
    pub seed: u64,
    pub library: Vec<Vec<u8>>,
}

impl NetworkInstance {
    pub fn file_bytes(&self) -> usize {
        (self.file_bits / 8) as usize
    }

    /// `W_n`, 1-based.
    pub fn file(&self, n: usize) -> &[u8] {
        &self.library[n - 1]
    }
}

/// Deterministic pseudo-random library of `n_files` files of `file_bits` bits.
pub fn make_library(n_files: usize, file_bits: u64, seed: u64) -> Result<NetworkInstance> {
    if n_files == 0 {
        return Err(Error::ParamOutOfRange("need at least one file".into()));
    }
    if file_bits == 0 || !file_bits.is_multiple_of(8) {
        return Err(Error::Divisibility(format!(
            "file size of {file_bits} bits is not a positive multiple of 8"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let library = (0..n_files)
        .map(|_| {
            let mut buf = vec![0u8; (file_bits / 8) as usize];
            rng.fill_bytes(&mut buf);
            buf
        })
        .collect();
    Ok(NetworkInstance {
        n_files,
        file_bits,
        seed,
        library,
    })
}

/// Requested file (1-based) of every user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand(BTreeMap<UserLabel, usize>);

impl Demand {
    pub fn new(request: BTreeMap<UserLabel, usize>) -> Self {
        Demand(request)
    }

    /// Pairs `users[k]` with `files[k]`.
    pub fn from_pairs(users: &[UserLabel], files: &[usize]) -> Self {
        Demand(users.iter().cloned().zip(files.iter().copied()).collect())
    }

    pub fn file_of(&self, user: &UserLabel) -> Option<usize> {
        self.0.get(user).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UserLabel, &usize)> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserCache {
    /// `(file, piece) -> bytes`, both 1-based.
    pub entries: BTreeMap<(usize, usize), Vec<u8>>,
}

impl UserCache {
    pub fn bits(&self) -> u64 {
        self.entries.values().map(|v| v.len() as u64 * 8).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub replica: usize,
    pub symbol: u32,
    /// `(file, piece)` pairs XORed into the payload, 1-based.
    pub constituents: Vec<(usize, usize)>,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub cache_contents: BTreeMap<UserLabel, UserCache>,
    /// Packets sent to relay `i` at index `i - 1`.
    pub relay_payloads: Vec<Vec<CodedPacket>>,
    pub per_relay_bits: Vec<u64>,
    pub decoded: BTreeMap<UserLabel, Vec<u8>>,
}

/// Per-replica lookup tables shared by placement, delivery and decoding.
struct Layout<'a> {
    scheme: &'a BalancedScheme,
    rows: usize,
    piece_bytes: usize,
    column_of: Vec<BTreeMap<&'a UserLabel, usize>>,
    occurrences: Vec<Vec<Vec<(usize, usize)>>>,
}

impl<'a> Layout<'a> {
    fn new(scheme: &'a BalancedScheme, net: &NetworkInstance) -> Result<Self> {
        let first = scheme
            .replicas
            .first()
            .ok_or_else(|| Error::ParamOutOfRange("scheme has no replicas".into()))?;
        let rows = first.array.num_rows();
        if scheme.replicas.iter().any(|r| r.array.num_rows() != rows) {
            return Err(Error::MalformedArray(
                "replicas differ in subpacketization".into(),
            ));
        }
        let pieces = rows * scheme.replicas.len();
        if !net.file_bytes().is_multiple_of(pieces) {
            return Err(Error::Divisibility(format!(
                "{} bytes per file cannot be split into {pieces} equal pieces",
                net.file_bytes()
            )));
        }
        Ok(Layout {
            scheme,
            rows,
            piece_bytes: net.file_bytes() / pieces,
            column_of: scheme
                .replicas
                .iter()
                .map(|r| r.labels.iter().enumerate().map(|(c, t)| (t, c)).collect())
                .collect(),
            occurrences: scheme
                .replicas
                .iter()
                .map(|r| r.array.occurrences())
                .collect(),
        })
    }

    fn replicas(&self) -> impl Iterator<Item = (usize, &'a CpdaScheme)> {
        self.scheme.replicas.iter().enumerate()
    }

    /// 1-based piece index of row `j` in replica `rho`.
    fn piece(&self, rho: usize, j: usize) -> usize {
        rho * self.rows + j + 1
    }

    fn slice<'n>(&self, net: &'n NetworkInstance, file: usize, piece: usize) -> &'n [u8] {
        let start = (piece - 1) * self.piece_bytes;
        &net.file(file)[start..start + self.piece_bytes]
    }

    fn column(&self, rho: usize, user: &UserLabel) -> Result<usize> {
        self.column_of[rho]
            .get(user)
            .copied()
            .ok_or_else(|| Error::ParamOutOfRange(format!("{user} is not a user of the scheme")))
    }

    fn users(&self) -> Vec<&'a UserLabel> {
        let mut users: Vec<_> = self.scheme.replicas[0].labels.iter().collect();
        users.sort();
        users
    }

    fn requested(&self, demand: &Demand, net: &NetworkInstance, user: &UserLabel) -> Result<usize> {
        match demand.file_of(user) {
            Some(n) if (1..=net.n_files).contains(&n) => Ok(n),
            Some(n) => Err(Error::ParamOutOfRange(format!(
                "{user} requests file {n} of {}",
                net.n_files
            ))),
            None => Err(Error::ParamOutOfRange(format!(
                "demand has no request for {user}"
            ))),
        }
    }
}

fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

fn place_with(
    layout: &Layout<'_>,
    net: &NetworkInstance,
) -> Result<BTreeMap<UserLabel, UserCache>> {
    let mut caches = BTreeMap::new();
    for user in layout.users() {
        let mut cache = UserCache::default();
        for (rho, replica) in layout.replicas() {
            let col = layout.column(rho, user)?;
            for j in 0..layout.rows {
                if replica.array.get(j, col).is_star() {
                    let piece = layout.piece(rho, j);
                    for n in 1..=net.n_files {
                        cache
                            .entries
                            .insert((n, piece), layout.slice(net, n, piece).to_vec());
                    }
                }
            }
        }
        caches.insert(user.clone(), cache);
    }
    Ok(caches)
}

fn deliver_with(
    layout: &Layout<'_>,
    net: &NetworkInstance,
    demand: &Demand,
) -> Result<Vec<Vec<CodedPacket>>> {
    let mut payloads = vec![Vec::new(); layout.scheme.h];
    for (rho, replica) in layout.replicas() {
        for (idx, occ) in layout.occurrences[rho].iter().enumerate() {
            let mut payload = vec![0u8; layout.piece_bytes];
            let mut constituents = Vec::with_capacity(occ.len());
            for &(j, col) in occ {
                let file = layout.requested(demand, net, &replica.labels[col])?;
                let piece = layout.piece(rho, j);
                xor_into(&mut payload, layout.slice(net, file, piece));
                constituents.push((file, piece));
            }
            let relay = replica.relay_of_symbol[idx];
            payloads
                .get_mut(relay.wrapping_sub(1))
                .ok_or_else(|| {
                    Error::ParamOutOfRange(format!("relay {relay} outside [{}]", layout.scheme.h))
                })?
                .push(CodedPacket {
                    replica: rho,
                    symbol: idx as u32 + 1,
                    constituents,
                    payload,
                });
        }
    }
    Ok(payloads)
}

fn decode_with(
    layout: &Layout<'_>,
    net: &NetworkInstance,
    demand: &Demand,
    user: &UserLabel,
    payloads: &[Vec<CodedPacket>],
    cache: &UserCache,
) -> Result<Vec<u8>> {
    let wanted = layout.requested(demand, net, user)?;
    // only the relays the user is wired to
    let mut received: BTreeMap<(usize, u32), &[u8]> = BTreeMap::new();
    for &relay in user.elements() {
        for packet in payloads.get(relay - 1).into_iter().flatten() {
            received.insert((packet.replica, packet.symbol), &packet.payload);
        }
    }
    let cached = |file: usize, piece: usize| {
        cache
            .entries
            .get(&(file, piece))
            .ok_or_else(|| Error::CacheMiss {
                user: user.to_string(),
                file,
                subpacket: piece,
            })
    };

    let mut out = Vec::with_capacity(net.file_bytes());
    for (rho, replica) in layout.replicas() {
        let col = layout.column(rho, user)?;
        for j in 0..layout.rows {
            let piece = layout.piece(rho, j);
            match replica.array.get(j, col) {
                Entry::Star => out.extend_from_slice(cached(wanted, piece)?),
                Entry::Symbol(s) => {
                    let packet = received
                        .get(&(rho, s))
                        .ok_or_else(|| Error::MissingPacket {
                            user: user.to_string(),
                            symbol: s,
                        })?;
                    let mut buf = packet.to_vec();
                    for &(j2, col2) in &layout.occurrences[rho][s as usize - 1] {
                        if (j2, col2) == (j, col) {
                            continue;
                        }
                        let other = layout.requested(demand, net, &replica.labels[col2])?;
                        xor_into(&mut buf, cached(other, layout.piece(rho, j2))?);
                    }
                    out.extend_from_slice(&buf);
                }
            }
        }
    }
    Ok(out)
}

/// Cache contents of every user.
pub fn place(
    scheme: &BalancedScheme,
    net: &NetworkInstance,
) -> Result<BTreeMap<UserLabel, UserCache>> {
    place_with(&Layout::new(scheme, net)?, net)
}

/// Coded packets sent to each relay: one per symbol, the XOR of the
/// requested pieces at every cell holding that symbol.
pub fn deliver(
    scheme: &BalancedScheme,
    net: &NetworkInstance,
    demand: &Demand,
) -> Result<Vec<Vec<CodedPacket>>> {
    deliver_with(&Layout::new(scheme, net)?, net, demand)
}

/// Reconstructs the file requested by `user` from the payloads of its relays
/// and its cache.
pub fn decode(
    scheme: &BalancedScheme,
    net: &NetworkInstance,
    demand: &Demand,
    user: &UserLabel,
    payloads: &[Vec<CodedPacket>],
    cache: &UserCache,
) -> Result<Vec<u8>> {
    decode_with(
        &Layout::new(scheme, net)?,
        net,
        demand,
        user,
        payloads,
        cache,
    )
}

fn relay_bits(layout: &Layout<'_>, payloads: &[Vec<CodedPacket>]) -> Vec<u64> {
    payloads
        .iter()
        .map(|p| p.len() as u64 * layout.piece_bytes as u64 * 8)
        .collect()
}

/// Full placement, delivery and decoding for one demand.
pub fn simulate(
    scheme: &BalancedScheme,
    net: &NetworkInstance,
    demand: &Demand,
) -> Result<Transcript> {
    let layout = Layout::new(scheme, net)?;
    let cache_contents = place_with(&layout, net)?;
    let relay_payloads = deliver_with(&layout, net, demand)?;
    let mut decoded = BTreeMap::new();
    for (user, cache) in &cache_contents {
        decoded.insert(
            user.clone(),
            decode_with(&layout, net, demand, user, &relay_payloads, cache)?,
        );
    }
    Ok(Transcript {
        per_relay_bits: relay_bits(&layout, &relay_payloads),
        cache_contents,
        relay_payloads,
        decoded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandPolicy {
    /// Every vector in `[N]^K`.
    Exhaustive,
    Random {
        count: usize,
        seed: u64,
    },
    Fixed(Vec<Demand>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeFailure {
    pub demand_index: usize,
    pub user: String,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    pub all_decoded: bool,
    pub demands_run: usize,
    pub max_relay_rate: Rational,
    pub per_relay_rates: Vec<Rational>,
    pub per_relay_bits: Vec<u64>,
    /// Pieces per file actually used.
    pub f_effective: usize,
    /// Measured cache bits over `N B`.
    pub memory_ratio: Rational,
    pub cache_bits_per_user: u64,
    /// Per-relay bit counts were identical for every demand.
    pub demand_oblivious: bool,
    /// Packets reaching users through their relays, and how many of those the
    /// receiving user actually needed (relays forward everything).
    pub forwarded_packets: usize,
    pub useful_packets: usize,
    pub failures: Vec<DecodeFailure>,
}

fn expand_demands(
    users: &[&UserLabel],
    n_files: usize,
    policy: &DemandPolicy,
) -> Result<Vec<Demand>> {
    let owned: Vec<UserLabel> = users.iter().map(|u| (*u).clone()).collect();
    match policy {
        DemandPolicy::Exhaustive => {
            let total = (n_files as u64)
                .checked_pow(users.len() as u32)
                .filter(|&t| t <= EXHAUSTIVE_LIMIT)
                .ok_or_else(|| {
                    Error::ParamOutOfRange(format!(
                        "{n_files}^{} demands exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}",
                        users.len()
                    ))
                })?;
            Ok((0..total)
                .map(|mut idx| {
                    // first user is the most significant digit
                    let mut files = vec![0; users.len()];
                    for slot in files.iter_mut().rev() {
                        *slot = (idx % n_files as u64) as usize + 1;
                        idx /= n_files as u64;
                    }
                    Demand::from_pairs(&owned, &files)
                })
                .collect())
        }
        DemandPolicy::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..*count)
                .map(|_| {
                    let files: Vec<usize> = (0..users.len())
                        .map(|_| rng.random_range(1..=n_files))
                        .collect();
                    Demand::from_pairs(&owned, &files)
                })
                .collect())
        }
        DemandPolicy::Fixed(demands) => Ok(demands.clone()),
    }
}

/// Places once, then delivers and decodes every demand of the policy,
/// comparing each decoded file to the library byte for byte.
pub fn run_round(
    scheme: &BalancedScheme,
    net: &NetworkInstance,
    policy: &DemandPolicy,
) -> Result<RoundReport> {
    let layout = Layout::new(scheme, net)?;
    let caches = place_with(&layout, net)?;
    let users = layout.users();
    let demands = expand_demands(&users, net.n_files, policy)?;
    if demands.is_empty() {
        return Err(Error::ParamOutOfRange(
            "demand policy produced no demands".into(),
        ));
    }

    let outcomes: Vec<Result<(Vec<u64>, Vec<DecodeFailure>)>> = demands
        .par_iter()
        .enumerate()
        .map(|(d_idx, demand)| {
            let payloads = deliver_with(&layout, net, demand)?;
            let mut failures = Vec::new();
            for (user, cache) in &caches {
                let wanted = layout.requested(demand, net, user)?;
                match decode_with(&layout, net, demand, user, &payloads, cache) {
                    Ok(bytes) if bytes == net.file(wanted) => {}
                    Ok(_) => failures.push(DecodeFailure {
                        demand_index: d_idx,
                        user: user.to_string(),
                        code: "mismatch",
                        message: format!("decoded bytes differ from W_{wanted}"),
                    }),
                    Err(e) => failures.push(DecodeFailure {
                        demand_index: d_idx,
                        user: user.to_string(),
                        code: e.code(),
                        message: e.to_string(),
                    }),
                }
            }
            Ok((relay_bits(&layout, &payloads), failures))
        })
        .collect();

    let mut per_relay_bits: Option<Vec<u64>> = None;
    let mut demand_oblivious = true;
    let mut failures = Vec::new();
    for outcome in outcomes {
        let (bits, fails) = outcome?;
        match &per_relay_bits {
            None => per_relay_bits = Some(bits),
            Some(first) if *first != bits => demand_oblivious = false,
            Some(_) => {}
        }
        failures.extend(fails);
    }
    let per_relay_bits = per_relay_bits.expect("at least one demand");

    let file_bits = net.file_bits as i64;
    let per_relay_rates: Vec<Rational> = per_relay_bits
        .iter()
        .map(|&b| Rational::new(b as i64, file_bits))
        .collect();
    let max_relay_rate = per_relay_rates.iter().copied().max().unwrap_or_default();

    let cache_bits: Vec<u64> = caches.values().map(UserCache::bits).collect();
    let cache_bits_per_user = cache_bits.iter().copied().max().unwrap_or(0);
    if cache_bits.iter().any(|&b| b != cache_bits_per_user) {
        return Err(Error::Internal(
            "users hold caches of different sizes".into(),
        ));
    }

    let (forwarded_packets, useful_packets) = forwarding_stats(&layout, net, &demands[0])?;

    Ok(RoundReport {
        all_decoded: failures.is_empty(),
        demands_run: demands.len(),
        max_relay_rate,
        per_relay_rates,
        per_relay_bits,
        f_effective: layout.rows * scheme.replicas.len(),
        memory_ratio: Rational::new(cache_bits_per_user as i64, net.n_files as i64 * file_bits),
        cache_bits_per_user,
        demand_oblivious,
        forwarded_packets,
        useful_packets,
        failures,
    })
}

fn forwarding_stats(
    layout: &Layout<'_>,
    net: &NetworkInstance,
    demand: &Demand,
) -> Result<(usize, usize)> {
    let payloads = deliver_with(layout, net, demand)?;
    let mut forwarded = 0;
    let mut useful = 0;
    for user in layout.users() {
        for &relay in user.elements() {
            for packet in &payloads[relay - 1] {
                forwarded += 1;
                let col = layout.column(packet.replica, user)?;
                let occ = &layout.occurrences[packet.replica][packet.symbol as usize - 1];
                if occ.iter().any(|&(_, c)| c == col) {
                    useful += 1;
                }
            }
        }
    }
    Ok((forwarded, useful))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cutset_array_b;
    use crate::pda::PdaArray;
    use crate::resolvable::enumerate_users;

    #[test]
    fn library_is_deterministic() {
        let a = make_library(6, 48 * 8, 7).unwrap();
        let b = make_library(6, 48 * 8, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.library, make_library(6, 48 * 8, 8).unwrap().library);
        let one = make_library(1, 8, 0).unwrap();
        assert_eq!(one.library.len(), 1);
        assert_eq!(one.library[0].len(), 1);
        assert!(matches!(
            make_library(2, 12, 0),
            Err(Error::Divisibility(_))
        ));
        assert!(matches!(make_library(2, 0, 0), Err(Error::Divisibility(_))));
    }

    #[test]
    fn indivisible_file_size_is_rejected() {
        let b = BalancedScheme::single(4, cutset_array_b(4, 2).unwrap());
        let net = make_library(2, 6 * 8, 1).unwrap();
        assert!(matches!(place(&b, &net), Err(Error::Divisibility(_))));
    }

    #[test]
    fn array_b_caches_half() {
        let b = BalancedScheme::single(4, cutset_array_b(4, 2).unwrap());
        let net = make_library(3, 8 * 8, 1).unwrap();
        let caches = place(&b, &net).unwrap();
        for cache in caches.values() {
            assert_eq!(cache.entries.len(), 3 * 2);
            assert_eq!(cache.bits(), 3 * 8 * 8 / 2);
        }
    }

    #[test]
    fn full_cache_needs_no_delivery() {
        let users = enumerate_users(3, 2).unwrap();
        let array: PdaArray = "* * *; * * *".parse().unwrap();
        let scheme = CpdaScheme::new(array, users.clone(), vec![]).unwrap();
        let b = BalancedScheme::single(3, scheme);
        let net = make_library(2, 16, 3).unwrap();
        let demand = Demand::from_pairs(&users, &[1, 2, 1]);
        let t = simulate(&b, &net, &demand).unwrap();
        assert!(t.relay_payloads.iter().all(|p| p.is_empty()));
        assert_eq!(t.decoded[&users[1]], net.file(2));
        let report = run_round(&b, &net, &DemandPolicy::Exhaustive).unwrap();
        assert!(report.all_decoded);
        assert_eq!(report.max_relay_rate, Rational::from_integer(0));
        assert_eq!(report.memory_ratio, Rational::from_integer(1));
    }

    #[test]
    fn missing_designation_is_reported() {
        // symbol 1 sent to relay 3, which user {1,2} is not wired to
        let users = enumerate_users(3, 2).unwrap();
        let array: PdaArray = "1 2 3".parse().unwrap();
        let scheme = CpdaScheme::new(array, users.clone(), vec![3, 1, 2]).unwrap();
        let b = BalancedScheme::single(3, scheme);
        let net = make_library(2, 8, 0).unwrap();
        let report = run_round(&b, &net, &DemandPolicy::Random { count: 3, seed: 0 }).unwrap();
        assert!(!report.all_decoded);
        assert!(report
            .failures
            .iter()
            .all(|f| f.code == "missing_packet" && f.user == "{1,2}"));
    }

    #[test]
    fn exhaustive_limit_is_enforced() {
        let b = BalancedScheme::single(4, cutset_array_b(4, 2).unwrap());
        let net = make_library(20, 4 * 8, 0).unwrap();
        assert!(run_round(&b, &net, &DemandPolicy::Exhaustive).is_err());
    }
}
