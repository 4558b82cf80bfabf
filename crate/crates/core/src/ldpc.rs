//! Regular LDPC codes with a systematic encoder and a flooding sum-product
//! decoder.
//!
//! LLRs follow `L = ln(P(bit = 0) / P(bit = 1))`: positive values favor 0.
//! Every message the decoder produces is clipped to `±LLR_CLIP`.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

/// Magnitude limit for channel, internal and total LLRs.
pub const LLR_CLIP: f64 = 30.0;

/// Default iteration limit of the sum-product decoder.
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

const VARIABLE_DEGREE: usize = 3;
const CONSTRUCTION_ATTEMPTS: u64 = 64;

#[inline]
pub fn clip_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLIP, LLR_CLIP)
    }
}

/// Dense GF(2) row stored as 64-bit words.
#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }
    #[inline]
    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }
    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Result of reducing H to systematic form.
struct SystematicForm {
    info_positions: Vec<usize>,
    /// For each parity position, the message indices whose XOR gives it.
    parity: Vec<(usize, Vec<usize>)>,
}

fn systematic_form(n: usize, rows: &[Vec<usize>]) -> SystematicForm {
    let mut dense: Vec<BitRow> = rows
        .iter()
        .map(|r| {
            let mut b = BitRow::zeros(n);
            for &c in r {
                b.set(c);
            }
            b
        })
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    // pivot from the right so parity bits gather at the end of the codeword
    for col in (0..n).rev() {
        if next == dense.len() {
            break;
        }
        let Some(found) = (next..dense.len()).find(|&r| dense[r].get(col)) else {
            continue;
        };
        dense.swap(next, found);
        let pivot_row = dense[next].clone();
        for (r, row) in dense.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let parity = pivots
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            let deps = info_positions
                .iter()
                .enumerate()
                .filter(|&(_, &c)| dense[r].get(c))
                .map(|(j, _)| j)
                .collect();
            (p, deps)
        })
        .collect();
    SystematicForm {
        info_positions,
        parity,
    }
}

/// A binary LDPC code: sparse parity-check matrix plus systematic encoder.
#[derive(Debug, Clone)]
pub struct ParityCheckCode {
    n: usize,
    k: usize,
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
    info_positions: Vec<usize>,
    parity: Vec<(usize, Vec<usize>)>,
    seed: u64,
}

/// Output of the sum-product decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderResult {
    /// Hard decisions on all `n` codeword bits.
    pub hard: Vec<u8>,
    /// Channel LLR plus all incoming check messages, per variable node.
    pub total_llr: Vec<f64>,
    pub iterations: usize,
    pub syndrome_ok: bool,
}

impl ParityCheckCode {
    /// Builds a column-weight-3 code of length `n` and the given rate from a
    /// seed. Check degrees are as even as possible (row weight 6 at rate ½)
    /// and the graph has no 4-cycles. Seeds that produce a rank-deficient
    /// matrix or a stuck construction are skipped, up to a bounded number of
    /// attempts.
    pub fn construct(n: usize, rate: f64, seed: u64) -> Result<Self> {
        let k_real = n as f64 * rate;
        if !(rate > 0.0 && rate < 1.0) || (k_real - k_real.round()).abs() > 1e-9 {
            return Err(Error::Config(format!("n·rate = {k_real} is not a valid integral message length")));
        }
        let k = k_real.round() as usize;
        let m = n - k;
        if m * (m - 1) < VARIABLE_DEGREE * (VARIABLE_DEGREE - 1) || m < VARIABLE_DEGREE {
            return Err(Error::Config(format!("too few checks ({m}) for column weight {VARIABLE_DEGREE}")));
        }
        for attempt in 0..CONSTRUCTION_ATTEMPTS {
            let s = seed.wrapping_add(attempt);
            let Some(rows) = progressive_edge_growth(n, m, s) else {
                continue;
            };
            let form = systematic_form(n, &rows);
            if form.info_positions.len() != k {
                continue;
            }
            return Ok(Self::assemble(n, rows, form, s));
        }
        Err(Error::Config(format!(
            "no full-rank 4-cycle-free code found for n={n}, rate={rate} after {CONSTRUCTION_ATTEMPTS} seeds"
        )))
    }

    /// Builds a code from explicit parity checks (column indices per row).
    /// Redundant rows are allowed; the message length is `n − rank(H)`.
    pub fn from_checks(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for r in &rows {
            if let Some(&c) = r.iter().find(|&&c| c >= n) {
                return Err(Error::Range {
                    what: "parity-check column",
                    value: c,
                    limit: n,
                });
            }
        }
        let form = systematic_form(n, &rows);
        Ok(Self::assemble(n, rows, form, 0))
    }

    fn assemble(n: usize, mut rows: Vec<Vec<usize>>, form: SystematicForm, seed: u64) -> Self {
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        let mut var_checks = vec![Vec::new(); n];
        for (c, r) in rows.iter().enumerate() {
            for &v in r {
                var_checks[v].push(c);
            }
        }
        Self {
            n,
            k: form.info_positions.len(),
            check_vars: rows,
            var_checks,
            info_positions: form.info_positions,
            parity: form.parity,
            seed,
        }
    }

    /// Block length `n`.
    pub fn block_length(&self) -> usize {
        self.n
    }
    /// Message length `K`.
    pub fn message_length(&self) -> usize {
        self.k
    }
    pub fn checks(&self) -> usize {
        self.check_vars.len()
    }
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
    /// Seed that produced this code (after skipping failed attempts).
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn check_neighbors(&self) -> &[Vec<usize>] {
        &self.check_vars
    }
    pub fn variable_neighbors(&self) -> &[Vec<usize>] {
        &self.var_checks
    }
    /// Codeword positions holding the message bits, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>> {
        check_len("LDPC message", self.k, msg.len())?;
        let mut cw = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(msg) {
            cw[pos] = b & 1;
        }
        for (p, deps) in &self.parity {
            cw[*p] = deps.iter().fold(0u8, |acc, &j| acc ^ (msg[j] & 1));
        }
        Ok(cw)
    }

    /// Message bits of a codeword (or of hard decisions).
    pub fn extract_message(&self, cw: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| cw[p]).collect()
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_vars
            .iter()
            .all(|r| r.iter().fold(0u8, |acc, &v| acc ^ bits[v]) == 0)
    }

    /// Length of the shortest cycle through the Tanner graph, if any.
    pub fn girth(&self) -> Option<usize> {
        // BFS from every variable node over the bipartite graph
        let total = self.n + self.checks();
        let mut best: Option<usize> = None;
        for start in 0..self.n {
            let mut dist = vec![usize::MAX; total];
            let mut parent = vec![usize::MAX; total];
            let mut queue = std::collections::VecDeque::new();
            dist[start] = 0;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                let nbrs: Vec<usize> = if u < self.n {
                    self.var_checks[u].iter().map(|&c| self.n + c).collect()
                } else {
                    self.check_vars[u - self.n].clone()
                };
                for w in nbrs {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Flooding sum-product decoding with the tanh rule.
    ///
    /// Stops at the first iteration whose hard decisions satisfy every check.
    pub fn decode_sum_product(&self, channel_llrs: &[f64], max_iter: usize) -> Result<DecoderResult> {
        check_len("channel LLRs", self.n, channel_llrs.len())?;
        let lambda: Vec<f64> = channel_llrs.iter().map(|&x| clip_llr(x)).collect();

        // edge e of check c lives at offsets[c] + j for its j-th neighbor
        let mut offsets = Vec::with_capacity(self.checks() + 1);
        offsets.push(0);
        for r in &self.check_vars {
            offsets.push(offsets.last().unwrap() + r.len());
        }
        let edges = *offsets.last().unwrap();
        let edge_var: Vec<usize> = self.check_vars.iter().flatten().copied().collect();
        let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[v].push(e);
        }

        let mut v2c: Vec<f64> = edge_var.iter().map(|&v| lambda[v]).collect();
        let mut c2v = vec![0.0; edges];
        let mut total = lambda.clone();
        let mut hard: Vec<u8> = total.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut iterations = 0;
        let mut syndrome_ok = false;
        let tanh_limit = (LLR_CLIP / 2.0).tanh();
        let mut t = Vec::new();
        let mut suffix = Vec::new();

        while iterations < max_iter {
            iterations += 1;
            for c in 0..self.checks() {
                let (lo, hi) = (offsets[c], offsets[c + 1]);
                let deg = hi - lo;
                t.clear();
                t.extend(v2c[lo..hi].iter().map(|&x| (0.5 * x).tanh()));
                suffix.clear();
                suffix.resize(deg + 1, 1.0);
                for j in (0..deg).rev() {
                    suffix[j] = suffix[j + 1] * t[j];
                }
                let mut prefix = 1.0;
                for j in 0..deg {
                    let prod = (prefix * suffix[j + 1]).clamp(-tanh_limit, tanh_limit);
                    c2v[lo + j] = clip_llr(2.0 * prod.atanh());
                    prefix *= t[j];
                }
            }
            for v in 0..self.n {
                let sum: f64 = lambda[v] + var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
                for &e in &var_edges[v] {
                    v2c[e] = clip_llr(sum - c2v[e]);
                }
                total[v] = clip_llr(sum);
                hard[v] = u8::from(sum < 0.0);
            }
            if self.syndrome_ok(&hard) {
                syndrome_ok = true;
                break;
            }
        }
        if iterations == 0 {
            syndrome_ok = self.syndrome_ok(&hard);
        }
        Ok(DecoderResult {
            hard,
            total_llr: total,
            iterations,
            syndrome_ok,
        })
    }

    /// Writes H as `row col` lines, 0-indexed, one nonzero per line.
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (r, cols) in self.check_vars.iter().enumerate() {
            for c in cols {
                let _ = writeln!(out, "{r} {c}");
            }
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads a triplet file written by [`write_triplets`](Self::write_triplets).
    /// `n` is the block length (trailing all-zero columns are not visible in
    /// the file).
    pub fn read_triplets(path: &Path, n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = || Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: expected `row col`, got `{line}`", lineno + 1),
            };
            let mut it = line.split_whitespace();
            let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            let c: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            if it.next().is_some() {
                return Err(parse_err());
            }
            if rows.len() <= r {
                rows.resize(r + 1, Vec::new());
            }
            rows[r].push(c);
        }
        Self::from_checks(n, rows)
    }
}

/// Randomized progressive edge growth: each variable node takes its edges from
/// the least-loaded checks outside its 2-hop neighborhood, ties broken at
/// random. Returns `None` when a node runs out of admissible checks.
fn progressive_edge_growth(n: usize, m: usize, seed: u64) -> Option<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = VARIABLE_DEGREE * n;
    // capacity per check: as even as possible
    let capacity: Vec<usize> = (0..m).map(|c| edges / m + usize::from(c < edges % m)).collect();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut blocked = vec![false; m];
    let mut candidates = Vec::with_capacity(m);
    for &v in &order {
        for _ in 0..VARIABLE_DEGREE {
            blocked.iter_mut().for_each(|b| *b = false);
            for &c in &cols[v] {
                blocked[c] = true;
                for &u in &rows[c] {
                    for &c2 in &cols[u] {
                        blocked[c2] = true;
                    }
                }
            }
            candidates.clear();
            let mut best = usize::MAX;
            for c in 0..m {
                if blocked[c] || rows[c].len() >= capacity[c] {
                    continue;
                }
                let load = rows[c].len();
                if load < best {
                    best = load;
                    candidates.clear();
                }
                if load == best {
                    candidates.push(c);
                }
            }
            if candidates.is_empty() {
                return None;
            }
            let c = candidates[rng.random_range(0..candidates.len())];
            rows[c].push(v);
            cols[v].push(c);
        }
    }
    Some(rows)
}
