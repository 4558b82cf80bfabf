//! Constellations, OFDM symbol mapping and OFDM-IM subblock construction.
//!
//! Everything here works on post-FFT frequency-domain samples: a frame is one
//! complex value per subcarrier. Bits are `u8` values in `{0, 1}`.
//!
//! OFDM-IM layout: the `N` subcarriers are split into `g = N / k` subblocks of
//! `k` subcarriers. Subblock `β` is interleaved across the band and occupies
//! subcarriers `β, β + g, β + 2g, …`. Each subblock carries `Q1` index bits,
//! selecting which `m` of its `k` positions are active, followed by `Q2 =
//! m·log2(M)` bits modulating the active positions in ascending order.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

/// A labeled complex constellation with unit average energy.
///
/// Point `i` carries the label whose bits are the binary expansion of `i`,
/// most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationAlphabet {
    name: &'static str,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl ConstellationAlphabet {
    /// BPSK with bit 0 → +1 and bit 1 → −1.
    pub fn bpsk() -> Self {
        Self {
            name: "bpsk",
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            bits_per_symbol: 1,
        }
    }

    /// BPSK with bit 0 → −1 and bit 1 → +1.
    ///
    /// Under this labeling a positive LLR (favoring bit 0) reconstructs to a
    /// negative amplitude, i.e. `û = −√p·tanh(L)`.
    pub fn bpsk_one_positive() -> Self {
        Self {
            name: "bpsk-one-positive",
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            bits_per_symbol: 1,
        }
    }

    /// Gray QPSK: `(b0, b1) → ((1 − 2·b0) + j(1 − 2·b1)) / √2`.
    pub fn qpsk() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let points = (0..4usize)
            .map(|label| {
                let b0 = (label >> 1) & 1;
                let b1 = label & 1;
                Complex64::new(s * (1.0 - 2.0 * b0 as f64), s * (1.0 - 2.0 * b1 as f64))
            })
            .collect();
        Self {
            name: "qpsk",
            points,
            bits_per_symbol: 2,
        }
    }

    /// Gray 16-QAM. Bits `(b0, b2)` drive the real axis and `(b1, b3)` the
    /// imaginary axis; the first bit of each pair is the sign, the second
    /// selects the outer ring.
    pub fn qam16() -> Self {
        let scale = 1.0 / 10f64.sqrt();
        let level = |sign: usize, outer: usize| (1.0 - 2.0 * sign as f64) * (1.0 + 2.0 * outer as f64);
        let points = (0..16usize)
            .map(|label| {
                let b = |i: usize| (label >> (3 - i)) & 1;
                Complex64::new(scale * level(b(0), b(2)), scale * level(b(1), b(3)))
            })
            .collect();
        Self {
            name: "qam16",
            points,
            bits_per_symbol: 4,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "bpsk" => Ok(Self::bpsk()),
            "bpsk-one-positive" => Ok(Self::bpsk_one_positive()),
            "qpsk" => Ok(Self::qpsk()),
            "qam16" | "16qam" => Ok(Self::qam16()),
            other => Err(Error::Config(format!("unknown modulation `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Number of points `M`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit `i` (MSB first) of the label of point `index`.
    #[inline]
    pub fn label_bit(&self, index: usize, i: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - i)) & 1) as u8
    }

    /// `S′ = {0} ∪ S`, with the zero symbol first.
    pub fn augmented(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(0.0, 0.0))
            .chain(self.points.iter().copied())
            .collect()
    }

    pub fn index_of_bits(&self, bits: &[u8]) -> usize {
        bits_to_word(bits)
    }

    /// Index of the point closest to `x`.
    pub fn nearest(&self, x: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (x - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn max_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// Maps bit groups onto constellation points.
pub fn map_qam_bits(bits: &[u8], alphabet: &ConstellationAlphabet) -> Result<Vec<Complex64>> {
    let b = alphabet.bits_per_symbol();
    if !bits.len().is_multiple_of(b) {
        return Err(Error::InputSize {
            what: "bit sequence (multiple of bits per symbol)",
            expected: bits.len().div_ceil(b) * b,
            got: bits.len(),
        });
    }
    Ok(bits
        .chunks_exact(b)
        .map(|group| alphabet.points()[alphabet.index_of_bits(group)])
        .collect())
}

/// Inverse of [`map_qam_bits`] by nearest-point decision.
pub fn demap_qam_hard(symbols: &[Complex64], alphabet: &ConstellationAlphabet) -> Vec<u8> {
    let b = alphabet.bits_per_symbol();
    let mut out = Vec::with_capacity(symbols.len() * b);
    for &s in symbols {
        let idx = alphabet.nearest(s);
        out.extend((0..b).map(|i| alphabet.label_bit(idx, i)));
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `m`-subsets of `0..k` in lexicographic order.
fn lexicographic_subsets(k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still advance
        let Some(pos) = (0..m).rev().find(|&i| current[i] < k - m + i) else {
            break;
        };
        current[pos] += 1;
        for j in pos + 1..m {
            current[j] = current[j - 1] + 1;
        }
    }
    out
}

/// Subblock geometry and index-pattern table of an OFDM-IM waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmImConfig {
    subcarriers: usize,
    subblock_size: usize,
    active: usize,
    bits_per_symbol: usize,
    index_bits: usize,
    /// Active positions (ascending) for each of the `c` patterns.
    patterns: Vec<Vec<usize>>,
    masks: Vec<u32>,
}

impl OfdmImConfig {
    /// Builds the configuration for `n` subcarriers, subblocks of `k` with `m`
    /// active, modulated with `alphabet`.
    pub fn new(n: usize, k: usize, m: usize, alphabet: &ConstellationAlphabet) -> Result<Self> {
        if k == 0 || k > 32 {
            return Err(Error::Config(format!("subblock size {k} must be in 1..=32")));
        }
        if m == 0 || m >= k {
            return Err(Error::Config(format!("need 1 <= m < k, got m={m}, k={k}")));
        }
        if n == 0 || !n.is_multiple_of(k) {
            return Err(Error::Config(format!("{n} subcarriers not divisible by subblock size {k}")));
        }
        let combos = binomial(k, m);
        let index_bits = (u128::BITS - 1 - combos.leading_zeros()) as usize;
        let count = 1usize << index_bits;
        let patterns: Vec<Vec<usize>> = lexicographic_subsets(k, m).into_iter().take(count).collect();
        let masks = patterns
            .iter()
            .map(|p| p.iter().fold(0u32, |acc, &i| acc | (1 << i)))
            .collect();
        Ok(Self {
            subcarriers: n,
            subblock_size: k,
            active: m,
            bits_per_symbol: alphabet.bits_per_symbol(),
            index_bits,
            patterns,
            masks,
        })
    }

    /// `N`
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }
    /// `k`
    pub fn subblock_size(&self) -> usize {
        self.subblock_size
    }
    /// `m`
    pub fn active(&self) -> usize {
        self.active
    }
    /// `g = N / k`, also the interleaving stride.
    pub fn subblocks(&self) -> usize {
        self.subcarriers / self.subblock_size
    }
    /// `c`
    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }
    /// `Q1`
    pub fn index_bits(&self) -> usize {
        self.index_bits
    }
    /// `Q2`
    pub fn modulation_bits(&self) -> usize {
        self.active * self.bits_per_symbol
    }
    /// `Q = Q1 + Q2`
    pub fn bits_per_subblock(&self) -> usize {
        self.index_bits + self.modulation_bits()
    }
    pub fn bits_per_frame(&self) -> usize {
        self.subblocks() * self.bits_per_subblock()
    }
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }
    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }
    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    /// Subcarrier index of position `i` of subblock `beta`.
    #[inline]
    pub fn subcarrier(&self, beta: usize, i: usize) -> usize {
        beta + i * self.subblocks()
    }

    /// Pattern number for an activation mask, if it is in the table.
    pub fn pattern_index(&self, mask: u32) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }

    /// Amplitude `√(k·P1 / (m·N))` that makes the expected frame power `P1`.
    pub fn amplitude(&self, total_power: f64) -> f64 {
        (self.subblock_size as f64 * total_power / (self.active as f64 * self.subcarriers as f64)).sqrt()
    }
}

/// Activation mask selected by a `Q1`-bit index word.
pub fn encode_index_pattern(word: usize, cfg: &OfdmImConfig) -> Result<u32> {
    cfg.masks.get(word).copied().ok_or(Error::Range {
        what: "index word",
        value: word,
        limit: cfg.pattern_count(),
    })
}

/// Inverse of [`encode_index_pattern`].
pub fn decode_index_pattern(mask: u32, cfg: &OfdmImConfig) -> Result<usize> {
    cfg.pattern_index(mask)
        .ok_or_else(|| Error::Decode(format!("activation mask {mask:#b} is not in the pattern table")))
}

/// One user's frame: a complex sample per subcarrier, already amplitude scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub samples: Vec<Complex64>,
    /// Amplitude applied to the unit-energy constellation (`√p` or `√(kP1/(mN))`).
    pub amplitude: f64,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `Σ |x_n|²`
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); n],
            amplitude: 0.0,
        }
    }
}

/// Scales a full-band symbol sequence by `√p`.
pub fn build_ofdm_frame(symbols: &[Complex64], n: usize, power_per_subcarrier: f64) -> Result<SymbolFrame> {
    check_len("OFDM symbols", n, symbols.len())?;
    if !(power_per_subcarrier >= 0.0) {
        return Err(Error::Config(format!("negative power {power_per_subcarrier}")));
    }
    let amplitude = power_per_subcarrier.sqrt();
    Ok(SymbolFrame {
        samples: symbols.iter().map(|&s| s * amplitude).collect(),
        amplitude,
    })
}

/// Builds an OFDM-IM frame from `g·Q` coded bits.
pub fn build_ofdmim_frame(
    bits: &[u8],
    cfg: &OfdmImConfig,
    alphabet: &ConstellationAlphabet,
    total_power: f64,
) -> Result<SymbolFrame> {
    check_len("OFDM-IM codeword bits", cfg.bits_per_frame(), bits.len())?;
    check_len("alphabet bits per symbol", cfg.bits_per_symbol(), alphabet.bits_per_symbol())?;
    let amplitude = cfg.amplitude(total_power);
    let bps = alphabet.bits_per_symbol();
    let mut samples = vec![Complex64::new(0.0, 0.0); cfg.subcarriers()];
    for (beta, block) in bits.chunks_exact(cfg.bits_per_subblock()).enumerate() {
        let (index, data) = block.split_at(cfg.index_bits());
        let word = bits_to_word(index);
        let pattern = &cfg.patterns()[word];
        for (slot, &pos) in pattern.iter().enumerate() {
            let sym = alphabet.points()[alphabet.index_of_bits(&data[slot * bps..(slot + 1) * bps])];
            samples[cfg.subcarrier(beta, pos)] = sym * amplitude;
        }
    }
    Ok(SymbolFrame { samples, amplitude })
}

/// Reads bits MSB first as an unsigned word.
pub fn bits_to_word(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Recovers the coded bits from per-subcarrier unit-scale symbol decisions
/// (zero on inactive subcarriers).
pub fn demap_ofdmim_frame_hard(
    decisions: &[Complex64],
    cfg: &OfdmImConfig,
    alphabet: &ConstellationAlphabet,
) -> Result<Vec<u8>> {
    check_len("OFDM-IM decisions", cfg.subcarriers(), decisions.len())?;
    let min_energy = alphabet
        .points()
        .iter()
        .map(|p| p.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    let bps = alphabet.bits_per_symbol();
    let mut bits = Vec::with_capacity(cfg.bits_per_frame());
    for beta in 0..cfg.subblocks() {
        let mut mask = 0u32;
        for i in 0..cfg.subblock_size() {
            if decisions[cfg.subcarrier(beta, i)].norm_sqr() > 0.25 * min_energy {
                mask |= 1 << i;
            }
        }
        let word = decode_index_pattern(mask, cfg)?;
        bits.extend((0..cfg.index_bits()).rev().map(|s| ((word >> s) & 1) as u8));
        for &pos in &cfg.patterns()[word] {
            let idx = alphabet.nearest(decisions[cfg.subcarrier(beta, pos)]);
            bits.extend((0..bps).map(|i| alphabet.label_bit(idx, i)));
        }
    }
    Ok(bits)
}

/// How one user's coded bits become a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Ofdm {
        alphabet: ConstellationAlphabet,
        subcarriers: usize,
        /// Power per subcarrier `p`.
        power: f64,
    },
    OfdmIm {
        config: OfdmImConfig,
        alphabet: ConstellationAlphabet,
        /// Total power `P` over the frame.
        total_power: f64,
    },
}

impl Waveform {
    pub fn alphabet(&self) -> &ConstellationAlphabet {
        match self {
            Waveform::Ofdm { alphabet, .. } | Waveform::OfdmIm { alphabet, .. } => alphabet,
        }
    }

    pub fn subcarriers(&self) -> usize {
        match self {
            Waveform::Ofdm { subcarriers, .. } => *subcarriers,
            Waveform::OfdmIm { config, .. } => config.subcarriers(),
        }
    }

    pub fn bits_per_frame(&self) -> usize {
        match self {
            Waveform::Ofdm {
                alphabet, subcarriers, ..
            } => subcarriers * alphabet.bits_per_symbol(),
            Waveform::OfdmIm { config, .. } => config.bits_per_frame(),
        }
    }

    /// Amplitude applied to active unit-energy symbols.
    pub fn amplitude(&self) -> f64 {
        match self {
            Waveform::Ofdm { power, .. } => power.sqrt(),
            Waveform::OfdmIm {
                config, total_power, ..
            } => config.amplitude(*total_power),
        }
    }

    pub fn is_index_modulated(&self) -> bool {
        matches!(self, Waveform::OfdmIm { .. })
    }

    pub fn build(&self, bits: &[u8]) -> Result<SymbolFrame> {
        match self {
            Waveform::Ofdm {
                alphabet,
                subcarriers,
                power,
            } => {
                check_len("OFDM codeword bits", self.bits_per_frame(), bits.len())?;
                build_ofdm_frame(&map_qam_bits(bits, alphabet)?, *subcarriers, *power)
            }
            Waveform::OfdmIm {
                config,
                alphabet,
                total_power,
            } => build_ofdmim_frame(bits, config, alphabet, *total_power),
        }
    }
}
