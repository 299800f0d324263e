//! Bridges between permutation space and Cantor space through the derived
//! language of a permutation: x is a member iff the image of 0^{2|x|}x
//! begins with 1. Classical strategies transfer to permutation strategies
//! by betting on first bits of coded images, and conversely.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::betting::{BettingGame, OrderedBetState, SharedGame};
use crate::error::{PermLabError, Result};
use crate::martingale::{PermMartingale, SharedMartingale};
use crate::permspace::{FinitePermutation, PrefixPartialPermutation};
use crate::rational::ExactRational;
use crate::strings::{domain_string_at, index_of, BinaryString};

/// Finite prefix of a characteristic sequence, indexed by the standard
/// string enumeration (bit 0 answers λ's membership).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LanguagePrefix {
    bits: Vec<bool>,
}

impl LanguagePrefix {
    pub fn empty() -> Self {
        LanguagePrefix { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        LanguagePrefix { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extended(&self, bit: bool) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit);
        LanguagePrefix { bits }
    }
}

impl fmt::Display for LanguagePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for LanguagePrefix {
    type Err = PermLabError;

    /// A string of 0/1 characters in standard-enumeration order.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.trim().chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(PermLabError::Parse(format!("bad language prefix {s:?}"))),
            }
        }
        Ok(LanguagePrefix { bits })
    }
}

/// A classical martingale on characteristic-sequence prefixes:
/// d(w) = (d(w0) + d(w1))/2, nonnegative.
pub trait ClassicalMartingale: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, w: &LanguagePrefix) -> Result<ExactRational>;
}

pub type SharedClassical = Arc<dyn ClassicalMartingale>;

/// True iff 2·d(w) = d(w0) + d(w1) exactly.
pub fn check_classical_averaging(d: &dyn ClassicalMartingale, w: &LanguagePrefix) -> Result<bool> {
    let here = d.value(w)?;
    let zero = d.value(&w.extended(false))?;
    let one = d.value(&w.extended(true))?;
    Ok(here * ExactRational::from_int(2) == zero + one)
}

/// d ≡ c on every prefix.
pub struct ClassicalConstant(pub ExactRational);

impl ClassicalMartingale for ClassicalConstant {
    fn name(&self) -> String {
        format!("classical-constant({})", self.0)
    }

    fn value(&self, _w: &LanguagePrefix) -> Result<ExactRational> {
        Ok(self.0.clone())
    }
}

/// The coding map x ↦ 0^{2|x|}x; the empty string is never coded.
pub fn encode_string(x: &BinaryString) -> BinaryString {
    BinaryString::zeros(2 * x.len()).concat(x)
}

/// Inverse of [`encode_string`]: Some(x) iff s = 0^{2n}x with |x| = n ≥ 1.
pub fn decode_coded(s: &BinaryString) -> Option<BinaryString> {
    if s.is_empty() || !s.len().is_multiple_of(3) {
        return None;
    }
    let n = s.len() / 3;
    if s.bits()[..2 * n].iter().any(|&b| b) {
        return None;
    }
    Some(BinaryString::from_bits(s.bits()[2 * n..].to_vec()))
}

/// The membership bit of x in the derived language of π: 1 iff
/// π(0^{2|x|}x) begins with 1.
pub fn derived_language_bit(π: &FinitePermutation, x: &BinaryString) -> Result<bool> {
    if x.is_empty() {
        return Err(PermLabError::InvalidArgument(
            "the empty string is never coded".into(),
        ));
    }
    if 3 * x.len() > π.max_length() as usize {
        return Err(PermLabError::LengthOutOfRange(format!(
            "deriving the bit of {x} needs table length {}, have {}",
            3 * x.len(),
            π.max_length()
        )));
    }
    Ok(π.image(&encode_string(x))?.first_bit() == Some(true))
}

/// Characteristic prefix of the derived language over every string whose
/// coded image the table covers: bits for s_0 (always 0) through the last
/// string of the longest fully coded length.
pub fn derived_language_prefix(π: &FinitePermutation) -> Result<LanguagePrefix> {
    let max_coded = π.max_length() as usize / 3;
    let mut bits = vec![false];
    let mut i = 1usize;
    loop {
        let x = domain_string_at(i);
        if x.len() > max_coded {
            break;
        }
        bits.push(derived_language_bit(π, &x)?);
        i += 1;
    }
    Ok(LanguagePrefix::from_bits(bits))
}

/// True iff every assigned coded image in g agrees with L on first bits.
pub fn consistent_with_language(g: &PrefixPartialPermutation, lang: &LanguagePrefix) -> bool {
    for (pos, image) in g.values().iter().enumerate() {
        let domain = domain_string_at(pos);
        let Some(x) = decode_coded(&domain) else {
            continue;
        };
        let idx = index_of(&x);
        if idx < lang.len() && (image.first_bit() == Some(true)) != lang.bit(idx) {
            return false;
        }
    }
    true
}

/// The induced classical prefix of a permutation prefix: the λ bit (always
/// 0) followed by the first bits of the coded images seen so far, in
/// standard order. Also the number of free images and free images with
/// each first bit at every coded bet, used for the transfer corrections.
fn coded_factors(
    g: &PrefixPartialPermutation,
    classical: &dyn ClassicalMartingale,
    require_positive: bool,
) -> Result<(LanguagePrefix, ExactRational)> {
    let mut lang = LanguagePrefix::from_bits(vec![false]);
    let mut correction = ExactRational::one();
    for pos in 0..g.len() {
        let domain = domain_string_at(pos);
        if decode_coded(&domain).is_none() {
            continue;
        }
        if require_positive && classical.value(&lang)?.is_zero() {
            return Err(PermLabError::Unsupported(format!(
                "classical martingale {} vanished on the reached prefix {lang}",
                classical.name()
            )));
        }
        let before = g.truncated(pos);
        let free = before.free_values();
        let image = g.value_at(pos);
        let b = image.first_bit() == Some(true);
        let f_total = free.len() as i64;
        let f_b = free
            .iter()
            .filter(|s| (s.first_bit() == Some(true)) == b)
            .count() as i64;
        // F/(2·F_b); both counts are positive at coded positions because
        // at most 2^n of the 2^{3n} images are consumed before the coded
        // bets finish.
        correction *= ExactRational::ratio(f_total, 2 * f_b);
        lang.push(b);
    }
    Ok((lang, correction))
}

struct TransferMartingale {
    classical: SharedClassical,
}

impl PermMartingale for TransferMartingale {
    fn name(&self) -> String {
        format!("transfer({})", self.classical.name())
    }

    fn value(&self, g: &PrefixPartialPermutation) -> Result<ExactRational> {
        let (lang, correction) = coded_factors(g, self.classical.as_ref(), true)?;
        Ok(self.classical.value(&lang)? * correction)
    }
}

/// Lifts a classical martingale to a permutation martingale that bets only
/// on coded strings 0^{2n}x: the stake on each free image with first bit b
/// replicates d's membership stake on b, scaled over the F_b images
/// carrying that bit. Each coded bet multiplies the capital by d's step
/// factor times F/(2F_b) ≥ 1 − 2^{−2n}; the induced classical prefix pins
/// λ's bit to 0, which the coding map never carries.
///
/// The source martingale must stay positive on every reached classical
/// prefix; a vanishing value is a contract violation, not a zero bet.
pub fn transfer_martingale(classical: SharedClassical) -> SharedMartingale {
    Arc::new(TransferMartingale { classical })
}

/// Per-bet multiplier of the transfer at the coded position `pos` of g:
/// value(g ↾ pos+1)/value(g ↾ pos). Test instrumentation for the
/// quantitative transfer bound.
pub fn transfer_step_multiplier(
    classical: SharedClassical,
    g: &PrefixPartialPermutation,
    pos: usize,
) -> Result<ExactRational> {
    let d = transfer_martingale(classical);
    let before = d.value(&g.truncated(pos))?;
    if before.is_zero() {
        return Err(PermLabError::Unsupported(
            "multiplier undefined at a zero value".into(),
        ));
    }
    Ok(&d.value(&g.truncated(pos + 1))? / &before)
}

/// A classical betting game: adaptively picks the next string whose
/// membership bit it bets on, never repeating.
pub trait ClassicalBettingGame: Send + Sync {
    fn name(&self) -> String;
    fn next_query(&self, state: &ClassicalBetState) -> Result<Option<BinaryString>>;
    fn value(&self, state: &ClassicalBetState) -> Result<ExactRational>;
}

/// Ordered (string, membership bit) pairs a classical game has seen.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassicalBetState {
    pairs: Vec<(BinaryString, bool)>,
}

impl ClassicalBetState {
    pub fn empty() -> Self {
        ClassicalBetState { pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(BinaryString, bool)] {
        &self.pairs
    }

    pub fn queried(&self, q: &BinaryString) -> bool {
        self.pairs.iter().any(|(a, _)| a == q)
    }

    pub fn extended(&self, q: &BinaryString, bit: bool) -> Result<Self> {
        if self.queried(q) {
            return Err(PermLabError::InvalidExtension(format!(
                "{q} was already queried"
            )));
        }
        let mut pairs = self.pairs.clone();
        pairs.push((q.clone(), bit));
        Ok(ClassicalBetState { pairs })
    }
}

/// The classical game that bets on s_0, s_1, … in standard order with a
/// classical martingale's stakes.
pub struct ClassicalMartingaleGame {
    inner: SharedClassical,
}

impl ClassicalMartingaleGame {
    pub fn new(inner: SharedClassical) -> Self {
        ClassicalMartingaleGame { inner }
    }

    fn as_prefix(state: &ClassicalBetState) -> Result<LanguagePrefix> {
        let mut bits = Vec::with_capacity(state.len());
        for (i, (q, b)) in state.pairs().iter().enumerate() {
            if q != &domain_string_at(i) {
                return Err(PermLabError::Unsupported(format!(
                    "state queries {q} at position {i}, not the standard order"
                )));
            }
            bits.push(*b);
        }
        Ok(LanguagePrefix::from_bits(bits))
    }
}

impl ClassicalBettingGame for ClassicalMartingaleGame {
    fn name(&self) -> String {
        format!("classical-game({})", self.inner.name())
    }

    fn next_query(&self, state: &ClassicalBetState) -> Result<Option<BinaryString>> {
        Self::as_prefix(state)?;
        Ok(Some(domain_string_at(state.len())))
    }

    fn value(&self, state: &ClassicalBetState) -> Result<ExactRational> {
        self.inner.value(&Self::as_prefix(state)?)
    }
}

struct TransferBettingGame {
    classical: Arc<dyn ClassicalBettingGame>,
}

impl TransferBettingGame {
    /// Replays the classical game against the coded pairs of the
    /// permutation state, in order. λ queries are fed bit 0 without any
    /// permutation action. Returns the classical state reached and the
    /// accumulated F/(2F_b) correction.
    fn replay(&self, state: &OrderedBetState) -> Result<(ClassicalBetState, ExactRational)> {
        let mut cs = ClassicalBetState::empty();
        let mut correction = ExactRational::one();
        let coded: Vec<(usize, &BinaryString, &BinaryString)> = state
            .pairs()
            .iter()
            .enumerate()
            .filter(|(_, (q, _))| decode_coded(q).is_some())
            .map(|(i, (q, y))| (i, q, y))
            .collect();
        let mut consumed = 0usize;
        while consumed < coded.len() {
            let Some(x) = self.classical.next_query(&cs)? else {
                return Err(PermLabError::Unsupported(
                    "state has coded pairs the classical game never queried".into(),
                ));
            };
            if x.is_empty() {
                cs = cs.extended(&x, false)?;
                continue;
            }
            let (pos, q, y) = coded[consumed];
            if &encode_string(&x) != q {
                return Err(PermLabError::Unsupported(format!(
                    "state answers {q} where the classical game queried {x}"
                )));
            }
            let block_len = q.len();
            let mut f_total: i64 = 1 << block_len;
            let mut f_bit: i64 = 1 << (block_len - 1);
            let b = y.first_bit() == Some(true);
            for (_, img) in &state.pairs()[..pos] {
                if img.len() == block_len {
                    f_total -= 1;
                    if (img.first_bit() == Some(true)) == b {
                        f_bit -= 1;
                    }
                }
            }
            correction *= ExactRational::ratio(f_total, 2 * f_bit);
            cs = cs.extended(&x, b)?;
            consumed += 1;
        }
        Ok((cs, correction))
    }

    /// First string in standard order the permutation game has not
    /// queried, optionally restricted to lengths below a bound. With no
    /// bound this terminates by pigeonhole: only finitely many strings are
    /// queried.
    fn first_unqueried(state: &OrderedBetState, below: Option<usize>) -> Option<BinaryString> {
        for i in 0.. {
            let x = domain_string_at(i);
            if let Some(bound) = below {
                if x.len() >= bound {
                    return None;
                }
            }
            if !state.queried(&x) {
                return Some(x);
            }
        }
        unreachable!()
    }
}

impl BettingGame for TransferBettingGame {
    fn name(&self) -> String {
        format!("transfer-game({})", self.classical.name())
    }

    fn next_query(&self, state: &OrderedBetState) -> Result<Option<BinaryString>> {
        let (cs, _) = self.replay(state)?;
        let mut cs = cs;
        loop {
            match self.classical.next_query(&cs)? {
                None => {
                    // Classical play is over: sweep everything left, in
                    // standard order, with uniform stakes.
                    return Ok(Self::first_unqueried(state, None));
                }
                Some(x) if x.is_empty() => {
                    cs = cs.extended(&x, false)?;
                }
                Some(x) => {
                    let q = encode_string(&x);
                    // Cover all shorter blocks before betting at |q|, so
                    // the bet lands at stage |q|.
                    if let Some(gap) = Self::first_unqueried(state, Some(q.len())) {
                        return Ok(Some(gap));
                    }
                    return Ok(Some(q));
                }
            }
        }
    }

    fn value(&self, state: &OrderedBetState) -> Result<ExactRational> {
        let (cs, correction) = self.replay(state)?;
        Ok(self.classical.value(&cs)? * correction)
    }
}

/// Lifts a classical betting game: whenever it queries a nonempty x, the
/// permutation game queries the image of 0^{2|x|}x and replicates the
/// membership stakes on first bits. Strings the classical game never bets
/// on are swept with uniform stakes, shorter blocks first, which keeps an
/// h(n) = 3n honesty bound intact.
pub fn transfer_betting_game(classical: Arc<dyn ClassicalBettingGame>) -> SharedGame {
    Arc::new(TransferBettingGame { classical })
}

/// The classical martingale induced by a permutation martingale along an
/// adversarially filled permutation: the stake on bit b at string x is the
/// averaged mass of d over free images with first bit b, and every
/// non-coded image is chosen to minimize d's capital (lexicographic
/// tie-break), as is the coded image among the bit-b images.
pub struct ReverseTransferMartingale {
    inner: SharedMartingale,
}

impl ReverseTransferMartingale {
    pub fn new(inner: SharedMartingale) -> Self {
        ReverseTransferMartingale { inner }
    }

    fn argmin<'a>(
        &self,
        w: &PrefixPartialPermutation,
        candidates: impl Iterator<Item = &'a BinaryString>,
    ) -> Result<Option<(ExactRational, BinaryString)>> {
        let mut best: Option<(ExactRational, BinaryString)> = None;
        for s in candidates {
            let v = self.inner.value(&w.extend(s)?)?;
            if best.as_ref().is_none_or(|(b, _)| &v < b) {
                best = Some((v, s.clone()));
            }
        }
        Ok(best)
    }

    /// The permutation prefix reached after playing the bits of `u`:
    /// exposed for the consistency tests.
    pub fn filled_prefix(&self, u: &LanguagePrefix) -> Result<PrefixPartialPermutation> {
        Ok(self.walk(u)?.1)
    }

    fn walk(&self, u: &LanguagePrefix) -> Result<(ExactRational, PrefixPartialPermutation)> {
        let mut w = PrefixPartialPermutation::empty();
        let mut value = self.inner.value(&w)?;
        for i in 1..u.len() {
            let x = domain_string_at(i);
            let code_idx = index_of(&encode_string(&x));
            while w.len() < code_idx {
                let (_, filler) = self
                    .argmin(&w, w.free_values().iter())?
                    .expect("free set is never empty");
                w = w.extend(&filler)?;
            }
            let dw = self.inner.value(&w)?;
            if dw.is_zero() {
                return Err(PermLabError::Unsupported(format!(
                    "permutation martingale {} vanished on the filled prefix",
                    self.inner.name()
                )));
            }
            let b = u.bit(i);
            let free = w.free_values();
            let mut mass_b = ExactRational::zero();
            let mut free_b = Vec::new();
            for s in &free {
                if (s.first_bit() == Some(true)) == b {
                    mass_b += self.inner.value(&w.extend(s)?)?;
                    free_b.push(s.clone());
                }
            }
            // D_L^x(b) = Σ_{s∈free_b} d(ws) / (|free(w)|·d(w))
            let stake = mass_b
                / (ExactRational::from_int(free.len() as i64) * dw);
            value = value * ExactRational::from_int(2) * stake;
            let (_, coded_choice) = self
                .argmin(&w, free_b.iter())?
                .ok_or_else(|| {
                    PermLabError::Unsupported(format!(
                        "no free image with first bit {b} at the coded bet on {x}"
                    ))
                })?;
            w = w.extend(&coded_choice)?;
        }
        Ok((value, w))
    }
}

impl ClassicalMartingale for ReverseTransferMartingale {
    fn name(&self) -> String {
        format!("reverse-transfer({})", self.inner.name())
    }

    fn value(&self, u: &LanguagePrefix) -> Result<ExactRational> {
        Ok(self.walk(u)?.0)
    }
}

pub fn reverse_transfer(d: SharedMartingale) -> SharedClassical {
    Arc::new(ReverseTransferMartingale::new(d))
}
