//! Finite sample spaces, events as subsets of sample indices, and exact
//! counting measures.
//!
//! The quotient by sets of negligible measure has no finite counterpart; the
//! `*_mod_eps` comparisons take an explicit tolerance instead.

use std::collections::HashSet;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::Natural;

/// Exact non-negative rational.
pub type Rational = Ratio<u64>;

/// Largest `n_bits` accepted for an exhaustive space.
pub const MAX_EXHAUSTIVE_BITS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceMode {
    Exhaustive,
    Sampled { seed: u64 },
    Explicit,
}

/// Content-derived identity of a space; events carry it so that operations
/// across spaces can be rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceId(u64);

#[derive(Debug)]
pub struct SampleSpace {
    id: SpaceId,
    n_bits: u32,
    points: Vec<Natural>,
    mode: SpaceMode,
}

impl SampleSpace {
    /// All `2^n_bits` strings, in increasing numeric order.
    pub fn exhaustive(n_bits: u32) -> Result<Arc<SampleSpace>> {
        if n_bits == 0 || n_bits > MAX_EXHAUSTIVE_BITS {
            return Err(Error::InvalidArgument(format!(
                "exhaustive spaces need 1 <= n_bits <= {MAX_EXHAUSTIVE_BITS}, got {n_bits}"
            )));
        }
        let points = (0u64..1 << n_bits).map(Natural::from).collect();
        Ok(Self::build(n_bits, points, SpaceMode::Exhaustive))
    }

    /// `count` distinct strings drawn from `{0,1}^n_bits`.
    ///
    /// The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Each draw
    /// takes `ceil(n_bits / 64)` successive `next_u64` words, least significant
    /// word first, masks the top word to `n_bits`, and is discarded if it
    /// repeats an earlier point. Points keep their draw order.
    pub fn sampled(n_bits: u32, count: usize, seed: u64) -> Result<Arc<SampleSpace>> {
        if n_bits == 0 || count == 0 {
            return Err(Error::InvalidArgument(
                "sampled spaces need n_bits >= 1 and at least one sample".into(),
            ));
        }
        if n_bits < 64 && (count as u128) > (1u128 << n_bits) {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {count} distinct points from 2^{n_bits}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = n_bits.div_ceil(64) as usize;
        let top_bits = n_bits - 64 * (words as u32 - 1);
        let mut seen = HashSet::with_capacity(count);
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
            if top_bits < 64 {
                digits[words - 1] &= (1u64 << top_bits) - 1;
            }
            let p = Natural::from_slice(
                &digits
                    .iter()
                    .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                    .collect::<Vec<_>>(),
            );
            if seen.insert(p.clone()) {
                points.push(p);
            }
        }
        Ok(Self::build(n_bits, points, SpaceMode::Sampled { seed }))
    }

    pub fn explicit(n_bits: u32, points: Vec<Natural>) -> Result<Arc<SampleSpace>> {
        if n_bits == 0 || points.is_empty() {
            return Err(Error::InvalidArgument(
                "explicit spaces need n_bits >= 1 and at least one point".into(),
            ));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if p.bits() > n_bits as u64 {
                return Err(Error::InvalidArgument(format!(
                    "point {p:x} does not fit in {n_bits} bits"
                )));
            }
            if !seen.insert(p) {
                return Err(Error::InvalidArgument(format!("duplicate point {p:x}")));
            }
        }
        Ok(Self::build(n_bits, points, SpaceMode::Explicit))
    }

    fn build(n_bits: u32, points: Vec<Natural>, mode: SpaceMode) -> Arc<SampleSpace> {
        let mut h = DefaultHasher::new();
        n_bits.hash(&mut h);
        points.hash(&mut h);
        Arc::new(SampleSpace {
            id: SpaceId(h.finish()),
            n_bits,
            points,
            mode,
        })
    }

    pub fn id(&self) -> SpaceId {
        self.id
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mode(&self) -> &SpaceMode {
        &self.mode
    }

    pub fn points(&self) -> &[Natural] {
        &self.points
    }

    /// The sample string at `index`, read as a natural number.
    pub fn point(&self, index: usize) -> Result<&Natural> {
        self.points.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.points.len(),
        })
    }

    pub fn full(&self) -> Event {
        let mut bits = FixedBitSet::with_capacity(self.len());
        bits.insert_range(..);
        Event {
            space: self.id,
            bits,
        }
    }

    pub fn empty(&self) -> Event {
        Event {
            space: self.id,
            bits: FixedBitSet::with_capacity(self.len()),
        }
    }

    pub fn event_from_indices<I: IntoIterator<Item = usize>>(&self, indices: I) -> Result<Event> {
        let mut e = self.empty();
        for i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            e.bits.insert(i);
        }
        Ok(e)
    }

    pub fn event_from_fn(&self, mut pred: impl FnMut(usize) -> bool) -> Event {
        let mut e = self.empty();
        for i in 0..self.len() {
            if pred(i) {
                e.bits.insert(i);
            }
        }
        e
    }

    pub fn event_from_bools(&self, flags: &[bool]) -> Result<Event> {
        if flags.len() != self.len() {
            return Err(Error::TableLength {
                expected: self.len(),
                found: flags.len(),
            });
        }
        Ok(self.event_from_fn(|i| flags[i]))
    }
}

/// A set of sample indices of one space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    space: SpaceId,
    bits: FixedBitSet,
}

impl Event {
    pub fn space_id(&self) -> SpaceId {
        self.space
    }

    /// Number of points in the underlying space.
    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    fn check(&self, other: &Event) -> Result<()> {
        if self.space != other.space || self.bits.len() != other.bits.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn meet(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Ok(Event {
            space: self.space,
            bits,
        })
    }

    pub fn join(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Ok(Event {
            space: self.space,
            bits,
        })
    }

    pub fn complement(&self) -> Event {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Event {
            space: self.space,
            bits,
        }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Ok(Event {
            space: self.space,
            bits,
        })
    }

    pub fn symmetric_difference(&self, other: &Event) -> Result<Event> {
        self.check(other)?;
        let mut bits = self.bits.clone();
        bits.symmetric_difference_with(&other.bits);
        Ok(Event {
            space: self.space,
            bits,
        })
    }

    /// `self -> other`, i.e. `complement(self) ∪ other`.
    pub fn implies(&self, other: &Event) -> Result<Event> {
        self.complement().join(other)
    }

    pub fn is_subset(&self, other: &Event) -> Result<bool> {
        self.check(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    pub(crate) fn meet_in_place(&mut self, other: &Event) {
        debug_assert_eq!(self.space, other.space);
        self.bits.intersect_with(&other.bits);
    }

    pub(crate) fn join_in_place(&mut self, other: &Event) {
        debug_assert_eq!(self.space, other.space);
        self.bits.union_with(&other.bits);
    }

    pub fn measure(&self) -> MeasureValue {
        MeasureValue::from_counts(self.cardinality(), self.universe_len())
    }

    /// Measure of the symmetric difference.
    pub fn distance(&self, other: &Event) -> Result<MeasureValue> {
        Ok(self.symmetric_difference(other)?.measure())
    }

    /// `μ(self \ other) <= eps`.
    pub fn le_mod_eps(&self, other: &Event, eps: Rational) -> Result<bool> {
        Ok(self.difference(other)?.measure().value() <= eps)
    }

    /// `μ(self Δ other) <= eps`.
    pub fn eq_mod_eps(&self, other: &Event, eps: Rational) -> Result<bool> {
        Ok(self.distance(other)?.value() <= eps)
    }

    /// Hex bit-vector, most significant digit first, where bit `i` of the
    /// encoded integer is sample index `i`. Always `ceil(N/4)` digits.
    pub fn to_hex(&self) -> String {
        let n = self.universe_len();
        let digits = n.div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|b| {
                        let i = d * 4 + b;
                        i < n && self.bits.contains(i)
                    })
                    .fold(0u32, |acc, b| acc | (1 << b));
                char::from_digit(nibble, 16).expect("nibble")
            })
            .collect()
    }
}

/// Exact measure `|U| / N` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasureValue(Rational);

impl MeasureValue {
    pub fn from_counts(count: usize, total: usize) -> MeasureValue {
        assert!(total > 0 && count <= total, "measure out of range");
        MeasureValue(Rational::new(count as u64, total as u64))
    }

    pub fn zero() -> MeasureValue {
        MeasureValue(Rational::zero())
    }

    pub fn one() -> MeasureValue {
        MeasureValue(Rational::one())
    }

    pub fn value(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(self, other: MeasureValue) -> MeasureValue {
        if other.0 >= self.0 {
            MeasureValue::zero()
        } else {
            MeasureValue(self.0 - other.0)
        }
    }

    /// Six-place decimal rendering.
    pub fn approx(self) -> String {
        format!("{:.6}", self.to_f64())
    }
}

impl fmt::Display for MeasureValue {
    /// Always `num/den`, e.g. `1/1`, `0/1`, `3/4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Parses `a/b`, a decimal such as `0.05`, or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a non-negative rational: `{text}`"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let w: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = 10u64.pow(frac.len() as u32);
        let f: u64 = frac.parse().map_err(|_| bad())?;
        let num = w
            .checked_mul(scale)
            .and_then(|v| v.checked_add(f))
            .ok_or_else(bad)?;
        return Ok(Rational::new(num, scale));
    }
    Ok(Rational::from_integer(t.parse().map_err(|_| bad())?))
}

/// Checks `0 <= eps <= 1`.
pub fn check_eps(eps: Rational) -> Result<Rational> {
    if eps > Rational::one() {
        return Err(Error::InvalidArgument(format!("eps {eps} exceeds 1")));
    }
    Ok(eps)
}
