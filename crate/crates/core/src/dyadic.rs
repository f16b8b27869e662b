//! Dyadic model pieces, rays and the partial arbiters they index.
//!
//! Pieces `A_I` and `B_I` are labeled by finite words over `{0, 1}`. The
//! empty word names the root pair: `A` is the 2-handle and `B` the collar.
//! Rays are infinite words starting with 1, stored as eventually periodic
//! `stem:period` pairs in canonical form.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbiters::ArbiterValue;
use crate::report::{AxiomReport, Violation};

pub const MAX_CONSISTENCY_DEPTH: usize = 16;
/// Depth up to which the case replay scans every pair of pieces.
pub const CASE_REPLAY_DEPTH: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DyadicError {
    #[error("invalid dyadic letter {0:?}")]
    InvalidLetter(char),
    #[error("ray period must be nonempty")]
    EmptyPeriod,
    #[error("rays must start with 1, got {0}")]
    LeadingZero(String),
    #[error("cannot parse {0:?}; expected stem:period")]
    Parse(String),
    #[error("partial arbiters are defined on pieces with nonempty index")]
    EmptyIndex,
    #[error("depth {depth} exceeds the cap of {cap}")]
    DepthTooLarge { depth: usize, cap: usize },
    #[error("rays coincide: {0}")]
    SameRay(String),
    #[error("query lies above {above} (value 1) and below {below} (value 0)")]
    ConeConflict { above: String, below: String },
}

/// A finite dyadic word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Multiindex(Vec<u8>);

impl Multiindex {
    pub fn new(word: Vec<u8>) -> Result<Self, DyadicError> {
        if let Some(&b) = word.iter().find(|&&b| b > 1) {
            return Err(DyadicError::InvalidLetter(char::from(b'0' + b.min(9))));
        }
        Ok(Multiindex(word))
    }

    pub fn root() -> Self {
        Multiindex(Vec::new())
    }

    pub fn word(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Multiindex) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_proper_prefix_of(&self, other: &Multiindex) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn child(&self, letter: u8) -> Multiindex {
        let mut w = self.0.clone();
        w.push(letter & 1);
        Multiindex(w)
    }

    /// Every word of length `1..=depth`, shortest first.
    pub fn all_up_to(depth: usize) -> Vec<Multiindex> {
        let mut out = Vec::new();
        let mut level = vec![Multiindex::root()];
        for _ in 0..depth {
            level = level.iter().flat_map(|w| [w.child(0), w.child(1)]).collect();
            out.extend(level.iter().cloned());
        }
        out
    }
}

impl fmt::Display for Multiindex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        for &b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>, DyadicError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(DyadicError::InvalidLetter(other)),
        })
        .collect()
}

impl FromStr for Multiindex {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "()" {
            return Ok(Multiindex::root());
        }
        Ok(Multiindex(parse_bits(s)?))
    }
}

/// Lexicographic order in which a proper initial segment is smaller.
pub fn lex_compare(i: &Multiindex, j: &Multiindex) -> Ordering {
    for (a, b) in i.0.iter().zip(&j.0) {
        if a != b {
            return a.cmp(b);
        }
    }
    i.len().cmp(&j.len())
}

/// An eventually periodic infinite word `stem period period ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ray {
    stem: Vec<u8>,
    period: Vec<u8>,
}

impl Ray {
    pub fn new(stem: Vec<u8>, period: Vec<u8>) -> Result<Self, DyadicError> {
        if period.is_empty() {
            return Err(DyadicError::EmptyPeriod);
        }
        for &b in stem.iter().chain(&period) {
            if b > 1 {
                return Err(DyadicError::InvalidLetter(char::from(b'0' + b.min(9))));
            }
        }
        let mut ray = Ray { stem, period };
        ray.canonicalize();
        if ray.letter(0) != 1 {
            return Err(DyadicError::LeadingZero(ray.to_string()));
        }
        Ok(ray)
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| self.period[i] == self.period[i - p]))
        {
            self.period.truncate(p);
        }
        while let (Some(&s), Some(&last)) = (self.stem.last(), self.period.last()) {
            if s != last {
                break;
            }
            self.stem.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn stem(&self) -> &[u8] {
        &self.stem
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn letter(&self, n: usize) -> u8 {
        if n < self.stem.len() {
            self.stem[n]
        } else {
            self.period[(n - self.stem.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Multiindex {
        Multiindex((0..len).map(|n| self.letter(n)).collect())
    }

    /// Position of the first letter where the two rays differ.
    pub fn first_disagreement(&self, other: &Ray) -> Option<usize> {
        let bound = self.stem.len().max(other.stem.len()) + self.period.len() * other.period.len();
        (0..bound).find(|&n| self.letter(n) != other.letter(n))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_stem: usize, max_period: usize) -> Ray {
        let s = rng.random_range(0..=max_stem);
        let p = rng.random_range(1..=max_period.max(1));
        let mut stem: Vec<u8> = (0..s).map(|_| rng.random_range(0..2)).collect();
        let mut period: Vec<u8> = (0..p).map(|_| rng.random_range(0..2)).collect();
        match stem.first_mut() {
            Some(b) => *b = 1,
            None => period[0] = 1,
        }
        Ray::new(stem, period).expect("leading letter forced to 1")
    }

    /// All distinct canonical rays with `stem + period <= max_total`.
    pub fn enumerate(max_total: usize) -> Vec<Ray> {
        let mut seen = BTreeSet::new();
        for total in 1..=max_total {
            for p in 1..=total {
                let s = total - p;
                for bits in 0u32..(1 << total) {
                    let word: Vec<u8> = (0..total).map(|i| (bits >> i & 1) as u8).collect();
                    if let Ok(r) = Ray::new(word[..s].to_vec(), word[s..].to_vec()) {
                        seen.insert(r.to_string());
                    }
                }
            }
        }
        seen.iter().map(|s| s.parse().expect("round trip")).collect()
    }
}

impl PartialOrd for Ray {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ray {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.first_disagreement(other) {
            Some(n) => self.letter(n).cmp(&other.letter(n)),
            None => Ordering::Equal,
        }
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.stem {
            write!(f, "{b}")?;
        }
        write!(f, ":")?;
        for &b in &self.period {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Ray {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (stem, period) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| DyadicError::Parse(s.to_string()))?;
        Ray::new(parse_bits(stem)?, parse_bits(period)?)
    }
}

/// Compares a finite word with a ray; a prefix of the ray is smaller.
pub fn lex_compare_ray(i: &Multiindex, r: &Ray) -> Ordering {
    for (n, &b) in i.0.iter().enumerate() {
        let c = r.letter(n);
        if b != c {
            return b.cmp(&c);
        }
    }
    Ordering::Less
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PieceSide {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelPiece {
    pub side: PieceSide,
    pub index: Multiindex,
}

impl ModelPiece {
    pub fn a(index: Multiindex) -> Self {
        ModelPiece {
            side: PieceSide::A,
            index,
        }
    }

    pub fn b(index: Multiindex) -> Self {
        ModelPiece {
            side: PieceSide::B,
            index,
        }
    }

    /// The complementary piece.
    pub fn complement(&self) -> Self {
        let side = match self.side {
            PieceSide::A => PieceSide::B,
            PieceSide::B => PieceSide::A,
        };
        ModelPiece {
            side,
            index: self.index.clone(),
        }
    }

    /// Every piece with index length `1..=depth`.
    pub fn all_up_to(depth: usize) -> Vec<ModelPiece> {
        let words = Multiindex::all_up_to(depth);
        words
            .iter()
            .map(|w| ModelPiece::a(w.clone()))
            .chain(words.iter().map(|w| ModelPiece::b(w.clone())))
            .collect()
    }
}

impl fmt::Display for ModelPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            PieceSide::A => 'A',
            PieceSide::B => 'B',
        };
        if self.index.is_empty() {
            write!(f, "{side}")
        } else {
            write!(f, "{side}_{}", self.index)
        }
    }
}

impl FromStr for ModelPiece {
    type Err = DyadicError;

    /// Accepts `A`, `B`, `A_101`, `B_01`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (side, rest) = match s.chars().next() {
            Some('A') | Some('a') => (PieceSide::A, &s[1..]),
            Some('B') | Some('b') => (PieceSide::B, &s[1..]),
            _ => return Err(DyadicError::Parse(s.to_string())),
        };
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        Ok(ModelPiece {
            side,
            index: rest.parse()?,
        })
    }
}

/// `A_I` gets 1 below the ray, `B_I` gets 1 above it.
pub fn partial_arbiter(r: &Ray, p: &ModelPiece) -> Result<ArbiterValue, DyadicError> {
    if p.index.is_empty() {
        return Err(DyadicError::EmptyIndex);
    }
    let below = lex_compare_ray(&p.index, r) == Ordering::Less;
    Ok(ArbiterValue::from_bool(match p.side {
        PieceSide::A => below,
        PieceSide::B => !below,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inclusion {
    Included,
    Excluded,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionRule {
    SamePiece,
    /// `A_J ⊆ A_I` when `I` is a prefix of `J`.
    PrefixA,
    /// `B_I ⊆ B_J` when `I` is a prefix of `J`.
    PrefixB,
    /// `A_I ⊄ A_J` when `I < J`.
    Clause1,
    /// `A_I ⊄ B_J`.
    Clause2,
    /// `B_I ⊄ A_J` when both words start with 1.
    Clause3,
    /// `B_I ⊄ B_J` when `J < I`, since complements would give `A_J ⊆ A_I`.
    Clause1Complement,
    NoRule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionVerdict {
    pub value: Inclusion,
    pub reason: InclusionRule,
}

/// Every rule that fires for "`p ⊆ q`", in a fixed order.
pub fn fired_rules(p: &ModelPiece, q: &ModelPiece) -> Vec<InclusionVerdict> {
    use Inclusion::*;
    use InclusionRule::*;
    let (i, j) = (&p.index, &q.index);
    let proper = !i.is_empty() && !j.is_empty();
    let mut out = Vec::new();
    let mut fire = |value, reason| out.push(InclusionVerdict { value, reason });
    if p == q {
        fire(Included, SamePiece);
    }
    match (p.side, q.side) {
        (PieceSide::A, PieceSide::A) => {
            if j.is_proper_prefix_of(i) {
                fire(Included, PrefixA);
            }
            if proper && lex_compare(i, j) == Ordering::Less {
                fire(Excluded, Clause1);
            }
        }
        (PieceSide::B, PieceSide::B) => {
            if i.is_proper_prefix_of(j) {
                fire(Included, PrefixB);
            }
            if proper && lex_compare(j, i) == Ordering::Less {
                fire(Excluded, Clause1Complement);
            }
        }
        (PieceSide::A, PieceSide::B) => {
            if proper {
                fire(Excluded, Clause2);
            }
        }
        (PieceSide::B, PieceSide::A) => {
            if proper && i.first() == Some(1) && j.first() == Some(1) {
                fire(Excluded, Clause3);
            }
        }
    }
    out
}

/// Verdict on whether `p` embeds in `q`.
pub fn includes(p: &ModelPiece, q: &ModelPiece) -> InclusionVerdict {
    fired_rules(p, q).into_iter().next().unwrap_or(InclusionVerdict {
        value: Inclusion::Unknown,
        reason: InclusionRule::NoRule,
    })
}

/// Pieces of index length `1..=depth` that the tree places above `p`.
fn known_supersets(p: &ModelPiece, depth: usize) -> Vec<ModelPiece> {
    match p.side {
        PieceSide::A => (1..p.index.len())
            .map(|l| ModelPiece::a(Multiindex(p.index.0[..l].to_vec())))
            .collect(),
        PieceSide::B => {
            let mut out = Vec::new();
            let mut level = vec![p.index.clone()];
            for _ in p.index.len()..depth {
                level = level.iter().flat_map(|w| [w.child(0), w.child(1)]).collect();
                out.extend(level.iter().cloned().map(ModelPiece::b));
            }
            out
        }
    }
}

pub const CONSISTENCY_CHECKS: [&str; 5] = ["greedy", "case-a", "case-b", "case-c", "case-d"];

fn case_of(p: &ModelPiece, q: &ModelPiece) -> usize {
    match (p.side, q.side) {
        (PieceSide::A, PieceSide::A) => 1,
        (PieceSide::A, PieceSide::B) => 2,
        (PieceSide::B, PieceSide::A) => 3,
        (PieceSide::B, PieceSide::B) => 4,
    }
}

/// Checks the greedy axiom for `A_r` on all pieces up to `depth` and replays
/// the four cases `A_r(M1) = 1`, `A_r(M2) = 0`, expecting each pair to be
/// excluded by the oracle. The replay covers index lengths up to
/// `min(depth, CASE_REPLAY_DEPTH)`; the greedy scan covers all of `depth`.
pub fn check_greedy_consistency(r: &Ray, depth: usize) -> Result<Vec<AxiomReport>, DyadicError> {
    if depth > MAX_CONSISTENCY_DEPTH {
        return Err(DyadicError::DepthTooLarge {
            depth,
            cap: MAX_CONSISTENCY_DEPTH,
        });
    }
    let domain = format!("ray {r}, depth {depth}");
    let mut reports: Vec<AxiomReport> = CONSISTENCY_CHECKS
        .iter()
        .map(|c| AxiomReport::new(*c, domain.clone()))
        .collect();
    let witness = |p: &ModelPiece, q: &ModelPiece, lhs: i64, rhs: i64, what: &str| Violation {
        decomposition_hash: r.to_string(),
        subset: Vec::new(),
        lhs,
        rhs,
        detail: format!("{p} ⊆ {q}: {what}"),
    };
    let pieces = ModelPiece::all_up_to(depth);
    let value = |p: &ModelPiece| partial_arbiter(r, p).map(|v| i64::from(v.bit()));
    let greedy = pieces
        .par_iter()
        .map(|p| {
            let mut rep = AxiomReport::new(CONSISTENCY_CHECKS[0], domain.clone());
            let vp = value(p).expect("nonempty index");
            for q in known_supersets(p, depth) {
                debug_assert_eq!(includes(p, &q).value, Inclusion::Included);
                let vq = value(&q).expect("nonempty index");
                rep.record(vp <= vq, || {
                    witness(p, &q, vp, vq, "value drops along an inclusion")
                });
            }
            rep
        })
        .reduce(
            || AxiomReport::new(CONSISTENCY_CHECKS[0], domain.clone()),
            |mut a, b| {
                a.merge(b);
                a
            },
        );
    reports[0].merge(greedy);
    let replay = ModelPiece::all_up_to(depth.min(CASE_REPLAY_DEPTH));
    let (ones, zeros): (Vec<&ModelPiece>, Vec<&ModelPiece>) = replay.iter().partition(|p| value(p) == Ok(1));
    let cases = ones
        .par_iter()
        .map(|p| {
            let mut reps: Vec<AxiomReport> = CONSISTENCY_CHECKS[1..]
                .iter()
                .map(|c| AxiomReport::new(*c, domain.clone()))
                .collect();
            for q in &zeros {
                let verdict = includes(p, q);
                let c = case_of(p, q);
                reps[c - 1].record(verdict.value == Inclusion::Excluded, || {
                    witness(p, q, 1, 0, &format!("oracle says {:?}", verdict.value))
                });
            }
            reps
        })
        .collect::<Vec<_>>();
    for (acc, r) in reports[1..].iter_mut().zip(crate::report::merge_all(cases)) {
        acc.merge(r);
    }
    Ok(reports)
}

/// Source of values outside the cones forced by a ray.
pub trait Fallback<T: ?Sized> {
    fn value(&self, region: &T) -> ArbiterValue;
}

impl<T: ?Sized, F: Fn(&T) -> ArbiterValue> Fallback<T> for F {
    fn value(&self, region: &T) -> ArbiterValue {
        self(region)
    }
}

/// What a region knows about its distinguished curve.
pub trait CurveClass {
    /// Whether the curve is nonzero in first homology with coefficients in
    /// the prime field of `characteristic` (0 for the rationals).
    fn curve_survives(&self, characteristic: u64) -> bool;
}

/// A region whose first homology is `Z`, with the curve equal to
/// `multiple` times a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicCurve {
    pub multiple: u64,
}

impl CurveClass for CyclicCurve {
    fn curve_survives(&self, characteristic: u64) -> bool {
        match characteristic {
            0 => self.multiple != 0,
            p => !self.multiple.is_multiple_of(p),
        }
    }
}

/// The homological arbiter over one prime field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Homological {
    pub characteristic: u64,
}

impl<T: CurveClass> Fallback<T> for Homological {
    fn value(&self, region: &T) -> ArbiterValue {
        ArbiterValue::from_bool(region.curve_survives(self.characteristic))
    }
}

/// One fallback inside a cone and another outside it.
pub struct Hybrid<P, F, G> {
    pub in_cone: P,
    pub inside: F,
    pub outside: G,
}

impl<T, P: Fn(&T) -> bool, F: Fallback<T>, G: Fallback<T>> Fallback<T> for Hybrid<P, F, G> {
    fn value(&self, region: &T) -> ArbiterValue {
        if (self.in_cone)(region) {
            self.inside.value(region)
        } else {
            self.outside.value(region)
        }
    }
}

/// A region together with the model pieces it is known to contain
/// (`above`) and to sit inside (`below`).
#[derive(Clone, Debug, Default)]
pub struct ConeQuery<T> {
    pub above: Vec<ModelPiece>,
    pub below: Vec<ModelPiece>,
    pub region: T,
}

impl<T> ConeQuery<T> {
    pub fn incomparable(region: T) -> Self {
        ConeQuery {
            above: Vec::new(),
            below: Vec::new(),
            region,
        }
    }
}

/// Extends `A_r` by monotonicity from the model pieces, deferring to
/// `fallback` where no piece forces a value.
pub fn cone_extension<T, F: Fallback<T> + ?Sized>(
    r: &Ray,
    query: &ConeQuery<T>,
    fallback: &F,
) -> Result<ArbiterValue, DyadicError> {
    let mut forced_one = None;
    for p in &query.above {
        if partial_arbiter(r, p)?.is_one() {
            forced_one = Some(p);
            break;
        }
    }
    let mut forced_zero = None;
    for p in &query.below {
        if !partial_arbiter(r, p)?.is_one() {
            forced_zero = Some(p);
            break;
        }
    }
    match (forced_one, forced_zero) {
        (Some(a), Some(b)) => Err(DyadicError::ConeConflict {
            above: a.to_string(),
            below: b.to_string(),
        }),
        (Some(_), None) => Ok(ArbiterValue::ONE),
        (None, Some(_)) => Ok(ArbiterValue::ZERO),
        (None, None) => Ok(fallback.value(&query.region)),
    }
}

/// The shortest `I` strictly between the two rays; `A_I` then takes
/// different values under the two partial arbiters.
pub fn distinguish_rays(r: &Ray, r2: &Ray) -> Result<Multiindex, DyadicError> {
    let (lo, hi) = match r.cmp(r2) {
        Ordering::Equal => return Err(DyadicError::SameRay(r.to_string())),
        Ordering::Less => (r, r2),
        Ordering::Greater => (r2, r),
    };
    let k = lo.first_disagreement(hi).expect("distinct rays disagree");
    Ok(hi.prefix(k + 1))
}
