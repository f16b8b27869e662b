//! Magnus expansions, Milnor invariants of link presentations, Bing doubling
//! and the quotient certificate behind the Bing-cell obstruction.
//!
//! Generators are named by positive meridian indices, written `m3` (and
//! `M3` for the inverse). The commutator is `[a, b] = a b a⁻¹ b⁻¹`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_QUOTIENT_GENERATORS: usize = 8;
pub const MAX_CERTIFICATE_COMPONENTS: usize = 8;
/// Degree of the leading term of a commutator of two commutators.
pub const BING_CELL_DEGREE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilnorError {
    #[error("truncation degree must be at least 1")]
    ZeroTruncation,
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("sequence {0:?} repeats an index")]
    RepeatingSequence(Vec<usize>),
    #[error("sequence needs at least two indices")]
    SequenceTooShort,
    #[error("sequence of length {len} needs truncation degree {needed}, got {q}")]
    SequenceTooLong { len: usize, needed: usize, q: usize },
    #[error("no component with meridian m{0}")]
    UnknownComponent(usize),
    #[error("meridian m{0} is used by two components")]
    DuplicateComponent(usize),
    #[error("{count} generators exceed the cap of {cap}")]
    TooManyGenerators { count: usize, cap: usize },
    #[error("{count} components exceed the cap of {cap}")]
    TooManyComponents { count: usize, cap: usize },
    #[error("truncation degree {q} cannot see the degree-{needed} leading term")]
    TruncationTooSmall { q: usize, needed: usize },
    #[error("no nonzero non-repeating invariant up to length {max_len}")]
    NoCertificate { max_len: usize },
    #[error("invariant {0} does not fit in 64 bits")]
    Overflow(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    /// `1` or `-1`.
    pub exponent: i8,
}

/// A word in the free group on the meridians.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(g: usize) -> Self {
        GroupWord {
            letters: vec![Letter {
                generator: g,
                exponent: 1,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    generator: l.generator,
                    exponent: -l.exponent,
                })
                .collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord { letters }
    }

    pub fn commutator(a: &GroupWord, b: &GroupWord) -> Self {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    /// Cancels adjacent inverse pairs.
    pub fn reduce(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            match out.last() {
                Some(t) if t.generator == l.generator && t.exponent == -l.exponent => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        GroupWord { letters: out }
    }

    /// Replaces every occurrence of generator `g` by `w` (inverses by `w⁻¹`).
    pub fn substitute(&self, g: usize, w: &GroupWord) -> Self {
        let inv = w.inverse();
        let mut letters = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if l.generator != g {
                letters.push(l);
            } else if l.exponent > 0 {
                letters.extend_from_slice(&w.letters);
            } else {
                letters.extend_from_slice(&inv.letters);
            }
        }
        GroupWord { letters }
    }

    pub fn generators(&self) -> BTreeSet<usize> {
        self.letters.iter().map(|l| l.generator).collect()
    }

    /// Total exponent of generator `g`.
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == g)
            .map(|l| i64::from(l.exponent))
            .sum()
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            let c = if l.exponent > 0 { 'm' } else { 'M' };
            write!(f, "{c}{}", l.generator)?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = MilnorError;

    /// Reads letters like `m3 M12`; whitespace between letters is optional
    /// and `1` alone is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "1" || t.is_empty() {
            return Ok(GroupWord::identity());
        }
        let bad = || MilnorError::Parse(s.to_string());
        let chars: Vec<char> = t.chars().collect();
        let mut letters = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            let exponent = match c {
                'm' => 1,
                'M' => -1,
                _ => return Err(bad()),
            };
            let start = k + 1;
            k = start;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let digits: String = chars[start..k].iter().collect();
            let generator: usize = digits.parse().map_err(|_| bad())?;
            if generator == 0 {
                return Err(bad());
            }
            letters.push(Letter { generator, exponent });
        }
        Ok(GroupWord { letters })
    }
}

pub type Monomial = Vec<usize>;

/// A truncated noncommutative power series with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnusSeries {
    q: usize,
    coefficients: BTreeMap<Monomial, BigInt>,
}

impl MagnusSeries {
    pub fn one(q: usize) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(Vec::new(), BigInt::one());
        MagnusSeries { q, coefficients }
    }

    pub fn truncation(&self) -> usize {
        self.q
    }

    /// One more than the largest generator index with a nonzero term.
    pub fn generator_count(&self) -> usize {
        self.coefficients.keys().flatten().max().map_or(0, |g| g + 1)
    }

    pub fn coefficient(&self, m: &[usize]) -> BigInt {
        self.coefficients.get(m).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.coefficients.iter()
    }

    pub fn is_one(&self) -> bool {
        self.coefficients.len() == 1 && self.coefficient(&[]).is_one()
    }

    /// Product truncated at the smaller of the two degrees.
    pub fn mul(&self, other: &MagnusSeries) -> MagnusSeries {
        let q = self.q.min(other.q);
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (u, a) in &self.coefficients {
            for (v, b) in &other.coefficients {
                if u.len() + v.len() > q {
                    continue;
                }
                let mut m = u.clone();
                m.extend_from_slice(v);
                *acc.entry(m).or_default() += a * b;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        MagnusSeries { q, coefficients: acc }
    }

    /// Right multiplication by the image of one letter.
    fn mul_letter(&mut self, l: Letter) {
        let g = l.generator;
        let mut updates: Vec<(Monomial, BigInt)> = Vec::new();
        for (u, c) in &self.coefficients {
            let room = self.q.saturating_sub(u.len());
            let mut m = u.clone();
            for k in 1..=room {
                m.push(g);
                let sign = l.exponent > 0 || k % 2 == 0;
                updates.push((m.clone(), if sign { c.clone() } else { -c.clone() }));
                if l.exponent > 0 {
                    break;
                }
            }
        }
        for (m, c) in updates {
            *self.coefficients.entry(m).or_default() += c;
        }
        self.coefficients.retain(|_, v| !v.is_zero());
    }
}

impl fmt::Display for MagnusSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in &self.coefficients {
            let (sign, abs) = if c < &BigInt::zero() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{abs}")?;
                continue;
            }
            if !abs.is_one() {
                write!(f, "{abs}")?;
            }
            for g in m {
                write!(f, "X{g}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The Magnus expansion `x ↦ 1 + X`, truncated above degree `q`.
pub fn magnus_expand(w: &GroupWord, q: usize) -> Result<MagnusSeries, MilnorError> {
    if q == 0 {
        return Err(MilnorError::ZeroTruncation);
    }
    let mut s = MagnusSeries::one(q);
    for &l in &w.letters {
        s.mul_letter(l);
    }
    Ok(s)
}

/// Largest generator index and degree handled by the packed expansion.
const PACKED_MAX_GENERATOR: usize = 31;
const PACKED_MAX_DEGREE: usize = 12;

#[derive(Clone, Copy)]
struct PackedTerm {
    used: u32,
    degree: u8,
    coefficient: i128,
}

/// Monomials packed five bits per letter; indices start at 1, so packing
/// is injective.
fn pack(m: &[usize]) -> Option<u64> {
    if m.len() > PACKED_MAX_DEGREE || m.iter().any(|&g| g == 0 || g > PACKED_MAX_GENERATOR) {
        return None;
    }
    Some(m.iter().fold(0u64, |code, &g| code << 5 | g as u64))
}

/// Nonzero coefficients of the non-repeating monomials of degree at most
/// `q` in the expansion of `w`, or `None` when packing or i128 runs out.
///
/// Dropping repeating monomials is a ring map, so the stored coefficients
/// are exact.
fn expand_nonrepeating(w: &GroupWord, q: usize) -> Option<HashMap<u64, PackedTerm>> {
    if q > PACKED_MAX_DEGREE || w.letters.iter().any(|l| l.generator > PACKED_MAX_GENERATOR) {
        return None;
    }
    let mut terms: HashMap<u64, PackedTerm> = HashMap::new();
    terms.insert(
        0,
        PackedTerm {
            used: 0,
            degree: 0,
            coefficient: 1,
        },
    );
    let mut updates: Vec<(u64, u32, u8, i128)> = Vec::new();
    for l in &w.letters {
        let bit = 1u32 << l.generator;
        updates.clear();
        for (&code, t) in &terms {
            if t.used & bit == 0 && (t.degree as usize) < q {
                let c = if l.exponent > 0 {
                    t.coefficient
                } else {
                    t.coefficient.checked_neg()?
                };
                updates.push((code << 5 | l.generator as u64, t.used | bit, t.degree + 1, c));
            }
        }
        for &(code, used, degree, c) in &updates {
            let slot = terms.entry(code).or_insert(PackedTerm {
                used,
                degree,
                coefficient: 0,
            });
            slot.coefficient = slot.coefficient.checked_add(c)?;
            if slot.coefficient == 0 {
                terms.remove(&code);
            }
        }
    }
    Some(terms)
}

/// Coefficient of one non-repeating monomial in the expansion of `w`.
fn nonrepeating_coefficient(w: &GroupWord, m: &[usize]) -> BigInt {
    fn run<T: Clone + Zero + One + std::ops::Sub<Output = T>>(
        w: &GroupWord,
        m: &[usize],
        add: impl Fn(&T, &T) -> Option<T>,
        sub: impl Fn(&T, &T) -> Option<T>,
    ) -> Option<T> {
        let mut c = vec![T::zero(); m.len() + 1];
        c[0] = T::one();
        for l in &w.letters {
            for k in (1..=m.len()).rev() {
                if m[k - 1] == l.generator {
                    c[k] = if l.exponent > 0 {
                        add(&c[k], &c[k - 1])?
                    } else {
                        sub(&c[k], &c[k - 1])?
                    };
                }
            }
        }
        c.pop()
    }
    if let Some(v) = run::<i128>(w, m, |a, b| a.checked_add(*b), |a, b| a.checked_sub(*b)) {
        return BigInt::from(v);
    }
    run::<BigInt>(w, m, |a, b| Some(a + b), |a, b| Some(a - b)).expect("big integers do not overflow")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkComponent {
    pub meridian: usize,
    pub longitude: GroupWord,
}

/// A link given by the longitude words of its components.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkPresentation {
    pub components: Vec<LinkComponent>,
}

impl LinkPresentation {
    pub fn new(components: Vec<LinkComponent>) -> Result<Self, MilnorError> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.meridian == 0 {
                return Err(MilnorError::Parse("meridian indices start at 1".into()));
            }
            if !seen.insert(c.meridian) {
                return Err(MilnorError::DuplicateComponent(c.meridian));
            }
        }
        Ok(LinkPresentation { components })
    }

    pub fn hopf() -> Self {
        LinkPresentation {
            components: vec![
                LinkComponent {
                    meridian: 1,
                    longitude: GroupWord::generator(2),
                },
                LinkComponent {
                    meridian: 2,
                    longitude: GroupWord::generator(1),
                },
            ],
        }
    }

    pub fn unlink(n: usize) -> Self {
        LinkPresentation {
            components: (1..=n)
                .map(|m| LinkComponent {
                    meridian: m,
                    longitude: GroupWord::identity(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, meridian: usize) -> Result<&LinkComponent, MilnorError> {
        self.components
            .iter()
            .find(|c| c.meridian == meridian)
            .ok_or(MilnorError::UnknownComponent(meridian))
    }

    pub fn meridians(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.meridian).collect()
    }

    /// Whether no longitude mentions its own meridian.
    pub fn is_non_repeating(&self) -> bool {
        self.components
            .iter()
            .all(|c| !c.longitude.generators().contains(&c.meridian))
    }
}

impl fmt::Display for LinkPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            writeln!(f, "{}: {}", c.meridian, c.longitude)?;
        }
        Ok(())
    }
}

impl FromStr for LinkPresentation {
    type Err = MilnorError;

    /// One `i: word` line per component; `#` starts a comment.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut components = Vec::new();
        for raw in s.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, word) = line
                .split_once(':')
                .ok_or_else(|| MilnorError::Parse(raw.to_string()))?;
            let meridian: usize = head
                .trim()
                .parse()
                .map_err(|_| MilnorError::Parse(raw.to_string()))?;
            components.push(LinkComponent {
                meridian,
                longitude: word.parse()?,
            });
        }
        LinkPresentation::new(components)
    }
}

fn check_sequence(l: &LinkPresentation, seq: &[usize], q: usize) -> Result<(), MilnorError> {
    if seq.len() < 2 {
        return Err(MilnorError::SequenceTooShort);
    }
    if seq.iter().collect::<BTreeSet<_>>().len() != seq.len() {
        return Err(MilnorError::RepeatingSequence(seq.to_vec()));
    }
    if seq.len() > q + 1 {
        return Err(MilnorError::SequenceTooLong {
            len: seq.len(),
            needed: seq.len() - 1,
            q,
        });
    }
    for &i in seq {
        l.component(i)?;
    }
    Ok(())
}

/// The Milnor invariant `μ̄(i_1 … i_{k-1}, i_k)`: the coefficient of
/// `X_{i_1} ⋯ X_{i_{k-1}}` in the expansion of the longitude of `i_k`.
pub fn mu_bar(l: &LinkPresentation, seq: &[usize], q: usize) -> Result<BigInt, MilnorError> {
    check_sequence(l, seq, q)?;
    let (last, head) = seq.split_last().expect("checked length");
    Ok(nonrepeating_coefficient(&l.component(*last)?.longitude, head))
}

/// Replaces component `comp` by its Bing double.
///
/// The first new component keeps the meridian index, the second takes the
/// next free index. Other longitudes see `m ↦ [m_b, m_a]`, and the new
/// longitudes are `l_a = [w, m_b]`, `l_b = [m_a, w]` for the old
/// longitude `w`. With this choice the double of a Hopf component has
/// `μ̄(1,2,3) = +1`, and all three cyclic rotations agree.
pub fn bing_double(l: &LinkPresentation, comp: usize) -> Result<LinkPresentation, MilnorError> {
    let old = l.component(comp)?.clone();
    let a = comp;
    let b = l.meridians().into_iter().max().unwrap_or(0) + 1;
    let (ma, mb) = (GroupWord::generator(a), GroupWord::generator(b));
    let clasp = GroupWord::commutator(&mb, &ma);
    let mut components = Vec::with_capacity(l.len() + 1);
    for c in &l.components {
        if c.meridian == comp {
            components.push(LinkComponent {
                meridian: a,
                longitude: GroupWord::commutator(&old.longitude, &mb).reduce(),
            });
        } else {
            components.push(LinkComponent {
                meridian: c.meridian,
                longitude: c.longitude.substitute(comp, &clasp).reduce(),
            });
        }
    }
    components.push(LinkComponent {
        meridian: b,
        longitude: GroupWord::commutator(&ma, &old.longitude).reduce(),
    });
    LinkPresentation::new(components)
}

/// A sequence of doublings of the Hopf link, written as a bracketed tree:
/// `(H (d 1) (d 1a))` doubles component `1` into `1a`, `1b`, then doubles
/// `1a`. Nested operations `(d 1 (d 1a))` apply after their parent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingPattern {
    pub doublings: Vec<String>,
}

/// A built link together with the name of each component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedLink {
    pub link: LinkPresentation,
    /// `names[k]` names `link.components[k]`.
    pub names: Vec<String>,
}

impl NamedLink {
    pub fn name_of(&self, meridian: usize) -> Option<&str> {
        self.link
            .components
            .iter()
            .position(|c| c.meridian == meridian)
            .map(|k| self.names[k].as_str())
    }
}

impl DoublingPattern {
    pub fn hopf() -> Self {
        DoublingPattern {
            doublings: Vec::new(),
        }
    }

    pub fn component_count(&self) -> usize {
        2 + self.doublings.len()
    }

    pub fn build(&self) -> Result<NamedLink, MilnorError> {
        let mut link = LinkPresentation::hopf();
        let mut names = vec!["1".to_string(), "2".to_string()];
        for d in &self.doublings {
            let k = names
                .iter()
                .position(|n| n == d)
                .ok_or_else(|| MilnorError::Parse(format!("no component named {d}")))?;
            let meridian = link.components[k].meridian;
            link = bing_double(&link, meridian)?;
            names[k] = format!("{d}a");
            names.push(format!("{d}b"));
        }
        Ok(NamedLink { link, names })
    }

    /// Every pattern with at most `max_components` components, one per
    /// pair of binary trees hung on the two Hopf components.
    pub fn enumerate(max_components: usize) -> Vec<DoublingPattern> {
        fn trees(name: &str, leaves: usize) -> Vec<Vec<String>> {
            if leaves == 1 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for left in 1..leaves {
                for a in trees(&format!("{name}a"), left) {
                    for b in trees(&format!("{name}b"), leaves - left) {
                        let mut ops = vec![name.to_string()];
                        ops.extend(a.iter().cloned());
                        ops.extend(b.iter().cloned());
                        out.push(ops);
                    }
                }
            }
            out
        }
        let mut out = Vec::new();
        for total in 2..=max_components {
            for left in 1..total {
                for a in trees("1", left) {
                    for b in trees("2", total - left) {
                        let mut doublings = a.clone();
                        doublings.extend(b.iter().cloned());
                        out.push(DoublingPattern { doublings });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for DoublingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(H")?;
        for d in &self.doublings {
            write!(f, " (d {d})")?;
        }
        write!(f, ")")
    }
}

impl FromStr for DoublingPattern {
    type Err = MilnorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MilnorError::Parse(s.to_string());
        let spaced = s.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        if tokens == ["H"] {
            return Ok(DoublingPattern::hopf());
        }
        if tokens.len() < 3 || tokens[0] != "(" || tokens[1] != "H" {
            return Err(bad());
        }
        let mut doublings = Vec::new();
        let mut pos = 2;
        // Each `(d NAME ...)` records NAME, then its nested operations.
        fn ops(tokens: &[&str], pos: &mut usize, out: &mut Vec<String>) -> Option<()> {
            while tokens.get(*pos) == Some(&"(") {
                if tokens.get(*pos + 1) != Some(&"d") {
                    return None;
                }
                let name = tokens.get(*pos + 2)?;
                if *name == "(" || *name == ")" {
                    return None;
                }
                out.push(name.to_string());
                *pos += 3;
                ops(tokens, pos, out)?;
                if tokens.get(*pos) != Some(&")") {
                    return None;
                }
                *pos += 1;
            }
            Some(())
        }
        ops(&tokens, &mut pos, &mut doublings).ok_or_else(bad)?;
        if pos + 1 != tokens.len() || tokens[pos] != ")" {
            return Err(bad());
        }
        Ok(DoublingPattern { doublings })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub sequence: Vec<usize>,
    pub value: i64,
    pub q: usize,
}

/// Searches non-repeating sequences by length, then lexicographically, for
/// the first nonzero invariant of length at most `q + 1`.
pub fn essentiality_certificate(pattern: &DoublingPattern, q: usize) -> Result<Certificate, MilnorError> {
    let n = pattern.component_count();
    if n > MAX_CERTIFICATE_COMPONENTS {
        return Err(MilnorError::TooManyComponents {
            count: n,
            cap: MAX_CERTIFICATE_COMPONENTS,
        });
    }
    if q == 0 {
        return Err(MilnorError::ZeroTruncation);
    }
    let link = pattern.build()?.link;
    first_nonzero_invariant(&link, q)
}

/// The first nonzero non-repeating invariant of `link` up to length `q + 1`.
pub fn first_nonzero_invariant(link: &LinkPresentation, q: usize) -> Result<Certificate, MilnorError> {
    let meridians = link.meridians();
    let max_len = (q + 1).min(meridians.len());
    let expansions: Vec<(usize, Option<HashMap<u64, PackedTerm>>)> = link
        .components
        .par_iter()
        .map(|c| {
            (
                c.meridian,
                expand_nonrepeating(&c.longitude, max_len.saturating_sub(1)),
            )
        })
        .collect();
    let lookup = |seq: &[usize]| -> BigInt {
        let (last, head) = seq.split_last().expect("nonempty");
        let (_, slot) = expansions
            .iter()
            .find(|(m, _)| m == last)
            .expect("component exists");
        match (slot, pack(head)) {
            (Some(terms), Some(code)) => terms
                .get(&code)
                .map_or_else(BigInt::zero, |t| BigInt::from(t.coefficient)),
            _ => nonrepeating_coefficient(&link.component(*last).expect("exists").longitude, head),
        }
    };
    let mut sorted = meridians.clone();
    sorted.sort_unstable();
    for len in 2..=max_len {
        for seq in itertools::Itertools::permutations(sorted.iter().copied(), len) {
            let v = lookup(&seq);
            if !v.is_zero() {
                let value = v.to_i64().ok_or_else(|| MilnorError::Overflow(v.to_string()))?;
                return Ok(Certificate {
                    sequence: seq,
                    value,
                    q,
                });
            }
        }
    }
    Err(MilnorError::NoCertificate { max_len })
}

/// Relations of a generalized Milnor quotient: meridian pairs whose
/// conjugates commute, and identifications `lhs = rhs`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSystem {
    pub commuting: BTreeSet<(usize, usize)>,
    pub identifications: Vec<(GroupWord, GroupWord)>,
}

impl RelationSystem {
    pub fn add_commuting(&mut self, i: usize, j: usize) {
        if i != j {
            self.commuting.insert((i.min(j), i.max(j)));
        }
    }

    /// Two disjoint copies of a height-one Bing cell, meridians `1..=4` and
    /// `5..=8`. Within a copy every pair commutes except `{1,2}` and
    /// `{3,4}`; distinguished curves are identified with both clasps.
    pub fn bing_cell_pair() -> Self {
        let mut rel = RelationSystem::default();
        for base in [0, 4] {
            for i in 1..=4 {
                for j in i + 1..=4 {
                    if (i, j) != (1, 2) && (i, j) != (3, 4) {
                        rel.add_commuting(base + i, base + j);
                    }
                }
            }
            let clasp = |x: usize, y: usize| {
                GroupWord::commutator(&GroupWord::generator(base + x), &GroupWord::generator(base + y))
            };
            rel.identifications.push((clasp(1, 2), clasp(3, 4)));
        }
        rel
    }

    /// `[m', m'']` with `m' = [m1, m2]` and `m'' = [m5, m6]`.
    pub fn bing_cell_target() -> GroupWord {
        let g = GroupWord::generator;
        GroupWord::commutator(
            &GroupWord::commutator(&g(1), &g(2)),
            &GroupWord::commutator(&g(5), &g(6)),
        )
    }

    /// Whether the given pairs are all kept out of the commuting set.
    pub fn respects_forbidden(&self, forbidden: &[(usize, usize)]) -> bool {
        forbidden
            .iter()
            .all(|&(i, j)| !self.commuting.contains(&(i.min(j), i.max(j))))
    }

    pub fn generators(&self) -> BTreeSet<usize> {
        let mut g: BTreeSet<usize> = self.commuting.iter().flat_map(|&(i, j)| [i, j]).collect();
        for (a, b) in &self.identifications {
            g.extend(a.generators());
            g.extend(b.generators());
        }
        g
    }
}

type SparseVec = BTreeMap<usize, BigRational>;

/// Span of sparse rational vectors, each row keyed by its smallest index.
#[derive(Clone, Debug, Default)]
struct SparseEchelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl SparseEchelon {
    fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut cursor = 0;
        while let Some((&k, c)) = v.range(cursor..).next() {
            if let Some(row) = self.rows.get(&k) {
                let c = c.clone();
                for (&j, r) in row {
                    let e = v.entry(j).or_insert_with(BigRational::zero);
                    *e -= &c * r;
                    if e.is_zero() {
                        v.remove(&j);
                    }
                }
            }
            cursor = k + 1;
        }
        v
    }

    /// Adds `v` to the span; returns the reduced row if it was new.
    fn insert(&mut self, v: SparseVec) -> Option<SparseVec> {
        let v = self.reduce(v);
        let (&pivot, lead) = v.iter().next()?;
        let inv = lead.recip();
        let row: SparseVec = v.iter().map(|(&j, c)| (j, c * &inv)).collect();
        self.rows.insert(pivot, row.clone());
        Some(row)
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// The truncated algebra modulo the monomials killed by a relation system,
/// with the two-sided ideal of the identifications saturated inside it.
pub struct QuotientAlgebra {
    q: usize,
    gens: Vec<usize>,
    live: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    ideal: SparseEchelon,
}

impl QuotientAlgebra {
    pub fn new(rel: &RelationSystem, extra: &BTreeSet<usize>, q: usize) -> Result<Self, MilnorError> {
        let mut gens: BTreeSet<usize> = rel.generators();
        gens.extend(extra);
        if gens.len() > MAX_QUOTIENT_GENERATORS {
            return Err(MilnorError::TooManyGenerators {
                count: gens.len(),
                cap: MAX_QUOTIENT_GENERATORS,
            });
        }
        let gens: Vec<usize> = gens.into_iter().collect();
        let alive = |m: &[usize]| {
            !rel.commuting
                .iter()
                .any(|&(i, j)| m.contains(&i) && m.contains(&j))
        };
        let mut live: Vec<Monomial> = Vec::new();
        let mut level: Vec<Monomial> = vec![Vec::new()];
        for _ in 0..q {
            let mut nextl = Vec::new();
            for m in &level {
                for &g in &gens {
                    if !m.contains(&g) {
                        let mut e = m.clone();
                        e.push(g);
                        if alive(&e) {
                            nextl.push(e);
                        }
                    }
                }
            }
            live.extend(nextl.iter().cloned());
            level = nextl;
        }
        let index = live.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut alg = QuotientAlgebra {
            q,
            gens,
            live,
            index,
            ideal: SparseEchelon::default(),
        };
        let mut queue: Vec<SparseVec> = Vec::new();
        for (a, b) in &rel.identifications {
            let d = alg.project(&magnus_expand(a, q)?);
            let e = alg.project(&magnus_expand(b, q)?);
            let mut diff = d;
            for (k, c) in e {
                let slot = diff.entry(k).or_insert_with(BigRational::zero);
                *slot -= c;
                if slot.is_zero() {
                    diff.remove(&k);
                }
            }
            queue.push(diff);
        }
        while let Some(v) = queue.pop() {
            if let Some(row) = alg.ideal.insert(v) {
                for &g in &alg.gens {
                    queue.push(alg.multiply(&row, g, true));
                    queue.push(alg.multiply(&row, g, false));
                }
            }
        }
        Ok(alg)
    }

    /// Image of `s - 1` among the live monomials.
    fn project(&self, s: &MagnusSeries) -> SparseVec {
        s.terms()
            .filter(|(m, _)| !m.is_empty())
            .filter_map(|(m, c)| {
                self.index
                    .get(m)
                    .map(|&k| (k, BigRational::from_integer(c.clone())))
            })
            .collect()
    }

    fn multiply(&self, v: &SparseVec, g: usize, left: bool) -> SparseVec {
        let mut out = SparseVec::new();
        for (&k, c) in v {
            let m = &self.live[k];
            if m.len() >= self.q {
                continue;
            }
            let mut e = Vec::with_capacity(m.len() + 1);
            if left {
                e.push(g);
                e.extend_from_slice(m);
            } else {
                e.extend_from_slice(m);
                e.push(g);
            }
            if let Some(&t) = self.index.get(&e) {
                *out.entry(t).or_insert_with(BigRational::zero) += c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn live_dimension(&self) -> usize {
        self.live.len()
    }

    pub fn ideal_dimension(&self) -> usize {
        self.ideal.dim()
    }

    /// A live monomial surviving in `w - 1` modulo the ideal, if any.
    pub fn survivor(&self, w: &GroupWord) -> Result<Option<Monomial>, MilnorError> {
        let v = self.ideal.reduce(self.project(&magnus_expand(w, self.q)?));
        Ok(v.keys().next().map(|&k| self.live[k].clone()))
    }

    /// Checks that every ideal row stays inside the ideal after left and
    /// right multiplication by each generator.
    pub fn ideal_is_two_sided(&self) -> bool {
        self.ideal.rows.values().all(|row| {
            self.gens.iter().all(|&g| {
                [true, false]
                    .iter()
                    .all(|&left| self.ideal.reduce(self.multiply(row, g, left)).is_empty())
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientVerdict {
    pub nonzero: bool,
    pub witness: Option<Monomial>,
    pub q: usize,
    pub live_dimension: usize,
    pub ideal_dimension: usize,
}

/// Decides whether `target` survives in the truncated quotient: repeated
/// indices and commuting pairs kill monomials, identifications generate a
/// two-sided ideal. A surviving monomial certifies that `target` is
/// nontrivial in the group quotient.
pub fn quotient_nonvanishing(
    rel: &RelationSystem,
    target: &GroupWord,
    q: usize,
) -> Result<QuotientVerdict, MilnorError> {
    if q < BING_CELL_DEGREE {
        return Err(MilnorError::TruncationTooSmall {
            q,
            needed: BING_CELL_DEGREE,
        });
    }
    let alg = QuotientAlgebra::new(rel, &target.generators(), q)?;
    let witness = alg.survivor(target)?;
    Ok(QuotientVerdict {
        nonzero: witness.is_some(),
        witness,
        q,
        live_dimension: alg.live_dimension(),
        ideal_dimension: alg.ideal_dimension(),
    })
}

#[cfg(test)]
mod tests;
