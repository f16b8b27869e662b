//! Arbiters and multiarbiters on finite complexes, and their axiom checks.
//!
//! Colors and axes are 0-based throughout: color `a` of a cube decomposition
//! is tied to coordinate axis `a`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{
    generic_cube, induced_map_is_onto, site_symmetry, CellComplex, CellPermutation, ComplexError,
    GenericCube, OntoOracle, SiteSymmetry, Subcomplex,
};
use crate::gf2::BitVector;
use crate::report::{decomposition_hash, merge_all, AxiomReport, Violation};
use crate::seeding;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArbiterError {
    #[error("color subset must be nonempty and proper, got {0:?}")]
    ImproperSubset(Vec<usize>),
    #[error("color {color} out of range for {k} colors")]
    ColorOutOfRange { color: usize, k: usize },
    #[error("decomposition colors {actual} cells but the complex has {expected} top cells")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("complex has no outer face tags for axis {0}")]
    MissingFaces(usize),
    #[error("multiarbiter is undefined on the empty piece")]
    EmptyPiece,
    #[error("complex of dimension {0} is not supported here")]
    UnsupportedDimension(usize),
    #[error("family spans {size} raw subsets, above the cap of {cap}")]
    FamilyTooLarge { size: u128, cap: u128 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArbiterValue(u8);

impl ArbiterValue {
    pub const ZERO: ArbiterValue = ArbiterValue(0);
    pub const ONE: ArbiterValue = ArbiterValue(1);

    pub fn from_bool(b: bool) -> Self {
        ArbiterValue(u8::from(b))
    }

    pub fn bit(self) -> u8 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for ArbiterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiArbiterValue(pub usize);

/// The homological arbiter on a surface: 1 iff the piece carries the
/// nontrivial first homology class.
pub fn arbiter_h_rp2(x: &CellComplex, m: &Subcomplex) -> ArbiterValue {
    ArbiterValue::from_bool(induced_map_is_onto(x, m, &Subcomplex::empty(x), 1))
}

/// Whether the top cells in `mask` form a codimension-zero submanifold of a
/// closed surface: around every vertex the chosen triangles are contiguous.
pub fn is_regular_surface_piece(x: &CellComplex, mask: &BitVector) -> bool {
    assert_eq!(x.dim(), 2);
    for v in 0..x.count(0) {
        let mut star: Vec<usize> = x
            .cofaces(0, v)
            .iter()
            .flat_map(|&e| x.cofaces(1, e).iter().copied())
            .collect();
        star.sort_unstable();
        star.dedup();
        let inside: Vec<usize> = star.iter().copied().filter(|&t| mask.get(t)).collect();
        if inside.is_empty() || inside.len() == star.len() {
            continue;
        }
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(x.top_count());
        for &e in x.cofaces(0, v) {
            let around: Vec<usize> = x.cofaces(1, e).iter().copied().filter(|&t| mask.get(t)).collect();
            for w in around.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let r = uf.find(inside[0]);
        if inside.iter().any(|&t| uf.find(t) != r) {
            return false;
        }
    }
    true
}

/// Top cells colored by `{0, …, k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KDecomposition {
    k: usize,
    colors: Vec<u8>,
}

impl KDecomposition {
    pub fn new(k: usize, colors: Vec<u8>) -> Result<Self, ArbiterError> {
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= k) {
            return Err(ArbiterError::ColorOutOfRange { color: c as usize, k });
        }
        Ok(Self { k, colors })
    }

    pub fn random<R: Rng + ?Sized>(cells: usize, k: usize, rng: &mut R) -> Self {
        Self {
            k,
            colors: (0..cells).map(|_| rng.random_range(0..k) as u8).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn color(&self, cell: usize) -> usize {
        self.colors[cell] as usize
    }

    pub fn set_color(&mut self, cell: usize, color: usize) {
        assert!(color < self.k);
        self.colors[cell] = color as u8;
    }

    /// Top cells whose color lies in the subset `mask` (bit `a` = color `a`).
    pub fn class_mask(&self, mask: u32) -> BitVector {
        BitVector::from_indices(
            self.colors.len(),
            self.colors
                .iter()
                .enumerate()
                .filter(|(_, &c)| mask >> c & 1 == 1)
                .map(|(i, _)| i),
        )
    }

    pub fn hash(&self) -> String {
        decomposition_hash(&self.colors)
    }

    /// The decomposition carried by a cube symmetry: tile `g(i)` receives
    /// color `π(c_i)`, where `π` is the axis permutation of `g`.
    pub fn transformed(&self, g: &SiteSymmetry) -> KDecomposition {
        let mut colors = vec![0u8; self.colors.len()];
        for (i, &c) in self.colors.iter().enumerate() {
            colors[g.site_map[i]] = g.axis_perm[c as usize] as u8;
        }
        KDecomposition { k: self.k, colors }
    }
}

pub fn subset_to_mask(s: &[usize], k: usize) -> Result<u32, ArbiterError> {
    let mut mask = 0u32;
    for &c in s {
        if c >= k {
            return Err(ArbiterError::ColorOutOfRange { color: c, k });
        }
        mask |= 1 << c;
    }
    if mask == 0 || mask == (1 << k) - 1 {
        return Err(ArbiterError::ImproperSubset(s.to_vec()));
    }
    Ok(mask)
}

pub fn mask_to_subset(mask: u32) -> Vec<usize> {
    (0..32).filter(|&c| mask >> c & 1 == 1).collect()
}

fn permute_mask(mask: u32, perm: &[usize]) -> u32 {
    mask_to_subset(mask).into_iter().fold(0, |m, c| m | 1 << perm[c])
}

fn check_decomposition(x: &CellComplex, dec: &KDecomposition) -> Result<(), ArbiterError> {
    if dec.colors.len() != x.top_count() {
        return Err(ArbiterError::SizeMismatch {
            expected: x.top_count(),
            actual: dec.colors.len(),
        });
    }
    for axis in 0..dec.k.min(x.dim()) {
        if x.axis_faces(&[axis]).is_empty() {
            return Err(ArbiterError::MissingFaces(axis));
        }
    }
    Ok(())
}

/// The cube `k`-arbiter: 1 iff `H_c(|S|, |S| ∩ F_S) → H_c(I^d, F_S)` is onto,
/// with `c = |S|` and `F_S` the outer faces along the axes in `S`.
pub fn k_arbiter_cube(
    x: &CellComplex,
    dec: &KDecomposition,
    s: &[usize],
) -> Result<ArbiterValue, ArbiterError> {
    check_decomposition(x, dec)?;
    let mask = subset_to_mask(s, dec.k)?;
    let piece = x.closure_of_mask(&dec.class_mask(mask));
    let faces = x.axis_faces(&mask_to_subset(mask));
    Ok(ArbiterValue::from_bool(induced_map_is_onto(
        x,
        &piece,
        &faces,
        s.len(),
    )))
}

/// The cube arbiter with one cached cohomological oracle per color subset.
#[derive(Clone, Debug)]
pub struct CubeArbiter {
    d: usize,
    oracles: Vec<Option<OntoOracle>>,
}

impl CubeArbiter {
    pub fn new(x: &CellComplex) -> Result<Self, ArbiterError> {
        let d = x.dim();
        if d == 0 || d > 8 {
            return Err(ArbiterError::UnsupportedDimension(d));
        }
        for axis in 0..d {
            if x.axis_faces(&[axis]).is_empty() {
                return Err(ArbiterError::MissingFaces(axis));
            }
        }
        let full = (1u32 << d) - 1;
        let oracles = (0..=full)
            .map(|mask| {
                if mask == 0 || mask == full {
                    return Ok(None);
                }
                let faces = x.axis_faces(&mask_to_subset(mask));
                OntoOracle::new(x, &faces, mask.count_ones() as usize).map(Some)
            })
            .collect::<Result<_, ComplexError>>()?;
        Ok(Self { d, oracles })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Value on the color subset `mask`, which must be proper and nonempty.
    pub fn eval(&self, x: &CellComplex, dec: &KDecomposition, mask: u32) -> bool {
        let oracle = self.oracles[mask as usize]
            .as_ref()
            .expect("proper nonempty subset");
        oracle.is_onto(x, &x.closure_of_mask(&dec.class_mask(mask)))
    }

    pub fn value(
        &self,
        x: &CellComplex,
        dec: &KDecomposition,
        s: &[usize],
    ) -> Result<ArbiterValue, ArbiterError> {
        check_decomposition(x, dec)?;
        if dec.k != self.d {
            return Err(ArbiterError::ImproperSubset(s.to_vec()));
        }
        Ok(ArbiterValue::from_bool(self.eval(
            x,
            dec,
            subset_to_mask(s, self.d)?,
        )))
    }

    /// Values on every proper nonempty subset, indexed by mask.
    pub fn table(&self, x: &CellComplex, dec: &KDecomposition) -> Vec<bool> {
        let full = (1u32 << self.d) - 1;
        (0..=full)
            .map(|m| m != 0 && m != full && self.eval(x, dec, m))
            .collect()
    }
}

/// How axiom (5) is exercised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryMode {
    /// Every element of the cube's symmetry group, on every sample.
    Full,
    /// One random non-identity element per sample.
    Sampled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerAxiomConfig {
    pub d: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Random enlargement steps per subset for axiom (4).
    pub enlargements: usize,
    pub symmetry: SymmetryMode,
}

impl PowerAxiomConfig {
    pub fn new(d: usize, n: usize, samples: usize, seed: u64) -> Self {
        Self {
            d,
            n,
            samples,
            seed,
            enlargements: 3,
            symmetry: SymmetryMode::Full,
        }
    }
}

pub const POWER_AXIOMS: [&str; 6] = [
    "1-complement",
    "2-intersection",
    "3-splitting",
    "4-greedy",
    "5-symmetry",
    "singleton",
];

/// Context for sweeping the power-set axioms over random decompositions of
/// a generic tiling of the cube.
pub struct PowerAxiomSweep {
    pub cube: GenericCube,
    arbiter: CubeArbiter,
    group: Vec<SiteSymmetry>,
}

impl PowerAxiomSweep {
    pub fn new(d: usize, n: usize) -> Result<Self, ArbiterError> {
        let cube = generic_cube(d, n)?;
        let arbiter = CubeArbiter::new(&cube.complex)?;
        let group = site_symmetry(&cube);
        Ok(Self { cube, arbiter, group })
    }

    pub fn arbiter(&self) -> &CubeArbiter {
        &self.arbiter
    }

    pub fn group(&self) -> &[SiteSymmetry] {
        &self.group
    }

    /// Checks all axioms on one decomposition; `rng` drives the enlargement
    /// steps and sampled symmetries.
    pub fn check_one<R: Rng + ?Sized>(
        &self,
        dec: &KDecomposition,
        cfg: &PowerAxiomConfig,
        rng: &mut R,
    ) -> Vec<AxiomReport> {
        let x = &self.cube.complex;
        let d = self.arbiter.d;
        let full = (1u32 << d) - 1;
        let domain = format!("generic cube d={} n={}", d, self.cube.n);
        let mut reports: Vec<AxiomReport> = POWER_AXIOMS
            .iter()
            .map(|a| AxiomReport::new(*a, domain.clone()))
            .collect();
        let hash = dec.hash();
        let f = self.arbiter.table(x, dec);
        let val = |m: u32| i64::from(f[m as usize]);
        let witness = |subset: u32, lhs: i64, rhs: i64, detail: String| Violation {
            decomposition_hash: hash.clone(),
            subset: mask_to_subset(subset),
            lhs,
            rhs,
            detail,
        };
        let proper: Vec<u32> = (1..full).collect();
        for &s in &proper {
            let sum = val(s) + val(full ^ s);
            reports[0].record(sum == 1, || witness(s, sum, 1, String::new()));
        }
        for &s1 in &proper {
            for &s2 in &proper {
                if s1 >= s2 {
                    continue;
                }
                if s1 & s2 == 0 {
                    reports[1].skipped += 1;
                    continue;
                }
                let ok = !(f[s1 as usize] && f[s2 as usize]) || f[(s1 & s2) as usize];
                reports[1].record(ok, || {
                    witness(s1, val(s1 & s2), 1, format!("with {:?}", mask_to_subset(s2)))
                });
            }
        }
        for &t in &proper {
            if !f[t as usize] {
                continue;
            }
            let mut s = (t - 1) & t;
            while s != 0 {
                let sum = val(s) + val(t & !s);
                reports[2].record(sum >= 1, || {
                    witness(s, sum, 1, format!("inside {:?}", mask_to_subset(t)))
                });
                s = (s - 1) & t;
            }
        }
        for &s in &proper {
            let mut grown = dec.clone();
            let mut before = f[s as usize];
            let inside = mask_to_subset(s);
            for _ in 0..cfg.enlargements {
                let outside: Vec<usize> = (0..grown.colors.len())
                    .filter(|&i| s >> grown.colors[i] & 1 == 0)
                    .collect();
                if outside.is_empty() {
                    break;
                }
                let cell = outside[rng.random_range(0..outside.len())];
                let color = inside[rng.random_range(0..inside.len())];
                grown.set_color(cell, color);
                let after = self.arbiter.eval(x, &grown, s);
                reports[3].record(!before || after, || {
                    witness(
                        s,
                        i64::from(before),
                        i64::from(after),
                        format!("recolored cell {cell}"),
                    )
                });
                before = after;
            }
        }
        let chosen: Vec<&SiteSymmetry> = match cfg.symmetry {
            SymmetryMode::Full => self.group.iter().filter(|g| !g.is_identity()).collect(),
            SymmetryMode::Sampled => {
                let others: Vec<&SiteSymmetry> = self.group.iter().filter(|g| !g.is_identity()).collect();
                vec![others[rng.random_range(0..others.len())]]
            }
        };
        for g in chosen {
            let moved = dec.transformed(g);
            for &s in &proper {
                let image = permute_mask(s, &g.axis_perm);
                let after = self.arbiter.eval(x, &moved, image);
                reports[4].record(after == f[s as usize], || {
                    witness(
                        s,
                        val(s),
                        i64::from(after),
                        format!("axes {:?} flips {:?}", g.axis_perm, g.flips),
                    )
                });
            }
        }
        let crossing = (0..d).filter(|&a| f[1usize << a]).count() as i64;
        reports[5].record(crossing >= 1, || {
            witness(0, crossing, 1, "no singleton crosses".into())
        });
        reports
    }
}

/// Sweeps the power-set axioms over `cfg.samples` uniform random
/// `d`-colorings of the generic cube tiling.
pub fn check_power_axioms(cfg: &PowerAxiomConfig) -> Result<Vec<AxiomReport>, ArbiterError> {
    let sweep = PowerAxiomSweep::new(cfg.d, cfg.n)?;
    let cells = sweep.cube.complex.top_count();
    let parts: Vec<Vec<AxiomReport>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeding::stream(cfg.seed, i);
            let dec = KDecomposition::random(cells, cfg.d, &mut rng);
            sweep.check_one(&dec, cfg, &mut rng)
        })
        .collect();
    Ok(merge_all(parts))
}

/// The homological Poincaré multiarbiter on a projective space: the largest
/// `k ≤ d - 1` with `H_k(M) → H_k(W)` onto.
#[derive(Clone, Debug)]
pub struct PoincareArbiter {
    oracles: Vec<OntoOracle>,
}

impl PoincareArbiter {
    pub fn new(x: &CellComplex) -> Result<Self, ArbiterError> {
        if !(2..=3).contains(&x.dim()) {
            return Err(ArbiterError::UnsupportedDimension(x.dim()));
        }
        let none = Subcomplex::empty(x);
        let oracles = (0..x.dim())
            .map(|k| OntoOracle::new(x, &none, k))
            .collect::<Result<_, _>>()?;
        Ok(Self { oracles })
    }

    pub fn value(&self, x: &CellComplex, m: &Subcomplex) -> Result<MultiArbiterValue, ArbiterError> {
        if m.is_empty() {
            return Err(ArbiterError::EmptyPiece);
        }
        let best = (0..self.oracles.len())
            .rev()
            .find(|&k| self.oracles[k].is_onto(x, m))
            .unwrap_or(0);
        Ok(MultiArbiterValue(best))
    }
}

/// One-shot form of [`PoincareArbiter::value`].
pub fn poincare_multiarbiter_rpd(x: &CellComplex, m: &Subcomplex) -> Result<MultiArbiterValue, ArbiterError> {
    PoincareArbiter::new(x)?.value(x, m)
}

/// Checks monotonicity, complementary duality and the intersection bound of
/// the Poincaré multiarbiter over every pair of pieces in `family`.
///
/// `is_piece` decides whether a top-cell set is a codimension-zero piece;
/// intersections that are not pieces are skipped and counted.
pub fn check_poincare_axioms(
    x: &CellComplex,
    family: &[BitVector],
    is_piece: &(dyn Fn(&BitVector) -> bool + Sync),
) -> Result<Vec<AxiomReport>, ArbiterError> {
    let arb = PoincareArbiter::new(x)?;
    let d = x.dim() as i64;
    let domain = format!("RP^{d} with {} top cells", x.top_count());
    let values: Vec<i64> = family
        .iter()
        .map(|m| arb.value(x, &x.closure_of_mask(m)).map(|v| v.0 as i64))
        .collect::<Result<_, _>>()?;
    let index: HashMap<&BitVector, usize> = family.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let key = |m: &BitVector| m.iter_ones().collect::<Vec<_>>();
    let mut mono = AxiomReport::new("2-monotone", domain.clone());
    let mut dual = AxiomReport::new("3-duality", domain.clone());
    let mut inter = AxiomReport::new("4-intersection", domain);
    let full = BitVector::from_bools(&vec![true; x.top_count()]);
    for (i, a) in family.iter().enumerate() {
        let comp = &full + a;
        if let Some(&j) = index.get(&comp) {
            if i < j {
                let sum = values[i] + values[j];
                dual.record(sum == d - 1, || Violation {
                    decomposition_hash: String::new(),
                    subset: key(a),
                    lhs: sum,
                    rhs: d - 1,
                    detail: String::new(),
                });
            }
        }
        for (j, b) in family.iter().enumerate() {
            if i != j && a.is_subset_of(b) {
                mono.record(values[i] <= values[j], || Violation {
                    decomposition_hash: String::new(),
                    subset: key(a),
                    lhs: values[i],
                    rhs: values[j],
                    detail: format!("inside {:?}", key(b)),
                });
            }
            if i < j {
                let mut meet = a.clone();
                meet.and_assign(b);
                let closure = x.closure_of_mask(&meet);
                let shaped = !meet.is_zero()
                    && is_piece(&meet)
                    && closure == x.closure_of_mask(a).intersection(&x.closure_of_mask(b));
                if !shaped {
                    inter.skipped += 1;
                    continue;
                }
                let v = arb.value(x, &closure)?.0 as i64;
                let bound = values[i] + values[j] - d;
                inter.record(v >= bound, || Violation {
                    decomposition_hash: String::new(),
                    subset: key(a),
                    lhs: v,
                    rhs: bound,
                    detail: format!("meets {:?}", key(b)),
                });
            }
        }
    }
    Ok(vec![mono, dual, inter])
}

/// Raw top-cell subsets a family may be drawn from before it is rejected.
pub const FAMILY_CAP: u128 = 1 << 20;

/// Candidate pieces for an arbiter, as top-cell masks.
#[derive(Clone, Debug)]
pub struct PieceFamily {
    members: Vec<BitVector>,
    index: HashMap<BitVector, usize>,
}

impl PieceFamily {
    pub fn new(members: Vec<BitVector>) -> Self {
        let index = members.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { members, index }
    }

    /// Every nonempty top-cell set passing `keep`, after the size cap.
    pub fn filtered(x: &CellComplex, keep: impl Fn(&BitVector) -> bool) -> Result<Self, ArbiterError> {
        let n = x.top_count();
        let size = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
        if size > FAMILY_CAP {
            return Err(ArbiterError::FamilyTooLarge {
                size,
                cap: FAMILY_CAP,
            });
        }
        let members = (1u64..(1u64 << n))
            .map(|m| BitVector::from_indices(n, (0..n).filter(|&t| m >> t & 1 == 1)))
            .filter(|m| keep(m))
            .collect();
        Ok(Self::new(members))
    }

    /// Connected codimension-zero pieces of a closed surface.
    pub fn connected_surface_pieces(x: &CellComplex) -> Result<Self, ArbiterError> {
        if x.dim() != 2 {
            return Err(ArbiterError::UnsupportedDimension(x.dim()));
        }
        Self::filtered(x, |m| {
            is_regular_surface_piece(x, m) && x.component_count(&x.closure_of_mask(m)) == 1
        })
    }

    pub fn members(&self) -> &[BitVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, m: &BitVector) -> Option<usize> {
        self.index.get(m).copied()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Identify pieces related by attaching one top cell along an arc.
    pub shelling_moves: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { shelling_moves: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConsistentArbiters {
    pub family_size: usize,
    pub classes: usize,
    pub duality_pairs: usize,
    pub monotone_pairs: usize,
    /// Each table assigns a value to every family member, in family order.
    pub tables: Vec<Vec<u8>>,
}

/// Whether `piece ∪ {t}` is obtained from `piece` by an elementary shelling:
/// the closure of `t` meets the piece in an arc.
fn is_shelling(x: &CellComplex, piece: &Subcomplex, t: usize) -> bool {
    let cell = x.closure(&[t]).expect("valid top cell");
    let meet = cell.intersection(piece);
    let (v, e) = (meet.count(0), meet.count(1));
    e >= 1 && v == e + 1 && x.component_count(&meet) == 1
}

/// All {0,1} tables on `family` invariant under `sym` (and shelling moves
/// when enabled), monotone under inclusion, and dual on complementary pairs.
pub fn enumerate_consistent_arbiters(
    x: &CellComplex,
    family: &PieceFamily,
    sym: &[CellPermutation],
    opts: SearchOptions,
) -> Result<ConsistentArbiters, ArbiterError> {
    let size = 1u128.checked_shl(x.top_count() as u32).unwrap_or(u128::MAX);
    if size > FAMILY_CAP {
        return Err(ArbiterError::FamilyTooLarge {
            size,
            cap: FAMILY_CAP,
        });
    }
    let n = family.len();
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
    for (i, m) in family.members.iter().enumerate() {
        for g in sym {
            let img = g.map_mask(x.dim(), m);
            if let Some(j) = family.position(&img) {
                uf.union(i, j);
            }
        }
    }
    if opts.shelling_moves {
        for (i, m) in family.members.iter().enumerate() {
            let piece = x.closure_of_mask(m);
            for t in (0..x.top_count()).filter(|&t| !m.get(t)) {
                let mut grown = m.clone();
                grown.set(t, true);
                if let Some(j) = family.position(&grown) {
                    if is_shelling(x, &piece, t) {
                        uf.union(i, j);
                    }
                }
            }
        }
    }
    let mut class_of = vec![0usize; n];
    let mut roots: HashMap<usize, usize> = HashMap::new();
    for (i, c) in class_of.iter_mut().enumerate() {
        let r = uf.find(i);
        let next = roots.len();
        *c = *roots.entry(r).or_insert(next);
    }
    let classes = roots.len();
    let full = BitVector::from_bools(&vec![true; x.top_count()]);
    let mut implications: Vec<HashSet<usize>> = vec![HashSet::new(); 2 * classes];
    let lit = |c: usize, v: bool| 2 * c + usize::from(v);
    let mut contradiction = false;
    let mut duality_pairs = 0;
    for (i, m) in family.members.iter().enumerate() {
        if let Some(j) = family.position(&(&full + m)) {
            duality_pairs += 1;
            let (a, b) = (class_of[i], class_of[j]);
            if a == b {
                contradiction = true;
            }
            implications[lit(a, true)].insert(lit(b, false));
            implications[lit(a, false)].insert(lit(b, true));
            implications[lit(b, true)].insert(lit(a, false));
            implications[lit(b, false)].insert(lit(a, true));
        }
    }
    let mut monotone_pairs = 0;
    for (i, a) in family.members.iter().enumerate() {
        for (j, b) in family.members.iter().enumerate() {
            if i != j && a.is_subset_of(b) {
                monotone_pairs += 1;
                let (ca, cb) = (class_of[i], class_of[j]);
                if ca != cb {
                    implications[lit(ca, true)].insert(lit(cb, true));
                    implications[lit(cb, false)].insert(lit(ca, false));
                }
            }
        }
    }
    let implications: Vec<Vec<usize>> = implications
        .into_iter()
        .map(|s| {
            let mut v: Vec<usize> = s.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect();
    // Branch on classes in order of their smallest member's cell count.
    let mut order: Vec<usize> = (0..classes).collect();
    let weight = |c: usize| {
        family
            .members
            .iter()
            .zip(&class_of)
            .filter(|(_, &k)| k == c)
            .map(|(m, _)| m.count_ones())
            .min()
            .unwrap_or(0)
    };
    order.sort_by_key(|&c| (weight(c), c));
    let mut solutions: Vec<Vec<bool>> = Vec::new();
    if !contradiction {
        let mut assign: Vec<Option<bool>> = vec![None; classes];
        search(&order, 0, &implications, &mut assign, &mut solutions);
    }
    let tables = solutions
        .into_iter()
        .map(|sol| class_of.iter().map(|&c| u8::from(sol[c])).collect())
        .collect();
    Ok(ConsistentArbiters {
        family_size: n,
        classes,
        duality_pairs,
        monotone_pairs,
        tables,
    })
}

fn propagate(
    start: usize,
    implications: &[Vec<usize>],
    assign: &mut [Option<bool>],
    trail: &mut Vec<usize>,
) -> bool {
    let mut stack = vec![start];
    while let Some(l) = stack.pop() {
        let (c, v) = (l / 2, l % 2 == 1);
        match assign[c] {
            Some(old) if old == v => continue,
            Some(_) => return false,
            None => {
                assign[c] = Some(v);
                trail.push(c);
                stack.extend(implications[l].iter().copied());
            }
        }
    }
    true
}

fn search(
    order: &[usize],
    pos: usize,
    implications: &[Vec<usize>],
    assign: &mut Vec<Option<bool>>,
    out: &mut Vec<Vec<bool>>,
) {
    let Some(&c) = order[pos..].iter().find(|&&c| assign[c].is_none()) else {
        out.push(assign.iter().map(|v| v.expect("all assigned")).collect());
        return;
    };
    for v in [false, true] {
        let mut trail = Vec::new();
        if propagate(2 * c + usize::from(v), implications, assign, &mut trail) {
            search(order, pos, implications, assign, out);
        }
        for t in trail {
            assign[t] = None;
        }
    }
}

/// The homological arbiter's table on a surface family.
pub fn homological_table(x: &CellComplex, family: &PieceFamily) -> Vec<u8> {
    family
        .members
        .iter()
        .map(|m| arbiter_h_rp2(x, &x.closure_of_mask(m)).bit())
        .collect()
}

#[cfg(test)]
mod tests;
