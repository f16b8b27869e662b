use super::{CellComplex, ComplexError, Subcomplex};
use crate::gf2::{BitMatrix, BitVector, EchelonBasis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyResult {
    pub degree: usize,
    pub dimension: usize,
    /// Cycles over the parent's cells of this degree, independent modulo boundaries.
    pub cycle_reps: Vec<BitVector>,
}

/// Chain complex of the pair `(space, rel)` in one degree: chains are the
/// cells of `space` not in `rel`.
struct PairView<'a> {
    x: &'a CellComplex,
    space: &'a Subcomplex,
    rel: &'a Subcomplex,
}

impl PairView<'_> {
    fn live(&self, k: usize) -> BitVector {
        let mut m = self.space.mask(k).clone();
        m.and_not_assign(self.rel.mask(k));
        m
    }

    /// Boundary of cell `(k, i)` with dead faces dropped.
    fn boundary_of(&self, k: usize, i: usize, live_below: &BitVector) -> BitVector {
        let mut v = BitVector::zeros(self.x.count(k - 1));
        for &f in self.x.faces(k, i) {
            if live_below.get(f) {
                v.set(f, true);
            }
        }
        v
    }

    fn boundaries(&self, k: usize) -> EchelonBasis {
        let mut basis = EchelonBasis::new(self.x.count(k));
        if k < self.x.dim() {
            let below = self.live(k);
            for c in self.live(k + 1).iter_ones() {
                basis.insert(self.boundary_of(k + 1, c, &below));
            }
        }
        basis
    }

    fn cycles(&self, k: usize) -> Vec<BitVector> {
        let live = self.live(k);
        let positions: Vec<usize> = live.iter_ones().collect();
        if k == 0 {
            return positions
                .iter()
                .map(|&p| BitVector::unit(self.x.count(0), p))
                .collect();
        }
        let below = self.live(k - 1);
        let below_pos: Vec<usize> = below.iter_ones().collect();
        let mut below_index = vec![usize::MAX; self.x.count(k - 1)];
        for (j, &p) in below_pos.iter().enumerate() {
            below_index[p] = j;
        }
        let mut m = BitMatrix::zeros(below_pos.len(), positions.len());
        for (col, &c) in positions.iter().enumerate() {
            for &f in self.x.faces(k, c) {
                if below.get(f) {
                    m.flip(below_index[f], col);
                }
            }
        }
        m.kernel_basis()
            .into_iter()
            .map(|z| BitVector::from_indices(self.x.count(k), z.iter_ones().map(|j| positions[j])))
            .collect()
    }

    fn homology(&self, k: usize) -> HomologyResult {
        let mut basis = self.boundaries(k);
        let reps: Vec<BitVector> = self
            .cycles(k)
            .into_iter()
            .filter(|z| basis.insert(z.clone()))
            .collect();
        HomologyResult {
            degree: k,
            dimension: reps.len(),
            cycle_reps: reps,
        }
    }
}

fn check_degree(x: &CellComplex, degree: usize) -> Result<(), ComplexError> {
    if degree > x.dim() {
        Err(ComplexError::DegreeOutOfRange { degree, dim: x.dim() })
    } else {
        Ok(())
    }
}

/// Absolute homology of the whole complex.
pub fn homology(x: &CellComplex, degree: usize) -> Result<HomologyResult, ComplexError> {
    check_degree(x, degree)?;
    let whole = x.whole();
    let none = Subcomplex::empty(x);
    Ok(PairView {
        x,
        space: &whole,
        rel: &none,
    }
    .homology(degree))
}

/// Absolute homology of a subcomplex.
pub fn subcomplex_homology(
    x: &CellComplex,
    s: &Subcomplex,
    degree: usize,
) -> Result<HomologyResult, ComplexError> {
    check_degree(x, degree)?;
    let none = Subcomplex::empty(x);
    Ok(PairView {
        x,
        space: s,
        rel: &none,
    }
    .homology(degree))
}

/// Homology of the pair `(space, a)`; `a` must lie in `space`.
pub fn relative_homology(
    x: &CellComplex,
    space: &Subcomplex,
    a: &Subcomplex,
    degree: usize,
) -> Result<HomologyResult, ComplexError> {
    check_degree(x, degree)?;
    if !a.is_subset_of(space) {
        return Err(ComplexError::NotContained);
    }
    Ok(PairView { x, space, rel: a }.homology(degree))
}

/// Whether `H_k(s, s ∩ bdry) → H_k(x, bdry)` is onto.
///
/// Decided by testing each target class against the span of source cycles
/// and target boundaries.
pub fn induced_map_is_onto(x: &CellComplex, s: &Subcomplex, bdry: &Subcomplex, degree: usize) -> bool {
    let whole = x.whole();
    let target = PairView {
        x,
        space: &whole,
        rel: bdry,
    };
    let reps = target.homology(degree).cycle_reps;
    if reps.is_empty() {
        return true;
    }
    let s_rel = s.intersection(bdry);
    let source = PairView {
        x,
        space: s,
        rel: &s_rel,
    };
    let mut span = target.boundaries(degree);
    for z in source.cycles(degree) {
        span.insert(z);
    }
    reps.iter().all(|z| span.contains(z))
}

/// Cohomological test for ontoness of `H_k(s, s ∩ bdry) → H_k(x, bdry)`,
/// precomputed for a fixed pair `(x, bdry)`.
///
/// The map is onto iff restriction `H^k(x, bdry) → H^k(s, s ∩ bdry)` is
/// injective, i.e. the restricted cocycles stay independent modulo the
/// coboundaries of `s`.
#[derive(Clone, Debug)]
pub struct OntoOracle {
    degree: usize,
    live_top: BitVector,
    live_low: Option<BitVector>,
    cocycles: Vec<BitVector>,
}

impl OntoOracle {
    pub fn new(x: &CellComplex, bdry: &Subcomplex, degree: usize) -> Result<Self, ComplexError> {
        check_degree(x, degree)?;
        let whole = x.whole();
        let pair = PairView {
            x,
            space: &whole,
            rel: bdry,
        };
        let live_top = pair.live(degree);
        let positions: Vec<usize> = live_top.iter_ones().collect();
        // Cocycles: functionals on live k-cells killing every live boundary.
        let cocycles_all: Vec<BitVector> = if degree < x.dim() {
            let bnd: Vec<BitVector> = pair
                .live(degree + 1)
                .iter_ones()
                .map(|c| pair.boundary_of(degree + 1, c, &live_top))
                .collect();
            let m = BitMatrix::from_rows(
                positions.len(),
                bnd.iter().map(|b| b.select(&positions)).collect(),
            )
            .expect("consistent lengths");
            m.kernel_basis()
                .into_iter()
                .map(|z| BitVector::from_indices(x.count(degree), z.iter_ones().map(|j| positions[j])))
                .collect()
        } else {
            positions
                .iter()
                .map(|&p| BitVector::unit(x.count(degree), p))
                .collect()
        };
        let live_low = (degree > 0).then(|| pair.live(degree - 1));
        let mut basis = EchelonBasis::new(x.count(degree));
        if let Some(low) = &live_low {
            for f in low.iter_ones() {
                let mut v =
                    BitVector::from_indices(x.count(degree), x.cofaces(degree - 1, f).iter().copied());
                v.and_assign(&live_top);
                basis.insert(v);
            }
        }
        let cocycles = cocycles_all
            .into_iter()
            .filter(|z| basis.insert(z.clone()))
            .collect();
        Ok(Self {
            degree,
            live_top,
            live_low,
            cocycles,
        })
    }

    /// Dimension of the target homology group.
    pub fn target_dimension(&self) -> usize {
        self.cocycles.len()
    }

    pub fn is_onto(&self, x: &CellComplex, s: &Subcomplex) -> bool {
        if self.cocycles.is_empty() {
            return true;
        }
        let k = self.degree;
        let mut here = s.mask(k).clone();
        here.and_assign(&self.live_top);
        if here.count_ones() < self.cocycles.len() {
            return false;
        }
        let mut basis = EchelonBasis::new(x.count(k));
        if let Some(low) = &self.live_low {
            let mut low_s = s.mask(k - 1).clone();
            low_s.and_assign(low);
            for f in low_s.iter_ones() {
                let mut v = BitVector::from_indices(x.count(k), x.cofaces(k - 1, f).iter().copied());
                v.and_assign(&here);
                if !v.is_zero() {
                    basis.insert(v);
                }
            }
        }
        self.cocycles.iter().all(|phi| {
            let mut v = phi.clone();
            v.and_assign(&here);
            basis.insert(v)
        })
    }
}
