//! Finite regular cell complexes with Z/2 incidence.
//!
//! A complex stores, per dimension, an integer label for every cell and the
//! list of codimension-one faces with odd incidence. Subcomplexes are
//! face-closed cell sets kept as one bit mask per dimension.

mod builders;
mod generic;
mod homology;
mod symmetry;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};

pub use builders::{
    build_cube_grid, build_rp2, build_rp3, build_rp3_join, build_s2, build_torus_grid, from_facets,
    GridOptions, DEFAULT_CELL_CAP,
};
pub use generic::{
    generic_cube, region_complex, site_symmetry, GenericCube, RegionComplex, RegionId, SiteSymmetry,
};
pub use homology::{
    homology, induced_map_is_onto, relative_homology, subcomplex_homology, HomologyResult, OntoOracle,
};
pub use symmetry::{simplicial_symmetries, CellPermutation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("complex would have {cells} cells, above the cap of {cap}")]
    TooLarge { cells: u128, cap: u128 },
    #[error("unknown top cell {0}")]
    UnknownCell(usize),
    #[error("cell set is not closed under faces: cell ({dim}, {index}) is missing a face")]
    NotClosed { dim: usize, index: usize },
    #[error("subcomplex is not contained in its ambient complex")]
    NotContained,
    #[error("degree {degree} out of range 0..={dim}")]
    DegreeOutOfRange { degree: usize, dim: usize },
    #[error("degenerate region arrangement: {0}")]
    Degenerate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

/// One outer face of a cube: coordinate axis and side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceTag {
    pub axis: usize,
    pub side: Side,
}

impl FaceTag {
    pub fn new(axis: usize, side: Side) -> Self {
        Self { axis, side }
    }
}

/// A cell complex with cells grouped by dimension.
#[derive(Clone, Debug)]
pub struct CellComplex {
    dim: usize,
    labels: Vec<Vec<Vec<i64>>>,
    boundary: Vec<Vec<Vec<usize>>>,
    coboundary: Vec<Vec<Vec<usize>>>,
    face_tags: BTreeMap<FaceTag, Subcomplex>,
}

impl CellComplex {
    /// Assembles a complex from labels and face lists. `boundary[k][i]` lists
    /// faces of cell `(k, i)` in dimension `k - 1`; repeated faces cancel.
    pub fn new(labels: Vec<Vec<Vec<i64>>>, boundary: Vec<Vec<Vec<usize>>>) -> Result<Self, ComplexError> {
        if labels.is_empty() || labels.len() != boundary.len() {
            return Err(ComplexError::Unsupported(
                "labels and boundary must cover the same dimensions".into(),
            ));
        }
        let dim = labels.len() - 1;
        let mut reduced: Vec<Vec<Vec<usize>>> = Vec::with_capacity(boundary.len());
        for (k, cells) in boundary.into_iter().enumerate() {
            if cells.len() != labels[k].len() {
                return Err(ComplexError::Unsupported(format!(
                    "dimension {k}: {} labels but {} boundary lists",
                    labels[k].len(),
                    cells.len()
                )));
            }
            let mut out = Vec::with_capacity(cells.len());
            for (i, faces) in cells.into_iter().enumerate() {
                if k == 0 && !faces.is_empty() {
                    return Err(ComplexError::Unsupported("vertices have no faces".into()));
                }
                let mut odd: BTreeMap<usize, bool> = BTreeMap::new();
                for f in faces {
                    if k == 0 || f >= labels[k - 1].len() {
                        return Err(ComplexError::NotClosed { dim: k, index: i });
                    }
                    *odd.entry(f).or_insert(false) ^= true;
                }
                out.push(odd.into_iter().filter(|&(_, v)| v).map(|(f, _)| f).collect());
            }
            reduced.push(out);
        }
        let mut coboundary: Vec<Vec<Vec<usize>>> = labels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for k in 1..=dim {
            for (i, faces) in reduced[k].iter().enumerate() {
                for &f in faces {
                    coboundary[k - 1][f].push(i);
                }
            }
        }
        Ok(Self {
            dim,
            labels,
            boundary: reduced,
            coboundary,
            face_tags: BTreeMap::new(),
        })
    }

    pub(crate) fn set_face_tags(&mut self, tags: BTreeMap<FaceTag, Subcomplex>) {
        self.face_tags = tags;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self, k: usize) -> usize {
        self.labels.get(k).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn total_cells(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    pub fn top_count(&self) -> usize {
        self.count(self.dim)
    }

    pub fn label(&self, k: usize, i: usize) -> &[i64] {
        &self.labels[k][i]
    }

    pub fn labels(&self, k: usize) -> &[Vec<i64>] {
        &self.labels[k]
    }

    pub fn faces(&self, k: usize, i: usize) -> &[usize] {
        &self.boundary[k][i]
    }

    pub fn cofaces(&self, k: usize, i: usize) -> &[usize] {
        &self.coboundary[k][i]
    }

    pub fn face_tags(&self) -> &BTreeMap<FaceTag, Subcomplex> {
        &self.face_tags
    }

    pub fn tagged(&self, tag: FaceTag) -> Option<&Subcomplex> {
        self.face_tags.get(&tag)
    }

    /// Union of the outer faces named by `tags`; tags the complex lacks add nothing.
    pub fn tagged_union(&self, tags: &[FaceTag]) -> Subcomplex {
        let mut out = Subcomplex::empty(self);
        for t in tags {
            if let Some(s) = self.face_tags.get(t) {
                out = out.union(s);
            }
        }
        out
    }

    /// Union of both outer faces along each axis in `axes`.
    pub fn axis_faces(&self, axes: &[usize]) -> Subcomplex {
        let tags: Vec<FaceTag> = axes
            .iter()
            .flat_map(|&a| [FaceTag::new(a, Side::Lower), FaceTag::new(a, Side::Upper)])
            .collect();
        self.tagged_union(&tags)
    }

    /// Boundary map from dimension `k` to `k - 1` as a matrix with one
    /// column per `k`-cell.
    pub fn boundary_matrix(&self, k: usize) -> BitMatrix {
        assert!(k >= 1 && k <= self.dim);
        let mut m = BitMatrix::zeros(self.count(k - 1), self.count(k));
        for (i, faces) in self.boundary[k].iter().enumerate() {
            for &f in faces {
                m.set(f, i, true);
            }
        }
        m
    }

    /// Checks that every composite boundary map vanishes.
    pub fn boundary_squared_is_zero(&self) -> bool {
        (2..=self.dim).all(|k| {
            self.boundary_matrix(k - 1)
                .mul(&self.boundary_matrix(k))
                .expect("shapes agree")
                .is_zero()
        })
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.labels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                if k % 2 == 0 {
                    l.len() as i64
                } else {
                    -(l.len() as i64)
                }
            })
            .sum()
    }

    pub fn whole(&self) -> Subcomplex {
        Subcomplex {
            cells: self
                .labels
                .iter()
                .map(|l| BitVector::from_bools(&vec![true; l.len()]))
                .collect(),
        }
    }

    /// Smallest face-closed set containing the listed top cells.
    pub fn closure(&self, top_cells: &[usize]) -> Result<Subcomplex, ComplexError> {
        let mut mask = BitVector::zeros(self.top_count());
        for &t in top_cells {
            if t >= self.top_count() {
                return Err(ComplexError::UnknownCell(t));
            }
            mask.set(t, true);
        }
        Ok(self.closure_of_mask(&mask))
    }

    /// Closure of the top cells set in `mask`.
    pub fn closure_of_mask(&self, mask: &BitVector) -> Subcomplex {
        assert_eq!(mask.len(), self.top_count());
        let mut cells: Vec<BitVector> = self.labels.iter().map(|l| BitVector::zeros(l.len())).collect();
        cells[self.dim] = mask.clone();
        for k in (1..=self.dim).rev() {
            let (lower, upper) = cells.split_at_mut(k);
            for i in upper[0].iter_ones() {
                for &f in &self.boundary[k][i] {
                    lower[k - 1].set(f, true);
                }
            }
        }
        Subcomplex { cells }
    }

    /// Closure of the top cells not in `s`.
    pub fn complement_closure(&self, s: &Subcomplex) -> Subcomplex {
        let mut mask = s.top_mask(self).clone();
        let full = BitVector::from_bools(&vec![true; self.top_count()]);
        mask.xor_assign(&full);
        self.closure_of_mask(&mask)
    }

    /// Number of connected components of `s`, by union-find over its edges.
    pub fn component_count(&self, s: &Subcomplex) -> usize {
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(self.count(0));
        if self.dim >= 1 {
            for e in s.cells[1].iter_ones() {
                let f = &self.boundary[1][e];
                if f.len() == 2 {
                    uf.union(f[0], f[1]);
                }
            }
        }
        let mut roots: Vec<usize> = s.cells[0].iter_ones().map(|v| uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Whether the top cells in `mask` are connected through shared
    /// codimension-one faces.
    pub fn top_cells_face_connected(&self, mask: &BitVector) -> bool {
        let members: Vec<usize> = mask.iter_ones().collect();
        if members.is_empty() {
            return false;
        }
        if self.dim == 0 {
            return members.len() == 1;
        }
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(self.top_count());
        for &t in &members {
            for &f in &self.boundary[self.dim][t] {
                for &u in &self.coboundary[self.dim - 1][f] {
                    if mask.get(u) {
                        uf.union(t, u);
                    }
                }
            }
        }
        let r = uf.find(members[0]);
        members.iter().all(|&t| uf.find(t) == r)
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            dims: self.dim,
            cells: self.labels.clone(),
            boundary: self.boundary.clone(),
            face_tags: self
                .face_tags
                .iter()
                .map(|(t, s)| TaggedCells {
                    axis: t.axis,
                    side: t.side,
                    cells: s.cells.iter().map(|v| v.iter_ones().collect()).collect(),
                })
                .collect(),
        }
    }
}

/// Serialized form of a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub dims: usize,
    pub cells: Vec<Vec<Vec<i64>>>,
    pub boundary: Vec<Vec<Vec<usize>>>,
    pub face_tags: Vec<TaggedCells>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedCells {
    pub axis: usize,
    pub side: Side,
    pub cells: Vec<Vec<usize>>,
}

impl ComplexJson {
    pub fn into_complex(self) -> Result<CellComplex, ComplexError> {
        let mut c = CellComplex::new(self.cells, self.boundary)?;
        let mut tags = BTreeMap::new();
        for t in self.face_tags {
            let s = Subcomplex::from_cell_lists(&c, &t.cells)?;
            tags.insert(FaceTag::new(t.axis, t.side), s);
        }
        c.set_face_tags(tags);
        Ok(c)
    }
}

/// A face-closed set of cells of some parent complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subcomplex {
    cells: Vec<BitVector>,
}

impl Subcomplex {
    pub fn empty(parent: &CellComplex) -> Self {
        Self {
            cells: parent.labels.iter().map(|l| BitVector::zeros(l.len())).collect(),
        }
    }

    /// Validates face-closure of an explicit per-dimension cell listing.
    pub fn from_cell_lists(parent: &CellComplex, lists: &[Vec<usize>]) -> Result<Self, ComplexError> {
        let mut s = Self::empty(parent);
        for (k, list) in lists.iter().enumerate() {
            if k > parent.dim {
                return Err(ComplexError::NotContained);
            }
            for &i in list {
                if i >= parent.count(k) {
                    return Err(ComplexError::NotContained);
                }
                s.cells[k].set(i, true);
            }
        }
        s.check_closed(parent)?;
        Ok(s)
    }

    pub(crate) fn from_masks_unchecked(cells: Vec<BitVector>) -> Self {
        Self { cells }
    }

    fn check_closed(&self, parent: &CellComplex) -> Result<(), ComplexError> {
        for k in 1..=parent.dim {
            for i in self.cells[k].iter_ones() {
                if parent.boundary[k][i].iter().any(|&f| !self.cells[k - 1].get(f)) {
                    return Err(ComplexError::NotClosed { dim: k, index: i });
                }
            }
        }
        Ok(())
    }

    pub fn is_closed(&self, parent: &CellComplex) -> bool {
        self.check_closed(parent).is_ok()
    }

    pub fn mask(&self, k: usize) -> &BitVector {
        &self.cells[k]
    }

    pub fn top_mask(&self, parent: &CellComplex) -> &BitVector {
        &self.cells[parent.dim]
    }

    pub fn top_cells(&self, parent: &CellComplex) -> Vec<usize> {
        self.cells[parent.dim].iter_ones().collect()
    }

    pub fn contains(&self, k: usize, i: usize) -> bool {
        self.cells[k].get(i)
    }

    pub fn count(&self, k: usize) -> usize {
        self.cells[k].count_ones()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.cells.iter().map(BitVector::count_ones).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(BitVector::is_zero)
    }

    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        let mut cells = self.cells.clone();
        for (a, b) in cells.iter_mut().zip(&other.cells) {
            a.or_assign(b);
        }
        Subcomplex { cells }
    }

    pub fn intersection(&self, other: &Subcomplex) -> Subcomplex {
        let mut cells = self.cells.clone();
        for (a, b) in cells.iter_mut().zip(&other.cells) {
            a.and_assign(b);
        }
        Subcomplex { cells }
    }

    pub fn is_subset_of(&self, other: &Subcomplex) -> bool {
        self.cells
            .iter()
            .zip(&other.cells)
            .all(|(a, b)| a.is_subset_of(b))
    }

    /// Whether this subcomplex is the closure of its own top cells.
    pub fn is_top_generated(&self, parent: &CellComplex) -> bool {
        parent.closure_of_mask(self.top_mask(parent)) == *self
    }
}

#[cfg(test)]
mod tests;
