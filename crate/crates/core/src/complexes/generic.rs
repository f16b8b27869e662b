//! Complexes of generic tilings, described by which regions meet at each vertex.
//!
//! In a generic tiling of a `d`-cube exactly `d + 1` regions meet at every
//! vertex, where a region is a tile or one of the `2d` outer facets. Every
//! cell is then determined by the set of regions containing it: a set of `j`
//! regions with at least one tile spans a cell of dimension `d + 1 - j`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CellComplex, ComplexError, FaceTag, Side, Subcomplex};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionId {
    Site(usize),
    Outer(FaceTag),
}

impl RegionId {
    fn code(self) -> i64 {
        match self {
            RegionId::Site(i) => i as i64,
            RegionId::Outer(t) => -(2 * t.axis as i64 + i64::from(t.side == Side::Upper) + 1),
        }
    }
}

/// A complex built from vertex region sets; top cell `i` is site `i`.
#[derive(Clone, Debug)]
pub struct RegionComplex {
    pub complex: CellComplex,
    /// Region set of each cell, per dimension.
    pub regions: Vec<Vec<Vec<RegionId>>>,
}

/// Builds the cell complex of a generic tiling from its vertices.
///
/// Every vertex must be listed by exactly `d + 1` regions including at least
/// one site, and every site in `0..sites` must occur.
pub fn region_complex(
    d: usize,
    sites: usize,
    vertices: &[BTreeSet<RegionId>],
) -> Result<RegionComplex, ComplexError> {
    let mut cells: BTreeSet<Vec<RegionId>> = BTreeSet::new();
    for v in vertices {
        if v.len() != d + 1 {
            return Err(ComplexError::Degenerate(format!(
                "{} regions meet at a vertex, expected {}",
                v.len(),
                d + 1
            )));
        }
        let list: Vec<RegionId> = v.iter().copied().collect();
        for mask in 1u32..(1 << list.len()) {
            let sub: Vec<RegionId> = (0..list.len())
                .filter(|&j| mask >> j & 1 == 1)
                .map(|j| list[j])
                .collect();
            if sub.iter().any(|r| matches!(r, RegionId::Site(_))) {
                cells.insert(sub);
            }
        }
    }
    let mut by_dim: Vec<Vec<Vec<RegionId>>> = vec![Vec::new(); d + 1];
    for c in cells {
        by_dim[d + 1 - c.len()].push(c);
    }
    for (i, top) in by_dim[d].iter().enumerate() {
        if top[0] != RegionId::Site(i) {
            return Err(ComplexError::Degenerate(format!("site {i} has no vertices")));
        }
    }
    if by_dim[d].len() != sites {
        return Err(ComplexError::Degenerate(format!(
            "{} of {sites} sites have vertices",
            by_dim[d].len()
        )));
    }
    let index: Vec<HashMap<&[RegionId], usize>> = by_dim
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect())
        .collect();
    let mut boundary: Vec<Vec<Vec<usize>>> = by_dim.iter().map(|l| vec![Vec::new(); l.len()]).collect();
    for k in 0..d {
        for (i, c) in by_dim[k].iter().enumerate() {
            for drop in 0..c.len() {
                let sup: Vec<RegionId> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != drop)
                    .map(|(_, &r)| r)
                    .collect();
                if let Some(&j) = index[k + 1].get(sup.as_slice()) {
                    boundary[k + 1][j].push(i);
                }
            }
        }
    }
    let labels = by_dim
        .iter()
        .map(|l| l.iter().map(|c| c.iter().map(|r| r.code()).collect()).collect())
        .collect();
    let mut complex = CellComplex::new(labels, boundary)?;
    let mut tags = BTreeMap::new();
    for axis in 0..d {
        for side in [Side::Lower, Side::Upper] {
            let tag = FaceTag::new(axis, side);
            let masks = by_dim
                .iter()
                .map(|l| {
                    BitVector::from_bools(
                        &l.iter()
                            .map(|c| c.contains(&RegionId::Outer(tag)))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            tags.insert(tag, Subcomplex::from_masks_unchecked(masks));
        }
    }
    complex.set_face_tags(tags);
    Ok(RegionComplex {
        complex,
        regions: by_dim,
    })
}

/// A generic tiling of the cube `[0, 4n]^d` by power cells of a
/// symmetric site lattice, unchanged by every symmetry of the cube.
///
/// In the plane this is the truncated-square tiling (one octagon per grid
/// square, one diamond per grid vertex); in space the bitruncated cubic
/// honeycomb (one truncated octahedron per grid cube and per grid vertex).
#[derive(Clone, Debug)]
pub struct GenericCube {
    pub d: usize,
    pub n: usize,
    pub sites: Vec<Vec<i64>>,
    pub complex: CellComplex,
    site_index: HashMap<Vec<i64>, usize>,
}

impl GenericCube {
    pub fn site_at(&self, coords: &[i64]) -> Option<usize> {
        self.site_index.get(coords).copied()
    }

    pub fn side_length(&self) -> i64 {
        4 * self.n as i64
    }
}

pub fn generic_cube(d: usize, n: usize) -> Result<GenericCube, ComplexError> {
    if !(2..=3).contains(&d) || n == 0 {
        return Err(ComplexError::Unsupported(format!(
            "generic cube needs d in 2..=3 and n >= 1, got d={d}, n={n}"
        )));
    }
    let side = 4 * n as i64;
    // Cell centres carry weight 4 in the plane so that diamonds shrink to
    // unit size; in space equal weights already give the BCC Voronoi cells.
    let centre_weight = if d == 2 { 4 } else { 0 };
    let mut sites: Vec<(Vec<i64>, i64)> = Vec::new();
    let push_grid = |offset: i64, count: i64, weight: i64, sites: &mut Vec<(Vec<i64>, i64)>| {
        let total = count.pow(d as u32);
        for idx in 0..total {
            let mut c = Vec::with_capacity(d);
            let mut r = idx;
            for _ in 0..d {
                c.push(offset + 4 * (r % count));
                r /= count;
            }
            c.reverse();
            sites.push((c, weight));
        }
    };
    push_grid(2, n as i64, centre_weight, &mut sites);
    push_grid(0, n as i64 + 1, 0, &mut sites);
    sites.sort();
    let mut vertices = Vec::new();
    let mut p = vec![0i64; d];
    'scan: loop {
        let mut best = i64::MAX;
        let mut arg: Vec<usize> = Vec::new();
        for (i, (s, w)) in sites.iter().enumerate() {
            let pow: i64 = s.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<i64>() - w;
            if pow < best {
                best = pow;
                arg.clear();
                arg.push(i);
            } else if pow == best {
                arg.push(i);
            }
        }
        let mut regions: BTreeSet<RegionId> = arg.into_iter().map(RegionId::Site).collect();
        for (axis, &c) in p.iter().enumerate() {
            if c == 0 {
                regions.insert(RegionId::Outer(FaceTag::new(axis, Side::Lower)));
            }
            if c == side {
                regions.insert(RegionId::Outer(FaceTag::new(axis, Side::Upper)));
            }
        }
        if regions.len() > d + 1 {
            return Err(ComplexError::Degenerate(format!(
                "{} regions meet at {p:?}",
                regions.len()
            )));
        }
        if regions.len() == d + 1 {
            vertices.push(regions);
        }
        for axis in (0..d).rev() {
            p[axis] += 1;
            if p[axis] <= side {
                continue 'scan;
            }
            p[axis] = 0;
        }
        break;
    }
    let built = region_complex(d, sites.len(), &vertices)?;
    let coords: Vec<Vec<i64>> = sites.into_iter().map(|(c, _)| c).collect();
    let site_index = coords.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    Ok(GenericCube {
        d,
        n,
        sites: coords,
        complex: built.complex,
        site_index,
    })
}

/// A symmetry of the cube: coordinate `i` moves to axis `axis_perm[i]`,
/// reflected when `flips[i]` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteSymmetry {
    pub axis_perm: Vec<usize>,
    pub flips: Vec<bool>,
    /// Image of each top cell.
    pub site_map: Vec<usize>,
}

impl SiteSymmetry {
    pub fn is_identity(&self) -> bool {
        self.site_map.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// The full hyperoctahedral group acting on the tiles of `cube`.
pub fn site_symmetry(cube: &GenericCube) -> Vec<SiteSymmetry> {
    use itertools::Itertools;
    let d = cube.d;
    let side = cube.side_length();
    let mut out = Vec::new();
    for perm in (0..d).permutations(d) {
        for flip_mask in 0u32..(1 << d) {
            let flips: Vec<bool> = (0..d).map(|i| flip_mask >> i & 1 == 1).collect();
            let site_map = cube
                .sites
                .iter()
                .map(|s| {
                    let mut img = vec![0i64; d];
                    for i in 0..d {
                        img[perm[i]] = if flips[i] { side - s[i] } else { s[i] };
                    }
                    cube.site_at(&img).expect("lattice is symmetric")
                })
                .collect();
            out.push(SiteSymmetry {
                axis_perm: perm.clone(),
                flips,
                site_map,
            });
        }
    }
    out
}
