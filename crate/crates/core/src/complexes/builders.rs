use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{CellComplex, ComplexError, FaceTag, Side, Subcomplex};
use crate::gf2::BitVector;

pub const DEFAULT_CELL_CAP: u128 = 4_000_000;

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Identify opposite faces, giving a torus.
    pub periodic: bool,
    pub cell_cap: u128,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            periodic: false,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

/// The `n`-subdivided `d`-cube with outer faces tagged by `(axis, side)`.
///
/// Cells are labeled by doubled integer coordinates in `[0, 2n]^d`; a cell's
/// dimension is its number of odd coordinates.
pub fn build_cube_grid(d: usize, n: usize) -> Result<CellComplex, ComplexError> {
    build_grid(d, n, GridOptions::default())
}

/// The `n × n` square grid with opposite sides identified.
pub fn build_torus_grid(n: usize) -> Result<CellComplex, ComplexError> {
    build_grid(
        2,
        n,
        GridOptions {
            periodic: true,
            ..GridOptions::default()
        },
    )
}

pub fn build_grid(d: usize, n: usize, opts: GridOptions) -> Result<CellComplex, ComplexError> {
    if !(1..=4).contains(&d) {
        return Err(ComplexError::Unsupported(format!(
            "grid dimension {d} not in 1..=4"
        )));
    }
    if n == 0 {
        return Err(ComplexError::Unsupported(
            "grid subdivision must be at least 1".into(),
        ));
    }
    let side = if opts.periodic { 2 * n } else { 2 * n + 1 };
    let total = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > opts.cell_cap {
        return Err(ComplexError::TooLarge {
            cells: total,
            cap: opts.cell_cap,
        });
    }
    let modulus = 2 * n as i64;
    let mut labels: Vec<Vec<Vec<i64>>> = vec![Vec::new(); d + 1];
    let mut point = vec![0i64; d];
    'odometer: loop {
        let k = point.iter().filter(|&&c| c % 2 == 1).count();
        labels[k].push(point.clone());
        for axis in (0..d).rev() {
            point[axis] += 1;
            if (point[axis] as usize) < side {
                continue 'odometer;
            }
            point[axis] = 0;
        }
        break;
    }
    let index: Vec<HashMap<Vec<i64>, usize>> = labels
        .iter()
        .map(|l| l.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect())
        .collect();
    let mut boundary: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); labels[0].len()]];
    for k in 1..=d {
        let mut lists = Vec::with_capacity(labels[k].len());
        for c in &labels[k] {
            let mut faces = Vec::with_capacity(2 * k);
            for j in (0..d).filter(|&j| c[j] % 2 == 1) {
                for delta in [-1i64, 1] {
                    let mut f = c.clone();
                    f[j] += delta;
                    if opts.periodic {
                        f[j] = f[j].rem_euclid(modulus);
                    }
                    faces.push(index[k - 1][&f]);
                }
            }
            lists.push(faces);
        }
        boundary.push(lists);
    }
    let mut complex = CellComplex::new(labels, boundary)?;
    if !opts.periodic {
        let mut tags = BTreeMap::new();
        for axis in 0..d {
            for (side, value) in [(Side::Lower, 0), (Side::Upper, modulus)] {
                let cells = (0..=d)
                    .map(|k| {
                        BitVector::from_bools(
                            &complex
                                .labels(k)
                                .iter()
                                .map(|c| c[axis] == value)
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect();
                tags.insert(FaceTag::new(axis, side), Subcomplex::from_masks_unchecked(cells));
            }
        }
        complex.set_face_tags(tags);
    }
    Ok(complex)
}

/// Simplicial complex generated by `facets`, cells labeled by sorted vertex
/// lists in lexicographic order within each dimension.
pub fn from_facets(facets: &[Vec<i64>]) -> Result<CellComplex, ComplexError> {
    let dim = facets
        .iter()
        .map(|f| f.len())
        .max()
        .filter(|&l| l > 0)
        .ok_or_else(|| ComplexError::Unsupported("no facets".into()))?
        - 1;
    let mut simplices: Vec<BTreeSet<Vec<i64>>> = vec![BTreeSet::new(); dim + 1];
    for f in facets {
        let mut f = f.clone();
        f.sort_unstable();
        f.dedup();
        let n = f.len();
        for mask in 1u32..(1 << n) {
            let s: Vec<i64> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| f[i]).collect();
            simplices[s.len() - 1].insert(s);
        }
    }
    let labels: Vec<Vec<Vec<i64>>> = simplices.into_iter().map(|s| s.into_iter().collect()).collect();
    let index: Vec<HashMap<&[i64], usize>> = labels
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect())
        .collect();
    let mut boundary = vec![vec![Vec::new(); labels[0].len()]];
    for k in 1..=dim {
        let lists = labels[k]
            .iter()
            .map(|s| {
                (0..s.len())
                    .map(|drop| {
                        let f: Vec<i64> = s
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != drop)
                            .map(|(_, &v)| v)
                            .collect();
                        index[k - 1][f.as_slice()]
                    })
                    .collect()
            })
            .collect();
        boundary.push(lists);
    }
    CellComplex::new(labels, boundary)
}

/// Triangles of the 6-vertex real projective plane.
pub const RP2_FACETS: [[i64; 3]; 10] = [
    [1, 2, 3],
    [1, 3, 4],
    [1, 4, 5],
    [1, 5, 6],
    [1, 2, 6],
    [2, 3, 5],
    [3, 4, 6],
    [2, 4, 5],
    [3, 5, 6],
    [2, 4, 6],
];

/// The minimal triangulation of the real projective plane.
pub fn build_rp2() -> CellComplex {
    let facets: Vec<Vec<i64>> = RP2_FACETS.iter().map(|f| f.to_vec()).collect();
    from_facets(&facets).expect("fixed facet list")
}

/// Boundary of the octahedron, vertices `±1, ±2, ±3`.
pub fn build_s2() -> CellComplex {
    let mut facets = Vec::new();
    for a in [1, -1] {
        for b in [2, -2] {
            for c in [3, -3] {
                facets.push(vec![a, b, c]);
            }
        }
    }
    from_facets(&facets).expect("fixed facet list")
}

/// Real projective 3-space as the dual block complex of the antipodal
/// quotient of the join of two polygons with `m` and `n` vertices.
///
/// The dual has one top cell per quotient vertex, `(m + n) / 2` in all, and
/// any union of top cells is a regular neighbourhood, hence a manifold.
pub fn build_rp3_join(m: usize, n: usize) -> Result<CellComplex, ComplexError> {
    if m < 4 || n < 4 || m % 2 == 1 || n % 2 == 1 {
        return Err(ComplexError::Unsupported(format!(
            "polygon sizes must be even and at least 4, got {m} and {n}"
        )));
    }
    let (mi, ni) = (m as i64, n as i64);
    let antipode = |v: i64| -> i64 {
        if v < mi {
            (v + mi / 2) % mi
        } else {
            mi + (v - mi + ni / 2) % ni
        }
    };
    let canon = |s: &[i64]| -> Vec<i64> {
        let mut a = s.to_vec();
        a.sort_unstable();
        let mut b: Vec<i64> = s.iter().map(|&v| antipode(v)).collect();
        b.sort_unstable();
        a.min(b)
    };
    let first: Vec<Vec<i64>> = (0..mi)
        .map(|i| vec![i])
        .chain((0..mi).map(|i| vec![i, (i + 1) % mi]))
        .collect();
    let second: Vec<Vec<i64>> = (0..ni)
        .map(|j| vec![mi + j])
        .chain((0..ni).map(|j| vec![mi + j, mi + (j + 1) % ni]))
        .collect();
    let mut simplices: Vec<BTreeSet<Vec<i64>>> = vec![BTreeSet::new(); 4];
    for s in first.iter().chain(second.iter()) {
        simplices[s.len() - 1].insert(canon(s));
    }
    for a in &first {
        for b in &second {
            let s: Vec<i64> = a.iter().chain(b.iter()).copied().collect();
            simplices[s.len() - 1].insert(canon(&s));
        }
    }
    let simp: Vec<Vec<Vec<i64>>> = simplices.into_iter().map(|s| s.into_iter().collect()).collect();
    let index: Vec<HashMap<Vec<i64>, usize>> = simp
        .iter()
        .map(|l| l.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
        .collect();
    // The dual of a k-simplex is a (3 - k)-cell; its faces are the duals of
    // the (k + 1)-simplices containing it, counted with multiplicity.
    let mut dual_boundary: Vec<Vec<Vec<usize>>> =
        (0..4).map(|k| vec![Vec::new(); simp[3 - k].len()]).collect();
    for k in 1..=3usize {
        for (t, s) in simp[k].iter().enumerate() {
            for drop in 0..s.len() {
                let f: Vec<i64> = s
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                let fi = index[k - 1][&canon(&f)];
                dual_boundary[3 - (k - 1)][fi].push(t);
            }
        }
    }
    let labels: Vec<Vec<Vec<i64>>> = (0..4).map(|k| simp[3 - k].clone()).collect();
    CellComplex::new(labels, dual_boundary)
}

/// Real projective 3-space with eight top cells.
pub fn build_rp3() -> CellComplex {
    build_rp3_join(8, 8).expect("fixed parameters")
}
