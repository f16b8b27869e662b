use std::collections::HashMap;

use itertools::Itertools;

use super::{CellComplex, Subcomplex};
use crate::gf2::BitVector;

/// A dimension-preserving permutation of the cells of a complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellPermutation {
    maps: Vec<Vec<usize>>,
}

impl CellPermutation {
    pub fn new(maps: Vec<Vec<usize>>) -> Self {
        Self { maps }
    }

    pub fn image(&self, k: usize, i: usize) -> usize {
        self.maps[k][i]
    }

    pub fn map_mask(&self, k: usize, mask: &BitVector) -> BitVector {
        BitVector::from_indices(mask.len(), mask.iter_ones().map(|i| self.maps[k][i]))
    }

    pub fn apply(&self, s: &Subcomplex) -> Subcomplex {
        Subcomplex::from_masks_unchecked(
            (0..self.maps.len())
                .map(|k| self.map_mask(k, s.mask(k)))
                .collect(),
        )
    }

    pub fn top_map(&self) -> &[usize] {
        self.maps.last().expect("at least one dimension")
    }
}

/// All vertex permutations of a simplicial complex (as built by
/// `from_facets`) that carry simplices to simplices, as cell permutations.
pub fn simplicial_symmetries(x: &CellComplex) -> Vec<CellPermutation> {
    let vertices: Vec<i64> = x.labels(0).iter().map(|l| l[0]).collect();
    let index: Vec<HashMap<Vec<i64>, usize>> = (0..=x.dim())
        .map(|k| {
            x.labels(k)
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, l)| (l, i))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for perm in vertices.iter().copied().permutations(vertices.len()) {
        let sigma: HashMap<i64, i64> = vertices.iter().copied().zip(perm).collect();
        let mut maps = Vec::with_capacity(x.dim() + 1);
        let mut ok = true;
        for k in 0..=x.dim() {
            let mut map = Vec::with_capacity(x.count(k));
            for l in x.labels(k) {
                let mut img: Vec<i64> = l.iter().map(|v| sigma[v]).collect();
                img.sort_unstable();
                match index[k].get(&img) {
                    Some(&j) => map.push(j),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            maps.push(map);
        }
        if ok {
            out.push(CellPermutation::new(maps));
        }
    }
    out
}
