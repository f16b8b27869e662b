use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gf2::BitVector;

/// Independent homology: dimension from ranks of explicitly built restricted
/// boundary matrices, written without the pair machinery.
fn oracle_dim(x: &CellComplex, space: &Subcomplex, rel: &Subcomplex, k: usize) -> usize {
    let live = |j: usize| -> Vec<usize> {
        (0..x.count(j))
            .filter(|&i| space.contains(j, i) && !rel.contains(j, i))
            .collect()
    };
    let rank_of = |j: usize| -> usize {
        if j == 0 || j > x.dim() {
            return 0;
        }
        let rows = live(j - 1);
        let cols = live(j);
        let m = BitMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            x.faces(j, cols[c]).contains(&rows[r])
        });
        m.rank()
    };
    live(k).len() - rank_of(k) - rank_of(k + 1)
}

fn all_builtins() -> Vec<CellComplex> {
    let mut v = vec![build_rp2(), build_s2(), build_rp3(), build_torus_grid(3).unwrap()];
    for d in 1..=4 {
        for n in 1..=3 {
            v.push(build_cube_grid(d, n).unwrap());
        }
    }
    v.push(generic_cube(2, 3).unwrap().complex);
    v.push(generic_cube(3, 2).unwrap().complex);
    v
}

#[test]
fn boundary_squared_vanishes_everywhere() {
    for x in all_builtins() {
        assert!(x.boundary_squared_is_zero());
    }
}

#[test]
fn cube_counts_and_euler() {
    let x = build_cube_grid(1, 1).unwrap();
    assert_eq!(x.counts(), vec![2, 1]);
    assert_eq!(x.euler_characteristic(), 1);
    let x = build_cube_grid(2, 2).unwrap();
    assert_eq!(x.counts(), vec![9, 12, 4]);
    for d in 1..=4 {
        for n in 1..=3 {
            let x = build_cube_grid(d, n).unwrap();
            assert_eq!(x.euler_characteristic(), 1);
            assert_eq!(x.top_count(), n.pow(d as u32));
            assert_eq!(x.face_tags().len(), 2 * d);
        }
    }
    assert!(build_cube_grid(3, 3).unwrap().boundary_squared_is_zero());
}

#[test]
fn cube_size_guard() {
    let opts = GridOptions {
        periodic: false,
        cell_cap: 100,
    };
    assert!(matches!(
        builders::build_grid(3, 5, opts),
        Err(ComplexError::TooLarge { .. })
    ));
    assert!(build_cube_grid(5, 1).is_err());
    assert!(build_cube_grid(2, 0).is_err());
}

#[test]
fn rp2_and_s2_homology() {
    let rp2 = build_rp2();
    assert_eq!(rp2.counts(), vec![6, 15, 10]);
    assert_eq!(rp2.euler_characteristic(), 1);
    let dims: Vec<usize> = (0..=2).map(|k| homology(&rp2, k).unwrap().dimension).collect();
    assert_eq!(dims, vec![1, 1, 1]);
    let s2 = build_s2();
    assert_eq!(s2.euler_characteristic(), 2);
    let dims: Vec<usize> = (0..=2).map(|k| homology(&s2, k).unwrap().dimension).collect();
    assert_eq!(dims, vec![1, 0, 1]);
    assert!(homology(&s2, 3).is_err());
}

#[test]
fn rp3_homology() {
    let rp3 = build_rp3();
    assert_eq!(rp3.top_count(), 8);
    assert_eq!(rp3.euler_characteristic(), 0);
    for k in 0..=3 {
        assert_eq!(homology(&rp3, k).unwrap().dimension, 1, "degree {k}");
    }
}

#[test]
fn torus_homology() {
    let t = build_torus_grid(3).unwrap();
    let dims: Vec<usize> = (0..=2).map(|k| homology(&t, k).unwrap().dimension).collect();
    assert_eq!(dims, vec![1, 2, 1]);
    let whole = t.whole();
    let none = Subcomplex::empty(&t);
    assert_eq!(oracle_dim(&t, &whole, &none, 1), 2);
}

#[test]
fn cube_reduced_homology_vanishes() {
    for d in 1..=4 {
        for n in 1..=3 {
            let x = build_cube_grid(d, n).unwrap();
            assert_eq!(homology(&x, 0).unwrap().dimension, 1);
            for k in 1..=d {
                assert_eq!(homology(&x, k).unwrap().dimension, 0);
            }
        }
    }
}

#[test]
fn generic_cubes_are_generic_balls() {
    for (d, n) in [(2, 1), (2, 4), (2, 6), (3, 1), (3, 3), (3, 4)] {
        let g = generic_cube(d, n).unwrap();
        let x = &g.complex;
        assert_eq!(x.euler_characteristic(), 1);
        assert!(x.boundary_squared_is_zero());
        assert_eq!(x.top_count(), n.pow(d as u32) + (n + 1).pow(d as u32));
        for k in 1..=d {
            assert_eq!(homology(x, k).unwrap().dimension, 0);
        }
        // Each outer face is itself a (d-1)-ball.
        for s in x.face_tags().values() {
            assert_eq!(subcomplex_homology(x, s, 0).unwrap().dimension, 1);
            assert_eq!(subcomplex_homology(x, s, d - 1).unwrap().dimension, 0);
        }
    }
}

#[test]
fn generic_square_tile_shapes() {
    let g = generic_cube(2, 2).unwrap();
    let x = &g.complex;
    let octagon = g.site_at(&[2, 2]).unwrap();
    let diamond = g.site_at(&[4, 4]).unwrap();
    assert_eq!(x.faces(2, octagon).len(), 8);
    assert_eq!(x.faces(2, diamond).len(), 4);
    let symmetries = site_symmetry(&g);
    assert_eq!(symmetries.len(), 8);
    assert_eq!(site_symmetry(&generic_cube(3, 1).unwrap()).len(), 48);
}

#[test]
fn closure_basics() {
    let x = build_cube_grid(2, 2).unwrap();
    assert!(x.closure(&[]).unwrap().is_empty());
    assert_eq!(x.closure(&[0, 1, 2, 3]).unwrap(), x.whole());
    assert_eq!(x.closure(&[0]).unwrap().counts(), vec![4, 4, 1]);
    assert_eq!(x.closure(&[4]), Err(ComplexError::UnknownCell(4)));
    let none = Subcomplex::empty(&x);
    assert_eq!(x.complement_closure(&none), x.whole());
    assert_eq!(x.complement_closure(&x.whole()).count(2), 0);
    assert!(x.complement_closure(&x.whole()).is_empty());
}

#[test]
fn closure_rejects_non_closed_lists() {
    let x = build_cube_grid(1, 1).unwrap();
    assert!(Subcomplex::from_cell_lists(&x, &[vec![], vec![0]]).is_err());
    assert!(Subcomplex::from_cell_lists(&x, &[vec![0, 1], vec![0]]).is_ok());
}

#[test]
fn rp2_complement_of_triangle_carries_h1() {
    let x = build_rp2();
    let none = Subcomplex::empty(&x);
    for t in 0..10 {
        let tri = x.closure(&[t]).unwrap();
        let rest = x.complement_closure(&tri);
        assert!(!induced_map_is_onto(&x, &tri, &none, 1));
        assert!(induced_map_is_onto(&x, &rest, &none, 1));
        assert_eq!(rest.union(&tri), x.whole());
    }
}

#[test]
fn relative_homology_examples() {
    let x = build_cube_grid(2, 1).unwrap();
    let pair = x.axis_faces(&[0]);
    assert_eq!(relative_homology(&x, &x.whole(), &pair, 1).unwrap().dimension, 1);
    // Brute force on the square: relative 1-cycles are edge sets whose
    // boundary lies on the pair, counted modulo the one 2-cell boundary.
    let mut cycles: u32 = 0;
    for mask in 0u32..16 {
        let mut bd = BitVector::zeros(4);
        for e in 0..4 {
            if mask >> e & 1 == 1 && !pair.contains(1, e) {
                for &v in x.faces(1, e) {
                    bd.flip(v);
                }
            }
        }
        let live_bd: Vec<usize> = bd.iter_ones().filter(|&v| !pair.contains(0, v)).collect();
        let free_edges = (0..4).all(|e| mask >> e & 1 == 0 || !pair.contains(1, e));
        if free_edges && live_bd.is_empty() {
            cycles += 1;
        }
    }
    // cycles = 2^(dim Z); one boundary generator, so dim H = dim Z - 1.
    assert_eq!(cycles.trailing_zeros() - 1, 1);
    let none = Subcomplex::empty(&x);
    for k in 0..=2 {
        assert_eq!(
            relative_homology(&x, &x.whole(), &none, k).unwrap(),
            homology(&x, k).unwrap()
        );
        assert_eq!(
            relative_homology(&x, &x.whole(), &x.whole(), k)
                .unwrap()
                .dimension,
            0
        );
    }
    let small = x.closure(&[]).unwrap();
    assert_eq!(
        relative_homology(&x, &small, &x.whole(), 1),
        Err(ComplexError::NotContained)
    );
}

#[test]
fn slab_crosses_between_top_and_bottom() {
    let x = build_cube_grid(2, 4).unwrap();
    // Cells in the column with x-index 1, all heights.
    let column: Vec<usize> = (0..x.top_count()).filter(|&t| x.label(2, t)[0] == 3).collect();
    let slab = x.closure(&column).unwrap();
    let bdry = x.axis_faces(&[1]);
    assert!(induced_map_is_onto(&x, &slab, &bdry, 1));
    let oracle = OntoOracle::new(&x, &bdry, 1).unwrap();
    assert!(oracle.is_onto(&x, &slab));
    let side_walls = x.axis_faces(&[0]);
    assert!(!induced_map_is_onto(&x, &slab, &side_walls, 1));
}

#[test]
fn rp2_exactly_one_side_of_each_piece_pair_carries_h1() {
    let x = build_rp2();
    let none = Subcomplex::empty(&x);
    let mut checked = 0;
    for mask in 1u32..(1 << 10) - 1 {
        let a_mask = BitVector::from_indices(10, (0..10).filter(|t| mask >> t & 1 == 1));
        let a = x.closure_of_mask(&a_mask);
        let b = x.complement_closure(&a);
        let regular = crate::arbiters::is_regular_surface_piece(&x, &a_mask);
        if !(regular && x.component_count(&a) == 1 && x.component_count(&b) == 1) {
            continue;
        }
        checked += 1;
        let fa = induced_map_is_onto(&x, &a, &none, 1);
        let fb = induced_map_is_onto(&x, &b, &none, 1);
        assert!(fa ^ fb, "piece {mask:b}");
    }
    assert_eq!(checked, 202);
}

#[test]
fn s2_symmetries_transitive_on_faces() {
    let x = build_s2();
    let g = simplicial_symmetries(&x);
    assert_eq!(g.len(), 48);
    let orbit: BTreeSet<usize> = g.iter().map(|p| p.image(2, 0)).collect();
    assert_eq!(orbit.len(), 8);
    assert_eq!(simplicial_symmetries(&build_rp2()).len(), 60);
}

#[test]
fn h0_matches_union_find_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for x in [
        build_cube_grid(2, 5).unwrap(),
        build_rp2(),
        generic_cube(2, 3).unwrap().complex,
    ] {
        for _ in 0..100 {
            let mask = BitVector::random(x.top_count(), &mut rng);
            let s = x.closure_of_mask(&mask);
            assert_eq!(
                subcomplex_homology(&x, &s, 0).unwrap().dimension,
                x.component_count(&s)
            );
        }
    }
}

#[test]
fn json_round_trip() {
    let x = build_cube_grid(2, 2).unwrap();
    let json = serde_json::to_string(&x.to_json()).unwrap();
    let back: ComplexJson = serde_json::from_str(&json).unwrap();
    let y = back.into_complex().unwrap();
    assert_eq!(y.to_json(), x.to_json());
    assert_eq!(x.label(0, 0), &[0, 0]);
    assert_eq!(x.label(0, 1), &[0, 2]);
}

/// Slab of cube-grid top cells whose first coordinate index lies in `cols`.
fn slab(x: &CellComplex, n: usize, cols: std::ops::Range<usize>) -> Subcomplex {
    let scale = 2 * n as i64;
    let top: Vec<usize> = (0..x.top_count())
        .filter(|&t| {
            let c = x.label(2, t)[0];
            let lo = cols.start as i64 * scale / n as i64;
            let hi = cols.end as i64 * scale / n as i64;
            c > lo && c < hi
        })
        .collect();
    x.closure(&top).unwrap()
}

#[test]
fn excision_under_refinement() {
    // Slabs occupy the same region of the square at two refinements.
    for n in [2usize, 3] {
        let coarse = build_cube_grid(2, n).unwrap();
        let fine = build_cube_grid(2, 2 * n).unwrap();
        for a in 0..n {
            for b in a + 1..=n {
                let sc = slab(&coarse, n, a..b);
                let sf = slab(&fine, 2 * n, 2 * a..2 * b);
                for tags in [vec![0usize], vec![1]] {
                    let rc = coarse.axis_faces(&tags).intersection(&sc);
                    let rf = fine.axis_faces(&tags).intersection(&sf);
                    assert_eq!(
                        relative_homology(&coarse, &sc, &rc, 1).unwrap().dimension,
                        relative_homology(&fine, &sf, &rf, 1).unwrap().dimension
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_closed_and_lattice(seed in any::<u64>(), which in 0usize..4) {
        let x = [build_rp2(), build_cube_grid(2, 3).unwrap(), build_rp3(), generic_cube(2, 2).unwrap().complex][which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = x.closure_of_mask(&BitVector::random(x.top_count(), &mut rng));
        let b = x.closure_of_mask(&BitVector::random(x.top_count(), &mut rng));
        prop_assert!(a.is_closed(&x));
        prop_assert!(a.union(&b).is_closed(&x));
        prop_assert!(a.intersection(&b).is_closed(&x));
        prop_assert_eq!(a.union(&x.complement_closure(&a)), x.whole());
    }

    #[test]
    fn homology_matches_rank_oracle(seed in any::<u64>(), which in 0usize..4) {
        let x = [build_rp2(), build_cube_grid(2, 3).unwrap(), build_rp3(), generic_cube(2, 2).unwrap().complex][which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = x.closure_of_mask(&BitVector::random(x.top_count(), &mut rng));
        let a = x.closure_of_mask(&BitVector::random(x.top_count(), &mut rng)).intersection(&s);
        for k in 0..=x.dim() {
            let h = relative_homology(&x, &s, &a, k).unwrap();
            prop_assert_eq!(h.dimension, oracle_dim(&x, &s, &a, k));
        }
    }

    #[test]
    fn onto_routes_agree(seed in any::<u64>(), which in 0usize..4) {
        let x = [build_rp2(), build_cube_grid(2, 3).unwrap(), build_rp3(), generic_cube(3, 1).unwrap().complex][which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = x.closure_of_mask(&BitVector::random(x.top_count(), &mut rng));
        let bdry = if x.face_tags().is_empty() {
            Subcomplex::empty(&x)
        } else {
            let axes: Vec<usize> = (0..x.dim()).filter(|_| rng.random_bool(0.5)).collect();
            x.axis_faces(&axes)
        };
        for k in 0..=x.dim() {
            let oracle = OntoOracle::new(&x, &bdry, k).unwrap();
            prop_assert_eq!(oracle.is_onto(&x, &s), induced_map_is_onto(&x, &s, &bdry, k));
        }
    }
}
