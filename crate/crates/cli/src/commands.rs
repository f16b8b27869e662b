use std::cmp::Ordering;
use std::path::Path;

use rand::Rng;
use serde_json::{json, Value};

use arbiterlab::arbiters::{
    arbiter_h_rp2, check_poincare_axioms, check_power_axioms, enumerate_consistent_arbiters,
    homological_table, ArbiterError, PieceFamily, PowerAxiomConfig, SearchOptions, SymmetryMode,
};
use arbiterlab::complexes::{
    build_cube_grid, build_rp2, build_rp3, build_s2, build_torus_grid, generic_cube, homology,
    simplicial_symmetries, ComplexError,
};
use arbiterlab::dyadic::{
    check_greedy_consistency, distinguish_rays, lex_compare, lex_compare_ray, partial_arbiter, DyadicError,
    ModelPiece, Multiindex, Ray, MAX_CONSISTENCY_DEPTH,
};
use arbiterlab::milnor::{
    bing_double, essentiality_certificate, magnus_expand, mu_bar, quotient_nonvanishing, DoublingPattern,
    GroupWord, LinkPresentation, MilnorError, RelationSystem,
};
use arbiterlab::percolation::{crossing_bound_experiment, AxisMode, ExperimentConfig, PercolationError};
use arbiterlab::report::AxiomReport;
use arbiterlab::{seeding, BitMatrix, BitVector, CellComplex};

use crate::{
    ArbiterCmd, AxisModeArg, ComplexArgs, ComplexCmd, ComplexKind, DyadicCmd, Failure, Gf2Args, Gf2Cmd,
    LinkSource, MilnorCmd, PercolateArgs, Report, Surface, SymmetryArg, SystemArg, Top,
};

type Outcome = Result<Report, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn report(pass: bool, result: Value) -> Outcome {
    Ok(Report {
        pass,
        result,
        csv: None,
    })
}

fn all_passed(reports: &[AxiomReport]) -> bool {
    reports.iter().all(AxiomReport::passed)
}

/// Checks every argument that can be checked without computing.
pub fn validate(cmd: &Top) -> Result<(), Failure> {
    match cmd {
        Top::Gf2(Gf2Cmd::Selftest(a)) => {
            if a.trials == 0 || a.max_size == 0 {
                return Err(usage("trials and max-size must be positive"));
            }
        }
        Top::Complexes(ComplexCmd::Build(a) | ComplexCmd::Homology(a)) => {
            build_complex(a)?;
        }
        Top::Arbiters(ArbiterCmd::Cube { d, n, samples, .. }) => {
            if !(2..=3).contains(d) || *n == 0 || *samples == 0 {
                return Err(usage("cube needs d in 2..=3, n >= 1 and samples >= 1"));
            }
        }
        Top::Arbiters(_) => {}
        Top::Dyadic(c) => match c {
            DyadicCmd::Compare { left, right } => {
                left.parse::<Multiindex>().map_err(usage)?;
                parse_word_or_ray(right)?;
            }
            DyadicCmd::Consistency { ray, depth } => {
                ray.parse::<Ray>().map_err(usage)?;
                if *depth > MAX_CONSISTENCY_DEPTH {
                    return Err(usage(DyadicError::DepthTooLarge {
                        depth: *depth,
                        cap: MAX_CONSISTENCY_DEPTH,
                    }));
                }
            }
            DyadicCmd::Distinguish { first, second } => {
                let (a, b) = (
                    first.parse::<Ray>().map_err(usage)?,
                    second.parse::<Ray>().map_err(usage)?,
                );
                if a == b {
                    return Err(usage(DyadicError::SameRay(a.to_string())));
                }
            }
        },
        Top::Milnor(c) => match c {
            MilnorCmd::Expand { word, q } => {
                word.parse::<GroupWord>().map_err(usage)?;
                if *q == 0 {
                    return Err(usage(MilnorError::ZeroTruncation));
                }
            }
            MilnorCmd::Mu { link, .. } | MilnorCmd::Double { link, .. } => {
                load_link(link)?;
            }
            MilnorCmd::Certify { pattern, .. } => {
                pattern.parse::<DoublingPattern>().map_err(usage)?;
            }
            MilnorCmd::Quotient { target, q, .. } => {
                if let Some(t) = target {
                    t.parse::<GroupWord>().map_err(usage)?;
                }
                if *q < 4 {
                    return Err(usage(MilnorError::TruncationTooSmall { q: *q, needed: 4 }));
                }
            }
        },
        Top::Percolate(a) => experiment(a).validate().map_err(usage)?,
    }
    Ok(())
}

pub fn run(cmd: &Top) -> Outcome {
    validate(cmd)?;
    match cmd {
        Top::Gf2(Gf2Cmd::Selftest(a)) => gf2_selftest(a),
        Top::Complexes(ComplexCmd::Build(a)) => {
            let x = build_complex(a)?;
            report(
                true,
                json!({ "counts": x.counts(), "euler": x.euler_characteristic(), "complex": x.to_json() }),
            )
        }
        Top::Complexes(ComplexCmd::Homology(a)) => {
            let x = build_complex(a)?;
            let betti: Vec<usize> = (0..=x.dim())
                .map(|k| homology(&x, k).map(|h| h.dimension))
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Internal(e.to_string()))?;
            let ok = x.boundary_squared_is_zero();
            report(
                ok,
                json!({ "counts": x.counts(), "betti": betti, "euler": x.euler_characteristic(), "boundary_squared_zero": ok }),
            )
        }
        Top::Arbiters(c) => arbiters(c),
        Top::Dyadic(c) => dyadic(c),
        Top::Milnor(c) => milnor(c),
        Top::Percolate(a) => percolate(a),
    }
}

fn gf2_selftest(a: &Gf2Args) -> Outcome {
    let mut failures = Vec::new();
    for trial in 0..a.trials {
        let mut rng = seeding::stream(a.seed, trial as u64);
        let rows = rng.random_range(1..=a.max_size);
        let cols = rng.random_range(1..=a.max_size);
        let m = BitMatrix::random(rows, cols, &mut rng);
        let rank = m.rank();
        let kernel = m.kernel_basis();
        let mut ok = rank + kernel.len() == cols && rank == m.transpose().rank();
        ok &= kernel
            .iter()
            .all(|v| m.mul_vec(v).map(|w| w.is_zero()).unwrap_or(false));
        let x = BitVector::random(cols, &mut rng);
        ok &= m.mul_vec(&x).and_then(|y| m.in_column_space(&y)).unwrap_or(false);
        if !ok {
            failures.push(json!({ "trial": trial, "rows": rows, "cols": cols, "rank": rank }));
        }
    }
    report(
        failures.is_empty(),
        json!({ "trials": a.trials, "max_size": a.max_size, "seed": a.seed, "failures": failures }),
    )
}

fn build_complex(a: &ComplexArgs) -> Result<CellComplex, Failure> {
    let built: Result<CellComplex, ComplexError> = match a.kind {
        ComplexKind::Rp2 => Ok(build_rp2()),
        ComplexKind::S2 => Ok(build_s2()),
        ComplexKind::Rp3 => Ok(build_rp3()),
        ComplexKind::Torus => build_torus_grid(a.n),
        ComplexKind::Grid => build_cube_grid(a.d, a.n),
        ComplexKind::Generic => generic_cube(a.d, a.n).map(|g| g.complex),
    };
    built.map_err(usage)
}

fn arbiter_error(e: ArbiterError) -> Failure {
    match e {
        ArbiterError::FamilyTooLarge { .. } | ArbiterError::UnsupportedDimension(_) => usage(e),
        other => Failure::Internal(other.to_string()),
    }
}

fn arbiters(c: &ArbiterCmd) -> Outcome {
    match c {
        ArbiterCmd::Rp2 {
            enumerate,
            no_shelling,
        } => {
            let x = build_rp2();
            let fam = PieceFamily::connected_surface_pieces(&x).map_err(arbiter_error)?;
            let table = homological_table(&x, &fam);
            let full = x.whole();
            let mut pairs = 0;
            let mut broken = Vec::new();
            for (i, m) in fam.members().iter().enumerate() {
                let rest = x.complement_closure(&x.closure_of_mask(m));
                let Some(j) = fam.position(rest.top_mask(&x)) else {
                    continue;
                };
                pairs += 1;
                if table[i] + table[j] != 1 {
                    broken.push(json!({ "piece": m.iter_ones().collect::<Vec<_>>() }));
                }
            }
            let whole = arbiter_h_rp2(&x, &full).bit();
            let mut result = json!({
                "pieces": fam.len(),
                "complementary_pairs": pairs,
                "duality_violations": broken,
                "whole": whole,
            });
            let mut pass = broken.is_empty() && whole == 1;
            if *enumerate {
                let opts = SearchOptions {
                    shelling_moves: !no_shelling,
                };
                let found = enumerate_consistent_arbiters(&x, &fam, &simplicial_symmetries(&x), opts)
                    .map_err(arbiter_error)?;
                let matches: Vec<bool> = found.tables.iter().map(|t| *t == table).collect();
                pass &= found.tables.len() == 1 && matches[0];
                result["enumeration"] = json!({
                    "count": found.tables.len(),
                    "classes": found.classes,
                    "homological": matches,
                    "tables": found.tables,
                });
            }
            report(pass, result)
        }
        ArbiterCmd::Cube {
            d,
            n,
            samples,
            seed,
            symmetry,
            enlargements,
        } => {
            let mut cfg = PowerAxiomConfig::new(*d, *n, *samples, *seed);
            cfg.enlargements = *enlargements;
            cfg.symmetry = match symmetry {
                SymmetryArg::Full => SymmetryMode::Full,
                SymmetryArg::Sampled => SymmetryMode::Sampled,
            };
            let reports = check_power_axioms(&cfg).map_err(arbiter_error)?;
            report(all_passed(&reports), json!({ "config": cfg, "axioms": reports }))
        }
        ArbiterCmd::Rp3 => {
            let x = build_rp3();
            let fam = PieceFamily::filtered(&x, |_| true).map_err(arbiter_error)?;
            let reports = check_poincare_axioms(&x, fam.members(), &|_| true).map_err(arbiter_error)?;
            report(
                all_passed(&reports),
                json!({ "pieces": fam.len(), "axioms": reports }),
            )
        }
        ArbiterCmd::Enumerate { surface, no_shelling } => {
            let x = match surface {
                Surface::Rp2 => build_rp2(),
                Surface::S2 => build_s2(),
            };
            let fam = PieceFamily::connected_surface_pieces(&x).map_err(arbiter_error)?;
            let opts = SearchOptions {
                shelling_moves: !no_shelling,
            };
            let found = enumerate_consistent_arbiters(&x, &fam, &simplicial_symmetries(&x), opts)
                .map_err(arbiter_error)?;
            let expected = match surface {
                Surface::Rp2 => 1,
                Surface::S2 => 0,
            };
            report(found.tables.len() == expected, json!(found))
        }
    }
}

enum Operand {
    Word(Multiindex),
    Ray(Ray),
}

fn parse_word_or_ray(s: &str) -> Result<Operand, Failure> {
    if s.contains(':') {
        Ok(Operand::Ray(s.parse().map_err(usage)?))
    } else {
        Ok(Operand::Word(s.parse().map_err(usage)?))
    }
}

fn order_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn dyadic(c: &DyadicCmd) -> Outcome {
    match c {
        DyadicCmd::Compare { left, right } => {
            let i: Multiindex = left.parse().map_err(usage)?;
            let (order, kind) = match parse_word_or_ray(right)? {
                Operand::Word(j) => (lex_compare(&i, &j), "word"),
                Operand::Ray(r) => (lex_compare_ray(&i, &r), "ray"),
            };
            report(
                true,
                json!({ "left": i.to_string(), "right": right, "right_kind": kind, "order": order_name(order) }),
            )
        }
        DyadicCmd::Consistency { ray, depth } => {
            let r: Ray = ray.parse().map_err(usage)?;
            let reports = check_greedy_consistency(&r, *depth).map_err(|e| match e {
                DyadicError::ConeConflict { .. } => Failure::Internal(e.to_string()),
                other => usage(other),
            })?;
            report(
                all_passed(&reports),
                json!({ "ray": r.to_string(), "depth": depth, "checks": reports }),
            )
        }
        DyadicCmd::Distinguish { first, second } => {
            let (r, s): (Ray, Ray) = (first.parse().map_err(usage)?, second.parse().map_err(usage)?);
            let w = distinguish_rays(&r, &s).map_err(usage)?;
            let piece = ModelPiece::a(w.clone());
            let a = partial_arbiter(&r, &piece).map_err(|e| Failure::Internal(e.to_string()))?;
            let b = partial_arbiter(&s, &piece).map_err(|e| Failure::Internal(e.to_string()))?;
            report(
                a != b,
                json!({
                    "first": r.to_string(),
                    "second": s.to_string(),
                    "piece": piece.to_string(),
                    "values": [a.bit(), b.bit()],
                }),
            )
        }
    }
}

fn milnor_error(e: MilnorError) -> Failure {
    match e {
        MilnorError::NoCertificate { .. } | MilnorError::Overflow(_) => Failure::Internal(e.to_string()),
        other => usage(other),
    }
}

fn read_link(path: &Path) -> Result<LinkPresentation, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    text.parse().map_err(usage)
}

fn load_link(src: &LinkSource) -> Result<LinkPresentation, Failure> {
    match (&src.pattern, &src.link_file) {
        (_, Some(path)) => read_link(path),
        (Some(p), None) => {
            let pattern: DoublingPattern = p.parse().map_err(usage)?;
            Ok(pattern.build().map_err(usage)?.link)
        }
        (None, None) => Ok(LinkPresentation::hopf()),
    }
}

fn link_json(l: &LinkPresentation) -> Value {
    json!(l
        .components
        .iter()
        .map(|c| json!({ "meridian": c.meridian, "longitude": c.longitude.to_string() }))
        .collect::<Vec<_>>())
}

fn milnor(c: &MilnorCmd) -> Outcome {
    match c {
        MilnorCmd::Expand { word, q } => {
            let w: GroupWord = word.parse().map_err(usage)?;
            let s = magnus_expand(&w, *q).map_err(milnor_error)?;
            let terms: Vec<Value> = s
                .terms()
                .map(|(m, c)| json!({ "monomial": m, "coefficient": c.to_string() }))
                .collect();
            report(
                true,
                json!({ "word": w.to_string(), "q": q, "series": s.to_string(), "terms": terms }),
            )
        }
        MilnorCmd::Mu { link, seq, q } => {
            let l = load_link(link)?;
            let q = q.unwrap_or(seq.len().saturating_sub(1));
            let v = mu_bar(&l, seq, q).map_err(milnor_error)?;
            report(true, json!({ "sequence": seq, "q": q, "value": v.to_string() }))
        }
        MilnorCmd::Double { link, component } => {
            let l = load_link(link)?;
            let out = bing_double(&l, *component).map_err(milnor_error)?;
            report(
                true,
                json!({ "component": component, "link": link_json(&out), "text": out.to_string() }),
            )
        }
        MilnorCmd::Certify { pattern, q } => {
            let p: DoublingPattern = pattern.parse().map_err(usage)?;
            let q = q.unwrap_or(p.component_count().saturating_sub(1).max(1));
            let cert = essentiality_certificate(&p, q).map_err(milnor_error)?;
            report(
                cert.value != 0,
                json!({ "pattern": p.to_string(), "certificate": cert }),
            )
        }
        MilnorCmd::Quotient {
            system,
            commute,
            target,
            q,
        } => {
            let mut rel = match system {
                SystemArg::BingCell => RelationSystem::bing_cell_pair(),
                SystemArg::Empty => RelationSystem::default(),
            };
            for &(i, j) in commute {
                rel.add_commuting(i, j);
            }
            let target = match target {
                Some(t) => t.parse().map_err(usage)?,
                None => RelationSystem::bing_cell_target(),
            };
            let v = quotient_nonvanishing(&rel, &target, *q).map_err(milnor_error)?;
            report(
                v.nonzero,
                json!({
                    "target": target.to_string(),
                    "commuting": rel.commuting,
                    "verdict": v,
                }),
            )
        }
    }
}

fn experiment(a: &PercolateArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(a.d, a.intensity, a.samples, a.seed);
    cfg.k = a.k.unwrap_or(a.d);
    cfg.axis_mode = match a.axis_mode {
        AxisModeArg::Own => AxisMode::Own,
        AxisModeArg::Any => AxisMode::Any,
    };
    cfg
}

fn percolate(a: &PercolateArgs) -> Outcome {
    let cfg = experiment(a);
    let r = crossing_bound_experiment(&cfg).map_err(|e| match e {
        PercolationError::Exhausted { .. } | PercolationError::Complex(_) => Failure::Internal(e.to_string()),
        other => usage(other),
    })?;
    let pass = r.bound_pass && r.dichotomy_violations == 0;
    let csv = r.to_csv();
    let result = serde_json::to_value(&r).map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(Report {
        pass,
        result,
        csv: Some(csv),
    })
}
