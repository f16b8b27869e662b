//! Poisson–Voronoi decompositions of the cube `[-1, 1]^d` and crossing
//! experiments on their random colorings.
//!
//! Cells are computed exactly by clipping the cube with bisector
//! half-spaces. Two cells are adjacent when they share an edge (in the
//! plane) or a face (in space) of positive measure.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{region_complex, ComplexError, FaceTag, RegionComplex, RegionId, Side};
use crate::seeding;

/// Edges and faces shorter or smaller than this are treated as absent.
const MEASURE_EPS: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 1000;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("dimension {0} is not supported; use 2 or 3")]
    UnsupportedDimension(usize),
    #[error("intensity {intensity} is below the minimum {min}")]
    IntensityTooLow { intensity: f64, min: f64 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("need at least one color")]
    NoColors,
    #[error("{k} colors but only {d} axes to cross along")]
    TooManyColors { k: usize, d: usize },
    #[error("axis {axis} out of range for dimension {d}")]
    AxisOutOfRange { axis: usize, d: usize },
    #[error("center {0} lies outside the cube")]
    CenterOutside(usize),
    #[error("no acceptable sample after {0} attempts")]
    Exhausted(usize),
    #[error("sample is degenerate: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// One clipping constraint of a cell: a neighbor's bisector or a cube face.
type Wall = RegionId;

fn face_tag(axis: usize, upper: bool) -> FaceTag {
    FaceTag::new(axis, if upper { Side::Upper } else { Side::Lower })
}

fn face_slot(tag: FaceTag) -> usize {
    2 * tag.axis + usize::from(tag.side == Side::Upper)
}

/// A convex polygon; `walls[k]` labels the edge from vertex `k` to `k + 1`.
#[derive(Clone, Debug)]
struct Polygon {
    points: Vec<[f64; 2]>,
    walls: Vec<Wall>,
}

impl Polygon {
    fn square() -> Self {
        Polygon {
            points: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
            walls: vec![
                Wall::Outer(face_tag(1, false)),
                Wall::Outer(face_tag(0, true)),
                Wall::Outer(face_tag(1, true)),
                Wall::Outer(face_tag(0, false)),
            ],
        }
    }

    /// Keeps `n · x <= b`; the new edge is labeled `wall`.
    fn clip(&mut self, n: [f64; 2], b: f64, wall: Wall) -> bool {
        let side: Vec<f64> = self
            .points
            .iter()
            .map(|p| n[0] * p[0] + n[1] * p[1] - b)
            .collect();
        if side.iter().all(|&s| s <= 0.0) {
            return false;
        }
        let len = self.points.len();
        let mut points = Vec::with_capacity(len + 1);
        let mut walls = Vec::with_capacity(len + 1);
        for k in 0..len {
            let (p, q) = (self.points[k], self.points[(k + 1) % len]);
            let (sp, sq) = (side[k], side[(k + 1) % len]);
            let cut = || {
                let t = sp / (sp - sq);
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            };
            match (sp <= 0.0, sq <= 0.0) {
                (true, true) => {
                    points.push(p);
                    walls.push(self.walls[k]);
                }
                (true, false) => {
                    points.push(p);
                    walls.push(self.walls[k]);
                    points.push(cut());
                    walls.push(wall);
                }
                (false, true) => {
                    points.push(cut());
                    walls.push(self.walls[k]);
                }
                (false, false) => {}
            }
        }
        self.points = points;
        self.walls = walls;
        true
    }

    fn radius_from(&self, c: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    fn walls_with_measure(&self) -> Vec<(Wall, f64)> {
        let len = self.points.len();
        (0..len)
            .map(|k| {
                let (p, q) = (self.points[k], self.points[(k + 1) % len]);
                (
                    self.walls[k],
                    ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt(),
                )
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Face3 {
    wall: Wall,
    points: Vec<[f64; 3]>,
}

/// A convex polyhedron stored face by face.
#[derive(Clone, Debug)]
struct Polyhedron {
    faces: Vec<Face3>,
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn polygon_area3(points: &[[f64; 3]]) -> f64 {
    let mut acc = [0.0; 3];
    for k in 0..points.len() {
        let c = cross3(points[k], points[(k + 1) % points.len()]);
        acc = [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]];
    }
    0.5 * dot3(acc, acc).sqrt()
}

impl Polyhedron {
    fn cube() -> Self {
        let mut faces = Vec::new();
        for axis in 0..3 {
            for upper in [false, true] {
                let v = if upper { 1.0 } else { -1.0 };
                let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
                let points = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                    .iter()
                    .map(|&(a, b)| {
                        let mut p = [0.0; 3];
                        p[axis] = v;
                        p[u] = a;
                        p[w] = b;
                        p
                    })
                    .collect();
                faces.push(Face3 {
                    wall: Wall::Outer(face_tag(axis, upper)),
                    points,
                });
            }
        }
        Polyhedron { faces }
    }

    fn clip(&mut self, n: [f64; 3], b: f64, wall: Wall) -> bool {
        if self
            .faces
            .iter()
            .all(|f| f.points.iter().all(|&p| dot3(n, p) - b <= 0.0))
        {
            return false;
        }
        let mut cuts: Vec<[f64; 3]> = Vec::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for f in &self.faces {
            let side: Vec<f64> = f.points.iter().map(|&p| dot3(n, p) - b).collect();
            let len = f.points.len();
            let mut points = Vec::with_capacity(len + 1);
            for k in 0..len {
                let (p, q) = (f.points[k], f.points[(k + 1) % len]);
                let (sp, sq) = (side[k], side[(k + 1) % len]);
                if sp <= 0.0 {
                    points.push(p);
                }
                if (sp <= 0.0) != (sq <= 0.0) {
                    let t = sp / (sp - sq);
                    let c = [
                        p[0] + t * (q[0] - p[0]),
                        p[1] + t * (q[1] - p[1]),
                        p[2] + t * (q[2] - p[2]),
                    ];
                    points.push(c);
                    cuts.push(c);
                }
            }
            if points.len() >= 3 {
                faces.push(Face3 { wall: f.wall, points });
            }
        }
        let mut unique: Vec<[f64; 3]> = Vec::new();
        for c in cuts {
            if !unique.iter().any(|u| dot3(sub3(*u, c), sub3(*u, c)) < 1e-24) {
                unique.push(c);
            }
        }
        if unique.len() >= 3 {
            let k = unique.len() as f64;
            let centre = unique.iter().fold([0.0; 3], |a, p| {
                [a[0] + p[0] / k, a[1] + p[1] / k, a[2] + p[2] / k]
            });
            let e1 = {
                let v = sub3(unique[0], centre);
                let l = dot3(v, v).sqrt();
                [v[0] / l, v[1] / l, v[2] / l]
            };
            let e2 = cross3(n, e1);
            unique.sort_by(|a, b| {
                let (da, db) = (sub3(*a, centre), sub3(*b, centre));
                let ta = dot3(da, e2).atan2(dot3(da, e1));
                let tb = dot3(db, e2).atan2(dot3(db, e1));
                ta.total_cmp(&tb)
            });
            faces.push(Face3 { wall, points: unique });
        }
        self.faces = faces;
        true
    }

    fn radius_from(&self, c: &[f64]) -> f64 {
        self.faces
            .iter()
            .flat_map(|f| f.points.iter())
            .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    fn walls_with_measure(&self) -> Vec<(Wall, f64)> {
        self.faces
            .iter()
            .map(|f| (f.wall, polygon_area3(&f.points)))
            .collect()
    }
}

#[derive(Clone, Debug)]
enum CellShape {
    Plane(Polygon),
    Space(Polyhedron),
}

impl CellShape {
    fn walls_with_measure(&self) -> Vec<(Wall, f64)> {
        match self {
            CellShape::Plane(p) => p.walls_with_measure(),
            CellShape::Space(p) => p.walls_with_measure(),
        }
    }
}

fn voronoi_cell(d: usize, centers: &[Vec<f64>], i: usize) -> CellShape {
    let c = &centers[i];
    let mut order: Vec<(f64, usize)> = centers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| {
            (
                p.iter()
                    .zip(c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
                j,
            )
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let bisector = |j: usize| {
        let t = &centers[j];
        let n: Vec<f64> = t.iter().zip(c).map(|(a, b)| 2.0 * (a - b)).collect();
        let b = t.iter().map(|x| x * x).sum::<f64>() - c.iter().map(|x| x * x).sum::<f64>();
        (n, b)
    };
    if d == 2 {
        let mut poly = Polygon::square();
        let mut radius = poly.radius_from(c);
        for &(dist, j) in &order {
            if dist > 2.0 * radius {
                break;
            }
            let (n, b) = bisector(j);
            if poly.clip([n[0], n[1]], b, Wall::Site(j)) {
                radius = poly.radius_from(c);
            }
        }
        CellShape::Plane(poly)
    } else {
        let mut poly = Polyhedron::cube();
        let mut radius = poly.radius_from(c);
        for &(dist, j) in &order {
            if dist > 2.0 * radius {
                break;
            }
            let (n, b) = bisector(j);
            if poly.clip([n[0], n[1], n[2]], b, Wall::Site(j)) {
                radius = poly.radius_from(c);
            }
        }
        CellShape::Space(poly)
    }
}

/// A Voronoi decomposition of `[-1, 1]^d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VoronoiDecomposition {
    pub d: usize,
    pub centers: Vec<Vec<f64>>,
    /// Pairs `(i, j)` with `i < j` sharing a codimension-one face.
    pub adjacency: Vec<(usize, usize)>,
    /// `face_touch[i][2 * axis + side]`, side 1 being the upper face.
    pub face_touch: Vec<Vec<bool>>,
    #[serde(skip)]
    shapes: Vec<Option<CellShape>>,
}

impl PartialEq for VoronoiDecomposition {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.centers == other.centers
            && self.adjacency == other.adjacency
            && self.face_touch == other.face_touch
    }
}

impl VoronoiDecomposition {
    /// Exact decomposition for the given centers. Fails when the two sides
    /// of a shared face disagree on whether it has positive measure.
    pub fn from_centers(d: usize, centers: Vec<Vec<f64>>) -> Result<Self, PercolationError> {
        if !(2..=3).contains(&d) {
            return Err(PercolationError::UnsupportedDimension(d));
        }
        if centers.is_empty() {
            return Err(PercolationError::Degenerate("no centers".into()));
        }
        for (i, c) in centers.iter().enumerate() {
            if c.len() != d || c.iter().any(|x| !(-1.0..=1.0).contains(x)) {
                return Err(PercolationError::CenterOutside(i));
            }
        }
        let shapes: Vec<CellShape> = (0..centers.len()).map(|i| voronoi_cell(d, &centers, i)).collect();
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut face_touch = vec![vec![false; 2 * d]; centers.len()];
        for (i, s) in shapes.iter().enumerate() {
            for (wall, measure) in s.walls_with_measure() {
                if measure <= MEASURE_EPS {
                    continue;
                }
                match wall {
                    Wall::Site(j) => {
                        seen.insert((i, j));
                    }
                    Wall::Outer(tag) => face_touch[i][face_slot(tag)] = true,
                }
            }
        }
        let mut adjacency = Vec::new();
        for &(i, j) in &seen {
            if !seen.contains(&(j, i)) {
                return Err(PercolationError::Degenerate(format!(
                    "cells {i} and {j} disagree on their face"
                )));
            }
            if i < j {
                adjacency.push((i, j));
            }
        }
        for slot in 0..2 * d {
            if !face_touch.iter().any(|t| t[slot]) {
                return Err(PercolationError::Degenerate(format!(
                    "cube face {slot} is untouched"
                )));
            }
        }
        Ok(VoronoiDecomposition {
            d,
            centers,
            adjacency,
            face_touch,
            shapes: shapes.into_iter().map(Some).collect(),
        })
    }

    pub fn cell_count(&self) -> usize {
        self.centers.len()
    }

    pub fn touches(&self, cell: usize, axis: usize, upper: bool) -> bool {
        self.face_touch[cell][2 * axis + usize::from(upper)]
    }

    /// The planar decomposition as a cell complex with tagged outer faces;
    /// top cell `i` is Voronoi cell `i`.
    pub fn polygon_complex(&self) -> Result<RegionComplex, PercolationError> {
        if self.d != 2 {
            return Err(PercolationError::UnsupportedDimension(self.d));
        }
        let mut vertices: BTreeSet<BTreeSet<RegionId>> = BTreeSet::new();
        for (i, s) in self.shapes.iter().enumerate() {
            let Some(CellShape::Plane(p)) = s else {
                return Err(PercolationError::Degenerate("geometry was not kept".into()));
            };
            let len = p.walls.len();
            for k in 0..len {
                let before = p.walls[(k + len - 1) % len];
                let set: BTreeSet<RegionId> = [RegionId::Site(i), before, p.walls[k]].into_iter().collect();
                if set.len() != 3 {
                    return Err(PercolationError::Degenerate(format!("cell {i} repeats a wall")));
                }
                vertices.insert(set);
            }
        }
        let list: Vec<BTreeSet<RegionId>> = vertices.into_iter().collect();
        Ok(region_complex(2, self.cell_count(), &list)?)
    }
}

fn poisson_count<R: Rng + ?Sized>(intensity: f64, rng: &mut R) -> usize {
    let dist = Poisson::new(intensity).expect("positive intensity");
    dist.sample(rng) as usize
}

pub fn min_intensity(d: usize) -> f64 {
    2.0 * d as f64
}

fn check_intensity(d: usize, intensity: f64) -> Result<(), PercolationError> {
    if !(2..=3).contains(&d) {
        return Err(PercolationError::UnsupportedDimension(d));
    }
    // The negated form also rejects NaN.
    if !(intensity >= min_intensity(d)) {
        return Err(PercolationError::IntensityTooLow {
            intensity,
            min: min_intensity(d),
        });
    }
    Ok(())
}

/// Draws Poisson centers until the decomposition is acceptable; returns it
/// with the number of rejected draws.
pub fn sample_decomposition_with<R: Rng + ?Sized>(
    d: usize,
    intensity: f64,
    rng: &mut R,
) -> Result<(VoronoiDecomposition, usize), PercolationError> {
    check_intensity(d, intensity)?;
    for attempt in 0..MAX_ATTEMPTS {
        let n = poisson_count(intensity, rng);
        let centers: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        if n == 0 {
            continue;
        }
        match VoronoiDecomposition::from_centers(d, centers) {
            Ok(v) => return Ok((v, attempt)),
            Err(PercolationError::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(PercolationError::Exhausted(MAX_ATTEMPTS))
}

/// The decomposition drawn from the stream of `seed`.
pub fn sample_decomposition(
    d: usize,
    intensity: f64,
    seed: u64,
) -> Result<VoronoiDecomposition, PercolationError> {
    let mut rng = seeding::stream(seed, 0);
    Ok(sample_decomposition_with(d, intensity, &mut rng)?.0)
}

/// Colors `0..k`, one per cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub k: usize,
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn class_size(&self, a: usize) -> usize {
        self.colors.iter().filter(|&&c| c as usize == a).count()
    }
}

pub fn color_uniform_with<R: Rng + ?Sized>(
    v: &VoronoiDecomposition,
    k: usize,
    rng: &mut R,
) -> Result<Coloring, PercolationError> {
    if k == 0 {
        return Err(PercolationError::NoColors);
    }
    let colors = (0..v.cell_count())
        .map(|_| rng.random_range(0..k) as u8)
        .collect();
    Ok(Coloring { k, colors })
}

pub fn color_uniform(v: &VoronoiDecomposition, k: usize, seed: u64) -> Result<Coloring, PercolationError> {
    let mut rng = seeding::stream(seed, 1);
    color_uniform_with(v, k, &mut rng)
}

/// Whether a chain of adjacent cells of color `a` joins the two faces
/// normal to `axis`.
pub fn crosses(
    v: &VoronoiDecomposition,
    c: &Coloring,
    a: usize,
    axis: usize,
) -> Result<bool, PercolationError> {
    if axis >= v.d {
        return Err(PercolationError::AxisOutOfRange { axis, d: v.d });
    }
    let n = v.cell_count();
    let (lo, hi) = (n, n + 1);
    let mut uf = UnionFind::<usize>::new(n + 2);
    let ok = |i: usize| c.colors[i] as usize == a;
    for &(i, j) in &v.adjacency {
        if ok(i) && ok(j) {
            uf.union(i, j);
        }
    }
    for i in (0..n).filter(|&i| ok(i)) {
        if v.touches(i, axis, false) {
            uf.union(i, lo);
        }
        if v.touches(i, axis, true) {
            uf.union(i, hi);
        }
    }
    Ok(uf.equiv(lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisMode {
    /// Color `a` must cross along axis `a`.
    Own,
    /// Color `a` may cross along any axis.
    Any,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub intensity: f64,
    pub samples: usize,
    pub k: usize,
    pub seed: u64,
    pub axis_mode: AxisMode,
}

impl ExperimentConfig {
    pub fn new(d: usize, intensity: f64, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            d,
            intensity,
            samples,
            k: d,
            seed,
            axis_mode: AxisMode::Own,
        }
    }

    pub fn validate(&self) -> Result<(), PercolationError> {
        check_intensity(self.d, self.intensity)?;
        if self.samples < MIN_SAMPLES {
            return Err(PercolationError::TooFewSamples {
                got: self.samples,
                min: MIN_SAMPLES,
            });
        }
        if self.k == 0 {
            return Err(PercolationError::NoColors);
        }
        if self.axis_mode == AxisMode::Own && self.k > self.d {
            return Err(PercolationError::TooManyColors { k: self.k, d: self.d });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub cells: usize,
    pub rejected: usize,
    /// `crossed[a]` for each color.
    pub crossed: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: usize,
    pub decomposition: VoronoiDecomposition,
    pub coloring: Coloring,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub config: ExperimentConfig,
    /// The color whose crossing frequency is bounded.
    pub black: usize,
    pub crossings: usize,
    pub frequency: f64,
    /// Wilson score interval at three standard deviations.
    pub wilson: (f64, f64),
    /// Binomial standard deviation at success probability `1/d`.
    pub sigma: f64,
    pub bound: f64,
    pub bound_pass: bool,
    pub dichotomy_violations: usize,
    pub rejected: usize,
    pub samples: Vec<SampleOutcome>,
    pub counterexamples: Vec<Counterexample>,
}

pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Runs one sample of an experiment from its own stream.
pub fn run_sample(
    cfg: &ExperimentConfig,
    index: usize,
) -> Result<(SampleOutcome, Option<Counterexample>), PercolationError> {
    let mut rng = seeding::stream(cfg.seed, index as u64);
    let (v, rejected) = sample_decomposition_with(cfg.d, cfg.intensity, &mut rng)?;
    let coloring = color_uniform_with(&v, cfg.k, &mut rng)?;
    let mut crossed = Vec::with_capacity(cfg.k);
    for a in 0..cfg.k {
        let hit = match cfg.axis_mode {
            AxisMode::Own => crosses(&v, &coloring, a, a)?,
            AxisMode::Any => {
                let mut any = false;
                for axis in 0..cfg.d {
                    any |= crosses(&v, &coloring, a, axis)?;
                }
                any
            }
        };
        crossed.push(hit);
    }
    let outcome = SampleOutcome {
        index,
        cells: v.cell_count(),
        rejected,
        crossed,
    };
    let broken = cfg.k == cfg.d && cfg.axis_mode == AxisMode::Own && !outcome.crossed.iter().any(|&c| c);
    let counterexample = broken.then_some(Counterexample {
        index,
        decomposition: v,
        coloring,
    });
    Ok((outcome, counterexample))
}

/// The crossing frequency of color 0 against the bound `1/d`, and the
/// count of samples in which no color crosses along its own axis.
pub fn crossing_bound_experiment(cfg: &ExperimentConfig) -> Result<CrossingReport, PercolationError> {
    cfg.validate()?;
    let results: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| run_sample(cfg, i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut samples = Vec::with_capacity(results.len());
    let mut counterexamples = Vec::new();
    for (o, c) in results {
        samples.push(o);
        counterexamples.extend(c);
    }
    let black = 0;
    let crossings = samples.iter().filter(|s| s.crossed[black]).count();
    let n = samples.len();
    let frequency = crossings as f64 / n as f64;
    let p = 1.0 / cfg.d as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let bound = p - 3.0 * sigma;
    Ok(CrossingReport {
        config: cfg.clone(),
        black,
        crossings,
        frequency,
        wilson: wilson_interval(crossings, n, 3.0),
        sigma,
        bound,
        bound_pass: frequency >= bound,
        dichotomy_violations: counterexamples.len(),
        rejected: samples.iter().map(|s| s.rejected).sum(),
        samples,
        counterexamples,
    })
}

impl CrossingReport {
    /// One row per sample: index, cell count, one bit per color.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,cells");
        for a in 0..self.config.k {
            let _ = write!(out, ",cross_{a}");
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{},{}", s.index, s.cells);
            for &c in &s.crossed {
                let _ = write!(out, ",{}", u8::from(c));
            }
            out.push('\n');
        }
        out
    }
}
