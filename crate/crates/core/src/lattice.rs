//! Scatterer configurations, their corridors, and the corridor-sum constants
//! that govern the free-path tails.
//!
//! A configuration is a lattice (generators given as the columns of a basis
//! matrix) with a ball of radius `r` at every lattice point. A corridor is an
//! open strip (planar case) or slab (cubic 3D case) bounded by two adjacent
//! lattice lines/planes that no scatterer enters. For a primitive direction
//! `u` the planar lattice lines parallel to `B u` are `V / |B u|` apart, so the
//! corridor exists iff that spacing exceeds the scatterer diameter.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("dimension 3 supports only the cubic lattice (identity basis)")]
    NonCubicBasis,
    #[error("basis must have {expected} generators of {expected} components each")]
    MalformedBasis { expected: usize },
    #[error("scatterer radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("degenerate basis (determinant {det:e})")]
    DegenerateBasis { det: f64 },
    #[error("expected a {expected}-dimensional lattice, got dimension {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("overlapping scatterers: diameter {diameter} >= shortest lattice vector {shortest}")]
    OverlappingScatterers { diameter: f64, shortest: f64 },
}

/// Lattice of identical spherical scatterers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    /// `basis[i]` is the i-th generator, i.e. the i-th column of the basis matrix.
    pub basis: Vec<Vec<f64>>,
    pub radius: f64,
}

impl LatticeSpec {
    /// The cubic lattice `Z^d`.
    pub fn cubic(dimension: usize, radius: f64) -> Self {
        let basis = (0..dimension)
            .map(|i| (0..dimension).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        LatticeSpec { dimension, basis, radius }
    }

    /// Planar lattice spanned by two generators.
    pub fn planar(first: [f64; 2], second: [f64; 2], radius: f64) -> Self {
        LatticeSpec { dimension: 2, basis: vec![first.to_vec(), second.to_vec()], radius }
    }

    /// The triangular lattice with unit spacing used throughout the tests.
    pub fn triangular(radius: f64) -> Self {
        Self::planar([1.0, 0.0], [0.5, 0.8660254], radius)
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        LatticeSpec { radius, ..self.clone() }
    }

    /// Entry `(row, col)` of the basis matrix.
    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.basis[col][row]
    }

    pub fn determinant(&self) -> f64 {
        let b = |r, c| self.entry(r, c);
        match self.dimension {
            2 => b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0),
            3 => {
                b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                    - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                    + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
            }
            _ => f64::NAN,
        }
    }

    /// Volume of the fundamental cell.
    pub fn covolume(&self) -> f64 {
        self.determinant().abs()
    }

    /// Physical vector `B u`.
    pub fn apply(&self, u: &[i64]) -> Vec<f64> {
        (0..self.dimension)
            .map(|row| (0..self.dimension).map(|col| self.entry(row, col) * u[col] as f64).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dimension).all(|i| {
            (0..self.dimension).all(|j| self.entry(i, j) == if i == j { 1.0 } else { 0.0 })
        })
    }

    /// Volume of the free region in one fundamental cell.
    pub fn free_volume(&self) -> f64 {
        let r = self.radius;
        match self.dimension {
            2 => self.covolume() - PI * r * r,
            _ => self.covolume() - 4.0 / 3.0 * PI * r * r * r,
        }
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        match self.dimension {
            2 => {
                let (b1, b2, _) = gauss_reduce(self.generator2(0), self.generator2(1));
                norm(&b1).min(norm(&b2))
            }
            _ => (0..self.dimension).map(|i| norm(&self.basis[i])).fold(f64::INFINITY, f64::min),
        }
    }

    pub(crate) fn generator2(&self, i: usize) -> [f64; 2] {
        [self.basis[i][0], self.basis[i][1]]
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let d = self.dimension;
        if d != 2 && d != 3 {
            return Err(LatticeError::UnsupportedDimension(d));
        }
        if self.basis.len() != d
            || self.basis.iter().any(|g| g.len() != d || g.iter().any(|x| !x.is_finite()))
        {
            return Err(LatticeError::MalformedBasis { expected: d });
        }
        if d == 3 && !self.is_identity() {
            return Err(LatticeError::NonCubicBasis);
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(LatticeError::InvalidRadius(self.radius));
        }
        let det = self.determinant();
        let scale: f64 = self.basis.iter().map(|g| norm(g)).product();
        if !(det.abs() > 1e-12 * scale) {
            return Err(LatticeError::DegenerateBasis { det });
        }
        let shortest = self.shortest_vector();
        let diameter = 2.0 * self.radius;
        if diameter >= shortest {
            return Err(LatticeError::OverlappingScatterers { diameter, shortest });
        }
        Ok(())
    }
}

/// Returns `spec` unchanged if it describes a valid configuration.
pub fn validate_lattice(spec: LatticeSpec) -> Result<LatticeSpec, LatticeError> {
    spec.validate()?;
    Ok(spec)
}

/// Relative slack in the reduction conditions, so bases that are reduced up
/// to rounding (e.g. a triangular basis given to 7 digits) are left alone.
const REDUCTION_SLACK: f64 = 1e-6;

/// Lagrange–Gauss reduction of a planar basis.
///
/// Returns the reduced generators `(c1, c2)` with `|c1| <= |c2|` and
/// `|c1 . c2| <= |c1|^2 / 2`, together with the unimodular integer matrix `U`
/// (columns) such that `[c1 c2] = [b1 b2] U`.
pub fn gauss_reduce(b1: [f64; 2], b2: [f64; 2]) -> ([f64; 2], [f64; 2], [[i64; 2]; 2]) {
    let (mut a, mut b) = (b1, b2);
    // Columns of U: coefficients of a and b in the original generators.
    let (mut ua, mut ub) = ([1i64, 0], [0i64, 1]);
    for _ in 0..256 {
        if dot(&a, &a) > dot(&b, &b) * (1.0 + REDUCTION_SLACK) {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut ua, &mut ub);
        }
        let m = dot(&a, &b) / dot(&a, &a);
        if m.abs() <= 0.5 + REDUCTION_SLACK {
            break;
        }
        let mu = m.round();
        let k = mu as i64;
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        ub = [ub[0] - k * ua[0], ub[1] - k * ua[1]];
    }
    (a, b, [ua, ub])
}

/// One corridor: a strip (d = 2) or slab (d = 3) of positive width free of scatterers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    /// Primitive integer vector: the strip axis in lattice coordinates (d = 2)
    /// or the slab normal (d = 3). Canonical sign: first nonzero entry positive.
    pub direction: Vec<i64>,
    /// Unit physical vector: normalized `B u` (d = 2) or normalized normal (d = 3).
    pub physical_direction: Vec<f64>,
    /// Distance between adjacent bounding lattice lines/planes.
    pub spacing: f64,
    /// `spacing - 2 r`.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpectrum {
    pub lattice: LatticeSpec,
    /// Sorted by descending width, then lexicographic direction.
    pub corridors: Vec<Corridor>,
}

impl CorridorSpectrum {
    pub fn directions(&self) -> Vec<Vec<i64>> {
        self.corridors.iter().map(|c| c.direction.clone()).collect()
    }

    pub fn horizon(&self) -> Horizon {
        classify_horizon(self)
    }

    /// Writes the corridor CSV: `u1,u2[,u3],spacing,width`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let axes: Vec<String> = (1..=self.lattice.dimension).map(|i| format!("u{i}")).collect();
        write!(out, "{},spacing,width\n", axes.join(","))?;
        for c in &self.corridors {
            let dir: Vec<String> = c.direction.iter().map(|x| x.to_string()).collect();
            write!(out, "{},{},{}\n", dir.join(","), sig17(c.spacing), sig17(c.width))?;
        }
        Ok(())
    }
}

/// 17 significant digits, round-trip exact.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite,
    Infinite,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Horizon::Finite => "Finite",
            Horizon::Infinite => "Infinite",
        })
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_primitive(u: &[i64]) -> bool {
    u.iter().fold(0, |g, &x| gcd(g, x)) == 1
}

fn is_canonical(u: &[i64]) -> bool {
    u.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Spectral norm of the inverse of a planar basis matrix.
fn inverse_operator_norm2(spec: &LatticeSpec) -> f64 {
    let det = spec.determinant();
    // inverse = adj / det; singular values of adj equal those of B.
    let fro2: f64 = spec.basis.iter().flatten().map(|x| x * x).sum();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    let sigma_max2 = 0.5 * (fro2 + disc.sqrt());
    sigma_max2.sqrt() / det.abs()
}

fn order_corridors(a: &Corridor, b: &Corridor) -> Ordering {
    b.width.total_cmp(&a.width).then_with(|| a.direction.cmp(&b.direction))
}

/// Lists every corridor of the configuration once (up to sign).
pub fn enumerate_corridors(spec: &LatticeSpec) -> Result<CorridorSpectrum, LatticeError> {
    spec.validate()?;
    let diameter = 2.0 * spec.radius;
    let mut corridors = Vec::new();
    match spec.dimension {
        2 => {
            let covolume = spec.covolume();
            let bound = covolume / diameter;
            let n = (inverse_operator_norm2(spec) * bound).ceil() as i64 + 1;
            for p in -n..=n {
                for q in -n..=n {
                    let u = [p, q];
                    if !is_canonical(&u) || !is_primitive(&u) {
                        continue;
                    }
                    let image = spec.apply(&u);
                    let length = norm(&image);
                    let spacing = covolume / length;
                    let width = spacing - diameter;
                    if width > 0.0 {
                        corridors.push(Corridor {
                            direction: u.to_vec(),
                            physical_direction: image.iter().map(|x| x / length).collect(),
                            spacing,
                            width,
                        });
                    }
                }
            }
        }
        _ => {
            let n = (1.0 / diameter).ceil() as i64 + 1;
            for a in -n..=n {
                for b in -n..=n {
                    for c in -n..=n {
                        let m = [a, b, c];
                        if !is_canonical(&m) || !is_primitive(&m) {
                            continue;
                        }
                        let length = ((a * a + b * b + c * c) as f64).sqrt();
                        let spacing = 1.0 / length;
                        let width = spacing - diameter;
                        if width > 0.0 {
                            corridors.push(Corridor {
                                direction: m.to_vec(),
                                physical_direction: m.iter().map(|&x| x as f64 / length).collect(),
                                spacing,
                                width,
                            });
                        }
                    }
                }
            }
        }
    }
    corridors.sort_by(order_corridors);
    Ok(CorridorSpectrum { lattice: spec.clone(), corridors })
}

pub fn classify_horizon(spectrum: &CorridorSpectrum) -> Horizon {
    if spectrum.corridors.is_empty() {
        Horizon::Finite
    } else {
        Horizon::Infinite
    }
}

/// Mean free path under the collision measure:
/// `(V - pi r^2) / (2 r)` in the plane, `(1 - 4/3 pi r^3) / (pi r^2)` for `Z^3`.
pub fn santalo_mean_free_path(spec: &LatticeSpec) -> f64 {
    let r = spec.radius;
    match spec.dimension {
        2 => spec.free_volume() / (2.0 * r),
        _ => spec.free_volume() / (PI * r * r),
    }
}

/// Corridor-sum constants of the free-path tails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    /// Coefficient of `1/t` in `P(free path > t)` under the flow measure.
    pub c_flow: f64,
    /// Coefficient of `1/t^2` under the collision measure.
    pub c_map: f64,
    pub mean_free_path: f64,
    /// Unnormalized corridor sum determining the superdiffusive covariance.
    pub superdiffusion_raw: Vec<Vec<f64>>,
    pub horizon: Horizon,
    /// Set for slab sums in d = 3, where shallow trajectories can thread
    /// through gaps of the bounding sphere layers; the constant is then a
    /// leading-order value only.
    pub first_order: bool,
}

impl TailConstants {
    /// Multiplies both tail constants by `factor` (test hook for negative controls).
    pub fn scaled(&self, factor: f64) -> Self {
        TailConstants { c_flow: self.c_flow * factor, c_map: self.c_map * factor, ..self.clone() }
    }
}

/// Evaluates the corridor sums.
///
/// Planar, covolume `V`, free area `|Q| = V - pi r^2`:
/// * `c_flow = sum w^2 V / (pi s |Q|)`: each corridor contributes `2 w^2 / t`
///   per unit length (two travel directions, two boundary sides), over a
///   length `V / s` per cell, normalized by the phase volume `2 pi |Q|`;
/// * `c_map = tau * c_flow` (size biasing between the two measures);
/// * `M = sum w^2 |B u| u_hat u_hat^T / V`.
///
/// Cubic 3D, free volume `|Q| = 1 - 4/3 pi r^3`: a slab with normal `m`
/// contributes `2 pi w^2 / t` per unit area over an area `|m|` per cell,
/// normalized by `4 pi |Q|`, so `c_flow = sum w^2 |m| / (2 |Q|)`, and
/// `M = sum w^2 |m| (I - n n^T)` (displacement lies in the slab plane).
pub fn tail_constants(spectrum: &CorridorSpectrum) -> TailConstants {
    let spec = &spectrum.lattice;
    let d = spec.dimension;
    let tau = santalo_mean_free_path(spec);
    let horizon = classify_horizon(spectrum);
    let mut c_flow = 0.0;
    let mut m = vec![vec![0.0; d]; d];
    let free = spec.free_volume();
    for c in &spectrum.corridors {
        let w2 = c.width * c.width;
        let e = &c.physical_direction;
        if d == 2 {
            let covolume = spec.covolume();
            c_flow += w2 * covolume / (PI * c.spacing * free);
            let weight = w2 * (covolume / c.spacing) / covolume;
            for i in 0..d {
                for j in i..d {
                    m[i][j] += weight * e[i] * e[j];
                }
            }
        } else {
            let normal_len = 1.0 / c.spacing;
            c_flow += w2 * normal_len / (2.0 * free);
            let weight = w2 * normal_len;
            for i in 0..d {
                for j in i..d {
                    let proj = if i == j { 1.0 } else { 0.0 } - e[i] * e[j];
                    m[i][j] += weight * proj;
                }
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    TailConstants {
        c_flow,
        c_map: tau * c_flow,
        mean_free_path: tau,
        superdiffusion_raw: m,
        horizon,
        first_order: d == 3 && horizon == Horizon::Infinite,
    }
}
