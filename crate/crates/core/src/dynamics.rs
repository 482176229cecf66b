//! Exact billiard dynamics among the periodic scatterers.
//!
//! A free flight walks the lattice cells pierced by the ray (per-axis next
//! boundary times, smallest first) and tests the scatterers sitting at the
//! corners of every entered cell. Positions are carried as an integer cell
//! plus a fractional offset so long flights keep full precision.
//!
//! All geometry for planar lattices is done in the Gauss-reduced basis: with
//! a reduced basis and `2r` below the shortest vector, a scatterer only
//! reaches into the cells that have its center as a corner.

use thiserror::Error;

use crate::lattice::{gauss_reduce, LatticeError, LatticeSpec};
use crate::real::Real;

/// Roots at or below this ray parameter belong to the scatterer being left.
pub const EXIT_EPSILON: f64 = 1e-9;
/// Below this discriminant `r^2 - d_perp^2` the ray is treated as grazing.
pub const GRAZING_EPSILON: f64 = 1e-14;
/// Cell boundaries closer than this along the ray are crossed together.
pub const TIE_EPSILON: f64 = 1e-15;
/// Tolerated penetration of a starting point into a scatterer.
pub const INSIDE_TOLERANCE: f64 = 1e-12;
/// Default flight cap.
pub const DEFAULT_CAP: f64 = 1e7;
/// Velocity renormalization period along trajectories.
pub const RENORMALIZE_EVERY: u64 = 1 << 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("start point lies inside a scatterer (distance {distance:e} to its center)")]
    StartInsideScatterer { distance: f64 },
    #[error("velocity points out of the scatterer (v.n = {dot:e})")]
    OutgoingVelocity { dot: f64 },
}

pub type Vector<const D: usize, T> = [T; D];

#[inline(always)]
fn dot<const D: usize, T: Real>(a: &[T; D], b: &[T; D]) -> T {
    let mut s = a[0] * b[0];
    for k in 1..D {
        s += a[k] * b[k];
    }
    s
}

#[inline(always)]
fn norm<const D: usize, T: Real>(a: &[T; D]) -> T {
    dot(a, a).sqrt()
}

/// Prepared geometry of a scatterer configuration.
#[derive(Clone, Debug)]
pub struct Lattice<const D: usize, T: Real = f64> {
    /// `basis[row][col]`, columns are the working generators.
    basis: [[T; D]; D],
    inverse: [[T; D]; D],
    radius: T,
    radius2: T,
    inner2: T,
    /// `f64` copies for candidate screening.
    basis_approx: [[f64; D]; D],
    radius_approx: f64,
    spec: LatticeSpec,
}

impl<const D: usize, T: Real> Lattice<D, T> {
    pub fn new(spec: &LatticeSpec) -> Result<Self, LatticeError> {
        spec.validate()?;
        if spec.dimension != D {
            return Err(LatticeError::DimensionMismatch { expected: D, got: spec.dimension });
        }
        let mut cols: Vec<Vec<f64>> = spec.basis.clone();
        if D == 2 {
            let (c1, c2, _) = gauss_reduce(spec.generator2(0), spec.generator2(1));
            cols = vec![c1.to_vec(), c2.to_vec()];
        }
        let mut basis = [[T::zero(); D]; D];
        for (row, line) in basis.iter_mut().enumerate() {
            for (col, x) in line.iter_mut().enumerate() {
                *x = T::from_f64(cols[col][row]);
            }
        }
        let inverse = invert(&basis);
        let radius = T::from_f64(spec.radius);
        let inner = T::from_f64(spec.radius - INSIDE_TOLERANCE);
        Ok(Lattice {
            basis,
            inverse,
            radius,
            radius2: radius * radius,
            inner2: inner * inner,
            basis_approx: basis.map(|row| row.map(|x| x.to_f64())),
            radius_approx: spec.radius,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Working basis (`[row][col]`); cell indices refer to its generators.
    pub fn basis(&self) -> &[[T; D]; D] {
        &self.basis
    }

    #[inline(always)]
    pub fn to_physical(&self, a: &[T; D]) -> [T; D] {
        mat_vec(&self.basis, a)
    }

    #[inline(always)]
    pub fn to_lattice(&self, x: &[T; D]) -> [T; D] {
        mat_vec(&self.inverse, x)
    }

    /// Physical position of lattice point `cell`.
    pub fn point(&self, cell: &[i64; D]) -> [T; D] {
        self.to_physical(&cell.map(T::from_i64))
    }

    /// Physical position of a state, `B (cell + frac)`.
    pub fn position(&self, state: &ParticleState<D, T>) -> [T; D] {
        let mut a = state.frac;
        for k in 0..D {
            a[k] = a[k] + T::from_i64(state.cell[k]);
        }
        self.to_physical(&a)
    }

    /// Physical vector from `from` to `to`, computed from integer cell
    /// differences so it stays exact for distant states.
    pub fn displacement(&self, from: &ParticleState<D, T>, to: &ParticleState<D, T>) -> [T; D] {
        let mut a = [T::zero(); D];
        for k in 0..D {
            a[k] = T::from_i64(to.cell[k] - from.cell[k]) + (to.frac[k] - from.frac[k]);
        }
        self.to_physical(&a)
    }

    /// State at physical offset `offset` from lattice point `center`.
    pub fn state_near(&self, center: [i64; D], offset: &[T; D], velocity: [T; D]) -> ParticleState<D, T> {
        let a = self.to_lattice(offset);
        let mut cell = center;
        let mut frac = a;
        for k in 0..D {
            let f = a[k].floor();
            cell[k] += f.to_i64();
            frac[k] = a[k] - f;
            if frac[k] >= T::one() {
                frac[k] = T::zero();
                cell[k] += 1;
            }
        }
        ParticleState { cell, frac, velocity }
    }
}

fn mat_vec<const D: usize, T: Real>(m: &[[T; D]; D], a: &[T; D]) -> [T; D] {
    let mut out = [T::zero(); D];
    for (row, o) in out.iter_mut().enumerate() {
        *o = dot(&m[row], a);
    }
    out
}

fn invert<const D: usize, T: Real>(m: &[[T; D]; D]) -> [[T; D]; D] {
    let mut inv = [[T::zero(); D]; D];
    match D {
        2 => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            inv[0][0] = m[1][1] / det;
            inv[0][1] = -m[0][1] / det;
            inv[1][0] = -m[1][0] / det;
            inv[1][1] = m[0][0] / det;
        }
        3 => {
            let c = |r: usize, s: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
                m[r1][s1] * m[r2][s2] - m[r1][s2] * m[r2][s1]
            };
            let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
            for r in 0..3 {
                for s in 0..3 {
                    inv[s][r] = c(r, s) / det;
                }
            }
        }
        _ => unreachable!("dimension checked by LatticeSpec::validate"),
    }
    inv
}

/// Phase point: integer lattice cell, position inside it in lattice
/// coordinates (each component in `[0, 1)`), and unit physical velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState<const D: usize, T: Real = f64> {
    pub cell: [i64; D],
    pub frac: [T; D],
    pub velocity: [T; D],
}

impl<const D: usize, T: Real> ParticleState<D, T> {
    /// Same state with every component converted to another scalar type.
    pub fn convert<U: Real>(&self) -> ParticleState<D, U> {
        ParticleState {
            cell: self.cell,
            frac: self.frac.map(|x| U::from_f64(x.to_f64())),
            velocity: self.velocity.map(|x| U::from_f64(x.to_f64())),
        }
    }

    /// Rescales the velocity to unit length in the state's own precision.
    pub fn normalize_velocity(&mut self) {
        let n = norm(&self.velocity);
        self.velocity = self.velocity.map(|x| x / n);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlightResult<const D: usize, T: Real = f64> {
    /// Euclidean free path, `cap` if censored.
    pub length: T,
    pub censored: bool,
    /// Lattice point (working-basis coordinates) of the scatterer hit.
    pub hit_center: Option<[i64; D]>,
    /// Physical end point of the flight.
    pub hit_point: [T; D],
    /// Vector from the scatterer center to the hit point (zero if censored).
    pub contact: [T; D],
    /// Outward unit normal at the hit point (zero if censored).
    pub normal: [T; D],
    pub cells_traversed: u64,
}

/// First positive intersection parameter of the ray `t -> v t` with the
/// sphere centered at `l` (relative to the ray origin).
#[inline(always)]
fn ray_sphere<const D: usize, T: Real>(l: &[T; D], v: &[T; D], radius2: T) -> Option<T> {
    let l2 = dot(l, l);
    let tca = dot(l, v);
    if tca <= T::zero() && l2 >= radius2 {
        return None;
    }
    let mut perp = *l;
    for k in 0..D {
        perp[k] = perp[k] - tca * v[k];
    }
    let disc = radius2 - dot(&perp, &perp);
    if disc < T::from_f64(GRAZING_EPSILON) {
        return None;
    }
    let root = disc.sqrt();
    // t^2 - 2 tca t + (l2 - r^2) = 0; take the large-magnitude root first.
    let q = if tca >= T::zero() { tca + root } else { tca - root };
    let other = (l2 - radius2) / q;
    let (near, far) = if other < q { (other, q) } else { (q, other) };
    let exit = T::from_f64(EXIT_EPSILON);
    if near > exit {
        Some(near)
    } else if far > exit {
        Some(far)
    } else {
        None
    }
}

/// Margin of the `f64` pre-screen; far above its round-off at the flight
/// lengths where the screen is used.
const SCREEN_MARGIN: f64 = 1e-6;

/// Cheap conservative test: `false` only if the sphere at lattice offset
/// `delta` certainly neither contains the origin nor meets the ray.
#[inline]
fn may_matter<const D: usize>(basis: &[[f64; D]; D], delta: &[f64; D], v: &[f64; D], radius: f64) -> bool {
    let mut l = [0.0; D];
    for (row, x) in l.iter_mut().enumerate() {
        *x = (0..D).map(|col| basis[row][col] * delta[col]).sum();
    }
    let l2: f64 = l.iter().map(|x| x * x).sum();
    let tca: f64 = l.iter().zip(v).map(|(a, b)| a * b).sum();
    let r2 = radius * radius;
    if l2 < r2 + SCREEN_MARGIN {
        return true;
    }
    if tca < 0.0 {
        return false;
    }
    l2 - tca * tca < r2 + SCREEN_MARGIN
}

/// Index offsets of the `2^D` corners of a unit cell.
#[inline(always)]
fn corner<const D: usize>(mask: usize) -> [i64; D] {
    let mut c = [0i64; D];
    for (k, x) in c.iter_mut().enumerate() {
        *x = ((mask >> k) & 1) as i64;
    }
    c
}

/// Free flight from `state` until the first scatterer or `cap`.
pub fn free_flight<const D: usize, T: Real>(
    lattice: &Lattice<D, T>,
    state: &ParticleState<D, T>,
    cap: T,
) -> Result<FlightResult<D, T>, DynamicsError> {
    let v = state.velocity;
    let frac = state.frac;
    let dir = lattice.to_lattice(&v);

    let mut step = [0i64; D];
    let mut inv = [T::zero(); D];
    let mut next = [T::infinity(); D];
    for k in 0..D {
        if dir[k] > T::zero() {
            step[k] = 1;
            inv[k] = T::one() / dir[k];
            next[k] = (T::one() - frac[k]) * inv[k];
        } else if dir[k] < T::zero() {
            step[k] = -1;
            inv[k] = T::one() / dir[k];
            next[k] = (T::zero() - frac[k]) * inv[k];
        }
    }

    let (frac_approx, v_approx) = if T::SCREEN {
        (frac.map(|x| x.to_f64()), v.map(|x| x.to_f64()))
    } else {
        ([0.0; D], [0.0; D])
    };

    let mut rel = [0i64; D];
    let mut best = T::infinity();
    let mut best_corner = [0i64; D];
    let mut cells = 1u64;
    loop {
        for mask in 0..(1usize << D) {
            let z = {
                let c = corner::<D>(mask);
                let mut z = rel;
                for k in 0..D {
                    z[k] += c[k];
                }
                z
            };
            if T::SCREEN {
                let mut approx = [0.0; D];
                for k in 0..D {
                    approx[k] = z[k] as f64 - frac_approx[k];
                }
                if !may_matter(&lattice.basis_approx, &approx, &v_approx, lattice.radius_approx) {
                    continue;
                }
            }
            let mut delta = [T::zero(); D];
            for k in 0..D {
                delta[k] = T::from_i64(z[k]) - frac[k];
            }
            let l = lattice.to_physical(&delta);
            if cells == 1 {
                let l2 = dot(&l, &l);
                if l2 < lattice.inner2 {
                    return Err(DynamicsError::StartInsideScatterer { distance: l2.sqrt().to_f64() });
                }
            }
            if let Some(t) = ray_sphere(&l, &v, lattice.radius2) {
                if t < best {
                    best = t;
                    best_corner = z;
                }
            }
        }
        let mut exit = next[0];
        for k in 1..D {
            exit = exit.min(next[k]);
        }
        if exit >= best || exit >= cap {
            break;
        }
        let tie = exit + T::from_f64(TIE_EPSILON);
        for k in 0..D {
            if next[k] <= tie {
                rel[k] += step[k];
                let boundary = if step[k] > 0 { rel[k] + 1 } else { rel[k] };
                next[k] = (T::from_i64(boundary) - frac[k]) * inv[k];
            }
        }
        cells += 1;
    }

    if best <= cap {
        let mut delta = [T::zero(); D];
        for k in 0..D {
            delta[k] = T::from_i64(best_corner[k]) - frac[k];
        }
        let l = lattice.to_physical(&delta);
        let mut contact = [T::zero(); D];
        for k in 0..D {
            contact[k] = best * v[k] - l[k];
        }
        let len = norm(&contact);
        let normal = contact.map(|x| x / len);
        let mut center = state.cell;
        for k in 0..D {
            center[k] += best_corner[k];
        }
        let mut hit_point = lattice.point(&center);
        for k in 0..D {
            hit_point[k] += contact[k];
        }
        Ok(FlightResult {
            length: best,
            censored: false,
            hit_center: Some(center),
            hit_point,
            contact,
            normal,
            cells_traversed: cells,
        })
    } else {
        let mut end = lattice.position(state);
        for k in 0..D {
            end[k] += cap * v[k];
        }
        Ok(FlightResult {
            length: cap,
            censored: true,
            hit_center: None,
            hit_point: end,
            contact: [T::zero(); D],
            normal: [T::zero(); D],
            cells_traversed: cells,
        })
    }
}

/// Specular reflection `v - 2 (v.n) n` of an incoming velocity.
pub fn reflect<const D: usize, T: Real>(velocity: &[T; D], normal: &[T; D]) -> Result<[T; D], DynamicsError> {
    let vn = dot(velocity, normal);
    if vn > T::from_f64(1e-12) {
        return Err(DynamicsError::OutgoingVelocity { dot: vn.to_f64() });
    }
    let mut out = *velocity;
    let twice = vn + vn;
    for k in 0..D {
        out[k] = out[k] - twice * normal[k];
    }
    Ok(out)
}

/// State reached by flying `length` along the velocity without collision.
fn advance<const D: usize, T: Real>(lattice: &Lattice<D, T>, state: &ParticleState<D, T>, length: T) -> ParticleState<D, T> {
    let dir = lattice.to_lattice(&state.velocity);
    let mut out = *state;
    for k in 0..D {
        let a = state.frac[k] + length * dir[k];
        let f = a.floor();
        out.cell[k] += f.to_i64();
        out.frac[k] = a - f;
        if out.frac[k] >= T::one() {
            out.frac[k] = T::zero();
            out.cell[k] += 1;
        }
    }
    out
}

/// One step of the billiard map: free flight, then specular reflection with
/// the new position pushed off the scatterer along the normal.
pub fn collision_step<const D: usize, T: Real>(
    lattice: &Lattice<D, T>,
    state: &ParticleState<D, T>,
    cap: T,
) -> Result<(FlightResult<D, T>, ParticleState<D, T>), DynamicsError> {
    let flight = free_flight(lattice, state, cap)?;
    let next = match flight.hit_center {
        None => advance(lattice, state, cap),
        Some(center) => {
            let velocity = reflect(&state.velocity, &flight.normal)?;
            let lift = lattice.radius + T::from_f64(T::PUSH);
            let offset = flight.normal.map(|x| x * lift);
            lattice.state_near(center, &offset, velocity)
        }
    };
    Ok((flight, next))
}

/// Iterates the billiard map while tracking displacement from the start.
#[derive(Clone, Debug)]
pub struct Walker<'a, const D: usize, T: Real = f64> {
    lattice: &'a Lattice<D, T>,
    start: ParticleState<D, T>,
    state: ParticleState<D, T>,
    cap: T,
    steps: u64,
    path_length: T,
    censored_steps: u64,
    last_incoming: [T; D],
}

impl<'a, const D: usize, T: Real> Walker<'a, D, T> {
    pub fn new(lattice: &'a Lattice<D, T>, start: ParticleState<D, T>, cap: T) -> Self {
        Walker {
            lattice,
            start,
            state: start,
            cap,
            steps: 0,
            path_length: T::zero(),
            censored_steps: 0,
            last_incoming: start.velocity,
        }
    }

    /// Performs one collision step (a censored flight counts as a step).
    pub fn step(&mut self) -> Result<FlightResult<D, T>, DynamicsError> {
        let (flight, mut next) = collision_step(self.lattice, &self.state, self.cap)?;
        self.last_incoming = self.state.velocity;
        self.steps += 1;
        self.path_length += flight.length;
        if flight.censored {
            self.censored_steps += 1;
        }
        if self.steps.is_multiple_of(RENORMALIZE_EVERY) {
            let n = norm(&next.velocity);
            next.velocity = next.velocity.map(|x| x / n);
        }
        self.state = next;
        Ok(flight)
    }

    pub fn state(&self) -> &ParticleState<D, T> {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn path_length(&self) -> T {
        self.path_length
    }

    pub fn censored_steps(&self) -> u64 {
        self.censored_steps
    }

    /// Physical displacement of the current state from the start.
    pub fn displacement(&self) -> [T; D] {
        self.lattice.displacement(&self.start, &self.state)
    }

    /// Velocity just before the most recent reflection.
    pub fn last_incoming(&self) -> [T; D] {
        self.last_incoming
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<const D: usize, T: Real = f64> {
    /// Displacement from the start after each collision.
    pub displacements: Vec<[T; D]>,
    /// Cumulative path length after each collision.
    pub path_lengths: Vec<T>,
    pub final_state: ParticleState<D, T>,
    pub censored_steps: u64,
}

/// Runs `n_collisions` billiard-map steps and records the displacement series.
pub fn trajectory<const D: usize, T: Real>(
    lattice: &Lattice<D, T>,
    start: &ParticleState<D, T>,
    n_collisions: usize,
    cap: T,
) -> Result<Trajectory<D, T>, DynamicsError> {
    let mut walker = Walker::new(lattice, *start, cap);
    let mut displacements = Vec::with_capacity(n_collisions);
    let mut path_lengths = Vec::with_capacity(n_collisions);
    for _ in 0..n_collisions {
        walker.step()?;
        displacements.push(walker.displacement());
        path_lengths.push(walker.path_length());
    }
    Ok(Trajectory {
        displacements,
        path_lengths,
        final_state: *walker.state(),
        censored_steps: walker.censored_steps(),
    })
}

/// Outcome of a forward run followed by its time reversal.
#[derive(Clone, Copy, Debug)]
pub struct Retrace<T: Real> {
    /// Distance between the start point and the end of the reversed run.
    pub defect: T,
    /// Path length of the forward run.
    pub path_length: T,
}

/// Runs `n` collisions forward, reverses the velocity at the last collision,
/// retraces `n - 1` collisions and the initial flight segment, and reports
/// how far the end point lands from the start.
pub fn retrace<const D: usize, T: Real>(
    lattice: &Lattice<D, T>,
    start: &ParticleState<D, T>,
    n: usize,
    cap: T,
) -> Result<Retrace<T>, DynamicsError> {
    assert!(n >= 1);
    let mut forward = Walker::new(lattice, *start, cap);
    let first = forward.step()?.length;
    for _ in 1..n {
        forward.step()?;
    }
    let mut reversed = *forward.state();
    reversed.velocity = forward.last_incoming().map(|x| -x);
    let mut backward = Walker::new(lattice, reversed, cap);
    for _ in 1..n {
        backward.step()?;
    }
    let (_, end) = collision_step(lattice, backward.state(), first)?;
    let gap = lattice.displacement(start, &end);
    Ok(Retrace { defect: norm(&gap), path_length: forward.path_length() })
}
