//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use corridor_gas::LatticeSpec;

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn canonical(u: &[i64]) -> bool {
    u.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn physical(spec: &LatticeSpec, k: &[i64]) -> Vec<f64> {
    (0..spec.dimension)
        .map(|row| (0..spec.dimension).map(|col| spec.basis[col][row] * k[col] as f64).sum())
        .collect()
}

fn integer_box(d: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-n..=n).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Smallest positive gap between projections of lattice points onto `normal`.
fn projected_spacing(spec: &LatticeSpec, normal: &[f64], reach: i64) -> f64 {
    let mut proj: Vec<f64> = integer_box(spec.dimension, reach)
        .iter()
        .map(|k| physical(spec, k).iter().zip(normal).map(|(a, b)| a * b).sum())
        .collect();
    proj.sort_by(f64::total_cmp);
    proj.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 1e-9).fold(f64::INFINITY, f64::min)
}

/// Corridors found by scanning every primitive integer vector in a box and
/// measuring the gap structure of the lattice projected across it.
///
/// In d = 2 the vector is the corridor direction, in d = 3 the slab normal.
/// Result sorted by decreasing width, then lexicographically.
pub fn brute_force_corridors(spec: &LatticeSpec, box_half: i64) -> Vec<(Vec<i64>, f64)> {
    let d = spec.dimension;
    let r = spec.radius;
    let mut out = Vec::new();
    for u in integer_box(d, box_half) {
        if !canonical(&u) || u.iter().fold(0, |g, &x| gcd(g, x)) != 1 {
            continue;
        }
        let normal: Vec<f64> = if d == 2 {
            let b = physical(spec, &u);
            let len = (b[0] * b[0] + b[1] * b[1]).sqrt();
            vec![-b[1] / len, b[0] / len]
        } else {
            let len = (u.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
            u.iter().map(|&x| x as f64 / len).collect()
        };
        let reach = 2 * u.iter().map(|x| x.abs()).max().unwrap() + 2;
        let spacing = projected_spacing(spec, &normal, reach);
        if spacing > 2.0 * r {
            out.push((u, spacing - 2.0 * r));
        }
    }
    // Projection gaps carry round-off; widths within 1e-9 count as tied.
    out.sort_by(|a, b| {
        if (a.1 - b.1).abs() < 1e-9 {
            a.0.cmp(&b.0)
        } else {
            b.1.total_cmp(&a.1)
        }
    });
    out
}

/// Smallest singular value of a 2x2 basis.
pub fn smallest_singular_value(spec: &LatticeSpec) -> f64 {
    let (a, b, c, d) = (spec.basis[0][0], spec.basis[1][0], spec.basis[0][1], spec.basis[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    ((s1 - disc) / 2.0).sqrt()
}

/// Half-width of an integer box certain to hold every corridor direction.
pub fn oracle_box(spec: &LatticeSpec) -> i64 {
    let v = spec.covolume();
    let needed = v / (2.0 * spec.radius);
    let sigma = if spec.dimension == 2 { smallest_singular_value(spec) } else { 1.0 };
    (needed / sigma).ceil() as i64 + 2
}

/// First hit of the ray `x + t v` on any sphere centered within `reach` of
/// the start, by testing each sphere with the textbook quadratic.
///
/// Returns `(t, center)`; spheres behind or containing the start are ignored.
pub fn naive_flight(spec: &LatticeSpec, x: &[f64], v: &[f64], reach: f64) -> Option<(f64, Vec<f64>)> {
    let d = spec.dimension;
    let r = spec.radius;
    // Lattice coordinates of the start bound the box to scan.
    let inv = inverse(spec);
    let a: Vec<f64> = (0..d).map(|i| (0..d).map(|j| inv[i][j] * x[j]).sum()).collect();
    let span = (reach * operator_norm_bound(&inv)).ceil() as i64 + 2;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for off in integer_box(d, span) {
        let k: Vec<i64> = off.iter().zip(&a).map(|(o, ai)| o + ai.floor() as i64).collect();
        let c = physical(spec, &k);
        let l: Vec<f64> = (0..d).map(|i| c[i] - x[i]).collect();
        let b = l.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        let cc = l.iter().map(|p| p * p).sum::<f64>() - r * r;
        let disc = b * b - cc;
        if disc <= 0.0 || cc <= 0.0 {
            continue;
        }
        let t = b - disc.sqrt();
        if t > 1e-9 && t <= reach && best.as_ref().is_none_or(|(bt, _)| t < *bt) {
            best = Some((t, c));
        }
    }
    best
}

fn inverse(spec: &LatticeSpec) -> Vec<Vec<f64>> {
    let d = spec.dimension;
    // Gauss-Jordan on the matrix whose columns are the generators.
    let mut m: Vec<Vec<f64>> = (0..d)
        .map(|row| {
            let mut r: Vec<f64> = (0..d).map(|col| spec.basis[col][row]).collect();
            r.extend((0..d).map(|j| if j == row { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..d {
        let p = (col..d).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, p);
        let pivot = m[col][col];
        for x in m[col].iter_mut() {
            *x /= pivot;
        }
        for row in 0..d {
            if row != col {
                let f = m[row][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[row].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[d..].to_vec()).collect()
}

fn operator_norm_bound(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rotation of the plane by `angle`.
pub fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_corridor-gas")
}
