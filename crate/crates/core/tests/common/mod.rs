#![allow(dead_code)]

use glasscert::flow::TransitionStep;
use glasscert::graph::{build_graph, find_deterministic_cycles, Cycle};
use glasscert::return_map::{zone_signs, ReturnMap, ZoneFrame};
use glasscert::{Network, Tolerances};
use nalgebra::DMatrix;
use rand::Rng;

pub fn only_cycle(net: &Network) -> Cycle {
    let mut cycles = find_deterministic_cycles(&build_graph(net));
    assert_eq!(cycles.len(), 1, "expected a single deterministic cycle");
    cycles.remove(0)
}

pub fn frame(net: &Network, c: &Cycle) -> ZoneFrame {
    ZoneFrame::new(net, c, &zone_signs(net, c).unwrap())
}

pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Uniform point of the whole wall `W^0` (not just the zone).
pub fn random_wall_point<R: Rng>(c: &Cycle, rng: &mut R) -> Vec<f64> {
    let wall = &c.walls[0];
    wall.bounds
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| if j == wall.pinned { lo } else { rng.random_range(lo..hi) })
        .collect()
}

/// Points on every wall of the cycle reached from `starts` on `W^0`:
/// `out[i]` holds points on the entry wall of step `i` of the return map.
pub fn wall_orbits(rm: &ReturnMap, starts: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let len = rm.cycle().len();
    let mut out = vec![Vec::new(); len];
    for x in starts {
        let orbit = rm.orbit(x).unwrap();
        for (i, p) in orbit.points.iter().take(len).enumerate() {
            out[i].push(p.clone());
        }
    }
    out
}

/// Steps of the return map in application order (`a^1, ..., a^0`).
pub fn steps(net: &Network, c: &Cycle) -> Vec<TransitionStep> {
    let len = c.len();
    (1..=len)
        .map(|k| {
            let i = k % len;
            let prev = (i + len - 1) % len;
            TransitionStep::new(
                net,
                c.domains[i].clone(),
                Some(c.exits[prev].variable),
                c.exits[i].variable,
                c.exits[i].threshold,
            )
        })
        .collect()
}

/// Central-difference Jacobian of `f` over input coordinates `cols`, output
/// coordinates `rows`, Richardson-extrapolated from steps `h` and `h/2`.
pub fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], rows: &[usize], cols: &[usize], h: f64) -> DMatrix<f64> {
    richardson(
        &central_jacobian(f, x, rows, cols, h),
        &central_jacobian(f, x, rows, cols, 0.5 * h),
    )
}

/// Second derivatives, Richardson-extrapolated like [`fd_jacobian`].
pub fn fd_hessian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    rows: &[usize],
    cols: &[usize],
    h: f64,
) -> Vec<DMatrix<f64>> {
    let coarse = central_hessian(f, x, rows, cols, h);
    let fine = central_hessian(f, x, rows, cols, 0.5 * h);
    coarse.iter().zip(&fine).map(|(c, f)| richardson(c, f)).collect()
}

fn richardson(coarse: &DMatrix<f64>, fine: &DMatrix<f64>) -> DMatrix<f64> {
    (fine * 4.0 - coarse) / 3.0
}

fn central_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], rows: &[usize], cols: &[usize], h: f64) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(rows.len(), cols.len());
    for (c, &j) in cols.iter().enumerate() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for (r, &k) in rows.iter().enumerate() {
            jac[(r, c)] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    jac
}

/// Central second differences: `out[r][(a, b)]` approximates
/// `d2 f_{rows[r]} / dx_{cols[a]} dx_{cols[b]}`.
fn central_hessian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    rows: &[usize],
    cols: &[usize],
    h: f64,
) -> Vec<DMatrix<f64>> {
    let m = cols.len();
    let shifted = |da: Option<(usize, f64)>, db: Option<(usize, f64)>| {
        let mut y = x.to_vec();
        for (j, s) in da.into_iter().chain(db) {
            y[j] += s;
        }
        f(&y)
    };
    let mut out = vec![DMatrix::zeros(m, m); rows.len()];
    for a in 0..m {
        for b in a..m {
            let (ja, jb) = (cols[a], cols[b]);
            let vals: Vec<Vec<f64>> = if a == b {
                vec![shifted(Some((ja, h)), None), f(x), shifted(Some((ja, -h)), None)]
            } else {
                vec![
                    shifted(Some((ja, h)), Some((jb, h))),
                    shifted(Some((ja, h)), Some((jb, -h))),
                    shifted(Some((ja, -h)), Some((jb, h))),
                    shifted(Some((ja, -h)), Some((jb, -h))),
                ]
            };
            for (r, &k) in rows.iter().enumerate() {
                let v = if a == b {
                    (vals[0][k] - 2.0 * vals[1][k] + vals[2][k]) / (h * h)
                } else {
                    (vals[0][k] - vals[1][k] - vals[2][k] + vals[3][k]) / (4.0 * h * h)
                };
                out[r][(a, b)] = v;
                out[r][(b, a)] = v;
            }
        }
    }
    out
}

/// Largest entrywise error relative to the largest analytic entry.
pub fn relative_error(analytic: &DMatrix<f64>, approx: &DMatrix<f64>) -> f64 {
    let scale = analytic.amax().max(f64::MIN_POSITIVE);
    (analytic - approx).amax() / scale
}

/// Rounding error of the extrapolated differences for derivative order
/// `order`, given the magnitude `f_max` of the differenced values.
pub fn fd_roundoff(f_max: f64, h: f64, order: i32) -> f64 {
    64.0 * f64::EPSILON * f_max.max(1.0) / h.powi(order)
}

pub fn tol() -> Tolerances {
    Tolerances::default()
}

/// Spectral radius by an independent dense eigen-solver.
pub fn oracle_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}
