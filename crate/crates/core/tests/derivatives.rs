mod common;

use glasscert::fixtures;
use glasscert::flow::flow_at;
use glasscert::model::parse_network;
use glasscert::return_map::{random_zone_point, zone_signs, ReturnMap, ZoneFrame};
use glasscert::simulate::run;
use glasscert::Network;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

const POINTS: usize = 50;

fn each_fixture(mut f: impl FnMut(&str, &Network, &ReturnMap, &ZoneFrame, &[Vec<f64>])) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, text) in fixtures::ALL {
        let net = parse_network(text).unwrap();
        let c = only_cycle(&net);
        let rm = ReturnMap::new(&net, &c, tol());
        let fr = ZoneFrame::new(&net, &c, &zone_signs(&net, &c).unwrap());
        let pts: Vec<Vec<f64>> = (0..POINTS).map(|_| random_zone_point(&fr, &mut rng)).collect();
        f(name, &net, &rm, &fr, &pts);
    }
}

/// Bound on the differenced values: images lie on the first wall, and zone
/// coordinates are no larger than the wall's extent.
fn value_bound(rm: &ReturnMap) -> f64 {
    rm.wall().bounds.iter().fold(0.0, |m, b| m.max(b.1.abs()))
}

/// Finite-difference step scaled to the first transition's length scale
/// `|phi_s - x_s|` and kept well inside the first wall.
fn step(net: &Network, rm: &ReturnMap, x: &[f64], h: f64) -> f64 {
    let first = &steps(net, rm.cycle())[0];
    let gap = (first.focal[first.exit] - x[first.exit]).abs();
    (h * gap.min(1.0)).min(0.25 * rm.wall().interior_margin(x))
}

#[test]
fn return_jacobian_matches_finite_differences() {
    each_fixture(|name, net, rm, _, pts| {
        let free = rm.free();
        let f = |x: &[f64]| rm.apply(x).unwrap();
        for x in pts {
            let jac = rm.jacobian(x).unwrap();
            let h = step(net, rm, x, 1e-3);
            let diff = (&jac - fd_jacobian(&f, x, &free, &free, h)).amax();
            let bound = 1e-6 * jac.amax() + fd_roundoff(value_bound(rm), h, 1);
            assert!(diff <= bound, "{name}: error {diff:e} > {bound:e} at {x:?}");
        }
    });
}

#[test]
fn return_hessian_matches_finite_differences() {
    each_fixture(|name, net, rm, _, pts| {
        let free = rm.free();
        let f = |x: &[f64]| rm.apply(x).unwrap();
        for x in pts {
            let (jac, hess) = rm.jacobian_and_hessian(x).unwrap();
            let h = step(net, rm, x, 2e-3);
            let fd = fd_hessian(&f, x, &free, &free, h);
            let scale = hess.iter().map(|h| h.amax()).fold(jac.amax(), f64::max);
            let bound = 1e-5 * scale + fd_roundoff(value_bound(rm), h, 2);
            for (an, h_fd) in hess.iter().zip(&fd) {
                let diff = (an - h_fd).amax();
                assert!(diff <= bound, "{name}: error {diff:e} > {bound:e} at {x:?}");
            }
        }
    });
}

#[test]
fn jacobian_agrees_between_entry_points() {
    each_fixture(|_, _, rm, _, pts| {
        for x in pts.iter().take(10) {
            let (jac, _) = rm.jacobian_and_hessian(x).unwrap();
            assert!((jac - rm.jacobian(x).unwrap()).amax() == 0.0);
        }
    });
}

#[test]
fn zone_frame_derivatives_match_finite_differences_in_z() {
    each_fixture(|name, net, rm, fr, pts| {
        let m = fr.free.len();
        let idx: Vec<usize> = (0..m).collect();
        let g = |z: &[f64]| fr.to_z(&rm.apply(&fr.to_x(z)).unwrap());
        for x in pts.iter().take(20) {
            let z = fr.to_z(x);
            let (jac, hess) = rm.jacobian_and_hessian(x).unwrap();
            let jz: DMatrix<f64> = fr.jacobian(&jac);
            let h = step(net, rm, x, 1e-3);
            let diff = (&jz - fd_jacobian(&g, &z, &idx, &idx, h)).amax();
            assert!(
                diff <= 1e-6 * jz.amax() + fd_roundoff(value_bound(rm), h, 1),
                "{name}: {diff:e}"
            );
            let hz = fr.hessian(&hess);
            let h = step(net, rm, x, 2e-3);
            let fd = fd_hessian(&g, &z, &idx, &idx, h);
            let scale = hz.iter().map(|h| h.amax()).fold(jz.amax(), f64::max);
            let bound = 1e-5 * scale + fd_roundoff(value_bound(rm), h, 2);
            for (an, h_fd) in hz.iter().zip(&fd) {
                let diff = (an - h_fd).amax();
                assert!(diff <= bound, "{name}: {diff:e} > {bound:e}");
            }
        }
    });
}

#[test]
fn return_time_and_image_match_simulation() {
    each_fixture(|name, net, rm, _, pts| {
        let c = rm.cycle();
        for x in pts.iter().take(5) {
            let t = rm.return_time(x).unwrap();
            // move a little into a^1 so the simulator starts in a regular domain
            let delta = 1e-3;
            let y = flow_at(net, &c.domains[1], x, delta);
            let traj = run(net, &y, 2.0 * t, 10_000, &tol()).unwrap();
            let (back, image) = traj
                .events
                .windows(2)
                .find(|w| w[0].domain == c.domains[0] && w[1].domain == c.domains[1])
                .map(|w| (w[1].t, w[1].state.clone()))
                .expect("trajectory returns to the first wall");
            assert!((back + delta - t).abs() < 1e-9 * t.max(1.0), "{name}: {back} vs {t}");
            assert!(max_norm(&image, &rm.apply(x).unwrap()) < 1e-9, "{name}");
        }
    });
}
