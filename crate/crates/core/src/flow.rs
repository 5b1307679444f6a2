//! Closed-form dynamics inside one regular domain.
//!
//! On domain `a` the flow is `x_i(t) = phi_i + exp(-gamma_i t) (x_i - phi_i)`
//! with `phi = focal_point(a)`. Exit times, the wall-to-wall transition map
//! and its derivatives all follow from this expression.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::exit_directions;
use crate::model::{DomainIndex, Network, State};
use crate::tolerances::Tolerances;

/// Hyperplane piece `x_direction = threshold` bounding `domain`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallRef {
    pub domain: DomainIndex,
    pub direction: usize,
    pub threshold: f64,
}

/// Point of a wall; `x[wall.direction]` is exactly `wall.threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallPoint {
    pub wall: WallRef,
    pub x: State,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitEvent {
    pub tau: f64,
    pub direction: usize,
    /// `+1` when leaving through the upper threshold.
    pub sign: i8,
    pub point: WallPoint,
}

/// State reached from `x` after time `t` under the affine flow of domain `a`.
pub fn flow_at(net: &Network, a: &DomainIndex, x: &[f64], t: f64) -> State {
    let phi = net.focal_point(a);
    flow_with_focal(&phi, net, x, t)
}

fn flow_with_focal(phi: &[f64], net: &Network, x: &[f64], t: f64) -> State {
    // x + (1 - e^{-gamma t})(phi - x), exact at t = 0
    x.iter()
        .zip(phi)
        .enumerate()
        .map(|(i, (&xi, &p))| {
            let decay = -(-net.gamma(i) * t).exp_m1();
            xi + decay * (p - xi)
        })
        .collect()
}

/// First wall reached from `x` inside domain `a`.
pub fn exit_time(net: &Network, a: &DomainIndex, x: &[f64], tol: &Tolerances) -> Result<ExitEvent> {
    net.check_domain(a)?;
    if x.len() != net.dim() {
        return Err(Error::Dimension {
            expected: net.dim(),
            got: x.len(),
        });
    }
    for (i, &xi) in x.iter().enumerate() {
        if !(xi >= net.lower(a, i) - tol.threshold && xi <= net.upper(a, i) + tol.threshold) {
            return Err(Error::InvalidArgument(format!(
                "state coordinate {i} = {xi} lies outside domain {a}"
            )));
        }
    }
    let exits = exit_directions(net, a);
    if exits.is_empty() {
        return Err(Error::InteriorEquilibrium(a.clone()));
    }
    let phi = net.focal_point(a);
    let mut times: Vec<(f64, usize, i8, f64)> = exits
        .iter()
        .map(|(i, sign)| {
            let theta = if sign > 0 { net.upper(a, i) } else { net.lower(a, i) };
            let ratio = (phi[i] - theta) / (phi[i] - x[i]);
            (-ratio.ln() / net.gamma(i), i, sign, theta)
        })
        .collect();
    times.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (tau, direction, sign, theta) = times[0];
    if let Some(&(second, other, _, _)) = times.get(1) {
        if second - tau <= tol.exit_tie * tau.abs().max(second.abs()) {
            return Err(Error::Codimension2Exit {
                domain: a.clone(),
                first: direction,
                second: other,
            });
        }
    }
    let tau = tau.max(0.0);
    let mut y = flow_with_focal(&phi, net, x, tau);
    y[direction] = theta;
    Ok(ExitEvent {
        tau,
        direction,
        sign,
        point: WallPoint {
            wall: WallRef {
                domain: a.clone(),
                direction,
                threshold: theta,
            },
            x: y,
        },
    })
}

/// Transition map of domain `a`: sends `x` (on an entry wall) to the point
/// where the flow leaves `a`, using the power form
/// `T_j = phi_j + (x_j - phi_j) ((phi_s - theta) / (phi_s - x_s))^(gamma_j / gamma_s)`.
pub fn local_transition(net: &Network, a: &DomainIndex, x: &[f64], tol: &Tolerances) -> Result<WallPoint> {
    let exit = exit_time(net, a, x, tol)?;
    let step = TransitionStep::new(net, a.clone(), None, exit.direction, exit.point.wall.threshold);
    let y = step.apply(x, tol)?;
    Ok(WallPoint {
        wall: exit.point.wall,
        x: y,
    })
}

/// One domain of a cycle seen as a map between walls: enters through the
/// wall pinned in `entry` (if any) and leaves through `x_exit = threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionStep {
    pub domain: DomainIndex,
    pub focal: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Direction pinned on the entry wall (`s_{i-1}`); `None` for an
    /// arbitrary interior start.
    pub entry: Option<usize>,
    /// Exit direction `s_i`.
    pub exit: usize,
    pub threshold: f64,
    scale: f64,
}

impl TransitionStep {
    pub fn new(net: &Network, domain: DomainIndex, entry: Option<usize>, exit: usize, threshold: f64) -> Self {
        Self {
            focal: net.focal_point(&domain),
            gamma: (0..net.dim()).map(|i| net.gamma(i)).collect(),
            scale: net.variables()[exit].upper_bound,
            domain,
            entry,
            exit,
            threshold,
        }
    }

    pub fn dim(&self) -> usize {
        self.focal.len()
    }

    /// Output coordinates: every direction but the exit one.
    pub fn rows(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| k != self.exit).collect()
    }

    /// Input coordinates: every direction but the one pinned on entry.
    pub fn cols(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| Some(j) != self.entry).collect()
    }

    /// `phi_s - x_s`, guarded against degeneracy.
    fn normal_gap(&self, x: &[f64], tol: &Tolerances) -> Result<f64> {
        let gap = self.focal[self.exit] - x[self.exit];
        if gap.abs() < tol.degeneracy * self.scale {
            return Err(Error::WallNormalDegeneracy {
                domain: self.domain.clone(),
                direction: self.exit,
            });
        }
        Ok(gap)
    }

    fn log_ratio(&self, x: &[f64], tol: &Tolerances) -> Result<f64> {
        let gap = self.normal_gap(x, tol)?;
        Ok(((self.focal[self.exit] - self.threshold) / gap).ln())
    }

    fn exponent(&self, k: usize) -> f64 {
        self.gamma[k] / self.gamma[self.exit]
    }

    /// `alpha_k(x) = exp(-gamma_k tau(x))`.
    pub fn alpha(&self, k: usize, x: &[f64], tol: &Tolerances) -> Result<f64> {
        Ok((self.exponent(k) * self.log_ratio(x, tol)?).exp())
    }

    /// Time to reach the exit wall.
    pub fn time(&self, x: &[f64], tol: &Tolerances) -> Result<f64> {
        Ok(-self.log_ratio(x, tol)? / self.gamma[self.exit])
    }

    /// Image on the exit wall, full coordinates, exit coordinate pinned.
    pub fn apply(&self, x: &[f64], tol: &Tolerances) -> Result<State> {
        let lr = self.log_ratio(x, tol)?;
        Ok((0..self.dim())
            .map(|k| {
                if k == self.exit {
                    self.threshold
                } else {
                    // x_k + (1 - alpha_k)(phi_k - x_k): identity when alpha_k = 1
                    let one_minus_alpha = -(self.exponent(k) * lr).exp_m1();
                    x[k] + one_minus_alpha * (self.focal[k] - x[k])
                }
            })
            .collect())
    }
}

/// `dT_k/dx_j` over `rows() x cols()`.
pub fn local_jacobian(step: &TransitionStep, x: &[f64], tol: &Tolerances) -> Result<DMatrix<f64>> {
    let s = step.exit;
    let gap = step.normal_gap(x, tol)?;
    let rows = step.rows();
    let cols = step.cols();
    let mut jac = DMatrix::zeros(rows.len(), cols.len());
    for (r, &k) in rows.iter().enumerate() {
        let alpha = step.alpha(k, x, tol)?;
        for (c, &j) in cols.iter().enumerate() {
            if j == k {
                jac[(r, c)] = alpha;
            } else if j == s {
                jac[(r, c)] = -step.exponent(k) * (step.focal[k] - x[k]) / gap * alpha;
            }
        }
    }
    Ok(jac)
}

/// `d2T_k/(dx_m dx_j)`: element `r` of the result is the `cols x cols`
/// matrix for output coordinate `rows()[r]`.
pub fn local_second_derivatives(step: &TransitionStep, x: &[f64], tol: &Tolerances) -> Result<Vec<DMatrix<f64>>> {
    let s = step.exit;
    let gap = step.normal_gap(x, tol)?;
    let cols = step.cols();
    let s_col = cols.iter().position(|&j| j == s);
    step.rows()
        .into_iter()
        .map(|k| {
            let mut h = DMatrix::zeros(cols.len(), cols.len());
            let Some(sc) = s_col else {
                // exit coordinate pinned on entry: the map is affine
                return Ok(h);
            };
            let g = step.exponent(k);
            let alpha = step.alpha(k, x, tol)?;
            if let Some(kc) = cols.iter().position(|&j| j == k) {
                let mixed = g * alpha / gap;
                h[(sc, kc)] = mixed;
                h[(kc, sc)] = mixed;
            }
            h[(sc, sc)] = -g * (1.0 + g) * (step.focal[k] - x[k]) / (gap * gap) * alpha;
            Ok(h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn d(s: &str) -> DomainIndex {
        s.parse().unwrap()
    }

    fn toy(gammas: &[f64], focal_rates: &[f64]) -> Network {
        use crate::model::{ProductionTerm, VariableSpec};
        Network::new(
            gammas
                .iter()
                .zip(focal_rates)
                .enumerate()
                .map(|(i, (&g, &k))| VariableSpec {
                    name: format!("x{i}"),
                    thresholds: vec![1.0],
                    upper_bound: 4.0,
                    gamma: g,
                    production: vec![ProductionTerm {
                        rate: k,
                        literals: vec![],
                    }],
                })
                .collect(),
        )
        .unwrap()
    }

    /// Classic RK4 on the affine field of one domain.
    fn rk4(phi: &[f64], gamma: &[f64], x: &[f64], t: f64, h: f64) -> Vec<f64> {
        let f = |y: &[f64]| -> Vec<f64> { y.iter().enumerate().map(|(i, &v)| gamma[i] * (phi[i] - v)).collect() };
        let mut y = x.to_vec();
        let steps = (t / h).round() as usize;
        for _ in 0..steps {
            let k1 = f(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = f(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = f(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = f(&y4);
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    #[test]
    fn flow_identity_at_zero() {
        let net = fixtures::two_negative_loops();
        let x = vec![0.3, 0.7, 0.1];
        assert_eq!(flow_at(&net, &d("000"), &x, 0.0), x);
    }

    #[test]
    fn flow_substitution() {
        let net = toy(&[1.0], &[2.0]);
        let y = flow_at(&net, &d("1"), &[0.0], 2f64.ln());
        assert!((y[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flow_matches_rk4() {
        let net = fixtures::two_negative_loops();
        let a = d("112");
        let x = [1.8, 1.9, 2.8];
        let phi = net.focal_point(&a);
        let oracle = rk4(&phi, &[1.0, 3.0, 6.0], &x, 0.05, 1e-5);
        let y = flow_at(&net, &a, &x, 0.05);
        for i in 0..3 {
            assert!((y[i] - oracle[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn flow_semigroup() {
        let net = fixtures::mixed_loops();
        let a = d("010");
        let x = [0.2, 1.3, 0.4];
        let once = flow_at(&net, &a, &x, 0.07);
        let twice = flow_at(&net, &a, &flow_at(&net, &a, &x, 0.03), 0.04);
        for i in 0..3 {
            assert!((once[i] - twice[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_time_substitution() {
        let net = toy(&[1.0], &[2.0]);
        let ev = exit_time(&net, &d("0"), &[0.0], &Tolerances::default()).unwrap();
        assert!((ev.tau - 2f64.ln()).abs() < 1e-15);
        assert_eq!(ev.direction, 0);
        assert_eq!(ev.sign, 1);
        assert_eq!(ev.point.x, vec![1.0]);
        let near = exit_time(&net, &d("0"), &[1.0 - 1e-13], &Tolerances::default()).unwrap();
        assert!(near.tau < 1e-12);
    }

    #[test]
    fn exit_time_errors() {
        let tol = Tolerances::default();
        let net = toy(&[1.0], &[0.5]);
        assert!(matches!(
            exit_time(&net, &d("0"), &[0.2], &tol),
            Err(Error::InteriorEquilibrium(_))
        ));
        // two identical coordinates heading to the same corner
        let net = toy(&[1.0, 1.0], &[2.0, 2.0]);
        assert!(matches!(
            exit_time(&net, &d("00"), &[0.5, 0.5], &tol),
            Err(Error::Codimension2Exit { .. })
        ));
    }

    #[test]
    fn transition_is_identity_on_exit_wall() {
        let tol = Tolerances::default();
        let net = fixtures::two_negative_loops();
        // 010 exits through x3 = 1; a point already there stays put
        let step = TransitionStep::new(&net, d("010"), Some(1), 2, 1.0);
        let x = [0.37, 1.0, 1.0];
        assert_eq!(step.apply(&x, &tol).unwrap(), x.to_vec());
        let jac = local_jacobian(&step, &x, &tol).unwrap();
        assert_eq!(jac[(0, 0)], 1.0);
    }

    #[test]
    fn uniform_decays_share_alpha() {
        let tol = Tolerances::default();
        let net = toy(&[2.0, 2.0, 2.0], &[6.0, 1.0, 1.0]);
        let step = TransitionStep::new(&net, d("000"), None, 0, 1.0);
        let x = [0.3, 0.9, 0.1];
        let a1 = step.alpha(1, &x, &tol).unwrap();
        let a2 = step.alpha(2, &x, &tol).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn local_transition_agrees_with_flow() {
        let tol = Tolerances::default();
        let net = fixtures::parallel_thresholds();
        let x = [1.0, 0.5];
        let y = local_transition(&net, &d("10"), &x, &tol).unwrap();
        assert_eq!(y.wall.direction, 0);
        assert_eq!(y.x[0], 2.0);
        let ev = exit_time(&net, &d("10"), &x, &tol).unwrap();
        assert!((ev.point.x[1] - y.x[1]).abs() < 1e-14);
        let phi = net.focal_point(&d("10"));
        let oracle = rk4(&phi, &[1.0, 5.0], &x, ev.tau, ev.tau / 200_000.0);
        assert!((oracle[1] - y.x[1]).abs() < 1e-8);
        assert!((oracle[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn jacobian_diagonal_when_on_focal_coordinates() {
        let tol = Tolerances::default();
        let net = fixtures::two_negative_loops();
        let step = TransitionStep::new(&net, d("011"), Some(2), 0, 1.0);
        let phi = net.focal_point(&d("011"));
        // x_k = phi_k for k != s (x2 = 1.7 is inside the wall's range)
        let x = [0.4, phi[1], 1.0];
        let jac = local_jacobian(&step, &x, &tol).unwrap();
        // rows {1, 2}, cols {0, 1}; the x2 row has no x1 dependence
        assert_eq!(jac[(0, 0)], 0.0);
        assert!(jac[(1, 0)] != 0.0);
        let h = local_second_derivatives(&step, &x, &tol).unwrap();
        assert_eq!(h[0][(0, 0)], 0.0);
    }

    #[test]
    fn second_derivatives_symmetric() {
        let tol = Tolerances::default();
        let net = fixtures::mixed_loops();
        let step = TransitionStep::new(&net, d("110"), Some(0), 2, 1.0);
        let x = [1.0, 1.4, 0.3];
        for h in local_second_derivatives(&step, &x, &tol).unwrap() {
            assert_eq!(h, h.transpose());
        }
    }

    #[test]
    fn degenerate_normal_gap() {
        let tol = Tolerances::default();
        let net = toy(&[1.0, 1.0], &[2.0, 0.5]);
        let step = TransitionStep::new(&net, d("00"), None, 0, 1.0);
        assert!(matches!(
            local_jacobian(&step, &[2.0, 0.3], &tol),
            Err(Error::WallNormalDegeneracy { .. })
        ));
    }
}
