//! First-return maps around deterministic cycles.
//!
//! The cycle `a^0 -> a^1 -> ... -> a^{l-1} -> a^0` has walls `W^i` between
//! `a^i` and `a^{i+1}`; `W^i` pins coordinate `s_i`. The return map `T` acts
//! on `W^0` and composes the transition maps of `a^1, ..., a^{l-1}, a^0`.
//! In coordinates `z_j = sigma^0_j (x_j - corner_j)` the zone of `W^0` is the
//! box `[0, p]`, and the dichotomy between convergence to the corner and a
//! unique attracting limit cycle is decided by the spectral radius of `DT`
//! at the corner, or directly when the cycle crosses two thresholds of one
//! variable.

mod spectral;
mod zones;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Assumption, Error, Result};
use crate::flow::{local_jacobian, local_second_derivatives, TransitionStep, WallPoint, WallRef};
use crate::graph::{cycle_properties, exit_directions, Cycle, WallBox};
use crate::model::{DomainIndex, Network, State};
use crate::tolerances::Tolerances;

pub use spectral::{eigenvalues, spectral_radius};
pub use zones::{corner_and_apex, zone_signs, ZoneSigns};

const SAMPLE_SEED: u64 = 0x5eed_91a5;

/// Points and sojourn times of one turn around the cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `points[0]` is the start on `W^0`, `points[i]` the point on `W^i`,
    /// and the last entry the return to `W^0`.
    pub points: Vec<State>,
    /// Time spent in `a^1, ..., a^{l-1}, a^0`.
    pub times: Vec<f64>,
}

impl Orbit {
    pub fn end(&self) -> &State {
        self.points.last().expect("orbit has a start point")
    }

    pub fn period(&self) -> f64 {
        self.times.iter().sum()
    }
}

/// The return map of one cycle on its first wall.
#[derive(Debug, Clone)]
pub struct ReturnMap<'a> {
    net: &'a Network,
    cycle: &'a Cycle,
    /// Transition steps in application order.
    steps: Vec<TransitionStep>,
    tol: Tolerances,
}

impl<'a> ReturnMap<'a> {
    pub fn new(net: &'a Network, cycle: &'a Cycle, tol: Tolerances) -> Self {
        let len = cycle.len();
        let steps = (1..=len)
            .map(|k| {
                let i = k % len;
                let prev = (i + len - 1) % len;
                TransitionStep::new(
                    net,
                    cycle.domains[i].clone(),
                    Some(cycle.exits[prev].variable),
                    cycle.exits[i].variable,
                    cycle.exits[i].threshold,
                )
            })
            .collect();
        Self { net, cycle, steps, tol }
    }

    pub fn cycle(&self) -> &Cycle {
        self.cycle
    }

    pub fn wall(&self) -> &WallBox {
        &self.cycle.walls[0]
    }

    /// Free coordinates of `W^0`.
    pub fn free(&self) -> Vec<usize> {
        self.wall().free()
    }

    fn check_on_wall(&self, x: &[f64]) -> Result<State> {
        let n = self.net.dim();
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
        let wall = self.wall();
        let mut y = x.to_vec();
        for (j, &(lo, hi)) in wall.bounds.iter().enumerate() {
            let slack = self.tol.threshold * hi.abs().max(1.0);
            if !(x[j] >= lo - slack && x[j] <= hi + slack) {
                return Err(Error::InvalidArgument(format!(
                    "point {x:?} is not on the first wall of cycle {}",
                    self.cycle.id
                )));
            }
            if j == wall.pinned {
                y[j] = lo;
            }
        }
        Ok(y)
    }

    /// Confirms that from `x` the flow of the step's domain leaves through the
    /// expected wall, then returns the sojourn time.
    fn checked_time(&self, index: usize, x: &[f64]) -> Result<f64> {
        let step = &self.steps[index];
        let tau = step.time(x, &self.tol)?;
        let slack = self.tol.exit_tie * tau.abs().max(1.0);
        if tau.is_nan() || tau < -slack {
            return Err(Error::OrbitLeavesCycle {
                step: index,
                expected: step.exit,
                realized: step.exit,
            });
        }
        let phi = &step.focal;
        for (j, sign) in exit_directions(self.net, &step.domain).iter() {
            if j == step.exit {
                continue;
            }
            let theta = if sign > 0 {
                self.net.upper(&step.domain, j)
            } else {
                self.net.lower(&step.domain, j)
            };
            let tau_j = -((phi[j] - theta) / (phi[j] - x[j])).ln() / step.gamma[j];
            if tau_j < tau - slack {
                return Err(Error::OrbitLeavesCycle {
                    step: index,
                    expected: step.exit,
                    realized: j,
                });
            }
        }
        Ok(tau.max(0.0))
    }

    /// One turn from `x` on `W^0`, each step checked against the cycle.
    pub fn orbit(&self, x: &[f64]) -> Result<Orbit> {
        let mut cur = self.check_on_wall(x)?;
        let mut points = vec![cur.clone()];
        let mut times = Vec::with_capacity(self.steps.len());
        for (index, step) in self.steps.iter().enumerate() {
            times.push(self.checked_time(index, &cur)?);
            cur = step.apply(&cur, &self.tol)?;
            points.push(cur.clone());
        }
        Ok(Orbit { points, times })
    }

    pub fn apply(&self, x: &[f64]) -> Result<State> {
        Ok(self.orbit(x)?.end().clone())
    }

    /// Jacobian over the free coordinates of `W^0`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let orbit = self.orbit(x)?;
        let m = self.net.dim() - 1;
        let mut jac = DMatrix::identity(m, m);
        for (step, point) in self.steps.iter().zip(&orbit.points) {
            jac = local_jacobian(step, point, &self.tol)? * jac;
        }
        Ok(jac)
    }

    /// Jacobian and second derivatives over the free coordinates of `W^0`;
    /// `hessian[k]` is the matrix of second derivatives of output `k`.
    pub fn jacobian_and_hessian(&self, x: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let orbit = self.orbit(x)?;
        let m = self.net.dim() - 1;
        let mut jac = DMatrix::identity(m, m);
        let mut hess = vec![DMatrix::zeros(m, m); m];
        for (step, point) in self.steps.iter().zip(&orbit.points) {
            let local = local_jacobian(step, point, &self.tol)?;
            let second = local_second_derivatives(step, point, &self.tol)?;
            let jt = jac.transpose();
            hess = (0..m)
                .map(|k| {
                    let mut h = &jt * &second[k] * &jac;
                    for (a, ha) in hess.iter().enumerate() {
                        let l = local[(k, a)];
                        if l != 0.0 {
                            h += ha * l;
                        }
                    }
                    h
                })
                .collect();
            jac = local * jac;
        }
        Ok((jac, hess))
    }

    /// Time for one turn from `x`.
    pub fn return_time(&self, x: &[f64]) -> Result<f64> {
        Ok(self.orbit(x)?.period())
    }
}

/// Image of `x` under the return map of `c`.
pub fn poincare_map(net: &Network, c: &Cycle, x: &[f64], tol: &Tolerances) -> Result<State> {
    ReturnMap::new(net, c, *tol).apply(x)
}

/// Jacobian of the return map of `c` at `x`, over the free coordinates of `W^0`.
pub fn return_jacobian(net: &Network, c: &Cycle, x: &[f64], tol: &Tolerances) -> Result<DMatrix<f64>> {
    ReturnMap::new(net, c, *tol).jacobian(x)
}

/// Corner-translated, sigma-reflected coordinates of `W^0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneFrame {
    pub corner: State,
    pub apex: Vec<f64>,
    pub free: Vec<usize>,
    /// `sigma^0` over `free`.
    pub sigma: Vec<f64>,
}

impl ZoneFrame {
    pub fn new(net: &Network, c: &Cycle, zones: &ZoneSigns) -> Self {
        let (corner, apex) = corner_and_apex(net, c, zones);
        Self {
            corner: corner.x,
            apex,
            free: c.walls[0].free(),
            sigma: zones.sigma[0].iter().map(|&s| f64::from(s)).collect(),
        }
    }

    pub fn to_z(&self, x: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .zip(&self.sigma)
            .map(|(&j, &s)| s * (x[j] - self.corner[j]))
            .collect()
    }

    pub fn to_x(&self, z: &[f64]) -> State {
        let mut x = self.corner.clone();
        for ((&j, &s), &zj) in self.free.iter().zip(&self.sigma).zip(z) {
            x[j] = self.corner[j] + s * zj;
        }
        x
    }

    /// `S J S` with `S = diag(sigma)`.
    pub fn jacobian(&self, jac: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(jac.nrows(), jac.ncols(), |k, j| {
            self.sigma[k] * self.sigma[j] * jac[(k, j)]
        })
    }

    pub fn hessian(&self, hess: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        hess.iter()
            .enumerate()
            .map(|(k, h)| {
                DMatrix::from_fn(h.nrows(), h.ncols(), |m, j| {
                    self.sigma[k] * self.sigma[m] * self.sigma[j] * h[(m, j)]
                })
            })
            .collect()
    }

    /// Point of the open zone from unit-interval fractions.
    pub fn zone_point(&self, fractions: &[f64]) -> State {
        let z: Vec<f64> = fractions.iter().zip(&self.apex).map(|(u, p)| u * p).collect();
        self.to_x(&z)
    }

    pub fn midpoint(&self) -> State {
        self.zone_point(&vec![0.5; self.free.len()])
    }

    /// Distance from `x` to the zone boundary in `z` coordinates (negative
    /// when outside).
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.to_z(x)
            .iter()
            .zip(&self.apex)
            .map(|(z, p)| z.min(p - z))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub point: State,
    pub detail: String,
}

/// Sampled monotonicity and concavity hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Every entry of the transformed Jacobian is positive.
    pub monotone_ok: bool,
    /// `DT(y) <= DT(x)` entrywise, strictly somewhere, for `0 < x < y < p`.
    pub concave_ok: bool,
    /// Transformed second derivatives are nonpositive.
    pub second_order_ok: bool,
    /// The image of the apex lies strictly below the apex.
    pub tp_lt_p: bool,
    pub samples: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Checks the hypotheses of the monotone-concave fixed point theorem on
/// random zone points drawn from a fixed seed.
pub fn condition_checks(
    net: &Network,
    c: &Cycle,
    zones: &ZoneSigns,
    samples: usize,
    tol: &Tolerances,
) -> ConditionReport {
    let rm = ReturnMap::new(net, c, *tol);
    let frame = ZoneFrame::new(net, c, zones);
    let m = frame.free.len();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut report = ConditionReport {
        monotone_ok: true,
        concave_ok: true,
        second_order_ok: true,
        tp_lt_p: true,
        samples,
        counterexamples: Vec::new(),
    };
    let fail = |report: &mut ConditionReport, check: &str, point: &State, detail: String| {
        let flag = match check {
            "monotone" => &mut report.monotone_ok,
            "concave" => &mut report.concave_ok,
            "second_order" => &mut report.second_order_ok,
            _ => &mut report.tp_lt_p,
        };
        if *flag {
            report.counterexamples.push(Counterexample {
                check: check.to_string(),
                point: point.clone(),
                detail,
            });
        }
        *flag = false;
    };
    let open_unit = |rng: &mut ChaCha8Rng| -> f64 { rng.random_range(1e-6..1.0 - 1e-6) };

    for _ in 0..samples {
        let u: Vec<f64> = (0..m).map(|_| open_unit(&mut rng)).collect();
        let x = frame.zone_point(&u);
        match rm.jacobian_and_hessian(&x) {
            Ok((jac, hess)) => {
                let jz = frame.jacobian(&jac);
                if let Some(v) = jz.iter().find(|&&v| v.is_nan() || v <= 0.0) {
                    fail(&mut report, "monotone", &x, format!("Jacobian entry {v:e}"));
                }
                let scale = jz.amax().max(1.0);
                for hz in frame.hessian(&hess) {
                    if let Some(v) = hz.iter().find(|&&v| v > 1e-10 * scale) {
                        fail(&mut report, "second_order", &x, format!("second derivative {v:e}"));
                    }
                }
            }
            Err(e) => {
                fail(&mut report, "monotone", &x, e.to_string());
                fail(&mut report, "second_order", &x, e.to_string());
            }
        }

        let ux: Vec<f64> = (0..m).map(|_| open_unit(&mut rng)).collect();
        let uy: Vec<f64> = ux.iter().map(|&a| a + open_unit(&mut rng) * (1.0 - a)).collect();
        let (x, y) = (frame.zone_point(&ux), frame.zone_point(&uy));
        match (rm.jacobian(&x), rm.jacobian(&y)) {
            (Ok(jx), Ok(jy)) => {
                let (jx, jy) = (frame.jacobian(&jx), frame.jacobian(&jy));
                let slack = 1e-12 * jx.amax().max(1.0);
                let ordered = jy.iter().zip(jx.iter()).all(|(b, a)| *b <= a + slack);
                let strict = jy.iter().zip(jx.iter()).any(|(b, a)| *b < *a);
                if !(ordered && strict) {
                    fail(
                        &mut report,
                        "concave",
                        &y,
                        format!("DT(y) not below DT(x) at x = {x:?}"),
                    );
                }
            }
            (Err(e), _) | (_, Err(e)) => fail(&mut report, "concave", &y, e.to_string()),
        }
    }

    let apex = frame.zone_point(&vec![1.0; m]);
    match rm.apply(&apex) {
        Ok(image) => {
            let z = frame.to_z(&image);
            if !z.iter().zip(&frame.apex).all(|(zi, p)| zi < p) {
                fail(&mut report, "tp_lt_p", &apex, format!("image {image:?}"));
            }
        }
        Err(e) => fail(&mut report, "tp_lt_p", &apex, e.to_string()),
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergesToCorner,
    UniqueLimitCycle,
}

/// Which hypothesis decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    ParallelThresholds,
    SpectralRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisChecks {
    pub monotone_ok: bool,
    pub concave_ok: bool,
    pub second_order_ok: bool,
    pub tp_lt_p: bool,
    pub aligned: bool,
    pub all_switch: bool,
    pub parallel_thresholds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnMapAnalysis {
    pub cycle_id: String,
    pub cycle_domains: Vec<DomainIndex>,
    pub sigma: Vec<Vec<i8>>,
    pub corner: WallPoint,
    pub apex: Vec<f64>,
    /// Spectral radius of `DT` at the corner; absent only when the corner's
    /// orbit leaves the cycle, which can happen in the parallel-threshold case.
    pub lambda: Option<f64>,
    pub lambda_at_margin: bool,
    pub verdict: Verdict,
    pub branch: Branch,
    pub fixed_point: Option<WallPoint>,
    pub iterations: Option<usize>,
    /// Distance from the fixed point to the zone boundary in zone coordinates.
    pub zone_margin: Option<f64>,
    pub period: Option<f64>,
    /// Eigenvalue magnitudes of `DT` at the fixed point, largest first.
    pub floquet_multipliers: Vec<f64>,
    pub checks: AnalysisChecks,
    pub counterexamples: Vec<Counterexample>,
    pub tolerances: Tolerances,
}

/// Iterates the return map from the zone midpoint until successive iterates
/// differ by less than `tol.fixed_point`, then applies one Newton step when
/// it reduces the residual.
pub fn fixed_point(net: &Network, c: &Cycle, tol: &Tolerances) -> Result<(WallPoint, usize)> {
    let zones = zone_signs(net, c)?;
    let frame = ZoneFrame::new(net, c, &zones);
    fixed_point_from(net, c, &frame.midpoint(), tol)
}

/// As [`fixed_point`], starting from `x0` on `W^0`.
pub fn fixed_point_from(net: &Network, c: &Cycle, x0: &[f64], tol: &Tolerances) -> Result<(WallPoint, usize)> {
    let rm = ReturnMap::new(net, c, *tol);
    let mut x = rm.apply(x0)?;
    let mut prev = x0.to_vec();
    let mut iterations = 1;
    while max_diff(&x, &prev) >= tol.fixed_point {
        if iterations >= tol.max_iterations {
            return Err(Error::MaxIterations(iterations));
        }
        let next = rm.apply(&x)?;
        prev = std::mem::replace(&mut x, next);
        iterations += 1;
    }
    let q = newton_polish(&rm, x).unwrap_or_else(|x| x);
    Ok((
        WallPoint {
            wall: WallRef {
                domain: c.domains[0].clone(),
                direction: c.walls[0].pinned,
                threshold: c.exits[0].threshold,
            },
            x: q,
        },
        iterations,
    ))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One Newton step on `T(x) - x`; `Err(x)` returns the input unchanged.
fn newton_polish(rm: &ReturnMap, x: State) -> std::result::Result<State, State> {
    let free = rm.free();
    let residual = |p: &State| -> Option<DVector<f64>> {
        let t = rm.apply(p).ok()?;
        Some(DVector::from_iterator(free.len(), free.iter().map(|&j| t[j] - p[j])))
    };
    let Some(r0) = residual(&x) else { return Err(x) };
    let Ok(jac) = rm.jacobian(&x) else { return Err(x) };
    let m = free.len();
    let Some(delta) = (jac - DMatrix::identity(m, m)).lu().solve(&(-&r0)) else {
        return Err(x);
    };
    let mut y = x.clone();
    for (&j, d) in free.iter().zip(delta.iter()) {
        y[j] += d;
    }
    match residual(&y) {
        Some(r1) if r1.amax() < r0.amax() => Ok(y),
        _ => Err(x),
    }
}

/// Decides the fate of trajectories following cycle `c`.
pub fn certify(net: &Network, c: &Cycle, tol: &Tolerances) -> Result<ReturnMapAnalysis> {
    let props = cycle_properties(net, c, tol);
    if !props.aligned {
        return Err(Error::AssumptionViolated(Assumption::Alignment));
    }
    if !props.all_switch {
        return Err(Error::AssumptionViolated(Assumption::AllVariablesSwitch));
    }
    let zones = zone_signs(net, c)?;
    let (corner, apex) = corner_and_apex(net, c, &zones);
    let frame = ZoneFrame::new(net, c, &zones);
    let rm = ReturnMap::new(net, c, *tol);

    let lambda = match rm.jacobian(&corner.x) {
        Ok(j) => Some(spectral_radius(&j)),
        Err(_) if props.parallel_thresholds => None,
        Err(e) => return Err(e),
    };
    let conditions = condition_checks(net, c, &zones, tol.condition_samples, tol);

    let (verdict, branch, lambda_at_margin) = if props.parallel_thresholds {
        (Verdict::UniqueLimitCycle, Branch::ParallelThresholds, false)
    } else {
        let l = lambda.expect("corner Jacobian exists without parallel thresholds");
        if l > 1.0 + tol.lambda_margin {
            (Verdict::UniqueLimitCycle, Branch::SpectralRadius, false)
        } else {
            let margin = (l - 1.0).abs() <= tol.lambda_margin;
            (Verdict::ConvergesToCorner, Branch::SpectralRadius, margin)
        }
    };

    let mut analysis = ReturnMapAnalysis {
        cycle_id: c.id.clone(),
        cycle_domains: c.domains.clone(),
        sigma: zones.sigma.clone(),
        corner,
        apex,
        lambda,
        lambda_at_margin,
        verdict,
        branch,
        fixed_point: None,
        iterations: None,
        zone_margin: None,
        period: None,
        floquet_multipliers: Vec::new(),
        checks: AnalysisChecks {
            monotone_ok: conditions.monotone_ok,
            concave_ok: conditions.concave_ok,
            second_order_ok: conditions.second_order_ok,
            tp_lt_p: conditions.tp_lt_p,
            aligned: props.aligned,
            all_switch: props.all_switch,
            parallel_thresholds: props.parallel_thresholds,
        },
        counterexamples: conditions.counterexamples,
        tolerances: *tol,
    };
    if verdict == Verdict::UniqueLimitCycle {
        let (q, iterations) = fixed_point_from(net, c, &frame.midpoint(), tol)?;
        let mut multipliers: Vec<f64> = eigenvalues(&rm.jacobian(&q.x)?).iter().map(|z| z.norm()).collect();
        multipliers.sort_by(|a, b| b.total_cmp(a));
        analysis.period = Some(rm.return_time(&q.x)?);
        analysis.zone_margin = Some(frame.margin(&q.x));
        analysis.floquet_multipliers = multipliers;
        analysis.iterations = Some(iterations);
        analysis.fixed_point = Some(q);
    }
    Ok(analysis)
}

/// Random point of the zone of `W^0`, for sampling-based tests and tools.
pub fn random_zone_point<R: Rng>(frame: &ZoneFrame, rng: &mut R) -> State {
    let u: Vec<f64> = frame.apex.iter().map(|_| rng.random_range(0.0..1.0)).collect();
    frame.zone_point(&u)
}
