//! Event-driven simulation and a fixed-step integration oracle.
//!
//! [`run`] jumps from wall to wall with the closed-form exit times of
//! [`crate::flow`], so trajectories carry no integration error. Dense output
//! is reconstructed afterwards by [`sample`]. [`oracle_integrate`] is a
//! deliberately naive RK4 integrator with bisection-refined threshold
//! crossings, used to cross-check [`run`].

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{exit_time, flow_at};
use crate::model::{DomainIndex, Network, State};
use crate::tolerances::Tolerances;

pub const DEFAULT_MAX_EVENTS: usize = 100_000;

/// Entry into a domain; the first event of a trajectory is its start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub domain: DomainIndex,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalReason {
    TMax,
    InteriorEquilibrium,
    /// The trajectory reached a point where two exit times tie.
    SingularDomain,
    MaxEvents,
    /// The flow on both sides of the wall just crossed points into it.
    BlackWall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub t_end: f64,
    pub final_state: State,
    pub terminal: TerminalReason,
}

impl Trajectory {
    /// Domain-entry events after the start.
    pub fn crossings(&self) -> &[Event] {
        &self.events[1..]
    }

    /// Exact state at time `t` in `[0, t_end]`.
    pub fn state_at(&self, net: &Network, t: f64) -> State {
        let k = self.events.partition_point(|e| e.t <= t).max(1) - 1;
        let e = &self.events[k];
        flow_at(net, &e.domain, &e.state, t - e.t)
    }

    pub fn domain_sequence(&self) -> Vec<DomainIndex> {
        self.events.iter().map(|e| e.domain.clone()).collect()
    }
}

/// Simulates from `x0`, which must lie strictly inside a regular domain.
pub fn run(net: &Network, x0: &[f64], t_max: f64, max_events: usize, tol: &Tolerances) -> Result<Trajectory> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    if max_events == 0 {
        return Err(Error::InvalidArgument("max_events must be positive".into()));
    }
    let mut domain = net.domain_of(x0, tol)?;
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut events = vec![Event {
        t,
        domain: domain.clone(),
        state: x.clone(),
    }];
    let mut last_wall: Option<usize> = None;
    let finish = |events, t_end, final_state, terminal| Trajectory {
        events,
        t_end,
        final_state,
        terminal,
    };
    loop {
        let ev = match exit_time(net, &domain, &x, tol) {
            Ok(ev) => ev,
            Err(Error::InteriorEquilibrium(_)) => {
                let end = flow_at(net, &domain, &x, t_max - t);
                return Ok(finish(events, t_max, end, TerminalReason::InteriorEquilibrium));
            }
            Err(Error::Codimension2Exit { .. }) => {
                return Ok(finish(events, t, x, TerminalReason::SingularDomain));
            }
            Err(e) => return Err(e),
        };
        if ev.tau == 0.0 && last_wall == Some(ev.direction) {
            return Ok(finish(events, t, x, TerminalReason::BlackWall));
        }
        if t + ev.tau > t_max {
            let end = flow_at(net, &domain, &x, t_max - t);
            return Ok(finish(events, t_max, end, TerminalReason::TMax));
        }
        t += ev.tau;
        domain = domain.step(ev.direction, ev.sign);
        x = ev.point.x;
        last_wall = Some(ev.direction);
        events.push(Event {
            t,
            domain: domain.clone(),
            state: x.clone(),
        });
        if events.len() > max_events {
            return Ok(finish(events, t, x, TerminalReason::MaxEvents));
        }
    }
}

/// Independent simulations, one per start point, computed in parallel.
pub fn run_batch(
    net: &Network,
    starts: &[State],
    t_max: f64,
    max_events: usize,
    tol: &Tolerances,
) -> Vec<Result<Trajectory>> {
    starts
        .par_iter()
        .map(|x0| run(net, x0, t_max, max_events, tol))
        .collect()
}

/// Samples on the grid `0, dt, 2 dt, ...` up to `t_end`, plus `t_end` itself
/// when the grid misses it.
pub fn sample(traj: &Trajectory, net: &Network, dt: f64) -> Vec<(f64, State)> {
    assert!(dt > 0.0, "sampling step must be positive");
    let steps = (traj.t_end / dt + 1e-9).floor() as usize;
    let mut out: Vec<(f64, State)> = (0..=steps)
        .map(|k| {
            let t = (k as f64 * dt).min(traj.t_end);
            (t, traj.state_at(net, t))
        })
        .collect();
    let last = out.last().map_or(0.0, |s| s.0);
    if traj.t_end - last > 1e-9 * dt {
        out.push((traj.t_end, traj.final_state.clone()));
    }
    out
}

/// Wall crossing found by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCrossing {
    pub t: f64,
    pub domain: DomainIndex,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub samples: Vec<(f64, State)>,
    pub crossings: Vec<OracleCrossing>,
}

fn rk4_step(kappa: &[f64], gamma: &[f64], y: &[f64], h: f64) -> State {
    let f = |v: &[f64]| -> State { v.iter().enumerate().map(|(i, &vi)| kappa[i] - gamma[i] * vi).collect() };
    let shift = |a: &[f64], k: &[f64], c: f64| -> State { a.iter().zip(k).map(|(x, d)| x + c * d).collect() };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, 0.5 * h));
    let k3 = f(&shift(y, &k2, 0.5 * h));
    let k4 = f(&shift(y, &k3, h));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// First coordinate of `y` outside the closure of domain `a`, with the side.
fn departure(net: &Network, a: &DomainIndex, y: &[f64]) -> Option<(usize, i8)> {
    (0..y.len()).find_map(|i| {
        if y[i] > net.upper(a, i) {
            Some((i, 1))
        } else if y[i] < net.lower(a, i) {
            Some((i, -1))
        } else {
            None
        }
    })
}

/// Classic RK4 with step `h` on `dx/dt = kappa(a) - Gamma x`, `a` being the
/// current domain. A step that leaves the domain is shortened by 50
/// bisections to locate the crossing, after which `kappa` switches.
/// Samples are recorded roughly every `sample_dt`. Fails with
/// [`Error::MaxIterations`] after [`DEFAULT_MAX_EVENTS`] crossings.
pub fn oracle_integrate(net: &Network, x0: &[f64], t_max: f64, h: f64, sample_dt: f64) -> Result<OracleRun> {
    let tol = Tolerances::default();
    let mut domain = net.domain_of(x0, &tol)?;
    let gamma: Vec<f64> = (0..net.dim()).map(|i| net.gamma(i)).collect();
    let mut kappa = net.kappa(&domain);
    let mut y = x0.to_vec();
    let mut t = 0.0;
    let mut samples = vec![(t, y.clone())];
    let mut crossings = Vec::new();
    let mut next_sample = sample_dt;
    while t < t_max {
        let step = h.min(t_max - t);
        let trial = rk4_step(&kappa, &gamma, &y, step);
        match departure(net, &domain, &trial) {
            None => {
                for (i, &v) in trial.iter().enumerate() {
                    if net.variables()[i].thresholds.contains(&v) {
                        return Err(Error::OnThreshold {
                            variable: i,
                            threshold: v,
                        });
                    }
                }
                y = trial;
                t += step;
            }
            Some(_) => {
                let (mut lo, mut hi) = (0.0, step);
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if departure(net, &domain, &rk4_step(&kappa, &gamma, &y, mid)).is_some() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let mut crossed = rk4_step(&kappa, &gamma, &y, hi);
                let (i, sign) = departure(net, &domain, &crossed).expect("bracket end lies outside");
                crossed[i] = if sign > 0 {
                    net.upper(&domain, i)
                } else {
                    net.lower(&domain, i)
                };
                domain = domain.step(i, sign);
                kappa = net.kappa(&domain);
                y = crossed;
                t += hi;
                if crossings.len() == DEFAULT_MAX_EVENTS {
                    return Err(Error::MaxIterations(DEFAULT_MAX_EVENTS));
                }
                crossings.push(OracleCrossing {
                    t,
                    domain: domain.clone(),
                    state: y.clone(),
                });
            }
        }
        if t >= next_sample {
            samples.push((t, y.clone()));
            while next_sample <= t {
                next_sample += sample_dt;
            }
        }
    }
    Ok(OracleRun { samples, crossings })
}

/// Successive crossings of one wall and their Cauchy differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCycleCheck {
    pub converged: bool,
    pub crossing_times: Vec<f64>,
    pub crossing_points: Vec<State>,
    /// Max-norm distance between consecutive crossing points.
    pub deltas: Vec<f64>,
}

/// Crossings from `wall.0` into `wall.1`; converged when the last two
/// differ by less than `tol` in max norm.
pub fn detect_limit_cycle(traj: &Trajectory, wall: (&DomainIndex, &DomainIndex), tol: f64) -> Result<LimitCycleCheck> {
    let (crossing_times, crossing_points): (Vec<f64>, Vec<State>) = traj
        .events
        .windows(2)
        .filter(|w| &w[0].domain == wall.0 && &w[1].domain == wall.1)
        .map(|w| (w[1].t, w[1].state.clone()))
        .unzip();
    if crossing_points.len() < 3 {
        return Err(Error::InsufficientCrossings(crossing_points.len()));
    }
    let deltas: Vec<f64> = crossing_points
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    Ok(LimitCycleCheck {
        converged: *deltas.last().expect("at least two deltas") < tol,
        crossing_times,
        crossing_points,
        deltas,
    })
}

/// CSV with header `t,x1,...,xn`, 17 significant digits per value.
pub fn write_csv<W: Write>(samples: &[(f64, State)], mut out: W) -> std::io::Result<()> {
    let n = samples.first().map_or(0, |s| s.1.len());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (t, x) in samples {
        let mut line = format!("{t:.16e}");
        for v in x {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Events as a JSON list of `{t, domain, state}`.
pub fn events_json(traj: &Trajectory) -> String {
    serde_json::to_string_pretty(&traj.events).expect("events serialize")
}
