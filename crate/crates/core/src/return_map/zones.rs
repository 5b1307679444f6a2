//! Zone sign vectors, corner point and apex of a cycle's first wall.

use serde::Serialize;

use crate::error::{Assumption, Error, Result};
use crate::flow::{WallPoint, WallRef};
use crate::graph::Cycle;
use crate::model::Network;

/// Per wall `W^i`, the sign of `phi^i_j - x_j` shared by every point of the
/// wall reached after one turn of the cycle, for `j != s_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneSigns {
    /// Pinned direction `s_i` of each wall.
    pub exits: Vec<usize>,
    /// `sigma[i]` lists the signs over the free coordinates of `W^i` in
    /// increasing order.
    pub sigma: Vec<Vec<i8>>,
}

impl ZoneSigns {
    /// Sign of free coordinate `j` on wall `i`.
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        let s = self.exits[i];
        assert_ne!(j, s, "pinned coordinate has no zone sign");
        self.sigma[i][if j < s { j } else { j - 1 }]
    }

    /// Signs over all coordinates of wall `i`, `0` at the pinned one.
    pub fn full(&self, i: usize) -> Vec<i8> {
        let mut v = self.sigma[i].clone();
        v.insert(self.exits[i], 0);
        v
    }
}

fn sign_of(value: f64, c: &Cycle, i: usize, j: usize) -> Result<i8> {
    if value > 0.0 {
        Ok(1)
    } else if value < 0.0 {
        Ok(-1)
    } else {
        Err(Error::WallNormalDegeneracy {
            domain: c.domains[i].clone(),
            direction: j,
        })
    }
}

/// Propagates sign vectors around the cycle: crossing into `a^{i+1}` fixes
/// the sign of the previous exit direction, alignment carries the others.
pub fn zone_signs(net: &Network, c: &Cycle) -> Result<ZoneSigns> {
    let n = net.dim();
    let len = c.len();
    let focal: Vec<Vec<f64>> = c.domains.iter().map(|a| net.focal_point(a)).collect();
    let mut delta: Vec<Option<i8>> = vec![None; n];
    let mut walls: Vec<Vec<Option<i8>>> = vec![vec![None; n]; len];
    // two turns determine every coordinate that switches; the third confirms
    for _ in 0..3 {
        for i in 0..len {
            let prev = (i + len - 1) % len;
            let entered = c.exits[prev].variable;
            delta[entered] = Some(sign_of(focal[i][entered] - c.exits[prev].threshold, c, i, entered)?);
            delta[c.exits[i].variable] = Some(c.exits[i].sign);
            walls[i] = delta.clone();
        }
    }
    let exits = c.exit_variables();
    let sigma = walls
        .iter()
        .zip(&exits)
        .map(|(d, &s)| {
            (0..n)
                .filter(|&j| j != s)
                .map(|j| d[j].ok_or(Error::AssumptionViolated(Assumption::AllVariablesSwitch)))
                .collect::<Result<Vec<i8>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZoneSigns { exits, sigma })
}

/// Corner of `W^0` selected by `sigma^0` together with the zone apex `p`
/// (one entry per free coordinate, in increasing order).
///
/// `p_j` is the distance from the corner to the focal coordinate `phi^0_j`,
/// clipped to the wall's extent.
pub fn corner_and_apex(net: &Network, c: &Cycle, z: &ZoneSigns) -> (WallPoint, Vec<f64>) {
    let wall = &c.walls[0];
    let phi = net.focal_point(&c.domains[0]);
    let mut corner = vec![0.0; net.dim()];
    let mut apex = Vec::with_capacity(net.dim() - 1);
    for (j, &(lo, hi)) in wall.bounds.iter().enumerate() {
        if j == wall.pinned {
            corner[j] = lo;
            continue;
        }
        let sigma = z.sign(0, j);
        corner[j] = if sigma > 0 { lo } else { hi };
        apex.push((phi[j] - corner[j]).abs().min(hi - lo));
    }
    let point = WallPoint {
        wall: WallRef {
            domain: c.domains[0].clone(),
            direction: wall.pinned,
            threshold: c.exits[0].threshold,
        },
        x: corner,
    };
    (point, apex)
}
