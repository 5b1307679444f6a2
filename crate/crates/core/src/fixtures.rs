//! Bundled example models.
//!
//! * [`TWO_NEGATIVE_LOOPS`]: three genes, two intertwined negative loops, two
//!   thresholds on `x3`. One deterministic 6-domain cycle with an unstable corner.
//! * [`MIXED_LOOPS`]: three genes with loops of both signs; an 8-domain cycle
//!   through the whole lattice, with self-regulation producing white walls.
//! * [`PARALLEL_THRESHOLDS`]: two genes, `x1` crossed at two distinct
//!   thresholds along the cycle.
//! * [`NEGATIVE_LOOP_2D`]: two-gene negative feedback loop, whose return map
//!   has spectral radius exactly 1 at the corner.

use crate::model::{parse_network, Network};

pub const TWO_NEGATIVE_LOOPS: &str = include_str!("../fixtures/two_negative_loops.json");
pub const MIXED_LOOPS: &str = include_str!("../fixtures/mixed_loops.json");
pub const PARALLEL_THRESHOLDS: &str = include_str!("../fixtures/parallel_thresholds.json");
pub const NEGATIVE_LOOP_2D: &str = include_str!("../fixtures/negative_loop_2d.json");

/// `(name, model text)` for every bundled fixture.
pub const ALL: [(&str, &str); 4] = [
    ("two_negative_loops", TWO_NEGATIVE_LOOPS),
    ("mixed_loops", MIXED_LOOPS),
    ("parallel_thresholds", PARALLEL_THRESHOLDS),
    ("negative_loop_2d", NEGATIVE_LOOP_2D),
];

pub fn two_negative_loops() -> Network {
    parse_network(TWO_NEGATIVE_LOOPS).expect("bundled fixture parses")
}

pub fn mixed_loops() -> Network {
    parse_network(MIXED_LOOPS).expect("bundled fixture parses")
}

pub fn parallel_thresholds() -> Network {
    parse_network(PARALLEL_THRESHOLDS).expect("bundled fixture parses")
}

pub fn negative_loop_2d() -> Network {
    parse_network(NEGATIVE_LOOP_2D).expect("bundled fixture parses")
}

/// [`TWO_NEGATIVE_LOOPS`] with an extra production term for `x1` in domain
/// `010` only, which breaks alignment off the switching direction.
#[cfg(test)]
pub(crate) fn misaligned_two_negative_loops() -> Network {
    let text = TWO_NEGATIVE_LOOPS.replace(
        r#""production": [
        { "rate": 1.3, "when": [{ "var": "x3", "sign": "+", "rank": 1 }] }
      ]"#,
        r#""production": [
        { "rate": 1.3, "when": [{ "var": "x3", "sign": "+", "rank": 1 }] },
        { "rate": 0.2, "when": [{ "var": "x2", "sign": "+", "rank": 1 }, { "var": "x3", "sign": "-", "rank": 1 }] }
      ]"#,
    );
    parse_network(&text).expect("patched fixture parses")
}
