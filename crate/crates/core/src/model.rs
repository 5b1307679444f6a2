//! Network definition, the regular-domain lattice, production rates and focal points.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{classify_wall, WallClass};
use crate::tolerances::Tolerances;

/// Concentration vector, one entry per variable.
pub type State = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// `s+(x_var, theta_var^rank)` or its complement `s-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepLiteral {
    pub variable: usize,
    /// 1-based rank into the variable's interior thresholds.
    pub threshold_rank: usize,
    pub sign: Sign,
}

impl StepLiteral {
    /// Value of the literal on regular domain `a`.
    pub fn eval(&self, a: &DomainIndex) -> bool {
        let above = self.threshold_rank <= a.0[self.variable];
        match self.sign {
            Sign::Plus => above,
            Sign::Minus => !above,
        }
    }
}

/// `rate * product(literals)`; an empty literal list is a constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionTerm {
    pub rate: f64,
    pub literals: Vec<StepLiteral>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    /// Interior thresholds, strictly increasing and positive.
    pub thresholds: Vec<f64>,
    pub upper_bound: f64,
    pub gamma: f64,
    pub production: Vec<ProductionTerm>,
}

/// Integer coordinates of a regular domain: `a_i` in `0..q_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DomainIndex(pub Vec<usize>);

impl DomainIndex {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Neighbor one step along `variable` in direction `sign` (+1 or -1).
    pub fn step(&self, variable: usize, sign: i8) -> DomainIndex {
        let mut c = self.0.clone();
        c[variable] = (c[variable] as isize + sign as isize) as usize;
        DomainIndex(c)
    }
}

impl fmt::Display for DomainIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&c| c < 10) {
            for c in &self.0 {
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl FromStr for DomainIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDomain(s.to_string());
        let s = s.trim();
        if s.is_empty() {
            return Err(bad());
        }
        let coords = if s.contains('.') {
            s.split('.')
                .map(|p| p.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(DomainIndex(coords))
    }
}

impl Serialize for DomainIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DomainIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A validated piecewise-affine network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<VariableSpec>,
}

impl Network {
    /// Checks the structural invariants: names, thresholds, rates, decay
    /// rates and literal references.
    ///
    /// Self-regulating literals are accepted here; [`parse_network`]
    /// additionally rejects models whose self-regulation creates black walls.
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Schema("model has no variables".into()));
        }
        let mut names = HashSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
            let invalid = |reason: &str| Error::InvalidParameter {
                variable: v.name.clone(),
                reason: reason.to_string(),
            };
            if !(v.gamma.is_finite() && v.gamma > 0.0) {
                return Err(invalid("gamma must be positive"));
            }
            if v.thresholds.iter().any(|t| !t.is_finite()) || !v.upper_bound.is_finite() {
                return Err(invalid("thresholds must be finite"));
            }
            let mut prev = 0.0;
            for &t in v.thresholds.iter().chain(std::iter::once(&v.upper_bound)) {
                if t <= prev {
                    return Err(Error::NonIncreasingThresholds(v.name.clone()));
                }
                prev = t;
            }
            for term in &v.production {
                if !(term.rate.is_finite() && term.rate >= 0.0) {
                    return Err(invalid("production rates must be nonnegative"));
                }
                let mut seen = HashSet::new();
                for lit in &term.literals {
                    let Some(target) = variables.get(lit.variable) else {
                        return Err(invalid("literal references an unknown variable"));
                    };
                    if lit.threshold_rank == 0 || lit.threshold_rank > target.thresholds.len() {
                        return Err(invalid(&format!(
                            "threshold rank {} out of range for {:?}",
                            lit.threshold_rank, target.name
                        )));
                    }
                    if !seen.insert((lit.variable, lit.threshold_rank)) {
                        return Err(invalid("term repeats a (variable, rank) pair"));
                    }
                }
            }
        }
        Ok(Self { variables })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    /// Number of variables `n`.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Number of regular segments `q_i` along variable `i`.
    pub fn segments(&self, i: usize) -> usize {
        self.variables[i].thresholds.len() + 1
    }

    /// Element `k` of the extended threshold set `{0, theta^1, ..., theta^q}`.
    pub fn threshold(&self, i: usize, k: usize) -> f64 {
        let v = &self.variables[i];
        if k == 0 {
            0.0
        } else if k <= v.thresholds.len() {
            v.thresholds[k - 1]
        } else {
            v.upper_bound
        }
    }

    /// Lower bounding value of domain `a` in direction `i`.
    pub fn lower(&self, a: &DomainIndex, i: usize) -> f64 {
        self.threshold(i, a.0[i])
    }

    /// Upper bounding value of domain `a` in direction `i`.
    pub fn upper(&self, a: &DomainIndex, i: usize) -> f64 {
        self.threshold(i, a.0[i] + 1)
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.variables[i].gamma
    }

    pub fn check_domain(&self, a: &DomainIndex) -> Result<()> {
        if a.len() != self.dim() || a.0.iter().enumerate().any(|(i, &c)| c >= self.segments(i)) {
            return Err(Error::InvalidDomain(a.to_string()));
        }
        Ok(())
    }

    /// All regular domains in lexicographic order.
    pub fn domains(&self) -> Vec<DomainIndex> {
        // odometer over the lattice, last coordinate fastest
        let mut out = Vec::new();
        let mut cur = vec![0usize; self.dim()];
        loop {
            out.push(DomainIndex(cur.clone()));
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.segments(i) {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    /// Production rates on domain `a`.
    pub fn kappa(&self, a: &DomainIndex) -> Vec<f64> {
        self.variables
            .iter()
            .map(|v| {
                v.production
                    .iter()
                    .filter(|term| term.literals.iter().all(|lit| lit.eval(a)))
                    .fold(0.0, |sum, term| sum + term.rate)
            })
            .collect()
    }

    /// Focal point `kappa(a) / gamma`.
    pub fn focal_point(&self, a: &DomainIndex) -> State {
        self.kappa(a)
            .into_iter()
            .zip(&self.variables)
            .map(|(k, v)| k / v.gamma)
            .collect()
    }

    /// Regular domain containing `x`.
    ///
    /// Fails with [`Error::OnThreshold`] when a coordinate lies within
    /// `tol.threshold` of an interior threshold.
    pub fn domain_of(&self, x: &[f64], tol: &Tolerances) -> Result<DomainIndex> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut coords = Vec::with_capacity(self.dim());
        for (i, (&xi, v)) in x.iter().zip(&self.variables).enumerate() {
            if !xi.is_finite() || xi < 0.0 || xi > v.upper_bound {
                return Err(Error::OutsideBox(i));
            }
            if let Some(&t) = v.thresholds.iter().find(|&&t| (xi - t).abs() <= tol.threshold) {
                return Err(Error::OnThreshold {
                    variable: i,
                    threshold: t,
                });
            }
            coords.push(v.thresholds.iter().filter(|&&t| t < xi).count());
        }
        Ok(DomainIndex(coords))
    }

    /// Genericity and box-invariance report over all regular domains.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut domains = Vec::new();
        let mut issues = Vec::new();
        for a in self.domains() {
            let phi = self.focal_point(&a);
            let mut generic = true;
            let mut in_box = true;
            for (&p, v) in phi.iter().zip(&self.variables) {
                for (rank, &t) in v.thresholds.iter().enumerate() {
                    if (p - t).abs() <= tol.genericity * t {
                        generic = false;
                        issues.push(format!(
                            "focal point on threshold: domain {a}, {} = {p} at threshold rank {}",
                            v.name,
                            rank + 1
                        ));
                    }
                }
                if p > v.upper_bound {
                    in_box = false;
                    issues.push(format!(
                        "focal point outside box: domain {a}, {} = {p} exceeds upper bound {}",
                        v.name, v.upper_bound
                    ));
                }
            }
            domains.push(DomainCheck {
                domain: a,
                focal_point: phi,
                generic,
                in_box,
            });
        }
        ValidationReport {
            ok: issues.is_empty(),
            domains,
            issues,
        }
    }
}

/// Per-domain findings of [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCheck {
    pub domain: DomainIndex,
    pub focal_point: State,
    pub generic: bool,
    pub in_box: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub domains: Vec<DomainCheck>,
    pub issues: Vec<String>,
}

// --- model file -----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    variables: Vec<VariableEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableEntry {
    name: String,
    thresholds: Vec<f64>,
    upper_bound: f64,
    gamma: f64,
    #[serde(default)]
    production: Vec<TermEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    rate: f64,
    #[serde(default)]
    when: Vec<LiteralEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiteralEntry {
    var: String,
    sign: Sign,
    rank: usize,
}

/// Parses and validates a JSON model file.
///
/// Besides the structural checks of [`Network::new`], rejects models in which
/// a variable regulating itself produces a black wall: trajectories reaching
/// such a wall would need sliding-mode (Filippov) solutions.
pub fn parse_network(text: &str) -> Result<Network> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let index: BTreeMap<&str, usize> = file
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let variables = file
        .variables
        .iter()
        .map(|v| {
            let production = v
                .production
                .iter()
                .map(|t| {
                    let literals = t
                        .when
                        .iter()
                        .map(|l| {
                            let variable = *index.get(l.var.as_str()).ok_or_else(|| {
                                Error::Schema(format!("unknown variable {:?} in production of {:?}", l.var, v.name))
                            })?;
                            Ok(StepLiteral {
                                variable,
                                threshold_rank: l.rank,
                                sign: l.sign,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(ProductionTerm { rate: t.rate, literals })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(VariableSpec {
                name: v.name.clone(),
                thresholds: v.thresholds.clone(),
                upper_bound: v.upper_bound,
                gamma: v.gamma,
                production,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let net = Network::new(variables)?;
    reject_black_walls(&net)?;
    Ok(net)
}

fn reject_black_walls(net: &Network) -> Result<()> {
    for (i, v) in net.variables.iter().enumerate() {
        let self_regulated = v.production.iter().any(|t| t.literals.iter().any(|l| l.variable == i));
        if !self_regulated {
            continue;
        }
        for a in net.domains() {
            if a.0[i] + 1 < net.segments(i) && classify_wall(net, &a, i) == WallClass::Black {
                return Err(Error::Autoregulation {
                    variable: v.name.clone(),
                    above: a.step(i, 1),
                    below: a,
                });
            }
        }
    }
    Ok(())
}

/// Serializes a network back into the model file format.
pub fn to_model_json(net: &Network) -> String {
    let file = ModelFile {
        name: None,
        description: None,
        variables: net
            .variables
            .iter()
            .map(|v| VariableEntry {
                name: v.name.clone(),
                thresholds: v.thresholds.clone(),
                upper_bound: v.upper_bound,
                gamma: v.gamma,
                production: v
                    .production
                    .iter()
                    .map(|t| TermEntry {
                        rate: t.rate,
                        when: t
                            .literals
                            .iter()
                            .map(|l| LiteralEntry {
                                var: net.variables[l.variable].name.clone(),
                                sign: l.sign,
                                rank: l.threshold_rank,
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}
