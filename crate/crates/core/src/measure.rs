//! Ground types: discrete target measures, transport costs, samplers for the
//! continuous source measure, dual potentials, and the (unsmoothed) discrete
//! c-transform
//!
//! ```text
//! ψ_c(φ, x) = max_i  φ_i − c(x, y_i)
//! ```
//!
//! Ties in the maximum are always broken towards the smallest atom index.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ weights = 1` for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

pub type Point = Vec<f64>;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub(crate) fn check_probability_vector(field: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::field(field, "must be non-empty"));
    }
    if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::field(
            format!("{field}[{i}]"),
            format!("weight {v} is not a nonnegative finite number"),
        ));
    }
    let total = compensated_sum(w);
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::field(field, format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn check_points(field: &str, pts: &[Point]) -> Result<usize> {
    let dim = pts.first().map(Vec::len).ok_or_else(|| Error::field(field, "must be non-empty"))?;
    if dim == 0 {
        return Err(Error::field(field, "points must have dimension at least 1"));
    }
    for (i, p) in pts.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::field(
                format!("{field}[{i}]"),
                format!("dimension {} differs from {dim}", p.len()),
            ));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::field(format!("{field}[{i}]"), "non-finite coordinate"));
        }
    }
    Ok(dim)
}

/// A discrete probability measure `ν = Σ ν_i δ_{y_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms, raw.weights)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms,
            weights: m.weights,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let dim = check_points("atoms", &atoms)?;
        if weights.len() != atoms.len() {
            return Err(Error::LengthMismatch {
                what: "weights",
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        check_probability_vector("weights", &weights)?;
        Ok(Self { atoms, weights, dim })
    }

    /// Equal weights on the given atoms.
    pub fn uniform(atoms: Vec<Point>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Transport cost between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostSpec {
    /// `‖x − y‖₂^p` with `p ≥ 1`.
    PNormPower { p: f64 },
    /// `‖x − y‖_∞`.
    SupNorm,
}

impl CostSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CostSpec::PNormPower { p } if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::field("cost.p", format!("exponent {p} must be a finite number >= 1")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            CostSpec::PNormPower { p } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                if p == 2.0 {
                    sq
                } else if p == 1.0 {
                    sq.sqrt()
                } else {
                    sq.sqrt().powf(p)
                }
            }
            CostSpec::SupNorm => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// Evaluates `c(x, y)`.
pub fn eval_cost(x: &[f64], y: &[f64], spec: &CostSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    spec.validate()?;
    Ok(spec.eval_unchecked(x, y))
}

/// Costs `c(x, y_i)` for every atom of `nu`.
pub fn cost_row(x: &[f64], nu: &DiscreteMeasure, spec: &CostSpec) -> Result<Vec<f64>> {
    if x.len() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: x.len(),
        });
    }
    Ok(nu.atoms().iter().map(|y| spec.eval_unchecked(x, y)).collect())
}

/// Dual potential `φ ∈ ℝᴺ`, one entry per atom of the target measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::field(format!("phi[{i}]"), "non-finite entry"));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check_against(&self, nu: &DiscreteMeasure) -> Result<()> {
        if self.len() != nu.len() {
            return Err(Error::LengthMismatch {
                what: "potential",
                expected: nu.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl From<Potential> for Vec<f64> {
    fn from(p: Potential) -> Self {
        p.0
    }
}

/// Utilities `u_i = φ_i − c(x, y_i)`.
pub fn utilities(phi: &Potential, x: &[f64], nu: &DiscreteMeasure, cost: &CostSpec) -> Result<Vec<f64>> {
    phi.check_against(nu)?;
    let mut u = cost_row(x, nu, cost)?;
    for (ui, p) in u.iter_mut().zip(phi.values()) {
        *ui = p - *ui;
    }
    Ok(u)
}

/// Maximum of `u` and the smallest index attaining it.
pub fn max_with_index(u: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &v) in u.iter().enumerate() {
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// `ψ_c(φ, x) = max_i φ_i − c(x, y_i)`, returned with the (zero-based)
/// minimum-index maximizer.
pub fn discrete_c_transform(
    phi: &Potential,
    x: &[f64],
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<(f64, usize)> {
    let u = utilities(phi, x, nu, cost)?;
    Ok(max_with_index(&u))
}

/// One-hot subgradient of `ψ_c(·, x)` at `φ`.
pub fn subgradient_indicator(
    phi: &Potential,
    x: &[f64],
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<Vec<f64>> {
    let (_, winner) = discrete_c_transform(phi, x, nu, cost)?;
    let mut p = vec![0.0; nu.len()];
    p[winner] = 1.0;
    Ok(p)
}

/// Description of the continuous source measure `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerSpec {
    /// Standard normal on `ℝᵈ`.
    GaussianStandard { dim: usize, seed: u64 },
    /// Uniform on `[0, 1]ᵈ`.
    HypercubeUniform { dim: usize, seed: u64 },
    /// Finitely supported measure given by points and weights.
    Empirical {
        points: Vec<Point>,
        weights: Vec<f64>,
        seed: u64,
    },
}

impl SamplerSpec {
    pub fn dim(&self) -> usize {
        match self {
            SamplerSpec::GaussianStandard { dim, .. } | SamplerSpec::HypercubeUniform { dim, .. } => *dim,
            SamplerSpec::Empirical { points, .. } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SamplerSpec::GaussianStandard { seed, .. }
            | SamplerSpec::HypercubeUniform { seed, .. }
            | SamplerSpec::Empirical { seed, .. } => *seed,
        }
    }

    /// Same measure, different stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            SamplerSpec::GaussianStandard { seed: s, .. }
            | SamplerSpec::HypercubeUniform { seed: s, .. }
            | SamplerSpec::Empirical { seed: s, .. } => *s = seed,
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SamplerSpec::GaussianStandard { dim, .. } | SamplerSpec::HypercubeUniform { dim, .. } => {
                if *dim == 0 {
                    return Err(Error::field("sampler.dim", "must be at least 1"));
                }
            }
            SamplerSpec::Empirical { points, weights, .. } => {
                check_points("sampler.points", points)?;
                if weights.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        what: "sampler.weights",
                        expected: points.len(),
                        got: weights.len(),
                    });
                }
                check_probability_vector("sampler.weights", weights)?;
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let index = match self {
            SamplerSpec::Empirical { weights, .. } => Some(
                WeightedIndex::new(weights.iter().copied())
                    .map_err(|e| Error::field("sampler.weights", e.to_string()))?,
            ),
            _ => None,
        };
        Ok(Sampler {
            spec: self.clone(),
            rng: ChaCha12Rng::seed_from_u64(self.seed()),
            index,
        })
    }
}

/// A seeded stream of i.i.d. draws from a [`SamplerSpec`].
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    rng: ChaCha12Rng,
    index: Option<WeightedIndex<f64>>,
}

impl Sampler {
    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn next_point(&mut self) -> Point {
        match &self.spec {
            SamplerSpec::GaussianStandard { dim, .. } => {
                (0..*dim).map(|_| self.rng.sample::<f64, _>(StandardNormal)).collect()
            }
            SamplerSpec::HypercubeUniform { dim, .. } => (0..*dim).map(|_| self.rng.random::<f64>()).collect(),
            SamplerSpec::Empirical { points, .. } => {
                let i = self.index.as_ref().expect("empirical sampler has an index").sample(&mut self.rng);
                points[i].clone()
            }
        }
    }

    pub fn draw(&mut self, n: usize) -> Vec<Point> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// Draws `n` points from a fresh stream of `spec`.
pub fn draw(spec: &SamplerSpec, n: usize) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::field("n", "must be at least 1"));
    }
    Ok(spec.sampler()?.draw(n))
}
