//! Knapsack-polytope volumes recovered as the minimizer of `t ↦ W_c(μ, ν_t)`.
//!
//! `μ` is the Lebesgue measure on `[0,1]ᵈ` and `ν_t = t δ_{y₁} + (1−t) δ_{y₂}`
//! with `y₁ = 0` and `y₂ = 2bw/‖w‖²`; the cost is `‖x − y‖₂ᵖ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{compensated_sum, draw, SamplerSpec};

const CHUNK: usize = 4096;
const GOLDEN_TOL: f64 = 1e-10;
const MAX_GRID_DIM: usize = 3;

/// Knapsack polytope `{x ∈ [0,1]ᵈ : wᵀx ≤ b}` together with the cost exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(default = "default_exponent")]
    pub p: f64,
}

fn default_exponent() -> f64 {
    2.0
}

impl KnapsackInstance {
    pub fn new(w: Vec<f64>, b: f64, p: f64) -> Result<Self> {
        let inst = Self { w, b, p };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::field("w", "must have at least one entry"));
        }
        if self.w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::field("w", "entries must be finite and nonnegative"));
        }
        if !self.w.iter().any(|v| *v > 0.0) {
            return Err(Error::field("w", "at least one entry must be positive"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::field("b", format!("{} must be positive and finite", self.b)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::field("p", format!("{} must be at least 1", self.p)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// The two atoms `y₁ = 0` and `y₂ = 2bw/‖w‖²`.
    pub fn atoms(&self) -> (Vec<f64>, Vec<f64>) {
        let sq: f64 = self.w.iter().map(|v| v * v).sum();
        let y2 = self.w.iter().map(|v| 2.0 * self.b * v / sq).collect();
        (vec![0.0; self.dim()], y2)
    }

    /// Closed-form volume for `d ≤ 2`, `None` otherwise.
    pub fn exact_volume(&self) -> Option<f64> {
        match self.w.as_slice() {
            [w] => Some((self.b / w).min(1.0)),
            [w1, w2] => Some(area_2d(*w1, *w2, self.b)),
            _ => None,
        }
    }

    fn cost(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if self.p == 2.0 {
            sq
        } else {
            sq.sqrt().powf(self.p)
        }
    }
}

/// Area of `{x ∈ [0,1]² : w₁x₁ + w₂x₂ ≤ b}`.
fn area_2d(w1: f64, w2: f64, b: f64) -> f64 {
    if w1 == 0.0 {
        return (b / w2).min(1.0);
    }
    if w2 == 0.0 {
        return (b / w1).min(1.0);
    }
    // ∫₀¹ clamp((b − w₁x)/w₂, 0, 1) dx via the antiderivative of the ramp
    let ramp = |s: f64| s.max(0.0).powi(2) / 2.0;
    let g = |x: f64| (ramp(b - w1 * x) - ramp(b - w2 - w1 * x)) / (w1 * w2);
    (g(0.0) - g(1.0)).clamp(0.0, 1.0)
}

/// Quadrature rule for integrals against the Lebesgue measure on `[0,1]ᵈ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuadratureSpec {
    /// Midpoint rule with `m` nodes per axis.
    Grid { m: usize },
    /// `n` uniform draws from the seeded hypercube sampler.
    MonteCarlo { n: usize, seed: u64 },
}

impl QuadratureSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            QuadratureSpec::Grid { m } => {
                if m == 0 {
                    return Err(Error::field("m", "must be positive"));
                }
                if dim > MAX_GRID_DIM {
                    return Err(Error::field("quadrature", format!("grid rule supports d ≤ 3, got d = {dim}")));
                }
                let nodes = (m as f64).powi(dim as i32);
                if nodes > 1e9 {
                    return Err(Error::TooLarge(format!("{nodes} grid nodes")));
                }
                Ok(())
            }
            QuadratureSpec::MonteCarlo { n, .. } => {
                if n == 0 {
                    Err(Error::field("n", "must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Nodes of the rule; all carry the same weight.
    pub fn nodes(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        self.validate(dim)?;
        match *self {
            QuadratureSpec::Grid { m } => {
                let total = m.pow(dim as u32);
                Ok((0..total)
                    .map(|mut k| {
                        (0..dim)
                            .map(|_| {
                                let i = k % m;
                                k /= m;
                                (i as f64 + 0.5) / m as f64
                            })
                            .collect()
                    })
                    .collect())
            }
            QuadratureSpec::MonteCarlo { n, seed } => draw(&SamplerSpec::HypercubeUniform { dim, seed }, n),
        }
    }

    pub fn label(&self) -> String {
        match self {
            QuadratureSpec::Grid { m } => format!("grid:{m}"),
            QuadratureSpec::MonteCarlo { n, seed } => format!("monte-carlo:{n}:{seed}"),
        }
    }
}

/// Mean of `values` with a fixed chunking, so the result does not depend on
/// the thread count.
fn parallel_mean(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| compensated_sum(&c.iter().map(|v| f(*v)).collect::<Vec<_>>()))
        .collect();
    compensated_sum(&partial) / values.len() as f64
}

/// Precomputed semi-dual of the two-atom problem for a fixed quadrature.
#[derive(Debug, Clone)]
pub struct TwoPointDual {
    /// `c(x, y₁) − c(x, y₂)` at every node.
    diff: Vec<f64>,
    mean_c2: f64,
    range: f64,
}

impl TwoPointDual {
    pub fn new(inst: &KnapsackInstance, quad: &QuadratureSpec) -> Result<Self> {
        inst.validate()?;
        let nodes = quad.nodes(inst.dim())?;
        let (y1, y2) = inst.atoms();
        let pairs: Vec<(f64, f64)> = nodes.par_iter().map(|x| (inst.cost(x, &y1), inst.cost(x, &y2))).collect();
        let diff: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
        let c2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let max_cost = pairs.iter().fold(0.0f64, |m, (a, b)| m.max(*a).max(*b));
        Ok(Self {
            mean_c2: parallel_mean(&c2, |v| v),
            diff,
            range: 2.0 * max_cost,
        })
    }

    /// Dual objective at `φ = (Δ, 0)` for mass `t` on `y₁`.
    pub fn objective(&self, t: f64, delta: f64) -> f64 {
        t * delta + self.mean_c2 - parallel_mean(&self.diff, |d| (delta - d).max(0.0))
    }

    /// Maximizes the objective over `Δ ∈ [−D, D]` by golden-section search.
    pub fn value(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain { what: "t", value: t });
        }
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (-self.range, self.range);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (self.objective(t, c), self.objective(t, d));
        while b - a > GOLDEN_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = self.objective(t, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = self.objective(t, d);
            }
        }
        let candidates = [(fc, c), (fd, d), (self.objective(t, a), a), (self.objective(t, b), b)];
        let best = candidates.into_iter().fold((f64::NEG_INFINITY, 0.0), |m, v| if v.0 > m.0 { v } else { m });
        Ok(best)
    }
}

/// `W_c(μ, t δ_{y₁} + (1−t) δ_{y₂})` with `μ` replaced by the quadrature rule.
pub fn wc_two_point(inst: &KnapsackInstance, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(TwoPointDual::new(inst, quad)?.value(t)?.0)
}

/// Output of [`binary_search_min`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub t: f64,
    pub calls: usize,
    /// Number of halvings `L = ⌈log₂(1/δ)⌉ + 1`.
    pub levels: u32,
}

/// Number of halvings for accuracy `δ`.
pub fn search_levels(delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain { what: "delta", value: delta });
    }
    Ok((1.0 / delta).log2().ceil() as u32 + 1)
}

/// Binary search for the minimizer of a strictly convex `g` on `[0,1]`.
///
/// Searches the grid `t_l = l/2ᴸ` for the last index whose forward difference
/// `g(t_l) − g(t_{l−1})` is nonpositive, spending exactly `2L` oracle calls.
/// With an exact oracle the result is within `δ` of the minimizer. If `g` is
/// only known up to `ε`, the result is within `2δ` provided `4ε` is below every
/// nonzero grid difference; this condition is not checked.
pub fn binary_search_min<G>(mut g: G, delta: f64) -> Result<SearchResult>
where
    G: FnMut(f64) -> Result<f64>,
{
    let levels = search_levels(delta)?;
    let size = 1u64 << levels;
    let grid = |l: u64| l as f64 / size as f64;
    let mut calls = 0;
    let mut diff = |l: u64, calls: &mut usize| -> Result<f64> {
        *calls += 2;
        Ok(g(grid(l))? - g(grid(l - 1))?)
    };
    let (mut lo, mut hi) = (0u64, size);
    let mut lo_nonpositive = true;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if diff(mid, &mut calls)? <= 0.0 {
            lo = mid;
            lo_nonpositive = true;
        } else {
            hi = mid;
        }
    }
    let l = if lo_nonpositive { lo } else { hi };
    Ok(SearchResult {
        t: grid(l),
        calls,
        levels,
    })
}

/// Volume estimate of the knapsack polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub instance: KnapsackInstance,
    pub quadrature: QuadratureSpec,
    pub delta: f64,
    pub t_hat: f64,
    pub calls: usize,
    pub exact: Option<f64>,
}

impl VolumeEstimate {
    pub const CSV_HEADER: &'static str = "w,b,exact,t_hat,delta,quadrature,calls";

    pub fn csv_row(&self) -> String {
        let w: Vec<String> = self.instance.w.iter().map(|v| v.to_string()).collect();
        format!(
            "{},{},{},{},{},{},{}",
            w.join(";"),
            self.instance.b,
            self.exact.map(|v| v.to_string()).unwrap_or_default(),
            self.t_hat,
            self.delta,
            self.quadrature.label(),
            self.calls
        )
    }
}

/// Recovers `Vol(P(w,b))` as the minimizer of `t ↦ W_c(μ, ν_t)`.
pub fn knapsack_volume_via_ot(inst: &KnapsackInstance, delta: f64, quad: &QuadratureSpec) -> Result<VolumeEstimate> {
    let dual = TwoPointDual::new(inst, quad)?;
    let r = binary_search_min(|t| dual.value(t).map(|v| v.0), delta)?;
    Ok(VolumeEstimate {
        instance: inst.clone(),
        quadrature: *quad,
        delta,
        t_hat: r.t,
        calls: r.calls,
        exact: inst.exact_volume(),
    })
}
