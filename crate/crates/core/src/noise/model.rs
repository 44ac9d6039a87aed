//! Marginal ambiguity sets generated by a single increasing function `F`.
//!
//! Every marginal is obtained from the generating function through
//!
//! ```text
//! F_i(s) = min{1, max{0, 1 − η_i F(−s)}}
//! ```
//!
//! and the induced divergence generator is `f(s) = ∫₀ˢ F⁻¹(t) dt`. The five
//! supported families are
//!
//! | kind        | F(s)                                              | f(s)                                  |
//! |-------------|---------------------------------------------------|---------------------------------------|
//! | exponential | exp(s/λ − 1)                                      | λ s log s                             |
//! | uniform     | s/(2λ) + 1/2                                      | λ (s² − s)                            |
//! | pareto      | (s(q−1)/(λq) + 1/q)^{1/(q−1)}                     | λ (s^q − s)/(q − 1)                   |
//! | hyperbolic  | sinh(s/λ − k), k = √2 − 1 − asinh 1               | λ (s asinh s − √(s²+1) + 1 + k s)     |
//! | tdist       | N/2 (1 + (s − a) / √(λ² + (s − a)²)), a = λ√(N−1) | −λ √(s(N − s)) + λ s √(N−1), s ≤ N    |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::check_probability_vector;

/// Offset of the hyperbolic-cosine generating function, `√2 − 1 − asinh(1)`.
pub fn hyperbolic_offset() -> f64 {
    std::f64::consts::SQRT_2 - 1.0 - 1f64.asinh()
}

/// Family of the marginal generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Exponential,
    Uniform,
    Pareto { q: f64 },
    Hyperbolic,
    TDist,
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::Exponential => "exponential",
            ModelKind::Uniform => "uniform",
            ModelKind::Pareto { .. } => "pareto",
            ModelKind::Hyperbolic => "hyperbolic",
            ModelKind::TDist => "tdist",
        }
    }
}

/// A Fréchet (marginal) ambiguity set: generating family, smoothing weight
/// `λ > 0` and strictly positive reference weights `η ∈ Δᴺ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct MarginalModel {
    kind: ModelKind,
    lambda: f64,
    eta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    kind: String,
    lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    eta: Vec<f64>,
}

impl TryFrom<RawModel> for MarginalModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        let kind = match raw.kind.as_str() {
            "exponential" => ModelKind::Exponential,
            "uniform" => ModelKind::Uniform,
            "pareto" => ModelKind::Pareto {
                q: raw.q.ok_or_else(|| Error::field("q", "required for the pareto model"))?,
            },
            "hyperbolic" => ModelKind::Hyperbolic,
            "tdist" => ModelKind::TDist,
            other => return Err(Error::field("kind", format!("unknown model kind `{other}`"))),
        };
        MarginalModel::new(kind, raw.lambda, raw.eta)
    }
}

impl From<MarginalModel> for RawModel {
    fn from(m: MarginalModel) -> Self {
        RawModel {
            kind: m.kind.tag().to_string(),
            lambda: m.lambda,
            q: match m.kind {
                ModelKind::Pareto { q } => Some(q),
                _ => None,
            },
            eta: m.eta,
        }
    }
}

impl MarginalModel {
    pub fn new(kind: ModelKind, lambda: f64, eta: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::field("lambda", format!("{lambda} must be positive and finite")));
        }
        if let ModelKind::Pareto { q } = kind {
            if !(q > 0.0 && q.is_finite()) || q == 1.0 {
                return Err(Error::field("q", format!("{q} must be positive, finite and different from 1")));
            }
        }
        check_probability_vector("eta", &eta)?;
        if let Some(i) = eta.iter().position(|&e| e <= 0.0) {
            return Err(Error::field(format!("eta[{i}]"), "reference weights must be strictly positive"));
        }
        Ok(Self { kind, lambda, eta })
    }

    /// Model with uniform reference weights `η_i = 1/n`.
    pub fn with_uniform_eta(kind: ModelKind, lambda: f64, n: usize) -> Result<Self> {
        Self::new(kind, lambda, vec![1.0 / n.max(1) as f64; n.max(1)])
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    fn n(&self) -> f64 {
        self.eta.len() as f64
    }

    fn tdist_shift(&self) -> f64 {
        self.lambda * (self.n() - 1.0).max(0.0).sqrt()
    }

    /// Open interval of arguments on which `F` is finite and strictly increasing.
    fn cdf_domain(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Pareto { q } if q > 1.0 => (-self.lambda / (q - 1.0), f64::INFINITY),
            ModelKind::Pareto { q } => (f64::NEG_INFINITY, self.lambda / (1.0 - q)),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Open range of `F`, i.e. the arguments accepted by [`Self::generating_quantile`].
    pub fn cdf_range(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Exponential | ModelKind::Pareto { .. } => (0.0, f64::INFINITY),
            ModelKind::Uniform | ModelKind::Hyperbolic => (f64::NEG_INFINITY, f64::INFINITY),
            ModelKind::TDist => (0.0, self.n()),
        }
    }

    /// The generating function `F(s)`.
    pub fn generating_cdf(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.cdf_domain();
        let inside = match self.kind {
            // the lower end of a pareto q > 1 domain maps to F = 0
            ModelKind::Pareto { q } if q > 1.0 => s >= lo,
            _ => s > lo && s < hi,
        };
        if !inside || s.is_nan() {
            return Err(Error::Domain {
                what: "generating cdf",
                value: s,
            });
        }
        Ok(self.cdf_unchecked(s))
    }

    fn cdf_unchecked(&self, s: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            ModelKind::Exponential => (s / lam - 1.0).exp(),
            ModelKind::Uniform => s / (2.0 * lam) + 0.5,
            ModelKind::Pareto { q } => {
                let base = s * (q - 1.0) / (lam * q) + 1.0 / q;
                base.max(0.0).powf(1.0 / (q - 1.0))
            }
            ModelKind::Hyperbolic => (s / lam - hyperbolic_offset()).sinh(),
            ModelKind::TDist => {
                let z = s - self.tdist_shift();
                0.5 * self.n() * (1.0 + z / lam.hypot(z))
            }
        }
    }

    /// `F` continued to the whole real line: `0` below a bounded-below
    /// domain and `+∞` above a bounded-above one.
    pub(crate) fn cdf_extended(&self, s: f64) -> f64 {
        let (lo, hi) = self.cdf_domain();
        if s <= lo {
            0.0
        } else if s >= hi {
            f64::INFINITY
        } else {
            self.cdf_unchecked(s)
        }
    }

    /// The inverse `F⁻¹(v)` for `v` in the open range of `F`.
    pub fn generating_quantile(&self, v: f64) -> Result<f64> {
        let (lo, hi) = self.cdf_range();
        if !(v > lo && v < hi) {
            return Err(Error::Domain {
                what: "generating quantile",
                value: v,
            });
        }
        Ok(self.quantile_unchecked(v))
    }

    fn quantile_unchecked(&self, v: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            ModelKind::Exponential => lam * (v.ln() + 1.0),
            ModelKind::Uniform => lam * (2.0 * v - 1.0),
            ModelKind::Pareto { q } => lam * (q * v.powf(q - 1.0) - 1.0) / (q - 1.0),
            ModelKind::Hyperbolic => lam * (v.asinh() + hyperbolic_offset()),
            ModelKind::TDist => {
                let w = 2.0 * v / self.n() - 1.0;
                self.tdist_shift() + lam * w / ((1.0 - w) * (1.0 + w)).sqrt()
            }
        }
    }

    /// Derivative `F′` evaluated at `F⁻¹(v)`.
    pub(crate) fn cdf_slope_at_level(&self, v: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            ModelKind::Exponential => v / lam,
            ModelKind::Uniform => 0.5 / lam,
            ModelKind::Pareto { q } => v.powf(2.0 - q) / (lam * q),
            ModelKind::Hyperbolic => (1.0 + v * v).sqrt() / lam,
            ModelKind::TDist => {
                let w = 2.0 * v / self.n() - 1.0;
                let c = (1.0 - w * w).max(0.0);
                self.n() * c * c.sqrt() / (2.0 * lam)
            }
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.eta.len() {
            return Err(Error::LengthMismatch {
                what: "atom index",
                expected: self.eta.len(),
                got: i,
            });
        }
        Ok(())
    }

    /// Marginal distribution function `F_i(s)`.
    pub fn marginal_cdf(&self, i: usize, s: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok((1.0 - self.eta[i] * self.cdf_extended(-s)).clamp(0.0, 1.0))
    }

    /// Marginal quantile `F_i⁻¹(t) = −F⁻¹((1 − t)/η_i)` for `t ∈ (0, 1)`.
    pub fn marginal_quantile(&self, i: usize, t: f64) -> Result<f64> {
        self.check_index(i)?;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain {
                what: "marginal quantile level",
                value: t,
            });
        }
        let v = (1.0 - t) / self.eta[i];
        let (lo, hi) = self.cdf_range();
        if v > lo && v < hi {
            Ok(-self.quantile_unchecked(v))
        } else {
            Err(Error::InfiniteQuantile { index: i, level: t })
        }
    }

    /// Divergence generator `f(s) = ∫₀ˢ F⁻¹(t) dt` for `s ≥ 0`; `+∞` outside
    /// the effective domain.
    pub fn divergence_generator_value(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain {
                what: "divergence generator",
                value: s,
            });
        }
        let lam = self.lambda;
        Ok(match self.kind {
            ModelKind::Exponential => {
                if s == 0.0 {
                    0.0
                } else {
                    lam * s * s.ln()
                }
            }
            ModelKind::Uniform => lam * (s * s - s),
            ModelKind::Pareto { q } => lam * (s.powf(q) - s) / (q - 1.0),
            ModelKind::Hyperbolic => {
                // 1 − √(s²+1) written without cancellation
                let one_minus_root = -(s * s) / ((s * s + 1.0).sqrt() + 1.0);
                lam * (s * s.asinh() + one_minus_root + hyperbolic_offset() * s)
            }
            ModelKind::TDist => {
                let n = self.n();
                if s > n {
                    f64::INFINITY
                } else {
                    s * self.tdist_shift() - lam * (s * (n - s)).max(0.0).sqrt()
                }
            }
        })
    }

    /// `f′(s) = F⁻¹(s)`.
    pub fn divergence_generator_slope(&self, s: f64) -> Result<f64> {
        self.generating_quantile(s)
    }

    /// `D_f(p ‖ η) = Σ η_i f(p_i / η_i)`.
    pub fn discrete_f_divergence(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.eta.len() {
            return Err(Error::LengthMismatch {
                what: "probability vector",
                expected: self.eta.len(),
                got: p.len(),
            });
        }
        let mut total = 0.0;
        for (&pi, &ei) in p.iter().zip(&self.eta) {
            total += ei * self.divergence_generator_value(pi.max(0.0) / ei)?;
        }
        Ok(total)
    }

    /// CVaR-type integral `∫_{1−p}^1 F_i⁻¹(t) dt = −η_i f(p/η_i)`, with the
    /// boundary value `0` at `p = 0`.
    pub fn upper_tail_integral(&self, i: usize, p: f64) -> Result<f64> {
        self.check_index(i)?;
        if p <= 0.0 {
            return Ok(0.0);
        }
        Ok(-self.eta[i] * self.divergence_generator_value(p / self.eta[i])?)
    }

    /// Error bound between the smoothed and unsmoothed problems:
    /// `max_i |η_i f(1/η_i) + f(0) Σ_{k≠i} η_k|` (the minimum of `D_f` over
    /// the simplex is zero because `f(1) = 0`).
    pub fn approximation_bound(&self) -> f64 {
        let f0 = self.divergence_generator_value(0.0).unwrap_or(f64::INFINITY);
        self.eta
            .iter()
            .map(|&e| {
                let vertex = e * self.divergence_generator_value(1.0 / e).unwrap_or(f64::INFINITY);
                (vertex + f0 * (1.0 - e)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Common Lipschitz constant of `τ ↦ 1 − F_i(−u_i − τ)`, when it exists.
    ///
    /// The exponential bound `1/λ` holds because the slope `η_i F′ = η_i F/λ`
    /// is only active while `η_i F ≤ 1`. Pareto with `q > 2` has an unbounded
    /// slope at the lower end of its support and returns `None`.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        let lam = self.lambda;
        let emax = self.eta.iter().copied().fold(0.0, f64::max);
        match self.kind {
            ModelKind::Exponential => Some(1.0 / lam),
            ModelKind::Uniform => Some(emax / (2.0 * lam)),
            ModelKind::Pareto { q } if q <= 2.0 => Some(
                self.eta
                    .iter()
                    .map(|&e| e.powf(q - 1.0) / (lam * q))
                    .fold(0.0, f64::max),
            ),
            ModelKind::Pareto { .. } => None,
            ModelKind::Hyperbolic => Some((1.0 + emax * emax).sqrt() / lam),
            ModelKind::TDist => Some(emax * self.n() / (2.0 * lam)),
        }
    }

    /// Bracket resolution that keeps every marginal probability within
    /// `ε/√N` of its value at the root.
    pub fn tau_resolution(&self, eps: f64) -> f64 {
        let per_atom = eps / self.n().sqrt();
        match (self.lipschitz_constant(), self.kind) {
            (Some(l), _) => per_atom / l,
            (None, ModelKind::Pareto { q }) => {
                // (a s + b)^α with α = 1/(q−1) < 1 is α-Hölder with constant a^α
                self.eta
                    .iter()
                    .map(|&e| (per_atom / e).powf(q - 1.0) * self.lambda * q / (q - 1.0))
                    .fold(f64::INFINITY, f64::min)
            }
            (None, _) => unreachable!("only pareto q > 2 lacks a Lipschitz constant"),
        }
    }

    /// Generalized self-concordance constant `sup |F_i″| / F_i′` when known.
    pub fn self_concordance_constant(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Exponential | ModelKind::Hyperbolic => Some(1.0 / self.lambda),
            // any M > 0 works for affine marginals
            ModelKind::Uniform => Some(0.0),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_models(n: usize) -> Vec<MarginalModel> {
        let eta: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let total: f64 = eta.iter().sum();
        let eta: Vec<f64> = eta.iter().map(|e| e / total).collect();
        vec![
            MarginalModel::new(ModelKind::Exponential, 0.7, eta.clone()).unwrap(),
            MarginalModel::new(ModelKind::Uniform, 1.3, eta.clone()).unwrap(),
            MarginalModel::new(ModelKind::Pareto { q: 1.5 }, 0.9, eta.clone()).unwrap(),
            MarginalModel::new(ModelKind::Pareto { q: 0.5 }, 0.9, eta.clone()).unwrap(),
            MarginalModel::new(ModelKind::Pareto { q: 3.0 }, 0.9, eta.clone()).unwrap(),
            MarginalModel::new(ModelKind::Hyperbolic, 0.4, eta).unwrap(),
            MarginalModel::with_uniform_eta(ModelKind::TDist, 0.8, n).unwrap(),
        ]
    }

    #[test]
    fn table_examples() {
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 1.0, 2).unwrap();
        assert_eq!(m.generating_cdf(1.0).unwrap(), 1.0);
        let m = MarginalModel::with_uniform_eta(ModelKind::Uniform, 10.0, 2).unwrap();
        assert_eq!(m.generating_cdf(0.0).unwrap(), 0.5);
        let m = MarginalModel::with_uniform_eta(ModelKind::Hyperbolic, 1.0, 2).unwrap();
        assert_eq!(m.generating_cdf(hyperbolic_offset()).unwrap(), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for m in all_models(4) {
            let (lo, hi) = m.cdf_range();
            let hi = hi.min(50.0);
            let lo = lo.max(-50.0);
            for k in 1..40 {
                let v = lo + (hi - lo) * k as f64 / 40.0;
                let s = m.generating_quantile(v).unwrap();
                let back = m.generating_cdf(s).unwrap();
                assert!((back - v).abs() <= 1e-10 * v.abs().max(1.0), "{:?} v={v} back={back}", m.kind());
            }
        }
    }

    #[test]
    fn domain_errors() {
        let m = MarginalModel::with_uniform_eta(ModelKind::Pareto { q: 2.0 }, 1.0, 2).unwrap();
        assert!(matches!(m.generating_cdf(-5.0), Err(Error::Domain { .. })));
        let m = MarginalModel::with_uniform_eta(ModelKind::Pareto { q: 0.5 }, 1.0, 2).unwrap();
        assert!(m.generating_cdf(2.0).is_err());
        assert!(m.generating_cdf(1.9).is_ok());
        let m = MarginalModel::with_uniform_eta(ModelKind::TDist, 1.0, 3).unwrap();
        assert!(m.generating_quantile(3.0).is_err());
        assert!(m.generating_quantile(2.9).is_ok());
    }

    #[test]
    fn marginal_quantile_examples() {
        let m = MarginalModel::new(ModelKind::Uniform, 10.0, vec![0.5, 0.5]).unwrap();
        assert!(m.marginal_quantile(0, 0.75).unwrap().abs() < 1e-14);
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 1.0, 2).unwrap();
        assert!((m.marginal_quantile(0, 0.5).unwrap() + 1.0).abs() < 1e-15);
        assert!(m.marginal_quantile(0, 1.0).is_err());
    }

    #[test]
    fn infinite_quantile_flagged() {
        // η_0 < 1/N pushes (1 − t)/η_0 past the upper end N of the t-dist range
        let m = MarginalModel::new(ModelKind::TDist, 1.0, vec![0.2, 0.8]).unwrap();
        assert!(matches!(m.marginal_quantile(0, 0.3), Err(Error::InfiniteQuantile { index: 0, .. })));
    }

    #[test]
    fn marginal_round_trip() {
        for m in all_models(3) {
            for i in 0..3 {
                for k in 1..20 {
                    let t = k as f64 / 20.0;
                    let Ok(s) = m.marginal_quantile(i, t) else { continue };
                    let back = m.marginal_cdf(i, s).unwrap();
                    assert!((back - t).abs() < 1e-10, "{:?} i={i} t={t} back={back}", m.kind());
                }
            }
        }
    }

    #[test]
    fn generator_examples() {
        for m in all_models(3) {
            assert!(m.divergence_generator_value(1.0).unwrap().abs() < 1e-10, "{:?}", m.kind());
        }
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 2.0, 2).unwrap();
        let e = std::f64::consts::E;
        assert!((m.divergence_generator_value(e).unwrap() - 2.0 * e).abs() < 1e-14);
        assert_eq!(m.divergence_generator_value(0.0).unwrap(), 0.0);
        let p = MarginalModel::with_uniform_eta(ModelKind::Pareto { q: 2.0 }, 1.7, 2).unwrap();
        let u = MarginalModel::with_uniform_eta(ModelKind::Uniform, 1.7, 2).unwrap();
        for s in [0.0, 0.3, 1.0, 2.5] {
            let a = p.divergence_generator_value(s).unwrap();
            let b = u.divergence_generator_value(s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let t = MarginalModel::with_uniform_eta(ModelKind::TDist, 1.0, 3).unwrap();
        assert_eq!(t.divergence_generator_value(3.5).unwrap(), f64::INFINITY);
        assert!(t.divergence_generator_value(-0.1).is_err());
    }

    #[test]
    fn generator_slope_is_quantile() {
        for m in all_models(3) {
            for s in [0.2, 0.5, 1.0, 1.7, 2.4] {
                let h = 1e-6;
                let fd = (m.divergence_generator_value(s + h).unwrap() - m.divergence_generator_value(s - h).unwrap())
                    / (2.0 * h);
                let exact = m.divergence_generator_slope(s).unwrap();
                assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{:?} s={s}", m.kind());
            }
        }
    }

    #[test]
    fn generator_convex() {
        for m in all_models(3) {
            let grid: Vec<f64> = (0..=28).map(|k| k as f64 * 0.1).collect();
            for w in grid.windows(3) {
                let f: Vec<f64> = w.iter().map(|&s| m.divergence_generator_value(s).unwrap()).collect();
                assert!(f[1] <= 0.5 * (f[0] + f[2]) + 1e-12, "{:?}", m.kind());
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let n = 5;
        let nf = n as f64;
        let ent = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.3, n).unwrap();
        let chi = MarginalModel::with_uniform_eta(ModelKind::Uniform, 0.3, n).unwrap();
        let eta = ent.eta().to_vec();
        assert!(ent.discrete_f_divergence(&eta).unwrap().abs() < 1e-14);
        assert!(chi.discrete_f_divergence(&eta).unwrap().abs() < 1e-14);
        let mut vertex = vec![0.0; n];
        vertex[2] = 1.0;
        // η_i f(1/η_i) plus zeros: (1/N)·λ·N·log N and (1/N)·λ(N² − N)
        assert!((ent.discrete_f_divergence(&vertex).unwrap() - 0.3 * nf.ln()).abs() < 1e-14);
        assert!((chi.discrete_f_divergence(&vertex).unwrap() - 0.3 * (nf - 1.0)).abs() < 1e-13);
        assert!(ent.discrete_f_divergence(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn bound_examples() {
        for n in [1usize, 2, 7, 20] {
            let nf = n as f64;
            let ent = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.25, n).unwrap();
            assert!((ent.approximation_bound() - 0.25 * nf.ln()).abs() <= 1e-15 * nf.max(2.0));
            let chi = MarginalModel::with_uniform_eta(ModelKind::Uniform, 0.25, n).unwrap();
            assert!((chi.approximation_bound() - 0.25 * (nf - 1.0)).abs() < 1e-13);
        }
        let one = MarginalModel::new(ModelKind::Hyperbolic, 1.0, vec![1.0]).unwrap();
        assert!(one.approximation_bound() < 1e-15);
        let t = MarginalModel::new(ModelKind::TDist, 1.0, vec![0.2, 0.8]).unwrap();
        assert_eq!(t.approximation_bound(), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MarginalModel::new(ModelKind::Exponential, 0.0, vec![1.0]).is_err());
        assert!(MarginalModel::new(ModelKind::Exponential, 1.0, vec![0.0, 1.0]).is_err());
        assert!(MarginalModel::new(ModelKind::Pareto { q: 1.0 }, 1.0, vec![1.0]).is_err());
        assert!(MarginalModel::new(ModelKind::Pareto { q: -1.0 }, 1.0, vec![1.0]).is_err());
        let err = serde_json::from_str::<MarginalModel>(r#"{"kind":"pareto","lambda":1.0,"eta":[1.0]}"#).unwrap_err();
        assert!(err.to_string().contains('q'));
        let err = serde_json::from_str::<MarginalModel>(r#"{"kind":"gumbel","lambda":1.0,"eta":[1.0]}"#).unwrap_err();
        assert!(err.to_string().contains("kind"));
    }

    #[test]
    fn json_round_trip() {
        for m in all_models(3) {
            let s = serde_json::to_string(&m).unwrap();
            let back: MarginalModel = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m);
        }
        let m: MarginalModel =
            serde_json::from_str(r#"{"kind":"pareto","lambda":2.0,"q":1.5,"eta":[0.25,0.75]}"#).unwrap();
        assert_eq!(m.kind(), ModelKind::Pareto { q: 1.5 });
    }
}
