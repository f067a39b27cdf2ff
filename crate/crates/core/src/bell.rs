//! CHSH correlations of the spin singlet against local hidden-variable
//! models.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, pauli, SpaceSpec, StateVector, Tensor};

pub const BOUND_CLASSICAL: f64 = 2.0;
pub const BOUND_QUANTUM: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Smallest sample count accepted by [`chsh_lhv`].
pub const MIN_SAMPLES: usize = 10_000;
pub const VIOLATED: &str = "Bell inequality violated by quantum prediction";
pub const NOT_VIOLATED: &str = "no violation at these settings";

/// Analyzer angles in the x–z plane, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl ChshSettings {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Self {
        Self { alpha, alpha_prime, beta, beta_prime }
    }

    /// (0, π/2, π/4, 3π/4).
    pub fn optimal() -> Self {
        Self::new(0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0)
    }

    pub fn rotated(&self, offset: f64) -> Self {
        Self::new(self.alpha + offset, self.alpha_prime + offset, self.beta + offset, self.beta_prime + offset)
    }

    /// S = E(α,β) − E(α,β′) + E(α′,β) + E(α′,β′).
    pub fn combine(&self, e: impl Fn(f64, f64) -> f64) -> f64 {
        e(self.alpha, self.beta) - e(self.alpha, self.beta_prime) + e(self.alpha_prime, self.beta)
            + e(self.alpha_prime, self.beta_prime)
    }
}

impl FromStr for ChshSettings {
    type Err = Error;

    /// Parses "α,α′,β,β′".
    fn from_str(s: &str) -> Result<Self> {
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidConfig(format!("angle {v:?}: {e}"))))
            .collect::<Result<_>>()?;
        match values[..] {
            [a, ap, b, bp] if values.iter().all(|v| v.is_finite()) => Ok(Self::new(a, ap, b, bp)),
            _ => Err(Error::InvalidConfig(format!("expected four finite angles, got {s:?}"))),
        }
    }
}

fn singlet() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_slice(SpaceSpec::uniform(2, 2).expect("valid"), &[c(0.0), c(r), c(-r), c(0.0)])
        .expect("four amplitudes")
}

/// ⟨singlet| (n_a·σ) ⊗ (n_b·σ) |singlet⟩.
pub fn singlet_correlation(a: f64, b: f64) -> f64 {
    let obs = pauli::along(a).tensor(&pauli::along(b));
    obs.expectation(&singlet()).expect("matching dimensions").re
}

/// Quantum CHSH value of the singlet (signed).
pub fn chsh_quantum(settings: &ChshSettings) -> f64 {
    settings.combine(singlet_correlation)
}

/// Deterministic ±1 responses to an analyzer angle, sharing a hidden angle
/// λ uniform on [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhvModel {
    /// A = sign cos(α − λ), B = −sign cos(β − λ).
    SignCosine,
    /// As [`LhvModel::SignCosine`] with doubled angles.
    Polarization,
    /// A = +1, B = −1 whatever the settings.
    Constant,
}

impl LhvModel {
    pub const ALL: [LhvModel; 3] = [LhvModel::SignCosine, LhvModel::Polarization, LhvModel::Constant];

    fn sign(x: f64) -> f64 {
        if x >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn response_a(self, alpha: f64, lambda: f64) -> f64 {
        match self {
            Self::SignCosine => Self::sign((alpha - lambda).cos()),
            Self::Polarization => Self::sign((2.0 * (alpha - lambda)).cos()),
            Self::Constant => 1.0,
        }
    }

    pub fn response_b(self, beta: f64, lambda: f64) -> f64 {
        match self {
            Self::SignCosine => -Self::sign((beta - lambda).cos()),
            Self::Polarization => -Self::sign((2.0 * (beta - lambda)).cos()),
            Self::Constant => -1.0,
        }
    }

    /// Values of λ in [0, 2π) where a response to `angle` may flip.
    fn breakpoints(self, angle: f64) -> Vec<f64> {
        let offsets: &[f64] = match self {
            Self::SignCosine => &[PI / 2.0, -PI / 2.0],
            Self::Polarization => &[PI / 4.0, 3.0 * PI / 4.0, -PI / 4.0, -3.0 * PI / 4.0],
            Self::Constant => &[],
        };
        offsets.iter().map(|o| (angle + o).rem_euclid(TAU)).collect()
    }

    /// E(a, b) = (1/2π) ∫ A(a, λ) B(b, λ) dλ, integrating exactly between
    /// the response breakpoints.
    pub fn correlation(self, a: f64, b: f64) -> f64 {
        let mut cuts = vec![0.0, TAU];
        cuts.extend(self.breakpoints(a));
        cuts.extend(self.breakpoints(b));
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * self.response_a(a, mid) * self.response_b(b, mid)
            })
            .sum::<f64>()
            / TAU
    }

    /// CHSH value of the model by exact quadrature (signed).
    pub fn chsh_exact(self, settings: &ChshSettings) -> f64 {
        settings.combine(|a, b| self.correlation(a, b))
    }
}

impl fmt::Display for LhvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SignCosine => "sign_cosine",
            Self::Polarization => "polarization",
            Self::Constant => "constant",
        })
    }
}

impl FromStr for LhvModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown hidden-variable model {s:?}")))
    }
}

/// Monte-Carlo CHSH estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LhvEstimate {
    pub s: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Samples λ from ChaCha8 seeded with `seed` and averages the four-term
/// CHSH combination per sample.
pub fn chsh_lhv(model: LhvModel, settings: &ChshSettings, n_samples: usize, seed: u64) -> Result<LhvEstimate> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let lambda = rng.random::<f64>() * TAU;
        let s = settings.combine(|a, b| model.response_a(a, lambda) * model.response_b(b, lambda));
        sum += s;
        sum_sq += s * s;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(LhvEstimate { s: mean, stderr: (var / n).sqrt(), n_samples })
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellReport {
    pub settings: ChshSettings,
    pub model: LhvModel,
    pub n_samples: usize,
    pub seed: u64,
    pub S_quantum: f64,
    pub S_quantum_signed: f64,
    pub S_lhv: f64,
    pub S_lhv_signed: f64,
    pub S_lhv_exact: f64,
    pub stderr_lhv: f64,
    pub bound_classical: f64,
    pub bound_quantum: f64,
    pub verdict: String,
}

pub fn bell_report(settings: &ChshSettings, model: LhvModel, n_samples: usize, seed: u64) -> Result<BellReport> {
    let q = chsh_quantum(settings);
    let lhv = chsh_lhv(model, settings, n_samples, seed)?;
    let verdict = if q.abs() > BOUND_CLASSICAL + 1e-10 { VIOLATED } else { NOT_VIOLATED };
    Ok(BellReport {
        settings: *settings,
        model,
        n_samples,
        seed,
        S_quantum: q.abs(),
        S_quantum_signed: q,
        S_lhv: lhv.s.abs(),
        S_lhv_signed: lhv.s,
        S_lhv_exact: model.chsh_exact(settings),
        stderr_lhv: lhv.stderr,
        bound_classical: BOUND_CLASSICAL,
        bound_quantum: BOUND_QUANTUM,
        verdict: verdict.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aligned_analyzers_anticorrelate() {
        assert!((singlet_correlation(0.0, 0.0) + 1.0).abs() < 1e-15);
        assert!((singlet_correlation(0.4, 0.4) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn optimal_settings_reach_quantum_bound() {
        let s = chsh_quantum(&ChshSettings::optimal());
        assert!((s.abs() - BOUND_QUANTUM).abs() < 1e-10);
        let equal = ChshSettings::new(0.3, 0.3, 0.3, 0.3);
        assert!((chsh_quantum(&equal) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_by_grid_search() {
        let steps = 16;
        let angle = |k: usize| PI * k as f64 / steps as f64;
        let mut best: f64 = 0.0;
        for a in 0..1 {
            for ap in 0..steps {
                for b in 0..steps {
                    for bp in 0..steps {
                        let s = chsh_quantum(&ChshSettings::new(angle(a), angle(ap), angle(b), angle(bp)));
                        best = best.max(s.abs());
                    }
                }
            }
        }
        assert!((best - BOUND_QUANTUM).abs() < 1e-10);
    }

    #[test]
    fn sign_cosine_correlation_is_triangular() {
        for k in 0..=20 {
            let d = PI * k as f64 / 20.0;
            let want = -(1.0 - 2.0 * d / PI);
            assert!((LhvModel::SignCosine.correlation(0.1, 0.1 + d) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_cosine_saturates_at_optimal_angles() {
        let s = LhvModel::SignCosine.chsh_exact(&ChshSettings::optimal());
        assert!((s.abs() - 2.0).abs() < 1e-12);
        let sampled = chsh_lhv(LhvModel::SignCosine, &ChshSettings::optimal(), 20_000, 3).unwrap();
        assert!((sampled.s.abs() - 2.0).abs() <= 5.0 * sampled.stderr + 1e-12);
    }

    #[test]
    fn sampler_is_seeded() {
        let s = ChshSettings::new(0.2, 1.1, 0.7, 2.5);
        let a = chsh_lhv(LhvModel::Polarization, &s, 10_000, 9).unwrap();
        let b = chsh_lhv(LhvModel::Polarization, &s, 10_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(chsh_lhv(LhvModel::Polarization, &s, 10, 9).is_err());
    }

    #[test]
    fn verdicts() {
        let optimal = bell_report(&ChshSettings::optimal(), LhvModel::SignCosine, 10_000, 1).unwrap();
        assert_eq!(optimal.verdict, VIOLATED);
        assert_eq!(optimal.bound_quantum, BOUND_QUANTUM);
        let aligned = bell_report(&ChshSettings::new(0.0, 0.0, 0.0, 0.0), LhvModel::Constant, 10_000, 1).unwrap();
        assert_eq!(aligned.verdict, NOT_VIOLATED);
    }

    #[test]
    fn parse_angles_and_models() {
        let s: ChshSettings = "0, 1.5,0.75,2.25".parse().unwrap();
        assert_eq!(s.beta, 0.75);
        assert!("0,1,2".parse::<ChshSettings>().is_err());
        assert!("0,1,2,x".parse::<ChshSettings>().is_err());
        assert_eq!("polarization".parse::<LhvModel>().unwrap(), LhvModel::Polarization);
        assert!("bohm".parse::<LhvModel>().is_err());
    }

    proptest! {
        #[test]
        fn correlation_is_minus_cosine(a in -7.0f64..7.0, b in -7.0f64..7.0) {
            prop_assert!((singlet_correlation(a, b) + (a - b).cos()).abs() <= 1e-10);
        }

        #[test]
        fn quantum_value_is_rotation_invariant(
            a in 0.0f64..TAU, ap in 0.0f64..TAU, b in 0.0f64..TAU, bp in 0.0f64..TAU, offset in -10.0f64..10.0,
        ) {
            let s = ChshSettings::new(a, ap, b, bp);
            prop_assert!((chsh_quantum(&s) - chsh_quantum(&s.rotated(offset))).abs() <= 1e-10);
            prop_assert!(chsh_quantum(&s).abs() <= BOUND_QUANTUM + 1e-10);
        }

        #[test]
        fn local_models_obey_classical_bound(
            a in 0.0f64..TAU, ap in 0.0f64..TAU, b in 0.0f64..TAU, bp in 0.0f64..TAU,
        ) {
            let s = ChshSettings::new(a, ap, b, bp);
            for model in LhvModel::ALL {
                prop_assert!(model.chsh_exact(&s).abs() <= BOUND_CLASSICAL + 1e-6);
            }
        }
    }
}
