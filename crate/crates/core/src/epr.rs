//! Two particles on a periodic line with sharp separation and sharp total
//! momentum.
//!
//! The pair state is Ψ(x₁, x₂) ∝ g(x₁ − x₂ − a)·exp(ip(x₁ + x₂)/2ħ) where
//! g is a Gaussian of width w standing in for the delta function. States
//! are held as n×n matrices Ψ[i₁, i₂]; the flattened index is i₁·n + i₂.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hilbert::{c, CMatrix, CVector, SpaceSpec, StateVector, C64};

pub const COMMUTATOR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EprConfig {
    pub n_sites: usize,
    pub length: f64,
    /// Separation a = x₁ − x₂.
    pub separation: f64,
    /// Total momentum p; p/2ħ must be a multiple of 2π/L.
    pub momentum: f64,
    /// Width w of the Gaussian replacing the delta function.
    pub width: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for EprConfig {
    fn default() -> Self {
        Self { n_sites: 256, length: 20.0, separation: 1.0, momentum: 0.0, width: 0.25, hbar: 1.0 }
    }
}

impl EprConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_sites, self.length)
    }

    fn validate(&self) -> Result<Grid> {
        let grid = self.grid()?;
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidConfig(format!("ħ must be positive, got {}", self.hbar)));
        }
        if !(self.width >= grid.dx()) {
            return Err(Error::InvalidConfig(format!(
                "width {} is below the grid spacing {}",
                self.width,
                grid.dx()
            )));
        }
        if !(self.width <= self.length / 8.0) {
            return Err(Error::InvalidConfig(format!("width {} is not small against the box", self.width)));
        }
        if !(self.separation.abs() < self.length / 2.0) {
            return Err(Error::InvalidConfig(format!("separation {} outside the box", self.separation)));
        }
        let quanta = self.momentum / (2.0 * self.hbar) / (2.0 * std::f64::consts::PI / self.length);
        if !quanta.is_finite() || (quanta - quanta.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "momentum {} does not fit the periodic box (p/2ħ must be a multiple of 2π/L)",
                self.momentum
            )));
        }
        if self.momentum.abs() / self.hbar >= grid.k_max() {
            return Err(Error::InvalidConfig(format!("momentum {} is not resolved by the grid", self.momentum)));
        }
        Ok(grid)
    }
}

/// Pair state together with the operators acting on it.
#[derive(Clone, Debug)]
pub struct EprPair {
    pub config: EprConfig,
    pub grid: Grid,
    /// Ψ[i₁, i₂].
    pub psi: CMatrix,
    p: OnceLock<CMatrix>,
}

impl EprPair {
    pub fn new(config: EprConfig) -> Result<Self> {
        let grid = config.validate()?;
        let xs = grid.positions();
        let n = grid.n_sites;
        let w = config.width;
        let mut psi = CMatrix::from_fn(n, n, |i1, i2| {
            let d = grid.min_image(xs[i1] - xs[i2] - config.separation);
            C64::from_polar((-d * d / (4.0 * w * w)).exp(), config.momentum * (xs[i1] + xs[i2]) / (2.0 * config.hbar))
        });
        let norm = psi.norm();
        psi /= c(norm);
        Ok(Self { config, grid, psi, p: OnceLock::new() })
    }

    fn momentum(&self) -> &CMatrix {
        self.p.get_or_init(|| self.grid.momentum_matrix(self.config.hbar))
    }

    pub fn space(&self) -> SpaceSpec {
        SpaceSpec::uniform(2, self.grid.n_sites).expect("grid has sites")
    }

    pub fn state(&self) -> StateVector {
        StateVector::new(self.space(), flatten(&self.psi)).expect("matching size")
    }

    /// Minimum-image separation x₁ − x₂ applied to Φ.
    pub fn apply_separation(&self, phi: &CMatrix) -> CMatrix {
        let n = self.grid.n_sites;
        let dx = self.grid.dx();
        let rel: Vec<f64> = (0..n).map(|r| self.grid.min_image(r as f64 * dx)).collect();
        CMatrix::from_fn(n, n, |i1, i2| phi[(i1, i2)] * rel[(i1 + n - i2) % n])
    }

    /// Total momentum: the spectral derivative along (1, 1) at fixed
    /// i₁ − i₂.
    pub fn apply_total_momentum(&self, phi: &CMatrix) -> CMatrix {
        let n = self.grid.n_sites;
        let sheared = CMatrix::from_fn(n, n, |r, col| phi[((r + col) % n, col)]);
        let moved = sheared * self.momentum().transpose();
        CMatrix::from_fn(n, n, |i1, i2| moved[((i1 + n - i2) % n, i2)])
    }

    /// Momentum of particle 1.
    pub fn apply_momentum_1(&self, phi: &CMatrix) -> CMatrix {
        self.momentum() * phi
    }

    fn moments(&self, apply: impl Fn(&CMatrix) -> CMatrix) -> (f64, f64) {
        let once = apply(&self.psi);
        let twice = apply(&once);
        let mean = self.psi.dotc(&once).re;
        let second = self.psi.dotc(&twice).re;
        (mean, second - mean * mean)
    }

    /// |⟨Ψ|T Ψ⟩| for T translating both particles by one site.
    pub fn joint_shift_overlap(&self) -> f64 {
        let n = self.grid.n_sites;
        let shifted = CMatrix::from_fn(n, n, |i1, i2| self.psi[((i1 + n - 1) % n, (i2 + n - 1) % n)]);
        self.psi.dotc(&shifted).norm()
    }
}

fn flatten(m: &CMatrix) -> CVector {
    let n = m.nrows();
    CVector::from_fn(n * m.ncols(), |k, _| m[(k / m.ncols(), k % m.ncols())])
}

fn unflatten(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i1, i2| v[i1 * n + i2])
}

pub fn build_epr_state(cfg: &EprConfig) -> Result<StateVector> {
    Ok(EprPair::new(*cfg)?.state())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutingPairReport {
    /// max over test vectors of ‖[X₁ − X₂, P]v‖ / (‖X₁ − X₂‖·‖P‖·‖v‖), with
    /// operator norms bounded by their largest spectral values.
    pub commutator_residual: f64,
    pub tolerance: f64,
    pub norm: f64,
    pub mean_separation: f64,
    pub var_separation: f64,
    /// w², the variance of the regularizing Gaussian.
    pub expected_var_separation: f64,
    pub mean_total_momentum: f64,
    pub var_total_momentum: f64,
    /// Variance of one particle's momentum, ħ²/4w² for the Gaussian.
    pub var_momentum_1: f64,
    pub expected_var_momentum_1: f64,
    pub pass: bool,
}

/// Checks that separation and total momentum commute and reports both as
/// sharp on the pair state.
pub fn commuting_pair_check(cfg: &EprConfig) -> Result<CommutingPairReport> {
    let pair = EprPair::new(*cfg)?;
    let n = pair.grid.n_sites;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut tests = vec![pair.psi.clone()];
    for _ in 0..3 {
        let mut v = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let norm = v.norm();
        v /= c(norm);
        tests.push(v);
    }
    let x_bound = pair.config.length / 2.0;
    let p_bound = pair.grid.k_max() * pair.config.hbar;
    let commutator_residual = tests
        .iter()
        .map(|v| {
            let xp = pair.apply_separation(&pair.apply_total_momentum(v));
            let px = pair.apply_total_momentum(&pair.apply_separation(v));
            (xp - px).norm() / (x_bound * p_bound * v.norm())
        })
        .fold(0.0, f64::max);
    let (mean_separation, var_separation) = pair.moments(|m| pair.apply_separation(m));
    let (mean_total_momentum, var_total_momentum) = pair.moments(|m| pair.apply_total_momentum(m));
    let (_, var_momentum_1) = pair.moments(|m| pair.apply_momentum_1(m));
    let w = cfg.width;
    Ok(CommutingPairReport {
        commutator_residual,
        tolerance: COMMUTATOR_TOL,
        norm: pair.psi.norm(),
        mean_separation,
        var_separation,
        expected_var_separation: w * w,
        mean_total_momentum,
        var_total_momentum,
        var_momentum_1,
        expected_var_momentum_1: cfg.hbar * cfg.hbar / (4.0 * w * w),
        pass: commutator_residual <= COMMUTATOR_TOL,
    })
}

/// Distribution of x₂ given that x₁ was found at a grid site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalDistribution {
    pub x1: f64,
    pub positions: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Grid position of largest probability.
    pub mode: f64,
    /// Mean and standard deviation, both measured by minimum image around
    /// the mode.
    pub mean: f64,
    pub width: f64,
    /// Slice weight relative to a uniform marginal.
    pub weight: f64,
}

/// Weight below which a slice is treated as empty.
pub const NEGLIGIBLE_SLICE: f64 = 1e-12;

/// Slices |Ψ(x₁, ·)|² at the site nearest `x1` and normalizes it.
pub fn conditional_from_amplitudes(grid: &Grid, psi: &CMatrix, x1: f64) -> Result<ConditionalDistribution> {
    let n = grid.n_sites;
    if psi.nrows() != n || psi.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n * n, found: psi.len() });
    }
    let site = grid
        .nearest_site(x1)
        .ok_or_else(|| Error::InvalidConfig(format!("x1 = {x1} lies outside the box")))?;
    let xs = grid.positions();
    let raw: Vec<f64> = psi.row(site).iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = raw.iter().sum();
    let norm2 = psi.norm_squared();
    let weight = if norm2 > 0.0 { total * n as f64 / norm2 } else { 0.0 };
    if !(weight > NEGLIGIBLE_SLICE) {
        return Err(Error::NegligibleSlice { x1: xs[site], weight });
    }
    let probabilities: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let best = (0..n).fold(0, |b, k| if probabilities[k] > probabilities[b] { k } else { b });
    let mode = xs[best];
    let offsets: Vec<f64> = xs.iter().map(|x| grid.min_image(x - mode)).collect();
    let shift: f64 = offsets.iter().zip(&probabilities).map(|(d, p)| d * p).sum();
    let var: f64 = offsets.iter().zip(&probabilities).map(|(d, p)| (d - shift).powi(2) * p).sum();
    Ok(ConditionalDistribution {
        x1: xs[site],
        positions: xs,
        probabilities,
        mode,
        mean: grid.min_image(mode + shift),
        width: var.sqrt(),
        weight,
    })
}

pub fn conditional_inference(cfg: &EprConfig, measured_x1: f64) -> Result<ConditionalDistribution> {
    let pair = EprPair::new(*cfg)?;
    conditional_from_amplitudes(&pair.grid, &pair.psi, measured_x1)
}

/// Reshapes a flattened two-particle state on `grid` into Ψ[i₁, i₂].
pub fn as_pair_matrix(grid: &Grid, state: &StateVector) -> Result<CMatrix> {
    let n = grid.n_sites;
    if state.space().factor_dims() != [n, n] {
        return Err(Error::DimensionMismatch { expected: n * n, found: state.dim() });
    }
    Ok(unflatten(state.amplitudes(), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(separation: f64, momentum: f64) -> EprConfig {
        EprConfig { n_sites: 64, length: 16.0, separation, momentum, width: 0.5, hbar: 1.0 }
    }

    #[test]
    fn symmetric_case_sits_on_diagonal() {
        let pair = EprPair::new(small(0.0, 0.0)).unwrap();
        let n = pair.grid.n_sites;
        let diag: f64 = (0..n).map(|i| pair.psi[(i, i)].norm_sqr()).sum();
        let off: f64 = (0..n).map(|i| pair.psi[(i, (i + n / 2) % n)].norm_sqr()).sum();
        assert!(diag > 1e6 * off.max(1e-300));
        assert!((pair.psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_must_fit_box() {
        let quantum = 2.0 * 2.0 * std::f64::consts::PI / 16.0;
        assert!(EprPair::new(small(1.0, 3.0 * quantum)).is_ok());
        assert!(EprPair::new(small(1.0, 0.9 * quantum)).is_err());
        let mut narrow = small(0.0, 0.0);
        narrow.width = 0.1;
        assert!(EprPair::new(narrow).is_err());
        assert!(EprPair::new(small(9.0, 0.0)).is_err());
    }

    #[test]
    fn sharp_pair() {
        let quantum = 2.0 * 2.0 * std::f64::consts::PI / 16.0;
        let cfg = small(1.5, 2.0 * quantum);
        let report = commuting_pair_check(&cfg).unwrap();
        assert!(report.pass, "{report:?}");
        assert!((report.mean_separation - 1.5).abs() < 1e-10);
        assert!((report.var_separation / 0.25 - 1.0).abs() < 1e-6);
        assert!((report.mean_total_momentum - 2.0 * quantum).abs() < 1e-9);
        assert!(report.var_total_momentum.abs() < 1e-9);
        assert!((report.var_momentum_1 / report.expected_var_momentum_1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn translation_invariance() {
        let pair = EprPair::new(small(0.7, 0.0)).unwrap();
        assert!((pair.joint_shift_overlap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_mode_and_width() {
        let cfg = small(1.0, 0.0);
        let dist = conditional_inference(&cfg, 0.3).unwrap();
        let dx = cfg.grid().unwrap().dx();
        assert!((dist.mode - (dist.x1 - 1.0)).abs() <= dx);
        assert!((dist.width / cfg.width - 1.0).abs() < 0.2);
        assert!((dist.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(conditional_inference(&cfg, 20.0).is_err());
    }

    #[test]
    fn negligible_slice_reported() {
        let grid = Grid::new(32, 10.0).unwrap();
        let g = grid.gaussian(0.0, 0.0, 0.3);
        let psi = &g * g.transpose();
        assert!(matches!(
            conditional_from_amplitudes(&grid, &psi, -4.8),
            Err(Error::NegligibleSlice { .. })
        ));
        assert!(conditional_from_amplitudes(&grid, &psi, 0.1).is_ok());
    }

    #[test]
    fn flatten_round_trip() {
        let pair = EprPair::new(small(0.5, 0.0)).unwrap();
        let state = pair.state();
        assert_eq!(state.space().factor_dims(), &[64, 64]);
        assert_eq!(as_pair_matrix(&pair.grid, &state).unwrap(), pair.psi);
        assert_eq!(state.amplitudes()[3], pair.psi[(0, 3)]);
    }
}
