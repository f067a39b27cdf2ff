//! N-body Hamiltonians with central and spin-spin pair terms, spectral time
//! evolution, and the weak-coupling limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hilbert::{c, lift, max_abs, CMatrix, CVector, Operator, SpaceSpec, StateVector, C64, HERMITIAN_TOL, I};

/// Largest total dimension accepted by [`build_hamiltonian`].
pub const MAX_DYNAMICS_DIM: usize = 1024;
pub const NORM_DRIFT_TOL: f64 = 1e-10;
pub const ENERGY_DRIFT_TOL: f64 = 1e-9;
pub const LINEARITY_TOL: f64 = 1e-6;

/// Real radial function sampled at increasing distances and linearly
/// interpolated between them; constant beyond the ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct RadialTable {
    r: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawTable {
    Constant { constant: f64 },
    Sampled { r: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<RawTable> for RadialTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        match raw {
            RawTable::Constant { constant } => RadialTable::constant(constant),
            RawTable::Sampled { r, values } => RadialTable::new(r, values),
        }
    }
}

impl From<RadialTable> for RawTable {
    fn from(t: RadialTable) -> Self {
        RawTable::Sampled { r: t.r, values: t.values }
    }
}

impl RadialTable {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.len() != values.len() {
            return Err(Error::InvalidPotential(format!(
                "{} distances for {} values",
                r.len(),
                values.len()
            )));
        }
        if let Some(v) = r.iter().chain(&values).find(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!("non-finite table entry {v}")));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) || r[0] < 0.0 {
            return Err(Error::InvalidPotential("distances must be non-negative and increasing".into()));
        }
        Ok(Self { r, values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    /// Samples `f` at the given distances.
    pub fn from_fn(r: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = r.iter().map(|&x| f(x)).collect();
        Self::new(r, values)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = self.r.partition_point(|&x| x <= r);
        if k == 0 {
            return self.values[0];
        }
        if k == self.r.len() {
            return self.values[k - 1];
        }
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let t = (r - r0) / (r1 - r0);
        self.values[k - 1] * (1.0 - t) + self.values[k] * t
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { r: self.r.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }
}

/// Pair potentials: V(r) between positions; V₁ + V₂ s·s + V₃ (tensor) between
/// spins. Missing tables are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub v: Option<RadialTable>,
    #[serde(default)]
    pub v1: Option<RadialTable>,
    #[serde(default)]
    pub v2: Option<RadialTable>,
    #[serde(default)]
    pub v3: Option<RadialTable>,
}

impl PotentialSpec {
    pub fn scaled(&self, s: f64) -> Self {
        let f = |t: &Option<RadialTable>| t.as_ref().map(|t| t.scaled(s));
        Self { v: f(&self.v), v1: f(&self.v1), v2: f(&self.v2), v3: f(&self.v3) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_sites: usize,
    pub length: f64,
}

/// Bodies sharing one grid (or pinned in place when no grid is given).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub masses: Vec<f64>,
    /// Spin-½ bodies when set, spinless otherwise.
    #[serde(default)]
    pub spin: bool,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Fixed positions along z for bodies without a grid. Defaults to all
    /// bodies at the origin.
    #[serde(default)]
    pub positions: Option<Vec<f64>>,
    /// Two bodies on one grid in their relative coordinate; the
    /// centre-of-mass factor is dropped.
    #[serde(default)]
    pub relative: bool,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl BodyConfig {
    pub fn spins(masses: Vec<f64>) -> Self {
        Self { masses, spin: true, grid: None, positions: None, relative: false, hbar: 1.0 }
    }

    pub fn on_grid(masses: Vec<f64>, n_sites: usize, length: f64) -> Self {
        Self {
            masses,
            spin: false,
            grid: Some(GridSpec { n_sites, length }),
            positions: None,
            relative: false,
            hbar: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.masses.is_empty() {
            return Err(Error::InvalidConfig("no bodies".into()));
        }
        if let Some(m) = self.masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidConfig(format!("masses must be positive, got {m}")));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidConfig(format!("ħ must be positive, got {}", self.hbar)));
        }
        if self.relative && (self.masses.len() != 2 || self.grid.is_none()) {
            return Err(Error::InvalidConfig("relative coordinates need two bodies and a grid".into()));
        }
        if let Some(p) = &self.positions {
            if self.grid.is_some() {
                return Err(Error::InvalidConfig("fixed positions conflict with a grid".into()));
            }
            if p.len() != self.masses.len() {
                return Err(Error::InvalidConfig(format!("{} positions for {} bodies", p.len(), self.masses.len())));
            }
        }
        Ok(())
    }
}

/// Where each body lives in the tensor product, and how pair distances are
/// read off the basis digits.
struct Layout {
    space: SpaceSpec,
    grid: Option<Grid>,
    /// (factor, mass) for each kinetic term.
    kinetic: Vec<(usize, f64)>,
    spin_factor: Vec<Option<usize>>,
    pairs: Vec<Pair>,
}

struct Pair {
    i: usize,
    j: usize,
    distance: Distance,
}

enum Distance {
    Fixed(f64),
    Between(usize, usize),
    Relative(usize),
}

impl Layout {
    fn new(cfg: &BodyConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.masses.len();
        let grid = cfg.grid.map(|g| Grid::new(g.n_sites, g.length)).transpose()?;
        let mut dims = Vec::new();
        let mut kinetic = Vec::new();
        let mut spatial = vec![None; n];
        let mut spin_factor = vec![None; n];
        if cfg.relative {
            let g = grid.expect("validated");
            let mu = cfg.masses[0] * cfg.masses[1] / (cfg.masses[0] + cfg.masses[1]);
            dims.push(g.n_sites);
            kinetic.push((0, mu));
            if cfg.spin {
                spin_factor = vec![Some(1), Some(2)];
                dims.extend([2, 2]);
            }
        } else {
            for (body, &m) in cfg.masses.iter().enumerate() {
                if let Some(g) = &grid {
                    spatial[body] = Some(dims.len());
                    kinetic.push((dims.len(), m));
                    dims.push(g.n_sites);
                }
                if cfg.spin {
                    spin_factor[body] = Some(dims.len());
                    dims.push(2);
                }
            }
        }
        if dims.is_empty() {
            dims.push(1);
        }
        let space = SpaceSpec::new(dims)?;
        if space.total_dim() > MAX_DYNAMICS_DIM {
            return Err(Error::InvalidConfig(format!(
                "total dimension {} exceeds {MAX_DYNAMICS_DIM}",
                space.total_dim()
            )));
        }
        let positions = cfg.positions.clone().unwrap_or_else(|| vec![0.0; n]);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let distance = if cfg.relative {
                    Distance::Relative(0)
                } else {
                    match (spatial[i], spatial[j]) {
                        (Some(a), Some(b)) => Distance::Between(a, b),
                        _ => Distance::Fixed((positions[i] - positions[j]).abs()),
                    }
                };
                pairs.push(Pair { i, j, distance });
            }
        }
        Ok(Self { space, grid, kinetic, spin_factor, pairs })
    }

    fn distance(&self, pair: &Pair, digits: &[usize]) -> f64 {
        let xs = || self.grid.as_ref().expect("grid distances need a grid");
        match pair.distance {
            Distance::Fixed(r) => r,
            Distance::Between(a, b) => {
                let g = xs();
                let pos = g.positions();
                g.min_image(pos[digits[a]] - pos[digits[b]]).abs()
            }
            Distance::Relative(a) => {
                let g = xs();
                g.min_image(g.positions()[digits[a]]).abs()
            }
        }
    }
}

/// s₁·s₂ on two spin-½ factors, s = (ħ/2)σ; index 2·a + b.
fn spin_dot(hbar: f64) -> CMatrix {
    let p = [crate::hilbert::pauli::x(), crate::hilbert::pauli::y(), crate::hilbert::pauli::z()];
    let mut m = CMatrix::zeros(4, 4);
    for s in &p {
        m += s.matrix().kronecker(s.matrix());
    }
    m * c(hbar * hbar / 4.0)
}

/// 3(s₁·n)(s₂·n) − s₁·s₂ with n along z.
fn spin_tensor(hbar: f64) -> CMatrix {
    let z = crate::hilbert::pauli::z();
    z.matrix().kronecker(z.matrix()) * c(3.0 * hbar * hbar / 4.0) - spin_dot(hbar)
}

/// H = Σ P_i²/2m_i + Σ_{i<j} [V(r_ij) + V₁ + V₂ s_i·s_j + V₃ (tensor)].
pub fn build_hamiltonian(cfg: &BodyConfig, pot: &PotentialSpec) -> Result<Operator> {
    if !cfg.spin && (pot.v2.is_some() || pot.v3.is_some()) {
        return Err(Error::InvalidPotential("spin-spin tables given for spinless bodies".into()));
    }
    let layout = Layout::new(cfg)?;
    let space = &layout.space;
    let dim = space.total_dim();
    let hbar = cfg.hbar;
    let mut h = CMatrix::zeros(dim, dim);

    if let Some(grid) = &layout.grid {
        let kin: Vec<(usize, CMatrix)> = layout
            .kinetic
            .iter()
            .map(|&(f, m)| (f, grid.kinetic_operator(m, hbar).into_matrix()))
            .collect();
        for col in 0..dim {
            let digits = space.digits(col);
            for (factor, t) in &kin {
                let mut target = digits.clone();
                for x in 0..grid.n_sites {
                    target[*factor] = x;
                    h[(space.compose_index(&target), col)] += t[(x, digits[*factor])];
                }
            }
        }
    }

    let dot = spin_dot(hbar);
    let tensor = spin_tensor(hbar);
    let eval = |t: &Option<RadialTable>, r: f64| t.as_ref().map_or(0.0, |t| t.eval(r));
    for col in 0..dim {
        let digits = space.digits(col);
        for pair in &layout.pairs {
            let r = layout.distance(pair, &digits);
            let scalar = eval(&pot.v, r) + eval(&pot.v1, r);
            h[(col, col)] += c(scalar);
            let (Some(fi), Some(fj)) = (layout.spin_factor[pair.i], layout.spin_factor[pair.j]) else {
                continue;
            };
            let (v2, v3) = (eval(&pot.v2, r), eval(&pot.v3, r));
            if v2 == 0.0 && v3 == 0.0 {
                continue;
            }
            let from = 2 * digits[fi] + digits[fj];
            let mut target = digits.clone();
            for to in 0..4 {
                let amp = dot[(to, from)] * v2 + tensor[(to, from)] * v3;
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                target[fi] = to / 2;
                target[fj] = to % 2;
                h[(space.compose_index(&target), col)] += amp;
            }
        }
    }
    let h = Operator::new(space.clone(), h)?;
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(h)
}

/// Σᵢ Hᵢ: each body's free Hamiltonian lifted to the composite space.
pub fn free_hamiltonian_sum(cfg: &BodyConfig) -> Result<Operator> {
    let layout = Layout::new(cfg)?;
    let mut total = Operator::zeros(&layout.space);
    if let Some(grid) = &layout.grid {
        for &(factor, m) in &layout.kinetic {
            total = &total + &lift(&grid.kinetic_operator(m, cfg.hbar), factor, &layout.space)?;
        }
    }
    Ok(total)
}

/// Total momentum Σ P_i of bodies on a grid (absolute coordinates only).
pub fn total_momentum(cfg: &BodyConfig) -> Result<Operator> {
    let layout = Layout::new(cfg)?;
    let grid = layout
        .grid
        .as_ref()
        .filter(|_| !cfg.relative)
        .ok_or_else(|| Error::InvalidConfig("total momentum needs bodies on a grid".into()))?;
    let p = grid.momentum_operator(cfg.hbar);
    let mut total = Operator::zeros(&layout.space);
    for &(factor, _) in &layout.kinetic {
        total = &total + &lift(&p, factor, &layout.space)?;
    }
    Ok(total)
}

/// Tensor-product space on which [`build_hamiltonian`] acts.
pub fn hamiltonian_space(cfg: &BodyConfig) -> Result<SpaceSpec> {
    Ok(Layout::new(cfg)?.space)
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<StateVector>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
}

impl EvolutionResult {
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// ψ(t) = exp(−iHt/ħ)ψ₀ at n_steps + 1 equally spaced times in [0, t_final].
pub fn evolve(psi0: &StateVector, h: &Operator, hbar: f64, t_final: f64, n_steps: usize) -> Result<EvolutionResult> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    psi0.check_normalized()?;
    if !(hbar > 0.0) || !t_final.is_finite() || n_steps == 0 {
        return Err(Error::InvalidConfig(format!(
            "evolution needs ħ > 0, finite horizon and at least one step (ħ={hbar}, t={t_final}, steps={n_steps})"
        )));
    }
    let eig = h.eigh()?;
    let coeffs = eig.vectors.adjoint() * psi0.amplitudes();
    let mut out = EvolutionResult { times: Vec::new(), states: Vec::new(), norms: Vec::new(), energies: Vec::new() };
    for step in 0..=n_steps {
        let t = t_final * step as f64 / n_steps as f64;
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&eig.values).map(|(a, &e)| a * (-I * (e * t / hbar)).exp()),
        );
        let psi = StateVector::new(psi0.space().clone(), &eig.vectors * phased)?;
        out.times.push(t);
        out.norms.push(psi.norm());
        out.energies.push(h.expectation(&psi)?.re);
        out.states.push(psi);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingSample {
    pub lambda: f64,
    /// ‖H(λ) − H(0)‖ (Frobenius).
    pub deviation: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakCouplingReport {
    /// max |H(0) − Σᵢ Hᵢ| over entries.
    pub free_residual: f64,
    pub samples: Vec<CouplingSample>,
    /// Largest relative spread of deviation/λ across the samples.
    pub linearity_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn weak_coupling_check(cfg: &BodyConfig, pot: &PotentialSpec, lambdas: &[f64]) -> Result<WeakCouplingReport> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l != 0.0)) {
        return Err(Error::InvalidConfig("coupling values must be finite and non-zero".into()));
    }
    let h0 = build_hamiltonian(cfg, &pot.scaled(0.0))?;
    let free = free_hamiltonian_sum(cfg)?;
    let free_residual = max_abs(&(h0.matrix() - free.matrix()));
    let samples: Vec<CouplingSample> = lambdas
        .iter()
        .map(|&lambda| {
            let h = build_hamiltonian(cfg, &pot.scaled(lambda))?;
            let deviation = (&h - &h0).norm();
            Ok(CouplingSample { lambda, deviation, ratio: deviation / lambda.abs() })
        })
        .collect::<Result<_>>()?;
    let reference = samples[0].ratio;
    let linearity_residual = samples
        .iter()
        .map(|s| if reference == 0.0 { s.ratio } else { (s.ratio / reference - 1.0).abs() })
        .fold(0.0, f64::max);
    Ok(WeakCouplingReport {
        free_residual,
        pass: free_residual == 0.0 && linearity_residual <= LINEARITY_TOL,
        samples,
        linearity_residual,
        tolerance: LINEARITY_TOL,
    })
}
