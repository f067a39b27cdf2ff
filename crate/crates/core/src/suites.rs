//! The verification suites run by the command-line tool.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bell::{self, ChshSettings, LhvModel};
use crate::charge::{self, ChargeModel, ChargeModelSpec};
use crate::dynamics::{self, BodyConfig, PotentialSpec, RadialTable};
use crate::epr::{self, EprConfig, EprPair};
use crate::error::{Error, Result};
use crate::galilei::rep::{self, AlgebraRep};
use crate::galilei::{Generator, PhysicalConstants, StructureConstants};
use crate::grid::Grid;
use crate::hilbert::{c, max_abs, pauli, CMatrix, CVector, Operator, SpaceSpec, StateVector, C64, I};
use crate::mereology::{self, Individual, LawTally, PropertyClass, SystemGraph, Thing};
use crate::report::{Check, SuiteReport};
use crate::symmetry::{self, Permutation, SymmetrySector};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Axioms,
    Symmetry,
    Dynamics,
    Charge,
    Epr,
    Bell,
    All,
}

impl Suite {
    pub const SINGLE: [Suite; 6] = [Suite::Axioms, Suite::Symmetry, Suite::Dynamics, Suite::Charge, Suite::Epr, Suite::Bell];

    pub fn name(self) -> &'static str {
        match self {
            Self::Axioms => "axioms",
            Self::Symmetry => "symmetry",
            Self::Dynamics => "dynamics",
            Self::Charge => "charge",
            Self::Epr => "epr",
            Self::Bell => "bell",
            Self::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::SINGLE
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxiomsConfig {
    pub mereology_triples: usize,
    pub mereology_atoms: usize,
    pub hbar: f64,
    pub spins: Vec<f64>,
    pub mass: f64,
    pub grid_sites: usize,
    pub grid_length: f64,
    pub grid_test_states: usize,
    pub additive_sites: usize,
    pub additive_length: f64,
    pub additive_masses: Vec<f64>,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        Self {
            mereology_triples: 10_000,
            mereology_atoms: 6,
            hbar: 1.0,
            spins: vec![0.5, 1.0, 1.5],
            mass: 1.0,
            grid_sites: 128,
            grid_length: 16.0,
            grid_test_states: 20,
            additive_sites: 32,
            additive_length: 8.0,
            additive_masses: vec![1.0, 2.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetryConfig {
    /// (n copies, single-copy dimension d).
    pub cases: Vec<(usize, usize)>,
    pub random_pairs: usize,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self { cases: vec![(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)], random_pairs: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Constant spin-spin strengths for the exact spectra.
    pub spin_coupling: f64,
    pub tensor_coupling: f64,
    /// System evolved in time.
    pub body: BodyConfig,
    pub potential: PotentialSpec,
    pub t_final: f64,
    pub n_steps: usize,
    /// System used for the weak-coupling and exchange checks.
    pub coupled_body: BodyConfig,
    pub coupled_potential: PotentialSpec,
    pub lambdas: Vec<f64>,
}

fn gaussian_well(depth: f64, range: f64) -> RadialTable {
    let r: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
    RadialTable::from_fn(r, |x| -depth * (-x * x / (2.0 * range * range)).exp()).expect("finite table")
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        let mut body = BodyConfig::on_grid(vec![1.0, 1.0], 16, 8.0);
        body.spin = true;
        body.relative = true;
        let potential = PotentialSpec {
            v: Some(gaussian_well(1.0, 0.8)),
            v2: Some(RadialTable::constant(0.5).expect("finite")),
            v3: Some(gaussian_well(-0.3, 0.6)),
            ..Default::default()
        };
        let mut coupled_body = BodyConfig::on_grid(vec![1.0, 1.0], 8, 6.0);
        coupled_body.spin = true;
        let coupled_potential = PotentialSpec {
            v: Some(gaussian_well(1.0, 0.8)),
            v1: Some(gaussian_well(0.2, 1.0)),
            v2: Some(gaussian_well(0.4, 1.0)),
            v3: Some(gaussian_well(0.1, 1.0)),
        };
        Self {
            spin_coupling: 1.0,
            tensor_coupling: 1.0,
            body,
            potential,
            t_final: 10.0,
            n_steps: 99,
            coupled_body,
            coupled_potential,
            lambdas: vec![1.0, 0.5, 0.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargeConfig {
    /// Charge model to check; the built-in two-mode model when absent.
    pub model: Option<ChargeModelSpec>,
    pub n_angles: usize,
    pub n_phases: usize,
}

impl Default for ChargeConfig {
    fn default() -> Self {
        Self { model: None, n_angles: 16, n_phases: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EprSuiteConfig {
    pub pair: EprConfig,
    pub inference_trials: usize,
}

impl Default for EprSuiteConfig {
    fn default() -> Self {
        Self { pair: EprConfig::default(), inference_trials: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellConfig {
    pub angles: ChshSettings,
    pub models: Vec<LhvModel>,
    pub n_samples: usize,
}

impl Default for BellConfig {
    fn default() -> Self {
        Self { angles: ChshSettings::optimal(), models: LhvModel::ALL.to_vec(), n_samples: 100_000 }
    }
}

/// Experiment configuration with one section per suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub axioms: AxiomsConfig,
    pub symmetry: SymmetryConfig,
    pub dynamics: DynamicsConfig,
    pub charge: ChargeConfig,
    pub epr: EprSuiteConfig,
    pub bell: BellConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Run-wide settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Context {
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for Context {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, tolerance_scale: 1.0 }
    }
}

impl Context {
    fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }

    /// Generator for one suite, independent of which other suites run.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

type Details = BTreeMap<String, Value>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

pub fn run(suite: Suite, config: &Config, ctx: &Context) -> Result<SuiteReport> {
    if !(ctx.tolerance_scale > 0.0 && ctx.tolerance_scale.is_finite()) {
        return Err(Error::InvalidConfig(format!("tolerance scale must be positive, got {}", ctx.tolerance_scale)));
    }
    let echo = to_value(config);
    if suite == Suite::All {
        let parts = Suite::SINGLE.iter().map(|&s| run_single(s, config, ctx)).collect::<Result<_>>()?;
        return Ok(SuiteReport::merge("all", ctx.seed, ctx.tolerance_scale, echo, parts));
    }
    run_single(suite, config, ctx)
}

fn run_single(suite: Suite, config: &Config, ctx: &Context) -> Result<SuiteReport> {
    let (checks, details) = match suite {
        Suite::Axioms => axioms(&config.axioms, ctx)?,
        Suite::Symmetry => symmetry(&config.symmetry, ctx)?,
        Suite::Dynamics => dynamics(&config.dynamics, ctx)?,
        Suite::Charge => charge(&config.charge, ctx)?,
        Suite::Epr => epr(&config.epr, ctx)?,
        Suite::Bell => bell(&config.bell, ctx)?,
        Suite::All => unreachable!("handled by run"),
    };
    let echo = match suite {
        Suite::Axioms => to_value(&config.axioms),
        Suite::Symmetry => to_value(&config.symmetry),
        Suite::Dynamics => to_value(&config.dynamics),
        Suite::Charge => to_value(&config.charge),
        Suite::Epr => to_value(&config.epr),
        Suite::Bell => to_value(&config.bell),
        Suite::All => unreachable!("handled by run"),
    };
    Ok(SuiteReport::new(suite.name(), ctx.seed, ctx.tolerance_scale, echo, checks, details))
}

fn random_individual(rng: &mut ChaCha8Rng, atoms: usize) -> Individual {
    Individual::from_atoms((0..atoms).filter(|_| rng.random::<bool>()).map(|k| format!("a{k}")))
}

/// Smooth packets: centres in the middle third of the box, wavenumbers in
/// the lowest third of the band, widths within 20% of the balanced width.
pub fn band_limited_states(grid: &Grid, count: usize, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    let sigma = grid.balanced_width();
    let third = grid.length / 6.0;
    let kmax = grid.k_max() / 3.0;
    (0..count)
        .map(|_| {
            let center = rng.random_range(-third..=third);
            let k0 = rng.random_range(-kmax..=kmax);
            let width = sigma * rng.random_range(0.8..=1.2);
            grid.gaussian(center, k0, width)
        })
        .collect()
}

fn axioms(cfg: &AxiomsConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();
    let mut rng = ctx.rng(1);

    let mut tally = LawTally::default();
    for _ in 0..cfg.mereology_triples {
        let x = random_individual(&mut rng, cfg.mereology_atoms);
        let y = random_individual(&mut rng, cfg.mereology_atoms);
        let z = random_individual(&mut rng, cfg.mereology_atoms);
        mereology::check_laws(&x, &y, &z, &mut tally);
    }
    let failures: usize = tally.failures.values().sum();
    checks.push(Check::numeric(
        "mereology.laws",
        "association is a commutative idempotent monoid with neutral null individual; parthood is a partial order",
        failures as f64,
        0.0,
    ));
    details.insert("mereology_law_instances".into(), json!(tally.checked));

    let electron = Thing::new("e").with_intrinsic("mass");
    let proton = Thing::new("p").with_intrinsic("mass");
    let atom = Thing::new("atom")
        .with_individual(Individual::from_atoms(["e", "p"]))
        .with_intrinsic("mass")
        .with_intrinsic("binding_energy");
    let parts = [electron.clone(), proton.clone()];
    let inherited = mereology::classify_property("mass", &atom, &parts)? == PropertyClass::Inherited;
    let emergent = mereology::classify_property("binding_energy", &atom, &parts)? == PropertyClass::Emergent;
    checks.push(Check::boolean(
        "mereology.emergence",
        "a composite's property is emergent exactly when no part has it",
        inherited && emergent,
    ));
    let nucleus = Thing::new("n");
    let field = Thing::new("f");
    let system = SystemGraph::new(vec![electron.clone(), nucleus.clone()]).with_action("n", "e").with_action("f", "e");
    let universe = [electron, nucleus, field, proton];
    let view = mereology::environment_of(&system, &universe)?;
    let env: Vec<&str> = view.environment.iter().map(|t| t.name.as_str()).collect();
    let closed = mereology::environment_of(&SystemGraph::new(universe.to_vec()), &universe)?.closed;
    checks.push(Check::boolean(
        "mereology.environment",
        "the environment holds exactly the outside things acting on or acted on by members",
        mereology::is_system(&system) && env == ["f"] && !view.closed && closed,
    ));

    let structure = StructureConstants::galilei().verify();
    checks.push(Check::numeric(
        "structure.antisymmetry",
        "[a, b] = −[b, a] for every pair of generators, exactly",
        structure.antisymmetry_failures.len() as f64,
        0.0,
    ));
    checks.push(Check::numeric(
        "structure.jacobi",
        "Jacobi identity for every triple of distinct generators, exactly",
        structure.jacobi_failures.len() as f64,
        0.0,
    ));
    checks.push(Check::boolean(
        "structure.coverage",
        "all 55 pairs and 165 triples of the 11 generators were checked",
        structure.pairs_checked == 55 && structure.triples_checked == 165,
    ));

    let consts = PhysicalConstants::new(cfg.hbar)?;
    let mut rep_details = Vec::new();
    for &j in &cfg.spins {
        let spin = rep::build_spin_rep(j, cfg.mass, consts)?;
        let report = rep::verify_rep(&spin, ctx.tol(rep::SPIN_REP_TOL));
        let label = format!("rep.spin_{}", spin.description().trim_start_matches("spin j="));
        checks.push(Check::numeric(
            format!("{label}.commutators"),
            "spin matrices satisfy the rotation and central relations",
            report.max_relative_residual(),
            ctx.tol(rep::SPIN_REP_TOL),
        ));
        let casimir = spin.casimir().expect("rotations realized");
        let want = Operator::identity(spin.space()).scaled(c(cfg.hbar * cfg.hbar * j * (j + 1.0)));
        checks.push(Check::numeric(
            format!("{label}.casimir"),
            "J² = ħ²j(j+1)·I",
            max_abs(&(casimir.matrix() - want.matrix())),
            ctx.tol(1e-12),
        ));
        rep_details.push(to_value(&report));
    }

    let grid = Grid::new(cfg.grid_sites, cfg.grid_length)?;
    let single = rep::build_grid_rep(cfg.grid_sites, cfg.grid_length, cfg.mass, consts)?;
    let x = single.image(Generator::K1).expect("realized").scaled(c(1.0 / cfg.mass));
    let p = single.image(Generator::P1).expect("realized");
    let comm = x.commutator(p)?;
    let canonical = band_limited_states(&grid, cfg.grid_test_states, &mut rng)
        .iter()
        .map(|v| (comm.matrix() * v - v * (I * cfg.hbar)).norm() / (cfg.hbar * v.norm()))
        .fold(0.0, f64::max);
    checks.push(Check::numeric(
        "rep.grid.canonical",
        "[X, P] = iħ on band-limited packets (relative)",
        canonical,
        ctx.tol(rep::GRID_REP_TOL),
    ));
    let report = rep::verify_rep(&single, ctx.tol(rep::GRID_REP_TOL));
    checks.push(Check::numeric(
        "rep.grid.commutators",
        "grid generators satisfy the algebra on the domain mask (relative)",
        report.max_relative_residual(),
        ctx.tol(rep::GRID_REP_TOL),
    ));
    rep_details.push(to_value(&report));

    let parts: Vec<AlgebraRep> = cfg
        .additive_masses
        .iter()
        .map(|&m| rep::build_grid_rep(cfg.additive_sites, cfg.additive_length, m, consts))
        .collect::<Result<_>>()?;
    let total = rep::build_additive_rep(&parts)?;
    let report = rep::verify_rep(&total, ctx.tol(rep::GRID_REP_TOL));
    checks.push(Check::numeric(
        "rep.additive.commutators",
        "summed generators of a composite satisfy the algebra on the product mask (relative)",
        report.max_relative_residual(),
        ctx.tol(rep::GRID_REP_TOL),
    ));
    let additivity = rep::verify_additivity(&parts, &total, ctx.tol(rep::GRID_REP_TOL))?;
    checks.push(Check::numeric(
        "rep.additive.part_relations",
        "part positions and momenta relate to the composite generators as the additivity relations require (relative)",
        additivity.max_relative_residual(),
        ctx.tol(rep::GRID_REP_TOL),
    ));
    checks.push(Check::numeric(
        "rep.additive.mass",
        "the composite mass is the sum of the part masses",
        (total.mass().unwrap_or(f64::NAN) - cfg.additive_masses.iter().sum::<f64>()).abs(),
        ctx.tol(1e-12),
    ));
    checks.push(Check::numeric(
        "rep.additive.parts_commute",
        "generators of different parts commute",
        rep::cross_part_commutator_norm(&parts),
        ctx.tol(1e-12),
    ));
    details.insert("opposite_sign_position_momentum".into(), json!(rep::literal_momentum_position_residual(&parts, &total)));
    rep_details.push(to_value(&report));
    rep_details.push(to_value(&additivity));

    let spins = [rep::build_spin_rep(0.5, cfg.mass, consts)?, rep::build_spin_rep(0.5, cfg.mass, consts)?];
    let pair = rep::build_additive_rep(&spins)?;
    checks.push(Check::numeric(
        "rep.additive_spin.commutators",
        "total spin of two spin-½ parts satisfies the rotation relations",
        rep::verify_rep(&pair, ctx.tol(rep::SPIN_REP_TOL)).max_relative_residual(),
        ctx.tol(rep::SPIN_REP_TOL),
    ));

    let spin = rep::build_spin_rep(0.5, cfg.mass, consts)?;
    let doubled = spin.image(Generator::J3).expect("realized").scaled(c(2.0));
    let broken = spin.with_image(Generator::J3, doubled)?;
    let caught = !rep::verify_rep(&broken, rep::SPIN_REP_TOL).entry("[J1, J2]").is_some_and(|e| e.pass);
    checks.push(Check::boolean(
        "rep.negative_control",
        "a representation with J3 doubled is rejected on [J1, J2]",
        caught,
    ));

    details.insert(
        "structure".into(),
        json!({"pairs_checked": structure.pairs_checked, "triples_checked": structure.triples_checked}),
    );
    details.insert("representations".into(), Value::Array(rep_details));
    Ok((checks, details))
}

/// Basis-tuple counts: non-decreasing tuples index the symmetric states,
/// strictly increasing ones the antisymmetric states.
fn enumerate_sector_ranks(n: usize, d: usize) -> (usize, usize) {
    let space = SpaceSpec::uniform(n, d).expect("valid");
    let mut sym = 0;
    let mut anti = 0;
    for index in 0..space.total_dim() {
        let digits = space.digits(index);
        if digits.windows(2).all(|w| w[0] <= w[1]) {
            sym += 1;
        }
        if digits.windows(2).all(|w| w[0] < w[1]) {
            anti += 1;
        }
    }
    (sym, anti)
}

fn random_state(rng: &mut ChaCha8Rng, space: &SpaceSpec) -> StateVector {
    let v = CVector::from_fn(space.total_dim(), |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    StateVector::new(space.clone(), v).expect("size").normalized().expect("non-zero")
}

fn symmetry(cfg: &SymmetryConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();
    let mut rng = ctx.rng(2);
    let mut ranks = Vec::new();
    for &(n, d) in &cfg.cases {
        let pair = symmetry::build_projectors(n, d)?;
        let (sym, anti) = enumerate_sector_ranks(n, d);
        let (rs, ra) = (pair.rank_symmetric(), pair.rank_antisymmetric());
        let id = format!("projectors.n{n}_d{d}");
        checks.push(Check::numeric(
            format!("{id}.rank"),
            "projector ranks equal the counts of symmetric and antisymmetric basis tuples",
            (rs.abs_diff(sym) + ra.abs_diff(anti)) as f64,
            0.0,
        ));
        checks.push(Check::numeric(
            format!("{id}.idempotent_orthogonal"),
            "S² = S, A² = A, SA = 0",
            pair.projector_residual(),
            ctx.tol(1e-12),
        ));
        let dim = pair.space.total_dim();
        let full = rs + ra == dim;
        checks.push(Check::boolean(
            format!("{id}.sector_sum"),
            "rank S + rank A fills the space exactly when n = 2",
            rs + ra <= dim && (full == (n == 2) || d == 1),
        ));
        if n == 2 {
            let resolution = max_abs(&(pair.physical_projector().matrix() - CMatrix::identity(dim, dim)));
            checks.push(Check::numeric(format!("{id}.resolution"), "S + A = I for two copies", resolution, ctx.tol(1e-12)));
        }
        let v = random_state(&mut rng, &pair.space);
        let s = pair.symmetrizer.apply(&v)?;
        let a = pair.antisymmetrizer.apply(&v)?;
        let overlap = if s.norm() > 1e-9 && a.norm() > 1e-9 { s.normalized()?.inner(&a.normalized()?).norm() } else { 0.0 };
        checks.push(Check::numeric(
            format!("{id}.sectors_orthogonal"),
            "symmetric and antisymmetric states are orthogonal",
            overlap,
            ctx.tol(1e-12),
        ));
        ranks.push(json!({"n": n, "d": d, "rank_symmetric": rs, "rank_antisymmetric": ra, "oracle": [sym, anti]}));
    }
    details.insert("ranks".into(), Value::Array(ranks));

    let two = SpaceSpec::uniform(2, 2)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let triplet = StateVector::from_slice(two.clone(), &[c(0.0), c(r), c(r), c(0.0)])?;
    let singlet = StateVector::from_slice(two.clone(), &[c(0.0), c(r), c(-r), c(0.0)])?;
    let product = StateVector::basis(two.clone(), 1)?;
    checks.push(Check::boolean(
        "classify.examples",
        "exchange-symmetric, antisymmetric and unsymmetrized states are told apart",
        symmetry::classify_state(&triplet)? == SymmetrySector::Symmetric
            && symmetry::classify_state(&singlet)? == SymmetrySector::Antisymmetric
            && symmetry::classify_state(&product)? == SymmetrySector::Mixed,
    ));

    let one = SpaceSpec::single(3)?;
    let phi = random_state(&mut rng, &one);
    let chi = random_state(&mut rng, &one);
    let doubled = symmetry::pauli_exclusion_check(&[phi.clone(), phi.clone()])?;
    let tripled = symmetry::pauli_exclusion_check(&[phi.clone(), phi.clone(), chi])?;
    checks.push(Check::numeric(
        "exclusion.repeated",
        "antisymmetrized products with a repeated single-particle state vanish",
        doubled.norm.max(tripled.norm),
        ctx.tol(symmetry::EXCLUSION_TOL),
    ));
    let e0 = StateVector::basis(SpaceSpec::single(2)?, 0)?;
    let e1 = StateVector::basis(SpaceSpec::single(2)?, 1)?;
    let slater = symmetry::pauli_exclusion_check(&[e0, e1])?;
    checks.push(Check::numeric(
        "exclusion.distinct",
        "distinct orthogonal states survive antisymmetrization with norm 1/√2",
        (slater.norm - r).abs(),
        ctx.tol(1e-12),
    ));

    let consts = PhysicalConstants::natural();
    let spin = rep::build_spin_rep(0.5, 1.0, consts)?;
    let total = rep::build_additive_rep(&[spin.clone(), spin])?;
    let j2 = total.casimir().expect("rotations realized");
    let swap = Permutation::transposition(2, 0, 1)?;
    let psi = random_state(&mut rng, &two);
    let invariant = symmetry::exchange_expectation_check(&j2, &psi, &swap)?;
    checks.push(Check::numeric(
        "exchange.invariant_observable",
        "a permutation-invariant observable has the same expectation after exchanging factors",
        invariant.difference,
        ctx.tol(symmetry::EXCHANGE_TOL),
    ));
    let z0 = crate::hilbert::lift(&pauli::z(), 0, &two)?;
    let control = symmetry::exchange_expectation_check(&z0, &product, &swap)?;
    checks.push(Check::boolean(
        "exchange.negative_control",
        "an observable that singles out one factor detects the exchange (difference 2)",
        !control.pass && (control.difference - 2.0).abs() < 1e-12,
    ));

    let mut homomorphism: f64 = 0.0;
    let perms = Permutation::all(4);
    let space = SpaceSpec::uniform(4, 2)?;
    for _ in 0..cfg.random_pairs {
        let p = &perms[rng.random_range(0..perms.len())];
        let q = &perms[rng.random_range(0..perms.len())];
        let lhs = symmetry::permutation_operator(&p.compose(q)?, &space)?;
        let rhs = &symmetry::permutation_operator(p, &space)? * &symmetry::permutation_operator(q, &space)?;
        homomorphism = homomorphism.max(max_abs(&(lhs.matrix() - rhs.matrix())));
    }
    checks.push(Check::numeric(
        "permutations.homomorphism",
        "U(p∘q) = U(p)U(q)",
        homomorphism,
        ctx.tol(1e-12),
    ));
    Ok((checks, details))
}

/// Product of smooth packets on grid factors and fixed spinors on spin
/// factors.
fn initial_state(space: &SpaceSpec, grid: Option<&Grid>) -> Result<StateVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut spins_seen = 0;
    let mut grids_seen = 0;
    let factors: Vec<StateVector> = space
        .factor_dims()
        .iter()
        .map(|&d| {
            let single = SpaceSpec::single(d)?;
            match grid {
                Some(g) if d == g.n_sites => {
                    let center = if grids_seen % 2 == 0 { g.length / 8.0 } else { -g.length / 8.0 };
                    grids_seen += 1;
                    StateVector::new(single, g.gaussian(center, 0.0, 1.5 * g.balanced_width()))
                }
                _ if d == 2 => {
                    spins_seen += 1;
                    if spins_seen == 1 {
                        StateVector::basis(single, 0)
                    } else {
                        StateVector::from_slice(single, &[c(r), c(r)])
                    }
                }
                _ => StateVector::basis(single, 0),
            }
        })
        .collect::<Result<_>>()?;
    StateVector::product(&factors)
}

fn dynamics(cfg: &DynamicsConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();

    let k = cfg.spin_coupling;
    let spins = BodyConfig::spins(vec![1.0, 1.0]);
    let hbar2 = spins.hbar * spins.hbar;
    let pure = PotentialSpec { v2: Some(RadialTable::constant(k)?), ..Default::default() };
    let values = dynamics::build_hamiltonian(&spins, &pure)?.eigh()?.values;
    let mut oracle = [-0.75 * k * hbar2, 0.25 * k * hbar2, 0.25 * k * hbar2, 0.25 * k * hbar2];
    oracle.sort_by(f64::total_cmp);
    let split = values.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::numeric(
        "spin_spin.singlet_triplet",
        "s₁·s₂ has eigenvalues −3ħ²/4 (once) and ħ²/4 (three times)",
        split,
        ctx.tol(1e-12),
    ));

    let t = cfg.tensor_coupling;
    let tensor = PotentialSpec { v3: Some(RadialTable::constant(t)?), ..Default::default() };
    let values = dynamics::build_hamiltonian(&spins, &tensor)?.eigh()?.values;
    let mut oracle = [-t * hbar2, 0.0, 0.5 * t * hbar2, 0.5 * t * hbar2];
    oracle.sort_by(f64::total_cmp);
    let residual = values.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::numeric(
        "spin_spin.tensor",
        "3(s₁·z)(s₂·z) − s₁·s₂ has eigenvalues −ħ², 0, ħ²/2, ħ²/2",
        residual,
        ctx.tol(1e-12),
    ));

    let h = dynamics::build_hamiltonian(&cfg.body, &cfg.potential)?;
    checks.push(Check::numeric(
        "hamiltonian.hermitian",
        "the N-body Hamiltonian is hermitian",
        h.hermiticity_residual(),
        ctx.tol(1e-12),
    ));
    let grid = cfg.body.grid.map(|g| Grid::new(g.n_sites, g.length)).transpose()?;
    let psi0 = initial_state(h.space(), grid.as_ref())?;
    let run = dynamics::evolve(&psi0, &h, cfg.body.hbar, cfg.t_final, cfg.n_steps)?;
    checks.push(Check::numeric(
        "evolution.norm",
        "unitary evolution preserves the norm",
        run.norm_drift(),
        ctx.tol(dynamics::NORM_DRIFT_TOL),
    ));
    checks.push(Check::numeric(
        "evolution.energy",
        "unitary evolution preserves ⟨H⟩",
        run.energy_drift(),
        ctx.tol(dynamics::ENERGY_DRIFT_TOL),
    ));
    details.insert("evolution".into(), to_value(&run));

    let weak = dynamics::weak_coupling_check(&cfg.coupled_body, &cfg.coupled_potential, &cfg.lambdas)?;
    checks.push(Check::numeric(
        "weak_coupling.free_limit",
        "at zero coupling H is exactly the sum of the lifted one-body Hamiltonians",
        weak.free_residual,
        0.0,
    ));
    checks.push(Check::numeric(
        "weak_coupling.linear",
        "‖H(λ) − H(0)‖/λ is independent of λ",
        weak.linearity_residual,
        ctx.tol(dynamics::LINEARITY_TOL),
    ));
    details.insert("weak_coupling".into(), to_value(&weak));

    let identical = cfg.coupled_body.masses.windows(2).all(|w| w[0] == w[1]) && cfg.coupled_body.masses.len() == 2;
    if identical && !cfg.coupled_body.relative {
        let hc = dynamics::build_hamiltonian(&cfg.coupled_body, &cfg.coupled_potential)?;
        let dims = hc.space().factor_dims();
        let half = dims.len() / 2;
        let body_dim: usize = dims[..half].iter().product();
        let bodies = SpaceSpec::uniform(2, body_dim)?;
        let swap = symmetry::permutation_operator(&Permutation::transposition(2, 0, 1)?, &bodies)?;
        let hb = Operator::new(bodies, hc.matrix().clone())?;
        checks.push(Check::numeric(
            "hamiltonian.exchange",
            "identical bodies: H commutes with their exchange",
            hb.commutator(&swap)?.norm(),
            ctx.tol(1e-10),
        ));
    }

    // Packets narrower than the balanced width keep both the box-edge and
    // band-edge tails below the tolerance.
    let (n, length) = (32, 8.0);
    let free_body = BodyConfig::on_grid(vec![1.0, 2.0], n, length);
    let g = Grid::new(n, length)?;
    // Table nodes on the lattice distances, so interpolation adds no kinks.
    let r: Vec<f64> = (0..=n / 2).map(|k| k as f64 * g.dx()).collect();
    let well = RadialTable::from_fn(r, |x| -(-x * x / 2.0).exp())?;
    let central = PotentialSpec { v: Some(well), ..Default::default() };
    let hp = dynamics::build_hamiltonian(&free_body, &central)?;
    let ptot = dynamics::total_momentum(&free_body)?;
    let w = 0.7 * g.balanced_width();
    let mut drift: f64 = 0.0;
    for (a, b) in [(-0.25, 0.25), (0.125, -0.125), (0.0, 0.375)] {
        let f1 = StateVector::new(SpaceSpec::single(n)?, g.gaussian(a, 0.0, w))?;
        let f2 = StateVector::new(SpaceSpec::single(n)?, g.gaussian(b, 0.0, w))?;
        let v = StateVector::product(&[f1, f2])?;
        let hp_v = hp.apply(&ptot.apply(&v)?)?;
        let ph_v = ptot.apply(&hp.apply(&v)?)?;
        drift = drift.max(hp_v.sub(&ph_v)?.norm() / (hp_v.norm() + ph_v.norm()));
    }
    details.insert("total_momentum_commutator".into(), json!(drift));
    checks.push(Check::numeric(
        "hamiltonian.total_momentum",
        "a relative-coordinate potential commutes with the total momentum (relative, smooth states)",
        drift,
        ctx.tol(1e-6),
    ));
    Ok((checks, details))
}

fn charge(cfg: &ChargeConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();
    let model = match &cfg.model {
        Some(spec) => spec.build()?,
        None => ChargeModel::two_mode(),
    };
    let central = charge::verify_central(&model);
    checks.push(Check::numeric(
        "central",
        "the charge commutes with every registered observable",
        central.entries.iter().map(|e| e.residual).fold(0.0, f64::max),
        ctx.tol(charge::CENTRAL_TOL),
    ));
    let angles = charge::sample_angles(cfg.n_angles.max(1));
    let gauge = angles.iter().map(|&t| charge::gauge_residual(&model, t)).fold(0.0, f64::max);
    checks.push(Check::numeric(
        "gauge.invariance",
        "exp(iθQ) leaves every registered observable unchanged",
        gauge,
        ctx.tol(charge::CENTRAL_TOL),
    ));
    let unitarity = angles
        .iter()
        .map(|&t| charge::gauge_transform(&model, t).unitarity_residual())
        .fold(0.0, f64::max);
    checks.push(Check::numeric("gauge.unitary", "exp(iθQ) is unitary", unitarity, ctx.tol(1e-10)));
    let turn = charge::gauge_transform(&model, 2.0 * std::f64::consts::PI);
    checks.push(Check::numeric(
        "gauge.full_turn",
        "with integer charges exp(2πiQ) = I",
        max_abs(&(turn.matrix() - Operator::identity(model.space()).matrix())),
        ctx.tol(1e-10),
    ));

    let sectors = charge::sector_decomposition(&model);
    checks.push(Check::boolean("sectors.neutral_unique", "the neutral sector is one-dimensional", sectors.neutral_unique));
    checks.push(Check::numeric(
        "sectors.resolution",
        "sector projectors sum to the identity",
        sectors.resolution_residual,
        ctx.tol(1e-12),
    ));
    checks.push(Check::numeric(
        "sectors.orthogonal",
        "projectors of different sectors are orthogonal",
        sectors.orthogonality_residual,
        ctx.tol(1e-12),
    ));
    checks.push(Check::numeric(
        "sectors.superselection",
        "registered observables have no matrix elements between sectors",
        sectors.off_diagonal,
        ctx.tol(charge::BLOCK_TOL),
    ));
    if let Some(vacuum) = &sectors.vacuum {
        checks.push(Check::numeric(
            "sectors.vacuum",
            "the vacuum is left fixed by gauge transformations and by the observables' unitary groups",
            vacuum.residual,
            ctx.tol(charge::CENTRAL_TOL),
        ));
    }
    let charges = model.charges();
    let mut spread: f64 = 0.0;
    let mut phases = Vec::new();
    for (i, &qa) in charges.iter().enumerate() {
        for &qb in &charges[i + 1..] {
            let report = charge::phase_invisibility(&model, qa, qb, cfg.n_phases)?;
            spread = spread.max(report.max_spread);
            phases.push(to_value(&report));
        }
    }
    checks.push(Check::numeric(
        "phases.invisible",
        "expectations in superpositions across sectors do not depend on the relative phase",
        spread,
        ctx.tol(charge::PHASE_TOL),
    ));
    let mixing = ChargeModel::new(
        Operator::diagonal(&SpaceSpec::single(2)?, &[0.0, 1.0])?,
        vec![("sigma_x".into(), pauli::x())],
        None,
    )?;
    checks.push(Check::boolean(
        "central.negative_control",
        "an observable mixing charge sectors is rejected",
        !charge::verify_central(&mixing).pass,
    ));
    details.insert("central".into(), to_value(&central));
    details.insert("sectors".into(), to_value(&sectors));
    details.insert("phases".into(), Value::Array(phases));
    Ok((checks, details))
}

fn epr(cfg: &EprSuiteConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();
    let mut rng = ctx.rng(5);
    let pc = cfg.pair;
    let report = epr::commuting_pair_check(&pc)?;
    let n = pc.n_sites as f64;
    checks.push(Check::numeric(
        "commuting_pair",
        "separation and total momentum commute (relative)",
        report.commutator_residual,
        ctx.tol(epr::COMMUTATOR_TOL),
    ));
    checks.push(Check::numeric("state.normalized", "the pair state is normalized", (report.norm - 1.0).abs(), ctx.tol(1e-10)));
    checks.push(Check::numeric(
        "state.separation",
        "⟨X₁ − X₂⟩ = a",
        (report.mean_separation - pc.separation).abs(),
        ctx.tol(pc.width / n.sqrt()),
    ));
    checks.push(Check::numeric(
        "state.separation_spread",
        "Var(X₁ − X₂) = w² (relative)",
        (report.var_separation / report.expected_var_separation - 1.0).abs(),
        ctx.tol(1e-6),
    ));
    checks.push(Check::numeric(
        "state.total_momentum",
        "⟨P⟩ = p",
        (report.mean_total_momentum - pc.momentum).abs(),
        ctx.tol(1e-9),
    ));
    checks.push(Check::numeric(
        "state.total_momentum_spread",
        "Var(P) vanishes",
        report.var_total_momentum.abs(),
        ctx.tol(1e-9),
    ));
    checks.push(Check::numeric(
        "state.single_momentum_spread",
        "one particle's momentum has variance ħ²/4w² (relative)",
        (report.var_momentum_1 / report.expected_var_momentum_1 - 1.0).abs(),
        ctx.tol(1e-6),
    ));
    let at_rest = EprPair::new(EprConfig { momentum: 0.0, ..pc })?;
    checks.push(Check::numeric(
        "state.translation",
        "at zero momentum a joint translation leaves the state unchanged",
        (at_rest.joint_shift_overlap() - 1.0).abs(),
        ctx.tol(1e-10),
    ));

    let grid = pc.grid()?;
    let dx = grid.dx();
    let mut offset: f64 = 0.0;
    let mut width: f64 = 0.0;
    let mut trials = Vec::new();
    for _ in 0..cfg.inference_trials {
        let a = rng.random_range(-pc.length / 4.0..pc.length / 4.0);
        let x1 = rng.random_range(-0.45 * pc.length..0.45 * pc.length);
        let dist = epr::conditional_inference(&EprConfig { separation: a, ..pc }, x1)?;
        let miss = grid.min_image(dist.mode - (dist.x1 - a)).abs();
        offset = offset.max(miss / dx);
        width = width.max((dist.width / pc.width - 1.0).abs());
        trials.push(json!({"separation": a, "x1": dist.x1, "mode": dist.mode, "width": dist.width}));
    }
    checks.push(Check::numeric(
        "inference.mode",
        "measuring x₁ predicts x₂ = x₁ − a (in grid spacings)",
        offset,
        1.0,
    ));
    checks.push(Check::numeric(
        "inference.width",
        "the conditional distribution has width w (relative)",
        width,
        0.2,
    ));
    details.insert("pair".into(), to_value(&report));
    details.insert("inference".into(), Value::Array(trials));
    Ok((checks, details))
}

fn bell(cfg: &BellConfig, ctx: &Context) -> Result<(Vec<Check>, Details)> {
    let mut checks = Vec::new();
    let mut details = Details::new();
    let optimal = ChshSettings::optimal();
    let s_opt = bell::chsh_quantum(&optimal);
    checks.push(Check::numeric(
        "quantum.optimal",
        "the singlet reaches |S| = 2√2 at (0, π/2, π/4, 3π/4)",
        (s_opt.abs() - bell::BOUND_QUANTUM).abs(),
        ctx.tol(1e-10),
    ));
    let s = bell::chsh_quantum(&cfg.angles);
    checks.push(Check::numeric(
        "quantum.bound",
        "|S| never exceeds 2√2",
        (s.abs() - bell::BOUND_QUANTUM).max(0.0),
        ctx.tol(1e-10),
    ));
    let angles: Vec<f64> = (0..12).map(|k| k as f64 * 0.55 - 3.0).collect();
    let mut corr: f64 = 0.0;
    let mut rotation: f64 = 0.0;
    for &a in &angles {
        for &b in &angles {
            corr = corr.max((bell::singlet_correlation(a, b) + (a - b).cos()).abs());
        }
        rotation = rotation.max((bell::chsh_quantum(&cfg.angles.rotated(a)) - s).abs());
    }
    checks.push(Check::numeric("quantum.correlation", "E(a, b) = −cos(a − b)", corr, ctx.tol(1e-10)));
    checks.push(Check::numeric(
        "quantum.rotation",
        "S is unchanged by rotating all analyzers together",
        rotation,
        ctx.tol(1e-10),
    ));

    let mut reports = Vec::new();
    for (k, &model) in cfg.models.iter().enumerate() {
        let exact = model.chsh_exact(&cfg.angles).abs().max(model.chsh_exact(&optimal).abs());
        checks.push(Check::numeric(
            format!("lhv.{model}.exact_bound"),
            "a local hidden-variable model keeps |S| ≤ 2 (exact quadrature)",
            (exact - bell::BOUND_CLASSICAL).max(0.0),
            ctx.tol(1e-6),
        ));
        let seed = ctx.seed.wrapping_add(k as u64);
        let report = bell::bell_report(&cfg.angles, model, cfg.n_samples, seed)?;
        checks.push(Check::numeric(
            format!("lhv.{model}.sampled"),
            "the sampled estimate lies within 5 standard errors of the quadrature value",
            (report.S_lhv_signed - report.S_lhv_exact).abs(),
            ctx.tol(5.0 * report.stderr_lhv).max(1e-12),
        ));
        reports.push(report);
    }
    let probe = ChshSettings::new(0.0, 0.9, 0.4, 1.7);
    let base = (cfg.n_samples / 4).max(bell::MIN_SAMPLES);
    let small = bell::chsh_lhv(LhvModel::Polarization, &probe, base, ctx.seed)?;
    let large = bell::chsh_lhv(LhvModel::Polarization, &probe, 4 * base, ctx.seed)?;
    checks.push(Check::numeric(
        "lhv.stderr_scaling",
        "four times the samples halve the standard error (relative deviation)",
        (large.stderr / small.stderr / 0.5 - 1.0).abs(),
        0.3,
    ));
    let verdict = bell::bell_report(&optimal, LhvModel::SignCosine, bell::MIN_SAMPLES, ctx.seed)?.verdict;
    checks.push(Check::boolean(
        "verdict.optimal",
        "at the optimal settings the quantum prediction violates the classical bound",
        verdict == bell::VIOLATED,
    ));
    details.insert("reports".into(), to_value(&reports));
    details.insert("S_quantum".into(), json!(s.abs()));
    Ok((checks, details))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_counts() {
        assert_eq!(enumerate_sector_ranks(2, 2), (3, 1));
        assert_eq!(enumerate_sector_ranks(3, 3), (10, 1));
        assert_eq!(enumerate_sector_ranks(4, 2), (5, 0));
    }

    #[test]
    fn config_defaults_round_trip() {
        let cfg = Config::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), cfg);
        assert_eq!(Config::from_json("{}").unwrap(), cfg);
        assert!(Config::from_json(r#"{"unknown": 1}"#).is_err());
    }

    #[test]
    fn suite_names() {
        for s in Suite::SINGLE {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn packets_are_seeded() {
        let g = Grid::new(32, 8.0).unwrap();
        let a = band_limited_states(&g, 3, &mut ChaCha8Rng::seed_from_u64(4));
        let b = band_limited_states(&g, 3, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }
}
