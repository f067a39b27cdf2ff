//! Operator realizations of the extended Galilei algebra and their residual
//! checks.
//!
//! Three builders are provided:
//!
//! * [`build_spin_rep`]: spin-j matrices for the rotation generators, with
//!   H, P and K zero and M a multiple of the identity.
//! * [`build_grid_rep`]: a single particle on a periodic grid along axis 1.
//!   The canonical relations cannot hold exactly in finite dimensions (the
//!   trace of `[K, P]` vanishes while that of `iħM` does not), so they are
//!   asserted only on a domain mask of smooth, centred states.
//! * [`build_additive_rep`]: tensor composition, each generator being the
//!   sum of its lifted part generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Generator, PhysicalConstants, StructureConstants};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hilbert::{c, CMatrix, Operator, SpaceSpec, C64, HERMITIAN_TOL, I, ZERO};

/// Documented verification tolerance of [`build_spin_rep`] images.
pub const SPIN_REP_TOL: f64 = 1e-12;
/// Documented relative tolerance of [`build_grid_rep`] on its domain mask.
pub const GRID_REP_TOL: f64 = 1e-6;

/// Subspace (orthonormal columns) on which relations are asserted.
#[derive(Clone, Debug)]
pub struct DomainMask {
    pub basis: CMatrix,
    pub description: String,
}

/// Images of the realized generators on a common space. Generators without
/// an image are not part of the representation and are never checked.
#[derive(Clone, Debug)]
pub struct AlgebraRep {
    space: SpaceSpec,
    images: BTreeMap<Generator, Operator>,
    domain_mask: Option<DomainMask>,
    hbar: f64,
    tolerance: f64,
    description: String,
}

impl AlgebraRep {
    pub fn new(
        space: SpaceSpec,
        images: BTreeMap<Generator, Operator>,
        domain_mask: Option<DomainMask>,
        consts: PhysicalConstants,
        tolerance: f64,
        description: impl Into<String>,
    ) -> Result<Self> {
        for (g, op) in &images {
            if op.space() != &space {
                return Err(Error::InvalidRepresentation(format!("image of {g} lives on another space")));
            }
            let residual = op.hermiticity_residual();
            if residual > HERMITIAN_TOL {
                return Err(Error::InvalidRepresentation(format!(
                    "image of {g} is not hermitian (residual {residual:.3e})"
                )));
            }
        }
        if let Some(m) = images.get(&Generator::M) {
            let min = min_eigenvalue(m)?;
            if min <= HERMITIAN_TOL {
                return Err(Error::InvalidRepresentation(format!("mass spectrum not positive (min {min})")));
            }
        }
        if let Some(mask) = &domain_mask {
            if mask.basis.nrows() != space.total_dim() {
                return Err(Error::DimensionMismatch { expected: space.total_dim(), found: mask.basis.nrows() });
            }
        }
        Ok(Self { space, images, domain_mask, hbar: consts.hbar, tolerance, description: description.into() })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn image(&self, g: Generator) -> Option<&Operator> {
        self.images.get(&g)
    }

    pub fn realized(&self) -> impl Iterator<Item = Generator> + '_ {
        self.images.keys().copied()
    }

    pub fn is_realized(&self, g: Generator) -> bool {
        self.images.contains_key(&g)
    }

    pub fn domain_mask(&self) -> Option<&DomainMask> {
        self.domain_mask.as_ref()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Documented tolerance for [`verify_rep`] on this representation.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Mass m when M = m·I.
    pub fn mass(&self) -> Option<f64> {
        let m = self.images.get(&Generator::M)?.matrix();
        let m0 = m[(0, 0)].re;
        let n = m.nrows();
        let scalar = (m - CMatrix::identity(n, n) * c(m0)).iter().all(|z| z.norm() <= 1e-12 * m0.abs().max(1.0));
        scalar.then_some(m0)
    }

    /// Replaces one image without re-validating the algebra. Used for
    /// negative controls.
    pub fn with_image(mut self, g: Generator, op: Operator) -> Result<Self> {
        if op.space() != &self.space {
            return Err(Error::InvalidRepresentation(format!("image of {g} lives on another space")));
        }
        self.images.insert(g, op);
        Ok(self)
    }

    /// J² = J₁² + J₂² + J₃², when the rotations are realized.
    pub fn casimir(&self) -> Option<Operator> {
        let mut acc = Operator::zeros(&self.space);
        for axis in 0..3 {
            let j = self.images.get(&Generator::j(axis))?;
            acc = &acc + &(j * j);
        }
        Some(acc)
    }

    /// Mask columns, or the identity when no mask is set.
    fn test_basis(&self) -> CMatrix {
        match &self.domain_mask {
            Some(mask) => mask.basis.clone(),
            None => {
                let n = self.space.total_dim();
                CMatrix::identity(n, n)
            }
        }
    }

    fn domain_label(&self) -> String {
        self.domain_mask
            .as_ref()
            .map_or_else(|| "full space".to_string(), |m| m.description.clone())
    }
}

fn min_eigenvalue(op: &Operator) -> Result<f64> {
    let m = op.matrix();
    let n = m.nrows();
    let off_diagonal = (0..n).any(|i| (0..n).any(|j| i != j && m[(i, j)] != ZERO));
    if off_diagonal {
        Ok(op.eigh()?.values[0])
    } else {
        Ok((0..n).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min))
    }
}

/// Spin-j rotation generators (basis ordered m = j, j−1, …, −j); H, P and
/// K are zero and M = mass·I.
pub fn build_spin_rep(j: f64, mass: f64, consts: PhysicalConstants) -> Result<AlgebraRep> {
    let twice = 2.0 * j;
    if !(j > 0.0) || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::InvalidSpin(j));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidRepresentation(format!("mass must be positive, got {mass}")));
    }
    let dim = twice.round() as usize + 1;
    let hbar = consts.hbar;
    let space = SpaceSpec::single(dim)?;
    let ms: Vec<f64> = (0..dim).map(|k| j - k as f64).collect();
    // J+ |m⟩ = ħ √(j(j+1) − m(m+1)) |m+1⟩; row k−1 holds m+1 when column k holds m.
    let mut raise = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let m = ms[k];
        raise[(k - 1, k)] = c(hbar * (j * (j + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let j1 = (&raise + &lower) * c(0.5);
    let j2 = (&raise - &lower) * (-I * 0.5);
    let j3 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, ms.iter().map(|&m| c(hbar * m))));
    let zero = Operator::zeros(&space);
    let images = BTreeMap::from([
        (Generator::J1, Operator::new(space.clone(), j1)?),
        (Generator::J2, Operator::new(space.clone(), j2)?),
        (Generator::J3, Operator::new(space.clone(), j3)?),
        (Generator::H, zero),
        (Generator::M, Operator::identity(&space).scaled(c(mass))),
    ]);
    AlgebraRep::new(space, images, None, consts, SPIN_REP_TOL, format!("spin j={}", fmt_half(j)))
}

fn fmt_half(j: f64) -> String {
    let twice = (2.0 * j).round() as i64;
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

/// Number of Hermite functions in a grid's domain mask: their classical
/// extent must stay within the central third of the box.
fn mask_size(grid: &Grid) -> usize {
    let reach = (std::f64::consts::PI * grid.n_sites as f64 / 2.0).sqrt() / 3.0;
    (((reach * reach - 1.0) / 2.0).floor() as usize).clamp(1, 12)
}

/// One particle on a periodic grid along axis 1: X diagonal, P spectral,
/// K = m·X, H = P²/2m, M = m·I.
pub fn build_grid_rep(n_sites: usize, length: f64, mass: f64, consts: PhysicalConstants) -> Result<AlgebraRep> {
    if n_sites < 8 {
        return Err(Error::InvalidRepresentation(format!("grid needs at least 8 sites, got {n_sites}")));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidRepresentation(format!("mass must be positive, got {mass}")));
    }
    let grid = Grid::new(n_sites, length)?;
    let hbar = consts.hbar;
    let space = grid.space();
    let p = grid.momentum_operator(hbar);
    let images = BTreeMap::from([
        (Generator::H, (&p * &p).scaled(c(0.5 / mass))),
        (Generator::K1, grid.position_operator().scaled(c(mass))),
        (Generator::P1, p),
        (Generator::M, Operator::identity(&space).scaled(c(mass))),
    ]);
    let count = mask_size(&grid);
    let sigma = grid.balanced_width();
    let mask = DomainMask {
        basis: grid.hermite_basis(count, sigma),
        description: format!("first {count} Hermite functions of width {sigma:.6} centred in a box of {n_sites} sites"),
    };
    AlgebraRep::new(
        space,
        images,
        Some(mask),
        consts,
        GRID_REP_TOL,
        format!("grid n={n_sites} L={length} m={mass}"),
    )
}

/// Operator on a block of consecutive factors embedded in `space`.
fn embed(op: &Operator, first_factor: usize, space: &SpaceSpec) -> Operator {
    let dims = space.factor_dims();
    let width = op.space().n_factors();
    let left: usize = dims[..first_factor].iter().product();
    let right: usize = dims[first_factor + width..].iter().product();
    let mut m = op.matrix().clone();
    if right > 1 {
        m = m.kronecker(&CMatrix::identity(right, right));
    }
    if left > 1 {
        m = CMatrix::identity(left, left).kronecker(&m);
    }
    Operator::new(space.clone(), m).expect("embedding preserves size")
}

/// Composite of several parts: each generator is the sum of the parts'
/// generators, lifted to the tensor-product space.
pub fn build_additive_rep(parts: &[AlgebraRep]) -> Result<AlgebraRep> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidRepresentation("additive rep needs at least one part".into()))?;
    let labels: BTreeSet<Generator> = first.realized().collect();
    for part in parts {
        if part.realized().collect::<BTreeSet<_>>() != labels {
            return Err(Error::InvalidRepresentation("parts realize different generators".into()));
        }
        if part.hbar != first.hbar {
            return Err(Error::InvalidRepresentation("parts use different ħ".into()));
        }
    }
    let space = parts[1..].iter().fold(first.space.clone(), |acc, p| acc.concat(&p.space));
    let offsets = part_offsets(parts);
    let mut images = BTreeMap::new();
    for &g in &labels {
        let mut total = Operator::zeros(&space);
        for (part, &offset) in parts.iter().zip(&offsets) {
            total = &total + &embed(part.image(g).expect("label checked"), offset, &space);
        }
        images.insert(g, total);
    }
    let domain_mask = if parts.iter().any(|p| p.domain_mask.is_some()) {
        let basis = parts[1..].iter().fold(first.test_basis(), |acc, p| acc.kronecker(&p.test_basis()));
        let description: Vec<String> = parts.iter().map(|p| p.domain_label()).collect();
        Some(DomainMask { basis, description: format!("product of [{}]", description.join("; ")) })
    } else {
        None
    };
    let tolerance = parts.iter().map(|p| p.tolerance).fold(0.0, f64::max);
    let description: Vec<&str> = parts.iter().map(|p| p.description.as_str()).collect();
    AlgebraRep::new(
        space,
        images,
        domain_mask,
        PhysicalConstants { hbar: first.hbar },
        tolerance,
        format!("sum of [{}]", description.join(", ")),
    )
}

fn part_offsets(parts: &[AlgebraRep]) -> Vec<usize> {
    parts
        .iter()
        .scan(0, |acc, p| {
            let here = *acc;
            *acc += p.space.n_factors();
            Some(here)
        })
        .collect()
}

/// One commutation relation checked on the domain mask.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub check: String,
    /// Frobenius norm of (lhs − rhs) on the mask columns.
    pub residual: f64,
    /// max(1, ‖rhs‖) on the same columns; the pass threshold is
    /// `tolerance · scale`.
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-relation residuals of a representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepReport {
    pub representation: String,
    pub domain_mask: String,
    pub tolerance: f64,
    pub entries: Vec<ResidualEntry>,
}

impl RepReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual / e.scale).fold(0.0, f64::max)
    }

    pub fn entry(&self, check: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.check == check)
    }
}

fn residual_entry(check: String, lhs: &CMatrix, rhs: &CMatrix, tolerance: f64, extra_ok: bool) -> ResidualEntry {
    let residual = (lhs - rhs).norm();
    let scale = rhs.norm().max(1.0);
    ResidualEntry { check, residual, scale, tolerance, pass: extra_ok && residual <= tolerance * scale }
}

/// Checks ‖[ρ(x), ρ(y)] − ρ([x, y])‖ on the domain mask for every pair of
/// realized generators.
pub fn verify_rep(rep: &AlgebraRep, tolerance: f64) -> RepReport {
    let sc = StructureConstants::galilei();
    let q = rep.test_basis();
    let applied: BTreeMap<Generator, CMatrix> = rep.images.iter().map(|(g, op)| (*g, op.matrix() * &q)).collect();
    let labels: Vec<Generator> = rep.realized().collect();
    let mut entries = Vec::new();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            let lhs = rep.images[&a].matrix() * &applied[&b] - rep.images[&b].matrix() * &applied[&a];
            let mut rhs = CMatrix::zeros(q.nrows(), q.ncols());
            let mut complete = true;
            for (g, coeff) in sc.bracket(a, b).terms() {
                match applied.get(g) {
                    Some(m) => rhs += m * coeff.evaluate(rep.hbar),
                    None => complete = false,
                }
            }
            entries.push(residual_entry(format!("[{a}, {b}]"), &lhs, &rhs, tolerance, complete));
        }
    }
    RepReport {
        representation: rep.description.clone(),
        domain_mask: rep.domain_label(),
        tolerance,
        entries,
    }
}

/// Checks the per-part relations of the additivity theorem on the
/// composite's mask: for every part r with mass m_r and position
/// X_r = K_r / m_r,
///
/// * [X_jr, P_i] = iħ δ_ij,  [P_i, P_jr] = 0,
/// * [K_i, X_jr] = 0,        [K_i, P_jr] = iħ δ_ij m_r,
/// * [J_i, X_jr] = iħ ε_ijk X_kr,  [J_i, P_jr] = iħ ε_ijk P_kr,
///
/// where unsuffixed generators are the composite's. Relations whose
/// generators are not realized are skipped.
pub fn verify_additivity(parts: &[AlgebraRep], total: &AlgebraRep, tolerance: f64) -> Result<RepReport> {
    let q = total.test_basis();
    let n = q.nrows();
    if n != total.space.total_dim() {
        return Err(Error::DimensionMismatch { expected: total.space.total_dim(), found: n });
    }
    let hbar = total.hbar;
    let ih = I * hbar;
    let offsets = part_offsets(parts);
    let applied = |op: &Operator| op.matrix() * &q;
    let comm = |a: &Operator, aq: &CMatrix, b: &Operator, bq: &CMatrix| a.matrix() * bq - b.matrix() * aq;
    let axes = |family: fn(usize) -> Generator, rep: &AlgebraRep| -> Vec<usize> {
        (0..3).filter(|&ax| rep.is_realized(family(ax))).collect()
    };
    let mut entries = Vec::new();
    for (r, (part, &offset)) in parts.iter().zip(&offsets).enumerate() {
        let Some(m_r) = part.mass() else { continue };
        let label = r + 1;
        let lifted = |g: Generator| part.image(g).map(|op| embed(op, offset, &total.space));
        let x_r: Vec<Option<Operator>> = (0..3).map(|ax| lifted(Generator::k(ax)).map(|k| k.scaled(c(1.0 / m_r)))).collect();
        let p_r: Vec<Option<Operator>> = (0..3).map(|ax| lifted(Generator::p(ax))).collect();
        for i in axes(Generator::p, total) {
            let p_i = total.image(Generator::p(i)).expect("axis realized");
            let p_iq = applied(p_i);
            for j in 0..3 {
                let delta = if i == j { c(1.0) } else { ZERO };
                if let Some(x) = &x_r[j] {
                    let lhs = comm(x, &applied(x), p_i, &p_iq);
                    entries.push(residual_entry(format!("[X{}_{label}, P{}]", j + 1, i + 1), &lhs, &(&q * (ih * delta)), tolerance, true));
                }
                if let Some(p) = &p_r[j] {
                    let lhs = comm(p_i, &p_iq, p, &applied(p));
                    entries.push(residual_entry(format!("[P{}, P{}_{label}]", i + 1, j + 1), &lhs, &CMatrix::zeros(n, q.ncols()), tolerance, true));
                }
            }
        }
        for i in axes(Generator::k, total) {
            let k_i = total.image(Generator::k(i)).expect("axis realized");
            let k_iq = applied(k_i);
            for j in 0..3 {
                let delta = if i == j { c(1.0) } else { ZERO };
                if let Some(x) = &x_r[j] {
                    let lhs = comm(k_i, &k_iq, x, &applied(x));
                    entries.push(residual_entry(format!("[K{}, X{}_{label}]", i + 1, j + 1), &lhs, &CMatrix::zeros(n, q.ncols()), tolerance, true));
                }
                if let Some(p) = &p_r[j] {
                    let lhs = comm(k_i, &k_iq, p, &applied(p));
                    entries.push(residual_entry(
                        format!("[K{}, P{}_{label}]", i + 1, j + 1),
                        &lhs,
                        &(&q * (ih * delta * m_r)),
                        tolerance,
                        true,
                    ));
                }
            }
        }
        for i in axes(Generator::j, total) {
            let j_i = total.image(Generator::j(i)).expect("axis realized");
            let j_iq = applied(j_i);
            for (name, family) in [("X", &x_r), ("P", &p_r)] {
                for j in 0..3 {
                    let Some(v) = &family[j] else { continue };
                    let lhs = comm(j_i, &j_iq, v, &applied(v));
                    let mut rhs = CMatrix::zeros(n, q.ncols());
                    let mut complete = true;
                    for k in 0..3 {
                        let eps = super::levi_civita(i, j, k);
                        if eps == 0 {
                            continue;
                        }
                        match &family[k] {
                            Some(vk) => rhs += applied(vk) * (ih * eps as f64),
                            None => complete = false,
                        }
                    }
                    entries.push(residual_entry(format!("[J{}, {name}{}_{label}]", i + 1, j + 1), &lhs, &rhs, tolerance, complete));
                }
            }
        }
    }
    Ok(RepReport {
        representation: total.description.clone(),
        domain_mask: total.domain_label(),
        tolerance,
        entries,
    })
}

fn max_column_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Largest commutator between images belonging to different parts, after
/// lifting to the composite space, probed on a fixed set of random vectors
/// (‖[A, B]v‖ / ‖v‖).
pub fn cross_part_commutator_norm(parts: &[AlgebraRep]) -> f64 {
    if parts.len() < 2 {
        return 0.0;
    }
    let space = parts[1..].iter().fold(parts[0].space.clone(), |acc, p| acc.concat(&p.space));
    let offsets = part_offsets(parts);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dim = space.total_dim();
    let probes = CMatrix::from_fn(dim, 4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let scale = probes.column_iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    let lifted: Vec<Vec<Operator>> = parts
        .iter()
        .zip(&offsets)
        .map(|(p, &o)| p.images.values().map(|a| embed(a, o, &space)).collect())
        .collect();
    for (r, ops) in lifted.iter().enumerate() {
        for others in &lifted[r + 1..] {
            for a in ops {
                for b in others {
                    let (ma, mb) = (a.matrix(), b.matrix());
                    let r = ma * (mb * &probes) - mb * (ma * &probes);
                    worst = worst.max(max_column_norm(&r) / scale);
                }
            }
        }
    }
    worst
}

/// Sign-flipped variant of the position–momentum relation, [P_i, X_jr] =
/// +iħ δ_ij, evaluated on the composite's mask. Returns the relative
/// residual for each part; a consistent representation fails this.
pub fn literal_momentum_position_residual(parts: &[AlgebraRep], total: &AlgebraRep) -> Vec<f64> {
    let q = total.test_basis();
    let offsets = part_offsets(parts);
    let Some(p1) = total.image(Generator::P1) else { return Vec::new() };
    parts
        .iter()
        .zip(&offsets)
        .filter_map(|(part, &offset)| {
            let m = part.mass()?;
            let x = embed(part.image(Generator::K1)?, offset, &total.space).scaled(c(1.0 / m));
            let lhs = p1.matrix() * (x.matrix() * &q) - x.matrix() * (p1.matrix() * &q);
            let rhs = &q * (I * total.hbar);
            Some((lhs - &rhs).norm() / rhs.norm())
        })
        .collect()
}
