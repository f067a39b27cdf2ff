//! Charge operators, global gauge transformations and charge sectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, conjugate_by_unitary, max_abs, CMatrix, Operator, SpaceSpec, StateVector, C64};

pub const CENTRAL_TOL: f64 = 1e-10;
pub const INTEGER_TOL: f64 = 1e-9;
pub const BLOCK_TOL: f64 = 1e-12;
pub const PHASE_TOL: f64 = 1e-10;

/// Hermitian charge Q ≠ I with integer spectrum, together with the
/// observables it must commute with.
#[derive(Clone, Debug)]
pub struct ChargeModel {
    q: Operator,
    observables: Vec<(String, Operator)>,
    vacuum: Option<usize>,
    charges: Vec<i64>,
    eigenvectors: CMatrix,
}

impl ChargeModel {
    pub fn new(q: Operator, observables: Vec<(String, Operator)>, vacuum: Option<usize>) -> Result<Self> {
        let eig = q.eigh().map_err(|_| Error::InvalidCharge("charge operator is not hermitian".into()))?;
        let mut charges = Vec::with_capacity(eig.values.len());
        for &v in &eig.values {
            let r = v.round();
            if (v - r).abs() > INTEGER_TOL {
                return Err(Error::InvalidCharge(format!("eigenvalue {v} is not an integer")));
            }
            charges.push(r as i64);
        }
        if max_abs(&(q.matrix() - Operator::identity(q.space()).matrix())) <= INTEGER_TOL {
            return Err(Error::InvalidCharge("charge operator equals the identity".into()));
        }
        for (name, a) in &observables {
            if a.space() != q.space() {
                return Err(Error::InvalidCharge(format!("observable {name} lives on another space")));
            }
            a.check_hermitian()?;
        }
        if let Some(v) = vacuum {
            if v >= q.dim() {
                return Err(Error::InvalidCharge(format!("vacuum index {v} outside dimension {}", q.dim())));
            }
        }
        Ok(Self { q, observables, vacuum, charges, eigenvectors: eig.vectors })
    }

    /// Two modes with charges 0, 1, 1, 2 on |00⟩, |01⟩, |10⟩, |11⟩;
    /// observables are a charge-conserving hop and two diagonal energies.
    /// |00⟩ is the vacuum.
    pub fn two_mode() -> Self {
        let space = SpaceSpec::uniform(2, 2).expect("valid");
        let q = Operator::diagonal(&space, &[0.0, 1.0, 1.0, 2.0]).expect("size");
        let hop = Operator::from_real(
            space.clone(),
            &[&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]],
        )
        .expect("size");
        let observables = vec![
            ("hop".to_string(), hop),
            ("mode_energy".to_string(), Operator::diagonal(&space, &[0.0, 0.7, 1.3, 2.0]).expect("size")),
            ("pair_energy".to_string(), Operator::diagonal(&space, &[0.0, 0.0, 0.0, 0.5]).expect("size")),
        ];
        Self::new(q, observables, Some(0)).expect("consistent model")
    }

    pub fn space(&self) -> &SpaceSpec {
        self.q.space()
    }

    pub fn q(&self) -> &Operator {
        &self.q
    }

    pub fn observables(&self) -> &[(String, Operator)] {
        &self.observables
    }

    pub fn vacuum(&self) -> Option<usize> {
        self.vacuum
    }

    /// Distinct charges, ascending.
    pub fn charges(&self) -> Vec<i64> {
        let mut out = self.charges.clone();
        out.dedup();
        out
    }

    /// Orthogonal projector onto the sector of charge `q`.
    pub fn sector_projector(&self, charge: i64) -> Operator {
        let n = self.q.dim();
        let mut p = CMatrix::zeros(n, n);
        for (k, _) in self.charges.iter().enumerate().filter(|(_, &q)| q == charge) {
            let v = self.eigenvectors.column(k);
            p += v * v.adjoint();
        }
        Operator::new(self.space().clone(), p).expect("same size")
    }

    /// Unit vector spanning part of the sector of charge `q`.
    pub fn sector_state(&self, charge: i64) -> Option<StateVector> {
        let k = self.charges.iter().position(|&q| q == charge)?;
        StateVector::new(self.space().clone(), self.eigenvectors.column(k).clone_owned()).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableResidual {
    pub observable: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralReport {
    pub entries: Vec<ObservableResidual>,
    pub tolerance: f64,
    pub pass: bool,
}

/// ‖[Q, A]‖ for every registered observable.
pub fn verify_central(model: &ChargeModel) -> CentralReport {
    let entries: Vec<ObservableResidual> = model
        .observables
        .iter()
        .map(|(name, a)| {
            let residual = model.q.commutator(a).expect("same space").norm();
            ObservableResidual { observable: name.clone(), residual, pass: residual <= CENTRAL_TOL }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    CentralReport { entries, tolerance: CENTRAL_TOL, pass }
}

/// exp(iθQ).
pub fn gauge_transform(model: &ChargeModel, theta: f64) -> Operator {
    model.q.exp_i(theta).expect("charge is hermitian")
}

/// max ‖U A U† − A‖ over registered observables, U = exp(iθQ).
pub fn gauge_residual(model: &ChargeModel, theta: f64) -> f64 {
    let u = gauge_transform(model, theta);
    model
        .observables
        .iter()
        .map(|(_, a)| (&conjugate_by_unitary(a, &u).expect("same space") - a).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct Sector {
    pub charge: i64,
    pub dim: usize,
    #[serde(skip)]
    pub projector: Operator,
}

#[derive(Clone, Debug, Serialize)]
pub struct VacuumCheck {
    pub index: usize,
    /// max ‖Uv − v‖ over gauge transformations and the one-parameter groups
    /// of the registered observables.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub sectors: Vec<Sector>,
    /// Dimension of the neutral (q = 0) sector; a unique neutral state
    /// means dimension one.
    pub neutral_dim: usize,
    pub neutral_unique: bool,
    pub vacuum: Option<VacuumCheck>,
    /// ‖Σ P_q − I‖ (max-abs entries).
    pub resolution_residual: f64,
    /// max ‖P_q P_q′‖ over distinct sectors.
    pub orthogonality_residual: f64,
    /// max |⟨q|A|q′⟩| over observables and distinct sectors.
    pub off_diagonal: f64,
    pub superselection: bool,
}

/// Angles at which gauge transformations are sampled.
pub fn sample_angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * std::f64::consts::PI * k as f64 / count as f64).collect()
}

pub fn sector_decomposition(model: &ChargeModel) -> SectorReport {
    let sectors: Vec<Sector> = model
        .charges()
        .into_iter()
        .map(|charge| Sector {
            charge,
            dim: model.charges.iter().filter(|&&q| q == charge).count(),
            projector: model.sector_projector(charge),
        })
        .collect();
    let n = model.q.dim();
    let mut sum = CMatrix::zeros(n, n);
    let mut orthogonality_residual: f64 = 0.0;
    let mut off_diagonal: f64 = 0.0;
    for (i, s) in sectors.iter().enumerate() {
        sum += s.projector.matrix();
        for t in sectors.iter().skip(i + 1) {
            orthogonality_residual = orthogonality_residual.max(max_abs(&(s.projector.matrix() * t.projector.matrix())));
        }
        for t in sectors.iter().filter(|t| t.charge != s.charge) {
            for (_, a) in &model.observables {
                let block = s.projector.matrix() * a.matrix() * t.projector.matrix();
                off_diagonal = off_diagonal.max(max_abs(&block));
            }
        }
    }
    let resolution_residual = max_abs(&(sum - CMatrix::identity(n, n)));
    let neutral_dim = sectors.iter().find(|s| s.charge == 0).map_or(0, |s| s.dim);
    let vacuum = model.vacuum.map(|index| {
        let v = StateVector::basis(model.space().clone(), index).expect("index checked");
        let mut residual: f64 = 0.0;
        let mut moved = |u: &Operator| {
            let r = u.apply(&v).expect("same space").sub(&v).expect("same space").norm();
            residual = residual.max(r);
        };
        for theta in sample_angles(16) {
            moved(&gauge_transform(model, theta));
        }
        for (_, a) in &model.observables {
            moved(&a.exp_i(1.0).expect("hermitian"));
        }
        VacuumCheck { index, residual, pass: residual <= CENTRAL_TOL }
    });
    SectorReport {
        neutral_unique: neutral_dim == 1,
        neutral_dim,
        sectors,
        vacuum,
        resolution_residual,
        orthogonality_residual,
        superselection: off_diagonal <= BLOCK_TOL,
        off_diagonal,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseReport {
    pub charges: (i64, i64),
    pub n_phases: usize,
    /// Spread (max − min) of each observable's expectation over the phases.
    pub spreads: BTreeMap<String, f64>,
    pub max_spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Expectations of registered observables in (|a⟩ + e^{iα}|b⟩)/√2 at
/// `n_phases` equally spaced α, where |a⟩ and |b⟩ are unit vectors of
/// charge `qa` and `qb`.
pub fn phase_invisibility(model: &ChargeModel, qa: i64, qb: i64, n_phases: usize) -> Result<PhaseReport> {
    if qa == qb {
        return Err(Error::InvalidCharge("relative phases need two distinct sectors".into()));
    }
    let missing = |q| Error::InvalidCharge(format!("no sector with charge {q}"));
    let a = model.sector_state(qa).ok_or_else(|| missing(qa))?;
    let b = model.sector_state(qb).ok_or_else(|| missing(qb))?;
    let mut spreads = BTreeMap::new();
    let alphas = sample_angles(n_phases.max(1));
    let states: Vec<StateVector> = alphas
        .iter()
        .map(|&alpha| a.add(&b.scaled(C64::from_polar(1.0, alpha))).map(|s| s.scaled(c(std::f64::consts::FRAC_1_SQRT_2))))
        .collect::<Result<_>>()?;
    for (name, obs) in &model.observables {
        let values: Vec<f64> = states.iter().map(|s| obs.expectation(s).map(|e| e.re)).collect::<Result<_>>()?;
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        spreads.insert(name.clone(), hi - lo);
    }
    let max_spread = spreads.values().copied().fold(0.0, f64::max);
    Ok(PhaseReport {
        charges: (qa, qb),
        n_phases: alphas.len(),
        spreads,
        max_spread,
        tolerance: PHASE_TOL,
        pass: max_spread <= PHASE_TOL,
    })
}

/// Charge model as written in a configuration file: a diagonal charge in
/// the computational basis and real symmetric observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeModelSpec {
    pub factor_dims: Vec<usize>,
    pub charges: Vec<f64>,
    #[serde(default)]
    pub observables: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub vacuum: Option<usize>,
}

impl ChargeModelSpec {
    pub fn build(&self) -> Result<ChargeModel> {
        let space = SpaceSpec::new(self.factor_dims.clone())?;
        let q = Operator::diagonal(&space, &self.charges)?;
        let observables = self
            .observables
            .iter()
            .map(|(name, rows)| {
                let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                Ok((name.clone(), Operator::from_real(space.clone(), &rows)?))
            })
            .collect::<Result<_>>()?;
        ChargeModel::new(q, observables, self.vacuum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;

    fn qubit_model(obs: Operator) -> ChargeModel {
        let q = Operator::diagonal(&SpaceSpec::single(2).unwrap(), &[0.0, 1.0]).unwrap();
        ChargeModel::new(q, vec![("a".into(), obs)], None).unwrap()
    }

    #[test]
    fn central_examples() {
        let diag = Operator::diagonal(&SpaceSpec::single(2).unwrap(), &[0.3, -1.2]).unwrap();
        assert!(verify_central(&qubit_model(diag)).pass);
        assert!(verify_central(&qubit_model(pauli::identity())).pass);
        let mixing = verify_central(&qubit_model(pauli::x()));
        assert!(!mixing.pass);
        assert!(mixing.entries[0].residual > 1.0);
    }

    #[test]
    fn rejects_bad_charges() {
        let space = SpaceSpec::single(2).unwrap();
        let half = Operator::diagonal(&space, &[0.0, 0.5]).unwrap();
        assert!(matches!(ChargeModel::new(half, vec![], None), Err(Error::InvalidCharge(_))));
        assert!(ChargeModel::new(Operator::identity(&space), vec![], None).is_err());
        assert!(ChargeModel::new(pauli::z(), vec![], Some(5)).is_err());
    }

    #[test]
    fn full_turn_is_identity() {
        let model = ChargeModel::two_mode();
        let id = Operator::identity(model.space());
        assert!((&gauge_transform(&model, 0.0) - &id).norm() < 1e-15);
        assert!((&gauge_transform(&model, 2.0 * std::f64::consts::PI) - &id).norm() < 1e-10);
        assert!(gauge_residual(&model, 0.77) < 1e-10);
    }

    #[test]
    fn neutral_sector_uniqueness() {
        let space = SpaceSpec::single(3).unwrap();
        let unique = ChargeModel::new(Operator::diagonal(&space, &[0.0, 1.0, 1.0]).unwrap(), vec![], None).unwrap();
        let report = sector_decomposition(&unique);
        assert!(report.neutral_unique);
        assert_eq!(report.sectors.iter().map(|s| s.dim).collect::<Vec<_>>(), vec![1, 2]);
        let doubled = ChargeModel::new(Operator::diagonal(&space, &[0.0, 0.0, 1.0]).unwrap(), vec![], None).unwrap();
        let report = sector_decomposition(&doubled);
        assert!(!report.neutral_unique);
        assert_eq!(report.neutral_dim, 2);
    }

    #[test]
    fn two_mode_structure() {
        let model = ChargeModel::two_mode();
        assert!(verify_central(&model).pass);
        let report = sector_decomposition(&model);
        assert_eq!(model.charges(), vec![0, 1, 2]);
        assert!(report.superselection && report.neutral_unique);
        assert!(report.resolution_residual < 1e-12 && report.orthogonality_residual < 1e-12);
        assert!(report.vacuum.unwrap().pass);
        let phases = phase_invisibility(&model, 0, 2, 16).unwrap();
        assert!(phases.pass, "{phases:?}");
    }

    #[test]
    fn mixing_observable_sees_phase() {
        let space = SpaceSpec::single(2).unwrap();
        let q = Operator::diagonal(&space, &[0.0, 1.0]).unwrap();
        let model = ChargeModel::new(q, vec![("x".into(), pauli::x())], None).unwrap();
        let report = phase_invisibility(&model, 0, 1, 16).unwrap();
        assert!(!report.pass);
        assert!((report.max_spread - 2.0).abs() < 1e-12);
        assert!(!sector_decomposition(&model).superselection);
    }

    #[test]
    fn spec_round_trip() {
        let spec: ChargeModelSpec = serde_json::from_str(
            r#"{"factor_dims": [3], "charges": [-1, 0, 1], "observables": {"e": [[1,0,0],[0,2,0],[0,0,3]]}, "vacuum": 1}"#,
        )
        .unwrap();
        let model = spec.build().unwrap();
        assert!(verify_central(&model).pass);
        assert!(!sector_decomposition(&model).vacuum.unwrap().pass);
    }
}
