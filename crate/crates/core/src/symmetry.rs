//! Permutations of identical tensor factors, the symmetrizer and
//! antisymmetrizer, and the checks built on them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{c, max_abs, CMatrix, Operator, SpaceSpec, StateVector};

/// Sector classification tolerance.
pub const SECTOR_TOL: f64 = 1e-9;
/// Expectation-difference tolerance for the exchange check.
pub const EXCHANGE_TOL: f64 = 1e-10;
/// Norm below which an antisymmetrized product counts as annihilated.
pub const EXCLUSION_TOL: f64 = 1e-12;
/// Largest dⁿ for which projectors are built densely.
pub const MAX_PROJECTOR_DIM: usize = 4096;

/// Bijection of {0..n}: factor k moves to position `image[k]`. With this
/// convention U(p∘q) = U(p)·U(q).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &k in &image {
            if k >= image.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidPermutation(format!("cannot swap {a} and {b} among {n}")));
        }
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Ok(Self { image })
    }

    /// All n! permutations in lexicographic order of their images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { image: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else { break };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("successor exists");
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Sign of the permutation from its cycle decomposition.
    pub fn parity(&self) -> i8 {
        let n = self.image.len();
        let mut seen = vec![false; n];
        let mut even_cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.image[k];
                len += 1;
            }
            if len % 2 == 0 {
                even_cycles += 1;
            }
        }
        if even_cycles % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// (self ∘ other)(k) = self(other(k)).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::InvalidPermutation("composing permutations of different sizes".into()));
        }
        Ok(Self { image: other.image.iter().map(|&k| self.image[k]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.len()];
        for (k, &t) in self.image.iter().enumerate() {
            image[t] = k;
        }
        Self { image }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.image.iter().map(|k| (k + 1).to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

fn equal_factor_dim(space: &SpaceSpec) -> Result<usize> {
    space.uniform_dim().ok_or_else(|| Error::UnequalFactors(space.factor_dims().to_vec()))
}

/// Basis index reached from `index` when factor k moves to `perm[k]`.
fn permuted_index(space: &SpaceSpec, perm: &Permutation, index: usize) -> usize {
    let digits = space.digits(index);
    let mut moved = vec![0; digits.len()];
    for (k, &d) in digits.iter().enumerate() {
        moved[perm.image[k]] = d;
    }
    space.compose_index(&moved)
}

/// Unitary permuting the tensor factors of `space`.
pub fn permutation_operator(perm: &Permutation, space: &SpaceSpec) -> Result<Operator> {
    equal_factor_dim(space)?;
    if perm.len() != space.n_factors() {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} acting on {} factors",
            perm.len(),
            space.n_factors()
        )));
    }
    let n = space.total_dim();
    let mut m = CMatrix::zeros(n, n);
    for index in 0..n {
        m[(permuted_index(space, perm, index), index)] = c(1.0);
    }
    Operator::new(space.clone(), m)
}

/// Symmetrizer and antisymmetrizer on n copies of a d-dimensional space.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    pub symmetrizer: Operator,
    pub antisymmetrizer: Operator,
    pub space: SpaceSpec,
}

impl ProjectorPair {
    pub fn rank_symmetric(&self) -> usize {
        self.symmetrizer.trace().re.round() as usize
    }

    pub fn rank_antisymmetric(&self) -> usize {
        self.antisymmetrizer.trace().re.round() as usize
    }

    /// S + A: the states with a one-dimensional permutation behaviour.
    pub fn physical_projector(&self) -> Operator {
        &self.symmetrizer + &self.antisymmetrizer
    }

    /// Largest of ‖S² − S‖, ‖A² − A‖ and ‖SA‖ (max-abs entries).
    pub fn projector_residual(&self) -> f64 {
        let s = self.symmetrizer.matrix();
        let a = self.antisymmetrizer.matrix();
        max_abs(&(s * s - s)).max(max_abs(&(a * a - a))).max(max_abs(&(s * a)))
    }
}

pub fn build_projectors(n: usize, d: usize) -> Result<ProjectorPair> {
    if n < 2 || d < 1 {
        return Err(Error::InvalidSpace(format!("need n ≥ 2 and d ≥ 1, got n={n}, d={d}")));
    }
    let dim = (d as u128).checked_pow(n as u32).filter(|&v| v <= MAX_PROJECTOR_DIM as u128);
    let Some(dim) = dim else {
        return Err(Error::InvalidSpace(format!("{d}^{n} exceeds {MAX_PROJECTOR_DIM}")));
    };
    let dim = dim as usize;
    let space = SpaceSpec::uniform(n, d)?;
    let perms = Permutation::all(n);
    let weight = 1.0 / perms.len() as f64;
    let mut s = CMatrix::zeros(dim, dim);
    let mut a = CMatrix::zeros(dim, dim);
    for perm in &perms {
        let sign = perm.parity() as f64;
        for index in 0..dim {
            let target = permuted_index(&space, perm, index);
            s[(target, index)] += c(weight);
            a[(target, index)] += c(sign * weight);
        }
    }
    Ok(ProjectorPair {
        symmetrizer: Operator::new(space.clone(), s)?,
        antisymmetrizer: Operator::new(space.clone(), a)?,
        space,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrySector {
    Symmetric,
    Antisymmetric,
    Mixed,
}

impl SymmetrySector {
    /// Eigenvalue of a transposition on the sector, when it has one.
    pub fn lambda(self) -> Option<i8> {
        match self {
            Self::Symmetric => Some(1),
            Self::Antisymmetric => Some(-1),
            Self::Mixed => None,
        }
    }
}

impl fmt::Display for SymmetrySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Symmetric => "symmetric",
            Self::Antisymmetric => "antisymmetric",
            Self::Mixed => "mixed",
        })
    }
}

pub fn classify_state(psi: &StateVector) -> Result<SymmetrySector> {
    let space = psi.space();
    let d = equal_factor_dim(space)?;
    psi.check_normalized()?;
    let pair = build_projectors(space.n_factors(), d)?;
    classify_with(&pair, psi)
}

/// As [`classify_state`], reusing prebuilt projectors.
pub fn classify_with(pair: &ProjectorPair, psi: &StateVector) -> Result<SymmetrySector> {
    let off = |p: &Operator| -> Result<f64> { Ok(p.apply(psi)?.sub(psi)?.norm()) };
    if off(&pair.symmetrizer)? <= SECTOR_TOL {
        Ok(SymmetrySector::Symmetric)
    } else if off(&pair.antisymmetrizer)? <= SECTOR_TOL {
        Ok(SymmetrySector::Antisymmetric)
    } else {
        Ok(SymmetrySector::Mixed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExchangeReport {
    pub permutation: String,
    /// |⟨ψ|A|ψ⟩ − ⟨Uψ|A|Uψ⟩|.
    pub difference: f64,
    /// ‖[A, U]‖: zero when the observable cannot tell the factors apart.
    pub commutator_norm: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn exchange_expectation_check(obs: &Operator, psi: &StateVector, perm: &Permutation) -> Result<ExchangeReport> {
    let u = permutation_operator(perm, obs.space())?;
    let before = obs.expectation(psi)?;
    let after = obs.expectation(&u.apply(psi)?)?;
    let difference = (before - after).norm();
    Ok(ExchangeReport {
        permutation: perm.to_string(),
        difference,
        commutator_norm: obs.commutator(&u)?.norm(),
        tolerance: EXCHANGE_TOL,
        pass: difference <= EXCHANGE_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExclusionReport {
    /// ‖A(φ₁ ⊗ … ⊗ φₙ)‖.
    pub norm: f64,
    /// Whether two inputs are the same ray.
    pub repeated: bool,
    pub excluded: bool,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn pauli_exclusion_check(single_states: &[StateVector]) -> Result<ExclusionReport> {
    let Some(first) = single_states.first() else {
        return Err(Error::InvalidSpace("no single-particle states".into()));
    };
    let d = first.dim();
    if let Some(bad) = single_states.iter().find(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    if single_states.len() < 2 {
        return Err(Error::InvalidSpace("exclusion needs at least two states".into()));
    }
    let normalized: Vec<StateVector> = single_states.iter().map(StateVector::normalized).collect::<Result<_>>()?;
    let repeated = normalized
        .iter()
        .enumerate()
        .any(|(i, a)| normalized[i + 1..].iter().any(|b| a.same_ray(b, SECTOR_TOL)));
    let flat: Vec<StateVector> = normalized
        .iter()
        .map(|s| StateVector::new(SpaceSpec::single(d).expect("d ≥ 1"), s.amplitudes().clone()))
        .collect::<Result<_>>()?;
    let product = StateVector::product(&flat)?;
    let pair = build_projectors(flat.len(), d)?;
    let norm = pair.antisymmetrizer.apply(&product)?.norm();
    let excluded = norm <= EXCLUSION_TOL;
    Ok(ExclusionReport { norm, repeated, excluded, tolerance: EXCLUSION_TOL, pass: !repeated || excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{C64, ONE};
    use proptest::prelude::*;

    fn qubit(i: usize) -> StateVector {
        StateVector::basis(SpaceSpec::single(2).unwrap(), i).unwrap()
    }

    #[test]
    fn parity_of_small_permutations() {
        assert_eq!(Permutation::identity(4).parity(), 1);
        assert_eq!(Permutation::transposition(4, 1, 3).unwrap().parity(), -1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().parity(), 1);
        assert_eq!(Permutation::all(4).len(), 24);
        let odd = Permutation::all(4).iter().filter(|p| p.parity() < 0).count();
        assert_eq!(odd, 12);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::transposition(2, 1, 1).is_err());
    }

    #[test]
    fn swap_moves_factors() {
        let space = SpaceSpec::uniform(2, 2).unwrap();
        let swap = permutation_operator(&Permutation::transposition(2, 0, 1).unwrap(), &space).unwrap();
        let e01 = StateVector::product(&[qubit(0), qubit(1)]).unwrap();
        let e10 = StateVector::product(&[qubit(1), qubit(0)]).unwrap();
        assert_eq!(swap.apply(&e01).unwrap(), e10);
        assert_eq!((&swap * &swap).matrix(), Operator::identity(&space).matrix());
        let id = permutation_operator(&Permutation::identity(2), &space).unwrap();
        assert_eq!(id, Operator::identity(&space));
    }

    #[test]
    fn cycle_direction() {
        // Factor 0 → position 1, 1 → 2, 2 → 0.
        let space = SpaceSpec::new(vec![3, 3, 3]).unwrap();
        let cyc = permutation_operator(&Permutation::new(vec![1, 2, 0]).unwrap(), &space).unwrap();
        let from = space.compose_index(&[0, 1, 2]);
        let to = space.compose_index(&[2, 0, 1]);
        assert_eq!(cyc.matrix()[(to, from)], ONE);
    }

    #[test]
    fn unequal_factors_rejected() {
        let space = SpaceSpec::new(vec![2, 3]).unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        assert!(matches!(permutation_operator(&swap, &space), Err(Error::UnequalFactors(_))));
    }

    #[test]
    fn two_qubit_projectors() {
        let pair = build_projectors(2, 2).unwrap();
        assert_eq!((pair.rank_symmetric(), pair.rank_antisymmetric()), (3, 1));
        let sum = pair.physical_projector();
        assert!((&sum - &Operator::identity(&pair.space)).norm() < 1e-12);
        assert_eq!(build_projectors(3, 2).unwrap().rank_antisymmetric(), 0);
        assert!(build_projectors(1, 2).is_err());
        assert!(build_projectors(20, 2).is_err());
    }

    #[test]
    fn classification_examples() {
        let space = SpaceSpec::uniform(2, 2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sym = StateVector::from_slice(space.clone(), &[c(0.0), c(r), c(r), c(0.0)]).unwrap();
        let singlet = StateVector::from_slice(space.clone(), &[c(0.0), c(r), c(-r), c(0.0)]).unwrap();
        let product = StateVector::basis(space, 1).unwrap();
        assert_eq!(classify_state(&sym).unwrap(), SymmetrySector::Symmetric);
        assert_eq!(classify_state(&singlet).unwrap(), SymmetrySector::Antisymmetric);
        assert_eq!(classify_state(&product).unwrap(), SymmetrySector::Mixed);
        assert_eq!(SymmetrySector::Antisymmetric.lambda(), Some(-1));
    }

    #[test]
    fn exchange_negative_control() {
        let space = SpaceSpec::uniform(2, 2).unwrap();
        let z0 = crate::hilbert::lift(&crate::hilbert::pauli::z(), 0, &space).unwrap();
        let psi = StateVector::basis(space, 1).unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        let report = exchange_expectation_check(&z0, &psi, &swap).unwrap();
        assert!(!report.pass);
        assert!((report.difference - 2.0).abs() < 1e-15);
        assert!(report.commutator_norm > 0.0);
    }

    #[test]
    fn exclusion_examples() {
        let same = pauli_exclusion_check(&[qubit(0), qubit(0)]).unwrap();
        assert!(same.repeated && same.excluded && same.pass);
        let slater = pauli_exclusion_check(&[qubit(0), qubit(1)]).unwrap();
        assert!(!slater.repeated && slater.pass);
        assert!((slater.norm - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let phase = qubit(0).scaled(C64::from_polar(1.0, 0.3));
        assert!(pauli_exclusion_check(&[qubit(0), qubit(1), phase]).unwrap().excluded);
    }

    proptest! {
        #[test]
        fn permutation_operators_are_a_homomorphism(
            n in 2usize..=5,
            seed_a in any::<u64>(),
            seed_b in any::<u64>(),
        ) {
            let all = Permutation::all(n);
            let p = &all[(seed_a % all.len() as u64) as usize];
            let q = &all[(seed_b % all.len() as u64) as usize];
            let space = SpaceSpec::uniform(n, 2).unwrap();
            let up = permutation_operator(p, &space).unwrap();
            let uq = permutation_operator(q, &space).unwrap();
            let upq = permutation_operator(&p.compose(q).unwrap(), &space).unwrap();
            prop_assert!(max_abs(&(upq.matrix() - (&up * &uq).matrix())) <= 1e-12);
            prop_assert!(up.unitarity_residual() <= 1e-12);
            prop_assert_eq!(p.compose(q).unwrap().parity(), p.parity() * q.parity());
            prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(n));
        }
    }
}
