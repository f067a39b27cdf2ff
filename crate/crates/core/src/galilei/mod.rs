//! The centrally extended Galilei Lie algebra.
//!
//! [`StructureConstants`] holds the bracket table exactly: every structure
//! constant is a rational multiple of a power of the formal symbol `iħ`, so
//! antisymmetry and the Jacobi identity are checked with zero residual.
//! Concrete operator realizations live in [`rep`].

pub mod rep;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{C64, I};

/// The eleven generators H, P₁..₃, K₁..₃, J₁..₃ and the central M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    H,
    P1,
    P2,
    P3,
    K1,
    K2,
    K3,
    J1,
    J2,
    J3,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    H,
    P,
    K,
    J,
    M,
}

use Generator::*;

impl Generator {
    pub const ALL: [Generator; 11] = [H, P1, P2, P3, K1, K2, K3, J1, J2, J3, M];

    pub fn p(axis: usize) -> Generator {
        [P1, P2, P3][axis]
    }

    pub fn k(axis: usize) -> Generator {
        [K1, K2, K3][axis]
    }

    pub fn j(axis: usize) -> Generator {
        [J1, J2, J3][axis]
    }

    pub fn family(self) -> Family {
        match self {
            H => Family::H,
            P1 | P2 | P3 => Family::P,
            K1 | K2 | K3 => Family::K,
            J1 | J2 | J3 => Family::J,
            M => Family::M,
        }
    }

    /// Spatial axis 0..3 of a vector generator.
    pub fn axis(self) -> Option<usize> {
        match self {
            P1 | K1 | J1 => Some(0),
            P2 | K2 | J2 => Some(1),
            P3 | K3 | J3 => Some(2),
            H | M => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Levi-Civita symbol on axes 0..3.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    if i == j || j == k || i == k {
        0
    } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
        1
    } else {
        -1
    }
}

/// Polynomial in the formal symbol z = iħ with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coeff(BTreeMap<u32, Rational64>);

impl Coeff {
    pub fn zero() -> Self {
        Self::default()
    }

    /// r·(iħ)^power.
    pub fn monomial(r: Rational64, power: u32) -> Self {
        let mut m = BTreeMap::new();
        if !r.is_zero() {
            m.insert(power, r);
        }
        Self(m)
    }

    pub fn integer(n: i64) -> Self {
        Self::monomial(Rational64::from_integer(n), 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        let mut out = self.0.clone();
        for (&p, r) in &other.0 {
            let e = out.entry(p).or_insert_with(Rational64::zero);
            *e += r;
            if e.is_zero() {
                out.remove(&p);
            }
        }
        Coeff(out)
    }

    pub fn neg(&self) -> Coeff {
        Coeff(self.0.iter().map(|(&p, r)| (p, -r)).collect())
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        let mut acc = Coeff::zero();
        for (&pa, ra) in &self.0 {
            for (&pb, rb) in &other.0 {
                acc = acc.add(&Coeff::monomial(ra * rb, pa + pb));
            }
        }
        acc
    }

    /// Numerical value with z = i·ħ.
    pub fn evaluate(&self, hbar: f64) -> C64 {
        self.0
            .iter()
            .map(|(&p, r)| (I * hbar).powu(p) * (*r.numer() as f64 / *r.denom() as f64))
            .sum()
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .map(|(&p, r)| {
                let sym = match p {
                    0 => String::new(),
                    1 => "iħ".to_string(),
                    _ => format!("(iħ)^{p}"),
                };
                match (r.is_one(), p) {
                    (true, 0) => "1".to_string(),
                    (true, _) => sym,
                    _ if *r == -Rational64::one() && p > 0 => format!("-{sym}"),
                    _ => format!("{r}{sym}"),
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Formal linear combination of generators with [`Coeff`] coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Combination(BTreeMap<Generator, Coeff>);

impl Combination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn generator(g: Generator) -> Self {
        Self(BTreeMap::from([(g, Coeff::integer(1))]))
    }

    /// n·iħ·g.
    pub fn ihbar(n: i64, g: Generator) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Self(BTreeMap::from([(g, Coeff::monomial(Rational64::from_integer(n), 1))]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Generator, &Coeff)> {
        self.0.iter()
    }

    pub fn add(&self, other: &Combination) -> Combination {
        let mut out = self.0.clone();
        for (g, c) in &other.0 {
            let sum = out.get(g).map_or_else(|| c.clone(), |e| e.add(c));
            if sum.is_zero() {
                out.remove(g);
            } else {
                out.insert(*g, sum);
            }
        }
        Combination(out)
    }

    pub fn neg(&self) -> Combination {
        Combination(self.0.iter().map(|(g, c)| (*g, c.neg())).collect())
    }

    pub fn scale(&self, s: &Coeff) -> Combination {
        Combination(
            self.0
                .iter()
                .map(|(g, c)| (*g, c.mul(s)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        )
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.0.iter().map(|(g, c)| format!("{c}·{g}")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Bracket table of the extended Galilei algebra.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    table: Vec<Vec<Combination>>,
}

impl StructureConstants {
    /// The table as written generator by generator: rotations act on the
    /// vector generators, boosts and energy give momentum, boosts and
    /// momentum give the central mass, and every other bracket vanishes.
    pub fn galilei() -> Self {
        let n = Generator::ALL.len();
        let mut table = vec![vec![Combination::zero(); n]; n];
        for &a in &Generator::ALL {
            for &b in &Generator::ALL {
                table[a.index()][b.index()] = match (stated_rule(a, b), stated_rule(b, a)) {
                    (Some(r), _) => r,
                    (None, Some(r)) => r.neg(),
                    (None, None) if a == b => Combination::zero(),
                    (None, None) => unreachable!("bracket [{a}, {b}] is not covered"),
                };
            }
        }
        Self { table }
    }

    /// [a, b] for single generators.
    pub fn bracket(&self, a: Generator, b: Generator) -> &Combination {
        &self.table[a.index()][b.index()]
    }

    /// Bilinear extension of the table.
    pub fn abstract_bracket(&self, x: &Combination, y: &Combination) -> Combination {
        let mut acc = Combination::zero();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                acc = acc.add(&self.bracket(*a, *b).scale(&ca.mul(cb)));
            }
        }
        acc
    }

    /// [a,[b,c]] + [b,[c,a]] + [c,[a,b]].
    pub fn jacobiator(&self, a: Generator, b: Generator, c: Generator) -> Combination {
        let (ga, gb, gc) = (Combination::generator(a), Combination::generator(b), Combination::generator(c));
        self.abstract_bracket(&ga, &self.abstract_bracket(&gb, &gc))
            .add(&self.abstract_bracket(&gb, &self.abstract_bracket(&gc, &ga)))
            .add(&self.abstract_bracket(&gc, &self.abstract_bracket(&ga, &gb)))
    }

    /// Checks antisymmetry on all 55 unordered pairs plus the 11 diagonal
    /// brackets, and the Jacobi identity on all 165 unordered triples.
    pub fn verify(&self) -> StructureReport {
        let all = Generator::ALL;
        let mut report = StructureReport::default();
        for (i, &a) in all.iter().enumerate() {
            if !self.bracket(a, a).is_zero() {
                report.antisymmetry_failures.push((a, a));
            }
            for &b in &all[i + 1..] {
                report.pairs_checked += 1;
                if *self.bracket(a, b) != self.bracket(b, a).neg() {
                    report.antisymmetry_failures.push((a, b));
                }
            }
        }
        for (i, &a) in all.iter().enumerate() {
            for (j, &b) in all.iter().enumerate().skip(i + 1) {
                for &c in &all[j + 1..] {
                    report.triples_checked += 1;
                    if !self.jacobiator(a, b, c).is_zero() {
                        report.jacobi_failures.push((a, b, c));
                    }
                }
            }
        }
        report
    }

    /// Overrides one bracket (and its mirror). Used to build defective
    /// tables for negative controls.
    pub fn with_bracket(mut self, a: Generator, b: Generator, value: Combination) -> Self {
        self.table[b.index()][a.index()] = value.neg();
        self.table[a.index()][b.index()] = value;
        self
    }
}

/// Brackets in the orientation they are stated; `None` when a pair is only
/// given the other way round (or not at all).
fn stated_rule(a: Generator, b: Generator) -> Option<Combination> {
    use Family as F;
    let rotate = |i: usize, j: usize, target: fn(usize) -> Generator| {
        (0..3)
            .map(|k| Combination::ihbar(levi_civita(i, j, k), target(k)))
            .fold(Combination::zero(), |acc, t| acc.add(&t))
    };
    match (a.family(), b.family()) {
        (F::J, F::J) => Some(rotate(a.axis()?, b.axis()?, Generator::j)),
        (F::J, F::K) => Some(rotate(a.axis()?, b.axis()?, Generator::k)),
        (F::J, F::P) => Some(rotate(a.axis()?, b.axis()?, Generator::p)),
        (F::K, F::H) => Some(Combination::ihbar(1, Generator::p(a.axis()?))),
        (F::K, F::P) => Some(if a.axis() == b.axis() { Combination::ihbar(1, M) } else { Combination::zero() }),
        (F::J, F::H) | (F::K, F::K) | (F::P, F::P) | (F::P, F::H) => Some(Combination::zero()),
        (F::J | F::K | F::P | F::H, F::M) => Some(Combination::zero()),
        _ => None,
    }
}

/// Outcome of [`StructureConstants::verify`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub antisymmetry_failures: Vec<(Generator, Generator)>,
    pub jacobi_failures: Vec<(Generator, Generator, Generator)>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry_failures.is_empty() && self.jacobi_failures.is_empty()
    }
}

/// ħ with its dimension tag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
}

impl PhysicalConstants {
    /// Dimension of ħ: length × mass / time.
    pub const HBAR_DIMENSION: &'static str = "LMT^{-1}";

    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidConfig(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    pub fn natural() -> Self {
        Self { hbar: 1.0 }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc() -> StructureConstants {
        StructureConstants::galilei()
    }

    #[test]
    fn stated_brackets() {
        let s = sc();
        assert_eq!(*s.bracket(J1, J2), Combination::ihbar(1, J3));
        assert_eq!(*s.bracket(J2, J1), Combination::ihbar(-1, J3));
        assert_eq!(*s.bracket(K1, P1), Combination::ihbar(1, M));
        assert_eq!(*s.bracket(K1, P2), Combination::zero());
        assert_eq!(*s.bracket(H, M), Combination::zero());
        assert_eq!(*s.bracket(K2, H), Combination::ihbar(1, P2));
        assert_eq!(*s.bracket(H, K2), Combination::ihbar(-1, P2));
        assert_eq!(*s.bracket(J3, K1), Combination::ihbar(1, K2));
        assert_eq!(*s.bracket(J1, P3), Combination::ihbar(-1, P2));
    }

    #[test]
    fn jacobi_examples_vanish() {
        let s = sc();
        assert!(s.jacobiator(J1, J2, J3).is_zero());
        assert!(s.jacobiator(K1, P2, J3).is_zero());
        // Hand expansion of the second one: [K1,[P2,J3]] = [K1, iħP1] = (iħ)²M,
        // [P2,[J3,K1]] = [P2, iħK2] = −(iħ)²M, [J3,[K1,P2]] = 0.
        let inner = s.abstract_bracket(&Combination::generator(P2), &Combination::generator(J3));
        assert_eq!(inner, Combination::ihbar(1, P1));
    }

    #[test]
    fn full_table_verifies() {
        let report = sc().verify();
        assert_eq!(report.pairs_checked, 55);
        assert_eq!(report.triples_checked, 165);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn defective_table_is_caught() {
        let broken = sc().with_bracket(K1, P1, Combination::ihbar(2, M)).with_bracket(K1, H, Combination::ihbar(1, P2));
        let report = broken.verify();
        assert!(!report.jacobi_failures.is_empty());
    }

    #[test]
    fn coeff_arithmetic() {
        let z = Coeff::monomial(Rational64::from_integer(1), 1);
        let z2 = z.mul(&z);
        assert_eq!(z2.evaluate(2.0), C64::new(-4.0, 0.0));
        assert!(z.add(&z.neg()).is_zero());
        assert_eq!(format!("{}", Combination::ihbar(-1, J3)), "-iħ·J3");
    }

    #[test]
    fn hbar_must_be_positive() {
        assert!(PhysicalConstants::new(0.0).is_err());
        assert!(PhysicalConstants::new(-1.0).is_err());
        assert_eq!(PhysicalConstants::new(1.5).unwrap().hbar, 1.5);
    }
}
