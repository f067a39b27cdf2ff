//! Association calculus of individuals, things, systems and environments.
//!
//! Individuals are modelled as finite sets of named atoms: association is
//! set union and the null individual is the empty set. In this model the
//! commutative idempotent monoid laws hold exactly and parthood is
//! decidable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Atom = String;
pub type PropertyId = String;

/// An individual: the association of its atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Individual {
    atoms: BTreeSet<Atom>,
}

impl Individual {
    /// The null individual □.
    pub fn null() -> Self {
        Self::default()
    }

    pub fn atom(name: impl Into<Atom>) -> Self {
        Self { atoms: BTreeSet::from([name.into()]) }
    }

    pub fn from_atoms<I, S>(atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Atom>,
    {
        Self { atoms: atoms.into_iter().map(Into::into).collect() }
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn is_null(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn is_composed(&self) -> bool {
        self.atoms.len() >= 2
    }
}

impl fmt::Display for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "□");
        }
        let names: Vec<&str> = self.atoms.iter().map(String::as_str).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// x ∘ y.
pub fn associate(x: &Individual, y: &Individual) -> Individual {
    Individual { atoms: x.atoms.union(&y.atoms).cloned().collect() }
}

/// x ⊏ y, i.e. x ∘ y = y.
pub fn is_part_of(x: &Individual, y: &Individual) -> bool {
    associate(x, y) == *y
}

/// Every part of `x`, including □ and `x` itself.
pub fn composition(x: &Individual) -> BTreeSet<Individual> {
    let atoms: Vec<&Atom> = x.atoms.iter().collect();
    assert!(atoms.len() < usize::BITS as usize, "composition of {} atoms is not enumerable", atoms.len());
    (0usize..1 << atoms.len())
        .map(|mask| Individual {
            atoms: atoms.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, a)| (*a).clone()).collect(),
        })
        .collect()
}

/// A relational property: a property name applied to named arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub property: PropertyId,
    #[serde(default)]
    pub args: Vec<String>,
}

/// An individual together with its properties.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Thing {
    pub name: String,
    pub individual: Individual,
    #[serde(default)]
    pub intrinsic: BTreeSet<PropertyId>,
    #[serde(default)]
    pub relational: BTreeSet<Relation>,
}

impl Thing {
    /// A thing on a single atom of the same name.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Self {
            individual: Individual::atom(name.clone()),
            name,
            intrinsic: BTreeSet::new(),
            relational: BTreeSet::new(),
        }
    }

    pub fn with_individual(mut self, individual: Individual) -> Self {
        self.individual = individual;
        self
    }

    pub fn with_intrinsic(mut self, property: impl Into<PropertyId>) -> Self {
        self.intrinsic.insert(property.into());
        self
    }

    pub fn with_relation(mut self, property: impl Into<PropertyId>, args: &[&str]) -> Self {
        self.relational.insert(Relation {
            property: property.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn has_property(&self, p: &str) -> bool {
        self.intrinsic.contains(p) || self.relational.iter().any(|r| r.property == p)
    }

    /// Same full property sets, hence the same thing.
    pub fn same_properties(&self, other: &Thing) -> bool {
        self.intrinsic == other.intrinsic && self.relational == other.relational
    }

    /// Identical things differ at most in their relational properties.
    pub fn identical_to(&self, other: &Thing) -> bool {
        self.intrinsic == other.intrinsic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyClass {
    Inherited,
    Emergent,
    Absent,
}

/// Classifies `p` on `x` relative to its proper parts.
///
/// Every entry of `parts` must be a proper part of `x`.
pub fn classify_property(p: &str, x: &Thing, parts: &[Thing]) -> Result<PropertyClass> {
    if let Some(bad) = parts
        .iter()
        .find(|part| !is_part_of(&part.individual, &x.individual) || part.individual == x.individual)
    {
        return Err(Error::Mereology(format!("{} is not a proper part of {}", bad.name, x.name)));
    }
    if !x.has_property(p) {
        return Ok(PropertyClass::Absent);
    }
    if parts.iter().any(|part| part.has_property(p)) {
        Ok(PropertyClass::Inherited)
    } else {
        Ok(PropertyClass::Emergent)
    }
}

/// A candidate system: things plus the directed "acts on" relation between
/// named things. Pairs may name things outside `members`; those links feed
/// the environment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemGraph {
    pub members: Vec<Thing>,
    #[serde(default)]
    pub acts_on: BTreeSet<(String, String)>,
}

impl SystemGraph {
    pub fn new(members: Vec<Thing>) -> Self {
        Self { members, acts_on: BTreeSet::new() }
    }

    pub fn with_action(mut self, from: &str, to: &str) -> Self {
        self.acts_on.insert((from.to_string(), to.to_string()));
        self
    }

    pub fn member_names(&self) -> BTreeSet<&str> {
        self.members.iter().map(|t| t.name.as_str()).collect()
    }

    /// The association of every member's individual.
    pub fn association(&self) -> Individual {
        self.members.iter().fold(Individual::null(), |acc, t| associate(&acc, &t.individual))
    }

    /// Whether `a` and `b` are connected: at least one acts on the other.
    pub fn connected(&self, a: &str, b: &str) -> bool {
        a != b
            && (self.acts_on.contains(&(a.to_string(), b.to_string()))
                || self.acts_on.contains(&(b.to_string(), a.to_string())))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: SystemGraph = serde_json::from_str(text).map_err(|e| Error::Mereology(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Mereology(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable graph")
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.members {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::Mereology(format!("duplicate member name {}", t.name)));
            }
        }
        Ok(())
    }
}

/// At least two members, each connected to another member.
pub fn is_system(g: &SystemGraph) -> bool {
    let names = g.member_names();
    if names.len() < 2 {
        return false;
    }
    names.iter().all(|a| names.iter().any(|b| g.connected(a, b)))
}

/// A system together with its environment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvironmentView {
    pub system: SystemGraph,
    pub environment: Vec<Thing>,
    pub closed: bool,
}

/// Things of `universe` outside the system's composition that act on, or
/// are acted on by, some member.
pub fn environment_of(g: &SystemGraph, universe: &[Thing]) -> Result<EnvironmentView> {
    if let Some(missing) = g.members.iter().find(|m| !universe.contains(m)) {
        return Err(Error::Mereology(format!("member {} is not in the universe", missing.name)));
    }
    let whole = g.association();
    let members = g.member_names();
    let environment: Vec<Thing> = universe
        .iter()
        .filter(|x| !is_part_of(&x.individual, &whole))
        .filter(|x| members.iter().any(|m| g.connected(&x.name, m)))
        .cloned()
        .collect();
    Ok(EnvironmentView { system: g.clone(), closed: environment.is_empty(), environment })
}

/// Physical sum of two systems: disjoint association of their members and
/// the union of their action relations.
pub fn physical_sum(a: &SystemGraph, b: &SystemGraph) -> Result<SystemGraph> {
    let (wa, wb) = (a.association(), b.association());
    if let Some(shared) = wa.atoms().intersection(wb.atoms()).next() {
        return Err(Error::Mereology(format!("systems share atom {shared}")));
    }
    let mut members = a.members.clone();
    members.extend(b.members.iter().cloned());
    let acts_on = a.acts_on.union(&b.acts_on).cloned().collect();
    let sum = SystemGraph { members, acts_on };
    sum.validate()?;
    Ok(sum)
}

/// Counts of law instances checked by [`check_laws`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LawTally {
    pub checked: usize,
    pub failures: BTreeMap<String, usize>,
}

impl LawTally {
    fn record(&mut self, law: &str, holds: bool) {
        self.checked += 1;
        if !holds {
            *self.failures.entry(law.to_string()).or_default() += 1;
        }
    }

    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the monoid and parthood laws on one triple of individuals.
pub fn check_laws(x: &Individual, y: &Individual, z: &Individual, tally: &mut LawTally) {
    let null = Individual::null();
    tally.record("associativity", associate(&associate(x, y), z) == associate(x, &associate(y, z)));
    tally.record("commutativity", associate(x, y) == associate(y, x));
    tally.record("idempotence", associate(x, x) == *x);
    tally.record("neutral element", associate(x, &null) == *x && associate(&null, x) == *x);
    tally.record("parthood reflexive", is_part_of(x, x));
    tally.record(
        "parthood antisymmetric",
        !(is_part_of(x, y) && is_part_of(y, x)) || x == y,
    );
    tally.record(
        "parthood transitive",
        !(is_part_of(x, y) && is_part_of(y, z)) || is_part_of(x, z),
    );
    tally.record("null is part of all", is_part_of(&null, x));
    tally.record("part of association", is_part_of(x, &associate(x, y)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ind(atoms: &[&str]) -> Individual {
        Individual::from_atoms(atoms.iter().copied())
    }

    #[test]
    fn association_examples() {
        let a = ind(&["a"]);
        assert_eq!(associate(&a, &Individual::null()), a);
        assert_eq!(associate(&a, &a), a);
        assert_eq!(associate(&a, &ind(&["b"])), ind(&["a", "b"]));
    }

    #[test]
    fn parthood_examples() {
        assert!(is_part_of(&Individual::null(), &ind(&["a"])));
        assert!(is_part_of(&ind(&["a"]), &ind(&["a", "b"])));
        assert!(!is_part_of(&ind(&["a", "c"]), &ind(&["a", "b"])));
    }

    #[test]
    fn composition_examples() {
        assert_eq!(composition(&ind(&["a"])), BTreeSet::from([Individual::null(), ind(&["a"])]));
        assert_eq!(
            composition(&ind(&["a", "b"])),
            BTreeSet::from([Individual::null(), ind(&["a"]), ind(&["b"]), ind(&["a", "b"])])
        );
        assert_eq!(composition(&Individual::null()), BTreeSet::from([Individual::null()]));
    }

    #[test]
    fn simple_and_composed() {
        assert!(!Individual::null().is_simple() && !Individual::null().is_composed());
        assert!(ind(&["a"]).is_simple());
        assert!(ind(&["a", "b"]).is_composed());
    }

    fn fluid() -> (Thing, Vec<Thing>) {
        let parts: Vec<Thing> = ["m1", "m2", "m3"]
            .iter()
            .map(|n| Thing::new(*n).with_intrinsic("mass"))
            .collect();
        let whole = Thing::new("fluid")
            .with_individual(ind(&["m1", "m2", "m3"]))
            .with_intrinsic("mass")
            .with_intrinsic("viscosity");
        (whole, parts)
    }

    #[test]
    fn inherited_and_emergent_properties() {
        let (whole, parts) = fluid();
        assert_eq!(classify_property("mass", &whole, &parts).unwrap(), PropertyClass::Inherited);
        assert_eq!(classify_property("viscosity", &whole, &parts).unwrap(), PropertyClass::Emergent);
        assert_eq!(classify_property("charge", &whole, &parts).unwrap(), PropertyClass::Absent);
    }

    #[test]
    fn classify_rejects_non_parts() {
        let (whole, mut parts) = fluid();
        parts.push(Thing::new("stranger"));
        assert!(classify_property("mass", &whole, &parts).is_err());
        let (whole, _) = fluid();
        assert!(classify_property("mass", &whole, std::slice::from_ref(&whole)).is_err());
    }

    #[test]
    fn thing_identity() {
        let a = Thing::new("e1").with_intrinsic("charge").with_relation("position", &["k"]);
        let b = Thing::new("e2").with_intrinsic("charge").with_relation("position", &["k2"]);
        assert!(a.identical_to(&b));
        assert!(!a.same_properties(&b));
        assert!(a.same_properties(&a.clone()));
    }

    #[test]
    fn system_predicate() {
        let g = SystemGraph::new(vec![Thing::new("x"), Thing::new("y")]).with_action("x", "y");
        assert!(is_system(&g));
        assert!(!is_system(&SystemGraph::new(vec![Thing::new("x"), Thing::new("y")])));
        assert!(!is_system(&SystemGraph::new(vec![Thing::new("x")])));
        let self_loop = SystemGraph::new(vec![Thing::new("x"), Thing::new("y")]).with_action("x", "x");
        assert!(!is_system(&self_loop));
        let dangling = SystemGraph::new(vec![Thing::new("x"), Thing::new("y"), Thing::new("z")]).with_action("x", "y");
        assert!(!is_system(&dangling));
    }

    #[test]
    fn environments() {
        let g = SystemGraph::new(vec![Thing::new("x"), Thing::new("y")])
            .with_action("x", "y")
            .with_action("w", "x");
        let closed = environment_of(&g, &g.members).unwrap();
        assert!(closed.closed && closed.environment.is_empty());

        let universe = vec![Thing::new("x"), Thing::new("y"), Thing::new("w"), Thing::new("v")];
        let open = environment_of(&g, &universe).unwrap();
        assert!(!open.closed);
        assert_eq!(open.environment, vec![Thing::new("w")]);

        assert!(environment_of(&g, &universe[1..]).is_err());
    }

    #[test]
    fn environment_excludes_composition() {
        // "xy" is made of the members' atoms, so it lies in the composition.
        let g = SystemGraph::new(vec![Thing::new("x"), Thing::new("y")])
            .with_action("x", "y")
            .with_action("xy", "x");
        let xy = Thing::new("xy").with_individual(ind(&["x", "y"]));
        let universe = vec![Thing::new("x"), Thing::new("y"), xy];
        assert!(environment_of(&g, &universe).unwrap().closed);
    }

    #[test]
    fn physical_sum_merges_relations() {
        let a = SystemGraph::new(vec![Thing::new("x"), Thing::new("y")]).with_action("x", "y");
        let b = SystemGraph::new(vec![Thing::new("u"), Thing::new("v")]).with_action("v", "u");
        let sum = physical_sum(&a, &b).unwrap();
        assert_eq!(sum.members.len(), 4);
        assert!(is_system(&sum));
        assert!(physical_sum(&a, &a).is_err());
    }

    #[test]
    fn graph_json() {
        let text = r#"{
            "members": [
                {"name": "x", "individual": ["x"], "intrinsic": ["mass"]},
                {"name": "y", "individual": ["y"]}
            ],
            "acts_on": [["x", "y"]]
        }"#;
        let g = SystemGraph::from_json(text).unwrap();
        assert!(is_system(&g));
        assert_eq!(SystemGraph::from_json(&g.to_json()).unwrap(), g);
        let dup = r#"{"members": [{"name": "x", "individual": ["x"]}, {"name": "x", "individual": ["y"]}]}"#;
        assert!(SystemGraph::from_json(dup).is_err());
    }

    fn individual() -> impl Strategy<Value = Individual> {
        prop::collection::btree_set(prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]), 0..=6)
            .prop_map(Individual::from_atoms)
    }

    proptest! {
        #[test]
        fn monoid_and_order_laws(x in individual(), y in individual(), z in individual()) {
            let mut tally = LawTally::default();
            check_laws(&x, &y, &z, &mut tally);
            prop_assert!(tally.all_hold(), "{:?}", tally.failures);
        }

        #[test]
        fn emergent_means_no_part_has_it(atoms in prop::collection::btree_set(0u8..6, 2..=6), mask in any::<u64>()) {
            // Every proper part of the whole, with the property on a pseudo-random subset.
            let whole_ind = Individual::from_atoms(atoms.iter().map(|a| format!("a{a}")));
            let parts: Vec<Thing> = composition(&whole_ind)
                .into_iter()
                .filter(|p| *p != whole_ind)
                .enumerate()
                .map(|(k, ind)| {
                    let t = Thing::new(format!("p{k}")).with_individual(ind);
                    if mask >> (k % 64) & 1 == 1 { t.with_intrinsic("q") } else { t }
                })
                .collect();
            let whole = Thing::new("w").with_individual(whole_ind).with_intrinsic("q");
            let class = classify_property("q", &whole, &parts).unwrap();
            if class == PropertyClass::Emergent {
                prop_assert!(parts.iter().all(|p| !p.has_property("q")));
            }
        }

        #[test]
        fn own_members_give_closed_environment(n in 1usize..6, edges in prop::collection::vec((0usize..6, 0usize..6), 0..10)) {
            let members: Vec<Thing> = (0..n).map(|k| Thing::new(format!("t{k}"))).collect();
            let mut g = SystemGraph::new(members);
            for (a, b) in edges {
                g = g.with_action(&format!("t{a}"), &format!("t{b}"));
            }
            prop_assert!(environment_of(&g, &g.members.clone()).unwrap().closed);
        }
    }
}
