//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::process::Command;
use std::time::{Duration, Instant};

use qfound_core::bell::{self, ChshSettings, LhvModel};
use qfound_core::galilei::rep;
use qfound_core::galilei::{PhysicalConstants, StructureConstants};
use qfound_core::hilbert::{CMatrix, Operator};
use qfound_core::mereology::{self, Individual, LawTally};
use qfound_core::report::{Check, SuiteReport};
use qfound_core::suites::{self, Config, Context, Suite};
use qfound_core::symmetry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    note: String,
}

fn outcome(pass: bool, note: impl Into<String>) -> Outcome {
    Outcome { pass, note: note.into() }
}

/// Every listed check passes at exactly the stated tolerance.
fn checks_at(report: &SuiteReport, wanted: &[(&str, f64)]) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for &(id, tol) in wanted {
        match report.check(id) {
            Some(Check { pass: p, residual: Some(r), tolerance: Some(t), .. }) => {
                let ok = *p && *t == tol;
                pass &= ok;
                notes.push(format!("{id} {r:.2e}"));
            }
            Some(Check { pass: p, holds: Some(_), .. }) => {
                pass &= *p;
                notes.push(format!("{id} {p}"));
            }
            _ => {
                pass = false;
                notes.push(format!("{id} missing"));
            }
        }
    }
    outcome(pass, notes.join("; "))
}

fn prefixed<'a>(report: &'a SuiteReport, prefix: &str) -> Vec<&'a Check> {
    report.checks.iter().filter(|c| c.id.starts_with(prefix)).collect()
}

fn random_individual(rng: &mut ChaCha8Rng) -> Individual {
    Individual::from_atoms((0..6).filter(|_| rng.random::<bool>()).map(|k| format!("a{k}")))
}

fn mereology_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tally = LawTally::default();
    let mut set_mismatches = 0;
    for _ in 0..10_000 {
        let (x, y, z) = (random_individual(&mut rng), random_individual(&mut rng), random_individual(&mut rng));
        mereology::check_laws(&x, &y, &z, &mut tally);
        // Association behaves as set union, parthood as inclusion.
        let union: std::collections::BTreeSet<_> = x.atoms().union(y.atoms()).cloned().collect();
        if mereology::associate(&x, &y).atoms() != &union || mereology::is_part_of(&x, &y) != x.atoms().is_subset(y.atoms()) {
            set_mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = tally.all_hold() && set_mismatches == 0 && tally.checked >= 10_000 && elapsed < Duration::from_secs(5);
    outcome(ok, format!("{} law instances, {} set-model mismatches, {elapsed:.2?}", tally.checked, set_mismatches))
}

fn structure_constants() -> Outcome {
    let start = Instant::now();
    let report = StructureConstants::galilei().verify();
    let elapsed = start.elapsed();
    let ok = report.pairs_checked == 55
        && report.triples_checked == 165
        && report.antisymmetry_failures.is_empty()
        && report.jacobi_failures.is_empty()
        && elapsed < Duration::from_secs(1);
    outcome(
        ok,
        format!(
            "{} pairs, {} triples, {} failures, {elapsed:.2?}",
            report.pairs_checked,
            report.triples_checked,
            report.antisymmetry_failures.len() + report.jacobi_failures.len()
        ),
    )
}

fn spin_reps() -> Outcome {
    let hbar = 1.0;
    let mut worst: f64 = 0.0;
    let mut casimir: f64 = 0.0;
    for j in [0.5, 1.0, 1.5] {
        let spin = rep::build_spin_rep(j, 1.0, PhysicalConstants::new(hbar).unwrap()).unwrap();
        worst = worst.max(rep::verify_rep(&spin, 1e-12).max_relative_residual());
        let n = spin.space().total_dim();
        let want = CMatrix::identity(n, n) * qfound_core::hilbert::C64::new(hbar * hbar * j * (j + 1.0), 0.0);
        let got: Operator = spin.casimir().unwrap();
        casimir = casimir.max((got.matrix() - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    outcome(worst <= 1e-12 && casimir <= 1e-12, format!("commutators {worst:.2e}, Casimir {casimir:.2e}"))
}

fn grid_rep(axioms: &SuiteReport, cfg: &Config) -> Outcome {
    let sized = cfg.axioms.grid_sites == 128 && cfg.axioms.grid_test_states == 20;
    let mut o = checks_at(
        axioms,
        &[
            ("axioms.rep.grid.canonical", 1e-6),
            ("axioms.rep.additive.commutators", 1e-6),
            ("axioms.rep.additive.part_relations", 1e-6),
            ("axioms.rep.additive.parts_commute", 1e-12),
        ],
    );
    o.pass &= sized;
    o
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn symmetrization(report: &SuiteReport) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)] {
        let pair = symmetry::build_projectors(n, d).unwrap();
        // Multisets and subsets of size n from d labels.
        let (sym, anti) = (binomial(n + d - 1, n), binomial(d, n));
        let ok = pair.rank_symmetric() == sym && pair.rank_antisymmetric() == anti && pair.projector_residual() <= 1e-12;
        pass &= ok;
        notes.push(format!("({n},{d}) {}/{}", pair.rank_symmetric(), pair.rank_antisymmetric()));
    }
    let o = checks_at(report, &[("symmetry.exclusion.repeated", 1e-12)]);
    let ranks = prefixed(report, "symmetry.projectors.").iter().all(|c| c.pass);
    outcome(pass && o.pass && ranks, format!("ranks {}; {}", notes.join(" "), o.note))
}

fn dynamics(report: &SuiteReport, cfg: &Config) -> Outcome {
    let mut o = checks_at(
        report,
        &[
            ("dynamics.spin_spin.singlet_triplet", 1e-12),
            ("dynamics.evolution.norm", 1e-10),
            ("dynamics.evolution.energy", 1e-9),
            ("dynamics.weak_coupling.linear", 1e-6),
        ],
    );
    let samples = report.details["dynamics"]["evolution"]["norms"].as_array().map_or(0, Vec::len);
    o.pass &= samples == 100 && cfg.dynamics.n_steps + 1 == samples;
    o.note.push_str(&format!("; {samples} samples"));
    o
}

fn superselection(report: &SuiteReport, cfg: &Config) -> Outcome {
    let mut o = checks_at(report, &[("charge.central", 1e-10), ("charge.phases.invisible", 1e-10)]);
    o.pass &= cfg.charge.n_phases == 16
        && report.details["charge"]["phases"].as_array().is_some_and(|v| v.iter().all(|p| p["n_phases"] == 16));
    o
}

fn epr(report: &SuiteReport, cfg: &Config) -> Outcome {
    let mut o = checks_at(report, &[("epr.inference.mode", 1.0), ("epr.commuting_pair", 1e-10)]);
    let trials = report.details["epr"]["inference"].as_array().map_or(0, Vec::len);
    o.pass &= cfg.epr.pair.n_sites == 256 && trials == 10;
    o.note.push_str(&format!("; {trials} trials"));
    o
}

fn bell_suite(report: &SuiteReport, cfg: &Config, total: Duration) -> Outcome {
    let s = bell::chsh_quantum(&ChshSettings::optimal()).abs();
    let oracle = 2.0 * SQRT_2;
    let mut pass = (s - oracle).abs() <= 1e-10;
    let mut notes = vec![format!("|S| − 2√2 = {:.1e}", s - oracle)];
    for model in LhvModel::ALL {
        let exact = model.chsh_exact(&ChshSettings::optimal()).abs();
        pass &= exact <= 2.0 + 1e-6;
        pass &= report.check(&format!("bell.lhv.{model}.sampled")).is_some_and(|c| c.pass);
        notes.push(format!("{model} {exact:.4}"));
    }
    pass &= cfg.bell.n_samples == 100_000 && LhvModel::ALL.len() == 3 && total < Duration::from_secs(60);
    notes.push(format!("all suites {total:.2?}"));
    outcome(pass, notes.join("; "))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut codes = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_qfound"))
            .args(["all", "--format", "json", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        codes.push(status.code());
        outputs.push(std::fs::read(&path).unwrap());
    }
    let same = outputs[0] == outputs[1];
    outcome(same && codes == [Some(0), Some(0)], format!("identical {same}, exit codes {codes:?}"))
}

fn main() {
    let cfg = Config::default();
    let ctx = Context::default();
    let start = Instant::now();
    let all = suites::run(Suite::All, &cfg, &ctx).expect("suites run");
    let total = start.elapsed();

    let results = [
        ("mereology laws", mereology_laws()),
        ("structure constants", structure_constants()),
        ("spin representations", spin_reps()),
        ("grid and additive representations", grid_rep(&all, &cfg)),
        ("symmetrization", symmetrization(&all)),
        ("dynamics", dynamics(&all, &cfg)),
        ("superselection", superselection(&all, &cfg)),
        ("correlated pair", epr(&all, &cfg)),
        ("Bell", bell_suite(&all, &cfg, total)),
        ("CLI determinism", cli_determinism()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2} {name}: {}", k + 1, o.note);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
