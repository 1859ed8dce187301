//! Independent checks: plan simulation, equivalence under local controls,
//! invariance fuzzing and two-interface feasibility.

use crate::classify::{match_general, match_restricted, ranks_and_class, restricted_invariants, scaled_diff, Invariants, Thresholds};
use crate::error::{Error, Result};
use crate::json::InterfaceWire;
use crate::plan::{simulate_trace, Component, Library, Step};
use crate::symplectic::{random_local, random_restricted_local, Class, Interface, Local, SingleModeOp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Largest `|ln|γ||` used when sampling dressings.
pub const FUZZ_MAX_LN: f64 = 3.0;
pub const INVARIANT_TOL: f64 = 1e-7;
pub const WITNESS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub result: Interface,
    /// Cumulative product after each step, in acting order.
    pub intermediates: Vec<Interface>,
}

pub fn simulate(steps: &[Step], lib: &Library) -> Result<Simulation> {
    let intermediates = simulate_trace(steps, lib)?;
    let result = intermediates.last().copied().unwrap_or_else(Interface::identity);
    Ok(Simulation { result, intermediates })
}

/// `after · T · before = T′` within `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceWitness {
    pub before: Local,
    pub after: Local,
    pub ops_before: Vec<SingleModeOp>,
    pub ops_after: Vec<SingleModeOp>,
    pub residual: f64,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }
}

fn invariants(t: &Interface, restricted: bool, th: &Thresholds) -> Result<Invariants> {
    if restricted {
        restricted_invariants(t, th)
    } else {
        ranks_and_class(t, th)
    }
}

/// Compare invariants and name the first mismatch.
pub fn compare_invariants(a: &Invariants, b: &Invariants, tol: f64) -> Option<String> {
    if a.class != b.class {
        return Some(format!("class {} vs {}", a.class, b.class));
    }
    if (a.n_r, a.n_t) != (b.n_r, b.n_t) {
        return Some(format!("ranks ({}, {}) vs ({}, {})", a.n_r, a.n_t, b.n_r, b.n_t));
    }
    let pairs = [("χ", Some(a.chi), Some(b.chi)), ("Λ", a.lambda, b.lambda), ("κ", a.kappa, b.kappa)];
    for (name, x, y) in pairs {
        match (x, y) {
            (Some(x), Some(y)) if rel_dev(x, y) > tol => return Some(format!("{name} {x} vs {y}")),
            (Some(_), None) | (None, Some(_)) => return Some(format!("{name} defined for one side only")),
            _ => {}
        }
    }
    None
}

/// Decide equivalence by invariants, then build and check a witness.
pub fn equivalent_up_to_local(t: &Interface, t2: &Interface, restricted: bool, th: &Thresholds) -> Result<EquivalenceWitness> {
    let (a, b) = (invariants(t, restricted, th)?, invariants(t2, restricted, th)?);
    if let Some(why) = compare_invariants(&a, &b, INVARIANT_TOL) {
        return Err(Error::NotEquivalent(why));
    }
    let (after, before) = if restricted { match_restricted(t, t2, th)? } else { match_general(t, t2, th)? };
    let residual = scaled_diff(&(after.interface() * *t * before.interface()), t2);
    if residual > WITNESS_TOL {
        return Err(Error::NotEquivalent(format!("witness residual {residual:e}")));
    }
    Ok(EquivalenceWitness {
        ops_before: before.to_ops(restricted)?,
        ops_after: after.to_ops(restricted)?,
        before,
        after,
        residual,
    })
}

/// A dressing `after · T · before`, serializable for replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dressing {
    pub trial: usize,
    pub invariant: String,
    pub deviation: f64,
    pub before: InterfaceWire,
    pub after: InterfaceWire,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub restricted: bool,
    pub seed: u64,
    pub reference: Option<crate::json::InvariantsWire>,
    pub max_deviation: BTreeMap<String, f64>,
    pub class_stable: bool,
    pub failures: usize,
    pub worst: Option<Dressing>,
    pub pass: bool,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Dress `t` with `n` random allowed controls and track invariant drift.
pub fn invariance_fuzz(t: &Interface, n: usize, restricted: bool, seed: u64, th: &Thresholds) -> Result<FuzzReport> {
    if n == 0 {
        return Err(Error::Input("fuzz needs at least one trial".into()));
    }
    let reference = invariants(t, restricted, th)?;
    let mut max_deviation: BTreeMap<String, f64> = BTreeMap::from([("chi".to_string(), 0.0)]);
    if reference.lambda.is_some() {
        max_deviation.insert("lambda".into(), 0.0);
    }
    if reference.kappa.is_some() {
        max_deviation.insert("kappa".into(), 0.0);
    }
    let mut worst: Option<Dressing> = None;
    let (mut class_stable, mut failures) = (true, 0);
    for trial in 0..n {
        let mut rng = trial_rng(seed, trial);
        let draw = |rng: &mut ChaCha8Rng| {
            if restricted {
                random_restricted_local(rng, FUZZ_MAX_LN)
            } else {
                random_local(rng, FUZZ_MAX_LN)
            }
        };
        let (after, before) = (draw(&mut rng), draw(&mut rng));
        let dressed = after.interface() * *t * before.interface();
        let mut devs = Vec::new();
        match invariants(&dressed, restricted, th) {
            Ok(inv) if inv.class == reference.class => {
                devs.push(("chi", rel_dev(inv.chi, reference.chi)));
                if let (Some(x), Some(y)) = (inv.lambda, reference.lambda) {
                    devs.push(("lambda", rel_dev(x, y)));
                }
                if let (Some(x), Some(y)) = (inv.kappa, reference.kappa) {
                    devs.push(("kappa", rel_dev(x, y)));
                }
            }
            _ => {
                class_stable = false;
                devs.push(("class", f64::INFINITY));
            }
        }
        if devs.iter().any(|(_, d)| !(*d <= INVARIANT_TOL)) {
            failures += 1;
        }
        for (name, d) in devs {
            let slot = max_deviation.entry(name.to_string()).or_insert(0.0);
            *slot = slot.max(d);
            if worst.as_ref().map_or(d > 0.0, |w| d > w.deviation) {
                worst = Some(Dressing {
                    trial,
                    invariant: name.to_string(),
                    deviation: d,
                    before: InterfaceWire::from(&before.interface()),
                    after: InterfaceWire::from(&after.interface()),
                });
            }
        }
    }
    Ok(FuzzReport {
        trials: n,
        restricted,
        seed,
        reference: Some(crate::json::InvariantsWire::from(&reference)),
        max_deviation,
        class_stable,
        failures,
        worst,
        pass: failures == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub condition: String,
    pub citation: String,
}

fn verdict(feasible: bool, condition: &str, citation: &str) -> FeasibilityVerdict {
    FeasibilityVerdict { feasible, condition: condition.into(), citation: citation.into() }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= crate::synth_general::STRENGTH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Whether `b · (controls) · a` can reach `target`, decided from the two classes and strengths.
pub fn feasibility_two_interface(a: &Component, b: &Component, target: Class) -> Result<FeasibilityVerdict> {
    a.ensure_active()?;
    b.ensure_active()?;
    let (ca, cb) = (a.class(), b.class());
    let qnd_family = matches!(ca, Class::Qndi | Class::Sqndi);
    Ok(match target {
        Class::Identity => {
            let ok = ca == cb && (qnd_family || same(a.chi(), b.chi()));
            verdict(ok, "χ_A=χ_B", if ok { "same-strength" } else { "must have the same strength" })
        }
        Class::Swap => {
            let ok = cb == ca.complement() && (qnd_family || same(b.chi(), 1.0 - a.chi()));
            verdict(ok, "χ_A=1−χ_B", if ok { "complementary strengths" } else { "must be complemented" })
        }
        _ => verdict(true, "none", "every non-trivial pair"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::squeezing_form_matrix;
    use crate::classify::Side;
    use crate::linalg::Quad2;
    use crate::symplectic::{random_symplectic, Mode, StandardSpec};
    use crate::synth_general::{two_interface_synth, SPECIAL_PHI};
    use std::f64::consts::FRAC_PI_2;

    fn th() -> Thresholds {
        Thresholds::default()
    }

    fn comp(id: &str, s: StandardSpec) -> Component {
        Component::new(id, s.matrix(), &th()).unwrap()
    }

    #[test]
    fn simulation_basics() {
        let lib = Library::from_components(&[comp("A", StandardSpec::bs(0.3))]);
        assert_eq!(simulate(&[], &lib).unwrap().result, Interface::identity());
        let s = simulate(&[Step::Component("A".into())], &lib).unwrap();
        assert_eq!(s.result, StandardSpec::bs(0.3).matrix());
        let s = simulate(&[Step::Ops(vec![SingleModeOp::rot(Mode::One, 1.0)]), Step::Component("A".into())], &lib).unwrap();
        assert_eq!(s.intermediates.len(), 2);
    }

    #[test]
    fn equivalence_examples() {
        let t = StandardSpec::tms(0.7).matrix();
        let dressed = Local::new(Quad2::rotation(0.2), Quad2::rotation(1.1)).interface()
            * t
            * Local::one(Quad2::squeeze(3.0) * Quad2::rotation(-0.4)).interface();
        let w = equivalent_up_to_local(&t, &dressed, true, &th()).unwrap();
        assert!(w.residual <= WITNESS_TOL);
        let e = equivalent_up_to_local(&StandardSpec::bs(0.3).matrix(), &StandardSpec::bs(0.4).matrix(), false, &th());
        assert!(matches!(e, Err(Error::NotEquivalent(_))));
        let q = |k: f64| squeezing_form_matrix(&StandardSpec::qndi(1.5), 1.8, k.atan(), Side::Pre);
        assert!(matches!(equivalent_up_to_local(&q(0.2), &q(0.5), true, &th()), Err(Error::NotEquivalent(_))));
        assert!(equivalent_up_to_local(&q(0.2), &q(0.5), false, &th()).is_ok());
    }

    #[test]
    fn equivalence_is_reflexive_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let t = random_symplectic(&mut rng);
            let u = crate::symplectic::dress(&mut rng, &t, 1.0);
            for restricted in [false, true] {
                if ranks_and_class(&t, &th()).is_err() {
                    continue;
                }
                assert!(equivalent_up_to_local(&t, &t, restricted, &th()).is_ok());
            }
            let ab = equivalent_up_to_local(&t, &u, false, &th()).is_ok();
            let ba = equivalent_up_to_local(&u, &t, false, &th()).is_ok();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn fuzz_examples() {
        let r = invariance_fuzz(&StandardSpec::tms(0.8).matrix(), 1000, false, 1, &th()).unwrap();
        assert!(r.pass && r.max_deviation["chi"] <= 1e-8, "{r:?}");
        let q = squeezing_form_matrix(&StandardSpec::qndi(1.5), 1.0, 0.3f64.atan(), Side::Pre);
        let r = invariance_fuzz(&q, 1000, true, 2, &th()).unwrap();
        assert!(r.pass && r.max_deviation["kappa"] <= 1e-7 && r.max_deviation["lambda"] <= 1e-7, "{r:?}");
        let r = invariance_fuzz(&Interface::swap(), 100, true, 3, &th()).unwrap();
        assert!(r.pass && r.class_stable && !r.max_deviation.contains_key("lambda"));
        let bad = invariance_fuzz(&q, 20, false, 3, &th()).unwrap();
        assert!(bad.pass);
        assert_eq!(invariance_fuzz(&q, 50, true, 9, &th()).unwrap(), invariance_fuzz(&q, 50, true, 9, &th()).unwrap());
    }

    #[test]
    fn feasibility_examples() {
        let v = feasibility_two_interface(&comp("A", StandardSpec::bs(0.3)), &comp("B", StandardSpec::bs(0.3)), Class::Identity).unwrap();
        assert!(v.feasible && v.condition == "χ_A=χ_B");
        let v = feasibility_two_interface(&comp("A", StandardSpec::bs(0.3)), &comp("B", StandardSpec::tms(0.5)), Class::Swap).unwrap();
        assert!(!v.feasible && v.citation.contains("must be complemented"));
        let v = feasibility_two_interface(&comp("A", StandardSpec::bs(0.3)), &comp("B", StandardSpec::bs(FRAC_PI_2 - 0.3)), Class::Swap).unwrap();
        assert!(v.feasible && v.citation == "complementary strengths");
    }

    #[test]
    fn feasibility_agrees_with_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let classes = [Class::Bs, Class::Tms, Class::Stms, Class::Qndi, Class::Sqndi];
        for &ca in &classes {
            for &cb in &classes {
                let a = comp("A", crate::symplectic::random_spec_of(&mut rng, ca));
                let mut b_specs = vec![crate::symplectic::random_spec_of(&mut rng, cb)];
                if ca == cb {
                    b_specs.push(StandardSpec::new(cb, a.matrix.t21().det().abs().sqrt().asin()));
                    b_specs.push(crate::symplectic::StandardSpec::from_chi(a.chi()));
                }
                if cb == ca.complement() {
                    b_specs.push(StandardSpec::from_chi(1.0 - a.chi()));
                }
                for sb in b_specs {
                    let Ok(b) = Component::new("B", sb.matrix(), &th()) else { continue };
                    if b.class() != cb {
                        continue;
                    }
                    for target in [Class::Identity, Class::Swap] {
                        let v = feasibility_two_interface(&a, &b, target).unwrap();
                        let built = two_interface_synth(&a, &b, target, None, SPECIAL_PHI, &th());
                        assert_eq!(v.feasible, built.is_ok(), "{ca} {cb} {target} {built:?}");
                    }
                }
            }
        }
    }
}
