//! Randomized invariants over interfaces, plans and synthesis.

mod common;

use common::{random_active, th};
use iface::classify::{ranks_and_class, restricted_invariants};
use iface::cli::{synthesize, SynthRequest};
use iface::json::{interface_from_str, interface_to_string, plan_from_str, plan_to_string};
use iface::plan::simulate_steps;
use iface::symplectic::{random_local, random_spec};
use iface::synth_general::{class_for_chi, SPECIAL_PHI};
use iface::{Interface, Library, Quad2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dressed(seed: u64, max_ln: f64) -> Interface {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = random_spec(&mut rng);
    random_local(&mut rng, max_ln).interface() * spec.matrix() * random_local(&mut rng, max_ln).interface()
}

fn request(class: iface::Class, chi: f64) -> SynthRequest {
    SynthRequest {
        class,
        chi: Some(chi),
        lambda: None,
        kappa: None,
        restricted: false,
        scheme: None,
        knob_phi: SPECIAL_PHI,
        shortcut: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn interface_json_round_trip(seed in any::<u64>()) {
        let t = dressed(seed, 2.0);
        let back = interface_from_str(&interface_to_string(&t)).unwrap();
        prop_assert_eq!(back.m, t.m);
    }

    #[test]
    fn class_and_chi_survive_local_dressing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = dressed(seed, 1.0);
        let d = random_local(&mut rng, 1.5).interface() * t * random_local(&mut rng, 1.5).interface();
        let (a, b) = (ranks_and_class(&t, &th()).unwrap(), ranks_and_class(&d, &th()).unwrap());
        prop_assert_eq!(a.class, b.class);
        prop_assert!((a.chi - b.chi).abs() <= 1e-8 * a.chi.abs().max(1.0));
    }

    #[test]
    fn restricted_invariants_survive_mode2_rotations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_active(&mut rng, "A", 1.0).matrix;
        let out = Interface::local(random_local(&mut rng, 1.0).m1, Quad2::rotation(rng.gen_range(-3.0..3.0)));
        let inn = Interface::local(random_local(&mut rng, 1.0).m1, Quad2::rotation(rng.gen_range(-3.0..3.0)));
        let (a, b) = (restricted_invariants(&t, &th()).unwrap(), restricted_invariants(&(out * t * inn), &th()).unwrap());
        prop_assert_eq!(a.class, b.class);
        let (la, lb) = (a.lambda.unwrap(), b.lambda.unwrap());
        prop_assert!((la - lb).abs() <= 1e-7 * la, "Λ {} vs {}", la, lb);
    }

    #[test]
    fn two_interface_synthesis_reaches_chi(seed in any::<u64>(), chi in -3.0f64..3.0) {
        prop_assume!(chi.abs() > 1e-3 && (chi - 1.0).abs() > 1e-3);
        let class = class_for_chi(chi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps = [random_active(&mut rng, "A", 1.0), random_active(&mut rng, "B", 1.0)];
        let plan = synthesize(&comps, &request(class, chi), &th()).unwrap();
        let inv = ranks_and_class(&plan.achieved, &th()).unwrap();
        prop_assert_eq!(inv.class, class);
        prop_assert!((inv.chi - chi).abs() <= 1e-7 * chi.abs().max(1.0), "χ {} vs {}", inv.chi, chi);
    }

    #[test]
    fn plans_round_trip_and_split_associatively(seed in any::<u64>(), chi in 0.05f64..0.95, cut in 0usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps = [random_active(&mut rng, "A", 1.0), random_active(&mut rng, "B", 1.0)];
        let lib = Library::from_components(&comps);
        let plan = synthesize(&comps, &request(iface::Class::Bs, chi), &th()).unwrap();
        let parsed = plan_from_str(&plan_to_string(&plan)).unwrap();
        prop_assert_eq!(&parsed.steps, &plan.steps);

        let whole = simulate_steps(&plan.steps, &lib).unwrap();
        let k = cut % (plan.steps.len() + 1);
        let split = simulate_steps(&plan.steps[..k], &lib).unwrap() * simulate_steps(&plan.steps[k..], &lib).unwrap();
        prop_assert!(split.max_abs_diff(&whole) <= 1e-9 * whole.max_abs().max(1.0));
        prop_assert!(whole.max_abs_diff(&plan.achieved) <= 1e-12 * whole.max_abs().max(1.0));
    }
}
