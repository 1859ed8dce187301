//! Synthesis with unrestricted single-mode controls.
//!
//! Components are first brought to a normal form. The component acting first
//! (role A) is written in its pre-squeezing form and the one acting second
//! (role B) in its post-squeezing form, so the bare standard gates face each
//! other across the in-between chain. Swapped classes contribute a SWAP which is
//! moved to the outside and accounted for by complementing the target.

use crate::classify::{match_general, to_squeezing_form, Side, Thresholds};
use crate::error::{Error, Result};
use crate::plan::{Component, Library, StepList, SynthPlan, Target};
use crate::symplectic::{ops_local, Class, Interface, Mode, OpKind, SingleModeOp, StandardSpec};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

/// Default φ₁ for the rank-dropping special cases.
pub const SPECIAL_PHI: f64 = 0.6;
/// Relative tolerance for "equal" and "complementary" strengths.
pub const STRENGTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    BsBs,
    TmsTms,
    BsTms,
    QndiBs,
    QndiTms,
    QndiQndi,
}

impl Combination {
    pub fn label(self) -> &'static str {
        match self {
            Combination::BsBs => "BS+BS",
            Combination::TmsTms => "TMS+TMS",
            Combination::BsTms => "BS+TMS",
            Combination::QndiBs => "QNDI+BS",
            Combination::QndiTms => "QNDI+TMS",
            Combination::QndiQndi => "QNDI+QNDI",
        }
    }

    fn of(a: Class, b: Class) -> Option<Combination> {
        use Class::*;
        Some(match (a, b) {
            (Bs, Bs) => Combination::BsBs,
            (Tms, Tms) => Combination::TmsTms,
            (Bs, Tms) | (Tms, Bs) => Combination::BsTms,
            (Qndi, Bs) | (Bs, Qndi) => Combination::QndiBs,
            (Qndi, Tms) | (Tms, Qndi) => Combination::QndiTms,
            (Qndi, Qndi) => Combination::QndiQndi,
            _ => return None,
        })
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How BS+BS and TMS+TMS pairs reach a χ inside the rotation band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Rotation inside the band, squeeze outside.
    Auto,
    /// Squeeze only, with `φ₁ = 0`; χ inside the band is unreachable.
    SqueezeOnly,
}

/// Which degenerate configuration was used, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Special {
    QndiFromEqual,
    IdentityFromEqual,
    SwapFromComplement,
    SqndiFromComplement,
    QndiFromQndiPair,
    IdentityFromQndiPair,
    /// Z = 0 with a QNDI in the pair, realized by a quarter-turn.
    Seam,
}

/// In-between chain `R₁(φ₁) S₁(γ) R₁(ε) R₂(φ₂)` for two bare standard gates.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSolution {
    pub combination: Combination,
    /// True when the component acting first is not the first class of the label.
    pub reversed: bool,
    pub gamma: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub epsilon: f64,
    pub x_f: f64,
    pub z: f64,
    pub z0: Option<f64>,
    /// The discarded root of the quadratic in γ.
    pub alt_gamma: Option<f64>,
    pub special: Option<Special>,
    /// Class and χ actually requested from the bare pair.
    pub core_class: Class,
    pub core_chi: f64,
}

impl InterferenceSolution {
    pub fn ops(&self) -> Vec<SingleModeOp> {
        let mut ops = Vec::new();
        if self.phi1 != 0.0 {
            ops.push(SingleModeOp::rot(Mode::One, self.phi1));
        }
        if self.gamma != 1.0 {
            ops.push(SingleModeOp::sq(Mode::One, self.gamma));
        }
        if self.epsilon != 0.0 {
            ops.push(SingleModeOp::rot(Mode::One, self.epsilon));
        }
        if self.phi2 != 0.0 {
            ops.push(SingleModeOp::rot(Mode::Two, self.phi2));
        }
        ops
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= STRENGTH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// The χ implied by a target class, or the given χ checked against the class.
pub fn target_chi(class: Class, chi: Option<f64>) -> Result<f64> {
    let fixed = match class {
        Class::Identity | Class::Qndi => Some(0.0),
        Class::Swap | Class::Sqndi => Some(1.0),
        _ => None,
    };
    match (fixed, chi) {
        (Some(f), None) => Ok(f),
        (Some(f), Some(c)) if close(c, f) => Ok(f),
        (Some(f), Some(c)) => Err(Error::Input(format!("{class} requires χ = {f}, got {c}"))),
        (None, None) => Err(Error::Input(format!("target {class} needs a χ value"))),
        (None, Some(c)) if !c.is_finite() => Err(Error::Input(format!("χ = {c} is not finite"))),
        (None, Some(c)) => {
            let ok = match class {
                Class::Tms => c < 0.0,
                Class::Bs => c > 0.0 && c < 1.0,
                _ => c > 1.0,
            };
            if ok {
                Ok(c)
            } else {
                Err(Error::Input(format!("χ = {c} does not belong to class {class}")))
            }
        }
    }
}

/// Class of a χ value away from the boundaries; `None` on 0 or 1.
pub fn class_for_chi(chi: f64) -> Option<Class> {
    if chi == 0.0 || chi == 1.0 {
        None
    } else {
        Some(Class::from_generic_chi(chi))
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `(sin, cos)` factors of a BS, `(sinh, cosh)` of a TMS.
fn trig(spec: &StandardSpec) -> (f64, f64) {
    match spec.class {
        Class::Bs => spec.param.sin_cos(),
        _ => (spec.param.sinh(), spec.param.cosh()),
    }
}

/// Solve for the in-between chain so that `Ū_b · M · Ū_a` (a acts first) has the
/// requested class and χ. Swapped inputs are reduced to their unswapped base and
/// the target is complemented once per SWAP.
pub fn solve_interference(
    a: &StandardSpec,
    b: &StandardSpec,
    target: Class,
    chi_t: f64,
    knob_phi: f64,
) -> Result<InterferenceSolution> {
    a.validate()?;
    b.validate()?;
    let reduce = |s: &StandardSpec| match s.class {
        Class::Stms => (StandardSpec::tms(s.param), true),
        Class::Sqndi => (StandardSpec::qndi(s.param), true),
        _ => (*s, false),
    };
    let (a, sa) = reduce(a);
    let (b, sb) = reduce(b);
    if sa ^ sb {
        solve_core(&a, &b, target.complement(), 1.0 - chi_t, knob_phi, Regime::Auto)
    } else {
        solve_core(&a, &b, target, chi_t, knob_phi, Regime::Auto)
    }
}

fn solution(
    combination: Combination,
    reversed: bool,
    x_f: f64,
    core_class: Class,
    core_chi: f64,
) -> InterferenceSolution {
    InterferenceSolution {
        combination,
        reversed,
        gamma: 1.0,
        phi1: 0.0,
        phi2: 0.0,
        epsilon: 0.0,
        x_f,
        z: core_chi - x_f,
        z0: None,
        alt_gamma: None,
        special: None,
        core_class,
        core_chi,
    }
}

/// Core solver on unswapped bases (BS, TMS, QNDI).
pub fn solve_core(
    a: &StandardSpec,
    b: &StandardSpec,
    target: Class,
    chi_t: f64,
    knob_phi: f64,
    regime: Regime,
) -> Result<InterferenceSolution> {
    let combination = Combination::of(a.class, b.class).ok_or_else(|| {
        Error::Input(format!("no interference formula for {} followed by {}", a.class, b.class))
    })?;
    let reversed = matches!((a.class, b.class), (Class::Tms, Class::Bs) | (_, Class::Qndi))
        && a.class != b.class;
    let (chi_a, chi_b) = (a.chi(), b.chi());
    let x_f = chi_a + chi_b - 2.0 * chi_a * chi_b;
    let mut sol = solution(combination, reversed, x_f, target, chi_t);
    let z = sol.z;

    if matches!(target, Class::Identity | Class::Swap) {
        let ok = match (combination, target) {
            (Combination::BsBs | Combination::TmsTms, Class::Identity) => close(chi_a, chi_b),
            (Combination::QndiQndi, Class::Identity) => true,
            (Combination::BsBs, Class::Swap) => close(chi_a, 1.0 - chi_b),
            _ => false,
        };
        if !ok {
            return Err(match target {
                Class::Identity => Error::Infeasible(format!(
                    "Identity from {} and {}: the two interfaces must have the same strength (χ_A = χ_B)",
                    a.class, b.class
                )),
                _ => Error::Infeasible(format!(
                    "SWAP from {} and {}: needs two BS interfaces whose strengths must be complemented (χ_A = 1 − χ_B)",
                    a.class, b.class
                )),
            });
        }
    }

    match combination {
        Combination::BsBs | Combination::TmsTms => {
            let (sa, ca) = trig(a);
            let (sb, cb) = trig(b);
            // χ = X_f + (Z₀/2)·tr(R(φ₁)S(γ)); σ is the sign of the cross term in T²¹.
            let z0 = if combination == Combination::BsBs {
                2.0 * sa * ca * sb * cb
            } else {
                -2.0 * sa * ca * sb * cb
            };
            sol.z0 = Some(z0);
            let sigma = if combination == Combination::BsBs { sign(z0) } else { -sign(z0) };
            let equal = close(chi_a, chi_b);
            let complementary = combination == Combination::BsBs && close(chi_a, 1.0 - chi_b);
            match target {
                Class::Identity => {
                    sol.special = Some(Special::IdentityFromEqual);
                    sol.phi1 = if sigma > 0.0 { PI } else { 0.0 };
                }
                Class::Qndi if equal => {
                    sol.special = Some(Special::QndiFromEqual);
                    sol.phi1 = knob_phi;
                    let (s, c) = knob_phi.sin_cos();
                    sol.gamma = if sigma > 0.0 { (s - 1.0) / c } else { (s + 1.0) / c };
                }
                Class::Swap => {
                    sol.special = Some(Special::SwapFromComplement);
                    sol.phi1 = if sa * sb * ca * cb > 0.0 { 0.0 } else { PI };
                }
                Class::Sqndi if complementary => {
                    sol.special = Some(Special::SqndiFromComplement);
                    sol.phi1 = knob_phi;
                    let (s, c) = knob_phi.sin_cos();
                    sol.gamma = if sa * sb * ca * cb > 0.0 { (s + 1.0) / c } else { (s - 1.0) / c };
                }
                _ => {
                    let w = z / z0;
                    if regime == Regime::SqueezeOnly && w.abs() < 1.0 {
                        return Err(Error::Unreachable(format!(
                            "χ = {chi_t} lies inside the rotation band of {combination}"
                        )));
                    }
                    if w.abs() <= 1.0 {
                        sol.phi1 = w.acos();
                    } else {
                        sol.phi1 = if w > 0.0 { 0.0 } else { PI };
                        let u = w.abs();
                        sol.gamma = u + (u * u - 1.0).sqrt();
                        sol.alt_gamma = Some(1.0 / sol.gamma);
                    }
                }
            }
        }
        Combination::BsTms => {
            // BS first: χ = X_f + K(γ − 1/γ); TMS first: χ = X_f − K(γ − 1/γ).
            let (bs, tms) = if a.class == Class::Bs { (a, b) } else { (b, a) };
            let (s, c) = trig(bs);
            let (sh, ch) = trig(tms);
            let k = s * c * sh * ch;
            let zz = z / k;
            sol.gamma = 0.5 * (zz + (zz * zz + 4.0).sqrt());
            sol.alt_gamma = Some(-1.0 / sol.gamma);
            if a.class == Class::Tms {
                sol.phi1 = PI;
            }
        }
        Combination::QndiBs | Combination::QndiTms => {
            // χ = χ_other + coef·cos φ₁ / γ (QNDI first) or + coef·γ·cos φ₁ (QNDI second).
            let qndi_first = a.class == Class::Qndi;
            let (q, other) = if qndi_first { (a, b) } else { (b, a) };
            let (s, c) = trig(other);
            let eta = q.param;
            let coef = match (other.class, qndi_first) {
                (Class::Bs, _) => s * c * eta,
                (_, _) => -s * c * eta,
            };
            if z == 0.0 || (z.abs() <= 1e-15 * coef.abs()) {
                sol.special = Some(Special::Seam);
                sol.phi1 = FRAC_PI_2;
            } else {
                let ratio = if qndi_first { coef / z } else { z / coef };
                sol.phi1 = if ratio < 0.0 { PI } else { 0.0 };
                sol.gamma = ratio.abs();
            }
        }
        Combination::QndiQndi => {
            let (ea, eb) = (a.param, b.param);
            match target {
                Class::Identity => {
                    sol.special = Some(Special::IdentityFromQndiPair);
                    sol.gamma = -ea / eb;
                }
                Class::Qndi => {
                    sol.special = Some(Special::QndiFromQndiPair);
                    sol.gamma = if close(ea, -eb) { -1.0 } else { 1.0 };
                }
                _ => {
                    // χ = −η_Aη_B sin φ₁ / γ with φ₂ = −π/2.
                    sol.phi2 = -FRAC_PI_2;
                    sol.phi1 = -sign(chi_t) * sign(ea * eb) * FRAC_PI_2;
                    sol.gamma = (ea * eb / chi_t).abs();
                }
            }
        }
    }
    Ok(sol)
}

/// A component split around its bare standard gate: `T = outer · base · inner`
/// for role A read as `outer · SWAP? · base · mid`, and so on.
#[derive(Debug, Clone)]
pub struct Placed {
    pub base: StandardSpec,
    /// Ops to place between the bare gate and the in-between chain so that the
    /// component's own dressing on that side is undone.
    pub undo_mid: Vec<SingleModeOp>,
    /// Whether a SWAP sits on the far side of the base gate.
    pub swapped: bool,
    pub lambda: f64,
    pub rot: f64,
}

fn fourier_pair() -> Vec<SingleModeOp> {
    vec![SingleModeOp::new(Mode::One, OpKind::Fourier), SingleModeOp::new(Mode::Two, OpKind::Fourier)]
}

/// Role A (acts first): pre-squeezing form `after · T · before = Ū · R₂ S₂`.
pub fn place_first(t: &Interface, th: &Thresholds) -> Result<Placed> {
    let c = to_squeezing_form(t, Side::Pre, th)?;
    let (base, swapped) = match c.canonical.class {
        Class::Stms => (StandardSpec::tms(c.canonical.param), true),
        Class::Sqndi => (StandardSpec::qndi(c.canonical.param), true),
        _ => (c.canonical, false),
    };
    Ok(Placed { base, undo_mid: c.ops_after, swapped, lambda: c.residual_lambda, rot: c.residual_rot })
}

/// Role B (acts second): post-squeezing form `after · T · before = S₂ R₂ · Ū`.
pub fn place_second(t: &Interface, th: &Thresholds) -> Result<Placed> {
    let c = to_squeezing_form(t, Side::Post, th)?;
    let (base, swapped, undo_mid) = match c.canonical.class {
        Class::Stms => (StandardSpec::tms(c.canonical.param), true, c.ops_before),
        Class::Sqndi => {
            let mut ops = c.ops_before;
            ops.extend(fourier_pair());
            (StandardSpec::qndi(-c.canonical.param), true, ops)
        }
        _ => (c.canonical, false, c.ops_before),
    };
    Ok(Placed { base, undo_mid, swapped, lambda: c.residual_lambda, rot: c.residual_rot })
}

/// Two components placed for interference, `first` acting first.
#[derive(Debug, Clone)]
pub struct Pair {
    pub first: Placed,
    pub second: Placed,
}

impl Pair {
    pub fn new(first: &Interface, second: &Interface, th: &Thresholds) -> Result<Pair> {
        Ok(Pair { first: place_first(first, th)?, second: place_second(second, th)? })
    }

    pub fn swap_parity(&self) -> bool {
        self.first.swapped ^ self.second.swapped
    }

    /// In-between ops realizing `target` with strength `chi_t`.
    pub fn chain(
        &self,
        target: Class,
        chi_t: f64,
        knob_phi: f64,
        regime: Regime,
    ) -> Result<(Vec<SingleModeOp>, InterferenceSolution)> {
        let (pa, pb) = (&self.first, &self.second);
        let sol = if self.swap_parity() {
            solve_core(&pa.base, &pb.base, target.complement(), 1.0 - chi_t, knob_phi, regime)?
        } else {
            solve_core(&pa.base, &pb.base, target, chi_t, knob_phi, regime)?
        };
        let mut ops = pb.undo_mid.clone();
        ops.extend(sol.ops());
        ops.extend(pa.undo_mid.iter().copied());
        Ok((ops, sol))
    }
}

/// In-between ops for component `a` acting first and `b` second.
pub fn interference_chain(
    a: &Interface,
    b: &Interface,
    target: Class,
    chi_t: f64,
    knob_phi: f64,
    th: &Thresholds,
) -> Result<(Vec<SingleModeOp>, InterferenceSolution)> {
    Pair::new(a, b, th)?.chain(target, chi_t, knob_phi, Regime::Auto)
}

/// Steps `[B][chain][A]` whose product has the requested class and χ.
pub fn two_interface_steps(
    a: &Component,
    b: &Component,
    target: Class,
    chi_t: f64,
    knob_phi: f64,
    th: &Thresholds,
) -> Result<(StepList, InterferenceSolution)> {
    a.ensure_active()?;
    b.ensure_active()?;
    let (ops, sol) = interference_chain(&a.matrix, &b.matrix, target, chi_t, knob_phi, th)?;
    Ok((StepList::new().component(&b.id).ops(ops).component(&a.id), sol))
}

fn meta(plan: SynthPlan, sol: &InterferenceSolution) -> SynthPlan {
    let mut p = plan
        .with_meta("combination", sol.combination.label())
        .with_meta("gamma", sol.gamma)
        .with_meta("phi1", sol.phi1)
        .with_meta("phi2", sol.phi2)
        .with_meta("epsilon", sol.epsilon)
        .with_meta("x_f", sol.x_f)
        .with_meta("z", sol.z);
    if let Some(z0) = sol.z0 {
        p = p.with_meta("z0", z0);
    }
    if let Some(g) = sol.alt_gamma {
        p = p.with_meta("alt_gamma", g);
    }
    if let Some(s) = sol.special {
        p = p.with_meta("special", format!("{s:?}"));
    }
    p
}

/// Wrap steps with unrestricted controls so the product equals `target` exactly.
fn close_on(steps: StepList, target: &Interface, lib: &Library, th: &Thresholds) -> Result<StepList> {
    let t = steps.matrix(lib)?;
    let (o, i) = match_general(&t, target, th)?;
    steps.wrap(&o, &i, false)
}

/// Two components `a` (acting first) and `b` toward a class and χ. Identity and
/// SWAP targets are closed to the exact matrix.
pub fn two_interface_synth(
    a: &Component,
    b: &Component,
    target: Class,
    chi: Option<f64>,
    knob_phi: f64,
    th: &Thresholds,
) -> Result<SynthPlan> {
    let chi_t = target_chi(target, chi)?;
    let lib = Library::from_components(&[a.clone(), b.clone()]);
    let (steps, sol) = two_interface_steps(a, b, target, chi_t, knob_phi, th)?;
    let (steps, tgt) = match target {
        Class::Identity | Class::Swap => {
            let m = StandardSpec::new(target, 0.0).matrix();
            (close_on(steps, &m, &lib, th)?, Target::exact(target, m, false))
        }
        _ => (steps, Target::class_chi(target, chi_t)),
    };
    Ok(meta(SynthPlan::finalize(steps, tgt, &lib, th)?, &sol))
}

fn three_interface(
    a: &Component,
    b: &Component,
    c: &Component,
    target: Class,
    knob_phi: f64,
    th: &Thresholds,
) -> Result<SynthPlan> {
    for x in [a, b, c] {
        x.ensure_active()?;
    }
    let lib = Library::from_components(&[a.clone(), b.clone(), c.clone()]);
    let goal = StandardSpec::new(target, 0.0).matrix();
    if let Ok(p) = two_interface_synth(a, b, target, None, knob_phi, th) {
        return Ok(p.with_meta("shortcut", true));
    }
    // AB must become C⁻¹ (Identity) or C⁻¹·SWAP (SWAP).
    let w = c.matrix.inverse()? * goal;
    let (class_w, chi_w) = match target {
        Class::Swap => (c.class().complement(), 1.0 - c.chi()),
        _ => (c.class(), c.chi()),
    };
    let (ab, sol) = two_interface_steps(a, b, class_w, chi_w, knob_phi, th)?;
    let t_ab = ab.matrix(&lib)?;
    let (o, i) = match_general(&t_ab, &w, th)?;
    let steps = StepList::new().component(&c.id).extend(ab.wrap(&o, &i, false)?);
    let plan = SynthPlan::finalize(steps, Target::exact(target, goal, false), &lib, th)?;
    Ok(meta(plan, &sol).with_meta("shortcut", false))
}

/// Identity from three components: AB is engineered into C⁻¹.
pub fn identity_synth3(a: &Component, b: &Component, c: &Component, th: &Thresholds) -> Result<SynthPlan> {
    three_interface(a, b, c, Class::Identity, SPECIAL_PHI, th)
}

/// SWAP from three components: AB is engineered into C⁻¹·SWAP.
pub fn swap_synth3(a: &Component, b: &Component, c: &Component, th: &Thresholds) -> Result<SynthPlan> {
    three_interface(a, b, c, Class::Swap, SPECIAL_PHI, th)
}

/// Local ops `M` with `Ū_b · M · Ū_a` realizing the solution, for tests and tooling.
pub fn core_product(a: &StandardSpec, b: &StandardSpec, sol: &InterferenceSolution) -> Interface {
    b.matrix() * ops_local(&sol.ops()).interface() * a.matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ranks_and_class;
    use crate::symplectic::random_local;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn th() -> Thresholds {
        Thresholds::default()
    }

    fn check_core(a: StandardSpec, b: StandardSpec, target: Class, chi: f64) -> Interface {
        let sol = solve_core(&a, &b, target, chi, SPECIAL_PHI, Regime::Auto).unwrap();
        let t = core_product(&a, &b, &sol);
        let inv = ranks_and_class(&t, &th()).unwrap();
        assert_eq!(inv.class, target, "{a:?} {b:?} {sol:?}");
        assert!((t.t21().det() - chi).abs() < 1e-10 * chi.abs().max(1.0), "{a:?} {b:?} {sol:?}");
        assert!((sol.x_f + sol.z - chi).abs() < 1e-10);
        t
    }

    #[test]
    fn every_ordered_pair_reaches_generic_targets() {
        let bases = [
            StandardSpec::bs(0.4),
            StandardSpec::bs(-1.1),
            StandardSpec::tms(0.6),
            StandardSpec::tms(-0.3),
            StandardSpec::qndi(1.3),
            StandardSpec::qndi(-0.7),
        ];
        for a in bases {
            for b in bases {
                for chi in [-5.0, -1.0, 0.25, 0.75, 2.0, 5.0] {
                    check_core(a, b, Class::from_generic_chi(chi), chi);
                }
                check_core(a, b, Class::Qndi, 0.0);
                check_core(a, b, Class::Sqndi, 1.0);
            }
        }
    }

    #[test]
    fn worked_examples() {
        let tms = StandardSpec::from_chi(-1.0);
        let bs = StandardSpec::from_chi(0.5);
        let sol = solve_core(&tms, &bs, Class::Stms, 2.0, SPECIAL_PHI, Regime::Auto).unwrap();
        assert!((sol.x_f - 0.5).abs() < 1e-12 && (sol.z - 1.5).abs() < 1e-12);
        assert!((sol.gamma - 2.5184).abs() < 1e-4, "{}", sol.gamma);

        let (ea, eb) = (1.5, 2.0);
        let sol = solve_core(&StandardSpec::qndi(ea), &StandardSpec::qndi(eb), Class::Tms, -2.0, SPECIAL_PHI, Regime::Auto).unwrap();
        assert!((sol.gamma - ea * eb / 2.0).abs() < 1e-12);
        assert_eq!(sol.phi1.abs(), FRAC_PI_2);

        let a = StandardSpec::bs(0.3);
        let b = StandardSpec::bs(0.9);
        let xf = a.chi() + b.chi() - 2.0 * a.chi() * b.chi();
        let sol = solve_core(&a, &b, Class::Bs, xf, SPECIAL_PHI, Regime::Auto).unwrap();
        assert_eq!(sol.gamma, 1.0);
        assert!((sol.phi1 - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn special_cases() {
        let a = StandardSpec::bs(0.4);
        let t = check_core(a, a, Class::Qndi, 0.0);
        assert_eq!(ranks_and_class(&t, &th()).unwrap().n_t, 1);
        let sol = solve_core(&a, &a, Class::Qndi, 0.0, SPECIAL_PHI, Regime::Auto).unwrap();
        assert!((sol.gamma - (SPECIAL_PHI.tan() - 1.0 / SPECIAL_PHI.cos())).abs() < 1e-15);
        check_core(a, a, Class::Identity, 0.0);
        let c = StandardSpec::bs(FRAC_PI_2 - 0.4);
        check_core(a, c, Class::Swap, 1.0);
        check_core(a, c, Class::Sqndi, 1.0);
        let r = StandardSpec::tms(0.5);
        check_core(r, r, Class::Qndi, 0.0);
        check_core(r, r, Class::Identity, 0.0);
        check_core(StandardSpec::qndi(0.5), StandardSpec::qndi(2.0), Class::Identity, 0.0);
        check_core(StandardSpec::qndi(0.5), StandardSpec::qndi(-0.5), Class::Qndi, 0.0);
        let err = solve_core(&a, &StandardSpec::tms(0.2), Class::Swap, 1.0, SPECIAL_PHI, Regime::Auto).unwrap_err();
        assert!(err.to_string().contains("must be complemented"));
        let err = solve_core(&a, &StandardSpec::bs(0.5), Class::Identity, 0.0, SPECIAL_PHI, Regime::Auto).unwrap_err();
        assert!(err.to_string().contains("same strength"));
    }

    #[test]
    fn seam_keeps_partner_strength() {
        let q = StandardSpec::qndi(1.0);
        let b = StandardSpec::bs(0.7);
        let sol = solve_core(&q, &b, Class::Bs, b.chi(), SPECIAL_PHI, Regime::Auto).unwrap();
        assert_eq!(sol.special, Some(Special::Seam));
        check_core(q, b, Class::Bs, b.chi());
    }

    #[test]
    fn dressed_pairs_and_swapped_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let specs = [
            StandardSpec::bs(0.5),
            StandardSpec::tms(0.6),
            StandardSpec::stms(0.4),
            StandardSpec::qndi(1.0),
            StandardSpec::sqndi(0.8),
        ];
        for sa in specs {
            for sb in specs {
                let a = random_local(&mut rng, 1.0).interface() * sa.matrix() * random_local(&mut rng, 1.0).interface();
                let b = random_local(&mut rng, 1.0).interface() * sb.matrix() * random_local(&mut rng, 1.0).interface();
                let ca = Component::new("A", a, &th()).unwrap();
                let cb = Component::new("B", b, &th()).unwrap();
                for (class, chi) in [(Class::Tms, Some(-2.0)), (Class::Bs, Some(0.3)), (Class::Stms, Some(3.0)), (Class::Qndi, None), (Class::Sqndi, None)] {
                    let p = two_interface_synth(&ca, &cb, class, chi, SPECIAL_PHI, &th()).unwrap();
                    assert!(p.residual < 1e-8, "{sa:?} {sb:?} {class} {}", p.residual);
                    assert_eq!(p.component_count(), 2);
                }
            }
        }
    }

    #[test]
    fn three_interface_examples() {
        let comp = |id: &str, s: StandardSpec| Component::new(id, s.matrix(), &th()).unwrap();
        let a = comp("A", StandardSpec::bs(0.3));
        let p = identity_synth3(&a, &comp("B", StandardSpec::bs(0.3)), &comp("C", StandardSpec::bs(0.3)), &th()).unwrap();
        assert!(p.residual < 1e-8);
        let p = identity_synth3(
            &comp("A", StandardSpec::tms(0.5)),
            &comp("B", StandardSpec::qndi(1.0)),
            &comp("C", StandardSpec::bs(0.7)),
            &th(),
        )
        .unwrap();
        assert!(p.residual < 1e-8 && p.component_count() == 3);
        let s = comp("S", StandardSpec::bs(std::f64::consts::FRAC_PI_6));
        let p = swap_synth3(&s, &s, &s, &th()).unwrap();
        assert!(p.residual < 1e-8);
        let p = swap_synth3(
            &comp("A", StandardSpec::qndi(2.0)),
            &comp("B", StandardSpec::bs(0.4)),
            &comp("C", StandardSpec::tms(0.3)),
            &th(),
        )
        .unwrap();
        assert!(p.residual < 1e-8 && p.component_count() == 3);
        let c = comp("C", StandardSpec::bs(FRAC_PI_2 - 0.3));
        let p = swap_synth3(&a, &c, &c, &th()).unwrap();
        assert_eq!(p.component_count(), 2);
    }
}
