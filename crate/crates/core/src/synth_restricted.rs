//! Synthesis when mode 2 admits rotations only.
//!
//! Every emitted chain is audited: mode-2 ops are rotations or Fourier gates.
//! Intermediate interfaces are brought to pre- or post-squeezing forms so that
//! their irreducible mode-2 squeezes sit at the outer ends of the cascade.

use crate::classify::{
    match_restricted, restricted_invariants, squeezing_form_matrix, squeezing_form_with, to_squeezing_form, Side,
    Thresholds,
};
use crate::error::{Error, Result};
use crate::plan::{Component, Library, StepList, SynthPlan, Target};
use crate::symplectic::{Class, Interface, Local, Mode, OpKind, SingleModeOp, StandardSpec, GAMMA_MIN};
use crate::synth_general::{target_chi, two_interface_steps, Pair, Regime, SPECIAL_PHI};
use crate::linalg::Quad2;
use std::f64::consts::FRAC_PI_2;

/// `Λ_a` as a function of Γ, with `Γ(γ)` tuned by the in-between squeeze.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSolution {
    pub big_gamma: f64,
    pub x: f64,
    pub lambda_a: f64,
    pub gamma: f64,
}

pub fn lambda_a_formula(big_gamma: f64, x: f64) -> f64 {
    let ax = x.abs();
    (ax + big_gamma + (big_gamma * big_gamma + 2.0 * ax * big_gamma).sqrt()).sqrt()
}

/// Γ for BS+BS, TMS+TMS, TMS+sTMS and sTMS+sTMS intermediate pairs.
pub fn big_gamma_unbounded(chi_ab: f64, chi_cd: f64, chi_abcd: f64, gamma: f64) -> f64 {
    let k = (chi_ab * chi_cd).abs() / (2.0 * (1.0 - chi_abcd).abs());
    k * ((gamma * gamma - 1.0) / gamma).powi(2)
}

/// Γ for BS+TMS and BS+sTMS intermediate pairs. The constant term keeps
/// `Λ_a` bounded away from 1 whichever γ is used.
pub fn big_gamma_mixed(chi_ab: f64, chi_cd: f64, chi_abcd: f64, gamma: f64) -> f64 {
    let offset = 2.0 * (chi_ab * chi_cd).abs().min(((1.0 - chi_ab) * (1.0 - chi_cd)).abs()) / (1.0 - chi_abcd).abs();
    big_gamma_unbounded(chi_ab, chi_cd, chi_abcd, gamma) + offset
}

pub fn chi_abcd(chi_ab: f64, chi_cd: f64) -> f64 {
    chi_ab + chi_cd - 2.0 * chi_ab * chi_cd
}

impl GammaSolution {
    /// Squeeze `γ ≥ 1` giving the requested `Λ_a ≥ 1` for an unbounded pair.
    pub fn solve(chi_ab: f64, chi_cd: f64, lambda_a: f64) -> GammaSolution {
        let chi = chi_abcd(chi_ab, chi_cd);
        let x = (1.0 - chi).signum();
        let y = lambda_a * lambda_a;
        let big_gamma = (y - 1.0).powi(2) / (2.0 * y);
        let k = 2.0 * big_gamma * (1.0 - chi).abs() / (chi_ab * chi_cd).abs();
        let gamma = 0.5 * (k.sqrt() + (k + 4.0).sqrt());
        GammaSolution { big_gamma, x, lambda_a, gamma }
    }
}

/// Irreducible squeezing of a two-interface cascade `S₂(Λ_B) Ū_B S₁(γ) Ū_A S₂(Λ_A)`
/// with strength `chi_int`, for pairs of the same kind (BS+BS or TMS/sTMS pairs).
pub fn paired_lambda(chi_a: f64, chi_b: f64, lambda_a: f64, lambda_b: f64, chi_int: f64) -> f64 {
    let r = (chi_a * chi_b * (1.0 - chi_a) * (1.0 - chi_b)).abs().sqrt();
    let xf = chi_a + chi_b - 2.0 * chi_a * chi_b;
    let (xp, xm) = (xf + 2.0 * r, xf - 2.0 * r);
    let disc = ((chi_int - xp) * (chi_int - xm)).abs().sqrt();
    let base = 2.0 - chi_a - chi_b - chi_int;
    let norm = 2.0 * ((1.0 - chi_a) * (1.0 - chi_b) * (1.0 - chi_int)).abs().sqrt();
    let root = (base + disc).abs().max((base - disc).abs());
    lambda_a * lambda_b * root / norm
}

/// An intermediate interface delivered exactly in a normal form.
#[derive(Debug, Clone)]
pub struct Formed {
    pub steps: StepList,
    pub matrix: Interface,
    pub canonical: StandardSpec,
    pub lambda: f64,
    pub rot: f64,
    pub kappa: Option<f64>,
    pub components: usize,
}

fn lib_of(comps: &[&Component]) -> Library {
    let owned: Vec<Component> = comps.iter().map(|c| (*c).clone()).collect();
    Library::from_components(&owned)
}

/// Wrap `steps` with restricted controls so their product equals `target`.
pub fn close_restricted(steps: StepList, target: &Interface, lib: &Library, th: &Thresholds) -> Result<StepList> {
    let t = steps.matrix(lib)?;
    let (o, i) = match_restricted(&t, target, th)?;
    steps.wrap(&o, &i, true)
}

fn form_steps(steps: StepList, side: Side, eta: Option<f64>, lib: &Library, th: &Thresholds, n: usize) -> Result<Formed> {
    let t = steps.matrix(lib)?;
    let cert = squeezing_form_with(&t, side, eta, th)?;
    let kappa = restricted_invariants(&t, th)?.kappa;
    Ok(Formed {
        steps: steps.wrap(&cert.after, &cert.before, true)?,
        matrix: cert.target,
        canonical: cert.canonical,
        lambda: cert.residual_lambda,
        rot: cert.residual_rot,
        kappa,
        components: n,
    })
}

/// A single component in the requested squeezing form.
pub fn form_single(c: &Component, side: Side, th: &Thresholds) -> Result<Formed> {
    c.ensure_active()?;
    form_steps(StepList::new().component(&c.id), side, None, &lib_of(&[c]), th, 1)
}

fn form_pair(a: &Component, b: &Component, class: Class, chi: f64, side: Side, th: &Thresholds) -> Result<Formed> {
    let (steps, _) = two_interface_steps(a, b, class, chi, SPECIAL_PHI, th)?;
    form_steps(steps, side, None, &lib_of(&[a, b]), th, 2)
}

fn restricted_target(class: Class, chi: f64, lambda: Option<f64>, kappa: Option<f64>, matrix: Option<Interface>) -> Target {
    Target { class, chi, lambda, kappa, restricted: true, matrix }
}

/// Two components cascaded to strength `chi` and delivered in a squeezing form.
pub fn two_interface_module(
    a: &Component,
    b: &Component,
    class: Class,
    chi: Option<f64>,
    side: Side,
    th: &Thresholds,
) -> Result<SynthPlan> {
    let chi_t = target_chi(class, chi)?;
    let lib = lib_of(&[a, b]);
    let f = form_pair(a, b, class, chi_t, side, th)?;
    let lambda = matches!(class, Class::Swap).then_some(()).map_or(Some(f.lambda), |_| None);
    let target = restricted_target(class, chi_t, lambda, f.kappa, Some(f.matrix));
    Ok(SynthPlan::finalize(f.steps, target, &lib, th)?
        .with_meta("form", if side == Side::Pre { "pre" } else { "post" })
        .with_meta("lambda", f.lambda))
}

/// SWAP from three components: AB is made into the swapped inverse of C.
pub fn swap_restricted(a: &Component, b: &Component, c: &Component, th: &Thresholds) -> Result<SynthPlan> {
    for x in [a, b, c] {
        x.ensure_active()?;
    }
    let lib = lib_of(&[a, b, c]);
    let goal = Interface::swap();
    let target = restricted_target(Class::Swap, 1.0, None, None, Some(goal));
    if let Ok((steps, _)) = two_interface_steps(a, b, Class::Swap, 1.0, SPECIAL_PHI, th) {
        let steps = close_restricted(steps, &goal, &lib, th)?;
        return Ok(SynthPlan::finalize(steps, target, &lib, th)?.with_meta("shortcut", true));
    }
    let cert_c = to_squeezing_form(&c.matrix, Side::Post, th)?;
    let v = cert_c.canonical.matrix().inverse_unchecked() * goal;
    let (class_w, chi_w) = (c.class().complement(), 1.0 - c.chi());
    let (ab, _) = two_interface_steps(a, b, class_w, chi_w, SPECIAL_PHI, th)?;
    let t_ab = ab.matrix(&lib)?;
    let cert_ab = to_squeezing_form(&t_ab, Side::Pre, th)?;
    let cert_v = squeezing_form_with(&v, Side::Pre, Some(cert_ab.canonical.param), th)?;
    let mid = cert_c.before * cert_v.after.inverse() * cert_ab.after;
    let steps = StepList::new()
        .component(&c.id)
        .local(&mid, true)?
        .extend(ab)
        .local(&cert_ab.before, true)?;
    let steps = close_restricted(steps, &goal, &lib, th)?;
    Ok(SynthPlan::finalize(steps, target, &lib, th)?.with_meta("shortcut", false))
}

/// Intermediate strength for the first pair, keeping both pairs of a kind
/// whose irreducible squeezing is unbounded.
pub fn choose_chi_ab(chi_t: f64) -> f64 {
    if chi_t < 0.0 || chi_t <= 0.5 {
        chi_t / 2.0
    } else if chi_t < 1.0 {
        (1.0 + chi_t) / 2.0
    } else {
        (1.0 - chi_t) / 2.0
    }
}

pub fn chi_cd_for(chi_t: f64, chi_ab: f64) -> f64 {
    (chi_t - chi_ab) / (1.0 - 2.0 * chi_ab)
}

/// True for intermediate pairs whose Γ is unbounded.
pub fn unbounded_pair(chi_ab: f64, chi_cd: f64) -> bool {
    let (a, b) = (Class::from_generic_chi(chi_ab), Class::from_generic_chi(chi_cd));
    matches!(
        (a, b),
        (Class::Bs, Class::Bs) | (Class::Tms | Class::Stms, Class::Tms | Class::Stms)
    )
}

/// Mode-1 rotation angle next to a standard gate that yields the mode-2
/// rotation `inner` on the far side, plus the mode-2 rotation left on the near side.
fn effective_rotation(class: Class, inner: f64) -> (f64, f64) {
    match class {
        Class::Bs => (inner, -inner),
        Class::Tms => (-inner, -inner),
        _ => (inner, inner),
    }
}

fn sq1(g: f64) -> SingleModeOp {
    SingleModeOp::sq(Mode::One, g)
}

fn lambda_of(t: &Interface, th: &Thresholds) -> Result<f64> {
    restricted_invariants(t, th)?.lambda.ok_or_else(|| Error::Inconsistent("no irreducible squeezing".into()))
}

fn check_lambda_target(lambda_t: f64) -> Result<()> {
    if !lambda_t.is_finite() || lambda_t < 1.0 {
        return Err(Error::Input(format!("Λ = {lambda_t} must be finite and at least 1")));
    }
    Ok(())
}

/// Arbitrary χ ∉ {0, 1} with irreducible squeezing `lambda_t` from four components.
pub fn chi_lambda_synth4(
    comps: &[Component; 4],
    chi_t: f64,
    lambda_t: f64,
    shortcut: bool,
    th: &Thresholds,
) -> Result<SynthPlan> {
    check_lambda_target(lambda_t)?;
    let class = Class::from_generic_chi(chi_t);
    target_chi(class, Some(chi_t))?;
    for c in comps {
        c.ensure_active()?;
    }
    let [a, b, c, d] = comps;
    let lib = Library::from_components(comps);

    let single = if shortcut {
        [a, b].into_iter().find(|x| {
            let chi = x.chi();
            matches!(x.class(), Class::Bs | Class::Tms | Class::Stms)
                && (1.0 - 2.0 * chi).abs() > 1e-3
                && unbounded_pair(chi, chi_cd_for(chi_t, chi))
        })
    } else {
        None
    };
    let ab = match single {
        Some(x) => form_single(x, Side::Pre, th)?,
        None => {
            let chi_ab = choose_chi_ab(chi_t);
            form_pair(a, b, Class::from_generic_chi(chi_ab), chi_ab, Side::Pre, th)?
        }
    };
    let chi_ab = ab.canonical.chi();
    let chi_cd = chi_cd_for(chi_t, chi_ab);
    let cd = form_pair(c, d, Class::from_generic_chi(chi_cd), chi_cd, Side::Post, th)?;
    let chi_cd = cd.canonical.chi();

    let product = lambda_t >= ab.lambda * cd.lambda;
    let lambda_a = if product { lambda_t / (ab.lambda * cd.lambda) } else { ab.lambda * cd.lambda / lambda_t };
    let (u_ab, u_cd) = (ab.canonical.matrix(), cd.canonical.matrix());
    let fourier = Interface::local(Quad2::fourier(), Quad2::IDENTITY);
    let zeta = |g: f64| u_cd * Interface::local(Quad2::squeeze(g), Quad2::IDENTITY) * fourier * u_ab;
    let measured = |g: f64| {
        let t = zeta(g);
        t.t22().svd().s0 / (1.0 - t.t21().det()).abs().sqrt()
    };
    let mut sol = GammaSolution::solve(chi_ab, chi_cd, lambda_a);
    if (measured(sol.gamma) - lambda_a).abs() > 1e-9 * lambda_a {
        let (mut lo, mut hi) = (0.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if measured(mid.exp()) < lambda_a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        sol.gamma = (0.5 * (lo + hi)).exp();
    }
    let gamma = sol.gamma;
    let svd = zeta(gamma).t22().svd();
    let (beta3, alpha3) = if product {
        (-svd.left, -svd.right)
    } else {
        (FRAC_PI_2 - svd.left, -svd.right - FRAC_PI_2)
    };
    let (alpha, alpha1) = effective_rotation(ab.canonical.class, alpha3);
    let (beta, beta1) = effective_rotation(cd.canonical.class, beta3);
    let psi = -alpha1 - beta1;
    let mid = vec![
        SingleModeOp::rot(Mode::One, beta),
        sq1(gamma),
        SingleModeOp::new(Mode::One, OpKind::Fourier),
        SingleModeOp::rot(Mode::One, alpha),
        SingleModeOp::rot(Mode::Two, psi),
    ];
    let n = ab.components + cd.components;
    let steps = cd.steps.extend(StepList::new().ops(mid)).extend(ab.steps);
    let target = restricted_target(class, chi_t, Some(lambda_t), None, None);
    Ok(SynthPlan::finalize(steps, target, &lib, th)?
        .with_meta("chi_ab", chi_ab)
        .with_meta("chi_cd", chi_cd)
        .with_meta("lambda_ab", ab.lambda)
        .with_meta("lambda_cd", cd.lambda)
        .with_meta("lambda_a", lambda_a)
        .with_meta("big_gamma", sol.big_gamma)
        .with_meta("gamma", gamma)
        .with_meta("branch", if product { "product" } else { "quotient" })
        .with_meta("shortcut", n == 3))
}

/// Pick the squeeze with the smallest `|ln|γ||` among candidates, skipping degenerate ones.
fn best_gamma(cands: impl IntoIterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    cands
        .into_iter()
        .filter(|(g, _)| g.is_finite() && g.abs() > 1e3 * GAMMA_MIN)
        .min_by(|x, y| x.0.abs().ln().abs().total_cmp(&y.0.abs().ln().abs()))
}

/// Restricted-equivalent standard sQNDI `Ū^SQ(±Λ)` for a pair cascaded to sQNDI.
fn standard_sqndi(a: &Component, b: &Component, th: &Thresholds) -> Result<(StepList, f64)> {
    let (steps, _) = two_interface_steps(a, b, Class::Sqndi, 1.0, SPECIAL_PHI, th)?;
    let t = steps.matrix(&lib_of(&[a, b]))?;
    let lambda = lambda_of(&t, th)?;
    Ok((steps, lambda))
}

fn f_factor(lambda: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (lambda * lambda * c * c + s * s / (lambda * lambda)).sqrt()
}

/// sQNDI with signed strength `lambda_t` from four components.
pub fn sqnd_synth4(comps: &[Component; 4], lambda_t: f64, th: &Thresholds) -> Result<SynthPlan> {
    if !lambda_t.is_finite() || lambda_t == 0.0 {
        return Err(Error::Input(format!("sQNDI strength Λ = {lambda_t} must be finite and nonzero")));
    }
    for c in comps {
        c.ensure_active()?;
    }
    let [a, b, c, d] = comps;
    let lib = Library::from_components(comps);
    let (ab, lambda_ab) = standard_sqndi(a, b, th)?;
    let cd = form_pair(c, d, Class::Qndi, 0.0, Side::Post, th)?;
    let eta_cd = cd.canonical.param;
    if eta_cd == 0.0 {
        return Err(Error::Infeasible("QND strength of CD vanished".into()));
    }
    let f = f_factor(cd.lambda, cd.rot);
    let (gamma, sign) = best_gamma([1.0, -1.0].map(|s| ((lambda_t / f - s * lambda_ab) / eta_cd, s)))
        .ok_or_else(|| Error::Infeasible("no admissible mode-1 squeeze".into()))?;
    let ab = close_restricted(ab, &StandardSpec::sqndi(sign * lambda_ab).matrix(), &lib, th)?;
    let steps = StepList::new()
        .ops(vec![sq1(1.0 / gamma)])
        .extend(cd.steps)
        .ops(vec![sq1(gamma)])
        .extend(ab);
    let target = restricted_target(Class::Sqndi, 1.0, Some(lambda_t.abs()), None, None);
    Ok(SynthPlan::finalize(steps, target, &lib, th)?
        .with_meta("lambda_signed", lambda_t)
        .with_meta("lambda_ab", sign * lambda_ab)
        .with_meta("lambda_cd", cd.lambda)
        .with_meta("kappa_cd", cd.kappa.unwrap_or(0.0))
        .with_meta("eta_cd", eta_cd)
        .with_meta("gamma", gamma))
}

/// QNDI with irreducible squeezing `lambda_t` and shearing `kappa_t` from four components.
pub fn qnd_synth4(comps: &[Component; 4], lambda_t: f64, kappa_t: f64, th: &Thresholds) -> Result<SynthPlan> {
    check_lambda_target(lambda_t)?;
    if !kappa_t.is_finite() {
        return Err(Error::Input(format!("κ = {kappa_t} must be finite")));
    }
    for c in comps {
        c.ensure_active()?;
    }
    let [a, b, c, d] = comps;
    let lib = Library::from_components(comps);
    let goal = squeezing_form_matrix(&StandardSpec::qndi(1.0), lambda_t, kappa_t.atan(), Side::Pre);
    let cert_h = to_squeezing_form(&goal.inverse_unchecked(), Side::Post, th)?;
    let post_h = cert_h.target;
    let eta_h = cert_h.canonical.param;
    let f_h = f_factor(cert_h.residual_lambda, cert_h.residual_rot);

    let (ab, lambda_ab) = standard_sqndi(a, b, th)?;
    let (cd, lambda_cd) = standard_sqndi(c, d, th)?;
    let mut cands = Vec::new();
    for s_cd in [1.0, -1.0] {
        for s in [1.0, -1.0] {
            cands.push(((s * lambda_ab / f_h - s_cd * lambda_cd) / eta_h, s_cd));
        }
    }
    let (gamma, s_cd) = best_gamma(cands).ok_or_else(|| Error::Infeasible("no admissible mode-1 squeeze".into()))?;
    let u_ab = StandardSpec::sqndi(lambda_ab).matrix();
    let u_cd = StandardSpec::sqndi(s_cd * lambda_cd).matrix();
    let ab = close_restricted(ab, &u_ab, &lib, th)?;
    let cd = close_restricted(cd, &u_cd, &lib, th)?;
    let s1 = |g: f64| Local::one(Quad2::squeeze(g)).interface();
    let k = s1(1.0 / gamma) * post_h * s1(gamma) * u_cd;
    let (p, q) = match_restricted(&k, &u_ab.inverse_unchecked(), th)?;
    let outer = cert_h.before * Local::one(Quad2::squeeze(gamma));
    let inner = p * Local::one(Quad2::squeeze(1.0 / gamma)) * cert_h.after;
    let steps = StepList::new()
        .local(&outer, true)?
        .extend(cd)
        .local(&q, true)?
        .extend(ab)
        .local(&inner, true)?;
    let target = restricted_target(Class::Qndi, 0.0, Some(lambda_t), Some(kappa_t), Some(goal));
    Ok(SynthPlan::finalize(steps, target, &lib, th)?
        .with_meta("lambda_ab", lambda_ab)
        .with_meta("lambda_cd", s_cd * lambda_cd)
        .with_meta("eta_h", eta_h)
        .with_meta("gamma", gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Auto,
    /// Two same-strength pairs made mutually inverse up to the squeeze.
    Four,
    /// Four components engineer the inverse of the fifth, preceded by the squeeze.
    Five,
    /// Mode-1 squeeze between two engineered SWAPs.
    Six,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Some(Scheme::Auto),
            "four" | "4" => Some(Scheme::Four),
            "five" | "5" | "standard" => Some(Scheme::Five),
            "six" | "6" | "double-swap" => Some(Scheme::Six),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Auto => "auto",
            Scheme::Four => "four",
            Scheme::Five => "five",
            Scheme::Six => "six",
        }
    }
}

fn squeeze2(l: f64) -> Interface {
    Local::two(Quad2::squeeze(l)).interface()
}

/// Mode-2 squeeze `S₂(lambda_t)` with mode 1 left untouched.
pub fn remote_squeeze(comps: &[Component], lambda_t: f64, scheme: Scheme, th: &Thresholds) -> Result<SynthPlan> {
    if !lambda_t.is_finite() || lambda_t <= 0.0 {
        return Err(Error::Input(format!("squeeze Λ = {lambda_t} must be positive")));
    }
    let goal = squeeze2(lambda_t);
    let lib = Library::from_components(comps);
    let target = restricted_target(Class::Identity, 0.0, Some(lambda_t.max(1.0 / lambda_t)), None, Some(goal));
    if lambda_t == 1.0 {
        return Ok(SynthPlan::finalize(StepList::new(), target, &lib, th)?.with_meta("scheme", "trivial"));
    }
    for c in comps {
        c.ensure_active()?;
    }
    let passive = |c: &Component| matches!(c.class(), Class::Bs | Class::Tms | Class::Stms);
    let order: &[Scheme] = match scheme {
        Scheme::Auto => &[Scheme::Four, Scheme::Five, Scheme::Six],
        Scheme::Four => &[Scheme::Four],
        Scheme::Five => &[Scheme::Five],
        Scheme::Six => &[Scheme::Six],
    };
    let mut reasons = Vec::new();
    for s in order {
        let attempt = match s {
            Scheme::Four if comps.len() >= 4 && comps[..4].iter().all(passive) => {
                four_scheme(&comps[..4], lambda_t, &lib, th)
            }
            Scheme::Four => Err(Error::Infeasible("needs four BS/TMS/sTMS components".into())),
            Scheme::Five if comps.len() >= 5 => five_scheme(&comps[..5], lambda_t, &lib, th),
            Scheme::Five => Err(Error::Infeasible("needs five components".into())),
            Scheme::Six if comps.len() >= 6 => six_scheme(&comps[..6], lambda_t, &lib, th),
            Scheme::Six => Err(Error::Infeasible("needs six components".into())),
            Scheme::Auto => unreachable!(),
        };
        match attempt {
            Ok(steps) => {
                return Ok(SynthPlan::finalize(steps, target, &lib, th)?.with_meta("scheme", s.label()));
            }
            Err(e) => reasons.push(format!("{}: {e}", s.label())),
        }
    }
    Err(Error::Infeasible(format!("remote squeezing failed ({})", reasons.join("; "))))
}

fn five_scheme(comps: &[Component], lambda_t: f64, lib: &Library, th: &Thresholds) -> Result<StepList> {
    let e = &comps[4];
    let four: [Component; 4] = [comps[0].clone(), comps[1].clone(), comps[2].clone(), comps[3].clone()];
    let w = e.matrix.inverse()? * squeeze2(lambda_t);
    let inv = restricted_invariants(&w, th)?;
    let lambda_w = inv.lambda.unwrap_or(1.0);
    let inner = match inv.class {
        Class::Qndi => qnd_synth4(&four, lambda_w, inv.kappa.unwrap_or(0.0), th)?,
        Class::Sqndi => sqnd_synth4(&four, lambda_w, th)?,
        _ => chi_lambda_synth4(&four, inv.chi, lambda_w, true, th)?,
    };
    let (o, i) = match_restricted(&inner.achieved, &w, th)?;
    Ok(StepList::new().component(&e.id).extend(inner.step_list().wrap(&o, &i, true)?)).and_then(|s| {
        s.matrix(lib)?;
        Ok(s)
    })
}

fn six_scheme(comps: &[Component], lambda_t: f64, _lib: &Library, th: &Thresholds) -> Result<StepList> {
    let first = swap_restricted(&comps[0], &comps[1], &comps[2], th)?;
    let second = swap_restricted(&comps[3], &comps[4], &comps[5], th)?;
    Ok(second.step_list().ops(vec![sq1(lambda_t)]).extend(first.step_list()))
}

/// Strength grid for the four-component scan: dense near 0 and 1 and out to large |χ|.
fn chi_grid() -> Vec<f64> {
    let mut g = Vec::new();
    for k in 0..=640 {
        let x = (-10.0 + 16.0 * k as f64 / 640.0).exp();
        g.extend([-x, x, 1.0 - x, 1.0 + x]);
    }
    g.retain(|&c| c != 0.0 && c != 1.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

struct FourEval {
    ab_ops: Vec<SingleModeOp>,
    cd_ops: Vec<SingleModeOp>,
    t_ab: Interface,
    w: Interface,
    h: f64,
}

fn four_scheme(comps: &[Component], lambda_t: f64, lib: &Library, th: &Thresholds) -> Result<StepList> {
    let [a, b, c, d] = [&comps[0], &comps[1], &comps[2], &comps[3]];
    let ab = Pair::new(&a.matrix, &b.matrix, th)?;
    let cd = Pair::new(&c.matrix, &d.matrix, th)?;
    let grid = chi_grid();
    for goal_l in [lambda_t, 1.0 / lambda_t] {
        let goal = squeeze2(goal_l);
        let eval = |chi: f64| -> Option<FourEval> {
            let class = Class::from_generic_chi(chi);
            let (ab_ops, _) = ab.chain(class, chi, SPECIAL_PHI, Regime::SqueezeOnly).ok()?;
            let (cd_ops, _) = cd.chain(class, chi, SPECIAL_PHI, Regime::SqueezeOnly).ok()?;
            let t_ab = b.matrix * crate::symplectic::ops_matrix(&ab_ops) * a.matrix;
            let t_cd = d.matrix * crate::symplectic::ops_matrix(&cd_ops) * c.matrix;
            let w = t_cd.inverse_unchecked() * goal;
            let h = lambda_of(&t_ab, th).ok()? - lambda_of(&w, th).ok()?;
            Some(FourEval { ab_ops, cd_ops, t_ab, w, h })
        };
        let vals: Vec<Option<f64>> = grid.iter().map(|&x| eval(x).map(|e| e.h)).collect();
        for k in 0..grid.len() - 1 {
            let (Some(h0), Some(h1)) = (vals[k], vals[k + 1]) else { continue };
            let (x0, x1) = (grid[k], grid[k + 1]);
            if Class::from_generic_chi(x0) != Class::from_generic_chi(x1) || h0.signum() == h1.signum() {
                continue;
            }
            let (mut lo, mut hi, mut hlo) = (x0, x1, h0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let Some(e) = eval(mid) else { break };
                if e.h.signum() == hlo.signum() {
                    lo = mid;
                    hlo = e.h;
                } else {
                    hi = mid;
                }
            }
            let root = if eval(lo).map_or(f64::INFINITY, |e| e.h.abs()) <= eval(hi).map_or(f64::INFINITY, |e| e.h.abs()) {
                lo
            } else {
                hi
            };
            let Some(e) = eval(root) else { continue };
            if e.h.abs() > 1e-12 * lambda_t.max(1.0) * 1e3 {
                continue;
            }
            let Ok((o, i)) = match_restricted(&e.t_ab, &e.w, th) else { continue };
            let mut steps = StepList::new()
                .component(&d.id)
                .ops(e.cd_ops)
                .component(&c.id)
                .local(&o, true)?
                .component(&b.id)
                .ops(e.ab_ops)
                .component(&a.id)
                .local(&i, true)?;
            if goal_l != lambda_t {
                steps = StepList::new()
                    .ops(vec![SingleModeOp::rot(Mode::Two, FRAC_PI_2)])
                    .extend(steps)
                    .ops(vec![SingleModeOp::rot(Mode::Two, -FRAC_PI_2)]);
            }
            let got = steps.matrix(lib)?;
            if got.max_abs_diff(&squeeze2(lambda_t)) <= 1e-8 * lambda_t.max(1.0) {
                return Ok(steps);
            }
        }
    }
    Err(Error::Infeasible("no common strength balances the two pairs".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::mode2_pure;
    use crate::symplectic::random_restricted_local;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn th() -> Thresholds {
        Thresholds::default()
    }

    fn comp(id: &str, s: StandardSpec) -> Component {
        Component::new(id, s.matrix(), &th()).unwrap()
    }

    fn four(s: [StandardSpec; 4]) -> [Component; 4] {
        [comp("A", s[0]), comp("B", s[1]), comp("C", s[2]), comp("D", s[3])]
    }

    fn inv(p: &SynthPlan) -> crate::classify::Invariants {
        restricted_invariants(&p.achieved, &th()).unwrap()
    }

    #[test]
    fn chi_ab_choice_gives_unbounded_pairs() {
        for chi_t in [-5.0, -1.0, -0.1, 0.1, 0.25, 0.5, 0.75, 0.99, 1.01, 2.0, 5.0] {
            let ab = choose_chi_ab(chi_t);
            let cd = chi_cd_for(chi_t, ab);
            assert!(unbounded_pair(ab, cd), "{chi_t}");
            assert!((chi_abcd(ab, cd) - chi_t).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_solution_inverts_lambda_a() {
        for (ab, cd) in [(0.2, 0.3), (-0.5, -1.2), (-0.5, 2.0)] {
            for la in [1.0, 1.7, 12.0] {
                let s = GammaSolution::solve(ab, cd, la);
                let g = big_gamma_unbounded(ab, cd, chi_abcd(ab, cd), s.gamma);
                assert!((lambda_a_formula(g, s.x) - la).abs() < 1e-9 * la);
            }
        }
        assert_eq!(GammaSolution::solve(0.2, 0.3, 1.0).gamma, 1.0);
    }

    #[test]
    fn paired_lambda_matches_cascade() {
        for (sa, sb) in [(StandardSpec::bs(0.5), StandardSpec::bs(0.9)), (StandardSpec::tms(0.4), StandardSpec::tms(0.4))] {
            for g in [1.5, 3.0, -2.0] {
                let t = sb.matrix() * Local::one(Quad2::squeeze(g)).interface() * sa.matrix();
                let chi = t.t21().det();
                let l = lambda_of(&t, &th()).unwrap();
                assert!((paired_lambda(sa.chi(), sb.chi(), 1.0, 1.0, chi) - l).abs() < 1e-9, "{g}");
            }
        }
    }

    #[test]
    fn module_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Component::new("A", StandardSpec::bs(0.4).matrix() * squeeze2(1.5), &th()).unwrap();
        let b = comp("B", StandardSpec::tms(0.3));
        let p = two_interface_module(&a, &b, Class::Bs, Some(0.7), Side::Pre, &th()).unwrap();
        assert!(p.residual < 1e-9 && mode2_pure(&p.steps));
        assert!((p.achieved.t21().det() - 0.7).abs() < 1e-9);
        let q = two_interface_module(&a, &b, Class::Bs, Some(0.7), Side::Post, &th()).unwrap();
        assert!((inv(&p).lambda.unwrap() - inv(&q).lambda.unwrap()).abs() < 1e-9);
        let dressed = random_restricted_local(&mut rng, 1.0).interface() * StandardSpec::bs(0.6).matrix();
        let c = Component::new("C", dressed, &th()).unwrap();
        let p = two_interface_module(&c, &c, Class::Qndi, None, Side::Pre, &th()).unwrap();
        assert!(p.residual < 1e-9 && mode2_pure(&p.steps));
    }

    #[test]
    fn swap_from_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dressed = |id: &str, s: StandardSpec, rng: &mut ChaCha8Rng| {
            let m = random_restricted_local(rng, 1.0).interface() * s.matrix() * random_restricted_local(rng, 1.0).interface();
            Component::new(id, m, &th()).unwrap()
        };
        let a = dressed("A", StandardSpec::bs(0.3), &mut rng);
        let b = dressed("B", StandardSpec::bs(0.5), &mut rng);
        let c = dressed("C", StandardSpec::bs(1.1), &mut rng);
        let p = swap_restricted(&a, &b, &c, &th()).unwrap();
        assert!(p.residual < 1e-7 && mode2_pure(&p.steps) && p.component_count() == 3, "{}", p.residual);
        let a = Component::new("A", StandardSpec::bs(0.3).matrix() * squeeze2(2.0), &th()).unwrap();
        let c = Component::new("C", squeeze2(1.4) * StandardSpec::tms(0.6).matrix(), &th()).unwrap();
        let q = comp("Q", StandardSpec::qndi(1.2));
        let p = swap_restricted(&a, &q, &c, &th()).unwrap();
        assert!(p.residual < 1e-7 && mode2_pure(&p.steps), "{}", p.residual);
        let x = comp("X", StandardSpec::bs(0.3));
        let y = comp("Y", StandardSpec::bs(FRAC_PI_2 - 0.3));
        let p = swap_restricted(&x, &y, &c, &th()).unwrap();
        assert_eq!(p.component_count(), 2);
        assert!(p.residual < 1e-9);
    }

    #[test]
    fn chi_lambda_examples() {
        let bs = four([StandardSpec::bs(0.3), StandardSpec::bs(0.7), StandardSpec::bs(0.5), StandardSpec::bs(1.0)]);
        for (chi, lambda) in [(0.3, 2.5), (-2.0, 1.0), (0.8, 7.0), (3.0, 1.3)] {
            for shortcut in [false, true] {
                let p = chi_lambda_synth4(&bs, chi, lambda, shortcut, &th()).unwrap();
                assert!(p.residual < 1e-7, "{chi} {lambda} {shortcut} {}", p.residual);
                assert!(mode2_pure(&p.steps));
            }
        }
        let mixed = four([StandardSpec::tms(0.4), StandardSpec::qndi(1.0), StandardSpec::sqndi(0.7), StandardSpec::stms(0.5)]);
        let p = chi_lambda_synth4(&mixed, 0.6, 4.0, false, &th()).unwrap();
        assert!(p.residual < 1e-7, "{}", p.residual);
        assert_eq!(p.component_count(), 4);
    }

    #[test]
    fn sqnd_examples() {
        let comps = four([StandardSpec::bs(0.4), StandardSpec::bs(0.4), StandardSpec::tms(0.5), StandardSpec::tms(0.5)]);
        for l in [3.0, 0.4, -2.0] {
            let p = sqnd_synth4(&comps, l, &th()).unwrap();
            assert!(p.residual < 1e-8, "{l} {}", p.residual);
            assert_eq!(inv(&p).class, Class::Sqndi);
            assert!(mode2_pure(&p.steps));
        }
    }

    #[test]
    fn qnd_examples() {
        let comps = four([StandardSpec::bs(0.4), StandardSpec::tms(0.3), StandardSpec::qndi(1.0), StandardSpec::sqndi(0.6)]);
        for (l, k) in [(2.0, 0.0), (1.5, 1.0), (1.0, 0.0), (3.0, -0.4)] {
            let p = qnd_synth4(&comps, l, k, &th()).unwrap();
            assert!(p.residual < 1e-8, "{l} {k} {}", p.residual);
            let i = inv(&p);
            assert!((i.lambda.unwrap() - l).abs() < 1e-7 && (i.kappa.unwrap() - k).abs() < 1e-7);
            assert!(mode2_pure(&p.steps));
        }
    }

    #[test]
    fn remote_squeezing_schemes() {
        let bs = StandardSpec::bs(std::f64::consts::FRAC_PI_4);
        let five: Vec<Component> = (0..5).map(|k| comp(&format!("C{k}"), bs)).collect();
        let tms: Vec<Component> = (0..4).map(|k| comp(&format!("T{k}"), StandardSpec::tms(0.4))).collect();
        let six: Vec<Component> = (0..6).map(|k| comp(&format!("S{k}"), StandardSpec::bs(0.2 + 0.1 * k as f64))).collect();
        for l in [1.5, 3.0, 10.0] {
            let p = remote_squeeze(&five, l, Scheme::Five, &th()).unwrap();
            assert!(p.residual < 1e-7, "five {l} {}", p.residual);
            let p = remote_squeeze(&tms, l, Scheme::Four, &th()).unwrap();
            assert!(p.residual < 1e-7, "four {l} {}", p.residual);
            let p = remote_squeeze(&six, l, Scheme::Six, &th()).unwrap();
            assert!(p.residual < 1e-7, "six {l} {}", p.residual);
            assert!(mode2_pure(&p.steps));
        }
        let p = remote_squeeze(&five, 1.0, Scheme::Auto, &th()).unwrap();
        assert!(p.steps.is_empty());
    }
}
