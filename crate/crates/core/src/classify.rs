//! Invariants and normal forms.
//!
//! Mode 2 is the restricted mode: under restriction it admits rotations only,
//! while mode 1 admits any single-mode symplectic block.

use crate::error::{Error, Result};
use crate::linalg::{angle, norm, sl2_mapping, Quad2};
pub use crate::symplectic::Class;
use crate::symplectic::{Interface, Local, SingleModeOp, StandardSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Relative rank cut, multiplied by `σ_max(T)`.
    pub eps_rank: f64,
    /// Class boundary width for χ = 0 and χ = 1, multiplied by the squared block scale.
    pub eps_chi: f64,
    /// Scaled reconstruction tolerance for certificates.
    pub tau_form: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eps_rank: 1e-8, eps_chi: 1e-10, tau_form: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    pub class: Class,
    pub chi: f64,
    pub n_r: u8,
    pub n_t: u8,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Standard,
    PreSqueezing,
    PostSqueezing,
}

/// `after · T · before` equals `form` within `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormCert {
    pub form: Form,
    pub before: Local,
    pub after: Local,
    pub ops_before: Vec<SingleModeOp>,
    pub ops_after: Vec<SingleModeOp>,
    pub canonical: StandardSpec,
    pub residual_lambda: f64,
    pub residual_rot: f64,
    pub residual: f64,
    pub target: Interface,
}

pub fn transmission_strength(t: &Interface) -> f64 {
    t.t21().det()
}

fn rank(b: &Quad2, cut: f64) -> u8 {
    let s = b.svd();
    u8::from(s.s0 > cut) + u8::from(s.s1.abs() > cut)
}

/// χ, ranks and class label; no restricted invariants.
pub fn ranks_and_class(t: &Interface, th: &Thresholds) -> Result<Invariants> {
    let chi = transmission_strength(t);
    let cut = th.eps_rank * t.sigma_max().max(1.0);
    let (t21, t22) = (t.t21(), t.t22());
    let n_t = rank(&t21, cut);
    let n_r = rank(&t22, cut);
    let near0 = chi.abs() <= th.eps_chi * t21.norm2().powi(2).max(1.0);
    let near1 = (1.0 - chi).abs() <= th.eps_chi * t22.norm2().powi(2).max(1.0);
    let ambiguous = |a: Class, b: Class| Error::Ambiguous { chi, first: a, second: b };
    let class = if near0 {
        match n_t {
            0 => Class::Identity,
            1 => Class::Qndi,
            _ => return Err(ambiguous(Class::Qndi, Class::from_generic_chi(chi))),
        }
    } else if near1 {
        match n_r {
            0 => Class::Swap,
            1 => Class::Sqndi,
            _ => return Err(ambiguous(Class::Sqndi, Class::from_generic_chi(chi))),
        }
    } else if n_t < 2 || n_r < 2 {
        return Err(Error::Inconsistent(format!(
            "χ = {chi} is away from 0 and 1 but ranks are (n_R, n_T) = ({n_r}, {n_t})"
        )));
    } else {
        Class::from_generic_chi(chi)
    };
    let chi = match class {
        Class::Identity | Class::Qndi => 0.0,
        Class::Swap | Class::Sqndi => 1.0,
        _ => chi,
    };
    Ok(Invariants { class, chi, n_r, n_t, lambda: None, kappa: None })
}

/// Column of largest norm.
fn dominant_col(b: &Quad2) -> [f64; 2] {
    let (c0, c1) = (b.col(0), b.col(1));
    if norm(c0) >= norm(c1) {
        c0
    } else {
        c1
    }
}

/// Invariants under mode-1 symplectic and mode-2 rotation controls.
pub fn restricted_invariants(t: &Interface, th: &Thresholds) -> Result<Invariants> {
    let mut inv = ranks_and_class(t, th)?;
    let s = t.t22().svd();
    match inv.class {
        Class::Swap => {}
        Class::Identity => inv.lambda = Some(s.s0.max(1.0)),
        Class::Sqndi => inv.lambda = Some(s.s0),
        Class::Qndi => {
            let lambda = s.s0.max(1.0);
            inv.lambda = Some(lambda);
            inv.kappa = Some(if s.s0 - s.s1.abs() <= 1e-9 * s.s0 {
                0.0
            } else {
                let u = Quad2::rotation(-s.left).apply(dominant_col(&t.t21()));
                if u[0] == 0.0 {
                    f64::INFINITY
                } else {
                    -u[1] / u[0]
                }
            });
        }
        _ => {
            let chi = transmission_strength(t);
            inv.lambda = Some((s.s0 / (1.0 - chi).abs().sqrt()).max(1.0));
        }
    }
    Ok(inv)
}

/// Signed diagonal `(s0, s1)` of the proper SVD of `T²²`; `s0·s1 = 1 − χ`.
pub fn reflection_sigma(t: &Interface) -> (f64, f64) {
    let s = t.t22().svd();
    (s.s0, s.s1)
}

impl Invariants {
    /// Standard spec of the class with the canonical parameter for χ.
    pub fn canonical(&self, eta: f64) -> StandardSpec {
        match self.class {
            Class::Identity => StandardSpec::identity(),
            Class::Swap => StandardSpec::swap(),
            Class::Qndi => StandardSpec::qndi(eta),
            Class::Sqndi => StandardSpec::sqndi(eta),
            _ => StandardSpec::from_chi(self.chi),
        }
    }

    /// Rotation angle of the squeezing form on the given side (QNDI only).
    pub fn form_rotation(&self, side: Side) -> f64 {
        match (self.class, self.kappa) {
            (Class::Qndi, Some(k)) => {
                let l = self.lambda.unwrap_or(1.0);
                match side {
                    Side::Pre => k.atan(),
                    Side::Post => (-k * l * l).atan(),
                }
            }
            _ => 0.0,
        }
    }
}

/// Matrix of a squeezing form: `Ū · R₂(φ) S₂(Λ)` (pre) or `S₂(Λ) R₂(φ) · Ū` (post).
pub fn squeezing_form_matrix(canonical: &StandardSpec, lambda: f64, rot: f64, side: Side) -> Interface {
    let u = canonical.matrix();
    match side {
        Side::Pre => u * Local::two(Quad2::rotation(rot) * Quad2::squeeze(lambda)).interface(),
        Side::Post => Local::two(Quad2::squeeze(lambda) * Quad2::rotation(rot)).interface() * u,
    }
}

/// Mode-1 output block fixing the top rows once the bottom rows agree.
fn top_row_fix(current: &Interface, tgt: &Interface) -> Quad2 {
    let w = Interface::omega();
    let rw = *tgt * w * current.transpose();
    Quad2::new(rw.m[0][1], -rw.m[0][0], rw.m[1][1], -rw.m[1][0])
}

/// Restricted controls `(out, inn)` with `out · T · inn = tgt` when the two
/// interfaces share their restricted invariants. Mode-2 parts are rotations.
pub fn match_restricted(t: &Interface, tgt: &Interface, th: &Thresholds) -> Result<(Local, Local)> {
    let cut_g = th.eps_rank * tgt.sigma_max().max(1.0);
    let (g21, g22) = (tgt.t21(), tgt.t22());
    let st = t.t22().svd();
    let sg = g22.svd();
    let r = Quad2::rotation;
    let (l2o, l2i) = match rank(&g22, cut_g) {
        2 => {
            let mut psi = 0.0;
            let degenerate = sg.s0 - sg.s1.abs() <= 1e-9 * sg.s0;
            if degenerate && rank(&g21, cut_g) == 1 {
                let u = r(-st.left).apply(dominant_col(&t.t21()));
                let ug = r(-sg.left).apply(dominant_col(&g21));
                psi = angle(ug) - angle(u);
            }
            let psi_in = if sg.s1 > 0.0 { -psi } else { psi };
            (r(sg.left) * r(psi) * r(-st.left), r(-st.right) * r(psi_in) * r(sg.right))
        }
        1 => (r(sg.left) * r(-st.left), r(-st.right) * r(sg.right)),
        _ => (Quad2::IDENTITY, Quad2::IDENTITY),
    };
    let t21 = l2o * t.t21();
    let l1i = match rank(&g21, cut_g) {
        2 => {
            let inv = t21
                .inverse()
                .ok_or_else(|| Error::NotEquivalent("transmission block is singular".into()))?;
            inv * g21
        }
        1 => {
            let u = dominant_col(&t21);
            let ug = dominant_col(&g21);
            let (u, ug) = ([u[0] / norm(u), u[1] / norm(u)], [ug[0] / norm(ug), ug[1] / norm(ug)]);
            let sign = if u[0] * ug[0] + u[1] * ug[1] < 0.0 { -1.0 } else { 1.0 };
            let w = t21.transpose().apply(u);
            let wg = g21.transpose().apply(ug);
            if norm(w) == 0.0 {
                return Err(Error::NotEquivalent("transmission block vanished".into()));
            }
            sl2_mapping([sign * w[0], sign * w[1]], wg).transpose()
        }
        _ => Quad2::IDENTITY,
    };
    let inn = Local::new(l1i, l2i);
    let partial = Local::two(l2o).interface() * *t * inn.interface();
    let l1o = top_row_fix(&partial, tgt);
    Ok((Local::new(l1o, l2o), inn))
}

/// `‖a − b‖_max / max(1, σ_max(b)²)`.
pub fn scaled_diff(a: &Interface, b: &Interface) -> f64 {
    let s = b.sigma_max().max(1.0);
    a.max_abs_diff(b) / (s * s)
}

fn certify(
    t: &Interface,
    target: Interface,
    form: Form,
    canonical: StandardSpec,
    lambda: f64,
    rot: f64,
    th: &Thresholds,
) -> Result<NormalFormCert> {
    let (after, before) = match_restricted(t, &target, th)?;
    let got = after.interface() * *t * before.interface();
    let residual = got.max_abs_diff(&target);
    let scale = (after.interface().sigma_max() * t.sigma_max() * before.interface().sigma_max()).max(1.0);
    if residual > th.tau_form * scale {
        return Err(Error::Inconsistent(format!(
            "normal form reconstruction residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(NormalFormCert {
        form,
        ops_before: before.to_ops(true)?,
        ops_after: after.to_ops(true)?,
        before,
        after,
        canonical,
        residual_lambda: lambda,
        residual_rot: rot,
        residual,
        target,
    })
}

/// Pre- or post-squeezing form; `eta` overrides the QND strength of the
/// canonical part (defaults to the nonzero singular value of `T²¹`).
pub fn squeezing_form_with(t: &Interface, side: Side, eta: Option<f64>, th: &Thresholds) -> Result<NormalFormCert> {
    let inv = restricted_invariants(t, th)?;
    let eta = match inv.class {
        Class::Qndi => eta.unwrap_or_else(|| t.t21().svd().s0),
        Class::Sqndi => eta.unwrap_or(1.0),
        _ => 0.0,
    };
    let canonical = inv.canonical(eta);
    let lambda = inv.lambda.unwrap_or(1.0);
    let rot = inv.form_rotation(side);
    let target = match inv.class {
        Class::Identity => Local::two(Quad2::squeeze(lambda)).interface(),
        Class::Swap => Interface::swap(),
        _ => squeezing_form_matrix(&canonical, lambda, rot, side),
    };
    let form = match side {
        Side::Pre => Form::PreSqueezing,
        Side::Post => Form::PostSqueezing,
    };
    certify(t, target, form, canonical, lambda, rot, th)
}

pub fn to_squeezing_form(t: &Interface, side: Side, th: &Thresholds) -> Result<NormalFormCert> {
    squeezing_form_with(t, side, None, th)
}

/// Standard form under unrestricted control: the pre-squeezing form with the
/// irreducible mode-2 part undone on the input side.
pub fn to_standard_form(t: &Interface, th: &Thresholds) -> Result<NormalFormCert> {
    let pre = to_squeezing_form(t, Side::Pre, th)?;
    let undo = Local::two(Quad2::squeeze(1.0 / pre.residual_lambda) * Quad2::rotation(-pre.residual_rot));
    let before = pre.before * undo;
    let target = pre.canonical.matrix();
    let got = pre.after.interface() * *t * before.interface();
    Ok(NormalFormCert {
        form: Form::Standard,
        ops_before: before.to_ops(false)?,
        ops_after: pre.ops_after.clone(),
        before,
        after: pre.after,
        canonical: pre.canonical,
        residual_lambda: pre.residual_lambda,
        residual_rot: pre.residual_rot,
        residual: got.max_abs_diff(&target),
        target,
    })
}

/// Unrestricted controls `(out, inn)` with `out · T · inn = tgt`.
pub fn match_general(t: &Interface, tgt: &Interface, th: &Thresholds) -> Result<(Local, Local)> {
    let ct = to_standard_form(t, th)?;
    let cg = to_standard_form(tgt, th)?;
    if ct.canonical.class != cg.canonical.class {
        return Err(Error::NotEquivalent(format!("{} vs {}", ct.canonical.class, cg.canonical.class)));
    }
    let (kout, kin) = match ct.canonical.class {
        Class::Qndi => {
            let g = cg.canonical.param / ct.canonical.param;
            (Local::one(Quad2::squeeze(1.0 / g)), Local::one(Quad2::squeeze(g)))
        }
        _ => (Local::identity(), Local::identity()),
    };
    Ok((cg.after.inverse() * kout * ct.after, ct.before * kin * cg.before.inverse()))
}
