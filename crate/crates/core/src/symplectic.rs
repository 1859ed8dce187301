//! Interfaces, single-mode operations and the seven standard forms.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues4, Quad2};
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Mul;

/// Squeeze magnitudes below this are rejected.
pub const GAMMA_MIN: f64 = 1e-12;
/// Default symplectic tolerance (scaled by `max(1, σ_max²)`).
pub const TAU_SYM: f64 = 1e-9;

/// A two-mode linear interface in quadrature order `(q1, p1, q2, p2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub m: [[f64; 4]; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::One => 1,
            Mode::Two => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Mode> {
        match i {
            1 => Some(Mode::One),
            2 => Some(Mode::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Rotation(f64),
    Squeeze(f64),
    Fourier,
    Shear(f64),
    General(Quad2),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeOp {
    pub mode: Mode,
    pub kind: OpKind,
}

/// Class labels of the standard forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Identity,
    Qndi,
    Tms,
    Bs,
    Stms,
    Sqndi,
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardSpec {
    pub class: Class,
    /// θ for BS, r for TMS/sTMS, η for QNDI/sQNDI; ignored otherwise.
    pub param: f64,
}

/// A pair of single-mode blocks acting on modes 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Local {
    pub m1: Quad2,
    pub m2: Quad2,
}

impl Interface {
    pub const fn from_rows(m: [[f64; 4]; 4]) -> Self {
        Interface { m }
    }

    pub fn identity() -> Self {
        Interface::local(Quad2::IDENTITY, Quad2::IDENTITY)
    }

    pub fn swap() -> Self {
        Interface::from_blocks(Quad2::ZERO, Quad2::IDENTITY, Quad2::IDENTITY, Quad2::ZERO)
    }

    /// The symplectic form `Ω = J ⊕ J`.
    pub fn omega() -> Self {
        Interface::local(Quad2::J, Quad2::J)
    }

    pub fn local(m1: Quad2, m2: Quad2) -> Self {
        Interface::from_blocks(m1, Quad2::ZERO, Quad2::ZERO, m2)
    }

    pub fn from_blocks(t11: Quad2, t12: Quad2, t21: Quad2, t22: Quad2) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (bi, bj, b) in [(0, 0, t11), (0, 1, t12), (1, 0, t21), (1, 1, t22)] {
            for i in 0..2 {
                for j in 0..2 {
                    m[2 * bi + i][2 * bj + j] = b.0[i][j];
                }
            }
        }
        Interface { m }
    }

    /// Block `T^{ij}` with `i, j ∈ {1, 2}`.
    pub fn block(&self, i: usize, j: usize) -> Quad2 {
        let (r, c) = (2 * (i - 1), 2 * (j - 1));
        Quad2::new(self.m[r][c], self.m[r][c + 1], self.m[r + 1][c], self.m[r + 1][c + 1])
    }

    pub fn t11(&self) -> Quad2 {
        self.block(1, 1)
    }
    pub fn t12(&self) -> Quad2 {
        self.block(1, 2)
    }
    pub fn t21(&self) -> Quad2 {
        self.block(2, 1)
    }
    pub fn t22(&self) -> Quad2 {
        self.block(2, 2)
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[j][i];
            }
        }
        Interface { m }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |a, &x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Interface) -> f64 {
        let mut d = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - o.m[i][j]).abs());
            }
        }
        d
    }

    /// Largest singular value.
    pub fn sigma_max(&self) -> f64 {
        let g = (self.transpose() * *self).m;
        sym_eigenvalues4(g).iter().fold(0.0f64, |a, &x| a.max(x)).max(0.0).sqrt()
    }

    /// `‖TΩTᵀ − Ω‖_max`.
    pub fn check_symplectic(&self) -> f64 {
        let w = Interface::omega();
        (*self * w * self.transpose()).max_abs_diff(&w)
    }

    /// Symplectic residual divided by `max(1, σ_max²)`.
    pub fn scaled_symplectic_residual(&self) -> f64 {
        let s = self.sigma_max();
        self.check_symplectic() / (s * s).max(1.0)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let r = self.scaled_symplectic_residual();
        if r > tol {
            return Err(Error::NotSymplectic(r));
        }
        Ok(())
    }

    /// Symplectic inverse `Ω Tᵀ Ω⁻¹`, computed blockwise from adjugates.
    pub fn inverse_unchecked(&self) -> Self {
        Interface::from_blocks(
            self.t11().adjugate(),
            self.t21().adjugate(),
            self.t12().adjugate(),
            self.t22().adjugate(),
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        self.validate(TAU_SYM)?;
        Ok(self.inverse_unchecked())
    }

    /// Conjugation by the SWAP, which exchanges the roles of the two modes.
    pub fn mode_swapped(&self) -> Self {
        Interface::from_blocks(self.t22(), self.t21(), self.t12(), self.t11())
    }
}

impl Mul for Interface {
    type Output = Interface;
    fn mul(self, o: Interface) -> Interface {
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..4).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Interface { m: r }
    }
}

/// Right-to-left product of the chain; the last element acts first.
pub fn compose(chain: &[Interface]) -> Interface {
    chain.iter().fold(Interface::identity(), |acc, t| acc * *t)
}

impl OpKind {
    pub fn block(&self) -> Quad2 {
        match *self {
            OpKind::Rotation(phi) => Quad2::rotation(phi),
            OpKind::Squeeze(g) => Quad2::squeeze(g),
            OpKind::Fourier => Quad2::fourier(),
            OpKind::Shear(k) => Quad2::shear(k),
            OpKind::General(q) => q,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::Rotation(_) => "rotation",
            OpKind::Squeeze(_) => "squeeze",
            OpKind::Fourier => "fourier",
            OpKind::Shear(_) => "shear",
            OpKind::General(_) => "general",
        }
    }

    /// True for kinds that never squeeze: rotations and the Fourier gate.
    pub fn is_passive(&self) -> bool {
        matches!(self, OpKind::Rotation(_) | OpKind::Fourier)
    }
}

impl SingleModeOp {
    pub fn new(mode: Mode, kind: OpKind) -> Self {
        SingleModeOp { mode, kind }
    }

    pub fn rot(mode: Mode, phi: f64) -> Self {
        SingleModeOp::new(mode, OpKind::Rotation(phi))
    }

    pub fn sq(mode: Mode, gamma: f64) -> Self {
        SingleModeOp::new(mode, OpKind::Squeeze(gamma))
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            OpKind::Squeeze(g) if !g.is_finite() => Err(Error::InvalidParameter(format!("squeeze {g}"))),
            OpKind::Squeeze(g) if g.abs() < GAMMA_MIN => Err(Error::DegenerateSqueeze(g)),
            OpKind::Rotation(x) | OpKind::Shear(x) if !x.is_finite() => {
                Err(Error::InvalidParameter(format!("non-finite parameter {x}")))
            }
            OpKind::General(q) => {
                if !q.is_finite() {
                    return Err(Error::InvalidParameter("non-finite general block".into()));
                }
                let d = (q.det() - 1.0).abs() / q.norm2().powi(2).max(1.0);
                if d > TAU_SYM {
                    return Err(Error::NotSymplectic(d));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn embed(&self) -> Interface {
        let b = self.kind.block();
        match self.mode {
            Mode::One => Interface::local(b, Quad2::IDENTITY),
            Mode::Two => Interface::local(Quad2::IDENTITY, b),
        }
    }

    pub fn embed_checked(&self) -> Result<Interface> {
        self.validate()?;
        Ok(self.embed())
    }

    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            OpKind::Rotation(phi) => OpKind::Rotation(-phi),
            OpKind::Squeeze(g) => OpKind::Squeeze(1.0 / g),
            OpKind::Fourier => OpKind::Rotation(-FRAC_PI_2),
            OpKind::Shear(k) => OpKind::Shear(-k),
            OpKind::General(q) => OpKind::General(q.adjugate()),
        };
        SingleModeOp { mode: self.mode, kind }
    }

    /// `ln σ_max` of the op's block; `|ln|γ||` for a squeeze.
    pub fn log_gain(&self) -> f64 {
        match self.kind {
            OpKind::Rotation(_) | OpKind::Fourier => 0.0,
            OpKind::Squeeze(g) => g.abs().ln().abs(),
            _ => self.kind.block().norm2().ln().max(0.0),
        }
    }
}

/// Product of a chain of ops, in list order (the last op acts first).
pub fn ops_matrix(ops: &[SingleModeOp]) -> Interface {
    ops_local(ops).interface()
}

pub fn ops_local(ops: &[SingleModeOp]) -> Local {
    ops.iter().fold(Local::identity(), |acc, op| acc * Local::from_op(op))
}

/// Inverse chain: reversed order, each op inverted.
pub fn invert_ops(ops: &[SingleModeOp]) -> Vec<SingleModeOp> {
    ops.iter().rev().map(SingleModeOp::inverse).collect()
}

impl Local {
    pub fn new(m1: Quad2, m2: Quad2) -> Self {
        Local { m1, m2 }
    }

    pub fn identity() -> Self {
        Local::new(Quad2::IDENTITY, Quad2::IDENTITY)
    }

    pub fn one(m1: Quad2) -> Self {
        Local::new(m1, Quad2::IDENTITY)
    }

    pub fn two(m2: Quad2) -> Self {
        Local::new(Quad2::IDENTITY, m2)
    }

    pub fn from_op(op: &SingleModeOp) -> Self {
        match op.mode {
            Mode::One => Local::one(op.kind.block()),
            Mode::Two => Local::two(op.kind.block()),
        }
    }

    pub fn interface(&self) -> Interface {
        Interface::local(self.m1, self.m2)
    }

    pub fn inverse(&self) -> Self {
        Local::new(self.m1.adjugate(), self.m2.adjugate())
    }

    /// Decompose into rotation and squeeze ops. Mode 2 becomes a single rotation
    /// when `passive_mode2` is set; this requires its block to be orthogonal.
    pub fn to_ops(&self, passive_mode2: bool) -> Result<Vec<SingleModeOp>> {
        let mut ops = Vec::new();
        push_block_ops(&mut ops, Mode::One, self.m1);
        if passive_mode2 {
            let defect = self.m2.rotation_defect();
            if defect > 1e-9 {
                return Err(Error::Inconsistent(format!("mode-2 control is not a rotation (defect {defect:e})")));
            }
            let phi = self.m2.rotation_angle();
            if phi != 0.0 {
                ops.push(SingleModeOp::rot(Mode::Two, phi));
            }
        } else {
            push_block_ops(&mut ops, Mode::Two, self.m2);
        }
        Ok(ops)
    }
}

impl Mul for Local {
    type Output = Local;
    fn mul(self, o: Local) -> Local {
        Local::new(self.m1 * o.m1, self.m2 * o.m2)
    }
}

fn push_block_ops(ops: &mut Vec<SingleModeOp>, mode: Mode, b: Quad2) {
    let s = b.svd();
    let gamma = s.s0;
    // Squeezes within rounding of 1 are dropped and the rotations merged.
    if (gamma - 1.0).abs() <= 4.0 * f64::EPSILON && b.rotation_defect() <= 8.0 * f64::EPSILON {
        let phi = b.rotation_angle();
        if phi != 0.0 {
            ops.push(SingleModeOp::rot(mode, phi));
        }
        return;
    }
    if s.left != 0.0 {
        ops.push(SingleModeOp::rot(mode, s.left));
    }
    if gamma != 1.0 {
        ops.push(SingleModeOp::sq(mode, gamma));
    }
    if s.right != 0.0 {
        ops.push(SingleModeOp::rot(mode, s.right));
    }
}

impl Class {
    pub const ALL: [Class; 7] = [
        Class::Identity,
        Class::Qndi,
        Class::Tms,
        Class::Bs,
        Class::Stms,
        Class::Sqndi,
        Class::Swap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Class::Identity => "Identity",
            Class::Qndi => "QNDI",
            Class::Tms => "TMS",
            Class::Bs => "BS",
            Class::Stms => "sTMS",
            Class::Sqndi => "sQNDI",
            Class::Swap => "SWAP",
        }
    }

    pub fn parse(s: &str) -> Option<Class> {
        let lower = s.to_ascii_lowercase();
        Class::ALL.into_iter().find(|c| c.label().to_ascii_lowercase() == lower)
    }

    /// Class of `Ū^S · T` given the class of `T`.
    pub fn complement(self) -> Class {
        match self {
            Class::Identity => Class::Swap,
            Class::Swap => Class::Identity,
            Class::Qndi => Class::Sqndi,
            Class::Sqndi => Class::Qndi,
            Class::Tms => Class::Stms,
            Class::Stms => Class::Tms,
            Class::Bs => Class::Bs,
        }
    }

    /// Classes usable as active cascade components.
    pub fn is_nontrivial(self) -> bool {
        !matches!(self, Class::Identity | Class::Swap)
    }

    pub fn has_param(self) -> bool {
        self.is_nontrivial()
    }

    /// Class determined by χ alone, away from the boundaries 0 and 1.
    pub fn from_generic_chi(chi: f64) -> Class {
        if chi < 0.0 {
            Class::Tms
        } else if chi < 1.0 {
            Class::Bs
        } else {
            Class::Stms
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl StandardSpec {
    pub fn new(class: Class, param: f64) -> Self {
        StandardSpec { class, param }
    }

    pub fn identity() -> Self {
        StandardSpec::new(Class::Identity, 0.0)
    }

    pub fn swap() -> Self {
        StandardSpec::new(Class::Swap, 0.0)
    }

    pub fn bs(theta: f64) -> Self {
        StandardSpec::new(Class::Bs, theta)
    }

    pub fn tms(r: f64) -> Self {
        StandardSpec::new(Class::Tms, r)
    }

    pub fn stms(r: f64) -> Self {
        StandardSpec::new(Class::Stms, r)
    }

    pub fn qndi(eta: f64) -> Self {
        StandardSpec::new(Class::Qndi, eta)
    }

    pub fn sqndi(eta: f64) -> Self {
        StandardSpec::new(Class::Sqndi, eta)
    }

    /// Canonical spec with transmission strength `chi` for the classes fixed by χ.
    pub fn from_chi(chi: f64) -> Self {
        match Class::from_generic_chi(chi) {
            Class::Tms => StandardSpec::tms((-chi).sqrt().asinh()),
            Class::Bs => StandardSpec::bs(chi.sqrt().asin()),
            _ => StandardSpec::stms(chi.sqrt().acosh()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.param;
        match self.class {
            Class::Identity | Class::Swap => Ok(()),
            _ if !p.is_finite() => Err(Error::InvalidParameter(format!("{} parameter {p}", self.class))),
            Class::Bs if p.abs() >= FRAC_PI_2 => {
                Err(Error::InvalidParameter(format!("BS angle θ = {p} outside (−π/2, π/2)")))
            }
            Class::Qndi | Class::Sqndi if p == 0.0 => {
                Err(Error::InvalidParameter(format!("{} strength η must be nonzero", self.class)))
            }
            _ => Ok(()),
        }
    }

    /// Transmission strength of the standard form.
    pub fn chi(&self) -> f64 {
        let p = self.param;
        match self.class {
            Class::Identity | Class::Qndi => 0.0,
            Class::Swap | Class::Sqndi => 1.0,
            Class::Bs => p.sin().powi(2),
            Class::Tms => -p.sinh().powi(2),
            Class::Stms => p.cosh().powi(2),
        }
    }

    pub fn matrix(&self) -> Interface {
        let p = self.param;
        let i = Quad2::IDENTITY;
        match self.class {
            Class::Identity => Interface::identity(),
            Class::Swap => Interface::swap(),
            Class::Bs => {
                let (s, c) = p.sin_cos();
                Interface::from_blocks(Quad2::scalar(c), Quad2::scalar(-s), Quad2::scalar(s), Quad2::scalar(c))
            }
            Class::Tms => {
                let (ch, sh) = (p.cosh(), p.sinh());
                Interface::from_blocks(Quad2::scalar(ch), Quad2::diag(sh, -sh), Quad2::diag(sh, -sh), Quad2::scalar(ch))
            }
            Class::Stms => {
                let (ch, sh) = (p.cosh(), p.sinh());
                Interface::from_blocks(Quad2::diag(sh, -sh), Quad2::scalar(ch), Quad2::scalar(ch), Quad2::diag(sh, -sh))
            }
            Class::Qndi => Interface::from_blocks(i, Quad2::diag(0.0, -p), Quad2::diag(p, 0.0), i),
            Class::Sqndi => Interface::from_blocks(Quad2::diag(0.0, -p), i, i, Quad2::diag(p, 0.0)),
        }
    }
}

/// Exact standard-form matrix after validating the parameter range.
pub fn standard_interface(spec: &StandardSpec) -> Result<Interface> {
    spec.validate()?;
    Ok(spec.matrix())
}

/// Ops `(before, after)` with `after · Ū · before = Ū⁻¹`.
pub fn inverse_via_locals(spec: &StandardSpec) -> (Vec<SingleModeOp>, Vec<SingleModeOp>) {
    match spec.class {
        Class::Identity | Class::Swap => (vec![], vec![]),
        Class::Bs | Class::Tms | Class::Qndi => {
            (vec![SingleModeOp::rot(Mode::One, PI)], vec![SingleModeOp::rot(Mode::One, PI)])
        }
        Class::Stms => (vec![SingleModeOp::rot(Mode::Two, PI)], vec![SingleModeOp::rot(Mode::One, PI)]),
        Class::Sqndi => (
            vec![SingleModeOp::rot(Mode::One, -FRAC_PI_2), SingleModeOp::rot(Mode::Two, -FRAC_PI_2)],
            vec![SingleModeOp::new(Mode::One, OpKind::Fourier), SingleModeOp::new(Mode::Two, OpKind::Fourier)],
        ),
    }
}

/// Random `R(φ) S(γ) R(φ')` block with `ln|γ|` uniform on `[-max_ln, max_ln]`.
pub fn random_block<R: Rng + ?Sized>(rng: &mut R, max_ln: f64) -> Quad2 {
    let a = rng.gen_range(0.0..2.0 * PI);
    let b = rng.gen_range(0.0..2.0 * PI);
    let g = if max_ln > 0.0 { rng.gen_range(-max_ln..max_ln).exp() } else { 1.0 };
    Quad2::rotation(a) * Quad2::squeeze(g) * Quad2::rotation(b)
}

pub fn random_local<R: Rng + ?Sized>(rng: &mut R, max_ln: f64) -> Local {
    Local::new(random_block(rng, max_ln), random_block(rng, max_ln))
}

/// Mode-1 arbitrary, mode-2 rotation only.
pub fn random_restricted_local<R: Rng + ?Sized>(rng: &mut R, max_ln: f64) -> Local {
    Local::new(random_block(rng, max_ln), Quad2::rotation(rng.gen_range(0.0..2.0 * PI)))
}

/// Random standard spec of the given class with a moderate parameter.
pub fn random_spec_of<R: Rng + ?Sized>(rng: &mut R, class: Class) -> StandardSpec {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let param = match class {
        Class::Identity | Class::Swap => 0.0,
        Class::Bs => sign * rng.gen_range(0.1..1.45),
        Class::Tms | Class::Stms => sign * rng.gen_range(0.1..1.5),
        Class::Qndi | Class::Sqndi => sign * rng.gen_range(0.2..3.0),
    };
    StandardSpec::new(class, param)
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R) -> StandardSpec {
    let class = Class::ALL[rng.gen_range(0..7)];
    random_spec_of(rng, class)
}

/// Random symplectic matrix: random local dressings around a random standard gate.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R) -> Interface {
    let spec = random_spec(rng);
    dress(rng, &spec.matrix(), 3.0)
}

pub fn dress<R: Rng + ?Sized>(rng: &mut R, t: &Interface, max_ln: f64) -> Interface {
    let lo = random_local(rng, max_ln);
    let li = random_local(rng, max_ln);
    lo.interface() * *t * li.interface()
}
