//! Cascade plans: component references interleaved with single-mode controls.

use crate::classify::{ranks_and_class, restricted_invariants, Invariants, Thresholds};
use crate::error::{Error, Result};
use crate::symplectic::{ops_matrix, Class, Interface, Local, Mode, SingleModeOp, TAU_SYM};
use serde_json::Value;
use std::collections::BTreeMap;

/// Plans whose largest single squeeze exceeds `e^20` carry a warning.
pub const CONDITIONING_WARN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub matrix: Interface,
    pub invariants: Invariants,
}

impl Component {
    pub fn new(id: impl Into<String>, matrix: Interface, th: &Thresholds) -> Result<Self> {
        matrix.validate(TAU_SYM)?;
        let invariants = ranks_and_class(&matrix, th)?;
        Ok(Component { id: id.into(), matrix, invariants })
    }

    pub fn class(&self) -> Class {
        self.invariants.class
    }

    pub fn chi(&self) -> f64 {
        self.invariants.chi
    }

    pub fn ensure_active(&self) -> Result<()> {
        if self.class().is_nontrivial() {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "component `{}` is of class {} and cannot act as an active component",
                self.id,
                self.class()
            )))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Library {
    pub components: BTreeMap<String, Interface>,
    pub restricted_mode: Option<u8>,
}

impl Library {
    pub fn from_components(components: &[Component]) -> Self {
        Library {
            components: components.iter().map(|c| (c.id.clone(), c.matrix)).collect(),
            restricted_mode: None,
        }
    }

    pub fn get(&self, id: &str) -> Result<&Interface> {
        self.components.get(id).ok_or_else(|| Error::UnknownComponent(id.to_string()))
    }

    /// All components in id order, classified.
    pub fn component_list(&self, th: &Thresholds) -> Result<Vec<Component>> {
        self.components.iter().map(|(id, m)| Component::new(id.clone(), *m, th)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Component(String),
    Ops(Vec<SingleModeOp>),
}

/// What a plan is meant to realize.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub class: Class,
    pub chi: f64,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub restricted: bool,
    /// Exact matrix for targets fixed entrywise (Identity, SWAP, remote squeezing).
    pub matrix: Option<Interface>,
}

impl Target {
    pub fn class_chi(class: Class, chi: f64) -> Self {
        Target { class, chi, lambda: None, kappa: None, restricted: false, matrix: None }
    }

    pub fn exact(class: Class, matrix: Interface, restricted: bool) -> Self {
        let chi = match class {
            Class::Swap | Class::Sqndi => 1.0,
            Class::Identity | Class::Qndi => 0.0,
            _ => matrix.t21().det(),
        };
        Target { class, chi, lambda: None, kappa: None, restricted, matrix: Some(matrix) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPlan {
    pub steps: Vec<Step>,
    pub target: Target,
    pub achieved: Interface,
    pub residual: f64,
    pub conditioning: f64,
    pub warnings: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
}

/// Step list under construction, listed in operator order (last step acts first).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepList(pub Vec<Step>);

impl StepList {
    pub fn new() -> Self {
        StepList(Vec::new())
    }

    pub fn component(mut self, id: &str) -> Self {
        self.0.push(Step::Component(id.to_string()));
        self
    }

    pub fn ops(mut self, ops: Vec<SingleModeOp>) -> Self {
        if !ops.is_empty() {
            self.0.push(Step::Ops(ops));
        }
        self
    }

    pub fn local(self, l: &Local, passive_mode2: bool) -> Result<Self> {
        Ok(self.ops(l.to_ops(passive_mode2)?))
    }

    pub fn extend(mut self, other: StepList) -> Self {
        self.0.extend(other.0);
        self
    }

    /// Wrap with an output-side chain and an input-side chain.
    pub fn wrap(self, after: &Local, before: &Local, passive_mode2: bool) -> Result<Self> {
        StepList::new().local(after, passive_mode2)?.extend(self).local(before, passive_mode2)
    }

    pub fn matrix(&self, lib: &Library) -> Result<Interface> {
        simulate_steps(&self.0, lib)
    }
}

fn step_matrix(step: &Step, lib: &Library) -> Result<Interface> {
    match step {
        Step::Component(id) => lib.get(id).copied(),
        Step::Ops(ops) => {
            for op in ops {
                op.validate()?;
            }
            Ok(ops_matrix(ops))
        }
    }
}

/// Product of all steps in list order.
pub fn simulate_steps(steps: &[Step], lib: &Library) -> Result<Interface> {
    let mut acc = Interface::identity();
    for s in steps {
        acc = acc * step_matrix(s, lib)?;
    }
    Ok(acc)
}

/// Cumulative products in acting order: entry `k` is the effect of the last `k + 1` steps.
pub fn simulate_trace(steps: &[Step], lib: &Library) -> Result<Vec<Interface>> {
    let mut out = Vec::with_capacity(steps.len());
    let mut acc = Interface::identity();
    for s in steps.iter().rev() {
        acc = step_matrix(s, lib)? * acc;
        if acc.scaled_symplectic_residual() > 1e-6 {
            return Err(Error::NotSymplectic(acc.scaled_symplectic_residual()));
        }
        out.push(acc);
    }
    Ok(out)
}

pub fn plan_ops(steps: &[Step]) -> impl Iterator<Item = &SingleModeOp> {
    steps.iter().flat_map(|s| match s {
        Step::Ops(ops) => ops.as_slice(),
        Step::Component(_) => &[],
    })
}

pub fn conditioning(steps: &[Step]) -> f64 {
    plan_ops(steps).map(SingleModeOp::log_gain).fold(0.0, f64::max)
}

/// True when no mode-2 op squeezes, shears or is a general block.
pub fn mode2_pure(steps: &[Step]) -> bool {
    plan_ops(steps).all(|op| op.mode == Mode::One || op.kind.is_passive())
}

pub fn component_count(steps: &[Step]) -> usize {
    steps.iter().filter(|s| matches!(s, Step::Component(_))).count()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Distance between achieved invariants and the target.
pub fn target_residual(achieved: &Interface, target: &Target, th: &Thresholds) -> f64 {
    if let Some(m) = &target.matrix {
        return achieved.max_abs_diff(m);
    }
    let inv = if target.restricted {
        restricted_invariants(achieved, th)
    } else {
        ranks_and_class(achieved, th)
    };
    let Ok(inv) = inv else { return f64::INFINITY };
    if inv.class != target.class {
        return f64::INFINITY;
    }
    let mut r = rel(achieved.t21().det(), target.chi);
    if let (Some(l), Some(lt)) = (inv.lambda, target.lambda) {
        r = r.max(rel(l.abs(), lt.abs()));
    }
    if let (Some(k), Some(kt)) = (inv.kappa, target.kappa) {
        r = r.max(rel(k, kt));
    }
    r
}

impl SynthPlan {
    /// Simulate the steps and fill in achieved matrix, residual and conditioning.
    pub fn finalize(steps: StepList, target: Target, lib: &Library, th: &Thresholds) -> Result<SynthPlan> {
        let achieved = simulate_steps(&steps.0, lib)?;
        let residual = target_residual(&achieved, &target, th);
        let conditioning = conditioning(&steps.0);
        let mut warnings = Vec::new();
        if conditioning > CONDITIONING_WARN {
            warnings.push(format!("conditioning {conditioning:.3} exceeds {CONDITIONING_WARN}"));
        }
        if target.restricted && !mode2_pure(&steps.0) {
            return Err(Error::Inconsistent("restricted plan squeezes mode 2".into()));
        }
        Ok(SynthPlan { steps: steps.0, target, achieved, residual, conditioning, warnings, metadata: BTreeMap::new() })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn component_count(&self) -> usize {
        component_count(&self.steps)
    }

    pub fn step_list(&self) -> StepList {
        StepList(self.steps.clone())
    }
}

pub fn simulate(plan: &SynthPlan, lib: &Library) -> Result<Interface> {
    simulate_steps(&plan.steps, lib)
}
