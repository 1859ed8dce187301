//! JSON wire formats. Output floats carry 17 significant digits.

use crate::classify::{Invariants, NormalFormCert};
use crate::error::{Error, Result};
use crate::linalg::Quad2;
use crate::plan::{Library, Step, SynthPlan, Target};
use crate::symplectic::{Class, Interface, Mode, OpKind, SingleModeOp, StandardSpec};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::io;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceWire {
    pub matrix: [[f64; 4]; 4],
}

impl From<&Interface> for InterfaceWire {
    fn from(t: &Interface) -> Self {
        InterfaceWire { matrix: t.m }
    }
}

impl From<InterfaceWire> for Interface {
    fn from(w: InterfaceWire) -> Self {
        Interface::from_rows(w.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpWire {
    pub mode: u8,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<Value>,
}

impl From<&SingleModeOp> for OpWire {
    fn from(op: &SingleModeOp) -> Self {
        let param = match op.kind {
            OpKind::Rotation(x) | OpKind::Squeeze(x) | OpKind::Shear(x) => Some(Value::from(x)),
            OpKind::Fourier => None,
            OpKind::General(q) => Some(serde_json::json!(q.0)),
        };
        OpWire { mode: op.mode.index(), kind: op.kind.name().to_string(), param }
    }
}

impl TryFrom<&OpWire> for SingleModeOp {
    type Error = Error;

    fn try_from(w: &OpWire) -> Result<Self> {
        let mode = Mode::from_index(w.mode).ok_or_else(|| Error::Input(format!("mode {} is not 1 or 2", w.mode)))?;
        let number = || {
            w.param
                .as_ref()
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Input(format!("{} needs a numeric param", w.kind)))
        };
        let kind = match w.kind.as_str() {
            "rotation" => OpKind::Rotation(number()?),
            "squeeze" => OpKind::Squeeze(number()?),
            "shear" => OpKind::Shear(number()?),
            "fourier" => OpKind::Fourier,
            "general" => {
                let p = w.param.clone().ok_or_else(|| Error::Input("general needs a 2×2 param".into()))?;
                let q: [[f64; 2]; 2] = serde_json::from_value(p).map_err(|e| Error::Input(e.to_string()))?;
                OpKind::General(Quad2(q))
            }
            k => return Err(Error::Input(format!("unknown op kind `{k}`"))),
        };
        let op = SingleModeOp::new(mode, kind);
        op.validate()?;
        Ok(op)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepWire {
    Component { component: String },
    Ops { ops: Vec<OpWire> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetWire {
    pub class: String,
    pub chi: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub restricted_mode: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 4]; 4]>,
}

impl From<&Target> for TargetWire {
    fn from(t: &Target) -> Self {
        TargetWire {
            class: t.class.label().to_string(),
            chi: t.chi,
            lambda: t.lambda,
            kappa: t.kappa,
            restricted_mode: t.restricted.then_some(2),
            matrix: t.matrix.map(|m| m.m),
        }
    }
}

impl TryFrom<&TargetWire> for Target {
    type Error = Error;

    fn try_from(w: &TargetWire) -> Result<Self> {
        let class = parse_class(&w.class)?;
        let restricted = match w.restricted_mode {
            None => false,
            Some(2) => true,
            Some(m) => return Err(Error::Input(format!("restricted_mode must be 2, got {m}"))),
        };
        let matrix = w.matrix.map(Interface::from_rows);
        if let Some(m) = &matrix {
            m.validate(crate::symplectic::TAU_SYM)?;
        }
        Ok(Target { class, chi: w.chi, lambda: w.lambda, kappa: w.kappa, restricted, matrix })
    }
}

pub fn parse_class(s: &str) -> Result<Class> {
    Class::parse(s).ok_or_else(|| Error::Input(format!("unknown class `{s}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanWire {
    pub steps: Vec<StepWire>,
    pub target: TargetWire,
    #[serde(default)]
    pub residual: Option<f64>,
    #[serde(default)]
    pub conditioning: Option<f64>,
    #[serde(default)]
    pub achieved: Option<InterfaceWire>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

/// Steps and target read back from a plan file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPlan {
    pub steps: Vec<Step>,
    pub target: Target,
    pub residual: Option<f64>,
    pub achieved: Option<Interface>,
}

pub fn steps_to_wire(steps: &[Step]) -> Vec<StepWire> {
    steps
        .iter()
        .map(|s| match s {
            Step::Component(id) => StepWire::Component { component: id.clone() },
            Step::Ops(ops) => StepWire::Ops { ops: ops.iter().map(OpWire::from).collect() },
        })
        .collect()
}

pub fn steps_from_wire(steps: &[StepWire]) -> Result<Vec<Step>> {
    steps
        .iter()
        .map(|s| match s {
            StepWire::Component { component } => Ok(Step::Component(component.clone())),
            StepWire::Ops { ops } => Ok(Step::Ops(ops.iter().map(SingleModeOp::try_from).collect::<Result<_>>()?)),
        })
        .collect()
}

impl From<&SynthPlan> for PlanWire {
    fn from(p: &SynthPlan) -> Self {
        PlanWire {
            steps: steps_to_wire(&p.steps),
            target: TargetWire::from(&p.target),
            residual: Some(p.residual),
            conditioning: Some(p.conditioning),
            achieved: Some(InterfaceWire::from(&p.achieved)),
            warnings: p.warnings.clone(),
            metadata: p.metadata.clone(),
        }
    }
}

pub fn plan_from_str(s: &str) -> Result<ParsedPlan> {
    let w: PlanWire = serde_json::from_str(s).map_err(|e| Error::Input(format!("plan: {e}")))?;
    Ok(ParsedPlan {
        steps: steps_from_wire(&w.steps)?,
        target: Target::try_from(&w.target)?,
        residual: w.residual,
        achieved: w.achieved.map(Interface::from),
    })
}

pub fn plan_to_string(p: &SynthPlan) -> String {
    to_string(&PlanWire::from(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsWire {
    pub class: String,
    pub chi: f64,
    #[serde(rename = "n_R")]
    pub n_r: u8,
    #[serde(rename = "n_T")]
    pub n_t: u8,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
}

impl From<&Invariants> for InvariantsWire {
    fn from(i: &Invariants) -> Self {
        InvariantsWire {
            class: i.class.label().to_string(),
            chi: i.chi,
            n_r: i.n_r,
            n_t: i.n_t,
            lambda: i.lambda,
            kappa: i.kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecWire {
    pub class: String,
    pub param: f64,
}

impl From<&StandardSpec> for SpecWire {
    fn from(s: &StandardSpec) -> Self {
        SpecWire { class: s.class.label().to_string(), param: s.param }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertWire {
    pub form: String,
    pub ops_before: Vec<OpWire>,
    pub ops_after: Vec<OpWire>,
    pub canonical: SpecWire,
    pub lambda: f64,
    pub rotation: f64,
    pub residual: f64,
    pub target: InterfaceWire,
}

impl From<&NormalFormCert> for CertWire {
    fn from(c: &NormalFormCert) -> Self {
        CertWire {
            form: format!("{:?}", c.form).to_lowercase(),
            ops_before: c.ops_before.iter().map(OpWire::from).collect(),
            ops_after: c.ops_after.iter().map(OpWire::from).collect(),
            canonical: SpecWire::from(&c.canonical),
            lambda: c.residual_lambda,
            rotation: c.residual_rot,
            residual: c.residual,
            target: InterfaceWire::from(&c.target),
        }
    }
}

/// Map that rejects duplicate keys instead of keeping the last one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UniqueMap<V>(pub BTreeMap<String, V>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V_<V>(std::marker::PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of component ids")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = m.next_entry::<String, V>()? {
                    if out.insert(k.clone(), v).is_some() {
                        return Err(serde::de::Error::custom(format!("duplicate component id `{k}`")));
                    }
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V_(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibraryWire {
    pub components: UniqueMap<InterfaceWire>,
    #[serde(default)]
    pub restricted_mode: Option<u8>,
}

#[derive(Serialize)]
struct LibraryOut<'a> {
    components: BTreeMap<&'a str, InterfaceWire>,
    restricted_mode: Option<u8>,
}

/// Parse a library file; every matrix must be symplectic.
pub fn library_from_str(s: &str) -> Result<Library> {
    let w: LibraryWire = serde_json::from_str(s).map_err(|e| Error::Input(format!("library: {e}")))?;
    if !matches!(w.restricted_mode, None | Some(2)) {
        return Err(Error::Input("restricted_mode must be null or 2".into()));
    }
    let mut components = BTreeMap::new();
    for (id, m) in w.components.0 {
        let t = Interface::from(m);
        t.validate(crate::symplectic::TAU_SYM)
            .map_err(|e| Error::Input(format!("component `{id}`: {e}")))?;
        components.insert(id, t);
    }
    Ok(Library { components, restricted_mode: w.restricted_mode })
}

pub fn library_to_string(lib: &Library) -> String {
    to_string(&LibraryOut {
        components: lib.components.iter().map(|(k, v)| (k.as_str(), InterfaceWire::from(v))).collect(),
        restricted_mode: lib.restricted_mode,
    })
}

pub fn interface_from_str(s: &str) -> Result<Interface> {
    let w: InterfaceWire = serde_json::from_str(s).map_err(|e| Error::Input(format!("interface: {e}")))?;
    Ok(w.into())
}

pub fn interface_to_string(t: &Interface) -> String {
    to_string(&InterfaceWire::from(t))
}

/// Pretty printer writing every float with 17 significant digits.
pub struct Precise<'a>(PrettyFormatter<'a>);

impl Default for Precise<'_> {
    fn default() -> Self {
        Precise(PrettyFormatter::with_indent(b"  "))
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        w.write_all(format_f64(x).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f32) -> io::Result<()> {
        self.write_f64(w, x as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize with [`Precise`]; non-finite floats become `null`.
pub fn to_string<T: Serialize + ?Sized>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise::default());
    v.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Thresholds;
    use crate::plan::{Component, StepList};
    use crate::symplectic::random_symplectic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interfaces_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let t = random_symplectic(&mut rng);
            assert_eq!(interface_from_str(&interface_to_string(&t)).unwrap(), t);
        }
    }

    #[test]
    fn floats_have_17_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(to_string(&[0.1f64]).replace(char::is_whitespace, ""), "[1.0000000000000001e-1]");
        assert_eq!(to_string(&[f64::INFINITY]).replace(char::is_whitespace, ""), "[null]");
    }

    #[test]
    fn plans_round_trip() {
        let th = Thresholds::default();
        let a = Component::new("A", StandardSpec::bs(0.3).matrix(), &th).unwrap();
        let lib = Library::from_components(&[a]);
        let steps = StepList::new()
            .ops(vec![SingleModeOp::new(Mode::Two, OpKind::Fourier), SingleModeOp::sq(Mode::One, -2.0)])
            .component("A")
            .ops(vec![SingleModeOp::new(Mode::One, OpKind::General(Quad2::shear(0.3)))]);
        let mut target = Target::class_chi(Class::Bs, 0.3f64.sin().powi(2));
        target.restricted = true;
        target.lambda = Some(1.5);
        let plan = SynthPlan::finalize(steps, target, &lib, &th).unwrap().with_meta("gamma", 2.0);
        let text = plan_to_string(&plan);
        assert!(text.contains("\"restricted_mode\": 2"));
        let back = plan_from_str(&text).unwrap();
        assert_eq!(back.steps, plan.steps);
        assert_eq!(back.target, plan.target);
        assert_eq!(back.achieved, Some(plan.achieved));
    }

    #[test]
    fn library_rejects_duplicates_and_bad_matrices() {
        let a = interface_to_string(&StandardSpec::bs(0.3).matrix());
        let ok = format!("{{\"components\":{{\"A\":{a}}},\"restricted_mode\":2}}");
        let lib = library_from_str(&ok).unwrap();
        assert_eq!(lib.restricted_mode, Some(2));
        assert_eq!(library_from_str(&library_to_string(&lib)).unwrap(), lib);
        let dup = format!("{{\"components\":{{\"A\":{a},\"A\":{a}}}}}");
        assert!(library_from_str(&dup).unwrap_err().to_string().contains("duplicate"));
        let bad = ok.replace("restricted_mode\":2", "restricted_mode\":1");
        assert!(library_from_str(&bad).is_err());
        let mut m = StandardSpec::bs(0.3).matrix();
        m.m[0][0] += 1e-3;
        let bad = format!("{{\"components\":{{\"A\":{}}}}}", interface_to_string(&m));
        assert!(matches!(library_from_str(&bad), Err(Error::Input(_))));
    }
}
