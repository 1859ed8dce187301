//! Command-line front end. Exit codes: 0 ok, 1 verification failed,
//! 2 input error, 3 ambiguous classification, 4 infeasible.

use crate::classify::{restricted_invariants, ranks_and_class, to_squeezing_form, to_standard_form, Side, Thresholds};
use crate::error::{Error, Result};
use crate::json;
use crate::plan::{target_residual, Component, Library, SynthPlan};
use crate::symplectic::Class;
use crate::synth_general::{identity_synth3, swap_synth3, two_interface_synth, SPECIAL_PHI};
use crate::synth_restricted::{
    chi_lambda_synth4, qnd_synth4, remote_squeeze, sqnd_synth4, swap_restricted, two_interface_module, Scheme,
};
use crate::verify::{feasibility_two_interface, invariance_fuzz, simulate};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "iface", version, about = "Classify and synthesize two-mode symplectic interfaces")]
pub struct Cli {
    /// Verification tolerance on plan residuals.
    #[arg(long, env = "IFACE_TOL", default_value_t = 1e-7, global = true)]
    pub tol: f64,
    /// Seed for randomized checks.
    #[arg(long, env = "IFACE_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Standard,
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Auto,
    Four,
    Five,
    Six,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Auto => Scheme::Auto,
            SchemeArg::Four => Scheme::Four,
            SchemeArg::Five => Scheme::Five,
            SchemeArg::Six => Scheme::Six,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the invariants of an interface file.
    Classify {
        path: PathBuf,
        /// Include Λ and κ (mode 2 limited to rotations).
        #[arg(long)]
        restricted: bool,
        /// Also print a normal-form certificate.
        #[arg(long, value_enum)]
        form: Option<FormArg>,
    },
    /// Synthesize a cascade plan from a component library.
    Synth {
        library: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        chi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[arg(long)]
        restricted: bool,
        /// Remote-squeezing scheme.
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Component ids in acting order; defaults to library order.
        #[arg(long, value_delimiter = ',')]
        components: Option<Vec<String>>,
        /// Rotation used where any nonzero angle works.
        #[arg(long, default_value_t = SPECIAL_PHI, allow_hyphen_values = true)]
        knob_phi: f64,
        /// Always build both intermediate pairs in the four-component χ/Λ protocol.
        #[arg(long)]
        no_shortcut: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Recompose a plan and check it against its target.
    Verify {
        plan: PathBuf,
        library: PathBuf,
        /// Number of invariance fuzz trials on the achieved interface.
        #[arg(long)]
        fuzz: Option<usize>,
    },
    /// Whether two components can reach Identity or SWAP.
    Feasible {
        library: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_delimiter = ',')]
        components: Option<Vec<String>>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_library(path: &Path) -> Result<Library> {
    json::library_from_str(&read(path)?)
}

fn pick(lib: &Library, ids: &Option<Vec<String>>, th: &Thresholds) -> Result<Vec<Component>> {
    match ids {
        None => lib.component_list(th),
        Some(ids) => ids.iter().map(|id| Component::new(id.clone(), *lib.get(id)?, th)).collect(),
    }
}

fn need<const N: usize>(comps: &[Component], what: &str) -> Result<[Component; N]> {
    comps
        .get(..N)
        .map(|s| std::array::from_fn(|k| s[k].clone()))
        .ok_or_else(|| Error::Infeasible(format!("{what} needs {N} components, library has {}", comps.len())))
}

#[derive(Debug)]
pub struct SynthRequest {
    pub class: Class,
    pub chi: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub restricted: bool,
    pub scheme: Option<Scheme>,
    pub knob_phi: f64,
    pub shortcut: bool,
}

impl SynthRequest {
    fn check(&self) -> Result<()> {
        if self.kappa.is_some() && !(self.restricted && self.class == Class::Qndi) {
            return Err(Error::Input("--kappa applies only to restricted QNDI targets".into()));
        }
        if self.lambda.is_some() && !self.restricted {
            return Err(Error::Input("--lambda requires --restricted".into()));
        }
        if self.lambda.is_some() && self.class == Class::Swap {
            return Err(Error::Input("SWAP has no irreducible squeezing".into()));
        }
        if self.scheme.is_some() && !(self.restricted && self.class == Class::Identity) {
            return Err(Error::Input("--scheme applies only to restricted Identity targets".into()));
        }
        if !self.knob_phi.is_finite() || self.knob_phi == 0.0 {
            return Err(Error::Input("--knob-phi must be finite and nonzero".into()));
        }
        Ok(())
    }
}

/// Dispatch a request to the matching protocol.
pub fn synthesize(comps: &[Component], req: &SynthRequest, th: &Thresholds) -> Result<SynthPlan> {
    req.check()?;
    let c = req.class;
    if !req.restricted {
        return match c {
            Class::Identity | Class::Swap if comps.len() >= 3 => {
                let [a, b, x] = need::<3>(comps, "three-component synthesis")?;
                if c == Class::Identity {
                    identity_synth3(&a, &b, &x, th)
                } else {
                    swap_synth3(&a, &b, &x, th)
                }
            }
            _ => {
                let [a, b] = need::<2>(comps, "two-component synthesis")?;
                two_interface_synth(&a, &b, c, req.chi, req.knob_phi, th)
            }
        };
    }
    let plain = req.lambda.is_none() && req.kappa.is_none();
    match c {
        Class::Identity => {
            crate::synth_general::target_chi(c, req.chi)?;
            remote_squeeze(comps, req.lambda.unwrap_or(1.0), req.scheme.unwrap_or(Scheme::Auto), th)
        }
        Class::Swap if comps.len() >= 3 => {
            let [a, b, x] = need::<3>(comps, "restricted SWAP")?;
            swap_restricted(&a, &b, &x, th)
        }
        _ if plain && comps.len() < 4 => {
            let [a, b] = need::<2>(comps, "restricted two-component synthesis")?;
            two_interface_module(&a, &b, c, req.chi, Side::Pre, th)
        }
        Class::Qndi => {
            crate::synth_general::target_chi(c, req.chi)?;
            qnd_synth4(&need::<4>(comps, "restricted QNDI")?, req.lambda.unwrap_or(1.0), req.kappa.unwrap_or(0.0), th)
        }
        Class::Sqndi => {
            crate::synth_general::target_chi(c, req.chi)?;
            sqnd_synth4(&need::<4>(comps, "restricted sQNDI")?, req.lambda.unwrap_or(1.0), th)
        }
        _ => {
            let chi = crate::synth_general::target_chi(c, req.chi)?;
            chi_lambda_synth4(&need::<4>(comps, "restricted χ/Λ synthesis")?, chi, req.lambda.unwrap_or(1.0), req.shortcut, th)
        }
    }
}

#[derive(Serialize)]
struct ClassifyOut {
    invariants: json::InvariantsWire,
    cert: json::CertWire,
}

#[derive(Serialize)]
struct VerifyOut {
    status: &'static str,
    residual: f64,
    tolerance: f64,
    reported_residual: Option<f64>,
    achieved_drift: Option<f64>,
    components: usize,
    fuzz: Option<crate::verify::FuzzReport>,
}

fn run_command(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let th = Thresholds::default();
    let emit = |out: &mut dyn Write, text: String| -> Result<()> {
        writeln!(out, "{text}").map_err(|e| Error::Input(format!("stdout: {e}")))
    };
    match &cli.command {
        Command::Classify { path, restricted, form } => {
            let t = json::interface_from_str(&read(path)?)?;
            t.validate(crate::symplectic::TAU_SYM)?;
            let inv = if *restricted { restricted_invariants(&t, &th)? } else { ranks_and_class(&t, &th)? };
            let invariants = json::InvariantsWire::from(&inv);
            let text = match form {
                None => json::to_string(&invariants),
                Some(f) => {
                    let cert = match f {
                        FormArg::Standard => to_standard_form(&t, &th)?,
                        FormArg::Pre => to_squeezing_form(&t, Side::Pre, &th)?,
                        FormArg::Post => to_squeezing_form(&t, Side::Post, &th)?,
                    };
                    json::to_string(&ClassifyOut { invariants, cert: json::CertWire::from(&cert) })
                }
            };
            emit(out, text)?;
            Ok(EXIT_OK)
        }
        Command::Synth {
            library,
            target,
            chi,
            lambda,
            kappa,
            restricted,
            scheme,
            components,
            knob_phi,
            no_shortcut,
            output,
        } => {
            let lib = load_library(library)?;
            let comps = pick(&lib, components, &th)?;
            let req = SynthRequest {
                class: json::parse_class(target)?,
                chi: *chi,
                lambda: *lambda,
                kappa: *kappa,
                restricted: *restricted || lib.restricted_mode == Some(2),
                scheme: scheme.map(Scheme::from),
                knob_phi: *knob_phi,
                shortcut: !no_shortcut,
            };
            let plan = synthesize(&comps, &req, &th)?;
            let text = json::plan_to_string(&plan);
            match output {
                Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
                None => emit(out, text)?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify { plan, library, fuzz } => {
            let lib = load_library(library)?;
            let parsed = json::plan_from_str(&read(plan)?)?;
            let sim = simulate(&parsed.steps, &lib)?;
            let residual = target_residual(&sim.result, &parsed.target, &th);
            let report = match fuzz {
                Some(n) => Some(invariance_fuzz(&sim.result, *n, parsed.target.restricted, cli.seed, &th)?),
                None => None,
            };
            let ok = residual <= cli.tol && report.as_ref().is_none_or(|r| r.pass);
            let result = VerifyOut {
                status: if ok { "PASS" } else { "FAIL" },
                residual,
                tolerance: cli.tol,
                reported_residual: parsed.residual,
                achieved_drift: parsed.achieved.map(|a| a.max_abs_diff(&sim.result)),
                components: crate::plan::component_count(&parsed.steps),
                fuzz: report,
            };
            emit(out, json::to_string(&result))?;
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Feasible { library, target, components } => {
            let lib = load_library(library)?;
            let comps = pick(&lib, components, &th)?;
            let [a, b] = need::<2>(&comps, "feasibility check")?;
            let v = feasibility_two_interface(&a, &b, json::parse_class(target)?)?;
            emit(out, json::to_string(&v))?;
            Ok(EXIT_OK)
        }
    }
}

/// Parse arguments, run, and return the exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        let _ = writeln!(err, "error: tolerance must be positive");
        return 2;
    }
    match run_command(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
