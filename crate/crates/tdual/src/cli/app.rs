//! `tdual-calc` subcommands.
//!
//! Exit status: 0 on success or a passing verdict, 1 on a failing verdict,
//! 2 on usage and input errors.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::blowup::{blowdown_chart, fiberwise_iso_check, induced_divisor, pullback_blowdown};
use crate::chart::{Chart, ConnectionForm, Divisor, TorusAction};
use crate::cli::json::{fn_to_json, form_to_json, residue_to_json};
use crate::cli::parse::{parse_chart, parse_form};
use crate::cli::print::{print_fn, print_form};
use crate::cli::registry::{self, compare, Mode};
use crate::error::CalcError;
use crate::forms::Form;
use crate::genstruct::{check_spinor, descends, stable_check, Spinor};
use crate::report::Report;
use crate::residues::{residue, ResidueKind, ResidueValue};
use crate::tduality::{
    build_f_from_connections, check_f, make_correspondence, tau, tau_reverse, CorrChart, DualityData,
};

#[derive(Parser, Debug)]
#[command(name = "tdual-calc", version, about = "Exact calculus of elliptic and log forms with T-duality")]
struct Cli {
    /// Chart: c1, c2, c3, c1x2, r2, s2, cl1, cl2 or kind(l,f,m).
    #[arg(long, global = true, default_value = "c2")]
    chart: String,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exterior derivative.
    D {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Wedge product.
    Wedge {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Residue along a stratum of the divisor.
    Residue {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// q, r, r2, rr, rtheta, thetar, thetatheta, log, log2.
        #[arg(long)]
        kind: String,
        /// One-based radial indices, comma separated.
        #[arg(long)]
        at: String,
    },
    /// Closedness, nondegeneracy and residue conditions of a stable form.
    CheckStable {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Pointwise purity and Mukai nondegeneracy at random samples.
    CheckSpinor {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Monomial rescaling that extends the spinor line over the divisor.
    Descends {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
    },
    /// Invariance, dF = p*H - phat*Hhat and fibre nondegeneracy of F.
    #[command(name = "check-F")]
    CheckF {
        /// Two-form on the correspondence chart.
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        hhat: Option<String>,
    },
    /// T-duality transform of a spinor.
    Tau {
        /// Two-form on the correspondence chart.
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        /// Spinor on the source chart.
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// Closed three-form on the left; zero when omitted.
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        /// Closed three-form on the right; zero when omitted.
        #[arg(long, allow_hyphen_values = true)]
        hhat: Option<String>,
        /// Transform from the right side back to the left.
        #[arg(long)]
        reverse: bool,
        /// Expected result; compared up to a coordinate-free factor.
        #[arg(long, allow_hyphen_values = true)]
        expect: Option<String>,
        /// Compare exactly instead of as spinor lines.
        #[arg(long)]
        exact: bool,
    },
    /// F = -sum p*Theta_i ^ phat*Thetahat_i for the standard actions.
    #[command(name = "build-F")]
    BuildF {
        /// Components separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        thetahat: String,
    },
    /// Pullback along a chart of the blow-up of C^l x R^m at the origin.
    Blowup {
        #[arg(long)]
        l: usize,
        /// One-based blow-up chart.
        #[arg(long)]
        at: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Form on elliptic(l,0,m); defaults to the volume frame.
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
    },
    /// Runs a catalogue example, or all of them.
    VerifyExample { name: String },
    /// Lists the catalogue.
    ListExamples,
}

enum Failure {
    Usage(String),
    Verdict,
}

impl From<CalcError> for Failure {
    fn from(e: CalcError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out<'a> = &'a mut dyn Write;

fn parse(src: &str, chart: &Chart) -> Result<Form, Failure> {
    parse_form(src, chart).map_err(|e| Failure::Usage(format!("in '{src}': {e}")))
}

fn optional(src: &Option<String>, chart: &Chart) -> Result<Form, Failure> {
    match src {
        Some(s) => parse(s, chart),
        None => Ok(Form::zero(*chart)),
    }
}

fn emit_json<T: Serialize>(out: Out, v: &T) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn emit_form(out: Out, json: bool, a: &Form) {
    if json {
        emit_json(out, &form_to_json(a));
    } else {
        let _ = writeln!(out, "{}", print_form(a));
    }
}

fn emit_report(out: Out, json: bool, r: &Report) -> Result<(), Failure> {
    if json {
        #[derive(Serialize)]
        struct Wrapped<'a> {
            passed: bool,
            #[serde(flatten)]
            report: &'a Report,
        }
        emit_json(out, &Wrapped { passed: r.passed(), report: r });
    } else {
        let _ = write!(out, "{}", r.to_text());
    }
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn duality(chart: &Chart, f: &str, h: &Option<String>, hhat: &Option<String>) -> Result<DualityData, Failure> {
    let corr: CorrChart = make_correspondence(chart, chart)?;
    let f = parse(f, &corr.chart)?;
    let h = optional(h, &corr.left)?;
    let hh = optional(hhat, &corr.right)?;
    let la = TorusAction::standard(&corr.left);
    let ra = TorusAction::standard(&corr.right);
    Ok(DualityData::new(corr, f, h, hh, la, ra)?)
}

fn indices(at: &str) -> Result<Vec<usize>, Failure> {
    at.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(Failure::Usage(format!("--at expects one-based indices, got '{at}'"))),
        })
        .collect()
}

fn dispatch(cli: &Cli, out: Out) -> Result<(), Failure> {
    let chart = parse_chart(&cli.chart)?;
    let json = cli.json;
    match &cli.cmd {
        Cmd::D { expr } => emit_form(out, json, &parse(expr, &chart)?.d()),
        Cmd::Wedge { a, b } => emit_form(out, json, &parse(a, &chart)?.wedge(&parse(b, &chart)?)),
        Cmd::Residue { expr, kind, at } => {
            let kind: ResidueKind = kind.parse()?;
            let r = residue(&parse(expr, &chart)?, kind, &indices(at)?)?;
            if json {
                emit_json(out, &residue_to_json(&r));
            } else {
                let text = match &r.value {
                    ResidueValue::Form(a) => print_form(a),
                    ResidueValue::Scalar(f) => print_fn(f),
                };
                let _ = writeln!(out, "{text}");
            }
        }
        Cmd::CheckStable { expr } => emit_report(out, json, &stable_check(&parse(expr, &chart)?)?)?,
        Cmd::CheckSpinor { expr, h, samples } => {
            let sp = Spinor::new(parse(expr, &chart)?, optional(h, &chart)?)?;
            emit_report(out, json, &check_spinor(&sp, cli.seed, *samples)?.0)?;
        }
        Cmd::Descends { expr, h } => {
            let sp = Spinor::new(parse(expr, &chart)?, optional(h, &chart)?)?;
            let d = descends(&sp, cli.seed)?;
            if json {
                #[derive(Serialize)]
                struct D {
                    descends: bool,
                    witness: Option<crate::cli::json::FnJson>,
                    witness_text: Option<String>,
                    searched: usize,
                }
                emit_json(
                    out,
                    &D {
                        descends: d.witness.is_some(),
                        witness: d.witness.as_ref().map(fn_to_json),
                        witness_text: d.witness.as_ref().map(print_fn),
                        searched: d.searched,
                    },
                );
            } else {
                match &d.witness {
                    Some(w) => writeln!(out, "descends: rescale by {}", print_fn(w)),
                    None => writeln!(out, "does not descend ({} rescalings tried)", d.searched),
                }
                .ok();
            }
            if d.witness.is_none() {
                return Err(Failure::Verdict);
            }
        }
        Cmd::CheckF { f, h, hhat } => emit_report(out, json, &check_f(&duality(&chart, f, h, hhat)?)?)?,
        Cmd::Tau { f, rho, h, hhat, reverse, expect, exact } => {
            let data = duality(&chart, f, h, hhat)?;
            let (src, dst) = if *reverse { (data.corr.right, data.corr.left) } else { (data.corr.left, data.corr.right) };
            let rho = parse(rho, &src)?;
            let t = if *reverse { tau_reverse(&rho, &data)? } else { tau(&rho, &data)? };
            match expect {
                None => emit_form(out, json, &t),
                Some(e) => {
                    let mode = if *exact { Mode::Exact } else { Mode::ProjectiveLine };
                    let (ok, detail) = compare(mode, &t, &parse(e, &dst)?);
                    let mut rep = Report::new("tau");
                    rep.push("matches expectation", ok, detail);
                    emit_report(out, json, &rep)?;
                }
            }
        }
        Cmd::BuildF { theta, thetahat } => {
            let corr = make_correspondence(&chart, &chart)?;
            let comps = |s: &str, c: &Chart| -> Result<ConnectionForm, Failure> {
                Ok(ConnectionForm { theta: s.split(';').map(|t| parse(t.trim(), c)).collect::<Result<_, _>>()? })
            };
            let la = TorusAction::standard(&corr.left);
            let ra = TorusAction::standard(&corr.right);
            let f = build_f_from_connections(&comps(theta, &corr.left)?, &comps(thetahat, &corr.right)?, &corr, &la, &ra)?;
            emit_form(out, json, &f);
        }
        Cmd::Blowup { l, at, m, expr } => {
            if *at == 0 {
                return Err(Failure::Usage("--at is one-based".into()));
            }
            let bd = blowdown_chart(*l, at - 1, *m)?;
            let alpha = match expr {
                Some(e) => parse(e, &bd.target)?,
                None => (0..bd.target.dim()).fold(Form::one(bd.target), |v, k| v.wedge(&Form::basis(bd.target, k))),
            };
            let pulled = pullback_blowdown(&alpha, &bd)?;
            let div = Divisor::elliptic(bd.target.sig(), &(0..*l).collect::<Vec<_>>());
            let induced = induced_divisor(&div, &bd)?;
            let iso = fiberwise_iso_check(&bd, &div)?;
            if json {
                #[derive(Serialize)]
                struct B {
                    pullback: crate::cli::json::FormJson,
                    induced_divisor: String,
                    fiberwise_iso: bool,
                }
                emit_json(
                    out,
                    &B { pullback: form_to_json(&pulled), induced_divisor: print_fn(&induced.generator), fiberwise_iso: iso },
                );
            } else {
                let _ = writeln!(out, "pullback: {}", print_form(&pulled));
                let _ = writeln!(out, "induced divisor: <{}>", print_fn(&induced.generator));
                let _ = writeln!(out, "fiberwise iso: {iso}");
            }
        }
        Cmd::VerifyExample { name } => {
            let cases = if name == "all" {
                registry::registry()
            } else {
                vec![registry::find(name).ok_or_else(|| Failure::Usage(format!("no example named '{name}'")))?]
            };
            let mut reports = Vec::new();
            for c in &cases {
                let mut r = registry::run_case(c, cli.seed).unwrap_or_else(|e| {
                    let mut r = Report::new(&c.name);
                    r.push("run", false, e.to_string());
                    r
                });
                r.case = format!("{} ({})", c.name, c.source);
                reports.push(r);
            }
            let all = reports.iter().all(Report::passed);
            if json {
                emit_json(out, &reports);
            } else {
                for r in &reports {
                    let _ = write!(out, "{}", r.to_text());
                }
                let n = reports.iter().filter(|r| r.passed()).count();
                let _ = writeln!(out, "{n}/{} examples pass", reports.len());
            }
            if !all {
                return Err(Failure::Verdict);
            }
        }
        Cmd::ListExamples => {
            let cases = registry::registry();
            if json {
                emit_json(out, &cases);
            } else {
                for c in cases {
                    let _ = writeln!(out, "{:<24} {:<16} {}", c.name, c.op, c.source);
                }
            }
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(Failure::Verdict) => 1,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}
