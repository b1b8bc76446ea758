//! Declarative catalogue of worked examples and the interpreter that runs
//! them. Records live in `examples.json`; each names an operation, the
//! inputs in the expression grammar, the expected result and how results
//! are compared.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blowup::{
    blowdown_chart, blowup_duality, fiberwise_iso_check, induced_divisor, pullback_blowdown,
};
use crate::chart::{
    atlas_check_global, check_connection, cp2_action, cp2_zetas, curvature, im_star, Atlas, Chart,
    ConnectionForm, Divisor, TorusAction,
};
use crate::cli::parse::{parse_chart, parse_form};
use crate::cli::print::{print_fn, print_form};
use crate::coeffring::{is_smooth_fn, FnElem, Qi};
use crate::error::CalcError;
use crate::forms::Form;
use crate::genstruct::{check_spinor, descends, stable_check, Spinor};
use crate::report::Report;
use crate::residues::{res_r, res_r2};
use crate::tduality::{
    build_f_from_connections, check_f, make_correspondence, projective_ratio, tau, DualityData,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    ProjectiveLine,
    Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleCase {
    pub name: String,
    /// Where the example comes from, in words.
    pub source: String,
    pub op: String,
    pub mode: Mode,
    pub chart: String,
    pub inputs: BTreeMap<String, String>,
    pub expected: String,
}

const CATALOGUE: &str = include_str!("examples.json");

pub fn registry() -> Vec<ExampleCase> {
    serde_json::from_str(CATALOGUE).expect("examples.json is well formed")
}

pub fn find(name: &str) -> Option<ExampleCase> {
    registry().into_iter().find(|c| c.name == name)
}

fn parse(src: &str, chart: &Chart) -> Result<Form, CalcError> {
    parse_form(src, chart).map_err(|e| CalcError::Invalid(format!("'{src}': {e}")))
}

fn input<'a>(case: &'a ExampleCase, key: &str) -> Result<&'a str, CalcError> {
    case.inputs
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| CalcError::Invalid(format!("case {} lacks input '{key}'", case.name)))
}

fn number(case: &ExampleCase, key: &str) -> Result<usize, CalcError> {
    input(case, key)?.trim().parse().map_err(|_| CalcError::Invalid(format!("input '{key}' must be a number")))
}

fn candidates(case: &ExampleCase) -> Vec<(String, String)> {
    case.inputs.iter().filter_map(|(k, v)| k.strip_prefix("F:").map(|n| (n.to_string(), v.clone()))).collect()
}

fn untwisted(chart: &Chart, f: &str) -> Result<DualityData, CalcError> {
    let corr = make_correspondence(chart, chart)?;
    let f = parse(f, &corr.chart)?;
    DualityData::untwisted(corr, f)
}

/// Compares `got` with `want` according to `mode`.
pub fn compare(mode: Mode, got: &Form, want: &Form) -> (bool, String) {
    match mode {
        Mode::ProjectiveLine => match projective_ratio(got, want) {
            Some(c) => (true, format!("{} = ({}) * expected", print_form(got), print_fn(&c))),
            None => (false, format!("{} is not on the line of {}", print_form(got), print_form(want))),
        },
        _ => {
            let ok = got == want;
            (ok, if ok { print_form(got) } else { format!("{} != {}", print_form(got), print_form(want)) })
        }
    }
}

/// Runs one catalogue entry.
pub fn run_case(case: &ExampleCase, seed: u64) -> Result<Report, CalcError> {
    let chart = parse_chart(&case.chart)?;
    let mut rep = Report::new(&case.name);
    match case.op.as_str() {
        "tau" => {
            let data = untwisted(&chart, input(case, "F")?)?;
            let t = tau(&parse(input(case, "rho")?, &chart)?, &data)?;
            let (ok, detail) = compare(case.mode, &t, &parse(&case.expected, &chart)?);
            rep.push("tau", ok, detail);
            if let Some(w) = case.inputs.get("witness") {
                let want = parse(w, &chart)?.scalar_part();
                let got = descends(&Spinor::untwisted(t), seed)?.witness;
                let detail = got.as_ref().map_or("no rescaling found".into(), print_fn);
                rep.push("descends", got.as_ref() == Some(&want), detail);
            }
        }
        "descent-family" => {
            let rho = parse(&format!("exp(i*({}))", input(case, "omega")?), &chart)?;
            for (name, f) in candidates(case) {
                let t = tau(&rho, &untwisted(&chart, &f)?)?;
                let w = descends(&Spinor::untwisted(t), seed)?.witness;
                let want = name == case.expected;
                let detail = match &w {
                    Some(w) => format!("descends via {}", print_fn(w)),
                    None => "does not descend".into(),
                };
                rep.push(format!("{name} descends = {want}"), w.is_some() == want, detail);
            }
        }
        "stable" => {
            let s = stable_check(&parse(input(case, "omega")?, &chart)?)?;
            let want = case.expected == "pass";
            rep.push("verdict", s.passed() == want, summary(&s, "stable"));
            if let Some(r) = case.inputs.get("res_q") {
                let got = s.get("res_q[1]").map(|c| c.detail.clone()).unwrap_or_default();
                rep.push("res_q[1]", got == *r, got);
            }
        }
        "blowup-volume" => {
            let bd = blowdown_chart(number(case, "l")?, number(case, "i")? - 1, chart.m)?;
            let mut vol = Form::one(bd.target);
            for k in 0..bd.target.dim() {
                vol = vol.wedge(&Form::basis(bd.target, k));
            }
            let pulled = pullback_blowdown(&vol, &bd)?;
            let (ok, detail) = compare(case.mode, &pulled, &parse(&case.expected, &bd.source)?);
            rep.push("p*Omega", ok, detail);
            let div = Divisor::elliptic(bd.target.sig(), &(0..bd.l).collect::<Vec<_>>());
            rep.push("fiberwise iso", fiberwise_iso_check(&bd, &div)?, "");
            let ind = induced_divisor(&div, &bd)?;
            let want = parse(input(case, "induced")?, &bd.source)?.scalar_part();
            rep.push("induced divisor", ind.generator == want, print_fn(&ind.generator));
        }
        "blowup-commute" => {
            let data = untwisted(&chart, input(case, "F")?)?;
            let bd = blowdown_chart(number(case, "l")?, number(case, "i")? - 1, chart.m)?;
            let blown = blowup_duality(&data, &bd)?;
            rep.absorb("check_F", check_f(&blown)?);
            let rho = parse(input(case, "rho")?, &chart)?;
            let up = tau(&pullback_blowdown(&rho, &bd)?, &blown)?;
            let down = pullback_blowdown(&tau(&rho, &data)?, &bd)?;
            let (ok, detail) = compare(Mode::Exact, &up, &down);
            rep.push("tau_blown p* = phat* tau", ok, detail);
        }
        "smooth-fn" => {
            let f = parse(input(case, "f")?, &chart)?.scalar_part();
            let s = is_smooth_fn(&f, &chart);
            rep.push("smooth", s.to_string() == case.expected, format!("{} smooth: {s}", print_fn(&f)));
        }
        "spinor" => {
            let sp = Spinor::untwisted(parse(input(case, "rho")?, &chart)?);
            let (r, _) = check_spinor(&sp, seed, number(case, "samples")?)?;
            let want = case.expected == "pass";
            rep.push("verdict", r.passed() == want, summary(&r, "pure and Mukai-nondegenerate at every sample"));
        }
        "cp2-connections" => cp2_connections(&mut rep)?,
        "cp2-duality" => {
            for k in 0..3 {
                let a = cp2_action(k);
                let theta = ConnectionForm { theta: cp2_zetas(k).iter().map(im_star).collect() };
                let c = Chart::elliptic(2, 0, 0);
                let corr = make_correspondence(&c, &c)?;
                let f = build_f_from_connections(&theta, &theta, &corr, &a, &a)?;
                let data = DualityData::new(corr, f, Form::zero(c), Form::zero(c), a.clone(), a)?;
                rep.absorb(&format!("U{k}"), check_f(&data)?);
            }
        }
        "build-F" => {
            let corr = make_correspondence(&chart, &chart)?;
            let comps = |key: &str| -> Result<ConnectionForm, CalcError> {
                let theta = input(case, key)?.split(';').map(|s| parse(s.trim(), &chart)).collect::<Result<_, _>>()?;
                Ok(ConnectionForm { theta })
            };
            let a = TorusAction::standard(&chart);
            let f = build_f_from_connections(&comps("theta")?, &comps("thetahat")?, &corr, &a, &a)?;
            let (ok, detail) = compare(case.mode, &f, &parse(&case.expected, &corr.chart)?);
            rep.push("F", ok, detail);
        }
        "hopf-scaling" => {
            let rho = parse(input(case, "rho")?, &chart)?;
            let scaled = scale_radii(&rho, 2);
            let ratio = projective_ratio(&scaled, &rho).filter(|c| c.as_constant().is_some());
            rep.push("rho line is Z-invariant", ratio.is_some(), ratio.as_ref().map_or("not proportional".into(), print_fn));
            let corr = make_correspondence(&chart, &chart)?;
            for (name, f) in candidates(case) {
                let f = parse(&f, &corr.chart)?;
                rep.push(format!("{name} is Z-invariant"), scale_radii(&f, 2) == f, print_form(&f));
            }
        }
        other => return Err(CalcError::Invalid(format!("unknown operation '{other}'"))),
    }
    Ok(rep)
}

fn cp2_connections(rep: &mut Report) -> Result<(), CalcError> {
    for k in 0..3 {
        let theta = ConnectionForm { theta: cp2_zetas(k).iter().map(im_star).collect() };
        let action = cp2_action(k);
        rep.push(format!("U{k} connection"), check_connection(&theta, &action)?, print_forms(&theta.theta));
        match curvature(&theta, &action) {
            Ok(curv) => {
                rep.push(format!("U{k} curvature basic"), true, print_forms(&curv));
                let mut ok = true;
                for (t, dt) in theta.theta.iter().zip(&curv) {
                    for j in 0..2 {
                        ok &= res_r(dt, j)? == res_r(t, j)?.d();
                    }
                    ok &= res_r2(dt, 0, 1)?.is_zero();
                }
                rep.push(format!("U{k} curvature residues"), ok, "Res_r(dTheta) = d Res_r(Theta), Res_r2(dTheta) = 0");
            }
            Err(e) => rep.push(format!("U{k} curvature basic"), false, e.to_string()),
        }
    }
    let atlas = Atlas::cp2();
    for i in 0..2 {
        let forms: Vec<Form> = (0..3).map(|k| cp2_zetas(k)[i].clone()).collect();
        rep.push(format!("zeta{} glues", i + 1), atlas_check_global(&atlas, &forms)?, "");
    }
    Ok(())
}

/// `ok` when every check passed, else the names of the failing ones.
fn summary(r: &Report, ok: &str) -> String {
    if r.passed() {
        return ok.into();
    }
    let bad: Vec<&str> = r.checks.iter().filter(|c| !c.verdict).map(|c| c.name.as_str()).collect();
    format!("failing: {}", bad.join(", "))
}

fn print_forms(v: &[Form]) -> String {
    v.iter().map(print_form).collect::<Vec<_>>().join("; ")
}

/// Pullback along `r_i -> c r_i` for every polar radius.
pub fn scale_radii(a: &Form, c: i64) -> Form {
    let sig = a.sig();
    a.map_coeffs(|f| {
        FnElem::from_terms(
            sig,
            f.terms().map(|(k, v)| {
                let e: i64 = k.r.iter().map(|&x| x as i64).sum();
                let s = Qi::int(c).powi(e).expect("nonzero base");
                (k.clone(), v.clone() * s)
            }),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_parses_and_names_are_unique() {
        let cases = registry();
        assert!(cases.len() >= 15);
        let mut names: Vec<_> = cases.iter().map(|c| c.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cases.len());
        for c in &cases {
            parse_chart(&c.chart).unwrap();
        }
    }

    #[test]
    fn line_example_runs() {
        let rep = run_case(&find("c-line").unwrap(), 1).unwrap();
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn scaling() {
        let c = Chart::elliptic(2, 0, 0);
        let z = parse("z1*z2 + dz1^dz2", &c).unwrap();
        assert_eq!(scale_radii(&z, 2), z.scale_int(4));
        let w = parse("dlr1^dth2", &c).unwrap();
        assert_eq!(scale_radii(&w, 3), w);
    }
}
