//! JSON encodings of forms, functions and residues.
//!
//! A form is `{chart, terms: [{frame: [token, ...], coeff: {monomials: [...]}}]}`
//! where each monomial is `{re, im, r, fourier, x, params}` with `re`/`im`
//! decimal rationals such as `"-3/2"`. Frame tokens use the grammar names
//! (`dlr1`, `dth2`, `dthh1`, `dx1`, ...).

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::cli::print::{print_fn, print_form};
use crate::coeffring::{FnElem, Key, Qi};
use crate::error::CalcError;
use crate::forms::Form;
use crate::residues::{ResidueKind, ResidueReport, ResidueValue};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub re: String,
    pub im: String,
    pub r: Vec<i32>,
    pub fourier: Vec<i32>,
    pub x: Vec<u32>,
    #[serde(default)]
    pub params: BTreeMap<String, i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnJson {
    pub monomials: Vec<MonomialJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub frame: Vec<String>,
    pub coeff: FnJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub chart: Chart,
    pub terms: Vec<TermJson>,
    /// Printed form; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

pub fn fn_to_json(f: &FnElem) -> FnJson {
    FnJson {
        monomials: f
            .terms()
            .map(|(k, c)| MonomialJson {
                re: c.re.to_string(),
                im: c.im.to_string(),
                r: k.r.clone(),
                fourier: k.fourier.clone(),
                x: k.x.clone(),
                params: k.params.clone(),
            })
            .collect(),
    }
}

fn rational(s: &str) -> Result<BigRational, CalcError> {
    s.trim().parse::<BigRational>().map_err(|_| CalcError::Invalid(format!("bad rational '{s}'")))
}

pub fn fn_from_json(j: &FnJson, chart: &Chart) -> Result<FnElem, CalcError> {
    let sig = chart.sig();
    let mut terms = Vec::new();
    for m in &j.monomials {
        if m.r.len() != sig.nr || m.fourier.len() != sig.na || m.x.len() != sig.nx {
            return Err(CalcError::SignatureMismatch(format!(
                "monomial of shape ({}, {}, {}) on a chart with ({}, {}, {})",
                m.r.len(),
                m.fourier.len(),
                m.x.len(),
                sig.nr,
                sig.na,
                sig.nx
            )));
        }
        let key = Key { r: m.r.clone(), fourier: m.fourier.clone(), x: m.x.clone(), params: m.params.clone() };
        terms.push((key, Qi::new(rational(&m.re)?, rational(&m.im)?)));
    }
    Ok(FnElem::from_terms(sig, terms))
}

pub fn form_to_json(a: &Form) -> FormJson {
    let chart = a.chart();
    let legs = chart.legs();
    let terms = a
        .terms()
        .map(|(m, f)| TermJson {
            frame: (0..legs.len()).filter(|k| m & (1 << k) != 0).map(|k| chart.leg_token(legs[k])).collect(),
            coeff: fn_to_json(f),
        })
        .collect();
    FormJson { chart, terms, text: Some(print_form(a)) }
}

/// Frame tokens may come in any order; the coefficient picks up the sign
/// of the sorting permutation.
pub fn form_from_json(j: &FormJson) -> Result<Form, CalcError> {
    let chart = Chart::new(j.chart.kind, j.chart.l, j.chart.f, j.chart.m)?;
    let legs = chart.legs();
    let mut out = Form::zero(chart);
    for t in &j.terms {
        let mut idx = Vec::new();
        for tok in &t.frame {
            let k = (0..legs.len())
                .find(|&k| chart.leg_token(legs[k]) == *tok)
                .ok_or_else(|| CalcError::Invalid(format!("'{tok}' is not a frame token of this chart")))?;
            idx.push(k);
        }
        let mut piece = Form::function(chart, fn_from_json(&t.coeff, &chart)?);
        for k in idx {
            piece = piece.wedge(&Form::basis(chart, k));
        }
        out = out.add(&piece);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueJson {
    pub kind: ResidueKind,
    /// One-based indices of the vanishing radii.
    pub locus: Vec<usize>,
    pub chart: Chart,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<FormJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<FnJson>,
}

pub fn residue_to_json(r: &ResidueReport) -> ResidueJson {
    let (text, form, scalar) = match &r.value {
        ResidueValue::Form(a) => (print_form(a), Some(form_to_json(a)), None),
        ResidueValue::Scalar(f) => (print_fn(f), None, Some(fn_to_json(f))),
    };
    ResidueJson { kind: r.kind, locus: r.locus.iter().map(|i| i + 1).collect(), chart: r.chart, text, form, scalar }
}
