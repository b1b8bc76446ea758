//! Browser bindings for three `tdual` operations: exterior derivative,
//! T-duality transform and blow-up pullback. The plain functions return
//! printed forms; the `wasm_bindgen` wrappers turn errors into JS errors.

use tdual::blowup::{blowdown_chart, fiberwise_iso_check, induced_divisor, pullback_blowdown};
use tdual::chart::Divisor;
use tdual::cli::parse::{parse_chart, parse_form};
use tdual::cli::print::{print_fn, print_form};
use tdual::tduality::{make_correspondence, projective_ratio, tau, DualityData};
use tdual::{Chart, Form};
use wasm_bindgen::prelude::*;

fn chart(name: &str) -> Result<Chart, String> {
    parse_chart(name).map_err(|e| e.to_string())
}

fn form(src: &str, c: &Chart) -> Result<Form, String> {
    parse_form(src, c).map_err(|e| e.to_string())
}

/// `d(expr)` on the named chart.
pub fn differentiate(chart_name: &str, expr: &str) -> Result<String, String> {
    let c = chart(chart_name)?;
    Ok(print_form(&form(expr, &c)?.d()))
}

/// `tau(rho)` for `F` on the correspondence chart; when `expect` is
/// non-empty the result is compared with it as a spinor line.
pub fn t_dual(chart_name: &str, f: &str, rho: &str, expect: &str) -> Result<String, String> {
    let c = chart(chart_name)?;
    let corr = make_correspondence(&c, &c).map_err(|e| e.to_string())?;
    let f = form(f, &corr.chart)?;
    let data = DualityData::untwisted(corr, f).map_err(|e| e.to_string())?;
    let t = tau(&form(rho, &c)?, &data).map_err(|e| e.to_string())?;
    let mut out = print_form(&t);
    if !expect.trim().is_empty() {
        match projective_ratio(&t, &form(expect, &c)?) {
            Some(k) => out.push_str(&format!("\nsame line as the expectation (factor {})", print_fn(&k))),
            None => out.push_str("\nnot on the line of the expectation"),
        }
    }
    Ok(out)
}

/// Pullback of `expr` (the volume frame when empty) to chart `at`
/// (one-based) of the blow-up of `C^l` at the origin.
pub fn blow_up(l: usize, at: usize, expr: &str) -> Result<String, String> {
    if at == 0 {
        return Err("blow-up charts are numbered from 1".into());
    }
    let bd = blowdown_chart(l, at - 1, 0).map_err(|e| e.to_string())?;
    let alpha = if expr.trim().is_empty() {
        (0..bd.target.dim()).fold(Form::one(bd.target), |v, k| v.wedge(&Form::basis(bd.target, k)))
    } else {
        form(expr, &bd.target)?
    };
    let pulled = pullback_blowdown(&alpha, &bd).map_err(|e| e.to_string())?;
    let div = Divisor::elliptic(bd.target.sig(), &(0..l).collect::<Vec<_>>());
    let induced = induced_divisor(&div, &bd).map_err(|e| e.to_string())?;
    let iso = fiberwise_iso_check(&bd, &div).map_err(|e| e.to_string())?;
    Ok(format!(
        "pullback: {}\ninduced divisor: <{}>\nfiberwise iso: {iso}",
        print_form(&pulled),
        print_fn(&induced.generator)
    ))
}

#[wasm_bindgen(js_name = differentiate)]
pub fn js_differentiate(chart_name: &str, expr: &str) -> Result<String, JsError> {
    differentiate(chart_name, expr).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = tDual)]
pub fn js_t_dual(chart_name: &str, f: &str, rho: &str, expect: &str) -> Result<String, JsError> {
    t_dual(chart_name, f, rho, expect).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = blowUp)]
pub fn js_blow_up(l: usize, at: usize, expr: &str) -> Result<String, JsError> {
    blow_up(l, at, expr).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative() {
        assert_eq!(differentiate("c1", "r1^2*dth1").unwrap(), "2*r1^2*dlr1^dth1");
        assert!(differentiate("c9", "r1").is_err());
        assert!(differentiate("c1", "dth2").unwrap_err().contains("out of range"));
    }

    #[test]
    fn line_example() {
        let out = t_dual("c1", "dth1^dthh1", "exp(i*dlr1^dth1)", "dlr1 + i*dth1").unwrap();
        assert!(out.starts_with("-i*dlr1 + dth1"));
        assert!(out.contains("same line"));
        let plain = t_dual("c2", "-dth1^dthh2 + dth2^dthh1", "exp(i*(dlr1^dth2 + dth1^dlr2))", "").unwrap();
        assert!(!plain.contains('\n'));
    }

    #[test]
    fn blow_up_volume() {
        let out = blow_up(2, 1, "").unwrap();
        assert!(out.contains("pullback: dlr1^dth1^dlr2^dth2"));
        assert!(out.contains("<r1^2*r2^2>"));
        assert!(out.contains("fiberwise iso: true"));
        assert!(blow_up(2, 3, "").is_err());
        assert!(blow_up(2, 0, "").is_err());
    }
}
