//! Pretty-printer for the expression grammar.

use crate::chart::{Chart, Leg};
use crate::coeffring::{FnElem, Key, Qi};
use crate::forms::{ComplexForm, Form, Mask, Multivector};

fn mono_factors(k: &Key) -> Vec<String> {
    let mut v = Vec::new();
    for (i, &a) in k.r.iter().enumerate() {
        match a {
            0 => {}
            1 => v.push(format!("r{}", i + 1)),
            _ => v.push(format!("r{}^{}", i + 1, a)),
        }
    }
    for (j, &b) in k.fourier.iter().enumerate() {
        if b != 0 {
            v.push(format!("E{}[{}]", j + 1, b));
        }
    }
    for (s, &c) in k.x.iter().enumerate() {
        match c {
            0 => {}
            1 => v.push(format!("x{}", s + 1)),
            _ => v.push(format!("x{}^{}", s + 1, c)),
        }
    }
    for (n, &e) in &k.params {
        if e == 1 {
            v.push(format!("@{n}"));
        } else {
            v.push(format!("@{n}^{e}"));
        }
    }
    v
}

fn print_mono(c: &Qi, k: &Key) -> String {
    let f = mono_factors(k);
    if f.is_empty() {
        return c.to_string();
    }
    let body = f.join("*");
    if c.is_one() {
        body
    } else if (-c).is_one() {
        format!("-{body}")
    } else {
        format!("{c}*{body}")
    }
}

fn join_signed(parts: Vec<String>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, p) in parts.into_iter().enumerate() {
        if n == 0 {
            out.push_str(&p);
        } else if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&p);
        }
    }
    out
}

/// Canonical text of a function.
pub fn print_fn(f: &FnElem) -> String {
    join_signed(f.terms().map(|(k, c)| print_mono(c, k)).collect())
}

fn legs_of(mask: Mask) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).collect()
}

fn sorted_masks<'a>(it: impl Iterator<Item = (&'a Mask, &'a FnElem)>) -> Vec<(Mask, &'a FnElem)> {
    let mut v: Vec<(Mask, &FnElem)> = it.map(|(m, f)| (*m, f)).collect();
    v.sort_by_key(|(m, _)| (m.count_ones(), legs_of(*m)));
    v
}

fn print_terms(terms: Vec<(Mask, &FnElem)>, token: impl Fn(usize) -> String) -> String {
    let mut parts = Vec::new();
    for (m, g) in terms {
        if m == 0 {
            parts.extend(g.terms().map(|(k, c)| print_mono(c, k)));
            continue;
        }
        let legs = legs_of(m).into_iter().map(&token).collect::<Vec<_>>().join("^");
        if let Some((k, c)) = g.as_monomial() {
            let s = print_mono(c, k);
            if s == "1" {
                parts.push(legs);
            } else if s == "-1" {
                parts.push(format!("-{legs}"));
            } else {
                parts.push(format!("{s}*{legs}"));
            }
        } else {
            parts.push(format!("({})*{legs}", print_fn(g)));
        }
    }
    join_signed(parts)
}

/// Canonical text of a form: terms by degree, then by frame position.
pub fn print_form(a: &Form) -> String {
    let chart = a.chart();
    let legs = chart.legs();
    print_terms(sorted_masks(a.terms()), |k| chart.leg_token(legs[k]))
}

fn vector_token(chart: &Chart, leg: Leg) -> String {
    match leg {
        Leg::LogR(i) => format!("vr{}", i + 1),
        Leg::Ang(a) => format!("v{}", chart.angle_name(a)),
        Leg::LogX(s) => format!("vlx{}", s + 1),
        Leg::Dx(s) => format!("vx{}", s + 1),
    }
}

/// Text of a multivector; `vr1` is `r1 d/dr1`, `vth1` is `d/dth1`.
pub fn print_multivector(x: &Multivector) -> String {
    let chart = x.chart();
    let legs = chart.legs();
    print_terms(sorted_masks(x.terms()), |k| vector_token(&chart, legs[k]))
}

/// Text of a complex-frame form with `dz`/`dzb` legs.
pub fn print_complex(a: &ComplexForm) -> String {
    let chart = a.chart();
    let legs = chart.legs();
    print_terms(sorted_masks(a.terms()), |k| {
        if k < 2 * chart.l {
            if k % 2 == 0 {
                format!("dz{}", k / 2 + 1)
            } else {
                format!("dzb{}", k / 2 + 1)
            }
        } else {
            chart.leg_token(legs[k])
        }
    })
}
