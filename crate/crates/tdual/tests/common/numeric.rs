//! Floating-point oracle: evaluates forms in honest coordinates and redoes
//! the exterior calculus numerically, with its own sign bookkeeping and
//! finite-difference derivatives.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tdual::chart::Leg;
use tdual::forms::Multivector;
use tdual::{Chart, FnElem, Form};

pub type NForm = BTreeMap<u32, Complex64>;

#[derive(Clone, Debug)]
pub struct NPoint {
    pub r: Vec<f64>,
    pub th: Vec<f64>,
    pub x: Vec<f64>,
    pub params: BTreeMap<String, f64>,
}

impl NPoint {
    /// Random point of the open locus `r != 0`, `x != 0`.
    pub fn random(chart: &Chart, params: &[&str], rng: &mut ChaCha8Rng) -> NPoint {
        let sig = chart.sig();
        let signed = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
            let v = rng.gen_range(lo..hi);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        };
        NPoint {
            r: (0..sig.nr).map(|_| rng.gen_range(0.5..2.0)).collect(),
            th: (0..sig.na).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
            x: (0..sig.nx).map(|_| signed(rng, 0.3, 2.0)).collect(),
            params: params.iter().map(|p| (p.to_string(), signed(rng, 0.5, 2.0))).collect(),
        }
    }

    fn moved(&self, leg: Leg, t: f64) -> NPoint {
        let mut p = self.clone();
        match leg {
            Leg::LogR(i) => p.r[i] *= t.exp(),
            Leg::Ang(a) => p.th[a] += t,
            Leg::LogX(s) => p.x[s] *= t.exp(),
            Leg::Dx(s) => p.x[s] += t,
        }
        p
    }
}

pub fn eval_fn(f: &FnElem, p: &NPoint) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (k, c) in f.terms() {
        let (re, im) = c.to_f64();
        let mut v = Complex64::new(re, im);
        for (i, &a) in k.r.iter().enumerate() {
            v *= p.r[i].powi(a);
        }
        for (j, &b) in k.fourier.iter().enumerate() {
            v *= Complex64::from_polar(1.0, b as f64 * p.th[j]);
        }
        for (s, &e) in k.x.iter().enumerate() {
            v *= p.x[s].powi(e as i32);
        }
        for (n, &e) in &k.params {
            v *= p.params[n].powi(e);
        }
        total += v;
    }
    total
}

pub fn eval_form(a: &Form, p: &NPoint) -> NForm {
    let mut out = NForm::new();
    for (m, f) in a.terms() {
        out.insert(*m, eval_fn(f, p));
    }
    out
}

fn add_to(out: &mut NForm, m: u32, v: Complex64) {
    *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += v;
}

/// Derivative of `f` along a frame vector, five-point stencil.
fn frame_derivative(f: &FnElem, p: &NPoint, leg: Leg) -> Complex64 {
    let h = 1e-3;
    let g = |t: f64| eval_fn(f, &p.moved(leg, t));
    (g(-2.0 * h) - g(2.0 * h) + (g(h) - g(-h)) * 8.0) / (12.0 * h)
}

/// Frame differential. The frame covectors are closed, so only the
/// coefficients are differentiated.
pub fn nd(a: &Form, p: &NPoint) -> NForm {
    let legs = a.chart().legs();
    let mut out = NForm::new();
    for (m, f) in a.terms() {
        for (k, &leg) in legs.iter().enumerate() {
            if m & (1 << k) != 0 {
                continue;
            }
            let before = (m & ((1 << k) - 1)).count_ones();
            let s = if before % 2 == 0 { 1.0 } else { -1.0 };
            add_to(&mut out, m | (1 << k), frame_derivative(f, p, leg) * s);
        }
    }
    out
}

fn bits(m: u32) -> Vec<u32> {
    (0..32).filter(|k| m & (1 << k) != 0).collect()
}

/// Sign of sorting the concatenation of two disjoint increasing lists.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    for i in bits(a) {
        for j in bits(b) {
            if i > j {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn nwedge(a: &NForm, b: &NForm) -> NForm {
    let mut out = NForm::new();
    for (&ma, &va) in a {
        for (&mb, &vb) in b {
            if ma & mb == 0 {
                add_to(&mut out, ma | mb, va * vb * merge_sign(ma, mb));
            }
        }
    }
    out
}

pub fn ncontract(k: u32, a: &NForm) -> NForm {
    let mut out = NForm::new();
    for (&m, &v) in a {
        if m & (1 << k) != 0 {
            let before = (m & ((1 << k) - 1)).count_ones();
            let s = if before.is_multiple_of(2) { 1.0 } else { -1.0 };
            add_to(&mut out, m & !(1 << k), v * s);
        }
    }
    out
}

pub fn nscale(a: &NForm, c: Complex64) -> NForm {
    a.iter().map(|(&m, &v)| (m, v * c)).collect()
}

pub fn nadd(a: &NForm, b: &NForm) -> NForm {
    let mut out = a.clone();
    for (&m, &v) in b {
        add_to(&mut out, m, v);
    }
    out
}

pub fn nsub(a: &NForm, b: &NForm) -> NForm {
    nadd(a, &nscale(b, Complex64::new(-1.0, 0.0)))
}

/// Vector field components at a point, by frame leg.
pub fn eval_vector(x: &Multivector, p: &NPoint) -> Vec<(u32, Complex64)> {
    x.terms().map(|(m, f)| (m.trailing_zeros(), eval_fn(f, p))).collect()
}

pub fn nclifford(vec: &[(u32, Complex64)], cov: &NForm, rho: &NForm) -> NForm {
    let mut out = nwedge(cov, rho);
    for &(k, c) in vec {
        out = nadd(&out, &nscale(&ncontract(k, rho), c));
    }
    out
}

pub fn nexp(f: &NForm) -> NForm {
    let mut out: NForm = [(0u32, Complex64::new(1.0, 0.0))].into_iter().collect();
    let mut power = out.clone();
    for n in 1..=16 {
        power = nscale(&nwedge(&power, f), Complex64::new(1.0 / n as f64, 0.0));
        if power.values().all(|v| v.norm() == 0.0) {
            break;
        }
        out = nadd(&out, &power);
    }
    out
}

/// Relabels legs through `map` (old leg index to new leg index).
pub fn relabel(a: &NForm, map: &[Option<u32>]) -> Option<NForm> {
    let mut out = NForm::new();
    for (&m, &v) in a {
        let mut nm = 0u32;
        let mut order = Vec::new();
        for k in bits(m) {
            let t = map[k as usize]?;
            nm |= 1 << t;
            order.push(t);
        }
        let mut inv = 0;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                if order[i] > order[j] {
                    inv += 1;
                }
            }
        }
        add_to(&mut out, nm, if inv % 2 == 0 { v } else { -v });
    }
    Some(out)
}

/// Index map from a side chart into the correspondence chart.
pub fn side_into_corr(side: &Chart, corr: &Chart, right: bool) -> Vec<Option<u32>> {
    let offset = if right { side.l + side.f } else { 0 };
    side.legs()
        .into_iter()
        .map(|leg| {
            let target = match leg {
                Leg::Ang(a) => Leg::Ang(a + offset),
                other => other,
            };
            corr.leg_index(target).map(|k| k as u32)
        })
        .collect()
}

/// Inverse index map, `None` on legs absent from the side.
pub fn corr_onto_side(side: &Chart, corr: &Chart, right: bool) -> Vec<Option<u32>> {
    let into = side_into_corr(side, corr, right);
    (0..corr.dim() as u32).map(|k| into.iter().position(|&t| t == Some(k)).map(|i| i as u32)).collect()
}

/// Pointwise `tau`: `rho` at the side point, `F` at the correspondence point,
/// contractions with the angle vectors of the source side in order.
pub fn ntau(rho: &NForm, f: &NForm, src: &Chart, corr: &Chart, reverse: bool) -> Option<NForm> {
    let lifted = relabel(rho, &side_into_corr(src, corr, reverse))?;
    let ef = if reverse { nexp(&nscale(f, Complex64::new(-1.0, 0.0))) } else { nexp(f) };
    let mut acc = nwedge(&lifted, &ef);
    let k = src.l + src.f;
    let offset = if reverse { k } else { 0 };
    for a in 0..k {
        let leg = corr.leg_index(Leg::Ang(a + offset)).unwrap() as u32;
        acc = ncontract(leg, &acc);
    }
    let target = corr_onto_side(src, corr, !reverse);
    relabel(&acc.into_iter().filter(|(_, v)| v.norm() > 1e-12).collect(), &target)
}

/// Correspondence point with the given left and right angles.
pub fn corr_point(left: &NPoint, right_th: &[f64]) -> NPoint {
    let mut p = left.clone();
    p.th.extend_from_slice(right_th);
    p
}

pub fn right_point(left: &NPoint, right_th: &[f64]) -> NPoint {
    let mut p = left.clone();
    p.th = right_th.to_vec();
    p
}

/// Largest coefficient difference, relative to the larger operand.
pub fn distance(a: &NForm, b: &NForm) -> f64 {
    let scale = a.values().chain(b.values()).map(|v| v.norm()).fold(1.0, f64::max);
    let d = nsub(a, b);
    d.values().map(|v| v.norm()).fold(0.0, f64::max) / scale
}

/// `first - rest[0] - rest[1] - ...`.
pub fn sub_all(parts: &[NForm]) -> NForm {
    let mut it = parts.iter();
    let mut out = it.next().cloned().unwrap_or_default();
    for p in it {
        out = nsub(&out, p);
    }
    out
}
