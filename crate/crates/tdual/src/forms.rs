//! Exterior algebra over a chart frame.
//!
//! A form is a map from frame subsets (bit masks in canonical frame order)
//! to coefficient functions. Frame covectors are closed and their dual
//! vector fields commute, so `d` only differentiates coefficients.
//! Contraction by a multivector `X_1 ^ ... ^ X_k` applies `iota_{X_1}` first.

use std::collections::BTreeMap;
use std::fmt;

use crate::chart::{Chart, ChartKind, Leg, TorusAction};
use crate::coeffring::{is_smooth_fn, substitute, torus_average, FnElem, Key, MonomialMap, Qi, Sig};
use crate::error::CalcError;

pub type Mask = u32;
type Terms = BTreeMap<Mask, FnElem>;

/// Sign of `e_a ^ e_b` relative to `e_{a|b}`, or `None` if they share a leg.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<i64> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> j).count_ones();
        bb &= bb - 1;
    }
    Some(if swaps.is_multiple_of(2) { 1 } else { -1 })
}

/// Sign of `iota_{v_k} e_mask`, or `None` if leg `k` is absent.
pub fn contract_sign(mask: Mask, k: usize) -> Option<i64> {
    if mask & (1 << k) == 0 {
        return None;
    }
    let below = (mask & ((1u32 << k) - 1)).count_ones();
    Some(if below.is_multiple_of(2) { 1 } else { -1 })
}

fn add_into(t: &mut Terms, m: Mask, f: FnElem) {
    if f.is_zero() {
        return;
    }
    match t.get_mut(&m) {
        Some(g) => {
            *g = g.add(&f);
            if g.is_zero() {
                t.remove(&m);
            }
        }
        None => {
            t.insert(m, f);
        }
    }
}

fn wedge_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, fa) in a {
        for (mb, fb) in b {
            if let Some(s) = wedge_sign(*ma, *mb) {
                add_into(&mut out, ma | mb, fa.mul(fb).scale(&Qi::int(s)));
            }
        }
    }
    out
}

fn apply_leg(leg: Leg, f: &FnElem) -> FnElem {
    match leg {
        Leg::LogR(i) => f.r_euler(i),
        Leg::Ang(a) => f.d_angle(a),
        Leg::LogX(s) => f.x_euler(s),
        Leg::Dx(s) => f.d_x(s),
    }
}

/// Lie algebroid form over a chart; inhomogeneous sums allowed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    chart: Chart,
    terms: Terms,
}

impl Form {
    pub fn zero(chart: Chart) -> Self {
        Form { chart, terms: Terms::new() }
    }
    pub fn one(chart: Chart) -> Self {
        Form::function(chart, FnElem::one(chart.sig()))
    }
    pub fn function(chart: Chart, f: FnElem) -> Self {
        let mut terms = Terms::new();
        add_into(&mut terms, 0, f);
        Form { chart, terms }
    }
    pub fn constant(chart: Chart, c: Qi) -> Self {
        Form::function(chart, FnElem::constant(chart.sig(), c))
    }
    /// The `k`-th frame covector.
    pub fn basis(chart: Chart, k: usize) -> Self {
        Form::term(chart, 1 << k, FnElem::one(chart.sig()))
    }
    pub fn leg(chart: Chart, leg: Leg) -> Result<Self, CalcError> {
        let k = chart
            .leg_index(leg)
            .ok_or_else(|| CalcError::ChartMismatch(format!("{leg:?} is not a frame leg of this chart")))?;
        Ok(Form::basis(chart, k))
    }
    pub fn term(chart: Chart, mask: Mask, f: FnElem) -> Self {
        let mut terms = Terms::new();
        add_into(&mut terms, mask, f);
        Form { chart, terms }
    }
    pub fn from_terms(chart: Chart, it: impl IntoIterator<Item = (Mask, FnElem)>) -> Self {
        let mut terms = Terms::new();
        for (m, f) in it {
            add_into(&mut terms, m, f);
        }
        Form { chart, terms }
    }
    /// `dlog z_i = dlog r_i + i dtheta_i` on an elliptic-type chart.
    pub fn dlog_z(chart: Chart, i: usize) -> Self {
        Form::basis(chart, 2 * i).add(&Form::basis(chart, 2 * i + 1).scale(&Qi::i()))
    }
    /// `dlog zbar_i`.
    pub fn dlog_zbar(chart: Chart, i: usize) -> Self {
        Form::basis(chart, 2 * i).sub(&Form::basis(chart, 2 * i + 1).scale(&Qi::i()))
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
    pub fn sig(&self) -> Sig {
        self.chart.sig()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Mask, &FnElem)> {
        self.terms.iter()
    }
    pub fn coeff(&self, mask: Mask) -> FnElem {
        self.terms.get(&mask).cloned().unwrap_or_else(|| FnElem::zero(self.sig()))
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// Relabels the chart kind without touching the terms (same storage frame).
    pub fn with_chart_kind(&self, kind: ChartKind) -> Form {
        let chart = self.chart.with_kind(kind);
        assert_eq!(chart.legs(), self.chart.legs(), "kinds with different frames");
        Form { chart, terms: self.terms.clone() }
    }

    fn same_chart(&self, o: &Form) -> Result<(), CalcError> {
        if self.chart.legs() != o.chart.legs() || self.sig() != o.sig() {
            return Err(CalcError::ChartMismatch(format!("{:?} vs {:?}", self.chart, o.chart)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Form) -> Form {
        self.same_chart(o).expect("form chart mismatch");
        let mut terms = self.terms.clone();
        for (m, f) in &o.terms {
            add_into(&mut terms, *m, f.clone());
        }
        Form { chart: self.chart, terms }
    }
    pub fn sub(&self, o: &Form) -> Form {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Form {
        self.map_coeffs(|f| f.neg())
    }
    pub fn scale(&self, c: &Qi) -> Form {
        self.map_coeffs(|f| f.scale(c))
    }
    pub fn scale_int(&self, n: i64) -> Form {
        self.scale(&Qi::int(n))
    }
    pub fn scale_fn(&self, g: &FnElem) -> Form {
        self.map_coeffs(|f| f.mul(g))
    }
    pub fn map_coeffs(&self, mut h: impl FnMut(&FnElem) -> FnElem) -> Form {
        Form::from_terms(self.chart, self.terms.iter().map(|(m, f)| (*m, h(f))))
    }
    pub fn conj(&self) -> Form {
        self.map_coeffs(|f| f.conj())
    }
    pub fn re_part(&self) -> Form {
        self.map_coeffs(|f| f.re_part())
    }
    pub fn im_part(&self) -> Form {
        self.map_coeffs(|f| f.im_part())
    }

    pub fn checked_wedge(&self, o: &Form) -> Result<Form, CalcError> {
        self.same_chart(o)?;
        Ok(Form { chart: self.chart, terms: wedge_terms(&self.terms, &o.terms) })
    }
    /// Exterior product; panics on chart mismatch (see [`wedge`]).
    pub fn wedge(&self, o: &Form) -> Form {
        self.checked_wedge(o).expect("form chart mismatch")
    }

    /// Degree-`p` component.
    pub fn part(&self, p: u32) -> Form {
        Form::from_terms(self.chart, self.terms.iter().filter(|(m, _)| m.count_ones() == p).map(|(m, f)| (*m, f.clone())))
    }
    pub fn scalar_part(&self) -> FnElem {
        self.coeff(0)
    }
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|m| m.count_ones()).collect();
        d.dedup();
        d.sort();
        d.dedup();
        d
    }
    pub fn is_homogeneous(&self, p: u32) -> bool {
        self.terms.keys().all(|m| m.count_ones() == p)
    }
    /// Coefficient of the full frame volume.
    pub fn top_coeff(&self) -> FnElem {
        let n = self.chart.dim();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        self.coeff(full)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Form {
        let legs = self.chart.legs();
        let mut out = Terms::new();
        for (m, f) in &self.terms {
            for (k, leg) in legs.iter().enumerate() {
                let bit = 1u32 << k;
                if m & bit != 0 {
                    continue;
                }
                let g = apply_leg(*leg, f);
                if g.is_zero() {
                    continue;
                }
                let s = wedge_sign(bit, *m).unwrap();
                add_into(&mut out, m | bit, g.scale(&Qi::int(s)));
            }
        }
        Form { chart: self.chart, terms: out }
    }

    /// `iota` of the `k`-th frame vector.
    pub fn contract_leg(&self, k: usize) -> Form {
        let mut out = Terms::new();
        for (m, f) in &self.terms {
            if let Some(s) = contract_sign(*m, k) {
                add_into(&mut out, m & !(1 << k), f.scale(&Qi::int(s)));
            }
        }
        Form { chart: self.chart, terms: out }
    }

    /// Finite exterior exponential of a form without degree-0 part.
    pub fn exp(&self) -> Result<Form, CalcError> {
        if self.terms.contains_key(&0) {
            return Err(CalcError::ExpOfScalar);
        }
        let mut acc = Form::one(self.chart);
        let mut pow = Form::one(self.chart);
        let mut n = 1i64;
        loop {
            pow = pow.wedge(self).scale(&Qi::ratio(1, n));
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
            n += 1;
        }
        Ok(acc)
    }

    /// Degree reversal `sigma`: multiplies the degree-`p` part by `(-1)^{p(p-1)/2}`.
    pub fn reversal(&self) -> Form {
        Form::from_terms(
            self.chart,
            self.terms.iter().map(|(m, f)| {
                let p = m.count_ones();
                let s = if (p * p.saturating_sub(1) / 2) % 2 == 0 { 1 } else { -1 };
                (*m, f.scale(&Qi::int(s)))
            }),
        )
    }

    /// Moves terms to another chart through explicit leg and key maps.
    pub fn transport(
        &self,
        chart: Chart,
        mut leg_map: impl FnMut(usize) -> Option<usize>,
        mut key_map: impl FnMut(&Key) -> Result<Key, CalcError>,
    ) -> Result<Form, CalcError> {
        let mut out = Terms::new();
        for (m, f) in &self.terms {
            let mut nm: Mask = 0;
            let mut idx = Vec::new();
            for k in 0..32 {
                if m & (1 << k) != 0 {
                    let j = leg_map(k).ok_or(CalcError::ResidualAngle)?;
                    idx.push(j);
                }
            }
            // sign of the permutation sorting the image indices
            let mut sign = 1i64;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    if idx[a] > idx[b] {
                        sign = -sign;
                    }
                }
                nm |= 1 << idx[a];
            }
            let mut terms = Vec::new();
            for (k, c) in f.terms() {
                terms.push((key_map(k)?, c.scale_sign(sign)));
            }
            add_into(&mut out, nm, FnElem::from_terms(chart.sig(), terms));
        }
        Ok(Form { chart, terms: out })
    }
}

trait ScaleSign {
    fn scale_sign(&self, s: i64) -> Qi;
}
impl ScaleSign for Qi {
    fn scale_sign(&self, s: i64) -> Qi {
        if s < 0 {
            -self
        } else {
            self.clone()
        }
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_form(self))
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_form(self))
    }
}

/// Multivector over the dual frame.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multivector {
    chart: Chart,
    terms: Terms,
}

impl Multivector {
    pub fn zero(chart: Chart) -> Self {
        Multivector { chart, terms: Terms::new() }
    }
    pub fn basis(chart: Chart, k: usize) -> Self {
        let mut terms = Terms::new();
        terms.insert(1 << k, FnElem::one(chart.sig()));
        Multivector { chart, terms }
    }
    pub fn leg(chart: Chart, leg: Leg) -> Result<Self, CalcError> {
        let k = chart
            .leg_index(leg)
            .ok_or_else(|| CalcError::ChartMismatch(format!("{leg:?} is not a frame leg of this chart")))?;
        Ok(Multivector::basis(chart, k))
    }
    pub fn from_terms(chart: Chart, it: impl IntoIterator<Item = (Mask, FnElem)>) -> Self {
        let mut terms = Terms::new();
        for (m, f) in it {
            add_into(&mut terms, m, f);
        }
        Multivector { chart, terms }
    }
    pub fn chart(&self) -> Chart {
        self.chart
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Mask, &FnElem)> {
        self.terms.iter()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, o: &Multivector) -> Multivector {
        assert_eq!(self.chart.legs(), o.chart.legs(), "multivector chart mismatch");
        let mut terms = self.terms.clone();
        for (m, f) in &o.terms {
            add_into(&mut terms, *m, f.clone());
        }
        Multivector { chart: self.chart, terms }
    }
    pub fn neg(&self) -> Multivector {
        self.scale_int(-1)
    }
    pub fn sub(&self, o: &Multivector) -> Multivector {
        self.add(&o.neg())
    }
    pub fn scale_int(&self, n: i64) -> Multivector {
        self.scale_fn(&FnElem::constant(self.chart.sig(), Qi::int(n)))
    }
    pub fn scale_fn(&self, g: &FnElem) -> Multivector {
        Multivector::from_terms(self.chart, self.terms.iter().map(|(m, f)| (*m, f.mul(g))))
    }
    pub fn wedge(&self, o: &Multivector) -> Multivector {
        Multivector { chart: self.chart, terms: wedge_terms(&self.terms, &o.terms) }
    }
    pub fn is_vector(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() == 1)
    }

    /// `iota_X alpha` with `iota_{v_K} = iota_{v_kp} o ... o iota_{v_k1}`.
    pub fn contract(&self, alpha: &Form) -> Result<Form, CalcError> {
        if self.chart.legs() != alpha.chart.legs() {
            return Err(CalcError::ChartMismatch("contraction across charts".into()));
        }
        let mut out = Form::zero(alpha.chart);
        for (m, g) in &self.terms {
            let mut cur = alpha.clone();
            for k in 0..32 {
                if m & (1 << k) != 0 {
                    cur = cur.contract_leg(k);
                }
            }
            out = out.add(&cur.scale_fn(g));
        }
        Ok(out)
    }

    /// Derivation of a function by a vector field.
    pub fn apply(&self, f: &FnElem) -> FnElem {
        let legs = self.chart.legs();
        let mut out = FnElem::zero(f.sig());
        for (m, g) in &self.terms {
            if m.count_ones() == 1 {
                let k = m.trailing_zeros() as usize;
                out = out.add(&g.mul(&apply_leg(legs[k], f)));
            }
        }
        out
    }

    /// Lie bracket of vector fields; frame fields commute.
    pub fn bracket(&self, o: &Multivector) -> Multivector {
        let mut out = Multivector::zero(self.chart);
        for (m, g) in &o.terms {
            out = out.add(&Multivector::from_terms(self.chart, [(*m, self.apply(g))]));
        }
        for (m, f) in &self.terms {
            out = out.sub(&Multivector::from_terms(self.chart, [(*m, o.apply(f))]));
        }
        out
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_multivector(self))
    }
}

/// Checked exterior product.
pub fn wedge(a: &Form, b: &Form) -> Result<Form, CalcError> {
    a.checked_wedge(b)
}

/// Exterior derivative.
pub fn d(a: &Form) -> Form {
    a.d()
}

/// `iota_X alpha`.
pub fn contract(x: &Multivector, alpha: &Form) -> Result<Form, CalcError> {
    x.contract(alpha)
}

/// Cartan formula `L_X = iota_X d + d iota_X` for a vector field `X`.
pub fn lie_derivative(x: &Multivector, alpha: &Form) -> Result<Form, CalcError> {
    if !x.is_vector() {
        return Err(CalcError::Invalid("Lie derivative needs a degree-1 multivector".into()));
    }
    Ok(x.contract(&alpha.d())?.add(&x.contract(alpha)?.d()))
}

/// Every coefficient equals its torus average.
pub fn is_invariant(alpha: &Form, action: &TorusAction) -> bool {
    alpha.terms.values().all(|f| torus_average(f, action) == *f)
}

/// Image of one source leg under a monomial map, as a form on `target`.
fn leg_image(leg: Leg, map: &MonomialMap, target: &Chart) -> Result<Form, CalcError> {
    let sig = target.sig();
    let mut out = Form::zero(*target);
    let tleg = |l: Leg| -> Result<Form, CalcError> { Form::leg(*target, l) };
    match leg {
        Leg::LogR(j) => {
            for (i, &e) in map.r[j].iter().enumerate() {
                if e != 0 {
                    out = out.add(&tleg(Leg::LogR(i))?.scale_int(e as i64));
                }
            }
        }
        Leg::Ang(a) => {
            for (b, &e) in map.ang[a].iter().enumerate() {
                if e != 0 {
                    out = out.add(&tleg(Leg::Ang(b))?.scale_int(e as i64));
                }
            }
        }
        Leg::Dx(s) | Leg::LogX(s) => {
            let e = &map.x[s];
            if e.iter().any(|&v| v < 0) {
                return Err(CalcError::NegativeX);
            }
            let mut key = Key::unit(sig);
            for (t, &v) in e.iter().enumerate() {
                key.x[t] = v as u32;
            }
            let mono = FnElem::monomial(sig, Qi::one(), key);
            for (t, &v) in e.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let logx = target.leg_index(Leg::LogX(t)).is_some();
                let piece = match (leg, logx) {
                    (Leg::Dx(_), false) => tleg(Leg::Dx(t))?.scale_fn(&mono.d_x(t)),
                    (Leg::Dx(_), true) => tleg(Leg::LogX(t))?.scale_fn(&mono.x_euler(t)),
                    (Leg::LogX(_), true) => tleg(Leg::LogX(t))?.scale_int(v as i64),
                    _ => return Err(CalcError::NotMonomial("dlog x pulls back to a non-log coordinate".into())),
                };
                out = out.add(&piece);
            }
        }
    }
    Ok(out)
}

/// Pullback along a monomial map; `map.src` is the signature of `alpha`'s
/// chart and `target` carries `map.dst`.
pub fn pullback(alpha: &Form, map: &MonomialMap, target: &Chart) -> Result<Form, CalcError> {
    if alpha.sig() != map.src || target.sig() != map.dst {
        return Err(CalcError::SignatureMismatch("pullback map does not match the charts".into()));
    }
    let legs = alpha.chart.legs();
    let images: Vec<Form> = legs.iter().map(|l| leg_image(*l, map, target)).collect::<Result<_, _>>()?;
    let mut out = Form::zero(*target);
    for (m, f) in &alpha.terms {
        let mut piece = Form::function(*target, substitute(f, map)?);
        for (k, img) in images.iter().enumerate() {
            if m & (1 << k) != 0 {
                piece = piece.wedge(img);
            }
        }
        out = out.add(&piece);
    }
    Ok(out)
}

/// Form in the complex frame `dz_i, dzbar_i, dps, dx` of an elliptic chart.
/// Leg `2i` is `dz_i`, leg `2i+1` is `dzbar_i`; the remaining legs agree
/// with the elliptic frame.
#[derive(Clone, PartialEq, Eq)]
pub struct ComplexForm {
    chart: Chart,
    terms: Terms,
}

impl ComplexForm {
    pub fn chart(&self) -> Chart {
        self.chart
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Mask, &FnElem)> {
        self.terms.iter()
    }
    pub fn coeff(&self, mask: Mask) -> FnElem {
        self.terms.get(&mask).cloned().unwrap_or_else(|| FnElem::zero(self.chart.sig()))
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Debug for ComplexForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_complex(self))
    }
}

fn elliptic_like(chart: &Chart) -> Result<(), CalcError> {
    match chart.kind {
        ChartKind::Elliptic | ChartKind::ComplexLog => Ok(()),
        _ => Err(CalcError::ChartMismatch("complex frame needs an elliptic or complex-log chart".into())),
    }
}

fn change_frame(terms: &Terms, images: &[Terms]) -> Terms {
    let mut out = Terms::new();
    for (m, f) in terms {
        let mut piece = Terms::new();
        piece.insert(0, f.clone());
        for (k, img) in images.iter().enumerate() {
            if m & (1 << k) != 0 {
                piece = wedge_terms(&piece, img);
            }
        }
        for (pm, pf) in piece {
            add_into(&mut out, pm, pf);
        }
    }
    out
}

/// Rewrites an elliptic form with `dlog r = (z^-1 dz + zbar^-1 dzbar)/2` and
/// `dtheta = (z^-1 dz - zbar^-1 dzbar)/(2i)`.
pub fn to_complex_frame(alpha: &Form) -> Result<ComplexForm, CalcError> {
    elliptic_like(&alpha.chart)?;
    let chart = alpha.chart;
    let sig = chart.sig();
    let n = chart.dim();
    let mut images = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = Terms::new();
        if k < 2 * chart.l {
            let i = k / 2;
            let zi = FnElem::z(sig, i).inv_monomial().unwrap();
            let zbi = FnElem::zbar(sig, i).inv_monomial().unwrap();
            let (a, b) = if k % 2 == 0 {
                (Qi::ratio(1, 2), Qi::ratio(1, 2))
            } else {
                (Qi::i() * Qi::ratio(-1, 2), Qi::i() * Qi::ratio(1, 2))
            };
            add_into(&mut t, 1 << (2 * i), zi.scale(&a));
            add_into(&mut t, 1 << (2 * i + 1), zbi.scale(&b));
        } else {
            t.insert(1 << k, FnElem::one(sig));
        }
        images.push(t);
    }
    Ok(ComplexForm { chart, terms: change_frame(&alpha.terms, &images) })
}

/// Inverse of [`to_complex_frame`]: `dz = z (dlog r + i dtheta)`,
/// `dzbar = zbar (dlog r - i dtheta)`.
pub fn from_complex_frame(beta: &ComplexForm) -> Form {
    let chart = beta.chart;
    let sig = chart.sig();
    let n = chart.dim();
    let mut images = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = Terms::new();
        if k < 2 * chart.l {
            let i = k / 2;
            let (w, s) = if k % 2 == 0 { (FnElem::z(sig, i), Qi::i()) } else { (FnElem::zbar(sig, i), -Qi::i()) };
            add_into(&mut t, 1 << (2 * i), w.clone());
            add_into(&mut t, 1 << (2 * i + 1), w.scale(&s));
        } else {
            t.insert(1 << k, FnElem::one(sig));
        }
        images.push(t);
    }
    Form { chart, terms: change_frame(&beta.terms, &images) }
}

impl ComplexForm {
    /// Builds directly from complex-frame terms.
    pub fn from_terms(chart: Chart, it: impl IntoIterator<Item = (Mask, FnElem)>) -> Result<Self, CalcError> {
        elliptic_like(&chart)?;
        let mut terms = Terms::new();
        for (m, f) in it {
            add_into(&mut terms, m, f);
        }
        Ok(ComplexForm { chart, terms })
    }
}

/// Whether the form extends smoothly over the chart, divisor included.
pub fn is_smooth_form(alpha: &Form) -> Result<bool, CalcError> {
    let chart = alpha.chart;
    match chart.kind {
        ChartKind::Elliptic | ChartKind::ComplexLog => {
            let c = to_complex_frame(alpha)?;
            Ok(c.terms.values().all(|f| is_smooth_fn(f, &chart)))
        }
        ChartKind::RealLog => {
            let legs = chart.legs();
            Ok(alpha.terms.iter().all(|(m, f)| {
                legs.iter().enumerate().all(|(k, leg)| match leg {
                    Leg::LogX(s) if m & (1 << k) != 0 => f.terms().all(|(key, _)| key.x[*s] >= 1),
                    _ => true,
                })
            }))
        }
        ChartKind::Smooth => Ok(true),
        ChartKind::Correspondence => Err(CalcError::ChartMismatch("smoothness is not defined on a correspondence chart".into())),
    }
}
