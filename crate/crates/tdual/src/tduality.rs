//! Non-principal T-duality on correspondence charts.
//!
//! The correspondence of two elliptic charts with the same `(l, f, m)` shares
//! the radii and the real coordinates and duplicates the angles; see
//! [`Chart::correspondence`]. The transform is
//! `tau(rho) = iota_{X_1 ^ ... ^ X_k}(e^F ^ p^* rho)` with `X_j` the left
//! action generators, reinterpreted on the right chart.

use crate::chart::{check_connection, Chart, ChartKind, ConnectionForm, Leg, TorusAction};
use crate::cli::print::{print_fn, print_form};
use crate::coeffring::{FnElem, Key, MonomialMap, Qi};
use crate::error::CalcError;
use crate::forms::{is_invariant, pullback, Form, Multivector};
use crate::genstruct::d_h;
use crate::report::Report;

/// Fibre product of two elliptic charts over their common base.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrChart {
    pub left: Chart,
    pub right: Chart,
    pub chart: Chart,
    /// `p`: left coordinates in terms of correspondence coordinates.
    pub p: MonomialMap,
    /// `p-hat`: right coordinates in terms of correspondence coordinates.
    pub phat: MonomialMap,
}

impl CorrChart {
    fn half(&self) -> usize {
        self.left.l + self.left.f
    }
}

fn projection(side: &Chart, corr: &Chart, offset: usize) -> MonomialMap {
    let (src, dst) = (side.sig(), corr.sig());
    let r = (0..src.nr).map(|i| (0..dst.nr).map(|j| (i == j) as i32).collect()).collect();
    let ang = (0..src.na).map(|a| (0..dst.na).map(|b| (b == a + offset) as i32).collect()).collect();
    let x = (0..src.nx).map(|s| (0..dst.nx).map(|t| (s == t) as i32).collect()).collect();
    MonomialMap::new(src, dst, r, ang, x).expect("projection shapes agree")
}

/// Correspondence chart of two elliptic charts of equal shape.
pub fn make_correspondence(left: &Chart, right: &Chart) -> Result<CorrChart, CalcError> {
    let ok_kind = |c: &Chart| matches!(c.kind, ChartKind::Elliptic | ChartKind::ComplexLog);
    if !ok_kind(left) || !ok_kind(right) {
        return Err(CalcError::ChartMismatch("correspondence needs elliptic charts".into()));
    }
    if (left.l, left.f, left.m) != (right.l, right.f, right.m) {
        return Err(CalcError::SignatureMismatch(format!(
            "left (l={}, f={}, m={}) vs right (l={}, f={}, m={})",
            left.l, left.f, left.m, right.l, right.f, right.m
        )));
    }
    let left = left.with_kind(ChartKind::Elliptic);
    let right = right.with_kind(ChartKind::Elliptic);
    let chart = Chart::correspondence(left.l, left.f, left.m);
    let p = projection(&left, &chart, 0);
    let phat = projection(&right, &chart, left.l + left.f);
    Ok(CorrChart { left, right, chart, p, phat })
}

/// Candidate T-duality between `(left, H)` and `(right, Hhat)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityData {
    pub corr: CorrChart,
    pub f: Form,
    pub h: Form,
    pub hhat: Form,
    pub left_action: TorusAction,
    pub right_action: TorusAction,
}

impl DualityData {
    pub fn new(
        corr: CorrChart,
        f: Form,
        h: Form,
        hhat: Form,
        left_action: TorusAction,
        right_action: TorusAction,
    ) -> Result<Self, CalcError> {
        if f.chart() != corr.chart || h.chart() != corr.left || hhat.chart() != corr.right {
            return Err(CalcError::ChartMismatch("duality data on the wrong charts".into()));
        }
        let k = corr.half();
        if left_action.rank() != right_action.rank()
            || left_action.n_angles() != k
            || right_action.n_angles() != k
        {
            return Err(CalcError::Invalid("actions must have equal rank and act on all angles".into()));
        }
        Ok(DualityData { corr, f, h, hhat, left_action, right_action })
    }

    /// Standard actions on both sides and `H = Hhat = 0`.
    pub fn untwisted(corr: CorrChart, f: Form) -> Result<Self, CalcError> {
        let la = TorusAction::standard(&corr.left);
        let ra = TorusAction::standard(&corr.right);
        let h = Form::zero(corr.left);
        let hh = Form::zero(corr.right);
        DualityData::new(corr, f, h, hh, la, ra)
    }

    fn rank(&self) -> usize {
        self.left_action.rank()
    }

    /// Left action generators on the correspondence chart.
    pub fn left_generators(&self) -> Vec<Multivector> {
        self.left_action.padded(0, self.corr.half()).generators(&self.corr.chart).expect("action fits")
    }
    /// Right action generators on the correspondence chart.
    pub fn right_generators(&self) -> Vec<Multivector> {
        self.right_action.padded(self.corr.half(), 0).generators(&self.corr.chart).expect("action fits")
    }
    /// The `T^{2k}` action on the correspondence chart.
    pub fn total_action(&self) -> TorusAction {
        let h = self.corr.half();
        let mut m = self.left_action.padded(0, h).matrix;
        m.extend(self.right_action.padded(h, 0).matrix);
        TorusAction { matrix: m }
    }

    /// `M_ij = F(X_i, Xhat_j) = iota_{Xhat_j} iota_{X_i} F`.
    pub fn fiber_matrix(&self) -> Result<Vec<Vec<FnElem>>, CalcError> {
        let lg = self.left_generators();
        let rg = self.right_generators();
        let two = self.f.part(2);
        let mut m = Vec::new();
        for x in &lg {
            let ix = x.contract(&two)?;
            let mut row = Vec::new();
            for y in &rg {
                row.push(y.contract(&ix)?.scalar_part());
            }
            m.push(row);
        }
        Ok(m)
    }
}

/// Determinant by cofactor expansion.
pub fn det(m: &[Vec<FnElem>], sig: crate::coeffring::Sig) -> FnElem {
    let n = m.len();
    if n == 0 {
        return FnElem::one(sig);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = FnElem::zero(sig);
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<FnElem>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect()).collect();
        let term = m[0][c].mul(&det(&minor, sig));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Invariance, `dF = p^*H - phat^*Hhat`, and a nonzero constant fibre
/// determinant.
pub fn check_f(data: &DualityData) -> Result<Report, CalcError> {
    let mut rep = Report::new("check-F");
    let c = &data.corr;
    let inv = is_invariant(&data.f, &data.total_action());
    rep.push("invariant", inv, String::new());
    let ph = pullback(&data.h, &c.p, &c.chart)?;
    let phh = pullback(&data.hhat, &c.phat, &c.chart)?;
    let diff = data.f.d().sub(&ph.sub(&phh));
    rep.push("dF = p*H - phat*Hhat", diff.is_zero(), if diff.is_zero() { String::new() } else { format!("defect {}", print_form(&diff)) });
    let m = data.fiber_matrix()?;
    let dt = det(&m, c.chart.sig());
    let constant = !dt.is_zero() && dt.terms().all(|(k, _)| k.is_coordinate_free());
    rep.push("fiber nondegenerate", constant, format!("det = {}", print_fn(&dt)));
    Ok(rep)
}

/// Moves a form on the correspondence chart with no angle data from one side
/// onto the other side's chart. `keep` is the offset of the kept angle block.
fn descend_to_side(a: &Form, corr: &CorrChart, keep_offset: usize, target: Chart) -> Result<Form, CalcError> {
    let h = corr.half();
    let legs = corr.chart.legs();
    let tsig = target.sig();
    let drop_lo = if keep_offset == 0 { h } else { 0 };
    for (_, f) in a.terms() {
        for (k, _) in f.terms() {
            if k.fourier[drop_lo..drop_lo + h].iter().any(|&b| b != 0) {
                return Err(CalcError::ResidualAngle);
            }
        }
    }
    a.transport(
        target,
        |idx| match legs[idx] {
            Leg::Ang(b) if b >= keep_offset && b < keep_offset + h => target.leg_index(Leg::Ang(b - keep_offset)),
            Leg::Ang(_) => None,
            l => target.leg_index(l),
        },
        |k: &Key| {
            let mut out = Key::unit(tsig);
            out.r.clone_from(&k.r);
            out.x.clone_from(&k.x);
            out.params = k.params.clone();
            out.fourier.copy_from_slice(&k.fourier[keep_offset..keep_offset + h]);
            Ok(out)
        },
    )
}

fn contract_all(gens: &[Multivector], a: &Form) -> Result<Form, CalcError> {
    let mut cur = a.clone();
    for g in gens {
        cur = g.contract(&cur)?;
    }
    Ok(cur)
}

/// `tau(rho) = iota_{X_1 ^ ... ^ X_k}(e^F ^ p^* rho)` on the right chart.
pub fn tau(rho: &Form, data: &DualityData) -> Result<Form, CalcError> {
    let c = &data.corr;
    if rho.chart().with_kind(ChartKind::Elliptic) != c.left {
        return Err(CalcError::ChartMismatch("rho must live on the left chart".into()));
    }
    let rho = rho.with_chart_kind(ChartKind::Elliptic);
    if !is_invariant(&rho, &data.left_action) {
        return Err(CalcError::NotInvariant("rho under the left action".into()));
    }
    let e = data.f.exp()?;
    let body = e.wedge(&pullback(&rho, &c.p, &c.chart)?);
    let out = contract_all(&data.left_generators(), &body)?;
    descend_to_side(&out, c, c.half(), c.right)
}

/// Reverse transform `iota_{Xhat_1 ^ ... ^ Xhat_k}(e^{-F} ^ phat^* rhohat)`.
pub fn tau_reverse(rhohat: &Form, data: &DualityData) -> Result<Form, CalcError> {
    let c = &data.corr;
    if rhohat.chart().with_kind(ChartKind::Elliptic) != c.right {
        return Err(CalcError::ChartMismatch("rhohat must live on the right chart".into()));
    }
    let rhohat = rhohat.with_chart_kind(ChartKind::Elliptic);
    if !is_invariant(&rhohat, &data.right_action) {
        return Err(CalcError::NotInvariant("rhohat under the right action".into()));
    }
    let e = data.f.neg().exp()?;
    let body = e.wedge(&pullback(&rhohat, &c.phat, &c.chart)?);
    let out = contract_all(&data.right_generators(), &body)?;
    descend_to_side(&out, c, 0, c.left)
}

/// `a = c b` for a single nonzero coordinate-free monomial `c` (parameters
/// allowed); returns `c`.
pub fn projective_ratio(a: &Form, b: &Form) -> Option<FnElem> {
    if a.chart() != b.chart() || a.is_zero() || b.is_zero() {
        return None;
    }
    let (m0, f0) = b.terms().next()?;
    let (kb, cb) = f0.terms().next()?;
    let g0 = a.coeff(*m0);
    for (ka, ca) in g0.terms() {
        if ka.r != kb.r || ka.fourier != kb.fourier || ka.x != kb.x {
            continue;
        }
        let mut key = Key::unit(a.sig());
        key.params = ka.params.clone();
        for (n, e) in &kb.params {
            let slot = key.params.entry(n.clone()).or_insert(0);
            *slot -= e;
            if *slot == 0 {
                key.params.remove(n);
            }
        }
        let ratio = FnElem::monomial(a.sig(), ca / cb, key);
        if b.scale_fn(&ratio) == *a {
            return Some(ratio);
        }
    }
    None
}

/// Equality of spinor lines up to a nonzero constant.
pub fn projective_eq(a: &Form, b: &Form) -> bool {
    projective_ratio(a, b).is_some()
}

/// Exact chain-map and round-trip checks on sample forms.
pub fn cochain_verify(data: &DualityData, samples: &[Form]) -> Result<Report, CalcError> {
    let mut rep = Report::new("cochain");
    let k = data.rank();
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    let mut chain_ok = 0;
    let mut round_ok = 0;
    let mut ratio: Option<FnElem> = None;
    let mut ratio_consistent = true;
    for (n, rho) in samples.iter().enumerate() {
        let t = tau(rho, data)?;
        let lhs = d_h(&t, &data.hhat);
        let rhs = tau(&d_h(rho, &data.h), data)?.scale_int(sign);
        if lhs == rhs {
            chain_ok += 1;
        } else {
            rep.push(format!("chain[{n}]"), false, format!("lhs {} vs rhs {}", print_form(&lhs), print_form(&rhs)));
        }
        if rho.is_zero() {
            round_ok += 1;
            continue;
        }
        let back = tau_reverse(&t, data)?;
        match projective_ratio(&back, &rho.with_chart_kind(ChartKind::Elliptic)) {
            Some(r) => {
                round_ok += 1;
                match &ratio {
                    None => ratio = Some(r),
                    Some(r0) if *r0 != r => ratio_consistent = false,
                    _ => {}
                }
            }
            None => rep.push(format!("round-trip[{n}]"), false, format!("got {}", print_form(&back))),
        }
    }
    rep.push(
        "d_Hhat tau = (-1)^k tau d_H",
        chain_ok == samples.len(),
        format!("{chain_ok}/{} samples, k = {k}", samples.len()),
    );
    let rdesc = ratio.as_ref().map_or("none".to_string(), print_fn);
    rep.push(
        "tauhat tau = c id",
        round_ok == samples.len() && ratio_consistent,
        format!("{round_ok}/{} samples, c = {rdesc}", samples.len()),
    );
    Ok(rep)
}

/// `F = -sum_i p^* Theta_i ^ phat^* Thetahat_i`.
pub fn build_f_from_connections(
    theta: &ConnectionForm,
    thetahat: &ConnectionForm,
    corr: &CorrChart,
    left_action: &TorusAction,
    right_action: &TorusAction,
) -> Result<Form, CalcError> {
    if !check_connection(theta, left_action)? {
        return Err(CalcError::NotAConnection("Theta".into()));
    }
    if !check_connection(thetahat, right_action)? {
        return Err(CalcError::NotAConnection("Thetahat".into()));
    }
    let mut f = Form::zero(corr.chart);
    for (a, b) in theta.theta.iter().zip(&thetahat.theta) {
        let pa = pullback(&a.with_chart_kind(ChartKind::Elliptic), &corr.p, &corr.chart)?;
        let pb = pullback(&b.with_chart_kind(ChartKind::Elliptic), &corr.phat, &corr.chart)?;
        f = f.sub(&pa.wedge(&pb));
    }
    Ok(f)
}

/// `c dangle_a ^ dangle-hat_b` on the correspondence chart.
pub fn angle_pair(corr: &CorrChart, left_angle: usize, right_angle: usize, c: Qi) -> Form {
    let ch = corr.chart;
    let h = corr.half();
    let a = Form::leg(ch, Leg::Ang(left_angle)).expect("left angle");
    let b = Form::leg(ch, Leg::Ang(h + right_angle)).expect("right angle");
    a.wedge(&b).scale(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(ch: Chart, k: usize) -> Form {
        Form::basis(ch, k)
    }

    #[test]
    fn correspondence_shapes() {
        let c1 = make_correspondence(&Chart::elliptic(1, 0, 0), &Chart::elliptic(1, 0, 0)).unwrap();
        assert_eq!(c1.chart.frame(), vec!["dlr1", "dth1", "dthh1"]);
        let c2 = make_correspondence(&Chart::elliptic(2, 0, 0), &Chart::elliptic(2, 0, 0)).unwrap();
        assert_eq!(c2.chart.frame(), vec!["dlr1", "dth1", "dthh1", "dlr2", "dth2", "dthh2"]);
        assert!(make_correspondence(&Chart::elliptic(1, 0, 0), &Chart::elliptic(2, 0, 0)).is_err());
    }

    #[test]
    fn check_f_examples() {
        let l1 = Chart::elliptic(1, 0, 0);
        let c1 = make_correspondence(&l1, &l1).unwrap();
        let f = angle_pair(&c1, 0, 0, Qi::one());
        assert!(check_f(&DualityData::untwisted(c1, f).unwrap()).unwrap().passed());
        let l2 = Chart::elliptic(2, 0, 0);
        let c2 = make_correspondence(&l2, &l2).unwrap();
        let f2p = angle_pair(&c2, 0, 1, Qi::int(-1)).add(&angle_pair(&c2, 1, 0, Qi::one()));
        assert!(check_f(&DualityData::untwisted(c2.clone(), f2p).unwrap()).unwrap().passed());
        let f11 = angle_pair(&c2, 0, 0, Qi::one());
        let rep = check_f(&DualityData::untwisted(c2, f11).unwrap()).unwrap();
        assert!(!rep.get("fiber nondegenerate").unwrap().verdict);
        assert!(rep.get("invariant").unwrap().verdict);
    }

    #[test]
    fn tau_on_c() {
        let l1 = Chart::elliptic(1, 0, 0);
        let c1 = make_correspondence(&l1, &l1).unwrap();
        let data = DualityData::untwisted(c1, angle_pair(&make_correspondence(&l1, &l1).unwrap(), 0, 0, Qi::one())).unwrap();
        let rho = b(l1, 0).wedge(&b(l1, 1)).scale(&Qi::i()).exp().unwrap();
        let t = tau(&rho, &data).unwrap();
        let dlz = b(l1, 0).add(&b(l1, 1).scale(&Qi::i()));
        assert!(projective_eq(&t, &dlz));
        let back = tau_reverse(&t, &data).unwrap();
        assert!(projective_eq(&back, &rho));
    }

    #[test]
    fn tau_rejects_non_invariant() {
        let l1 = Chart::elliptic(1, 0, 0);
        let c1 = make_correspondence(&l1, &l1).unwrap();
        let f = angle_pair(&c1, 0, 0, Qi::one());
        let data = DualityData::untwisted(c1, f).unwrap();
        let z = Form::function(l1, FnElem::z(l1.sig(), 0));
        assert!(matches!(tau(&z, &data), Err(CalcError::NotInvariant(_))));
    }

    #[test]
    fn flat_connections_give_minus_f() {
        let l2 = Chart::elliptic(2, 0, 0);
        let c2 = make_correspondence(&l2, &l2).unwrap();
        let th = ConnectionForm { theta: vec![b(l2, 1), b(l2, 3)] };
        let act = TorusAction::standard(&l2);
        let f = build_f_from_connections(&th, &th, &c2, &act, &act).unwrap();
        let f1p = angle_pair(&c2, 0, 0, Qi::one()).add(&angle_pair(&c2, 1, 1, Qi::one()));
        assert_eq!(f, f1p.neg());
    }

    #[test]
    fn projective_ratio_with_parameters() {
        let l1 = Chart::elliptic(1, 0, 0);
        let lam = FnElem::param(l1.sig(), "lambda", 1);
        let a = b(l1, 0).scale_fn(&lam);
        let r = projective_ratio(&a.scale(&Qi::i()), &a).unwrap();
        assert_eq!(r.as_constant(), Some(Qi::i()));
        let r2 = projective_ratio(&a, &b(l1, 0)).unwrap();
        assert_eq!(r2, lam);
        assert!(!projective_eq(&b(l1, 0), &b(l1, 1)));
    }
}
