//! Residue maps along the strata of elliptic and real-log divisors.
//!
//! Residues contract with the normal frame vectors (`r_i d/dr_i`, `d/dtheta_i`
//! or `x_i d/dx_i`) and restrict the coefficients to the vanishing stratum.
//! A form `omega` evaluated on `(X, Y)` means `iota_Y iota_X omega`.
//!
//! Restricted values live on smaller charts. On `D[1]` the polar pair `i` is
//! removed. On the normal circle bundle (`res_r`) the angle `theta_i` survives
//! and becomes the first free angle of the smaller chart.

use serde::Serialize;

use crate::chart::{Chart, ChartKind, Leg};
use crate::coeffring::{FnElem, Key};
use crate::error::CalcError;
use crate::forms::{Form, Multivector};

/// Coordinates collapsed by a restriction and the shape of the result.
#[derive(Clone, Debug)]
struct Stratum {
    src: Chart,
    dst: Chart,
    vanishing: Vec<usize>,
    /// Source angle index -> target angle index.
    angle_map: Vec<Option<usize>>,
    /// Source radial / x index -> target index.
    coord_map: Vec<Option<usize>>,
}

impl Stratum {
    fn elliptic(src: &Chart, vanishing: &[usize], keep_angles: bool) -> Result<Self, CalcError> {
        if !matches!(src.kind, ChartKind::Elliptic | ChartKind::ComplexLog) {
            return Err(CalcError::ChartMismatch("elliptic residues need an elliptic chart".into()));
        }
        let mut v = vanishing.to_vec();
        v.sort();
        v.dedup();
        if v.len() != vanishing.len() || v.iter().any(|&i| i >= src.l) {
            return Err(CalcError::IndexOutOfRange(format!("polar indices {vanishing:?} on a chart with l = {}", src.l)));
        }
        let k = v.len();
        let dst = if keep_angles {
            Chart::elliptic(src.l - k, src.f + k, src.m)
        } else {
            Chart::elliptic(src.l - k, src.f, src.m)
        };
        let mut coord_map = vec![None; src.l];
        let mut angle_map = vec![None; src.l + src.f];
        let mut n = 0;
        for (i, slot) in coord_map.iter_mut().enumerate() {
            if !v.contains(&i) {
                *slot = Some(n);
                angle_map[i] = Some(n);
                n += 1;
            }
        }
        let mut next = src.l - k;
        if keep_angles {
            for &i in &v {
                angle_map[i] = Some(next);
                next += 1;
            }
        }
        for a in src.l..src.l + src.f {
            angle_map[a] = Some(next);
            next += 1;
        }
        Ok(Stratum { src: *src, dst, vanishing: v, angle_map, coord_map })
    }

    fn real_log(src: &Chart, vanishing: &[usize]) -> Result<Self, CalcError> {
        if src.kind != ChartKind::RealLog {
            return Err(CalcError::ChartMismatch("log residues need a real-log chart".into()));
        }
        let mut v = vanishing.to_vec();
        v.sort();
        v.dedup();
        if v.len() != vanishing.len() || v.iter().any(|&i| i >= src.l) {
            return Err(CalcError::IndexOutOfRange(format!("log indices {vanishing:?} on a chart with l = {}", src.l)));
        }
        let k = v.len();
        let dst = Chart::real_log(src.l - k, src.f, src.m);
        let nx = src.l + src.m;
        let mut coord_map = vec![None; nx];
        let mut n = 0;
        for (s, slot) in coord_map.iter_mut().enumerate() {
            if !v.contains(&s) {
                *slot = Some(n);
                n += 1;
            }
        }
        let angle_map = (0..src.f).map(Some).collect();
        Ok(Stratum { src: *src, dst, vanishing: v, angle_map, coord_map })
    }

    fn is_log(&self) -> bool {
        self.src.kind == ChartKind::RealLog
    }

    fn map_key(&self, k: &Key) -> Result<Option<Key>, CalcError> {
        let mut out = Key::unit(self.dst.sig());
        out.params = k.params.clone();
        if self.is_log() {
            for &s in &self.vanishing {
                if k.x[s] > 0 {
                    return Ok(None);
                }
            }
            out.r.clone_from(&k.r);
            for (s, &c) in k.x.iter().enumerate() {
                if let Some(t) = self.coord_map[s] {
                    out.x[t] = c;
                }
            }
            out.fourier.clone_from(&k.fourier);
            return Ok(Some(out));
        }
        for &i in &self.vanishing {
            if k.r[i] < 0 {
                return Err(CalcError::SingularRestriction);
            }
            if k.r[i] > 0 {
                return Ok(None);
            }
        }
        for (a, &b) in k.fourier.iter().enumerate() {
            match self.angle_map[a] {
                Some(t) => out.fourier[t] = b,
                None if b != 0 => return Err(CalcError::NotBasicAlongD),
                None => {}
            }
        }
        for (i, &a) in k.r.iter().enumerate() {
            if let Some(t) = self.coord_map[i] {
                out.r[t] = a;
            }
        }
        out.x.clone_from(&k.x);
        Ok(Some(out))
    }

    fn restrict_fn(&self, f: &FnElem) -> Result<FnElem, CalcError> {
        let mut terms = Vec::new();
        for (k, c) in f.terms() {
            if let Some(nk) = self.map_key(k)? {
                terms.push((nk, c.clone()));
            }
        }
        Ok(FnElem::from_terms(self.dst.sig(), terms))
    }

    fn map_leg(&self, leg: Leg) -> Option<Leg> {
        match leg {
            Leg::LogR(i) => self.coord_map[i].map(Leg::LogR),
            Leg::Ang(a) => self.angle_map[a].map(Leg::Ang),
            Leg::LogX(s) => self.coord_map[s].map(Leg::LogX),
            Leg::Dx(s) => {
                if self.is_log() {
                    self.coord_map[s].map(Leg::Dx)
                } else {
                    Some(Leg::Dx(s))
                }
            }
        }
    }

    fn restrict_form(&self, a: &Form) -> Result<Form, CalcError> {
        let restricted = {
            let mut terms = Vec::new();
            for (m, f) in a.terms() {
                terms.push((*m, self.restrict_fn(f)?));
            }
            terms
        };
        let src_legs = self.src.legs();
        let dst = self.dst;
        let mut out = Form::zero(dst);
        for (m, f) in restricted {
            if f.is_zero() {
                continue;
            }
            let mut piece = Form::function(dst, f);
            for (k, leg) in src_legs.iter().enumerate() {
                if m & (1 << k) != 0 {
                    let t = self.map_leg(*leg).ok_or_else(|| {
                        CalcError::Invalid(format!("leg {} survives restriction", self.src.leg_token(*leg)))
                    })?;
                    piece = piece.wedge(&Form::leg(dst, t)?);
                }
            }
            out = out.add(&piece);
        }
        Ok(out)
    }
}

fn frame_vector(chart: &Chart, leg: Leg) -> Result<Multivector, CalcError> {
    Multivector::leg(*chart, leg)
}

/// `omega(X_1, ..., X_k) = iota_{X_k} ... iota_{X_1} omega`.
fn eval_on(omega: &Form, legs: &[Leg]) -> Result<Form, CalcError> {
    let chart = omega.chart();
    let mut cur = omega.clone();
    for &l in legs {
        cur = frame_vector(&chart, l)?.contract(&cur)?;
    }
    Ok(cur)
}

/// Restriction of a function to `{r_i = 0, i in vanishing}`; the result
/// lives on the chart with those polar pairs removed.
pub fn restrict_to_stratum(f: &FnElem, chart: &Chart, vanishing: &[usize]) -> Result<FnElem, CalcError> {
    Stratum::elliptic(chart, vanishing, false)?.restrict_fn(f)
}

/// Chart of the stratum `{r_i = 0}` with (`keep_angles`) or without the
/// normal angles.
pub fn stratum_chart(chart: &Chart, vanishing: &[usize], keep_angles: bool) -> Result<Chart, CalcError> {
    Ok(Stratum::elliptic(chart, vanishing, keep_angles)?.dst)
}

/// `Res_q omega = iota_D^* (iota_{r_i d/dr_i ^ d/dtheta_i} omega)`.
pub fn res_q(omega: &Form, i: usize) -> Result<Form, CalcError> {
    let st = Stratum::elliptic(&omega.chart(), &[i], false)?;
    let c = eval_on(omega, &[Leg::LogR(i), Leg::Ang(i)])?;
    st.restrict_form(&c)
}

/// `Res_r omega = iota_{r_i d/dr_i} omega` restricted to `{r_i = 0}`,
/// keeping `theta_i` as a free angle.
pub fn res_r(omega: &Form, i: usize) -> Result<Form, CalcError> {
    let st = Stratum::elliptic(&omega.chart(), &[i], true)?;
    let c = eval_on(omega, &[Leg::LogR(i)])?;
    st.restrict_form(&c)
}

/// Second radial residue `iota_{r_j d/dr_j} iota_{r_i d/dr_i} omega` on
/// `{r_i = r_j = 0}`, keeping both normal angles.
pub fn res_r2(omega: &Form, i: usize, j: usize) -> Result<Form, CalcError> {
    if i == j {
        return Err(CalcError::Invalid("second residue needs two distinct indices".into()));
    }
    let st = Stratum::elliptic(&omega.chart(), &[i, j], true)?;
    let c = eval_on(omega, &[Leg::LogR(i), Leg::LogR(j)])?;
    st.restrict_form(&c)
}

/// Which pair of normal frame vectors a point residue pairs with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointPair {
    RR,
    RTheta,
    ThetaR,
    ThetaTheta,
}

/// Point residue on `D[2]`: the scalar coefficient pairing the named frame
/// vectors at `(i, j)`, restricted to `{r_i = r_j = 0}`.
pub fn res_point(omega: &Form, pair: PointPair, i: usize, j: usize) -> Result<FnElem, CalcError> {
    if i == j {
        return Err(CalcError::Invalid("point residues need two distinct indices".into()));
    }
    let legs = match pair {
        PointPair::RR => [Leg::LogR(i), Leg::LogR(j)],
        PointPair::RTheta => [Leg::LogR(i), Leg::Ang(j)],
        PointPair::ThetaR => [Leg::Ang(i), Leg::LogR(j)],
        PointPair::ThetaTheta => [Leg::Ang(i), Leg::Ang(j)],
    };
    let st = Stratum::elliptic(&omega.chart(), &[i, j], false)?;
    let c = eval_on(&omega.part(2), &legs)?;
    st.restrict_fn(&c.scalar_part())
}

/// `Res omega = iota_Z^* (iota_{x_i d/dx_i} omega)` on a real-log chart.
pub fn res_log(omega: &Form, i: usize) -> Result<Form, CalcError> {
    let st = Stratum::real_log(&omega.chart(), &[i])?;
    let c = eval_on(omega, &[Leg::LogX(i)])?;
    st.restrict_form(&c)
}

/// `Res^2_{x_i x_j} omega = omega(x_i d/dx_i, x_j d/dx_j)` on `{x_i = x_j = 0}`.
pub fn res_log2(omega: &Form, i: usize, j: usize) -> Result<FnElem, CalcError> {
    if i == j {
        return Err(CalcError::Invalid("second residue needs two distinct indices".into()));
    }
    let st = Stratum::real_log(&omega.chart(), &[i, j])?;
    let c = eval_on(&omega.part(2), &[Leg::LogX(i), Leg::LogX(j)])?;
    st.restrict_fn(&c.scalar_part())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidueKind {
    Q,
    R,
    R2,
    RR,
    RTheta,
    ThetaR,
    ThetaTheta,
    Log,
    Log2,
}

impl std::str::FromStr for ResidueKind {
    type Err = CalcError;
    fn from_str(s: &str) -> Result<Self, CalcError> {
        Ok(match s {
            "q" => ResidueKind::Q,
            "r" => ResidueKind::R,
            "r2" => ResidueKind::R2,
            "rr" => ResidueKind::RR,
            "rtheta" => ResidueKind::RTheta,
            "thetar" => ResidueKind::ThetaR,
            "thetatheta" => ResidueKind::ThetaTheta,
            "log" => ResidueKind::Log,
            "log2" => ResidueKind::Log2,
            _ => return Err(CalcError::Invalid(format!("unknown residue kind '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResidueValue {
    Form(Form),
    Scalar(FnElem),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueReport {
    pub kind: ResidueKind,
    /// Zero-based indices of the vanishing coordinates.
    pub locus: Vec<usize>,
    pub chart: Chart,
    pub value: ResidueValue,
}

/// Dispatches on `kind`; `at` holds one index (q, r, log) or two.
pub fn residue(omega: &Form, kind: ResidueKind, at: &[usize]) -> Result<ResidueReport, CalcError> {
    let need = match kind {
        ResidueKind::Q | ResidueKind::R | ResidueKind::Log => 1,
        _ => 2,
    };
    if at.len() != need {
        return Err(CalcError::Invalid(format!("residue {kind:?} needs {need} indices")));
    }
    let chart = omega.chart();
    let (value, dst) = match kind {
        ResidueKind::Q => (ResidueValue::Form(res_q(omega, at[0])?), stratum_chart(&chart, at, false)?),
        ResidueKind::R => (ResidueValue::Form(res_r(omega, at[0])?), stratum_chart(&chart, at, true)?),
        ResidueKind::R2 => (ResidueValue::Form(res_r2(omega, at[0], at[1])?), stratum_chart(&chart, at, true)?),
        ResidueKind::RR | ResidueKind::RTheta | ResidueKind::ThetaR | ResidueKind::ThetaTheta => {
            let pair = match kind {
                ResidueKind::RR => PointPair::RR,
                ResidueKind::RTheta => PointPair::RTheta,
                ResidueKind::ThetaR => PointPair::ThetaR,
                _ => PointPair::ThetaTheta,
            };
            (ResidueValue::Scalar(res_point(omega, pair, at[0], at[1])?), stratum_chart(&chart, at, false)?)
        }
        ResidueKind::Log => (ResidueValue::Form(res_log(omega, at[0])?), Stratum::real_log(&chart, at)?.dst),
        ResidueKind::Log2 => (ResidueValue::Scalar(res_log2(omega, at[0], at[1])?), Stratum::real_log(&chart, at)?.dst),
    };
    Ok(ResidueReport { kind, locus: at.to_vec(), chart: dst, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::Qi;

    fn c(l: usize, m: usize) -> Chart {
        Chart::elliptic(l, 0, m)
    }
    fn b(ch: Chart, k: usize) -> Form {
        Form::basis(ch, k)
    }

    #[test]
    fn restriction_examples() {
        let ch = c(1, 1);
        let s = ch.sig();
        assert!(restrict_to_stratum(&FnElem::r(s, 0, 2), &ch, &[0]).unwrap().is_zero());
        let f = FnElem::one(s).add(&FnElem::r(s, 0, 2).mul(&FnElem::x(s, 0, 1)));
        let g = restrict_to_stratum(&f, &ch, &[0]).unwrap();
        assert_eq!(g, FnElem::one(Chart::elliptic(0, 0, 1).sig()));
        assert_eq!(restrict_to_stratum(&FnElem::e(s, 0, 1), &ch, &[0]), Err(CalcError::NotBasicAlongD));
        assert_eq!(restrict_to_stratum(&FnElem::r(s, 0, -1), &ch, &[0]), Err(CalcError::SingularRestriction));
    }

    #[test]
    fn res_q_examples() {
        let ch = c(1, 0);
        let v = res_q(&b(ch, 0).wedge(&b(ch, 1)), 0).unwrap();
        assert_eq!(v, Form::one(Chart::elliptic(0, 0, 0)));
        let ch2 = c(2, 0);
        let om = b(ch2, 0).wedge(&b(ch2, 3)).add(&b(ch2, 1).wedge(&b(ch2, 2)));
        assert!(res_q(&om, 0).unwrap().is_zero());
        assert!(res_q(&om, 1).unwrap().is_zero());
        assert!(res_q(&Form::zero(ch2), 0).unwrap().is_zero());
    }

    #[test]
    fn res_r_examples() {
        let ch = c(1, 0);
        let v = res_r(&b(ch, 0).wedge(&b(ch, 1)), 0).unwrap();
        assert_eq!(v, Form::basis(Chart::elliptic(0, 1, 0), 0));
        assert!(res_r(&b(ch, 1), 0).unwrap().is_zero());
        // angle modes of theta_1 survive on the circle bundle
        let s = ch.sig();
        let a = b(ch, 0).scale_fn(&FnElem::e(s, 0, 2));
        let v = res_r(&a, 0).unwrap();
        assert_eq!(v.scalar_part(), FnElem::e(Chart::elliptic(0, 1, 0).sig(), 0, 2));
    }

    #[test]
    fn point_residues() {
        let ch = c(2, 0);
        let om = b(ch, 0).wedge(&b(ch, 2)).sub(&b(ch, 1).wedge(&b(ch, 3)));
        let one = FnElem::one(Chart::elliptic(0, 0, 0).sig());
        assert_eq!(res_point(&om, PointPair::RR, 0, 1).unwrap(), one);
        assert_eq!(res_point(&om, PointPair::ThetaTheta, 0, 1).unwrap(), one.neg());
        let om2 = b(ch, 0).wedge(&b(ch, 3)).add(&b(ch, 1).wedge(&b(ch, 2)));
        assert_eq!(res_point(&om2, PointPair::RTheta, 0, 1).unwrap(), one);
        assert_eq!(res_point(&om2, PointPair::ThetaR, 0, 1).unwrap(), one);
        // swapping the slots flips the sign
        assert_eq!(res_point(&om2, PointPair::RTheta, 1, 0).unwrap(), one.neg());
        let ch3 = c(2, 2);
        let dx = Form::leg(ch3, Leg::Dx(0)).unwrap().wedge(&Form::leg(ch3, Leg::Dx(1)).unwrap());
        for p in [PointPair::RR, PointPair::RTheta, PointPair::ThetaR, PointPair::ThetaTheta] {
            assert!(res_point(&dx, p, 0, 1).unwrap().is_zero());
        }
    }

    #[test]
    fn log_residues() {
        let ch = Chart::real_log(1, 0, 1);
        let a = Form::leg(ch, Leg::LogX(0)).unwrap().wedge(&Form::leg(ch, Leg::Dx(1)).unwrap());
        let v = res_log(&a, 0).unwrap();
        assert_eq!(v, Form::leg(Chart::real_log(0, 0, 1), Leg::Dx(0)).unwrap());
        let ch2 = Chart::real_log(2, 0, 0);
        let w = Form::leg(ch2, Leg::LogX(0)).unwrap().wedge(&Form::leg(ch2, Leg::LogX(1)).unwrap());
        assert_eq!(res_log2(&w, 0, 1).unwrap().as_constant(), Some(Qi::one()));
        // dx_1 = x_1 dlog x_1 is smooth
        let sm = Form::leg(ch2, Leg::LogX(0)).unwrap().scale_fn(&FnElem::x(ch2.sig(), 0, 1));
        assert!(res_log(&sm, 0).unwrap().is_zero());
    }

    #[test]
    fn smooth_forms_have_no_residues() {
        let ch = c(1, 1);
        let s = ch.sig();
        // dx ^ dy = r^2 dlog r ^ dtheta, dz = z (dlog r + i dtheta)
        let area = b(ch, 0).wedge(&b(ch, 1)).scale_fn(&FnElem::r(s, 0, 2));
        assert!(res_q(&area, 0).unwrap().is_zero());
        assert!(res_r(&area, 0).unwrap().is_zero());
        let dz = b(ch, 0).add(&b(ch, 1).scale(&Qi::i())).scale_fn(&FnElem::z(s, 0));
        assert!(res_r(&dz, 0).unwrap().is_zero());
    }

    #[test]
    fn residue_anticommutes_with_d() {
        // iota_{r d/dr} d + d iota_{r d/dr} = L_{r d/dr}, which vanishes on r = 0
        let ch = c(1, 1);
        let s = ch.sig();
        let th = b(ch, 0)
            .scale_fn(&FnElem::x(s, 0, 2).add(&FnElem::r(s, 0, 2)))
            .add(&b(ch, 1).scale_fn(&FnElem::x(s, 0, 1)));
        let lhs = res_r(&th.d(), 0).unwrap();
        let rhs = res_r(&th, 0).unwrap().d();
        assert_eq!(lhs, rhs.neg());
    }

    #[test]
    fn dispatch() {
        let ch = c(1, 0);
        let rep = residue(&b(ch, 0).wedge(&b(ch, 1)), "q".parse().unwrap(), &[0]).unwrap();
        assert_eq!(rep.chart, Chart::elliptic(0, 0, 0));
        assert!(residue(&Form::zero(ch), ResidueKind::RR, &[0]).is_err());
    }
}
