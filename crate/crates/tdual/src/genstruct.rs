//! Generalized geometry on `A + A*`: pairing, Dorfman bracket, Clifford
//! action, spinor purity and nondegeneracy, stable-structure residue
//! conditions, twisted closedness and descent of spinor lines.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::{Chart, ChartKind};
use crate::cli::print::{print_fn, print_form};
use crate::coeffring::{is_smooth_fn, FnElem, Key, Point, Qi};
use crate::error::CalcError;
use crate::forms::{lie_derivative, to_complex_frame, Form, Mask, Multivector};
use crate::report::Report;
use crate::residues::{res_point, res_q, PointPair};

/// `X + xi` with `X` a vector field and `xi` a one-form.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSection {
    pub vec: Multivector,
    pub cov: Form,
}

impl GenSection {
    pub fn new(vec: Multivector, cov: Form) -> Result<Self, CalcError> {
        if vec.chart() != cov.chart() {
            return Err(CalcError::ChartMismatch("vector and covector parts".into()));
        }
        if !vec.is_vector() || !cov.is_homogeneous(1) {
            return Err(CalcError::Invalid("a section needs a vector field and a one-form".into()));
        }
        Ok(GenSection { vec, cov })
    }
    pub fn chart(&self) -> Chart {
        self.cov.chart()
    }
    pub fn zero(chart: Chart) -> Self {
        GenSection { vec: Multivector::zero(chart), cov: Form::zero(chart) }
    }
    pub fn add(&self, o: &GenSection) -> GenSection {
        GenSection { vec: self.vec.add(&o.vec), cov: self.cov.add(&o.cov) }
    }
    pub fn sub(&self, o: &GenSection) -> GenSection {
        GenSection { vec: self.vec.sub(&o.vec), cov: self.cov.sub(&o.cov) }
    }
}

fn same(a: &Chart, b: &Chart) -> Result<(), CalcError> {
    if a != b {
        return Err(CalcError::ChartMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// `<X + xi, Y + eta> = (eta(X) + xi(Y)) / 2`.
pub fn pairing(u: &GenSection, v: &GenSection) -> Result<FnElem, CalcError> {
    same(&u.chart(), &v.chart())?;
    let a = u.vec.contract(&v.cov)?.scalar_part();
    let b = v.vec.contract(&u.cov)?.scalar_part();
    Ok(a.add(&b).scale(&Qi::ratio(1, 2)))
}

/// `[[X + xi, Y + eta]]_H = [X, Y] + L_X eta - iota_Y d xi + iota_X iota_Y H`.
pub fn dorfman(u: &GenSection, v: &GenSection, h: &Form) -> Result<GenSection, CalcError> {
    same(&u.chart(), &v.chart())?;
    same(&u.chart(), &h.chart())?;
    if !h.is_zero() && (!h.is_homogeneous(3) || !h.d().is_zero()) {
        return Err(CalcError::NotClosed);
    }
    let vec = u.vec.bracket(&v.vec);
    let cov = lie_derivative(&u.vec, &v.cov)?
        .sub(&v.vec.contract(&u.cov.d())?)
        .add(&u.vec.contract(&v.vec.contract(h)?)?);
    Ok(GenSection { vec, cov })
}

/// `(X + xi) . rho = iota_X rho + xi ^ rho`.
pub fn clifford(u: &GenSection, rho: &Form) -> Result<Form, CalcError> {
    same(&u.chart(), &rho.chart())?;
    Ok(u.vec.contract(rho)?.add(&u.cov.wedge(rho)))
}

/// Spinor `rho` with background three-form `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor {
    pub rho: Form,
    pub h: Form,
}

impl Spinor {
    pub fn new(rho: Form, h: Form) -> Result<Self, CalcError> {
        same(&rho.chart(), &h.chart())?;
        if !h.d().is_zero() {
            return Err(CalcError::NotClosed);
        }
        Ok(Spinor { rho, h })
    }
    pub fn untwisted(rho: Form) -> Self {
        let h = Form::zero(rho.chart());
        Spinor { rho, h }
    }
}

/// Exact point of the open dense locus: every `r_i = 1`, angles at rational
/// points of the unit circle, rational `x` and parameter values.
#[derive(Clone, Debug)]
pub struct Sample {
    pub point: Point,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Sample {
    pub fn random(chart: &Chart, params: &[String], rng: &mut ChaCha8Rng) -> Sample {
        let sig = chart.sig();
        let circle = |rng: &mut ChaCha8Rng| -> Qi {
            let t = rat(rng.gen_range(-9..=9), rng.gen_range(1..=7));
            let one = rat(1, 1);
            let den = &one + &t * &t;
            Qi::new((&one - &t * &t) / &den, (rat(2, 1) * &t) / &den)
        };
        let nonzero = |rng: &mut ChaCha8Rng| -> Qi {
            let mut n = 0;
            while n == 0 {
                n = rng.gen_range(-9..=9);
            }
            Qi::from_rational(rat(n, rng.gen_range(1..=5)))
        };
        let r = vec![Qi::one(); sig.nr];
        let e = (0..sig.na).map(|_| circle(rng)).collect();
        let x = (0..sig.nx).map(|_| nonzero(rng)).collect();
        let params = params.iter().map(|p| (p.clone(), nonzero(rng))).collect();
        Sample { point: Point { r, e, x, params } }
    }

    /// `count` samples from a seeded stream.
    pub fn batch(chart: &Chart, params: &[String], seed: u64, count: usize) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Sample::random(chart, params, &mut rng)).collect()
    }
}

/// Formal parameter names occurring in a form.
pub fn form_params(a: &Form) -> Vec<String> {
    let mut v: Vec<String> = a.terms().flat_map(|(_, f)| f.param_names()).collect();
    v.sort();
    v.dedup();
    v
}

fn eval_form(a: &Form, s: &Sample) -> Result<BTreeMap<Mask, Qi>, CalcError> {
    let mut out = BTreeMap::new();
    for (m, f) in a.terms() {
        let v = f.eval(&s.point)?;
        if !v.is_zero() {
            out.insert(*m, v);
        }
    }
    Ok(out)
}

/// Rank of a matrix over `Q(i)` by exact elimination.
pub fn rank_qi(mut rows: Vec<Vec<Qi>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][c].inv().expect("pivot is nonzero");
        let pivot: Vec<Qi> = rows[rank].iter().map(|v| v * &inv).collect();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = rows[r][c].clone();
                for k in c..ncols {
                    let d = &f * &pivot[k];
                    rows[r][k] = &rows[r][k] - &d;
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Dimension of the annihilator `{u : u . rho = 0}` at a sample point.
/// `rho` is pure iff this equals the frame rank.
pub fn annihilator_rank(sp: &Spinor, s: &Sample) -> Result<usize, CalcError> {
    let rho = &sp.rho;
    let chart = rho.chart();
    let n = chart.dim();
    let mut images = Vec::with_capacity(2 * n);
    for k in 0..n {
        images.push(eval_form(&rho.contract_leg(k), s)?);
    }
    for k in 0..n {
        images.push(eval_form(&Form::basis(chart, k).wedge(rho), s)?);
    }
    let mut masks: Vec<Mask> = images.iter().flat_map(|m| m.keys().copied()).collect();
    masks.sort();
    masks.dedup();
    let rows: Vec<Vec<Qi>> = masks
        .iter()
        .map(|m| images.iter().map(|img| img.get(m).cloned().unwrap_or_else(Qi::zero)).collect())
        .collect();
    Ok(2 * n - rank_qi(rows))
}

/// Top-degree coefficient of the Mukai pairing `rho ^ sigma(conj rho)`.
pub fn mukai_top(rho: &Form) -> FnElem {
    rho.wedge(&rho.conj().reversal()).top_coeff()
}

/// `(rho, conj rho) != 0` at the sample.
pub fn mukai_nondeg(sp: &Spinor, s: &Sample) -> Result<bool, CalcError> {
    Ok(!mukai_top(&sp.rho).eval(&s.point)?.is_zero())
}

/// `d rho + H ^ rho = 0`.
pub fn dh_closed(sp: &Spinor) -> bool {
    d_h(&sp.rho, &sp.h).is_zero()
}

/// Twisted differential `d_H = d + H ^`.
pub fn d_h(rho: &Form, h: &Form) -> Form {
    rho.d().add(&h.wedge(rho))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpinorSample {
    pub kernel_dim: usize,
    pub mukai_nonzero: bool,
}

/// Purity and nondegeneracy at `count` seeded samples plus exact closedness.
pub fn check_spinor(sp: &Spinor, seed: u64, count: usize) -> Result<(Report, Vec<SpinorSample>), CalcError> {
    let chart = sp.rho.chart();
    let n = chart.dim();
    let params = form_params(&sp.rho);
    let mut rep = Report::new("check-spinor");
    let mut out = Vec::new();
    for (idx, s) in Sample::batch(&chart, &params, seed, count).iter().enumerate() {
        let k = annihilator_rank(sp, s)?;
        let m = mukai_nondeg(sp, s)?;
        rep.push(format!("pure@{idx}"), k == n, format!("kernel dimension {k} of {n}"));
        rep.push(format!("mukai@{idx}"), m, String::new());
        out.push(SpinorSample { kernel_dim: k, mukai_nonzero: m });
    }
    rep.push("dH-closed", dh_closed(sp), String::new());
    Ok((rep, out))
}

/// Residue conditions for an elliptic symplectic form to induce a stable
/// generalized complex structure: `Res_q = 0` on every component,
/// `Res_{theta_i r_j} = Res_{r_i theta_j}` and `Res_{r_i r_j} = -Res_{theta_i theta_j}`
/// on every double stratum.
pub fn stable_check(omega: &Form) -> Result<Report, CalcError> {
    let chart = omega.chart();
    let mut rep = Report::new("check-stable");
    let closed = omega.d().is_zero();
    rep.push("closed", closed, String::new());
    if !closed {
        return Ok(rep);
    }
    let n = chart.dim();
    if n.is_multiple_of(2) {
        let mut p = Form::one(chart);
        for _ in 0..n / 2 {
            p = p.wedge(omega);
        }
        let top = p.top_coeff();
        rep.push("nondegenerate", !top.is_zero(), format!("top coefficient of omega^{} = {}", n / 2, print_fn(&top)));
    } else {
        rep.push("nondegenerate", false, "odd frame rank".to_string());
    }
    for i in 0..chart.l {
        let v = res_q(omega, i)?;
        rep.push(format!("res_q[{}]", i + 1), v.is_zero(), print_form(&v));
    }
    for i in 0..chart.l {
        for j in i + 1..chart.l {
            let tr = res_point(omega, PointPair::ThetaR, i, j)?;
            let rt = res_point(omega, PointPair::RTheta, i, j)?;
            rep.push(
                format!("symmetric[{},{}]", i + 1, j + 1),
                tr == rt,
                format!("Res_theta r = {}, Res_r theta = {}", print_fn(&tr), print_fn(&rt)),
            );
            let rr = res_point(omega, PointPair::RR, i, j)?;
            let tt = res_point(omega, PointPair::ThetaTheta, i, j)?;
            rep.push(
                format!("antisymmetric[{},{}]", i + 1, j + 1),
                rr == tt.neg(),
                format!("Res_rr = {}, Res_theta theta = {}", print_fn(&rr), print_fn(&tt)),
            );
        }
    }
    Ok(rep)
}

/// Whether the monomial rescaling `f rho` is a smooth spinor whose Mukai
/// pairing stays nonzero along the whole divisor.
pub fn descends_with(rho: &Form, f: &FnElem) -> Result<bool, CalcError> {
    let chart = rho.chart();
    let frho = rho.scale_fn(f);
    let c = to_complex_frame(&frho)?;
    if !c.terms().all(|(_, g)| is_smooth_fn(g, &chart)) {
        return Ok(false);
    }
    let conj = to_complex_frame(&frho.conj().reversal())?;
    let mut top = FnElem::zero(chart.sig());
    let n = chart.dim();
    let full: Mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for (ma, fa) in c.terms() {
        for (mb, fb) in conj.terms() {
            if ma | mb == full {
                if let Some(s) = crate::forms::wedge_sign(*ma, *mb) {
                    top = top.add(&fa.mul(fb).scale(&Qi::int(s)));
                }
            }
        }
    }
    let at_origin = top.filter_map_keys(chart.sig(), |k| {
        if k.r.iter().all(|&a| a == 0) {
            Some(k.clone())
        } else {
            None
        }
    });
    Ok(!at_origin.is_zero())
}

/// Result of a descent search.
#[derive(Clone, Debug)]
pub struct Descent {
    pub witness: Option<FnElem>,
    pub searched: usize,
}

/// Searches monomial units `r^a e^{i b theta}` with `|a_i|, |b_i| <= M`,
/// smallest total degree first, for a rescaling of `rho` that extends as a
/// smooth nondegenerate spinor across the divisor.
pub fn descends(sp: &Spinor, seed: u64) -> Result<Descent, CalcError> {
    let rho = &sp.rho;
    let chart = rho.chart();
    if !matches!(chart.kind, ChartKind::Elliptic | ChartKind::ComplexLog) {
        return Err(CalcError::ChartMismatch("descent is decided on elliptic charts".into()));
    }
    let params = form_params(rho);
    for s in Sample::batch(&chart, &params, seed, 3) {
        if annihilator_rank(sp, &s)? != chart.dim() {
            return Err(CalcError::NotPure("annihilator is not maximal".into()));
        }
        if !mukai_nondeg(sp, &s)? {
            return Err(CalcError::NotPure("Mukai pairing vanishes".into()));
        }
    }
    let cf = to_complex_frame(rho)?;
    let bound = cf.terms().map(|(_, f)| f.max_abs_exponent()).max().unwrap_or(0).max(1);
    let l = chart.l;
    let sig = chart.sig();
    let mut cands: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..2 * l {
        cands = cands
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    cands.sort_by_key(|v| (v.iter().map(|e| e.abs()).sum::<i32>(), v.clone()));
    let mut searched = 0;
    for v in cands {
        searched += 1;
        let mut key = Key::unit(sig);
        for i in 0..l {
            key.r[i] = v[2 * i];
            key.fourier[i] = v[2 * i + 1];
        }
        let f = FnElem::monomial(sig, Qi::one(), key);
        if descends_with(rho, &f)? {
            return Ok(Descent { witness: Some(f), searched });
        }
    }
    Ok(Descent { witness: None, searched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Leg;

    fn c2() -> Chart {
        Chart::elliptic(2, 0, 0)
    }
    fn b(ch: Chart, k: usize) -> Form {
        Form::basis(ch, k)
    }
    fn omega(ch: Chart) -> Form {
        b(ch, 0).wedge(&b(ch, 3)).add(&b(ch, 1).wedge(&b(ch, 2)))
    }
    fn v(ch: Chart, k: usize) -> Multivector {
        Multivector::basis(ch, k)
    }

    #[test]
    fn pairing_examples() {
        let ch = Chart::elliptic(1, 0, 0);
        let x = GenSection::new(v(ch, 0), Form::zero(ch)).unwrap();
        let xi = GenSection::new(Multivector::zero(ch), b(ch, 0)).unwrap();
        assert_eq!(pairing(&x, &xi).unwrap().as_constant(), Some(Qi::ratio(1, 2)));
        let th = GenSection::new(v(ch, 1), Form::zero(ch)).unwrap();
        assert!(pairing(&th, &xi).unwrap().is_zero());
        let u = x.add(&xi);
        assert_eq!(pairing(&u, &u).unwrap().as_constant(), Some(Qi::one()));
    }

    #[test]
    fn dorfman_examples() {
        let ch = Chart::elliptic(1, 0, 0);
        let s = ch.sig();
        let h = Form::zero(ch);
        let a = GenSection::new(v(ch, 0), Form::zero(ch)).unwrap();
        let t = GenSection::new(v(ch, 1), Form::zero(ch)).unwrap();
        assert_eq!(dorfman(&a, &t, &h).unwrap(), GenSection::zero(ch));
        let eta = b(ch, 0).scale_fn(&FnElem::e(s, 0, 1));
        let w = GenSection::new(Multivector::zero(ch), eta.clone()).unwrap();
        let br = dorfman(&t, &w, &h).unwrap();
        assert_eq!(br.cov, eta.scale(&Qi::i()));
        assert!(br.vec.is_zero());
        let bad = Form::basis(Chart::elliptic(1, 0, 0), 0);
        assert!(dorfman(&t, &w, &bad).is_err());
    }

    #[test]
    fn clifford_examples() {
        let ch = Chart::elliptic(1, 0, 0);
        let x = GenSection::new(v(ch, 0), Form::zero(ch)).unwrap();
        assert_eq!(clifford(&x, &b(ch, 0).wedge(&b(ch, 1))).unwrap(), b(ch, 1));
        let xi = GenSection::new(Multivector::zero(ch), b(ch, 0)).unwrap();
        assert_eq!(clifford(&xi, &Form::one(ch)).unwrap(), b(ch, 0));
    }

    #[test]
    fn rank_examples() {
        let ch = c2();
        let s = &Sample::batch(&ch, &[], 7, 1)[0];
        let sym = Spinor::untwisted(omega(ch).scale(&Qi::i()).exp().unwrap());
        assert_eq!(annihilator_rank(&sym, s).unwrap(), 4);
        let cx = Spinor::untwisted(Form::dlog_z(ch, 0).wedge(&Form::dlog_z(ch, 1)));
        assert_eq!(annihilator_rank(&cx, s).unwrap(), 4);
        let mixed = Spinor::untwisted(Form::one(ch).add(&b(ch, 0).wedge(&b(ch, 1)).wedge(&b(ch, 2))));
        assert!(annihilator_rank(&mixed, s).unwrap() < 4);
    }

    #[test]
    fn mukai_examples() {
        let ch = c2();
        let s = &Sample::batch(&ch, &[], 3, 1)[0];
        let sym = Spinor::untwisted(omega(ch).scale(&Qi::i()).exp().unwrap());
        assert!(mukai_nondeg(&sym, s).unwrap());
        let cx = Spinor::untwisted(Form::dlog_z(ch, 0).wedge(&Form::dlog_z(ch, 1)));
        assert!(mukai_nondeg(&cx, s).unwrap());
        assert!(!mukai_nondeg(&Spinor::untwisted(Form::dlog_z(ch, 0)), s).unwrap());
    }

    #[test]
    fn stable_examples() {
        let ch = c2();
        assert!(stable_check(&omega(ch)).unwrap().passed());
        let om2 = b(ch, 0).wedge(&b(ch, 2)).sub(&b(ch, 1).wedge(&b(ch, 3)));
        assert!(stable_check(&om2).unwrap().passed());
        let ch3 = Chart::elliptic(1, 0, 2);
        let lam = FnElem::param(ch3.sig(), "lambda", 1);
        let om3 = b(ch3, 0).wedge(&b(ch3, 1)).scale_fn(&lam).add(
            &Form::leg(ch3, Leg::Dx(0)).unwrap().wedge(&Form::leg(ch3, Leg::Dx(1)).unwrap()),
        );
        let rep = stable_check(&om3).unwrap();
        assert!(!rep.get("res_q[1]").unwrap().verdict);
        assert_eq!(rep.get("res_q[1]").unwrap().detail, "@lambda");
        assert!(rep.get("nondegenerate").unwrap().verdict);
    }

    #[test]
    fn closedness_examples() {
        let ch = c2();
        let s = ch.sig();
        let z12 = FnElem::z(s, 0).mul(&FnElem::z(s, 1));
        let dz = |i: usize| Form::dlog_z(ch, i).scale_fn(&FnElem::z(s, i));
        let rho = Form::function(ch, z12.clone()).add(&dz(0).wedge(&dz(1)));
        // z1 z2 + dz1 ^ dz2 is integrable, d rho = dlog(z1 z2) ^ rho, but not closed;
        // its rescaling by 1/(z1 z2) is
        assert!(!dh_closed(&Spinor::untwisted(rho.clone())));
        let xi = Form::dlog_z(ch, 0).add(&Form::dlog_z(ch, 1));
        assert_eq!(rho.d(), xi.wedge(&rho));
        let resc = rho.scale_fn(&z12.inv_monomial().unwrap());
        assert!(dh_closed(&Spinor::untwisted(resc)));
        assert!(dh_closed(&Spinor::untwisted(omega(ch).scale(&Qi::i()).exp().unwrap())));
        let bad = Form::function(ch, FnElem::z(s, 0)).add(&dz(0).wedge(&dz(1)));
        assert!(!dh_closed(&Spinor::untwisted(bad)));
    }

    #[test]
    fn descent_examples() {
        let ch = c2();
        let s = ch.sig();
        let rho = Form::dlog_z(ch, 0).wedge(&Form::dlog_z(ch, 1));
        let d = descends(&Spinor::untwisted(rho), 1).unwrap();
        assert_eq!(d.witness, Some(FnElem::z(s, 0).mul(&FnElem::z(s, 1))));
        let rho2 = Form::dlog_z(ch, 0).wedge(&Form::dlog_zbar(ch, 1));
        let d2 = descends(&Spinor::untwisted(rho2), 1).unwrap();
        assert_eq!(d2.witness, Some(FnElem::z(s, 0).mul(&FnElem::zbar(s, 1))));
        let a = b(ch, 0).wedge(&b(ch, 2)).add(&b(ch, 1).wedge(&b(ch, 3)));
        let d3 = descends(&Spinor::untwisted(a.scale(&Qi::i()).exp().unwrap()), 1).unwrap();
        assert!(d3.witness.is_none());
        assert!(descends(&Spinor::untwisted(Form::dlog_z(ch, 0)), 1).is_err());
    }
}
