//! Blow-ups of fixed points in coordinate charts.
//!
//! Chart `i` of the blow-up of `C^l` at the origin has coordinates
//! `(v_1, ..., z_i, ..., v_l)` and blows down by `z_j = z_i v_j` for `j != i`.
//! In polar terms `r_j -> r_i r_j` and `theta_j -> theta_i + theta_j`.

use crate::chart::{Atlas, Chart, ChartKind, Divisor, DivisorKind, Transition, TorusAction};
use crate::coeffring::{is_smooth_fn, substitute, FnElem, MonomialMap};
use crate::error::CalcError;
use crate::forms::{pullback, Form};
use crate::tduality::{make_correspondence, CorrChart, DualityData};

#[derive(Clone, Debug, PartialEq)]
pub struct BlowdownMap {
    pub l: usize,
    /// Zero-based distinguished index.
    pub i: usize,
    pub source: Chart,
    pub target: Chart,
    /// Target coordinates in terms of source coordinates.
    pub map: MonomialMap,
}

fn blowdown_exponents(l: usize, i: usize) -> Vec<Vec<i32>> {
    (0..l)
        .map(|j| {
            let mut row = vec![0; l];
            row[j] += 1;
            if j != i {
                row[i] += 1;
            }
            row
        })
        .collect()
}

/// Chart `i` (zero-based) of the blow-up of `C^l x R^m` at the origin.
pub fn blowdown_chart(l: usize, i: usize, m: usize) -> Result<BlowdownMap, CalcError> {
    if i >= l {
        return Err(CalcError::IndexOutOfRange(format!("blow-up chart {} of {l}", i + 1)));
    }
    let c = Chart::elliptic(l, 0, m);
    let e = blowdown_exponents(l, i);
    let x = (0..m).map(|s| (0..m).map(|t| (s == t) as i32).collect()).collect();
    let map = MonomialMap::new(c.sig(), c.sig(), e.clone(), e, x)?;
    Ok(BlowdownMap { l, i, source: c, target: c, map })
}

/// `p^* alpha` on the blown-up chart.
pub fn pullback_blowdown(alpha: &Form, bd: &BlowdownMap) -> Result<Form, CalcError> {
    if alpha.chart().with_kind(ChartKind::Elliptic) != bd.target {
        return Err(CalcError::ChartMismatch("form does not live on the blow-down target".into()));
    }
    pullback(&alpha.with_chart_kind(ChartKind::Elliptic), &bd.map, &bd.source)
}

/// Radical of the pulled-back generator: every positive radial exponent
/// becomes 2.
pub fn induced_divisor(div: &Divisor, bd: &BlowdownMap) -> Result<Divisor, CalcError> {
    if div.kind != DivisorKind::Elliptic {
        return Err(CalcError::Invalid("blow-ups act on elliptic divisors".into()));
    }
    let pulled = substitute(&div.generator, &bd.map)?;
    Ok(Divisor { generator: radical(&pulled)?, kind: DivisorKind::Elliptic })
}

fn radical(g: &FnElem) -> Result<FnElem, CalcError> {
    let (k, _) = g.as_monomial().ok_or_else(|| CalcError::NotMonomial("divisor generator".into()))?;
    let mut key = k.clone();
    for a in key.r.iter_mut() {
        if *a > 0 {
            *a = 2;
        }
    }
    Ok(FnElem::monomial(g.sig(), crate::coeffring::Qi::one(), key))
}

/// Volume form of the elliptic algebroid of `div`: the full elliptic frame
/// volume times `r_j^2` for every pair outside the support.
pub fn algebroid_volume(chart: &Chart, div: &Divisor) -> Result<Form, CalcError> {
    let sig = chart.sig();
    let mut full = Form::one(*chart);
    for k in 0..chart.dim() {
        full = full.wedge(&Form::basis(*chart, k));
    }
    let supp = div.support();
    let mut w = FnElem::one(sig);
    for j in 0..chart.l {
        if !supp.contains(&j) {
            w = w.mul(&FnElem::r(sig, j, 2));
        }
    }
    Ok(full.scale_fn(&w))
}

/// Whether `p^* Omega_I` is a unit multiple of `Omega_{I~}` for the given
/// divisor `induced` on the blown-up chart.
pub fn fiberwise_iso_with(bd: &BlowdownMap, div: &Divisor, induced: &Divisor) -> Result<bool, CalcError> {
    let vol = algebroid_volume(&bd.target, div)?;
    let pulled = pullback_blowdown(&vol, bd)?.top_coeff();
    let mine = algebroid_volume(&bd.source, induced)?.top_coeff();
    let ratio = pulled.mul(&mine.inv_monomial()?);
    let Some((k, _)) = ratio.as_monomial() else { return Ok(false) };
    Ok(is_smooth_fn(&ratio, &bd.source) && k.r.iter().all(|&a| a == 0))
}

/// The blow-down is a fibrewise isomorphism onto the algebroid of `div`
/// from the algebroid of the induced divisor.
pub fn fiberwise_iso_check(bd: &BlowdownMap, div: &Divisor) -> Result<bool, CalcError> {
    let induced = induced_divisor(div, bd)?;
    fiberwise_iso_with(bd, div, &induced)
}

/// Lift of a torus action to the blown-up chart: a generator with angle
/// components `a` lifts to `a_i` on `theta_i` and `a_j - a_i` on `theta_j`.
pub fn lifted_action(bd: &BlowdownMap, action: &TorusAction) -> Result<TorusAction, CalcError> {
    if action.n_angles() != bd.l {
        return Err(CalcError::ChartMismatch("action does not act on the blown-up pairs".into()));
    }
    let i = bd.i;
    let m = action
        .matrix
        .iter()
        .map(|row| row.iter().enumerate().map(|(j, &a)| if j == i { a } else { a - row[i] }).collect())
        .collect();
    TorusAction::new(m)
}

/// Correspondence of two blown-up charts with the map `Q` onto the original
/// correspondence.
pub fn blowup_correspondence(bd: &BlowdownMap) -> Result<(CorrChart, MonomialMap), CalcError> {
    let corr = make_correspondence(&bd.target, &bd.target)?;
    let blown = make_correspondence(&bd.source, &bd.source)?;
    let l = bd.l;
    let (src, dst) = (corr.chart.sig(), blown.chart.sig());
    let e = blowdown_exponents(l, bd.i);
    let mut ang = vec![vec![0; dst.na]; src.na];
    for a in 0..l {
        for b in 0..l {
            ang[a][b] = e[a][b];
            ang[l + a][l + b] = e[a][b];
        }
    }
    let x = (0..src.nx).map(|s| (0..dst.nx).map(|t| (s == t) as i32).collect()).collect();
    let q = MonomialMap::new(src, dst, e, ang, x)?;
    Ok((blown, q))
}

/// Pulls duality data on `C^l` back to the blown-up charts: `Q^* F`,
/// `q^* H`, `qhat^* Hhat` and the lifted actions.
pub fn blowup_duality(data: &DualityData, bd: &BlowdownMap) -> Result<DualityData, CalcError> {
    let (blown, q) = blowup_correspondence(bd)?;
    if data.corr.chart != Chart::correspondence(bd.l, 0, bd.target.m) {
        return Err(CalcError::ChartMismatch("duality data does not match the blow-up".into()));
    }
    let f = pullback(&data.f, &q, &blown.chart)?;
    let h = pullback_blowdown(&data.h, bd)?;
    let hh = pullback_blowdown(&data.hhat, bd)?;
    let la = lifted_action(bd, &data.left_action)?;
    let ra = lifted_action(bd, &data.right_action)?;
    DualityData::new(blown, f, h, hh, la, ra)
}

/// The `l` charts of the blow-up of `C^l` with the gluing maps between them.
pub fn blowup_atlas(l: usize, m: usize) -> Result<Atlas, CalcError> {
    let c = Chart::elliptic(l, 0, m);
    let mut transitions = Vec::new();
    for src in 0..l {
        for dst in 0..l {
            if src == dst {
                continue;
            }
            // chart src: w_src = z_src, w_j = z_j / z_src
            // chart dst: u_dst = z_dst, u_j = z_j / z_dst
            let rows: Vec<Vec<i32>> = (0..l)
                .map(|j| {
                    let mut row = vec![0; l];
                    if j == src {
                        row[dst] += 1;
                        row[src] += 1;
                    } else if j == dst {
                        row[src] -= 1;
                    } else {
                        row[j] += 1;
                        row[src] -= 1;
                    }
                    row
                })
                .collect();
            let x = (0..m).map(|s| (0..m).map(|t| (s == t) as i32).collect()).collect();
            let map = MonomialMap::new(c.sig(), c.sig(), rows.clone(), rows, x)?;
            transitions.push(Transition { src, dst, map, nonzero: vec![src] });
        }
    }
    let mut triples = Vec::new();
    for a in 0..l {
        for b in 0..l {
            for cc in 0..l {
                if a != b && b != cc && a != cc {
                    triples.push((a, b, cc));
                }
            }
        }
    }
    Ok(Atlas { charts: vec![c; l], transitions, triples })
}
