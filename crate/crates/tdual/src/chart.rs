//! Local normal forms: charts, divisors, torus actions, atlases and
//! connection one-forms.
//!
//! Frame order is fixed per chart kind and determines every wedge sign:
//!
//! - elliptic / complex-log: `dlr1, dth1, ..., dlr_l, dth_l, dps1..dps_f, dx1..dx_m`
//! - real-log: `dlx1..dlx_l, dps1..dps_f, dx_{l+1}..dx_{l+m}`
//! - smooth: `dps1..dps_f, dx1..dx_m`
//! - correspondence: `dlr_i, dth_i, dthh_i` for each pair, then `dps`, `dpsh`, `dx`
//!
//! Complex-log forms are stored in the elliptic frame through
//! `dlog z = dlog r + i dtheta` and `dzbar = zbar (dlog r - i dtheta)`.

use serde::{Deserialize, Serialize};

use crate::coeffring::{substitute, torus_average, FnElem, MonomialMap, Sig};
use crate::error::CalcError;
use crate::forms::{Form, Multivector};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Elliptic,
    ComplexLog,
    RealLog,
    Smooth,
    /// Fibre product of two elliptic charts over their common base.
    Correspondence,
}

/// A frame covector (equivalently, its dual frame vector).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Leg {
    /// `dlog r_i`, dual to `r_i d/dr_i`.
    LogR(usize),
    /// `d angle_a`, dual to `d/d angle_a`.
    Ang(usize),
    /// `dlog x_s`, dual to `x_s d/dx_s`.
    LogX(usize),
    /// `dx_s`, dual to `d/dx_s`.
    Dx(usize),
}

/// Local model `C^l x T^f x R^m` with the frame selected by `kind`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub l: usize,
    pub f: usize,
    pub m: usize,
}

impl Chart {
    pub fn new(kind: ChartKind, l: usize, f: usize, m: usize) -> Result<Self, CalcError> {
        if kind == ChartKind::Smooth && l > 0 {
            return Err(CalcError::Invalid("a smooth chart has no polar pairs; use m for real coordinates".into()));
        }
        let c = Chart { kind, l, f, m };
        if c.legs().len() > 32 {
            return Err(CalcError::Invalid("frame larger than 32 covectors".into()));
        }
        Ok(c)
    }
    pub fn elliptic(l: usize, f: usize, m: usize) -> Self {
        Chart { kind: ChartKind::Elliptic, l, f, m }
    }
    pub fn complex_log(l: usize, f: usize, m: usize) -> Self {
        Chart { kind: ChartKind::ComplexLog, l, f, m }
    }
    pub fn real_log(l: usize, f: usize, m: usize) -> Self {
        Chart { kind: ChartKind::RealLog, l, f, m }
    }
    pub fn smooth(f: usize, m: usize) -> Self {
        Chart { kind: ChartKind::Smooth, l: 0, f, m }
    }
    pub fn correspondence(l: usize, f: usize, m: usize) -> Self {
        Chart { kind: ChartKind::Correspondence, l, f, m }
    }
    pub fn with_kind(&self, kind: ChartKind) -> Self {
        Chart { kind, ..*self }
    }

    pub fn sig(&self) -> Sig {
        match self.kind {
            ChartKind::Elliptic | ChartKind::ComplexLog => Sig::new(self.l, self.l + self.f, self.m),
            ChartKind::RealLog => Sig::new(0, self.f, self.l + self.m),
            ChartKind::Smooth => Sig::new(0, self.f, self.m),
            ChartKind::Correspondence => Sig::new(self.l, 2 * (self.l + self.f), self.m),
        }
    }

    /// Internal storage frame in canonical order.
    pub fn legs(&self) -> Vec<Leg> {
        let mut v = Vec::new();
        match self.kind {
            ChartKind::Elliptic | ChartKind::ComplexLog => {
                for i in 0..self.l {
                    v.push(Leg::LogR(i));
                    v.push(Leg::Ang(i));
                }
                v.extend((self.l..self.l + self.f).map(Leg::Ang));
                v.extend((0..self.m).map(Leg::Dx));
            }
            ChartKind::RealLog => {
                v.extend((0..self.l).map(Leg::LogX));
                v.extend((0..self.f).map(Leg::Ang));
                v.extend((self.l..self.l + self.m).map(Leg::Dx));
            }
            ChartKind::Smooth => {
                v.extend((0..self.f).map(Leg::Ang));
                v.extend((0..self.m).map(Leg::Dx));
            }
            ChartKind::Correspondence => {
                let h = self.l + self.f;
                for i in 0..self.l {
                    v.push(Leg::LogR(i));
                    v.push(Leg::Ang(i));
                    v.push(Leg::Ang(h + i));
                }
                v.extend((self.l..h).map(Leg::Ang));
                v.extend((h + self.l..2 * h).map(Leg::Ang));
                v.extend((0..self.m).map(Leg::Dx));
            }
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.legs().len()
    }

    pub fn leg_index(&self, leg: Leg) -> Option<usize> {
        self.legs().iter().position(|&l| l == leg)
    }

    /// Grammar name of angle `a` (`th1`, `ps1`, `thh1`, `psh1`).
    pub fn angle_name(&self, a: usize) -> String {
        let h = self.l + self.f;
        match self.kind {
            ChartKind::Elliptic | ChartKind::ComplexLog => {
                if a < self.l {
                    format!("th{}", a + 1)
                } else {
                    format!("ps{}", a - self.l + 1)
                }
            }
            ChartKind::RealLog | ChartKind::Smooth => format!("ps{}", a + 1),
            ChartKind::Correspondence => {
                if a < self.l {
                    format!("th{}", a + 1)
                } else if a < h {
                    format!("ps{}", a - self.l + 1)
                } else if a < h + self.l {
                    format!("thh{}", a - h + 1)
                } else {
                    format!("psh{}", a - h - self.l + 1)
                }
            }
        }
    }

    /// Grammar token of a storage leg.
    pub fn leg_token(&self, leg: Leg) -> String {
        match leg {
            Leg::LogR(i) => format!("dlr{}", i + 1),
            Leg::Ang(a) => format!("d{}", self.angle_name(a)),
            Leg::LogX(s) => format!("dlx{}", s + 1),
            Leg::Dx(s) => format!("dx{}", s + 1),
        }
    }

    /// Canonical frame labels. Complex-log charts report the complex frame
    /// `dlz_i, dlzb_i`; storage still uses the elliptic legs.
    pub fn frame(&self) -> Vec<String> {
        if self.kind == ChartKind::ComplexLog {
            let mut v = Vec::new();
            for i in 0..self.l {
                v.push(format!("dlz{}", i + 1));
                v.push(format!("dlzb{}", i + 1));
            }
            v.extend(self.legs().into_iter().skip(2 * self.l).map(|l| self.leg_token(l)));
            return v;
        }
        self.legs().into_iter().map(|l| self.leg_token(l)).collect()
    }

    /// Radial index with the angles it is polar partner of.
    pub fn polar_pairs(&self) -> Vec<(usize, Vec<usize>)> {
        match self.kind {
            ChartKind::Elliptic | ChartKind::ComplexLog => (0..self.l).map(|i| (i, vec![i])).collect(),
            ChartKind::Correspondence => (0..self.l).map(|i| (i, vec![i, self.l + self.f + i])).collect(),
            _ => vec![],
        }
    }

    /// Angle index of the polar partner of `r_i` (left angle on a correspondence).
    pub fn polar_angle(&self, i: usize) -> usize {
        i
    }

    /// Standard elliptic divisor generator `prod r_i^2`.
    pub fn standard_divisor(&self) -> Divisor {
        let sig = self.sig();
        let mut g = FnElem::one(sig);
        for i in 0..sig.nr {
            g = g.mul(&FnElem::r(sig, i, 2));
        }
        match self.kind {
            ChartKind::RealLog => {
                let mut g = FnElem::one(sig);
                for s in 0..self.l {
                    g = g.mul(&FnElem::x(sig, s, 1));
                }
                Divisor { generator: g, kind: DivisorKind::RealLog }
            }
            ChartKind::ComplexLog => {
                let mut g = FnElem::one(sig);
                for i in 0..self.l {
                    g = g.mul(&FnElem::z(sig, i));
                }
                Divisor { generator: g, kind: DivisorKind::ComplexLog }
            }
            _ => Divisor { generator: g, kind: DivisorKind::Elliptic },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivisorKind {
    Elliptic,
    ComplexLog,
    RealLog,
}

/// Locally principal ideal given by one generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Divisor {
    pub generator: FnElem,
    pub kind: DivisorKind,
}

impl Divisor {
    /// Elliptic divisor `prod_{i in s} r_i^2`.
    pub fn elliptic(sig: Sig, s: &[usize]) -> Self {
        let mut g = FnElem::one(sig);
        for &i in s {
            g = g.mul(&FnElem::r(sig, i, 2));
        }
        Divisor { generator: g, kind: DivisorKind::Elliptic }
    }

    /// Checks the normal-form invariant of the generator.
    pub fn validate(&self) -> Result<(), CalcError> {
        let (k, _) = self
            .generator
            .as_monomial()
            .ok_or_else(|| CalcError::NotMonomial("divisor generator".into()))?;
        let ok = match self.kind {
            DivisorKind::Elliptic => {
                k.r.iter().all(|&a| a == 0 || a == 2) && k.fourier.iter().all(|&b| b == 0) && k.x.iter().all(|&c| c == 0)
            }
            DivisorKind::ComplexLog => k.r.iter().zip(&k.fourier).all(|(&a, &b)| (a == 0 && b == 0) || (a == 1 && b == 1)),
            DivisorKind::RealLog => k.x.iter().all(|&c| c <= 1) && k.r.iter().all(|&a| a == 0),
        };
        if ok {
            Ok(())
        } else {
            Err(CalcError::Invalid("divisor generator is not in normal form".into()))
        }
    }

    /// Radial indices `i` with `r_i^2` dividing the generator.
    pub fn support(&self) -> Vec<usize> {
        match self.generator.as_monomial() {
            Some((k, _)) => k.r.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, _)| i).collect(),
            None => vec![],
        }
    }
}

/// `T^k` action: generator `e_j` acts by `sum_a matrix[j][a] d/d angle_a`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TorusAction {
    pub matrix: Vec<Vec<i32>>,
}

impl TorusAction {
    pub fn new(matrix: Vec<Vec<i32>>) -> Result<Self, CalcError> {
        if let Some(first) = matrix.first() {
            if matrix.iter().any(|row| row.len() != first.len()) {
                return Err(CalcError::Invalid("ragged action matrix".into()));
            }
        }
        Ok(TorusAction { matrix })
    }

    /// Rotation of every polar and free angle of an elliptic chart.
    pub fn standard(chart: &Chart) -> Self {
        let n = chart.sig().na;
        let k = match chart.kind {
            ChartKind::Correspondence => chart.l + chart.f,
            _ => n,
        };
        TorusAction { matrix: (0..k).map(|j| (0..n).map(|a| (a == j) as i32).collect()).collect() }
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_angles(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn annihilates(&self, fourier: &[i32]) -> bool {
        self.matrix
            .iter()
            .all(|row| row.iter().zip(fourier).map(|(a, b)| a * b).sum::<i32>() == 0)
    }

    /// Generating vector fields `a(e_j)` on `chart`.
    pub fn generators(&self, chart: &Chart) -> Result<Vec<Multivector>, CalcError> {
        if self.n_angles() != chart.sig().na && self.rank() > 0 {
            return Err(CalcError::ChartMismatch("action matrix width differs from the angle count".into()));
        }
        self.matrix
            .iter()
            .map(|row| {
                let mut x = Multivector::zero(*chart);
                for (a, &c) in row.iter().enumerate() {
                    if c != 0 {
                        let idx = chart.leg_index(Leg::Ang(a)).expect("every angle has a leg");
                        x = x.add(&Multivector::basis(*chart, idx).scale_int(c as i64));
                    }
                }
                Ok(x)
            })
            .collect()
    }

    /// Extends the matrix by zero columns on the left and right.
    pub fn padded(&self, left: usize, right: usize) -> Self {
        TorusAction {
            matrix: self
                .matrix
                .iter()
                .map(|row| std::iter::repeat_n(0, left).chain(row.iter().copied()).chain(std::iter::repeat_n(0, right)).collect())
                .collect(),
        }
    }

    /// Whether some `GL(k, Z)` change of basis turns the matrix into a
    /// selection of distinct angles. Decided by the row Hermite normal form,
    /// which is a complete invariant of the left `GL(k, Z)` orbit.
    pub fn is_standard(&self) -> bool {
        let h = hermite_rows(&self.matrix);
        if h.len() != self.rank() {
            return false;
        }
        h.iter().all(|row| row.iter().filter(|&&v| v != 0).count() == 1 && row.contains(&1))
    }
}

/// Row Hermite normal form with zero rows removed.
pub fn hermite_rows(m: &[Vec<i32>]) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in pr..rows {
                if a[r][c] != 0 && best.is_none_or(|b| a[r][c].abs() < a[b][c].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            a.swap(pr, b);
            let mut done = true;
            for r in pr + 1..rows {
                if a[r][c] != 0 {
                    let q = a[r][c].div_euclid(a[pr][c]);
                    for k in 0..cols {
                        a[r][k] -= q * a[pr][k];
                    }
                    if a[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[pr][c] == 0 {
            continue;
        }
        if a[pr][c] < 0 {
            for k in 0..cols {
                a[pr][k] = -a[pr][k];
            }
        }
        for r in 0..pr {
            let q = a[r][c].div_euclid(a[pr][c]);
            for k in 0..cols {
                a[r][k] -= q * a[pr][k];
            }
        }
        pr += 1;
    }
    a.into_iter().filter(|r| r.iter().any(|&v| v != 0)).collect()
}

/// Overlap: the coordinates of chart `src` written in those of chart `dst`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub src: usize,
    pub dst: usize,
    pub map: MonomialMap,
    /// Radial coordinates of `dst` required nonzero on the overlap.
    pub nonzero: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Atlas {
    pub charts: Vec<Chart>,
    pub transitions: Vec<Transition>,
    pub triples: Vec<(usize, usize, usize)>,
}

impl Atlas {
    fn find(&self, src: usize, dst: usize) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.src == src && t.dst == dst)
    }

    /// Cocycle condition on every declared triple overlap `(a, b, c)`:
    /// `a -> b` followed by `b -> c` equals `a -> c`.
    pub fn check_cocycle(&self) -> Result<(), CalcError> {
        for &(a, b, c) in &self.triples {
            let (Some(ab), Some(bc), Some(ac)) = (self.find(a, b), self.find(b, c), self.find(a, c)) else {
                return Err(CalcError::Invalid(format!("missing transition for triple ({a},{b},{c})")));
            };
            if ab.map.then(&bc.map)? != ac.map {
                return Err(CalcError::Invalid(format!("cocycle violation on ({a},{b},{c})")));
            }
        }
        Ok(())
    }

    /// `C P^1` with `t' = 1/t`.
    pub fn cp1() -> Atlas {
        let c = Chart::elliptic(1, 0, 0);
        let inv = MonomialMap::new(c.sig(), c.sig(), vec![vec![-1]], vec![vec![-1]], vec![]).unwrap();
        Atlas {
            charts: vec![c, c],
            transitions: vec![
                Transition { src: 0, dst: 1, map: inv.clone(), nonzero: vec![0] },
                Transition { src: 1, dst: 0, map: inv, nonzero: vec![0] },
            ],
            triples: vec![],
        }
    }

    /// `C P^2` with affine charts `U_k = {z_k != 0}`; chart `k` uses the
    /// ratios `z_j / z_k` for `j != k` in increasing order of `j`.
    pub fn cp2() -> Atlas {
        let c = Chart::elliptic(2, 0, 0);
        let mut transitions = Vec::new();
        for src in 0..3 {
            for dst in 0..3 {
                if src != dst {
                    let e = cp2_exponents(src, dst);
                    let map = MonomialMap::new(c.sig(), c.sig(), e.clone(), e, vec![]).unwrap();
                    transitions.push(Transition { src, dst, map, nonzero: vec![cp2_slot(dst, src)] });
                }
            }
        }
        let mut triples = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    if a != b && b != cc && a != cc {
                        triples.push((a, b, cc));
                    }
                }
            }
        }
        Atlas { charts: vec![c; 3], transitions, triples }
    }

    /// `S^2 x S^2 = C P^1 x C P^1` with four product charts; chart `2a + b`
    /// uses the `a`-th chart of the first factor and the `b`-th of the second.
    pub fn s2xs2() -> Atlas {
        let c = Chart::elliptic(2, 0, 0);
        let mut transitions = Vec::new();
        for src in 0..4usize {
            for dst in 0..4usize {
                if src == dst {
                    continue;
                }
                let d0 = if src / 2 != dst / 2 { -1 } else { 1 };
                let d1 = if src % 2 != dst % 2 { -1 } else { 1 };
                let e = vec![vec![d0, 0], vec![0, d1]];
                let map = MonomialMap::new(c.sig(), c.sig(), e.clone(), e, vec![]).unwrap();
                let mut nz = vec![];
                if d0 < 0 {
                    nz.push(0);
                }
                if d1 < 0 {
                    nz.push(1);
                }
                transitions.push(Transition { src, dst, map, nonzero: nz });
            }
        }
        let mut triples = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    if a != b && b != cc && a != cc {
                        triples.push((a, b, cc));
                    }
                }
            }
        }
        Atlas { charts: vec![c; 4], transitions, triples }
    }
}

/// Slot of homogeneous coordinate `j` in affine chart `k`.
fn cp2_slot(k: usize, j: usize) -> usize {
    if j < k {
        j
    } else {
        j - 1
    }
}

/// Exponents writing the coordinates of chart `src` in those of chart `dst`:
/// `z_j/z_s = (z_j/z_d) (z_s/z_d)^{-1}` with `z_d/z_d = 1`.
fn cp2_exponents(src: usize, dst: usize) -> Vec<Vec<i32>> {
    let mut rows = Vec::new();
    for j in (0..3).filter(|&j| j != src) {
        let mut row = vec![0; 2];
        if j != dst {
            row[cp2_slot(dst, j)] += 1;
        }
        row[cp2_slot(dst, src)] -= 1;
        rows.push(row);
    }
    rows
}

/// Affine action matrix of `(l1, l2) . [z0:z1:z2] = [e^{i l1} z0 : e^{i l2} z1 : z2]`
/// on chart `k`: the weight of `z_j / z_k` is `w_j - w_k`.
pub fn cp2_action(k: usize) -> TorusAction {
    let w = |j: usize, gen: usize| -> i32 { (j == gen) as i32 };
    let matrix = (0..2)
        .map(|g| (0..3).filter(|&j| j != k).map(|j| w(j, g) - w(k, g)).collect())
        .collect();
    TorusAction { matrix }
}

/// `zeta_1 = dlog z0 - dlog z2`, `zeta_2 = dlog z1 - dlog z2` on chart `k`,
/// as complex-log forms.
pub fn cp2_zetas(k: usize) -> Vec<Form> {
    let c = Chart::complex_log(2, 0, 0);
    let dlog_ratio = |j: usize| -> Form {
        if j == k {
            Form::zero(c)
        } else {
            Form::dlog_z(c, cp2_slot(k, j))
        }
    };
    vec![dlog_ratio(0).sub(&dlog_ratio(2)), dlog_ratio(1).sub(&dlog_ratio(2))]
}

/// Vector of elliptic one-forms `Theta` with `iota_{a(e_j)} Theta_i = delta_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionForm {
    pub theta: Vec<Form>,
}

/// Contraction identity and invariance, both exact.
pub fn check_connection(theta: &ConnectionForm, action: &TorusAction) -> Result<bool, CalcError> {
    if theta.theta.len() != action.rank() {
        return Ok(false);
    }
    let Some(first) = theta.theta.first() else { return Ok(true) };
    let chart = first.chart();
    let gens = action.generators(&chart)?;
    for (i, t) in theta.theta.iter().enumerate() {
        if t.chart() != chart || !t.is_homogeneous(1) {
            return Ok(false);
        }
        for (j, g) in gens.iter().enumerate() {
            let c = g.contract(t)?.scalar_part();
            let want = FnElem::constant(chart.sig(), crate::coeffring::Qi::int((i == j) as i64));
            if c != want {
                return Ok(false);
            }
        }
        if !crate::forms::is_invariant(t, action) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Componentwise `d Theta`, checked to be basic.
pub fn curvature(theta: &ConnectionForm, action: &TorusAction) -> Result<Vec<Form>, CalcError> {
    let mut out = Vec::new();
    for t in &theta.theta {
        let k = t.d();
        let gens = action.generators(&k.chart())?;
        for g in &gens {
            if !g.contract(&k)?.is_zero() {
                return Err(CalcError::NotBasic);
            }
        }
        if !crate::forms::is_invariant(&k, action) {
            return Err(CalcError::NotBasic);
        }
        out.push(k);
    }
    Ok(out)
}

/// Imaginary part of a complex-log form, as an elliptic form.
pub fn im_star(zeta: &Form) -> Form {
    zeta.im_part().with_chart_kind(ChartKind::Elliptic)
}

/// `substitute(form_src, transition) == form_dst` on every overlap.
pub fn atlas_check_global(atlas: &Atlas, forms: &[Form]) -> Result<bool, CalcError> {
    atlas.check_cocycle()?;
    if forms.len() != atlas.charts.len() {
        return Err(CalcError::Invalid("one form per chart is required".into()));
    }
    for t in &atlas.transitions {
        let pulled = crate::forms::pullback(&forms[t.src], &t.map, &forms[t.dst].chart())?;
        if pulled != forms[t.dst] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Substitutes a function along a transition (re-export for atlas users).
pub fn transport_fn(f: &FnElem, t: &Transition) -> Result<FnElem, CalcError> {
    substitute(f, &t.map)
}

/// Keeps the invariant part of each coefficient.
pub fn average_form(alpha: &Form, action: &TorusAction) -> Form {
    alpha.map_coeffs(|f| torus_average(f, action))
}
