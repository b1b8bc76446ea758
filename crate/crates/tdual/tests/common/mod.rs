#![allow(dead_code)]

pub mod numeric;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tdual::chart::{Leg, TorusAction};
use tdual::coeffring::{Key, Sig};
use tdual::forms::Multivector;
use tdual::genstruct::GenSection;
use tdual::tduality::{make_correspondence, CorrChart, DualityData};
use tdual::{Chart, FnElem, Form, Qi};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn small_qi(rng: &mut ChaCha8Rng) -> Qi {
    let mut re = 0;
    let mut im = 0;
    while re == 0 && im == 0 {
        re = rng.gen_range(-4..=4);
        im = rng.gen_range(-2..=2);
    }
    Qi::new(
        num_rational::BigRational::new(re.into(), rng.gen_range(1..=3).into()),
        num_rational::BigRational::new(im.into(), 1.into()),
    )
}

/// Random key; `fourier` is forced to zero when `invariant`.
pub fn random_key(rng: &mut ChaCha8Rng, sig: Sig, invariant: bool) -> Key {
    let mut k = Key::unit(sig);
    for a in k.r.iter_mut() {
        *a = rng.gen_range(-1..=2);
    }
    if !invariant {
        for b in k.fourier.iter_mut() {
            *b = rng.gen_range(-2..=2);
        }
    }
    for c in k.x.iter_mut() {
        *c = rng.gen_range(0..=2);
    }
    k
}

pub fn random_fn(rng: &mut ChaCha8Rng, sig: Sig, terms: usize, invariant: bool) -> FnElem {
    let n = rng.gen_range(1..=terms);
    FnElem::from_terms(sig, (0..n).map(|_| (random_key(rng, sig, invariant), small_qi(rng))))
}

/// Random form with at most `terms` frame monomials of degree `<= max_deg`.
pub fn random_form(rng: &mut ChaCha8Rng, chart: Chart, terms: usize, max_deg: u32, invariant: bool) -> Form {
    let n = chart.dim();
    let sig = chart.sig();
    let count = rng.gen_range(1..=terms);
    Form::from_terms(
        chart,
        (0..count).map(|_| {
            let mut mask = 0u32;
            let deg = rng.gen_range(0..=max_deg.min(n as u32));
            while mask.count_ones() < deg {
                mask |= 1 << rng.gen_range(0..n);
            }
            (mask, random_fn(rng, sig, 2, invariant))
        }),
    )
}

pub fn random_homogeneous(rng: &mut ChaCha8Rng, chart: Chart, deg: u32, terms: usize, invariant: bool) -> Form {
    random_form(rng, chart, terms, deg, invariant).part(deg)
}

pub fn random_vector(rng: &mut ChaCha8Rng, chart: Chart) -> Multivector {
    let sig = chart.sig();
    let count = rng.gen_range(1..=3);
    Multivector::from_terms(chart, (0..count).map(|_| (1u32 << rng.gen_range(0..chart.dim()), random_fn(rng, sig, 2, false))))
}

pub fn random_section(rng: &mut ChaCha8Rng, chart: Chart) -> GenSection {
    let v = random_vector(rng, chart);
    let mut xi = random_homogeneous(rng, chart, 1, 3, false);
    if xi.is_zero() {
        xi = Form::basis(chart, 0);
    }
    GenSection::new(v, xi).unwrap()
}

/// Chart shapes used by the duality suites.
pub fn duality_shapes() -> Vec<Chart> {
    vec![Chart::elliptic(1, 0, 0), Chart::elliptic(2, 0, 0), Chart::elliptic(1, 0, 2), Chart::elliptic(1, 1, 0)]
}

/// `F = F0 + p*B - phat*Bhat` with `F0 = sum_a dangle_a ^ dangle_a-hat`,
/// `H = dB` and `Hhat = dBhat` for random invariant two-forms.
pub fn random_duality(rng: &mut ChaCha8Rng, left: Chart) -> DualityData {
    let corr = make_correspondence(&left, &left).unwrap();
    let cc = corr.chart;
    let k = left.l + left.f;
    let mut f0 = Form::zero(cc);
    for a in 0..k {
        let l = Form::leg(cc, Leg::Ang(a)).unwrap();
        let r = Form::leg(cc, Leg::Ang(k + a)).unwrap();
        f0 = f0.add(&l.wedge(&r));
    }
    let b = random_homogeneous(rng, left, 2, 2, true);
    let bh = random_homogeneous(rng, left, 2, 2, true);
    let pb = tdual::forms::pullback(&b, &corr.p, &cc).unwrap();
    let pbh = tdual::forms::pullback(&bh, &corr.phat, &cc).unwrap();
    let f = f0.add(&pb).sub(&pbh);
    DualityData::new(
        corr.clone(),
        f,
        b.d(),
        bh.d(),
        TorusAction::standard(&left),
        TorusAction::standard(&left),
    )
    .unwrap()
}

pub fn corr_of(left: Chart) -> CorrChart {
    make_correspondence(&left, &left).unwrap()
}
