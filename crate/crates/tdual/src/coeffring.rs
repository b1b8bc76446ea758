//! Exact function ring for form coefficients.
//!
//! An [`FnElem`] is a finite sum of monomials
//! `c * r^a * e^{i b.theta} * x^c * params^e` with `c` a Gaussian rational,
//! `a` and `b` integer vectors, `c` a natural vector and integer powers of
//! named formal parameters. Invariants kept by every constructor:
//!
//! - no stored coefficient is zero; the empty map is `0`;
//! - exponent vectors have the lengths fixed by the element's [`Sig`];
//! - terms sit in a `BTreeMap`, so iteration and printing are deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::chart::{Chart, TorusAction};
use crate::error::CalcError;

/// Element of the Gaussian rationals `Q(i)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qi {
    pub re: BigRational,
    pub im: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Qi {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Qi { re, im }
    }
    pub fn zero() -> Self {
        Qi::new(BigRational::zero(), BigRational::zero())
    }
    pub fn one() -> Self {
        Qi::int(1)
    }
    pub fn i() -> Self {
        Qi::new(BigRational::zero(), BigRational::one())
    }
    pub fn int(n: i64) -> Self {
        Qi::new(rat(n), BigRational::zero())
    }
    pub fn ratio(p: i64, q: i64) -> Self {
        Qi::new(BigRational::new(BigInt::from(p), BigInt::from(q)), BigRational::zero())
    }
    pub fn complex(re: i64, im: i64) -> Self {
        Qi::new(rat(re), rat(im))
    }
    pub fn from_rational(re: BigRational) -> Self {
        Qi::new(re, BigRational::zero())
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        Qi::new(self.re.clone(), -self.im.clone())
    }
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sq();
        Some(Qi::new(&self.re / &n, -&self.im / &n))
    }
    /// Integer power, negative exponents allowed for nonzero values.
    pub fn powi(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Qi::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }
    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl From<i64> for Qi {
    fn from(n: i64) -> Self {
        Qi::int(n)
    }
}

impl Add<&Qi> for &Qi {
    type Output = Qi;
    fn add(self, o: &Qi) -> Qi {
        Qi::new(&self.re + &o.re, &self.im + &o.im)
    }
}
impl Sub<&Qi> for &Qi {
    type Output = Qi;
    fn sub(self, o: &Qi) -> Qi {
        Qi::new(&self.re - &o.re, &self.im - &o.im)
    }
}
impl Mul<&Qi> for &Qi {
    type Output = Qi;
    fn mul(self, o: &Qi) -> Qi {
        Qi::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}
impl Div<&Qi> for &Qi {
    type Output = Qi;
    fn div(self, o: &Qi) -> Qi {
        self * &o.inv().expect("division by zero in Q(i)")
    }
}
impl Neg for &Qi {
    type Output = Qi;
    fn neg(self) -> Qi {
        Qi::new(-self.re.clone(), -self.im.clone())
    }
}
impl Add for Qi {
    type Output = Qi;
    fn add(self, o: Qi) -> Qi {
        &self + &o
    }
}
impl Sub for Qi {
    type Output = Qi;
    fn sub(self, o: Qi) -> Qi {
        &self - &o
    }
}
impl Mul for Qi {
    type Output = Qi;
    fn mul(self, o: Qi) -> Qi {
        &self * &o
    }
}
impl Div for Qi {
    type Output = Qi;
    fn div(self, o: Qi) -> Qi {
        &self / &o
    }
}
impl Neg for Qi {
    type Output = Qi;
    fn neg(self) -> Qi {
        -&self
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Prints in the expression grammar: `3/2`, `-i`, `2*i`, `(1 + 2*i)`.
impl fmt::Display for Qi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |im: &BigRational| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", fmt_rat(im))
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", fmt_rat(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}", im_part(&self.im))
        } else if self.im.is_negative() {
            write!(f, "({} - {})", fmt_rat(&self.re), im_part(&-self.im.clone()))
        } else {
            write!(f, "({} + {})", fmt_rat(&self.re), im_part(&self.im))
        }
    }
}

impl fmt::Debug for Qi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Coordinate signature: radial count, angle count, real count.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sig {
    pub nr: usize,
    pub na: usize,
    pub nx: usize,
}

impl Sig {
    pub fn new(nr: usize, na: usize, nx: usize) -> Self {
        Sig { nr, na, nx }
    }
}

/// Exponent data of one monomial; the map key of [`FnElem`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Key {
    pub r: Vec<i32>,
    pub fourier: Vec<i32>,
    pub x: Vec<u32>,
    /// Nonzero exponents of formal parameters, by name.
    pub params: BTreeMap<String, i32>,
}

impl Key {
    pub fn unit(sig: Sig) -> Self {
        Key {
            r: vec![0; sig.nr],
            fourier: vec![0; sig.na],
            x: vec![0; sig.nx],
            params: BTreeMap::new(),
        }
    }

    fn mul(&self, o: &Key) -> Key {
        let mut params = self.params.clone();
        for (k, v) in &o.params {
            let e = params.entry(k.clone()).or_insert(0);
            *e += v;
            if *e == 0 {
                params.remove(k);
            }
        }
        Key {
            r: self.r.iter().zip(&o.r).map(|(a, b)| a + b).collect(),
            fourier: self.fourier.iter().zip(&o.fourier).map(|(a, b)| a + b).collect(),
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            params,
        }
    }

    /// True when the monomial is a coordinate constant (parameters allowed).
    pub fn is_coordinate_free(&self) -> bool {
        self.r.iter().all(|&a| a == 0) && self.fourier.iter().all(|&b| b == 0) && self.x.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.is_coordinate_free() && self.params.is_empty()
    }
}

/// One term `coeff * key` of a function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monomial {
    pub coeff: Qi,
    pub key: Key,
}

/// Finite sum of monomials over a fixed signature.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnElem {
    sig: Sig,
    terms: BTreeMap<Key, Qi>,
}

impl FnElem {
    pub fn zero(sig: Sig) -> Self {
        FnElem { sig, terms: BTreeMap::new() }
    }
    pub fn constant(sig: Sig, c: Qi) -> Self {
        FnElem::monomial(sig, c, Key::unit(sig))
    }
    pub fn one(sig: Sig) -> Self {
        FnElem::constant(sig, Qi::one())
    }
    pub fn monomial(sig: Sig, c: Qi, key: Key) -> Self {
        debug_assert!(key.r.len() == sig.nr && key.fourier.len() == sig.na && key.x.len() == sig.nx);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        FnElem { sig, terms }
    }
    /// `r_i^pow` (0-based index).
    pub fn r(sig: Sig, i: usize, pow: i32) -> Self {
        let mut k = Key::unit(sig);
        k.r[i] = pow;
        FnElem::monomial(sig, Qi::one(), k)
    }
    /// `e^{i k angle_a}` (0-based angle index).
    pub fn e(sig: Sig, a: usize, k: i32) -> Self {
        let mut key = Key::unit(sig);
        key.fourier[a] = k;
        FnElem::monomial(sig, Qi::one(), key)
    }
    pub fn x(sig: Sig, s: usize, pow: u32) -> Self {
        let mut k = Key::unit(sig);
        k.x[s] = pow;
        FnElem::monomial(sig, Qi::one(), k)
    }
    pub fn param(sig: Sig, name: &str, pow: i32) -> Self {
        let mut k = Key::unit(sig);
        if pow != 0 {
            k.params.insert(name.to_string(), pow);
        }
        FnElem::monomial(sig, Qi::one(), k)
    }
    /// `z_i = r_i e^{i theta_i}` for an elliptic pair whose angle index is `i`.
    pub fn z(sig: Sig, i: usize) -> Self {
        FnElem::r(sig, i, 1).mul(&FnElem::e(sig, i, 1))
    }
    pub fn zbar(sig: Sig, i: usize) -> Self {
        FnElem::r(sig, i, 1).mul(&FnElem::e(sig, i, -1))
    }

    pub fn sig(&self) -> Sig {
        self.sig
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
    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Qi)> {
        self.terms.iter()
    }
    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(k, c)| Monomial { coeff: c.clone(), key: k.clone() })
            .collect()
    }
    /// Builds from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms(sig: Sig, it: impl IntoIterator<Item = (Key, Qi)>) -> Self {
        let mut out = FnElem::zero(sig);
        for (k, c) in it {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: Key, c: Qi) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    /// The scalar value if this is a coordinate- and parameter-free constant.
    pub fn as_constant(&self) -> Option<Qi> {
        if self.terms.is_empty() {
            return Some(Qi::zero());
        }
        if self.terms.len() == 1 {
            let (k, c) = self.terms.iter().next().unwrap();
            if k.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn as_monomial(&self) -> Option<(&Key, &Qi)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn checked_add(&self, o: &FnElem) -> Result<FnElem, CalcError> {
        self.same_sig(o)?;
        Ok(self.add(o))
    }
    pub fn checked_mul(&self, o: &FnElem) -> Result<FnElem, CalcError> {
        self.same_sig(o)?;
        Ok(self.mul(o))
    }
    fn same_sig(&self, o: &FnElem) -> Result<(), CalcError> {
        if self.sig != o.sig {
            return Err(CalcError::SignatureMismatch(format!("{:?} vs {:?}", self.sig, o.sig)));
        }
        Ok(())
    }

    /// Sum; panics on signature mismatch (use [`fn_add`] for a checked version).
    pub fn add(&self, o: &FnElem) -> FnElem {
        assert_eq!(self.sig, o.sig, "FnElem signature mismatch");
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
    pub fn sub(&self, o: &FnElem) -> FnElem {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> FnElem {
        FnElem {
            sig: self.sig,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
    pub fn mul(&self, o: &FnElem) -> FnElem {
        assert_eq!(self.sig, o.sig, "FnElem signature mismatch");
        let mut out = FnElem::zero(self.sig);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                out.add_term(k1.mul(k2), c1 * c2);
            }
        }
        out
    }
    pub fn scale(&self, c: &Qi) -> FnElem {
        if c.is_zero() {
            return FnElem::zero(self.sig);
        }
        FnElem {
            sig: self.sig,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }
    /// Nonnegative power.
    pub fn pow(&self, n: u32) -> FnElem {
        let mut acc = FnElem::one(self.sig);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
    /// Inverse of a single monomial (negative x powers are not representable).
    pub fn inv_monomial(&self) -> Result<FnElem, CalcError> {
        let (k, c) = self
            .as_monomial()
            .ok_or_else(|| CalcError::NotMonomial("inverse of a non-monomial".into()))?;
        if k.x.iter().any(|&e| e != 0) {
            return Err(CalcError::NegativeX);
        }
        let key = Key {
            r: k.r.iter().map(|a| -a).collect(),
            fourier: k.fourier.iter().map(|b| -b).collect(),
            x: k.x.clone(),
            params: k.params.iter().map(|(n, e)| (n.clone(), -e)).collect(),
        };
        let inv = c.inv().expect("stored coefficients are nonzero");
        Ok(FnElem::monomial(self.sig, inv, key))
    }
    /// Complex conjugate: conjugate scalars, negate Fourier vectors.
    /// Parameters are real.
    pub fn conj(&self) -> FnElem {
        FnElem::from_terms(
            self.sig,
            self.terms.iter().map(|(k, c)| {
                let mut k2 = k.clone();
                for b in k2.fourier.iter_mut() {
                    *b = -*b;
                }
                (k2, c.conj())
            }),
        )
    }
    /// `(f + conj f)/2`.
    pub fn re_part(&self) -> FnElem {
        self.add(&self.conj()).scale(&Qi::ratio(1, 2))
    }
    /// `(f - conj f)/(2i)`.
    pub fn im_part(&self) -> FnElem {
        self.sub(&self.conj()).scale(&Qi::new(BigRational::zero(), -rat(1) / rat(2)))
    }

    /// Euler field `r_i d/dr_i`.
    pub fn r_euler(&self, i: usize) -> FnElem {
        FnElem::from_terms(self.sig, self.terms.iter().map(|(k, c)| (k.clone(), c * &Qi::int(k.r[i] as i64))))
    }
    /// `d/d angle_a`.
    pub fn d_angle(&self, a: usize) -> FnElem {
        FnElem::from_terms(
            self.sig,
            self.terms.iter().map(|(k, c)| (k.clone(), c * &Qi::complex(0, k.fourier[a] as i64))),
        )
    }
    /// Euler field `x_s d/dx_s`.
    pub fn x_euler(&self, s: usize) -> FnElem {
        FnElem::from_terms(self.sig, self.terms.iter().map(|(k, c)| (k.clone(), c * &Qi::int(k.x[s] as i64))))
    }
    /// `d/dx_s`; never produces a negative exponent since `c_s >= 1` guards the division.
    pub fn d_x(&self, s: usize) -> FnElem {
        FnElem::from_terms(
            self.sig,
            self.terms.iter().filter(|(k, _)| k.x[s] > 0).map(|(k, c)| {
                let mut k2 = k.clone();
                k2.x[s] -= 1;
                (k2, c * &Qi::int(k.x[s] as i64))
            }),
        )
    }

    /// Largest absolute exponent over all coordinates.
    pub fn max_abs_exponent(&self) -> i32 {
        self.terms
            .keys()
            .flat_map(|k| k.r.iter().map(|a| a.abs()).chain(k.fourier.iter().map(|b| b.abs())))
            .max()
            .unwrap_or(0)
    }

    /// Keeps the terms selected by `keep`, optionally rewriting keys.
    pub fn filter_map_keys(&self, sig: Sig, mut f: impl FnMut(&Key) -> Option<Key>) -> FnElem {
        FnElem::from_terms(sig, self.terms.iter().filter_map(|(k, c)| f(k).map(|k2| (k2, c.clone()))))
    }

    /// Evaluates at a point given per-coordinate values.
    pub fn eval(&self, pt: &Point) -> Result<Qi, CalcError> {
        let mut acc = Qi::zero();
        for (k, c) in &self.terms {
            let mut v = c.clone();
            for (i, &a) in k.r.iter().enumerate() {
                v = &v * &pt.r[i].powi(a as i64).ok_or(CalcError::DegenerateSample)?;
            }
            for (j, &b) in k.fourier.iter().enumerate() {
                v = &v * &pt.e[j].powi(b as i64).ok_or(CalcError::DegenerateSample)?;
            }
            for (s, &e) in k.x.iter().enumerate() {
                v = &v * &pt.x[s].powi(e as i64).unwrap();
            }
            for (name, &e) in &k.params {
                let pv = pt.params.get(name).ok_or_else(|| CalcError::UnboundParam(name.clone()))?;
                v = &v * &pv.powi(e as i64).ok_or(CalcError::DegenerateSample)?;
            }
            acc = &acc + &v;
        }
        Ok(acc)
    }

    /// Formal parameter names appearing in any term.
    pub fn param_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.keys().flat_map(|k| k.params.keys().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Debug for FnElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_fn(self))
    }
}

impl fmt::Display for FnElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::cli::print::print_fn(self))
    }
}

/// Exact values for every coordinate; angles are given as `e^{i theta}`.
#[derive(Clone, Debug)]
pub struct Point {
    pub r: Vec<Qi>,
    pub e: Vec<Qi>,
    pub x: Vec<Qi>,
    pub params: BTreeMap<String, Qi>,
}

/// Checked sum.
pub fn fn_add(a: &FnElem, b: &FnElem) -> Result<FnElem, CalcError> {
    a.checked_add(b)
}

/// Checked product.
pub fn fn_mul(a: &FnElem, b: &FnElem) -> Result<FnElem, CalcError> {
    a.checked_mul(b)
}

/// True iff every monomial is a polynomial in the Cartesian coordinates of
/// each polar pair: `r_exp >= |fourier|` and `r_exp = fourier (mod 2)`.
pub fn is_smooth_fn(f: &FnElem, chart: &Chart) -> bool {
    let pairs = chart.polar_pairs();
    f.terms.keys().all(|k| {
        pairs.iter().all(|(i, angles)| {
            let a = k.r[*i];
            let b: i32 = angles.iter().map(|&t| k.fourier[t].abs()).sum();
            let parity: i32 = angles.iter().map(|&t| k.fourier[t]).sum();
            a >= b && (a - parity).rem_euclid(2) == 0
        })
    })
}

/// Projection onto the invariant part: keeps monomials whose Fourier vector
/// is annihilated by the action matrix.
pub fn torus_average(f: &FnElem, action: &TorusAction) -> FnElem {
    f.filter_map_keys(f.sig, |k| if action.annihilates(&k.fourier) { Some(k.clone()) } else { None })
}

/// Monomial coordinate change. Coordinates of `src` are written as monomials
/// in the coordinates of `dst`:
/// `r_j = prod r_i^{r[j][i]}`, `angle_a = sum ang[a][b] angle_b`,
/// `x_s = prod x_t^{x[s][t]}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialMap {
    pub src: Sig,
    pub dst: Sig,
    pub r: Vec<Vec<i32>>,
    pub ang: Vec<Vec<i32>>,
    pub x: Vec<Vec<i32>>,
}

impl MonomialMap {
    pub fn new(src: Sig, dst: Sig, r: Vec<Vec<i32>>, ang: Vec<Vec<i32>>, x: Vec<Vec<i32>>) -> Result<Self, CalcError> {
        let ok = r.len() == src.nr
            && r.iter().all(|row| row.len() == dst.nr)
            && ang.len() == src.na
            && ang.iter().all(|row| row.len() == dst.na)
            && x.len() == src.nx
            && x.iter().all(|row| row.len() == dst.nx);
        if !ok {
            return Err(CalcError::NotMonomial("exponent table has the wrong shape".into()));
        }
        Ok(MonomialMap { src, dst, r, ang, x })
    }

    pub fn identity(sig: Sig) -> Self {
        let id = |n: usize| (0..n).map(|i| (0..n).map(|j| (i == j) as i32).collect()).collect();
        MonomialMap { src: sig, dst: sig, r: id(sig.nr), ang: id(sig.na), x: id(sig.nx) }
    }

    /// `self` expresses A in B, `next` expresses B in C; the result expresses A in C.
    pub fn then(&self, next: &MonomialMap) -> Result<MonomialMap, CalcError> {
        if self.dst != next.src {
            return Err(CalcError::SignatureMismatch("composition of incompatible maps".into()));
        }
        let comp = |a: &Vec<Vec<i32>>, b: &Vec<Vec<i32>>, n: usize| -> Vec<Vec<i32>> {
            a.iter()
                .map(|row| (0..n).map(|k| row.iter().zip(b).map(|(&e, brow)| e * brow[k]).sum()).collect())
                .collect()
        };
        Ok(MonomialMap {
            src: self.src,
            dst: next.dst,
            r: comp(&self.r, &next.r, next.dst.nr),
            ang: comp(&self.ang, &next.ang, next.dst.na),
            x: comp(&self.x, &next.x, next.dst.nx),
        })
    }

    fn map_key(&self, k: &Key) -> Result<Key, CalcError> {
        let mut out = Key::unit(self.dst);
        for (j, &a) in k.r.iter().enumerate() {
            for (i, &e) in self.r[j].iter().enumerate() {
                out.r[i] += a * e;
            }
        }
        for (a, &b) in k.fourier.iter().enumerate() {
            for (c, &e) in self.ang[a].iter().enumerate() {
                out.fourier[c] += b * e;
            }
        }
        let mut xs = vec![0i64; self.dst.nx];
        for (s, &c) in k.x.iter().enumerate() {
            for (t, &e) in self.x[s].iter().enumerate() {
                xs[t] += c as i64 * e as i64;
            }
        }
        for (t, v) in xs.into_iter().enumerate() {
            if v < 0 {
                return Err(CalcError::NegativeX);
            }
            out.x[t] = v as u32;
        }
        out.params = k.params.clone();
        Ok(out)
    }
}

/// Pullback of `f` along a monomial coordinate change; a ring homomorphism.
pub fn substitute(f: &FnElem, map: &MonomialMap) -> Result<FnElem, CalcError> {
    if f.sig != map.src {
        return Err(CalcError::SignatureMismatch(format!("{:?} vs map source {:?}", f.sig, map.src)));
    }
    let mut terms = Vec::with_capacity(f.len());
    for (k, c) in &f.terms {
        terms.push((map.map_key(k)?, c.clone()));
    }
    Ok(FnElem::from_terms(map.dst, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn s2() -> Sig {
        Sig::new(2, 2, 0)
    }

    #[test]
    fn like_terms_and_cancellation() {
        let sig = Sig::new(1, 1, 1);
        let r1 = FnElem::r(sig, 0, 1);
        assert_eq!(r1.add(&r1), r1.scale(&Qi::int(2)));
        let z = FnElem::z(sig, 0);
        let x = FnElem::x(sig, 0, 1);
        assert_eq!(z.add(&x).add(&z.neg()), x);
        assert_eq!(x.add(&FnElem::zero(sig)), x);
    }

    #[test]
    fn products_of_coordinates() {
        let sig = s2();
        let z1z2 = FnElem::z(sig, 0).mul(&FnElem::z(sig, 1));
        let (k, c) = z1z2.as_monomial().unwrap();
        assert!(c.is_one());
        assert_eq!(k.r, vec![1, 1]);
        assert_eq!(k.fourier, vec![1, 1]);
        let z = FnElem::z(sig, 0);
        assert_eq!(z.mul(&z.inv_monomial().unwrap()), FnElem::one(sig));
        let lam = FnElem::param(sig, "lambda", 1);
        assert_eq!(lam.mul(&lam), FnElem::param(sig, "lambda", 2));
        assert_eq!(lam.mul(&FnElem::param(sig, "lambda", -1)), FnElem::one(sig));
    }

    #[test]
    fn mismatched_signatures_are_errors() {
        let a = FnElem::one(Sig::new(1, 1, 0));
        let b = FnElem::one(Sig::new(2, 2, 0));
        assert!(fn_add(&a, &b).is_err());
        assert!(fn_mul(&a, &b).is_err());
    }

    #[test]
    fn smoothness_of_polar_monomials() {
        let c = Chart::elliptic(2, 0, 0);
        let sig = c.sig();
        assert!(is_smooth_fn(&FnElem::r(sig, 0, 2), &c));
        assert!(is_smooth_fn(&FnElem::z(sig, 0), &c));
        let ratio = FnElem::z(sig, 1).mul(&FnElem::z(sig, 0).inv_monomial().unwrap());
        assert!(!is_smooth_fn(&ratio, &c));
        // r e^{2 i theta} is not a polynomial in x, y; r^2 e^{i theta} has the wrong parity
        assert!(!is_smooth_fn(&FnElem::r(sig, 0, 1).mul(&FnElem::e(sig, 0, 2)), &c));
        assert!(!is_smooth_fn(&FnElem::r(sig, 0, 2).mul(&FnElem::e(sig, 0, 1)), &c));
    }

    #[test]
    fn averaging_drops_rotating_modes() {
        let c = Chart::elliptic(2, 0, 0);
        let sig = c.sig();
        let rot1 = TorusAction::new(vec![vec![1, 0]]).unwrap();
        let f = FnElem::r(sig, 0, 2).mul(&FnElem::e(sig, 0, 1));
        assert!(torus_average(&f, &rot1).is_zero());
        let g = FnElem::r(sig, 0, 2).mul(&FnElem::r(sig, 1, 2));
        assert_eq!(torus_average(&g, &TorusAction::standard(&c)), g);
        let h = FnElem::r(sig, 0, 2).add(&FnElem::z(sig, 0));
        assert_eq!(torus_average(&h, &rot1), FnElem::r(sig, 0, 2));
    }

    /// Numeric circle average of `r^2 + r e^{i theta}` at several radii
    /// agrees with the exact projection.
    #[test]
    fn averaging_matches_quadrature() {
        let c = Chart::elliptic(1, 0, 0);
        let sig = c.sig();
        let f = FnElem::r(sig, 0, 2).add(&FnElem::z(sig, 0));
        let avg = torus_average(&f, &TorusAction::standard(&c));
        for k in 1..=8 {
            let rad = k as f64 / 3.0;
            let n = 64;
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..n {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                re += rad * rad + rad * t.cos();
                im += rad * t.sin();
            }
            re /= n as f64;
            im /= n as f64;
            let pt = Point {
                r: vec![Qi::ratio(k, 3)],
                e: vec![Qi::one()],
                x: vec![],
                params: BTreeMap::new(),
            };
            let (er, ei) = avg.eval(&pt).unwrap().to_f64();
            assert!((er - re).abs() < 1e-9 && (ei - im).abs() < 1e-9);
        }
    }

    #[test]
    fn blowdown_substitution() {
        // source (r1, r2, th1, th2); destination (r_z, r_v, th_z, th_v); z1 = z2 v1
        let src = Sig::new(2, 2, 0);
        let dst = Sig::new(2, 2, 0);
        let m = MonomialMap::new(src, dst, vec![vec![1, 1], vec![1, 0]], vec![vec![1, 1], vec![1, 0]], vec![]).unwrap();
        let z1 = FnElem::z(src, 0);
        let img = substitute(&z1, &m).unwrap();
        let (k, _) = img.as_monomial().unwrap();
        assert_eq!(k.r, vec![1, 1]);
        assert_eq!(k.fourier, vec![1, 1]);
        let z1z2 = z1.mul(&FnElem::z(src, 1));
        let whole = substitute(&z1z2, &m).unwrap();
        let (k, _) = whole.as_monomial().unwrap();
        assert_eq!(k.r, vec![2, 1]);
        assert_eq!(k.fourier, vec![2, 1]);
        let parts = substitute(&z1, &m).unwrap().mul(&substitute(&FnElem::z(src, 1), &m).unwrap());
        assert_eq!(whole, parts);
        assert_eq!(substitute(&z1z2, &MonomialMap::identity(src)).unwrap(), z1z2);
    }

    #[test]
    fn negative_x_is_rejected() {
        let sig = Sig::new(0, 0, 1);
        let m = MonomialMap::new(sig, sig, vec![], vec![], vec![vec![-1]]).unwrap();
        assert!(matches!(substitute(&FnElem::x(sig, 0, 1), &m), Err(CalcError::NegativeX)));
    }

    #[test]
    fn gaussian_printing() {
        assert_eq!(Qi::ratio(3, 2).to_string(), "3/2");
        assert_eq!(Qi::i().to_string(), "i");
        assert_eq!((-Qi::i()).to_string(), "-i");
        assert_eq!(Qi::complex(1, -2).to_string(), "(1 - 2*i)");
    }
}
