//! Recursive-descent parser for the form grammar.
//!
//! ```text
//! sum     := ['-'] product (('+' | '-') product)*
//! product := unary (('*' | '^') unary)*
//! unary   := '-' unary | atom
//! atom    := number ['/' number] | 'i' | '(' sum ')' | 'exp' '(' sum ')'
//!          | coord ['^' int] | 'E' n '[' int ']' | '@' name ['^' int] | frame
//! coord   := r<n> | x<n> | z<n> | zb<n>
//! frame   := dlr<n> | dth<n> | dthh<n> | dps<n> | dpsh<n> | dx<n> | dlx<n>
//!          | dlz<n> | dlzb<n> | dz<n> | dzb<n>
//! ```
//!
//! `*` and `^` are both the exterior product; `^` directly after a
//! coordinate, a parameter or a closing parenthesis of a function followed
//! by an integer is a power.

use std::fmt;

use crate::chart::{Chart, ChartKind, Leg};
use crate::coeffring::{FnElem, Qi};
use crate::error::CalcError;
use crate::forms::Form;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Word(String),
    Param(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            k += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            k += 1;
            continue;
        }
        let start = k;
        if c.is_ascii_digit() {
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let s: String = chars[start..k].iter().collect();
            let v = s.parse::<i64>().map_err(|_| ParseError {
                line: l0,
                col: c0,
                message: format!("integer literal '{s}' is too large"),
                expected: vec![],
            })?;
            out.push(Spanned { tok: Tok::Int(v), line: l0, col: c0 });
        } else if c.is_ascii_alphabetic() {
            while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                k += 1;
            }
            out.push(Spanned { tok: Tok::Word(chars[start..k].iter().collect()), line: l0, col: c0 });
        } else if c == '@' {
            k += 1;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            if k == start + 1 {
                return Err(ParseError { line: l0, col: c0, message: "empty parameter name".into(), expected: vec!["name".into()] });
            }
            out.push(Spanned { tok: Tok::Param(chars[start + 1..k].iter().collect()), line: l0, col: c0 });
        } else if "+-*^/()[]".contains(c) {
            k += 1;
            out.push(Spanned { tok: Tok::Sym(c), line: l0, col: c0 });
        } else {
            return Err(ParseError { line: l0, col: c0, message: format!("unexpected character '{c}'"), expected: vec![] });
        }
        col += k - start;
    }
    out.push(Spanned { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    chart: &'a Chart,
}

const ATOM_START: &[&str] = &["number", "i", "(", "exp", "r<n>", "x<n>", "z<n>", "zb<n>", "E<n>[k]", "@name", "frame covector"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }
    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }
    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn err_at(&self, at: &Spanned, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError { line: at.line, col: at.col, message: message.into(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }
    fn err(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        self.err_at(&self.toks[self.pos], message, expected)
    }
    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'"), &[&c.to_string()]))
        }
    }
    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.err("expected an integer", &["integer"])),
        }
    }

    fn sum(&mut self) -> Result<Form, ParseError> {
        let mut acc = if *self.peek() == Tok::Sym('-') {
            self.bump();
            self.product()?.neg()
        } else {
            self.product()?
        };
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.product()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Tok::Sym('*') | Tok::Sym('^')) {
            self.bump();
            let rhs = self.unary()?;
            acc = acc.wedge(&rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Form, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.atom()
    }

    /// `^ int` power suffix on a function atom.
    fn power(&mut self, base: FnElem, at: &Spanned) -> Result<FnElem, ParseError> {
        let is_pow = *self.peek() == Tok::Sym('^')
            && (matches!(self.peek2(), Tok::Int(_)) || (*self.peek2() == Tok::Sym('-') && matches!(self.toks.get(self.pos + 2).map(|t| &t.tok), Some(Tok::Int(_)))));
        if !is_pow {
            return Ok(base);
        }
        self.bump();
        let e = self.signed_int()?;
        if e >= 0 {
            Ok(base.pow(e as u32))
        } else {
            let inv = base.inv_monomial().map_err(|_| self.err_at(at, "negative power of a non-monomial", &[]))?;
            Ok(inv.pow((-e) as u32))
        }
    }

    fn atom(&mut self) -> Result<Form, ParseError> {
        let chart = *self.chart;
        let sig = chart.sig();
        let at = self.toks[self.pos].clone();
        match at.tok.clone() {
            Tok::Int(n) => {
                self.bump();
                if *self.peek() == Tok::Sym('/') {
                    self.bump();
                    let d = match self.peek().clone() {
                        Tok::Int(d) if d != 0 => d,
                        _ => return Err(self.err("expected a nonzero denominator", &["integer"])),
                    };
                    self.bump();
                    return Ok(Form::constant(chart, Qi::ratio(n, d)));
                }
                Ok(Form::constant(chart, Qi::int(n)))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.sum()?;
                self.expect_sym(')')?;
                if let Some(f) = as_function(&inner) {
                    let f = self.power(f, &at)?;
                    return Ok(Form::function(chart, f));
                }
                Ok(inner)
            }
            Tok::Param(name) => {
                self.bump();
                let f = self.power(FnElem::param(sig, &name, 1), &at)?;
                Ok(Form::function(chart, f))
            }
            Tok::Word(w) => {
                self.bump();
                if w == "i" {
                    return Ok(Form::constant(chart, Qi::i()));
                }
                if w == "exp" {
                    self.expect_sym('(')?;
                    let inner = self.sum()?;
                    self.expect_sym(')')?;
                    return inner.exp().map_err(|e| self.err_at(&at, e.to_string(), &[]));
                }
                let (prefix, idx) = split_word(&w).ok_or_else(|| self.err_at(&at, format!("unknown token '{w}'"), ATOM_START))?;
                if prefix == "E" {
                    self.expect_sym('[')?;
                    let k = self.signed_int()?;
                    self.expect_sym(']')?;
                    if idx == 0 || idx > sig.na {
                        return Err(self.err_at(&at, format!("angle index {idx} out of range (1..={})", sig.na), &[]));
                    }
                    return Ok(Form::function(chart, FnElem::e(sig, idx - 1, k as i32)));
                }
                if let Some(f) = self.coordinate(prefix, idx, &at)? {
                    let f = self.power(f, &at)?;
                    return Ok(Form::function(chart, f));
                }
                self.frame(prefix, idx, &at)
            }
            Tok::End => Err(self.err("unexpected end of input", ATOM_START)),
            t => Err(self.err(format!("unexpected {}", describe(&t)), ATOM_START)),
        }
    }

    fn check_index(&self, idx: usize, bound: usize, what: &str, at: &Spanned) -> Result<usize, ParseError> {
        if idx == 0 || idx > bound {
            return Err(self.err_at(at, format!("{what} index {idx} out of range (1..={bound})"), &[]));
        }
        Ok(idx - 1)
    }

    fn polar(&self, idx: usize, at: &Spanned) -> Result<usize, ParseError> {
        match self.chart.kind {
            ChartKind::Elliptic | ChartKind::ComplexLog | ChartKind::Correspondence => self.check_index(idx, self.chart.l, "polar", at),
            _ => Err(self.err_at(at, format!("polar coordinates need an elliptic chart, not {:?}", self.chart.kind), &[])),
        }
    }

    fn coordinate(&self, prefix: &str, idx: usize, at: &Spanned) -> Result<Option<FnElem>, ParseError> {
        let sig = self.chart.sig();
        Ok(Some(match prefix {
            "r" => FnElem::r(sig, self.polar(idx, at)?, 1),
            "x" => FnElem::x(sig, self.check_index(idx, sig.nx, "real", at)?, 1),
            "z" => FnElem::z(sig, self.polar(idx, at)?),
            "zb" => FnElem::zbar(sig, self.polar(idx, at)?),
            _ => return Ok(None),
        }))
    }

    fn angle(&self, block: &str, idx: usize, at: &Spanned) -> Result<usize, ParseError> {
        let c = self.chart;
        let h = c.l + c.f;
        match (c.kind, block) {
            (ChartKind::Elliptic | ChartKind::ComplexLog | ChartKind::Correspondence, "th") => self.check_index(idx, c.l, "theta", at),
            (ChartKind::Elliptic | ChartKind::ComplexLog | ChartKind::Correspondence, "ps") => {
                Ok(c.l + self.check_index(idx, c.f, "psi", at)?)
            }
            (ChartKind::RealLog | ChartKind::Smooth, "ps") => self.check_index(idx, c.f, "psi", at),
            (ChartKind::Correspondence, "thh") => Ok(h + self.check_index(idx, c.l, "theta-hat", at)?),
            (ChartKind::Correspondence, "psh") => Ok(h + c.l + self.check_index(idx, c.f, "psi-hat", at)?),
            _ => Err(self.err_at(at, format!("d{block} is not part of a {:?} frame", c.kind), &[])),
        }
    }

    fn leg(&self, leg: Leg) -> Form {
        Form::leg(*self.chart, leg).expect("leg resolved against the chart")
    }

    fn frame(&self, prefix: &str, idx: usize, at: &Spanned) -> Result<Form, ParseError> {
        let c = *self.chart;
        let sig = c.sig();
        let i = Qi::i();
        match prefix {
            "dlr" => Ok(self.leg(Leg::LogR(self.polar(idx, at)?))),
            "dth" | "dps" | "dthh" | "dpsh" => Ok(self.leg(Leg::Ang(self.angle(&prefix[1..], idx, at)?))),
            "dlz" | "dlzb" | "dz" | "dzb" => {
                let p = self.polar(idx, at)?;
                let bar = prefix.ends_with('b');
                let s = if bar { -i } else { i };
                let base = self.leg(Leg::LogR(p)).add(&self.leg(Leg::Ang(c.polar_angle(p))).scale(&s));
                if prefix.starts_with("dl") {
                    Ok(base)
                } else {
                    let w = if bar { FnElem::zbar(sig, p) } else { FnElem::z(sig, p) };
                    Ok(base.scale_fn(&w))
                }
            }
            "dlx" => {
                if c.kind != ChartKind::RealLog {
                    return Err(self.err_at(at, format!("dlx needs a real-log chart, not {:?}", c.kind), &[]));
                }
                Ok(self.leg(Leg::LogX(self.check_index(idx, c.l, "log", at)?)))
            }
            "dx" => {
                let s = self.check_index(idx, sig.nx, "real", at)?;
                if c.kind == ChartKind::RealLog && s < c.l {
                    return Ok(self.leg(Leg::LogX(s)).scale_fn(&FnElem::x(sig, s, 1)));
                }
                Ok(self.leg(Leg::Dx(s)))
            }
            _ => Err(self.err_at(at, format!("unknown token '{prefix}{idx}'"), ATOM_START)),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("integer {v}"),
        Tok::Word(w) => format!("'{w}'"),
        Tok::Param(p) => format!("@{p}"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

fn split_word(w: &str) -> Option<(&str, usize)> {
    let cut = w.find(|c: char| c.is_ascii_digit())?;
    let (p, d) = w.split_at(cut);
    if p.is_empty() || !d.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((p, d.parse().ok()?))
}

fn as_function(a: &Form) -> Option<FnElem> {
    if a.terms().all(|(m, _)| *m == 0) {
        Some(a.scalar_part())
    } else {
        None
    }
}

/// Parses `src` as a form over `chart`.
pub fn parse_form(src: &str, chart: &Chart) -> Result<Form, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, chart };
    let f = p.sum()?;
    if *p.peek() != Tok::End {
        let t = p.peek().clone();
        return Err(p.err(format!("unexpected {} after expression", describe(&t)), &["+", "-", "*", "^", "end of input"]));
    }
    Ok(f)
}

/// Parses a chart name (`c1`, `c2`, `c3`, `c1x2`, `r2`, `s2`, `cl1`, `cl2`) or
/// an inline `kind(l,f,m)` with kind one of `elliptic`, `complex-log`,
/// `real-log`, `smooth`, `corr`.
pub fn parse_chart(src: &str) -> Result<Chart, CalcError> {
    let s = src.trim();
    let named = match s {
        "c1" => Some(Chart::elliptic(1, 0, 0)),
        "c2" => Some(Chart::elliptic(2, 0, 0)),
        "c3" => Some(Chart::elliptic(3, 0, 0)),
        "c1x2" => Some(Chart::elliptic(1, 0, 2)),
        "r2" => Some(Chart::real_log(2, 0, 0)),
        "s2" => Some(Chart::smooth(0, 2)),
        "cl1" => Some(Chart::complex_log(1, 0, 0)),
        "cl2" => Some(Chart::complex_log(2, 0, 0)),
        _ => None,
    };
    if let Some(c) = named {
        return Ok(c);
    }
    let bad = || CalcError::Invalid(format!("unknown chart '{src}'; use a name or kind(l,f,m)"));
    let open = s.find('(').ok_or_else(bad)?;
    if !s.ends_with(')') {
        return Err(bad());
    }
    let kind = match &s[..open] {
        "elliptic" => ChartKind::Elliptic,
        "complex-log" => ChartKind::ComplexLog,
        "real-log" => ChartKind::RealLog,
        "smooth" => ChartKind::Smooth,
        "corr" => ChartKind::Correspondence,
        _ => return Err(bad()),
    };
    let nums: Vec<usize> = s[open + 1..s.len() - 1]
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    if nums.len() != 3 {
        return Err(bad());
    }
    Chart::new(kind, nums[0], nums[1], nums[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::print::print_form;

    fn c2() -> Chart {
        Chart::elliptic(2, 0, 0)
    }

    #[test]
    fn omega_of_c2() {
        let w = parse_form("dlr1^dth2 + dth1^dlr2", &c2()).unwrap();
        let b = |k| Form::basis(c2(), k);
        assert_eq!(w, b(0).wedge(&b(3)).add(&b(1).wedge(&b(2))));
    }

    #[test]
    fn exp_sugar() {
        let c = Chart::elliptic(1, 0, 0);
        let e = parse_form("exp(i*(dlr1^dth1))", &c).unwrap();
        let expect = Form::one(c).add(&Form::basis(c, 0).wedge(&Form::basis(c, 1)).scale(&Qi::i()));
        assert_eq!(e, expect);
    }

    #[test]
    fn complex_sugar() {
        let c = c2();
        let s = c.sig();
        let rho = parse_form("z1*z2 + dz1^dz2", &c).unwrap();
        let dz = |i| Form::dlog_z(c, i).scale_fn(&FnElem::z(s, i));
        assert_eq!(rho, Form::function(c, FnElem::z(s, 0).mul(&FnElem::z(s, 1))).add(&dz(0).wedge(&dz(1))));
        assert_eq!(parse_form("dlz1", &c).unwrap(), Form::dlog_z(c, 0));
        assert_eq!(parse_form("dlzb2", &c).unwrap(), Form::dlog_zbar(c, 1));
    }

    #[test]
    fn monomial_syntax() {
        let c = Chart::elliptic(1, 0, 3);
        let s = c.sig();
        let f = parse_form("3/2*i * r1^-1 * E1[2] * x3^2 * @lambda", &c).unwrap();
        let g = FnElem::r(s, 0, -1)
            .mul(&FnElem::e(s, 0, 2))
            .mul(&FnElem::x(s, 2, 2))
            .mul(&FnElem::param(s, "lambda", 1))
            .scale(&(Qi::ratio(3, 2) * Qi::i()));
        assert_eq!(f, Form::function(c, g));
        assert_eq!(print_form(&parse_form("r1^2", &c).unwrap().d()), "2*r1^2*dlr1");
    }

    #[test]
    fn errors_carry_positions() {
        let c = c2();
        let e = parse_form("dlr1 +\n  dth3", &c).unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_form("dlr1 + ", &c).unwrap_err();
        assert!(e.expected.iter().any(|t| t == "frame covector"));
        let e = parse_form("dlx1", &c).unwrap_err();
        assert!(e.message.contains("real-log"));
        let e = parse_form("(dlr1", &c).unwrap_err();
        assert_eq!(e.expected, vec![")"]);
        assert!(parse_form("dlr1 dth1", &c).is_err());
    }

    #[test]
    fn real_log_tokens() {
        let c = Chart::real_log(1, 0, 1);
        let a = parse_form("dlx1^dx2", &c).unwrap();
        assert_eq!(a, Form::leg(c, Leg::LogX(0)).unwrap().wedge(&Form::leg(c, Leg::Dx(1)).unwrap()));
        let dx1 = parse_form("dx1", &c).unwrap();
        assert_eq!(dx1, Form::leg(c, Leg::LogX(0)).unwrap().scale_fn(&FnElem::x(c.sig(), 0, 1)));
    }

    #[test]
    fn correspondence_tokens() {
        let c = Chart::correspondence(2, 0, 0);
        let f = parse_form("-dth1^dthh2 + dth2^dthh1", &c).unwrap();
        assert_eq!(print_form(&f), "-dth1^dthh2 - dthh1^dth2");
    }

    #[test]
    fn charts() {
        assert_eq!(parse_chart("c1x2").unwrap(), Chart::elliptic(1, 0, 2));
        assert_eq!(parse_chart("corr(2,0,0)").unwrap(), Chart::correspondence(2, 0, 0));
        assert_eq!(parse_chart("real-log(1, 0, 1)").unwrap(), Chart::real_log(1, 0, 1));
        assert!(parse_chart("smooth(1,0,0)").is_err());
        assert!(parse_chart("torus").is_err());
    }

    #[test]
    fn printed_forms_parse_back() {
        let c = Chart::elliptic(2, 1, 1);
        for src in [
            "(1 - 2*i)*r1^-1*E1[2]*dlr1^dps1 + 3/2*x1^2*dth2",
            "-r2*E2[-1]*@lambda^-2 + (r1 + x1)*dlr2^dx1",
            "exp(dlr1^dth1 + i*dlr2^dth2)",
        ] {
            let a = parse_form(src, &c).unwrap();
            let back = parse_form(&print_form(&a), &c).unwrap();
            assert_eq!(a, back, "{src}");
        }
    }
}
