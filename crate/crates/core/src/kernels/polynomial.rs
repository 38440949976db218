//! Homogeneous polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Multi-index exponent vector; its length is the ambient dimension.
pub type MultiIndex = Vec<u32>;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A homogeneous polynomial in `n` variables with exact coefficients.
///
/// Zero coefficients are never stored, so two polynomials are equal exactly
/// when their coefficient maps are.
#[derive(Clone, PartialEq, Eq)]
pub struct HomogeneousPolynomial {
    n: usize,
    degree: u32,
    coeffs: BTreeMap<MultiIndex, Rational>,
}

impl fmt::Debug for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousPolynomial(n={}, deg={}, {})", self.n, self.degree, self)
    }
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coeffs {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            let vars: Vec<String> = idx
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", a, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl HomogeneousPolynomial {
    pub fn zero(n: usize, degree: u32) -> Self {
        Self { n, degree, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n, 0);
        p.add_term(vec![0; n], c);
        p
    }

    /// Builds a polynomial from `(multi-index, coefficient)` terms; every
    /// multi-index must have length `n` and the same total degree.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Result<Self> {
        let mut coeffs: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        let mut degree: Option<u32> = None;
        for (idx, c) in terms {
            if idx.len() != n {
                return Err(Error::Parameter(format!("multi-index {idx:?} has wrong length for n = {n}")));
            }
            let d: u32 = idx.iter().sum();
            if let Some(d0) = degree {
                if d0 != d {
                    return Err(Error::Parameter(format!("polynomial is not homogeneous: degrees {d0} and {d}")));
                }
            }
            degree = Some(d);
            *coeffs.entry(idx).or_insert_with(Rational::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Self { n, degree: degree.unwrap_or(0), coeffs })
    }

    /// The monomial x_i (0-based index).
    pub fn variable(n: usize, i: usize) -> Self {
        let mut idx = vec![0; n];
        idx[i] = 1;
        let mut p = Self::zero(n, 1);
        p.add_term(idx, Rational::one());
        p
    }

    /// |x|^2 = x_1^2 + … + x_n^2.
    pub fn norm_squared(n: usize) -> Self {
        let mut p = Self::zero(n, 2);
        for i in 0..n {
            let mut idx = vec![0; n];
            idx[i] = 2;
            p.add_term(idx, Rational::one());
        }
        p
    }

    fn add_term(&mut self, idx: MultiIndex, c: Rational) {
        let entry = self.coeffs.entry(idx.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&idx);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, idx: &[u32]) -> Rational {
        self.coeffs.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(idx, c)| {
                let m: f64 = idx.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n, self.degree);
        }
        Self { n: self.n, degree: self.degree, coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let degree = if self.is_zero() { other.degree } else { self.degree };
        let mut out = Self { n: self.n, degree, coeffs: self.coeffs.clone() };
        for (k, v) in &other.coeffs {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Parameter(format!("dimension mismatch {} vs {}", self.n, other.n)));
        }
        if !self.is_zero() && !other.is_zero() && self.degree != other.degree {
            return Err(Error::Parameter(format!("degree mismatch {} vs {}", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Self::zero(self.n, self.degree + other.degree);
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &other.coeffs {
                let idx: MultiIndex = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.add_term(idx, va * vb);
            }
        }
        out
    }

    /// Multiplies by |x|^2.
    pub fn mul_norm_squared(&self) -> Self {
        self.mul(&Self::norm_squared(self.n))
    }

    pub fn mul_variable(&self, i: usize) -> Self {
        self.mul(&Self::variable(self.n, i))
    }

    /// ∂P/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n, self.degree.saturating_sub(1));
        for (k, v) in &self.coeffs {
            if k[i] == 0 {
                continue;
            }
            let mut idx = k.clone();
            idx[i] -= 1;
            out.add_term(idx, v * Rational::from_integer(BigInt::from(k[i])));
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree.saturating_sub(2));
        for i in 0..self.n {
            let d2 = self.derivative(i).derivative(i);
            for (k, v) in d2.coeffs {
                out.add_term(k, v);
            }
        }
        out
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    /// Parity under x → -x equals the parity of the degree.
    pub fn is_even(&self) -> bool {
        self.degree % 2 == 0
    }

    /// Splits P = p + |x|^2 R with p harmonic of the same degree.
    ///
    /// Uses the projection p = Σ_j (-1)^j |x|^{2j} Δ^j P / (2^j j! Π_{i=1..j}(n + 2k - 2 - 2i));
    /// the remainder is (P - p)/|x|^2 computed from the same series.
    pub fn harmonic_decompose(&self) -> (Self, Self) {
        let n = self.n as i64;
        let k = self.degree as i64;
        let mut harmonic = self.clone();
        let mut remainder = Self::zero(self.n, self.degree.saturating_sub(2));
        let mut lap = self.clone();
        let mut coeff = Rational::one();
        // |x|^{2(j-1)} accumulated for the remainder term
        let mut radial = Self::constant(self.n, Rational::one());
        let mut j = 1i64;
        while 2 * j <= k {
            lap = lap.laplacian();
            if lap.is_zero() {
                break;
            }
            let denom = n + 2 * k - 2 - 2 * j;
            coeff = coeff * rat(-1, 2 * j * denom);
            // term_j = coeff * |x|^{2j} Δ^j P = |x|^2 * (coeff |x|^{2(j-1)} Δ^j P)
            let inner = radial.mul(&lap).scale(&coeff);
            remainder = remainder.add(&inner.scale(&-Rational::one())).expect("remainder degrees agree");
            harmonic = harmonic.add(&inner.mul_norm_squared()).expect("harmonic degrees agree");
            radial = radial.mul_norm_squared();
            j += 1;
        }
        harmonic.degree = self.degree;
        remainder.degree = self.degree.saturating_sub(2);
        (harmonic, remainder)
    }

    /// Full expansion P = Σ_j |x|^{2j} h_{k-2j} with every h harmonic;
    /// entry `j` holds h_{k-2j}. Zero components are kept for bookkeeping.
    pub fn harmonic_expansion(&self) -> Vec<Self> {
        let mut parts = Vec::new();
        let mut current = self.clone();
        loop {
            let (h, r) = current.harmonic_decompose();
            parts.push(h);
            if current.degree < 2 || r.is_zero() {
                break;
            }
            current = r;
        }
        parts
    }

    /// Parses expressions such as `x1*x2*x3`, `x1^2 - x2^2`, `3/4*x1*(x2 + x3)`.
    /// Variables are `x1…xn` (aliases `x`, `y`, `z`).
    pub fn parse(input: &str, n: usize) -> Result<Self> {
        let mut parser = Parser { chars: input.chars().collect(), pos: 0, n };
        let poly = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.chars.len() {
            return Err(Error::Parse(format!(
                "unexpected `{}` at position {} in `{input}`",
                parser.chars[parser.pos], parser.pos
            )));
        }
        Self::from_terms(n, poly).map_err(|e| Error::Parse(format!("`{input}`: {e}")))
    }
}

/// Sparse polynomial used while parsing (not necessarily homogeneous).
type Sparse = BTreeMap<MultiIndex, Rational>;

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Sparse> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c == '+' || c == '-' {
                self.pos += 1;
                let t = self.term()?;
                let sign = if c == '+' { Rational::one() } else { -Rational::one() };
                for (k, v) in t {
                    *acc.entry(k).or_insert_with(Rational::zero) += v * &sign;
                }
            } else {
                break;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse> {
        let mut acc = self.power()?;
        while let Some(c) = self.peek() {
            if c == '*' {
                self.pos += 1;
                let f = self.power()?;
                acc = sparse_mul(&acc, &f);
            } else if c == '/' {
                self.pos += 1;
                let f = self.power()?;
                let divisor = sparse_constant(&f, self.n).ok_or_else(|| Error::Parse("division by a non-constant".into()))?;
                if divisor.is_zero() {
                    return Err(Error::Parse("division by zero".into()));
                }
                for v in acc.values_mut() {
                    *v = &*v / &divisor;
                }
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Sparse> {
        let base = self.unary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::Parse("expected a non-negative integer exponent".into()))?;
            let mut out = sparse_one(self.n);
            for _ in 0..e {
                out = sparse_mul(&out, &base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Sparse> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let mut v = self.unary()?;
                for c in v.values_mut() {
                    *c = -c.clone();
                }
                Ok(v)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Sparse> {
        let c = self.peek().ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(')') {
                return Err(Error::Parse("missing `)`".into()));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            let start = self.pos;
            while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.') {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            let value = parse_decimal(&text)?;
            let mut s = Sparse::new();
            s.insert(vec![0; self.n], value);
            return Ok(s);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            let index = match name.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => {
                    let digits = name.strip_prefix('x').ok_or_else(|| Error::Parse(format!("unknown variable `{name}`")))?;
                    let i: usize = digits.parse().map_err(|_| Error::Parse(format!("unknown variable `{name}`")))?;
                    if i == 0 {
                        return Err(Error::Parse("variables are numbered from x1".into()));
                    }
                    i - 1
                }
            };
            if index >= self.n {
                return Err(Error::Parse(format!("variable `{name}` exceeds dimension {}", self.n)));
            }
            let mut idx = vec![0; self.n];
            idx[index] = 1;
            let mut s = Sparse::new();
            s.insert(idx, Rational::one());
            return Ok(s);
        }
        Err(Error::Parse(format!("unexpected `{c}`")))
    }
}

fn parse_decimal(text: &str) -> Result<Rational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return Err(Error::Parse(format!("invalid number `{text}`")));
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| Error::Parse(format!("invalid number `{text}`")))?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(num, den))
}

fn sparse_one(n: usize) -> Sparse {
    let mut s = Sparse::new();
    s.insert(vec![0; n], Rational::one());
    s
}

fn sparse_mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let idx: MultiIndex = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            *out.entry(idx).or_insert_with(Rational::zero) += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn sparse_constant(s: &Sparse, n: usize) -> Option<Rational> {
    if s.is_empty() {
        return Some(Rational::zero());
    }
    if s.len() == 1 {
        if let Some(v) = s.get(&vec![0; n]) {
            return Some(v.clone());
        }
    }
    None
}
