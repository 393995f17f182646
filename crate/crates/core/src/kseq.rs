//! Gauss-map symbol sequences `k_0, k_1, ...` and closed-form generators for
//! them.
//!
//! A generator knows its asymptotic growth, which is what unique-ergodicity
//! certification needs; a finite list never can.

use std::fmt;

use serde::Serialize;

use crate::error::{ItmError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum KSource {
    FromParams,
    UserSupplied,
    Generator(String),
}

/// Finite prefix `(k_0, ..., k_n)` of a symbol sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KSequence {
    pub symbols: Vec<u64>,
    pub source: KSource,
    /// False when something known about the sequence rules out membership in
    /// the admissible set (symbols other than 1 infinitely often at both
    /// even and odd positions), e.g. a generator whose even or odd tail is
    /// constantly 1.
    pub kappa_valid_prefix: bool,
}

impl KSequence {
    pub fn new(symbols: Vec<u64>, source: KSource) -> Result<Self> {
        if symbols.contains(&0) {
            return Err(ItmError::InvalidArgument("k-symbols must be at least 1".into()));
        }
        Ok(KSequence { symbols, source, kappa_valid_prefix: true })
    }

    pub fn user(symbols: Vec<u64>) -> Result<Self> {
        Self::new(symbols, KSource::UserSupplied)
    }

    /// `k` repeated `n` times.
    pub fn constant(k: u64, n: usize) -> Result<Self> {
        KGenerator::Constant(k).prefix(n)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses a comma or whitespace separated list.
    pub fn parse_list(s: &str) -> Result<Self> {
        let symbols = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| ItmError::Parse(format!("bad k-symbol {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::user(symbols)
    }
}

impl fmt::Display for KSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.symbols.iter().map(u64::to_string).collect();
        f.write_str(&s.join(","))
    }
}

/// Asymptotic form of `i -> k(i)` for large `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Growth {
    /// Exact polynomial with coefficients from the constant term up.
    Poly(Vec<f64>),
    /// Exactly `lead * base^i`.
    Exp {
        base: f64,
        lead: f64,
    },
    /// The sequence is periodic with this period.
    Periodic(Vec<u64>),
    Unknown,
}

impl Growth {
    /// Polynomial degree, or `None` unless this is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Growth::Poly(c) => Some(trim(c).len().saturating_sub(1)),
            _ => None,
        }
    }

    /// `i -> k(a*i + b)`.
    pub(crate) fn compose_linear(&self, a: f64, b: f64) -> Growth {
        match self {
            Growth::Poly(c) => {
                // Horner in the polynomial ring.
                let mut acc = vec![0.0];
                for coef in c.iter().rev() {
                    acc = poly_mul(&acc, &[b, a]);
                    acc[0] += coef;
                }
                Growth::Poly(trim(&acc).to_vec())
            }
            Growth::Exp { base, lead } => Growth::Exp { base: base.powf(a), lead: lead * base.powf(b) },
            Growth::Periodic(_) | Growth::Unknown => Growth::Unknown,
        }
    }

    pub(crate) fn eventually_at_least_two(&self) -> bool {
        match self {
            Growth::Poly(c) => {
                let c = trim(c);
                match c.len() {
                    0 => false,
                    1 => c[0] >= 2.0,
                    _ => *c.last().unwrap() > 0.0,
                }
            }
            Growth::Exp { base, lead } => *lead > 0.0 && (*base > 1.0 || (*base == 1.0 && *lead >= 2.0)),
            Growth::Periodic(p) => p.iter().all(|&k| k >= 2),
            Growth::Unknown => false,
        }
    }

    pub(crate) fn is_constant_one(&self) -> bool {
        match self {
            Growth::Poly(c) => trim(c) == [1.0],
            Growth::Exp { base, lead } => *base == 1.0 && *lead == 1.0,
            Growth::Periodic(p) => p.iter().all(|&k| k == 1),
            Growth::Unknown => false,
        }
    }
}

pub(crate) fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 1 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn poly_add(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) + sign * b.get(i).copied().unwrap_or(0.0)).collect()
}

/// Closed-form symbol generator.
#[derive(Clone, Debug, PartialEq)]
pub enum KGenerator {
    Constant(u64),
    /// `k_i = a*i + b`.
    Arith {
        a: u64,
        b: u64,
    },
    /// `k_i = a * r^i`.
    Geom {
        a: u64,
        r: u64,
    },
    /// Periodic repetition of the block.
    Cycle(Vec<u64>),
    /// Periodic repetition of `block` followed by `m` twos.
    Padded {
        m: usize,
        block: Vec<u64>,
    },
    /// `k_{2i} = even(i)` and `k_{2i-1} = odd(i)`.
    Interleave {
        even: Box<KGenerator>,
        odd: Box<KGenerator>,
    },
    /// `k_i = expr(i)`.
    Formula {
        source: String,
        expr: Expr,
    },
    /// A finite list; indices past its end are unavailable.
    List(Vec<u64>),
}

impl KGenerator {
    /// Parses `constant:k`, `arith:a,b`, `geom:a,r`, `cycle:k,k,...`,
    /// `padded:m[:k,k,...]`, `list:k,k,...`, `k_i=<expr>` or
    /// `k_{2i}=<expr>;k_{2i-1}=<expr>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let nums = |t: &str| -> Result<Vec<u64>> {
            t.split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| ItmError::Parse(format!("bad number {x:?} in {s:?}"))))
                .collect()
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.starts_with("k_{2i}=") || compact.starts_with("k_{2i-1}=") {
            let mut even = None;
            let mut odd = None;
            for part in compact.split([';', ',']).filter(|p| !p.is_empty()) {
                if let Some(e) = part.strip_prefix("k_{2i}=") {
                    even = Some(Box::new(KGenerator::formula(e)?));
                } else if let Some(e) = part.strip_prefix("k_{2i-1}=") {
                    odd = Some(Box::new(KGenerator::formula(e)?));
                } else {
                    return Err(ItmError::Parse(format!("unexpected clause {part:?}")));
                }
            }
            return match (even, odd) {
                (Some(even), Some(odd)) => Ok(KGenerator::Interleave { even, odd }),
                _ => Err(ItmError::Parse("interleaved generator needs both k_{2i} and k_{2i-1}".into())),
            };
        }
        if let Some(e) = compact.strip_prefix("k_i=") {
            return KGenerator::formula(e);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| ItmError::Parse(format!("unknown generator {s:?}")))?;
        let g = match kind.trim() {
            "constant" => {
                let v = nums(rest)?;
                match v.as_slice() {
                    [k] => KGenerator::Constant(*k),
                    _ => return Err(ItmError::Parse("constant:k takes one value".into())),
                }
            }
            "arith" => match nums(rest)?.as_slice() {
                [a, b] => KGenerator::Arith { a: *a, b: *b },
                _ => return Err(ItmError::Parse("arith:a,b takes two values".into())),
            },
            "geom" => match nums(rest)?.as_slice() {
                [a, r] => KGenerator::Geom { a: *a, r: *r },
                _ => return Err(ItmError::Parse("geom:a,r takes two values".into())),
            },
            "cycle" => KGenerator::Cycle(nums(rest)?),
            "list" => KGenerator::List(nums(rest)?),
            "padded" => {
                let (m, block) = match rest.split_once(':') {
                    Some((m, b)) => (m, nums(b)?),
                    None => (rest, vec![1]),
                };
                let m = m.trim().parse::<usize>().map_err(|_| ItmError::Parse(format!("bad padding {m:?}")))?;
                KGenerator::Padded { m, block }
            }
            other => return Err(ItmError::Parse(format!("unknown generator kind {other:?}"))),
        };
        g.validate()?;
        Ok(g)
    }

    fn formula(e: &str) -> Result<Self> {
        let expr = Expr::parse(e)?;
        Ok(KGenerator::Formula { source: e.to_string(), expr })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ItmError::InvalidArgument(m.to_string()));
        match self {
            KGenerator::Constant(0) => bad("constant generator needs k >= 1"),
            KGenerator::Arith { b: 0, .. } => bad("arith generator needs b >= 1"),
            KGenerator::Geom { a, r } if *a == 0 || *r == 0 => bad("geom generator needs a, r >= 1"),
            KGenerator::Cycle(v) | KGenerator::List(v) if v.is_empty() || v.contains(&0) => {
                bad("symbol lists must be nonempty with entries >= 1")
            }
            KGenerator::Padded { block, .. } if block.contains(&0) => bad("padded block entries must be >= 1"),
            KGenerator::Padded { m: 0, block } if block.is_empty() => bad("padded generator is empty"),
            _ => Ok(()),
        }
    }

    /// `k_i`, or an error past the end of a list or on overflow.
    pub fn value(&self, i: u64) -> Result<u64> {
        let overflow = || ItmError::InvalidArgument(format!("k_{i} does not fit in 64 bits"));
        let v = match self {
            KGenerator::Constant(k) => *k,
            KGenerator::Arith { a, b } => a.checked_mul(i).and_then(|x| x.checked_add(*b)).ok_or_else(overflow)?,
            KGenerator::Geom { a, r } => u32::try_from(i)
                .ok()
                .and_then(|e| r.checked_pow(e))
                .and_then(|p| p.checked_mul(*a))
                .ok_or_else(overflow)?,
            KGenerator::Cycle(v) => v[(i % v.len() as u64) as usize],
            KGenerator::Padded { m, block } => {
                let period = (block.len() + m) as u64;
                let j = (i % period) as usize;
                if j < block.len() {
                    block[j]
                } else {
                    2
                }
            }
            KGenerator::Interleave { even, odd } => {
                if i.is_multiple_of(2) {
                    even.value(i / 2)?
                } else {
                    odd.value(i.div_ceil(2))?
                }
            }
            KGenerator::Formula { expr, .. } => {
                let v = expr.eval(i as i128).ok_or_else(overflow)?;
                u64::try_from(v)
                    .map_err(|_| ItmError::InvalidArgument(format!("k_{i} = {v} is not a positive 64-bit integer")))?
            }
            KGenerator::List(v) => *v
                .get(i as usize)
                .ok_or_else(|| ItmError::PrefixExhausted { needed: i as usize + 1, achieved: v.len() })?,
        };
        if v == 0 {
            return Err(ItmError::InvalidArgument(format!("k_{i} = 0 is not a valid symbol")));
        }
        Ok(v)
    }

    /// `(k_0, ..., k_{n-1})`.
    pub fn prefix(&self, n: usize) -> Result<KSequence> {
        self.validate()?;
        let symbols = (0..n as u64).map(|i| self.value(i)).collect::<Result<Vec<_>>>()?;
        let mut ks = KSequence::new(symbols, KSource::Generator(self.to_string()))?;
        ks.kappa_valid_prefix = !self.has_constant_one_tail();
        Ok(ks)
    }

    /// Like [`KGenerator::prefix`] but stops quietly at the first index that
    /// cannot be produced (end of a list, overflow).
    pub fn prefix_lossy(&self, n: usize) -> KSequence {
        let symbols: Vec<u64> = (0..n as u64).map_while(|i| self.value(i).ok()).collect();
        let mut ks = KSequence { symbols, source: KSource::Generator(self.to_string()), kappa_valid_prefix: true };
        ks.kappa_valid_prefix = !self.has_constant_one_tail();
        ks
    }

    /// Asymptotic class of `i -> k_i`.
    pub fn growth(&self) -> Growth {
        match self {
            KGenerator::Constant(k) => Growth::Poly(vec![*k as f64]),
            KGenerator::Arith { a, b } => Growth::Poly(trim(&[*b as f64, *a as f64]).to_vec()),
            KGenerator::Geom { a, r } => {
                if *r == 1 {
                    Growth::Poly(vec![*a as f64])
                } else {
                    Growth::Exp { base: *r as f64, lead: *a as f64 }
                }
            }
            KGenerator::Cycle(v) => Growth::Periodic(v.clone()),
            KGenerator::Padded { m, block } => {
                let mut v = block.clone();
                v.extend(std::iter::repeat_n(2, *m));
                Growth::Periodic(v)
            }
            KGenerator::Formula { expr, .. } => expr.growth(),
            KGenerator::Interleave { .. } | KGenerator::List(_) => Growth::Unknown,
        }
    }

    /// Classes of the even and odd subsequences `i -> k_{2i}` and
    /// `i -> k_{2i-1}`.
    pub fn parity_growth(&self) -> (Growth, Growth) {
        match self {
            KGenerator::Interleave { even, odd } => (even.growth(), odd.growth()),
            other => {
                let g = other.growth();
                match &g {
                    Growth::Periodic(p) => {
                        // Both subsequences are periodic with period dividing 2|p|.
                        let two: Vec<u64> = p.iter().chain(p.iter()).copied().collect();
                        let even: Vec<u64> = two.iter().step_by(2).copied().collect();
                        let mut odd: Vec<u64> = two.iter().skip(1).step_by(2).copied().collect();
                        // k_{2i-1} for i = 0 wraps to the last element of a period.
                        odd.rotate_right(1);
                        (Growth::Periodic(even), Growth::Periodic(odd))
                    }
                    _ => (g.compose_linear(2.0, 0.0), g.compose_linear(2.0, -1.0)),
                }
            }
        }
    }

    /// True for a strictly increasing sequence (declared by construction for
    /// arithmetic and geometric generators, derived for formulas).
    pub fn is_monotone(&self) -> bool {
        match self {
            KGenerator::Arith { a, .. } => *a > 0,
            KGenerator::Geom { r, .. } => *r > 1,
            KGenerator::Formula { expr, .. } => expr.is_monotone(),
            _ => false,
        }
    }

    fn has_constant_one_tail(&self) -> bool {
        let (e, o) = self.parity_growth();
        e.is_constant_one() || o.is_constant_one()
    }

    /// Ratio `k_i / k_{i-1}` when it is the same constant for every `i >= 1`.
    pub fn exact_ratio(&self) -> Option<f64> {
        match self {
            KGenerator::Geom { r, .. } => Some(*r as f64),
            KGenerator::Constant(_) => Some(1.0),
            KGenerator::Formula { expr, .. } => match expr.growth() {
                Growth::Exp { base, .. } => Some(base),
                Growth::Poly(c) if trim(&c).len() == 1 => Some(1.0),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, KGenerator::List(_))
    }
}

impl fmt::Display for KGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        match self {
            KGenerator::Constant(k) => write!(f, "constant:{k}"),
            KGenerator::Arith { a, b } => write!(f, "arith:{a},{b}"),
            KGenerator::Geom { a, r } => write!(f, "geom:{a},{r}"),
            KGenerator::Cycle(v) => write!(f, "cycle:{}", join(v)),
            KGenerator::Padded { m, block } => write!(f, "padded:{m}:{}", join(block)),
            KGenerator::List(v) => write!(f, "list:{}", join(v)),
            KGenerator::Formula { source, .. } => write!(f, "k_i={source}"),
            KGenerator::Interleave { even, odd } => {
                let inner = |g: &KGenerator| match g {
                    KGenerator::Formula { source, .. } => source.clone(),
                    other => other.to_string(),
                };
                write!(f, "k_{{2i}}={};k_{{2i-1}}={}", inner(even), inner(odd))
            }
        }
    }
}

/// Integer expression in one variable `i`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(i128),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    /// Parses `+ - * ^`, parentheses, integers and `i`; juxtaposition such as
    /// `2i` means multiplication.
    pub fn parse(s: &str) -> Result<Expr> {
        let tokens: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { t: &tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != tokens.len() {
            return Err(ItmError::Parse(format!("unexpected {:?} in formula {s:?}", tokens[p.pos])));
        }
        Ok(e)
    }

    pub fn eval(&self, i: i128) -> Option<i128> {
        match self {
            Expr::Num(n) => Some(*n),
            Expr::Var => Some(i),
            Expr::Add(a, b) => a.eval(i)?.checked_add(b.eval(i)?),
            Expr::Sub(a, b) => a.eval(i)?.checked_sub(b.eval(i)?),
            Expr::Mul(a, b) => a.eval(i)?.checked_mul(b.eval(i)?),
            Expr::Pow(a, b) => {
                let e = u32::try_from(b.eval(i)?).ok()?;
                a.eval(i)?.checked_pow(e)
            }
            Expr::Neg(a) => a.eval(i)?.checked_neg(),
        }
    }

    pub fn growth(&self) -> Growth {
        use Growth::*;
        match self {
            Expr::Num(n) => Poly(vec![*n as f64]),
            Expr::Var => Poly(vec![0.0, 1.0]),
            Expr::Neg(a) => match a.growth() {
                Poly(c) => Poly(c.iter().map(|x| -x).collect()),
                Exp { base, lead } => Exp { base, lead: -lead },
                _ => Unknown,
            },
            Expr::Add(a, b) => combine_sum(a.growth(), b.growth(), 1.0),
            Expr::Sub(a, b) => combine_sum(a.growth(), b.growth(), -1.0),
            Expr::Mul(a, b) => match (a.growth(), b.growth()) {
                (Poly(x), Poly(y)) => Poly(trim(&poly_mul(&x, &y)).to_vec()),
                (Poly(c), Exp { base, lead }) | (Exp { base, lead }, Poly(c)) if trim(&c).len() == 1 => {
                    Exp { base, lead: lead * c[0] }
                }
                (Exp { base: b1, lead: l1 }, Exp { base: b2, lead: l2 }) => Exp { base: b1 * b2, lead: l1 * l2 },
                _ => Unknown,
            },
            Expr::Pow(a, b) => match (a.growth(), b.growth()) {
                (base, Poly(e)) if trim(&e).len() == 1 => {
                    let n = e[0];
                    if n < 0.0 || n.fract() != 0.0 {
                        return Unknown;
                    }
                    let mut acc = Poly(vec![1.0]);
                    for _ in 0..n as u32 {
                        acc = match (acc, &base) {
                            (Poly(x), Poly(y)) => Poly(trim(&poly_mul(&x, y)).to_vec()),
                            (Poly(x), Exp { base, lead }) if trim(&x).len() == 1 => {
                                Exp { base: *base, lead: lead * x[0] }
                            }
                            (Exp { base: b1, lead: l1 }, Exp { base: b2, lead: l2 }) => {
                                Exp { base: b1 * b2, lead: l1 * l2 }
                            }
                            _ => return Unknown,
                        };
                    }
                    acc
                }
                (Poly(c), Poly(e)) if trim(&c).len() == 1 && trim(&e).len() == 2 => {
                    // c^(m i + t) = c^t (c^m)^i
                    let (t, m) = (e[0], e[1]);
                    Exp { base: c[0].powf(m), lead: c[0].powf(t) }
                }
                _ => Unknown,
            },
        }
    }

    fn is_monotone(&self) -> bool {
        match self.growth() {
            Growth::Poly(c) => {
                // Nondecreasing on i >= 0 when every coefficient past the
                // constant is nonnegative and the polynomial is not constant.
                let c = trim(&c);
                c.len() > 1 && c[1..].iter().all(|&x| x >= 0.0)
            }
            Growth::Exp { base, lead } => base > 1.0 && lead > 0.0,
            _ => false,
        }
    }
}

fn combine_sum(a: Growth, b: Growth, sign: f64) -> Growth {
    use Growth::*;
    match (a, b) {
        (Poly(x), Poly(y)) => Poly(trim(&poly_add(&x, &y, sign)).to_vec()),
        (Exp { base, lead }, Poly(_)) => Exp { base, lead },
        (Poly(_), Exp { base, lead }) => Exp { base, lead: sign * lead },
        (Exp { base: b1, lead: l1 }, Exp { base: b2, lead: l2 }) => {
            if b1 > b2 {
                Exp { base: b1, lead: l1 }
            } else if b2 > b1 {
                Exp { base: b2, lead: sign * l2 }
            } else if l1 + sign * l2 != 0.0 {
                Exp { base: b1, lead: l1 + sign * l2 }
            } else {
                Unknown
            }
        }
        _ => Unknown,
    }
}

// Lower-order terms never matter for the classes above, but an exponential
// plus a polynomial is not exactly `lead * base^i`; the `Exp` class then only
// describes the leading behavior, which is all the certification rules use.

struct Parser<'a> {
    t: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.t.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                '-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Some(c) if c == 'i' || c == '(' || c.is_ascii_digit() => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.power()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('i') => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(ItmError::Parse("missing ')' in formula".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let s: String = self.t[start..self.pos].iter().collect();
                s.parse::<i128>().map(Expr::Num).map_err(|_| ItmError::Parse(format!("number too large: {s}")))
            }
            Some(c) => Err(ItmError::Parse(format!("unexpected {c:?} in formula"))),
            None => Err(ItmError::Parse("formula ends early".into())),
        }
    }
}
