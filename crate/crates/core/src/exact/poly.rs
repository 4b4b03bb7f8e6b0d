use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{common_denominator, Rational};
use super::ExactError;
use crate::scalar::Ring;

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with arbitrary-precision integer
/// coefficients.
///
/// Variables are kept sorted by name; binary operations on polynomials with
/// different variable lists merge the lists first, so polynomials built
/// independently can be combined freely.
#[derive(Clone)]
pub struct MultiPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, BigInt>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl MultiPoly {
    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial(Vec::new()), c);
        }
        MultiPoly { vars: Arc::new(Vec::new()), terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial(vec![1]), BigInt::one());
        MultiPoly { vars: Arc::new(vec![name.to_string()]), terms }
    }

    /// Builds a polynomial from `(coefficient, [(variable, exponent)])` terms.
    pub fn from_terms<S: AsRef<str>>(terms: &[(i64, Vec<(S, u32)>)]) -> Self {
        terms.iter().fold(Self::zero(), |acc, (c, powers)| {
            let mono = powers.iter().fold(Self::constant(*c), |m, (v, e)| {
                m * Self::var(v.as_ref()).pow(*e)
            });
            acc + mono
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter().rev()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        if self.is_constant() {
            Some(self.terms.values().next().cloned().unwrap_or_default())
        } else {
            None
        }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigInt> {
        self.terms.values()
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.as_str().cmp(name)).ok()
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.degree_in(name) > 0
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.var_index(name) {
            Some(i) => self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Re-expresses `self` over `vars`, which must contain every variable of
    /// `self` and be sorted.
    fn embed(&self, vars: &Arc<Vec<String>>) -> Self {
        if Arc::ptr_eq(&self.vars, vars) || *self.vars == **vars {
            return MultiPoly { vars: vars.clone(), terms: self.terms.clone() };
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("variable missing from merged context"))
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = vec![0u32; vars.len()];
                for (i, &x) in m.0.iter().enumerate() {
                    e[map[i]] = x;
                }
                (Monomial(e), c.clone())
            })
            .collect();
        MultiPoly { vars: vars.clone(), terms }
    }

    fn merged_vars(a: &Self, b: &Self) -> Arc<Vec<String>> {
        if Arc::ptr_eq(&a.vars, &b.vars) || a.vars == b.vars {
            return a.vars.clone();
        }
        if b.vars.is_empty() {
            return a.vars.clone();
        }
        if a.vars.is_empty() {
            return b.vars.clone();
        }
        let mut all: Vec<String> = a.vars.iter().chain(b.vars.iter()).cloned().collect();
        all.sort();
        all.dedup();
        Arc::new(all)
    }

    fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let vars = Self::merged_vars(a, b);
        (a.embed(&vars), b.embed(&vars))
    }

    /// Drops variables that no longer occur.
    pub fn trimmed(&self) -> Self {
        let used: Vec<usize> = (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        if used.len() == self.vars.len() {
            return self.clone();
        }
        let vars: Vec<String> = used.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial(used.iter().map(|&i| m.0[i]).collect()), c.clone()))
            .collect();
        MultiPoly { vars: Arc::new(vars), terms }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Divides every coefficient by `k`; `None` unless all divisions are exact.
    pub fn div_exact_int(&self, k: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            terms.insert(m.clone(), q);
        }
        Some(MultiPoly { vars: self.vars.clone(), terms })
    }

    /// Gcd of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Coefficients with respect to `name`: entry `i` multiplies `name^i`.
    pub fn coefficients_in(&self, name: &str) -> Vec<MultiPoly> {
        let Some(idx) = self.var_index(name) else {
            return vec![self.clone()];
        };
        let deg = self.degree_in(name) as usize;
        let mut parts: Vec<BTreeMap<Monomial, BigInt>> = vec![BTreeMap::new(); deg + 1];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = e[idx] as usize;
            e[idx] = 0;
            parts[k].insert(Monomial(e), c.clone());
        }
        parts
            .into_iter()
            .map(|terms| MultiPoly { vars: self.vars.clone(), terms }.trimmed())
            .collect()
    }

    /// Inverse of [`coefficients_in`](Self::coefficients_in).
    pub fn from_coefficients_in(name: &str, coeffs: &[MultiPoly]) -> Self {
        let x = Self::var(name);
        coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &x) + c)
    }

    /// Replaces `name` by `value` everywhere.
    pub fn substitute(&self, name: &str, value: &MultiPoly) -> Self {
        if self.var_index(name).is_none() {
            return self.clone();
        }
        self.coefficients_in(name)
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * value) + c)
    }

    /// Substitutes rational values for some variables and clears the
    /// denominators of the result. The returned polynomial equals the exact
    /// specialization times a positive integer, and is made primitive.
    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> Self {
        let idx: Vec<Option<&Rational>> = self.vars.iter().map(|v| values.get(v)).collect();
        let rest: Vec<String> = self
            .vars
            .iter()
            .zip(&idx)
            .filter(|(_, q)| q.is_none())
            .map(|(v, _)| v.clone())
            .collect();
        let keep: Vec<usize> = idx.iter().enumerate().filter(|(_, q)| q.is_none()).map(|(i, _)| i).collect();
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut value = Rational::from_integer(c.clone());
            for (i, q) in idx.iter().enumerate() {
                if let Some(q) = q {
                    if m.0[i] > 0 {
                        value *= num_traits::pow((*q).clone(), m.0[i] as usize);
                    }
                }
            }
            let key = Monomial(keep.iter().map(|&i| m.0[i]).collect());
            let slot = acc.entry(key).or_insert_with(Rational::zero);
            *slot += value;
        }
        acc.retain(|_, v| !v.is_zero());
        let den = common_denominator(acc.values());
        let mut terms: BTreeMap<Monomial, BigInt> = acc
            .into_iter()
            .map(|(m, v)| {
                let scaled = v * Rational::from_integer(den.clone());
                (m, scaled.to_integer())
            })
            .collect();
        let g = terms.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in terms.values_mut() {
                *c /= &g;
            }
        }
        MultiPoly { vars: Arc::new(rest), terms }.trimmed()
    }

    /// Evaluates with every variable bound. Missing bindings are an error.
    pub fn eval<R: Ring>(
        &self,
        value_of: impl Fn(&str) -> Option<R>,
        from_int: impl Fn(&BigInt) -> R,
    ) -> Result<R, ExactError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for v in self.vars.iter() {
            let used = self.terms.keys().any(|m| m.0[values.len()] > 0);
            match value_of(v) {
                Some(x) => values.push(Some(x)),
                None if !used => values.push(None),
                None => return Err(ExactError::UnboundVariable(v.clone())),
            }
        }
        let mut total = R::zero();
        for (m, c) in &self.terms {
            let mut t = from_int(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = values[i].as_ref().expect("bound above");
                    for _ in 0..e {
                        t = t * x.clone();
                    }
                }
            }
            total = total + t;
        }
        Ok(total)
    }

    /// Evaluates at rational values.
    pub fn eval_rational(&self, values: &BTreeMap<String, Rational>) -> Result<Rational, ExactError> {
        self.eval(|v| values.get(v).cloned(), |c| Rational::from_integer(c.clone()))
    }

    fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Exact division; `None` when `divisor` does not divide `self` over the
    /// integers.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if let Some(c) = divisor.constant_value() {
            return self.div_exact_int(&c);
        }
        let (mut rem, d) = Self::unify(self, divisor);
        let vars = rem.vars.clone();
        let (lm, lc) = {
            let (m, c) = d.leading().expect("nonzero divisor");
            (m.clone(), c.clone())
        };
        let mut quotient = BTreeMap::new();
        while let Some((m, c)) = rem.leading() {
            if !lm.divides(m) {
                return None;
            }
            let (q, r) = c.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            let e: Vec<u32> = m.0.iter().zip(&lm.0).map(|(a, b)| a - b).collect();
            let mut t = BTreeMap::new();
            t.insert(Monomial(e.clone()), q.clone());
            let term = MultiPoly { vars: vars.clone(), terms: t };
            rem = &rem - &(&term * &d);
            quotient.insert(Monomial(e), q);
        }
        Some(MultiPoly { vars, terms: quotient })
    }

    fn add_into(terms: &mut BTreeMap<Monomial, BigInt>, m: Monomial, c: BigInt) {
        use std::collections::btree_map::Entry;
        match terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::unify(self, other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

impl Zero for MultiPoly {
    fn zero() -> Self {
        MultiPoly { vars: Arc::new(Vec::new()), terms: BTreeMap::new() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for MultiPoly {
    fn one() -> Self {
        Self::constant(1)
    }
}

impl From<i64> for MultiPoly {
    fn from(c: i64) -> Self {
        Self::constant(c)
    }
}

impl From<BigInt> for MultiPoly {
    fn from(c: BigInt) -> Self {
        Self::constant(c)
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (mut a, b) = MultiPoly::unify(self, rhs);
        for (m, c) in b.terms {
            MultiPoly::add_into(&mut a.terms, m, c);
        }
        a
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        if rhs.is_zero() {
            return self.clone();
        }
        let (mut a, b) = MultiPoly::unify(self, rhs);
        for (m, c) in b.terms {
            MultiPoly::add_into(&mut a.terms, m, -c);
        }
        a
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero();
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        let (a, b) = MultiPoly::unify(self, rhs);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect();
                MultiPoly::add_into(&mut terms, Monomial(e), ca * cb);
            }
        }
        MultiPoly { vars: a.vars, terms }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], e)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}
