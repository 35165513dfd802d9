//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a scalar
//! function at an expansion point, for every multi-index of total degree at
//! most the jet's order. Coefficients live in a dense vector laid out in
//! graded-lexicographic order; the layout of a lower order is always a prefix
//! of the layout of a higher order, so jets of different orders over the same
//! number of variables combine without reindexing.
//!
//! Arithmetic between jets of different orders truncates to the smaller order.
//! Differentiating with respect to a variable lowers the order by one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vector of a monomial, one entry per chart variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u8>);

impl MultiIndex {
    pub fn zero(num_vars: usize) -> Self {
        MultiIndex(vec![0; num_vars])
    }

    /// Unit index `e_var`, optionally repeated: `unit(3, 1, 2)` is `(0, 2, 0)`.
    pub fn unit(num_vars: usize, var: usize, times: u8) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = times;
        MultiIndex(e)
    }

    pub fn from_slice(exps: &[u8]) -> Self {
        MultiIndex(exps.to_vec())
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    /// `α! = Π α_i!`.
    pub fn factorial<S: Scalar>(&self) -> S {
        let mut acc: i64 = 1;
        for &e in &self.0 {
            for k in 2..=e as i64 {
                acc *= k;
            }
        }
        S::from_i64(acc)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded-lexicographic order: lower total degree first, then the index with
/// the larger leading exponent first.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

/// All multi-indices in `num_vars` variables of degree `≤ order`, graded-lex.
pub fn enumerate_indices(num_vars: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u8; num_vars];
    for degree in 0..=order {
        fill(&mut out, &mut current, 0, degree);
    }
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut [u8], pos: usize, remaining: usize) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(MultiIndex(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        fill(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of coefficients of a jet in `num_vars` variables truncated at `order`.
pub fn coefficient_count(num_vars: usize, order: usize) -> usize {
    binomial(num_vars + order, order)
}

/// Shared index tables for jets in a fixed number of variables up to a maximal order.
pub struct JetSpace {
    num_vars: usize,
    max_order: usize,
    indices: Vec<MultiIndex>,
    lookup: BTreeMap<Vec<u8>, usize>,
    /// For each position γ, the pairs (α, β) of positions with α + β = γ.
    products: Vec<Vec<(u32, u32)>>,
    /// `raise[pos * num_vars + var]` is the position of `index + e_var`.
    raise: Vec<Option<u32>>,
    /// `count[k]` = number of coefficients of degree ≤ k.
    count: Vec<usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("num_vars", &self.num_vars)
            .field("max_order", &self.max_order)
            .finish()
    }
}

impl JetSpace {
    pub fn new(num_vars: usize, max_order: usize) -> Arc<Self> {
        let indices = enumerate_indices(num_vars, max_order);
        let lookup: BTreeMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.0.clone(), i))
            .collect();
        let mut products = vec![Vec::new(); indices.len()];
        for (ia, a) in indices.iter().enumerate() {
            let da = a.degree();
            for (ib, b) in indices.iter().enumerate() {
                if da + b.degree() > max_order {
                    // graded order: every later b has at least this degree
                    if b.degree() > max_order - da {
                        break;
                    }
                    continue;
                }
                let sum: Vec<u8> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                let ig = lookup[&sum];
                products[ig].push((ia as u32, ib as u32));
            }
        }
        let mut raise = vec![None; indices.len() * num_vars];
        for (i, m) in indices.iter().enumerate() {
            for v in 0..num_vars {
                let mut up = m.0.clone();
                up[v] += 1;
                raise[i * num_vars + v] = lookup.get(&up).map(|&j| j as u32);
            }
        }
        let count = (0..=max_order)
            .map(|k| coefficient_count(num_vars, k))
            .collect();
        Arc::new(JetSpace {
            num_vars,
            max_order,
            indices,
            lookup,
            products,
            raise,
            count,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.lookup.get(&index.0).copied()
    }

    fn len(&self, order: usize) -> usize {
        self.count[order]
    }
}

/// Build the coordinate jets of all `point.len()` chart variables at `point`.
pub fn variables<S: Scalar>(space: &Arc<JetSpace>, point: &[S]) -> Result<Vec<Jet<S>>> {
    if point.len() != space.num_vars {
        return Err(Error::Argument(format!(
            "point has {} coordinates, space has {} variables",
            point.len(),
            space.num_vars
        )));
    }
    point
        .iter()
        .enumerate()
        .map(|(i, v)| Jet::variable(space, i, v.clone()))
        .collect()
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet<S: Scalar> {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (idx, c) in self.space.indices.iter().zip(&self.coeffs) {
            if !c.is_zero() {
                m.entry(&idx.0, c);
            }
        }
        m.finish()
    }
}

impl<S: Scalar> PartialEq for Jet<S> {
    fn eq(&self, other: &Self) -> bool {
        self.space.num_vars == other.space.num_vars
            && self.order == other.order
            && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> Jet<S> {
    pub fn constant(space: &Arc<JetSpace>, value: S) -> Self {
        Self::constant_with_order(space, value, space.max_order)
    }

    fn constant_with_order(space: &Arc<JetSpace>, value: S, order: usize) -> Self {
        let mut coeffs = vec![S::zero(); space.len(order)];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            order,
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, S::zero())
    }

    /// Constant jet in the same space and of the same order as `self`.
    pub fn constant_like(&self, value: S) -> Self {
        Self::constant_with_order(&self.space, value, self.order)
    }

    /// Jet of the coordinate function `x_var` at a point where it equals `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: S) -> Result<Self> {
        if var >= space.num_vars {
            return Err(Error::Argument(format!(
                "variable index {var} out of range for {} variables",
                space.num_vars
            )));
        }
        let mut jet = Self::constant(space, value);
        if space.max_order >= 1 {
            jet.coeffs[1 + var] = S::one();
        }
        Ok(jet)
    }

    /// Build a jet from explicit `(index, coefficient)` entries.
    pub fn from_coefficients(
        space: &Arc<JetSpace>,
        order: usize,
        entries: &[(MultiIndex, S)],
    ) -> Result<Self> {
        if order > space.max_order {
            return Err(Error::OrderExceeded {
                requested: order,
                order: space.max_order,
            });
        }
        let mut coeffs = vec![S::zero(); space.len(order)];
        for (idx, c) in entries {
            let pos =
                space
                    .position(idx)
                    .filter(|&p| p < coeffs.len())
                    .ok_or(Error::OrderExceeded {
                        requested: idx.degree(),
                        order,
                    })?;
            coeffs[pos] = c.clone();
        }
        Ok(Jet {
            space: space.clone(),
            order,
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn num_vars(&self) -> usize {
        self.space.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Constant term: the function value at the expansion point.
    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.space.indices.iter().zip(&self.coeffs)
    }

    /// Taylor coefficient `c_α`.
    pub fn coefficient(&self, index: &MultiIndex) -> Result<S> {
        self.check_index(index)?;
        Ok(self.coeffs[self.space.position(index).expect("index in layout")].clone())
    }

    fn check_index(&self, index: &MultiIndex) -> Result<()> {
        if index.num_vars() != self.num_vars() {
            return Err(Error::Argument(format!(
                "multi-index has {} entries, jet has {} variables",
                index.num_vars(),
                self.num_vars()
            )));
        }
        if index.degree() > self.order {
            return Err(Error::OrderExceeded {
                requested: index.degree(),
                order: self.order,
            });
        }
        Ok(())
    }

    /// Mixed partial derivative `∂^α f` at the expansion point, i.e. `α! c_α`.
    pub fn partial(&self, index: &MultiIndex) -> Result<S> {
        Ok(self.coefficient(index)? * index.factorial::<S>())
    }

    /// Forget all terms above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            space: self.space.clone(),
            order,
            coeffs: self.coeffs[..self.space.len(order)].to_vec(),
        }
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    pub fn d(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars() {
            return Err(Error::Argument(format!("no variable {var}")));
        }
        if self.order == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                order: 0,
            });
        }
        let order = self.order - 1;
        let n = self.num_vars();
        let coeffs = (0..self.space.len(order))
            .map(|pos| {
                let up = self.space.raise[pos * n + var].expect("raised index in layout") as usize;
                let e = self.space.indices[pos].0[var] as i64 + 1;
                self.coeffs[up].clone() * S::from_i64(e)
            })
            .collect();
        Ok(Jet {
            space: self.space.clone(),
            order,
            coeffs,
        })
    }

    /// Repeated differentiation `∂^α`.
    pub fn d_multi(&self, index: &MultiIndex) -> Result<Self> {
        self.check_index(index)?;
        let mut out = self.clone();
        for (var, &times) in index.0.iter().enumerate() {
            for _ in 0..times {
                out = out.d(var)?;
            }
        }
        Ok(out)
    }

    /// Re-express the jet in another space. `var_map[i]` is the target variable
    /// of source variable `i`, or `None` to restrict to the slice where that
    /// variable sits at the expansion point.
    pub fn transfer(&self, target: &Arc<JetSpace>, var_map: &[Option<usize>]) -> Result<Self> {
        if var_map.len() != self.num_vars() {
            return Err(Error::Argument("variable map length mismatch".into()));
        }
        let order = self.order.min(target.max_order);
        let mut coeffs = vec![S::zero(); target.len(order)];
        for (idx, c) in self.coefficients() {
            if c.is_zero() || idx.degree() > order {
                continue;
            }
            let mut out = vec![0u8; target.num_vars];
            let mut keep = true;
            for (i, &e) in idx.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match var_map[i] {
                    Some(t) if t < target.num_vars => out[t] += e,
                    Some(_) => return Err(Error::Argument("variable map out of range".into())),
                    None => keep = false,
                }
            }
            if keep {
                let pos = target.lookup[&out];
                coeffs[pos] += c.clone();
            }
        }
        Ok(Jet {
            space: target.clone(),
            order,
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn add_scalar(&self, s: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s.clone();
        out
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(
            self.space.num_vars, other.space.num_vars,
            "jets over different numbers of variables"
        );
    }

    /// The wider of two spaces over the same variables.
    fn wider(&self, other: &Self) -> Arc<JetSpace> {
        if self.space.max_order >= other.space.max_order {
            self.space.clone()
        } else {
            other.space.clone()
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let space = self.wider(other);
        let len = space.len(order);
        Jet {
            coeffs: (0..len)
                .map(|i| f(&self.coeffs[i], &other.coeffs[i]))
                .collect(),
            space,
            order,
        }
    }

    fn product(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let space = self.wider(other);
        let len = space.len(order);
        let mut coeffs = vec![S::zero(); len];
        for (g, slot) in coeffs.iter_mut().enumerate() {
            for &(a, b) in &space.products[g] {
                slot.mul_add_assign(&self.coeffs[a as usize], &other.coeffs[b as usize]);
            }
        }
        Jet {
            space,
            order,
            coeffs,
        }
    }

    /// Part of the jet without constant term.
    fn nilpotent_part(&self) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = S::zero();
        h
    }

    /// `Σ_k c_k h^k` where `h` is the non-constant part, by Horner's rule.
    fn compose(&self, taylor: &[S]) -> Self {
        let h = self.nilpotent_part();
        let n = self.order.min(taylor.len() - 1);
        let mut acc = Self::constant_with_order(&self.space, taylor[n].clone(), self.order);
        for k in (0..n).rev() {
            acc = acc.product(&h).add_scalar(&taylor[k]);
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        let a0 = self.value();
        let inv = a0.recip().map_err(|_| {
            Error::Singular("division by a jet with vanishing constant term".into())
        })?;
        let mut taylor = Vec::with_capacity(self.order + 1);
        let mut c = inv.clone();
        for _ in 0..=self.order {
            taylor.push(c.clone());
            c = -(c * inv.clone());
        }
        Ok(self.compose(&taylor))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::constant_with_order(&self.space, S::one(), self.order);
        for _ in 0..n.unsigned_abs() {
            acc = acc.product(&base);
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Self> {
        let e0 = self.value().exp()?;
        let mut taylor = Vec::with_capacity(self.order + 1);
        let mut c = e0;
        for k in 0..=self.order {
            taylor.push(c.clone());
            c = c * S::from_ratio(1, k as i64 + 1);
        }
        Ok(self.compose(&taylor))
    }

    pub fn ln(&self) -> Result<Self> {
        let a0 = self.value().clone();
        let l0 = a0.ln()?;
        let inv = a0.recip()?;
        let mut taylor = vec![l0];
        let mut pw = inv.clone();
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            taylor.push(pw.clone() * S::from_ratio(sign, k as i64));
            pw = pw * inv.clone();
        }
        Ok(self.compose(&taylor))
    }

    fn trig(&self, s0: S, c0: S, cosine: bool) -> Self {
        // derivatives of sin cycle through (sin, cos, -sin, -cos)
        let cycle = if cosine {
            [c0.clone(), -s0.clone(), -c0, s0]
        } else {
            [s0.clone(), c0.clone(), -s0, -c0]
        };
        let mut fact: i64 = 1;
        let taylor: Vec<S> = (0..=self.order)
            .map(|k| {
                if k > 1 {
                    fact *= k as i64;
                }
                cycle[k % 4].clone() * S::from_ratio(1, fact)
            })
            .collect();
        self.compose(&taylor)
    }

    pub fn sin(&self) -> Result<Self> {
        let a0 = self.value();
        Ok(self.trig(a0.sin()?, a0.cos()?, false))
    }

    pub fn cos(&self) -> Result<Self> {
        let a0 = self.value();
        Ok(self.trig(a0.sin()?, a0.cos()?, true))
    }

    /// `self^(num/den)` by the binomial series around the constant term.
    pub fn pow_rational(&self, num: i64, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::Argument("zero denominator in exponent".into()));
        }
        let a0 = self.value().clone();
        if a0.is_zero() {
            return Err(Error::Singular("fractional power at zero".into()));
        }
        let p0 = a0.pow_ratio(num, den)?;
        let inv = a0.recip()?;
        let r_num = num;
        let r_den = den as i64;
        // binom(r, k) a0^(r-k)
        let mut taylor = Vec::with_capacity(self.order + 1);
        let mut c = p0;
        for k in 0..=self.order as i64 {
            taylor.push(c.clone());
            c = c * S::from_ratio(r_num - k * r_den, (k + 1) * r_den) * inv.clone();
        }
        Ok(self.compose(&taylor))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.pow_rational(1, 2)
    }
}

macro_rules! jet_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, S: Scalar> $tr<&'a Jet<S>> for &'a Jet<S> {
            type Output = Jet<S>;
            fn $m(self, rhs: &'a Jet<S>) -> Jet<S> {
                $body(self, rhs)
            }
        }
        impl<S: Scalar> $tr<Jet<S>> for Jet<S> {
            type Output = Jet<S>;
            fn $m(self, rhs: Jet<S>) -> Jet<S> {
                $body(&self, &rhs)
            }
        }
        impl<'a, S: Scalar> $tr<&'a Jet<S>> for Jet<S> {
            type Output = Jet<S>;
            fn $m(self, rhs: &'a Jet<S>) -> Jet<S> {
                $body(&self, rhs)
            }
        }
        impl<'a, S: Scalar> $tr<Jet<S>> for &'a Jet<S> {
            type Output = Jet<S>;
            fn $m(self, rhs: Jet<S>) -> Jet<S> {
                $body(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a: &Jet<S>, b: &Jet<S>| a
    .zip_with(b, |x, y| x.clone() + y.clone()));
jet_binop!(Sub, sub, |a: &Jet<S>, b: &Jet<S>| a
    .zip_with(b, |x, y| x.clone() - y.clone()));
jet_binop!(Mul, mul, |a: &Jet<S>, b: &Jet<S>| a.product(b));

impl<S: Scalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.map(|c| -c.clone())
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.map(|c| -c.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn univariate(order: usize, value: Q) -> Jet<Q> {
        Jet::variable(&JetSpace::new(1, order), 0, value).unwrap()
    }

    fn coeffs_1d(j: &Jet<Q>) -> Vec<Q> {
        j.coefficients().map(|(_, c)| c.clone()).collect()
    }

    #[test]
    fn layout_is_graded() {
        let idx = enumerate_indices(2, 2);
        let exps: Vec<Vec<u8>> = idx.iter().map(|m| m.0.clone()).collect();
        assert_eq!(
            exps,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(coefficient_count(7, 6), 1716);
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(sorted, idx);
    }

    #[test]
    fn coordinate_function() {
        let x = univariate(3, q(2, 1));
        assert_eq!(coeffs_1d(&x), vec![q(2, 1), q(1, 1), q(0, 1), q(0, 1)]);
        let space = JetSpace::new(2, 2);
        let y = Jet::variable(&space, 1, Q::zero()).unwrap();
        assert!(y.value().is_zero());
        assert_eq!(
            y.partial(&MultiIndex::from_slice(&[0, 1])).unwrap(),
            Q::one()
        );
        assert!(Jet::<Q>::variable(&space, 2, Q::zero()).is_err());
        let third = univariate(6, q(1, 3));
        assert_eq!(*third.value(), q(1, 3));
    }

    #[test]
    fn arithmetic_examples() {
        let x = univariate(2, Q::zero());
        let one = Jet::constant(x.space(), Q::one());
        let p = (&one + &x) * (&one - &x);
        assert_eq!(coeffs_1d(&p), vec![q(1, 1), q(0, 1), q(-1, 1)]);

        let x3 = univariate(3, Q::zero());
        let one3 = Jet::constant(x3.space(), Q::one());
        let g = one3.try_div(&(&one3 - &x3)).unwrap();
        assert_eq!(coeffs_1d(&g), vec![Q::one(); 4]);

        let h = univariate(2, q(1, 2));
        assert_eq!(coeffs_1d(&(&h * &h)), vec![q(1, 4), q(1, 1), q(1, 1)]);

        let zero = univariate(2, Q::zero());
        assert!(matches!(zero.recip(), Err(Error::Singular(_))));
    }

    #[test]
    fn elementary_functions() {
        let x = univariate(3, Q::zero());
        assert_eq!(
            coeffs_1d(&x.exp().unwrap()),
            vec![q(1, 1), q(1, 1), q(1, 2), q(1, 6)]
        );
        // sqrt(4 + t) = 2 + t/4 - t^2/64 + ...
        let s = univariate(2, q(4, 1)).sqrt().unwrap();
        assert_eq!(coeffs_1d(&s), vec![q(2, 1), q(1, 4), q(-1, 64)]);
        // (1+t)^{3/2}: 1, 3/2, 3/8, -1/16
        let p = univariate(3, Q::one()).pow_rational(3, 2).unwrap();
        assert_eq!(coeffs_1d(&p), vec![q(1, 1), q(3, 2), q(3, 8), q(-1, 16)]);
        assert!(matches!(univariate(2, q(2, 1)).sqrt(), Err(Error::Mode(_))));
        assert!(matches!(
            univariate(2, q(-1, 1)).ln(),
            Err(Error::Singular(_))
        ));
        assert!(matches!(univariate(2, q(2, 1)).exp(), Err(Error::Mode(_))));
        let s = univariate(4, Q::zero()).sin().unwrap();
        assert_eq!(
            coeffs_1d(&s),
            vec![q(0, 1), q(1, 1), q(0, 1), q(-1, 6), q(0, 1)]
        );
        let c = univariate(4, Q::zero()).cos().unwrap();
        assert_eq!(
            coeffs_1d(&c),
            vec![q(1, 1), q(0, 1), q(-1, 2), q(0, 1), q(1, 24)]
        );
        let l = univariate(3, Q::one()).ln().unwrap();
        assert_eq!(coeffs_1d(&l), vec![q(0, 1), q(1, 1), q(-1, 2), q(1, 3)]);
    }

    #[test]
    fn partial_derivatives() {
        let x = univariate(3, q(2, 1));
        let cube = &(&x * &x) * &x;
        assert_eq!(
            cube.partial(&MultiIndex::from_slice(&[1])).unwrap(),
            q(12, 1)
        );
        let space = JetSpace::new(2, 2);
        let a = Jet::variable(&space, 0, Q::one()).unwrap();
        let b = Jet::variable(&space, 1, Q::one()).unwrap();
        assert_eq!(
            (&a * &b).partial(&MultiIndex::from_slice(&[1, 1])).unwrap(),
            Q::one()
        );
        let t = univariate(5, Q::zero());
        let one = Jet::constant(t.space(), Q::one());
        let g = one.try_div(&(&one - &t)).unwrap();
        assert_eq!(g.partial(&MultiIndex::from_slice(&[5])).unwrap(), q(120, 1));
        assert!(matches!(
            g.partial(&MultiIndex::from_slice(&[6])),
            Err(Error::OrderExceeded {
                requested: 6,
                order: 5
            })
        ));
    }

    #[test]
    fn derivative_and_transfer() {
        let space = JetSpace::new(2, 3);
        let x = Jet::variable(&space, 0, q(1, 1)).unwrap();
        let y = Jet::variable(&space, 1, q(2, 1)).unwrap();
        let f = &(&x * &x) * &y; // x^2 y
        let fx = f.d(0).unwrap();
        assert_eq!(fx.order(), 2);
        assert_eq!(*fx.value(), q(4, 1));
        assert_eq!(
            fx.partial(&MultiIndex::from_slice(&[1, 0])).unwrap(),
            q(4, 1)
        );
        // restrict to y = 2 slice, keep x as variable 0 of a 1-var space
        let line = JetSpace::new(1, 3);
        let r = f.transfer(&line, &[Some(0), None]).unwrap();
        assert_eq!(coeffs_1d(&r), vec![q(2, 1), q(4, 1), q(2, 1), q(0, 1)]);
        assert!(matches!(f.d(2), Err(Error::Argument(_))));
        let c = Jet::constant(&JetSpace::new(1, 0), Q::one());
        assert!(c.d(0).is_err());
    }
}
