//! Point invariants of `z_y = F(x, y, z, z_x)` and `y''' = H(x, y, y', y'')`.
//!
//! The PDE chart is `(x, y, z, p)` with `p = z_x`, carrying the operators
//! `D = ∂_x + p ∂_z` and `Δ = ∂_y + F ∂_z`. The ODE chart is `(x, y, p, q)`
//! with `p = y'`, `q = y''` and total derivative `D = ∂_x + p ∂_y + q ∂_p + H ∂_q`.
//! Both operators act on jets of the inner field, so nesting them only costs
//! jet order.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::field::ScalarField;
use crate::jet::{variables, Jet, JetSpace, MultiIndex};
use crate::scalar::{negligible, CoefficientMode, Scalar};

pub const PDE_VARIABLES: [&str; 4] = ["x", "y", "z", "p"];
pub const ODE_VARIABLES: [&str; 4] = ["x", "y", "p", "q"];

/// Jet order needed by [`k_invariant`], the deepest consumer.
pub const PDE_ORDER: usize = 6;

/// Right-hand side `F(x, y, z, p)` of `z_y = F(x, y, z, z_x)`.
#[derive(Clone, Debug)]
pub struct PdeRhs<S: Scalar> {
    field: ScalarField<S>,
}

impl<S: Scalar> PdeRhs<S> {
    pub fn new(field: ScalarField<S>) -> Result<Self> {
        if field.num_vars() != 4 {
            return Err(Error::Argument(
                "a PDE right-hand side takes (x, y, z, p)".into(),
            ));
        }
        Ok(PdeRhs { field })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(ScalarField::from_expression(Expression::parse(
            text,
            &PDE_VARIABLES,
        )?))
    }

    pub fn field(&self) -> &ScalarField<S> {
        &self.field
    }

    /// Jets of `F` and its `p`-derivatives at `point = (x, y, z, p)`.
    pub fn jets(&self, point: &[S; 4], order: usize) -> Result<PdeJets<S>> {
        let space = JetSpace::new(4, order);
        let coords = variables(&space, point)?;
        PdeJets::new(&self.field, &coords)
    }
}

/// Right-hand side `H(x, y, p, q)` of `y''' = H(x, y, y', y'')`.
#[derive(Clone, Debug)]
pub struct OdeRhs<S: Scalar> {
    field: ScalarField<S>,
}

impl<S: Scalar> OdeRhs<S> {
    pub fn new(field: ScalarField<S>) -> Result<Self> {
        if field.num_vars() != 4 {
            return Err(Error::Argument(
                "an ODE right-hand side takes (x, y, p, q)".into(),
            ));
        }
        Ok(OdeRhs { field })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(ScalarField::from_expression(Expression::parse(
            text,
            &ODE_VARIABLES,
        )?))
    }

    pub fn field(&self) -> &ScalarField<S> {
        &self.field
    }

    pub fn jets(&self, point: &[S; 4], order: usize) -> Result<OdeJets<S>> {
        let space = JetSpace::new(4, order);
        let coords = variables(&space, point)?;
        Ok(OdeJets {
            h: self.field.eval(&coords)?,
            p: coords[2].clone(),
            q: coords[3].clone(),
        })
    }
}

/// A computed invariant together with where and how it was evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantValue<S> {
    pub value: S,
    pub point: [S; 4],
    pub mode: CoefficientMode,
}

impl<S: Scalar> InvariantValue<S> {
    fn at(value: S, point: &[S; 4]) -> Self {
        InvariantValue {
            value,
            point: point.clone(),
            mode: S::MODE,
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        negligible(&self.value, tol)
    }
}

/// `F` with its successive `p`-derivatives, all sharing one jet space.
#[derive(Clone, Debug)]
pub struct PdeJets<S: Scalar> {
    /// `fp[k] = ∂_p^k F`, of order `order - k`.
    pub fp: Vec<Jet<S>>,
    pub p: Jet<S>,
}

impl<S: Scalar> PdeJets<S> {
    /// `coords` are jets of `(x, y, z, p)` in any space where variables
    /// `0..4` are those coordinates.
    pub fn new(field: &ScalarField<S>, coords: &[Jet<S>]) -> Result<Self> {
        let f = field.eval(&coords[..4])?;
        let mut fp = Vec::with_capacity(f.order() + 1);
        fp.push(f);
        while fp.last().is_some_and(|j| j.order() > 0) {
            let next = fp.last().expect("nonempty").d(3)?;
            fp.push(next);
        }
        Ok(PdeJets {
            fp,
            p: coords[3].clone(),
        })
    }

    pub fn f(&self) -> &Jet<S> {
        &self.fp[0]
    }

    /// `∂_p^k F`.
    pub fn p_derivative(&self, k: usize) -> Result<&Jet<S>> {
        self.fp.get(k).ok_or(Error::OrderExceeded {
            requested: k,
            order: self.fp.len() - 1,
        })
    }

    /// `D g = g_x + p g_z`.
    pub fn total_d(&self, g: &Jet<S>) -> Result<Jet<S>> {
        Ok(g.d(0)? + &self.p * &g.d(2)?)
    }

    /// `Δ g = g_y + F g_z`.
    pub fn delta(&self, g: &Jet<S>) -> Result<Jet<S>> {
        Ok(g.d(1)? + self.f() * &g.d(2)?)
    }

    /// `Δ ∂_p^k F`.
    pub fn delta_p(&self, k: usize) -> Result<Jet<S>> {
        self.delta(self.p_derivative(k)?)
    }

    /// `∂_z ∂_p^k F`.
    pub fn z_p(&self, k: usize) -> Result<Jet<S>> {
        self.p_derivative(k)?.d(2)
    }
}

/// `D F = F_x + p F_z` at `point`.
pub fn pde_total_d<S: Scalar>(rhs: &PdeRhs<S>, point: &[S; 4]) -> Result<S> {
    let j = rhs.jets(point, 1)?;
    Ok(j.total_d(j.f())?.value().clone())
}

/// `Δ g = g_y + F g_z` at `point`, for a field `g` on `(x, y, z, p)`.
pub fn pde_delta<S: Scalar>(rhs: &PdeRhs<S>, g: &ScalarField<S>, point: &[S; 4]) -> Result<S> {
    let space = JetSpace::new(4, 1);
    let coords = variables(&space, point)?;
    let j = PdeJets::new(rhs.field(), &coords)?;
    let g = g.eval(&coords)?;
    Ok(j.delta(&g)?.value().clone())
}

/// `9 F_pp² F_ppppp − 45 F_pp F_ppp F_pppp + 40 F_ppp³` from jets of order ≥ 5.
pub fn monge_from<S: Scalar>(j: &PdeJets<S>) -> Result<Jet<S>> {
    // the sum has the order of F_ppppp; nothing above it survives
    let lo = j.p_derivative(5)?.order();
    let t = |k: usize| j.p_derivative(k).map(|f| f.truncate(lo));
    let (f2, f3, f4, f5) = (&t(2)?, &t(3)?, &t(4)?, &t(5)?);
    Ok(
        (f2 * f2 * f5).scale(&S::from_i64(9)) - (f2 * f3 * f4).scale(&S::from_i64(45))
            + (f3 * f3 * f3).scale(&S::from_i64(40)),
    )
}

/// Monge invariant `M(F)` at `point`.
pub fn monge<S: Scalar>(rhs: &PdeRhs<S>, point: &[S; 4]) -> Result<InvariantValue<S>> {
    let j = rhs.jets(point, 5)?;
    Ok(InvariantValue::at(monge_from(&j)?.value().clone(), point))
}

/// The nineteen-term invariant `K(F)` from jets of order ≥ 6.
pub fn k_from<S: Scalar>(j: &PdeJets<S>) -> Result<Jet<S>> {
    let n = |v: i64| S::from_i64(v);
    let (d2, d3, d4, d5) = (j.delta_p(2)?, j.delta_p(3)?, j.delta_p(4)?, j.delta_p(5)?);
    let (z1, z2, z3, z4) = (j.z_p(1)?, j.z_p(2)?, j.z_p(3)?, j.z_p(4)?);
    // The result has the lowest order among the ingredients; truncating
    // first keeps the high-order products out.
    let lo = [&d2, &d3, &d4, &d5, &z1, &z2, &z3, &z4]
        .iter()
        .map(|f| f.order())
        .chain((1..=5).map(|k| j.p_derivative(k).map_or(0, |f| f.order())))
        .min()
        .unwrap_or(0);
    let t = |k: usize| j.p_derivative(k).map(|f| f.truncate(lo));
    let (f1, f2, f3, f4, f5) = (&t(1)?, &t(2)?, &t(3)?, &t(4)?, &t(5)?);
    let [d2, d3, d4, d5, z1, z2, z3, z4] = [d2, d3, d4, d5, z1, z2, z3, z4].map(|f| f.truncate(lo));
    let f2sq = f2 * f2;
    let f2cu = &f2sq * f2;
    let f3sq = f3 * f3;
    let f3cu = &f3sq * f3;
    let terms = [
        &d5 * &f2cu,
        (&d4 * &f2sq * f3).scale(&n(-5)),
        (&d3 * f2 * &f3sq).scale(&n(12)),
        (&d2 * &f3cu).scale(&n(-12)),
        (&d3 * &f2sq * f4).scale(&n(-4)),
        (&d2 * f2 * f3 * f4).scale(&n(9)),
        -(&d2 * &f2sq * f5),
        (f1 * &f2cu * &z4).scale(&n(5)),
        (&f2cu * f2 * &z3).scale(&n(6)),
        (f1 * &f2sq * f3 * &z3).scale(&n(-20)),
        (&f2cu * f3 * &z2).scale(&n(-12)),
        (f1 * f2 * &f3sq * &z2).scale(&n(36)),
        (f1 * &f2sq * f4 * &z2).scale(&n(-12)),
        (&f2sq * &f3sq * &z1).scale(&n(8)),
        (f1 * &f3cu * &z1).scale(&n(-24)),
        (&f2cu * f4 * &z1).scale(&n(-3)),
        (f1 * f2 * f3 * f4 * &z1).scale(&n(18)),
        (f1 * &f2sq * f5 * &z1).scale(&n(-2)),
    ];
    let mut acc = terms[0].clone();
    for t in &terms[1..] {
        acc = acc + t;
    }
    Ok(acc)
}

/// Invariant `K(F)` at `point`.
pub fn k_invariant<S: Scalar>(rhs: &PdeRhs<S>, point: &[S; 4]) -> Result<InvariantValue<S>> {
    let j = rhs.jets(point, PDE_ORDER)?;
    Ok(InvariantValue::at(k_from(&j)?.value().clone(), point))
}

/// `A₁ = −M / (54 u₃³ F_pp³)` and `C₁ = K / (3 u₃² u₅ F_pp⁵)`.
pub fn scaled_invariants<S: Scalar>(m: &S, k: &S, f_pp: &S, u3: &S, u5: &S) -> Result<(S, S)> {
    if u3.is_zero() || u5.is_zero() {
        return Err(Error::Argument(
            "group parameters u3, u5 must be nonzero".into(),
        ));
    }
    if f_pp.is_zero() {
        return Err(Error::Argument("F_pp must be nonzero".into()));
    }
    let a1 = -(m.clone()).checked_div(&(S::from_i64(54) * u3.powi(3) * f_pp.powi(3)))?;
    let c1 = k.checked_div(&(S::from_i64(3) * u3.powi(2) * u5.clone() * f_pp.powi(5)))?;
    Ok((a1, c1))
}

/// Per-point outcome of [`para_cr_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParaCrSample<S> {
    pub point: [S; 4],
    /// `(D F, F_pp)`, or the error that prevented evaluation.
    pub values: Result<(S, S)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParaCrReport<S> {
    pub samples: Vec<ParaCrSample<S>>,
    /// `D F` vanished at every sample.
    pub integrable: bool,
    /// `F_pp` was nonzero at every sample.
    pub f_pp_nonzero: bool,
}

impl<S> ParaCrReport<S> {
    pub fn passed(&self) -> bool {
        self.integrable && self.f_pp_nonzero
    }
}

/// Check `D F = 0` and `F_pp ≠ 0` at the given points.
pub fn para_cr_check<S: Scalar>(rhs: &PdeRhs<S>, points: &[[S; 4]], tol: f64) -> ParaCrReport<S> {
    let mut integrable = true;
    let mut f_pp_nonzero = true;
    let samples = points
        .iter()
        .map(|pt| {
            let values = rhs.jets(pt, 2).and_then(|j| {
                Ok((
                    j.total_d(j.f())?.value().clone(),
                    j.p_derivative(2)?.value().clone(),
                ))
            });
            match &values {
                Ok((df, fpp)) => {
                    integrable &= negligible(df, tol);
                    f_pp_nonzero &= !negligible(fpp, tol);
                }
                Err(_) => {
                    integrable = false;
                    f_pp_nonzero = false;
                }
            }
            ParaCrSample {
                point: pt.clone(),
                values,
            }
        })
        .collect();
    ParaCrReport {
        samples,
        integrable,
        f_pp_nonzero,
    }
}

/// `H` and the fibre coordinates `p`, `q` as jets on `(x, y, p, q)`.
#[derive(Clone, Debug)]
pub struct OdeJets<S: Scalar> {
    pub h: Jet<S>,
    pub p: Jet<S>,
    pub q: Jet<S>,
}

impl<S: Scalar> OdeJets<S> {
    /// `D g = g_x + p g_y + q g_p + H g_q`.
    pub fn total_d(&self, g: &Jet<S>) -> Result<Jet<S>> {
        Ok(g.d(0)? + &self.p * &g.d(1)? + &self.q * &g.d(2)? + &self.h * &g.d(3)?)
    }
}

/// Wünschmann invariant `9 DDH_q − 27 DH_p − 18 H_q DH_q + 18 H_q H_p + 4 H_q³ + 54 H_y`,
/// with `D` applied to jets.
pub fn wunschmann<S: Scalar>(rhs: &OdeRhs<S>, point: &[S; 4]) -> Result<InvariantValue<S>> {
    let j = rhs.jets(point, 3)?;
    let n = |v: i64| S::from_i64(v);
    let hq = j.h.d(3)?;
    let hp = j.h.d(2)?;
    let hy = j.h.d(1)?;
    let dhq = j.total_d(&hq)?;
    let ddhq = j.total_d(&dhq)?;
    let dhp = j.total_d(&hp)?;
    let w = ddhq.scale(&n(9)) - dhp.scale(&n(27)) - (&hq * &dhq).scale(&n(18))
        + (&hq * &hp).scale(&n(18))
        + (&hq * &hq * &hq).scale(&n(4))
        + hy.scale(&n(54));
    Ok(InvariantValue::at(w.value().clone(), point))
}

/// Cartan invariant `18 H_qq DH_q − 12 H_qq H_q² − 54 H_qq H_p + 36 H_pq H_q − 108 H_yq + 54 H_pp`.
pub fn cartan_c<S: Scalar>(rhs: &OdeRhs<S>, point: &[S; 4]) -> Result<InvariantValue<S>> {
    let j = rhs.jets(point, 3)?;
    let n = |v: i64| S::from_i64(v);
    let hq = j.h.d(3)?;
    let hp = j.h.d(2)?;
    let hqq = hq.d(3)?;
    let hpq = hq.d(2)?;
    let hyq = hq.d(1)?;
    let hpp = hp.d(2)?;
    let dhq = j.total_d(&hq)?;
    let c =
        (&hqq * &dhq).scale(&n(18)) - (&hqq * &hq * &hq).scale(&n(12)) - (&hqq * &hp).scale(&n(54))
            + (&hpq * &hq).scale(&n(36))
            - hyq.scale(&n(108))
            + hpp.scale(&n(54));
    Ok(InvariantValue::at(c.value().clone(), point))
}

/// Partial derivatives of an order-≥3 jet on `(x, y, p, q)`, addressed by
/// variable names such as `"xq"` or `"qqq"`.
pub(crate) struct Partials<'a, S: Scalar>(pub(crate) &'a Jet<S>);

impl<S: Scalar> Partials<'_, S> {
    pub(crate) fn get(&self, vars: &str) -> S {
        let mut e = [0u8; 4];
        for c in vars.chars() {
            let v = ODE_VARIABLES
                .iter()
                .position(|n| n.starts_with(c))
                .expect("ODE chart variable");
            e[v] += 1;
        }
        self.0
            .partial(&MultiIndex::from_slice(&e))
            .expect("jet order covers the requested partial")
    }
}

/// Wünschmann invariant as the flat sum of its 25 differential monomials.
pub fn wunschmann_expanded<S: Scalar>(
    rhs: &OdeRhs<S>,
    point: &[S; 4],
) -> Result<InvariantValue<S>> {
    let j = rhs.jets(point, 3)?;
    let d = Partials(&j.h);
    let h = j.h.value().clone();
    let p = point[2].clone();
    let q = point[3].clone();
    let n = |v: i64| S::from_i64(v);
    let hq = d.get("q");
    let terms = [
        n(-18) * q.clone() * hq.clone() * d.get("pq"),
        n(9) * p.clone() * d.get("y") * d.get("qq"),
        n(18) * q.clone() * h.clone() * d.get("pqq"),
        n(9) * q.clone() * d.get("p") * d.get("qq"),
        n(-18) * p.clone() * hq.clone() * d.get("yq"),
        n(18) * p.clone() * h.clone() * d.get("yqq"),
        n(-9) * h.clone() * hq.clone() * d.get("qq"),
        n(18) * p.clone() * q.clone() * d.get("ypq"),
        n(18) * p.clone() * d.get("xyq"),
        n(18) * q.clone() * d.get("xpq"),
        n(9) * d.get("x") * d.get("qq"),
        n(18) * h.clone() * d.get("xqq"),
        n(-18) * hq.clone() * d.get("xq"),
        n(18) * d.get("p") * hq.clone(),
        n(9) * d.get("xxq"),
        n(-27) * d.get("xp"),
        n(4) * hq.clone() * hq.clone() * hq.clone(),
        n(9) * p.clone() * p.clone() * d.get("yyq"),
        n(-27) * p.clone() * d.get("yp"),
        n(9) * q.clone() * d.get("yq"),
        n(9) * q.clone() * q.clone() * d.get("ppq"),
        n(-27) * q.clone() * d.get("pp"),
        n(-18) * h.clone() * d.get("pq"),
        n(9) * h.clone() * h.clone() * d.get("qqq"),
        n(54) * d.get("y"),
    ];
    let mut acc = S::zero();
    for t in terms {
        acc += t;
    }
    Ok(InvariantValue::at(acc, point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn q4(v: [i64; 4]) -> [Q; 4] {
        v.map(Q::from)
    }

    #[test]
    fn total_derivatives() {
        let f = PdeRhs::<Q>::parse("z - x*p").unwrap();
        assert!(pde_total_d(&f, &q4([2, 1, 3, 5])).unwrap().is_zero());
        let f = PdeRhs::<Q>::parse("p^2").unwrap();
        assert!(pde_total_d(&f, &q4([2, 1, 3, 5])).unwrap().is_zero());
        let f = PdeRhs::<Q>::parse("x*z").unwrap();
        assert_eq!(pde_total_d(&f, &q4([1, 0, 2, 3])).unwrap(), Q::from(5));

        let g =
            |s: &str| ScalarField::from_expression(Expression::parse(s, &PDE_VARIABLES).unwrap());
        let f = PdeRhs::<Q>::parse("p").unwrap();
        assert_eq!(
            pde_delta(&f, &g("y*z"), &q4([0, 1, 2, 3])).unwrap(),
            Q::from(5)
        );
        assert_eq!(
            pde_delta(&f, &g("y"), &q4([4, 1, 2, 3])).unwrap(),
            Q::from(1)
        );
        let f = PdeRhs::<Q>::parse("p^2").unwrap();
        assert_eq!(
            pde_delta(&f, &g("z"), &q4([0, 0, 0, 2])).unwrap(),
            Q::from(4)
        );
    }

    #[test]
    fn monge_values() {
        let pt = q4([1, 2, 3, 1]);
        assert!(monge(&PdeRhs::<Q>::parse("p^2").unwrap(), &pt)
            .unwrap()
            .value
            .is_zero());
        let m = monge(&PdeRhs::<Q>::parse("p^5").unwrap(), &pt).unwrap();
        assert_eq!(m.value, Q::from(2_592_000));
        assert_eq!(m.mode, CoefficientMode::ExactRational);
        // conic in (p, F): F² + p² = 1 is not polynomial, but F = 1/(1 + p) is
        let f = PdeRhs::<Q>::parse("1/(1 + p)").unwrap();
        assert!(monge(&f, &q4([0, 0, 0, 2])).unwrap().value.is_zero());
    }

    #[test]
    fn k_vanishes_for_simple_cases() {
        let pt = q4([1, 2, 3, 1]);
        assert!(k_invariant(&PdeRhs::<Q>::parse("p^2").unwrap(), &pt)
            .unwrap()
            .value
            .is_zero());
        let f = PdeRhs::<Q>::parse("(z - x*p)^2 + y*p^2").unwrap();
        let k = k_invariant(&f, &pt).unwrap();
        assert!(k.is_zero(0.0));
        let generic = PdeRhs::<Q>::parse("z*p^3 + p^2").unwrap();
        assert!(!k_invariant(&generic, &pt).unwrap().value.is_zero());
    }

    #[test]
    fn scaled_invariant_examples() {
        let one = Q::from(1);
        let (a1, c1) = scaled_invariants(&Q::from(54), &Q::from(0), &one, &one, &one).unwrap();
        assert_eq!(a1, Q::from(-1));
        assert!(c1.is_zero());
        let zero = Q::from(0);
        assert!(matches!(
            scaled_invariants(&one, &one, &one, &zero, &one),
            Err(Error::Argument(_))
        ));
        assert!(scaled_invariants(&one, &one, &zero, &one, &one).is_err());
    }

    #[test]
    fn para_cr() {
        let pts = [q4([1, 2, 3, 4]), q4([-1, 0, 2, 1])];
        let r = para_cr_check(&PdeRhs::<Q>::parse("x").unwrap(), &pts, 0.0);
        assert!(!r.integrable);
        let r = para_cr_check(&PdeRhs::<Q>::parse("p^2").unwrap(), &pts, 0.0);
        assert!(r.passed());
        let r = para_cr_check(
            &PdeRhs::<Q>::parse("(z - x*p)^2/(1 + y^2)").unwrap(),
            &pts,
            0.0,
        );
        assert!(r.integrable);
    }

    #[test]
    fn wunschmann_known_and_expanded() {
        let zero = OdeRhs::<Q>::parse("0").unwrap();
        let pt = q4([1, 2, 3, 4]);
        assert!(wunschmann(&zero, &pt).unwrap().value.is_zero());
        assert!(cartan_c(&zero, &pt).unwrap().value.is_zero());
        let h = OdeRhs::<Q>::parse("3*q^2/(2*p)").unwrap();
        assert!(wunschmann(&h, &pt).unwrap().value.is_zero());
        assert!(matches!(
            wunschmann(&h, &q4([1, 2, 0, 4])),
            Err(Error::Singular(_))
        ));
        let h = OdeRhs::<Q>::parse("x*q").unwrap();
        assert!(cartan_c(&h, &pt).unwrap().value.is_zero());
        let h = OdeRhs::<Q>::parse("x*y*q^2 - p^3*q + y^2*x - 2*p*q*x^2").unwrap();
        assert_eq!(
            wunschmann(&h, &pt).unwrap().value,
            wunschmann_expanded(&h, &pt).unwrap().value
        );
        let h = OdeRhs::<f64>::parse("q*sqrt(q)").unwrap();
        let w = wunschmann(&h, &[0.3, -1.0, 0.7, 2.5]).unwrap();
        assert!(w.value.abs() < 1e-12);
    }
}
