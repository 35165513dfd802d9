//! From `z_y = F(z_x)` to the third-order ODE `w''' = w'' F_ttt(t) / F_tt(t)`.
//!
//! The dictionary is `t = p`, `w = z − x p − y F(p)`, `w₁ = −x − y F_p`,
//! `w₂ = −y F_pp`. On the ODE chart `(x, y, p, q)` of [`crate::invariants`]
//! these are `x = t`, `y = w`, `p = w₁`, `q = w₂`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::field::ScalarField;
use crate::invariants::{self, OdeRhs, Partials, PdeRhs};
use crate::jet::Jet;
use crate::scalar::{CoefficientMode, Scalar};

/// `F` depending on `p` alone; written in the variable `p` or `t`.
#[derive(Clone, Debug)]
pub struct UnivariatePdeRhs {
    f: Expression,
}

impl UnivariatePdeRhs {
    pub fn parse(text: &str) -> Result<Self> {
        let f = Expression::parse(text, &["p"]).or_else(|_| Expression::parse(text, &["t"]))?;
        Ok(UnivariatePdeRhs { f })
    }

    pub fn expression(&self) -> &Expression {
        &self.f
    }

    /// `d^k F / dt^k` as an expression.
    pub fn derivative(&self, k: usize) -> Expression {
        (0..k).fold(self.f.clone(), |e, _| e.derivative(0))
    }

    /// The same `F` on the full PDE chart `(x, y, z, p)`.
    pub fn as_pde<S: Scalar>(&self) -> PdeRhs<S> {
        let f = self.f.clone();
        PdeRhs::new(ScalarField::new(4, move |c: &[Jet<S>]| f.eval_jet(&c[3..])))
            .expect("four chart variables")
    }

    /// `(w, w₁, w₂)` at a PDE point `(x, y, z, p)`.
    pub fn ode_coordinates<S: Scalar>(&self, point: &[S; 4]) -> Result<[S; 4]> {
        let [x, y, z, p] = point.clone();
        let args = [p.clone()];
        let f = self.f.eval(&args)?;
        let fp = self.derivative(1).eval(&args)?;
        let fpp = self.derivative(2).eval(&args)?;
        Ok([
            p.clone(),
            z - x.clone() * p - y.clone() * f,
            -x - y.clone() * fp,
            -(y * fpp),
        ])
    }
}

/// `H(t, w, w₁, w₂) = w₂ F_ttt(t) / F_tt(t)`. Evaluation fails with
/// [`Error::Degenerate`] where `F_tt = 0`.
pub fn pde_to_ode<S: Scalar>(f: &UnivariatePdeRhs) -> OdeRhs<S> {
    let f2 = f.derivative(2);
    let f3 = f.derivative(3);
    OdeRhs::new(ScalarField::new(4, move |c: &[Jet<S>]| {
        let t = &c[..1];
        let den = f2.eval_jet(t)?;
        if den.value().is_zero() {
            return Err(Error::Degenerate("F_tt vanishes".into()));
        }
        Ok(&c[3] * &f3.eval_jet(t)?.try_div(&den)?)
    }))
    .expect("four chart variables")
}

/// The Wünschmann invariant reduced to the seven terms that survive
/// `H_w = H_{w₁} = 0`, with `q = w₂`:
/// `−9 H H_q H_qq − 9 H_t H_qq + 18 H H_tqq − 18 H_q H_tq + 9 H_ttq + 4 H_q³ + 9 H² H_qqq`.
pub fn wunschmann_reduced<S: Scalar>(rhs: &OdeRhs<S>, point: &[S; 4]) -> Result<S> {
    let j = rhs.jets(point, 3)?;
    let d = Partials(&j.h);
    let h = j.h.value().clone();
    let n = |v: i64| S::from_i64(v);
    let hq = d.get("q");
    let hqq = d.get("qq");
    Ok(
        n(-9) * h.clone() * hq.clone() * hqq.clone() - n(9) * d.get("x") * hqq
            + n(18) * h.clone() * d.get("xqq")
            - n(18) * hq.clone() * d.get("xq")
            + n(9) * d.get("xxq")
            + n(4) * hq.clone() * hq.clone() * hq
            + n(9) * h.clone() * h * d.get("qqq"),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssertionSample<S> {
    /// ODE point `(t, w, w₁, w₂)`.
    pub point: [S; 4],
    /// `W(w₂ F_ttt / F_tt)` from the general Wünschmann evaluator.
    pub lhs: S,
    /// `Monge(F) / F_tt³`.
    pub rhs: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssertionReport<S> {
    pub samples: Vec<AssertionSample<S>>,
    /// Samples where either side could not be evaluated.
    pub skipped: Vec<([S; 4], Error)>,
    /// Largest `|lhs − rhs|`, relative to `1 + |rhs|` in float mode.
    pub max_discrepancy: f64,
    pub passed: bool,
}

/// Compare both sides of `W = Monge(F) / F_tt³` at ODE points `(t, w, w₁, w₂)`.
pub fn assertion_check<S: Scalar>(
    f: &UnivariatePdeRhs,
    points: &[[S; 4]],
    tol: f64,
) -> AssertionReport<S> {
    let ode = pde_to_ode::<S>(f);
    let pde = f.as_pde::<S>();
    let f2 = f.derivative(2);
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    let mut max_discrepancy = 0.0f64;
    let mut exact_ok = true;
    for pt in points {
        let side = || -> Result<(S, S)> {
            let lhs = invariants::wunschmann(&ode, pt)?.value;
            let ftt = f2.eval(&[pt[0].clone()])?;
            if ftt.is_zero() {
                return Err(Error::Degenerate(format!("F_tt vanishes at t = {}", pt[0])));
            }
            let z = S::zero();
            let m = invariants::monge(&pde, &[z.clone(), z.clone(), z, pt[0].clone()])?.value;
            let rhs = m.checked_div(&(ftt.clone() * ftt.clone() * ftt))?;
            Ok((lhs, rhs))
        };
        match side() {
            Ok((lhs, rhs)) => {
                let diff = lhs.clone() - rhs.clone();
                let rel = diff.to_f64().abs() / (1.0 + rhs.to_f64().abs());
                max_discrepancy = max_discrepancy.max(rel);
                exact_ok &= S::MODE == CoefficientMode::Float64 || diff.is_zero();
                samples.push(AssertionSample {
                    point: pt.clone(),
                    lhs,
                    rhs,
                });
            }
            Err(e) => skipped.push((pt.clone(), e)),
        }
    }
    let passed = !samples.is_empty() && exact_ok && max_discrepancy <= tol;
    AssertionReport {
        samples,
        skipped,
        max_discrepancy,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn pt(t: i64, w2: i64) -> [Q; 4] {
        [Q::from(t), Q::from(3), Q::from(-1), Q::from(w2)]
    }

    #[test]
    fn transformed_right_hand_sides() {
        let flat = pde_to_ode::<Q>(&UnivariatePdeRhs::parse("p^2/2").unwrap());
        assert!(flat.field().value_at(&pt(2, 5)).unwrap().is_zero());
        let cubic = pde_to_ode::<Q>(&UnivariatePdeRhs::parse("t^3").unwrap());
        assert_eq!(cubic.field().value_at(&pt(1, 5)).unwrap(), Q::from(5));
        assert!(matches!(
            cubic.field().value_at(&pt(0, 5)),
            Err(Error::Degenerate(_))
        ));
        let e = pde_to_ode::<f64>(&UnivariatePdeRhs::parse("exp(p)").unwrap());
        let h = e.field().value_at(&[0.7, 1.0, 2.0, 3.0]).unwrap();
        assert!((h - 3.0).abs() < 1e-12);
        // linear in w₂, independent of w, w₁
        let j = cubic.jets(&pt(2, 5), 2).unwrap();
        assert!(j.h.d(1).unwrap().is_zero());
        assert!(j.h.d(2).unwrap().is_zero());
        assert!(j.h.d(3).unwrap().d(3).unwrap().is_zero());
    }

    #[test]
    fn assertion_examples() {
        let quintic = UnivariatePdeRhs::parse("p^5").unwrap();
        let r = assertion_check(&quintic, &[pt(1, 2), pt(1, -7)], 0.0);
        assert!(r.passed);
        assert_eq!(r.samples[0].lhs, Q::from(324));
        assert_eq!(r.samples[1].rhs, Q::from(324));
        let flat = UnivariatePdeRhs::parse("p^2/2").unwrap();
        let r = assertion_check(&flat, &[pt(4, 1)], 0.0);
        assert!(r.passed && r.samples[0].lhs.is_zero());
        let r = assertion_check(&quintic, &[pt(0, 1), pt(2, 1)], 0.0);
        assert_eq!(r.skipped.len(), 1);
        assert!(r.passed);
    }

    #[test]
    fn reduced_form_matches() {
        let f = UnivariatePdeRhs::parse("p^6/3 - 2*p^4 + p^3 + p^2").unwrap();
        let ode = pde_to_ode::<Q>(&f);
        let p = [Q::new(3, 2), Q::from(1), Q::new(-2, 5), Q::new(7, 3)];
        let full = invariants::wunschmann_expanded(&ode, &p).unwrap().value;
        assert_eq!(full, wunschmann_reduced(&ode, &p).unwrap());
    }

    #[test]
    fn dictionary() {
        let f = UnivariatePdeRhs::parse("p^3").unwrap();
        let c = f
            .ode_coordinates(&[Q::from(1), Q::from(2), Q::from(3), Q::from(1)])
            .unwrap();
        // w = 3 − 1 − 2, w₁ = −1 − 6, w₂ = −12
        assert_eq!(c, [Q::from(1), Q::from(0), Q::from(-7), Q::from(-12)]);
    }
}
