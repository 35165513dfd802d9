//! Evaluable fields on coordinate charts and Weyl pairs built from them.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::{variables, Jet, JetSpace};
use crate::scalar::Scalar;

type FieldFn<S> = dyn Fn(&[Jet<S>]) -> Result<Jet<S>> + Send + Sync;

/// A scalar function of chart coordinates, evaluated on coordinate jets.
#[derive(Clone)]
pub struct ScalarField<S: Scalar> {
    num_vars: usize,
    f: Arc<FieldFn<S>>,
}

impl<S: Scalar> fmt::Debug for ScalarField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({} vars)", self.num_vars)
    }
}

impl<S: Scalar> ScalarField<S> {
    pub fn new(
        num_vars: usize,
        f: impl Fn(&[Jet<S>]) -> Result<Jet<S>> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            num_vars,
            f: Arc::new(f),
        }
    }

    pub fn from_expression(e: Expression) -> Self {
        let n = e.variables().len();
        ScalarField::new(n, move |c| e.eval_jet(c))
    }

    pub fn constant(num_vars: usize, value: S) -> Self {
        ScalarField::new(num_vars, move |c| Ok(c[0].constant_like(value.clone())))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Evaluate on coordinate jets (one per chart variable).
    pub fn eval(&self, coords: &[Jet<S>]) -> Result<Jet<S>> {
        if coords.len() != self.num_vars {
            return Err(Error::Argument("field arity mismatch".into()));
        }
        (self.f)(coords)
    }

    /// Jet of the field at `point`, to the given order.
    pub fn jet_at(&self, point: &[S], order: usize) -> Result<Jet<S>> {
        let space = JetSpace::new(self.num_vars, order);
        self.eval(&variables(&space, point)?)
    }

    pub fn value_at(&self, point: &[S]) -> Result<S> {
        Ok(self.jet_at(point, 0)?.value().clone())
    }
}

/// Jets of the metric and 1-form components of a pair at one point.
#[derive(Clone, Debug)]
pub struct PairJets<S: Scalar> {
    pub g: [[Jet<S>; 3]; 3],
    pub a: [Jet<S>; 3],
}

type PairFn<S> = dyn Fn(&[Jet<S>; 3]) -> Result<PairJets<S>> + Send + Sync;

/// A metric `g` and a 1-form `A` on a chart with coordinates `(x, y, z)`.
#[derive(Clone)]
pub struct WeylPair<S: Scalar> {
    name: String,
    f: Arc<PairFn<S>>,
}

impl<S: Scalar> fmt::Debug for WeylPair<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylPair({})", self.name)
    }
}

impl<S: Scalar> WeylPair<S> {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[Jet<S>; 3]) -> Result<PairJets<S>> + Send + Sync + 'static,
    ) -> Self {
        WeylPair {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Pair from six metric component fields (upper triangle, row-major:
    /// xx, xy, xz, yy, yz, zz) and three 1-form component fields.
    pub fn from_components(
        name: impl Into<String>,
        g: [ScalarField<S>; 6],
        a: [ScalarField<S>; 3],
    ) -> Self {
        WeylPair::new(name, move |c| {
            let v: Vec<Jet<S>> = g.iter().map(|f| f.eval(c)).collect::<Result<_>>()?;
            Ok(PairJets {
                g: [
                    [v[0].clone(), v[1].clone(), v[2].clone()],
                    [v[1].clone(), v[3].clone(), v[4].clone()],
                    [v[2].clone(), v[4].clone(), v[5].clone()],
                ],
                a: [a[0].eval(c)?, a[1].eval(c)?, a[2].eval(c)?],
            })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, coords: &[Jet<S>; 3]) -> Result<PairJets<S>> {
        (self.f)(coords)
    }

    /// Jets of all components at `point`, to the given order.
    pub fn jets_at(&self, point: &[S; 3], order: usize) -> Result<PairJets<S>> {
        let space = JetSpace::new(3, order);
        self.eval(&coordinate_jets(&space, point))
    }

    /// Same metric with a different 1-form.
    pub fn with_form(&self, name: impl Into<String>, a: [ScalarField<S>; 3]) -> Self {
        let base = self.clone();
        WeylPair::new(name, move |c| {
            let mut out = base.eval(c)?;
            out.a = [a[0].eval(c)?, a[1].eval(c)?, a[2].eval(c)?];
            Ok(out)
        })
    }

    /// Same metric with the 1-form multiplied by `factor`.
    pub fn scale_form(&self, name: impl Into<String>, factor: S) -> Self {
        let base = self.clone();
        WeylPair::new(name, move |c| {
            let mut out = base.eval(c)?;
            for a in out.a.iter_mut() {
                *a = a.scale(&factor);
            }
            Ok(out)
        })
    }
}

pub(crate) fn coordinate_jets<S: Scalar>(space: &Arc<JetSpace>, point: &[S; 3]) -> [Jet<S>; 3] {
    core::array::from_fn(|i| Jet::variable(space, i, point[i].clone()).expect("three variables"))
}
