//! The seven-dimensional bundle over `z_y = F(x, y, z, z_x)`: base forms,
//! the lifted coframe `θ`, the degenerate bilinear form `g̃`, the 1-form `Ω₃`,
//! and their descent to the leaf space with coordinates `(x, y, z)`.
//!
//! Bundle coordinates are `(x, y, z, p, u₃, u₅, u₈)`; cotangent components are
//! listed in that order. Products of 1-forms in `g̃` are tensor products, so
//! `θ¹θ⁴ + θ⁴θ¹` is the symmetric tensor `θ¹⊗θ⁴ + θ⁴⊗θ¹`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{PairJets, WeylPair};
use crate::invariants::{PdeJets, PdeRhs};
use crate::jet::{variables, Jet, JetSpace};
use crate::linalg::{self, Inertia, Matrix};
use crate::scalar::{negligible, Scalar};

pub const DIM: usize = 7;

/// A point `(x, y, z, p, u₃, u₅, u₈)` with `u₃, u₅ ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundlePoint<S> {
    pub coords: [S; DIM],
}

impl<S: Scalar> BundlePoint<S> {
    pub fn new(coords: [S; DIM]) -> Result<Self> {
        if coords[4].is_zero() || coords[5].is_zero() {
            return Err(Error::Argument(
                "group parameters u3, u5 must be nonzero".into(),
            ));
        }
        Ok(BundlePoint { coords })
    }

    /// The point `(x, y, z, p, 1, 1, 0)` of the canonical section.
    pub fn section(leaf: &[S; 3], p: S) -> Self {
        let [x, y, z] = leaf.clone();
        BundlePoint {
            coords: [x, y, z, p, S::one(), S::one(), S::zero()],
        }
    }

    pub fn base(&self) -> [S; 4] {
        core::array::from_fn(|i| self.coords[i].clone())
    }

    fn u(&self) -> (&S, &S, &S) {
        (&self.coords[4], &self.coords[5], &self.coords[6])
    }
}

/// A 1-form or 2-form at a point of the bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct FormAtPoint<S> {
    degree: usize,
    /// Degree 1: the seven components. Degree 2: components on `e^i ∧ e^j`
    /// for `i < j`, in lexicographic order.
    comps: Vec<S>,
}

fn pair_index(i: usize, j: usize) -> usize {
    // position of (i, j), i < j, among the 21 lexicographic pairs
    i * (2 * DIM - i - 1) / 2 + (j - i - 1)
}

impl<S: Scalar> FormAtPoint<S> {
    pub fn one(comps: [S; DIM]) -> Self {
        FormAtPoint {
            degree: 1,
            comps: comps.to_vec(),
        }
    }

    /// The 2-form with components `f(i, j)` for `i < j`.
    pub fn two(f: impl Fn(usize, usize) -> S) -> Self {
        let mut comps = Vec::with_capacity(DIM * (DIM - 1) / 2);
        for i in 0..DIM {
            for j in i + 1..DIM {
                comps.push(f(i, j));
            }
        }
        FormAtPoint { degree: 2, comps }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Component on `e^i` of a 1-form.
    pub fn get(&self, i: usize) -> S {
        debug_assert_eq!(self.degree, 1);
        self.comps[i].clone()
    }

    /// Component `ω_{ij}` of a 2-form, antisymmetric in `(i, j)`.
    pub fn get2(&self, i: usize, j: usize) -> S {
        debug_assert_eq!(self.degree, 2);
        match i.cmp(&j) {
            core::cmp::Ordering::Less => self.comps[pair_index(i, j)].clone(),
            core::cmp::Ordering::Greater => -self.comps[pair_index(j, i)].clone(),
            core::cmp::Ordering::Equal => S::zero(),
        }
    }

    pub fn components(&self) -> &[S] {
        &self.comps
    }

    pub fn scale(&self, s: &S) -> Self {
        FormAtPoint {
            degree: self.degree,
            comps: self.comps.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            self.degree, other.degree,
            "adding forms of different degree"
        );
        FormAtPoint {
            degree: self.degree,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// `α ∧ β` of two 1-forms.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.degree != 1 || other.degree != 1 {
            return Err(Error::Argument("wedge is implemented for 1-forms".into()));
        }
        Ok(Self::two(|i, j| {
            self.comps[i].clone() * other.comps[j].clone()
                - self.comps[j].clone() * other.comps[i].clone()
        }))
    }

    /// Interior product with a vector: a scalar for 1-forms, a 1-form for 2-forms.
    pub fn contract(&self, v: &[S; DIM]) -> Self {
        match self.degree {
            1 => {
                let mut acc = S::zero();
                for (c, vi) in self.comps.iter().zip(v) {
                    acc.mul_add_assign(c, vi);
                }
                FormAtPoint {
                    degree: 0,
                    comps: alloc::vec![acc],
                }
            }
            _ => FormAtPoint {
                degree: 1,
                comps: (0..DIM)
                    .map(|j| {
                        let mut acc = S::zero();
                        for (i, vi) in v.iter().enumerate() {
                            acc.mul_add_assign(vi, &self.get2(i, j));
                        }
                        acc
                    })
                    .collect(),
            },
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.comps.iter().all(|c| negligible(c, tol))
    }
}

/// A 1-form whose components are jets on the bundle; differentiable once.
#[derive(Clone, Debug)]
pub struct JetForm<S: Scalar> {
    pub comps: [Jet<S>; DIM],
}

impl<S: Scalar> JetForm<S> {
    pub fn value(&self) -> FormAtPoint<S> {
        FormAtPoint::one(core::array::from_fn(|i| self.comps[i].value().clone()))
    }

    /// Exterior derivative at the point: `(dω)_{ij} = ∂_i ω_j − ∂_j ω_i`.
    pub fn exterior_d(&self) -> Result<FormAtPoint<S>> {
        let mut grads: Vec<[S; DIM]> = Vec::with_capacity(DIM);
        for c in &self.comps {
            let mut row: [S; DIM] = core::array::from_fn(|_| S::zero());
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = c.d(k)?.value().clone();
            }
            grads.push(row);
        }
        Ok(FormAtPoint::two(|i, j| {
            grads[j][i].clone() - grads[i][j].clone()
        }))
    }

    fn combine(terms: &[(&Jet<S>, &JetForm<S>)]) -> Self {
        JetForm {
            comps: core::array::from_fn(|i| {
                let mut acc = terms[0].0 * &terms[0].1.comps[i];
                for (c, f) in &terms[1..] {
                    acc = acc + *c * &f.comps[i];
                }
                acc
            }),
        }
    }
}

/// Scalar data of `F` entering the coframe, as jets on `(x, y, z, p)`.
#[derive(Clone, Debug)]
pub struct FrameJets<S: Scalar> {
    pub f: Jet<S>,
    pub fp: Jet<S>,
    pub fpp: Jet<S>,
    pub fppp: Jet<S>,
    pub fpppp: Jet<S>,
    /// Coefficient `c` in `ω² = ω₀² − c ω₀¹`.
    pub omega2_coefficient: Jet<S>,
    /// `(r_x, r_y, r_z)` of `Ω₃`.
    pub r: [Jet<S>; 3],
}

impl<S: Scalar> FrameJets<S> {
    /// Requires `F` jets of order `≥ 5`; the results have order `order − 5`
    /// for `r`, higher for the rest.
    pub fn new(j: &PdeJets<S>) -> Result<Self> {
        let n = |v: i64| S::from_i64(v);
        let f = j.f().clone();
        let fp = j.p_derivative(1)?.clone();
        let fpp = j.p_derivative(2)?.clone();
        let fppp = j.p_derivative(3)?.clone();
        let fpppp = j.p_derivative(4)?.clone();
        if fpp.value().is_zero() {
            return Err(Error::Degenerate("F_pp vanishes at the point".into()));
        }
        let (d2, d3) = (j.delta_p(2)?, j.delta_p(3)?);
        let (fz, zp, zpp) = (j.z_p(0)?, j.z_p(1)?, j.z_p(2)?);
        let fpp2 = &fpp * &fpp;
        let fpp3 = &fpp2 * &fpp;
        let c2 = (&d3 * &fpp - &d2 * &fppp + (&fp * &fpp * &zpp).scale(&n(3))
            - (&fpp2 * &zp).scale(&n(3))
            - (&fp * &fppp * &zp).scale(&n(2)))
        .try_div(&fpp3.scale(&n(6)))?;

        let d4 = j.delta_p(4)?;
        let zppp = j.z_p(3)?;
        let p = &j.p;
        let fppp2 = &fppp * &fppp;
        // terms shared by r_x and r_z (the p-weighted part of r_x is minus r_z's bracket)
        let rz_bracket = &d4 * &fpp2 - (&d3 * &fpp * &fppp).scale(&n(3))
            + (&d2 * &fppp2).scale(&n(3))
            - &d2 * &fpp * &fpppp
            + (&fp * &fpp2 * &zppp).scale(&n(4))
            + (&fpp3 * &zpp).scale(&n(2))
            - (&fp * &fpp * &fppp * &zpp).scale(&n(9))
            - &fpp2 * &fppp * &zp
            + (&fp * &fppp2 * &zp).scale(&n(6))
            - (&fp * &fpp * &fpppp * &zp).scale(&n(2));
        let rx_head = &d3 * &fpp2 - &d2 * &fpp * &fppp + (&fp * &fpp2 * &zpp).scale(&n(3))
            - &fpp3 * &zp
            - (&fp * &fpp * &fppp * &zp).scale(&n(2));
        let rx_bracket = rx_head - p * &rz_bracket;
        let ry_bracket = -(&d4 * &f * &fpp2) + &d3 * &fp * &fpp2 - &d2 * &fpp3
            + (&d3 * &f * &fpp * &fppp).scale(&n(3))
            - &d2 * &fp * &fpp * &fppp
            - (&d2 * &f * &fppp2).scale(&n(3))
            + &d2 * &f * &fpp * &fpppp
            - (&f * &fp * &fpp2 * &zppp).scale(&n(4))
            + (&fp * &fp * &fpp2 * &zpp).scale(&n(3))
            - (&f * &fpp3 * &zpp).scale(&n(2))
            + (&f * &fp * &fpp * &fppp * &zpp).scale(&n(9))
            - (&fp * &fpp3 * &zp).scale(&n(3))
            - (&fp * &fp * &fpp * &fppp * &zp).scale(&n(2))
            + &f * &fpp2 * &fppp * &zp
            - (&f * &fp * &fppp2 * &zp).scale(&n(6))
            + (&f * &fp * &fpp * &fpppp * &zp).scale(&n(2))
            + (&fpp3 * &fpp * &fz).scale(&n(3));
        let den = (&fpp3 * &fpp).scale(&n(3));
        let inv = den.recip()?;
        Ok(FrameJets {
            omega2_coefficient: c2,
            r: [&rx_bracket * &inv, &ry_bracket * &inv, &rz_bracket * &inv],
            f,
            fp,
            fpp,
            fppp,
            fpppp,
        })
    }
}

/// Jet order on `(x, y, z, p)` that leaves first derivatives of `r`.
const FRAME_ORDER: usize = 6;

/// All bundle objects at one point, as jets of order 1 on the bundle.
#[derive(Clone, Debug)]
pub struct BundleFrame<S: Scalar> {
    pub omega0: [JetForm<S>; 4],
    pub omega: [JetForm<S>; 4],
    pub theta: [JetForm<S>; 4],
    pub omega3: JetForm<S>,
    /// `F`-data at the base point, for the explicit `g̃`.
    pub data: FrameJets<S>,
    pub point: BundlePoint<S>,
}

impl<S: Scalar> BundleFrame<S> {
    pub fn new(rhs: &PdeRhs<S>, pt: &BundlePoint<S>) -> Result<Self> {
        let jets = rhs.jets(&pt.base(), FRAME_ORDER)?;
        let data = FrameJets::new(&jets)?;
        let space = JetSpace::new(DIM, 1);
        let lift = |j: &Jet<S>| j.transfer(&space, &[Some(0), Some(1), Some(2), Some(3)]);
        let coords = variables(&space, &pt.coords)?;
        let zero = Jet::zero(&space).truncate(1);
        let one = zero.add_scalar(&S::one());
        let unit = |k: usize| JetForm {
            comps: core::array::from_fn(|i| if i == k { one.clone() } else { zero.clone() }),
        };
        let f = lift(&data.f)?;
        let fp = lift(&data.fp)?;
        let fpp = lift(&data.fpp)?;
        let fppp = lift(&data.fppp)?;
        let fpppp = lift(&data.fpppp)?;
        let c2 = lift(&data.omega2_coefficient)?;
        let p = &coords[3];
        let (u3, u5, u8) = (&coords[4], &coords[5], &coords[6]);

        let w01 = JetForm {
            comps: core::array::from_fn(|i| match i {
                0 => -p,
                1 => -&f,
                2 => one.clone(),
                _ => zero.clone(),
            }),
        };
        let (dx, dy, dp) = (unit(0), unit(1), unit(3));
        let n = |v: i64, d: i64| one.scale(&S::from_ratio(v, d));
        let inv_fpp = fpp.recip()?;
        let w1 = w01.clone();
        let w2 = JetForm::combine(&[(&one, &dp), (&-c2, &w01)]);
        let c3 = -(&(&fppp * &inv_fpp) * &n(1, 3));
        let w3 = JetForm::combine(&[(&one, &dx), (&fp, &dy), (&c3, &w01)]);
        let c4 = &(&(&fppp * &fppp).scale(&S::from_i64(4))
            - &(&fpp * &fpppp).scale(&S::from_i64(3)))
            * &(&inv_fpp * &inv_fpp).scale(&S::from_ratio(1, 18));
        let w4 = JetForm::combine(&[(&fpp, &dy), (&c4, &w01)]);

        let inv_u3 = u3.recip()?;
        let inv_u5 = u5.recip()?;
        let t1 = JetForm::combine(&[(&(u3 * u5), &w1)]);
        let t2 = JetForm::combine(&[(u3, &w2)]);
        let t3 = JetForm::combine(&[(&-(u3 * u8), &w1), (u5, &w3)]);
        let t4c1 = -(&(&(u3 * u8) * u8) * &(&inv_u5 * &n(1, 2)));
        let t4 = JetForm::combine(&[(&t4c1, &w1), (u8, &w3), (&(u5 * &inv_u3), &w4)]);

        let third = S::from_ratio(1, 3);
        let mut om3: [Jet<S>; DIM] = core::array::from_fn(|_| zero.clone());
        for (i, slot) in om3.iter_mut().enumerate().take(4) {
            // (1/3) ∂_i log F_pp
            let dlog = lift(&(data.fpp.d(i)? * data.fpp.recip()?))?.scale(&third);
            *slot = if i < 3 {
                lift(&data.r[i])? + dlog
            } else {
                dlog
            };
        }
        om3[5] = inv_u5;

        Ok(BundleFrame {
            omega0: [w01, dp, dx, dy],
            omega: [w1, w2, w3, w4],
            theta: [t1, t2, t3, t4],
            omega3: JetForm { comps: om3 },
            data,
            point: pt.clone(),
        })
    }
}

/// `ω¹, ω², ω³, ω⁴` at the point.
pub fn base_forms<S: Scalar>(rhs: &PdeRhs<S>, pt: &BundlePoint<S>) -> Result<[FormAtPoint<S>; 4]> {
    let fr = BundleFrame::new(rhs, pt)?;
    Ok(core::array::from_fn(|i| fr.omega[i].value()))
}

/// The matrix `h` with `θ^i = Σ_j h[i][j] ω^j`.
pub fn lift_matrix<S: Scalar>(pt: &BundlePoint<S>) -> Result<[[S; 4]; 4]> {
    let (u3, u5, u8) = pt.u();
    let inv_u3 = u3.recip()?;
    let inv_u5 = u5.recip()?;
    let z = S::zero;
    Ok([
        [u3.clone() * u5.clone(), z(), z(), z()],
        [z(), u3.clone(), z(), z()],
        [-(u3.clone() * u8.clone()), z(), u5.clone(), z()],
        [
            -(u3.clone() * u8.clone() * u8.clone() * inv_u5 * S::from_ratio(1, 2)),
            z(),
            u8.clone(),
            u5.clone() * inv_u3,
        ],
    ])
}

/// `θ¹ … θ⁴` from given `ω¹ … ω⁴` at the point.
pub fn lifted_coframe<S: Scalar>(
    omega: &[FormAtPoint<S>; 4],
    pt: &BundlePoint<S>,
) -> Result<[FormAtPoint<S>; 4]> {
    let h = lift_matrix(pt)?;
    Ok(core::array::from_fn(|i| {
        let mut acc = omega[0].scale(&h[i][0]);
        for (j, w) in omega.iter().enumerate().skip(1) {
            acc = acc.add(&w.scale(&h[i][j]));
        }
        acc
    }))
}

/// A symmetric bilinear form on the bundle tangent space at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateMetricAtPoint<S> {
    pub g: [[S; DIM]; DIM],
}

impl<S: Scalar> DegenerateMetricAtPoint<S> {
    fn from_products(terms: &[(S, &FormAtPoint<S>, &FormAtPoint<S>)]) -> Self {
        let mut g: [[S; DIM]; DIM] = core::array::from_fn(|_| core::array::from_fn(|_| S::zero()));
        for (c, a, b) in terms {
            for (i, row) in g.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot += c.clone() * a.get(i) * b.get(j);
                }
            }
        }
        DegenerateMetricAtPoint { g }
    }

    fn matrix(&self) -> Matrix<S> {
        self.g.iter().map(|r| r.to_vec()).collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        linalg::rank(&self.matrix(), tol)
    }

    pub fn inertia(&self, tol: f64) -> Inertia {
        linalg::inertia(&self.matrix(), tol)
    }

    /// The `dx, dy, dz` block.
    pub fn block(&self) -> [[S; 3]; 3] {
        core::array::from_fn(|i| core::array::from_fn(|j| self.g[i][j].clone()))
    }

    /// `g(v, ·)`.
    pub fn contract(&self, v: &[S; DIM]) -> [S; DIM] {
        core::array::from_fn(|j| {
            let mut acc = S::zero();
            for (i, vi) in v.iter().enumerate() {
                acc.mul_add_assign(vi, &self.g[i][j]);
            }
            acc
        })
    }
}

/// `g̃` from its explicit expression in `dx, dy, dz` and derivatives of `F`.
pub fn gtilde<S: Scalar>(
    rhs: &PdeRhs<S>,
    pt: &BundlePoint<S>,
) -> Result<DegenerateMetricAtPoint<S>> {
    let jets = rhs.jets(&pt.base(), 4)?;
    let [f, fp, fpp, fppp, fpppp] =
        core::array::from_fn(|k| jets.p_derivative(k).expect("order 4").value().clone());
    if fpp.is_zero() {
        return Err(Error::Degenerate("F_pp vanishes at the point".into()));
    }
    let p = pt.coords[3].clone();
    let u5 = pt.coords[5].clone();
    let z = S::zero;
    let w = FormAtPoint::one([-p, -f, S::one(), z(), z(), z(), z()]);
    let three_fpp = S::from_i64(3) * fpp.clone();
    let a = FormAtPoint::one([three_fpp.clone(), three_fpp * fp, z(), z(), z(), z(), z()])
        .add(&w.scale(&-fppp.clone()));
    let lead = S::from_i64(4) * fppp.clone() * fppp - S::from_i64(3) * fpp.clone() * fpppp;
    let b = FormAtPoint::one([
        z(),
        S::from_i64(18) * fpp.clone() * fpp.clone() * fpp.clone(),
        z(),
        z(),
        z(),
        z(),
        z(),
    ])
    .add(&w.scale(&lead));
    let pre = (u5.clone() * u5).checked_div(&(S::from_i64(9) * fpp.clone() * fpp))?;
    let half = pre.clone() * S::from_ratio(1, 2);
    Ok(DegenerateMetricAtPoint::from_products(&[
        (pre, &a, &a),
        (half.clone(), &w, &b),
        (half, &b, &w),
    ]))
}

/// `g̃ = θ³θ³ + θ¹θ⁴ + θ⁴θ¹` from the lifted coframe.
pub fn gtilde_from_coframe<S: Scalar>(
    rhs: &PdeRhs<S>,
    pt: &BundlePoint<S>,
) -> Result<DegenerateMetricAtPoint<S>> {
    let fr = BundleFrame::new(rhs, pt)?;
    let [t1, _, t3, t4] = core::array::from_fn(|i| fr.theta[i].value());
    Ok(DegenerateMetricAtPoint::from_products(&[
        (S::one(), &t3, &t3),
        (S::one(), &t1, &t4),
        (S::one(), &t4, &t1),
    ]))
}

/// `Ω₃ = r_x dx + r_y dy + r_z dz + (1/3) d log(u₅³ F_pp)` at the point.
pub fn omega3<S: Scalar>(rhs: &PdeRhs<S>, pt: &BundlePoint<S>) -> Result<FormAtPoint<S>> {
    Ok(BundleFrame::new(rhs, pt)?.omega3.value())
}

/// `dΩ₃` at the point.
pub fn d_omega3<S: Scalar>(rhs: &PdeRhs<S>, pt: &BundlePoint<S>) -> Result<FormAtPoint<S>> {
    BundleFrame::new(rhs, pt)?.omega3.exterior_d()
}

/// The four vertical directions `∂_p, ∂_{u₃}, ∂_{u₅}, ∂_{u₈}`.
pub fn vertical_vectors<S: Scalar>() -> [[S; DIM]; 4] {
    core::array::from_fn(|k| {
        core::array::from_fn(|i| if i == k + 3 { S::one() } else { S::zero() })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentReport<S> {
    pub leaf: [S; 3],
    /// Fibre samples `(p, u₃, u₅, u₈)` that were evaluated.
    pub fibre: Vec<[S; 4]>,
    /// Largest deviation of a normalised `dx, dy, dz` block from the first one.
    pub conformal_defect: S,
    /// Largest vertical contraction of `dΩ₃`.
    pub horizontal_defect: S,
    pub conformal_ok: bool,
    pub horizontal_ok: bool,
    /// Samples skipped because of a singularity, with the reason.
    pub skipped: Vec<([S; 4], Error)>,
}

impl<S> DescentReport<S> {
    pub fn passed(&self) -> bool {
        self.conformal_ok && self.horizontal_ok
    }
}

/// Descent of `g̃` (up to scale) and of `dΩ₃` along the fibres over `leaf`.
pub fn descent_check<S: Scalar>(
    rhs: &PdeRhs<S>,
    leaf: &[S; 3],
    fibre: &[[S; 4]],
    tol: f64,
) -> Result<DescentReport<S>> {
    let mut blocks = Vec::new();
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut horizontal_defect = S::zero();
    for s in fibre {
        let [x, y, z] = leaf.clone();
        let [p, u3, u5, u8] = s.clone();
        let pt = BundlePoint::new([x, y, z, p, u3, u5, u8])?;
        let frame = match BundleFrame::new(rhs, &pt) {
            Ok(f) => f,
            Err(e @ (Error::Singular(_) | Error::Degenerate(_))) => {
                skipped.push((s.clone(), e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let d = frame.omega3.exterior_d()?;
        for v in vertical_vectors::<S>() {
            for c in d.contract(&v).components() {
                if c.to_f64().abs() > horizontal_defect.to_f64()
                    || (horizontal_defect.is_zero() && !c.is_zero())
                {
                    horizontal_defect = c.abs();
                }
            }
        }
        blocks.push(gtilde(rhs, &pt)?.block());
        used.push(s.clone());
    }
    if blocks.len() < 2 {
        return Err(Error::InvalidPushdown(format!(
            "only {} usable fibre samples",
            blocks.len()
        )));
    }
    let reference = &blocks[0];
    let (li, lj) = (0..9)
        .map(|k| (k / 3, k % 3))
        .find(|&(i, j)| !negligible(&reference[i][j], tol))
        .ok_or_else(|| Error::Degenerate("g̃ block vanishes".into()))?;
    let mut conformal_defect = S::zero();
    for b in &blocks[1..] {
        let lead = &b[li][lj];
        let scale = lead.checked_div(&reference[li][lj])?;
        for i in 0..3 {
            for j in 0..3 {
                let dev = b[i][j].clone() - scale.clone() * reference[i][j].clone();
                if dev.to_f64().abs() > conformal_defect.to_f64()
                    || (conformal_defect.is_zero() && !dev.is_zero())
                {
                    conformal_defect = dev.abs();
                }
            }
        }
    }
    Ok(DescentReport {
        leaf: leaf.clone(),
        fibre: used,
        conformal_ok: negligible(&conformal_defect, tol),
        horizontal_ok: negligible(&horizontal_defect, tol),
        conformal_defect,
        horizontal_defect,
        skipped,
    })
}

/// Metric and 1-form on the leaf space at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafMetric<S> {
    pub g: [[S; 3]; 3],
    pub a: [S; 3],
}

/// Push `(g̃, Ω₃)` down along the section `p = p0, u₃ = u₅ = 1, u₈ = 0`,
/// after checking descent over `leaf` on the given fibre samples.
pub fn leaf_metric<S: Scalar>(
    rhs: &PdeRhs<S>,
    leaf: &[S; 3],
    p0: &S,
    fibre: &[[S; 4]],
    tol: f64,
) -> Result<LeafMetric<S>> {
    let report = descent_check(rhs, leaf, fibre, tol)?;
    if !report.passed() {
        return Err(Error::InvalidPushdown(format!(
            "descent fails: conformal defect {}, horizontal defect {}",
            report.conformal_defect, report.horizontal_defect
        )));
    }
    let pt = BundlePoint::section(leaf, p0.clone());
    let g = gtilde(rhs, &pt)?.block();
    let om = omega3(rhs, &pt)?;
    Ok(LeafMetric {
        g,
        a: core::array::from_fn(|i| om.get(i)),
    })
}

/// The pushed-down pair as fields on `(x, y, z)`, using the section `p = p0`.
pub fn leaf_pair<S: Scalar>(rhs: &PdeRhs<S>, p0: S) -> WeylPair<S> {
    let rhs = rhs.clone();
    WeylPair::new("leaf", move |c: &[Jet<S>; 3]| {
        let order = c[0].order();
        let space = JetSpace::new(4, order + 5);
        let point: [S; 4] = [
            c[0].value().clone(),
            c[1].value().clone(),
            c[2].value().clone(),
            p0.clone(),
        ];
        let coords = variables(&space, &point)?;
        let jets = PdeJets::new(rhs.field(), &coords)?;
        let data = FrameJets::new(&jets)?;
        let target: &Arc<JetSpace> = c[0].space();
        let restrict = |j: &Jet<S>| j.transfer(target, &[Some(0), Some(1), Some(2), None]);
        let p = &coords[3];
        let third = S::from_ratio(1, 3);
        // ω³ = (1/3F_pp)(3F_pp (dx + F_p dy) − F_ppp ω₀¹); ω⁴ = F_pp dy + c₄ ω₀¹
        let inv = data.fpp.recip()?;
        let c3 = -(&(&data.fppp * &inv) * &coords[0].constant_like(third.clone()));
        let w01 = [-p, -&data.f, coords[0].constant_like(S::one())];
        let one = coords[0].constant_like(S::one());
        let zero = coords[0].constant_like(S::zero());
        let w3: [Jet<S>; 3] = core::array::from_fn(|i| {
            let base = match i {
                0 => one.clone(),
                1 => data.fp.clone(),
                _ => zero.clone(),
            };
            base + &c3 * &w01[i]
        });
        let c4 = &(&(&data.fppp * &data.fppp).scale(&S::from_i64(4))
            - &(&data.fpp * &data.fpppp).scale(&S::from_i64(3)))
            * &(&inv * &inv).scale(&S::from_ratio(1, 18));
        let w4: [Jet<S>; 3] = core::array::from_fn(|i| {
            let base = if i == 1 {
                data.fpp.clone()
            } else {
                zero.clone()
            };
            base + &c4 * &w01[i]
        });
        let mut g: Vec<Jet<S>> = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                g.push(restrict(
                    &(&w3[i] * &w3[j] + &w01[i] * &w4[j] + &w4[i] * &w01[j]),
                )?);
            }
        }
        let mut a: Vec<Jet<S>> = Vec::with_capacity(3);
        for i in 0..3 {
            let dlog = (data.fpp.d(i)? * &inv).scale(&third);
            a.push(restrict(&(&data.r[i] + &dlog))?);
        }
        Ok(PairJets {
            g: core::array::from_fn(|i| core::array::from_fn(|j| g[3 * i + j].clone())),
            a: a.try_into().expect("three components"),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn bp(v: [i64; 7]) -> BundlePoint<Q> {
        BundlePoint::new(v.map(Q::from)).unwrap()
    }

    fn form(v: [i64; 7]) -> FormAtPoint<Q> {
        FormAtPoint::one(v.map(Q::from))
    }

    #[test]
    fn flat_model_forms() {
        let f = PdeRhs::<Q>::parse("p^2/2").unwrap();
        let pt = bp([1, 2, 3, 5, 1, 1, 0]);
        let [w1, w2, w3, w4] = base_forms(&f, &pt).unwrap();
        // F = 25/2 at p = 5
        let q = |n: i64, d: i64| Q::new(n, d);
        let z = Q::from(0);
        assert_eq!(
            w1,
            FormAtPoint::one([
                q(-5, 1),
                q(-25, 2),
                q(1, 1),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone()
            ])
        );
        assert_eq!(w2, form([0, 0, 0, 1, 0, 0, 0]));
        assert_eq!(w3, form([1, 5, 0, 0, 0, 0, 0]));
        assert_eq!(w4, form([0, 1, 0, 0, 0, 0, 0]));
        let theta = lifted_coframe(&[w1.clone(), w2.clone(), w3.clone(), w4.clone()], &pt).unwrap();
        assert_eq!(theta, [w1.clone(), w2, w3.clone(), w4]);
        let shifted = bp([1, 2, 3, 5, 1, 1, 1]);
        let theta = lifted_coframe(&base_forms(&f, &shifted).unwrap(), &shifted).unwrap();
        assert_eq!(theta[2], w3.add(&w1.scale(&Q::from(-1))));
        let om = omega3(&f, &bp([1, 2, 3, 5, 2, 3, 7])).unwrap();
        assert_eq!(
            om,
            FormAtPoint::one([
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                q(1, 3),
                z
            ])
        );
    }

    #[test]
    fn omega4_coefficient_for_cubic() {
        let f = PdeRhs::<Q>::parse("p^3").unwrap();
        let pt = bp([0, 0, 0, 1, 1, 1, 0]);
        let w4 = &base_forms(&f, &pt).unwrap()[3];
        // ω⁴ = 6 dy + (4·36 − 0)/(18·36) ω₀¹ with ω₀¹ = dz − dx − dy
        assert_eq!(w4.get(2), Q::new(2, 9));
        assert_eq!(w4.get(1), Q::from(6) - Q::new(2, 9));
    }

    #[test]
    fn lift_determinant() {
        let pt = bp([0, 0, 0, 1, 2, 3, 5]);
        let h = lift_matrix(&pt).unwrap();
        let mut det = Q::from(1);
        for (i, row) in h.iter().enumerate() {
            det = det * row[i].clone();
        }
        assert_eq!(det, Q::from(2 * 27));
        assert!(BundlePoint::new([0, 0, 0, 1, 0, 3, 5].map(Q::from)).is_err());
    }

    #[test]
    fn gtilde_routes_agree_and_scale() {
        let f = PdeRhs::<Q>::parse("p^3/3 + z*p^2 - x*y*p + y^2").unwrap();
        let pt = bp([1, -2, 3, 2, 3, -2, 5]);
        let explicit = gtilde(&f, &pt).unwrap();
        assert_eq!(explicit, gtilde_from_coframe(&f, &pt).unwrap());
        assert_eq!(explicit.rank(0.0), 3);
        assert_eq!(
            explicit.inertia(0.0),
            Inertia {
                positive: 2,
                negative: 1,
                zero: 4
            }
        );
        let doubled = bp([1, -2, 3, 2, 3, -4, 5]);
        let g2 = gtilde(&f, &doubled).unwrap();
        for i in 0..DIM {
            for j in 0..DIM {
                assert_eq!(g2.g[i][j], explicit.g[i][j].clone() * Q::from(4));
            }
        }
        for v in vertical_vectors::<Q>() {
            assert!(explicit.contract(&v).iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn flat_model_metric() {
        let f = PdeRhs::<Q>::parse("p^2/2").unwrap();
        let pt = bp([1, 2, 3, 4, 1, 1, 0]);
        let g = gtilde(&f, &pt).unwrap();
        // (dx + p dy)² + dy⊗ω₀¹ + ω₀¹⊗dy, ω₀¹ = dz − 4 dx − 8 dy
        let b = g.block();
        assert_eq!(b[0][0], Q::from(1));
        assert_eq!(b[0][1], Q::from(0));
        assert_eq!(b[1][1], Q::from(0));
        assert_eq!(b[1][2], Q::from(1));
        assert_eq!(b[2][2], Q::from(0));
    }

    #[test]
    fn wedge_and_contract() {
        let a = form([1, 0, 0, 0, 0, 0, 0]);
        let b = form([0, 1, 0, 0, 0, 0, 0]);
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.get2(0, 1), Q::from(1));
        assert_eq!(w.get2(1, 0), Q::from(-1));
        let e0: [Q; DIM] = core::array::from_fn(|i| Q::from((i == 0) as i64));
        assert_eq!(w.contract(&e0), b);
    }

    fn fibre() -> [[Q; 4]; 3] {
        [
            [Q::new(1, 7), Q::from(1), Q::from(1), Q::from(0)],
            [Q::new(2, 3), Q::from(2), Q::from(-3), Q::from(5)],
            [Q::new(-1, 2), Q::new(1, 3), Q::new(1, 2), Q::from(1)],
        ]
    }

    #[test]
    fn descent_dichotomy() {
        let leaf = [Q::new(3, 2), Q::new(1, 3), Q::new(2, 5)];
        let conic = PdeRhs::<Q>::parse("(z - x*p)*p + y*p^2").unwrap();
        let r = descent_check(&conic, &leaf, &fibre(), 0.0).unwrap();
        assert!(r.passed(), "{r:?}");
        let quintic = PdeRhs::<Q>::parse("p^5").unwrap();
        let r = descent_check(&quintic, &leaf, &fibre(), 0.0).unwrap();
        assert!(!r.conformal_ok);
        assert!(r.horizontal_ok);
        assert!(matches!(
            leaf_metric(&quintic, &leaf, &Q::from(1), &fibre(), 0.0),
            Err(Error::InvalidPushdown(_))
        ));
    }

    #[test]
    fn leaf_pair_is_einstein_weyl() {
        let f = PdeRhs::<Q>::parse("(z - x*p)*p + y*p^2").unwrap();
        let leaf = [Q::new(3, 2), Q::new(1, 3), Q::new(2, 5)];
        let pair = leaf_pair(&f, Q::new(1, 7));
        assert!(crate::weyl::ew_residual(&pair, &leaf)
            .unwrap()
            .max_abs
            .is_zero());
        let lm = leaf_metric(&f, &leaf, &Q::new(1, 7), &fibre(), 0.0).unwrap();
        let j = pair.jets_at(&leaf, 0).unwrap();
        for i in 0..3 {
            assert_eq!(lm.a[i], *j.a[i].value());
            for k in 0..3 {
                assert_eq!(lm.g[i][k], *j.g[i][k].value());
            }
        }
    }
}
