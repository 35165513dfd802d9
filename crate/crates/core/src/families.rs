//! Explicit families: conic right-hand sides `F(x, y, z, p)` and the
//! closed-form Weyl pairs built from them.
//!
//! Free functions are functions of `y` only. Metrics given by a coframe use
//! the symmetrised product, so `τ¹τ² + τ²τ¹ + τ³τ³` has components
//! `τ¹_i τ²_j + τ²_i τ¹_j + τ³_i τ³_j`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::FreeFunction;
use crate::field::{PairJets, ScalarField, WeylPair};
use crate::invariants::PdeRhs;
use crate::jet::Jet;
use crate::scalar::{Scalar, Q};

type Row<S> = [Jet<S>; 3];

fn num<S: Scalar>(like: &Jet<S>, v: i64) -> Jet<S> {
    like.constant_like(S::from_i64(v))
}

/// Components of `τ¹τ² + τ²τ¹ + τ³τ³`.
pub fn coframe_metric<S: Scalar>(tau: &[Row<S>; 3]) -> [Row<S>; 3] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            &tau[0][i] * &tau[1][j] + &tau[1][i] * &tau[0][j] + &tau[2][i] * &tau[2][j]
        })
    })
}

fn combine<S: Scalar>(terms: &[(&Jet<S>, &Row<S>)]) -> Row<S> {
    core::array::from_fn(|i| {
        let mut acc = terms[0].0 * &terms[0].1[i];
        for (c, row) in &terms[1..] {
            acc = acc + *c * &row[i];
        }
        acc
    })
}

/// Which variable plays the role of the abscissa of the conic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConicArgument {
    /// `s = z − x p`.
    Shifted,
    /// `s = p`.
    Plain,
}

impl ConicArgument {
    fn value<S: Scalar>(self, c: &[Jet<S>]) -> Jet<S> {
        match self {
            ConicArgument::Shifted => &c[2] - &(&c[0] * &c[3]),
            ConicArgument::Plain => c[3].clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `a F² + 2b F s + c s² + 2k F + 2l s + m = 0` with coefficients in `y`.
#[derive(Clone, Debug)]
pub struct ConicCoefficients {
    pub a: FreeFunction,
    pub b: FreeFunction,
    pub c: FreeFunction,
    pub k: FreeFunction,
    pub l: FreeFunction,
    pub m: FreeFunction,
    pub argument: ConicArgument,
}

struct ConicJets<S: Scalar> {
    a: Jet<S>,
    linear: Jet<S>,
    constant: Jet<S>,
}

impl ConicCoefficients {
    fn jets<S: Scalar>(&self, coords: &[Jet<S>]) -> Result<ConicJets<S>> {
        let y = &coords[1];
        let s = self.argument.value(coords);
        let c = self.c.eval_jet(y)?;
        let l = self.l.eval_jet(y)?;
        Ok(ConicJets {
            a: self.a.eval_jet(y)?,
            // F² a + 2 F (b s + k) + (c s² + 2 l s + m)
            linear: &self.b.eval_jet(y)? * &s + self.k.eval_jet(y)?,
            constant: &c * &s * &s + (&l * &s).scale(&S::from_i64(2)) + self.m.eval_jet(y)?,
        })
    }

    /// Conic polynomial evaluated on a candidate `F`.
    pub fn residual<S: Scalar>(&self, f: &Jet<S>, coords: &[Jet<S>]) -> Result<Jet<S>> {
        let j = self.jets(coords)?;
        Ok(&j.a * f * f + (&j.linear * f).scale(&S::from_i64(2)) + j.constant)
    }
}

/// Solve the conic for `F` on the jets `coords = (x, y, z, p)`.
///
/// When `a` vanishes identically the relation is linear and `branch` is
/// ignored. Otherwise the chosen root of the quadratic is returned.
pub fn conic_solve<S: Scalar>(
    cc: &ConicCoefficients,
    branch: Branch,
    coords: &[Jet<S>],
) -> Result<Jet<S>> {
    let j = cc.jets(coords)?;
    if j.a.is_zero() {
        if j.linear.value().is_zero() {
            return Err(Error::Degenerate(
                "leading and linear conic coefficients vanish".into(),
            ));
        }
        return (-j.constant).try_div(&j.linear.scale(&S::from_i64(2)));
    }
    if j.a.value().is_zero() {
        return Err(Error::Singular(
            "leading conic coefficient vanishes at the point".into(),
        ));
    }
    let disc = &j.linear * &j.linear - &j.a * &j.constant;
    match disc.value().signum() {
        core::cmp::Ordering::Less => {
            return Err(Error::Branch("negative discriminant at the point".into()))
        }
        core::cmp::Ordering::Equal => {
            return Err(Error::Branch("branch point: discriminant vanishes".into()))
        }
        core::cmp::Ordering::Greater => {}
    }
    let root = disc.sqrt()?;
    let signed = match branch {
        Branch::Plus => root,
        Branch::Minus => -root,
    };
    // Same root through the product of roots when the usual form cancels.
    let cancels = signed.value().signum() == j.linear.value().signum();
    if cancels && !j.linear.value().is_zero() {
        (-j.constant).try_div(&(signed + j.linear))
    } else {
        (signed - j.linear).try_div(&j.a)
    }
}

/// The PDE right-hand side cut out by a conic branch.
pub fn conic_rhs<S: Scalar>(cc: &ConicCoefficients, branch: Branch) -> PdeRhs<S> {
    let cc = cc.clone();
    PdeRhs::new(ScalarField::new(4, move |c| conic_solve(&cc, branch, c)))
        .expect("four chart variables")
}

/// Five free functions `b, c, k, l, m` of `y`.
#[derive(Clone, Debug)]
pub struct Thm1Params {
    pub b: FreeFunction,
    pub c: FreeFunction,
    pub k: FreeFunction,
    pub l: FreeFunction,
    pub m: FreeFunction,
}

impl Thm1Params {
    pub fn parse(b: &str, c: &str, k: &str, l: &str, m: &str) -> Result<Self> {
        Ok(Thm1Params {
            b: b.parse()?,
            c: c.parse()?,
            k: k.parse()?,
            l: l.parse()?,
            m: m.parse()?,
        })
    }

    /// The linear (`a = 0`) conic whose solution is [`f_thm1`].
    pub fn conic(&self) -> ConicCoefficients {
        ConicCoefficients {
            a: FreeFunction::constant(Q::from(0)),
            b: self.b.clone(),
            c: self.c.clone(),
            k: self.k.clone(),
            l: self.l.clone(),
            m: self.m.clone(),
            argument: ConicArgument::Shifted,
        }
    }
}

/// `F = (−c s² − 2l s − m) / (2b s + 2k)` with `s = z − x p`.
pub fn f_thm1<S: Scalar>(p: &Thm1Params) -> PdeRhs<S> {
    let p = p.clone();
    PdeRhs::new(ScalarField::new(4, move |c| {
        let y = &c[1];
        let s = ConicArgument::Shifted.value(c);
        let (b, cc, k, l, m) = (
            p.b.eval_jet(y)?,
            p.c.eval_jet(y)?,
            p.k.eval_jet(y)?,
            p.l.eval_jet(y)?,
            p.m.eval_jet(y)?,
        );
        let two = S::from_i64(2);
        let top = -(&cc * &s * &s) - (&l * &s).scale(&two) - m;
        let bottom = (&b * &s + k).scale(&two);
        top.try_div(&bottom)
    }))
    .expect("four chart variables")
}

/// Metric components of the five-function family.
pub fn thm1_metric<S: Scalar>(p: &Thm1Params, c: &[Jet<S>; 3]) -> Result<[Row<S>; 3]> {
    let [x, y, z] = c;
    let (b, cc, k, l, m) = (
        p.b.eval_jet(y)?,
        p.c.eval_jet(y)?,
        p.k.eval_jet(y)?,
        p.l.eval_jet(y)?,
        p.m.eval_jet(y)?,
    );
    let kbz = &k + &(&b * z);
    let x2 = x * x;
    let gxx = &kbz * &kbz;
    let gyy = &x2 * &(&l * &l - &cc * &m);
    let gzz = &x2 * &(&b * &b);
    let gxy = x * &(&(&cc * &k) * z - &(&b * &l) * z + &k * &l - &b * &m);
    let gxz = -(x * &(&b * &kbz));
    let gyz = -(&x2 * &(&cc * &k - &b * &l));
    Ok([
        [gxx, gxy.clone(), gxz.clone()],
        [gxy, gyy, gyz.clone()],
        [gxz, gyz, gzz],
    ])
}

/// The five-function Einstein-Weyl pair on `(x, y, z)`.
pub fn weyl_thm1<S: Scalar>(p: &Thm1Params) -> WeylPair<S> {
    let p = p.clone();
    let (db, dk) = (p.b.derivative(), p.k.derivative());
    WeylPair::new("thm1", move |c| {
        let g = thm1_metric(&p, c)?;
        let [x, y, z] = c;
        let (b, cc, k, l, m) = (
            p.b.eval_jet(y)?,
            p.c.eval_jet(y)?,
            p.k.eval_jet(y)?,
            p.l.eval_jet(y)?,
            p.m.eval_jet(y)?,
        );
        let (b1, k1) = (db.eval_jet(y)?, dk.eval_jet(y)?);
        let kbz = &k + &(&b * z);
        let den = &cc * &k * &k - (&b * &k * &l).scale(&S::from_i64(2)) + &b * &b * &m;
        let f1 = (-(&cc * &k) + &b * &l + &b1 * &k - &b * &k1).try_div(&(x * &den))?;
        let f2 = (&b * &l * &l - &cc * &b * &m - &b1 * &k * &l + &b * &b1 * &m + &cc * &k * &k1
            - &b * &k1 * &l)
            .try_div(&den)?;
        Ok(PairJets {
            g,
            a: [-(&f1 * &kbz), f2, &f1 * &(x * &b)],
        })
    })
}

/// Nine free functions `α, β, γ, δ, ε, ζ, λ, μ, ν` of `y`.
#[derive(Clone, Debug)]
pub struct Thm3Params {
    pub alpha: FreeFunction,
    pub beta: FreeFunction,
    pub gamma: FreeFunction,
    pub delta: FreeFunction,
    pub epsilon: FreeFunction,
    pub zeta: FreeFunction,
    pub lambda: FreeFunction,
    pub mu: FreeFunction,
    pub nu: FreeFunction,
}

pub const THM3_NAMES: [&str; 9] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "lambda", "mu", "nu",
];

impl Thm3Params {
    /// Parameters in the order of [`THM3_NAMES`].
    pub fn from_array(f: [FreeFunction; 9]) -> Self {
        let [alpha, beta, gamma, delta, epsilon, zeta, lambda, mu, nu] = f;
        Thm3Params {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            zeta,
            lambda,
            mu,
            nu,
        }
    }

    pub fn parse(texts: [&str; 9]) -> Result<Self> {
        let mut out = Vec::with_capacity(9);
        for t in texts {
            out.push(FreeFunction::parse(t)?);
        }
        Ok(Self::from_array(out.try_into().expect("nine functions")))
    }

    pub fn to_array(&self) -> [&FreeFunction; 9] {
        [
            &self.alpha,
            &self.beta,
            &self.gamma,
            &self.delta,
            &self.epsilon,
            &self.zeta,
            &self.lambda,
            &self.mu,
            &self.nu,
        ]
    }

    fn eval<S: Scalar>(&self, y: &Jet<S>) -> Result<[Jet<S>; 9]> {
        let f = self.to_array();
        let mut out = Vec::with_capacity(9);
        for g in f {
            out.push(g.eval_jet(y)?);
        }
        Ok(out.try_into().expect("nine values"))
    }
}

/// `F = (α s² + β s p + γ s + δ p² + ε p + ζ) / (λ s + μ p + ν)` with `s = z − x p`.
pub fn f_thm3<S: Scalar>(p: &Thm3Params) -> PdeRhs<S> {
    let p = p.clone();
    PdeRhs::new(ScalarField::new(4, move |c| {
        let [al, be, ga, de, ep, ze, la, mu, nu] = p.eval(&c[1])?;
        let s = ConicArgument::Shifted.value(c);
        let pp = &c[3];
        let top = &al * &s * &s + &be * &s * pp + &ga * &s + &de * pp * pp + &ep * pp + ze;
        let bottom = &la * &s + &mu * pp + nu;
        top.try_div(&bottom)
    }))
    .expect("four chart variables")
}

/// The coframe `τ¹, τ², τ³` (rows of `dx, dy, dz` components) and `Π`.
#[derive(Clone, Debug)]
pub struct Thm3Coframe<S: Scalar> {
    pub tau: [Row<S>; 3],
    pub pi: Jet<S>,
}

pub fn thm3_coframe<S: Scalar>(p: &Thm3Params, c: &[Jet<S>; 3]) -> Result<Thm3Coframe<S>> {
    let [x, y, z] = c;
    let [al, be, ga, de, ep, ze, la, mu, nu] = p.eval(y)?;
    let n = |v: i64| num(x, v);
    let x2 = x * x;
    let pi = &x2 * &ze * &la * &la
        + &al * &mu * &mu * z * z
        + (x * &al * &mu * &nu * z).scale(&S::from_i64(2))
        + &x2 * &al * &nu * &nu
        - &be * &la * &mu * z * z
        - x * &be * &la * &nu * z
        + &de * &la * &la * z * z
        + x * &ep * &la * &la * z
        - (x * &ze * &la * &mu).scale(&S::from_i64(2))
        - &be * &mu * &nu * z
        - x * &be * &nu * &nu
        + (&de * &la * &nu * z).scale(&S::from_i64(2))
        - &ep * &la * &mu * z
        + x * &ep * &la * &nu
        - x * &ga * &la * &mu * z
        - &x2 * &ga * &la * &nu
        + &ze * &mu * &mu
        + &de * &nu * &nu
        - &ep * &mu * &nu
        + &ga * &mu * &mu * z
        + x * &ga * &mu * &nu;
    let q = x * &la - &mu;
    let inv_q = q
        .recip()
        .map_err(|_| Error::Singular("x λ − μ vanishes".into()))?;
    let two = S::from_i64(2);
    let t1 = [n(1), &(x * &be - &de - &x2 * &al) * &inv_q, n(0)];
    let t2 = [n(0), (&pi * &inv_q).scale(&two), n(0)];
    let t3y = -(&ep * &mu) + (&x2 * &al * &nu).scale(&two) + x * &ga * &mu
        - (x * &be * &nu).scale(&two)
        - &be * &mu * z
        + (&de * &la * z).scale(&two)
        + (x * &al * &mu * z).scale(&two)
        + x * &ep * &la
        + (&de * &nu).scale(&two)
        - &x2 * &ga * &la
        - x * &be * &la * z;
    let t3 = [-(&la * z) - &nu, &t3y * &inv_q, q];
    Ok(Thm3Coframe {
        tau: [t1, t2, t3],
        pi,
    })
}

/// The nine-function Einstein-Weyl pair: `g = τ¹τ² + τ²τ¹ + τ³τ³`, `A = (N / 2Π) τ³`.
pub fn weyl_thm3<S: Scalar>(p: &Thm3Params) -> WeylPair<S> {
    let p = p.clone();
    let (dla, dmu, dnu) = (p.lambda.derivative(), p.mu.derivative(), p.nu.derivative());
    WeylPair::new("thm3", move |c| {
        let cf = thm3_coframe(&p, c)?;
        let [x, y, z] = c;
        let [al, be, ga, _, _, _, la, mu, nu] = p.eval(y)?;
        let (la1, mu1, nu1) = (dla.eval_jet(y)?, dmu.eval_jet(y)?, dnu.eval_jet(y)?);
        let two = S::from_i64(2);
        let numerator = &ga * &la * x - &ga * &mu + x * &la * &nu1 + &be * &la * z + &la * &mu1 * z
            - (&al * &mu * z).scale(&two)
            - &la1 * &mu * z
            - &mu * &nu1
            - x * &la1 * &nu
            - (x * &al * &nu).scale(&two)
            + &be * &nu
            + &mu1 * &nu;
        let factor = numerator
            .try_div(&cf.pi.scale(&two))
            .map_err(|_| Error::Singular("Π vanishes".into()))?;
        Ok(PairJets {
            g: coframe_metric(&cf.tau),
            a: core::array::from_fn(|i| &factor * &cf.tau[2][i]),
        })
    })
}

/// The nine-function pair with the 1-form corrected by
/// `(2 x α − β + (x λ − μ)′) / (x λ − μ) dy`, which makes it the pushed-down
/// class of `f_thm3`. The metric is unchanged.
pub fn weyl_thm3_repaired<S: Scalar>(p: &Thm3Params) -> WeylPair<S> {
    let base = weyl_thm3::<S>(p);
    let p = p.clone();
    let (dla, dmu) = (p.lambda.derivative(), p.mu.derivative());
    WeylPair::new("thm3-repaired", move |c: &[Jet<S>; 3]| {
        let mut out = base.eval(c)?;
        let [x, y, _] = c;
        let [al, be, _, _, _, _, la, mu, _] = p.eval(y)?;
        let (la1, mu1) = (dla.eval_jet(y)?, dmu.eval_jet(y)?);
        let q = x * &la - &mu;
        let top = (x * &al).scale(&S::from_i64(2)) - be + x * &la1 - mu1;
        let shift = top
            .try_div(&q)
            .map_err(|_| Error::Singular("x λ − μ vanishes".into()))?;
        out.a[1] = &out.a[1] + &shift;
        Ok(out)
    })
}

/// The three hyperbolic families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperbolicCase {
    /// Shifted argument with `k = l`.
    KlEqual,
    /// Shifted argument with `c = m′` and `a = (b l + k k′ − l l′) / k`; flat.
    Constrained,
    /// Plain argument `p` with `k = l`.
    PBased,
}

/// `F = a ch + b sh + c` and `s = k ch + l sh + m`, where `ch = (1 + q²)/2q`,
/// `sh = (1 − q²)/2q` and `s` is `z − x p` or `p` depending on the case.
#[derive(Clone, Debug)]
pub struct HyperbolicParams {
    pub a: FreeFunction,
    pub b: FreeFunction,
    pub c: FreeFunction,
    pub k: FreeFunction,
    pub l: FreeFunction,
    pub m: FreeFunction,
    /// Function inside `A = d log(x² e)` for the constrained case.
    pub e: FreeFunction,
    pub case: HyperbolicCase,
}

const PROBES: [(i64, i64); 7] = [(-5, 2), (-1, 1), (-1, 3), (0, 1), (2, 7), (1, 1), (3, 1)];

/// Agreement of two free functions at fixed probe values of `y`.
fn agree(f: &FreeFunction, g: &FreeFunction) -> bool {
    let mut compared = 0;
    for (n, d) in PROBES {
        if f.is_transcendental() || g.is_transcendental() {
            let y = n as f64 / d as f64;
            match (f.eval(&y), g.eval(&y)) {
                (Ok(a), Ok(b)) => {
                    if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                        return false;
                    }
                    compared += 1;
                }
                (Err(_), Err(_)) => {}
                _ => return false,
            }
        } else {
            let y = Q::new(n, d);
            match (f.eval(&y), g.eval(&y)) {
                (Ok(a), Ok(b)) => {
                    if a != b {
                        return false;
                    }
                    compared += 1;
                }
                (Err(_), Err(_)) => {}
                _ => return false,
            }
        }
    }
    compared > 0
}

impl HyperbolicParams {
    pub fn argument(&self) -> ConicArgument {
        match self.case {
            HyperbolicCase::PBased => ConicArgument::Plain,
            _ => ConicArgument::Shifted,
        }
    }

    /// The constrained case is expected to be flat (`dA = 0`, Cotton `= 0`).
    pub fn expects_flat(&self) -> bool {
        self.case == HyperbolicCase::Constrained
    }

    /// Check the case constraints at fixed probe values of `y`.
    pub fn validate(&self) -> Result<()> {
        match self.case {
            HyperbolicCase::KlEqual | HyperbolicCase::PBased => {
                if !agree(&self.k, &self.l) {
                    return Err(Error::Argument(format!(
                        "this case requires k = l, got k = {}, l = {}",
                        self.k, self.l
                    )));
                }
            }
            HyperbolicCase::Constrained => {
                if !agree(&self.c, &self.m.derivative()) {
                    return Err(Error::Argument(format!(
                        "this case requires c = m', got c = {}, m' = {}",
                        self.c,
                        self.m.derivative()
                    )));
                }
                let expected = FreeFunction::parse(&format!(
                    "(({b})*({l}) + ({k})*({dk}) - ({l})*({dl}))/({k})",
                    b = self.b,
                    k = self.k,
                    l = self.l,
                    dk = self.k.derivative(),
                    dl = self.l.derivative()
                ))?;
                if !agree(&self.a, &expected) {
                    return Err(Error::Argument(format!(
                        "this case requires a = (b l + k k' - l l')/k, got a = {}",
                        self.a
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `F` of a hyperbolic family, solving `s = k ch + l sh + m` for `q`.
///
/// With `k = l` the relation is linear, `q = k / (s − m)`, and `branch` is
/// ignored; otherwise the chosen root of `(k − l) q² − 2(s − m) q + (k + l) = 0`.
pub fn f_hyperbolic<S: Scalar>(p: &HyperbolicParams, branch: Branch) -> PdeRhs<S> {
    let p = p.clone();
    PdeRhs::new(ScalarField::new(4, move |c: &[Jet<S>]| {
        let y = &c[1];
        let s = p.argument().value(c);
        let (a, b, cc, k, l, m) = (
            p.a.eval_jet(y)?,
            p.b.eval_jet(y)?,
            p.c.eval_jet(y)?,
            p.k.eval_jet(y)?,
            p.l.eval_jet(y)?,
            p.m.eval_jet(y)?,
        );
        let shifted = &s - &m;
        let lead = &k - &l;
        let q = if lead.is_zero() {
            k.try_div(&shifted)?
        } else {
            let disc = &shifted * &shifted - &lead * &(&k + &l);
            if Scalar::signum(disc.value()) != core::cmp::Ordering::Greater {
                return Err(Error::Branch("no real parameter q at the point".into()));
            }
            let root = disc.sqrt()?;
            let signed = match branch {
                Branch::Plus => root,
                Branch::Minus => -root,
            };
            // Near k = ±l one form of the root cancels; the product of the
            // roots, (k + l)/(k − l), gives the other.
            if signed.value().signum() == shifted.value().signum() || shifted.value().is_zero() {
                (&shifted + &signed).try_div(&lead)?
            } else {
                (&k + &l).try_div(&(&shifted - &signed))?
            }
        };
        let two = S::from_i64(2);
        let q2 = &q * &q;
        ((&a + &b) + &(&a - &b) * &q2)
            .try_div(&q.scale(&two))
            .map(|f| f + cc)
    }))
    .expect("four chart variables")
}

/// The Weyl pair of a hyperbolic family as displayed, after checking its constraints.
pub fn weyl_hyperbolic<S: Scalar>(p: &HyperbolicParams) -> Result<WeylPair<S>> {
    hyperbolic_pair(p, false)
}

/// The hyperbolic pair with the `k = l`, shifted-argument 1-form corrected to
/// `A = −(2(a + b) τ² + (c − m′) τ³) / (x (a − b) l)`, which is the pushed-down
/// class of `f_hyperbolic`. The displayed form lacks the factor `l` in the
/// `τ³` term. The `p`-based case is returned unchanged; the constrained case
/// has no closed-form repair and gives [`Error::Consistency`].
pub fn weyl_hyperbolic_repaired<S: Scalar>(p: &HyperbolicParams) -> Result<WeylPair<S>> {
    if p.case == HyperbolicCase::Constrained {
        return Err(Error::Consistency(
            "the displayed constrained-case metric is not conformal to the pushdown; use coframe::leaf_pair".into(),
        ));
    }
    hyperbolic_pair(p, true)
}

fn hyperbolic_pair<S: Scalar>(p: &HyperbolicParams, repaired: bool) -> Result<WeylPair<S>> {
    p.validate()?;
    let p = p.clone();
    let dm = p.m.derivative();
    let (dk, dl) = (p.k.derivative(), p.l.derivative());
    let de = p.e.derivative();
    let name = match p.case {
        HyperbolicCase::KlEqual => "hyperbolic-case1",
        HyperbolicCase::Constrained => "hyperbolic-case2",
        HyperbolicCase::PBased => "hyperbolic-case3",
    };
    Ok(WeylPair::new(name, move |c| {
        let [x, y, z] = c;
        let n = |v: i64| num(x, v);
        let half = S::from_ratio(1, 2);
        let (a, b, cc, k, l, m) = (
            p.a.eval_jet(y)?,
            p.b.eval_jet(y)?,
            p.c.eval_jet(y)?,
            p.k.eval_jet(y)?,
            p.l.eval_jet(y)?,
            p.m.eval_jet(y)?,
        );
        let m1 = dm.eval_jet(y)?;
        let apb = &a + &b;
        let amb = &a - &b;
        let (tau, a_form) = match p.case {
            HyperbolicCase::KlEqual => {
                let t1 = [-(&l.scale(&S::from_i64(2))), x * &apb, n(0)];
                let t2 = [n(0), -(x * &amb).scale(&half), n(0)];
                let t3 = [z - &m, x * &cc, -x];
                let xamb = x * &amb;
                let c2 = (apb.scale(&S::from_i64(-2)))
                    .try_div(&(&xamb * &l))
                    .map_err(|_| Error::Singular("x (a − b) l vanishes".into()))?;
                let mut c3 = (-(&cc - &m1)).try_div(&xamb)?;
                if repaired {
                    c3 = c3.try_div(&l)?;
                }
                let a_form = combine(&[(&c2, &t2), (&c3, &t3)]);
                ([t1, t2, t3], a_form)
            }
            HyperbolicCase::Constrained => {
                let (k1, l1) = (dk.eval_jet(y)?, dl.eval_jet(y)?);
                let w = x * &(&b * &k - &b * &l + &k * &k1 - &l * &l1);
                let t1 = [&(&k + &l) * &k, w.clone(), n(0)];
                let t2 = [(&(&k - &l) * &k).scale(&half), w.scale(&half), n(0)];
                let t3 = [-(&(z - &m) * &k), -(x * &(&k * &m)), x * &k];
                // A = d log(x² e) = 2 dx / x + (e′ / e) dy
                let e = p.e.eval_jet(y)?;
                let a_form = [n(2).try_div(x)?, de.eval_jet(y)?.try_div(&e)?, n(0)];
                ([t1, t2, t3], a_form)
            }
            HyperbolicCase::PBased => {
                let t1 = [l.scale(&S::from_i64(2)), apb.clone(), n(0)];
                let t2 = [n(0), amb.scale(&-half.clone()), n(0)];
                let t3 = [-m.clone(), apb, n(1)];
                let c3 = (-m1)
                    .try_div(&(&amb * &l))
                    .map_err(|_| Error::Singular("(a − b) l vanishes".into()))?;
                let a_form = core::array::from_fn(|i| &c3 * &t3[i]);
                ([t1, t2, t3], a_form)
            }
        };
        Ok(PairJets {
            g: coframe_metric(&tau),
            a: a_form,
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{variables, JetSpace};
    use crate::weyl::{ew_residual, signature};

    fn ff(s: &str) -> FreeFunction {
        s.parse().unwrap()
    }

    fn q3(a: i64, b: i64, c: i64) -> [Q; 3] {
        [Q::from(a), Q::from(b), Q::from(c)]
    }

    #[test]
    fn thm1_example_components() {
        let p = Thm1Params::parse("1", "0", "1", "0", "0").unwrap();
        let space = JetSpace::new(3, 0);
        let c = crate::field::coordinate_jets(&space, &q3(2, 1, 3));
        let g = thm1_metric::<Q>(&p, &c).unwrap();
        // g_xx = (1+z)², g_zz = x², g_xz = −x(1+z), g_yy = 0
        assert_eq!(*g[0][0].value(), Q::from(16));
        assert_eq!(*g[2][2].value(), Q::from(4));
        assert_eq!(*g[0][2].value(), Q::from(-8));
        assert_eq!(*g[1][1].value(), Q::from(0));
        // the 1-form has the pole c k² − 2 b k l + b² m = 0 here
        assert!(weyl_thm1::<Q>(&p).jets_at(&q3(2, 1, 3), 0).is_err());
        let p = Thm1Params::parse("1", "1", "1", "0", "0").unwrap();
        let w = weyl_thm1::<Q>(&p);
        assert_eq!(signature(&w, &q3(1, 0, 1), 0.0).unwrap(), (2, 1));
        assert!(ew_residual(&w, &q3(1, 0, 1)).unwrap().max_abs.is_zero());
    }

    #[test]
    fn conic_linear_and_quadratic() {
        let p = Thm1Params::parse("1 + y", "2", "y^2 - 3", "1", "y").unwrap();
        let space = JetSpace::new(4, 3);
        let pt = [Q::new(1, 2), Q::from(2), Q::from(-1), Q::new(3, 5)];
        let c = variables(&space, &pt).unwrap();
        let direct = f_thm1::<Q>(&p).field().eval(&c).unwrap();
        let solved = conic_solve(&p.conic(), Branch::Plus, &c).unwrap();
        assert_eq!(direct, solved);
        assert!(p.conic().residual(&solved, &c).unwrap().is_zero());

        let unit = ConicCoefficients {
            a: ff("1"),
            b: ff("0"),
            c: ff("0"),
            k: ff("0"),
            l: ff("0"),
            m: ff("-1"),
            argument: ConicArgument::Plain,
        };
        assert_eq!(
            *conic_solve(&unit, Branch::Plus, &c).unwrap().value(),
            Q::from(1)
        );
        assert_eq!(
            *conic_solve(&unit, Branch::Minus, &c).unwrap().value(),
            Q::from(-1)
        );
        let none = ConicCoefficients {
            m: ff("1"),
            ..unit.clone()
        };
        assert!(matches!(
            conic_solve(&none, Branch::Plus, &c),
            Err(Error::Branch(_))
        ));
        let degenerate = ConicCoefficients { a: ff("0"), ..unit };
        assert!(matches!(
            conic_solve(&degenerate, Branch::Plus, &c),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn conic_square_root_branch() {
        let cc = ConicCoefficients {
            a: ff("1"),
            b: ff("y"),
            c: ff("-2"),
            k: ff("1"),
            l: ff("y^2"),
            m: ff("-3"),
            argument: ConicArgument::Shifted,
        };
        let space = JetSpace::new(4, 3);
        let c = variables(&space, &[0.5, 1.5, -0.25, 0.75]).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let f = conic_solve(&cc, b, &c).unwrap();
            let r = cc.residual(&f, &c).unwrap();
            assert!(r.coefficients().all(|(_, v)| v.abs() < 1e-12));
        }
    }

    #[test]
    fn small_leading_coefficient_root() {
        // 1e-12 F² + 2F − 2 = 0; the finite root is 2 / (1 + sqrt(1 + 2e-12))
        let cc = ConicCoefficients {
            a: ff("1/1000000000000"),
            b: ff("0"),
            c: ff("0"),
            k: ff("1"),
            l: ff("0"),
            m: ff("-2"),
            argument: ConicArgument::Plain,
        };
        let space = JetSpace::new(4, 1);
        let c = variables(&space, &[0.5, 1.5, -0.25, 0.75]).unwrap();
        let f = conic_solve(&cc, Branch::Plus, &c).unwrap();
        assert!((f.value() - (1.0 - 0.5e-12)).abs() < 1e-15);
    }

    #[test]
    fn thm3_examples() {
        let mut t = ["0"; 9];
        t[5] = "1";
        t[6] = "1";
        let p = Thm3Params::parse(t).unwrap();
        let space = JetSpace::new(3, 1);
        let c = crate::field::coordinate_jets(&space, &q3(3, 1, 2));
        let cf = thm3_coframe(&p, &c).unwrap();
        assert_eq!(*cf.pi.value(), Q::from(9));
        assert_eq!(*cf.tau[1][1].value(), Q::from(6));

        let mut t = ["0"; 9];
        t[6] = "1";
        t[7] = "y";
        t[8] = "1";
        let p = Thm3Params::parse(t).unwrap();
        // μ = x λ at x = y = 2
        let c = crate::field::coordinate_jets(&space, &q3(2, 2, 0));
        assert!(matches!(thm3_coframe(&p, &c), Err(Error::Singular(_))));

        let mut t = ["0"; 9];
        t[5] = "1";
        t[8] = "1";
        let f = f_thm3::<Q>(&Thm3Params::parse(t).unwrap());
        assert_eq!(
            f.field()
                .value_at(&[Q::from(1), Q::from(2), Q::from(3), Q::from(4)])
                .unwrap(),
            Q::from(1)
        );
        let mut t = ["0"; 9];
        t[1] = "1";
        t[8] = "1";
        let f = f_thm3::<Q>(&Thm3Params::parse(t).unwrap());
        // (z − x p) p at (1, 2, 3, 4)
        assert_eq!(
            f.field()
                .value_at(&[Q::from(1), Q::from(2), Q::from(3), Q::from(4)])
                .unwrap(),
            Q::from(-4)
        );
    }

    fn hyper(
        a: &str,
        b: &str,
        c: &str,
        k: &str,
        l: &str,
        m: &str,
        case: HyperbolicCase,
    ) -> HyperbolicParams {
        HyperbolicParams {
            a: ff(a),
            b: ff(b),
            c: ff(c),
            k: ff(k),
            l: ff(l),
            m: ff(m),
            e: ff("1"),
            case,
        }
    }

    #[test]
    fn hyperbolic_examples() {
        let p = hyper("2", "1", "0", "1", "1", "0", HyperbolicCase::KlEqual);
        let w = weyl_hyperbolic::<Q>(&p).unwrap();
        let x = Q::from(3);
        let j = w.jets_at(&[x.clone(), Q::from(1), Q::from(2)], 0).unwrap();
        // A = (−6/x) τ² + 0 τ³ with τ² = −(x/2) dy
        assert_eq!(*j.a[1].value(), Q::from(3));
        assert!(j.a[0].value().is_zero() && j.a[2].value().is_zero());

        let p = hyper("1", "0", "0", "1", "1", "y", HyperbolicCase::PBased);
        let w = weyl_hyperbolic::<Q>(&p).unwrap();
        let j = w.jets_at(&q3(1, 2, 3), 0).unwrap();
        // A = −τ³ = −(dz − y dx + dy)
        assert_eq!(*j.a[0].value(), Q::from(2));
        assert_eq!(*j.a[1].value(), Q::from(-1));
        assert_eq!(*j.a[2].value(), Q::from(-1));

        let bad = hyper("1", "0", "0", "1", "2", "0", HyperbolicCase::KlEqual);
        assert!(matches!(
            weyl_hyperbolic::<Q>(&bad),
            Err(Error::Argument(_))
        ));
        let ok = hyper(
            "y*(y+2) - (y+2)",
            "y",
            "2*y",
            "1",
            "y + 2",
            "y^2",
            HyperbolicCase::Constrained,
        );
        assert!(ok.validate().is_ok());
        let bad = HyperbolicParams { c: ff("y"), ..ok };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn repaired_pairs_are_einstein_weyl() {
        let t = Thm3Params::parse([
            "1 + y", "2 - y", "y", "3", "1 - 2*y", "2 + y", "1 + y", "y - 2", "3 + y",
        ])
        .unwrap();
        let pt = [Q::new(3, 2), Q::new(1, 3), Q::new(2, 5)];
        assert!(!ew_residual(&weyl_thm3::<Q>(&t), &pt)
            .unwrap()
            .max_abs
            .is_zero());
        let fixed = weyl_thm3_repaired::<Q>(&t);
        assert!(ew_residual(&fixed, &pt).unwrap().max_abs.is_zero());
        assert_eq!(signature(&fixed, &pt, 0.0).unwrap(), (2, 1));

        let p = hyper(
            "2 + y",
            "1 - y",
            "y^2",
            "1 + y",
            "1 + y",
            "y",
            HyperbolicCase::KlEqual,
        );
        assert!(!ew_residual(&weyl_hyperbolic::<Q>(&p).unwrap(), &pt)
            .unwrap()
            .max_abs
            .is_zero());
        assert!(
            ew_residual(&weyl_hyperbolic_repaired::<Q>(&p).unwrap(), &pt)
                .unwrap()
                .max_abs
                .is_zero()
        );
        let c2 = hyper(
            "y*(y+2) - (y+2)",
            "y",
            "2*y",
            "1",
            "y + 2",
            "y^2",
            HyperbolicCase::Constrained,
        );
        assert!(matches!(
            weyl_hyperbolic_repaired::<Q>(&c2),
            Err(Error::Consistency(_))
        ));
    }
}
