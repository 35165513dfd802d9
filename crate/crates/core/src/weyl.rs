//! Weyl geometry in a coordinate frame, evaluated pointwise through jets.
//!
//! Conventions, all indices in the coordinate frame `(x, y, z)`:
//!
//! * Weyl connection: `Γ^ρ_{λμ} = {ρ λμ} − δ^ρ_μ A_λ − δ^ρ_λ A_μ + g_{λμ} A^ρ`,
//!   the unique torsion-free connection with `∇_λ g_{μν} = 2 A_λ g_{μν}`.
//! * Curvature: `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}`.
//! * Ricci: `R_{σν} = R^ρ_{σρν}`, scalar `R = g^{σν} R_{σν}`.
//! * Maxwell form: `F_{μν} = ∂_μ A_ν − ∂_ν A_μ`.
//!
//! With these choices `R_{[μν]} = −(3/2) F_{μν}` holds identically.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{coordinate_jets, PairJets, ScalarField, WeylPair};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{self, inverse3, Inertia, Matrix};
use crate::scalar::Scalar;

pub type Array3<T> = [[[T; 3]; 3]; 3];

fn arr3<T>(f: impl Fn(usize, usize, usize) -> T) -> Array3<T> {
    core::array::from_fn(|i| core::array::from_fn(|j| core::array::from_fn(|k| f(i, j, k))))
}

fn arr2<T>(f: impl Fn(usize, usize) -> T) -> [[T; 3]; 3] {
    core::array::from_fn(|i| core::array::from_fn(|j| f(i, j)))
}

fn values2<S: Scalar>(m: &[[Jet<S>; 3]; 3]) -> [[S; 3]; 3] {
    arr2(|i, j| m[i][j].value().clone())
}

/// Christoffel-type symbols `Γ[ρ][λ][μ] = Γ^ρ_{λμ}` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionAtPoint<S> {
    pub gamma: Array3<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureAtPoint<S> {
    /// `riemann[ρ][σ][μ][ν] = R^ρ_{σμν}`.
    pub riemann: [Array3<S>; 3],
    pub ricci: [[S; 3]; 3],
    pub ricci_sym: [[S; 3]; 3],
    pub ricci_anti: [[S; 3]; 3],
    pub scalar: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EwResidual<S> {
    pub e: [[S; 3]; 3],
    pub max_abs: S,
    /// `g^{μν} E_{μν}`, zero by construction.
    pub trace: S,
}

/// Largest absolute value, compared through `f64` magnitudes.
pub fn max_abs<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    let mut best = S::zero();
    for v in values {
        let a = v.abs();
        if a.to_f64() > best.to_f64() || (best.is_zero() && !a.is_zero()) {
            best = a;
        }
    }
    best
}

fn lc_from_jets<S: Scalar>(
    g: &[[Jet<S>; 3]; 3],
    ginv: &[[Jet<S>; 3]; 3],
) -> Result<Array3<Jet<S>>> {
    let mut dg: Vec<[[Jet<S>; 3]; 3]> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut m: Vec<Jet<S>> = Vec::with_capacity(9);
        for row in g {
            for e in row {
                m.push(e.d(k)?);
            }
        }
        dg.push(arr2(|i, j| m[3 * i + j].clone()));
    }
    let half = S::from_ratio(1, 2);
    Ok(arr3(|r, l, m| {
        let mut acc: Option<Jet<S>> = None;
        for s in 0..3 {
            let t = &ginv[r][s] * &(&(&dg[l][s][m] + &dg[m][s][l]) - &dg[s][l][m]);
            acc = Some(match acc {
                None => t,
                Some(a) => a + t,
            });
        }
        acc.expect("three terms").scale(&half)
    }))
}

fn weyl_from_lc<S: Scalar>(
    lc: &Array3<Jet<S>>,
    g: &[[Jet<S>; 3]; 3],
    ginv: &[[Jet<S>; 3]; 3],
    a: &[Jet<S>; 3],
) -> Array3<Jet<S>> {
    let a_up: [Jet<S>; 3] = core::array::from_fn(|r| {
        &(&(&ginv[r][0] * &a[0]) + &(&ginv[r][1] * &a[1])) + &(&ginv[r][2] * &a[2])
    });
    arr3(|r, l, m| {
        let mut t = &lc[r][l][m] + &(&g[l][m] * &a_up[r]);
        if r == m {
            t = &t - &a[l];
        }
        if r == l {
            t = &t - &a[m];
        }
        t
    })
}

fn riemann_from_jets<S: Scalar>(gamma: &Array3<Jet<S>>) -> Result<[Array3<Jet<S>>; 3]> {
    // dgamma[k][r][l][m] = ∂_k Γ^r_{lm}
    let mut dgamma: Vec<Array3<Jet<S>>> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut flat = Vec::with_capacity(27);
        for r in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    flat.push(gamma[r][l][m].d(k)?);
                }
            }
        }
        dgamma.push(arr3(|r, l, m| flat[9 * r + 3 * l + m].clone()));
    }
    Ok(core::array::from_fn(|r| {
        arr3(|s, m, n| {
            let mut t = &dgamma[m][r][n][s] - &dgamma[n][r][m][s];
            for l in 0..3 {
                t = &t
                    + &(&(&gamma[r][m][l] * &gamma[l][n][s])
                        - &(&gamma[r][n][l] * &gamma[l][m][s]));
            }
            t
        })
    }))
}

fn ricci_from_riemann<S: Scalar>(riem: &[Array3<Jet<S>>; 3]) -> [[Jet<S>; 3]; 3] {
    arr2(|s, n| &(&riem[0][s][0][n] + &riem[1][s][1][n]) + &riem[2][s][2][n])
}

fn contract<S: Scalar>(ginv: &[[Jet<S>; 3]; 3], t: &[[Jet<S>; 3]; 3]) -> Jet<S> {
    let mut acc = &ginv[0][0] * &t[0][0];
    for i in 0..3 {
        for j in 0..3 {
            if i + j > 0 {
                acc = &acc + &(&ginv[i][j] * &t[i][j]);
            }
        }
    }
    acc
}

struct Geometry<S: Scalar> {
    ginv: [[Jet<S>; 3]; 3],
    gamma: Array3<Jet<S>>,
}

fn geometry<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3], order: usize) -> Result<Geometry<S>> {
    let PairJets { g, a } = pair.jets_at(point, order)?;
    let ginv = inverse3(&g)?;
    let lc = lc_from_jets(&g, &ginv)?;
    let gamma = weyl_from_lc(&lc, &g, &ginv, &a);
    Ok(Geometry { ginv, gamma })
}

/// Apply a gauge transformation `ĝ = e^{2φ} g`, `Â = A + dφ`.
pub fn gauge_transform<S: Scalar>(pair: &WeylPair<S>, phi: ScalarField<S>) -> WeylPair<S> {
    let base = pair.clone();
    let name = format!("{} (gauge)", pair.name());
    WeylPair::new(name, move |c| {
        let mut out = base.eval(c)?;
        let (phi_jet, dphi) = lifted_with_gradient(&phi, c)?;
        let factor = phi_jet.scale(&S::from_i64(2)).exp()?;
        scale_metric(&mut out, &factor);
        for (a, d) in out.a.iter_mut().zip(dphi) {
            *a = &*a + &d;
        }
        Ok(out)
    })
}

/// The same gauge transformation written through `ψ = e^φ`:
/// `ĝ = ψ² g`, `Â = A + dψ / ψ`. Stays rational when `ψ` is.
pub fn gauge_transform_factor<S: Scalar>(pair: &WeylPair<S>, psi: ScalarField<S>) -> WeylPair<S> {
    let base = pair.clone();
    let name = format!("{} (gauge factor)", pair.name());
    WeylPair::new(name, move |c| {
        let mut out = base.eval(c)?;
        let (psi_jet, dpsi) = lifted_with_gradient(&psi, c)?;
        let inv = psi_jet.recip()?;
        scale_metric(&mut out, &(&psi_jet * &psi_jet));
        for (a, d) in out.a.iter_mut().zip(dpsi) {
            *a = &*a + &(&d * &inv);
        }
        Ok(out)
    })
}

fn scale_metric<S: Scalar>(out: &mut PairJets<S>, factor: &Jet<S>) {
    for row in out.g.iter_mut() {
        for e in row.iter_mut() {
            *e = &*e * factor;
        }
    }
}

/// Evaluate a field one order above the coordinate jets so that its gradient
/// keeps their order.
fn lifted_with_gradient<S: Scalar>(
    f: &ScalarField<S>,
    c: &[Jet<S>; 3],
) -> Result<(Jet<S>, [Jet<S>; 3])> {
    let order = c[0].order();
    let hi = JetSpace::new(3, order + 1);
    let point: [S; 3] = core::array::from_fn(|i| c[i].value().clone());
    let coords = coordinate_jets(&hi, &point);
    let v = f.eval(&coords)?;
    let grad = [v.d(0)?, v.d(1)?, v.d(2)?];
    Ok((v.truncate(order), grad))
}

/// Levi-Civita connection of the metric of `pair` at `point`.
pub fn levi_civita<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<ConnectionAtPoint<S>> {
    let PairJets { g, .. } = pair.jets_at(point, 1)?;
    let ginv = inverse3(&g)?;
    let lc = lc_from_jets(&g, &ginv)?;
    Ok(ConnectionAtPoint {
        gamma: arr3(|r, l, m| lc[r][l][m].value().clone()),
    })
}

/// Weyl connection from the closed form.
pub fn weyl_connection<S: Scalar>(
    pair: &WeylPair<S>,
    point: &[S; 3],
) -> Result<ConnectionAtPoint<S>> {
    let geo = geometry(pair, point, 1)?;
    Ok(ConnectionAtPoint {
        gamma: arr3(|r, l, m| geo.gamma[r][l][m].value().clone()),
    })
}

const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn sym_slot(l: usize, m: usize) -> usize {
    let (a, b) = if l <= m { (l, m) } else { (m, l) };
    SYM_PAIRS
        .iter()
        .position(|&p| p == (a, b))
        .expect("symmetric pair")
}

/// Weyl connection obtained by solving the 18 equations
/// `Γ^ρ_{λμ} g_{ρν} + Γ^ρ_{λν} g_{μρ} = ∂_λ g_{μν} − 2 A_λ g_{μν}`
/// for the 18 symmetric unknowns `Γ^ρ_{(λμ)}`.
pub fn weyl_connection_linear<S: Scalar>(
    pair: &WeylPair<S>,
    point: &[S; 3],
    tol: f64,
) -> Result<ConnectionAtPoint<S>> {
    let PairJets { g, a } = pair.jets_at(point, 1)?;
    let gv = values2(&g);
    let unknown = |r: usize, l: usize, m: usize| 6 * r + sym_slot(l, m);
    let mut rows: Matrix<S> = Vec::with_capacity(18);
    let mut rhs = Vec::with_capacity(18);
    for l in 0..3 {
        for &(m, n) in &SYM_PAIRS {
            let mut row = alloc::vec![S::zero(); 18];
            for r in 0..3 {
                row[unknown(r, l, m)] += gv[r][n].clone();
                row[unknown(r, l, n)] += gv[m][r].clone();
            }
            rows.push(row);
            let dg = g[m][n].d(l)?.value().clone();
            rhs.push(dg - S::from_i64(2) * a[l].value().clone() * gv[m][n].clone());
        }
    }
    let sol = linalg::solve(&rows, &rhs, tol)
        .map_err(|_| Error::Consistency("connection system is rank deficient".into()))?;
    Ok(ConnectionAtPoint {
        gamma: arr3(|r, l, m| sol[unknown(r, l, m)].clone()),
    })
}

/// `∇_λ g_{μν} − 2 A_λ g_{μν}` and the torsion `Γ^ρ_{λμ} − Γ^ρ_{μλ}`, as one list.
pub fn connection_defect<S: Scalar>(
    pair: &WeylPair<S>,
    point: &[S; 3],
    conn: &ConnectionAtPoint<S>,
) -> Result<Vec<S>> {
    let PairJets { g, a } = pair.jets_at(point, 1)?;
    let gv = values2(&g);
    let gam = &conn.gamma;
    let mut out = Vec::with_capacity(54);
    for l in 0..3 {
        for m in 0..3 {
            for n in 0..3 {
                let mut v = g[m][n].d(l)?.value().clone();
                for r in 0..3 {
                    v -= gam[r][l][m].clone() * gv[r][n].clone();
                    v -= gam[r][l][n].clone() * gv[m][r].clone();
                }
                v -= S::from_i64(2) * a[l].value().clone() * gv[m][n].clone();
                out.push(v);
            }
        }
    }
    for r in 0..3 {
        for l in 0..3 {
            for m in 0..3 {
                out.push(gam[r][l][m].clone() - gam[r][m][l].clone());
            }
        }
    }
    Ok(out)
}

pub fn curvature<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<CurvatureAtPoint<S>> {
    let geo = geometry(pair, point, 2)?;
    let riem = riemann_from_jets(&geo.gamma)?;
    let ric = ricci_from_riemann(&riem);
    let ginv = values2(&geo.ginv);
    let ricci = values2(&ric);
    let mut scalar = S::zero();
    for i in 0..3 {
        for j in 0..3 {
            scalar.mul_add_assign(&ginv[i][j], &ricci[i][j]);
        }
    }
    let half = S::from_ratio(1, 2);
    Ok(CurvatureAtPoint {
        riemann: core::array::from_fn(|r| arr3(|s, m, n| riem[r][s][m][n].value().clone())),
        ricci_sym: arr2(|i, j| (ricci[i][j].clone() + ricci[j][i].clone()) * half.clone()),
        ricci_anti: arr2(|i, j| (ricci[i][j].clone() - ricci[j][i].clone()) * half.clone()),
        ricci,
        scalar,
    })
}

/// `E_{μν} = R_{(μν)} − (R/3) g_{μν}`.
pub fn ew_residual<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<EwResidual<S>> {
    let curv = curvature(pair, point)?;
    let PairJets { g, .. } = pair.jets_at(point, 0)?;
    let gv = values2(&g);
    let ginv = linalg::inverse(&gv.iter().map(|r| r.to_vec()).collect(), 0.0)
        .map_err(|_| Error::Degenerate("metric is degenerate at the point".into()))?;
    let third = curv.scalar.clone() * S::from_ratio(1, 3);
    let e = arr2(|i, j| curv.ricci_sym[i][j].clone() - third.clone() * gv[i][j].clone());
    let mut trace = S::zero();
    for i in 0..3 {
        for j in 0..3 {
            trace.mul_add_assign(&ginv[i][j], &e[i][j]);
        }
    }
    Ok(EwResidual {
        max_abs: max_abs(e.iter().flatten()),
        e,
        trace,
    })
}

/// `F_{μν} = ∂_μ A_ν − ∂_ν A_μ`.
pub fn maxwell_form<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<[[S; 3]; 3]> {
    let PairJets { a, .. } = pair.jets_at(point, 1)?;
    let mut da = [
        [S::zero(), S::zero(), S::zero()],
        [S::zero(), S::zero(), S::zero()],
        [S::zero(), S::zero(), S::zero()],
    ];
    for (m, row) in da.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            *slot = a[n].d(m)?.value().clone();
        }
    }
    Ok(arr2(|m, n| da[m][n].clone() - da[n][m].clone()))
}

/// `max |R_{[μν]} + (3/2) F_{μν}|`.
pub fn bianchi_check<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<S> {
    let curv = curvature(pair, point)?;
    let f = maxwell_form(pair, point)?;
    let three_halves = S::from_ratio(3, 2);
    let res: Vec<S> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| curv.ricci_anti[i][j].clone() + three_halves.clone() * f[i][j].clone())
        .collect();
    Ok(max_abs(res.iter()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CottonAtPoint<S> {
    /// `tensor[μ][ν][λ] = C_{μνλ} = ∇_λ P_{μν} − ∇_ν P_{μλ}`.
    pub tensor: Array3<S>,
    /// `Y^1_1, Y^1_2, Y^1_3, Y^2_2, Y^2_3` of `Y^μ_ν = ½ ε^{μαβ} C_{ναβ}`,
    /// with `ε` the permutation symbol.
    pub components: [S; 5],
}

impl<S: Scalar> CottonAtPoint<S> {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.tensor.iter().flatten().flatten().all(|v| {
            v.is_zero()
                || (S::MODE == crate::scalar::CoefficientMode::Float64 && v.to_f64().abs() <= tol)
        })
    }
}

fn permutation_sign(i: usize, j: usize, k: usize) -> i64 {
    if i == j || j == k || i == k {
        0
    } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
        1
    } else {
        -1
    }
}

/// Cotton tensor of the conformal class of the metric of `pair`.
pub fn cotton<S: Scalar>(pair: &WeylPair<S>, point: &[S; 3]) -> Result<CottonAtPoint<S>> {
    let PairJets { g, .. } = pair.jets_at(point, 3)?;
    let ginv = inverse3(&g)?;
    let lc = lc_from_jets(&g, &ginv)?;
    let riem = riemann_from_jets(&lc)?;
    let ric = ricci_from_riemann(&riem);
    let r = contract(&ginv, &ric);
    let quarter_r = r.scale(&S::from_ratio(1, 4));
    let p: [[Jet<S>; 3]; 3] = arr2(|i, j| &ric[i][j] - &(&g[i][j] * &quarter_r));
    let mut dp: Vec<[[S; 3]; 3]> = Vec::with_capacity(3);
    for l in 0..3 {
        let mut m = Vec::with_capacity(9);
        for row in &p {
            for e in row {
                m.push(e.d(l)?.value().clone());
            }
        }
        dp.push(arr2(|i, j| m[3 * i + j].clone()));
    }
    let pv = values2(&p);
    let gam = arr3(|a, b, c| lc[a][b][c].value().clone());
    let nabla = |l: usize, m: usize, n: usize| {
        let mut v = dp[l][m][n].clone();
        for r in 0..3 {
            v -= gam[r][l][m].clone() * pv[r][n].clone();
            v -= gam[r][l][n].clone() * pv[m][r].clone();
        }
        v
    };
    let tensor = arr3(|m, n, l| nabla(l, m, n) - nabla(n, m, l));
    let york = |mu: usize, nu: usize| {
        let mut v = S::zero();
        for a in 0..3 {
            for b in 0..3 {
                let s = permutation_sign(mu, a, b);
                if s != 0 {
                    v += S::from_i64(s) * tensor[nu][a][b].clone();
                }
            }
        }
        v * S::from_ratio(1, 2)
    };
    Ok(CottonAtPoint {
        components: [york(0, 0), york(0, 1), york(0, 2), york(1, 1), york(1, 2)],
        tensor,
    })
}

/// Inertia `(n_plus, n_minus)` of the metric at `point`.
pub fn signature<S: Scalar>(
    pair: &WeylPair<S>,
    point: &[S; 3],
    tol: f64,
) -> Result<(usize, usize)> {
    let PairJets { g, .. } = pair.jets_at(point, 0)?;
    let m: Matrix<S> = values2(&g).iter().map(|r| r.to_vec()).collect();
    let Inertia {
        positive,
        negative,
        zero,
    } = linalg::inertia(&m, tol);
    if zero > 0 {
        return Err(Error::Degenerate(
            "metric is degenerate at the point".into(),
        ));
    }
    Ok((positive, negative))
}

/// Shared jet space for repeated evaluations at one order.
pub fn chart_space(order: usize) -> Arc<JetSpace> {
    JetSpace::new(3, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::scalar::Q;

    fn field(s: &str) -> ScalarField<Q> {
        ScalarField::from_expression(Expression::parse(s, &["x", "y", "z"]).unwrap())
    }

    fn pair(g: [&str; 6], a: [&str; 3]) -> WeylPair<Q> {
        WeylPair::from_components("t", g.map(field), a.map(field))
    }

    fn flat() -> WeylPair<Q> {
        pair(["1", "0", "0", "1", "0", "-1"], ["0", "0", "0"])
    }

    fn pt(a: i64, b: i64, c: i64) -> [Q; 3] {
        [Q::from(a), Q::from(b), Q::from(c)]
    }

    #[test]
    fn flat_pair_is_trivial() {
        let w = flat();
        let p = pt(1, 2, 3);
        let c = levi_civita(&w, &p).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(Q::is_zero));
        let curv = curvature(&w, &p).unwrap();
        assert!(curv.ricci.iter().flatten().all(Q::is_zero));
        assert!(ew_residual(&w, &p).unwrap().max_abs.is_zero());
        assert!(bianchi_check(&w, &p).unwrap().is_zero());
        assert!(cotton(&w, &p).unwrap().is_zero(0.0));
        assert_eq!(signature(&w, &p, 0.0).unwrap(), (2, 1));
        let neg = pair(["-1", "0", "0", "-1", "0", "-1"], ["0", "0", "0"]);
        assert_eq!(signature(&neg, &p, 0.0).unwrap(), (0, 3));
    }

    #[test]
    fn polar_like_metric() {
        let w = pair(["1", "0", "0", "x^2", "0", "-1"], ["0", "0", "0"]);
        let p = pt(2, 1, 1);
        let c = levi_civita(&w, &p).unwrap();
        assert_eq!(c.gamma[1][0][1], Q::new(1, 2));
        assert_eq!(c.gamma[0][1][1], Q::from(-2));
        let curv = curvature(&w, &p).unwrap();
        assert!(curv.scalar.is_zero());
        assert!(curv
            .riemann
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(Q::is_zero));
    }

    #[test]
    fn connection_routes_agree() {
        let w = pair(
            ["1 + y^2", "x", "0", "2 + x*z", "y", "-1 - x^2"],
            ["x*y", "z", "1 - x"],
        );
        let p = pt(1, 2, -1);
        let closed = weyl_connection(&w, &p).unwrap();
        let linear = weyl_connection_linear(&w, &p, 0.0).unwrap();
        assert_eq!(closed, linear);
        assert!(connection_defect(&w, &p, &closed)
            .unwrap()
            .iter()
            .all(Q::is_zero));
        let zero_a = pair(
            ["1 + y^2", "x", "0", "2 + x*z", "y", "-1 - x^2"],
            ["0", "0", "0"],
        );
        assert_eq!(
            weyl_connection(&zero_a, &p).unwrap(),
            levi_civita(&zero_a, &p).unwrap()
        );
        let constant_a = pair(["1", "0", "0", "1", "0", "-1"], ["1", "0", "0"]);
        let c = weyl_connection(&constant_a, &p).unwrap();
        assert!(connection_defect(&constant_a, &p, &c)
            .unwrap()
            .iter()
            .all(Q::is_zero));
    }

    #[test]
    fn bianchi_identity_on_arbitrary_pair() {
        let w = pair(
            ["2 + x*y", "z", "x", "1 + z^2", "0", "-3 + y"],
            ["y^2", "x*z", "x - y"],
        );
        let p = pt(1, -1, 2);
        assert!(bianchi_check(&w, &p).unwrap().is_zero());
        let r = ew_residual(&w, &p).unwrap();
        assert!(!r.max_abs.is_zero());
        assert!(r.trace.is_zero());
        let curv = curvature(&w, &p).unwrap();
        for rho in 0..3 {
            for s in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        assert_eq!(
                            curv.riemann[rho][s][m][n],
                            -curv.riemann[rho][s][n][m].clone()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn maxwell_examples() {
        let w = pair(["1", "0", "0", "1", "0", "-1"], ["0", "x", "0"]);
        let f = maxwell_form(&w, &pt(3, 1, 1)).unwrap();
        assert_eq!(f[0][1], Q::one());
        assert_eq!(f[1][0], -Q::one());
        let exact = pair(["1", "0", "0", "1", "0", "-1"], ["y*z", "x*z", "x*y"]);
        assert!(maxwell_form(&exact, &pt(3, 1, 2))
            .unwrap()
            .iter()
            .flatten()
            .all(Q::is_zero));
    }

    #[test]
    fn cotton_is_conformally_invariant() {
        let w = pair(
            ["1 + y^2", "x", "0", "2 + x*z", "y", "-1 - x^2"],
            ["0", "0", "0"],
        );
        let p = pt(1, 2, -1);
        let c0 = cotton(&w, &p).unwrap();
        assert!(!c0.is_zero(0.0));
        let scaled = gauge_transform_factor(&w, field("1 + x*y + z^2"));
        assert_eq!(cotton(&scaled, &p).unwrap(), c0);
    }

    #[test]
    fn gauge_in_exact_mode() {
        let w = flat();
        let p = pt(1, 2, 3);
        let same = gauge_transform(&w, field("0"));
        let j0 = w.jets_at(&p, 2).unwrap();
        let j1 = same.jets_at(&p, 2).unwrap();
        assert_eq!(j0.g, j1.g);
        assert!(matches!(
            gauge_transform(&w, field("x*y")).jets_at(&p, 2),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn float_gauge_scales_metric() {
        let vars = ["x", "y", "z"];
        let ff =
            |s: &str| ScalarField::<f64>::from_expression(Expression::parse(s, &vars).unwrap());
        let w = WeylPair::from_components(
            "flat",
            ["1", "0", "0", "1", "0", "-1"].map(ff),
            ["0", "0", "0"].map(ff),
        );
        let c = 0.3f64;
        let g = gauge_transform(&w, ScalarField::constant(3, c));
        let j = g.jets_at(&[1.0, 2.0, 3.0], 2).unwrap();
        assert!((j.g[0][0].value() - libm::exp(2.0 * c)).abs() < 1e-14);
        assert!(j.a.iter().all(|a| a.value().abs() < 1e-15));
    }
}
