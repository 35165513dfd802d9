//! Verification suites: build the objects a config describes, sample points,
//! and evaluate the requested checks.

use std::time::Instant;

use anyhow::{anyhow, Result};
use weylforge_core::bridge::{assertion_check, UnivariatePdeRhs};
use weylforge_core::coframe::{descent_check, leaf_pair};
use weylforge_core::families::{
    conic_rhs, f_hyperbolic, f_thm1, f_thm3, weyl_hyperbolic, weyl_hyperbolic_repaired, weyl_thm1,
    weyl_thm3, weyl_thm3_repaired,
};
use weylforge_core::invariants::{
    cartan_c, k_invariant, monge, pde_total_d, wunschmann, OdeRhs, PdeRhs,
};
use weylforge_core::scalar::{negligible, render};
use weylforge_core::weyl::{bianchi_check, cotton, ew_residual, max_abs, maxwell_form, signature};
use weylforge_core::{Error, Scalar, WeylPair, Q};

use crate::config::{Check, Family, Mode, PairForm, RunConfig};
use crate::report::{CheckReport, Rejection, Report, SampleRecord, Status, SCHEMA};
use crate::sampling::Sampler;

/// The objects a family provides; checks needing an absent one are skipped.
pub struct Subject<S: Scalar> {
    pub pde: Option<PdeRhs<S>>,
    pub pair: Option<WeylPair<S>>,
    pub ode: Option<OdeRhs<S>>,
    pub univariate: Option<UnivariatePdeRhs>,
    /// Whether `dA` and Cotton are expected to vanish identically.
    pub expects_flat: bool,
    /// Section `p` of a pushdown pair, used to screen ill-conditioned leaves.
    pub section: Option<S>,
}

/// Float-mode pushdown pairs divide by powers of `F_pp`. Leaves where
/// `(1 + |F|) / |F_pp|` exceeds this on the section lose most significant
/// digits and are rejected.
pub const FLOAT_CONDITION_LIMIT: f64 = 1e5;

/// Reject a leaf whose float pushdown would be ill-conditioned.
pub fn screen_leaf<S: Scalar>(f: &PdeRhs<S>, leaf: &[S; 3], p0: &S) -> weylforge_core::Result<()> {
    let j = f.jets(
        &[
            leaf[0].clone(),
            leaf[1].clone(),
            leaf[2].clone(),
            p0.clone(),
        ],
        2,
    )?;
    let fpp = j.p_derivative(2)?.value().to_f64();
    let cond = (1.0 + j.f().value().to_f64().abs()) / fpp.abs();
    if cond > FLOAT_CONDITION_LIMIT {
        return Err(Error::Degenerate(format!(
            "pushdown condition number {cond:.1e} on the section"
        )));
    }
    Ok(())
}

pub fn build<S: Scalar>(cfg: &RunConfig) -> Result<Subject<S>> {
    let section: S = S::from_q(&cfg.section_p.parse::<Q>().map_err(|e| anyhow!("{e}"))?);
    let pushdown = |f: &PdeRhs<S>| leaf_pair(f, section.clone());
    let mut s = Subject {
        pde: None,
        pair: None,
        ode: None,
        univariate: None,
        expects_flat: false,
        section: None,
    };
    if cfg.pair == PairForm::Pushdown || cfg.family == Family::Conic {
        s.section = Some(section.clone());
    }
    match cfg.family {
        Family::Thm1 => {
            let p = cfg.thm1()?;
            let f = f_thm1::<S>(&p);
            s.pair = Some(match cfg.pair {
                PairForm::Pushdown => pushdown(&f),
                _ => weyl_thm1(&p),
            });
            s.pde = Some(f);
        }
        Family::Thm3 => {
            let p = cfg.thm3()?;
            let f = f_thm3::<S>(&p);
            s.pair = Some(match cfg.pair {
                PairForm::Displayed => weyl_thm3(&p),
                PairForm::Repaired => weyl_thm3_repaired(&p),
                PairForm::Pushdown => pushdown(&f),
            });
            s.pde = Some(f);
        }
        Family::HyperbolicCase1 | Family::HyperbolicCase2 | Family::HyperbolicCase3 => {
            let p = cfg.hyperbolic()?;
            let f = f_hyperbolic::<S>(&p, cfg.branch.into());
            s.pair = Some(match cfg.pair {
                PairForm::Displayed => weyl_hyperbolic(&p)?,
                PairForm::Repaired => weyl_hyperbolic_repaired(&p)?,
                PairForm::Pushdown => pushdown(&f),
            });
            s.expects_flat = p.expects_flat();
            s.pde = Some(f);
        }
        Family::Conic => {
            let f = conic_rhs::<S>(&cfg.conic()?, cfg.branch.into());
            s.pair = Some(pushdown(&f));
            s.pde = Some(f);
        }
        Family::RawF => {
            let text = cfg.raw("F")?;
            let f = PdeRhs::<S>::parse(&text)
                .map_err(|e| anyhow!("config error at `parameters.F`: {e}"))?;
            if cfg.pair == PairForm::Pushdown {
                s.pair = Some(pushdown(&f));
            }
            s.univariate = UnivariatePdeRhs::parse(&text).ok();
            s.pde = Some(f);
        }
        Family::RawH => {
            let text = cfg.raw("H")?;
            s.ode = Some(
                OdeRhs::parse(&text).map_err(|e| anyhow!("config error at `parameters.H`: {e}"))?,
            );
        }
    }
    Ok(s)
}

/// Outcome of one evaluation: rendered value and whether it meets the check.
type Eval = weylforge_core::Result<(String, bool)>;

enum LoopEnd {
    Done,
    Saturated,
    Fatal(Error),
}

struct Collected {
    samples: Vec<SampleRecord>,
    rejections: Vec<Rejection>,
    end: LoopEnd,
}

fn is_rejection(e: &Error) -> bool {
    matches!(
        e,
        Error::Singular(_) | Error::Degenerate(_) | Error::Branch(_) | Error::InvalidPushdown(_)
    )
}

fn collect<S: Scalar, const N: usize>(
    cfg: &RunConfig,
    sampler: &mut Sampler,
    mut eval: impl FnMut(&[S; N], &mut Sampler) -> Eval,
) -> Collected {
    let mut samples = Vec::new();
    let mut rejections = Vec::new();
    while samples.len() < cfg.sample_count {
        let pt: [S; N] = sampler.point();
        let point: Vec<String> = pt.iter().map(render).collect();
        match eval(&pt, sampler) {
            Ok((residual, ok)) => samples.push(SampleRecord {
                index: samples.len(),
                point,
                residual,
                ok,
            }),
            Err(e) if is_rejection(&e) => {
                rejections.push(Rejection {
                    point,
                    reason: e.to_string(),
                });
                if rejections.len() > cfg.max_rejections() {
                    return Collected {
                        samples,
                        rejections,
                        end: LoopEnd::Saturated,
                    };
                }
            }
            Err(e) => {
                return Collected {
                    samples,
                    rejections,
                    end: LoopEnd::Fatal(e),
                }
            }
        }
    }
    Collected {
        samples,
        rejections,
        end: LoopEnd::Done,
    }
}

/// How sample outcomes combine into a status.
#[derive(Clone, Copy)]
enum Rule {
    /// Every sample must be ok.
    All,
    /// At least one sample must be ok.
    Any,
}

fn finish(check: Check, c: Collected, rule: Rule) -> CheckReport {
    let (status, summary) = match &c.end {
        LoopEnd::Saturated => (
            Status::Fail,
            format!(
                "singular-locus saturation: {} rejected samples before {} valid ones",
                c.rejections.len(),
                c.samples.len()
            ),
        ),
        LoopEnd::Fatal(Error::Mode(m)) => (Status::Skipped, format!("needs float mode: {m}")),
        LoopEnd::Fatal(e) => (Status::Fail, format!("evaluation error: {e}")),
        LoopEnd::Done => {
            let good = c.samples.iter().filter(|s| s.ok).count();
            let pass = match rule {
                Rule::All => good == c.samples.len(),
                Rule::Any => good > 0,
            };
            let what = match rule {
                Rule::All => "samples meet the check",
                Rule::Any => "samples witness the property",
            };
            (
                if pass { Status::Pass } else { Status::Fail },
                format!("{good}/{} {what}", c.samples.len()),
            )
        }
    };
    CheckReport {
        check: check.name().into(),
        status,
        summary,
        samples: c.samples,
        rejections: c.rejections,
    }
}

fn skipped(check: Check, why: String) -> CheckReport {
    CheckReport {
        check: check.name().into(),
        status: Status::Skipped,
        summary: why,
        samples: Vec::new(),
        rejections: Vec::new(),
    }
}

fn zero_check<S: Scalar>(v: S, tol: f64) -> (String, bool) {
    let ok = negligible(&v, tol);
    (render(&v), ok)
}

pub fn run_check<S: Scalar>(
    cfg: &RunConfig,
    subject: &Subject<S>,
    check: Check,
    stream: u64,
) -> CheckReport {
    let tol = match cfg.mode {
        Mode::Exact => 0.0,
        Mode::Float => cfg.tolerance,
    };
    let mut sampler = Sampler::new(cfg.seed, stream);
    let na = |what: &str| {
        skipped(
            check,
            format!("family {} provides no {what}", cfg.family.name()),
        )
    };
    let flat = subject.expects_flat;
    match check {
        Check::Ew | Check::Bianchi | Check::Cotton | Check::Maxwell | Check::Signature => {
            let Some(pair) = &subject.pair else {
                return na("Weyl pair (set \"pair\": \"pushdown\")");
            };
            let rule = match check {
                Check::Cotton | Check::Maxwell if !flat => Rule::Any,
                _ => Rule::All,
            };
            let screen = |pt: &[S; 3]| match (&subject.section, &subject.pde, cfg.mode) {
                (Some(p0), Some(f), Mode::Float) => screen_leaf(f, pt, p0),
                _ => Ok(()),
            };
            let c = collect::<S, 3>(cfg, &mut sampler, |pt, _| {
                screen(pt)?;
                match check {
                    Check::Ew => Ok(zero_check(ew_residual(pair, pt)?.max_abs, tol)),
                    Check::Bianchi => Ok(zero_check(bianchi_check(pair, pt)?, tol)),
                    Check::Cotton => {
                        let t = cotton(pair, pt)?;
                        let m = max_abs(t.tensor.iter().flatten().flatten());
                        let zero = t.is_zero(tol);
                        Ok((render(&m), zero == flat))
                    }
                    Check::Maxwell => {
                        let f = maxwell_form(pair, pt)?;
                        let m = max_abs(f.iter().flatten());
                        let zero = negligible(&m, tol);
                        Ok((render(&m), zero == flat))
                    }
                    _ => {
                        let (p, n) = signature(pair, pt, tol)?;
                        Ok((format!("({p},{n})"), (p, n) == (2, 1)))
                    }
                }
            });
            finish(check, c, rule)
        }
        Check::ParaCr | Check::Monge | Check::K | Check::Descent => {
            let Some(f) = &subject.pde else {
                return na("PDE right-hand side");
            };
            if check == Check::Descent {
                let c = collect::<S, 3>(cfg, &mut sampler, |leaf, smp| {
                    let fibre: Vec<[S; 4]> = (0..3)
                        .map(|_| {
                            [
                                S::from_q(&smp.rational()),
                                S::from_q(&smp.nonzero()),
                                S::from_q(&smp.nonzero()),
                                S::from_q(&smp.rational()),
                            ]
                        })
                        .collect();
                    let r = descent_check(f, leaf, &fibre, tol)?;
                    Ok((
                        format!(
                            "conformal {} horizontal {}",
                            render(&r.conformal_defect),
                            render(&r.horizontal_defect)
                        ),
                        r.passed(),
                    ))
                });
                return finish(check, c, Rule::All);
            }
            let c = collect::<S, 4>(cfg, &mut sampler, |pt, _| match check {
                Check::ParaCr => {
                    let df = pde_total_d(f, pt)?;
                    let fpp = f.jets(pt, 2)?.p_derivative(2)?.value().clone();
                    if negligible(&fpp, tol) {
                        return Err(Error::Degenerate("F_pp vanishes at the point".into()));
                    }
                    Ok((
                        format!("DF {} F_pp {}", render(&df), render(&fpp)),
                        negligible(&df, tol),
                    ))
                }
                Check::Monge => Ok(zero_check(monge(f, pt)?.value, tol)),
                _ => Ok(zero_check(k_invariant(f, pt)?.value, tol)),
            });
            finish(check, c, Rule::All)
        }
        Check::Wunschmann | Check::Cartan => {
            let Some(h) = &subject.ode else {
                return na("ODE right-hand side");
            };
            let c = collect::<S, 4>(cfg, &mut sampler, |pt, _| match check {
                Check::Wunschmann => Ok(zero_check(wunschmann(h, pt)?.value, tol)),
                _ => Ok(zero_check(cartan_c(h, pt)?.value, tol)),
            });
            finish(check, c, Rule::All)
        }
        Check::Bridge => {
            let Some(u) = &subject.univariate else {
                return na("right-hand side depending on p alone");
            };
            let c = collect::<S, 4>(cfg, &mut sampler, |pt, _| {
                let r = assertion_check(u, std::slice::from_ref(pt), tol);
                match (r.samples.first(), r.skipped.into_iter().next()) {
                    (Some(s), _) => Ok((
                        format!("W {} Monge/F_tt^3 {}", render(&s.lhs), render(&s.rhs)),
                        r.passed,
                    )),
                    (None, Some((_, e))) => Err(e),
                    (None, None) => Err(Error::Consistency("no sample evaluated".into())),
                }
            });
            finish(check, c, Rule::All)
        }
    }
}

fn run_with<S: Scalar>(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let subject = build::<S>(cfg)?;
    Ok(cfg
        .checks
        .iter()
        .enumerate()
        .map(|(i, &check)| run_check(cfg, &subject, check, i as u64))
        .collect())
}

/// Run every requested check. Configuration and family-constraint errors are
/// returned before anything is evaluated.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let checks = match cfg.mode {
        Mode::Exact => run_with::<Q>(cfg)?,
        Mode::Float => run_with::<f64>(cfg)?,
    };
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(Report {
        schema: SCHEMA.into(),
        family: cfg.family.name().into(),
        mode: cfg.mode.to_string(),
        pair: serde_json::to_value(cfg.pair)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        seed: cfg.seed,
        sample_count: cfg.sample_count,
        tolerance: cfg.tolerance,
        checks,
        passed,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}
