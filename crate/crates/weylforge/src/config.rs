//! Run configuration, read from JSON.

use std::collections::BTreeMap;
use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use weylforge_core::families::{
    Branch, ConicArgument, ConicCoefficients, HyperbolicCase, HyperbolicParams, Thm1Params,
    Thm3Params, THM3_NAMES,
};
use weylforge_core::FreeFunction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm3")]
    Thm3,
    #[serde(rename = "hyperbolic-case1")]
    HyperbolicCase1,
    #[serde(rename = "hyperbolic-case2")]
    HyperbolicCase2,
    #[serde(rename = "hyperbolic-case3")]
    HyperbolicCase3,
    #[serde(rename = "conic")]
    Conic,
    #[serde(rename = "raw-F")]
    RawF,
    #[serde(rename = "raw-H")]
    RawH,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Thm1 => "thm1",
            Family::Thm3 => "thm3",
            Family::HyperbolicCase1 => "hyperbolic-case1",
            Family::HyperbolicCase2 => "hyperbolic-case2",
            Family::HyperbolicCase3 => "hyperbolic-case3",
            Family::Conic => "conic",
            Family::RawF => "raw-F",
            Family::RawH => "raw-H",
        }
    }

    /// Parameter names this family reads, required unless listed in
    /// [`Family::optional_parameters`].
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Family::Thm1 => &["b", "c", "k", "l", "m"],
            Family::Thm3 => &THM3_NAMES,
            Family::HyperbolicCase1 | Family::HyperbolicCase3 => &["a", "b", "c", "k", "l", "m"],
            Family::HyperbolicCase2 => &["a", "b", "c", "k", "l", "m", "e"],
            Family::Conic => &["a", "b", "c", "k", "l", "m"],
            Family::RawF => &["F"],
            Family::RawH => &["H"],
        }
    }

    pub fn optional_parameters(self) -> &'static [&'static str] {
        match self {
            Family::HyperbolicCase2 => &["e"],
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ParaCr,
    Monge,
    K,
    Wunschmann,
    Cartan,
    Ew,
    Bianchi,
    Cotton,
    Maxwell,
    Signature,
    Descent,
    Bridge,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::ParaCr => "para-cr",
            Check::Monge => "monge",
            Check::K => "k",
            Check::Wunschmann => "wunschmann",
            Check::Cartan => "cartan",
            Check::Ew => "ew",
            Check::Bianchi => "bianchi",
            Check::Cotton => "cotton",
            Check::Maxwell => "maxwell",
            Check::Signature => "signature",
            Check::Descent => "descent",
            Check::Bridge => "bridge",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| anyhow!("unknown check `{s}`"))
    }
}

/// Which `(g, A)` a family's pair checks run on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairForm {
    /// The closed-form pair as written for the family.
    #[default]
    Displayed,
    /// The closed-form pair with its 1-form corrected to the pushed-down class.
    Repaired,
    /// The pair pushed down from the family's `F` through the coframe.
    Pushdown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    #[default]
    Plus,
    Minus,
}

impl From<BranchChoice> for Branch {
    fn from(b: BranchChoice) -> Self {
        match b {
            BranchChoice::Plus => Branch::Plus,
            BranchChoice::Minus => Branch::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArgumentChoice {
    /// `s = z − x p`.
    #[default]
    Shifted,
    /// `s = p`.
    Plain,
}

fn default_samples() -> usize {
    25
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_section() -> String {
    "1/7".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    pub family: Family,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Absolute tolerance; float mode only.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub checks: Vec<Check>,
    /// Rejected samples allowed per check before the run gives up;
    /// defaults to `20 · sample_count`.
    #[serde(default)]
    pub max_rejections: Option<usize>,
    #[serde(default)]
    pub pair: PairForm,
    /// Root of the quadratic for `conic` and `hyperbolic-case2`.
    #[serde(default)]
    pub branch: BranchChoice,
    /// Conic argument for the `conic` family.
    #[serde(default)]
    pub argument: ArgumentChoice,
    /// Value of `p` on the section used by `pair = pushdown`.
    #[serde(default = "default_section")]
    pub section_p: String,
}

impl RunConfig {
    /// Parse JSON, reporting the path of the offending field on error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("config error at `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn max_rejections(&self) -> usize {
        self.max_rejections.unwrap_or(20 * self.sample_count.max(1))
    }

    fn validate(&self) -> Result<()> {
        if self.checks.is_empty() {
            bail!("config error at `checks`: no checks requested");
        }
        if !(self.tolerance >= 0.0) {
            bail!("config error at `tolerance`: must be a non-negative number");
        }
        let known = self.family.parameters();
        for name in self.parameters.keys() {
            if !known.contains(&name.as_str()) {
                bail!(
                    "config error at `parameters.{name}`: family {} has parameters {:?}",
                    self.family.name(),
                    known
                );
            }
        }
        for name in known {
            if !self.parameters.contains_key(*name)
                && !self.family.optional_parameters().contains(name)
            {
                bail!("config error at `parameters.{name}`: missing");
            }
        }
        self.section_p
            .parse::<weylforge_core::Q>()
            .map_err(|e| anyhow!("config error at `section_p`: {e}"))?;
        Ok(())
    }

    fn param(&self, name: &str) -> Result<FreeFunction> {
        let text = self.parameters.get(name).map(String::as_str).unwrap_or("1");
        let f: FreeFunction = text
            .parse()
            .map_err(|e| anyhow!("config error at `parameters.{name}`: {e}"))?;
        if self.mode == Mode::Exact && f.is_transcendental() {
            bail!("config error at `parameters.{name}`: transcendental functions need float mode");
        }
        Ok(f)
    }

    pub fn thm1(&self) -> Result<Thm1Params> {
        Ok(Thm1Params {
            b: self.param("b")?,
            c: self.param("c")?,
            k: self.param("k")?,
            l: self.param("l")?,
            m: self.param("m")?,
        })
    }

    pub fn thm3(&self) -> Result<Thm3Params> {
        let mut fs = Vec::with_capacity(9);
        for n in THM3_NAMES {
            fs.push(self.param(n)?);
        }
        Ok(Thm3Params::from_array(
            fs.try_into().map_err(|_| anyhow!("nine functions"))?,
        ))
    }

    pub fn hyperbolic(&self) -> Result<HyperbolicParams> {
        let case = match self.family {
            Family::HyperbolicCase1 => HyperbolicCase::KlEqual,
            Family::HyperbolicCase2 => HyperbolicCase::Constrained,
            Family::HyperbolicCase3 => HyperbolicCase::PBased,
            _ => bail!("not a hyperbolic family"),
        };
        let p = HyperbolicParams {
            a: self.param("a")?,
            b: self.param("b")?,
            c: self.param("c")?,
            k: self.param("k")?,
            l: self.param("l")?,
            m: self.param("m")?,
            e: self.param("e")?,
            case,
        };
        p.validate()
            .with_context(|| format!("family constraint violated for {}", self.family.name()))?;
        Ok(p)
    }

    pub fn conic(&self) -> Result<ConicCoefficients> {
        Ok(ConicCoefficients {
            a: self.param("a")?,
            b: self.param("b")?,
            c: self.param("c")?,
            k: self.param("k")?,
            l: self.param("l")?,
            m: self.param("m")?,
            argument: match self.argument {
                ArgumentChoice::Shifted => ConicArgument::Shifted,
                ArgumentChoice::Plain => ConicArgument::Plain,
            },
        })
    }

    pub fn raw(&self, name: &str) -> Result<String> {
        let text = self.parameters.get(name).cloned().unwrap_or_default();
        if self.mode == Mode::Exact {
            let vars = match name {
                "F" => weylforge_core::invariants::PDE_VARIABLES,
                _ => weylforge_core::invariants::ODE_VARIABLES,
            };
            let e = weylforge_core::Expression::parse(&text, &vars)
                .map_err(|e| anyhow!("config error at `parameters.{name}`: {e}"))?;
            if e.is_transcendental() {
                bail!(
                    "config error at `parameters.{name}`: transcendental functions need float mode"
                );
            }
        }
        Ok(text)
    }
}
