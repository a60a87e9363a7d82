//! Scenario configuration: one TOML file per run.

use std::path::{Path, PathBuf};

use clebsch::clebsch::systems::ModelPotential;
use clebsch::integrators::StepperSpec;
use clebsch::lie::Group;
use clebsch::ymh::SmoothData;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Finite,
    Extended,
    Ymh,
    Gr,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Finite => "finite",
            Backend::Extended => "extended",
            Backend::Ymh => "ymh",
            Backend::Gr => "gr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Group>,
    pub horizon: f64,
    pub integrator: StepperSpec,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite: Option<FiniteConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ymh: Option<YmhConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gr: Option<GrConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Run directory. `CLEBSCH_OUTPUT_DIR` overrides it.
    pub dir: PathBuf,
    /// Record every `cadence` steps (the last step is always recorded).
    pub cadence: usize,
    /// Write the final lattice state (ymh only).
    pub checkpoint: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cadence: 1,
            checkpoint: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// SO(3) on copies of ℝ³.
    Vectors,
    /// U(1) on copies of ℝ².
    Planes,
    /// SU(2) on ℂ² ≅ ℝ⁴.
    Fundamental,
    /// SU(2) on copies of ℝ³.
    Adjoint,
}

impl Representation {
    fn group(self) -> Group {
        match self {
            Representation::Vectors => Group::So3,
            Representation::Planes => Group::U1,
            Representation::Fundamental | Representation::Adjoint => Group::Su2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiConfig {
    pub offset: Vec<f64>,
    /// `ξ(t) = offset + amplitude · sin(ω t)`; constant when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Vec<f64>>,
    #[serde(default)]
    pub omega: f64,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn free() -> ModelPotential {
    ModelPotential::free()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteConfig {
    pub representation: Representation,
    #[serde(default = "one_usize")]
    pub copies: usize,
    #[serde(default = "one")]
    pub charge: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "free")]
    pub potential: ModelPotential,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub xi: XiConfig,
}

impl FiniteConfig {
    pub fn dim(&self) -> usize {
        match self.representation {
            Representation::Vectors | Representation::Adjoint => 3 * self.copies,
            Representation::Planes => 2 * self.copies,
            Representation::Fundamental => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YmhConfig {
    pub n: usize,
    pub a: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: SmoothData,
    /// Project the initial data onto the Gauss constraint.
    #[serde(default = "yes")]
    pub project: bool,
    /// Constant `A₀`; temporal gauge (zero) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_in: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LapseConfig {
    /// `ℓ(t) = offset + amplitude · sin(ω t)`.
    pub offset: f64,
    pub amplitude: f64,
    pub omega: f64,
}

impl Default for LapseConfig {
    fn default() -> Self {
        Self {
            offset: 1.0,
            amplitude: 0.0,
            omega: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrConfig {
    /// Kasner exponents; alternatively `kasner_u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kasner: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kasner_u: Option<f64>,
    #[serde(default = "one")]
    pub t0: f64,
    #[serde(default)]
    pub lapse: LapseConfig,
}

impl GrConfig {
    pub fn exponents(&self) -> [f64; 3] {
        match (self.kasner, self.kasner_u) {
            (Some(p), _) => p,
            (None, Some(u)) => clebsch::gr::kasner_exponents(u),
            (None, None) => unreachable!("validated"),
        }
    }
}

fn field(name: &str, msg: impl Into<String>) -> CliError {
    CliError::Validation(format!("{name}: {}", msg.into()))
}

fn finite_all(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(field(name, "values must be finite"))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Schema checks that do not need any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(field("horizon", format!("must be non-negative, got {}", self.horizon)));
        }
        self.integrator
            .validate()
            .map_err(|e| field("integrator", e.to_string()))?;
        clebsch::integrators::step_count(self.horizon, self.integrator.dt)
            .map_err(|e| field("horizon", e.to_string()))?;
        if self.output.cadence == 0 {
            return Err(field("output.cadence", "must be at least 1"));
        }
        if self.output.checkpoint && self.backend != Backend::Ymh {
            return Err(field("output.checkpoint", "checkpoints are only written by the ymh backend"));
        }
        let sections = [
            ("finite", self.finite.is_some(), matches!(self.backend, Backend::Finite | Backend::Extended)),
            ("ymh", self.ymh.is_some(), self.backend == Backend::Ymh),
            ("gr", self.gr.is_some(), self.backend == Backend::Gr),
        ];
        for (name, present, wanted) in sections {
            if present && !wanted {
                return Err(field(name, format!("section is not used by backend {}", self.backend.name())));
            }
            if !present && wanted {
                return Err(field(name, format!("section is required by backend {}", self.backend.name())));
            }
        }
        match self.backend {
            Backend::Finite | Backend::Extended => self.validate_finite(),
            Backend::Ymh => self.validate_ymh(),
            Backend::Gr => self.validate_gr(),
        }
    }

    fn require_group(&self) -> Result<Group, CliError> {
        self.group
            .ok_or_else(|| field("group", format!("required by backend {}", self.backend.name())))
    }

    fn validate_finite(&self) -> Result<(), CliError> {
        let group = self.require_group()?;
        let f = self.finite.as_ref().expect("checked");
        if f.representation.group() != group {
            return Err(field(
                "group",
                format!("{group} does not act through representation {:?}", f.representation).to_lowercase(),
            ));
        }
        if f.copies == 0 {
            return Err(field("finite.copies", "must be at least 1"));
        }
        if f.representation == Representation::Fundamental && f.copies != 1 {
            return Err(field("finite.copies", "the fundamental representation has a single copy"));
        }
        if !(f.mass > 0.0 && f.mass.is_finite()) {
            return Err(field("finite.mass", "must be positive"));
        }
        let n = f.dim();
        for (name, v) in [("finite.q", &f.q), ("finite.p", &f.p)] {
            if v.len() != n {
                return Err(field(name, format!("expected {n} components, found {}", v.len())));
            }
            finite_all(name, v)?;
        }
        let k = group.dim();
        if f.xi.offset.len() != k {
            return Err(field("finite.xi.offset", format!("expected {k} components, found {}", f.xi.offset.len())));
        }
        finite_all("finite.xi.offset", &f.xi.offset)?;
        if let Some(a) = &f.xi.amplitude {
            if a.len() != k {
                return Err(field("finite.xi.amplitude", format!("expected {k} components, found {}", a.len())));
            }
            finite_all("finite.xi.amplitude", a)?;
        }
        Ok(())
    }

    fn validate_ymh(&self) -> Result<(), CliError> {
        let group = self.require_group()?;
        if group == Group::So3 {
            return Err(field("group", "the ymh backend supports u1 and su2"));
        }
        let y = self.ymh.as_ref().expect("checked");
        clebsch::ymh::LatticeGeometry::new(y.n, y.a).map_err(|e| field("ymh.n", e.to_string()))?;
        finite_all("ymh.mu", &[y.mu, y.v])?;
        if let Some(a0) = &y.a0 {
            if a0.len() != group.dim() {
                return Err(field("ymh.a0", format!("expected {} components, found {}", group.dim(), a0.len())));
            }
            finite_all("ymh.a0", a0)?;
        }
        Ok(())
    }

    fn validate_gr(&self) -> Result<(), CliError> {
        if let Some(g) = self.group {
            return Err(field("group", format!("the gr backend has no gauge group, got {g}")));
        }
        let gr = self.gr.as_ref().expect("checked");
        match (gr.kasner, gr.kasner_u) {
            (Some(_), Some(_)) => return Err(field("gr.kasner", "give either kasner or kasner_u, not both")),
            (None, None) => return Err(field("gr.kasner", "one of kasner or kasner_u is required")),
            (None, Some(u)) if !(u >= 1.0 && u.is_finite()) => {
                return Err(field("gr.kasner_u", "must be at least 1"));
            }
            _ => {}
        }
        let p = gr.exponents();
        let s1: f64 = p.iter().sum();
        let s2: f64 = p.iter().map(|x| x * x).sum();
        if (s1 - 1.0).abs() > 1e-9 || (s2 - 1.0).abs() > 1e-9 {
            return Err(field("gr.kasner", format!("exponents need Σp = Σp² = 1, got {s1} and {s2}")));
        }
        if !(gr.t0 > 0.0 && gr.t0.is_finite()) {
            return Err(field("gr.t0", "must be positive"));
        }
        let l = &gr.lapse;
        finite_all("gr.lapse", &[l.offset, l.amplitude, l.omega])?;
        if l.offset - l.amplitude.abs() <= 0.0 {
            return Err(field("gr.lapse", "lapse must stay positive: need offset > |amplitude|"));
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("CLEBSCH_OUTPUT_DIR") {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FINITE: &str = r#"
backend = "finite"
group = "so3"
horizon = 1.0

[integrator]
scheme = "rk4"
dt = 0.01

[finite]
representation = "vectors"
copies = 2
q = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]
p = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
xi = { offset = [0.1, 0.2, 0.3] }
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let c = ScenarioConfig::parse(FINITE).unwrap();
        assert_eq!(c.output.cadence, 1);
        assert_eq!(c.finite.as_ref().unwrap().mass, 1.0);
        assert_eq!(c.integrator.max_newton, 50);
    }

    #[test]
    fn json_echo_round_trips() {
        let c = ScenarioConfig::parse(FINITE).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back, c);
    }

    fn err(text: &str) -> String {
        match ScenarioConfig::parse(text) {
            Err(CliError::Validation(m)) => m,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejections_name_the_field() {
        assert!(err(&FINITE.replace("group = \"so3\"", "group = \"u1\"")).starts_with("group:"));
        assert!(err(&FINITE.replace("copies = 2", "copies = 1")).starts_with("finite.q:"));
        assert!(err(&FINITE.replace("horizon = 1.0", "horizon = 1.005")).starts_with("horizon:"));
        assert!(err(&FINITE.replace("dt = 0.01", "dt = -0.01")).starts_with("integrator:"));
        assert!(err(&format!("{FINITE}\nbogus = 1\n")).contains("bogus"));
        assert!(err(&FINITE.replace("backend = \"finite\"", "backend = \"ymh\"")).starts_with("finite:"));
    }

    #[test]
    fn gr_checks() {
        let base = "backend = \"gr\"\nhorizon = 1.0\n[integrator]\nscheme = \"rk4\"\ndt = 0.1\n[gr]\n";
        ScenarioConfig::parse(&format!("{base}kasner_u = 2.0\n")).unwrap();
        assert!(err(&format!("{base}kasner = [0.5, 0.5, 0.0]\n")).starts_with("gr.kasner:"));
        assert!(err(&format!("group = \"u1\"\n{base}kasner_u = 2.0\n")).starts_with("group:"));
        assert!(err(&format!("{base}kasner_u = 2.0\nlapse = {{ offset = 0.5, amplitude = 1.0 }}\n")).starts_with("gr.lapse:"));
    }
}
