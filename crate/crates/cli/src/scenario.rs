//! Scenario files: what to solve, on which grid, and which checks to run.

use std::fmt;
use std::path::{Path, PathBuf};

use lax_oleinik::{build_flux, extend_superlinear, presets, ConvexFlux, Profile, Tail, Truncation, UniformGrid};
use serde::Deserialize;

pub const MIN_CELLS: usize = 16;

/// Malformed or inconsistent input; maps to exit code 2.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn schema<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(SchemaError(msg.into()).into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub flux: FluxSpec,
    pub initial: InitialSpec,
    pub grid: GridSpec,
    pub times: Vec<f64>,
    #[serde(default)]
    pub pipeline: Pipeline,
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Replace the computed solution by a deliberately wrong one.
    #[serde(default)]
    pub negative_control: Option<NegativeControl>,
}

fn default_checks() -> Vec<CheckKind> {
    vec![CheckKind::Oleinik, CheckKind::Weak, CheckKind::Entropy, CheckKind::Dpp]
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxSpec {
    Burgers {
        #[serde(default)]
        range: Option<f64>,
        #[serde(default)]
        knots: Option<usize>,
        #[serde(default)]
        extend: Option<ExtendSpec>,
    },
    Abs {
        #[serde(default)]
        range: Option<f64>,
        #[serde(default)]
        knots: Option<usize>,
        #[serde(default)]
        extend: Option<ExtendSpec>,
    },
    SemisuperlinearDemo {
        #[serde(default)]
        range: Option<f64>,
        #[serde(default)]
        knots: Option<usize>,
    },
    AsymmetricAbs {
        #[serde(default)]
        range: Option<f64>,
        #[serde(default)]
        knots: Option<usize>,
    },
    Samples {
        knots: Vec<f64>,
        values: Vec<f64>,
        tails: TailsSpec,
        #[serde(default)]
        extend: Option<ExtendSpec>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendSpec {
    pub a: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub curvature: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsSpec {
    pub left: TailSpec,
    pub right: TailSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    Linear { slope: f64 },
    Quadratic { slope: f64, curvature: f64 },
}

impl From<TailSpec> for Tail<f64> {
    fn from(t: TailSpec) -> Self {
        match t {
            TailSpec::Linear { slope } => Tail::Linear { slope },
            TailSpec::Quadratic { slope, curvature } => Tail::Quadratic { slope, curvature },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InitialSpec {
    /// `left` for `x < at`, `right` for `x > at`.
    Riemann {
        left: f64,
        right: f64,
        #[serde(default)]
        at: f64,
    },
    /// One value per knot.
    Samples { values: Vec<f64> },
    /// Height `height` on `|x - center| < width / 2`.
    Spike {
        height: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `value` on `(a, b)`, zero outside.
    Indicator { value: f64, a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    /// Number of cells.
    pub nx: usize,
}

impl GridSpec {
    pub fn build(&self) -> UniformGrid<f64> {
        UniformGrid::spanning(self.xmin, self.xmax, self.nx + 1)
    }

    pub fn with_cells(&self, nx: usize) -> Self {
        Self { nx, ..*self }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    #[default]
    Linf,
    L1,
    Semisuperlinear,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationSpec {
    #[default]
    Clamp,
    SmoothCutoff,
}

impl From<TruncationSpec> for Truncation {
    fn from(t: TruncationSpec) -> Self {
        match t {
            TruncationSpec::Clamp => Truncation::Clamp,
            TruncationSpec::SmoothCutoff => Truncation::SmoothCutoff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    L1,
    Comparison,
    Oleinik,
    Weak,
    Entropy,
    Trace,
    Dpp,
    Mass,
}

impl CheckKind {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s.trim() {
            "l1" => Self::L1,
            "comparison" => Self::Comparison,
            "oleinik" => Self::Oleinik,
            "weak" => Self::Weak,
            "entropy" => Self::Entropy,
            "trace" => Self::Trace,
            "dpp" => Self::Dpp,
            "mass" => Self::Mass,
            other => return schema(format!("unknown check {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NegativeControl {
    /// The Riemann jump transported at `speed`.
    WrongSpeed { speed: f64 },
    /// The Riemann jump kept as a discontinuity moving at the
    /// Rankine–Hugoniot speed, even when it should open into a fan.
    ExpansionShock,
}

impl Scenario {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SchemaError(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let g = self.grid;
        if !(g.xmin.is_finite() && g.xmax.is_finite() && g.xmin < g.xmax) {
            return schema(format!("grid needs xmin < xmax, got [{}, {}]", g.xmin, g.xmax));
        }
        if g.nx < MIN_CELLS {
            return schema(format!("grid.nx must be at least {MIN_CELLS}, got {}", g.nx));
        }
        validate_times(&self.times)?;
        if self.pipeline != Pipeline::Linf {
            if self.levels.is_empty() {
                return schema("levels are required for the l1 and semisuperlinear pipelines");
            }
            if self.levels.windows(2).any(|w| w[1] <= w[0]) || self.levels[0] == 0 {
                return schema("levels must be positive and strictly increasing");
            }
        }
        if let InitialSpec::Samples { values } = &self.initial {
            if values.len() != g.nx + 1 {
                return schema(format!("initial samples need nx + 1 = {} values, got {}", g.nx + 1, values.len()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return schema("initial samples must be finite");
            }
        }
        if let InitialSpec::Spike { width, .. } = self.initial {
            if !(width > 0.0) {
                return schema("spike width must be positive");
            }
        }
        if self.negative_control.is_some() && !matches!(self.initial, InitialSpec::Riemann { .. }) {
            return schema("negative controls need Riemann initial data");
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }

    pub fn flux(&self) -> anyhow::Result<ConvexFlux<f64>> {
        self.flux.build()
    }

    pub fn initial(&self) -> Profile<f64> {
        self.initial.build(self.grid.build())
    }

    pub fn initial_on(&self, grid: GridSpec) -> anyhow::Result<Profile<f64>> {
        if let InitialSpec::Samples { values } = &self.initial {
            if values.len() != grid.nx + 1 {
                return schema("sampled initial data cannot be regridded");
            }
        }
        Ok(self.initial.build(grid.build()))
    }
}

pub fn validate_times(times: &[f64]) -> anyhow::Result<()> {
    if times.is_empty() {
        return schema("times must not be empty");
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return schema(format!("times must be positive, got {t}"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return schema("times must be strictly increasing");
    }
    Ok(())
}

impl FluxSpec {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| SchemaError(format!("flux spec: {e}")).into())
    }

    pub fn id(&self) -> &'static str {
        match self {
            FluxSpec::Burgers { .. } => "burgers",
            FluxSpec::Abs { .. } => "abs",
            FluxSpec::SemisuperlinearDemo { .. } => "semisuperlinear_demo",
            FluxSpec::AsymmetricAbs { .. } => "asymmetric_abs",
            FluxSpec::Samples { .. } => "samples",
        }
    }

    pub fn build(&self) -> anyhow::Result<ConvexFlux<f64>> {
        let sized = |range: Option<f64>, knots: Option<usize>, r0: f64, k0: usize| -> anyhow::Result<(f64, usize)> {
            let (r, k) = (range.unwrap_or(r0), knots.unwrap_or(k0));
            if !(r > 0.0) || k < 3 {
                return schema(format!("flux needs range > 0 and at least 3 knots, got {r}, {k}"));
            }
            Ok((r, k))
        };
        let (base, extend) = match *self {
            FluxSpec::Burgers { range, knots, extend } => {
                let (r, k) = sized(range, knots, 4.0, 1601)?;
                (presets::burgers(r, k), extend)
            }
            FluxSpec::Abs { range, knots, extend } => {
                let (r, k) = sized(range, knots, 4.0, 1601)?;
                (presets::abs(r, k), extend)
            }
            FluxSpec::SemisuperlinearDemo { range, knots } => {
                let (r, k) = sized(range, knots, 8.0, 3201)?;
                (presets::semisuperlinear_demo(r, k), None)
            }
            FluxSpec::AsymmetricAbs { range, knots } => {
                let (r, k) = sized(range, knots, 4.0, 1601)?;
                (presets::asymmetric_abs(r, k), None)
            }
            FluxSpec::Samples { ref knots, ref values, tails, extend } => {
                let f = build_flux(knots, values, tails.left.into(), tails.right.into()).map_err(|e| SchemaError(format!("flux samples: {e}")))?;
                (f, extend)
            }
        };
        match extend {
            Some(e) => extend_superlinear(&base, e.a, e.b, e.curvature).map_err(|e| SchemaError(format!("flux extension: {e}")).into()),
            None => Ok(base),
        }
    }
}

impl InitialSpec {
    pub fn build(&self, g: UniformGrid<f64>) -> Profile<f64> {
        // knots sitting exactly on a jump take the average of both sides
        let step = |x: f64, at: f64, l: f64, r: f64| {
            let tol = 1e-9 * g.step;
            if x < at - tol {
                l
            } else if x > at + tol {
                r
            } else {
                0.5 * (l + r)
            }
        };
        match *self {
            InitialSpec::Riemann { left, right, at } => Profile::from_fn(g, move |x| step(x, at, left, right)),
            InitialSpec::Samples { ref values } => Profile::from_fn(g, |x| values[g.nearest(x)]),
            InitialSpec::Spike { height, width, center } => {
                InitialSpec::Indicator { value: height, a: center - width / 2.0, b: center + width / 2.0 }.build(g)
            }
            InitialSpec::Indicator { value, a, b } => Profile::from_fn(g, move |x| {
                let (l, r) = (step(x, a, 0.0, value), step(x, b, value, 0.0));
                if value >= 0.0 {
                    l.min(r)
                } else {
                    l.max(r)
                }
            }),
        }
    }

    pub fn riemann_states(&self) -> Option<(f64, f64, f64)> {
        match *self {
            InitialSpec::Riemann { left, right, at } => Some((left, right, at)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHOCK: &str = r#"{"flux":{"kind":"burgers"},"initial":{"kind":"riemann","params":{"left":1,"right":0}},
        "grid":{"xmin":-3,"xmax":3,"nx":200},"times":[0.5,1]}"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(SHOCK).unwrap();
        assert_eq!(s.pipeline, Pipeline::Linf);
        assert_eq!(s.seed, 42);
        let u0 = s.initial();
        assert_eq!(u0.len(), 201);
        assert_eq!(u0.values[100], 0.5);
        assert_eq!(u0.values[0], 1.0);
    }

    #[test]
    fn rejects_bad_times_and_grids() {
        for bad in [
            SHOCK.replace("[0.5,1]", "[-1]"),
            SHOCK.replace("[0.5,1]", "[1,0.5]"),
            SHOCK.replace("[0.5,1]", "[]"),
            SHOCK.replace("\"nx\":200", "\"nx\":8"),
            SHOCK.replace("\"xmax\":3", "\"xmax\":-4"),
            SHOCK.replace("burgers", "parabola"),
        ] {
            let err = Scenario::parse(&bad).unwrap_err();
            assert!(err.downcast_ref::<SchemaError>().is_some(), "{bad}");
        }
    }

    #[test]
    fn pipelines_need_levels() {
        let s = SHOCK.replace("\"times\"", "\"pipeline\":\"l1\",\"times\"");
        assert!(Scenario::parse(&s).is_err());
        let s = SHOCK.replace("\"times\"", "\"pipeline\":\"l1\",\"levels\":[10,50],\"times\"");
        assert_eq!(Scenario::parse(&s).unwrap().levels, vec![10, 50]);
    }

    #[test]
    fn spike_and_indicator_shapes() {
        let g = UniformGrid::spanning(-1.0, 1.0, 201);
        let spike = InitialSpec::Spike { height: 50.0, width: 0.02, center: 0.0 }.build(g);
        assert_eq!(spike.values[100], 50.0);
        assert_eq!(spike.values[99], 25.0);
        assert_eq!(spike.values[98], 0.0);
        let ind = InitialSpec::Indicator { value: -5.0, a: 0.0, b: 0.5 }.build(g);
        assert_eq!(ind.values[100], -2.5);
        assert_eq!(ind.values[120], -5.0);
        assert_eq!(ind.values[150], -2.5);
        assert_eq!(ind.values[160], 0.0);
    }

    #[test]
    fn sample_flux_round_trip() {
        let spec = FluxSpec::parse(
            r#"{"kind":"samples","knots":[-1,0,1],"values":[0.5,0,0.5],
                "tails":{"left":{"kind":"quadratic","slope":-0.5,"curvature":0.5},"right":{"kind":"quadratic","slope":0.5,"curvature":0.5}}}"#,
        )
        .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert!(FluxSpec::parse(r#"{"kind":"samples","knots":[-1,0,1],"values":[0,1,0],"tails":{"left":{"kind":"linear","slope":-1},"right":{"kind":"linear","slope":1}}}"#)
            .unwrap()
            .build()
            .is_err());
    }
}
