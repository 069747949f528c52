//! On-disk experiment description (TOML).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ternary_consensus::{
    DegreeBoundPolicy, Edge, GraphSequence, GraphSnapshot, InitSpec, MetropolisConfig, ProtocolParams, SimulationConfig,
};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSection,
    pub protocol: ProtocolSection,
    pub init: InitSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths in the document resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Line,
    Cycle,
    Star,
    Edgeless,
    RelabeledLine,
    CoreSynthetic,
    Periodic,
    Explicit,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CoreShape {
    Named(String),
    Edges(Vec<String>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub kind: GraphKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Block length used by `check-core`.
    #[serde(rename = "B", default = "one")]
    pub block: usize,
    pub core: Option<CoreShape>,
    pub extra_prob: Option<f64>,
    /// Edge lists (`"i-j"`) per round, for `periodic` and `explicit`.
    pub rounds: Option<Vec<Vec<String>>>,
    /// Edge-list file for `explicit`, one round per line.
    pub file: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Theorem,
    Practical,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Named(String),
    Fixed(f64),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub variant: VariantName,
    pub d_policy: Option<PolicySpec>,
    pub prune_horizon: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Spike,
    UniformRandom,
    Explicit,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitKind,
    pub seed: Option<u64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordName {
    #[default]
    MetricsOnly,
    FullTrace,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_max: u64,
    pub stop_err: Option<f64>,
    #[serde(default)]
    pub record_level: RecordName,
    #[serde(default)]
    pub check: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write every `stride`-th round (the last round is always written).
    pub stride: Option<u64>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            stride: None,
        }
    }
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_max: Option<u64>,
    pub check: bool,
    pub out: Option<PathBuf>,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn parse_edge(key: &str, s: &str) -> Result<Edge, CliError> {
    s.trim()
        .parse::<Edge>()
        .map_err(|e| bad(key, format!("bad edge {s:?}: {e}")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses and validates a document. Paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self, CliError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.graph.seed = seed;
            self.init.seed = Some(seed);
        }
        if let Some(t) = o.t_max {
            self.run.t_max = t;
        }
        self.run.check |= o.check;
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
    }

    /// Builds every derived object once so that errors surface at load time.
    pub fn validate(&self) -> Result<(), CliError> {
        self.check_graph_keys()?;
        if let Some(len) = self.sequence()?.finite_len() {
            if self.run.t_max > len as u64 {
                return Err(bad(
                    "run.t_max",
                    format!("{} exceeds the {len} rounds of the explicit sequence", self.run.t_max),
                ));
            }
        }
        self.params()?;
        self.init_spec()?.values(self.graph.n).map_err(|e| bad("init", e))?;
        if self.run.t_max == 0 {
            return Err(bad("run.t_max", "must be at least 1"));
        }
        if let Some(e) = self.run.stop_err {
            if !(e.is_finite() && e >= 0.0) {
                return Err(bad(
                    "run.stop_err",
                    format!("must be a finite nonnegative number, got {e}"),
                ));
            }
        }
        if self.graph.block == 0 {
            return Err(bad("graph.B", "must be at least 1"));
        }
        if self.output.stride == Some(0) {
            return Err(bad("output.stride", "must be at least 1"));
        }
        Ok(())
    }

    fn check_graph_keys(&self) -> Result<(), CliError> {
        let g = &self.graph;
        let kind = g.kind;
        let allowed = |key: &str, kinds: &[GraphKind], present: bool| {
            if present && !kinds.contains(&kind) {
                Err(bad(&format!("graph.{key}"), format!("not used by graph kind {kind:?}")))
            } else {
                Ok(())
            }
        };
        allowed("core", &[GraphKind::CoreSynthetic], g.core.is_some())?;
        allowed("extra_prob", &[GraphKind::CoreSynthetic], g.extra_prob.is_some())?;
        allowed(
            "rounds",
            &[GraphKind::Periodic, GraphKind::Explicit],
            g.rounds.is_some(),
        )?;
        allowed("file", &[GraphKind::Explicit], g.file.is_some())
    }

    pub fn sequence(&self) -> Result<GraphSequence, CliError> {
        let g = &self.graph;
        let n = g.n;
        if n < 2 {
            return Err(bad("graph.n", format!("need at least 2 nodes, got {n}")));
        }
        let fixed = |s: GraphSnapshot| Ok(GraphSequence::fixed(s));
        match g.kind {
            GraphKind::Complete => fixed(GraphSnapshot::complete(n)),
            GraphKind::Line => fixed(GraphSnapshot::line(n)),
            GraphKind::Star => fixed(GraphSnapshot::star(n)),
            GraphKind::Edgeless => fixed(GraphSnapshot::edgeless(n)),
            GraphKind::Cycle => GraphSnapshot::cycle(n)
                .map(GraphSequence::fixed)
                .map_err(|e| bad("graph.n", e)),
            GraphKind::RelabeledLine => GraphSequence::relabeled_line(n, g.seed).map_err(|e| bad("graph", e)),
            GraphKind::CoreSynthetic => {
                let core = match &g.core {
                    None => return Err(bad("graph.core", "required for core_synthetic")),
                    Some(CoreShape::Named(name)) => match name.as_str() {
                        "path" => GraphSnapshot::line(n).edges().to_vec(),
                        "star" => GraphSnapshot::star(n).edges().to_vec(),
                        other => {
                            return Err(bad(
                                "graph.core",
                                format!("unknown shape {other:?}; use path, star or an edge list"),
                            ))
                        }
                    },
                    Some(CoreShape::Edges(list)) => list
                        .iter()
                        .map(|s| parse_edge("graph.core", s))
                        .collect::<Result<_, _>>()?,
                };
                let p = g.extra_prob.unwrap_or(0.0);
                GraphSequence::core_synthetic(n, core, g.block, p, g.seed).map_err(|e| bad("graph", e))
            }
            GraphKind::Periodic => {
                let rounds = self.listed_rounds("graph.rounds")?;
                GraphSequence::periodic(rounds).map_err(|e| bad("graph.rounds", e))
            }
            GraphKind::Explicit => match (&g.rounds, &g.file) {
                (Some(_), None) => {
                    let rounds = self.listed_rounds("graph.rounds")?;
                    GraphSequence::explicit(rounds).map_err(|e| bad("graph.rounds", e))
                }
                (None, Some(file)) => {
                    let path = self.base_dir.join(file);
                    let text = fs::read_to_string(&path)
                        .map_err(|e| bad("graph.file", format!("cannot read {}: {e}", path.display())))?;
                    GraphSequence::parse_explicit(n, &text).map_err(|e| bad("graph.file", e))
                }
                _ => Err(bad("graph", "explicit needs exactly one of rounds or file")),
            },
        }
    }

    fn listed_rounds(&self, key: &str) -> Result<Vec<GraphSnapshot>, CliError> {
        let rounds = self
            .graph
            .rounds
            .as_ref()
            .ok_or_else(|| bad(key, "required for this graph kind"))?;
        rounds
            .iter()
            .enumerate()
            .map(|(k, round)| {
                let key = format!("{key}[{k}]");
                let edges = round
                    .iter()
                    .map(|s| parse_edge(&key, s))
                    .collect::<Result<Vec<_>, _>>()?;
                GraphSnapshot::new(self.graph.n, edges).map_err(|e| bad(&key, e))
            })
            .collect()
    }

    pub fn policy(&self) -> Result<DegreeBoundPolicy, CliError> {
        match &self.protocol.d_policy {
            None => Ok(DegreeBoundPolicy::MaxDegree),
            Some(PolicySpec::Named(s)) => match s.as_str() {
                "max_degree" => Ok(DegreeBoundPolicy::MaxDegree),
                "global_n" => Ok(DegreeBoundPolicy::GlobalN),
                other => Err(bad(
                    "protocol.d_policy",
                    format!("unknown policy {other:?}; use max_degree, global_n or a number"),
                )),
            },
            Some(PolicySpec::Fixed(c)) => Ok(DegreeBoundPolicy::Fixed(*c)),
        }
    }

    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        let p = &self.protocol;
        let params = match p.variant {
            VariantName::Theorem => {
                let beta = p
                    .beta
                    .ok_or_else(|| bad("protocol.beta", "required for the theorem variant"))?;
                ProtocolParams::theorem(p.alpha, beta)
            }
            VariantName::Practical => match p.beta {
                Some(b) if b != 0.0 => return Err(bad("protocol.beta", "the practical variant has beta = 0")),
                _ => ProtocolParams::practical(p.alpha),
            },
        }
        .map_err(|e| bad("protocol", e))?;
        let params = params
            .with_policy(self.policy()?)
            .map_err(|e| bad("protocol.d_policy", e))?;
        match p.prune_horizon {
            Some(h) => params
                .with_prune_horizon(h)
                .map_err(|e| bad("protocol.prune_horizon", e)),
            None => Ok(params),
        }
    }

    pub fn init_spec(&self) -> Result<InitSpec, CliError> {
        let i = &self.init;
        let unused = |key: &str, present: bool| {
            if present {
                Err(bad(
                    &format!("init.{key}"),
                    format!("not used by init kind {:?}", i.kind),
                ))
            } else {
                Ok(())
            }
        };
        match i.kind {
            InitKind::Spike => {
                unused("seed", i.seed.is_some())?;
                unused("lo", i.lo.is_some())?;
                unused("hi", i.hi.is_some())?;
                unused("values", i.values.is_some())?;
                Ok(InitSpec::Spike)
            }
            InitKind::UniformRandom => {
                unused("values", i.values.is_some())?;
                Ok(InitSpec::UniformRandom {
                    seed: i.seed.unwrap_or(0),
                    lo: i.lo.unwrap_or(0.0),
                    hi: i.hi.unwrap_or(1.0),
                })
            }
            InitKind::Explicit => {
                unused("seed", i.seed.is_some())?;
                unused("lo", i.lo.is_some())?;
                unused("hi", i.hi.is_some())?;
                let values = i
                    .values
                    .clone()
                    .ok_or_else(|| bad("init.values", "required for explicit init"))?;
                Ok(InitSpec::Explicit(values))
            }
        }
    }

    pub fn simulation(&self) -> Result<SimulationConfig, CliError> {
        let mut sim = SimulationConfig::new(self.sequence()?, self.params()?, self.init_spec()?, self.run.t_max);
        if self.run.check {
            sim = sim.checked();
        }
        if self.run.record_level == RecordName::FullTrace {
            sim = sim.full_trace();
        }
        if let Some(e) = self.run.stop_err {
            sim = sim.stop_at(e);
        }
        sim.validate().map_err(|e| bad("run", e))?;
        Ok(sim)
    }

    pub fn baseline(&self) -> Result<MetropolisConfig, CliError> {
        Ok(MetropolisConfig {
            seq: self.sequence()?,
            degree_policy: self.policy()?,
            init: self.init_spec()?,
            t_max: self.run.t_max,
        })
    }

    /// The same experiment on `n` nodes.
    pub fn with_n(&self, n: usize) -> Result<Self, CliError> {
        let mut cfg = self.clone();
        cfg.graph.n = n;
        cfg.validate().map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("n = {n}: {msg}")),
            other => other,
        })?;
        Ok(cfg)
    }
}
