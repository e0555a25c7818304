//! JSON run configuration. Complex numbers are `[re, im]` pairs and matrices
//! are arrays of rows.

use serde::{Deserialize, Serialize};

use airy_graph::discretization::GridSpec;
use airy_graph::graph_model::{validate_graph, Edge, Orientation, StarGraph};
use airy_graph::krein_bc::{GeneralCondition, SeparatedCondition, VertexCondition};
use airy_graph::{CMat, CVec, C64};

use crate::CliError;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationTag {
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub id: String,
    pub orientation: OrientationTag,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub edges: Vec<EdgeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConditionConfig {
    General { l: Matrix },
    Separated { y_basis: Vec<Vec<Complex>>, u: Matrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    airy_graph::evolution::DEFAULT_RECORD_EVERY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialDatum {
    /// `amplitude·exp(−(x − center)²/(2 width²))` in each edge's own chart;
    /// without `edge` it is sampled on every edge.
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge: Option<String>,
        center: f64,
        width: f64,
        amplitude: f64,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphConfig,
    pub condition: ConditionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<InitialDatum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn bad(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", field.into()))
}

fn finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, "must be finite"))
    }
}

fn complex(field: &str, z: Complex) -> Result<C64, CliError> {
    Ok(C64::new(finite(field, z[0])?, finite(field, z[1])?))
}

/// Reads a matrix of the given shape; empty row lists are accepted for
/// zero-sized dimensions.
fn matrix(field: &str, m: &Matrix, rows: usize, cols: usize) -> Result<CMat, CliError> {
    let shape_ok =
        m.len() == rows && m.iter().all(|r| r.len() == cols) || (rows == 0 && m.iter().all(|r| r.is_empty()));
    if !shape_ok {
        let got = (m.len(), m.first().map_or(0, |r| r.len()));
        return Err(bad(field, format!("expected shape {rows}×{cols}, got {}×{}", got.0, got.1)));
    }
    let mut out = CMat::zeros(rows, cols);
    for (i, row) in m.iter().enumerate().take(rows) {
        for (j, &z) in row.iter().enumerate() {
            out[(i, j)] = complex(&format!("{field}[{i}][{j}]"), z)?;
        }
    }
    Ok(out)
}

pub fn matrix_to_config(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn vector_to_config(v: &CVec) -> Vec<Complex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.graph()?;
        cfg.condition()?;
        if let Some(g) = &cfg.grid {
            cfg.grid_spec_of(g)?;
        }
        if let Some(t) = &cfg.time {
            cfg.check_time(t)?;
        }
        cfg.check_initial()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn graph(&self) -> Result<StarGraph, CliError> {
        let mut edges = Vec::new();
        for (k, e) in self.graph.edges.iter().enumerate() {
            let o = match e.orientation {
                OrientationTag::Incoming => Orientation::Incoming,
                OrientationTag::Outgoing => Orientation::Outgoing,
            };
            finite(&format!("graph.edges[{k}].alpha"), e.alpha)?;
            finite(&format!("graph.edges[{k}].beta"), e.beta)?;
            edges.push(Edge { id: e.id.clone(), orientation: o, alpha: e.alpha, beta: e.beta });
        }
        let g = StarGraph::new(edges);
        validate_graph(&g).map_err(|errs| {
            let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
            bad("graph", msgs.join("; "))
        })?;
        Ok(g)
    }

    pub fn condition(&self) -> Result<VertexCondition, CliError> {
        let g = self.graph()?;
        let nm = g.e_minus().len();
        let np = g.e_plus().len();
        match &self.condition {
            ConditionConfig::General { l } => {
                Ok(VertexCondition::General(GeneralCondition { l: matrix("condition.l", l, 3 * np, 3 * nm)? }))
            }
            ConditionConfig::Separated { y_basis, u } => {
                let mut ys = Vec::new();
                for (k, y) in y_basis.iter().enumerate() {
                    let f = format!("condition.y_basis[{k}]");
                    if y.len() != nm + np {
                        return Err(bad(f, format!("expected length {}, got {}", nm + np, y.len())));
                    }
                    let v: Result<Vec<C64>, _> = y.iter().map(|&z| complex(&f, z)).collect();
                    ys.push(CVec::from_vec(v?));
                }
                Ok(VertexCondition::Separated(SeparatedCondition { y_basis: ys, u: matrix("condition.u", u, np, nm)? }))
            }
        }
    }

    fn grid_spec_of(&self, g: &GridConfig) -> Result<GridSpec, CliError> {
        finite("grid.length", g.length)?;
        GridSpec::new(g.length, g.points).map_err(|e| bad("grid", e))
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        let g = self.grid.as_ref().ok_or_else(|| bad("grid", "required for simulation"))?;
        self.grid_spec_of(g)
    }

    fn check_time(&self, t: &TimeConfig) -> Result<(), CliError> {
        if finite("time.dt", t.dt)? <= 0.0 {
            return Err(bad("time.dt", "must be positive"));
        }
        if finite("time.t_end", t.t_end)? < 0.0 {
            return Err(bad("time.t_end", "must be nonnegative"));
        }
        if t.record_every == 0 {
            return Err(bad("time.record_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn time(&self) -> Result<&TimeConfig, CliError> {
        self.time.as_ref().ok_or_else(|| bad("time", "required for simulation"))
    }

    fn check_initial(&self) -> Result<(), CliError> {
        for (k, d) in self.initial.iter().enumerate() {
            if let InitialDatum::Gaussian { edge, center, width, amplitude } = d {
                let f = format!("initial[{k}].gaussian");
                finite(&f, *center)?;
                finite(&f, *amplitude)?;
                if finite(&f, *width)? <= 0.0 {
                    return Err(bad(format!("{f}.width"), "must be positive"));
                }
                if let Some(id) = edge {
                    if !self.graph.edges.iter().any(|e| &e.id == id) {
                        return Err(bad(format!("{f}.edge"), format!("unknown edge `{id}`")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Smallest Gaussian width, used for the contamination window.
    pub fn min_width(&self) -> Option<f64> {
        self.initial
            .iter()
            .filter_map(|d| match d {
                InitialDatum::Gaussian { width, .. } => Some(*width),
                InitialDatum::Zero => None,
            })
            .reduce(f64::min)
    }
}

/// Config describing a graph and condition only.
pub fn from_parts(g: &StarGraph, cond: &VertexCondition) -> RunConfig {
    let edges = g
        .edges()
        .iter()
        .map(|e| EdgeConfig {
            id: e.id.clone(),
            orientation: match e.orientation {
                Orientation::Incoming => OrientationTag::Incoming,
                Orientation::Outgoing => OrientationTag::Outgoing,
            },
            alpha: e.alpha,
            beta: e.beta,
        })
        .collect();
    let condition = match cond {
        VertexCondition::General(gc) => ConditionConfig::General { l: matrix_to_config(&gc.l) },
        VertexCondition::Separated(sc) => ConditionConfig::Separated {
            y_basis: sc.y_basis.iter().map(vector_to_config).collect(),
            u: matrix_to_config(&sc.u),
        },
    };
    RunConfig { graph: GraphConfig { edges }, condition, grid: None, time: None, initial: vec![], output: None }
}
