use std::collections::BTreeMap;

use serde::Serialize;

use airy_graph::extension_theory::deficiency_indices;
use airy_graph::graph_model::StarGraph;
use airy_graph::krein_bc::{classify, Classification, KreinError, Verdict, VertexCondition};

use crate::config::RunConfig;
use crate::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDeficiency {
    pub id: String,
    pub plus: usize,
    pub minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencySummary {
    pub n_plus: usize,
    pub n_minus: usize,
    pub balanced: bool,
    pub per_edge: Vec<EdgeDeficiency>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub verdict: String,
    pub mass: String,
    pub deficiency: DeficiencySummary,
    pub diagnostics: BTreeMap<String, f64>,
    pub tol: f64,
}

impl ClassifyReport {
    pub fn summary_line(&self) -> String {
        let d = &self.deficiency;
        let bal = if d.balanced { "balanced" } else { "unbalanced" };
        format!("{}; mass: {}; deficiency ({},{}) {bal}", self.verdict, self.mass, d.n_plus, d.n_minus)
    }

    pub fn text(&self) -> String {
        let mut s = self.summary_line();
        s.push('\n');
        for (k, v) in &self.diagnostics {
            s.push_str(&format!("  {k} = {v:e}\n"));
        }
        s
    }
}

pub fn krein_to_cli(e: KreinError) -> CliError {
    match e {
        KreinError::Linalg(m) => CliError::Solver(m.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn classify_parts(g: &StarGraph, cond: &VertexCondition, tol: f64) -> Result<Classification, CliError> {
    classify(g, cond, tol).map_err(krein_to_cli)
}

pub fn report(cfg: &RunConfig, tol: f64) -> Result<(ClassifyReport, Classification), CliError> {
    let g = cfg.graph()?;
    let cond = cfg.condition()?;
    let cl = classify_parts(&g, &cond, tol)?;
    let def = deficiency_indices(&g);
    let rep = ClassifyReport {
        verdict: cl.verdict.to_string(),
        mass: cl.mass_conserving.to_string(),
        deficiency: DeficiencySummary {
            n_plus: def.n_plus,
            n_minus: def.n_minus,
            balanced: def.balanced,
            per_edge: def.per_edge.into_iter().map(|(id, plus, minus)| EdgeDeficiency { id, plus, minus }).collect(),
        },
        diagnostics: cl.diagnostics.clone(),
        tol,
    };
    Ok((rep, cl))
}

/// Prints the text report; the JSON report goes to `out` when given. A
/// `NotGenerator` verdict still writes the report but exits with 2.
pub fn run(cfg: &RunConfig, tol: f64, out: Option<&std::path::Path>) -> Result<Outcome, CliError> {
    let (rep, cl) = report(cfg, tol)?;
    if let Some(p) = out {
        crate::write_file(p, crate::to_json(&rep).as_bytes())?;
    }
    let code = if cl.verdict == Verdict::NotGenerator { 2 } else { 0 };
    Ok(Outcome { stdout: rep.text(), code })
}
