use serde::Serialize;

use airy_graph::catalog::entries;

use crate::config::{from_parts, RunConfig};
use crate::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportedEntry {
    pub id: u32,
    pub name: String,
    pub expected_verdict: String,
    pub expected_mass: String,
    pub statement: String,
    pub defaults: String,
    /// Loadable by `classify` and, after adding grid/time/initial, `simulate`.
    pub config: RunConfig,
}

pub fn catalog_json() -> String {
    let list: Vec<ExportedEntry> = entries()
        .into_iter()
        .map(|e| ExportedEntry {
            id: e.id,
            name: e.name.clone(),
            expected_verdict: e.expected_verdict.to_string(),
            expected_mass: e.expected_mass.to_string(),
            statement: e.statement.to_string(),
            defaults: e.defaults.clone(),
            config: from_parts(&e.graph, &e.condition),
        })
        .collect();
    crate::to_json(&list)
}

pub fn run(out: Option<&std::path::Path>) -> Result<Outcome, CliError> {
    let json = catalog_json();
    match out {
        Some(p) => {
            crate::write_file(p, json.as_bytes())?;
            Ok(Outcome { stdout: format!("wrote catalog to {}\n", p.display()), code: 0 })
        }
        None => Ok(Outcome { stdout: json, code: 0 }),
    }
}
