use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use airy_graph::discretization::{DiscreteSystem, DiscretizationError};
use airy_graph::evolution::{contamination_window, gaussian, sample, steps_for, ObservableRecord, Simulation};
use airy_graph::graph_model::Side;
use airy_graph::krein_bc::Verdict;
use airy_graph::C64;

use crate::classify::{krein_to_cli, report, ClassifyReport};
use crate::config::{InitialDatum, RunConfig};
use crate::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub length: f64,
    pub points: usize,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeMeta {
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMeta {
    pub config_sha256: String,
    /// Contamination window for the narrowest Gaussian datum; absent for zero data.
    pub t_max: Option<f64>,
    pub grid: GridMeta,
    pub time: TimeMeta,
    pub classification: ClassifyReport,
    /// Set when a `NotGenerator` configuration was run with `--force`.
    pub forced: bool,
    pub records: usize,
    pub csv: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// `path` with its extension replaced by `meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn assembly_to_cli(e: DiscretizationError) -> CliError {
    match e {
        DiscretizationError::Krein(k) => krein_to_cli(k),
        DiscretizationError::SingularAssembly(m) => CliError::Solver(m),
        other => CliError::Config(other.to_string()),
    }
}

pub fn initial_state(cfg: &RunConfig, sys: &DiscreteSystem) -> Vec<C64> {
    let ids: Vec<&str> = sys.graph.edges().iter().map(|e| e.id.as_str()).collect();
    sample(sys, |e, x| {
        let mut v = 0.0;
        for d in &cfg.initial {
            if let InitialDatum::Gaussian { edge, center, width, amplitude } = d {
                if edge.as_deref().is_none_or(|id| id == ids[e]) {
                    v += gaussian(x, *center, *width, *amplitude);
                }
            }
        }
        C64::new(v, 0.0)
    })
}

pub fn csv_header(sys: &DiscreteSystem) -> String {
    let mut cols: Vec<String> =
        ["t", "momentum", "mass_re", "mass_im", "mass_flux_re", "mass_flux_im"].iter().map(|s| s.to_string()).collect();
    for (side, tag) in [(Side::Minus, "minus"), (Side::Plus, "plus")] {
        for e in sys.graph.side_edges(side) {
            for k in 0..3 {
                cols.push(format!("{}_{tag}_u{k}_re", e.id));
                cols.push(format!("{}_{tag}_u{k}_im", e.id));
            }
        }
    }
    cols.join(",")
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn csv_row(r: &ObservableRecord) -> String {
    let mut cols =
        vec![num(r.t), num(r.momentum), num(r.mass.re), num(r.mass.im), num(r.mass_flux.re), num(r.mass_flux.im)];
    for tr in [&r.minus, &r.plus] {
        for i in 0..tr.len() {
            for z in [tr.u0[i], tr.u1[i], tr.u2[i]] {
                cols.push(num(z.re));
                cols.push(num(z.im));
            }
        }
    }
    cols.join(",")
}

pub struct SimulationResult {
    pub csv: String,
    pub meta: SimulationMeta,
    pub history: Vec<ObservableRecord>,
}

/// Runs the configured simulation without touching the filesystem.
pub fn simulate(cfg: &RunConfig, config_bytes: &[u8], tol: f64, force: bool) -> Result<SimulationResult, CliError> {
    let (rep, cl) = report(cfg, tol)?;
    if cl.verdict == Verdict::NotGenerator && !force {
        return Err(CliError::Negative(format!(
            "refusing to simulate: {}; rerun with --force to override",
            rep.summary_line()
        )));
    }
    let spec = cfg.grid_spec()?;
    let time = cfg.time()?.clone();
    let sys = DiscreteSystem::assemble(&cfg.graph()?, &cfg.condition()?, spec).map_err(assembly_to_cli)?;
    let t_max = cfg.min_width().map(|w| contamination_window(&sys, w));
    let u0 = initial_state(cfg, &sys);
    let csv_head = csv_header(&sys);
    let sim = Simulation::new(sys, time.dt).map_err(|e| CliError::Solver(e.to_string()))?;
    let steps = steps_for(time.t_end, time.dt);
    let state = sim.run(&u0, steps, time.record_every).map_err(|e| CliError::Solver(e.to_string()))?;

    let mut csv = csv_head;
    csv.push('\n');
    for r in &state.history {
        csv.push_str(&csv_row(r));
        csv.push('\n');
    }
    let meta = SimulationMeta {
        config_sha256: sha256_hex(config_bytes),
        t_max,
        grid: GridMeta { length: spec.length, points: spec.points_per_edge, h: spec.h() },
        time: TimeMeta { dt: time.dt, t_end: time.t_end, steps, record_every: time.record_every },
        classification: rep,
        forced: force && cl.verdict == Verdict::NotGenerator,
        records: state.history.len(),
        csv: String::new(),
    };
    Ok(SimulationResult { csv, meta, history: state.history })
}

/// Writes the CSV to `out` (or the configured output path) and metadata next to it.
pub fn run(
    cfg: &RunConfig,
    config_bytes: &[u8],
    tol: f64,
    force: bool,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let path = match (out, &cfg.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(o)) => PathBuf::from(&o.path),
        (None, None) => return Err(CliError::Config("no output path: pass --out or set output.path".into())),
    };
    if let Some(o) = &cfg.output {
        if o.format != "csv" {
            return Err(CliError::Config(format!("output.format: unsupported format `{}`", o.format)));
        }
    }
    let mut res = simulate(cfg, config_bytes, tol, force)?;
    res.meta.csv = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    crate::write_file(&path, res.csv.as_bytes())?;
    let mp = meta_path(&path);
    crate::write_file(&mp, crate::to_json(&res.meta).as_bytes())?;
    let mut stdout = String::new();
    if res.meta.forced {
        stdout.push_str("WARNING: forced simulation of a NotGenerator configuration\n");
    }
    stdout.push_str(&format!(
        "{}\nwrote {} records to {} and metadata to {}\n",
        res.meta.classification.summary_line(),
        res.meta.records,
        path.display(),
        mp.display()
    ));
    Ok(Outcome { stdout, code: 0 })
}
