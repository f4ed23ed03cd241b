use std::time::Instant;

use relhyp_core::dynamics::{cylinders_avoiding, ConicalOptions};
use relhyp_core::malnormal::bci_sweep;
use relhyp_core::metric::MetricBallGraph;
use relhyp_core::{
    bci_report, build_ball, collapsing_check, conical_certificate, decomposition_partition, four_point_delta,
    is_almost_malnormal, parabolic_certificate, refine_and_check, CollapseSequence, CosetRef, Limits, Word,
    GENERATING_SET,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::dot::{collection_dot, partition_dot};
use crate::error::CliError;

/// Caps read from the environment, falling back to the library defaults.
pub const ENV_CAPS: [&str; 3] = [
    "RELHYP_MAX_BALL_VERTICES",
    "RELHYP_MAX_QUADRUPLES",
    "RELHYP_MAX_COSETS",
];

pub fn limits_from_env() -> Result<Limits, CliError> {
    let mut limits = Limits::default();
    let slots = [
        &mut limits.max_ball_vertices,
        &mut limits.max_quadruples,
        &mut limits.max_cosets,
    ];
    for (var, slot) in ENV_CAPS.iter().zip(slots) {
        if let Ok(v) = std::env::var(var) {
            *slot = v.trim().parse().map_err(|_| {
                CliError::Validation(format!("{var} must be a nonnegative integer, got `{v}`"))
            })?;
        }
    }
    Ok(limits)
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Command,
    pub version: String,
    pub seed: u64,
    pub generating_set: String,
    pub config: ExperimentConfig,
    pub limits: Limits,
    /// The malnormality decision came back negative.
    pub hypothesis_failure: bool,
    pub result: Value,
    pub timing_ms: f64,
}

/// A report plus optional sidecar texts for the DOT and CSV outputs.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub dot: Option<String>,
    pub csv: Option<String>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize to JSON")
}

fn required<T: Clone>(x: &Option<T>, field: &str, command: Command) -> Result<T, CliError> {
    x.clone()
        .ok_or_else(|| CliError::Validation(format!("params.{field} is required for {command}")))
}

/// Runs the configured command.
pub fn run_experiment(config: &ExperimentConfig, limits: &Limits) -> Result<RunOutput, CliError> {
    config.validate()?;
    let command = config
        .command
        .ok_or_else(|| CliError::Validation("no command given".into()))?;
    let mut limits = *limits;
    if let Some(cap) = config.params.ball_cap {
        limits.max_ball_vertices = cap.into();
    }
    let p = &config.params;
    let start = Instant::now();
    let mut dot = None;
    let mut csv = None;
    let mut hypothesis_failure = false;

    let result = match command {
        Command::Delta => {
            let (graph, source) = match &p.graph {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    (
                        MetricBallGraph::parse_adjacency(&text)?,
                        path.display().to_string(),
                    )
                }
                None => {
                    let radius = p.radius.unwrap_or(3);
                    let spec = config.group()?;
                    (
                        build_ball(&spec, radius, &limits)?,
                        format!("free group ball of radius {radius}"),
                    )
                }
            };
            let est = four_point_delta(&graph, &limits, config.seed)?;
            json!({
                "source": source,
                "vertices": graph.vertex_count(),
                "edges": graph.edge_count(),
                "estimate": est,
            })
        }
        Command::Fold => {
            let coll = config.collection()?;
            let cores: Vec<(String, _)> = coll.names().iter().cloned().zip(coll.cores()).collect();
            dot = Some(collection_dot(&cores));
            let list: Vec<Value> = cores
                .iter()
                .map(|(name, core)| {
                    let edges: Vec<Value> = core
                        .edges()
                        .into_iter()
                        .map(|(u, l, v)| json!([u, l.to_string(), v]))
                        .collect();
                    json!({
                        "name": name,
                        "generators": core.generators(),
                        "vertices": core.vertex_count(),
                        "basepoint": core.base(),
                        "edges": edges,
                        "betti_number": core.betti_number(),
                        "finite_index": core.is_finite_index(),
                        "lambda": core.quasiconvexity_constant(),
                    })
                })
                .collect();
            json!({ "subgroups": list })
        }
        Command::Malnormal => {
            let cert = is_almost_malnormal(&config.collection()?)?;
            hypothesis_failure = !cert.verdict;
            to_value(&cert)
        }
        Command::Bci => {
            let coll = config.collection()?;
            let r = p.r.unwrap_or(1);
            match &p.radii {
                Some(radii) => {
                    let sweep = bci_sweep(&coll, r, radii, &limits)?;
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["R", "ball_radius", "D_emp"])?;
                    for (n, d) in &sweep {
                        w.write_record([r.to_string(), n.to_string(), d.to_string()])?;
                    }
                    csv = Some(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii"));
                    let rows: Vec<Value> = sweep
                        .iter()
                        .map(|(n, d)| json!({ "ball_radius": n, "D_emp": d }))
                        .collect();
                    json!({ "R": r, "sweep": rows })
                }
                None => to_value(&bci_report(&coll, r, p.radius.unwrap_or(6), &limits)?),
            }
        }
        Command::Quotient => {
            let part = decomposition_partition(&config.collection()?, p.depth.unwrap_or(2), &limits)?;
            dot = Some(partition_dot(&part));
            let parabolic = part.classes.iter().filter(|c| c.cylinders.len() > 1).count();
            json!({
                "depth": part.depth,
                "cylinders": part.cylinder_count(),
                "class_count": part.class_count(),
                "parabolic_classes": parabolic,
                "singleton_classes": part.class_count() - parabolic,
                "partition": part,
            })
        }
        Command::Refine => {
            let n = p.depth.unwrap_or(1);
            let m = p.deeper.unwrap_or(n + 3);
            to_value(&refine_and_check(&config.collection()?, m, n, &limits)?)
        }
        Command::Collapse => {
            let seq = CollapseSequence::new(p.s.clone().unwrap_or_default(), required(&p.t, "t", command)?)?;
            let depth = p.depth.unwrap_or(3);
            let k =
                p.k.clone()
                    .unwrap_or_else(|| cylinders_avoiding(config.rank, depth, &seq.repeller()));
            let l =
                p.l.clone()
                    .unwrap_or_else(|| cylinders_avoiding(config.rank, depth, &seq.attractor()));
            let partition = if config.subgroups.is_empty() {
                None
            } else {
                Some(decomposition_partition(&config.collection()?, depth, &limits)?)
            };
            to_value(&collapsing_check(
                &seq,
                &k,
                &l,
                depth,
                p.imax.unwrap_or(32),
                partition.as_ref(),
            )?)
        }
        Command::Conical => {
            let x = required(&p.point, "point", command)?;
            let options = ConicalOptions {
                bci_ball_radius: p.radius,
            };
            let cert = conical_certificate(
                &x,
                &config.collection()?,
                p.imax.unwrap_or(8),
                p.depth.unwrap_or(64),
                options,
                &limits,
            )?;
            to_value(&cert)
        }
        Command::Parabolic => {
            let coll = config.collection()?;
            let subgroup = match &p.subgroup {
                Some(name) => config.subgroup_index(name)?,
                None => 0,
            };
            let core = coll.core(subgroup)?;
            let coset = CosetRef {
                subgroup,
                rep: core.coset_min_rep(&p.rep.clone().unwrap_or_else(Word::identity)),
            };
            let delta = config.group()?.delta_ceil();
            let r = p.r.unwrap_or(2 * core.quasiconvexity_constant() + 10 * delta + 1);
            let depth = p.depth.unwrap_or(2 * r + 100 * delta);
            to_value(&parabolic_certificate(&coll, &coset, r, depth, &limits)?)
        }
    };

    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        generating_set: GENERATING_SET.to_string(),
        config: config.clone(),
        limits,
        hypothesis_failure,
        result,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(RunOutput { report, dot, csv })
}

/// Report written when a run fails before producing results.
pub fn error_report(command: Command, config: &ExperimentConfig, err: &CliError) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": config,
        "error": { "code": err.code(), "message": err.to_string() },
    })
}
