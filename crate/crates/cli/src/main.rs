use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bphz::coincidence::{coincidence_probe, plan_coincidence, verify_decomposition, PartStatus};
use bphz::config::ConfigurationSpec;
use bphz::field_equation::{field_eq_decomposition, fuse_wave_edge, wave_degree_split};
use bphz::forest::{enumerate_forests_with, renormalization_parts_with, Connectivity};
use bphz::poly::qf;
use bphz::power_counting::{
    codegree, uv_degree, uv_degree_from_monomials, validate_assignment, Degrees,
    SubtractionAssignment,
};
use bphz::subtraction::{default_lambdas, r_operation_detailed, remainder_probe, ForestValue};
use bphz::zimmermann::{locality_checks, zi_corrections, zi_group_report, zi_verify};
use bphz::{random_configurations, BoundingBox, Configuration, Error, FeynmanGraph, Q};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "bphz",
    version,
    about = "Exact configuration-space BPHZ checks on Feynman multigraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// UV degree, subtraction degree and codegree of a vertex set.
    Degree {
        graph: PathBuf,
        /// Comma-separated vertex ids; defaults to the whole graph.
        #[arg(long)]
        part: Option<String>,
        #[command(flatten)]
        assignment: AssignmentArg,
    },
    /// Renormalization parts.
    Parts {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
        /// Require one-particle irreducibility instead of connectedness.
        #[arg(long)]
        one_pi: bool,
    },
    /// Zimmermann forests.
    Forests {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
        #[arg(long)]
        one_pi: bool,
    },
    /// Forest-formula value at sampled or given configurations.
    Eval {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        one_pi: bool,
    },
    /// Difference of two assignments against the sum of correction terms.
    ZiCheck {
        graph: PathBuf,
        /// First assignment: preset name or JSON file.
        #[arg(long)]
        a: String,
        /// Second assignment: preset name or JSON file.
        #[arg(long)]
        b: String,
        #[command(flatten)]
        configs: ConfigArgs,
    },
    /// Coincidence-limit decomposition over the graph's limit set.
    JoinCheck {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
        #[command(flatten)]
        configs: ConfigArgs,
    },
    /// Scaling probe: a Taylor remainder for `--part`, otherwise the coincidence limit.
    Probe {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
        #[arg(long)]
        part: Option<String>,
        /// Taylor degree for `--part`; defaults to the part's subtraction degree.
        #[arg(long)]
        degree: Option<i64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Scales are 2^-k for k in this inclusive range, e.g. `3..10`.
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Fuse the edge on a wave-operator slot.
    Fuse {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        slot: usize,
        /// Also check the two-vertex decomposition behind the fusion.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        assignment: AssignmentArg,
        #[command(flatten)]
        configs: ConfigArgs,
        /// Report the degree split for a monomial of this dimension.
        #[arg(long)]
        phi_dim: Option<i64>,
    },
    /// Check the recursive consistency inequality of an assignment.
    Validate {
        graph: PathBuf,
        #[command(flatten)]
        assignment: AssignmentArg,
    },
}

#[derive(Args)]
struct AssignmentArg {
    /// Preset (`minimal`, `deg+K-on-V0`, `deg+K-on-<id>`) or assignment JSON file.
    #[arg(long = "assignment", default_value = "minimal")]
    assignment: String,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// JSON file with one configuration or an array of them; overrides sampling.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<FeynmanGraph, Error> {
    FeynmanGraph::from_json(&read(path)?)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_assignment(g: &FeynmanGraph, spec: &str) -> Result<SubtractionAssignment, Error> {
    if let Some(preset) = SubtractionAssignment::preset(g, spec) {
        return preset;
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Input(format!(
            "'{spec}' is neither a preset nor an assignment file"
        )));
    }
    serde_json::from_str(&read(path)?).map_err(|e| Error::Input(format!("{spec}: {e}")))
}

fn load_configs(g: &FeynmanGraph, args: &ConfigArgs) -> Result<Vec<Configuration>, Error> {
    match &args.config {
        Some(path) => {
            let text = read(path)?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let specs: Vec<ConfigurationSpec> = match value {
                Value::Array(_) => serde_json::from_value(value),
                other => serde_json::from_value(other).map(|c| vec![c]),
            }
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            specs
                .iter()
                .map(|s| Configuration::from_spec(g, s))
                .collect()
        }
        None => {
            if args.n == 0 {
                return Err(Error::Input("--n must be at least 1".into()));
            }
            random_configurations(g, args.seed, args.n, &BoundingBox::default())
        }
    }
}

fn parse_lambdas(spec: Option<&str>) -> Result<Vec<Q>, Error> {
    let Some(spec) = spec else {
        return Ok(default_lambdas());
    };
    let bad = || Error::Input(format!("--lambdas expects `lo..hi`, got '{spec}'"));
    let (lo, hi) = spec.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi || hi > 62 {
        return Err(bad());
    }
    Ok((lo..=hi).map(|k| qf(1, 1i64 << k)).collect())
}

fn part_of(g: &FeynmanGraph, part: Option<&str>) -> Result<u64, Error> {
    match part {
        None => Ok(g.all()),
        Some(list) => {
            let ids: Vec<&str> = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            Ok(g.vset_of(&ids)?)
        }
    }
}

fn connectivity(one_pi: bool) -> Connectivity {
    if one_pi {
        Connectivity::OnePi
    } else {
        Connectivity::Connected
    }
}

/// Report plus whether every check in it passed.
struct Outcome {
    report: Value,
    ok: bool,
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Degree {
            graph,
            part,
            assignment,
        } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let s = part_of(&g, part.as_deref())?;
            let d = Degrees::resolve(&g, &a)?;
            let delta = d.delta(&g, s);
            let is_part = g.num_induced_edges(s) > 0 && g.is_connected(s) && delta >= 0;
            Ok(Outcome {
                report: json!({
                    "part": g.ids(s),
                    "uv_degree": uv_degree(&g, s),
                    "uv_degree_from_monomials": uv_degree_from_monomials(&g, s),
                    "subtraction_degree": delta,
                    "codegree": codegree(&g, s),
                    "status": if is_part { "renormalization part" } else { "not a renormalization part" },
                }),
                ok: true,
            })
        }
        Command::Parts {
            graph,
            assignment,
            one_pi,
        } => {
            let g = load_graph(&graph)?;
            let d = Degrees::resolve(&g, &load_assignment(&g, &assignment.assignment)?)?;
            let parts: Vec<Value> = renormalization_parts_with(&g, &d, connectivity(one_pi))
                .into_iter()
                .map(|s| json!({"vertices": g.ids(s), "uv_degree": uv_degree(&g, s), "delta": d.delta(&g, s)}))
                .collect();
            Ok(Outcome {
                report: json!({"count": parts.len(), "parts": parts}),
                ok: true,
            })
        }
        Command::Forests {
            graph,
            assignment,
            one_pi,
        } => {
            let g = load_graph(&graph)?;
            let d = Degrees::resolve(&g, &load_assignment(&g, &assignment.assignment)?)?;
            let forests: Vec<Value> = enumerate_forests_with(&g, &d, connectivity(one_pi))
                .iter()
                .map(|f| {
                    json!({
                        "parts": f.parts.iter().map(|&(s, _)| g.ids(s)).collect::<Vec<_>>(),
                        "degrees": f.parts.iter().map(|&(_, k)| k).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(Outcome {
                report: json!({"count": forests.len(), "forests": forests}),
                ok: true,
            })
        }
        Command::Eval {
            graph,
            assignment,
            configs,
            one_pi,
        } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let configs = load_configs(&g, &configs)?;
            let d = Degrees::resolve(&g, &a)?;
            let mut rows = Vec::new();
            for c in &configs {
                let r = r_operation_detailed(&g, &d, connectivity(one_pi), c)?;
                let forests: Vec<ForestValue> = r
                    .per_forest
                    .iter()
                    .map(|(f, v)| ForestValue {
                        parts: f.parts.iter().map(|&(s, _)| g.ids(s)).collect(),
                        degrees: f.parts.iter().map(|&(_, k)| k).collect(),
                        value: v.to_string(),
                    })
                    .collect();
                rows.push(json!({
                    "configuration": c.to_spec(),
                    "forests": forests,
                    "total": r.total.to_string(),
                    "tadpole": r.tadpole,
                    "constant_annihilation": r.constant_annihilation,
                }));
            }
            Ok(Outcome {
                report: json!({"results": rows}),
                ok: true,
            })
        }
        Command::ZiCheck {
            graph,
            a,
            b,
            configs,
        } => {
            let g = load_graph(&graph)?;
            let a1 = load_assignment(&g, &a)?;
            let a2 = load_assignment(&g, &b)?;
            let configs = load_configs(&g, &configs)?;
            let d1 = Degrees::resolve(&g, &a1)?;
            let d2 = Degrees::resolve(&g, &a2)?;
            let rows = zi_verify(&g, &d1, &d2, &configs)?;
            let terms = zi_corrections(&g, &d1, &d2);
            let equal = rows.iter().filter(|r| r.equal).count();
            let local = g.num_vertices() <= 4 && g.self_loops().is_empty();
            let locality = if local {
                Some(locality_checks(&g, &d1, &d2)?)
            } else {
                None
            };
            let all_local = locality.as_ref().is_none_or(|l| l.iter().all(|c| c.local));
            Ok(Outcome {
                ok: equal == rows.len() && all_local,
                report: json!({
                    "rows": rows,
                    "summary": {
                        "configurations": rows.len(),
                        "equal": equal,
                        "correction_terms": terms.len(),
                        "groups": zi_group_report(&g, &d1, &d2),
                        "locality": locality,
                    },
                }),
            })
        }
        Command::JoinCheck {
            graph,
            assignment,
            configs,
        } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let configs = load_configs(&g, &configs)?;
            let plan = plan_coincidence(&g, &a)?;
            let rows = verify_decomposition(&plan, &configs)?;
            let equal = rows.iter().filter(|r| r.equal).count();
            let transfer: Vec<Value> = plan
                .part_transfer
                .iter()
                .map(|t| {
                    json!({
                        "delta_part": plan.delta.ids(t.part),
                        "split_preimage": g.ids(t.sigma),
                        "delta_degree": t.delta_degree,
                        "gamma_degree": t.gamma_degree,
                        "status": t.status,
                        "window": t.window(),
                    })
                })
                .collect();
            let images: Vec<Value> = plan
                .gamma_images
                .iter()
                .map(|i| {
                    json!({
                        "gamma_part": g.ids(i.part),
                        "image": plan.delta.ids(i.image),
                        "degree": i.degree,
                        "status": i.status,
                        "overlap_involved": i.overlap_involved,
                    })
                })
                .collect();
            let families: Vec<Vec<Vec<String>>> = plan
                .overlap_families
                .iter()
                .map(|f| f.zetas.iter().map(|&z| g.ids(z)).collect())
                .collect();
            Ok(Outcome {
                ok: equal == rows.len(),
                report: json!({
                    "plan": {
                        "joined_graph": plan.delta.to_spec(),
                        "part_transfer": transfer,
                        "gamma_parts": images,
                        "overlap_families": families,
                        "new_parts": plan.part_transfer.iter().filter(|t| t.status == PartStatus::New).count(),
                        "nested_changed_parts": plan.nested_changed,
                    },
                    "rows": rows,
                    "summary": {"configurations": rows.len(), "equal": equal},
                }),
            })
        }
        Command::Probe {
            graph,
            assignment,
            part,
            degree,
            seed,
            lambdas,
        } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let lambdas = parse_lambdas(lambdas.as_deref())?;
            let base = random_configurations(&g, seed, 1, &BoundingBox::default())?.remove(0);
            match part {
                Some(list) => {
                    let s = part_of(&g, Some(&list))?;
                    let d = degree.unwrap_or(Degrees::resolve(&g, &a)?.delta(&g, s));
                    let p = remainder_probe(&g, s, d, &base, &lambdas)?;
                    let rows: Vec<Value> = p
                        .rows
                        .iter()
                        .map(|&(l, plain, sub)| json!({"lambda": l, "value_plain": plain, "value_subtracted": sub}))
                        .collect();
                    Ok(Outcome {
                        report: json!({
                            "part": g.ids(s),
                            "degree": d,
                            "rows": rows,
                            "exponent_plain": p.exponent_plain,
                            "exponent_subtracted": p.exponent_subtracted,
                            "improvement": p.improvement(),
                        }),
                        ok: true,
                    })
                }
                None => {
                    let plan = plan_coincidence(&g, &a)?;
                    let p = coincidence_probe(&plan, &base, &lambdas)?;
                    let improvement = p.improvement();
                    let mut report = to_value(&p);
                    report["improvement"] = json!(improvement);
                    Ok(Outcome { report, ok: true })
                }
            }
        }
        Command::Fuse {
            graph,
            vertex,
            slot,
            verify,
            assignment,
            configs,
            phi_dim,
        } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let split = phi_dim.map(wave_degree_split).transpose()?;
            if verify {
                let configs = load_configs(&g, &configs)?;
                let report = field_eq_decomposition(&g, &vertex, slot, &a, &configs)?;
                let ok = report.rows.iter().all(|r| r.equal);
                let mut value = to_value(&report);
                value["wave_degree_split"] = to_value(split);
                Ok(Outcome { report: value, ok })
            } else {
                let record = fuse_wave_edge(&g, &vertex, slot)?;
                let mut value = to_value(record.report());
                value["wave_degree_split"] = to_value(split);
                Ok(Outcome {
                    report: value,
                    ok: true,
                })
            }
        }
        Command::Validate { graph, assignment } => {
            let g = load_graph(&graph)?;
            let a = load_assignment(&g, &assignment.assignment)?;
            let parts = validate_assignment(&g, &a)?;
            let valid = parts.iter().all(|p| p.violations.is_empty());
            Ok(Outcome {
                report: json!({"valid": valid, "parts": parts}),
                ok: valid,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}").and_then(|_| out.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
