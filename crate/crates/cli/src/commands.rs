use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use local_match::coloring::{palette_size, Color};
use local_match::corpus::{generate, CorpusSpec, Family, WeightModel};
use local_match::dlocal::{rounds_u64, simulate_edges, simulate_vertices};
use local_match::error::Error;
use local_match::experiment::{
    outcome_on, round_bound, run_coloring, run_experiment, run_mcm, run_mis, run_mwm, run_orientation, schedule_of,
    Algorithm, ExperimentOptions,
};
use local_match::graph::{parse_graph, parse_weight, serialize_graph, Edge, LabeledGraph, VertexId};
use local_match::mcm::{apx_mcm_query, ApxConfig};
use local_match::mis::mis_vertex;
use local_match::mwm::{apx_mwm_query, ladder_size, MwmContext};
use local_match::verify::{
    exact_mcm, exact_mwm, matching_weight, validate_coloring, validate_graph_mis, validate_matching,
    validate_orientation, Violation, MCM_CAP, MWM_CAP,
};
use num_rational::Ratio;
use serde_json::json;

use crate::report::{write_output, Answers, Report};
use crate::{
    AlgArg, BenchArgs, CliError, Command, EpsArgs, FamilyArg, GenerateArgs, GraphArgs, SimulateArgs, VerifyArgs,
    WeightArg,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate_cmd(a),
        Command::Color(a) => color(a),
        Command::Orient(a) => orient(a),
        Command::Mis(a) => mis(a),
        Command::Mcm(a) => matching(a, Algorithm::Mcm),
        Command::Mwm(a) => matching(a, Algorithm::Mwm),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_graph(path: &Path) -> Result<LabeledGraph> {
    Ok(parse_graph(&read(path)?)?)
}

fn graph_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

pub fn parse_eps(s: &str) -> Result<Ratio<u64>> {
    parse_weight(s).map_err(|e| Error::InvalidParameter(format!("eps: {e}")).into())
}

fn narrow(c: Color) -> Result<u64> {
    u64::try_from(c).map_err(|_| Error::Resource(format!("color {c} exceeds 64 bits")).into())
}

fn narrow_colors(colors: BTreeMap<VertexId, Color>) -> Result<Vec<(VertexId, u64)>> {
    colors.into_iter().map(|(v, c)| Ok((v, narrow(c)?))).collect()
}

fn violation(what: &str, v: Violation) -> CliError {
    CliError::Violation(format!("{what}: {v}"))
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let family = match a.family {
        FamilyArg::Ring => Family::Ring,
        FamilyArg::Path => Family::Path,
        FamilyArg::Grid => Family::Grid {
            rows: a.rows,
            cols: a.cols,
        },
        FamilyArg::Regular => Family::RandomRegular { degree: a.degree },
        FamilyArg::Disjoint => Family::DisjointEdges,
    };
    let n = if a.family == FamilyArg::Grid { a.rows * a.cols } else { a.n };
    let weights = match a.weights {
        WeightArg::Unit => WeightModel::Unit,
        WeightArg::Pow2 => WeightModel::DiscretePowers,
        WeightArg::Rational => WeightModel::UniformRational,
    };
    let spec = CorpusSpec::new(family, n, a.seed).with_weights(weights);
    let g = generate(&spec)?;
    let text = serialize_graph(&g);
    if a.output.json {
        let record = json!({
            "spec": spec.to_string(),
            "n": g.n(),
            "m": g.m(),
            "max_degree": g.max_degree(),
            "graph": text,
        });
        write_output(&a.output, &format!("{record}\n"))
    } else {
        write_output(&a.output, &text)
    }
}

fn color(a: GraphArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let schedule = schedule_of(&g)?;
    let run = run_coloring(&g)?;
    let colors = run.answers.clone().into_iter().collect();
    validate_coloring(&g, &colors, schedule.palette()).map_err(|v| violation("coloring", v))?;
    let used: BTreeSet<Color> = run.answers.values().copied().collect();
    let summary = json!({
        "n": g.n(),
        "max_degree": g.max_degree(),
        "palette": schedule.palette(),
        "rounds": schedule.rounds(),
        "colors_used": used.len(),
        "max_probes": run.max_probes(),
        "max_radius": run.max_radius(),
    });
    Report::new(
        Answers::Coloring {
            palette: narrow(schedule.palette())?,
            colors: narrow_colors(run.answers)?,
        },
        summary,
    )
    .emit(&a.output)
}

fn orient(a: GraphArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let palette = schedule_of(&g)?.palette();
    let run = run_orientation(&g)?;
    let directions: Vec<_> = run.answers.values().copied().collect();
    let longest = validate_orientation(&g, &directions, palette).map_err(|v| violation("orientation", v))?;
    let summary = json!({
        "m": g.m(),
        "palette": palette,
        "longest_path": longest,
        "max_probes": run.max_probes(),
        "max_radius": run.max_radius(),
    });
    Report::new(
        Answers::Orientation {
            palette: narrow(palette)?,
            directions,
        },
        summary,
    )
    .emit(&a.output)
}

fn mis(a: GraphArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let outcome = outcome_on(&g, &graph_name(&a.graph), Algorithm::Mis, Ratio::new(1, 2), ExperimentOptions::default())?;
    validate_graph_mis(&g, &outcome.vertices).map_err(|v| violation("mis", v))?;
    Report::new(
        Answers::Mis {
            vertices: outcome.vertices,
        },
        outcome.metrics,
    )
    .emit(&a.output)
}

fn matching(a: EpsArgs, algorithm: Algorithm) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let eps = parse_eps(&a.eps)?;
    let outcome = outcome_on(&g, &graph_name(&a.graph), algorithm, eps, ExperimentOptions::default())?;
    validate_matching(&g, &outcome.edges).map_err(|v| violation("matching", v))?;
    let mut summary = json!(outcome.metrics);
    if algorithm == Algorithm::Mwm {
        let ctx = MwmContext::for_graph(&g, eps)?;
        let ladder = ladder_size(&ctx.disc, ctx.cfg.k());
        summary["k"] = json!(ctx.cfg.k());
        summary["rounds"] = json!(ctx.cfg.rounds());
        summary["ladder_size"] = json!(ladder.to_string());
        summary["stages"] = json!((ladder * ctx.cfg.rounds()).to_string());
    }
    Report::new(Answers::Matching { edges: outcome.edges }, summary).emit(&a.output)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let eps = parse_eps(&a.eps)?;
    let algorithm = Algorithm::from(a.alg);
    let bound = round_bound(&g, algorithm, eps)?;
    let r = rounds_u64(&bound.parse().expect("bounds are decimal integers"));
    let (answers, rounds_executed, messages, equal) = match a.alg {
        AlgArg::Mis => {
            let out = simulate_vertices(&g, r, mis_vertex)?;
            let equal = out.outputs == run_mis(&g)?.answers;
            let vertices = out.outputs.iter().filter(|(_, &a)| a).map(|(&v, _)| v).collect();
            (Answers::Mis { vertices }, out.rounds_executed, out.messages, equal)
        }
        AlgArg::Mcm => {
            let cfg = ApxConfig::new(eps)?;
            let out = simulate_edges(&g, r.saturating_sub(1), |s, e| apx_mcm_query(s, &cfg, e))?;
            let equal = out.outputs == run_mcm(&g, eps)?.answers;
            (matched(&out.outputs), out.rounds_executed, out.messages, equal)
        }
        AlgArg::Mwm => {
            let ctx = MwmContext::for_graph(&g, eps)?;
            let out = simulate_edges(&g, r.saturating_sub(1), |s, e| apx_mwm_query(s, &ctx, e))?;
            let equal = out.outputs == run_mwm(&g, eps)?.answers;
            (matched(&out.outputs), out.rounds_executed, out.messages, equal)
        }
    };
    let summary = json!({
        "algorithm": algorithm,
        "eps": eps.to_string(),
        "round_bound": bound,
        "rounds_executed": rounds_executed,
        "messages": messages,
        "equal_to_direct": equal,
    });
    Report::new(answers, summary).emit(&a.output)?;
    if equal {
        Ok(())
    } else {
        Err(CliError::Violation("simulated answers differ from direct answers".into()))
    }
}

fn matched(outputs: &BTreeMap<Edge, bool>) -> Answers {
    Answers::Matching {
        edges: outputs.iter().filter(|(_, &a)| a).map(|(&e, _)| e).collect(),
    }
}

/// Validates `answers`; returns extra summary fields.
fn check(g: &LabeledGraph, answers: &Answers) -> std::result::Result<serde_json::Value, Violation> {
    let params = g.params();
    Ok(match answers {
        Answers::Coloring { colors, .. } => {
            let palette = palette_size(params.max_degree as u64, params.id_bound.into()).unwrap_or(Color::MAX);
            let colors = colors.iter().map(|&(v, c)| (v, Color::from(c))).collect();
            validate_coloring(g, &colors, palette)?;
            json!({"palette": palette})
        }
        Answers::Orientation { directions, .. } => {
            let palette = palette_size(params.max_degree as u64, params.id_bound.into()).unwrap_or(Color::MAX);
            json!({"longest_path": validate_orientation(g, directions, palette)?})
        }
        Answers::Mis { vertices } => {
            validate_graph_mis(g, vertices)?;
            json!({"size": vertices.len()})
        }
        Answers::Matching { edges } => {
            validate_matching(g, edges)?;
            let mut extra = json!({"size": edges.len(), "weight": matching_weight(g, edges).to_string()});
            if g.n() <= MCM_CAP {
                if let Ok(opt) = exact_mcm(g) {
                    extra["optimum_size"] = json!(opt.value);
                }
            }
            if g.is_weighted() && g.n() <= MWM_CAP {
                if let Ok(opt) = exact_mwm(g) {
                    extra["optimum_weight"] = json!(opt.value.to_string());
                }
            }
            extra
        }
    })
}

fn kind(answers: &Answers) -> &'static str {
    match answers {
        Answers::Coloring { .. } => "coloring",
        Answers::Orientation { .. } => "orientation",
        Answers::Mis { .. } => "mis",
        Answers::Matching { .. } => "matching",
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let battery: Vec<Answers> = match &a.answers {
        Some(path) => vec![serde_json::from_str(&read(path)?)?],
        None => {
            let eps = parse_eps(&a.eps)?;
            let palette = narrow(schedule_of(&g)?.palette())?;
            let mut battery = vec![
                Answers::Coloring {
                    palette,
                    colors: narrow_colors(run_coloring(&g)?.answers)?,
                },
                Answers::Orientation {
                    palette,
                    directions: run_orientation(&g)?.answers.into_values().collect(),
                },
                Answers::Mis {
                    vertices: run_mis(&g)?.selected(),
                },
                Answers::Matching {
                    edges: run_mcm(&g, eps)?.selected(),
                },
            ];
            if g.is_weighted() {
                battery.push(Answers::Matching {
                    edges: run_mwm(&g, eps)?.selected(),
                });
            }
            battery
        }
    };
    let mut results = Vec::new();
    let mut first_violation = None;
    for answers in &battery {
        match check(&g, answers) {
            Ok(extra) => results.push(json!({"kind": kind(answers), "valid": true, "details": extra})),
            Err(v) => {
                results.push(json!({"kind": kind(answers), "valid": false, "violation": v.to_string()}));
                first_violation.get_or_insert_with(|| violation(kind(answers), v));
            }
        }
    }
    Report::summary(json!({"checks": results})).emit(&a.output)?;
    match first_violation {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn bench_corpus(max_n: usize, seed: u64, algorithm: Algorithm) -> Vec<CorpusSpec> {
    if algorithm == Algorithm::Mwm {
        let base = [
            CorpusSpec::new(Family::Ring, 10, seed),
            CorpusSpec::grid(3, 3, seed),
            CorpusSpec::new(Family::RandomRegular { degree: 3 }, 10, seed),
        ];
        return base
            .into_iter()
            .flat_map(|s| [WeightModel::DiscretePowers, WeightModel::UniformRational].map(|w| s.with_weights(w)))
            .filter(|s| s.n <= max_n)
            .collect();
    }
    let mut out = Vec::new();
    for n in [16, 64, 256].into_iter().filter(|&n| n <= max_n) {
        out.push(CorpusSpec::new(Family::Ring, n, seed));
        out.push(CorpusSpec::new(Family::Path, n, seed));
        out.push(CorpusSpec::grid(2, n / 2, seed));
        out.push(CorpusSpec::new(Family::RandomRegular { degree: 3 }, n, seed));
    }
    out
}

fn bench(a: BenchArgs) -> Result<()> {
    let eps = parse_eps(&a.eps)?;
    let opts = ExperimentOptions {
        simulate: a.simulate,
        wall_time: a.wall_time,
    };
    let algorithms = match a.alg {
        Some(alg) => vec![Algorithm::from(alg)],
        None => vec![Algorithm::Mis, Algorithm::Mcm, Algorithm::Mwm],
    };
    let mut body = String::new();
    for algorithm in algorithms {
        for spec in bench_corpus(a.max_n, a.seed, algorithm) {
            let m = run_experiment(&spec, algorithm, eps, opts)?;
            if a.output.json {
                body.push_str(&serde_json::to_string(&m)?);
            } else {
                body.push_str(&format!(
                    "{}\t{}\teps={}\tsize={}\tratio={}\tmax_radius={}\tmax_probes={}",
                    m.graph,
                    m.algorithm,
                    m.eps,
                    m.size,
                    m.ratio.map_or("-".into(), |r| format!("{r:.3}")),
                    m.max_radius,
                    m.max_probes,
                ));
            }
            body.push('\n');
        }
    }
    write_output(&a.output, &body)
}
