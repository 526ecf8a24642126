//! Command-line front end: instance file I/O, mechanism invocation, audit
//! runs, and a `reproduce` command that re-derives every bound and emits a
//! pass/fail table.
//!
//! Exit codes: 0 on success (including expected witnesses), 1 when a witness
//! or violation appears where none should (or a reproduction row fails), and
//! 2 on usage or input errors.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use report::{NumberValue, OutputValue, RatioRepr, Report, Status, CSV_HEADER};
use tic_core::audit::{
    self, adversary_game, approximation_ratio, default_misreports, deviation_search,
    order_statistic_lower_bound, unknown_lengths_probe, DeviationWitness, GameOutcome,
    GameTranscript, ProbeOutcome, RatioWitness, ViolationWitness,
};
use tic_core::gen::{self, GeneratorParams};
use tic_core::io::{instance_digest, parse_instance, serialize_instance, to_instance_file};
use tic_core::mechanisms::{Mechanism, MechanismId};
use tic_core::reproduce::{run_suite, SuiteConfig};
use tic_core::{Coord, Instance, Lottery, Placement, Span};

#[derive(Parser)]
#[command(
    name = "tic",
    version,
    about = "Interval covering mechanisms: solve, run, audit, reproduce"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Emit an instance file from a named family or the seeded generator.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        /// Agent count (wci1, wci2, two-cluster, singleton-group, random).
        #[arg(long)]
        n: Option<usize>,
        /// Singleton spacing for the family constructors.
        #[arg(long, value_parser = coord_arg)]
        gap: Option<Coord>,
        /// Unit-agent count for weighted-median-worst.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = coord_arg)]
        epsilon: Option<Coord>,
        /// Which instance of the unknown-length pair to emit.
        #[arg(long, value_enum, default_value_t = PairVariant::Base)]
        variant: PairVariant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = coord_arg, default_value = "1/4")]
        grid_step: Coord,
        #[arg(long, value_parser = coord_arg, default_value = "8")]
        span: Coord,
    },
    /// Compute the optimal placement and social cost of an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run a mechanism on an instance.
    Mech {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Mechanism cost over optimal cost, with witness placements.
    Ratio {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Search every agent's default misreport set for profitable deviations.
    Audit {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = coord_arg, default_value = "1/4")]
        grid_step: Coord,
    },
    /// Play the lower-bound game against a deterministic mechanism.
    Adversary {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = coord_arg, default_value = "1/1000")]
        delta: Coord,
    },
    /// Worst-case ratio of an order-statistic mixture over the
    /// singleton/group pair.
    LowerBound {
        /// Comma-separated rational weights, e.g. 1/4,1/4,1/4,1/4.
        #[arg(long)]
        weights: String,
        /// Agent count; defaults to the number of weights.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Unknown-lengths impossibility probe against a mechanism.
    Probe {
        #[arg(long)]
        mechanism: String,
        #[arg(long, value_parser = coord_arg)]
        epsilon: Coord,
    },
    /// Re-derive every bound and print one row per claim.
    Reproduce {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Wci1,
    Wci2,
    TwoCluster,
    SingletonGroup,
    WeightedMedianWorst,
    UnknownLengthPair,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairVariant {
    Base,
    Shrunk,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: tic_core::io::IoError,
    },
    #[error(transparent)]
    Mechanism(#[from] tic_core::mechanisms::MechanismError),
    #[error(transparent)]
    Audit(#[from] audit::AuditError),
    #[error(transparent)]
    Gen(#[from] gen::GenError),
}

fn coord_arg(s: &str) -> Result<Coord, String> {
    s.parse::<Coord>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let echo = command_echo();
    let Cli {
        command,
        format,
        out,
    } = cli;
    match command {
        Command::Generate {
            family,
            n,
            gap,
            k,
            epsilon,
            variant,
            seed,
            grid_step,
            span,
        } => {
            if format == Format::Csv {
                return Err(CliError::Usage(
                    "generate emits instance files; csv does not apply".to_string(),
                ));
            }
            let inst = build_family(family, n, gap, k, epsilon, variant, seed, grid_step, span)?;
            emit(&out, serialize_instance(&inst))?;
            Ok(0)
        }
        Command::Solve { instance } => {
            let inst = load_instance(&instance)?;
            let (placement, cost) = tic_core::solver::optimal_placement(&inst);
            let mut report = Report::new(echo, Status::Ok);
            report.instance_digest = Some(instance_digest(&inst));
            report.output = Some(OutputValue::placement(placement));
            report.optimal_placement = Some(NumberValue::of(placement.s));
            report.optimal_cost = Some(NumberValue::of(cost));
            report.social_cost = Some(NumberValue::of(cost));
            emit_report(format, &out, &report)?;
            Ok(0)
        }
        Command::Mech {
            mechanism,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let mech = build_mechanism(&mechanism)?;
            let lottery = mech.lottery(&inst)?;
            let mut report = Report::new(echo, Status::Ok);
            report.mechanism = Some(mech.id());
            report.instance_digest = Some(instance_digest(&inst));
            report.social_cost = Some(NumberValue::of(inst.expected_social_cost(&lottery)));
            report.output = Some(lottery_output(&lottery));
            emit_report(format, &out, &report)?;
            Ok(0)
        }
        Command::Ratio {
            mechanism,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let mech = build_mechanism(&mechanism)?;
            let ratio = approximation_ratio(mech.as_ref(), &inst)?;
            let mut report = Report::new(echo, Status::Ok);
            report.mechanism = Some(mech.id());
            report.instance_digest = Some(instance_digest(&inst));
            report.social_cost = Some(NumberValue::of(ratio.mechanism_cost));
            report.optimal_cost = Some(NumberValue::of(ratio.optimal_cost));
            report.optimal_placement = Some(NumberValue::of(ratio.optimal_placement.s));
            report.ratio = Some(RatioRepr::of(&ratio.ratio));
            report.output = Some(match &ratio.mechanism_output {
                audit::MechanismOutput::Placement(p) => OutputValue::placement(*p),
                audit::MechanismOutput::Lottery(lot) => OutputValue::lottery(lot),
            });
            emit_report(format, &out, &report)?;
            Ok(0)
        }
        Command::Audit {
            mechanism,
            instance,
            grid_step,
        } => {
            let inst = load_instance(&instance)?;
            let mech = build_mechanism(&mechanism)?;
            let mut witnesses = Vec::new();
            for agent in inst.agents() {
                let misreports = default_misreports(&inst, agent.id, grid_step)?;
                if let Some(w) = deviation_search(mech.as_ref(), &inst, agent.id, &misreports)? {
                    witnesses.push(deviation_json(&w));
                }
            }
            let found = !witnesses.is_empty();
            let mut report = Report::new(echo, if found { Status::Witness } else { Status::Ok });
            report.mechanism = Some(mech.id());
            report.instance_digest = Some(instance_digest(&inst));
            report.detail = Some(json!({ "deviations": witnesses }));
            emit_report(format, &out, &report)?;
            Ok(u8::from(found))
        }
        Command::Adversary {
            mechanism,
            n,
            delta,
        } => {
            let mech = build_mechanism(&mechanism)?;
            let transcript = adversary_game(mech.as_ref(), n, delta)?;
            let (status, code) = match &transcript.outcome {
                GameOutcome::RatioWitness(_) => (Status::Witness, 0),
                GameOutcome::TruthfulnessViolation(_) => (Status::Violation, 1),
                GameOutcome::Exhausted => (Status::Fail, 1),
            };
            let mut report = Report::new(echo, status);
            report.mechanism = Some(mech.id());
            if let GameOutcome::RatioWitness(witness) = &transcript.outcome {
                report.ratio = Some(RatioRepr::of(&witness.report.ratio));
                report.social_cost = Some(NumberValue::of(witness.report.mechanism_cost));
                report.optimal_cost = Some(NumberValue::of(witness.report.optimal_cost));
            }
            report.detail = Some(transcript_json(&transcript));
            emit_report(format, &out, &report)?;
            Ok(code)
        }
        Command::LowerBound { weights, n } => {
            let weights = parse_weights(&weights)?;
            let n = n.unwrap_or(weights.len());
            let bound = order_statistic_lower_bound(&weights, n)?;
            let mut report = Report::new(echo, Status::Ok);
            report.mechanism = Some(format!(
                "convex:{}",
                weights
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            report.ratio = Some(RatioRepr {
                rational: bound.to_string(),
                decimal: Some(bound.decimal_string()),
            });
            emit_report(format, &out, &report)?;
            Ok(0)
        }
        Command::Probe { mechanism, epsilon } => {
            let mech = build_mechanism(&mechanism)?;
            let outcome = unknown_lengths_probe(mech.as_ref(), epsilon)?;
            let (status, code, detail) = match &outcome {
                ProbeOutcome::RatioWitness(w) => (Status::Witness, 0, ratio_witness_json(w)),
                ProbeOutcome::TruthfulnessViolation(v) => (Status::Violation, 1, violation_json(v)),
            };
            let mut report = Report::new(echo, status);
            report.mechanism = Some(mech.id());
            if let ProbeOutcome::RatioWitness(w) = &outcome {
                report.ratio = Some(RatioRepr::of(&w.report.ratio));
                report.social_cost = Some(NumberValue::of(w.report.mechanism_cost));
                report.optimal_cost = Some(NumberValue::of(w.report.optimal_cost));
            }
            report.detail = Some(detail);
            emit_report(format, &out, &report)?;
            Ok(code)
        }
        Command::Reproduce { seed } => {
            let mut config = SuiteConfig::default();
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let rows = run_suite(&config);
            let all_pass = rows.iter().all(|r| r.pass);
            match format {
                Format::Json => {
                    let mut report =
                        Report::new(echo, if all_pass { Status::Ok } else { Status::Fail });
                    report.detail = Some(json!({
                        "claims": rows
                            .iter()
                            .map(|r| json!({
                                "id": r.id,
                                "claim": r.claim,
                                "expected": r.expected,
                                "measured": r.measured,
                                "status": r.status(),
                            }))
                            .collect::<Vec<_>>(),
                    }));
                    emit(&out, report.to_json())?;
                }
                Format::Csv => {
                    let mut lines = vec!["id,claim,expected,measured,status".to_string()];
                    for r in &rows {
                        lines.push(
                            [r.id, &r.claim, &r.expected, &r.measured, r.status()]
                                .iter()
                                .map(|f| report::csv_escape(f))
                                .collect::<Vec<_>>()
                                .join(","),
                        );
                    }
                    emit(&out, lines.join("\n"))?;
                }
            }
            Ok(u8::from(!all_pass))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_family(
    family: Family,
    n: Option<usize>,
    gap: Option<Coord>,
    k: Option<usize>,
    epsilon: Option<Coord>,
    variant: PairVariant,
    seed: u64,
    grid_step: Coord,
    span: Coord,
) -> Result<Instance, CliError> {
    let need_n = || n.ok_or_else(|| CliError::Usage("this family requires --n".to_string()));
    let need_epsilon =
        || epsilon.ok_or_else(|| CliError::Usage("this family requires --epsilon".to_string()));
    let gap = gap.unwrap_or_else(gen::default_gap);
    Ok(match family {
        Family::Wci1 => gen::wci1(need_n()?, gap)?,
        Family::Wci2 => gen::wci2(need_n()?, gap)?,
        Family::TwoCluster => gen::two_cluster_seed(need_n()?)?,
        Family::SingletonGroup => gen::singleton_group(need_n()?, gap)?,
        Family::WeightedMedianWorst => {
            let k = k.ok_or_else(|| CliError::Usage("this family requires --k".to_string()))?;
            gen::weighted_median_worst(k, need_epsilon()?)?
        }
        Family::UnknownLengthPair => {
            let (base, shrunk) = gen::unknown_length_pair(need_epsilon()?)?;
            match variant {
                PairVariant::Base => base,
                PairVariant::Shrunk => shrunk,
            }
        }
        Family::Random => gen::random_instance(&GeneratorParams {
            n: need_n()?,
            seed,
            grid_step,
            span,
        })?,
    })
}

fn build_mechanism(spec: &str) -> Result<Box<dyn Mechanism>, CliError> {
    Ok(match spec {
        "mean-of-lefts" => Box::new(audit::controls::MeanOfLefts),
        "leftmost-cover" => Box::new(audit::controls::LeftmostCover),
        "rightmost-cover" => Box::new(audit::controls::RightmostCover),
        "length-gated-cover" => Box::new(audit::controls::LengthGatedCover),
        _ => Box::new(spec.parse::<MechanismId>()?),
    })
}

fn parse_weights(text: &str) -> Result<Vec<Coord>, CliError> {
    text.split(',')
        .map(|w| {
            w.parse::<Coord>()
                .map_err(|e| CliError::Usage(format!("bad weight {w:?}: {e}")))
        })
        .collect()
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn lottery_output(lottery: &Lottery) -> OutputValue {
    match lottery.as_placement() {
        Some(p) => OutputValue::placement(p),
        None => OutputValue::lottery(lottery),
    }
}

fn span_json(span: &Span) -> serde_json::Value {
    json!({ "s": span.s().to_string(), "length": span.length().to_string() })
}

fn placement_json(p: Placement) -> serde_json::Value {
    json!({ "s": p.s.to_string(), "s_decimal": p.s.decimal_string() })
}

fn deviation_json(w: &DeviationWitness) -> serde_json::Value {
    json!({
        "agent": w.agent_id,
        "true_cost": w.true_cost.to_string(),
        "misreport": span_json(&w.misreport),
        "misreport_cost": w.misreport_cost.to_string(),
        "realization": w.realization,
    })
}

fn ratio_witness_json(w: &RatioWitness) -> serde_json::Value {
    json!({
        "kind": "ratio-witness",
        "instance": to_instance_file(&w.instance),
        "mechanism_cost": w.report.mechanism_cost.to_string(),
        "optimal_cost": w.report.optimal_cost.to_string(),
        "ratio": w.report.ratio.to_string_exact(),
    })
}

fn violation_json(v: &ViolationWitness) -> serde_json::Value {
    json!({
        "kind": "truthfulness-violation",
        "instance": to_instance_file(&v.instance),
        "witness": deviation_json(&v.witness),
    })
}

fn transcript_json(t: &GameTranscript) -> serde_json::Value {
    let steps: Vec<serde_json::Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "instance": to_instance_file(&s.instance),
                "placement": placement_json(s.placement),
                "intersecting": s.intersecting,
                "moved": s.moved.map(|m| json!({
                    "agent": m.id,
                    "report": span_json(&m.report),
                })),
            })
        })
        .collect();
    let outcome = match &t.outcome {
        GameOutcome::RatioWitness(w) => ratio_witness_json(w),
        GameOutcome::TruthfulnessViolation(v) => violation_json(v),
        GameOutcome::Exhausted => json!({ "kind": "exhausted" }),
    };
    json!({
        "mirrored": t.mirrored,
        "family_reached": t.family_reached,
        "steps": steps,
        "outcome": outcome,
    })
}

fn emit_report(format: Format, out: &Option<PathBuf>, report: &Report) -> Result<(), CliError> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => format!("{CSV_HEADER}\n{}", report.to_csv_row()),
    };
    emit(out, text)
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
