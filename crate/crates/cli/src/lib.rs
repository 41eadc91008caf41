//! Command line for the diagnosis toolkit.
//!
//! Every invocation prints one JSON result document on stdout (except
//! `export-dot`, which prints raw DOT) and exits with:
//!
//! * 0: affirmative verdict (diagnosable, member, synthesized, within budget)
//! * 1: negative verdict (not diagnosable, not a member, no observer, over budget)
//! * 2: bad input (unreadable file, parse error, unknown event, invalid model)
//! * 3: a resource cap was hit before the analysis finished
//!
//! [`run`] is the whole program; `main` only forwards argv and the exit code,
//! so integration tests can call the binary without spawning it.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use dynobs_core::cost::{observer_cost, Rational};
use dynobs_core::diagnosis::{
    check_dynamic, check_static, min_k_dynamic, min_k_static, Lasso, Verdict, DEFAULT_CAP,
};
use dynobs_core::dot::export_dot;
use dynobs_core::game::{
    bounded_cost_observer, optimal_cost_observer, BoundedOutcome, OptimalOutcome,
};
use dynobs_core::io::{
    parse_model, parse_observer, parse_plant, parse_rational, parse_raw_observer, render_rational,
    serialize_mpo, serialize_observer, sniff_kind, ModelDocument,
};
use dynobs_core::synthesis::{
    extract_observer, most_permissive_observer, mpo_membership, Membership, Selector, Synthesis,
};
use dynobs_core::{
    validate_observer, Alphabet, Error, EventSet, Label, Observer, Plant, EPS_TOKEN, FAULT_TOKEN,
};
use serde::Serialize;

/// Environment variable consulted for the cap when `--cap` is absent.
pub const CAP_ENV: &str = "DYNOBS_CAP";

const SCHEMA: &str = "dynobs.result/v1";

#[derive(Parser)]
#[command(
    name = "dynobs",
    version,
    about = "Fault diagnosis of discrete-event systems with dynamic observers"
)]
struct Cli {
    /// Seed for the randomized selector.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on constructed state spaces; defaults to $DYNOBS_CAP or 2^20.
    #[arg(long, global = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a model file and report whether it is well formed.
    Validate {
        /// Plant, observer, mpo, or game file.
        file: PathBuf,
    },
    /// Check diagnosability under a fixed watch set.
    DiagnoseStatic {
        #[arg(long)]
        plant: PathBuf,
        /// Comma-separated events to watch ("" for the empty set).
        #[arg(long, value_delimiter = ',', required = true)]
        observe: Vec<String>,
        /// Delay bound; when absent, report the least delay that works.
        #[arg(long)]
        k: Option<u32>,
    },
    /// Check diagnosability under a dynamic observer.
    Diagnose {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        /// Delay bound; when absent, report the least delay that works.
        #[arg(long)]
        k: Option<u32>,
    },
    /// Compute the most permissive observer for a delay bound.
    Synthesize {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        k: u32,
        /// Also write the result as a model file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether an observer is a strategy of the most permissive one.
    Membership {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        obs: PathBuf,
    },
    /// Extract one concrete observer from the most permissive one.
    Extract {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        selector: SelectorArg,
    },
    /// Long-run average cost of running an observer on a plant.
    Cost {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        obs: PathBuf,
    },
    /// Cheapest diagnosing observer, optionally gated by a budget.
    Optimal {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        k: u32,
        /// Exact fraction like `1/2`; verdict is negative above it.
        #[arg(long, allow_hyphen_values = true)]
        budget: Option<String>,
    },
    /// Render any model file as Graphviz DOT on stdout.
    ExportDot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Validate { .. } => "validate",
            Cmd::DiagnoseStatic { .. } => "diagnose-static",
            Cmd::Diagnose { .. } => "diagnose",
            Cmd::Synthesize { .. } => "synthesize",
            Cmd::Membership { .. } => "membership",
            Cmd::Extract { .. } => "extract",
            Cmd::Cost { .. } => "cost",
            Cmd::Optimal { .. } => "optimal",
            Cmd::ExportDot { .. } => "export-dot",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectorArg {
    /// Lexicographically least watch set at every choice.
    LexLeast,
    /// Fewest watched events at every choice.
    Smallest,
    /// Most watched events at every choice.
    Largest,
    /// Uniform choice driven by --seed.
    Random,
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Ok,
    Negative,
    InputError,
    ResourceLimit,
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Ok => 0,
        Status::Negative => 1,
        Status::InputError => 2,
        Status::ResourceLimit => 3,
    }
}

/// One result document per invocation; absent sections are omitted from the
/// JSON so each command exposes only its own payload.
#[derive(Serialize)]
struct ResultDoc {
    schema: &'static str,
    command: &'static str,
    argv: Vec<String>,
    status: Status,
    cap: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_completed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<VerdictDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthesis: Option<SynthesisDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    membership: Option<MembershipDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<CostDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal: Option<OptimalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelDoc>,
}

impl ResultDoc {
    fn new(command: &'static str, argv: &[String], cap: usize, seed: u64) -> ResultDoc {
        ResultDoc {
            schema: SCHEMA,
            command,
            argv: argv.to_vec(),
            status: Status::Ok,
            cap,
            seed,
            error: None,
            epsilon_completed: None,
            validation: None,
            verdict: None,
            synthesis: None,
            membership: None,
            cost: None,
            optimal: None,
            model: None,
        }
    }

    fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct ValidationDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    valid: bool,
    defects: Vec<String>,
}

#[derive(Serialize)]
struct VerdictDoc {
    diagnosable: bool,
    /// Delay bound that was checked, echoed from --k.
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    /// Least delay that works, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    min_k: Option<u32>,
    /// Watch set of a static check, echoed from --observe.
    #[serde(skip_serializing_if = "Option::is_none")]
    watch: Option<Vec<String>>,
    twin_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<RunPairDoc>,
}

/// A faulty and a fault-free run with identical observations.
#[derive(Serialize)]
struct RunPairDoc {
    faulty: LassoDoc,
    nonfaulty: LassoDoc,
}

/// Finite stem plus a cycle to pump; an empty cycle means a finite refutation.
#[derive(Serialize)]
struct LassoDoc {
    start: String,
    stem: Vec<StepDoc>,
    cycle: Vec<StepDoc>,
}

#[derive(Serialize)]
struct StepDoc {
    label: String,
    to: String,
}

#[derive(Serialize)]
struct SynthesisDoc {
    present: bool,
    arena_p1: usize,
    arena_p2: usize,
    knowledge_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    choice_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wait_nodes: Option<usize>,
}

#[derive(Serialize)]
struct MembershipDoc {
    member: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<ViolationDoc>,
}

#[derive(Serialize)]
struct ViolationDoc {
    /// Annotated history up to the offending decision, like `{a}·a·{b}`.
    history: String,
    /// Watch set the observer picked there.
    watch: Vec<String>,
    /// Watch sets the most permissive observer allows there.
    allowed: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct CostDoc {
    value: RationalDoc,
    /// Product cycle attaining the maximum mean, as (plant, observer) states.
    cycle: Vec<CycleStateDoc>,
    product_states: usize,
}

#[derive(Serialize)]
struct CycleStateDoc {
    plant: String,
    observer: String,
}

#[derive(Serialize)]
struct OptimalDoc {
    /// Whether any observer diagnoses the plant at this delay bound.
    diagnosable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<RationalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<RationalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    within_budget: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    game_vertices: Option<usize>,
}

/// Exact rational as numerator/denominator plus the `p/q` spelling.
#[derive(Serialize)]
struct RationalDoc {
    num: i64,
    den: i64,
    text: String,
}

#[derive(Serialize)]
struct ModelDoc {
    kind: &'static str,
    name: String,
    /// Canonical model-file text, reparseable by `validate` and `export-dot`.
    text: String,
}

enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Msg(String),
}

impl CliError {
    fn status(&self) -> Status {
        match self {
            CliError::Core(Error::ResourceCap { .. })
            | CliError::Core(Error::RunLengthCap { .. }) => Status::ResourceLimit,
            _ => Status::InputError,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io(path, e) => write!(f, "cannot read `{}`: {e}", path.display()),
            CliError::Msg(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Core(e)
    }
}

/// Run the CLI on `argv` (including the program name). Returns the exit code
/// and everything that should land on stdout.
pub fn run(argv: &[String]) -> (i32, String) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        // Help and version requests are "errors" to clap but exit 0; real
        // usage errors keep clap's message and exit 2.
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let mut doc = ResultDoc::new(cli.command.name(), &echo, 0, cli.seed);
    let cap = match resolve_cap(cli.cap) {
        Ok(cap) => cap,
        Err(e) => return fail(doc, e),
    };
    doc.cap = cap;

    // export-dot bypasses the JSON envelope on success.
    if let Cmd::ExportDot { input } = &cli.command {
        return match read_model(input) {
            Ok(model) => (0, export_dot(&model)),
            Err(e) => fail(doc, e),
        };
    }

    match dispatch(&cli.command, cap, cli.seed, &mut doc) {
        Ok(status) => {
            doc.status = status;
            (exit_code(status), doc.render())
        }
        Err(e) => fail(doc, e),
    }
}

fn fail(mut doc: ResultDoc, e: CliError) -> (i32, String) {
    doc.status = e.status();
    doc.error = Some(e.to_string());
    (exit_code(doc.status), doc.render())
}

fn dispatch(cmd: &Cmd, cap: usize, seed: u64, doc: &mut ResultDoc) -> Result<Status, CliError> {
    match cmd {
        Cmd::Validate { file } => validate_cmd(file, doc),
        Cmd::DiagnoseStatic { plant, observe, k } => {
            let plant = read_plant(plant)?;
            let sub = event_set(plant.alphabet(), observe)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let v = match k {
                Some(k) => check_static(&plant, sub, *k, cap)?,
                None => min_k_static(&plant, sub, cap)?,
            };
            let mut vd = verdict_doc(&plant, &v, *k);
            vd.watch = Some(set_names(plant.alphabet(), sub));
            doc.verdict = Some(vd);
            Ok(polarity(v.diagnosable))
        }
        Cmd::Diagnose { plant, obs, k } => {
            let plant = read_plant(plant)?;
            let obs = read_observer(obs)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let v = match k {
                Some(k) => check_dynamic(&plant, &obs, *k, cap)?,
                None => min_k_dynamic(&plant, &obs, cap)?,
            };
            doc.verdict = Some(verdict_doc(&plant, &v, *k));
            Ok(polarity(v.diagnosable))
        }
        Cmd::Synthesize { plant, k, out } => {
            let plant = read_plant(plant)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let synth = most_permissive_observer(&plant, *k, cap)?;
            doc.synthesis = Some(synthesis_doc(&synth));
            let Some(mpo) = &synth.mpo else {
                return Ok(Status::Negative);
            };
            let text = serialize_mpo(mpo);
            if let Some(path) = out {
                std::fs::write(path, &text).map_err(|e| CliError::Io(path.clone(), e))?;
            }
            doc.model = Some(ModelDoc {
                kind: "mpo",
                name: mpo.name.clone(),
                text,
            });
            Ok(Status::Ok)
        }
        Cmd::Membership { plant, k, obs } => {
            let plant = read_plant(plant)?;
            let obs = read_observer(obs)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let synth = most_permissive_observer(&plant, *k, cap)?;
            doc.synthesis = Some(synthesis_doc(&synth));
            let Some(mpo) = &synth.mpo else {
                // Nothing diagnoses the plant at this k, so the strategy set
                // is empty and no observer belongs to it.
                doc.membership = Some(MembershipDoc {
                    member: false,
                    violation: None,
                });
                return Ok(Status::Negative);
            };
            match mpo_membership(mpo, &obs)? {
                Membership::Member => {
                    doc.membership = Some(MembershipDoc {
                        member: true,
                        violation: None,
                    });
                    Ok(Status::Ok)
                }
                Membership::NotMember(v) => {
                    let al = &mpo.alphabet;
                    doc.membership = Some(MembershipDoc {
                        member: false,
                        violation: Some(ViolationDoc {
                            history: v.history.render(al),
                            watch: set_names(al, v.watch),
                            allowed: v.allowed.iter().map(|&s| set_names(al, s)).collect(),
                        }),
                    });
                    Ok(Status::Negative)
                }
            }
        }
        Cmd::Extract { plant, k, selector } => {
            let plant = read_plant(plant)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let synth = most_permissive_observer(&plant, *k, cap)?;
            doc.synthesis = Some(synthesis_doc(&synth));
            let Some(mpo) = &synth.mpo else {
                return Ok(Status::Negative);
            };
            let sel = match selector {
                SelectorArg::LexLeast => Selector::LexLeast,
                SelectorArg::Smallest => Selector::Smallest,
                SelectorArg::Largest => Selector::Largest,
                SelectorArg::Random => Selector::Random(seed),
            };
            let obs = extract_observer(mpo, sel);
            doc.model = Some(observer_model(&obs));
            Ok(Status::Ok)
        }
        Cmd::Cost { plant, obs } => {
            let plant = read_plant(plant)?;
            let obs = read_observer(obs)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            let c = observer_cost(&plant, &obs)?;
            doc.cost = Some(CostDoc {
                value: rational_doc(c.value),
                cycle: c
                    .cycle
                    .iter()
                    .map(|&(p, o)| CycleStateDoc {
                        plant: plant.state_name(p).to_string(),
                        observer: obs.state_name(o).to_string(),
                    })
                    .collect(),
                product_states: c.product_states,
            });
            Ok(Status::Ok)
        }
        Cmd::Optimal { plant, k, budget } => {
            let plant = read_plant(plant)?;
            doc.epsilon_completed = Some(plant.epsilon_complete().1);
            match budget {
                None => match optimal_cost_observer(&plant, *k, cap)? {
                    OptimalOutcome::NoObserver => {
                        doc.optimal = Some(OptimalDoc {
                            diagnosable: false,
                            cost: None,
                            budget: None,
                            within_budget: None,
                            game_vertices: None,
                        });
                        Ok(Status::Negative)
                    }
                    OptimalOutcome::Found(opt) => {
                        doc.optimal = Some(OptimalDoc {
                            diagnosable: true,
                            cost: Some(rational_doc(opt.cost)),
                            budget: None,
                            within_budget: None,
                            game_vertices: Some(opt.game_vertices),
                        });
                        doc.model = Some(observer_model(&opt.observer));
                        Ok(Status::Ok)
                    }
                },
                Some(text) => {
                    let budget = parse_rational(text)?;
                    if budget < Rational::from_integer(0) {
                        return Err(CliError::Msg(format!(
                            "budget must be nonnegative, got `{}`",
                            render_rational(budget)
                        )));
                    }
                    match bounded_cost_observer(&plant, *k, budget, cap)? {
                        BoundedOutcome::NoObserver => {
                            doc.optimal = Some(OptimalDoc {
                                diagnosable: false,
                                cost: None,
                                budget: Some(rational_doc(budget)),
                                within_budget: None,
                                game_vertices: None,
                            });
                            Ok(Status::Negative)
                        }
                        BoundedOutcome::OverBudget { optimal } => {
                            doc.optimal = Some(OptimalDoc {
                                diagnosable: true,
                                cost: Some(rational_doc(optimal)),
                                budget: Some(rational_doc(budget)),
                                within_budget: Some(false),
                                game_vertices: None,
                            });
                            Ok(Status::Negative)
                        }
                        BoundedOutcome::Within(opt) => {
                            doc.optimal = Some(OptimalDoc {
                                diagnosable: true,
                                cost: Some(rational_doc(opt.cost)),
                                budget: Some(rational_doc(budget)),
                                within_budget: Some(true),
                                game_vertices: Some(opt.game_vertices),
                            });
                            doc.model = Some(observer_model(&opt.observer));
                            Ok(Status::Ok)
                        }
                    }
                }
            }
        }
        Cmd::ExportDot { .. } => unreachable!("handled before dispatch"),
    }
}

fn polarity(affirmative: bool) -> Status {
    if affirmative {
        Status::Ok
    } else {
        Status::Negative
    }
}

/// `validate` exits 0 only for a well-formed model; defects and parse errors
/// both map to exit 2, with defects itemized rather than folded into `error`.
fn validate_cmd(file: &Path, doc: &mut ResultDoc) -> Result<Status, CliError> {
    let text = read_file(file)?;
    let kind = sniff_kind(&text)?;
    if kind == "observer" {
        let raw = parse_raw_observer(&text)?;
        let report = validate_observer(&raw);
        let valid = report.is_ok();
        doc.validation = Some(ValidationDoc {
            kind,
            name: Some(raw.name.clone()),
            valid,
            defects: report.defects.iter().map(|d| d.to_string()).collect(),
        });
        return Ok(if valid {
            Status::Ok
        } else {
            Status::InputError
        });
    }
    let model = parse_model(&text)?;
    let name = match &model {
        ModelDocument::Plant(p) => Some(p.name().to_string()),
        ModelDocument::Observer(o) => Some(o.name().to_string()),
        ModelDocument::Mpo(m) => Some(m.name.clone()),
        ModelDocument::Game(_) => None,
    };
    doc.validation = Some(ValidationDoc {
        kind,
        name,
        valid: true,
        defects: Vec::new(),
    });
    Ok(Status::Ok)
}

fn resolve_cap(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(CAP_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Msg(format!("{CAP_ENV} must be an unsigned integer, got `{s}`"))
        }),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_plant(path: &Path) -> Result<Plant, CliError> {
    Ok(parse_plant(&read_file(path)?)?)
}

fn read_observer(path: &Path) -> Result<Observer, CliError> {
    Ok(parse_observer(&read_file(path)?)?)
}

fn read_model(path: &Path) -> Result<ModelDocument, CliError> {
    Ok(parse_model(&read_file(path)?)?)
}

fn event_set(alphabet: &Alphabet, names: &[String]) -> Result<EventSet, CliError> {
    let mut set = EventSet::EMPTY;
    // A lone "" names the empty watch set; clap cannot express zero values
    // for a required comma-separated list.
    for n in names.iter().filter(|n| !n.is_empty()) {
        let e = alphabet
            .id(n)
            .ok_or_else(|| CliError::Core(Error::UnknownEvent(n.clone())))?;
        set = set.with(e);
    }
    Ok(set)
}

fn set_names(alphabet: &Alphabet, set: EventSet) -> Vec<String> {
    set.iter().map(|e| alphabet.name(e).to_string()).collect()
}

fn label_token(alphabet: &Alphabet, label: Label) -> String {
    match label {
        Label::Event(e) => alphabet.name(e).to_string(),
        Label::Epsilon => EPS_TOKEN.to_string(),
        Label::Fault => FAULT_TOKEN.to_string(),
    }
}

fn lasso_doc(plant: &Plant, lasso: &Lasso) -> LassoDoc {
    let step = |&(label, dst): &(Label, dynobs_core::StateId)| StepDoc {
        label: label_token(plant.alphabet(), label),
        to: plant.state_name(dst).to_string(),
    };
    LassoDoc {
        start: plant.state_name(lasso.stem.start).to_string(),
        stem: lasso.stem.steps.iter().map(step).collect(),
        cycle: lasso.cycle.iter().map(step).collect(),
    }
}

fn verdict_doc(plant: &Plant, v: &Verdict, k: Option<u32>) -> VerdictDoc {
    VerdictDoc {
        diagnosable: v.diagnosable,
        k,
        min_k: v.min_k,
        watch: None,
        twin_states: v.twin_states,
        counterexample: v.counterexample.as_ref().map(|pair| RunPairDoc {
            faulty: lasso_doc(plant, &pair.faulty),
            nonfaulty: lasso_doc(plant, &pair.nonfaulty),
        }),
    }
}

fn synthesis_doc(synth: &Synthesis) -> SynthesisDoc {
    SynthesisDoc {
        present: synth.mpo.is_some(),
        arena_p1: synth.arena_p1,
        arena_p2: synth.arena_p2,
        knowledge_states: synth.knowledge_states,
        choice_nodes: synth.mpo.as_ref().map(|m| m.evens.len()),
        wait_nodes: synth.mpo.as_ref().map(|m| m.odds.len()),
    }
}

fn rational_doc(r: Rational) -> RationalDoc {
    RationalDoc {
        num: *r.numer(),
        den: *r.denom(),
        text: render_rational(r),
    }
}

fn observer_model(obs: &Observer) -> ModelDoc {
    ModelDoc {
        kind: "observer",
        name: obs.name().to_string(),
        text: serialize_observer(obs),
    }
}
