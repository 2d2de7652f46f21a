use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use hyltl::buchi::{export_hoa, import_hoa, BuchiAutomaton};
use hyltl::check::{bha_equivalence, formula_universe, split_translation, discretization, upward_closure, ltl_buchi, CheckError, Report};
use hyltl::gen::{flow_pool, random_hyltl, rng, Alphabet, TraceBounds, TraceSpace, WordSpace};
use hyltl::hybrid::{
    compose, export_bha, export_bha_hoa, export_dot, export_ha, export_monitor, parse_bha, parse_ha,
    BuchiHybridAutomaton, HybridAutomaton,
};
use hyltl::pipeline::{to_discrete, translate, PipelineError, StageRecord};
use hyltl::{parse_hyltl, pi, to_nnf, Declarations, HyLtlFormula};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Pipeline(p) => p.into(),
            CheckError::DualInUniverse(_) => CliError::Input(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "hyltl", version, about = "Translate HyLTL formulas into Büchi hybrid automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it in canonical form.
    Parse(FormulaCmd),
    /// Print the negation normal form.
    Nnf(FormulaCmd),
    /// Print the split-action translation of the negation normal form.
    Pi(FormulaCmd),
    /// Print the discretized LTL formula.
    Gamma(FormulaCmd),
    /// Build the Büchi automaton of the discretized formula.
    Ba(AutomatonCmd),
    /// Build the Büchi hybrid automaton of a formula.
    Bha(AutomatonCmd),
    /// Compose a hybrid automaton with a property automaton.
    Compose(ComposeCmd),
    /// Run the oracle suites on a formula, or on random formulas.
    Check(CheckCmd),
    /// Convert an automaton file to another format.
    Export(ExportCmd),
}

#[derive(Args)]
struct FormulaArgs {
    /// Formula text.
    #[arg(short = 'f', long, conflicts_with = "formula_file")]
    formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    formula_file: Option<PathBuf>,
    /// Comma separated action names. Defaults to the actions of the formula.
    #[arg(long, value_delimiter = ',')]
    actions: Option<Vec<String>>,
    /// Comma separated variable names. Defaults to the variables of the formula.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Hoa,
    Monitor,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FormulaCmd {
    #[command(flatten)]
    formula: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AutomatonCmd {
    #[command(flatten)]
    formula: FormulaArgs,
    /// Read the Büchi automaton of the discretized formula from a HOA file.
    #[arg(long)]
    from_hoa: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ComposeCmd {
    /// Hybrid automaton in the native text format.
    #[arg(long)]
    system: PathBuf,
    /// Büchi hybrid automaton in the native text format.
    #[arg(long, conflicts_with_all = ["formula", "formula_file"])]
    property: Option<PathBuf>,
    /// Build the property automaton from a formula instead.
    #[command(flatten)]
    formula: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CheckCmd {
    #[command(flatten)]
    formula: FormulaArgs,
    /// Number of random formulas to check when no formula is given.
    #[arg(long, default_value_t = 20)]
    random: usize,
    #[arg(long, default_value_t = 2)]
    bound_stem: usize,
    #[arg(long, default_value_t = 2)]
    bound_loop: usize,
    #[arg(long, default_value_t = 2)]
    bound_atoms: usize,
    /// Sampled traces per formula for the suites that search for splits.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportCmd {
    /// Automaton in the native text format.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn log(records: &[StageRecord]) {
    for r in records {
        eprintln!("{r}");
    }
}

fn only(format: Format, allowed: &[Format], what: &str) -> Result<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let name = format.to_possible_value().expect("named").get_name().to_string();
        Err(CliError::Usage(format!("{what} cannot be written as `{name}`")))
    }
}

/// A formula with the action and variable sets it is interpreted over.
struct Input {
    phi: HyLtlFormula,
    actions: Vec<String>,
    vars: BTreeSet<String>,
}

fn formula_vars(phi: &HyLtlFormula) -> BTreeSet<String> {
    phi.flow_atoms()
        .iter()
        .flat_map(|f| f.variables())
        .map(|v| v.name)
        .collect()
}

impl FormulaArgs {
    fn given(&self) -> bool {
        self.formula.is_some() || self.formula_file.is_some()
    }

    fn load(&self) -> Result<Input> {
        let text = match (&self.formula, &self.formula_file) {
            (Some(f), _) => f.clone(),
            (None, Some(p)) => read(p)?,
            (None, None) => return Err(CliError::Usage("a formula is required (--formula or --formula-file)".into())),
        };
        let decls = Declarations {
            vars: self.vars.as_ref().map(|v| v.iter().cloned().collect()),
            actions: self.actions.as_ref().map(|a| a.iter().cloned().collect()),
            ..Declarations::permissive()
        };
        let phi = parse_hyltl(text.trim(), &decls).map_err(|e| CliError::Input(e.to_string()))?;
        let actions = match &self.actions {
            Some(a) => a.clone(),
            None => phi.actions().iter().map(|a| a.name().to_string()).collect(),
        };
        let vars = match &self.vars {
            Some(v) => v.iter().cloned().collect(),
            None => formula_vars(&phi),
        };
        Ok(Input { phi, actions, vars })
    }
}

fn load_hoa(path: &Option<PathBuf>) -> Result<Option<BuchiAutomaton>> {
    match path {
        Some(p) => import_hoa(&read(p)?)
            .map(Some)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(None),
    }
}

fn write_bha(
    h: &BuchiHybridAutomaton,
    plain: Option<&HybridAutomaton>,
    name: &str,
    output: &OutputArgs,
) -> Result<()> {
    let text = match output.format {
        Format::Text => match plain {
            Some(h) => export_ha(h),
            None => export_bha(h),
        },
        Format::Dot => export_dot(h),
        Format::Hoa => export_bha_hoa(h, Some(name)),
        Format::Monitor => export_monitor(h, name).map_err(|e| CliError::Input(e.to_string()))?,
    };
    emit(&output.out, &text)
}

fn formula_stage(cmd: &FormulaCmd, stage: &str) -> Result<()> {
    only(cmd.output.format, &[Format::Text], "a formula")?;
    let input = cmd.formula.load()?;
    let text = match stage {
        "parse" => input.phi.to_string(),
        "nnf" => to_nnf(&input.phi).to_string(),
        "pi" => pi(&to_nnf(&input.phi)).map_err(PipelineError::from)?.to_string(),
        _ => {
            let mut records = Vec::new();
            let (.., g) = to_discrete(&input.phi, &input.actions, &mut records)?;
            log(&records);
            g.to_string()
        }
    };
    emit(&cmd.output.out, &text)
}

fn ba(cmd: &AutomatonCmd) -> Result<()> {
    only(cmd.output.format, &[Format::Text, Format::Hoa], "a Büchi automaton")?;
    let input = cmd.formula.load()?;
    let mut records = Vec::new();
    let (.., g) = to_discrete(&input.phi, &input.actions, &mut records)?;
    log(&records);
    let aut = match load_hoa(&cmd.from_hoa)? {
        Some(a) => a,
        None => hyltl::buchi::ltl_to_buchi(&g),
    };
    eprintln!("[ba] {} states, {} transitions", aut.num_states(), aut.num_transitions());
    emit(&cmd.output.out, &export_hoa(&aut, Some(&g.to_string())))
}

fn bha(cmd: &AutomatonCmd) -> Result<()> {
    let input = cmd.formula.load()?;
    let t = translate(&input.phi, &input.actions, &input.vars, load_hoa(&cmd.from_hoa)?)?;
    log(&t.log);
    write_bha(&t.bha, None, "property", &cmd.output)
}

fn compose_cmd(cmd: &ComposeCmd) -> Result<()> {
    let sys = parse_ha(&read(&cmd.system)?).map_err(|e| CliError::Input(format!("{}: {e}", cmd.system.display())))?;
    let prop = match &cmd.property {
        Some(p) => parse_bha(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None if cmd.formula.given() => {
            let input = cmd.formula.load()?;
            let actions: Vec<&str> = sys.actions().iter().map(|a| a.name()).collect();
            let t = translate(&input.phi, &actions, sys.vars(), None)?;
            log(&t.log);
            t.bha
        }
        None => return Err(CliError::Usage("a property is required (--property or a formula)".into())),
    };
    let product = compose(&sys, &prop).map_err(|e| CliError::Input(e.to_string()))?;
    eprintln!(
        "[compose] {} locations, {} edges",
        product.num_locations(),
        product.edges().len()
    );
    write_bha(&product, None, "product", &cmd.output)
}

fn export(cmd: &ExportCmd) -> Result<()> {
    let text = read(&cmd.input)?;
    let fail = |e: hyltl::hybrid::HybridError| CliError::Input(format!("{}: {e}", cmd.input.display()));
    match parse_ha(&text) {
        Ok(h) => write_bha(&BuchiHybridAutomaton::all_final(h.clone()), Some(&h), "system", &cmd.output),
        Err(_) => write_bha(&parse_bha(&text).map_err(fail)?, None, "property", &cmd.output),
    }
}

fn check_formula(input: &Input, cmd: &CheckCmd, seed: u64) -> Result<Vec<(&'static str, Report)>> {
    let bounds = TraceBounds {
        stem: cmd.bound_stem,
        cycle: cmd.bound_loop.max(1),
        atoms: cmd.bound_atoms.max(1),
    };
    let t = translate(&input.phi, &input.actions, &input.vars, None)?;
    let space = TraceSpace::new(formula_universe(&input.phi)?, t.encoding.user_actions(), bounds);
    let mut r = rng(seed);
    let samples: Vec<_> = (0..cmd.samples).map(|_| space.sample(&mut r)).collect();
    let k = t.nnf.negated_flow_atoms().len();
    let mut out = vec![("discretization", discretization(&input.phi, &t.encoding, &space, true)?)];
    if t.used_pi {
        out.push(("split translation", split_translation(&t.nnf, &samples, k)?));
        out.push(("automaton", bha_equivalence(&t.nnf, &t.bha, &samples, true, k)?));
    } else {
        let mut reps = Vec::new();
        space.for_each(true, |a| reps.push(a.clone()));
        out.push(("automaton", bha_equivalence(&t.nnf, &t.bha, &reps, false, 0)?));
    }
    let universe = std::sync::Arc::new(
        hyltl::oracle::Universe::new(t.gamma.flow_atoms()).map_err(|e| CliError::Invariant(e.to_string()))?,
    );
    let words = WordSpace::legal(universe, &t.encoding, cmd.bound_stem, cmd.bound_loop.max(1));
    out.push(("tableau", ltl_buchi(&t.gamma, &t.buchi, &words)?));
    out.push(("upward closure", upward_closure(&t.gamma, &words)?));
    Ok(out)
}

fn check(cmd: &CheckCmd) -> Result<()> {
    let seed = match std::env::var("HYLTL_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("HYLTL_SEED must be an unsigned integer, got `{s}`")))?,
        Err(_) => 0,
    };
    let inputs = if cmd.formula.given() {
        vec![cmd.formula.load()?]
    } else {
        let mut r = rng(seed);
        let pool_vars: BTreeSet<String> = flow_pool()
            .iter()
            .flat_map(|f| f.variables())
            .map(|v| v.name)
            .collect();
        (0..cmd.random)
            .map(|_| {
                let a = Alphabet::random(&mut r, 2, 2);
                Input {
                    phi: random_hyltl(&mut r, 3, &a),
                    actions: a.actions.iter().map(|a| a.name().to_string()).collect(),
                    vars: pool_vars.clone(),
                }
            })
            .collect()
    };
    let mut text = String::new();
    let mut failed = 0;
    for (i, input) in inputs.iter().enumerate() {
        text.push_str(&format!("formula {}: {}\n", i + 1, input.phi));
        for (name, report) in check_formula(input, cmd, seed.wrapping_add(i as u64))? {
            failed += usize::from(!report.passed());
            let status = if report.passed() { "ok" } else { "FAILED" };
            text.push_str(&format!("  {name}: {status}, {report}\n"));
        }
    }
    emit(&cmd.out, &text)?;
    if failed > 0 {
        return Err(CliError::Invariant(format!("{failed} suites found mismatches")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Parse(c) => formula_stage(c, "parse"),
        Command::Nnf(c) => formula_stage(c, "nnf"),
        Command::Pi(c) => formula_stage(c, "pi"),
        Command::Gamma(c) => formula_stage(c, "gamma"),
        Command::Ba(c) => ba(c),
        Command::Bha(c) => bha(c),
        Command::Compose(c) => compose_cmd(c),
        Command::Check(c) => check(c),
        Command::Export(c) => export(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
