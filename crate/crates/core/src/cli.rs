//! Command-line surface: argument grammar and command execution.
//!
//! Every command renders plain text in canonical order, so output is
//! byte-identical across runs. Exit codes: 0 success, 1 a checked property or
//! audit failed (or a work bound was hit), 2 usage or parse error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::clqm::{c_of_i, c_preimage, exclusive_atoms, lem_gap, no_measurement_event};
use crate::context::{format_mask, parse_mask};
use crate::cps::{
    audit_family, born_cps, born_table, check_axioms, counterexample_models, extend_full, measurement_condition,
    noncontextuality_check, union_closure, BornConditions, Cps, FamilyKind, MeasureFamily, Reading,
};
use crate::error::{Error, Result};
use crate::lqm::{embed_i, enumerate_sections, lem_audit, negate, negation_closed_form};
use crate::scalar::format_rational;
use crate::scenario::Scenario;
use crate::slattice::{all_elements, distributivity_witness, element_count, hasse_dot, SqmElement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// How many counterexamples a report lists before summarising.
const MAX_LISTED: usize = 8;

#[derive(Parser, Debug)]
#[command(
    name = "qprop",
    version,
    about = "Exact analysis of experimental-proposition lattices and conditional probabilities"
)]
pub struct Cli {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

/// A command without the scenario path, parsed from a single line.
#[derive(Parser, Debug)]
#[command(name = "qprop", no_binary_name = true)]
pub struct Invocation {
    #[command(subcommand)]
    pub command: Command,
}

impl Invocation {
    /// Splits on whitespace; no quoting is needed by the grammar.
    pub fn parse_line(line: &str) -> Result<Command> {
        Invocation::try_parse_from(line.split_whitespace())
            .map(|i| i.command)
            .map_err(|e| Error::Usage(e.to_string().trim_end().to_string()))
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Check the scenario and summarise it.
    Validate,
    /// List the closed context family.
    Close,
    /// The lattice of experimental propositions.
    Slattice {
        #[command(subcommand)]
        command: SlatticeCommand,
    },
    /// The distributive lattice of sections.
    Lqm {
        #[command(subcommand)]
        command: LqmCommand,
    },
    /// The Boolean logic of exclusive measurements.
    Clqm {
        #[command(subcommand)]
        command: ClqmCommand,
    },
    /// Conditional probability spaces.
    Cps {
        #[command(subcommand)]
        command: CpsCommand,
    },
    /// EPR-Bohm analysis (needs a [bell] table).
    Bell {
        #[command(subcommand)]
        command: BellCommand,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum SlatticeCommand {
    /// Element count and a distributivity witness.
    Stats,
    /// Hasse diagram as DOT.
    Hasse,
}

#[derive(Args, Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementArgs {
    /// Context name; omit to cover every element.
    #[arg(long, requires = "atoms")]
    pub context: Option<String>,
    /// Atom mask, atom 0 first (e.g. `01`).
    #[arg(long, requires = "context")]
    pub atoms: Option<String>,
}

use clap::Args;

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum LqmCommand {
    /// Every section, in canonical order.
    Enumerate {
        /// Print the projection at every context.
        #[arg(long)]
        matrices: bool,
    },
    /// Which sections satisfy excluded middle.
    LemAudit,
    /// Negation of embedded propositions, checked against its closed form.
    Neg(ElementArgs),
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum ClqmCommand {
    /// The exclusive atoms.
    Atoms,
    /// Where excluded middle fails, with both candidate descriptions.
    LemGap(ElementArgs),
    /// The no-measurement event and its absence from the image of sections.
    NoMeasurement,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Delta,
    Stratified,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadingArg {
    Literal,
    Event,
}

impl From<ReadingArg> for Reading {
    fn from(r: ReadingArg) -> Self {
        match r {
            ReadingArg::Literal => Reading::Literal,
            ReadingArg::Event => Reading::Event,
        }
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum CpsCommand {
    /// Born probabilities and the axiom check.
    Born {
        /// Condition on exclusive measurement events instead.
        #[arg(long)]
        exclusive: bool,
    },
    /// Audit a generating measure family against the Born CPS.
    Audit {
        #[arg(long, value_enum)]
        family: FamilyArg,
    },
    /// The stratified full extension.
    ExtendFull,
    /// Non-contextuality equalities and the extracted probability assignment.
    Noncontext {
        #[arg(long, value_enum, default_value = "event")]
        reading: ReadingArg,
    },
    /// The Dirac and trivial models.
    Counterexamples,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum BellCommand {
    /// Exact CHSH value.
    Chsh,
    /// Parameter and outcome independence.
    Locality {
        #[arg(long, value_enum, default_value = "event")]
        reading: ReadingArg,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub text: String,
    pub exit_code: i32,
}

impl CommandOutput {
    fn new(text: String, ok: bool) -> Self {
        Self {
            text,
            exit_code: if ok { EXIT_OK } else { EXIT_FAILED },
        }
    }
}

/// Exit code for an error raised while loading or running.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_)
        | Error::Syntax { .. }
        | Error::ScalarParse { .. }
        | Error::UnknownContext(_)
        | Error::NotInLattice
        | Error::BadShape { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotProjection { .. }
        | Error::NotDensity { .. }
        | Error::NotUnitVector(_)
        | Error::InvalidContext(_)
        | Error::NonCommuting { .. } => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn selected_elements(scn: &Scenario, args: &ElementArgs) -> Result<Vec<SqmElement>> {
    let f = scn.family();
    match (&args.context, &args.atoms) {
        (Some(name), Some(atoms)) => {
            let k = f.index_by_name(name)?;
            let mask = parse_mask(atoms, f.d(k))?;
            if mask == 0 {
                return Err(Error::Usage("the zero mask denotes ⊥; give a nonzero mask".into()));
            }
            Ok(vec![SqmElement::prop(k, mask)])
        }
        _ => Ok(all_elements(f, scn.options.max_elements)?.into_iter().skip(1).collect()),
    }
}

pub fn execute(scn: &Scenario, command: &Command) -> Result<CommandOutput> {
    let f = scn.family();
    let opts = &scn.options;
    let mut out = String::new();
    let ok = match command {
        Command::Validate => {
            writeln!(out, "scenario\tvalid").unwrap();
            writeln!(out, "dim\t{}", scn.dim).unwrap();
            writeln!(out, "declared contexts\t{}", scn.contexts.len()).unwrap();
            writeln!(out, "family contexts\t{}", f.len()).unwrap();
            writeln!(out, "exclusive atoms\t{}", f.exclusive_atom_count()).unwrap();
            writeln!(
                out,
                "state faithful\t{}",
                if scn.state.is_faithful() { "yes" } else { "no" }
            )
            .unwrap();
            writeln!(out, "bell\t{}", if scn.bell().is_some() { "yes" } else { "no" }).unwrap();
            true
        }
        Command::Close => {
            writeln!(out, "context\td\tatoms").unwrap();
            for k in 0..f.len() {
                let atoms: Vec<String> = f.context(k).atoms().iter().map(|p| p.to_string()).collect();
                writeln!(out, "{}\t{}\t{}", f.name(k), f.d(k), atoms.join(" ")).unwrap();
            }
            writeln!(out, "finer\tcoarser").unwrap();
            for a in 0..f.len() {
                for b in 0..f.len() {
                    if a != b && f.includes(a, b) {
                        writeln!(out, "{}\t{}", f.name(a), f.name(b)).unwrap();
                    }
                }
            }
            true
        }
        Command::Slattice { command } => match command {
            SlatticeCommand::Stats => {
                writeln!(out, "contexts\t{}", f.len()).unwrap();
                writeln!(out, "elements\t{}", element_count(f)).unwrap();
                match distributivity_witness(f, opts.max_elements)? {
                    None => writeln!(out, "distributive\tyes").unwrap(),
                    Some(w) => {
                        writeln!(out, "distributive\tno").unwrap();
                        writeln!(
                            out,
                            "witness\ta={}\tb={}\tc={}",
                            w.a.display(f),
                            w.b.display(f),
                            w.c.display(f)
                        )
                        .unwrap();
                        writeln!(out, "a ∧ (b ∨ c)\t{}", w.lhs.display(f)).unwrap();
                        writeln!(out, "(a ∧ b) ∨ (a ∧ c)\t{}", w.rhs.display(f)).unwrap();
                    }
                }
                true
            }
            SlatticeCommand::Hasse => {
                out.push_str(&hasse_dot(f, opts.max_elements)?);
                true
            }
        },
        Command::Lqm { command } => match command {
            LqmCommand::Enumerate { matrices } => {
                let sections = enumerate_sections(f, opts.max_sections)?;
                writeln!(out, "sections\t{}", sections.len()).unwrap();
                for (k, s) in sections.iter().enumerate() {
                    if *matrices {
                        writeln!(out, "section {k}").unwrap();
                        out.push_str(&s.render(f, true));
                    } else {
                        writeln!(out, "{k}\t{}", s.inline(f)).unwrap();
                    }
                }
                true
            }
            LqmCommand::LemAudit => {
                let r = lem_audit(f, opts.max_sections)?;
                writeln!(out, "sections\t{}", r.section_count).unwrap();
                writeln!(out, "excluded middle holds for\t{}", r.excluded_middle.len()).unwrap();
                for s in &r.excluded_middle {
                    writeln!(out, "  {}", s.inline(f)).unwrap();
                }
                writeln!(out, "equals {{S : S = ⊤ or ¬S = ⊤}}\t{}", verdict(r.sets_agree())).unwrap();
                writeln!(
                    out,
                    "only ⊤ and ⊥\t{}",
                    if r.only_top_and_bottom(f) { "yes" } else { "no" }
                )
                .unwrap();
                writeln!(
                    out,
                    "S(C1) = 1 iff S = ⊤\t{}",
                    verdict(r.trivial_context_characterises_top)
                )
                .unwrap();
                r.passed()
            }
            LqmCommand::Neg(args) => {
                let mut all_ok = true;
                for a in selected_elements(scn, args)? {
                    let s = embed_i(f, a);
                    let neg = negate(f, &s);
                    let agree = neg == negation_closed_form(f, a);
                    all_ok &= agree;
                    writeln!(
                        out,
                        "{}\t¬ = {}\tclosed form {}",
                        a.display(f),
                        neg.inline(f),
                        verdict(agree)
                    )
                    .unwrap();
                }
                all_ok
            }
        },
        Command::Clqm { command } => match command {
            ClqmCommand::Atoms => {
                writeln!(out, "index\tcontext\tatom\tprojection").unwrap();
                for (i, a) in exclusive_atoms(f).iter().enumerate() {
                    writeln!(
                        out,
                        "{i}\t{}\t{}\t{}",
                        f.name(a.context),
                        format_mask(1 << a.atom, f.d(a.context)),
                        f.context(a.context).atoms()[a.atom]
                    )
                    .unwrap();
                }
                true
            }
            ClqmCommand::LemGap(args) => {
                for a in selected_elements(scn, args)? {
                    let g = lem_gap(f, a)?;
                    writeln!(out, "element\t{}", a.display(f)).unwrap();
                    writeln!(out, "  gap\t{}", g.gap.render(f)).unwrap();
                    writeln!(out, "  finer-excluded description\t{}", g.described.render(f)).unwrap();
                    writeln!(out, "  extra\t{}", g.extra().render(f)).unwrap();
                    writeln!(out, "  missing\t{}", g.missing().render(f)).unwrap();
                    writeln!(out, "  compatible-overlap description\t{}", g.alternative.render(f)).unwrap();
                    writeln!(
                        out,
                        "  matches\tfiner-excluded {}\tcompatible-overlap {}",
                        if g.matches_described() { "yes" } else { "no" },
                        if g.matches_alternative() { "yes" } else { "no" }
                    )
                    .unwrap();
                }
                true
            }
            ClqmCommand::NoMeasurement => {
                let e = no_measurement_event(f);
                let outside = c_preimage(f, &e).is_none();
                writeln!(out, "event\t{}", e.render(f)).unwrap();
                writeln!(out, "complement\t{}", e.complement().render(f)).unwrap();
                writeln!(out, "outside image of sections\t{}", verdict(outside)).unwrap();
                outside
            }
        },
        Command::Cps { command } => execute_cps(scn, command, &mut out)?,
        Command::Bell { command } => {
            let bell = scn
                .bell()
                .ok_or_else(|| Error::Usage("scenario has no [bell] table".into()))?;
            match command {
                BellCommand::Chsh => {
                    out.push_str(&bell.chsh_report()?);
                    let op = bell.chsh_operator_expectation();
                    let consistent = op == bell.chsh()?;
                    writeln!(out, "Tr(rho B)\t{}", format_rational(&op)).unwrap();
                    writeln!(out, "paths agree\t{}", verdict(consistent)).unwrap();
                    consistent
                }
                BellCommand::Locality { reading } => {
                    let r = bell.locality_audit((*reading).into())?;
                    out.push_str(&r.render());
                    !r.any_failure()
                }
            }
        }
    };
    Ok(CommandOutput::new(out, ok))
}

fn execute_cps(scn: &Scenario, command: &CpsCommand, out: &mut String) -> Result<bool> {
    let f = scn.family();
    let rho = &scn.state;
    let opts = &scn.options;
    let n = f.exclusive_atom_count();
    let within = n <= opts.max_event_bits;
    let refusal = |out: &mut String, what: &str| {
        writeln!(
            out,
            "{what}\trefused: {n} exclusive atoms exceed max_event_bits {}",
            opts.max_event_bits
        )
        .unwrap();
    };
    Ok(match command {
        CpsCommand::Born { exclusive } => {
            let kind = if *exclusive {
                BornConditions::Exclusive
            } else {
                BornConditions::Measurement
            };
            let model = born_cps(f, rho, kind)?;
            out.push_str(&born_table(f, rho));
            let r = check_axioms(&model)?;
            writeln!(out, "conditions\t{}", r.conditions).unwrap();
            writeln!(out, "axiom 1\t{}", verdict(r.axiom1_failures.is_empty())).unwrap();
            writeln!(
                out,
                "axiom 2\t{}\t{} condition pairs",
                verdict(r.axiom2_failures.is_empty()),
                r.pairs
            )
            .unwrap();
            for fail in r.axiom1_failures.iter().chain(&r.axiom2_failures).take(MAX_LISTED) {
                writeln!(out, "  {fail}").unwrap();
            }
            r.passed()
        }
        CpsCommand::Audit { family } => {
            if !within {
                refusal(out, "audit");
                return Ok(false);
            }
            let kind = match family {
                FamilyArg::Delta => FamilyKind::Delta,
                FamilyArg::Stratified => FamilyKind::Stratified,
            };
            let born = born_cps(f, rho, BornConditions::Measurement)?;
            let audit = audit_family(&MeasureFamily::new(f, rho, kind)?, &born, opts.event_limit())?;
            out.push_str(&audit.render(f, MAX_LISTED));
            audit.passed()
        }
        CpsCommand::ExtendFull => {
            let ext = extend_full(f, rho)?;
            let born = born_cps(f, rho, BornConditions::Measurement)?;
            let agree = born
                .conditions()
                .iter()
                .enumerate()
                .all(|(k, c)| ext.weights(c).as_deref() == Some(born.condition_weights(k)));
            writeln!(out, "agrees with Born on measurement conditions\t{}", verdict(agree)).unwrap();
            let seed: Vec<_> = (0..f.len()).map(|k| measurement_condition(f, k)).collect();
            let closure = union_closure(&seed, opts.event_limit())?;
            let additive = ext.restrict(closure)?;
            let ra = check_axioms(&additive)?;
            writeln!(out, "union-closed conditions\t{}", additive.conditions().len()).unwrap();
            writeln!(out, "union-closed axioms\t{}", verdict(ra.passed())).unwrap();
            writeln!(out, "union-closed additive\t{}", verdict(additive.is_additive())).unwrap();
            let mut ok = agree && ra.passed() && additive.is_additive();
            if within {
                let full = ext.to_model(opts.event_limit())?;
                let rf = check_axioms(&full)?;
                let nonempty = (1usize << n) - 1;
                writeln!(
                    out,
                    "conditions\t{} of {nonempty} nonempty events",
                    full.conditions().len()
                )
                .unwrap();
                writeln!(
                    out,
                    "full\t{}",
                    if full.conditions().len() == nonempty {
                        "yes"
                    } else {
                        "no"
                    }
                )
                .unwrap();
                writeln!(out, "axioms\t{}\t{} condition pairs", verdict(rf.passed()), rf.pairs).unwrap();
                ok &= rf.passed();
            } else {
                refusal(out, "all conditions");
            }
            ok
        }
        CpsCommand::Noncontext { reading } => {
            let born = born_cps(f, rho, BornConditions::Measurement)?;
            let r = noncontextuality_check(f, &born, Some(rho), (*reading).into());
            out.push_str(&r.render(MAX_LISTED));
            r.passed()
        }
        CpsCommand::Counterexamples => {
            let mut ok = true;
            for (name, model) in counterexample_models(f) {
                let atom = exclusive_atoms(f)[model.atom()];
                writeln!(
                    out,
                    "model\t{name}\tatom ({}!,{})",
                    f.name(atom.context),
                    format_mask(1 << atom.atom, f.d(atom.context))
                )
                .unwrap();
                let undefined = (0..f.len())
                    .filter(|&k| !model.is_condition(&measurement_condition(f, k)))
                    .map(|k| f.name(k).to_string())
                    .collect::<Vec<_>>();
                let listed = if undefined.is_empty() {
                    "none".to_string()
                } else {
                    undefined.join(" ")
                };
                writeln!(out, "  measurement conditions without probabilities\t{listed}").unwrap();
                let top = c_of_i(f, SqmElement::top(f));
                let p = model
                    .prob(&top, &top)
                    .map_or("undefined".into(), |p| format_rational(&p));
                writeln!(out, "  P(Ω|Ω)\t{p}").unwrap();
                if within {
                    let m = model.to_model(opts.event_limit())?;
                    let r = check_axioms(&m)?;
                    writeln!(out, "  conditions\t{}", m.conditions().len()).unwrap();
                    writeln!(out, "  axioms\t{}", verdict(r.passed())).unwrap();
                    ok &= r.passed();
                } else {
                    refusal(out, "  axioms");
                }
            }
            ok
        }
    })
}
