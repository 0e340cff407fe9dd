//! Scenario files: a dimension, named contexts given by their atom matrices,
//! a state, enumeration limits, and optionally an EPR-Bohm setup.
//!
//! ```toml
//! dim = 2
//!
//! [[context]]
//! name = "Az"
//! atoms = [
//!     [["1", "0"], ["0", "0"]],
//!     [["0", "0"], ["0", "1"]],
//! ]
//!
//! [state]
//! matrix = [["3/4", "0"], ["0", "1/4"]]
//! ```
//!
//! Scalars are always strings in the exact grammar (`"1/2"`, `"0-1/2i"`). The
//! state may instead be a `vector` (normalised on load) and defaults to the
//! maximally mixed state. A `[bell]` table with two `alice` and two `bob`
//! direction triples adds the marginal contexts A1, A2, B1, B2. The family is
//! closed automatically.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::bell::{marginal_contexts, BellScenario, Direction};
use crate::context::{close_family, Context, ContextFamily, DEFAULT_MAX_FAMILY};
use crate::cps::MAX_SWEEP_BITS;
use crate::error::{Error, Result};
use crate::lqm::DEFAULT_MAX_SECTIONS;
use crate::matrix::{DensityOperator, Projection, QMatrix};
use crate::scalar::{parse_rational, GaussianRational};
use crate::slattice::DEFAULT_MAX_ELEMENTS;

type RawMatrix = Vec<Vec<String>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    dim: usize,
    #[serde(default, rename = "context")]
    contexts: Vec<RawContext>,
    state: Option<Spanned<RawState>>,
    #[serde(default)]
    options: Options,
    bell: Option<Spanned<RawBell>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContext {
    name: Spanned<String>,
    atoms: Vec<Spanned<RawMatrix>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    matrix: Option<RawMatrix>,
    vector: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBell {
    alice: [[String; 3]; 2],
    bob: [[String; 3]; 2],
}

/// Bounds on exhaustive work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub max_family: usize,
    pub max_sections: usize,
    pub max_elements: usize,
    pub max_event_bits: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_family: DEFAULT_MAX_FAMILY,
            max_sections: DEFAULT_MAX_SECTIONS,
            max_elements: DEFAULT_MAX_ELEMENTS,
            max_event_bits: MAX_SWEEP_BITS,
        }
    }
}

impl Options {
    pub fn event_limit(&self) -> usize {
        1usize << self.max_event_bits.min(usize::BITS as usize - 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextSpec {
    pub name: String,
    pub atoms: Vec<QMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellSpec {
    pub alice: [Direction; 2],
    pub bob: [Direction; 2],
}

/// A validated scenario with its closed family.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub dim: usize,
    pub contexts: Vec<ContextSpec>,
    pub state: DensityOperator,
    pub options: Options,
    pub bell: Option<BellSpec>,
    family: ContextFamily,
    bell_scenario: Option<BellScenario>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.contexts == other.contexts
            && self.state == other.state
            && self.options == other.options
            && self.bell == other.bell
    }
}

impl Scenario {
    pub fn new(
        dim: usize,
        contexts: Vec<ContextSpec>,
        state: DensityOperator,
        options: Options,
        bell: Option<BellSpec>,
    ) -> Result<Self> {
        let mut seed = Vec::new();
        for spec in &contexts {
            let atoms = spec
                .atoms
                .iter()
                .map(|m| Projection::new(m.clone()))
                .collect::<Result<Vec<_>>>()?;
            seed.push(Context::new(atoms, Some(spec.name.clone()))?);
        }
        Self::assemble(dim, contexts, seed, state, options, bell)
    }

    fn assemble(
        dim: usize,
        contexts: Vec<ContextSpec>,
        mut seed: Vec<Context>,
        state: DensityOperator,
        options: Options,
        bell: Option<BellSpec>,
    ) -> Result<Self> {
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: state.dim(),
            });
        }
        if let Some(b) = &bell {
            seed.extend(marginal_contexts(&b.alice, &b.bob)?);
        }
        let family = close_family(dim, seed, options.max_family)?;
        let bell_scenario = match &bell {
            Some(b) => Some(BellScenario::new(family.clone(), state.clone(), &b.alice, &b.bob)?),
            None => None,
        };
        Ok(Self {
            dim,
            contexts,
            state,
            options,
            bell,
            family,
            bell_scenario,
        })
    }

    pub fn family(&self) -> &ContextFamily {
        &self.family
    }

    pub fn bell(&self) -> Option<&BellScenario> {
        self.bell_scenario.as_ref()
    }

    /// Canonical text; parsing it back yields an equal scenario.
    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            dim: usize,
            #[serde(rename = "context")]
            contexts: Vec<OutContext>,
            state: OutState,
            options: &'a Options,
            #[serde(skip_serializing_if = "Option::is_none")]
            bell: Option<OutBell>,
        }
        #[derive(Serialize)]
        struct OutContext {
            name: String,
            atoms: Vec<RawMatrix>,
        }
        #[derive(Serialize)]
        struct OutState {
            matrix: RawMatrix,
        }
        #[derive(Serialize)]
        struct OutBell {
            alice: Vec<Vec<String>>,
            bob: Vec<Vec<String>>,
        }
        let dirs = |d: &[Direction; 2]| {
            d.iter()
                .map(|v| v.iter().map(crate::scalar::format_rational).collect())
                .collect()
        };
        let out = Out {
            dim: self.dim,
            contexts: self
                .contexts
                .iter()
                .map(|c| OutContext {
                    name: c.name.clone(),
                    atoms: c.atoms.iter().map(matrix_strings).collect(),
                })
                .collect(),
            state: OutState {
                matrix: matrix_strings(self.state.matrix()),
            },
            options: &self.options,
            bell: self.bell.as_ref().map(|b| OutBell {
                alice: dirs(&b.alice),
                bob: dirs(&b.bob),
            }),
        };
        toml::to_string(&out).expect("scenario serialises")
    }
}

fn matrix_strings(m: &QMatrix) -> RawMatrix {
    m.rows().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

/// 1-based line and column of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn located(text: &str, span: Range<usize>, message: impl Into<String>) -> Error {
    let (line, column) = locate(text, span.start);
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_matrix(dim: usize, raw: &RawMatrix) -> Result<QMatrix> {
    if raw.len() != dim || raw.iter().any(|r| r.len() != dim) {
        return Err(Error::BadShape {
            expected: dim * dim,
            found: raw.iter().map(Vec::len).sum(),
        });
    }
    let rows = raw
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| s.parse::<GaussianRational>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    QMatrix::from_rows(rows)
}

fn parse_direction(raw: &[String; 3]) -> Result<Direction> {
    Ok([
        parse_rational(&raw[0])?,
        parse_rational(&raw[1])?,
        parse_rational(&raw[2])?,
    ])
}

/// Strict parse with every invariant checked; errors carry a line and column.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        located(text, span, e.message().to_string())
    })?;
    let dim = raw.dim;
    if dim == 0 {
        return Err(located(text, 0..0, "dim must be positive"));
    }
    let mut contexts = Vec::new();
    let mut seed = Vec::new();
    for rc in &raw.contexts {
        let name = rc.name.get_ref().clone();
        if contexts.iter().any(|c: &ContextSpec| c.name == name) {
            return Err(located(
                text,
                rc.name.span(),
                format!("duplicate context name {name:?}"),
            ));
        }
        let mut atoms = Vec::new();
        let mut projections = Vec::new();
        for (k, atom) in rc.atoms.iter().enumerate() {
            let fail = |e: Error| located(text, atom.span(), format!("context {name:?}, atom {k}: {e}"));
            let m = parse_matrix(dim, atom.get_ref()).map_err(fail)?;
            projections.push(Projection::new(m.clone()).map_err(fail)?);
            atoms.push(m);
        }
        let context = Context::new(projections, Some(name.clone()))
            .map_err(|e| located(text, rc.name.span(), format!("context {name:?}: {e}")))?;
        seed.push(context);
        contexts.push(ContextSpec { name, atoms });
    }
    let state = match &raw.state {
        None => DensityOperator::maximally_mixed(dim),
        Some(s) => {
            let fail = |e: Error| located(text, s.span(), format!("state: {e}"));
            match (&s.get_ref().matrix, &s.get_ref().vector) {
                (Some(m), None) => DensityOperator::new(parse_matrix(dim, m).map_err(fail)?).map_err(fail)?,
                (None, Some(v)) => {
                    if v.len() != dim {
                        return Err(fail(Error::DimensionMismatch {
                            expected: dim,
                            found: v.len(),
                        }));
                    }
                    let psi = v
                        .iter()
                        .map(|x| x.parse::<GaussianRational>())
                        .collect::<Result<Vec<_>>>()
                        .map_err(fail)?;
                    DensityOperator::pure(&psi).map_err(fail)?
                }
                _ => {
                    return Err(located(
                        text,
                        s.span(),
                        "state needs exactly one of `matrix` or `vector`",
                    ))
                }
            }
        }
    };
    let bell = match &raw.bell {
        None => None,
        Some(b) => {
            let fail = |e: Error| located(text, b.span(), format!("bell: {e}"));
            let r = b.get_ref();
            Some(BellSpec {
                alice: [
                    parse_direction(&r.alice[0]).map_err(fail)?,
                    parse_direction(&r.alice[1]).map_err(fail)?,
                ],
                bob: [
                    parse_direction(&r.bob[0]).map_err(fail)?,
                    parse_direction(&r.bob[1]).map_err(fail)?,
                ],
            })
        }
    };
    let bell_span = raw.bell.as_ref().map_or(0..0, |b| b.span());
    Scenario::assemble(dim, contexts, seed, state, raw.options, bell).map_err(|e| match e {
        Error::NotUnitVector(_) | Error::UnknownContext(_) => located(text, bell_span, format!("bell: {e}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dim = 2

[[context]]
name = "Az"
atoms = [
    [["1", "0"], ["0", "0"]],
    [["0", "0"], ["0", "1"]],
]
"#;

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.family().len(), 2);
        assert_eq!(s.state, DensityOperator::maximally_mixed(2));
        assert!(s.bell().is_none());
    }

    #[test]
    fn round_trip() {
        let s = parse_scenario(MINIMAL).unwrap();
        let text = s.to_toml_string();
        let again = parse_scenario(&text).unwrap();
        assert_eq!(s, again);
        assert_eq!(again.to_toml_string(), text);
    }

    #[test]
    fn non_idempotent_atom_rejected() {
        let text = MINIMAL.replace(r#"[["1", "0"], ["0", "0"]]"#, r#"[["2", "0"], ["0", "0"]]"#);
        let err = parse_scenario(&text).unwrap_err();
        let Error::Syntax { line, message, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(*line, 7);
        assert!(message.contains("[[2,0],[0,0]]"), "{message}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse_scenario(&format!("{MINIMAL}\ncolour = \"red\"\n")).unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }), "{err}");
        let err = parse_scenario("dim = 2\n[options]\nmax_famliy = 3\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_scalar_located() {
        let text = MINIMAL.replace(r#"["0", "1"]]"#, r#"["0", "one"]]"#);
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 8, .. }), "{err}");
    }

    #[test]
    fn incomplete_context_rejected() {
        let text = "dim = 2\n[[context]]\nname = \"P\"\natoms = [[[\"1\", \"0\"], [\"0\", \"0\"]]]\n";
        let err = parse_scenario(text).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn state_variants() {
        let pure = parse_scenario("dim = 2\n[state]\nvector = [\"1\", \"1\"]\n").unwrap();
        assert_eq!(pure.state.matrix().to_string(), "[[1/2,1/2],[1/2,1/2]]");
        let err = parse_scenario("dim = 2\n[state]\nmatrix = [[\"1\", \"0\"], [\"0\", \"1\"]]\n").unwrap_err();
        assert!(err.to_string().contains("trace"), "{err}");
        assert!(parse_scenario("dim = 2\n[state]\n").is_err());
    }

    #[test]
    fn bell_section_closes_to_nine() {
        let text = r#"
dim = 4

[state]
vector = ["0", "1", "-1", "0"]

[bell]
alice = [["0", "0", "1"], ["1", "0", "0"]]
bob = [["3/5", "0", "4/5"], ["-3/5", "0", "4/5"]]
"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.family().len(), 9);
        assert_eq!(s.bell().unwrap().chsh().unwrap(), crate::scalar::rat(-14, 5));
        let again = parse_scenario(&s.to_toml_string()).unwrap();
        assert_eq!(s, again);
        let bad = text.replace("\"4/5\"]]", "\"1\"]]");
        assert!(matches!(parse_scenario(&bad), Err(Error::Syntax { .. })));
    }
}
