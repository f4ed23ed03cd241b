//! Experiment documents.
//!
//! A document is TOML:
//!
//! ```toml
//! command = "quotient"        # optional when the CLI names the subcommand
//! seed = 7
//!
//! [group]
//! rank = 2
//!
//! [subgroups]                 # order fixes the indices H1, H2, ...
//! H1 = ["a"]
//! H2 = ["baB"]
//!
//! [params]
//! depth = 2
//!
//! [output]
//! out = "report.json"
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;
use relhyp_core::{GroupSpec, RationalBoundaryPoint, SubgroupCollection, Word};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Delta,
    Fold,
    Malnormal,
    Bci,
    Quotient,
    Refine,
    Collapse,
    Conical,
    Parabolic,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Delta,
        Command::Fold,
        Command::Malnormal,
        Command::Bci,
        Command::Quotient,
        Command::Refine,
        Command::Collapse,
        Command::Conical,
        Command::Parabolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Delta => "delta",
            Command::Fold => "fold",
            Command::Malnormal => "malnormal",
            Command::Bci => "bci",
            Command::Quotient => "quotient",
            Command::Refine => "refine",
            Command::Collapse => "collapse",
            Command::Conical => "conical",
            Command::Parabolic => "parabolic",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Command, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Validation(format!("unknown command `{s}`")))
    }
}

impl Serialize for Command {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Command-specific parameters. Unused ones are ignored by other commands.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Cylinder depth (quotient, refine, collapse, parabolic) or checked ray
    /// depth (conical).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Finer depth for `refine`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deeper: Option<usize>,
    /// Ball radius: the Cayley ball for `delta`, `N` for `bci`, the BCI ball
    /// inside conical certificates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Ball radii for a `bci` sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<usize>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imax: Option<usize>,
    /// Overrides the ball-vertex cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<RationalBoundaryPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Word>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Word>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Word>>,
    /// Subgroup name for `parabolic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
    /// Coset representative for `parabolic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<Word>,
    /// Adjacency-list file for `delta` on a generic graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dot: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSection {
    rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command: Option<String>,
    #[serde(default)]
    seed: u64,
    group: GroupSection,
    #[serde(default)]
    subgroups: IndexMap<String, Vec<Word>>,
    #[serde(default)]
    params: Params,
    #[serde(default)]
    output: Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub rank: usize,
    /// Generators per subgroup, reduced, in document order.
    pub subgroups: IndexMap<String, Vec<Word>>,
    pub params: Params,
    pub output: Output,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            seed: 0,
            rank: 2,
            subgroups: IndexMap::new(),
            params: Params::default(),
            output: Output::default(),
        }
    }
}

impl Serialize for ExperimentConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.document().serialize(s)
    }
}

impl ExperimentConfig {
    fn document(&self) -> Document {
        Document {
            command: self.command.map(|c| c.name().to_string()),
            seed: self.seed,
            group: GroupSection { rank: self.rank },
            subgroups: self.subgroups.clone(),
            params: self.params.clone(),
            output: self.output.clone(),
        }
    }

    /// Serializes a validated config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.document()).expect("validated documents serialize")
    }

    pub fn group(&self) -> Result<GroupSpec, CliError> {
        Ok(GroupSpec::free(self.rank)?)
    }

    pub fn collection(&self) -> Result<SubgroupCollection, CliError> {
        let list = self
            .subgroups
            .iter()
            .map(|(name, gens)| (name.clone(), gens.clone()))
            .collect();
        Ok(SubgroupCollection::new(self.rank, list)?)
    }

    /// Index of a subgroup by name.
    pub fn subgroup_index(&self, name: &str) -> Result<usize, CliError> {
        self.subgroups
            .get_index_of(name)
            .ok_or_else(|| CliError::Validation(format!("no subgroup named `{name}`")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.rank < 2 {
            return Err(CliError::Validation(format!(
                "group.rank must be at least 2, got {}",
                self.rank
            )));
        }
        GroupSpec::free(self.rank).map_err(|e| CliError::Validation(e.to_string()))?;
        // documents store integers as signed 64-bit
        let max = i64::MAX as u64;
        if self.seed > max || self.params.ball_cap.is_some_and(|c| c > max) {
            return Err(CliError::Validation(format!(
                "seed and ball_cap must not exceed {max}"
            )));
        }
        let check_word = |field: String, w: &Word| -> Result<(), CliError> {
            if w.min_rank() > self.rank {
                return Err(CliError::Validation(format!(
                    "{field}: `{w}` uses a letter outside rank {}",
                    self.rank
                )));
            }
            Ok(())
        };
        for (name, gens) in &self.subgroups {
            if gens.iter().all(Word::is_identity) {
                return Err(CliError::Validation(format!("subgroup {name} is empty")));
            }
            for g in gens {
                check_word(format!("subgroups.{name}"), g)?;
            }
        }
        let p = &self.params;
        for (field, w) in [("params.s", &p.s), ("params.t", &p.t), ("params.rep", &p.rep)] {
            if let Some(w) = w {
                check_word(field.to_string(), w)?;
            }
        }
        for (field, set) in [("params.K", &p.k), ("params.L", &p.l)] {
            for w in set.iter().flatten() {
                check_word(field.to_string(), w)?;
            }
        }
        if let Some(x) = &p.point {
            if x.min_rank() > self.rank {
                return Err(CliError::Validation(format!(
                    "params.point: `{x}` uses a letter outside rank {}",
                    self.rank
                )));
            }
        }
        if let Some(name) = &p.subgroup {
            self.subgroup_index(name)?;
        }
        Ok(())
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates an experiment document.
pub fn parse_spec(text: &str) -> Result<ExperimentConfig, CliError> {
    let doc: Document = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let config = ExperimentConfig {
        command: doc.command.as_deref().map(str::parse).transpose()?,
        seed: doc.seed,
        rank: doc.group.rank,
        subgroups: doc.subgroups,
        params: doc.params,
        output: doc.output,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let c = parse_spec("[group]\nrank = 2\n[subgroups]\nH1 = [\"a\"]\n").unwrap();
        assert_eq!(c.command, None);
        assert_eq!(c.subgroups["H1"], vec!["a".parse::<Word>().unwrap()]);
        assert_eq!(c.collection().unwrap().len(), 1);
    }

    #[test]
    fn words_are_reduced() {
        let c = parse_spec("[group]\nrank = 2\n[subgroups]\nH = [\"abBa\"]\n").unwrap();
        assert_eq!(c.subgroups["H"][0].to_string(), "aa");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse_spec("[group]\nrank = 2\n[params]\ndepht = 3\n").unwrap_err();
        match err {
            CliError::Parse { line, message } => {
                assert_eq!(line, Some(4));
                assert!(message.contains("depht"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_errors() {
        for text in [
            "[group]\nrank = 1\n",
            "command = \"frobnicate\"\n[group]\nrank = 2\n",
            "[group]\nrank = 2\n[subgroups]\nH = []\n",
            "[group]\nrank = 2\n[subgroups]\nH = [\"aA\"]\n",
            "[group]\nrank = 2\n[subgroups]\nH = [\"c\"]\n",
            "[group]\nrank = 2\n[params]\nsubgroup = \"H9\"\n",
        ] {
            assert_eq!(parse_spec(text).unwrap_err().code(), "VALIDATION_ERROR", "{text}");
        }
    }

    #[test]
    fn subgroup_order_is_kept() {
        let c = parse_spec("[group]\nrank = 2\n[subgroups]\nZ = [\"b\"]\nA = [\"a\"]\n").unwrap();
        assert_eq!(c.subgroup_index("Z").unwrap(), 0);
        assert_eq!(c.subgroup_index("A").unwrap(), 1);
    }
}
