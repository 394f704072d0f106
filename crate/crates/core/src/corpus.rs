//! Bundled example specs with their expected classification.

use crate::classify::{Table1Row, Table2Case};
use crate::error::Result;
use crate::model::MetricSpec;

#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub row: Table1Row,
    pub case: Table2Case,
    pub json: &'static str,
}

impl CorpusEntry {
    pub fn spec(&self) -> Result<MetricSpec> {
        MetricSpec::from_json(self.json)
    }
}

macro_rules! entry {
    ($name:literal, $row:expr, $case:expr) => {
        CorpusEntry { name: $name, row: $row, case: $case, json: include_str!(concat!("../corpus/", $name, ".json")) }
    };
}

pub const CORPUS: [CorpusEntry; 13] = [
    entry!("torusA", Table1Row::A, Table2Case::Case(1)),
    entry!("torusB", Table1Row::B, Table2Case::Case(1)),
    entry!("case2", Table1Row::C, Table2Case::Case(2)),
    entry!("case3", Table1Row::C, Table2Case::Case(3)),
    entry!("case4", Table1Row::D, Table2Case::Case(4)),
    entry!("case5", Table1Row::D, Table2Case::Case(5)),
    entry!("case6", Table1Row::D, Table2Case::Case(6)),
    entry!("case7", Table1Row::D, Table2Case::Case(7)),
    entry!("case8", Table1Row::C, Table2Case::Case(8)),
    entry!("case9", Table1Row::D, Table2Case::Case(9)),
    entry!("case9_rational", Table1Row::D, Table2Case::Case(9)),
    entry!("undecided", Table1Row::D, Table2Case::Undecided),
    entry!("flat_torus", Table1Row::C, Table2Case::FlatTorus),
];

pub fn get(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}
