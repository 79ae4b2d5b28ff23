#![allow(dead_code)]

use khovacable::diagram::{parse_diagram, FramedLinkDiagram};

pub const CORPUS: [&str; 7] = [
    "unknot-0",
    "unknot-kink+",
    "unknot-kink-",
    "hopf",
    "trefoil-r",
    "trefoil-l",
    "figure8",
];

pub fn corpus_text(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}.json", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn corpus(name: &str) -> FramedLinkDiagram {
    parse_diagram(&corpus_text(name)).unwrap()
}

pub fn corpus_path(name: &str) -> String {
    format!("{}/../../corpus/{name}.json", env!("CARGO_MANIFEST_DIR"))
}
