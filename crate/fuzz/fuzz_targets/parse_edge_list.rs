#![no_main]

use libfuzzer_sys::fuzz_target;
use qcs::digraph::{parse_graph, GraphFormat};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_graph(text, GraphFormat::EdgeList);
    }
});
