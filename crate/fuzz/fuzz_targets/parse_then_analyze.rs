#![no_main]

use libfuzzer_sys::fuzz_target;
use qcs::digraph::{self, parse_graph, GraphFormat};

// Drive successfully parsed graphs through the cheap combinatorial
// operations so structural assumptions get exercised on arbitrary shapes.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let format = if text.trim_start().starts_with('{') {
        GraphFormat::Json
    } else {
        GraphFormat::EdgeList
    };
    let Ok(parsed) = parse_graph(text, format) else {
        return;
    };
    let g = parsed.digraph();
    if g.vertex_count() > 64 {
        return;
    }
    let girth = digraph::girth(g);
    let cycle = digraph::shortest_cycle(g);
    assert_eq!(girth.is_some(), cycle.is_some());
    if let (Some(len), Some(c)) = (girth, cycle) {
        assert_eq!(len, c.len());
    }
    let d = digraph::scc(g);
    let total: usize = d.components.iter().map(Vec::len).sum();
    assert_eq!(total, g.vertex_count());
    if g.min_out_degree() >= 1 {
        let _ = qcs::maxsum::maxsum_infimum(g);
        let _ = qcs::maxsum::maxsum_witness(g, 1e-3);
    }
});
