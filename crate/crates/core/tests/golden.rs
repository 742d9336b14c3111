//! Builders compared against netlists transcribed from the published drawings.

use permerge::builders::{build_cw, build_m, build_p, build_p4};
use permerge::netlist::{parse_netlist, to_netlist};
use permerge::Network;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn diff(built: &Network, golden: &Network) {
    assert_eq!(built.n_registers(), golden.n_registers());
    assert_eq!(built.depth(), golden.depth());
    for (i, (a, b)) in built.stages().iter().zip(golden.stages()).enumerate() {
        let extra: Vec<_> = a.comparators().iter().filter(|c| !b.contains(c)).collect();
        let missing: Vec<_> = b.comparators().iter().filter(|c| !a.contains(c)).collect();
        assert!(extra.is_empty() && missing.is_empty(), "stage {}: extra {extra:?}, missing {missing:?}", i + 1);
    }
}

#[test]
fn cw5_matches_drawing() {
    let text = fixture("cw5.net");
    let golden = parse_netlist(&text).unwrap();
    let built = build_cw(5).unwrap();
    diff(&built, &golden);
    assert_eq!(to_netlist(&built), text);
}

#[test]
fn p5_matches_drawing() {
    let text = fixture("p5.net");
    let built = build_p(5).unwrap();
    diff(&built, &parse_netlist(&text).unwrap());
    assert_eq!(to_netlist(&built), text);
}

#[test]
fn m5_matches_drawing() {
    let text = fixture("m5.net");
    let built = build_m(5).unwrap();
    diff(&built, &parse_netlist(&text).unwrap());
    assert_eq!(to_netlist(&built), text);
}

#[test]
fn p6_four_periodic_matches_drawing() {
    let text = fixture("p6_4periodic.net");
    let built = build_p4(6).unwrap();
    diff(&built, &parse_netlist(&text).unwrap());
    assert_eq!(to_netlist(&built), text);
}

#[test]
fn fixtures_round_trip_bit_exact() {
    for name in ["cw5.net", "p5.net", "m5.net", "p6_4periodic.net"] {
        let text = fixture(name);
        assert_eq!(to_netlist(&parse_netlist(&text).unwrap()), text, "{name}");
    }
}
