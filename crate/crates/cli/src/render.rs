use std::fmt::Write as _;

use permerge::{Comparator, Network, Stage};

/// DOT digraph with one node per register and one edge per comparator,
/// pointing at the register that receives the maximum.
pub fn dot(net: &Network) -> String {
    let mut out = String::from("digraph network {\n  rankdir=LR;\n  node [shape=point];\n");
    for r in 0..net.n_registers() {
        writeln!(out, "  r{r} [xlabel=\"{r}\"];").unwrap();
    }
    for (stage, c) in net.comparators() {
        writeln!(out, "  r{} -> r{} [label=\"{stage}\"];", c.lo, c.hi).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Splits a stage into columns of comparators whose spans do not overlap.
fn lanes(stage: &Stage) -> Vec<Vec<Comparator>> {
    let mut lanes: Vec<Vec<Comparator>> = Vec::new();
    for &c in stage.comparators() {
        match lanes.iter_mut().find(|l| l.last().is_some_and(|p| p.hi < c.lo)) {
            Some(lane) => lane.push(c),
            None => lanes.push(vec![c]),
        }
    }
    lanes
}

/// One text row per register. Within each stage block a comparator is drawn
/// as `o` on its min register, `v` on its max register and `|` in between;
/// stage blocks are separated by a blank column.
pub fn ascii(net: &Network) -> String {
    let n = net.n_registers();
    let label = n.saturating_sub(1).to_string().len();
    let mut rows: Vec<String> = (0..n).map(|r| format!("{r:>label$} -")).collect();
    for stage in net.stages() {
        for lane in lanes(stage) {
            let mut col = vec!['-'; n];
            for c in lane {
                col[c.lo] = 'o';
                col[c.hi] = 'v';
                for cell in &mut col[c.lo + 1..c.hi] {
                    *cell = '|';
                }
            }
            for (row, ch) in rows.iter_mut().zip(col) {
                row.push(ch);
                row.push('-');
            }
        }
        for row in rows.iter_mut() {
            row.push_str(" -");
        }
    }
    let mut out = String::new();
    for row in rows {
        out.push_str(row.trim_end_matches([' ', '-']));
        out.push('\n');
    }
    out
}
