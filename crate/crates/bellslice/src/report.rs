//! Markdown reports joining a class file with an analysis table.

use std::fmt::Write as _;

use bellslice_core::Scenario;

use crate::analysis::{AliasTable, AnalysisBlock};
use crate::formats::ClassLine;

/// Display name of class `c`: alias if known, else `F_index`.
pub fn class_name(aliases: &mut AliasTable, c: &ClassLine) -> String {
    aliases.name(&c.representative).unwrap_or_else(|| format!("F_{}", c.index))
}

/// Class listing followed by one figure table per analysed dimension.
pub fn write_report(
    s: &Scenario,
    classes: &[ClassLine],
    aliases: &mut AliasTable,
    analysis: &[AnalysisBlock],
) -> String {
    let total: u128 = classes.iter().map(|c| c.orbit_size).sum();
    let mut out = format!("# Scenario {s}\n\n{} classes, {} facets.\n\n", classes.len(), total);
    out.push_str("| Nº | Name | Orbit | L | Coefficients |\n|---|---|---|---|---|\n");
    for c in classes {
        let coeffs: Vec<String> = c.representative.coeffs().iter().map(i64::to_string).collect();
        writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            c.index,
            class_name(aliases, c),
            c.orbit_size,
            c.representative.bound(),
            coeffs.join(" ")
        )
        .expect("write to string");
    }
    for (d, rows) in analysis {
        write!(out, "\n## d = {d}\n\n").expect("write to string");
        let with_c = *d == 2;
        out.push_str("| Name | Scenario | L | Q | Q_NPA | λ | η_min |");
        out.push_str(if with_c { " C |\n|---|---|---|---|---|---|---|---|\n" } else { "\n|---|---|---|---|---|---|---|\n" });
        for r in rows {
            let cells = if with_c { &r[..] } else { &r[..7] };
            writeln!(out, "| {} |", cells.join(" | ")).expect("write to string");
        }
    }
    out
}
