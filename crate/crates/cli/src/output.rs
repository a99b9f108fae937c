use std::io::Write;

use serde::Serialize;

use crate::Format;

/// A command result that can be printed in each output format.
pub trait Report: Serialize {
    /// Column names and rows for CSV output.
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>);
    fn text(&self) -> String;
}

pub fn emit<R: Report>(format: Format, report: &R) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let (header, rows) = report.table();
            writeln!(out, "{}", header.join(","))?;
            for row in rows {
                writeln!(out, "{}", row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","))?;
            }
        }
        Format::Text => writeln!(out, "{}", report.text())?,
    }
    Ok(())
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::csv_cell;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_cell("3/2^1"), "3/2^1");
        assert_eq!(csv_cell("a,b"), "\"a,b\"");
        assert_eq!(csv_cell("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
