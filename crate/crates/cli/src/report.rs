use serde_json::Value;

use crate::args::Format;

/// Rows of one CSV or text table.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Everything a command produced, renderable in any format.
#[derive(Debug)]
pub struct Report {
    pub default_format: Format,
    pub json: Value,
    pub table: Table,
}

impl Report {
    pub fn render(&self, format: Option<Format>) -> anyhow::Result<String> {
        Ok(match format.unwrap_or(self.default_format) {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                String::from_utf8(w.into_inner()?)?
            }
            Format::Text => text_table(&self.table),
        })
    }
}

fn text_table(t: &Table) -> String {
    let mut widths: Vec<usize> = t.header.iter().map(|h| h.len()).collect();
    for row in &t.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let s: Vec<String> = cells
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let mut s = s.join("  ").trim_end().to_string();
        s.push('\n');
        s
    };
    let mut out = line(&mut t.header.iter().copied());
    for row in &t.rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

/// Real number in fixed-width scientific notation (7 significant digits).
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_keeps_seven_digits() {
        assert_eq!(sci(1e-6), "1.000000e-6");
        assert_eq!(sci(0.0124591), "1.245910e-2");
    }

    #[test]
    fn text_columns_align() {
        let mut t = Table::new(&["a", "long"]);
        t.push(vec!["xyz".into(), "1".into()]);
        assert_eq!(text_table(&t), "a    long\nxyz  1\n");
    }
}
