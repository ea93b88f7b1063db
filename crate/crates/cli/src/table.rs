//! Plain CSV with `#` metadata lines. Floats use 17 significant digits so every
//! value parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            // keep the row shape intact whatever the message says
            Cell::Text(s) => s.replace([',', '\n', '\r'], ";"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for m in &self.meta {
            for line in m.lines() {
                let _ = writeln!(s, "# {line}");
            }
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

/// Reads back a table written by [`Table::render`]: metadata lines, header, rows of strings.
pub fn parse(text: &str) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let mut meta = Vec::new();
    let mut lines = text.lines();
    let mut header = Vec::new();
    for l in lines.by_ref() {
        if let Some(m) = l.strip_prefix('#') {
            meta.push(m.trim_start().to_string());
        } else {
            header = l.split(',').map(str::to_string).collect();
            break;
        }
    }
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (meta, header, rows)
}
