//! Key/value reports printed as text or CSV.

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

/// Ordered fields; empty values are omitted from text output and kept as
/// empty cells in CSV so that columns stay fixed.
#[derive(Clone, Debug, Default)]
pub struct Report {
    fields: Vec<(&'static str, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.fields.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((key, value)),
        }
        self
    }

    pub fn opt(&mut self, key: &'static str, value: Option<impl ToString>) -> &mut Self {
        self.set(key, value.map(|v| v.to_string()).unwrap_or_default())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self
                .fields
                .iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| format!("{k}: {v}\n"))
                .collect(),
            Format::Csv => {
                let keys: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
                let values: Vec<String> = self.fields.iter().map(|(_, v)| csv_cell(v)).collect();
                format!("{}\n{}\n", keys.join(","), values.join(","))
            }
        }
    }
}

fn csv_cell(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_keeps_empty_columns() {
        let mut r = Report::new();
        r.set("a", 1).opt("b", None::<u32>).set("c", "x,y");
        assert_eq!(r.render(Format::Csv), "a,b,c\n1,,\"x,y\"\n");
        assert_eq!(r.render(Format::Text), "a: 1\nc: x,y\n");
    }
}
