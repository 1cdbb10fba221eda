//! Comparison tables, per-family breakdowns and instance histograms as CSV and aligned
//! plain text. All metrics are printed with three decimals.

use serde::{Deserialize, Serialize};

use crate::dataset::{FamilyClassMap, FamilyHistogram};
use crate::error::{Error, Result};
use crate::eval::{ApResult, ThresholdSweepResult};
use crate::scalar::Scalar;

pub const COMPARISON_HEADER: [&str; 6] = ["Model", "Dataset", "Precision", "Recall", "mAP@0.5", "mAP@0.5:0.95"];
pub const NOT_AVAILABLE: &str = "n/a";

/// One configuration's headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigMetrics<T> {
    pub name: String,
    pub dataset_label: String,
    pub precision: T,
    pub recall: T,
    pub map50: T,
    pub map5095: T,
}

impl<T: Scalar> ConfigMetrics<T> {
    pub fn new(
        name: impl Into<String>,
        dataset_label: impl Into<String>,
        precision: T,
        recall: T,
        map50: T,
        map5095: T,
    ) -> Result<Self> {
        let m = Self {
            name: name.into(),
            dataset_label: dataset_label.into(),
            precision,
            recall,
            map50,
            map5095,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in self.metrics() {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidArgument(format!(
                    "{label} = {v} for '{}' outside [0, 1]",
                    self.name
                )));
            }
        }
        Ok(())
    }

    fn metrics(&self) -> [(&'static str, T); 4] {
        [
            ("precision", self.precision),
            ("recall", self.recall),
            ("map50", self.map50),
            ("map5095", self.map5095),
        ]
    }

    fn cells(&self) -> [String; 6] {
        [
            self.name.clone(),
            self.dataset_label.clone(),
            fmt3(self.precision),
            fmt3(self.recall),
            fmt3(self.map50),
            fmt3(self.map5095),
        ]
    }
}

fn fmt3<T: Scalar>(v: T) -> String {
    format!("{v:.3}")
}

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map_or_else(|| NOT_AVAILABLE.to_owned(), fmt3)
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aligned text rendering; the first two columns are left-aligned, the rest right-aligned.
fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let width = |i: usize| {
        rows.iter()
            .map(|r| r[i].chars().count())
            .chain(std::iter::once(header[i].chars().count()))
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..header.len()).map(width).collect();
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let pad = widths[i] - c.chars().count();
                if i < 2 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        parts.join("  ").trim_end().to_owned()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTable {
    pub text: String,
    pub csv: String,
}

/// Renders configuration rows in input order.
pub fn render_comparison_table<T: Scalar>(rows: &[ConfigMetrics<T>]) -> Result<RenderedTable> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("comparison table needs at least one row".into()));
    }
    for r in rows {
        r.validate()?;
    }
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.cells().to_vec()).collect();
    Ok(RenderedTable {
        text: text_table(&COMPARISON_HEADER, &cells),
        csv: csv_string(&COMPARISON_HEADER, &cells)?,
    })
}

/// Reads back a CSV written by [`render_comparison_table`].
pub fn parse_comparison_csv<T: Scalar>(text: &str) -> Result<Vec<ConfigMetrics<T>>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != COMPARISON_HEADER {
        return Err(Error::InvalidArgument(format!(
            "unexpected comparison header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<T> {
            rec[i]
                .parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::InvalidArgument(format!("'{}' is not a number", &rec[i])))
        };
        out.push(ConfigMetrics::new(
            &rec[0],
            &rec[1],
            num(2)?,
            num(3)?,
            num(4)?,
            num(5)?,
        )?);
    }
    Ok(out)
}

/// CSV of `family,count,share`, most abundant first.
pub fn render_family_histogram<T: Scalar>(h: &FamilyHistogram<T>) -> Result<String> {
    let rows: Vec<Vec<String>> = h
        .families
        .iter()
        .map(|f| vec![f.family.clone(), f.count.to_string(), fmt3(f.share)])
        .collect();
    csv_string(&["family", "count", "share"], &rows)
}

/// Per-family AP, optionally with precision, recall and F1 at the sweep's threshold.
/// Rows are sorted by descending AP; families without ground truth come last as `n/a`.
pub fn render_per_class_report<T: Scalar>(
    class_map: &FamilyClassMap,
    ap: &ApResult<T>,
    sweep: Option<&ThresholdSweepResult<T>>,
) -> Result<String> {
    if let Some(&c) = ap.per_class.keys().find(|&&c| !class_map.contains(c)) {
        return Err(Error::ClassMapMismatch(format!(
            "AP result has class {c} outside the class map"
        )));
    }
    if let Some(s) = sweep {
        if let Some(&c) = s.per_class.keys().find(|c| !ap.per_class.contains_key(c)) {
            return Err(Error::ClassMapMismatch(format!(
                "sweep has class {c} missing from the AP result"
            )));
        }
    }
    let mut entries: Vec<(u32, Option<T>)> = ap.per_class.iter().map(|(&c, &v)| (c, v)).collect();
    entries.sort_by(|(ca, a), (cb, b)| match (a, b) {
        (Some(x), Some(y)) => y.partial_cmp(x).expect("AP is finite").then(ca.cmp(cb)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => ca.cmp(cb),
    });

    let mut header = vec!["family", "class_id", "ap"];
    if sweep.is_some() {
        header.extend(["precision", "recall", "f1"]);
    }
    let rows: Vec<Vec<String>> = entries
        .into_iter()
        .map(|(c, v)| {
            let mut row = vec![
                class_map.name(c).expect("checked above").to_owned(),
                c.to_string(),
                fmt_opt(v),
            ];
            if let Some(s) = sweep {
                let prf = s.per_class.get(&c);
                row.push(fmt_opt(prf.and_then(|p| p.precision)));
                row.push(fmt_opt(prf.and_then(|p| p.recall)));
                row.push(fmt_opt(prf.and_then(|p| p.f1)));
            }
            row
        })
        .collect();
    csv_string(&header, &rows)
}
