//! CSV and JSON emission.
//!
//! CSV rows are `experiment,param_tuple,trial,statistic,value`. Per-trial rows
//! come first; summary rows follow with `trial = summary` and the statistic
//! suffixed by `:count`, `:mean`, `:se`, `:min`, `:max` or `:reference`.

use std::io::Write;

use serde::Serialize;

use super::runner::RunOutput;
use super::verify::BoundReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["experiment", "param_tuple", "trial", "statistic", "value"];

/// Path of the JSON schema shipped with the crate, relative to the crate root.
pub const JSON_SCHEMA_PATH: &str = "schema/run-output.schema.json";

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(out: &RunOutput, w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    csv.write_record(CSV_HEADER).map_err(csv_err)?;
    let experiment = out.config.experiment.name();
    for r in &out.records {
        let trial = r.trial.to_string();
        for (statistic, value) in &r.stats {
            csv.write_record([
                experiment,
                &r.param_tuple,
                &trial,
                statistic,
                &format_float(*value),
            ])
            .map_err(csv_err)?;
        }
    }
    for s in &out.summary {
        let mut fields = vec![
            ("count", s.count as f64),
            ("mean", s.mean),
            ("se", s.standard_error),
            ("min", s.min),
            ("max", s.max),
        ];
        if let Some(r) = s.reference {
            fields.push(("reference", r));
        }
        for (suffix, value) in fields {
            let statistic = format!("{}:{suffix}", s.statistic);
            csv.write_record([
                experiment,
                &s.param_tuple,
                "summary",
                &statistic,
                &format_float(value),
            ])
            .map_err(csv_err)?;
        }
    }
    csv.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    #[serde(flatten)]
    run: &'a RunOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<&'a BoundReport>,
}

pub fn write_json<W: Write>(out: &RunOutput, report: Option<&BoundReport>, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut w,
        &JsonDocument {
            run: out,
            verification: report,
        },
    )?;
    writeln!(w)?;
    Ok(())
}
