use serde::{Deserialize, Serialize};

use crate::diagram::Diagram;
use crate::oracle::ComparisonReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct DiagramDoc {
    schema_version: u32,
    diagram: Diagram,
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    schema_version: u32,
    report: ComparisonReport,
}

pub fn to_json(diagram: &Diagram) -> String {
    let doc = DiagramDoc { schema_version: SCHEMA_VERSION, diagram: diagram.clone() };
    serde_json::to_string_pretty(&doc).expect("diagram is serializable")
}

pub fn to_report_json(report: &ComparisonReport) -> String {
    let doc = ReportDoc { schema_version: SCHEMA_VERSION, report: report.clone() };
    serde_json::to_string_pretty(&doc).expect("report is serializable")
}

fn check_version(v: u32) -> Result<(), serde_json::Error> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(serde::de::Error::custom(format!("unsupported schema_version {v}")))
    }
}

pub fn diagram_from_json(text: &str) -> Result<Diagram, serde_json::Error> {
    let doc: DiagramDoc = serde_json::from_str(text)?;
    check_version(doc.schema_version)?;
    Ok(doc.diagram)
}

pub fn report_from_json(text: &str) -> Result<ComparisonReport, serde_json::Error> {
    let doc: ReportDoc = serde_json::from_str(text)?;
    check_version(doc.schema_version)?;
    Ok(doc.report)
}
