use crate::diagram::{BranchKind, Diagram};

use super::fmt_float;

/// One row per sample: `branch_id,kind,lambda,x,stability`, rows grouped by
/// branch and ordered by parameter within each branch.
pub fn to_csv(diagram: &Diagram) -> String {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(["branch_id", "kind", "lambda", "x", "stability"]).expect("write to memory");
    for b in &diagram.branches {
        let kind = match b.kind {
            BranchKind::Traced => "traced",
            BranchKind::Constant => "constant",
        };
        let mut idx: Vec<usize> = (0..b.samples.len()).collect();
        idx.sort_by(|&i, &j| b.samples[i][0].total_cmp(&b.samples[j][0]));
        for i in idx {
            let s = b.samples[i];
            let label = b.label_of_sample(i).map_or("", |l| l.as_str());
            w.write_record([b.id.as_str(), kind, &fmt_float(s[0]), &fmt_float(s[1]), label]).expect("write to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}
