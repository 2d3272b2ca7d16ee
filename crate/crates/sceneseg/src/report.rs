//! Report emission: CSV tables, SVG heatmaps, JSON segmentation reports and
//! JSONL event logs.

use std::io::Write;

use crate::anomaly::AnomalyEvent;
use crate::cluster::CombinedLabel;
use crate::error::Result;
use crate::segment::SegmentationResult;
use crate::similarity::ConfidenceMatrix;

/// Confidence matrix as CSV with row/column labels.
pub fn write_matrix_csv(matrix: &ConfidenceMatrix, mut w: impl Write) -> Result<()> {
    write!(w, "label")?;
    for l in &matrix.labels {
        write!(w, ",{l}")?;
    }
    writeln!(w)?;
    for (label, row) in matrix.labels.iter().zip(&matrix.values) {
        write!(w, "{label}")?;
        for v in row {
            write!(w, ",{v:.6}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

const CELL: usize = 14;
const MARGIN: usize = 90;

/// Confidence matrix as an SVG heatmap; darker cells mean more similar
/// (lower distance).
pub fn write_matrix_svg(matrix: &ConfidenceMatrix, mut w: impl Write) -> Result<()> {
    let n = matrix.size();
    let size = MARGIN + n * CELL + 10;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="monospace" font-size="9">"#
    )?;
    for (i, row) in matrix.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            writeln!(
                w,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({shade},{shade},{shade})"/>"#,
                MARGIN + j * CELL,
                MARGIN + i * CELL,
            )?;
        }
    }
    for (i, label) in matrix.labels.iter().enumerate() {
        let center = MARGIN + i * CELL + CELL / 2 + 3;
        writeln!(w, r#"<text x="2" y="{center}">{label}</text>"#)?;
        writeln!(
            w,
            r#"<text x="{}" y="{}" transform="rotate(-90 {x} {y})" text-anchor="start">{label}</text>"#,
            center - 3,
            MARGIN - 4,
            x = center - 3,
            y = MARGIN - 4,
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

/// Cluster assignments as CSV: one row per IU.
pub fn write_labels_csv(
    ids: &[String],
    combined: &[CombinedLabel],
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "iu_id,motion_label,context_label,combined_label")?;
    for (id, c) in ids.iter().zip(combined) {
        writeln!(w, "{id},{},{},{}", c.motion, c.context, c.label)?;
    }
    Ok(())
}

/// Segmentation result as pretty JSON.
pub fn write_segmentation_json(result: &SegmentationResult, mut w: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, result)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_segmentation_json(path: &std::path::Path) -> Result<SegmentationResult> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Event log as JSON Lines, one event per line.
pub fn write_events_jsonl(events: &[AnomalyEvent], mut w: impl Write) -> Result<()> {
    for event in events {
        serde_json::to_writer(&mut w, event)?;
        writeln!(w)?;
    }
    Ok(())
}
