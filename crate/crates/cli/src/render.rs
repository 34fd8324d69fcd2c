//! Monospace rendering of space curves and schedule charts.

use spacesched::{ProcessSet, Space};

const MAX_COLUMNS: usize = 64;
const MAX_ROWS: usize = 12;

/// Downsamples a sequence of columns to at most `MAX_COLUMNS`, returning the
/// stride used.
fn stride_for(len: usize) -> usize {
    len.div_ceil(MAX_COLUMNS)
}

/// One vertical bar chart per process.
pub fn render_curves(set: &ProcessSet) -> String {
    let mut out = String::new();
    for p in set.processes() {
        let stride = stride_for(p.len());
        let values: Vec<Space> = p.trace().iter().copied().step_by(stride).collect();
        let peak = *values.iter().max().unwrap();
        let rows = (peak as usize).min(MAX_ROWS).max(1);
        let scale = peak.div_ceil(rows as u64).max(1);
        out.push_str(&format!("{} (m={}, max={})", p.id(), p.len(), peak));
        if stride > 1 {
            out.push_str(&format!("  [downsampled {stride}x]"));
        }
        if scale > 1 {
            out.push_str(&format!("  [1 row = {scale} cells]"));
        }
        out.push('\n');
        for row in (1..=rows).rev() {
            let threshold = row as u64 * scale;
            let mut line = format!("{:>6} |", threshold);
            for &v in &values {
                line.push(if v >= threshold { '#' } else { ' ' });
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&format!("{:>6} +{}\n", 0, "-".repeat(values.len())));
    }
    out
}

/// A step-by-step chart: one row per process, a sum row, and a peak marker,
/// mirroring the usual timeline figures. `active[j][t]` marks the steps at
/// which process `j` occupies the timeline; inactive cells render as dots.
pub fn render_schedule_chart(
    ids: &[String],
    steps: &[Vec<Space>],
    active: Option<&[Vec<bool>]>,
) -> String {
    let mut out = String::new();
    if steps.is_empty() {
        return "(empty schedule)\n".to_string();
    }
    let stride = stride_for(steps.len());
    let picked: Vec<usize> = (0..steps.len()).step_by(stride).collect();
    if stride > 1 {
        out.push_str(&format!(
            "[{} steps, showing every {stride}th]\n",
            steps.len()
        ));
    }
    let sums: Vec<Space> = steps.iter().map(|s| s.iter().sum()).collect();
    let peak = *sums.iter().max().unwrap();
    let peak_step = sums.iter().position(|&s| s == peak).unwrap();

    let id_width = ids.iter().map(|s| s.len()).max().unwrap_or(2).max(4);
    let cell = sums
        .iter()
        .map(|s| s.to_string().len())
        .max()
        .unwrap()
        .max(picked.last().map(|&t| (t + 1).to_string().len()).unwrap());

    let mut header = format!("{:<id_width$}", "step");
    for &t in &picked {
        header.push_str(&format!(" {:>cell$}", t + 1));
    }
    out.push_str(&header);
    out.push('\n');
    for (j, id) in ids.iter().enumerate() {
        let mut line = format!("{:<id_width$}", id);
        for &t in &picked {
            let live = active.map_or(true, |a| a[j][t]);
            if live {
                line.push_str(&format!(" {:>cell$}", steps[t][j]));
            } else {
                line.push_str(&format!(" {:>cell$}", "."));
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    let mut sumline = format!("{:<id_width$}", "sum");
    for &t in &picked {
        sumline.push_str(&format!(" {:>cell$}", sums[t]));
    }
    out.push_str(&sumline);
    out.push('\n');
    let mut marker = " ".repeat(id_width);
    for &t in &picked {
        marker.push(' ');
        marker.push_str(&" ".repeat(cell.saturating_sub(1)));
        marker.push(if t == peak_step { '^' } else { ' ' });
    }
    out.push_str(marker.trim_end());
    out.push('\n');
    out.push_str(&format!("peak {} at step {}\n", peak, peak_step + 1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use spacesched::{make_process, Process};

    #[test]
    fn curve_has_one_column_per_index() {
        let set = ProcessSet::new(vec![make_process("P1", &[1, 4, 1]).unwrap()]).unwrap();
        let text = render_curves(&set);
        assert!(text.contains("P1 (m=3, max=4)"));
        let bar_row = text.lines().find(|l| l.contains('#')).unwrap();
        assert_eq!(bar_row.matches('#').count(), 1); // only the peak reaches row 4
    }

    #[test]
    fn long_traces_are_downsampled_with_notice() {
        let long: Vec<u64> = (0..500).map(|i| i % 7).collect();
        let set = ProcessSet::new(vec![Process::new("P1", long).unwrap()]).unwrap();
        let text = render_curves(&set);
        assert!(text.contains("[downsampled 8x]"));
    }

    #[test]
    fn chart_reports_peak_column() {
        let ids = vec!["P1".to_string(), "P2".to_string()];
        let steps = vec![vec![1, 2], vec![7, 10], vec![3, 4]];
        let text = render_schedule_chart(&ids, &steps, None);
        assert!(text.contains("peak 17 at step 2"));
        assert!(text.contains("sum"));
    }
}
