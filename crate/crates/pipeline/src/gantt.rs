//! Text Gantt chart of a schedule.

use std::fmt::Write as _;

use onts_core::{CandidateSolution, Instance};

/// One row per job, `█` where the job runs and `·` elsewhere, with a time
/// ruler marking every tenth step.
pub fn render(inst: &Instance, sol: &CandidateSolution) -> String {
    let horizon = inst.horizon();
    let label_width = format!("job {}", inst.n_jobs()).len();
    let mut out = String::new();
    let ruler: String = (1..=horizon)
        .map(|t| {
            if t % 10 == 0 {
                char::from(b'0' + ((t / 10) % 10) as u8)
            } else {
                ' '
            }
        })
        .collect();
    let _ = writeln!(out, "{:label_width$} {}", "", ruler.trim_end());
    for j in 0..inst.n_jobs() {
        let row: String = sol
            .x
            .row(j)
            .iter()
            .map(|&v| if v == 1 { '█' } else { '·' })
            .collect();
        let _ = writeln!(out, "{:<label_width$} {row}", format!("job {}", j + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use onts_core::{random_instance, BinaryMatrix};

    #[test]
    fn rows_follow_x() {
        let inst = random_instance(2, 4, 1).unwrap();
        let x = BinaryMatrix::from_rows(&[vec![1, 1, 0, 0], vec![0, 0, 0, 1]]).unwrap();
        let text = render(&inst, &CandidateSolution::from_x(x));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "job 1 ██··");
        assert_eq!(lines[2], "job 2 ···█");
    }
}
