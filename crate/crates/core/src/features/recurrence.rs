use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Binary recurrence matrix of a univariate segment: entry `(i, j)` is 1
/// iff `|x_i - x_j| <= epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrencePlot {
    size: usize,
    cells: Vec<u8>,
    pub epsilon: f64,
    /// Length of the segment before downsampling.
    pub source_length: usize,
}

impl RecurrencePlot {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.size + j] == 1
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum()
    }

    pub fn recurrence_rate(&self) -> f64 {
        self.ones() as f64 / (self.size * self.size) as f64
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.cells.chunks(self.size).map(<[u8]>::to_vec).collect()
    }
}

/// 10% of the segment's value range.
pub fn default_epsilon(segment: &[f64]) -> f64 {
    let (lo, hi) = segment
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        0.1 * (hi - lo)
    } else {
        0.0
    }
}

/// Builds the recurrence plot of `segment`. Segments longer than
/// `max_size` are first reduced by uniform index striding.
pub fn recurrence_plot(segment: &[f64], epsilon: f64, max_size: usize) -> Result<RecurrencePlot, FeatureError> {
    if segment.len() < 2 {
        return Err(FeatureError::Input(format!(
            "recurrence plot needs at least 2 values, got {}",
            segment.len()
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(FeatureError::Input(format!("epsilon {epsilon} must be >= 0")));
    }
    if max_size < 2 {
        return Err(FeatureError::Input("max_size must be at least 2".into()));
    }
    let values: Vec<f64> = if segment.len() > max_size {
        (0..max_size).map(|k| segment[k * segment.len() / max_size]).collect()
    } else {
        segment.to_vec()
    };
    let n = values.len();
    let mut cells = vec![0u8; n * n];
    for i in 0..n {
        cells[i * n + i] = 1;
        for j in i + 1..n {
            if (values[i] - values[j]).abs() <= epsilon {
                cells[i * n + j] = 1;
                cells[j * n + i] = 1;
            }
        }
    }
    Ok(RecurrencePlot {
        size: n,
        cells,
        epsilon,
        source_length: segment.len(),
    })
}

pub const SUMMARY_FEATURE_NAMES: [&str; 12] = [
    "recurrence_rate",
    "determinism",
    "mean_diagonal",
    "max_diagonal",
    "row_density_0",
    "row_density_1",
    "row_density_2",
    "row_density_3",
    "row_density_4",
    "row_density_5",
    "row_density_6",
    "row_density_7",
];

/// Fixed-length description of a plot: recurrence rate, determinism,
/// mean and max diagonal line length, and an 8-bin histogram of row
/// densities (fractions of rows).
///
/// Diagonal statistics ignore the main diagonal and count lines of length
/// at least 2.
pub fn recurrence_summary_features(rp: &RecurrencePlot) -> Vec<f64> {
    let n = rp.size();
    let mut off_diag_ones = 0usize;
    let mut line_points = 0usize;
    let mut lines = 0usize;
    let mut longest = 0usize;
    for k in 1..n {
        let mut run = 0usize;
        for i in 0..=(n - k) {
            let on = i < n - k && rp.get(i, i + k);
            if on {
                run += 1;
                off_diag_ones += 2;
            } else {
                if run >= 2 {
                    lines += 2;
                    line_points += 2 * run;
                    longest = longest.max(run);
                }
                run = 0;
            }
        }
    }
    let determinism = if off_diag_ones > 0 {
        line_points as f64 / off_diag_ones as f64
    } else {
        0.0
    };
    let mean_line = if lines > 0 { line_points as f64 / lines as f64 } else { 0.0 };

    let mut hist = [0.0; 8];
    for i in 0..n {
        let density = (0..n).filter(|&j| rp.get(i, j)).count() as f64 / n as f64;
        hist[((density * 8.0) as usize).min(7)] += 1.0 / n as f64;
    }

    let mut out = vec![rp.recurrence_rate(), determinism, mean_line, longest as f64];
    out.extend_from_slice(&hist);
    out
}

/// Binary PGM (P5): recurrent cells black, others white.
pub fn write_pgm<W: Write>(rp: &RecurrencePlot, mut out: W) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", rp.size, rp.size)?;
    let pixels: Vec<u8> = rp.cells.iter().map(|&c| if c == 1 { 0 } else { 255 }).collect();
    out.write_all(&pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_segment_all_ones() {
        let rp = recurrence_plot(&[3.0, 3.0, 3.0], 0.0, 64).unwrap();
        assert_eq!(rp.to_rows(), vec![vec![1; 3]; 3]);
        assert_eq!(recurrence_summary_features(&rp)[0], 1.0);
    }

    #[test]
    fn distant_pair() {
        let rp = recurrence_plot(&[0.0, 10.0], 1.0, 64).unwrap();
        assert_eq!(rp.to_rows(), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn ramp_of_three() {
        let rp = recurrence_plot(&[0.0, 1.0, 2.0], 1.0, 64).unwrap();
        assert_eq!(rp.to_rows(), vec![vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 1]]);
        let f = recurrence_summary_features(&rp);
        assert!((f[0] - 7.0 / 9.0).abs() < 1e-15);
        // off-diagonal ones (0,1),(1,2) and mirrors form one line of length 2 per side
        assert_eq!(f[1], 1.0);
        assert_eq!((f[2], f[3]), (2.0, 2.0));
    }

    #[test]
    fn identity_rate() {
        let rp = recurrence_plot(&[0.0, 10.0, 20.0, 30.0], 1.0, 64).unwrap();
        let f = recurrence_summary_features(&rp);
        assert_eq!(f.len(), SUMMARY_FEATURE_NAMES.len());
        assert_eq!(f[0], 0.25);
        assert_eq!(f[1], 0.0);
        // every row has density 1/4 -> bin 2
        assert_eq!(f[4 + 2], 1.0);
    }

    #[test]
    fn downsampling_and_errors() {
        let seg: Vec<f64> = (0..100).map(f64::from).collect();
        let rp = recurrence_plot(&seg, 0.5, 10).unwrap();
        assert_eq!((rp.size(), rp.source_length), (10, 100));
        assert!(recurrence_plot(&[1.0], 0.1, 10).is_err());
        assert!(recurrence_plot(&[1.0, 2.0], -0.1, 10).is_err());
        assert!((default_epsilon(&[2.0, 7.0, 12.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pgm_layout() {
        let rp = recurrence_plot(&[0.0, 10.0], 1.0, 64).unwrap();
        let mut buf = Vec::new();
        write_pgm(&rp, &mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n2 2\n255\n");
        assert_eq!(&buf[11..], &[0, 255, 255, 0]);
    }

    proptest! {
        #[test]
        fn symmetric_with_unit_diagonal(seg in prop::collection::vec(-50f64..50.0, 2..40), eps in 0f64..20.0) {
            let rp = recurrence_plot(&seg, eps, 32).unwrap();
            for i in 0..rp.size() {
                prop_assert!(rp.get(i, i));
                for j in 0..rp.size() {
                    prop_assert_eq!(rp.get(i, j), rp.get(j, i));
                }
            }
        }
    }
}
