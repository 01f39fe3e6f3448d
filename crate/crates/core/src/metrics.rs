//! Segmentation scoring: the whole-frame error, the connected-components
//! error that ignores stray blobs away from the figure, and a paired
//! t-test for method comparisons.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Neighborhood used when tracing foreground components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(&self) -> &'static [(i32, i32)] {
        match self {
            Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

/// Per-frame error tally against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub false_pos: usize,
    pub false_neg: usize,
    pub gt_size: usize,
    /// (false_pos + false_neg) / gt_size.
    pub error: f64,
}

/// Fraction of pixels where the mask and ground truth disagree.
pub fn whole_frame_error(mask: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_shapes(mask, gt)?;
    let differing = mask.bits().iter().zip(gt.bits()).filter(|(a, b)| a != b).count();
    Ok(differing as f64 / (mask.height() * mask.width()) as f64)
}

/// Foreground component labels: background 0, components numbered from 1
/// in raster order of their first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    count: usize,
}

impl ComponentLabels {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.labels[i * self.width + j]
    }
}

/// Flood-fill labeling of maximal connected foreground regions.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    let (h, w) = (mask.height(), mask.width());
    let mut labels = vec![0u32; h * w];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..h * w {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(px) = stack.pop() {
            let (i, j) = ((px / w) as i32, (px % w) as i32);
            for &(di, dj) in connectivity.offsets() {
                let (y, x) = (i + di, j + dj);
                if y < 0 || y >= h as i32 || x < 0 || x >= w as i32 {
                    continue;
                }
                let q = y as usize * w + x as usize;
                if mask.bits()[q] && labels[q] == 0 {
                    labels[q] = count;
                    stack.push(q);
                }
            }
        }
    }
    ComponentLabels { height: h, width: w, labels, count: count as usize }
}

/// The figure-focused error: only mask components overlapping ground truth
/// contribute false positives, while false negatives count over all of
/// ground truth. Scaled by the ground-truth pixel count.
pub fn cc_error(mask: &BinaryMask, gt: &BinaryMask, connectivity: Connectivity) -> Result<FrameScore> {
    check_shapes(mask, gt)?;
    let gt_size = gt.count_foreground();
    if gt_size == 0 {
        return Err(Error::InvalidInput("ground truth has no foreground".into()));
    }
    let comps = connected_components(mask, connectivity);
    let mut overlaps = vec![false; comps.count() + 1];
    for (label, &in_gt) in comps.labels().iter().zip(gt.bits()) {
        if *label != 0 && in_gt {
            overlaps[*label as usize] = true;
        }
    }
    let mut false_pos = 0;
    let mut false_neg = 0;
    for ((label, &in_mask), &in_gt) in
        comps.labels().iter().zip(mask.bits()).zip(gt.bits())
    {
        if in_mask && !in_gt && overlaps[*label as usize] {
            false_pos += 1;
        }
        if in_gt && !in_mask {
            false_neg += 1;
        }
    }
    Ok(FrameScore {
        false_pos,
        false_neg,
        gt_size,
        error: (false_pos + false_neg) as f64 / gt_size as f64,
    })
}

/// Paired two-sided t-test on per-frame error sequences.
#[derive(Debug, Clone, Copy)]
pub struct PairedTTest {
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

/// t = mean(d) / (sd(d)/√n) on d = a − b with the n−1 divisor; the
/// two-sided p-value comes from the regularized incomplete beta function
/// I_x(ν/2, 1/2) at x = ν/(ν+t²).
pub fn paired_t_test(errors_a: &[f64], errors_b: &[f64]) -> Result<PairedTTest> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::Mismatch(format!(
            "paired samples have lengths {} and {}",
            errors_a.len(),
            errors_b.len()
        )));
    }
    let n = errors_a.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 pairs, got {n}")));
    }
    let d: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| a - b).collect();
    if d.iter().all(|&x| x == d[0]) {
        return Err(Error::ZeroVariance);
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = mean / (sd / (n as f64).sqrt());
    let df = (n - 1) as f64;
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t));
    Ok(PairedTTest { t, p, df: n - 1 })
}

fn check_shapes(mask: &BinaryMask, gt: &BinaryMask) -> Result<()> {
    if !mask.same_shape(gt) {
        return Err(Error::Mismatch(format!(
            "mask is {}x{} but ground truth is {}x{}",
            mask.height(),
            mask.width(),
            gt.height(),
            gt.width()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.chars()).map(|c| c == '#').collect();
        BinaryMask::new(h, w, bits).unwrap()
    }

    #[test]
    fn whole_frame_error_examples() {
        let gt = mask_from(&["##..", "##..", "....", "...."]);
        assert_eq!(whole_frame_error(&gt, &gt).unwrap(), 0.0);
        let complement =
            BinaryMask::new(4, 4, gt.bits().iter().map(|b| !b).collect()).unwrap();
        assert_eq!(whole_frame_error(&complement, &gt).unwrap(), 1.0);
        let mut off_by_three = gt.clone();
        off_by_three.set(3, 3, true);
        off_by_three.set(3, 2, true);
        off_by_three.set(0, 0, false);
        assert!((whole_frame_error(&off_by_three, &gt).unwrap() - 3.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn whole_frame_error_is_symmetric() {
        let a = mask_from(&["#..#", ".##.", "#...", "..##"]);
        let b = mask_from(&["##..", "..#.", "##..", "...#"]);
        assert_eq!(
            whole_frame_error(&a, &b).unwrap(),
            whole_frame_error(&b, &a).unwrap()
        );
    }

    #[test]
    fn components_of_empty_and_full_masks() {
        let empty = BinaryMask::filled(3, 3, false);
        let labels = connected_components(&empty, Connectivity::Eight);
        assert_eq!(labels.count(), 0);
        assert!(labels.labels().iter().all(|&l| l == 0));

        let full = BinaryMask::filled(3, 3, true);
        let labels = connected_components(&full, Connectivity::Four);
        assert_eq!(labels.count(), 1);
        assert!(labels.labels().iter().all(|&l| l == 1));
    }

    #[test]
    fn diagonal_pixels_depend_on_connectivity() {
        let m = mask_from(&["#.", ".#"]);
        assert_eq!(connected_components(&m, Connectivity::Eight).count(), 1);
        assert_eq!(connected_components(&m, Connectivity::Four).count(), 2);
    }

    #[test]
    fn component_labels_follow_raster_order() {
        let m = mask_from(&["#..#", "....", ".#.."]);
        let labels = connected_components(&m, Connectivity::Eight);
        assert_eq!(labels.get(0, 0), 1);
        assert_eq!(labels.get(0, 3), 2);
        assert_eq!(labels.get(2, 1), 3);
    }

    #[test]
    fn cc_error_perfect_match_is_zero() {
        let gt = mask_from(&[".##.", ".##.", "...."]);
        let score = cc_error(&gt, &gt, Connectivity::Eight).unwrap();
        assert_eq!((score.false_pos, score.false_neg), (0, 0));
        assert_eq!(score.error, 0.0);
    }

    #[test]
    fn disjoint_blob_is_ignored() {
        let gt = mask_from(&["##......", "##......", "........"]);
        let mut mask = gt.clone();
        mask.set(2, 6, true);
        mask.set(2, 7, true);
        let score = cc_error(&mask, &gt, Connectivity::Eight).unwrap();
        assert_eq!(score.error, 0.0, "blob not touching gt must not count");
        // The same pixels hurt the whole-frame criterion.
        assert!(whole_frame_error(&mask, &gt).unwrap() > 0.0);
    }

    #[test]
    fn shifted_block_splits_fp_and_fn() {
        // gt is a 4×4 block; mask is the same block shifted right by one:
        // 12 px overlap, 4 px outside gt, 4 px of gt missed.
        let gt = mask_from(&["####....", "####....", "####....", "####...."]);
        let mask = mask_from(&[".####...", ".####...", ".####...", ".####..."]);
        let score = cc_error(&mask, &gt, Connectivity::Eight).unwrap();
        assert_eq!((score.false_pos, score.false_neg, score.gt_size), (4, 4, 16));
        assert!((score.error - 0.5).abs() < 1e-12);
    }

    #[test]
    fn false_negatives_ignore_component_selection() {
        // A mask component that misses gt entirely: its pixels are not
        // false positives, but uncovered gt still counts as false negative.
        let gt = mask_from(&["###.....", "###.....", "........"]);
        let mask = mask_from(&["........", "........", "......##"]);
        let score = cc_error(&mask, &gt, Connectivity::Eight).unwrap();
        assert_eq!((score.false_pos, score.false_neg), (0, 6));
        assert_eq!(score.error, 1.0);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let empty = BinaryMask::filled(2, 2, false);
        assert!(cc_error(&empty, &empty, Connectivity::Eight).is_err());
    }

    #[test]
    fn t_test_hand_computed_example() {
        // d = {0.1, 0.2, 0.3, 0.4}: t = 0.25 / (0.129099/2) = 3.8730 and
        // the df = 3 two-sided p is 0.030466 (reference t-table value).
        let b = [0.0, 0.0, 0.0, 0.0];
        let a = [0.1, 0.2, 0.3, 0.4];
        let r = paired_t_test(&a, &b).unwrap();
        assert!((r.t - 3.8729833462074175).abs() < 1e-9);
        assert!((r.p - 0.030466291662).abs() < 1e-9);
        assert_eq!(r.df, 3);
    }

    #[test]
    fn t_test_antisymmetry() {
        let a = [0.12, 0.3, 0.21, 0.05, 0.4];
        let b = [0.1, 0.34, 0.18, 0.02, 0.33];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
    }

    #[test]
    fn t_test_degenerate_inputs() {
        assert!(matches!(paired_t_test(&[1.0], &[0.5]), Err(Error::InvalidInput(_))));
        assert!(matches!(paired_t_test(&[1.0, 2.0], &[0.5]), Err(Error::Mismatch(_))));
        // Constant differences (including a = b) have zero variance.
        let a = [2.0, 3.0, 4.0, 5.0];
        let b = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(paired_t_test(&a, &b), Err(Error::ZeroVariance)));
        assert!(matches!(paired_t_test(&a, &a), Err(Error::ZeroVariance)));
    }

    #[test]
    fn t_test_equal_means_give_large_p() {
        let a = [0.1, 0.2, 0.3, 0.4];
        let b = [0.2, 0.1, 0.4, 0.3];
        let r = paired_t_test(&a, &b).unwrap();
        assert!(r.t.abs() < 1e-12);
        assert!((r.p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn t_test_against_published_critical_values() {
        // Alternating differences 1 ± c with even n have mean 1 and sample
        // sd c·√(n/(n−1)), so c = √(n−1)/T yields the t statistic T.
        let make = |t: f64, n: usize| {
            let c = ((n - 1) as f64).sqrt() / t;
            let a: Vec<f64> =
                (0..n).map(|i| 1.0 + if i % 2 == 0 { c } else { -c }).collect();
            paired_t_test(&a, &vec![0.0; n]).unwrap()
        };
        // Published two-sided critical values: t(0.05, df=3) = 3.182,
        // t(0.05, df=9) = 2.262, t(0.01, df=5) = 4.032.
        for (t, n, p) in [(3.182, 4, 0.05), (2.262, 10, 0.05), (4.032, 6, 0.01)] {
            let r = make(t, n);
            assert!((r.t - t).abs() < 1e-9);
            assert!((r.p - p).abs() < 5e-4, "t={t} df={} gave p={}", n - 1, r.p);
        }
    }
}
