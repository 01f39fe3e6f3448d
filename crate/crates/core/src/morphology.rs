//! Binary morphology with disk structuring elements, plus the baseline
//! threshold + closing + opening segmenter.

use crate::diffmap::DifferenceMap;
use crate::raster::BinaryMask;

/// A disk-shaped neighborhood: all integer offsets within Euclidean
/// distance `radius` of the origin. Always contains (0,0) and is symmetric
/// under negation.
#[derive(Debug, Clone)]
pub struct StructuringElement {
    radius: u32,
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }
}

/// Closed disk of radius `r`: offsets (di, dj) with di² + dj² ≤ r².
pub fn disk_element(r: u32) -> StructuringElement {
    let ri = r as i32;
    let r2 = ri * ri;
    let mut offsets = Vec::new();
    for di in -ri..=ri {
        for dj in -ri..=ri {
            if di * di + dj * dj <= r2 {
                offsets.push((di, dj));
            }
        }
    }
    StructuringElement { radius: r, offsets }
}

/// Expands the foreground: a pixel becomes foreground if any element
/// offset reaches a foreground pixel. Reads outside the image are
/// background.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (h, w) = (mask.height() as i32, mask.width() as i32);
    let mut out = BinaryMask::filled(mask.height(), mask.width(), false);
    for i in 0..h {
        for j in 0..w {
            let hit = se.offsets().iter().any(|&(di, dj)| {
                let (y, x) = (i - di, j - dj);
                y >= 0 && y < h && x >= 0 && x < w && mask.get(y as usize, x as usize)
            });
            if hit {
                out.set(i as usize, j as usize, true);
            }
        }
    }
    out
}

/// Expands the background: a pixel stays foreground only if every element
/// offset lands on foreground. Reads outside the image are foreground, so
/// the border does not erode by itself.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (h, w) = (mask.height() as i32, mask.width() as i32);
    let mut out = BinaryMask::filled(mask.height(), mask.width(), false);
    for i in 0..h {
        for j in 0..w {
            let all = se.offsets().iter().all(|&(di, dj)| {
                let (y, x) = (i + di, j + dj);
                y < 0 || y >= h || x < 0 || x >= w || mask.get(y as usize, x as usize)
            });
            if all {
                out.set(i as usize, j as usize, true);
            }
        }
    }
    out
}

/// Dilation followed by erosion; fills holes smaller than the element.
pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

/// Erosion followed by dilation; removes specks smaller than the element.
pub fn open(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

/// The morphological baseline: threshold at `tau`, then close and open
/// with a radius-`r` disk. r = 0 degenerates to pure thresholding.
pub fn segment_morph(diff: &DifferenceMap, tau: f64, r: u32) -> BinaryMask {
    let se = disk_element(r);
    open(&close(&diff.threshold(tau), &se), &se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.chars()).map(|c| c == '#').collect();
        BinaryMask::new(h, w, bits).unwrap()
    }

    #[test]
    fn disk_sizes() {
        assert_eq!(disk_element(0).offsets(), &[(0, 0)]);
        assert_eq!(disk_element(1).offsets().len(), 5);
        assert_eq!(disk_element(2).offsets().len(), 13);
        assert!(disk_element(1).offsets().contains(&(0, 0)));
    }

    #[test]
    fn disk_is_symmetric_under_negation() {
        for r in 0..=4 {
            let se = disk_element(r);
            for &(di, dj) in se.offsets() {
                assert!(se.offsets().contains(&(-di, -dj)));
            }
        }
    }

    #[test]
    fn dilate_single_pixel_makes_plus() {
        let m = mask_from(&[".....", ".....", "..#..", ".....", "....."]);
        let want = mask_from(&[".....", "..#..", ".###.", "..#..", "....."]);
        assert_eq!(dilate(&m, &disk_element(1)), want);
    }

    #[test]
    fn dilate_edge_cases() {
        let empty = BinaryMask::filled(4, 4, false);
        let full = BinaryMask::filled(4, 4, true);
        let se = disk_element(1);
        assert_eq!(dilate(&empty, &se), empty);
        assert_eq!(dilate(&full, &se), full);
    }

    #[test]
    fn erode_plus_back_to_center() {
        let plus = mask_from(&[".....", "..#..", ".###.", "..#..", "....."]);
        let want = mask_from(&[".....", ".....", "..#..", ".....", "....."]);
        assert_eq!(erode(&plus, &disk_element(1)), want);
    }

    #[test]
    fn erode_respects_foreground_border_padding() {
        let full = BinaryMask::filled(3, 3, true);
        for r in 0..=3 {
            assert_eq!(erode(&full, &disk_element(r)), full);
        }
        let single = mask_from(&["...", ".#.", "..."]);
        assert_eq!(erode(&single, &disk_element(1)), BinaryMask::filled(3, 3, false));
    }

    #[test]
    fn close_bridges_a_one_pixel_gap() {
        let m = mask_from(&[".#.#."]);
        let closed = close(&m, &disk_element(1));
        assert!(closed.get(0, 2), "gap pixel should be filled");
        assert!(closed.get(0, 1) && closed.get(0, 3));
    }

    #[test]
    fn open_removes_isolated_pixel() {
        let m = mask_from(&["...", ".#.", "..."]);
        assert_eq!(open(&m, &disk_element(1)), BinaryMask::filled(3, 3, false));
    }

    #[test]
    fn solid_block_is_fixed_by_open_and_close() {
        let block = BinaryMask::filled(10, 10, true);
        let se = disk_element(1);
        assert_eq!(open(&block, &se), block);
        assert_eq!(close(&block, &se), block);
    }

    #[test]
    fn segment_morph_radius_zero_is_thresholding() {
        let diff = DifferenceMap::new(2, 3, vec![0.1, 0.9, 0.5, 0.50001, 0.2, 1.3]).unwrap();
        assert_eq!(segment_morph(&diff, 0.5, 0), diff.threshold(0.5));
    }

    fn complement(m: &BinaryMask) -> BinaryMask {
        BinaryMask::new(m.height(), m.width(), m.bits().iter().map(|b| !b).collect()).unwrap()
    }

    fn subset(a: &BinaryMask, b: &BinaryMask) -> bool {
        a.bits().iter().zip(b.bits()).all(|(x, y)| !x || *y)
    }

    proptest! {
        #[test]
        fn morphology_laws(
            h in 1usize..9, w in 1usize..9, r in 0u32..4,
            seed in proptest::collection::vec(proptest::bool::ANY, 64),
        ) {
            let bits: Vec<bool> = seed.iter().cycle().take(h * w).copied().collect();
            let m = BinaryMask::new(h, w, bits).unwrap();
            let se = disk_element(r);

            // Duality through complement (with the chosen border padding).
            prop_assert_eq!(erode(&m, &se), complement(&dilate(&complement(&m), &se)));

            // Ordering: erode ⊆ id ⊆ dilate, open ⊆ id ⊆ close.
            prop_assert!(subset(&erode(&m, &se), &m));
            prop_assert!(subset(&m, &dilate(&m, &se)));
            prop_assert!(subset(&open(&m, &se), &m));
            prop_assert!(subset(&m, &close(&m, &se)));

            // Idempotence.
            let o = open(&m, &se);
            let c = close(&m, &se);
            prop_assert_eq!(open(&o, &se), o.clone());
            prop_assert_eq!(close(&c, &se), c.clone());
        }

        #[test]
        fn morphology_is_monotone(
            h in 1usize..8, w in 1usize..8, r in 0u32..3,
            seed in proptest::collection::vec(0u8..4, 49),
        ) {
            // Build nested masks m1 ⊆ m2 from a shared random field.
            let n = h * w;
            let m1 = BinaryMask::new(h, w, seed[..n].iter().map(|&v| v == 3).collect()).unwrap();
            let m2 = BinaryMask::new(h, w, seed[..n].iter().map(|&v| v >= 2).collect()).unwrap();
            let se = disk_element(r);
            prop_assert!(subset(&dilate(&m1, &se), &dilate(&m2, &se)));
            prop_assert!(subset(&erode(&m1, &se), &erode(&m2, &se)));
            prop_assert!(subset(&open(&m1, &se), &open(&m2, &se)));
            prop_assert!(subset(&close(&m1, &se), &close(&m2, &se)));
        }
    }
}
