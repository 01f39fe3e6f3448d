//! Grid flow network construction and exact min-cut segmentation.
//!
//! Every pixel gets a source link weighted δ and a sink link weighted
//! 2τ−δ; 4-connected neighbors (plus co-located pixels in adjacent frames
//! for multiframe problems) are linked with uniform weight α·τ. The
//! minimum s/t cut of this network is the minimum of `cut_energy` over
//! all labelings.

use crate::diffmap::DifferenceMap;
use crate::error::{Error, Result};
use crate::maxflow;
use crate::raster::BinaryMask;

/// Segmentation parameters: the foreground threshold τ and the neighbor
/// bonding strength α (neighbor links carry α·τ).
#[derive(Debug, Clone, Copy)]
pub struct SegParams {
    tau: f64,
    alpha: f64,
}

impl SegParams {
    pub fn new(tau: f64, alpha: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(SegParams { tau, alpha })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn neighbor_cap(&self) -> f64 {
        self.alpha * self.tau
    }
}

/// A grid-structured flow network ready for max-flow. Terminal capacities
/// are canonically shifted: at every node at most one of src_cap/sink_cap
/// is positive.
#[derive(Debug, Clone)]
pub struct CutProblem {
    height: usize,
    width: usize,
    frames: usize,
    src_cap: Vec<f64>,
    sink_cap: Vec<f64>,
    neighbor_cap: f64,
}

impl CutProblem {
    /// Builds a problem from raw terminal capacities (no shifting applied).
    pub fn from_parts(
        height: usize,
        width: usize,
        frames: usize,
        src_cap: Vec<f64>,
        sink_cap: Vec<f64>,
        neighbor_cap: f64,
    ) -> Result<Self> {
        let n = height * width * frames;
        if n == 0 {
            return Err(Error::InvalidInput("cut problem must have at least one node".into()));
        }
        if src_cap.len() != n || sink_cap.len() != n {
            return Err(Error::Mismatch(format!(
                "capacity arrays have {} and {} entries, expected {n}",
                src_cap.len(),
                sink_cap.len()
            )));
        }
        if src_cap.iter().chain(&sink_cap).any(|c| !(*c >= 0.0)) || !(neighbor_cap >= 0.0) {
            return Err(Error::InvalidInput("capacities must be nonnegative".into()));
        }
        Ok(CutProblem { height, width, frames, src_cap, sink_cap, neighbor_cap })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn src_cap(&self) -> &[f64] {
        &self.src_cap
    }

    pub fn sink_cap(&self) -> &[f64] {
        &self.sink_cap
    }

    pub fn neighbor_cap(&self) -> f64 {
        self.neighbor_cap
    }

    /// Cost of the cut induced by `masks` on this problem's capacities:
    /// source links of background nodes, sink links of foreground nodes,
    /// and every neighbor link whose endpoints disagree.
    pub fn cut_value(&self, masks: &[BinaryMask]) -> Result<f64> {
        self.check_masks(masks)?;
        let (h, w) = (self.height, self.width);
        let mut value = 0.0;
        for (t, mask) in masks.iter().enumerate() {
            for i in 0..h {
                for j in 0..w {
                    let v = (t * h + i) * w + j;
                    if mask.get(i, j) {
                        value += self.sink_cap[v];
                    } else {
                        value += self.src_cap[v];
                    }
                    if j + 1 < w && mask.get(i, j) != mask.get(i, j + 1) {
                        value += self.neighbor_cap;
                    }
                    if i + 1 < h && mask.get(i, j) != mask.get(i + 1, j) {
                        value += self.neighbor_cap;
                    }
                    if t + 1 < self.frames && mask.get(i, j) != masks[t + 1].get(i, j) {
                        value += self.neighbor_cap;
                    }
                }
            }
        }
        Ok(value)
    }

    fn check_masks(&self, masks: &[BinaryMask]) -> Result<()> {
        if masks.len() != self.frames {
            return Err(Error::Mismatch(format!(
                "{} masks for a {}-frame problem",
                masks.len(),
                self.frames
            )));
        }
        for m in masks {
            if m.height() != self.height || m.width() != self.width {
                return Err(Error::Mismatch(format!(
                    "mask is {}x{} but problem is {}x{}",
                    m.height(),
                    m.width(),
                    self.height,
                    self.width
                )));
            }
        }
        Ok(())
    }
}

/// Canonical per-node shift: subtracting min(w_s, w_t) from both terminal
/// weights adds a labeling-independent constant to every cut, so the
/// argmin is untouched; it also repairs the negative sink weight that
/// appears when δ > 2τ.
fn shifted_terminals(delta: &[f64], tau: f64) -> (Vec<f64>, Vec<f64>) {
    let mut src = Vec::with_capacity(delta.len());
    let mut sink = Vec::with_capacity(delta.len());
    for &d in delta {
        let w_s = d;
        let w_t = 2.0 * tau - d;
        let m = w_s.min(w_t);
        src.push((w_s - m).max(0.0));
        sink.push((w_t - m).max(0.0));
    }
    (src, sink)
}

/// Single-frame network per the terminal weight equations.
pub fn build_cut_problem(diff: &DifferenceMap, p: &SegParams) -> CutProblem {
    let (src, sink) = shifted_terminals(diff.delta(), p.tau());
    CutProblem {
        height: diff.height(),
        width: diff.width(),
        frames: 1,
        src_cap: src,
        sink_cap: sink,
        neighbor_cap: p.neighbor_cap(),
    }
}

/// Multiframe network: the same per-node construction with temporal links
/// between co-located pixels in adjacent frames, at the same α·τ weight
/// as the spatial links.
pub fn build_multiframe_problem(diffs: &[DifferenceMap], p: &SegParams) -> Result<CutProblem> {
    if diffs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "multiframe problem needs at least 2 frames, got {}",
            diffs.len()
        )));
    }
    let (h, w) = (diffs[0].height(), diffs[0].width());
    let mut delta = Vec::with_capacity(h * w * diffs.len());
    for d in diffs {
        if d.height() != h || d.width() != w {
            return Err(Error::Mismatch(format!(
                "frame is {}x{} but first frame is {}x{}",
                d.height(),
                d.width(),
                h,
                w
            )));
        }
        delta.extend_from_slice(d.delta());
    }
    let (src, sink) = shifted_terminals(&delta, p.tau());
    Ok(CutProblem {
        height: h,
        width: w,
        frames: diffs.len(),
        src_cap: src,
        sink_cap: sink,
        neighbor_cap: p.neighbor_cap(),
    })
}

/// An exact minimum cut: one mask per frame plus the max-flow value
/// (which equals the cut's cost on the shifted capacities).
#[derive(Debug, Clone)]
pub struct CutSolution {
    pub masks: Vec<BinaryMask>,
    pub max_flow: f64,
}

/// Computes an exact maximum flow and labels a node foreground iff it is
/// reachable from the source in the residual graph (ties therefore
/// resolve to background).
pub fn solve_min_cut(problem: &CutProblem) -> CutSolution {
    let term: Vec<f64> =
        problem.src_cap.iter().zip(&problem.sink_cap).map(|(s, t)| s - t).collect();
    let result = maxflow::solve_grid(
        problem.height,
        problem.width,
        problem.frames,
        term,
        problem.neighbor_cap,
    );
    let plane = problem.height * problem.width;
    let masks = result
        .labels
        .chunks_exact(plane)
        .map(|chunk| {
            BinaryMask::new(problem.height, problem.width, chunk.to_vec())
                .expect("solver label count matches the grid")
        })
        .collect();
    CutSolution { masks, max_flow: result.max_flow }
}

/// End-to-end single-frame graph segmentation.
pub fn segment_graph(diff: &DifferenceMap, p: &SegParams) -> BinaryMask {
    let mut solution = solve_min_cut(&build_cut_problem(diff, p));
    solution.masks.remove(0)
}

/// The cut-cost functional the segmentation minimizes:
/// Σ_bg δ + Σ_fg (2τ − δ) + α·τ·(# of 4-connected pairs with differing
/// labels). Serves as the optimality oracle for the solver.
pub fn cut_energy(mask: &BinaryMask, diff: &DifferenceMap, p: &SegParams) -> Result<f64> {
    if mask.height() != diff.height() || mask.width() != diff.width() {
        return Err(Error::Mismatch(format!(
            "mask is {}x{} but difference map is {}x{}",
            mask.height(),
            mask.width(),
            diff.height(),
            diff.width()
        )));
    }
    let (h, w) = (mask.height(), mask.width());
    let (tau, link) = (p.tau(), p.neighbor_cap());
    let mut energy = 0.0;
    for i in 0..h {
        for j in 0..w {
            let d = diff.get(i, j);
            energy += if mask.get(i, j) { 2.0 * tau - d } else { d };
            if j + 1 < w && mask.get(i, j) != mask.get(i, j + 1) {
                energy += link;
            }
            if i + 1 < h && mask.get(i, j) != mask.get(i + 1, j) {
                energy += link;
            }
        }
    }
    Ok(energy)
}

/// `cut_energy` extended over a frame stack: per-frame terms plus α·τ for
/// every temporally adjacent pair of co-located pixels that disagree.
pub fn multiframe_cut_energy(
    masks: &[BinaryMask],
    diffs: &[DifferenceMap],
    p: &SegParams,
) -> Result<f64> {
    if masks.len() != diffs.len() {
        return Err(Error::Mismatch(format!(
            "{} masks for {} difference maps",
            masks.len(),
            diffs.len()
        )));
    }
    let mut energy = 0.0;
    for (mask, diff) in masks.iter().zip(diffs) {
        energy += cut_energy(mask, diff, p)?;
    }
    for pair in masks.windows(2) {
        if !pair[0].same_shape(&pair[1]) {
            return Err(Error::Mismatch("mask shapes differ across frames".into()));
        }
        let disagree =
            pair[0].bits().iter().zip(pair[1].bits()).filter(|(a, b)| a != b).count();
        energy += p.neighbor_cap() * disagree as f64;
    }
    Ok(energy)
}
