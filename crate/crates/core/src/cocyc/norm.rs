use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::flags::positive_qr;
use super::{check_tempered, qr_frames, CocycError, CocycleTrace, OseledetsFlags};
use crate::rng::SplitMix64;

/// A run of exponents `start..end` (largest first) treated as one block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockInfo {
    pub start: usize,
    pub end: usize,
    /// Rate used in the norm: the smallest exponent of an expanding block,
    /// the largest of a non-expanding one.
    pub exponent: f64,
    pub expanding: bool,
}

/// ε-adapted norms at every point `q_0 … q_T` of a trace.
///
/// On an expanding block the squared norm at step `j` is the unit-step sum
/// `Σ_{n=0}^{j} e^{2(λ−ε)n} |g_{−n} v|²`; on the others it is the forward sum
/// `Σ_{n=0}^{T−j} e^{−2(λ+ε)n} |g_n v|²`. Blocks are orthogonal, and the
/// ambient form is scaled by the number of blocks so that `|v| ≤ ‖v‖_ε`.
#[derive(Clone, Debug)]
pub struct AdaptedNorm {
    epsilon: f64,
    blocks: Vec<BlockInfo>,
    /// `bases[j][b]`: orthonormal basis of block `b` at `q_j`.
    bases: Vec<Vec<DMatrix<f64>>>,
    /// `grams[j][b]`: the block form in those coordinates.
    grams: Vec<Vec<DMatrix<f64>>>,
    /// `transitions[j][b]`: the cocycle from `q_j` to `q_{j+1}` in block coordinates.
    transitions: Vec<Vec<DMatrix<f64>>>,
    forms: Vec<DMatrix<f64>>,
    envelope: Vec<f64>,
    comparison: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub steps: usize,
    pub vectors: usize,
    pub violations: usize,
    /// Largest observed `‖image‖ / (bound · ‖v‖)`; at most 1 when the inequality holds.
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSummary {
    pub epsilon: f64,
    pub blocks: Vec<BlockInfo>,
    pub min_comparison: f64,
    pub max_envelope: f64,
    /// Tail slope of `ln envelope` along the orbit.
    pub envelope_slope: f64,
    pub envelope_slowly_varying: bool,
}

fn block_basis(fwd: &DMatrix<f64>, bwd: &DMatrix<f64>, start: usize, end: usize) -> DMatrix<f64> {
    let d = fwd.nrows();
    if start == 0 {
        return fwd.columns(0, end).into_owned();
    }
    if end == d {
        return bwd.columns(start, d - start).into_owned();
    }
    // E^{≥λ_end−1} ∩ E^{≤λ_start}: vectors of the fast span orthogonal to the
    // leading columns of the backward frame.
    let u = fwd.columns(0, end).into_owned();
    let w = bwd.columns(0, start).into_owned();
    let m = (w.transpose() * &u).transpose();
    let mut aug = DMatrix::zeros(end, start + end);
    aug.columns_mut(0, start).copy_from(&m);
    aug.columns_mut(start, end).fill_with_identity();
    let q = positive_qr(&aug).0;
    u * q.columns(start, end - start)
}

fn quad(g: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    c.dot(&(g * c))
}

pub fn adapted_norm(trace: &CocycleTrace, epsilon: f64, flags: &OseledetsFlags) -> Result<AdaptedNorm, CocycError> {
    let d = trace.fiber_dim();
    if flags.exponents.len() != d {
        return Err(CocycError::Shape(format!("flags describe {} exponents for a {d}-dimensional fiber", flags.exponents.len())));
    }
    if !(epsilon > 0.0) {
        return Err(CocycError::EpsilonTooLarge { epsilon, gap: f64::NAN });
    }
    let cuts: Vec<usize> = flags.levels.iter().filter(|l| l.resolved).map(|l| l.cut).collect();
    if d > 1 && cuts.is_empty() {
        return Err(CocycError::Unresolved("no exponent gap is resolved".into()));
    }
    let min_gap = flags.levels.iter().filter(|l| l.resolved).map(|l| l.gap).fold(f64::INFINITY, f64::min);
    if epsilon >= min_gap / 2.0 {
        return Err(CocycError::EpsilonTooLarge { epsilon, gap: min_gap });
    }
    let mut bounds = vec![0];
    bounds.extend(&cuts);
    bounds.push(d);
    let blocks: Vec<BlockInfo> = bounds
        .windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            let low = flags.exponents[end - 1];
            let expanding = low > 0.0;
            BlockInfo { start, end, exponent: if expanding { low } else { flags.exponents[start] }, expanding }
        })
        .collect();

    let frames = qr_frames(trace);
    let t = trace.steps();
    let bases: Vec<Vec<DMatrix<f64>>> = (0..=t)
        .map(|j| blocks.iter().map(|b| block_basis(&frames.forward[j], &frames.backward[j], b.start, b.end)).collect())
        .collect();
    let transitions: Vec<Vec<DMatrix<f64>>> = (0..t)
        .map(|j| {
            let a = &trace.matrices()[j];
            (0..blocks.len()).map(|b| bases[j + 1][b].transpose() * a * &bases[j][b]).collect()
        })
        .collect();

    let mut grams = vec![Vec::with_capacity(blocks.len()); t + 1];
    let mut per_block: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(blocks.len());
    for (b, info) in blocks.iter().enumerate() {
        let k = info.end - info.start;
        let id = DMatrix::<f64>::identity(k, k);
        let mut seq = vec![id.clone(); t + 1];
        if info.expanding {
            let w = (2.0 * (info.exponent - epsilon)).exp();
            for j in 1..=t {
                let inv = transitions[j - 1][b].clone().try_inverse().ok_or(CocycError::SingularStep(j - 1))?;
                seq[j] = &id + (inv.transpose() * &seq[j - 1] * &inv) * w;
            }
        } else {
            let w = (-2.0 * (info.exponent + epsilon)).exp();
            for j in (0..t).rev() {
                let tr = &transitions[j][b];
                seq[j] = &id + (tr.transpose() * &seq[j + 1] * tr) * w;
            }
        }
        per_block.push(seq);
    }
    for (j, g) in grams.iter_mut().enumerate() {
        g.extend(per_block.iter().map(|seq| seq[j].clone()));
    }

    let r = blocks.len() as f64;
    let mut forms = Vec::with_capacity(t + 1);
    let mut envelope = Vec::with_capacity(t + 1);
    let mut comparison = Vec::with_capacity(t + 1);
    for j in 0..=t {
        let mut full = DMatrix::zeros(d, d);
        let mut diag = DMatrix::zeros(d, d);
        for (b, info) in blocks.iter().enumerate() {
            full.columns_mut(info.start, info.end - info.start).copy_from(&bases[j][b]);
            diag.view_mut((info.start, info.start), (info.end - info.start, info.end - info.start)).copy_from(&grams[j][b]);
        }
        let inv = full.try_inverse().ok_or_else(|| CocycError::Numeric(format!("block bases degenerate at step {j}")))?;
        let form = inv.transpose() * diag * &inv * r;
        let form = (&form + form.transpose()) * 0.5;
        let eig = form.clone().symmetric_eigen().eigenvalues;
        envelope.push(eig.max().sqrt());
        comparison.push(eig.min().sqrt());
        forms.push(form);
    }
    Ok(AdaptedNorm { epsilon, blocks, bases, grams, transitions, forms, envelope, comparison })
}

impl AdaptedNorm {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn blocks(&self) -> &[BlockInfo] {
        &self.blocks
    }

    pub fn points(&self) -> usize {
        self.forms.len()
    }

    /// The ambient quadratic form at `q_j`.
    pub fn form(&self, j: usize) -> &DMatrix<f64> {
        &self.forms[j]
    }

    pub fn block_basis(&self, j: usize, b: usize) -> &DMatrix<f64> {
        &self.bases[j][b]
    }

    pub fn block_gram(&self, j: usize, b: usize) -> &DMatrix<f64> {
        &self.grams[j][b]
    }

    pub fn norm(&self, j: usize, v: &DVector<f64>) -> f64 {
        quad(&self.forms[j], v).sqrt()
    }

    /// Norm of a vector given in the coordinates of block `b` at `q_j`.
    pub fn block_norm(&self, j: usize, b: usize, c: &DVector<f64>) -> f64 {
        quad(&self.grams[j][b], c).sqrt()
    }

    /// Upper comparison constants `‖v‖_ε ≤ envelope_j · |v|`.
    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    /// Lower comparison constants `comparison_j · |v| ≤ ‖v‖_ε`, all at least 1.
    pub fn comparison(&self) -> &[f64] {
        &self.comparison
    }

    /// Checks the one-step inequalities on every block at every step with
    /// `vectors` random vectors each. Expanding blocks:
    /// `‖g_{−1} v‖ ≤ e^{−(λ−ε)} ‖v‖`; the others: `‖g_1 v‖ ≤ e^{λ+ε} ‖v‖`.
    pub fn check_contraction(&self, rng: &mut SplitMix64, vectors: usize) -> ContractionCheck {
        let mut violations = 0;
        let mut worst = 0.0f64;
        for (j, trans) in self.transitions.iter().enumerate() {
            for (b, info) in self.blocks.iter().enumerate() {
                let k = info.end - info.start;
                let inv = if info.expanding { trans[b].clone().try_inverse() } else { None };
                for _ in 0..vectors {
                    let v = DVector::from_fn(k, |_, _| rng.normal());
                    let ratio = if info.expanding {
                        let back = inv.as_ref().map_or_else(|| DVector::from_element(k, f64::INFINITY), |m| m * &v);
                        self.block_norm(j, b, &back) / ((-(info.exponent - self.epsilon)).exp() * self.block_norm(j + 1, b, &v))
                    } else {
                        let fwd = &trans[b] * &v;
                        self.block_norm(j + 1, b, &fwd) / ((info.exponent + self.epsilon).exp() * self.block_norm(j, b, &v))
                    };
                    worst = worst.max(ratio);
                    if !(ratio <= 1.0 + 1e-12) {
                        violations += 1;
                    }
                }
            }
        }
        ContractionCheck { steps: self.transitions.len(), vectors, violations, worst_ratio: worst }
    }

    pub fn summary(&self) -> NormSummary {
        let logs: Vec<f64> = self.envelope.iter().map(|e| e.ln()).collect();
        let tempered = check_tempered(&logs, self.epsilon);
        NormSummary {
            epsilon: self.epsilon,
            blocks: self.blocks.clone(),
            min_comparison: self.comparison.iter().copied().fold(f64::INFINITY, f64::min),
            max_envelope: self.envelope.iter().copied().fold(0.0, f64::max),
            envelope_slope: tempered.tail_slope,
            envelope_slowly_varying: tempered.passes,
        }
    }
}
