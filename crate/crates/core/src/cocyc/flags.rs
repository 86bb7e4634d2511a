use nalgebra::DMatrix;
use serde::Serialize;

use super::{lyapunov_qr, CocycError, CocycleTrace};

/// QR frames `Q_j` for every point `j` of a trace.
///
/// `forward[j]`: leading columns span `E^{≥λ_c}(q_j)`, pushed from `q_0`.
/// `backward[j]`: trailing columns span `E^{≤λ_{c+1}}(q_j)`, pulled from `q_T`
/// by QR over the transposed matrices.
#[derive(Clone, Debug)]
pub struct QrFrames {
    pub forward: Vec<DMatrix<f64>>,
    pub backward: Vec<DMatrix<f64>>,
    /// `R` factors of the forward pass: `A_j Q_j = Q_{j+1} R_j`.
    pub forward_r: Vec<DMatrix<f64>>,
}

pub fn qr_frames(trace: &CocycleTrace) -> QrFrames {
    let d = trace.fiber_dim();
    let t = trace.steps();
    let mut forward = Vec::with_capacity(t + 1);
    let mut forward_r = Vec::with_capacity(t);
    forward.push(DMatrix::identity(d, d));
    for a in trace.matrices() {
        let (q, r) = positive_qr(&(a * forward.last().unwrap()));
        forward.push(q);
        forward_r.push(r);
    }
    let mut backward = vec![DMatrix::identity(d, d); t + 1];
    for n in (0..t).rev() {
        let (q, _) = positive_qr(&(trace.matrices()[n].transpose() * &backward[n + 1]));
        backward[n] = q;
    }
    QrFrames { forward, backward, forward_r }
}

/// Householder QR normalised so that `R` has a non-negative diagonal.
pub(crate) fn positive_qr(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows() {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// One cut of the flag between exponent `cut − 1` and `cut` (0-based, largest first).
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FlagLevel {
    pub cut: usize,
    pub gap: f64,
    pub resolved: bool,
    /// Orthonormal basis of `E^{≤λ_{cut+1}}` (the slow directions), as columns listed row-wise.
    pub forward: Option<Vec<Vec<f64>>>,
    /// Orthonormal basis of `E^{≥λ_cut}` (the fast directions).
    pub backward: Option<Vec<Vec<f64>>>,
    /// Sine of the smallest angle between the two, when both are known.
    pub transversality: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OseledetsFlags {
    pub base: usize,
    pub horizon: usize,
    pub exponents: Vec<f64>,
    pub threshold: f64,
    pub levels: Vec<FlagLevel>,
}

impl OseledetsFlags {
    pub fn level(&self, cut: usize) -> Option<&FlagLevel> {
        self.levels.iter().find(|l| l.cut == cut)
    }
}

fn columns(m: &DMatrix<f64>, range: std::ops::Range<usize>) -> DMatrix<f64> {
    m.columns(range.start, range.len()).into_owned()
}

pub(crate) fn basis_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

#[cfg(test)]
fn basis_matrix(rows: &[Vec<f64>], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, rows.len(), |i, j| rows[j][i])
}

/// Sine of the largest principal angle between two subspaces of equal dimension.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = positive_qr(a).0.columns(0, a.ncols()).into_owned();
    let qb = positive_qr(b).0.columns(0, b.ncols()).into_owned();
    let resid = &qb - &qa * (qa.transpose() * &qb);
    resid.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sine of the smallest principal angle between complementary subspaces.
pub fn transversality(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = positive_qr(a).0.columns(0, a.ncols()).into_owned();
    let resid = b - &qa * (qa.transpose() * b);
    resid.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Flags at `q_base`: the slow flag from steps `base..base+horizon`, the fast
/// flag from all earlier steps. Cuts whose exponent gap is not above the
/// threshold (default `10/horizon`) stay unresolved.
pub fn oseledets_flags(
    trace: &CocycleTrace,
    base: usize,
    horizon: usize,
    threshold: Option<f64>,
) -> Result<OseledetsFlags, CocycError> {
    if horizon == 0 || base + horizon > trace.steps() {
        return Err(CocycError::Horizon(format!(
            "flag horizon {horizon} from step {base} exceeds the trace length {}",
            trace.steps()
        )));
    }
    let d = trace.fiber_dim();
    let threshold = threshold.unwrap_or(10.0 / horizon as f64);
    let exponents = lyapunov_qr(trace)?.exponents;
    let future = trace.window(base, base + horizon)?;
    let slow = qr_frames(&future).backward.swap_remove(0);
    let fast = if base > 0 { Some(qr_frames(&trace.window(0, base)?).forward.pop().unwrap()) } else { None };
    let levels = (1..d)
        .map(|cut| {
            let gap = exponents[cut - 1] - exponents[cut];
            if gap <= threshold {
                return FlagLevel { cut, gap, resolved: false, forward: None, backward: None, transversality: None };
            }
            let f = columns(&slow, cut..d);
            let b = fast.as_ref().map(|q| columns(q, 0..cut));
            let transversality = b.as_ref().map(|b| transversality(&f, b));
            FlagLevel {
                cut,
                gap,
                resolved: true,
                forward: Some(basis_rows(&f)),
                backward: b.as_ref().map(basis_rows),
                transversality,
            }
        })
        .collect();
    Ok(OseledetsFlags { base, horizon, exponents, threshold, levels })
}
