//! Sketching operators: the subsampled randomized Hadamard transform,
//! leverage-score row sampling, uniform row sampling, and the deterministic
//! A-optimal subsample mask.
//!
//! All random operators draw from [`Rng`], a seeded ChaCha8 stream. An `Rng`
//! is owned by one thread; parallel replications derive their own streams
//! with [`Rng::derive`].

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, axpy, DenseMatrix};

/// Name and version of the stream algorithm; recorded in run manifests.
pub const PRNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9, seed_from_u64, per-purpose stream ids); normals: rand_distr 0.5 ziggurat";

/// Seeded random stream.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for replication `rep` and consumer `stream`
    /// (data generation, one per solver, ...). The key is `seed ⊕ rep`; the
    /// ChaCha stream id separates consumers within a replication.
    pub fn derive(seed: u64, rep: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed ^ rep);
        inner.set_stream(stream);
        Self {
            seed: seed ^ rep,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn rademacher(&mut self) -> f64 {
        if self.inner.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in `0..upper`.
    pub fn below(&mut self, upper: usize) -> usize {
        self.inner.random_range(0..upper)
    }

    pub(crate) fn sample<T, D: Distribution<T>>(&mut self, dist: &D) -> T {
        dist.sample(&mut self.inner)
    }
}

/// Which random or deterministic operator an iterative solver draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchKind {
    Srht,
    Leverage,
    Uniform,
    #[serde(rename = "aopt")]
    AOptimal,
    /// `S = I_n`; the "sketch" is the full data. Used as a control.
    Identity,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Srht => "srht",
            SketchKind::Leverage => "leverage",
            SketchKind::Uniform => "uniform",
            SketchKind::AOptimal => "aopt",
            SketchKind::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "srht" => SketchKind::Srht,
            "leverage" | "lev" => SketchKind::Leverage,
            "uniform" => SketchKind::Uniform,
            "aopt" | "a-optimal" => SketchKind::AOptimal,
            "identity" => SketchKind::Identity,
            _ => return None,
        })
    }
}

/// Binary row selector `δ` with exactly `m` ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsampleMask {
    n: usize,
    /// selected row indices, ascending
    selected: Vec<usize>,
}

impl SubsampleMask {
    /// Builds a mask from selected indices (any order, no duplicates).
    pub fn from_indices(n: usize, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        selected.dedup();
        if selected.is_empty() || selected.last().is_some_and(|&i| i >= n) {
            return Err(Error::BadSubsampleSize { m: selected.len(), n });
        }
        Ok(Self { n, selected })
    }

    pub fn from_delta(delta: &[u8]) -> Result<Self> {
        if let Some(&bad) = delta.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidArgument(format!("mask entry {bad} is not 0 or 1")));
        }
        let selected = delta
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(i, _)| i)
            .collect();
        Self::from_indices(delta.len(), selected)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn m(&self) -> usize {
        self.selected.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn delta(&self) -> Vec<u8> {
        let mut d = vec![0u8; self.n];
        for &i in &self.selected {
            d[i] = 1;
        }
        d
    }

    pub fn contains(&self, i: usize) -> bool {
        self.selected.binary_search(&i).is_ok()
    }
}

/// Orthonormal fast Walsh–Hadamard transform, `H·v` with `H` scaled by
/// `1/√n`.
pub fn fwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

/// Normalized Walsh–Hadamard transform applied to every column of a
/// row-major matrix whose row count is a power of two. Butterflies combine
/// whole rows so the inner loop is contiguous.
fn fwht_rows(a: &mut DenseMatrix) -> Result<()> {
    let (n, d) = (a.rows(), a.cols());
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if d == 0 {
        return Ok(());
    }
    let data = a.data_mut();
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h * d) {
            let (lo, hi) = block.split_at_mut(h * d);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*x, *y);
                *x = p + q;
                *y = p - q;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

/// Smallest power of two `≥ n`.
pub fn padded_len(n: usize) -> usize {
    n.next_power_of_two()
}

/// Subsampled randomized Hadamard transform: returns `(S·X, S·y)` with
/// `S = √(n_pad/m)·R·H·D` acting on `X` and `y` zero-padded to
/// `n_pad = 2^⌈log₂ n⌉` rows.
///
/// Draw order from `rng`: `n_pad` Rademacher signs, then `m` row indices by
/// partial Fisher–Yates.
pub fn srht_apply(
    x: &DenseMatrix,
    y: Option<&[f64]>,
    m: usize,
    rng: &mut Rng,
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    let n_pad = padded_len(x.rows());
    if m == 0 || m > n_pad {
        return Err(Error::NotEnoughRows {
            requested: m,
            available: n_pad,
        });
    }
    let signs: Vec<f64> = (0..n_pad).map(|_| rng.rademacher()).collect();
    let rows = sample_without_replacement(n_pad, m, rng);
    srht_with(x, y, &signs, &rows)
}

/// SRHT with explicit Rademacher signs (length `n_pad`) and selected rows of
/// the transformed, padded matrix.
pub fn srht_with(
    x: &DenseMatrix,
    y: Option<&[f64]>,
    signs: &[f64],
    rows: &[usize],
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    let (n, d) = (x.rows(), x.cols());
    let n_pad = padded_len(n);
    check_len("srht signs", n_pad, signs.len())?;
    if let Some(y) = y {
        check_len("srht response", n, y.len())?;
    }
    let m = rows.len();
    if m == 0 || m > n_pad || rows.iter().any(|&r| r >= n_pad) {
        return Err(Error::NotEnoughRows {
            requested: m,
            available: n_pad,
        });
    }
    // D·[X | y], padded; the response rides along as an extra column
    let width = d + usize::from(y.is_some());
    let mut work = DenseMatrix::zeros(n_pad, width);
    for i in 0..n {
        let dst = work.row_mut(i);
        let s = signs[i];
        for (o, v) in dst[..d].iter_mut().zip(x.row(i)) {
            *o = s * v;
        }
        if let Some(y) = y {
            dst[d] = s * y[i];
        }
    }
    fwht_rows(&mut work)?;
    let scale = (n_pad as f64 / m as f64).sqrt();
    let mut sx = DenseMatrix::zeros(m, d);
    let mut sy = y.map(|_| Vec::with_capacity(m));
    for (k, &r) in rows.iter().enumerate() {
        let src = work.row(r);
        for (o, v) in sx.row_mut(k).iter_mut().zip(&src[..d]) {
            *o = scale * v;
        }
        if let Some(sy) = sy.as_mut() {
            sy.push(scale * src[d]);
        }
    }
    Ok((sx, sy))
}

/// `m` distinct indices from `0..n`, uniformly, by partial Fisher–Yates.
pub fn sample_without_replacement(n: usize, m: usize, rng: &mut Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for k in 0..m.min(n) {
        let j = k + rng.below(n - k);
        pool.swap(k, j);
    }
    pool.truncate(m.min(n));
    pool
}

/// Statistical leverage scores `h_i = ‖U_i‖²` of the rows of `X`.
pub fn leverage_scores(x: &DenseMatrix) -> Result<Vec<f64>> {
    let u = linalg::orthonormal_colbasis(x)?;
    Ok(linalg::row_sq_norms(&u))
}

/// Leverage-score sampling with replacement: `m` rows drawn i.i.d. with
/// probability `p_i = h_i / d`, each rescaled by `1/√(m·p_i)` so that
/// `E[(SX)ᵀ(SX)] = XᵀX`.
pub fn leverage_sample(
    x: &DenseMatrix,
    y: Option<&[f64]>,
    m: usize,
    rng: &mut Rng,
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    let scores = leverage_scores(x)?;
    leverage_sample_with_scores(x, y, &scores, m, rng)
}

/// [`leverage_sample`] with precomputed scores, so repeated draws skip the QR.
pub fn leverage_sample_with_scores(
    x: &DenseMatrix,
    y: Option<&[f64]>,
    scores: &[f64],
    m: usize,
    rng: &mut Rng,
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    check_len("leverage scores", x.rows(), scores.len())?;
    if m == 0 {
        return Err(Error::BadSubsampleSize { m, n: x.rows() });
    }
    if let Some(y) = y {
        check_len("leverage response", x.rows(), y.len())?;
    }
    let total: f64 = scores.iter().sum();
    let table = rand::distr::weighted::WeightedIndex::new(scores)
        .map_err(|e| Error::InvalidArgument(format!("leverage weights: {e}")))?;
    let mut sx = DenseMatrix::zeros(m, x.cols());
    let mut sy = y.map(|_| Vec::with_capacity(m));
    for k in 0..m {
        let i: usize = rng.sample(&table);
        let p = scores[i] / total;
        let w = 1.0 / (m as f64 * p).sqrt();
        axpy(w, x.row(i), sx.row_mut(k));
        if let (Some(sy), Some(y)) = (sy.as_mut(), y) {
            sy.push(w * y[i]);
        }
    }
    Ok((sx, sy))
}

/// Uniform row sampling without replacement, scaled by `√(n/m)`.
pub fn uniform_sample(
    x: &DenseMatrix,
    y: Option<&[f64]>,
    m: usize,
    rng: &mut Rng,
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    let n = x.rows();
    if m == 0 || m > n {
        return Err(Error::NotEnoughRows {
            requested: m,
            available: n,
        });
    }
    let rows = sample_without_replacement(n, m, rng);
    let scale = (n as f64 / m as f64).sqrt();
    let sy = y.map(|y| rows.iter().map(|&i| scale * y[i]).collect());
    Ok((x.select_rows(&rows, scale), sy))
}

/// Deterministic A-optimal subsample: the `m` rows of largest Euclidean
/// norm, ties broken toward the smaller row index. Uses partial selection,
/// expected `O(n)`.
pub fn aopt_select(x: &DenseMatrix, m: usize) -> Result<SubsampleMask> {
    let n = x.rows();
    if m == 0 || m > n {
        return Err(Error::BadSubsampleSize { m, n });
    }
    let norms = linalg::row_sq_norms(x);
    let mut order: Vec<usize> = (0..n).collect();
    // descending norm, then ascending index: a strict total order, so the
    // selected set does not depend on the selection algorithm's pivots
    let cmp = |a: &usize, b: &usize| norms[*b].total_cmp(&norms[*a]).then(a.cmp(b));
    if m < n {
        order.select_nth_unstable_by(m - 1, cmp);
    }
    order.truncate(m);
    SubsampleMask::from_indices(n, order)
}

/// The `m×d` sketched matrix of a mask: selected rows scaled by `1/√m`, so
/// that `(SX)ᵀ(SX) = m⁻¹ Σ δ_i x_i x_iᵀ`.
pub fn mask_to_sketch(x: &DenseMatrix, mask: &SubsampleMask) -> Result<DenseMatrix> {
    check_len("mask_to_sketch", x.rows(), mask.len())?;
    Ok(x.select_rows(mask.selected(), 1.0 / (mask.m() as f64).sqrt()))
}

/// Draws one sketch of `x` (and `y`, when given) with `m` rows.
pub fn draw(
    kind: SketchKind,
    x: &DenseMatrix,
    y: Option<&[f64]>,
    m: usize,
    rng: &mut Rng,
) -> Result<(DenseMatrix, Option<Vec<f64>>)> {
    match kind {
        SketchKind::Srht => srht_apply(x, y, m, rng),
        SketchKind::Leverage => leverage_sample(x, y, m, rng),
        SketchKind::Uniform => uniform_sample(x, y, m, rng),
        SketchKind::AOptimal => {
            let mask = aopt_select(x, m)?;
            let scale = 1.0 / (m as f64).sqrt();
            let sy = y.map(|y| mask.selected().iter().map(|&i| scale * y[i]).collect());
            Ok((mask_to_sketch(x, &mask)?, sy))
        }
        SketchKind::Identity => Ok((x.clone(), y.map(<[f64]>::to_vec))),
    }
}
