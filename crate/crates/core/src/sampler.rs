//! Seeded sampling and empirical covariance.
//!
//! Random streams come from ChaCha8 seeded with `seed_from_u64(seed)`; the
//! stream id selects an independent sequence for each trial. Draws are
//! generated row by row (`n` standard normals per row) and mapped through the
//! lower Cholesky factor of `Σ`, so a `(model, count, seed)` triple is
//! reproducible on every platform.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GgmError, Result};
use crate::gaussian::{CovarianceKind, CovarianceView};
use crate::model::GgmModel;

/// Rows per accumulation block. Both the materialized and the streaming paths
/// use it, which keeps their sums bit-identical.
pub const BLOCK_ROWS: usize = 4096;

/// Stream id for `(trial, slot)`: trials own the high bits.
pub fn stream_id(trial: u64, slot: u64) -> u64 {
    (trial << 20) | (slot & 0xF_FFFF)
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `N` draws of an `n`-dimensional zero-mean Gaussian, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: DMatrix<f64>,
    seed: u64,
}

impl SampleSet {
    pub fn new(data: DMatrix<f64>, seed: u64) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(GgmError::InsufficientSamples {
                required: 1,
                got: data.nrows(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(GgmError::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self { data, seed })
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn count(&self) -> usize {
        self.data.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Text when the extension is anything but `bin`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = BufWriter::new(f);
        if is_binary(path) {
            self.write_binary(&mut w)?;
        } else {
            self.write_text(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let r = BufReader::new(f);
        if is_binary(path) {
            Self::read_binary(r)
        } else {
            Self::read_text(r)
        }
    }

    /// Header `n count seed`, then one whitespace-separated row per draw.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.count(), self.seed)?;
        let mut line = String::new();
        for r in 0..self.count() {
            line.clear();
            for c in 0..self.dim() {
                if c > 0 {
                    line.push(' ');
                }
                line.push_str(&self.data[(r, c)].to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GgmError::Parse("empty sample file".into()))??;
        let head: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|e| GgmError::Parse(format!("header: {e}"))))
            .collect::<Result<_>>()?;
        if head.len() != 3 {
            return Err(GgmError::Parse("header must be `n count seed`".into()));
        }
        let (n, count, seed) = (head[0] as usize, head[1] as usize, head[2]);
        let mut values = Vec::with_capacity(n * count);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(
                    tok.parse::<f64>()
                        .map_err(|e| GgmError::Parse(format!("value {tok}: {e}")))?,
                );
            }
            if values.len() - before != n {
                return Err(GgmError::Shape {
                    expected: n,
                    found: values.len() - before,
                });
            }
        }
        if values.len() != n * count {
            return Err(GgmError::Shape {
                expected: count,
                found: values.len() / n.max(1),
            });
        }
        Self::new(DMatrix::from_row_slice(count, n, &values), seed)
    }

    /// Three little-endian `u64` (`n`, `count`, `seed`) followed by the draws
    /// as little-endian `f64`, row-major.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        for h in [self.dim() as u64, self.count() as u64, self.seed] {
            w.write_all(&h.to_le_bytes())?;
        }
        for r in 0..self.count() {
            for c in 0..self.dim() {
                w.write_all(&self.data[(r, c)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut head = [0u64; 3];
        for h in head.iter_mut() {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        let (n, count, seed) = (head[0] as usize, head[1] as usize, head[2]);
        let mut values = Vec::with_capacity(n * count);
        for _ in 0..n * count {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Self::new(DMatrix::from_row_slice(count, n, &values), seed)
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("bin")
}

/// Generates draws block by block and hands each `rows × n` block to `sink`.
struct BlockSampler {
    factor: DMatrix<f64>,
    rng: ChaCha8Rng,
}

impl BlockSampler {
    fn new(model: &GgmModel, rng: ChaCha8Rng) -> Result<Self> {
        let chol = nalgebra::Cholesky::new(model.covariance().clone())
            .ok_or_else(|| GgmError::InvalidModel("covariance is not positive definite".into()))?;
        Ok(Self {
            factor: chol.l().transpose(),
            rng,
        })
    }

    fn block(&mut self, rows: usize) -> DMatrix<f64> {
        let n = self.factor.nrows();
        let mut z = DMatrix::<f64>::zeros(rows, n);
        for r in 0..rows {
            for c in 0..n {
                z[(r, c)] = self.rng.sample(StandardNormal);
            }
        }
        // rows of Z Lᵀ are L z
        z * &self.factor
    }
}

fn blocks(count: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..count)
        .step_by(BLOCK_ROWS)
        .map(move |s| (s, BLOCK_ROWS.min(count - s)))
}

/// `N` i.i.d. rows `L z` with `Σ = L Lᵀ`, on stream 0 of `seed`.
pub fn draw(model: &GgmModel, count: usize, seed: u64) -> Result<SampleSet> {
    draw_stream(model, count, seed, 0)
}

pub fn draw_stream(model: &GgmModel, count: usize, seed: u64, stream: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(GgmError::InsufficientSamples { required: 1, got: 0 });
    }
    let mut sampler = BlockSampler::new(model, rng_for(seed, stream))?;
    let mut data = DMatrix::<f64>::zeros(count, model.dim());
    for (start, rows) in blocks(count) {
        let b = sampler.block(rows);
        data.rows_mut(start, rows).copy_from(&b);
    }
    SampleSet::new(data, seed)
}

struct Accumulator {
    sum: DMatrix<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            sum: DMatrix::zeros(n, n),
        }
    }

    fn add(&mut self, block: &DMatrix<f64>) {
        self.sum.gemm_tr(1.0, block, block, 1.0);
    }

    fn finish(self, count: usize) -> DMatrix<f64> {
        let n = self.sum.nrows();
        let inv = 1.0 / count as f64;
        // mirror the upper triangle so the result is exactly symmetric
        DMatrix::from_fn(n, n, |i, j| {
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            self.sum[(r, c)] * inv
        })
    }
}

/// `(1/N) Σ_k x_k x_kᵀ` (zero-mean convention) as a bare matrix. Unlike
/// [`empirical_covariance`] it accepts zero-variance coordinates.
pub fn empirical_covariance_matrix(samples: &SampleSet) -> Result<DMatrix<f64>> {
    if samples.count() < 2 {
        return Err(GgmError::InsufficientSamples {
            required: 2,
            got: samples.count(),
        });
    }
    let mut acc = Accumulator::new(samples.dim());
    for (start, rows) in blocks(samples.count()) {
        let b: DMatrix<f64> = samples.data.rows(start, rows).into_owned();
        acc.add(&b);
    }
    Ok(acc.finish(samples.count()))
}

/// Empirical covariance `Σ̂` tagged with its sample count.
pub fn empirical_covariance(samples: &SampleSet) -> Result<CovarianceView> {
    let m = empirical_covariance_matrix(samples)?;
    CovarianceView::new(
        m,
        CovarianceKind::Empirical {
            samples: samples.count(),
        },
    )
}

/// `Σ̂` of `count` fresh draws without materializing them; identical to
/// `empirical_covariance(draw_stream(model, count, seed, stream))`.
pub fn sample_covariance(model: &GgmModel, count: usize, seed: u64, stream: u64) -> Result<CovarianceView> {
    if count < 2 {
        return Err(GgmError::InsufficientSamples {
            required: 2,
            got: count,
        });
    }
    let mut sampler = BlockSampler::new(model, rng_for(seed, stream))?;
    let mut acc = Accumulator::new(model.dim());
    for (_, rows) in blocks(count) {
        acc.add(&sampler.block(rows));
    }
    CovarianceView::new(acc.finish(count), CovarianceKind::Empirical { samples: count })
}

/// `‖Σ̂ − Σ‖_∞` (entrywise maximum).
pub fn sup_norm_error(model: &GgmModel, view: &CovarianceView) -> f64 {
    (view.entries() - model.covariance()).amax()
}

/// Mean entrywise sup-norm error of `Σ̂` per sample count, averaged over
/// `trials` independent streams.
pub fn concentration_curve(model: &GgmModel, counts: &[usize], trials: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    if counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(GgmError::InvalidArgument("sample counts must be ascending".into()));
    }
    if trials == 0 {
        return Err(GgmError::InvalidArgument("need at least one trial".into()));
    }
    counts
        .iter()
        .enumerate()
        .map(|(slot, &count)| {
            let mut total = 0.0;
            for t in 0..trials {
                let view = sample_covariance(model, count, seed, stream_id(t as u64, slot as u64))?;
                total += sup_norm_error(model, &view);
            }
            Ok((count, total / trials as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_named, GgmModel, Topology};

    fn identity(n: usize) -> GgmModel {
        GgmModel::from_precision(DMatrix::identity(n, n), None, None, "id").unwrap()
    }

    #[test]
    fn hand_computed_covariance() {
        let data = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let s = SampleSet::new(data, 0).unwrap();
        let m = empirical_covariance_matrix(&s).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        // zero variance in coordinate 1 is not a usable view
        assert!(empirical_covariance(&s).is_err());
    }

    #[test]
    fn too_few_samples() {
        let s = SampleSet::new(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), 0).unwrap();
        assert!(matches!(
            empirical_covariance(&s),
            Err(GgmError::InsufficientSamples { required: 2, got: 1 })
        ));
        assert!(draw(&identity(2), 0, 1).is_err());
    }

    #[test]
    fn duplicated_rows_give_same_covariance() {
        let m = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
        let s = draw(&m, 100, 4).unwrap();
        let mut doubled = DMatrix::zeros(200, 3);
        for r in 0..100 {
            doubled.row_mut(2 * r).copy_from(&s.data().row(r));
            doubled.row_mut(2 * r + 1).copy_from(&s.data().row(r));
        }
        let a = empirical_covariance_matrix(&s).unwrap();
        let b = empirical_covariance_matrix(&SampleSet::new(doubled, 4).unwrap()).unwrap();
        assert!((a - b).amax() < 1e-14);
    }

    #[test]
    fn draws_are_deterministic() {
        let m = build_named(Topology::Chain, 4, -0.3, 1.0).unwrap();
        assert_eq!(draw(&m, 500, 9).unwrap(), draw(&m, 500, 9).unwrap());
        assert_ne!(draw(&m, 500, 9).unwrap(), draw(&m, 500, 10).unwrap());
    }

    #[test]
    fn streaming_matches_materialized() {
        let m = build_named(Topology::Grid, 2, -0.2, 1.0).unwrap();
        let count = 2 * BLOCK_ROWS + 17;
        let direct = empirical_covariance(&draw_stream(&m, count, 5, 3).unwrap()).unwrap();
        let streamed = sample_covariance(&m, count, 5, 3).unwrap();
        assert_eq!(direct.entries(), streamed.entries());
    }

    #[test]
    fn identity_converges() {
        let s = draw(&identity(3), 100_000, 1).unwrap();
        let m = empirical_covariance_matrix(&s).unwrap();
        assert!((m - DMatrix::<f64>::identity(3, 3)).amax() < 0.05);
        let means = s.data().row_mean();
        assert!(means.amax() < 0.05);
    }

    #[test]
    fn text_and_binary_roundtrip() {
        let m = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
        let s = draw(&m, 7, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for name in ["s.txt", "s.bin"] {
            let p = dir.path().join(name);
            s.save(&p).unwrap();
            assert_eq!(SampleSet::load(&p).unwrap(), s);
        }
    }

    #[test]
    fn curve_shapes() {
        let m = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
        let one = concentration_curve(&m, &[1000], 3, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(
            concentration_curve(&m, &[100, 400], 1, 8).unwrap(),
            concentration_curve(&m, &[100, 400], 1, 8).unwrap()
        );
        assert!(concentration_curve(&m, &[400, 100], 1, 8).is_err());
    }
}
