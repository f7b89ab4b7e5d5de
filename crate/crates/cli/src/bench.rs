//! Timing and operation-count benchmark over a grid of dimensions.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use pptfe_core::backend::counters::{measure, OpCounts};
use pptfe_core::issuance::{kgc_respond, user_finalize, user_round1};
use pptfe_core::scheme::{
    encrypt, setup, trace, Ciphertext, Decryptor, FunctionalKey, KeyContext, MasterSecretKey,
    PublicParams, TracerSecret, DEFAULT_DLOG_BOUND,
};
use pptfe_core::{Backend, ScalarField};
use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

pub const MIN_REPS: usize = 10;
pub const DEFAULT_DIMS: [usize; 5] = [10, 20, 30, 40, 50];
pub const MIN_R_SQUARED: f64 = 0.9;
pub const MAX_TRACE_RATIO: f64 = 1.5;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("at least {MIN_REPS} repetitions are required, got {0}")]
    TooFewReps(usize),
    #[error("the dimension grid must be non-empty and free of zeros")]
    BadGrid,
    #[error("benchmarked operation failed: {0}")]
    Scheme(#[from] pptfe_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Setup,
    Encrypt,
    /// Blind issuance including the user's final key check.
    Ppkeygen,
    Decrypt,
    /// Single-candidate trace.
    Trace,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Setup,
        Algorithm::Encrypt,
        Algorithm::Ppkeygen,
        Algorithm::Decrypt,
        Algorithm::Trace,
    ];

    /// Algorithms whose cost grows with the dimension.
    pub const GROWING: [Algorithm; 4] =
        [Algorithm::Setup, Algorithm::Encrypt, Algorithm::Ppkeygen, Algorithm::Decrypt];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Setup => "setup",
            Algorithm::Encrypt => "encrypt",
            Algorithm::Ppkeygen => "ppkeygen",
            Algorithm::Decrypt => "decrypt",
            Algorithm::Trace => "trace",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub l: usize,
    pub reps: usize,
    pub mean_seconds: f64,
    pub pairings: u64,
    pub exponentiations: u64,
    pub hashes: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    pub backend: String,
    pub rows: Vec<BenchRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesShape {
    pub algorithm: Algorithm,
    pub monotone: bool,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeReport {
    pub growth: Vec<SeriesShape>,
    pub trace_ratio: f64,
    pub ppkeygen_slowest: bool,
}

impl ShapeReport {
    pub fn passes(&self) -> bool {
        self.growth.iter().all(|s| s.monotone && s.r_squared >= MIN_R_SQUARED)
            && self.trace_ratio <= MAX_TRACE_RATIO
            && self.ppkeygen_slowest
    }
}

impl BenchReport {
    pub fn series(&self, algorithm: Algorithm) -> Vec<&BenchRow> {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| r.algorithm == algorithm).collect();
        rows.sort_by_key(|r| r.l);
        rows
    }

    pub fn shape(&self) -> ShapeReport {
        let growth = Algorithm::GROWING
            .iter()
            .map(|&algorithm| {
                let series = self.series(algorithm);
                let monotone = series.windows(2).all(|w| w[1].mean_seconds > w[0].mean_seconds);
                let points: Vec<(f64, f64)> =
                    series.iter().map(|r| (r.l as f64, r.mean_seconds)).collect();
                SeriesShape { algorithm, monotone, r_squared: r_squared(&points) }
            })
            .collect();

        let trace: Vec<f64> = self.series(Algorithm::Trace).iter().map(|r| r.mean_seconds).collect();
        let max = trace.iter().copied().fold(f64::MIN, f64::max);
        let min = trace.iter().copied().fold(f64::MAX, f64::min);
        let trace_ratio = if trace.is_empty() { f64::INFINITY } else { max / min };

        let keygen = self.series(Algorithm::Ppkeygen);
        let ppkeygen_slowest = !keygen.is_empty()
            && keygen.iter().all(|k| {
                self.rows
                    .iter()
                    .filter(|r| r.l == k.l && r.algorithm != Algorithm::Ppkeygen)
                    .all(|r| r.mean_seconds < k.mean_seconds)
            });
        ShapeReport { growth, trace_ratio, ppkeygen_slowest }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coefficient of determination of the least-squares line through `points`.
pub fn r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 1.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

struct Fixture<E: Backend> {
    l: usize,
    x: Vec<E::Scalar>,
    y: Vec<E::Scalar>,
    theta: E::Scalar,
    pp: PublicParams<E>,
    msk: MasterSecretKey<E>,
    tsk: TracerSecret<E>,
    key: FunctionalKey<E>,
    ctx: KeyContext<E>,
    ct: Ciphertext<E>,
    decryptor: Decryptor<E>,
}

impl<E: Backend> Fixture<E> {
    fn new<R: RngCore>(l: usize, rng: &mut R) -> Result<Self, pptfe_core::Error> {
        let mut small = || -> Vec<E::Scalar> {
            (0..l).map(|_| E::Scalar::from_u64(rng.gen_range(0..=10))).collect()
        };
        let x = small();
        let y = small();
        let theta = E::Scalar::random_nonzero(rng);
        let (pp, msk, tsk) = setup::<E, _>(l, rng)?;
        let (state, msg1) = user_round1(&pp, theta, y.clone(), rng)?;
        let key = user_finalize(&pp, &state, &kgc_respond(&pp, &msk, &msg1, rng)?)?;
        let ctx = KeyContext::new(y.clone(), theta)?;
        let ct = encrypt(&pp, &x, rng)?;
        let decryptor = Decryptor::new(&pp, DEFAULT_DLOG_BOUND);
        Ok(Fixture { l, x, y, theta, pp, msk, tsk, key, ctx, ct, decryptor })
    }

    fn run<R: RngCore>(&self, algorithm: Algorithm, rng: &mut R) -> Result<(), pptfe_core::Error> {
        match algorithm {
            Algorithm::Setup => setup::<E, _>(self.l, rng).map(|_| ()),
            Algorithm::Encrypt => encrypt(&self.pp, &self.x, rng).map(|_| ()),
            Algorithm::Ppkeygen => {
                let (state, msg1) = user_round1(&self.pp, self.theta, self.y.clone(), rng)?;
                let msg2 = kgc_respond(&self.pp, &self.msk, &msg1, rng)?;
                user_finalize(&self.pp, &state, &msg2).map(|_| ())
            }
            Algorithm::Decrypt => self.decryptor.decrypt(&self.pp, &self.key, &self.ctx, &self.ct).map(|_| ()),
            Algorithm::Trace => trace(&self.pp, &self.tsk, &self.key, &[self.theta]).map(|_| ()),
        }
    }
}

/// Runs every algorithm `reps` times at every dimension in `dims`, on the
/// calling thread. Each round times one algorithm at every dimension back to
/// back, sweeping the grid in alternating directions, so drift in machine
/// speed hits all dimensions alike instead of whichever one was running.
pub fn run_bench<E: Backend, R: RngCore>(
    dims: &[usize],
    reps: usize,
    rng: &mut R,
    mut progress: impl FnMut(&BenchRow),
) -> Result<BenchReport, BenchError> {
    if reps < MIN_REPS {
        return Err(BenchError::TooFewReps(reps));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(BenchError::BadGrid);
    }
    let fixtures = dims
        .iter()
        .map(|&l| Fixture::<E>::new(l, rng))
        .collect::<Result<Vec<_>, _>>()?;

    let cells = fixtures.len() * Algorithm::ALL.len();
    let mut totals = vec![0.0f64; cells];
    let mut counts = vec![OpCounts::default(); cells];
    // one untimed warm-up round
    for f in &fixtures {
        for alg in Algorithm::ALL {
            f.run(alg, rng)?;
        }
    }
    let mut order: Vec<usize> = (0..fixtures.len()).collect();
    for _ in 0..reps {
        for (j, alg) in Algorithm::ALL.into_iter().enumerate() {
            for &i in &order {
                let start = Instant::now();
                let (res, c) = measure(|| fixtures[i].run(alg, rng));
                totals[i * Algorithm::ALL.len() + j] += start.elapsed().as_secs_f64();
                res?;
                counts[i * Algorithm::ALL.len() + j] = c;
            }
            order.reverse();
        }
    }

    let mut report = BenchReport { backend: E::ID.name().to_owned(), rows: Vec::new() };
    for (i, f) in fixtures.iter().enumerate() {
        for (j, algorithm) in Algorithm::ALL.into_iter().enumerate() {
            let c = counts[i * Algorithm::ALL.len() + j];
            let row = BenchRow {
                algorithm,
                l: f.l,
                reps,
                mean_seconds: totals[i * Algorithm::ALL.len() + j] / reps as f64,
                pairings: c.pairings,
                exponentiations: c.exponentiations(),
                hashes: c.hashes,
            };
            progress(&row);
            report.rows.push(row);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pptfe_core::Toy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn r_squared_of_exact_and_noisy_lines() {
        let line: Vec<_> = (1..=5).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((r_squared(&line) - 1.0).abs() < 1e-12);
        // hand-computed: x = 1..4, y = 1,3,2,4 -> r = 0.8, r^2 = 0.64
        let noisy = [(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0)];
        assert!((r_squared(&noisy) - 0.64).abs() < 1e-12);
    }

    #[test]
    fn rejects_too_few_reps_and_bad_grid() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(matches!(run_bench::<Toy, _>(&[10], 9, &mut rng, |_| {}), Err(BenchError::TooFewReps(9))));
        assert!(matches!(run_bench::<Toy, _>(&[], 10, &mut rng, |_| {}), Err(BenchError::BadGrid)));
        assert!(matches!(run_bench::<Toy, _>(&[0, 1], 10, &mut rng, |_| {}), Err(BenchError::BadGrid)));
    }

    #[test]
    fn toy_bench_counts_follow_the_cost_formulas() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let report = run_bench::<Toy, _>(&[10, 20], 10, &mut rng, |_| {}).unwrap();
        assert_eq!(report.rows.len(), 10);
        for row in &report.rows {
            let l = row.l as u64;
            let expected = match row.algorithm {
                Algorithm::Setup => Some((1, l + 2)),
                Algorithm::Encrypt => Some((0, 2 * l + 3)),
                Algorithm::Decrypt => Some((5, l + 2)),
                Algorithm::Trace => Some((4, 3)),
                Algorithm::Ppkeygen => None,
            };
            if let Some(e) = expected {
                assert_eq!((row.pairings, row.exponentiations), e, "{} at l={l}", row.algorithm);
            }
        }
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("algorithm,l,reps,mean_seconds,pairings,exponentiations,hashes\n"));
        assert!(text.contains("\nencrypt,10,10,"));
    }

    #[test]
    fn shape_checks_on_synthetic_reports() {
        let row = |algorithm, l: usize, t: f64| BenchRow {
            algorithm,
            l,
            reps: 10,
            mean_seconds: t,
            pairings: 0,
            exponentiations: 0,
            hashes: 0,
        };
        let mut rows = Vec::new();
        for l in [10, 20, 30] {
            let f = l as f64;
            rows.push(row(Algorithm::Setup, l, f));
            rows.push(row(Algorithm::Encrypt, l, 2.0 * f));
            rows.push(row(Algorithm::Ppkeygen, l, 10.0 * f));
            rows.push(row(Algorithm::Decrypt, l, f + 5.0));
            rows.push(row(Algorithm::Trace, l, 4.0 + f / 100.0));
        }
        let good = BenchReport { backend: "toy".into(), rows: rows.clone() };
        assert!(good.shape().passes());

        rows[0].mean_seconds = 100.0;
        let bad = BenchReport { backend: "toy".into(), rows };
        let shape = bad.shape();
        assert!(!shape.growth[0].monotone);
        assert!(!shape.ppkeygen_slowest);
        assert!(!shape.passes());
    }
}
