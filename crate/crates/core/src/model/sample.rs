//! Simulated panels and their CSV representation.

use std::io::{Read, Write};

use rand::distr::{Bernoulli, Distribution, weighted::WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::dgp::ModelConfig;
use crate::model::history::check_periods;

/// Binary panel with one row `(x1, y1, x2, y2, ..., xT, yT)` per unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelDataset {
    periods: usize,
    cells: Vec<u8>,
}

impl PanelDataset {
    pub fn new(periods: usize, rows: &[Vec<u8>]) -> Result<Self> {
        check_periods(periods)?;
        let mut cells = Vec::with_capacity(rows.len() * 2 * periods);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != 2 * periods {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {}",
                    r.len(),
                    2 * periods
                )));
            }
            if r.iter().any(|&b| b > 1) {
                return Err(Error::InvalidArgument(format!("row {i} has a non-binary entry")));
            }
            cells.extend_from_slice(r);
        }
        if cells.is_empty() {
            return Err(Error::InvalidArgument("a panel needs at least one unit".into()));
        }
        Ok(PanelDataset { periods, cells })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn len(&self) -> usize {
        self.cells.len() / (2 * self.periods)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Row `i` as `(x1, y1, ..., xT, yT)`.
    pub fn row(&self, i: usize) -> &[u8] {
        let w = 2 * self.periods;
        &self.cells[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks_exact(2 * self.periods)
    }

    /// Keeps rows satisfying `keep`; errors if nothing is left.
    pub fn filter(&self, mut keep: impl FnMut(&[u8]) -> bool) -> Result<Self> {
        let rows: Vec<Vec<u8>> = self.rows().filter(|r| keep(r)).map(|r| r.to_vec()).collect();
        PanelDataset::new(self.periods, &rows)
    }

    pub fn header(periods: usize) -> String {
        (1..=periods).map(|t| format!("x{t},y{t}")).collect::<Vec<_>>().join(",")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.periods).flat_map(|t| [format!("x{t}"), format!("y{t}")]).collect();
        w.write_record(&header).map_err(csv_error)?;
        for r in self.rows() {
            w.write_record(r.iter().map(|b| if *b == 1 { "1" } else { "0" })).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers().map_err(csv_error)?.clone();
        let width = header.len();
        if width < 4 || width % 2 != 0 {
            return Err(Error::Parse { line: 1, msg: format!("header has {width} columns") });
        }
        let periods = width / 2;
        let expected: Vec<String> = (1..=periods).flat_map(|t| [format!("x{t}"), format!("y{t}")]).collect();
        if header.iter().zip(&expected).any(|(a, b)| a != b) {
            return Err(Error::Parse { line: 1, msg: format!("expected header `{}`", Self::header(periods)) });
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let row = rec
                .iter()
                .map(|f| match f {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse { line, msg: format!("`{other}` is not 0 or 1") }),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        PanelDataset::new(periods, &rows).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse { line: 2, msg },
            other => other,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() }
}

/// Draws `n` i.i.d. units from the model.
pub fn sample_panel(model: &ModelConfig, n: usize, seed: u64) -> Result<PanelDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let periods = model.periods();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = Bernoulli::new(model.q[1]).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut alpha_dist = Vec::with_capacity(2);
    for x1 in 0..2u8 {
        // A zero-probability initial value never draws from its distribution.
        alpha_dist.push(WeightedIndex::new(model.pi.weights(x1)).ok());
    }
    // Pr(Y = 1 | x, alpha_k) for x in {0, 1}.
    let mut choice = Vec::with_capacity(model.grid.len());
    for &a in model.grid.points() {
        choice.push([model.link.evaluate(a)?, model.link.evaluate(model.theta + a)?]);
    }

    let mut cells = Vec::with_capacity(n * 2 * periods);
    let mut ys = vec![0u8; periods];
    let mut xs = vec![0u8; periods];
    for _ in 0..n {
        xs[0] = initial.sample(&mut rng) as u8;
        let k = alpha_dist[xs[0] as usize]
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("heterogeneity weights are all zero".into()))?
            .sample(&mut rng);
        for t in 1..=periods {
            if t >= 2 {
                let g = model.feedback.get(t, &ys[..t - 1], &xs[..t - 1], k);
                xs[t - 1] = rand::Rng::random_bool(&mut rng, g) as u8;
            }
            let p = choice[k][xs[t - 1] as usize];
            ys[t - 1] = rand::Rng::random_bool(&mut rng, p) as u8;
            cells.push(xs[t - 1]);
            cells.push(ys[t - 1]);
        }
    }
    Ok(PanelDataset { periods, cells })
}
