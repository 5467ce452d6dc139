//! Plug-in estimates of the observable quantities from `(a, d, y)` records.
//!
//! Input is CSV with the header `a,d,y`, where `a` and `d` are `0` or `1`.
//! The condition flags are raw comparisons of point estimates with zero
//! tolerance; no sampling uncertainty is attached to them.

use std::io::Read;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::Monotonicity;
use crate::error::{Error, Result};
use crate::model::{EffectChain, OutcomeKind, OutcomeTable, ValidatedModel};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub a: bool,
    pub d: bool,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Cell {
    count: u64,
    // sum of y - shift
    sum: f64,
}

/// Observed records with per-cell counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDataset {
    records: Vec<Record>,
    // first y seen; sums are taken around it so constant outcomes stay exact
    shift: f64,
    cells: [[Cell; 2]; 2],
}

impl SampleDataset {
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::EmptyInput);
        };
        let shift = first.y;
        let mut cells = [[Cell::default(); 2]; 2];
        for r in &records {
            let cell = &mut cells[r.a as usize][r.d as usize];
            cell.count += 1;
            cell.sum += r.y - shift;
        }
        Ok(SampleDataset {
            records,
            shift,
            cells,
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, a: bool, d: bool) -> u64 {
        self.cells[a as usize][d as usize].count
    }

    /// Sample mean of `y` in cell `(a, d)`.
    pub fn cell_mean(&self, a: bool, d: bool) -> Result<f64> {
        let cell = self.cells[a as usize][d as usize];
        if cell.count == 0 {
            return Err(Error::DegenerateCell { a, d });
        }
        Ok(self.shift + cell.sum / cell.count as f64)
    }
}

/// Reads `a,d,y` CSV. Line numbers in errors count the header as line 1.
pub fn ingest<R: Read>(reader: R) -> Result<SampleDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    if headers.iter().collect::<Vec<_>>() != ["a", "d", "y"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `a,d,y`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse { line, message };
        let binary = |s: &str, name: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(err(format!("`{name}` must be 0 or 1, found `{other}`"))),
        };
        let a = binary(&row[0], "a")?;
        let d = binary(&row[1], "d")?;
        let y: f64 = row[2]
            .parse()
            .map_err(|_| err(format!("`y` is not a number: `{}`", &row[2])))?;
        if !y.is_finite() {
            return Err(err(format!("`y` is not finite: `{}`", &row[2])));
        }
        records.push(Record { a, d, y });
    }
    SampleDataset::from_records(records)
}

/// Sample means of `y` by `(a, d)`, in the same layout as the confounder
/// table (`with` means `d`).
pub type ProxyTable = OutcomeTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedEstimates {
    pub n: usize,
    pub rd_obs_hat: f64,
    pub rd_crude_hat: f64,
    pub p_d_hat: f64,
    pub eyad_table: ProxyTable,
    /// `E[Y|a,d] - E[Y|a,d̄] >= E[Y|ā,d̄] - E[Y|ā,d] >= 0` on the estimates.
    pub cor6_condition: bool,
    /// `E[Y|a,d] - E[Y|a,d̄] <= E[Y|ā,d̄] - E[Y|ā,d] <= 0` on the estimates.
    pub cor7_condition: bool,
    pub monotone_in_d_hat: Monotonicity,
}

pub fn plugin_estimates(data: &SampleDataset) -> Result<ObservedEstimates> {
    let mut m = [[0.0; 2]; 2];
    for a in [false, true] {
        for d in [false, true] {
            m[a as usize][d as usize] = data.cell_mean(a, d)?;
        }
    }
    let n = data.len() as f64;
    let n_d = (data.count(false, true) + data.count(true, true)) as f64;
    let p_d = n_d / n;
    let arm = |a: bool| {
        let (with, without) = (m[a as usize][1], m[a as usize][0]);
        let n_a = (data.count(a, true) + data.count(a, false)) as f64;
        without + (with - without) * (data.count(a, true) as f64 / n_a)
    };
    let rd_obs_hat = (m[1][1] - m[0][1]) * p_d + (m[1][0] - m[0][0]) * (1.0 - p_d);
    let table = OutcomeTable {
        treated_with: m[1][1],
        treated_without: m[1][0],
        untreated_with: m[0][1],
        untreated_without: m[0][0],
    };
    Ok(ObservedEstimates {
        n: data.len(),
        rd_obs_hat,
        rd_crude_hat: arm(true) - arm(false),
        p_d_hat: p_d,
        eyad_table: table,
        cor6_condition: EffectChain::Increasing.holds(&table),
        cor7_condition: EffectChain::Decreasing.holds(&table),
        monotone_in_d_hat: Monotonicity::of(&table),
    })
}

/// Draws record `index` of a binary-outcome model from its own substream.
pub fn simulate_record(model: &ValidatedModel, seed: u64, index: u64) -> Record {
    let mut rng = substream(seed, index);
    let c = rng.random::<f64>() < model.p_c;
    let (p_a, p_d) = if c {
        (model.p_a_given_c, model.p_d_given_c)
    } else {
        (model.p_a_given_nc, model.p_d_given_nc)
    };
    let a = rng.random::<f64>() < p_a;
    let d = rng.random::<f64>() < p_d;
    let mean = match (a, c) {
        (true, true) => model.ey_ac,
        (true, false) => model.ey_anc,
        (false, true) => model.ey_nac,
        (false, false) => model.ey_nanc,
    };
    let y = if rng.random::<f64>() < mean { 1.0 } else { 0.0 };
    Record { a, d, y }
}

/// `n` records with binary `Y` drawn from `model`, `C` discarded.
pub fn simulate_records(model: &ValidatedModel, n: usize, seed: u64) -> Result<Vec<Record>> {
    if model.outcome_kind != OutcomeKind::Binary {
        return Err(Error::InvalidConfig(
            "simulation needs a binary outcome".into(),
        ));
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| simulate_record(model, seed, i))
        .collect())
}

pub fn write_records<W: std::io::Write>(records: &[Record], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "d", "y"])?;
    for r in records {
        w.write_record([
            if r.a { "1" } else { "0" },
            if r.d { "1" } else { "0" },
            &r.y.to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::risk_differences;
    use crate::model::DiscreteModel;

    fn parse(s: &str) -> Result<SampleDataset> {
        ingest(s.as_bytes())
    }

    #[test]
    fn four_rows_cover_all_cells() {
        let data = parse("a,d,y\n1,1,0.5\n1,0,1\n0,1,0\n0,0,0.25\n").unwrap();
        assert_eq!(data.len(), 4);
        for (a, d) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(data.count(a, d), 1);
        }
        let est = plugin_estimates(&data).unwrap();
        // (0.5 - 0) * 0.5 + (1 - 0.25) * 0.5
        assert_eq!(est.rd_obs_hat, 0.625);
        assert_eq!(est.rd_crude_hat, 0.625);
    }

    #[test]
    fn empty_and_malformed() {
        assert_eq!(parse(""), Err(Error::EmptyInput));
        assert_eq!(parse("a,d,y\n"), Err(Error::EmptyInput));
        assert!(matches!(
            parse("a,d,y\n1,1,0\n2,0,0.5\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("a,d,y\n1,1,x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("a,d,y\n1,1,NaN\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("a,d,y\n1,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("x,d,y\n1,1,0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_cell_is_degenerate() {
        let data = parse("a,d,y\n1,1,0.5\n1,0,1\n0,1,0\n").unwrap();
        assert_eq!(
            plugin_estimates(&data),
            Err(Error::DegenerateCell { a: false, d: false })
        );
    }

    #[test]
    fn constant_outcome_has_zero_differences() {
        let mut csv = String::from("a,d,y\n");
        for i in 0..37 {
            csv.push_str(&format!("{},{},0.3\n", i % 2, (i / 2) % 2));
        }
        let est = plugin_estimates(&parse(&csv).unwrap()).unwrap();
        assert_eq!(est.rd_obs_hat, 0.0);
        assert_eq!(est.rd_crude_hat, 0.0);
        assert_eq!(est.monotone_in_d_hat, Monotonicity::Constant);
    }

    #[test]
    fn crude_matches_raw_means() {
        let m1 = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [1.0, 0.0, 0.5, 0.2])
            .validate()
            .unwrap();
        let records = simulate_records(&m1, 20_000, 4).unwrap();
        let est = plugin_estimates(&SampleDataset::from_records(records.clone()).unwrap()).unwrap();
        let mean = |a: bool| {
            let ys: Vec<f64> = records.iter().filter(|r| r.a == a).map(|r| r.y).collect();
            ys.iter().sum::<f64>() / ys.len() as f64
        };
        assert!((est.rd_crude_hat - (mean(true) - mean(false))).abs() < 1e-12);
        let exact = risk_differences(&m1).unwrap();
        assert!((est.rd_obs_hat - exact.rd_obs).abs() < 0.03);
    }

    #[test]
    fn chain_flag_on_reversed_means() {
        let m = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [1.0, 0.0, 0.2, 0.5])
            .validate()
            .unwrap();
        let records = simulate_records(&m, 1_000_000, 9).unwrap();
        let est = plugin_estimates(&SampleDataset::from_records(records).unwrap()).unwrap();
        assert!(est.cor6_condition);
        assert!(!est.cor7_condition);
    }

    #[test]
    fn round_trip_through_csv() {
        let m = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [0.9, 0.1, 0.4, 0.3])
            .validate()
            .unwrap();
        let records = simulate_records(&m, 500, 1).unwrap();
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        assert_eq!(
            ingest(buf.as_slice()).unwrap().records(),
            records.as_slice()
        );
    }

    #[test]
    fn general_outcomes_cannot_be_simulated() {
        let m = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [2.0, 0.1, 0.4, 0.3])
            .with_outcome_kind(OutcomeKind::General)
            .validate()
            .unwrap();
        assert!(simulate_records(&m, 10, 0).is_err());
    }
}
