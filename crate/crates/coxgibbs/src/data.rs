//! Survival data model: ingestion, risk sets, and the (event, peer) contrast
//! table that every sampler in this crate consumes.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{CoxError, Result};

/// Hard default cap on the number of contrast rows, guarding against the
/// quadratic blowup of dense pair enumeration.
pub const DEFAULT_PAIR_CAP: usize = 50_000_000;

/// Right-censored survival data with a dense covariate matrix.
///
/// Invariants enforced at construction: all vectors agree on `n`, times are
/// finite and non-negative, covariates are finite.
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Vec<f64>, // row-major, n * p
    names: Vec<String>,
    p: usize,
}

impl SurvivalDataset {
    /// Build a dataset from parts. `covariates` is row-major with `p` columns
    /// per subject; `names` labels those columns.
    pub fn new(
        times: Vec<f64>,
        events: Vec<bool>,
        covariates: Vec<f64>,
        names: Vec<String>,
    ) -> Result<Self> {
        let n = times.len();
        let p = names.len();
        if n == 0 {
            return Err(CoxError::InsufficientData("dataset has no subjects".into()));
        }
        if events.len() != n {
            return Err(CoxError::InvalidConfig(format!(
                "events length {} != times length {}",
                events.len(),
                n
            )));
        }
        if covariates.len() != n * p {
            return Err(CoxError::InvalidConfig(format!(
                "covariate matrix has {} entries, expected {} ({} x {})",
                covariates.len(),
                n * p,
                n,
                p
            )));
        }
        if let Some((i, &t)) = times
            .iter()
            .enumerate()
            .find(|(_, t)| !t.is_finite() || **t < 0.0)
        {
            return Err(CoxError::InvalidConfig(format!(
                "time for subject {i} is {t}; times must be finite and non-negative"
            )));
        }
        if covariates.iter().any(|x| !x.is_finite()) {
            return Err(CoxError::InvalidConfig(
                "covariate matrix contains non-finite entries".into(),
            ));
        }
        Ok(Self {
            times,
            events,
            covariates,
            names,
            p,
        })
    }

    /// Number of subjects.
    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Number of covariate columns.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Observed (possibly censored) times.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Event indicators (`true` = event observed, `false` = censored).
    pub fn events(&self) -> &[bool] {
        &self.events
    }

    /// Number of observed events.
    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|e| **e).count()
    }

    /// Covariate row for subject `i`.
    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.p..(i + 1) * self.p]
    }

    /// Column labels.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Raw row-major covariate storage.
    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }
}

/// Result of CSV ingestion: the dataset plus how many rows were dropped by
/// the complete-case rule.
#[derive(Debug)]
pub struct LoadOutcome {
    pub dataset: SurvivalDataset,
    pub rows_dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| CoxError::Parse {
        row,
        column: column.to_string(),
        message: format!("not a number: '{cell}'"),
    })?;
    if !v.is_finite() {
        return Err(CoxError::Parse {
            row,
            column: column.to_string(),
            message: format!("non-finite value: '{cell}'"),
        });
    }
    Ok(v)
}

/// Load a survival dataset from a headered CSV file.
///
/// Complete-case rule: a row is dropped when any *selected* column (time,
/// status, or a requested covariate) is missing, where missing means an empty
/// cell or the literal `NA`. Unselected columns are ignored entirely, so
/// missingness or garbage there never affects the result. A non-missing,
/// non-numeric cell in a selected column is a hard parse error carrying the
/// 1-based data row number.
///
/// Read a CSV header and return every column except `time_col` and
/// `status_col`, in file order — the default covariate selection.
pub fn default_covariates<P: AsRef<Path>>(
    path: P,
    time_col: &str,
    status_col: &str,
) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?;
    if !headers.iter().any(|h| h == time_col) {
        return Err(CoxError::Schema(format!(
            "column '{time_col}' not found in header"
        )));
    }
    if !headers.iter().any(|h| h == status_col) {
        return Err(CoxError::Schema(format!(
            "column '{status_col}' not found in header"
        )));
    }
    let cols: Vec<String> = headers
        .iter()
        .filter(|h| *h != time_col && *h != status_col)
        .map(|h| h.to_string())
        .collect();
    if cols.is_empty() {
        return Err(CoxError::Schema(
            "no covariate columns besides the time and status columns".into(),
        ));
    }
    Ok(cols)
}

/// The status column may contain at most two distinct codes among kept rows;
/// `status_event_code` marks the event, anything else is censoring.
pub fn load_csv<P: AsRef<Path>>(
    path: P,
    time_col: &str,
    status_col: &str,
    covariate_cols: &[String],
    status_event_code: i64,
) -> Result<LoadOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path.as_ref())?;

    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CoxError::Schema(format!("column '{name}' not found in header")))
    };
    let time_idx = find(time_col)?;
    let status_idx = find(status_col)?;
    let cov_idx: Vec<usize> = covariate_cols
        .iter()
        .map(|c| find(c))
        .collect::<Result<_>>()?;
    let p = cov_idx.len();

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut covariates = Vec::new();
    let mut rows_dropped = 0usize;
    let mut status_codes: HashSet<u64> = HashSet::new();
    let event_code = status_event_code as f64;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1; // 1-based data row, header excluded
        let record = record?;
        let cell = |col: usize| record.get(col).unwrap_or("");

        let selected_missing = is_missing(cell(time_idx))
            || is_missing(cell(status_idx))
            || cov_idx.iter().any(|&c| is_missing(cell(c)));
        if selected_missing {
            rows_dropped += 1;
            continue;
        }

        let time = parse_cell(cell(time_idx), row, time_col)?;
        if time < 0.0 {
            return Err(CoxError::Parse {
                row,
                column: time_col.to_string(),
                message: format!("negative time: {time}"),
            });
        }
        let status = parse_cell(cell(status_idx), row, status_col)?;
        status_codes.insert(status.to_bits());
        if status_codes.len() > 2 {
            return Err(CoxError::Schema(format!(
                "status column '{status_col}' has more than two distinct codes \
                 (third seen at data row {row})"
            )));
        }
        let mut xs = Vec::with_capacity(p);
        for (&c, name) in cov_idx.iter().zip(covariate_cols) {
            xs.push(parse_cell(cell(c), row, name)?);
        }

        times.push(time);
        events.push(status == event_code);
        covariates.extend_from_slice(&xs);
    }

    if times.len() < 2 {
        return Err(CoxError::InsufficientData(format!(
            "only {} complete rows after dropping {} (need at least 2)",
            times.len(),
            rows_dropped
        )));
    }

    let dataset = SurvivalDataset::new(times, events, covariates, covariate_cols.to_vec())?;
    Ok(LoadOutcome {
        dataset,
        rows_dropped,
    })
}

/// Risk set of subject `i`: indices (ascending) of all subjects whose
/// observed time is at least `T_i`, including `i` itself.
pub fn risk_set(data: &SurvivalDataset, i: usize) -> Result<Vec<usize>> {
    if i >= data.n() {
        return Err(CoxError::InvalidArgument(format!(
            "subject index {i} out of range (n = {})",
            data.n()
        )));
    }
    let t_i = data.times()[i];
    Ok((0..data.n())
        .filter(|&j| data.times()[j] >= t_i)
        .collect())
}

/// Precomputed contrast table: one row `d_q = X_i - X_j` per ordered pair of
/// an event subject `i` and a risk-set peer `j != i` with `T_j >= T_i`.
///
/// Rows are ordered by ascending `(i, j)`, which is part of the determinism
/// contract. The table is dense and lives in memory; `cap` bounds the row
/// count before anything is allocated.
#[derive(Debug, Clone)]
pub struct PairContrasts {
    contrasts: Vec<f64>, // row-major, q * p
    pairs: Vec<(u32, u32)>,
    p: usize,
}

/// Exact number of contrast rows the dataset would produce, without
/// allocating them. O(n log n).
pub fn count_pairs(data: &SurvivalDataset) -> usize {
    let mut sorted: Vec<f64> = data.times().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut q = 0usize;
    for i in 0..data.n() {
        if data.events()[i] {
            // |{j : T_j >= T_i}| = n - #{T_j < T_i}
            let below = sorted.partition_point(|&t| t < data.times()[i]);
            q += data.n() - below - 1; // exclude i itself
        }
    }
    q
}

/// Build the contrast table with the default row cap.
pub fn build_pair_contrasts(data: &SurvivalDataset) -> Result<PairContrasts> {
    build_pair_contrasts_capped(data, DEFAULT_PAIR_CAP)
}

/// Build the contrast table, refusing to allocate more than `cap` rows.
pub fn build_pair_contrasts_capped(data: &SurvivalDataset, cap: usize) -> Result<PairContrasts> {
    if data.n() > u32::MAX as usize {
        return Err(CoxError::InvalidConfig(
            "datasets beyond u32::MAX subjects are not supported".into(),
        ));
    }
    let q = count_pairs(data);
    if q == 0 {
        return Err(CoxError::EmptyPairs(
            "no (event, peer) pairs: either no events or every event's risk set is a singleton"
                .into(),
        ));
    }
    if q > cap {
        return Err(CoxError::PairBudget {
            required: q,
            cap,
        });
    }

    let n = data.n();
    let p = data.p();
    let mut contrasts = Vec::with_capacity(q * p);
    let mut pairs = Vec::with_capacity(q);
    for i in 0..n {
        if !data.events()[i] {
            continue;
        }
        let t_i = data.times()[i];
        let xi = data.x_row(i);
        for j in 0..n {
            if j == i || data.times()[j] < t_i {
                continue;
            }
            let xj = data.x_row(j);
            contrasts.extend(xi.iter().zip(xj).map(|(a, b)| a - b));
            pairs.push((i as u32, j as u32));
        }
    }
    debug_assert_eq!(pairs.len(), q);
    Ok(PairContrasts {
        contrasts,
        pairs,
        p,
    })
}

impl PairContrasts {
    /// Number of contrast rows Q.
    pub fn q(&self) -> usize {
        self.pairs.len()
    }

    /// Covariate dimension P.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Contrast row `d_q`.
    pub fn contrast(&self, q: usize) -> &[f64] {
        &self.contrasts[q * self.p..(q + 1) * self.p]
    }

    /// Raw row-major contrast storage.
    pub fn contrasts(&self) -> &[f64] {
        &self.contrasts
    }

    /// (event subject, peer) index pairs, ascending.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Componentwise sum of all contrast rows.
    pub fn contrast_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.p];
        for row in self.contrasts.chunks_exact(self.p.max(1)) {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn toy_dataset() -> SurvivalDataset {
        // times:   3 1 2 2 ; events: no yes yes no
        SurvivalDataset::new(
            vec![3.0, 1.0, 2.0, 2.0],
            vec![false, true, true, false],
            vec![1.0, 0.0, /* s0 */ 0.0, 1.0, /* s1 */ 2.0, 2.0, /* s2 */ 1.0, 1.0],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn loads_selected_columns_and_drops_complete_cases() {
        let f = write_csv(
            "junk,time,status,x1,x2\n\
             oops,1.0,1,0.5,2.0\n\
             NA,2.0,0,1.5,3.0\n\
             4,3.0,1,NA,4.0\n\
             5,4.0,1,2.5,\n\
             6,5.0,0,3.5,6.0\n",
        );
        let out = load_csv(f.path(), "time", "status", &["x1".into(), "x2".into()], 1).unwrap();
        // rows 3 and 4 have missing selected cells; 'junk' column is ignored
        // even where it is NA or non-numeric.
        assert_eq!(out.rows_dropped, 2);
        let d = out.dataset;
        assert_eq!(d.n(), 3);
        assert_eq!(d.times(), &[1.0, 2.0, 5.0]);
        assert_eq!(d.events(), &[true, false, false]);
        assert_eq!(d.x_row(0), &[0.5, 2.0]);
    }

    #[test]
    fn parse_error_carries_row_and_column() {
        let f = write_csv("time,status,x\n1.0,1,0.5\n2.0,1,abc\n");
        let err = load_csv(f.path(), "time", "status", &["x".into()], 1).unwrap_err();
        match err {
            CoxError::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let f = write_csv("time,status\n1.0,1\n2.0,0\n");
        let err = load_csv(f.path(), "time", "status", &["x".into()], 1).unwrap_err();
        assert!(matches!(err, CoxError::Schema(_)));
    }

    #[test]
    fn too_few_complete_rows_is_insufficient_data() {
        let f = write_csv("time,status,x\n1.0,1,0.5\nNA,1,0.5\n");
        let err = load_csv(f.path(), "time", "status", &["x".into()], 1).unwrap_err();
        assert!(matches!(err, CoxError::InsufficientData(_)));
    }

    #[test]
    fn three_status_codes_is_schema_error() {
        let f = write_csv("time,status,x\n1.0,1,0.5\n2.0,0,0.5\n3.0,2,0.5\n");
        let err = load_csv(f.path(), "time", "status", &["x".into()], 1).unwrap_err();
        assert!(matches!(err, CoxError::Schema(_)));
    }

    #[test]
    fn event_code_selects_events() {
        let f = write_csv("time,status,x\n1.0,2,0.5\n2.0,1,0.6\n3.0,2,0.7\n");
        let out = load_csv(f.path(), "time", "status", &["x".into()], 2).unwrap();
        assert_eq!(out.dataset.events(), &[true, false, true]);
    }

    #[test]
    fn risk_sets_are_closed_and_sorted() {
        let d = toy_dataset();
        assert_eq!(risk_set(&d, 1).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(risk_set(&d, 2).unwrap(), vec![0, 2, 3]);
        assert_eq!(risk_set(&d, 0).unwrap(), vec![0]);
        assert!(risk_set(&d, 4).is_err());
    }

    #[test]
    fn pair_table_matches_hand_enumeration() {
        let d = toy_dataset();
        let pc = build_pair_contrasts(&d).unwrap();
        // subject 1 (t=1, event): peers 0,2,3 ; subject 2 (t=2, event): peers 0,3
        assert_eq!(
            pc.pairs(),
            &[(1, 0), (1, 2), (1, 3), (2, 0), (2, 3)]
        );
        assert_eq!(pc.q(), 5);
        assert_eq!(count_pairs(&d), 5);
        // d for pair (1,0): x1 - x0 = (0-1, 1-0)
        assert_eq!(pc.contrast(0), &[-1.0, 1.0]);
        // d for pair (2,3): x2 - x3 = (2-1, 2-1)
        assert_eq!(pc.contrast(4), &[1.0, 1.0]);
        let sum = pc.contrast_sum();
        // sum of all rows computed by hand
        assert_eq!(sum, vec![-1.0 + -2.0 + -1.0 + 1.0 + 1.0, 1.0 + -1.0 + 0.0 + 2.0 + 1.0]);
    }

    #[test]
    fn no_events_yields_empty_pairs_error() {
        let d = SurvivalDataset::new(
            vec![1.0, 2.0],
            vec![false, false],
            vec![0.0, 1.0],
            vec!["a".into()],
        )
        .unwrap();
        assert!(matches!(
            build_pair_contrasts(&d).unwrap_err(),
            CoxError::EmptyPairs(_)
        ));
    }

    #[test]
    fn singleton_risk_sets_yield_empty_pairs_error() {
        // Latest subject has the only event: its risk set is just itself.
        let d = SurvivalDataset::new(
            vec![1.0, 2.0],
            vec![false, true],
            vec![0.0, 1.0],
            vec!["a".into()],
        )
        .unwrap();
        assert!(matches!(
            build_pair_contrasts(&d).unwrap_err(),
            CoxError::EmptyPairs(_)
        ));
    }

    #[test]
    fn pair_cap_is_enforced_before_allocation() {
        let d = toy_dataset();
        match build_pair_contrasts_capped(&d, 4).unwrap_err() {
            CoxError::PairBudget { required, cap } => {
                assert_eq!(required, 5);
                assert_eq!(cap, 4);
            }
            other => panic!("unexpected error: {other}"),
        }
    }
}
