//! Loading paired loss series from CSV and estimating a [`SystemModel`]:
//! margin fits plus rank-based copula-parameter estimation.

use std::path::Path;

use crate::copulas::CopulaModel;
use crate::covar::SystemModel;
use crate::error::{CovarError, Result};
use crate::margins::Margin;

const MIN_OBS: usize = 30;

/// Paired loss observations (positive-loss convention).
#[derive(Debug, Clone)]
pub struct LossSeries {
    pub timestamps: Option<Vec<String>>,
    pub losses_i: Vec<f64>,
    pub losses_s: Vec<f64>,
}

impl LossSeries {
    pub fn new(
        timestamps: Option<Vec<String>>,
        losses_i: Vec<f64>,
        losses_s: Vec<f64>,
    ) -> Result<Self> {
        if losses_i.len() != losses_s.len() {
            return Err(CovarError::Parse(format!(
                "series length mismatch: {} vs {}",
                losses_i.len(),
                losses_s.len()
            )));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != losses_i.len() {
                return Err(CovarError::Parse("timestamp length mismatch".into()));
            }
        }
        if losses_i.len() < MIN_OBS {
            return Err(CovarError::Parse(format!(
                "too few observations: {} (need >= {MIN_OBS})",
                losses_i.len()
            )));
        }
        if losses_i.iter().chain(losses_s.iter()).any(|x| !x.is_finite()) {
            return Err(CovarError::Parse("non-finite loss value".into()));
        }
        Ok(LossSeries {
            timestamps,
            losses_i,
            losses_s,
        })
    }

    pub fn len(&self) -> usize {
        self.losses_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses_i.is_empty()
    }
}

/// An estimated model with its estimation diagnostics.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub margin_i: Margin,
    pub margin_s: Margin,
    pub copula: CopulaModel,
    pub kendall_tau: f64,
    pub n_obs: usize,
}

impl FitReport {
    pub fn into_model(self) -> SystemModel {
        SystemModel {
            margin_i: self.margin_i,
            margin_s: self.margin_s,
            copula: self.copula,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
    Gumbel,
    Clayton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginKind {
    Normal,
    StudentT,
    Empirical,
}

/// Reads `date,loss_i,loss_s` (date optional) from a CSV file.
pub fn read_loss_csv<P: AsRef<Path>>(path: P) -> Result<LossSeries> {
    let mut reader = csv::Reader::from_path(path.as_ref())
        .map_err(|e| CovarError::Parse(format!("cannot open csv: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CovarError::Parse(format!("cannot read header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (i_col, s_col) = match (col("loss_i"), col("loss_s")) {
        (Some(i), Some(s)) => (i, s),
        _ => {
            return Err(CovarError::Parse(
                "header must contain columns loss_i and loss_s (date optional)".into(),
            ))
        }
    };
    let date_col = col("date");

    let mut timestamps = Vec::new();
    let mut losses_i = Vec::new();
    let mut losses_s = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1; // 1-based data row for messages
        let record =
            record.map_err(|e| CovarError::Parse(format!("row {row}: {e}")))?;
        let parse = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).ok_or_else(|| {
                CovarError::Parse(format!("row {row}: missing field {name}"))
            })?;
            raw.trim().parse::<f64>().map_err(|_| {
                CovarError::Parse(format!("row {row}: cannot parse {name} value {raw:?}"))
            })
        };
        losses_i.push(parse(i_col, "loss_i")?);
        losses_s.push(parse(s_col, "loss_s")?);
        if let Some(d) = date_col {
            timestamps.push(record.get(d).unwrap_or("").to_string());
        }
    }
    LossSeries::new(date_col.map(|_| timestamps), losses_i, losses_s)
}

/// Writes a [`LossSeries`] back to CSV at 17 significant digits, so a
/// read/write cycle is lossless for the numeric fields.
pub fn write_loss_csv<P: AsRef<Path>>(series: &LossSeries, path: P) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| CovarError::Parse(format!("cannot create csv: {e}")))?;
    let with_date = series.timestamps.is_some();
    let header: Vec<&str> = if with_date {
        vec!["date", "loss_i", "loss_s"]
    } else {
        vec!["loss_i", "loss_s"]
    };
    writer
        .write_record(&header)
        .map_err(|e| CovarError::Parse(e.to_string()))?;
    for k in 0..series.len() {
        let li = format!("{:.17e}", series.losses_i[k]);
        let ls = format!("{:.17e}", series.losses_s[k]);
        let record: Vec<String> = if with_date {
            vec![
                series.timestamps.as_ref().unwrap()[k].clone(),
                li,
                ls,
            ]
        } else {
            vec![li, ls]
        };
        writer
            .write_record(&record)
            .map_err(|e| CovarError::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Kendall's tau-b (tie-adjusted) via Knight's O(n log n) algorithm.
pub fn kendall_tau(series: &LossSeries) -> Result<f64> {
    let n = series.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let x = &series.losses_i;
    let y = &series.losses_s;
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .unwrap()
            .then(y[a].partial_cmp(&y[b]).unwrap())
    });

    // ties in x, and joint (x,y) ties
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut run = 1u64;
    let mut joint_run = 1u64;
    for k in 1..n {
        if x[idx[k]] == x[idx[k - 1]] {
            run += 1;
            if y[idx[k]] == y[idx[k - 1]] {
                joint_run += 1;
            } else {
                ties_xy += joint_run * (joint_run - 1) / 2;
                joint_run = 1;
            }
        } else {
            ties_x += run * (run - 1) / 2;
            ties_xy += joint_run * (joint_run - 1) / 2;
            run = 1;
            joint_run = 1;
        }
    }
    ties_x += run * (run - 1) / 2;
    ties_xy += joint_run * (joint_run - 1) / 2;

    // inversions in the y sequence (merge-sort count) = discordant swaps
    let mut ys: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
    let swaps = count_inversions(&mut ys);

    // ties in y
    let mut y_sorted: Vec<f64> = y.to_vec();
    y_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ties_y = 0u64;
    run = 1;
    for k in 1..n {
        if y_sorted[k] == y_sorted[k - 1] {
            run += 1;
        } else {
            ties_y += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties_y += run * (run - 1) / 2;

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let denom_x = n0 - ties_x;
    let denom_y = n0 - ties_y;
    if denom_x == 0 || denom_y == 0 {
        return Err(CovarError::DegenerateData(
            "all observations tied in one series".into(),
        ));
    }
    let numer = n0 as i128 - ties_x as i128 - ties_y as i128 + ties_xy as i128
        - 2 * swaps as i128;
    Ok(numer as f64 / ((denom_x as f64).sqrt() * (denom_y as f64).sqrt()))
}

fn count_inversions(data: &mut [f64]) -> u64 {
    let n = data.len();
    if n < 2 {
        return 0;
    }
    let mut buf = data.to_vec();
    merge_count(data, &mut buf)
}

fn merge_count(data: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = data.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left_buf, right_buf) = buf.split_at_mut(mid);
    let mut inv = {
        let (left, right) = data.split_at_mut(mid);
        merge_count(left, left_buf) + merge_count(right, right_buf)
    };
    buf[..n].copy_from_slice(data);
    let (left, right) = buf[..n].split_at(mid);
    let (mut i, mut j) = (0, 0);
    for slot in data.iter_mut() {
        if i < left.len() && (j >= right.len() || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            *slot = right[j];
            j += 1;
            inv += (left.len() - i) as u64;
        }
    }
    inv
}

/// Inverts a Kendall tau into a copula parameter for the requested family:
/// elliptical rho = sin(pi tau / 2); Gumbel theta = 1/(1 - tau);
/// Clayton theta = 2 tau / (1 - tau). The t family takes a caller-supplied
/// nu (default 5).
pub fn estimate_copula(tau: f64, family: CopulaFamily, nu: Option<f64>) -> Result<CopulaModel> {
    if !(tau.abs() < 1.0) {
        return Err(CovarError::Domain(format!(
            "kendall tau must satisfy |tau| < 1, got {tau}"
        )));
    }
    match family {
        CopulaFamily::Gaussian => {
            CopulaModel::gaussian((std::f64::consts::FRAC_PI_2 * tau).sin())
        }
        CopulaFamily::StudentT => CopulaModel::student_t(
            (std::f64::consts::FRAC_PI_2 * tau).sin(),
            nu.unwrap_or(5.0),
        ),
        CopulaFamily::Gumbel => {
            if tau < 0.0 {
                return Err(CovarError::Domain(format!(
                    "Gumbel cannot represent negative dependence (tau = {tau})"
                )));
            }
            CopulaModel::gumbel(1.0 / (1.0 - tau))
        }
        CopulaFamily::Clayton => {
            if tau <= 0.0 {
                return Err(CovarError::Domain(format!(
                    "Clayton requires tau in (0,1), got {tau}"
                )));
            }
            CopulaModel::clayton(2.0 * tau / (1.0 - tau))
        }
    }
}

/// Fits both margins of the series with the requested family.
pub fn fit_margins(series: &LossSeries, kind: MarginKind, nu: Option<f64>) -> Result<(Margin, Margin)> {
    let fit_one = |data: &[f64]| -> Result<Margin> {
        match kind {
            MarginKind::Empirical => Margin::empirical(data.to_vec()),
            MarginKind::Normal => {
                let (mean, sd) = mean_sd(data)?;
                Margin::normal(mean, sd)
            }
            MarginKind::StudentT => {
                let (mean, sd) = mean_sd(data)?;
                let nu = match nu {
                    Some(v) => v,
                    None => {
                        // method of moments from excess kurtosis, floored;
                        // light-tailed samples degrade to a near-normal t
                        let n = data.len() as f64;
                        let m2 = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                        let m4 = data.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
                        let kurt_excess = m4 / (m2 * m2) - 3.0;
                        if kurt_excess > 1e-9 {
                            (4.0 + 6.0 / kurt_excess).max(4.5)
                        } else {
                            1e6
                        }
                    }
                };
                // match the sample variance: Var = nu/(nu-2) * scale^2
                let scale = if nu > 2.0 {
                    sd * ((nu - 2.0) / nu).sqrt()
                } else {
                    sd
                };
                Margin::student_t(nu, mean, scale)
            }
        }
    };
    Ok((fit_one(&series.losses_i)?, fit_one(&series.losses_s)?))
}

fn mean_sd(data: &[f64]) -> Result<(f64, f64)> {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(CovarError::DegenerateData("zero variance series".into()));
    }
    Ok((mean, var.sqrt()))
}

/// End-to-end estimation: margins + Kendall-tau copula inversion.
pub fn estimate_model(
    series: &LossSeries,
    family: CopulaFamily,
    margin_kind: MarginKind,
    nu: Option<f64>,
) -> Result<FitReport> {
    let tau = kendall_tau(series)?;
    let copula = estimate_copula(tau, family, nu)?;
    let (margin_i, margin_s) = fit_margins(series, margin_kind, nu)?;
    Ok(FitReport {
        margin_i,
        margin_s,
        copula,
        kendall_tau: tau,
        n_obs: series.len(),
    })
}
