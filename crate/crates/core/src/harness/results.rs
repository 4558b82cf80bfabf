use std::path::Path;

use super::RequiredSnr;
use crate::error::{Error, Result};

/// Exact header of result files.
pub const CSV_HEADER: [&str; 13] = [
    "scheme",
    "delta_p_db",
    "snr_db",
    "trials",
    "blkerr_u1",
    "blkerr_u2",
    "bler_u1",
    "bler_u2",
    "ber_u1",
    "ber_u2",
    "evm_db",
    "decode_order",
    "seed",
];

const NA: &str = "NA";

/// One Monte Carlo operating point. `None` fields serialize as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub scheme: String,
    pub delta_p_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub trials: u64,
    pub block_errors: [Option<u64>; 2],
    pub bler: [Option<f64>; 2],
    pub ber: [Option<f64>; 2],
    pub evm_db: Option<f64>,
    pub decode_order: String,
    pub seed: u64,
}

/// Six significant digits, shortest form.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return NA.into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_f(x: Option<f64>) -> String {
    x.map_or_else(|| NA.into(), fmt_sig)
}

fn opt_u(x: Option<u64>) -> String {
    x.map_or_else(|| NA.into(), |v| v.to_string())
}

fn io_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| io_err(path, e))?;
    for r in records {
        w.write_record([
            r.scheme.clone(),
            opt_f(r.delta_p_db),
            opt_f(r.snr_db),
            r.trials.to_string(),
            opt_u(r.block_errors[0]),
            opt_u(r.block_errors[1]),
            opt_f(r.bler[0]),
            opt_f(r.bler[1]),
            opt_f(r.ber[0]),
            opt_f(r.ber[1]),
            opt_f(r.evm_db),
            r.decode_order.clone(),
            r.seed.to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a file written by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rd.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let parse_err = |col: &str, v: &str| Error::Parse {
        path: path.to_path_buf(),
        message: format!("column {col}: cannot parse `{v}`"),
    };
    let f = |col: usize, v: &str| -> Result<Option<f64>> {
        if v == NA {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| parse_err(CSV_HEADER[col], v))
        }
    };
    let u = |col: usize, v: &str| -> Result<Option<u64>> {
        if v == NA {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| parse_err(CSV_HEADER[col], v))
        }
    };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| io_err(path, e))?;
        let c = |i: usize| row.get(i).unwrap_or("");
        out.push(ResultRecord {
            scheme: c(0).to_string(),
            delta_p_db: f(1, c(1))?,
            snr_db: f(2, c(2))?,
            trials: u(3, c(3))?.ok_or_else(|| parse_err("trials", c(3)))?,
            block_errors: [u(4, c(4))?, u(5, c(5))?],
            bler: [f(6, c(6))?, f(7, c(7))?],
            ber: [f(8, c(8))?, f(9, c(9))?],
            evm_db: f(10, c(10))?,
            decode_order: c(11).to_string(),
            seed: u(12, c(12))?.ok_or_else(|| parse_err("seed", c(12)))?,
        });
    }
    Ok(out)
}

/// One row per (scheme, ΔP, user) of a required-SNR search.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredSnrRow {
    pub scheme: String,
    pub delta_p_db: f64,
    pub user: usize,
    pub target_bler: f64,
    pub required: RequiredSnr,
}

/// Writes `scheme,delta_p_db,user,target_bler,required_snr_db,qualifier`.
pub fn write_required_snr(rows: &[RequiredSnrRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["scheme", "delta_p_db", "user", "target_bler", "required_snr_db", "qualifier"])
        .map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            fmt_sig(r.delta_p_db),
            (r.user + 1).to_string(),
            fmt_sig(r.target_bler),
            opt_f(r.required.value()),
            r.required.qualifier().to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
