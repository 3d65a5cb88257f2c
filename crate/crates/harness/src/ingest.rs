//! Mid-price series from CSV files.

use std::path::{Path, PathBuf};

use goodexec::calibration::MidPriceSeries;

use crate::error::{HarnessError, Result};

/// LOBSTER prices are integers in units of 1e-4 currency.
const LOBSTER_PRICE_SCALE: f64 = 1e4;
/// LOBSTER marks an empty book side with this price magnitude.
const LOBSTER_DUMMY_PRICE: f64 = 9_999_999_999.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsvFormat {
    /// Two columns `time,price`, with an optional header line.
    TimePrice,
    /// LOBSTER message file (read for the event times) and its orderbook
    /// file (read for the best ask and bid); the mid-price is their average.
    LobsterMid { orderbook: PathBuf },
}

/// Reads a price series. Equal timestamps keep their last price; a
/// decreasing timestamp or a non-positive price is an error naming the line.
pub fn ingest_csv(path: &Path, format: &CsvFormat) -> Result<MidPriceSeries> {
    let (times, prices) = match format {
        CsvFormat::TimePrice => read_time_price(path)?,
        CsvFormat::LobsterMid { orderbook } => read_lobster(path, orderbook)?,
    };
    if times.is_empty() {
        return Err(HarnessError::Invalid(format!("{}: no price rows", path.display())));
    }
    let series = MidPriceSeries::new(times, prices, path.display().to_string())?;
    Ok(series.deduplicated())
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        file: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn records(path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for row in reader(path)?.records() {
        let row = row.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => HarnessError::io(path, std::io::Error::other(e.to_string())),
            _ => parse_error(path, e.position().map_or(0, |p| p.line()), e.to_string()),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, row));
    }
    Ok(out)
}

fn field(path: &Path, line: u64, row: &csv::StringRecord, index: usize, name: &str) -> Result<f64> {
    let text = row
        .get(index)
        .ok_or_else(|| parse_error(path, line, format!("missing {name} column")))?;
    let value: f64 = text
        .parse()
        .map_err(|_| parse_error(path, line, format!("{name} '{text}' is not a number")))?;
    if !value.is_finite() {
        return Err(parse_error(path, line, format!("{name} '{text}' is not finite")));
    }
    Ok(value)
}

fn push_checked(
    path: &Path,
    line: u64,
    time: f64,
    price: f64,
    times: &mut Vec<f64>,
    prices: &mut Vec<f64>,
) -> Result<()> {
    if !(price > 0.0) {
        return Err(parse_error(path, line, format!("price {price} is not positive")));
    }
    if let Some(&last) = times.last() {
        if time < last {
            return Err(parse_error(
                path,
                line,
                format!("time {time} is earlier than the previous {last}"),
            ));
        }
    }
    times.push(time);
    prices.push(price);
    Ok(())
}

fn read_time_price(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = records(path)?;
    let mut times = Vec::with_capacity(rows.len());
    let mut prices = Vec::with_capacity(rows.len());
    for (k, (line, row)) in rows.iter().enumerate() {
        // A first row whose time does not parse is a header.
        if k == 0 && row.get(0).is_some_and(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        if row.len() < 2 {
            return Err(parse_error(path, *line, "expected two columns time,price"));
        }
        let time = field(path, *line, row, 0, "time")?;
        let price = field(path, *line, row, 1, "price")?;
        push_checked(path, *line, time, price, &mut times, &mut prices)?;
    }
    Ok((times, prices))
}

fn read_lobster(messages: &Path, orderbook: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let events = records(messages)?;
    let books = records(orderbook)?;
    if events.len() != books.len() {
        return Err(HarnessError::Invalid(format!(
            "{} has {} rows but {} has {}",
            messages.display(),
            events.len(),
            orderbook.display(),
            books.len()
        )));
    }
    let mut times = Vec::with_capacity(events.len());
    let mut prices = Vec::with_capacity(events.len());
    for ((line, event), (book_line, book)) in events.iter().zip(&books) {
        let time = field(messages, *line, event, 0, "time")?;
        let ask = field(orderbook, *book_line, book, 0, "ask price")?;
        let bid = field(orderbook, *book_line, book, 2, "bid price")?;
        if ask.abs() >= LOBSTER_DUMMY_PRICE || bid.abs() >= LOBSTER_DUMMY_PRICE {
            continue;
        }
        let mid = 0.5 * (ask + bid) / LOBSTER_PRICE_SCALE;
        if !(mid > 0.0) {
            return Err(parse_error(
                orderbook,
                *book_line,
                format!("mid-price {mid} is not positive"),
            ));
        }
        push_checked(messages, *line, time, mid, &mut times, &mut prices)?;
    }
    Ok((times, prices))
}
