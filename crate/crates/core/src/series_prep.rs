//! Price ingestion, continuous-futures splicing and return construction.
//!
//! Spot files carry `date,close`; futures files carry one row per contract
//! per trading day with `date,contract,expiry,close,settle,volume`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPOT_HEADER: [&str; 2] = ["date", "close"];
pub const FUTURES_HEADER: [&str; 6] = ["date", "contract", "expiry", "close", "settle", "volume"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractQuote {
    pub date: NaiveDate,
    pub contract_id: String,
    pub expiry: NaiveDate,
    pub close: f64,
    pub settle: f64,
    pub volume: u64,
}

impl ContractQuote {
    pub fn price(&self, field: PriceField) -> f64 {
        match field {
            PriceField::Close => self.close,
            PriceField::Settle => self.settle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceField {
    Close,
    Settle,
}

impl std::str::FromStr for PriceField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "close" => Ok(PriceField::Close),
            "settle" => Ok(PriceField::Settle),
            other => Err(Error::InvalidConfig(format!(
                "price field must be close or settle, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for PriceField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PriceField::Close => "close",
            PriceField::Settle => "settle",
        })
    }
}

/// A date-ordered price path for one instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub instrument: String,
    pub points: Vec<PricePoint>,
    /// Days on which the active contract changed. Empty for spot series.
    pub roll_dates: Vec<NaiveDate>,
    /// Active contract per point; empty for spot series.
    pub active_contracts: Vec<String>,
}

impl PriceSeries {
    /// Builds a spot series, sorting by date and checking the invariants.
    pub fn new(instrument: impl Into<String>, mut points: Vec<PricePoint>) -> Result<Self> {
        points.sort_by_key(|p| p.date);
        validate_points(&points)?;
        Ok(Self {
            instrument: instrument.into(),
            points,
            roll_dates: Vec::new(),
            active_contracts: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.date).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    /// Restricts the series to the given dates, keeping contract labels in step.
    pub fn restrict_to(&self, keep: &HashSet<NaiveDate>) -> PriceSeries {
        let mut points = Vec::new();
        let mut active = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if keep.contains(&p.date) {
                points.push(*p);
                if let Some(c) = self.active_contracts.get(i) {
                    active.push(c.clone());
                }
            }
        }
        PriceSeries {
            instrument: self.instrument.clone(),
            points,
            roll_dates: self
                .roll_dates
                .iter()
                .copied()
                .filter(|d| keep.contains(d))
                .collect(),
            active_contracts: active,
        }
    }

    /// Writes the `date,price,active_contract,is_roll_day` export.
    pub fn write_spliced_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let rolls: HashSet<NaiveDate> = self.roll_dates.iter().copied().collect();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "price", "active_contract", "is_roll_day"])?;
        for (i, p) in self.points.iter().enumerate() {
            let contract = self.active_contracts.get(i).map(String::as_str).unwrap_or("");
            w.write_record([
                p.date.to_string(),
                format!("{}", p.price),
                contract.to_string(),
                rolls.contains(&p.date).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn validate_points(points: &[PricePoint]) -> Result<()> {
    for w in points.windows(2) {
        if w[1].date <= w[0].date {
            return Err(Error::InvalidConfig(format!(
                "dates must be strictly increasing (duplicate or unordered {})",
                w[1].date
            )));
        }
    }
    if let Some(p) = points.iter().find(|p| !(p.price > 0.0 && p.price.is_finite())) {
        return Err(Error::InvalidConfig(format!(
            "non-positive price {} on {}",
            p.price, p.date
        )));
    }
    Ok(())
}

/// Log returns (or their standardized form), aligned to the later date of each pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub dates: Vec<NaiveDate>,
    /// Sample mean of the raw returns (of the input, for a standardized series).
    pub mean: f64,
    /// Sample standard deviation, n-1 denominator, with the same convention as `mean`.
    pub std: f64,
    pub standardized: bool,
}

impl ReturnSeries {
    /// Wraps raw values with synthetic consecutive calendar dates starting at `origin`.
    pub fn from_values(values: Vec<f64>, origin: NaiveDate) -> Self {
        let dates = (0..values.len())
            .map(|i| origin + chrono::Days::new(i as u64))
            .collect();
        let (mean, std) = mean_and_sample_std(&values);
        Self {
            values,
            dates,
            mean,
            std,
            standardized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Parsed content of a price file.
#[derive(Debug, Clone)]
pub enum PriceFile {
    Spot(PriceSeries),
    Futures(Vec<ContractQuote>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Spot,
    Futures,
}

pub fn parse_price_csv(path: &Path, schema: Schema) -> Result<PriceFile> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    file.read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    match schema {
        Schema::Spot => parse_spot_str(&text, &context).map(PriceFile::Spot),
        Schema::Futures => parse_futures_str(&text, &context).map(PriceFile::Futures),
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str], context: &str) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Parse {
        context: context.to_string(),
        row: 1,
        message: e.to_string(),
    })?;
    let got: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    for col in expected {
        if !got.iter().any(|g| g == col) {
            return Err(Error::Parse {
                context: context.to_string(),
                row: 1,
                message: format!("missing column {col:?}"),
            });
        }
    }
    if got.len() != expected.len() || got.iter().zip(expected).any(|(g, e)| g != e) {
        return Err(Error::Parse {
            context: context.to_string(),
            row: 1,
            message: format!("header must be {}", expected.join(",")),
        });
    }
    Ok(())
}

struct Row<'a> {
    record: csv::StringRecord,
    row: usize,
    context: &'a str,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            context: self.context.to_string(),
            row: self.row,
            message: message.into(),
        }
    }

    fn field(&self, i: usize, name: &str) -> Result<&str> {
        match self.record.get(i) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(self.err(format!("missing column {name:?}"))),
        }
    }

    fn date(&self, i: usize, name: &str) -> Result<NaiveDate> {
        let s = self.field(i, name)?;
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|_| self.err(format!("malformed date {s:?}")))
    }

    fn price(&self, i: usize, name: &str) -> Result<f64> {
        let s = self.field(i, name)?;
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(format!("malformed number {s:?}")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(self.err("non-positive price"));
        }
        Ok(v)
    }
}

fn rows<'a, R: Read + 'a>(
    rdr: &'a mut csv::Reader<R>,
    context: &'a str,
) -> impl Iterator<Item = Result<Row<'a>>> + 'a {
    rdr.records().map(move |rec| {
        let record = rec.map_err(|e| Error::Parse {
            context: context.to_string(),
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        Ok(Row {
            record,
            row,
            context,
        })
    })
}

/// Parses a spot file held in memory; `context` labels error messages.
pub fn parse_spot_str(text: &str, context: &str) -> Result<PriceSeries> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &SPOT_HEADER, context)?;
    let mut points = Vec::new();
    let mut seen = HashMap::new();
    for row in rows(&mut rdr, context) {
        let row = row?;
        let date = row.date(0, "date")?;
        let price = row.price(1, "close")?;
        if let Some(first) = seen.insert(date, row.row) {
            return Err(row.err(format!("duplicate date {date} (first at row {first})")));
        }
        points.push(PricePoint { date, price });
    }
    let instrument = Path::new(context)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "spot".into());
    PriceSeries::new(instrument, points)
}

/// Parses a futures panel held in memory.
pub fn parse_futures_str(text: &str, context: &str) -> Result<Vec<ContractQuote>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &FUTURES_HEADER, context)?;
    let mut quotes = Vec::new();
    let mut seen: HashMap<(NaiveDate, String), usize> = HashMap::new();
    for row in rows(&mut rdr, context) {
        let row = row?;
        let date = row.date(0, "date")?;
        let contract_id = row.field(1, "contract")?.to_string();
        let expiry = row.date(2, "expiry")?;
        let close = row.price(3, "close")?;
        let settle = row.price(4, "settle")?;
        let vol_s = row.field(5, "volume")?;
        let volume: u64 = vol_s
            .parse()
            .map_err(|_| row.err(format!("malformed volume {vol_s:?}")))?;
        if expiry < date {
            return Err(row.err(format!("expiry {expiry} precedes quote date {date}")));
        }
        if let Some(first) = seen.insert((date, contract_id.clone()), row.row) {
            return Err(row.err(format!(
                "duplicate (date, contract) ({date}, {contract_id}) (first at row {first})"
            )));
        }
        quotes.push(ContractQuote {
            date,
            contract_id,
            expiry,
            close,
            settle,
            volume,
        });
    }
    quotes.sort_by_key(|q| (q.date, q.expiry));
    Ok(quotes)
}

/// Splices nearest-term contracts into one continuous series.
///
/// The active contract rolls to the next-expiring contract on the first day
/// its volume exceeds the active one's, or on the active contract's last
/// trading day if that comes first. Rolls never reverse. Prices are taken
/// as-is (no back-adjustment).
pub fn splice_continuous_futures(
    quotes: &[ContractQuote],
    price_field: PriceField,
) -> Result<PriceSeries> {
    // contract -> expiry, checking consistency
    let mut expiry_of: HashMap<&str, NaiveDate> = HashMap::new();
    let mut last_quote: HashMap<&str, NaiveDate> = HashMap::new();
    for q in quotes {
        match expiry_of.get(q.contract_id.as_str()) {
            Some(e) if *e != q.expiry => {
                return Err(Error::InvalidConfig(format!(
                    "contract {} has inconsistent expiries {} and {}",
                    q.contract_id, e, q.expiry
                )))
            }
            _ => {
                expiry_of.insert(&q.contract_id, q.expiry);
            }
        }
        let lq = last_quote.entry(&q.contract_id).or_insert(q.date);
        if q.date > *lq {
            *lq = q.date;
        }
    }

    let mut by_date: BTreeMap<NaiveDate, Vec<&ContractQuote>> = BTreeMap::new();
    for q in quotes {
        by_date.entry(q.date).or_default().push(q);
    }
    let final_day = match by_date.keys().next_back() {
        Some(d) => *d,
        None => return Err(Error::InsufficientData("empty futures panel".into())),
    };

    let mut points = Vec::with_capacity(by_date.len());
    let mut active_contracts = Vec::with_capacity(by_date.len());
    let mut roll_dates = Vec::new();
    let mut current: Option<(String, NaiveDate)> = None;

    for (&day, day_quotes) in &by_date {
        let mut alive: Vec<&ContractQuote> =
            day_quotes.iter().copied().filter(|q| q.expiry >= day).collect();
        alive.sort_by_key(|q| q.expiry);
        if alive.is_empty() {
            return Err(Error::Gap(day));
        }
        if let Some(w) = alive.windows(2).find(|w| w[0].expiry == w[1].expiry) {
            return Err(Error::InvalidConfig(format!(
                "contracts {} and {} share expiry {} on {}",
                w[0].contract_id, w[1].contract_id, w[0].expiry, day
            )));
        }

        let previous = current.clone();
        let mut active_idx = match &current {
            None => 0,
            Some((id, expiry)) => match alive.iter().position(|q| &q.contract_id == id) {
                Some(i) => i,
                // Tracked contract no longer quoted: move to the next expiry.
                None => match alive.iter().position(|q| q.expiry > *expiry) {
                    Some(i) => i,
                    None => return Err(Error::Gap(day)),
                },
            },
        };

        let active = alive[active_idx];
        let is_last_day = day >= active.expiry
            || (last_quote.get(active.contract_id.as_str()) == Some(&day) && day < final_day);
        if active_idx + 1 < alive.len() {
            let next = alive[active_idx + 1];
            if is_last_day || next.volume > active.volume {
                active_idx += 1;
            }
        }

        let chosen = alive[active_idx];
        if let Some((prev_id, _)) = &previous {
            if prev_id != &chosen.contract_id {
                roll_dates.push(day);
            }
        }
        current = Some((chosen.contract_id.clone(), chosen.expiry));
        points.push(PricePoint {
            date: day,
            price: chosen.price(price_field),
        });
        active_contracts.push(chosen.contract_id.clone());
    }

    Ok(PriceSeries {
        instrument: format!("futures_{price_field}"),
        points,
        roll_dates,
        active_contracts,
    })
}

/// Restricts two series to their common trading dates.
pub fn align_on_common_dates(a: &PriceSeries, b: &PriceSeries) -> (PriceSeries, PriceSeries) {
    let da: HashSet<NaiveDate> = a.points.iter().map(|p| p.date).collect();
    let db: HashSet<NaiveDate> = b.points.iter().map(|p| p.date).collect();
    let common: HashSet<NaiveDate> = da.intersection(&db).copied().collect();
    let dropped = da.len() + db.len() - 2 * common.len();
    if dropped > 0 {
        log::info!(
            "calendar alignment dropped {dropped} dates ({} only in {}, {} only in {})",
            da.len() - common.len(),
            a.instrument,
            db.len() - common.len(),
            b.instrument
        );
    }
    (a.restrict_to(&common), b.restrict_to(&common))
}

pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "log returns need at least 2 prices, got {}",
            series.len()
        )));
    }
    validate_points(&series.points)?;
    let values: Vec<f64> = series
        .points
        .windows(2)
        .map(|w| w[1].price.ln() - w[0].price.ln())
        .collect();
    let dates = series.points[1..].iter().map(|p| p.date).collect();
    let (mean, std) = mean_and_sample_std(&values);
    Ok(ReturnSeries {
        values,
        dates,
        mean,
        std,
        standardized: false,
    })
}

/// `(r - mean) / std` with the sample (n-1) standard deviation.
pub fn standardize(returns: &ReturnSeries) -> Result<ReturnSeries> {
    let n = returns.values.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "standardization needs at least 2 values, got {n}"
        )));
    }
    let (mean, std) = mean_and_sample_std(&returns.values);
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::Degenerate("zero variance return series".into()));
    }
    let mut values: Vec<f64> = returns.values.iter().map(|v| (v - mean) / std).collect();
    // Second centering pass removes the rounding residue of the first.
    let (m2, s2) = mean_and_sample_std(&values);
    values.iter_mut().for_each(|v| *v = (*v - m2) / s2);
    Ok(ReturnSeries {
        values,
        dates: returns.dates.clone(),
        mean,
        std,
        standardized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn quote(date: &str, id: &str, expiry: &str, price: f64, volume: u64) -> ContractQuote {
        ContractQuote {
            date: d(date),
            contract_id: id.into(),
            expiry: d(expiry),
            close: price,
            settle: price + 0.05,
            volume,
        }
    }

    #[test]
    fn parses_spot_rows() {
        let s = parse_spot_str("date,close\n2004-03-29,17.10\n2004-03-26,17.42\n", "vix.csv")
            .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points[0].date, d("2004-03-26"));
        assert_eq!(s.points[0].price, 17.42);
        assert_eq!(s.instrument, "vix");
    }

    #[test]
    fn parses_futures_row() {
        let q = parse_futures_str(
            "date,contract,expiry,close,settle,volume\n2004-03-26,K04,2004-05-19,18.0,18.1,461\n",
            "f.csv",
        )
        .unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].volume, 461);
        assert_eq!(q[0].contract_id, "K04");
        assert_eq!(q[0].settle, 18.1);
    }

    #[test]
    fn rejects_non_positive_price_with_row() {
        let err = parse_spot_str("date,close\n2004-03-26,17.42\n2004-03-29,-3.0\n", "vix.csv")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("non-positive price at row 3"), "{msg}");
    }

    #[test]
    fn rejects_malformed_date_and_missing_column() {
        let err = parse_spot_str("date,close\n2004/03/26,1.0\n", "v").unwrap_err();
        assert!(err.to_string().contains("malformed date"));
        let err = parse_spot_str("date\n2004-03-26\n", "v").unwrap_err();
        assert!(err.to_string().contains("missing column"));
        let err = parse_spot_str("date,close\n2004-03-26,\n", "v").unwrap_err();
        assert!(err.to_string().contains("missing column"));
    }

    #[test]
    fn rejects_duplicate_contract_rows() {
        let text = "date,contract,expiry,close,settle,volume\n\
                    2004-03-26,K04,2004-05-19,18.0,18.1,461\n\
                    2004-03-26,K04,2004-05-19,18.0,18.1,461\n";
        let err = parse_futures_str(text, "f.csv").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn volume_crossover_rolls_on_same_day() {
        let quotes = vec![
            quote("2020-01-02", "A", "2020-01-20", 10.0, 200),
            quote("2020-01-02", "B", "2020-02-20", 11.0, 50),
            quote("2020-01-03", "A", "2020-01-20", 10.5, 100),
            quote("2020-01-03", "B", "2020-02-20", 11.5, 150),
            quote("2020-01-06", "A", "2020-01-20", 10.2, 300),
            quote("2020-01-06", "B", "2020-02-20", 11.2, 10),
        ];
        let s = splice_continuous_futures(&quotes, PriceField::Close).unwrap();
        assert_eq!(s.active_contracts, vec!["A", "B", "B"]);
        assert_eq!(s.roll_dates, vec![d("2020-01-03")]);
        assert_eq!(s.prices(), vec![10.0, 11.5, 11.2]);
    }

    #[test]
    fn forced_roll_on_last_trading_day() {
        let quotes = vec![
            quote("2020-01-02", "A", "2020-01-06", 10.0, 200),
            quote("2020-01-02", "B", "2020-02-20", 11.0, 50),
            quote("2020-01-03", "A", "2020-01-06", 10.5, 200),
            quote("2020-01-03", "B", "2020-02-20", 11.5, 50),
            quote("2020-01-06", "A", "2020-01-06", 10.2, 200),
            quote("2020-01-06", "B", "2020-02-20", 11.2, 50),
            quote("2020-01-07", "B", "2020-02-20", 11.3, 50),
        ];
        let s = splice_continuous_futures(&quotes, PriceField::Settle).unwrap();
        assert_eq!(s.active_contracts, vec!["A", "A", "B", "B"]);
        assert_eq!(s.roll_dates, vec![d("2020-01-06")]);
        assert!((s.points[2].price - 11.25).abs() < 1e-12);
    }

    #[test]
    fn single_contract_is_identity() {
        let quotes: Vec<_> = (0..5)
            .map(|i| {
                quote(
                    &format!("2020-01-0{}", i + 1),
                    "A",
                    "2020-03-01",
                    10.0 + i as f64,
                    i * 7,
                )
            })
            .collect();
        let s = splice_continuous_futures(&quotes, PriceField::Close).unwrap();
        assert!(s.roll_dates.is_empty());
        assert_eq!(s.prices(), vec![10.0, 11.0, 12.0, 13.0, 14.0]);
    }

    #[test]
    fn expiry_ties_and_gaps_are_errors() {
        let quotes = vec![
            quote("2020-01-02", "A", "2020-01-20", 10.0, 1),
            quote("2020-01-02", "B", "2020-01-20", 11.0, 2),
        ];
        assert!(matches!(
            splice_continuous_futures(&quotes, PriceField::Close),
            Err(Error::InvalidConfig(_))
        ));
        let expired = vec![ContractQuote {
            expiry: d("2020-01-01"),
            ..quote("2020-01-02", "A", "2020-01-20", 10.0, 1)
        }];
        assert!(matches!(
            splice_continuous_futures(&expired, PriceField::Close),
            Err(Error::Gap(_))
        ));
    }

    #[test]
    fn log_return_examples() {
        let s = PriceSeries::new(
            "p",
            vec![
                PricePoint { date: d("2020-01-01"), price: 1.0 },
                PricePoint { date: d("2020-01-02"), price: std::f64::consts::E },
            ],
        )
        .unwrap();
        let r = log_returns(&s).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.dates, vec![d("2020-01-02")]);

        let flat = PriceSeries::new(
            "p",
            (1..=3)
                .map(|i| PricePoint { date: d(&format!("2020-01-0{i}")), price: 100.0 })
                .collect(),
        )
        .unwrap();
        assert_eq!(log_returns(&flat).unwrap().values, vec![0.0, 0.0]);

        let one = PriceSeries::new("p", vec![PricePoint { date: d("2020-01-01"), price: 1.0 }])
            .unwrap();
        assert!(matches!(log_returns(&one), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn standardize_examples() {
        let r = ReturnSeries::from_values(vec![1.0, 2.0, 3.0], d("2020-01-01"));
        let z = standardize(&r).unwrap();
        for (a, b) in z.values.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(z.standardized);
        let c = ReturnSeries::from_values(vec![5.0, 5.0, 5.0], d("2020-01-01"));
        assert!(matches!(standardize(&c), Err(Error::Degenerate(_))));
    }

    proptest! {
        #[test]
        fn standardize_moments_idempotence_affine(
            v in prop::collection::vec(-10.0f64..10.0, 3..200),
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            let origin = d("2020-01-01");
            let r = ReturnSeries::from_values(v.clone(), origin);
            prop_assume!(r.std > 1e-6);
            let z = standardize(&r).unwrap();
            let (m, s) = mean_and_sample_std(&z.values);
            prop_assert!(m.abs() < 1e-12);
            prop_assert!((s - 1.0).abs() < 1e-12);
            let zz = standardize(&z).unwrap();
            for (x, y) in z.values.iter().zip(&zz.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let affine = ReturnSeries::from_values(v.iter().map(|x| a * x + b).collect(), origin);
            let za = standardize(&affine).unwrap();
            for (x, y) in z.values.iter().zip(&za.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn log_returns_scale_invariant(
            p in prop::collection::vec(0.5f64..100.0, 2..60),
            k in 0.01f64..100.0,
        ) {
            let origin = d("2020-01-01");
            let mk = |scale: f64| PriceSeries::new("p", p.iter().enumerate().map(|(i, v)| PricePoint {
                date: origin + chrono::Days::new(i as u64),
                price: v * scale,
            }).collect()).unwrap();
            let r1 = log_returns(&mk(1.0)).unwrap();
            let r2 = log_returns(&mk(k)).unwrap();
            for (a, b) in r1.values.iter().zip(&r2.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn spliced_prices_come_from_one_quote(
            vols in prop::collection::vec((0u64..100, 0u64..100, 0u64..100), 5..40),
        ) {
            let origin = d("2020-01-01");
            let expiries = [d("2020-03-01"), d("2020-04-01"), d("2020-05-01")];
            let mut quotes = Vec::new();
            for (i, (a, b, c)) in vols.iter().enumerate() {
                let date = origin + chrono::Days::new(i as u64);
                for (k, v) in [a, b, c].into_iter().enumerate() {
                    quotes.push(ContractQuote {
                        date,
                        contract_id: format!("C{k}"),
                        expiry: expiries[k],
                        close: 10.0 + k as f64 + i as f64 * 0.01,
                        settle: 20.0 + k as f64 + i as f64 * 0.01,
                        volume: *v,
                    });
                }
            }
            let s = splice_continuous_futures(&quotes, PriceField::Close).unwrap();
            prop_assert_eq!(s.len(), vols.len());
            let mut last_rank = 0usize;
            for (i, p) in s.points.iter().enumerate() {
                let matches: Vec<_> = quotes.iter()
                    .filter(|q| q.date == p.date && q.close == p.price)
                    .collect();
                prop_assert_eq!(matches.len(), 1);
                prop_assert_eq!(&matches[0].contract_id, &s.active_contracts[i]);
                let rank: usize = s.active_contracts[i][1..].parse().unwrap();
                prop_assert!(rank >= last_rank);
                last_rank = rank;
            }
        }
    }
}
