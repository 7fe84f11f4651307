//! CSV exports with unit-carrying headers, and the key-value run summary.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::analysis::{
    background_corrected_g2, CorrelationHistogram, DecayHistogram, FitModel, FitParameter,
    FitResult, FitStatus, Spectrum,
};
use crate::error::{Error, Result};
use crate::physics::frequency_to_wavelength;

/// Column header for a value with a unit; dimensionless values are unsuffixed.
fn with_unit(name: &str, unit: &str) -> String {
    if unit.is_empty() || unit == "1" {
        name.to_string()
    } else {
        format!("{name}_{unit}")
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))
}

fn field(row: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let s = row.get(i).unwrap_or("");
    s.trim()
        .parse()
        .map_err(|_| Error::Csv(format!("row {line}: cannot parse `{s}` as a number")))
}

/// `frequency_hz, detuning_mhz, wavelength_nm, counts`, with detuning
/// measured from `reference_hz`.
pub fn write_spectrum_csv<W: Write>(w: W, spectrum: &Spectrum, reference_hz: f64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["frequency_hz", "detuning_mhz", "wavelength_nm", "counts"])?;
    for &(f, c) in spectrum.points() {
        out.write_record([
            num(f),
            num((f - reference_hz) * 1e-6),
            num(frequency_to_wavelength(f) * 1e9),
            num(c),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Repeated scans in long form: `scan, start_time_s, frequency_hz,
/// detuning_mhz, wavelength_nm, counts`.
pub fn write_scans_csv<W: Write>(w: W, scans: &[Spectrum], reference_hz: f64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scan", "start_time_s", "frequency_hz", "detuning_mhz", "wavelength_nm", "counts"])?;
    for (i, s) in scans.iter().enumerate() {
        for &(f, c) in s.points() {
            out.write_record([
                i.to_string(),
                num(s.acquisition_time),
                num(f),
                num((f - reference_hz) * 1e-6),
                num(frequency_to_wavelength(f) * 1e9),
                num(c),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads spectra from a CSV with `frequency_hz` and `counts` columns. A
/// `scan` column splits the rows into separate spectra, in order of first
/// appearance.
pub fn read_spectra_csv<R: Read>(r: R) -> Result<Vec<Spectrum>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let fi = header_index(&headers, "frequency_hz")?;
    let ci = header_index(&headers, "counts")?;
    let si = headers.iter().position(|h| h == "scan");
    let ti = headers.iter().position(|h| h == "start_time_s");
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (f64, Vec<(f64, f64)>)> = HashMap::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = n + 2;
        let key = si.map(|i| row.get(i).unwrap_or("").to_string()).unwrap_or_default();
        let t = match ti {
            Some(i) => field(&row, i, line)?,
            None => 0.0,
        };
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (t, Vec::new())
        });
        entry.1.push((field(&row, fi, line)?, field(&row, ci, line)?));
    }
    if order.is_empty() {
        return Err(Error::InsufficientData("spectrum file has no rows".into()));
    }
    order
        .into_iter()
        .map(|k| {
            let (t, pts) = groups.remove(&k).expect("grouped key");
            let label = if k.is_empty() { "spectrum".to_string() } else { format!("scan {k}") };
            Spectrum::new(pts, t, label)
        })
        .collect()
}

/// `bin_start_s, bin_end_s, counts`.
pub fn write_histogram_csv<W: Write>(w: W, hist: &DecayHistogram) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_start_s", "bin_end_s", "counts"])?;
    let edges = hist.bin_edges();
    for (k, c) in hist.counts.iter().enumerate() {
        out.write_record([num(edges[k]), num(edges[k + 1]), num(*c)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_histogram_csv<R: Read>(r: R) -> Result<DecayHistogram> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let (si, ei, ci) = (
        header_index(&headers, "bin_start_s")?,
        header_index(&headers, "bin_end_s")?,
        header_index(&headers, "counts")?,
    );
    let mut rows = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        rows.push((field(&row, si, n + 2)?, field(&row, ei, n + 2)?, field(&row, ci, n + 2)?));
    }
    let Some(&(s0, e0, _)) = rows.first() else {
        return Err(Error::InsufficientData("histogram file has no rows".into()));
    };
    let width = e0 - s0;
    for (k, &(s, e, _)) in rows.iter().enumerate() {
        let tol = 1e-9 * width.abs().max(e.abs());
        if (s - (s0 + k as f64 * width)).abs() > tol || (e - s - width).abs() > tol {
            return Err(Error::Csv(format!("row {}: bins must be contiguous and uniform", k + 2)));
        }
    }
    if s0.abs() > 1e-9 * width {
        return Err(Error::Csv("first bin must start at 0".into()));
    }
    DecayHistogram::new(width, rows.into_iter().map(|r| r.2).collect(), 0)
}

/// `offset_shots, delay_us, coincidences, pairs_available, g2, g2_sigma,
/// g2_corrected`, with the correction evaluated at signal fraction `rho`.
pub fn write_correlation_csv<W: Write>(w: W, hist: &CorrelationHistogram, rho: f64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "offset_shots",
        "delay_us",
        "coincidences",
        "pairs_available",
        "g2",
        "g2_sigma",
        "g2_corrected",
    ])?;
    for d in hist.offsets() {
        let g = hist.g2(d);
        let corrected = if g.is_nan() { f64::NAN } else { background_corrected_g2(g, rho)? };
        out.write_record([
            d.to_string(),
            num(hist.delay(d) * 1e6),
            hist.coincidences(d).to_string(),
            hist.pairs_available(d).to_string(),
            num(g),
            num(hist.g2_sigma(d)),
            num(corrected),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row of a correlation export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRow {
    pub offset: i64,
    pub g2: f64,
    pub g2_sigma: f64,
    pub g2_corrected: f64,
}

pub fn read_correlation_csv<R: Read>(r: R) -> Result<Vec<CorrelationRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let idx = |n| header_index(&headers, n);
    let (oi, gi, si, ci) = (idx("offset_shots")?, idx("g2")?, idx("g2_sigma")?, idx("g2_corrected")?);
    let mut rows = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = n + 2;
        let offset = row
            .get(oi)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Csv(format!("row {line}: bad offset")))?;
        rows.push(CorrelationRow {
            offset,
            g2: field(&row, gi, line)?,
            g2_sigma: field(&row, si, line)?,
            g2_corrected: field(&row, ci, line)?,
        });
    }
    Ok(rows)
}

/// Fit results of one model, one row per labelled fit. Parameters occupy a
/// value column and a `_sigma` column each; sigma is empty when unknown.
pub fn write_fit_csv<W: Write>(w: W, fits: &[(String, FitResult)]) -> Result<()> {
    let Some((_, first)) = fits.first() else {
        return Err(Error::InsufficientData("no fit results to write".into()));
    };
    let names: Vec<(&str, &str)> = first
        .parameters
        .iter()
        .map(|p| (p.name.as_str(), p.unit.as_str()))
        .collect();
    let mut header = vec!["label".to_string(), "model".into(), "status".into(), "iterations".into(), "rss".into()];
    for &(n, u) in &names {
        header.push(with_unit(n, u));
        header.push(with_unit(&format!("{n}_sigma"), u));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header)?;
    for (label, f) in fits {
        let same = f.model == first.model
            && f.parameters.len() == names.len()
            && f.parameters.iter().zip(&names).all(|(p, &(n, u))| p.name == n && p.unit == u);
        if !same {
            return Err(Error::Csv(format!("fit `{label}` does not match the columns of the first fit")));
        }
        let mut row = vec![
            label.clone(),
            f.model.name().to_string(),
            f.status.name().to_string(),
            f.iterations.to_string(),
            num(f.rss),
        ];
        for p in &f.parameters {
            row.push(num(p.value));
            row.push(p.sigma.map(num).unwrap_or_default());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_fit_csv<R: Read>(r: R) -> Result<Vec<(String, FitResult)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let fixed = ["label", "model", "status", "iterations", "rss"];
    if headers.len() < fixed.len() || headers.iter().zip(fixed).any(|(h, f)| h != f) {
        return Err(Error::Csv(format!("fit table must start with columns {}", fixed.join(","))));
    }
    let rest: Vec<&str> = headers.iter().skip(fixed.len()).collect();
    if rest.len() % 2 != 0 {
        return Err(Error::Csv("parameter columns must come in value/sigma pairs".into()));
    }
    let mut params = Vec::new();
    for pair in rest.chunks(2) {
        let (name, unit) = match pair[1].split_once("_sigma") {
            Some((n, "")) => (n, "1"),
            Some((n, u)) if u.starts_with('_') => (n, &u[1..]),
            _ => return Err(Error::Csv(format!("expected a sigma column after `{}`", pair[0]))),
        };
        if with_unit(name, unit) != pair[0] {
            return Err(Error::Csv(format!("column `{}` does not match `{}`", pair[0], pair[1])));
        }
        params.push((name.to_string(), unit.to_string()));
    }
    let mut fits = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = n + 2;
        let text = |i: usize| row.get(i).unwrap_or("").trim();
        let model = FitModel::from_name(text(1))
            .ok_or_else(|| Error::Csv(format!("row {line}: unknown model `{}`", text(1))))?;
        let status = FitStatus::from_name(text(2))
            .ok_or_else(|| Error::Csv(format!("row {line}: unknown status `{}`", text(2))))?;
        let iterations = text(3)
            .parse()
            .map_err(|_| Error::Csv(format!("row {line}: bad iteration count")))?;
        let mut parameters = Vec::with_capacity(params.len());
        for (k, (name, unit)) in params.iter().enumerate() {
            let vi = fixed.len() + 2 * k;
            let sigma = if text(vi + 1).is_empty() { None } else { Some(field(&row, vi + 1, line)?) };
            parameters.push(FitParameter {
                name: name.clone(),
                value: field(&row, vi, line)?,
                sigma,
                unit: unit.clone(),
            });
        }
        fits.push((
            text(0).to_string(),
            FitResult {
                model,
                parameters,
                rss: field(&row, 4, line)?,
                iterations,
                status,
            },
        ));
    }
    Ok(fits)
}

/// Ordered key-value summary written as a flat TOML document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, toml::Value)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn number(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.entries.push((key.into(), toml::Value::Float(v)));
        self
    }

    pub fn integer(&mut self, key: impl Into<String>, v: i64) -> &mut Self {
        self.entries.push((key.into(), toml::Value::Integer(v)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.entries.push((key.into(), toml::Value::String(v.into())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&toml::Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, toml::Value)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Format(e.to_string()))?;
        // keep file order
        let mut entries = Vec::new();
        for line in text.lines() {
            if let Some((k, _)) = line.split_once('=') {
                let k = k.trim();
                if let Some(v) = table.get(k) {
                    entries.push((k.to_string(), v.clone()));
                }
            }
        }
        Ok(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fit_exponential, fit_lorentzian};

    #[test]
    fn spectrum_round_trip() {
        let s = Spectrum::new(vec![(1.0e14, 3.0), (1.0e14 + 1e6, 5.0)], 0.0, "x").unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s, 1.0e14).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("frequency_hz,detuning_mhz,wavelength_nm,counts\n"));
        let back = read_spectra_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].points(), s.points());
    }

    #[test]
    fn scans_split_by_scan_column() {
        let a = Spectrum::new(vec![(1.0, 1.0), (2.0, 2.0)], 0.0, "a").unwrap();
        let b = Spectrum::new(vec![(1.0, 4.0), (2.0, 5.0)], 30.0, "b").unwrap();
        let mut buf = Vec::new();
        write_scans_csv(&mut buf, &[a.clone(), b.clone()], 0.0).unwrap();
        let back = read_spectra_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].points(), b.points());
        assert_eq!(back[1].acquisition_time, 30.0);
    }

    #[test]
    fn histogram_round_trip() {
        let h = DecayHistogram::new(0.25e-6, vec![10.0, 5.0, 2.0, 1.0], 100).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &h).unwrap();
        let back = read_histogram_csv(&buf[..]).unwrap();
        assert_eq!(back.counts, h.counts);
        assert!((back.bin_width() - h.bin_width()).abs() < 1e-20);
    }

    #[test]
    fn fit_round_trip_keeps_missing_sigma() {
        let pts = (0..60)
            .map(|i| {
                let f = i as f64 * 1e8;
                let d = (f - 3e9) / 4.7e9;
                (f, 100.0 - 60.0 / (1.0 + 4.0 * d * d))
            })
            .collect();
        let lor = fit_lorentzian(&Spectrum::new(pts, 0.0, "dip").unwrap()).unwrap();
        let mut buf = Vec::new();
        write_fit_csv(&mut buf, &[("dip".into(), lor.clone())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("fwhm_hz,fwhm_sigma_hz"));
        assert!(text.contains("q_factor,q_factor_sigma"));
        let back = read_fit_csv(&buf[..]).unwrap();
        assert_eq!(back[0].1, lor);

        let flat = DecayHistogram::new(1e-6, vec![3.0; 10], 10).unwrap();
        let degenerate = fit_exponential(&flat).unwrap();
        let mut buf = Vec::new();
        write_fit_csv(&mut buf, &[("flat".into(), degenerate.clone())]).unwrap();
        let back = read_fit_csv(&buf[..]).unwrap();
        assert_eq!(back[0].1.status, degenerate.status);
        assert_eq!(back[0].1.sigma("t1"), None);
        assert_eq!(back[0].1.value("t1"), f64::INFINITY);
    }

    #[test]
    fn summary_render_and_parse() {
        let mut s = Summary::new();
        s.number("purcell_factor", 459.9).text("model", "exponential").integer("n", 3);
        let text = s.render();
        assert_eq!(text, "purcell_factor = 459.9\nmodel = \"exponential\"\nn = 3\n");
        assert_eq!(Summary::parse(&text).unwrap(), s);
    }
}
