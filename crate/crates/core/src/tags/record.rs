use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Size of one binary tag record in bytes.
pub const RECORD_BYTES: usize = 16;

/// Ground-truth label bits carried in the `flags` field by the simulator.
pub mod flags {
    pub const DARK: u16 = 0x1;
    pub const IDLER: u16 = 0x2;
    pub const BACKGROUND: u16 = 0x4;
}

/// One detection: channel, pump-pulse ordinal and arrival time in ps after
/// that pulse's clock edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TagRecord {
    pub channel: u16,
    pub flags: u16,
    pub clock_index: u64,
    pub time_offset_ps: u64,
}

/// Run-level metadata stored in the sidecar header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamHeader {
    pub clock_period_ps: f64,
    pub run_duration_s: f64,
    pub n_pulses: u64,
    pub channel_names: Vec<String>,
}

impl StreamHeader {
    pub fn new(clock_period_ps: f64, n_pulses: u64, channel_names: Vec<String>) -> Result<Self> {
        if !(clock_period_ps.is_finite() && clock_period_ps >= 1.0) {
            return Err(Error::config("clock_period_ps", "must be at least 1 ps"));
        }
        Ok(Self {
            clock_period_ps,
            run_duration_s: n_pulses as f64 * clock_period_ps * 1e-12,
            n_pulses,
            channel_names,
        })
    }

    /// Integer-ps time of clock edge `k`.
    pub fn edge_ps(&self, k: u64) -> u64 {
        (k as f64 * self.clock_period_ps).round() as u64
    }

    /// Clock index and offset of an absolute time.
    pub fn split(&self, t: u64) -> (u64, u64) {
        let mut k = (t as f64 / self.clock_period_ps).floor() as u64;
        while k > 0 && self.edge_ps(k) > t {
            k -= 1;
        }
        while self.edge_ps(k + 1) <= t {
            k += 1;
        }
        (k, t - self.edge_ps(k))
    }
}

/// Time-ordered tag records with their header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TagStream {
    pub header: StreamHeader,
    pub records: Vec<TagRecord>,
}

impl TagStream {
    pub fn new(header: StreamHeader, records: Vec<TagRecord>) -> Result<Self> {
        let s = Self { header, records };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let period = self.header.clock_period_ps;
        let mut last: BTreeMap<u16, u64> = BTreeMap::new();
        for r in &self.records {
            if r.time_offset_ps as f64 >= period + 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "time offset {} ps exceeds clock period {period} ps",
                    r.time_offset_ps
                )));
            }
            let prev = last.entry(r.channel).or_insert(r.clock_index);
            if r.clock_index < *prev {
                return Err(Error::StreamAlignment(format!(
                    "clock index decreases on channel {}",
                    r.channel
                )));
            }
            *prev = r.clock_index;
        }
        Ok(())
    }

    pub fn absolute_time_ps(&self, r: &TagRecord) -> u64 {
        self.header.edge_ps(r.clock_index) + r.time_offset_ps
    }

    /// Absolute arrival times of one channel, in stream order.
    pub fn channel_times(&self, channel: u16) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| self.absolute_time_ps(r))
            .collect()
    }

    pub fn count_channel(&self, channel: u16) -> usize {
        self.records.iter().filter(|r| r.channel == channel).count()
    }

    /// Writes `<path>` (binary records) and `<path>.hdr` (key-value header).
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for r in &self.records {
            let mut buf = [0u8; RECORD_BYTES];
            buf[0..2].copy_from_slice(&r.channel.to_le_bytes());
            buf[2..4].copy_from_slice(&r.flags.to_le_bytes());
            buf[8..16].copy_from_slice(&self.absolute_time_ps(r).to_le_bytes());
            w.write_all(&buf).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        let hdr = header_path(path);
        fs::write(&hdr, self.header_text()).map_err(|e| Error::io(&hdr, e))
    }

    fn header_text(&self) -> String {
        let h = &self.header;
        format!(
            "clock_period_ps = {}\nrun_duration_s = {}\nn_pulses = {}\nchannels = {}\n",
            h.clock_period_ps,
            h.run_duration_s,
            h.n_pulses,
            h.channel_names.join(",")
        )
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let hdr_path = header_path(path);
        let text = fs::read_to_string(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
        let header = parse_header(&hdr_path, &text)?;
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        if bytes.len() % RECORD_BYTES != 0 {
            return Err(Error::format(
                path,
                format!("length {} is not a multiple of {RECORD_BYTES}", bytes.len()),
            ));
        }
        let mut records = Vec::with_capacity(bytes.len() / RECORD_BYTES);
        for chunk in bytes.chunks_exact(RECORD_BYTES) {
            let channel = u16::from_le_bytes([chunk[0], chunk[1]]);
            let flag_bits = u16::from_le_bytes([chunk[2], chunk[3]]);
            let t = u64::from_le_bytes(chunk[8..16].try_into().expect("8-byte slice"));
            let (clock_index, time_offset_ps) = header.split(t);
            records.push(TagRecord {
                channel,
                flags: flag_bits,
                clock_index,
                time_offset_ps,
            });
        }
        Self::new(header, records).map_err(|e| Error::format(path, e.to_string()))
    }

    /// CSV with columns channel, clock_index, time_offset_ps.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
        w.write_record(["channel", "clock_index", "time_offset_ps"])
            .map_err(|e| Error::format(path, e.to_string()))?;
        for r in &self.records {
            w.write_record([
                r.channel.to_string(),
                r.clock_index.to_string(),
                r.time_offset_ps.to_string(),
            ])
            .map_err(|e| Error::format(path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads the CSV form; the header comes from the sidecar when present,
    /// otherwise from `fallback`.
    pub fn read_csv(path: &Path, fallback: Option<StreamHeader>) -> Result<Self> {
        let hdr_path = header_path(path);
        let header = match fs::read_to_string(&hdr_path) {
            Ok(text) => parse_header(&hdr_path, &text)?,
            Err(_) => fallback.ok_or_else(|| Error::format(path, "no header sidecar and no fallback header"))?,
        };
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
        let mut records = Vec::new();
        for (line, row) in r.records().enumerate() {
            let row = row.map_err(|e| Error::format(path, e.to_string()))?;
            let field = |i: usize| -> Result<u64> {
                row.get(i)
                    .ok_or_else(|| Error::format(path, format!("row {}: missing column {i}", line + 2)))?
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| Error::format(path, format!("row {}: {e}", line + 2)))
            };
            let channel = u16::try_from(field(0)?)
                .map_err(|_| Error::format(path, format!("row {}: channel out of range", line + 2)))?;
            records.push(TagRecord {
                channel,
                flags: 0,
                clock_index: field(1)?,
                time_offset_ps: field(2)?,
            });
        }
        Self::new(header, records).map_err(|e| Error::format(path, e.to_string()))
    }
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn parse_header(path: &Path, text: &str) -> Result<StreamHeader> {
    let mut map = BTreeMap::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, format!("expected `key = value`, got `{line}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |key: &str| -> Result<f64> {
        map.get(key)
            .ok_or_else(|| Error::format(path, format!("missing `{key}`")))?
            .parse::<f64>()
            .map_err(|e| Error::format(path, format!("`{key}`: {e}")))
    };
    let period = num("clock_period_ps")?;
    let n_pulses = match map.get("n_pulses") {
        Some(v) => v
            .parse::<u64>()
            .map_err(|e| Error::format(path, format!("`n_pulses`: {e}")))?,
        None => (num("run_duration_s")? / (period * 1e-12)).round() as u64,
    };
    let names = map
        .get("channels")
        .map(|s| {
            s.split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let mut h = StreamHeader::new(period, n_pulses, names)?;
    if let Ok(d) = num("run_duration_s") {
        h.run_duration_s = d;
    }
    Ok(h)
}
