//! Every-other-day time compression.
//!
//! The compressed horizon keeps the odd days of a 365-day year (1, 3, ...,
//! 365), so 183 days or 4392 hours. Operating costs are doubled to stand for
//! the skipped days, and hydro storage dynamics move twice the energy per
//! simulated hour. Batteries are assumed to cycle within a day and are left
//! alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::system::StorageKind;

pub const HOURS_PER_DAY: usize = 24;
pub const DAYS_PER_YEAR: usize = 365;
pub const HOURS_PER_YEAR: usize = HOURS_PER_DAY * DAYS_PER_YEAR;

const MONTH_DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
pub const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Compression {
    #[default]
    #[serde(rename = "full")]
    FullYear,
    #[serde(rename = "every-other-day")]
    EveryOtherDay,
}

impl Compression {
    pub fn as_str(self) -> &'static str {
        match self {
            Compression::FullYear => "full",
            Compression::EveryOtherDay => "every-other-day",
        }
    }
}

impl fmt::Display for Compression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Compression {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Compression::FullYear),
            "every-other-day" => Ok(Compression::EveryOtherDay),
            other => Err(format!("unknown compression `{other}` (expected `full` or `every-other-day`)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TimeGridError {
    #[error("series has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub compression: Compression,
    pub physical_hours: usize,
    pub simulated_hours: usize,
    /// Physical days (1-based) in simulation order.
    pub day_map: Vec<usize>,
    pub cost_scale: f64,
    /// Scale on hydro storage dynamics.
    pub storage_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageScaling {
    pub charge: f64,
    pub discharge: f64,
    pub inflow: f64,
    /// Applied to minimum, maximum and initial levels.
    pub bound: f64,
}

/// Day of the year (1-based) to month index 0..12.
pub fn month_of_day(day: usize) -> usize {
    let mut d = (day.max(1) - 1) % DAYS_PER_YEAR;
    for (m, len) in MONTH_DAYS.iter().enumerate() {
        if d < *len {
            return m;
        }
        d -= len;
    }
    11
}

pub fn build_time_grid(mode: Compression) -> TimeGrid {
    match mode {
        Compression::FullYear => TimeGrid {
            compression: mode,
            physical_hours: HOURS_PER_YEAR,
            simulated_hours: HOURS_PER_YEAR,
            day_map: (1..=DAYS_PER_YEAR).collect(),
            cost_scale: 1.0,
            storage_scale: 1.0,
        },
        Compression::EveryOtherDay => {
            let day_map: Vec<usize> = (1..=DAYS_PER_YEAR).step_by(2).collect();
            TimeGrid {
                compression: mode,
                physical_hours: HOURS_PER_YEAR,
                simulated_hours: day_map.len() * HOURS_PER_DAY,
                day_map,
                cost_scale: 2.0,
                storage_scale: 2.0,
            }
        }
    }
}

impl TimeGrid {
    /// Uncompressed grid over an arbitrary number of hours starting on
    /// January 1st; used for short study horizons.
    pub fn identity(hours: usize) -> Self {
        TimeGrid {
            compression: Compression::FullYear,
            physical_hours: hours,
            simulated_hours: hours,
            day_map: (1..=hours.div_ceil(HOURS_PER_DAY)).collect(),
            cost_scale: 1.0,
            storage_scale: 1.0,
        }
    }

    pub fn is_compressed(&self) -> bool {
        self.compression == Compression::EveryOtherDay
    }

    pub fn compress_series(&self, series: &[f64]) -> Result<Vec<f64>, TimeGridError> {
        if series.len() != self.physical_hours {
            return Err(TimeGridError::Length {
                expected: self.physical_hours,
                got: series.len(),
            });
        }
        if !self.is_compressed() {
            return Ok(series.to_vec());
        }
        let mut out = Vec::with_capacity(self.simulated_hours);
        for &day in &self.day_map {
            let start = (day - 1) * HOURS_PER_DAY;
            out.extend_from_slice(&series[start..start + HOURS_PER_DAY]);
        }
        Ok(out)
    }

    /// Copies each simulated day onto its physical day and onto the skipped
    /// day that follows it.
    pub fn embed_series(&self, series: &[f64]) -> Result<Vec<f64>, TimeGridError> {
        if series.len() != self.simulated_hours {
            return Err(TimeGridError::Length {
                expected: self.simulated_hours,
                got: series.len(),
            });
        }
        if !self.is_compressed() {
            return Ok(series.to_vec());
        }
        let mut out = vec![0.0; self.physical_hours];
        for (k, &day) in self.day_map.iter().enumerate() {
            let block = &series[k * HOURS_PER_DAY..(k + 1) * HOURS_PER_DAY];
            for d in [day, day + 1] {
                if d <= DAYS_PER_YEAR {
                    let start = (d - 1) * HOURS_PER_DAY;
                    out[start..start + HOURS_PER_DAY].copy_from_slice(block);
                }
            }
        }
        Ok(out)
    }

    pub fn storage_scaling(&self, kind: StorageKind) -> StorageScaling {
        if !self.is_compressed() || !kind.is_hydro() {
            return StorageScaling {
                charge: 1.0,
                discharge: 1.0,
                inflow: 1.0,
                bound: 1.0,
            };
        }
        let s = self.storage_scale;
        StorageScaling {
            charge: s,
            discharge: s,
            inflow: s,
            bound: if kind == StorageKind::PumpDaily { s } else { 1.0 },
        }
    }

    /// Physical day (1-based) of a simulated hour.
    pub fn physical_day(&self, hour: usize) -> usize {
        self.day_map[hour / HOURS_PER_DAY]
    }

    /// Calendar month (0..12) of a simulated hour.
    pub fn month_of_hour(&self, hour: usize) -> usize {
        month_of_day(self.physical_day(hour))
    }
}
