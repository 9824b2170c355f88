//! Writes the synthetic desk-scale datasets used by `configs/desk.toml`.
//!
//! Each file imitates the layout of one of the four published sources:
//! split date/time columns with `?` gaps, a single ISO column in watts, a
//! US-style date column in kW, and a half-hour period index with decimal
//! commas. The series themselves are synthetic (daily and weekly cycles plus
//! AR(1) noise) and fully determined by the seed.
//!
//! Usage: `cargo run -p loadcast-cli --example make_desk_data [OUT_DIR]`

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DAYS: i64 = 100;

struct Profile {
    level: f64,
    daily: f64,
    weekly: f64,
    noise: f64,
    peak_hour: f64,
}

fn generate(start: NaiveDateTime, step_min: i64, p: &Profile, rng: &mut ChaCha8Rng) -> Vec<(NaiveDateTime, f64)> {
    let n = DAYS * 24 * 60 / step_min;
    let mut ar = 0.0;
    (0..n)
        .map(|i| {
            let t = start + Duration::minutes(i * step_min);
            let hour = f64::from(t.hour()) + f64::from(t.minute()) / 60.0;
            let day = std::f64::consts::TAU * (hour - p.peak_hour) / 24.0;
            let weekend = matches!(t.weekday().num_days_from_monday(), 5 | 6);
            ar = 0.9 * ar + rng.random_range(-1.0..1.0) * p.noise;
            let v = p.level
                * (1.0 + p.daily * day.cos() + 0.3 * p.daily * (2.0 * day).cos()
                    - if weekend { p.weekly } else { 0.0 }
                    + ar);
            (t, v.max(0.01 * p.level))
        })
        .collect()
}

fn at(y: i32, m: u32, d: u32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/desk"));
    std::fs::create_dir_all(&out).expect("create output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);

    // Household: 15-minute rows, `;`-separated, d/m/Y date plus time, `?` gaps.
    let rows = generate(
        at(2009, 9, 1),
        15,
        &Profile { level: 1.1, daily: 0.45, weekly: -0.15, noise: 0.08, peak_hour: 20.0 },
        &mut rng,
    );
    let mut s = String::from("Date;Time;Global_active_power;Global_reactive_power;Voltage\n");
    for (i, (t, v)) in rows.iter().enumerate() {
        let date = format!("{}/{}/{}", t.day(), t.month(), t.year());
        let time = t.format("%H:%M:%S");
        if i % 997 == 500 {
            writeln!(s, "{date};{time};?;?;?").unwrap();
        } else {
            writeln!(s, "{date};{time};{v:.3};{:.3};{:.2}", 0.1 * v, 240.0 - v).unwrap();
        }
    }
    std::fs::write(out.join("household.txt"), s).unwrap();

    // Building: 10-minute rows in watts, ISO date-time, empty fields as gaps.
    let rows = generate(
        at(2019, 5, 1),
        10,
        &Profile { level: 42_000.0, daily: 0.35, weekly: 0.25, noise: 0.03, peak_hour: 14.0 },
        &mut rng,
    );
    let mut s = String::from("datetime,active_power_w\n");
    for (i, (t, v)) in rows.iter().enumerate() {
        let ts = t.format("%Y-%m-%d %H:%M:%S");
        if i % 1_499 == 700 {
            writeln!(s, "{ts},").unwrap();
        } else {
            writeln!(s, "{ts},{v:.1}").unwrap();
        }
    }
    std::fs::write(out.join("building.csv"), s).unwrap();

    // City zones: 10-minute rows in kW, m/d/Y H:M timestamps.
    let rows = generate(
        at(2017, 9, 1),
        10,
        &Profile { level: 31_000.0, daily: 0.3, weekly: 0.05, noise: 0.02, peak_hour: 20.5 },
        &mut rng,
    );
    let mut s = String::from("DateTime,Temperature,Zone 1 Power Consumption,Zone 2 Power Consumption\n");
    for (t, v) in &rows {
        writeln!(s, "{},{:.2},{v:.5},{:.5}", t.format("%-m/%-d/%Y %-H:%M"), 18.0 + v / 5000.0, 0.6 * v).unwrap();
    }
    std::fs::write(out.join("zones.csv"), s).unwrap();

    // National demand: half-hour periods 1..48, `;`-separated, decimal commas.
    let rows = generate(
        at(2010, 12, 1),
        30,
        &Profile { level: 5_400.0, daily: 0.15, weekly: 0.06, noise: 0.01, peak_hour: 15.0 },
        &mut rng,
    );
    let mut s = String::from("DATE;PERIOD;DEMAND (MW)\n");
    for (t, v) in &rows {
        let period = t.hour() * 2 + t.minute() / 30 + 1;
        let demand = format!("{v:.3}").replace('.', ",");
        writeln!(s, "{};{period};{demand}", t.format("%d-%b-%Y")).unwrap();
    }
    std::fs::write(out.join("national.csv"), s).unwrap();

    println!("wrote desk datasets to {}", out.display());
}
