//! The four reference parameter sweeps: CSV, gnuplot data files and run metadata.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::{run_sweep, write_csv, Engines, Series, SweepRow, SweepSpec, SweepVar};
use super::Preset;
use crate::error::{Error, Result};
use crate::geometry::RangeBucket;
use crate::montecarlo::{TrialProtocol, DEFAULT_TRIALS};
use crate::scenario::{QuadratureSettings, Scenario};

pub const FIGURE_IDS: [u8; 4] = [4, 5, 6, 7];

/// Thresholds (dB) of the threshold series.
pub const THETA_SERIES: [f64; 5] = [7.0, 10.0, 11.0, 13.0, 14.0];

/// P_C values (W) of the CA power series.
pub const PC_SERIES: [f64; 4] = [15.0, 40.0, 73.0, 140.0];

/// UAV transmit power assumed for the UAV-density sweep, whose source value is not recoverable.
pub const FIG5_PU_W: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridDensity {
    /// Five points per curve.
    Coarse,
    /// Dense curves for plotting.
    #[default]
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    pub grid: GridDensity,
    pub trials: u64,
    /// Engines to run; `None` picks both under the self-consistent preset and the analytic
    /// engine alone under the paper-literal one.
    pub engines: Option<Engines>,
    pub quadrature: QuadratureSettings<f64>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            grid: GridDensity::Full,
            trials: DEFAULT_TRIALS,
            engines: None,
            quadrature: QuadratureSettings::default(),
        }
    }
}

fn grid(id: u8, density: GridDensity) -> Vec<f64> {
    use GridDensity::*;
    match (id, density) {
        (4, Coarse) => vec![1.0, 16.0, 30.0, 50.0, 70.0],
        (4, Full) => std::iter::once(1.0)
            .chain((4..=70).step_by(3).map(f64::from))
            .collect(),
        (5, Coarse) => vec![1.0, 10.0, 30.0, 60.0, 100.0],
        (5, Full) => std::iter::once(1.0)
            .chain((5..=100).step_by(5).map(f64::from))
            .collect(),
        (6, Coarse) => vec![2.0, 3.0, 3.5, 4.5, 5.0],
        (6, Full) => (0..=12).map(|i| 2.0 + 0.25 * f64::from(i)).collect(),
        (7, Coarse) => vec![1.0, 15.0, 24.0, 40.0, 70.0],
        (7, Full) => vec![
            1.0, 5.0, 10.0, 15.0, 20.0, 24.0, 30.0, 40.0, 50.0, 60.0, 70.0,
        ],
        _ => unreachable!("figure ids are checked by the caller"),
    }
}

/// Base scenario of a figure: the tabulated defaults with its fixed parameters, under `preset`.
pub fn figure_base(id: u8, preset: Preset) -> Result<Scenario<f64>> {
    let mut s = Scenario::baseline();
    let set = |s: &mut Scenario<f64>, var: SweepVar, v: f64| var.apply(s, preset, v);
    Preset::apply(preset, &mut s)?;
    match id {
        4 => {
            set(&mut s, SweepVar::Pc, 30.0)?;
            set(&mut s, SweepVar::Alpha, 2.0)?;
            set(&mut s, SweepVar::Lambda1, 30.0)?;
        }
        5 => {
            set(&mut s, SweepVar::Pu, FIG5_PU_W)?;
            set(&mut s, SweepVar::Pc, 30.0)?;
            set(&mut s, SweepVar::Alpha, 2.0)?;
        }
        6 => {
            set(&mut s, SweepVar::Pu, 25.0)?;
            set(&mut s, SweepVar::Pc, 30.0)?;
            set(&mut s, SweepVar::Lambda1, 30.0)?;
        }
        7 => {
            set(&mut s, SweepVar::Theta, 7.0)?;
            set(&mut s, SweepVar::Alpha, 2.0)?;
            set(&mut s, SweepVar::Lambda1, 30.0)?;
        }
        other => return Err(unknown(other)),
    }
    Ok(s)
}

fn unknown(id: u8) -> Error {
    Error::Validation {
        field: "id".into(),
        constraint: format!("figure {id} is not one of 4, 5, 6, 7"),
    }
}

/// Sweep reproducing figure `id`.
pub fn figure_spec(id: u8, preset: Preset, options: &FigureOptions) -> Result<SweepSpec> {
    if !FIGURE_IDS.contains(&id) {
        return Err(unknown(id));
    }
    let base = figure_base(id, preset)?;
    let (variable, series) = match id {
        4 => (SweepVar::Pu, (SweepVar::Theta, THETA_SERIES.to_vec())),
        5 => (SweepVar::Lambda1, (SweepVar::Theta, THETA_SERIES.to_vec())),
        6 => (SweepVar::Alpha, (SweepVar::Theta, THETA_SERIES.to_vec())),
        _ => (SweepVar::Pu, (SweepVar::Pc, PC_SERIES.to_vec())),
    };
    let mut spec = SweepSpec::new(
        format!("fig{id}"),
        variable,
        grid(id, options.grid),
        base,
        preset,
    );
    spec.series = Some(Series {
        variable: series.0,
        values: series.1,
    });
    spec.quadrature = options.quadrature;
    spec.protocol = TrialProtocol::Population;
    spec.trials = options.trials;
    spec.engines = options.engines.unwrap_or(match preset {
        Preset::SelfConsistent => Engines::Both,
        Preset::PaperLiteral => Engines::Analytic,
    });
    spec.buckets = match id {
        4 => RangeBucket::ALL.to_vec(),
        _ => vec![RangeBucket::Short],
    };
    if id == 5 {
        spec.notes.push(format!(
            "P_U={FIG5_PU_W} W assumed (source value uncertain)"
        ));
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSummary {
    pub id: u8,
    pub preset: Preset,
    pub csv: PathBuf,
    pub plot_files: Vec<PathBuf>,
    pub metadata: PathBuf,
    pub rows: Vec<SweepRow>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    figure: u8,
    preset: Preset,
    seed: u64,
    trials_per_point: u64,
    engines: Engines,
    x_name: &'a str,
    grid: &'a [f64],
    series_name: &'a str,
    series: &'a [f64],
    buckets: Vec<&'static str>,
    fixed: BTreeMap<&'static str, f64>,
    notes: Vec<String>,
    generated_unix_s: u64,
    version: &'static str,
}

/// Writes `fig<id>_<preset>.csv`, one `.dat` plot file per (series value, bucket) and a
/// `.meta.json` record into `outdir`.
///
/// The CSV and plot files depend only on the inputs; the wall-clock time goes to the metadata.
pub fn reproduce_figure(
    id: u8,
    preset: Preset,
    outdir: impl AsRef<Path>,
    seed: u64,
    options: &FigureOptions,
) -> Result<FigureSummary> {
    let spec = figure_spec(id, preset, options)?;
    let rows = run_sweep(&spec, seed)?;
    let outdir = outdir.as_ref();
    std::fs::create_dir_all(outdir)?;
    let stem = format!("fig{id}_{preset}");

    let csv = outdir.join(format!("{stem}.csv"));
    write_csv(&rows, std::io::BufWriter::new(std::fs::File::create(&csv)?))?;

    let series = spec.series.as_ref().expect("figures always have a series");
    let mut plot_files = Vec::new();
    for &v in &series.values {
        for &b in &spec.buckets {
            let path = outdir.join(format!("{stem}_{}{v}_{b}.dat", series.variable));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(
                f,
                "# {} {}={v} bucket={b} preset={preset}",
                spec.id, series.variable
            )?;
            writeln!(f, "# {} p_analytic p_mc ci_low ci_high", spec.variable)?;
            let nan = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), |x| x.to_string());
            for r in rows
                .iter()
                .filter(|r| r.series_value == Some(v) && r.bucket == Some(b))
            {
                writeln!(
                    f,
                    "{} {} {} {} {}",
                    r.x_value,
                    nan(r.p_analytic),
                    nan(r.p_mc),
                    nan(r.ci_low),
                    nan(r.ci_high)
                )?;
            }
            f.flush()?;
            plot_files.push(path);
        }
    }

    let s = &spec.base;
    let mut fixed = BTreeMap::new();
    fixed.insert("p_u_w", s.uav_radio.tx_power_w());
    fixed.insert("p_c_w", s.ca_radio.tx_power_w());
    fixed.insert("alpha", s.channel.alpha);
    fixed.insert("theta_db", s.theta_db);
    fixed.insert(
        "lambda1_count",
        s.lambda_uav.expected_count(s.space.volume()),
    );
    fixed.insert("lambda_pdf_per_km3", s.lambda_pdf.value());
    fixed.retain(|k, _| *k != var_key(spec.variable) && *k != var_key(series.variable));
    let mut notes = spec.notes.clone();
    notes.extend(preset.provenance().map(str::to_string));
    notes.push("trials counts target evaluations per bucket; population draws per point = trials_per_point".into());
    let meta = Metadata {
        figure: id,
        preset,
        seed,
        trials_per_point: spec.trials,
        engines: spec.engines,
        x_name: spec.variable.name(),
        grid: &spec.grid,
        series_name: series.variable.name(),
        series: &series.values,
        buckets: spec.buckets.iter().map(|b| b.name()).collect(),
        fixed,
        notes,
        generated_unix_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        version: env!("CARGO_PKG_VERSION"),
    };
    let metadata = outdir.join(format!("{stem}.meta.json"));
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&metadata, text + "\n")?;

    Ok(FigureSummary {
        id,
        preset,
        csv,
        plot_files,
        metadata,
        rows,
    })
}

fn var_key(v: SweepVar) -> &'static str {
    match v {
        SweepVar::Pu => "p_u_w",
        SweepVar::Pc => "p_c_w",
        SweepVar::Lambda1 => "lambda1_count",
        SweepVar::Alpha => "alpha",
        SweepVar::Theta => "theta_db",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_figure_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for id in [0u8, 3, 8] {
            let err = reproduce_figure(
                id,
                Preset::SelfConsistent,
                dir.path(),
                1,
                &FigureOptions::default(),
            );
            assert!(matches!(err, Err(Error::Validation { .. })));
        }
    }

    #[test]
    fn grids_contain_the_anchor_points() {
        for d in [GridDensity::Coarse, GridDensity::Full] {
            assert!(grid(4, d).contains(&16.0));
            assert!(grid(5, d).contains(&30.0));
            assert!(grid(6, d).contains(&3.0) && grid(6, d).contains(&4.5));
            assert!(grid(7, d).contains(&15.0) && grid(7, d).contains(&24.0));
            for id in FIGURE_IDS {
                assert!(grid(id, d).windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(grid(4, GridDensity::Full).last(), Some(&70.0));
        assert_eq!(grid(6, GridDensity::Full).last(), Some(&5.0));
    }

    #[test]
    fn fixed_parameters() {
        let s = figure_base(6, Preset::SelfConsistent).unwrap();
        assert_eq!(s.uav_radio.tx_power_w(), 25.0);
        assert_eq!(s.lambda_uav.value(), 0.0075);
        let s = figure_base(5, Preset::PaperLiteral).unwrap();
        assert_eq!(s.lambda_pdf.value(), 30.0);
        let spec = figure_spec(7, Preset::PaperLiteral, &FigureOptions::default()).unwrap();
        assert_eq!(spec.engines, Engines::Analytic);
        assert_eq!(spec.buckets, vec![RangeBucket::Short]);
    }

    #[test]
    fn writes_csv_plot_files_and_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let options = FigureOptions {
            grid: GridDensity::Coarse,
            ..FigureOptions::default()
        };
        let out = reproduce_figure(7, Preset::PaperLiteral, dir.path(), 1, &options).unwrap();
        assert_eq!(out.rows.len(), 5 * 4);
        assert_eq!(out.plot_files.len(), 4);
        let back = super::super::read_csv(std::fs::File::open(&out.csv).unwrap()).unwrap();
        assert_eq!(back, out.rows);
        let dat = std::fs::read_to_string(&out.plot_files[0]).unwrap();
        assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 5);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out.metadata).unwrap()).unwrap();
        assert_eq!(meta["figure"], 7);
        assert_eq!(meta["preset"], "paper-literal");
    }
}
