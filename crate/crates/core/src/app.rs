//! Command implementations behind the `nssar` binary.

use crate::analysis::Metrics;
use crate::analytic::{optimize_config, OptimizeOutcome, SearchSpace, SweepPreset};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiment::{analyze_stream, calibrate, median, monte_carlo, signal_frequency, simulate, SimulationOutcome};
use crate::units::fmt_value;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Calibrate,
    Analyze,
    MonteCarlo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Analyze => "analyze",
            Command::MonteCarlo => "montecarlo",
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandReport {
    /// One-line summary for the terminal.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    header: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
        Ok(Self { dir: &cfg.out, header: cfg.header(seed), files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = String::with_capacity(self.header.len() + body.len());
        text.push_str(&self.header);
        text.push_str(body);
        std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<CommandReport> {
    cfg.validate()?;
    match cmd {
        Command::Simulate => cmd_simulate(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Analyze => cmd_analyze(cfg),
        Command::MonteCarlo => cmd_montecarlo(cfg),
    }
}

fn metrics_text(m: Option<&Metrics>, o: &SimulationOutcome) -> String {
    let mut s = m.map(Metrics::to_kv).unwrap_or_default();
    if let Some(d) = &o.decimated {
        s.push_str(&format!("decimated_sndr_db = {}\n", fmt_value(d.sndr_db, 4)));
    }
    s.push_str(&format!("in_band_dbfs = {}\n", fmt_value(o.in_band_dbfs, 4)));
    s.push_str(&format!("signal_freq_hz = {}\n", fmt_value(o.signal_freq, 6)));
    s.push_str(&format!("power_w = {:.4e}\n", o.power_w));
    s.push_str(&format!("overload_count = {}\n", o.run.overload_count));
    s.push_str(&format!("saturation_count = {}\n", o.run.saturation_count));
    if let Some(c) = &o.calibration {
        s.push_str(&format!("residual_mismatch_std = {:e}\n", c.residual_std));
    }
    s
}

fn summary_line(cmd: &str, o: &SimulationOutcome) -> String {
    match &o.metrics {
        Some(m) => format!(
            "{cmd}: sndr_db={} sfdr_db={} enob_bits={} fom_s_db={} decimated_sndr_db={}",
            fmt_value(m.sndr_db, 2),
            fmt_value(m.sfdr_db, 2),
            fmt_value(m.enob_bits, 2),
            m.fom_s_db.map_or("n/a".into(), |f| fmt_value(f, 2)),
            o.decimated.as_ref().map_or("n/a".into(), |d| fmt_value(d.sndr_db, 2)),
        ),
        None => format!("{cmd}: in_band_dbfs={}", fmt_value(o.in_band_dbfs, 2)),
    }
}

fn write_trial(w: &mut Writer<'_>, cfg: &RunConfig, o: &SimulationOutcome) -> Result<()> {
    w.write("spectrum.csv", &o.spectrum.to_csv())?;
    w.write("metrics.txt", &metrics_text(o.metrics.as_ref(), o))?;
    w.write("codes.txt", &o.run.codes_text())?;
    w.write("trims.csv", &o.trims.to_csv())?;
    if cfg.sim.trace {
        if let Some(d) = &o.run.diagnostics {
            let body: String = d.iter().map(|r| r.to_record() + "\n").collect();
            w.write("diagnostics.txt", &body)?;
        }
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig) -> Result<CommandReport> {
    let o = simulate(cfg, cfg.seed)?;
    let mut w = Writer::new(cfg, cfg.seed)?;
    write_trial(&mut w, cfg, &o)?;
    Ok(CommandReport { summary: summary_line("simulate", &o), files: w.files })
}

fn cmd_montecarlo(cfg: &RunConfig) -> Result<CommandReport> {
    let trials = monte_carlo(cfg, cfg.trials)?;
    let mut w = Writer::new(cfg, cfg.seed)?;
    write_trial(&mut w, cfg, &trials[0])?;
    let mut csv = String::from("trial,seed,sndr_db,sfdr_db,enob_bits,decimated_sndr_db,residual_mismatch_std\n");
    let na = || "nan".to_string();
    for (i, o) in trials.iter().enumerate() {
        let m = o.metrics.as_ref();
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            o.seed,
            m.map_or_else(na, |m| fmt_value(m.sndr_db, 4)),
            m.map_or_else(na, |m| fmt_value(m.sfdr_db, 4)),
            m.map_or_else(na, |m| fmt_value(m.enob_bits, 4)),
            o.decimated.as_ref().map_or_else(na, |d| fmt_value(d.sndr_db, 4)),
            o.calibration.as_ref().map_or_else(na, |c| format!("{:e}", c.residual_std)),
        ));
    }
    w.write("montecarlo.csv", &csv)?;
    let sndrs: Vec<f64> = trials.iter().filter_map(|o| o.metrics.as_ref().map(|m| m.sndr_db)).collect();
    let summary = if sndrs.is_empty() {
        format!("montecarlo: trials={}", trials.len())
    } else {
        let min = sndrs.iter().copied().fold(f64::INFINITY, f64::min);
        format!(
            "montecarlo: trials={} median_sndr_db={} min_sndr_db={}",
            trials.len(),
            fmt_value(median(&sndrs), 2),
            fmt_value(min, 2)
        )
    };
    Ok(CommandReport { summary, files: w.files })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<CommandReport> {
    let mut w = Writer::new(cfg, cfg.seed)?;
    let presets: Vec<SweepPreset> = match cfg.sweep.preset {
        Some(p) => vec![p],
        None => SweepPreset::ALL.to_vec(),
    };
    let mut names = Vec::new();
    for p in presets {
        let curve = p.run(&cfg.design)?;
        w.write(&format!("sweep_{}.csv", p.name()), &curve.to_csv())?;
        names.push(p.name());
    }
    let mut summary = format!("sweep: presets={}", names.join(","));
    if cfg.sweep.optimize {
        let outcome = optimize_config(&cfg.design, &SearchSpace::default_grid(), &cfg.power_model, cfg.sweep.target_bits)?;
        let mut csv = String::from(
            "rank,c_total_f,osr,ns_order,settle_tau,msb_bits,cal_bits,mes_order,sndr_db,enob_bits,power_w,fom_s_db\n",
        );
        match &outcome {
            OptimizeOutcome::NoFeasibleConfiguration => {
                csv.push_str("# no feasible configuration\n");
                summary.push_str(" optimum=none");
            }
            OptimizeOutcome::Ranked(c) => {
                for (i, c) in c.iter().take(cfg.sweep.top).enumerate() {
                    let p = &c.params;
                    csv.push_str(&format!(
                        "{},{:e},{},{},{},{},{},{},{:.4},{:.4},{:.4e},{:.4}\n",
                        i + 1,
                        p.c_total,
                        p.osr,
                        p.ns_order,
                        p.settle_tau,
                        p.msb_bits,
                        p.cal_bits,
                        p.mes_order,
                        c.budget.sndr_db,
                        c.budget.enob_bits,
                        c.power_w,
                        c.fom_db
                    ));
                }
                summary.push_str(&format!(" best_fom_s_db={:.2}", c[0].fom_db));
            }
        }
        w.write("optimize.csv", &csv)?;
    }
    Ok(CommandReport { summary, files: w.files })
}

fn cmd_calibrate(cfg: &RunConfig) -> Result<CommandReport> {
    let r = calibrate(cfg, cfg.seed)?;
    let mut w = Writer::new(cfg, cfg.seed)?;
    w.write("trims.csv", &r.trims.to_csv())?;
    let mut body = format!(
        "initial_std = {:e}\nresidual_std = {:e}\neffective_bits = {}\ntrim_step = {:e}\ncycles = {}\nmeasurements = {}\n",
        r.initial_std,
        r.residual_std,
        fmt_value(r.effective_bits, 4),
        r.trims.step(),
        cfg.cal.cycles,
        r.cycles_used
    );
    for (i, s) in r.std_trace.iter().enumerate() {
        body.push_str(&format!("std_after_{} = {:e}\n", (i as u64 + 1) * crate::calibration::TRACE_EVERY, s));
    }
    w.write("calibration.txt", &body)?;
    Ok(CommandReport {
        summary: format!(
            "calibrate: initial_std={:.3e} residual_std={:.3e} effective_bits={}",
            r.initial_std,
            r.residual_std,
            fmt_value(r.effective_bits, 2)
        ),
        files: w.files,
    })
}

/// Reads newline-delimited integer codes; `#` lines are skipped.
pub fn read_codes(path: &Path) -> Result<Vec<i64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().map_err(|_| Error::Io(format!("{}: bad code `{l}`", path.display()))))
        .collect()
}

fn cmd_analyze(cfg: &RunConfig) -> Result<CommandReport> {
    let path = cfg
        .analysis
        .input
        .as_ref()
        .ok_or_else(|| Error::config("analysis.input", "required by analyze"))?;
    let codes = read_codes(path)?;
    if codes.len() < 2 {
        return Err(Error::Analysis(format!("{}: need at least 2 codes", path.display())));
    }
    let mut c = cfg.clone();
    if c.analysis.n_fft.is_none() {
        c.analysis.n_fft = Some(1 << codes.len().ilog2());
        c.sim.n_samples = codes.len();
    }
    let lsb = c.design.vdd / (1u64 << c.design.sar_bits) as f64;
    let volts: Vec<f64> = codes.iter().map(|&k| k as f64 * lsb).collect();
    let f = signal_frequency(&c);
    let (spectrum, metrics, decimated, in_band) = analyze_stream(&c, &volts, Some(f))?;
    let mut w = Writer::new(cfg, cfg.seed)?;
    w.write("spectrum.csv", &spectrum.to_csv())?;
    let mut body = metrics.as_ref().map(Metrics::to_kv).unwrap_or_default();
    if let Some(d) = &decimated {
        body.push_str(&format!("decimated_sndr_db = {}\n", fmt_value(d.sndr_db, 4)));
    }
    body.push_str(&format!("in_band_dbfs = {}\n", fmt_value(in_band, 4)));
    w.write("metrics.txt", &body)?;
    let m = metrics.expect("signal frequency supplied");
    Ok(CommandReport {
        summary: format!(
            "analyze: sndr_db={} sfdr_db={} enob_bits={}",
            fmt_value(m.sndr_db, 2),
            fmt_value(m.sfdr_db, 2),
            fmt_value(m.enob_bits, 2)
        ),
        files: w.files,
    })
}
