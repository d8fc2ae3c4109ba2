use super::spectrum::Spectrum;
use crate::analytic::fom_s;
use crate::error::{Error, Result};
use crate::units::{enob, fmt_value, power_ratio_db};

/// In-band performance figures of one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub sndr_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
    pub signal_bin: usize,
    pub signal_dbfs: f64,
    pub in_band_edge_hz: f64,
    pub fom_s_db: Option<f64>,
}

impl Metrics {
    /// Adds the Schreier figure of merit for `power_w` watts.
    pub fn with_power(mut self, power_w: f64) -> Result<Self> {
        self.fom_s_db = Some(fom_s(self.sndr_db, self.in_band_edge_hz, power_w)?);
        Ok(self)
    }

    /// `key = value` lines with fixed key names.
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "sndr_db = {}\nsfdr_db = {}\nenob_bits = {}\n",
            fmt_value(self.sndr_db, 4),
            fmt_value(self.sfdr_db, 4),
            fmt_value(self.enob_bits, 4)
        );
        if let Some(f) = self.fom_s_db {
            s.push_str(&format!("fom_s_db = {}\n", fmt_value(f, 4)));
        }
        s.push_str(&format!(
            "signal_dbfs = {}\nsignal_bin = {}\nin_band_edge_hz = {}\n",
            fmt_value(self.signal_dbfs, 4),
            self.signal_bin,
            fmt_value(self.in_band_edge_hz, 4)
        ));
        s
    }
}

/// Number of low bins treated as DC for the window.
fn dc_bins(sp: &Spectrum) -> usize {
    sp.window.guard_bins() + 1
}

/// SNDR, SFDR and ENOB in the band `0..=fs/(2·osr)`.
///
/// The signal occupies the strongest bin within one bin of `signal_freq`
/// plus the window's guard on each side. DC bins are excluded from the noise.
pub fn sndr(sp: &Spectrum, signal_freq: f64, osr: u32) -> Result<Metrics> {
    if osr == 0 {
        return Err(Error::Analysis("osr must be >= 1".into()));
    }
    let edge = sp.fs / (2.0 * osr as f64);
    if !(signal_freq > 0.0 && signal_freq <= edge) {
        return Err(Error::Analysis(format!(
            "signal {signal_freq} Hz outside band (0, {edge}] Hz"
        )));
    }
    let last = ((edge / sp.bin_width()).floor() as usize).min(sp.power.len() - 1);
    let dc = dc_bins(sp);
    let g = sp.window.guard_bins();
    let nominal = (signal_freq / sp.bin_width()).round() as usize;
    let ks = (nominal.saturating_sub(1)..=(nominal + 1).min(last))
        .max_by(|&a, &b| sp.power[a].total_cmp(&sp.power[b]))
        .unwrap_or(nominal);
    if ks < dc || ks > last {
        return Err(Error::Analysis(format!("signal bin {ks} not resolvable in band")));
    }
    let sig_lo = ks.saturating_sub(g).max(dc);
    let sig_hi = (ks + g).min(last);
    let signal: f64 = sp.power[sig_lo..=sig_hi].iter().sum();
    let in_noise = |k: usize| k >= dc && k <= last && !(sig_lo..=sig_hi).contains(&k);
    let noise: f64 = (dc..=last).filter(|&k| in_noise(k)).map(|k| sp.power[k]).sum();
    let spur_half = g.min(1);
    let spur = (dc..=last)
        .filter(|&k| in_noise(k))
        .map(|k| {
            (k.saturating_sub(spur_half)..=k + spur_half)
                .filter(|&j| in_noise(j))
                .map(|j| sp.power[j])
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let sndr_db = power_ratio_db(signal, noise);
    Ok(Metrics {
        sndr_db,
        sfdr_db: power_ratio_db(signal, spur),
        enob_bits: enob(sndr_db),
        signal_bin: ks,
        signal_dbfs: power_ratio_db(signal, 1.0),
        in_band_edge_hz: edge,
        fom_s_db: None,
    })
}

/// In-band power excluding DC bins, relative to full scale.
pub fn in_band_power(sp: &Spectrum, osr: u32) -> f64 {
    let edge = sp.fs / (2.0 * osr.max(1) as f64);
    let last = ((edge / sp.bin_width()).floor() as usize).min(sp.power.len() - 1);
    sp.power[dc_bins(sp)..=last].iter().sum()
}
