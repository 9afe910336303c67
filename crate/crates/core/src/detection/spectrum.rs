//! Spectrum-analyzer emulation.
//!
//! The record is cut into non-overlapping rectangular segments of
//! `L = sample_rate / rbw` samples, so each FFT bin has an equivalent noise
//! bandwidth of exactly `rbw`. The video filter averages `W = ⌈rbw/vbw⌉`
//! successive segment spectra; one sweep is one such block and the trace is
//! the mean over all complete sweeps. Traces are normalised to the record's
//! shot-noise reference, so vacuum reads 0 dB.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::DetectionRecord;
use crate::error::{Error, Result};
use crate::table::Table;

/// Ceiling on reported SNR. FFT rounding leaves a relative floor near
/// 1e-28, so higher readings only arise from noiseless tones.
pub const SNR_CAP_DB: f64 = 200.0;
/// Lowest level a trace reports, in dB.
const FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub frequencies: Vec<f64>,
    /// Power relative to shot noise.
    pub power_db: Vec<f64>,
    /// One-sided power spectral density in (shot-noise units)²/Hz.
    pub linear_psd: Vec<f64>,
    pub rbw: f64,
    pub vbw: Option<f64>,
    /// Sweeps averaged (segments, without a video filter).
    pub n_averages: usize,
}

impl SpectrumTrace {
    pub fn bin_width(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            self.rbw
        }
    }

    /// Indices of bins with frequency in `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> Vec<usize> {
        let tol = 1e-9 * self.bin_width();
        (0..self.frequencies.len())
            .filter(|&k| self.frequencies[k] >= lo - tol && self.frequencies[k] <= hi + tol)
            .collect()
    }

    pub fn mean_db_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let band = self.band(lo, hi);
        if band.is_empty() {
            return None;
        }
        Some(band.iter().map(|&k| self.power_db[k]).sum::<f64>() / band.len() as f64)
    }

    /// (min, max) of `power_db` in `[lo, hi]`.
    pub fn range_db_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let band = self.band(lo, hi);
        let vals = band.iter().map(|&k| self.power_db[k]);
        let min = vals.clone().fold(f64::INFINITY, f64::min);
        let max = vals.fold(f64::NEG_INFINITY, f64::max);
        (!band.is_empty()).then_some((min, max))
    }

    pub fn linear(&self, k: usize) -> f64 {
        10f64.powf(self.power_db[k] / 10.0)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["frequency_hz", "power_db", "psd_per_hz"])
            .with_meta("units", "frequency in Hz, power in dB re shot noise, PSD in (shot-noise units)^2/Hz")
            .with_meta("rbw_hz", self.rbw)
            .with_meta(
                "vbw_hz",
                self.vbw.map_or_else(|| "off".to_string(), |v| v.to_string()),
            )
            .with_meta("n_averages", self.n_averages);
        t.rows = (0..self.frequencies.len())
            .map(|k| vec![self.frequencies[k], self.power_db[k], self.linear_psd[k]])
            .collect();
        t
    }
}

fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

/// Segment length for `rbw`; it must divide the sample rate.
pub fn segment_length(sample_rate: f64, rbw: f64) -> Result<usize> {
    if !(rbw > 0.0 && rbw.is_finite()) {
        return Err(Error::invalid(format!("rbw must be positive, got {rbw}")));
    }
    let l = sample_rate / rbw;
    let rounded = l.round();
    if (l - rounded).abs() > 1e-9 * l || rounded < 2.0 {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} Hz is not an integer multiple (>= 2) of rbw {rbw} Hz"
        )));
    }
    Ok(rounded as usize)
}

fn video_window(rbw: f64, vbw: Option<f64>) -> Result<Option<usize>> {
    match vbw {
        None => Ok(None),
        Some(v) if v > 0.0 && v.is_finite() => Ok(Some(((rbw / v) - 1e-9).ceil().max(1.0) as usize)),
        Some(v) => Err(Error::invalid(format!("vbw must be positive, got {v}"))),
    }
}

struct Layout {
    len: usize,
    /// Segments entering the average.
    used: usize,
    n_averages: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Layout {
    fn new(n_samples: usize, sample_rate: f64, rbw: f64, vbw: Option<f64>) -> Result<Self> {
        let len = segment_length(sample_rate, rbw)?;
        if n_samples < len {
            return Err(Error::InsufficientSamples {
                needed: len,
                available: n_samples,
            });
        }
        let n_seg = n_samples / len;
        let (used, n_averages) = match video_window(rbw, vbw)? {
            None => (n_seg, n_seg),
            Some(w) if n_seg >= w => (n_seg / w * w, n_seg / w),
            Some(_) => (n_seg, 1),
        };
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(Self {
            len,
            used,
            n_averages,
            fft,
        })
    }

    fn n_bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// One-sided scale turning |X_k|² into power per bin relative to `reference`.
    fn scale(&self, k: usize, reference: f64) -> f64 {
        let one_sided = if k == 0 || (self.len % 2 == 0 && k == self.len / 2) {
            1.0
        } else {
            2.0
        };
        one_sided / (2.0 * self.len as f64 * reference)
    }

    fn for_each_segment(&self, samples: &[f64], mut f: impl FnMut(usize, &[Complex64])) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for s in 0..self.used {
            let seg = &samples[s * self.len..(s + 1) * self.len];
            for (b, &x) in buf.iter_mut().zip(seg) {
                *b = Complex64::new(x, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            f(s, &buf[..self.n_bins()]);
        }
    }
}

/// Averaged analyzer trace of `record`. `vbw = None` disables the video
/// filter and averages every segment.
pub fn power_spectrum(record: &DetectionRecord, rbw: f64, vbw: Option<f64>) -> Result<SpectrumTrace> {
    if !(record.shot_noise_reference > 0.0) {
        return Err(Error::invalid("shot-noise reference must be positive"));
    }
    let layout = Layout::new(record.samples.len(), record.sample_rate, rbw, vbw)?;
    let mut acc = vec![0.0; layout.n_bins()];
    layout.for_each_segment(&record.samples, |_, x| {
        for (a, v) in acc.iter_mut().zip(x) {
            *a += v.norm_sqr();
        }
    });
    let fs = record.sample_rate;
    let df = fs / layout.len as f64;
    let normalized: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| a / layout.used as f64 * layout.scale(k, record.shot_noise_reference))
        .collect();
    Ok(SpectrumTrace {
        frequencies: (0..layout.n_bins()).map(|k| k as f64 * df).collect(),
        power_db: normalized.iter().map(|&p| to_db(p)).collect(),
        linear_psd: normalized
            .iter()
            .map(|&p| p * 2.0 * record.shot_noise_reference / fs)
            .collect(),
        rbw,
        vbw,
        n_averages: layout.n_averages,
    })
}

/// Swept-analyzer trace over `[f_start, f_stop]`: the bin at sweep fraction
/// `u` is read from the video window of segments centred at fraction `u` of
/// the record, so a slow change in the noise maps onto the frequency axis.
pub fn swept_spectrum(
    record: &DetectionRecord,
    rbw: f64,
    vbw: f64,
    f_start: f64,
    f_stop: f64,
) -> Result<SpectrumTrace> {
    let layout = Layout::new(record.samples.len(), record.sample_rate, rbw, None)?;
    let w = video_window(rbw, Some(vbw))?.unwrap_or(1);
    let n_seg = layout.used;
    if n_seg < w {
        return Err(Error::InsufficientSamples {
            needed: w * layout.len,
            available: record.samples.len(),
        });
    }
    let df = record.sample_rate / layout.len as f64;
    let bins: Vec<usize> = (0..layout.n_bins())
        .filter(|&k| {
            let f = k as f64 * df;
            f >= f_start - 1e-9 * df && f <= f_stop + 1e-9 * df
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::OutOfRange(format!(
            "no analyzer bins in [{f_start}, {f_stop}] Hz"
        )));
    }
    let mut power = vec![0.0; n_seg * bins.len()];
    layout.for_each_segment(&record.samples, |s, x| {
        for (j, &k) in bins.iter().enumerate() {
            power[s * bins.len() + j] = x[k].norm_sqr();
        }
    });
    let nb = bins.len();
    let normalized: Vec<f64> = (0..nb)
        .map(|j| {
            let centre = ((j as f64 + 0.5) / nb as f64 * n_seg as f64) as usize;
            let start = centre.saturating_sub(w / 2).min(n_seg - w);
            let sum: f64 = (start..start + w).map(|s| power[s * nb + j]).sum();
            sum / w as f64 * layout.scale(bins[j], record.shot_noise_reference)
        })
        .collect();
    Ok(SpectrumTrace {
        frequencies: bins.iter().map(|&k| k as f64 * df).collect(),
        power_db: normalized.iter().map(|&p| to_db(p)).collect(),
        linear_psd: normalized
            .iter()
            .map(|&p| p * 2.0 * record.shot_noise_reference / record.sample_rate)
            .collect(),
        rbw,
        vbw: Some(vbw),
        n_averages: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReading {
    /// Frequency of the bin containing `f0`.
    pub frequency: f64,
    /// Peak power relative to shot noise (linear).
    pub peak: f64,
    /// Median noise power over the band (linear).
    pub floor: f64,
    /// `peak / floor`, i.e. (S+N)/N.
    pub ratio: f64,
    /// `ratio` in dB, at most [`SNR_CAP_DB`].
    pub ratio_db: f64,
}

impl SnrReading {
    /// Passes the "peak 3 dB above the floor" detection criterion.
    pub fn detected(&self) -> bool {
        self.ratio >= 2.0
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn nearest_bin(frequencies: &[f64], f0: f64) -> Result<usize> {
    let (first, last) = match (frequencies.first(), frequencies.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::OutOfRange("empty trace".into())),
    };
    let half = if frequencies.len() > 1 {
        0.5 * (frequencies[1] - frequencies[0])
    } else {
        0.0
    };
    if !(f0 >= first - half && f0 <= last + half) {
        return Err(Error::OutOfRange(format!(
            "f0 = {f0} Hz lies outside the trace [{first}, {last}] Hz"
        )));
    }
    Ok((0..frequencies.len())
        .min_by(|&a, &b| {
            (frequencies[a] - f0)
                .abs()
                .total_cmp(&(frequencies[b] - f0).abs())
        })
        .expect("non-empty"))
}

/// Peak in the bin containing `f0` over the median of `noise_band`
/// (the `f0` bin itself excluded), capped at [`SNR_CAP_DB`].
pub fn snr_at(trace: &SpectrumTrace, f0: f64, noise_band: (f64, f64)) -> Result<SnrReading> {
    let k0 = nearest_bin(&trace.frequencies, f0)?;
    let noise: Vec<f64> = trace
        .band(noise_band.0, noise_band.1)
        .into_iter()
        .filter(|&k| k != k0)
        .map(|k| trace.linear(k))
        .collect();
    if noise.is_empty() {
        return Err(Error::invalid(format!(
            "noise band [{}, {}] Hz holds no bins besides f0",
            noise_band.0, noise_band.1
        )));
    }
    let peak = trace.linear(k0);
    let floor = median(noise);
    Ok(reading(trace.frequencies[k0], peak, floor))
}

fn reading(frequency: f64, peak: f64, floor: f64) -> SnrReading {
    let ratio = if floor > 0.0 { peak / floor } else { f64::INFINITY };
    let ratio_db = if ratio.is_finite() {
        (10.0 * ratio.log10()).min(SNR_CAP_DB)
    } else {
        SNR_CAP_DB
    };
    SnrReading {
        frequency,
        peak,
        floor,
        ratio,
        ratio_db,
    }
}

/// Complex segment spectra of a record at a few bins, for re-evaluating an
/// analyzer reading as a tone is scaled without regenerating noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpectra {
    pub bins: Vec<usize>,
    pub frequencies: Vec<f64>,
    n_segments: usize,
    data: Vec<Complex64>,
    scale: Vec<f64>,
}

impl SegmentSpectra {
    /// Spectra at the `f0` bin and every bin in `band`.
    pub fn new(
        samples: &[f64],
        sample_rate: f64,
        reference: f64,
        rbw: f64,
        vbw: Option<f64>,
        f0: f64,
        band: (f64, f64),
    ) -> Result<Self> {
        if !(reference > 0.0) {
            return Err(Error::invalid("shot-noise reference must be positive"));
        }
        let layout = Layout::new(samples.len(), sample_rate, rbw, vbw)?;
        let df = sample_rate / layout.len as f64;
        let all: Vec<f64> = (0..layout.n_bins()).map(|k| k as f64 * df).collect();
        let k0 = nearest_bin(&all, f0)?;
        let mut bins = vec![k0];
        bins.extend(
            (0..layout.n_bins())
                .filter(|&k| k != k0 && all[k] >= band.0 - 1e-9 * df && all[k] <= band.1 + 1e-9 * df),
        );
        if bins.len() < 2 {
            return Err(Error::invalid("noise band holds no bins besides f0"));
        }
        let nb = bins.len();
        let mut data = vec![Complex64::new(0.0, 0.0); layout.used * nb];
        layout.for_each_segment(samples, |s, x| {
            for (j, &k) in bins.iter().enumerate() {
                data[s * nb + j] = x[k];
            }
        });
        Ok(Self {
            frequencies: bins.iter().map(|&k| all[k]).collect(),
            scale: bins.iter().map(|&k| layout.scale(k, reference)).collect(),
            bins,
            n_segments: layout.used,
            data,
        })
    }

    /// Reading of `self + depth·tone`; both must share a layout.
    pub fn snr_with(&self, tone: &SegmentSpectra, depth: f64) -> Result<SnrReading> {
        if tone.bins != self.bins || tone.n_segments != self.n_segments {
            return Err(Error::invalid("segment spectra have different layouts"));
        }
        let nb = self.bins.len();
        let mut acc = vec![0.0; nb];
        for (i, (n, t)) in self.data.iter().zip(&tone.data).enumerate() {
            acc[i % nb] += (n + t * depth).norm_sqr();
        }
        let power: Vec<f64> = acc
            .iter()
            .zip(&self.scale)
            .map(|(a, s)| a / self.n_segments as f64 * s)
            .collect();
        Ok(reading(self.frequencies[0], power[0], median(power[1..].to_vec())))
    }
}
