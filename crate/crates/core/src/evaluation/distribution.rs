use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::rank::LabeledCode;
use crate::error::{Error, Result};
use crate::matching::semi_correlation_codes;

pub const HISTOGRAM_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Intra,
    Inter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub kind: PairKind,
    pub i: usize,
    pub j: usize,
    pub d_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub intra: usize,
    pub inter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub pairs: Vec<PairDistance>,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

fn moments(v: impl Iterator<Item = f64>) -> Moments {
    let v: Vec<f64> = v.collect();
    let n = v.len();
    if n == 0 {
        return Moments { count: 0, mean: 0.0, std: 0.0 };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Moments { count: n, mean, std: var.sqrt() }
}

impl Distribution {
    pub fn intra(&self) -> Moments {
        moments(self.pairs.iter().filter(|p| p.kind == PairKind::Intra).map(|p| p.d_min))
    }

    pub fn inter(&self) -> Moments {
        moments(self.pairs.iter().filter(|p| p.kind == PairKind::Inter).map(|p| p.d_min))
    }

    /// Threshold minimising the summed false-accept and false-reject counts
    /// over the bin edges (equal-error style crossover).
    pub fn crossover(&self) -> f64 {
        let (ni, ne) = (self.intra().count, self.inter().count);
        let mut best = (f64::INFINITY, 0.0);
        let (mut intra_below, mut inter_below) = (0usize, 0usize);
        for b in &self.bins {
            intra_below += b.intra;
            inter_below += b.inter;
            let frr = 1.0 - intra_below as f64 / ni.max(1) as f64;
            let far = inter_below as f64 / ne.max(1) as f64;
            if frr + far < best.0 {
                best = (frr + far, b.hi);
            }
        }
        best.1
    }

    pub fn write_pairs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for p in &self.pairs {
            wtr.serialize(p)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_histogram_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for b in &self.bins {
            wtr.serialize(b)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn read_histogram_csv<R: Read>(r: R) -> Result<Vec<HistogramBin>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_pairs_csv<R: Read>(r: R) -> Result<Vec<PairDistance>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Histogram with `HISTOGRAM_BINS` equal bins over `[0, max]`; the last bin
/// is closed. With `max = 0` everything lands in bin 0.
pub fn histogram(pairs: &[PairDistance]) -> Vec<HistogramBin> {
    let max = pairs.iter().map(|p| p.d_min).fold(0.0, f64::max);
    let width = if max > 0.0 { max / HISTOGRAM_BINS as f64 } else { 0.0 };
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|k| HistogramBin {
            lo: k as f64 * width,
            hi: (k + 1) as f64 * width,
            intra: 0,
            inter: 0,
        })
        .collect();
    for p in pairs {
        let k = if width > 0.0 {
            ((p.d_min / width) as usize).min(HISTOGRAM_BINS - 1)
        } else {
            0
        };
        match p.kind {
            PairKind::Intra => bins[k].intra += 1,
            PairKind::Inter => bins[k].inter += 1,
        }
    }
    bins
}

/// All pairwise distances between encoded samples. Two samples are in the
/// same class when subject and eye flag agree; samples that failed to
/// encode are skipped.
pub fn distribution_from_codes(samples: &[LabeledCode], max_shift: usize) -> Result<Distribution> {
    let classes = samples
        .iter()
        .filter(|s| s.code.is_some())
        .map(|s| (&s.subject, s.eye))
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    if classes < 2 {
        return Err(Error::TooFewSubjects { have: classes, need: 2 });
    }
    let mut pairs = Vec::new();
    for i in 0..samples.len() {
        let Some(a) = &samples[i].code else { continue };
        for j in i + 1..samples.len() {
            let Some(b) = &samples[j].code else { continue };
            let same = samples[i].subject == samples[j].subject && samples[i].eye == samples[j].eye;
            pairs.push(PairDistance {
                kind: if same { PairKind::Intra } else { PairKind::Inter },
                i,
                j,
                d_min: semi_correlation_codes(a, b, max_shift)?.d_min,
            });
        }
    }
    let bins = histogram(&pairs);
    Ok(Distribution { pairs, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureCode;

    fn sample(subject: &str, levels: Vec<u8>) -> LabeledCode {
        LabeledCode {
            id: subject.into(),
            subject: subject.into(),
            eye: None,
            code: Some(FeatureCode::new(levels, 4).unwrap()),
        }
    }

    #[test]
    fn identical_subject_templates() {
        let s = vec![
            sample("a", vec![0, 1, 2, 3]),
            sample("a", vec![0, 1, 2, 3]),
            sample("b", vec![3, 3, 0, 0]),
            sample("b", vec![3, 3, 0, 0]),
        ];
        let d = distribution_from_codes(&s, 0).unwrap();
        assert_eq!(d.intra().count, 2);
        assert_eq!(d.inter().count, 4);
        assert_eq!(d.bins[0].intra, 2);
        assert_eq!(d.bins.iter().map(|b| b.intra + b.inter).sum::<usize>(), 6);
    }

    #[test]
    fn csv_round_trip() {
        let s = vec![
            sample("a", vec![0, 1, 2, 3]),
            sample("a", vec![0, 1, 2, 2]),
            sample("b", vec![3, 3, 0, 0]),
        ];
        let d = distribution_from_codes(&s, 1).unwrap();
        let mut buf = Vec::new();
        d.write_histogram_csv(&mut buf).unwrap();
        assert_eq!(read_histogram_csv(buf.as_slice()).unwrap(), d.bins);
        let mut buf = Vec::new();
        d.write_pairs_csv(&mut buf).unwrap();
        assert_eq!(read_pairs_csv(buf.as_slice()).unwrap(), d.pairs);
    }

    #[test]
    fn single_class_rejected() {
        let s = vec![sample("a", vec![0; 4]), sample("a", vec![1; 4])];
        assert!(distribution_from_codes(&s, 0).is_err());
    }
}
