use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{mixture, two_ion_components, CountPmf, DetectionModel};
use crate::analysis::{ParityScan, SpinPopulations};
use crate::error::{Error, Result};
use crate::noise::{channel_rng, CHANNEL_READOUT, CHANNEL_REFERENCE};

/// Stream index used for the histogram taken without an analysis pulse.
const UNPULSED_STREAM: u64 = u64::MAX;

/// Occurrences per photon count, indexed by count.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub occurrences: Vec<u64>,
}

impl Histogram {
    pub fn from_counts(counts: impl IntoIterator<Item = usize>) -> Self {
        let mut h = Self::default();
        for c in counts {
            h.add(c, 1);
        }
        h
    }

    pub fn add(&mut self, count: usize, times: u64) {
        if count >= self.occurrences.len() {
            self.occurrences.resize(count + 1, 0);
        }
        self.occurrences[count] += times;
    }

    pub fn shots(&self) -> u64 {
        self.occurrences.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.shots() == 0
    }

    /// Largest count with nonzero occurrences.
    pub fn max_count(&self) -> Option<usize> {
        self.occurrences.iter().rposition(|&n| n > 0)
    }

    pub fn mean(&self) -> f64 {
        let n = self.shots() as f64;
        self.occurrences.iter().enumerate().map(|(k, &o)| k as f64 * o as f64).sum::<f64>() / n
    }

    /// (count, occurrences) pairs with nonzero occurrences.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.occurrences.iter().enumerate().filter(|(_, &o)| o > 0).map(|(k, &o)| (k, o))
    }
}

/// Draws `shots` counts from `pmf` by inverse-CDF sampling.
pub fn sample_histogram<R: Rng + ?Sized>(pmf: &CountPmf, shots: u64, rng: &mut R) -> Histogram {
    let cdf = pmf.cdf();
    let total = *cdf.last().expect("non-empty pmf");
    let mut h = Histogram { occurrences: vec![0; pmf.len()] };
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(pmf.len() - 1);
        h.occurrences[k] += 1;
    }
    let used = h.max_count().map_or(1, |m| m + 1);
    h.occurrences.truncate(used);
    h
}

/// Count histograms per analysis phase, plus optionally one taken without
/// the analysis pulse (for P↑↑ + P↓↓).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HistogramSet {
    pub phases: Vec<f64>,
    pub histograms: Vec<Histogram>,
    pub unpulsed: Option<Histogram>,
}

impl HistogramSet {
    pub fn validate(&self) -> Result<()> {
        if self.phases.len() != self.histograms.len() {
            return Err(Error::Format("one histogram per phase is required".into()));
        }
        if self.histograms.iter().chain(self.unpulsed.as_ref()).any(Histogram::is_empty) {
            return Err(Error::Format("histograms must contain at least one shot".into()));
        }
        Ok(())
    }

    /// Shots per phase point, if all histograms agree.
    pub fn shots(&self) -> Option<u64> {
        let mut it = self.histograms.iter().chain(self.unpulsed.as_ref()).map(Histogram::shots);
        let first = it.next()?;
        it.all(|s| s == first).then_some(first)
    }

    /// CSV `phi_a,count,occurrences`; the unpulsed histogram uses the phase
    /// label `none`. Zero-occurrence rows are omitted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi_a,count,occurrences")?;
        if let Some(h) = &self.unpulsed {
            for (k, n) in h.nonzero() {
                writeln!(w, "none,{k},{n}")?;
            }
        }
        for (phi, h) in self.phases.iter().zip(&self.histograms) {
            for (k, n) in h.nonzero() {
                writeln!(w, "{phi:.16e},{k},{n}")?;
            }
        }
        Ok(())
    }

    /// Reads the CSV written by [`HistogramSet::write_csv`]. Phases keep
    /// their order of first appearance.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut set = HistogramSet::default();
        let mut keys: Vec<u64> = Vec::new();
        for_each_record(r, "phi_a,count,occurrences", |line, label, count, occ| {
            if label == "none" {
                set.unpulsed.get_or_insert_with(Histogram::default).add(count, occ);
                return Ok(());
            }
            let phi: f64 = label.parse().map_err(|e| Error::Format(format!("histogram CSV line {line}: phase '{label}': {e}")))?;
            if !phi.is_finite() {
                return Err(Error::Format(format!("histogram CSV line {line}: non-finite phase")));
            }
            let idx = match keys.iter().position(|&k| k == phi.to_bits()) {
                Some(i) => i,
                None => {
                    keys.push(phi.to_bits());
                    set.phases.push(phi);
                    set.histograms.push(Histogram::default());
                    keys.len() - 1
                }
            };
            set.histograms[idx].add(count, occ);
            Ok(())
        })?;
        if set.phases.is_empty() && set.unpulsed.is_none() {
            return Err(Error::Format("histogram CSV has no data rows".into()));
        }
        set.validate()?;
        Ok(set)
    }
}

/// Parses `label,count,occurrences` records after checking the header.
pub(crate) fn for_each_record<R: BufRead>(
    r: R,
    header: &str,
    mut f: impl FnMut(usize, &str, usize, u64) -> Result<()>,
) -> Result<()> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
    if first.trim() != header {
        return Err(Error::Format(format!("expected header '{header}', found '{}'", first.trim())));
    }
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Format(format!("line {n}: expected 3 columns, found {}", cols.len())));
        }
        let count = cols[1].parse::<usize>().map_err(|e| Error::Format(format!("line {n}: count '{}': {e}", cols[1])))?;
        let occ = cols[2].parse::<u64>().map_err(|e| Error::Format(format!("line {n}: occurrences '{}': {e}", cols[2])))?;
        f(n, cols[0], count, occ)?;
    }
    Ok(())
}

/// Seeded histograms for every point of a parity scan; phase i draws from
/// its own random stream so points are independent of each other.
pub fn synthesize_histograms(model: &DetectionModel, scan: &ParityScan, shots: u64, seed: u64) -> Result<HistogramSet> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let comps = two_ion_components(model)?;
    let histograms = scan
        .populations
        .iter()
        .enumerate()
        .map(|(i, pops)| {
            pops.validate()?;
            Ok(sample_histogram(&mixture(&comps, pops), shots, &mut channel_rng(seed, CHANNEL_READOUT, i as u64)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HistogramSet { phases: scan.phases.clone(), histograms, unpulsed: None })
}

/// Seeded histogram of the state without an analysis pulse.
pub fn synthesize_unpulsed(model: &DetectionModel, pops: &SpinPopulations, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    pops.validate()?;
    let comps = two_ion_components(model)?;
    Ok(sample_histogram(&mixture(&comps, pops), shots, &mut channel_rng(seed, CHANNEL_READOUT, UNPULSED_STREAM)))
}

/// Two-ion calibration references: both ions bright and both ions dark.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub bright: Histogram,
    pub dark: Histogram,
}

impl CalibrationSet {
    /// CSV `label,count,occurrences` with labels `bright` and `dark`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label,count,occurrences")?;
        for (label, h) in [("bright", &self.bright), ("dark", &self.dark)] {
            for (k, n) in h.nonzero() {
                writeln!(w, "{label},{k},{n}")?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut set = Self::default();
        for_each_record(r, "label,count,occurrences", |line, label, count, occ| {
            match label {
                "bright" => set.bright.add(count, occ),
                "dark" => set.dark.add(count, occ),
                other => return Err(Error::Format(format!("calibration CSV line {line}: unknown label '{other}'"))),
            }
            Ok(())
        })?;
        Ok(set)
    }
}

/// Seeded reference histograms generated from a known model.
pub fn synthesize_references(model: &DetectionModel, shots: u64, seed: u64) -> Result<CalibrationSet> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let comps = two_ion_components(model)?;
    Ok(CalibrationSet {
        bright: sample_histogram(&comps[2], shots, &mut channel_rng(seed, CHANNEL_REFERENCE, 0)),
        dark: sample_histogram(&comps[0], shots, &mut channel_rng(seed, CHANNEL_REFERENCE, 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{bell_target, parity_scan, phase_grid};
    use crate::quantum::{DensityMatrix, HilbertLayout};

    fn bell_scan() -> ParityScan {
        let rho = DensityMatrix::pure(HilbertLayout::qubits(2).unwrap(), &bell_target()).unwrap();
        parity_scan(&rho, &phase_grid(21)).unwrap()
    }

    #[test]
    fn synthesis_is_seeded_and_sized() {
        let m = DetectionModel::default();
        let scan = bell_scan();
        let a = synthesize_histograms(&m, &scan, 200, 5).unwrap();
        let b = synthesize_histograms(&m, &scan, 200, 5).unwrap();
        let c = synthesize_histograms(&m, &scan, 200, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.shots(), Some(200));
        assert_eq!(a.histograms.len(), 21);
        assert!(synthesize_histograms(&m, &scan, 0, 5).is_err());
    }

    #[test]
    fn sample_mean_matches_pmf() {
        let m = DetectionModel::default();
        let pops = SpinPopulations::new(0.3, 0.3, 0.4).unwrap();
        let pmf = crate::readout::two_ion_mixture_pmf(&m, &pops).unwrap();
        let n = 20_000;
        let h = synthesize_unpulsed(&m, &pops, n, 11).unwrap();
        let se = (pmf.variance() / n as f64).sqrt();
        assert!((h.mean() - pmf.mean()).abs() < 5.0 * se, "{} vs {} ± {se}", h.mean(), pmf.mean());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = DetectionModel::default();
        let mut set = synthesize_histograms(&m, &bell_scan(), 50, 1).unwrap();
        set.unpulsed = Some(synthesize_unpulsed(&m, &SpinPopulations::new(0.5, 0.0, 0.5).unwrap(), 50, 1).unwrap());
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = HistogramSet::read_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.phases.iter().map(|p| p.to_bits()).collect::<Vec<_>>(), set.phases.iter().map(|p| p.to_bits()).collect::<Vec<_>>());
        for (a, b) in back.histograms.iter().zip(&set.histograms) {
            assert_eq!(a.nonzero().collect::<Vec<_>>(), b.nonzero().collect::<Vec<_>>());
        }
        assert_eq!(back.unpulsed.unwrap().nonzero().collect::<Vec<_>>(), set.unpulsed.unwrap().nonzero().collect::<Vec<_>>());

        let refs = synthesize_references(&m, 100, 3).unwrap();
        let mut buf = Vec::new();
        refs.write_csv(&mut buf).unwrap();
        let back = CalibrationSet::read_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.bright.shots(), 100);
        assert_eq!(back.dark.nonzero().collect::<Vec<_>>(), refs.dark.nonzero().collect::<Vec<_>>());
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let bad = [
            "",
            "phi,count,occurrences\n0,1,1\n",
            "phi_a,count,occurrences\n0.0,1\n",
            "phi_a,count,occurrences\n0.0,-1,1\n",
            "phi_a,count,occurrences\nabc,1,1\n",
            "phi_a,count,occurrences\n",
        ];
        for text in bad {
            assert!(matches!(HistogramSet::read_csv(std::io::Cursor::new(text)), Err(Error::Format(_))), "{text:?}");
        }
        let bad_label = "label,count,occurrences\ngrey,1,1\n";
        assert!(matches!(CalibrationSet::read_csv(std::io::Cursor::new(bad_label)), Err(Error::Format(_))));
    }
}
