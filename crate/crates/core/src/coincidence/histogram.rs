use serde::{Deserialize, Serialize};

use super::CoincidenceError;
use crate::csv::{fmt_sig, render};
use crate::geometry::ScanAxis;

/// Coincidence and singles counts binned along the D2 scan axis.
///
/// D1 has no spatial resolution; every bin's `singles_d1` is the total
/// number of D1 detections during the run, i.e. the trigger counts that
/// bin was exposed to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub scan: ScanAxis,
    pub coincidences: Vec<u64>,
    pub singles_d1: Vec<u64>,
    pub singles_d2: Vec<u64>,
    pub trials: u64,
}

impl CoincidenceHistogram {
    pub fn new(scan: ScanAxis) -> Self {
        let n = scan.bins;
        Self { scan, coincidences: vec![0; n], singles_d1: vec![0; n], singles_d2: vec![0; n], trials: 0 }
    }

    pub fn from_counts(
        scan: ScanAxis,
        coincidences: Vec<u64>,
        singles_d1: Vec<u64>,
        singles_d2: Vec<u64>,
        trials: u64,
    ) -> Result<Self, CoincidenceError> {
        let n = scan.bins;
        if coincidences.len() != n || singles_d1.len() != n || singles_d2.len() != n {
            return Err(CoincidenceError::ConfigInvalid(format!("histogram columns must all have {n} bins")));
        }
        Ok(Self { scan, coincidences, singles_d1, singles_d2, trials })
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.scan.centers()
    }

    pub fn total_coincidences(&self) -> u64 {
        self.coincidences.iter().sum()
    }

    /// Adds `other` bin by bin.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<(), CoincidenceError> {
        if self.scan != other.scan {
            return Err(CoincidenceError::ScanMismatch);
        }
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.coincidences, &other.coincidences);
        add(&mut self.singles_d1, &other.singles_d1);
        add(&mut self.singles_d2, &other.singles_d2);
        self.trials += other.trials;
        Ok(())
    }

    /// Checks `coincidences <= min(singles)` per bin and that coincidence
    /// and D2 totals do not exceed the number of trials.
    pub fn check_invariants(&self) -> Result<(), String> {
        for b in 0..self.scan.bins {
            let limit = self.singles_d1[b].min(self.singles_d2[b]);
            if self.coincidences[b] > limit {
                return Err(format!("bin {b}: {} coincidences exceed singles {limit}", self.coincidences[b]));
            }
        }
        let c = self.total_coincidences();
        let s2: u64 = self.singles_d2.iter().sum();
        if c > self.trials || s2 > self.trials {
            return Err(format!("totals {c} / {s2} exceed {} trials", self.trials));
        }
        Ok(())
    }

    /// CSV with columns `bin_center, coincidences, singles_d1, singles_d2`.
    pub fn to_csv(&self, metadata: &[(String, String)], digits: usize) -> String {
        let rows = (0..self.scan.bins).map(|b| {
            vec![
                fmt_sig(self.scan.center(b), digits),
                self.coincidences[b].to_string(),
                self.singles_d1[b].to_string(),
                self.singles_d2[b].to_string(),
            ]
        });
        render(metadata, &["bin_center", "coincidences", "singles_d1", "singles_d2"], rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan() -> ScanAxis {
        ScanAxis::symmetric(1.0, 3).unwrap()
    }

    #[test]
    fn merge_adds_and_checks_axes() {
        let mut a = CoincidenceHistogram::from_counts(scan(), vec![1, 0, 2], vec![3; 3], vec![1, 1, 2], 5).unwrap();
        let b = a.clone();
        a.merge(&b).unwrap();
        assert_eq!(a.coincidences, vec![2, 0, 4]);
        assert_eq!(a.trials, 10);
        assert!(a.check_invariants().is_ok());
        let other = CoincidenceHistogram::new(ScanAxis::symmetric(2.0, 3).unwrap());
        assert_eq!(a.merge(&other), Err(CoincidenceError::ScanMismatch));
    }

    #[test]
    fn invariant_violations_are_reported() {
        let h = CoincidenceHistogram::from_counts(scan(), vec![2, 0, 0], vec![3; 3], vec![1, 0, 0], 5).unwrap();
        assert!(h.check_invariants().is_err());
        let h = CoincidenceHistogram::from_counts(scan(), vec![0; 3], vec![0; 3], vec![4, 4, 4], 5).unwrap();
        assert!(h.check_invariants().is_err());
        assert!(CoincidenceHistogram::from_counts(scan(), vec![0; 2], vec![0; 3], vec![0; 3], 0).is_err());
    }

    #[test]
    fn csv_columns() {
        let h = CoincidenceHistogram::from_counts(scan(), vec![1, 0, 2], vec![3; 3], vec![1, 1, 2], 5).unwrap();
        let csv = h.to_csv(&[], 9);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("bin_center,coincidences,singles_d1,singles_d2"));
        assert_eq!(lines.next(), Some("-0.666666667,1,3,1"));
    }
}
