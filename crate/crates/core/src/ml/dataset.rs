use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attack::AttackKind;
use crate::grid::{FaultSpec, FaultType};

use super::features::{FeatureVector, CONTINUOUS_FEATURES, NUM_FEATURES};
use super::{MlError, NUM_CLASSES};

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Normal { load_scale: f64 },
    Fault(FaultSpec),
    /// The attack matched to a fault condition; `signature` is the fault
    /// the attack was generated from (after any adjustment).
    Attack { kind: AttackKind, bus: usize, bay: u8, signature: FaultSpec },
}

fn fault_fields(f: &FaultSpec) -> String {
    format!(
        "branch={};loc={};ohm={};type={}",
        f.branch,
        f.location,
        f.impedance_ohm,
        f.fault_type.class()
    )
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Normal { load_scale } => write!(f, "normal;scale={load_scale}"),
            Provenance::Fault(s) => write!(f, "fault;{}", fault_fields(s)),
            Provenance::Attack { kind, bus, bay, signature } => {
                write!(f, "attack;kind={kind};bus={bus};bay={bay};{}", fault_fields(signature))
            }
        }
    }
}

impl FromStr for Provenance {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MlError::Dataset(format!("bad provenance '{s}'"));
        let mut parts = s.split(';');
        let head = parts.next().ok_or_else(bad)?;
        let mut kv = std::collections::BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(bad)?;
            kv.insert(k, v);
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(bad);
        let num = |k: &str| get(k)?.parse::<f64>().map_err(|_| bad());
        let int = |k: &str| get(k)?.parse::<usize>().map_err(|_| bad());
        let fault = || -> Result<FaultSpec, MlError> {
            Ok(FaultSpec {
                branch: int("branch")?,
                location: num("loc")?,
                impedance_ohm: num("ohm")?,
                fault_type: FaultType::from_class(int("type")? as u8).map_err(|_| bad())?,
            })
        };
        match head {
            "normal" => Ok(Provenance::Normal { load_scale: num("scale")? }),
            "fault" => Ok(Provenance::Fault(fault()?)),
            "attack" => Ok(Provenance::Attack {
                kind: get("kind")?.parse().map_err(|_| bad())?,
                bus: int("bus")?,
                bay: int("bay")? as u8,
                signature: fault()?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: usize,
    pub provenance: Provenance,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, label: usize, provenance: Provenance) -> Result<LabeledSample, MlError> {
        let ok = match (&provenance, label) {
            (Provenance::Normal { .. }, 0) => true,
            (Provenance::Fault(f), l) => f.fault_type.class() as usize == l,
            (Provenance::Attack { .. }, 11) => true,
            _ => false,
        };
        if !ok {
            return Err(MlError::Dataset(format!("label {label} does not match provenance {provenance}")));
        }
        Ok(LabeledSample {
            features,
            label,
            provenance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub names: Vec<String>,
    pub samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(names: Vec<String>) -> Dataset {
        Dataset {
            names,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut c = [0; NUM_CLASSES];
        for s in &self.samples {
            c[s.label] += 1;
        }
        c
    }

    pub fn xy(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        (
            self.samples.iter().map(|s| s.features.values().to_vec()).collect(),
            self.samples.iter().map(|s| s.label).collect(),
        )
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MlError> {
        let err = |e: csv::Error| MlError::Dataset(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        header.push("label");
        header.push("provenance");
        wr.write_record(&header).map_err(err)?;
        let mut rec = Vec::with_capacity(NUM_FEATURES + 2);
        for s in &self.samples {
            rec.clear();
            rec.extend(s.features.values().iter().map(|v| v.to_string()));
            rec.push(s.label.to_string());
            rec.push(s.provenance.to_string());
            wr.write_record(&rec).map_err(err)?;
        }
        wr.flush().map_err(|e| MlError::Dataset(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Dataset, MlError> {
        let err = |e: csv::Error| MlError::Dataset(e.to_string());
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(err)?.clone();
        if header.len() != NUM_FEATURES + 2
            || &header[NUM_FEATURES] != "label"
            || &header[NUM_FEATURES + 1] != "provenance"
        {
            return Err(MlError::Dataset(format!(
                "schema mismatch: want {NUM_FEATURES} feature columns then label, provenance; got {} columns",
                header.len()
            )));
        }
        let names: Vec<String> = header.iter().take(NUM_FEATURES).map(str::to_string).collect();
        let mut ds = Dataset::new(names);
        for (row, rec) in rd.records().enumerate() {
            let rec = rec.map_err(err)?;
            let bad = |what: &str| MlError::Dataset(format!("row {}: bad {what}", row + 1));
            let values = rec
                .iter()
                .take(NUM_FEATURES)
                .map(|v| v.parse::<f64>().map_err(|_| bad("feature")))
                .collect::<Result<Vec<_>, _>>()?;
            let label: usize = rec[NUM_FEATURES].parse().map_err(|_| bad("label"))?;
            if label >= NUM_CLASSES {
                return Err(bad("label"));
            }
            let prov: Provenance = rec[NUM_FEATURES + 1].parse()?;
            ds.samples.push(LabeledSample::new(FeatureVector::new(values)?, label, prov)?);
        }
        Ok(ds)
    }
}

/// Per-class shuffled split; returns (train, test) indices with
/// `round(test_fraction * n_c)` test samples from each class.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..NUM_CLASSES {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        let k = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Z-score scaling of the continuous features; breaker features pass
/// through.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Standardizer, MlError> {
        if x.is_empty() {
            return Err(MlError::Empty);
        }
        let n = x.len() as f64;
        let mut mean = vec![0.0; CONTINUOUS_FEATURES];
        let mut std = vec![0.0; CONTINUOUS_FEATURES];
        for row in x {
            for j in 0..CONTINUOUS_FEATURES {
                mean[j] += row[j];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        for row in x {
            for j in 0..CONTINUOUS_FEATURES {
                std[j] += (row[j] - mean[j]).powi(2);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        for j in 0..self.mean.len().min(out.len()) {
            out[j] = (out[j] - self.mean[j]) / self.std[j];
        }
        out
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_round_trip() {
        let f = FaultSpec {
            branch: 14,
            location: 0.4,
            impedance_ohm: 0.01,
            fault_type: FaultType::BG,
        };
        for p in [
            Provenance::Normal { load_scale: 1.0375 },
            Provenance::Fault(f),
            Provenance::Attack {
                kind: AttackKind::FdiSv,
                bus: 8,
                bay: 2,
                signature: f,
            },
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
    }

    #[test]
    fn split_is_stratified() {
        let labels: Vec<usize> = (0..3523).map(|i| i % 12).collect();
        let (tr, te) = stratified_split(&labels, 0.1, 7);
        assert_eq!(tr.len() + te.len(), labels.len());
        for c in 0..12 {
            let n = labels.iter().filter(|&&l| l == c).count() as f64;
            let t = te.iter().filter(|&&i| labels[i] == c).count() as f64;
            assert!((t - 0.1 * n).abs() <= 1.0);
        }
        assert_eq!(stratified_split(&labels, 0.1, 7), (tr, te));
    }

    #[test]
    fn csv_round_trip() {
        let mut ds = Dataset::new((0..NUM_FEATURES).map(|i| format!("f{i}")).collect());
        let mut v = vec![0.1; NUM_FEATURES];
        v[3] = -1.0 / 3.0;
        ds.samples.push(
            LabeledSample::new(FeatureVector::new(v).unwrap(), 0, Provenance::Normal { load_scale: 0.95 }).unwrap(),
        );
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), ds);
        assert!(Dataset::read_csv(&b"a,b\n1,2\n"[..]).is_err());
    }

    #[test]
    fn standardizer_leaves_breakers() {
        let x = vec![vec![1.0; NUM_FEATURES], vec![3.0; NUM_FEATURES]];
        let s = Standardizer::fit(&x).unwrap();
        let t = s.transform(&x[1]);
        assert!((t[0] - 1.0).abs() < 1e-12);
        assert_eq!(t[CONTINUOUS_FEATURES], 3.0);
    }
}
