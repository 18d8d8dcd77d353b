//! On-disk formats.
//!
//! Matrices are headerless row-major CSV with `%.17g` formatting (17
//! significant digits, trailing zeros stripped, C-style exponent), which
//! round-trips doubles exactly. Observation batches and dictionary ensembles
//! serialize to directories with a `meta.json` carrying the parameters and
//! seed; all writers are byte-deterministic for fixed inputs.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoefficientModel, DictionaryMatrix, NoiseModel, NonzeroLaw, ObservationBatch};
use crate::packing::{DictionaryEnsemble, EnsembleCertificate};
use crate::real::{real, Real};

/// Formats a double like C's `printf("%.17g", x)`: up to 17 significant
/// digits, fixed or scientific notation chosen by the decimal exponent,
/// trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }

    let formatted = format!("{:.16e}", x.abs());
    let (mantissa, exp_str) = formatted
        .split_once('e')
        .expect("scientific format always has an exponent");
    let exp: i32 = exp_str.parse().expect("exponent is an integer");
    let mut digits: Vec<u8> = mantissa
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .collect();
    while digits.len() > 1 && digits.last() == Some(&b'0') {
        digits.pop();
    }
    let digits = String::from_utf8(digits).expect("ascii digits");

    let sign = if x < 0.0 { "-" } else { "" };
    if exp < -4 || exp >= 17 {
        let mantissa_out = if digits.len() == 1 {
            digits
        } else {
            format!("{}.{}", &digits[..1], &digits[1..])
        };
        let exp_sign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{mantissa_out}e{exp_sign}{:02}", exp.abs())
    } else if exp >= 0 {
        let point = (exp + 1) as usize;
        if digits.len() <= point {
            format!("{sign}{digits}{}", "0".repeat(point - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..point], &digits[point..])
        }
    } else {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    }
}

/// Writes a matrix as headerless comma-separated rows.
pub fn write_matrix_csv<T: Real>(path: &Path, matrix: &ArrayView2<'_, T>) -> Result<()> {
    let mut out = String::new();
    for row in matrix.rows() {
        let mut first = true;
        for &v in row.iter() {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_g17(v.to_f64().unwrap_or(f64::NAN)));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a headerless CSV matrix, inferring the shape; all rows must have
/// the same number of fields.
pub fn read_matrix_csv<T: Real>(path: &Path) -> Result<Array2<T>> {
    let text = fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let rows = lines.len();
    let cols = if rows == 0 {
        0
    } else if lines[0].is_empty() {
        0
    } else {
        lines[0].split(',').count()
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = if line.is_empty() {
            Vec::new()
        } else {
            line.split(',').collect()
        };
        if fields.len() != cols {
            return Err(Error::Parse(format!(
                "{}: row {i} has {} fields, expected {cols}",
                path.display(),
                fields.len()
            )));
        }
        for field in fields {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{}: bad number {field:?}: {e}", path.display())))?;
            data.push(real::<T>(v));
        }
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Serializable description of a coefficient model (`meta.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelDescriptor {
    SparseUniform {
        dim: usize,
        sparsity: usize,
        law: LawDescriptor,
    },
    GeneralCovariance {
        covariance: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LawDescriptor {
    Rademacher,
    Gaussian { sigma_a2: f64 },
}

impl ModelDescriptor {
    pub fn from_model<T: Real>(model: &CoefficientModel<T>) -> Self {
        match model {
            CoefficientModel::SparseUniform { dim, sparsity, law } => {
                ModelDescriptor::SparseUniform {
                    dim: *dim,
                    sparsity: *sparsity,
                    law: match law {
                        NonzeroLaw::Rademacher => LawDescriptor::Rademacher,
                        NonzeroLaw::Gaussian { variance } => LawDescriptor::Gaussian {
                            sigma_a2: variance.to_f64().unwrap_or(f64::NAN),
                        },
                    },
                }
            }
            CoefficientModel::GeneralCovariance { covariance } => {
                ModelDescriptor::GeneralCovariance {
                    covariance: covariance
                        .rows()
                        .into_iter()
                        .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
                        .collect(),
                }
            }
        }
    }

    pub fn to_model<T: Real>(&self) -> Result<CoefficientModel<T>> {
        match self {
            ModelDescriptor::SparseUniform { dim, sparsity, law } => {
                CoefficientModel::sparse_uniform(
                    *dim,
                    *sparsity,
                    match law {
                        LawDescriptor::Rademacher => NonzeroLaw::Rademacher,
                        LawDescriptor::Gaussian { sigma_a2 } => NonzeroLaw::Gaussian {
                            variance: real::<T>(*sigma_a2),
                        },
                    },
                )
            }
            ModelDescriptor::GeneralCovariance { covariance } => {
                let p = covariance.len();
                let mut arr = Array2::<T>::zeros((p, p));
                for (i, row) in covariance.iter().enumerate() {
                    if row.len() != p {
                        return Err(Error::Parse("ragged covariance".into()));
                    }
                    for (j, &v) in row.iter().enumerate() {
                        arr[[i, j]] = real::<T>(v);
                    }
                }
                CoefficientModel::general(arr)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub s: Option<usize>,
    pub sigma2: f64,
    pub seed: u64,
    pub dict_index: Option<usize>,
    pub model: ModelDescriptor,
}

/// Writes `Y.csv`, optional `X.csv` and `supports.json`, and `meta.json`
/// into `dir` (created if missing).
pub fn write_batch_dir<T: Real>(
    dir: &Path,
    batch: &ObservationBatch<T>,
    model: &CoefficientModel<T>,
    noise: &NoiseModel<T>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("Y.csv"), &batch.observations.view())?;
    if let Some(x) = &batch.coefficients {
        write_matrix_csv(&dir.join("X.csv"), &x.view())?;
    }
    if let Some(supports) = &batch.supports {
        fs::write(
            dir.join("supports.json"),
            serde_json::to_string_pretty(supports)?,
        )?;
    }
    let meta = BatchMeta {
        m: batch.signal_dim(),
        p: model.dim(),
        n: batch.num_samples(),
        s: model.sparsity(),
        sigma2: noise.variance().to_f64().unwrap_or(f64::NAN),
        seed: batch.seed,
        dict_index: batch.dict_index,
        model: ModelDescriptor::from_model(model),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads a batch directory back.
pub fn read_batch_dir<T: Real>(
    dir: &Path,
) -> Result<(ObservationBatch<T>, CoefficientModel<T>, NoiseModel<T>)> {
    let meta: BatchMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let observations = read_matrix_csv::<T>(&dir.join("Y.csv"))?;
    if observations.dim() != (meta.m, meta.n) {
        return Err(Error::Parse(format!(
            "Y.csv is {:?}, meta says ({}, {})",
            observations.dim(),
            meta.m,
            meta.n
        )));
    }
    let x_path = dir.join("X.csv");
    let coefficients = if x_path.exists() {
        Some(read_matrix_csv::<T>(&x_path)?)
    } else {
        None
    };
    let supports_path = dir.join("supports.json");
    let supports = if supports_path.exists() {
        Some(serde_json::from_str(&fs::read_to_string(supports_path)?)?)
    } else {
        None
    };
    let model = meta.model.to_model::<T>()?;
    let noise = NoiseModel::new(real::<T>(meta.sigma2))?;
    Ok((
        ObservationBatch {
            observations,
            coefficients,
            supports,
            dict_index: meta.dict_index,
            seed: meta.seed,
        },
        model,
        noise,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub m: usize,
    pub p: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub l_count: usize,
    pub seed: u64,
    pub radius: Option<f64>,
}

/// Writes `D0.csv`, `member_....csv`, `certificate.json` and `meta.json`.
pub fn write_ensemble_dir<T: Real>(
    dir: &Path,
    ens: &DictionaryEnsemble<T>,
    seed: u64,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("D0.csv"), &ens.reference.view())?;
    for (idx, member) in ens.members.iter().enumerate() {
        write_matrix_csv(&dir.join(format!("member_{idx:04}.csv")), &member.view())?;
    }
    fs::write(
        dir.join("certificate.json"),
        serde_json::to_string_pretty(&ens.certificate)?,
    )?;
    let meta = EnsembleMeta {
        m: ens.signal_dim(),
        p: ens.coeff_dim(),
        epsilon: ens.epsilon.to_f64().unwrap_or(f64::NAN),
        epsilon_prime: ens.epsilon_prime.to_f64().unwrap_or(f64::NAN),
        l_count: ens.len(),
        seed,
        radius: ens
            .certificate
            .radius
            .map(|r| r.to_f64().unwrap_or(f64::NAN)),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads an ensemble directory, reconstructing the perturbation matrices
/// and recomputing the certificate from the loaded members.
pub fn read_ensemble_dir<T: Real>(dir: &Path) -> Result<(DictionaryEnsemble<T>, EnsembleMeta)> {
    let meta: EnsembleMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    // lenient column-norm tolerance: verification must be able to load a
    // damaged ensemble and report the damage through the certificate
    let tol = real::<T>(0.5);
    let reference =
        DictionaryMatrix::with_tolerance(read_matrix_csv::<T>(&dir.join("D0.csv"))?, tol)?;
    let mut members = Vec::with_capacity(meta.l_count);
    for idx in 0..meta.l_count {
        let path = dir.join(format!("member_{idx:04}.csv"));
        members.push(DictionaryMatrix::with_tolerance(
            read_matrix_csv::<T>(&path)?,
            tol,
        )?);
    }
    let ens = DictionaryEnsemble::from_members(
        reference,
        real::<T>(meta.epsilon),
        members,
        meta.radius.map(real::<T>),
    );
    Ok((ens, meta))
}

/// Stored certificate, for comparing a reloaded ensemble against what the
/// builder measured.
pub fn read_certificate<T: Real>(dir: &Path) -> Result<EnsembleCertificate<T>>
where
    for<'de> EnsembleCertificate<T>: Deserialize<'de>,
{
    Ok(serde_json::from_str(&fs::read_to_string(
        dir.join("certificate.json"),
    )?)?)
}

/// Writes `bytes` to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    fs::write(&tmp_path, bytes)?;
    fs::rename(&tmp_path, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_batch;
    use crate::packing::build_ensemble;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn g17_matches_c_printf() {
        let cases: &[(f64, &str)] = &[
            (0.0, "0"),
            (40.0, "40"),
            (123456.0, "123456"),
            (-0.5, "-0.5"),
            (0.000125, "0.000125"),
            (1.0 / 3.0, "0.33333333333333331"),
            (1e17, "1e+17"),
            (9.9e16, "99000000000000000"),
            (1e-5, "1.0000000000000001e-05"),
            (5e-324, "4.9406564584124654e-324"),
            (17.444000000000003, "17.444000000000003"),
        ];
        for (value, expect) in cases {
            assert_eq!(fmt_g17(*value), *expect, "value {value}");
        }
    }

    #[test]
    fn g17_round_trips_doubles() {
        let mut rng = rng_from_seed(1);
        for _ in 0..20_000 {
            let x = f64::from_bits(rng.gen::<u64>());
            if !x.is_finite() {
                continue;
            }
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert!(back == x || (back == 0.0 && x == 0.0), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn matrix_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut rng = rng_from_seed(2);
        let a = Array2::from_shape_fn((5, 7), |_| f64::standard_normal(&mut rng));
        write_matrix_csv(&path, &a.view()).unwrap();
        let b = read_matrix_csv::<f64>(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let a = Array2::<f64>::zeros((3, 0));
        write_matrix_csv(&path, &a.view()).unwrap();
        let b = read_matrix_csv::<f64>(&path).unwrap();
        assert_eq!(b.dim(), (3, 0));
    }

    #[test]
    fn batch_dir_round_trip() {
        use crate::model::{CoefficientModel, NonzeroLaw};
        let dir = tempfile::tempdir().unwrap();
        let d = crate::model::DictionaryMatrix::<f64>::identity(4);
        let model = CoefficientModel::sparse_uniform(4, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.25).unwrap();
        let batch = generate_batch(&d, &model, &noise, 12, 77).unwrap().with_dict_index(3);
        write_batch_dir(dir.path(), &batch, &model, &noise).unwrap();

        let (loaded, loaded_model, loaded_noise) = read_batch_dir::<f64>(dir.path()).unwrap();
        assert_eq!(loaded, batch);
        assert_eq!(loaded_model, model);
        assert_eq!(loaded_noise.variance(), 0.25);
    }

    #[test]
    fn ensemble_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = rng_from_seed(3);
        let d0 = crate::model::DictionaryMatrix::<f64>::random_unit_columns(6, 10, &mut rng);
        let ens = build_ensemble(&d0, 1.0 / 320.0, 8, Some(1.0), &mut rng).unwrap();
        write_ensemble_dir(dir.path(), &ens, 99).unwrap();

        let (loaded, meta) = read_ensemble_dir::<f64>(dir.path()).unwrap();
        assert_eq!(meta.l_count, 8);
        assert_eq!(meta.seed, 99);
        assert_eq!(loaded.len(), 8);
        for (a, b) in ens.members.iter().zip(loaded.members.iter()) {
            assert_eq!(a.as_array(), b.as_array());
        }
        // the reloaded certificate still passes
        assert!(loaded.certificate.pass);
        let stored: EnsembleCertificate<f64> = read_certificate(dir.path()).unwrap();
        assert!(stored.pass);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert!(!path.with_extension("csv.tmp").exists());
    }
}
