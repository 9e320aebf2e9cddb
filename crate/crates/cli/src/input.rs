//! Argument value parsers and state loading.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pplab::geometry::{bloch_state, qubit_projector, werner_state, BlochVector, Outcome, UnitVector3};
use pplab::{ComplexMatrix, DensityMatrix, Projector};
use serde::Deserialize;

/// Rejects anything that looks like a degree value; every angle is radians.
pub fn radians(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.contains('°') || t.to_ascii_lowercase().ends_with("deg") || t.to_ascii_lowercase().ends_with('d') {
        bail!("angle {s:?} looks like degrees; angles are given in radians");
    }
    let v: f64 = t.parse().with_context(|| format!("bad angle {s:?}"))?;
    if !v.is_finite() {
        bail!("angle {s:?} is not finite");
    }
    Ok(v)
}

pub fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let v: f64 = x.trim().parse().with_context(|| format!("bad number {x:?} in {s:?}"))?;
            if !v.is_finite() {
                bail!("non-finite number in {s:?}");
            }
            Ok(v)
        })
        .collect()
}

pub fn vec3(s: &str) -> Result<[f64; 3]> {
    let v = numbers(s)?;
    <[f64; 3]>::try_from(v).map_err(|v| anyhow!("expected 3 comma-separated numbers, got {}", v.len()))
}

/// A direction; normalized if it is not already a unit vector.
pub fn direction(s: &str) -> Result<UnitVector3> {
    Ok(UnitVector3::normalize(vec3(s)?)?)
}

/// `X,Y,Z` or `X,Y,Z:+` / `X,Y,Z:-`.
pub fn qubit_proj(s: &str) -> Result<Projector> {
    let (axis, sign) = match s.rsplit_once(':') {
        Some((a, "+")) => (a, Outcome::Plus),
        Some((a, "-")) => (a, Outcome::Minus),
        Some((_, other)) => bail!("projector outcome must be + or -, got {other:?}"),
        None => (s, Outcome::Plus),
    };
    Ok(qubit_projector(direction(axis)?, sign))
}

/// `[S:]X,Y,Z` — an axis observable on subsystem `S` (default 0).
pub fn observable(s: &str, index: usize) -> Result<pplab::scheme::ObservableSpec> {
    let (sub, axis) = match s.split_once(':') {
        Some((sub, axis)) => (sub.trim().parse().with_context(|| format!("bad subsystem in {s:?}"))?, axis),
        None => (0, s),
    };
    Ok(pplab::scheme::ObservableSpec::axis(sub, format!("o{}", index + 1), direction(axis)?))
}

/// Three orthonormal axes given as nine numbers.
pub fn frame(s: &str) -> Result<[UnitVector3; 3]> {
    let v = numbers(s)?;
    if v.len() != 9 {
        bail!("a frame needs 9 numbers (three axes), got {}", v.len());
    }
    let axis = |k: usize| UnitVector3::new(v[3 * k], v[3 * k + 1], v[3 * k + 2]);
    let f = [axis(0)?, axis(1)?, axis(2)?];
    pplab::geometry::check_frame(&f)?;
    Ok(f)
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn alpha_scan(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        bail!("alpha scan must be start:stop:step, got {s:?}");
    };
    let (a, b, step) = (radians(a)?, radians(b)?, radians(step)?);
    if step <= 0.0 || b < a {
        bail!("alpha scan needs start <= stop and a positive step");
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        bail!("alpha scan has too many points ({n})");
    }
    Ok((0..=n).map(|k| a + step * k as f64).collect())
}

#[derive(Deserialize)]
struct MatrixFile {
    dim: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

pub fn matrix_file(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: MatrixFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let im = f.im.unwrap_or_else(|| vec![vec![0.0; f.dim]; f.dim]);
    if f.re.len() != f.dim || im.len() != f.dim {
        bail!("{}: expected {} rows", path.display(), f.dim);
    }
    Ok(ComplexMatrix::from_parts(&f.re, &im)?)
}

/// The state sources; at most one may be set.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct StateArgs {
    /// Two-qubit Werner state with parameter eta in [-1/3, 1].
    #[arg(long, value_name = "ETA", allow_hyphen_values = true)]
    pub werner: Option<f64>,
    /// Qubit state with the given Bloch vector.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub bloch: Option<String>,
    /// Density matrix from a JSON file {"dim", "re", "im"}.
    #[arg(long, value_name = "FILE")]
    pub state: Option<std::path::PathBuf>,
    /// Subsystem dimensions of a --state file, e.g. 2,2.
    #[arg(long, value_name = "D1,D2,..")]
    pub dims: Option<String>,
}

impl StateArgs {
    pub fn load(&self) -> Result<Option<(DensityMatrix, Vec<usize>)>> {
        let given = [self.werner.is_some(), self.bloch.is_some(), self.state.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => return Ok(None),
            1 => {}
            _ => bail!("give exactly one of --werner, --bloch, --state"),
        }
        if let Some(eta) = self.werner {
            return Ok(Some((werner_state(eta)?, vec![2, 2])));
        }
        if let Some(b) = &self.bloch {
            let [x, y, z] = vec3(b)?;
            return Ok(Some((bloch_state(BlochVector::new(x, y, z)?), vec![2])));
        }
        let path = self.state.as_ref().expect("one source is set");
        let rho = DensityMatrix::new(matrix_file(path)?).with_context(|| format!("state file {}", path.display()))?;
        let dims = match &self.dims {
            Some(d) => d
                .split(',')
                .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad dimension {x:?}")))
                .collect::<Result<Vec<_>>>()?,
            None => vec![rho.dim()],
        };
        if dims.iter().product::<usize>() != rho.dim() {
            bail!("--dims {dims:?} do not multiply to the state dimension {}", rho.dim());
        }
        Ok(Some((rho, dims)))
    }

    pub fn require(&self) -> Result<(DensityMatrix, Vec<usize>)> {
        self.load()?
            .ok_or_else(|| anyhow!("this command needs a state: give one of --werner, --bloch, --state"))
    }
}
