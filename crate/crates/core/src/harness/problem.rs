//! Problem files and builtin problem generators.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::conditioning::QuadraticObjective;
use crate::error::{Error, Result};
use crate::geometry::AtomMatrix;
use crate::linalg::{sym_eigen, DenseMatrix, Norm, EIGEN_TOL};
use crate::lp::SimplexPoint;

/// A problem `min f(u)` over `conv(A)` with `f(u) = ½⟨Qu,u⟩ + ⟨b,u⟩`,
/// plus whatever is known about its solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub atoms: AtomMatrix,
    pub q: DenseMatrix,
    pub b: Vec<f64>,
    pub domain_norm: Norm,
    pub range_norm: Norm,
    pub f_star: Option<f64>,
    pub u_star: Option<Vec<f64>>,
    pub z_star: Option<Vec<SimplexPoint>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    atoms: Vec<Vec<f64>>,
    objective: RawObjective,
    #[serde(default = "default_domain")]
    domain_norm: Norm,
    #[serde(default = "default_range")]
    range_norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z_star: Option<Vec<Vec<f64>>>,
}

fn default_domain() -> Norm {
    Norm::L1
}

fn default_range() -> Norm {
    Norm::L2
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawObjective {
    Quadratic { q: Vec<Vec<f64>>, b: Vec<f64> },
    /// `½‖u‖²`
    HalfSquaredNorm,
}

fn matrix_field(field: &str, rows: &[Vec<f64>]) -> Result<DenseMatrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::field(field, "matrix must be nonempty"));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::field(field, "rows have different lengths"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::field(field, "entries must be finite"));
    }
    DenseMatrix::from_rows(rows).map_err(|e| Error::field(field, e.to_string()))
}

fn finite_vec(field: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::field(field, "entries must be finite"));
    }
    Ok(())
}

impl ProblemSpec {
    pub fn new(atoms: AtomMatrix, objective: &QuadraticObjective) -> Self {
        Self {
            name: None,
            atoms,
            q: objective.q().clone(),
            b: objective.b().to_vec(),
            domain_norm: Norm::L1,
            range_norm: Norm::L2,
            f_star: None,
            u_star: None,
            z_star: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn objective(&self) -> Result<QuadraticObjective> {
        QuadraticObjective::new(self.q.clone(), self.b.clone())
    }

    /// `f` scaled by `λ`, with `f★` scaled to match.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            q: self.q.scaled(lambda),
            b: self.b.iter().map(|v| v * lambda).collect(),
            f_star: self.f_star.map(|f| f * lambda),
            ..self.clone()
        }
    }

    fn from_raw(raw: RawProblem) -> Result<Self> {
        let a = matrix_field("atoms", &raw.atoms)?;
        let atoms = AtomMatrix::new(a).map_err(|e| Error::field("atoms", e.to_string()))?;
        let m = atoms.dim();
        let n = atoms.len();
        let (q, b) = match raw.objective {
            RawObjective::Quadratic { q, b } => (matrix_field("objective.q", &q)?, b),
            RawObjective::HalfSquaredNorm => (DenseMatrix::identity(m), vec![0.0; m]),
        };
        if q.rows() != m || q.cols() != m {
            return Err(Error::field(
                "objective.q",
                format!("expected {m}x{m} to match atoms, got {}x{}", q.rows(), q.cols()),
            ));
        }
        if b.len() != m {
            return Err(Error::field(
                "objective.b",
                format!("expected length {m}, got {}", b.len()),
            ));
        }
        finite_vec("objective.b", &b)?;
        QuadraticObjective::new(q.clone(), b.clone()).map_err(|e| Error::field("objective.q", e.to_string()))?;
        if raw.domain_norm == Norm::Linf {
            return Err(Error::field("domain_norm", "must be l1 or l2"));
        }
        if raw.range_norm != Norm::L2 {
            return Err(Error::field("range_norm", "only l2 is supported"));
        }
        if let Some(f) = raw.f_star {
            if !f.is_finite() {
                return Err(Error::field("f_star", "must be finite"));
            }
        }
        if let Some(u) = &raw.u_star {
            if u.len() != m {
                return Err(Error::field("u_star", format!("expected length {m}, got {}", u.len())));
            }
            finite_vec("u_star", u)?;
        }
        let z_star = match raw.z_star {
            None => None,
            Some(zs) => {
                if zs.is_empty() {
                    return Err(Error::field("z_star", "must list at least one point"));
                }
                let mut out = Vec::with_capacity(zs.len());
                for z in zs {
                    if z.len() != n {
                        return Err(Error::field("z_star", format!("points must have length {n}")));
                    }
                    out.push(SimplexPoint::new(z).map_err(|e| Error::field("z_star", e.to_string()))?);
                }
                Some(out)
            }
        };
        Ok(Self {
            name: raw.name,
            atoms,
            q,
            b,
            domain_norm: raw.domain_norm,
            range_norm: raw.range_norm,
            f_star: raw.f_star,
            u_star: raw.u_star,
            z_star,
        })
    }

    fn to_raw(&self) -> RawProblem {
        RawProblem {
            name: self.name.clone(),
            atoms: self.atoms.matrix().to_rows(),
            objective: RawObjective::Quadratic {
                q: self.q.to_rows(),
                b: self.b.clone(),
            },
            domain_norm: self.domain_norm,
            range_norm: self.range_norm,
            f_star: self.f_star,
            u_star: self.u_star.clone(),
            z_star: self
                .z_star
                .as_ref()
                .map(|zs| zs.iter().map(|z| z.to_vec()).collect()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("problem serializes")
    }
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    ProblemSpec::from_json(&fs::read_to_string(path)?)
}

pub fn write_problem(spec: &ProblemSpec, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, spec.to_json() + "\n")?;
    Ok(())
}

/// `½‖u‖²` over the unit simplex `conv(I_m)`.
pub fn simplex_problem(m: usize) -> Result<ProblemSpec> {
    check_size("simplex", m, 2)?;
    let spec = ProblemSpec::new(AtomMatrix::simplex(m), &QuadraticObjective::half_squared_norm(m));
    let u = vec![1.0 / m as f64; m];
    Ok(ProblemSpec {
        f_star: Some(0.5 / m as f64),
        u_star: Some(u),
        z_star: Some(vec![SimplexPoint::barycenter(m)]),
        ..spec.with_name(format!("simplex({m})"))
    })
}

/// `½‖u‖²` over the ℓ1 ball `conv([I_m −I_m])`.
pub fn l1ball_problem(m: usize) -> Result<ProblemSpec> {
    check_size("l1ball", m, 1)?;
    let spec = ProblemSpec::new(AtomMatrix::l1_ball(m), &QuadraticObjective::half_squared_norm(m));
    Ok(ProblemSpec {
        f_star: Some(0.0),
        u_star: Some(vec![0.0; m]),
        ..spec.with_name(format!("l1ball({m})"))
    })
}

/// The instance `f(s, t) = ½s² + t` over `conv{(1,0), (−1,0), (0,1)}`,
/// whose relative strong convexity vanishes while the growth constant is ½.
pub fn flat_direction_problem() -> ProblemSpec {
    let a = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![0.0, 0.0, 1.0]]).expect("static");
    let f = QuadraticObjective::new(DenseMatrix::diag(&[1.0, 0.0]), vec![0.0, 1.0]).expect("static");
    ProblemSpec {
        f_star: Some(0.0),
        u_star: Some(vec![0.0, 0.0]),
        z_star: Some(vec![SimplexPoint::new(vec![0.5, 0.5, 0.0]).expect("static")]),
        ..ProblemSpec::new(AtomMatrix::new(a).expect("static"), &f).with_name("flat_direction")
    }
}

/// Gaussian atoms and `Q = R·diag(λ)·Rᵀ` with a random rotation `R` and
/// eigenvalues spaced geometrically in `[1, cond]`; Gaussian `b`.
pub fn random_quadratic_problem(m: usize, n: usize, seed: u64, cond: f64) -> Result<ProblemSpec> {
    check_size("random_quadratic m", m, 1)?;
    check_size("random_quadratic n", n, 2)?;
    if !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::field("cond", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let atoms = DenseMatrix::new(m, n, (0..m * n).map(|_| gauss()).collect())?;
    let mut g = DenseMatrix::new(m, m, (0..m * m).map(|_| gauss()).collect())?;
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    let b: Vec<f64> = (0..m).map(|_| gauss()).collect();
    let rotation = sym_eigen(&g, EIGEN_TOL)?.eigenvectors;
    let lambdas: Vec<f64> = (0..m)
        .map(|i| if m == 1 { 1.0 } else { cond.powf(i as f64 / (m - 1) as f64) })
        .collect();
    let scaled = rotation.matmul(&DenseMatrix::diag(&lambdas))?;
    let mut q = scaled.matmul(&rotation.transpose())?;
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (q[(i, j)] + q[(j, i)]);
            q[(i, j)] = s;
            q[(j, i)] = s;
        }
    }
    let f = QuadraticObjective::new(q, b)?;
    Ok(ProblemSpec::new(AtomMatrix::new(atoms)?, &f)
        .with_name(format!("random_quadratic({m},{n},{seed},{cond})")))
}

fn check_size(what: &str, v: usize, min: usize) -> Result<()> {
    if v < min || v > 64 {
        return Err(Error::field(what, format!("must be between {min} and 64")));
    }
    Ok(())
}

/// Parses `simplex(m)`, `l1ball(m)`, `flat_direction` or
/// `random_quadratic(m,n,seed,cond)`.
pub fn builtin(name: &str) -> Result<ProblemSpec> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], &name[i + 1..name.len() - 1]),
        Some(_) => return Err(Error::field("builtin", format!("malformed `{name}`"))),
        None => (name, ""),
    };
    let args: Vec<&str> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',').map(str::trim).collect()
    };
    let int = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::field("builtin", format!("`{s}` is not a nonnegative integer")))
    };
    match (head, args.as_slice()) {
        ("simplex", [m]) => simplex_problem(int(m)?),
        ("l1ball", [m]) => l1ball_problem(int(m)?),
        ("flat_direction", []) => Ok(flat_direction_problem()),
        ("random_quadratic", [m, n, seed, cond]) => {
            let seed: u64 = seed
                .parse()
                .map_err(|_| Error::field("builtin", format!("`{seed}` is not a seed")))?;
            let cond: f64 = cond
                .parse()
                .map_err(|_| Error::field("builtin", format!("`{cond}` is not a number")))?;
            random_quadratic_problem(int(m)?, int(n)?, seed, cond)
        }
        _ => Err(Error::field("builtin", format!("unknown builtin `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_direction_json_parses() {
        let text = r#"{
            "atoms": [[1, -1, 0], [0, 0, 1]],
            "objective": {"quadratic": {"q": [[1, 0], [0, 0]], "b": [0, 1]}},
            "f_star": 0,
            "u_star": [0, 0],
            "z_star": [[0.5, 0.5, 0]]
        }"#;
        let p = ProblemSpec::from_json(text).unwrap();
        assert_eq!((p.atoms.dim(), p.atoms.len()), (2, 3));
        assert_eq!(p.q, flat_direction_problem().q);
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = ProblemSpec::from_json("{\n  \"atoms\": [[1, 2],\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn mismatched_q_names_field() {
        let text = r#"{"atoms": [[1, 0], [0, 1]], "objective": {"quadratic": {"q": [[1]], "b": [0, 0]}}}"#;
        match ProblemSpec::from_json(text) {
            Err(Error::InvalidField { field, .. }) => assert_eq!(field, "objective.q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_q_rejected() {
        let text = r#"{"atoms": [[1, 0], [0, 1]], "objective": {"quadratic": {"q": [[1, 0.5], [0, 1]], "b": [0, 0]}}}"#;
        assert!(ProblemSpec::from_json(text).is_err());
    }

    #[test]
    fn builtins_parse() {
        assert_eq!(builtin("simplex(4)").unwrap().atoms.len(), 4);
        assert_eq!(builtin("l1ball(3)").unwrap().atoms.len(), 6);
        let r = builtin("random_quadratic(3, 6, 1, 10)").unwrap();
        assert!(r.objective().unwrap().is_positive_definite());
        assert!(builtin("cube(3)").is_err());
        assert!(builtin("simplex(x)").is_err());
    }

    #[test]
    fn random_quadratic_spectrum() {
        let p = random_quadratic_problem(3, 6, 9, 100.0).unwrap();
        let f = p.objective().unwrap();
        assert!((f.max_eigenvalue() - 100.0).abs() < 1e-10);
        assert!((f.min_eigenvalue() - 1.0).abs() < 1e-10);
    }
}
