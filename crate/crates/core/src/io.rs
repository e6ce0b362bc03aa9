//! JSON formats for gates, bases, MPS tensors and circuit specifications, and
//! the textual gate identifiers used by presets and the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::biunitary::{
    cat_map_gate, hadamard_gate, kim_gate, ueb_gate, ComplexHadamard, Gate, UnitaryErrorBasis,
};
use crate::circuit::{CircuitSpec, GateAssignment, Layout};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::linalg::{ComplexMatrix, C64, DEFAULT_TOL};
use crate::states::{Boundary, SolvableMps};

type Pair = [f64; 2];

fn to_pair(z: &C64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn matrix_from_rows(rows: &[Vec<Pair>]) -> Result<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    ComplexMatrix::new(r, c, rows.iter().flatten().map(from_pair).collect())
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| to_pair(&m[(i, j)])).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct CertificateFlags {
    pub unitary: bool,
    pub dual_unitary: bool,
    pub kim_property: bool,
}

/// `{q, entries: [[re, im], ...], certificates}` with entries in `(a, b, c, d)` row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateFile {
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub entries: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<CertificateFlags>,
}

impl GateFile {
    pub fn from_gate(g: &Gate) -> Self {
        let c = g.certificates();
        Self {
            q: g.q(),
            description: None,
            entries: g.matrix().data().iter().map(to_pair).collect(),
            certificates: Some(CertificateFlags {
                unitary: c.unitary,
                dual_unitary: c.dual_unitary,
                kim_property: c.kim_property,
            }),
        }
    }

    /// Builds the gate; certificates are recomputed, never trusted from the file.
    pub fn to_gate(&self) -> Result<Gate> {
        let n = self.q * self.q;
        if self.entries.len() != n * n {
            return Err(Error::Shape(format!(
                "gate with q = {} needs {} entries, got {}",
                self.q,
                n * n,
                self.entries.len()
            )));
        }
        Gate::from_matrix(ComplexMatrix::new(
            n,
            n,
            self.entries.iter().map(from_pair).collect(),
        )?)
    }
}

pub fn gate_to_json(g: &Gate) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GateFile::from_gate(g))?)
}

pub fn gate_from_json(s: &str) -> Result<Gate> {
    serde_json::from_str::<GateFile>(s)?.to_gate()
}

/// `{q, matrix: [[[re, im], ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HadamardFile {
    pub q: usize,
    pub matrix: Vec<Vec<Pair>>,
}

impl HadamardFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let m = matrix_from_rows(&self.matrix)?;
        if m.rows() != self.q || m.cols() != self.q {
            return Err(Error::Shape(format!("expected a {0}x{0} matrix", self.q)));
        }
        Ok(m)
    }
}

/// `{q, members: [matrix, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UebFile {
    pub q: usize,
    pub members: Vec<Vec<Vec<Pair>>>,
}

impl UebFile {
    pub fn from_basis(b: &UnitaryErrorBasis) -> Self {
        Self {
            q: b.q(),
            members: b.members().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_members(&self) -> Result<Vec<ComplexMatrix>> {
        self.members.iter().map(|m| matrix_from_rows(m)).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BoundaryFile {
    Named(String),
    Vectors { left: Vec<Pair>, right: Vec<Pair> },
}

impl Default for BoundaryFile {
    fn default() -> Self {
        Self::Named("trace".into())
    }
}

/// `{q, chi, tensors: {"i,j": [[[re, im], ...], ...]}, boundary}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsFile {
    pub q: usize,
    pub chi: usize,
    pub tensors: BTreeMap<String, Vec<Vec<Pair>>>,
    #[serde(default)]
    pub boundary: BoundaryFile,
}

impl MpsFile {
    pub fn from_mps(s: &SolvableMps) -> Self {
        let q = s.q();
        let tensors = (0..q * q)
            .map(|n| {
                (
                    format!("{},{}", n / q, n % q),
                    matrix_to_rows(s.tensor(n / q, n % q)),
                )
            })
            .collect();
        let boundary = match s.boundary() {
            Boundary::Trace => BoundaryFile::default(),
            Boundary::Vectors { left, right } => BoundaryFile::Vectors {
                left: left.iter().map(to_pair).collect(),
                right: right.iter().map(to_pair).collect(),
            },
        };
        Self {
            q,
            chi: s.chi(),
            tensors,
            boundary,
        }
    }

    pub fn to_mps(&self) -> Result<SolvableMps> {
        let q = self.q;
        let mut tensors = Vec::with_capacity(q * q);
        for i in 0..q {
            for j in 0..q {
                let key = format!("{i},{j}");
                let rows = self
                    .tensors
                    .get(&key)
                    .ok_or_else(|| Error::InvalidMps(format!("missing tensor \"{key}\"")))?;
                tensors.push(matrix_from_rows(rows)?);
            }
        }
        let boundary = match &self.boundary {
            BoundaryFile::Named(s) if s == "trace" => Boundary::Trace,
            BoundaryFile::Named(s) => {
                return Err(Error::InvalidMps(format!("unknown boundary \"{s}\"")))
            }
            BoundaryFile::Vectors { left, right } => Boundary::Vectors {
                left: left.iter().map(from_pair).collect(),
                right: right.iter().map(from_pair).collect(),
            },
        };
        SolvableMps::new(q, self.chi, tensors, boundary)
    }
}

/// Textual gate identifiers:
/// `kim:J,b,h1,h2`, `hadamard:q`, `cat_map:q`, `ueb:q`, `haar:seed` (q = 2),
/// `haar:q:seed`, a bundled fixture name, or `file:<path>`.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSource {
    Kim { j: f64, b: f64, h1: f64, h2: f64 },
    Hadamard { q: usize },
    CatMap { q: usize },
    Ueb { q: usize },
    Haar { q: usize, seed: u64 },
    Fixture(String),
    File(String),
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {what} from \"{s}\"")))
}

impl FromStr for GateSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "kim" => {
                let v: Vec<f64> = rest
                    .split(',')
                    .map(|x| parse_num(x, "KIM parameter"))
                    .collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(Error::Config("kim needs J,b,h1,h2".into()));
                }
                Ok(Self::Kim {
                    j: v[0],
                    b: v[1],
                    h1: v[2],
                    h2: v[3],
                })
            }
            "hadamard" => Ok(Self::Hadamard {
                q: parse_num(rest, "q")?,
            }),
            "cat_map" => Ok(Self::CatMap {
                q: parse_num(rest, "q")?,
            }),
            "ueb" => Ok(Self::Ueb {
                q: parse_num(rest, "q")?,
            }),
            "haar" => match rest.split_once(':') {
                Some((q, seed)) => Ok(Self::Haar {
                    q: parse_num(q, "q")?,
                    seed: parse_num(seed, "seed")?,
                }),
                None => Ok(Self::Haar {
                    q: 2,
                    seed: parse_num(rest, "seed")?,
                }),
            },
            "file" => Ok(Self::File(rest.to_string())),
            name if rest.is_empty() && fixtures::names().contains(&name) => {
                Ok(Self::Fixture(name.to_string()))
            }
            _ => Err(Error::Config(format!("unknown gate identifier \"{s}\""))),
        }
    }
}

impl fmt::Display for GateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kim { j, b, h1, h2 } => write!(f, "kim:{j},{b},{h1},{h2}"),
            Self::Hadamard { q } => write!(f, "hadamard:{q}"),
            Self::CatMap { q } => write!(f, "cat_map:{q}"),
            Self::Ueb { q } => write!(f, "ueb:{q}"),
            Self::Haar { q, seed } => write!(f, "haar:{q}:{seed}"),
            Self::Fixture(name) => write!(f, "{name}"),
            Self::File(path) => write!(f, "file:{path}"),
        }
    }
}

impl GateSource {
    /// Builds the gate. Fixtures are projected onto the nearest unitary.
    pub fn build(&self) -> Result<Gate> {
        match self {
            Self::Kim { j, b, h1, h2 } => Ok(kim_gate(*j, *b, *h1, *h2)),
            Self::Hadamard { q } => {
                let k = ComplexHadamard::fourier(*q)?;
                let zeros = vec![0.0; *q];
                hadamard_gate(&k, &k, &k, &k, &zeros, &zeros)
            }
            Self::CatMap { q } => cat_map_gate(*q),
            Self::Ueb { q } => {
                let b = UnitaryErrorBasis::generalized_pauli(*q)?;
                ueb_gate(&b, &b, &b, &b)
            }
            Self::Haar { q, seed } => Gate::haar_random(*q, *seed),
            Self::Fixture(name) => fixtures::gate(name),
            Self::File(path) => gate_from_json(&std::fs::read_to_string(path)?),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GatesField {
    /// `"floquet:<gate-id>"` or `"random_haar"`.
    Named(String),
    /// One list of gate identifiers per layer.
    Table(Vec<Vec<String>>),
}

/// `{N, q, t, layout, gates, seed}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CircuitSpecFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub q: usize,
    pub t: usize,
    #[serde(default)]
    pub layout: Layout,
    pub gates: GatesField,
    #[serde(default)]
    pub seed: u64,
}

impl CircuitSpecFile {
    pub fn to_spec(&self) -> Result<CircuitSpec> {
        let gates = match &self.gates {
            GatesField::Named(s) if s == "random_haar" => GateAssignment::RandomHaar,
            GatesField::Named(s) => {
                let id = s.strip_prefix("floquet:").ok_or_else(|| {
                    Error::Config(format!("gates must be \"floquet:<gate-id>\", got \"{s}\""))
                })?;
                GateAssignment::Floquet(id.parse::<GateSource>()?.build()?)
            }
            GatesField::Table(rows) => GateAssignment::Table(
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|id| id.parse::<GateSource>()?.build())
                            .collect()
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let spec = CircuitSpec {
            n: self.n,
            q: self.q,
            t: self.t,
            layout: self.layout,
            gates,
            seed: self.seed,
        };
        match &spec.gates {
            GateAssignment::Floquet(g) if g.q() != self.q => Err(Error::Config(format!(
                "gate acts on dimension {}, circuit has q = {}",
                g.q(),
                self.q
            ))),
            GateAssignment::Table(t) if t.iter().flatten().any(|g| g.q() != self.q) => {
                Err(Error::Config("all gates in the table must share q".into()))
            }
            _ => Ok(spec),
        }
    }
}

/// Any of the validator input formats, recognised by its keys.
#[derive(Clone, Debug)]
pub enum ValidationTarget {
    Gate(GateFile),
    Hadamard(HadamardFile),
    Ueb(UebFile),
    Mps(MpsFile),
}

pub fn read_validation_target(path: &Path) -> Result<ValidationTarget> {
    let text = std::fs::read_to_string(path)?;
    parse_validation_target(&text)
}

pub fn parse_validation_target(text: &str) -> Result<ValidationTarget> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let has = |k: &str| value.get(k).is_some();
    if has("entries") {
        Ok(ValidationTarget::Gate(serde_json::from_value(value)?))
    } else if has("members") {
        Ok(ValidationTarget::Ueb(serde_json::from_value(value)?))
    } else if has("tensors") {
        Ok(ValidationTarget::Mps(serde_json::from_value(value)?))
    } else if has("matrix") {
        Ok(ValidationTarget::Hadamard(serde_json::from_value(value)?))
    } else {
        Err(Error::Config(
            "unrecognised file: expected one of the keys entries, members, tensors, matrix".into(),
        ))
    }
}

/// Default validator tolerance for files that do not state one.
pub const VALIDATE_TOL: f64 = DEFAULT_TOL;
