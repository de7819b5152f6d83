//! Instance files and named generators.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cfweave::frame::{CFrame, CFusionFrame};
use cfweave::hilbert::{DiscretizedMeasureSpace, Subspace, Vector};
use cfweave::instances::{
    discrete_gabor, paper_weaving_example, random_fusion_family, GaborParams, RandomFamilyParams,
};
use cfweave::WovenFamily;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{parse_complex, CNum};
use crate::error::{CliError, Result};

pub type Params = BTreeMap<String, toml::Value>;

/// Where a scenario's family comes from. Also the top-level layout of instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    WovenFamily(FusionFamilySpec),
    CframeFamily(CFrameFamilySpec),
    Generator {
        name: String,
        #[serde(default)]
        params: Params,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionFamilySpec {
    pub dim: usize,
    /// Node masses shared by all members.
    pub measure: Vec<f64>,
    pub members: Vec<FusionMemberSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionMemberSpec {
    pub weights: Vec<f64>,
    /// Per node, a list of spanning vectors (empty for the zero subspace).
    pub subspaces: Vec<Vec<Vec<CNum>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CFrameFamilySpec {
    pub dim: usize,
    pub frames: Vec<CFrameSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CFrameSpec {
    pub measure: Vec<f64>,
    pub vectors: Vec<Vec<CNum>>,
}

/// A loaded instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Fusion(WovenFamily),
    CFrames(Vec<CFrame>),
}

pub(crate) fn vector(dim: usize, entries: &[CNum], what: &str) -> Result<Vector> {
    if entries.len() != dim {
        return Err(CliError::input(format!(
            "{what}: expected {dim} entries, got {}",
            entries.len()
        )));
    }
    Ok(Vector::from_vec(entries.iter().map(|c| c.0).collect()))
}

pub(crate) fn spanned(dim: usize, vectors: &[Vec<CNum>], rank_tol: f64, what: &str) -> Result<Subspace> {
    let vs = vectors
        .iter()
        .map(|v| vector(dim, v, what))
        .collect::<Result<Vec<_>>>()?;
    Ok(Subspace::from_spanning(dim, &vs, rank_tol)?)
}

fn entries(v: &Vector) -> Vec<CNum> {
    v.iter().map(|&z| CNum(z)).collect()
}

impl FusionFamilySpec {
    pub fn build(&self, rank_tol: f64) -> Result<WovenFamily> {
        let space = DiscretizedMeasureSpace::new(self.measure.clone())?;
        let members = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let subspaces = m
                    .subspaces
                    .iter()
                    .enumerate()
                    .map(|(j, s)| spanned(self.dim, s, rank_tol, &format!("member {i}, node {j}")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CFusionFrame::new(space.clone(), subspaces, m.weights.clone())?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WovenFamily::new(members)?)
    }

    pub fn from_family(fam: &WovenFamily) -> Self {
        Self {
            dim: fam.dim(),
            measure: fam.space().weights().to_vec(),
            members: fam
                .members()
                .iter()
                .map(|f| FusionMemberSpec {
                    weights: f.weights().to_vec(),
                    subspaces: f
                        .subspaces()
                        .iter()
                        .map(|s| s.basis().column_iter().map(|c| entries(&c.into_owned())).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl CFrameFamilySpec {
    pub fn build(&self) -> Result<Vec<CFrame>> {
        if self.frames.is_empty() {
            return Err(CliError::input("cframe_family needs at least one frame"));
        }
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let space = DiscretizedMeasureSpace::new(f.measure.clone())?;
                let vectors = f
                    .vectors
                    .iter()
                    .enumerate()
                    .map(|(j, v)| vector(self.dim, v, &format!("frame {i}, vector {j}")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CFrame::new(space, vectors)?)
            })
            .collect()
    }

    pub fn from_frames(frames: &[CFrame]) -> Self {
        Self {
            dim: frames.first().map_or(0, CFrame::dim),
            frames: frames
                .iter()
                .map(|f| CFrameSpec {
                    measure: f.space().weights().to_vec(),
                    vectors: f.vectors().iter().map(entries).collect(),
                })
                .collect(),
        }
    }
}

impl Instance {
    /// The woven c-fusion family; c-frames are converted node by node.
    pub fn family(&self, rank_tol: f64) -> Result<WovenFamily> {
        match self {
            Self::Fusion(f) => Ok(f.clone()),
            Self::CFrames(frames) => {
                let members = frames
                    .iter()
                    .map(|f| CFusionFrame::from_cframe(f, rank_tol))
                    .collect::<cfweave::Result<Vec<_>>>()?;
                Ok(WovenFamily::new(members)?)
            }
        }
    }

    pub fn cframes(&self) -> Result<&[CFrame]> {
        match self {
            Self::CFrames(frames) => Ok(frames),
            Self::Fusion(_) => Err(CliError::input(
                "this check needs a cframe_family instance",
            )),
        }
    }
}

impl InstanceSpec {
    /// Replaces `file` and `generator` references by the data they denote.
    pub fn resolve(&self, base_dir: &Path, default_seed: u64) -> Result<InstanceSpec> {
        match self {
            Self::File { path } => {
                let full = base_dir.join(path);
                let spec = read_instance_file(&full)?;
                let dir = full.parent().unwrap_or(base_dir).to_path_buf();
                spec.resolve(&dir, default_seed)
            }
            Self::Generator { name, params } => generate(name, params, default_seed),
            other => Ok(other.clone()),
        }
    }

    pub fn load(&self, base_dir: &Path, default_seed: u64, rank_tol: f64) -> Result<Instance> {
        match self.resolve(base_dir, default_seed)? {
            Self::WovenFamily(spec) => Ok(Instance::Fusion(spec.build(rank_tol)?)),
            Self::CframeFamily(spec) => Ok(Instance::CFrames(spec.build()?)),
            _ => unreachable!("resolve returns data"),
        }
    }
}

pub fn read_instance_file(path: &Path) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_instance(spec: &InstanceSpec) -> Result<String> {
    toml::to_string(spec).map_err(|e| CliError::input(format!("cannot serialize instance: {e}")))
}

pub const GENERATORS: [&str; 3] = ["paper_weaving_example", "discrete_gabor", "random_fusion_family"];

struct ParamReader<'a> {
    generator: &'a str,
    params: &'a Params,
}

impl ParamReader<'_> {
    fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::input(format!(
                "{}: unknown parameter {k:?} (known: {})",
                self.generator,
                known.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn err(&self, key: &str, want: &str) -> CliError {
        CliError::input(format!("{}: parameter {key:?} must be {want}", self.generator))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(toml::Value::String(s)) => s.parse().map(Some).map_err(|_| self.err(key, "a number")),
            Some(_) => Err(self.err(key, "a number")),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(toml::Value::String(s)) => {
                s.parse().map(Some).map_err(|_| self.err(key, "a nonnegative integer"))
            }
            Some(_) => Err(self.err(key, "a nonnegative integer")),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.u64(key)?
            .map(|x| usize::try_from(x).map_err(|_| self.err(key, "a nonnegative integer")))
            .transpose()
    }

    fn complex(&self, key: &str) -> Result<Option<Complex64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => parse_complex(s).map(Some).map_err(CliError::Input),
            Some(_) => self.f64(key).map(|x| x.map(|re| Complex64::new(re, 0.0))),
        }
    }

    fn complex_list(&self, key: &str) -> Result<Option<Vec<Complex64>>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => parse_complex(s).map_err(CliError::Input),
                    toml::Value::Float(x) => Ok(Complex64::new(*x, 0.0)),
                    toml::Value::Integer(i) => Ok(Complex64::new(*i as f64, 0.0)),
                    _ => Err(self.err(key, "a list of complex numbers")),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            // Comma-separated form, as typed on a command line.
            Some(toml::Value::String(s)) => s
                .split(',')
                .map(|t| parse_complex(t).map_err(CliError::Input))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => self.complex(key).map(|z| z.map(|z| vec![z])),
        }
    }

    fn required<T>(&self, key: &str, value: Option<T>) -> Result<T> {
        value.ok_or_else(|| CliError::input(format!("{}: missing parameter {key:?}", self.generator)))
    }
}

/// Runs a named generator. `default_seed` is used when `seed` is not given.
pub fn generate(name: &str, params: &Params, default_seed: u64) -> Result<InstanceSpec> {
    let r = ParamReader {
        generator: name,
        params,
    };
    match name {
        "paper_weaving_example" => {
            r.check_known(&["epsilon"])?;
            let eps = r.required("epsilon", r.f64("epsilon")?)?;
            let (phi, psi) = paper_weaving_example(eps)?;
            Ok(InstanceSpec::CframeFamily(CFrameFamilySpec::from_frames(&[phi, psi])))
        }
        "discrete_gabor" => {
            r.check_known(&["dim", "window", "alpha"])?;
            let dim = r.required("dim", r.usize("dim")?)?;
            let window = match r.complex_list("window")? {
                Some(w) => Vector::from_vec(w),
                None if dim > 0 => Vector::from_fn(dim, |t, _| {
                    Complex64::new(if t == 0 { 1.0 } else { 0.0 }, 0.0)
                }),
                None => return Err(CliError::input("discrete_gabor: dim must be > 0")),
            };
            if window.len() != dim {
                return Err(CliError::input(format!(
                    "discrete_gabor: window has {} entries, dim is {dim}",
                    window.len()
                )));
            }
            let alpha = r.complex("alpha")?.unwrap_or(Complex64::new(2.0, 0.0));
            let (f, g) = discrete_gabor(&GaborParams::full_lattice(window, alpha))?;
            Ok(InstanceSpec::CframeFamily(CFrameFamilySpec::from_frames(&[f, g])))
        }
        "random_fusion_family" => {
            r.check_known(&[
                "dim", "nodes", "members", "dim_min", "dim_max", "weight_min", "weight_max", "seed",
            ])?;
            let dim = r.required("dim", r.usize("dim")?)?;
            let params = RandomFamilyParams {
                dim,
                nodes: r.required("nodes", r.usize("nodes")?)?,
                members: r.usize("members")?.unwrap_or(2),
                dim_range: (r.usize("dim_min")?.unwrap_or(1), r.usize("dim_max")?.unwrap_or(dim)),
                weight_range: (
                    r.f64("weight_min")?.unwrap_or(0.5),
                    r.f64("weight_max")?.unwrap_or(1.5),
                ),
                seed: r.u64("seed")?.unwrap_or(default_seed),
            };
            let fam = random_fusion_family(&params)?;
            Ok(InstanceSpec::WovenFamily(FusionFamilySpec::from_family(&fam)))
        }
        other => Err(CliError::input(format!(
            "unknown generator {other:?} (known: {})",
            GENERATORS.join(", ")
        ))),
    }
}

/// Parses `key=value` words; values are read as TOML literals, falling back to strings.
pub fn parse_params(words: &[String]) -> Result<Params> {
    let mut out = Params::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("expected key=value, got {w:?}")))?;
        let value = toml::from_str::<BTreeMap<String, toml::Value>>(&format!("v = {v}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(v.to_string()));
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}
