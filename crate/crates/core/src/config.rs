//! Text configuration for codes (TOML) and construction files (JSON).
//!
//! ```toml
//! length = 256
//! k = 128
//! construction = "n256_r050.json"   # or: info_set = [ ... ]
//!
//! [field]
//! p = 4
//! poly = "10011"
//!
//! [kernel]
//! mu = 1
//! gamma = "a^4"
//! delta = 1
//! levels = [{ level = 8, gamma = "a^5" }]
//! nodes = [{ nu = 1, s = 7, gamma = "a^8" }]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CodeError, CodeSpec, Kernel, KernelTable, NodeId};
use crate::construction::ConstructionResult;
use crate::gf::{FieldSpec, GfError, Symbol};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("length {0} is not a power of two")]
    Length(usize),
    #[error("no information set: give `info_set` or `construction`")]
    MissingInfoSet,
    #[error("construction is for N = 2^{got}, code has N = 2^{expected}")]
    ConstructionLength { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Field element written either as an integer or as text such as `a^4`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolText {
    Int(u64),
    Text(String),
}

impl SymbolText {
    pub fn resolve(&self, f: &FieldSpec) -> Result<Symbol, GfError> {
        match self {
            SymbolText::Int(v) => f.parse_symbol(&v.to_string()),
            SymbolText::Text(t) => f.parse_symbol(t),
        }
    }
}

impl Default for SymbolText {
    fn default() -> Self {
        SymbolText::Int(1)
    }
}

impl From<&str> for SymbolText {
    fn from(s: &str) -> Self {
        SymbolText::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default = "default_p")]
    pub p: usize,
    /// Bit string, most significant coefficient first.
    #[serde(default)]
    pub poly: Option<String>,
}

fn default_p() -> usize {
    4
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { p: 4, poly: None }
    }
}

impl FieldConfig {
    pub fn build(&self) -> Result<FieldSpec, GfError> {
        match (&self.poly, self.p) {
            (Some(bits), p) => FieldSpec::from_bit_string(p, bits),
            (None, 2) => Ok(FieldSpec::gf4()),
            (None, 4) => Ok(FieldSpec::gf16()),
            (None, p) => FieldSpec::default_for(p),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    #[serde(default)]
    pub mu: SymbolText,
    #[serde(default)]
    pub gamma: SymbolText,
    #[serde(default)]
    pub delta: SymbolText,
}

impl Triple {
    fn resolve(&self, f: &FieldSpec) -> Result<Kernel, GfError> {
        Ok(Kernel::new(self.mu.resolve(f)?, self.gamma.resolve(f)?, self.delta.resolve(f)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelOverride {
    pub level: usize,
    #[serde(flatten)]
    pub kernel: Triple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOverride {
    pub nu: usize,
    pub s: usize,
    #[serde(flatten)]
    pub kernel: Triple,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub default: Triple,
    #[serde(default)]
    pub levels: Vec<LevelOverride>,
    #[serde(default)]
    pub nodes: Vec<NodeOverride>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    /// Block length N in symbols.
    pub length: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub info_set: Option<Vec<usize>>,
    /// Construction file, relative to the config file's directory.
    #[serde(default)]
    pub construction: Option<PathBuf>,
    /// Threshold level of a simplified generalized code.
    #[serde(default)]
    pub s0: Option<usize>,
}

impl CodeConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), ConfigError> {
        let text = read(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml(&text)?, dir))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn n(&self) -> Result<usize, ConfigError> {
        if !self.length.is_power_of_two() || self.length < 2 {
            return Err(ConfigError::Length(self.length));
        }
        Ok(self.length.trailing_zeros() as usize)
    }

    pub fn kernel_table(&self, f: &FieldSpec) -> Result<KernelTable, ConfigError> {
        let mut table = KernelTable::uniform(self.kernel.default.resolve(f)?);
        for l in &self.kernel.levels {
            table.levels.push((l.level, l.kernel.resolve(f)?));
        }
        for o in &self.kernel.nodes {
            table.nodes.push((NodeId::new(o.nu, o.s), o.kernel.resolve(f)?));
        }
        Ok(table)
    }

    /// The code without an information set, as needed for construction.
    pub fn template(&self) -> Result<CodeSpec, ConfigError> {
        self.with_info(Vec::new())
    }

    /// Resolves the information set (inline or from a construction file
    /// relative to `base_dir`) and builds the code.
    pub fn build(&self, base_dir: &Path) -> Result<CodeSpec, ConfigError> {
        let info = match (&self.info_set, &self.construction) {
            (Some(set), _) => set.clone(),
            (None, Some(file)) => {
                let c = load_construction(&base_dir.join(file))?;
                if c.n != self.n()? {
                    return Err(ConfigError::ConstructionLength { expected: self.n()?, got: c.n });
                }
                c.info_set
            }
            (None, None) => return Err(ConfigError::MissingInfoSet),
        };
        if let Some(k) = self.k {
            if k != info.len() {
                return Err(CodeError::InfoSetSize { k, got: info.len() }.into());
            }
        }
        self.with_info(info)
    }

    fn with_info(&self, info: Vec<usize>) -> Result<CodeSpec, ConfigError> {
        let f = self.field.build()?;
        let table = self.kernel_table(&f)?;
        let code = CodeSpec::new(f, self.n()?, info, &table)?;
        Ok(match self.s0 {
            Some(s0) => code.simplified(s0)?,
            None => code,
        })
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

pub fn load_construction(path: &Path) -> Result<ConstructionResult, ConfigError> {
    Ok(serde_json::from_str(&read(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
length = 16
k = 3
info_set = [15, 14, 13]

[kernel]
gamma = "a^4"
levels = [{ level = 4, gamma = "a^5" }]
nodes = [{ nu = 1, s = 2, gamma = 7 }]
"#;

    #[test]
    fn parse_and_build() {
        let cfg = CodeConfig::from_toml(SAMPLE).unwrap();
        let code = cfg.build(Path::new(".")).unwrap();
        let f = code.field();
        assert_eq!(f.q(), 16);
        assert_eq!(code.info_set(), &[13, 14, 15]);
        assert_eq!(code.kernel(NodeId::new(0, 1)), Kernel::new(1, 3, 1));
        assert_eq!(code.kernel(NodeId::root(4)), Kernel::new(1, f.alpha_pow(5), 1));
        assert_eq!(code.kernel(NodeId::new(1, 2)), Kernel::new(1, 7, 1));
        let back = CodeConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors() {
        let bad_len = SAMPLE.replace("length = 16", "length = 12");
        assert!(matches!(CodeConfig::from_toml(&bad_len).unwrap().build(Path::new(".")), Err(ConfigError::Length(12))));
        let bad_k = SAMPLE.replace("k = 3", "k = 4");
        assert!(CodeConfig::from_toml(&bad_k).unwrap().build(Path::new(".")).is_err());
        let no_info = SAMPLE.replace("info_set = [15, 14, 13]", "");
        assert!(matches!(
            CodeConfig::from_toml(&no_info).unwrap().build(Path::new(".")),
            Err(ConfigError::MissingInfoSet)
        ));
        assert!(CodeConfig::from_toml("length = 16\nbogus = 1").is_err());
        let bad_sym = SAMPLE.replace("\"a^4\"", "\"b^4\"");
        assert!(CodeConfig::from_toml(&bad_sym).unwrap().build(Path::new(".")).is_err());
    }

    #[test]
    fn gf4_field() {
        let cfg = CodeConfig::from_toml("length = 4\ninfo_set = [3]\n[field]\np = 2\n").unwrap();
        assert_eq!(cfg.build(Path::new(".")).unwrap().field().q(), 4);
    }
}
