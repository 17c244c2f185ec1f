//! Shipped GF(16) codes with Monte-Carlo constructed information sets.
//!
//! Fixed-kernel codes use `μ = δ = 1`, `γ = α⁴` everywhere. Variable-kernel
//! codes (N = 1024) optimize `γ` on the top three levels and use `(1,1,1)`
//! below level 8, with special nodes capped at 128 symbols.

use crate::code::{CodeSpec, Kernel, KernelTable, NodeId};
use crate::config::ConfigError;
use crate::construction::ConstructionResult;
use crate::gf::FieldSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetFamily {
    Fixed,
    Variable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub family: PresetFamily,
    pub length: usize,
    pub rate: f64,
    /// `γ` exponents for nodes (0,10), (0,9), (1,9), (0,8)..(3,8).
    gammas: Option<[i64; 7]>,
    data: Option<&'static str>,
}

const ALPHA4: i64 = 4;

macro_rules! fixed {
    ($name:literal, $len:literal, $rate:literal) => {
        Preset {
            name: $name,
            family: PresetFamily::Fixed,
            length: $len,
            rate: $rate,
            gammas: None,
            data: Some(include_str!(concat!("../presets/", $name, ".json"))),
        }
    };
}

macro_rules! variable {
    ($name:literal, $rate:literal, $g:expr) => {
        Preset {
            name: $name,
            family: PresetFamily::Variable,
            length: 1024,
            rate: $rate,
            gammas: Some($g),
            data: Some(include_str!(concat!("../presets/", $name, ".json"))),
        }
    };
}

/// Exponent 0 stands for the symbol 1.
pub const PRESETS: &[Preset] = &[
    fixed!("fixed-n256-r25", 256, 0.25),
    fixed!("fixed-n256-r50", 256, 0.5),
    fixed!("fixed-n256-r75", 256, 0.75),
    fixed!("fixed-n512-r25", 512, 0.25),
    fixed!("fixed-n512-r50", 512, 0.5),
    fixed!("fixed-n512-r75", 512, 0.75),
    fixed!("fixed-n1024-r25", 1024, 0.25),
    fixed!("fixed-n1024-r50", 1024, 0.5),
    fixed!("fixed-n1024-r75", 1024, 0.75),
    fixed!("fixed-n2048-r25", 2048, 0.25),
    fixed!("fixed-n2048-r50", 2048, 0.5),
    fixed!("fixed-n2048-r75", 2048, 0.75),
    variable!("var-n1024-r25", 0.25, [10, 11, 9, 0, 7, 11, 11]),
    variable!("var-n1024-r50", 0.5, [5, 4, 8, 8, 7, 4, 11]),
    variable!("var-n1024-r75", 0.75, [10, 4, 8, 8, 8, 11, 4]),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn n(&self) -> usize {
        self.length.trailing_zeros() as usize
    }

    pub fn k(&self) -> usize {
        (self.length as f64 * self.rate).round() as usize
    }

    pub fn kernel_table(&self, f: &FieldSpec) -> KernelTable {
        match self.gammas {
            None => KernelTable::uniform(Kernel::new(1, f.alpha_pow(ALPHA4), 1)),
            Some(g) => {
                let nodes = [(0, 10), (0, 9), (1, 9), (0, 8), (1, 8), (2, 8), (3, 8)];
                KernelTable {
                    default: Kernel::ONES,
                    levels: Vec::new(),
                    nodes: nodes
                        .iter()
                        .zip(g)
                        .map(|(&(nu, s), e)| (NodeId::new(nu, s), Kernel::new(1, f.alpha_pow(e), 1)))
                        .collect(),
                }
            }
        }
    }

    /// The code with an empty information set.
    pub fn template(&self) -> CodeSpec {
        self.with_info(Vec::new()).expect("preset parameters are valid")
    }

    /// The code with an explicit information set.
    pub fn with_info(&self, info: Vec<usize>) -> Result<CodeSpec, ConfigError> {
        let f = FieldSpec::gf16();
        let table = self.kernel_table(&f);
        let code = CodeSpec::new(f, self.n(), info, &table)?;
        Ok(match self.family {
            PresetFamily::Fixed => code,
            PresetFamily::Variable => code.simplified(8)?,
        })
    }

    pub fn construction(&self) -> Option<ConstructionResult> {
        self.data.map(|d| serde_json::from_str(d).expect("shipped construction files parse"))
    }

    /// The complete code, using the shipped construction.
    pub fn code(&self) -> Result<CodeSpec, ConfigError> {
        let c = self.construction().ok_or(ConfigError::MissingInfoSet)?;
        self.with_info(c.info_set)
    }
}
