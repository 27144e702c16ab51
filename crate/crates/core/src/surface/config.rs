//! JSON surface descriptions. Reals are decimal strings, numbers, or
//! expressions such as `"2*acosh(1+sqrt(2))"`.

use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::{FenchelNielsen, SurfaceAtlas};
use crate::error::{Error, Result};
use crate::numerics::{eval_expr, Cplx, PrecisionCtx};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealSpec {
    Number(f64),
    Expr(String),
}

impl RealSpec {
    pub fn eval(&self, prec: u32) -> Result<Float> {
        match self {
            RealSpec::Number(x) => Ok(Float::with_val(prec, *x)),
            RealSpec::Expr(s) => eval_expr(s, prec),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FenchelNielsenSpec {
    pub lengths: [RealSpec; 3],
    pub twists: [RealSpec; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub genus: u32,
    pub fenchel_nielsen: FenchelNielsenSpec,
    /// Offset of the base hexagon from its centered position, `[re, im]`.
    #[serde(default)]
    pub base_offset: Option<[RealSpec; 2]>,
}

impl SurfaceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SurfaceConfig = serde_json::from_str(text)?;
        if cfg.genus != 2 {
            return Err(Error::Config(format!("only genus 2 surfaces can be assembled, got genus {}", cfg.genus)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn fenchel_nielsen(&self, prec: u32) -> Result<FenchelNielsen> {
        let fnc = &self.fenchel_nielsen;
        let l = [fnc.lengths[0].eval(prec)?, fnc.lengths[1].eval(prec)?, fnc.lengths[2].eval(prec)?];
        let t = [fnc.twists[0].eval(prec)?, fnc.twists[1].eval(prec)?, fnc.twists[2].eval(prec)?];
        FenchelNielsen::new(l, t)
    }

    pub fn base_offset(&self, prec: u32) -> Result<Cplx> {
        match &self.base_offset {
            Some([re, im]) => Ok(Cplx::new(re.eval(prec)?, im.eval(prec)?)),
            None => Ok(SurfaceAtlas::default_base_offset(prec)),
        }
    }

    pub fn build(&self, ctx: PrecisionCtx) -> Result<SurfaceAtlas> {
        let fnc = self.fenchel_nielsen(ctx.bits)?;
        let offset = self.base_offset(ctx.bits)?;
        SurfaceAtlas::build_with_offset(&fnc, ctx, &offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_expressions_and_numbers() {
        let text = r#"{"genus": 2, "fenchel_nielsen": {"lengths": ["2*acosh(2)", 2.5, "1.25"], "twists": ["1/2", 0, "0.25"]}}"#;
        let cfg = SurfaceConfig::from_json(text).unwrap();
        let f = cfg.fenchel_nielsen(128).unwrap();
        assert_eq!(f.lengths[1], Float::with_val(128, 2.5));
        assert_eq!(f.twists[0], Float::with_val(128, 0.5));
        assert_eq!(cfg.base_offset(128).unwrap(), SurfaceAtlas::default_base_offset(128));
    }

    #[test]
    fn rejects_other_genus_and_bad_lengths() {
        let text = r#"{"genus": 3, "fenchel_nielsen": {"lengths": [1, 1, 1], "twists": [0, 0, 0]}}"#;
        assert!(SurfaceConfig::from_json(text).is_err());
        let text = r#"{"genus": 2, "fenchel_nielsen": {"lengths": [1, -1, 1], "twists": [0, 0, 0]}}"#;
        assert!(SurfaceConfig::from_json(text).unwrap().fenchel_nielsen(64).is_err());
    }
}
