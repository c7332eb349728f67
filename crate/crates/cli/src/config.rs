use std::fs;
use std::path::Path;

use hinv::gates::{MsNoiseParams, SqNoiseParams};
use serde::Deserialize;

use crate::CliError;

/// Noise configuration shared by every subcommand. Absent sections mean
/// zero noise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "SqNoiseParams::zero")]
    pub single_qubit: SqNoiseParams,
    #[serde(default = "MsNoiseParams::ideal")]
    pub ms: MsNoiseParams,
}

impl NoiseConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: NoiseConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        cfg.single_qubit
            .validate()
            .and_then(|_| cfg.ms.validate())
            .map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
                Self::parse(&text, &p.display().to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hinv::gates::MsMode;

    #[test]
    fn full_schema() {
        let text = r#"{
            "single_qubit": {"epsilon": 0.01, "phase": 0.002, "detuning_ratio": 0.0},
            "ms": {"nbar": 0.05, "overrotation_rad": 0.09, "depol_p": 0.02, "eta": 0.62, "mode": "sampled"}
        }"#;
        let cfg = NoiseConfig::parse(text, "cfg").unwrap();
        assert_eq!(cfg.single_qubit.epsilon, 0.01);
        assert_eq!(cfg.ms.mode, MsMode::Sampled);
        assert_eq!(cfg.ms.overrotation, 0.09);
    }

    #[test]
    fn absent_sections_are_zero_noise() {
        let cfg = NoiseConfig::parse("{}", "cfg").unwrap();
        assert_eq!(cfg, NoiseConfig::default());
        assert!(cfg.ms.is_ideal());
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let text = "{\n  \"single_qubit\": {\n    \"epsilon\": \"big\"\n  }\n}";
        match NoiseConfig::parse(text, "cfg.json") {
            Err(CliError::Validation(msg)) => assert!(msg.starts_with("cfg.json:3:"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let unknown = "{\"ms\": {\"nbar\": 0.1, \"temperature\": 3}}";
        assert!(matches!(NoiseConfig::parse(unknown, "c"), Err(CliError::Validation(_))));
        let out_of_range = "{\"single_qubit\": {\"epsilon\": 1.5}}";
        assert!(matches!(NoiseConfig::parse(out_of_range, "c"), Err(CliError::Validation(_))));
    }
}
