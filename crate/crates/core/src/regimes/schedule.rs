use serde::{Deserialize, Serialize};

use super::RegimeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Stop at `γ̃ = value`.
    FixedGammaTilde,
    /// `value` is μ; stop at `γ̃ = α^D/μ`.
    MuScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub kind: RuleKind,
    pub value: f64,
}

impl StoppingRule {
    pub fn fixed(gamma_tilde: f64) -> Self {
        StoppingRule { kind: RuleKind::FixedGammaTilde, value: gamma_tilde }
    }

    pub fn mu_scaled(mu: f64) -> Self {
        StoppingRule { kind: RuleKind::MuScaled, value: mu }
    }

    pub fn validate(&self) -> Result<(), RegimeError> {
        if self.value > 0.0 && self.value.is_finite() {
            Ok(())
        } else {
            Err(RegimeError::Invalid(format!("stopping rule value must be positive, got {}", self.value)))
        }
    }

    /// `μ` when the rule is μ-scaled.
    pub fn mu(&self) -> Option<f64> {
        (self.kind == RuleKind::MuScaled).then_some(self.value)
    }

    pub fn label(&self) -> String {
        match self.kind {
            RuleKind::FixedGammaTilde => format!("gamma_tilde={}", self.value),
            RuleKind::MuScaled => format!("mu={}", self.value),
        }
    }
}

pub fn schedule_target(alpha: f64, depth: u32, rule: &StoppingRule) -> f64 {
    match rule.kind {
        RuleKind::FixedGammaTilde => rule.value,
        RuleKind::MuScaled => alpha.powi(depth as i32) / rule.value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((schedule_target(100.0, 2, &StoppingRule::mu_scaled(0.5)) - 2e4).abs() < 1e-9);
        assert!((schedule_target(1.0, 2, &StoppingRule::mu_scaled(0.001)) - 1000.0).abs() < 1e-9);
        assert!(schedule_target(1.0, 2, &StoppingRule::mu_scaled(1e300)) < 1e-299);
        assert_eq!(schedule_target(5.0, 3, &StoppingRule::fixed(12.0)), 12.0);
    }

    #[test]
    fn validation() {
        assert!(StoppingRule::mu_scaled(0.0).validate().is_err());
        assert!(StoppingRule::fixed(f64::NAN).validate().is_err());
        assert!(StoppingRule::fixed(1.0).validate().is_ok());
    }
}
