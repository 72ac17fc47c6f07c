//! Experiment reports: one attack-free and one attacked evaluation of the
//! same test set, plus query and perturbation accounting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::metrics::{ConfusionMatrix, MetricsBundle};
use crate::harness::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSection {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsBundle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySection {
    /// Oracle queries spent building scores (SW table or per-doc R1S).
    pub scoring: u64,
    /// Oracle queries spent classifying the test set (both passes).
    pub evaluation: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub emails_touched: u64,
    pub words_edited: u64,
    pub chars_edited: u64,
    pub sentences_added: u64,
}

/// Everything one (model, attack, scoring, budget) cell produced.
///
/// `wall_time_ms` is runtime diagnostics: it is excluded from the
/// structured serialization and from equality so reports stay byte-stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub config: ExperimentConfig,
    pub attack_free: EvalSection,
    pub attacked: EvalSection,
    pub queries: QuerySection,
    pub perturbation: PerturbationSummary,
    #[serde(skip)]
    pub wall_time_ms: u64,
}

impl PartialEq for AttackReport {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.attack_free == other.attack_free
            && self.attacked == other.attacked
            && self.queries == other.queries
            && self.perturbation == other.perturbation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Stable-key JSON, the machine interface.
    Structured,
    /// Text table matching the published row shape.
    Table,
}

impl AttackReport {
    pub fn to_structured_string(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    /// 11 columns: Model | Attack Level | Attack | TP | TN | FP | FN |
    /// Accuracy | Precision | Recall | F1. One row attack-free, one attacked.
    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "Model | Attack Level | Attack | TP | TN | FP | FN | Accuracy | Precision | Recall | F1\n",
        );
        let model = self.config.model.name();
        out.push_str(&table_row(model, "-", "attack-free", &self.attack_free));
        out.push_str(&table_row(
            model,
            self.config.attack.level_name(),
            &self.config.attack.attack_name(),
            &self.attacked,
        ));
        out
    }

    pub fn emit(&self, format: ReportFormat, path: &Path) -> Result<()> {
        let text = match format {
            ReportFormat::Structured => self.to_structured_string()?,
            ReportFormat::Table => self.to_table_string(),
        };
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<AttackReport> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn table_row(model: &str, level: &str, attack: &str, eval: &EvalSection) -> String {
    let cm = &eval.confusion;
    let m = &eval.metrics;
    format!(
        "{model} | {level} | {attack} | {} | {} | {} | {} | {:.2} | {:.2} | {:.2} | {:.2}\n",
        cm.tp,
        cm.tn,
        cm.fp,
        cm.fn_,
        m.accuracy * 100.0,
        m.precision * 100.0,
        m.recall * 100.0,
        m.f1 * 100.0,
    )
}
