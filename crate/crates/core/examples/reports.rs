//! Writing a plot-ready CSV and a JSON report that embeds its config.

use twostage::harness::Harness;
use twostage::model::ModelSpec;
use twostage::report::{csv_string, write_outputs};
use twostage::two_stage::{Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let model = ModelSpec::default_for(Problem::Mode);
    let cfg = TwoStageConfig::default_for(Problem::Mode, 4096);
    let rows = Harness::new(cfg.seed, 0)?.simulate(&model, &cfg, 20)?;
    let dir = std::env::temp_dir().join("twostage-example");
    let config = serde_json::json!({ "model": model, "two_stage": cfg, "reps": 20 });
    let (json, csv) = write_outputs(&dir.join("simulate-mode"), "simulate", &config, &serde_json::json!({}), &csv_string(&rows)?)?;
    println!("wrote {} and {}", json.display(), csv.display());
    print!("{}", std::fs::read_to_string(csv)?.lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
