//! Implementations of the CLI subcommands.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use awlssvm_core::{
    balanced_accuracy, fit, load_dataset, load_model, save_dataset, save_model, synth,
    wilcoxon_signed_rank, BenchmarkReport, Method, TrainedModel,
};

use crate::{CliError, RunConfig};

pub fn train(data: &Path, config: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config)?;
    let ds = load_dataset(data)?;
    let model = fit(&ds, &config.train)?;
    save_model(&TrainedModel::Aw(model), out)?;
    println!("model written to {}", out.display());
    Ok(())
}

pub fn predict(model_path: &Path, data: &Path, out: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let ds = load_dataset(data)?;
    let pred = model.predict(ds.views())?;

    let mut file = fs::File::create(out)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", out.display())))?;
    let classes = pred.scores.ncols();
    let header: Vec<String> = ["sample_index", "predicted_class"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..classes).map(|c| format!("score_{c}")))
        .collect();
    writeln!(file, "{}", header.join(",")).map_err(write_err(out))?;
    for i in 0..pred.labels.len() {
        let mut row = vec![i.to_string(), pred.labels[i].to_string()];
        for c in 0..classes {
            row.push(format!("{}", pred.scores[(i, c)]));
        }
        writeln!(file, "{}", row.join(",")).map_err(write_err(out))?;
    }

    let ba = balanced_accuracy(ds.labels(), &pred.labels)?;
    println!("balanced_accuracy {ba:.6}");
    println!("predictions written to {}", out.display());
    Ok(())
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::validation(format!("cannot write {}: {e}", path.display()))
}

pub fn tune(
    data: &Path,
    config: Option<&Path>,
    method: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let config = RunConfig::load(config)?;
    let method: Method = method.parse()?;
    let ds = load_dataset(data)?;
    let outcome = awlssvm_core::tune(&ds, &config.search, &config.train, method, config.folds)?;
    println!(
        "best trial {} of {}: cv_balanced_accuracy {:.6}",
        outcome.best_index,
        outcome.trials.len(),
        outcome.best_score
    );
    println!(
        "gamma {} rho {} kernel {:?}",
        outcome.best.gamma, outcome.best.rho, outcome.best.kernel
    );
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&outcome)
            .map_err(|e| CliError::validation(e.to_string()))?;
        fs::write(path, body + "\n").map_err(write_err(path))?;
        println!("trial log written to {}", path.display());
    }
    Ok(())
}

pub fn benchmark(
    data_dirs: &[std::path::PathBuf],
    methods: &str,
    config: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let config = RunConfig::load(config)?;
    let methods = parse_methods(methods)?;

    let mut reports: Vec<BenchmarkReport> = Vec::new();
    let mut dataset_names = Vec::new();
    for dir in data_dirs {
        let ds = load_dataset(dir)?;
        dataset_names.push(ds.name().to_string());
        reports.extend(awlssvm_core::benchmark(
            &ds,
            &config.split,
            &methods,
            &config.search,
            &config.train,
            config.folds,
        )?);
    }

    let body =
        serde_json::to_string_pretty(&reports).map_err(|e| CliError::validation(e.to_string()))?;
    fs::write(out, body + "\n").map_err(write_err(out))?;

    print!(
        "{}",
        render_table(&reports, &dataset_names, &methods, config.train.iterations)
    );
    println!("report written to {}", out.display());
    Ok(())
}

fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse())
        .collect::<awlssvm_core::Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(CliError::validation("no methods given"));
    }
    Ok(methods)
}

/// Mean(±std) table, methods as rows and datasets as columns.
fn render_table(
    reports: &[BenchmarkReport],
    datasets: &[String],
    methods: &[Method],
    iterations: usize,
) -> String {
    let row_label = |m: &Method| match m {
        Method::AdaptiveWeighted => format!("AW-LSSVM(T={iterations})"),
        other => other.display_name().to_string(),
    };
    let mut width = "Method".len().max(methods.iter().map(|m| row_label(m).len()).max().unwrap_or(0));
    width += 2;
    let col_width = datasets
        .iter()
        .map(|d| d.len())
        .max()
        .unwrap_or(0)
        .max("00.00(±0.00)".len())
        + 2;

    let mut out = String::new();
    out.push_str(&format!("{:<width$}", "Method"));
    for d in datasets {
        out.push_str(&format!("{d:<col_width$}"));
    }
    out.push('\n');
    for method in methods {
        out.push_str(&format!("{:<width$}", row_label(method)));
        for dataset in datasets {
            let cell = reports
                .iter()
                .find(|r| r.dataset == *dataset && r.method == method.id())
                .map(|r| r.table_cell())
                .unwrap_or_else(|| "n/a".to_string());
            out.push_str(&format!("{cell:<col_width$}"));
        }
        out.push('\n');
    }
    out
}

pub fn compare(report_a: &Path, report_b: &Path) -> Result<(), CliError> {
    let a = read_reports(report_a)?;
    let b = read_reports(report_b)?;

    let datasets_a: BTreeSet<String> = a.iter().map(|r| r.dataset.clone()).collect();
    let datasets_b: BTreeSet<String> = b.iter().map(|r| r.dataset.clone()).collect();
    if datasets_a != datasets_b {
        return Err(CliError::validation(format!(
            "dataset lists differ: {:?} vs {:?}",
            datasets_a, datasets_b
        )));
    }
    let datasets: Vec<String> = datasets_a.into_iter().collect();

    let methods_a = method_order(&a);
    let methods_b = method_order(&b);
    for ma in &methods_a {
        for mb in &methods_b {
            let scores_a = scores_over(&a, ma, &datasets)?;
            let scores_b = scores_over(&b, mb, &datasets)?;
            let w = wilcoxon_signed_rank(&scores_a, &scores_b)?;
            println!(
                "{ma} vs {mb}: T={:.1} p={:.8} (n={})",
                w.t, w.p, w.n_effective
            );
        }
    }
    Ok(())
}

fn read_reports(path: &Path) -> Result<Vec<BenchmarkReport>, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let reports: Vec<BenchmarkReport> = serde_json::from_str(&raw)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    if reports.is_empty() {
        return Err(CliError::validation(format!(
            "{} contains no reports",
            path.display()
        )));
    }
    for r in &reports {
        r.validate_moments()?;
    }
    Ok(reports)
}

fn method_order(reports: &[BenchmarkReport]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in reports {
        if seen.insert(r.method.clone()) {
            out.push(r.method.clone());
        }
    }
    out
}

fn scores_over(
    reports: &[BenchmarkReport],
    method: &str,
    datasets: &[String],
) -> Result<Vec<f64>, CliError> {
    datasets
        .iter()
        .map(|d| {
            reports
                .iter()
                .find(|r| r.dataset == *d && r.method == method)
                .map(|r| r.mean)
                .ok_or_else(|| {
                    CliError::validation(format!("method {method} has no entry for dataset {d}"))
                })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn gen_data(
    out: &Path,
    flavor: &str,
    per_class: usize,
    noise: f64,
    samples: usize,
    classes: usize,
    dims: &str,
    seed: u64,
    name: &str,
) -> Result<(), CliError> {
    let ds = match flavor {
        "complementary" => synth::complementary_views(per_class, noise, seed),
        "noise" => synth::informative_plus_noise(per_class, noise, seed),
        "shaped" => {
            let view_dims: Vec<usize> = dims
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::validation(format!("bad dimension '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            if view_dims.is_empty() {
                return Err(CliError::validation("shaped flavor needs --dims"));
            }
            synth::random_shaped(name, samples, &view_dims, classes, seed)
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown flavor '{other}': expected complementary, noise or shaped"
            )))
        }
    };
    // Record the requested name for the non-shaped flavors too.
    let ds = if flavor == "shaped" {
        ds
    } else {
        awlssvm_core::MultiViewDataset::new(
            name,
            ds.view_names().to_vec(),
            ds.views().to_vec(),
            ds.labels().to_vec(),
            ds.num_classes(),
        )?
    };
    save_dataset(&ds, out)?;
    println!(
        "dataset '{}' with {} samples, {} views, {} classes written to {}",
        ds.name(),
        ds.num_samples(),
        ds.num_views(),
        ds.num_classes(),
        out.display()
    );
    Ok(())
}
