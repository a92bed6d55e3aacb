//! SVG line plots of the CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};

use mfg_core::experiment::{read_scalar_grid, read_value_grid};
use mfg_core::{Error, ExperimentConfig, SolverKind};
use plotters::prelude::*;

type Series = (String, Vec<(f64, f64)>);

fn io<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(format!("plot: {e}"))
}

fn draw(path: &Path, title: &str, y_label: &str, series: &[Series]) -> Result<(), Error> {
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|s| s.1.iter().map(|p| p.1))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
            (a.min(y), b.max(y))
        });
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(io)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0f64..1f64, (lo - pad)..(hi + pad))
        .map_err(io)?;
    chart
        .configure_mesh()
        .x_desc("zeta")
        .y_desc(y_label)
        .draw()
        .map_err(io)?;
    for (i, (label, points)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(
                points.iter().copied(),
                color.stroke_width(2),
            ))
            .map_err(io)?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(io)?;
    root.present().map_err(io)?;
    Ok(())
}

fn with_zeta(values: &[f64]) -> Vec<(f64, f64)> {
    let n = (values.len() - 1) as f64;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 / n, *v))
        .collect()
}

fn read_compare(path: &Path) -> Result<Vec<Series>, Error> {
    let text = fs::read_to_string(path)?;
    let mut w = Vec::new();
    let mut d = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.parse().map_err(io))
            .collect::<Result<_, _>>()?;
        w.push((cols[0], cols[1]));
        d.push((cols[0], cols[2]));
    }
    Ok(vec![
        ("u1 - u2 (N+1 players)".into(), w),
        ("d Upsilon / d zeta".into(), d),
    ])
}

/// Draws one chart per pipeline from the files it wrote; returns the new files.
pub fn plot_outputs(cfg: &ExperimentConfig, files: &[PathBuf]) -> Result<Vec<PathBuf>, Error> {
    let is_values = |p: &&PathBuf| {
        p.file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.contains("_values_"))
    };
    let solver = cfg.solver.name();
    let out = cfg.out_dir.join(format!("{solver}.svg"));
    match cfg.solver {
        SolverKind::Compare => {
            let table = cfg.out_dir.join("compare.csv");
            draw(&out, "w at t = 0", "w", &read_compare(&table)?)?;
        }
        SolverKind::NPlayer => {
            let mut series = Vec::new();
            for p in files.iter().filter(is_values) {
                let g = read_value_grid(p)?;
                series.push((format!("u1, t = {}", g.t), with_zeta(&g.u1)));
                series.push((format!("u2, t = {}", g.t), with_zeta(&g.u2)));
            }
            draw(&out, "values", "u", &series)?;
        }
        SolverKind::Scalar | SolverKind::Hjb | SolverKind::Density => {
            let mut series = Vec::new();
            for p in files.iter().filter(is_values) {
                let g = read_scalar_grid(p)?;
                series.push((format!("t = {}", g.t), with_zeta(&g.values)));
            }
            let label = match cfg.solver {
                SolverKind::Scalar => "w",
                SolverKind::Hjb => "Upsilon",
                _ => "P",
            };
            draw(&out, solver, label, &series)?;
        }
    }
    Ok(vec![out])
}
