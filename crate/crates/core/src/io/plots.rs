//! SVG renderings of the CSV tables in an artifact directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::svg::{LinePlot, Series};
use super::tables::Table;
use crate::error::{Error, Result};

fn observables(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let t = table.column("t")?;
    let n = table.header.iter().filter(|h| h.starts_with("x_mean_")).count();
    let mut expectation = LinePlot::new("Expectation values", "t", "⟨x⟩, ⟨p⟩");
    let mut rms = LinePlot::new("RMS widths", "t", "x_rms, p_rms");
    for j in 1..=n {
        expectation = expectation
            .with(Series::new(format!("⟨x_{j}⟩"), &t, &table.column(&format!("x_mean_{j}"))?))
            .with(Series::new(format!("⟨p_{j}⟩"), &t, &table.column(&format!("p_mean_{j}"))?));
        rms = rms
            .with(Series::new(format!("x_rms,{j}"), &t, &table.column(&format!("x_rms_{j}"))?))
            .with(Series::new(format!("p_rms,{j}"), &t, &table.column(&format!("p_rms_{j}"))?).dashed());
    }
    let mut energies = LinePlot::new("Energies", "t", "energy");
    for (name, label) in [
        ("total", "E"),
        ("kinetic", "K"),
        ("v_trap", "V_HO"),
        ("v_disorder", "V_D"),
        ("v_coulomb", "V_Cou"),
    ] {
        energies = energies.with(Series::new(label, &t, &table.column(name)?));
    }
    let phase = LinePlot::new("Phase-space trace", "⟨x_1⟩", "⟨p_1⟩")
        .with(Series::new("(⟨x_1⟩, ⟨p_1⟩)", &table.column("x_mean_1")?, &table.column("p_mean_1")?));
    Ok(vec![
        ("expectation", expectation),
        ("rms", rms),
        ("energies", energies),
        ("phase_space", phase),
    ])
}

fn weakvalues(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let (ti, xi, vi, ki, pi) =
        (table.index("t")?, table.index("x")?, table.index("value")?, table.index("kind")?, table.index("p_mean")?);
    let parse = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
    let mut groups: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut mean: BTreeMap<String, f64> = BTreeMap::new();
    for row in &table.rows {
        let entry = groups.entry((row[ki].clone(), row[xi].clone())).or_default();
        entry.0.push(parse(&row[ti]));
        entry.1.push(parse(&row[vi]));
        mean.insert(row[ti].clone(), parse(&row[pi]));
    }
    let mut plot = LinePlot::new("Weak values of momentum", "t", "p_W");
    for ((kind, x), (ts, vs)) in groups {
        plot = plot.with(Series::new(format!("{kind} x={}", parse(&x)), &ts, &vs));
    }
    let mut p: Vec<(f64, f64)> = mean.iter().map(|(t, v)| (parse(t), *v)).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (ts, vs): (Vec<f64>, Vec<f64>) = p.into_iter().unzip();
    plot = plot.with(Series::new("⟨p_1⟩", &ts, &vs).dashed());
    Ok(vec![("weakvalues", plot)])
}

fn marginals(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let x = table.column("x")?;
    let plot = LinePlot::new("Position marginal", "x", "density")
        .log_y()
        .with(Series::new("t = 0", &x, &table.column("density_initial")?).dashed())
        .with(Series::new("final", &x, &table.column("density_final")?))
        .with(Series::new("late mean", &x, &table.column("density_late_mean")?))
        .with(Series::new("classical", &x, &table.column("rho_classical")?).dashed());
    Ok(vec![("marginals", plot)])
}

fn momentum(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let k = table.column("k")?;
    let plot = LinePlot::new("Momentum marginal", "p", "density")
        .log_y()
        .with(Series::new("t = 0", &k, &table.column("density_initial")?).dashed())
        .with(Series::new("final", &k, &table.column("density_final")?));
    Ok(vec![("momentum", plot)])
}

fn disorder(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let plot = LinePlot::new("Disorder potential", "x", "V_D")
        .with(Series::new("V_D", &table.column("x")?, &table.column("d")?));
    Ok(vec![("disorder", plot)])
}

fn spectrum(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let n = table.column("n")?;
    let populations = LinePlot::new("Populations", "n", "|c_n|²")
        .log_y()
        .with(Series::new("|c_n|²", &n, &table.column("population")?));
    let spacing = LinePlot::new("Level spacing", "n", "E_{n+1} − E_n")
        .with(Series::new("ΔE_n", &n, &table.column("spacing")?));
    Ok(vec![("populations", populations), ("spacing", spacing)])
}

fn coherence(table: &Table) -> Result<Vec<(&'static str, LinePlot)>> {
    let (ti, ni, mi, ri) = (table.index("t")?, table.index("n")?, table.index("m")?, table.index("re")?);
    let mut groups: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in &table.rows {
        let key = (row[ni].parse().unwrap_or(0), row[mi].parse().unwrap_or(0));
        let entry = groups.entry(key).or_default();
        entry.0.push(row[ti].parse().unwrap_or(f64::NAN));
        entry.1.push(row[ri].parse().unwrap_or(f64::NAN));
    }
    let mut plot = LinePlot::new("Coherences", "t", "Re ρ_nm");
    for ((n, m), (ts, vs)) in groups {
        plot = plot.with(Series::new(format!("ρ_{n},{m}"), &ts, &vs));
    }
    Ok(vec![("coherence", plot)])
}

type Renderer = fn(&Table) -> Result<Vec<(&'static str, LinePlot)>>;

/// CSV file and the plots derived from it.
pub const SOURCES: [(&str, Renderer); 7] = [
    ("observables.csv", observables),
    ("weakvalues.csv", weakvalues),
    ("marginals.csv", marginals),
    ("momentum.csv", momentum),
    ("disorder.csv", disorder),
    ("spectrum.csv", spectrum),
    ("coherence.csv", coherence),
];

/// Re-renders `plots/*.svg` from whichever known CSV files exist in `dir`.
pub fn render_directory(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::invalid(format!("{} is not a directory", dir.display())));
    }
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    let mut written = Vec::new();
    for (file, render) in SOURCES {
        let source = dir.join(file);
        if !source.exists() {
            continue;
        }
        let table = Table::read(&source)?;
        if table.rows.is_empty() {
            continue;
        }
        for (name, plot) in render(&table)? {
            let path = plots.join(format!("{name}.svg"));
            plot.save(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}
