//! File emission: one CSV per snapshot, the expanded config, and the summary
//! document. All floating-point values are written with 17 significant
//! digits so files are byte-stable and round-trip exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::AssertOutcome;
use crate::error::Result;
use crate::evolve::BipolarState;
use crate::runner::RunArtifacts;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_snapshot_csv(path: &Path, state: &BipolarState) -> Result<()> {
    let grid = state.grid();
    let f = state.n_surfaces();
    let suffix = |i: usize| {
        if f == 1 {
            String::new()
        } else {
            format!("_s{}", i + 1)
        }
    };

    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);

    let mut header = vec!["x".to_string()];
    for i in 0..f {
        let s = suffix(i);
        for name in [
            "re_psi_plus",
            "im_psi_plus",
            "re_psi_minus",
            "im_psi_minus",
            "rho_plus",
            "rho_minus",
        ] {
            header.push(format!("{name}{s}"));
        }
        header.push(format!("rho{}", if f == 1 { "_total".into() } else { s }));
    }
    if f > 1 {
        header.push("rho_total".to_string());
    }
    for i in 0..f {
        let s = suffix(i);
        for name in [
            "re_cap_psi_plus",
            "im_cap_psi_plus",
            "re_cap_psi_minus",
            "im_cap_psi_minus",
        ] {
            header.push(format!("{name}{s}"));
        }
    }
    writeln!(w, "{}", header.join(","))?;

    let totals: Vec<_> = (0..f).map(|i| state.total(i)).collect();
    let caps: Vec<_> = (0..f)
        .map(|i| {
            (
                state.plus(i).cumulative_integral(),
                state.minus(i).cumulative_integral(),
            )
        })
        .collect();

    for k in 0..grid.n_points() {
        let mut row = vec![fmt(grid.x(k))];
        let mut rho_total = 0.0;
        for i in 0..f {
            let p = state.plus(i).values()[k];
            let m = state.minus(i).values()[k];
            let tot = totals[i].values()[k].norm_sqr();
            rho_total += tot;
            row.push(fmt(p.re));
            row.push(fmt(p.im));
            row.push(fmt(m.re));
            row.push(fmt(m.im));
            row.push(fmt(p.norm_sqr()));
            row.push(fmt(m.norm_sqr()));
            row.push(fmt(tot));
        }
        if f > 1 {
            row.push(fmt(rho_total));
        }
        for (cp, cm) in &caps {
            row.push(fmt(cp.values()[k].re));
            row.push(fmt(cp.values()[k].im));
            row.push(fmt(cm.values()[k].re));
            row.push(fmt(cm.values()[k].im));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshot_set(dir: &Path, snapshots: &[BipolarState]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (idx, snap) in snapshots.iter().enumerate() {
        write_snapshot_csv(&dir.join(format!("snapshot_{idx:04}.csv")), snap)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    summary: &'a crate::diagnostics::SummaryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    asserts: Option<&'a [AssertOutcome]>,
    config: &'a crate::config::RunConfig,
}

/// Write `config.toml`, `summary.json` and the snapshot CSVs under `dir`.
/// Identical artifacts produce byte-identical files.
pub fn write_outputs(
    artifacts: &RunArtifacts,
    asserts: Option<&[AssertOutcome]>,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), artifacts.config.to_toml())?;

    let doc = SummaryDocument {
        summary: &artifacts.summary,
        asserts,
        config: &artifacts.config,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("summary serializes");
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;

    write_snapshot_set(&dir.join("snapshots"), &artifacts.snapshots)?;
    if let Some(left) = &artifacts.left_snapshots {
        write_snapshot_set(&dir.join("snapshots_left"), left)?;
    }
    if let Some(right) = &artifacts.right_snapshots {
        write_snapshot_set(&dir.join("snapshots_right"), right)?;
    }
    Ok(())
}
