//! CSV and manifest files behind the three cloud figures.
//!
//! Figure 1: both clouds at a symmetric point on the threshold, the line
//! `x = y` and their touch point. Figure 2: both clouds at an asymmetric
//! threshold point with the witness segment and its slope. Figure 3: the
//! witness-region raster at fixed `β`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_file;
use crate::error::{Error, Result};
use crate::graph::Community;
use crate::threshold::{
    boundary_alpha, boundary_alpha_symmetric, cloud_boundary, cloud_exponent, cloud_extreme, find_witness,
    it_value, witness_region, CloudPoint, Rates, CLOUD_LEVEL,
};

/// Figure inputs; `None` rates take the per-figure defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub beta: f64,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Vertices per cloud polyline.
    pub points: usize,
    pub a1_range: (f64, f64),
    pub a2_range: (f64, f64),
    pub resolution: (usize, usize),
}

impl Default for FigureSpec {
    fn default() -> Self {
        Self {
            beta: 10.0,
            alpha1: None,
            alpha2: None,
            points: 720,
            a1_range: (10.0, 40.0),
            a2_range: (10.0, 40.0),
            resolution: (200, 200),
        }
    }
}

/// `α2` of the asymmetric threshold point in the second figure.
pub const FIG2_ALPHA2: f64 = 12.43;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureFile {
    pub name: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureManifest {
    pub tool: String,
    pub version: String,
    pub figure: u8,
    pub spec: FigureSpec,
    /// Rates actually used (figures 1 and 2).
    pub rates: Option<Rates>,
    pub it: Option<f64>,
    /// Longest segment of either polyline.
    pub polyline_resolution: Option<f64>,
    pub touch_point: Option<(f64, f64)>,
    pub witness_slope: Option<f64>,
    pub witness_gap: Option<f64>,
    pub files: Vec<FigureFile>,
}

fn file(name: &str, columns: &[&str]) -> FigureFile {
    FigureFile {
        name: name.into(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
    }
}

fn polyline_csv(pts: &[CloudPoint]) -> String {
    let mut s = String::from("x,y,exponent\n");
    for p in pts {
        let _ = writeln!(s, "{},{},{}", p.x, p.y, p.exponent);
    }
    s
}

fn max_segment(pts: &[CloudPoint]) -> f64 {
    pts.iter()
        .zip(pts.iter().cycle().skip(1))
        .map(|(a, b)| (a.x - b.x).hypot(a.y - b.y))
        .fold(0.0, f64::max)
}

fn write_clouds(dir: &Path, tag: &str, r: &Rates, points: usize, files: &mut Vec<FigureFile>) -> Result<f64> {
    let c1 = cloud_boundary(Community::One, r, CLOUD_LEVEL, points)?;
    let c2 = cloud_boundary(Community::Two, r, CLOUD_LEVEL, points)?;
    for (k, pts) in [(1, &c1), (2, &c2)] {
        let name = format!("{tag}_cloud{k}.csv");
        write_file(&dir.join(&name), &polyline_csv(pts))?;
        files.push(file(&name, &["x", "y", "exponent"]));
    }
    // The separating line x = y across the plotted extent.
    let top = c1.iter().chain(&c2).map(|p| p.x.max(p.y)).fold(0.0, f64::max) * 1.05;
    let name = format!("{tag}_separator.csv");
    write_file(&dir.join(&name), &format!("x,y\n0,0\n{top},{top}\n"))?;
    files.push(file(&name, &["x", "y"]));
    Ok(max_segment(&c1).max(max_segment(&c2)))
}

fn points_csv(rows: &[(&str, f64, f64, f64)]) -> String {
    let mut s = String::from("label,x,y,exponent\n");
    for (label, x, y, e) in rows {
        let _ = writeln!(s, "{label},{x},{y},{e}");
    }
    s
}

/// Writes figure `which` (1, 2 or 3) into `out` and returns its manifest,
/// also written as `fig<k>_manifest.json`.
pub fn emit_figure_data(which: u8, spec: &FigureSpec, out: &Path) -> Result<FigureManifest> {
    if spec.points < 3 {
        return Err(Error::invalid("polylines need at least 3 points"));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let tag = format!("fig{which}");
    let mut files = Vec::new();
    let mut m = FigureManifest {
        tool: "sbmlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        figure: which,
        spec: spec.clone(),
        rates: None,
        it: None,
        polyline_resolution: None,
        touch_point: None,
        witness_slope: None,
        witness_gap: None,
        files: Vec::new(),
    };
    match which {
        1 | 2 => {
            let (a1, a2) = match (which, spec.alpha1, spec.alpha2) {
                (_, Some(a1), Some(a2)) => (a1, a2),
                (1, None, None) => {
                    let a = boundary_alpha_symmetric(spec.beta)?;
                    (a, a)
                }
                (1, Some(a), None) | (1, None, Some(a)) => (a, a),
                (_, None, a2) => {
                    let a2 = a2.unwrap_or(FIG2_ALPHA2);
                    (boundary_alpha(spec.beta, a2)?, a2)
                }
                (_, Some(_), None) => {
                    return Err(Error::invalid("figure 2 needs alpha2 when alpha1 is given"))
                }
            };
            let r = Rates::new(a1, a2, spec.beta)?;
            let resolution = write_clouds(out, &tag, &r, spec.points, &mut files)?;
            let e1 = cloud_extreme(Community::One, &r)?;
            let e2 = cloud_extreme(Community::Two, &r)?;
            let mut rows = vec![
                ("extreme_c1", e1.point.x, e1.point.y, e1.point.exponent),
                ("extreme_c2", e2.point.x, e2.point.y, e2.point.exponent),
            ];
            if a1 == a2 {
                // Both clouds reach the diagonal at (√(αβ)/2, √(αβ)/2).
                let s = (a1 * spec.beta).sqrt() / 2.0;
                m.touch_point = Some((s, s));
                rows.push(("touch", s, s, cloud_exponent(Community::One, s, s, &r)?));
            }
            let name = format!("{tag}_points.csv");
            write_file(&out.join(&name), &points_csv(&rows))?;
            files.push(file(&name, &["label", "x", "y", "exponent"]));
            // On the threshold the extremes coincide up to rounding.
            if let Some(w) = find_witness(&r)?.filter(|w| w.gap > 1e-9 * (a1 + a2)) {
                let name = format!("{tag}_witness.csv");
                let text = format!(
                    "label,x,y,slope\np1,{},{},{}\np2,{},{},{}\n",
                    w.p1.x, w.p1.y, w.slope, w.p2.x, w.p2.y, w.slope
                );
                write_file(&out.join(&name), &text)?;
                files.push(file(&name, &["label", "x", "y", "slope"]));
                m.witness_slope = Some(w.slope);
                m.witness_gap = Some(w.gap);
            }
            m.it = Some(it_value(a1, a2, spec.beta)?.value);
            m.rates = Some(r);
            m.polyline_resolution = Some(resolution);
        }
        3 => {
            let raster = witness_region(spec.beta, spec.a1_range, spec.a2_range, spec.resolution)?;
            let name = format!("{tag}_region.csv");
            let mut buf = Vec::new();
            raster.write_csv(&mut buf).map_err(|e| Error::io(out.join(&name), e))?;
            let text = String::from_utf8(buf).expect("csv is ascii");
            write_file(&out.join(&name), &text)?;
            files.push(file(&name, &["alpha1", "alpha2", "it", "class"]));
        }
        _ => return Err(Error::invalid(format!("figure must be 1, 2 or 3, got {which}"))),
    }
    m.files = files;
    let text = serde_json::to_string_pretty(&m)? + "\n";
    write_file(&out.join(format!("{tag}_manifest.json")), &text)?;
    Ok(m)
}

/// Reads a polyline written by [`emit_figure_data`].
pub fn read_polyline(path: &Path) -> Result<Vec<CloudPoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: k + 1,
                msg: e.to_string(),
            })?;
        if v.len() != 3 {
            return Err(Error::Parse {
                line: k + 1,
                msg: "expected x,y,exponent".into(),
            });
        }
        out.push(CloudPoint {
            x: v[0],
            y: v[1],
            exponent: v[2],
        });
    }
    Ok(out)
}
