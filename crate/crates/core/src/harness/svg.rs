//! Static SVG risk plots, one per `σ_η²`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::estimators::EstimatorId;
use crate::harness::RiskPoint;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub fn color(id: EstimatorId) -> &'static str {
    match id {
        EstimatorId::Mltn => "#d62728",
        EstimatorId::Ridge => "#2ca02c",
        EstimatorId::Tl => "#1f77b4",
        EstimatorId::Lmmse => "#9467bd",
    }
}

struct Axes {
    x0: f64,
    x1: f64,
    y1: f64,
    log_x: bool,
}

impl Axes {
    fn fit(points: &[RiskPoint], n_ratio: impl Fn(&RiskPoint) -> f64, log_x: bool) -> Axes {
        let xs: Vec<f64> = points.iter().map(&n_ratio).filter(|x| *x > 0.0).collect();
        let tx = |x: f64| if log_x { x.ln() } else { x };
        let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(tx(x)), hi.max(tx(x)))
        });
        if !x0.is_finite() {
            (x0, x1) = if log_x { (0.125f64.ln(), 8f64.ln()) } else { (0.0, 1.0) };
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        // cap at the 90th percentile so interpolation peaks do not flatten the rest
        let mut ys: Vec<f64> = points
            .iter()
            .flat_map(|p| [p.analytic, p.empirical_mean])
            .flatten()
            .filter(|y| y.is_finite())
            .collect();
        ys.sort_by(f64::total_cmp);
        let y1 = if ys.is_empty() {
            1.0
        } else {
            let q = ys[((ys.len() - 1) as f64 * 0.9).round() as usize];
            (1.3 * q).max(1e-12)
        };
        Axes { x0, x1, y1, log_x }
    }

    fn px(&self, x: f64) -> f64 {
        let t = if self.log_x { x.ln() } else { x };
        LEFT + (t - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.y1);
        H - BOTTOM - y / self.y1 * (H - TOP - BOTTOM)
    }
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-12 * step {
        out.push(t);
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// One plot of `points`, with `x = d / n`.
pub fn render_svg(points: &[RiskPoint], log_x: bool, title: &str) -> String {
    let ratio = |p: &RiskPoint| p.gamma_tgt;
    let ax = Axes::fit(points, ratio, log_x);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        (LEFT + W - RIGHT) / 2.0
    );

    // axes
    let (bx0, bx1, by0, by1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{bx0}" y1="{by0}" x2="{bx1}" y2="{by0}"/><line x1="{bx0}" y1="{by0}" x2="{bx0}" y2="{by1}"/></g>"#
    );
    let xticks: Vec<f64> = if log_x {
        let (a, b) = (ax.x0 / 2f64.ln(), ax.x1 / 2f64.ln());
        (a.ceil() as i32..=b.floor() as i32).map(|k| 2f64.powi(k)).collect()
    } else {
        nice_ticks(ax.x0, ax.x1, 6)
    };
    let _ = writeln!(s, r#"<g stroke="black">"#);
    for &t in &xticks {
        let x = ax.px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{by0}" x2="{x:.2}" y2="{}"/>"#, by0 + 5.0);
    }
    for t in nice_ticks(0.0, ax.y1, 5) {
        let y = ax.py(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{bx0}" y2="{y:.2}"/>"#, bx0 - 5.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g text-anchor="middle">"#);
    for &t in &xticks {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}">{}</text>"#, ax.px(t), by0 + 18.0, label(t));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g text-anchor="end">"#);
    for t in nice_ticks(0.0, ax.y1, 5) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}">{}</text>"#,
            bx0 - 8.0,
            ax.py(t) + 4.0,
            label(t)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">d / n</text>"#,
        (bx0 + bx1) / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">test error</text>"#,
        (by0 + by1) / 2.0
    );

    for id in EstimatorId::ALL {
        let mut pts: Vec<&RiskPoint> = points.iter().filter(|p| p.estimator == id).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by_key(|p| p.d);
        let c = color(id);
        let _ = writeln!(s, r#"<g class="{}" stroke="{c}">"#, id.as_str());
        // analytic curve, broken wherever the value is missing or infinite
        let mut seg: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#,
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for p in &pts {
            match p.analytic {
                Some(a) if a.is_finite() => seg.push(format!("{:.2},{:.2}", ax.px(ratio(p)), ax.py(a))),
                Some(a) if a.is_infinite() => {
                    flush(&mut seg, &mut s);
                    let x = ax.px(ratio(p));
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x:.2}" y1="{by0}" x2="{x:.2}" y2="{by1}" stroke-dasharray="4 3" stroke-width="1"/>"#
                    );
                }
                _ => flush(&mut seg, &mut s),
            }
        }
        flush(&mut seg, &mut s);
        for p in &pts {
            let Some(m) = p.empirical_mean.filter(|m| m.is_finite()) else {
                continue;
            };
            let x = ax.px(ratio(p));
            let se = p.empirical_stderr.filter(|v| v.is_finite()).unwrap_or(0.0);
            if se > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                    ax.py(m - se),
                    ax.py(m + se)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, ax.py(m));
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, id) in EstimatorId::ALL.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = W - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 24.0,
            color(*id),
            x + 30.0,
            y + 4.0,
            id.as_str()
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// Writes `risk_eta{k}.svg` into `dir` for the `k`-th smallest `σ_η²`. An empty
/// table still produces one plot with axes only.
pub fn emit_svg(points: &[RiskPoint], dir: &Path, log_x: bool) -> Result<Vec<PathBuf>> {
    let mut levels: Vec<f64> = points.iter().map(|p| p.sigma_eta2).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut paths = Vec::new();
    if levels.is_empty() {
        let path = dir.join("risk_eta0.svg");
        fs::write(&path, render_svg(&[], log_x, "empty"))?;
        paths.push(path);
    }
    for (k, level) in levels.iter().enumerate() {
        let group: Vec<RiskPoint> = points.iter().filter(|p| p.sigma_eta2 == *level).cloned().collect();
        let path = dir.join(format!("risk_eta{k}.svg"));
        fs::write(&path, render_svg(&group, log_x, &format!("sigma_eta^2 = {level}")))?;
        paths.push(path);
    }
    Ok(paths)
}
