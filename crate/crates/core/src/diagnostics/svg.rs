//! Minimal SVG output: line charts and quiver panels.

use std::fmt::Write as _;

use super::energy::EnergySpectrum;
use super::field::RzField;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One named polyline.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 <= b.0 {
        b.1 = b.0 + 1.0;
    }
    if b.3 <= b.2 {
        b.3 = b.2 + 1.0;
    }
    b
}

/// Line chart with axis labels and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#, sx(xv), H - PAD + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#, PAD - 4.0, sy(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = PAD + 14.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, W - PAD - 90.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}

/// `log10 |E(k, t)|` curves for the listed wavenumbers.
pub fn energy_history(energies: &[EnergySpectrum], ks: &[f64]) -> String {
    let labels: Vec<String> = ks.iter().map(|k| format!("k={k}")).collect();
    let series: Vec<Series> = ks
        .iter()
        .zip(&labels)
        .map(|(&k, label)| Series {
            label,
            points: energies
                .iter()
                .filter_map(|e| e.at(k).map(|v| (e.t, v.abs().max(1e-300).log10())))
                .collect(),
        })
        .collect();
    line_chart("Energy of Fourier components", "t", "log10 |E(k,t)|", &series)
}

/// Side-by-side quiver panels with a shared arrow scale.
pub fn quiver_panels(fields: &[&RzField]) -> String {
    let panel_w = 260.0;
    let panel_h = 420.0;
    let width = PAD + fields.len() as f64 * (panel_w + PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" font-family="sans-serif" font-size="12">"#,
        panel_h + 2.0 * PAD
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let vmax = fields.iter().map(|f| f.max_speed()).fold(0.0, f64::max).max(1e-300);
    for (p, f) in fields.iter().enumerate() {
        let ox = PAD + p as f64 * (panel_w + PAD);
        let (r0, r1) = (f.r[0], *f.r.last().unwrap_or(&f.r[0]));
        let lambda = f.wavelength();
        let sx = |r: f64| ox + (r - r0) / (r1 - r0).max(1e-300) * panel_w;
        let sy = |z: f64| PAD + panel_h - z / lambda * panel_h;
        let _ = writeln!(
            s,
            r#"<rect x="{ox}" y="{PAD}" width="{panel_w}" height="{panel_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            ox + panel_w / 2.0,
            PAD - 10.0,
            f.selector.label()
        );
        let stride_r = (f.r.len() / 16).max(1);
        let stride_z = (f.z.len() / 24).max(1);
        let arrow = 0.9 * (panel_w / 16.0);
        for iz in (0..f.z.len()).step_by(stride_z) {
            for ir in (0..f.r.len()).step_by(stride_r) {
                let (ur, uz) = f.at(iz, ir);
                let (x, y) = (sx(f.r[ir]), sy(f.z[iz]));
                let (dx, dy) = (ur / vmax * arrow, -uz / vmax * arrow);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="0.8"/>"#,
                    x + dx,
                    y + dy
                );
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.9"/>"#, x + dx, y + dy);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let s = line_chart(
            "t",
            "x",
            "y",
            &[Series {
                label: "a",
                points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(!s.contains("NaN"));
    }
}
