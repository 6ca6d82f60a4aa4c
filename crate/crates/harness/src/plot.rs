use std::fmt::Write as _;
use std::path::Path;

use cpsid_core::{Peak, Spectrum};

use crate::error::Result;
use crate::io::write_atomic;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a magnitude spectrum with one labelled marker per peak.
///
/// All coordinates are printed with two decimals, so identical inputs give
/// identical bytes.
pub fn render_svg(spec: &Spectrum, peaks: &[Peak], title: &str) -> Result<String> {
    if spec.is_empty() {
        return Err(cpsid_core::Error::InvalidInput("cannot plot an empty spectrum").into());
    }
    let f0 = spec.freqs[0];
    let f1 = *spec.freqs.last().unwrap_or(&f0);
    let span = if f1 > f0 { f1 - f0 } else { 1.0 };
    let ymax = spec.max_magnitude();
    let ymax = if ymax > 0.0 { ymax * 1.1 } else { 1.0 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |f: f64| LEFT + (f - f0) / span * pw;
    let y = |m: f64| TOP + ph - m / ymax * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
        LEFT,
        TOP,
        LEFT,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );

    let first_tick = (f0 / 10.0).ceil() as i64;
    let last_tick = (f1 / 10.0).floor() as i64;
    for k in first_tick..=last_tick {
        let f = k as f64 * 10.0;
        let xf = x(f);
        let _ = writeln!(
            s,
            r#"<line x1="{xf:.2}" y1="{:.2}" x2="{xf:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(s, r#"<text x="{xf:.2}" y="{:.2}" text-anchor="middle">{f}</text>"#, TOP + ph + 18.0);
    }
    for k in 0..=4 {
        let m = ymax * k as f64 / 4.0;
        let ym = y(m);
        let _ =
            writeln!(s, r#"<line x1="{:.2}" y1="{ym:.2}" x2="{LEFT:.2}" y2="{ym:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{m:.2e}</text>"#, LEFT - 8.0, ym + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">frequency (Hz)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">magnitude</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    s.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points=""#);
    for (i, (f, m)) in spec.freqs.iter().zip(&spec.mags).enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", x(*f), y(*m));
    }
    s.push_str("\"/>\n");

    for p in peaks {
        let (px, py) = (x(p.freq_hz), y(p.magnitude));
        let text = match &p.label {
            Some(l) => l.to_string(),
            None => format!("{:.1}", p.freq_hz),
        };
        let _ = writeln!(
            s,
            r#"<g class="peak"><circle cx="{px:.2}" cy="{py:.2}" r="3" fill="crimson"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" fill="crimson">{}</text></g>"#,
            py - 6.0,
            escape(&text)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(spec: &Spectrum, peaks: &[Peak], path: &Path, title: &str) -> Result<()> {
    let svg = render_svg(spec, peaks, title)?;
    write_atomic(path, svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cpsid_core::ComboLabel;
    use num_complex::Complex64;

    fn spectrum() -> Spectrum {
        let freqs: Vec<f64> = (0..=700).map(|i| 270.0 + 0.1 * i as f64).collect();
        let amps = freqs.iter().map(|f| Complex64::new((-(f - 282.0) * (f - 282.0)).exp(), 0.0)).collect();
        Spectrum::new(freqs, amps)
    }

    #[test]
    fn markers_follow_peaks() {
        let spec = spectrum();
        let bare = render_svg(&spec, &[], "t").unwrap();
        assert!(bare.starts_with("<svg"));
        assert!(bare.ends_with("</svg>\n"));
        assert_eq!(bare.matches(r#"class="peak""#).count(), 0);

        let peaks = [
            Peak { freq_hz: 282.0, magnitude: 1.0, index: 120, label: ComboLabel::parse("+A") },
            Peak { freq_hz: 300.0, magnitude: 0.0, index: 300, label: None },
        ];
        let svg = render_svg(&spec, &peaks, "a < b").unwrap();
        assert_eq!(svg.matches(r#"class="peak""#).count(), 2);
        assert!(svg.contains(">+A</text>"));
        assert!(svg.contains(">300.0</text>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg, render_svg(&spec, &peaks, "a < b").unwrap());
    }

    #[test]
    fn empty_spectrum_is_rejected() {
        let spec = Spectrum::new(Vec::new(), Vec::new());
        assert!(render_svg(&spec, &[], "").is_err());
    }

    #[test]
    fn flat_zero_spectrum_renders() {
        let spec = Spectrum::new(vec![1.0, 2.0], vec![Complex64::new(0.0, 0.0); 2]);
        let svg = render_svg(&spec, &[], "").unwrap();
        assert!(!svg.contains("NaN"));
    }
}
