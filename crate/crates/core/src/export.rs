//! Text renderings of results: CSV tables, SVG polylines and JSON with
//! sorted keys.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cauchy::{CauchySolution, SampleStatus};
use crate::error::{Error, Result};
use crate::simulator::GridSolution;

/// JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value keeps maps in a BTreeMap, so a round trip sorts keys
    let v = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// RFC 4180 CSV with a header row.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    // writing to memory cannot fail
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        String::new()
    }
}

fn status_tag(s: &SampleStatus) -> String {
    match s {
        SampleStatus::Regular => "regular".into(),
        SampleStatus::BlownUp { cause } => format!("blown-up:{cause}"),
        SampleStatus::GuardStopped { cause } => format!("guard-stopped:{cause}"),
    }
}

/// One row per sample: `x, y, u, v, u1, u2, status, residual`.
pub fn cauchy_csv(sol: &CauchySolution) -> String {
    let mut rows = Vec::new();
    for (iy, &y) in sol.ys.iter().enumerate() {
        for (ix, &x) in sol.xs.iter().enumerate() {
            rows.push(vec![
                num(x),
                num(y),
                num(sol.u[iy][ix]),
                num(sol.v[iy][ix]),
                num(sol.u1[iy][ix]),
                num(sol.u2[iy][ix]),
                status_tag(&sol.status[iy][ix]),
                sol.residual[iy][ix].map(num).unwrap_or_default(),
            ]);
        }
    }
    csv(&["x", "y", "u", "v", "u1", "u2", "status", "residual"], rows)
}

/// One frame of a string run: `xi, u1, u2`.
pub fn frame_csv(sol: &GridSolution, level: usize) -> String {
    let rows = sol
        .xi
        .iter()
        .zip(&sol.levels[level])
        .map(|(x, w)| vec![num(*x), num(w[0]), num(w[1])]);
    csv(&["xi", "u1", "u2"], rows)
}

/// SVG with one polyline per frame, drawn in the `(u¹, u²)` plane with
/// `u²` upwards.
pub fn frames_svg(frames: &[(f64, Vec<[f64; 2]>)], width: f64, height: f64) -> String {
    let pts = frames
        .iter()
        .flat_map(|(_, f)| f.iter())
        .filter(|p| p[0].is_finite() && p[1].is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let sx = width / (x1 - x0);
    let sy = height / (y1 - y0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    for (i, (tau, frame)) in frames.iter().enumerate() {
        let hue = if frames.len() > 1 {
            240.0 * i as f64 / (frames.len() - 1) as f64
        } else {
            0.0
        };
        let points: Vec<String> = frame
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
            .map(|p| format!("{:.3},{:.3}", (p[0] - x0) * sx, height - (p[1] - y0) * sy))
            .collect();
        let _ = writeln!(
            s,
            r#"  <polyline data-tau="{tau}" fill="none" stroke="hsl({hue:.0},70%,40%)" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[test]
    fn csv_quotes_and_header() {
        let out = csv(&["a", "b"], vec![vec!["1".to_string(), "x,y".to_string()]]);
        assert_eq!(out, "a,b\r\n1,\"x,y\"\r\n");
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = to_sorted_json(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn svg_has_one_polyline_per_frame() {
        let f = vec![(0.0, vec![[0.0, 1.0], [1.0, 1.0]]), (0.5, vec![[0.0, 1.0], [1.0, 0.5]])];
        let s = frames_svg(&f, 200.0, 100.0);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.starts_with("<svg"));
    }
}
