//! Log-scale SVG line charts of trajectory CSVs. Pure text output, no
//! external renderer.

use crate::error::{Error, Result};
use crate::flow::Trajectory;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const FLOOR: f64 = 1e-300;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>, // (t, log10 value)
}

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Render a log-scale chart of the residual norm (and the Lyapunov value
/// when present) against the index column.
pub fn render_svg(traj: &Trajectory) -> Result<String> {
    if traj.samples.is_empty() {
        return Err(Error::MalformedCsv {
            line: 1,
            message: "no samples to plot".into(),
        });
    }

    let logs = |vals: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        vals.into_iter()
            .map(|(t, v)| (t, v.max(FLOOR).log10()))
            .collect()
    };
    let mut series = vec![Series {
        label: "xi_norm",
        color: "#1f77b4",
        points: logs(traj.samples.iter().map(|s| (s.t, s.xi_norm)).collect()),
    }];
    if traj.samples.iter().any(|s| s.v_lyap.is_some()) {
        series.push(Series {
            label: "V",
            color: "#d62728",
            points: logs(
                traj.samples
                    .iter()
                    .filter_map(|s| s.v_lyap.map(|v| (s.t, v)))
                    .collect(),
            ),
        });
    }

    let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(t, y) in &s.points {
            t_min = t_min.min(t);
            t_max = t_max.max(t);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !(t_max > t_min) {
        t_max = t_min + 1.0;
    }
    if !(y_max > y_min) {
        y_max = y_min + 1.0;
    }

    let px = |t: f64| MARGIN_L + (t - t_min) / (t_max - t_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"16\">{}</text>\n",
        MARGIN_L,
        if traj.regime.is_empty() {
            "trajectory"
        } else {
            &traj.regime
        }
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B),
        fmt(WIDTH - MARGIN_R),
        fmt(HEIGHT - MARGIN_B)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B)
    ));

    // y ticks at integer decades
    let lo = y_min.floor() as i64;
    let hi = y_max.ceil() as i64;
    let step = (((hi - lo) as usize / 8).max(1)) as i64;
    let mut dec = lo;
    while dec <= hi {
        let y = py(dec as f64);
        if (MARGIN_T..=HEIGHT - MARGIN_B).contains(&y) {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\"/>\n",
                fmt(MARGIN_L),
                fmt(y),
                fmt(WIDTH - MARGIN_R),
                fmt(y)
            ));
            svg.push_str(&format!(
                "<text x=\"8\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">1e{}</text>\n",
                fmt(y + 4.0),
                dec
            ));
        }
        dec += step;
    }

    // x ticks
    for i in 0..=5 {
        let t = t_min + (t_max - t_min) * i as f64 / 5.0;
        let x = px(t);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(x),
            fmt(HEIGHT - MARGIN_B),
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 6.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{:.3}</text>\n",
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 22.0),
            t
        ));
    }

    for (i, s) in series.iter().enumerate() {
        if s.points.len() == 1 {
            let (t, y) = s.points[0];
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n",
                fmt(px(t)),
                fmt(py(y)),
                s.color
            ));
        } else {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(t, y)| format!("{},{}", fmt(px(t)), fmt(py(y))))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                s.color,
                pts.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" fill=\"{}\">{}</text>\n",
            fmt(WIDTH - MARGIN_R - 90.0),
            fmt(MARGIN_T + 18.0 * (i + 1) as f64),
            s.color,
            s.label
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
