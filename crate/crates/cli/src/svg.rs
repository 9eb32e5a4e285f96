//! Hand-assembled SVG 1.1 renderers: a two-panel log-scale line chart for
//! convergence traces and a filled heatmap with a colorbar for contour
//! grids. No external assets; every byte is produced here, and all
//! coordinates are written with fixed precision so equal inputs render to
//! byte-identical documents.

use std::fmt::Write as _;

/// One panel of a line chart: a title and (x, y) samples. Non-positive y
/// values cannot appear on a log axis and are skipped.
pub struct Panel {
    pub title: String,
    pub points: Vec<(f64, f64)>,
}

const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

/// Side-by-side log-y line panels sharing axis labels.
pub fn two_panel_log_chart(panels: &[Panel], x_label: &str, y_label: &str) -> String {
    let (pw, ph) = (400.0, 300.0);
    let (x0, y0) = (80.0, 46.0);
    let stride = pw + 140.0;
    let width = x0 + stride * (panels.len() as f64 - 1.0) + pw + 40.0;
    let height = y0 + ph + 64.0;
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" \
         height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    );
    for (idx, panel) in panels.iter().enumerate() {
        let px = x0 + stride * idx as f64;
        render_log_panel(&mut s, panel, px, y0, pw, ph, x_label, idx == 0, y_label);
    }
    s.push_str("</svg>\n");
    s
}

#[allow(clippy::too_many_arguments)]
fn render_log_panel(
    s: &mut String,
    panel: &Panel,
    x0: f64,
    y0: f64,
    pw: f64,
    ph: f64,
    x_label: &str,
    label_y: bool,
    y_label: &str,
) {
    let pos: Vec<(f64, f64)> = panel
        .points
        .iter()
        .copied()
        .filter(|&(_, y)| y.is_finite() && y > 0.0)
        .collect();
    let _ = write!(
        s,
        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" \
         fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n\
         <text x=\"{tx:.2}\" y=\"{ty:.2}\" {FONT} font-size=\"15\" \
         text-anchor=\"middle\">{title}</text>\n",
        tx = x0 + pw / 2.0,
        ty = y0 - 14.0,
        title = escape(&panel.title),
    );
    if pos.is_empty() {
        let _ = write!(
            s,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" {FONT} font-size=\"13\" \
             text-anchor=\"middle\">no positive values</text>\n",
            x = x0 + pw / 2.0,
            y = y0 + ph / 2.0,
        );
        return;
    }
    let xmax = pos.iter().map(|p| p.0).fold(1.0_f64, f64::max);
    let lo = pos.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pos.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut dec_lo = lo.log10().floor() as i64;
    let mut dec_hi = hi.log10().ceil() as i64;
    if dec_lo == dec_hi {
        dec_hi += 1;
    }
    // At most ~9 decade labels; thin out wide ranges.
    let step = (((dec_hi - dec_lo) as f64) / 8.0).ceil().max(1.0) as i64;
    while (dec_hi - dec_lo) % step != 0 {
        dec_lo -= 1;
    }
    let span = (dec_hi - dec_lo) as f64;
    let map_x = |v: f64| x0 + (v / xmax) * pw;
    let map_y = |v: f64| y0 + ph - ((v.log10() - dec_lo as f64) / span) * ph;

    let mut dec = dec_lo;
    while dec <= dec_hi {
        let y = y0 + ph - ((dec - dec_lo) as f64 / span) * ph;
        let _ = write!(
            s,
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n\
             <text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"11\" \
             text-anchor=\"end\">1e{dec}</text>\n",
            x1 = x0 + pw,
            lx = x0 - 6.0,
            ly = y + 4.0,
        );
        dec += step;
    }
    for i in 0..5 {
        let v = xmax * i as f64 / 4.0;
        let x = map_x(v);
        let _ = write!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#444444\" stroke-width=\"1\"/>\n\
             <text x=\"{x:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"11\" \
             text-anchor=\"middle\">{v:.0}</text>\n",
            y1 = y0 + ph,
            y2 = y0 + ph + 5.0,
            ly = y0 + ph + 18.0,
        );
    }
    let mut pts = String::new();
    for &(x, y) in &pos {
        let _ = write!(pts, "{:.2},{:.2} ", map_x(x), map_y(y));
    }
    let _ = write!(
        s,
        "<polyline points=\"{pts}\" fill=\"none\" stroke=\"#1f77b4\" \
         stroke-width=\"1.5\"/>\n\
         <text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"13\" \
         text-anchor=\"middle\">{xl}</text>\n",
        pts = pts.trim_end(),
        lx = x0 + pw / 2.0,
        ly = y0 + ph + 42.0,
        xl = escape(x_label),
    );
    if label_y {
        let _ = write!(
            s,
            "<text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"13\" \
             text-anchor=\"middle\" transform=\"rotate(-90 {lx:.2} {ly:.2})\">{yl}</text>\n",
            lx = x0 - 52.0,
            ly = y0 + ph / 2.0,
            yl = escape(y_label),
        );
    }
}

/// Filled heatmap over an `nx × ny` grid, row-major with the x axis
/// outermost, plus a colorbar. `None` cells render gray ("infeasible").
pub fn heatmap(
    x_ticks: &[f64],
    y_ticks: &[f64],
    values: &[Option<f64>],
    x_label: &str,
    y_label: &str,
    legend_label: &str,
) -> String {
    let nx = x_ticks.len();
    let ny = y_ticks.len();
    let (x0, y0, pw, ph) = (90.0, 34.0, 560.0, 420.0);
    let width = x0 + pw + 150.0;
    let height = y0 + ph + 66.0;
    let cw = pw / nx as f64;
    let ch = ph / ny as f64;
    let feasible: Vec<f64> = values.iter().flatten().copied().collect();
    let vmin = feasible.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = feasible.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = |v: f64| {
        if !vmin.is_finite() || vmax <= vmin {
            0.5
        } else {
            (v - vmin) / (vmax - vmin)
        }
    };
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" \
         height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    );
    for i in 0..nx {
        for j in 0..ny {
            let color = match values[i * ny + j] {
                Some(v) => viridis(norm(v)),
                None => "#d4d4d4".to_string(),
            };
            let _ = write!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
                 fill=\"{color}\"/>\n",
                x = x0 + i as f64 * cw,
                y = y0 + ph - (j + 1) as f64 * ch,
                w = cw + 0.5,
                h = ch + 0.5,
            );
        }
    }
    let _ = write!(
        s,
        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" \
         fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n"
    );
    let xstride = (nx as f64 / 6.0).ceil().max(1.0) as usize;
    for i in (0..nx).step_by(xstride) {
        let x = x0 + (i as f64 + 0.5) * cw;
        let _ = write!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#444444\" stroke-width=\"1\"/>\n\
             <text x=\"{x:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"11\" \
             text-anchor=\"middle\">{t}</text>\n",
            y1 = y0 + ph,
            y2 = y0 + ph + 5.0,
            ly = y0 + ph + 18.0,
            t = fmt_g(x_ticks[i]),
        );
    }
    let ystride = (ny as f64 / 6.0).ceil().max(1.0) as usize;
    for j in (0..ny).step_by(ystride) {
        let y = y0 + ph - (j as f64 + 0.5) * ch;
        let _ = write!(
            s,
            "<line x1=\"{x1:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" \
             stroke=\"#444444\" stroke-width=\"1\"/>\n\
             <text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"11\" \
             text-anchor=\"end\">{t}</text>\n",
            x1 = x0 - 5.0,
            lx = x0 - 8.0,
            ly = y + 4.0,
            t = fmt_g(y_ticks[j]),
        );
    }
    let _ = write!(
        s,
        "<text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"13\" \
         text-anchor=\"middle\">{xl}</text>\n",
        lx = x0 + pw / 2.0,
        ly = y0 + ph + 44.0,
        xl = escape(x_label),
    );
    let _ = write!(
        s,
        "<text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {lx:.2} {ly:.2})\">{yl}</text>\n",
        lx = x0 - 58.0,
        ly = y0 + ph / 2.0,
        yl = escape(y_label),
    );
    // Colorbar: 32 sampled swatches, max at the top.
    let (bx, bw, segs) = (x0 + pw + 28.0, 18.0, 32usize);
    for k in 0..segs {
        let t = (segs - 1 - k) as f64 / (segs - 1) as f64;
        let _ = write!(
            s,
            "<rect x=\"{bx:.2}\" y=\"{y:.2}\" width=\"{bw:.2}\" height=\"{h:.2}\" \
             fill=\"{c}\"/>\n",
            y = y0 + k as f64 * ph / segs as f64,
            h = ph / segs as f64 + 0.5,
            c = viridis(t),
        );
    }
    let _ = write!(
        s,
        "<rect x=\"{bx:.2}\" y=\"{y0:.2}\" width=\"{bw:.2}\" height=\"{ph:.2}\" \
         fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n"
    );
    if vmin.is_finite() {
        let _ = write!(
            s,
            "<text x=\"{tx:.2}\" y=\"{ty1:.2}\" {FONT} font-size=\"11\">{hi}</text>\n\
             <text x=\"{tx:.2}\" y=\"{ty2:.2}\" {FONT} font-size=\"11\">{lo}</text>\n",
            tx = bx + bw + 6.0,
            ty1 = y0 + 10.0,
            ty2 = y0 + ph,
            hi = fmt_g(vmax),
            lo = fmt_g(vmin),
        );
    }
    let _ = write!(
        s,
        "<text x=\"{lx:.2}\" y=\"{ly:.2}\" {FONT} font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {lx:.2} {ly:.2})\">{t}</text>\n",
        lx = bx + bw + 52.0,
        ly = y0 + ph / 2.0,
        t = escape(legend_label),
    );
    let _ = write!(
        s,
        "<rect x=\"{bx:.2}\" y=\"{y:.2}\" width=\"12\" height=\"12\" fill=\"#d4d4d4\" \
         stroke=\"#444444\" stroke-width=\"0.5\"/>\n\
         <text x=\"{tx:.2}\" y=\"{ty:.2}\" {FONT} font-size=\"11\">infeasible</text>\n",
        y = y0 + ph + 26.0,
        tx = bx + 17.0,
        ty = y0 + ph + 36.0,
    );
    s.push_str("</svg>\n");
    s
}

/// Three-stop perceptual ramp (dark violet, teal, yellow), `t` in [0, 1].
fn viridis(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 3] = [
        (0.267, 0.005, 0.329),
        (0.128, 0.567, 0.551),
        (0.993, 0.906, 0.144),
    ];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, frac) = if t <= 1.0 {
        (STOPS[0], STOPS[1], t)
    } else {
        (STOPS[1], STOPS[2], t - 1.0)
    };
    let ch = |lo: f64, hi: f64| ((lo + (hi - lo) * frac) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(a.0, b.0),
        ch(a.1, b.1),
        ch(a.2, b.2)
    )
}

/// Compact tick label: plain decimal in a middle range, scientific
/// outside it.
fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.001..10000.0).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
