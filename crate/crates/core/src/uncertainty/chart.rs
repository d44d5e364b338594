//! Grouped bar chart of global value distributions as standalone SVG.

use std::fmt::Write;

use super::distribution::Source;
use super::global::GlobalDistribution;
use crate::ranking::ValueId;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];
const EXPERT_FILL: &str = "#3b3b3b";

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 96.0;

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round-ish upper bound for the y axis.
fn axis_max(peak: f64) -> f64 {
    if peak <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(peak.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * mag >= peak {
            return step * mag;
        }
    }
    10.0 * mag
}

fn fill_of(source: &Source, model_index: usize) -> &'static str {
    match source {
        Source::Experts => EXPERT_FILL,
        Source::Model(_) => PALETTE[model_index % PALETTE.len()],
    }
}

/// Renders one group per value with one bar per source and symmetric
/// error bars of one standard deviation. Expert bars are dark and hatched.
pub fn render_global_chart(dist: &GlobalDistribution, title: &str) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let peak = dist
        .sources
        .iter()
        .flat_map(|s| s.mean.iter().zip(&s.std).map(|(m, d)| m + d))
        .fold(0.0, f64::max);
    let ymax = axis_max(peak);
    let y = |v: f64| TOP + plot_h - v / ymax * plot_h;

    let groups = dist.values.len().max(1);
    let group_w = plot_w / groups as f64;
    let bars = dist.sources.len().max(1);
    let bar_w = group_w * 0.8 / bars as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"##,
        w = num(WIDTH),
        h = num(HEIGHT)
    );
    s.push_str(concat!(
        "<defs><pattern id=\"expert-hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">",
        "<rect width=\"6\" height=\"6\" fill=\"#3b3b3b\"/><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#ffffff\" stroke-width=\"1.5\"/>",
        "</pattern></defs>\n"
    ));
    let _ = writeln!(s, r##"<rect width="{}" height="{}" fill="#ffffff"/>"##, num(WIDTH), num(HEIGHT));
    let _ = writeln!(
        s,
        r##"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"##,
        num(LEFT + plot_w / 2.0),
        escape(title)
    );

    for i in 0..=5 {
        let v = ymax * i as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd"/>"##,
            num(LEFT),
            num(yy),
            num(LEFT + plot_w),
            num(yy)
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
            num(LEFT - 6.0),
            num(yy + 4.0),
            num(v)
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">total assignments</text>"##,
        num(TOP + plot_h / 2.0),
        num(TOP + plot_h / 2.0)
    );

    for (g, value) in dist.values.iter().enumerate() {
        let gx = LEFT + g as f64 * group_w + group_w * 0.1;
        let mut model_index = 0;
        for (b, src) in dist.sources.iter().enumerate() {
            let fill = match src.source {
                Source::Experts => "url(#expert-hatch)".to_string(),
                Source::Model(_) => {
                    let f = fill_of(&src.source, model_index).to_string();
                    model_index += 1;
                    f
                }
            };
            let mean = src.mean[g];
            let sd = src.std[g];
            let x = gx + b as f64 * bar_w;
            let _ = writeln!(
                s,
                r##"<rect class="bar" data-source="{}" data-value="{}" data-mean="{}" data-std="{}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#222222" stroke-width="0.5"/>"##,
                escape(&src.source.label()),
                escape(value),
                mean,
                sd,
                num(x),
                num(y(mean)),
                num(bar_w),
                num(y(0.0) - y(mean)),
                fill
            );
            let cx = x + bar_w / 2.0;
            let (lo, hi) = (y((mean - sd).max(0.0)), y(mean + sd));
            let _ = writeln!(
                s,
                r##"<path class="err" d="M{cx} {lo}V{hi}M{l} {lo}H{r}M{l} {hi}H{r}" stroke="#000000" fill="none"/>"##,
                cx = num(cx),
                lo = num(lo),
                hi = num(hi),
                l = num(cx - bar_w / 4.0),
                r = num(cx + bar_w / 4.0)
            );
        }
        let lx = LEFT + g as f64 * group_w + group_w / 2.0;
        let ly = TOP + plot_h + 14.0;
        let _ = writeln!(
            s,
            r##"<text x="{x}" y="{y}" text-anchor="end" transform="rotate(-35 {x} {y})">{}</text>"##,
            escape(&ValueId::new(value).display_name()),
            x = num(lx),
            y = num(ly)
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000"/>"##,
        num(LEFT),
        num(y(0.0)),
        num(LEFT + plot_w),
        num(y(0.0))
    );

    let lx = LEFT + plot_w + 20.0;
    let mut model_index = 0;
    for (i, src) in dist.sources.iter().enumerate() {
        let ly = TOP + 10.0 + i as f64 * 22.0;
        let fill = match src.source {
            Source::Experts => "url(#expert-hatch)".to_string(),
            Source::Model(_) => {
                let f = fill_of(&src.source, model_index).to_string();
                model_index += 1;
                f
            }
        };
        let _ = writeln!(
            s,
            r##"<rect class="legend" x="{}" y="{}" width="14" height="14" fill="{}" stroke="#222222" stroke-width="0.5"/>"##,
            num(lx),
            num(ly),
            fill
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}">{}</text>"##,
            num(lx + 20.0),
            num(ly + 11.0),
            escape(&src.source.label())
        );
    }
    s.push_str("</svg>\n");
    s
}
