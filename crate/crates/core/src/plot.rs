//! SVG charts for spectra, loss curves and importance bars.

use plotters::prelude::*;

use crate::error::{Error, Result};

const SIZE: (u32, u32) = (800, 480);

fn draw_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::InvalidInput(format!("plot: {e:?}"))
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    Some((lo - pad, hi + pad))
}

/// Line chart of named `(x, y)` series. `log_y` plots `log10(y)` for positive values.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
    log_y: bool,
) -> Result<String> {
    let tf = |y: f64| if log_y { y.max(1e-300).log10() } else { y };
    let pts: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(n, p)| (n.clone(), p.iter().map(|&(x, y)| (x, tf(y))).collect()))
        .collect();
    let (x0, x1) = bounds(pts.iter().flat_map(|s| s.1.iter().map(|p| p.0)))
        .ok_or_else(|| Error::InvalidInput("plot: no finite points".into()))?;
    let (y0, y1) = bounds(pts.iter().flat_map(|s| s.1.iter().map(|p| p.1)))
        .ok_or_else(|| Error::InvalidInput("plot: no finite points".into()))?;
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(draw_err)?;
        let y_desc = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(y_desc)
            .draw()
            .map_err(draw_err)?;
        for (i, (name, p)) in pts.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(p.iter().copied(), color.stroke_width(2)))
                .map_err(draw_err)?
                .label(name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        }
        if pts.len() > 1 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(draw_err)?;
        }
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

/// Horizontal bar chart, first item on top.
pub fn bar_chart(title: &str, value_label: &str, bars: &[(String, f64)]) -> Result<String> {
    if bars.is_empty() {
        return Err(Error::InvalidInput("plot: no bars".into()));
    }
    let hi = bars.iter().map(|b| b.1).fold(0.0_f64, f64::max);
    let lo = bars.iter().map(|b| b.1).fold(0.0_f64, f64::min);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = bars.len();
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (SIZE.0, 80 + 24 * n as u32)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(170)
            .build_cartesian_2d(lo - 0.02 * span..hi + 0.05 * span, (0..n).into_segmented())
            .map_err(draw_err)?;
        // row k from the bottom shows bar n - 1 - k
        let name_of = |k: usize| bars[n - 1 - k].0.clone();
        chart
            .configure_mesh()
            .disable_y_mesh()
            .x_desc(value_label)
            .y_labels(n)
            .y_label_formatter(&|y| match y {
                SegmentValue::CenterOf(k) if *k < n => name_of(*k),
                _ => String::new(),
            })
            .draw()
            .map_err(draw_err)?;
        chart
            .draw_series(bars.iter().enumerate().map(|(i, (_, v))| {
                let k = n - 1 - i;
                let mut r = Rectangle::new(
                    [(0.0, SegmentValue::Exact(k)), (*v, SegmentValue::Exact(k + 1))],
                    BLUE.mix(0.7).filled(),
                );
                r.set_margin(3, 3, 0, 0);
                r
            }))
            .map_err(draw_err)?;
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}
