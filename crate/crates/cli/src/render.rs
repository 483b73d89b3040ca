//! Heatmaps of two-dimensional measures as binary PPM images.

use gmc_core::measures::MeasureTable;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("heatmaps need a d=2 measure; for d=1 plot the measure CSV columns x and log_mass as a line")]
    OneDimensional,
    #[error("the measure has no positive cell to anchor the color scale")]
    NoPositiveMass,
    #[error("{0} rows do not form a square grid")]
    NotSquare(usize),
    #[error("unknown {what} '{value}'")]
    Unknown { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Colormap {
    Viridis,
    Gray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    Linear,
    Log10,
}

impl FromStr for Colormap {
    type Err = RenderError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "viridis" => Ok(Colormap::Viridis),
            "gray" => Ok(Colormap::Gray),
            _ => Err(RenderError::Unknown {
                what: "colormap",
                value: s.into(),
            }),
        }
    }
}

impl FromStr for Scale {
    type Err = RenderError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log10" => Ok(Scale::Log10),
            "linear" => Ok(Scale::Linear),
            _ => Err(RenderError::Unknown {
                what: "scale",
                value: s.into(),
            }),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log10 => "log10",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSpec {
    pub colormap: Colormap,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderReport {
    pub width: usize,
    pub height: usize,
    pub cells_per_axis: usize,
    /// Cells with mass ≤ 0 drawn at the floor (the smallest positive mass).
    pub floored_cells: usize,
    pub log10_min_positive: f64,
    pub log10_max: f64,
    /// `log10(max / positive min)`: decades spanned by the color bar.
    pub decades: f64,
    /// Decade exponents with a tick on the color bar (log scale only).
    pub ticks: Vec<i64>,
}

impl RenderReport {
    pub fn dynamic_range(&self) -> f64 {
        10f64.powf(self.decades)
    }
}

const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

fn color(map: Colormap, v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    match map {
        Colormap::Gray => {
            let g = (v * 255.0).round() as u8;
            [g, g, g]
        }
        Colormap::Viridis => {
            let x = v * (VIRIDIS.len() - 1) as f64;
            let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
            let f = x - i as f64;
            let mut out = [0u8; 3];
            for (c, o) in out.iter_mut().enumerate() {
                *o = (VIRIDIS[i][c] * (1.0 - f) + VIRIDIS[i + 1][c] * f).round() as u8;
            }
            out
        }
    }
}

/// 3×5 glyphs for digits and the minus sign, one row per entry, high bit left.
fn glyph(c: char) -> [u8; 5] {
    match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        '-' => [0, 0, 7, 0, 0],
        _ => [0; 5],
    }
}

struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            pixels: vec![[255; 3]; width * height],
        }
    }

    fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.width && y < self.height {
            self.pixels[y * self.width + x] = c;
        }
    }

    fn text(&mut self, x: usize, y: usize, s: &str) {
        for (k, ch) in s.chars().enumerate() {
            for (row, bits) in glyph(ch).iter().enumerate() {
                for col in 0..3 {
                    if bits >> (2 - col) & 1 == 1 {
                        self.put(x + 4 * k + col, y + row, [0; 3]);
                    }
                }
            }
        }
    }

    fn ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

const BAR_GAP: usize = 4;
const BAR_WIDTH: usize = 12;
const LABEL_WIDTH: usize = 24;
const MIN_HEIGHT: usize = 64;

/// One pixel per cell (row 0 of the image is the top of the domain) and a
/// color bar on the right with a tick and label at every decade.
pub fn render_heatmap(table: &MeasureTable, spec: RenderSpec) -> Result<(Vec<u8>, RenderReport), RenderError> {
    if table.dimension != 2 {
        return Err(RenderError::OneDimensional);
    }
    let cells = table.rows.len();
    let n = (cells as f64).sqrt().round() as usize;
    if n * n != cells || n == 0 {
        return Err(RenderError::NotSquare(cells));
    }
    let log10 = std::f64::consts::LN_10;
    let positive: Vec<f64> = table.rows.iter().filter(|r| r.sign > 0).map(|r| r.log_mass / log10).collect();
    if positive.is_empty() {
        return Err(RenderError::NoPositiveMass);
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floored_cells = cells - positive.len();
    let span = hi - lo;
    let level = |l10: f64| -> f64 {
        if span <= 0.0 {
            return 1.0;
        }
        match spec.scale {
            Scale::Log10 => (l10 - lo) / span,
            Scale::Linear => (10f64.powf(l10 - hi) - 10f64.powf(lo - hi)) / (1.0 - 10f64.powf(lo - hi)),
        }
    };

    let height = n.max(MIN_HEIGHT);
    let width = n + BAR_GAP + BAR_WIDTH + 3 + LABEL_WIDTH;
    let mut canvas = Canvas::new(width, height);
    for r in &table.rows {
        let (x, y) = (r.index % n, r.index / n);
        let l10 = if r.sign > 0 { r.log_mass / log10 } else { lo };
        canvas.put(x, n - 1 - y, color(spec.colormap, level(l10)));
    }
    let bar_x = n + BAR_GAP;
    for py in 0..height {
        let v = 1.0 - py as f64 / (height - 1) as f64;
        for px in 0..BAR_WIDTH {
            canvas.put(bar_x + px, py, color(spec.colormap, v));
        }
    }
    let mut ticks = Vec::new();
    if spec.scale == Scale::Log10 && span > 0.0 {
        let first = lo.ceil() as i64;
        let last = hi.floor() as i64;
        let count = (last - first + 1).max(0) as usize;
        // Thin the labels when decades are closer than a glyph height.
        let stride = (count * 7).div_ceil(height).max(1);
        for (k, e) in (first..=last).enumerate() {
            let py = ((hi - e as f64) / span * (height - 1) as f64).round() as usize;
            for px in 0..3 {
                canvas.put(bar_x + BAR_WIDTH + px, py, [0; 3]);
            }
            if k % stride == 0 {
                let y = py.saturating_sub(2).min(height.saturating_sub(5));
                canvas.text(bar_x + BAR_WIDTH + 4, y, &e.to_string());
            }
            ticks.push(e);
        }
    }
    let report = RenderReport {
        width,
        height,
        cells_per_axis: n,
        floored_cells,
        log10_min_positive: lo,
        log10_max: hi,
        decades: span,
        ticks,
    };
    Ok((canvas.ppm(), report))
}
