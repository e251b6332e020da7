//! Grayscale rasterization of point clouds and PGM output.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sets::PointCloud;
use crate::spaces::{chart_project, ChartPoint, SpaceModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub width: usize,
    pub height: usize,
    /// Replace the ranges by the data's 1st–99th percentile box, widened 5%.
    pub autoscale: bool,
}

impl Viewport {
    pub fn auto(width: usize, height: usize) -> Self {
        Viewport {
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            width,
            height,
            autoscale: true,
        }
    }

    pub fn fixed(x_range: (f64, f64), y_range: (f64, f64), width: usize, height: usize) -> Self {
        Viewport {
            x_range,
            y_range,
            width,
            height,
            autoscale: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::input("image dimensions must be at least 1x1"));
        }
        if !self.autoscale {
            let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
            if !ok(self.x_range) || !ok(self.y_range) {
                return Err(Error::input("viewport ranges must be finite and nondegenerate"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first. 255 is background.
    pub pixels: Vec<u8>,
}

impl ImageGrid {
    pub fn blank(width: usize, height: usize) -> Self {
        ImageGrid {
            width,
            height,
            pixels: vec![255; width * height],
        }
    }

    pub fn dark_pixels(&self) -> usize {
        self.pixels.iter().filter(|p| **p < 255).count()
    }
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: ImageGrid,
    /// The viewport actually used (after autoscaling).
    pub viewport: Viewport,
    /// Points dropped before rasterization (near the chart's line at infinity).
    pub dropped: usize,
    pub warning: Option<String>,
}

/// Plane coordinates for rendering: Euclidean 2-D as is, circle angles on the
/// unit circle with angle 0 at the top, projective points through the
/// `z = 1` chart (points with `|z| ≤ chart_threshold` are dropped).
pub fn plane_coords(cloud: &PointCloud, chart_threshold: f64) -> Result<(Vec<[f64; 2]>, usize)> {
    let mut out = Vec::with_capacity(cloud.len());
    let mut dropped = 0;
    match cloud.space() {
        SpaceModel::Euclidean { dim: 2 } => {
            out.extend(cloud.points().iter().map(|p| [p.coords()[0], p.coords()[1]]));
        }
        SpaceModel::Circle => {
            out.extend(cloud.points().iter().map(|p| {
                let (s, c) = p.coords()[0].sin_cos();
                [s, c]
            }));
        }
        SpaceModel::Projective2 => {
            for p in cloud.points() {
                match chart_project(p, chart_threshold)? {
                    ChartPoint::Finite(xy) => out.push(xy),
                    ChartPoint::NearInfinity => dropped += 1,
                }
            }
        }
        other => {
            return Err(Error::input(format!("cannot render points of space {other}")));
        }
    }
    Ok((out, dropped))
}

fn percentile_bounds(mut vals: Vec<f64>) -> (f64, f64) {
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    let rank = |q: f64| vals[((q * (n - 1) as f64).round() as usize).min(n - 1)];
    let (lo, hi) = (rank(0.01), rank(0.99));
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Rasterizes a cloud. Pixel intensity is
/// `255 − min(255, round(255·ln(1+hits)/ln(1+max_hits)))`.
pub fn rasterize(cloud: &PointCloud, vp: &Viewport, chart_threshold: f64) -> Result<Rendered> {
    let (pts, dropped) = plane_coords(cloud, chart_threshold)?;
    rasterize_points(&pts, vp, dropped)
}

pub fn rasterize_points(pts: &[[f64; 2]], vp: &Viewport, dropped: usize) -> Result<Rendered> {
    vp.validate()?;
    let mut viewport = *vp;
    if vp.autoscale && !pts.is_empty() {
        viewport.x_range = percentile_bounds(pts.iter().map(|p| p[0]).collect());
        viewport.y_range = percentile_bounds(pts.iter().map(|p| p[1]).collect());
        viewport.autoscale = false;
    }
    let (w, h) = (viewport.width, viewport.height);
    let mut hits = vec![0u32; w * h];
    let (x0, x1) = viewport.x_range;
    let (y0, y1) = viewport.y_range;
    for p in pts {
        let fx = (p[0] - x0) / (x1 - x0);
        let fy = (y1 - p[1]) / (y1 - y0);
        if !(0.0..=1.0).contains(&fx) || !(0.0..=1.0).contains(&fy) {
            continue;
        }
        let col = ((fx * w as f64) as usize).min(w - 1);
        let row = ((fy * h as f64) as usize).min(h - 1);
        hits[row * w + col] += 1;
    }
    let max_hits = hits.iter().copied().max().unwrap_or(0);
    let mut image = ImageGrid::blank(w, h);
    let warning = if max_hits == 0 {
        Some(if pts.is_empty() {
            "no drawable points (all clipped near infinity)".to_string()
        } else {
            "all points fall outside the viewport".to_string()
        })
    } else {
        let denom = (1.0 + max_hits as f64).ln();
        for (px, &n) in image.pixels.iter_mut().zip(&hits) {
            if n > 0 {
                let shade = (255.0 * (1.0 + n as f64).ln() / denom).round().min(255.0);
                *px = 255 - shade as u8;
            }
        }
        None
    };
    Ok(Rendered {
        image,
        viewport,
        dropped,
        warning,
    })
}

/// Binary PGM: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn encode_pgm(img: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Plain PGM (`P2`), one image row per line.
pub fn encode_pgm_ascii(img: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", img.width, img.height);
    for row in img.pixels.chunks(img.width.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_pgm(img: &ImageGrid, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn write_pgm_ascii(img: &ImageGrid, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm_ascii(img)).map_err(|e| Error::io(path, e))
}
