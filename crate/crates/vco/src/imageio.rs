//! Grayscale frame IO (PNG, PGM) and centerline overlays.

use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use vco_core::mrf::MatchedPoint;
use vco_core::{GrayImage, Pixel, VesselGraph};

use crate::{Failure, Outcome};

/// Reads any supported image and converts it to 8-bit luma.
pub fn read_gray(path: &Path) -> Outcome<GrayImage> {
    let img = image::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?.to_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w as usize, h as usize, img.into_raw()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Writes PNG, or binary PGM when the extension is `.pgm`.
pub fn write_gray(path: &Path, img: &GrayImage) -> Outcome<()> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    };
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .ok_or_else(|| Failure::Output("image buffer size mismatch".into()))?;
    buf.save_with_format(path, format).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

const CENTERLINE: Rgb<u8> = Rgb([255, 40, 40]);
const MATCHED: Rgb<u8> = Rgb([40, 220, 60]);

/// Frame in gray with the centerline in red and matched points in green.
pub fn overlay(frame: &GrayImage, graph: &VesselGraph, matched: &[MatchedPoint]) -> RgbImage {
    let (w, h) = (frame.width(), frame.height());
    let mut out = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = frame.get(x as usize, y as usize);
        Rgb([v, v, v])
    });
    let mut put = |p: Pixel, c: Rgb<u8>| {
        if p.in_bounds(w, h) {
            out.put_pixel(p.x as u32, p.y as u32, c);
        }
    };
    for p in graph.rasterize() {
        put(p, CENTERLINE);
    }
    for m in matched {
        for d in [Pixel::new(0, 0), Pixel::new(1, 0), Pixel::new(-1, 0), Pixel::new(0, 1), Pixel::new(0, -1)] {
            put(m.target + d, MATCHED);
        }
    }
    out
}

pub fn write_overlay(path: &Path, frame: &GrayImage, graph: &VesselGraph, matched: &[MatchedPoint]) -> Outcome<()> {
    overlay(frame, graph, matched)
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_pgm_round_trip() {
        let img = GrayImage::from_fn(20, 17, |x, y| (x * 7 + y * 3) as u8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.png", "a.pgm"] {
            let p = dir.path().join(name);
            write_gray(&p, &img).unwrap();
            assert_eq!(read_gray(&p).unwrap(), img);
        }
    }

    #[test]
    fn unreadable_image_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        std::fs::write(&p, b"not an image").unwrap();
        assert!(matches!(read_gray(&p), Err(Failure::Input(_))));
    }
}
