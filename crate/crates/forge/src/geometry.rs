//! Point maps for the geometric distortions and inverse-mapping
//! resampling. Coordinates are continuous: pixel `(i, j)` covers
//! `[i, i+1) x [j, j+1)`, so its centre is `(i + 0.5, j + 0.5)`.

use image::{Rgb, RgbImage};

/// Canvas size that holds a `w x h` image rotated by `degrees`:
/// `ceil(w|cos| + h|sin|) x ceil(w|sin| + h|cos|)`.
pub fn rotated_size(w: u32, h: u32, degrees: f64) -> (u32, u32) {
    let (s, c) = degrees.to_radians().sin_cos();
    let (s, c) = (s.abs(), c.abs());
    let (w, h) = (f64::from(w), f64::from(h));
    // the epsilon absorbs rounding at multiples of 90 degrees
    let nw = (w * c + h * s - 1e-6).ceil().max(1.0);
    let nh = (w * s + h * c - 1e-6).ceil().max(1.0);
    (nw as u32, nh as u32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointMap {
    /// Counter-clockwise (as seen on screen) about the image centre, onto
    /// an expanded canvas centred on the same point.
    Rotation {
        sin: f64,
        cos: f64,
        src_center: (f64, f64),
        dst_center: (f64, f64),
    },
    /// Projective map, row-major 3x3, plus its inverse.
    Homography { h: [f64; 9], inv: [f64; 9] },
}

impl PointMap {
    pub fn rotation(w: u32, h: u32, degrees: f64) -> (Self, (u32, u32)) {
        let (sin, cos) = degrees.to_radians().sin_cos();
        let (nw, nh) = rotated_size(w, h, degrees);
        let map = Self::Rotation {
            sin,
            cos,
            src_center: (f64::from(w) / 2.0, f64::from(h) / 2.0),
            dst_center: (f64::from(nw) / 2.0, f64::from(nh) / 2.0),
        };
        (map, (nw, nh))
    }

    /// Maps the corners of a `w x h` image, clockwise from top-left, onto
    /// `dst`. `None` when the corners are degenerate.
    pub fn homography(w: u32, h: u32, dst: [[f64; 2]; 4]) -> Option<Self> {
        let (w, h) = (f64::from(w), f64::from(h));
        let src = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
        let h = solve_homography(src, dst)?;
        let inv = invert3(&h)?;
        Some(Self::Homography { h, inv })
    }

    pub fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Self::Rotation { sin, cos, src_center, dst_center } => {
                let (dx, dy) = (x - src_center.0, y - src_center.1);
                // y grows downward, so a counter-clockwise turn on screen
                // flips the sign of the sine terms relative to the textbook matrix
                (dst_center.0 + dx * cos + dy * sin, dst_center.1 - dx * sin + dy * cos)
            }
            Self::Homography { h, .. } => apply3(&h, x, y),
        }
    }

    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Self::Rotation { sin, cos, src_center, dst_center } => {
                let (dx, dy) = (x - dst_center.0, y - dst_center.1);
                (src_center.0 + dx * cos - dy * sin, src_center.1 + dx * sin + dy * cos)
            }
            Self::Homography { inv, .. } => apply3(&inv, x, y),
        }
    }
}

fn apply3(m: &[f64; 9], x: f64, y: f64) -> (f64, f64) {
    let w = m[6] * x + m[7] * y + m[8];
    ((m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w)
}

/// Direct linear transform with h33 = 1: eight equations, eight unknowns.
fn solve_homography(src: [[f64; 2]; 4], dst: [[f64; 2]; 4]) -> Option<[f64; 9]> {
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let [x, y] = src[i];
        let [u, v] = dst[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    for col in 0..8 {
        let pivot = (col..8).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..8 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..9 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut h = [0.0; 9];
    for i in 0..8 {
        h[i] = a[i][8] / a[i][i];
    }
    h[8] = 1.0;
    Some(h)
}

fn invert3(m: &[f64; 9]) -> Option<[f64; 9]> {
    let [a, b, c, d, e, f, g, h, i] = *m;
    let det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if det.abs() < 1e-12 {
        return None;
    }
    let adj = [
        e * i - f * h,
        c * h - b * i,
        b * f - c * e,
        f * g - d * i,
        a * i - c * g,
        c * d - a * f,
        d * h - e * g,
        b * g - a * h,
        a * e - b * d,
    ];
    Some(adj.map(|v| v / det))
}

/// Mean colour, used to fill areas a transform exposes.
pub fn mean_color(img: &RgbImage) -> Rgb<u8> {
    let n = u64::from(img.width()) * u64::from(img.height());
    if n == 0 {
        return Rgb([255, 255, 255]);
    }
    let mut sum = [0u64; 3];
    for p in img.pixels() {
        for (s, v) in sum.iter_mut().zip(p.0) {
            *s += u64::from(v);
        }
    }
    Rgb(sum.map(|s| ((s + n / 2) / n) as u8))
}

/// Inverse-maps every destination pixel centre into `src` and samples it
/// bilinearly. Points outside the source take `fill`.
pub fn resample(src: &RgbImage, map: &PointMap, width: u32, height: u32, fill: Rgb<u8>) -> RgbImage {
    let (sw, sh) = (f64::from(src.width()), f64::from(src.height()));
    RgbImage::from_fn(width, height, |x, y| {
        let (sx, sy) = map.inverse(f64::from(x) + 0.5, f64::from(y) + 0.5);
        if !(0.0..sw).contains(&sx) || !(0.0..sh).contains(&sy) {
            return fill;
        }
        bilinear(src, sx - 0.5, sy - 0.5)
    })
}

fn bilinear(img: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let max_x = img.width() as i64 - 1;
    let max_y = img.height() as i64 - 1;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let at = |xi: i64, yi: i64| img.get_pixel(xi.clamp(0, max_x) as u32, yi.clamp(0, max_y) as u32).0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let (p00, p10, p01, p11) = (at(x0, y0), at(x0 + 1, y0), at(x0, y0 + 1), at(x0 + 1, y0 + 1));
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
        let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    Rgb(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn rotation_round_trips() {
        let (m, size) = PointMap::rotation(200, 50, 17.0);
        assert_eq!(size, rotated_size(200, 50, 17.0));
        for p in [(0.0, 0.0), (200.0, 50.0), (13.5, 40.25)] {
            assert!(close(m.inverse(m.forward(p.0, p.1).0, m.forward(p.0, p.1).1), p));
        }
    }

    #[test]
    fn quarter_turn_is_counter_clockwise() {
        let (m, size) = PointMap::rotation(100, 40, 90.0);
        assert_eq!(size, (40, 100));
        // the middle of the right edge ends up in the middle of the top edge
        assert!(close(m.forward(100.0, 20.0), (20.0, 0.0)));
        assert_eq!(rotated_size(100, 40, 0.0), (100, 40));
        assert_eq!(rotated_size(100, 40, 180.0), (100, 40));
    }

    #[test]
    fn homography_hits_corners() {
        let dst = [[3.0, 2.0], [95.0, 5.0], [98.0, 47.0], [1.0, 44.0]];
        let m = PointMap::homography(100, 50, dst).unwrap();
        for (src, d) in [(0.0, 0.0), (100.0, 0.0), (100.0, 50.0), (0.0, 50.0)].into_iter().zip(dst) {
            let got = m.forward(src.0, src.1);
            assert!((got.0 - d[0]).abs() < 1e-9 && (got.1 - d[1]).abs() < 1e-9);
            let back = m.inverse(d[0], d[1]);
            assert!((back.0 - src.0).abs() < 1e-9 && (back.1 - src.1).abs() < 1e-9);
        }
        assert!(PointMap::homography(10, 10, [[0.0, 0.0]; 4]).is_none());
    }

    #[test]
    fn identity_resample_is_lossless() {
        let img = RgbImage::from_fn(9, 7, |x, y| Rgb([(x * 20) as u8, (y * 30) as u8, 7]));
        let (m, (w, h)) = PointMap::rotation(9, 7, 0.0);
        assert_eq!(resample(&img, &m, w, h, Rgb([0, 0, 0])), img);
    }
}
