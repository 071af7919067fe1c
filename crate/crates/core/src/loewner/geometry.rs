use std::collections::HashMap;

use num_complex::Complex;

type C = Complex<f64>;

fn point_segment(p: C, a: C, b: C) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * d.re + (p - a).im * d.im) / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(a: C, b: C, c: C, d: C) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Euclidean distance between segments `[a, b]` and `[c, d]`.
pub fn segment_distance(a: C, b: C, c: C, d: C) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment(a, c, d)
        .min(point_segment(b, c, d))
        .min(point_segment(c, a, b))
        .min(point_segment(d, a, b))
}

pub fn median_segment(p: &[C]) -> f64 {
    let mut lens: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    if lens.is_empty() {
        return 0.0;
    }
    lens.sort_by(f64::total_cmp);
    lens[lens.len() / 2]
}

struct SegmentGrid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl SegmentGrid {
    fn cell_range(&self, a: C, b: C, pad: f64) -> (i64, i64, i64, i64) {
        let lo = |u: f64, v: f64| ((u.min(v) - pad) / self.cell).floor() as i64;
        let hi = |u: f64, v: f64| ((u.max(v) + pad) / self.cell).floor() as i64;
        (lo(a.re, b.re), hi(a.re, b.re), lo(a.im, b.im), hi(a.im, b.im))
    }

    /// Grid over the segments of `p` whose bounding box meets `window`.
    fn build(p: &[C], cell: f64, window: Option<(C, C)>) -> Self {
        let mut g = Self {
            cell,
            cells: HashMap::new(),
        };
        for (k, w) in p.windows(2).enumerate() {
            if let Some((lo, hi)) = window {
                let outside = w[0].re.max(w[1].re) < lo.re
                    || w[0].re.min(w[1].re) > hi.re
                    || w[0].im.max(w[1].im) < lo.im
                    || w[0].im.min(w[1].im) > hi.im;
                if outside {
                    continue;
                }
            }
            let (x0, x1, y0, y1) = g.cell_range(w[0], w[1], 0.0);
            // Very long segments are rare; cap their footprint.
            if (x1 - x0 + 1) * (y1 - y0 + 1) > 1 << 16 {
                g.cells.entry((i64::MIN, i64::MIN)).or_default().push(k);
                continue;
            }
            for i in x0..=x1 {
                for j in y0..=y1 {
                    g.cells.entry((i, j)).or_default().push(k);
                }
            }
        }
        g
    }

    fn candidates(&self, a: C, b: C, pad: f64, out: &mut Vec<usize>) {
        out.clear();
        let (x0, x1, y0, y1) = self.cell_range(a, b, pad);
        if (x1 - x0 + 1) * (y1 - y0 + 1) > 1 << 16 {
            out.extend(self.cells.values().flatten().copied());
        } else {
            for i in x0..=x1 {
                for j in y0..=y1 {
                    if let Some(v) = self.cells.get(&(i, j)) {
                        out.extend_from_slice(v);
                    }
                }
            }
            if let Some(v) = self.cells.get(&(i64::MIN, i64::MIN)) {
                out.extend_from_slice(v);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

fn cell_size(p: &[C], eps: f64) -> f64 {
    let m = median_segment(p);
    let c = eps.max(m);
    if c > 0.0 {
        c
    } else {
        1.0
    }
}

/// Whether some segment of `p` comes within `eps` of some segment of `q`.
pub fn polylines_within(p: &[C], q: &[C], eps: f64) -> bool {
    if p.len() < 2 || q.len() < 2 {
        return false;
    }
    let (mut lo, mut hi) = (q[0], q[0]);
    for z in q {
        lo = C::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = C::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = C::new(eps, eps);
    let grid = SegmentGrid::build(p, cell_size(p, eps), Some((lo - pad, hi + pad)));
    let mut cand = Vec::new();
    for w in q.windows(2) {
        grid.candidates(w[0], w[1], eps, &mut cand);
        for &k in &cand {
            if segment_distance(p[k], p[k + 1], w[0], w[1]) <= eps {
                return true;
            }
        }
    }
    false
}

/// Pairs of segments of `p` at least three apart in index that come within `eps`.
pub fn self_close_pairs(p: &[C], eps: f64) -> usize {
    if p.len() < 4 {
        return 0;
    }
    let grid = SegmentGrid::build(p, cell_size(p, eps), None);
    let mut cand = Vec::new();
    let mut count = 0;
    for (j, w) in p.windows(2).enumerate() {
        grid.candidates(w[0], w[1], eps, &mut cand);
        for &k in &cand {
            if k + 2 < j && segment_distance(p[k], p[k + 1], w[0], w[1]) <= eps {
                count += 1;
            }
        }
    }
    count
}
