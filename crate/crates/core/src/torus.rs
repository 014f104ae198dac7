//! Geometry of the unit torus identified with Q_d = [-1/2, 1/2]^d.

/// Reduce a coordinate to the representative in [-1/2, 1/2).
///
/// Ties at +-1/2 map to -1/2 so that the reduction is a total function with a
/// single representative per class.
#[inline]
pub fn reduce(x: f64) -> f64 {
    let y = x - x.floor(); // [0, 1)
    if y >= 0.5 {
        y - 1.0
    } else {
        y
    }
}

/// Reduce every coordinate of a point in place.
#[inline]
pub fn reduce_point(x: &mut [f64]) {
    for c in x {
        *c = reduce(*c);
    }
}

/// Minimum-image displacement a - b, componentwise in [-1/2, 1/2).
#[inline]
pub fn min_image(a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..a.len() {
        out[i] = reduce(a[i] - b[i]);
    }
}

/// Torus distance between two points.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = reduce(a[i] - b[i]);
        s += d * d;
    }
    s.sqrt()
}

/// Smallest pairwise torus distance of a flat position array (stride `d`).
pub fn min_pair_distance(positions: &[f64], d: usize) -> f64 {
    let n = positions.len() / d;
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = distance(&positions[i * d..(i + 1) * d], &positions[j * d..(j + 1) * d]);
            if dist < best {
                best = dist;
            }
        }
    }
    best
}

/// Midpoint-rule quadrature of `f` over the torus on an `n`^d grid.
///
/// Exact (to roundoff) for trigonometric polynomials of degree below n; the
/// flow-family integrands used in this crate are all of that kind.
pub fn quadrature(d: usize, n: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let h = 1.0 / n as f64;
    let mut x = [0.0f64; 3];
    let mut acc = 0.0;
    match d {
        2 => {
            for i in 0..n {
                x[0] = (i as f64 + 0.5) * h - 0.5;
                let mut row = 0.0;
                for j in 0..n {
                    x[1] = (j as f64 + 0.5) * h - 0.5;
                    row += f(&x[..2]);
                }
                acc += row;
            }
            acc * h * h
        }
        3 => {
            for i in 0..n {
                x[0] = (i as f64 + 0.5) * h - 0.5;
                for j in 0..n {
                    x[1] = (j as f64 + 0.5) * h - 0.5;
                    let mut row = 0.0;
                    for k in 0..n {
                        x[2] = (k as f64 + 0.5) * h - 0.5;
                        row += f(&x[..3]);
                    }
                    acc += row;
                }
            }
            acc * h * h * h
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduce_range_and_ties() {
        assert_eq!(reduce(0.5), -0.5);
        assert_eq!(reduce(-0.5), -0.5);
        assert_eq!(reduce(1.5), -0.5);
        assert_eq!(reduce(0.0), 0.0);
        assert!((reduce(0.75) - (-0.25)).abs() < 1e-15);
        assert!((reduce(-0.75) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quadrature_exact_for_trig() {
        // cos^2(2 pi x) integrates to 1/2
        let v = quadrature(2, 16, |x| (2.0 * std::f64::consts::PI * x[0]).cos().powi(2));
        assert!((v - 0.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn reduce_is_periodic_and_in_range(x in -10.0f64..10.0, k in -5i32..5) {
            let r = reduce(x);
            prop_assert!((-0.5..0.5).contains(&r));
            prop_assert!((reduce(x + k as f64) - r).abs() < 1e-12);
        }

        #[test]
        fn distance_symmetric(ax in -0.5f64..0.5, ay in -0.5f64..0.5,
                              bx in -0.5f64..0.5, by in -0.5f64..0.5) {
            let a = [ax, ay];
            let b = [bx, by];
            prop_assert!((distance(&a, &b) - distance(&b, &a)).abs() < 1e-15);
            prop_assert!(distance(&a, &b) <= (0.5f64.powi(2) * 2.0).sqrt() + 1e-12);
        }
    }
}
