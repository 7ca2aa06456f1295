//! Shared oracle helpers: finite differences and quadrature used to verify
//! analytic derivatives independently.

#![allow(dead_code)]

use mwtrap::geom::{Mat3, Vec3};

/// Central-difference gradient of a scalar field.
pub fn fd_gradient<F: Fn(&Vec3) -> f64>(f: F, p: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for axis in 0..3 {
        let mut hi = *p;
        let mut lo = *p;
        hi[axis] += h;
        lo[axis] -= h;
        g[axis] = (f(&hi) - f(&lo)) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian of a scalar field.
pub fn fd_hessian<F: Fn(&Vec3) -> f64 + Copy>(f: F, p: &Vec3, h: f64) -> Mat3 {
    let mut m = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut pp = *p;
            let mut pm = *p;
            let mut mp = *p;
            let mut mm = *p;
            pp[i] += h;
            pp[j] += h;
            pm[i] += h;
            pm[j] -= h;
            mp[i] -= h;
            mp[j] += h;
            mm[i] -= h;
            mm[j] -= h;
            m[(i, j)] = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
        }
    }
    m
}

/// Five-point finite-difference Laplacian residual, normalized by the local
/// curvature scale.
pub fn laplacian_residual<F: Fn(&Vec3) -> f64 + Copy>(f: F, p: &Vec3, h: f64) -> f64 {
    let mut lap = 0.0;
    let mut curv_scale = 0.0;
    for axis in 0..3 {
        let mut hi = *p;
        let mut lo = *p;
        hi[axis] += h;
        lo[axis] -= h;
        let second = (f(&hi) - 2.0 * f(p) + f(&lo)) / (h * h);
        lap += second;
        curv_scale += second.abs();
    }
    if curv_scale == 0.0 {
        lap.abs()
    } else {
        lap.abs() / curv_scale
    }
}

/// Tiled 2D Gauss-Legendre quadrature of the half-space Poisson kernel over
/// a rectangle: the boundary-element oracle for the patch potential. Tiles
/// keep the node spacing below the kernel width set by the field height.
pub fn poisson_kernel_integral(x1: f64, x2: f64, y1: f64, y2: f64, p: &Vec3, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let tile = (0.5 * p.z).max(1e-9);
    let tiles_x = (((x2 - x1) / tile).ceil() as usize).clamp(1, 400);
    let tiles_y = (((y2 - y1) / tile).ceil() as usize).clamp(1, 400);
    let mut sum = 0.0;
    for tx in 0..tiles_x {
        let ax = x1 + (x2 - x1) * tx as f64 / tiles_x as f64;
        let bx = x1 + (x2 - x1) * (tx + 1) as f64 / tiles_x as f64;
        for ty in 0..tiles_y {
            let ay = y1 + (y2 - y1) * ty as f64 / tiles_y as f64;
            let by = y1 + (y2 - y1) * (ty + 1) as f64 / tiles_y as f64;
            let hx = 0.5 * (bx - ax);
            let hy = 0.5 * (by - ay);
            let cx = 0.5 * (ax + bx);
            let cy = 0.5 * (ay + by);
            for (xi, wx) in nodes.iter().zip(&weights) {
                for (yi, wy) in nodes.iter().zip(&weights) {
                    let xs = cx + hx * xi;
                    let ys = cy + hy * yi;
                    let dx = p.x - xs;
                    let dy = p.y - ys;
                    let r2 = dx * dx + dy * dy + p.z * p.z;
                    sum += wx * wy * hx * hy / (r2 * r2.sqrt());
                }
            }
        }
    }
    sum * p.z / (2.0 * std::f64::consts::PI)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
