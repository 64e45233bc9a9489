//! Nonnegative functions on R^n: cell-centered tensor grids and radial
//! profiles, plus norms, entropies, extremizer families, Schwarz
//! symmetrization and affine resampling.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quad::GaussLegendre;
use crate::specfun::{sphere_area, unit_ball_volume};

const GRID_MAGIC: &[u8; 8] = b"AHLSGRID";

/// Samples of a function on the cell centers of `[-R, R]^n`.
///
/// Values are stored row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: usize,
    half_width: f64,
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(n: usize, half_width: f64, m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "grid dimension {n} not in 1..=3"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half width {half_width} must be positive"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 samples per axis, got {m}"
            )));
        }
        let expected = m.pow(n as u32);
        if values.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} values for m={m}, n={n}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "value {} at index {i} is negative or not finite",
                values[i]
            )));
        }
        Ok(GridFunction {
            n,
            half_width,
            m,
            values,
        })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> f64>(
        n: usize,
        half_width: f64,
        m: usize,
        mut f: F,
    ) -> Result<Self> {
        let total = m.pow(n as u32);
        let h = 2.0 * half_width / m as f64;
        let mut x = vec![0.0; n];
        let mut values = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            for d in (0..n).rev() {
                x[d] = -half_width + ((rem % m) as f64 + 0.5) * h;
                rem /= m;
            }
            values.push(f(&x));
        }
        GridFunction::new(n, half_width, m, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for d in (0..self.n).rev() {
            out[d] = idx % self.m;
            idx /= self.m;
        }
    }

    pub fn center(&self, idx: usize, out: &mut [f64]) {
        let h = self.spacing();
        let mut rem = idx;
        for d in (0..self.n).rev() {
            out[d] = -self.half_width + ((rem % self.m) as f64 + 0.5) * h;
            rem /= self.m;
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Multilinear interpolation between cell centers; zero outside the box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let h = self.spacing();
        let n = self.n;
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for d in 0..n {
            let s = (x[d] + self.half_width) / h - 0.5;
            if !(s > -1.0 && s < self.m as f64) {
                return 0.0;
            }
            let fl = s.floor();
            base[d] = fl as i64;
            frac[d] = s - fl;
        }
        let m = self.m as i64;
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0i64;
            let mut inside = true;
            for d in 0..n {
                let bit = ((corner >> (n - 1 - d)) & 1) as i64;
                let i = base[d] + bit;
                if i < 0 || i >= m {
                    inside = false;
                    break;
                }
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                flat = flat * m + i;
            }
            if inside && w != 0.0 {
                acc += w * self.values[flat as usize];
            }
        }
        acc
    }

    /// Block average over 2^n cells; `None` when m is odd.
    pub fn coarsen(&self) -> Option<GridFunction> {
        if self.m % 2 != 0 || self.m < 4 {
            return None;
        }
        let mc = self.m / 2;
        let total = mc.pow(self.n as u32);
        let mut out = vec![0.0; total];
        let mut idx = vec![0usize; self.n];
        for (flat, v) in self.values.iter().enumerate() {
            self.unravel(flat, &mut idx);
            let mut c = 0usize;
            for d in 0..self.n {
                c = c * mc + idx[d] / 2;
            }
            out[c] += v;
        }
        let scale = 1.0 / (1usize << self.n) as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        Some(GridFunction {
            n: self.n,
            half_width: self.half_width,
            m: mc,
            values: out,
        })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut buf = Vec::with_capacity(28 + 8 * self.values.len());
        buf.extend_from_slice(GRID_MAGIC);
        buf.extend_from_slice(&(self.n as u32).to_le_bytes());
        buf.extend_from_slice(&self.half_width.to_le_bytes());
        buf.extend_from_slice(&(self.m as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<GridFunction> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file)
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        if bytes.len() < 28 || &bytes[..8] != GRID_MAGIC {
            return Err(Error::InvalidInput(format!(
                "{}: not a grid file",
                path.display()
            )));
        }
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let half_width = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let m = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
        let payload = &bytes[28..];
        if payload.len() % 8 != 0 {
            return Err(Error::InvalidInput(format!(
                "{}: truncated payload",
                path.display()
            )));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        GridFunction::new(n, half_width, m, values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.n).map(|d| format!("x{d}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        let mut x = vec![0.0; self.n];
        for (i, v) in self.values.iter().enumerate() {
            self.center(i, &mut x);
            let coords: Vec<String> = x.iter().map(|c| format!("{c:.12e}")).collect();
            writeln!(w, "{},{v:.17e}", coords.join(","))?;
        }
        Ok(())
    }
}

/// Behavior of a radial profile beyond its last knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    Zero,
    /// f(r) = f(r_k)(r/r_k)^{-exponent} for r > r_k.
    PowerLaw {
        exponent: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Lookup {
    // uniform spacing `du·scale` up to knot `n_uniform`, geometric beyond
    Layered {
        scale: f64,
        du: f64,
        n_uniform: usize,
        ln_ratio: f64,
    },
    Search,
}

/// Piecewise-linear radial function f(x) = φ(|x|) on R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: usize,
    radii: Vec<f64>,
    values: Vec<f64>,
    tail: Tail,
    lookup: Lookup,
}

impl RadialProfile {
    pub fn new(n: usize, radii: Vec<f64>, values: Vec<f64>, tail: Tail) -> Result<Self> {
        validate_profile(n, &radii, &values)?;
        Ok(RadialProfile {
            n,
            radii,
            values,
            tail,
            lookup: Lookup::Search,
        })
    }

    /// Samples `f` on knots with spacing `2/resolution` (times `scale`) up to
    /// `scale`, then geometric with ratio `1 + 2/resolution` up to `r_max`.
    pub fn sample<F: Fn(f64) -> f64>(
        n: usize,
        resolution: usize,
        scale: f64,
        r_max: f64,
        f: F,
    ) -> Result<Self> {
        if resolution < 4 || resolution % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "radial resolution {resolution} must be even and >= 4"
            )));
        }
        if !(scale > 0.0 && r_max > scale) {
            return Err(Error::InvalidInput(format!(
                "need 0 < scale < r_max, got scale={scale}, r_max={r_max}"
            )));
        }
        let du = 2.0 / resolution as f64;
        let n_uniform = resolution / 2;
        let ln_ratio = (1.0 + du).ln();
        let mut radii: Vec<f64> = (0..=n_uniform).map(|i| scale * i as f64 * du).collect();
        radii[n_uniform] = scale;
        let mut j = 1;
        loop {
            let r = scale * (j as f64 * ln_ratio).exp();
            if r >= r_max {
                radii.push(r_max);
                break;
            }
            radii.push(r);
            j += 1;
        }
        let values: Vec<f64> = radii.iter().map(|&r| f(r)).collect();
        validate_profile(n, &radii, &values)?;
        Ok(RadialProfile {
            n,
            radii,
            values,
            tail: Tail::Zero,
            lookup: Lookup::Layered {
                scale,
                du,
                n_uniform,
                ln_ratio,
            },
        })
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn tail(&self) -> Tail {
        self.tail
    }
    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn scaled(&self, c: f64) -> RadialProfile {
        RadialProfile {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Index i with radii[i] <= r < radii[i+1]; requires r in [0, r_max).
    fn segment(&self, r: f64) -> usize {
        let last = self.radii.len() - 2;
        let mut i = match self.lookup {
            Lookup::Layered {
                scale,
                du,
                n_uniform,
                ln_ratio,
            } => {
                let s = r / scale;
                if s < 1.0 {
                    ((s / du) as usize).min(n_uniform - 1)
                } else {
                    n_uniform + (s.ln() / ln_ratio) as usize
                }
            }
            Lookup::Search => self.radii.partition_point(|&x| x <= r).saturating_sub(1),
        };
        i = i.min(last);
        while i > 0 && self.radii[i] > r {
            i -= 1;
        }
        while i < last && self.radii[i + 1] <= r {
            i += 1;
        }
        i
    }

    /// Value at radius r, zero beyond the last knot regardless of the tail.
    #[inline]
    pub fn eval_core(&self, r: f64) -> f64 {
        let r = r.abs();
        let rk = self.r_max();
        if r >= rk {
            return if r == rk {
                *self.values.last().unwrap()
            } else {
                0.0
            };
        }
        let i = self.segment(r);
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let t = (r - r0) / (r1 - r0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let rk = self.r_max();
        if r <= rk {
            return self.eval_core(r);
        }
        match self.tail {
            Tail::Zero => 0.0,
            Tail::PowerLaw { exponent } => self.values.last().unwrap() * (r / rk).powf(-exponent),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Keeps every other knot (and the last one).
    pub fn coarsen(&self) -> Option<RadialProfile> {
        if self.radii.len() < 5 {
            return None;
        }
        let mut radii: Vec<f64> = self.radii.iter().step_by(2).copied().collect();
        let mut values: Vec<f64> = self.values.iter().step_by(2).copied().collect();
        if (self.radii.len() - 1) % 2 != 0 {
            radii.push(self.r_max());
            values.push(*self.values.last().unwrap());
        }
        let lookup = match self.lookup {
            Lookup::Layered {
                scale,
                du,
                n_uniform,
                ln_ratio,
            } if n_uniform % 2 == 0 && n_uniform >= 2 => Lookup::Layered {
                scale,
                du: 2.0 * du,
                n_uniform: n_uniform / 2,
                ln_ratio: 2.0 * ln_ratio,
            },
            _ => Lookup::Search,
        };
        Some(RadialProfile {
            n: self.n,
            radii,
            values,
            tail: self.tail,
            lookup,
        })
    }

    /// Resamples onto a layered knot set of the given resolution covering the
    /// same radial range.
    pub fn resample(&self, resolution: usize, scale: f64) -> Result<RadialProfile> {
        let r_max = self.r_max();
        let p = RadialProfile::sample(self.n, resolution, scale, r_max, |r| self.eval_core(r))?;
        Ok(p.with_tail(self.tail))
    }

    /// nω_n ∫ φ(f(r)) r^{n−1} dr over the knots, plus `tail(v_k, r_k, p)`
    /// for a power-law tail.
    fn integrate<P, T>(&self, phi: P, tail: T) -> f64
    where
        P: Fn(f64) -> f64,
        T: Fn(f64, f64, f64) -> f64,
    {
        let gl = GaussLegendre::new(4);
        let nm1 = (self.n - 1) as i32;
        let mut sum = 0.0;
        for i in 0..self.radii.len() - 1 {
            let (r0, r1) = (self.radii[i], self.radii[i + 1]);
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            if v0 == 0.0 && v1 == 0.0 {
                continue;
            }
            sum += gl.integrate(r0, r1, |r| {
                let v = v0 + (r - r0) / (r1 - r0) * (v1 - v0);
                phi(v) * r.powi(nm1)
            });
        }
        if let Tail::PowerLaw { exponent } = self.tail {
            let vk = *self.values.last().unwrap();
            if vk > 0.0 {
                sum += tail(vk, self.r_max(), exponent);
            }
        }
        sphere_area(self.n) * sum
    }
}

fn validate_profile(n: usize, radii: &[f64], values: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "profile dimension must be positive".into(),
        ));
    }
    if radii.len() < 2 || radii.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "profile needs >= 2 knots with matching values ({} radii, {} values)",
            radii.len(),
            values.len()
        )));
    }
    if radii[0] != 0.0 {
        return Err(Error::InvalidInput("profile radii must start at 0".into()));
    }
    if !radii.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput(
            "profile radii must be strictly increasing".into(),
        ));
    }
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "profile value {} at knot {i} is negative or not finite",
            values[i]
        )));
    }
    Ok(())
}

/// A sampled nonnegative function, on a grid or as a radial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Function {
    Grid(GridFunction),
    Radial(RadialProfile),
}

impl Function {
    pub fn n(&self) -> usize {
        match self {
            Function::Grid(g) => g.n(),
            Function::Radial(p) => p.n(),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Function::Radial(_))
    }

    pub fn scaled(&self, c: f64) -> Function {
        match self {
            Function::Grid(g) => Function::Grid(g.scaled(c)),
            Function::Radial(p) => Function::Radial(p.scaled(c)),
        }
    }

    pub fn coarsen(&self) -> Option<Function> {
        match self {
            Function::Grid(g) => g.coarsen().map(Function::Grid),
            Function::Radial(p) => p.coarsen().map(Function::Radial),
        }
    }

    /// Grid size m, or the knot count for a profile.
    pub fn resolution(&self) -> usize {
        match self {
            Function::Grid(g) => g.m(),
            Function::Radial(p) => p.radii().len(),
        }
    }

    /// Radius of a ball (about the origin) containing the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Function::Grid(g) => g.half_width() * (g.n() as f64).sqrt(),
            Function::Radial(p) => p.r_max(),
        }
    }
}

impl From<GridFunction> for Function {
    fn from(g: GridFunction) -> Self {
        Function::Grid(g)
    }
}

impl From<RadialProfile> for Function {
    fn from(p: RadialProfile) -> Self {
        Function::Radial(p)
    }
}

fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// ‖f‖_p for p ≥ 1.
pub fn lp_norm(f: &Function, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1, got {p}");
    let integral = match f {
        Function::Grid(g) => g.values.iter().map(|v| v.powf(p)).sum::<f64>() * g.cell_volume(),
        Function::Radial(prof) => {
            let n = prof.n as f64;
            prof.integrate(
                |v| v.powf(p),
                |vk, rk, e| {
                    let a = e * p;
                    if a > n {
                        vk.powf(p) * rk.powf(n) / (a - n)
                    } else {
                        f64::INFINITY
                    }
                },
            )
        }
    };
    integral.powf(1.0 / p)
}

fn weighted_entropy(f: &Function, q: i32) -> f64 {
    match f {
        Function::Grid(g) => {
            g.values
                .iter()
                .map(|&v| v.powi(q - 1) * xlogx(v))
                .sum::<f64>()
                * g.cell_volume()
        }
        Function::Radial(prof) => {
            let n = prof.n as f64;
            prof.integrate(
                |v| v.powi(q - 1) * xlogx(v),
                |vk, rk, e| {
                    // ∫_{r_k}^∞ f^q log f r^{n-1} with f = v_k (r/r_k)^{-e}
                    let a = e * q as f64;
                    if a > n {
                        let vq = vk.powi(q);
                        vq * rk.powf(n) * (vk.ln() / (a - n) - e / ((a - n) * (a - n)))
                    } else {
                        f64::NAN
                    }
                },
            )
        }
    }
}

/// ∫ f log f with 0·log 0 = 0.
pub fn entropy_l1(f: &Function) -> f64 {
    weighted_entropy(f, 1)
}

/// ∫ f² log f with 0·log 0 = 0.
pub fn entropy_l2(f: &Function) -> f64 {
    weighted_entropy(f, 2)
}

/// A quantity with a refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    pub value: f64,
    pub error: f64,
    /// Set when the fine and coarse values disagree by more than 10%, the
    /// signature of a nonintegrable singularity or tail.
    pub diverging: bool,
}

impl Refined {
    pub fn from_pair(fine: f64, coarse: Option<f64>) -> Refined {
        match coarse {
            Some(c) if c.is_finite() && fine.is_finite() => {
                let error = (fine - c).abs();
                Refined {
                    value: fine,
                    error,
                    diverging: error > 0.1 * fine.abs().max(1e-3),
                }
            }
            _ => Refined {
                value: fine,
                error: if fine.is_finite() { 0.0 } else { f64::INFINITY },
                diverging: !fine.is_finite(),
            },
        }
    }
}

pub fn entropy_l1_checked(f: &Function) -> Refined {
    Refined::from_pair(entropy_l1(f), f.coarsen().map(|c| entropy_l1(&c)))
}

pub fn entropy_l2_checked(f: &Function) -> Refined {
    Refined::from_pair(entropy_l2(f), f.coarsen().map(|c| entropy_l2(&c)))
}

/// Exponent families a(1+|φ(x−x₀)|²)^{−p} of the equality cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// p = (n+α)/2
    Hls(f64),
    /// p = n
    LogHls,
    /// p = n/2
    LogSob,
}

impl Family {
    pub fn power(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Family::Hls(alpha) => (n + alpha) / 2.0,
            Family::LogHls => n,
            Family::LogSob => n / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormTarget {
    L1,
    L2,
}

impl NormTarget {
    pub fn p(&self) -> f64 {
        match self {
            NormTarget::L1 => 1.0,
            NormTarget::L2 => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremizerSpec {
    pub n: usize,
    pub family: Family,
    pub amplitude: f64,
    /// n×n row-major.
    pub phi: Vec<f64>,
    pub x0: Vec<f64>,
    pub normalize: Option<NormTarget>,
}

impl ExtremizerSpec {
    pub fn standard(n: usize, family: Family, normalize: Option<NormTarget>) -> Self {
        ExtremizerSpec {
            n,
            family,
            amplitude: 1.0,
            phi: linalg::identity(n),
            x0: vec![0.0; n],
            normalize,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.phi.len() != self.n * self.n || self.x0.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "extremizer in dimension {} needs an {}x{} matrix and {}-vector",
                self.n, self.n, self.n, self.n
            )));
        }
        let d = linalg::det(self.n, &self.phi);
        if !d.is_finite() || d.abs() < 1e-14 {
            return Err(Error::SingularMap(d));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::InvalidInput(
                "extremizer amplitude must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Returns the scalar c when φ = c·I.
    fn scalar_phi(&self) -> Option<f64> {
        let c = self.phi[0];
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.phi[i * self.n + j];
                let expect = if i == j { c } else { 0.0 };
                if (v - expect).abs() > 1e-15 * c.abs().max(1.0) {
                    return None;
                }
            }
        }
        Some(c)
    }
}

/// Where to sample a function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Grid {
        half_width: f64,
        m: usize,
    },
    /// Layered radial knots; `r_max` is measured in units of the profile's
    /// natural scale.
    Radial {
        resolution: usize,
        r_max: f64,
    },
}

pub fn make_extremizer(spec: &ExtremizerSpec, shape: Shape) -> Result<Function> {
    spec.validate()?;
    let n = spec.n;
    let p = spec.family.power(n);
    let a = spec.amplitude;
    let raw: Function = match shape {
        Shape::Grid { half_width, m } => {
            let mut y = vec![0.0; n];
            let mut z = vec![0.0; n];
            GridFunction::from_fn(n, half_width, m, |x| {
                for d in 0..n {
                    y[d] = x[d] - spec.x0[d];
                }
                linalg::matvec(n, &spec.phi, &y, &mut z);
                let s: f64 = z.iter().map(|v| v * v).sum();
                a * (1.0 + s).powf(-p)
            })?
            .into()
        }
        Shape::Radial { resolution, r_max } => {
            let c = spec
                .scalar_phi()
                .ok_or_else(|| Error::InvalidInput("radial sampling needs phi = c*I".into()))?;
            if spec.x0.iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidInput("radial sampling needs x0 = 0".into()));
            }
            let scale = 1.0 / c.abs();
            RadialProfile::sample(n, resolution, scale, r_max * scale, |r| {
                a * (1.0 + (c * r) * (c * r)).powf(-p)
            })?
            .into()
        }
    };
    Ok(match spec.normalize {
        Some(target) => {
            let norm = lp_norm(&raw, target.p());
            raw.scaled(1.0 / norm)
        }
        None => raw,
    })
}

/// Symmetric decreasing rearrangement as a radial profile.
///
/// The j-th largest cell value sits at radius ((j+½)h^n/ω_n)^{1/n}, so the
/// level-set measures agree with the grid's within one cell volume.
pub fn schwarz_symmetrize(f: &GridFunction) -> RadialProfile {
    let mut sorted: Vec<f64> = f.values.iter().copied().filter(|v| *v > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let vol = f.cell_volume();
    let omega = unit_ball_volume(f.n);
    let inv_n = 1.0 / f.n as f64;
    let mut radii = Vec::with_capacity(sorted.len() + 2);
    let mut values = Vec::with_capacity(sorted.len() + 2);
    radii.push(0.0);
    values.push(sorted.first().copied().unwrap_or(0.0));
    for (j, v) in sorted.iter().enumerate() {
        radii.push(((j as f64 + 0.5) * vol / omega).powf(inv_n));
        values.push(*v);
    }
    // close the profile at the radius enclosing all positive cells
    radii.push(((sorted.len() as f64 + 0.5) * vol / omega).powf(inv_n));
    values.push(0.0);
    RadialProfile::new(f.n, radii, values, Tail::Zero).expect("symmetrized profile is valid")
}

/// Symmetric decreasing rearrangement on the same grid: cell values sorted in
/// decreasing order are assigned to cells by increasing distance from the
/// origin (ties broken by cell index). Exactly equimeasurable.
pub fn schwarz_symmetrize_grid(f: &GridFunction) -> GridFunction {
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(f.len());
    let mut x = vec![0.0; f.n];
    for i in 0..f.len() {
        f.center(i, &mut x);
        order.push((x.iter().map(|v| v * v).sum(), i));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut sorted = f.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; f.len()];
    for ((_, cell), v) in order.iter().zip(sorted) {
        values[*cell] = v;
    }
    GridFunction {
        values,
        ..f.clone()
    }
}

/// Samples x ↦ f(φ^{−1}x − x₀) on the same box, returning the resampled
/// function and the fraction of the expected mass |det φ|·∫f that left it.
pub fn apply_affine_with_leak(
    f: &GridFunction,
    phi: &[f64],
    x0: &[f64],
) -> Result<(GridFunction, f64)> {
    let n = f.n;
    if phi.len() != n * n || x0.len() != n {
        return Err(Error::InvalidInput(format!(
            "affine map for dimension {n} needs an {n}x{n} matrix and {n}-vector"
        )));
    }
    let inv = linalg::inverse(n, phi)?;
    let mut y = vec![0.0; n];
    let out = GridFunction::from_fn(n, f.half_width, f.m, |x| {
        linalg::matvec(n, &inv, x, &mut y);
        for d in 0..n {
            y[d] -= x0[d];
        }
        f.interpolate(&y)
    })?;
    let expected = linalg::det(n, phi).abs() * f.integral();
    let leak = if expected > 0.0 {
        (1.0 - out.integral() / expected).max(0.0)
    } else {
        0.0
    };
    Ok((out, leak))
}

pub fn apply_affine(f: &GridFunction, phi: &[f64], x0: &[f64]) -> Result<GridFunction> {
    let (out, leak) = apply_affine_with_leak(f, phi, x0)?;
    if leak > 0.01 {
        log::warn!(
            "affine resampling lost {:.2}% of the mass outside the box",
            100.0 * leak
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn indicator_1d(m: usize) -> GridFunction {
        GridFunction::from_fn(
            1,
            1.0,
            m,
            |x| if x[0] > 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(1, 1.0, 4, vec![0.0, 1.0, -1.0, 0.0]).is_err());
        assert!(GridFunction::new(2, 1.0, 4, vec![0.0; 15]).is_err());
        assert!(GridFunction::new(1, 0.0, 4, vec![0.0; 4]).is_err());
    }

    #[test]
    fn indicator_norms() {
        let f: Function = indicator_1d(64).into();
        assert!((lp_norm(&f, 2.0) - 1.0).abs() < 1e-14);
        assert!(entropy_l1(&f).abs() < 1e-15);
        let g: Function =
            GridFunction::from_fn(
                1,
                2.0,
                64,
                |x| {
                    if x[0] > 0.0 && x[0] < 2.0 {
                        0.5
                    } else {
                        0.0
                    }
                },
            )
            .unwrap()
            .into();
        assert!((entropy_l1(&g) + 2f64.ln()).abs() < 1e-14);
        let c = 3.0;
        let h: Function = indicator_1d(64).scaled(c).into();
        assert!((entropy_l2(&h) - c * c * c.ln()).abs() < 1e-13);
    }

    #[test]
    fn radial_lookup_matches_search() {
        let p = RadialProfile::sample(2, 64, 0.7, 500.0, |r| (1.0 + r * r).recip()).unwrap();
        let q = RadialProfile::new(2, p.radii().to_vec(), p.values().to_vec(), Tail::Zero).unwrap();
        for k in 0..5000 {
            let r = 600.0 * (k as f64 / 5000.0).powi(3);
            assert_eq!(p.eval(r), q.eval(r), "r={r}");
        }
        let c = p.coarsen().unwrap();
        let cs =
            RadialProfile::new(2, c.radii().to_vec(), c.values().to_vec(), Tail::Zero).unwrap();
        for k in 0..5000 {
            let r = 600.0 * (k as f64 / 5000.0).powi(3);
            assert_eq!(c.eval(r), cs.eval(r));
        }
    }

    #[test]
    fn log_sobolev_extremizer_normalized() {
        let spec = ExtremizerSpec::standard(2, Family::LogSob, Some(NormTarget::L2));
        let f = make_extremizer(
            &spec,
            Shape::Radial {
                resolution: 256,
                r_max: 1e4,
            },
        )
        .unwrap();
        let Function::Radial(p) = &f else { panic!() };
        assert!((lp_norm(&f, 2.0) - 1.0).abs() < 1e-12);
        // amplitude approaches π^{-1/2} as the truncation radius grows
        assert!((p.values()[0] - PI.powf(-0.5)).abs() < 1e-4);
        let grid = make_extremizer(
            &spec,
            Shape::Grid {
                half_width: 8.0,
                m: 64,
            },
        )
        .unwrap();
        assert!((lp_norm(&grid, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_phi_rejected() {
        let mut spec = ExtremizerSpec::standard(2, Family::LogHls, None);
        spec.phi = vec![1.0, 2.0, 0.5, 1.0];
        assert!(matches!(
            make_extremizer(
                &spec,
                Shape::Grid {
                    half_width: 2.0,
                    m: 8
                }
            ),
            Err(Error::SingularMap(_))
        ));
    }

    #[test]
    fn coarsen_preserves_mass() {
        let g = GridFunction::from_fn(2, 3.0, 32, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp())
            .unwrap();
        let c = g.coarsen().unwrap();
        assert_eq!(c.m(), 16);
        assert!((c.integral() - g.integral()).abs() < 1e-13);
    }

    #[test]
    fn interpolation_reproduces_centers() {
        let g = GridFunction::from_fn(2, 1.0, 8, |x| 4.0 + x[0] + 2.0 * x[1]).unwrap();
        let mut x = [0.0; 2];
        for i in 0..g.len() {
            g.center(i, &mut x);
            assert!((g.interpolate(&x) - g.values()[i]).abs() < 1e-14);
        }
        // bilinear data is reproduced between interior centers
        assert!((g.interpolate(&[0.1, -0.2]) - (4.0 + 0.1 - 0.4)).abs() < 1e-14);
    }

    #[test]
    fn schwarz_of_indicator_is_centered_interval() {
        let f = indicator_1d(64);
        let s = schwarz_symmetrize_grid(&f);
        let mut x = [0.0];
        for i in 0..s.len() {
            s.center(i, &mut x);
            let expect = if x[0].abs() < 0.5 { 1.0 } else { 0.0 };
            assert_eq!(s.values()[i], expect);
        }
        let p = schwarz_symmetrize(&f);
        assert!(p.is_nonincreasing());
        assert_eq!(p.eval(0.49), 1.0);
        assert_eq!(p.eval(0.52), 0.0);
    }

    #[test]
    fn binary_roundtrip() {
        let g = GridFunction::from_fn(2, 1.5, 8, |x| x[0].abs() + x[1] * x[1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        g.write_binary(&path).unwrap();
        assert_eq!(GridFunction::read_binary(&path).unwrap(), g);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("x0,x1,value\n"));
        assert_eq!(text.lines().count(), 65);
    }

    #[test]
    fn affine_identity_and_translation() {
        let g =
            GridFunction::from_fn(2, 4.0, 64, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let id = apply_affine(&g, &linalg::identity(2), &[0.0, 0.0]).unwrap();
        for (a, b) in id.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        // shift by exactly two cells
        let h = g.spacing();
        let (t, leak) = apply_affine_with_leak(&g, &linalg::identity(2), &[2.0 * h, 0.0]).unwrap();
        assert!(leak < 1e-6);
        let ft: Function = t.into();
        let fg: Function = g.into();
        assert!((lp_norm(&ft, 2.0) - lp_norm(&fg, 2.0)).abs() < 1e-6);
    }
}
