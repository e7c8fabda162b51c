//! Scalar fields on uniform rectangular grids and their on-disk formats.
//!
//! Binary layout (all little-endian): magic `QNCH`, `u32` version, `u32 nx`, `u32 ny`,
//! `f64 x0, y0, hx, hy`, then `nx * ny` `f64` values, row-major with `y` outer.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

pub const MAGIC: &[u8; 4] = b"QNCH";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    pub data: Vec<f64>,
}

impl Field2D {
    pub fn zeros(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64) -> Self {
        Field2D {
            nx,
            ny,
            x0,
            y0,
            hx,
            hy,
            data: vec![0.0; nx * ny],
        }
    }

    /// Field on `[-half_x, half_x] x [-half_y, half_y]` with spacing `h` in both
    /// directions; `x = 0` and `y = 0` are nodes.
    pub fn centered(half_x: f64, half_y: f64, h: f64) -> Result<Self> {
        let gx = Grid1D::symmetric(half_x, h)?;
        let gy = Grid1D::symmetric(half_y, h)?;
        Ok(Field2D::on_grids(&gx, &gy))
    }

    pub fn on_grids(gx: &Grid1D, gy: &Grid1D) -> Self {
        Field2D::zeros(gx.n, gy.n, gx.x_min, gy.x_min, gx.h(), gy.h())
    }

    pub fn from_fn(mut self, f: impl Fn(f64, f64) -> f64) -> Self {
        for j in 0..self.ny {
            let y = self.y(j);
            for i in 0..self.nx {
                let x = self.x(i);
                self.data[j * self.nx + i] = f(x, y);
            }
        }
        self
    }

    pub fn x_grid(&self) -> Grid1D {
        Grid1D {
            x_min: self.x0,
            x_max: self.x0 + (self.nx - 1) as f64 * self.hx,
            n: self.nx,
        }
    }

    pub fn y_grid(&self) -> Grid1D {
        Grid1D {
            x_min: self.y0,
            x_max: self.y0 + (self.ny - 1) as f64 * self.hy,
            n: self.ny,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nx + i] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.nx..(j + 1) * self.nx]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.ny).map(|j| self.get(i, j)).collect()
    }

    /// Column index of the node at `x = 0`.
    pub fn zero_column(&self) -> Option<usize> {
        self.x_grid().zero_index()
    }

    pub fn same_grid(&self, other: &Field2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x0 - other.x0).abs() <= 1e-12 * self.hx
            && (self.y0 - other.y0).abs() <= 1e-12 * self.hy
            && (self.hx - other.hx).abs() <= 1e-12 * self.hx
            && (self.hy - other.hy).abs() <= 1e-12 * self.hy
    }

    pub fn check_same_grid(&self, other: &Field2D) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{} grid at ({}, {}) vs {}x{} at ({}, {})",
                self.nx, self.ny, self.x0, self.y0, other.nx, other.ny, other.x0, other.y0
            )))
        }
    }

    /// True when the `y` grid is symmetric about zero.
    pub fn y_symmetric(&self) -> bool {
        let top = self.y(self.ny - 1);
        (self.y0 + top).abs() <= 1e-9 * self.hy
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `u(x, -y)`; requires a symmetric `y` grid.
    pub fn reflected_y(&self) -> Field2D {
        let mut out = self.clone();
        for j in 0..self.ny {
            let src = self.ny - 1 - j;
            out.data[j * self.nx..(j + 1) * self.nx].copy_from_slice(self.row(src));
        }
        out
    }

    /// Replaces the field by its odd-in-`y` part `(u(x, y) - u(x, -y)) / 2`.
    pub fn project_odd_y(&mut self) {
        let nx = self.nx;
        for j in 0..self.ny / 2 {
            let k = self.ny - 1 - j;
            for i in 0..nx {
                let odd = 0.5 * (self.data[j * nx + i] - self.data[k * nx + i]);
                self.data[j * nx + i] = odd;
                self.data[k * nx + i] = -odd;
            }
        }
        if self.ny % 2 == 1 {
            let mid = self.ny / 2;
            self.data[mid * nx..(mid + 1) * nx].fill(0.0);
        }
    }

    /// `max |u(x, y) + u(x, -y)|`.
    pub fn oddness_defect(&self) -> f64 {
        let mut m = 0.0_f64;
        for j in 0..self.ny {
            let k = self.ny - 1 - j;
            for i in 0..self.nx {
                m = m.max((self.get(i, j) + self.get(i, k)).abs());
            }
        }
        m
    }

    /// Centered `∂_y`, one-sided at the top and bottom rows.
    pub fn d_dy(&self) -> Field2D {
        let mut out = self.clone();
        let (nx, ny, h) = (self.nx, self.ny, self.hy);
        for j in 0..ny {
            for i in 0..nx {
                let v = if j == 0 {
                    (self.get(i, 1) - self.get(i, 0)) / h
                } else if j == ny - 1 {
                    (self.get(i, j) - self.get(i, j - 1)) / h
                } else {
                    (self.get(i, j + 1) - self.get(i, j - 1)) / (2.0 * h)
                };
                out.data[j * nx + i] = v;
            }
        }
        out
    }

    /// Restriction to every `factor`-th node of a finer field.
    pub fn subsample(&self, factor: usize) -> Result<Field2D> {
        if factor == 0 || (self.nx - 1) % factor != 0 || (self.ny - 1) % factor != 0 {
            return Err(Error::ShapeMismatch(format!(
                "cannot subsample {}x{} by {factor}",
                self.nx, self.ny
            )));
        }
        let nx = (self.nx - 1) / factor + 1;
        let ny = (self.ny - 1) / factor + 1;
        let mut out = Field2D::zeros(nx, ny, self.x0, self.y0, self.hx * factor as f64, self.hy * factor as f64);
        for j in 0..ny {
            for i in 0..nx {
                out.set(i, j, self.get(i * factor, j * factor));
            }
        }
        Ok(out)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let dim = |n: usize| {
            u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} exceeds u32")))
        };
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&dim(self.nx)?.to_le_bytes())?;
        w.write_all(&dim(self.ny)?.to_le_bytes())?;
        for v in [self.x0, self.y0, self.hx, self.hy] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Field2D> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Field2D::read_from(&mut r)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Field2D> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
            r.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4))
        };
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let nx = read_u32(r)? as usize;
        let ny = read_u32(r)? as usize;
        let mut b8 = [0u8; 8];
        let mut read_f64 = |r: &mut dyn Read| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let (x0, y0, hx, hy) = (read_f64(r)?, read_f64(r)?, read_f64(r)?, read_f64(r)?);
        if nx == 0 || ny == 0 || !(hx > 0.0) || !(hy > 0.0) {
            return Err(Error::Format(format!("invalid header nx={nx} ny={ny} hx={hx} hy={hy}")));
        }
        let mut data = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            data.push(read_f64(r)?);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after field data".into()));
        }
        Ok(Field2D {
            nx,
            ny,
            x0,
            y0,
            hx,
            hy,
            data,
        })
    }

    /// Long-format CSV `x,y,u` for plotting.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.data.len() * 40);
        out.push_str("x,y,u\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                writeln!(out, "{:?},{:?},{:?}", self.x(i), self.y(j), self.get(i, j)).expect("string write");
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}
