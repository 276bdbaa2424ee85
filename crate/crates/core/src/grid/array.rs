use std::ops::{Index, IndexMut};

/// Dense 2D array with `g` ghost layers on every side, addressed by signed
/// indices `-g ..= n + g - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Array2 {
    nx: usize,
    ny: usize,
    g: usize,
    stride: usize,
    data: Vec<f64>,
}

impl Array2 {
    pub fn new(nx: usize, ny: usize, g: usize) -> Self {
        let stride = nx + 2 * g;
        Self {
            nx,
            ny,
            g,
            stride,
            data: vec![0.0; stride * (ny + 2 * g)],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn ghost(&self) -> usize {
        self.g
    }

    #[inline]
    pub fn offset(&self, i: isize, j: isize) -> usize {
        let g = self.g as isize;
        debug_assert!(
            i >= -g && i < self.nx as isize + g && j >= -g && j < self.ny as isize + g,
            "index ({i}, {j}) outside {}x{} + {}",
            self.nx,
            self.ny,
            self.g
        );
        ((j + g) as usize) * self.stride + (i + g) as usize
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: isize, j: isize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Iterator over interior indices, row by row.
    pub fn interior(&self) -> impl Iterator<Item = (isize, isize)> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.interior().map(|(i, j)| self.get(i, j).abs()).fold(0.0, f64::max)
    }

    pub fn sum_interior(&self) -> f64 {
        self.interior().map(|(i, j)| self.get(i, j)).sum()
    }

    /// self = a * x + b * y over the whole storage.
    pub fn lincomb(&mut self, a: f64, x: &Array2, b: f64, y: &Array2) {
        debug_assert_eq!(self.data.len(), x.data.len());
        debug_assert_eq!(self.data.len(), y.data.len());
        for ((s, xv), yv) in self.data.iter_mut().zip(&x.data).zip(&y.data) {
            *s = a * xv + b * yv;
        }
    }

    pub fn has_non_finite(&self) -> bool {
        self.data.iter().any(|v| !v.is_finite())
    }

    pub fn same_shape(&self, other: &Array2) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.g == other.g
    }
}

impl Index<(isize, isize)> for Array2 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (isize, isize)) -> &f64 {
        &self.data[self.offset(i, j)]
    }
}

impl IndexMut<(isize, isize)> for Array2 {
    #[inline]
    fn index_mut(&mut self, (i, j): (isize, isize)) -> &mut f64 {
        let o = self.offset(i, j);
        &mut self.data[o]
    }
}
