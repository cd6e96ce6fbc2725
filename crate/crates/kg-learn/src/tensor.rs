//! Dense real and complex tensors in row-major order.
//!
//! Every operation copies; there are no views. Shapes are checked and
//! mismatches come back as [`TensorError`] rather than panics.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("norm exponent must be at least 1, got {0}")]
    Exponent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn check_dims(dims: &[usize], len: usize) -> Result<(), TensorError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(TensorError::Shape(format!("dimensions {dims:?} must be non-empty and positive")));
    }
    let n: usize = dims.iter().product();
    if n != len {
        return Err(TensorError::Shape(format!("dimensions {dims:?} need {n} entries, got {len}")));
    }
    Ok(())
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Tensor, TensorError> {
        check_dims(&dims, data.len())?;
        Ok(Tensor { dims, data })
    }

    pub fn vector(data: Vec<f64>) -> Result<Tensor, TensorError> {
        Tensor::new(vec![data.len()], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Tensor, TensorError> {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn filled(dims: Vec<usize>, value: f64) -> Result<Tensor, TensorError> {
        let n = dims.iter().product();
        Tensor::new(dims, vec![value; n])
    }

    pub fn identity(n: usize) -> Result<Tensor, TensorError> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Tensor::matrix(n, n, data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a zero-based multi-index.
    pub fn get(&self, index: &[usize]) -> Option<f64> {
        if index.len() != self.dims.len() || index.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return None;
        }
        let flat = index.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i);
        Some(self.data[flat])
    }

    pub fn scale(&self, k: f64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        same_dims(&self.dims, &other.dims)?;
        Ok(Tensor { dims: self.dims.clone(), data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }
}

fn same_dims(a: &[usize], b: &[usize]) -> Result<(), TensorError> {
    if a != b {
        return Err(TensorError::Shape(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// `(Σ|x_i|^p)^(1/p)` over a slice.
pub fn norm_p(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn lp_norm(x: &Tensor, p: f64) -> Result<f64, TensorError> {
    if p.is_nan() || p < 1.0 {
        return Err(TensorError::Exponent(p));
    }
    if x.order() != 1 {
        return Err(TensorError::Shape(format!("L^p norm needs a vector, got dimensions {:?}", x.dims)));
    }
    Ok(norm_p(&x.data, p))
}

/// `L^{p,q}` norm of a matrix: the q-norm of the per-column p-norms.
pub fn lpq_norm(x: &Tensor, p: f64, q: f64) -> Result<f64, TensorError> {
    for e in [p, q] {
        if e.is_nan() || e < 1.0 {
            return Err(TensorError::Exponent(e));
        }
    }
    let [rows, cols] = x.dims[..] else {
        return Err(TensorError::Shape(format!("L^(p,q) norm needs a matrix, got dimensions {:?}", x.dims)));
    };
    let columns: Vec<f64> = (0..cols)
        .map(|j| norm_p(&(0..rows).map(|i| x.data[i * cols + j]).collect::<Vec<_>>(), p))
        .collect();
    Ok(norm_p(&columns, q))
}

/// Contracts the last mode of `x` with the first mode of `y`.
pub fn matmul(x: &Tensor, y: &Tensor) -> Result<Tensor, TensorError> {
    let k = *x.dims.last().expect("order >= 1");
    if k != y.dims[0] {
        return Err(TensorError::Shape(format!("cannot multiply {:?} by {:?}", x.dims, y.dims)));
    }
    let rows = x.data.len() / k;
    let cols = y.data.len() / k;
    let mut data = vec![0.0; rows * cols];
    for i in 0..rows {
        for l in 0..k {
            let a = x.data[i * k + l];
            for j in 0..cols {
                data[i * cols + j] += a * y.data[l * cols + j];
            }
        }
    }
    let mut dims: Vec<usize> = x.dims[..x.dims.len() - 1].iter().chain(&y.dims[1..]).copied().collect();
    if dims.is_empty() {
        dims.push(1);
    }
    Tensor::new(dims, data)
}

pub fn hadamard(x: &Tensor, y: &Tensor) -> Result<Tensor, TensorError> {
    same_dims(&x.dims, &y.dims)?;
    Ok(Tensor { dims: x.dims.clone(), data: x.data.iter().zip(&y.data).map(|(a, b)| a * b).collect() })
}

pub fn tensor_product(x: &Tensor, y: &Tensor) -> Tensor {
    let data = x.data.iter().flat_map(|a| y.data.iter().map(move |b| a * b)).collect();
    Tensor { dims: x.dims.iter().chain(&y.dims).copied().collect(), data }
}

/// `X ⊗_n Y` for a matrix `Y ∈ R^{b, a_n}`; `n` is one-based.
pub fn n_mode_product(x: &Tensor, y: &Tensor, n: usize) -> Result<Tensor, TensorError> {
    if n == 0 || n > x.order() {
        return Err(TensorError::Shape(format!("mode {n} out of range for order {}", x.order())));
    }
    let [b, k] = y.dims[..] else {
        return Err(TensorError::Shape(format!("n-mode product needs a matrix, got dimensions {:?}", y.dims)));
    };
    let an = x.dims[n - 1];
    if k != an {
        return Err(TensorError::Shape(format!("matrix {:?} does not match mode {n} of {:?}", y.dims, x.dims)));
    }
    let outer: usize = x.dims[..n - 1].iter().product();
    let inner: usize = x.dims[n..].iter().product();
    let mut data = vec![0.0; outer * b * inner];
    for o in 0..outer {
        for j in 0..b {
            for i in 0..an {
                let w = y.data[j * an + i];
                for t in 0..inner {
                    data[(o * b + j) * inner + t] += w * x.data[(o * an + i) * inner + t];
                }
            }
        }
    }
    let mut dims = x.dims.clone();
    dims[n - 1] = b;
    Tensor::new(dims, data)
}

/// `(x ⋆ y)_k = Σ_i x_i · y_{(k+i) mod a}` with zero-based indices.
pub fn circular_correlation(x: &[f64], y: &[f64]) -> Result<Vec<f64>, TensorError> {
    if x.len() != y.len() {
        return Err(TensorError::Shape(format!("lengths {} and {}", x.len(), y.len())));
    }
    let a = x.len();
    Ok((0..a).map(|k| (0..a).map(|i| x[i] * y[(k + i) % a]).sum()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<ComplexTensor, TensorError> {
        check_dims(&dims, data.len())?;
        Ok(ComplexTensor { dims, data })
    }

    /// Vector from split storage: `d` real parts followed by `d` imaginary parts.
    pub fn from_split(parts: &[f64]) -> Result<ComplexTensor, TensorError> {
        if parts.is_empty() || parts.len() % 2 != 0 {
            return Err(TensorError::Shape(format!("split complex vector of odd length {}", parts.len())));
        }
        let d = parts.len() / 2;
        ComplexTensor::new(vec![d], (0..d).map(|i| Complex64::new(parts[i], parts[d + i])).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn conj(&self) -> ComplexTensor {
        ComplexTensor { dims: self.dims.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn hadamard(&self, other: &ComplexTensor) -> Result<ComplexTensor, TensorError> {
        same_dims(&self.dims, &other.dims)?;
        Ok(ComplexTensor { dims: self.dims.clone(), data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect() })
    }

    pub fn sum(&self) -> Complex64 {
        self.data.iter().sum()
    }

    /// Euclidean norm `sqrt(Σ|z|²)`.
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(dims: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(dims.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn norms() {
        assert_eq!(lp_norm(&t(&[2], &[3.0, 4.0]), 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&t(&[3], &[1.0, -1.0, 1.0]), 1.0).unwrap(), 3.0);
        assert_eq!(lp_norm(&t(&[4], &[0.0; 4]), 3.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&t(&[2], &[1.0, 1.0]), 0.5), Err(TensorError::Exponent(0.5)));
        let m = t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        assert!((lpq_norm(&m, 2.0, 2.0).unwrap() - 30f64.sqrt()).abs() < 1e-12);
        // Columns (1,3) and (2,4) have L1 norms 4 and 6.
        assert_eq!(lpq_norm(&m, 1.0, 1.0).unwrap(), 10.0);
    }

    #[test]
    fn shapes_are_validated() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
        assert!(matmul(&t(&[2, 3], &[0.0; 6]), &t(&[2, 3], &[0.0; 6])).is_err());
        assert!(hadamard(&t(&[2], &[1.0, 2.0]), &t(&[1, 2], &[1.0, 2.0])).is_err());
        assert!(circular_correlation(&[1.0], &[1.0, 2.0]).is_err());
        assert!(n_mode_product(&t(&[2, 3], &[0.0; 6]), &t(&[2, 2], &[0.0; 4]), 2).is_err());
        assert!(n_mode_product(&t(&[2, 3], &[0.0; 6]), &t(&[3, 3], &[0.0; 9]), 3).is_err());
    }

    #[test]
    fn matmul_examples() {
        let m = t(&[3, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(matmul(&Tensor::identity(3).unwrap(), &m).unwrap(), m);
        let dotp = matmul(&t(&[1, 2], &[1.0, 2.0]), &t(&[2, 1], &[1.0, 2.0])).unwrap();
        assert_eq!(dotp, t(&[1, 1], &[5.0]));
        let v = matmul(&t(&[2], &[1.0, 2.0]), &t(&[2], &[3.0, 4.0])).unwrap();
        assert_eq!(v, t(&[1], &[11.0]));
        let higher = matmul(&t(&[2, 1, 2], &[1.0, 2.0, 3.0, 4.0]), &t(&[2, 3], &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(higher.dims(), &[2, 1, 3]);
        assert_eq!(higher.data(), &[1.0, 2.0, 3.0, 3.0, 4.0, 7.0]);
    }

    #[test]
    fn products() {
        assert_eq!(hadamard(&t(&[2], &[1.0, 2.0]), &t(&[2], &[3.0, 4.0])).unwrap().data(), &[3.0, 8.0]);
        let outer = tensor_product(&t(&[2], &[1.0, 2.0]), &t(&[2], &[3.0, 4.0]));
        assert_eq!(outer, t(&[2, 2], &[3.0, 4.0, 6.0, 8.0]));
        let big = tensor_product(&t(&[2, 3], &[1.0; 6]), &Tensor::filled(vec![3, 4, 5], 2.0).unwrap());
        assert_eq!(big.dims(), &[2, 3, 3, 4, 5]);
        let x = t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(tensor_product(&t(&[1], &[1.0]), &x).data(), x.data());
    }

    #[test]
    fn n_mode_examples() {
        let x = Tensor::new(vec![2, 3, 4], (0..24).map(f64::from).collect()).unwrap();
        let y = Tensor::new(vec![5, 3], (0..15).map(f64::from).collect()).unwrap();
        let z = n_mode_product(&x, &y, 2).unwrap();
        assert_eq!(z.dims(), &[2, 5, 4]);
        // Entry (1,4,2) one-based: Σ_k X_{1k2} Y_{4k}.
        let expect: f64 = (0..3).map(|k| x.get(&[0, k, 1]).unwrap() * y.get(&[3, k]).unwrap()).sum();
        assert_eq!(z.get(&[0, 3, 1]), Some(expect));
        assert_eq!(n_mode_product(&x, &Tensor::identity(3).unwrap(), 2).unwrap(), x);
        let flat = n_mode_product(&x, &Tensor::filled(vec![1, 4], 1.0).unwrap(), 3).unwrap();
        assert_eq!(flat.dims(), &[2, 3, 1]);
        assert_eq!(flat.get(&[1, 2, 0]), Some(20.0 + 21.0 + 22.0 + 23.0));
    }

    #[test]
    fn circular_correlation_examples() {
        assert_eq!(circular_correlation(&[1.0, 0.0], &[2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(circular_correlation(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [6.0, 7.0, 8.0, 9.0, 10.0];
        let c = circular_correlation(&x, &y).unwrap();
        assert_eq!(c[0], dot(&x, &y));
        // Fourth entry wraps around: x1y4 + x2y5 + x3y1 + x4y2 + x5y3.
        assert_eq!(c[3], 9.0 + 20.0 + 18.0 + 28.0 + 40.0);
    }

    #[test]
    fn complex_ops() {
        let a = ComplexTensor::from_split(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(a.data(), &[Complex64::new(1.0, 3.0), Complex64::new(2.0, 4.0)]);
        let s = a.hadamard(&a.conj()).unwrap().sum();
        assert_eq!(s, Complex64::new(30.0, 0.0));
        assert!((a.norm2() - 30f64.sqrt()).abs() < 1e-12);
        assert!(ComplexTensor::from_split(&[1.0]).is_err());
    }
}
