//! Named trainable parameters with gradient slots.

use indexmap::IndexMap;
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One named parameter: value plus a same-shape gradient accumulator.
#[derive(Debug, Clone)]
pub struct ParamTensor {
    pub name: String,
    pub value: Array2<f64>,
    pub grad: Array2<f64>,
    pub trainable: bool,
}

/// Ordered collection of parameters. Insertion order is fixed by model
/// construction, which keeps optimizer traversal deterministic.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: IndexMap<String, ParamTensor>,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore::default()
    }

    pub fn register(&mut self, name: &str, value: Array2<f64>) {
        self.register_with(name, value, true);
    }

    pub fn register_with(&mut self, name: &str, value: Array2<f64>, trainable: bool) {
        assert!(
            !self.params.contains_key(name),
            "parameter {name} registered twice"
        );
        let grad = Array2::zeros(value.dim());
        self.params.insert(
            name.to_string(),
            ParamTensor {
                name: name.to_string(),
                value,
                grad,
                trainable,
            },
        );
    }

    pub fn get(&self, name: &str) -> &ParamTensor {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut ParamTensor {
        self.params
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.values_mut() {
            p.grad.fill(0.0);
        }
    }

    /// Multiplies every gradient by a constant (batch averaging).
    pub fn scale_grads(&mut self, factor: f64) {
        for p in self.params.values_mut() {
            p.grad.mapv_inplace(|g| g * factor);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParamTensor> {
        self.params.values()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ParamTensor> {
        self.params.values_mut()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar components.
    pub fn num_components(&self) -> usize {
        self.params.values().map(|p| p.value.len()).sum()
    }

    /// Bitwise equality of all parameter values (ignores gradients).
    pub fn values_bitwise_eq(&self, other: &ParamStore) -> bool {
        if self.params.len() != other.params.len() {
            return false;
        }
        self.params.iter().all(|(name, p)| {
            other.params.get(name).is_some_and(|q| {
                p.value.dim() == q.value.dim()
                    && p.value
                        .iter()
                        .zip(q.value.iter())
                        .all(|(a, b)| a.to_bits() == b.to_bits())
            })
        })
    }
}

/// Glorot-uniform initialization.
pub fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
}

/// Uniform initialization in `[-bound, bound]`.
pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
}
