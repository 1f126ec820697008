//! Central finite-difference gradient verification.

use ndarray::Array2;

use super::graph::{Graph, Var};
use super::params::ParamStore;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub components_checked: usize,
}

/// Compares analytic gradients against central finite differences for every
/// component of every parameter in the store.
///
/// `loss_fn` must build the scalar loss for the store's current values. The
/// relative error per component is |a−n| / max(|a|, |n|, 1e-3); components
/// where both gradients are below 1e-6 are treated as zero. The store's
/// values are restored before returning.
pub fn grad_check<F>(store: &mut ParamStore, epsilon: f64, mut loss_fn: F) -> Result<GradCheckReport>
where
    F: FnMut(&mut Graph, &ParamStore) -> Result<Var>,
{
    // Analytic pass.
    let mut g = Graph::new();
    let loss = loss_fn(&mut g, store)?;
    g.backward(loss);
    store.zero_grads();
    g.accumulate_grads(store, 1.0);
    let analytic: Vec<(String, Array2<f64>)> = store
        .iter()
        .map(|p| (p.name.clone(), p.grad.clone()))
        .collect();

    let eval = |store: &ParamStore, loss_fn: &mut F| -> Result<f64> {
        let mut g = Graph::new();
        let loss = loss_fn(&mut g, store)?;
        Ok(g.scalar_value(loss))
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        components_checked: 0,
    };

    for (name, analytic_grad) in &analytic {
        let dim = analytic_grad.dim();
        for i in 0..dim.0 {
            for j in 0..dim.1 {
                let original = store.get(name).value[(i, j)];
                store.get_mut(name).value[(i, j)] = original + epsilon;
                let plus = eval(store, &mut loss_fn)?;
                store.get_mut(name).value[(i, j)] = original - epsilon;
                let minus = eval(store, &mut loss_fn)?;
                store.get_mut(name).value[(i, j)] = original;

                let numeric = (plus - minus) / (2.0 * epsilon);
                let a = analytic_grad[(i, j)];
                let scale = a.abs().max(numeric.abs());
                let rel = if scale < 1e-6 {
                    0.0
                } else {
                    (a - numeric).abs() / scale.max(1e-3)
                };
                report.components_checked += 1;
                if rel > report.max_rel_error {
                    report.max_rel_error = rel;
                    report.worst_param = format!("{name}[{i},{j}]");
                }
            }
        }
    }
    Ok(report)
}
