//! Lebesgue constants of `J_n`.

use nalgebra::{DMatrix, DVector};

use crate::analysis::projection::orthonormal_columns;
use crate::error::{GeimError, Result};
use crate::interp::InterpolationSystem;
use crate::space::{FunctionSet, NormMode};

/// Below this the cross-Gramian is treated as singular.
pub const BETA_FLOOR: f64 = 1e-14;

fn check_n(system: &InterpolationSystem, n: usize) -> Result<()> {
    if n == 0 || n > system.len() {
        Err(GeimError::OutOfRange { index: n, available: system.len() })
    } else {
        Ok(())
    }
}

/// `(Λ_n, β_n)` from the smallest singular value of the cross-Gramian between
/// `X_n` and the span of the functionals' Riesz representers.
pub fn lebesgue_hilbert(system: &InterpolationSystem, n: usize) -> Result<(f64, f64)> {
    if system.mode != NormMode::Hilbert {
        return Err(GeimError::UnsupportedMode(system.mode));
    }
    check_n(system, n)?;
    let grid = system.grid().expect("nonempty system");
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let g = grid.len();
    let u = DMatrix::from_fn(g, n, |i, j| sw[i] * system.basis[j].values()[i]);
    let v = DMatrix::from_fn(g, n, |i, j| sw[i] * system.functionals[j].weights()[i]);
    let u = orthonormal_columns(&u, "basis").map_err(|_| GeimError::IllPosed(n))?;
    let v = orthonormal_columns(&v, "representers").map_err(|_| GeimError::IllPosed(n))?;
    let cross = u.tr_mul(&v);
    let beta = cross.singular_values().iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    if !(beta > BETA_FLOOR) {
        return Err(GeimError::IllPosed(n));
    }
    Ok((1.0 / beta, beta))
}

/// Matrix of `J_n` acting on grid values.
pub fn operator_matrix(system: &InterpolationSystem, n: usize) -> Result<DMatrix<f64>> {
    check_n(system, n)?;
    let grid = system.grid().expect("nonempty system");
    let g = grid.len();
    let w = grid.weights();
    // X = B_n⁻¹ S_n by forward substitution, one grid column at a time.
    let mut x = DMatrix::zeros(n, g);
    for (k, wk) in w.iter().enumerate() {
        let m: Vec<f64> = system.functionals[..n].iter().map(|s| s.weights()[k] * wk).collect();
        let a = system.coefficients(&m)?.alpha;
        x.set_column(k, &DVector::from_vec(a));
    }
    let q = DMatrix::from_fn(g, n, |i, j| system.basis[j].values()[i]);
    Ok(q * x)
}

/// Exact operator norm of `J_n` on grid functions: `1/β_n` in Hilbert mode,
/// the maximum absolute row sum of the operator matrix in Sup mode.
pub fn lebesgue_exact(system: &InterpolationSystem, n: usize) -> Result<f64> {
    match system.mode {
        NormMode::Hilbert => Ok(lebesgue_hilbert(system, n)?.0),
        NormMode::Sup => {
            let j = operator_matrix(system, n)?;
            Ok(j.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max))
        }
    }
}

/// `max ‖J_n[φ]‖/‖φ‖` over nonzero probes: a lower bound on `Λ_n`.
pub fn lebesgue_empirical(system: &InterpolationSystem, probes: &FunctionSet, n: usize, mode: NormMode) -> Result<f64> {
    check_n(system, n)?;
    let mut best: f64 = 0.0;
    for p in probes.members() {
        let np = p.norm(mode);
        if np == 0.0 {
            continue;
        }
        best = best.max(system.interpolate(p, n)?.norm(mode) / np);
    }
    Ok(best)
}

/// `2^{n−1} max_{i<n} ‖q_i‖`.
pub fn lebesgue_upper(system: &InterpolationSystem, n: usize, mode: NormMode) -> Result<f64> {
    check_n(system, n)?;
    let m = system.basis[..n].iter().map(|q| q.norm(mode)).fold(0.0, f64::max);
    Ok(2f64.powi(n as i32 - 1) * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::space::{DiscreteFunction, Functional, Grid};

    fn system(mode: NormMode, basis: Vec<Vec<f64>>, dict: Vec<Vec<f64>>, g: &Arc<Grid>) -> InterpolationSystem {
        let basis = basis.into_iter().map(|v| DiscreteFunction::new(g.clone(), v).unwrap()).collect();
        let dict =
            dict.into_iter().map(|v| Functional::new(g.clone(), v).unwrap().normalize_dual(mode).unwrap()).collect();
        InterpolationSystem::assemble(mode, basis, dict).unwrap()
    }

    #[test]
    fn aligned_spaces_have_unit_constant() {
        let g = Arc::new(Grid::unit(3).unwrap());
        let s = system(
            NormMode::Hilbert,
            vec![vec![1., 0., 0.], vec![0., 1., 0.]],
            vec![vec![1., 0., 0.], vec![0., 1., 0.]],
            &g,
        );
        let (l, b) = lebesgue_hilbert(&s, 2).unwrap();
        assert!((l - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hilbert_exact_matches_operator_norm() {
        use crate::greedy::{run_geim, GreedyConfig};
        use crate::space::FunctionSet;
        let g = Arc::new(Grid::new(vec![0., 1., 2., 3., 4., 5.], vec![0.5, 1.0, 2.0, 1.0, 0.7, 0.3]).unwrap());
        let set = FunctionSet::from_values(
            &g,
            vec![
                vec![1., 0.5, 0.2, 0., 0.1, 0.3],
                vec![0., 1., 0.3, 0.4, -0.2, 0.],
                vec![0.2, -0.1, 1., 0.5, 0.5, 0.5],
            ],
            "s",
        )
        .unwrap();
        let dict: Vec<_> = (0..5)
            .map(|k| {
                let mut v = vec![0.0; 6];
                v[k] = 1.0;
                v[k + 1] = 0.5;
                Functional::new(g.clone(), v).unwrap().normalize_dual(NormMode::Hilbert).unwrap()
            })
            .collect();
        let r = run_geim(&set, &dict, &GreedyConfig::strong(3, NormMode::Hilbert)).unwrap();
        let sw = DMatrix::from_diagonal(&DVector::from_iterator(6, g.weights().iter().map(|w| w.sqrt())));
        let isw = DMatrix::from_diagonal(&DVector::from_iterator(6, g.weights().iter().map(|w| 1.0 / w.sqrt())));
        for n in 1..=3 {
            let (l, _) = lebesgue_hilbert(&r.system, n).unwrap();
            let j = operator_matrix(&r.system, n).unwrap();
            let spectral = (&sw * j * &isw).singular_values().max();
            assert!((l - spectral).abs() < 1e-10 * l, "{n}: {l} vs {spectral}");
        }
    }

    #[test]
    fn sup_constant_of_identity_interpolation() {
        let g = Arc::new(Grid::unit(3).unwrap());
        let s = system(
            NormMode::Sup,
            vec![vec![1., 0., 0.], vec![0., 1., 0.]],
            vec![vec![1., 0., 0.], vec![0., 1., 0.]],
            &g,
        );
        assert!((lebesgue_exact(&s, 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lebesgue_upper(&s, 2, NormMode::Sup).unwrap(), 2.0);
    }
}
