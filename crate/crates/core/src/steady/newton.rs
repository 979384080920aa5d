use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Stop once the residual max-norm falls below this.
    pub converge_tol: f64,
    /// Accept a non-converged end point whose residual max-norm is below this.
    pub accept_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            converge_tol: 1e-8,
            accept_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub accepted: bool,
}

/// Damped Newton iteration with a forward-difference Jacobian and Armijo
/// backtracking on the residual norm.
///
/// `f` may fail for points outside its domain; such trial points are
/// treated like a failed line-search step. `scale` gives the typical
/// magnitude of each unknown for the difference steps.
pub fn newton<F>(mut f: F, x0: DVector<f64>, scale: &[f64], opts: &NewtonOptions) -> Option<NewtonOutcome>
where
    F: FnMut(&DVector<f64>) -> Option<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut norm = r.amax();
    let mut iterations = 0;
    while norm > opts.converge_tol && iterations < opts.max_iterations {
        iterations += 1;
        let Some(jac) = jacobian(&mut f, &x, &r, scale) else {
            break;
        };
        let Some(step) = jac.lu().solve(&(-&r)) else {
            break;
        };
        let phi = r.norm_squared();
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-10 {
            let trial = &x + alpha * &step;
            if let Some(rt) = f(&trial) {
                if rt.iter().all(|v| v.is_finite()) && rt.norm_squared() <= (1.0 - 1e-4 * alpha) * phi {
                    x = trial;
                    r = rt;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
        norm = r.amax();
    }
    Some(NewtonOutcome {
        accepted: norm <= opts.accept_tol,
        x,
        residual_norm: norm,
        iterations,
    })
}

fn jacobian<F>(f: &mut F, x: &DVector<f64>, r: &DVector<f64>, scale: &[f64]) -> Option<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Option<DVector<f64>>,
{
    let mut jac = DMatrix::zeros(r.len(), x.len());
    for j in 0..x.len() {
        let h = 1e-7 * x[j].abs().max(scale[j]);
        let mut xp = x.clone();
        xp[j] += h;
        // Fall back to a backward difference at the edge of the domain.
        let column = match f(&xp) {
            Some(rp) => (rp - r) / h,
            None => {
                xp[j] = x[j] - h;
                (r - f(&xp)?) / h
            }
        };
        jac.set_column(j, &column);
    }
    Some(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonlinear_system() {
        // x² + y² = 4, x = y ⇒ x = y = √2.
        let f = |v: &DVector<f64>| {
            Some(DVector::from_vec(vec![v[0] * v[0] + v[1] * v[1] - 4.0, v[0] - v[1]]))
        };
        let out = newton(f, DVector::from_vec(vec![3.0, 0.5]), &[1.0, 1.0], &NewtonOptions::default())
            .unwrap();
        assert!(out.accepted);
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-8);
        assert!(out.residual_norm <= 1e-8);
    }

    #[test]
    fn respects_domain_failures() {
        // sqrt(x) = 2 from a start where full steps would leave the domain.
        let f = |v: &DVector<f64>| {
            (v[0] >= 0.0).then(|| DVector::from_vec(vec![v[0].sqrt() - 2.0]))
        };
        let out = newton(f, DVector::from_vec(vec![0.01]), &[1.0], &NewtonOptions::default()).unwrap();
        assert!(out.accepted);
        assert!((out.x[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn reports_unsolvable_systems() {
        let f = |v: &DVector<f64>| Some(DVector::from_vec(vec![v[0] * v[0] + 1.0]));
        let out = newton(f, DVector::from_vec(vec![1.0]), &[1.0], &NewtonOptions::default()).unwrap();
        assert!(!out.accepted);
    }
}
