#pragma once

#include <functional>

namespace hcm {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error
};

using RealFunction = std::function<double(double)>;

/// Integral of f over [a, b] with integrable endpoint singularities allowed
/// (double-exponential rule). `f` is never evaluated exactly at an endpoint.
QuadratureResult integrate_finite(const RealFunction& f, double a, double b, double rel_tol = 1e-12);

/// Integral of f over (0, inf) where f may have a logarithmic singularity at
/// 0 and decays on the length scale `scale`.
QuadratureResult integrate_half_line(const RealFunction& f, double scale, double rel_tol = 1e-12);

/// Integral of f over the real line with x = 0 treated as a panel boundary.
QuadratureResult integrate_real_line_split(const RealFunction& f, double scale, double rel_tol = 1e-12);

/// Adaptive Gauss-Kronrod on a finite interval of a smooth integrand.
QuadratureResult integrate_adaptive(const RealFunction& f, double a, double b, double rel_tol = 1e-10,
                                    unsigned max_depth = 20);

}  // namespace hcm
