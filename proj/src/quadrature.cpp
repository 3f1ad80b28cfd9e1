#include "hcm/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace hcm {

namespace {

// Guards against the (measure-zero) singular point returning +inf.
double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

QuadratureResult integrate_finite(const RealFunction& f, double a, double b, double rel_tol) {
    boost::math::quadrature::tanh_sinh<double> rule;
    double error = 0.0;
    double l1 = 0.0;
    const double value = rule.integrate([&](double x) { return finite_or_zero(f(x)); }, a, b, rel_tol, &error, &l1);
    return {value, error};
}

QuadratureResult integrate_half_line(const RealFunction& f, double scale, double rel_tol) {
    // [0, scale] carries the singularity; the tail is smooth and decaying.
    const auto head = integrate_finite(f, 0.0, scale, rel_tol);
    boost::math::quadrature::exp_sinh<double> tail_rule;
    double error = 0.0;
    double l1 = 0.0;
    const double tail = tail_rule.integrate([&](double x) { return finite_or_zero(f(x)); }, scale,
                                            std::numeric_limits<double>::infinity(), rel_tol, &error, &l1);
    return {head.value + tail, head.error + error};
}

QuadratureResult integrate_real_line_split(const RealFunction& f, double scale, double rel_tol) {
    const auto pos = integrate_half_line(f, scale, rel_tol);
    const auto neg = integrate_half_line([&](double x) { return f(-x); }, scale, rel_tol);
    return {pos.value + neg.value, pos.error + neg.error};
}

QuadratureResult integrate_adaptive(const RealFunction& f, double a, double b, double rel_tol, unsigned max_depth) {
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &error);
    return {value, error};
}

}  // namespace hcm
