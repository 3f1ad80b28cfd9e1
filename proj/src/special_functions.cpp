#include "hcm/special_functions.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hcm/errors.hpp"

namespace hcm {

namespace {

constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kSeriesCrossover = 2.0;
constexpr int kMaxIterations = 10000;

struct OrderPair {
    double k0;
    double k1;
};

// Power series about z = 0, valid for 0 < z <= 2. Returns e^z K0, e^z K1.
OrderPair scaled_k01_series(double z) {
    const double t = 0.25 * z * z;
    const double log_half = std::log(0.5 * z);

    // I0, I1 and the digamma-weighted sums share the factor t^k / (k! (k+n)!).
    double term0 = 1.0;  // t^k / (k!)^2
    double term1 = 1.0;  // t^k / (k! (k+1)!)
    double harmonic = 0.0;  // H_k
    double i0 = 0.0, i1 = 0.0, sum0 = 0.0, sum1 = 0.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            term0 *= t / (static_cast<double>(k) * k);
            term1 *= t / (static_cast<double>(k) * (k + 1));
            harmonic += 1.0 / k;
        }
        const double psi_k1 = -kEulerGamma + harmonic;                // psi(k+1)
        const double psi_k2 = -kEulerGamma + harmonic + 1.0 / (k + 1);  // psi(k+2)
        i0 += term0;
        i1 += term1;
        sum0 += harmonic * term0;
        sum1 += (psi_k1 + psi_k2) * term1;
        if (term0 < 1e-18 * i0 && term1 < 1e-18 * i1) break;
    }
    i1 *= 0.5 * z;
    const double k0 = -(log_half + kEulerGamma) * i0 + sum0;
    const double k1 = 1.0 / z + log_half * i1 - 0.25 * z * sum1;
    const double scale = std::exp(z);
    return {k0 * scale, k1 * scale};
}

// Steed's continued fraction (Temme's CF2 with order mu = 0), z > 2.
OrderPair scaled_k01_continued_fraction(double z) {
    constexpr double eps = 1e-16;
    double b = 2.0 * (1.0 + z);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIterations; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    if (i > kMaxIterations) {
        throw ConvergenceError(fmt::format("Bessel K continued fraction did not converge at z = {}", z), 0.0);
    }
    h *= a1;
    const double k0 = std::sqrt(std::numbers::pi / (2.0 * z)) / s;
    const double k1 = k0 * (z + 0.5 - h) / z;
    return {k0, k1};
}

}  // namespace

double bessel_k_scaled(int order, double z) {
    if (order < 0) throw DomainError(fmt::format("Bessel K order {} must be >= 0", order));
    if (!(z > 0.0)) throw DomainError(fmt::format("Bessel K argument {} must be > 0", z));
    if (std::isinf(z)) return 0.0;

    const OrderPair k01 = z <= kSeriesCrossover ? scaled_k01_series(z) : scaled_k01_continued_fraction(z);
    if (order == 0) return k01.k0;
    double prev = k01.k0;
    double cur = k01.k1;
    for (int v = 1; v < order; ++v) {
        const double next = prev + (2.0 * v / z) * cur;
        prev = cur;
        cur = next;
    }
    return cur;
}

BesselKResult bessel_k_checked(int order, double z) {
    const double scaled = bessel_k_scaled(order, z);
    const double value = scaled * std::exp(-z);
    if (value < DBL_MIN) return {0.0, true};
    return {value, false};
}

double bessel_k(int order, double z) { return bessel_k_checked(order, z).value; }

double hermite(int k, double x) {
    if (k < 0 || k > 64) throw DomainError(fmt::format("Hermite degree {} outside [0, 64]", k));
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int n = 1; n < k; ++n) {
        const double next = 2.0 * x * cur - 2.0 * n * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_imaginary(int k, double y) {
    if (k < 0 || k > 64) throw DomainError(fmt::format("Hermite degree {} outside [0, 64]", k));
    // G_k(y) = i^k H_k(iy): G_0 = 1, G_1 = -2y, G_{k+1} = -2y G_k + 2k G_{k-1}.
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = -2.0 * y;
    for (int n = 1; n < k; ++n) {
        const double next = -2.0 * y * cur + 2.0 * n * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double factorial(int n) {
    if (n < 0) throw DomainError("factorial of a negative number");
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return n <= 60 ? std::round(c) : c;
}

}  // namespace hcm
