#pragma once

namespace hcm {

struct BesselKResult {
    double value = 0.0;
    bool underflow = false;  ///< true when K_v(z) is below the smallest normal double
};

/// Modified Bessel function of the second kind K_v(z) for integer order v >= 0
/// and z > 0. Series for z <= 2, Steed's continued fraction above, upward
/// recurrence in the order. Throws DomainError for z <= 0 or v < 0.
BesselKResult bessel_k_checked(int order, double z);

/// K_v(z); returns 0 on underflow.
double bessel_k(int order, double z);

/// e^z K_v(z), finite for all z > 0 (no underflow for large arguments).
double bessel_k_scaled(int order, double z);

/// Physicists' Hermite polynomial H_k(x) by the three-term recurrence, k <= 64.
double hermite(int k, double x);

/// i^k H_k(i y), which is a real polynomial in y.
double hermite_imaginary(int k, double y);

/// n! as a double (exact up to 22!).
double factorial(int n);

/// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

}  // namespace hcm
