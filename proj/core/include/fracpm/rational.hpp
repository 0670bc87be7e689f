#pragma once

#include <vector>

#include "fracpm/sparse.hpp"

namespace fracpm {

/// Partial-fraction rational approximant r(z) = offset + sum_j w_j/(z - p_j)
/// of z^{-s} on [lo, hi], with a validated max relative error on a dense
/// log-spaced grid. All poles are real and lie strictly left of the interval.
struct RationalApprox {
    double s = 0.0;
    double lo = 0.0, hi = 0.0;
    std::vector<double> poles;
    std::vector<double> weights;
    double offset = 0.0;  // value at infinity
    int degree = 0;
    double max_rel_error = 0.0;

    double evaluate(double z) const;
};

/// Greedy barycentric interpolation of z^{-s} over log-spaced samples of
/// [lo, hi], converted to partial fractions; the degree grows until the
/// validated max relative error on a 10^4-point grid is <= tol. Throws
/// std::runtime_error when the tolerance is unreachable within max_degree.
RationalApprox buildRationalApprox(double s, double lo, double hi, double tol,
                                   int max_degree = 30);

/// Best fit found at exactly the given degree (no tolerance gate); used to
/// study the error-vs-degree trend.
RationalApprox buildRationalApproxFixedDegree(double s, double lo, double hi, int degree);

}  // namespace fracpm
