#pragma once

namespace wot {

/// Standard normal CDF by Hart's double-precision rational approximation
/// (absolute error below 1e-14).
double normal_cdf(double x);

/// Zero-rate Black-Scholes call. Degenerates to the intrinsic value when
/// vol * sqrt(T) == 0 and to the spot when strike == 0.
double bs_call(double spot, double strike, double vol, double maturity);

}  // namespace wot
