#pragma once

// Reference values computed by routes that share no code with the library:
// explicit polynomials, direct sums in long double, brute-force enumeration.

#include <complex>
#include <vector>

namespace oracle {

// psi_n from the explicit Hermite polynomial, n <= 40 or so.
double hermite_function(int n, double x);

// f_n(x) = int_0^inf k exp(-k^2/4) L_n(k^2/2) cos(kx) dk by composite Simpson.
double pattern_function(int n, double x);

double poisson(double mean, int n);
double thermal(double nbar, int n);
double squeezed_vacuum(double mean, int n);

// p_n = sum_{nu>=n} C(nu, n) eta^n (1-eta)^{nu-n} rho_nu with a plain double loop in long double.
std::vector<double> bernoulli(const std::vector<double>& rho, double eta, int n_max);

// Exact distribution of A = sum_n a_n k_n / N for a single setting, by enumerating
// every histogram of N runs over the outcomes plus one leftover category.
struct Enumerated {
  double mean = 0.0;
  double variance = 0.0;
};
Enumerated enumerate_estimator(const std::vector<double>& a, const std::vector<double>& p,
                               double leftover, int n_runs);
std::complex<double> enumerate_generating_function(const std::vector<double>& a,
                                                   const std::vector<double>& p, double leftover,
                                                   int n_runs, double lambda);
// Two kernels on the same single setting.
double enumerate_covariance(const std::vector<double>& a, const std::vector<double>& b,
                            const std::vector<double>& p, double leftover, int n_runs);

}  // namespace oracle
