#pragma once

#include <span>
#include <vector>

namespace photostat {

/// Normalized harmonic-oscillator eigenfunctions psi_0..psi_{out.size()-1} at x,
/// in units where the ground-state density is pi^{-1/2} exp(-x^2).
///
/// Uses the upward three-term recurrence
///   psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}
/// with the Gaussian factor carried as a separate log-scale, so large orders
/// at large |x| neither overflow nor lose the small values to underflow early.
void hermite_functions(double x, std::span<double> out);

std::vector<double> hermite_functions(double x, int nu_max);

double hermite_function(int nu, double x);

/// Classical turning point sqrt(2 nu + 1) of the nu-th eigenfunction.
double turning_point(int nu);

}  // namespace photostat
