#pragma once

#include <functional>
#include <string>

namespace sgcalc {

/// A scalar function g on [0, inf) applied to the spectrum of tL.
/// `name` identifies the function (including parameters) for caching.
struct SpectralFunction {
  std::string name;
  std::function<double(double)> eval;
  double at_zero = 0.0;      ///< g(0), used for the kernel of L
  double decay_order = 0.0;  ///< s with |g(u)| <~ u^s / (1 + u^2s), 0 when not applicable

  double operator()(double u) const { return u == 0.0 ? at_zero : eval(u); }
};

namespace fn {

/// e^-u
SpectralFunction exp_neg();
/// u^k e^-u
SpectralFunction semigroup_derivative(int k);
/// u^k e^-2u, the symbol of (sL)^k e^-sL composed with e^-sL
SpectralFunction derivative_double_heat(int k);
/// u^N e^-u (1 - e^-u)
SpectralFunction psi(int N);
/// u^k e^-u (1 - e^-u): the Carleson integrand symbol (same as psi(k))
SpectralFunction carleson(int k);
/// (1 + u)^-M
SpectralFunction resolvent_power(int M);
/// (1 + u)^M
SpectralFunction resolvent_growth(int M);
/// (1 - e^-u)^kappa
SpectralFunction heat_complement(int kappa);
/// -(e^-u - e^-2u / 2): the primitive -int_u^inf psi(y) dy / y for psi = psi(1)
SpectralFunction alt_phi();
/// Pointwise product g1 * g2.
SpectralFunction product(const SpectralFunction& a, const SpectralFunction& b);
/// Arbitrary function; `at_zero` must equal the limit at 0.
SpectralFunction custom(std::string name, std::function<double(double)> eval, double at_zero);

}  // namespace fn

/// Integral over (0, inf) of g(u) du / u by adaptive Gauss-Kronrod on
/// subintervals of a logarithmic partition. Used as an oracle for the
/// scale-grid quadrature.
double integrate_du_over_u(const std::function<double(double)>& g, double abs_tol = 1e-13);

/// Integral over (a, b) of g(u) du, adaptive Gauss-Kronrod (7-15).
double integrate(const std::function<double(double)>& g, double a, double b, double abs_tol = 1e-13);

}  // namespace sgcalc
