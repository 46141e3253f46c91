#include "sgcalc/spectral_function.hpp"

#include "sgcalc/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace sgcalc {
namespace fn {
namespace {

double ipow(double u, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= u;
  return r;
}

void require_nonneg(int k, const char* what) {
  if (k < 0) throw InvalidArgument(std::string(what) + " must be >= 0");
}

}  // namespace

SpectralFunction exp_neg() { return {"exp", [](double u) { return std::exp(-u); }, 1.0, 0.0}; }

SpectralFunction semigroup_derivative(int k) {
  require_nonneg(k, "derivative order");
  if (k == 0) return exp_neg();
  return {"u^" + std::to_string(k) + "*exp", [k](double u) { return ipow(u, k) * std::exp(-u); }, 0.0,
          static_cast<double>(k)};
}

SpectralFunction derivative_double_heat(int k) {
  require_nonneg(k, "derivative order");
  return {"u^" + std::to_string(k) + "*exp2", [k](double u) { return ipow(u, k) * std::exp(-2.0 * u); },
          k == 0 ? 1.0 : 0.0, static_cast<double>(k)};
}

SpectralFunction psi(int N) {
  if (N < 1) throw InvalidArgument("psi order N must be >= 1");
  return {"psi" + std::to_string(N),
          [N](double u) { return ipow(u, N) * std::exp(-u) * -std::expm1(-u); }, 0.0, static_cast<double>(N)};
}

SpectralFunction carleson(int k) {
  if (k < 1) throw InvalidArgument("Carleson order k must be >= 1");
  return psi(k);
}

SpectralFunction resolvent_power(int M) {
  require_nonneg(M, "resolvent power");
  return {"res-" + std::to_string(M), [M](double u) { return std::pow(1.0 + u, -M); }, 1.0, 0.0};
}

SpectralFunction resolvent_growth(int M) {
  require_nonneg(M, "resolvent power");
  return {"res+" + std::to_string(M), [M](double u) { return ipow(1.0 + u, M); }, 1.0, 0.0};
}

SpectralFunction heat_complement(int kappa) {
  require_nonneg(kappa, "kappa");
  return {"1-exp^" + std::to_string(kappa), [kappa](double u) { return ipow(-std::expm1(-u), kappa); },
          kappa == 0 ? 1.0 : 0.0, 0.0};
}

SpectralFunction alt_phi() {
  return {"alt_phi", [](double u) { return -(std::exp(-u) - 0.5 * std::exp(-2.0 * u)); }, -0.5, 0.0};
}

SpectralFunction product(const SpectralFunction& a, const SpectralFunction& b) {
  auto ea = a.eval, eb = b.eval;
  return {a.name + "*" + b.name, [ea, eb](double u) { return ea(u) * eb(u); }, a.at_zero * b.at_zero,
          a.decay_order + b.decay_order};
}

SpectralFunction custom(std::string name, std::function<double(double)> eval, double at_zero) {
  return {std::move(name), std::move(eval), at_zero, 0.0};
}

}  // namespace fn

double integrate(const std::function<double(double)>& g, double a, double b, double abs_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  double v = gauss_kronrod<double, 15>::integrate(g, a, b, 15, abs_tol, &err);
  return v;
}

double integrate_du_over_u(const std::function<double(double)>& g, double abs_tol) {
  // Substituting u = e^s turns du/u into ds; the integrand decays in both directions.
  auto h = [&g](double s) { return g(std::exp(s)); };
  double total = 0.0;
  for (double s = -60.0; s < 8.0; s += 2.0) total += integrate(h, s, s + 2.0, abs_tol / 34.0);
  return total;
}

}  // namespace sgcalc
