#include "sgcalc/scale_grid.hpp"

#include "sgcalc/error.hpp"

#include <cmath>

namespace sgcalc {

ScaleGrid::ScaleGrid(double t_min, double t_max, double rho) : rho_(rho), t_min_(t_min), t_max_(t_max) {
  if (!(t_min > 0.0) || !std::isfinite(t_min)) throw EmptyGrid("t_min must be positive and finite");
  if (!(t_max >= t_min) || !std::isfinite(t_max)) throw EmptyGrid("t_max must be finite and >= t_min");
  if (!(rho > 1.0)) throw EmptyGrid("grid ratio rho must exceed 1");
  const double lr = std::log(rho);
  const auto J = static_cast<std::size_t>(std::ceil(std::log(t_max / t_min) / lr - 1e-9));
  t_.reserve(J + 1);
  for (std::size_t j = 0; j <= J; ++j) t_.push_back(t_min * std::exp(lr * static_cast<double>(j)));
  w_.assign(t_.size(), lr);
}

ScaleGrid ScaleGrid::for_spectrum(double lambda_max, double lambda_2, const ScaleGridParams& params) {
  if (!(lambda_max > 0.0) || !(lambda_2 > 0.0))
    throw EmptyGrid("scale grid needs a positive spectrum (lambda_max, lambda_2 > 0)");
  if (!(params.alpha > 0.0) || !(params.beta > 0.0)) throw EmptyGrid("alpha and beta must be positive");
  return ScaleGrid(params.alpha / lambda_max, params.beta / lambda_2, params.rho);
}

ScaleGrid ScaleGrid::for_generator(const Generator& gen, const ScaleGridParams& params) {
  return for_spectrum(gen.lambda_max(), gen.lambda_min_positive(), params);
}

}  // namespace sgcalc
