#pragma once

#include "sgcalc/generator.hpp"

#include <cmath>
#include <vector>

namespace sgcalc {

struct ScaleGridParams {
  double rho = 1.189207115002721;  // 2^(1/4)
  double alpha = 1e-4;
  double beta = 1e4;
};

/// Geometric scales t_j = t_min rho^j covering [alpha / lambda_max, beta / lambda_2]
/// with midpoint-in-log-t weights (ln rho each) for integrals against dt/t.
class ScaleGrid {
 public:
  ScaleGrid() = default;
  ScaleGrid(double t_min, double t_max, double rho);

  static ScaleGrid for_spectrum(double lambda_max, double lambda_2, const ScaleGridParams& params = {});
  static ScaleGrid for_generator(const Generator& gen, const ScaleGridParams& params = {});

  std::size_t size() const { return t_.size(); }
  bool empty() const { return t_.empty(); }
  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& weights() const { return w_; }
  double t_at(std::size_t j) const { return t_[j]; }
  double weight(std::size_t j) const { return w_[j]; }
  double rho() const { return rho_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

  /// Same range with rho -> sqrt(rho).
  ScaleGrid refined() const { return ScaleGrid(t_min_, t_max_, std::sqrt(rho_)); }
  /// Same range with rho -> rho^2.
  ScaleGrid coarsened() const { return ScaleGrid(t_min_, t_max_, rho_ * rho_); }

 private:
  std::vector<double> t_;
  std::vector<double> w_;
  double rho_ = 0.0;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
};

}  // namespace sgcalc
