#pragma once

#include "sgcalc/space.hpp"

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgcalc {

enum class GeneratorKind { Combinatorial, DivergenceForm };

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

/// Dense spectral data of L. Columns of `vectors` are orthonormal in the
/// mu-weighted inner product; `values` is ascending and values[0] == 0 with a
/// constant eigenvector.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// The operator L = M^-1 K on a Space, where M = diag(mu) and
/// K = B^T diag(A_e / len_e^2) B is the symmetric stiffness matrix (B the
/// signed incidence matrix). L is self-adjoint for the mu-weighted inner
/// product and annihilates constants.
class Generator {
 public:
  static constexpr std::size_t kDefaultDenseCap = 4096;

  /// `coefficients` holds one A_e per edge for the divergence-form kind and
  /// must be empty for the combinatorial kind. Throws EllipticityViolation.
  static std::shared_ptr<const Generator> assemble(SpacePtr space, GeneratorKind kind,
                                                   std::vector<double> coefficients = {}, double m = 2.0,
                                                   std::size_t dense_cap = kDefaultDenseCap);

  const Space& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return space_->size(); }
  GeneratorKind kind() const { return kind_; }
  double homogeneity() const { return m_; }
  std::size_t dense_cap() const { return dense_cap_; }

  /// A_e per edge (all ones for the combinatorial kind).
  const std::vector<double>& coefficients() const { return coefficients_; }
  const SparseMatrix& stiffness() const { return K_; }
  /// L itself, i.e. rows of K divided by mu.
  const SparseMatrix& matrix() const { return L_; }
  Field apply(const Field& f) const { return L_ * f; }
  Block apply(const Block& f) const { return L_ * f; }

  /// Gershgorin bound on the spectrum. Fixed for the lifetime of the
  /// generator so that cached polynomial expansions stay valid.
  double spectral_upper_bound() const;

  /// Computes (once) and returns the dense eigensystem. Throws DenseCapExceeded.
  const Eigensystem& eigensystem() const;
  bool has_eigensystem() const;
  bool dense_available() const { return size() <= dense_cap_; }

  /// Largest eigenvalue and smallest nonzero eigenvalue. Uses the dense
  /// eigensystem when available, iterative estimates otherwise.
  double lambda_max() const;
  double lambda_min_positive() const;

  /// Hash of the data that determines L (graph, measure, coefficients).
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Eigen-cache sidecar: 8-byte magic "SGCALC01", u64 n, u64 fingerprint,
  /// then n eigenvalues and n*n column-major eigenvector entries, all
  /// little-endian f64.
  void save_eigensystem(const std::string& path) const;
  /// Loads a sidecar written for the same fingerprint. Returns false when the
  /// file is missing or belongs to a different operator.
  bool load_eigensystem(const std::string& path) const;

  /// Cache for Chebyshev coefficient vectors, keyed by (function name, t).
  std::optional<std::vector<double>> cached_chebyshev(const std::string& name, double t) const;
  void store_chebyshev(const std::string& name, double t, std::vector<double> coeffs) const;

 private:
  Generator() = default;

  SpacePtr space_;
  GeneratorKind kind_ = GeneratorKind::Combinatorial;
  double m_ = 2.0;
  std::size_t dense_cap_ = kDefaultDenseCap;
  std::vector<double> coefficients_;
  SparseMatrix K_;
  SparseMatrix L_;
  double gershgorin_ = 0.0;
  std::uint64_t fingerprint_ = 0;

  mutable std::mutex eig_mutex_;
  mutable std::unique_ptr<Eigensystem> eigs_;
  mutable std::mutex cheb_mutex_;
  mutable std::map<std::pair<std::string, double>, std::vector<double>> cheb_cache_;
  mutable std::mutex estimate_mutex_;
  mutable std::optional<std::pair<double, double>> estimates_;
};

using GeneratorPtr = std::shared_ptr<const Generator>;

inline GeneratorPtr assemble_generator(SpacePtr space, GeneratorKind kind = GeneratorKind::Combinatorial,
                                       std::vector<double> coefficients = {}, double m = 2.0) {
  return Generator::assemble(std::move(space), kind, std::move(coefficients), m);
}

/// Measure-weighted projection onto constants, sum(f mu) / sum(mu).
double constant_part(const Field& f, const Field& mu);

/// Measure-weighted inner product and L^p norms.
double inner(const Field& f, const Field& g, const Field& mu);
double lp_norm(const Field& f, double p, const Field& mu);

}  // namespace sgcalc
