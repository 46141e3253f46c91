#include "sgcalc/generator.hpp"

#include "sgcalc/error.hpp"
#include "sgcalc/rng.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace sgcalc {
namespace {

constexpr char kMagic[8] = {'S', 'G', 'C', 'A', 'L', 'C', '0', '1'};

std::uint64_t mix(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

template <class T>
bool get_le(std::istream& in, T& value) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  std::memcpy(&value, &bits, 8);
  return true;
}

}  // namespace

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::Combinatorial ? "combinatorial" : "divergence-form";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "combinatorial" || name == "combinatorial-laplacian") return GeneratorKind::Combinatorial;
  if (name == "divergence-form" || name == "divergence") return GeneratorKind::DivergenceForm;
  throw InvalidArgument("unknown generator kind '" + name + "'");
}

GeneratorPtr Generator::assemble(SpacePtr space, GeneratorKind kind, std::vector<double> coefficients, double m,
                                 std::size_t dense_cap) {
  if (!space) throw InvalidArgument("assemble_generator: null space");
  if (!(m > 0.0)) throw InvalidArgument("homogeneity order m must be positive");
  const auto& edges = space->edges();
  if (kind == GeneratorKind::Combinatorial) {
    if (!coefficients.empty()) throw InvalidArgument("combinatorial generator takes no coefficients");
    coefficients.assign(edges.size(), 1.0);
  } else {
    if (coefficients.size() != edges.size())
      throw InvalidArgument("divergence-form generator needs one coefficient per edge (" +
                            std::to_string(edges.size()) + "), got " + std::to_string(coefficients.size()));
    for (std::size_t e = 0; e < coefficients.size(); ++e)
      if (!(coefficients[e] > 0.0) || !std::isfinite(coefficients[e]))
        throw EllipticityViolation("coefficient of edge " + std::to_string(e) + " is " +
                                   std::to_string(coefficients[e]));
  }

  std::shared_ptr<Generator> g(new Generator());
  g->space_ = space;
  g->kind_ = kind;
  g->m_ = m;
  g->dense_cap_ = dense_cap;
  g->coefficients_ = std::move(coefficients);

  const auto n = static_cast<Eigen::Index>(space->size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    double w = g->coefficients_[e] / (ed.length * ed.length);
    trip.emplace_back(ed.u, ed.u, w);
    trip.emplace_back(ed.v, ed.v, w);
    trip.emplace_back(ed.u, ed.v, -w);
    trip.emplace_back(ed.v, ed.u, -w);
  }
  g->K_.resize(n, n);
  g->K_.setFromTriplets(trip.begin(), trip.end());
  g->K_.makeCompressed();
  g->L_ = g->K_;
  const Field& mu = space->measure();
  for (Eigen::Index r = 0; r < n; ++r) {
    double row_abs = 0.0;
    for (SparseMatrix::InnerIterator it(g->L_, r); it; ++it) {
      it.valueRef() /= mu[r];
      row_abs += std::abs(it.value());
    }
    g->gershgorin_ = std::max(g->gershgorin_, row_abs);
  }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::uint64_t nn = space->size();
  h = mix(h, &nn, sizeof nn);
  for (const Edge& ed : edges) h = mix(h, &ed, sizeof ed);
  h = mix(h, mu.data(), sizeof(double) * mu.size());
  h = mix(h, g->coefficients_.data(), sizeof(double) * g->coefficients_.size());
  h = mix(h, &m, sizeof m);
  g->fingerprint_ = h;
  return g;
}

bool Generator::has_eigensystem() const {
  std::lock_guard lock(eig_mutex_);
  return eigs_ != nullptr;
}

const Eigensystem& Generator::eigensystem() const {
  std::lock_guard lock(eig_mutex_);
  if (eigs_) return *eigs_;
  const std::size_t n = size();
  if (n > dense_cap_)
    throw DenseCapExceeded(std::to_string(n) + " vertices exceed the dense cap of " + std::to_string(dense_cap_));
  const Field& mu = space_->measure();
  const Eigen::VectorXd isq = mu.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = isq.asDiagonal() * Eigen::MatrixXd(K_) * isq.asDiagonal();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const auto ni = static_cast<lapack_int>(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', ni, S.data(), ni, w.data());
  if (info != 0) throw Error("dsyevd failed with info " + std::to_string(info));

  auto eig = std::make_unique<Eigensystem>();
  eig->values = w.cwiseMax(0.0);
  eig->vectors = isq.asDiagonal() * S;
  // The kernel is spanned by constants on a connected graph; pin that mode exactly.
  eig->values[0] = 0.0;
  eig->vectors.col(0).setConstant(1.0 / std::sqrt(space_->total_mass()));
  eigs_ = std::move(eig);
  return *eigs_;
}

double Generator::spectral_upper_bound() const { return std::max(gershgorin_, 1e-300); }

double Generator::lambda_max() const {
  if (dense_available()) return eigensystem().values.maxCoeff();
  std::lock_guard lock(estimate_mutex_);
  if (!estimates_) {
    // Power iteration on S = M^-1/2 K M^-1/2 for the top of the spectrum and on
    // (b I - S) restricted to the complement of sqrt(mu) for the bottom.
    const Field& mu = space_->measure();
    const Field sq = mu.cwiseSqrt();
    const Field isq = sq.cwiseInverse();
    auto S = [&](const Field& x) -> Field { return isq.cwiseProduct(K_ * isq.cwiseProduct(x)); };
    auto gen = substream(fingerprint_, "spectral-estimates");
    Field x = normal_field(gen, static_cast<Eigen::Index>(size()));
    double top = 0.0;
    for (int it = 0; it < 2000; ++it) {
      x.normalize();
      Field y = S(x);
      double est = x.dot(y);
      if (std::abs(est - top) <= 1e-10 * est) {
        top = est;
        break;
      }
      top = est;
      x = y;
    }
    const double b = gershgorin_;
    const Field kernel = sq / sq.norm();
    x = normal_field(gen, static_cast<Eigen::Index>(size()));
    double shifted = 0.0;
    for (int it = 0; it < 20000; ++it) {
      x -= kernel * kernel.dot(x);
      x.normalize();
      Field y = b * x - S(x);
      double est = x.dot(y);
      if (std::abs(est - shifted) <= 1e-12 * b) {
        shifted = est;
        break;
      }
      shifted = est;
      x = y;
    }
    estimates_ = std::make_pair(top, std::max(b - shifted, 1e-12 * b));
  }
  return estimates_->first;
}

double Generator::lambda_min_positive() const {
  if (dense_available()) {
    const auto& v = eigensystem().values;
    return v.size() > 1 ? v[1] : 0.0;
  }
  lambda_max();
  std::lock_guard lock(estimate_mutex_);
  return estimates_->second;
}

void Generator::save_eigensystem(const std::string& path) const {
  const Eigensystem& eig = eigensystem();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write eigen cache '" + path + "'");
  out.write(kMagic, 8);
  put_le<std::uint64_t>(out, size());
  put_le<std::uint64_t>(out, fingerprint_);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) put_le(out, eig.values[i]);
  const double* v = eig.vectors.data();
  for (Eigen::Index i = 0; i < eig.vectors.size(); ++i) put_le(out, v[i]);
  if (!out) throw Error("failed writing eigen cache '" + path + "'");
}

bool Generator::load_eigensystem(const std::string& path) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return false;
  std::uint64_t n = 0, fp = 0;
  if (!get_le(in, n) || !get_le(in, fp) || n != size() || fp != fingerprint_) return false;
  auto eig = std::make_unique<Eigensystem>();
  const auto ni = static_cast<Eigen::Index>(n);
  eig->values.resize(ni);
  eig->vectors.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    if (!get_le(in, eig->values[i])) return false;
  double* v = eig->vectors.data();
  for (Eigen::Index i = 0; i < ni * ni; ++i)
    if (!get_le(in, v[i])) return false;
  std::lock_guard lock(eig_mutex_);
  eigs_ = std::move(eig);
  return true;
}

std::optional<std::vector<double>> Generator::cached_chebyshev(const std::string& name, double t) const {
  std::lock_guard lock(cheb_mutex_);
  auto it = cheb_cache_.find({name, t});
  if (it == cheb_cache_.end()) return std::nullopt;
  return it->second;
}

void Generator::store_chebyshev(const std::string& name, double t, std::vector<double> coeffs) const {
  std::lock_guard lock(cheb_mutex_);
  cheb_cache_[{name, t}] = std::move(coeffs);
}

double constant_part(const Field& f, const Field& mu) { return f.dot(mu) / mu.sum(); }

double inner(const Field& f, const Field& g, const Field& mu) { return (f.array() * g.array() * mu.array()).sum(); }

double lp_norm(const Field& f, double p, const Field& mu) {
  if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  if (!(p > 0.0)) throw InvalidArgument("lp_norm: p must be positive");
  if (p == 2.0) return std::sqrt((f.array().square() * mu.array()).sum());
  if (p == 1.0) return (f.array().abs() * mu.array()).sum();
  return std::pow((f.array().abs().pow(p) * mu.array()).sum(), 1.0 / p);
}

}  // namespace sgcalc
