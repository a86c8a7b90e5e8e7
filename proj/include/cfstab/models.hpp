#ifndef CFSTAB_MODELS_HPP
#define CFSTAB_MODELS_HPP

// Linear-form systems S1 = sum_l A_l X_l, S2 = sum_l B_l X_l with independent
// sources X_l, their coupling matrices C_l = (B_l A_l^{-1})^T, the partition of
// the indices into classes of equal C_l, and seeded sampling.

#include <array>
#include <cstdint>
#include <vector>

#include "cfstab/linalg.hpp"
#include "cfstab/rng.hpp"
#include "cfstab/sources.hpp"

namespace cfstab {

inline constexpr double kClassTolerance = 1e-9;

/// Weights with which the contamination latent enters X_1 and X_2. Unequal
/// weights keep the latent from cancelling in either sum of a Kac-Bernstein
/// pair (A = I, I and B = I, -I).
inline constexpr std::array<double, 2> kLatentWeights = {1.0, 0.5};

using Partition = std::vector<std::vector<std::size_t>>;

inline std::vector<Matrix> derive_coupling(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  require(a.size() == b.size(), ErrorKind::InvalidArgument, "A and B must have the same length");
  std::vector<Matrix> c;
  c.reserve(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) c.push_back((b[l] * invert(a[l])).transpose());
  return c;
}

/// Groups indices whose coupling matrices agree within `tol` (max-abs), in order
/// of first appearance; each class is anchored at its smallest index.
inline Partition partition_classes(const std::vector<Matrix>& c, double tol = kClassTolerance) {
  Partition classes;
  std::vector<bool> taken(c.size(), false);
  for (std::size_t l = 0; l < c.size(); ++l) {
    if (taken[l]) continue;
    std::vector<std::size_t> cls{l};
    taken[l] = true;
    for (std::size_t k = l + 1; k < c.size(); ++k)
      if (!taken[k] && max_abs_diff(c[k], c[l]) <= tol) {
        cls.push_back(k);
        taken[k] = true;
      }
    classes.push_back(std::move(cls));
  }
  return classes;
}

class GoSystem {
 public:
  GoSystem(std::vector<Matrix> a, std::vector<Matrix> b, std::vector<SourceSpec> sources,
           double class_tol = kClassTolerance)
      : a_(std::move(a)), b_(std::move(b)), sources_(std::move(sources)), class_tol_(class_tol) {
    require(!a_.empty(), ErrorKind::InvalidArgument, "system needs at least one source");
    require(a_.size() == b_.size() && a_.size() == sources_.size(), ErrorKind::InvalidArgument,
            "A, B and sources must have the same length");
    d_ = a_[0].rows();
    for (std::size_t l = 0; l < a_.size(); ++l) {
      require(a_[l].rows() == d_ && a_[l].cols() == d_ && b_[l].rows() == d_ && b_[l].cols() == d_,
              ErrorKind::InvalidArgument, "all A_l and B_l must be d x d");
      require(all_finite(a_[l]) && all_finite(b_[l]), ErrorKind::InvalidArgument, "non-finite matrix entry");
      validate(sources_[l]);
      require(sources_[l].dim() == d_, ErrorKind::InvalidArgument, "source dimension must equal d");
      if (!is_invertible(a_[l])) fail(ErrorKind::SingularMatrix, "A_" + std::to_string(l + 1) + " is singular");
      if (!is_invertible(b_[l])) fail(ErrorKind::SingularMatrix, "B_" + std::to_string(l + 1) + " is singular");
    }
    c_ = derive_coupling(a_, b_);
    classes_ = partition_classes(c_, class_tol_);
    class_of_.assign(a_.size(), 0);
    for (std::size_t k = 0; k < classes_.size(); ++k)
      for (std::size_t l : classes_[k]) class_of_[l] = k;
  }

  std::size_t L() const noexcept { return a_.size(); }
  std::size_t d() const noexcept { return d_; }
  const std::vector<Matrix>& A() const noexcept { return a_; }
  const std::vector<Matrix>& B() const noexcept { return b_; }
  const std::vector<Matrix>& C() const noexcept { return c_; }
  const std::vector<SourceSpec>& sources() const noexcept { return sources_; }
  const Partition& classes() const noexcept { return classes_; }
  std::size_t class_of(std::size_t l) const { return class_of_.at(l); }
  double class_tolerance() const noexcept { return class_tol_; }
  double contamination() const noexcept { return lambda_; }

  /// Coupling matrix of the class representative.
  const Matrix& class_coupling(std::size_t cls) const { return c_.at(classes_.at(cls).front()); }

  std::vector<Matrix> class_couplings() const {
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < classes_.size(); ++k) out.push_back(class_coupling(k));
    return out;
  }

  friend GoSystem contaminate(const GoSystem& system, double lambda);

 private:
  std::vector<Matrix> a_, b_, c_;
  std::vector<SourceSpec> sources_;
  double class_tol_;
  std::size_t d_ = 0;
  Partition classes_;
  std::vector<std::size_t> class_of_;
  double lambda_ = 0.0;
};

/// Copy of `system` in which each sampled row, with probability lambda, adds a
/// shared standard-normal latent vector U to X_1 (weight 1) and X_2 (weight 1/2).
inline GoSystem contaminate(const GoSystem& system, double lambda) {
  require(system.L() >= 2, ErrorKind::InvalidArgument, "contamination needs L >= 2");
  require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::InvalidArgument, "lambda must lie in [0, 1]");
  GoSystem out = system;
  out.lambda_ = lambda;
  return out;
}

/// Kac-Bernstein pair: S1 = X1 + X2, S2 = X1 - X2 with X1, X2 ~ `source`.
inline GoSystem kac_bernstein_system(const SourceSpec& source) {
  const std::size_t d = source.dim();
  const Matrix id = Matrix::identity(d);
  return GoSystem({id, id}, {id, -1.0 * id}, {source, source});
}

struct SampleSet {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<Matrix> X, Y;
  std::vector<Matrix> Z;  // one block per class
  std::vector<std::size_t> class_of;
  Matrix S1, S2;

  const Matrix& Z_of(std::size_t l) const { return Z.at(class_of.at(l)); }
};

inline SampleSet sample_system(const GoSystem& system, std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  const std::size_t L = system.L(), d = system.d();
  SampleSet s;
  s.n = n;
  s.seed = seed;
  for (std::size_t l = 0; l < L; ++l) {
    Rng rng(seed, streams::kSystemSource + l);
    s.X.push_back(draw_block(system.sources()[l], n, rng));
  }
  const double lambda = system.contamination();
  if (lambda > 0.0 && L >= 2) {
    Rng gate(seed, streams::kContaminationGate);
    Rng latent(seed, streams::kContaminationLatent);
    std::vector<double> u(d);
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = gate.uniform01() < lambda;
      for (std::size_t k = 0; k < d; ++k) u[k] = latent.normal();
      if (!on) continue;
      for (std::size_t k = 0; k < d; ++k) {
        s.X[0](i, k) += kLatentWeights[0] * u[k];
        s.X[1](i, k) += kLatentWeights[1] * u[k];
      }
    }
  }
  s.S1 = Matrix(n, d);
  s.S2 = Matrix(n, d);
  for (std::size_t l = 0; l < L; ++l) {
    s.Y.push_back(apply_rows(system.A()[l], s.X[l]));
    s.S1 += s.Y[l];
    s.S2 += apply_rows(system.C()[l].transpose(), s.Y[l]);
  }
  for (const auto& cls : system.classes()) {
    Matrix z = s.Y[cls.front()];
    for (std::size_t j = 1; j < cls.size(); ++j) z += s.Y[cls[j]];
    s.Z.push_back(std::move(z));
  }
  s.class_of.resize(L);
  for (std::size_t l = 0; l < L; ++l) s.class_of[l] = system.class_of(l);
  return s;
}

// ---- closed forms -----------------------------------------------------------

/// E[exp(j sum_l u_l^T X_l)] for per-source frequency vectors u_l (empty = zero).
inline Complex system_cf(const GoSystem& system, const std::vector<Vector>& u) {
  require(u.size() == system.L(), ErrorKind::InvalidArgument, "one frequency per source expected");
  const std::size_t d = system.d();
  Complex acc = 1.0;
  for (std::size_t l = 0; l < system.L(); ++l)
    if (u[l].size() != 0) acc *= analytic_cf(system.sources()[l], u[l]);
  const double lambda = system.contamination();
  if (lambda > 0.0) {
    Vector v(d);
    for (std::size_t l = 0; l < 2; ++l)
      if (u[l].size() != 0)
        for (std::size_t k = 0; k < d; ++k) v[k] += kLatentWeights[l] * u[l][k];
    acc *= (1.0 - lambda) + lambda * std::exp(-0.5 * dot(v, v));
  }
  return acc;
}

/// Joint c.f. of (S1, S2): source l sees A_l^T t1 + B_l^T t2 = A_l^T (t1 + C_l t2).
inline Complex joint_cf_S(const GoSystem& system, const Vector& t1, const Vector& t2) {
  std::vector<Vector> u;
  for (std::size_t l = 0; l < system.L(); ++l)
    u.push_back(system.A()[l].transpose() * t1 + system.B()[l].transpose() * t2);
  return system_cf(system, u);
}

inline Complex cf_Y(const GoSystem& system, std::size_t l, const Vector& t) {
  std::vector<Vector> u(system.L());
  u[l] = system.A()[l].transpose() * t;
  return system_cf(system, u);
}

inline Complex cf_Z(const GoSystem& system, std::size_t cls, const Vector& t) {
  std::vector<Vector> u(system.L());
  for (std::size_t k : system.classes().at(cls)) u[k] = system.A()[k].transpose() * t;
  return system_cf(system, u);
}

inline Vector mean_Z(const GoSystem& system, std::size_t cls) {
  Vector m(system.d());
  for (std::size_t k : system.classes().at(cls)) m = m + system.A()[k] * source_mean(system.sources()[k]);
  return m;
}

inline Matrix covariance_Z(const GoSystem& system, std::size_t cls) {
  const std::size_t d = system.d();
  Matrix q(d, d);
  Matrix latent(d, d);
  for (std::size_t k : system.classes().at(cls)) {
    const Matrix& a = system.A()[k];
    q += a * source_covariance(system.sources()[k]) * a.transpose();
    if (k < 2) latent += kLatentWeights[k] * a;
  }
  const double lambda = system.contamination();
  if (lambda > 0.0) q += lambda * (latent * latent.transpose());
  return q;
}

}  // namespace cfstab

#endif  // CFSTAB_MODELS_HPP
