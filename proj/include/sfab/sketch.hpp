#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sfab/types.hpp"

namespace sfab {

enum class SketchKind {
  Srdct,       // sqrt(n/s) * P * DCT * E
  Gaussian,    // i.i.d. N(0, 1/s)
  SparseSign,  // min(d, s) entries +-1/sqrt(min(d, s)) per column
  Identity,    // S = I, s = n; test-only
};

SketchKind parse_sketch_kind(const std::string& name);
std::string to_string(SketchKind kind);

struct SketchParams {
  SketchKind kind = SketchKind::Srdct;
  Index n = 0;
  Index s = 0;
  std::uint64_t seed = 0;
  Index density = 8;  // sparse-sign only
};

/// A seeded random embedding applied matrix-free. Immutable after
/// construction; apply() is reentrant and bitwise deterministic.
class SketchOperator {
 public:
  explicit SketchOperator(const SketchParams& params);

  SketchKind kind() const noexcept { return params_.kind; }
  Index n() const noexcept { return params_.n; }
  Index s() const noexcept { return params_.s; }
  std::uint64_t seed() const noexcept { return params_.seed; }
  const SketchParams& params() const noexcept { return params_; }

  Vector apply(const Vector& v) const;
  void apply(const Vector& v, Vector& out) const;
  Vector operator*(const Vector& v) const { return apply(v); }

  /// Row indices kept by an srdct sketch (ascending).
  const std::vector<Index>& rows() const noexcept { return rows_; }
  /// Nonzero rows of column j of a sparse-sign sketch.
  std::vector<Index> sparse_column_rows(Index j) const;

  /// Dense S, for small tests only.
  DenseMatrix to_dense() const;

 private:
  void apply_real(const double* x, double* out) const;

  SketchParams params_;
  // srdct
  std::vector<double> signs_;
  std::vector<Index> rows_;
  std::shared_ptr<void> plan_;
  // gaussian, row-major s x n
  std::vector<double> gauss_;
  // sparse-sign: column j owns entries [j*z, (j+1)*z)
  Index zeta_ = 0;
  std::vector<Index> ss_rows_;
  std::vector<double> ss_vals_;
};

SketchOperator make_sketch(SketchKind kind, Index n, Index s, std::uint64_t seed,
                           Index density = 8);

/// Running embedding-quality estimate: the largest |‖Sv‖² − 1| seen over
/// sketches of unit vectors.
struct EmbeddingEstimate {
  double eps_hat = 0.0;
  Index samples = 0;

  /// eps_hat >= 1 means the sketch no longer embeds the tracked vectors.
  bool too_weak() const noexcept { return eps_hat >= 1.0; }
};

/// Orthonormal DCT-II of a real vector (the F factor of srdct).
Eigen::VectorXd dct2_orthonormal(const Eigen::VectorXd& x);

EmbeddingEstimate update_eps(EmbeddingEstimate est, const Vector& sketch_of_unit_vector);

}  // namespace sfab
