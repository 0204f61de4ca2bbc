#include "sfab/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

#include <fftw3.h>

namespace sfab {

namespace {

// FFTW's planner is not thread-safe; execution with new-array is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SketchKind parse_sketch_kind(const std::string& name) {
  if (name == "srdct") return SketchKind::Srdct;
  if (name == "gaussian") return SketchKind::Gaussian;
  if (name == "sparse-sign") return SketchKind::SparseSign;
  if (name == "identity") return SketchKind::Identity;
  fail(ErrorKind::Config, "unknown sketch kind '" + name + "'");
}

std::string to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::Srdct: return "srdct";
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::SparseSign: return "sparse-sign";
    case SketchKind::Identity: return "identity";
  }
  return "?";
}

SketchOperator::SketchOperator(const SketchParams& params) : params_(params) {
  const Index n = params.n;
  const Index s = params.s;
  if (params.kind == SketchKind::Identity) {
    if (s != n) fail(ErrorKind::Config, "identity sketch requires s = n");
    return;
  }
  if (n < 2 || s < 1 || s >= n) {
    fail(ErrorKind::Config, "sketch: need 1 <= s < n (got s=" + std::to_string(s) +
                                ", n=" + std::to_string(n) + ")");
  }
  std::mt19937_64 rng(params.seed);

  switch (params.kind) {
    case SketchKind::Srdct: {
      signs_.resize(static_cast<std::size_t>(n));
      for (double& e : signs_) e = (rng() >> 63) ? 1.0 : -1.0;
      // partial Fisher-Yates: s distinct rows
      std::vector<Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Index{0});
      for (Index i = 0; i < s; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
      }
      rows_.assign(perm.begin(), perm.begin() + s);
      std::sort(rows_.begin(), rows_.end());

      std::vector<double> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_plan p = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_REDFT10,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
      if (!p) fail(ErrorKind::Internal, "fftw: plan creation failed");
      plan_ = std::shared_ptr<void>(p, [](void* q) {
        std::lock_guard<std::mutex> inner(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(q));
      });
      break;
    }
    case SketchKind::Gaussian: {
      gauss_.resize(static_cast<std::size_t>(s * n));
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(s)));
      // column by column so a prefix of columns does not depend on n
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < s; ++i) gauss_[static_cast<std::size_t>(i * n + j)] = normal(rng);
      break;
    }
    case SketchKind::SparseSign: {
      if (params.density < 1) fail(ErrorKind::Config, "sparse-sign: density must be >= 1");
      zeta_ = std::min(params.density, s);
      const double val = 1.0 / std::sqrt(static_cast<double>(zeta_));
      ss_rows_.resize(static_cast<std::size_t>(zeta_ * n));
      ss_vals_.resize(static_cast<std::size_t>(zeta_ * n));
      std::vector<Index> pool(static_cast<std::size_t>(s));
      for (Index j = 0; j < n; ++j) {
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index t = 0; t < zeta_; ++t) {
          std::uniform_int_distribution<Index> pick(t, s - 1);
          std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick(rng))]);
          ss_rows_[static_cast<std::size_t>(j * zeta_ + t)] = pool[static_cast<std::size_t>(t)];
          ss_vals_[static_cast<std::size_t>(j * zeta_ + t)] = (rng() >> 63) ? val : -val;
        }
      }
      break;
    }
    case SketchKind::Identity:
      break;
  }
}

void SketchOperator::apply_real(const double* x, double* out) const {
  const Index n = params_.n;
  const Index s = params_.s;
  switch (params_.kind) {
    case SketchKind::Srdct: {
      std::vector<double> in(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) in[static_cast<std::size_t>(j)] = signs_[static_cast<std::size_t>(j)] * x[j];
      fftw_execute_r2r(static_cast<fftw_plan>(plan_.get()), in.data(), y.data());
      // REDFT10 is 2x the unnormalized DCT-II; rescale to the orthonormal
      // transform and fold in sqrt(n/s).
      const double nn = static_cast<double>(n);
      const double sub = std::sqrt(nn / static_cast<double>(s));
      const double c0 = sub / std::sqrt(4.0 * nn);
      const double ck = sub / std::sqrt(2.0 * nn);
      for (Index i = 0; i < s; ++i) {
        const Index r = rows_[static_cast<std::size_t>(i)];
        out[i] = y[static_cast<std::size_t>(r)] * (r == 0 ? c0 : ck);
      }
      break;
    }
    case SketchKind::Gaussian:
      for (Index i = 0; i < s; ++i) {
        const double* row = gauss_.data() + i * n;
        double acc = 0.0;
        for (Index j = 0; j < n; ++j) acc += row[j] * x[j];
        out[i] = acc;
      }
      break;
    case SketchKind::SparseSign:
      std::fill(out, out + s, 0.0);
      for (Index j = 0; j < n; ++j) {
        const double xj = x[j];
        for (Index t = 0; t < zeta_; ++t) {
          const auto p = static_cast<std::size_t>(j * zeta_ + t);
          out[ss_rows_[p]] += ss_vals_[p] * xj;
        }
      }
      break;
    case SketchKind::Identity:
      std::copy(x, x + n, out);
      break;
  }
}

void SketchOperator::apply(const Vector& v, Vector& out) const {
  require_dims(v.size() == params_.n, "sketch: vector length " + std::to_string(v.size()) +
                                          " does not match n=" + std::to_string(params_.n));
  if (params_.kind == SketchKind::Identity) {
    out = v;
    return;
  }
  const Eigen::VectorXd re = v.real();
  const Eigen::VectorXd im = v.imag();
  Eigen::VectorXd sre(params_.s), sim(params_.s);
  apply_real(re.data(), sre.data());
  if (im.cwiseAbs().maxCoeff() > 0.0) {
    apply_real(im.data(), sim.data());
  } else {
    sim.setZero();
  }
  out.resize(params_.s);
  out.real() = sre;
  out.imag() = sim;
}

Vector SketchOperator::apply(const Vector& v) const {
  Vector out;
  apply(v, out);
  return out;
}

std::vector<Index> SketchOperator::sparse_column_rows(Index j) const {
  if (params_.kind != SketchKind::SparseSign) return {};
  return {ss_rows_.begin() + j * zeta_, ss_rows_.begin() + (j + 1) * zeta_};
}

DenseMatrix SketchOperator::to_dense() const {
  DenseMatrix d(params_.s, params_.n);
  Vector e = Vector::Zero(params_.n);
  for (Index j = 0; j < params_.n; ++j) {
    e(j) = 1.0;
    d.col(j) = apply(e);
    e(j) = 0.0;
  }
  return d;
}

SketchOperator make_sketch(SketchKind kind, Index n, Index s, std::uint64_t seed, Index density) {
  return SketchOperator(SketchParams{kind, n, s, seed, density});
}

Eigen::VectorXd dct2_orthonormal(const Eigen::VectorXd& x) {
  const Index n = x.size();
  if (n < 1) return x;
  Eigen::VectorXd in = x, out(n);
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    p = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_REDFT10, FFTW_ESTIMATE);
  }
  fftw_execute(p);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(p);
  }
  out(0) /= std::sqrt(4.0 * static_cast<double>(n));
  out.tail(n - 1) /= std::sqrt(2.0 * static_cast<double>(n));
  return out;
}

EmbeddingEstimate update_eps(EmbeddingEstimate est, const Vector& sketch_of_unit_vector) {
  const double dist = std::abs(sketch_of_unit_vector.squaredNorm() - 1.0);
  est.eps_hat = std::max(est.eps_hat, dist);
  ++est.samples;
  return est;
}

}  // namespace sfab
