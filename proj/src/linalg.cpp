#include "sfab/linalg.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace sfab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Givens rotation G = [c s; -conj(s) c] with G [x; y] = [r; 0].
struct Givens {
  double c = 1.0;
  cplx s{0.0, 0.0};
};

Givens make_givens(cplx x, cplx y) {
  Givens g;
  const double ay = std::abs(y);
  if (ay == 0.0) return g;
  const double ax = std::abs(x);
  if (ax == 0.0) {
    g.c = 0.0;
    g.s = std::conj(y) / ay;
    return g;
  }
  const double nrm = std::hypot(ax, ay);
  const cplx phase = x / ax;
  g.c = ax / nrm;
  g.s = phase * std::conj(y) / nrm;
  return g;
}

// rows k, k+1 <- G * rows, for columns [c0, c1)
void rotate_rows(DenseMatrix& h, const Givens& g, Index k, Index c0, Index c1) {
  for (Index j = c0; j < c1; ++j) {
    const cplx a = h(k, j);
    const cplx b = h(k + 1, j);
    h(k, j) = g.c * a + g.s * b;
    h(k + 1, j) = -std::conj(g.s) * a + g.c * b;
  }
}

// columns k, k+1 <- columns * G^H, for rows [r0, r1)
void rotate_cols(DenseMatrix& h, const Givens& g, Index k, Index r0, Index r1) {
  for (Index i = r0; i < r1; ++i) {
    const cplx a = h(i, k);
    const cplx b = h(i, k + 1);
    h(i, k) = g.c * a + std::conj(g.s) * b;
    h(i, k + 1) = -g.s * a + g.c * b;
  }
}

// Householder reduction to upper Hessenberg form, accumulating Z.
void hessenberg_reduce(DenseMatrix& h, DenseMatrix& z) {
  const Index n = h.rows();
  z = DenseMatrix::Identity(n, n);
  for (Index k = 0; k + 2 < n; ++k) {
    Vector x = h.block(k + 1, k, n - k - 1, 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    const cplx x0 = x(0);
    const cplx phase = std::abs(x0) == 0.0 ? cplx(1.0, 0.0) : x0 / std::abs(x0);
    Vector v = x;
    v(0) += phase * xnorm;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H <- P H P with P = I - 2 v v^H acting on rows/cols k+1..n-1
    auto rows = h.bottomRows(n - k - 1);
    const Eigen::RowVectorXcd vr = v.adjoint() * rows;
    rows.noalias() -= 2.0 * v * vr;
    auto cols = h.rightCols(n - k - 1);
    const Vector hc = cols * v;
    cols.noalias() -= 2.0 * hc * v.adjoint();
    auto zc = z.rightCols(n - k - 1);
    const Vector zv = zc * v;
    zc.noalias() -= 2.0 * zv * v.adjoint();
    for (Index i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

// Eigenvectors of an upper-triangular T by back substitution.
DenseMatrix triangular_eigenvectors(const DenseMatrix& t) {
  const Index n = t.rows();
  DenseMatrix x = DenseMatrix::Zero(n, n);
  const double small = std::max(kEps * t.norm(), std::numeric_limits<double>::min());
  for (Index k = 0; k < n; ++k) {
    const cplx lambda = t(k, k);
    x(k, k) = 1.0;
    for (Index i = k - 1; i >= 0; --i) {
      cplx acc = 0.0;
      for (Index j = i + 1; j <= k; ++j) acc += t(i, j) * x(j, k);
      cplx d = t(i, i) - lambda;
      if (std::abs(d) < small) d = small;
      x(i, k) = -acc / d;
    }
  }
  return x;
}

std::mt19937_64& fixed_rng() {
  thread_local std::mt19937_64 rng;
  return rng;
}

Vector deterministic_start(Index n) {
  std::mt19937_64& rng = fixed_rng();
  rng.seed(0x5eed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(dist(rng), 0.0);
  return v.normalized();
}

}  // namespace

ThinQR thin_qr(const DenseMatrix& a) {
  require_dims(a.rows() >= a.cols(), "thin_qr: need rows >= cols");
  const Index m = a.rows();
  const Index n = a.cols();
  ThinQR out;
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * DenseMatrix::Identity(m, n);
  // Fix the phase of each diagonal entry so diag(R) is real and nonnegative.
  for (Index k = 0; k < n; ++k) {
    const cplx d = out.r(k, k);
    const double ad = std::abs(d);
    if (ad == 0.0) continue;
    const cplx phase = d / ad;
    out.r.row(k) *= std::conj(phase);
    out.q.col(k) *= phase;
    out.r(k, k) = ad;
  }
  const double anorm = a.norm();
  for (Index k = 0; k < n; ++k) {
    if (std::abs(out.r(k, k)) < 1e-14 * anorm || anorm == 0.0) {
      out.rank_deficient = true;
      break;
    }
  }
  return out;
}

LeastSquaresResult least_squares(const DenseMatrix& a, const Vector& b) {
  require_dims(a.rows() >= a.cols(), "least_squares: need rows >= cols");
  require_dims(a.rows() == b.size(), "least_squares: rhs length mismatch");
  LeastSquaresResult out;
  const Index n = a.cols();
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  const auto& qrm = qr.matrixQR();
  double rmax = 0.0;
  for (Index k = 0; k < n; ++k) rmax = std::max(rmax, std::abs(qrm(k, k)));
  bool deficient = (rmax == 0.0);
  for (Index k = 0; k < n && !deficient; ++k) {
    if (std::abs(qrm(k, k)) < 1e-12 * rmax) deficient = true;
  }
  if (!deficient) {
    out.x = qr.solve(b);
    out.rank = n;
  } else {
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod;
    cod.setThreshold(1e-12);
    cod.compute(a);
    out.x = cod.solve(b);
    out.rank = cod.rank();
    out.rank_deficient = true;
  }
  out.residual_norm = (a * out.x - b).norm();
  return out;
}

void schur_hessenberg_qr(const DenseMatrix& a, DenseMatrix& t, DenseMatrix& z) {
  require_dims(a.rows() == a.cols(), "schur: matrix must be square");
  const Index n = a.rows();
  t = a;
  hessenberg_reduce(t, z);
  if (n <= 1) return;

  const Index max_iter = 30 * n;
  Index total_iter = 0;
  Index iter = 0;
  Index hi = n - 1;
  const double tnorm = t.norm();
  while (hi > 0) {
    Index l = hi;
    for (; l > 0; --l) {
      double scale = std::abs(t(l - 1, l - 1)) + std::abs(t(l, l));
      if (scale == 0.0) scale = tnorm;
      if (std::abs(t(l, l - 1)) <= kEps * scale) {
        t(l, l - 1) = 0.0;
        break;
      }
    }
    if (l == hi) {
      --hi;
      iter = 0;
      continue;
    }
    if (++total_iter > max_iter) {
      std::ostringstream msg;
      msg << "dense_eig: QR iteration did not converge (subdiagonal residual "
          << std::abs(t(hi, hi - 1)) << " at index " << hi << ")";
      fail(ErrorKind::Solver, msg.str());
    }
    ++iter;

    // Wilkinson shift from the trailing 2x2 block.
    const cplx aa = t(hi - 1, hi - 1);
    const cplx bb = t(hi - 1, hi);
    const cplx cc = t(hi, hi - 1);
    const cplx dd = t(hi, hi);
    cplx mu;
    if (iter % 11 == 0) {
      mu = dd + 0.75 * std::abs(cc);
    } else {
      const cplx half = 0.5 * (aa - dd);
      const cplx disc = std::sqrt(half * half + bb * cc);
      const cplx m1 = 0.5 * (aa + dd) + disc;
      const cplx m2 = 0.5 * (aa + dd) - disc;
      mu = std::abs(m1 - dd) < std::abs(m2 - dd) ? m1 : m2;
    }

    // Implicit single-shift QR sweep on the active block [l, hi].
    cplx x = t(l, l) - mu;
    cplx y = t(l + 1, l);
    for (Index k = l; k < hi; ++k) {
      if (k > l) {
        x = t(k, k - 1);
        y = t(k + 1, k - 1);
      }
      const Givens g = make_givens(x, y);
      rotate_rows(t, g, k, k > l ? k - 1 : l, n);
      rotate_cols(t, g, k, 0, std::min(k + 3, hi + 1));
      rotate_cols(z, g, k, 0, n);
      if (k > l) t(k + 1, k - 1) = 0.0;
    }
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) t(i, j) = 0.0;
}

EigenDecomposition dense_eig(const DenseMatrix& a, const EigOptions& options) {
  require_dims(a.rows() == a.cols(), "dense_eig: matrix must be square");
  if (a.rows() > options.dense_limit) {
    fail(ErrorKind::Config, "dense_eig: matrix of size " + std::to_string(a.rows()) +
                                " exceeds dense limit " +
                                std::to_string(options.dense_limit));
  }
  if (!a.allFinite()) fail(ErrorKind::Solver, "dense_eig: non-finite input");
  EigenDecomposition out;
  const Index n = a.rows();
  if (n == 0) return out;

  if (options.backend == EigenBackend::Eigen) {
    Eigen::ComplexEigenSolver<DenseMatrix> es;
    es.setMaxIterations(30 * std::max<Index>(n, 1));
    es.compute(a, options.compute_vectors);
    if (es.info() != Eigen::Success) {
      fail(ErrorKind::Solver, "dense_eig: Eigen ComplexEigenSolver did not converge");
    }
    out.values = es.eigenvalues();
    if (options.compute_vectors) {
      out.vectors = es.eigenvectors();
      for (Index k = 0; k < n; ++k) out.vectors.col(k).normalize();
    }
    return out;
  }

  DenseMatrix t;
  DenseMatrix z;
  schur_hessenberg_qr(a, t, z);
  out.values = t.diagonal();
  if (options.compute_vectors) {
    out.vectors = z * triangular_eigenvectors(t);
    for (Index k = 0; k < n; ++k) out.vectors.col(k).normalize();
  }
  return out;
}

Vector dense_eigenvalues(const DenseMatrix& a, EigenBackend backend) {
  EigOptions opts;
  opts.backend = backend;
  opts.compute_vectors = false;
  return dense_eig(a, opts).values;
}

DenseMatrix hermitian_part(const DenseMatrix& a) {
  require_dims(a.rows() == a.cols(), "hermitian_part: matrix must be square");
  return 0.5 * (a + a.adjoint());
}

double hermitian_min_eig(const DenseMatrix& a) {
  require_dims(a.rows() == a.cols(), "hermitian_min_eig: matrix must be square");
  const double anorm = a.norm();
  if ((a - a.adjoint()).norm() > 1e-12 * anorm) {
    fail(ErrorKind::Solver, "hermitian_min_eig: input is not Hermitian");
  }
  // Symmetrize exactly so the solver sees a Hermitian matrix.
  const DenseMatrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::Solver, "hermitian_min_eig: eigensolver failed");
  }
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<DenseMatrix> svd(a);
  return svd.singularValues()(0);
}

double triangular_condition_estimate(const DenseMatrix& r) {
  require_dims(r.rows() == r.cols(), "triangular_condition_estimate: need square R");
  const Index n = r.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (n == 0) return 1.0;
  for (Index k = 0; k < n; ++k) {
    if (r(k, k) == cplx(0.0, 0.0)) return kInf;
  }
  const auto upper = r.triangularView<Eigen::Upper>();

  // sigma_max: power iteration on R^H R.
  Vector v = deterministic_start(n);
  double smax = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = upper * v;
    const double est = w.norm();
    Vector u = upper.adjoint() * w;
    const double un = u.norm();
    if (un == 0.0) break;
    v = u / un;
    const bool done = std::abs(est - smax) <= 1e-6 * est;
    smax = est;
    if (done) break;
  }

  // 1/sigma_min: inverse power iteration, each step solves R^H R x = v.
  v = deterministic_start(n);
  double inv_smin = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = upper.adjoint().solve(v);
    Vector x = upper.solve(w);
    if (!x.allFinite()) return kInf;
    const double xn = x.norm();
    if (xn == 0.0) return kInf;
    // ||R^{-H} v|| with unit v estimates 1/sigma_min from below.
    const double est = w.norm();
    v = x / xn;
    const bool done = std::abs(est - inv_smin) <= 1e-6 * est;
    inv_smin = est;
    if (done) break;
  }
  const double kappa = smax * inv_smin;
  return std::isfinite(kappa) ? kappa : kInf;
}

double condition_estimate(const DenseMatrix& a) {
  require_dims(a.rows() >= a.cols(), "condition_estimate: need rows >= cols");
  if (a.cols() == 0) return 1.0;
  if (a.norm() == 0.0) return std::numeric_limits<double>::infinity();
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  const DenseMatrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  return triangular_condition_estimate(r);
}

}  // namespace sfab
