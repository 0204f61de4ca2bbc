#include <cmath>
#include <limits>

#include "doctest.h"
#include "sfab/ingest.hpp"
#include "sfab/linalg.hpp"
#include "test_util.hpp"

using namespace sfab;
using sfab::testing::random_dense;
using sfab::testing::random_vector;

TEST_CASE("thin_qr: 3-4-5") {
  DenseMatrix a(2, 1);
  a << 3.0, 4.0;
  const ThinQR f = thin_qr(a);
  CHECK(std::abs(f.q(0, 0) - 0.6) < 1e-15);
  CHECK(std::abs(f.q(1, 0) - 0.8) < 1e-15);
  CHECK(std::abs(f.r(0, 0) - 5.0) < 1e-14);
  CHECK_FALSE(f.rank_deficient);
}

TEST_CASE("thin_qr: orthonormal input gives identity R") {
  const ThinQR base = thin_qr(random_dense(30, 6, 1));
  const ThinQR f = thin_qr(base.q);
  CHECK((f.r - DenseMatrix::Identity(6, 6)).norm() < 1e-13);
  CHECK((f.q - base.q).norm() < 1e-13);
}

TEST_CASE("thin_qr: reconstruction, orthogonality and sign convention") {
  const DenseMatrix a = random_dense(50, 10, 2);
  const ThinQR f = thin_qr(a);
  CHECK((f.q * f.r - a).norm() / a.norm() <= 1e-13);
  CHECK((f.q.adjoint() * f.q - DenseMatrix::Identity(10, 10)).norm() <= 1e-12 * 10);
  for (Index k = 0; k < 10; ++k) {
    CHECK(f.r(k, k).real() >= 0.0);
    CHECK(f.r(k, k).imag() == 0.0);
    for (Index i = k + 1; i < 10; ++i) CHECK(f.r(i, k) == cplx(0.0));
  }
}

TEST_CASE("thin_qr: complex input keeps nonnegative real diagonal") {
  DenseMatrix a = random_dense(20, 5, 3) + cplx(0, 1) * random_dense(20, 5, 4);
  const ThinQR f = thin_qr(a);
  CHECK((f.q * f.r - a).norm() / a.norm() <= 1e-13);
  for (Index k = 0; k < 5; ++k) CHECK(std::abs(f.r(k, k).imag()) == 0.0);
}

TEST_CASE("thin_qr: rank deficiency is flagged, not fatal") {
  DenseMatrix a = random_dense(10, 3, 5);
  a.col(2) = a.col(0) + a.col(1);
  const ThinQR f = thin_qr(a);
  CHECK(f.rank_deficient);
  CHECK((f.q * f.r - a).norm() / a.norm() <= 1e-13);
}

TEST_CASE("thin_qr: ill-conditioned factor stays orthogonal") {
  ThinQR u = thin_qr(random_dense(60, 8, 6));
  DenseMatrix scale = DenseMatrix::Zero(8, 8);
  for (Index i = 0; i < 8; ++i) scale(i, i) = std::pow(10.0, -8.0 * i / 7.0);
  const DenseMatrix a = u.q * scale * thin_qr(random_dense(8, 8, 7)).q;
  const ThinQR f = thin_qr(a);
  CHECK((f.q.adjoint() * f.q - DenseMatrix::Identity(8, 8)).norm() <= 1e-12 * 8);
  CHECK((f.q * f.r - a).norm() <= 1e-12 * a.norm());
}

TEST_CASE("least_squares: square system") {
  const DenseMatrix a = random_dense(6, 6, 8);
  const Vector b = random_vector(6, 9);
  const LeastSquaresResult r = least_squares(a, b);
  CHECK((a * r.x - b).norm() < 1e-12);
  CHECK(r.residual_norm < 1e-12);
}

TEST_CASE("least_squares: mean of two points") {
  DenseMatrix a(2, 1);
  a << 1.0, 1.0;
  Vector b(2);
  b << 0.0, 2.0;
  const LeastSquaresResult r = least_squares(a, b);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-15);
  CHECK(std::abs(r.residual_norm - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("least_squares: residual orthogonal to range") {
  const DenseMatrix a = random_dense(40, 5, 10);
  const Vector b = random_vector(40, 11);
  const LeastSquaresResult r = least_squares(a, b);
  const Vector res = a * r.x - b;
  CHECK((a.adjoint() * res).norm() <= 1e-12 * a.norm() * b.norm());
  CHECK(std::abs(res.norm() - r.residual_norm) < 1e-12);
  CHECK_FALSE(r.rank_deficient);
}

TEST_CASE("least_squares: rank-deficient falls back to minimal norm") {
  DenseMatrix a = random_dense(12, 3, 12);
  a.col(2) = a.col(1);
  const Vector b = random_vector(12, 13);
  const LeastSquaresResult r = least_squares(a, b);
  CHECK(r.rank_deficient);
  CHECK(r.rank == 2);
  // minimal norm splits the duplicated column evenly
  CHECK(std::abs(r.x(1) - r.x(2)) < 1e-10);
  CHECK((a.adjoint() * (a * r.x - b)).norm() <= 1e-10 * a.norm() * b.norm());
}

TEST_CASE("least_squares: dimension checks") {
  CHECK_THROWS_AS(least_squares(random_dense(3, 2, 1), random_vector(4, 2)), Error);
}

namespace {

void check_eig_backend(EigenBackend backend) {
  EigOptions opt;
  opt.backend = backend;

  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  Vector ev = dense_eig(d, opt).values;
  std::vector<double> re;
  for (Index i = 0; i < 3; ++i) re.push_back(ev(i).real());
  std::sort(re.begin(), re.end());
  CHECK(std::abs(re[0] - 1.0) < 1e-14);
  CHECK(std::abs(re[2] - 3.0) < 1e-14);

  DenseMatrix rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  ev = dense_eig(rot, opt).values;
  CHECK(std::abs(std::abs(ev(0).imag()) - 1.0) < 1e-14);
  CHECK(std::abs(ev(0) + ev(1)) < 1e-14);

  // companion of z^3 - 1
  DenseMatrix comp = DenseMatrix::Zero(3, 3);
  comp(0, 2) = 1.0;
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  ev = dense_eig(comp, opt).values;
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(std::pow(ev(i), 3) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(ev(i)) - 1.0) < 1e-12);
  }

  const DenseMatrix a = random_dense(40, 40, 21) + cplx(0, 1) * random_dense(40, 40, 22);
  const EigenDecomposition e = dense_eig(a, opt);
  const DenseMatrix resid = a * e.vectors - e.vectors * e.values.asDiagonal();
  const double condw = condition_estimate(e.vectors);
  CHECK(resid.norm() <= 1e-10 * a.norm() * condw);
  for (Index j = 0; j < 40; ++j) CHECK(std::abs(e.vectors.col(j).norm() - 1.0) < 1e-12);

  DenseMatrix h = random_dense(30, 30, 23);
  h = (h + h.adjoint()).eval();
  const Vector hev = dense_eig(h, opt).values;
  for (Index i = 0; i < 30; ++i) CHECK(std::abs(hev(i).imag()) <= 1e-10 * h.norm());
}

}  // namespace

TEST_CASE("dense_eig: Eigen backend") { check_eig_backend(EigenBackend::Eigen); }
TEST_CASE("dense_eig: Hessenberg QR fallback") { check_eig_backend(EigenBackend::HessenbergQR); }

TEST_CASE("dense_eig: backends agree on a real nonsymmetric matrix") {
  const DenseMatrix a = random_dense(25, 25, 31);
  Vector e1 = dense_eigenvalues(a, EigenBackend::Eigen);
  Vector e2 = dense_eigenvalues(a, EigenBackend::HessenbergQR);
  std::vector<cplx> v1(e1.data(), e1.data() + 25), v2(e2.data(), e2.data() + 25);
  for (const cplx& x : v1) {
    double best = std::numeric_limits<double>::infinity();
    for (const cplx& y : v2) best = std::min(best, std::abs(x - y));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("dense_eig: size limit") {
  EigOptions opt;
  opt.dense_limit = 5;
  CHECK_THROWS_AS(dense_eig(DenseMatrix::Identity(6, 6), opt), Error);
}

TEST_CASE("schur_hessenberg_qr reconstructs") {
  const DenseMatrix a = random_dense(15, 15, 41);
  DenseMatrix t, z;
  schur_hessenberg_qr(a, t, z);
  CHECK((z * t * z.adjoint() - a).norm() < 1e-12 * a.norm());
  CHECK((z.adjoint() * z - DenseMatrix::Identity(15, 15)).norm() < 1e-12);
  for (Index j = 0; j < 15; ++j)
    for (Index i = j + 1; i < 15; ++i) CHECK(std::abs(t(i, j)) < 1e-12 * a.norm());
}

TEST_CASE("hermitian_min_eig") {
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d.diagonal() << 2.0, 5.0;
  CHECK(std::abs(hermitian_min_eig(d) - 2.0) < 1e-14);
  DenseMatrix a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  CHECK(std::abs(hermitian_min_eig(a) - 1.0) < 1e-14);
  DenseMatrix ns(2, 2);
  ns << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(hermitian_min_eig(ns), Error);
}

TEST_CASE("hermitian_min_eig: conv-diff hermitian part cross-check") {
  const DenseMatrix a = gen_convection_diffusion(6, 1e-3).to_dense();
  const DenseMatrix h = hermitian_part(a);
  const double lmin = hermitian_min_eig(h);
  const Vector ev = dense_eigenvalues(h);
  double ref = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) ref = std::min(ref, ev(i).real());
  CHECK(std::abs(lmin - ref) <= 1e-10 * h.norm());
}

TEST_CASE("condition_estimate") {
  const ThinQR q = thin_qr(random_dense(20, 5, 51));
  CHECK(std::abs(condition_estimate(q.q) - 1.0) < 0.1);

  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d.diagonal() << 1.0, 1e-8;
  const double c = condition_estimate(d);
  CHECK(c > 1e7);
  CHECK(c < 1e9);

  CHECK(std::isinf(condition_estimate(DenseMatrix::Zero(4, 2))));

  const DenseMatrix g = random_dense(30, 8, 52) * random_dense(8, 8, 53);
  Eigen::BDCSVD<DenseMatrix> svd(g);
  const double truth = svd.singularValues()(0) / svd.singularValues()(7);
  const double est = condition_estimate(g);
  CHECK(est > truth / 10.0);
  CHECK(est < truth * 10.0);
}

TEST_CASE("spectral_norm") {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 1.0, -7.0, 3.0;
  CHECK(std::abs(spectral_norm(d) - 7.0) < 1e-13);
}
