#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "shapemean/basis.hpp"
#include "shapemean/curves.hpp"
#include "shapemean/errors.hpp"

using namespace shapemean;

TEST_CASE("order-0 basis evaluates to interval indicators") {
  SplineBasis basis(0, 3);  // two cells
  CHECK(basis.size() == 2);
  Eigen::VectorXd f = basis.evaluate(0.25);
  CHECK(f(0) == doctest::Approx(1.0));
  CHECK(f(1) == doctest::Approx(0.0));
  f = basis.evaluate(0.75);
  CHECK(f(0) == doctest::Approx(0.0));
  CHECK(f(1) == doctest::Approx(1.0));
  // right-continuous at the knot, left-closed at t = 1
  f = basis.evaluate(0.5);
  CHECK(f(0) == doctest::Approx(0.0));
  CHECK(f(1) == doctest::Approx(1.0));
  f = basis.evaluate(1.0);
  CHECK(f(1) == doctest::Approx(1.0));
}

TEST_CASE("order-1 basis evaluates to hat functions") {
  SplineBasis basis(1, 2);
  CHECK(basis.size() == 2);
  const Eigen::VectorXd f = basis.evaluate(0.25);
  CHECK(f(0) == doctest::Approx(0.75));
  CHECK(f(1) == doctest::Approx(0.25));
}

TEST_CASE("bases form a partition of unity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int order : {0, 1}) {
    SplineBasis basis(order, 13);
    for (int rep = 0; rep < 100; ++rep) {
      const double t = unif(rng);
      CHECK(basis.evaluate(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(basis.evaluate(0.0).sum() == doctest::Approx(1.0));
    CHECK(basis.evaluate(1.0).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("basis rejects invalid construction and out-of-domain points") {
  CHECK_THROWS_AS(SplineBasis(2, 5), InvalidOrder);
  CHECK_THROWS_AS(SplineBasis(-1, 5), InvalidOrder);
  SplineBasis basis(1, 5);
  CHECK_THROWS_AS(basis.evaluate(-0.1), OutOfDomain);
  CHECK_THROWS_AS(basis.evaluate(1.1), OutOfDomain);
}

TEST_CASE("exact Gram matrices for small bases") {
  // order 0 on 4 equal cells: diag of the cell widths
  const Eigen::MatrixXd g0 = SplineBasis(0, 5).gram();
  CHECK(g0.isApprox(0.25 * Eigen::MatrixXd::Identity(4, 4), 1e-14));

  // order 1 with a single interval: int (1-t)^2 = 1/3, int t(1-t) = 1/6
  const Eigen::MatrixXd g1 = SplineBasis(1, 2).gram();
  CHECK(g1(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(g1(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(g1(1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(g1(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Gram matrix matches quadrature for order 1, 13 knots") {
  SplineBasis basis(1, 13);
  const int m = basis.size();
  const Eigen::MatrixXd G = basis.gram();
  // Simpson per knot interval is exact for the piecewise-quadratic products
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(m, m);
  for (int cell = 0; cell < 12; ++cell) {
    const double a = basis.knot(cell), b = basis.knot(cell + 1);
    const Eigen::VectorXd fa = basis.evaluate(a);
    const Eigen::VectorXd fm = basis.evaluate(0.5 * (a + b));
    // evaluate just inside to stay on this cell's polynomial at b
    const Eigen::VectorXd fb = basis.evaluate(b - 1e-13);
    Q += (b - a) / 6.0 *
         (fa * fa.transpose() + 4.0 * fm * fm.transpose() +
          fb * fb.transpose());
  }
  CHECK((G - Q).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("difference penalty: exact small case, PSD, null space") {
  const Eigen::MatrixXd P = difference_penalty(3, 1).P;
  Eigen::MatrixXd expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(P.isApprox(expected, 1e-14));

  const Eigen::MatrixXd P2 = difference_penalty(6, 2).P;
  CHECK(P2.isApprox(P2.transpose(), 1e-14));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P2);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  // null space holds constants and linear trends (difference order 2)
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(6);
  Eigen::VectorXd lin = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0);
  CHECK((P2 * ones).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((P2 * lin).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(difference_penalty(3, 3), InvalidOrder);
  CHECK_THROWS_AS(difference_penalty(3, 0), InvalidOrder);
}

TEST_CASE("tensor penalty acts as P X + X P^T on column-stacked matrices") {
  const Eigen::MatrixXd P = difference_penalty(4, 2).P;
  const Eigen::MatrixXd K = tensor_penalty(P);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(4, 4);
  for (int i = 0; i < 16; ++i) X(i / 4, i % 4) = gauss(rng);
  const Eigen::MatrixXd Y = P * X + X * P.transpose();
  const Eigen::VectorXd vx = Eigen::Map<const Eigen::VectorXd>(X.data(), 16);
  const Eigen::VectorXd vy = Eigen::Map<const Eigen::VectorXd>(Y.data(), 16);
  CHECK((K * vx - vy).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constraint transforms span Hermitian matrices") {
  for (int m : {1, 2, 4}) {
    const ConstraintTransforms ct = constraint_transforms(m);
    CHECK(ct.sym.rows() == (m * m + m) / 2);
    CHECK(ct.anti.rows() == (m * m - m) / 2);
    CHECK(ct.sym.cols() == m * m);
    CHECK(ct.anti.cols() == m * m);
    if (ct.anti.rows() > 0)
      CHECK((ct.sym * ct.anti.transpose()).cwiseAbs().maxCoeff() < 1e-14);

    // any free coefficient choice reconstructs a Hermitian matrix
    std::mt19937_64 rng(3 + m);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd xr(ct.sym.rows()), xa(ct.anti.rows());
    for (int i = 0; i < xr.size(); ++i) xr(i) = gauss(rng);
    for (int i = 0; i < xa.size(); ++i) xa(i) = gauss(rng);
    const Eigen::VectorXd vr = ct.sym.transpose() * xr;
    const Eigen::VectorXd va = ct.anti.transpose() * xa;
    Eigen::MatrixXcd Xi(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r)
        Xi(r, c) = Complex(vr(c * m + r), va(c * m + r));
    CHECK((Xi - Xi.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    // and every Hermitian matrix is reachable: solve for the coefficients
    Eigen::MatrixXcd H(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) H(r, c) = Complex(gauss(rng), gauss(rng));
    H = ((H + H.adjoint()) / 2.0).eval();
    Eigen::VectorXd vre(m * m), vim(m * m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) {
        vre(c * m + r) = H(r, c).real();
        vim(c * m + r) = H(r, c).imag();
      }
    const Eigen::VectorXd cr =
        ct.sym.transpose().colPivHouseholderQr().solve(vre);
    CHECK((ct.sym.transpose() * cr - vre).cwiseAbs().maxCoeff() < 1e-12);
    if (ct.anti.rows() > 0) {
      const Eigen::VectorXd ca =
          ct.anti.transpose().colPivHouseholderQr().solve(vim);
      CHECK((ct.anti.transpose() * ca - vim).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}
