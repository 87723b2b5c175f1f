#include "hsi/prox.hpp"

#include "hsi/kernels/kernels.hpp"
#include "hsi/types.hpp"

#include "doctest.h"
#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

using hsi::GroupStructure;
using hsi::Matrix;
using hsi::Vector;

namespace {

Vector random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

std::vector<int> random_assignment(std::mt19937_64& rng, int n, int& group_count) {
  std::uniform_int_distribution<int> pick(1, n);
  group_count = pick(rng);
  std::vector<int> a(static_cast<std::size_t>(n));
  for (int i = 0; i < group_count; ++i) a[static_cast<std::size_t>(i)] = i;
  std::uniform_int_distribution<int> which(0, group_count - 1);
  for (int i = group_count; i < n; ++i) a[static_cast<std::size_t>(i)] = which(rng);
  std::shuffle(a.begin(), a.end(), rng);
  return a;
}

}  // namespace

TEST_CASE("soft threshold matches its closed form") {
  CHECK(hsi::prox::soft_threshold(2.0, 0.5) == 1.5);
  CHECK(hsi::prox::soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(hsi::prox::soft_threshold(-2.0, 0.5) == -1.5);
  CHECK(hsi::prox::soft_threshold(0.7, 0.0) == 0.7);
  CHECK(hsi::prox::soft_threshold(0.7, 0.7) == 0.0);
  CHECK(hsi::prox::soft_threshold(0.0, 0.2) == 0.0);

  Matrix m(2, 2);
  m << 2.0, -0.3, 0.6, -1.0;
  hsi::prox::soft_threshold_inplace(m, 0.5);
  CHECK(m(0, 0) == 1.5);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 0) == doctest::Approx(0.1));
  CHECK(m(1, 1) == -0.5);
}

TEST_CASE("block soft threshold shrinks along the input direction") {
  Vector v(2);
  v << 3.0, 4.0;
  Vector out = hsi::prox::block_soft_threshold(v, 2.5);
  CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hsi::prox::block_soft_threshold(v, 5.0).isZero(0.0));
  CHECK(hsi::prox::block_soft_threshold(v, 7.0).isZero(0.0));
  CHECK(hsi::prox::block_soft_threshold(Vector::Zero(3), 0.1).isZero(0.0));
  CHECK((hsi::prox::block_soft_threshold(v, 0.0) - v).norm() == 0.0);
}

TEST_CASE("group prox thresholds each group block") {
  GroupStructure groups(2, {0, 0, 1, 1});
  Matrix m(4, 1);
  m << 3.0, 4.0, 0.1, 0.0;
  hsi::prox::prox_group_inplace(m, groups, 2.5);
  CHECK(m(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(m(1, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m(2, 0) == 0.0);
  CHECK(m(3, 0) == 0.0);

  Matrix wrong(3, 1);
  wrong.setOnes();
  CHECK_THROWS_AS(hsi::prox::prox_group_inplace(wrong, groups, 1.0), hsi::DataError);
}

TEST_CASE("elitist prox uses the group l1-scaled level") {
  GroupStructure one_group(1, {0, 0});
  Matrix m(2, 1);
  m << 1.0, 0.5;
  hsi::prox::prox_elitist_inplace(m, one_group, 1.0);
  CHECK(m(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m(1, 0) == 0.0);

  GroupStructure singletons(2, {0, 1});
  Matrix s(2, 1);
  s << 0.8, -0.4;
  hsi::prox::prox_elitist_inplace(s, singletons, 0.5);
  CHECK(s(0, 0) == doctest::Approx(0.8 / 1.5).epsilon(1e-14));
  CHECK(s(1, 0) == doctest::Approx(-0.4 / 1.5).epsilon(1e-14));

  Matrix id(2, 1);
  id << 0.3, -0.7;
  Matrix expect = id;
  hsi::prox::prox_elitist_inplace(id, one_group, 0.0);
  CHECK((id - expect).norm() == 0.0);

  Matrix wrong(3, 1);
  wrong.setOnes();
  CHECK_THROWS_AS(hsi::prox::prox_elitist_inplace(wrong, one_group, 1.0),
                  hsi::DataError);
}

TEST_CASE("collaborative prox thresholds whole rows") {
  Matrix m(3, 2);
  m << 3.0, 4.0, 0.05, 0.05, -1.0, 0.0;
  hsi::prox::prox_collaborative_rows_inplace(m, 0.5);
  CHECK(m(0, 0) == doctest::Approx(2.7).epsilon(1e-14));
  CHECK(m(0, 1) == doctest::Approx(3.6).epsilon(1e-14));
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
  CHECK(m(2, 0) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("q_shrink dead zone and q=1 reduction") {
  CHECK(hsi::prox::q_shrink(4.0, 1.0, 0.5) == doctest::Approx(3.5).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u_dist(-6.0, 6.0);
  std::uniform_real_distribution<double> tau_dist(0.01, 2.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double u = u_dist(rng);
    const double tau = tau_dist(rng);
    CHECK(hsi::prox::q_shrink(u, tau, 1.0) == hsi::prox::soft_threshold(u, tau));
  }

  for (double q : {0.1, 0.5, 0.9}) {
    for (double tau : {0.3, 1.0, 2.5}) {
      CHECK(hsi::prox::q_shrink(tau, tau, q) == 0.0);
      CHECK(hsi::prox::q_shrink(-tau, tau, q) == 0.0);
      CHECK(hsi::prox::q_shrink(0.999999 * tau, tau, q) == 0.0);
      CHECK(hsi::prox::q_shrink(tau * (1.0 + 1e-9), tau, q) > 0.0);
      CHECK(hsi::prox::q_shrink(-tau * (1.0 + 1e-9), tau, q) < 0.0);
      CHECK(hsi::prox::q_shrink(0.0, tau, q) == 0.0);

      double prev = 0.0;
      for (double u = tau * 1.0001; u < 8.0; u += 0.01) {
        const double out = hsi::prox::q_shrink(u, tau, q);
        CHECK(out >= prev);
        prev = out;
      }
    }
  }

  Matrix m(2, 2);
  m << 4.0, 0.5, -4.0, 1.0;
  hsi::prox::q_shrink_inplace(m, 1.0, 0.5);
  CHECK(m(0, 0) == doctest::Approx(3.5));
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 0) == doctest::Approx(-3.5));
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("simplex projection hits known points") {
  Vector v(2);
  v << 0.5, 0.5;
  CHECK((hsi::prox::project_simplex(v) - v).norm() == 0.0);
  v << 2.0, 0.0;
  Vector e1(2);
  e1 << 1.0, 0.0;
  CHECK((hsi::prox::project_simplex(v) - e1).norm() == 0.0);
  v << 0.6, 0.6;
  Vector half(2);
  half << 0.5, 0.5;
  CHECK((hsi::prox::project_simplex(v) - half).norm() < 1e-15);

  Matrix m(3, 2);
  m << 0.2, -1.0, 0.3, 0.2, 0.1, 4.0;
  hsi::prox::project_simplex_columns_inplace(m);
  for (int k = 0; k < 2; ++k) {
    CHECK(m.col(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.col(k).minCoeff() >= 0.0);
  }
}

TEST_CASE("simplex projection satisfies the KKT conditions") {
  std::mt19937_64 rng = oracle::rng(21);
  std::uniform_int_distribution<int> size_dist(1, 50);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size_dist(rng);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = val(rng);
    const Vector x = hsi::prox::project_simplex(v);
    worst = std::max(worst, oracle::simplex_kkt_violation(v, x));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("nonneg projection clamps below zero") {
  Matrix m(2, 1);
  m << -1.0, 2.0;
  hsi::prox::project_nonneg_inplace(m);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 0) == 2.0);

  Matrix zero = Matrix::Zero(3, 2);
  hsi::prox::project_nonneg_inplace(zero);
  CHECK(zero.isZero(0.0));
}

TEST_CASE("prox outputs match the grid oracle on small instances") {
  std::mt19937_64 rng = oracle::rng(33);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> tau_dist(0.05, 3.0);
  const double step = 1e-2;
  const double slack = 1e-6;

  for (int trial = 0; trial < 25; ++trial) {
    const int n = dim(rng);
    const Vector v = random_vector(rng, n, -4.0, 4.0);
    const double tau = tau_dist(rng);

    {
      Matrix m = v;
      hsi::prox::soft_threshold_inplace(m, tau);
      const double attained =
          0.5 * (m - v).squaredNorm() + tau * oracle::l1_value(m.col(0));
      CHECK(attained <= oracle::soft_grid_min(v, tau, -5.0, 5.0, step) + slack);
    }
    {
      const Vector x = hsi::prox::block_soft_threshold(v, tau);
      const double attained = 0.5 * (x - v).squaredNorm() + tau * x.norm();
      CHECK(attained <= oracle::block_grid_min(v, tau, -5.0, 5.0, step) + slack);
    }
    {
      int group_count = 0;
      const std::vector<int> assignment = random_assignment(rng, n, group_count);
      GroupStructure groups(group_count, assignment);
      Matrix m = v;
      hsi::prox::prox_group_inplace(m, groups, tau);
      const double attained =
          0.5 * (m - v).squaredNorm() +
          tau * oracle::group_value(m.col(0), assignment, group_count);
      CHECK(attained <=
            oracle::group_grid_min(v, assignment, group_count, tau, -5.0, 5.0, step) +
                slack);
    }
    {
      const Vector x = hsi::prox::project_simplex(v);
      const double attained = 0.5 * (x - v).squaredNorm();
      CHECK(attained <= oracle::simplex_grid_min(v, 1e-3) + slack);
    }
    {
      Matrix m = v;
      hsi::prox::project_nonneg_inplace(m);
      const double attained = 0.5 * (m - v).squaredNorm();
      CHECK(attained <= oracle::nonneg_grid_min(v, -5.0, 5.0, step) + slack);
    }
  }

  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<int> rc(1, 3);
    const int rows = rc(rng);
    const int cols = rc(rng);
    const double tau = tau_dist(rng);
    Matrix v(rows, cols);
    std::uniform_real_distribution<double> val(-4.0, 4.0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) v(r, c) = val(rng);
    }
    Matrix m = v;
    hsi::prox::prox_collaborative_rows_inplace(m, tau);
    const double attained =
        0.5 * (m - v).squaredNorm() + tau * oracle::collaborative_value(m);
    CHECK(attained <= oracle::collaborative_grid_min(v, tau, -5.0, 5.0, step) + slack);
  }
}

TEST_CASE("prox operators are non-expansive") {
  std::mt19937_64 rng = oracle::rng(44);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> tau_dist(0.0, 3.0);
  std::uniform_real_distribution<double> small_tau(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 4);

  for (int trial = 0; trial < 300; ++trial) {
    const int n = dim(rng);
    Vector a(n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = val(rng);
      b[i] = val(rng);
    }
    const double gap = (a - b).norm() + 1e-12;
    const double tau = tau_dist(rng);

    {
      Matrix ma = a;
      Matrix mb = b;
      hsi::prox::soft_threshold_inplace(ma, tau);
      hsi::prox::soft_threshold_inplace(mb, tau);
      CHECK((ma - mb).norm() <= gap);
    }
    CHECK((hsi::prox::block_soft_threshold(a, tau) -
           hsi::prox::block_soft_threshold(b, tau))
              .norm() <= gap);
    CHECK((hsi::prox::project_simplex(a) - hsi::prox::project_simplex(b)).norm() <=
          gap);
    {
      Matrix ma = a;
      Matrix mb = b;
      hsi::prox::project_nonneg_inplace(ma);
      hsi::prox::project_nonneg_inplace(mb);
      CHECK((ma - mb).norm() <= gap);
    }
    {
      int group_count = 0;
      const std::vector<int> assignment = random_assignment(rng, n, group_count);
      GroupStructure groups(group_count, assignment);
      Matrix ma = a;
      Matrix mb = b;
      hsi::prox::prox_group_inplace(ma, groups, tau);
      hsi::prox::prox_group_inplace(mb, groups, tau);
      CHECK((ma - mb).norm() <= gap);

      ma = a;
      mb = b;
      const double tau_e = small_tau(rng);
      hsi::prox::prox_elitist_inplace(ma, groups, tau_e);
      hsi::prox::prox_elitist_inplace(mb, groups, tau_e);
      CHECK((ma - mb).norm() <= gap);
    }
  }
}

TEST_CASE("group and elitist prox never create support") {
  std::mt19937_64 rng = oracle::rng(55);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_real_distribution<double> tau_dist(0.0, 2.0);
  std::uniform_int_distribution<int> dim(2, 8);
  std::bernoulli_distribution zero_out(0.4);

  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    Matrix v(n, 2);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        v(i, k) = zero_out(rng) ? 0.0 : val(rng);
      }
    }
    int group_count = 0;
    const std::vector<int> assignment = random_assignment(rng, n, group_count);
    GroupStructure groups(group_count, assignment);
    const double tau = tau_dist(rng);

    Matrix g = v;
    hsi::prox::prox_group_inplace(g, groups, tau);
    Matrix e = v;
    hsi::prox::prox_elitist_inplace(e, groups, tau);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        if (v(i, k) == 0.0) {
          CHECK(g(i, k) == 0.0);
          CHECK(e(i, k) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("mixed norms agree with hand-computed values") {
  GroupStructure pairs(2, {0, 0, 1, 1});
  Vector v(4);
  v << 3.0, 4.0, 0.0, 0.0;
  CHECK(hsi::prox::mixed_norm(v, pairs, 2.0, 1.0) == doctest::Approx(5.0));

  Vector w(4);
  w << 1.0, 1.0, 2.0, 0.0;
  CHECK(hsi::prox::mixed_norm(w, pairs, 1.0, 2.0) ==
        doctest::Approx(std::sqrt(8.0)));
  CHECK(hsi::prox::mixed_norm_pow(w, pairs, 1.0, 0.5) ==
        doctest::Approx(2.0 * std::sqrt(2.0)));

  std::mt19937_64 rng = oracle::rng(66);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  Vector r(4);
  for (int i = 0; i < 4; ++i) r[i] = val(rng);
  CHECK(hsi::prox::mixed_norm(r, pairs, 1.0, 1.0) ==
        doctest::Approx(oracle::l1_value(r)).epsilon(1e-12));

  CHECK(hsi::prox::mixed_norm(Vector(Vector::Zero(4)), pairs, 2.0, 1.0) == 0.0);
  Vector tiny = Vector::Zero(4);
  tiny[2] = 1e-8;
  CHECK(hsi::prox::mixed_norm(tiny, pairs, 2.0, 1.0) > 0.0);

  Matrix two_cols(4, 2);
  two_cols.col(0) = v;
  two_cols.col(1) = w;
  CHECK(hsi::prox::mixed_norm(two_cols, pairs, 2.0, 1.0) ==
        doctest::Approx(5.0 + hsi::prox::mixed_norm(w, pairs, 2.0, 1.0)));
  CHECK(hsi::prox::mixed_norm_pow(two_cols, pairs, 1.0, 0.5) ==
        doctest::Approx(hsi::prox::mixed_norm_pow(Vector(v), pairs, 1.0, 0.5) +
                        2.0 * std::sqrt(2.0)));

  CHECK_THROWS_AS(hsi::prox::mixed_norm(v, pairs, 0.0, 1.0), hsi::ConfigError);
  CHECK_THROWS_AS(hsi::prox::mixed_norm(v, pairs, 2.0, -1.0), hsi::ConfigError);
  Vector short_v(3);
  short_v.setOnes();
  CHECK_THROWS_AS(hsi::prox::mixed_norm(short_v, pairs, 2.0, 1.0), hsi::DataError);
}

TEST_CASE("scalar and avx2 kernels agree") {
  namespace hk = hsi::kernels;
  std::mt19937_64 rng = oracle::rng(77);
  std::normal_distribution<double> dist(0.0, 2.0);

  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{7}, std::size_t{8}, std::size_t{15},
                        std::size_t{33}, std::size_t{100}}) {
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
    }
    std::vector<double> out_s(n);
    std::vector<double> out_v(n);

    hk::scalar_impl::soft_threshold(a.data(), out_s.data(), n, 0.7);
    hk::avx2_impl::soft_threshold(a.data(), out_v.data(), n, 0.7);
    CHECK(out_s == out_v);

    hk::scalar_impl::clamp_nonneg(a.data(), out_s.data(), n);
    hk::avx2_impl::clamp_nonneg(a.data(), out_v.data(), n);
    CHECK(out_s == out_v);

    hk::scalar_impl::scale(a.data(), out_s.data(), n, -1.7);
    hk::avx2_impl::scale(a.data(), out_v.data(), n, -1.7);
    CHECK(out_s == out_v);

    const double ss = hk::scalar_impl::sum_sq(a.data(), n);
    const double sv = hk::avx2_impl::sum_sq(a.data(), n);
    CHECK(std::abs(ss - sv) <= 1e-12 * (1.0 + std::abs(ss)));

    const double as = hk::scalar_impl::sum_abs(a.data(), n);
    const double av = hk::avx2_impl::sum_abs(a.data(), n);
    CHECK(std::abs(as - av) <= 1e-12 * (1.0 + std::abs(as)));

    const double ds = hk::scalar_impl::sum_sq_diff(a.data(), b.data(), n);
    const double dv = hk::avx2_impl::sum_sq_diff(a.data(), b.data(), n);
    CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)));
  }
}

TEST_CASE("kernel backend selection") {
  namespace hk = hsi::kernels;
  const hk::Backend original = hk::active_backend();
  CHECK(hk::backend_available(hk::Backend::scalar));
  CHECK(std::string(hk::backend_name(hk::Backend::scalar)) == "scalar");
  CHECK(std::string(hk::backend_name(hk::Backend::avx2)) == "avx2");

  hk::set_backend(hk::Backend::scalar);
  CHECK(hk::active_backend() == hk::Backend::scalar);
  if (hk::backend_available(hk::Backend::avx2)) {
    hk::set_backend(hk::Backend::avx2);
    CHECK(hk::active_backend() == hk::Backend::avx2);
  } else {
    CHECK_THROWS_AS(hk::set_backend(hk::Backend::avx2), hsi::ConfigError);
  }
  hk::set_backend(original);

  double data[5] = {1.0, -2.0, 0.5, -0.1, 3.0};
  double via_dispatch[5];
  double via_scalar[5];
  hk::soft_threshold(data, via_dispatch, 5, 0.4);
  hk::scalar_impl::soft_threshold(data, via_scalar, 5, 0.4);
  for (int i = 0; i < 5; ++i) CHECK(via_dispatch[i] == via_scalar[i]);
}

TEST_CASE("restricted oracle scans match naive full-grid enumeration") {
  std::mt19937_64 rng = oracle::rng(88);
  std::uniform_real_distribution<double> val(-2.0, 2.0);

  for (int trial = 0; trial < 3; ++trial) {
    Vector v(3);
    for (int i = 0; i < 3; ++i) v[i] = val(rng);
    const double tau = 0.8;
    const double step = 0.05;
    double naive = std::numeric_limits<double>::infinity();
    for (double x0 = -5.0; x0 <= 5.0 + 1e-12; x0 += step) {
      for (double x1 = -5.0; x1 <= 5.0 + 1e-12; x1 += step) {
        for (double x2 = -5.0; x2 <= 5.0 + 1e-12; x2 += step) {
          Vector x(3);
          x << x0, x1, x2;
          naive = std::min(naive, 0.5 * (x - v).squaredNorm() + tau * x.norm());
        }
      }
    }
    const double fast = oracle::block_grid_min(v, tau, -5.0, 5.0, step);
    CHECK(fast == doctest::Approx(naive).epsilon(1e-12));
  }

  Matrix B(6, 3);
  std::uniform_real_distribution<double> pos(0.1, 1.0);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 3; ++c) B(r, c) = pos(rng);
  }
  Vector x = B * Vector::Constant(3, 1.0 / 3.0);
  const double fast = oracle::l1_grid_min_orthant(B, x, 0.05, 2.0, 0.05);
  const double naive = oracle::l1_grid_min_orthant_naive(B, x, 0.05, 2.0, 0.05);
  CHECK(fast == doctest::Approx(naive).epsilon(1e-12));
}
