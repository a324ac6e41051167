#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sentrep/kernels.hpp"
#include "test_support.hpp"

using namespace sentrep;
namespace kn = sentrep::kernels;

namespace {

const std::vector<size_t> kSizes = {0, 1, 2, 3, 7, 8, 9, 15, 16, 17,
                                    31, 64, 100, 255, 1000};

template <class T>
void check_elementwise_bitwise() {
  if (!kn::avx2_supported()) return;
  ts::IsaGuard guard;
  Rng rng(42);
  for (size_t n : kSizes) {
    auto a = ts::random_vec<T>(rng, n);
    auto b = ts::random_vec<T>(rng, n);
    auto y0 = ts::random_vec<T>(rng, n);
    T alpha = static_cast<T>(rng.uniform(-1.5, 1.5));

    auto run = [&](kn::Isa isa) {
      kn::force_isa(isa);
      std::vector<T> add_out(n), mul_out(n), madd_out = y0, axpy_out = y0,
                     scale_out = y0;
      kn::add(add_out.data(), a.data(), b.data(), n);
      kn::mul(mul_out.data(), a.data(), b.data(), n);
      kn::madd(madd_out.data(), a.data(), b.data(), n);
      kn::axpy(axpy_out.data(), alpha, b.data(), n);
      kn::scale(scale_out.data(), alpha, n);
      return std::vector<std::vector<T>>{add_out, mul_out, madd_out, axpy_out,
                                         scale_out};
    };
    auto rs = run(kn::Isa::scalar);
    auto rv = run(kn::Isa::avx2);
    for (size_t i = 0; i < rs.size(); ++i) {
      REQUIRE(std::memcmp(rs[i].data(), rv[i].data(), n * sizeof(T)) == 0);
    }
  }
}

template <class T>
void check_reductions_tolerance() {
  if (!kn::avx2_supported()) return;
  ts::IsaGuard guard;
  Rng rng(43);
  for (size_t n : kSizes) {
    auto a = ts::random_vec<T>(rng, n);
    auto b = ts::random_vec<T>(rng, n);
    kn::force_isa(kn::Isa::scalar);
    double dot_s = kn::dot(a.data(), b.data(), n);
    double sum_s = kn::sum(a.data(), n);
    kn::force_isa(kn::Isa::avx2);
    double dot_v = kn::dot(a.data(), b.data(), n);
    double sum_v = kn::sum(a.data(), n);
    double tol = (sizeof(T) == 4 ? 1e-4 : 1e-12) * std::max<double>(n, 1);
    CHECK(std::fabs(dot_s - dot_v) <= tol);
    CHECK(std::fabs(sum_s - sum_v) <= tol);
  }
}

template <class T>
void check_argmax_agreement() {
  ts::IsaGuard guard;
  Rng rng(44);
  for (size_t n : kSizes) {
    if (n == 0) continue;
    for (int rep = 0; rep < 20; ++rep) {
      auto a = ts::random_vec<T>(rng, n);
      // Plant duplicated maxima to exercise the first-occurrence rule.
      if (n >= 3 && rep % 2 == 0) {
        size_t i = rng.below(n), j = rng.below(n);
        T big = T(9);
        a[i] = big;
        a[j] = big;
      }
      size_t ref = 0;
      for (size_t i = 1; i < n; ++i) {
        if (a[i] > a[ref]) ref = i;
      }
      kn::force_isa(kn::Isa::scalar);
      CHECK(kn::argmax(a.data(), n) == ref);
      if (kn::avx2_supported()) {
        kn::force_isa(kn::Isa::avx2);
        CHECK(kn::argmax(a.data(), n) == ref);
      }
    }
  }
}

template <class T>
void check_adam_bitwise_and_form() {
  ts::IsaGuard guard;
  Rng rng(45);
  for (size_t n : kSizes) {
    auto w0 = ts::random_vec<T>(rng, n);
    auto g = ts::random_vec<T>(rng, n);
    auto m0 = ts::random_vec<T>(rng, n, -0.1, 0.1);
    std::vector<T> v0(n);
    for (auto& x : v0) x = static_cast<T>(rng.uniform(0.0, 0.2));
    T lr = T(0.01), b1 = T(0.9), b2 = T(0.999), eps = T(1e-8);
    T bias1 = T(1) - b1, bias2 = T(1) - b2;  // t = 1

    auto run = [&](kn::Isa isa) {
      kn::force_isa(isa);
      auto w = w0, m = m0, v = v0;
      kn::adam_update(w.data(), g.data(), m.data(), v.data(), n, lr, b1, b2,
                      eps, bias1, bias2);
      return std::vector<std::vector<T>>{w, m, v};
    };
    auto rs = run(kn::Isa::scalar);
    if (kn::avx2_supported()) {
      auto rv = run(kn::Isa::avx2);
      for (size_t i = 0; i < rs.size(); ++i) {
        REQUIRE(std::memcmp(rs[i].data(), rv[i].data(), n * sizeof(T)) == 0);
      }
    }
    // Published update equations, stepped by hand.
    for (size_t i = 0; i < n; ++i) {
      double m1 = 0.9 * double(m0[i]) + 0.1 * double(g[i]);
      double v1 = 0.999 * double(v0[i]) + 0.001 * double(g[i]) * double(g[i]);
      double mhat = m1 / double(bias1);
      double vhat = v1 / double(bias2);
      double expect = double(w0[i]) - 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
      CHECK(double(rs[0][i]) == doctest::Approx(expect).epsilon(1e-5));
    }
  }
}

}  // namespace

TEST_CASE("elementwise kernels bitwise identical across ISAs") {
  check_elementwise_bitwise<float>();
  check_elementwise_bitwise<double>();
}

TEST_CASE("reduction kernels agree within tolerance across ISAs") {
  check_reductions_tolerance<float>();
  check_reductions_tolerance<double>();
}

TEST_CASE("argmax returns first maximal index on every ISA") {
  check_argmax_agreement<float>();
  check_argmax_agreement<double>();
}

TEST_CASE("adam kernel matches the published update and is ISA-stable") {
  check_adam_bitwise_and_form<float>();
  check_adam_bitwise_and_form<double>();
}

TEST_CASE("isa dispatch control") {
  ts::IsaGuard guard;
  kn::force_isa(kn::Isa::scalar);
  CHECK(kn::active_isa() == kn::Isa::scalar);
  kn::reset_isa();
  if (kn::avx2_supported()) {
    CHECK(kn::active_isa() == kn::Isa::avx2);
    kn::force_isa(kn::Isa::avx2);
    CHECK(kn::active_isa() == kn::Isa::avx2);
  } else {
    CHECK(kn::active_isa() == kn::Isa::scalar);
    CHECK_THROWS_AS(kn::force_isa(kn::Isa::avx2), ValueError);
  }
}

TEST_CASE("scalar kernel reference values") {
  std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  ts::IsaGuard guard;
  kn::force_isa(kn::Isa::scalar);
  CHECK(kn::dot(a.data(), b.data(), 3) == 32.0);
  CHECK(kn::sum(a.data(), 3) == 6.0);
  CHECK(kn::argmax(a.data(), 3) == 2);
  std::vector<double> y = {1, 1, 1};
  kn::axpy(y.data(), 2.0, a.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  CHECK_THROWS_AS(kn::argmax(a.data(), 0), ValueError);
}
