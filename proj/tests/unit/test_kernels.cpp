#include <doctest.h>

#include <cstring>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/kernels/kernels.hpp"

using namespace jdrec;

namespace {

std::vector<double> randvec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Sizes straddle the vector widths so every tail path runs.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33};

}  // namespace

TEST_CASE("scalar gemm matches a triple loop") {
  Rng rng(11);
  const auto& k = kernels::scalar_kernels();
  for (std::size_t m : {1, 3, 6}) {
    for (std::size_t kk : {1, 4, 7}) {
      for (std::size_t n : {1, 5, 9}) {
        auto a = randvec(m * kk, rng), b = randvec(kk * n, rng), c = randvec(m * n, rng);
        auto expect = c;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
            expect[i * n + j] += s;
          }
        k.gemm(m, kk, n, a.data(), b.data(), c.data(), true);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("scalar gemm_tn matches transpose then multiply") {
  Rng rng(12);
  const auto& k = kernels::scalar_kernels();
  const std::size_t m = 5, kk = 3, n = 6;
  auto a = randvec(m * kk, rng), b = randvec(m * n, rng);
  std::vector<double> c(kk * n, 0.0), expect(kk * n, 0.0);
  for (std::size_t p = 0; p < kk; ++p)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) expect[p * n + j] += a[i * kk + p] * b[i * n + j];
  k.gemm_tn(m, kk, n, a.data(), b.data(), c.data());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("column_max keeps the lowest row on ties") {
  const double a[] = {1.0, 5.0, 2.0,
                      3.0, 5.0, 2.0,
                      3.0, 4.0, 2.0};
  double mx[3];
  std::uint32_t arg[3];
  kernels::scalar_kernels().column_max(3, 3, a, mx, arg);
  CHECK(mx[0] == 3.0);
  CHECK(arg[0] == 1);
  CHECK(arg[1] == 0);
  CHECK(arg[2] == 0);
}

TEST_CASE("every available variant is bit-identical to the scalar reference") {
  const auto& ref = kernels::scalar_kernels();
  const auto variants = kernels::available_kernels();
  REQUIRE(!variants.empty());
  Rng rng(13);
  for (const auto* v : variants) {
    CAPTURE(v->name);
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      for (std::size_t m : {1, 3, 6}) {
        for (std::size_t kk : {1, 2, 5, 8}) {
          auto a = randvec(m * kk, rng), b = randvec(kk * n, rng), c0 = randvec(m * n, rng);
          for (bool acc : {false, true}) {
            auto c1 = c0, c2 = c0;
            ref.gemm(m, kk, n, a.data(), b.data(), c1.data(), acc);
            v->gemm(m, kk, n, a.data(), b.data(), c2.data(), acc);
            CHECK(same_bits(c1, c2));
          }
          auto g = randvec(m * n, rng);
          auto t1 = randvec(kk * n, rng);
          auto t2 = t1;
          ref.gemm_tn(m, kk, n, a.data(), g.data(), t1.data());
          v->gemm_tn(m, kk, n, a.data(), g.data(), t2.data());
          CHECK(same_bits(t1, t2));

          auto mat = randvec(m * n, rng);
          // Force ties so the argmax rule is exercised.
          for (std::size_t j = 0; j < n; j += 3) mat[j] = mat[(m - 1) * n + j];
          std::vector<double> mx1(n), mx2(n);
          std::vector<std::uint32_t> ag1(n), ag2(n);
          ref.column_max(m, n, mat.data(), mx1.data(), ag1.data());
          v->column_max(m, n, mat.data(), mx2.data(), ag2.data());
          CHECK(same_bits(mx1, mx2));
          CHECK(ag1 == ag2);
        }
      }
      auto x = randvec(n, rng), y1 = randvec(n, rng);
      auto y2 = y1;
      ref.axpy(n, 0.37, x.data(), y1.data());
      v->axpy(n, 0.37, x.data(), y2.data());
      CHECK(same_bits(y1, y2));

      auto r1 = randvec(n, rng);
      auto r2 = r1;
      ref.relu(n, r1.data());
      v->relu(n, r2.data());
      CHECK(same_bits(r1, r2));

      auto gr1 = randvec(n, rng);
      auto gr2 = gr1;
      ref.relu_mask(n, r1.data(), gr1.data());
      v->relu_mask(n, r1.data(), gr2.data());
      CHECK(same_bits(gr1, gr2));

      auto p1 = randvec(n, rng), grad = randvec(n, rng);
      auto p2 = p1;
      std::vector<double> acc1(n, 0.5), acc2(n, 0.5);
      ref.adagrad(n, p1.data(), grad.data(), acc1.data(), 0.01, 1e-8);
      v->adagrad(n, p2.data(), grad.data(), acc2.data(), 0.01, 1e-8);
      CHECK(same_bits(p1, p2));
      CHECK(same_bits(acc1, acc2));
    }
  }
}

TEST_CASE("variant selection by name") {
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("no-such-variant"));
  const auto variants = kernels::available_kernels();
  CHECK(kernels::select(variants.back()->name));
}
