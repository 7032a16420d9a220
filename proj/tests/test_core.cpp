#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "depbench/core.hpp"
#include "depbench/rng.hpp"

using namespace depbench;
using core::Sample;

namespace {

Sample random_sample(int n, std::uint64_t seed) {
  rng::Xoshiro256 gen(seed);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = gen.next_double();
    ys[i] = gen.next_double();
  }
  return Sample(std::move(xs), std::move(ys));
}

core::ContingencyTable random_table(int k, int l, std::uint64_t seed) {
  rng::Xoshiro256 gen(seed);
  core::ContingencyTable t;
  t.k = k;
  t.l = l;
  t.counts.assign(static_cast<std::size_t>(k) * l, 0);
  for (auto& c : t.counts) c = static_cast<int>(gen.below(20));
  t.total = 0;
  for (int c : t.counts) t.total += c;
  if (t.total == 0) {
    t.counts[0] = 1;
    t.total = 1;
  }
  return t;
}

}  // namespace

TEST_CASE("sample construction validates") {
  CHECK_THROWS_AS(Sample({1.0}, {2.0}), Error);
  CHECK_THROWS_AS(Sample({1.0, 2.0}, {2.0}), Error);
  CHECK_THROWS_AS(Sample({1.0, std::nan("")}, {2.0, 3.0}), Error);
  CHECK_NOTHROW(Sample({1.0, 2.0}, {3.0, 4.0}));
}

TEST_CASE("rank transform orders values") {
  Sample s({3, 1, 2}, {0, 1, 2});
  auto r = core::rank_transform(s);
  CHECK(r.x_order == std::vector<int>{1, 2, 0});
}

TEST_CASE("rank transform keeps tied values in original order") {
  Sample all_equal({5, 5, 5}, {0, 1, 2});
  CHECK(core::rank_transform(all_equal).x_order == std::vector<int>{0, 1, 2});
  Sample some_equal({2, 1, 2}, {0, 1, 2});
  CHECK(core::rank_transform(some_equal).x_order == std::vector<int>{1, 0, 2});
}

TEST_CASE("jitter policy is deterministic given a seed") {
  Sample s({1, 1, 1, 2, 2}, {5, 4, 3, 2, 1});
  auto a = core::rank_transform(s, core::TiePolicy::jitter, 9);
  auto b = core::rank_transform(s, core::TiePolicy::jitter, 9);
  CHECK(a.x_order == b.x_order);
  // jitter permits cuts everywhere
  CHECK(std::count(a.x_cut_allowed.begin(), a.x_cut_allowed.end(), 0) == 0);
}

TEST_CASE("equipartition examples") {
  CHECK(core::equipartition(6, 2) == std::vector<int>{3});
  SECTION("n=7 parts=2 splits 3|4 under the floor rule") {
    auto cuts = core::equipartition(7, 2);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0] == 3);
  }
  SECTION("n=10 parts=5 gives five cells of two") {
    auto cuts = core::equipartition(10, 5);
    CHECK(cuts == std::vector<int>{2, 4, 6, 8});
  }
  CHECK_THROWS_AS(core::equipartition(3, 4), Error);
  CHECK_THROWS_AS(core::equipartition(5, 1), Error);
}

TEST_CASE("equipartition occupancies differ by at most one") {
  for (int n : {5, 17, 100, 101}) {
    for (int parts = 2; parts <= std::min(n, 12); ++parts) {
      auto cuts = core::equipartition(n, parts);
      std::vector<int> sizes;
      int prev = 0;
      for (int c : cuts) {
        sizes.push_back(c - prev);
        prev = c;
      }
      sizes.push_back(n - prev);
      auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("contingency on the diagonal median grid") {
  Sample s({0, 1, 2, 3}, {0, 1, 2, 3});
  auto ranked = core::rank_transform(s);
  core::GridPartition grid({2}, {2}, 4);
  auto t = core::contingency(ranked, grid);
  CHECK(t.at(0, 0) == 2);
  CHECK(t.at(1, 1) == 2);
  CHECK(t.at(0, 1) == 0);
  CHECK(t.at(1, 0) == 0);
}

TEST_CASE("contingency matches per-point classification on random data") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = random_sample(8, seed);
    auto ranked = core::rank_transform(s);
    core::GridPartition grid({2, 5}, {4}, 8);
    auto t = core::contingency(ranked, grid);

    // independent oracle: classify each point directly from its rank
    std::vector<int> expect(static_cast<std::size_t>(t.k) * t.l, 0);
    for (int i = 0; i < 8; ++i) {
      int xr = ranked.x_rank_of[i];
      int col = xr < 2 ? 0 : (xr < 5 ? 1 : 2);
      int yr = ranked.y_rank_of[i];
      int row = yr < 4 ? 0 : 1;
      ++expect[row * t.k + col];
    }
    CHECK(t.counts == expect);
    int total = 0;
    for (int c : t.counts) total += c;
    CHECK(total == 8);
  }
}

TEST_CASE("mutual information on canonical tables") {
  core::ContingencyTable uniform{2, 2, 100, {25, 25, 25, 25}};
  CHECK(core::mutual_information(uniform) == Catch::Approx(0.0).margin(1e-15));

  core::ContingencyTable diag{2, 2, 100, {50, 0, 0, 50}};
  CHECK(core::mutual_information(diag) ==
        Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mutual information matches the direct formula") {
  // [[4,1],[1,4]]: evaluate sum p log(p/(px py)) independently
  core::ContingencyTable t{2, 2, 10, {4, 1, 1, 4}};
  double expected = 0.0;
  double cells[2][2] = {{0.4, 0.1}, {0.1, 0.4}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      expected += cells[r][c] * std::log(cells[r][c] / (0.5 * 0.5));
  CHECK(core::mutual_information(t) == Catch::Approx(expected).epsilon(1e-13));
  CHECK(expected == Catch::Approx(0.19274475).epsilon(1e-7));
}

TEST_CASE("mutual information bounds hold on random tables") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    int k = 2 + static_cast<int>(seed % 4);
    int l = 2 + static_cast<int>((seed / 4) % 4);
    auto t = random_table(k, l, seed);
    double mi = core::mutual_information(t);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::log(static_cast<double>(std::min(k, l))) + 1e-12);
  }
}

TEST_CASE("mutual information is invariant under row and column permutations") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto t = random_table(3, 4, seed);
    double base = core::mutual_information(t);

    core::ContingencyTable swapped_rows = t;
    for (int c = 0; c < t.k; ++c)
      std::swap(swapped_rows.counts[0 * t.k + c], swapped_rows.counts[2 * t.k + c]);
    CHECK(core::mutual_information(swapped_rows) == Catch::Approx(base).margin(1e-14));

    core::ContingencyTable swapped_cols = t;
    for (int r = 0; r < t.l; ++r)
      std::swap(swapped_cols.counts[r * t.k + 0], swapped_cols.counts[r * t.k + 1]);
    CHECK(core::mutual_information(swapped_cols) == Catch::Approx(base).margin(1e-14));
  }
}

TEST_CASE("rank pipeline is invariant under strictly increasing transforms") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = random_sample(40, seed);
    std::vector<double> tx(s.xs), ty(s.ys);
    for (auto& v : tx) v = std::exp(v);
    for (auto& v : ty) v = v * v * v;
    Sample transformed(std::move(tx), std::move(ty));

    auto ra = core::rank_transform(s);
    auto rb = core::rank_transform(transformed);
    REQUIRE(ra.x_order == rb.x_order);
    REQUIRE(ra.y_order == rb.y_order);

    core::GridPartition grid({10, 20, 30}, {13, 26}, 40);
    double ma = core::mutual_information(core::contingency(ra, grid));
    double mb = core::mutual_information(core::contingency(rb, grid));
    CHECK(ma == mb);  // identical ranks, identical arithmetic
  }
}
