#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

using namespace cfmimo;

namespace {

Mat random_beta(int m, int k, uint64_t seed) {
  Rng rng(seed);
  Mat beta(m, k);
  for (int a = 0; a < m; ++a) {
    for (int u = 0; u < k; ++u) beta(a, u) = std::pow(10.0, rng.uniform(-10.0, -6.0));
  }
  return beta;
}

// Independent re-run of the documented greedy rule, written directly from
// its description rather than sharing code with the implementation.
std::vector<int> greedy_oracle(const Mat& beta, int tau_up) {
  const int m = beta.rows(), k = beta.cols();
  std::vector<int> best_ap(k), order(k);
  std::vector<double> strength(k);
  for (int u = 0; u < k; ++u) {
    int arg = 0;
    for (int a = 0; a < m; ++a) {
      if (beta(a, u) > beta(arg, u)) arg = a;
    }
    best_ap[u] = arg;
    strength[u] = beta(arg, u);
  }
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return strength[a] > strength[b]; });
  std::vector<int> assignment(k, -1);
  std::vector<std::vector<int>> members(tau_up);
  for (int u : order) {
    size_t min_sz = members[0].size();
    for (const auto& g : members) min_sz = std::min(min_sz, g.size());
    int pick = -1;
    double best = 1e300;
    for (int p = 0; p < tau_up; ++p) {
      if (members[p].size() != min_sz) continue;
      double cost = 0.0;
      for (int v : members[p]) cost += beta(best_ap[u], v);
      if (cost < best) {
        best = cost;
        pick = p;
      }
    }
    assignment[u] = pick;
    members[pick].push_back(u);
  }
  return assignment;
}

}  // namespace

TEST_CASE("uplink pilots: orthogonal regime") {
  const Mat beta = random_beta(10, 4, 1);
  const auto idx = assign_uplink_pilots(beta, 4);
  std::vector<int> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("uplink pilots: balanced reuse and greedy-oracle agreement") {
  const Mat beta = random_beta(50, 40, 2);
  const auto idx = assign_uplink_pilots(beta, 10);
  std::map<int, int> counts;
  for (int p : idx) counts[p]++;
  REQUIRE(counts.size() == 10);
  for (const auto& [p, c] : counts) CHECK(c == 4);
  CHECK(idx == greedy_oracle(beta, 10));
}

TEST_CASE("uplink pilots: single pilot shared") {
  const Mat beta = random_beta(3, 2, 3);
  const auto idx = assign_uplink_pilots(beta, 1);
  CHECK(idx == std::vector<int>{0, 0});
}

TEST_CASE("downlink pilots satisfy cross-orthogonality") {
  // Four UEs on one uplink pilot get four distinct downlink pilots.
  const std::vector<int> up{0, 0, 0, 0};
  const auto dp = assign_downlink_pilots(up, 4);
  std::vector<int> sorted = dp;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3});

  // Balanced groups of four: shared uplink pilot implies orthogonal
  // downlink pilots, exhaustively over all pairs.
  const Mat beta = random_beta(50, 40, 4);
  const auto up40 = assign_uplink_pilots(beta, 10);
  const auto dp40 = assign_downlink_pilots(up40, 10);
  for (int a = 0; a < 40; ++a) {
    for (int b = 0; b < 40; ++b) {
      if (a != b && up40[a] == up40[b]) CHECK(dp40[a] != dp40[b]);
    }
  }

  CHECK_THROWS_AS(assign_downlink_pilots({0, 0}, 1), InfeasibleAssignmentError);
}

TEST_CASE("gram matrix") {
  const Mat id = gram({0, 1, 2});
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(id(a, b) == (a == b ? 1.0 : 0.0));
  }
  const Mat ones = gram({5, 5, 5});
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(ones(a, b) == 1.0);
  }
  const Mat mixed = gram({0, 0, 1});
  CHECK(mixed(0, 1) == 1.0);
  CHECK(mixed(0, 2) == 0.0);
  CHECK(mixed(2, 2) == 1.0);
}

TEST_CASE("pilot book invariants over random instances") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Mat beta = random_beta(25, 8, 100 + seed);
    const PilotBook book = build_pilot_book(beta, 4, 4);
    book.check_invariants();
    // With tau_up >= K the uplink Gram is the identity.
    const PilotBook ortho = build_pilot_book(beta, 8, 1);
    ortho.check_invariants();
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) CHECK(ortho.up_gram(a, b) == (a == b ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("statistical-csi-only book") {
  const Mat beta = random_beta(25, 8, 9);
  const PilotBook book = build_pilot_book(beta, 4, 0);
  CHECK(book.tau_dp == 0);
  CHECK(book.dp_index.empty());
  CHECK(book.dp_gram.rows() == 8);
  book.check_invariants();
}
