#include "cfmimo/pilots.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace cfmimo {

std::vector<int> assign_uplink_pilots(const Mat& beta, int tau_up) {
  if (tau_up < 1) throw std::invalid_argument("assign_uplink_pilots: tau_up must be >= 1");
  const int m = beta.rows(), k = beta.cols();
  if (m < 1 || k < 1) throw std::invalid_argument("assign_uplink_pilots: empty beta");

  std::vector<int> strongest_ap(k, 0);
  std::vector<double> strength(k, 0.0);
  for (int u = 0; u < k; ++u) {
    int best = 0;
    for (int a = 1; a < m; ++a) {
      if (beta(a, u) > beta(best, u)) best = a;
    }
    strongest_ap[u] = best;
    strength[u] = beta(best, u);
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return strength[a] > strength[b]; });

  std::vector<int> index(k, -1);
  std::vector<int> load(tau_up, 0);
  std::vector<std::vector<int>> holders(tau_up);
  for (int u : order) {
    const int min_load = *std::min_element(load.begin(), load.end());
    int best_pilot = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int p = 0; p < tau_up; ++p) {
      if (load[p] != min_load) continue;
      double cost = 0.0;
      for (int holder : holders[p]) cost += beta(strongest_ap[u], holder);
      if (cost < best_cost) {  // ties keep the lowest pilot index
        best_cost = cost;
        best_pilot = p;
      }
    }
    index[u] = best_pilot;
    load[best_pilot] += 1;
    holders[best_pilot].push_back(u);
  }
  return index;
}

std::vector<int> assign_downlink_pilots(const std::vector<int>& up_index, int tau_dp) {
  if (tau_dp < 1) {
    throw InfeasibleAssignmentError("assign_downlink_pilots: tau_dp must be >= 1");
  }
  const int k = static_cast<int>(up_index.size());
  std::map<int, std::vector<int>> groups;  // uplink pilot -> UEs, ascending
  for (int u = 0; u < k; ++u) groups[up_index[u]].push_back(u);

  std::vector<int> dp(k, -1);
  int counter = 0;
  for (const auto& [pilot, members] : groups) {
    if (static_cast<int>(members.size()) > tau_dp) {
      throw InfeasibleAssignmentError(
          "assign_downlink_pilots: uplink pilot " + std::to_string(pilot) + " is shared by " +
          std::to_string(members.size()) + " UEs but only " + std::to_string(tau_dp) +
          " downlink pilots are available");
    }
    const int start = counter;
    for (size_t j = 0; j < members.size(); ++j) {
      dp[members[j]] = (start + static_cast<int>(j)) % tau_dp;
    }
    counter = (start + static_cast<int>(members.size())) % tau_dp;
  }
  return dp;
}

Mat gram(const std::vector<int>& indices) {
  const int k = static_cast<int>(indices.size());
  Mat g(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      g(a, b) = indices[a] == indices[b] ? 1.0 : 0.0;
    }
  }
  return g;
}

PilotBook build_pilot_book(const Mat& beta, int tau_up, int tau_dp) {
  PilotBook book;
  book.tau_up = tau_up;
  book.tau_dp = tau_dp;
  book.up_index = assign_uplink_pilots(beta, tau_up);
  book.up_gram = gram(book.up_index);
  if (tau_dp > 0) {
    book.dp_index = assign_downlink_pilots(book.up_index, tau_dp);
    book.dp_gram = gram(book.dp_index);
  } else {
    book.dp_gram = Mat::identity(beta.cols());
  }
  return book;
}

void PilotBook::check_invariants() const {
  const int k = static_cast<int>(up_index.size());
  auto fail = [](const std::string& what) { throw std::logic_error("PilotBook: " + what); };
  if (up_gram.rows() != k || up_gram.cols() != k) fail("up_gram shape");
  if (dp_gram.rows() != k || dp_gram.cols() != k) fail("dp_gram shape");
  for (int u = 0; u < k; ++u) {
    if (up_index[u] < 0 || up_index[u] >= tau_up) fail("uplink index out of range");
    if (tau_dp > 0 && (dp_index[u] < 0 || dp_index[u] >= tau_dp)) {
      fail("downlink index out of range");
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double ug = up_gram(a, b), dg = dp_gram(a, b);
      if (ug != 0.0 && ug != 1.0) fail("up_gram not 0/1");
      if (dg != 0.0 && dg != 1.0) fail("dp_gram not 0/1");
      if (ug != up_gram(b, a) || dg != dp_gram(b, a)) fail("gram not symmetric");
      if (a == b && (ug != 1.0 || dg != 1.0)) fail("gram diagonal not 1");
      // UEs sharing an uplink pilot must have orthogonal downlink pilots.
      if (tau_dp > 0 && a != b && ug == 1.0 && dg != 0.0) fail("cross-orthogonality violated");
    }
  }
}

}  // namespace cfmimo
