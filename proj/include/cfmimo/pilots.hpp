#ifndef CFMIMO_PILOTS_HPP
#define CFMIMO_PILOTS_HPP

#include <stdexcept>
#include <vector>

#include "cfmimo/matrix.hpp"

namespace cfmimo {

// Thrown when the downlink pilot budget cannot satisfy cross-orthogonality.
class InfeasibleAssignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pilot assignments plus the pairwise squared inner products the SINR
// formulas consume. Pilots are orthonormal sequences indexed into a size-tau
// identity-based set, so the Gram entries are exactly 0 or 1.
struct PilotBook {
  int tau_up = 0;
  int tau_dp = 0;                // 0 means a statistical-CSI-only frame
  std::vector<int> up_index;     // per UE, in [0, tau_up)
  std::vector<int> dp_index;     // per UE, in [0, tau_dp); empty when tau_dp == 0
  Mat up_gram;                   // K x K, 0/1, unit diagonal
  Mat dp_gram;                   // K x K; identity when tau_dp == 0

  // Throws std::logic_error if cross-orthogonality or the Gram structure is
  // violated; exercised by the selftest suite.
  void check_invariants() const;
};

// Greedy contamination-balancing assignment. UEs are processed in decreasing
// order of max_m beta(m,k); each UE takes, among the pilots with minimum
// current multiplicity, the one minimizing the summed fading of its existing
// holders seen from the UE's strongest AP. Ties break to the lowest index.
// With K <= tau_up every UE gets a distinct pilot.
std::vector<int> assign_uplink_pilots(const Mat& beta, int tau_up);

// Downlink pilots: UEs sharing an uplink pilot get pairwise distinct
// downlink indices; a single round-robin counter runs across groups so the
// downlink pilots are reused evenly. Throws InfeasibleAssignmentError when
// an uplink group exceeds tau_dp.
std::vector<int> assign_downlink_pilots(const std::vector<int>& up_index, int tau_dp);

// Symmetric 0/1 matrix with entry 1 iff the two UEs share a pilot index.
Mat gram(const std::vector<int>& indices);

PilotBook build_pilot_book(const Mat& beta, int tau_up, int tau_dp);

}  // namespace cfmimo

#endif
