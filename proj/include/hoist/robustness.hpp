#pragma once

#include "hoist/sqp.hpp"

namespace hoist {

struct RemovalReport {
  struct Collapse {
    int elem = -1;        // element that triggered the pass
    int node_a = -1, node_b = -1, kept = -1;
    int trigger = 0;      // which E_rmv set flagged it (bitmask 1|2|4|8)
  };
  std::vector<Collapse> collapses;
  std::vector<int> skipped;  // non-collapsible elements
  int n_removed_elems = 0;
};

struct UpsilonReport {
  RemovalReport removal;
  std::vector<int> straightened;   // E_ill
  std::vector<int> reinitialized;  // E_reinit
  bool modified = false;
};

// elements flagged for removal (union of the four trigger sets)
std::vector<int> detect_removal(const SimplexMesh& mesh, const RobustnessParams& rob,
                                std::vector<int>* triggers = nullptr);

// ill-conditioned elements to straighten (q >= 2 only)
std::vector<int> detect_ill(const SimplexMesh& mesh, double c4p);

// collapse-endpoint selection: more boundary constraints win, then the larger
// local solution range, then the lower node id; -1 when inadmissible
int choose_endpoint(const HoistState& state, int a, int b);

// removes all detectable problematic elements by collapsing shortest
// admissible edges; updates mesh/u/y/pm/space in place
RemovalReport remove_elements(HoistState& state, const RobustnessParams& rob);

// Persson-Peraire sensor per element (-inf for constant fields or p = 0)
Vec shock_sensor(const SimplexMesh& mesh, const DgSpace& space, const Vec& u);

// elements to re-initialize: sensor >= c5 plus face neighbors, or (forced)
// sensor >= c6 * max sensor
std::vector<int> reinit_sets(const SimplexMesh& mesh, const DgSpace& space, const Vec& u,
                             const RobustnessParams& rob, bool force);

// mean jump of the sensor scalar across the shared face of two elements
double mean_face_jump(const SimplexMesh& mesh, const DgSpace& space, const Vec& u,
                      int face_id);

// shock-aware patch-average constant state for element K
Vec reinit_value(const SimplexMesh& mesh, const DgSpace& space, const Vec& u, int K,
                 double c7);

// full Upsilon step: removal -> straightening -> re-initialization, applied
// after an accepted SQP step (k is the completed iteration index)
UpsilonReport apply_upsilon(HoistState& state, const RobustnessParams& rob, int k, int M,
                            double norm_r, bool force_reinit);

}  // namespace hoist
