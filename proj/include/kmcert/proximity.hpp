#pragma once

#include <string>
#include <vector>

#include "kmcert/geometry.hpp"

namespace kmcert {

enum class ProximityMode { General, Balanced, NecessaryGeneral, NecessaryBalanced };

std::string to_string(ProximityMode mode);

/// One unordered cluster pair a < b.
///
/// Sufficient modes report lhs = h/2 - tau. Necessary modes report lhs = h.
/// margin is always lhs - rhs.
struct PairMargin {
  int a = 0;
  int b = 0;
  double h = 0.0;
  double tau = 0.0;
  double max_u_ab = 0.0;
  double max_u_ba = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct CostCounters {
  double svd_flops_estimate = 0.0;  // sum_a m^2 n_a
  double inner_products = 0.0;      // (k - 1) N projections
};

struct ProximityReport {
  ProximityMode mode = ProximityMode::General;
  std::vector<PairMargin> pairs;
  bool satisfied = false;
  double slack = 0.0;  // absolute tie slack, 1e-12 * max h
  CostCounters cost;
};

/// h > 2 tau + sqrt(sum_l ||Xbar_l||^2 (1/n_a + 1/n_b)) for every pair.
ProximityReport check_proximity_general(const ClusterGeometry& geom, const PairStats& pairs);

/// h > 2 tau + sqrt((k/n)(||Xbar_a||^2 + ||Xbar_b||^2)) for every pair. Throws NotBalanced.
ProximityReport check_proximity_balanced(const ClusterGeometry& geom, const PairStats& pairs);

/// h >= tau + sqrt(tau^2 + max_t ||Xbar_t||^2 (1/n_a + 1/n_b)). A failure rules out
/// exact recovery by the Peng-Wei relaxation.
ProximityReport check_necessary_general(const ClusterGeometry& geom, const PairStats& pairs);

/// h >= tau + sqrt(tau^2 + (1/n)(||Xbar_a||^2 + ||Xbar_b||^2)). Throws NotBalanced.
ProximityReport check_necessary_balanced(const ClusterGeometry& geom, const PairStats& pairs);

enum class AcceptVerdict { CertifiedUniqueOptimum, Unknown };

std::string to_string(AcceptVerdict verdict);

/// Certifies `part` as the unique k-means optimum when the general proximity
/// condition holds. k = 1 is never certified.
AcceptVerdict accept_answer(const Dataset& data, const Partition& part);

}  // namespace kmcert
