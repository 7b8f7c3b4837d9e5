#include "kmcert/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kmcert/errors.hpp"

namespace kmcert {

namespace {

constexpr double kTieSlack = 1e-12;

void require_balanced(const ClusterGeometry& geom) {
  const auto& s = geom.sizes;
  if (!std::all_of(s.begin(), s.end(), [&](int n) { return n == s.front(); })) {
    throw NotBalanced(s);
  }
}

using RhsFn = std::function<double(const ClusterGeometry&, const PairStats&, int, int)>;

ProximityReport evaluate(ProximityMode mode, const ClusterGeometry& geom, const PairStats& pairs,
                         const RhsFn& rhs_fn) {
  const int k = geom.k();
  if (k < 2 || pairs.k != k) throw ValidationError("proximity checks need k >= 2 clusters");
  const bool sufficient = mode == ProximityMode::General || mode == ProximityMode::Balanced;

  ProximityReport r;
  r.mode = mode;
  r.slack = kTieSlack * pairs.h.maxCoeff();
  const double m = geom.dim();
  double total = 0.0;
  for (int n : geom.sizes) {
    r.cost.svd_flops_estimate += m * m * n;
    total += n;
  }
  r.cost.inner_products = (k - 1) * total;

  r.satisfied = true;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      PairMargin p;
      p.a = a;
      p.b = b;
      p.h = pairs.h(a, b);
      p.tau = pairs.tau(a, b);
      p.max_u_ab = pairs.max_u(a, b);
      p.max_u_ba = pairs.max_u(b, a);
      p.lhs = sufficient ? 0.5 * p.h - p.tau : p.h;
      p.rhs = rhs_fn(geom, pairs, a, b);
      p.margin = p.lhs - p.rhs;
      const bool ok = sufficient ? p.margin > r.slack : p.margin >= -r.slack;
      r.satisfied = r.satisfied && ok;
      r.pairs.push_back(p);
    }
  }
  return r;
}

double inv_sum(const ClusterGeometry& g, int a, int b) {
  return 1.0 / g.sizes[static_cast<std::size_t>(a)] + 1.0 / g.sizes[static_cast<std::size_t>(b)];
}

double pair_norm_sq(const ClusterGeometry& g, int a, int b) {
  return g.op_norms(a) * g.op_norms(a) + g.op_norms(b) * g.op_norms(b);
}

}  // namespace

std::string to_string(ProximityMode mode) {
  switch (mode) {
    case ProximityMode::General: return "general";
    case ProximityMode::Balanced: return "balanced";
    case ProximityMode::NecessaryGeneral: return "necessary_general";
    case ProximityMode::NecessaryBalanced: return "necessary_balanced";
  }
  return "unknown";
}

std::string to_string(AcceptVerdict verdict) {
  return verdict == AcceptVerdict::CertifiedUniqueOptimum ? "certified_unique_optimum" : "unknown";
}

ProximityReport check_proximity_general(const ClusterGeometry& geom, const PairStats& pairs) {
  return evaluate(ProximityMode::General, geom, pairs,
                  [](const ClusterGeometry& g, const PairStats&, int a, int b) {
                    return 0.5 * std::sqrt(g.op_norm_sq_sum * inv_sum(g, a, b));
                  });
}

ProximityReport check_proximity_balanced(const ClusterGeometry& geom, const PairStats& pairs) {
  require_balanced(geom);
  const double k = geom.k();
  const double n = geom.sizes.front();
  return evaluate(ProximityMode::Balanced, geom, pairs,
                  [k, n](const ClusterGeometry& g, const PairStats&, int a, int b) {
                    return 0.5 * std::sqrt((k / n) * pair_norm_sq(g, a, b));
                  });
}

ProximityReport check_necessary_general(const ClusterGeometry& geom, const PairStats& pairs) {
  const double max_norm = geom.op_norms.maxCoeff();
  return evaluate(ProximityMode::NecessaryGeneral, geom, pairs,
                  [max_norm](const ClusterGeometry& g, const PairStats& s, int a, int b) {
                    const double t = s.tau(a, b);
                    return t + std::sqrt(t * t + max_norm * max_norm * inv_sum(g, a, b));
                  });
}

ProximityReport check_necessary_balanced(const ClusterGeometry& geom, const PairStats& pairs) {
  require_balanced(geom);
  const double n = geom.sizes.front();
  return evaluate(ProximityMode::NecessaryBalanced, geom, pairs,
                  [n](const ClusterGeometry& g, const PairStats& s, int a, int b) {
                    const double t = s.tau(a, b);
                    return t + std::sqrt(t * t + pair_norm_sq(g, a, b) / n);
                  });
}

AcceptVerdict accept_answer(const Dataset& data, const Partition& part) {
  if (part.k() < 2) return AcceptVerdict::Unknown;
  const ClusterGeometry geom = compute_geometry(data, part);
  const PairStats pairs = compute_pair_stats(geom);
  return check_proximity_general(geom, pairs).satisfied ? AcceptVerdict::CertifiedUniqueOptimum
                                                        : AcceptVerdict::Unknown;
}

}  // namespace kmcert
