#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/metric.hpp"
#include "thurston/torus.hpp"

namespace thurston {

// A measured lamination supported on one slope: the desk-scale model of a
// rational point of the Thurston boundary.
struct MeasuredSlope {
  Slope slope{1, 0};
  double weight = 1.0;

  static MeasuredSlope of(Slope s, double w) {
    if (!(w > 0.0)) throw InputError("measured slope weight must be positive");
    return {s, w};
  }
};

// Lipschitz constant to the dual tree of eta, estimated over the slope
// enumeration: max over alpha of 2 w i(eta, alpha) / l_alpha(X). The factor
// two is the tree-metric convention. Nondecreasing in depth.
struct LipschitzEstimate {
  double value = 0.0;
  int depth = 0;
  Slope argmax{1, 0};
  bool stabilized = false;
};

inline LipschitzEstimate tree_lipschitz_constant(const TracePoint& x, const MeasuredSlope& eta,
                                                 int depth,
                                                 double tol = kDefaultConvergenceTol) {
  if (!(eta.weight > 0.0)) throw InputError("measured slope weight must be positive");
  std::vector<Slope> slopes = enumerate_slopes(depth);
  std::vector<double> lens = slope_lengths(x, slopes);
  int d2 = std::max(1, depth / 2);
  int d4 = std::max(1, depth / 4);
  LipschitzEstimate est;
  est.depth = depth;
  // The weight factors out of the sup, keeping the estimate exactly
  // degree-one homogeneous in the measure.
  double unit_max = 0.0, max_half = 0.0, max_quarter = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    double v = 2.0 * intersection_number(eta.slope, slopes[i]) / lens[i];
    int sd = detail::slope_depth(slopes[i]);
    if (v > unit_max) {
      unit_max = v;
      est.argmax = slopes[i];
    }
    if (sd <= d2) max_half = std::max(max_half, v);
    if (sd <= d4) max_quarter = std::max(max_quarter, v);
  }
  est.value = eta.weight * unit_max;
  est.stabilized = unit_max - max_half <= tol * unit_max &&
                   max_half - max_quarter <= tol * std::max(max_half, 1e-300);
  return est;
}

// Representative scaled to L(X, eta_X) = 1.
struct NormalizedRep {
  MeasuredSlope measured;
  TracePoint base;
};

inline NormalizedRep normalize_rep(const TracePoint& x, const MeasuredSlope& eta, int depth,
                                   double tol = kDefaultConvergenceTol) {
  LipschitzEstimate est = tree_lipschitz_constant(x, eta, depth, tol);
  if (!est.stabilized) {
    throw AmbiguousAtDepth(depth, "L(X,eta) did not stabilize; value=" +
                                      std::to_string(est.value) + " at slope " +
                                      est.argmax.str());
  }
  return {MeasuredSlope::of(eta.slope, eta.weight / est.value), x};
}

// Outcome of the boundary accumulation criterion, with the evidence that
// decided it.
struct AccumulationEvidence {
  bool holds = false;
  bool cluster_contained = false;
  bool finite = false;
  bool attained_on_cluster = false;
  double max_ratio = 0.0;
  Slope max_at{1, 0};
  std::string reason;
};

// Does mu lie in the closure of the envelope from X toward eta? Conditions,
// at desk scale with rational boundary classes:
//   (i)  the stretch cluster of eta is contained in that of mu (here: the
//        supporting slopes agree),
//   (ii) max over enumerated alpha of i(eta_X, alpha) / i(mu_X, alpha) is
//        finite and attained, within gap, next to the eta cluster;
//        operationally at a Farey neighbor of eta's supporting slope.
inline AccumulationEvidence accumulation_criterion(const TracePoint& x, const MeasuredSlope& eta,
                                                   const MeasuredSlope& mu, int depth,
                                                   double gap = kDefaultClusterGap) {
  AccumulationEvidence ev;
  ev.cluster_contained = eta.slope == mu.slope;

  NormalizedRep eta_x = normalize_rep(x, eta, depth);
  NormalizedRep mu_x = normalize_rep(x, mu, depth);

  ev.finite = true;
  double near_cluster_best = 0.0;
  for (const Slope& alpha : enumerate_slopes(depth)) {
    long ie = intersection_number(eta.slope, alpha);
    long im = intersection_number(mu.slope, alpha);
    double num = eta_x.measured.weight * ie;
    double den = mu_x.measured.weight * im;
    if (ie == 0 && im == 0) continue;  // alpha is the common supporting slope
    if (im == 0) {
      ev.finite = false;
      ev.max_at = alpha;
      ev.reason = "i(mu_X, " + alpha.str() + ") = 0 with i(eta_X, .) > 0";
      break;
    }
    double ratio = num / den;
    if (ratio > ev.max_ratio) {
      ev.max_ratio = ratio;
      ev.max_at = alpha;
    }
    if (std::labs(intersection_number(eta.slope, alpha)) == 1) {
      near_cluster_best = std::max(near_cluster_best, ratio);
    }
  }
  if (ev.finite) {
    ev.attained_on_cluster = near_cluster_best >= ev.max_ratio * (1.0 - gap);
    if (!ev.attained_on_cluster) {
      ev.reason = "max ratio " + std::to_string(ev.max_ratio) + " at " + ev.max_at.str() +
                  " is not attained near the eta cluster";
    }
  }
  ev.holds = ev.cluster_contained && ev.finite && ev.attained_on_cluster;
  if (ev.holds) ev.reason = "criterion satisfied";
  if (!ev.cluster_contained && ev.reason.empty()) {
    ev.reason = "stretch cluster of eta not contained in that of mu";
  }
  return ev;
}

}  // namespace thurston
