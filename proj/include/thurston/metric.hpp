#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/torus.hpp"

namespace thurston {

inline constexpr int kDefaultDepth = 12;
inline constexpr double kDefaultConvergenceTol = 1e-4;
inline constexpr double kDefaultClusterGap = 1e-2;

// Length-ratio profile over the depth-limited slope enumeration.
struct RatioProfile {
  TracePoint source;
  TracePoint target;
  int depth = 0;
  std::vector<Slope> slopes;
  std::vector<double> ratios;  // length(target) / length(source), aligned with slopes
};

inline RatioProfile ratio_profile(const TracePoint& x, const TracePoint& y, int depth) {
  RatioProfile out;
  out.source = x;
  out.target = y;
  out.depth = depth;
  out.slopes = enumerate_slopes(depth);
  std::vector<double> lx = slope_lengths(x, out.slopes);
  std::vector<double> ly = slope_lengths(y, out.slopes);
  out.ratios.resize(out.slopes.size());
  for (std::size_t i = 0; i < out.slopes.size(); ++i) out.ratios[i] = ly[i] / lx[i];
  return out;
}

// Depth-indexed lower bound of the Thurston distance: log of the maximal
// length ratio over the enumerated slopes, with the near-maximal slope
// cluster and a depth-doubling convergence flag.
struct DistanceEstimate {
  double value = 0.0;
  int depth = 0;
  std::vector<Slope> argmax_cluster;
  Slope argmax{1, 0};
  bool converged = false;
};

namespace detail {

inline int slope_depth(const Slope& s) {
  return static_cast<int>(std::max(std::labs(s.p), std::labs(s.q)));
}

inline DistanceEstimate estimate_from_profile(const RatioProfile& prof, double tol, double gap) {
  DistanceEstimate est;
  est.depth = prof.depth;
  int d2 = std::max(1, prof.depth / 2);
  int d4 = std::max(1, prof.depth / 4);
  double max_full = 0.0, max_half = 0.0, max_quarter = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
    double r = prof.ratios[i];
    int sd = slope_depth(prof.slopes[i]);
    if (r > max_full) {
      max_full = r;
      arg = i;
    }
    if (sd <= d2) max_half = std::max(max_half, r);
    if (sd <= d4) max_quarter = std::max(max_quarter, r);
  }
  est.value = std::log(max_full);
  est.argmax = prof.slopes[arg];
  double floor = std::max(std::abs(est.value), 1e-12);
  est.converged = (std::log(max_full) - std::log(max_half)) <= tol * floor &&
                  (std::log(max_half) - std::log(max_quarter)) <= tol * floor;
  // The cluster gap is measured on log ratios as a fraction of the distance
  // value, so short and long legs cluster consistently.
  double cutoff = est.value - gap * std::max(est.value, 0.0) - 1e-15;
  for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
    if (std::log(prof.ratios[i]) >= cutoff) est.argmax_cluster.push_back(prof.slopes[i]);
  }
  return est;
}

}  // namespace detail

inline DistanceEstimate thurston_distance(const TracePoint& x, const TracePoint& y, int depth,
                                          double tol = kDefaultConvergenceTol,
                                          double gap = kDefaultClusterGap) {
  return detail::estimate_from_profile(ratio_profile(x, y, depth), tol, gap);
}

// Finite-depth approximation of the maximally stretched lamination. Rational
// when one slope dominates by the relative gap; irrational when the
// per-depth argmax slopes walk down the Stern-Brocot tree (consecutive
// argmaxes are Farey neighbors at strictly increasing depth).
struct LaminationEstimate {
  enum class Kind { kRational, kIrrational };
  Kind kind = Kind::kRational;
  Slope slope{1, 0};               // rational kind
  std::vector<Slope> convergents;  // irrational kind
  double gap = 0.0;                // relative isolation of the argmax
};

inline LaminationEstimate stretch_lamination(const TracePoint& x, const TracePoint& y, int depth,
                                             double gap = kDefaultClusterGap) {
  if (x == y) throw InputError("stretch lamination requires distinct points");
  RatioProfile prof = ratio_profile(x, y, depth);

  double best = 0.0, second = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
    if (prof.ratios[i] > best) {
      second = best;
      best = prof.ratios[i];
      arg = i;
    } else {
      second = std::max(second, prof.ratios[i]);
    }
  }
  // Isolation of the argmax measured on log ratios relative to the distance.
  double rel = best > 1.0 && second > 0.0
                   ? (std::log(best) - std::log(second)) / std::log(best)
                   : 0.0;
  if (rel >= gap) {
    LaminationEstimate est;
    est.kind = LaminationEstimate::Kind::kRational;
    est.slope = prof.slopes[arg];
    est.gap = rel;
    return est;
  }

  // Argmax per depth stage.
  std::vector<int> stages{std::max(1, depth / 4), std::max(1, depth / 2), depth};
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
  std::vector<Slope> argmaxes;
  for (int stage : stages) {
    double m = 0.0;
    Slope s{1, 0};
    for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
      if (detail::slope_depth(prof.slopes[i]) <= stage && prof.ratios[i] > m) {
        m = prof.ratios[i];
        s = prof.slopes[i];
      }
    }
    argmaxes.push_back(s);
  }
  bool descending = argmaxes.size() >= 2;
  for (std::size_t i = 0; i + 1 < argmaxes.size(); ++i) {
    long cross = std::labs(argmaxes[i].p * argmaxes[i + 1].q - argmaxes[i].q * argmaxes[i + 1].p);
    bool deeper = detail::slope_depth(argmaxes[i + 1]) > detail::slope_depth(argmaxes[i]);
    descending = descending && cross == 1 && deeper;
  }
  if (descending) {
    LaminationEstimate est;
    est.kind = LaminationEstimate::Kind::kIrrational;
    est.convergents = argmaxes;
    est.gap = rel;
    return est;
  }
  throw AmbiguousAtDepth(depth, "argmax neither isolated nor descending");
}

// d(X,Z) + d(Z,Y) - d(X,Y) at the given depth; the envelope membership
// predicate is defect <= tol (distances add exactly along geodesics).
inline double additivity_defect(const TracePoint& x, const TracePoint& z, const TracePoint& y,
                                int depth) {
  std::vector<Slope> slopes = enumerate_slopes(depth);
  std::vector<double> lx = slope_lengths(x, slopes);
  std::vector<double> lz = slope_lengths(z, slopes);
  std::vector<double> ly = slope_lengths(y, slopes);
  double rxz = 0.0, rzy = 0.0, rxy = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    rxz = std::max(rxz, lz[i] / lx[i]);
    rzy = std::max(rzy, ly[i] / lz[i]);
    rxy = std::max(rxy, ly[i] / lx[i]);
  }
  return std::log(rxz) + std::log(rzy) - std::log(rxy);
}

// Observed depth-truncation slack of an estimate: increase from depth/2 to
// depth. Used to set adaptive membership tolerances.
inline double truncation_slack(const TracePoint& x, const TracePoint& y, int depth) {
  RatioProfile prof = ratio_profile(x, y, depth);
  int d2 = std::max(1, depth / 2);
  double max_full = 0.0, max_half = 0.0;
  for (std::size_t i = 0; i < prof.slopes.size(); ++i) {
    max_full = std::max(max_full, prof.ratios[i]);
    if (detail::slope_depth(prof.slopes[i]) <= d2) max_half = std::max(max_half, prof.ratios[i]);
  }
  return std::log(max_full) - std::log(max_half);
}

// Default membership tolerance for a triple: three times the largest
// observed slack among its pairs, floored away from zero.
inline double adaptive_membership_tol(const TracePoint& x, const TracePoint& z,
                                      const TracePoint& y, int depth) {
  double s = std::max({truncation_slack(x, z, depth), truncation_slack(z, y, depth),
                       truncation_slack(x, y, depth)});
  return std::max(3.0 * s, 1e-6);
}

// Consistency of maximally stretched laminations through an envelope member:
// the (X,Z) and (Z,Y) argmax clusters must intersect to exactly the (X,Y)
// cluster.
inline bool lamination_intersection_check(const TracePoint& x, const TracePoint& z,
                                          const TracePoint& y, int depth,
                                          double gap = kDefaultClusterGap) {
  DistanceEstimate exz = thurston_distance(x, z, depth, kDefaultConvergenceTol, gap);
  DistanceEstimate ezy = thurston_distance(z, y, depth, kDefaultConvergenceTol, gap);
  DistanceEstimate exy = thurston_distance(x, y, depth, kDefaultConvergenceTol, gap);
  if (exz.value <= 0.0 || ezy.value <= 0.0) {
    throw InputError("lamination intersection check requires Z distinct from X and Y");
  }
  std::set<Slope> cxz(exz.argmax_cluster.begin(), exz.argmax_cluster.end());
  std::set<Slope> czy(ezy.argmax_cluster.begin(), ezy.argmax_cluster.end());
  std::set<Slope> cxy(exy.argmax_cluster.begin(), exy.argmax_cluster.end());
  std::set<Slope> inter;
  std::set_intersection(cxz.begin(), cxz.end(), czy.begin(), czy.end(),
                        std::inserter(inter, inter.begin()));
  return inter == cxy;
}

// Normalized length functions e^{-t} l_alpha along an additive chain.
// Chains are validated pairwise: estimated distances must match parameter
// gaps within tol.
inline std::vector<double> normalized_length_profile(
    const std::vector<std::pair<double, TracePoint>>& chain, Slope slope, int depth, double tol) {
  if (chain.empty()) throw InputError("empty chain");
  for (std::size_t j = 0; j < chain.size(); ++j) {
    for (std::size_t k = j + 1; k < chain.size(); ++k) {
      double dt = chain[k].first - chain[j].first;
      if (dt < -tol) throw NonAdditiveChain("chain parameters are not increasing");
      double est = thurston_distance(chain[j].second, chain[k].second, depth).value;
      if (std::abs(est - dt) > tol) {
        throw NonAdditiveChain("chain is not additive: d=" + std::to_string(est) +
                               " vs dt=" + std::to_string(dt));
      }
    }
  }
  std::vector<double> out;
  out.reserve(chain.size());
  for (const auto& [t, p] : chain) {
    out.push_back(std::exp(-t) * length_of_slope(p, slope));
  }
  return out;
}

}  // namespace thurston
