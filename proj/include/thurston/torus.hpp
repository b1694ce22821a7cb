#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thurston/errors.hpp"

namespace thurston {

// Hyperbolic structure on the once-punctured torus in trace coordinates:
// x = tr(A), y = tr(B), z = tr(AB) for a generating pair, on the cusped
// relation x^2 + y^2 + z^2 = xyz (commutator trace -2).
struct TracePoint {
  double x = 3.0;
  double y = 3.0;
  double z = 3.0;

  static constexpr double kRelationTol = 1e-9;

  double relation_residual() const { return x * x + y * y + z * z - x * y * z; }

  bool valid() const {
    return x > 2.0 && y > 2.0 && z > 2.0 &&
           std::abs(relation_residual()) <= kRelationTol * (x * y * z);
  }

  static TracePoint create(double x, double y, double z) {
    TracePoint p{x, y, z};
    if (!p.valid()) {
      throw InputError("not a valid cusped-torus trace point: (" + std::to_string(x) + "," +
                       std::to_string(y) + "," + std::to_string(z) + ")");
    }
    return p;
  }

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

enum class MarkovRoot { kSmaller, kLarger };

inline double markov_discriminant(double x, double y) {
  return x * x * y * y - 4.0 * (x * x + y * y);
}

// Completes (x, y) to a trace point by solving z^2 - xyz + x^2 + y^2 = 0.
inline TracePoint markov_complete(double x, double y, MarkovRoot root) {
  if (!(x > 2.0) || !(y > 2.0)) throw InputError("markov_complete requires x, y > 2");
  double disc = markov_discriminant(x, y);
  if (disc < 0.0) {
    throw NoSuchPoint("no real completion for (" + std::to_string(x) + "," + std::to_string(y) +
                      "): negative discriminant");
  }
  double sq = std::sqrt(disc);
  double z = root == MarkovRoot::kLarger ? (x * y + sq) / 2.0 : (x * y - sq) / 2.0;
  if (!(z > 2.0)) {
    throw NoSuchPoint("selected completion root is not > 2");
  }
  return TracePoint{x, y, z};
}

enum class TraceCoord { kX, kY, kZ };

// Replaces one coordinate c by (product of the other two) - c. Preserves the
// Markov relation exactly.
inline TracePoint vieta_move(const TracePoint& p, TraceCoord coord) {
  TracePoint q = p;
  switch (coord) {
    case TraceCoord::kX: q.x = p.y * p.z - p.x; break;
    case TraceCoord::kY: q.y = p.x * p.z - p.y; break;
    case TraceCoord::kZ: q.z = p.x * p.y - p.z; break;
  }
  if (!(q.x > 2.0 && q.y > 2.0 && q.z > 2.0)) {
    throw NoSuchPoint("vieta move left the trace domain");
  }
  return q;
}

// Isotopy class of a simple closed curve: a coprime slope (p, q), normalized
// to q >= 0 and (1, 0) when q == 0.
struct Slope {
  long p = 1;
  long q = 0;

  static Slope of(long p, long q) {
    if (p == 0 && q == 0) throw InputError("slope (0,0) is not a curve");
    long g = std::gcd(std::abs(p), std::abs(q));
    if (g != 1) {
      throw InputError("slope (" + std::to_string(p) + "," + std::to_string(q) +
                       ") is not coprime");
    }
    if (q < 0) {
      p = -p;
      q = -q;
    }
    if (q == 0) p = 1;
    return Slope{p, q};
  }

  std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }

  friend auto operator<=>(const Slope&, const Slope&) = default;
};

inline long intersection_number(Slope a, Slope b) {
  return std::abs(a.p * b.q - a.q * b.p);
}

// All normalized coprime slopes with max(|p|, q) <= depth, ordered by (q, p).
inline std::vector<Slope> enumerate_slopes(int depth) {
  if (depth < 1) throw InputError("enumeration depth must be >= 1");
  std::vector<Slope> out;
  out.push_back(Slope{1, 0});
  for (long q = 1; q <= depth; ++q) {
    for (long p = -depth; p <= depth; ++p) {
      if (std::gcd(std::abs(p), q) == 1) out.push_back(Slope{p, q});
    }
  }
  return out;
}

namespace detail {

// Stern-Brocot parents of a coprime pair in the positive cone. Returns
// ((u, v), (p-u, q-v)) with |cross| = 1; their difference is (a sign flip
// of) the common ancestor, again in the positive cone.
inline std::pair<std::pair<long, long>, std::pair<long, long>> farey_parents(long p, long q) {
  if (p == 1) return {{1, q - 1}, {0, 1}};
  if (q == 1) return {{p - 1, 1}, {1, 0}};
  // u = q^{-1} mod p via extended gcd.
  long r0 = p, r1 = q % p;
  long t0 = 0, t1 = 1;
  while (r1 != 0) {
    long k = r0 / r1;
    long r2 = r0 - k * r1;
    long t2 = t0 - k * t1;
    r0 = r1;
    r1 = r2;
    t0 = t1;
    t1 = t2;
  }
  long u = ((t0 % p) + p) % p;
  long v = (u * q - 1) / p;
  return {{u, v}, {p - u, q - v}};
}

// Trace of the positive-cone slope (p, q) by the Fricke recursion
// tr(m1 + m2) = tr(m1) tr(m2) - tr(m1 - m2) over Stern-Brocot parents,
// with bases tr(1,0) = bx, tr(0,1) = by, tr(1,1) = bz. Memoized; iterative
// so deep thin slopes cannot blow the stack.
class PositiveTraceContext {
 public:
  PositiveTraceContext(double bx, double by, double bz) {
    memo_[{1, 0}] = bx;
    memo_[{0, 1}] = by;
    memo_[{1, 1}] = bz;
  }

  double trace(long p, long q) {
    std::vector<std::pair<long, long>> stack{{p, q}};
    while (!stack.empty()) {
      auto [tp, tq] = stack.back();
      if (memo_.count({tp, tq})) {
        stack.pop_back();
        continue;
      }
      auto [l, r] = farey_parents(tp, tq);
      long dp = l.first - r.first, dq = l.second - r.second;
      if (dp <= 0 && dq <= 0) {
        dp = -dp;
        dq = -dq;
      }
      if (dp < 0 || dq < 0) {
        throw ContractViolation("farey parent difference left the positive cone");
      }
      auto ml = memo_.find(l), mr = memo_.find(r), md = memo_.find({dp, dq});
      if (ml != memo_.end() && mr != memo_.end() && md != memo_.end()) {
        memo_[{tp, tq}] = ml->second * mr->second - md->second;
        stack.pop_back();
      } else {
        if (md == memo_.end()) stack.push_back({dp, dq});
        if (mr == memo_.end()) stack.push_back(r);
        if (ml == memo_.end()) stack.push_back(l);
      }
    }
    return memo_.at({p, q});
  }

 private:
  std::map<std::pair<long, long>, double> memo_;
};

}  // namespace detail

// Memoizing trace/length evaluator for one trace point. Not shared between
// threads; grid code builds one per cell.
class TraceEvaluator {
 public:
  explicit TraceEvaluator(const TracePoint& p)
      : point_(p),
        main_(p.x, p.y, p.z),
        reflected_(p.x, p.y, p.x * p.y - p.z) {}

  const TracePoint& point() const { return point_; }

  // Negative-p slopes evaluate through the reflected marking (z -> xy - z),
  // the trace-coordinate image of p -> -p.
  double trace(Slope s) {
    if (s.q == 0) return point_.x;
    if (s.p >= 0) return main_.trace(s.p, s.q);
    return reflected_.trace(-s.p, s.q);
  }

  double length(Slope s) {
    double t = trace(s);
    if (!(t > 2.0)) {
      throw InputError("non-loxodromic trace " + std::to_string(t) + " at slope " + s.str());
    }
    return 2.0 * std::acosh(t / 2.0);
  }

  std::vector<double> lengths(std::span<const Slope> slopes) {
    std::vector<double> out;
    out.reserve(slopes.size());
    for (const Slope& s : slopes) out.push_back(length(s));
    return out;
  }

 private:
  TracePoint point_;
  detail::PositiveTraceContext main_;
  detail::PositiveTraceContext reflected_;
};

inline double trace_of_slope(const TracePoint& p, Slope s) {
  return TraceEvaluator(p).trace(s);
}

// Hyperbolic length of the geodesic representative: 2 arccosh(trace / 2).
inline double length_of_slope(const TracePoint& p, Slope s) {
  return TraceEvaluator(p).length(s);
}

inline std::vector<double> slope_lengths(const TracePoint& p, std::span<const Slope> slopes) {
  return TraceEvaluator(p).lengths(slopes);
}

// Mapping-class helpers used by the equivariance checks: each pairs a
// trace-coordinate move with its integral action on slopes.
//
// The z Vieta move corresponds to reflecting slopes, (p,q) -> (-p,q); the
// x<->y coordinate swap corresponds to transposing, (p,q) -> (q,p). Both
// preserve the depth-limited slope ball.
inline TracePoint reflect_point(const TracePoint& p) {
  return vieta_move(p, TraceCoord::kZ);
}
inline Slope reflect_slope(Slope s) { return Slope::of(-s.p, s.q); }

inline TracePoint swap_xy_point(const TracePoint& p) { return TracePoint{p.y, p.x, p.z}; }
inline Slope swap_slope(Slope s) { return Slope::of(s.q, s.p); }

// Dehn twist along (1,0): slopes shear by (p,q) -> (p+q, q).
inline TracePoint twist_x_point(const TracePoint& p) {
  TracePoint q{p.x, p.z, p.x * p.z - p.y};
  if (!q.valid()) throw NoSuchPoint("twist left the trace domain");
  return q;
}
inline Slope twist_x_slope(Slope s) { return Slope::of(s.p + s.q, s.q); }

// Dehn twist along (0,1): slopes shear by (p,q) -> (p, p+q).
inline TracePoint twist_y_point(const TracePoint& p) {
  TracePoint q{p.z, p.y, p.y * p.z - p.x};
  if (!q.valid()) throw NoSuchPoint("twist left the trace domain");
  return q;
}
inline Slope twist_y_slope(Slope s) { return Slope::of(s.p, s.p + s.q); }

inline TracePoint twist_x_point_inv(const TracePoint& p) {
  TracePoint q{p.x, p.x * p.y - p.z, p.y};
  if (!q.valid()) throw NoSuchPoint("twist left the trace domain");
  return q;
}
inline Slope twist_x_slope_inv(Slope s) { return Slope::of(s.p - s.q, s.q); }

inline TracePoint twist_y_point_inv(const TracePoint& p) {
  TracePoint q{p.x * p.y - p.z, p.y, p.x};
  if (!q.valid()) throw NoSuchPoint("twist left the trace domain");
  return q;
}
inline Slope twist_y_slope_inv(Slope s) { return Slope::of(s.p, s.q - s.p); }

}  // namespace thurston
