#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "thurston/config.hpp"
#include "thurston/errors.hpp"
#include "thurston/metric.hpp"
#include "thurston/torus.hpp"

namespace thurston {

// Rectangular (x, y) parameter window completed to trace points by a fixed
// Markov root. Grid nodes that admit no completion are out-of-domain.
struct Chart {
  double x0 = 2.5, x1 = 6.0;
  double y0 = 2.5, y1 = 6.0;
  int res_x = 50, res_y = 50;
  MarkovRoot root = MarkovRoot::kSmaller;

  void validate() const {
    if (!(x1 > x0) || !(y1 > y0)) throw InputError("chart rectangle is empty");
    if (res_x < 2 || res_y < 2) throw InputError("chart resolution must be >= 2 per axis");
  }

  double x_at(int i) const { return x0 + (x1 - x0) * i / (res_x - 1); }
  double y_at(int j) const { return y0 + (y1 - y0) * j / (res_y - 1); }
  double dx() const { return (x1 - x0) / (res_x - 1); }
  double dy() const { return (y1 - y0) / (res_y - 1); }

  bool contains(double x, double y) const {
    return x >= x0 - 1e-12 && x <= x1 + 1e-12 && y >= y0 - 1e-12 && y <= y1 + 1e-12;
  }

  int nearest_index(double x, double y) const {
    int i = static_cast<int>(std::lround((x - x0) / dx()));
    int j = static_cast<int>(std::lround((y - y0) / dy()));
    i = std::clamp(i, 0, res_x - 1);
    j = std::clamp(j, 0, res_y - 1);
    return j * res_x + i;
  }
};

struct GridCell {
  double x = 0.0, y = 0.0;
  bool in_domain = false;
  TracePoint point;
  double defect = std::numeric_limits<double>::quiet_NaN();
  double dist_from_x = std::numeric_limits<double>::quiet_NaN();
  double dist_to_y = std::numeric_limits<double>::quiet_NaN();
  bool member = false;
};

// Membership grid of the envelope between X and Y under the additivity
// predicate d(X,Z) + d(Z,Y) - d(X,Y) <= tol.
struct EnvelopeSample {
  TracePoint x_point;
  TracePoint y_point;
  Chart chart;
  double tol = 0.0;
  int depth = 0;
  double dist_xy = 0.0;
  int x_cell = -1;
  int y_cell = -1;
  std::vector<GridCell> cells;

  const GridCell& cell(int i, int j) const { return cells[j * chart.res_x + i]; }
  int res_x() const { return chart.res_x; }
  int res_y() const { return chart.res_y; }

  std::vector<int> member_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].member) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

// tol <= 0 selects the adaptive default: 3x the observed truncation slack of
// the endpoint pair.
inline EnvelopeSample sample_envelope(const TracePoint& x, const TracePoint& y, const Chart& chart,
                                      double tol, int depth, int threads = 0) {
  chart.validate();
  if (!chart.contains(x.x, x.y) || !chart.contains(y.x, y.y)) {
    throw InputError("chart must contain both endpoints");
  }

  EnvelopeSample sample;
  sample.x_point = x;
  sample.y_point = y;
  sample.chart = chart;
  sample.depth = depth;

  std::vector<Slope> slopes = enumerate_slopes(depth);
  std::vector<double> lx = slope_lengths(x, slopes);
  std::vector<double> ly = slope_lengths(y, slopes);
  double rxy = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) rxy = std::max(rxy, ly[i] / lx[i]);
  sample.dist_xy = std::log(rxy);
  if (!(sample.dist_xy > 0.0)) throw InputError("envelope endpoints must be distinct");

  sample.tol = tol > 0.0 ? tol : std::max(3.0 * truncation_slack(x, y, depth), 1e-6);

  std::size_t n = static_cast<std::size_t>(chart.res_x) * chart.res_y;
  sample.cells.resize(n);
  parallel_for(n, threads, [&](std::size_t idx) {
    GridCell& cell = sample.cells[idx];
    int i = static_cast<int>(idx) % chart.res_x;
    int j = static_cast<int>(idx) / chart.res_x;
    cell.x = chart.x_at(i);
    cell.y = chart.y_at(j);
    TracePoint z;
    try {
      z = markov_complete(cell.x, cell.y, chart.root);
    } catch (const NoSuchPoint&) {
      return;  // out of domain
    } catch (const InputError&) {
      return;
    }
    cell.in_domain = true;
    cell.point = z;
    std::vector<double> lz = TraceEvaluator(z).lengths(slopes);
    double rxz = 0.0, rzy = 0.0;
    for (std::size_t k = 0; k < slopes.size(); ++k) {
      rxz = std::max(rxz, lz[k] / lx[k]);
      rzy = std::max(rzy, ly[k] / lz[k]);
    }
    cell.dist_from_x = std::log(rxz);
    cell.dist_to_y = std::log(rzy);
    cell.defect = cell.dist_from_x + cell.dist_to_y - sample.dist_xy;
    cell.member = cell.defect <= sample.tol;
  });

  sample.x_cell = chart.nearest_index(x.x, x.y);
  sample.y_cell = chart.nearest_index(y.x, y.y);
  return sample;
}

enum class BoundaryLabel {
  kNone,         // non-member or out of domain
  kInterior,     // member, not adjacent to the complement
  kInteriorAdj,  // member on the frontier without one-sided evidence
  kLbd,
  kRbd,
  kBd,
  kUnresolved,
};

inline std::string label_name(BoundaryLabel l) {
  switch (l) {
    case BoundaryLabel::kNone: return "NONE";
    case BoundaryLabel::kInterior: return "INTERIOR";
    case BoundaryLabel::kInteriorAdj: return "INTERIOR-ADJ";
    case BoundaryLabel::kLbd: return "LBD";
    case BoundaryLabel::kRbd: return "RBD";
    case BoundaryLabel::kBd: return "BD";
    case BoundaryLabel::kUnresolved: return "UNRESOLVED";
  }
  return "?";
}

// Argmax clusters a frontier cell was judged by: the slopes past the base
// cluster on each side.
struct CellEvidence {
  std::vector<Slope> right_extra;  // cluster(Z,Y) minus cluster(X,Y)
  std::vector<Slope> left_extra;   // cluster(X,Z) minus cluster(X,Y)
};

// Extendability evidence per frontier cell: a member Z is right-bounded when
// the (Z,Y) argmax cluster strictly grows past the (X,Y) cluster, and
// left-bounded when the (X,Z) cluster does. Cells whose clusters drop the
// baseline are left unresolved and never feed corner counting.
struct BoundaryClassification {
  std::vector<BoundaryLabel> labels;
  std::vector<Slope> base_cluster;
  std::map<int, CellEvidence> evidence;  // keyed by frontier cell index
  int unresolved_count = 0;
};

inline BoundaryClassification classify_boundary(const EnvelopeSample& sample, int depth,
                                                double gap, int threads = 0) {
  BoundaryClassification cls;
  cls.labels.assign(sample.cells.size(), BoundaryLabel::kNone);

  DistanceEstimate base =
      thurston_distance(sample.x_point, sample.y_point, depth, kDefaultConvergenceTol, gap);
  cls.base_cluster = base.argmax_cluster;
  std::set<Slope> base_set(base.argmax_cluster.begin(), base.argmax_cluster.end());

  int rx = sample.res_x(), ry = sample.res_y();
  auto member_at = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= rx || j >= ry) return false;
    return sample.cells[j * rx + i].member;
  };

  std::vector<std::size_t> frontier;
  for (std::size_t idx = 0; idx < sample.cells.size(); ++idx) {
    if (!sample.cells[idx].member) continue;
    int i = static_cast<int>(idx) % rx;
    int j = static_cast<int>(idx) / rx;
    bool edge = !member_at(i - 1, j) || !member_at(i + 1, j) || !member_at(i, j - 1) ||
                !member_at(i, j + 1);
    cls.labels[idx] = edge ? BoundaryLabel::kInteriorAdj : BoundaryLabel::kInterior;
    if (edge) frontier.push_back(idx);
  }

  const double eps = 1e-9;
  std::vector<int> unresolved(sample.cells.size(), 0);
  std::vector<CellEvidence> frontier_evidence(frontier.size());
  parallel_for(frontier.size(), threads, [&](std::size_t fi) {
    std::size_t idx = frontier[fi];
    const GridCell& cell = sample.cells[idx];
    // Endpoint conventions: Y is a right boundary point, X a left one.
    if (cell.dist_to_y <= eps) {
      cls.labels[idx] = BoundaryLabel::kRbd;
      return;
    }
    if (cell.dist_from_x <= eps) {
      cls.labels[idx] = BoundaryLabel::kLbd;
      return;
    }
    DistanceEstimate right =
        thurston_distance(cell.point, sample.y_point, depth, kDefaultConvergenceTol, gap);
    DistanceEstimate left =
        thurston_distance(sample.x_point, cell.point, depth, kDefaultConvergenceTol, gap);
    std::set<Slope> cr(right.argmax_cluster.begin(), right.argmax_cluster.end());
    std::set<Slope> cl(left.argmax_cluster.begin(), left.argmax_cluster.end());
    CellEvidence& ev = frontier_evidence[fi];
    std::set_difference(cr.begin(), cr.end(), base_set.begin(), base_set.end(),
                        std::back_inserter(ev.right_extra));
    std::set_difference(cl.begin(), cl.end(), base_set.begin(), base_set.end(),
                        std::back_inserter(ev.left_extra));
    bool r_consistent = std::includes(cr.begin(), cr.end(), base_set.begin(), base_set.end());
    bool l_consistent = std::includes(cl.begin(), cl.end(), base_set.begin(), base_set.end());
    if (!r_consistent || !l_consistent) {
      cls.labels[idx] = BoundaryLabel::kUnresolved;
      unresolved[idx] = 1;
      return;
    }
    bool r_evidence = !ev.right_extra.empty();
    bool l_evidence = !ev.left_extra.empty();
    if (r_evidence && l_evidence) {
      cls.labels[idx] = BoundaryLabel::kBd;
    } else if (r_evidence) {
      cls.labels[idx] = BoundaryLabel::kRbd;
    } else if (l_evidence) {
      cls.labels[idx] = BoundaryLabel::kLbd;
    }
  });
  for (int u : unresolved) cls.unresolved_count += u;
  for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
    cls.evidence[static_cast<int>(frontier[fi])] = std::move(frontier_evidence[fi]);
  }
  return cls;
}

enum class EnvelopeShape { kSegment, kQuadrilateralLike, kOther };

inline std::string shape_name(EnvelopeShape s) {
  switch (s) {
    case EnvelopeShape::kSegment: return "SEGMENT";
    case EnvelopeShape::kQuadrilateralLike: return "QUADRILATERAL-LIKE";
    case EnvelopeShape::kOther: return "OTHER";
  }
  return "?";
}

struct CornerCluster {
  std::vector<int> cells;
  double cx = 0.0, cy = 0.0;
  std::string kind;  // "X", "Y", or "BD"
  double diameter = 0.0;  // chart-coordinate extent of the cluster
};

struct EnvelopeReport {
  EnvelopeShape shape = EnvelopeShape::kOther;
  std::vector<CornerCluster> corners;
  int bd_cluster_count = 0;
  bool xy_opposite = false;
  double dimension_estimate = 0.0;
  double max_width_cells = 0.0;
  double member_diameter = 0.0;
  int member_count = 0;
  bool degenerate_grid = false;
};

namespace detail {

// 8-connected clusters of the given cell set.
inline std::vector<std::vector<int>> grid_clusters(const std::vector<int>& cells, int rx) {
  std::set<int> pending(cells.begin(), cells.end());
  std::vector<std::vector<int>> clusters;
  while (!pending.empty()) {
    int seed = *pending.begin();
    pending.erase(pending.begin());
    std::vector<int> cluster{seed};
    std::deque<int> queue{seed};
    while (!queue.empty()) {
      int idx = queue.front();
      queue.pop_front();
      int i = idx % rx, j = idx / rx;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          if (i + di < 0 || i + di >= rx) continue;
          int nb = (j + dj) * rx + (i + di);
          auto it = pending.find(nb);
          if (it != pending.end()) {
            pending.erase(it);
            cluster.push_back(nb);
            queue.push_back(nb);
          }
        }
      }
    }
    std::sort(cluster.begin(), cluster.end());
    clusters.push_back(std::move(cluster));
  }
  std::sort(clusters.begin(), clusters.end());
  return clusters;
}

// Box-counting dimension from 1-cell vs 2-cell boxes.
inline double box_dimension(const EnvelopeSample& sample) {
  int n1 = 0;
  std::set<std::pair<int, int>> boxes2;
  for (std::size_t idx = 0; idx < sample.cells.size(); ++idx) {
    if (!sample.cells[idx].member) continue;
    ++n1;
    int i = static_cast<int>(idx) % sample.res_x();
    int j = static_cast<int>(idx) / sample.res_x();
    boxes2.insert({i / 2, j / 2});
  }
  if (n1 == 0 || boxes2.empty()) return 0.0;
  return std::log2(static_cast<double>(n1) / boxes2.size());
}

}  // namespace detail

// Shape of the sampled envelope. SEGMENT when the member region is thin at
// every station along the X-Y chart direction; QUADRILATERAL-LIKE when the
// frontier carries exactly two BD corner clusters with X and Y as the other
// two, opposite each other; OTHER otherwise.
inline EnvelopeReport shape_report(const EnvelopeSample& sample,
                                   const BoundaryClassification& cls,
                                   double width_tol_cells = 2.0) {
  EnvelopeReport rep;
  std::vector<int> members = sample.member_indices();
  rep.member_count = static_cast<int>(members.size());
  if (sample.res_x() < 8 || sample.res_y() < 8 || members.size() < 4) {
    rep.degenerate_grid = true;
    rep.shape = EnvelopeShape::kOther;
    return rep;
  }

  // Width profile along the X->Y chart chord, in cell units.
  double ux = sample.y_point.x - sample.x_point.x;
  double uy = sample.y_point.y - sample.x_point.y;
  double norm = std::hypot(ux, uy);
  ux /= norm;
  uy /= norm;
  double cell_unit = std::max(sample.chart.dx(), sample.chart.dy());
  int bins = std::max(sample.res_x(), sample.res_y());
  std::vector<double> lo(bins, std::numeric_limits<double>::infinity());
  std::vector<double> hi(bins, -std::numeric_limits<double>::infinity());
  double min_d = std::numeric_limits<double>::infinity(), max_d = 0.0;
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (int idx : members) {
    const GridCell& c = sample.cells[idx];
    double sx = (c.x - sample.x_point.x) * ux + (c.y - sample.x_point.y) * uy;
    double h = -(c.x - sample.x_point.x) * uy + (c.y - sample.x_point.y) * ux;
    double frac = sx / norm;
    int bin = std::clamp(static_cast<int>(frac * (bins - 1)), 0, bins - 1);
    lo[bin] = std::min(lo[bin], h);
    hi[bin] = std::max(hi[bin], h);
    min_d = std::min(min_d, frac);
    max_d = std::max(max_d, frac);
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  rep.member_diameter = std::hypot(max_x - min_x, max_y - min_y);
  double max_width = 0.0;
  for (int b = 0; b < bins; ++b) {
    if (hi[b] >= lo[b]) max_width = std::max(max_width, (hi[b] - lo[b]) / cell_unit);
  }
  rep.max_width_cells = max_width;
  rep.dimension_estimate = detail::box_dimension(sample);

  // Corner clusters: the two endpoint cells plus the BD clusters.
  std::vector<int> bd_cells;
  for (std::size_t idx = 0; idx < cls.labels.size(); ++idx) {
    if (cls.labels[idx] == BoundaryLabel::kBd) bd_cells.push_back(static_cast<int>(idx));
  }
  auto bd_clusters = detail::grid_clusters(bd_cells, sample.res_x());
  rep.bd_cluster_count = static_cast<int>(bd_clusters.size());
  auto centroid = [&](const std::vector<int>& cells) {
    double cx = 0.0, cy = 0.0;
    for (int idx : cells) {
      cx += sample.cells[idx].x;
      cy += sample.cells[idx].y;
    }
    return std::pair<double, double>{cx / cells.size(), cy / cells.size()};
  };
  auto cluster_diameter = [&](const std::vector<int>& cells) {
    double best = 0.0;
    for (std::size_t a = 0; a < cells.size(); ++a) {
      for (std::size_t b = a + 1; b < cells.size(); ++b) {
        double dx = sample.cells[cells[a]].x - sample.cells[cells[b]].x;
        double dy = sample.cells[cells[a]].y - sample.cells[cells[b]].y;
        best = std::max(best, std::hypot(dx, dy));
      }
    }
    return best;
  };
  rep.corners.push_back({{sample.x_cell}, sample.x_point.x, sample.x_point.y, "X", 0.0});
  rep.corners.push_back({{sample.y_cell}, sample.y_point.x, sample.y_point.y, "Y", 0.0});
  for (const auto& cluster : bd_clusters) {
    auto [cx, cy] = centroid(cluster);
    rep.corners.push_back({cluster, cx, cy, "BD", cluster_diameter(cluster)});
  }

  if (max_width <= width_tol_cells) {
    rep.shape = EnvelopeShape::kSegment;
    return rep;
  }

  if (rep.bd_cluster_count == 2) {
    // Cyclic order of the four corners around the member centroid: X and Y
    // must be non-adjacent.
    double mx = 0.0, my = 0.0;
    for (int idx : members) {
      mx += sample.cells[idx].x;
      my += sample.cells[idx].y;
    }
    mx /= members.size();
    my /= members.size();
    std::vector<std::pair<double, std::string>> angled;
    for (const auto& c : rep.corners) {
      angled.emplace_back(std::atan2(c.cy - my, c.cx - mx), c.kind);
    }
    std::sort(angled.begin(), angled.end());
    for (int k = 0; k < 4; ++k) {
      if (angled[k].second == "X" && angled[(k + 2) % 4].second == "Y") rep.xy_opposite = true;
    }
    if (rep.xy_opposite) {
      rep.shape = EnvelopeShape::kQuadrilateralLike;
      return rep;
    }
  }
  rep.shape = EnvelopeShape::kOther;
  return rep;
}

// A right-boundary witness for the cone structure: an RBD cell R with
// d(X,Z) + d(Z,R) = d(X,R) within tol, i.e. Z lies on a geodesic from X to a
// right boundary point. Candidates are scanned outward by distance from X.
inline std::optional<int> cone_witness(const EnvelopeSample& sample,
                                       const BoundaryClassification& cls, int cell_index,
                                       double tol) {
  const GridCell& z = sample.cells[cell_index];
  if (!z.member) throw InputError("cone witness requires a member cell");
  std::vector<int> candidates;
  for (std::size_t idx = 0; idx < cls.labels.size(); ++idx) {
    if (cls.labels[idx] == BoundaryLabel::kRbd || cls.labels[idx] == BoundaryLabel::kBd) {
      candidates.push_back(static_cast<int>(idx));
    }
  }
  if (std::find(candidates.begin(), candidates.end(), sample.y_cell) == candidates.end()) {
    candidates.push_back(sample.y_cell);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    double da = sample.cells[a].dist_from_x, db = sample.cells[b].dist_from_x;
    return da != db ? da < db : a < b;
  });
  for (int r : candidates) {
    const GridCell& rc = sample.cells[r];
    if (rc.dist_from_x < z.dist_from_x - tol) continue;
    double dzr = thurston_distance(z.point, rc.point, sample.depth).value;
    if (std::abs(z.dist_from_x + dzr - rc.dist_from_x) <= tol) return r;
  }
  return std::nullopt;
}

// Discrete level set M_t: member cells at distance t*d(X,Y) from X within
// tol. Connectivity (8-adjacency component count) stands in for the
// contractibility statement at desk scale.
inline std::vector<int> level_set(const EnvelopeSample& sample, double t, double tol) {
  if (t < 0.0 || t > 1.0) throw InputError("level parameter must lie in [0,1]");
  std::vector<int> out;
  double target = t * sample.dist_xy;
  for (std::size_t idx = 0; idx < sample.cells.size(); ++idx) {
    const GridCell& c = sample.cells[idx];
    if (c.member && std::abs(c.dist_from_x - target) <= tol) out.push_back(static_cast<int>(idx));
  }
  return out;
}

inline int level_set_component_count(const EnvelopeSample& sample, const std::vector<int>& cells) {
  return static_cast<int>(detail::grid_clusters(cells, sample.res_x()).size());
}

// Symmetric Hausdorff distance between two member sets in chart coordinates.
inline double member_hausdorff(const EnvelopeSample& a, const EnvelopeSample& b) {
  std::vector<int> ma = a.member_indices(), mb = b.member_indices();
  if (ma.empty() || mb.empty()) return std::numeric_limits<double>::infinity();
  auto one_sided = [](const EnvelopeSample& s1, const std::vector<int>& m1,
                      const EnvelopeSample& s2, const std::vector<int>& m2) {
    double worst = 0.0;
    for (int i : m1) {
      double bestsq = std::numeric_limits<double>::infinity();
      double x1 = s1.cells[i].x, y1 = s1.cells[i].y;
      for (int j : m2) {
        double dx = x1 - s2.cells[j].x, dy = y1 - s2.cells[j].y;
        bestsq = std::min(bestsq, dx * dx + dy * dy);
      }
      worst = std::max(worst, bestsq);
    }
    return std::sqrt(worst);
  };
  return std::max(one_sided(a, ma, b, mb), one_sided(b, mb, a, ma));
}

struct ContinuityResult {
  double delta = 0.0;
  double hausdorff_x = 0.0;  // X perturbed along +x
  double hausdorff_y = 0.0;  // Y perturbed along +x
  bool skipped_x = false;
  bool skipped_y = false;
};

// Perturbs each endpoint by delta along the +x chart axis, resamples, and
// reports the Hausdorff displacement of the member set. Distances shrink as
// delta does; perturbations that leave the domain are skipped and flagged.
inline std::vector<ContinuityResult> continuity_probe(const TracePoint& x, const TracePoint& y,
                                                      const Chart& chart,
                                                      const std::vector<double>& deltas,
                                                      double tol, int depth, int threads = 0) {
  EnvelopeSample base = sample_envelope(x, y, chart, tol, depth, threads);
  std::vector<ContinuityResult> out;
  for (double delta : deltas) {
    ContinuityResult res;
    res.delta = delta;
    try {
      TracePoint xp = markov_complete(x.x + delta, x.y, chart.root);
      EnvelopeSample moved = sample_envelope(xp, y, chart, base.tol, depth, threads);
      res.hausdorff_x = member_hausdorff(base, moved);
    } catch (const DomainError&) {
      res.skipped_x = true;
    } catch (const InputError&) {
      res.skipped_x = true;
    }
    try {
      TracePoint yp = markov_complete(y.x + delta, y.y, chart.root);
      EnvelopeSample moved = sample_envelope(x, yp, chart, base.tol, depth, threads);
      res.hausdorff_y = member_hausdorff(base, moved);
    } catch (const DomainError&) {
      res.skipped_y = true;
    } catch (const InputError&) {
      res.skipped_y = true;
    }
    out.push_back(res);
  }
  return out;
}

}  // namespace thurston
