#include "thurston/envelope.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace thurston {
namespace {

// Node-aligned small chart around the curated stretch pair.
Chart small_quad_chart() {
  Chart chart;
  chart.x0 = 2.8;
  chart.x1 = 2.8 + 63 * 0.04;  // 5.32
  chart.y0 = 2.6;
  chart.y1 = 2.6 + 63 * 0.016;  // 3.608
  chart.res_x = 64;
  chart.res_y = 64;
  return chart;
}

TracePoint quad_x() { return TracePoint::create(3, 3, 3); }
TracePoint quad_y() { return markov_complete(5, 3, MarkovRoot::kSmaller); }

const EnvelopeSample& shared_sample() {
  static EnvelopeSample sample = sample_envelope(quad_x(), quad_y(), small_quad_chart(), 0.0, 12);
  return sample;
}

TEST(Chart, NodeLookupAndValidation) {
  Chart chart = small_quad_chart();
  chart.validate();
  EXPECT_NEAR(chart.x_at(0), chart.x0, 1e-15);
  EXPECT_NEAR(chart.x_at(chart.res_x - 1), chart.x1, 1e-12);
  // (3.0, 3.0) is a node: offsets are integer multiples of the steps.
  int idx = chart.nearest_index(3.0, 3.0);
  EXPECT_NEAR(chart.x_at(idx % chart.res_x), 3.0, 1e-12);
  EXPECT_NEAR(chart.y_at(idx / chart.res_x), 3.0, 1e-12);

  Chart bad = chart;
  bad.res_x = 1;
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(Sampler, RejectsDegenerateInput) {
  Chart chart = small_quad_chart();
  EXPECT_THROW(sample_envelope(quad_x(), quad_x(), chart, 0.0, 8), InputError);
  TracePoint outside = markov_complete(8.0, 8.0, MarkovRoot::kSmaller);
  EXPECT_THROW(sample_envelope(quad_x(), outside, chart, 0.0, 8), InputError);
}

TEST(Sampler, EndpointCellsAreMembers) {
  const EnvelopeSample& s = shared_sample();
  EXPECT_TRUE(s.cells[s.x_cell].member);
  EXPECT_TRUE(s.cells[s.y_cell].member);
  EXPECT_EQ(s.cells[s.x_cell].defect, 0.0);
  EXPECT_EQ(s.cells[s.y_cell].defect, 0.0);
}

TEST(Sampler, MembershipMatchesDefectPredicate) {
  const EnvelopeSample& s = shared_sample();
  for (const GridCell& c : s.cells) {
    if (!c.in_domain) {
      EXPECT_FALSE(c.member);
      continue;
    }
    EXPECT_EQ(c.member, c.defect <= s.tol);
  }
}

TEST(Sampler, MembersInsideOutBall) {
  const EnvelopeSample& s = shared_sample();
  for (int idx : s.member_indices()) {
    EXPECT_LE(s.cells[idx].dist_from_x, s.dist_xy + s.tol + 1e-12);
  }
}

TEST(Sampler, DeterministicAcrossThreadCounts) {
  Chart chart = small_quad_chart();
  chart.res_x = 24;
  chart.res_y = 24;
  EnvelopeSample a = sample_envelope(quad_x(), quad_y(), chart, 1e-4, 8, 1);
  EnvelopeSample b = sample_envelope(quad_x(), quad_y(), chart, 1e-4, 8, 4);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].member, b.cells[i].member);
    bool both_nan = std::isnan(a.cells[i].defect) && std::isnan(b.cells[i].defect);
    EXPECT_TRUE(both_nan || a.cells[i].defect == b.cells[i].defect);
  }
}

TEST(Sampler, NestingUpToToleranceWidening) {
  const EnvelopeSample& s = shared_sample();
  // Pick an interior member away from the endpoints.
  int zidx = -1;
  for (int idx : s.member_indices()) {
    const GridCell& c = s.cells[idx];
    if (c.dist_from_x > 0.3 * s.dist_xy && c.dist_from_x < 0.5 * s.dist_xy &&
        std::abs(c.defect) <= 1e-9) {
      zidx = idx;
      break;
    }
  }
  ASSERT_GE(zidx, 0);
  TracePoint z = s.cells[zidx].point;
  EnvelopeSample sub = sample_envelope(quad_x(), z, s.chart, s.tol, s.depth);
  double widened = s.cells[zidx].defect + sub.tol + s.tol;
  for (int idx : sub.member_indices()) {
    EXPECT_LE(s.cells[idx].defect, widened + 1e-9)
        << "sub-envelope member escaped the ambient envelope";
  }
}

TEST(Classification, EndpointConventions) {
  const EnvelopeSample& s = shared_sample();
  BoundaryClassification cls = classify_boundary(s, s.depth, 1e-2);
  EXPECT_EQ(cls.labels[s.y_cell], BoundaryLabel::kRbd);
  EXPECT_EQ(cls.labels[s.x_cell], BoundaryLabel::kLbd);
  EXPECT_EQ(cls.base_cluster.size(), 1u);
  EXPECT_EQ(cls.base_cluster[0], Slope::of(1, 0));
}

TEST(Classification, InteriorMembersCarryNoEvidence) {
  const EnvelopeSample& s = shared_sample();
  BoundaryClassification cls = classify_boundary(s, s.depth, 1e-2);
  int interior = 0;
  for (std::size_t i = 0; i < cls.labels.size(); ++i) {
    if (cls.labels[i] == BoundaryLabel::kInterior) ++interior;
  }
  EXPECT_GT(interior, 0);
}

TEST(Classification, EvidenceMatchesLabels) {
  const EnvelopeSample& s = shared_sample();
  BoundaryClassification cls = classify_boundary(s, s.depth, 1e-2);
  for (const auto& [idx, ev] : cls.evidence) {
    switch (cls.labels[idx]) {
      case BoundaryLabel::kBd:
        EXPECT_FALSE(ev.right_extra.empty());
        EXPECT_FALSE(ev.left_extra.empty());
        break;
      case BoundaryLabel::kInteriorAdj:
        EXPECT_TRUE(ev.right_extra.empty());
        EXPECT_TRUE(ev.left_extra.empty());
        break;
      default:
        break;
    }
  }
}

TEST(Shape, QuadrilateralOnCuratedPair) {
  const EnvelopeSample& s = shared_sample();
  BoundaryClassification cls = classify_boundary(s, s.depth, 1e-2);
  EnvelopeReport rep = shape_report(s, cls, 2.0);
  EXPECT_EQ(rep.shape, EnvelopeShape::kQuadrilateralLike);
  EXPECT_EQ(rep.bd_cluster_count, 2);
  EXPECT_TRUE(rep.xy_opposite);
  EXPECT_EQ(rep.corners.size(), 4u);
  EXPECT_NEAR(rep.dimension_estimate, 2.0, 0.5);
}

TEST(Shape, DegenerateGridIsOther) {
  Chart tiny;
  tiny.x0 = 2.9;
  tiny.x1 = 5.1;
  tiny.y0 = 2.9;
  tiny.y1 = 3.1;
  tiny.res_x = 2;
  tiny.res_y = 2;
  EnvelopeSample s = sample_envelope(quad_x(), quad_y(), tiny, 1e-3, 6);
  BoundaryClassification cls = classify_boundary(s, 6, 1e-2);
  EnvelopeReport rep = shape_report(s, cls, 2.0);
  EXPECT_EQ(rep.shape, EnvelopeShape::kOther);
  EXPECT_TRUE(rep.degenerate_grid);
}

TEST(ConeWitness, EndpointAndInteriorWitnesses) {
  const EnvelopeSample& s = shared_sample();
  BoundaryClassification cls = classify_boundary(s, s.depth, 1e-2);

  auto at_y = cone_witness(s, cls, s.y_cell, 1e-6);
  ASSERT_TRUE(at_y.has_value());
  EXPECT_EQ(*at_y, s.y_cell);

  int found = 0, total = 0;
  for (int idx : s.member_indices()) {
    if (total >= 40) break;
    if (std::abs(s.cells[idx].defect) > 1e-9) continue;
    ++total;
    if (cone_witness(s, cls, idx, 3.0 * s.tol + 1e-6).has_value()) ++found;
  }
  EXPECT_GE(found * 10, total * 9) << found << "/" << total;
}

TEST(LevelSets, EndpointsAndMidBand) {
  const EnvelopeSample& s = shared_sample();
  double band = 0.02 * s.dist_xy;

  auto near_x = level_set(s, 0.0, band);
  ASSERT_FALSE(near_x.empty());
  for (int idx : near_x) EXPECT_LE(s.cells[idx].dist_from_x, band);

  auto near_y = level_set(s, 1.0, band);
  ASSERT_FALSE(near_y.empty());
  for (int idx : near_y) {
    EXPECT_GE(s.cells[idx].dist_from_x, s.dist_xy - band);
  }

  auto mid = level_set(s, 0.5, band);
  ASSERT_FALSE(mid.empty());
  EXPECT_EQ(level_set_component_count(s, mid), 1) << "mid level set should be one band";

  EXPECT_THROW(level_set(s, 1.5, band), InputError);
}

TEST(Continuity, ZeroPerturbationIsExactMatch) {
  Chart chart = small_quad_chart();
  chart.res_x = 32;
  chart.res_y = 32;
  auto res = continuity_probe(quad_x(), quad_y(), chart, {0.0}, 1e-4, 8);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].hausdorff_x, 0.0);
  EXPECT_EQ(res[0].hausdorff_y, 0.0);
}

TEST(Continuity, BothEndpointPerturbationBounded) {
  Chart chart = small_quad_chart();
  double delta = 0.08;
  EnvelopeSample base = sample_envelope(quad_x(), quad_y(), chart, 1e-4, 10);
  TracePoint xp = markov_complete(quad_x().x + delta, quad_x().y, chart.root);
  TracePoint yp = markov_complete(quad_y().x + delta, quad_y().y, chart.root);
  EnvelopeSample moved_x = sample_envelope(xp, quad_y(), chart, 1e-4, 10);
  EnvelopeSample moved_y = sample_envelope(quad_x(), yp, chart, 1e-4, 10);
  EnvelopeSample moved_xy = sample_envelope(xp, yp, chart, 1e-4, 10);
  double dx = member_hausdorff(base, moved_x);
  double dy = member_hausdorff(base, moved_y);
  double dxy = member_hausdorff(base, moved_xy);
  double two_cells = 2.0 * std::hypot(chart.dx(), chart.dy());
  EXPECT_LE(dxy, dx + dy + two_cells);
}

}  // namespace
}  // namespace thurston
