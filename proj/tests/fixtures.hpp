#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "thurston/straighten.hpp"
#include "thurston/traintrack.hpp"

namespace thurston::testing {

// --- Hand-built fixtures -------------------------------------------------

// Theta track: one branch a carried against b and c at both switches.
inline TrainTrack theta_track() {
  TrainTrack t;
  t.branches = {0, 1, 2};  // a, b, c
  t.switches.push_back({{{0, 1}}, {{1, 0}, {2, 0}}});
  t.switches.push_back({{{0, 0}}, {{1, 1}, {2, 1}}});
  return t;
}

// Circle stump {u=0, l=1} with isolated b1=2 incoming at s1 and b2=3
// outgoing at s2 (under the canonical orientation).
inline DecoratedTrack circle_with_two_legs() {
  DecoratedTrack d;
  d.track.branches = {0, 1, 2, 3};
  d.track.switches.push_back({{{0, 0}}, {{1, 0}, {2, 0}}});
  d.track.switches.push_back({{{0, 1}}, {{1, 1}, {3, 0}}});
  d.marks = {{0, BranchMark::kStump},
             {1, BranchMark::kStump},
             {2, BranchMark::kIsolated},
             {3, BranchMark::kIsolated}};
  return d;
}

// Non-orientable barbell: loops v=2 (at s1) and w=3 (at s2) joined by the
// bar u1=0, u2=1, with isolated b1=4 attached at the splice switch s3.
inline DecoratedTrack barbell_with_leg() {
  DecoratedTrack d;
  d.track.branches = {0, 1, 2, 3, 4};
  d.track.switches.push_back({{{0, 0}}, {{2, 0}, {2, 1}}});  // s1: loop v
  d.track.switches.push_back({{{1, 1}}, {{3, 0}, {3, 1}}});  // s2: loop w
  d.track.switches.push_back({{{0, 1}}, {{1, 0}, {4, 0}}});  // s3: attachment
  d.marks = {{0, BranchMark::kStump},
             {1, BranchMark::kStump},
             {2, BranchMark::kStump},
             {3, BranchMark::kStump},
             {4, BranchMark::kIsolated}};
  return d;
}

// Two disjoint circles, one isolated leg each (flux-degenerate; used for
// component decomposition only).
inline DecoratedTrack two_circles() {
  DecoratedTrack d;
  d.track.branches = {0, 1, 2, 3};
  d.track.switches.push_back({{{0, 1}}, {{0, 0}, {2, 0}}});
  d.track.switches.push_back({{{1, 1}}, {{1, 0}, {3, 0}}});
  d.marks = {{0, BranchMark::kStump},
             {1, BranchMark::kStump},
             {2, BranchMark::kIsolated},
             {3, BranchMark::kIsolated}};
  return d;
}

// --- Independent oracles --------------------------------------------------

// Exhaustive orientability oracle: try every direction assignment on the
// component's branches and test the side-consistency constraint at every
// switch directly.
inline bool orientable_by_exhaustion(const DecoratedTrack& d,
                                     const std::vector<BranchId>& component) {
  auto slots = detail::stump_slots_by_switch(d);
  std::size_t n = component.size();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::map<BranchId, Dir> dir;
    for (std::size_t i = 0; i < n; ++i) {
      dir[component[i]] = (mask >> i) & 1 ? Dir::kBackward : Dir::kForward;
    }
    bool ok = true;
    for (const auto& sw_slots : slots) {
      std::optional<bool> side_a_in, side_b_in;
      for (const auto& slot : sw_slots) {
        auto it = dir.find(slot.half.branch);
        if (it == dir.end()) continue;
        bool in = is_incoming(slot.half.end, it->second);
        auto& want = slot.side == 0 ? side_a_in : side_b_in;
        if (!want) {
          want = in;
        } else if (*want != in) {
          ok = false;
        }
      }
      if (side_a_in && side_b_in && *side_a_in == *side_b_in) ok = false;
      if (!ok) break;
    }
    if (ok) return true;
  }
  return false;
}

// Double-cover connectivity oracle: the component is non-orientable exactly
// when some (branch, dir) state connects to its reversal in the undirected
// transition graph.
inline bool nonorientable_by_double_cover(const DecoratedTrack& d,
                                          const std::vector<BranchId>& component) {
  auto slots = detail::stump_slots_by_switch(d);
  SwitchIndex index(d.track);
  std::set<BranchId> comp(component.begin(), component.end());

  using State = std::pair<BranchId, Dir>;
  std::map<State, std::set<State>> adj;
  for (BranchId b : component) {
    for (Dir dir : {Dir::kForward, Dir::kBackward}) {
      int in_end = dir == Dir::kForward ? 1 : 0;
      SlotRef head = index.locate({b, in_end});
      if (!head.attached()) continue;
      for (const auto& slot : slots[head.switch_index]) {
        if (slot.side == head.side || !comp.count(slot.half.branch)) continue;
        State next{slot.half.branch, departing_dir(slot.half.end)};
        adj[{b, dir}].insert(next);
        adj[next].insert({b, dir});
      }
    }
  }
  for (BranchId b : component) {
    // BFS from (b, Forward) to (b, Backward).
    State start{b, Dir::kForward}, goal{b, Dir::kBackward};
    std::set<State> seen{start};
    std::vector<State> queue{start};
    while (!queue.empty()) {
      State cur = queue.back();
      queue.pop_back();
      if (cur == goal) return true;
      for (const State& nxt : adj[cur]) {
        if (seen.insert(nxt).second) queue.push_back(nxt);
      }
    }
  }
  return false;
}

// --- Randomized decorated-track generator ---------------------------------

// Builds valid decorated tracks out of recurrent templates (circles, thetas,
// barbells) with isolated branches spliced in. Attachment styles alternate
// so orientable components see both incoming and outgoing legs.
class TrackGenerator {
 public:
  explicit TrackGenerator(std::uint64_t seed) : rng_(seed) {}

  struct Result {
    DecoratedTrack track;
    // Isolated branch ids reserved as balancers per orientable component
    // (one incoming, one outgoing).
    std::vector<std::pair<BranchId, BranchId>> balancers;
    // A stump-supported switch-valid circulation (positive on every stump
    // branch), assembled per component template.
    WeightSystem stump_circulation;
  };

  Result generate() {
    builder_ = {};
    result_ = {};
    int n_components = 1 + static_cast<int>(rng_() % 2);
    for (int c = 0; c < n_components; ++c) {
      int kind = static_cast<int>(rng_() % 3);
      switch (kind) {
        case 0: result_.balancers.push_back(make_circle(2 + rng_() % 2)); break;
        case 1: result_.balancers.push_back(make_theta()); break;
        default: make_barbell(); break;
      }
    }
    if (rng_() % 2 == 0) make_compact_theta();
    result_.track = builder_;
    result_.track.validate();
    return result_;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  BranchId new_branch(BranchMark mark) {
    BranchId id = next_id_++;
    builder_.track.branches.push_back(id);
    builder_.marks[id] = mark;
    return id;
  }

  // Circle of k stump arcs, one isolated leg per joint, styles alternating.
  // Returns the first incoming and first outgoing leg as balancers.
  std::pair<BranchId, BranchId> make_circle(int k) {
    std::vector<BranchId> arcs;
    for (int i = 0; i < k; ++i) arcs.push_back(new_branch(BranchMark::kStump));
    BranchId in_leg = -1, out_leg = -1;
    for (int i = 0; i < k; ++i) {
      BranchId prev = arcs[(i + k - 1) % k];
      BranchId cur = arcs[i];
      BranchId leg = new_branch(BranchMark::kIsolated);
      bool in_style = i % 2 == 1;
      if (in_style) {
        // Leg rides beside the arriving arc: same polarity as it (incoming).
        builder_.track.switches.push_back({{{cur, 0}}, {{prev, 1}, {leg, 0}}});
        if (in_leg < 0) in_leg = leg;
      } else {
        builder_.track.switches.push_back({{{prev, 1}}, {{cur, 0}, {leg, 0}}});
        if (out_leg < 0) out_leg = leg;
      }
    }
    // Constant weight around the circle is switch-valid.
    Rational r = random_positive_rational();
    for (BranchId arc : arcs) result_.stump_circulation.weights[arc] = r;
    // k >= 2 guarantees one leg of each style.
    return {in_leg, out_leg};
  }

  // Theta with a leg spliced into each of its b and c branches, one per
  // style. Circulation family: b-side beta, c-side gamma, spine beta+gamma.
  std::pair<BranchId, BranchId> make_theta() {
    BranchId a = new_branch(BranchMark::kStump);
    BranchId b1 = new_branch(BranchMark::kStump);
    BranchId b2 = new_branch(BranchMark::kStump);
    BranchId c1 = new_branch(BranchMark::kStump);
    BranchId c2 = new_branch(BranchMark::kStump);
    BranchId leg_out = new_branch(BranchMark::kIsolated);
    BranchId leg_in = new_branch(BranchMark::kIsolated);
    builder_.track.switches.push_back({{{a, 1}}, {{b1, 0}, {c1, 0}}});
    builder_.track.switches.push_back({{{a, 0}}, {{b2, 1}, {c2, 1}}});
    builder_.track.switches.push_back({{{b1, 1}}, {{b2, 0}, {leg_out, 0}}});
    builder_.track.switches.push_back({{{c2, 0}}, {{c1, 1}, {leg_in, 0}}});
    Rational beta = random_positive_rational();
    Rational gamma = random_positive_rational();
    result_.stump_circulation.weights[a] = beta + gamma;
    result_.stump_circulation.weights[b1] = beta;
    result_.stump_circulation.weights[b2] = beta;
    result_.stump_circulation.weights[c1] = gamma;
    result_.stump_circulation.weights[c2] = gamma;
    return {leg_in, leg_out};
  }

  // Non-orientable barbell: two loops joined by a spliced bar, one leg at
  // the splice. Circulation: loops t, bar 2t.
  void make_barbell() {
    BranchId u1 = new_branch(BranchMark::kStump);
    BranchId u2 = new_branch(BranchMark::kStump);
    BranchId v = new_branch(BranchMark::kStump);
    BranchId w = new_branch(BranchMark::kStump);
    BranchId leg = new_branch(BranchMark::kIsolated);
    builder_.track.switches.push_back({{{u1, 0}}, {{v, 0}, {v, 1}}});
    builder_.track.switches.push_back({{{u2, 1}}, {{w, 0}, {w, 1}}});
    builder_.track.switches.push_back({{{u1, 1}}, {{u2, 0}, {leg, 0}}});
    Rational t = random_positive_rational();
    result_.stump_circulation.weights[u1] = t + t;
    result_.stump_circulation.weights[u2] = t + t;
    result_.stump_circulation.weights[v] = t;
    result_.stump_circulation.weights[w] = t;
  }

  void make_compact_theta() {
    BranchId a = new_branch(BranchMark::kCompact);
    BranchId b = new_branch(BranchMark::kCompact);
    BranchId c = new_branch(BranchMark::kCompact);
    builder_.track.switches.push_back({{{a, 1}}, {{b, 0}, {c, 0}}});
    builder_.track.switches.push_back({{{a, 0}}, {{b, 1}, {c, 1}}});
  }

  Rational random_positive_rational() {
    return Rational(1 + static_cast<std::int64_t>(rng_() % 9),
                    1 + static_cast<std::int64_t>(rng_() % 6));
  }

  DecoratedTrack builder_;
  Result result_;
  BranchId next_id_ = 0;
  std::mt19937_64 rng_;
};

inline Rational random_small_rational(std::mt19937_64& rng) {
  std::int64_t num = static_cast<std::int64_t>(rng() % 12);
  std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 8);
  return Rational(num, den);
}

// Random flux-balanced far weights for a generated track: free weights are
// random, then each orientable component is balanced through its reserved
// balancer legs.
inline FarWeights balanced_far_weights(const TrackGenerator::Result& gen, std::mt19937_64& rng) {
  const DecoratedTrack& d = gen.track;
  FarWeights f;
  std::set<BranchId> reserved;
  for (const auto& [in_leg, out_leg] : gen.balancers) {
    reserved.insert(in_leg);
    reserved.insert(out_leg);
  }
  for (BranchId b : d.branches_marked(BranchMark::kIsolated)) {
    f.isolated[b] = reserved.count(b) ? Rational(0) : random_small_rational(rng);
  }
  for (BranchId b : d.branches_marked(BranchMark::kCompact)) {
    f.compact.weights[b] = Rational(0);
  }
  // Switch-valid compact weights: theta components need side sums to agree.
  {
    auto compact = d.branches_marked(BranchMark::kCompact);
    // compact thetas come in triples (a = b + c)
    for (std::size_t i = 0; i + 2 < compact.size() + 1 && compact.size() >= 3; i += 3) {
      Rational wb = random_small_rational(rng);
      Rational wc = random_small_rational(rng);
      f.compact.weights[compact[i]] = wb + wc;
      f.compact.weights[compact[i + 1]] = wb;
      f.compact.weights[compact[i + 2]] = wc;
    }
  }
  auto components = decompose_components(d);
  auto slots_by_switch = detail::stump_slots_by_switch(d);
  SwitchIndex index(d.track);
  for (const auto& c : components) {
    if (!c.orientable) continue;
    auto [in_sum, out_sum] = component_flux(d, c, f);
    // Find this component's balancers.
    for (const auto& [in_leg, out_leg] : gen.balancers) {
      SlotRef ref = index.locate({in_leg, 0});
      bool mine = false;
      for (const auto& slot : slots_by_switch[ref.switch_index]) {
        mine = mine || c.contains(slot.half.branch);
      }
      if (!mine) continue;
      Rational base(1);
      Rational deficit = in_sum - out_sum;
      if (deficit.is_negative()) {
        f.isolated[in_leg] = base - deficit;
        f.isolated[out_leg] = base;
      } else {
        f.isolated[in_leg] = base;
        f.isolated[out_leg] = base + deficit;
      }
      break;
    }
  }
  return f;
}

}  // namespace thurston::testing
