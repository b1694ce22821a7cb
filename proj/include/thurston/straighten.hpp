#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/traintrack.hpp"

namespace thurston {

namespace detail {

// Location + validation of an attached isolated half-branch.
inline SlotRef locate_attached(const TrainTrack& track, HalfBranch h) {
  SwitchIndex index(track);
  SlotRef ref = index.locate(h);
  if (!ref.attached()) {
    throw InputError("half-branch (" + std::to_string(h.branch) + "," + std::to_string(h.end) +
                     ") is not attached");
  }
  return ref;
}

// Directed stump-branch adjacency inside one component. A branch b with
// direction d arrives at the switch holding (b, in-end); from there the path
// may continue along any stump slot on the opposite side. In an oriented
// component those slots are exactly the outgoing ones.
struct PathGraph {
  const DecoratedTrack& d;
  std::vector<std::vector<StumpSlot>> slots;

  explicit PathGraph(const DecoratedTrack& dec) : d(dec), slots(stump_slots_by_switch(dec)) {}

  // Stump slots on the side opposite `side` of switch si, sorted by half-branch.
  std::vector<StumpSlot> exits(int si, int side) const {
    std::vector<StumpSlot> out;
    for (const auto& s : slots[si]) {
      if (s.side != side) out.push_back(s);
    }
    std::sort(out.begin(), out.end(),
              [](const StumpSlot& a, const StumpSlot& b) { return a.half < b.half; });
    return out;
  }
};

}  // namespace detail

// Smooth directed train path through an orientable component from an
// incoming isolated half-branch to an outgoing one. Deterministic:
// breadth-first shortest path, neighbors explored in ascending half-branch
// order. The path may be empty when entry and exit share a switch on
// opposite sides.
inline TrainPath find_directed_path(const DecoratedTrack& d, const OrientedComponent& c,
                                    HalfBranch entry, HalfBranch exit) {
  if (!c.orientable) throw ContractViolation("find_directed_path requires an orientable component");
  detail::PathGraph graph(d);
  SlotRef entry_ref = detail::locate_attached(d.track, entry);
  SlotRef exit_ref = detail::locate_attached(d.track, exit);

  auto slot_of = [&](SlotRef ref) { return graph.slots[ref.switch_index]; };
  {
    bool entry_mine = false, exit_mine = false;
    for (const auto& s : slot_of(entry_ref)) entry_mine = entry_mine || c.contains(s.half.branch);
    for (const auto& s : slot_of(exit_ref)) exit_mine = exit_mine || c.contains(s.half.branch);
    if (!entry_mine) throw InputError("entry half-branch is not attached to the component");
    if (!exit_mine) throw NoPath(c.id);
    if (!detail::isolated_slot_incoming(c, graph.slots, entry_ref.switch_index,
                                        entry_ref.side)) {
      throw ContractViolation("entry half-branch must be incoming");
    }
    if (detail::isolated_slot_incoming(c, graph.slots, exit_ref.switch_index, exit_ref.side)) {
      throw ContractViolation("exit half-branch must be outgoing");
    }
  }

  // Direct pass-through without touching any stump branch.
  if (entry_ref.switch_index == exit_ref.switch_index && entry_ref.side != exit_ref.side) {
    return {};
  }

  // A traversed branch arrives at the switch holding its incoming end.
  SwitchIndex index(d.track);
  auto head_of = [&](BranchId b) {
    Dir dir = c.direction.at(b);
    int in_end = dir == Dir::kForward ? 1 : 0;
    return index.locate({b, in_end});
  };
  auto can_finish = [&](BranchId b) {
    SlotRef head = head_of(b);
    return head.switch_index == exit_ref.switch_index && head.side != exit_ref.side;
  };

  std::map<BranchId, BranchId> parent;  // child -> previous branch (-1 for roots)
  std::deque<BranchId> queue;
  for (const auto& s : graph.exits(entry_ref.switch_index, entry_ref.side)) {
    if (!parent.count(s.half.branch)) {
      parent[s.half.branch] = -1;
      queue.push_back(s.half.branch);
    }
  }
  while (!queue.empty()) {
    BranchId b = queue.front();
    queue.pop_front();
    if (can_finish(b)) {
      std::vector<std::pair<BranchId, Dir>> steps;
      for (BranchId cur = b; cur != -1; cur = parent.at(cur)) {
        steps.emplace_back(cur, c.direction.at(cur));
      }
      std::reverse(steps.begin(), steps.end());
      return {std::move(steps)};
    }
    SlotRef head = head_of(b);
    for (const auto& s : graph.exits(head.switch_index, head.side)) {
      if (!parent.count(s.half.branch)) {
        parent[s.half.branch] = b;
        queue.push_back(s.half.branch);
      }
    }
  }
  throw NoPath(c.id);
}

// Path through a non-orientable component that leaves the entry half-branch
// and returns to it with reversed direction: shortest path in the
// orientation double cover with states (branch, direction).
inline TrainPath find_reversing_path(const DecoratedTrack& d, const OrientedComponent& c,
                                     HalfBranch entry) {
  if (c.orientable) {
    throw ContractViolation("find_reversing_path requires a non-orientable component");
  }
  detail::PathGraph graph(d);
  SlotRef entry_ref = detail::locate_attached(d.track, entry);
  bool mine = false;
  for (const auto& s : graph.slots[entry_ref.switch_index]) {
    mine = mine || c.contains(s.half.branch);
  }
  if (!mine) throw InputError("entry half-branch is not attached to the component");

  using State = std::pair<BranchId, Dir>;
  SwitchIndex index(d.track);
  auto head_of = [&](const State& st) {
    int in_end = st.second == Dir::kForward ? 1 : 0;
    return index.locate({st.first, in_end});
  };
  // Finished when the train re-enters the entry switch on the opposite side,
  // ready to leave through the entry half-branch reversed.
  auto can_finish = [&](const State& st) {
    SlotRef head = head_of(st);
    return head.switch_index == entry_ref.switch_index && head.side != entry_ref.side;
  };

  std::map<State, State> parent;
  const State root_marker{-1, Dir::kForward};
  std::deque<State> queue;
  for (const auto& s : graph.exits(entry_ref.switch_index, entry_ref.side)) {
    State st{s.half.branch, departing_dir(s.half.end)};
    if (!parent.count(st)) {
      parent[st] = root_marker;
      queue.push_back(st);
    }
  }
  while (!queue.empty()) {
    State st = queue.front();
    queue.pop_front();
    if (can_finish(st)) {
      std::vector<State> steps;
      for (State cur = st; cur.first != -1; cur = parent.at(cur)) steps.push_back(cur);
      std::reverse(steps.begin(), steps.end());
      return {std::move(steps)};
    }
    SlotRef head = head_of(st);
    for (const auto& s : graph.exits(head.switch_index, head.side)) {
      State next{s.half.branch, departing_dir(s.half.end)};
      if (!parent.count(next)) {
        parent[next] = st;
        queue.push_back(next);
      }
    }
  }
  throw NoPath(c.id);
}

// Transportation plan between matched in/out weight lists: both lists are
// laid out as partitions of a common interval in deterministic half-branch
// order, and each pair receives the overlap length of its two cells. Row and
// column sums reproduce the inputs exactly.
inline std::map<std::pair<HalfBranch, HalfBranch>, Rational> pair_weights(
    std::vector<std::pair<HalfBranch, Rational>> in_list,
    std::vector<std::pair<HalfBranch, Rational>> out_list) {
  auto by_half = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::sort(in_list.begin(), in_list.end(), by_half);
  std::sort(out_list.begin(), out_list.end(), by_half);

  Rational total_in, total_out;
  for (const auto& [h, w] : in_list) {
    (void)h;
    if (w.is_negative()) throw InputError("negative in-weight");
    total_in += w;
  }
  for (const auto& [h, w] : out_list) {
    (void)h;
    if (w.is_negative()) throw InputError("negative out-weight");
    total_out += w;
  }
  if (total_in != total_out) {
    throw FluxImbalance(-1, total_in.str(), total_out.str());
  }

  std::map<std::pair<HalfBranch, HalfBranch>, Rational> plan;
  Rational in_lo;
  for (const auto& [hin, win] : in_list) {
    Rational in_hi = in_lo + win;
    Rational out_lo;
    for (const auto& [hout, wout] : out_list) {
      Rational out_hi = out_lo + wout;
      Rational lo = std::max(in_lo, out_lo);
      Rational hi = std::min(in_hi, out_hi);
      if (hi > lo) plan[{hin, hout}] = hi - lo;
      out_lo = out_hi;
    }
    in_lo = in_hi;
  }
  return plan;
}

namespace detail {

inline void require_valid_far_weights(const DecoratedTrack& d, const FarWeights& f) {
  std::vector<BranchId> iso = d.branches_marked(BranchMark::kIsolated);
  for (BranchId b : iso) {
    auto it = f.isolated.find(b);
    if (it == f.isolated.end()) {
      throw InputError("far weights missing isolated branch " + std::to_string(b));
    }
    if (it->second.is_negative()) throw InputError("negative isolated weight");
  }
  for (const auto& [b, w] : f.isolated) {
    if (d.mark_of(b) != BranchMark::kIsolated) {
      throw InputError("isolated weight on non-isolated branch " + std::to_string(b));
    }
    (void)w;
  }
  // Compact part must cover the compact branches and balance at every
  // all-compact switch.
  std::vector<BranchId> cpt = d.branches_marked(BranchMark::kCompact);
  for (BranchId b : cpt) {
    if (f.compact.weights.find(b) == f.compact.weights.end()) {
      throw InputError("far weights missing compact branch " + std::to_string(b));
    }
    if (f.compact.at(b).is_negative()) throw InputError("negative compact weight");
  }
  for (const auto& [b, w] : f.compact.weights) {
    (void)w;
    if (d.mark_of(b) != BranchMark::kCompact) {
      throw InputError("compact weight on non-compact branch " + std::to_string(b));
    }
  }
  for (const Switch& sw : d.track.switches) {
    bool compact_switch = true;
    for (const auto* side : {&sw.side_a, &sw.side_b}) {
      for (const HalfBranch& h : *side) {
        compact_switch = compact_switch && d.mark_of(h.branch) == BranchMark::kCompact;
      }
    }
    if (!compact_switch) continue;
    Rational a, b;
    for (const HalfBranch& h : sw.side_a) a += f.compact.at(h.branch);
    for (const HalfBranch& h : sw.side_b) b += f.compact.at(h.branch);
    if (a != b) throw InputError("compact far weights violate a switch condition");
  }
}

}  // namespace detail

// The straightening lift: builds a full switch-valid weight system on the
// decorated track whose isolated and compact restrictions reproduce the
// given far weights. Non-orientable stump components route each attached
// half-branch along a reversing path with half weight; orientable components
// pair incoming against outgoing half-branches with a transportation plan
// and route each pair along a directed path. Contributions accumulate per
// stump branch by traversal count.
inline WeightSystem straighten_lift(const DecoratedTrack& d, const FarWeights& f) {
  d.validate();
  detail::require_valid_far_weights(d, f);

  WeightSystem out;
  for (BranchId b : d.track.branches) out.weights[b] = Rational(0);
  for (const auto& [b, w] : f.isolated) out.weights[b] = w;
  for (const auto& [b, w] : f.compact.weights) out.weights[b] = w;

  const Rational half(1, 2);
  for (const auto& c : decompose_components(d)) {
    auto attachments = detail::isolated_attachments_any(d, c);
    if (!c.orientable) {
      for (const auto& att : attachments) {
        const Rational& w = f.isolated.at(att.half.branch);
        if (w.is_zero()) continue;
        TrainPath path = find_reversing_path(d, c, att.half);
        for (const auto& [b, count] : path.traversal_counts()) {
          out.weights[b] += half * w * Rational(count);
        }
      }
      continue;
    }
    std::vector<std::pair<HalfBranch, Rational>> in_list, out_list;
    Rational in_sum, out_sum;
    for (const auto& att : attachments) {
      const Rational& w = f.isolated.at(att.half.branch);
      if (att.incoming) {
        in_list.emplace_back(att.half, w);
        in_sum += w;
      } else {
        out_list.emplace_back(att.half, w);
        out_sum += w;
      }
    }
    if (in_sum != out_sum) throw FluxImbalance(c.id, in_sum.str(), out_sum.str());
    for (const auto& [pair, w] : pair_weights(in_list, out_list)) {
      if (w.is_zero()) continue;
      TrainPath path = find_directed_path(d, c, pair.first, pair.second);
      for (const auto& [b, count] : path.traversal_counts()) {
        out.weights[b] += w * Rational(count);
      }
    }
  }

  if (!check_switch_conditions(d.track, out)) {
    throw ContractViolation("straighten_lift produced an unbalanced weight system");
  }
  return out;
}

// Projection onto the far data: isolated and compact weight restrictions.
inline FarWeights cut(const DecoratedTrack& d, const WeightSystem& w) {
  d.validate();
  for (BranchId b : d.track.branches) {
    if (w.at(b).is_negative()) throw InputError("negative branch weight");
  }
  if (!check_switch_conditions(d.track, w)) {
    throw InputError("weight system violates switch conditions");
  }
  FarWeights f;
  for (BranchId b : d.branches_marked(BranchMark::kIsolated)) f.isolated[b] = w.at(b);
  for (BranchId b : d.branches_marked(BranchMark::kCompact)) f.compact.weights[b] = w.at(b);
  return f;
}

// w + n*s for a stump-supported, switch-valid s. Models twisting around the
// stump: the cut projection is unchanged.
inline WeightSystem add_stump_weights(const DecoratedTrack& d, const WeightSystem& w,
                                      const WeightSystem& s, const Rational& n) {
  if (n.is_negative()) throw InputError("stump multiple must be nonnegative");
  for (const auto& [b, sw] : s.weights) {
    if (!sw.is_zero() && d.mark_of(b) != BranchMark::kStump) {
      throw InputError("stump increment supported off the stump at branch " + std::to_string(b));
    }
  }
  // Switch-valid once extended by zero off the stump.
  WeightSystem extended;
  for (BranchId b : d.track.branches) {
    auto it = s.weights.find(b);
    extended.weights[b] = it == s.weights.end() ? Rational(0) : it->second;
  }
  if (!check_switch_conditions(d.track, extended)) {
    throw InputError("stump increment violates switch conditions");
  }
  WeightSystem out;
  for (BranchId b : d.track.branches) {
    out.weights[b] = w.at(b) + n * extended.weights[b];
  }
  return out;
}

}  // namespace thurston
