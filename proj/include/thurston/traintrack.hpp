#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/rational.hpp"

namespace thurston {

using BranchId = int;

// A branch has two ends, 0 and 1. A half-branch is one end of one branch.
struct HalfBranch {
  BranchId branch = -1;
  int end = 0;
  friend auto operator<=>(const HalfBranch&, const HalfBranch&) = default;
};

// Trivalent switch: three half-branch slots split over two sides. Train paths
// run smoothly between opposite sides, never between slots on the same side.
struct Switch {
  std::vector<HalfBranch> side_a;
  std::vector<HalfBranch> side_b;

  std::size_t degree() const { return side_a.size() + side_b.size(); }
};

struct TrainTrack {
  std::vector<BranchId> branches;
  std::vector<Switch> switches;

  bool has_branch(BranchId b) const {
    return std::find(branches.begin(), branches.end(), b) != branches.end();
  }

  void validate() const {
    std::set<BranchId> ids(branches.begin(), branches.end());
    if (ids.size() != branches.size()) throw InputError("duplicate branch identifiers");
    std::set<HalfBranch> seen;
    for (std::size_t i = 0; i < switches.size(); ++i) {
      const Switch& sw = switches[i];
      if (sw.degree() != 3) {
        throw InputError("switch " + std::to_string(i) + " must have exactly 3 half-branches");
      }
      if (sw.side_a.empty() || sw.side_b.empty()) {
        throw InputError("switch " + std::to_string(i) + " has an empty side");
      }
      for (const auto* side : {&sw.side_a, &sw.side_b}) {
        for (const HalfBranch& h : *side) {
          if (!ids.count(h.branch)) {
            throw InputError("switch " + std::to_string(i) + " references unknown branch " +
                             std::to_string(h.branch));
          }
          if (h.end != 0 && h.end != 1) throw InputError("half-branch end must be 0 or 1");
          if (!seen.insert(h).second) {
            throw InputError("half-branch (" + std::to_string(h.branch) + "," +
                             std::to_string(h.end) + ") appears in two switch slots");
          }
        }
      }
    }
  }
};

// Where a half-branch sits: switch index and side (0 = side_a, 1 = side_b).
struct SlotRef {
  int switch_index = -1;
  int side = 0;
  bool attached() const { return switch_index >= 0; }
};

// Attachment lookup table for a fixed track.
class SwitchIndex {
 public:
  explicit SwitchIndex(const TrainTrack& track) {
    for (std::size_t i = 0; i < track.switches.size(); ++i) {
      const Switch& sw = track.switches[i];
      for (const HalfBranch& h : sw.side_a) slots_[h] = {static_cast<int>(i), 0};
      for (const HalfBranch& h : sw.side_b) slots_[h] = {static_cast<int>(i), 1};
    }
  }

  SlotRef locate(HalfBranch h) const {
    auto it = slots_.find(h);
    return it == slots_.end() ? SlotRef{} : it->second;
  }

 private:
  std::map<HalfBranch, SlotRef> slots_;
};

struct WeightSystem {
  std::map<BranchId, Rational> weights;

  const Rational& at(BranchId b) const {
    auto it = weights.find(b);
    if (it == weights.end()) {
      throw InputError("missing weight for branch " + std::to_string(b));
    }
    return it->second;
  }
};

// Exact switch-condition check: at every switch the side sums agree, each
// branch counted once per incident half-branch.
inline bool check_switch_conditions(const TrainTrack& track, const WeightSystem& w) {
  for (BranchId b : track.branches) w.at(b);
  for (const Switch& sw : track.switches) {
    Rational a, bsum;
    for (const HalfBranch& h : sw.side_a) a += w.at(h.branch);
    for (const HalfBranch& h : sw.side_b) bsum += w.at(h.branch);
    if (a != bsum) return false;
  }
  return true;
}

enum class BranchMark { kStump, kIsolated, kCompact };

inline std::string mark_name(BranchMark m) {
  switch (m) {
    case BranchMark::kStump: return "STUMP";
    case BranchMark::kIsolated: return "ISOLATED";
    case BranchMark::kCompact: return "COMPACT";
  }
  return "?";
}

// Track partitioned into the stump approximation, the added isolated-leaf
// branches, and the compact complementary part.
struct DecoratedTrack {
  TrainTrack track;
  std::map<BranchId, BranchMark> marks;

  BranchMark mark_of(BranchId b) const {
    auto it = marks.find(b);
    if (it == marks.end()) throw InputError("branch " + std::to_string(b) + " has no mark");
    return it->second;
  }

  std::vector<BranchId> branches_marked(BranchMark m) const {
    std::vector<BranchId> out;
    for (BranchId b : track.branches) {
      if (mark_of(b) == m) out.push_back(b);
    }
    return out;
  }

  void validate() const {
    track.validate();
    for (BranchId b : track.branches) mark_of(b);
    for (const auto& [b, m] : marks) {
      (void)m;
      if (!track.has_branch(b)) {
        throw InputError("mark for unknown branch " + std::to_string(b));
      }
    }
    SwitchIndex index(track);
    // Legal switches: all STUMP, all COMPACT, or an attachment switch with
    // two STUMP halves and one ISOLATED half.
    for (std::size_t i = 0; i < track.switches.size(); ++i) {
      int stump = 0, iso = 0, cpt = 0;
      auto count = [&](const HalfBranch& h) {
        switch (mark_of(h.branch)) {
          case BranchMark::kStump: ++stump; break;
          case BranchMark::kIsolated: ++iso; break;
          case BranchMark::kCompact: ++cpt; break;
        }
      };
      for (const HalfBranch& h : track.switches[i].side_a) count(h);
      for (const HalfBranch& h : track.switches[i].side_b) count(h);
      bool ok = (stump == 3 && iso == 0 && cpt == 0) || (stump == 2 && iso == 1 && cpt == 0) ||
                (stump == 0 && iso == 0 && cpt == 3);
      if (!ok) {
        throw InputError("switch " + std::to_string(i) +
                         " mixes marks illegally (stump=" + std::to_string(stump) +
                         " isolated=" + std::to_string(iso) + " compact=" + std::to_string(cpt) +
                         ")");
      }
    }
    // STUMP and COMPACT half-branches must all be attached; only ISOLATED
    // branches may have free ends.
    for (BranchId b : track.branches) {
      BranchMark m = mark_of(b);
      if (m == BranchMark::kIsolated) continue;
      for (int e = 0; e < 2; ++e) {
        if (!index.locate({b, e}).attached()) {
          throw InputError(mark_name(m) + " half-branch (" + std::to_string(b) + "," +
                           std::to_string(e) + ") is not attached to any switch");
        }
      }
    }
  }
};

// Data of a lamination in the cut surface: weights on the isolated-leaf
// branches plus a switch-valid weight system on the compact part.
struct FarWeights {
  std::map<BranchId, Rational> isolated;
  WeightSystem compact;

  friend bool operator==(const FarWeights& a, const FarWeights& b) {
    return a.isolated == b.isolated && a.compact.weights == b.compact.weights;
  }
};

// Branch direction. Forward means the branch is traversed from end 0 to
// end 1; a forward branch is outgoing at end 0's switch, incoming at end 1's.
enum class Dir { kForward, kBackward };

inline Dir reverse(Dir d) { return d == Dir::kForward ? Dir::kBackward : Dir::kForward; }

// True when half-branch (b,end) points into its switch under direction d.
inline bool is_incoming(int end, Dir d) {
  return d == Dir::kForward ? end == 1 : end == 0;
}

// Direction that departs from the given end (outgoing there).
inline Dir departing_dir(int end) { return end == 0 ? Dir::kForward : Dir::kBackward; }

struct OrientedComponent {
  int id = 0;
  std::vector<BranchId> branches;  // sorted
  bool orientable = false;
  std::map<BranchId, Dir> direction;  // fixed canonical orientation when orientable

  bool contains(BranchId b) const {
    return std::binary_search(branches.begin(), branches.end(), b);
  }
};

// Smooth directed path through a track, as (branch, direction) steps.
struct TrainPath {
  std::vector<std::pair<BranchId, Dir>> steps;

  std::map<BranchId, int> traversal_counts() const {
    std::map<BranchId, int> c;
    for (const auto& [b, d] : steps) {
      (void)d;
      ++c[b];
    }
    return c;
  }
};

namespace detail {

struct StumpSlot {
  HalfBranch half;
  int side;  // 0 = side_a, 1 = side_b
};

// Stump half-branch slots per switch, skipping isolated/compact slots.
inline std::vector<std::vector<StumpSlot>> stump_slots_by_switch(const DecoratedTrack& d) {
  std::vector<std::vector<StumpSlot>> out(d.track.switches.size());
  for (std::size_t i = 0; i < d.track.switches.size(); ++i) {
    const Switch& sw = d.track.switches[i];
    for (const HalfBranch& h : sw.side_a) {
      if (d.mark_of(h.branch) == BranchMark::kStump) out[i].push_back({h, 0});
    }
    for (const HalfBranch& h : sw.side_b) {
      if (d.mark_of(h.branch) == BranchMark::kStump) out[i].push_back({h, 1});
    }
  }
  return out;
}

}  // namespace detail

// Partition of the STUMP branches into connected components, with
// orientability decided by direction propagation. At each switch, stump
// slots on a common side must share one polarity and the opposite side takes
// the other; a forced conflict means the component is non-orientable. For
// orientable components the orientation is canonicalized: the lowest
// branch identifier is directed out of its side_b switch (falling back to
// forward when it never sits on a side_b slot).
inline std::vector<OrientedComponent> decompose_components(const DecoratedTrack& d) {
  d.validate();
  auto slots = detail::stump_slots_by_switch(d);

  // Switches incident to each stump branch.
  std::map<BranchId, std::vector<int>> incident;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (const auto& s : slots[i]) incident[s.half.branch].push_back(static_cast<int>(i));
  }

  std::vector<BranchId> stump = d.branches_marked(BranchMark::kStump);
  std::set<BranchId> unvisited(stump.begin(), stump.end());
  std::vector<OrientedComponent> components;

  while (!unvisited.empty()) {
    BranchId seed = *unvisited.begin();
    OrientedComponent comp;
    comp.id = static_cast<int>(components.size());
    comp.orientable = true;
    comp.direction[seed] = Dir::kForward;

    std::deque<BranchId> queue{seed};
    unvisited.erase(seed);
    std::vector<BranchId> members{seed};

    while (!queue.empty()) {
      BranchId b = queue.front();
      queue.pop_front();
      Dir db = comp.direction[b];
      for (int si : incident[b]) {
        // In-ness of b's slots at this switch pins every other stump slot.
        for (const auto& mine : slots[si]) {
          if (mine.half.branch != b) continue;
          bool my_in = is_incoming(mine.half.end, db);
          for (const auto& other : slots[si]) {
            if (other.half == mine.half) continue;
            bool want_in = other.side == mine.side ? my_in : !my_in;
            // dir with is_incoming(end, dir) == want_in
            Dir need = (other.half.end == 1) == want_in ? Dir::kForward : Dir::kBackward;
            auto it = comp.direction.find(other.half.branch);
            if (it == comp.direction.end()) {
              comp.direction[other.half.branch] = need;
              members.push_back(other.half.branch);
              unvisited.erase(other.half.branch);
              queue.push_back(other.half.branch);
            } else if (it->second != need) {
              comp.orientable = false;
            }
          }
        }
      }
    }

    std::sort(members.begin(), members.end());
    comp.branches = members;

    if (!comp.orientable) {
      comp.direction.clear();
    } else {
      // Canonicalize.
      SwitchIndex index(d.track);
      BranchId low = comp.branches.front();
      std::optional<Dir> want;
      for (int e = 0; e < 2 && !want; ++e) {
        SlotRef ref = index.locate({low, e});
        if (ref.attached() && ref.side == 1) want = departing_dir(e);
      }
      if (!want) want = Dir::kForward;
      if (comp.direction[low] != *want) {
        for (auto& [bb, dd] : comp.direction) {
          (void)bb;
          dd = reverse(dd);
        }
      }
    }
    components.push_back(std::move(comp));
  }
  return components;
}

namespace detail {

// Polarity of an isolated slot at a switch of an oriented component: the
// slot shares the polarity of stump slots on its side and opposes the other
// side. Returns true when the isolated half-branch is incoming.
inline bool isolated_slot_incoming(const OrientedComponent& c,
                                   const std::vector<std::vector<StumpSlot>>& slots, int si,
                                   int iso_side) {
  for (const auto& s : slots[si]) {
    if (!c.contains(s.half.branch)) continue;
    bool stump_in = is_incoming(s.half.end, c.direction.at(s.half.branch));
    return s.side == iso_side ? stump_in : !stump_in;
  }
  throw ContractViolation("switch has no stump slot of the requested component");
}

struct IsolatedAttachment {
  HalfBranch half;   // the isolated half-branch
  int switch_index;  // attachment switch
  int side;
  bool incoming;  // relative to the component orientation; meaningful only
                  // when the component is orientable
};

// All isolated half-branches attached at switches of component c, in
// deterministic (branch, end) order. Each half-branch is its own attachment:
// a branch glued to c at both ends shows up twice. Polarity is filled in for
// orientable components only.
inline std::vector<IsolatedAttachment> isolated_attachments_any(const DecoratedTrack& d,
                                                                const OrientedComponent& c) {
  auto slots = stump_slots_by_switch(d);
  std::vector<IsolatedAttachment> out;
  for (std::size_t si = 0; si < d.track.switches.size(); ++si) {
    bool mine = false;
    for (const auto& s : slots[si]) mine = mine || c.contains(s.half.branch);
    if (!mine) continue;
    const Switch& sw = d.track.switches[si];
    auto scan = [&](const std::vector<HalfBranch>& side, int side_id) {
      for (const HalfBranch& h : side) {
        if (d.mark_of(h.branch) != BranchMark::kIsolated) continue;
        bool in = c.orientable &&
                  isolated_slot_incoming(c, slots, static_cast<int>(si), side_id);
        out.push_back({h, static_cast<int>(si), side_id, in});
      }
    };
    scan(sw.side_a, 0);
    scan(sw.side_b, 1);
  }
  std::sort(out.begin(), out.end(),
            [](const IsolatedAttachment& a, const IsolatedAttachment& b) {
              return a.half < b.half;
            });
  return out;
}

// Orientable-only variant used by flux accounting.
inline std::vector<IsolatedAttachment> isolated_attachments(const DecoratedTrack& d,
                                                            const OrientedComponent& c) {
  if (!c.orientable) {
    throw ContractViolation("flux accounting requires an orientable component");
  }
  return isolated_attachments_any(d, c);
}

}  // namespace detail

// Sums of isolated weights feeding into / out of an orientable stump
// component, each attached half-branch counted independently.
inline std::pair<Rational, Rational> component_flux(const DecoratedTrack& d,
                                                    const OrientedComponent& c,
                                                    const FarWeights& f) {
  Rational in_sum, out_sum;
  for (const auto& att : detail::isolated_attachments(d, c)) {
    auto it = f.isolated.find(att.half.branch);
    if (it == f.isolated.end()) {
      throw InputError("missing isolated weight for branch " + std::to_string(att.half.branch));
    }
    (att.incoming ? in_sum : out_sum) += it->second;
  }
  return {in_sum, out_sum};
}

// Flux criterion: a far-weight system is straightenable exactly when every
// orientable stump component balances. Non-orientable components impose no
// condition.
inline bool is_straightenable(const DecoratedTrack& d, const FarWeights& f) {
  for (const auto& c : decompose_components(d)) {
    if (!c.orientable) continue;
    auto [in_sum, out_sum] = component_flux(d, c, f);
    if (in_sum != out_sum) return false;
  }
  return true;
}

}  // namespace thurston
