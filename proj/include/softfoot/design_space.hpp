#pragma once

// Enumeration and pruning of the transverse-connection design space.
//
// Each of the five parallel modules exposes 11 components (6 links, 5 joints)
// whose analogs in adjacent modules can be left free (F), coupled elastically
// (K), or locked rigidly (R). Designs are screened by a fixed rule list and
// the survivors are canonicalized, leaving five buildable configurations.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace softfoot {

enum class Component : uint8_t {
  Toe1 = 0,
  Toe2,
  Toe3,
  FrontalArch,
  RearArch,
  Heel,
  IpJoint1,
  IpJoint2,
  MtpJoint,
  MidtarsalAnkleJoint,
  HeelJoint,
};

inline constexpr int kComponentCount = 11;

inline constexpr std::array<Component, kComponentCount> kAllComponents = {
    Component::Toe1,     Component::Toe2,     Component::Toe3,
    Component::FrontalArch, Component::RearArch, Component::Heel,
    Component::IpJoint1, Component::IpJoint2, Component::MtpJoint,
    Component::MidtarsalAnkleJoint, Component::HeelJoint};

inline constexpr bool is_link(Component c) {
  return static_cast<int>(c) <= static_cast<int>(Component::Heel);
}
inline constexpr bool is_joint(Component c) { return !is_link(c); }

inline std::string_view component_name(Component c) {
  switch (c) {
    case Component::Toe1: return "toe1";
    case Component::Toe2: return "toe2";
    case Component::Toe3: return "toe3";
    case Component::FrontalArch: return "frontal_arch";
    case Component::RearArch: return "rear_arch";
    case Component::Heel: return "heel";
    case Component::IpJoint1: return "ip_joint1";
    case Component::IpJoint2: return "ip_joint2";
    case Component::MtpJoint: return "mtp_joint";
    case Component::MidtarsalAnkleJoint: return "midtarsal_ankle_joint";
    case Component::HeelJoint: return "heel_joint";
  }
  return "?";
}

enum class Connection : uint8_t { Free = 0, Elastic = 1, Rigid = 2 };

inline char connection_letter(Connection c) {
  switch (c) {
    case Connection::Free: return 'F';
    case Connection::Elastic: return 'K';
    case Connection::Rigid: return 'R';
  }
  return '?';
}

inline std::optional<Connection> connection_from_letter(char l) {
  switch (l) {
    case 'F': return Connection::Free;
    case 'K': return Connection::Elastic;
    case 'R': return Connection::Rigid;
    default: return std::nullopt;
  }
}

// Total map component -> connection type; one type covers all constrainable
// DoFs of that component (translations move together, see rule C1).
struct ConnectionAssignment {
  std::array<Connection, kComponentCount> types{};

  Connection at(Component c) const { return types[static_cast<size_t>(c)]; }
  void set(Component c, Connection t) { types[static_cast<size_t>(c)] = t; }

  // Three-letter label from the frontal-arch, rear-arch, and heel entries.
  std::string label() const {
    return {connection_letter(at(Component::FrontalArch)),
            connection_letter(at(Component::RearArch)),
            connection_letter(at(Component::Heel))};
  }

  auto operator<=>(const ConnectionAssignment&) const = default;
};

enum class Rule : uint8_t {
  A1, A2, A3, A4,
  C1, C2, C3, C4, C5, C6, C7,
  C7_1, C7_2, C7_3, C7_4, C7_5, C7_6,
};

inline constexpr std::array<Rule, 17> kRuleOrder = {
    Rule::A1, Rule::A2, Rule::A3, Rule::A4,
    Rule::C1, Rule::C2, Rule::C3, Rule::C4, Rule::C5, Rule::C6, Rule::C7,
    Rule::C7_1, Rule::C7_2, Rule::C7_3, Rule::C7_4, Rule::C7_5, Rule::C7_6};

inline std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::A1: return "A1";
    case Rule::A2: return "A2";
    case Rule::A3: return "A3";
    case Rule::A4: return "A4";
    case Rule::C1: return "C1";
    case Rule::C2: return "C2";
    case Rule::C3: return "C3";
    case Rule::C4: return "C4";
    case Rule::C5: return "C5";
    case Rule::C6: return "C6";
    case Rule::C7: return "C7";
    case Rule::C7_1: return "C7.1";
    case Rule::C7_2: return "C7.2";
    case Rule::C7_3: return "C7.3";
    case Rule::C7_4: return "C7.4";
    case Rule::C7_5: return "C7.5";
    case Rule::C7_6: return "C7.6";
  }
  return "?";
}

enum class Verdict : uint8_t { Accept, Reject, Rewrite };

struct RuleVerdict {
  Rule rule;
  Verdict outcome;
  std::optional<ConnectionAssignment> rewritten_to;  // Rewrite only
  std::string note;
};

struct ConstraintResult {
  bool accepted = false;
  std::vector<RuleVerdict> trace;
};

// Lazily indexed raw space: 3 connection choices for each of 11 components.
class RawDesignSpace {
 public:
  static constexpr size_t kSize = 177147;  // 3^11

  size_t size() const { return kSize; }

  ConnectionAssignment at(size_t index) const {
    ConnectionAssignment a;
    for (int c = 0; c < kComponentCount; ++c) {
      a.types[c] = static_cast<Connection>(index % 3);
      index /= 3;
    }
    return a;
  }

  class iterator {
   public:
    using value_type = ConnectionAssignment;
    iterator(const RawDesignSpace* s, size_t i) : space_(s), i_(i) {}
    ConnectionAssignment operator*() const { return space_->at(i_); }
    iterator& operator++() { ++i_; return *this; }
    bool operator!=(const iterator& o) const { return i_ != o.i_; }
   private:
    const RawDesignSpace* space_;
    size_t i_;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, kSize}; }
};

// Canonical representative of a design's equivalence class. With rigid heels
// the rear-arch / heel-joint coupling is indifferent (C7.6), so KKR folds
// into KRR.
inline ConnectionAssignment canonicalize(ConnectionAssignment a) {
  if (a.at(Component::Heel) == Connection::Rigid &&
      a.at(Component::RearArch) == Connection::Elastic) {
    a.set(Component::RearArch, Connection::Rigid);
  }
  return a;
}

// Evaluates the full rule list in fixed order. A design is accepted when it
// matches the feasible-connection table: toes F, MTP F, frontal arch K,
// midtarsal-ankle R, rear arch K or R, heel joint F, IP joints F.
inline ConstraintResult apply_constraints(const ConnectionAssignment& a) {
  ConstraintResult res;
  res.trace.reserve(kRuleOrder.size());
  bool ok = true;

  auto accept = [&](Rule r, std::string note) {
    res.trace.push_back({r, Verdict::Accept, std::nullopt, std::move(note)});
  };
  auto reject = [&](Rule r, std::string note) {
    res.trace.push_back({r, Verdict::Reject, std::nullopt, std::move(note)});
    ok = false;
  };
  auto check = [&](Rule r, bool pass, std::string fail_note) {
    if (pass) {
      accept(r, "");
    } else {
      reject(r, std::move(fail_note));
    }
  };

  const Connection toe1 = a.at(Component::Toe1);
  const Connection toe2 = a.at(Component::Toe2);
  const Connection toe3 = a.at(Component::Toe3);

  accept(Rule::A1, "root attachment through the central rear arch; structural");
  accept(Rule::A2, "couplings join adjacent modules only; holds by construction");
  accept(Rule::A3, "all four module pairs share one coupling type; holds by construction");
  accept(Rule::A4, "relative module motion restricted to the sagittal plane; structural");
  accept(Rule::C1, "both translational DoFs share one type; single type per component");
  check(Rule::C2,
        a.at(Component::IpJoint1) == Connection::Free &&
            a.at(Component::IpJoint2) == Connection::Free,
        "IP joints have independent kinematics and stay uncoupled");
  check(Rule::C3,
        toe1 == Connection::Free && toe2 == Connection::Free && toe3 == Connection::Free,
        "toes are too small to couple; all three must be free");
  check(Rule::C4, a.at(Component::FrontalArch) == Connection::Elastic,
        "frontal arches must be elastic: rigid kills frontal adaptability, free risks collapse");
  check(Rule::C5, a.at(Component::RearArch) != Connection::Free,
        "rear arches transmit motion between user and foot; cannot be free");
  accept(Rule::C6, "heel uses one type for translations and rotation; single type per component");
  check(Rule::C7, a.at(Component::MidtarsalAnkleJoint) == Connection::Rigid,
        "midtarsal-ankle joint must be rigid to transmit the user's load");
  accept(Rule::C7_1, "arches retain one rotational DoF each about the shared shaft");
  check(Rule::C7_2, a.at(Component::MtpJoint) == Connection::Free,
        "an MTP coupling duplicates a frontal-arch coupling; canonical form keeps MTP free");
  check(Rule::C7_3, a.at(Component::HeelJoint) != Connection::Elastic,
        "an elastic heel-joint coupling duplicates an elastic rear-arch coupling");
  check(Rule::C7_4, a.at(Component::HeelJoint) != Connection::Rigid,
        "a rigid heel-joint coupling duplicates a rigid rear-arch coupling");
  accept(Rule::C7_5, "with rigid rear arches each heel keeps one DoF about the heel joint");

  const ConnectionAssignment canon = canonicalize(a);
  if (canon != a) {
    res.trace.push_back({Rule::C7_6, Verdict::Rewrite, canon,
                         "rigid heels make the rear-arch coupling indifferent; folded into " +
                             canon.label()});
  } else {
    accept(Rule::C7_6, "");
  }

  res.accepted = ok;
  return res;
}

// Canonical representatives of an accepted set; merges equivalence classes.
inline std::set<ConnectionAssignment> reduce_equivalences(
    const std::set<ConnectionAssignment>& accepted) {
  std::set<ConnectionAssignment> out;
  for (const auto& a : accepted) out.insert(canonicalize(a));
  return out;
}

struct DesignRecord {
  ConnectionAssignment assignment;
  ConstraintResult result;
};

// Full pipeline: enumerate, filter, optionally keep rejected designs.
inline std::vector<DesignRecord> enumerate_designs(bool include_rejected = false) {
  std::vector<DesignRecord> out;
  RawDesignSpace space;
  for (size_t i = 0; i < space.size(); ++i) {
    ConnectionAssignment a = space.at(i);
    ConstraintResult r = apply_constraints(a);
    if (r.accepted || include_rejected) out.push_back({a, std::move(r)});
  }
  return out;
}

// The five canonical configurations the study builds and tests.
inline std::set<std::string> final_design_labels() {
  std::set<ConnectionAssignment> accepted;
  RawDesignSpace space;
  for (const auto& a : space) {
    if (apply_constraints(a).accepted) accepted.insert(a);
  }
  std::set<std::string> labels;
  for (const auto& a : reduce_equivalences(accepted)) labels.insert(a.label());
  return labels;
}

}  // namespace softfoot
