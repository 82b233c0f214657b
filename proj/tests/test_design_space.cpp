#include "softfoot/design_space.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

using namespace softfoot;

namespace {

ConnectionAssignment uniform(Connection t) {
  ConnectionAssignment a;
  for (Component c : kAllComponents) a.set(c, t);
  return a;
}

// Table-compliant assignment with the three label letters free to choose.
ConnectionAssignment table_compliant(Connection front, Connection rear, Connection heel) {
  ConnectionAssignment a;
  a.set(Component::Toe1, Connection::Free);
  a.set(Component::Toe2, Connection::Free);
  a.set(Component::Toe3, Connection::Free);
  a.set(Component::IpJoint1, Connection::Free);
  a.set(Component::IpJoint2, Connection::Free);
  a.set(Component::MtpJoint, Connection::Free);
  a.set(Component::MidtarsalAnkleJoint, Connection::Rigid);
  a.set(Component::HeelJoint, Connection::Free);
  a.set(Component::FrontalArch, front);
  a.set(Component::RearArch, rear);
  a.set(Component::Heel, heel);
  return a;
}

// Independent re-check of the predicate a Reject verdict names.
bool predicate_violated(Rule r, const ConnectionAssignment& a) {
  switch (r) {
    case Rule::C2:
      return a.at(Component::IpJoint1) != Connection::Free ||
             a.at(Component::IpJoint2) != Connection::Free;
    case Rule::C3:
      return a.at(Component::Toe1) != Connection::Free ||
             a.at(Component::Toe2) != Connection::Free ||
             a.at(Component::Toe3) != Connection::Free;
    case Rule::C4:
      return a.at(Component::FrontalArch) != Connection::Elastic;
    case Rule::C5:
      return a.at(Component::RearArch) == Connection::Free;
    case Rule::C7:
      return a.at(Component::MidtarsalAnkleJoint) != Connection::Rigid;
    case Rule::C7_2:
      return a.at(Component::MtpJoint) != Connection::Free;
    case Rule::C7_3:
      return a.at(Component::HeelJoint) == Connection::Elastic;
    case Rule::C7_4:
      return a.at(Component::HeelJoint) == Connection::Rigid;
    default:
      return false;
  }
}

}  // namespace

TEST_CASE("raw space enumerates 3^11 distinct total assignments") {
  RawDesignSpace space;
  REQUIRE(space.size() == 177147);

  // de-duplicating scan; also counts the all-Rigid assignment
  std::set<ConnectionAssignment> seen;
  size_t all_rigid_hits = 0;
  const ConnectionAssignment all_rigid = uniform(Connection::Rigid);
  for (const auto& a : space) {
    seen.insert(a);
    if (a == all_rigid) ++all_rigid_hits;
  }
  CHECK(seen.size() == space.size());
  CHECK(all_rigid_hits == 1);
}

TEST_CASE("constraint screening matches the feasible-connection table") {
  SECTION("KRK-style assignment is accepted") {
    const auto res = apply_constraints(
        table_compliant(Connection::Elastic, Connection::Rigid, Connection::Elastic));
    CHECK(res.accepted);
  }

  SECTION("free rear arches are rejected by C5") {
    auto a = table_compliant(Connection::Elastic, Connection::Free, Connection::Elastic);
    const auto res = apply_constraints(a);
    CHECK_FALSE(res.accepted);
    bool c5_reject = false;
    for (const auto& v : res.trace) {
      if (v.rule == Rule::C5 && v.outcome == Verdict::Reject) c5_reject = true;
    }
    CHECK(c5_reject);
  }

  SECTION("the all-free assignment fails C4, C5, and C7") {
    const auto res = apply_constraints(uniform(Connection::Free));
    CHECK_FALSE(res.accepted);
    std::set<Rule> rejected;
    for (const auto& v : res.trace) {
      if (v.outcome == Verdict::Reject) rejected.insert(v.rule);
    }
    CHECK(rejected.count(Rule::C4) == 1);
    CHECK(rejected.count(Rule::C5) == 1);
    CHECK(rejected.count(Rule::C7) == 1);
  }

  SECTION("trace covers the whole rule list in fixed order") {
    const auto res = apply_constraints(uniform(Connection::Elastic));
    REQUIRE(res.trace.size() == kRuleOrder.size());
    for (size_t i = 0; i < kRuleOrder.size(); ++i) {
      CHECK(res.trace[i].rule == kRuleOrder[i]);
    }
  }
}

TEST_CASE("labels come from the frontal arch, rear arch, and heel letters") {
  CHECK(table_compliant(Connection::Elastic, Connection::Elastic, Connection::Free)
            .label() == "KKF");
  CHECK(uniform(Connection::Rigid).label() == "RRR");

  // positional encoding is injective over the three letter slots
  std::set<std::string> labels;
  for (Connection f : {Connection::Free, Connection::Elastic, Connection::Rigid}) {
    for (Connection r : {Connection::Free, Connection::Elastic, Connection::Rigid}) {
      for (Connection h : {Connection::Free, Connection::Elastic, Connection::Rigid}) {
        labels.insert(table_compliant(f, r, h).label());
      }
    }
  }
  CHECK(labels.size() == 27);
}

TEST_CASE("equivalence reduction folds KKR into KRR") {
  std::set<ConnectionAssignment> accepted;
  for (Connection r : {Connection::Elastic, Connection::Rigid}) {
    for (Connection h : {Connection::Free, Connection::Elastic, Connection::Rigid}) {
      accepted.insert(table_compliant(Connection::Elastic, r, h));
    }
  }
  REQUIRE(accepted.size() == 6);

  const auto reduced = reduce_equivalences(accepted);
  std::set<std::string> labels;
  for (const auto& a : reduced) labels.insert(a.label());
  CHECK(labels == std::set<std::string>{"KKF", "KKK", "KRF", "KRK", "KRR"});

  SECTION("reduction is idempotent") {
    CHECK(reduce_equivalences(reduced) == reduced);
  }
  SECTION("empty set and fixed points") {
    CHECK(reduce_equivalences({}).empty());
    std::set<ConnectionAssignment> krr = {
        table_compliant(Connection::Elastic, Connection::Rigid, Connection::Rigid)};
    CHECK(reduce_equivalences(krr) == krr);
  }
}

TEST_CASE("full pipeline yields the five final configurations") {
  RawDesignSpace space;
  std::set<ConnectionAssignment> accepted;
  for (const auto& a : space) {
    if (apply_constraints(a).accepted) accepted.insert(a);
  }
  CHECK(accepted.size() == 6);
  CHECK(final_design_labels() ==
        std::set<std::string>{"KKF", "KKK", "KRF", "KRK", "KRR"});
}

TEST_CASE("every rejected design carries a re-checkable Reject verdict") {
  RawDesignSpace space;
  // stride through the space to keep the property check fast but broad
  for (size_t i = 0; i < space.size(); i += 17) {
    const ConnectionAssignment a = space.at(i);
    const auto res = apply_constraints(a);
    if (res.accepted) continue;
    bool found_valid_reject = false;
    for (const auto& v : res.trace) {
      if (v.outcome != Verdict::Reject) continue;
      REQUIRE(!v.rewritten_to.has_value());
      if (predicate_violated(v.rule, a)) found_valid_reject = true;
    }
    CHECK(found_valid_reject);
  }
}

TEST_CASE("accepted KKR carries a rewrite verdict targeting KRR") {
  const auto kkr = table_compliant(Connection::Elastic, Connection::Elastic,
                                   Connection::Rigid);
  const auto res = apply_constraints(kkr);
  CHECK(res.accepted);
  bool rewrite_found = false;
  for (const auto& v : res.trace) {
    if (v.outcome == Verdict::Rewrite) {
      REQUIRE(v.rewritten_to.has_value());
      CHECK(v.rule == Rule::C7_6);
      CHECK(v.rewritten_to->label() == "KRR");
      rewrite_found = true;
    }
  }
  CHECK(rewrite_found);
}
