#include <doctest.h>

#include <cstdint>
#include <sstream>

#include "fleetopt/generator.hpp"
#include "fleetopt/greedy.hpp"
#include "fleetopt/milp.hpp"
#include "support.hpp"

using namespace fleetopt;
using fleetopt::testing::Builder;

namespace {

std::size_t count_prefix(const MilpModel& m, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& v : m.vars) n += v.name.starts_with(prefix);
  return n;
}

double row_value(const MilpConstraint& c, const std::vector<double>& x) {
  double lhs = 0.0;
  for (const auto& t : c.terms) lhs += t.coef * x[t.var];
  return lhs;
}

bool satisfied(const MilpConstraint& c, const std::vector<double>& x, double tol = 1e-6) {
  const double lhs = row_value(c, x);
  switch (c.sense) {
    case Sense::le: return lhs <= c.rhs + tol;
    case Sense::ge: return lhs >= c.rhs - tol;
    case Sense::eq: return std::abs(lhs - c.rhs) <= tol;
  }
  return false;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Instance generated(int lines, std::uint64_t seed) {
  GeneratorParams p;
  p.lines = lines;
  p.seed = seed;
  return Instance(generate_instance(p));
}

}  // namespace

TEST_SUITE("milp") {
  TEST_CASE("smallest model") {
    Builder b;
    b.location("A").diesel("v1").trip("t1", "A", "A", 0, 600, 5, 5);
    const MilpModel m = build_milp(b.build());
    CHECK(count_prefix(m, "a_") == 1);
    CHECK(count_prefix(m, "m_") == 0);
    REQUIRE(m.constraints.size() == 1);
    CHECK(m.constraints[0].name == "trip_t1");
    CHECK(m.constraints[0].sense == Sense::eq);

    const std::string lp = lp_text(m);
    const auto begin = lp.find("Subject To\n");
    const auto end = lp.find("Bounds\n");
    REQUIRE(begin != std::string::npos);
    std::istringstream rows(lp.substr(begin, end - begin));
    int hits = 0;
    for (std::string line; std::getline(rows, line);) hits += line.ends_with("a_v1_t1 = 1");
    CHECK(hits == 1);
  }

  TEST_CASE("forbidden pair on every vehicle") {
    Builder b;
    b.location("A").diesel("v1").diesel("v2");
    b.trip("t1", "A", "A", 0, 600, 5, 5).trip("t2", "A", "A", 300, 900, 5, 5);
    const MilpModel m = build_milp(b.build());
    for (const std::string v : {"v1", "v2"}) {
      bool found = false;
      for (const auto& c : m.constraints) {
        if (!c.name.starts_with("fb_") || c.terms.size() != 2) continue;
        const auto a = *m.find("a_" + v + "_t1");
        const auto b2 = *m.find("a_" + v + "_t2");
        if (c.terms[0].var == a && c.terms[1].var == b2 && c.sense == Sense::le && c.rhs == 1.0) found = true;
      }
      CHECK_MESSAGE(found, v);
    }
  }

  TEST_CASE("linking variables cover every ordered task pair") {
    Builder b(100.0);
    b.grid(0, 3 * 3600, 3600).location("A").location("depot").ev("E", 50.0);
    b.trip("t1", "A", "A", 600, 1200, 5, 5).trip("t2", "A", "A", 5000, 6000, 5, 5);
    b.link("A", "depot", 300, 1, 1).pole("P", "depot", 40);
    const Instance inst = b.build();
    const MilpModel m = build_milp(inst);
    // Two trips and three charging slots: C(5, 2) pairs.
    CHECK(count_prefix(m, "m_") == 10);
    CHECK(projected_var_count(inst) == m.vars.size());
  }

  TEST_CASE("variable cap") {
    const Instance inst = generated(2, 1);
    CHECK_THROWS_AS(build_milp(inst, 100), ModelTooLarge);
  }

  TEST_CASE("round trip through LP text") {
    for (int lines = 1; lines <= 2; ++lines) {
      const MilpModel m = build_milp(generated(lines, 3));
      const MilpModel back = parse_lp(lp_text(m));
      CHECK(same_model(m, back));
      CHECK(lp_text(back) == lp_text(m));
    }
  }

  TEST_CASE("same_model notices a changed coefficient") {
    MilpModel m = build_milp(generated(1, 2));
    MilpModel other = parse_lp(lp_text(m));
    other.constraints.back().terms.front().coef += 1e-3;
    CHECK_FALSE(same_model(m, other));
  }

  TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(parse_lp("Minimize\n obj: x\nSubject To\n c1: x >=\nEnd\n"), LpParseError);
    CHECK_THROWS_AS(parse_lp("Subject To\n c1: 2 x <= 1\n"), LpParseError);
  }

  TEST_CASE("snapshot of line1 seed 1") {
    const std::string lp = lp_text(build_milp(generated(1, 1)));
    CHECK(lp == lp_text(build_milp(generated(1, 1))));
    CHECK(fnv1a(lp) == FLEETOPT_LP_SNAPSHOT);
  }

  TEST_CASE("a feasible solution satisfies every row") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Instance inst = generated(1, seed);
      const MilpModel m = build_milp(inst);
      const Solution sol = greedy_assign(inst);
      const std::vector<double> x = implied_values(inst, m, sol);
      for (const auto& c : m.constraints) CHECK_MESSAGE(satisfied(c, x), c.name);
      for (std::size_t i = 0; i < m.vars.size(); ++i) {
        CHECK(x[i] >= m.vars[i].lower - 1e-9);
        CHECK(x[i] <= m.vars[i].upper + 1e-9);
      }
      double obj = 0.0;
      for (const auto& t : m.objective) obj += t.coef * x[t.var];
      CHECK(obj == doctest::Approx(solution_cost(inst, sol)));
    }
  }

  TEST_CASE("an overlapping assignment breaks a row") {
    Builder b;
    b.location("A").diesel("v1").diesel("v2");
    b.trip("t1", "A", "A", 0, 600, 5, 5).trip("t2", "A", "A", 300, 900, 5, 5);
    const Instance inst = b.build();
    const MilpModel m = build_milp(inst);
    const std::vector<double> x = implied_values(inst, m, Solution{{{0, 0}, {0, 1}}, {}});
    bool broken = false;
    for (const auto& c : m.constraints) broken |= !satisfied(c, x);
    CHECK(broken);
  }

  TEST_CASE("identifier sanitizing") {
    CHECK(sanitize_id("L01-A.2") == "L01_A_2");
    CHECK(sanitize_id("ok_9") == "ok_9");
  }
}
