#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "logicdec/connectives.hpp"
#include "logicdec/error.hpp"
#include "logicdec/prover.hpp"

using namespace logicdec;
using logicdec::testing::make_facts;
using logicdec::testing::rules_path;

namespace {

TruthVector tv(std::vector<double> v) { return TruthVector(std::move(v)); }

std::vector<double> vals(const TruthVector& t) { return {t.values().begin(), t.values().end()}; }

double connective(ExprKind kind, std::vector<double> in) {
  std::vector<TruthVector> children;
  for (double x : in) children.push_back(tv({x}));
  switch (kind) {
    case ExprKind::Or:
      return or_vec(children)[0];
    case ExprKind::AndAvg:
      return and_avg_vec(children)[0];
    default:
      return and_luk_vec(children)[0];
  }
}

// <s> learning classroom students enjoy dog
FactBase classroom_facts() {
  return make_facts({"<s>", "learning", "classroom", "students", "enjoy", "dog"}, {0, 1, 2, 3, 4, 5}, {{1, 2, 1.0}});
}

}  // namespace

TEST_CASE("connective arithmetic") {
  CHECK(connective(ExprKind::Or, {0.3, 0.5}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(connective(ExprKind::AndAvg, {0.3, 0.5}) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(connective(ExprKind::AndLuk, {0.3, 0.5}) == 0.0);
  CHECK(not_vec(tv({0.3}))[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(connective(ExprKind::AndAvg, {0.0, 1.0}) == 0.5);
  CHECK(connective(ExprKind::Or, {0.7, 0.6}) == 1.0);
  CHECK(connective(ExprKind::AndLuk, {0.9, 0.8, 0.7}) == doctest::Approx(0.4));
  CHECK(connective(ExprKind::AndAvg, {0.1, 0.2, 0.6}) == doctest::Approx(0.3));
  std::vector<TruthVector> mismatched{tv({0.1}), tv({0.1, 0.2})};
  CHECK_THROWS_AS(or_vec(mismatched), DimensionError);
  CHECK_THROWS_AS(TruthVector(std::vector<double>{1.5}), DimensionError);
}

TEST_CASE("boolean truth tables") {
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      CHECK(connective(ExprKind::Or, {double(a), double(b)}) == double(a || b));
      CHECK(connective(ExprKind::AndLuk, {double(a), double(b)}) == double(a && b));
      for (int c = 0; c <= 1; ++c) {
        CHECK(connective(ExprKind::Or, {double(a), double(b), double(c)}) == double(a || b || c));
        CHECK(connective(ExprKind::AndLuk, {double(a), double(b), double(c)}) == double(a && b && c));
      }
    }
    CHECK(not_vec(tv({double(a)}))[0] == double(!a));
  }
}

TEST_CASE("or fold equals closed form") {
  logicdec::testing::Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 16;
    const double scale = trial % 3 == 0 ? 0.1 : 1.0;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(u(rng) * scale);
    double fold = xs[0];
    double sum = xs[0];
    for (int i = 1; i < n; ++i) {
      fold = soft_or(fold, xs[i]);
      sum += xs[i];
    }
    CHECK(fold == std::min(1.0, sum));
    CHECK(connective(ExprKind::Or, xs) == std::min(1.0, sum));
    double luk = xs[0];
    for (int i = 1; i < n; ++i) luk = soft_and_luk(luk, xs[i]);
    CHECK(connective(ExprKind::AndLuk, xs) == luk);
  }
}

TEST_CASE("connectives are monotone and bounded") {
  logicdec::testing::Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(u(rng));
    std::vector<double> ys = xs;
    const int k = trial % n;
    ys[k] = std::min(1.0, xs[k] + u(rng) * (1.0 - xs[k]));
    for (ExprKind kind : {ExprKind::Or, ExprKind::AndAvg, ExprKind::AndLuk}) {
      const double a = connective(kind, xs);
      const double b = connective(kind, ys);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      CHECK(b >= a);
    }
    CHECK(not_vec(tv({ys[k]}))[0] <= not_vec(tv({xs[k]}))[0]);
  }
}

TEST_CASE("commongen rows on a six-token vocabulary") {
  const FactBase f = classroom_facts();
  const RuleProgram soft = load_rule_file(rules_path("commongen.rules"));
  const RuleProgram hard = load_rule_file(rules_path("commongen_hard.rules"));
  EvalContext ctx(f, {{"C", {2}}, {"Prefix", {0}}});
  CHECK(vals(prove(soft, "R", Domain::vocabulary(), ctx)) == std::vector<double>{0.5, 1, 1, 0.5, 0.5, 0.5});
  CHECK(vals(prove(hard, "R", Domain::vocabulary(), ctx)) == std::vector<double>{0, 1, 1, 0, 0, 0});
  for (TokenId w = 0; w < 6; ++w) CHECK(prove_scalar(soft, "R", w, ctx) == prove(soft, "R", Domain::vocabulary(), ctx)[w]);

  EvalContext covered(f, {{"C", {2}}, {"Prefix", {0, 2}}});
  CHECK(vals(prove(soft, "R", Domain::vocabulary(), covered)) == std::vector<double>{0, 0.5, 0.5, 0, 0, 0});
  CHECK(vals(prove(hard, "R", Domain::vocabulary(), covered)) == std::vector<double>(6, 0.0));

  const FactBase bare = make_facts({"<s>", "learning", "classroom", "students", "enjoy", "dog"}, {0, 1, 2, 3, 4, 5}, {});
  EvalContext empty_kg(bare, {{"C", {2}}, {"Prefix", {0}}});
  CHECK(vals(prove(soft, "R", Domain::vocabulary(), empty_kg)) == std::vector<double>{0.5, 0.5, 1, 0.5, 0.5, 0.5});

  EvalContext two(f, {{"C", {2, 3}}, {"Prefix", {0}}});
  // Or over two averaging gates saturates: learning 1 + 0.5.
  CHECK(vals(prove(soft, "R", Domain::vocabulary(), two)) == std::vector<double>{1, 1, 1, 1, 1, 1});
  CHECK(vals(prove(hard, "R", Domain::vocabulary(), two)) == std::vector<double>{0, 1, 1, 1, 0, 0});
}

TEST_CASE("Y and Persona rows") {
  const FactBase f = make_facts({"<s>", "run", "ran", "running", "dog", "pets"}, {0, 1, 1, 1, 2, 3}, {{4, 5, 1.0}});
  const RuleProgram cg = load_rule_file(rules_path("commongen.rules"));
  EvalContext ctx(f, {{"C", {3}}, {"Prefix", {0, 2}}});
  CHECK(prove_scalar(cg, "Y", 3, ctx) == 1.0);
  CHECK(prove(cg, "Y", Domain::vocabulary(), ctx)[1] == 1.0);
  CHECK(prove(cg, "Y", Domain::vocabulary(), ctx)[4] == 0.0);

  const RuleProgram pc = load_rule_file(rules_path("personachat.rules"));
  EvalContext persona(f, {{"P", {5}}, {"U", {4}}});
  CHECK(prove_scalar(pc, "Persona", 5, persona) == 1.0);
  CHECK(prove(pc, "Persona", Domain::vocabulary(), persona)[5] == 1.0);
}

TEST_CASE("Common finds the bridging word") {
  // <s> dog pets garden cat tree
  const FactBase f = make_facts({"<s>", "dog", "pets", "garden", "cat", "tree"}, {0, 1, 2, 3, 4, 5},
                                {{1, 2, 1.0}, {1, 3, 1.0}, {4, 2, 1.0}});
  const RuleProgram pc = load_rule_file(rules_path("personachat.rules"));
  EvalContext ctx(f, {{"P", {2}}, {"U", {3}}});
  const TruthVector common = prove(pc, "Common", Domain::vocabulary(), ctx);
  CHECK(common[1] == 1.0);
  for (TokenId w = 0; w < 6; ++w) {
    if (w != 1) CHECK(common[w] < 1.0);
    CHECK(prove_scalar(pc, "Common", w, ctx) == common[w]);
  }
  CHECK(common[4] == 0.5);
  const TruthVector r = prove(pc, "R", Domain::vocabulary(), ctx);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 1.0);
}

TEST_CASE("domains") {
  const FactBase f = classroom_facts();
  const RuleProgram soft = load_rule_file(rules_path("commongen.rules"));
  EvalContext ctx(f, {{"C", {2}}, {"Prefix", {0}}});
  const TruthVector all = prove(soft, "R", Domain::vocabulary(), ctx);
  const TruthVector pre = prove(soft, "R", Domain::prefix({1, 1, 5}), ctx);
  CHECK(vals(pre) == std::vector<double>{all[1], all[1], all[5]});
  CHECK(pre.domain() == DomainKind::PrefixPositions);
  const TruthVector tgt = prove(soft, "R", Domain::targets({2}), ctx);
  CHECK(vals(tgt) == std::vector<double>{1.0});
  CHECK(all.domain() == DomainKind::Vocabulary);
}

TEST_CASE("prove errors") {
  const FactBase f = classroom_facts();
  const RuleProgram soft = load_rule_file(rules_path("commongen.rules"));
  try {
    prove(soft, "R", Domain::vocabulary(), EvalContext(f, {{"Prefix", {0}}}));
    FAIL("expected BindError");
  } catch (const BindError& e) {
    CHECK(e.kind() == BindError::Kind::UnboundSet);
  }
  try {
    prove(soft, "R", Domain::vocabulary(), EvalContext(f, {{"C", {}}, {"Prefix", {0}}}));
    FAIL("expected BindError");
  } catch (const BindError& e) {
    CHECK(e.kind() == BindError::Kind::EmptyDomain);
  }
  CHECK_THROWS_AS(prove(soft, "Nope", Domain::vocabulary(), EvalContext(f, {})), BindError);
  CHECK_THROWS_AS(prove(soft, "Rel", Domain::vocabulary(), EvalContext(f, {})), BindError);
  CHECK_THROWS_AS(prove(soft, "R", Domain::custom({9}), EvalContext(f, {{"C", {2}}, {"Prefix", {0}}})), DimensionError);
  CHECK_THROWS_AS(prove(soft, "R", Domain::vocabulary(), EvalContext(f, {{"C", {7}}, {"Prefix", {0}}})), DimensionError);
}

TEST_CASE("coverage-only prefix detection") {
  CHECK(prefix_enters_only_through_coverage(load_rule_file(rules_path("commongen.rules")), "R"));
  CHECK(prefix_enters_only_through_coverage(load_rule_file(rules_path("commongen_hard.rules")), "R"));
  CHECK(prefix_enters_only_through_coverage(load_rule_file(rules_path("personachat.rules")), "R"));
  CHECK_FALSE(prefix_enters_only_through_coverage(parse_program("R(x) :- exists y in Prefix, Edge(x, y)"), "R"));
  CHECK_FALSE(prefix_enters_only_through_coverage(parse_program("R(x) :- exists y in Prefix, Equal(x, y)"), "R"));
}

TEST_CASE("vector prover matches the scalar oracle on random cases") {
  logicdec::testing::Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = logicdec::testing::random_case(rng);
    CAPTURE(c.source);
    const EvalContext ctx(c.facts, c.sets);
    const TruthVector v = prove(c.program, "R", c.domain, ctx);
    REQUIRE(v.size() == c.domain.size(c.facts));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const TokenId w = c.domain.kind == DomainKind::Vocabulary ? static_cast<TokenId>(i) : c.domain.tokens[i];
      const double s = prove_scalar(c.program, "R", w, ctx);
      worst = std::max(worst, std::abs(v[i] - s));
      CHECK(v[i] >= 0.0);
      CHECK(v[i] <= 1.0);
    }
    CHECK(prove(c.program, "R", c.domain, ctx) == v);
  }
  CHECK(worst <= 1e-9);
}
