#include "doctest.h"

#include "dmtl/automata.hpp"
#include "dmtl/materialise.hpp"
#include "dmtl/parser.hpp"
#include "support/generators.hpp"
#include "testutil.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

using namespace dmtl;
using testutil::iv;
using testutil::ivTo;
using testutil::rat;

namespace {

Fact factOf(testutil::Instance& ins, std::string_view text) {
    Parser p(ins.syms);
    return p.parseFact(text);
}

ConsistencyVerdict verdictOf(std::string_view program, std::string_view dataset,
                             const AutomataOptions& opts = {}) {
    testutil::Instance ins = testutil::parseInstance(program, dataset);
    return checkConsistency(ins.program, ins.dataset, ins.syms, opts);
}

} // namespace

TEST_CASE("discretisation derives the grid from ranges and dataset anchors") {
    SUBCASE("integer chain example") {
        testutil::Instance ins = testutil::chainInstance();
        Discretisation d = buildDiscretisation(ins.program, ins.dataset);
        CHECK(d.programStep == rat("1"));
        CHECK(d.origin == rat("0"));
        CHECK(d.anchors == std::vector<Rational>{rat("0"), rat("1"), rat("2"), rat("3")});
        CHECK(d.gridStep == rat("1"));
    }
    SUBCASE("fractional endpoints refine both steps") {
        testutil::Instance ins = testutil::parseInstance(
            "A(X) <- DIAMONDMINUS[1/2,3/4] B(X)\n", "B(a)@[1/2,2/3]\n");
        Discretisation d = buildDiscretisation(ins.program, ins.dataset);
        CHECK(d.programStep == rat("1/4"));
        CHECK(d.anchors == std::vector<Rational>{rat("1/2"), rat("2/3")});
        CHECK(d.origin == rat("1/2"));
        CHECK(d.gridStep == rat("1/12")); // gcd(1/4, 2/3 - 1/2)
    }
    SUBCASE("zero endpoints do not shrink the program step") {
        testutil::Instance ins = testutil::parseInstance(
            "A(X) <- BOXMINUS[0,2] B(X) AND DIAMONDMINUS[0,3] B(X)\n", "B(a)@[0,1/2]\n");
        Discretisation d = buildDiscretisation(ins.program, ins.dataset);
        CHECK(d.programStep == rat("1"));
        CHECK(d.gridStep == rat("1/2"));
    }
    SUBCASE("infinite endpoints are ignored, finite lowers still count") {
        testutil::Instance ins =
            testutil::parseInstance("A(X) <- DIAMONDMINUS[2,inf) B(X)\n", "B(a)@[0,4]\n");
        Discretisation d = buildDiscretisation(ins.program, ins.dataset);
        CHECK(d.programStep == rat("2"));
        CHECK(d.anchors == std::vector<Rational>{rat("0"), rat("4")});
        CHECK(d.gridStep == rat("2"));
    }
    SUBCASE("defaults when there are no ranges and no facts") {
        testutil::Instance ins = testutil::parseInstance("A(X) <- B(X)\n");
        Discretisation d = buildDiscretisation(ins.program, ins.dataset);
        CHECK(d.programStep == rat("1"));
        CHECK(d.anchors == std::vector<Rational>{rat("0")});
        CHECK(d.origin == rat("0"));
        CHECK(d.gridStep == rat("1"));
    }
}

TEST_CASE("entailment reduction plants a probe fact and a guarded bottom-rule") {
    testutil::Instance ins = testutil::chainInstance();

    auto reduce = [&](std::string_view queryText) {
        return reduceEntailmentToInconsistency(ins.program, ins.dataset,
                                               factOf(ins, queryText), ins.syms);
    };

    SUBCASE("point query degenerates both guard ranges") {
        Reduction red = reduce("R1(c1,c2)@[4,4]");
        CHECK(red.probeTime == rat("4"));
        REQUIRE(red.program.rules.size() == ins.program.rules.size() + 1);
        const Rule& guard = red.program.rules.back();
        CHECK(guard.isBottomRule());
        REQUIRE(guard.body.size() == 3);

        CHECK(guard.body[0]->op == Op::Rel);
        CHECK(guard.body[0]->rel.pred == red.marker);
        CHECK(guard.body[0]->rel.isGround());
        CHECK(ins.syms.name(red.marker) == "R1_probe");
        CHECK(ins.syms.arityOf(red.marker) == 2);

        CHECK(guard.body[1]->op == Op::BoxMinus);
        CHECK(*guard.body[1]->range == iv("0", true, "0", true));
        CHECK(guard.body[1]->a->rel == factOf(ins, "R1(c1,c2)@[4,4]").atom);
        CHECK(guard.body[2]->op == Op::BoxPlus);
        CHECK(*guard.body[2]->range == iv("0", true, "0", true));

        REQUIRE(red.dataset.facts.size() == ins.dataset.facts.size() + 1);
        const Fact& probe = red.dataset.facts.back();
        CHECK(probe.atom.pred == red.marker);
        CHECK(probe.atom.args == guard.body[0]->rel.args);
        CHECK(probe.interval == Interval::point(rat("4")));
    }
    SUBCASE("open-left bounded query probes the midpoint") {
        Reduction red = reduce("R1(c1,c2)@(0,2]");
        CHECK(red.probeTime == rat("1"));
        const Rule& guard = red.program.rules.back();
        CHECK(*guard.body[1]->range == iv("0", true, "1", false)); // open: lo excluded
        CHECK(*guard.body[2]->range == iv("0", true, "1", true));  // closed: hi included
        CHECK(red.dataset.facts.back().interval == Interval::point(rat("1")));
    }
    SUBCASE("open-right bounded query keeps the guard open on the right") {
        Reduction red = reduce("R1(c1,c2)@[1,3)");
        CHECK(red.probeTime == rat("1"));
        const Rule& guard = red.program.rules.back();
        CHECK(*guard.body[1]->range == iv("0", true, "0", true));
        CHECK(*guard.body[2]->range == iv("0", true, "2", false));
    }
    SUBCASE("unbounded query yields an unbounded future guard") {
        Reduction red = reduce("R1(c1,c2)@[0,inf)");
        CHECK(red.probeTime == rat("0"));
        const Rule& guard = red.program.rules.back();
        CHECK(*guard.body[1]->range == iv("0", true, "0", true));
        CHECK(*guard.body[2]->range == ivTo("0", true));
    }
    SUBCASE("queries without a finite lower endpoint are rejected") {
        CHECK_THROWS_AS(reduce("R1(c1,c2)@(-inf,0]"), std::invalid_argument);
    }
}

TEST_CASE("consistency of directly violated and benign instances") {
    CHECK(verdictOf("BOTTOM <- P(X)\n", "P(a)@[0,1]\n") == ConsistencyVerdict::Inconsistent);
    CHECK(verdictOf("BOTTOM <- P(X)\n", "Q(a)@[0,1]\n") == ConsistencyVerdict::Consistent);
    CHECK(verdictOf("BOTTOM <- P(X)\n", "") == ConsistencyVerdict::Consistent);
    CHECK(verdictOf("Q(X) <- DIAMONDMINUS[1,1] P(X)\nBOTTOM <- Q(X)\n", "P(a)@[0,0]\n") ==
          ConsistencyVerdict::Inconsistent);
}

TEST_CASE("periodic models satisfy diverging propagation rules") {
    // The canonical model repeats P at every natural number; only a lasso in
    // the rightward automaton can certify it.
    CHECK(verdictOf("BOXPLUS[1,1] P(X) <- P(X)\n", "P(a)@[0,0]\n") ==
          ConsistencyVerdict::Consistent);
    CHECK(verdictOf("BOXMINUS[1,1] P(X) <- P(X)\n", "P(a)@[0,0]\n") ==
          ConsistencyVerdict::Consistent);

    // The same propagation eventually meets a far-away violation: the rule
    // checks must carry P across seven cells of the initial window.
    CHECK(verdictOf("BOXPLUS[1,1] P(X) <- P(X)\nBOTTOM <- P(X) AND Q(X)\n",
                    "P(a)@[0,0]\nQ(a)@[7,7]\n") == ConsistencyVerdict::Inconsistent);
    CHECK(verdictOf("BOXPLUS[1,1] P(X) <- P(X)\nBOTTOM <- P(X) AND Q(X)\n",
                    "P(a)@[0,0]\nQ(b)@[7,7]\n") == ConsistencyVerdict::Consistent);
}

TEST_CASE("reduced entailment queries are decided without materialising") {
    testutil::Instance ins = testutil::chainInstance();

    SUBCASE("an entailed query reduces to inconsistency") {
        Reduction red = reduceEntailmentToInconsistency(ins.program, ins.dataset,
                                                        factOf(ins, "R1(c1,c2)@[4,4]"), ins.syms);
        CHECK(checkConsistency(red.program, red.dataset, ins.syms) ==
              ConsistencyVerdict::Inconsistent);
    }
    SUBCASE("a non-entailed query on a diverging instance reduces to consistency") {
        Reduction red = reduceEntailmentToInconsistency(ins.program, ins.dataset,
                                                        factOf(ins, "R6(c9)@[0,0]"), ins.syms);
        AutomataStats stats;
        CHECK(checkConsistency(red.program, red.dataset, ins.syms, {}, &stats) ==
              ConsistencyVerdict::Consistent);
        CHECK(stats.statesVisited > 0);
        CHECK(stats.initialWindows >= 1);
    }
}

TEST_CASE("state budgets and cancellation both abort the search") {
    testutil::Instance ins = testutil::chainInstance();
    // The non-entailed reduction is the expensive direction: proving it
    // consistent requires an explored lasso, which a five-state budget cannot
    // reach. (The entailed one collapses to a propagation conflict instantly.)
    Reduction red = reduceEntailmentToInconsistency(ins.program, ins.dataset,
                                                    factOf(ins, "R6(c9)@[0,0]"), ins.syms);

    AutomataOptions tiny;
    tiny.maxStates = 5;
    CHECK(checkConsistency(red.program, red.dataset, ins.syms, tiny) ==
          ConsistencyVerdict::BudgetExceeded);

    AutomataOptions cancelled;
    cancelled.cancelled = [] { return true; };
    CHECK(checkConsistency(red.program, red.dataset, ins.syms, cancelled) ==
          ConsistencyVerdict::BudgetExceeded);
}

TEST_CASE("unbounded since and until need a closed lower endpoint") {
    SUBCASE("closed-lower unbounded since is decided exactly") {
        // A = B SINCE[1,inf) C holds exactly at 1 here, so the falsity rule fires.
        const char* prog = "A(X) <- B(X) SINCE[1,inf) C(X)\nBOTTOM <- A(X)\n";
        CHECK(verdictOf(prog, "B(a)@[0,1]\nC(a)@[0,0]\n") == ConsistencyVerdict::Inconsistent);
        CHECK(verdictOf(prog, "B(a)@[0,1]\n") == ConsistencyVerdict::Consistent);
    }
    SUBCASE("open-lower unbounded ranges on binary operators are rejected") {
        testutil::Instance since = testutil::parseInstance(
            "A(X) <- B(X) SINCE(1,inf) C(X)\nBOTTOM <- A(X)\n", "B(a)@[0,1]\nC(a)@[0,0]\n");
        CHECK_THROWS_AS(checkConsistency(since.program, since.dataset, since.syms),
                        std::invalid_argument);

        testutil::Instance until = testutil::parseInstance(
            "A(X) <- B(X) UNTIL(0,inf) C(X)\nBOTTOM <- A(X)\n", "B(a)@[0,1]\nC(a)@[2,2]\n");
        CHECK_THROWS_AS(checkConsistency(until.program, until.dataset, until.syms),
                        std::invalid_argument);
    }
}

TEST_CASE("verdicts agree with decisive materialisation on random instances") {
    std::size_t decisive = 0, consistent = 0, inconsistent = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        CAPTURE(seed);
        testutil::Instance ins = gen::consistencyInstance(seed);

        MatOptions mo;
        mo.mode = MatMode::Seminaive;
        mo.maxSteps = 30;
        MatResult ground = materialise(ins.program, ins.dataset, mo);
        if (ground.outcome != MatOutcome::Fixpoint && ground.outcome != MatOutcome::Inconsistent)
            continue; // indecisive within the step bound; no ground truth
        ++decisive;

        ConsistencyVerdict v = checkConsistency(ins.program, ins.dataset, ins.syms);
        REQUIRE(v != ConsistencyVerdict::BudgetExceeded);
        if (ground.outcome == MatOutcome::Inconsistent) {
            ++inconsistent;
            CHECK(v == ConsistencyVerdict::Inconsistent);
        } else {
            ++consistent;
            CHECK(v == ConsistencyVerdict::Consistent);
        }
    }
    CHECK(decisive >= 8);
    CHECK(consistent >= 1);
    CHECK(inconsistent >= 1);
}
