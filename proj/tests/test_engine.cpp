#include "doctest.h"

#include "dmtl/engine.hpp"
#include "dmtl/parser.hpp"
#include "testutil.hpp"

#include <string>
#include <string_view>

using namespace dmtl;

namespace {

Fact factOf(testutil::Instance& ins, std::string_view text) {
    Parser p(ins.syms);
    return p.parseFact(text);
}

DecideResult decideOn(testutil::Instance& ins, std::string_view queryText,
                      DecideOptions opts = {}) {
    Fact query = factOf(ins, queryText);
    return decide(ins.program, ins.dataset, query, ins.syms, opts);
}

} // namespace

TEST_CASE("queries answered before the recursive flag flips stay pre-materialisation") {
    // Restricting to R6 keeps the whole chain program, whose recursive flag
    // only flips at step 3; the query is already derived at step 2, so the
    // bounded materialisation settles it before any race is spawned.
    testutil::Instance ins = testutil::chainInstance();
    DecideResult r = decideOn(ins, "R6(c2)@[2,2]");
    CHECK(r.outcome == DecideOutcome::Entailed);
    CHECK(r.provenance == DecideProvenance::PreMaterialisation);
    CHECK(r.steps == 2);
    CHECK(!r.materialisationCancelled);
    CHECK(engineActiveTasks() == 0);
}

TEST_CASE("entailed chain queries survive an early flag flip via the race") {
    // Restricting to R1 keeps only the self-propagating rule, so the flag
    // flips already at step 1 and the query is settled in the race phase
    // instead: whichever arm answers, the verdict and step bound must hold.
    testutil::Instance ins = testutil::chainInstance();
    DecideResult r = decideOn(ins, "R1(c1,c2)@[4,4]");
    CHECK(r.outcome == DecideOutcome::Entailed);
    CHECK(r.provenance != DecideProvenance::PreMaterialisation);
    CHECK(r.steps <= 3);
    if (r.provenance == DecideProvenance::MaterialisationThread) {
        CHECK(r.steps == 3);
        CHECK(!r.materialisationCancelled);
    }
    CHECK(engineActiveTasks() == 0);
}

TEST_CASE("non-entailment on a diverging instance falls to the automata arm") {
    // Materialisation alone never terminates here: R1 propagates forever and
    // R6(c9) never appears. The automata arm must answer and cancel it.
    testutil::Instance ins = testutil::chainInstance();
    DecideResult r = decideOn(ins, "R6(c9)@[0,0]");
    CHECK(r.outcome == DecideOutcome::NotEntailed);
    CHECK(r.provenance == DecideProvenance::AutomataThread);
    CHECK(r.materialisationCancelled);
    CHECK(engineActiveTasks() == 0);
}

TEST_CASE("the single-thread path reaches the same verdicts") {
    testutil::Instance ins = testutil::chainInstance();
    DecideOptions opts;
    opts.singleThread = true;

    DecideResult r = decideOn(ins, "R6(c9)@[0,0]", opts);
    CHECK(r.outcome == DecideOutcome::NotEntailed);
    CHECK(r.provenance == DecideProvenance::AutomataThread);

    DecideResult e = decideOn(ins, "R1(c1,c2)@[4,4]", opts);
    CHECK(e.outcome == DecideOutcome::Entailed);
    CHECK(engineActiveTasks() == 0);
}

TEST_CASE("inconsistent instances answer before any query logic") {
    testutil::Instance ins = testutil::parseInstance(
        "A(X) <- DIAMONDMINUS[0,1] B(X)\nBOTTOM <- A(X)\n", "B(b)@[0,1]\nC(b)@[5,5]\n");
    DecideResult r = decideOn(ins, "C(b)@[5,5]");
    CHECK(r.outcome == DecideOutcome::Inconsistent);
    CHECK(r.provenance == DecideProvenance::PreMaterialisation);
}

TEST_CASE("queries outside the restricted fragment are still answered") {
    // The query predicate depends on nothing; restriction leaves an empty
    // program, and the dataset alone decides.
    testutil::Instance ins = testutil::chainInstance();
    DecideResult held = decideOn(ins, "R2(c1,c2)@[1,2]");
    CHECK(held.outcome == DecideOutcome::Entailed);
    DecideResult missed = decideOn(ins, "R2(c1,c2)@[0,0]");
    CHECK(missed.outcome == DecideOutcome::NotEntailed);
}

TEST_CASE("the wall-clock budget bounds undecidable configurations") {
    // Materialisation diverges, and the recursive open-lower unbounded SINCE
    // survives every rule drop, so it reaches the automata arm and disables
    // it; only the watchdog (or the single-thread step bound) ends the run.
    const char* prog = "R1(X,Y) <- DIAMONDMINUS[1,1] R1(X,Y)\n"
                       "A(X) <- A(X) SINCE(1,inf) C(X)\n"
                       "B(X) <- R1(X,X) AND A(X)\n";
    const char* data = "R1(c1,c1)@[0,1]\nA(c1)@[0,2]\nC(c1)@[0,0]\n";

    for (bool single : {false, true}) {
        CAPTURE(single);
        testutil::Instance ins = testutil::parseInstance(prog, data);
        DecideOptions opts;
        opts.maxSteps = 50;
        opts.budgetSeconds = 0.2;
        opts.singleThread = single;
        DecideResult r = decideOn(ins, "B(c1)@[100,100]", opts);
        CHECK(r.outcome == DecideOutcome::BudgetExceeded);
        CHECK(r.partialStore.has_value());
        CHECK(engineActiveTasks() == 0);
    }
}
