#include "doctest.h"

#include "dmtl/eval.hpp"
#include "dmtl/materialise.hpp"
#include "dmtl/parser.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"
#include "testutil.hpp"

#include <string>

using namespace dmtl;
using testutil::ga;
using testutil::iv;
using testutil::rat;
using testutil::seq;

namespace {

// Parses a ground body atom in the instance's symbol table. The padding
// conjunct keeps bodies such as a bare TOP past the vacuous-rule check; the
// atom under test is always the first conjunct.
AtomPtr groundAtom(SymbolTable& syms, const std::string& text) {
    Parser p(syms);
    return p.parseProgram("ZZeval <- " + text + " AND ZZpad(zzc)\n").rules[0].body[0];
}

FactStore storeOf(testutil::Instance& ins, std::string_view datasetText) {
    Parser p(ins.syms);
    return FactStore::fromDataset(p.parseDataset(datasetText));
}

} // namespace

TEST_CASE("metric atom evaluation on the chain dataset") {
    testutil::Instance ins = testutil::chainInstance();
    FactStore store = FactStore::fromDataset(ins.dataset);

    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "TOP")) ==
          seq({Interval::everything()}));
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "BOTTOM")).empty());
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "R1(c1,c2)")) ==
          seq({iv("0", true, "1", true)}));
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "R1(c1,c1)")).empty());

    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "DIAMONDMINUS[1,1] R1(c1,c2)")) ==
          seq({iv("1", true, "2", true)}));
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "BOXPLUS[1,2] R3(c2,c3)")) ==
          seq({Interval::point(rat("1"))}));
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "DIAMONDMINUS[0,1] R5(c2)")) ==
          seq({iv("0", true, "2", true)}));
    CHECK(evalMetricAtom(store, *groundAtom(ins.syms, "R5(c2) SINCE[0,1] R1(c1,c2)")) ==
          seq({iv("0", true, "1", true)}));
}

TEST_CASE("rule instances reproduce the first derivation round") {
    testutil::Instance ins = testutil::chainInstance();
    FactStore store = FactStore::fromDataset(ins.dataset);
    std::set<SymbolId> universe = constantUniverse(ins.program, store);

    // Recursive propagation: one grounding, meet shifted one step forward.
    auto inst1 = instances(store, ins.program.rules[0], universe);
    REQUIRE(inst1.size() == 1);
    CHECK(inst1[0].meet == iv("1", true, "2", true));
    auto [head1, derived1] = deriveHead(ins.program.rules[0], inst1[0].sigma, inst1[0].meet);
    CHECK(printRelAtom(ins.syms, head1) == "R1(c1,c2)");
    CHECK(derived1 == iv("1", true, "2", true));

    // The box-headed join: meet [1,1], pushed to [2,2] by the head box.
    auto inst2 = instances(store, ins.program.rules[1], universe);
    REQUIRE(inst2.size() == 1);
    REQUIRE(inst2[0].bodyIntervals.size() == 2);
    CHECK(inst2[0].bodyIntervals[0] == iv("1", true, "2", true));
    CHECK(inst2[0].bodyIntervals[1] == Interval::point(rat("1")));
    CHECK(inst2[0].meet == Interval::point(rat("1")));
    auto [head2, derived2] = deriveHead(ins.program.rules[1], inst2[0].sigma, inst2[0].meet);
    CHECK(printRelAtom(ins.syms, head2) == "R5(c2)");
    CHECK(derived2 == Interval::point(rat("2")));

    // The diamond lookback over R5.
    auto inst3 = instances(store, ins.program.rules[2], universe);
    REQUIRE(inst3.size() == 1);
    auto [head3, derived3] = deriveHead(ins.program.rules[2], inst3[0].sigma, inst3[0].meet);
    CHECK(printRelAtom(ins.syms, head3) == "R4(c2)");
    CHECK(derived3 == iv("0", true, "2", true));

    // The three-atom join has no R4 yet.
    CHECK(instances(store, ins.program.rules[3], universe).empty());
}

TEST_CASE("the three-atom join fires on the second-round store") {
    testutil::Instance ins = testutil::chainInstance();
    FactStore store = storeOf(ins, "R1(c1,c2)@[0,3]\n"
                                   "R2(c1,c2)@[1,2]\n"
                                   "R3(c2,c3)@[2,3]\n"
                                   "R4(c2)@[0,3]\n"
                                   "R5(c2)@[0,1]\n"
                                   "R5(c2)@[2,2]\n"
                                   "R6(c2)@[2,2]\n");
    std::set<SymbolId> universe = constantUniverse(ins.program, store);

    auto inst = instances(store, ins.program.rules[3], universe);
    REQUIRE(inst.size() == 1);
    REQUIRE(inst[0].bodyIntervals.size() == 3);
    CHECK(inst[0].bodyIntervals[0] == iv("0", true, "3", true));
    CHECK(inst[0].bodyIntervals[1] == iv("2", true, "3", true));
    CHECK(inst[0].bodyIntervals[2] == Interval::point(rat("2")));
    CHECK(inst[0].meet == Interval::point(rat("2")));
    auto [head, derived] = deriveHead(ins.program.rules[3], inst[0].sigma, inst[0].meet);
    CHECK(printRelAtom(ins.syms, head) == "R6(c2)");
    CHECK(derived == Interval::point(rat("2")));
}

TEST_CASE("nested head boxes compose outermost first") {
    testutil::Instance ins =
        testutil::parseInstance("BOXPLUS[1,2] BOXMINUS[0,1] A(X) <- B(X)\n", "B(b)@[0,0]\n");
    FactStore store = FactStore::fromDataset(ins.dataset);
    auto inst = instances(store, ins.program.rules[0], constantUniverse(ins.program, store));
    REQUIRE(inst.size() == 1);
    auto [head, derived] = deriveHead(ins.program.rules[0], inst[0].sigma, inst[0].meet);
    CHECK(printRelAtom(ins.syms, head) == "A(b)");
    // [0,0] pushed to [1,2] by the future box, then widened back to [0,2].
    CHECK(derived == iv("0", true, "2", true));
}

TEST_CASE("the semi-naive filter keeps only delta-touching instances") {
    testutil::Instance ins = testutil::chainInstance();
    FactStore baseline = FactStore::fromDataset(ins.dataset);
    std::set<SymbolId> universe = constantUniverse(ins.program, baseline);

    // Nothing new relative to itself.
    for (const Rule& r : ins.program.rules) {
        CHECK(instancesRelative(baseline, baseline, r, universe).empty());
    }

    // Extending R1 re-enables only instances that touch the extension.
    FactStore grown = FactStore::fromDataset(ins.dataset);
    grown.insertCoalescing(ga(ins.syms, "R1", {"c1", "c2"}), iv("1", true, "2", true));
    auto rel = instancesRelative(grown, baseline, ins.program.rules[0], universe);
    REQUIRE(rel.size() == 1);
    CHECK(rel[0].meet == iv("1", true, "3", true));
    CHECK(instancesRelative(grown, baseline, ins.program.rules[1], universe).empty());
    CHECK(instancesRelative(grown, baseline, ins.program.rules[2], universe).empty());
}

TEST_CASE("variables under a zero-lag continuity operand range over the universe") {
    // Y occurs only in the continuity operand of a zero-lag SINCE; the rule is
    // safe (head uses X) but Y never touches the store, so groundings take Y
    // from the constant universe.
    testutil::Instance ins = testutil::parseInstance("A(X) <- B(X) AND C(Y) SINCE[0,1] B(X)\n",
                                                     "B(b1)@[0,1]\nD(b2)@[0,0]\n");
    FactStore store = FactStore::fromDataset(ins.dataset);
    std::set<SymbolId> universe = constantUniverse(ins.program, store);
    auto inst = instances(store, ins.program.rules[0], universe);
    // One grounding per universe constant for Y, all with the zero-lag meet.
    CHECK(inst.size() == 2);
    for (const auto& i : inst) CHECK(i.meet == iv("0", true, "1", true));
}

TEST_CASE("structural time bounds on the second-round store") {
    testutil::Instance ins = testutil::chainInstance();
    FactStore store = storeOf(ins, "R1(c1,c2)@[0,3]\n"
                                   "R2(c1,c2)@[1,2]\n"
                                   "R3(c2,c3)@[2,3]\n"
                                   "R4(c2)@[0,3]\n"
                                   "R5(c2)@[0,1]\n"
                                   "R5(c2)@[2,2]\n"
                                   "R6(c2)@[2,2]\n");

    // Non-ground atoms bound over every grounding at once.
    Parser p(ins.syms);
    Program shapes = p.parseProgram("ZZ <- BOXMINUS[0,2] R4(Y) AND R5(Y)\n");

    CHECK(atomLatestTime(store, *shapes.rules[0].body[0]) == TimePoint(rat("3")));
    CHECK(atomLatestTime(store, *shapes.rules[0].body[1]) == TimePoint(rat("2")));
    CHECK(atomEarliestTime(store, *shapes.rules[0].body[1]) == TimePoint(rat("0")));

    // An atom over an absent predicate can never hold.
    Program absent = p.parseProgram("ZZ <- R9(X)\n");
    CHECK(atomLatestTime(store, *absent.rules[0].body[0]) == TimePoint::negInf());
    CHECK(atomEarliestTime(store, *absent.rules[0].body[0]) == TimePoint::posInf());

    // Diamonds shift the bound by their range.
    Program dia = p.parseProgram("ZZ <- DIAMONDMINUS[1,2] R5(Y)\n");
    CHECK(atomLatestTime(store, *dia.rules[0].body[0]) == TimePoint(rat("4")));
}

TEST_CASE("joinBody intersects the whole body") {
    std::vector<IntervalSeq> sets{
        seq({iv("0", true, "3", true)}),
        seq({iv("1", true, "2", true), iv("5", true, "6", true)}),
        seq({iv("0", true, "10", true)}),
    };
    CHECK(joinBody(sets) == seq({iv("1", true, "2", true)}));
    sets.push_back(IntervalSeq{});
    CHECK(joinBody(sets).empty());
}

TEST_CASE("evaluator agrees with the pointwise oracle on random cases") {
    for (std::uint64_t s = 0; s < 60; ++s) {
        gen::EvalCase c = gen::evalCase(1000 + s);
        testutil::PointOracle oracle(c.store, *c.atom);
        IntervalSeq expected = oracle.truthSet(*c.atom);
        IntervalSeq got = evalMetricAtom(c.store, *c.atom).clip(oracle.horizon());
        CAPTURE(s);
        CAPTURE(printAtom(c.syms, *c.atom));
        CHECK(got == expected);
    }
}
