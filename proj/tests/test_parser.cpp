#include "doctest.h"

#include "dmtl/ast.hpp"
#include "dmtl/parser.hpp"
#include "testutil.hpp"

using namespace dmtl;
using testutil::rat;

namespace {

Program parse(SymbolTable& syms, std::string_view text) {
    Parser p(syms);
    return p.parseProgram(text);
}

void expectRejected(std::string_view text) {
    SymbolTable syms;
    Parser p(syms);
    CHECK_THROWS_AS(p.parseProgram(text), ParseError);
}

} // namespace

TEST_CASE("chain example parses into the expected shapes") {
    testutil::Instance ins = testutil::chainInstance();
    REQUIRE(ins.program.rules.size() == 4);
    REQUIRE(ins.dataset.facts.size() == 4);

    const Rule& r1 = ins.program.rules[0];
    CHECK(r1.head->op == Op::Rel);
    REQUIRE(r1.body.size() == 1);
    CHECK(r1.body[0]->op == Op::DiamondMinus);
    CHECK(*r1.body[0]->range == Interval::point(rat("1")));
    CHECK(r1.body[0]->a->op == Op::Rel);
    CHECK(r1.body[0]->a->rel.args.size() == 2);
    CHECK(r1.body[0]->a->rel.args[0].isVar);

    const Rule& r2 = ins.program.rules[1];
    CHECK(r2.head->op == Op::BoxPlus);
    CHECK(*r2.head->range == Interval::point(rat("1")));
    CHECK(r2.head->a->op == Op::Rel);
    REQUIRE(r2.body.size() == 2);
    CHECK(r2.body[1]->op == Op::BoxPlus);
    CHECK(*r2.body[1]->range == testutil::iv("1", true, "2", true));

    const Fact& f1 = ins.dataset.facts[0];
    CHECK(f1.interval == testutil::iv("0", true, "1", true));
    CHECK(f1.atom.args.size() == 2);
    CHECK(!f1.atom.args[0].isVar);
}

TEST_CASE("since and until parse infix with prefixed operands") {
    SymbolTable syms;
    Program p = parse(syms, "A(X) <- B(X) SINCE[0,1] C(X)\n"
                            "A(X) <- (DIAMONDMINUS[0,1] B(X)) UNTIL(1/2,2] C(X)\n");
    REQUIRE(p.rules.size() == 2);
    const MetricAtom& s = *p.rules[0].body[0];
    CHECK(s.op == Op::Since);
    CHECK(s.a->op == Op::Rel);
    CHECK(s.b->op == Op::Rel);

    const MetricAtom& u = *p.rules[1].body[0];
    CHECK(u.op == Op::Until);
    CHECK(u.a->op == Op::DiamondMinus);
    CHECK(*u.range == testutil::iv("1/2", false, "2", true));
}

TEST_CASE("numeric endpoint spellings are interchangeable") {
    SymbolTable syms;
    Program a = parse(syms, "A(X) <- DIAMONDMINUS[1/2,3/2] B(X)\n");
    Program b = parse(syms, "A(X) <- DIAMONDMINUS[0.5,1.5] B(X)\n");
    CHECK(*a.rules[0].body[0]->range == *b.rules[0].body[0]->range);
    CHECK(a.rules[0].body[0]->range->lo().value() == rat("1/2"));
}

TEST_CASE("unbounded ranges parse open at infinity") {
    SymbolTable syms;
    Program p = parse(syms, "A(X) <- DIAMONDMINUS[2,inf) B(X)\n");
    const Interval& r = *p.rules[0].body[0]->range;
    CHECK(r.lo().value() == rat("2"));
    CHECK(!r.hi().isFinite());
    CHECK(!r.hiClosed());
}

TEST_CASE("bottom heads parse; nothing else constant does") {
    SymbolTable syms;
    Program p = parse(syms, "BOTTOM <- A(X) AND B(X)\n");
    CHECK(p.rules[0].head->op == Op::Bottom);
    CHECK(p.rules[0].isBottomRule());

    expectRejected("TOP <- A(X)\n");
    expectRejected("BOXMINUS[0,1] BOTTOM <- A(X)\n");
}

TEST_CASE("head operator restrictions") {
    SymbolTable syms;
    // Nested head boxes are part of the head grammar.
    Program p = parse(syms, "BOXPLUS[0,1] BOXMINUS[1,2] A(X) <- A(X)\n");
    CHECK(p.rules[0].head->op == Op::BoxPlus);
    CHECK(p.rules[0].head->a->op == Op::BoxMinus);

    expectRejected("DIAMONDMINUS[0,1] A(X) <- A(X)\n");
    expectRejected("DIAMONDPLUS[0,1] A(X) <- A(X)\n");
}

TEST_CASE("arity drift is rejected wherever it appears") {
    expectRejected("A(X) <- B(X) AND B(X,X)\n");

    SymbolTable syms;
    Parser p(syms);
    p.parseProgram("A(X) <- B(X)\n");
    CHECK_THROWS_AS(p.parseDataset("B(c,c)@[0,1]\n"), ParseError);
}

TEST_CASE("head variables must be bound by safe body positions") {
    expectRejected("A(X,Y) <- B(X)\n");
    // The continuity operand of SINCE does not bind variables.
    expectRejected("A(Y) <- B(X) AND C(Y) SINCE[0,1] B(X)\n");
    // ... but the witness operand does.
    SymbolTable syms;
    CHECK_NOTHROW(parse(syms, "A(Y) <- B(X) AND C(X) SINCE[0,1] D(Y)\n"));
}

TEST_CASE("vacuously true bodies are rejected") {
    expectRejected("A <- TOP\n");
    expectRejected("A <- BOXMINUS[0,1] TOP\n");
    expectRejected("A <- TOP SINCE[0,1] TOP\n");
    // A zero-lag since over TOP is still contingent on its witness operand.
    SymbolTable syms;
    CHECK_NOTHROW(parse(syms, "A(X) <- TOP SINCE[0,1] B(X)\n"));
}

TEST_CASE("malformed ranges are rejected") {
    expectRejected("A(X) <- DIAMONDMINUS[-1,1] B(X)\n");
    expectRejected("A(X) <- DIAMONDMINUS[2,1] B(X)\n");
    expectRejected("A(X) <- DIAMONDMINUS[1,1) B(X)\n");
    expectRejected("A(X) <- DIAMONDMINUS(inf,1] B(X)\n");
    expectRejected("A(X) <- DIAMONDMINUS[0,inf] B(X)\n");
    expectRejected("A(X) <- DIAMONDMINUS[0,x] B(X)\n");
}

TEST_CASE("facts must be ground with valid intervals") {
    SymbolTable syms;
    Parser p(syms);
    Fact f = p.parseFact("R1(c1,c2)@[0,1]");
    CHECK(f.atom.args.size() == 2);

    CHECK_THROWS_AS(p.parseFact("R1(X,c2)@[0,1]"), ParseError);
    CHECK_THROWS_AS(p.parseFact("R1(c1,c2)[0,1]"), ParseError);
    CHECK_THROWS_AS(p.parseFact("R1(c1,c2)@[2,1]"), ParseError);
    // Dataset intervals may be negative and unbounded, unlike operator ranges.
    CHECK_NOTHROW(p.parseFact("R2(c1)@[-5,-1]"));
    CHECK_NOTHROW(p.parseFact("R2(c1)@(-inf,0]"));
}

TEST_CASE("parse errors carry their position") {
    SymbolTable syms;
    Parser p(syms);
    try {
        p.parseProgram("A(X) <- B(X)\nA(X) <- DIAMONDMINUS[2,1] B(X)\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("2:") == 0); // what() leads with line:col
    }
}

TEST_CASE("printed programs reparse to the same print") {
    testutil::Instance ins = testutil::chainInstance();
    std::string once = printProgram(ins.syms, ins.program);
    SymbolTable syms2;
    Parser p2(syms2);
    Program again = p2.parseProgram(once);
    CHECK(printProgram(syms2, again) == once);
}
