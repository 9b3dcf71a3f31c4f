#include "dmtl/parser.hpp"

#include <cctype>
#include <vector>

namespace dmtl {

namespace {

struct Token {
    enum Kind {
        Ident,
        Number,
        Str,
        LParen,
        RParen,
        LBrack,
        RBrack,
        Comma,
        At,
        Arrow,
        Plus,
        Minus,
        Newline,
        End,
    };
    Kind kind = End;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    Lexer(std::string_view text, std::string_view file) : text_(text), file_(file) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                continue;
            }
            if (c == '\n') {
                out.push_back(make(Token::Newline, "\n"));
                advance();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(lexIdent());
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back(lexNumber());
                continue;
            }
            if (c == '"') {
                out.push_back(lexString());
                continue;
            }
            if (c == '<' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
                out.push_back(make(Token::Arrow, "<-"));
                advance();
                advance();
                continue;
            }
            Token::Kind k;
            switch (c) {
                case '(': k = Token::LParen; break;
                case ')': k = Token::RParen; break;
                case '[': k = Token::LBrack; break;
                case ']': k = Token::RBrack; break;
                case ',': k = Token::Comma; break;
                case '@': k = Token::At; break;
                case '+': k = Token::Plus; break;
                case '-': k = Token::Minus; break;
                default:
                    throw ParseError("unexpected character '" + std::string(1, c) + "'", line_,
                                     col_, file_);
            }
            out.push_back(make(k, std::string(1, c)));
            advance();
        }
        out.push_back(make(Token::End, ""));
        return out;
    }

private:
    Token make(Token::Kind k, std::string text) const {
        return Token{k, std::move(text), line_, col_};
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    Token lexIdent() {
        Token t = make(Token::Ident, "");
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            advance();
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        return t;
    }

    // Integers, decimals and fractions: 3, 2.5, 5/2. The '/' form is only
    // consumed when a digit follows, so it cannot eat unrelated syntax.
    Token lexNumber() {
        Token t = make(Token::Number, "");
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
        };
        digits();
        if (pos_ + 1 < text_.size() && (text_[pos_] == '.' || text_[pos_] == '/') &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            advance();
            digits();
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        return t;
    }

    Token lexString() {
        Token t = make(Token::Str, "");
        advance(); // opening quote
        std::string value;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_];
            if (c == '\n') break;
            if (c == '\\' && pos_ + 1 < text_.size()) {
                advance();
                c = text_[pos_];
            }
            value += c;
            advance();
        }
        if (pos_ >= text_.size() || text_[pos_] != '"') {
            throw ParseError("unterminated string constant", t.line, t.col, file_);
        }
        advance(); // closing quote
        t.text = std::move(value);
        return t;
    }

    std::string_view text_;
    std::string_view file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool isKeyword(const Token& t, std::string_view kw) {
    return t.kind == Token::Ident && t.text == kw;
}

std::optional<Op> prefixOp(const Token& t) {
    if (t.kind != Token::Ident) return std::nullopt;
    if (t.text == "DIAMONDMINUS") return Op::DiamondMinus;
    if (t.text == "DIAMONDPLUS") return Op::DiamondPlus;
    if (t.text == "BOXMINUS") return Op::BoxMinus;
    if (t.text == "BOXPLUS") return Op::BoxPlus;
    return std::nullopt;
}

std::optional<Op> infixOp(const Token& t) {
    if (t.kind != Token::Ident) return std::nullopt;
    if (t.text == "SINCE") return Op::Since;
    if (t.text == "UNTIL") return Op::Until;
    return std::nullopt;
}

// True when the body atom holds at every time point of every interpretation,
// judged syntactically: such a rule would fire everywhere and is a bug in the
// input rather than something to materialise.
bool vacuouslyTrue(const MetricAtom& atom) {
    switch (atom.op) {
        case Op::Top: return true;
        case Op::Rel:
        case Op::Bottom: return false;
        case Op::Since:
        case Op::Until: {
            bool zeroLag = containsPoint(*atom.range, TimePoint(Rational(0)));
            return vacuouslyTrue(*atom.b) && (zeroLag || vacuouslyTrue(*atom.a));
        }
        default: return vacuouslyTrue(*atom.a);
    }
}

// Variables that can ground a rule: everything reachable without entering a
// since/until continuity operand.
void collectSafeVars(const MetricAtom& atom, std::set<SymbolId>& out) {
    switch (atom.op) {
        case Op::Top:
        case Op::Bottom: return;
        case Op::Rel:
            for (const Term& t : atom.rel.args)
                if (t.isVar) out.insert(t.sym);
            return;
        case Op::Since:
        case Op::Until: collectSafeVars(*atom.b, out); return;
        default: collectSafeVars(*atom.a, out); return;
    }
}

class RuleParser {
public:
    RuleParser(SymbolTable& syms, std::vector<Token> tokens, std::string_view file)
        : syms_(syms), toks_(std::move(tokens)), file_(file) {}

    Program parseProgram() {
        Program out;
        skipNewlines();
        while (!at(Token::End)) {
            out.rules.push_back(parseRule());
            expectStatementEnd("rule");
            skipNewlines();
        }
        return out;
    }

    Dataset parseDataset() {
        Dataset out;
        skipNewlines();
        while (!at(Token::End)) {
            out.facts.push_back(parseFactStatement());
            expectStatementEnd("fact");
            skipNewlines();
        }
        return out;
    }

    Fact parseSingleFact() {
        skipNewlines();
        Fact f = parseFactStatement();
        skipNewlines();
        if (!at(Token::End)) fail("expected end of input after fact");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { failAt(peek(), msg); }
    [[noreturn]] void failAt(const Token& t, const std::string& msg) const {
        throw ParseError(msg, t.line, t.col, file_);
    }

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Token::Kind k) const { return peek().kind == k; }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    Token expect(Token::Kind k, const std::string& what) {
        if (!at(k)) fail("expected " + what);
        return take();
    }
    void skipNewlines() {
        while (at(Token::Newline)) take();
    }
    void expectStatementEnd(const std::string& what) {
        if (!at(Token::Newline) && !at(Token::End)) fail("unexpected token after " + what);
    }

    Rational parseEndpointValue(bool& infinite, bool& negative) {
        negative = false;
        if (at(Token::Plus) || at(Token::Minus)) {
            negative = take().kind == Token::Minus;
        }
        if (isKeyword(peek(), "inf")) {
            take();
            infinite = true;
            return Rational(0);
        }
        Token num = expect(Token::Number, "a number or 'inf'");
        auto value = parseRational(num.text);
        if (!value) failAt(num, "malformed number '" + num.text + "'");
        infinite = false;
        return negative ? -*value : *value;
    }

    Interval parseIntervalLiteral(bool requireNonNegative) {
        Token open = take();
        if (open.kind != Token::LBrack && open.kind != Token::LParen) {
            failAt(open, "expected an interval");
        }
        bool loClosed = open.kind == Token::LBrack;
        bool loInf = false, loNeg = false;
        Rational lo = parseEndpointValue(loInf, loNeg);
        Token comma = expect(Token::Comma, "','");
        (void)comma;
        bool hiInf = false, hiNeg = false;
        Rational hi = parseEndpointValue(hiInf, hiNeg);
        Token close = take();
        if (close.kind != Token::RBrack && close.kind != Token::RParen) {
            failAt(close, "expected ']' or ')'");
        }
        bool hiClosed = close.kind == Token::RBrack;

        TimePoint loP = loInf ? (loNeg ? TimePoint::negInf() : TimePoint::posInf()) : TimePoint(lo);
        TimePoint hiP = hiInf ? (hiNeg ? TimePoint::negInf() : TimePoint::posInf()) : TimePoint(hi);
        if (loInf && loClosed) failAt(open, "infinite endpoint requires an open bracket");
        if (hiInf && hiClosed) failAt(close, "infinite endpoint requires an open bracket");
        if (requireNonNegative) {
            if (loInf) failAt(open, "operator ranges need a finite lower endpoint");
            if (lo < 0) failAt(open, "operator ranges must be non-negative");
        }
        auto iv = Interval::make(loP, loClosed, hiP, hiClosed);
        if (!iv) failAt(open, "empty interval");
        return *iv;
    }

    Term parseTerm() {
        Token t = take();
        switch (t.kind) {
            case Token::Ident: {
                bool isVar = std::isupper(static_cast<unsigned char>(t.text[0])) != 0;
                return Term{isVar, syms_.intern(t.text)};
            }
            case Token::Number:
            case Token::Str: return Term{false, syms_.intern(t.text)};
            default: failAt(t, "expected a term");
        }
    }

    RelAtom parseRelAtom() {
        Token name = expect(Token::Ident, "a predicate name");
        RelAtom atom;
        atom.pred = syms_.intern(name.text);
        if (at(Token::LParen)) {
            take();
            atom.args.push_back(parseTerm());
            while (at(Token::Comma)) {
                take();
                atom.args.push_back(parseTerm());
            }
            expect(Token::RParen, "')'");
        }
        if (!syms_.fixArity(atom.pred, static_cast<std::uint32_t>(atom.args.size()))) {
            failAt(name, "predicate '" + name.text + "' used with arity " +
                             std::to_string(atom.args.size()) + " but previously with arity " +
                             std::to_string(*syms_.arityOf(atom.pred)));
        }
        return atom;
    }

    AtomPtr parseUnaryAtom() {
        const Token& t = peek();
        if (isKeyword(t, "TOP")) {
            take();
            return MetricAtom::top();
        }
        if (isKeyword(t, "BOTTOM")) {
            take();
            return MetricAtom::bottom();
        }
        if (auto op = prefixOp(t)) {
            take();
            Interval range = parseIntervalLiteral(/*requireNonNegative=*/true);
            return MetricAtom::unary(*op, range, parseUnaryAtom());
        }
        if (t.kind == Token::LParen) {
            take();
            AtomPtr inner = parseMetricAtom();
            expect(Token::RParen, "')'");
            return inner;
        }
        return MetricAtom::relational(parseRelAtom());
    }

    AtomPtr parseMetricAtom() {
        AtomPtr left = parseUnaryAtom();
        while (auto op = infixOp(peek())) {
            take();
            Interval range = parseIntervalLiteral(/*requireNonNegative=*/true);
            AtomPtr right = parseUnaryAtom();
            left = MetricAtom::binary(*op, range, std::move(left), std::move(right));
        }
        return left;
    }

    AtomPtr parseHead() {
        const Token& t = peek();
        if (isKeyword(t, "BOTTOM")) {
            take();
            return MetricAtom::bottom();
        }
        if (auto op = prefixOp(t)) {
            if (*op == Op::DiamondMinus || *op == Op::DiamondPlus) {
                fail("diamond operators are not allowed in rule heads");
            }
            take();
            Interval range = parseIntervalLiteral(/*requireNonNegative=*/true);
            const Token& innerTok = peek();
            if (isKeyword(innerTok, "BOTTOM")) {
                failAt(innerTok, "BOTTOM may only be the entire head");
            }
            return MetricAtom::unary(*op, range, parseHead());
        }
        if (isKeyword(t, "TOP")) fail("TOP is not allowed in rule heads");
        return MetricAtom::relational(parseRelAtom());
    }

    Rule parseRule() {
        Token first = peek();
        Rule rule;
        rule.line = first.line;
        rule.head = parseHead();
        expect(Token::Arrow, "'<-'");
        rule.body.push_back(parseMetricAtom());
        while (isKeyword(peek(), "AND")) {
            take();
            rule.body.push_back(parseMetricAtom());
        }

        bool allVacuous = true;
        for (const AtomPtr& atom : rule.body) allVacuous = allVacuous && vacuouslyTrue(*atom);
        if (allVacuous)
            failAt(first,
                   "rule body is vacuously true at every time point; state unconditional "
                   "knowledge as dataset facts instead");

        std::set<SymbolId> headVars;
        collectVars(*rule.head, headVars);
        std::set<SymbolId> safeVars;
        for (const AtomPtr& atom : rule.body) collectSafeVars(*atom, safeVars);
        for (SymbolId v : headVars) {
            if (!safeVars.count(v)) {
                failAt(first, "unsafe rule: head variable '" + syms_.name(v) +
                                  "' does not occur in the body outside since/until "
                                  "continuity operands");
            }
        }
        return rule;
    }

    Fact parseFactStatement() {
        Token first = peek();
        RelAtom atom = parseRelAtom();
        if (!atom.isGround()) {
            failAt(first, "facts must be ground (no variables)");
        }
        expect(Token::At, "'@'");
        Interval iv = parseIntervalLiteral(/*requireNonNegative=*/false);
        return Fact{std::move(atom), iv};
    }

    SymbolTable& syms_;
    std::vector<Token> toks_;
    std::string_view file_;
    std::size_t pos_ = 0;
};

} // namespace

Program Parser::parseProgram(std::string_view text, std::string_view file) {
    RuleParser p(syms_, Lexer(text, file).run(), file);
    return p.parseProgram();
}

Dataset Parser::parseDataset(std::string_view text, std::string_view file) {
    RuleParser p(syms_, Lexer(text, file).run(), file);
    return p.parseDataset();
}

Fact Parser::parseFact(std::string_view text) {
    RuleParser p(syms_, Lexer(text, "").run(), "");
    return p.parseSingleFact();
}

} // namespace dmtl
