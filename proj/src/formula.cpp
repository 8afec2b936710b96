#include "tabsynth/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace tabsynth {

namespace detail {
struct FormulaNode {
    Op op;
    std::string name;
    Formula a;
    Formula b;
    std::size_t hash = 0;
    std::size_t size = 1;
    std::size_t depth = 0;
};
} // namespace detail

std::string_view to_string(LogicId logic)
{
    switch (logic) {
    case LogicId::K: return "K";
    case LogicId::LTL: return "LTL";
    case LogicId::CTL: return "CTL";
    }
    return "?";
}

LogicId parse_logic(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "k")
        return LogicId::K;
    if (lower == "ltl")
        return LogicId::LTL;
    if (lower == "ctl")
        return LogicId::CTL;
    throw std::invalid_argument("unknown logic '" + std::string(text) + "' (expected k, ltl or ctl)");
}

std::string_view op_name(Op op)
{
    switch (op) {
    case Op::Atom: return "atom";
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Not: return "~";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Implies: return "->";
    case Op::Box: return "[]";
    case Op::Diamond: return "<>";
    case Op::Next: return "X";
    case Op::Until: return "U";
    case Op::Release: return "R";
    case Op::Eventually: return "F";
    case Op::Always: return "G";
    case Op::EX: return "EX";
    case Op::AX: return "AX";
    case Op::EU: return "EU";
    case Op::AU: return "AU";
    case Op::EF: return "EF";
    case Op::AF: return "AF";
    case Op::EG: return "EG";
    case Op::AG: return "AG";
    case Op::ER: return "ER";
    case Op::AR: return "AR";
    }
    return "?";
}

int arity(Op op)
{
    switch (op) {
    case Op::Atom:
    case Op::True:
    case Op::False:
        return 0;
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Until:
    case Op::Release:
    case Op::EU:
    case Op::AU:
    case Op::ER:
    case Op::AR:
        return 2;
    default:
        return 1;
    }
}

bool op_in_logic(Op op, LogicId logic)
{
    switch (op) {
    case Op::Atom:
    case Op::True:
    case Op::False:
    case Op::Not:
    case Op::And:
    case Op::Or:
    case Op::Implies:
        return true;
    case Op::Box:
    case Op::Diamond:
        return logic == LogicId::K;
    case Op::Next:
    case Op::Until:
    case Op::Release:
    case Op::Eventually:
    case Op::Always:
        return logic == LogicId::LTL;
    default:
        return logic == LogicId::CTL;
    }
}

// ---------------------------------------------------------------------------
// Formula

Op Formula::op() const { return node_->op; }
const std::string& Formula::name() const { return node_->name; }
const Formula& Formula::lhs() const { return node_->a; }
const Formula& Formula::rhs() const { return node_->b; }
std::size_t Formula::hash() const { return node_ ? node_->hash : 0; }
std::size_t Formula::size() const { return node_->size; }
std::size_t Formula::depth() const { return node_->depth; }

bool operator==(const Formula& a, const Formula& b)
{
    if (a.node_ == b.node_)
        return true;
    if (!a.node_ || !b.node_)
        return false;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    return x.hash == y.hash && x.op == y.op && x.size == y.size && x.name == y.name && x.a == y.a && x.b == y.b;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b)
{
    if (a.node_ == b.node_)
        return std::strong_ordering::equal;
    if (!a.node_)
        return std::strong_ordering::less;
    if (!b.node_)
        return std::strong_ordering::greater;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (auto c = x.op <=> y.op; c != 0)
        return c;
    if (x.op == Op::Atom)
        return x.name.compare(y.name) <=> 0;
    if (auto c = x.a <=> y.a; c != 0)
        return c;
    return x.b <=> y.b;
}

Formula make_node(Op op, std::string name, Formula a, Formula b)
{
    auto node = std::make_shared<detail::FormulaNode>();
    node->op = op;
    node->name = std::move(name);
    std::size_t h = std::hash<int>{}(static_cast<int>(op) + 1) * 0x9e3779b97f4a7c15ULL;
    if (op == Op::Atom)
        h ^= std::hash<std::string>{}(node->name) + (h << 6) + (h >> 2);
    if (a.valid()) {
        h ^= a.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        node->size += a.size();
        node->depth = std::max(node->depth, a.depth() + 1);
    }
    if (b.valid()) {
        h ^= b.hash() * 31 + 0x7f4a7c15ULL + (h << 6) + (h >> 2);
        node->size += b.size();
        node->depth = std::max(node->depth, b.depth() + 1);
    }
    node->a = std::move(a);
    node->b = std::move(b);
    node->hash = h;
    return Formula(std::move(node));
}

Formula atom(std::string name) { return make_node(Op::Atom, std::move(name), {}, {}); }
Formula verum() { return make_node(Op::True, {}, {}, {}); }
Formula falsum() { return make_node(Op::False, {}, {}, {}); }
Formula neg(Formula f) { return make_node(Op::Not, {}, std::move(f), {}); }
Formula conj(Formula a, Formula b) { return make_node(Op::And, {}, std::move(a), std::move(b)); }
Formula disj(Formula a, Formula b) { return make_node(Op::Or, {}, std::move(a), std::move(b)); }
Formula implies(Formula a, Formula b) { return make_node(Op::Implies, {}, std::move(a), std::move(b)); }
Formula box(Formula f) { return make_node(Op::Box, {}, std::move(f), {}); }
Formula dia(Formula f) { return make_node(Op::Diamond, {}, std::move(f), {}); }
Formula next(Formula f) { return make_node(Op::Next, {}, std::move(f), {}); }
Formula until(Formula a, Formula b) { return make_node(Op::Until, {}, std::move(a), std::move(b)); }
Formula release(Formula a, Formula b) { return make_node(Op::Release, {}, std::move(a), std::move(b)); }
Formula eventually(Formula f) { return make_node(Op::Eventually, {}, std::move(f), {}); }
Formula always(Formula f) { return make_node(Op::Always, {}, std::move(f), {}); }
Formula ex(Formula f) { return make_node(Op::EX, {}, std::move(f), {}); }
Formula ax(Formula f) { return make_node(Op::AX, {}, std::move(f), {}); }
Formula eu(Formula a, Formula b) { return make_node(Op::EU, {}, std::move(a), std::move(b)); }
Formula au(Formula a, Formula b) { return make_node(Op::AU, {}, std::move(a), std::move(b)); }
Formula ef(Formula f) { return make_node(Op::EF, {}, std::move(f), {}); }
Formula af(Formula f) { return make_node(Op::AF, {}, std::move(f), {}); }
Formula eg(Formula f) { return make_node(Op::EG, {}, std::move(f), {}); }
Formula ag(Formula f) { return make_node(Op::AG, {}, std::move(f), {}); }
Formula er(Formula a, Formula b) { return make_node(Op::ER, {}, std::move(a), std::move(b)); }
Formula ar(Formula a, Formula b) { return make_node(Op::AR, {}, std::move(a), std::move(b)); }

namespace {

void render(const Formula& f, std::string& out)
{
    switch (f.op()) {
    case Op::Atom: out += f.name(); return;
    case Op::True: out += "true"; return;
    case Op::False: out += "false"; return;
    case Op::Not: out += "~"; break;
    case Op::Box: out += "[]"; break;
    case Op::Diamond: out += "<>"; break;
    case Op::Next: out += "X "; break;
    case Op::Eventually: out += "F "; break;
    case Op::Always: out += "G "; break;
    case Op::EX:
    case Op::AX:
    case Op::EF:
    case Op::AF:
    case Op::EG:
    case Op::AG:
        out += op_name(f.op());
        out += ' ';
        break;
    case Op::EU:
    case Op::AU:
    case Op::ER:
    case Op::AR:
        out += (f.op() == Op::EU || f.op() == Op::ER) ? "E[" : "A[";
        render(f.lhs(), out);
        out += (f.op() == Op::EU || f.op() == Op::AU) ? " U " : " R ";
        render(f.rhs(), out);
        out += "]";
        return;
    default:
        out += "(";
        render(f.lhs(), out);
        out += ' ';
        out += op_name(f.op());
        out += ' ';
        render(f.rhs(), out);
        out += ")";
        return;
    }
    render(f.lhs(), out);
}

void collect_atoms(const Formula& f, std::set<std::string>& out)
{
    if (f.op() == Op::Atom) {
        out.insert(f.name());
        return;
    }
    if (f.lhs().valid())
        collect_atoms(f.lhs(), out);
    if (f.rhs().valid())
        collect_atoms(f.rhs(), out);
}

} // namespace

std::string to_string(const Formula& f)
{
    std::string out;
    render(f, out);
    return out;
}

std::vector<std::string> atoms_of(const Formula& f)
{
    std::set<std::string> out;
    collect_atoms(f, out);
    return {out.begin(), out.end()};
}

bool formula_in_logic(const Formula& f, LogicId logic)
{
    if (!op_in_logic(f.op(), logic))
        return false;
    if (f.lhs().valid() && !formula_in_logic(f.lhs(), logic))
        return false;
    return !f.rhs().valid() || formula_in_logic(f.rhs(), logic);
}

bool is_nnf(const Formula& f)
{
    if (f.op() == Op::Implies)
        return false;
    if (f.op() == Op::Not)
        return f.lhs().op() == Op::Atom;
    if (f.lhs().valid() && !is_nnf(f.lhs()))
        return false;
    return !f.rhs().valid() || is_nnf(f.rhs());
}

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at offset " + std::to_string(position) + ": " + message), position_(position)
{
}

WrongLogicError::WrongLogicError(std::size_t position, std::string op, LogicId logic)
    : ParseError(position, "operator '" + op + "' is not part of " + std::string(to_string(logic))), op_(std::move(op))
{
}

namespace {

enum class Tok : std::uint8_t {
    End,
    Atom,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Tilde,
    Amp,
    Bar,
    Arrow,
    BoxOp,
    DiaOp,
    Keyword, // uppercase operator, text holds it
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (c >= 'a' && c <= 'z') {
            while (i < s.size() && ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= '0' && s[i] <= '9') || s[i] == '_'))
                ++i;
            std::string word(s.substr(start, i - start));
            Tok kind = word == "true" ? Tok::True : word == "false" ? Tok::False : Tok::Atom;
            out.push_back({kind, std::move(word), start});
            continue;
        }
        if (c >= 'A' && c <= 'Z') {
            while (i < s.size() && s[i] >= 'A' && s[i] <= 'Z')
                ++i;
            std::string_view run = s.substr(start, i - start);
            for (std::size_t k = 0; k < run.size();) {
                const bool path_quantifier = run[k] == 'E' || run[k] == 'A';
                if (path_quantifier && k + 1 < run.size() &&
                    (run[k + 1] == 'X' || run[k + 1] == 'F' || run[k + 1] == 'G')) {
                    out.push_back({Tok::Keyword, std::string(run.substr(k, 2)), start + k});
                    k += 2;
                    continue;
                }
                const char letter = run[k];
                if (std::string_view("XFGURE A").find(letter) == std::string_view::npos)
                    throw ParseError(start + k, std::string("unknown operator '") + letter + "'");
                out.push_back({Tok::Keyword, std::string(1, letter), start + k});
                ++k;
            }
            continue;
        }
        switch (c) {
        case '(': out.push_back({Tok::LParen, "(", start}); ++i; continue;
        case ')': out.push_back({Tok::RParen, ")", start}); ++i; continue;
        case ']': out.push_back({Tok::RBracket, "]", start}); ++i; continue;
        case '~': out.push_back({Tok::Tilde, "~", start}); ++i; continue;
        case '&': out.push_back({Tok::Amp, "&", start}); ++i; continue;
        case '|': out.push_back({Tok::Bar, "|", start}); ++i; continue;
        case '[':
            if (i + 1 < s.size() && s[i + 1] == ']') {
                out.push_back({Tok::BoxOp, "[]", start});
                i += 2;
            } else {
                out.push_back({Tok::LBracket, "[", start});
                ++i;
            }
            continue;
        case '<':
            if (i + 1 < s.size() && s[i + 1] == '>') {
                out.push_back({Tok::DiaOp, "<>", start});
                i += 2;
                continue;
            }
            break;
        case '-':
            if (i + 1 < s.size() && s[i + 1] == '>') {
                out.push_back({Tok::Arrow, "->", start});
                i += 2;
                continue;
            }
            break;
        default:
            break;
        }
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, LogicId logic) : tokens_(std::move(tokens)), logic_(logic) {}

    Formula parse_all()
    {
        Formula f = parse_imp();
        if (peek().kind != Tok::End)
            throw ParseError(peek().pos, "unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }

    bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }

    void require_logic(const Token& t, Op op) const
    {
        if (!op_in_logic(op, logic_))
            throw WrongLogicError(t.pos, t.text, logic_);
    }

    void expect(Tok kind, std::string_view what)
    {
        if (peek().kind != kind)
            throw ParseError(peek().pos, "expected " + std::string(what) +
                                             (peek().kind == Tok::End ? " at end of input" : ", found '" + peek().text + "'"));
        ++pos_;
    }

    Formula parse_imp()
    {
        Formula lhs = parse_or();
        if (peek().kind == Tok::Arrow) {
            take();
            return implies(std::move(lhs), parse_imp());
        }
        return lhs;
    }

    Formula parse_or()
    {
        Formula lhs = parse_and();
        while (peek().kind == Tok::Bar) {
            take();
            lhs = disj(std::move(lhs), parse_and());
        }
        return lhs;
    }

    Formula parse_and()
    {
        Formula lhs = parse_binary_temporal();
        while (peek().kind == Tok::Amp) {
            take();
            lhs = conj(std::move(lhs), parse_binary_temporal());
        }
        return lhs;
    }

    // f U g and f R g, right-associative, binding tighter than &.
    Formula parse_binary_temporal()
    {
        Formula lhs = parse_unary();
        if (is_keyword("U") || is_keyword("R")) {
            if (logic_ == LogicId::CTL && bracket_depth_ > 0)
                return lhs; // the E[ / A[ production consumes U
            const Token& t = take();
            const Op op = t.text == "U" ? Op::Until : Op::Release;
            require_logic(t, op);
            Formula rhs = parse_binary_temporal();
            return make_node(op, {}, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Formula parse_unary()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Tilde:
            take();
            return neg(parse_unary());
        case Tok::BoxOp:
            take();
            require_logic(t, Op::Box);
            return box(parse_unary());
        case Tok::DiaOp:
            take();
            require_logic(t, Op::Diamond);
            return dia(parse_unary());
        case Tok::Keyword:
            return parse_keyword();
        default:
            return parse_primary();
        }
    }

    Formula parse_keyword()
    {
        const Token& t = take();
        static const std::pair<std::string_view, Op> unary_ops[] = {
            {"X", Op::Next}, {"F", Op::Eventually}, {"G", Op::Always}, {"EX", Op::EX}, {"AX", Op::AX},
            {"EF", Op::EF},  {"AF", Op::AF},        {"EG", Op::EG},    {"AG", Op::AG},
        };
        for (const auto& [text, op] : unary_ops) {
            if (t.text == text) {
                require_logic(t, op);
                return make_node(op, {}, parse_unary(), {});
            }
        }
        if (t.text == "E" || t.text == "A") {
            const Op op = t.text == "E" ? Op::EU : Op::AU;
            if (logic_ != LogicId::CTL)
                throw WrongLogicError(t.pos, t.text + "[ U ]", logic_);
            expect(Tok::LBracket, "'[' after path quantifier");
            ++bracket_depth_;
            Formula lhs = parse_imp();
            if (!is_keyword("U"))
                throw ParseError(peek().pos, "expected 'U' inside " + t.text + "[...]");
            take();
            Formula rhs = parse_imp();
            --bracket_depth_;
            expect(Tok::RBracket, "']'");
            return make_node(op, {}, std::move(lhs), std::move(rhs));
        }
        throw ParseError(t.pos, "unexpected operator '" + t.text + "'");
    }

    Formula parse_primary()
    {
        const Token& t = take();
        switch (t.kind) {
        case Tok::Atom: return atom(t.text);
        case Tok::True: return verum();
        case Tok::False: return falsum();
        case Tok::LParen: {
            const int saved = bracket_depth_;
            bracket_depth_ = 0;
            Formula inner = parse_imp();
            bracket_depth_ = saved;
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::End: throw ParseError(t.pos, "unexpected end of input");
        default: throw ParseError(t.pos, "unexpected '" + t.text + "'");
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    LogicId logic_;
    int bracket_depth_ = 0;
};

Formula nnf_pos(const Formula& f);
Formula nnf_neg(const Formula& f);

Formula nnf_pos(const Formula& f)
{
    switch (f.op()) {
    case Op::Atom:
    case Op::True:
    case Op::False:
        return f;
    case Op::Not: return nnf_neg(f.lhs());
    case Op::Implies: return disj(nnf_neg(f.lhs()), nnf_pos(f.rhs()));
    default:
        break;
    }
    Formula a = f.lhs().valid() ? nnf_pos(f.lhs()) : Formula{};
    Formula b = f.rhs().valid() ? nnf_pos(f.rhs()) : Formula{};
    if (a == f.lhs() && b == f.rhs())
        return f;
    return make_node(f.op(), {}, std::move(a), std::move(b));
}

Formula nnf_neg(const Formula& f)
{
    switch (f.op()) {
    case Op::Atom: return neg(f);
    case Op::True: return falsum();
    case Op::False: return verum();
    case Op::Not: return nnf_pos(f.lhs());
    case Op::And: return disj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Or: return conj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Implies: return conj(nnf_pos(f.lhs()), nnf_neg(f.rhs()));
    case Op::Box: return dia(nnf_neg(f.lhs()));
    case Op::Diamond: return box(nnf_neg(f.lhs()));
    case Op::Next: return next(nnf_neg(f.lhs()));
    case Op::Until: return release(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Release: return until(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Eventually: return always(nnf_neg(f.lhs()));
    case Op::Always: return eventually(nnf_neg(f.lhs()));
    case Op::EX: return ax(nnf_neg(f.lhs()));
    case Op::AX: return ex(nnf_neg(f.lhs()));
    case Op::EF: return ag(nnf_neg(f.lhs()));
    case Op::AF: return eg(nnf_neg(f.lhs()));
    case Op::EG: return af(nnf_neg(f.lhs()));
    case Op::AG: return ef(nnf_neg(f.lhs()));
    case Op::EU: return ar(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::AU: return er(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::ER: return au(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::AR: return eu(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    }
    return f;
}

} // namespace

Formula parse(std::string_view text, LogicId logic)
{
    Parser parser(tokenize(text), logic);
    return parser.parse_all();
}

Formula to_nnf(const Formula& f) { return nnf_pos(f); }

Formula negate_nnf(const Formula& f)
{
    if (f.op() == Op::Not)
        return f.lhs();
    return nnf_neg(f);
}

Formula core(const Formula& f)
{
    switch (f.op()) {
    case Op::Atom:
    case Op::True:
    case Op::False:
    case Op::Not:
        return f;
    case Op::Eventually: return until(verum(), core(f.lhs()));
    case Op::Always: return release(falsum(), core(f.lhs()));
    case Op::EF: return eu(verum(), core(f.lhs()));
    case Op::AF: return au(verum(), core(f.lhs()));
    case Op::EG: return er(falsum(), core(f.lhs()));
    case Op::AG: return ar(falsum(), core(f.lhs()));
    default:
        break;
    }
    Formula a = f.lhs().valid() ? core(f.lhs()) : Formula{};
    Formula b = f.rhs().valid() ? core(f.rhs()) : Formula{};
    if (a == f.lhs() && b == f.rhs())
        return f;
    return make_node(f.op(), {}, std::move(a), std::move(b));
}

} // namespace tabsynth
