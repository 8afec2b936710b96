#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabsynth {

enum class LogicId : std::uint8_t { K, LTL, CTL };

std::string_view to_string(LogicId logic);
LogicId parse_logic(std::string_view text); // accepts k/K, ltl/LTL, ctl/CTL

// Node kinds. ER and AR (existential / universal release) are internal: they
// never come out of the parser, only out of to_nnf, so that negation of a CTL
// until-formula stays a single node.
enum class Op : std::uint8_t {
    Atom,
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    // K
    Box,
    Diamond,
    // LTL
    Next,
    Until,
    Release,
    Eventually,
    Always,
    // CTL
    EX,
    AX,
    EU,
    AU,
    EF,
    AF,
    EG,
    AG,
    ER,
    AR,
};

std::string_view op_name(Op op);
int arity(Op op);
bool op_in_logic(Op op, LogicId logic);

class Formula;

namespace detail {
struct FormulaNode;
}

// Immutable, structurally compared formula tree. Copies share nodes.
class Formula {
public:
    Formula() = default;

    [[nodiscard]] Op op() const;
    [[nodiscard]] const std::string& name() const; // atoms only
    [[nodiscard]] const Formula& lhs() const;      // first operand
    [[nodiscard]] const Formula& rhs() const;      // second operand
    [[nodiscard]] std::size_t hash() const;
    [[nodiscard]] std::size_t size() const;  // number of nodes
    [[nodiscard]] std::size_t depth() const; // nesting depth, atoms have depth 0
    [[nodiscard]] bool valid() const { return static_cast<bool>(node_); }
    [[nodiscard]] const void* identity() const { return node_.get(); }

    friend bool operator==(const Formula& a, const Formula& b);
    friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

private:
    friend Formula make_node(Op, std::string, Formula, Formula);
    explicit Formula(std::shared_ptr<const detail::FormulaNode> node) : node_(std::move(node)) {}

    std::shared_ptr<const detail::FormulaNode> node_;
};

struct FormulaHash {
    std::size_t operator()(const Formula& f) const noexcept { return f.hash(); }
};

Formula make_node(Op op, std::string name, Formula a, Formula b);

Formula atom(std::string name);
Formula verum();
Formula falsum();
Formula neg(Formula f);
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula box(Formula f);
Formula dia(Formula f);
Formula next(Formula f);
Formula until(Formula a, Formula b);
Formula release(Formula a, Formula b);
Formula eventually(Formula f);
Formula always(Formula f);
Formula ex(Formula f);
Formula ax(Formula f);
Formula eu(Formula a, Formula b);
Formula au(Formula a, Formula b);
Formula ef(Formula f);
Formula af(Formula f);
Formula eg(Formula f);
Formula ag(Formula f);
Formula er(Formula a, Formula b);
Formula ar(Formula a, Formula b);

// Renders in the input grammar (fully parenthesized binary operators).
std::string to_string(const Formula& f);

std::vector<std::string> atoms_of(const Formula& f); // sorted, unique
bool formula_in_logic(const Formula& f, LogicId logic);
bool is_nnf(const Formula& f);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& message);
    [[nodiscard]] std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class WrongLogicError : public ParseError {
public:
    WrongLogicError(std::size_t position, std::string op, LogicId logic);
    [[nodiscard]] const std::string& op() const { return op_; }

private:
    std::string op_;
};

Formula parse(std::string_view text, LogicId logic);

// Negation normal form: negations only on atoms, no implications.
Formula to_nnf(const Formula& f);

// NNF of the negation of an NNF formula, computed without re-walking the
// negation through to_nnf. Involutive: negate_nnf(negate_nnf(f)) == f.
Formula negate_nnf(const Formula& f);

// Rewrites the derived temporal operators onto the until/release cores:
// F f = true U f, G f = false R f, EF f = E[true U f], AF f = A[true U f],
// EG f = E[false R f], AG f = A[false R f]. Input must be in NNF.
Formula core(const Formula& f);

} // namespace tabsynth
