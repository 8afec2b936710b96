#pragma once

#include "tabsynth/formula.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabsynth {

// A subset of a closure, stored as a bitset over closure indices. Iteration
// follows index order, which follows the closure's structural formula order.
class Label {
public:
    Label() = default;
    explicit Label(std::size_t universe) : words_((universe + 63) / 64, 0), universe_(universe) {}

    [[nodiscard]] bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
    void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    void erase(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
    [[nodiscard]] bool subset_of(const Label& other) const;
    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool empty() const { return count() == 0; }
    [[nodiscard]] std::size_t universe() const { return universe_; }
    [[nodiscard]] std::vector<std::size_t> members() const;
    Label& operator|=(const Label& other);

    friend bool operator==(const Label& a, const Label& b) { return a.words_ == b.words_; }
    friend bool operator<(const Label& a, const Label& b) { return a.words_ < b.words_; }
    [[nodiscard]] std::size_t hash() const;

private:
    std::vector<std::uint64_t> words_;
    std::size_t universe_ = 0;
};

struct LabelHash {
    std::size_t operator()(const Label& l) const noexcept { return l.hash(); }
};

// Extended closure of a formula. Members are NNF formulas over the core
// operators (see core()), sorted by the structural formula order; every
// member's NNF negation and every fixpoint's one-step unfolding are members.
class ClosureSet {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    struct Entry {
        Formula formula;
        Op op;
        std::size_t lhs = npos;
        std::size_t rhs = npos;
        std::size_t negation = npos;
        std::size_t unfolding = npos; // fixpoints only
    };

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const Entry& operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] const Formula& formula(std::size_t i) const { return entries_[i].formula; }
    [[nodiscard]] std::optional<std::size_t> find(const Formula& f) const;
    [[nodiscard]] std::size_t index_of(const Formula& f) const; // throws if absent
    [[nodiscard]] bool contains(const Formula& f) const { return find(f).has_value(); }
    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

    [[nodiscard]] Label empty_label() const { return Label(entries_.size()); }
    [[nodiscard]] Label label_of(const std::vector<Formula>& fs) const;
    [[nodiscard]] std::vector<Formula> formulas_of(const Label& l) const;
    [[nodiscard]] std::string render(const Label& l) const;

    // Positive atom names occurring in the label.
    [[nodiscard]] std::vector<std::string> positive_atoms(const Label& l) const;

    // Literal completion of a valuation: each vocabulary atom positive when in
    // the valuation, negated otherwise.
    [[nodiscard]] Label literals(const std::vector<std::string>& vocabulary,
                                 const std::vector<std::string>& valuation) const;

    [[nodiscard]] bool is_fixpoint(std::size_t i) const { return entries_[i].unfolding != npos; }
    [[nodiscard]] bool is_eventuality(std::size_t i) const;

    friend ClosureSet extended_closure(const Formula& f, const std::vector<std::string>& vocabulary);

private:
    std::vector<Entry> entries_;
    std::unordered_map<Formula, std::size_t, FormulaHash> index_;
};

// One-step unfolding of a core fixpoint formula.
Formula unfold(const Formula& f);

// f must be in NNF. The closure is taken over core(f); the vocabulary atoms
// and their negations are added so that literal labels of model states are
// expressible.
ClosureSet extended_closure(const Formula& f, const std::vector<std::string>& vocabulary = {});

// All minimal fully expanded supersets of the label within the closure.
// Sets with an atomic clash or falsum are dropped. Deterministic order.
std::vector<Label> full_expansions(const Label& label, const ClosureSet& closure);

// All fully expanded supersets of the label that decide every closure member
// (exactly one of f and its negation) without a clash. These are the maximal
// locally consistent labels used for states that represent original states.
std::vector<Label> complete_expansions(const Label& label, const ClosureSet& closure);

} // namespace tabsynth
