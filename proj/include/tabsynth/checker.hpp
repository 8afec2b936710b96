#pragma once

#include "tabsynth/formula.hpp"
#include "tabsynth/model.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabsynth {

class CheckerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adjacency and valuation of a model in the shape the checkers want. Build
// once and reuse when evaluating many formulas on the same model.
class KripkeView {
public:
    explicit KripkeView(const PartialModel& m);

    [[nodiscard]] std::size_t size() const { return succ_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& successors(std::size_t s) const { return succ_[s]; }
    [[nodiscard]] const std::vector<std::size_t>& predecessors(std::size_t s) const { return pred_[s]; }
    [[nodiscard]] bool holds(std::size_t s, const std::string& atom) const;
    // States where atom holds, or null for an atom outside the vocabulary.
    [[nodiscard]] const std::vector<char>* extension(const std::string& atom) const;
    [[nodiscard]] bool serial() const;

private:
    std::vector<std::vector<std::size_t>> succ_;
    std::vector<std::vector<std::size_t>> pred_;
    std::unordered_map<std::string, std::vector<char>> valuation_;
};

// K semantics. Dead ends are allowed: box holds vacuously, diamond fails.
bool mc_k(const PartialModel& model, std::size_t state, const Formula& f);
std::vector<bool> mc_k_all(const KripkeView& model, const Formula& f);

// CTL semantics by global fixpoint labeling; the model must be serial.
std::vector<bool> mc_ctl(const PartialModel& model, const Formula& f);
std::vector<bool> mc_ctl(const KripkeView& model, const Formula& f);

// Evaluates many formulas on one K or CTL model, sharing the labels of
// common subformulas between calls. Same semantics and errors as mc_k_all
// and mc_ctl. The view must outlive the labeling.
class Labeling {
public:
    Labeling(const KripkeView& model, LogicId logic);
    ~Labeling();
    Labeling(const Labeling&) = delete;
    Labeling& operator=(const Labeling&) = delete;

    std::vector<bool> states(const Formula& f);

private:
    class Impl;
    std::unique_ptr<Impl> impl_;
    LogicId logic_;
};

// An ultimately periodic word: prefix followed by the loop repeated forever.
struct Lasso {
    std::vector<std::vector<std::string>> prefix;
    std::vector<std::vector<std::string>> loop;
};

bool mc_ltl_lasso(const Lasso& path, const Formula& f);

// Per-position truth values of f along the lasso (prefix positions first).
std::vector<bool> ltl_lasso_positions(const Lasso& path, const Formula& f);

// The lasso traced from the root of an LTL-complete model.
Lasso lasso_of(const PartialModel& model);

// Truth of f at the model's root under the model's logic.
bool holds_at_root(const PartialModel& model, const Formula& f);

} // namespace tabsynth
