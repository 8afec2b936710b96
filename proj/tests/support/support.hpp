#pragma once

#include "tabsynth/formula.hpp"
#include "tabsynth/model.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabsynth::testing {

using Rng = std::mt19937_64;

inline const std::vector<std::string> default_atoms = {"p", "q"};

// Uniform-ish random formula over the user-facing operators of `logic`.
Formula random_formula(Rng& rng, LogicId logic, std::size_t max_depth = 3,
                       const std::vector<std::string>& atoms = default_atoms);

// Partial models of the acceptance distribution: K/CTL graphs with 1..max
// states and arbitrary edges, LTL chains of 1..max states with an optional
// back edge. States are named s0, s1, ... and s0 is the root.
PartialModel random_partial_model(Rng& rng, LogicId logic, std::size_t max_states = 3,
                                  const std::vector<std::string>& atoms = default_atoms);

// As above but complete for the logic (serial for CTL, a lasso for LTL).
PartialModel random_complete_model(Rng& rng, LogicId logic, std::size_t max_states = 3,
                                   const std::vector<std::string>& atoms = default_atoms);

// A random complete candidate around m: sometimes a genuine extension,
// sometimes a perturbed one, so both verdicts show up.
SynthesizedModel random_candidate(Rng& rng, const PartialModel& m);

// K semantics straight from the definition, recursing over successors.
bool brute_force_k(const PartialModel& m, std::size_t state, const Formula& f);

// Clause-by-clause admissibility over state names rather than indices.
bool recheck_admissible(const PartialModel& m, const SynthesizedModel& c, ExtensionMode mode);

// Small graph with at most 4 states and 2 atoms, as bit masks: val[s] holds
// the atoms of s (bit 0 = p, bit 1 = q), succ[s] its successors.
struct TinyModel {
    std::size_t n = 0;
    std::uint8_t val[4] = {};
    std::uint8_t succ[4] = {};
};

// Every TinyModel with 1..max_states states, one per isomorphism class.
void for_each_tiny_model(std::size_t max_states, const std::function<void(const TinyModel&)>& visit);

PartialModel to_partial_model(const TinyModel& t, LogicId logic);

// Set of states satisfying f, computed by naive Kleene iteration on masks.
// Handles K and CTL operators; dead ends follow the K reading.
std::uint8_t tiny_eval(const TinyModel& t, const Formula& f);

// tiny_eval for a fixed list of formulas, sharing common subformulas.
class TinyPool {
public:
    explicit TinyPool(const std::vector<Formula>& formulas);
    // Masks in the order of the formulas given to the constructor.
    [[nodiscard]] std::vector<std::uint8_t> eval(const TinyModel& t) const;

private:
    struct Step {
        Op op;
        std::uint8_t bit;
        std::size_t lhs = SIZE_MAX;
        std::size_t rhs = SIZE_MAX;
    };
    std::size_t add(const Formula& f);

    std::vector<Step> steps_;
    std::vector<std::size_t> roots_;
    std::unordered_map<const void*, std::size_t> index_;
};

// The distinct formulas produced by `count` draws, closed under subformulas.
std::vector<Formula> formula_pool(Rng& rng, LogicId logic, std::size_t count, std::size_t max_depth = 3);

std::vector<Formula> subformulas(const Formula& f);

} // namespace tabsynth::testing
