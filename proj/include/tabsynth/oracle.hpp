#pragma once

#include "tabsynth/formula.hpp"
#include "tabsynth/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tabsynth {

inline constexpr std::size_t max_enumeration_budget = 4;

class BudgetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EnumerationBudget {
    std::size_t max_new_states = 0;
};

// Pull-style stream of every admissible complete extension of m with at most
// budget.max_new_states fresh states, over m's vocabulary. Extensions that
// differ only by a renaming of fresh states are yielded once. The order is
// deterministic: by number of fresh states, then valuations, then
// transitions.
class ExtensionEnumerator {
public:
    ExtensionEnumerator(const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget, LogicId logic);

    std::optional<SynthesizedModel> next();

private:
    bool advance();
    bool start_block();
    [[nodiscard]] bool acceptable() const;
    [[nodiscard]] bool canonical() const;
    [[nodiscard]] SynthesizedModel build() const;

    PartialModel m_;
    ExtensionPolicy policy_;
    EnumerationBudget budget_;
    std::size_t fresh_ = 0;
    std::vector<std::uint32_t> vals_;
    std::vector<std::pair<std::size_t, std::size_t>> permitted_; // over old + fresh indices
    std::uint64_t mask_ = 0;
    std::uint64_t mask_end_ = 0;
    bool started_ = false;
    bool done_ = false;
};

enum class OracleStrategy {
    Pruned,     // depth-first over transitions with three-valued pruning
    Exhaustive, // evaluate every extension of the stream
};

struct OracleResult {
    bool value = false;
    // The answer only speaks for extensions within the budget.
    bool bounded = false;
    // Satisfying extension (epm true) or counterexample (mcpm false).
    std::optional<SynthesizedModel> witness;
    std::uint64_t examined = 0;
};

// Atoms of phi missing from m are added to the vocabulary, so fresh states
// may make them true.
OracleResult oracle_epm(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                        LogicId logic, OracleStrategy strategy = OracleStrategy::Pruned);
OracleResult oracle_mcpm(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                         LogicId logic, OracleStrategy strategy = OracleStrategy::Pruned);

} // namespace tabsynth
