#pragma once

#include "tabsynth/formula.hpp"
#include "tabsynth/model.hpp"
#include "tabsynth/tableau.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace tabsynth {

struct Verdict {
    Status status = Status::Closed;
    std::optional<SynthesizedModel> model; // present when open
    TableauStats stats;
    std::optional<std::string> closed_origin; // the state that lost its last representative
    std::string tableau_dot;                  // filled when SolveOptions::keep_dot is set

    [[nodiscard]] bool open() const { return status == Status::Open; }
};

struct SolveOptions {
    ExtensionPolicy policy;
    TraceSink trace;
    bool keep_dot = false;
};

// Decides whether some admissible extension of m satisfies phi at the root
// and, if so, builds one. Every open verdict is re-checked against the
// checker and the admissibility test before it is returned; a mismatch
// raises InternalError. Atoms of phi missing from m's vocabulary are added
// to it (false at every existing state).
Verdict solve(const Formula& phi, const PartialModel& m, LogicId logic, const SolveOptions& options = {});
Verdict solve(std::string_view phi_text, const PartialModel& m, LogicId logic, const SolveOptions& options = {});

// Satisfiability with model building: the partial model is a single root
// whose valuation is left to the tableau.
Verdict solve_sat(const Formula& phi, LogicId logic, const SolveOptions& options = {});

// The one-state partial model used by solve_sat.
PartialModel sat_seed(const Formula& phi, LogicId logic);

bool decide_epm(const Formula& phi, const PartialModel& m, LogicId logic, ExtensionPolicy policy = {});

// True when every admissible extension satisfies phi: the negation has no
// satisfying extension.
bool decide_mcpm(const Formula& phi, const PartialModel& m, LogicId logic, ExtensionPolicy policy = {});

} // namespace tabsynth
