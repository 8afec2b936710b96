#pragma once

#include "tabsynth/closure.hpp"
#include "tabsynth/formula.hpp"
#include "tabsynth/model.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabsynth {

// Raised when an invariant that the construction guarantees does not hold.
// Seeing one means a bug in the engine, not a property of the input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class NodeKind { Prestate, State };

// How a state got a successor prestate.
enum class GroupKind {
    Diamond, // K: one per <>f in the label
    Ex,      // CTL: one per EX f in the label
    Default, // CTL: the seriality successor when no EX formula is present
    Next,    // LTL: the single successor
    Edge,    // a transition of the partial model
};

struct Group {
    GroupKind kind;
    std::size_t formula = ClosureSet::npos; // closure index of the <>f / EX f
    std::size_t prestate = 0;
    std::vector<std::size_t> members; // offspring of the prestate, filled in phase 2
};

inline constexpr std::size_t no_origin = static_cast<std::size_t>(-1);

struct TableauNode {
    std::size_t id = 0;
    NodeKind kind = NodeKind::Prestate;
    Label label;
    std::size_t origin = no_origin; // index of the partial-model state this node represents
    bool alive = true;
    std::vector<std::size_t> offspring; // prestates only
    std::vector<Group> groups;          // states only

    [[nodiscard]] bool has_origin() const { return origin != no_origin; }
};

struct TableauStats {
    std::size_t pretableau_prestates = 0;
    std::size_t pretableau_states = 0;
    std::size_t initial_states = 0;
    std::size_t final_states = 0;
    std::size_t eliminated_e1 = 0;
    std::size_t eliminated_e2 = 0;
};

using TraceSink = std::function<void(const std::string&)>;

struct TableauOptions {
    ExtensionMode mode = ExtensionMode::Grow;
    // The root carries no valuation of its own: its atoms are decided by the
    // tableau. Used for plain satisfiability.
    bool free_root = false;
    TraceSink trace;
};

class Tableau {
public:
    enum class Phase { Pretableau, Initial, Final };

    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] LogicId logic() const { return logic_; }
    [[nodiscard]] const ClosureSet& closure() const { return *closure_; }
    [[nodiscard]] const PartialModel& model() const { return model_; }
    [[nodiscard]] const TableauOptions& options() const { return options_; }
    [[nodiscard]] std::size_t phi() const { return phi_; }
    [[nodiscard]] const std::vector<TableauNode>& nodes() const { return nodes_; }
    [[nodiscard]] const TableauNode& node(std::size_t id) const { return nodes_[id]; }
    [[nodiscard]] bool closed() const { return closed_; }
    [[nodiscard]] const std::optional<std::string>& closed_origin() const { return closed_origin_; }
    [[nodiscard]] const TableauStats& stats() const { return stats_; }

    // Surviving states that represent the given partial-model state.
    [[nodiscard]] std::vector<std::size_t> origin_index(std::size_t state) const;
    // Surviving states representing the root and containing the input formula.
    [[nodiscard]] std::vector<std::size_t> root_candidates() const;

    // The partial-model states following `state`.
    [[nodiscard]] const std::vector<std::size_t>& model_successors(std::size_t state) const { return model_succ_[state]; }

private:
    friend Tableau build_pretableau(const Formula&, const PartialModel&, LogicId, TableauOptions);
    friend Tableau eliminate_prestates(Tableau);
    friend Tableau eliminate_states(Tableau);
    friend class TableauBuilder;
    friend class Eliminator;

    void trace(const std::string& line) const
    {
        if (options_.trace)
            options_.trace(line);
    }

    Phase phase_ = Phase::Pretableau;
    LogicId logic_ = LogicId::K;
    std::shared_ptr<const ClosureSet> closure_;
    PartialModel model_;
    std::vector<std::vector<std::size_t>> model_succ_;
    TableauOptions options_;
    std::size_t phi_ = 0;
    std::vector<TableauNode> nodes_;
    bool closed_ = false;
    std::optional<std::string> closed_origin_;
    TableauStats stats_;
};

// Phase 1. `phi` may be in any form; it is normalized internally. The model's
// vocabulary must already contain every atom of phi.
Tableau build_pretableau(const Formula& phi, const PartialModel& m, LogicId logic, TableauOptions options = {});

// Phase 2. Throws std::logic_error unless the tableau is a pretableau.
Tableau eliminate_prestates(Tableau t);

// Phase 3. Throws std::logic_error unless the tableau is in its initial phase.
Tableau eliminate_states(Tableau t);

// One surviving state per partial-model state, mutually consistent: the
// labels agree along every transition of the model and all eventualities are
// fulfilled in the structure they form together with the fresh part.
using Selection = std::vector<std::size_t>;

std::optional<Selection> select_representatives(const Tableau& t);

enum class Status { Open, Closed };

std::string_view to_string(Status s);

Status decide(const Tableau& t);

// Requires an open tableau; throws InternalError when extraction fails.
SynthesizedModel extract_model(const Tableau& t, const Selection& selection);
SynthesizedModel extract_model(const Tableau& t);

// Graphviz rendering of the tableau in its current phase.
std::string to_dot(const Tableau& t);

} // namespace tabsynth
