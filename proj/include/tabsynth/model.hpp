#pragma once

#include "tabsynth/formula.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabsynth {

struct ModelState {
    std::string id;
    std::vector<std::string> label; // sorted, unique, subset of the model's atoms

    friend bool operator==(const ModelState&, const ModelState&) = default;
};

// A finite labeled transition graph with a designated root. Used both for
// partial models and for complete ones. States are kept sorted by id and
// transitions are index pairs sorted lexicographically.
struct PartialModel {
    LogicId logic = LogicId::K;
    std::vector<std::string> atoms;
    std::vector<ModelState> states;
    std::vector<std::pair<std::size_t, std::size_t>> transitions;
    std::size_t root = 0;

    [[nodiscard]] std::optional<std::size_t> find_state(std::string_view id) const;
    [[nodiscard]] std::size_t state_index(std::string_view id) const; // throws ModelError
    [[nodiscard]] std::vector<std::vector<std::size_t>> successor_lists() const;
    [[nodiscard]] bool has_transition(std::size_t from, std::size_t to) const;
    [[nodiscard]] bool has_atom(std::size_t state, std::string_view atom) const;
    [[nodiscard]] bool is_serial() const;

    friend bool operator==(const PartialModel&, const PartialModel&) = default;
};

enum class ModelErrorKind {
    Malformed,
    UnknownState,
    DuplicateState,
    ReservedIdentifier,
    UnknownAtom,
    ChainShape,
    NotComplete,
    VocabularyMismatch,
};

class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    [[nodiscard]] ModelErrorKind kind() const { return kind_; }

private:
    ModelErrorKind kind_;
};

// Builds a model from plain parts and validates it. Sorts states, labels and
// transitions into canonical order.
PartialModel make_model(LogicId logic, std::vector<std::string> atoms, std::vector<ModelState> states,
                        const std::vector<std::pair<std::string, std::string>>& transitions, const std::string& root);

// Checks every PartialModel invariant, including the chain shape for LTL.
void validate(const PartialModel& m);

// True when the LTL chain shape holds: s0 = root, s_i -> s_{i+1}, at most one
// back edge from the last state.
bool is_ltl_chain(const PartialModel& m);

// Chain order of an LTL model (state indices from the root); empty when the
// model is not a chain.
std::vector<std::size_t> chain_order(const PartialModel& m);

// Complete per logic: K always, CTL serial, LTL a lasso (a chain with its back
// edge).
bool is_complete(const PartialModel& m);

// Adds atoms to the vocabulary. Existing valuations are unchanged, so the new
// atoms are false at every existing state.
PartialModel with_vocabulary(PartialModel m, const std::vector<std::string>& extra_atoms);

enum class ExtensionMode { Grow, FixedStates, Complete };

std::string_view to_string(ExtensionMode mode);
ExtensionMode parse_extension_mode(std::string_view text); // grow, fixed-states, complete

struct ExtensionPolicy {
    ExtensionMode mode = ExtensionMode::Grow;
};

// A complete model together with the injection of the original states.
struct SynthesizedModel {
    PartialModel model;
    std::map<std::string, std::string> embedding; // original id -> id in model

    friend bool operator==(const SynthesizedModel&, const SynthesizedModel&) = default;
};

SynthesizedModel identity_embedding(const PartialModel& m);

// Throws ModelError(VocabularyMismatch) when the atom lists differ.
bool is_admissible_extension(const PartialModel& m, const SynthesizedModel& candidate, ExtensionPolicy policy);

// Model file format (JSON). load_model accepts an optional "embedding" key;
// load_synthesized requires it.
PartialModel load_model(std::string_view document);
SynthesizedModel load_synthesized(std::string_view document);
std::string save_model(const SynthesizedModel& m);
std::string save_model(const PartialModel& m); // without an embedding section

// Graphviz rendering; the root is drawn with a double border.
std::string to_dot(const PartialModel& m);

// Engine-generated state identifiers: _g0, _g1, ...
std::string fresh_state_id(std::size_t n);
// The first `count` engine identifiers not already used by m.
std::vector<std::string> fresh_state_ids(const PartialModel& m, std::size_t count);
bool is_reserved_id(std::string_view id);

} // namespace tabsynth
