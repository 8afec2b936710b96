#include "tabsynth/model.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>

namespace tabsynth {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::optional<std::size_t> PartialModel::find_state(std::string_view id) const
{
    auto it = std::lower_bound(states.begin(), states.end(), id,
                               [](const ModelState& s, std::string_view key) { return s.id < key; });
    if (it != states.end() && it->id == id)
        return static_cast<std::size_t>(it - states.begin());
    return std::nullopt;
}

std::size_t PartialModel::state_index(std::string_view id) const
{
    if (auto i = find_state(id))
        return *i;
    throw ModelError(ModelErrorKind::UnknownState, "unknown state '" + std::string(id) + "'");
}

std::vector<std::vector<std::size_t>> PartialModel::successor_lists() const
{
    std::vector<std::vector<std::size_t>> out(states.size());
    for (const auto& [from, to] : transitions)
        out[from].push_back(to);
    return out;
}

bool PartialModel::has_transition(std::size_t from, std::size_t to) const
{
    return std::binary_search(transitions.begin(), transitions.end(), std::make_pair(from, to));
}

bool PartialModel::has_atom(std::size_t state, std::string_view a) const
{
    const auto& l = states[state].label;
    return std::binary_search(l.begin(), l.end(), a);
}

bool PartialModel::is_serial() const
{
    std::vector<bool> has_succ(states.size(), false);
    for (const auto& t : transitions)
        has_succ[t.first] = true;
    return std::all_of(has_succ.begin(), has_succ.end(), [](bool b) { return b; });
}

namespace {

bool valid_atom_name(std::string_view a)
{
    if (a.empty() || a.front() < 'a' || a.front() > 'z')
        return false;
    return std::all_of(a.begin(), a.end(),
                       [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }) &&
           a != "true" && a != "false";
}

void sort_unique(std::vector<std::string>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

std::vector<std::size_t> chain_order(const PartialModel& m)
{
    if (m.states.empty())
        return {};
    const auto succ = m.successor_lists();
    std::vector<std::size_t> order{m.root};
    std::vector<bool> seen(m.states.size(), false);
    seen[m.root] = true;
    for (;;) {
        const auto& out = succ[order.back()];
        if (out.size() > 1)
            return {};
        if (out.empty() || seen[out.front()])
            break;
        seen[out.front()] = true;
        order.push_back(out.front());
    }
    if (order.size() != m.states.size())
        return {};
    return order;
}

bool is_ltl_chain(const PartialModel& m) { return !chain_order(m).empty(); }

void validate(const PartialModel& m)
{
    if (m.states.empty())
        throw ModelError(ModelErrorKind::Malformed, "model has no states");
    std::set<std::string> atoms;
    for (const auto& a : m.atoms) {
        if (!valid_atom_name(a))
            throw ModelError(ModelErrorKind::Malformed, "invalid atom name '" + a + "'");
        if (!atoms.insert(a).second)
            throw ModelError(ModelErrorKind::Malformed, "duplicate atom '" + a + "'");
    }
    std::set<std::string> ids;
    for (const auto& s : m.states) {
        if (s.id.empty())
            throw ModelError(ModelErrorKind::Malformed, "empty state identifier");
        if (!ids.insert(s.id).second)
            throw ModelError(ModelErrorKind::DuplicateState, "duplicate state identifier '" + s.id + "'");
        for (const auto& a : s.label)
            if (!atoms.count(a))
                throw ModelError(ModelErrorKind::UnknownAtom,
                                 "state '" + s.id + "' is labeled with undeclared atom '" + a + "'");
    }
    if (m.root >= m.states.size())
        throw ModelError(ModelErrorKind::UnknownState, "root is not a state");
    for (const auto& [from, to] : m.transitions)
        if (from >= m.states.size() || to >= m.states.size())
            throw ModelError(ModelErrorKind::UnknownState, "transition references an unknown state");
    if (m.logic == LogicId::LTL && !is_ltl_chain(m))
        throw ModelError(ModelErrorKind::ChainShape,
                         "LTL model must be a chain from the root with at most one back edge from its last state");
}

bool is_complete(const PartialModel& m)
{
    switch (m.logic) {
    case LogicId::K: return true;
    case LogicId::CTL: return m.is_serial();
    case LogicId::LTL: {
        const auto order = chain_order(m);
        return !order.empty() && !m.successor_lists()[order.back()].empty();
    }
    }
    return false;
}

PartialModel make_model(LogicId logic, std::vector<std::string> atoms, std::vector<ModelState> states,
                        const std::vector<std::pair<std::string, std::string>>& transitions, const std::string& root)
{
    PartialModel m;
    m.logic = logic;
    sort_unique(atoms);
    m.atoms = std::move(atoms);
    for (auto& s : states)
        sort_unique(s.label);
    std::sort(states.begin(), states.end(), [](const ModelState& a, const ModelState& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < states.size(); ++i)
        if (states[i].id == states[i - 1].id)
            throw ModelError(ModelErrorKind::DuplicateState, "duplicate state identifier '" + states[i].id + "'");
    m.states = std::move(states);
    for (const auto& [from, to] : transitions)
        m.transitions.emplace_back(m.state_index(from), m.state_index(to));
    std::sort(m.transitions.begin(), m.transitions.end());
    m.transitions.erase(std::unique(m.transitions.begin(), m.transitions.end()), m.transitions.end());
    m.root = m.state_index(root);
    validate(m);
    return m;
}

PartialModel with_vocabulary(PartialModel m, const std::vector<std::string>& extra_atoms)
{
    m.atoms.insert(m.atoms.end(), extra_atoms.begin(), extra_atoms.end());
    sort_unique(m.atoms);
    return m;
}

std::string_view to_string(ExtensionMode mode)
{
    switch (mode) {
    case ExtensionMode::Grow: return "grow";
    case ExtensionMode::FixedStates: return "fixed-states";
    case ExtensionMode::Complete: return "complete";
    }
    return "?";
}

ExtensionMode parse_extension_mode(std::string_view text)
{
    if (text == "grow")
        return ExtensionMode::Grow;
    if (text == "fixed-states")
        return ExtensionMode::FixedStates;
    if (text == "complete")
        return ExtensionMode::Complete;
    throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

SynthesizedModel identity_embedding(const PartialModel& m)
{
    SynthesizedModel out{m, {}};
    for (const auto& s : m.states)
        out.embedding.emplace(s.id, s.id);
    return out;
}

bool is_admissible_extension(const PartialModel& m, const SynthesizedModel& candidate, ExtensionPolicy policy)
{
    const PartialModel& c = candidate.model;
    if (m.atoms != c.atoms)
        throw ModelError(ModelErrorKind::VocabularyMismatch, "partial model and candidate use different atoms");
    if (m.logic != c.logic)
        return false;

    // Embedding: total on m, into c, injective.
    if (candidate.embedding.size() != m.states.size())
        return false;
    std::vector<std::size_t> image(m.states.size());
    std::vector<bool> used(c.states.size(), false);
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        auto it = candidate.embedding.find(m.states[i].id);
        if (it == candidate.embedding.end())
            return false;
        auto j = c.find_state(it->second);
        if (!j || used[*j])
            return false;
        used[*j] = true;
        image[i] = *j;
    }
    if (image[m.root] != c.root)
        return false;
    for (std::size_t i = 0; i < m.states.size(); ++i)
        if (c.states[image[i]].label != m.states[i].label)
            return false;
    for (const auto& [from, to] : m.transitions)
        if (!c.has_transition(image[from], image[to]))
            return false;

    std::vector<std::size_t> preimage(c.states.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < image.size(); ++i)
        preimage[image[i]] = i;
    const auto is_old = [&](std::size_t j) { return preimage[j] != static_cast<std::size_t>(-1); };

    switch (policy.mode) {
    case ExtensionMode::Grow:
        for (const auto& [from, to] : c.transitions)
            if (is_old(from) && is_old(to) && !m.has_transition(preimage[from], preimage[to]))
                return false;
        break;
    case ExtensionMode::FixedStates:
        if (c.states.size() != m.states.size())
            return false;
        break;
    case ExtensionMode::Complete:
        if (c.states.size() != m.states.size() || c.transitions.size() != m.transitions.size())
            return false;
        break;
    }
    return is_complete(c);
}

// ---------------------------------------------------------------------------
// Serialization

std::string fresh_state_id(std::size_t n) { return "_g" + std::to_string(n); }

std::vector<std::string> fresh_state_ids(const PartialModel& m, std::size_t count)
{
    std::vector<std::string> out;
    for (std::size_t n = 0; out.size() < count; ++n)
        if (auto id = fresh_state_id(n); !m.find_state(id))
            out.push_back(std::move(id));
    return out;
}

bool is_reserved_id(std::string_view id)
{
    return id.size() > 2 && id.substr(0, 2) == "_g" &&
           std::all_of(id.begin() + 2, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

namespace {

const json& require(const json& doc, const char* key)
{
    auto it = doc.find(key);
    if (it == doc.end())
        throw ModelError(ModelErrorKind::Malformed, std::string("missing key '") + key + "'");
    return *it;
}

std::string require_string(const json& v, const std::string& what)
{
    if (!v.is_string())
        throw ModelError(ModelErrorKind::Malformed, what + " must be a string");
    return v.get<std::string>();
}

struct ParsedDocument {
    PartialModel model;
    std::optional<std::map<std::string, std::string>> embedding;
};

ParsedDocument parse_document(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(ModelErrorKind::Malformed, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ModelError(ModelErrorKind::Malformed, "model document must be a JSON object");

    LogicId logic;
    try {
        logic = parse_logic(require_string(require(doc, "logic"), "logic"));
    } catch (const std::invalid_argument& e) {
        throw ModelError(ModelErrorKind::Malformed, e.what());
    }

    const json& atoms_json = require(doc, "atoms");
    if (!atoms_json.is_array())
        throw ModelError(ModelErrorKind::Malformed, "atoms must be an array");
    std::vector<std::string> atoms;
    for (const auto& a : atoms_json)
        atoms.push_back(require_string(a, "atom"));
    std::set<std::string> declared;
    for (const auto& a : atoms)
        if (!declared.insert(a).second)
            throw ModelError(ModelErrorKind::Malformed, "duplicate atom '" + a + "'");

    std::optional<std::map<std::string, std::string>> embedding;
    if (auto it = doc.find("embedding"); it != doc.end()) {
        if (!it->is_object())
            throw ModelError(ModelErrorKind::Malformed, "embedding must be an object");
        embedding.emplace();
        for (const auto& [k, v] : it->items())
            embedding->emplace(k, require_string(v, "embedding image"));
    }

    const json& states_json = require(doc, "states");
    if (!states_json.is_array())
        throw ModelError(ModelErrorKind::Malformed, "states must be an array");
    std::vector<ModelState> states;
    for (const auto& s : states_json) {
        if (!s.is_object())
            throw ModelError(ModelErrorKind::Malformed, "state entries must be objects");
        ModelState st;
        st.id = require_string(require(s, "id"), "state id");
        if (!embedding && is_reserved_id(st.id))
            throw ModelError(ModelErrorKind::ReservedIdentifier,
                             "state identifier '" + st.id + "' is reserved for synthesized states");
        const json& label = require(s, "label");
        if (!label.is_array())
            throw ModelError(ModelErrorKind::Malformed, "label of state '" + st.id + "' must be an array");
        for (const auto& a : label)
            st.label.push_back(require_string(a, "label atom"));
        states.push_back(std::move(st));
    }

    const json& trans_json = require(doc, "transitions");
    if (!trans_json.is_array())
        throw ModelError(ModelErrorKind::Malformed, "transitions must be an array");
    std::vector<std::pair<std::string, std::string>> transitions;
    for (const auto& t : trans_json) {
        if (!t.is_array() || t.size() != 2)
            throw ModelError(ModelErrorKind::Malformed, "each transition must be a two-element array");
        transitions.emplace_back(require_string(t[0], "transition source"), require_string(t[1], "transition target"));
    }
    const std::string root = require_string(require(doc, "root"), "root");

    // Report unknown states and duplicates by name before building indices.
    std::set<std::string> ids;
    for (const auto& s : states)
        if (!ids.insert(s.id).second)
            throw ModelError(ModelErrorKind::DuplicateState, "duplicate state identifier '" + s.id + "'");
    if (!ids.count(root))
        throw ModelError(ModelErrorKind::UnknownState, "root names unknown state '" + root + "'");
    for (const auto& [from, to] : transitions)
        for (const auto* id : {&from, &to})
            if (!ids.count(*id))
                throw ModelError(ModelErrorKind::UnknownState, "transition references unknown state '" + *id + "'");

    ParsedDocument out{make_model(logic, std::move(atoms), std::move(states), transitions, root), std::move(embedding)};
    if (out.embedding)
        for (const auto& [orig, img] : *out.embedding)
            if (!out.model.find_state(img))
                throw ModelError(ModelErrorKind::UnknownState,
                                 "embedding maps '" + orig + "' to unknown state '" + img + "'");
    return out;
}

ordered_json model_json(const PartialModel& m)
{
    ordered_json doc;
    doc["logic"] = std::string(to_string(m.logic));
    doc["atoms"] = m.atoms;
    ordered_json states = ordered_json::array();
    for (const auto& s : m.states) {
        ordered_json st;
        st["id"] = s.id;
        st["label"] = s.label;
        states.push_back(std::move(st));
    }
    doc["states"] = std::move(states);
    ordered_json trans = ordered_json::array();
    for (const auto& [from, to] : m.transitions)
        trans.push_back(ordered_json::array({m.states[from].id, m.states[to].id}));
    doc["transitions"] = std::move(trans);
    doc["root"] = m.states[m.root].id;
    return doc;
}

} // namespace

PartialModel load_model(std::string_view document) { return parse_document(document).model; }

SynthesizedModel load_synthesized(std::string_view document)
{
    auto parsed = parse_document(document);
    if (!parsed.embedding)
        throw ModelError(ModelErrorKind::Malformed, "missing key 'embedding'");
    return {std::move(parsed.model), std::move(*parsed.embedding)};
}

std::string save_model(const PartialModel& m) { return model_json(m).dump(2) + "\n"; }

std::string save_model(const SynthesizedModel& m)
{
    ordered_json doc = model_json(m.model);
    ordered_json emb = ordered_json::object();
    for (const auto& [orig, img] : m.embedding)
        emb[orig] = img;
    doc["embedding"] = std::move(emb);
    return doc.dump(2) + "\n";
}

std::string to_dot(const PartialModel& m)
{
    const auto esc = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\')
                out += '\\';
            out += c;
        }
        return out;
    };
    std::string out = "digraph model {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        std::string label;
        for (const auto& a : m.states[i].label)
            label += (label.empty() ? "" : ", ") + a;
        const auto id = esc(m.states[i].id);
        out += "  \"" + id + "\" [label=\"" + id + "\\n{" + esc(label) + "}\"" + (i == m.root ? ", peripheries=2" : "") + "];\n";
    }
    for (const auto& [a, b] : m.transitions)
        out += "  \"" + esc(m.states[a].id) + "\" -> \"" + esc(m.states[b].id) + "\";\n";
    return out + "}\n";
}

} // namespace tabsynth
