#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace tabsynth::testing {

namespace {

std::size_t below(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::vector<std::string> random_label(Rng& rng, const std::vector<std::string>& atoms)
{
    std::vector<std::string> out;
    for (const auto& a : atoms)
        if (coin(rng, 0.5))
            out.push_back(a);
    return out;
}

std::string sid(std::size_t i) { return "s" + std::to_string(i); }

const std::vector<Op>& temporal_ops(LogicId logic)
{
    static const std::vector<Op> k = {Op::Box, Op::Diamond};
    static const std::vector<Op> ltl = {Op::Next, Op::Until, Op::Release, Op::Eventually, Op::Always};
    static const std::vector<Op> ctl = {Op::EX, Op::AX, Op::EU, Op::AU, Op::EF, Op::AF, Op::EG, Op::AG};
    switch (logic) {
    case LogicId::K: return k;
    case LogicId::LTL: return ltl;
    case LogicId::CTL: return ctl;
    }
    return k;
}

Formula leaf(Rng& rng, const std::vector<std::string>& atoms)
{
    const auto r = below(rng, atoms.size() * 4 + 2);
    if (r == 0)
        return verum();
    if (r == 1)
        return falsum();
    return atom(atoms[(r - 2) % atoms.size()]);
}

std::vector<std::pair<std::string, std::string>> named_edges(const std::set<std::pair<std::size_t, std::size_t>>& e)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [a, b] : e)
        out.emplace_back(sid(a), sid(b));
    return out;
}

} // namespace

Formula random_formula(Rng& rng, LogicId logic, std::size_t max_depth, const std::vector<std::string>& atoms)
{
    if (max_depth == 0 || coin(rng, 0.2))
        return leaf(rng, atoms);
    const auto& temporal = temporal_ops(logic);
    static const std::vector<Op> boolean = {Op::Not, Op::And, Op::Or, Op::Implies};
    const Op op = coin(rng, 0.55) ? temporal[below(rng, temporal.size())] : boolean[below(rng, boolean.size())];
    Formula a = random_formula(rng, logic, max_depth - 1, atoms);
    Formula b = arity(op) == 2 ? random_formula(rng, logic, max_depth - 1, atoms) : Formula{};
    return make_node(op, {}, std::move(a), std::move(b));
}

PartialModel random_partial_model(Rng& rng, LogicId logic, std::size_t max_states,
                                  const std::vector<std::string>& atoms)
{
    const auto n = 1 + below(rng, max_states);
    std::vector<ModelState> states;
    for (std::size_t i = 0; i < n; ++i)
        states.push_back({sid(i), random_label(rng, atoms)});
    std::set<std::pair<std::size_t, std::size_t>> edges;
    if (logic == LogicId::LTL) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            edges.emplace(i, i + 1);
        if (coin(rng, 0.4))
            edges.emplace(n - 1, below(rng, n));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (coin(rng, 0.3))
                    edges.emplace(i, j);
    }
    return make_model(logic, atoms, std::move(states), named_edges(edges), "s0");
}

PartialModel random_complete_model(Rng& rng, LogicId logic, std::size_t max_states,
                                   const std::vector<std::string>& atoms)
{
    auto m = random_partial_model(rng, logic, max_states, atoms);
    const auto n = m.states.size();
    std::set<std::pair<std::size_t, std::size_t>> edges(m.transitions.begin(), m.transitions.end());
    if (logic == LogicId::LTL) {
        if (!m.has_transition(n - 1, 0) && m.successor_lists()[n - 1].empty())
            edges.emplace(n - 1, below(rng, n));
    } else if (logic == LogicId::CTL) {
        const auto succ = m.successor_lists();
        for (std::size_t i = 0; i < n; ++i)
            if (succ[i].empty())
                edges.emplace(i, below(rng, n));
    }
    return make_model(logic, m.atoms, m.states, named_edges(edges), "s0");
}

SynthesizedModel random_candidate(Rng& rng, const PartialModel& m)
{
    const auto n = m.states.size();
    const auto k = below(rng, 3);
    std::vector<ModelState> states = m.states;
    std::vector<std::string> names;
    for (const auto& s : m.states)
        names.push_back(s.id);
    for (std::size_t i = 0; i < k; ++i) {
        names.push_back(fresh_state_id(i));
        states.push_back({names.back(), random_label(rng, m.atoms)});
    }
    const auto total = n + k;
    std::set<std::pair<std::size_t, std::size_t>> edges(m.transitions.begin(), m.transitions.end());

    if (m.logic == LogicId::LTL) {
        const auto order = chain_order(m);
        std::vector<std::size_t> chain = order;
        const bool closed = !m.successor_lists()[order.back()].empty();
        std::size_t extra = 0;
        if (!closed)
            for (std::size_t i = 0; i < k; ++i) {
                edges.emplace(chain.back(), n + i);
                chain.push_back(n + i);
                ++extra;
            }
        states.resize(n + extra);
        names.resize(n + extra);
        if (!closed)
            edges.emplace(chain.back(), chain[below(rng, chain.size())]);
    } else {
        for (std::size_t i = 0; i < total; ++i)
            for (std::size_t j = 0; j < total; ++j)
                if ((i >= n || j >= n) && coin(rng, 0.35))
                    edges.emplace(i, j);
        if (m.logic == LogicId::CTL)
            for (std::size_t i = 0; i < total; ++i) {
                const bool dead = std::none_of(edges.begin(), edges.end(), [&](const auto& e) { return e.first == i; });
                if (dead)
                    edges.emplace(i, below(rng, total));
            }
    }

    // Perturbations that may break admissibility.
    std::vector<ModelState> perturbed = states;
    auto perturbed_edges = edges;
    std::string root = m.states[m.root].id;
    switch (below(rng, 8)) {
    case 0:
        perturbed[below(rng, n)].label = random_label(rng, m.atoms);
        break;
    case 1:
        if (m.logic != LogicId::LTL)
            perturbed_edges.emplace(below(rng, n), below(rng, n));
        break;
    case 2:
        if (m.logic != LogicId::LTL && !perturbed_edges.empty())
            perturbed_edges.erase(std::next(perturbed_edges.begin(), below(rng, perturbed_edges.size())));
        break;
    case 3:
        root = perturbed[below(rng, perturbed.size())].id;
        break;
    default:
        break;
    }

    std::vector<std::pair<std::string, std::string>> named;
    for (const auto& [a, b] : perturbed_edges)
        named.emplace_back(perturbed[a].id, perturbed[b].id);
    SynthesizedModel out;
    try {
        out.model = make_model(m.logic, m.atoms, perturbed, named, root);
    } catch (const ModelError&) {
        named.clear();
        for (const auto& [a, b] : edges)
            named.emplace_back(states[a].id, states[b].id);
        out.model = make_model(m.logic, m.atoms, states, named, m.states[m.root].id);
    }
    for (const auto& s : m.states)
        out.embedding[s.id] = s.id;
    if (coin(rng, 0.05) && n >= 2)
        std::swap(out.embedding[m.states[0].id], out.embedding[m.states[1].id]);
    return out;
}

bool brute_force_k(const PartialModel& m, std::size_t state, const Formula& f)
{
    switch (f.op()) {
    case Op::Atom: return m.has_atom(state, f.name());
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !brute_force_k(m, state, f.lhs());
    case Op::And: return brute_force_k(m, state, f.lhs()) && brute_force_k(m, state, f.rhs());
    case Op::Or: return brute_force_k(m, state, f.lhs()) || brute_force_k(m, state, f.rhs());
    case Op::Implies: return !brute_force_k(m, state, f.lhs()) || brute_force_k(m, state, f.rhs());
    case Op::Box:
        for (const auto& [from, to] : m.transitions)
            if (from == state && !brute_force_k(m, to, f.lhs()))
                return false;
        return true;
    case Op::Diamond:
        for (const auto& [from, to] : m.transitions)
            if (from == state && brute_force_k(m, to, f.lhs()))
                return true;
        return false;
    default: throw std::invalid_argument("brute_force_k: not a K formula");
    }
}

bool recheck_admissible(const PartialModel& m, const SynthesizedModel& c, ExtensionMode mode)
{
    const auto& cm = c.model;
    if (std::set<std::string>(m.atoms.begin(), m.atoms.end()) != std::set<std::string>(cm.atoms.begin(), cm.atoms.end()))
        return false;
    if (m.logic != cm.logic)
        return false;

    std::map<std::string, std::set<std::string>> clabel;
    for (const auto& s : cm.states)
        clabel[s.id] = {s.label.begin(), s.label.end()};
    std::set<std::pair<std::string, std::string>> cedges;
    for (const auto& [a, b] : cm.transitions)
        cedges.emplace(cm.states[a].id, cm.states[b].id);

    std::set<std::string> images;
    for (const auto& s : m.states) {
        auto it = c.embedding.find(s.id);
        if (it == c.embedding.end() || !clabel.count(it->second) || !images.insert(it->second).second)
            return false;
        if (clabel[it->second] != std::set<std::string>(s.label.begin(), s.label.end()))
            return false;
    }
    if (c.embedding.size() != m.states.size())
        return false;
    if (c.embedding.at(m.states[m.root].id) != cm.states[cm.root].id)
        return false;

    std::set<std::pair<std::string, std::string>> old_edges;
    for (const auto& [a, b] : m.transitions)
        old_edges.emplace(c.embedding.at(m.states[a].id), c.embedding.at(m.states[b].id));
    for (const auto& e : old_edges)
        if (!cedges.count(e))
            return false;

    if (mode == ExtensionMode::Grow) {
        for (const auto& e : cedges)
            if (images.count(e.first) && images.count(e.second) && !old_edges.count(e))
                return false;
    } else if (mode == ExtensionMode::FixedStates) {
        if (cm.states.size() != m.states.size())
            return false;
    } else {
        if (cm.states.size() != m.states.size() || cedges != old_edges)
            return false;
    }

    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [a, b] : cedges)
        out[a].push_back(b);
    switch (cm.logic) {
    case LogicId::K: return true;
    case LogicId::CTL:
        return std::all_of(cm.states.begin(), cm.states.end(), [&](const auto& s) { return out.count(s.id) > 0; });
    case LogicId::LTL: {
        // A lasso: every state has exactly one successor and the walk from
        // the root visits them all.
        for (const auto& s : cm.states)
            if (out[s.id].size() != 1)
                return false;
        std::set<std::string> seen;
        for (std::string at = cm.states[cm.root].id; seen.insert(at).second;)
            at = out[at].front();
        return seen.size() == cm.states.size();
    }
    }
    return false;
}

void for_each_tiny_model(std::size_t max_states, const std::function<void(const TinyModel&)>& visit)
{
    for (std::size_t n = 1; n <= max_states; ++n) {
        const std::size_t bits = n * n;
        std::vector<std::size_t> perm(n);
        TinyModel t;
        t.n = n;
        // Valuations in non-decreasing order pick one ordering per class;
        // the edge mask is then minimised over valuation-preserving
        // permutations.
        std::vector<std::uint8_t> val(n, 0);
        while (true) {
            std::vector<std::vector<std::size_t>> perms;
            std::iota(perm.begin(), perm.end(), 0);
            do {
                bool keeps = true;
                for (std::size_t i = 0; i < n; ++i)
                    keeps = keeps && val[perm[i]] == val[i];
                if (keeps && !std::is_sorted(perm.begin(), perm.end()))
                    perms.push_back(perm);
            } while (std::next_permutation(perm.begin(), perm.end()));

            for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
                bool minimal = true;
                for (const auto& p : perms) {
                    std::uint32_t image = 0;
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            if (mask >> (i * n + j) & 1u)
                                image |= 1u << (p[i] * n + p[j]);
                    if (image < mask) {
                        minimal = false;
                        break;
                    }
                }
                if (!minimal)
                    continue;
                for (std::size_t i = 0; i < n; ++i) {
                    t.val[i] = val[i];
                    t.succ[i] = 0;
                    for (std::size_t j = 0; j < n; ++j)
                        if (mask >> (i * n + j) & 1u)
                            t.succ[i] |= static_cast<std::uint8_t>(1u << j);
                }
                visit(t);
            }

            std::size_t i = n;
            while (i > 0 && val[i - 1] == 3)
                --i;
            if (i == 0)
                break;
            ++val[i - 1];
            std::fill(val.begin() + static_cast<std::ptrdiff_t>(i), val.end(), val[i - 1]);
        }
    }
}

PartialModel to_partial_model(const TinyModel& t, LogicId logic)
{
    std::vector<ModelState> states;
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < t.n; ++i) {
        std::vector<std::string> label;
        if (t.val[i] & 1)
            label.push_back("p");
        if (t.val[i] & 2)
            label.push_back("q");
        states.push_back({sid(i), label});
        for (std::size_t j = 0; j < t.n; ++j)
            if (t.succ[i] >> j & 1)
                edges.emplace_back(sid(i), sid(j));
    }
    return make_model(logic, default_atoms, std::move(states), edges, "s0");
}

namespace {

std::uint8_t atom_bit(const Formula& f)
{
    return f.name() == "p" ? 1 : f.name() == "q" ? 2 : 0;
}

// One operator applied to the masks of its operands.
std::uint8_t tiny_step(const TinyModel& t, Op op, std::uint8_t bit, std::uint8_t a, std::uint8_t b)
{
    const std::uint8_t full = static_cast<std::uint8_t>((1u << t.n) - 1);
    const auto some = [&](std::uint8_t x) {
        std::uint8_t r = 0;
        for (std::size_t s = 0; s < t.n; ++s)
            if (t.succ[s] & x)
                r |= static_cast<std::uint8_t>(1u << s);
        return r;
    };
    const auto all = [&](std::uint8_t x) {
        std::uint8_t r = 0;
        for (std::size_t s = 0; s < t.n; ++s)
            if ((t.succ[s] & ~x & full) == 0)
                r |= static_cast<std::uint8_t>(1u << s);
        return r;
    };
    const auto lfp = [&](auto step) {
        std::uint8_t z = 0;
        for (std::uint8_t next; (next = step(z)) != z;)
            z = next;
        return z;
    };
    const auto gfp = [&](auto step) {
        std::uint8_t z = full;
        for (std::uint8_t next; (next = step(z)) != z;)
            z = next;
        return z;
    };

    switch (op) {
    case Op::Atom: {
        std::uint8_t r = 0;
        for (std::size_t s = 0; s < t.n; ++s)
            if (t.val[s] & bit)
                r |= static_cast<std::uint8_t>(1u << s);
        return r;
    }
    case Op::True: return full;
    case Op::False: return 0;
    case Op::Not: return static_cast<std::uint8_t>(~a & full);
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Implies: return static_cast<std::uint8_t>((~a | b) & full);
    case Op::Diamond:
    case Op::EX: return some(a);
    case Op::Box:
    case Op::AX: return all(a);
    case Op::EU: return lfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(b | (a & some(z))); });
    case Op::AU: return lfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(b | (a & all(z) & some(full))); });
    case Op::EF: return lfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(a | some(z)); });
    case Op::AF: return lfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(a | (all(z) & some(full))); });
    case Op::EG: return gfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(a & some(z)); });
    case Op::AG: return gfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(a & all(z)); });
    case Op::ER: return gfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(b & (a | some(z))); });
    case Op::AR: return gfp([&](std::uint8_t z) { return static_cast<std::uint8_t>(b & (a | all(z))); });
    default: throw std::invalid_argument("tiny_eval: unsupported operator");
    }
}

} // namespace

std::uint8_t tiny_eval(const TinyModel& t, const Formula& f)
{
    const int k = arity(f.op());
    const std::uint8_t a = k >= 1 ? tiny_eval(t, f.lhs()) : 0;
    const std::uint8_t b = k == 2 ? tiny_eval(t, f.rhs()) : 0;
    return tiny_step(t, f.op(), f.op() == Op::Atom ? atom_bit(f) : 0, a, b);
}

TinyPool::TinyPool(const std::vector<Formula>& formulas)
{
    for (const auto& f : formulas)
        roots_.push_back(add(f));
}

std::size_t TinyPool::add(const Formula& f)
{
    if (auto it = index_.find(f.identity()); it != index_.end())
        return it->second;
    Step st{f.op(), f.op() == Op::Atom ? atom_bit(f) : std::uint8_t{0}};
    const int k = arity(f.op());
    if (k >= 1)
        st.lhs = add(f.lhs());
    if (k == 2)
        st.rhs = add(f.rhs());
    steps_.push_back(st);
    index_.emplace(f.identity(), steps_.size() - 1);
    return steps_.size() - 1;
}

std::vector<std::uint8_t> TinyPool::eval(const TinyModel& t) const
{
    std::vector<std::uint8_t> v(steps_.size());
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const auto& st = steps_[i];
        v[i] = tiny_step(t, st.op, st.bit, st.lhs < i ? v[st.lhs] : 0, st.rhs < i ? v[st.rhs] : 0);
    }
    std::vector<std::uint8_t> out(roots_.size());
    for (std::size_t i = 0; i < roots_.size(); ++i)
        out[i] = v[roots_[i]];
    return out;
}

std::vector<Formula> subformulas(const Formula& f)
{
    std::vector<Formula> out{f};
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int k = arity(out[i].op());
        if (k >= 1)
            out.push_back(out[i].lhs());
        if (k == 2)
            out.push_back(out[i].rhs());
    }
    return out;
}

std::vector<Formula> formula_pool(Rng& rng, LogicId logic, std::size_t count, std::size_t max_depth)
{
    std::set<Formula> drawn;
    while (drawn.size() < count)
        drawn.insert(random_formula(rng, logic, max_depth));
    std::set<Formula> closed;
    for (const auto& f : drawn)
        for (const auto& g : subformulas(f))
            closed.insert(g);
    return {closed.begin(), closed.end()};
}

} // namespace tabsynth::testing
