#include "tabsynth/oracle.hpp"

#include "tabsynth/checker.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace tabsynth {

namespace {

void check_budget(EnumerationBudget budget)
{
    if (budget.max_new_states > max_enumeration_budget)
        throw BudgetError("enumeration budget " + std::to_string(budget.max_new_states) + " exceeds the cap of " +
                          std::to_string(max_enumeration_budget) + " new states");
}

void check_policy(ExtensionPolicy policy)
{
    if (policy.mode == ExtensionMode::Complete)
        throw std::invalid_argument("the oracle supports the grow and fixed-states policies only");
}

std::vector<std::string> valuation(const PartialModel& m, std::uint32_t bits)
{
    std::vector<std::string> out;
    for (std::size_t a = 0; a < m.atoms.size(); ++a)
        if (bits >> a & 1U)
            out.push_back(m.atoms[a]);
    return out;
}

// m plus fresh states with the given valuations and the given extra
// transitions (indices over old states followed by fresh ones).
SynthesizedModel build_extension(const PartialModel& m, const std::vector<std::uint32_t>& vals,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& extra)
{
    std::vector<ModelState> states = m.states;
    const auto ids = fresh_state_ids(m, vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
        states.push_back({ids[i], valuation(m, vals[i])});
    const auto id = [&](std::size_t i) { return states[i].id; };
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [a, b] : m.transitions)
        edges.emplace_back(id(a), id(b));
    for (const auto& [a, b] : extra)
        edges.emplace_back(id(a), id(b));
    SynthesizedModel out;
    out.model = make_model(m.logic, m.atoms, states, edges, m.states[m.root].id);
    for (const auto& s : m.states)
        out.embedding.emplace(s.id, s.id);
    return out;
}

bool has_back_edge(const PartialModel& m)
{
    const auto order = chain_order(m);
    return !order.empty() && m.transitions.size() == order.size();
}

std::size_t fresh_limit(const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget)
{
    if (policy.mode == ExtensionMode::FixedStates)
        return 0;
    if (m.logic == LogicId::LTL && has_back_edge(m))
        return 0;
    return budget.max_new_states;
}

// Transitions the policy lets an extension add, given k fresh states.
std::vector<std::pair<std::size_t, std::size_t>> permitted_edges(const PartialModel& m, ExtensionPolicy policy,
                                                                 std::size_t k)
{
    const std::size_t n = m.states.size();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (policy.mode == ExtensionMode::FixedStates) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (!m.has_transition(a, b))
                    out.emplace_back(a, b);
        return out;
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t j = 0; j < k; ++j)
            out.emplace_back(a, n + j);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t a = 0; a < n; ++a)
            out.emplace_back(n + j, a);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            out.emplace_back(n + i, n + j);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Enumerator

ExtensionEnumerator::ExtensionEnumerator(const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                                         LogicId logic)
    : m_(m), policy_(policy), budget_(budget)
{
    check_budget(budget);
    check_policy(policy);
    if (m.logic != logic)
        throw std::invalid_argument("model logic does not match " + std::string(to_string(logic)));
    validate(m);
}

bool ExtensionEnumerator::start_block()
{
    if (fresh_ > fresh_limit(m_, policy_, budget_))
        return false;
    vals_.assign(fresh_, 0);
    mask_ = 0;
    if (m_.logic == LogicId::LTL) {
        permitted_.clear();
        mask_end_ = has_back_edge(m_) ? 1 : m_.states.size() + fresh_;
        return true;
    }
    permitted_ = permitted_edges(m_, policy_, fresh_);
    if (permitted_.size() > 40)
        throw std::invalid_argument("partial model too large for enumeration");
    mask_end_ = std::uint64_t{1} << permitted_.size();
    return true;
}

bool ExtensionEnumerator::advance()
{
    if (done_)
        return false;
    if (!started_) {
        started_ = true;
        fresh_ = 0;
        if (!start_block())
            done_ = true;
        return !done_;
    }
    if (++mask_ < mask_end_)
        return true;
    mask_ = 0;
    const std::uint32_t radix = 1U << m_.atoms.size();
    std::size_t i = 0;
    for (; i < vals_.size(); ++i) {
        if (++vals_[i] < radix)
            break;
        vals_[i] = 0;
    }
    if (i < vals_.size())
        return true;
    ++fresh_;
    if (!start_block())
        done_ = true;
    return !done_;
}

bool ExtensionEnumerator::acceptable() const
{
    // Closing an open chain onto itself would add an old-to-old transition.
    if (m_.logic == LogicId::LTL)
        return policy_.mode == ExtensionMode::FixedStates || fresh_ > 0 || has_back_edge(m_);
    if (m_.logic != LogicId::CTL)
        return true;
    const std::size_t n = m_.states.size() + fresh_;
    std::vector<char> has_succ(n, 0);
    for (const auto& [a, b] : m_.transitions)
        has_succ[a] = 1;
    for (std::size_t e = 0; e < permitted_.size(); ++e)
        if (mask_ >> e & 1U)
            has_succ[permitted_[e].first] = 1;
    return std::all_of(has_succ.begin(), has_succ.end(), [](char c) { return c != 0; });
}

bool ExtensionEnumerator::canonical() const
{
    if (m_.logic == LogicId::LTL || fresh_ < 2)
        return true;
    const std::size_t n = m_.states.size();
    const std::size_t k = fresh_;
    std::vector<std::vector<int>> bit(n + k, std::vector<int>(n + k, -1));
    for (std::size_t e = 0; e < permitted_.size(); ++e)
        bit[permitted_[e].first][permitted_[e].second] = static_cast<int>(e);
    const auto present = [&](std::size_t a, std::size_t b) {
        const int e = bit[a][b];
        return e >= 0 && (mask_ >> e & 1U);
    };
    const auto encode = [&](const std::vector<std::size_t>& p) {
        std::vector<std::uint32_t> out;
        for (std::size_t j = 0; j < k; ++j)
            out.push_back(vals_[p[j]]);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t j = 0; j < k; ++j)
                out.push_back(present(a, n + p[j]));
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t a = 0; a < n; ++a)
                out.push_back(present(n + p[j], a));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                out.push_back(present(n + p[i], n + p[j]));
        return out;
    };
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    const auto self = encode(perm);
    while (std::next_permutation(perm.begin(), perm.end()))
        if (encode(perm) < self)
            return false;
    return true;
}

SynthesizedModel ExtensionEnumerator::build() const
{
    std::vector<std::pair<std::size_t, std::size_t>> extra;
    if (m_.logic == LogicId::LTL) {
        if (has_back_edge(m_))
            return build_extension(m_, vals_, extra);
        const auto order = chain_order(m_);
        std::vector<std::size_t> positions = order;
        for (std::size_t j = 0; j < fresh_; ++j)
            positions.push_back(m_.states.size() + j);
        for (std::size_t i = order.size() - 1; i + 1 < positions.size(); ++i)
            extra.emplace_back(positions[i], positions[i + 1]);
        extra.emplace_back(positions.back(), positions[mask_]);
        return build_extension(m_, vals_, extra);
    }
    for (std::size_t e = 0; e < permitted_.size(); ++e)
        if (mask_ >> e & 1U)
            extra.push_back(permitted_[e]);
    return build_extension(m_, vals_, extra);
}

std::optional<SynthesizedModel> ExtensionEnumerator::next()
{
    while (advance())
        if (acceptable() && canonical())
            return build();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Pruned search

namespace {

enum : std::uint8_t { F = 0, U = 1, T = 2 };

// Depth-first search over the transitions an extension may add. Each search
// node fixes some transitions as present or absent; the formula is evaluated
// in three-valued logic over all completions of that choice and the branch
// is dropped once it is false in every completion.
class PrunedSearch {
public:
    PrunedSearch(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget)
        : phi_(phi), m_(m), policy_(policy), budget_(budget)
    {
        compile(core(to_nnf(phi)));
    }

    OracleResult run()
    {
        OracleResult r;
        const std::size_t limit = fresh_limit(m_, policy_, budget_);
        for (std::size_t k = 0; k <= limit && !r.value; ++k) {
            std::vector<std::uint32_t> vals(k, 0);
            // Fresh states are interchangeable, so non-decreasing valuations
            // cover every extension up to renaming.
            for (;;) {
                if (try_block(vals, r))
                    break;
                if (!next_sorted(vals))
                    break;
            }
        }
        return r;
    }

private:
    struct Node {
        Op op;
        int lhs = -1;
        int rhs = -1;
        int atom = -1;
    };

    int compile(const Formula& f)
    {
        if (auto it = index_.find(f.identity()); it != index_.end())
            return it->second;
        Node n{f.op()};
        if (f.op() == Op::Atom) {
            const auto it = std::find(m_.atoms.begin(), m_.atoms.end(), f.name());
            n.atom = it == m_.atoms.end() ? -1 : static_cast<int>(it - m_.atoms.begin());
        } else {
            if (f.lhs().valid())
                n.lhs = compile(f.lhs());
            if (f.rhs().valid())
                n.rhs = compile(f.rhs());
        }
        nodes_.push_back(n);
        const int id = static_cast<int>(nodes_.size() - 1);
        index_.emplace(f.identity(), id);
        return id;
    }

    bool next_sorted(std::vector<std::uint32_t>& vals) const
    {
        const std::uint32_t radix = 1U << m_.atoms.size();
        for (std::size_t i = vals.size(); i-- > 0;) {
            if (vals[i] + 1 < radix) {
                ++vals[i];
                for (std::size_t j = i + 1; j < vals.size(); ++j)
                    vals[j] = vals[i];
                return true;
            }
        }
        return false;
    }

    bool try_block(const std::vector<std::uint32_t>& vals, OracleResult& r)
    {
        const std::size_t n = m_.states.size();
        n_ = n + vals.size();
        vals_ = vals;
        atom_bits_.assign(n_, 0);
        for (std::size_t s = 0; s < n; ++s)
            for (const auto& a : m_.states[s].label)
                atom_bits_[s] |= 1U << (std::find(m_.atoms.begin(), m_.atoms.end(), a) - m_.atoms.begin());
        for (std::size_t j = 0; j < vals.size(); ++j)
            atom_bits_[n + j] = vals[j];

        must_.assign(n_, 0);
        for (const auto& [a, b] : m_.transitions)
            must_[a] |= 1U << b;
        edges_ = ordered_edges(vals.size());
        may_ = must_;
        for (const auto& [a, b] : edges_)
            may_[a] |= 1U << b;
        chosen_.clear();
        return dfs(0, r);
    }

    // Root first, so that the formula's top-level obligations are settled
    // early and prune more.
    std::vector<std::pair<std::size_t, std::size_t>> ordered_edges(std::size_t k) const
    {
        auto edges = permitted_edges(m_, policy_, k);
        std::vector<std::size_t> rank(n_, n_);
        std::deque<std::size_t> queue{m_.root};
        rank[m_.root] = 0;
        std::size_t next = 1;
        std::vector<std::vector<std::size_t>> adj(n_);
        for (const auto& [a, b] : m_.transitions)
            adj[a].push_back(b);
        for (const auto& [a, b] : edges)
            adj[a].push_back(b);
        while (!queue.empty()) {
            const auto s = queue.front();
            queue.pop_front();
            for (auto t : adj[s])
                if (rank[t] == n_) {
                    rank[t] = next++;
                    queue.push_back(t);
                }
        }
        std::stable_sort(edges.begin(), edges.end(),
                         [&](const auto& x, const auto& y) { return rank[x.first] < rank[y.first]; });
        return edges;
    }

    bool dfs(std::size_t i, OracleResult& r)
    {
        if (m_.logic == LogicId::CTL)
            for (std::size_t s = 0; s < n_; ++s)
                if (may_[s] == 0)
                    return false;
        if (evaluate() == F)
            return false;
        if (i == edges_.size()) {
            ++r.examined;
            auto candidate = build_extension(m_, vals_, chosen_);
            if (!holds_at_root(candidate.model, phi_))
                return false;
            r.value = true;
            r.witness = std::move(candidate);
            return true;
        }
        const auto [a, b] = edges_[i];
        const std::uint32_t bit = 1U << b;
        may_[a] &= ~bit;
        if (dfs(i + 1, r))
            return true;
        may_[a] |= bit;
        must_[a] |= bit;
        chosen_.push_back(edges_[i]);
        const bool found = dfs(i + 1, r);
        chosen_.pop_back();
        must_[a] &= ~bit;
        return found;
    }

    // Three-valued value of the formula at the root.
    std::uint8_t evaluate()
    {
        values_.assign(nodes_.size() * n_, F);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            eval_node(i);
        return values_[(nodes_.size() - 1) * n_ + m_.root];
    }

    std::uint8_t* row(int i) { return &values_[static_cast<std::size_t>(i) * n_]; }

    void eval_node(std::size_t i)
    {
        const Node& nd = nodes_[i];
        std::uint8_t* out = row(static_cast<int>(i));
        switch (nd.op) {
        case Op::True: std::fill(out, out + n_, T); return;
        case Op::False: return;
        case Op::Atom:
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = nd.atom >= 0 && (atom_bits_[s] >> nd.atom & 1U) ? T : F;
            return;
        case Op::Not: {
            const auto* a = row(nd.lhs);
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = static_cast<std::uint8_t>(T - a[s]);
            return;
        }
        case Op::And:
        case Op::Or: {
            const auto* a = row(nd.lhs);
            const auto* b = row(nd.rhs);
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = nd.op == Op::And ? std::min(a[s], b[s]) : std::max(a[s], b[s]);
            return;
        }
        case Op::Diamond:
        case Op::EX:
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = exists_next(s, row(nd.lhs));
            return;
        case Op::Box:
        case Op::AX:
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = forall_next(s, row(nd.lhs));
            return;
        case Op::EU: eu(row(nd.lhs), row(nd.rhs), out); return;
        case Op::AU: au(row(nd.lhs), row(nd.rhs), out); return;
        case Op::ER:
        case Op::AR: {
            std::vector<std::uint8_t> a(n_), b(n_), tmp(n_);
            for (std::size_t s = 0; s < n_; ++s) {
                a[s] = static_cast<std::uint8_t>(T - row(nd.lhs)[s]);
                b[s] = static_cast<std::uint8_t>(T - row(nd.rhs)[s]);
            }
            if (nd.op == Op::ER)
                au(a.data(), b.data(), tmp.data());
            else
                eu(a.data(), b.data(), tmp.data());
            for (std::size_t s = 0; s < n_; ++s)
                out[s] = static_cast<std::uint8_t>(T - tmp[s]);
            return;
        }
        default: throw std::logic_error("oracle: unexpected operator " + std::string(op_name(nd.op)));
        }
    }

    std::uint8_t exists_next(std::size_t s, const std::uint8_t* v) const
    {
        std::uint8_t best = F;
        for (std::size_t t = 0; t < n_; ++t) {
            if (must_[s] >> t & 1U) {
                if (v[t] == T)
                    return T;
                best = std::max(best, v[t]);
            } else if (may_[s] >> t & 1U && v[t] != F) {
                best = U;
            }
        }
        return best;
    }

    std::uint8_t forall_next(std::size_t s, const std::uint8_t* v) const
    {
        std::uint8_t worst = T;
        for (std::size_t t = 0; t < n_; ++t) {
            if (must_[s] >> t & 1U) {
                if (v[t] == F)
                    return F;
                worst = std::min(worst, v[t]);
            } else if (may_[s] >> t & 1U && v[t] != T) {
                worst = U;
            }
        }
        return worst;
    }

    // Definitely true: least fixpoint over must-successors with true
    // operands. Possibly true: least fixpoint over may-successors with
    // not-false operands. Everything else is definitely false.
    void eu(const std::uint8_t* f, const std::uint8_t* g, std::uint8_t* out) const
    {
        std::vector<char> sure(n_, 0), maybe(n_, 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t s = 0; s < n_; ++s) {
                if (!sure[s] && (g[s] == T || (f[s] == T && any_in(must_[s], sure)))) {
                    sure[s] = 1;
                    changed = true;
                }
                if (!maybe[s] && (g[s] != F || (f[s] != F && any_in(may_[s], maybe)))) {
                    maybe[s] = 1;
                    changed = true;
                }
            }
        }
        for (std::size_t s = 0; s < n_; ++s)
            out[s] = sure[s] ? T : maybe[s] ? U : F;
    }

    void au(const std::uint8_t* f, const std::uint8_t* g, std::uint8_t* out) const
    {
        std::vector<char> sure(n_, 0), maybe(n_, 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t s = 0; s < n_; ++s) {
                if (!sure[s] && (g[s] == T || (f[s] == T && may_[s] != 0 && all_in(may_[s], sure)))) {
                    sure[s] = 1;
                    changed = true;
                }
                const bool step = all_in(must_[s], maybe) && (must_[s] != 0 || any_in(may_[s], maybe));
                if (!maybe[s] && (g[s] != F || (f[s] != F && step))) {
                    maybe[s] = 1;
                    changed = true;
                }
            }
        }
        for (std::size_t s = 0; s < n_; ++s)
            out[s] = sure[s] ? T : maybe[s] ? U : F;
    }

    bool any_in(std::uint32_t mask, const std::vector<char>& set) const
    {
        for (std::size_t t = 0; t < n_; ++t)
            if ((mask >> t & 1U) && set[t])
                return true;
        return false;
    }

    bool all_in(std::uint32_t mask, const std::vector<char>& set) const
    {
        for (std::size_t t = 0; t < n_; ++t)
            if ((mask >> t & 1U) && !set[t])
                return false;
        return true;
    }

    const Formula& phi_;
    const PartialModel& m_;
    ExtensionPolicy policy_;
    EnumerationBudget budget_;
    std::vector<Node> nodes_;
    std::unordered_map<const void*, int> index_;

    std::size_t n_ = 0;
    std::vector<std::uint32_t> vals_;
    std::vector<std::uint32_t> atom_bits_;
    std::vector<std::uint32_t> must_;
    std::vector<std::uint32_t> may_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::pair<std::size_t, std::size_t>> chosen_;
    std::vector<std::uint8_t> values_;
};

OracleResult search_exhaustive(const Formula& phi, const PartialModel& m, ExtensionPolicy policy,
                               EnumerationBudget budget)
{
    OracleResult r;
    ExtensionEnumerator stream(m, policy, budget, m.logic);
    while (auto candidate = stream.next()) {
        ++r.examined;
        if (holds_at_root(candidate->model, phi)) {
            r.value = true;
            r.witness = std::move(candidate);
            break;
        }
    }
    return r;
}

OracleResult search(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                    LogicId logic, OracleStrategy strategy)
{
    check_budget(budget);
    check_policy(policy);
    if (m.logic != logic)
        throw std::invalid_argument("model logic does not match " + std::string(to_string(logic)));
    if (!formula_in_logic(phi, logic))
        throw std::invalid_argument("formula is not in " + std::string(to_string(logic)));
    const PartialModel extended = with_vocabulary(m, atoms_of(phi));
    if (strategy == OracleStrategy::Exhaustive || logic == LogicId::LTL)
        return search_exhaustive(phi, extended, policy, budget);
    if (extended.states.size() + budget.max_new_states > 32)
        throw std::invalid_argument("partial model too large for the oracle");
    return PrunedSearch(phi, extended, policy, budget).run();
}

} // namespace

OracleResult oracle_epm(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                        LogicId logic, OracleStrategy strategy)
{
    OracleResult r = search(phi, m, policy, budget, logic, strategy);
    r.bounded = !r.value;
    return r;
}

OracleResult oracle_mcpm(const Formula& phi, const PartialModel& m, ExtensionPolicy policy, EnumerationBudget budget,
                         LogicId logic, OracleStrategy strategy)
{
    OracleResult r = search(to_nnf(neg(phi)), m, policy, budget, logic, strategy);
    r.value = !r.value;
    r.bounded = r.value;
    return r;
}

} // namespace tabsynth
