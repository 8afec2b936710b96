#include "tabsynth/tableau.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace tabsynth {

std::vector<std::size_t> Tableau::origin_index(std::size_t state) const
{
    std::vector<std::size_t> out;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::State && n.alive && n.origin == state)
            out.push_back(n.id);
    return out;
}

std::vector<std::size_t> Tableau::root_candidates() const
{
    auto out = origin_index(model_.root);
    std::erase_if(out, [&](std::size_t id) { return !nodes_[id].label.contains(phi_); });
    return out;
}

std::string_view to_string(Status s) { return s == Status::Open ? "open" : "closed"; }

namespace {

Op next_op(LogicId logic)
{
    switch (logic) {
    case LogicId::K: return Op::Box;
    case LogicId::LTL: return Op::Next;
    case LogicId::CTL: return Op::AX;
    }
    return Op::Box;
}

// The obligations every successor inherits: []f, AX f or X f.
Label next_part(const Label& l, const ClosureSet& cl, LogicId logic)
{
    const Op op = next_op(logic);
    Label out = cl.empty_label();
    for (auto i : l.members())
        if (cl[i].op == op)
            out.insert(cl[i].lhs);
    return out;
}

std::string node_name(const TableauNode& n) { return (n.kind == NodeKind::Prestate ? "p" : "s") + std::to_string(n.id); }

std::string describe(const Tableau& t, const TableauNode& n)
{
    std::string out = node_name(n);
    if (n.has_origin())
        out += "@" + t.model().states[n.origin].id;
    return out;
}

std::string_view group_name(GroupKind k)
{
    switch (k) {
    case GroupKind::Diamond: return "dia";
    case GroupKind::Ex: return "ex";
    case GroupKind::Default: return "default";
    case GroupKind::Next: return "next";
    case GroupKind::Edge: return "edge";
    }
    return "?";
}

bool any_alive(const Tableau& t, const Group& g)
{
    return std::any_of(g.members.begin(), g.members.end(), [&](std::size_t m) { return t.node(m).alive; });
}

bool is_fresh_group(GroupKind k) { return k != GroupKind::Edge; }

} // namespace

// ---------------------------------------------------------------------------
// Phase 1

class TableauBuilder {
public:
    explicit TableauBuilder(Tableau& t) : t_(t), cl_(*t.closure_) {}

    void run()
    {
        const auto& m = t_.model_;
        for (std::size_t s = 0; s < m.states.size(); ++s) {
            Label l = (t_.options_.free_root && s == m.root) ? cl_.empty_label() : literals(s);
            if (s == m.root)
                l.insert(t_.phi_);
            seeds_.push_back(prestate(std::move(l), s));
        }
        while (!queue_.empty()) {
            const auto id = queue_.front();
            queue_.pop_front();
            if (t_.nodes_[id].kind == NodeKind::Prestate) {
                expand_prestate(id);
                if (t_.closed_)
                    break;
            } else {
                expand_state(id);
            }
        }
        for (const auto& n : t_.nodes_)
            ++(n.kind == NodeKind::Prestate ? t_.stats_.pretableau_prestates : t_.stats_.pretableau_states);
    }

private:
    Label literals(std::size_t s) const { return cl_.literals(t_.model_.atoms, t_.model_.states[s].label); }

    std::size_t add_node(NodeKind kind, Label l, std::size_t origin)
    {
        TableauNode n;
        n.id = t_.nodes_.size();
        n.kind = kind;
        n.label = std::move(l);
        n.origin = origin;
        t_.nodes_.push_back(std::move(n));
        queue_.push_back(t_.nodes_.back().id);
        return t_.nodes_.back().id;
    }

    std::size_t prestate(Label l, std::size_t origin)
    {
        auto key = std::make_pair(l, origin);
        if (auto it = prestates_.find(key); it != prestates_.end())
            return it->second;
        const auto id = add_node(NodeKind::Prestate, std::move(l), origin);
        prestates_.emplace(std::move(key), id);
        return id;
    }

    std::size_t state(Label l, std::size_t origin)
    {
        auto key = std::make_pair(l, origin);
        if (auto it = states_.find(key); it != states_.end())
            return it->second;
        const auto id = add_node(NodeKind::State, std::move(l), origin);
        states_.emplace(std::move(key), id);
        return id;
    }

    void expand_prestate(std::size_t id)
    {
        const Label label = t_.nodes_[id].label;
        const auto origin = t_.nodes_[id].origin;
        const auto expansions = origin != no_origin ? complete_expansions(label, cl_) : full_expansions(label, cl_);
        for (const auto& e : expansions) {
            const auto sid = state(e, origin);
            t_.nodes_[id].offspring.push_back(sid);
            t_.trace("SR " + describe(t_, t_.nodes_[id]) + " -> " + describe(t_, t_.nodes_[sid]) + " " + cl_.render(e));
        }
        const bool seed = std::find(seeds_.begin(), seeds_.end(), id) != seeds_.end();
        if (seed && expansions.empty()) {
            t_.closed_ = true;
            t_.closed_origin_ = t_.model_.states[origin].id;
            t_.trace("CLOSED-ORIGIN " + *t_.closed_origin_);
        }
    }

    void add_group(std::size_t sid, GroupKind kind, std::size_t formula, Label l, std::size_t origin)
    {
        const auto pid = prestate(std::move(l), origin);
        t_.nodes_[sid].groups.push_back({kind, formula, pid, {}});
        t_.trace("NEXT " + describe(t_, t_.nodes_[sid]) + " -> " + describe(t_, t_.nodes_[pid]) + " [" +
                 std::string(group_name(kind)) + "] " + cl_.render(t_.nodes_[pid].label));
    }

    void expand_state(std::size_t sid)
    {
        const Label label = t_.nodes_[sid].label;
        const auto origin = t_.nodes_[sid].origin;
        const Label nx = next_part(label, cl_, t_.logic_);
        const bool fresh_ok = t_.options_.mode != ExtensionMode::Complete;
        const bool has_model_succ = origin != no_origin && !t_.model_succ_[origin].empty();

        switch (t_.logic_) {
        case LogicId::K:
        case LogicId::CTL: {
            const Op want = t_.logic_ == LogicId::K ? Op::Diamond : Op::EX;
            bool any = false;
            for (auto i : label.members()) {
                if (cl_[i].op != want)
                    continue;
                any = true;
                if (fresh_ok) {
                    Label p = nx;
                    p.insert(cl_[i].lhs);
                    add_group(sid, want == Op::Diamond ? GroupKind::Diamond : GroupKind::Ex, i, std::move(p), no_origin);
                }
            }
            if (t_.logic_ == LogicId::CTL && !any && fresh_ok && !has_model_succ)
                add_group(sid, GroupKind::Default, ClosureSet::npos, nx, no_origin);
            break;
        }
        case LogicId::LTL:
            if (fresh_ok && !has_model_succ)
                add_group(sid, GroupKind::Next, ClosureSet::npos, nx, no_origin);
            break;
        }

        if (origin != no_origin)
            for (auto succ : t_.model_succ_[origin]) {
                Label p = literals(succ);
                p |= nx;
                add_group(sid, GroupKind::Edge, ClosureSet::npos, std::move(p), succ);
            }
    }

    Tableau& t_;
    const ClosureSet& cl_;
    std::map<std::pair<Label, std::size_t>, std::size_t> prestates_;
    std::map<std::pair<Label, std::size_t>, std::size_t> states_;
    std::deque<std::size_t> queue_;
    std::vector<std::size_t> seeds_;
};

Tableau build_pretableau(const Formula& phi, const PartialModel& m, LogicId logic, TableauOptions options)
{
    if (m.logic != logic)
        throw std::invalid_argument("model logic " + std::string(to_string(m.logic)) + " does not match " +
                                    std::string(to_string(logic)));
    if (!formula_in_logic(phi, logic))
        throw std::invalid_argument("formula is not in " + std::string(to_string(logic)));
    if (options.mode == ExtensionMode::FixedStates)
        throw std::invalid_argument("the fixed-states policy is only supported by the oracle");

    Tableau t;
    t.logic_ = logic;
    t.model_ = with_vocabulary(m, atoms_of(phi));
    t.model_succ_ = t.model_.successor_lists();
    t.options_ = std::move(options);
    const Formula normal = to_nnf(phi);
    t.closure_ = std::make_shared<const ClosureSet>(extended_closure(normal, t.model_.atoms));
    t.phi_ = t.closure_->index_of(core(normal));
    TableauBuilder(t).run();
    return t;
}

// ---------------------------------------------------------------------------
// Phase 2

Tableau eliminate_prestates(Tableau t)
{
    if (t.phase_ != Tableau::Phase::Pretableau)
        throw std::logic_error("eliminate_prestates: tableau is not a pretableau");
    for (auto& n : t.nodes_)
        for (auto& g : n.groups)
            g.members = t.nodes_[g.prestate].offspring;
    for (auto& n : t.nodes_) {
        if (n.kind != NodeKind::Prestate)
            continue;
        n.alive = false;
        t.trace("PRUNE-PRESTATE " + describe(t, n));
    }
    t.phase_ = Tableau::Phase::Initial;
    t.stats_.initial_states = static_cast<std::size_t>(
        std::count_if(t.nodes_.begin(), t.nodes_.end(), [](const TableauNode& n) { return n.alive; }));
    return t;
}

// ---------------------------------------------------------------------------
// Phase 3

class Eliminator {
public:
    explicit Eliminator(Tableau& t) : t_(t), cl_(*t.closure_)
    {
        alive_per_origin_.assign(t.model_.states.size(), 0);
        for (const auto& n : t.nodes_)
            if (n.alive && n.has_origin())
                ++alive_per_origin_[n.origin];
        for (std::size_t i = 0; i < cl_.size(); ++i)
            if (cl_.is_eventuality(i))
                eventualities_.push_back(i);
    }

    void run()
    {
        if (!t_.closed_) {
            for (std::size_t s = 0; s < alive_per_origin_.size(); ++s)
                if (alive_per_origin_[s] == 0) {
                    close(s);
                    break;
                }
        }
        bool removed = !t_.closed_;
        while (removed && !t_.closed_) {
            removed = false;
            for (auto& n : t_.nodes_) {
                if (t_.closed_)
                    break;
                if (n.alive && !e1_holds(n)) {
                    remove(n, "E1");
                    removed = true;
                }
            }
            if (t_.closed_)
                break;
            std::vector<std::vector<char>> marks;
            for (auto e : eventualities_)
                marks.push_back(mark(e));
            for (auto& n : t_.nodes_) {
                if (t_.closed_ || !n.alive)
                    continue;
                for (std::size_t k = 0; k < eventualities_.size(); ++k)
                    if (n.label.contains(eventualities_[k]) && !marks[k][n.id]) {
                        remove(n, "E2");
                        removed = true;
                        break;
                    }
            }
        }
        t_.phase_ = Tableau::Phase::Final;
        t_.stats_.final_states = static_cast<std::size_t>(
            std::count_if(t_.nodes_.begin(), t_.nodes_.end(), [](const TableauNode& n) { return n.alive; }));
    }

private:
    bool has_alive_member_with(const Group& g, std::size_t f) const
    {
        return std::any_of(g.members.begin(), g.members.end(), [&](std::size_t m) {
            return t_.nodes_[m].alive && t_.nodes_[m].label.contains(f);
        });
    }

    bool e1_holds(const TableauNode& n) const
    {
        if (!n.has_origin())
            return std::all_of(n.groups.begin(), n.groups.end(), [&](const Group& g) { return any_alive(t_, g); });
        for (const auto& g : n.groups)
            if ((g.kind == GroupKind::Edge || g.kind == GroupKind::Default || g.kind == GroupKind::Next) &&
                !any_alive(t_, g))
                return false;
        // A <>f or EX f of a represented state may be served by a fresh
        // successor or by a successor the partial model already has.
        for (auto i : n.label.members()) {
            if (cl_[i].op != Op::Diamond && cl_[i].op != Op::EX)
                continue;
            const bool served = std::any_of(n.groups.begin(), n.groups.end(), [&](const Group& g) {
                if (g.kind == GroupKind::Edge)
                    return has_alive_member_with(g, cl_[i].lhs);
                return g.formula == i && any_alive(t_, g);
            });
            if (!served)
                return false;
        }
        return true;
    }

    // Least fixpoint: states whose eventuality e can be fulfilled in the
    // current tableau.
    std::vector<char> mark(std::size_t e) const
    {
        const auto& entry = cl_[e];
        const auto ex_e = entry.op == Op::EU ? cl_.find(ex(entry.formula)) : std::nullopt;
        std::vector<char> marked(t_.nodes_.size(), 0);
        const auto member_ok = [&](std::size_t m) {
            return t_.nodes_[m].alive && marked[m] && t_.nodes_[m].label.contains(e);
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& n : t_.nodes_) {
                if (!n.alive || marked[n.id] || !n.label.contains(e))
                    continue;
                bool ok = n.label.contains(entry.rhs);
                if (!ok && entry.op == Op::AU) {
                    bool any_group = false;
                    ok = true;
                    for (const auto& g : n.groups) {
                        if (!any_alive(t_, g))
                            continue;
                        any_group = true;
                        if (!std::any_of(g.members.begin(), g.members.end(), member_ok)) {
                            ok = false;
                            break;
                        }
                    }
                    ok = ok && any_group;
                } else if (!ok) {
                    for (const auto& g : n.groups) {
                        const bool carrier = g.kind == GroupKind::Edge || g.kind == GroupKind::Next ||
                                             (ex_e && g.kind == GroupKind::Ex && g.formula == *ex_e);
                        if (carrier && std::any_of(g.members.begin(), g.members.end(), member_ok)) {
                            ok = true;
                            break;
                        }
                    }
                }
                if (ok) {
                    marked[n.id] = 1;
                    changed = true;
                }
            }
        }
        return marked;
    }

    void remove(TableauNode& n, const char* rule)
    {
        n.alive = false;
        ++(rule[1] == '1' ? t_.stats_.eliminated_e1 : t_.stats_.eliminated_e2);
        t_.trace(std::string(rule) + " " + describe(t_, n) + " " + cl_.render(n.label));
        if (n.has_origin() && --alive_per_origin_[n.origin] == 0)
            close(n.origin);
    }

    void close(std::size_t origin)
    {
        t_.closed_ = true;
        t_.closed_origin_ = t_.model_.states[origin].id;
        t_.trace("CLOSED-ORIGIN " + *t_.closed_origin_);
    }

    Tableau& t_;
    const ClosureSet& cl_;
    std::vector<std::size_t> alive_per_origin_;
    std::vector<std::size_t> eventualities_;
};

Tableau eliminate_states(Tableau t)
{
    if (t.phase_ != Tableau::Phase::Initial)
        throw std::logic_error("eliminate_states: tableau is not in its initial phase");
    Eliminator(t).run();
    return t;
}

// ---------------------------------------------------------------------------
// Representative selection

namespace {

class Selector {
public:
    explicit Selector(const Tableau& t) : t_(t), cl_(t.closure()), n_(t.model().states.size()), pred_(n_)
    {
        for (std::size_t s = 0; s < n_; ++s)
            for (auto succ : t.model_successors(s))
                pred_[succ].push_back(s);

        // Root first, then breadth-first along the model, then the rest.
        std::vector<char> seen(n_, 0);
        std::deque<std::size_t> queue{t.model().root};
        seen[t.model().root] = 1;
        while (!queue.empty()) {
            const auto s = queue.front();
            queue.pop_front();
            order_.push_back(s);
            for (auto succ : t.model_successors(s))
                if (!seen[succ]) {
                    seen[succ] = 1;
                    queue.push_back(succ);
                }
        }
        for (std::size_t s = 0; s < n_; ++s)
            if (!seen[s])
                order_.push_back(s);

        for (std::size_t s = 0; s < n_; ++s)
            domains_.push_back(s == t.model().root ? t.root_candidates() : t.origin_index(s));
        for (std::size_t i = 0; i < cl_.size(); ++i)
            if (cl_.is_eventuality(i))
                eventualities_.push_back(i);
        assignment_.assign(n_, no_origin);
    }

    std::optional<Selection> run()
    {
        if (search(0))
            return assignment_;
        return std::nullopt;
    }

private:
    const Label& label(std::size_t node) const { return t_.node(node).label; }

    const Label& next_of(std::size_t node)
    {
        auto it = next_cache_.find(node);
        if (it == next_cache_.end())
            it = next_cache_.emplace(node, next_part(label(node), cl_, t_.logic())).first;
        return it->second;
    }

    bool assigned(std::size_t s) const { return assignment_[s] != no_origin; }

    bool all_successors_assigned(std::size_t s) const
    {
        const auto& succ = t_.model_successors(s);
        return std::all_of(succ.begin(), succ.end(), [&](std::size_t x) { return assigned(x); });
    }

    // Every <>f / EX f of the representative is served by a fresh group or by
    // the representative of a model successor.
    bool served(std::size_t s) const
    {
        const auto& node = t_.node(assignment_[s]);
        for (auto i : node.label.members()) {
            if (cl_[i].op != Op::Diamond && cl_[i].op != Op::EX)
                continue;
            const bool fresh = std::any_of(node.groups.begin(), node.groups.end(), [&](const Group& g) {
                return g.formula == i && any_alive(t_, g);
            });
            if (fresh)
                continue;
            const auto& succ = t_.model_successors(s);
            if (!std::any_of(succ.begin(), succ.end(), [&](std::size_t x) {
                    return label(assignment_[x]).contains(cl_[i].lhs);
                }))
                return false;
        }
        return true;
    }

    bool consistent(std::size_t s)
    {
        const auto u = assignment_[s];
        for (auto succ : t_.model_successors(s))
            if (assigned(succ) && !next_of(u).subset_of(label(assignment_[succ])))
                return false;
        for (auto p : pred_[s])
            if (p != s && assigned(p) && !next_of(assignment_[p]).subset_of(label(u)))
                return false;
        if (all_successors_assigned(s) && !served(s))
            return false;
        for (auto p : pred_[s])
            if (p != s && assigned(p) && all_successors_assigned(p) && !served(p))
                return false;
        return true;
    }

    bool fresh_group_alive(std::size_t node, GroupKind kind, std::size_t formula) const
    {
        const auto& groups = t_.node(node).groups;
        return std::any_of(groups.begin(), groups.end(), [&](const Group& g) {
            return g.kind == kind && (formula == ClosureSet::npos || g.formula == formula) && any_alive(t_, g);
        });
    }

    // Eventualities of the representatives, fulfilled through the chosen
    // structure. Fresh successors fulfil theirs on their own: every
    // surviving fresh state is marked in the final tableau.
    bool eventualities_fulfilled() const
    {
        for (auto e : eventualities_) {
            const auto& entry = cl_[e];
            const auto ex_e = entry.op == Op::EU ? cl_.find(ex(entry.formula)).value_or(ClosureSet::npos)
                                                 : ClosureSet::npos;
            std::vector<char> marked(n_, 0);
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t s = 0; s < n_; ++s) {
                    const auto u = assignment_[s];
                    if (marked[s] || !label(u).contains(e))
                        continue;
                    const auto& succ = t_.model_successors(s);
                    bool ok = label(u).contains(entry.rhs);
                    if (!ok && entry.op == Op::AU) {
                        ok = std::all_of(succ.begin(), succ.end(), [&](std::size_t x) { return marked[x] != 0; });
                    } else if (!ok) {
                        ok = std::any_of(succ.begin(), succ.end(), [&](std::size_t x) {
                            return marked[x] && label(assignment_[x]).contains(e);
                        });
                        if (!ok && entry.op == Op::EU)
                            ok = fresh_group_alive(u, GroupKind::Ex, ex_e);
                        if (!ok && entry.op == Op::Until)
                            ok = fresh_group_alive(u, GroupKind::Next, ClosureSet::npos);
                    }
                    if (ok) {
                        marked[s] = 1;
                        changed = true;
                    }
                }
            }
            for (std::size_t s = 0; s < n_; ++s)
                if (!marked[s] && label(assignment_[s]).contains(e))
                    return false;
        }
        return true;
    }

    bool search(std::size_t k)
    {
        if (k == n_)
            return eventualities_fulfilled();
        const auto s = order_[k];
        for (auto u : domains_[s]) {
            assignment_[s] = u;
            if (consistent(s) && search(k + 1))
                return true;
        }
        assignment_[s] = no_origin;
        return false;
    }

    const Tableau& t_;
    const ClosureSet& cl_;
    std::size_t n_;
    std::vector<std::vector<std::size_t>> pred_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> domains_;
    std::vector<std::size_t> eventualities_;
    std::vector<std::size_t> assignment_;
    std::map<std::size_t, Label> next_cache_;
};

} // namespace

std::optional<Selection> select_representatives(const Tableau& t)
{
    if (t.phase() != Tableau::Phase::Final)
        throw std::logic_error("select_representatives: tableau is not final");
    if (t.closed())
        return std::nullopt;
    return Selector(t).run();
}

Status decide(const Tableau& t)
{
    if (t.phase() != Tableau::Phase::Final)
        throw std::logic_error("decide: tableau is not final");
    if (t.closed() || t.root_candidates().empty())
        return Status::Closed;
    return select_representatives(t) ? Status::Open : Status::Closed;
}

// ---------------------------------------------------------------------------
// Model extraction

namespace {

constexpr std::size_t infinite = std::numeric_limits<std::size_t>::max();

class Extractor {
public:
    Extractor(const Tableau& t, const Selection& sel) : t_(t), cl_(t.closure()), sel_(sel)
    {
        for (std::size_t i = 0; i < cl_.size(); ++i)
            if (cl_.is_eventuality(i)) {
                eventualities_.push_back(i);
                ex_index_.push_back(cl_[i].op == Op::EU ? cl_.find(ex(cl_[i].formula)).value_or(ClosureSet::npos)
                                                        : ClosureSet::npos);
            }
        for (std::size_t k = 0; k < eventualities_.size(); ++k)
            ranks_.push_back(compute_ranks(k));
    }

    SynthesizedModel run()
    {
        const auto& m = t_.model();
        const std::size_t none = eventualities_.size();

        std::vector<ModelState> states = m.states;
        if (t_.options().free_root)
            states[m.root].label = cl_.positive_atoms(t_.node(sel_[m.root]).label);
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& [a, b] : m.transitions)
            edges.emplace_back(m.states[a].id, m.states[b].id);

        // Fresh model states are (tableau state, focus) pairs, numbered in
        // the order they are first reached.
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
        std::vector<std::pair<std::size_t, std::size_t>> fresh;
        std::vector<std::string> ids;
        std::deque<std::size_t> queue;
        const auto visit = [&](std::size_t node, std::size_t focus) {
            const auto key = std::make_pair(node, focus);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, fresh.size()).first;
                fresh.push_back(key);
                ids.push_back(fresh_state_ids(m, fresh.size()).back());
                queue.push_back(it->second);
            }
            return ids[it->second];
        };

        for (std::size_t s = 0; s < m.states.size(); ++s) {
            const auto& rep = t_.node(sel_[s]);
            for (const auto& g : rep.groups) {
                if (!is_fresh_group(g.kind) || !any_alive(t_, g))
                    continue;
                std::size_t k = none;
                for (std::size_t j = 0; j < eventualities_.size(); ++j)
                    if (g.kind == GroupKind::Ex && ex_index_[j] == g.formula)
                        k = j;
                const auto w = choose(g, k);
                edges.emplace_back(m.states[s].id, visit(w, normalize(w, 0)));
            }
        }
        while (!queue.empty()) {
            const auto i = queue.front();
            queue.pop_front();
            const auto [node, focus] = fresh[i];
            const auto from = ids[i];
            for (const auto& g : t_.node(node).groups) {
                if (!any_alive(t_, g))
                    throw InternalError("extraction reached a state with an empty successor group");
                if (focus != none && is_main(g, focus)) {
                    const auto w = choose(g, focus);
                    edges.emplace_back(from, visit(w, normalize(w, focus)));
                } else {
                    const auto w = choose(g, none);
                    edges.emplace_back(from, visit(w, normalize(w, focus == none ? 0 : focus + 1)));
                }
            }
        }
        for (std::size_t i = 0; i < fresh.size(); ++i)
            states.push_back({ids[i], cl_.positive_atoms(t_.node(fresh[i].first).label)});

        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        SynthesizedModel out;
        try {
            out.model = make_model(m.logic, m.atoms, std::move(states), edges, m.states[m.root].id);
        } catch (const ModelError& e) {
            throw InternalError(std::string("extracted model is malformed: ") + e.what());
        }
        for (const auto& s : m.states)
            out.embedding.emplace(s.id, s.id);
        return out;
    }

private:
    bool is_main(const Group& g, std::size_t k) const
    {
        switch (cl_[eventualities_[k]].op) {
        case Op::AU: return true;
        case Op::EU: return g.kind == GroupKind::Ex && g.formula == ex_index_[k];
        case Op::Until: return g.kind == GroupKind::Next;
        default: return false;
        }
    }

    // The alive member with the least rank for eventuality k, or the first
    // alive member when k is none.
    std::size_t choose(const Group& g, std::size_t k) const
    {
        std::size_t best = no_origin;
        std::size_t best_rank = infinite;
        for (auto w : g.members) {
            if (!t_.node(w).alive)
                continue;
            if (k == eventualities_.size())
                return w;
            const auto r = t_.node(w).label.contains(eventualities_[k]) ? ranks_[k][w] : infinite;
            if (best == no_origin || r < best_rank) {
                best = w;
                best_rank = r;
            }
        }
        if (best == no_origin)
            throw InternalError("extraction found no surviving successor");
        return best;
    }

    bool pending(std::size_t node, std::size_t k) const
    {
        return t_.node(node).label.contains(eventualities_[k]) && ranks_[k][node] > 0;
    }

    std::size_t normalize(std::size_t node, std::size_t start) const
    {
        const auto n = eventualities_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const auto k = (start + j) % n;
            if (pending(node, k))
                return k;
        }
        return n;
    }

    // Distance to fulfilment of eventuality k within the fresh part of the
    // final tableau.
    std::vector<std::size_t> compute_ranks(std::size_t k) const
    {
        const auto e = eventualities_[k];
        const auto& entry = cl_[e];
        std::vector<std::size_t> rank(t_.nodes().size(), infinite);
        const auto member_rank = [&](const Group& g) {
            std::size_t best = infinite;
            for (auto w : g.members)
                if (t_.node(w).alive && t_.node(w).label.contains(e))
                    best = std::min(best, rank[w]);
            return best;
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& n : t_.nodes()) {
                if (!n.alive || n.kind != NodeKind::State || n.has_origin() || !n.label.contains(e))
                    continue;
                std::size_t r = infinite;
                if (n.label.contains(entry.rhs)) {
                    r = 0;
                } else if (entry.op == Op::AU) {
                    std::size_t worst = 0;
                    for (const auto& g : n.groups)
                        worst = std::max(worst, member_rank(g));
                    if (!n.groups.empty() && worst != infinite)
                        r = worst + 1;
                } else {
                    for (const auto& g : n.groups)
                        if (is_main(g, k)) {
                            const auto b = member_rank(g);
                            if (b != infinite)
                                r = std::min(r, b + 1);
                        }
                }
                if (r < rank[n.id]) {
                    rank[n.id] = r;
                    changed = true;
                }
            }
        }
        return rank;
    }

    const Tableau& t_;
    const ClosureSet& cl_;
    const Selection& sel_;
    std::vector<std::size_t> eventualities_;
    std::vector<std::size_t> ex_index_;
    std::vector<std::vector<std::size_t>> ranks_;
};

} // namespace

SynthesizedModel extract_model(const Tableau& t, const Selection& selection)
{
    if (t.phase() != Tableau::Phase::Final || t.closed())
        throw InternalError("extract_model: tableau is not open");
    if (selection.size() != t.model().states.size())
        throw InternalError("extract_model: selection does not cover the partial model");
    return Extractor(t, selection).run();
}

SynthesizedModel extract_model(const Tableau& t)
{
    const auto selection = select_representatives(t);
    if (!selection)
        throw InternalError("extract_model: tableau is not open");
    return extract_model(t, *selection);
}

// ---------------------------------------------------------------------------

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string to_dot(const Tableau& t)
{
    const auto& cl = t.closure();
    const bool pre = t.phase() == Tableau::Phase::Pretableau;
    std::ostringstream out;
    out << "digraph tableau {\n  node [fontname=\"monospace\"];\n";
    for (const auto& n : t.nodes()) {
        if (!n.alive)
            continue;
        out << "  " << node_name(n) << " [shape=" << (n.kind == NodeKind::State ? "box" : "ellipse") << ", label=\""
            << node_name(n) << "\\n" << escape(cl.render(n.label)) << "\"";
        if (n.has_origin())
            out << ", origin=\"" << escape(t.model().states[n.origin].id) << "\"";
        if (n.label.contains(t.phi()) && n.origin == t.model().root)
            out << ", peripheries=2";
        out << "];\n";
    }
    for (const auto& n : t.nodes()) {
        if (!n.alive)
            continue;
        if (pre) {
            for (auto o : n.offspring)
                out << "  " << node_name(n) << " -> " << node_name(t.node(o)) << " [style=dashed];\n";
            for (const auto& g : n.groups)
                out << "  " << node_name(n) << " -> " << node_name(t.node(g.prestate)) << " [label=\""
                    << group_name(g.kind) << "\"];\n";
            continue;
        }
        for (const auto& g : n.groups)
            for (auto m : g.members)
                if (t.node(m).alive)
                    out << "  " << node_name(n) << " -> " << node_name(t.node(m)) << " [label=\""
                        << group_name(g.kind) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace tabsynth
