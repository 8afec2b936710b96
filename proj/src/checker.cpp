#include "tabsynth/checker.hpp"

#include <algorithm>
#include <set>

namespace tabsynth {

KripkeView::KripkeView(const PartialModel& m) : succ_(m.states.size()), pred_(m.states.size())
{
    for (const auto& [from, to] : m.transitions) {
        succ_[from].push_back(to);
        pred_[to].push_back(from);
    }
    for (const auto& a : m.atoms)
        valuation_.emplace(a, std::vector<char>(m.states.size(), 0));
    for (std::size_t s = 0; s < m.states.size(); ++s)
        for (const auto& a : m.states[s].label)
            valuation_[a][s] = 1;
}

bool KripkeView::holds(std::size_t s, const std::string& a) const
{
    auto it = valuation_.find(a);
    return it != valuation_.end() && it->second[s];
}

const std::vector<char>* KripkeView::extension(const std::string& a) const
{
    auto it = valuation_.find(a);
    return it == valuation_.end() ? nullptr : &it->second;
}

bool KripkeView::serial() const
{
    return std::all_of(succ_.begin(), succ_.end(), [](const auto& s) { return !s.empty(); });
}

namespace {

using StateSet = std::vector<char>;

class Labeler {
public:
    explicit Labeler(const KripkeView& m) : m_(m), n_(m.size()) {}

    const StateSet& eval(const Formula& f)
    {
        if (auto it = memo_.find(f.identity()); it != memo_.end())
            return it->second;
        StateSet out = compute(f);
        return memo_.emplace(f.identity(), std::move(out)).first->second;
    }

private:
    StateSet compute(const Formula& f)
    {
        StateSet r(n_, 0);
        switch (f.op()) {
        case Op::Atom:
            if (const auto* v = m_.extension(f.name()))
                return *v;
            return r;
        case Op::True: return StateSet(n_, 1);
        case Op::False: return r;
        case Op::Not: return complement(eval(f.lhs()));
        case Op::And:
        case Op::Or:
        case Op::Implies: {
            const StateSet a = eval(f.lhs());
            const StateSet& b = eval(f.rhs());
            for (std::size_t s = 0; s < n_; ++s)
                r[s] = f.op() == Op::And ? (a[s] && b[s]) : f.op() == Op::Or ? (a[s] || b[s]) : (!a[s] || b[s]);
            return r;
        }
        case Op::Diamond:
        case Op::EX: return pre_exists(eval(f.lhs()));
        case Op::Box:
        case Op::AX: return pre_forall(eval(f.lhs()));
        case Op::EU: {
            const StateSet a = eval(f.lhs());
            return until_exists(a, eval(f.rhs()));
        }
        case Op::AU: {
            const StateSet a = eval(f.lhs());
            return until_forall(a, eval(f.rhs()));
        }
        case Op::EF: return until_exists(StateSet(n_, 1), eval(f.lhs()));
        case Op::AF: return until_forall(StateSet(n_, 1), eval(f.lhs()));
        case Op::EG: return complement(until_forall(StateSet(n_, 1), complement(eval(f.lhs()))));
        case Op::AG: return complement(until_exists(StateSet(n_, 1), complement(eval(f.lhs()))));
        case Op::ER: {
            const StateSet a = complement(eval(f.lhs()));
            return complement(until_forall(a, complement(eval(f.rhs()))));
        }
        case Op::AR: {
            const StateSet a = complement(eval(f.lhs()));
            return complement(until_exists(a, complement(eval(f.rhs()))));
        }
        default:
            throw CheckerError("operator " + std::string(op_name(f.op())) + " is not a state operator");
        }
    }

    StateSet complement(const StateSet& a) const
    {
        StateSet r(n_);
        for (std::size_t s = 0; s < n_; ++s)
            r[s] = !a[s];
        return r;
    }

    StateSet pre_exists(const StateSet& a) const
    {
        StateSet r(n_, 0);
        for (std::size_t s = 0; s < n_; ++s)
            for (auto t : m_.successors(s))
                if (a[t]) {
                    r[s] = 1;
                    break;
                }
        return r;
    }

    StateSet pre_forall(const StateSet& a) const
    {
        StateSet r(n_, 1);
        for (std::size_t s = 0; s < n_; ++s)
            for (auto t : m_.successors(s))
                if (!a[t]) {
                    r[s] = 0;
                    break;
                }
        return r;
    }

    // Least fixpoint of b | (a & EX Z), by backward worklist.
    StateSet until_exists(const StateSet& a, const StateSet& b) const
    {
        StateSet r = b;
        std::vector<std::size_t> work;
        for (std::size_t s = 0; s < n_; ++s)
            if (r[s])
                work.push_back(s);
        while (!work.empty()) {
            const auto s = work.back();
            work.pop_back();
            for (auto p : m_.predecessors(s))
                if (!r[p] && a[p]) {
                    r[p] = 1;
                    work.push_back(p);
                }
        }
        return r;
    }

    // Least fixpoint of b | (a & AX Z) with pending-successor counters.
    StateSet until_forall(const StateSet& a, const StateSet& b) const
    {
        StateSet r = b;
        std::vector<std::size_t> pending(n_);
        std::vector<std::size_t> work;
        for (std::size_t s = 0; s < n_; ++s) {
            pending[s] = m_.successors(s).size();
            if (r[s])
                work.push_back(s);
        }
        while (!work.empty()) {
            const auto s = work.back();
            work.pop_back();
            for (auto p : m_.predecessors(s)) {
                if (r[p])
                    continue;
                if (--pending[p] == 0 && a[p]) {
                    r[p] = 1;
                    work.push_back(p);
                }
            }
        }
        return r;
    }

    const KripkeView& m_;
    std::size_t n_;
    std::unordered_map<const void*, StateSet> memo_;
};

std::vector<bool> to_bools(const StateSet& s) { return {s.begin(), s.end()}; }

} // namespace

bool mc_k(const PartialModel& model, std::size_t state, const Formula& f)
{
    if (state >= model.states.size())
        throw CheckerError("unknown state index " + std::to_string(state));
    return mc_k_all(KripkeView(model), f)[state];
}

std::vector<bool> mc_k_all(const KripkeView& model, const Formula& f)
{
    if (!formula_in_logic(f, LogicId::K))
        throw CheckerError("mc_k: formula is not in K");
    Labeler l(model);
    return to_bools(l.eval(f));
}

class Labeling::Impl : public Labeler {
public:
    using Labeler::Labeler;
};

Labeling::Labeling(const KripkeView& model, LogicId logic) : logic_(logic)
{
    if (logic == LogicId::LTL)
        throw CheckerError("Labeling: LTL is evaluated on lassos");
    if (logic == LogicId::CTL && !model.serial())
        throw CheckerError("mc_ctl: model is not serial");
    impl_ = std::make_unique<Impl>(model);
}

Labeling::~Labeling() = default;

std::vector<bool> Labeling::states(const Formula& f)
{
    if (!formula_in_logic(f, logic_))
        throw CheckerError(std::string(logic_ == LogicId::K ? "mc_k" : "mc_ctl") + ": formula is not in " +
                           std::string(to_string(logic_)));
    return to_bools(impl_->eval(f));
}

std::vector<bool> mc_ctl(const PartialModel& model, const Formula& f) { return mc_ctl(KripkeView(model), f); }

std::vector<bool> mc_ctl(const KripkeView& model, const Formula& f)
{
    if (!formula_in_logic(f, LogicId::CTL))
        throw CheckerError("mc_ctl: formula is not in CTL");
    if (!model.serial())
        throw CheckerError("mc_ctl: model is not serial");
    Labeler l(model);
    return to_bools(l.eval(f));
}

// ---------------------------------------------------------------------------
// LTL over lassos

namespace {

class LassoEvaluator {
public:
    explicit LassoEvaluator(const Lasso& path) : prefix_(path.prefix.size())
    {
        if (path.loop.empty())
            throw CheckerError("lasso loop must be non-empty");
        for (const auto* part : {&path.prefix, &path.loop})
            for (const auto& label : *part)
                labels_.emplace_back(label.begin(), label.end());
        n_ = labels_.size();
    }

    const std::vector<char>& eval(const Formula& f)
    {
        if (auto it = memo_.find(f.identity()); it != memo_.end())
            return it->second;
        auto out = compute(f);
        return memo_.emplace(f.identity(), std::move(out)).first->second;
    }

private:
    std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : prefix_; }

    std::vector<char> compute(const Formula& f)
    {
        std::vector<char> r(n_, 0);
        switch (f.op()) {
        case Op::Atom:
            for (std::size_t i = 0; i < n_; ++i)
                r[i] = labels_[i].count(f.name()) > 0;
            return r;
        case Op::True: return std::vector<char>(n_, 1);
        case Op::False: return r;
        case Op::Not: {
            const auto& a = eval(f.lhs());
            for (std::size_t i = 0; i < n_; ++i)
                r[i] = !a[i];
            return r;
        }
        case Op::And:
        case Op::Or:
        case Op::Implies: {
            const auto a = eval(f.lhs());
            const auto& b = eval(f.rhs());
            for (std::size_t i = 0; i < n_; ++i)
                r[i] = f.op() == Op::And ? (a[i] && b[i]) : f.op() == Op::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
            return r;
        }
        case Op::Next: {
            const auto& a = eval(f.lhs());
            for (std::size_t i = 0; i < n_; ++i)
                r[i] = a[succ(i)];
            return r;
        }
        case Op::Until: {
            const auto a = eval(f.lhs());
            return until(a, eval(f.rhs()));
        }
        case Op::Release: {
            const auto a = eval(f.lhs());
            return release(a, eval(f.rhs()));
        }
        case Op::Eventually: return until(std::vector<char>(n_, 1), eval(f.lhs()));
        case Op::Always: return release(std::vector<char>(n_, 0), eval(f.lhs()));
        default:
            throw CheckerError("operator " + std::string(op_name(f.op())) + " is not an LTL operator");
        }
    }

    // Starts from false and sweeps backwards until stable; the value at the
    // loop entry feeds the last position, so a second sweep settles it.
    std::vector<char> until(const std::vector<char>& a, const std::vector<char>& b) const
    {
        std::vector<char> v(n_, 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t k = n_; k-- > 0;) {
                const char nv = b[k] || (a[k] && v[succ(k)]);
                if (nv != v[k]) {
                    v[k] = nv;
                    changed = true;
                }
            }
        }
        return v;
    }

    std::vector<char> release(const std::vector<char>& a, const std::vector<char>& b) const
    {
        std::vector<char> v(n_, 1);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t k = n_; k-- > 0;) {
                const char nv = b[k] && (a[k] || v[succ(k)]);
                if (nv != v[k]) {
                    v[k] = nv;
                    changed = true;
                }
            }
        }
        return v;
    }

    std::size_t prefix_;
    std::size_t n_ = 0;
    std::vector<std::set<std::string>> labels_;
    std::unordered_map<const void*, std::vector<char>> memo_;
};

} // namespace

std::vector<bool> ltl_lasso_positions(const Lasso& path, const Formula& f)
{
    LassoEvaluator e(path);
    const auto& v = e.eval(f);
    return {v.begin(), v.end()};
}

bool mc_ltl_lasso(const Lasso& path, const Formula& f) { return ltl_lasso_positions(path, f).front(); }

Lasso lasso_of(const PartialModel& model)
{
    const auto order = chain_order(model);
    if (order.empty())
        throw CheckerError("LTL model is not a chain from its root");
    const auto succ = model.successor_lists();
    const auto& last = succ[order.back()];
    if (last.empty())
        throw CheckerError("LTL model has no loop (the last state is a dead end)");
    const auto loop_start = static_cast<std::size_t>(std::find(order.begin(), order.end(), last.front()) - order.begin());
    Lasso out;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < loop_start ? out.prefix : out.loop).push_back(model.states[order[i]].label);
    return out;
}

bool holds_at_root(const PartialModel& model, const Formula& f)
{
    switch (model.logic) {
    case LogicId::K: return mc_k(model, model.root, f);
    case LogicId::CTL: return mc_ctl(model, f)[model.root];
    case LogicId::LTL: return mc_ltl_lasso(lasso_of(model), f);
    }
    return false;
}

} // namespace tabsynth
