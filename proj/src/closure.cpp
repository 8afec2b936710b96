#include "tabsynth/closure.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_set>

namespace tabsynth {

bool Label::subset_of(const Label& other) const
{
    for (std::size_t w = 0; w < words_.size(); ++w)
        if (words_[w] & ~other.words_[w])
            return false;
    return true;
}

std::size_t Label::count() const
{
    std::size_t n = 0;
    for (auto w : words_)
        n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::vector<std::size_t> Label::members() const
{
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back(w * 64 + static_cast<std::size_t>(b));
            bits &= bits - 1;
        }
    }
    return out;
}

Label& Label::operator|=(const Label& other)
{
    for (std::size_t w = 0; w < words_.size(); ++w)
        words_[w] |= other.words_[w];
    return *this;
}

std::size_t Label::hash() const
{
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto w : words_) {
        h ^= w;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> ClosureSet::find(const Formula& f) const
{
    if (auto it = index_.find(f); it != index_.end())
        return it->second;
    return std::nullopt;
}

std::size_t ClosureSet::index_of(const Formula& f) const
{
    if (auto i = find(f))
        return *i;
    throw std::out_of_range("formula not in closure: " + to_string(f));
}

Label ClosureSet::label_of(const std::vector<Formula>& fs) const
{
    Label l = empty_label();
    for (const auto& f : fs)
        l.insert(index_of(f));
    return l;
}

std::vector<Formula> ClosureSet::formulas_of(const Label& l) const
{
    std::vector<Formula> out;
    for (auto i : l.members())
        out.push_back(entries_[i].formula);
    return out;
}

std::string ClosureSet::render(const Label& l) const
{
    std::string out = "{";
    bool first = true;
    for (auto i : l.members()) {
        if (!first)
            out += ", ";
        first = false;
        out += to_string(entries_[i].formula);
    }
    return out + "}";
}

std::vector<std::string> ClosureSet::positive_atoms(const Label& l) const
{
    std::vector<std::string> out;
    for (auto i : l.members())
        if (entries_[i].op == Op::Atom)
            out.push_back(entries_[i].formula.name());
    std::sort(out.begin(), out.end());
    return out;
}

Label ClosureSet::literals(const std::vector<std::string>& vocabulary, const std::vector<std::string>& valuation) const
{
    Label l = empty_label();
    for (const auto& a : vocabulary) {
        const bool positive = std::find(valuation.begin(), valuation.end(), a) != valuation.end();
        l.insert(index_of(positive ? atom(a) : neg(atom(a))));
    }
    return l;
}

bool ClosureSet::is_eventuality(std::size_t i) const
{
    const Op op = entries_[i].op;
    return op == Op::Until || op == Op::EU || op == Op::AU;
}

Formula unfold(const Formula& f)
{
    switch (f.op()) {
    case Op::Until: return disj(f.rhs(), conj(f.lhs(), next(f)));
    case Op::Release: return conj(f.rhs(), disj(f.lhs(), next(f)));
    case Op::EU: return disj(f.rhs(), conj(f.lhs(), ex(f)));
    case Op::AU: return disj(f.rhs(), conj(f.lhs(), ax(f)));
    case Op::ER: return conj(f.rhs(), disj(f.lhs(), ex(f)));
    case Op::AR: return conj(f.rhs(), disj(f.lhs(), ax(f)));
    default: throw std::invalid_argument("not a core fixpoint formula: " + to_string(f));
    }
}

namespace {

bool is_core_fixpoint(Op op)
{
    switch (op) {
    case Op::Until:
    case Op::Release:
    case Op::EU:
    case Op::AU:
    case Op::ER:
    case Op::AR:
        return true;
    default:
        return false;
    }
}

} // namespace

ClosureSet extended_closure(const Formula& f, const std::vector<std::string>& vocabulary)
{
    std::unordered_set<Formula, FormulaHash> seen;
    std::vector<Formula> work{core(to_nnf(f))};
    for (const auto& a : vocabulary)
        work.push_back(atom(a));
    while (!work.empty()) {
        Formula g = std::move(work.back());
        work.pop_back();
        if (!seen.insert(g).second)
            continue;
        work.push_back(negate_nnf(g));
        if (g.op() == Op::Not)
            continue;
        if (g.lhs().valid())
            work.push_back(g.lhs());
        if (g.rhs().valid())
            work.push_back(g.rhs());
        if (is_core_fixpoint(g.op()))
            work.push_back(unfold(g));
    }

    ClosureSet cl;
    std::vector<Formula> sorted(seen.begin(), seen.end());
    std::sort(sorted.begin(), sorted.end());
    cl.entries_.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cl.index_.emplace(sorted[i], i);
        cl.entries_.push_back({sorted[i], sorted[i].op()});
    }
    for (auto& e : cl.entries_) {
        const Formula& g = e.formula;
        if (g.op() != Op::Not) {
            if (g.lhs().valid())
                e.lhs = cl.index_.at(g.lhs());
            if (g.rhs().valid())
                e.rhs = cl.index_.at(g.rhs());
        } else {
            e.lhs = cl.index_.at(g.lhs());
        }
        e.negation = cl.index_.at(negate_nnf(g));
        if (is_core_fixpoint(g.op()))
            e.unfolding = cl.index_.at(unfold(g));
    }
    return cl;
}

namespace {

bool atomic_clash(const Label& l, const ClosureSet& cl)
{
    for (auto i : l.members()) {
        const auto& e = cl[i];
        if (e.op == Op::False)
            return true;
        if (e.op == Op::Atom && l.contains(e.negation))
            return true;
    }
    return false;
}

bool any_clash(const Label& l, const ClosureSet& cl)
{
    for (auto i : l.members())
        if (cl[i].op == Op::False || l.contains(cl[i].negation))
            return true;
    return false;
}

// Expands without the minimality filter. Results are clash-free (atomic) and
// fully expanded.
std::vector<Label> expand_raw(const Label& start, const ClosureSet& cl)
{
    std::vector<Label> results;
    std::unordered_set<Label, LabelHash> done;
    std::vector<Label> stack{start};
    while (!stack.empty()) {
        Label l = std::move(stack.back());
        stack.pop_back();
        if (atomic_clash(l, cl))
            continue;
        bool expanded = false;
        for (auto i : l.members()) {
            const auto& e = cl[i];
            if (e.op == Op::And) {
                if (!l.contains(e.lhs) || !l.contains(e.rhs)) {
                    l.insert(e.lhs);
                    l.insert(e.rhs);
                    stack.push_back(std::move(l));
                    expanded = true;
                    break;
                }
            } else if (e.op == Op::Or) {
                if (!l.contains(e.lhs) && !l.contains(e.rhs)) {
                    Label left = l;
                    left.insert(e.lhs);
                    l.insert(e.rhs);
                    stack.push_back(std::move(l));
                    stack.push_back(std::move(left));
                    expanded = true;
                    break;
                }
            } else if (e.unfolding != ClosureSet::npos && !l.contains(e.unfolding)) {
                l.insert(e.unfolding);
                stack.push_back(std::move(l));
                expanded = true;
                break;
            }
        }
        if (!expanded && done.insert(l).second)
            results.push_back(std::move(l));
    }
    return results;
}

bool is_independent(Op op)
{
    switch (op) {
    case Op::Atom:
    case Op::Box:
    case Op::Diamond:
    case Op::Next:
    case Op::EX:
    case Op::AX:
        return true;
    default:
        return false;
    }
}

} // namespace

std::vector<Label> full_expansions(const Label& label, const ClosureSet& closure)
{
    std::vector<Label> raw = expand_raw(label, closure);
    std::sort(raw.begin(), raw.end(), [](const Label& a, const Label& b) {
        const auto ca = a.count(), cb = b.count();
        return ca != cb ? ca < cb : a < b;
    });
    std::vector<Label> minimal;
    for (auto& l : raw) {
        const bool dominated = std::any_of(minimal.begin(), minimal.end(), [&](const Label& m) { return m.subset_of(l); });
        if (!dominated)
            minimal.push_back(std::move(l));
    }
    std::sort(minimal.begin(), minimal.end());
    return minimal;
}

std::vector<Label> complete_expansions(const Label& label, const ClosureSet& closure)
{
    // Branch on atoms and next-step formulas first: everything else is a
    // boolean or fixpoint combination of those, so its wrong branch clashes
    // right away.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < closure.size(); ++i)
        if (is_independent(closure[i].op))
            order.push_back(i);
    for (std::size_t i = 0; i < closure.size(); ++i)
        if (!is_independent(closure[i].op))
            order.push_back(i);

    std::unordered_set<Label, LabelHash> results;
    std::unordered_set<Label, LabelHash> visited;
    std::vector<Label> stack{label};
    while (!stack.empty()) {
        Label l = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(l).second)
            continue;
        for (auto& x : full_expansions(l, closure)) {
            if (any_clash(x, closure))
                continue;
            auto undecided = std::find_if(order.begin(), order.end(), [&](std::size_t i) {
                return !x.contains(i) && !x.contains(closure[i].negation);
            });
            if (undecided == order.end()) {
                results.insert(std::move(x));
                continue;
            }
            Label with = x;
            with.insert(*undecided);
            x.insert(closure[*undecided].negation);
            stack.push_back(std::move(x));
            stack.push_back(std::move(with));
        }
    }
    std::vector<Label> out(results.begin(), results.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace tabsynth
