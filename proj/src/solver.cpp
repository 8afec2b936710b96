#include "tabsynth/solver.hpp"

#include "tabsynth/checker.hpp"

namespace tabsynth {

namespace {

Verdict run(const Formula& phi, const PartialModel& m, LogicId logic, const SolveOptions& options, bool free_root)
{
    if (options.policy.mode == ExtensionMode::Complete && !is_complete(m))
        throw ModelError(ModelErrorKind::NotComplete,
                         "the complete policy needs a complete " + std::string(to_string(logic)) + " model");

    Tableau t = build_pretableau(phi, m, logic, {options.policy.mode, free_root, options.trace});
    t = eliminate_prestates(std::move(t));
    t = eliminate_states(std::move(t));

    Verdict v;
    v.stats = t.stats();
    v.closed_origin = t.closed_origin();
    if (options.keep_dot)
        v.tableau_dot = to_dot(t);
    if (decide(t) == Status::Closed)
        return v;

    SynthesizedModel out = extract_model(t);
    if (!holds_at_root(out.model, phi))
        throw InternalError("synthesized model does not satisfy " + to_string(phi) + " at its root");
    if (!free_root && !is_admissible_extension(t.model(), out, options.policy))
        throw InternalError("synthesized model is not an admissible extension of the partial model");
    v.status = Status::Open;
    v.model = std::move(out);
    return v;
}

} // namespace

Verdict solve(const Formula& phi, const PartialModel& m, LogicId logic, const SolveOptions& options)
{
    return run(phi, m, logic, options, false);
}

Verdict solve(std::string_view phi_text, const PartialModel& m, LogicId logic, const SolveOptions& options)
{
    return solve(parse(phi_text, logic), m, logic, options);
}

PartialModel sat_seed(const Formula& phi, LogicId logic)
{
    return make_model(logic, atoms_of(phi), {{"s0", {}}}, {}, "s0");
}

Verdict solve_sat(const Formula& phi, LogicId logic, const SolveOptions& options)
{
    SolveOptions o = options;
    o.policy.mode = ExtensionMode::Grow;
    return run(phi, sat_seed(phi, logic), logic, o, true);
}

bool decide_epm(const Formula& phi, const PartialModel& m, LogicId logic, ExtensionPolicy policy)
{
    return solve(phi, m, logic, {policy, {}, false}).open();
}

bool decide_mcpm(const Formula& phi, const PartialModel& m, LogicId logic, ExtensionPolicy policy)
{
    return !decide_epm(to_nnf(neg(phi)), m, logic, policy);
}

} // namespace tabsynth
