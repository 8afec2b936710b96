#include "tabsynth/cli.hpp"

#include "tabsynth/checker.hpp"
#include "tabsynth/oracle.hpp"
#include "tabsynth/solver.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tabsynth {

namespace {

using ordered_json = nlohmann::ordered_json;

// An input problem reported with exit status 2. The message names the flag,
// file or position at fault.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string logic;
    std::string model;
    std::string formula;
    std::string formula_file;
    std::string out;
    std::string dot;
    std::string format = "human";
    std::string policy = "grow";
    std::size_t bound = 2;
    bool trace = false;
};

std::string read_file(const std::string& path, const std::string& flag)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError(flag + " " + path + ": cannot read file");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& flag, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content))
        throw InputError(flag + " " + path + ": cannot write file");
}

class Command {
public:
    Command(std::string name, const Options& o, std::ostream& err) : name_(std::move(name)), o_(o), err_(err) {}

    int run(ordered_json& report)
    {
        logic_ = parse_logic_flag();
        report["logic"] = std::string(to_string(logic_));
        const Formula phi = formula(report);
        if (name_ == "sat")
            return sat(phi, report);
        const PartialModel m = model(report);
        if (name_ == "mc")
            return mc(phi, m, report);
        if (name_ == "oracle-epm" || name_ == "oracle-mcpm")
            return oracle(phi, m, report);
        return tableau(phi, m, report);
    }

private:
    LogicId parse_logic_flag() const
    {
        try {
            return parse_logic(o_.logic);
        } catch (const std::exception&) {
            throw InputError("--logic " + o_.logic + ": expected k, ltl or ctl");
        }
    }

    Formula formula(ordered_json& report) const
    {
        const bool inline_given = !o_.formula.empty();
        const bool file_given = !o_.formula_file.empty();
        if (inline_given && file_given)
            throw InputError("--formula and --formula-file are mutually exclusive");
        if (!inline_given && !file_given)
            throw InputError("one of --formula or --formula-file is required");
        std::string text = inline_given ? o_.formula : read_file(o_.formula_file, "--formula-file");
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' '))
            text.pop_back();
        report["formula"] = text;
        const std::string flag = inline_given ? "--formula" : "--formula-file " + o_.formula_file;
        try {
            return parse(text, logic_);
        } catch (const ParseError& e) {
            throw InputError(flag + ": " + e.what());
        }
    }

    PartialModel model(ordered_json& report) const
    {
        if (o_.model.empty())
            throw InputError("--model is required for " + name_);
        report["model"] = o_.model;
        PartialModel m;
        try {
            m = load_model(read_file(o_.model, "--model"));
        } catch (const ModelError& e) {
            throw InputError("--model " + o_.model + ": " + e.what());
        }
        if (m.logic != logic_)
            throw InputError("--logic " + o_.logic + " does not match the logic " + std::string(to_string(m.logic)) +
                             " of --model " + o_.model);
        return m;
    }

    ExtensionPolicy policy(ordered_json& report) const
    {
        report["policy"] = o_.policy;
        return {parse_extension_mode(o_.policy)};
    }

    TraceSink trace() const
    {
        if (!o_.trace)
            return {};
        return [this](const std::string& line) { err_ << line << '\n'; };
    }

    static ordered_json statistics(const Verdict& v)
    {
        ordered_json s;
        s["pretableau_prestates"] = v.stats.pretableau_prestates;
        s["pretableau_states"] = v.stats.pretableau_states;
        s["initial_states"] = v.stats.initial_states;
        s["final_states"] = v.stats.final_states;
        s["eliminated_e1"] = v.stats.eliminated_e1;
        s["eliminated_e2"] = v.stats.eliminated_e2;
        if (v.closed_origin)
            s["closed_origin"] = *v.closed_origin;
        return s;
    }

    void artifacts(const Verdict& v, const std::optional<SynthesizedModel>& emitted, ordered_json& report) const
    {
        if (!o_.out.empty() && emitted) {
            write_file(o_.out, "--out", save_model(*emitted));
            report["artifacts"]["out"] = o_.out;
        }
        if (!o_.dot.empty()) {
            std::string dot = v.tableau_dot;
            if (v.model)
                dot += to_dot(v.model->model);
            write_file(o_.dot, "--dot", dot);
            report["artifacts"]["dot"] = o_.dot;
        }
    }

    int finish(bool yes, ordered_json result, ordered_json& report) const
    {
        report["result"] = std::move(result);
        report["exit_status"] = yes ? 0 : 1;
        return yes ? 0 : 1;
    }

    int tableau(const Formula& phi, const PartialModel& m, ordered_json& report)
    {
        if (o_.policy == "fixed-states")
            throw InputError("--policy fixed-states is only available to the oracle commands");
        const SolveOptions options{policy(report), trace(), !o_.dot.empty()};
        const bool negate = name_ == "mcpm";
        Verdict v;
        try {
            v = solve(negate ? to_nnf(neg(phi)) : phi, m, logic_, options);
        } catch (const ModelError& e) {
            throw InputError("--model " + o_.model + ": " + e.what());
        }
        report["statistics"] = statistics(v);
        artifacts(v, v.model, report);
        if (name_ == "solve")
            return finish(v.open(), std::string(to_string(v.status)), report);
        const bool yes = negate ? !v.open() : v.open();
        return finish(yes, yes, report);
    }

    int sat(const Formula& phi, ordered_json& report)
    {
        if (!o_.model.empty())
            throw InputError("--model is not accepted by sat");
        const Verdict v = solve_sat(phi, logic_, {{}, trace(), !o_.dot.empty()});
        report["statistics"] = statistics(v);
        artifacts(v, v.model, report);
        return finish(v.open(), std::string(to_string(v.status)), report);
    }

    int mc(const Formula& phi, const PartialModel& m, ordered_json& report) const
    {
        if (!is_complete(m))
            throw InputError("--model " + o_.model + ": not a complete " + std::string(to_string(logic_)) + " model" +
                             (logic_ == LogicId::CTL ? " (some state has no successor)" : " (the chain has no loop)"));
        const bool yes = holds_at_root(m, phi);
        return finish(yes, yes, report);
    }

    int oracle(const Formula& phi, const PartialModel& m, ordered_json& report) const
    {
        if (o_.policy == "complete")
            throw InputError("--policy complete is not available to the oracle commands");
        if (o_.bound > max_enumeration_budget)
            throw InputError("--bound " + std::to_string(o_.bound) + ": at most " +
                             std::to_string(max_enumeration_budget) + " new states");
        const ExtensionPolicy p = policy(report);
        report["bound"] = o_.bound;
        const bool epm = name_ == "oracle-epm";
        const OracleResult r = epm ? oracle_epm(phi, m, p, {o_.bound}, logic_) : oracle_mcpm(phi, m, p, {o_.bound}, logic_);
        report["bounded"] = r.bounded;
        report["examined"] = r.examined;
        if (!o_.out.empty() && r.witness) {
            write_file(o_.out, "--out", save_model(*r.witness));
            report["artifacts"]["out"] = o_.out;
        }
        return finish(r.value, r.value, report);
    }

    std::string name_;
    const Options& o_;
    std::ostream& err_;
    LogicId logic_ = LogicId::K;
};

std::string scalar(const ordered_json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& x : v)
            out += (out.empty() ? "" : " ") + scalar(x);
        return out;
    }
    return v.dump();
}

void print_human(const ordered_json& report, double millis, std::ostream& out)
{
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& [key, value] : report.items()) {
        if (value.is_object()) {
            for (const auto& [k, v] : value.items())
                rows.emplace_back(key + "." + k, scalar(v));
        } else {
            rows.emplace_back(key, scalar(value));
        }
    }
    std::ostringstream d;
    d << std::fixed << std::setprecision(3) << millis << " ms";
    rows.emplace_back("duration", d.str());
    std::size_t width = 0;
    for (const auto& r : rows)
        width = std::max(width, r.first.size());
    for (const auto& [k, v] : rows)
        out << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Model synthesis and checking for partial models (K, LTL, CTL)", "tabsynth"};
    app.require_subcommand(1, 1);

    struct Spec {
        const char* name;
        const char* help;
        bool model;
        bool policy;
        bool artifacts;
        bool oracle;
    };
    const Spec specs[] = {
        {"solve", "Synthesize an admissible extension satisfying the formula", true, true, true, false},
        {"epm", "Does some admissible extension satisfy the formula?", true, true, true, false},
        {"mcpm", "Do all admissible extensions satisfy the formula?", true, true, true, false},
        {"sat", "Satisfiability with model building", false, false, true, false},
        {"mc", "Model checking of a complete model", true, false, false, false},
        {"oracle-epm", "Bounded brute-force answer to epm", true, true, false, true},
        {"oracle-mcpm", "Bounded brute-force answer to mcpm", true, true, false, true},
    };
    for (const auto& s : specs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--logic", o.logic, "k, ltl or ctl")->required();
        sub->add_option("--formula", o.formula, "Formula text");
        sub->add_option("--formula-file", o.formula_file, "File holding the formula");
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"human", "machine"}));
        if (s.model)
            sub->add_option("--model", o.model, "Partial model file (JSON)")->required();
        if (s.policy && !s.oracle)
            sub->add_option("--policy", o.policy, "Extension policy")->check(CLI::IsMember({"grow", "complete"}));
        if (s.oracle) {
            sub->add_option("--policy", o.policy, "Extension policy")->check(CLI::IsMember({"grow", "fixed-states"}));
            sub->add_option("--bound", o.bound, "Maximum number of new states");
            sub->add_option("--out", o.out, "Write the witness or counterexample here");
        }
        if (s.artifacts) {
            sub->add_option("--out", o.out, "Write the synthesized model here");
            sub->add_option("--dot", o.dot, "Write the final tableau and the model as DOT");
            sub->add_flag("--trace", o.trace, "Log every rule application to stderr");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    ordered_json report;
    report["command"] = command;
    report["arguments"] = args;
    if (const char* seed = std::getenv("TABSYNTH_SEED")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(seed, &end, 10);
        if (*seed == '\0' || *end != '\0') {
            err << "error: TABSYNTH_SEED " << seed << ": expected a non-negative integer\n";
            return 2;
        }
        report["seed"] = value;
    }

    const auto started = std::chrono::steady_clock::now();
    int status = 2;
    try {
        status = Command(command, o, err).run(report);
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    const double millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    if (o.format == "machine")
        out << report.dump(2) << '\n';
    else
        print_human(report, millis, out);
    return status;
}

} // namespace tabsynth
