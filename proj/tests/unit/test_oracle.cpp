#include "doctest.h"
#include "support.hpp"

#include "tabsynth/checker.hpp"
#include "tabsynth/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace tabsynth;
using namespace tabsynth::testing;

namespace {

const Formula p = atom("p");
const Formula q = atom("q");

std::size_t count(const PartialModel& m, ExtensionPolicy policy, std::size_t budget, LogicId logic)
{
    ExtensionEnumerator e(m, policy, {budget}, logic);
    std::size_t n = 0;
    while (e.next())
        ++n;
    return n;
}

// Orbits of K extensions with exactly k fresh states under renaming of the
// fresh states, by Burnside's lemma. Old states carry no edges among
// themselves, every other edge is free.
std::uint64_t burnside(std::size_t old, std::size_t k, std::size_t atoms)
{
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::uint64_t fixed_total = 0, group = 0;
    const std::size_t n = old + k;
    do {
        ++group;
        const auto image = [&](std::size_t s) { return s < old ? s : old + perm[s - old]; };
        std::size_t cycles = 0;
        std::vector<bool> seen(k, false);
        for (std::size_t i = 0; i < k; ++i) {
            if (seen[i])
                continue;
            ++cycles;
            for (std::size_t j = i; !seen[j]; j = perm[j])
                seen[j] = true;
        }
        std::set<std::pair<std::size_t, std::size_t>> done;
        std::size_t edge_orbits = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if ((a < old && b < old) || done.count({a, b}))
                    continue;
                ++edge_orbits;
                for (auto e = std::make_pair(a, b); done.insert(e).second;)
                    e = {image(e.first), image(e.second)};
            }
        fixed_total += std::uint64_t{1} << (cycles * atoms + edge_orbits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return fixed_total / group;
}

} // namespace

TEST_CASE("independent orbit count")
{
    CHECK(burnside(1, 0, 1) == 1);
    CHECK(burnside(1, 1, 1) == 16);
    CHECK(burnside(1, 2, 1) == 528);
}

TEST_CASE("enumeration counts")
{
    const auto m = make_model(LogicId::K, {"p"}, {{"s", {}}}, {}, "s");
    CHECK(count(m, {}, 0, LogicId::K) == 1);
    CHECK(count(m, {}, 1, LogicId::K) == 17);
    CHECK(count(m, {}, 2, LogicId::K) == burnside(1, 0, 1) + burnside(1, 1, 1) + burnside(1, 2, 1));

    const auto two = make_model(LogicId::K, {"p"}, {{"a", {}}, {"b", {"p"}}}, {}, "a");
    CHECK(count(two, {}, 1, LogicId::K) == burnside(2, 0, 1) + burnside(2, 1, 1));
}

TEST_CASE("enumerated extensions are admissible, distinct and within budget")
{
    Rng rng(51);
    for (auto logic : {LogicId::K, LogicId::LTL, LogicId::CTL})
        for (int i = 0; i < 20; ++i) {
            const auto m = random_partial_model(rng, logic, 2, {"p"});
            for (auto mode : {ExtensionMode::Grow, ExtensionMode::FixedStates}) {
                ExtensionEnumerator e(m, {mode}, {2}, logic);
                std::set<std::string> seen;
                while (auto c = e.next()) {
                    CHECK(is_admissible_extension(m, *c, {mode}));
                    CHECK(recheck_admissible(m, *c, mode));
                    CHECK(c->model.states.size() <= m.states.size() + 2);
                    CHECK(seen.insert(save_model(*c)).second);
                }
            }
        }
}

TEST_CASE("fixed states adds only transitions")
{
    const auto m = make_model(LogicId::CTL, {"p"}, {{"a", {}}, {"b", {}}}, {}, "a");
    ExtensionEnumerator e(m, {ExtensionMode::FixedStates}, {3}, LogicId::CTL);
    std::size_t n = 0;
    while (auto c = e.next()) {
        ++n;
        CHECK(c->model.states.size() == 2);
        CHECK(c->model.is_serial());
    }
    CHECK(n == 9);
}

TEST_CASE("LTL lassos")
{
    const auto m = make_model(LogicId::LTL, {"p"}, {{"s0", {}}}, {}, "s0");
    // k >= 1 fresh states: 2^k valuations, 1 + k back-edge targets. Without
    // fresh states the loop would need a new edge between old states.
    CHECK(count(m, {}, 0, LogicId::LTL) == 0);
    CHECK(count(m, {}, 1, LogicId::LTL) == 2 * 2);
    CHECK(count(m, {}, 2, LogicId::LTL) == 2 * 2 + 4 * 3);
    CHECK(count(m, {ExtensionMode::FixedStates}, 2, LogicId::LTL) == 1);
    const auto closed = make_model(LogicId::LTL, {"p"}, {{"s0", {}}, {"s1", {}}}, {{"s0", "s1"}, {"s1", "s0"}}, "s0");
    CHECK(count(closed, {}, 3, LogicId::LTL) == 1);
    CHECK(count(closed, {ExtensionMode::FixedStates}, 3, LogicId::LTL) == 1);
}

TEST_CASE("budget and policy limits")
{
    const auto m = make_model(LogicId::K, {"p"}, {{"s", {}}}, {}, "s");
    CHECK_THROWS_AS(ExtensionEnumerator(m, {}, {5}, LogicId::K), BudgetError);
    CHECK_THROWS_AS(oracle_epm(p, m, {}, {5}, LogicId::K), BudgetError);
    CHECK_THROWS_AS(oracle_epm(p, m, {ExtensionMode::Complete}, {1}, LogicId::K), std::invalid_argument);
    CHECK_THROWS_AS(oracle_epm(p, m, {}, {1}, LogicId::CTL), std::invalid_argument);
}

TEST_CASE("oracle examples")
{
    Rng rng(52);
    for (auto logic : {LogicId::K, LogicId::LTL, LogicId::CTL})
        for (int i = 0; i < 5; ++i) {
            const auto m = random_partial_model(rng, logic, 2);
            for (std::size_t b = 0; b <= 2; ++b) {
                CHECK_FALSE(oracle_epm(conj(p, neg(p)), m, {}, {b}, logic).value);
                CHECK(oracle_mcpm(disj(p, neg(p)), m, {}, {b}, logic).value);
            }
        }
    const auto m = make_model(LogicId::K, {"q"}, {{"s", {"q"}}}, {}, "s");
    const auto r = oracle_epm(conj(dia(p), box(q)), m, {}, {1}, LogicId::K);
    CHECK(r.value);
    CHECK_FALSE(r.bounded);
    REQUIRE(r.witness);
    CHECK(holds_at_root(r.witness->model, conj(dia(p), box(q))));
    const auto none = oracle_epm(conj(dia(p), box(neg(p))), m, {}, {1}, LogicId::K);
    CHECK(none.bounded);
    CHECK_FALSE(none.witness);
}

TEST_CASE("oracle properties on random instances")
{
    Rng rng(53);
    for (auto logic : {LogicId::K, LogicId::LTL, LogicId::CTL})
        for (int i = 0; i < 60; ++i) {
            const auto m = random_partial_model(rng, logic, 2);
            const auto phi = random_formula(rng, logic);
            CAPTURE(to_string(phi));
            CAPTURE(save_model(m));
            const auto ext = with_vocabulary(m, atoms_of(phi));
            bool epm_before = false, mcpm_before = true;
            for (std::size_t b = 0; b <= 2; ++b) {
                const auto e = oracle_epm(phi, m, {}, {b}, logic);
                const auto a = oracle_mcpm(phi, m, {}, {b}, logic);
                if (epm_before)
                    CHECK(e.value);
                if (!mcpm_before)
                    CHECK_FALSE(a.value);
                epm_before = e.value;
                mcpm_before = a.value;

                CHECK(a.value == !oracle_epm(to_nnf(neg(phi)), m, {}, {b}, logic).value);
                CHECK(e.bounded == !e.value);
                CHECK(a.bounded == a.value);

                if (e.value) {
                    REQUIRE(e.witness);
                    CHECK(is_admissible_extension(ext, *e.witness, {}));
                    CHECK(holds_at_root(e.witness->model, phi));
                }
                if (!a.value) {
                    REQUIRE(a.witness);
                    CHECK(is_admissible_extension(ext, *a.witness, {}));
                    CHECK_FALSE(holds_at_root(a.witness->model, phi));
                }

                const auto x = oracle_epm(phi, m, {}, {b}, logic, OracleStrategy::Exhaustive);
                CHECK(x.value == e.value);
                const auto y = oracle_mcpm(phi, m, {}, {b}, logic, OracleStrategy::Exhaustive);
                CHECK(y.value == a.value);

                const auto f = oracle_epm(phi, m, {ExtensionMode::FixedStates}, {b}, logic);
                const auto fx = oracle_epm(phi, m, {ExtensionMode::FixedStates}, {b}, logic, OracleStrategy::Exhaustive);
                CHECK(f.value == fx.value);
            }
        }
}
