#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "doseopt/errors.hpp"
#include "doseopt/escalation.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace doseopt;

namespace {

EscalationConfig ladder(std::vector<double> doses)
{
    EscalationConfig c;
    c.provisional_doses = std::move(doses);
    return c;
}

TrialHistory history_of(const EscalationConfig& c, std::vector<std::pair<std::uint32_t, std::uint32_t>> counts,
                        std::size_t current)
{
    TrialHistory h = TrialHistory::start(c);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        h.outcomes[i].dlt_count = counts[i].first;
        h.outcomes[i].treated = counts[i].second;
        h.total_treated += counts[i].second;
    }
    h.current_dose_index = current;
    return h;
}

} // namespace

TEST_CASE("configuration constraints")
{
    EscalationConfig c;
    CHECK_NOTHROW(validate(c));
    c.epsilon2 = 0.75;
    CHECK_THROWS_AS(validate(c), ArgumentError);
    c = ladder({100, 100, 200});
    CHECK_THROWS_AS(validate(c), ArgumentError);
    c = EscalationConfig{};
    c.gamma = 1.0;
    CHECK_THROWS_AS(validate(c), ArgumentError);
}

TEST_CASE("stage 1 worked examples")
{
    const EscalationConfig c;
    const auto s = stage1_evaluate({100, 3, 0, false}, c);
    CHECK(s.decision == Decision::Escalate);
    CHECK(s.upm_under == doctest::Approx(oracle::beta_mass(1, 4, 0, 0.25) / 0.25).epsilon(1e-10));
    CHECK(s.upm_target == doctest::Approx(oracle::beta_mass(1, 4, 0.25, 0.35) / 0.10).epsilon(1e-10));

    const auto full = stage1_evaluate({100, 3, 3, false}, c);
    CHECK(full.prob_over == doctest::Approx(1.0 - std::pow(0.35, 4)).epsilon(1e-12));
    CHECK(full.decision == Decision::DeEscalateAndExclude);

    CHECK_THROWS_AS(stage1_decision({100, 0, 0, false}, c), InsufficientDataError);
    CHECK_THROWS_AS(stage1_decision({100, 2, 3, false}, c), ArgumentError);
}

TEST_CASE("stage 1 with a wide target interval stays on interior outcomes")
{
    EscalationConfig c;
    c.target_dlt_rate = 0.5;
    c.epsilon1 = 0.5 - 1e-6;
    c.epsilon2 = 0.5 - 1e-6;
    for (std::uint32_t n = 2; n <= 8; ++n)
        for (std::uint32_t x = 1; x < n; ++x) CHECK(stage1_decision({1, n, x, false}, c) == Decision::Stay);
}

TEST_CASE("stage 1 agrees with brute force on a small grid")
{
    for (double gamma : {0.75, 0.95}) {
        EscalationConfig c;
        c.gamma = gamma;
        for (std::uint32_t n = 1; n <= 9; ++n)
            for (std::uint32_t x = 0; x <= n; ++x)
                CHECK(static_cast<int>(stage1_decision({1, n, x, false}, c)) ==
                      oracle::stage1(static_cast<int>(n), static_cast<int>(x), 0.30, 0.05, 0.05, gamma));
    }
}

TEST_CASE("overdose control can be switched off without losing exclusion")
{
    EscalationConfig on;
    EscalationConfig off;
    off.overdose_control = false;
    // 2/4: posterior Beta(3,3) puts about 0.76 above 0.35 and the target UPM wins the argmax.
    const auto a = stage1_evaluate({1, 4, 2, false}, on);
    const auto b = stage1_evaluate({1, 4, 2, false}, off);
    REQUIRE(a.prob_over >= 0.75);
    REQUIRE(a.prob_over < 0.95);
    CHECK(a.decision == Decision::DeEscalate);
    CHECK(b.decision == b.base);
    CHECK(stage1_decision({1, 3, 3, false}, off) == Decision::DeEscalateAndExclude);
}

TEST_CASE("decision table shape and monotone rows")
{
    const EscalationConfig c;
    const DecisionTable t = decision_table(c, 12);
    REQUIRE(t.size() == 12);
    std::size_t cells = 0;
    for (std::size_t n = 1; n <= t.size(); ++n) {
        REQUIRE(t[n - 1].size() == n + 1);
        cells += t[n - 1].size();
        for (std::size_t x = 1; x <= n; ++x) CHECK(t[n - 1][x] <= t[n - 1][x - 1]);
        CHECK(t[n - 1][0] != Decision::DeEscalateAndExclude);
    }
    CHECK(cells == 90);
    CHECK(t[2][0] == Decision::Escalate);
    CHECK(t[2][3] == Decision::DeEscalateAndExclude);
}

TEST_CASE("stage 2 fallback and model paths")
{
    auto one = ladder({100, 200, 300});
    const auto fb = stage2_evaluate(history_of(one, {{1, 6}}, 0), one);
    CHECK_FALSE(fb.model_used);
    CHECK(fb.rate_current == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(fb.decision == Decision::Stay);

    auto four = ladder({100, 200, 400, 800});
    const TrialHistory h = history_of(four, {{0, 3}, {1, 3}, {2, 3}}, 2);
    const auto s = stage2_evaluate(h, four);
    REQUIRE(s.model_used);
    std::vector<oracle::Binomial> od{{std::log(100.0), 0, 3, 1}, {std::log(200.0), 1, 3, 1}, {std::log(400.0), 2, 3, 1}};
    const auto [a, b] = oracle::logistic_mle(od);
    const auto p = [&](double d) { return 1.0 / (1.0 + std::exp(-(a + b * std::log(d)))); };
    CHECK(s.rate_current == doctest::Approx(p(400)).epsilon(1e-4));
    REQUIRE(s.rate_next);
    CHECK(*s.rate_next == doctest::Approx(p(800)).epsilon(1e-4));
    // p(400) is above 0.35, so the interval rule de-escalates.
    CHECK(p(400) > 0.35);
    CHECK(s.decision == Decision::DeEscalate);

    auto zero = ladder({100, 200, 300});
    CHECK(stage2_decision(history_of(zero, {{0, 3}, {0, 3}}, 1), zero) == Decision::Escalate);
}

TEST_CASE("stage 3 takes the conservative decision")
{
    CHECK(stage3_combine(Decision::Escalate, Decision::Stay) == Decision::Stay);
    CHECK(stage3_combine(Decision::DeEscalateAndExclude, Decision::Escalate) == Decision::DeEscalateAndExclude);
    CHECK(stage3_combine(Decision::Stay, Decision::Stay) == Decision::Stay);
    CHECK_THROWS_AS(stage3_combine(Decision::StopTrial, Decision::Stay), ArgumentError);
}

TEST_CASE("next dose moves along the ladder")
{
    auto c = ladder({100, 200, 300, 400, 500});
    CHECK(next_dose(history_of(c, {{0, 3}, {0, 3}, {0, 3}}, 2), Decision::Escalate, c).dose_index == 3u);
    const auto ex = next_dose(history_of(c, {{3, 3}}, 0), Decision::DeEscalateAndExclude, c);
    CHECK_FALSE(ex.dose_index);
    CHECK(std::all_of(ex.history.outcomes.begin(), ex.history.outcomes.end(), [](auto& o) { return o.excluded; }));
    CHECK(next_dose(history_of(c, {{0, 3}, {0, 3}, {0, 3}, {0, 3}, {0, 3}}, 4), Decision::Escalate, c).dose_index ==
          4u);
    CHECK(next_dose(history_of(c, {{0, 3}, {2, 3}}, 1), Decision::DeEscalate, c).dose_index == 0u);
    c.max_subjects = 6;
    CHECK_FALSE(next_dose(history_of(c, {{0, 3}, {0, 3}}, 1), Decision::Escalate, c).dose_index);
}

TEST_CASE("MTD selection")
{
    const std::vector<double> smoothed{0.10, 0.30, 0.55};
    CHECK(select_from_smoothed(smoothed, 0.30) == 1u);

    const std::vector<double> raw{0.35, 0.25};
    const std::vector<double> w{1, 1};
    const auto pooled = pava_isotonic(raw, w);
    const auto grid = oracle::isotonic_grid(raw, w);
    CHECK(std::abs(grid[0] - 0.30) < 1e-3);
    CHECK(select_from_smoothed(pooled, 0.30) == 1u);

    auto c = ladder({100, 200, 400});
    TrialHistory h = history_of(c, {{0, 6}, {2, 6}, {5, 6}}, 2);
    const auto sel = select_mtd(h, c);
    REQUIRE(sel.dose);
    CHECK(*sel.dose == 200.0);
    for (auto& o : h.outcomes) o.excluded = true;
    CHECK_FALSE(select_mtd(h, c).dose);
}

TEST_CASE("whole-trial simulation boundaries")
{
    const auto c = ladder({100, 200, 300, 400, 500});
    const std::vector<double> none(5, 0.0);
    const auto run = simulate_escalation(none, c, 11);
    for (std::size_t i = 1; i < run.path.size(); ++i) CHECK(run.path[i].dose_index >= run.path[i - 1].dose_index);
    CHECK(run.path.back().dose_index == 4u);
    REQUIRE(run.mtd);
    CHECK(*run.mtd == 500.0);

    const std::vector<double> all(5, 1.0);
    const auto tox = simulate_escalation(all, c, 11);
    CHECK(tox.path.size() == 1);
    CHECK(tox.path[0].combined == Decision::DeEscalateAndExclude);
    CHECK_FALSE(tox.mtd);
}

TEST_CASE("simulation is reproducible per seed")
{
    const auto c = ladder({100, 200, 300, 400, 500});
    const std::vector<double> tox{0.05, 0.15, 0.30, 0.45, 0.60};
    const auto a = simulate_escalation_study(tox, c, 50, 123);
    const auto b = simulate_escalation_study(tox, c, 50, 123);
    CHECK(a.selected == b.selected);
    CHECK(a.mean_overdose_fraction == b.mean_overdose_fraction);
}

TEST_CASE("decision names round-trip")
{
    for (Decision d : {Decision::DeEscalateAndExclude, Decision::DeEscalate, Decision::Stay, Decision::Escalate,
                       Decision::StopTrial})
        CHECK(decision_from_string(to_string(d)) == d);
}
