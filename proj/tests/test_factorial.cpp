#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "doseopt/errors.hpp"
#include "doseopt/factorial.hpp"
#include "oracles.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace doseopt;

namespace {

CohortData hd_counts(std::vector<std::uint32_t> responders, std::uint32_t n)
{
    CohortData d;
    for (auto r : responders) d.cohorts.push_back({{250, 0, n}, {500, r, n}});
    return d;
}

CohortData small_dataset()
{
    CohortData d;
    d.cohorts = {{{250, 9, 30}, {500, 20, 30}},
                 {{300, 8, 30}, {500, 16, 30}},
                 {{350, 7, 30}, {500, 13, 30}},
                 {{400, 8, 30}, {500, 12, 30}},
                 {{450, 6, 30}, {500, 8, 30}}};
    return d;
}

std::vector<oracle::Binomial> flatten(const CohortData& d, const std::vector<double>& alphas)
{
    std::vector<oracle::Binomial> v;
    for (std::size_t c = 0; c < d.cohorts.size(); ++c)
        for (const auto& a : d.cohorts[c])
            v.push_back({a.dose, static_cast<double>(a.responders), static_cast<double>(a.total), alphas[c]});
    return v;
}

} // namespace

TEST_CASE("fractional designs")
{
    const auto s1 = build_design(5, 500, {250, 300, 350, 400, 450}, 30);
    CHECK(s1.total_sample_size() == 300);
    CHECK(s1.arm_doses(2) == std::vector<double>{350, 500});
    CHECK(build_design(5, 500, {450, 400, 350, 300, 250}, 30).total_sample_size() == 300);
    CHECK_THROWS_AS(build_design(5, 500, {250, 300, 350, 400, 500}, 30), ArgumentError);
    CHECK_THROWS_AS(build_design(5, 500, {250, 300}, 30), ArgumentError);
}

TEST_CASE("full designs")
{
    CHECK(build_full_design(5, {250, 300, 350, 400, 450, 500}, 500, 10).total_sample_size() == 300);
    CHECK(build_full_design(5, {500}, 500, 30).total_sample_size() == 150);
    CHECK_THROWS_AS(build_full_design(5, {250, 300, 450}, 500, 10), ArgumentError);
}

TEST_CASE("reference schemes")
{
    const auto s = reference_schemes();
    REQUIRE(s.size() == 5);
    CHECK(s[2].design.low_doses == std::vector<double>{450, 300, 250, 350, 400});
    CHECK(s[3].design.low_doses == std::vector<double>{250, 400, 450, 350, 300});
    for (const auto& d : s) CHECK(d.design.total_sample_size() == 300);
}

TEST_CASE("degenerate response probabilities")
{
    const auto design = build_design(5, 500, {250, 300, 350, 400, 450}, 30);
    TrueCurveSet sure;
    TrueCurveSet never;
    for (int i = 0; i < 5; ++i) {
        sure.curves.push_back({800.0, 0.0, CovariateTransform::Identity});
        never.curves.push_back({-800.0, 0.0, CovariateTransform::Identity});
    }
    for (const auto& c : simulate_cohort_data(design, sure, 1, 0).cohorts)
        for (const auto& a : c) CHECK(a.responders == a.total);
    for (const auto& c : simulate_cohort_data(design, never, 1, 0).cohorts)
        for (const auto& a : c) CHECK(a.responders == 0u);
}

TEST_CASE("simulated counts are locked and unbiased")
{
    const auto design = reference_schemes()[0].design;
    const auto truth = default_truth();
    const auto d = simulate_cohort_data(design, truth, 42, 0);
    const std::vector<std::pair<std::uint32_t, std::uint32_t>> golden{{6, 21}, {7, 18}, {3, 9}, {6, 13}, {6, 9}};
    for (std::size_t c = 0; c < 5; ++c) {
        CHECK(d.cohorts[c][0].responders == golden[c].first);
        CHECK(d.cohorts[c][1].responders == golden[c].second);
    }

    const int reps = 10000;
    std::vector<std::vector<double>> sums(5, std::vector<double>(2, 0.0));
    for (int r = 0; r < reps; ++r) {
        const auto x = simulate_cohort_data(design, truth, 42, r);
        for (std::size_t c = 0; c < 5; ++c)
            for (std::size_t a = 0; a < 2; ++a) sums[c][a] += x.cohorts[c][a].responders;
    }
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t a = 0; a < 2; ++a) {
            const double p = truth.curves[c].evaluate(design.arm_doses(c)[a]);
            const double rate = sums[c][a] / (30.0 * reps);
            CHECK(std::abs(rate - p) < 3.0 * std::sqrt(p * (1 - p) / (30.0 * reps)));
        }
}

TEST_CASE("high-dose arms are shared between fractional layouts")
{
    const auto s = reference_schemes();
    const auto truth = default_truth();
    for (std::uint64_t r = 0; r < 20; ++r) {
        const auto a = simulate_cohort_data(s[0].design, truth, 5, r);
        const auto b = simulate_cohort_data(s[1].design, truth, 5, r);
        for (std::size_t c = 0; c < 5; ++c) CHECK(a.cohorts[c][1].responders == b.cohorts[c][1].responders);
    }
}

TEST_CASE("sensitive cohort")
{
    CHECK(identify_sensitive_cohort(hd_counts({18, 12, 10, 9, 6}, 30), 500) == 0u);
    CHECK(identify_sensitive_cohort(hd_counts({15, 15, 10, 9, 6}, 30), 500) == 0u);
    CHECK(identify_sensitive_cohort(hd_counts({7, 5, 4, 4, 3}, 10), 500) == 0u);
    CHECK(identify_sensitive_cohort(hd_counts({7, 9, 4, 4, 3}, 10), 500) == 1u);
}

TEST_CASE("power weights")
{
    const auto w = compute_power_weights(hd_counts({12, 9}, 20), 0, 500);
    CHECK(w.alphas[0] == 1.0);
    CHECK(w.alphas[1] == doctest::Approx(0.75).epsilon(1e-14));
    const auto zero = compute_power_weights(hd_counts({0, 0, 0}, 20), 0, 500);
    CHECK(zero.alphas == std::vector<double>{1, 1, 1});
}

TEST_CASE("power likelihood degeneracies")
{
    CohortData one;
    one.cohorts = {{{250, 7, 30}, {500, 18, 30}}};
    CohortData twice;
    twice.cohorts = {one.cohorts[0], one.cohorts[0]};
    CohortData doubled;
    doubled.cohorts = {{{250, 14, 60}, {500, 36, 60}}};
    const auto f2 = fit_power_likelihood(twice, {{1, 1}, 0}, 500);
    const auto fd = fit_power_likelihood(doubled, {{1}, 0}, 500);
    CHECK(std::abs(f2.curve.intercept - fd.curve.intercept) < 1e-8);
    CHECK(std::abs(f2.curve.slope - fd.curve.slope) < 1e-8);

    const CohortData d = small_dataset();
    CohortData first;
    first.cohorts = {d.cohorts[0]};
    const auto masked = fit_power_likelihood(d, {{1, 0, 0, 0, 0}, 0}, 500);
    const auto alone = fit_power_likelihood(first, {{1}, 0}, 500);
    CHECK(std::abs(masked.curve.intercept - alone.curve.intercept) < 1e-10);
    CHECK(std::abs(masked.curve.slope - alone.curve.slope) < 1e-10);
}

TEST_CASE("power likelihood matches grid oracle")
{
    const CohortData d = small_dataset();
    const std::vector<double> alphas{1, 0.75, 0.5, 0.5, 0.25};
    const auto f = fit_power_likelihood(d, {alphas, 0}, 500);
    REQUIRE(f.converged);
    const auto [a, b] = oracle::logistic_mle(flatten(d, alphas));
    CHECK(std::abs(f.curve.intercept - a) < 1e-3);
    CHECK(std::abs(f.curve.slope - b) < 1e-3);
}

TEST_CASE("optimal dose from the lower bound")
{
    FitResult f;
    f.curve = {-4.0, 0.01, CovariateTransform::Identity};
    f.converged = true;
    CHECK(select_optimal_dose(f, 500, 0.95, 250).chosen_dose == doctest::Approx(500).epsilon(1e-12));

    f.covariance = {{{0.25, -4e-4}, {-4e-4, 1e-6}}};
    const auto r = select_optimal_dose(f, 500, 0.95, 100);
    std::mt19937_64 rng(2024);
    std::vector<double> eta;
    for (int i = 0; i < 10000; ++i) {
        const auto th = oracle::mvn2(rng, {-4.0, 0.01}, 0.25, -4e-4, 1e-6);
        eta.push_back(th[0] + th[1] * 500.0);
    }
    const double bound = oracle::quantile(eta, 0.025);
    const double dose = (bound + 4.0) / 0.01;
    CHECK(std::abs(r.chosen_dose - dose) < 3.0);
    CHECK(r.chosen_dose < 500);

    f.curve.slope = -0.01;
    CHECK_THROWS_AS(select_optimal_dose(f, 500, 0.95, 100), PolicyError);
}

TEST_CASE("exchangeable cohorts are selected uniformly")
{
    const auto design = build_design(5, 500, {250, 300, 350, 400, 450}, 2000);
    TrueCurveSet same;
    for (int i = 0; i < 5; ++i) same.curves.push_back({-3.0, 0.0075, CovariateTransform::Identity});
    const auto oc = run_operating_characteristics(design, same, 2000, 3, {0.9});
    CHECK(std::abs(oc.p_select - 0.2) < 0.03);
}

TEST_CASE("scheme comparison composes single runs")
{
    const auto s = reference_schemes();
    const auto truth = default_truth();
    const std::vector<double> levels{0.8, 0.9, 0.95};
    const auto table = compare_schemes({s[1]}, truth, 300, 17, levels);
    const auto single = run_operating_characteristics(s[1].design, truth, 300, 17, levels);
    REQUIRE(table.size() == 1);
    CHECK(table[0].p_select == single.p_select);
    for (std::size_t l = 0; l < 3; ++l) CHECK(table[0].levels[l].dose_mean == single.levels[l].dose_mean);
}

TEST_CASE("operating characteristics ignore thread count")
{
    const auto design = reference_schemes()[3].design;
    const auto truth = default_truth();
    SimulationOptions one;
    SimulationOptions four;
    four.threads = 4;
    const auto a = run_operating_characteristics(design, truth, 400, 9, {0.8, 0.95}, one);
    const auto b = run_operating_characteristics(design, truth, 400, 9, {0.8, 0.95}, four);
    CHECK(a.p_select == b.p_select);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(a.levels[l].dose_mean == b.levels[l].dose_mean);
        CHECK(a.levels[l].dose_sd == b.levels[l].dose_sd);
        CHECK(a.levels[l].rr_median == b.levels[l].rr_median);
    }
}

TEST_CASE("sample summary")
{
    const auto s = summarize({4, 1, 3, 2});
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
}
