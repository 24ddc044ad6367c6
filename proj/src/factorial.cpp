#include "doseopt/factorial.hpp"

#include "doseopt/errors.hpp"
#include "doseopt/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

namespace doseopt {

namespace {

const ArmData* find_arm(const std::vector<ArmData>& arms, double dose)
{
    for (const auto& a : arms)
        if (a.dose == dose) return &a;
    return nullptr;
}

double high_dose_rate(const CohortData& data, std::size_t cohort, double high_dose)
{
    const ArmData* arm = find_arm(data.cohorts[cohort], high_dose);
    if (!arm) throw ArgumentError("cohort " + std::to_string(cohort + 1) + " has no high-dose arm");
    if (arm->total == 0) throw ArgumentError("high-dose arm of cohort " + std::to_string(cohort + 1) + " is empty");
    return static_cast<double>(arm->responders) / static_cast<double>(arm->total);
}

ReplicateRecord run_replicate(const FactorialDesign& design, const TrueCurveSet& truth, std::uint64_t seed,
                              std::uint64_t replicate, const std::vector<double>& ci_levels)
{
    ReplicateRecord rec;
    rec.replicate = replicate;
    const CohortData data = simulate_cohort_data(design, truth, seed, replicate);
    rec.sensitive_index = identify_sensitive_cohort(data, design.high_dose);
    const PowerWeights weights = compute_power_weights(data, rec.sensitive_index, design.high_dose);

    std::optional<FitResult> fit;
    try {
        FitResult f = fit_power_likelihood(data, weights, design.high_dose);
        if (f.converged && f.curve.slope > 0.0) fit = f;
    } catch (const DegenerateDesignError&) {
    }
    rec.fallback = !fit;

    const LogisticCurve& reference = truth.curves.front();
    const double reference_at_hd = reference.evaluate(design.high_dose);
    for (double level : ci_levels) {
        const double dose = fit ? select_optimal_dose(*fit, design.high_dose, level, design.lowest_dose()).chosen_dose
                                : design.high_dose;
        rec.chosen_doses.push_back(dose);
        rec.relative_rr.push_back(100.0 * reference.evaluate(dose) / reference_at_hd);
    }
    return rec;
}

} // namespace

std::vector<double> FactorialDesign::arm_doses(std::size_t cohort) const
{
    if (cohort >= cohort_count) throw ArgumentError("cohort index out of range");
    if (variant == DesignVariant::Full) return full_dose_grid;
    return {low_doses[cohort], high_dose};
}

double FactorialDesign::lowest_dose() const
{
    if (variant == DesignVariant::Full) return *std::min_element(full_dose_grid.begin(), full_dose_grid.end());
    return *std::min_element(low_doses.begin(), low_doses.end());
}

std::uint64_t FactorialDesign::total_sample_size() const
{
    const std::uint64_t arms = variant == DesignVariant::Full ? full_dose_grid.size() : 2;
    return static_cast<std::uint64_t>(cohort_count) * arms * n_per_arm;
}

void validate(const FactorialDesign& design)
{
    if (design.cohort_count == 0) throw ArgumentError("cohort count must be positive");
    if (!(design.high_dose > 0.0)) throw ArgumentError("high_dose must be positive");
    if (design.n_per_arm == 0) throw ArgumentError("n_per_arm must be positive");
    if (design.variant == DesignVariant::Fractional) {
        if (design.low_doses.size() != design.cohort_count)
            throw ArgumentError("low_doses must have one entry per cohort");
        for (double ld : design.low_doses) {
            if (!(ld > 0.0)) throw ArgumentError("low doses must be positive");
            if (!(ld < design.high_dose)) throw ArgumentError("every low dose must be below high_dose (LD < HD)");
        }
    } else {
        if (design.full_dose_grid.empty()) throw ArgumentError("full design needs a dose grid");
        for (std::size_t i = 0; i < design.full_dose_grid.size(); ++i) {
            if (!(design.full_dose_grid[i] > 0.0)) throw ArgumentError("grid doses must be positive");
            if (i > 0 && !(design.full_dose_grid[i] > design.full_dose_grid[i - 1]))
                throw ArgumentError("dose grid must be strictly increasing");
        }
        if (std::find(design.full_dose_grid.begin(), design.full_dose_grid.end(), design.high_dose) ==
            design.full_dose_grid.end())
            throw ArgumentError("dose grid must contain high_dose");
        if (design.full_dose_grid.back() != design.high_dose)
            throw ArgumentError("high_dose must be the largest grid dose");
    }
}

FactorialDesign build_design(std::size_t k, double high_dose, const std::vector<double>& low_doses,
                             std::uint32_t n_per_arm)
{
    FactorialDesign d;
    d.cohort_count = k;
    d.high_dose = high_dose;
    d.low_doses = low_doses;
    d.n_per_arm = n_per_arm;
    d.variant = DesignVariant::Fractional;
    validate(d);
    return d;
}

FactorialDesign build_full_design(std::size_t k, const std::vector<double>& dose_grid, double high_dose,
                                  std::uint32_t n_per_arm)
{
    FactorialDesign d;
    d.cohort_count = k;
    d.high_dose = high_dose;
    d.n_per_arm = n_per_arm;
    d.variant = DesignVariant::Full;
    d.full_dose_grid = dose_grid;
    validate(d);
    return d;
}

TrueCurveSet default_truth()
{
    // Common slope per mg; responses at 500 mg of 0.65, 0.55, 0.45, 0.40, 0.30.
    constexpr double slope = 0.0075;
    TrueCurveSet t;
    for (double at_hd : {0.65, 0.55, 0.45, 0.40, 0.30})
        t.curves.push_back({logit(at_hd) - slope * 500.0, slope, CovariateTransform::Identity});
    return t;
}

void validate(const TrueCurveSet& truth, const FactorialDesign& design)
{
    if (truth.curves.size() != design.cohort_count)
        throw ArgumentError("truth must supply one curve per cohort");
    for (const auto& c : truth.curves) {
        if (c.transform != CovariateTransform::Identity) throw ArgumentError("true curves use dose in mg directly");
        if (!std::isfinite(c.intercept) || !std::isfinite(c.slope)) throw ArgumentError("true curve must be finite");
    }
    const double top = truth.curves.front().evaluate(design.high_dose);
    for (std::size_t i = 1; i < truth.curves.size(); ++i)
        if (truth.curves[i].evaluate(design.high_dose) > top)
            throw ArgumentError("cohort 1 must have the highest true response at high_dose");
}

CohortData simulate_cohort_data(const FactorialDesign& design, const TrueCurveSet& truth, std::uint64_t seed,
                                std::uint64_t replicate_index)
{
    if (truth.curves.size() != design.cohort_count) throw ArgumentError("truth must supply one curve per cohort");
    CohortData data;
    data.cohorts.resize(design.cohort_count);
    for (std::size_t c = 0; c < design.cohort_count; ++c) {
        for (double dose : design.arm_doses(c)) {
            RandomStream rng(derive_stream(seed, {replicate_index, c, std::bit_cast<std::uint64_t>(dose)}));
            const double p = truth.curves[c].evaluate(dose);
            data.cohorts[c].push_back({dose, rng.binomial(design.n_per_arm, p), design.n_per_arm});
        }
    }
    return data;
}

std::size_t identify_sensitive_cohort(const CohortData& data, double high_dose)
{
    if (data.cohorts.empty()) throw ArgumentError("no cohorts");
    std::size_t best = 0;
    double best_rate = high_dose_rate(data, 0, high_dose);
    for (std::size_t c = 1; c < data.cohorts.size(); ++c) {
        const double r = high_dose_rate(data, c, high_dose);
        if (r > best_rate) {
            best = c;
            best_rate = r;
        }
    }
    return best;
}

PowerWeights compute_power_weights(const CohortData& data, std::size_t sensitive_index, double high_dose)
{
    if (sensitive_index >= data.cohorts.size()) throw ArgumentError("sensitive index out of range");
    PowerWeights w;
    w.sensitive_index = sensitive_index;
    const double reference = high_dose_rate(data, sensitive_index, high_dose);
    for (std::size_t c = 0; c < data.cohorts.size(); ++c) {
        if (c == sensitive_index || reference == 0.0)
            w.alphas.push_back(1.0);
        else
            w.alphas.push_back(std::clamp(high_dose_rate(data, c, high_dose) / reference, 0.0, 1.0));
    }
    return w;
}

FitResult fit_power_likelihood(const CohortData& data, const PowerWeights& weights, double dose_rescale)
{
    if (weights.alphas.size() != data.cohorts.size()) throw ArgumentError("one weight per cohort required");
    if (!(dose_rescale > 0.0)) throw ArgumentError("dose rescale must be positive");
    std::vector<BinomialObservation> obs;
    for (std::size_t c = 0; c < data.cohorts.size(); ++c)
        for (const auto& arm : data.cohorts[c])
            obs.push_back({arm.dose / dose_rescale, arm.responders, arm.total, weights.alphas[c]});

    FitResult fit = fit_logistic_weighted(obs, CovariateTransform::Identity);
    fit.curve.slope /= dose_rescale;
    fit.covariance[0][1] /= dose_rescale;
    fit.covariance[1][0] /= dose_rescale;
    fit.covariance[1][1] /= dose_rescale * dose_rescale;
    return fit;
}

OptimalDoseResult select_optimal_dose(const FitResult& fit, double high_dose, double ci_level, double floor_dose)
{
    if (!fit.converged) throw ArgumentError("optimal dose requires a converged fit");
    if (!(fit.curve.slope > 0.0)) throw PolicyError("dose-response slope is not positive; use the high dose");
    if (!(floor_dose > 0.0 && floor_dose <= high_dose)) throw ArgumentError("floor dose must lie in (0, high_dose]");
    OptimalDoseResult r;
    r.ci_level = ci_level;
    r.target_response = fitted_response_ci(fit, high_dose, ci_level).lower;
    const double dose = r.target_response > 0.0 ? logistic_invert(fit.curve, r.target_response) : floor_dose;
    r.chosen_dose = std::clamp(dose, floor_dose, high_dose);
    return r;
}

SampleSummary summarize(std::vector<double> values)
{
    SampleSummary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

OperatingCharacteristics run_operating_characteristics(const FactorialDesign& design, const TrueCurveSet& truth,
                                                       std::uint64_t replicates, std::uint64_t seed,
                                                       const std::vector<double>& ci_levels,
                                                       const SimulationOptions& options)
{
    validate(design);
    validate(truth, design);
    if (replicates == 0) throw ArgumentError("replicates must be positive");
    if (ci_levels.empty()) throw ArgumentError("at least one CI level is required");
    for (double l : ci_levels)
        if (!(l > 0.0 && l < 1.0)) throw ArgumentError("CI levels must lie in (0, 1)");

    std::vector<ReplicateRecord> records(replicates);
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(replicates)));
    if (threads == 1) {
        for (std::uint64_t r = 0; r < replicates; ++r) records[r] = run_replicate(design, truth, seed, r, ci_levels);
    } else {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (replicates + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = t * chunk;
            const std::uint64_t end = std::min(replicates, begin + chunk);
            pool.emplace_back([&, begin, end] {
                for (std::uint64_t r = begin; r < end; ++r)
                    records[r] = run_replicate(design, truth, seed, r, ci_levels);
            });
        }
    }

    OperatingCharacteristics oc;
    oc.replicates = replicates;
    oc.seed = seed;
    const double n = static_cast<double>(replicates);
    std::uint64_t selected = 0;
    std::uint64_t fallbacks = 0;
    for (const auto& rec : records) {
        selected += rec.sensitive_index == 0;
        fallbacks += rec.fallback;
    }
    oc.p_select = static_cast<double>(selected) / n;
    oc.fallback_rate = static_cast<double>(fallbacks) / n;
    for (std::size_t l = 0; l < ci_levels.size(); ++l) {
        std::vector<double> doses;
        std::vector<double> rr;
        doses.reserve(replicates);
        rr.reserve(replicates);
        std::uint64_t below = 0;
        for (const auto& rec : records) {
            doses.push_back(rec.chosen_doses[l]);
            rr.push_back(rec.relative_rr[l]);
            below += rec.relative_rr[l] < 70.0;
        }
        const SampleSummary ds = summarize(std::move(doses));
        const SampleSummary rs = summarize(std::move(rr));
        oc.levels.push_back({ci_levels[l], ds.mean, ds.median, ds.sd, rs.mean, rs.median, rs.sd,
                             100.0 * static_cast<double>(below) / n});
    }
    if (options.keep_records) oc.records = std::move(records);
    return oc;
}

std::vector<OperatingCharacteristics> compare_schemes(const std::vector<NamedDesign>& schemes,
                                                      const TrueCurveSet& truth, std::uint64_t replicates,
                                                      std::uint64_t seed, const std::vector<double>& ci_levels,
                                                      const SimulationOptions& options)
{
    if (schemes.empty()) throw ArgumentError("at least one scheme is required");
    std::vector<OperatingCharacteristics> out;
    for (const auto& s : schemes) {
        out.push_back(run_operating_characteristics(s.design, truth, replicates, seed, ci_levels, options));
        out.back().scheme = s.name;
    }
    return out;
}

std::vector<NamedDesign> reference_schemes()
{
    return {
        {"Scheme 1", build_design(5, 500.0, {250, 300, 350, 400, 450}, 30)},
        {"Scheme 2", build_design(5, 500.0, {450, 400, 350, 300, 250}, 30)},
        {"Scheme 3", build_design(5, 500.0, {450, 300, 250, 350, 400}, 30)},
        {"Scheme 4", build_design(5, 500.0, {250, 400, 450, 350, 300}, 30)},
        {"Scheme 5", build_full_design(5, {250, 300, 350, 400, 450, 500}, 500.0, 10)},
    };
}

} // namespace doseopt
