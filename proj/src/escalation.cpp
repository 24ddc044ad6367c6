#include "doseopt/escalation.hpp"

#include "doseopt/errors.hpp"
#include "doseopt/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace doseopt {

namespace {

bool in_open_unit(double p) { return p > 0.0 && p < 1.0; }

std::optional<std::size_t> next_open_above(const TrialHistory& history, std::size_t index)
{
    for (std::size_t i = index + 1; i < history.outcomes.size(); ++i)
        if (!history.outcomes[i].excluded) return i;
    return std::nullopt;
}

std::optional<std::size_t> next_open_below(const TrialHistory& history, std::size_t index)
{
    for (std::size_t i = index; i-- > 0;)
        if (!history.outcomes[i].excluded) return i;
    return std::nullopt;
}

Decision classify_rate(double rate, const EscalationConfig& config)
{
    if (rate < config.lower_bound()) return Decision::Escalate;
    if (rate <= config.upper_bound()) return Decision::Stay;
    return Decision::DeEscalate;
}

} // namespace

void validate(const EscalationConfig& config)
{
    if (!in_open_unit(config.target_dlt_rate)) throw ArgumentError("target_dlt_rate must lie in (0, 1)");
    if (!(config.lower_bound() > 0.0 && config.lower_bound() < config.target_dlt_rate))
        throw ArgumentError("epsilon1 must satisfy 0 < target_dlt_rate - epsilon1 < target_dlt_rate");
    if (!(config.upper_bound() > config.target_dlt_rate && config.upper_bound() < 1.0))
        throw ArgumentError("epsilon2 must satisfy target_dlt_rate < target_dlt_rate + epsilon2 < 1");
    if (!in_open_unit(config.gamma)) throw ArgumentError("gamma must lie in (0, 1)");
    if (!(config.exclusion_threshold > 0.0 && config.exclusion_threshold <= 1.0))
        throw ArgumentError("exclusion_threshold must lie in (0, 1]");
    validate(config.prior);
    for (std::size_t i = 0; i < config.provisional_doses.size(); ++i) {
        if (!(config.provisional_doses[i] > 0.0) || !std::isfinite(config.provisional_doses[i]))
            throw ArgumentError("provisional_doses must be positive");
        if (i > 0 && !(config.provisional_doses[i] > config.provisional_doses[i - 1]))
            throw ArgumentError("provisional_doses must be strictly increasing");
    }
    if (config.cohort_size == 0) throw ArgumentError("cohort_size must be positive");
    if (config.max_subjects == 0) throw ArgumentError("max_subjects must be positive");
}

TrialHistory TrialHistory::start(const EscalationConfig& config)
{
    TrialHistory h;
    for (double d : config.provisional_doses) h.outcomes.push_back({d, 0, 0, false});
    return h;
}

void validate(const TrialHistory& history, const EscalationConfig& config)
{
    if (history.outcomes.empty()) throw ArgumentError("history must contain at least one dose");
    if (history.outcomes.size() != config.provisional_doses.size())
        throw ArgumentError("history outcomes must align with provisional_doses");
    std::uint64_t total = 0;
    std::optional<std::size_t> first_excluded;
    for (std::size_t i = 0; i < history.outcomes.size(); ++i) {
        const auto& o = history.outcomes[i];
        if (o.dose != config.provisional_doses[i])
            throw ArgumentError("history dose " + std::to_string(i) + " does not match provisional_doses");
        if (o.dlt_count > o.treated) throw ArgumentError("dlt_count exceeds treated");
        if (o.excluded && !first_excluded) first_excluded = i;
        total += o.treated;
    }
    if (history.current_dose_index >= history.outcomes.size())
        throw ArgumentError("current_dose_index out of range");
    // With every dose excluded the trial is over and the index is only a record.
    if (first_excluded && *first_excluded > 0 && history.current_dose_index >= *first_excluded)
        throw ArgumentError("current_dose_index points at or above an excluded dose");
    if (total != history.total_treated) throw ArgumentError("total_treated must equal the sum of treated");
}

std::string_view to_string(Decision decision)
{
    switch (decision) {
    case Decision::DeEscalateAndExclude: return "DeEscalateAndExclude";
    case Decision::DeEscalate: return "DeEscalate";
    case Decision::Stay: return "Stay";
    case Decision::Escalate: return "Escalate";
    case Decision::StopTrial: return "StopTrial";
    }
    return "?";
}

Decision decision_from_string(std::string_view text)
{
    for (auto d : {Decision::DeEscalateAndExclude, Decision::DeEscalate, Decision::Stay, Decision::Escalate,
                   Decision::StopTrial})
        if (to_string(d) == text) return d;
    throw ArgumentError("unknown decision '" + std::string(text) + "'");
}

Stage1Detail stage1_evaluate(const DoseOutcome& outcome, const EscalationConfig& config)
{
    validate(config);
    if (outcome.treated == 0) throw InsufficientDataError("stage-1 decision needs at least one treated subject");
    if (outcome.dlt_count > outcome.treated) throw ArgumentError("dlt_count exceeds treated");

    Stage1Detail s;
    s.posterior = beta_posterior(config.prior, outcome.dlt_count, outcome.treated - outcome.dlt_count);
    const double lo = config.lower_bound();
    const double hi = config.upper_bound();
    s.prob_under = beta_interval_prob(s.posterior, 0.0, lo);
    s.prob_target = beta_interval_prob(s.posterior, lo, hi);
    s.prob_over = beta_interval_prob(s.posterior, hi, 1.0);
    s.upm_under = s.prob_under / lo;
    s.upm_target = s.prob_target / (hi - lo);
    s.upm_over = s.prob_over / (1.0 - hi);

    // Ties go to the more conservative action.
    s.base = Decision::DeEscalate;
    double best = s.upm_over;
    if (s.upm_target > best) {
        s.base = Decision::Stay;
        best = s.upm_target;
    }
    if (s.upm_under > best) s.base = Decision::Escalate;

    s.decision = s.base;
    if (config.overdose_control && s.prob_over >= config.gamma) s.decision = std::min(s.decision, Decision::DeEscalate);
    if (s.prob_over >= config.exclusion_threshold) s.decision = Decision::DeEscalateAndExclude;
    return s;
}

Decision stage1_decision(const DoseOutcome& outcome, const EscalationConfig& config)
{
    return stage1_evaluate(outcome, config).decision;
}

Stage2Detail stage2_evaluate(const TrialHistory& history, const EscalationConfig& config)
{
    validate(config);
    validate(history, config);
    if (history.total_treated == 0) throw InsufficientDataError("stage-2 decision needs at least one treated subject");

    const std::size_t cur = history.current_dose_index;
    const auto next = next_open_above(history, cur);
    std::vector<BinomialObservation> data;
    std::set<double> distinct;
    std::uint64_t pooled_dlt = 0;
    std::uint64_t pooled_n = 0;
    for (const auto& o : history.outcomes) {
        if (o.excluded || o.treated == 0) continue;
        data.push_back({o.dose, o.dlt_count, o.treated, 1.0});
        distinct.insert(o.dose);
        pooled_dlt += o.dlt_count;
        pooled_n += o.treated;
    }

    Stage2Detail s;
    if (distinct.size() >= 2) {
        FitResult fit = fit_logistic_weighted(data, CovariateTransform::NaturalLog);
        if (fit.converged) {
            s.model_used = true;
            if (fit.curve.slope < 0.0) {
                s.slope_constrained = true;
                s.rate_current = static_cast<double>(pooled_dlt) / static_cast<double>(pooled_n);
                if (next) s.rate_next = s.rate_current;
            } else {
                s.rate_current = fit.curve.evaluate(history.outcomes[cur].dose);
                if (next) s.rate_next = fit.curve.evaluate(history.outcomes[*next].dose);
            }
            s.fit = fit;
        }
    }
    if (!s.model_used) {
        const auto& o = history.outcomes[cur];
        s.rate_current = beta_posterior(config.prior, o.dlt_count, o.treated - o.dlt_count).mean();
        if (next) s.rate_next = s.rate_current;
    }

    s.decision = classify_rate(s.rate_current, config);
    if (s.decision == Decision::Escalate && s.rate_next && *s.rate_next > config.upper_bound())
        s.decision = Decision::Stay;
    return s;
}

Decision stage2_decision(const TrialHistory& history, const EscalationConfig& config)
{
    return stage2_evaluate(history, config).decision;
}

Decision stage3_combine(Decision stage1, Decision stage2)
{
    if (stage1 == Decision::StopTrial || stage2 == Decision::StopTrial)
        throw ArgumentError("stage-3 combination is undefined for StopTrial");
    return std::min(stage1, stage2);
}

HybridDecision hybrid_decision(const TrialHistory& history, const EscalationConfig& config)
{
    validate(config);
    validate(history, config);
    if (history.outcomes[history.current_dose_index].excluded)
        throw ArgumentError("every dose is excluded; the trial is complete");
    HybridDecision h;
    h.stage1 = stage1_evaluate(history.outcomes[history.current_dose_index], config);
    h.stage2 = stage2_evaluate(history, config);
    h.combined = stage3_combine(h.stage1.decision, h.stage2.decision);
    return h;
}

NextDose next_dose(TrialHistory history, Decision decision, const EscalationConfig& config)
{
    NextDose out;
    const std::size_t cur = history.current_dose_index;
    std::optional<std::size_t> index;
    switch (decision) {
    case Decision::Escalate: index = next_open_above(history, cur).value_or(cur); break;
    case Decision::Stay: index = cur; break;
    case Decision::DeEscalateAndExclude:
        for (std::size_t i = cur; i < history.outcomes.size(); ++i) history.outcomes[i].excluded = true;
        [[fallthrough]];
    case Decision::DeEscalate: index = next_open_below(history, cur); break;
    case Decision::StopTrial: break;
    }
    if (history.total_treated >= config.max_subjects) index.reset();
    if (index) history.current_dose_index = *index;
    out.history = std::move(history);
    out.dose_index = index;
    return out;
}

std::optional<std::size_t> select_from_smoothed(std::span<const double> smoothed, double target)
{
    if (smoothed.empty()) return std::nullopt;
    constexpr double tol = 1e-12;
    std::size_t best = 0;
    double best_distance = std::fabs(smoothed[0] - target);
    for (std::size_t i = 1; i < smoothed.size(); ++i) {
        const double d = std::fabs(smoothed[i] - target);
        if (d < best_distance - tol) {
            best = i;
            best_distance = d;
        }
    }
    if (smoothed[best] <= target + tol)
        while (best + 1 < smoothed.size() && std::fabs(smoothed[best + 1] - smoothed[best]) <= tol) ++best;
    return best;
}

MtdSelection select_mtd(const TrialHistory& history, const EscalationConfig& config)
{
    validate(config);
    MtdSelection sel;
    std::vector<double> weights;
    const std::uint32_t min_n = std::max<std::uint32_t>(1, config.min_subjects_for_mtd);
    for (std::size_t i = 0; i < history.outcomes.size(); ++i) {
        const auto& o = history.outcomes[i];
        if (o.excluded || o.treated < min_n) continue;
        sel.evaluated_indices.push_back(i);
        sel.raw_rates.push_back(beta_posterior(config.prior, o.dlt_count, o.treated - o.dlt_count).mean());
        weights.push_back(static_cast<double>(o.treated));
    }
    if (sel.evaluated_indices.empty()) return sel;
    sel.smoothed_rates = pava_isotonic(sel.raw_rates, weights);
    const auto pick = select_from_smoothed(sel.smoothed_rates, config.target_dlt_rate);
    sel.dose_index = sel.evaluated_indices[*pick];
    sel.dose = history.outcomes[*sel.dose_index].dose;
    return sel;
}

DecisionTable decision_table(const EscalationConfig& config, std::uint32_t n_max)
{
    validate(config);
    DecisionTable table;
    table.reserve(n_max);
    for (std::uint32_t n = 1; n <= n_max; ++n) {
        std::vector<Decision> row;
        row.reserve(n + 1);
        for (std::uint32_t x = 0; x <= n; ++x) row.push_back(stage1_decision({0.0, n, x, false}, config));
        table.push_back(std::move(row));
    }
    return table;
}

EscalationRun simulate_escalation(std::span<const double> true_tox, const EscalationConfig& config,
                                  std::uint64_t seed)
{
    validate(config);
    if (config.provisional_doses.empty()) throw ArgumentError("provisional_doses must not be empty");
    if (true_tox.size() != config.provisional_doses.size())
        throw ArgumentError("true_tox must align with provisional_doses");
    for (double p : true_tox)
        if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("true toxicity rates must lie in [0, 1]");

    RandomStream rng(derive_stream(seed, {0x65736361ULL}));
    EscalationRun run;
    TrialHistory history = TrialHistory::start(config);
    while (true) {
        const std::uint32_t room = config.max_subjects - std::min(config.max_subjects, history.total_treated);
        const std::uint32_t n = std::min(config.cohort_size, room);
        if (n == 0) break;
        const std::size_t idx = history.current_dose_index;
        const std::uint32_t dlt = rng.binomial(n, true_tox[idx]);
        auto& o = history.outcomes[idx];
        o.treated += n;
        o.dlt_count += dlt;
        history.total_treated += n;

        const HybridDecision h = hybrid_decision(history, config);
        run.path.push_back({idx, {o.dose, n, dlt, false}, h.stage1.decision, h.stage2.decision, h.combined});
        NextDose nd = next_dose(std::move(history), h.combined, config);
        history = std::move(nd.history);
        if (!nd.dose_index) break;
    }

    for (std::size_t i = 0; i < history.outcomes.size(); ++i)
        if (true_tox[i] > config.upper_bound()) run.n_treated_above_true_mtd += history.outcomes[i].treated;
    const MtdSelection sel = select_mtd(history, config);
    run.mtd = sel.dose;
    run.mtd_index = sel.dose_index;
    run.final_history = std::move(history);
    return run;
}

EscalationStudy simulate_escalation_study(std::span<const double> true_tox, const EscalationConfig& config,
                                          std::uint32_t trials, std::uint64_t seed)
{
    if (trials == 0) throw ArgumentError("trials must be positive");
    EscalationStudy st;
    st.trials = trials;
    const std::size_t k = config.provisional_doses.size();
    st.selected.assign(k, 0);
    st.mean_treated.assign(k, 0.0);
    std::vector<double> fractions;
    for (std::uint32_t t = 0; t < trials; ++t) {
        const EscalationRun run = simulate_escalation(true_tox, config, derive_stream(seed, {t}));
        if (run.mtd_index) ++st.selected[*run.mtd_index];
        else ++st.no_mtd;
        for (std::size_t i = 0; i < k; ++i) st.mean_treated[i] += run.final_history.outcomes[i].treated;
        const std::uint32_t total = run.final_history.total_treated;
        fractions.push_back(total ? static_cast<double>(run.n_treated_above_true_mtd) / total : 0.0);
        st.mean_treated_above += run.n_treated_above_true_mtd;
        st.runs.push_back({run.mtd_index, total, run.n_treated_above_true_mtd});
    }
    for (auto& m : st.mean_treated) m /= trials;
    st.mean_treated_above /= trials;
    for (double f : fractions) st.mean_overdose_fraction += f;
    st.mean_overdose_fraction /= trials;
    return st;
}

} // namespace doseopt
