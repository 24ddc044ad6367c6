#pragma once

#include "doseopt/core_stats.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace doseopt {

struct EscalationConfig {
    double target_dlt_rate = 0.30;
    double epsilon1 = 0.05;
    double epsilon2 = 0.05;
    double gamma = 0.75;
    double exclusion_threshold = 0.95;
    // Disabling drops the P(overdose) < gamma requirement; exclusion still applies.
    bool overdose_control = true;
    BetaParams prior{1.0, 1.0};
    std::vector<double> provisional_doses;
    std::uint32_t cohort_size = 3;
    std::uint32_t max_subjects = 30;
    std::uint32_t min_subjects_for_mtd = 0;

    double lower_bound() const { return target_dlt_rate - epsilon1; }
    double upper_bound() const { return target_dlt_rate + epsilon2; }
};

// Throws ArgumentError naming the violated constraint.
void validate(const EscalationConfig& config);

struct DoseOutcome {
    double dose = 0.0;
    std::uint32_t treated = 0;
    std::uint32_t dlt_count = 0;
    bool excluded = false;
};

struct TrialHistory {
    std::vector<DoseOutcome> outcomes;
    std::size_t current_dose_index = 0;
    std::uint32_t total_treated = 0;

    static TrialHistory start(const EscalationConfig& config);
};

void validate(const TrialHistory& history, const EscalationConfig& config);

// Ordered by conservatism: DeEscalateAndExclude < DeEscalate < Stay < Escalate.
// StopTrial is terminal and sits outside the order.
enum class Decision { DeEscalateAndExclude = 0, DeEscalate = 1, Stay = 2, Escalate = 3, StopTrial = 4 };

std::string_view to_string(Decision decision);
Decision decision_from_string(std::string_view text);

struct Stage1Detail {
    BetaParams posterior;
    double prob_under = 0.0;
    double prob_target = 0.0;
    double prob_over = 0.0;
    double upm_under = 0.0;
    double upm_target = 0.0;
    double upm_over = 0.0;
    Decision base = Decision::Stay;
    Decision decision = Decision::Stay;
};

Stage1Detail stage1_evaluate(const DoseOutcome& outcome, const EscalationConfig& config);
Decision stage1_decision(const DoseOutcome& outcome, const EscalationConfig& config);

struct Stage2Detail {
    bool model_used = false;   // false: posterior-mean fallback
    bool slope_constrained = false;
    double rate_current = 0.0;
    std::optional<double> rate_next;
    std::optional<FitResult> fit;
    Decision decision = Decision::Stay;
};

Stage2Detail stage2_evaluate(const TrialHistory& history, const EscalationConfig& config);
Decision stage2_decision(const TrialHistory& history, const EscalationConfig& config);

Decision stage3_combine(Decision stage1, Decision stage2);

struct NextDose {
    TrialHistory history;                  // with any exclusions applied
    std::optional<std::size_t> dose_index; // empty: trial complete
};

NextDose next_dose(TrialHistory history, Decision decision, const EscalationConfig& config);

struct MtdSelection {
    std::optional<double> dose;
    std::optional<std::size_t> dose_index;
    std::vector<std::size_t> evaluated_indices;
    std::vector<double> raw_rates;      // posterior means
    std::vector<double> smoothed_rates; // isotonic fit of raw_rates
};

MtdSelection select_mtd(const TrialHistory& history, const EscalationConfig& config);

// Picks the index whose smoothed rate is closest to the target, breaking ties
// towards the lower dose and moving to the top of a pooled block at or below target.
std::optional<std::size_t> select_from_smoothed(std::span<const double> smoothed, double target);

// table[n - 1][x] is the Stage-1 decision for x DLTs among n treated, n = 1..n_max.
using DecisionTable = std::vector<std::vector<Decision>>;
DecisionTable decision_table(const EscalationConfig& config, std::uint32_t n_max);

struct EscalationStep {
    std::size_t dose_index = 0;
    DoseOutcome cohort; // outcome of this cohort alone
    Decision stage1 = Decision::Stay;
    Decision stage2 = Decision::Stay;
    Decision combined = Decision::Stay;
};

struct EscalationRun {
    std::vector<EscalationStep> path;
    TrialHistory final_history;
    std::optional<double> mtd;
    std::optional<std::size_t> mtd_index;
    std::uint32_t n_treated_above_true_mtd = 0; // subjects at doses with true rate > upper bound
};

EscalationRun simulate_escalation(std::span<const double> true_tox, const EscalationConfig& config,
                                  std::uint64_t seed);

struct EscalationStudy {
    std::uint32_t trials = 0;
    std::vector<std::uint32_t> selected;   // per dose
    std::uint32_t no_mtd = 0;
    std::vector<double> mean_treated;      // per dose
    double mean_overdose_fraction = 0.0;   // share of subjects above the true MTD
    double mean_treated_above = 0.0;
    struct Trial {
        std::optional<std::size_t> mtd_index;
        std::uint32_t total_treated = 0;
        std::uint32_t treated_above = 0;
    };
    std::vector<Trial> runs;
};

// Independent trials; trial i uses the stream derived from (seed, i).
EscalationStudy simulate_escalation_study(std::span<const double> true_tox, const EscalationConfig& config,
                                          std::uint32_t trials, std::uint64_t seed);

// Stage-1 -> Stage-2 -> Stage-3 for the current dose of `history`.
struct HybridDecision {
    Stage1Detail stage1;
    Stage2Detail stage2;
    Decision combined = Decision::Stay;
};

HybridDecision hybrid_decision(const TrialHistory& history, const EscalationConfig& config);

} // namespace doseopt
