#pragma once

#include "doseopt/core_stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace doseopt {

enum class DesignVariant { Fractional, Full };

struct FactorialDesign {
    std::size_t cohort_count = 0;
    double high_dose = 0.0;
    std::vector<double> low_doses;  // one per cohort (fractional)
    std::uint32_t n_per_arm = 0;
    DesignVariant variant = DesignVariant::Fractional;
    std::vector<double> full_dose_grid; // full variant only

    // Ascending arm doses randomized within `cohort`.
    std::vector<double> arm_doses(std::size_t cohort) const;
    double lowest_dose() const;
    std::uint64_t total_sample_size() const;
};

FactorialDesign build_design(std::size_t k, double high_dose, const std::vector<double>& low_doses,
                             std::uint32_t n_per_arm);
FactorialDesign build_full_design(std::size_t k, const std::vector<double>& dose_grid, double high_dose,
                                  std::uint32_t n_per_arm);
void validate(const FactorialDesign& design);

// Dose-response truth per cohort, identity transform on dose in mg.
struct TrueCurveSet {
    std::vector<LogisticCurve> curves;
};

// Five parallel logistic curves; cohort 1 is the most responsive at 500 mg.
TrueCurveSet default_truth();
void validate(const TrueCurveSet& truth, const FactorialDesign& design);

struct ArmData {
    double dose = 0.0;
    std::uint32_t responders = 0;
    std::uint32_t total = 0;
};

struct CohortData {
    std::vector<std::vector<ArmData>> cohorts;
};

// Each arm draws from its own stream keyed by (seed, replicate, cohort, dose),
// so arms with the same dose and size reproduce identically across designs.
CohortData simulate_cohort_data(const FactorialDesign& design, const TrueCurveSet& truth, std::uint64_t seed,
                                std::uint64_t replicate_index);

std::size_t identify_sensitive_cohort(const CohortData& data, double high_dose);

struct PowerWeights {
    std::vector<double> alphas;
    std::size_t sensitive_index = 0;
};

PowerWeights compute_power_weights(const CohortData& data, std::size_t sensitive_index, double high_dose);

// Power-likelihood logistic fit on dose; the covariate is divided by
// `dose_rescale` for conditioning and the result is reported on the mg scale.
FitResult fit_power_likelihood(const CohortData& data, const PowerWeights& weights, double dose_rescale);

struct OptimalDoseResult {
    double ci_level = 0.0;
    double target_response = 0.0;
    double chosen_dose = 0.0;
    std::optional<double> relative_rr_pct;
};

OptimalDoseResult select_optimal_dose(const FitResult& fit, double high_dose, double ci_level, double floor_dose);

struct LevelSummary {
    double ci_level = 0.0;
    double dose_mean = 0.0;
    double dose_median = 0.0;
    double dose_sd = 0.0;
    double rr_mean = 0.0;
    double rr_median = 0.0;
    double rr_sd = 0.0;
    double pct_rr_below_70 = 0.0;
};

struct ReplicateRecord {
    std::uint64_t replicate = 0;
    std::size_t sensitive_index = 0;
    bool fallback = false;
    std::vector<double> chosen_doses;  // per CI level
    std::vector<double> relative_rr;   // per CI level, percent
};

struct OperatingCharacteristics {
    std::string scheme;
    double p_select = 0.0;
    double fallback_rate = 0.0;
    std::vector<LevelSummary> levels;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<ReplicateRecord> records; // filled when requested
};

struct SimulationOptions {
    unsigned threads = 1;
    bool keep_records = false;
};

OperatingCharacteristics run_operating_characteristics(const FactorialDesign& design, const TrueCurveSet& truth,
                                                       std::uint64_t replicates, std::uint64_t seed,
                                                       const std::vector<double>& ci_levels,
                                                       const SimulationOptions& options = {});

struct NamedDesign {
    std::string name;
    FactorialDesign design;
};

std::vector<OperatingCharacteristics> compare_schemes(const std::vector<NamedDesign>& schemes,
                                                      const TrueCurveSet& truth, std::uint64_t replicates,
                                                      std::uint64_t seed, const std::vector<double>& ci_levels,
                                                      const SimulationOptions& options = {});

// The five standard layouts: Schemes 1-4 fractional with
// 30 per arm, Scheme 5 full factorial over the six doses with 10 per arm.
std::vector<NamedDesign> reference_schemes();

struct SampleSummary {
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
};

// Sample SD uses n - 1; an even-length median is the midpoint of the middle pair.
SampleSummary summarize(std::vector<double> values);

} // namespace doseopt
