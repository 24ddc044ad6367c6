#include "doseopt/service.hpp"

#include "doseopt/errors.hpp"
#include "doseopt/random.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace doseopt {

using nlohmann::json;

namespace {

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string dose_text(double v) { return fixed(v, 1); }
std::string prob_text(double v) { return fixed(v, 2); }
std::string pct_text(double v) { return fixed(v, 1); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json fit_json(const FitResult& f)
{
    return {{"intercept", f.curve.intercept},
            {"slope", f.curve.slope},
            {"transform", f.curve.transform == CovariateTransform::NaturalLog ? "log" : "identity"},
            {"covariance", {{f.covariance[0][0], f.covariance[0][1]}, {f.covariance[1][0], f.covariance[1][1]}}},
            {"log_likelihood", f.log_likelihood},
            {"converged", f.converged},
            {"iterations", f.iterations}};
}

json escalation_simulation_payload(const RunConfig& cfg, std::uint64_t seed)
{
    const auto& esc = cfg.escalation;
    const auto& sim = cfg.simulation;
    const EscalationStudy st = simulate_escalation_study(sim.true_tox, esc, sim.trials, seed);
    json doses = json::array();
    for (std::size_t i = 0; i < esc.provisional_doses.size(); ++i)
        doses.push_back({{"dose", esc.provisional_doses[i]},
                         {"true_tox", sim.true_tox[i]},
                         {"selected_pct", 100.0 * st.selected[i] / st.trials},
                         {"mean_treated", st.mean_treated[i]}});
    json p{{"trials", st.trials},
           {"doses", doses},
           {"no_mtd_pct", 100.0 * st.no_mtd / st.trials},
           {"mean_overdose_fraction", st.mean_overdose_fraction},
           {"mean_treated_above_true_mtd", st.mean_treated_above}};
    if (sim.trials == 1) {
        const EscalationRun run = simulate_escalation(sim.true_tox, esc, derive_stream(seed, {0}));
        json path = json::array();
        for (const auto& s : run.path)
            path.push_back({{"dose_index", s.dose_index},
                            {"dose", s.cohort.dose},
                            {"treated", s.cohort.treated},
                            {"dlt", s.cohort.dlt_count},
                            {"stage1", to_string(s.stage1)},
                            {"stage2", to_string(s.stage2)},
                            {"decision", to_string(s.combined)}});
        p["path"] = path;
        p["mtd"] = optional_number(run.mtd);
        p["n_treated_above_true_mtd"] = run.n_treated_above_true_mtd;
    }
    return p;
}

json calibration_payload(const CalibrationSettings& cal, std::vector<std::string>& diagnostics)
{
    const ExposureModels models = fit_exposure_models(cal.data);
    const DoseExposureModel de = fit_dose_exposure(cal.data);
    WindowSearch search;
    search.efficacy_floor = cal.efficacy_floor;
    search.toxicity_ceiling = cal.toxicity_ceiling;
    search.level = cal.level;
    if (cal.exposure_range) {
        search.range_lower = cal.exposure_range->first;
        search.range_upper = cal.exposure_range->second;
    } else {
        search.range_lower = search.range_upper = cal.data.front().exposure;
        for (const auto& o : cal.data) {
            search.range_lower = std::min(search.range_lower, o.exposure);
            search.range_upper = std::max(search.range_upper, o.exposure);
        }
    }
    if (models.toxicity.uninformative) diagnostics.push_back("toxicity data carry no events; ceiling dropped");
    if (models.efficacy.negative_slope) diagnostics.push_back("efficacy slope is negative");
    if (models.toxicity.negative_slope && !models.toxicity.uninformative) diagnostics.push_back("toxicity slope is negative");

    const WindowResult wr = derive_exposure_window(models.efficacy, models.toxicity, search);
    json p{{"exposure_units", cal.exposure_units},
           {"efficacy_fit", fit_json(models.efficacy.fit)},
           {"toxicity_fit", fit_json(models.toxicity.fit)},
           {"ceiling_dropped", wr.ceiling_dropped},
           {"dose_exposure", {{"log_intercept", de.log_intercept}, {"log_slope", de.log_slope}, {"residual_sd", de.residual_sd}}},
           {"mtd", cal.mtd_or_mad},
           {"exposure_range", {search.range_lower, search.range_upper}}};
    if (!wr.window) {
        p["window"] = nullptr;
        p["infeasibility"] = wr.infeasibility;
        p["rdes"] = nullptr;
        diagnostics.push_back("exposure window infeasible: " + wr.infeasibility);
        return p;
    }
    p["window"] = {{"lower_exposure", wr.window->lower_exposure}, {"upper_exposure", wr.window->upper_exposure},
                   {"efficacy_floor", wr.window->efficacy_floor}, {"toxicity_ceiling", wr.window->toxicity_ceiling}};
    const RdeSet set = propose_rdes(*wr.window, de, cal.mtd_or_mad, cal.rde);
    json rdes = json::array();
    for (std::size_t i = 0; i < set.doses.size(); ++i)
        rdes.push_back({{"dose", set.doses[i]}, {"role", to_string(set.roles[i])}});
    p["rdes"] = rdes;
    if (!set.note.empty()) {
        p["note"] = set.note;
        diagnostics.push_back(set.note);
    }
    return p;
}

json oc_json(const OperatingCharacteristics& oc)
{
    json levels = json::array();
    for (const auto& l : oc.levels)
        levels.push_back({{"ci_level", l.ci_level},
                          {"dose_mean", l.dose_mean},
                          {"dose_median", l.dose_median},
                          {"dose_sd", l.dose_sd},
                          {"rr_mean", l.rr_mean},
                          {"rr_median", l.rr_median},
                          {"rr_sd", l.rr_sd},
                          {"pct_rr_below_70", l.pct_rr_below_70}});
    return {{"scheme", oc.scheme}, {"p_select", oc.p_select}, {"fallback_rate", oc.fallback_rate}, {"levels", levels}};
}

void write_replicate_dump(const std::string& path, const std::vector<OperatingCharacteristics>& table,
                          const std::vector<double>& levels)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "scheme,replicate,sensitive_index,fallback,ci_level,chosen_dose,relative_rr\n";
    for (const auto& oc : table)
        for (const auto& rec : oc.records)
            for (std::size_t l = 0; l < levels.size(); ++l)
                out << oc.scheme << ',' << rec.replicate << ',' << rec.sensitive_index << ',' << (rec.fallback ? 1 : 0)
                    << ',' << prob_text(levels[l]) << ',' << fixed(rec.chosen_doses[l], 3) << ','
                    << fixed(rec.relative_rr[l], 3) << '\n';
}

json optimization_payload(const RunConfig& cfg, std::uint64_t seed, std::vector<std::string>& diagnostics)
{
    const auto& o = cfg.optimization;
    SimulationOptions opts;
    opts.threads = o.threads;
    opts.keep_records = !o.replicate_dump.empty();
    const auto table = compare_schemes(o.schemes, o.truth, o.replicates, seed, o.ci_levels, opts);
    if (!o.replicate_dump.empty()) write_replicate_dump(o.replicate_dump, table, o.ci_levels);
    json schemes = json::array();
    for (const auto& oc : table) {
        schemes.push_back(oc_json(oc));
        if (oc.fallback_rate > 0.0)
            diagnostics.push_back(oc.scheme + ": fit fallback in " + pct_text(100.0 * oc.fallback_rate) + "% of replicates");
    }
    return {{"replicates", o.replicates}, {"ci_levels", o.ci_levels}, {"schemes", schemes}};
}

// ---- human-readable and CSV emitters ----

std::string pad(const std::string& s, std::size_t width)
{
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string number_or_none(const json& v, int decimals)
{
    return v.is_null() ? std::string("none") : fixed(v.get<double>(), decimals);
}

void emit_header(std::ostringstream& out, const ResultBundle& b, bool with_timestamp)
{
    out << "# doseopt " << b.metadata.tool_version << " " << b.kind << " config_digest=" << b.metadata.config_digest;
    if (b.metadata.seed) out << " seed=" << *b.metadata.seed;
    if (with_timestamp && !b.metadata.timestamp.empty()) out << " timestamp=" << b.metadata.timestamp;
    out << '\n';
}

void emit_table(std::ostringstream& out, const ResultBundle& b)
{
    const json& p = b.payload;
    if (b.kind == "escalation-decision") {
        const json& s1 = p["stage1"];
        out << "Current dose: " << dose_text(p["current_dose"].get<double>()) << " mg (index " << p["current_dose_index"] << ")\n";
        out << "Stage 1 (interval): " << s1["decision"].get<std::string>() << "  [UPM under " << fixed(s1["upm_under"], 4)
            << ", target " << fixed(s1["upm_target"], 4) << ", over " << fixed(s1["upm_over"], 4) << "; P(overdose) "
            << fixed(s1["prob_over"], 4) << " vs gamma " << prob_text(s1["gamma"]) << "]\n";
        const json& s2 = p["stage2"];
        out << "Stage 2 (model):    " << s2["decision"].get<std::string>() << "  [rate here "
            << fixed(s2["rate_current"], 4) << ", next " << number_or_none(s2["rate_next"], 4)
            << (s2["model_used"].get<bool>() ? "" : ", posterior-mean fallback") << "]\n";
        out << "Stage 3 (combined): " << p["stage3"]["decision"].get<std::string>() << '\n';
        const json& next = p["next"];
        if (next["trial_complete"].get<bool>()) out << "Next: trial complete\n";
        else out << "Next dose: " << dose_text(next["dose"].get<double>()) << " mg (index " << next["dose_index"] << ")\n";
    } else if (b.kind == "decision-table") {
        out << "Stage-1 decision table (rows: treated n, columns: DLT count x)\n";
        for (const auto& row : p["rows"]) {
            out << "n=" << pad(std::to_string(row["n"].get<int>()), 2) << ":";
            for (const auto& d : row["decisions"]) {
                const std::string s = d.get<std::string>();
                const char* code = s == "Escalate" ? "E" : s == "Stay" ? "S" : s == "DeEscalate" ? "D" : "DU";
                out << ' ' << pad(code, 2);
            }
            out << '\n';
        }
        out << "E=escalate S=stay D=de-escalate DU=de-escalate and exclude\n";
    } else if (b.kind == "mtd") {
        out << "   dose  treated  dlt  raw_rate  smoothed\n";
        for (const auto& d : p["doses"])
            out << pad(dose_text(d["dose"].get<double>()), 7) << pad(std::to_string(d["treated"].get<int>()), 9)
                << pad(std::to_string(d["dlt"].get<int>()), 5) << pad(number_or_none(d["raw_rate"], 4), 10)
                << pad(number_or_none(d["smoothed_rate"], 4), 10) << '\n';
        out << "MTD: " << (p["mtd"].is_null() ? std::string("none identified") : dose_text(p["mtd"].get<double>()) + " mg") << '\n';
    } else if (b.kind == "escalation-simulation") {
        out << "Trials: " << p["trials"] << '\n';
        out << "   dose  true_tox  selected%  mean_treated\n";
        for (const auto& d : p["doses"])
            out << pad(dose_text(d["dose"].get<double>()), 7) << pad(prob_text(d["true_tox"].get<double>()), 10)
                << pad(pct_text(d["selected_pct"].get<double>()), 11) << pad(fixed(d["mean_treated"].get<double>(), 2), 14) << '\n';
        out << "No MTD: " << pct_text(p["no_mtd_pct"].get<double>()) << "%\n";
        out << "Mean fraction treated above true MTD: " << fixed(p["mean_overdose_fraction"].get<double>(), 4) << '\n';
        if (p.contains("path")) {
            out << "Path:\n";
            for (const auto& s : p["path"])
                out << "  " << dose_text(s["dose"].get<double>()) << " mg: " << s["dlt"] << "/" << s["treated"] << " -> "
                    << s["decision"].get<std::string>() << '\n';
            out << "MTD: " << (p["mtd"].is_null() ? std::string("none") : dose_text(p["mtd"].get<double>()) + " mg") << '\n';
        }
    } else if (b.kind == "rde-calibration") {
        if (p["window"].is_null()) {
            out << "Exposure window: infeasible (" << p["infeasibility"].get<std::string>() << ")\n";
        } else {
            out << "Exposure window: [" << fixed(p["window"]["lower_exposure"].get<double>(), 3) << ", "
                << fixed(p["window"]["upper_exposure"].get<double>(), 3) << "] " << p["exposure_units"].get<std::string>() << '\n';
            out << "RDEs:\n";
            for (const auto& r : p["rdes"])
                out << "  " << pad(dose_text(r["dose"].get<double>()), 7) << " mg  " << r["role"].get<std::string>() << '\n';
        }
    } else if (b.kind == "operating-characteristics") {
        out << "Scheme    P(select)  CI    Dose mean  median     SD  RR mean  median     SD  %(RR<70)\n";
        for (const auto& s : p["schemes"]) {
            bool first = true;
            for (const auto& l : s["levels"]) {
                const std::string name = first ? s["scheme"].get<std::string>() : "";
                const std::string psel = first ? prob_text(s["p_select"].get<double>()) : "";
                out << name << std::string(name.size() < 10 ? 10 - name.size() : 1, ' ') << pad(psel, 9)
                    << pad(fixed(100.0 * l["ci_level"].get<double>(), 0) + "%", 5) << pad(dose_text(l["dose_mean"]), 11)
                    << pad(dose_text(l["dose_median"]), 8) << pad(dose_text(l["dose_sd"]), 7)
                    << pad(pct_text(l["rr_mean"]), 9) << pad(pct_text(l["rr_median"]), 8)
                    << pad(pct_text(l["rr_sd"]), 7) << pad(pct_text(l["pct_rr_below_70"]), 10) << '\n';
                first = false;
            }
        }
    } else {
        out << p.dump(2) << '\n';
    }
}

void emit_csv(std::ostringstream& out, const ResultBundle& b)
{
    const json& p = b.payload;
    if (b.kind == "operating-characteristics") {
        out << "scheme,p_select,ci_level,dose_mean,dose_median,dose_sd,rr_mean,rr_median,rr_sd,pct_rr_below_70,fallback_rate\n";
        for (const auto& s : p["schemes"])
            for (const auto& l : s["levels"])
                out << s["scheme"].get<std::string>() << ',' << prob_text(s["p_select"]) << ','
                    << prob_text(l["ci_level"]) << ',' << dose_text(l["dose_mean"]) << ',' << dose_text(l["dose_median"])
                    << ',' << dose_text(l["dose_sd"]) << ',' << pct_text(l["rr_mean"]) << ','
                    << pct_text(l["rr_median"]) << ',' << pct_text(l["rr_sd"]) << ','
                    << pct_text(l["pct_rr_below_70"]) << ',' << prob_text(s["fallback_rate"]) << '\n';
    } else if (b.kind == "escalation-simulation") {
        out << "dose,true_tox,selected_pct,mean_treated\n";
        for (const auto& d : p["doses"])
            out << dose_text(d["dose"]) << ',' << prob_text(d["true_tox"]) << ',' << pct_text(d["selected_pct"]) << ','
                << fixed(d["mean_treated"].get<double>(), 2) << '\n';
        out << "none,," << pct_text(p["no_mtd_pct"]) << ",\n";
    } else if (b.kind == "decision-table") {
        out << "n,x,decision\n";
        for (const auto& row : p["rows"]) {
            int x = 0;
            for (const auto& d : row["decisions"]) out << row["n"] << ',' << x++ << ',' << d.get<std::string>() << '\n';
        }
    } else if (b.kind == "mtd") {
        out << "dose,treated,dlt,raw_rate,smoothed_rate,selected\n";
        for (const auto& d : p["doses"])
            out << dose_text(d["dose"]) << ',' << d["treated"] << ',' << d["dlt"] << ','
                << (d["raw_rate"].is_null() ? std::string() : fixed(d["raw_rate"].get<double>(), 4)) << ','
                << (d["smoothed_rate"].is_null() ? std::string() : fixed(d["smoothed_rate"].get<double>(), 4)) << ','
                << (d["selected"].get<bool>() ? 1 : 0) << '\n';
    } else if (b.kind == "rde-calibration") {
        out << "dose,role\n";
        if (p["rdes"].is_array())
            for (const auto& r : p["rdes"]) out << dose_text(r["dose"]) << ',' << r["role"].get<std::string>() << '\n';
    } else if (b.kind == "escalation-decision") {
        out << "stage,decision,upm_under,upm_target,upm_over,prob_over,rate_current,rate_next\n";
        const json& s1 = p["stage1"];
        const json& s2 = p["stage2"];
        out << "1," << s1["decision"].get<std::string>() << ',' << fixed(s1["upm_under"], 6) << ','
            << fixed(s1["upm_target"], 6) << ',' << fixed(s1["upm_over"], 6) << ',' << fixed(s1["prob_over"], 6) << ",,\n";
        out << "2," << s2["decision"].get<std::string>() << ",,,,," << fixed(s2["rate_current"], 6) << ','
            << (s2["rate_next"].is_null() ? std::string() : fixed(s2["rate_next"].get<double>(), 6)) << '\n';
        out << "3," << p["stage3"]["decision"].get<std::string>() << ",,,,,,\n";
    } else {
        throw ArgumentError("no CSV layout for result kind '" + b.kind + "'");
    }
}

} // namespace

std::string current_timestamp()
{
    std::time_t t;
    if (const char* fixed_epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(fixed_epoch, nullptr, 10));
    else
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json decision_payload(const EscalationConfig& config, const TrialHistory& history)
{
    const HybridDecision h = hybrid_decision(history, config);
    const NextDose next = next_dose(history, h.combined, config);
    const auto& s1 = h.stage1;
    json stage2{{"decision", to_string(h.stage2.decision)},
                {"model_used", h.stage2.model_used},
                {"slope_constrained", h.stage2.slope_constrained},
                {"rate_current", h.stage2.rate_current},
                {"rate_next", optional_number(h.stage2.rate_next)},
                {"fit", h.stage2.fit ? fit_json(*h.stage2.fit) : json(nullptr)}};
    json excluded = json::array();
    for (std::size_t i = 0; i < next.history.outcomes.size(); ++i)
        if (next.history.outcomes[i].excluded) excluded.push_back(i);
    return {{"current_dose_index", history.current_dose_index},
            {"current_dose", history.outcomes[history.current_dose_index].dose},
            {"stage1",
             {{"decision", to_string(s1.decision)},
              {"base_decision", to_string(s1.base)},
              {"posterior", {{"alpha", s1.posterior.alpha}, {"beta", s1.posterior.beta}}},
              {"prob_under", s1.prob_under},
              {"prob_target", s1.prob_target},
              {"prob_over", s1.prob_over},
              {"upm_under", s1.upm_under},
              {"upm_target", s1.upm_target},
              {"upm_over", s1.upm_over},
              {"gamma", config.gamma},
              {"overdose_control", config.overdose_control},
              {"interval", {config.lower_bound(), config.upper_bound()}}}},
            {"stage2", stage2},
            {"stage3", {{"decision", to_string(h.combined)}}},
            {"next",
             {{"trial_complete", !next.dose_index.has_value()},
              {"dose_index", next.dose_index ? json(*next.dose_index) : json(nullptr)},
              {"dose", next.dose_index ? json(next.history.outcomes[*next.dose_index].dose) : json(nullptr)},
              {"excluded_indices", excluded}}}};
}

json decision_table_payload(const EscalationConfig& config, std::uint32_t n_max)
{
    const DecisionTable table = decision_table(config, n_max);
    json rows = json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
        json cells = json::array();
        for (Decision d : table[i]) cells.push_back(to_string(d));
        rows.push_back({{"n", i + 1}, {"decisions", cells}});
    }
    return {{"stage", "stage1"}, {"n_max", n_max}, {"rows", rows}};
}

json mtd_payload(const EscalationConfig& config, const TrialHistory& history)
{
    const MtdSelection sel = select_mtd(history, config);
    json doses = json::array();
    for (std::size_t i = 0; i < history.outcomes.size(); ++i) {
        const auto& o = history.outcomes[i];
        json row{{"dose", o.dose}, {"treated", o.treated}, {"dlt", o.dlt_count}, {"excluded", o.excluded},
                 {"raw_rate", nullptr}, {"smoothed_rate", nullptr}, {"selected", sel.dose_index == i}};
        for (std::size_t k = 0; k < sel.evaluated_indices.size(); ++k)
            if (sel.evaluated_indices[k] == i) {
                row["raw_rate"] = sel.raw_rates[k];
                row["smoothed_rate"] = sel.smoothed_rates[k];
            }
        doses.push_back(row);
    }
    return {{"mtd", optional_number(sel.dose)},
            {"mtd_index", sel.dose_index ? json(*sel.dose_index) : json(nullptr)},
            {"target_dlt_rate", config.target_dlt_rate},
            {"doses", doses}};
}

ResultBundle execute(const RunConfig& cfg)
{
    ResultBundle b;
    b.metadata = {std::string(tool_version), config_digest(cfg), cfg.seed, current_timestamp()};
    const auto need_seed = [&] {
        if (!cfg.seed) throw ConfigError("seed", "a seed is required for simulation steps");
        return *cfg.seed;
    };
    switch (cfg.step) {
    case Step::EscalateDecide:
        b.kind = "escalation-decision";
        b.payload = decision_payload(cfg.escalation, *cfg.history);
        break;
    case Step::EscalateTable:
        b.kind = "decision-table";
        b.payload = decision_table_payload(cfg.escalation, cfg.table_n_max);
        break;
    case Step::EscalateSimulate:
        b.kind = "escalation-simulation";
        b.payload = escalation_simulation_payload(cfg, need_seed());
        break;
    case Step::RdeCalibrate:
        b.kind = "rde-calibration";
        b.payload = calibration_payload(cfg.calibration, b.diagnostics);
        break;
    case Step::OptimizeSimulate:
        b.kind = "operating-characteristics";
        b.payload = optimization_payload(cfg, need_seed(), b.diagnostics);
        break;
    case Step::Serve:
        throw ArgumentError("the serve step runs a service, not a batch computation");
    }
    return b;
}

OutputFormat format_from_string(std::string_view text)
{
    if (text == "table") return OutputFormat::Table;
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json") return OutputFormat::Json;
    throw ConfigError("format", "expected table, csv or json");
}

json to_json(const ResultBundle& b)
{
    json meta{{"tool_version", b.metadata.tool_version},
              {"config_digest", b.metadata.config_digest},
              {"seed", b.metadata.seed ? json(*b.metadata.seed) : json(nullptr)},
              {"timestamp", b.metadata.timestamp}};
    json j{{"metadata", meta}, {"kind", b.kind}, {"payload", b.payload}};
    if (!b.diagnostics.empty()) j["diagnostics"] = b.diagnostics;
    return j;
}

ResultBundle bundle_from_json(const json& node)
{
    try {
        ResultBundle b;
        const json& m = node.at("metadata");
        b.metadata.tool_version = m.at("tool_version").get<std::string>();
        b.metadata.config_digest = m.at("config_digest").get<std::string>();
        if (!m.at("seed").is_null()) b.metadata.seed = m.at("seed").get<std::uint64_t>();
        b.metadata.timestamp = m.at("timestamp").get<std::string>();
        b.kind = node.at("kind").get<std::string>();
        b.payload = node.at("payload");
        if (node.contains("diagnostics")) b.diagnostics = node.at("diagnostics").get<std::vector<std::string>>();
        return b;
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("malformed result bundle: ") + e.what());
    }
}

std::string emit_results(const ResultBundle& bundle, OutputFormat format)
{
    std::ostringstream out;
    switch (format) {
    case OutputFormat::Json:
        out << to_json(bundle).dump(2) << '\n';
        break;
    case OutputFormat::Csv:
        emit_header(out, bundle, false);
        emit_csv(out, bundle);
        break;
    case OutputFormat::Table:
        emit_header(out, bundle, true);
        emit_table(out, bundle);
        if (!bundle.diagnostics.empty()) {
            out << "Diagnostics:\n";
            for (const auto& d : bundle.diagnostics) out << "  - " << d << '\n';
        }
        break;
    }
    return out.str();
}

} // namespace doseopt
