#include "doseopt/service.hpp"

#include "doseopt/errors.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace doseopt {

using nlohmann::json;

namespace {

// Tracks which keys of an object were consumed so leftovers can be rejected.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    const json& at(const std::string& key)
    {
        seen_.insert(key);
        if (!node_.contains(key)) throw ConfigError(key_path(key), "required key is missing");
        return node_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(key_path(key), "expected a finite number");
        return d;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number_unsigned()) throw ConfigError(key_path(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback)
    {
        return has(key) ? unsigned_integer(key) : fallback;
    }

    std::uint32_t count(const std::string& key, std::uint32_t fallback)
    {
        const std::uint64_t v = unsigned_integer(key, fallback);
        if (v > 0xffffffffULL) throw ConfigError(key_path(key), "value too large");
        return static_cast<std::uint32_t>(v);
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(key_path(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (const auto& [key, value] : node_.items())
            if (!seen_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

// Re-throws engine validation failures as configuration errors on `key`.
template <class F>
void check(const std::string& key, F&& f)
{
    try {
        f();
    } catch (const ArgumentError& e) {
        throw ConfigError(key, e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path;
    return base / path;
}

FactorialDesign parse_design(Reader& r, const std::string& path)
{
    const std::string variant = r.string("variant", "fractional");
    const double hd = r.number("high_dose");
    const std::uint32_t n = r.count("n_per_arm", 30);
    FactorialDesign d;
    check(path, [&] {
        if (variant == "fractional") {
            const auto lds = r.numbers("low_doses");
            d = build_design(lds.size(), hd, lds, n);
        } else if (variant == "full") {
            const auto grid = r.numbers("dose_grid");
            const std::uint64_t k = r.unsigned_integer("cohorts");
            d = build_full_design(k, grid, hd, n);
        } else {
            throw ConfigError(r.key_path("variant"), "expected 'fractional' or 'full'");
        }
    });
    return d;
}

json curve_json(const LogisticCurve& c)
{
    return {{"intercept", c.intercept}, {"slope", c.slope}};
}

} // namespace

std::string_view to_string(Step step)
{
    switch (step) {
    case Step::EscalateDecide: return "escalate-decide";
    case Step::EscalateTable: return "escalate-table";
    case Step::EscalateSimulate: return "escalate-simulate";
    case Step::RdeCalibrate: return "rde-calibrate";
    case Step::OptimizeSimulate: return "optimize-simulate";
    case Step::Serve: return "serve";
    }
    return "?";
}

Step step_from_string(std::string_view text)
{
    for (auto s : {Step::EscalateDecide, Step::EscalateTable, Step::EscalateSimulate, Step::RdeCalibrate,
                   Step::OptimizeSimulate, Step::Serve})
        if (to_string(s) == text) return s;
    throw ConfigError("step", "unknown step '" + std::string(text) + "'");
}

EscalationConfig parse_escalation_config(const json& node, const std::string& path)
{
    Reader r(node, path);
    EscalationConfig c;
    c.target_dlt_rate = r.number("target_dlt_rate");
    c.epsilon1 = r.number("epsilon1", 0.05);
    c.epsilon2 = r.number("epsilon2", 0.05);
    c.gamma = r.number("gamma", 0.75);
    c.exclusion_threshold = r.number("exclusion_threshold", 0.95);
    c.overdose_control = r.boolean("overdose_control", true);
    if (r.has("prior")) {
        Reader p(r.at("prior"), r.key_path("prior"));
        c.prior = {p.number("alpha"), p.number("beta")};
        p.finish();
    }
    if (r.has("doses")) c.provisional_doses = r.numbers("doses");
    c.cohort_size = r.count("cohort_size", 3);
    c.max_subjects = r.count("max_subjects", 30);
    c.min_subjects_for_mtd = r.count("min_subjects_for_mtd", 0);
    r.finish();

    const auto fail = [&](const std::string& key, const std::string& what) {
        throw ConfigError(path + "." + key, what);
    };
    if (!(c.target_dlt_rate > 0.0 && c.target_dlt_rate < 1.0)) fail("target_dlt_rate", "must lie in (0, 1)");
    if (!(c.lower_bound() > 0.0 && c.epsilon1 > 0.0))
        fail("epsilon1", "requires 0 < target_dlt_rate - epsilon1 < target_dlt_rate (delta1 < p_T)");
    if (!(c.upper_bound() < 1.0 && c.epsilon2 > 0.0))
        fail("epsilon2", "requires target_dlt_rate < target_dlt_rate + epsilon2 < 1 (p_T < delta2)");
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
    if (!(c.exclusion_threshold > 0.0 && c.exclusion_threshold <= 1.0)) fail("exclusion_threshold", "must lie in (0, 1]");
    if (!(c.prior.alpha > 0.0 && c.prior.beta > 0.0)) fail("prior", "shape parameters must be positive");
    for (std::size_t i = 0; i < c.provisional_doses.size(); ++i) {
        if (!(c.provisional_doses[i] > 0.0)) fail("doses", "doses must be positive");
        if (i > 0 && !(c.provisional_doses[i] > c.provisional_doses[i - 1]))
            fail("doses", "doses must be strictly increasing");
    }
    if (c.cohort_size == 0) fail("cohort_size", "must be positive");
    if (c.max_subjects == 0) fail("max_subjects", "must be positive");
    check(path, [&] { validate(c); });
    return c;
}

TrialHistory parse_trial_history(const json& node, const EscalationConfig& config, const std::string& path)
{
    Reader r(node, path);
    TrialHistory h = TrialHistory::start(config);
    const json& outcomes = r.at("outcomes");
    if (!outcomes.is_array()) throw ConfigError(path + ".outcomes", "expected an array");
    if (outcomes.size() != config.provisional_doses.size())
        throw ConfigError(path + ".outcomes", "must list one entry per provisional dose");
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const std::string p = path + ".outcomes[" + std::to_string(i) + "]";
        Reader o(outcomes[i], p);
        auto& out = h.outcomes[i];
        if (o.has("dose") && o.number("dose") != out.dose)
            throw ConfigError(p + ".dose", "does not match the provisional dose list");
        out.treated = o.count("treated", 0);
        out.dlt_count = o.count("dlt", 0);
        out.excluded = o.boolean("excluded", false);
        o.finish();
        if (out.dlt_count > out.treated) throw ConfigError(p + ".dlt", "dlt must not exceed treated");
        h.total_treated += out.treated;
    }
    h.current_dose_index = r.unsigned_integer("current_dose_index", 0);
    if (r.has("total_treated") && r.unsigned_integer("total_treated") != h.total_treated)
        throw ConfigError(path + ".total_treated", "must equal the sum of treated");
    r.finish();
    check(path, [&] { validate(h, config); });
    return h;
}

std::vector<ExposureObservation> parse_exposure_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> header;
    std::vector<ExposureObservation> out;
    const auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
        }
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        auto cells = split(line);
        if (header.empty()) {
            header = cells;
            const std::set<std::string> known{"dose", "exposure", "eff_responders", "eff_total", "tox_events", "tox_total"};
            for (const auto& h : header)
                if (!known.count(h)) throw ConfigError("data", "unknown CSV column '" + h + "'");
            for (const char* req : {"dose", "exposure"})
                if (std::find(header.begin(), header.end(), req) == header.end())
                    throw ConfigError("data", std::string("missing CSV column '") + req + "'");
            continue;
        }
        if (cells.size() != header.size())
            throw ConfigError("data", "line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(header.size()) + " cells");
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
        const auto num = [&](const std::string& col) -> std::optional<double> {
            auto it = row.find(col);
            if (it == row.end() || it->second.empty()) return std::nullopt;
            try {
                std::size_t used = 0;
                const double v = std::stod(it->second, &used);
                if (used != it->second.size()) throw std::invalid_argument(col);
                return v;
            } catch (const std::exception&) {
                throw ConfigError("data", "line " + std::to_string(line_no) + ": column '" + col + "' is not numeric");
            }
        };
        const auto counts = [&](const char* a, const char* b) -> std::optional<CountPair> {
            const auto x = num(a);
            const auto n = num(b);
            if (!x && !n) return std::nullopt;
            if (!x || !n || *x < 0 || *n < 1 || *x > *n || std::floor(*x) != *x || std::floor(*n) != *n)
                throw ConfigError("data", "line " + std::to_string(line_no) + ": invalid counts in '" + a + "'/'" + b + "'");
            return CountPair{static_cast<std::uint64_t>(*x), static_cast<std::uint64_t>(*n)};
        };
        ExposureObservation o;
        const auto dose = num("dose");
        const auto exposure = num("exposure");
        if (!dose || !(*dose > 0.0) || !exposure || !(*exposure > 0.0))
            throw ConfigError("data", "line " + std::to_string(line_no) + ": dose and exposure must be positive");
        o.dose = *dose;
        o.exposure = *exposure;
        o.efficacy = counts("eff_responders", "eff_total");
        o.toxicity = counts("tox_events", "tox_total");
        out.push_back(o);
    }
    if (header.empty()) throw ConfigError("data", "CSV has no header row");
    return out;
}

std::vector<ExposureObservation> read_exposure_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_exposure_csv(ss.str());
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed configuration document: ") + e.what());
    }
    Reader r(root, "");
    RunConfig cfg;
    cfg.step = step_from_string(r.string("step"));
    if (r.has("seed")) cfg.seed = r.unsigned_integer("seed");
    if (r.has("paths")) {
        Reader p(r.at("paths"), "paths");
        cfg.input_path = p.string("input", "");
        cfg.output_path = p.string("output", "");
        p.finish();
        if (!cfg.input_path.empty()) cfg.input_path = resolve(base_dir, cfg.input_path).string();
        if (!cfg.output_path.empty()) cfg.output_path = resolve(base_dir, cfg.output_path).string();
    }

    std::set<std::string> allowed;
    switch (cfg.step) {
    case Step::EscalateDecide: allowed = {"escalation", "history"}; break;
    case Step::EscalateTable: allowed = {"escalation", "table"}; break;
    case Step::EscalateSimulate: allowed = {"escalation", "simulation"}; break;
    case Step::RdeCalibrate: allowed = {"calibration"}; break;
    case Step::OptimizeSimulate: allowed = {"optimization"}; break;
    case Step::Serve: allowed = {"serve"}; break;
    }
    for (const char* block : {"escalation", "history", "table", "simulation", "calibration", "optimization", "serve"})
        if (root.contains(block) && !allowed.count(block))
            throw ConfigError(block, "block is not used by step '" + std::string(to_string(cfg.step)) + "'");

    if (allowed.count("escalation")) cfg.escalation = parse_escalation_config(r.at("escalation"));
    if (cfg.step != Step::EscalateTable && allowed.count("escalation") && cfg.escalation.provisional_doses.empty())
        throw ConfigError("escalation.doses", "required for this step");

    switch (cfg.step) {
    case Step::EscalateDecide:
        cfg.history = parse_trial_history(r.at("history"), cfg.escalation);
        break;
    case Step::EscalateTable:
        if (r.has("table")) {
            Reader t(r.at("table"), "table");
            cfg.table_n_max = t.count("n_max", 12);
            t.finish();
        }
        if (cfg.table_n_max == 0) throw ConfigError("table.n_max", "must be positive");
        break;
    case Step::EscalateSimulate: {
        Reader s(r.at("simulation"), "simulation");
        cfg.simulation.true_tox = s.numbers("true_tox");
        cfg.simulation.trials = s.count("trials", 1);
        s.finish();
        if (cfg.simulation.true_tox.size() != cfg.escalation.provisional_doses.size())
            throw ConfigError("simulation.true_tox", "must list one rate per provisional dose");
        for (double p : cfg.simulation.true_tox)
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("simulation.true_tox", "rates must lie in [0, 1]");
        if (cfg.simulation.trials == 0) throw ConfigError("simulation.trials", "must be positive");
        break;
    }
    case Step::RdeCalibrate: {
        Reader c(r.at("calibration"), "calibration");
        std::string data_path = c.string("data", "");
        if (data_path.empty()) data_path = cfg.input_path;
        else data_path = resolve(base_dir, data_path).string();
        if (data_path.empty()) throw ConfigError("calibration.data", "an exposure CSV path is required");
        cfg.input_path = data_path;
        cfg.calibration.exposure_units = c.string("exposure_units", "");
        cfg.calibration.efficacy_floor = c.number("efficacy_floor");
        cfg.calibration.toxicity_ceiling = c.number("toxicity_ceiling");
        cfg.calibration.level = c.number("level", 0.95);
        if (c.has("exposure_range")) {
            const auto range = c.numbers("exposure_range");
            if (range.size() != 2 || !(range[0] > 0.0 && range[0] < range[1]))
                throw ConfigError("calibration.exposure_range", "expected [lower, upper] with 0 < lower < upper");
            cfg.calibration.exposure_range = std::make_pair(range[0], range[1]);
        }
        cfg.calibration.mtd_or_mad = c.number("mtd");
        cfg.calibration.rde.count = c.count("count", 3);
        cfg.calibration.rde.granularity = c.number("granularity", 25.0);
        c.finish();
        const auto& cal = cfg.calibration;
        if (!(cal.efficacy_floor >= 0.0 && cal.efficacy_floor < 1.0))
            throw ConfigError("calibration.efficacy_floor", "must lie in [0, 1)");
        if (!(cal.toxicity_ceiling > 0.0 && cal.toxicity_ceiling <= 1.0))
            throw ConfigError("calibration.toxicity_ceiling", "must lie in (0, 1]");
        if (!(cal.level > 0.0 && cal.level < 1.0)) throw ConfigError("calibration.level", "must lie in (0, 1)");
        if (!(cal.mtd_or_mad > 0.0)) throw ConfigError("calibration.mtd", "must be positive");
        if (cal.rde.count < 3) throw ConfigError("calibration.count", "at least three RDEs are required");
        if (!(cal.rde.granularity > 0.0)) throw ConfigError("calibration.granularity", "must be positive");
        if (!std::filesystem::exists(data_path))
            throw ConfigError("calibration.data", "file does not exist: " + data_path);
        cfg.calibration.data = read_exposure_csv(data_path);
        break;
    }
    case Step::OptimizeSimulate: {
        Reader o(r.at("optimization"), "optimization");
        const json& schemes = o.at("schemes");
        if (schemes.is_string()) {
            if (schemes.get<std::string>() != "reference")
                throw ConfigError("optimization.schemes", "expected 'reference' or an array of schemes");
            cfg.optimization.schemes = reference_schemes();
        } else if (schemes.is_array() && !schemes.empty()) {
            for (std::size_t i = 0; i < schemes.size(); ++i) {
                const std::string p = "optimization.schemes[" + std::to_string(i) + "]";
                Reader s(schemes[i], p);
                NamedDesign nd;
                nd.name = s.string("name", "Scheme " + std::to_string(i + 1));
                nd.design = parse_design(s, p);
                s.finish();
                cfg.optimization.schemes.push_back(std::move(nd));
            }
        } else {
            throw ConfigError("optimization.schemes", "expected 'reference' or a nonempty array");
        }
        if (o.has("truth")) {
            const json& truth = o.at("truth");
            if (!truth.is_array()) throw ConfigError("optimization.truth", "expected an array of curves");
            for (std::size_t i = 0; i < truth.size(); ++i) {
                Reader t(truth[i], "optimization.truth[" + std::to_string(i) + "]");
                cfg.optimization.truth.curves.push_back(
                    {t.number("intercept"), t.number("slope"), CovariateTransform::Identity});
                t.finish();
            }
        } else {
            cfg.optimization.truth = default_truth();
        }
        cfg.optimization.replicates = o.unsigned_integer("replicates", 10000);
        if (o.has("ci_levels")) cfg.optimization.ci_levels = o.numbers("ci_levels");
        cfg.optimization.threads = static_cast<unsigned>(o.count("threads", 1));
        cfg.optimization.replicate_dump = o.string("replicate_dump", "");
        if (!cfg.optimization.replicate_dump.empty())
            cfg.optimization.replicate_dump = resolve(base_dir, cfg.optimization.replicate_dump).string();
        o.finish();
        if (cfg.optimization.replicates == 0) throw ConfigError("optimization.replicates", "must be positive");
        if (cfg.optimization.ci_levels.empty()) throw ConfigError("optimization.ci_levels", "must not be empty");
        for (double l : cfg.optimization.ci_levels)
            if (!(l > 0.0 && l < 1.0)) throw ConfigError("optimization.ci_levels", "levels must lie in (0, 1)");
        for (std::size_t i = 0; i < cfg.optimization.schemes.size(); ++i)
            check("optimization.truth", [&] { validate(cfg.optimization.truth, cfg.optimization.schemes[i].design); });
        break;
    }
    case Step::Serve: {
        if (r.has("serve")) {
            Reader s(r.at("serve"), "serve");
            cfg.serve.host = s.string("host", cfg.serve.host);
            const std::uint64_t port = s.unsigned_integer("port", static_cast<std::uint64_t>(cfg.serve.port));
            if (port > 65535) throw ConfigError("serve.port", "must lie in [0, 65535]");
            cfg.serve.port = static_cast<int>(port);
            s.finish();
        }
        break;
    }
    }
    r.finish();
    return cfg;
}

namespace {

json escalation_json(const EscalationConfig& c)
{
    return {{"target_dlt_rate", c.target_dlt_rate},
            {"epsilon1", c.epsilon1},
            {"epsilon2", c.epsilon2},
            {"gamma", c.gamma},
            {"exclusion_threshold", c.exclusion_threshold},
            {"overdose_control", c.overdose_control},
            {"prior", {{"alpha", c.prior.alpha}, {"beta", c.prior.beta}}},
            {"doses", c.provisional_doses},
            {"cohort_size", c.cohort_size},
            {"max_subjects", c.max_subjects},
            {"min_subjects_for_mtd", c.min_subjects_for_mtd}};
}

json history_json(const TrialHistory& h)
{
    json outcomes = json::array();
    for (const auto& o : h.outcomes)
        outcomes.push_back({{"dose", o.dose}, {"treated", o.treated}, {"dlt", o.dlt_count}, {"excluded", o.excluded}});
    return {{"outcomes", outcomes}, {"current_dose_index", h.current_dose_index}, {"total_treated", h.total_treated}};
}

json design_json(const NamedDesign& nd)
{
    const auto& d = nd.design;
    json j{{"name", nd.name}, {"high_dose", d.high_dose}, {"n_per_arm", d.n_per_arm}};
    if (d.variant == DesignVariant::Full) {
        j["variant"] = "full";
        j["dose_grid"] = d.full_dose_grid;
        j["cohorts"] = d.cohort_count;
    } else {
        j["variant"] = "fractional";
        j["low_doses"] = d.low_doses;
    }
    return j;
}

} // namespace

json canonical_config(const RunConfig& cfg)
{
    json j{{"step", std::string(to_string(cfg.step))}};
    if (cfg.seed) j["seed"] = *cfg.seed;
    switch (cfg.step) {
    case Step::EscalateDecide:
        j["escalation"] = escalation_json(cfg.escalation);
        if (cfg.history) j["history"] = history_json(*cfg.history);
        break;
    case Step::EscalateTable:
        j["escalation"] = escalation_json(cfg.escalation);
        j["table"] = {{"n_max", cfg.table_n_max}};
        break;
    case Step::EscalateSimulate:
        j["escalation"] = escalation_json(cfg.escalation);
        j["simulation"] = {{"true_tox", cfg.simulation.true_tox}, {"trials", cfg.simulation.trials}};
        break;
    case Step::RdeCalibrate: {
        const auto& c = cfg.calibration;
        json data = json::array();
        for (const auto& o : c.data) {
            json row{{"dose", o.dose}, {"exposure", o.exposure}};
            if (o.efficacy) row["efficacy"] = {o.efficacy->events, o.efficacy->total};
            if (o.toxicity) row["toxicity"] = {o.toxicity->events, o.toxicity->total};
            data.push_back(row);
        }
        j["calibration"] = {{"data", data},
                            {"exposure_units", c.exposure_units},
                            {"efficacy_floor", c.efficacy_floor},
                            {"toxicity_ceiling", c.toxicity_ceiling},
                            {"level", c.level},
                            {"mtd", c.mtd_or_mad},
                            {"count", c.rde.count},
                            {"granularity", c.rde.granularity}};
        if (c.exposure_range) j["calibration"]["exposure_range"] = {c.exposure_range->first, c.exposure_range->second};
        break;
    }
    case Step::OptimizeSimulate: {
        const auto& o = cfg.optimization;
        json schemes = json::array();
        for (const auto& s : o.schemes) schemes.push_back(design_json(s));
        json truth = json::array();
        for (const auto& c : o.truth.curves) truth.push_back(curve_json(c));
        j["optimization"] = {{"schemes", schemes},
                             {"truth", truth},
                             {"replicates", o.replicates},
                             {"ci_levels", o.ci_levels}};
        break;
    }
    case Step::Serve:
        j["serve"] = {{"host", cfg.serve.host}, {"port", cfg.serve.port}};
        break;
    }
    return j;
}

std::string digest_of(const json& canonical)
{
    // FNV-1a over the compact dump; nlohmann orders object keys, so the text is canonical.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_digest(const RunConfig& config) { return digest_of(canonical_config(config)); }

} // namespace doseopt
