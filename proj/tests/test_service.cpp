#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "doseopt/doseopt.h"
#include "doseopt/errors.hpp"
#include "doseopt/service.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace doseopt;
using nlohmann::json;

namespace {

std::string error_key(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<accepted>";
}

const char* decide_text = R"({
  "step": "escalate-decide",
  "escalation": {"target_dlt_rate": 0.3, "doses": [100, 200, 300]},
  "history": {"outcomes": [{"dose": 100, "treated": 3, "dlt": 0}, {"dose": 200, "treated": 0, "dlt": 0},
                           {"dose": 300, "treated": 0, "dlt": 0}],
              "current_dose_index": 0, "total_treated": 3}
})";

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("config defaults are filled in")
{
    const RunConfig c = parse_config(decide_text);
    CHECK(c.step == Step::EscalateDecide);
    CHECK(c.escalation.epsilon1 == 0.05);
    CHECK(c.escalation.epsilon2 == 0.05);
    CHECK(c.escalation.gamma == 0.75);
    REQUIRE(c.history);
    CHECK(c.history->outcomes[0].treated == 3u);
    const json canon = canonical_config(c);
    CHECK(canon["escalation"]["gamma"] == 0.75);
    CHECK(config_digest(c).size() == 16);
}

TEST_CASE("config errors name the key")
{
    CHECK(error_key(R"({"step": "escalate-table", "escalation": {"target_dlt_rate": 0.3, "gama": 0.8}})") ==
          "escalation.gama");
    CHECK(error_key(R"({"step": "escalate-table", "escalation": {}})") == "escalation.target_dlt_rate");
    CHECK(error_key(R"({"step": "launch"})") == "step");
    CHECK(error_key(R"({"step": "escalate-table", "escalation": {"target_dlt_rate": 0.3}, "serve": {}})") ==
          "serve");
    const std::string ld = R"({"step": "optimize-simulate", "optimization": {"schemes": [
        {"high_dose": 500, "low_doses": [250, 300, 350, 400, 500]}]}})";
    CHECK(error_key(ld) == "optimization.schemes[0]");
    try {
        parse_config(ld);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("LD < HD") != std::string::npos);
    }
    CHECK(error_key("{not json") == "");
}

TEST_CASE("scheme blocks build fractional and full designs")
{
    const RunConfig c = parse_config(R"({"step": "optimize-simulate", "seed": 1, "optimization": {"schemes": [
        {"name": "Scheme 3", "high_dose": 500, "low_doses": [450, 300, 250, 350, 400], "n_per_arm": 30},
        {"name": "Scheme 5", "variant": "full", "high_dose": 500, "cohorts": 5,
         "dose_grid": [250, 300, 350, 400, 450, 500], "n_per_arm": 10}]}})");
    REQUIRE(c.optimization.schemes.size() == 2);
    const auto& s3 = c.optimization.schemes[0].design;
    CHECK(s3.low_doses == std::vector<double>{450, 300, 250, 350, 400});
    CHECK(s3.total_sample_size() == 300);
    CHECK(c.optimization.schemes[1].design.total_sample_size() == 300);
    CHECK(c.optimization.replicates == 10000);
}

TEST_CASE("simulation steps require a seed")
{
    RunConfig c = parse_config(R"({"step": "optimize-simulate", "optimization": {"schemes": "reference",
        "replicates": 10}})");
    CHECK_THROWS_AS(execute(c), ConfigError);
    c.seed = 3;
    CHECK_NOTHROW(execute(c));
}

TEST_CASE("operating characteristics CSV layout")
{
    RunConfig c = parse_config(R"({"step": "optimize-simulate", "seed": 5, "optimization": {"schemes": "reference",
        "replicates": 200}})");
    const ResultBundle b = execute(c);
    const auto csv = lines(emit_results(b, OutputFormat::Csv));
    REQUIRE(csv.size() == 2 + 15);
    CHECK(csv[0].rfind("# doseopt ", 0) == 0);
    CHECK(csv[1] == "scheme,p_select,ci_level,dose_mean,dose_median,dose_sd,rr_mean,rr_median,rr_sd,"
                    "pct_rr_below_70,fallback_rate");
    CHECK(csv[2].rfind("Scheme 1,", 0) == 0);
    CHECK(csv[16].rfind("Scheme 5,", 0) == 0);

    const std::string table = emit_results(b, OutputFormat::Table);
    CHECK(table.find("Diagnostics") == std::string::npos);
}

TEST_CASE("bundle survives a JSON round trip")
{
    const ResultBundle b = execute(parse_config(decide_text));
    CHECK(bundle_from_json(to_json(b)) == b);
    CHECK(bundle_from_json(json::parse(emit_results(b, OutputFormat::Json))) == b);
}

TEST_CASE("decision endpoint echoes the engine")
{
    const std::string body = R"({"escalation": {"target_dlt_rate": 0.3, "doses": [100, 200, 300]},
        "history": {"outcomes": [{"dose": 100, "treated": 3, "dlt": 0}, {"dose": 200, "treated": 0, "dlt": 0},
                                 {"dose": 300, "treated": 0, "dlt": 0}],
                    "current_dose_index": 0, "total_treated": 3}})";
    const HttpResponse r = handle_api("POST", "/api/v1/decision", body);
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    const json& s1 = j["payload"]["stage1"];
    CHECK(s1["decision"] == "Escalate");
    CHECK(s1["upm_under"].get<double>() == doctest::Approx(oracle::beta_mass(1, 4, 0, 0.25) / 0.25).epsilon(1e-10));
    CHECK(s1["upm_target"].get<double>() ==
          doctest::Approx(oracle::beta_mass(1, 4, 0.25, 0.35) / 0.1).epsilon(1e-10));
    CHECK(s1["upm_over"].get<double>() == doctest::Approx(oracle::beta_mass(1, 4, 0.35, 1) / 0.65).epsilon(1e-10));
    CHECK(j["metadata"]["config_digest"].get<std::string>().size() == 16);
}

TEST_CASE("decision-table endpoint")
{
    const HttpResponse r =
        handle_api("POST", "/api/v1/decision-table", R"({"escalation": {"target_dlt_rate": 0.3}, "n_max": 12})");
    REQUIRE(r.status == 200);
    const json rows = json::parse(r.body)["payload"]["rows"];
    REQUIRE(rows.size() == 12);
    for (std::size_t n = 1; n <= 12; ++n) CHECK(rows[n - 1]["decisions"].size() == n + 1);
    CHECK(rows[2]["decisions"][0] == "Escalate");
}

TEST_CASE("mtd endpoint returns an explicit none")
{
    const std::string body = R"({"escalation": {"target_dlt_rate": 0.3, "doses": [100, 200]},
        "history": {"outcomes": [{"dose": 100, "treated": 3, "dlt": 3, "excluded": true},
                                 {"dose": 200, "treated": 0, "dlt": 0, "excluded": true}],
                    "current_dose_index": 0, "total_treated": 3}})";
    const HttpResponse r = handle_api("POST", "/api/v1/mtd", body);
    REQUIRE(r.status == 200);
    CHECK(json::parse(r.body)["payload"]["mtd"].is_null());
    const HttpResponse decide = handle_api("POST", "/api/v1/decision", body);
    CHECK(decide.status == 422);
}

TEST_CASE("service errors")
{
    CHECK(handle_api("GET", "/api/v1/health", "").status == 200);
    CHECK(handle_api("GET", "/api/v1/nothing", "").status == 404);
    CHECK(handle_api("GET", "/api/v1/decision", "").status == 405);
    CHECK(handle_api("POST", "/api/v1/health", "").status == 405);
    const HttpResponse bad = handle_api("POST", "/api/v1/decision-table", "{\"escalation\": {\"target_dlt_rate\": 2}}");
    CHECK(bad.status == 400);
    CHECK(json::parse(bad.body)["error"]["message"].get<std::string>().size() > 0);
    const HttpResponse junk = handle_api("POST", "/api/v1/decision", "[1,");
    CHECK(junk.status == 400);
    const HttpResponse extra =
        handle_api("POST", "/api/v1/decision-table", R"({"escalation": {"target_dlt_rate": 0.3}, "x": 1})");
    CHECK(extra.status == 400);
    CHECK(json::parse(extra.body)["error"]["key"] == "x");
}

TEST_CASE("C interface")
{
    doseopt_session* s = nullptr;
    REQUIRE(doseopt_session_create(&s) == DOSEOPT_OK);
    CHECK(doseopt_run(s, DOSEOPT_FORMAT_JSON, nullptr, nullptr) == DOSEOPT_ERR_ARGUMENT);

    CHECK(doseopt_load_config(s, "{\"step\": \"escalate-table\", \"escalation\": {}}", nullptr, nullptr) ==
          DOSEOPT_ERR_CONFIG);
    CHECK(std::string(doseopt_last_error_key(s)) == "escalation.target_dlt_rate");
    CHECK(doseopt_load_config(s, decide_text, nullptr, "escalate-table") == DOSEOPT_ERR_CONFIG);
    CHECK(std::string(doseopt_last_error_key(s)) == "step");

    REQUIRE(doseopt_load_config(s, decide_text, nullptr, "escalate-decide") == DOSEOPT_OK);
    const char* out = nullptr;
    size_t len = 0;
    REQUIRE(doseopt_run(s, DOSEOPT_FORMAT_JSON, &out, &len) == DOSEOPT_OK);
    CHECK(json::parse(std::string(out, len))["payload"]["stage1"]["decision"] == "Escalate");
    CHECK(std::string(doseopt_last_error(s)).empty());

    int status = 0;
    REQUIRE(doseopt_handle_request(s, "GET", "/api/v1/health", nullptr, 0, &status, &out, &len) == DOSEOPT_OK);
    CHECK(status == 200);

    double p = 0;
    CHECK(doseopt_beta_interval_prob(1, 2, 0, 0.5, &p) == DOSEOPT_OK);
    CHECK(p == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(doseopt_beta_interval_prob(1, 2, 0.6, 0.5, &p) == DOSEOPT_ERR_ARGUMENT);
    doseopt_decision d;
    CHECK(doseopt_stage1_decision(3, 3, 0.3, 0.05, 0.05, 0.75, &d) == DOSEOPT_OK);
    CHECK(d == DOSEOPT_DEESCALATE_EXCLUDE);
    CHECK(doseopt_stage1_decision(0, 0, 0.3, 0.05, 0.05, 0.75, &d) == DOSEOPT_ERR_INSUFFICIENT_DATA);
    CHECK(std::string(doseopt_status_name(DOSEOPT_ERR_POLICY)) == "policy");
    doseopt_session_destroy(s);
}
