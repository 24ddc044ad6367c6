#include "doseopt/service.hpp"

#include "doseopt/errors.hpp"

namespace doseopt {

using nlohmann::json;

namespace {

HttpResponse error_response(int status, const std::string& key, const std::string& message)
{
    json body{{"error", {{"status", status}, {"key", key}, {"message", message}}}};
    return {status, body.dump()};
}

HttpResponse bundle_response(const std::string& kind, const json& request_echo, json payload)
{
    ResultBundle b;
    b.metadata = {std::string(tool_version), digest_of(request_echo), std::nullopt, current_timestamp()};
    b.kind = kind;
    b.payload = std::move(payload);
    return {200, to_json(b).dump()};
}

void reject_unknown(const json& body, std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : body.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError(key, "unknown key");
    }
}

} // namespace

HttpResponse handle_api(std::string_view method, std::string_view path, std::string_view body)
{
    const bool is_health = path == "/api/v1/health";
    const bool is_post_route = path == "/api/v1/decision" || path == "/api/v1/decision-table" || path == "/api/v1/mtd";
    if (!is_health && !is_post_route) return error_response(404, "", "no such endpoint");
    if (is_health) {
        if (method != "GET") return error_response(405, "", "use GET");
        return {200, json{{"status", "ok"}, {"tool_version", tool_version}}.dump()};
    }
    if (method != "POST") return error_response(405, "", "use POST");

    try {
        json request;
        try {
            request = json::parse(body);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("malformed request body: ") + e.what());
        }
        if (!request.is_object()) throw ConfigError("", "request body must be an object");
        if (!request.contains("escalation")) throw ConfigError("escalation", "required key is missing");
        const EscalationConfig config = parse_escalation_config(request.at("escalation"));

        if (path == "/api/v1/decision-table") {
            reject_unknown(request, {"escalation", "n_max"});
            std::uint32_t n_max = 12;
            if (request.contains("n_max")) {
                const json& n = request.at("n_max");
                if (!n.is_number_unsigned() || n.get<std::uint64_t>() == 0 || n.get<std::uint64_t>() > 1000)
                    throw ConfigError("n_max", "expected an integer in [1, 1000]");
                n_max = n.get<std::uint32_t>();
            }
            return bundle_response("decision-table", request, decision_table_payload(config, n_max));
        }

        reject_unknown(request, {"escalation", "history"});
        if (config.provisional_doses.empty()) throw ConfigError("escalation.doses", "required for this endpoint");
        if (!request.contains("history")) throw ConfigError("history", "required key is missing");
        const TrialHistory history = parse_trial_history(request.at("history"), config);
        if (path == "/api/v1/decision") {
            if (history.outcomes[history.current_dose_index].treated == 0)
                throw ConfigError("history", "the current dose has no treated subjects");
            return bundle_response("escalation-decision", request, decision_payload(config, history));
        }
        return bundle_response("mtd", request, mtd_payload(config, history));
    } catch (const ConfigError& e) {
        return error_response(400, e.key(), e.what());
    } catch (const Error& e) {
        return error_response(422, "", e.what());
    }
}

} // namespace doseopt
