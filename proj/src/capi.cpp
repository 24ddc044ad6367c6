#include "doseopt/doseopt.h"

#include "doseopt/errors.hpp"
#include "doseopt/service.hpp"

#include <new>
#include <optional>
#include <string>

struct doseopt_session {
    std::optional<doseopt::RunConfig> config;
    std::string error;
    std::string error_key;
    std::string output;
};

namespace {

using namespace doseopt;

template <class F>
doseopt_status guarded(doseopt_session* s, F&& body)
{
    if (s) {
        s->error.clear();
        s->error_key.clear();
    }
    const auto fail = [&](doseopt_status code, const char* what, const std::string& key = {}) {
        if (s) {
            s->error = what;
            s->error_key = key;
        }
        return code;
    };
    try {
        body();
        return DOSEOPT_OK;
    } catch (const ConfigError& e) {
        return fail(DOSEOPT_ERR_CONFIG, e.what(), e.key());
    } catch (const ArgumentError& e) {
        return fail(DOSEOPT_ERR_ARGUMENT, e.what());
    } catch (const DegenerateDesignError& e) {
        return fail(DOSEOPT_ERR_DEGENERATE, e.what());
    } catch (const InsufficientDataError& e) {
        return fail(DOSEOPT_ERR_INSUFFICIENT_DATA, e.what());
    } catch (const NonInvertibleError& e) {
        return fail(DOSEOPT_ERR_NON_INVERTIBLE, e.what());
    } catch (const PolicyError& e) {
        return fail(DOSEOPT_ERR_POLICY, e.what());
    } catch (const IoError& e) {
        return fail(DOSEOPT_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(DOSEOPT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DOSEOPT_ERR_INTERNAL, "unknown failure");
    }
}

const RunConfig& loaded(const doseopt_session* s)
{
    if (!s->config) throw ArgumentError("no configuration loaded");
    return *s->config;
}

} // namespace

extern "C" {

const char* doseopt_version(void) { return tool_version.data(); }

const char* doseopt_status_name(doseopt_status status)
{
    switch (status) {
    case DOSEOPT_OK: return "ok";
    case DOSEOPT_ERR_ARGUMENT: return "argument";
    case DOSEOPT_ERR_CONFIG: return "config";
    case DOSEOPT_ERR_DEGENERATE: return "degenerate-design";
    case DOSEOPT_ERR_INSUFFICIENT_DATA: return "insufficient-data";
    case DOSEOPT_ERR_NON_INVERTIBLE: return "non-invertible";
    case DOSEOPT_ERR_POLICY: return "policy";
    case DOSEOPT_ERR_IO: return "io";
    case DOSEOPT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

doseopt_status doseopt_session_create(doseopt_session** out)
{
    if (!out) return DOSEOPT_ERR_ARGUMENT;
    *out = new (std::nothrow) doseopt_session;
    return *out ? DOSEOPT_OK : DOSEOPT_ERR_INTERNAL;
}

void doseopt_session_destroy(doseopt_session* session) { delete session; }

const char* doseopt_last_error(const doseopt_session* session) { return session ? session->error.c_str() : ""; }

const char* doseopt_last_error_key(const doseopt_session* session)
{
    return session ? session->error_key.c_str() : "";
}

doseopt_status doseopt_load_config(doseopt_session* session, const char* json_text, const char* base_dir,
                                   const char* expected_step)
{
    if (!session) return DOSEOPT_ERR_ARGUMENT;
    return guarded(session, [&] {
        if (!json_text) throw ArgumentError("configuration text is null");
        session->config.reset();
        RunConfig cfg = parse_config(json_text, base_dir ? std::filesystem::path(base_dir) : std::filesystem::path{});
        if (expected_step && to_string(cfg.step) != expected_step)
            throw ConfigError("step", "expected '" + std::string(expected_step) + "' but the config declares '" +
                                          std::string(to_string(cfg.step)) + "'");
        session->config = std::move(cfg);
    });
}

doseopt_status doseopt_set_seed(doseopt_session* session, uint64_t seed)
{
    if (!session) return DOSEOPT_ERR_ARGUMENT;
    return guarded(session, [&] {
        loaded(session);
        session->config->seed = seed;
    });
}

doseopt_status doseopt_set_threads(doseopt_session* session, unsigned threads)
{
    if (!session) return DOSEOPT_ERR_ARGUMENT;
    return guarded(session, [&] {
        loaded(session);
        if (threads == 0) throw ArgumentError("threads must be at least 1");
        session->config->optimization.threads = threads;
    });
}

doseopt_status doseopt_run(doseopt_session* session, doseopt_format format, const char** out, size_t* out_len)
{
    if (!session) return DOSEOPT_ERR_ARGUMENT;
    return guarded(session, [&] {
        if (!out) throw ArgumentError("output pointer is null");
        OutputFormat f;
        switch (format) {
        case DOSEOPT_FORMAT_TABLE: f = OutputFormat::Table; break;
        case DOSEOPT_FORMAT_CSV: f = OutputFormat::Csv; break;
        case DOSEOPT_FORMAT_JSON: f = OutputFormat::Json; break;
        default: throw ArgumentError("unknown output format");
        }
        const ResultBundle bundle = execute(loaded(session));
        session->output = emit_results(bundle, f);
        *out = session->output.c_str();
        if (out_len) *out_len = session->output.size();
    });
}

const char* doseopt_output_path(const doseopt_session* session)
{
    return session && session->config ? session->config->output_path.c_str() : "";
}

doseopt_status doseopt_serve_address(const doseopt_session* session, const char** host, int* port)
{
    if (!session || !host || !port) return DOSEOPT_ERR_ARGUMENT;
    if (!session->config || session->config->step != Step::Serve) return DOSEOPT_ERR_ARGUMENT;
    *host = session->config->serve.host.c_str();
    *port = session->config->serve.port;
    return DOSEOPT_OK;
}

doseopt_status doseopt_handle_request(doseopt_session* session, const char* method, const char* path,
                                      const char* body, size_t body_len, int* http_status, const char** out,
                                      size_t* out_len)
{
    if (!session) return DOSEOPT_ERR_ARGUMENT;
    return guarded(session, [&] {
        if (!method || !path || !http_status || !out) throw ArgumentError("null request argument");
        const HttpResponse r = handle_api(method, path, body ? std::string_view(body, body_len) : std::string_view{});
        *http_status = r.status;
        session->output = r.body;
        *out = session->output.c_str();
        if (out_len) *out_len = session->output.size();
    });
}

doseopt_status doseopt_beta_interval_prob(double alpha, double beta, double lo, double hi, double* out)
{
    if (!out) return DOSEOPT_ERR_ARGUMENT;
    return guarded(nullptr, [&] { *out = beta_interval_prob(BetaParams{alpha, beta}, lo, hi); });
}

doseopt_status doseopt_stage1_decision(uint32_t treated, uint32_t dlt, double target, double epsilon1,
                                       double epsilon2, double gamma, doseopt_decision* out)
{
    if (!out) return DOSEOPT_ERR_ARGUMENT;
    return guarded(nullptr, [&] {
        EscalationConfig c;
        c.target_dlt_rate = target;
        c.epsilon1 = epsilon1;
        c.epsilon2 = epsilon2;
        c.gamma = gamma;
        validate(c);
        *out = static_cast<doseopt_decision>(stage1_decision(DoseOutcome{0.0, treated, dlt, false}, c));
    });
}

} // extern "C"
