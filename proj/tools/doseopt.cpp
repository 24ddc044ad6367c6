#include "doseopt/doseopt.h"

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct SessionDeleter {
    void operator()(doseopt_session* s) const { doseopt_session_destroy(s); }
};
using Session = std::unique_ptr<doseopt_session, SessionDeleter>;

Session make_session()
{
    doseopt_session* raw = nullptr;
    if (doseopt_session_create(&raw) != DOSEOPT_OK) throw std::runtime_error("cannot allocate a session");
    return Session(raw);
}

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string format = "table";
    std::optional<unsigned> threads;
    std::string host;
    std::optional<int> port;
};

// Exit codes: 0 ok, 2 usage or configuration, 3 computation, 4 I/O.
int exit_code(doseopt_status s)
{
    switch (s) {
    case DOSEOPT_OK: return 0;
    case DOSEOPT_ERR_CONFIG:
    case DOSEOPT_ERR_ARGUMENT: return 2;
    case DOSEOPT_ERR_IO: return 4;
    default: return 3;
    }
}

int report(const doseopt_session* s, doseopt_status status)
{
    std::cerr << "doseopt: " << doseopt_status_name(status) << " error: " << doseopt_last_error(s) << '\n';
    return exit_code(status);
}

std::optional<std::string> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int load(doseopt_session* s, const Options& o, const char* step)
{
    const auto text = read_file(o.config_path);
    if (!text) {
        std::cerr << "doseopt: cannot read config " << o.config_path << '\n';
        return 4;
    }
    const std::string base = std::filesystem::absolute(o.config_path).parent_path().string();
    if (auto st = doseopt_load_config(s, text->c_str(), base.c_str(), step); st != DOSEOPT_OK) return report(s, st);
    if (o.seed)
        if (auto st = doseopt_set_seed(s, *o.seed); st != DOSEOPT_OK) return report(s, st);
    if (o.threads)
        if (auto st = doseopt_set_threads(s, *o.threads); st != DOSEOPT_OK) return report(s, st);
    return 0;
}

int run_step(const Options& o, const char* step)
{
    Session s = make_session();
    if (int rc = load(s.get(), o, step)) return rc;
    doseopt_format fmt = DOSEOPT_FORMAT_TABLE;
    if (o.format == "csv") fmt = DOSEOPT_FORMAT_CSV;
    else if (o.format == "json") fmt = DOSEOPT_FORMAT_JSON;
    const char* text = nullptr;
    size_t len = 0;
    if (auto st = doseopt_run(s.get(), fmt, &text, &len); st != DOSEOPT_OK) return report(s.get(), st);

    const std::string target = o.out_path.empty() ? doseopt_output_path(s.get()) : o.out_path;
    if (target.empty() || target == "-") {
        std::cout.write(text, static_cast<std::streamsize>(len));
        return 0;
    }
    std::ofstream out(target, std::ios::binary);
    if (!out.write(text, static_cast<std::streamsize>(len))) {
        std::cerr << "doseopt: cannot write " << target << '\n';
        return 4;
    }
    return 0;
}

int serve(const Options& o)
{
    Session s = make_session();
    if (int rc = load(s.get(), o, "serve")) return rc;
    const char* host = nullptr;
    int port = 0;
    if (auto st = doseopt_serve_address(s.get(), &host, &port); st != DOSEOPT_OK) return report(s.get(), st);
    const std::string bind_host = o.host.empty() ? host : o.host;
    if (o.port) port = *o.port;

    httplib::Server server;
    const auto route = [](const httplib::Request& req, httplib::Response& res) {
        Session request_session = make_session();
        int status = 500;
        const char* body = nullptr;
        size_t len = 0;
        const auto st = doseopt_handle_request(request_session.get(), req.method.c_str(), req.path.c_str(),
                                               req.body.data(), req.body.size(), &status, &body, &len);
        if (st != DOSEOPT_OK) {
            res.status = 500;
            res.set_content(std::string("{\"error\":{\"message\":\"") + doseopt_status_name(st) + "\"}}",
                            "application/json");
            return;
        }
        res.status = status;
        res.set_content(std::string(body, len), "application/json");
    };
    server.Get(R"(/api/v1/.*)", route);
    server.Post(R"(/api/v1/.*)", route);
    server.Put(R"(/api/v1/.*)", route);
    server.Delete(R"(/api/v1/.*)", route);
    std::cerr << "doseopt: listening on " << bind_host << ':' << port << '\n';
    if (!server.listen(bind_host, port)) {
        std::cerr << "doseopt: cannot bind " << bind_host << ':' << port << '\n';
        return 4;
    }
    return 0;
}

void add_common(CLI::App* cmd, Options& o, bool simulation)
{
    cmd->add_option("--config", o.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out_path, "output file (default: config paths.output, else stdout)");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"table", "csv", "json"}));
    if (simulation) {
        cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
        cmd->add_option("--threads", o.threads, "worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dose escalation, exposure calibration and factorial dose optimization"};
    app.set_version_flag("--version", std::string(doseopt_version()));
    app.require_subcommand(1);
    Options o;
    const char* step = nullptr;

    auto* esc = app.add_subcommand("escalate", "interval-based dose escalation")->require_subcommand(1);
    auto* decide = esc->add_subcommand("decide", "hybrid decision for the current cohort");
    auto* table = esc->add_subcommand("table", "Stage-1 decision table");
    auto* esc_sim = esc->add_subcommand("simulate", "simulate escalation trials");
    auto* rde = app.add_subcommand("rde", "recommended dose calibration")->require_subcommand(1);
    auto* calibrate = rde->add_subcommand("calibrate", "exposure window and candidate doses");
    auto* opt = app.add_subcommand("optimize", "factorial dose optimization")->require_subcommand(1);
    auto* opt_sim = opt->add_subcommand("simulate", "operating characteristics by design scheme");
    auto* srv = app.add_subcommand("serve", "HTTP decision service");

    add_common(decide, o, false);
    add_common(table, o, false);
    add_common(esc_sim, o, true);
    add_common(calibrate, o, false);
    add_common(opt_sim, o, true);
    srv->add_option("--config", o.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    srv->add_option("--host", o.host, "bind address (overrides the config)");
    srv->add_option("--port", o.port, "port (overrides the config)")->check(CLI::Range(0, 65535));

    decide->callback([&] { step = "escalate-decide"; });
    table->callback([&] { step = "escalate-table"; });
    esc_sim->callback([&] { step = "escalate-simulate"; });
    calibrate->callback([&] { step = "rde-calibrate"; });
    opt_sim->callback([&] { step = "optimize-simulate"; });
    srv->callback([&] { step = "serve"; });

    CLI11_PARSE(app, argc, argv);
    try {
        return std::string(step) == "serve" ? serve(o) : run_step(o, step);
    } catch (const std::exception& e) {
        std::cerr << "doseopt: " << e.what() << '\n';
        return 3;
    }
}
