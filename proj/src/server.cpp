#include "gterms/server.hpp"

#include "gterms/error.hpp"
#include "gterms/report.hpp"

#include <httplib.h>

#include <charconv>

namespace gterms::server {

namespace {

using json = nlohmann::json;

class BadRequest : public Error {
public:
    explicit BadRequest(const std::string& what) : Error(what, ExitCode::usage_error) {}
};

int status_for(const std::exception& e) {
    if (dynamic_cast<const ConflictError*>(&e)) return 409;
    if (dynamic_cast<const NotFoundError*>(&e)) return 404;
    if (dynamic_cast<const BadRequest*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return 400;
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 422;
    return 500;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                std::optional<long long> revision = std::nullopt) {
    json err = {{"status", status}, {"message", message}};
    if (revision) err["current_revision"] = *revision;
    send_json(res, {{"error", err}}, status);
}

std::string param(const httplib::Request& req, const char* key, std::string fallback = {}) {
    return req.has_param(key) ? req.get_param_value(key) : fallback;
}

std::uint64_t number_param(const httplib::Request& req, const char* key, std::uint64_t fallback, std::uint64_t min,
                           std::uint64_t max) {
    if (!req.has_param(key)) return fallback;
    const std::string s = req.get_param_value(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v < min || v > max)
        throw BadRequest("query parameter '" + std::string(key) + "' must be an integer in [" + std::to_string(min) +
                         ", " + std::to_string(max) + "]");
    return v;
}

std::optional<Gender> gender_param(const httplib::Request& req, bool required) {
    if (!req.has_param("gender") || req.get_param_value("gender").empty()) {
        if (required) throw BadRequest("query parameter 'gender' is required (F or M)");
        return std::nullopt;
    }
    Gender g;
    try {
        g = parse_gender(req.get_param_value("gender"));
    } catch (const ConfigError& e) {
        throw BadRequest(e.what());
    }
    if (g == Gender::unknown) throw BadRequest("gender must be F or M");
    return g;
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
}

long long base_revision(const httplib::Request& req, const json& body) {
    if (body.contains("base_revision")) {
        if (!body.at("base_revision").is_number_integer()) throw BadRequest("'base_revision' must be an integer");
        return body.at("base_revision").get<long long>();
    }
    if (req.has_param("base_revision"))
        return static_cast<long long>(number_param(req, "base_revision", 0, 0, UINT32_MAX));
    throw BadRequest("writes need 'base_revision'");
}

std::string string_field(const json& body, const char* key, bool required) {
    if (!body.contains(key)) {
        if (required) throw BadRequest("missing '" + std::string(key) + "'");
        return {};
    }
    if (!body.at(key).is_string()) throw BadRequest("'" + std::string(key) + "' must be a string");
    return body.at(key).get<std::string>();
}

json ledger_body(const themes::ThemeLedger& ledger) { return ledger.to_json(); }

// Terms currently listed for each gender: the overall lists plus the
// cross-field selections.
std::map<Gender, std::set<std::string>> current_terms(const pipeline::LoadedRun& run) {
    std::map<Gender, std::set<std::string>> out;
    for (Gender g : {Gender::female, Gender::male}) {
        for (const auto& row : run.overall_terms(g).at("rows")) out[g].insert(row.at("term").get<std::string>());
        for (const auto& row : run.crossfield(g).at("rows")) out[g].insert(row.at("term").get<std::string>());
    }
    return out;
}

}  // namespace

ApiServer::ApiServer(std::shared_ptr<const pipeline::LoadedRun> run, ServerOptions options)
    : run_(std::move(run)), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    if (options_.ledger_path.empty()) options_.ledger_path = run_->dir() / "themes.json";
    ledger_ = std::make_unique<themes::LedgerStore>(options_.ledger_path, run_->run_id());
    routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
    int port = options_.port;
    if (port == 0) {
        port = http_->bind_to_any_port(options_.host);
        if (port < 0) throw IoError("cannot bind " + options_.host);
    } else if (!http_->bind_to_port(options_.host, port)) {
        throw IoError("cannot bind " + options_.host + ":" + std::to_string(port));
    }
    return port;
}

void ApiServer::listen() { http_->listen_after_bind(); }
void ApiServer::stop() {
    if (http_) http_->stop();
}
bool ApiServer::running() const { return http_->is_running(); }

void ApiServer::routes() {
    auto& srv = *http_;
    const std::string origin = options_.cors_origin;

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const ConflictError& e) {
            send_error(res, 409, e.what(), e.current_revision());
        } catch (const std::exception& e) {
            send_error(res, status_for(e), e.what());
        } catch (...) {
            send_error(res, 500, "internal error");
        }
    });
    srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "no route for " + req.path : "request failed");
    });
    srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        }
    });
    srv.Options(R"(/api/.*)", [origin](const httplib::Request&, httplib::Response& res) {
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
        res.status = 204;
    });

    const auto& run = *run_;

    srv.Get("/api/run", [&run](const httplib::Request&, httplib::Response& res) {
        const auto& rep = run.report();
        send_json(res, {{"run_id", run.run_id()},
                        {"config", rep.at("config")},
                        {"counts", rep.at("counts")},
                        {"correction_factors", rep.at("correction_factors")},
                        {"fields", json(run.index().fields())}});
    });

    srv.Get("/api/fields", [&run](const httplib::Request&, httplib::Response& res) { send_json(res, run.field_ratios()); });

    srv.Get("/api/terms", [&run](const httplib::Request& req, httplib::Response& res) {
        const Gender g = *gender_param(req, true);
        const std::string scope = param(req, "scope", "overall");
        json out;
        if (scope == "overall" || scope == textprep::TermIndex::overall) {
            out = run.overall_terms(g);
            out["scope"] = "overall";
        } else {
            const json* field = run.field_terms(scope);
            if (!field) throw NotFoundError("unknown field '" + scope + "'");
            out = *field;
            json rows = json::array();
            for (const auto& row : field->at("rows"))
                if (row.at("list") == gender_code(g)) rows.push_back(row);
            out["rows"] = rows;
            out["scope"] = scope;
            out["gender"] = gender_code(g);
        }
        send_json(res, out);
    });

    srv.Get("/api/terms/crossfield", [&run](const httplib::Request& req, httplib::Response& res) {
        send_json(res, run.crossfield(*gender_param(req, true)));
    });

    srv.Get("/api/kwic", [&run](const httplib::Request& req, httplib::Response& res) {
        analysis::KwicQuery q;
        q.term = param(req, "term");
        if (q.term.empty()) throw BadRequest("query parameter 'term' is required");
        const auto& cfg = run.report().at("config");
        q.n = number_param(req, "n", cfg.at("kwic_n").get<std::uint64_t>(), 1, 10000);
        q.seed = number_param(req, "seed", cfg.at("seed").get<std::uint64_t>(), 0, UINT64_MAX);
        q.gender = gender_param(req, false);
        const std::string scope = param(req, "scope", "all");
        if (scope == "biased") {
            std::set<std::string> fields;
            for (Gender g : {Gender::female, Gender::male})
                if (!q.gender || *q.gender == g) fields.merge(analysis::biased_fields(run.per_field(), q.term, g));
            if (fields.empty()) throw NotFoundError("term '" + q.term + "' is in no field's top list");
            q.fields = std::move(fields);
        } else if (scope != "all") {
            if (!run.index().has_scope(scope)) throw NotFoundError("unknown field '" + scope + "'");
            q.fields = std::set<std::string>{scope};
        }
        json out = report::kwic_json(analysis::kwic_sample(run.index(), run.corpus(), q));
        out["term"] = q.term;
        out["scope"] = scope;
        out["n"] = q.n;
        out["seed"] = q.seed;
        send_json(res, out);
    });

    srv.Get("/api/cooccur", [&run](const httplib::Request& req, httplib::Response& res) {
        analysis::CooccurrenceQuery q;
        q.anchor = param(req, "term");
        if (q.anchor.empty()) throw BadRequest("query parameter 'term' is required");
        try {
            q.baseline = analysis::parse_baseline(param(req, "baseline", "all-other-docs"));
        } catch (const ConfigError& e) {
            throw BadRequest(e.what());
        }
        q.gender = gender_param(req, q.baseline == analysis::Baseline::same_gender_docs);
        q.policy = run.policy();
        q.limit = number_param(req, "limit", 200, 1, 100000);
        const auto result = analysis::cooccurrence_scan(run.index(), q);
        json out = report::to_json(report::cooccurrence_table(result));
        out["anchor"] = result.anchor;
        out["baseline"] = analysis::baseline_name(result.baseline);
        out["gender"] = result.gender ? json(gender_code(*result.gender)) : json();
        out["anchor_docs"] = result.anchor_docs;
        out["baseline_docs"] = result.baseline_docs;
        send_json(res, out);
    });

    auto& store = *ledger_;

    srv.Get("/api/themes", [&store](const httplib::Request&, httplib::Response& res) {
        send_json(res, ledger_body(store.read()));
    });

    srv.Get("/api/themes/audit", [&store](const httplib::Request&, httplib::Response& res) {
        json entries = json::array();
        for (const auto& e : themes::load_audit_log(store.audit_path())) entries.push_back(e.to_json());
        send_json(res, {{"revision", store.revision()}, {"entries", entries}});
    });

    srv.Get("/api/themes/validate", [&store, &run](const httplib::Request&, httplib::Response& res) {
        const auto ledger = store.read();
        auto report = themes::validate_ledger(ledger, current_terms(run)).to_json();
        send_json(res, {{"revision", ledger.revision()}, {"report", report}});
    });

    srv.Post("/api/themes", [&store](const httplib::Request& req, httplib::Response& res) {
        const json body = body_json(req);
        const auto rev = base_revision(req, body);
        const std::string name = string_field(body, "name", true);
        Gender g;
        try {
            g = parse_gender(string_field(body, "gender", true));
        } catch (const ConfigError& e) {
            throw BadRequest(e.what());
        }
        const std::string notes = string_field(body, "notes", false);
        send_json(res, ledger_body(store.commit(rev, [&](themes::ThemeLedger& l) { l.create_theme(name, g, notes); })),
                  201);
    });

    srv.Put(R"(/api/themes/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        const std::string name = req.matches[1];
        const json body = body_json(req);
        const auto rev = base_revision(req, body);
        const std::string new_name = string_field(body, "new_name", false);
        const bool has_notes = body.contains("notes");
        const std::string notes = string_field(body, "notes", false);
        if (new_name.empty() && !has_notes) throw BadRequest("nothing to update: give 'new_name' and/or 'notes'");
        send_json(res, ledger_body(store.commit(rev, [&](themes::ThemeLedger& l) {
                      if (!l.find(name)) throw NotFoundError("no theme named '" + name + "'");
                      std::string target = name;
                      if (!new_name.empty() && new_name != name) {
                          l.rename_theme(name, new_name);
                          target = new_name;
                      }
                      if (has_notes) l.set_notes(target, notes);
                  })));
    });

    srv.Delete(R"(/api/themes/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        const std::string name = req.matches[1];
        const json body = body_json(req);
        const auto rev = base_revision(req, body);
        send_json(res, ledger_body(store.commit(rev, [&](themes::ThemeLedger& l) { l.delete_theme(name); })));
    });

    auto assign = [&store](const httplib::Request& req, httplib::Response& res, const std::string& theme,
                           std::string term, int status) {
        const json body = body_json(req);
        const auto rev = base_revision(req, body);
        if (term.empty()) term = string_field(body, "term", true);
        if (term.empty()) throw BadRequest("'term' must not be empty");
        bool indirect = false;
        if (body.contains("indirect")) {
            if (!body.at("indirect").is_boolean()) throw BadRequest("'indirect' must be a boolean");
            indirect = body.at("indirect").get<bool>();
        }
        std::optional<Gender> g;
        if (body.contains("gender")) {
            try {
                g = parse_gender(string_field(body, "gender", true));
            } catch (const ConfigError& e) {
                throw BadRequest(e.what());
            }
        }
        send_json(res,
                  ledger_body(store.commit(rev, [&](themes::ThemeLedger& l) { l.assign_term(term, theme, !indirect, g); })),
                  status);
    };

    srv.Post(R"(/api/themes/([^/]+)/terms)", [assign](const httplib::Request& req, httplib::Response& res) {
        assign(req, res, req.matches[1], {}, 201);
    });
    srv.Put(R"(/api/themes/([^/]+)/terms/([^/]+))", [assign](const httplib::Request& req, httplib::Response& res) {
        assign(req, res, req.matches[1], req.matches[2], 200);
    });
    srv.Delete(R"(/api/themes/([^/]+)/terms/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        const std::string theme = req.matches[1];
        const std::string term = req.matches[2];
        const json body = body_json(req);
        const auto rev = base_revision(req, body);
        send_json(res, ledger_body(store.commit(rev, [&](themes::ThemeLedger& l) { l.unassign_term(term, theme); })));
    });

    if (!options_.static_dir.empty() && !srv.set_mount_point("/", options_.static_dir.string()))
        throw IoError("static directory not found: " + options_.static_dir.string());
}

}  // namespace gterms::server
