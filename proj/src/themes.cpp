#include "gterms/themes.hpp"

#include "gterms/error.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace gterms::themes {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json AuditEntry::to_json() const {
    return {{"revision", revision}, {"timestamp", timestamp}, {"op", op}, {"args", args}};
}

AuditEntry AuditEntry::from_json(const nlohmann::json& j) {
    return {j.at("revision").get<long long>(), j.at("timestamp").get<std::string>(), j.at("op").get<std::string>(),
            j.at("args")};
}

ThemeLedger::ThemeLedger(std::string source_run_id) : source_run_id_(std::move(source_run_id)), clock_(utc_timestamp) {}

const Theme* ThemeLedger::find(const std::string& name) const {
    auto it = themes_.find(name);
    return it == themes_.end() ? nullptr : &it->second;
}

Theme& ThemeLedger::require(const std::string& name) {
    auto it = themes_.find(name);
    if (it == themes_.end()) throw NotFoundError("no theme named '" + name + "'");
    return it->second;
}

void ThemeLedger::record(const std::string& op, nlohmann::json args) {
    AuditEntry entry{revision_ + 1, clock_ ? clock_() : utc_timestamp(), op, std::move(args)};
    apply(entry);
    log_.push_back(std::move(entry));
}

void ThemeLedger::create_theme(const std::string& name, Gender gender, const std::string& notes) {
    record("create", {{"name", name}, {"gender", gender_code(gender)}, {"notes", notes}});
}

void ThemeLedger::assign_term(const std::string& term, const std::string& theme, bool direct,
                              std::optional<Gender> gender) {
    nlohmann::json args{{"term", term}, {"theme", theme}, {"direct", direct}};
    if (gender) args["gender"] = gender_code(*gender);
    record("assign", std::move(args));
}

void ThemeLedger::unassign_term(const std::string& term, const std::string& theme) {
    record("unassign", {{"term", term}, {"theme", theme}});
}

void ThemeLedger::rename_theme(const std::string& from, const std::string& to) {
    record("rename", {{"from", from}, {"to", to}});
}

void ThemeLedger::set_notes(const std::string& theme, const std::string& notes) {
    record("notes", {{"theme", theme}, {"notes", notes}});
}

void ThemeLedger::delete_theme(const std::string& name) { record("delete", {{"name", name}}); }

void ThemeLedger::apply(const AuditEntry& e) {
    const auto& a = e.args;
    auto text = [&](const char* key) {
        if (!a.contains(key) || !a.at(key).is_string()) throw ValidationError(e.op + ": missing '" + key + "'");
        return a.at(key).get<std::string>();
    };
    auto nonempty = [&](const char* key) {
        std::string v = text(key);
        if (v.empty()) throw ValidationError(e.op + ": '" + key + "' must not be empty");
        return v;
    };
    auto gender_arg = [&]() -> std::optional<Gender> {
        if (!a.contains("gender")) return std::nullopt;
        const Gender g = parse_gender(a.at("gender").get<std::string>());
        if (g == Gender::unknown) throw ValidationError(e.op + ": theme gender must be F or M");
        return g;
    };

    if (e.op == "create") {
        const std::string name = nonempty("name");
        const auto g = gender_arg();
        if (!g) throw ValidationError("create: theme needs a gender");
        if (themes_.count(name)) throw ValidationError("theme '" + name + "' already exists");
        Theme t;
        t.name = name;
        t.gender = *g;
        t.notes = a.value("notes", "");
        t.created = t.modified = e.timestamp;
        themes_.emplace(name, std::move(t));
    } else if (e.op == "assign") {
        const std::string term = nonempty("term");
        const std::string name = nonempty("theme");
        if (!a.contains("direct") || !a.at("direct").is_boolean()) throw ValidationError("assign: missing 'direct'");
        const bool direct = a.at("direct").get<bool>();
        const auto g = gender_arg();
        auto it = themes_.find(name);
        if (it == themes_.end()) {
            if (!g) throw ValidationError("assign: theme '" + name + "' does not exist and no gender was given");
        } else if (g && *g != it->second.gender) {
            throw ValidationError("assign: theme '" + name + "' belongs to the other gender");
        }
        if (it == themes_.end()) {
            Theme t;
            t.name = name;
            t.gender = *g;
            t.created = e.timestamp;
            it = themes_.emplace(name, std::move(t)).first;
        }
        Theme& target = it->second;
        if (direct) {
            for (auto& [other_name, other] : themes_) {
                if (other_name == name || other.gender != target.gender) continue;
                if (other.terms.erase(term)) other.modified = e.timestamp;
            }
            target.indirect_terms.erase(term);
            target.terms.insert(term);
        } else {
            target.terms.erase(term);
            target.indirect_terms.insert(term);
        }
        target.modified = e.timestamp;
    } else if (e.op == "unassign") {
        const std::string term = nonempty("term");
        Theme& t = require(nonempty("theme"));
        if (!t.terms.erase(term) && !t.indirect_terms.erase(term))
            throw NotFoundError("term '" + term + "' is not in theme '" + t.name + "'");
        t.modified = e.timestamp;
    } else if (e.op == "rename") {
        const std::string from = nonempty("from");
        const std::string to = nonempty("to");
        require(from);
        if (from != to) {
            if (themes_.count(to)) throw ValidationError("theme '" + to + "' already exists");
            auto node = themes_.extract(from);
            node.key() = to;
            node.mapped().name = to;
            node.mapped().modified = e.timestamp;
            themes_.insert(std::move(node));
        }
    } else if (e.op == "notes") {
        Theme& t = require(nonempty("theme"));
        t.notes = text("notes");
        t.modified = e.timestamp;
    } else if (e.op == "delete") {
        const std::string name = nonempty("name");
        require(name);
        themes_.erase(name);
    } else {
        throw ValidationError("unknown ledger operation '" + e.op + "'");
    }
    revision_ = e.revision;
}

nlohmann::json ThemeLedger::to_json() const {
    nlohmann::json j;
    j["format"] = "gterms-theme-ledger";
    j["revision"] = revision_;
    j["source_run_id"] = source_run_id_;
    auto& arr = j["themes"] = nlohmann::json::array();
    for (const auto& [name, t] : themes_) {
        arr.push_back({{"name", t.name},
                       {"gender", gender_code(t.gender)},
                       {"terms", t.terms},
                       {"indirect_terms", t.indirect_terms},
                       {"notes", t.notes},
                       {"created", t.created},
                       {"modified", t.modified}});
    }
    return j;
}

std::string ThemeLedger::serialize() const { return to_json().dump(2) + "\n"; }

ThemeLedger ThemeLedger::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "gterms-theme-ledger") throw DataError("not a theme ledger file");
    ThemeLedger ledger(j.value("source_run_id", ""));
    ledger.revision_ = j.at("revision").get<long long>();
    for (const auto& t : j.at("themes")) {
        Theme theme;
        theme.name = t.at("name").get<std::string>();
        theme.gender = parse_gender(t.at("gender").get<std::string>());
        theme.terms = t.value("terms", std::set<std::string>{});
        theme.indirect_terms = t.value("indirect_terms", std::set<std::string>{});
        theme.notes = t.value("notes", "");
        theme.created = t.value("created", "");
        theme.modified = t.value("modified", "");
        if (ledger.themes_.count(theme.name)) throw DataError("ledger lists theme '" + theme.name + "' twice");
        ledger.themes_.emplace(theme.name, std::move(theme));
    }
    return ledger;
}

ThemeLedger ThemeLedger::replay(const std::vector<AuditEntry>& log, std::string source_run_id) {
    ThemeLedger ledger(std::move(source_run_id));
    for (const auto& e : log) {
        if (e.revision != ledger.revision_ + 1)
            throw DataError("audit log gap before revision " + std::to_string(e.revision));
        ledger.apply(e);
        ledger.log_.push_back(e);
    }
    return ledger;
}

bool ThemeLedger::same_state(const ThemeLedger& other) const {
    return themes_ == other.themes_ && revision_ == other.revision_ && source_run_id_ == other.source_run_id_;
}

nlohmann::json LedgerReport::to_json() const {
    nlohmann::json j;
    j["stale"] = nlohmann::json::array();
    for (const auto& s : stale) j["stale"].push_back({{"theme", s.theme}, {"term", s.term}});
    j["duplicates"] = nlohmann::json::array();
    for (const auto& d : duplicates)
        j["duplicates"].push_back({{"term", d.term}, {"gender", gender_code(d.gender)}, {"themes", d.themes}});
    j["empty_themes"] = empty_themes;
    return j;
}

LedgerReport validate_ledger(const ThemeLedger& ledger, const std::map<Gender, std::set<std::string>>& current) {
    LedgerReport report;
    std::map<std::pair<Gender, std::string>, std::vector<std::string>> direct;
    static const std::set<std::string> none;
    for (const auto& [name, t] : ledger.themes()) {
        if (t.terms.empty() && t.indirect_terms.empty()) report.empty_themes.push_back(name);
        auto it = current.find(t.gender);
        const auto& listed = it == current.end() ? none : it->second;
        for (const auto* members : {&t.terms, &t.indirect_terms})
            for (const auto& term : *members)
                if (!listed.count(term)) report.stale.push_back({name, term});
        for (const auto& term : t.terms) direct[{t.gender, term}].push_back(name);
    }
    for (auto& [key, names] : direct)
        if (names.size() > 1) report.duplicates.push_back({key.second, key.first, std::move(names)});
    return report;
}

// Files

ThemeLedger load_ledger(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read ledger " + path.string());
    try {
        return ThemeLedger::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("ledger " + path.string() + ": " + e.what());
    }
}

void save_ledger(const ThemeLedger& ledger, const std::filesystem::path& path) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write ledger " + tmp.string());
        out << ledger.serialize();
        if (!out) throw IoError("failed writing ledger " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<AuditEntry> load_audit_log(const std::filesystem::path& path) {
    std::vector<AuditEntry> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(AuditEntry::from_json(nlohmann::json::parse(line)));
    }
    return out;
}

LedgerStore::LedgerStore(std::filesystem::path path, std::string source_run_id)
    : path_(std::move(path)), ledger_(source_run_id) {
    if (std::filesystem::exists(path_)) ledger_ = load_ledger(path_);
}

ThemeLedger LedgerStore::read() const {
    std::lock_guard lock(mutex_);
    return ledger_;
}

long long LedgerStore::revision() const {
    std::lock_guard lock(mutex_);
    return ledger_.revision();
}

std::filesystem::path LedgerStore::audit_path() const { return path_.string() + ".audit.jsonl"; }

void LedgerStore::set_clock(ThemeLedger::Clock clock) {
    std::lock_guard lock(mutex_);
    clock_ = std::move(clock);
}

ThemeLedger LedgerStore::commit(long long base_revision, const std::function<void(ThemeLedger&)>& mutation) {
    std::lock_guard lock(mutex_);
    if (base_revision != ledger_.revision())
        throw ConflictError("stale revision " + std::to_string(base_revision) + " (current " +
                                std::to_string(ledger_.revision()) + ")",
                            ledger_.revision());
    ThemeLedger next = ledger_;
    const std::size_t before = next.audit_log().size();
    if (clock_) next.set_clock(clock_);
    mutation(next);
    save_ledger(next, path_);
    {
        std::ofstream audit(audit_path(), std::ios::binary | std::ios::app);
        if (!audit) throw IoError("cannot append audit log " + audit_path().string());
        for (std::size_t i = before; i < next.audit_log().size(); ++i) audit << next.audit_log()[i].to_json().dump() << '\n';
    }
    ledger_ = std::move(next);
    return ledger_;
}

}  // namespace gterms::themes
