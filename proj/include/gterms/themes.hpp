#pragma once

#include "gterms/labels.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gterms::themes {

struct Theme {
    std::string name;
    Gender gender = Gender::female;
    std::set<std::string> terms;           // direct members
    std::set<std::string> indirect_terms;  // shown bracketed
    std::string notes;
    std::string created;
    std::string modified;

    bool operator==(const Theme&) const = default;
};

// One mutation. `op` is one of create, assign, unassign, rename, notes,
// delete; `args` holds its parameters.
struct AuditEntry {
    long long revision = 0;
    std::string timestamp;
    std::string op;
    nlohmann::json args;

    nlohmann::json to_json() const;
    static AuditEntry from_json(const nlohmann::json& j);
    bool operator==(const AuditEntry&) const = default;
};

// Analyst-assigned term -> theme clustering. A term is a direct member of at
// most one theme per gender; indirect membership may repeat. Every mutation
// bumps the revision and appends one audit entry.
class ThemeLedger {
public:
    using Clock = std::function<std::string()>;

    explicit ThemeLedger(std::string source_run_id = {});

    void create_theme(const std::string& name, Gender gender, const std::string& notes = {});
    // Creates the theme on first use (needs `gender`). A direct assignment
    // moves the term out of any other same-gender theme.
    void assign_term(const std::string& term, const std::string& theme, bool direct,
                     std::optional<Gender> gender = std::nullopt);
    void unassign_term(const std::string& term, const std::string& theme);
    void rename_theme(const std::string& from, const std::string& to);
    void set_notes(const std::string& theme, const std::string& notes);
    void delete_theme(const std::string& name);

    const std::map<std::string, Theme>& themes() const { return themes_; }
    const Theme* find(const std::string& name) const;
    long long revision() const { return revision_; }
    const std::string& source_run_id() const { return source_run_id_; }
    // Entries recorded since construction or load.
    const std::vector<AuditEntry>& audit_log() const { return log_; }

    void set_clock(Clock clock) { clock_ = std::move(clock); }

    // Sorted-key JSON; load(serialize()) re-serializes byte-identically.
    nlohmann::json to_json() const;
    std::string serialize() const;
    static ThemeLedger from_json(const nlohmann::json& j);

    // Re-applies audit entries on an empty ledger.
    static ThemeLedger replay(const std::vector<AuditEntry>& log, std::string source_run_id = {});

    // State equality (ignores the in-memory audit log and clock).
    bool same_state(const ThemeLedger& other) const;

private:
    void record(const std::string& op, nlohmann::json args);
    void apply(const AuditEntry& entry);
    Theme& require(const std::string& name);

    std::map<std::string, Theme> themes_;
    long long revision_ = 0;
    std::string source_run_id_;
    std::vector<AuditEntry> log_;
    Clock clock_;
};

std::string utc_timestamp();

struct StaleTerm {
    std::string theme;
    std::string term;
};

struct DuplicateMembership {
    std::string term;
    Gender gender = Gender::unknown;
    std::vector<std::string> themes;
};

struct LedgerReport {
    std::vector<StaleTerm> stale;
    std::vector<DuplicateMembership> duplicates;
    std::vector<std::string> empty_themes;

    bool clean() const { return stale.empty() && duplicates.empty() && empty_themes.empty(); }
    nlohmann::json to_json() const;
};

// `current` maps each gender to the terms of its current gendered-term lists.
LedgerReport validate_ledger(const ThemeLedger& ledger, const std::map<Gender, std::set<std::string>>& current);

// File-backed ledger with a single writer. Writes carry the revision they
// were based on; a stale base revision raises ConflictError. The audit log
// is appended as JSON lines next to the ledger file.
class LedgerStore {
public:
    LedgerStore(std::filesystem::path path, std::string source_run_id);

    ThemeLedger read() const;
    long long revision() const;

    ThemeLedger commit(long long base_revision, const std::function<void(ThemeLedger&)>& mutation);

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path audit_path() const;

    void set_clock(ThemeLedger::Clock clock);

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    ThemeLedger ledger_;
    ThemeLedger::Clock clock_;
};

ThemeLedger load_ledger(const std::filesystem::path& path);
void save_ledger(const ThemeLedger& ledger, const std::filesystem::path& path);
std::vector<AuditEntry> load_audit_log(const std::filesystem::path& path);

}  // namespace gterms::themes
