#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gterms {

enum class Severity { warning, error };

// One warning or row error destined for the run report (one JSON object per line).
struct Diagnostic {
    Severity severity = Severity::warning;
    std::string stage;
    std::string message;
    std::string file;
    std::optional<std::size_t> line;

    nlohmann::json to_json() const;
};

using Diagnostics = std::vector<Diagnostic>;

inline Diagnostic warning(std::string stage, std::string message) {
    return Diagnostic{Severity::warning, std::move(stage), std::move(message), {}, std::nullopt};
}

inline bool has_errors(const Diagnostics& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::error) return true;
    return false;
}

}  // namespace gterms
