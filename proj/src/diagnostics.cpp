#include "gterms/diagnostics.hpp"

#include "gterms/error.hpp"
#include "gterms/labels.hpp"

#include <algorithm>
#include <cctype>

namespace gterms {

nlohmann::json Diagnostic::to_json() const {
    nlohmann::json j;
    j["severity"] = severity == Severity::error ? "error" : "warning";
    j["stage"] = stage;
    j["message"] = message;
    if (!file.empty()) j["file"] = file;
    if (line) j["line"] = *line;
    return j;
}

std::string_view gender_code(Gender g) {
    switch (g) {
        case Gender::male: return "M";
        case Gender::female: return "F";
        default: return "U";
    }
}

Gender parse_gender(std::string_view s) {
    std::string v(s);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "f" || v == "female") return Gender::female;
    if (v == "m" || v == "male") return Gender::male;
    if (v == "u" || v == "unknown" || v == "unresolved" || v.empty()) return Gender::unknown;
    throw ConfigError("unrecognised gender '" + std::string(s) + "' (expected F, M or U)");
}

}  // namespace gterms
