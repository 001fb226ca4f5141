#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace gterms::testkit {

// Validates JSON against the subset of OpenAPI 3.0 schema objects used in
// docs/api-schema.json: type, nullable, properties, required,
// additionalProperties, items, enum, minimum, oneOf and local $ref.
class SchemaChecker {
public:
    explicit SchemaChecker(nlohmann::json document);

    // Response schema for a path template ("/api/themes/{name}"), method and
    // status; throws std::out_of_range when the document lacks one.
    const nlohmann::json& response_schema(const std::string& path, const std::string& method, int status) const;

    // Empty when valid; otherwise one message per violation with its JSON pointer.
    std::vector<std::string> validate(const nlohmann::json& value, const nlohmann::json& schema) const;

    const nlohmann::json& document() const { return doc_; }

private:
    void check(const nlohmann::json& value, const nlohmann::json& schema, const std::string& where,
               std::vector<std::string>& errors) const;
    const nlohmann::json& resolve(const nlohmann::json& schema) const;

    nlohmann::json doc_;
};

}  // namespace gterms::testkit
