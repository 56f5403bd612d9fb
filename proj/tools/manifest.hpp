#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace rftext::cli {

using json = nlohmann::ordered_json;

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// {"path": ..., "sha256": ...} for an existing file.
json artifact_ref(const std::filesystem::path& path);

/// Throws InputError if the file named by `ref` is missing or its hash changed.
void verify_artifact(const json& ref, std::string_view role);

/// Same, but for a file given explicitly; the hash must match `ref`.
void verify_same_artifact(const json& ref, const std::filesystem::path& actual, std::string_view role);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

}  // namespace rftext::cli
