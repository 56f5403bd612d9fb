#include "manifest.hpp"

#include "rftext/types.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace rftext::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 initialisation failed");
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

json artifact_ref(const std::filesystem::path& path) {
    return json{{"path", path.string()}, {"sha256", sha256_file(path)}};
}

void verify_same_artifact(const json& ref, const std::filesystem::path& actual, std::string_view role) {
    const auto expected = ref.at("sha256").get<std::string>();
    if (!std::filesystem::exists(actual))
        throw InputError(fmt::format("{} '{}' does not exist", role, actual.string()));
    if (sha256_file(actual) != expected)
        throw InputError(fmt::format("{} '{}' does not match the artifact recorded by the earlier stage ({})", role,
                                     actual.string(), ref.at("path").get<std::string>()));
}

void verify_artifact(const json& ref, std::string_view role) {
    verify_same_artifact(ref, ref.at("path").get<std::string>(), role);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    try {
        return json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error(fmt::format("failed to write '{}'", path.string()));
}

}  // namespace rftext::cli
