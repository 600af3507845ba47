#pragma once

// Deterministic result files: shortest round-trip number formatting and a
// provenance header (config hash, versions) on every file.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "epichaos/errors.hpp"
#include "epichaos/version.hpp"

namespace epichaos::output {

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Provenance {
    std::string command;
    std::string config_hash;
};

inline void write_csv_header(std::ostream& os, const Provenance& prov) {
    os << "# epichaos " << kVersion << '\n';
    os << "# command " << prov.command << '\n';
    os << "# config_hash fnv1a64:" << prov.config_hash << '\n';
    os << "# modules";
    for (const auto& [name, version] : module_versions()) os << ' ' << name << '=' << version;
    os << '\n';
}

inline nlohmann::json header_json(const Provenance& prov) {
    return {{"generator", std::string("epichaos ") + kVersion},
            {"command", prov.command},
            {"config_hash", "fnv1a64:" + prov.config_hash},
            {"modules", module_versions()}};
}

/// Collects the files of one run under a directory.
class Writer {
public:
    Writer(std::filesystem::path dir, Provenance prov) : dir_(std::move(dir)), prov_(std::move(prov)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const Provenance& provenance() const noexcept { return prov_; }
    const std::filesystem::path& directory() const noexcept { return dir_; }
    const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

    /// Writes header plus `body` (which starts with the CSV column line).
    void csv(const std::string& name, const std::string& body) {
        std::ostringstream os;
        write_csv_header(os, prov_);
        os << body;
        put(name, os.str());
    }

    /// Writes `doc` with the provenance header under the "header" key.
    void json(const std::string& name, nlohmann::json doc) {
        doc["header"] = header_json(prov_);
        put(name, doc.dump(2) + "\n");
    }

private:
    void put(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw ConfigError("write failed for '" + path.string() + "'");
        written_.push_back(path);
    }

    std::filesystem::path dir_;
    Provenance prov_;
    std::vector<std::filesystem::path> written_;
};

}  // namespace epichaos::output
