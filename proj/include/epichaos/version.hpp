#pragma once

#include <map>
#include <string>

namespace epichaos {

inline constexpr const char* kVersion = "1.0.0";

inline const std::map<std::string, std::string>& module_versions() {
    static const std::map<std::string, std::string> versions = {
        {"orthopoly", "1.0.0"}, {"distributions", "1.0.0"}, {"pce", "1.0.0"}, {"sobol", "1.0.0"},
        {"ode", "1.0.0"},       {"epimodels", "1.0.0"},     {"calibrate", "1.0.0"}, {"cli", "1.0.0"},
    };
    return versions;
}

}  // namespace epichaos
