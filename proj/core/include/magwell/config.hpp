#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magwell/maggeom.hpp"

namespace magwell {

// Optional [verify] table; unset entries fall back to VerifyOptions defaults.
struct VerifyConfig {
    std::optional<std::vector<double>> hbar;
    std::optional<std::vector<int>> points;
    std::optional<std::vector<double>> half_width;
    std::optional<double> box_factor;
    std::optional<int> levels;
    std::optional<bool> refine;
    std::optional<bool> box_check;
};

// Optional [normal_form] table.
struct NormalFormConfig {
    std::optional<int> r1;
    std::optional<int> r2;
};

struct RunConfig {
    FieldSpec field;
    VerifyConfig verify;
    NormalFormConfig normal_form;
};

// Parses the TOML run configuration. Errors carry line and column of the offending value.
RunConfig parse_config(const std::string& text);

}  // namespace magwell
