#pragma once

#include <string>

#include "dtzo/runtime.hpp"

namespace dtzo {

/// JSON run configuration. All numeric fields decimal; unknown keys are
/// rejected. Step sizes: the string "auto" or an object with the six
/// fields x1..z3. Missing fields fall back to RunConfig::defaults for the
/// given dims.
RunConfig run_config_from_json_text(const std::string& text);
RunConfig run_config_from_file(const std::string& path);
std::string run_config_to_json_text(const RunConfig& cfg);

}  // namespace dtzo
