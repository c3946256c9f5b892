#ifndef NEUREG_CONFIG_HPP
#define NEUREG_CONFIG_HPP

#include <string>

#include <json.hpp>

namespace neureg::cli {

using json = nlohmann::json;

// Full config tree with every knob at its default.
json default_config();

// Parses, merges onto the defaults, rejects unknown keys and out-of-range
// values.  Throws Error("ConfigInvalid", ...).
json parse_config(const std::string& text);

// Same, starting from an already-parsed object (used by sweep overrides).
json validate_config(json user);

}  // namespace neureg::cli

#endif
