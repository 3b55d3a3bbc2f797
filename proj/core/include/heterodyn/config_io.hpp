#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "heterodyn/model.hpp"

namespace heterodyn {

// Flat `key = value` text with `#` comments. Unknown keys, duplicates and
// malformed values raise ConfigError; missing keys keep the ModelSpec default.
ModelSpec parse_model_spec(std::istream& is);
ModelSpec parse_model_spec_string(const std::string& text);
ModelSpec load_model_spec(const std::string& path);

// Canonical form: every key in sorted order, numbers as %.17g. Parsing the
// output gives back the same spec.
std::string serialize_model_spec(const ModelSpec& spec);

// FNV-1a 64 of the canonical form.
std::uint64_t config_hash(const ModelSpec& spec);
std::string hash_hex(std::uint64_t h);

}  // namespace heterodyn
