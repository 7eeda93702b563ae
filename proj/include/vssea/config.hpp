#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vssea/scenario.hpp"

namespace vssea {

// Config grammar
//
//   file    := { line }
//   line    := blank | comment | "[" section "]" | key "=" value
//   comment := ("#" | ";") text            (also allowed after a value)
//   section := plant | controller | observer | reference | disturbance | sim
//   value   := number | true | false | identifier | "quoted string"
//
// Keys are lowercase snake_case and addressed as section.key. Every key has a
// default, so an empty file is a complete configuration. Unknown keys,
// duplicate keys, type mismatches and invariant violations raise ConfigError
// with the line number (when known) and the dotted key.

/// Parses config text, applies `key=value` overrides (which take precedence
/// over the file), fills defaults, derives dependent values and validates.
ScenarioConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

/// All recognised dotted keys, in documentation order.
std::vector<std::string> config_keys();

/// A config file listing every key with its default value.
std::string default_config_text();

}  // namespace vssea
