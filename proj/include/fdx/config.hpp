// SPDX-License-Identifier: Apache-2.0
//
// fdxtrack: full-duplex beam tracking for LEO satellite ground terminals
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdx
{
    /// Flattened key/value configuration. Keys are "section.key"; entries of
    /// array tables ([[shell]]) become "shell.<index>.key". Values keep their
    /// source text, minus string quotes.
    using ConfigMap = std::map<std::string, std::string>;

    /// Parses the flat TOML subset used by scenario files:
    /// [section], [[array_table]], key = value, '#' comments,
    /// numbers, booleans, "strings", and single-line [arrays].
    ConfigMap parse_config_text(std::string_view text, std::string_view origin = "<config>");

    /// Reads a scenario file. A ".json" path is taken as a run manifest and its
    /// "config" object is used.
    ConfigMap load_config_file(const std::filesystem::path &path);

    /// Renders a map back to the text format (sections in key order).
    std::string render_config_text(const ConfigMap &cfg);

    /// Environment variable consulted for a key: "si.seed" -> FDXTRACK__SI__SEED.
    std::string env_var_for_key(std::string_view key);

    /// Replaces every key whose environment variable is set. `getenv` is injectable for tests.
    void apply_env_overrides(ConfigMap &cfg,
                             const std::function<std::optional<std::string>(const std::string &)> &getenv = {});

    // Typed accessors; all throw ConfigError naming the key on malformed values.
    double config_double(const ConfigMap &cfg, const std::string &key);
    std::int64_t config_int(const ConfigMap &cfg, const std::string &key);
    std::uint64_t config_uint(const ConfigMap &cfg, const std::string &key);
    bool config_bool(const ConfigMap &cfg, const std::string &key);
    std::string config_string(const ConfigMap &cfg, const std::string &key);
    std::vector<std::int64_t> config_int_list(const ConfigMap &cfg, const std::string &key);
} // namespace fdx
