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

#include "fdx/config.hpp"

#include "fdx/common.hpp"
#include "fdx/io_util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace fdx
{
    namespace
    {
        std::string_view trim(std::string_view s)
        {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.remove_prefix(1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
                s.remove_suffix(1);
            return s;
        }

        // Strips a trailing comment that is not inside a quoted string.
        std::string_view strip_comment(std::string_view line)
        {
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i)
            {
                if (line[i] == '"')
                    quoted = !quoted;
                else if (line[i] == '#' && !quoted)
                    return line.substr(0, i);
            }
            return line;
        }

        bool valid_name(std::string_view s)
        {
            return !s.empty() && std::all_of(s.begin(), s.end(), [](char c)
                                             { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
        }

        const std::string &require(const ConfigMap &cfg, const std::string &key)
        {
            auto it = cfg.find(key);
            if (it == cfg.end())
                throw ConfigError(fmt::format("missing config key '{}'", key));
            return it->second;
        }

        template <typename T>
        T parse_number(const std::string &key, std::string_view text)
        {
            text = trim(text);
            T value{};
            const char *first = text.data();
            if (!text.empty() && text.front() == '+')
                ++first;
            auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
                throw ConfigError(fmt::format("config key '{}': '{}' is not a valid number", key, text));
            return value;
        }
    } // namespace

    ConfigMap parse_config_text(std::string_view text, std::string_view origin)
    {
        ConfigMap cfg;
        std::string prefix;
        std::map<std::string, int> table_counts;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const std::size_t nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;

            std::string_view line = trim(strip_comment(raw));
            if (line.empty())
                continue;
            auto fail = [&](std::string_view what)
            { return ConfigError(fmt::format("{}:{}: {}", origin, line_no, what)); };

            if (line.starts_with("[["))
            {
                if (!line.ends_with("]]"))
                    throw fail("unterminated array-table header");
                const std::string name(trim(line.substr(2, line.size() - 4)));
                if (!valid_name(name))
                    throw fail(fmt::format("invalid table name '{}'", name));
                prefix = fmt::format("{}.{}.", name, table_counts[name]++);
                continue;
            }
            if (line.front() == '[')
            {
                if (line.back() != ']')
                    throw fail("unterminated section header");
                const std::string name(trim(line.substr(1, line.size() - 2)));
                if (!valid_name(name))
                    throw fail(fmt::format("invalid section name '{}'", name));
                prefix = name + ".";
                continue;
            }

            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw fail("expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            std::string_view value = trim(line.substr(eq + 1));
            if (!valid_name(key))
                throw fail(fmt::format("invalid key '{}'", key));
            if (prefix.empty())
                throw fail(fmt::format("key '{}' appears outside any section", key));
            if (value.empty())
                throw fail(fmt::format("key '{}' has no value", key));
            if (value.front() == '"')
            {
                if (value.size() < 2 || value.back() != '"')
                    throw fail("unterminated string");
                value = value.substr(1, value.size() - 2);
            }
            else if (value.front() == '[' && value.back() != ']')
                throw fail("unterminated array (arrays must fit on one line)");

            const std::string full = prefix + key;
            if (cfg.contains(full))
                throw fail(fmt::format("duplicate key '{}'", full));
            cfg[full] = std::string(value);
        }
        return cfg;
    }

    ConfigMap load_config_file(const std::filesystem::path &path)
    {
        const std::string text = read_file(path);
        if (path.extension() == ".json")
        {
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(text);
            }
            catch (const nlohmann::json::exception &e)
            {
                throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
            }
            if (!j.contains("config") || !j["config"].is_object())
                throw ConfigError(fmt::format("{}: manifest has no 'config' object", path.string()));
            ConfigMap cfg;
            for (const auto &[k, v] : j["config"].items())
            {
                if (!v.is_string())
                    throw ConfigError(fmt::format("{}: manifest value for '{}' must be a string", path.string(), k));
                cfg[k] = v.get<std::string>();
            }
            return cfg;
        }
        return parse_config_text(text, path.string());
    }

    std::string render_config_text(const ConfigMap &cfg)
    {
        // Group by header; array-table entries are "name.index.key".
        std::map<std::string, std::vector<std::pair<std::string, std::string>>> plain;
        std::map<std::string, std::map<int, std::vector<std::pair<std::string, std::string>>>> tables;
        for (const auto &[full, value] : cfg)
        {
            const std::size_t d1 = full.find('.');
            const std::size_t d2 = full.find('.', d1 + 1);
            if (d2 != std::string::npos)
            {
                const std::string name = full.substr(0, d1);
                const int idx = std::stoi(full.substr(d1 + 1, d2 - d1 - 1));
                tables[name][idx].emplace_back(full.substr(d2 + 1), value);
            }
            else
                plain[full.substr(0, d1)].emplace_back(full.substr(d1 + 1), value);
        }
        auto render_value = [](const std::string &v)
        {
            if (v == "true" || v == "false" || (!v.empty() && v.front() == '['))
                return v;
            double d{};
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
            if (ec == std::errc() && ptr == v.data() + v.size())
                return v;
            return "\"" + v + "\"";
        };
        std::ostringstream out;
        for (const auto &[section, entries] : plain)
        {
            out << "[" << section << "]\n";
            for (const auto &[k, v] : entries)
                out << k << " = " << render_value(v) << "\n";
            out << "\n";
        }
        for (const auto &[name, rows] : tables)
            for (const auto &[idx, entries] : rows)
            {
                out << "[[" << name << "]]\n";
                for (const auto &[k, v] : entries)
                    out << k << " = " << render_value(v) << "\n";
                out << "\n";
            }
        return out.str();
    }

    std::string env_var_for_key(std::string_view key)
    {
        std::string out = "FDXTRACK__";
        for (char c : key)
        {
            if (c == '.')
                out += "__";
            else if (c == '-')
                out += '_';
            else
                out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        return out;
    }

    void apply_env_overrides(ConfigMap &cfg,
                             const std::function<std::optional<std::string>(const std::string &)> &getenv)
    {
        for (auto &[key, value] : cfg)
        {
            const std::string var = env_var_for_key(key);
            std::optional<std::string> v;
            if (getenv)
                v = getenv(var);
            else if (const char *e = std::getenv(var.c_str()))
                v = std::string(e);
            if (v)
                value = *v;
        }
    }

    double config_double(const ConfigMap &cfg, const std::string &key)
    {
        const double v = parse_number<double>(key, require(cfg, key));
        if (!std::isfinite(v))
            throw ConfigError(fmt::format("config key '{}' must be finite", key));
        return v;
    }

    std::int64_t config_int(const ConfigMap &cfg, const std::string &key)
    {
        return parse_number<std::int64_t>(key, require(cfg, key));
    }

    std::uint64_t config_uint(const ConfigMap &cfg, const std::string &key)
    {
        return parse_number<std::uint64_t>(key, require(cfg, key));
    }

    bool config_bool(const ConfigMap &cfg, const std::string &key)
    {
        const std::string_view v = trim(require(cfg, key));
        if (v == "true")
            return true;
        if (v == "false")
            return false;
        throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
    }

    std::string config_string(const ConfigMap &cfg, const std::string &key) { return require(cfg, key); }

    std::vector<std::int64_t> config_int_list(const ConfigMap &cfg, const std::string &key)
    {
        std::string_view v = trim(require(cfg, key));
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError(fmt::format("config key '{}' must be an array like [1, 2]", key));
        v = trim(v.substr(1, v.size() - 2));
        std::vector<std::int64_t> out;
        if (v.empty())
            return out;
        for (const auto &item : split_csv_line(v))
            out.push_back(parse_number<std::int64_t>(key, item));
        return out;
    }
} // namespace fdx
