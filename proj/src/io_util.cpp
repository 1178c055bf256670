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

#include "fdx/io_util.hpp"

#include "fdx/common.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <system_error>

namespace fs = std::filesystem;

namespace fdx
{
    namespace
    {
        fs::path temp_sibling(const fs::path &path) { return fs::path(path.string() + ".tmp"); }

        void write_temp(const fs::path &tmp, std::string_view contents, const fs::path &target)
        {
            std::error_code ec;
            if (target.has_parent_path())
                fs::create_directories(target.parent_path(), ec);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError(fmt::format("cannot open '{}' for writing", target.string()));
            out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
            out.close();
            if (!out)
                throw IoError(fmt::format("write to '{}' failed", target.string()));
        }
    } // namespace

    void write_file_atomic(const fs::path &path, std::string_view contents)
    {
        write_files_atomic({{path, std::string(contents)}});
    }

    void write_files_atomic(const std::vector<std::pair<fs::path, std::string>> &files)
    {
        std::vector<fs::path> temps;
        auto cleanup = [&temps]
        {
            std::error_code ec;
            for (const auto &t : temps)
                fs::remove(t, ec);
        };
        try
        {
            for (const auto &[path, body] : files)
            {
                temps.push_back(temp_sibling(path));
                write_temp(temps.back(), body, path);
            }
            for (std::size_t i = 0; i < files.size(); ++i)
            {
                std::error_code ec;
                fs::rename(temps[i], files[i].first, ec);
                if (ec)
                    throw IoError(fmt::format("cannot move output into '{}': {}", files[i].first.string(), ec.message()));
            }
        }
        catch (...)
        {
            cleanup();
            throw;
        }
    }

    std::string read_file(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::vector<std::string> split_csv_line(std::string_view line)
    {
        std::vector<std::string> out;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        std::size_t start = 0;
        while (true)
        {
            const std::size_t comma = line.find(',', start);
            out.emplace_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return out;
    }
} // namespace fdx
