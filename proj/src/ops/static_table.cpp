/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include "meshflow/ops/static_table.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace meshflow::ops {

namespace {

bool parse_u64(std::string_view s, std::uint64_t& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

StaticTable StaticTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open table file {}", path));
    std::unordered_map<std::uint64_t, std::uint64_t> entries;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        std::uint64_t k = 0;
        std::uint64_t v = 0;
        const bool ok = comma != std::string::npos && parse_u64(std::string_view(line).substr(0, comma), k) &&
                        parse_u64(std::string_view(line).substr(comma + 1), v);
        if (!ok) {
            if (lineno == 1) continue;  // header
            throw std::runtime_error(fmt::format("{}:{}: expected 'key,value'", path, lineno));
        }
        entries[k] = v;
    }
    return StaticTable(std::move(entries));
}

void StaticTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write table file {}", path));
    out << "key,value\n";
    for (const auto& [k, v] : entries_) out << k << ',' << v << '\n';
}

StaticTable StaticTable::from_json(const nlohmann::json& j) {
    std::unordered_map<std::uint64_t, std::uint64_t> entries;
    try {
        for (const auto& row : j) entries[row.at(0).get<std::uint64_t>()] = row.at(1).get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(fmt::format("malformed table: {}", e.what()));
    }
    return StaticTable(std::move(entries));
}

nlohmann::json StaticTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [k, v] : entries_) rows.push_back({k, v});
    return rows;
}

std::optional<std::uint64_t> StaticTable::lookup(std::uint64_t key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

}  // namespace meshflow::ops
