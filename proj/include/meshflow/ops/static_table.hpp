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

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace meshflow::ops {

/// Immutable key -> value lookup used by StaticJoin. Every rank loads the same table.
class StaticTable {
  public:
    StaticTable() = default;
    explicit StaticTable(std::unordered_map<std::uint64_t, std::uint64_t> entries) : entries_(std::move(entries)) {}

    /// Two-column `key,value` CSV; an optional non-numeric header line is skipped.
    /// Throws std::runtime_error naming the file and line on malformed input.
    static StaticTable load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

    /// `[[k, v], ...]`
    static StaticTable from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    std::optional<std::uint64_t> lookup(std::uint64_t key) const;
    std::size_t size() const noexcept { return entries_.size(); }

  private:
    std::unordered_map<std::uint64_t, std::uint64_t> entries_;
};

}  // namespace meshflow::ops
