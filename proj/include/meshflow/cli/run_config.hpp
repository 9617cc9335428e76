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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshflow/bench/generator.hpp"
#include "meshflow/bench/st_search.hpp"
#include "meshflow/bench/workload.hpp"
#include "meshflow/transport/transport.hpp"

namespace meshflow::cli {

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int world_size = 1;
    Backend backend = Backend::kInProcess;
    std::optional<int> rank;
    std::string peers_file;
    bench::Workload workload = bench::Workload::kSwa;
    bool pipelining = false;
    bench::GeneratorConfig generator;
    std::string output_dir = "out";
    int connect_timeout_ms = 10'000;
    int drain_timeout_ms = 30'000;
    bool st_search = false;
    bench::STSearchConfig st;
    std::string log_level = "warn";

    /// Throws UsageError when fields contradict each other.
    void validate() const;

    nlohmann::json to_json() const;
    /// Throws UsageError on malformed input.
    static RunConfig from_json(const nlohmann::json& j);
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// One `rank host:port` per line; blank lines and `#` comments ignored. Throws UsageError.
std::vector<RankAddress> load_peers(const std::string& path);

}  // namespace meshflow::cli
