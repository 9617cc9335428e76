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

#include "meshflow/cli/run_config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>
#include <sstream>

namespace meshflow::cli {

void RunConfig::validate() const {
    if (world_size < 1 || world_size > kMaxWorldSize) {
        throw UsageError(fmt::format("--world-size must be in [1, {}]", kMaxWorldSize));
    }
    if (backend == Backend::kSocket) {
        if (!rank) throw UsageError("--rank is required with the socket backend");
        if (*rank < 0 || *rank >= world_size) throw UsageError(fmt::format("--rank {} outside world of {}", *rank, world_size));
        if (peers_file.empty()) throw UsageError("--peers is required with the socket backend");
        if (st_search) throw UsageError("--st-search runs in-process only");
    } else if (rank) {
        throw UsageError("--rank only applies to the socket backend");
    }
    if (connect_timeout_ms <= 0 || drain_timeout_ms <= 0) throw UsageError("timeouts must be positive");
    try {
        generator.validate();
        if (st_search) st.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j{{"world_size", world_size},
                     {"backend", std::string(meshflow::to_string(backend))},
                     {"peers_file", peers_file},
                     {"workload", std::string(bench::to_string(workload))},
                     {"pipelining", pipelining},
                     {"generator", generator.to_json()},
                     {"output_dir", output_dir},
                     {"connect_timeout_ms", connect_timeout_ms},
                     {"drain_timeout_ms", drain_timeout_ms},
                     {"st_search", st_search},
                     {"st", st.to_json()},
                     {"log_level", log_level}};
    j["rank"] = rank ? nlohmann::json(*rank) : nlohmann::json(nullptr);
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.world_size = j.value("world_size", c.world_size);
        c.backend = parse_backend(j.value("backend", std::string(meshflow::to_string(c.backend))));
        if (j.contains("rank") && !j.at("rank").is_null()) c.rank = j.at("rank").get<int>();
        c.peers_file = j.value("peers_file", c.peers_file);
        c.workload = bench::parse_workload(j.value("workload", std::string(bench::to_string(c.workload))));
        c.pipelining = j.value("pipelining", c.pipelining);
        if (j.contains("generator")) c.generator = bench::GeneratorConfig::from_json(j.at("generator"));
        c.output_dir = j.value("output_dir", c.output_dir);
        c.connect_timeout_ms = j.value("connect_timeout_ms", c.connect_timeout_ms);
        c.drain_timeout_ms = j.value("drain_timeout_ms", c.drain_timeout_ms);
        c.st_search = j.value("st_search", c.st_search);
        if (j.contains("st")) c.st = bench::STSearchConfig::from_json(j.at("st"));
        c.log_level = j.value("log_level", c.log_level);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(fmt::format("malformed config: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw UsageError(fmt::format("malformed config: {}", e.what()));
    }
    return c;
}

std::vector<RankAddress> load_peers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError(fmt::format("cannot open peers file {}", path));
    std::vector<RankAddress> peers;
    std::set<int> ranks;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        RankAddress a;
        if (!(ss >> a.rank)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw UsageError(fmt::format("{}:{}: expected 'rank host:port'", path, lineno));
        }
        std::string extra;
        if (!(ss >> a.endpoint) || (ss >> extra) || a.endpoint.find(':') == std::string::npos) {
            throw UsageError(fmt::format("{}:{}: expected 'rank host:port'", path, lineno));
        }
        if (!ranks.insert(a.rank).second) throw UsageError(fmt::format("{}:{}: rank {} listed twice", path, lineno, a.rank));
        peers.push_back(std::move(a));
    }
    return peers;
}

}  // namespace meshflow::cli
