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

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace meshflow::bench {

struct STSearchConfig {
    double start_rate = 10'000;
    double rate_step = 10'000;
    double max_rate = 200'000;
    double run_duration_s = 30;
    int baseline_runs = 3;
    double backpressure_factor = 4.0;
    /// When non-empty, these rates are tried in order instead of start/step/max.
    std::vector<double> rates;

    /// Throws std::invalid_argument.
    void validate() const;
    std::vector<double> schedule() const;

    nlohmann::json to_json() const;
    static STSearchConfig from_json(const nlohmann::json& j);
    friend bool operator==(const STSearchConfig&, const STSearchConfig&) = default;
};

struct STSample {
    double mean_latency_ms = 0;
    /// The run itself showed overload (lost windows, unfinished run), regardless of latency.
    bool saturated = false;
};

struct STPoint {
    double rate = 0;
    double mean_latency_ms = 0;
    bool saturated = false;
    bool backpressure = false;
};

struct STResult {
    /// Highest rate before back-pressure; empty when the first rate already showed it.
    std::optional<double> sustainable_rate;
    bool below_start = false;
    /// No back-pressure anywhere in the schedule.
    bool exhausted = false;
    double baseline_latency_ms = 0;
    std::vector<STPoint> points;
};

/// Measures latency at increasing rates. The baseline is the mean latency of the first
/// baseline_runs rates; the first rate whose latency exceeds backpressure_factor * baseline (or
/// that reports saturation) is back-pressure, and the rate before it is returned.
STResult find_sustainable_throughput(const STSearchConfig& config,
                                     const std::function<STSample(double rate)>& measure);

/// Header: rate,mean_latency_ms,saturated,backpressure
void write_st_report_csv(const std::string& path, const STResult& result);

}  // namespace meshflow::bench
