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

#include "meshflow/bench/st_search.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace meshflow::bench {

void STSearchConfig::validate() const {
    if (baseline_runs < 1) throw std::invalid_argument("baseline_runs must be at least 1");
    if (!(backpressure_factor > 1.0)) throw std::invalid_argument("backpressure_factor must exceed 1");
    if (!(run_duration_s > 0)) throw std::invalid_argument("run duration must be positive");
    if (rates.empty()) {
        if (!(start_rate > 0)) throw std::invalid_argument("start_rate must be positive");
        if (!(rate_step > 0)) throw std::invalid_argument("rate_step must be positive");
        if (max_rate < start_rate) throw std::invalid_argument("max_rate below start_rate");
    } else {
        for (std::size_t i = 0; i < rates.size(); ++i) {
            if (!(rates[i] > 0) || (i > 0 && rates[i] <= rates[i - 1])) {
                throw std::invalid_argument("explicit rates must be positive and strictly increasing");
            }
        }
    }
}

std::vector<double> STSearchConfig::schedule() const {
    if (!rates.empty()) return rates;
    std::vector<double> out;
    // Integer stepping avoids accumulating floating-point error.
    for (std::size_t i = 0;; ++i) {
        const double r = start_rate + static_cast<double>(i) * rate_step;
        if (r > max_rate * (1 + 1e-12)) break;
        out.push_back(r);
    }
    return out;
}

nlohmann::json STSearchConfig::to_json() const {
    return {{"start_rate", start_rate},       {"rate_step", rate_step},
            {"max_rate", max_rate},           {"run_duration_s", run_duration_s},
            {"baseline_runs", baseline_runs}, {"backpressure_factor", backpressure_factor},
            {"rates", rates}};
}

STSearchConfig STSearchConfig::from_json(const nlohmann::json& j) {
    STSearchConfig c;
    c.start_rate = j.value("start_rate", c.start_rate);
    c.rate_step = j.value("rate_step", c.rate_step);
    c.max_rate = j.value("max_rate", c.max_rate);
    c.run_duration_s = j.value("run_duration_s", c.run_duration_s);
    c.baseline_runs = j.value("baseline_runs", c.baseline_runs);
    c.backpressure_factor = j.value("backpressure_factor", c.backpressure_factor);
    c.rates = j.value("rates", std::vector<double>{});
    return c;
}

STResult find_sustainable_throughput(const STSearchConfig& config,
                                     const std::function<STSample(double rate)>& measure) {
    config.validate();
    STResult result;
    double baseline_sum = 0;
    int baseline_count = 0;
    for (const double rate : config.schedule()) {
        const STSample s = measure(rate);
        STPoint p{rate, s.mean_latency_ms, s.saturated, false};
        const bool have_baseline = baseline_count == config.baseline_runs;
        p.backpressure = s.saturated ||
                         (have_baseline && s.mean_latency_ms > config.backpressure_factor * result.baseline_latency_ms);
        result.points.push_back(p);
        if (p.backpressure) {
            if (result.points.size() == 1) {
                result.below_start = true;
            } else {
                result.sustainable_rate = result.points[result.points.size() - 2].rate;
            }
            return result;
        }
        if (!have_baseline) {
            baseline_sum += s.mean_latency_ms;
            ++baseline_count;
            result.baseline_latency_ms = baseline_sum / baseline_count;
        }
    }
    result.exhausted = true;
    if (!result.points.empty()) result.sustainable_rate = result.points.back().rate;
    return result;
}

void write_st_report_csv(const std::string& path, const STResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
    out << "rate,mean_latency_ms,saturated,backpressure\n";
    for (const auto& p : result.points) {
        out << fmt::format("{},{:.3f},{},{}\n", p.rate, p.mean_latency_ms, p.saturated ? 1 : 0, p.backpressure ? 1 : 0);
    }
    if (!out) throw std::runtime_error(fmt::format("error writing {}", path));
}

}  // namespace meshflow::bench
