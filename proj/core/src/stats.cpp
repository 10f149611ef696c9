#include "synapseroute/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "synapseroute/errors.hpp"

namespace synapseroute {

double mean_of(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("mean of empty vector");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double m = mean_of(values);
    double sum_sq = 0.0;
    for (double v : values) sum_sq += (v - m) * (v - m);
    return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw EmptyInput("quantile of empty vector");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile p must lie in [0, 1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void to_json(nlohmann::json& j, const SummaryStats& s) {
    j = nlohmann::json{{"count", s.count},   {"mean", s.mean}, {"sd", s.sd},
                       {"min", s.min},       {"q25", s.q25},   {"median", s.median},
                       {"q75", s.q75},       {"max", s.max}};
}

SummaryStats summarize(std::vector<double> values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.mean = mean_of(values);
    s.sd = sample_sd(values);
    s.min = values.front();
    s.q25 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q75 = quantile_sorted(values, 0.75);
    s.max = values.back();
    return s;
}

}  // namespace synapseroute
