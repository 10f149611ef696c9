#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace synapseroute {

// Basic descriptive statistics with linear-interpolation quantiles.
struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation; 0 when count < 2
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

double mean_of(const std::vector<double>& values);

// Sample standard deviation (n - 1 denominator); 0 when fewer than 2 values.
double sample_sd(const std::vector<double>& values);

// Linear-interpolation quantile over an ascending-sorted vector, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

SummaryStats summarize(std::vector<double> values);

void to_json(nlohmann::json& j, const SummaryStats& s);

}  // namespace synapseroute
