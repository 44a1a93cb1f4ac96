#pragma once

#include <span>
#include <vector>

// Small descriptive-statistics helpers shared by the modules.
namespace factorbt::stats {

double mean(std::span<const double> x);
/// Median; even lengths average the two middle values. Empty input -> NaN.
double median(std::span<const double> x);
double population_stddev(std::span<const double> x, double mean);
/// Sample (N-1) standard deviation. Fewer than 2 values -> 0.
double sample_stddev(std::span<const double> x);

/// 1-based ranks with ties assigned their average rank.
std::vector<double> midranks(std::span<const double> x);

}  // namespace factorbt::stats
