#pragma once

#include <vector>

namespace stablab {

double mean(const std::vector<double>& xs);
/// Sample standard deviation (divisor M−1); 0 for fewer than two values.
double sample_sd(const std::vector<double>& xs);
/// Half-width of the normal-approximation 95% interval, 1.96·sd/√M.
double ci95_half_width(const std::vector<double>& xs);
/// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(const std::vector<double>& xs);
/// Pearson correlation of the average ranks; 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stablab
