#ifndef TXNET_STATS_HPP
#define TXNET_STATS_HPP

#include <span>
#include <vector>

namespace txnet::stats {

/**
 * Benjamini-Hochberg adjusted p-values.
 *
 * For p-values sorted ascending, q_(i) = min over j >= i of p_(j) * m / j,
 * clipped to 1 and returned in input order. Throws on any p outside [0, 1].
 */
std::vector<double> bh_adjust(std::span<const double> p);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_upper_tail(double x, double df);

/// Two-sided p-value of a t statistic.
double t_two_sided(double t, double df);

double t_quantile(double prob, double df);

double normal_quantile(double prob);

/// Sample quantile with linear interpolation between order statistics (R type 7).
double quantile(std::vector<double> values, double prob);

double median(std::vector<double> values);

/// Median absolute deviation about the median, scaled by 1.4826.
double mad(std::span<const double> values);

} // namespace txnet::stats

#endif
