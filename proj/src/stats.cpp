#include "txnet/stats.hpp"

#include "txnet/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace txnet::stats {

std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(Errc::PValueOutOfRange, "p-value outside [0,1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> q(m);
    double running = 1.0;
    const double md = static_cast<double>(m);
    for (std::size_t k = m; k-- > 0;) {
        const double cand = p[order[k]] * md / static_cast<double>(k + 1);
        running = std::min(running, cand);
        q[order[k]] = running;
    }
    return q;
}

double chi2_upper_tail(double x, double df) {
    if (x <= 0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double t_two_sided(double t, double df) {
    if (std::isnan(t)) {
        return 1.0;
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double t_quantile(double prob, double df) {
    boost::math::students_t dist(df);
    return boost::math::quantile(dist, prob);
}

double normal_quantile(double prob) {
    return boost::math::quantile(boost::math::normal(), prob);
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) {
        throw Error(Errc::InvalidArgument, "quantile of empty vector");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) {
    return quantile(std::move(values), 0.5);
}

double mad(std::span<const double> values) {
    const double med = median(std::vector<double>(values.begin(), values.end()));
    std::vector<double> dev;
    dev.reserve(values.size());
    for (double v : values) {
        dev.push_back(std::abs(v - med));
    }
    return 1.4826 * median(std::move(dev));
}

} // namespace txnet::stats
