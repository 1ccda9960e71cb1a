#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

// Small statistics kit used by the estimators and the test suites:
// Wilson intervals, Kolmogorov-Smirnov uniformity, chi-square tail
// probabilities, total-variation distance, weighted least squares,
// and a Wald-Wolfowitz runs test.

namespace percolab {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::int64_t successes, std::int64_t trials,
                                double z = 1.959963984540054) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("wilson_interval: successes out of range");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Regularized upper incomplete gamma Q(a, x); series for x < a+1,
// continued fraction otherwise.
inline double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Lentz continued fraction for Q.
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double stat, int df) {
    if (df <= 0) throw std::invalid_argument("chi_square_pvalue: df must be positive");
    return gamma_q(0.5 * df, 0.5 * stat);
}

// Kolmogorov distribution tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 l^2).
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
    double d_stat = 0.0;
    double p_value = 1.0;
};

// One-sample KS test against Uniform[0,1).  Sorts a copy of the sample.
inline KsResult ks_uniform(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks_uniform: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = sample[i];
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(cdf - lo), std::fabs(hi - cdf)));
    }
    const double rootn = std::sqrt(n);
    const double lambda = (rootn + 0.12 + 0.11 / rootn) * d;
    return {d, kolmogorov_q(lambda)};
}

// Total variation distance between two discrete distributions given as maps.
template <class K>
double total_variation(const std::map<K, double>& a, const std::map<K, double>& b) {
    double tv = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            tv += std::fabs(ia->second);
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            tv += std::fabs(ib->second);
            ++ib;
        } else {
            tv += std::fabs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    return 0.5 * tv;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;   // from the supplied per-point sigmas
    int points = 0;
};

// Weighted least squares y = a + b x with weights 1/sigma^2.
inline LineFit fit_line_weighted(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 const std::vector<double>& sigma) {
    if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
        throw std::invalid_argument("fit_line_weighted: need >=2 points with matching sizes");
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sigma[i] <= 0) throw std::invalid_argument("fit_line_weighted: sigma must be positive");
        const double w = 1.0 / (sigma[i] * sigma[i]);
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = s * sxx - sx * sx;
    if (det <= 0) throw std::invalid_argument("fit_line_weighted: degenerate x values");
    LineFit f;
    f.slope = (s * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.slope_se = std::sqrt(s / det);
    f.points = static_cast<int>(x.size());
    return f;
}

struct RunsResult {
    std::int64_t runs = 0;
    std::int64_t ones = 0;
    std::int64_t zeros = 0;
    double z = 0.0;  // normal score; |z| large means serial dependence
};

// Wald-Wolfowitz runs test on a binary sequence.
inline RunsResult runs_test(const std::vector<std::uint8_t>& seq) {
    RunsResult r;
    if (seq.empty()) return r;
    r.runs = 1;
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i] != seq[i - 1]) ++r.runs;
    for (auto v : seq) (v ? r.ones : r.zeros)++;
    const double n1 = static_cast<double>(r.ones), n2 = static_cast<double>(r.zeros);
    if (n1 == 0 || n2 == 0) return r;  // degenerate: z stays 0
    const double n = n1 + n2;
    const double mu = 2.0 * n1 * n2 / n + 1.0;
    const double var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    if (var > 0) r.z = (static_cast<double>(r.runs) - mu) / std::sqrt(var);
    return r;
}

}  // namespace percolab
