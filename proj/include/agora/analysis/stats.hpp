#pragma once

#include <string>
#include <vector>

#include "agora/common/error.hpp"
#include "agora/common/json.hpp"

namespace agora::analysis {

struct TTestResult {
    double t = 0;
    double p = 1;  // two-sided
    double df = 0;
    double mean_a = 0, mean_b = 0;
    double sd_a = 0, sd_b = 0;  // sample standard deviations (n - 1)
    std::size_t n_a = 0, n_b = 0;
    bool welch = false;
};

/// Two-sample t-test; pooled variance unless `welch`. Throws TooFewSamples
/// when either side has fewer than two values and ZeroVariance when the
/// variance the statistic divides by is zero.
TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b, bool welch = false);

struct Coefficient {
    std::string name;
    double estimate = 0;
    double std_error = 0;
    double t = 0;
    double p = 1;
};

struct OlsResult {
    std::vector<Coefficient> coefficients;
    double r_squared = 0;
    double adj_r_squared = 0;
    double df_resid = 0;
    double sigma = 0;  // residual standard error
    std::vector<double> residuals;
};

/// Least squares of y on the columns of x (row-major, one row per sample)
/// via column-pivoted QR. r_squared is centered when some column is constant
/// (an intercept), uncentered otherwise. Throws DimensionMismatch when rows
/// disagree with y and RankDeficient when x lacks full column rank or leaves
/// no residual degrees of freedom.
OlsResult ols(const std::vector<double>& y, const std::vector<std::vector<double>>& x,
              std::vector<std::string> names = {});

/// Prepends a column of ones named "intercept".
std::vector<std::vector<double>> with_intercept(const std::vector<std::vector<double>>& x);

struct CorrelationResult {
    double r = 0;
    std::size_t n = 0;
    double p = 1;  // two-sided, t with n - 2 df; 1 when n = 2
};

/// Throws DimensionMismatch (sizes differ or below 2) and ConstantSeries.
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y);

json to_json(const TTestResult& r);
json to_json(const OlsResult& r);
json to_json(const CorrelationResult& r);

}  // namespace agora::analysis
