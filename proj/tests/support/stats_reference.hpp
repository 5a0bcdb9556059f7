#pragma once

#include <vector>

// Textbook implementations kept independent of the production statistics:
// long double arithmetic, normal equations with Gauss-Jordan elimination and
// a continued-fraction incomplete beta instead of QR and Boost.
namespace agora::testkit::refstats {

struct TTest {
    double t, p, df;
};
TTest t_test(const std::vector<double>& a, const std::vector<double>& b, bool welch);

struct Ols {
    std::vector<double> estimate, std_error, t, p;
    double r_squared, adj_r_squared;
};
/// x without the intercept column; an intercept is always fitted.
Ols ols_with_intercept(const std::vector<double>& y, const std::vector<std::vector<double>>& x);

struct Pearson {
    double r, p;
};
Pearson pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided Student t tail probability.
double t_two_sided(double t, double df);

}  // namespace agora::testkit::refstats
