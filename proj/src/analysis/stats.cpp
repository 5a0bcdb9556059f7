#include "agora/analysis/stats.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace agora::analysis {

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

/// Sum of squared deviations, two-pass.
double ss(const std::vector<double>& v, double m) {
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

double two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0;
    if (t == 0) return 1;
    boost::math::students_t dist(df);
    return std::min(1.0, 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

}  // namespace

TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b, bool welch) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::TooFewSamples, "each group needs at least two samples");
    TTestResult r;
    r.welch = welch;
    r.n_a = a.size();
    r.n_b = b.size();
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double ssa = ss(a, r.mean_a), ssb = ss(b, r.mean_b);
    const double va = ssa / (na - 1), vb = ssb / (nb - 1);
    r.sd_a = std::sqrt(va);
    r.sd_b = std::sqrt(vb);
    double se2 = 0;
    if (welch) {
        se2 = va / na + vb / nb;
        if (se2 == 0) throw Error(ErrorCode::ZeroVariance, "both groups are constant");
        r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
    } else {
        r.df = na + nb - 2;
        const double pooled = (ssa + ssb) / r.df;
        if (pooled == 0) throw Error(ErrorCode::ZeroVariance, "pooled variance is zero");
        se2 = pooled * (1 / na + 1 / nb);
    }
    r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.p = two_sided_p(r.t, r.df);
    return r;
}

std::vector<std::vector<double>> with_intercept(const std::vector<std::vector<double>>& x) {
    auto out = x;
    for (auto& row : out) row.insert(row.begin(), 1.0);
    return out;
}

OlsResult ols(const std::vector<double>& y, const std::vector<std::vector<double>>& x, std::vector<std::string> names) {
    const auto n = static_cast<Eigen::Index>(y.size());
    if (x.size() != y.size() || x.empty()) throw Error(ErrorCode::DimensionMismatch, "x needs one row per y value");
    const auto k = static_cast<Eigen::Index>(x.front().size());
    if (k == 0) throw Error(ErrorCode::DimensionMismatch, "x has no columns");
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = x[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != k) throw Error(ErrorCode::DimensionMismatch, "ragged x");
        for (Eigen::Index j = 0; j < k; ++j) X(i, j) = row[static_cast<std::size_t>(j)];
        Y(i) = y[static_cast<std::size_t>(i)];
    }
    if (n <= k) throw Error(ErrorCode::RankDeficient, "no residual degrees of freedom");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw Error(ErrorCode::RankDeficient, "x does not have full column rank");

    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd resid = Y - X * beta;
    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_unscaled = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();

    OlsResult r;
    r.df_resid = static_cast<double>(n - k);
    const double rss = resid.squaredNorm();
    const double s2 = rss / r.df_resid;
    r.sigma = std::sqrt(s2);

    bool has_constant = false;
    for (Eigen::Index j = 0; j < k; ++j) has_constant |= (X.col(j).array() == X(0, j)).all() && X(0, j) != 0;
    const double ybar = Y.mean();
    const double tss = has_constant ? (Y.array() - ybar).square().sum() : Y.squaredNorm();
    r.r_squared = tss == 0 ? 1.0 : 1 - rss / tss;
    const double dof_total = has_constant ? static_cast<double>(n - 1) : static_cast<double>(n);
    r.adj_r_squared = 1 - (1 - r.r_squared) * dof_total / r.df_resid;

    for (Eigen::Index j = 0; j < k; ++j) {
        Coefficient c;
        c.name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : "x" + std::to_string(j);
        c.estimate = beta(j);
        c.std_error = std::sqrt(s2 * cov_unscaled(j, j));
        c.t = c.std_error == 0 ? (c.estimate == 0 ? 0 : INFINITY) : c.estimate / c.std_error;
        c.p = two_sided_p(c.t, r.df_resid);
        r.coefficients.push_back(c);
    }
    r.residuals.assign(resid.data(), resid.data() + n);
    return r;
}

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need two equal series of length >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) throw Error(ErrorCode::ConstantSeries, "a series is constant");
    CorrelationResult r;
    r.n = x.size();
    r.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (r.n > 2) {
        const double df = static_cast<double>(r.n) - 2;
        r.p = std::fabs(r.r) == 1 ? 0 : two_sided_p(r.r * std::sqrt(df / (1 - r.r * r.r)), df);
    }
    return r;
}

json to_json(const TTestResult& r) {
    return {{"t", r.t},           {"p", r.p},       {"df", r.df},     {"mean_a", r.mean_a}, {"mean_b", r.mean_b},
            {"sd_a", r.sd_a},     {"sd_b", r.sd_b}, {"n_a", r.n_a},   {"n_b", r.n_b},       {"welch", r.welch}};
}

json to_json(const OlsResult& r) {
    json coefs = json::array();
    for (auto& c : r.coefficients)
        coefs.push_back({{"name", c.name}, {"estimate", c.estimate}, {"std_error", c.std_error}, {"t", c.t}, {"p", c.p}});
    return {{"coefficients", coefs}, {"r_squared", r.r_squared}, {"adj_r_squared", r.adj_r_squared},
            {"df_resid", r.df_resid}, {"sigma", r.sigma}};
}

json to_json(const CorrelationResult& r) { return {{"r", r.r}, {"n", r.n}, {"p", r.p}}; }

}  // namespace agora::analysis
