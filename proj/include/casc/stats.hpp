#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "casc/errors.hpp"
#include "casc/features.hpp"
#include "casc/rng.hpp"

namespace casc {

// ---------------------------------------------------------------------------
// Run tables: one row per solution.
// ---------------------------------------------------------------------------

struct RunRow {
    FeatureVector features;
    double pi = 0.0;
    std::string config_label;
    long long solution_index = 0;
};

class RunTable {
public:
    RunTable() = default;
    explicit RunTable(std::vector<RunRow> rows) : rows_(std::move(rows)) {}

    const std::vector<RunRow>& rows() const { return rows_; }
    std::vector<RunRow>& rows() { return rows_; }
    long long n_rows() const { return static_cast<long long>(rows_.size()); }

    // Values of one predictor column (exact feature column name).
    std::vector<double> column(const std::string& name) const {
        const auto& names = FeatureVector::names();
        const auto it = std::find_if(names.begin(), names.end(),
                                     [&](const char* n) { return name == n; });
        if (it == names.end()) throw DataError("unknown column: " + name);
        const auto idx = static_cast<std::size_t>(it - names.begin());
        std::vector<double> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.features.values()[idx]);
        return out;
    }

    std::vector<double> pis() const {
        std::vector<double> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.pi);
        return out;
    }

    // Copy without rows that carry an imputation flag.
    RunTable without_missing() const {
        std::vector<RunRow> keep;
        for (const auto& r : rows_)
            if (!r.features.nbr_missing && !r.features.step1_missing) keep.push_back(r);
        return RunTable(std::move(keep));
    }

private:
    std::vector<RunRow> rows_;
};

// ---------------------------------------------------------------------------
// Quartiles (linear interpolation, h = (n-1)q convention).
// ---------------------------------------------------------------------------

struct QuartilePair {
    double q1 = 0.0;
    double q3 = 0.0;
};

namespace detail {

inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const auto n = sorted.size();
    const double h = static_cast<double>(n - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

inline QuartilePair quartiles(const std::vector<double>& xs) {
    if (xs.size() < 4) throw DataError("quartiles need at least 4 observations");
    std::vector<double> s(xs);
    std::sort(s.begin(), s.end());
    return {detail::interpolated_quantile(s, 0.25), detail::interpolated_quantile(s, 0.75)};
}

// ---------------------------------------------------------------------------
// Two-sample Anderson-Darling (Scholz-Stephens k-sample form, k = 2,
// midrank tie handling).
// ---------------------------------------------------------------------------

struct AdResult {
    double a2 = 0.0;     // A2akN statistic
    double sigma = 0.0;  // null standard deviation of A2akN
    double t = 0.0;      // standardized statistic (A2 - 1) / sigma
    double p = 1.0;
    bool degenerate = false;   // all pooled values identical
    bool permutation = false;  // p from the small-sample permutation fallback
};

namespace detail {

// Standardized-statistic knots for significance levels
// {0.25, 0.10, 0.05, 0.025, 0.01, 0.005, 0.001} at k = 2, and the quadratic
// fit of log(level) against them. Constants frozen from a reference evaluation
// of the published interpolation.
inline constexpr double kAdKnotLo = 0.32542749262812368;
inline constexpr double kAdKnotHi = 6.5458606922965534;
inline constexpr double kAdFitC2 = 0.018198094574111472;
inline constexpr double kAdFitC1 = -1.0082265644652515;
inline constexpr double kAdFitC0 = -1.077770279820484;
// log-p tangent slope at the right knot, used to extrapolate monotonically
// (the quadratic itself turns around near T = 27.7).
inline constexpr double kAdRightSlope = -0.769977110300984;

inline double ad_p_from_t(double t) {
    const auto fit = [](double x) { return (kAdFitC2 * x + kAdFitC1) * x + kAdFitC0; };
    if (t <= kAdKnotLo) return 0.25; // cannot report beyond the largest tabulated level
    double logp;
    if (t >= kAdKnotHi)
        logp = fit(kAdKnotHi) + kAdRightSlope * (t - kAdKnotHi);
    else
        logp = fit(t);
    return std::max(std::exp(logp), 1e-300);
}

// A2akN and its null sd for two samples pooled into zs (unsorted ok).
inline std::pair<double, double> ad_statistic(const std::vector<double>& xs,
                                              const std::vector<double>& ys) {
    const std::size_t nx = xs.size(), ny = ys.size();
    const double N = static_cast<double>(nx + ny);
    std::vector<double> pooled(xs);
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::sort(pooled.begin(), pooled.end());

    // distinct pooled values and multiplicities
    std::vector<double> zstar;
    std::vector<double> mult;
    for (const double v : pooled) {
        if (zstar.empty() || v != zstar.back()) {
            zstar.push_back(v);
            mult.push_back(1.0);
        } else {
            mult.back() += 1.0;
        }
    }
    if (zstar.size() < 2) return {0.0, 0.0}; // degenerate, caller flags

    double a2 = 0.0;
    std::vector<double> sorted_sample;
    for (int which = 0; which < 2; ++which) {
        const auto& s = which == 0 ? xs : ys;
        const double ni = static_cast<double>(s.size());
        sorted_sample.assign(s.begin(), s.end());
        std::sort(sorted_sample.begin(), sorted_sample.end());
        double cum_f = 0.0;   // count of this sample strictly below current z
        double cum_all = 0.0; // count of pooled strictly below current z
        std::size_t lo = 0;
        double inner = 0.0;
        for (std::size_t j = 0; j < zstar.size(); ++j) {
            // every sample value appears in zstar, so consuming ties per
            // distinct value keeps the cursor exact
            const double z = zstar[j];
            std::size_t hi = lo;
            while (hi < sorted_sample.size() && sorted_sample[hi] == z) ++hi;
            const double fij = static_cast<double>(hi - lo);
            lo = hi;
            const double maij = cum_f + fij / 2.0;       // midrank count, this sample
            const double baj = cum_all + mult[j] / 2.0;  // midrank count, pooled
            const double denom = baj * (N - baj) - N * mult[j] / 4.0;
            const double num = N * maij - ni * baj;
            inner += mult[j] / N * num * num / denom;
            cum_f += fij;
            cum_all += mult[j];
        }
        a2 += inner / ni;
    }
    a2 *= (N - 1.0) / N;

    // Null variance (Scholz-Stephens), harmonic sums give O(N).
    const int Ni = static_cast<int>(nx + ny);
    const double k = 2.0;
    const double bigH = 1.0 / static_cast<double>(nx) + 1.0 / static_cast<double>(ny);
    std::vector<double> harm(static_cast<std::size_t>(Ni), 0.0); // harm[x] = H_x, x in [0, N-1]
    for (int x = 1; x < Ni; ++x) harm[static_cast<std::size_t>(x)] = harm[static_cast<std::size_t>(x - 1)] + 1.0 / x;
    const double hh = harm[static_cast<std::size_t>(Ni - 1)];
    double g = 0.0;
    for (int i = 1; i <= Ni - 2; ++i)
        g += (harm[static_cast<std::size_t>(Ni - 1)] - harm[static_cast<std::size_t>(i)]) / (Ni - i);
    const double a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * bigH;
    const double b = (2.0 * g - 4.0) * k * k + 8.0 * hh * k +
                     (2.0 * g - 14.0 * hh - 4.0) * bigH - 8.0 * hh + 4.0 * g - 6.0;
    const double c = (6.0 * hh + 2.0 * g - 2.0) * k * k + (4.0 * hh - 4.0 * g + 6.0) * k +
                     (2.0 * hh - 6.0) * bigH + 4.0 * hh;
    const double d = (2.0 * hh + 6.0) * k * k - 4.0 * hh * k;
    const double Nd = static_cast<double>(Ni);
    const double var = (((a * Nd + b) * Nd + c) * Nd + d) / ((Nd - 1.0) * (Nd - 2.0) * (Nd - 3.0));
    return {a2, std::sqrt(var)};
}

inline constexpr std::uint64_t kAdPermutationSeed = 0x41442d7065726d31ULL;

} // namespace detail

inline AdResult ad_two_sample(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() < 5 || ys.size() < 5)
        throw DataError("ad_two_sample needs at least 5 observations per sample");
    AdResult r;
    const auto [a2, sigma] = detail::ad_statistic(xs, ys);
    if (sigma == 0.0) {
        r.degenerate = true;
        r.p = 1.0;
        return r;
    }
    r.a2 = a2;
    r.sigma = sigma;
    r.t = (a2 - 1.0) / sigma;

    const std::size_t N = xs.size() + ys.size();
    if (N < 100) {
        // Small samples: permutation p-value (999 shuffles, deterministic).
        // The pool is sorted and split by the smaller sample size, so the
        // result is identical under swapped arguments.
        r.permutation = true;
        std::vector<double> pooled(xs);
        pooled.insert(pooled.end(), ys.begin(), ys.end());
        std::sort(pooled.begin(), pooled.end());
        const std::size_t n_small = std::min(xs.size(), ys.size());
        Rng rng(detail::kAdPermutationSeed);
        int at_least = 0;
        std::vector<double> px, py;
        for (int b = 0; b < 999; ++b) {
            for (std::size_t i = pooled.size() - 1; i > 0; --i)
                std::swap(pooled[i], pooled[rng.uniform_int(i + 1)]);
            px.assign(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(n_small));
            py.assign(pooled.begin() + static_cast<std::ptrdiff_t>(n_small), pooled.end());
            const auto [pa2, psigma] = detail::ad_statistic(px, py);
            if (psigma == 0.0 || pa2 >= a2) ++at_least; // degenerate shuffle counts as extreme
        }
        r.p = (1.0 + at_least) / 1000.0;
    } else {
        r.p = detail::ad_p_from_t(r.t);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Screening: split pi by each variable's outer quartiles, compare with AD.
// ---------------------------------------------------------------------------

struct ScreeningRow {
    std::string variable;
    AdResult ad;
    bool kept = false;
    bool degenerate = false; // no quartile split exists (zero variance / tiny groups)
};

struct ScreeningReport {
    double alpha = 0.10;
    std::vector<ScreeningRow> entries;

    std::vector<std::string> kept() const {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (e.kept) out.push_back(e.variable);
        return out;
    }
};

inline ScreeningReport screen_variables(const RunTable& table, double alpha = 0.10) {
    if (table.n_rows() < 40)
        throw DataError("screening needs at least 40 rows, got " + std::to_string(table.n_rows()));
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
    ScreeningReport rep;
    rep.alpha = alpha;
    const std::vector<double> pi = table.pis();
    for (const char* name : FeatureVector::names()) {
        ScreeningRow row;
        row.variable = name;
        const std::vector<double> x = table.column(name);
        const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        if (*mn == *mx) {
            row.degenerate = true;
            rep.entries.push_back(row);
            continue;
        }
        const QuartilePair q = quartiles(x);
        std::vector<double> lo, hi;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < q.q1) lo.push_back(pi[i]);
            else if (x[i] > q.q3) hi.push_back(pi[i]);
        }
        if (lo.size() < 5 || hi.size() < 5) {
            // heavily tied variable: outer-quartile groups too small to test
            row.degenerate = true;
            rep.entries.push_back(row);
            continue;
        }
        row.ad = ad_two_sample(lo, hi);
        row.kept = !row.ad.degenerate && row.ad.p < alpha;
        rep.entries.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Empirical logit response.
// ---------------------------------------------------------------------------

inline double empirical_logit(double pi, int n_agents) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw ValidationError("pi must be in [0, 1]");
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    const double k = static_cast<double>(std::llround(pi * n_agents));
    return std::log((k + 0.5) / (static_cast<double>(n_agents) - k + 0.5));
}

// ---------------------------------------------------------------------------
// OLS with analytic standard errors.
// ---------------------------------------------------------------------------

struct RegressionModel {
    std::vector<std::string> variables;  // excludes the intercept
    std::vector<double> coef;            // [0] = intercept
    std::vector<double> se;
    std::vector<double> tstat;
    std::vector<double> pval;            // two-sided, Student t with dof
    double r2 = 0.0;
    long long dof = 0;
    long long n_obs = 0;
    bool intercept_only = false;

    double max_p(std::size_t* argmax = nullptr) const {
        double worst = -1.0;
        for (std::size_t i = 1; i < pval.size(); ++i)
            if (pval[i] > worst) {
                worst = pval[i];
                if (argmax) *argmax = i - 1;
            }
        return worst;
    }
};

// Design matrix with a leading column of ones.
struct Design {
    std::vector<std::string> names; // predictor names, col i+1 of X
    Eigen::MatrixXd X;              // n x (names.size() + 1)
};

inline Design make_design(const RunTable& table, const std::vector<std::string>& names) {
    Design d;
    d.names = names;
    const auto n = table.n_rows();
    d.X.resize(n, static_cast<Eigen::Index>(names.size()) + 1);
    d.X.col(0).setOnes();
    for (std::size_t j = 0; j < names.size(); ++j) {
        const std::vector<double> col = table.column(names[j]);
        for (long long i = 0; i < n; ++i)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = col[static_cast<std::size_t>(i)];
    }
    return d;
}

inline RegressionModel ols_fit(const Design& design, const std::vector<double>& y) {
    const Eigen::Index n = design.X.rows();
    const Eigen::Index p = design.X.cols();
    if (static_cast<std::size_t>(n) != y.size())
        throw DataError("design and response lengths differ");
    if (n <= p) throw DataError("need more observations than parameters");

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    if (qr.rank() < p) {
        // name the columns QR pivoted past the numerical rank
        const auto& perm = qr.colsPermutation().indices();
        std::string cols;
        for (Eigen::Index i = qr.rank(); i < p; ++i) {
            const Eigen::Index orig = perm(i);
            if (!cols.empty()) cols += ", ";
            cols += orig == 0 ? "intercept" : design.names[static_cast<std::size_t>(orig - 1)];
        }
        throw DataError("design matrix is rank deficient; collinear columns: " + cols);
    }

    RegressionModel m;
    m.variables = design.names;
    m.n_obs = n;
    m.dof = n - p;

    Eigen::VectorXd beta = qr.solve(yv);
    Eigen::VectorXd resid = yv - design.X * beta;
    const double ssr = resid.squaredNorm();
    const double mean_y = yv.mean();
    const double sst = (yv.array() - mean_y).square().sum();
    m.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;

    const double s2 = ssr / static_cast<double>(m.dof);
    // cov(beta) = s2 * (X'X)^-1 = s2 * P R^-1 R^-T P'
    Eigen::MatrixXd rinv = qr.matrixR()
                               .topLeftCorner(p, p)
                               .triangularView<Eigen::Upper>()
                               .solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd cov_perm = rinv * rinv.transpose();
    const auto& perm = qr.colsPermutation().indices();
    Eigen::VectorXd var(p);
    for (Eigen::Index i = 0; i < p; ++i) var(perm(i)) = s2 * cov_perm(i, i);

    const boost::math::students_t tdist(static_cast<double>(m.dof));
    m.coef.resize(static_cast<std::size_t>(p));
    m.se.resize(static_cast<std::size_t>(p));
    m.tstat.resize(static_cast<std::size_t>(p));
    m.pval.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto k = static_cast<std::size_t>(i);
        m.coef[k] = beta(i);
        m.se[k] = std::sqrt(var(i));
        m.tstat[k] = m.se[k] > 0.0 ? m.coef[k] / m.se[k] : 0.0;
        m.pval[k] = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(m.tstat[k])));
    }
    m.intercept_only = design.names.empty();
    return m;
}

inline RegressionModel ols_fit(const RunTable& table, const std::vector<std::string>& names,
                               const std::vector<double>& y) {
    return ols_fit(make_design(table, names), y);
}

// ---------------------------------------------------------------------------
// Backward elimination (one variable at a time).
// ---------------------------------------------------------------------------

struct EliminationStep {
    std::string variable;
    double p_value = 0.0; // the p that caused the drop
};

struct EliminationResult {
    RegressionModel model;
    std::vector<EliminationStep> trace;
    bool reduced_to_intercept = false;
};

inline EliminationResult backward_eliminate(const RunTable& table,
                                            std::vector<std::string> names,
                                            const std::vector<double>& y,
                                            double alpha = 0.05) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
    EliminationResult res;
    while (true) {
        res.model = ols_fit(table, names, y);
        if (names.empty()) break;
        std::size_t worst = 0;
        const double p = res.model.max_p(&worst);
        if (p <= alpha) break;
        res.trace.push_back({names[worst], p});
        names.erase(names.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    res.reduced_to_intercept = res.model.variables.empty();
    return res;
}

// ---------------------------------------------------------------------------
// Bootstrap of a fitted model (row resampling with replacement).
// ---------------------------------------------------------------------------

struct BootstrapRow {
    std::string name; // "intercept" or variable name
    double point = 0.0;
    double boot_mean = 0.0;
    double boot_sd = 0.0;
    double rel_bias = 0.0; // (boot_mean - point) / point
};

struct BootstrapReport {
    std::vector<BootstrapRow> rows;
    int n_resamples = 0;
    int n_redraws = 0; // rank-deficient resamples that were redrawn
};

inline BootstrapReport bootstrap_model(const RunTable& table,
                                       const RegressionModel& fitted,
                                       const std::vector<double>& y,
                                       int n_resamples, std::uint64_t seed) {
    if (n_resamples < 1) throw ValidationError("bootstrap needs at least 1 resample");
    const Design d = make_design(table, fitted.variables);
    const auto n = static_cast<std::size_t>(d.X.rows());
    const auto p = static_cast<std::size_t>(d.X.cols());

    std::vector<std::vector<double>> draws(p);
    BootstrapReport rep;
    rep.n_resamples = n_resamples;

    Design rd;
    rd.names = d.names;
    rd.X.resize(d.X.rows(), d.X.cols());
    std::vector<double> ry(n);
    for (int b = 0; b < n_resamples; ++b) {
        Rng rng = substream(seed, static_cast<std::uint64_t>(b));
        for (int attempt = 0;; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto src = static_cast<Eigen::Index>(rng.uniform_int(n));
                rd.X.row(static_cast<Eigen::Index>(i)) = d.X.row(src);
                ry[i] = y[static_cast<std::size_t>(src)];
            }
            try {
                const RegressionModel m = ols_fit(rd, ry);
                for (std::size_t j = 0; j < p; ++j) draws[j].push_back(m.coef[j]);
                break;
            } catch (const DataError&) {
                ++rep.n_redraws; // rank-deficient resample: redraw from the same stream
                if (attempt > 200)
                    throw DataError("bootstrap could not find a full-rank resample");
            }
        }
    }

    for (std::size_t j = 0; j < p; ++j) {
        BootstrapRow row;
        row.name = j == 0 ? "intercept" : fitted.variables[j - 1];
        row.point = fitted.coef[j];
        const auto& v = draws[j];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (const double x : v) ss += (x - mean) * (x - mean);
        row.boot_mean = mean;
        row.boot_sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        row.rel_bias = row.point != 0.0 ? (mean - row.point) / row.point
                                        : std::numeric_limits<double>::quiet_NaN();
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// LOESS nonlinearity screen (degree 1, tricube weights).
// ---------------------------------------------------------------------------

struct LoessResult {
    std::vector<double> fitted; // at the input points, input order
    double score = 0.0;         // 1 - SSR(loess) / SSR(line)
    bool flagged = false;
};

inline LoessResult loess_screen(const std::vector<double>& x, const std::vector<double>& y,
                                double span = 0.75, double flag_threshold = 0.05) {
    const std::size_t n = x.size();
    if (n < 20) throw DataError("loess_screen needs at least 20 points");
    if (y.size() != n) throw DataError("x and y lengths differ");
    if (!(span > 0.0 && span <= 1.0)) throw ValidationError("span must be in (0, 1]");
    const auto q = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
    if (q < 2) throw ValidationError("span too small for local fits");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    LoessResult res;
    res.fitted.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        const double x0 = x[i];
        // window of the q nearest x's: slide [lo, hi) along the sorted order
        std::size_t lo = pos >= q ? pos - q : 0;
        std::size_t hi = std::min(n, pos + q + 1);
        // narrow to exactly q by dropping the farther end
        while (hi - lo > q) {
            const double dl = x0 - x[order[lo]];
            const double dr = x[order[hi - 1]] - x0;
            if (dl > dr) ++lo;
            else --hi;
        }
        double dmax = std::max(x0 - x[order[lo]], x[order[hi - 1]] - x0);
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (std::size_t k = lo; k < hi; ++k) {
            const std::size_t j = order[k];
            const double dist = std::abs(x[j] - x0);
            double w;
            if (dmax == 0.0) {
                w = 1.0; // all window points coincide with x0
            } else {
                const double u = dist / dmax;
                const double t = 1.0 - u * u * u;
                w = t * t * t;
            }
            if (w <= 0.0) continue;
            sw += w;
            swx += w * x[j];
            swy += w * y[j];
            swxx += w * x[j] * x[j];
            swxy += w * x[j] * y[j];
        }
        const double det = sw * swxx - swx * swx;
        if (det > 1e-12 * std::max(1.0, sw * swxx)) {
            const double slope = (sw * swxy - swx * swy) / det;
            const double icept = (swy - slope * swx) / sw;
            res.fitted[i] = icept + slope * x0;
        } else {
            res.fitted[i] = swy / sw; // degenerate window: weighted mean
        }
    }

    // global least-squares line for the score denominator
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double nd = static_cast<double>(n);
    const double det = nd * sxx - sx * sx;
    double ssr_line = 0.0, ssr_loess = 0.0;
    double slope = 0.0, icept = sy / nd;
    if (det > 0.0) {
        slope = (nd * sxy - sx * sy) / det;
        icept = (sy - slope * sx) / nd;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double rl = y[i] - (icept + slope * x[i]);
        const double rs = y[i] - res.fitted[i];
        ssr_line += rl * rl;
        ssr_loess += rs * rs;
    }
    res.score = ssr_line > 1e-12 ? std::max(0.0, 1.0 - ssr_loess / ssr_line) : 0.0;
    res.flagged = res.score > flag_threshold;
    return res;
}

} // namespace casc
