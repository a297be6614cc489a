#include "pmod/sequence.hpp"

#include "pmod/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace pmod {

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::hyperbolic:
        return "hyperbolic";
    case Verdict::parabolic:
        return "parabolic";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

const ModelFit* SequenceAnalysis::fit(const std::string& name) const
{
    for (const auto& f : fits)
        if (f.name == name)
            return &f;
    return nullptr;
}

std::optional<double> aitken(double a0, double a1, double a2)
{
    double d1 = a1 - a0, d2 = a2 - a1;
    double den = d2 - d1;
    if (den == 0.0 || !std::isfinite(den))
        return std::nullopt;
    return a2 - d2 * d2 / den;
}

namespace {

const double inf = std::numeric_limits<double>::infinity();

struct Data
{
    std::vector<double> n, a;
};

double rms_of(const Data& d, const std::function<double(double)>& model)
{
    double s = 0.0;
    for (std::size_t i = 0; i < d.n.size(); ++i) {
        double r = (model(d.n[i]) - d.a[i]) / d.a[i];
        s += r * r;
    }
    double v = std::sqrt(s / static_cast<double>(d.n.size()));
    return std::isfinite(v) ? v : inf;
}

// Weighted least squares for a model linear in its coefficients, with
// relative residuals. Returns coefficients (empty on failure).
std::vector<double> linear_fit(const Data& d, const std::vector<std::function<double(double)>>& basis)
{
    const auto rows = static_cast<Eigen::Index>(d.n.size());
    const auto cols = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k)
            A(i, k) = basis[static_cast<std::size_t>(k)](d.n[static_cast<std::size_t>(i)]) / d.a[static_cast<std::size_t>(i)];
    if (!A.allFinite())
        return {};
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    if (!x.allFinite())
        return {};
    return std::vector<double>(x.data(), x.data() + x.size());
}

double golden(const std::function<double(double)>& f, double lo, double hi, int iters = 60)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

std::vector<double> logspace(double lo, double hi, int count)
{
    std::vector<double> v;
    for (int i = 0; i < count; ++i)
        v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return v;
}

// Minimizes f over one parameter: grid, then golden search between the
// neighbours of the best grid point.
double minimize_1d(const std::function<double(double)>& f, const std::vector<double>& grid)
{
    std::size_t best = 0;
    double bv = inf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = f(grid[i]);
        if (v < bv) {
            bv = v;
            best = i;
        }
    }
    double lo = grid[best > 0 ? best - 1 : 0];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    double x = golden(f, lo, hi);
    return f(x) < bv ? x : grid[best];
}

// For a fixed inner shape phi, the exponent of c phi(n)^-e from least
// squares on log a; c is then refitted on relative residuals.
struct PowerShape
{
    double c, e, rms;
};

PowerShape fit_power_of(const Data& d, const std::function<double(double)>& phi)
{
    double mx = 0, my = 0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < d.n.size(); ++i) {
        double f = phi(d.n[i]);
        if (!(f > 0.0))
            return { 0, 0, inf };
        x.push_back(std::log(f));
        y.push_back(std::log(d.a[i]));
        mx += x.back();
        my += y.back();
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0))
        return { 0, 0, inf };
    double e = -sxy / sxx;
    auto c = linear_fit(d, { [&](double n) { return std::pow(phi(n), -e); } });
    if (c.empty())
        return { 0, 0, inf };
    double r = rms_of(d, [&](double n) { return c[0] * std::pow(phi(n), -e); });
    return { c[0], e, r };
}

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// a + c n^{-b}, a >= 0
ModelFit fit_power_offset(const Data& d)
{
    auto solve = [&](double beta, std::vector<double>& coef) {
        coef = linear_fit(d, { [](double) { return 1.0; }, [beta](double n) { return std::pow(n, -beta); } });
        if (coef.empty())
            return inf;
        if (coef[0] < 0.0) {
            auto c = linear_fit(d, { [beta](double n) { return std::pow(n, -beta); } });
            if (c.empty())
                return inf;
            coef = { 0.0, c[0] };
        }
        double a = coef[0], c = coef[1];
        return rms_of(d, [&](double n) { return a + c * std::pow(n, -beta); });
    };
    std::vector<double> coef;
    double beta = minimize_1d([&](double b) { return solve(b, coef); }, logspace(0.01, 8.0, 160));
    double r = solve(beta, coef);
    return { "power_offset", "a + c n^-b", { coef[0], coef[1], beta }, r, coef[0], true };
}

// a + c e^{-l n}, a >= 0
ModelFit fit_exp_offset(const Data& d)
{
    auto solve = [&](double lam, std::vector<double>& coef) {
        coef = linear_fit(d, { [](double) { return 1.0; }, [lam](double n) { return std::exp(-lam * n); } });
        if (coef.empty())
            return inf;
        if (coef[0] < 0.0) {
            auto c = linear_fit(d, { [lam](double n) { return std::exp(-lam * n); } });
            if (c.empty())
                return inf;
            coef = { 0.0, c[0] };
        }
        double a = coef[0], c = coef[1];
        return rms_of(d, [&](double n) { return a + c * std::exp(-lam * n); });
    };
    std::vector<double> coef;
    double lam = minimize_1d([&](double l) { return solve(l, coef); }, logspace(1e-4, 10.0, 160));
    double r = solve(lam, coef);
    return { "exp_offset", "a + c e^(-l n)", { coef[0], coef[1], lam }, r, coef[0], true };
}

// c (n + b)^{-beta}
ModelFit fit_shifted_power(const Data& d)
{
    const double nmin = d.n.front(), nmax = d.n.back();
    auto shape = [&](double b) { return fit_power_of(d, [b](double n) { return n + b; }); };
    std::vector<double> bs;
    for (int k = 0; k < 120; ++k) {
        double t = static_cast<double>(k) / 119.0;
        bs.push_back(-0.95 * nmin + (0.95 * nmin + 4.0 * nmax) * t * t);
    }
    double b = minimize_1d([&](double x) { return shape(x).rms; }, bs);
    PowerShape f = shape(b);
    return { "shifted_power", "c (n + b)^-beta", { f.c, b, f.e }, f.rms, 0.0, false };
}

// c e^{-l n} n^{-beta}, l, beta >= 0; linear in log space.
ModelFit fit_exp_power(const Data& d)
{
    ModelFit best{ "exp_power", "c e^(-l n) n^-beta", { 0, 0, 0 }, inf, 0.0, false };
    for (int mask = 0; mask < 4; ++mask) {
        bool use_l = mask & 1, use_b = mask & 2;
        const auto rows = static_cast<Eigen::Index>(d.n.size());
        Eigen::MatrixXd A(rows, 1 + use_l + use_b);
        Eigen::VectorXd y(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            double n = d.n[static_cast<std::size_t>(i)];
            Eigen::Index k = 0;
            A(i, k++) = 1.0;
            if (use_l)
                A(i, k++) = -n;
            if (use_b)
                A(i, k++) = -std::log(n);
            y(i) = std::log(d.a[static_cast<std::size_t>(i)]);
        }
        Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
        double c = std::exp(x(0));
        double l = use_l ? x(1) : 0.0;
        double b = use_b ? x(use_l ? 2 : 1) : 0.0;
        if (l < 0.0 || b < 0.0 || (!use_l && !use_b))
            continue;
        double r = rms_of(d, [&](double n) { return c * std::exp(-l * n) * std::pow(n, -b); });
        if (r < best.rms)
            best = { "exp_power", "c e^(-l n) n^-beta", { c, l, b }, r, 0.0, false };
    }
    return best;
}

// c / (ln n + b)^g, b > -ln(n_min)
ModelFit fit_log_power(const Data& d, bool unit_exponent)
{
    const double shift0 = -std::log(d.n.front());
    auto shifts = logspace(1e-3, 50.0, 120);
    if (unit_exponent) {
        auto solve = [&](double s, double* c_out) {
            double b = shift0 + s;
            auto c = linear_fit(d, { [b](double n) { return 1.0 / (std::log(n) + b); } });
            if (c.empty())
                return inf;
            if (c_out)
                *c_out = c[0];
            return rms_of(d, [&](double n) { return c[0] / (std::log(n) + b); });
        };
        double s = minimize_1d([&](double t) { return solve(t, nullptr); }, shifts);
        double c = 0.0;
        double r = solve(s, &c);
        return { "log", "c / (ln n + b)", { c, shift0 + s }, r, 0.0, false };
    }
    auto shape = [&](double s) { return fit_power_of(d, [b = shift0 + s](double n) { return std::log(n) + b; }); };
    double s = minimize_1d([&](double t) { return shape(t).rms; }, shifts);
    PowerShape f = shape(s);
    return { "log_power", "c / (ln n + b)^g", { f.c, shift0 + s, f.e }, f.rms, 0.0, false };
}

} // namespace

SequenceAnalysis analyze_sequence(const std::vector<double>& n, const std::vector<double>& a, double p, const Thresholds& th, double monotone_tol)
{
    if (n.size() != a.size())
        throw InputError("sequence index and value lengths differ");
    if (!(p > 1.0) || !std::isfinite(p))
        throw InputError("exponent p must be finite and > 1");
    if (!(th.delta_par < th.delta_hyp))
        throw InputError("thresholds must satisfy delta_par < delta_hyp");
    if (!(th.slope_par < th.slope_hyp))
        throw InputError("thresholds must satisfy slope_par < slope_hyp");
    for (std::size_t i = 0; i < n.size(); ++i)
        if (!(n[i] > 0.0) || (i > 0 && !(n[i] > n[i - 1])))
            throw InputError("sequence indices must be positive and strictly increasing");
    for (double v : a)
        if (!std::isfinite(v) || v < 0.0)
            throw InputError("sequence values must be finite and nonnegative");

    SequenceAnalysis out;
    if (a.empty()) {
        out.notes.push_back("empty sequence");
        return out;
    }
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] > a[i - 1] * (1.0 + monotone_tol) + 1e-300) {
            out.monotone = false;
            out.notes.push_back("a_n increases at n = " + fmt(n[i]));
        }
    if (a.size() >= 3)
        out.aitken = aitken(a[a.size() - 3], a[a.size() - 2], a[a.size() - 1]);

    const double last = a.back();
    if (last <= th.delta_par) {
        // a_n is nonincreasing, so its limit is at most the last value.
        out.verdict = out.monotone ? Verdict::parabolic : Verdict::inconclusive;
        out.limit = last;
        out.resistance_limit = inf;
        out.notes.push_back("last value " + fmt(last) + " <= delta_par");
        return out;
    }
    if (*std::min_element(a.begin(), a.end()) <= 0.0) {
        out.notes.push_back("zero values before the end of the sequence");
        return out;
    }
    const double q = 1.0 / (p - 1.0);
    std::vector<double> R(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        R[i] = std::pow(a[i], -q);
    out.resistance = R.back();
    out.limit = last;
    if (static_cast<int>(a.size()) < std::max(th.min_points, 4)) {
        out.notes.push_back("too few points for a verdict");
        return out;
    }

    Data d{ n, a };
    out.fits = { fit_power_offset(d), fit_exp_offset(d), fit_shifted_power(d), fit_exp_power(d), fit_log_power(d, false), fit_log_power(d, true) };
    for (const auto& f : out.fits) {
        double& slot = f.positive_class ? out.best_positive_rms : out.best_zero_rms;
        if (slot == 0.0 || f.rms < slot)
            slot = f.rms;
    }

    // Increments s_k = dR/d(ln n) between consecutive points, located at the
    // geometric mean index; the tail half (at least three) is regressed.
    std::vector<double> x, y, s_all, mid_all;
    for (std::size_t i = 1; i < R.size(); ++i) {
        s_all.push_back((R[i] - R[i - 1]) / std::log(n[i] / n[i - 1]));
        mid_all.push_back(std::sqrt(n[i] * n[i - 1]));
    }
    const std::size_t k = s_all.size();
    const std::size_t window = std::max<std::size_t>(3, k / 2);
    const double noise = th.noise_floor * R.back();
    bool stalled = true;
    for (std::size_t i = k - std::min<std::size_t>(2, k); i < k; ++i)
        stalled = stalled && std::abs(s_all[i]) <= noise;
    if (stalled) {
        out.growth_exponent = -inf;
        out.resistance_limit = R.back();
        out.limit = last;
        out.notes.push_back("R_n no longer moves above the noise floor");
    } else {
        bool usable = true;
        for (std::size_t i = k - window; i < k; ++i) {
            if (!(s_all[i] > noise)) {
                usable = false;
                continue;
            }
            x.push_back(std::log(mid_all[i]));
            y.push_back(std::log(s_all[i]));
        }
        if (!usable || x.size() < 3) {
            out.notes.push_back("tail increments of R_n are not all positive; growth exponent not estimated");
        } else {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                mx += x[i];
                my += y[i];
            }
            mx /= static_cast<double>(x.size());
            my /= static_cast<double>(y.size());
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                sxy += (x[i] - mx) * (y[i] - my);
                sxx += (x[i] - mx) * (x[i] - mx);
            }
            double sigma = sxy / sxx;
            out.growth_exponent = sigma;
            if (sigma < 0.0) {
                // Integrate C n^sigma d(ln n) from the last index to infinity.
                double s_end = s_all.back() * std::pow(n.back() / mid_all.back(), sigma);
                out.resistance_limit = R.back() + s_end / (-sigma);
                out.limit = std::pow(out.resistance_limit, -(p - 1.0));
            } else {
                out.resistance_limit = inf;
                out.limit = 0.0;
            }
        }
    }

    if (out.growth_exponent) {
        double sigma = *out.growth_exponent;
        if (sigma <= -th.slope_hyp) {
            if (out.limit >= th.delta_hyp) {
                out.verdict = Verdict::hyperbolic;
                out.notes.push_back("R_n converges (growth exponent " + fmt(sigma) + "); limit estimate " + fmt(out.limit) + " >= delta_hyp");
            } else {
                out.notes.push_back("R_n converges but the limit estimate " + fmt(out.limit) + " is below delta_hyp");
            }
        } else if (sigma >= -th.slope_par) {
            out.verdict = Verdict::parabolic;
            out.limit = 0.0;
            out.notes.push_back("R_n diverges (growth exponent " + fmt(sigma) + " >= -slope_par)");
        } else {
            out.notes.push_back("growth exponent " + fmt(sigma) + " lies between -slope_hyp and -slope_par");
        }
    }
    if (!out.monotone && out.verdict != Verdict::inconclusive) {
        out.notes.push_back("verdict withdrawn: sequence is not monotone");
        out.verdict = Verdict::inconclusive;
    }
    return out;
}

} // namespace pmod
