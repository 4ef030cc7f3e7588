#include "varorder/exponent_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_multimin.h>

#include "varorder/asymptotics.hpp"
#include "varorder/csv.hpp"
#include "varorder/errors.hpp"

namespace varorder {

int detect_leading_M(const std::vector<double>& p, const std::vector<double>& F)
{
    if (p.size() != F.size() || p.size() < 3) {
        throw AnalysisError("detect_leading_M: need at least three curve points");
    }
    if (!(p.back() >= 100.0 * p.front())) {
        throw AnalysisError("detect_leading_M: the curve must span at least two decades of p");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < p.size() && p[i] <= 100.0 * p.front() * (1.0 + 1e-12); ++i) {
        x.push_back(p[i]);
        y.push_back(std::abs(F[i]));
    }
    const SlopeFit fit = fit_loglog_slope(x, y, 0.0, 3);
    if (!std::isfinite(fit.slope)) {
        throw AnalysisError("detect_leading_M: flux vanishes on the smallest decades");
    }
    const double s = fit.slope;
    const double off = std::abs(s - std::round(s));
    if (off <= 0.1) {
        return static_cast<int>(-std::round(s)) - 1;
    }
    if (off < 0.2) {
        throw AnalysisError("detect_leading_M: ambiguous log-log slope " + std::to_string(s));
    }
    return static_cast<int>(-std::floor(s)) - 1;
}

int detect_leading_M(const FluxCurve& curve)
{
    curve.validate();
    return detect_leading_M(curve.p, curve.F);
}

std::vector<double> ExponentModel::primary_exponents() const
{
    std::vector<double> out;
    for (const auto& t : terms) {
        if (t.primary) {
            out.push_back(t.alpha);
        }
    }
    return out;
}

double ExponentModel::evaluate(double p) const
{
    double s = 0.0;
    for (const auto& t : terms) {
        s += t.c * std::pow(p, t.alpha);
    }
    return s;
}

namespace {

struct Problem {
    std::vector<double> logp;
    std::vector<double> G;
    std::vector<double> w;  // relative weights
    bool with_constant = false;
    double lo = 0.0;
    double hi = 0.0;
    mutable int evaluations = 0;
};

// Weighted design matrix for the given exponents (constant column first if any).
Eigen::MatrixXd design(const Problem& pb, const std::vector<double>& a)
{
    const auto n = static_cast<Eigen::Index>(pb.G.size());
    const auto offset = static_cast<Eigen::Index>(pb.with_constant ? 1 : 0);
    Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(a.size()) + offset);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (pb.with_constant) {
            phi(i, 0) = pb.w[si];
        }
        for (std::size_t j = 0; j < a.size(); ++j) {
            phi(i, static_cast<Eigen::Index>(j) + offset) = pb.w[si] * std::exp(a[j] * pb.logp[si]);
        }
    }
    return phi;
}

Eigen::VectorXd weighted_data(const Problem& pb)
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(pb.G.size()));
    for (std::size_t i = 0; i < pb.G.size(); ++i) {
        y[static_cast<Eigen::Index>(i)] = pb.w[i] * pb.G[i];
    }
    return y;
}

// Variable projection: linear coefficients eliminated, weighted residual vector returned.
Eigen::VectorXd projected_residual(const Problem& pb, const std::vector<double>& a, Eigen::VectorXd* coef = nullptr)
{
    ++pb.evaluations;
    const Eigen::VectorXd y = weighted_data(pb);
    if (a.empty() && !pb.with_constant) {
        if (coef != nullptr) {
            coef->resize(0);
        }
        return y;
    }
    const Eigen::MatrixXd phi = design(pb, a);
    const Eigen::VectorXd c = phi.colPivHouseholderQr().solve(y);
    if (coef != nullptr) {
        *coef = c;
    }
    return y - phi * c;
}

double rel_rms(const Problem& pb, const std::vector<double>& a, Eigen::VectorXd* coef = nullptr)
{
    for (double v : a) {
        if (!(v >= pb.lo && v <= pb.hi)) {
            return std::numeric_limits<double>::infinity();
        }
    }
    const Eigen::VectorXd r = projected_residual(pb, a, coef);
    return r.norm() / std::sqrt(static_cast<double>(r.size()));
}

// Local log-log slope of |r| on the smallest-p part of the grid.
double leading_slope(const Problem& pb, const Eigen::VectorXd& weighted_residual)
{
    const std::size_t n = pb.G.size();
    const std::size_t take = std::max<std::size_t>(3, n / 4);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < take && i < n; ++i) {
        x.push_back(std::exp(pb.logp[i]));
        y.push_back(std::abs(weighted_residual[static_cast<Eigen::Index>(i)] / pb.w[i]));
    }
    return fit_loglog_slope(x, y, 0.0, 3).slope;
}

struct NmContext {
    const Problem* pb;
};

double nm_objective(const gsl_vector* x, void* params)
{
    const auto* ctx = static_cast<const NmContext*>(params);
    std::vector<double> a(x->size);
    for (std::size_t i = 0; i < x->size; ++i) {
        a[i] = gsl_vector_get(x, i);
    }
    const double v = rel_rms(*ctx->pb, a);
    return std::isfinite(v) ? v : 1e300;
}

std::vector<double> nelder_mead(const Problem& pb, std::vector<double> a)
{
    const std::size_t n = a.size();
    NmContext ctx{&pb};
    gsl_multimin_function fn{&nm_objective, n, &ctx};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, a[i]);
        gsl_vector_set(step, i, 0.03);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    for (int it = 0; it < 4000; ++it) {
        if (gsl_multimin_fminimizer_iterate(s) != 0) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12) == GSL_SUCCESS) {
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = gsl_vector_get(s->x, i);
    }
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return a;
}

int lm_residual(const gsl_vector* x, void* params, gsl_vector* f)
{
    const auto* pb = static_cast<const Problem*>(params);
    std::vector<double> a(x->size);
    for (std::size_t i = 0; i < x->size; ++i) {
        a[i] = std::clamp(gsl_vector_get(x, i), pb->lo, pb->hi);
    }
    const Eigen::VectorXd r = projected_residual(*pb, a);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        gsl_vector_set(f, static_cast<std::size_t>(i), r[i]);
    }
    return GSL_SUCCESS;
}

// Levenberg-Marquardt on the projected residual (finite-difference Jacobian).
std::vector<double> lm_polish(const Problem& pb, const std::vector<double>& a0)
{
    const std::size_t n = a0.size();
    const std::size_t m = pb.G.size();
    if (n == 0 || m <= n + (pb.with_constant ? 1U : 0U)) {
        return a0;
    }
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = &lm_residual;
    fdf.df = nullptr;
    fdf.fvv = nullptr;
    fdf.n = m;
    fdf.p = n;
    fdf.params = const_cast<Problem*>(&pb);
    gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
    gsl_multifit_nlinear_workspace* work = gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, m, n);
    gsl_vector* x = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, a0[i]);
    }
    gsl_multifit_nlinear_init(x, &fdf, work);
    int info = 0;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_multifit_nlinear_driver(200, 1e-14, 1e-14, 1e-14, nullptr, nullptr, &info, work);
    gsl_set_error_handler(old);
    std::vector<double> a(n);
    const gsl_vector* sol = gsl_multifit_nlinear_position(work);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::clamp(gsl_vector_get(sol, i), pb.lo, pb.hi);
    }
    gsl_vector_free(x);
    gsl_multifit_nlinear_free(work);
    // Keep the polish only if it helps.
    return rel_rms(pb, a) <= rel_rms(pb, a0) ? a : a0;
}

std::vector<double> optimize(const Problem& pb, std::vector<double> a)
{
    a = nelder_mead(pb, a);
    a = lm_polish(pb, a);
    std::sort(a.begin(), a.end());
    return a;
}

void assign_terms(ExponentModel& model, const Problem& pb, const std::vector<double>& a, std::vector<bool> merged)
{
    Eigen::VectorXd coef;
    model.residual = rel_rms(pb, a, &coef);
    const Eigen::Index offset = pb.with_constant ? 1 : 0;
    model.terms.clear();
    for (std::size_t j = 0; j < a.size(); ++j) {
        ExponentTerm t;
        t.alpha = a[j];
        t.c = coef[static_cast<Eigen::Index>(j) + offset];
        t.merged = merged.empty() ? false : merged[j];
        model.terms.push_back(t);
    }
    model.baseline = pb.with_constant ? coef[0] : 0.0;
}

}  // namespace

ExponentModel fit_power_sum(const std::vector<double>& p, const std::vector<double>& G, bool with_constant,
                            const FitOptions& options)
{
    if (p.size() != G.size()) {
        throw InvalidInput("fit_power_sum: p and G lengths differ");
    }
    if (options.max_terms < 0 || !(options.gap >= 0.0)) {
        throw InvalidInput("fit_power_sum: max_terms >= 0 and gap >= 0 required");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0) || !std::isfinite(G[i]) || (i > 0 && !(p[i] > p[i - 1]))) {
            throw InvalidInput("fit_power_sum: p must be positive and strictly increasing, G finite");
        }
    }
    ExponentModel model;
    model.baseline_known = !with_constant;
    double gmax = 0.0;
    for (double g : G) {
        gmax = std::max(gmax, std::abs(g));
    }
    if (gmax == 0.0 || p.size() < 3) {
        return model;
    }

    Problem pb;
    pb.G = G;
    pb.with_constant = with_constant;
    pb.lo = options.alpha_lo;
    pb.hi = options.alpha_hi;
    for (std::size_t i = 0; i < p.size(); ++i) {
        pb.logp.push_back(std::log(p[i]));
        pb.w.push_back(1.0 / (std::abs(G[i]) + 1e-12 * gmax));
    }

    const std::size_t max_terms =
        std::min<std::size_t>(static_cast<std::size_t>(options.max_terms), (p.size() - (with_constant ? 1 : 0)) / 2);
    std::vector<double> best;
    double best_res = rel_rms(pb, best);
    for (std::size_t n = 1; n <= max_terms && best_res > options.tolerance; ++n) {
        // Peel: slope of what the current model leaves at the smallest p.
        const Eigen::VectorXd r = projected_residual(pb, best);
        double guess = leading_slope(pb, r);
        if (!std::isfinite(guess)) {
            guess = 0.5 * (pb.lo + pb.hi);
        }
        guess = std::clamp(guess, pb.lo, pb.hi);
        // A short scan guards against a peeled slope that lands on an existing term.
        std::vector<double> trial = best;
        trial.push_back(guess);
        double trial_res = rel_rms(pb, trial);
        for (double a = pb.lo; a <= pb.hi; a += 0.02) {
            std::vector<double> cand = best;
            cand.push_back(a);
            if (const double v = rel_rms(pb, cand); v < trial_res) {
                trial_res = v;
                trial = cand;
            }
        }
        trial = optimize(pb, trial);
        trial_res = rel_rms(pb, trial);
        if (!(trial_res < 0.5 * best_res)) {
            model.stagnated = true;
            break;
        }
        best = trial;
        best_res = trial_res;
    }

    // Merge exponents closer than the gap.
    std::vector<bool> merged(best.size(), false);
    if (best.size() > 1) {
        Eigen::VectorXd coef;
        rel_rms(pb, best, &coef);
        const Eigen::Index offset = with_constant ? 1 : 0;
        std::vector<double> a;
        std::vector<double> wsum;
        std::vector<bool> flag;
        for (std::size_t j = 0; j < best.size(); ++j) {
            const double cj = std::abs(coef[static_cast<Eigen::Index>(j) + offset]) + 1e-300;
            if (!a.empty() && best[j] - a.back() < options.gap) {
                a.back() = (a.back() * wsum.back() + best[j] * cj) / (wsum.back() + cj);
                wsum.back() += cj;
                flag.back() = true;
                model.collision = true;
            } else {
                a.push_back(best[j]);
                wsum.push_back(cj);
                flag.push_back(false);
            }
        }
        best = a;
        merged = flag;
    }
    assign_terms(model, pb, best, merged);
    model.evaluations = pb.evaluations;
    return model;
}

ExponentModel recover_exponents(const FluxCurve& curve, std::optional<double> known_baseline, int max_terms, double gap)
{
    curve.validate();
    const int M = curve.leading_power > 0 ? curve.leading_power : detect_leading_M(curve);
    const std::vector<double> h = curve.scaled(M);
    FitOptions opt;
    opt.max_terms = max_terms;
    opt.gap = gap;

    ExponentModel model;
    if (known_baseline) {
        std::vector<double> g(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            g[i] = *known_baseline - h[i];
        }
        model = fit_power_sum(curve.p, g, false, opt);
        model.baseline = *known_baseline;
        model.baseline_known = true;
    } else {
        if (h.size() < 3) {
            throw AnalysisError("recover_exponents: too few points to estimate the baseline");
        }
        // Aitken extrapolation of the three smallest-p values seeds the weights;
        // the fit then carries a constant correction.
        const double den = h[0] + h[2] - 2.0 * h[1];
        const double b0 = den != 0.0 ? (h[0] * h[2] - h[1] * h[1]) / den : h[0];
        std::vector<double> g(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            g[i] = b0 - h[i];
        }
        model = fit_power_sum(curve.p, g, true, opt);
        model.baseline = b0 - model.baseline;
        model.baseline_known = false;
    }
    model.M = M;
    if (!model.terms.empty()) {
        const double threshold = std::min(1.0, 2.0 * model.terms.front().alpha) - 0.5 * gap;
        for (auto& t : model.terms) {
            t.primary = t.alpha < threshold;
        }
    }
    return model;
}

void write_exponents_csv(const ExponentModel& model, const std::string& path)
{
    CsvWriter csv(path, {"alpha_j", "c_j"});
    for (const auto& t : model.terms) {
        csv.row({t.alpha, t.c});
    }
}

}  // namespace varorder
