#include "varorder/timedomain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <utility>

#include <fftw3.h>
#include <gsl/gsl_sf_gamma.h>

#include "varorder/csv.hpp"
#include "varorder/elliptic.hpp"
#include "varorder/errors.hpp"
#include "varorder/forward.hpp"

namespace varorder {

L1Weights::L1Weights(double alpha, double tau, std::size_t size)
    : alpha_(alpha), tau_(tau), scale_(std::pow(tau, -alpha)), w_(size)
{
    if (!(alpha > 0.0 && alpha < 1.0) || !(tau > 0.0)) {
        throw InvalidInput("L1Weights: need 0 < alpha < 1 and tau > 0");
    }
    const double g = std::tgamma(2.0 - alpha);
    const double e = 1.0 - alpha;
    for (std::size_t m = 0; m < size; ++m) {
        const double md = static_cast<double>(m);
        w_[m] = (std::pow(md + 1.0, e) - std::pow(md, e)) / g;
    }
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kChunk = 32;

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

struct OnlineConvolution::Fft {
    struct Plans {
        fftw_plan forward = nullptr;
        fftw_plan backward = nullptr;
    };
    std::map<std::pair<int, int>, Plans> plans;        // (B, howmany)
    std::map<std::pair<int, int>, std::vector<std::complex<double>>> spectra;  // (kernel, B)
    std::unique_ptr<double, FftwDeleter> in;
    std::unique_ptr<fftw_complex, FftwDeleter> spec;
    std::unique_ptr<fftw_complex, FftwDeleter> work;
    std::unique_ptr<double, FftwDeleter> out;
    std::size_t capacity = 0;  // 2B * kChunk

    ~Fft()
    {
        for (auto& [key, p] : plans) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

    void reserve(int B)
    {
        const auto need = static_cast<std::size_t>(2 * B) * kChunk;
        if (need <= capacity) {
            return;
        }
        const auto cplx = static_cast<std::size_t>(B + 1) * kChunk;
        in.reset(fftw_alloc_real(need));
        out.reset(fftw_alloc_real(need));
        spec.reset(fftw_alloc_complex(cplx));
        work.reset(fftw_alloc_complex(cplx));
        capacity = need;
    }

    const Plans& plan(int B, int howmany)
    {
        const auto key = std::make_pair(B, howmany);
        auto it = plans.find(key);
        if (it != plans.end()) {
            return it->second;
        }
        const int n = 2 * B;
        Plans p;
        p.forward = fftw_plan_many_dft_r2c(1, &n, howmany, in.get(), nullptr, 1, n, spec.get(), nullptr, 1, B + 1,
                                           FFTW_ESTIMATE);
        p.backward = fftw_plan_many_dft_c2r(1, &n, howmany, work.get(), nullptr, 1, B + 1, out.get(), nullptr, 1, n,
                                            FFTW_ESTIMATE);
        if (p.forward == nullptr || p.backward == nullptr) {
            throw SolverError("OnlineConvolution: FFTW planning failed");
        }
        return plans.emplace(key, p).first->second;
    }

    // Spectrum of c_l = k[l + 1], l = 0..2B-2, c_{2B-1} = 0, pre-divided by 2B.
    const std::vector<std::complex<double>>& spectrum(int kernel, const std::vector<double>& k, int B)
    {
        const auto key = std::make_pair(kernel, B);
        auto it = spectra.find(key);
        if (it != spectra.end()) {
            return it->second;
        }
        const int n = 2 * B;
        std::vector<double> c(static_cast<std::size_t>(n), 0.0);
        for (int l = 0; l < n - 1; ++l) {
            c[static_cast<std::size_t>(l)] = k[static_cast<std::size_t>(l + 1)] / n;
        }
        std::vector<std::complex<double>> s(static_cast<std::size_t>(B + 1));
        fftw_plan p = fftw_plan_dft_r2c_1d(n, c.data(), reinterpret_cast<fftw_complex*>(s.data()), FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
        return spectra.emplace(key, std::move(s)).first->second;
    }
};

std::size_t OnlineConvolution::kernel_length(int sources)
{
    return 2 * std::bit_ceil(static_cast<unsigned>(std::max(sources, 1))) + 1;
}

OnlineConvolution::OnlineConvolution(std::vector<std::vector<double>> kernels, int channels, int sources,
                                     int direct_limit)
    : kernels_(std::move(kernels)), channels_(channels), sources_(sources), direct_limit_(direct_limit)
{
    if (channels <= 0 || sources < 0 || direct_limit < 1) {
        throw InvalidInput("OnlineConvolution: channels > 0, sources >= 0, direct_limit >= 1 required");
    }
    for (const auto& k : kernels_) {
        if (k.size() < kernel_length(sources)) {
            throw InvalidInput("OnlineConvolution: kernel too short for the requested number of sources");
        }
    }
    const auto nc = static_cast<std::size_t>(channels);
    x_.assign(static_cast<std::size_t>(sources) * nc, 0.0);
    h_.assign(kernels_.size(), std::vector<double>(static_cast<std::size_t>(sources + 1) * nc, 0.0));
    fft_ = std::make_unique<Fft>();
}

OnlineConvolution::~OnlineConvolution() = default;

const double* OnlineConvolution::target(int kernel, int s) const
{
    if (s < 0 || s > pushed_ || s > sources_) {
        throw InvalidInput("OnlineConvolution: target not yet complete");
    }
    return h_[static_cast<std::size_t>(kernel)].data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(channels_);
}

void OnlineConvolution::push(const double* x)
{
    if (pushed_ >= sources_) {
        throw InvalidInput("OnlineConvolution: more sources than declared");
    }
    std::copy(x, x + channels_, x_.begin() + static_cast<std::ptrdiff_t>(pushed_) * channels_);
    ++pushed_;
    const int e = pushed_;
    const int B = e & -e;
    if (B <= direct_limit_) {
        direct_block(e, B);
    } else {
        fft_block(e, B);
    }
}

void OnlineConvolution::direct_block(int e, int B)
{
    const auto nc = static_cast<std::size_t>(channels_);
    const int last = std::min(e + B - 1, sources_);
    for (std::size_t kk = 0; kk < kernels_.size(); ++kk) {
        const auto& k = kernels_[kk];
        for (int s = e; s <= last; ++s) {
            double* h = h_[kk].data() + static_cast<std::size_t>(s) * nc;
            for (int j = e - B; j < e; ++j) {
                const double w = k[static_cast<std::size_t>(s - j)];
                const double* xj = x_.data() + static_cast<std::size_t>(j) * nc;
                for (std::size_t c = 0; c < nc; ++c) {
                    h[c] += w * xj[c];
                }
            }
        }
    }
}

void OnlineConvolution::fft_block(int e, int B)
{
    Fft& f = *fft_;
    f.reserve(B);
    const int n = 2 * B;
    const auto nc = static_cast<std::size_t>(channels_);
    const int last = std::min(e + B - 1, sources_);
    for (int c0 = 0; c0 < channels_; c0 += kChunk) {
        const int howmany = std::min(kChunk, channels_ - c0);
        const auto& plans = f.plan(B, howmany);
        double* in = f.in.get();
        for (int c = 0; c < howmany; ++c) {
            double* row = in + static_cast<std::ptrdiff_t>(c) * n;
            for (int r = 0; r < B; ++r) {
                row[r] = x_[static_cast<std::size_t>(e - B + r) * nc + static_cast<std::size_t>(c0 + c)];
            }
            std::fill(row + B, row + n, 0.0);
        }
        fftw_execute_dft_r2c(plans.forward, in, f.spec.get());
        for (std::size_t kk = 0; kk < kernels_.size(); ++kk) {
            const auto& ks = f.spectrum(static_cast<int>(kk), kernels_[kk], B);
            auto* spec = reinterpret_cast<std::complex<double>*>(f.spec.get());
            auto* work = reinterpret_cast<std::complex<double>*>(f.work.get());
            for (int c = 0; c < howmany; ++c) {
                for (int l = 0; l <= B; ++l) {
                    const auto idx = static_cast<std::size_t>(c) * static_cast<std::size_t>(B + 1) + static_cast<std::size_t>(l);
                    work[idx] = spec[idx] * ks[static_cast<std::size_t>(l)];
                }
            }
            fftw_execute_dft_c2r(plans.backward, f.work.get(), f.out.get());
            const double* out = f.out.get();
            for (int s = e; s <= last; ++s) {
                double* h = h_[kk].data() + static_cast<std::size_t>(s) * nc + static_cast<std::size_t>(c0);
                const int m = B - 1 + (s - e);
                for (int c = 0; c < howmany; ++c) {
                    h[c] += out[static_cast<std::ptrdiff_t>(c) * n + m];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------

FluxSeries l1_step_solve(const CoefficientSet& cfg, const Excitation& excitation, double tau, double T,
                         const std::vector<int>& tracked)
{
    cfg.validate();
    if (!(tau > 0.0) || !(T >= 10.0)) {
        throw InvalidInput("l1_step_solve: need tau > 0 and T >= 10");
    }
    const Mesh& mesh = *cfg.mesh;
    const int steps = static_cast<int>(std::llround(T / tau));
    if (steps < 1) {
        throw InvalidInput("l1_step_solve: T / tau must be at least one step");
    }
    std::vector<int> verts = tracked.empty() ? mesh.boundary_vertices() : tracked;
    for (int v : verts) {
        if (v < 0 || v >= mesh.vertex_count() || !mesh.is_boundary(v)) {
            throw InvalidInput("l1_step_solve: tracked vertex " + std::to_string(v) + " is not a boundary vertex");
        }
    }

    // One weight table and one lumped rho-mass per distinct order value.
    const std::vector<double> alphas = cfg.alpha.distinct_values();
    const std::size_t klen = OnlineConvolution::kernel_length(steps);
    std::vector<L1Weights> weights;
    std::vector<Eigen::VectorXd> mass;
    std::vector<std::vector<double>> kernels;
    Eigen::VectorXd reaction = lumped_mass(mesh, cfg.q);
    for (double a : alphas) {
        weights.emplace_back(a, tau, klen);
        Eigen::VectorXd chi(mesh.triangle_count());
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            chi[t] = cfg.alpha[t] == a ? 1.0 : 0.0;
        }
        mass.push_back(lumped_mass(mesh, cfg.rho, chi) * weights.back().scale());
        reaction += weights.back()[0] * mass.back();
        kernels.push_back(weights.back().table());
    }
    const AssembledSystem sys(cfg.mesh, cfg.sigma, reaction);
    const int nv = mesh.vertex_count();
    OnlineConvolution history(std::move(kernels), nv, steps);

    FluxSeries series;
    series.tau = tau;
    series.T = steps * tau;
    series.vertices = verts;
    const Eigen::VectorXd sigma_b = boundary_sigma(cfg);
    series.sigma.resize(static_cast<Eigen::Index>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i) {
        series.sigma[static_cast<Eigen::Index>(i)] = sigma_b[mesh.boundary_slot(verts[i])];
    }
    series.flux = Eigen::MatrixXd::Zero(steps + 1, static_cast<Eigen::Index>(verts.size()));
    for (const auto& term : excitation.terms()) {
        series.degree = std::max(series.degree, term.k);
    }

    Eigen::VectorXd prev = Eigen::VectorXd::Zero(nv);
    Eigen::VectorXd load(nv);
    Eigen::VectorXd diff(nv);
    for (int n = 1; n <= steps; ++n) {
        load.setZero();
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const double w0 = weights[a][0];
            const double* h = history.target(static_cast<int>(a), n - 1);
            for (int v = 0; v < nv; ++v) {
                load[v] += mass[a][v] * (w0 * prev[v] - h[v]);
            }
        }
        const Eigen::VectorXd bvals = to_vector(excitation.at_time(n * tau));
        Eigen::VectorXd u = sys.solve(load, bvals);
        const Eigen::VectorXd g = sys.flux(u, load);
        for (std::size_t i = 0; i < verts.size(); ++i) {
            series.flux(n, static_cast<Eigen::Index>(i)) = g[mesh.boundary_slot(verts[i])];
        }
        series.u_min = std::min(series.u_min, u.minCoeff());
        series.u_max = std::max(series.u_max, u.maxCoeff());
        if (n < steps) {
            diff = u - prev;
            history.push(diff.data());
        }
        prev = std::move(u);
    }
    return series;
}

namespace {

// int_T^inf (t / T)^K |f(T)| t^j e^{-pt} dt
double tail_bound(double fT, double T, int K, int j, double p)
{
    if (fT == 0.0) {
        return 0.0;
    }
    const double a = K + j + 1;
    return std::abs(fT) * std::pow(T, -K) * gsl_sf_gamma_inc(a, p * T) / std::pow(p, a);
}

TimeIntegral integrate(const FluxSeries& series, double p, int power, bool divide_sigma)
{
    const Eigen::Index m = series.flux.cols();
    const int steps = series.steps();
    TimeIntegral out;
    out.value = Eigen::VectorXd::Zero(m);
    out.tail = Eigen::VectorXd::Zero(m);
    if (steps < 1) {
        return out;
    }
    Eigen::VectorXd w(steps + 1);
    for (int n = 0; n <= steps; ++n) {
        const double t = series.time(n);
        w[n] = series.tau * std::pow(t, power) * std::exp(-p * t) * ((n == 0 || n == steps) ? 0.5 : 1.0);
    }
    out.value = series.flux.transpose() * w;
    for (Eigen::Index i = 0; i < m; ++i) {
        out.tail[i] = tail_bound(series.flux(steps, i), series.T, series.degree, power, p);
    }
    if (divide_sigma) {
        out.value = out.value.cwiseQuotient(series.sigma);
        out.tail = out.tail.cwiseQuotient(series.sigma);
    }
    return out;
}

}  // namespace

TimeIntegral weighted_time_integral(const FluxSeries& series)
{
    return integrate(series, 1.0, 1, true);
}

TimeIntegral laplace_transform(const FluxSeries& series, double p)
{
    if (!(p > 0.0)) {
        throw InvalidInput("laplace_transform: p must be positive");
    }
    return integrate(series, p, 0, false);
}

void write_flux_series_csv(const FluxSeries& series, const std::string& path, int stride)
{
    if (stride < 1) {
        throw InvalidInput("write_flux_series_csv: stride must be positive");
    }
    CsvWriter csv(path, {"t", "vertex", "flux"});
    for (int n = 0; n <= series.steps(); n += stride) {
        for (std::size_t i = 0; i < series.vertices.size(); ++i) {
            csv.row({series.time(n), static_cast<double>(series.vertices[i]),
                     series.flux(n, static_cast<Eigen::Index>(i))});
        }
    }
}

}  // namespace varorder
