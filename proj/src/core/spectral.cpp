#include "core/spectral.hpp"

#include "core/errors.hpp"
#include "core/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

namespace tvsched {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// iterative radix-2, in place; sign = -1 forward, +1 inverse (unscaled)
void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * kPi / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// arbitrary-length transform via the chirp-z identity; sign as above
std::vector<cplx> bluestein(const std::vector<cplx>& input, int sign) {
    const std::size_t n = input.size();
    if (n == 0) return {};
    if ((n & (n - 1)) == 0) {
        auto a = input;
        fft_pow2(a, sign);
        return a;
    }
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp e^{sign * i * pi * t^2 / n}; t^2 reduced mod 2n keeps angles small
    std::vector<cplx> chirp(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t r = (t * t) % (2 * n);
        double ang = sign * kPi * static_cast<double>(r) / static_cast<double>(n);
        chirp[t] = cplx(std::cos(ang), std::sin(ang));
    }

    std::vector<cplx> a(m, cplx(0, 0)), b(m, cplx(0, 0));
    for (std::size_t t = 0; t < n; ++t) a[t] = input[t] * chirp[t];
    for (std::size_t t = 0; t < n; ++t) {
        b[t] = std::conj(chirp[t]);
        if (t > 0) b[m - t] = b[t];
    }
    fft_pow2(a, -1);
    fft_pow2(b, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, +1);
    double scale = 1.0 / static_cast<double>(m);
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
    return out;
}

std::vector<cplx> direct_transform(std::span<const double> series, int jobs) {
    const std::size_t n = series.size();
    std::vector<cplx> twiddle(n);
    for (std::size_t k = 0; k < n; ++k) {
        double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = cplx(std::cos(ang), std::sin(ang));
    }
    std::vector<cplx> out(n);
    auto compute_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            cplx sum(0, 0);
            std::size_t idx = 0;
            for (std::size_t t = 0; t < n; ++t) {
                sum += series[t] * twiddle[idx];
                idx += j;
                if (idx >= n) idx -= n;
            }
            out[j] = sum;
        }
    };
    int workers = std::max(1, jobs);
    if (workers == 1 || n < 256) {
        compute_range(0, n);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            std::size_t lo = static_cast<std::size_t>(w) * chunk;
            std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(compute_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// selective inverse: zero out the mode pairs not selected, A_0 controlled by
// include_dc
std::vector<double> synthesize(const Spectrum& sp, const std::vector<bool>& keep, bool include_dc) {
    const std::size_t n = sp.n;
    std::vector<cplx> full(n, cplx(0, 0));
    if (include_dc) full[0] = sp.coeff[0];
    const std::size_t half = sp.coeff.size() - 1;
    for (std::size_t j = 1; j <= half; ++j) {
        if (!keep[j]) continue;
        full[j] = sp.coeff[j];
        if (!(sp.has_nyquist() && j == half)) full[n - j] = std::conj(sp.coeff[j]);
    }
    auto spec = bluestein(full, +1);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = spec[t].real();
    return out;
}

double population_sd(std::span<const double> x, double mean) {
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

} // namespace

Spectrum dft(std::span<const double> series, DftAlgorithm alg, int jobs) {
    const std::size_t n = series.size();
    if (n < 2) fail(ErrorCode::invalid_argument, "dft requires at least 2 samples");
    for (double v : series)
        if (std::isnan(v)) fail(ErrorCode::domain, "dft input contains missing values");

    bool use_direct = alg == DftAlgorithm::direct || (alg == DftAlgorithm::automatic && n <= 512);
    std::vector<cplx> raw;
    if (use_direct) {
        raw = direct_transform(series, jobs);
    } else {
        std::vector<cplx> in(n);
        for (std::size_t t = 0; t < n; ++t) in[t] = cplx(series[t], 0.0);
        raw = bluestein(in, -1);
    }

    Spectrum sp;
    sp.n = n;
    sp.coeff.resize(n / 2 + 1);
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < sp.coeff.size(); ++j) sp.coeff[j] = raw[j] * inv_n;
    return sp;
}

std::vector<double> reconstruct(const Spectrum& sp) {
    std::vector<bool> keep(sp.coeff.size(), true);
    return synthesize(sp, keep, true);
}

FilterResult filter_by_threshold(const Spectrum& sp, double a_thresh) {
    if (a_thresh < 0) fail(ErrorCode::invalid_argument, "threshold must be >= 0");
    const std::size_t half = sp.coeff.size() - 1;
    std::vector<bool> keep(half + 1, false);
    FilterResult result;
    result.threshold = a_thresh;
    for (std::size_t j = 1; j <= half; ++j) {
        if (std::abs(sp.coeff[j]) > a_thresh) {
            keep[j] = true;
            result.kept_mode_count++;
        }
    }
    result.signal = synthesize(sp, keep, true);
    std::vector<bool> drop(half + 1);
    for (std::size_t j = 0; j <= half; ++j) drop[j] = j >= 1 && !keep[j];
    result.noise = synthesize(sp, drop, false);
    return result;
}

std::vector<std::pair<double, double>> power_spectrum(const Spectrum& sp) {
    std::vector<std::pair<double, double>> out;
    out.reserve(sp.coeff.size());
    for (std::size_t j = 0; j < sp.coeff.size(); ++j) {
        double freq_per_day = 24.0 * static_cast<double>(j) / static_cast<double>(sp.n);
        out.emplace_back(freq_per_day, std::abs(sp.coeff[j]));
    }
    return out;
}

double percentile(std::span<const double> values, double pct) {
    if (values.empty()) fail(ErrorCode::invalid_argument, "percentile of empty range");
    if (pct < 0 || pct > 100) fail(ErrorCode::invalid_argument, "percentile must be in [0,100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double spectrum_power(const Spectrum& sp) {
    double sum = std::norm(sp.coeff[0]);
    const std::size_t half = sp.coeff.size() - 1;
    for (std::size_t j = 1; j <= half; ++j) {
        double w = (sp.has_nyquist() && j == half) ? 1.0 : 2.0;
        sum += w * std::norm(sp.coeff[j]);
    }
    return sum;
}

NormalFit fit_noise_normal(std::span<const double> samples) {
    if (samples.size() < 2) fail(ErrorCode::invalid_argument, "normal fit needs >= 2 samples");
    NormalFit fit;
    fit.mu = std::accumulate(samples.begin(), samples.end(), 0.0) /
             static_cast<double>(samples.size());
    fit.sigma = population_sd(samples, fit.mu);
    if (fit.sigma <= 0) {
        fit.degenerate = true;
        fit.log_likelihood = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    double n = static_cast<double>(samples.size());
    fit.log_likelihood = -0.5 * n * std::log(2.0 * kPi) - n * std::log(fit.sigma) - 0.5 * n;
    return fit;
}

double tls_log_pdf(double x, double mu, double sigma, double nu) {
    double z = (x - mu) / sigma;
    double tail = -0.5 * (nu + 1.0) * std::log1p(z * z / nu);
    if (nu > 1e8) {
        // Stirling form of lgamma((nu+1)/2) - lgamma(nu/2) - 0.5*log(nu*pi);
        // avoids catastrophic cancellation at large nu
        return -0.5 * std::log(2.0 * kPi) - std::log(sigma) - 1.0 / (4.0 * nu) + tail;
    }
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * kPi) -
           std::log(sigma) + tail;
}

namespace {

double tls_neg_log_likelihood(std::span<const double> samples, double mu, double sigma, double nu) {
    double norm_const;
    if (nu > 1e8) {
        norm_const = -0.5 * std::log(2.0 * kPi) - std::log(sigma) - 1.0 / (4.0 * nu);
    } else {
        norm_const = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                     0.5 * std::log(nu * kPi) - std::log(sigma);
    }
    double tail_sum = 0;
    double inv_nu = 1.0 / nu;
    double inv_sigma = 1.0 / sigma;
    for (double x : samples) {
        double z = (x - mu) * inv_sigma;
        tail_sum += std::log1p(z * z * inv_nu);
    }
    double ll = static_cast<double>(samples.size()) * norm_const - 0.5 * (nu + 1.0) * tail_sum;
    return -ll;
}

} // namespace

TlsFit fit_noise_tls(std::span<const double> samples, const TlsFitOptions& options) {
    if (samples.size() < 10) fail(ErrorCode::invalid_argument, "tls fit needs >= 10 samples");

    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
    double sd = population_sd(samples, mean);
    if (sd <= 0) fail(ErrorCode::domain, "tls fit undefined for constant samples");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];

    // kurtosis-matched starting nu: excess kurtosis of a t law is 6/(nu-4)
    double m4 = 0;
    for (double x : samples) {
        double d = x - mean;
        m4 += d * d * d * d;
    }
    m4 /= static_cast<double>(samples.size());
    double excess = m4 / (sd * sd * sd * sd) - 3.0;
    double nu_kurt = excess > 0.05 ? std::clamp(4.0 + 6.0 / excess, 2.2, 100.0) : 30.0;

    auto objective = [&](const std::vector<double>& theta) {
        double mu = theta[0];
        double sigma = std::exp(theta[1]);
        double nu = 1.0 + std::exp(theta[2]);
        return tls_neg_log_likelihood(samples, mu, sigma, nu);
    };

    const double nu_starts[3] = {nu_kurt, 4.0, 50.0};
    bool any_converged = false;
    std::vector<double> best_theta;
    double best_value = std::numeric_limits<double>::infinity();
    for (double nu0 : nu_starts) {
        double sigma0 = nu0 > 2.2 ? sd * std::sqrt((nu0 - 2.0) / nu0) : 0.7 * sd;
        std::vector<double> start = {median, std::log(sigma0), std::log(nu0 - 1.0)};
        std::vector<double> step = {0.1 * sd, 0.3, 0.7};
        auto run = nelder_mead(objective, start, step, options.tolerance, options.max_iterations);
        any_converged = any_converged || run.converged;
        if (run.converged && run.value < best_value) {
            best_value = run.value;
            best_theta = run.x;
        }
    }
    if (!any_converged)
        fail(ErrorCode::no_convergence,
             "tls fit did not converge within " + std::to_string(options.max_iterations) +
                 " iterations");

    TlsFit fit;
    fit.mu = best_theta[0];
    fit.sigma = std::exp(best_theta[1]);
    fit.nu = 1.0 + std::exp(best_theta[2]);
    fit.log_likelihood = -best_value;

    // normal is the nu -> infinity limit; never report a worse likelihood
    double limit_nu = 1e12;
    double limit_nll = tls_neg_log_likelihood(samples, mean, sd, limit_nu);
    if (-limit_nll > fit.log_likelihood) {
        fit.mu = mean;
        fit.sigma = sd;
        fit.nu = limit_nu;
        fit.log_likelihood = -limit_nll;
    }
    return fit;
}

NoiseFit fit_noise(std::span<const double> samples, const TlsFitOptions& options) {
    NoiseFit fit;
    fit.normal = fit_noise_normal(samples);
    fit.tls = fit_noise_tls(samples, options);
    return fit;
}

SpikeAnalysis detect_spikes_at_threshold(std::span<const double> series, double threshold) {
    SpikeAnalysis analysis;
    analysis.threshold_value = threshold;
    for (std::size_t t = 0; t < series.size(); ++t) {
        bool above = series[t] > threshold;
        bool prev_above = t > 0 && series[t - 1] > threshold;
        if (above && !prev_above) analysis.spike_times.push_back(t);
    }
    for (std::size_t i = 1; i < analysis.spike_times.size(); ++i)
        analysis.waiting_times.push_back(
            static_cast<double>(analysis.spike_times[i] - analysis.spike_times[i - 1]));
    if (!analysis.waiting_times.empty()) {
        double mean = std::accumulate(analysis.waiting_times.begin(), analysis.waiting_times.end(),
                                      0.0) /
                      static_cast<double>(analysis.waiting_times.size());
        analysis.lambda_hat = 1.0 / mean;
    }
    return analysis;
}

SpikeAnalysis detect_spikes(std::span<const double> series, double pct) {
    if (series.size() < 2) fail(ErrorCode::invalid_argument, "spike detection needs >= 2 samples");
    auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    if (*mn == *mx) fail(ErrorCode::domain, "spike detection undefined for constant series");
    return detect_spikes_at_threshold(series, percentile(series, pct));
}

double fit_exponential(std::span<const double> waiting_times) {
    if (waiting_times.size() < 2)
        fail(ErrorCode::invalid_argument, "exponential fit needs >= 2 waiting times");
    for (double w : waiting_times)
        if (w <= 0) fail(ErrorCode::domain, "waiting times must be positive");
    double mean = std::accumulate(waiting_times.begin(), waiting_times.end(), 0.0) /
                  static_cast<double>(waiting_times.size());
    return 1.0 / mean;
}

} // namespace tvsched
