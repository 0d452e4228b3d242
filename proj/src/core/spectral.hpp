#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tvsched {

// Half spectrum of a real series of n hourly samples. coeff[j] is the complex
// amplitude A_j of the mode pair at dimensionless frequency j (j/n cycles per
// hour); the amplitude at -j is its conjugate. Scaling is chosen so that
//   s(t) = A_0 + sum_{j>=1} (A_j e^{2 pi i j t / n} + conj(A_j) e^{-2 pi i j t / n})
// reproduces the input exactly (Nyquist term appears once for even n).
struct Spectrum {
    std::vector<std::complex<double>> coeff; // j = 0 .. floor(n/2)
    std::size_t n = 0;

    bool has_nyquist() const { return n % 2 == 0 && n > 0; }
    std::size_t mode_count() const { return coeff.empty() ? 0 : coeff.size() - 1; }
};

enum class DftAlgorithm {
    automatic, // direct for short series, fast otherwise
    direct,    // O(n^2) sum; defines correctness
    fast,      // radix-2 / Bluestein
};

Spectrum dft(std::span<const double> series, DftAlgorithm alg = DftAlgorithm::automatic,
             int jobs = 1);

std::vector<double> reconstruct(const Spectrum& spectrum);

struct FilterResult {
    std::vector<double> signal; // P(t): A_0 plus modes with |A_j| > threshold
    std::vector<double> noise;  // eta(t): remaining modes
    double threshold = 0;
    int kept_mode_count = 0; // kept mode pairs, A_0 excluded
};

FilterResult filter_by_threshold(const Spectrum& spectrum, double a_thresh);

// (frequency in cycles/day, |A_j|), ascending frequency, j = 0 included.
std::vector<std::pair<double, double>> power_spectrum(const Spectrum& spectrum);

// Linear-interpolation percentile (pct in [0, 100]).
double percentile(std::span<const double> values, double pct);

// sum over samples and full modes of squared magnitude; Parseval pairs this
// with sum(s^2)/n.
double spectrum_power(const Spectrum& spectrum);

struct NormalFit {
    double mu = 0;
    double sigma = 0; // population MLE
    double log_likelihood = 0;
    bool degenerate = false; // sigma == 0
};

NormalFit fit_noise_normal(std::span<const double> samples);

struct TlsFitOptions {
    int max_iterations = 5000; // per restart
    double tolerance = 1e-8;   // absolute, on log-likelihood
};

struct TlsFit {
    double mu = 0;
    double sigma = 0;
    double nu = 0;
    double log_likelihood = 0;
};

double tls_log_pdf(double x, double mu, double sigma, double nu);

// Numerical MLE of the t location-scale parameters (simplex search on
// (mu, log sigma, log(nu-1)), three moment-based restarts). The returned
// likelihood never falls below the normal fit evaluated in the tls limit.
TlsFit fit_noise_tls(std::span<const double> samples, const TlsFitOptions& options = {});

struct NoiseFit {
    NormalFit normal;
    TlsFit tls;
};

NoiseFit fit_noise(std::span<const double> samples, const TlsFitOptions& options = {});

struct SpikeAnalysis {
    double threshold_value = 0;
    std::vector<std::size_t> spike_times; // hour indices of upward crossings
    std::vector<double> waiting_times;    // consecutive differences
    std::optional<double> lambda_hat;     // 1 / mean waiting time, absent if < 2 spikes
};

SpikeAnalysis detect_spikes(std::span<const double> series, double pct = 95.0);
SpikeAnalysis detect_spikes_at_threshold(std::span<const double> series, double threshold);

// Exponential-rate MLE for inter-spike waiting times.
double fit_exponential(std::span<const double> waiting_times);

} // namespace tvsched
