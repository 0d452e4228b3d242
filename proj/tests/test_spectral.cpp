#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace tvsched;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_series(std::size_t n, std::uint64_t seed, double scale = 100.0) {
    Rng rng(seed);
    std::vector<double> s(n);
    for (auto& v : s) v = scale * (rng.uniform() - 0.3);
    return s;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST_CASE("dft: constant series is pure zero mode") {
    std::vector<double> s(100, 5.0);
    auto sp = dft(s);
    CHECK(sp.coeff[0].real() == Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(sp.coeff[0].imag()) < 1e-12);
    for (std::size_t j = 1; j < sp.coeff.size(); ++j) CHECK(std::abs(sp.coeff[j]) < 1e-12);
}

TEST_CASE("dft: daily cosine has a single mode pair of amplitude 1.5") {
    std::vector<double> s(168);
    for (std::size_t t = 0; t < s.size(); ++t)
        s[t] = 3.0 * std::cos(2.0 * kPi * static_cast<double>(t) / 24.0);
    auto sp = dft(s);
    // 1 cycle/day over 7 days of hourly samples: bin j = 7
    for (std::size_t j = 1; j < sp.coeff.size(); ++j) {
        double expected = j == 7 ? 1.5 : 0.0;
        CHECK(std::abs(sp.coeff[j]) == Approx(expected).epsilon(1e-9).scale(1.0));
        // cross-check against the brute-force coefficient sum
        CHECK(std::abs(sp.coeff[j] - oracle::dft_coefficient(s, j)) < 1e-9);
    }
    auto ps = power_spectrum(sp);
    CHECK(ps[7].first == Approx(1.0)); // 1 per day
}

TEST_CASE("dft: fast path matches the direct transform") {
    for (std::size_t n : {37UL, 360UL, 997UL, 1024UL}) {
        auto s = random_series(n, 7000 + n);
        auto fast = dft(s, DftAlgorithm::fast);
        auto direct = dft(s, DftAlgorithm::direct);
        REQUIRE(fast.coeff.size() == direct.coeff.size());
        for (std::size_t j = 0; j < fast.coeff.size(); ++j)
            CHECK(std::abs(fast.coeff[j] - direct.coeff[j]) < 1e-9 * max_abs(s));
    }
}

TEST_CASE("dft: parallel direct transform is identical to serial") {
    auto s = random_series(600, 123);
    auto serial = dft(s, DftAlgorithm::direct, 1);
    auto parallel = dft(s, DftAlgorithm::direct, 4);
    for (std::size_t j = 0; j < serial.coeff.size(); ++j)
        CHECK(serial.coeff[j] == parallel.coeff[j]);
}

TEST_CASE("dft then reconstruct is the identity within 1e-9 relative") {
    auto s = random_series(1000, 99);
    auto back = reconstruct(dft(s));
    REQUIRE(back.size() == s.size());
    double tol = 1e-9 * max_abs(s);
    for (std::size_t t = 0; t < s.size(); ++t) CHECK(std::abs(back[t] - s[t]) < tol);
}

TEST_CASE("dft: input validation") {
    CHECK_THROWS_AS(dft(std::vector<double>{1.0}), Error);
    std::vector<double> with_nan = {1.0, std::nan(""), 2.0};
    CHECK_THROWS_AS(dft(with_nan), Error);
}

TEST_CASE("filter_by_threshold: threshold zero keeps everything") {
    auto s = random_series(300, 5);
    auto fr = filter_by_threshold(dft(s), 0.0);
    for (double v : fr.noise) CHECK(std::abs(v) < 1e-9 * max_abs(s));
}

TEST_CASE("filter_by_threshold: separates two known modes") {
    // |A| = 1.5 at bin 10 and |A| = 0.5 at bin 30
    const std::size_t n = 600;
    std::vector<double> strong(n), weak(n);
    for (std::size_t t = 0; t < n; ++t) {
        strong[t] = 3.0 * std::cos(2.0 * kPi * 10.0 * static_cast<double>(t) / static_cast<double>(n));
        weak[t] = 1.0 * std::cos(2.0 * kPi * 30.0 * static_cast<double>(t) / static_cast<double>(n));
    }
    std::vector<double> s(n);
    for (std::size_t t = 0; t < n; ++t) s[t] = strong[t] + weak[t];

    auto fr = filter_by_threshold(dft(s), 1.0);
    CHECK(fr.kept_mode_count == 1);
    for (std::size_t t = 0; t < n; ++t) {
        CHECK(fr.signal[t] == Approx(strong[t]).epsilon(1e-9).scale(3.0));
        CHECK(fr.noise[t] == Approx(weak[t]).epsilon(1e-9).scale(1.0));
    }
    // per-mode check with the oracle: only the kept coefficient survives in the signal
    CHECK(std::abs(oracle::dft_coefficient(fr.signal, 10)) == Approx(1.5).epsilon(1e-9));
    CHECK(std::abs(oracle::dft_coefficient(fr.signal, 30)) < 1e-9);
}

TEST_CASE("filter_by_threshold: threshold above everything leaves only the mean") {
    auto s = random_series(257, 21);
    auto sp = dft(s);
    double big = 0;
    for (std::size_t j = 1; j < sp.coeff.size(); ++j) big = std::max(big, std::abs(sp.coeff[j]));
    auto fr = filter_by_threshold(sp, big * 1.01);
    CHECK(fr.kept_mode_count == 0);
    double mean = sp.coeff[0].real();
    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(fr.signal[t] == Approx(mean).epsilon(1e-9));
        CHECK(fr.noise[t] == Approx(s[t] - mean).epsilon(1e-7).scale(max_abs(s)));
    }
}

TEST_CASE("filter invariants: reconstruction, monotone mode count, Parseval") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto s = random_series(501 + 13 * seed, seed);
        auto sp = dft(s);

        double power_time = 0;
        for (double v : s) power_time += v * v;
        CHECK(power_time / static_cast<double>(s.size()) ==
              Approx(spectrum_power(sp)).epsilon(1e-9));

        int last_kept = std::numeric_limits<int>::max();
        for (double thresh : {0.0, 0.5, 1.0, 2.0, 5.0, 1e9}) {
            auto fr = filter_by_threshold(sp, thresh);
            CHECK(fr.kept_mode_count <= last_kept);
            last_kept = fr.kept_mode_count;
            double tol = 1e-9 * max_abs(s);
            for (std::size_t t = 0; t < s.size(); ++t)
                CHECK(std::abs(fr.signal[t] + fr.noise[t] - s[t]) < tol);
        }
    }
}

TEST_CASE("power_spectrum: weekly plus twice-daily cosines dominate at 1/7 and 2") {
    const std::size_t n = 4 * 168; // 4 weeks of hours
    std::vector<double> s(n);
    for (std::size_t t = 0; t < n; ++t) {
        double td = static_cast<double>(t);
        s[t] = 40.0 + 5.0 * std::cos(2.0 * kPi * td / 168.0) + 3.0 * std::cos(2.0 * kPi * td / 12.0);
    }
    auto ps = power_spectrum(dft(s));
    // drop the zero mode, rank by magnitude
    std::vector<std::pair<double, double>> modes(ps.begin() + 1, ps.end());
    std::sort(modes.begin(), modes.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    double f1 = modes[0].first, f2 = modes[1].first;
    CHECK(std::min(f1, f2) == Approx(1.0 / 7.0).epsilon(1e-9));
    CHECK(std::max(f1, f2) == Approx(2.0).epsilon(1e-9));

    std::vector<double> flat(64, 3.25);
    auto psc = power_spectrum(dft(flat));
    CHECK(psc[0].second == Approx(3.25));
    for (std::size_t j = 1; j < psc.size(); ++j) CHECK(psc[j].second < 1e-12);
}

TEST_CASE("fit_noise_normal") {
    SUBCASE("symmetric pair") {
        std::vector<double> s = {-1.0, 1.0};
        auto fit = fit_noise_normal(s);
        CHECK(fit.mu == Approx(0.0));
        CHECK(fit.sigma == Approx(1.0)); // population MLE
        CHECK_FALSE(fit.degenerate);
    }
    SUBCASE("recovers the reference normal parameters at n = 6551") {
        Rng rng(2026);
        std::vector<double> s(6551);
        for (auto& v : s) v = rng.normal(-2.7, 32.0);
        auto fit = fit_noise_normal(s);
        CHECK(std::abs(fit.mu - (-2.7)) < 1.2);
        CHECK(std::abs(fit.sigma - 32.0) < 1.0);
    }
    SUBCASE("constant samples flagged degenerate") {
        std::vector<double> s(20, 4.0);
        auto fit = fit_noise_normal(s);
        CHECK(fit.degenerate);
        CHECK(fit.sigma == 0.0);
    }
    SUBCASE("requires two samples") {
        std::vector<double> s = {1.0};
        CHECK_THROWS_AS(fit_noise_normal(s), Error);
    }
}

TEST_CASE("fit_noise_tls: recovers t location-scale parameters") {
    Rng rng(17);
    std::vector<double> s(6551);
    for (auto& v : s) v = rng.tls(-6.2, 20.0, 3.0);
    auto fit = fit_noise_tls(s);
    CHECK(std::abs(fit.mu - (-6.2)) < 1.5);
    CHECK(std::abs(fit.sigma - 20.0) < 1.5);
    CHECK(std::abs(fit.nu - 3.0) < 0.5);
    CHECK(fit.nu > 1.0);
}

TEST_CASE("fit_noise_tls: normal data pushes nu large and matches the normal fit") {
    Rng rng(29);
    std::vector<double> s(4000);
    for (auto& v : s) v = rng.normal(3.0, 7.0);
    auto fits = fit_noise(s);
    CHECK(fits.tls.nu > 20.0);
    CHECK(fits.tls.log_likelihood >= fits.normal.log_likelihood - 1e-6);
    // densities agree in the bulk
    for (double x : {-10.0, 0.0, 3.0, 10.0, 20.0}) {
        double tls_pdf = std::exp(tls_log_pdf(x, fits.tls.mu, fits.tls.sigma, fits.tls.nu));
        double z = (x - fits.normal.mu) / fits.normal.sigma;
        double normal_pdf =
            std::exp(-0.5 * z * z) / (fits.normal.sigma * std::sqrt(2.0 * kPi));
        CHECK(tls_pdf == Approx(normal_pdf).epsilon(1e-3));
    }
}

TEST_CASE("fit_noise_tls: likelihood never below the normal limit on heavy-tailed data") {
    for (std::uint64_t seed : {100ULL, 101ULL, 102ULL}) {
        Rng rng(seed);
        std::vector<double> s(500);
        for (auto& v : s) v = rng.tls(1.0, 5.0, 2.5);
        auto fits = fit_noise(s);
        CHECK(fits.tls.log_likelihood >= fits.normal.log_likelihood - 1e-6);
    }
}

TEST_CASE("tls_log_pdf: density normalizes to 1") {
    // integrate with the tangent substitution x = mu + sigma tan(theta), which
    // covers the whole line; plain quadrature over a +-50 sigma window misses
    // ~2e-5 of mass at nu = 3
    auto integral = [](double mu, double sigma, double nu) {
        const int n = 200001;
        double h = kPi / (n - 1);
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            double theta = -kPi / 2 + h * i;
            double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            double c = std::cos(theta);
            if (c < 1e-12) continue;
            double x = mu + sigma * std::tan(theta);
            acc += w * std::exp(tls_log_pdf(x, mu, sigma, nu)) * sigma / (c * c);
        }
        return acc * h / 3.0;
    };
    CHECK(integral(-6.2, 20.0, 3.0) == Approx(1.0).epsilon(1e-6));
    CHECK(integral(0.0, 1.0, 1.5) == Approx(1.0).epsilon(1e-6));
    CHECK(integral(5.0, 2.0, 40.0) == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fit_noise_tls: preconditions and convergence errors") {
    std::vector<double> few = {1, 2, 3};
    CHECK_THROWS_AS(fit_noise_tls(few), Error);
    Rng rng(3);
    std::vector<double> s(100);
    for (auto& v : s) v = rng.tls(0.0, 2.0, 4.0);
    TlsFitOptions options;
    options.max_iterations = 1; // cannot converge
    CHECK_THROWS_AS(fit_noise_tls(s, options), Error);
}

TEST_CASE("detect_spikes: crossing definition") {
    std::vector<double> s = {1, 2, 9, 9, 2, 9};
    auto analysis = detect_spikes_at_threshold(s, 8.0);
    CHECK(analysis.spike_times == std::vector<std::size_t>{2, 5});
    CHECK(analysis.waiting_times == std::vector<double>{3.0});
    REQUIRE(analysis.lambda_hat.has_value());
    CHECK(*analysis.lambda_hat == Approx(1.0 / 3.0));
}

TEST_CASE("detect_spikes: fewer than two spikes leaves the rate absent") {
    std::vector<double> s = {1, 9, 9, 9, 9, 9};
    auto analysis = detect_spikes_at_threshold(s, 8.0);
    CHECK(analysis.spike_times.size() == 1);
    CHECK_FALSE(analysis.lambda_hat.has_value());
}

TEST_CASE("detect_spikes: monotone series has exactly one spike") {
    std::vector<double> s(50);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i);
    auto analysis = detect_spikes(s, 95.0);
    CHECK(analysis.spike_times.size() == 1);
}

TEST_CASE("detect_spikes: index 0 counts when already above") {
    std::vector<double> s = {9, 1, 1, 9, 1};
    auto analysis = detect_spikes_at_threshold(s, 8.0);
    CHECK(analysis.spike_times == std::vector<std::size_t>{0, 3});
}

TEST_CASE("detect_spikes: invariant under adding a constant") {
    Rng rng(7);
    std::vector<double> s(400);
    for (auto& v : s) v = rng.uniform(0, 50);
    auto a = detect_spikes(s, 90.0);
    for (auto& v : s) v += 1234.5;
    auto b = detect_spikes(s, 90.0);
    CHECK(a.spike_times == b.spike_times);
    CHECK(a.waiting_times == b.waiting_times);
}

TEST_CASE("detect_spikes: constant series rejected") {
    std::vector<double> s(10, 3.0);
    CHECK_THROWS_AS(detect_spikes(s, 95.0), Error);
}

TEST_CASE("fit_exponential") {
    std::vector<double> w = {2.0, 2.0, 2.0};
    CHECK(fit_exponential(w) == Approx(0.5));
    std::vector<double> m69 = {69.0, 69.0};
    CHECK(fit_exponential(m69) == Approx(1.0 / 69.0).epsilon(1e-9)); // ~0.0145
    std::vector<double> one = {3.0};
    CHECK_THROWS_AS(fit_exponential(one), Error);
    std::vector<double> bad = {3.0, 0.0};
    CHECK_THROWS_AS(fit_exponential(bad), Error);

    Rng rng(55);
    std::vector<double> draws(500);
    for (auto& v : draws) v = rng.exponential(0.015);
    double lambda = fit_exponential(draws);
    CHECK(std::abs(lambda - 0.015) < 0.15 * 0.015);
}

TEST_CASE("percentile: linear interpolation") {
    std::vector<double> v = {10, 20, 30, 40};
    CHECK(percentile(v, 0) == Approx(10));
    CHECK(percentile(v, 100) == Approx(40));
    CHECK(percentile(v, 50) == Approx(25));
    CHECK(percentile(v, 95) == Approx(38.5));
}
