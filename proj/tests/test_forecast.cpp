#include "core/errors.hpp"
#include "core/forecast.hpp"
#include "core/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace tvsched;
using doctest::Approx;

namespace {

DemographicProfile make_profile(std::initializer_list<double> head) {
    ViewershipRecord rec;
    int i = 0;
    for (double v : head) rec.counts[static_cast<std::size_t>(i++)] = static_cast<std::int64_t>(v);
    return demographic_profile(rec);
}

ViewershipRecord record_at(HourStamp t, const std::string& program,
                           std::initializer_list<double> head) {
    ViewershipRecord rec;
    rec.timestamp = t;
    rec.program_id = program;
    int i = 0;
    for (double v : head) rec.counts[static_cast<std::size_t>(i++)] = static_cast<std::int64_t>(v);
    return rec;
}

} // namespace

TEST_CASE("estimate_observation_sigma") {
    SUBCASE("hand-computed bins") {
        std::vector<double> history = {0, 0, 10, 10};
        std::vector<int> two = {2};
        auto est2 = estimate_observation_sigma(history, two);
        CHECK(est2.raw_min == Approx(0.0)); // bins {0,0} and {10,10}
        std::vector<int> one = {1};
        auto est1 = estimate_observation_sigma(history, one);
        CHECK(est1.raw_min == Approx(5.0)); // population sd of the whole history
        std::vector<int> both = {1, 2};
        auto est = estimate_observation_sigma(history, both);
        CHECK(est.raw_min == Approx(0.0)); // minimum over bin counts
        CHECK(est.degenerate);
        CHECK(est.sigma == Approx(0.05)); // 0.01 * mean floor
    }
    SUBCASE("constant history flagged degenerate") {
        std::vector<double> history(20, 50.0);
        std::vector<int> bins = {2, 3};
        auto est = estimate_observation_sigma(history, bins);
        CHECK(est.degenerate);
        CHECK(est.raw_min == Approx(0.0));
        CHECK(est.sigma == Approx(0.5));
    }
    SUBCASE("iid normal history recovers the noise scale") {
        Rng rng(31);
        std::vector<double> history(390);
        for (auto& v : history) v = rng.normal(0.0, 2.0);
        std::vector<int> bins = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        auto est = estimate_observation_sigma(history, bins);
        CHECK(std::abs(est.sigma - 2.0) < 0.3);
    }
    SUBCASE("history too short") {
        std::vector<double> history = {1, 2, 3};
        std::vector<int> bins = {2};
        CHECK_THROWS_AS(estimate_observation_sigma(history, bins), Error);
    }
}

TEST_CASE("init_prior") {
    std::vector<double> two = {90, 110};
    auto prior = init_prior(two);
    CHECK(prior.mean == Approx(100.0));
    CHECK(prior.variance == Approx(200.0)); // unbiased sample variance

    std::vector<double> flat(10, 40.0);
    auto deg = init_prior(flat);
    CHECK(deg.variance == Approx(0.16)); // (0.01 * 40)^2 floor

    Rng rng(77);
    std::vector<double> draws(39);
    for (auto& v : draws) v = rng.normal(1e5, 1e4);
    auto fit = init_prior(draws);
    CHECK(std::abs(fit.mean - 1e5) < 3.0 * 1e4 / std::sqrt(39.0));

    std::vector<double> one = {5.0};
    CHECK_THROWS_AS(init_prior(one), Error);
}

TEST_CASE("kalman_update: conjugate posterior") {
    auto post = kalman_update({100.0, 100.0}, 120.0, 10.0);
    CHECK(post.mean == Approx(110.0));
    CHECK(post.variance == Approx(50.0));

    // quadrature oracle
    auto quad = oracle::conjugate_posterior_quadrature(100.0, 100.0, 120.0, 10.0);
    CHECK(post.mean == Approx(quad.mean).epsilon(1e-6));
    CHECK(post.variance == Approx(quad.variance).epsilon(1e-6));
}

TEST_CASE("kalman_update: limits") {
    auto uninformative = kalman_update({100.0, 100.0}, 500.0, 1e12);
    CHECK(uninformative.mean == Approx(100.0).epsilon(1e-6));
    CHECK(uninformative.variance == Approx(100.0).epsilon(1e-6));

    auto dogmatic = kalman_update({100.0, 1e-12}, 500.0, 10.0);
    CHECK(dogmatic.mean == Approx(100.0).epsilon(1e-9));

    CHECK_THROWS_AS(kalman_update({0, 1}, 0, 0.0), Error);
}

TEST_CASE("kalman_update: information never decreases, updates commute") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianBelief belief{rng.uniform(10, 1000), rng.uniform(1, 500)};
        double sigma = rng.uniform(0.5, 50);
        double y = rng.uniform(0, 1200);
        auto post = kalman_update(belief, y, sigma);
        CHECK(post.variance < belief.variance);
        CHECK(post.variance < sigma * sigma);

        double y2 = rng.uniform(0, 1200);
        auto ab = kalman_update(kalman_update(belief, y, sigma), y2, sigma);
        auto ba = kalman_update(kalman_update(belief, y2, sigma), y, sigma);
        CHECK(ab.mean == Approx(ba.mean).epsilon(1e-9));
        CHECK(ab.variance == Approx(ba.variance).epsilon(1e-9));
    }
}

TEST_CASE("kalman_forecast") {
    KalmanModel model;
    model.obs_sigma = 10.0;
    SlotKey monday{"ch1", 0, 20};
    model.beliefs[monday] = {83902.0, 1e6};
    CHECK(kalman_forecast(model, monday) == Approx(83902.0));

    model.beliefs[monday] = kalman_update({100.0, 100.0}, 120.0, 10.0);
    CHECK(kalman_forecast(model, monday) == Approx(110.0));

    SlotKey fresh{"ch1", 1, 20};
    model.beliefs[fresh] = {500.0, 25.0};
    CHECK(kalman_forecast(model, fresh) == Approx(500.0)); // never updated

    CHECK_THROWS_AS(kalman_forecast(model, SlotKey{"ch2", 0, 0}), Error);
}

TEST_CASE("rms_relative_error") {
    std::vector<double> pred = {83902.0}, actual = {87204.0};
    CHECK(rms_relative_error(pred, actual) == Approx(0.0379).epsilon(2e-3));

    std::vector<double> same = {10, 20, 30};
    CHECK(rms_relative_error(same, same) == Approx(0.0));

    // relative errors 0.3 and 0.4 -> sqrt(0.125)
    std::vector<double> p2 = {130, 140}, a2 = {100, 100};
    CHECK(rms_relative_error(p2, a2) == Approx(std::sqrt(0.125)));

    std::vector<double> zero = {0.0};
    CHECK_THROWS_AS(rms_relative_error(pred, zero), Error);
}

TEST_CASE("rrse") {
    std::vector<double> actual = {1, 2, 3, 6};
    double mean = 3.0;
    std::vector<double> mean_pred(actual.size(), mean);
    CHECK(rrse(mean_pred, actual) == Approx(1.0));
    CHECK(rrse(actual, actual) == Approx(0.0));

    std::vector<double> p = {1, 1}, a = {0, 2};
    CHECK(rrse(p, a) == Approx(1.0));

    std::vector<double> flat = {2, 2};
    CHECK_THROWS_AS(rrse(p, flat), Error);
}

TEST_CASE("knn1: nearest row under the mixed distance") {
    KnnModel model = knn1_train({{"p1", 0, 5, 100.0}, {"p1", 0, 20, 200.0}});
    // query differs only in hour: 6 is nearer to 5 than to 20
    CHECK(knn1_predict(model, {"p1", 0, 6}) == Approx(100.0));
    // exact match wins
    CHECK(knn1_predict(model, {"p1", 0, 20}) == Approx(200.0));

    KnnModel single = knn1_train({{"p9", 3, 12, 55.0}});
    CHECK(knn1_predict(single, {"other", 6, 0}) == Approx(55.0));

    // nominal mismatches dominate the hour term
    KnnModel mixed = knn1_train({{"p1", 0, 0, 1.0}, {"p2", 0, 23, 2.0}});
    CHECK(knn1_predict(mixed, {"p2", 0, 0}) == Approx(2.0));

    // ties break to the earliest training row
    KnnModel tied = knn1_train({{"p1", 0, 5, 10.0}, {"p2", 0, 5, 20.0}});
    CHECK(knn1_predict(tied, {"p3", 0, 5}) == Approx(10.0));

    CHECK_THROWS_AS(knn1_train({}), Error);
}

TEST_CASE("demographic_profile") {
    auto p = make_profile({3, 1});
    CHECK(p.ratios[0] == Approx(0.75));
    CHECK(p.ratios[1] == Approx(0.25));
    CHECK(p.total == Approx(4.0));

    ViewershipRecord uniform;
    uniform.counts.fill(2);
    auto u = demographic_profile(uniform);
    for (int i = 0; i < kCellCount; ++i) CHECK(u.ratios[static_cast<std::size_t>(i)] == Approx(1.0 / 30));

    Rng rng(5);
    ViewershipRecord random;
    for (auto& c : random.counts) c = rng.uniform_int(0, 40) + 1;
    auto r = demographic_profile(random);
    double sum = 0;
    for (double v : r.ratios) sum += v;
    CHECK(sum == Approx(1.0).epsilon(1e-12));

    ViewershipRecord zero;
    CHECK_THROWS_AS(demographic_profile(zero), Error);
}

TEST_CASE("distance_score") {
    auto a = make_profile({3, 1});
    CHECK(distance_score(a, a) == Approx(0.0));

    auto s1 = make_profile({1});
    auto s2 = make_profile({0, 7});
    CHECK(distance_score(s1, s2) == Approx(std::sqrt(2.0)));

    auto b = make_profile({1, 1});
    CHECK(distance_score(a, b) == Approx(std::sqrt(0.125)));
}

TEST_CASE("distance_score is a metric on random profiles") {
    Rng rng(40);
    auto random_profile = [&] {
        ViewershipRecord rec;
        for (auto& c : rec.counts) c = rng.uniform_int(0, 30);
        rec.counts[0] += 1;
        return demographic_profile(rec);
    };
    for (int trial = 0; trial < 100; ++trial) {
        auto x = random_profile(), y = random_profile(), z = random_profile();
        CHECK(distance_score(x, y) == Approx(distance_score(y, x)));
        CHECK(distance_score(x, z) <= distance_score(x, y) + distance_score(y, z) + 1e-12);
        CHECK(distance_score(x, x) == Approx(0.0));
    }
}

TEST_CASE("similarity_dot") {
    auto a = make_profile({3, 1});
    CHECK(similarity_dot(a, a) == Approx(1.0));

    auto s1 = make_profile({1});
    auto s2 = make_profile({0, 7});
    CHECK(similarity_dot(s1, s2) == Approx(0.0));

    auto b = make_profile({1, 1});
    CHECK(similarity_dot(a, b) == Approx(0.8944).epsilon(1e-4));

    // 1 iff equal for l1-normalized profiles
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        ViewershipRecord r1, r2;
        for (auto& c : r1.counts) c = rng.uniform_int(0, 9);
        for (auto& c : r2.counts) c = rng.uniform_int(0, 9);
        r1.counts[0]++;
        r2.counts[0]++;
        auto p1 = demographic_profile(r1), p2 = demographic_profile(r2);
        bool equal = true;
        for (int i = 0; i < kCellCount; ++i)
            if (std::abs(p1.ratios[static_cast<std::size_t>(i)] -
                         p2.ratios[static_cast<std::size_t>(i)]) > 1e-12)
                equal = false;
        if (equal)
            CHECK(similarity_dot(p1, p2) == Approx(1.0));
        else
            CHECK(similarity_dot(p1, p2) < 1.0 - 1e-12);
    }
}

TEST_CASE("pairing_experiment") {
    // program identity determines the profile; time does not
    ViewershipSeries series;
    series.channel_id = "ch1";
    Rng rng(8);
    for (int day = 0; day < 14; ++day) {
        for (int hour = 0; hour < 24; ++hour) {
            HourStamp t = day * 24 + hour;
            std::string program = "prog" + std::to_string(hour % 4);
            ViewershipRecord rec;
            rec.timestamp = t;
            rec.program_id = program;
            int base_cell = (hour % 4) * 7;
            rec.counts[static_cast<std::size_t>(base_cell)] = 80 + rng.uniform_int(0, 5);
            rec.counts[static_cast<std::size_t>(base_cell + 1)] = 20 + rng.uniform_int(0, 5);
            series.records.push_back(rec);
        }
    }

    double d_random = pairing_experiment(series, 3000, PairingCondition::all_random, 7);
    double d_same_prog =
        pairing_experiment(series, 3000, PairingCondition::same_program_same_hour, 7);
    CHECK(d_same_prog < d_random);

    // deterministic given seed
    CHECK(pairing_experiment(series, 500, PairingCondition::all_random, 11) ==
          Approx(pairing_experiment(series, 500, PairingCondition::all_random, 11)));
    CHECK(pairing_experiment(series, 500, PairingCondition::all_random, 11) !=
          pairing_experiment(series, 500, PairingCondition::all_random, 12));

    // identical profiles everywhere -> zero distance under any condition
    ViewershipSeries flat;
    flat.channel_id = "ch1";
    for (int t = 0; t < 400; ++t) {
        ViewershipRecord rec;
        rec.timestamp = t;
        rec.program_id = "p" + std::to_string(t % 3);
        rec.counts[3] = 10;
        rec.counts[4] = 30;
        flat.records.push_back(rec);
    }
    for (auto condition : {PairingCondition::all_random, PairingCondition::same_day_hour,
                           PairingCondition::same_program_same_hour})
        CHECK(pairing_experiment(flat, 200, condition, 3) == Approx(0.0));
}

TEST_CASE("pairing_experiment: unsatisfiable condition reported") {
    ViewershipSeries series;
    series.channel_id = "ch1";
    series.records.push_back(record_at(0, "a", {10}));
    series.records.push_back(record_at(30, "b", {10}));
    CHECK_THROWS_AS(pairing_experiment(series, 10, PairingCondition::same_day_hour, 1), Error);
}

TEST_CASE("predict_new_program") {
    ViewershipSeries history;
    history.channel_id = "ch1";
    HourStamp monday20 = 4 * 24 + 20; // 1970-01-05 was a Monday
    REQUIRE(day_of_week(monday20) == 0);
    for (int week = 0; week < 3; ++week) {
        history.records.push_back(record_at(monday20 + 168 * week, "alpha", {90, 10}));
        history.records.push_back(record_at(monday20 + 168 * week + 1, "offhour", {1, 1}));
    }
    history.records.push_back(record_at(monday20 + 5 * 168, "gamma", {100, 200}));

    SUBCASE("k = 1 returns the nearest program verbatim") {
        // candidates at Monday 20:00: alpha (mean 90/10) and gamma (100/200)
        auto pred = predict_new_program(history, 0, 20, 1);
        REQUIRE(pred.programs_used.size() == 1);
        CHECK(pred.total_impressions ==
              Approx(pred.programs_used[0] == "alpha" ? 100.0 : 300.0));
    }
    SUBCASE("k = all averages") {
        auto pred = predict_new_program(history, 0, 20, 2);
        CHECK(pred.total_impressions == Approx((100.0 + 300.0) / 2));
    }
    SUBCASE("identical candidates return the common value") {
        ViewershipSeries twin;
        twin.channel_id = "ch1";
        twin.records.push_back(record_at(monday20, "a", {50, 50}));
        twin.records.push_back(record_at(monday20 + 168, "b", {50, 50}));
        auto pred = predict_new_program(twin, 0, 20, 2);
        CHECK(pred.total_impressions == Approx(100.0));
        CHECK(pred.profile.ratios[0] == Approx(0.5));
    }
    SUBCASE("two candidates with totals 100 and 200 average to 150") {
        ViewershipSeries pair;
        pair.channel_id = "ch1";
        pair.records.push_back(record_at(monday20, "a", {100}));
        pair.records.push_back(record_at(monday20 + 168, "b", {200}));
        auto pred = predict_new_program(pair, 0, 20, 2);
        CHECK(pred.total_impressions == Approx(150.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(predict_new_program(history, 6, 3, 1), Error);   // no candidates
        CHECK_THROWS_AS(predict_new_program(history, 0, 20, 10), Error); // fewer than k
    }
}
