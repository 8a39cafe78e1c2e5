#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "geoval/models.hpp"
#include "geoval/rng.hpp"
#include "geoval/simulate.hpp"
#include "geoval/validate.hpp"

using namespace geoval;
using namespace geoval::validate;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using spatial::RegularGrid;
using spatial::SpatialDataset;

namespace {

SpatialDataset noisy_binary(long n, std::uint64_t seed) {
    // i.i.d. features, labels pure coin flips: no learnable signal.
    MatrixXd coords(n, 2), f(n, 2);
    VectorXi y(n);
    Rng rng(seed);
    for (long i = 0; i < n; ++i) {
        coords(i, 0) = rng.uniform() * 100;
        coords(i, 1) = rng.uniform() * 100;
        f(i, 0) = rng.normal();
        f(i, 1) = rng.normal();
        y[i] = i % 2;  // exactly balanced
    }
    return {coords, f, y};
}

SpatialDataset learnable(long n, std::uint64_t seed) {
    MatrixXd coords(n, 2), f(n, 2);
    VectorXi y(n);
    Rng rng(seed);
    for (long i = 0; i < n; ++i) {
        coords(i, 0) = rng.uniform() * 100;
        coords(i, 1) = rng.uniform() * 100;
        f(i, 0) = rng.normal();
        f(i, 1) = rng.normal();
        y[i] = f(i, 0) + f(i, 1) >= 0 ? 1 : 0;
    }
    return {coords, f, y};
}

void check_partition(const FoldPartition& p, long n) {
    std::set<long> all_eval;
    for (const auto& fold : p.folds) {
        std::set<long> train(fold.train.begin(), fold.train.end());
        for (long e : fold.eval) {
            CHECK(all_eval.insert(e).second);  // eval sets pairwise disjoint
            CHECK(train.count(e) == 0);        // train disjoint from eval
        }
    }
    CHECK(static_cast<long>(all_eval.size()) == n);
}

}  // namespace

TEST_CASE("random_folds balanced split") {
    const auto p = random_folds(4, 2, 1);
    REQUIRE(p.k() == 2);
    CHECK(p.folds[0].eval.size() == 2);
    CHECK(p.folds[1].eval.size() == 2);
    check_partition(p, 4);
}

TEST_CASE("random_folds fold sizes at several scales") {
    const auto p = random_folds(10000, 25, 3);
    REQUIRE(p.k() == 25);
    for (const auto& fold : p.folds) {
        CHECK(fold.eval.size() == 400);
        CHECK(fold.train.size() == 9600);
    }
    check_partition(p, 10000);
}

TEST_CASE("random_folds distributes the remainder") {
    const auto p = random_folds(5, 2, 9);
    std::multiset<std::size_t> sizes{p.folds[0].eval.size(), p.folds[1].eval.size()};
    CHECK(sizes == std::multiset<std::size_t>{2, 3});
    check_partition(p, 5);
    CHECK_THROWS(random_folds(3, 4, 0));
}

TEST_CASE("random_folds is seed-deterministic") {
    const auto a = random_folds(100, 7, 42);
    const auto b = random_folds(100, 7, 42);
    for (int i = 0; i < 7; ++i) {
        CHECK(a.folds[i].eval == b.folds[i].eval);
        CHECK(a.folds[i].train == b.folds[i].train);
    }
}

TEST_CASE("block_folds reproduces the 25-fold grid arithmetic") {
    const MatrixXd coords =
        spatial::grid_sites(RegularGrid({100, 100}, {1.0, 1.0}, {0.0, 0.0}));
    const auto p = block_folds(coords, {20.0, 20.0}, 0.0);
    REQUIRE(p.k() == 25);
    for (const auto& fold : p.folds) {
        CHECK(fold.eval.size() == 400);
        CHECK(fold.train.size() == 9600);  // zero dead zone: pure complement
    }
    check_partition(p, 10000);
}

TEST_CASE("dead zone excludes exactly the near-eval samples") {
    const MatrixXd coords =
        spatial::grid_sites(RegularGrid({12, 12}, {1.0, 1.0}, {0.0, 0.0}));
    const double radius = 2.5;
    const auto p0 = block_folds(coords, {4.0, 4.0}, 0.0);
    const auto p1 = block_folds(coords, {4.0, 4.0}, radius);
    REQUIRE(p0.k() == p1.k());
    for (int fi = 0; fi < p0.k(); ++fi) {
        // brute-force oracle: train = complement minus anything within radius
        std::set<long> expected;
        for (long t : p0.folds[fi].train) {
            double dmin = 1e9;
            for (long e : p0.folds[fi].eval)
                dmin = std::min(dmin, (coords.row(t) - coords.row(e)).norm());
            if (dmin > radius) expected.insert(t);
        }
        std::set<long> actual(p1.folds[fi].train.begin(), p1.folds[fi].train.end());
        CHECK(actual == expected);
        CHECK(actual.size() <= p0.folds[fi].train.size());  // monotone shrinkage
        CHECK(p1.folds[fi].eval == p0.folds[fi].eval);
    }
}

TEST_CASE("block_folds rejects a single-block layout") {
    const MatrixXd coords =
        spatial::grid_sites(RegularGrid({5, 5}, {1.0, 1.0}, {0.0, 0.0}));
    CHECK_THROWS_WITH_AS(block_folds(coords, {100.0, 100.0}, 0.0),
                         doctest::Contains("single-fold"), std::runtime_error);
}

TEST_CASE("iwcv with unit weights equals plain CV") {
    const auto data = learnable(300, 5);
    const auto folds = random_folds(data.n(), 5, 11);
    const auto factory = models::factory_by_name("knn");
    const auto plain = iwcv(factory, data, folds, std::nullopt, 0.0);
    const auto unit =
        iwcv(factory, data, folds, VectorXd::Ones(data.n()), 1.0);
    CHECK(plain.value == unit.value);
    CHECK(plain.per_fold == unit.per_fold);
}

TEST_CASE("l = 0 annihilates arbitrary weights exactly") {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        const auto data = learnable(150, 600 + t);
        const auto folds = random_folds(data.n(), 3, t);
        VectorXd weights(data.n());
        for (long i = 0; i < data.n(); ++i) weights[i] = 10.0 * rng.uniform();
        const auto factory = models::factory_by_name("tree");
        const auto weighted = iwcv(factory, data, folds, weights, 0.0);
        const auto plain = iwcv(factory, data, folds, std::nullopt, 1.0);
        CHECK(std::abs(weighted.value - plain.value) <= 1e-12);
    }
}

TEST_CASE("constant weights scale the estimate by exactly c") {
    const auto data = learnable(200, 23);
    const auto folds = random_folds(data.n(), 4, 29);
    const auto factory = models::factory_by_name("gaussian_nb");
    const double c = 2.75;
    const auto plain = iwcv(factory, data, folds, std::nullopt, 1.0);
    const auto scaled = iwcv(factory, data, folds, VectorXd::Constant(data.n(), c), 1.0);
    for (int f = 0; f < folds.k(); ++f)
        CHECK(scaled.per_fold[f] == doctest::Approx(c * plain.per_fold[f]).epsilon(1e-12));
}

TEST_CASE("estimate value is invariant under fold reordering") {
    const auto data = learnable(200, 37);
    auto folds = random_folds(data.n(), 5, 41);
    const auto factory = models::factory_by_name("knn");
    const auto before = iwcv(factory, data, folds, std::nullopt, 1.0);
    std::reverse(folds.folds.begin(), folds.folds.end());
    // fold-index seeds change with position, but knn training is seedless
    const auto after = iwcv(factory, data, folds, std::nullopt, 1.0);
    CHECK(before.value == doctest::Approx(after.value).epsilon(1e-12));
}

TEST_CASE("value is the mean of per-fold means") {
    const auto data = learnable(123, 53);
    const auto folds = random_folds(data.n(), 4, 7);
    const auto est = iwcv(models::factory_by_name("tree"), data, folds, std::nullopt, 1.0);
    double mean = 0.0;
    for (double v : est.per_fold) mean += v;
    CHECK(est.value == doctest::Approx(mean / est.per_fold.size()).epsilon(1e-14));
    CHECK(est.n_eval == data.n());
}

TEST_CASE("dummy CV sits at the Bernoulli limit") {
    const auto data = noisy_binary(4000, 61);
    const auto est = estimate_cv(models::factory_by_name("dummy"), data, 5, 71);
    CHECK(est.value == doctest::Approx(0.5).epsilon(0.03 / 0.5));
    const auto again = estimate_cv(models::factory_by_name("dummy"), data, 5, 71);
    CHECK(est.value == again.value);  // seed-deterministic
}

TEST_CASE("k = n gives leave-one-out singleton folds") {
    const auto data = learnable(30, 83);
    const auto folds = random_folds(data.n(), 30, 5);
    for (const auto& fold : folds.folds) CHECK(fold.eval.size() == 1);
    const auto est = iwcv(models::factory_by_name("knn"), data, folds, std::nullopt, 1.0);
    CHECK(est.per_fold.size() == 30);
}

TEST_CASE("BCV and CV agree without spatial correlation") {
    // i.i.d. data: blocking is irrelevant, the two estimators target the
    // same quantity.
    double diff_sum = 0.0;
    for (int s = 0; s < 10; ++s) {
        const auto data = learnable(1600, 900 + s);
        const auto factory = models::factory_by_name("knn");
        const auto bcv = estimate_bcv(factory, data, {25.0, 25.0}, 0.0);
        const auto cv = estimate_cv(factory, data, bcv.per_fold.size(), 31 + s);
        diff_sum += std::abs(bcv.value - cv.value);
    }
    CHECK(diff_sum / 10 < 0.03);
}

TEST_CASE("DRV with matching domains stays close to CV") {
    const auto data = learnable(800, 101);
    const auto target = learnable(800, 102);
    const auto factory = models::factory_by_name("knn");
    const auto folds = random_folds(data.n(), 5, 7);
    dre::LsifConfig cfg;
    cfg.seed = 3;
    const auto drv = estimate_drv(factory, data, target.features, cfg, folds, 1.0);
    const auto cv = iwcv(factory, data, folds, std::nullopt, 1.0);
    REQUIRE(drv.status == EstimateStatus::ok);
    CHECK(std::abs(drv.value - cv.value) < 0.05);
}

TEST_CASE("DRV with l = 0 is exactly CV") {
    const auto data = learnable(300, 111);
    const auto target = learnable(300, 112);
    const auto factory = models::factory_by_name("tree");
    const auto folds = random_folds(data.n(), 4, 13);
    dre::LsifConfig cfg;
    const auto drv = estimate_drv(factory, data, target.features, cfg, folds, 0.0);
    const auto cv = iwcv(factory, data, folds, std::nullopt, 1.0);
    REQUIRE(drv.status == EstimateStatus::ok);
    CHECK(drv.value == cv.value);
}

TEST_CASE("solver instability degrades the estimate instead of throwing") {
    const auto data = learnable(300, 121);
    const auto target = learnable(300, 122);
    const auto folds = random_folds(data.n(), 4, 17);
    dre::LsifConfig cfg;
    cfg.solver_max_iter = 1;  // force non-convergence
    cfg.solver_tol = 1e-16;
    const auto drv = estimate_drv(models::factory_by_name("knn"), data, target.features,
                                  cfg, folds, 1.0);
    CHECK(drv.status == EstimateStatus::degraded);
    CHECK(std::isnan(drv.value));
    CHECK_FALSE(drv.degraded_reason.empty());
}

TEST_CASE("true_error of the labeling oracle is zero") {
    const sim::LabelingFunction lf(1, 4.0);
    class Oracle : public models::Classifier {
    public:
        explicit Oracle(sim::LabelingFunction f) : lf_(f) {}
        void train(const MatrixXd&, const VectorXi&) override {}
        VectorXi predict(const MatrixXd& features) const override {
            return sim::label_rows(lf_, features);
        }

    private:
        sim::LabelingFunction lf_;
    } oracle(lf);

    const RegularGrid grid({30, 30}, {1.0, 1.0}, {0.0, 0.0});
    auto generator = [&](std::uint64_t seed) {
        auto problem = sim::make_problem(sim::ShiftSpec(0.4, 0.8), 10.0, grid, lf, seed);
        return std::move(problem.second);
    };
    CHECK(true_error(oracle, generator, 20, 5) == 0.0);
}

TEST_CASE("true_error of a fixed dummy approaches one half") {
    // train on the same +/-1 label alphabet the simulated targets use
    auto train_data = noisy_binary(500, 131);
    for (long i = 0; i < train_data.n(); ++i)
        (*train_data.labels)[i] = (*train_data.labels)[i] == 0 ? -1 : 1;
    auto model = models::dummy(7);
    model->train(train_data.features, *train_data.labels);
    const sim::LabelingFunction lf(1, 4.0);
    const RegularGrid grid({30, 30}, {1.0, 1.0}, {0.0, 0.0});
    auto generator = [&](std::uint64_t seed) {
        auto problem = sim::make_problem(sim::ShiftSpec(0.0, 1.0), 0.0, grid, lf, seed);
        return std::move(problem.second);
    };
    CHECK(true_error(*model, generator, 40, 9) == doctest::Approx(0.5).epsilon(0.05 / 0.5));
}

TEST_CASE("frozen-model CV matches hold-out error on i.i.d. data") {
    // Train once, freeze, then check that the unweighted estimator over
    // fresh i.i.d. data agrees with an independent hold-out within 3 SE.
    const auto train_data = learnable(600, 141);
    auto frozen = models::gaussian_nb();
    frozen->train(train_data.features, *train_data.labels);

    const auto eval_data = learnable(2000, 142);
    const auto holdout = learnable(2000, 143);
    const double hold_err =
        (frozen->predict(holdout.features).array() != holdout.labels->array())
            .cast<double>()
            .mean();
    // CV over a frozen model: factory ignores training by returning a copy
    // trained on the original data.
    auto factory = [&](std::uint64_t) {
        auto m = models::gaussian_nb();
        m->train(train_data.features, *train_data.labels);
        return m;
    };
    const auto est = estimate_cv(factory, eval_data, 5, 151);
    const double se = std::sqrt(hold_err * (1 - hold_err) / 2000);
    CHECK(std::abs(est.value - hold_err) < 3 * se + 3 * se);  // both sides are noisy
}
