#include "geoval/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "geoval/rng.hpp"

namespace geoval::validate {

FoldPartition random_folds(long n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw std::invalid_argument("random_folds: need 2 <= k <= n");

    std::vector<long> idx(n);
    std::iota(idx.begin(), idx.end(), 0l);
    Rng rng(seed);
    for (long i = n - 1; i > 0; --i) {
        const long j = static_cast<long>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }

    FoldPartition part;
    part.strategy = FoldStrategy::random;
    part.folds.resize(k);
    long pos = 0;
    for (int f = 0; f < k; ++f) {
        const long size = n / k + (f < n % k ? 1 : 0);
        auto& fold = part.folds[f];
        fold.eval.assign(idx.begin() + pos, idx.begin() + pos + size);
        std::sort(fold.eval.begin(), fold.eval.end());
        pos += size;
    }
    for (int f = 0; f < k; ++f) {
        auto& fold = part.folds[f];
        fold.train.reserve(n - fold.eval.size());
        std::size_t e = 0;
        for (long i = 0; i < n; ++i) {
            if (e < fold.eval.size() && fold.eval[e] == i)
                ++e;
            else
                fold.train.push_back(i);
        }
    }
    return part;
}

FoldPartition block_folds(const MatrixXd& coords, const std::vector<double>& block_sides,
                          double dead_zone_radius) {
    const long n = coords.rows();
    const int d = static_cast<int>(coords.cols());
    if (static_cast<int>(block_sides.size()) != d)
        throw std::invalid_argument("block_folds: block_sides dimension mismatch");
    for (double s : block_sides)
        if (!(s > 0.0)) throw std::invalid_argument("block_folds: block sides must be > 0");
    if (dead_zone_radius < 0.0)
        throw std::invalid_argument("block_folds: dead_zone_radius must be >= 0");

    const Eigen::RowVectorXd mins = coords.colwise().minCoeff();

    // Map each sample to its block's axis indices, folds ordered by
    // lexicographic block index for determinism.
    std::map<std::vector<long>, std::vector<long>> blocks;
    std::vector<long> key(d);
    for (long i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a)
            key[a] = static_cast<long>(std::floor((coords(i, a) - mins[a]) / block_sides[a]));
        blocks[key].push_back(i);
    }
    if (blocks.size() < 2) throw std::runtime_error("block_folds: single-fold partition");

    FoldPartition part;
    part.strategy = FoldStrategy::block;
    const double radius2 = dead_zone_radius * dead_zone_radius;
    for (auto& [block_key, eval] : blocks) {
        Fold fold;
        fold.eval = eval;
        std::vector<bool> is_eval(n, false);
        for (long i : eval) is_eval[i] = true;
        for (long i = 0; i < n; ++i) {
            if (is_eval[i]) continue;
            bool dead = false;
            if (dead_zone_radius > 0.0) {
                for (long e : eval)
                    if ((coords.row(i) - coords.row(e)).squaredNorm() <= radius2) {
                        dead = true;
                        break;
                    }
            }
            if (!dead) fold.train.push_back(i);
        }
        part.folds.push_back(std::move(fold));
    }
    return part;
}

ErrorEstimate iwcv(const ModelFactory& factory, const SpatialDataset& data,
                   const FoldPartition& folds,
                   const std::optional<VectorXd>& weights, double l) {
    if (!data.labels) throw std::invalid_argument("iwcv: dataset has no labels");
    if (weights) {
        if (weights->size() != data.n())
            throw std::invalid_argument("iwcv: weight vector length mismatch");
        if ((weights->array() < 0.0).any())
            throw std::invalid_argument("iwcv: weights must be nonnegative");
    }
    if (l < 0.0 || l > 1.0) throw std::invalid_argument("iwcv: l must be in [0, 1]");

    const auto& labels = *data.labels;
    ErrorEstimate est;
    for (int f = 0; f < folds.k(); ++f) {
        const auto& fold = folds.folds[f];
        if (fold.train.empty() || fold.eval.empty())
            throw std::runtime_error("iwcv: empty train or eval set in fold " +
                                     std::to_string(f));

        MatrixXd train_x(fold.train.size(), data.features.cols());
        Eigen::VectorXi train_y(fold.train.size());
        for (std::size_t i = 0; i < fold.train.size(); ++i) {
            train_x.row(i) = data.features.row(fold.train[i]);
            train_y[i] = labels[fold.train[i]];
        }
        MatrixXd eval_x(fold.eval.size(), data.features.cols());
        for (std::size_t i = 0; i < fold.eval.size(); ++i)
            eval_x.row(i) = data.features.row(fold.eval[i]);

        auto model = factory(Rng::derive(0, {static_cast<std::uint64_t>(f)}));
        model->train(train_x, train_y);
        const Eigen::VectorXi pred = model->predict(eval_x);

        double sum = 0.0;
        for (std::size_t i = 0; i < fold.eval.size(); ++i) {
            const double loss = pred[i] != labels[fold.eval[i]] ? 1.0 : 0.0;
            // l == 0 recovers the unweighted estimator exactly.
            const double scale =
                (l == 0.0 || !weights) ? 1.0 : std::pow((*weights)[fold.eval[i]], l);
            sum += scale * loss;
        }
        est.per_fold.push_back(sum / static_cast<double>(fold.eval.size()));
        est.n_eval += static_cast<long>(fold.eval.size());
    }
    est.value = std::accumulate(est.per_fold.begin(), est.per_fold.end(), 0.0) /
                static_cast<double>(est.per_fold.size());
    return est;
}

ErrorEstimate estimate_cv(const ModelFactory& factory, const SpatialDataset& data, int k,
                          std::uint64_t seed) {
    return iwcv(factory, data, random_folds(data.n(), k, seed), std::nullopt, 0.0);
}

ErrorEstimate estimate_bcv(const ModelFactory& factory, const SpatialDataset& data,
                           const std::vector<double>& block_sides, double dead_zone_radius) {
    return iwcv(factory, data, block_folds(data.coords, block_sides, dead_zone_radius),
                std::nullopt, 0.0);
}

ErrorEstimate estimate_drv(const ModelFactory& factory, const SpatialDataset& source,
                           const MatrixXd& target_features, const dre::LsifConfig& lsif_cfg,
                           const FoldPartition& folds, double l) {
    try {
        SpatialDataset target(MatrixXd::Zero(target_features.rows(), source.coords.cols()),
                              target_features);
        const dre::RatioModel ratio = dre::fit_ratio(source, target, lsif_cfg);
        const VectorXd weights = ratio.evaluate_rows(source.features);
        return iwcv(factory, source, folds, weights, l);
    } catch (const dre::NumericalInstability& e) {
        ErrorEstimate est;
        est.value = std::numeric_limits<double>::quiet_NaN();
        est.status = EstimateStatus::degraded;
        est.degraded_reason = e.what();
        return est;
    }
}

double true_error(const Classifier& model,
                  const std::function<SpatialDataset(std::uint64_t)>& target_generator,
                  int n_realizations, std::uint64_t seed) {
    if (n_realizations < 1)
        throw std::invalid_argument("true_error: n_realizations must be >= 1");
    double total = 0.0;
    long count = 0;
    for (int r = 0; r < n_realizations; ++r) {
        const SpatialDataset target =
            target_generator(Rng::derive(seed, {static_cast<std::uint64_t>(r)}));
        if (!target.labels)
            throw std::invalid_argument("true_error: generated target has no labels");
        const Eigen::VectorXi pred = model.predict(target.features);
        for (long i = 0; i < target.n(); ++i)
            total += pred[i] != (*target.labels)[i] ? 1.0 : 0.0;
        count += target.n();
    }
    return total / static_cast<double>(count);
}

}  // namespace geoval::validate
