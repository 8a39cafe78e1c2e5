#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geoval/dre.hpp"
#include "geoval/models.hpp"
#include "geoval/spatial.hpp"

namespace geoval::validate {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using models::Classifier;
using models::ModelFactory;
using spatial::SpatialDataset;

enum class FoldStrategy { random, block };

struct Fold {
    std::vector<long> train;
    std::vector<long> eval;
};

struct FoldPartition {
    std::vector<Fold> folds;
    FoldStrategy strategy = FoldStrategy::random;

    int k() const { return static_cast<int>(folds.size()); }
};

/// Seeded shuffle split into k folds with eval sizes differing by at
/// most one; eval sets partition the index set, train = complement.
FoldPartition random_folds(long n, int k, std::uint64_t seed);

/// One fold per nonempty axis-aligned block (half-open, anchored at the
/// bounding-box minimum). Training samples within dead_zone_radius of any
/// eval sample are excluded from that fold's train set.
FoldPartition block_folds(const MatrixXd& coords, const std::vector<double>& block_sides,
                          double dead_zone_radius);

enum class EstimateStatus { ok, degraded };

struct ErrorEstimate {
    double value = 0.0;            // mean of per-fold means
    std::vector<double> per_fold;
    long n_eval = 0;
    EstimateStatus status = EstimateStatus::ok;
    std::string degraded_reason;
};

/// Importance-weighted cross-validation with 0-1 loss: per fold, a fresh
/// model from the factory is trained on the train indices and each eval
/// loss is scaled by weight^l. Absent weights mean weights == 1; l == 0
/// bypasses weights entirely and reproduces the unweighted estimator.
ErrorEstimate iwcv(const ModelFactory& factory, const SpatialDataset& data,
                   const FoldPartition& folds,
                   const std::optional<VectorXd>& weights, double l);

/// Random k-fold CV (unweighted).
ErrorEstimate estimate_cv(const ModelFactory& factory, const SpatialDataset& data, int k,
                          std::uint64_t seed);

/// Block CV (unweighted).
ErrorEstimate estimate_bcv(const ModelFactory& factory, const SpatialDataset& data,
                           const std::vector<double>& block_sides, double dead_zone_radius);

/// Density ratio validation: LSIF weights fitted once on the full
/// source/target pair, then IWCV with exponent l. Solver instability is
/// surfaced as a degraded estimate, never thrown.
ErrorEstimate estimate_drv(const ModelFactory& factory, const SpatialDataset& source,
                           const MatrixXd& target_features, const dre::LsifConfig& lsif_cfg,
                           const FoldPartition& folds, double l = 1.0);

/// Monte-Carlo ground truth: mean 0-1 loss of a fixed trained model over
/// freshly generated labeled target realizations. The generator receives
/// a per-realization seed derived from (seed, realization index).
double true_error(const Classifier& model,
                  const std::function<SpatialDataset(std::uint64_t)>& target_generator,
                  int n_realizations, std::uint64_t seed);

}  // namespace geoval::validate
