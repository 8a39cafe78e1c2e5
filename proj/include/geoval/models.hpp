#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

namespace geoval::models {

using Eigen::MatrixXd;
using Eigen::VectorXi;

/// Uniform pointwise train/predict contract. Instances start unfit;
/// predict before train throws. Once trained an instance is immutable
/// and safe to share across threads for predict.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual void train(const MatrixXd& features, const VectorXi& labels) = 0;
    virtual VectorXi predict(const MatrixXd& features) const = 0;

    /// Set after train when the fit terminated without converging
    /// (logistic only); predictions are still usable.
    virtual bool degraded() const { return false; }
};

using ModelFactory = std::function<std::unique_ptr<Classifier>(std::uint64_t seed)>;

/// CART with Gini impurity and axis-aligned thresholds. max_depth <= 0
/// means unlimited (deliberately overfit-capable).
std::unique_ptr<Classifier> decision_tree(int max_depth = 0, int min_samples_split = 2,
                                          std::uint64_t seed = 0);

/// Euclidean k-nearest neighbors, majority vote, ties broken by smallest
/// class identifier.
std::unique_ptr<Classifier> knn(int k = 5, std::uint64_t seed = 0);

/// Binary logistic regression, full-batch cross-entropy gradient descent
/// with intercept.
std::unique_ptr<Classifier> logistic(double learning_rate = 0.1, long max_iter = 2000,
                                     std::uint64_t seed = 0);

/// Per-class per-feature Gaussian likelihoods with frequency priors;
/// variances floored at 1e-9.
std::unique_ptr<Classifier> gaussian_nb();

/// Predicts by sampling the training label marginal, seeded.
std::unique_ptr<Classifier> dummy(std::uint64_t seed = 0);

/// Factory lookup by name: dummy, knn, tree, logistic, gaussian_nb.
ModelFactory factory_by_name(const std::string& name);

}  // namespace geoval::models
