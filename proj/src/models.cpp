#include "geoval/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "geoval/rng.hpp"

namespace geoval::models {

namespace {

using Eigen::VectorXd;

void check_training_input(const MatrixXd& features, const VectorXi& labels) {
    if (features.rows() < 1) throw std::invalid_argument("train: empty dataset");
    if (features.rows() != labels.size())
        throw std::invalid_argument("train: features/labels row count mismatch");
}

void check_fitted(bool fitted) {
    if (!fitted) throw std::logic_error("predict called before train");
}

// Sorted distinct class identifiers.
std::vector<int> class_values(const VectorXi& labels) {
    std::vector<int> cls(labels.data(), labels.data() + labels.size());
    std::sort(cls.begin(), cls.end());
    cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
    return cls;
}

// ----------------------------------------------------------------------
// Decision tree (CART, Gini)

class DecisionTree final : public Classifier {
public:
    DecisionTree(int max_depth, int min_samples_split)
        : max_depth_(max_depth), min_samples_split_(min_samples_split) {}

    void train(const MatrixXd& features, const VectorXi& labels) override {
        check_training_input(features, labels);
        features_ = features;
        labels_ = labels;
        nodes_.clear();
        std::vector<long> idx(features.rows());
        std::iota(idx.begin(), idx.end(), 0l);
        build(idx, 0);
        fitted_ = true;
    }

    VectorXi predict(const MatrixXd& features) const override {
        check_fitted(fitted_);
        VectorXi out(features.rows());
        for (long i = 0; i < features.rows(); ++i) {
            int node = 0;
            while (!nodes_[node].leaf)
                node = features(i, nodes_[node].feature) < nodes_[node].threshold
                           ? nodes_[node].left
                           : nodes_[node].right;
            out[i] = nodes_[node].label;
        }
        return out;
    }

private:
    struct Node {
        bool leaf = true;
        int label = 0;
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1;
    };

    // Majority label, ties to the smallest class identifier.
    int majority(const std::vector<long>& idx) const {
        std::map<int, long> counts;
        for (long i : idx) counts[labels_[i]] += 1;
        int best = 0;
        long best_count = -1;
        for (const auto& [label, count] : counts)
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        return best;
    }

    static double gini(const std::map<int, long>& counts, long total) {
        double g = 1.0;
        for (const auto& [label, count] : counts) {
            const double p = static_cast<double>(count) / total;
            g -= p * p;
        }
        return g;
    }

    int build(std::vector<long>& idx, int depth) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_[node_id].label = majority(idx);

        const long n = static_cast<long>(idx.size());
        bool pure = true;
        for (long i : idx)
            if (labels_[i] != labels_[idx[0]]) {
                pure = false;
                break;
            }
        if (pure || n < min_samples_split_ || (max_depth_ > 0 && depth >= max_depth_))
            return node_id;

        // Best axis-aligned split by exact Gini scan.
        int best_feature = -1;
        double best_threshold = 0.0, best_score = std::numeric_limits<double>::infinity();
        std::vector<long> sorted(idx);
        for (int f = 0; f < features_.cols(); ++f) {
            std::sort(sorted.begin(), sorted.end(), [&](long a, long b) {
                return features_(a, f) < features_(b, f);
            });
            std::map<int, long> left_counts, right_counts;
            for (long i : sorted) right_counts[labels_[i]] += 1;
            for (long k = 0; k + 1 < n; ++k) {
                const long i = sorted[k];
                left_counts[labels_[i]] += 1;
                if (--right_counts[labels_[i]] == 0) right_counts.erase(labels_[i]);
                const double lo = features_(i, f), hi = features_(sorted[k + 1], f);
                if (lo == hi) continue;
                const long nl = k + 1, nr = n - nl;
                const double score =
                    (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) / n;
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = (lo + hi) / 2.0;
                }
            }
        }
        if (best_feature < 0) return node_id;  // all features constant

        std::vector<long> left, right;
        for (long i : idx)
            (features_(i, best_feature) < best_threshold ? left : right).push_back(i);
        nodes_[node_id].leaf = false;
        nodes_[node_id].feature = best_feature;
        nodes_[node_id].threshold = best_threshold;
        nodes_[node_id].left = build(left, depth + 1);
        nodes_[node_id].right = build(right, depth + 1);
        return node_id;
    }

    int max_depth_, min_samples_split_;
    MatrixXd features_;
    VectorXi labels_;
    std::vector<Node> nodes_;
    bool fitted_ = false;
};

// ----------------------------------------------------------------------
// K-nearest neighbors

class Knn final : public Classifier {
public:
    explicit Knn(int k) : k_(k) {
        if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    }

    void train(const MatrixXd& features, const VectorXi& labels) override {
        check_training_input(features, labels);
        features_ = features;
        labels_ = labels;
        fitted_ = true;
    }

    VectorXi predict(const MatrixXd& features) const override {
        check_fitted(fitted_);
        const long n = features_.rows();
        if (k_ > n) throw std::invalid_argument("knn: k exceeds training set size");
        VectorXi out(features.rows());
        std::vector<std::pair<double, long>> dist(n);
        for (long q = 0; q < features.rows(); ++q) {
            for (long i = 0; i < n; ++i)
                dist[i] = {(features_.row(i) - features.row(q)).squaredNorm(), i};
            std::nth_element(dist.begin(), dist.begin() + (k_ - 1), dist.end());
            std::map<int, int> votes;
            for (int j = 0; j < k_; ++j) votes[labels_[dist[j].second]] += 1;
            int best = 0, best_votes = -1;
            for (const auto& [label, v] : votes)
                if (v > best_votes) {
                    best = label;
                    best_votes = v;
                }
            out[q] = best;
        }
        return out;
    }

private:
    int k_;
    MatrixXd features_;
    VectorXi labels_;
    bool fitted_ = false;
};

// ----------------------------------------------------------------------
// Logistic regression (binary)

class Logistic final : public Classifier {
public:
    Logistic(double learning_rate, long max_iter)
        : learning_rate_(learning_rate), max_iter_(max_iter) {}

    void train(const MatrixXd& features, const VectorXi& labels) override {
        check_training_input(features, labels);
        classes_ = class_values(labels);
        if (classes_.size() > 2)
            throw std::invalid_argument("logistic: binary labels only");
        const long n = features.rows(), p = features.cols();
        VectorXd y(n);
        for (long i = 0; i < n; ++i) y[i] = labels[i] == classes_.back() ? 1.0 : 0.0;

        weights_ = VectorXd::Zero(p);
        intercept_ = 0.0;
        degraded_ = true;
        for (long it = 0; it < max_iter_; ++it) {
            const VectorXd z = features * weights_ + VectorXd::Constant(n, intercept_);
            const VectorXd prob = 1.0 / (1.0 + (-z.array()).exp());
            const VectorXd err = prob - y;
            const VectorXd grad_w = features.transpose() * err / n;
            const double grad_b = err.mean();
            weights_ -= learning_rate_ * grad_w;
            intercept_ -= learning_rate_ * grad_b;
            if (grad_w.lpNorm<Eigen::Infinity>() < 1e-6 && std::abs(grad_b) < 1e-6) {
                degraded_ = false;
                break;
            }
        }
        fitted_ = true;
    }

    VectorXi predict(const MatrixXd& features) const override {
        check_fitted(fitted_);
        VectorXi out(features.rows());
        const VectorXd z = features * weights_ + VectorXd::Constant(features.rows(), intercept_);
        for (long i = 0; i < features.rows(); ++i)
            out[i] = z[i] >= 0.0 ? classes_.back() : classes_.front();
        return out;
    }

    bool degraded() const override { return degraded_; }

private:
    double learning_rate_;
    long max_iter_;
    VectorXd weights_;
    double intercept_ = 0.0;
    std::vector<int> classes_;
    bool fitted_ = false;
    bool degraded_ = false;
};

// ----------------------------------------------------------------------
// Gaussian naive Bayes

class GaussianNb final : public Classifier {
public:
    void train(const MatrixXd& features, const VectorXi& labels) override {
        check_training_input(features, labels);
        classes_ = class_values(labels);
        const long p = features.cols();
        means_.assign(classes_.size(), VectorXd::Zero(p));
        vars_.assign(classes_.size(), VectorXd::Zero(p));
        log_priors_.assign(classes_.size(), 0.0);
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            std::vector<long> idx;
            for (long i = 0; i < labels.size(); ++i)
                if (labels[i] == classes_[c]) idx.push_back(i);
            log_priors_[c] = std::log(static_cast<double>(idx.size()) / labels.size());
            for (long i : idx) means_[c] += features.row(i).transpose();
            means_[c] /= static_cast<double>(idx.size());
            for (long i : idx)
                vars_[c] += (features.row(i).transpose() - means_[c]).cwiseAbs2();
            vars_[c] /= static_cast<double>(idx.size());
            vars_[c] = vars_[c].cwiseMax(1e-9);  // zero-variance floor
        }
        fitted_ = true;
    }

    VectorXi predict(const MatrixXd& features) const override {
        check_fitted(fitted_);
        VectorXi out(features.rows());
        for (long i = 0; i < features.rows(); ++i) {
            int best = classes_.front();
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < classes_.size(); ++c) {
                const VectorXd diff = features.row(i).transpose() - means_[c];
                const double score =
                    log_priors_[c] -
                    0.5 * (vars_[c].array().log().sum() +
                           (diff.cwiseAbs2().cwiseQuotient(vars_[c])).sum());
                if (score > best_score) {
                    best_score = score;
                    best = classes_[c];
                }
            }
            out[i] = best;
        }
        return out;
    }

private:
    std::vector<int> classes_;
    std::vector<VectorXd> means_;
    std::vector<VectorXd> vars_;
    std::vector<double> log_priors_;
    bool fitted_ = false;
};

// ----------------------------------------------------------------------
// Dummy (training-marginal sampler)

class Dummy final : public Classifier {
public:
    explicit Dummy(std::uint64_t seed) : seed_(seed) {}

    void train(const MatrixXd& features, const VectorXi& labels) override {
        check_training_input(features, labels);
        classes_ = class_values(labels);
        cumulative_.clear();
        double cum = 0.0;
        for (int cls : classes_) {
            long count = 0;
            for (long i = 0; i < labels.size(); ++i)
                if (labels[i] == cls) ++count;
            cum += static_cast<double>(count) / labels.size();
            cumulative_.push_back(cum);
        }
        fitted_ = true;
    }

    VectorXi predict(const MatrixXd& features) const override {
        check_fitted(fitted_);
        // Reseeded per call so predict stays deterministic and repeatable.
        Rng rng(seed_);
        VectorXi out(features.rows());
        for (long i = 0; i < features.rows(); ++i) {
            const double u = rng.uniform();
            std::size_t c = 0;
            while (c + 1 < cumulative_.size() && u >= cumulative_[c]) ++c;
            out[i] = classes_[c];
        }
        return out;
    }

private:
    std::uint64_t seed_;
    std::vector<int> classes_;
    std::vector<double> cumulative_;
    bool fitted_ = false;
};

}  // namespace

std::unique_ptr<Classifier> decision_tree(int max_depth, int min_samples_split,
                                          std::uint64_t /*seed*/) {
    return std::make_unique<DecisionTree>(max_depth, std::max(min_samples_split, 2));
}

std::unique_ptr<Classifier> knn(int k, std::uint64_t /*seed*/) {
    return std::make_unique<Knn>(k);
}

std::unique_ptr<Classifier> logistic(double learning_rate, long max_iter,
                                     std::uint64_t /*seed*/) {
    return std::make_unique<Logistic>(learning_rate, max_iter);
}

std::unique_ptr<Classifier> gaussian_nb() { return std::make_unique<GaussianNb>(); }

std::unique_ptr<Classifier> dummy(std::uint64_t seed) { return std::make_unique<Dummy>(seed); }

ModelFactory factory_by_name(const std::string& name) {
    if (name == "tree")
        return [](std::uint64_t seed) { return decision_tree(0, 2, seed); };
    if (name == "knn")
        return [](std::uint64_t seed) { return knn(5, seed); };
    if (name == "logistic")
        return [](std::uint64_t seed) { return logistic(0.1, 2000, seed); };
    if (name == "gaussian_nb")
        return [](std::uint64_t) { return gaussian_nb(); };
    if (name == "dummy")
        return [](std::uint64_t seed) { return dummy(seed); };
    throw std::invalid_argument("unknown model name: " + name);
}

}  // namespace geoval::models
