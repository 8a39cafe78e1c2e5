#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "geoval/spatial.hpp"

namespace geoval::dre {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using spatial::SpatialDataset;

struct LsifConfig {
    int b = 10;                 // number of kernel centers
    double sigma = 2.0;         // Gaussian kernel width
    double lambda = 1e-3;       // nonnegative regularization
    std::uint64_t seed = 0;     // center selection
    double solver_tol = 1e-8;   // KKT tolerance
    long solver_max_iter = 100000;
};

/// Raised when the QP solver cannot reach its KKT tolerance; carries the
/// best iterate so callers can surface the estimate as degraded.
class NumericalInstability : public std::runtime_error {
public:
    NumericalInstability(VectorXd best, double residual)
        : std::runtime_error("LSIF solver did not reach KKT tolerance"),
          best_iterate(std::move(best)),
          kkt_residual(residual) {}

    VectorXd best_iterate;
    double kkt_residual;
};

/// Fitted density ratio w(x) = sum_i alpha_i * exp(-||x - c_i||^2 / (2 sigma^2)).
struct RatioModel {
    MatrixXd centers;  // b x p
    double sigma = 1.0;
    VectorXd alpha;    // b, componentwise nonnegative

    double evaluate(const VectorXd& x) const;
    VectorXd evaluate_rows(const MatrixXd& features) const;
};

/// Sample averages of the LSIF quadratic form: H over source samples,
/// h over target samples.
std::pair<MatrixXd, VectorXd> estimate_Hh(const MatrixXd& source_features,
                                          const MatrixXd& target_features,
                                          const MatrixXd& centers, double sigma);

/// Minimize 0.5 a'Ha - h'a + lambda 1'a subject to a >= 0 by projected
/// gradient with backtracking; the returned point satisfies the KKT
/// conditions within tol.
VectorXd solve_lsif(const MatrixXd& H, const VectorXd& h, double lambda, double tol,
                    long max_iter);

/// End-to-end LSIF fit: draw centers without replacement from the target
/// features (seeded), estimate H/h, solve the QP.
RatioModel fit_ratio(const SpatialDataset& source, const SpatialDataset& target,
                     const LsifConfig& cfg);

}  // namespace geoval::dre
