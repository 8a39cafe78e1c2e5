#include "geoval/dre.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <cmath>
#include <numeric>
#include <vector>

#include "geoval/rng.hpp"

namespace geoval::dre {

namespace {

// Kernel matrix: rows = samples, cols = centers.
MatrixXd kernel_matrix(const MatrixXd& samples, const MatrixXd& centers, double sigma) {
    const long n = samples.rows();
    const long b = centers.rows();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    MatrixXd phi(n, b);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < b; ++j)
            phi(i, j) = std::exp(-(samples.row(i) - centers.row(j)).squaredNorm() * inv);
    return phi;
}

}  // namespace

double RatioModel::evaluate(const VectorXd& x) const {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double w = 0.0;
    for (long j = 0; j < centers.rows(); ++j)
        w += alpha[j] * std::exp(-(x.transpose() - centers.row(j)).squaredNorm() * inv);
    return w;
}

VectorXd RatioModel::evaluate_rows(const MatrixXd& features) const {
    return kernel_matrix(features, centers, sigma) * alpha;
}

std::pair<MatrixXd, VectorXd> estimate_Hh(const MatrixXd& source_features,
                                          const MatrixXd& target_features,
                                          const MatrixXd& centers, double sigma) {
    if (source_features.rows() < 1 || target_features.rows() < 1)
        throw std::invalid_argument("estimate_Hh: empty sample set");
    if (!(sigma > 0.0)) throw std::invalid_argument("estimate_Hh: sigma must be > 0");

    const MatrixXd phi_s = kernel_matrix(source_features, centers, sigma);
    const MatrixXd phi_t = kernel_matrix(target_features, centers, sigma);
    MatrixXd H = (phi_s.transpose() * phi_s) / static_cast<double>(phi_s.rows());
    H = ((H + H.transpose()) / 2.0).eval();  // enforce exact symmetry
    VectorXd h = phi_t.colwise().mean().transpose();
    return {std::move(H), std::move(h)};
}

VectorXd solve_lsif(const MatrixXd& H, const VectorXd& h, double lambda, double tol,
                    long max_iter) {
    if (lambda < 0.0) throw std::invalid_argument("solve_lsif: lambda must be >= 0");
    if (!h.allFinite() || !H.allFinite())
        throw std::invalid_argument("solve_lsif: non-finite input");
    const long b = h.size();
    const VectorXd c = h.array() - lambda;  // linear term folded together

    auto objective = [&](const VectorXd& a) {
        return 0.5 * a.dot(H * a) - c.dot(a);
    };
    auto kkt_residual = [&](const VectorXd& a, const VectorXd& grad) {
        double res = 0.0;
        for (long i = 0; i < b; ++i) {
            if (a[i] > 0.0)
                res = std::max(res, std::abs(grad[i]));
            else
                res = std::max(res, std::max(0.0, -grad[i]));
        }
        return res;
    };
    // A residual computed in floating point carries ~eps*|H|*|a| rounding
    // noise; when the iterate is so large that this noise exceeds tol the
    // certificate is meaningless (near-singular H with vanishing source/
    // target overlap), so convergence may not be declared.
    const double h_scale = std::max(H.cwiseAbs().maxCoeff(), 1.0);
    auto certified = [&](const VectorXd& a, double res) {
        const double noise =
            std::numeric_limits<double>::epsilon() * h_scale * a.cwiseAbs().sum();
        return res <= tol && noise <= tol;
    };

    // Exact solve on the current active face; accelerates past the
    // tiny-eigenvalue directions where plain projected gradient crawls.
    auto face_polish = [&](const VectorXd& a, double f_current) -> std::optional<VectorXd> {
        std::vector<long> face;
        for (long i = 0; i < b; ++i)
            if (a[i] > 0.0) face.push_back(i);
        if (face.empty()) return std::nullopt;
        const long m = static_cast<long>(face.size());
        MatrixXd Hf(m, m);
        VectorXd cf(m);
        for (long i = 0; i < m; ++i) {
            cf[i] = c[face[i]];
            for (long j = 0; j < m; ++j) Hf(i, j) = H(face[i], face[j]);
        }
        const VectorXd x = Hf.ldlt().solve(cf);
        if (!x.allFinite() || (x.array() < 0.0).any()) return std::nullopt;
        VectorXd candidate = VectorXd::Zero(b);
        for (long i = 0; i < m; ++i) candidate[face[i]] = x[i];
        if (objective(candidate) > f_current + 1e-15 * (1.0 + std::abs(f_current)))
            return std::nullopt;
        return candidate;
    };

    VectorXd alpha = c.cwiseMax(0.0);
    double f = objective(alpha);
    const double trace = std::max(H.trace(), 1e-12);
    double step = 1.0 / trace;

    VectorXd best = alpha;
    double best_res = kkt_residual(alpha, H * alpha - c);

    for (long it = 0; it < max_iter; ++it) {
        if (it % 10 == 0) {
            if (const auto polished = face_polish(alpha, f)) {
                const double res_p = kkt_residual(*polished, H * *polished - c);
                if (certified(*polished, res_p)) return *polished;
                if (res_p < best_res) {
                    best_res = res_p;
                    best = *polished;
                }
            }
        }
        const VectorXd grad = H * alpha - c;
        const double res = kkt_residual(alpha, grad);
        if (res < best_res) {
            best_res = res;
            best = alpha;
        }
        if (certified(alpha, res)) return alpha;

        // Proximal-gradient backtracking: the accepted step never
        // increases the objective.
        double t = step;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd next = (alpha - t * grad).cwiseMax(0.0);
            const VectorXd diff = next - alpha;
            const double f_next = objective(next);
            if (f_next <= f + grad.dot(diff) + diff.squaredNorm() / (2.0 * t) + 1e-18) {
                alpha = std::move(next);
                f = f_next;
                step = t * 1.2;  // allow the step to grow back
                break;
            }
            t /= 2.0;
            if (ls == 59) {
                alpha = (alpha - t * grad).cwiseMax(0.0);
                f = objective(alpha);
            }
        }
    }
    throw NumericalInstability(best, best_res);
}

RatioModel fit_ratio(const SpatialDataset& source, const SpatialDataset& target,
                     const LsifConfig& cfg) {
    if (source.features.cols() != target.features.cols())
        throw std::invalid_argument("fit_ratio: feature dimension mismatch");
    const long n_t = target.n();
    if (cfg.b < 1 || cfg.b > n_t)
        throw std::invalid_argument("fit_ratio: b must be in [1, n_target]");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("fit_ratio: sigma must be > 0");

    // Centers without replacement (seeded partial Fisher-Yates).
    std::vector<long> idx(n_t);
    std::iota(idx.begin(), idx.end(), 0l);
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.b; ++i) {
        const long j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(n_t - i)));
        std::swap(idx[i], idx[j]);
    }
    MatrixXd centers(cfg.b, target.features.cols());
    for (int i = 0; i < cfg.b; ++i) centers.row(i) = target.features.row(idx[i]);

    auto [H, h] = estimate_Hh(source.features, target.features, centers, cfg.sigma);
    RatioModel model;
    model.centers = std::move(centers);
    model.sigma = cfg.sigma;
    model.alpha = solve_lsif(H, h, cfg.lambda, cfg.solver_tol, cfg.solver_max_iter);
    return model;
}

}  // namespace geoval::dre
