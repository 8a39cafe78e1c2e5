#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace geoval::spatial {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Regular lattice over 2 or 3 axes. Sites are enumerated in column-major
/// order: the first axis varies fastest.
struct RegularGrid {
    std::vector<int> dims;
    std::vector<double> spacing;
    std::vector<double> origin;

    RegularGrid() : dims{1, 1}, spacing{1.0, 1.0}, origin{0.0, 0.0} {}
    RegularGrid(std::vector<int> d, std::vector<double> s, std::vector<double> o);

    int n_axes() const { return static_cast<int>(dims.size()); }
    long site_count() const;

    /// Coordinate of the site with the given linear (column-major) index.
    VectorXd site(long linear_index) const;
};

/// Coordinates of every grid site, one row per linear index.
MatrixXd grid_sites(const RegularGrid& grid);

/// Located samples: one coordinate row and one feature row per location,
/// with optional class labels.
struct SpatialDataset {
    MatrixXd coords;    // n x d
    MatrixXd features;  // n x p
    std::optional<VectorXi> labels;

    SpatialDataset(MatrixXd c, MatrixXd f, std::optional<VectorXi> l = std::nullopt);

    long n() const { return coords.rows(); }
};

enum class VariogramKind { gaussian, spherical, exponential };

/// Parametric semivariogram with zero nugget. `range` is the effective
/// range: gamma reaches 95% of the sill at lag == range.
struct VariogramModel {
    VariogramKind kind = VariogramKind::gaussian;
    double range = 1.0;
    double sill = 1.0;

    VariogramModel() = default;
    VariogramModel(VariogramKind k, double r, double s);

    double gamma(double h) const;
    /// Implied covariance C(h) = sill - gamma(h).
    double covariance(double h) const { return sill - gamma(h); }
};

struct EmpiricalVariogram {
    VectorXd lags;    // bin centers
    VectorXd gammas;  // semivariance estimates (0 where count == 0)
    std::vector<long> counts;

    int n_bins() const { return static_cast<int>(lags.size()); }
};

/// Matheron estimator binned into half-open lag intervals of width
/// max_lag / n_lags. Pairs beyond max_lag are discarded.
EmpiricalVariogram empirical_variogram(const SpatialDataset& data, int feature_index,
                                       int n_lags, double max_lag);

struct VariogramFit {
    VariogramModel model;
    /// True when the fitted range collapsed to (or below) one lag bin
    /// width, i.e. the empirical variogram is flat (white noise).
    bool degenerate = false;
    double weighted_sse = 0.0;
};

/// Count-weighted least-squares fit of (range, sill) to an empirical
/// variogram. Requires at least 3 occupied bins.
VariogramFit fit_range(const EmpiricalVariogram& ev, VariogramKind kind);

VariogramKind variogram_kind_from_string(const std::string& name);

}  // namespace geoval::spatial
