#pragma once

#include <cstdint>
#include <utility>

#include "geoval/spatial.hpp"

namespace geoval::sim {

using spatial::RegularGrid;
using spatial::SpatialDataset;
using spatial::VariogramModel;

/// Mean/variance covariate shift between source and target Gaussians,
/// with the source fixed at mu_s = 0, sigma_s = 1.
struct ShiftSpec {
    double delta = 0.0;  // mean shift in [0, 1]
    double tau = 1.0;    // variance shift in (0, 1]

    ShiftSpec() = default;
    ShiftSpec(double d, double t);
};

/// Implied target parameters (mu_t, sigma_t) = (3*sqrt(2)*delta, tau).
std::pair<double, double> target_params(const ShiftSpec& shift);

/// Binary labeling by the sign of sin(w * ||x||_p), p in {1, 2}.
/// sgn maps x >= 0 to +1 and negatives to -1.
struct LabelingFunction {
    int p = 1;
    double w = 4.0;

    LabelingFunction() = default;
    LabelingFunction(int p_, double w_);
};

int label(const LabelingFunction& lf, const Eigen::VectorXd& features);

enum class SimMethod { lu, spectral };

struct SimulationSpec {
    RegularGrid grid;
    VariogramModel variogram;
    double mean = 0.0;
    int n_processes = 1;
    double rho = 0.0;  // inter-process correlation, n_processes == 2 only
    SimMethod method = SimMethod::spectral;
    std::uint64_t seed = 0;
};

/// Gaussian process realization(s) over the grid, one feature column per
/// process. Each process column uses its own RNG substream derived from
/// (seed, column index), so (spec, seed) fully determines the output.
///
/// Fields are generated as zero-mean unit-sill standard fields, mixed for
/// rho != 0, then scaled by sqrt(sill) and shifted by the mean, so the
/// affine law field = mean + sqrt(sill) * standard_field holds exactly.
SpatialDataset simulate(const SimulationSpec& spec);

/// Sample one source/target covariate-shift problem: two
/// uncorrelated processes per domain, shared range r, labels from lf.
/// Source uses (0, 1); target uses target_params(shift).
std::pair<SpatialDataset, SpatialDataset> make_problem(const ShiftSpec& shift, double r,
                                                       const RegularGrid& grid,
                                                       const LabelingFunction& lf,
                                                       std::uint64_t seed);

/// Apply a labeling function row-wise.
Eigen::VectorXi label_rows(const LabelingFunction& lf, const Eigen::MatrixXd& features);

}  // namespace geoval::sim
