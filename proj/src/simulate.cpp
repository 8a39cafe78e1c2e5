#include "geoval/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "geoval/rng.hpp"

namespace geoval::sim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

ShiftSpec::ShiftSpec(double d, double t) : delta(d), tau(t) {
    if (!(delta >= 0.0 && delta <= 1.0))
        throw std::invalid_argument("ShiftSpec: delta must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::invalid_argument("ShiftSpec: tau must be in (0, 1]");
}

std::pair<double, double> target_params(const ShiftSpec& shift) {
    return {3.0 * std::sqrt(2.0) * shift.delta, shift.tau};
}

LabelingFunction::LabelingFunction(int p_, double w_) : p(p_), w(w_) {
    if (p != 1 && p != 2) throw std::invalid_argument("LabelingFunction: p must be 1 or 2");
    if (!(w > 0.0)) throw std::invalid_argument("LabelingFunction: w must be > 0");
}

int label(const LabelingFunction& lf, const VectorXd& features) {
    if (!features.allFinite()) throw std::invalid_argument("label: non-finite features");
    const double norm = lf.p == 1 ? features.lpNorm<1>() : features.norm();
    return std::sin(lf.w * norm) >= 0.0 ? 1 : -1;
}

VectorXi label_rows(const LabelingFunction& lf, const MatrixXd& features) {
    VectorXi labels(features.rows());
    for (long i = 0; i < features.rows(); ++i)
        labels[i] = label(lf, features.row(i).transpose());
    return labels;
}

namespace {

std::mutex fftw_planner_mutex;

// Unit-sill i.i.d. field; taken when the covariance already vanishes at
// the smallest grid spacing (pure nugget, range ~ 0).
VectorXd white_noise_field(long n, std::uint64_t seed) {
    Rng rng(seed);
    VectorXd field(n);
    for (long i = 0; i < n; ++i) field[i] = rng.normal();
    return field;
}

// Exact LU (Cholesky) simulation of a unit-sill field over the grid.
VectorXd lu_field(const RegularGrid& grid, const VariogramModel& vg, std::uint64_t seed) {
    const long n = grid.site_count();
    const MatrixXd coords = spatial::grid_sites(grid);
    MatrixXd corr(n, n);
    for (long i = 0; i < n; ++i) {
        corr(i, i) = 1.0;
        for (long j = i + 1; j < n; ++j) {
            const double h = (coords.row(i) - coords.row(j)).norm();
            const double c = vg.covariance(h);  // vg passed with unit sill
            corr(i, j) = c;
            corr(j, i) = c;
        }
    }

    Eigen::LLT<MatrixXd> llt;
    double jitter = 1e-10;
    const double jitter_max = 1e-6;
    for (;;) {
        MatrixXd shifted = corr;
        shifted.diagonal().array() += jitter;
        llt.compute(shifted);
        if (llt.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > jitter_max)
            throw std::runtime_error(
                "lu simulation: Cholesky failed up to jitter ceiling 1e-6 * sill");
    }

    Rng rng(seed);
    VectorXd z(n);
    for (long i = 0; i < n; ++i) z[i] = rng.normal();
    return llt.matrixL() * z;
}

struct Embedding {
    std::vector<int> mdims;        // embedding grid dims, same axis order as grid
    std::vector<double> eigs;      // clamped circulant eigenvalues
    long cells = 0;
};

// Circulant embedding of the correlation function on a padded periodic
// grid. Tries growing padding factors; smooth covariances (gaussian kind)
// need more padding before the embedding becomes nonnegative definite.
Embedding build_embedding(const RegularGrid& grid, const VariogramModel& vg) {
    const int rank = grid.n_axes();
    for (int factor : {2, 3, 4, 6, 8}) {
        Embedding emb;
        emb.mdims.resize(rank);
        emb.cells = 1;
        for (int a = 0; a < rank; ++a) {
            emb.mdims[a] = std::max(2, factor * grid.dims[a]);
            emb.cells *= emb.mdims[a];
        }

        std::vector<std::complex<double>> buf(emb.cells);
        for (long idx = 0; idx < emb.cells; ++idx) {
            long rem = idx;
            double h2 = 0.0;
            for (int a = 0; a < rank; ++a) {
                long k = rem % emb.mdims[a];
                rem /= emb.mdims[a];
                if (k > emb.mdims[a] / 2) k -= emb.mdims[a];  // wrapped torus offset
                const double dx = static_cast<double>(k) * grid.spacing[a];
                h2 += dx * dx;
            }
            buf[idx] = vg.covariance(std::sqrt(h2));  // vg passed with unit sill
        }

        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex);
            std::vector<int> fdims(rank);
            for (int a = 0; a < rank; ++a) fdims[a] = emb.mdims[rank - 1 - a];
            fftw_plan plan = fftw_plan_dft(rank, fdims.data(),
                                           reinterpret_cast<fftw_complex*>(buf.data()),
                                           reinterpret_cast<fftw_complex*>(buf.data()),
                                           FFTW_FORWARD, FFTW_ESTIMATE);
            fftw_execute(plan);
            fftw_destroy_plan(plan);
        }

        double max_eig = 0.0, min_eig = 0.0;
        for (const auto& v : buf) {
            max_eig = std::max(max_eig, v.real());
            min_eig = std::min(min_eig, v.real());
        }
        if (min_eig < -1e-8 * max_eig) continue;  // not embeddable at this padding

        emb.eigs.resize(emb.cells);
        for (long i = 0; i < emb.cells; ++i) emb.eigs[i] = std::max(buf[i].real(), 0.0);
        return emb;
    }
    throw std::runtime_error(
        "spectral simulation: no nonnegative circulant embedding up to padding factor 8");
}

// Unit-sill field via circulant embedding: inverse transform of
// amplitude-scaled complex white noise, real part, restricted to the grid.
VectorXd spectral_field(const RegularGrid& grid, const Embedding& emb, std::uint64_t seed) {
    const int rank = grid.n_axes();
    std::vector<std::complex<double>> buf(emb.cells);
    Rng rng(seed);
    for (long i = 0; i < emb.cells; ++i) {
        const double amp = std::sqrt(emb.eigs[i]);
        const double re = rng.normal();
        const double im = rng.normal();
        buf[i] = std::complex<double>(amp * re, amp * im);
    }

    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        std::vector<int> fdims(rank);
        for (int a = 0; a < rank; ++a) fdims[a] = emb.mdims[rank - 1 - a];
        fftw_plan plan = fftw_plan_dft(rank, fdims.data(),
                                       reinterpret_cast<fftw_complex*>(buf.data()),
                                       reinterpret_cast<fftw_complex*>(buf.data()),
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(emb.cells));
    const long n = grid.site_count();
    VectorXd field(n);
    for (long i = 0; i < n; ++i) {
        long rem = i, eidx = 0, stride = 1;
        for (int a = 0; a < rank; ++a) {
            const long k = rem % grid.dims[a];
            rem /= grid.dims[a];
            eidx += k * stride;
            stride *= emb.mdims[a];
        }
        field[i] = buf[eidx].real() * scale;
    }
    return field;
}

}  // namespace

SpatialDataset simulate(const SimulationSpec& spec) {
    if (spec.n_processes < 1)
        throw std::invalid_argument("simulate: n_processes must be >= 1");
    if (spec.rho < -1.0 || spec.rho > 1.0)
        throw std::invalid_argument("simulate: rho must be in [-1, 1]");
    if (spec.rho != 0.0 && spec.n_processes != 2)
        throw std::invalid_argument("simulate: rho is only meaningful for n_processes == 2");
    const long n = spec.grid.site_count();
    if (spec.method == SimMethod::lu && n > 4096)
        throw std::invalid_argument("simulate: lu method restricted to <= 4096 sites");

    const double min_spacing =
        *std::min_element(spec.grid.spacing.begin(), spec.grid.spacing.end());
    // The standard field is simulated from a unit-sill copy of the model so
    // that its bits do not depend on the sill; the affine scaling below is
    // then exact.
    const VariogramModel unit(spec.variogram.kind, spec.variogram.range, 1.0);
    const bool nugget_only = unit.covariance(min_spacing) <= 0.0;

    Embedding emb;
    if (!nugget_only && spec.method == SimMethod::spectral)
        emb = build_embedding(spec.grid, unit);

    // One substream per process column.
    std::vector<VectorXd> fields(spec.n_processes);
    for (int j = 0; j < spec.n_processes; ++j) {
        const std::uint64_t sub = Rng::derive(spec.seed, {static_cast<std::uint64_t>(j)});
        if (nugget_only)
            fields[j] = white_noise_field(n, sub);
        else if (spec.method == SimMethod::lu)
            fields[j] = lu_field(spec.grid, unit, sub);
        else
            fields[j] = spectral_field(spec.grid, emb, sub);
    }

    if (spec.n_processes == 2 && spec.rho != 0.0)
        fields[1] = spec.rho * fields[0] +
                    std::sqrt(1.0 - spec.rho * spec.rho) * fields[1];

    const double sd = std::sqrt(spec.variogram.sill);
    MatrixXd features(n, spec.n_processes);
    for (int j = 0; j < spec.n_processes; ++j)
        features.col(j) = (spec.mean + (sd * fields[j].array())).matrix();

    return SpatialDataset(spatial::grid_sites(spec.grid), std::move(features));
}

std::pair<SpatialDataset, SpatialDataset> make_problem(const ShiftSpec& shift, double r,
                                                       const RegularGrid& grid,
                                                       const LabelingFunction& lf,
                                                       std::uint64_t seed) {
    if (r < 0.0) throw std::invalid_argument("make_problem: r must be >= 0");
    const double min_spacing = *std::min_element(grid.spacing.begin(), grid.spacing.end());
    // r == 0 means no spatial correlation; a vanishing range makes the
    // covariance zero at every nonzero lag, which simulate() turns into
    // the i.i.d. path.
    const double range = r > 0.0 ? r : 1e-9 * min_spacing;
    const auto [mu_t, sigma_t] = target_params(shift);

    auto domain = [&](double mean, double sd, std::uint64_t sub) {
        SimulationSpec spec;
        spec.grid = grid;
        spec.variogram = VariogramModel(spatial::VariogramKind::gaussian, range, sd * sd);
        spec.mean = mean;
        spec.n_processes = 2;
        spec.rho = 0.0;
        spec.method = SimMethod::spectral;
        spec.seed = sub;
        SpatialDataset data = simulate(spec);
        data.labels = label_rows(lf, data.features);
        return data;
    };

    SpatialDataset source = domain(0.0, 1.0, Rng::derive(seed, {0}));
    SpatialDataset target = domain(mu_t, sigma_t, Rng::derive(seed, {1}));
    return {std::move(source), std::move(target)};
}

}  // namespace geoval::sim
