#include "geoval/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geoval::spatial {

RegularGrid::RegularGrid(std::vector<int> d, std::vector<double> s, std::vector<double> o)
    : dims(std::move(d)), spacing(std::move(s)), origin(std::move(o)) {
    if (dims.size() < 2 || dims.size() > 3)
        throw std::invalid_argument("RegularGrid: expected 2 or 3 axes");
    if (spacing.size() != dims.size() || origin.size() != dims.size())
        throw std::invalid_argument("RegularGrid: dims/spacing/origin size mismatch");
    for (int dim : dims)
        if (dim < 1) throw std::invalid_argument("RegularGrid: all dims must be >= 1");
    for (double sp : spacing)
        if (!(sp > 0.0)) throw std::invalid_argument("RegularGrid: all spacing must be > 0");
}

long RegularGrid::site_count() const {
    long n = 1;
    for (int dim : dims) n *= dim;
    return n;
}

VectorXd RegularGrid::site(long linear_index) const {
    if (linear_index < 0 || linear_index >= site_count())
        throw std::out_of_range("RegularGrid::site: index out of range");
    VectorXd coord(n_axes());
    long rem = linear_index;
    for (int a = 0; a < n_axes(); ++a) {
        const long idx = rem % dims[a];
        rem /= dims[a];
        coord[a] = origin[a] + static_cast<double>(idx) * spacing[a];
    }
    return coord;
}

MatrixXd grid_sites(const RegularGrid& grid) {
    const long n = grid.site_count();
    MatrixXd coords(n, grid.n_axes());
    for (long i = 0; i < n; ++i) coords.row(i) = grid.site(i).transpose();
    return coords;
}

SpatialDataset::SpatialDataset(MatrixXd c, MatrixXd f, std::optional<VectorXi> l)
    : coords(std::move(c)), features(std::move(f)), labels(std::move(l)) {
    if (coords.rows() < 1) throw std::invalid_argument("SpatialDataset: empty");
    if (coords.rows() != features.rows())
        throw std::invalid_argument("SpatialDataset: coords/features row count mismatch");
    if (labels && labels->size() != coords.rows())
        throw std::invalid_argument("SpatialDataset: label length mismatch");
    if (!coords.allFinite() || !features.allFinite())
        throw std::invalid_argument("SpatialDataset: non-finite values");
}

VariogramModel::VariogramModel(VariogramKind k, double r, double s)
    : kind(k), range(r), sill(s) {
    if (!(range > 0.0)) throw std::invalid_argument("VariogramModel: range must be > 0");
    if (!(sill > 0.0)) throw std::invalid_argument("VariogramModel: sill must be > 0");
}

double VariogramModel::gamma(double h) const {
    if (h <= 0.0) return 0.0;
    switch (kind) {
        case VariogramKind::gaussian:
            return sill * (1.0 - std::exp(-3.0 * h * h / (range * range)));
        case VariogramKind::exponential:
            return sill * (1.0 - std::exp(-3.0 * h / range));
        case VariogramKind::spherical: {
            if (h >= range) return sill;
            const double u = h / range;
            return sill * (1.5 * u - 0.5 * u * u * u);
        }
    }
    return sill;
}

EmpiricalVariogram empirical_variogram(const SpatialDataset& data, int feature_index,
                                       int n_lags, double max_lag) {
    const long n = data.n();
    if (n < 2) throw std::invalid_argument("empirical_variogram: need at least 2 samples");
    if (n_lags < 1) throw std::invalid_argument("empirical_variogram: n_lags must be >= 1");
    if (!(max_lag > 0.0)) throw std::invalid_argument("empirical_variogram: max_lag must be > 0");
    if (feature_index < 0 || feature_index >= data.features.cols())
        throw std::invalid_argument("empirical_variogram: bad feature index");

    const double bin_width = max_lag / n_lags;
    const double max_lag2 = max_lag * max_lag;
    std::vector<double> sums(n_lags, 0.0);
    std::vector<long> counts(n_lags, 0);

    const auto& coords = data.coords;
    const VectorXd values = data.features.col(feature_index);
    const int d = static_cast<int>(coords.cols());
    for (long i = 0; i < n; ++i) {
        for (long j = i + 1; j < n; ++j) {
            double h2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dx = coords(i, a) - coords(j, a);
                h2 += dx * dx;
            }
            if (h2 >= max_lag2) continue;
            const int bin = static_cast<int>(std::sqrt(h2) / bin_width);
            if (bin >= n_lags) continue;  // floating-point edge of the last bin
            const double dv = values[i] - values[j];
            sums[bin] += dv * dv;
            counts[bin] += 1;
        }
    }

    EmpiricalVariogram ev;
    ev.lags.resize(n_lags);
    ev.gammas.resize(n_lags);
    ev.counts = counts;
    bool any = false;
    for (int b = 0; b < n_lags; ++b) {
        ev.lags[b] = (b + 0.5) * bin_width;
        ev.gammas[b] = counts[b] > 0 ? sums[b] / (2.0 * counts[b]) : 0.0;
        any = any || counts[b] > 0;
    }
    if (!any) throw std::runtime_error("empirical_variogram: no pairs within max_lag");
    return ev;
}

VariogramFit fit_range(const EmpiricalVariogram& ev, VariogramKind kind) {
    std::vector<int> occupied;
    for (int b = 0; b < ev.n_bins(); ++b)
        if (ev.counts[b] > 0) occupied.push_back(b);
    if (occupied.size() < 3)
        throw std::invalid_argument("fit_range: need at least 3 occupied bins");

    const double bin_width = ev.n_bins() > 1 ? ev.lags[1] - ev.lags[0] : 2.0 * ev.lags[0];
    const double max_lag = ev.lags[ev.n_bins() - 1] + 0.5 * bin_width;

    // For a fixed range the optimal sill is closed-form, so the fit reduces
    // to a 1-D search over range: dense scan then golden-section refinement.
    auto eval = [&](double range) {
        VariogramModel unit(kind, range, 1.0);
        double num = 0.0, den = 0.0;
        for (int b : occupied) {
            const double m = unit.gamma(ev.lags[b]);
            const double w = static_cast<double>(ev.counts[b]);
            num += w * ev.gammas[b] * m;
            den += w * m * m;
        }
        double sill = den > 0.0 ? num / den : 0.0;
        sill = std::max(sill, 1e-12);
        double sse = 0.0;
        for (int b : occupied) {
            const double resid = ev.gammas[b] - sill * unit.gamma(ev.lags[b]);
            sse += static_cast<double>(ev.counts[b]) * resid * resid;
        }
        return std::pair<double, double>(sse, sill);
    };

    const double lo = bin_width * 1e-3, hi = 3.0 * max_lag;
    double best_range = lo, best_sse = std::numeric_limits<double>::infinity();
    const int n_scan = 400;
    for (int i = 0; i <= n_scan; ++i) {
        const double range = lo * std::pow(hi / lo, static_cast<double>(i) / n_scan);
        const double sse = eval(range).first;
        if (sse < best_sse) {
            best_sse = sse;
            best_range = range;
        }
    }
    // Golden-section refinement around the scan minimum.
    double a = best_range / std::pow(hi / lo, 1.0 / n_scan);
    double b = best_range * std::pow(hi / lo, 1.0 / n_scan);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = eval(x1).first, f2 = eval(x2).first;
    for (int it = 0; it < 200 && (b - a) > 1e-10 * best_range; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1).first;
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2).first;
        }
    }
    best_range = (a + b) / 2.0;
    auto [sse, sill] = eval(best_range);

    VariogramFit fit;
    fit.model = VariogramModel(kind, best_range, sill);
    fit.degenerate = best_range <= bin_width;
    fit.weighted_sse = sse;
    return fit;
}

VariogramKind variogram_kind_from_string(const std::string& name) {
    if (name == "gaussian") return VariogramKind::gaussian;
    if (name == "spherical") return VariogramKind::spherical;
    if (name == "exponential") return VariogramKind::exponential;
    throw std::invalid_argument("unknown variogram kind: " + name);
}

}  // namespace geoval::spatial
