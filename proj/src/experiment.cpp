#include "geoval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cctype>
#include <fstream>
#include <future>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "geoval/models.hpp"
#include "geoval/rng.hpp"

namespace geoval::experiment {

using models::ModelFactory;
using spatial::RegularGrid;
using spatial::SpatialDataset;
using validate::ErrorEstimate;

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string result_csv_header() {
    return "delta,tau,r,model,config,novelty,kl,jaccard,cv,bcv,drv,drv_status,true_error";
}

std::string to_csv_line(const ResultRow& row) {
    std::string line;
    line += format_double(row.delta);
    line += ',';
    line += format_double(row.tau);
    line += ',';
    line += format_double(row.r);
    line += ',';
    line += row.model;
    line += ',';
    line += row.config;
    line += ',';
    line += format_double(row.novelty);
    line += ',';
    line += format_double(row.kl);
    line += ',';
    line += format_double(row.jaccard);
    line += ',';
    line += format_double(row.cv);
    line += ',';
    line += format_double(row.bcv);
    line += ',';
    line += format_double(row.drv);
    line += ',';
    line += row.drv_status;
    line += ',';
    line += format_double(row.true_error);
    return line;
}

namespace {

// Number of nonempty blocks when the grid bounding box is partitioned
// with the given side; this is the fold count the block strategy yields,
// and CV uses the equivalent k.
int equivalent_fold_count(const Eigen::MatrixXd& coords, double block_side) {
    std::vector<double> sides(coords.cols(), block_side);
    return validate::block_folds(coords, sides, 0.0).k();
}

ResultRow run_cell(const SweepSpec& spec, double delta, double tau, double r,
                   const std::string& model_name, std::uint64_t cell_seed) {
    const sim::ShiftSpec shift(delta, tau);
    const RegularGrid grid(spec.grid_dims,
                           std::vector<double>(spec.grid_dims.size(), 1.0),
                           std::vector<double>(spec.grid_dims.size(), 0.0));
    auto [source, target] =
        sim::make_problem(shift, r, grid, spec.labeling, Rng::derive(cell_seed, {0}));

    const ModelFactory factory = models::factory_by_name(model_name);

    ResultRow row;
    row.delta = delta;
    row.tau = tau;
    row.r = r;
    row.model = model_name;
    row.config = shift::to_string(shift::classify(shift));
    row.novelty = shift::novelty(shift);
    row.kl = shift::kl(shift);
    row.jaccard = shift::jaccard(shift);

    const int k = equivalent_fold_count(source.coords, spec.block_side);
    row.cv = validate::estimate_cv(factory, source, k, Rng::derive(cell_seed, {1})).value;

    const std::vector<double> sides(grid.n_axes(), spec.block_side);
    row.bcv = validate::estimate_bcv(factory, source, sides, 0.0).value;

    dre::LsifConfig lsif = spec.lsif;
    lsif.seed = Rng::derive(cell_seed, {2});
    const auto folds = validate::random_folds(source.n(), k, Rng::derive(cell_seed, {3}));
    const ErrorEstimate drv =
        validate::estimate_drv(factory, source, target.features, lsif, folds, spec.l);
    row.drv = drv.value;
    row.drv_status = drv.status == validate::EstimateStatus::ok ? "ok" : "unstable";

    auto model = factory(Rng::derive(cell_seed, {4}));
    model->train(source.features, *source.labels);
    auto target_gen = [&](std::uint64_t realization_seed) {
        auto problem = sim::make_problem(shift, r, grid, spec.labeling, realization_seed);
        return std::move(problem.second);
    };
    row.true_error =
        validate::true_error(*model, target_gen, spec.n_mc, Rng::derive(cell_seed, {5}));
    return row;
}

}  // namespace

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    if (spec.delta_values.empty() || spec.tau_values.empty() || spec.r_values.empty())
        throw std::invalid_argument("run_sweep: empty parameter grid");
    if (spec.models.empty()) throw std::invalid_argument("run_sweep: no models");
    if (spec.n_mc < 1) throw std::invalid_argument("run_sweep: n_mc must be >= 1");

    struct Cell {
        double delta, tau, r;
        std::string model;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t di = 0; di < spec.delta_values.size(); ++di)
        for (std::size_t ti = 0; ti < spec.tau_values.size(); ++ti)
            for (std::size_t ri = 0; ri < spec.r_values.size(); ++ri)
                for (std::size_t mi = 0; mi < spec.models.size(); ++mi)
                    cells.push_back({spec.delta_values[di], spec.tau_values[ti],
                                     spec.r_values[ri], spec.models[mi],
                                     Rng::derive(spec.seed, {di, ti, ri, mi})});

    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    const unsigned n_threads =
        spec.threads > 0
            ? static_cast<unsigned>(spec.threads)
            : std::max(1u, std::min(std::thread::hardware_concurrency(),
                                    static_cast<unsigned>(cells.size())));
    std::vector<std::future<void>> workers;
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.push_back(std::async(std::launch::async, [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size() || failed.load()) return;
                try {
                    rows[i] = run_cell(spec, cells[i].delta, cells[i].tau, cells[i].r,
                                       cells[i].model, cells[i].seed);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    error_message = e.what();
                    failed.store(true);
                    return;
                }
            }
        }));
    }
    for (auto& w : workers) w.get();
    if (failed.load()) throw std::runtime_error("run_sweep: cell failed: " + error_message);
    return rows;
}

void run_sweep_to_csv(const SweepSpec& spec, const std::string& out_path) {
    const std::vector<ResultRow> rows = run_sweep(spec);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("run_sweep_to_csv: cannot write " + out_path);
    out << result_csv_header() << '\n';
    for (const auto& row : rows) out << to_csv_line(row) << '\n';
}

std::vector<std::string> emit_rank(
    const std::vector<std::pair<std::string, double>>& estimates) {
    std::vector<std::pair<std::string, double>> finite;
    for (const auto& e : estimates)
        if (std::isfinite(e.second)) finite.push_back(e);
    if (finite.size() < 2)
        throw std::invalid_argument("emit_rank: need at least 2 finite estimates");
    std::sort(finite.begin(), finite.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    std::vector<std::string> rank;
    for (const auto& e : finite) rank.push_back(e.first);
    return rank;
}

TabularResult run_tabular(const TabularSpec& spec) {
    const ingest::RawTable table = ingest::load_csv(spec.csv_path, spec.schema);

    auto truthy = [](const std::string& value) {
        std::string v;
        for (char c : value) v.push_back(static_cast<char>(std::tolower(c)));
        return v == "1" || v == "true" || v == "yes";
    };
    auto [source_table, target_table] = ingest::split_domains(table, spec.schema, truthy);

    if (spec.mode == TabularMode::resampled) {
        // No-shift variant: join both domains and redraw disjoint subsets
        // with the same source-to-target proportion.
        const long n_s = source_table.n_rows();
        const long n_t = target_table.n_rows();
        auto resampled = ingest::resample_proportional(source_table, target_table, n_s, n_t,
                                                       Rng::derive(spec.seed, {100}));
        source_table = std::move(resampled.first);
        target_table = std::move(resampled.second);
    }

    SpatialDataset source = ingest::clean_and_balance(source_table, spec.schema, spec.classes,
                                                      Rng::derive(spec.seed, {0}));
    SpatialDataset target = ingest::clean_and_balance(target_table, spec.schema, spec.classes,
                                                      Rng::derive(spec.seed, {1}));
    ingest::zscore_normalize(source, {&target});

    std::vector<double> sides = spec.block_sides;
    if (sides.empty()) sides.assign(source.coords.cols(), 10000.0);
    const auto block_partition = validate::block_folds(source.coords, sides,
                                                       spec.dead_zone_radius);
    const int k = spec.k > 0 ? spec.k : block_partition.k();

    TabularResult result;
    result.k_used = k;
    std::vector<std::pair<std::string, double>> target_est, cv_est, bcv_est, drv_est;
    for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
        const std::string& name = spec.models[mi];
        const ModelFactory factory = models::factory_by_name(name);

        TabularRow row;
        row.model = name;

        auto model = factory(Rng::derive(spec.seed, {2, mi}));
        model->train(source.features, *source.labels);
        const Eigen::VectorXi pred_s = model->predict(source.features);
        const Eigen::VectorXi pred_t = model->predict(target.features);
        row.source_error =
            (pred_s.array() != source.labels->array()).cast<double>().mean();
        row.target_error =
            (pred_t.array() != target.labels->array()).cast<double>().mean();

        row.cv = validate::estimate_cv(factory, source, k, Rng::derive(spec.seed, {3, mi}))
                     .value;
        row.bcv = validate::iwcv(factory, source, block_partition, std::nullopt, 0.0).value;

        dre::LsifConfig lsif = spec.lsif;
        lsif.seed = Rng::derive(spec.seed, {4, mi});
        const auto folds =
            validate::random_folds(source.n(), k, Rng::derive(spec.seed, {5, mi}));
        const ErrorEstimate drv =
            validate::estimate_drv(factory, source, target.features, lsif, folds, spec.l);
        row.drv = drv.value;
        row.drv_status = drv.status == validate::EstimateStatus::ok ? "ok" : "unstable";

        target_est.emplace_back(name, row.target_error);
        cv_est.emplace_back(name, row.cv);
        bcv_est.emplace_back(name, row.bcv);
        drv_est.emplace_back(name, row.drv);
        result.rows.push_back(std::move(row));
    }

    result.target_rank = emit_rank(target_est);
    result.cv_rank = emit_rank(cv_est);
    result.bcv_rank = emit_rank(bcv_est);
    result.drv_rank = emit_rank(drv_est);
    return result;
}

void run_tabular_to_csv(const TabularSpec& spec, const std::string& out_prefix) {
    const TabularResult result = run_tabular(spec);

    std::ofstream est(out_prefix + "_estimates.csv", std::ios::binary);
    if (!est) throw std::runtime_error("run_tabular_to_csv: cannot write estimates file");
    est << "model,source_error,target_error,cv,bcv,drv,drv_status\n";
    for (const auto& row : result.rows) {
        est << row.model << ',' << format_double(row.source_error) << ','
            << format_double(row.target_error) << ',' << format_double(row.cv) << ','
            << format_double(row.bcv) << ',' << format_double(row.drv) << ','
            << row.drv_status << '\n';
    }

    std::ofstream ranks(out_prefix + "_ranks.csv", std::ios::binary);
    if (!ranks) throw std::runtime_error("run_tabular_to_csv: cannot write ranks file");
    ranks << "position,target,cv,bcv,drv\n";
    const std::size_t n = result.target_rank.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto cell = [&](const std::vector<std::string>& rank) {
            return i < rank.size() ? rank[i] : std::string();  // excluded entries stay blank
        };
        ranks << (i + 1) << ',' << cell(result.target_rank) << ',' << cell(result.cv_rank)
              << ',' << cell(result.bcv_rank) << ',' << cell(result.drv_rank) << '\n';
    }
}

}  // namespace geoval::experiment
