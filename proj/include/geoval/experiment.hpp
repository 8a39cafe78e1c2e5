#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geoval/dre.hpp"
#include "geoval/ingest.hpp"
#include "geoval/shift.hpp"
#include "geoval/simulate.hpp"
#include "geoval/validate.hpp"

namespace geoval::experiment {

/// Parameters of the synthetic (delta, tau, r) sweep.
struct SweepSpec {
    std::vector<double> delta_values;
    std::vector<double> tau_values;
    std::vector<double> r_values;
    std::vector<int> grid_dims = {100, 100};
    sim::LabelingFunction labeling{1, 4.0};
    std::vector<std::string> models = {"knn", "tree"};
    int n_mc = 100;
    double block_side = 20.0;
    dre::LsifConfig lsif;  // sigma = 2, b = 10 defaults
    double l = 1.0;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency
};

struct ResultRow {
    double delta = 0.0, tau = 0.0, r = 0.0;
    std::string model;
    std::string config;
    double novelty = 0.0, kl = 0.0, jaccard = 0.0;
    double cv = 0.0, bcv = 0.0, drv = 0.0;
    std::string drv_status = "ok";
    double true_error = 0.0;
};

/// One row per (delta, tau, r, model) cell. Cells run in parallel on
/// independent RNG substreams; rows are gathered in cell order so output
/// is deterministic given (spec, seed).
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// run_sweep plus CSV serialization (schema-stable header, shortest
/// round-trip float formatting).
void run_sweep_to_csv(const SweepSpec& spec, const std::string& out_path);

std::string result_csv_header();
std::string to_csv_line(const ResultRow& row);

enum class TabularMode { shifted, resampled };

struct TabularSpec {
    std::string csv_path;
    ingest::ColumnSchema schema;
    std::pair<std::string, std::string> classes;
    TabularMode mode = TabularMode::shifted;
    std::vector<double> block_sides;
    int k = 0;  // 0 = auto (block count of the source bounding box)
    std::vector<std::string> models = {"dummy", "gaussian_nb", "knn", "logistic", "tree"};
    dre::LsifConfig lsif;
    double l = 1.0;
    double dead_zone_radius = 0.0;
    std::uint64_t seed = 0;
};

struct TabularRow {
    std::string model;
    double source_error = 0.0, target_error = 0.0;
    double cv = 0.0, bcv = 0.0, drv = 0.0;
    std::string drv_status = "ok";
};

struct TabularResult {
    std::vector<TabularRow> rows;
    int k_used = 0;
    /// Ascending-error model orders per estimator; unstable DRV entries
    /// are excluded from the drv rank.
    std::vector<std::string> target_rank, cv_rank, bcv_rank, drv_rank;
};

/// Two-domain tabular workflow: ingest, split (or resample), balance,
/// normalize with source statistics, then estimate and rank each model.
TabularResult run_tabular(const TabularSpec& spec);

/// run_tabular plus <prefix>_estimates.csv and <prefix>_ranks.csv.
void run_tabular_to_csv(const TabularSpec& spec, const std::string& out_prefix);

/// Models ordered by ascending estimate, ties broken lexicographically;
/// non-finite estimates excluded.
std::vector<std::string> emit_rank(const std::vector<std::pair<std::string, double>>& estimates);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace geoval::experiment
