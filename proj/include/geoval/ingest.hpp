#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoval/spatial.hpp"

namespace geoval::ingest {

using spatial::SpatialDataset;

struct ColumnSchema {
    std::vector<std::string> coord_columns;
    std::vector<std::string> feature_columns;
    std::string label_column;
    std::optional<std::string> domain_column;
};

/// Raw parsed CSV: header names plus string cells. Empty cells and cells
/// that fail numeric parsing are treated as missing by downstream steps.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
    long n_rows() const { return static_cast<long>(rows.size()); }
};

/// Parse a comma-separated UTF-8 file with a header row. RFC-style double
/// quoting is honored; all declared schema columns must be present and at
/// least one data row is required.
RawTable load_csv(const std::string& path, const ColumnSchema& schema);

/// Drop rows with any missing coord/feature/label cell, restrict to the
/// two given classes, and downsample the majority class (seeded, without
/// replacement) to the minority count. Labels map to 0/1 in pair order.
SpatialDataset clean_and_balance(const RawTable& table, const ColumnSchema& schema,
                                 const std::pair<std::string, std::string>& classes,
                                 std::uint64_t seed);

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/// Standardize features with statistics computed on `train` only, applied
/// to every dataset in `apply_to` (in place) and to train itself.
FeatureStats zscore_normalize(SpatialDataset& train, std::vector<SpatialDataset*> apply_to);

/// Partition the table rows by a predicate on the domain column;
/// first = rows where the predicate holds (source), second = the rest.
std::pair<RawTable, RawTable> split_domains(
    const RawTable& table, const ColumnSchema& schema,
    const std::function<bool(const std::string&)>& source_predicate);

/// Join two tables with identical headers and draw two seeded disjoint
/// row subsets with the given sizes (the no-shift resampling mode).
std::pair<RawTable, RawTable> resample_proportional(const RawTable& a, const RawTable& b,
                                                    long n_source, long n_target,
                                                    std::uint64_t seed);

}  // namespace geoval::ingest
