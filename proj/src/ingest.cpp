#include "geoval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "geoval/rng.hpp"

namespace geoval::ingest {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

// One CSV record, honoring RFC-style double quotes. Returns false at EOF.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false, any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

// Numeric parse with missing-value convention: empty cells, "NaN" (any
// case) and unparseable text all come back as nullopt.
std::optional<double> parse_cell(const std::string& cell) {
    std::size_t begin = cell.find_first_not_of(" \t");
    if (begin == std::string::npos) return std::nullopt;
    std::size_t end = cell.find_last_not_of(" \t") + 1;
    const char* first = cell.data() + begin;
    const char* last = cell.data() + end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

int RawTable::column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

RawTable load_csv(const std::string& path, const ColumnSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    RawTable table;
    if (!read_record(in, table.header))
        throw std::runtime_error("load_csv: empty file " + path);

    auto require = [&](const std::string& name) {
        if (table.column_index(name) < 0)
            throw std::runtime_error("load_csv: missing column '" + name + "'");
    };
    for (const auto& c : schema.coord_columns) require(c);
    for (const auto& c : schema.feature_columns) require(c);
    require(schema.label_column);
    if (schema.domain_column) require(*schema.domain_column);

    std::vector<std::string> fields;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        fields.resize(table.header.size());
        table.rows.push_back(fields);
    }
    if (table.rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
    return table;
}

SpatialDataset clean_and_balance(const RawTable& table, const ColumnSchema& schema,
                                 const std::pair<std::string, std::string>& classes,
                                 std::uint64_t seed) {
    std::vector<int> coord_idx, feature_idx;
    for (const auto& c : schema.coord_columns) coord_idx.push_back(table.column_index(c));
    for (const auto& c : schema.feature_columns) feature_idx.push_back(table.column_index(c));
    const int label_idx = table.column_index(schema.label_column);
    if (label_idx < 0) throw std::invalid_argument("clean_and_balance: label column absent");

    // Filter first, then balance.
    std::vector<long> keep[2];
    std::vector<std::vector<double>> coords_buf, features_buf;
    for (long r = 0; r < table.n_rows(); ++r) {
        const auto& row = table.rows[r];
        const std::string& label = row[label_idx];
        int cls;
        if (label == classes.first)
            cls = 0;
        else if (label == classes.second)
            cls = 1;
        else
            continue;

        std::vector<double> coord, feature;
        bool missing = false;
        for (int idx : coord_idx) {
            const auto v = parse_cell(row[idx]);
            if (!v) { missing = true; break; }
            coord.push_back(*v);
        }
        for (int idx : feature_idx) {
            if (missing) break;
            const auto v = parse_cell(row[idx]);
            if (!v) { missing = true; break; }
            feature.push_back(*v);
        }
        if (missing) continue;

        keep[cls].push_back(static_cast<long>(coords_buf.size()));
        coords_buf.push_back(std::move(coord));
        features_buf.push_back(std::move(feature));
    }

    if (keep[0].empty())
        throw std::runtime_error("clean_and_balance: class '" + classes.first +
                                 "' absent after filtering");
    if (keep[1].empty())
        throw std::runtime_error("clean_and_balance: class '" + classes.second +
                                 "' absent after filtering");

    // Downsample the majority class to the minority count.
    const long target = std::min(keep[0].size(), keep[1].size());
    Rng rng(seed);
    for (auto& rows : keep) {
        if (static_cast<long>(rows.size()) == target) continue;
        for (long i = 0; i < target; ++i) {
            const long j =
                i + static_cast<long>(rng.below(static_cast<std::uint64_t>(rows.size() - i)));
            std::swap(rows[i], rows[j]);
        }
        rows.resize(target);
        std::sort(rows.begin(), rows.end());
    }

    const long n = 2 * target;
    MatrixXd coords(n, coord_idx.size());
    MatrixXd features(n, feature_idx.size());
    VectorXi labels(n);
    long out = 0;
    for (int cls = 0; cls < 2; ++cls) {
        for (long row : keep[cls]) {
            for (std::size_t a = 0; a < coord_idx.size(); ++a)
                coords(out, a) = coords_buf[row][a];
            for (std::size_t a = 0; a < feature_idx.size(); ++a)
                features(out, a) = features_buf[row][a];
            labels[out] = cls;
            ++out;
        }
    }
    return SpatialDataset(std::move(coords), std::move(features), std::move(labels));
}

FeatureStats zscore_normalize(SpatialDataset& train, std::vector<SpatialDataset*> apply_to) {
    const long n = train.n();
    FeatureStats stats;
    stats.mean = train.features.colwise().mean().transpose();
    stats.std.resize(train.features.cols());
    for (long c = 0; c < train.features.cols(); ++c) {
        const double var =
            (train.features.col(c).array() - stats.mean[c]).square().sum() / n;
        stats.std[c] = std::sqrt(var);
        if (!(stats.std[c] > 0.0))
            throw std::runtime_error("zscore_normalize: zero-variance feature at index " +
                                     std::to_string(c));
    }

    auto apply = [&](SpatialDataset& data) {
        for (long c = 0; c < data.features.cols(); ++c)
            data.features.col(c) =
                (data.features.col(c).array() - stats.mean[c]) / stats.std[c];
    };
    apply(train);
    for (SpatialDataset* data : apply_to)
        if (data) apply(*data);
    return stats;
}

std::pair<RawTable, RawTable> split_domains(
    const RawTable& table, const ColumnSchema& schema,
    const std::function<bool(const std::string&)>& source_predicate) {
    if (!schema.domain_column)
        throw std::invalid_argument("split_domains: schema has no domain column");
    const int idx = table.column_index(*schema.domain_column);
    if (idx < 0) throw std::invalid_argument("split_domains: domain column absent");

    RawTable source, target;
    source.header = table.header;
    target.header = table.header;
    for (const auto& row : table.rows)
        (source_predicate(row[idx]) ? source : target).rows.push_back(row);
    if (source.rows.empty()) throw std::runtime_error("split_domains: empty source domain");
    if (target.rows.empty()) throw std::runtime_error("split_domains: empty target domain");
    return {std::move(source), std::move(target)};
}

std::pair<RawTable, RawTable> resample_proportional(const RawTable& a, const RawTable& b,
                                                    long n_source, long n_target,
                                                    std::uint64_t seed) {
    if (a.header != b.header)
        throw std::invalid_argument("resample_proportional: header mismatch");
    RawTable pool;
    pool.header = a.header;
    pool.rows = a.rows;
    pool.rows.insert(pool.rows.end(), b.rows.begin(), b.rows.end());

    const long n = pool.n_rows();
    if (n_source < 1 || n_target < 1 || n_source + n_target > n)
        throw std::invalid_argument("resample_proportional: subset sizes exceed pool");

    std::vector<long> idx(n);
    std::iota(idx.begin(), idx.end(), 0l);
    Rng rng(seed);
    for (long i = n - 1; i > 0; --i) {
        const long j = static_cast<long>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }

    RawTable source, target;
    source.header = pool.header;
    target.header = pool.header;
    for (long i = 0; i < n_source; ++i) source.rows.push_back(pool.rows[idx[i]]);
    for (long i = 0; i < n_target; ++i) target.rows.push_back(pool.rows[idx[n_source + i]]);
    return {std::move(source), std::move(target)};
}

}  // namespace geoval::ingest
