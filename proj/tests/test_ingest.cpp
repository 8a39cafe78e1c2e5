#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "geoval/ingest.hpp"

using namespace geoval;
using namespace geoval::ingest;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = "geoval_test_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

ColumnSchema schema_xy() {
    ColumnSchema s;
    s.coord_columns = {"X", "Y"};
    s.feature_columns = {"F1", "F2"};
    s.label_column = "LBL";
    s.domain_column = "DOM";
    return s;
}

std::string make_rows(int n_a, int n_b, bool with_missing = false) {
    std::string text = "X,Y,F1,F2,LBL,DOM\n";
    int row = 0;
    for (int i = 0; i < n_a; ++i, ++row)
        text += std::to_string(row) + ",0," + std::to_string(0.1 * row) + ",1.0,A," +
                (row % 2 ? "1" : "0") + "\n";
    for (int i = 0; i < n_b; ++i, ++row)
        text += std::to_string(row) + ",1," + std::to_string(0.1 * row) + ",2.0,B," +
                (row % 2 ? "1" : "0") + "\n";
    if (with_missing) text += "999,1,,2.0,A,1\n";  // missing F1
    return text;
}

}  // namespace

TEST_CASE("load_csv parses rows and honors quoting") {
    TempCsv file(
        "X,Y,F1,F2,LBL,DOM\n"
        "1,2,3.5,4.5,A,1\n"
        "\"5\",6,\"7.5\",8.5,\"B,with comma\",0\n"
        "9,10,11.5,12.5,A,1\n");
    const RawTable table = load_csv(file.path, schema_xy());
    REQUIRE(table.n_rows() == 3);
    CHECK(table.rows[1][table.column_index("LBL")] == "B,with comma");
    CHECK(table.rows[1][table.column_index("X")] == "5");
}

TEST_CASE("load_csv errors on missing column and empty body") {
    TempCsv no_col("X,Y,F1,LBL,DOM\n1,2,3,A,1\n");
    CHECK_THROWS_WITH_AS(load_csv(no_col.path, schema_xy()), doctest::Contains("F2"),
                         std::runtime_error);
    TempCsv header_only("X,Y,F1,F2,LBL,DOM\n");
    CHECK_THROWS(load_csv(header_only.path, schema_xy()));
    CHECK_THROWS(load_csv("does_not_exist.csv", schema_xy()));
}

TEST_CASE("empty and NaN cells become missing rows, not parse failures") {
    TempCsv file(
        "X,Y,F1,F2,LBL,DOM\n"
        "0,0,1.0,1.0,A,1\n"
        "1,0,NaN,1.0,A,1\n"
        "2,0,,1.0,A,1\n"
        "3,0,oops,1.0,A,1\n"
        "4,0,2.0,2.0,B,1\n"
        "5,0,2.5,2.0,B,1\n"
        "6,0,2.5,2.0,B,1\n");
    const RawTable table = load_csv(file.path, schema_xy());
    CHECK(table.n_rows() == 7);
    // rows 1-3 have unusable F1 and must be dropped before balancing:
    // 1 clean A row vs 3 B rows -> balanced output is 1 + 1
    const auto data = clean_and_balance(table, schema_xy(), {"A", "B"}, 5);
    CHECK(data.n() == 2);
}

TEST_CASE("clean_and_balance downsamples the majority class") {
    TempCsv file(make_rows(100, 60));
    const RawTable table = load_csv(file.path, schema_xy());
    const auto data = clean_and_balance(table, schema_xy(), {"A", "B"}, 9);
    REQUIRE(data.n() == 120);
    CHECK((data.labels->array() == 0).count() == 60);
    CHECK((data.labels->array() == 1).count() == 60);
}

TEST_CASE("already balanced input passes through") {
    TempCsv file(make_rows(40, 40));
    const RawTable table = load_csv(file.path, schema_xy());
    const auto data = clean_and_balance(table, schema_xy(), {"A", "B"}, 1);
    CHECK(data.n() == 80);
}

TEST_CASE("labels map to 0/1 in the order the class pair is given") {
    TempCsv file(make_rows(3, 3));
    const RawTable table = load_csv(file.path, schema_xy());
    const auto ab = clean_and_balance(table, schema_xy(), {"A", "B"}, 1);
    const auto ba = clean_and_balance(table, schema_xy(), {"B", "A"}, 1);
    // class A rows come first in the file and have F2 = 1.0
    for (long i = 0; i < ab.n(); ++i) {
        const int expected_ab = ab.features(i, 1) == 1.0 ? 0 : 1;
        CHECK((*ab.labels)[i] == expected_ab);
    }
    for (long i = 0; i < ba.n(); ++i) {
        const int expected_ba = ba.features(i, 1) == 1.0 ? 1 : 0;
        CHECK((*ba.labels)[i] == expected_ba);
    }
}

TEST_CASE("clean_and_balance errors when a class is absent") {
    TempCsv file(make_rows(5, 0));
    const RawTable table = load_csv(file.path, schema_xy());
    CHECK_THROWS_WITH_AS(clean_and_balance(table, schema_xy(), {"A", "B"}, 1),
                         doctest::Contains("B"), std::runtime_error);
}

TEST_CASE("zscore two-point standardization") {
    spatial::SpatialDataset train(Eigen::MatrixXd::Zero(2, 2),
                                  (Eigen::MatrixXd(2, 1) << 0.0, 2.0).finished());
    const auto stats = zscore_normalize(train, {});
    CHECK(stats.mean[0] == 1.0);
    CHECK(stats.std[0] == 1.0);
    CHECK(train.features(0, 0) == -1.0);
    CHECK(train.features(1, 0) == 1.0);
}

TEST_CASE("zscore statistics come from the training split only") {
    // a mean-shifted target keeps its shift after normalization
    Eigen::MatrixXd tf(100, 1), gf(100, 1);
    for (int i = 0; i < 100; ++i) {
        tf(i, 0) = 0.01 * i;        // source: mean ~0.5
        gf(i, 0) = 5.0 + 0.01 * i;  // target: shifted by 5
    }
    spatial::SpatialDataset train(Eigen::MatrixXd::Zero(100, 2), tf);
    spatial::SpatialDataset target(Eigen::MatrixXd::Zero(100, 2), gf);
    zscore_normalize(train, {&target});
    CHECK(std::abs(train.features.col(0).mean()) < 1e-10);
    CHECK(std::abs(train.features.col(0).norm() / std::sqrt(100.0) - 1.0) < 1e-10);
    CHECK(target.features.col(0).mean() > 1.0);  // shift survives
}

TEST_CASE("zscore rejects constant features by index") {
    spatial::SpatialDataset train(Eigen::MatrixXd::Zero(3, 2),
                                  (Eigen::MatrixXd(3, 2) << 1, 7, 2, 7, 3, 7).finished());
    CHECK_THROWS_WITH_AS(zscore_normalize(train, {}), doctest::Contains("1"),
                         std::runtime_error);
}

TEST_CASE("split_domains partitions by predicate") {
    TempCsv file(make_rows(10, 6));
    const RawTable table = load_csv(file.path, schema_xy());
    auto [source, target] = split_domains(table, schema_xy(),
                                          [](const std::string& v) { return v == "1"; });
    CHECK(source.n_rows() + target.n_rows() == table.n_rows());
    CHECK(source.n_rows() == 8);
    CHECK(target.n_rows() == 8);
    CHECK_THROWS(split_domains(table, schema_xy(),
                               [](const std::string&) { return true; }));
}

TEST_CASE("resample_proportional draws disjoint subsets of the right sizes") {
    TempCsv file(make_rows(30, 20));
    const RawTable table = load_csv(file.path, schema_xy());
    auto [a, b] = split_domains(table, schema_xy(),
                                [](const std::string& v) { return v == "1"; });
    auto [rs, rt] = resample_proportional(a, b, 30, 20, 7);
    CHECK(rs.n_rows() == 30);
    CHECK(rt.n_rows() == 20);
    // disjointness: every row is unique in the generated file, so a joint
    // multiset of X values must have no duplicates across the two outputs
    std::set<std::string> seen;
    const int xi = rs.column_index("X");
    for (const auto& row : rs.rows) CHECK(seen.insert(row[xi]).second);
    for (const auto& row : rt.rows) CHECK(seen.insert(row[xi]).second);
}

TEST_CASE("ingestion pipeline is deterministic") {
    TempCsv file(make_rows(50, 30, true));
    const ColumnSchema schema = schema_xy();
    const RawTable t1 = load_csv(file.path, schema);
    const RawTable t2 = load_csv(file.path, schema);
    const auto d1 = clean_and_balance(t1, schema, {"A", "B"}, 77);
    const auto d2 = clean_and_balance(t2, schema, {"A", "B"}, 77);
    CHECK(d1.coords == d2.coords);
    CHECK(d1.features == d2.features);
    CHECK(*d1.labels == *d2.labels);
}
