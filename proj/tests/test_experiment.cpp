#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "geoval/experiment.hpp"
#include "geoval/rng.hpp"

using namespace geoval;
using namespace geoval::experiment;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepSpec small_spec() {
    SweepSpec spec;
    spec.delta_values = {0.0, 1.0};
    spec.tau_values = {1.0};
    spec.r_values = {0.0};
    spec.grid_dims = {16, 16};
    spec.models = {"knn"};
    spec.n_mc = 3;
    spec.block_side = 8.0;
    spec.seed = 5;
    return spec;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, 1.0, 0.1, -2.5, 1.0 / 3.0, 3.0 * std::sqrt(2.0), 1e-300}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("result CSV schema is stable") {
    CHECK(result_csv_header() ==
          "delta,tau,r,model,config,novelty,kl,jaccard,cv,bcv,drv,drv_status,true_error");
    ResultRow row;
    row.model = "knn";
    row.config = "inside";
    const std::string line = to_csv_line(row);
    CHECK(std::count(line.begin(), line.end(), ',') == 12);
}

TEST_CASE("emit_rank orders ascending with lexicographic ties") {
    CHECK(emit_rank({{"A", 0.1}, {"B", 0.3}}) == std::vector<std::string>{"A", "B"});
    CHECK(emit_rank({{"B", 0.2}, {"A", 0.2}}) == std::vector<std::string>{"A", "B"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(emit_rank({{"A", 0.3}, {"B", nan}, {"C", 0.1}}) ==
          std::vector<std::string>{"C", "A"});
    CHECK_THROWS(emit_rank({{"A", 0.1}, {"B", nan}}));
}

TEST_CASE("single no-shift cell: CV tracks the true error") {
    SweepSpec spec;
    spec.delta_values = {0.0};
    spec.tau_values = {1.0};
    spec.r_values = {0.0};
    spec.grid_dims = {50, 50};
    spec.models = {"knn"};
    spec.n_mc = 20;
    spec.block_side = 10.0;  // 25 folds on a 50x50 grid
    spec.seed = 3;
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].config == "inside");
    CHECK(rows[0].novelty == 0.0);
    CHECK(std::abs(rows[0].cv - rows[0].true_error) < 0.05);
    CHECK(rows[0].drv_status == "ok");
}

TEST_CASE("sweep rows cover every cell exactly once, in cell order") {
    auto spec = small_spec();
    spec.models = {"knn", "dummy"};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].delta == 0.0);
    CHECK(rows[0].model == "knn");
    CHECK(rows[1].model == "dummy");
    CHECK(rows[2].delta == 1.0);
    CHECK(rows[3].model == "dummy");
    for (const auto& row : rows) {
        CHECK((row.drv_status == "ok" || row.drv_status == "unstable"));
        CHECK(row.cv >= 0.0);
        CHECK(row.cv <= 1.0);
        CHECK(row.true_error >= 0.0);
        CHECK(row.true_error <= 1.0);
    }
}

TEST_CASE("sweep CSV is byte-identical across runs") {
    const auto spec = small_spec();
    run_sweep_to_csv(spec, "sweep_a.csv");
    run_sweep_to_csv(spec, "sweep_b.csv");
    const std::string a = read_file("sweep_a.csv");
    CHECK(a == read_file("sweep_b.csv"));
    CHECK(a.substr(0, a.find('\n')) == result_csv_header());
    std::remove("sweep_a.csv");
    std::remove("sweep_b.csv");
}

TEST_CASE("sweep is independent of worker thread count") {
    auto spec = small_spec();
    spec.threads = 1;
    const auto serial = run_sweep(spec);
    spec.threads = 4;
    const auto parallel = run_sweep(spec);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].cv == parallel[i].cv);
        CHECK(serial[i].bcv == parallel[i].bcv);
        CHECK(serial[i].drv == parallel[i].drv);
        CHECK(serial[i].true_error == parallel[i].true_error);
    }
}

TEST_CASE("tabular workflow ranks are model permutations") {
    // small synthetic two-domain table: two separable blobs per domain
    std::string text = "X,Y,F1,F2,LBL,DOM\n";
    Rng rng(4);
    for (int dom = 0; dom < 2; ++dom) {
        for (int i = 0; i < 160; ++i) {
            const int cls = i % 2;
            const double cx = cls ? 2.0 : -2.0;
            text += std::to_string(rng.uniform() * 100) + "," +
                    std::to_string(rng.uniform() * 100) + "," +
                    std::to_string(cx + rng.normal()) + "," +
                    std::to_string(cx + rng.normal()) + "," + (cls ? "P" : "Q") + "," +
                    (dom ? "1" : "0") + "\n";
        }
    }
    const std::string path = "tabular_perm.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }

    TabularSpec spec;
    spec.csv_path = path;
    spec.schema.coord_columns = {"X", "Y"};
    spec.schema.feature_columns = {"F1", "F2"};
    spec.schema.label_column = "LBL";
    spec.schema.domain_column = "DOM";
    spec.classes = {"P", "Q"};
    spec.block_sides = {25.0, 25.0};
    spec.models = {"dummy", "gaussian_nb", "knn", "logistic", "tree"};
    spec.seed = 11;

    const auto result = run_tabular(spec);
    REQUIRE(result.rows.size() == 5);
    CHECK(result.k_used == 16);  // 4x4 blocks over the [0,100)^2 box
    auto is_perm = [&](std::vector<std::string> rank) {
        std::sort(rank.begin(), rank.end());
        return rank ==
               std::vector<std::string>{"dummy", "gaussian_nb", "knn", "logistic", "tree"};
    };
    CHECK(is_perm(result.target_rank));
    CHECK(is_perm(result.cv_rank));
    CHECK(is_perm(result.bcv_rank));
    // separable problem: every informed model beats dummy everywhere
    CHECK(result.target_rank.back() == "dummy");
    CHECK(result.cv_rank.back() == "dummy");

    run_tabular_to_csv(spec, "tabular_perm");
    const std::string est = read_file("tabular_perm_estimates.csv");
    CHECK(est.substr(0, est.find('\n')) ==
          "model,source_error,target_error,cv,bcv,drv,drv_status");
    const std::string ranks = read_file("tabular_perm_ranks.csv");
    CHECK(ranks.substr(0, ranks.find('\n')) == "position,target,cv,bcv,drv");
    std::remove(path.c_str());
    std::remove("tabular_perm_estimates.csv");
    std::remove("tabular_perm_ranks.csv");
}
