#include "support.hpp"

#include "wbloc/error.hpp"
#include "wbloc/experiments.hpp"
#include "wbloc/scenario.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace wbloc;
using namespace wbloc::test;

namespace {

ResultTable run_builtin(const std::string& name, std::vector<std::string> overrides = {})
{
    LoadOptions opt;
    opt.overrides = std::move(overrides);
    return run_experiment(load_scenario("builtin:" + name, opt));
}

bool all_finite_numbers(const ResultTable& t)
{
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (const std::string& c : t.columns()) {
            const Cell& cell = t.cell(r, c);
            if (const double* v = std::get_if<double>(&cell); v && std::isnan(*v)) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("summary statistics")
{
    const std::vector<double> x{1, 2, 3, 4};
    const McStat s = summarize(x);
    CHECK(s.count == 4);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("parallel_for visits every index and reports the first failure")
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);

    try {
        parallel_for(100, 4, [](std::size_t i) {
            if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
        });
        FAIL("no exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "17");
    }
}

TEST_CASE("result table formatting")
{
    ResultTable t("x", {"a", "b"});
    t.add_row(0.1, {1.0 / 3.0, CellError{"singular"}});
    t.add_row(2.0, {kInfiniteInformation, 5.0});
    CHECK(t.rows() == 2);
    CHECK(t.value(1, "b") == 5.0);
    CHECK_THROWS_AS(t.value(0, "b"), NumericalError);
    const std::string csv = t.to_csv();
    CHECK(csv.rfind("x,a,b\n", 0) == 0);
    CHECK(csv.find("0.3333333333333333") != std::string::npos);
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(format_number(0.1) == "0.1");
    CHECK(prior_token(kInfiniteInformation) == "inf");
    CHECK(prior_token(100.0) == "100");
}

TEST_CASE("path separation sweep structure")
{
    const ResultTable t = run_builtin("fig4", {"experiment.separations_ns=[0.5,1,2,3.7,4,5,6,8]"});
    CHECK(t.sweep_variable() == "separation_ns");
    CHECK(t.columns() == std::vector<std::string>{"speb_full", "speb_partial", "speb_nonoverlap", "chi"});
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double full = t.value(r, "speb_full");
        const double partial = t.value(r, "speb_partial");
        const double ref = t.value(r, "speb_nonoverlap");
        CHECK(partial <= full * (1 + 1e-12));
        if (t.sweep_value(r) >= 4.0) {
            CHECK(rel_close(full, ref, 1e-9));
            CHECK(rel_close(partial, ref, 1e-9));
            CHECK(t.value(r, "chi") == 0.0);
        }
        if (t.sweep_value(r) == 1.0) {
            CHECK(partial < full);
            CHECK(full > ref);
            CHECK(rel_close(t.value(r, "chi"), golden::kChi1ns, 1e-9));
        }
    }
}

TEST_CASE("amplitude and bias prior variants")
{
    const ResultTable a = run_builtin("fig5a", {"experiment.separations_ns=[0.5,1,2,6]"});
    const ResultTable b = run_builtin("fig5b", {"experiment.separations_ns={\"start\":0.1,\"stop\":8,\"step\":0.1}"});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double none = a.value(r, "speb_xia1_0_xia2_0");
        CHECK(rel_close(none, a.value(r, "speb_full"), 1e-12));
        CHECK(a.value(r, "speb_xia1_inf_xia2_0") <= none * (1 + 1e-12));
        CHECK(a.value(r, "speb_xia1_0_xia2_inf") <= none * (1 + 1e-12));
        CHECK(rel_close(a.value(r, "speb_xia1_inf_xia2_inf"), a.value(r, "speb_partial"), 1e-9));
    }
    bool below_reference = false;
    for (std::size_t r = 0; r < b.rows(); ++r) {
        CHECK(b.value(r, "speb_xib2_20") <= b.value(r, "speb_xib2_0") * (1 + 1e-12));
        CHECK(b.value(r, "speb_xib2_inf") <= b.value(r, "speb_xib2_20") * (1 + 1e-12));
        below_reference = below_reference || b.value(r, "speb_xib2_inf") < b.value(r, "speb_nonoverlap");
    }
    CHECK(below_reference);
}

TEST_CASE("average overlap coefficient trends")
{
    const ResultTable t = run_builtin("fig6", {"experiment.replications=300", "experiment.path_counts=[2,3,5,50]",
                                               "experiment.inter_arrival_ns=[0.5,1.4,3.5,10]"});
    CHECK(t.sweep_variable() == "inter_arrival_ns");
    CHECK(t.column_index("chi_se_L50") > t.column_index("chi_mean_L50"));
    for (std::size_t r = 0; r < t.rows(); ++r) CHECK(t.value(r, "n_L50") == 300.0);

    auto mean = [&](std::size_t r, const char* col) { return t.value(r, col); };
    CHECK(mean(0, "chi_mean_L50") > 0.8);
    CHECK(mean(3, "chi_mean_L50") < 0.2);
    for (std::size_t r = 1; r < t.rows(); ++r) {
        const double gap = mean(r - 1, "chi_mean_L50") - mean(r, "chi_mean_L50");
        const double se = std::hypot(t.value(r - 1, "chi_se_L50"), t.value(r, "chi_se_L50"));
        CHECK(gap > -3 * se);
    }
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double se = std::hypot(t.value(r, "chi_se_L2"), t.value(r, "chi_se_L3"));
        CHECK(mean(r, "chi_mean_L3") >= mean(r, "chi_mean_L2") - 3 * se);
        CHECK(std::abs(mean(r, "chi_mean_L50") - mean(r, "chi_mean_L5")) < 0.1);
    }
    CHECK(all_finite_numbers(t));
}

TEST_CASE("ranging ability outage curves")
{
    const ResultTable t = run_builtin("rao", {"experiment.replications=300", "experiment.inter_arrival_ns=[0.5,1.4,3.5]",
                                              "experiment.thresholds={\"start\":0,\"stop\":1,\"count\":11}"});
    CHECK(t.sweep_variable() == "chi_threshold");
    const std::vector<std::string> curves{"0.5", "1.4", "3.5"};
    for (const std::string& c : curves) {
        double previous = 1.0;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double p = t.value(r, "pout_" + c + "ns");
            CHECK(p <= previous);
            previous = p;
        }
        CHECK(t.value(t.rows() - 1, "pout_" + c + "ns") == 0.0);
    }
    // Dense channels always overlap.
    CHECK(t.value(0, "pout_0.5ns") > 0.99);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double se = std::hypot(t.value(r, "pout_se_3.5ns"), t.value(r, "pout_se_1.4ns"));
        CHECK(t.value(r, "pout_3.5ns") <= t.value(r, "pout_1.4ns") + 3 * se);
    }
}

TEST_CASE("array reference sweep")
{
    const ResultTable t = run_builtin("fig7_8");
    CHECK(t.sweep_variable() == "ref_distance_m");
    REQUIRE(t.rows() == 21);
    const double soeb0 = t.value(0, "soeb_xip0");
    double min_speb = t.value(0, "speb_xiphi0");
    for (std::size_t r = 0; r < t.rows(); ++r) {
        CHECK(rel_close(t.value(r, "soeb_xip0"), soeb0, 1e-9));
        CHECK(t.value(r, "speb_xiphi0") >= min_speb);
        CHECK(rel_close(t.value(r, "speb_xiphi0"), t.value(r, "speb_decomposed"), 1e-9));
        CHECK(rel_close(t.value(r, "speb_xiphiinf"), t.value(0, "speb_xiphiinf"), 1e-12));
        CHECK(t.value(r, "center_distance_m") == doctest::Approx(t.sweep_value(r)).epsilon(1e-12));
        const double d = t.sweep_value(r);
        CHECK(rel_close(t.value(r, "speb_xiphi0"), t.value(0, "speb_xiphi0") + d * d * soeb0, 1e-9));
    }
    CHECK(rel_close(t.value(0, "speb_xiphi0"), 1.0 / 60.0, 1e-12));
}

TEST_CASE("offset anchor sweep")
{
    const ResultTable t = run_builtin("fig9_10");
    CHECK(t.sweep_variable() == "phi1_rad");
    CHECK(t.columns() == std::vector<std::string>{"speb_xiB0", "speb_xiB10", "speb_xiB100", "speb_xiBinf",
                                                  "speb_nooffset", "steb_xiB0", "steb_xiB10", "steb_xiB100",
                                                  "steb_xiBinf"});
    for (const char* c : {"speb_xiB0", "speb_xiB10", "speb_xiB100", "speb_xiBinf"}) {
        CHECK(std::abs(t.value(0, c) - 0.1) <= 1e-10);
    }
    double steb = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        CHECK(t.value(r, "speb_xiBinf") == t.value(r, "speb_nooffset"));
        CHECK(t.value(r, "steb_xiB0") >= steb * (1 - 1e-12));
        steb = t.value(r, "steb_xiB0");
        CHECK(t.value(r, "speb_xiB0") >= t.value(r, "speb_xiB10") * (1 - 1e-12));
    }
    const std::size_t last = t.rows() - 1;
    CHECK(t.sweep_value(last) == doctest::Approx(kPi));
    CHECK(std::abs(t.value(last, "speb_xiB0") - 0.15) <= 1e-10);
}

TEST_CASE("Monte Carlo sweeps are reproducible and seed dependent")
{
    const std::vector<std::string> small{"experiment.replications=50", "experiment.inter_arrival_ns=[1,3]"};
    const std::string a = run_builtin("fig6", small).to_csv();
    const std::string b = run_builtin("fig6", small).to_csv();
    CHECK(a == b);

    LoadOptions one_thread;
    one_thread.overrides = small;
    one_thread.overrides.emplace_back("experiment.threads=1");
    CHECK(run_experiment(load_scenario("builtin:fig6", one_thread)).to_csv() == a);

    LoadOptions reseeded;
    reseeded.overrides = small;
    reseeded.seed = 99;
    CHECK(run_experiment(load_scenario("builtin:fig6", reseeded)).to_csv() != a);
}

TEST_CASE("symmetric scan")
{
    const ResultTable t = run_builtin("symmetric4");
    for (std::size_t r = 0; r < t.rows(); ++r) {
        CHECK(rel_close(t.value(r, "speb_m2"), 1.0 / t.sweep_value(r), 1e-12));
    }
}
