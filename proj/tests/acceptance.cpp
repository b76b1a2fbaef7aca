// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
// if any criterion fails or exceeds its time budget.

#include "support.hpp"

#include "wbloc/array.hpp"
#include "wbloc/clock.hpp"
#include "wbloc/error.hpp"
#include "wbloc/experiments.hpp"
#include "wbloc/fim.hpp"
#include "wbloc/linalg.hpp"
#include "wbloc/priors.hpp"
#include "wbloc/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace wbloc;
using namespace wbloc::test;

namespace {

// Collects failed checks with a short description of each.
class Verdict {
public:
    void expect(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        failed_ += ok ? 0 : 1;
    }
    bool passed() const { return failed_ == 0; }
    std::string summary() const
    {
        std::ostringstream s;
        s << checks_ << " checks";
        if (failed_ > 0) {
            s << ", " << failed_ << " failed";
            for (const std::string& f : failures_) s << "; " << f;
        }
        return s.str();
    }
    std::string note;

private:
    std::size_t checks_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ResultTable run_builtin(const std::string& name, std::vector<std::string> overrides = {})
{
    LoadOptions opt;
    opt.overrides = std::move(overrides);
    return run_experiment(load_scenario("builtin:" + name, opt));
}

NetworkTopology square_topology()
{
    return NetworkTopology(Vec2::Zero(), {{Vec2(10, 0), Sight::LOS},
                                          {Vec2(0, 10), Sight::LOS},
                                          {Vec2(-10, 0), Sight::LOS},
                                          {Vec2(0, -10), Sight::LOS}});
}

double bias_of(double seconds) { return seconds * kSpeedOfLight; }

// 1. Closed-form SPEB of the symmetric four-anchor scene.
void closed_form_speb(Verdict& v)
{
    const NetworkTopology t = square_topology();
    for (double amplitude : {1.0, 0.3, 2.5}) {
        const MultipathChannel ch(4, AnchorChannel{{{0.0, amplitude}}});
        const Waveform& w = Waveform::canonical();
        const double lambda0 = rii_no_prior(ch[0], Sight::LOS, w, 1.0);
        const PositionBound per_anchor = efim_position_no_prior(t, ch, w, 1.0);
        const double via_full = trace_of_inverse(efim_reduce(full_fim(t, ch, w, 1.0).info, 2));
        v.expect(rel_close(per_anchor.speb, 1.0 / lambda0, 1e-12), "per-anchor SPEB != 1/lambda0");
        v.expect(rel_close(via_full, 1.0 / lambda0, 1e-12), "full-FIM SPEB != 1/lambda0");
        v.expect(rel_close(per_anchor.speb, via_full, 1e-12), "assemblies disagree");
        // The intensity itself against the quadrature oracle.
        v.expect(rel_close(1.0 / lambda0, golden::kInvLambda0 / (amplitude * amplitude), 1e-9),
                 "lambda0 differs from the oracle");
    }
    v.note = "SPEB(1/lambda0) = " + num(golden::kInvLambda0) + " m^2 at unit SNR";
}

// 2. EFIM inverse equals the leading block of the full inverse.
void schur_inverse(Verdict& v)
{
    std::mt19937_64 gen(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto n = static_cast<Eigen::Index>(2 + gen() % 39);
        const auto keep = static_cast<Eigen::Index>(1 + gen() % static_cast<std::uint64_t>(n - 1));
        // Random orthogonal basis with eigenvalues spread over four decades.
        const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(random_spd(n, gen)).householderQ();
        Eigen::VectorXd eig(n);
        for (Eigen::Index k = 0; k < n; ++k) eig(k) = std::pow(10.0, uniform(gen, -2, 2));
        Eigen::MatrixXd j = basis * eig.asDiagonal() * basis.transpose();
        j = 0.5 * (j + j.transpose());
        const Eigen::MatrixXd lhs = efim_reduce(j, keep).inverse();
        const Eigen::MatrixXd rhs = j.inverse().topLeftCorner(keep, keep);
        worst = std::max(worst, rel_diff(lhs, rhs));
        v.expect(rel_diff(lhs, rhs) <= 1e-10, "dimension " + std::to_string(n));
    }
    v.note = "worst relative difference " + num(worst);
}

// 3. Path-separation sweep structure.
void path_separation_structure(Verdict& v)
{
    const ResultTable t = run_builtin("fig4");
    double strict_gap = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double sep = t.sweep_value(r);
        const double full = t.value(r, "speb_full");
        const double partial = t.value(r, "speb_partial");
        const double ref = t.value(r, "speb_nonoverlap");
        v.expect(partial <= full * (1 + 1e-12), "partial > full at " + num(sep) + " ns");
        if (sep >= 4.0) {
            v.expect(rel_close(full, ref, 1e-9) && rel_close(partial, ref, 1e-9), "models differ at " + num(sep) + " ns");
        }
        if (std::abs(sep - 1.0) < 1e-12) {
            v.expect(partial < full, "no strict gap at 1 ns");
            strict_gap = full / partial - 1.0;
        }
    }
    v.expect(strict_gap > 0.0, "1 ns row missing");
    v.note = std::to_string(t.rows()) + " separations, full/partial - 1 at 1 ns = " + num(strict_gap);
}

// 4. Overlap coefficient bounds and amplitude invariance.
void overlap_properties(Verdict& v)
{
    const Waveform& w = Waveform::canonical();
    RandomStream rng(4);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double sep = 0.01e-9 + 5.99e-9 * rng.uniform();
        AnchorChannel ch{{{0.0, rng.sign() * (0.05 + 2 * rng.uniform())}, {bias_of(sep), rng.sign() * (0.05 + 2 * rng.uniform())}}};
        const double chi = poc(ch, w);
        v.expect(chi >= 0.0 && chi <= 1.0, "chi out of [0, 1] at " + num(sep));
        for (Path& p : ch.paths) p.amplitude *= rng.sign() * std::pow(10.0, 4 * rng.uniform() - 2);
        const double scaled = poc(ch, w);
        worst = std::max(worst, std::abs(scaled - chi));
        v.expect(std::abs(scaled - chi) <= 1e-10, "not amplitude invariant at " + num(sep));
        v.expect(poc({{ch.paths.front()}}, w) == 0.0, "single path chi != 0");
    }
    v.note = "max rescaling change " + num(worst);
}

// 5. Mean overlap falls with the inter-arrival time.
void average_overlap_trend(Verdict& v)
{
    PocStudyConfig cfg;
    cfg.path_counts = {50};
    cfg.inter_arrival_ns = {1.4, 3.5};
    cfg.replications = 1000;
    cfg.seed = 1;
    const ResultTable t = average_poc_study(cfg);
    const double m14 = t.value(0, "chi_mean_L50");
    const double m35 = t.value(1, "chi_mean_L50");
    const double se = std::hypot(t.value(0, "chi_se_L50"), t.value(1, "chi_se_L50"));
    v.expect(t.value(0, "n_L50") == 1000.0 && t.value(1, "n_L50") == 1000.0, "replication count");
    v.expect(m14 - m35 > 3 * se, "gap below 3 standard errors");
    v.note = "mean chi 1.4 ns = " + num(m14) + ", 3.5 ns = " + num(m35) + ", gap/se = " + num((m14 - m35) / se);
}

// 6. Ranging-ability outage curves.
void outage_properties(Verdict& v)
{
    const ResultTable t = run_builtin("rao");
    const std::vector<std::string> order{"3.5", "2.5", "2", "1.6", "1.4"}; // sparse to dense
    for (const std::string& c : order) {
        double previous = 1.0;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double p = t.value(r, "pout_" + c + "ns");
            v.expect(p <= previous, "curve " + c + " ns increases at " + num(t.sweep_value(r)));
            previous = p;
        }
        v.expect(std::abs(t.sweep_value(t.rows() - 1) - 1.0) < 1e-12, "grid does not end at 1");
        v.expect(t.value(t.rows() - 1, "pout_" + c + "ns") == 0.0, "outage at threshold 1 for " + c + " ns");
    }
    for (std::size_t i = 1; i < order.size(); ++i) {
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double sparse = t.value(r, "pout_" + order[i - 1] + "ns");
            const double dense = t.value(r, "pout_" + order[i] + "ns");
            const double se = std::hypot(t.value(r, "pout_se_" + order[i - 1] + "ns"), t.value(r, "pout_se_" + order[i] + "ns"));
            v.expect(sparse <= dense + 3 * se, order[i - 1] + " ns above " + order[i] + " ns at " + num(t.sweep_value(r)));
        }
    }
    v.note = std::to_string(t.rows()) + " thresholds x 5 curves, 1000 replications each";
}

// 7. Channel priors only add ranging information.
void prior_monotonicity(Verdict& v)
{
    const Waveform& w = Waveform::canonical();
    std::mt19937_64 gen(7);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Sight sight = i % 4 == 0 ? Sight::NLOS : Sight::LOS;
        const AnchorChannel ch = random_channel(gen, 1 + gen() % 4, sight, 0.4, 0.05);
        const ChannelLayout layout{ch.size(), sight};
        const auto dim = static_cast<Eigen::Index>(layout.dimension());
        const Eigen::MatrixXd full = std::pow(10.0, uniform(gen, -2, 3)) * random_spd(dim + 1, gen, 1e-3);
        ChannelPrior prior;
        prior.distance = full(0, 0);
        prior.distance_kappa = full.block(0, 1, 1, dim);
        prior.kappa = full.bottomRightCorner(dim, dim);
        const double without = rii_no_prior(ch, sight, w, 1.0);
        const double with = rii_with_prior(ch, sight, w, 1.0, prior);
        worst = std::min(worst, with - without);
        v.expect(with - without >= -1e-10, "prior lowered the intensity");
        v.expect(rii_with_prior(ch, sight, w, 1.0, ChannelPrior{}) == without, "zero prior is not exact");
    }

    // A sharp first-bias prior turns an NLOS anchor into a LOS one.
    for (int i = 0; i < 100; ++i) {
        const AnchorChannel nlos = random_channel(gen, 1 + gen() % 4, Sight::NLOS, 0.4, 0.05);
        AnchorChannel los = nlos;
        for (Path& p : los.paths) p.bias_m -= nlos.paths.front().bias_m;
        const double target = rii_no_prior(los, Sight::LOS, w, 1.0);
        double previous = std::numeric_limits<double>::infinity();
        for (double t2 = 1e2; t2 <= 1e12; t2 *= 10.0) {
            std::vector<double> bias(nlos.size(), 0.0);
            bias[0] = t2;
            const ChannelPrior p = ChannelPrior::diagonal(bias, std::vector<double>(nlos.size(), 0.0), Sight::NLOS);
            const double err = std::abs(rii_with_prior(nlos, Sight::NLOS, w, 1.0, p) - target);
            // The sharp prior costs about eps * t^2 / lambda in cancellation,
            // which reaches ~1e-11 relative at t^2 = 1e12.
            v.expect(err <= previous + 1e-10 * target, "convergence error grew at t^2 = " + num(t2));
            previous = err;
        }
        v.expect(previous <= 1e-6 * target, "no convergence to the LOS value");
    }
    v.note = "smallest with - without = " + num(worst);
}

// 8. Array identities on the six-anchor ULA scene.
void array_identities(Verdict& v)
{
    std::vector<RangingInfo> six;
    for (int k = 0; k < 6; ++k) six.push_back({10.0, bearing(10.0 * unit_direction(k * kPi / 3), Vec2::Zero())});
    const ArrayScene scene = far_field_scene(ArrayGeometry::uniform_linear(4, 0.5), Vec2::Zero(), six);

    const double soeb = array_efim(scene, Mat2::Zero(), 0.0).soeb;
    const double aware = array_efim(scene, Mat2::Zero(), kInfiniteInformation).position.speb;
    const std::vector<Vec2> refs{{0.5, 0.0}, {-1.2, 0.4}, {2.0, -2.0}, {0.0, 3.0}, {-0.3, -0.9}};
    for (const Vec2& ref : refs) {
        const ArrayScene moved = with_reference(scene, ref);
        v.expect(rel_close(array_efim(moved, Mat2::Zero(), 0.0).soeb, soeb, 1e-9), "SOEB depends on the reference");
        const SpebDecomposition d = speb_soeb_decomposition(moved, 0.0);
        v.expect(rel_close(d.direct, d.decomposed, 1e-9), "decomposition mismatch");
        v.expect(rel_close(array_efim(moved, Mat2::Zero(), kInfiniteInformation).position.speb, aware, 1e-9),
                 "orientation-aware SPEB depends on the reference");
    }
    const double offset = (orientation_center(with_reference(scene, refs[2])).position - scene.center).norm();
    v.expect(offset <= 1e-9, "orientation center away from the array center");

    // The same identities through the sweep.
    const ResultTable t = run_builtin("fig7_8");
    for (std::size_t r = 0; r < t.rows(); ++r) {
        v.expect(rel_close(t.value(r, "speb_xiphi0"), t.value(r, "speb_decomposed"), 1e-9), "sweep decomposition");
        v.expect(rel_close(t.value(r, "soeb_xip0"), t.value(0, "soeb_xip0"), 1e-9), "sweep SOEB");
        v.expect(t.value(r, "speb_xiphi0") >= t.value(0, "speb_xiphi0"), "center is not the best reference");
    }
    v.note = "SOEB = " + num(soeb) + " rad^2, center offset " + num(offset) + " m";
}

// 9. Clock offset on the four-anchor circle.
void clock_offset(Verdict& v)
{
    auto circle = [](std::initializer_list<double> placement) {
        std::vector<RangingInfo> r;
        for (double a : placement) r.push_back({10.0, bearing(10.0 * unit_direction(a), Vec2::Zero())});
        return r;
    };
    const auto symmetric = circle({0, kPi / 2, kPi, 3 * kPi / 2});
    for (double xi : {0.0, 10.0, 100.0, kInfiniteInformation}) {
        v.expect(std::abs(efim_with_offset(symmetric, Mat2::Zero(), xi).position.speb - 0.1) <= 1e-10,
                 "symmetric SPEB for xi = " + num(xi));
    }
    const OffsetBound lopsided = efim_with_offset(circle({kPi / 2, kPi, kPi, 3 * kPi / 2}), Mat2::Zero(), 0.0);
    v.expect(std::abs(lopsided.position.speb - 0.15) <= 1e-10, "asymmetric SPEB");
    v.expect(std::abs(lopsided.offset_info - 20.0) <= 1e-10, "asymmetric offset information");

    const ResultTable t = run_builtin("fig9_10");
    for (std::size_t r = 0; r < t.rows(); ++r) {
        v.expect(t.value(r, "speb_xiBinf") == t.value(r, "speb_nooffset"), "known offset differs from baseline");
    }
    for (const char* c : {"speb_xiB0", "speb_xiB10", "speb_xiB100", "speb_xiBinf"}) {
        v.expect(std::abs(t.value(0, c) - 0.1) <= 1e-10, std::string("sweep start ") + c);
    }

    std::mt19937_64 gen(9);
    for (int i = 0; i < 100; ++i) {
        std::vector<RangingInfo> r;
        const std::size_t n = 3 + gen() % 6;
        for (std::size_t k = 0; k < n; ++k) r.push_back({uniform(gen, 0.5, 30), uniform(gen, -kPi, kPi)});
        const Mat2 prior = uniform(gen, 0, 1) < 0.5 ? Mat2::Zero() : Mat2(uniform(gen, 0, 10) * Mat2::Identity());
        const double xi = uniform(gen, 0, 1) < 0.2 ? 0.0 : std::pow(10.0, uniform(gen, -2, 3));
        const Mat2 with = efim_with_offset(r, prior, xi).position.efim;
        const Mat2 without = efim_from_ranging(r) + prior;
        const double floor = Eigen::SelfAdjointEigenSolver<Mat2>(Mat2(without - with)).eigenvalues().minCoeff();
        v.expect(floor >= -1e-9 * without.norm(), "offset EFIM exceeds the offset-free EFIM");
    }
    v.note = "asymmetric SPEB = " + num(lopsided.position.speb) + " m^2, J_e(B) = " + num(lopsided.offset_info);
}

// 10. Fixed seeds give byte-identical CSV.
void determinism(Verdict& v)
{
    std::size_t bytes = 0;
    for (const std::string& name : builtin_names()) {
        const std::string a = run_builtin(name).to_csv();
        v.expect(a == run_builtin(name).to_csv(), name + " differs between runs");
        // Thread count must not matter either.
        LoadOptions one;
        one.threads = 1;
        LoadOptions four;
        four.threads = 4;
        v.expect(run_experiment(load_scenario("builtin:" + name, one)).to_csv()
                     == run_experiment(load_scenario("builtin:" + name, four)).to_csv(),
                 name + " depends on the thread count");
        bytes += a.size();
    }
    v.note = std::to_string(builtin_names().size()) + " builtins, " + std::to_string(bytes) + " bytes of CSV";
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Verdict&)> run;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "closed-form SPEB, symmetric four-anchor scene", 1, closed_form_speb},
        {2, "Schur complement versus full inverse", 5, schur_inverse},
        {3, "path-separation structure", 10, path_separation_structure},
        {4, "overlap coefficient properties", 30, overlap_properties},
        {5, "mean overlap versus inter-arrival time", 120, average_overlap_trend},
        {6, "ranging-ability outage properties", 120, outage_properties},
        {7, "prior monotonicity and convergence", 60, prior_monotonicity},
        {8, "array reference-point identities", 10, array_identities},
        {9, "clock offset bounds", 30, clock_offset},
        {10, "deterministic CSV output", 60, determinism},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.expect(false, std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed < c.budget_s;
        const bool ok = v.passed() && in_time;
        failed += ok ? 0 : 1;
        std::printf("%s %2d %s (%.2f s of %.0f s; %s%s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name, elapsed,
                    c.budget_s, v.summary().c_str(), in_time ? "" : "; over time budget", v.note.empty() ? "" : ": ",
                    v.note.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
