/* test_experiments.cpp
 *
 * Experiment drivers: summaries, exit codes, negative controls,
 * deterministic reports, file outputs, and verify round trips.  Configs
 * here are kept small; the acceptance binary runs the full-size sweeps.
 */

#include <catch2/catch_amalgamated.hpp>

#include <cstar/experiments.hpp>

#include <filesystem>
#include <fstream>

using namespace cstar;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_homotopy_config() {
    ExperimentConfig cfg;
    cfg.seed = 77;
    cfg.instances = 2;
    cfg.homotopy_dims = {2, 3};
    cfg.homotopy_eps = {1.0};
    cfg.homotopy_min_samples = 100;
    cfg.homotopy_max_samples = 800;
    return cfg;
}

ExperimentConfig small_interval_config() {
    ExperimentConfig cfg;
    cfg.seed = 78;
    cfg.instances = 3;
    cfg.interval_chi = {7, 7};
    cfg.interval_windows = {0.6, 0.5, 0.4};
    cfg.interval_level = 1;
    return cfg;
}

ExperimentConfig small_circle_config() {
    ExperimentConfig cfg;
    cfg.seed = 79;
    cfg.instances = 6;
    cfg.circle_chi = {4, 4};
    cfg.circle_amplitudes = {1.0, 1.0};
    cfg.circle_threshold = 1.0;
    cfg.circle_grid = 128;
    cfg.circle_slices = 11;
    return cfg;
}

fs::path fresh_out_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cstarlab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

nlohmann::json load_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("element and config json round trips") {
    Rng rng = seeded_rng(5);
    const BlockAlgebra alg({2, 3});
    const Element e = random_hermitian(rng, alg, 0.7);
    const Element back = element_from_json(element_to_json(e));
    CHECK(operator_norm(back - e) == 0.0);  // exact: doubles survive json

    ExperimentConfig cfg = small_interval_config();
    cfg.negative_control = "weak-gap";
    const ExperimentConfig rt = config_from_json(config_to_json(cfg));
    CHECK(rt.seed == cfg.seed);
    CHECK(rt.interval_chi == cfg.interval_chi);
    CHECK(rt.interval_windows == cfg.interval_windows);
    CHECK(rt.negative_control == cfg.negative_control);
    CHECK(config_to_json(rt).dump() == config_to_json(cfg).dump());
}

TEST_CASE("homotopy experiment sweeps, summarizes and reproduces") {
    const ExperimentConfig cfg = small_homotopy_config();
    const HomotopyExperiment ex = run_homotopy_experiment(cfg);
    REQUIRE(ex.total == 4);
    CHECK(ex.accepted == 4);
    CHECK(ex.hypothesis_rejections == 0);
    CHECK(ex.passed == 4);
    CHECK(ex.failed == 0);
    CHECK(ex.pass_rate == 1.0);
    CHECK(ex.exit_code == kExitPass);
    CHECK(ex.max_length <= 3.0 * std::numbers::pi + 1.0);
    CHECK(ex.max_sampled_comm < 1.0);
    for (const auto& o : ex.instances) {
        CHECK(o.comm_hu <= 1.0 / 40.0);
        CHECK(o.report.pass);
    }

    // Bit-identical reports for identical config and seed.
    const HomotopyExperiment again = run_homotopy_experiment(cfg);
    CHECK(to_json(ex, cfg).dump() == to_json(again, cfg).dump());
}

TEST_CASE("loose-nu control rejects hypotheses without failing") {
    ExperimentConfig cfg = small_homotopy_config();
    cfg.negative_control = "loose-nu";
    const HomotopyExperiment ex = run_homotopy_experiment(cfg);
    CHECK(ex.total == 4);
    CHECK(ex.hypothesis_rejections == 4);
    CHECK(ex.accepted == 0);
    CHECK(ex.failed == 0);
    CHECK(ex.pass_rate == 1.0);
    CHECK(ex.exit_code == kExitPass);
    for (const auto& o : ex.instances) CHECK(o.comm_hu > o.eps / 40.0);
}

TEST_CASE("zero instances give an empty passing summary") {
    ExperimentConfig cfg = small_homotopy_config();
    cfg.instances = 0;
    const HomotopyExperiment ex = run_homotopy_experiment(cfg);
    CHECK(ex.total == 0);
    CHECK(ex.exit_code == kExitPass);
    CHECK(ex.pass_rate == 1.0);
}

TEST_CASE("interval experiment certifies sampled staircases") {
    const ExperimentConfig cfg = small_interval_config();
    const IntervalExperiment ex = run_interval_experiment(cfg);
    REQUIRE(ex.total == 3);
    CHECK(ex.sampled == 3);
    CHECK(ex.refusals == 0);
    CHECK(ex.applicable == 3);
    CHECK(ex.verdicts_true == 3);
    CHECK_FALSE(ex.vacuous);
    CHECK(ex.min_delta_applicable > 1.0);
    CHECK(ex.max_distance <= 0.2);
    CHECK(ex.max_measure <= cfg.interval_windows[1]);
    CHECK(ex.exit_code == kExitPass);

    const IntervalExperiment again = run_interval_experiment(cfg);
    CHECK(to_json(ex, cfg).dump() == to_json(again, cfg).dump());
}

TEST_CASE("weak-gap control flips every verdict to false") {
    ExperimentConfig cfg = small_interval_config();
    cfg.negative_control = "weak-gap";
    const IntervalExperiment ex = run_interval_experiment(cfg);
    CHECK(ex.applicable == 3);
    CHECK(ex.verdicts_true == 0);
    CHECK_FALSE(ex.vacuous);
    CHECK(ex.exit_code == kExitFail);
    for (const auto& o : ex.outcomes) {
        REQUIRE(o.sampled);
        CHECK(o.cert.gap_coefficient == 1.0);
        CHECK(o.cert.chain_holds);
        CHECK(o.cert.delta_norm <= 1.0);
    }
}

TEST_CASE("hopeless margins end in honest vacuity") {
    ExperimentConfig cfg = small_interval_config();
    cfg.interval_margin = 0.19;  // reach 0.01, far below the branch spans
    const IntervalExperiment ex = run_interval_experiment(cfg);
    CHECK(ex.sampled == 0);
    CHECK(ex.refusals == 3);
    CHECK(ex.applicable == 0);
    CHECK(ex.vacuous);
    CHECK(ex.exit_code == kExitVacuous);
    for (const auto& o : ex.outcomes) CHECK_FALSE(o.refusal.empty());
}

TEST_CASE("circle experiment obstructs every candidate path") {
    const ExperimentConfig cfg = small_circle_config();
    const CircleExperiment ex = run_circle_experiment(cfg);
    REQUIRE(ex.error.empty());

    REQUIRE(ex.periodic_levels.size() == 2);
    for (const auto& lv : ex.periodic_levels) {
        CHECK(lv.integrality < 1e-9);
        CHECK(lv.periodicity_defect < 1e-9);
    }
    CHECK(ex.periodic_levels.back().top == Catch::Approx(2.0).margin(1e-9));
    CHECK(ex.periodic_levels.back().top_rank == 4);
    CHECK(ex.periodic_levels.back().gap == Catch::Approx(2.0).margin(1e-9));
    CHECK(ex.scaled_top.top_rank == 4);

    REQUIRE(ex.candidates.size() == 6);
    CHECK(ex.obstructed_count == 6);
    CHECK(ex.exit_code == kExitPass);
    for (const auto& c : ex.candidates) {
        CHECK(c.endpoints_certified);
        CHECK(c.winding_start == 0);
        CHECK(c.winding_end == 4);
        CHECK(c.obstructed);
        if (c.kind == "breach") {
            int inapplicable = 0;
            for (const auto& s : c.slices)
                if (!s.applicable) ++inapplicable;
            CHECK(inapplicable >= 1);
        } else {
            // The polished candidates stay certified on every slice while
            // the winding still climbs: that mismatch is the witness.
            int distinct = 1;
            for (const auto& s : c.slices) {
                CHECK(s.applicable);
                CHECK(s.invertible);
                CHECK(s.winding_computed);
            }
            for (size_t i = 1; i < c.slices.size(); ++i)
                if (c.slices[i].winding != c.slices[i - 1].winding) ++distinct;
            CHECK(distinct >= 2);
        }
    }

    const CircleExperiment again = run_circle_experiment(cfg);
    CHECK(to_json(ex, cfg).dump() == to_json(again, cfg).dump());
}

TEST_CASE("circle threshold above the gap is a config error") {
    ExperimentConfig cfg = small_circle_config();
    cfg.circle_threshold = 2.5;  // scaled gap is 2
    const CircleExperiment ex = run_circle_experiment(cfg);
    CHECK_FALSE(ex.error.empty());
    CHECK(ex.exit_code == kExitConfig);
}

TEST_CASE("cmd_homotopy writes a deterministic report and traces") {
    ExperimentConfig cfg = small_homotopy_config();
    cfg.instances = 1;
    cfg.homotopy_dims = {2};
    const fs::path dir = fresh_out_dir("homotopy");
    cfg.out_dir = dir.string();
    REQUIRE(cmd_homotopy(cfg) == kExitPass);
    const nlohmann::json rep = load_json(dir / "homotopy_report.json");
    CHECK(rep.at("schema_version") == "1.0");
    CHECK(rep.at("command") == "homotopy");
    CHECK(rep.at("summary").at("total") == 1);
    CHECK(rep.at("summary").at("passed") == 1);
    CHECK(fs::exists(dir / "homotopy_trace_first.csv"));
    const std::string trace = slurp(dir / "homotopy_trace_first.csv");
    CHECK(trace.rfind("segment,s,arclength,comm,unitarity_defect", 0) == 0);

    const std::string once = slurp(dir / "homotopy_report.json");
    REQUIRE(cmd_homotopy(cfg) == kExitPass);
    CHECK(slurp(dir / "homotopy_report.json") == once);

    CHECK(cmd_verify(dir / "homotopy_report.json") == kExitPass);

    // Tampered summaries must not verify.
    nlohmann::json bad = rep;
    bad["summary"]["passed"] = 0;
    bad["summary"]["failed"] = 1;
    std::ofstream(dir / "tampered.json") << bad.dump(2);
    CHECK(cmd_verify(dir / "tampered.json") == kExitFail);
}

TEST_CASE("cmd_counterexample_interval round trips through verify") {
    ExperimentConfig cfg = small_interval_config();
    cfg.instances = 2;
    const fs::path dir = fresh_out_dir("interval");
    cfg.out_dir = dir.string();
    REQUIRE(cmd_counterexample_interval(cfg) == kExitPass);
    const nlohmann::json rep = load_json(dir / "interval_report.json");
    CHECK(rep.at("command") == "cx-interval");
    CHECK(rep.at("summary").at("verdicts_true") == 2);
    CHECK(fs::exists(dir / "interval_samples.csv"));
    CHECK(cmd_verify(dir / "interval_report.json") == kExitPass);

    // The weak-gap control fails, leaves replay files, and both the report
    // and the standalone replay verify to the same (false) verdict.
    ExperimentConfig weak = cfg;
    weak.negative_control = "weak-gap";
    weak.out_dir = (dir / "weak").string();
    REQUIRE(cmd_counterexample_interval(weak) == kExitFail);
    CHECK(cmd_verify(dir / "weak" / "interval_report.json") == kExitPass);
    REQUIRE(fs::exists(dir / "weak" / "interval_failing_0.json"));
    CHECK(cmd_verify(dir / "weak" / "interval_failing_0.json") == kExitPass);
}

TEST_CASE("cmd_counterexample_circle writes report and verifies") {
    ExperimentConfig cfg = small_circle_config();
    cfg.instances = 3;
    const fs::path dir = fresh_out_dir("circle");
    cfg.out_dir = dir.string();
    REQUIRE(cmd_counterexample_circle(cfg) == kExitPass);
    const nlohmann::json rep = load_json(dir / "circle_report.json");
    CHECK(rep.at("command") == "cx-circle");
    CHECK(rep.at("summary").at("obstructed") == 3);
    CHECK(fs::exists(dir / "circle_candidates.csv"));
    CHECK(cmd_verify(dir / "circle_report.json") == kExitPass);
}

TEST_CASE("invalid configs exit with the config code") {
    ExperimentConfig cfg = small_homotopy_config();
    cfg.homotopy_dims = {1};
    CHECK(cmd_homotopy(cfg) == kExitConfig);
    ExperimentConfig cfg2 = small_interval_config();
    cfg2.interval_windows = {0.7, 0.5, 0.4};
    CHECK(cmd_counterexample_interval(cfg2) == kExitConfig);
    ExperimentConfig cfg3 = small_circle_config();
    cfg3.circle_chi = {};
    cfg3.circle_amplitudes = {};
    CHECK(cmd_counterexample_circle(cfg3) == kExitConfig);
}
