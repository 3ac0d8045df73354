/* test_config.cpp
 *
 * Config parsing and validation: raw INI structure, typed extraction,
 * defaults, unknown-key rejection, and the semantic invariants the
 * experiment commands rely on.
 */

#include <catch2/catch_amalgamated.hpp>

#include <cstar/config.hpp>

#include <sstream>

using namespace cstar;

namespace {

ExperimentConfig from_text(const std::string& text) {
    std::istringstream in(text);
    return load_config(in);
}

}  // namespace

TEST_CASE("raw parsing handles sections, comments and whitespace") {
    std::istringstream in(
        "# comment line\n"
        "[run]\n"
        "seed = 42   # trailing comment\n"
        "\n"
        "  out =  results  \n"
        "[homotopy]\n"
        "dims = 2, 4 ,8\n");
    const RawConfig raw = parse_raw_config(in);
    REQUIRE(raw.count("run") == 1);
    CHECK(raw.at("run").at("seed") == "42");
    CHECK(raw.at("run").at("out") == "results");
    CHECK(raw.at("homotopy").at("dims") == "2, 4 ,8");
}

TEST_CASE("raw parsing rejects malformed lines") {
    const auto bad = [](const std::string& text) {
        std::istringstream in(text);
        REQUIRE_THROWS_AS(parse_raw_config(in), std::runtime_error);
    };
    bad("[run\nseed = 1\n");
    bad("[]\n");
    bad("[run]\nnot a key value line\n");
    bad("[run]\n= 3\n");
    bad("seed = 1\n");  // key before any section
}

TEST_CASE("typed extraction fills defaults and overrides") {
    const ExperimentConfig cfg = from_text(
        "[run]\n"
        "seed = 7\n"
        "instances = 3\n"
        "[homotopy]\n"
        "dims = 2,4\n"
        "eps = 0.25\n"
        "[interval]\n"
        "chi = 5,4\n"
        "windows = 0.6, 0.45, 0.3\n"
        "level = 2\n"
        "conjugate = false\n"
        "[circle]\n"
        "chi = 4\n"
        "amplitudes = 0.5\n");
    CHECK(cfg.seed == 7);
    CHECK(cfg.instances == 3);
    CHECK(cfg.out_dir == "out");  // default survives
    CHECK(cfg.homotopy_dims == std::vector<int>{2, 4});
    CHECK(cfg.homotopy_eps == std::vector<double>{0.25});
    CHECK(cfg.homotopy_min_samples == 200);
    CHECK(cfg.interval_chi == std::vector<int>{5, 4});
    CHECK(cfg.interval_windows == std::vector<double>{0.6, 0.45, 0.3});
    CHECK(cfg.interval_level == 2);
    CHECK_FALSE(cfg.interval_conjugate);
    CHECK(cfg.circle_chi == std::vector<int>{4});
    CHECK(cfg.circle_amplitudes == std::vector<double>{0.5});
    CHECK(cfg.validate().empty());
}

TEST_CASE("unknown sections and keys are rejected") {
    REQUIRE_THROWS_AS(from_text("[nonsense]\nx = 1\n"), std::runtime_error);
    REQUIRE_THROWS_AS(from_text("[run]\nseeed = 1\n"), std::runtime_error);
    REQUIRE_THROWS_AS(from_text("[run]\nseed = 12junk\n"), std::runtime_error);
    REQUIRE_THROWS_AS(from_text("[homotopy]\ndims = 2,,4\n"), std::runtime_error);
    REQUIRE_THROWS_AS(from_text("[interval]\nconjugate = maybe\n"), std::runtime_error);
}

TEST_CASE("defaults validate cleanly") {
    const ExperimentConfig cfg;
    CHECK(cfg.validate().empty());
}

TEST_CASE("validation catches the semantic invariants") {
    const auto errors_of = [](void (*mutate)(ExperimentConfig&)) {
        ExperimentConfig cfg;
        mutate(cfg);
        return cfg.validate();
    };

    // Multiplicity floors for the two chain kinds.
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_chi = {2, 7}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.circle_chi = {3}; c.circle_amplitudes = {1.0}; }).empty());

    // The window schedule must start at 3/5 or below and decrease strictly.
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_windows = {0.7, 0.5, 0.4}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_windows = {0.6, 0.6, 0.4}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_windows = {0.6, 0.4}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_windows = {0.6, 0.4, -0.1}; }).empty());

    // Mismatched schedule lengths.
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.circle_amplitudes = {1.0}; }).empty());

    // Scalar ranges.
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.instances = -1; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.homotopy_dims = {1}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.homotopy_eps = {2.5}; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.homotopy_max_samples = 10; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_level = 3; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.interval_margin = 0.25; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.circle_threshold = 0.0; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.circle_slices = 1; }).empty());
    CHECK_FALSE(errors_of([](ExperimentConfig& c) { c.negative_control = "bogus"; }).empty());

    // Several problems surface together, not first-error-only.
    ExperimentConfig cfg;
    cfg.instances = -2;
    cfg.interval_grid = 10;
    cfg.circle_slices = 0;
    CHECK(cfg.validate().size() == 3);
}

TEST_CASE("negative control names are accepted") {
    for (const char* name : {"none", "weak-gap", "loose-nu"}) {
        ExperimentConfig cfg;
        cfg.negative_control = name;
        CHECK(cfg.validate().empty());
    }
}
