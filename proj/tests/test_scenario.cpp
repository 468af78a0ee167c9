#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "entdist/scenario.hpp"

using namespace entdist;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("entdist_test_" + name);
    fs::remove_all(dir);
    return dir;
}

// Relative path -> file bytes for every regular file under dir.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).string()] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    return files;
}

ScenarioSpec small_spec(const fs::path& out) {
    ScenarioSpec s;
    s.label = "small";
    s.model = "pbg";
    s.omega0 = 0.1;
    s.t_max = 10.0;
    s.n_steps = 1000;
    s.sweep_points = 13;
    s.output_dir = out.string();
    return s;
}

}  // namespace

TEST_CASE("a scenario writes its tables and manifest", "[scenario]") {
    const auto dir = scratch_dir("simulate");
    const auto r = run_scenario(small_spec(dir));
    CHECK(r.ok());
    REQUIRE(r.files.size() == 4);
    for (const auto& f : r.files) CHECK(fs::exists(f));

    std::ifstream conc(dir / "small_concurrence.csv");
    std::string header;
    std::getline(conc, header);
    CHECK(header == "t,c_q1q2,c_r1r2,c_q1r1,c_q1r2,identity_residual");
    std::size_t rows = 0;
    for (std::string line; std::getline(conc, line);) ++rows;
    CHECK(rows == 1001);

    const auto manifest = io::json::parse(std::ifstream(dir / "small_manifest.json"));
    CHECK(manifest["inputs"]["alpha"].get<double>() == r.spec.alpha);
    CHECK(manifest["regime"] == r.events.regime);
    CHECK(manifest["solver"]["error_estimate"].is_number());
    fs::remove_all(dir);
}

TEST_CASE("identical scenarios produce identical bytes", "[scenario][determinism]") {
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    run_scenario(small_spec(a));
    run_scenario(small_spec(b));
    CHECK(snapshot(a) == snapshot(b));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("sweep output does not depend on the worker count", "[scenario][determinism]") {
    const auto one = scratch_dir("sweep_1"), many = scratch_dir("sweep_4");
    auto s1 = small_spec(one);
    s1.workers = 1;
    auto s4 = small_spec(many);
    s4.workers = 4;
    const auto r1 = run_sweep(s1);
    const auto r4 = run_sweep(s4);
    CHECK(r1.ok());
    const auto f1 = snapshot(one), f4 = snapshot(many);
    CHECK(f1.size() == 13 + 7);  // per-point tables + four surfaces, trajectory, summary, manifest
    CHECK(f1 == f4);
    CHECK(f1.count("small_sweep_surface_q1q2.csv") == 1);
    CHECK(f1.count((fs::path("small_sweep") / "alpha_012.csv").string()) == 1);

    std::istringstream surface(f1.at("small_sweep_surface_r1r2.csv"));
    std::string header;
    std::getline(surface, header);
    CHECK(header.rfind("alpha,t=0,t=0.10000000000000001,", 0) == 0);  // stride 10 on dt = 0.01
    fs::remove_all(one);
    fs::remove_all(many);
}

TEST_CASE("state checks on a solved trajectory", "[scenario]") {
    auto s = small_spec(scratch_dir("checks"));
    const auto r = run_scenario(s, false);
    CHECK(r.files.empty());
    CHECK(r.checks.max_identity_residual < 1e-12);
    CHECK(r.checks.max_global_deviation < 1e-9);
    CHECK(r.checks.density_ok());
    CHECK(r.checks.max_population <= 1.0 + 1e-12);
    CHECK(r.bound_state.has_value());

    s.identity_tolerance = 1e-300;
    CHECK_FALSE(run_scenario(s, false).ok());
}

TEST_CASE("unwritable output is a config error", "[scenario]") {
    const auto blocker = fs::temp_directory_path() / "entdist_test_blocker";
    fs::remove_all(blocker);
    std::ofstream(blocker) << "file, not a directory";
    auto s = small_spec(blocker / "sub");
    CHECK_THROWS_AS(run_scenario(s), ConfigError);
    CHECK_THROWS_AS(run_sweep(s), ConfigError);
    fs::remove(blocker);
}
