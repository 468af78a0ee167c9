#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int status;
    std::string out;  // stdout and stderr together
};

Run run(const std::string& args) {
    const std::string cmd = std::string(ENTDIST_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("entdist_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::string kQuick = " --t-max 4 --n-steps 400 --estimate-error false";

}  // namespace

TEST_CASE("simulate writes files and exits 0", "[cli]") {
    const auto dir = scratch("simulate");
    const auto r = run("simulate --model ohmic --eta 0.3 --cutoff 10 --omega0 1 --label q --output-dir " + dir.string() +
                       kQuick);
    INFO(r.out);
    CHECK(r.status == 0);
    CHECK(r.out.find("regime") != std::string::npos);
    CHECK(r.out.find("identity residual") != std::string::npos);
    CHECK(fs::exists(dir / "q_concurrence.csv"));
    CHECK(fs::exists(dir / "q_events.json"));
    fs::remove_all(dir);
}

TEST_CASE("the config file overrides flags", "[cli]") {
    const auto dir = scratch("precedence");
    std::ofstream(dir / "run.cfg") << "alpha = 0.3\nlabel = from_file\n";
    const auto r = run("simulate --alpha 0.9 --label from_flag --config " + (dir / "run.cfg").string() +
                       " --output-dir " + dir.string() + kQuick);
    INFO(r.out);
    REQUIRE(r.status == 0);
    REQUIRE(fs::exists(dir / "from_file_manifest.json"));
    const auto m = json::parse(std::ifstream(dir / "from_file_manifest.json"));
    CHECK(m["inputs"]["alpha"].get<double>() == 0.3);
    fs::remove_all(dir);
}

TEST_CASE("flags override presets", "[cli]") {
    const auto r = run("events --preset fig2 --alpha 0.6" + kQuick);
    INFO(r.out);
    REQUIRE(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j["alpha"].get<double>() == 0.6);
    CHECK(j["label"] == "fig2");
}

TEST_CASE("config errors exit 2 with line and field", "[cli]") {
    const auto dir = scratch("bad");
    std::ofstream(dir / "bad.cfg") << "model = pbg\n# comment\ncutoff = 5\n";
    auto r = run("simulate --config " + (dir / "bad.cfg").string());
    CHECK(r.status == 2);
    CHECK(r.out.find("line 3") != std::string::npos);
    CHECK(r.out.find("cutoff") != std::string::npos);

    std::ofstream(dir / "typo.cfg") << "alpah = 0.5\n";
    r = run("events --config " + (dir / "typo.cfg").string());
    CHECK(r.status == 2);
    CHECK(r.out.find("line 1") != std::string::npos);

    CHECK(run("simulate --config " + (dir / "missing.cfg").string()).status == 2);
    CHECK(run("simulate --alpha 1.5").status == 2);
    CHECK(run("simulate --preset fig7").status == 2);
    CHECK(run("simulate --no-such-flag").status == 2);
    CHECK(run("").status == 2);
    fs::remove_all(dir);
}

TEST_CASE("numerical tolerance failures exit 3", "[cli]") {
    const auto dir = scratch("tolerance");
    const auto r = run("simulate --identity-tolerance 1e-300 --output-dir " + dir.string() + kQuick);
    INFO(r.out);
    CHECK(r.status == 3);
    CHECK(r.out.find("identity residual") != std::string::npos);

    // A grid far too coarse for the kernel makes the solver blow up.
    CHECK(run("simulate --model ohmic --eta 0.3 --cutoff 100 --omega0 1 --t-max 20 --n-steps 20 --output-dir " +
              dir.string())
              .status == 3);
    fs::remove_all(dir);
}

TEST_CASE("boundstate reports presence as JSON", "[cli]") {
    auto r = run("boundstate --model ohmic --eta 0.3 --cutoff 10 --omega0 1");
    REQUIRE(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(j["present"] == true);
    CHECK(j["energy"].get<double>() < 0.0);

    r = run("boundstate --preset fig5");
    REQUIRE(r.status == 0);
    j = json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["present"] == false);
    CHECK(j[1]["present"] == true);
}

TEST_CASE("oracle-check compares against the discretised bath", "[cli]") {
    const auto dir = scratch("oracle");
    const std::string base =
        "oracle-check --model ohmic --eta 0.3 --cutoff 10 --omega0 1 --modes 300 --window 3 --output-dir " +
        dir.string();
    auto r = run(base + " --tolerance 1e-2");
    INFO(r.out);
    CHECK(r.status == 0);
    CHECK(fs::exists(dir / "run_oracle_trajectory.csv"));
    const auto m = json::parse(std::ifstream(dir / "run_oracle_manifest.json"));
    CHECK(m["comparison"]["pass"] == true);
    CHECK(m["oracle"]["recurrence_time"].is_number());

    r = run(base + " --tolerance 1e-12");
    CHECK(r.status == 3);
    fs::remove_all(dir);
}

TEST_CASE("sample configs parse and run", "[cli]") {
    const auto dir = scratch("samples");
    for (const char* name : {"pbg_intermediate.cfg", "ohmic_trapping.cfg", "lorentzian.cfg"}) {
        INFO(name);
        const auto r = run("events --config " + (fs::path(ENTDIST_CONFIGS) / name).string() + " --output-dir " +
                           dir.string());
        CHECK(r.status == 0);
    }
    fs::remove_all(dir);
}

TEST_CASE("help and version exit 0", "[cli]") {
    CHECK(run("--help").status == 0);
    CHECK(run("--version").out.find("0.1.0") != std::string::npos);
}
