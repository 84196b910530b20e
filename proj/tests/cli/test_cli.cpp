// Drives the built esaccel binary end to end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string output;  // stdout and stderr interleaved
};

Outcome shell(const std::string& cmd) {
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome cli(const std::string& args) { return shell(std::string(ESACCEL_CLI) + " " + args + " 2>&1"); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(ESACCEL_CLI_SCRATCH) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("run writes the trace with the default columns") {
    const auto dir = scratch("run");
    const auto r = cli("run fig2 --out " + q(dir) + " --svg");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("dominant = true") != std::string::npos);
    const auto csv = slurp(dir / "fig2.csv");
    CHECK(csv.rfind("t,x_classical,g,theta_hat,l_hat,valid\n", 0) == 0);
    CHECK(fs::exists(dir / "fig2.svg"));
    CHECK(slurp(dir / "fig2.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("run is byte-deterministic") {
    const auto a = scratch("det-a"), b = scratch("det-b");
    REQUIRE(cli("run fig4 --out " + q(a) + " --svg").code == 0);
    REQUIRE(cli("run fig4 --out " + q(b) + " --svg").code == 0);
    CHECK(slurp(a / "fig4.csv") == slurp(b / "fig4.csv"));
    CHECK(slurp(a / "fig4.svg") == slurp(b / "fig4.svg"));
    // a different seed gives a different trace
    const auto c = scratch("det-c");
    REQUIRE(cli("run fig4 --seed 7 --out " + q(c)).code == 0);
    CHECK(slurp(a / "fig4.csv") != slurp(c / "fig4.csv"));
}

TEST_CASE("fig3 traces theta near its exact value") {
    const auto dir = scratch("fig3");
    REQUIRE(cli("run fig3 --out " + q(dir)).code == 0);
    std::istringstream in(slurp(dir / "fig3.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,g,theta_hat,valid");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const auto t = std::stod(line.substr(0, line.find(',')));
        const auto rest = line.substr(line.find(',') + 1);
        const auto theta = std::stod(rest.substr(rest.find(',') + 1));
        if (t >= 6.0) CHECK(std::abs(theta - std::exp(-0.06)) < 1e-3);
        ++rows;
    }
    CHECK(rows > 100);
}

TEST_CASE("malformed scenario: exit 2, key and line, no files") {
    const auto dir = scratch("bad");
    const auto file = dir / "broken.scenario";
    std::ofstream(file) << "model = basic\nloop.epsilon = 0.01\nloop.wobble = 3\n";
    const auto out = dir / "out";
    const auto r = cli("run " + q(file) + " --out " + q(out));
    CHECK(r.code == 2);
    CHECK(r.output.find("loop.wobble") != std::string::npos);
    CHECK(r.output.find("3") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("numeric failure: exit 3 with scenario context, no files") {
    const auto dir = scratch("diverge");
    const auto file = dir / "blowup.scenario";
    std::ofstream(file) << "model = basic\nloop.x_init = -50\n";
    const auto out = dir / "out";
    const auto r = cli("run " + q(file) + " --out " + q(out));
    CHECK(r.code == 3);
    CHECK(r.output.find("blowup") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "blowup.csv"));
}

TEST_CASE("usage errors exit 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("run").code == 1);
    CHECK(cli("basel 0").code == 1);
    CHECK(cli("sweep fig8 --axis loop.delta --values 1,,2").code == 1);
    CHECK(cli("sweep fig8 --axis loop.nope --values 1").code == 1);
    CHECK(cli("run no-such-scenario").code == 1);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("sweep writes one trace per variant and a table") {
    const auto dir = scratch("sweep");
    const auto r = cli("sweep fig8 --axis loop.delta --values 1,0.1,1e-9 --out " + q(dir));
    REQUIRE(r.code == 0);
    for (int i = 0; i < 3; ++i) CHECK(fs::exists(dir / ("fig8-loop_delta-" + std::to_string(i) + ".csv")));
    const auto table = slurp(dir / "fig8-loop_delta-sweep.csv");
    CHECK(table.rfind("loop.delta,status,", 0) == 0);
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.find(",ok,") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("single-value sweep reproduces run") {
    const auto a = scratch("one-run"), b = scratch("one-sweep");
    REQUIRE(cli("run fig7 --out " + q(a)).code == 0);
    REQUIRE(cli("sweep fig7 --axis loop.q0 --values 0.01 --out " + q(b)).code == 0);
    CHECK(slurp(a / "fig7.csv") == slurp(b / "fig7-loop_q0-0.csv"));
}

TEST_CASE("sweep with a failing variant records it and exits 3") {
    const auto dir = scratch("sweep-fail");
    const auto r = cli("sweep fig8 --axis loop.delta --values 1,-1 --out " + q(dir));
    CHECK(r.code == 3);
    const auto table = slurp(dir / "fig8-loop_delta-sweep.csv");
    CHECK(table.find("\n-1,failed,") != std::string::npos);
    CHECK(fs::exists(dir / "fig8-loop_delta-0.csv"));
    CHECK_FALSE(fs::exists(dir / "fig8-loop_delta-1.csv"));
}

TEST_CASE("breakdown rows are marked") {
    const auto dir = scratch("breakdown");
    const auto r = cli("sweep fig8-breakdown --axis loop.q0 --values 0.4,0.05 --out " + q(dir));
    REQUIRE(r.code == 0);
    std::istringstream in(r.output);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) CHECK(line.find(",1,") != std::string::npos);  // breakdown column
    CHECK(line.empty());
}

TEST_CASE("basel table") {
    const auto r10 = cli("basel");
    REQUIRE(r10.code == 0);
    CHECK(r10.output.find("1.549768") != std::string::npos);
    CHECK(r10.output.find("1.644809") != std::string::npos);
    CHECK(r10.output.find("1.644934") != std::string::npos);
    const auto r1 = cli("basel 1");
    CHECK(r1.output.find("1.000000") != std::string::npos);
    const auto r100 = cli("basel 100");
    REQUIRE(r100.code == 0);
    std::istringstream in(r100.output);
    std::string header;
    int n = 0;
    double s = 0, acc = 0, limit = 0;
    std::getline(in, header);
    in >> n >> s >> acc >> limit;
    CHECK(n == 100);
    CHECK(std::abs(acc - std::numbers::pi * std::numbers::pi / 6) < 1e-6);
}

TEST_CASE("gamma command") {
    const auto fig7 = cli("gamma");
    REQUIRE(fig7.code == 0);
    CHECK(fig7.output.find("gamma = 0.792144779") != std::string::npos);
    CHECK(fig7.output.find("convergent = true") != std::string::npos);
    CHECK(cli("gamma --q0 0").output.find("gamma = 0\n") != std::string::npos);
    const auto broken = cli("gamma --epsilon 0.01 --delta 0.1 --q0 0.4");
    CHECK(broken.output.find("convergent = false") != std::string::npos);
    CHECK(cli("gamma --delta 0").code == 1);
}

TEST_CASE("presets list and the override variable") {
    const auto r = cli("presets list");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("fig2\n") != std::string::npos);
    CHECK(r.output.find("fig8-breakdown\n") != std::string::npos);
    const auto dir = scratch("presets");
    std::ofstream(dir / "mine.scenario") << "model = basic\n";
    const auto own = shell("ES_ACCEL_PRESETS=" + q(dir) + " " + ESACCEL_CLI + " presets list 2>&1");
    CHECK(own.code == 0);
    CHECK(own.output == "mine\n");
}
